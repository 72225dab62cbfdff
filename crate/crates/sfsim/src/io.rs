//! CSV and tag-dump writers.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use sfsim_core::analysis::FringeScan;
use sfsim_core::detection::CorrelationHistogram;
use sfsim_core::pipeline::TaggedEvent;

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    let file =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(std::io::BufWriter::new(file))
}

/// `delta_L_nm,coincidences,accidentals,net`
pub fn write_fringe_csv(path: &Path, scan: &FringeScan) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "delta_L_nm,coincidences,accidentals,net")?;
    for s in &scan.samples {
        writeln!(w, "{},{},{},{}", s.delta_l_nm, s.coincidences, s.accidentals, s.net())?;
    }
    Ok(())
}

/// `dtau_ps,counts`
pub fn write_histogram_csv(path: &Path, hist: &CorrelationHistogram) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "dtau_ps,counts")?;
    for (i, &c) in hist.counts.iter().enumerate() {
        writeln!(w, "{},{}", hist.bin_center_ps(i), c)?;
    }
    Ok(())
}

/// `delta_L_nm,area` for classical scans.
pub fn write_classical_csv(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "delta_L_nm,area")?;
    for (delta, area) in points {
        writeln!(w, "{delta},{area}")?;
    }
    Ok(())
}

/// `t_ns,bright,dark`
pub fn write_profiles_csv(path: &Path, t_ns: &[f64], bright: &[f64], dark: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t_ns,bright,dark")?;
    for ((t, a), b) in t_ns.iter().zip(bright).zip(dark) {
        writeln!(w, "{t},{a},{b}")?;
    }
    Ok(())
}

/// Tab-separated `detector\ttime_ps` dump of a tag stream.
pub fn write_tags(path: &Path, events: &[TaggedEvent]) -> Result<()> {
    let mut w = create(path)?;
    for e in events {
        writeln!(w, "{}\t{}", e.detector, e.time_ps)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sfsim_core::analysis::FringeSample;

    #[test]
    fn fringe_csv_round_trip_text() {
        let scan = FringeScan {
            samples: vec![
                FringeSample { delta_l_nm: 0.0, coincidences: 10, accidentals: 2 },
                FringeSample { delta_l_nm: 6.0, coincidences: 7, accidentals: 9 },
            ],
            step_nm: 6.0,
        };
        let dir = std::env::temp_dir().join("sfsim-io-test");
        let path = dir.join("fringe.csv");
        write_fringe_csv(&path, &scan).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "delta_L_nm,coincidences,accidentals,net\n0,10,2,8\n6,7,9,-2\n");
        std::fs::remove_dir_all(&dir).ok();
    }
}
