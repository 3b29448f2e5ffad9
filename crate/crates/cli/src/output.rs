//! CSV series, key=value summaries and the run manifest.
//!
//! Reals are written as `{:.16e}` (17 significant digits), which parses back
//! to the identical `f64`.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use gravclock::scenarios::{Run, Sample, ScenarioResult};
use gravclock::quantum::Spectrum;

use crate::CliError;

pub const SUMMARY_FILE: &str = "summary.txt";
pub const MANIFEST_FILE: &str = "manifest.txt";

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Column names for a clock with `levels` internal levels.
pub fn csv_header(levels: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["t", "norm", "mean_x", "mean_p", "purity", "visibility"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((1..levels).map(|k| format!("phase_{k}")));
    cols.extend((0..levels).map(|k| format!("level_pop_{k}")));
    cols
}

fn sample_row(s: &Sample) -> Vec<f64> {
    let mut row = vec![s.t, s.norm, s.mean_x, s.mean_p, s.purity, s.visibility];
    row.extend(&s.phases);
    row.extend(&s.populations);
    row
}

pub fn write_csv<W: Write>(run: &Run, levels: usize, sink: &mut W) -> io::Result<()> {
    writeln!(sink, "{}", csv_header(levels).join(","))?;
    for s in &run.samples {
        let row: Vec<String> = sample_row(s).into_iter().map(real).collect();
        writeln!(sink, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_summary<W: Write>(result: &ScenarioResult, sink: &mut W) -> io::Result<()> {
    writeln!(sink, "kind={}", result.kind.name())?;
    for (key, value) in &result.summary {
        writeln!(sink, "{key}={}", real(*value))?;
    }
    for c in &result.checks {
        let name = &c.name;
        writeln!(sink, "check.{name}.measured={}", real(c.measured))?;
        writeln!(sink, "check.{name}.expected={}", real(c.expected))?;
        writeln!(sink, "check.{name}.tolerance={}", real(c.tolerance))?;
        writeln!(sink, "check.{name}.relative={}", c.relative)?;
        writeln!(sink, "check.{name}.passed={}", c.passed)?;
    }
    writeln!(sink, "passed={}", result.passed())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
) -> Result<String, CliError> {
    let path = dir.join(name);
    let mut w = create(&path)?;
    body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
    Ok(name.to_string())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes `<label>.csv` per run and the summary file; returns the file names.
pub fn emit_result(result: &ScenarioResult, levels: usize, dir: &Path) -> Result<Vec<String>, CliError> {
    ensure_dir(dir)?;
    let mut files = Vec::new();
    for run in &result.runs {
        files.push(write_file(dir, &format!("{}.csv", run.label), |w| write_csv(run, levels, w))?);
    }
    files.push(write_file(dir, SUMMARY_FILE, |w| write_summary(result, w))?);
    Ok(files)
}

/// Writes `eigen_energies.csv` and one `eigenstates_level_<k>.csv` per level.
pub fn emit_spectra(spectra: &[Spectrum], x: &[f64], dx: f64, dir: &Path) -> Result<Vec<String>, CliError> {
    ensure_dir(dir)?;
    let mut files = vec![write_file(dir, "eigen_energies.csv", |w| {
        writeln!(w, "level,index,energy,mean_x")?;
        for (level, s) in spectra.iter().enumerate() {
            for (i, (e, psi)) in s.energies.iter().zip(&s.wavefunctions).enumerate() {
                let mean_x: f64 = psi.iter().zip(x).map(|(v, xi)| v * v * xi).sum::<f64>() * dx;
                writeln!(w, "{level},{},{},{}", i + 1, real(*e), real(mean_x))?;
            }
        }
        Ok(())
    })?];
    for (level, s) in spectra.iter().enumerate() {
        files.push(write_file(dir, &format!("eigenstates_level_{level}.csv"), |w| {
            let mut header = vec!["x".to_string()];
            header.extend((1..=s.wavefunctions.len()).map(|i| format!("psi_{i}")));
            writeln!(w, "{}", header.join(","))?;
            for (i, xi) in x.iter().enumerate() {
                let mut row = vec![real(*xi)];
                row.extend(s.wavefunctions.iter().map(|psi| real(psi[i])));
                writeln!(w, "{}", row.join(","))?;
            }
            Ok(())
        })?);
    }
    Ok(files)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub duration_s: f64,
    pub version: String,
    pub config_hash: String,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut s = format!(
            "config={}\nout_dir={}\nversion={}\nconfig_hash={}\nduration_s={}\n",
            self.config_path.display(),
            self.out_dir.display(),
            self.version,
            self.config_hash,
            self.duration_s
        );
        for f in &self.files {
            s.push_str(&format!("file={f}\n"));
        }
        s
    }

    pub fn write(&self) -> Result<(), CliError> {
        let path = self.out_dir.join(MANIFEST_FILE);
        fs::write(&path, self.render()).map_err(|e| CliError::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64) -> Sample {
        Sample {
            t,
            norm: 1.0,
            mean_x: -0.25,
            mean_p: 0.0,
            purity: 1.0,
            visibility: 1.0,
            phases: vec![0.1 * t],
            populations: vec![0.5, 0.5],
        }
    }

    #[test]
    fn header_names_every_column() {
        assert_eq!(
            csv_header(3).join(","),
            "t,norm,mean_x,mean_p,purity,visibility,phase_1,phase_2,level_pop_0,level_pop_1,level_pop_2"
        );
    }

    #[test]
    fn reals_use_seventeen_digits() {
        assert_eq!(real(0.1), "1.0000000000000001e-1");
        assert_eq!(real(-2.5), "-2.5000000000000000e0");
        assert_eq!(real(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn summary_lists_scalars_and_checks() {
        use gravclock::scenarios::{Check, ScenarioKind};
        let result = ScenarioResult {
            kind: ScenarioKind::MovingClock,
            runs: vec![Run { label: "clock".into(), samples: vec![sample(0.0)] }],
            summary: vec![("deficit_measured".into(), 0.005)],
            checks: vec![Check::absolute("deficit", 0.005, 0.005, 1e-6)],
        };
        let mut buf = Vec::new();
        write_summary(&result, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("kind=moving_clock\ndeficit_measured=5.0000000000000001e-3\n"));
        assert!(text.contains("check.deficit.passed=true\n"));
        assert!(text.ends_with("passed=true\n"));
    }

    #[test]
    fn manifest_lists_files() {
        let m = RunManifest {
            config_path: "a.cfg".into(),
            out_dir: "out".into(),
            files: vec!["low.csv".into(), "summary.txt".into()],
            duration_s: 0.5,
            version: "0.1.0".into(),
            config_hash: "ab".into(),
        };
        assert_eq!(
            m.render(),
            "config=a.cfg\nout_dir=out\nversion=0.1.0\nconfig_hash=ab\nduration_s=0.5\nfile=low.csv\nfile=summary.txt\n"
        );
    }
}
