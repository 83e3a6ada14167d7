//! Gnuplot script emission for `bands.csv`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::bands::tail_interval;
use crate::error::{Error, Result};
use crate::profiles::TailBounds;

/// A horizontal reference line.
#[derive(Debug, Clone, PartialEq)]
pub struct Guide {
    pub label: String,
    pub value: f64,
}

/// Lower ends of the tail intervals `b̲(2n−1)+w̲` for both tails, skipped
/// when the field tails are not both positive.
pub fn tail_guides(t: &TailBounds, k: usize) -> Vec<Guide> {
    if !t.both_fields_positive() {
        return Vec::new();
    }
    let mut out: Vec<Guide> = Vec::new();
    for n in 1..=k {
        for (plus, tag) in [(true, "+"), (false, "-")] {
            let value = tail_interval(t, n, plus).0;
            if out.iter().any(|g| g.value == value) {
                continue;
            }
            out.push(Guide {
                label: format!("n={n} tail {tag}"),
                value,
            });
        }
    }
    out
}

fn band_count(csv_path: &Path) -> Result<usize> {
    let mut reader = csv::Reader::from_path(csv_path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("{}: {other:?}", csv_path.display())),
    })?;
    let headers = reader.headers()?;
    let k = headers.iter().filter(|h| h.starts_with("lambda_")).count();
    if k == 0 {
        return Err(Error::Config(format!(
            "{}: no lambda_ columns",
            csv_path.display()
        )));
    }
    Ok(k)
}

fn relative_to_script(csv_path: &Path, script: &Path) -> PathBuf {
    let dir = script.parent().unwrap_or(Path::new(""));
    let absolute = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
    pathdiff::diff_paths(absolute(csv_path), absolute(dir))
        .unwrap_or_else(|| csv_path.to_path_buf())
}

/// Script text plotting every band of `csv_path` against `ξ`. The same
/// inputs always give the same bytes.
pub fn plot_script(csv_path: &Path, script: &Path, guides: &[Guide]) -> Result<String> {
    let k = band_count(csv_path)?;
    let rel = relative_to_script(csv_path, script);
    let rel = rel.to_string_lossy().replace('\\', "/");
    let mut s = String::new();
    writeln!(s, "# dispersion curves lambda_n(xi)").unwrap();
    writeln!(s, "set datafile separator ','").unwrap();
    writeln!(s, "set xlabel 'xi'").unwrap();
    writeln!(s, "set ylabel 'lambda'").unwrap();
    writeln!(s, "set key outside right").unwrap();
    for (i, g) in guides.iter().enumerate() {
        writeln!(
            s,
            "set arrow {} from graph 0, first {:.16e} to graph 1, first {:.16e} nohead dashtype 2 # {}",
            i + 1,
            g.value,
            g.value,
            g.label
        )
        .unwrap();
    }
    let curves: Vec<String> = (1..=k)
        .map(|n| format!("'{rel}' using 1:{} with lines title 'lambda_{n}'", n + 1))
        .collect();
    writeln!(s, "plot {}", curves.join(", \\\n     ")).unwrap();
    Ok(s)
}

/// Write [`plot_script`] to `script`.
pub fn emit_plot_script(csv_path: &Path, script: &Path, guides: &[Guide]) -> Result<()> {
    let text = plot_script(csv_path, script, guides)?;
    std::fs::write(script, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::{export_sweep, sweep, BandDiagnostics, BandProblem, SweepOptions};

    fn exported(name: &str, dir: &Path) -> BandProblem {
        let p = BandProblem::builtin(name).unwrap();
        let opts = SweepOptions::default();
        let s = sweep(&p, &[-20.0, 0.0, 20.0], 3, &opts).unwrap();
        let d = BandDiagnostics::compute(&s, &p.tails, &opts);
        export_sweep(&s, &d, &p, &opts, dir).unwrap();
        p
    }

    #[test]
    fn landau_script_has_three_flat_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = exported("landau", dir.path());
        let guides = tail_guides(&p.tails, 3);
        assert_eq!(
            guides.iter().map(|g| g.value).collect::<Vec<_>>(),
            vec![1.0, 3.0, 5.0]
        );
        let csv = dir.path().join("bands.csv");
        let script = dir.path().join("bands.gp");
        emit_plot_script(&csv, &script, &guides).unwrap();
        let text = std::fs::read_to_string(&script).unwrap();
        assert_eq!(text.matches("with lines").count(), 3);
        assert!(text.contains("'bands.csv' using 1:4"));
        assert_eq!(text, plot_script(&csv, &script, &guides).unwrap());
    }

    #[test]
    fn step_script_has_tail_guides() {
        let dir = tempfile::tempdir().unwrap();
        let p = exported("iwatsuka-step", dir.path());
        let guides = tail_guides(&p.tails, 3);
        let values: Vec<f64> = guides.iter().map(|g| g.value).collect();
        assert_eq!(values, vec![2.0, 1.0, 6.0, 3.0, 10.0, 5.0]);
        let sub = dir.path().join("plots");
        std::fs::create_dir(&sub).unwrap();
        let text = plot_script(&dir.path().join("bands.csv"), &sub.join("b.gp"), &guides).unwrap();
        assert!(text.contains("'../bands.csv'"), "{text}");
        assert_eq!(text.matches("set arrow").count(), 6);
    }

    #[test]
    fn missing_csv_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_plot_script(&dir.path().join("nope.csv"), &dir.path().join("x.gp"), &[]);
        assert!(err.is_err());
        assert!(!dir.path().join("x.gp").exists());
    }
}
