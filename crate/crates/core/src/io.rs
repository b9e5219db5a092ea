//! Reading directional data files and experiment configurations.
//!
//! Data files are comma-separated rows without a header; blank lines and
//! lines starting with `#` are skipped. Configurations are flat `key=value`
//! files, e.g.
//!
//! ```text
//! figure = fig2
//! n = 200
//! M = 10000
//! ell = 0..=3
//! r = 0, 3, 6
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::normalize;
use crate::mc::{ExperimentSpec, Figure};
use crate::model::{RadialFunction, RegimeKind};
use crate::sampling::Sample;

/// Largest accepted `| ||x|| - 1 |` for Cartesian input rows.
pub const INPUT_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// One unit vector per row.
    Cartesian,
    /// `colatitude,longitude` in degrees, `p = 3` only.
    AnglesDeg,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cartesian" => Ok(DataFormat::Cartesian),
            "angles_deg" | "angles-deg" => Ok(DataFormat::AnglesDeg),
            other => Err(Error::domain(format!(
                "unknown data format `{other}` (expected cartesian or angles_deg)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub format: DataFormat,
    /// Expected dimension; inferred from the first row when `None`.
    pub p: Option<usize>,
}

fn parse_err(line: usize, column: Option<usize>, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_row(line_no: usize, line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .enumerate()
        .map(|(c, field)| {
            let field = field.trim();
            field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                parse_err(line_no, Some(c + 1), format!("`{field}` is not a finite number"))
            })
        })
        .collect()
}

/// Parses data text in the given format.
pub fn parse_sample(text: &str, format: DataFormat, p: Option<usize>) -> Result<Sample> {
    let mut dim = match format {
        DataFormat::AnglesDeg => {
            if let Some(p) = p.filter(|&p| p != 3) {
                return Err(Error::domain(format!("angles_deg data live on S^2, not p = {p}")));
            }
            Some(3)
        }
        DataFormat::Cartesian => p,
    };
    let mut data = Vec::new();
    for (line_no, line) in data_lines(text) {
        let row = parse_row(line_no, line)?;
        let coords = match format {
            DataFormat::Cartesian => {
                let d = *dim.get_or_insert(row.len());
                if d < 2 {
                    return Err(parse_err(line_no, None, "rows need two or more coordinates"));
                }
                if row.len() != d {
                    return Err(parse_err(
                        line_no,
                        None,
                        format!("expected {d} columns, found {}", row.len()),
                    ));
                }
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > INPUT_NORM_TOL {
                    return Err(Error::Normalization {
                        line: line_no,
                        norm,
                    });
                }
                normalize(&row)?.into_inner()
            }
            DataFormat::AnglesDeg => {
                if row.len() != 2 {
                    return Err(parse_err(
                        line_no,
                        None,
                        format!("expected colatitude,longitude, found {} columns", row.len()),
                    ));
                }
                let (colat, lon) = (row[0], row[1]);
                if !(0.0..=180.0).contains(&colat) {
                    return Err(parse_err(line_no, Some(1), format!("colatitude {colat} outside [0, 180]")));
                }
                if !(0.0..360.0).contains(&lon) {
                    return Err(parse_err(line_no, Some(2), format!("longitude {lon} outside [0, 360)")));
                }
                let (sc, cc) = colat.to_radians().sin_cos();
                let (sl, cl) = lon.to_radians().sin_cos();
                normalize(&[sc * cl, sc * sl, cc])?.into_inner()
            }
        };
        data.extend(coords);
    }
    let p = dim.ok_or_else(|| parse_err(1, None, "no data rows"))?;
    if data.is_empty() {
        return Err(parse_err(1, None, "no data rows"));
    }
    Sample::from_flat(p, data)
}

pub fn load_sample(spec: &DatasetSpec) -> Result<Sample> {
    let text = std::fs::read_to_string(&spec.path)
        .map_err(|e| Error::Io(format!("{}: {e}", spec.path.display())))?;
    parse_sample(&text, spec.format, spec.p)
}

/// Cartesian rows with round-trip precision.
pub fn sample_to_csv(sample: &Sample) -> String {
    let mut out = String::new();
    for row in sample.rows() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

fn parse_scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_err(key, format!("cannot parse `{value}`")))
}

/// Comma-separated values or an inclusive range `a..=b`.
fn parse_list<T>(key: &str, value: &str) -> Result<Vec<T>>
where
    T: FromStr + Copy + Into<u64> + TryFrom<u64>,
{
    if let Some((a, b)) = value.split_once("..=") {
        let a: T = parse_scalar(key, a.trim())?;
        let b: T = parse_scalar(key, b.trim())?;
        let (a, b): (u64, u64) = (a.into(), b.into());
        if a > b {
            return Err(config_err(key, format!("empty range `{value}`")));
        }
        return (a..=b)
            .map(|v| T::try_from(v).map_err(|_| config_err(key, "range value out of bounds")))
            .collect();
    }
    value
        .split(',')
        .map(|v| parse_scalar(key, v.trim()))
        .collect()
}

const KEYS: [&str; 12] = [
    "figure", "p", "n", "M", "alpha", "seed", "radial", "xi", "ell", "r", "mc_draws", "regimes",
];

/// Parses a configuration; unspecified keys take the figure's preset.
pub fn parse_experiment(text: &str) -> Result<ExperimentSpec> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut seen = BTreeSet::new();
    for (line_no, line) in data_lines(text) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err("", format!("line {line_no}: expected key=value")))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if !KEYS.contains(&k.as_str()) {
            return Err(config_err(&k, format!("unknown key (line {line_no})")));
        }
        if !seen.insert(k.clone()) {
            return Err(config_err(&k, format!("duplicate key (line {line_no})")));
        }
        pairs.push((k, v));
    }
    let figure: Figure = pairs
        .iter()
        .find(|(k, _)| k == "figure")
        .map(|(_, v)| v.parse())
        .transpose()?
        .ok_or_else(|| config_err("figure", "missing"))?;
    let mut spec = ExperimentSpec::preset(figure);
    for (k, v) in &pairs {
        match k.as_str() {
            "figure" => {}
            "p" => spec.p = parse_scalar(k, v)?,
            "n" => {
                spec.ns = parse_list::<u64>(k, v)?
                    .into_iter()
                    .map(|n| n as usize)
                    .collect()
            }
            "M" => spec.replicates = parse_scalar(k, v)?,
            "alpha" => spec.alpha = parse_scalar(k, v)?,
            "seed" => spec.seed = parse_scalar(k, v)?,
            "radial" => {
                spec.radial =
                    RadialFunction::by_name(v).map_err(|e| config_err(k, e.to_string()))?
            }
            "xi" => spec.xi = parse_scalar(k, v)?,
            "ell" => spec.ells = parse_list(k, v)?,
            "r" => spec.rs = parse_list(k, v)?,
            "mc_draws" => spec.mc_draws = parse_scalar(k, v)?,
            "regimes" => {
                spec.regimes = v
                    .split(',')
                    .map(|s| s.trim().parse::<RegimeKind>().map_err(|e| config_err(k, e.to_string())))
                    .collect::<Result<_>>()?
            }
            _ => unreachable!("keys are checked above"),
        }
    }
    spec.validate()?;
    Ok(spec)
}

pub fn load_experiment(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_experiment(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_and_angles() {
        let s = parse_sample("# header comment\n0,0,1\n\n0.6, 0.8, 0\n", DataFormat::Cartesian, None).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.row(0), &[0.0, 0.0, 1.0]);
        let a = parse_sample("90,0\n0,45\n", DataFormat::AnglesDeg, None).unwrap();
        assert!((a.row(0)[0] - 1.0).abs() < 1e-15 && a.row(0)[1] == 0.0 && a.row(0)[2].abs() < 1e-15);
        assert_eq!(a.row(1), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn malformed_rows_are_located() {
        assert!(matches!(
            parse_sample("0,0,1\n1,1,1\n", DataFormat::Cartesian, None),
            Err(Error::Normalization { line: 2, .. })
        ));
        assert!(matches!(
            parse_sample("0,0,1\n0,x,1\n", DataFormat::Cartesian, None),
            Err(Error::Parse { line: 2, column: Some(2), .. })
        ));
        assert!(matches!(
            parse_sample("0,0,1\n0,1\n", DataFormat::Cartesian, None),
            Err(Error::Parse { line: 2, column: None, .. })
        ));
        assert!(matches!(
            parse_sample("190,0\n", DataFormat::AnglesDeg, None),
            Err(Error::Parse { line: 1, column: Some(1), .. })
        ));
        assert!(matches!(
            parse_sample("10,360\n", DataFormat::AnglesDeg, None),
            Err(Error::Parse { line: 1, column: Some(2), .. })
        ));
        assert!(parse_sample("# nothing\n", DataFormat::Cartesian, None).is_err());
        assert!(parse_sample("1,0\n", DataFormat::Cartesian, Some(3)).is_err());
    }

    #[test]
    fn configs() {
        let s = parse_experiment("figure=fig1").unwrap();
        assert_eq!(s.ns, vec![100, 1000]);
        assert_eq!(s.replicates, 10_000);
        assert_eq!(s.alpha, 0.05);
        assert_eq!(s.radial.name(), "fvml");
        let s = parse_experiment("figure = fig3\n# comment\n").unwrap();
        assert_eq!((s.xi, s.ns.clone()), (1.0, vec![200]));
        let s = parse_experiment("figure=fig2\nell=0..=2\nr=0,3\nM=500\nradial=logistic").unwrap();
        assert_eq!(s.ells, vec![0, 1, 2]);
        assert_eq!(s.rs, vec![0, 3]);
        let s = parse_experiment("figure=thm21\nregimes=beyond,strict\nxi=2").unwrap();
        assert_eq!(s.regimes, vec![RegimeKind::BeyondContiguity, RegimeKind::StrictContiguity]);

        let key_of = |text: &str| match parse_experiment(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("{other:?}"),
        };
        assert_eq!(key_of("figure=fig1\nalpha=1.5"), "alpha");
        assert_eq!(key_of("figure=fig1\nM=abc"), "M");
        assert_eq!(key_of("figure=fig1\ncolour=red"), "colour");
        assert_eq!(key_of("figure=fig1\nM=100\nM=200"), "M");
        assert_eq!(key_of("p=3"), "figure");
        assert_eq!(key_of("figure=fig9"), "figure");
        assert_eq!(key_of("figure=fig1\nradial=cauchy"), "radial");
        assert_eq!(key_of("figure=fig3\nxi=2"), "xi");
    }
}
