//! CSV inputs and output destinations.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{usage, CliError, Result};

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| CliError::Csv { path: path.display().to_string(), source })
}

fn columns<const N: usize>(path: &Path, expected: [&str; N]) -> Result<Vec<[String; N]>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|source| CliError::Csv { path: path.display().to_string(), source })?.clone();
    let idx: Vec<usize> = expected
        .iter()
        .map(|name| {
            headers.iter().position(|h| h == *name).ok_or_else(|| usage!("{}: missing column '{name}'", path.display()))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|source| CliError::Csv { path: path.display().to_string(), source })?;
        out.push(std::array::from_fn(|i| rec.get(idx[i]).unwrap_or("").to_string()));
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(path: &Path, row: usize, name: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| usage!("{}: row {}: bad {name} '{raw}'", path.display(), row + 1))
}

/// Spectral atoms from a `lambda,mass` CSV.
pub fn read_spectrum(path: &Path) -> Result<Vec<(f64, f64)>> {
    columns(path, ["lambda", "mass"])?
        .iter()
        .enumerate()
        .map(|(i, [l, m])| Ok((parse_field(path, i, "lambda", l)?, parse_field(path, i, "mass", m)?)))
        .collect()
}

/// Lattice samples from a `k,value` CSV.
pub fn read_samples(path: &Path) -> Result<Vec<(i64, f64)>> {
    columns(path, ["k", "value"])?
        .iter()
        .enumerate()
        .map(|(i, [k, v])| Ok((parse_field(path, i, "k", k)?, parse_field(path, i, "value", v)?)))
        .collect()
}

/// Writes `content` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        fs::write(&p, "# two atoms\nmass,lambda\n0.5, 0.25\n0.5,-0.25\n").unwrap();
        assert_eq!(read_spectrum(&p).unwrap(), vec![(0.25, 0.5), (-0.25, 0.5)]);
        fs::write(&p, "lambda,weight\n0.1,1\n").unwrap();
        assert!(matches!(read_spectrum(&p), Err(CliError::Usage(_))));
        fs::write(&p, "lambda,mass\nx,1\n").unwrap();
        assert!(read_spectrum(&p).unwrap_err().to_string().contains("row 1"));
    }

    #[test]
    fn samples_parse() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.csv");
        fs::write(&p, "k,value\n-1,0.5\n0,1\n1,0.5\n").unwrap();
        assert_eq!(read_samples(&p).unwrap(), vec![(-1, 0.5), (0, 1.0), (1, 0.5)]);
    }
}
