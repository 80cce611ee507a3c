//! Text persistence for [`QuantileTable`]. See `FORMAT.md` at the
//! repository root for the layout and a worked example.
//!
//! A file is a `key=value` header, one body line per `(record, kind, p)`
//! holding comma-separated values across the sample-size grid, and a final
//! `checksum=` line: the FNV-1a 64-bit hash of every byte before it, as 16
//! lowercase hex digits. Lines end in LF. Reals are written in C-locale
//! scientific notation with 17 significant digits, which round-trips every
//! binary64 value.

use std::fs::File;
use std::hash::Hasher;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use fnv::FnvHasher;

use crate::error::{Error, Result};
use crate::moments::StatisticKind;
use crate::rng::{GeneratorKind, TRANSFORM_NAME};
use crate::simulate::{QuantileTable, SimConfig, FORMAT_VERSION};

pub const QUANTILE_ESTIMATOR: &str = "order-statistic-linear-(R-1)p";

/// 64-bit FNV-1a.
pub fn checksum(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// 17 significant digits, e.g. `9.4999999999999996e-1`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn join_reals(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(format_real)
        .collect::<Vec<_>>()
        .join(",")
}

pub(crate) fn parse_real(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("bad number `{s}`"),
    })
}

pub(crate) fn parse_reals(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split(',').map(|v| parse_real(v, line)).collect()
}

fn parse_int<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.trim().parse::<T>().map_err(|_| Error::Parse {
        line,
        msg: format!("bad integer `{s}`"),
    })
}

/// Appends the checksum line to `body`.
pub(crate) fn seal(mut text: String) -> String {
    let sum = checksum(text.as_bytes());
    text.push_str(&format!("checksum={sum:016x}\n"));
    text
}

/// Checks the version line and the trailing checksum; returns the lines
/// before the checksum, numbered from 1.
pub(crate) fn unseal<'a>(
    text: &'a str,
    version_key: &str,
    version: u32,
) -> Result<Vec<(usize, &'a str)>> {
    let first = text.lines().next().unwrap_or("");
    match first.strip_prefix(&format!("{version_key}=")) {
        Some(v) if v.trim() == version.to_string() => {}
        Some(v) => return Err(Error::UnsupportedFormat(v.trim().to_string())),
        None => {
            return Err(Error::UnsupportedFormat(format!(
                "missing `{version_key}` line"
            )))
        }
    }

    let body_end = text
        .trim_end_matches('\n')
        .rfind('\n')
        .map(|i| i + 1)
        .ok_or_else(|| Error::CorruptTable("missing checksum line".into()))?;
    let (covered, trailer) = text.split_at(body_end);
    let stated = trailer
        .trim_end()
        .strip_prefix("checksum=")
        .ok_or_else(|| Error::CorruptTable("missing checksum line".into()))?;
    let stated = u64::from_str_radix(stated, 16)
        .map_err(|_| Error::CorruptTable(format!("unreadable checksum `{stated}`")))?;
    let actual = checksum(covered.as_bytes());
    if stated != actual {
        return Err(Error::CorruptTable(format!(
            "checksum mismatch: file says {stated:016x}, content hashes to {actual:016x}"
        )));
    }
    Ok(covered
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .collect())
}

/// Canonical text of `table`.
pub fn to_canonical_string(table: &QuantileTable) -> String {
    let cfg = table.config();
    let mut out = String::new();
    let mut header = |k: &str, v: &str| {
        out.push_str(k);
        out.push('=');
        out.push_str(v);
        out.push('\n');
    };
    header("format_version", &FORMAT_VERSION.to_string());
    header("generator", cfg.generator.name());
    header("lag_pair", cfg.generator.lag_pair());
    header("transform", TRANSFORM_NAME);
    header("quantile_estimator", QUANTILE_ESTIMATOR);
    header("seed", &cfg.seed.to_string());
    header("chunk_size", &cfg.chunk_size.to_string());
    header("replications", &cfg.replications.to_string());
    header("kinds", "LM,ALM");
    header(
        "n_grid",
        &cfg.n_grid
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    header("p_grid", &join_reals(cfg.p_grid.iter().copied()));

    for (record, values) in [("q", false), ("se", true)] {
        for kind in StatisticKind::ALL {
            for (i, &p) in cfg.p_grid.iter().enumerate() {
                let row = if values {
                    table.std_error_row(kind, i)
                } else {
                    table.row(kind, i)
                };
                out.push_str(&format!(
                    "{record},{kind},{},{}\n",
                    format_real(p),
                    join_reals(row.iter().copied())
                ));
            }
        }
    }
    seal(out)
}

pub fn save_table<W: Write>(table: &QuantileTable, mut sink: W) -> Result<()> {
    sink.write_all(to_canonical_string(table).as_bytes())?;
    sink.flush()?;
    Ok(())
}

pub fn save_table_to_path(table: &QuantileTable, path: impl AsRef<Path>) -> Result<()> {
    save_table(table, BufWriter::new(File::create(path)?))
}

pub fn load_table<R: Read>(mut source: R) -> Result<QuantileTable> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::CorruptTable("file is not valid UTF-8".into()))?;
    parse_table(&text)
}

pub fn load_table_from_path(path: impl AsRef<Path>) -> Result<QuantileTable> {
    load_table(File::open(path)?)
}

fn parse_table(text: &str) -> Result<QuantileTable> {
    let lines = unseal(text, "format_version", FORMAT_VERSION)?;

    let mut generator = None;
    let mut lag_pair = None;
    let mut transform = None;
    let mut estimator = None;
    let mut seed = None;
    let mut chunk_size = None;
    let mut replications = None;
    let mut kinds = None;
    let mut n_grid: Option<Vec<usize>> = None;
    let mut p_grid: Option<Vec<f64>> = None;
    let mut body = Vec::new();

    for &(no, line) in &lines[1..] {
        if let Some((key, value)) = line.split_once('=') {
            match key {
                "generator" => generator = Some(value.parse::<GeneratorKind>()?),
                "lag_pair" => lag_pair = Some(value),
                "transform" => transform = Some(value),
                "quantile_estimator" => estimator = Some(value),
                "seed" => seed = Some(parse_int::<u64>(value, no)?),
                "chunk_size" => chunk_size = Some(parse_int::<u64>(value, no)?),
                "replications" => replications = Some(parse_int::<u64>(value, no)?),
                "kinds" => kinds = Some(value),
                "n_grid" => {
                    n_grid = Some(
                        value
                            .split(',')
                            .map(|v| parse_int::<usize>(v, no))
                            .collect::<Result<_>>()?,
                    )
                }
                "p_grid" => p_grid = Some(parse_reals(value, no)?),
                _ => {
                    return Err(Error::Parse {
                        line: no,
                        msg: format!("unknown header key `{key}`"),
                    })
                }
            }
        } else {
            body.push((no, line));
        }
    }

    let missing = |k: &str| Error::Parse {
        line: 0,
        msg: format!("missing header key `{k}`"),
    };
    let generator = generator.ok_or_else(|| missing("generator"))?;
    if lag_pair.ok_or_else(|| missing("lag_pair"))? != generator.lag_pair() {
        return Err(Error::InvalidTable(format!(
            "lag pair does not match generator {generator}"
        )));
    }
    let transform = transform.ok_or_else(|| missing("transform"))?;
    if transform != TRANSFORM_NAME {
        return Err(Error::UnsupportedFormat(format!("transform `{transform}`")));
    }
    let estimator = estimator.ok_or_else(|| missing("quantile_estimator"))?;
    if estimator != QUANTILE_ESTIMATOR {
        return Err(Error::UnsupportedFormat(format!(
            "quantile estimator `{estimator}`"
        )));
    }
    if kinds.ok_or_else(|| missing("kinds"))? != "LM,ALM" {
        return Err(Error::InvalidTable("kinds must be `LM,ALM`".into()));
    }
    let config = SimConfig {
        n_grid: n_grid.ok_or_else(|| missing("n_grid"))?,
        p_grid: p_grid.ok_or_else(|| missing("p_grid"))?,
        replications: replications.ok_or_else(|| missing("replications"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        generator,
        chunk_size: chunk_size.ok_or_else(|| missing("chunk_size"))?,
    };
    config
        .validate_grids()
        .map_err(|e| Error::InvalidTable(e.to_string()))?;

    let (width, height) = (config.n_grid.len(), config.p_grid.len());
    if body.len() != 4 * height {
        return Err(Error::InvalidTable(format!(
            "expected {} body lines, found {}",
            4 * height,
            body.len()
        )));
    }
    let mut quantiles = [Vec::new(), Vec::new()];
    let mut std_errors = [Vec::new(), Vec::new()];
    let mut rows = body.into_iter();
    for record in ["q", "se"] {
        for kind in StatisticKind::ALL {
            for &p in &config.p_grid {
                let (no, line) = rows.next().expect("line count checked");
                let mut fields = line.splitn(4, ',');
                let (r, k, pv, values) = (
                    fields.next().unwrap_or(""),
                    fields.next().unwrap_or(""),
                    fields.next().unwrap_or(""),
                    fields.next().unwrap_or(""),
                );
                if r != record || k != kind.name() || parse_real(pv, no)? != p {
                    return Err(Error::Parse {
                        line: no,
                        msg: format!("expected `{record},{kind},{}` row", format_real(p)),
                    });
                }
                let values = parse_reals(values, no)?;
                if values.len() != width {
                    return Err(Error::Parse {
                        line: no,
                        msg: format!("expected {width} values, found {}", values.len()),
                    });
                }
                let target = if record == "q" {
                    &mut quantiles[kind.index()]
                } else {
                    &mut std_errors[kind.index()]
                };
                target.extend(values);
            }
        }
    }
    QuantileTable::from_parts(config, quantiles, std_errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_table() -> QuantileTable {
        let cfg = SimConfig::new(vec![10, 20], vec![0.5, 0.9, 0.95, 0.99], 1000, 3);
        let q = vec![1.0, 1.1, 4.0, 4.2, 5.0, 5.5, 9.0, 9.25];
        let se = vec![0.01; 8];
        QuantileTable::from_parts(cfg, [q.clone(), q], [se.clone(), se]).unwrap()
    }

    #[test]
    fn real_formatting_is_seventeen_digits() {
        assert_eq!(format_real(0.95), "9.4999999999999996e-1");
        assert_eq!(format_real(5.0), "5.0000000000000000e0");
        assert_eq!(format_real(1e-4), "1.0000000000000000e-4");
        for x in [0.1, 1.0 / 3.0, 5.991464547107979, 1e-300, 123456.789] {
            assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn round_trip_and_canonical() {
        let t = tiny_table();
        let a = to_canonical_string(&t);
        let b = to_canonical_string(&t);
        assert_eq!(a, b);
        assert!(!a.contains('\r'));
        let back = load_table(a.as_bytes()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(checksum(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(checksum(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(checksum(b"foobar"), 0x8594_4171_f739_67e8);
    }

    #[test]
    fn version_mismatch() {
        let text = to_canonical_string(&tiny_table()).replacen(
            "format_version=1",
            "format_version=999",
            1,
        );
        let err = load_table(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::UnsupportedFormat(_)));
        assert!(err.to_string().contains("unsupported format"));
    }

    #[test]
    fn digit_edit_fails_checksum() {
        let text = to_canonical_string(&tiny_table());
        let text = text.replacen(
            "q,LM,5.0000000000000000e-1,1.0000",
            "q,LM,5.0000000000000000e-1,1.0001",
            1,
        );
        let err = load_table(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::CorruptTable(_)), "{err}");
        assert!(err.to_string().contains("corrupt table"));
    }

    #[test]
    fn decreasing_column_is_invalid() {
        let text = to_canonical_string(&tiny_table());
        let body: String = text
            .lines()
            .filter(|l| !l.starts_with("checksum="))
            .map(|l| {
                if l.starts_with("q,ALM,9.8999999999999999e-1,") {
                    "q,ALM,9.8999999999999999e-1,4.5000000000000000e0,9.2500000000000000e0\n"
                        .to_string()
                } else {
                    format!("{l}\n")
                }
            })
            .collect();
        let err = load_table(seal(body).as_bytes()).unwrap_err();
        assert!(matches!(err, Error::InvalidTable(_)), "{err}");
        assert!(err.to_string().contains("invalid table"));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let text = to_canonical_string(&tiny_table());
        let cut = &text[..text.len() / 2];
        assert!(load_table(cut.as_bytes()).is_err());
        assert!(load_table(&b""[..]).is_err());
    }
}
