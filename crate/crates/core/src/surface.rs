//! Power series in `1/N` through the tabulated quantiles of one probability:
//! `q(p, N) = q(p, inf) + sum_k beta_k N^-k`, with the intercept pinned to
//! the chi-squared(2) quantile.
//!
//! The regressors `N^-k` are nearly collinear, so the fit works on
//! `x = N_min / N` with unit-norm columns and solves by Householder QR.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::dist::SampleSize;
use crate::error::{Error, Result};
use crate::moments::{chi2_quantile_2df, StatisticKind};
use crate::simulate::QuantileTable;
use crate::table::{format_real, join_reals, parse_real, parse_reals, seal, unseal};

pub const DEFAULT_ORDER: usize = 6;
pub const FIT_FORMAT_VERSION: u32 = 1;

/// Relative size below which a diagonal entry of R counts as zero.
const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    /// Drop tabulated sample sizes below this value.
    pub min_n: Option<usize>,
    /// Weight each point by the inverse Monte Carlo variance of its quantile.
    pub weighted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitDiagnostics {
    pub rms_residual: f64,
    pub max_residual: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub points: usize,
    pub weighted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceFit {
    pub kind: StatisticKind,
    pub p: f64,
    pub q_inf: f64,
    /// `beta_1 ..= beta_K`.
    pub coefficients: Vec<f64>,
    pub diagnostics: FitDiagnostics,
}

impl SurfaceFit {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// `q_inf + sum beta_k n^-k`, floored at zero.
    pub fn eval(&self, n: SampleSize) -> f64 {
        match n {
            SampleSize::Infinite => self.q_inf,
            SampleSize::Finite(n) => (self.q_inf + self.correction(n as f64)).max(0.0),
        }
    }

    fn correction(&self, n: f64) -> f64 {
        let x = 1.0 / n;
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &b| (acc + b) * x)
    }

    /// `(n, table value, table - fit)` for every tabulated sample size.
    pub fn residuals(&self, table: &QuantileTable) -> Result<Vec<(usize, f64, f64)>> {
        let i = grid_index(table, self.p)?;
        Ok(table
            .n_grid()
            .iter()
            .zip(table.row(self.kind, i))
            .map(|(&n, &q)| (n, q, q - self.eval(SampleSize::Finite(n))))
            .collect())
    }
}

pub fn eval_surface(fit: &SurfaceFit, n: SampleSize) -> f64 {
    fit.eval(n)
}

fn grid_index(table: &QuantileTable, p: f64) -> Result<usize> {
    table.p_index(p).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "p = {p} is not a point of the table's probability grid"
        ))
    })
}

/// Least-squares fit of order `order` to the row of `table` at probability
/// `p`, which must be a grid point.
pub fn fit_surface(
    table: &QuantileTable,
    kind: StatisticKind,
    p: f64,
    order: usize,
    options: FitOptions,
) -> Result<SurfaceFit> {
    let i = grid_index(table, p)?;
    let q_inf = chi2_quantile_2df(p)?;
    let min_n = options.min_n.unwrap_or(0);
    let points: Vec<(usize, f64, f64)> = table
        .n_grid()
        .iter()
        .zip(table.row(kind, i))
        .zip(table.std_error_row(kind, i))
        .filter(|((&n, _), _)| n >= min_n)
        .map(|((&n, &q), &se)| (n, q, se))
        .collect();

    if order == 0 {
        return Err(Error::InvalidConfig(
            "fit order K must be at least 1".into(),
        ));
    }
    if points.len() < order + 1 {
        return Err(Error::InvalidConfig(format!(
            "fit order K = {order} needs at least {} sample sizes, table offers {}",
            order + 1,
            points.len()
        )));
    }
    if options.weighted && points.iter().any(|&(_, _, se)| !(se > 0.0)) {
        return Err(Error::InvalidConfig(
            "weighted fit needs positive standard errors at every point".into(),
        ));
    }

    let n_ref = points[0].0 as f64;
    let rows = points.len();
    let mut design = DMatrix::<f64>::zeros(rows, order);
    let mut target = DVector::<f64>::zeros(rows);
    for (r, &(n, q, se)) in points.iter().enumerate() {
        let weight = if options.weighted { 1.0 / se } else { 1.0 };
        let x = n_ref / n as f64;
        let mut power = 1.0;
        for k in 0..order {
            power *= x;
            design[(r, k)] = weight * power;
        }
        target[r] = weight * (q - q_inf);
    }
    let mut scales = vec![0.0; order];
    for (k, scale) in scales.iter_mut().enumerate() {
        let norm = design.column(k).norm();
        if !(norm > 0.0) {
            return Err(Error::IllConditioned { p, order });
        }
        *scale = norm;
        design.column_mut(k).scale_mut(1.0 / norm);
    }

    let qr = design.qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if r.diagonal()
        .iter()
        .any(|d| !(d.abs() > RANK_TOLERANCE * diag_max))
    {
        return Err(Error::IllConditioned { p, order });
    }
    let rhs = qr.q().transpose() * &target;
    let gamma = r
        .solve_upper_triangular(&rhs)
        .ok_or(Error::IllConditioned { p, order })?;

    let coefficients: Vec<f64> = (0..order)
        .map(|k| gamma[k] / scales[k] * n_ref.powi(k as i32 + 1))
        .collect();
    if coefficients.iter().any(|b| !b.is_finite()) {
        return Err(Error::IllConditioned { p, order });
    }

    let mut fit = SurfaceFit {
        kind,
        p,
        q_inf,
        coefficients,
        diagnostics: FitDiagnostics {
            rms_residual: 0.0,
            max_residual: 0.0,
            n_min: points[0].0,
            n_max: points[rows - 1].0,
            points: rows,
            weighted: options.weighted,
        },
    };
    let (mut sq, mut worst) = (0.0, 0.0f64);
    for &(n, q, _) in &points {
        let e = q - fit.eval(SampleSize::Finite(n));
        sq += e * e;
        worst = worst.max(e.abs());
    }
    fit.diagnostics.rms_residual = (sq / rows as f64).sqrt();
    fit.diagnostics.max_residual = worst;
    Ok(fit)
}

/// `n,observed,fitted` rows, one per tabulated sample size.
pub fn plot_data(fit: &SurfaceFit, table: &QuantileTable) -> Result<String> {
    let mut out = String::from("n,observed,fitted\n");
    for (n, q, _) in fit.residuals(table)? {
        let _ = writeln!(
            out,
            "{n},{},{}",
            format_real(q),
            format_real(fit.eval(SampleSize::Finite(n)))
        );
    }
    Ok(out)
}

/// Canonical text of a list of fits, in the same `key=value` style and
/// checksum trailer as quantile tables.
pub fn fits_to_string(fits: &[SurfaceFit]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "fit_format_version={FIT_FORMAT_VERSION}");
    let _ = writeln!(out, "fit_count={}", fits.len());
    for fit in fits {
        let d = &fit.diagnostics;
        let _ = writeln!(out, "kind={}", fit.kind);
        let _ = writeln!(out, "p={}", format_real(fit.p));
        let _ = writeln!(out, "order={}", fit.order());
        let _ = writeln!(out, "q_inf={}", format_real(fit.q_inf));
        let _ = writeln!(
            out,
            "coefficients={}",
            join_reals(fit.coefficients.iter().copied())
        );
        let _ = writeln!(out, "rms_residual={}", format_real(d.rms_residual));
        let _ = writeln!(out, "max_residual={}", format_real(d.max_residual));
        let _ = writeln!(out, "n_min={}", d.n_min);
        let _ = writeln!(out, "n_max={}", d.n_max);
        let _ = writeln!(out, "points={}", d.points);
        let _ = writeln!(out, "weighted={}", d.weighted);
    }
    seal(out)
}

pub fn save_fits<W: Write>(fits: &[SurfaceFit], mut sink: W) -> Result<()> {
    sink.write_all(fits_to_string(fits).as_bytes())?;
    sink.flush()?;
    Ok(())
}

pub fn save_fits_to_path(fits: &[SurfaceFit], path: impl AsRef<Path>) -> Result<()> {
    save_fits(fits, BufWriter::new(File::create(path)?))
}

const FIT_KEYS: [&str; 11] = [
    "kind",
    "p",
    "order",
    "q_inf",
    "coefficients",
    "rms_residual",
    "max_residual",
    "n_min",
    "n_max",
    "points",
    "weighted",
];

pub fn load_fits<R: Read>(mut source: R) -> Result<Vec<SurfaceFit>> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|_| Error::CorruptTable("fit file is not valid UTF-8".into()))?;
    let lines = unseal(&text, "fit_format_version", FIT_FORMAT_VERSION)?;
    let mut iter = lines.into_iter().skip(1);
    let (no, count_line) = iter.next().ok_or(Error::Parse {
        line: 2,
        msg: "missing fit_count".into(),
    })?;
    let count: usize = count_line
        .strip_prefix("fit_count=")
        .and_then(|v| v.parse().ok())
        .ok_or(Error::Parse {
            line: no,
            msg: "expected fit_count=<integer>".into(),
        })?;

    let mut fits = Vec::with_capacity(count);
    for _ in 0..count {
        let mut values = Vec::with_capacity(FIT_KEYS.len());
        for key in FIT_KEYS {
            let (no, line) = iter.next().ok_or(Error::Parse {
                line: 0,
                msg: format!("truncated fit block, expected `{key}`"),
            })?;
            let value = line
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .ok_or(Error::Parse {
                    line: no,
                    msg: format!("expected `{key}=`"),
                })?;
            values.push((no, value));
        }
        let int = |idx: usize| -> Result<usize> {
            let (no, v) = values[idx];
            v.parse().map_err(|_| Error::Parse {
                line: no,
                msg: format!("bad integer `{v}`"),
            })
        };
        let kind: StatisticKind = values[0].1.parse()?;
        let p = parse_real(values[1].1, values[1].0)?;
        let order = int(2)?;
        let coefficients = parse_reals(values[4].1, values[4].0)?;
        if coefficients.len() != order || order == 0 {
            return Err(Error::Parse {
                line: values[4].0,
                msg: format!("expected {order} coefficients"),
            });
        }
        let weighted = match values[10].1 {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::Parse {
                    line: values[10].0,
                    msg: format!("bad boolean `{other}`"),
                })
            }
        };
        fits.push(SurfaceFit {
            kind,
            p,
            q_inf: parse_real(values[3].1, values[3].0)?,
            coefficients,
            diagnostics: FitDiagnostics {
                rms_residual: parse_real(values[5].1, values[5].0)?,
                max_residual: parse_real(values[6].1, values[6].0)?,
                n_min: int(7)?,
                n_max: int(8)?,
                points: int(9)?,
                weighted,
            },
        });
    }
    if let Some((no, _)) = iter.next() {
        return Err(Error::Parse {
            line: no,
            msg: "trailing content after the last fit".into(),
        });
    }
    Ok(fits)
}

pub fn load_fits_from_path(path: impl AsRef<Path>) -> Result<Vec<SurfaceFit>> {
    load_fits(File::open(path)?)
}
