//! Finite-sample distribution and quantile functions of LM and ALM.
//!
//! Inside one tabulated column the pairs `(p_i, q_i)` are mapped to
//! `u = -ln(1 - p)` and `w = ln q`, where the chi-squared(2) limit is the
//! straight line `u = q / 2`. Interpolation is linear in `(u, w)` within a
//! column and linear in `ln N` between the two columns bracketing `N`.
//! Above the largest tabulated `N` the column is blended with the closed
//! form, weight `N_max / N` on the column.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::moments::{chi2_cdf_2df, chi2_quantile_2df, chi2_sf_2df, Sample, StatisticKind};
use crate::simulate::QuantileTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSize {
    Finite(usize),
    Infinite,
}

impl fmt::Display for SampleSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleSize::Finite(n) => write!(f, "{n}"),
            SampleSize::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for SampleSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinite") {
            return Ok(SampleSize::Infinite);
        }
        t.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(SampleSize::Finite)
            .ok_or_else(|| Error::InvalidConfig(format!("bad sample size `{s}`")))
    }
}

/// A probability, or `None` when the requested point lies beyond what the
/// backing table resolves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValueResult {
    pub value: Option<f64>,
    /// `1 - max(p_grid)` of the backing table; zero for the closed form.
    pub resolution_bound: f64,
}

impl PValueResult {
    fn available(value: f64, resolution_bound: f64) -> Self {
        PValueResult {
            value: Some(value),
            resolution_bound,
        }
    }

    fn not_available(resolution_bound: f64) -> Self {
        PValueResult {
            value: None,
            resolution_bound,
        }
    }

    pub fn is_available(&self) -> bool {
        self.value.is_some()
    }

    fn complement(self) -> Self {
        PValueResult {
            value: self.value.map(|p| 1.0 - p),
            ..self
        }
    }
}

#[inline]
fn to_u(p: f64) -> f64 {
    -(-p).ln_1p()
}

#[inline]
fn from_u(u: f64) -> f64 {
    -(-u).exp_m1()
}

enum ColumnCdf {
    /// Exact grid probability or interpolated probability.
    Value(f64),
    Beyond,
}

fn column_cdf(p_grid: &[f64], col: &[f64], q: f64) -> ColumnCdf {
    let last = col.len() - 1;
    if q > col[last] {
        return ColumnCdf::Beyond;
    }
    let (p_min, q_min) = (p_grid[0], col[0]);
    if q < q_min {
        let p = if q_min > 0.0 {
            p_min * q / q_min
        } else {
            p_min
        };
        return ColumnCdf::Value(p.clamp(0.0, p_min));
    }
    let i = col.partition_point(|&x| x <= q) - 1;
    if col[i] == q {
        return ColumnCdf::Value(p_grid[i]);
    }
    let (w0, w1) = (col[i].ln(), col[i + 1].ln());
    let t = (q.ln() - w0) / (w1 - w0);
    let (u0, u1) = (to_u(p_grid[i]), to_u(p_grid[i + 1]));
    ColumnCdf::Value(from_u(u0 + t * (u1 - u0)))
}

fn column_quantile(p_grid: &[f64], col: &[f64], p: f64) -> f64 {
    let i = p_grid.partition_point(|&x| x <= p) - 1;
    if p_grid[i] == p {
        return col[i];
    }
    let (u0, u1) = (to_u(p_grid[i]), to_u(p_grid[i + 1]));
    let t = (to_u(p) - u0) / (u1 - u0);
    let (q0, q1) = (col[i], col[i + 1]);
    if q0 > 0.0 {
        (q0.ln() + t * (q1.ln() - q0.ln())).exp()
    } else {
        q0 + t * (q1 - q0)
    }
}

/// Where `n` falls relative to the tabulated sample sizes.
enum Bracket {
    Exact(usize),
    Between { lo: usize, hi: usize, s: f64 },
    Above { last: usize, column_weight: f64 },
}

fn bracket(table: &QuantileTable, n: usize) -> Result<Bracket> {
    let grid = table.n_grid();
    let (first, last) = (grid[0], grid[grid.len() - 1]);
    if n < first {
        return Err(Error::BelowTableRange { n, min: first });
    }
    if n > last {
        return Ok(Bracket::Above {
            last: grid.len() - 1,
            column_weight: last as f64 / n as f64,
        });
    }
    let j = grid.partition_point(|&x| x <= n) - 1;
    if grid[j] == n {
        return Ok(Bracket::Exact(j));
    }
    let (ln_lo, ln_hi) = ((grid[j] as f64).ln(), (grid[j + 1] as f64).ln());
    Ok(Bracket::Between {
        lo: j,
        hi: j + 1,
        s: ((n as f64).ln() - ln_lo) / (ln_hi - ln_lo),
    })
}

fn require_table(table: Option<&QuantileTable>) -> Result<&QuantileTable> {
    table.ok_or_else(|| Error::InvalidConfig("a quantile table is required for finite N".into()))
}

/// Distribution function `P(S <= q)` of statistic `kind` for samples of
/// size `n`. `n = Infinite` gives the chi-squared(2) closed form and needs
/// no table.
pub fn pjb(
    q: f64,
    n: SampleSize,
    kind: StatisticKind,
    table: Option<&QuantileTable>,
) -> Result<PValueResult> {
    if !(q >= 0.0) {
        return Err(Error::Domain(format!("statistic must be >= 0, got {q}")));
    }
    let n = match n {
        SampleSize::Infinite => return Ok(PValueResult::available(chi2_cdf_2df(q)?, 0.0)),
        SampleSize::Finite(n) => n,
    };
    let table = require_table(table)?;
    let p_grid = table.p_grid();
    let resolution = 1.0 - p_grid[p_grid.len() - 1];
    let at = |j: usize| column_cdf(p_grid, &table.column(kind, j), q);

    let value = match bracket(table, n)? {
        Bracket::Exact(j) => match at(j) {
            ColumnCdf::Value(p) => Some(p),
            ColumnCdf::Beyond => None,
        },
        Bracket::Between { lo, hi, s } => match (at(lo), at(hi)) {
            (ColumnCdf::Value(a), ColumnCdf::Value(b)) => {
                Some(from_u((1.0 - s) * to_u(a) + s * to_u(b)))
            }
            _ => None,
        },
        Bracket::Above {
            last,
            column_weight,
        } => match at(last) {
            ColumnCdf::Value(a) => Some(from_u(
                column_weight * to_u(a) + (1.0 - column_weight) * 0.5 * q,
            )),
            ColumnCdf::Beyond => None,
        },
    };
    Ok(match value {
        Some(p) => PValueResult::available(p, resolution),
        None => PValueResult::not_available(resolution),
    })
}

/// Quantile function of statistic `kind` for samples of size `n`; the
/// interpolation mirrors [`pjb`].
pub fn qjb(
    p: f64,
    n: SampleSize,
    kind: StatisticKind,
    table: Option<&QuantileTable>,
) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    let n = match n {
        SampleSize::Infinite => return chi2_quantile_2df(p),
        SampleSize::Finite(n) => n,
    };
    let table = require_table(table)?;
    let p_grid = table.p_grid();
    let (lo, hi) = (p_grid[0], p_grid[p_grid.len() - 1]);
    if p < lo || p > hi {
        return Err(Error::OutsideTabulatedRange { p, lo, hi });
    }
    let at = |j: usize| column_quantile(p_grid, &table.column(kind, j), p);

    Ok(match bracket(table, n)? {
        Bracket::Exact(j) => at(j),
        Bracket::Between { lo, hi, s } => ((1.0 - s) * at(lo).ln() + s * at(hi).ln()).exp(),
        Bracket::Above {
            last,
            column_weight,
        } => {
            let limit = chi2_quantile_2df(p)?;
            (column_weight * at(last).ln() + (1.0 - column_weight) * limit.ln()).exp()
        }
    })
}

/// Both statistics with their finite-sample and asymptotic upper-tail
/// p-values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub n: usize,
    pub lm: f64,
    pub alm: f64,
    pub p_lm: PValueResult,
    pub p_alm: PValueResult,
    /// `exp(-LM / 2)`.
    pub p_asymptotic: f64,
}

impl TestResult {
    pub fn statistic(&self, kind: StatisticKind) -> f64 {
        match kind {
            StatisticKind::Lm => self.lm,
            StatisticKind::Alm => self.alm,
        }
    }

    pub fn p_value(&self, kind: StatisticKind) -> PValueResult {
        match kind {
            StatisticKind::Lm => self.p_lm,
            StatisticKind::Alm => self.p_alm,
        }
    }
}

/// Finite-sample p-values come from `table`. Without a table, or when the
/// sample is smaller than anything tabulated, they are not available; the
/// asymptotic p-value is always reported.
pub fn jb_test(sample: &Sample, table: Option<&QuantileTable>) -> Result<TestResult> {
    let n = sample.len();
    let lm = sample.lm_statistic()?;
    let alm = sample.alm_statistic()?;
    let finite = |stat: f64, kind: StatisticKind| -> Result<PValueResult> {
        let Some(t) = table else {
            return Ok(PValueResult::not_available(1.0));
        };
        match pjb(stat, SampleSize::Finite(n), kind, Some(t)) {
            Ok(cdf) => Ok(cdf.complement()),
            Err(Error::BelowTableRange { .. }) => {
                let top = t.p_grid()[t.p_grid().len() - 1];
                Ok(PValueResult::not_available(1.0 - top))
            }
            Err(e) => Err(e),
        }
    };
    Ok(TestResult {
        n,
        lm,
        alm,
        p_lm: finite(lm, StatisticKind::Lm)?,
        p_alm: finite(alm, StatisticKind::Alm)?,
        p_asymptotic: chi2_sf_2df(lm)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{default_p_grid, SimConfig};

    /// Every column equals the chi2(2) quantile function.
    fn chi2_table(n_grid: Vec<usize>) -> QuantileTable {
        let p_grid = default_p_grid();
        let width = n_grid.len();
        let q: Vec<f64> = p_grid
            .iter()
            .flat_map(|&p| std::iter::repeat_n(-2.0 * (-p).ln_1p(), width))
            .collect();
        let se = vec![0.0; q.len()];
        let cfg = SimConfig::new(n_grid, p_grid, 1000, 0);
        QuantileTable::from_parts(cfg, [q.clone(), q], [se.clone(), se]).unwrap()
    }

    /// Columns scaled by `1 + 2/n`, so different `n` differ.
    fn scaled_table() -> QuantileTable {
        let n_grid = vec![10, 20, 50, 100];
        let p_grid = default_p_grid();
        let mut q = Vec::new();
        for &p in &p_grid {
            for &n in &n_grid {
                q.push(-2.0 * (-p).ln_1p() * (1.0 + 2.0 / n as f64));
            }
        }
        let se = vec![0.0; q.len()];
        let cfg = SimConfig::new(n_grid, p_grid, 1000, 0);
        QuantileTable::from_parts(cfg, [q.clone(), q], [se.clone(), se]).unwrap()
    }

    #[test]
    fn closed_form_limits() {
        let p = pjb(5.991465, SampleSize::Infinite, StatisticKind::Lm, None).unwrap();
        assert!((p.value.unwrap() - 0.95).abs() < 1e-6);
        for kind in StatisticKind::ALL {
            let q = qjb(0.95, SampleSize::Infinite, kind, None).unwrap();
            assert!((q - 5.991465).abs() < 1e-5);
        }
    }

    #[test]
    fn knots_are_reproduced_exactly() {
        let t = scaled_table();
        let i = t.p_index(0.95).unwrap();
        let j = t.n_index(100).unwrap();
        let knot = t.quantile(StatisticKind::Lm, i, j);
        let p = pjb(knot, SampleSize::Finite(100), StatisticKind::Lm, Some(&t)).unwrap();
        assert_eq!(p.value, Some(0.95));
        let q = qjb(0.95, SampleSize::Finite(100), StatisticKind::Alm, Some(&t)).unwrap();
        assert_eq!(q, t.quantile(StatisticKind::Alm, i, j));
    }

    #[test]
    fn beyond_top_quantile_is_not_available() {
        let t = scaled_table();
        let top = t.quantile(StatisticKind::Lm, t.p_grid().len() - 1, 0);
        let r = pjb(
            top + 1.0,
            SampleSize::Finite(10),
            StatisticKind::Lm,
            Some(&t),
        )
        .unwrap();
        assert_eq!(r.value, None);
        assert!((r.resolution_bound - 1e-4).abs() < 1e-12);
        let r = pjb(top, SampleSize::Finite(10), StatisticKind::Lm, Some(&t)).unwrap();
        assert_eq!(r.value, Some(0.9999));
    }

    #[test]
    fn lower_tail_is_proportional() {
        let t = scaled_table();
        let q_min = t.quantile(StatisticKind::Lm, 0, 0);
        let r = pjb(
            q_min / 4.0,
            SampleSize::Finite(10),
            StatisticKind::Lm,
            Some(&t),
        )
        .unwrap();
        assert!((r.value.unwrap() - 0.0001 / 4.0).abs() < 1e-15);
        let r = pjb(0.0, SampleSize::Finite(10), StatisticKind::Lm, Some(&t)).unwrap();
        assert_eq!(r.value, Some(0.0));
    }

    #[test]
    fn errors() {
        let t = scaled_table();
        assert!(matches!(
            pjb(1.0, SampleSize::Finite(9), StatisticKind::Lm, Some(&t)),
            Err(Error::BelowTableRange { n: 9, min: 10 })
        ));
        assert!(pjb(-0.5, SampleSize::Finite(10), StatisticKind::Lm, Some(&t)).is_err());
        assert!(matches!(
            qjb(0.00005, SampleSize::Finite(10), StatisticKind::Lm, Some(&t)),
            Err(Error::OutsideTabulatedRange { .. })
        ));
        assert!(qjb(0.95, SampleSize::Finite(10), StatisticKind::Lm, None).is_err());
        assert!(qjb(1.0, SampleSize::Infinite, StatisticKind::Lm, None).is_err());
    }

    #[test]
    fn synthetic_chi2_table_tracks_closed_form() {
        let t = chi2_table(vec![10, 100, 1000]);
        let mut worst: f64 = 0.0;
        let mut q = 0.5;
        // 0.9999 quantile of chi2(2) is 18.42; points above it are NA.
        while q <= 18.4 {
            for n in [10, 35, 100, 1000, 5000] {
                let r = pjb(q, SampleSize::Finite(n), StatisticKind::Lm, Some(&t)).unwrap();
                worst = worst.max((r.value.unwrap() - chi2_cdf_2df(q).unwrap()).abs());
            }
            q += 0.01;
        }
        assert!(worst < 1e-3, "max deviation {worst}");
        let r = pjb(20.0, SampleSize::Finite(100), StatisticKind::Lm, Some(&t)).unwrap();
        assert_eq!(r.value, None);
    }

    #[test]
    fn round_trip_on_and_off_grid() {
        let t = scaled_table();
        for kind in StatisticKind::ALL {
            for (i, &p) in t.p_grid().iter().enumerate().step_by(7) {
                for &n in t.n_grid() {
                    let q = qjb(p, SampleSize::Finite(n), kind, Some(&t)).unwrap();
                    let back = pjb(q, SampleSize::Finite(n), kind, Some(&t)).unwrap();
                    assert!((back.value.unwrap() - p).abs() < 1e-9, "p {p} n {n}");
                    let _ = i;
                }
                for n in [13, 37, 70, 400] {
                    let q = qjb(p, SampleSize::Finite(n), kind, Some(&t)).unwrap();
                    let back = pjb(q, SampleSize::Finite(n), kind, Some(&t)).unwrap();
                    assert!((back.value.unwrap() - p).abs() < 1e-3, "p {p} n {n}");
                }
            }
        }
    }

    #[test]
    fn above_table_blends_towards_limit() {
        let t = scaled_table();
        let q = 5.0;
        let at_max = pjb(q, SampleSize::Finite(100), StatisticKind::Lm, Some(&t)).unwrap();
        let far = pjb(
            q,
            SampleSize::Finite(100_000_000),
            StatisticKind::Lm,
            Some(&t),
        )
        .unwrap();
        let limit = chi2_cdf_2df(q).unwrap();
        assert!((far.value.unwrap() - limit).abs() < 1e-5);
        assert!(at_max.value.unwrap() < far.value.unwrap());
        let q_far = qjb(
            0.95,
            SampleSize::Finite(100_000_000),
            StatisticKind::Lm,
            Some(&t),
        )
        .unwrap();
        assert!((q_far - chi2_quantile_2df(0.95).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn jb_test_fields() {
        let t = scaled_table();
        let values: Vec<f64> = (0..40).map(|i| ((i * 17) % 23) as f64).collect();
        let s = Sample::new(values).unwrap();
        let r = jb_test(&s, Some(&t)).unwrap();
        assert_eq!(r.n, 40);
        assert_eq!(r.p_asymptotic, (-r.lm / 2.0).exp());
        assert!(r.p_lm.is_available() && r.p_alm.is_available());

        let small = Sample::new(vec![1.0, 2.0, 4.0, 8.0, 3.0]).unwrap();
        let r = jb_test(&small, Some(&t)).unwrap();
        assert!(!r.p_lm.is_available() && !r.p_alm.is_available());
        assert!(r.p_asymptotic > 0.0);

        assert!(matches!(
            jb_test(&Sample::new(vec![2.0; 8]).unwrap(), Some(&t)),
            Err(Error::DegenerateSample)
        ));
    }

    #[test]
    fn sample_size_parsing() {
        assert_eq!("inf".parse::<SampleSize>().unwrap(), SampleSize::Infinite);
        assert_eq!("Inf".parse::<SampleSize>().unwrap(), SampleSize::Infinite);
        assert_eq!("25".parse::<SampleSize>().unwrap(), SampleSize::Finite(25));
        assert!("0".parse::<SampleSize>().is_err());
        assert!("-3".parse::<SampleSize>().is_err());
    }
}
