//! Sample moments, the Jarque-Bera LM statistic, its finite-sample adjusted
//! form (ALM) and the closed-form chi-squared(2) limit both share.
//!
//! All moment divisors are `N`. Sums are accumulated with TwoSum
//! compensation. For a [`Sample`] the sums run over the observations in
//! ascending order, so any permutation of the input gives bit-identical
//! statistics.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which omnibus statistic a table, fit or p-value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StatisticKind {
    Lm,
    Alm,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 2] = [StatisticKind::Lm, StatisticKind::Alm];

    pub fn name(self) -> &'static str {
        match self {
            StatisticKind::Lm => "LM",
            StatisticKind::Alm => "ALM",
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            StatisticKind::Lm => 0,
            StatisticKind::Alm => 1,
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LM" => Ok(StatisticKind::Lm),
            "ALM" => Ok(StatisticKind::Alm),
            _ => Err(Error::InvalidConfig(format!(
                "unknown statistic kind `{s}`"
            ))),
        }
    }
}

/// Running sum with a compensation term; each addition recovers its exact
/// rounding error with Knuth's branch-free TwoSum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        let back = t - self.sum;
        self.carry += (self.sum - (t - back)) + (x - back);
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Second to fourth central moments of one sample, divisor `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CentralMoments {
    pub n: usize,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl CentralMoments {
    /// Two passes over `values` in the order given: the mean, then the
    /// powered deviations.
    #[inline]
    pub(crate) fn in_order(values: &[f64]) -> CentralMoments {
        let n = values.len();
        let inv_n = 1.0 / n as f64;
        let mut total = CompensatedSum::default();
        for &x in values {
            total.add(x);
        }
        let mean = total.value() * inv_n;

        let mut s2 = CompensatedSum::default();
        let mut s3 = CompensatedSum::default();
        let mut s4 = CompensatedSum::default();
        for &x in values {
            let d = x - mean;
            let d2 = d * d;
            s2.add(d2);
            s3.add(d2 * d);
            s4.add(d2 * d2);
        }
        CentralMoments {
            n,
            m2: s2.value() * inv_n,
            m3: s3.value() * inv_n,
            m4: s4.value() * inv_n,
        }
    }

    /// Skewness `m3 / m2^(3/2)` and kurtosis `m4 / m2^2`.
    #[inline]
    pub(crate) fn shape(&self) -> Result<Shape> {
        if !(self.m2 > 0.0) {
            return Err(Error::DegenerateSample);
        }
        Ok(Shape {
            sqrt_b1: self.m3 / (self.m2 * self.m2.sqrt()),
            b2: self.m4 / (self.m2 * self.m2),
        })
    }
}

/// Skewness (`sqrt(b1)`) and kurtosis (`b2`) of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Shape {
    pub sqrt_b1: f64,
    pub b2: f64,
}

impl Shape {
    #[inline]
    pub(crate) fn lm(&self, n: usize) -> f64 {
        let excess = self.b2 - 3.0;
        n as f64 * (self.sqrt_b1 * self.sqrt_b1 / 6.0 + excess * excess / 24.0)
    }

    #[inline]
    pub(crate) fn alm(&self, c: &FiniteSampleConstants) -> f64 {
        // c1 and c3 are the variances themselves (order 1/N), so no
        // leading factor of N here.
        let centered = self.b2 - c.c2;
        self.sqrt_b1 * self.sqrt_b1 / c.c1 + centered * centered / c.c3
    }
}

/// A list of real observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

impl Sample {
    /// Rejects NaN and infinite observations. An empty sample is allowed
    /// here; the statistics report it.
    pub fn new(values: Vec<f64>) -> Result<Sample> {
        if let Some(bad) = values.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite observation {bad}")));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Sample { values, sorted })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn moments(&self, statistic: &'static str) -> Result<CentralMoments> {
        self.require(statistic, 2)?;
        Ok(CentralMoments::in_order(&self.sorted))
    }

    fn require(&self, statistic: &'static str, min: usize) -> Result<()> {
        match self.len() {
            0 => Err(Error::EmptySample),
            n if n < min => Err(Error::SampleTooSmall { statistic, n, min }),
            _ => Ok(()),
        }
    }

    /// `(1/N) Σ (x_j - mean)^order`.
    pub fn central_moment(&self, order: u32) -> Result<f64> {
        if order == 0 {
            return Err(Error::Domain("moment order must be positive".into()));
        }
        self.require("central moment", 1)?;
        let n = self.sorted.len() as f64;
        let mut total = CompensatedSum::default();
        for &x in &self.sorted {
            total.add(x);
        }
        let mean = total.value() / n;
        let mut acc = CompensatedSum::default();
        for &x in &self.sorted {
            acc.add((x - mean).powi(order as i32));
        }
        Ok(acc.value() / n)
    }

    pub fn skewness(&self) -> Result<f64> {
        Ok(self.moments("skewness")?.shape()?.sqrt_b1)
    }

    pub fn kurtosis(&self) -> Result<f64> {
        Ok(self.moments("kurtosis")?.shape()?.b2)
    }

    /// `N (b1/6 + (b2 - 3)^2 / 24)`.
    pub fn lm_statistic(&self) -> Result<f64> {
        Ok(self.moments("LM")?.shape()?.lm(self.len()))
    }

    /// `b1/c1 + (b2 - c2)^2 / c3` with the exact finite-sample constants for
    /// this `N`: each squared moment is standardised by its exact null
    /// variance, the same way LM standardises by `6/N` and `24/N`.
    pub fn alm_statistic(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptySample);
        }
        let c = FiniteSampleConstants::new(self.len())?;
        Ok(self.moments("ALM")?.shape()?.alm(&c))
    }

    pub fn statistic(&self, kind: StatisticKind) -> Result<f64> {
        match kind {
            StatisticKind::Lm => self.lm_statistic(),
            StatisticKind::Alm => self.alm_statistic(),
        }
    }
}

/// Exact null mean and variances of the skewness and kurtosis of `n`
/// standard normal draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteSampleConstants {
    pub n: usize,
    /// `var(sqrt(b1)) = 6(N-2) / ((N+1)(N+3))`
    pub c1: f64,
    /// `E(b2) = 3(N-1) / (N+1)`
    pub c2: f64,
    /// `var(b2) = 24N(N-2)(N-3) / ((N+1)^2 (N+3)(N+5))`
    pub c3: f64,
}

impl FiniteSampleConstants {
    /// `c3` vanishes at `N = 3`, so `N >= 4` is required.
    pub fn new(n: usize) -> Result<FiniteSampleConstants> {
        if n < 4 {
            return Err(Error::AlmUndefined(n));
        }
        let nf = n as f64;
        Ok(FiniteSampleConstants {
            n,
            c1: 6.0 * (nf - 2.0) / ((nf + 1.0) * (nf + 3.0)),
            c2: 3.0 * (nf - 1.0) / (nf + 1.0),
            c3: 24.0 * nf * (nf - 2.0) * (nf - 3.0)
                / ((nf + 1.0) * (nf + 1.0) * (nf + 3.0) * (nf + 5.0)),
        })
    }
}

pub fn central_moment(sample: &Sample, order: u32) -> Result<f64> {
    sample.central_moment(order)
}

pub fn skewness(sample: &Sample) -> Result<f64> {
    sample.skewness()
}

pub fn kurtosis(sample: &Sample) -> Result<f64> {
    sample.kurtosis()
}

pub fn lm_statistic(sample: &Sample) -> Result<f64> {
    sample.lm_statistic()
}

pub fn alm_statistic(sample: &Sample) -> Result<f64> {
    sample.alm_statistic()
}

pub fn finite_constants(n: usize) -> Result<FiniteSampleConstants> {
    FiniteSampleConstants::new(n)
}

/// `P(X <= x)` for `X ~ chi2(2)`, i.e. `1 - exp(-x/2)`.
pub fn chi2_cdf_2df(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!(
            "chi2 argument must be >= 0, got {x}"
        )));
    }
    Ok(-(-0.5 * x).exp_m1())
}

/// Upper tail `exp(-x/2)` of chi2(2).
pub fn chi2_sf_2df(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!(
            "chi2 argument must be >= 0, got {x}"
        )));
    }
    Ok((-0.5 * x).exp())
}

/// `-2 ln(1 - p)`, the inverse of [`chi2_cdf_2df`].
pub fn chi2_quantile_2df(p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "probability must lie in [0, 1), got {p}"
        )));
    }
    Ok(-2.0 * (-p).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn central_moment_examples() {
        assert_eq!(sample(&[-1.0, 1.0]).central_moment(2).unwrap(), 1.0);
        assert_eq!(sample(&[5.0, 5.0, 5.0]).central_moment(3).unwrap(), 0.0);
        assert_relative_eq!(
            sample(&[-1.0, 0.0, 1.0]).central_moment(4).unwrap(),
            2.0 / 3.0,
            max_relative = 1e-15
        );
        assert!(matches!(
            sample(&[]).central_moment(2),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn skewness_examples() {
        assert_eq!(sample(&[-1.0, 0.0, 1.0]).skewness().unwrap(), 0.0);
        // m2 = 3, m3 = 6
        assert_relative_eq!(
            sample(&[0.0, 0.0, 0.0, 4.0]).skewness().unwrap(),
            6.0 / 3f64.powf(1.5),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            sample(&[0.0, 0.0, 0.0, 4.0]).skewness().unwrap(),
            1.154_700_538_379_251_5,
            max_relative = 1e-14
        );
        assert!(matches!(
            sample(&[2.0, 2.0]).skewness(),
            Err(Error::DegenerateSample)
        ));
    }

    #[test]
    fn kurtosis_examples() {
        assert_eq!(sample(&[-1.0, 1.0]).kurtosis().unwrap(), 1.0);
        assert_relative_eq!(
            sample(&[-1.0, 0.0, 1.0]).kurtosis().unwrap(),
            1.5,
            max_relative = 1e-15
        );
        assert!(matches!(
            sample(&[7.0, 7.0, 7.0]).kurtosis(),
            Err(Error::DegenerateSample)
        ));
    }

    #[test]
    fn lm_examples() {
        assert_relative_eq!(
            sample(&[-1.0, 1.0]).lm_statistic().unwrap(),
            1.0 / 3.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            sample(&[-1.0, 0.0, 1.0]).lm_statistic().unwrap(),
            0.28125,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            sample(&[-1.0, -1.0, 1.0, 1.0]).lm_statistic().unwrap(),
            2.0 / 3.0,
            max_relative = 1e-15
        );
        assert!(matches!(
            sample(&[1.0]).lm_statistic(),
            Err(Error::SampleTooSmall { n: 1, .. })
        ));
    }

    #[test]
    fn finite_constants_examples() {
        let c = finite_constants(10).unwrap();
        assert_relative_eq!(c.c1, 48.0 / 143.0, max_relative = 1e-15);
        assert_relative_eq!(c.c2, 27.0 / 11.0, max_relative = 1e-15);
        assert_relative_eq!(c.c3, 13440.0 / 23595.0, max_relative = 1e-15);
        assert!((c.c1 - 0.335_664_3).abs() < 1e-7);
        assert!((c.c2 - 2.454_545_5).abs() < 1e-7);
        assert!((c.c3 - 0.569_612_2).abs() < 1e-7);

        let c = finite_constants(4).unwrap();
        assert_relative_eq!(c.c1, 12.0 / 35.0, max_relative = 1e-15);
        assert_relative_eq!(c.c2, 1.8, max_relative = 1e-15);
        assert_relative_eq!(c.c3, 192.0 / 1575.0, max_relative = 1e-15);

        let c = finite_constants(1_000_000).unwrap();
        assert!((c.c2 - 3.0).abs() < 1e-5);
        let n = 1e6;
        assert!((n * c.c1 / 6.0 - 1.0).abs() < 1e-4);
        assert!((n * c.c3 / 24.0 - 1.0).abs() < 1e-4);

        for n in 0..4 {
            assert!(matches!(finite_constants(n), Err(Error::AlmUndefined(_))));
        }
    }

    #[test]
    fn alm_examples() {
        // b1 = 0, b2 = 1, c2 = 1.8, c3 = 192/1575: 0.64 * 1575 / 192
        assert_relative_eq!(
            sample(&[-1.0, -1.0, 1.0, 1.0]).alm_statistic().unwrap(),
            5.25,
            max_relative = 1e-14
        );
        assert!(matches!(
            sample(&[-1.0, 0.0, 1.0]).alm_statistic(),
            Err(Error::AlmUndefined(3))
        ));
        assert!(matches!(
            sample(&[3.0; 6]).alm_statistic(),
            Err(Error::DegenerateSample)
        ));
    }

    #[test]
    fn alm_approaches_lm_for_large_n() {
        let values: Vec<f64> = (0..1_000_000u64)
            .map(|i| ((i * 7919) % 1000) as f64 + (i % 3) as f64 * 0.25)
            .map(|x| x * x.sqrt())
            .collect();
        let s = Sample::new(values).unwrap();
        let lm = s.lm_statistic().unwrap();
        let alm = s.alm_statistic().unwrap();
        assert!(((alm - lm) / lm).abs() < 1e-4, "lm {lm} alm {alm}");
    }

    #[test]
    fn chi2_closed_forms() {
        assert_eq!(chi2_cdf_2df(0.0).unwrap(), 0.0);
        assert!((chi2_cdf_2df(5.991465).unwrap() - 0.95).abs() < 1e-6);
        assert!((chi2_sf_2df(1.9333).unwrap() - 0.3804).abs() < 5e-5);
        assert_eq!(chi2_quantile_2df(0.0).unwrap(), 0.0);
        assert!((chi2_quantile_2df(0.95).unwrap() - 5.991465).abs() < 1e-5);
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let back = chi2_cdf_2df(chi2_quantile_2df(p).unwrap()).unwrap();
            assert!((back - p).abs() < 1e-12);
        }
        assert!(chi2_cdf_2df(-1.0).is_err());
        assert!(chi2_quantile_2df(1.0).is_err());
        assert!(chi2_quantile_2df(-0.1).is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("lm".parse::<StatisticKind>().unwrap(), StatisticKind::Lm);
        assert_eq!("ALM".parse::<StatisticKind>().unwrap(), StatisticKind::Alm);
        assert!("JB".parse::<StatisticKind>().is_err());
    }

    #[test]
    fn non_finite_rejected() {
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
        assert!(Sample::new(vec![f64::INFINITY]).is_err());
    }
}
