use approx::assert_relative_eq;
use jbtest::{chi2_cdf_2df, chi2_quantile_2df, pjb, qjb, Sample, SampleSize, StatisticKind};
use proptest::prelude::*;

fn spread_sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, 4..60).prop_filter("needs spread", |v| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo > 1e-3
    })
}

proptest! {
    #[test]
    fn statistics_are_non_negative(v in spread_sample()) {
        let s = Sample::new(v).unwrap();
        prop_assert!(s.lm_statistic().unwrap() >= 0.0);
        prop_assert!(s.alm_statistic().unwrap() >= 0.0);
    }

    #[test]
    fn location_scale_invariance(v in spread_sample(), a in -50.0..50.0f64, b in 0.1..20.0f64) {
        let s = Sample::new(v.clone()).unwrap();
        let t = Sample::new(v.iter().map(|x| a + b * x).collect()).unwrap();
        for kind in StatisticKind::ALL {
            let x = s.statistic(kind).unwrap();
            let y = t.statistic(kind).unwrap();
            prop_assert!((x - y).abs() <= 1e-7 * x.max(1.0), "{kind}: {x} vs {y}");
        }
    }

    #[test]
    fn permutation_is_bit_exact(v in spread_sample(), seed in any::<u64>()) {
        let mut w = v.clone();
        // Fisher-Yates driven by a small LCG.
        let mut state = seed | 1;
        for i in (1..w.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            w.swap(i, j);
        }
        let s = Sample::new(v).unwrap();
        let t = Sample::new(w).unwrap();
        for kind in StatisticKind::ALL {
            prop_assert_eq!(s.statistic(kind).unwrap().to_bits(), t.statistic(kind).unwrap().to_bits());
        }
    }

    #[test]
    fn asymptotic_inversion(p in 1e-6..0.999999f64) {
        let q = qjb(p, SampleSize::Infinite, StatisticKind::Lm, None).unwrap();
        let back = pjb(q, SampleSize::Infinite, StatisticKind::Lm, None).unwrap().value.unwrap();
        prop_assert!((back - p).abs() < 1e-12);
    }
}

#[test]
fn chi2_closed_forms() {
    assert_relative_eq!(
        chi2_quantile_2df(0.95).unwrap(),
        5.991464547107979,
        max_relative = 1e-14
    );
    assert_relative_eq!(
        chi2_cdf_2df(5.991464547107979).unwrap(),
        0.95,
        max_relative = 1e-14
    );
}
