use jbtest::{GeneratorKind, Stream, StreamSpec};

const DRAWS: usize = 1_000_000;

fn stream(generator: GeneratorKind, index: u64) -> Stream {
    Stream::new(StreamSpec::new(20240601, index, generator))
}

fn check_uniforms(generator: GeneratorKind) {
    let mut s = stream(generator, 3);
    let u: Vec<f64> = (0..DRAWS).map(|_| s.next_uniform()).collect();
    let mean = u.iter().sum::<f64>() / DRAWS as f64;
    assert!((mean - 0.5).abs() < 0.002, "{generator}: mean {mean}");
    assert!(u.iter().all(|&x| x > 0.0 && x < 1.0));

    // Kolmogorov-Smirnov on the first 1e5 draws.
    let mut head = u[..100_000].to_vec();
    head.sort_by(f64::total_cmp);
    let m = head.len() as f64;
    let d = head
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / m).max((i + 1) as f64 / m - x))
        .fold(0.0, f64::max);
    assert!(d < 1.95 / m.sqrt(), "{generator}: KS D = {d}");
}

fn check_normals(generator: GeneratorKind) {
    let mut s = stream(generator, 11);
    let mut z = vec![0.0; DRAWS];
    s.fill_normal(&mut z);
    let n = DRAWS as f64;
    let mean = z.iter().sum::<f64>() / n;
    let m2 = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = z.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    assert!(mean.abs() < 0.004, "{generator}: mean {mean}");
    assert!((m2 - 1.0).abs() < 0.006, "{generator}: variance {m2}");
    let b2 = m4 / (m2 * m2);
    assert!((b2 - 3.0).abs() < 0.02, "{generator}: kurtosis {b2}");
}

#[test]
fn counter_uniforms() {
    check_uniforms(GeneratorKind::Counter);
}

#[test]
fn mlfg_uniforms() {
    check_uniforms(GeneratorKind::Mlfg1279);
}

#[test]
fn counter_normals() {
    check_normals(GeneratorKind::Counter);
}

#[test]
fn mlfg_normals() {
    check_normals(GeneratorKind::Mlfg1279);
}

#[test]
fn equal_specs_give_equal_streams() {
    for generator in [GeneratorKind::Counter, GeneratorKind::Mlfg1279] {
        let mut a = stream(generator, 99);
        let mut b = stream(generator, 99);
        let mut c = stream(generator, 100);
        let xs: Vec<u64> = (0..5000).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..5000).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..5000).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }
}

#[test]
fn neighbouring_streams_are_uncorrelated() {
    let mut a = stream(GeneratorKind::Counter, 0);
    let mut b = stream(GeneratorKind::Counter, 1);
    let m = 200_000;
    let r = (0..m)
        .map(|_| a.next_normal() * b.next_normal())
        .sum::<f64>()
        / m as f64;
    // Standard error of the mean product is 1/sqrt(m).
    assert!(r.abs() < 4.0 / (m as f64).sqrt(), "correlation {r}");
}
