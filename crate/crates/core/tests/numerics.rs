use nexp_core::dilog::dilog;
use nexp_core::measure::{entropy_sweep, log_integral};
use nexp_core::quadrature::integrate;
use rand::Rng;

#[test]
fn dilog_landen_square_identity() {
    let mut rng = nexp_core::rng::stream(1);
    for _ in 0..50 {
        let x: f64 = rng.gen_range(-0.999..0.999);
        let lhs = dilog(x).unwrap() + dilog(-x).unwrap();
        let rhs = 0.5 * dilog(x * x).unwrap();
        assert!((lhs - rhs).abs() < 1e-12, "x = {x}: {lhs} vs {rhs}");
    }
}

#[test]
fn dilog_rejects_arguments_above_one() {
    assert!(dilog(1.5).is_err());
    assert!(dilog(f64::NAN).is_err());
}

#[test]
fn log_integral_matches_quadrature() {
    let mut rng = nexp_core::rng::stream(2);
    for _ in 0..100 {
        let n = rng.gen_range(2..60) as f64;
        let coef = rng.gen_range(0.01..10.0);
        let a = rng.gen_range(0.01..3.0);
        let b = a + rng.gen_range(0.01..2.0);
        let f = |x: f64| x.ln() * coef / (n + coef * x);
        let q = integrate(&f, a, b, 1e-13);
        assert!(
            (log_integral(coef, n, a, b) - q).abs() < 1e-10,
            "coef={coef} n={n} [{a}, {b}]"
        );
    }
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| entropy_sweep(8, 0.2, 1.3, 7, 20_000, 5).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one.len(), 7);
    assert_eq!(one[6].alpha, 1.3);
}
