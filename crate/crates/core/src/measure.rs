//! Invariant densities and entropy.
//!
//! The planar measure has density `H N / (N + xy)^2` on `Omega_alpha`; its
//! projection to the x-axis is a signed sum of terms `M / (N + M x)` over
//! sub-intervals. Entropy follows from Rohlin's formula
//! `h = ∫ log|T'| dmu = log N - 2 ∫ log(x) f(x) dx`, which integrates in
//! closed form with the dilogarithm.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dilog::dilog;
use crate::error::{Error, Result};
use crate::map::{Interval, NExpParams};
use crate::matching::MatchingPair;
use crate::natext::build_domain;
use crate::rng::{mix_seed, stream};

pub const DEFAULT_BURN_IN: usize = 1_000;

/// `∫_from^to log(x) M/(N + M x) dx` via
/// `[Li2(-M x/N) + log(x) log(1 + M x/N)]_from^to`.
pub fn log_integral(coef: f64, n: f64, from: f64, to: f64) -> f64 {
    if from == to {
        return 0.0;
    }
    let g = |x: f64| {
        let z = coef * x / n;
        dilog(-z).expect("argument is negative") + x.ln() * z.ln_1p()
    };
    g(to) - g(from)
}

/// The normalizing constant `H` with
/// `1/H = 2 log A + 2 log(B+1) - log(N - (A+1) d) - log(N - (d+i) B)`.
pub fn normalizing_constant(pair: &MatchingPair) -> Result<f64> {
    let h = pair.heights();
    let n = pair.n() as f64;
    let args = [
        h.a,
        h.b + 1.0,
        n - (h.a + 1.0) * pair.d() as f64,
        n - pair.top_digit() as f64 * h.b,
    ];
    if let Some(bad) = args.iter().find(|v| **v <= 0.0) {
        return Err(Error::Internal(format!(
            "non-positive log argument {bad} for {pair:?}"
        )));
    }
    let inv = 2.0 * args[0].ln() + 2.0 * args[1].ln() - args[2].ln() - args[3].ln();
    Ok(1.0 / inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogTerm {
    pub sign: Sign,
    pub coef: f64,
    pub support: Interval,
}

/// `f(x) = H * sum ± M/(N + M x) 1_support(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseLogDensity {
    pub n: f64,
    pub scale: f64,
    pub domain: Interval,
    pub terms: Vec<LogTerm>,
}

impl PiecewiseLogDensity {
    pub fn eval(&self, x: f64) -> f64 {
        let at_right = x == self.domain.hi;
        let sum: f64 = self
            .terms
            .iter()
            .filter(|t| {
                (t.support.lo <= x && x < t.support.hi)
                    || (at_right && t.support.hi == x && !t.support.is_empty())
            })
            .map(|t| t.sign.value() * t.coef / (self.n + t.coef * x))
            .sum();
        self.scale * sum
    }

    /// All term endpoints, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .terms
            .iter()
            .flat_map(|t| [t.support.lo, t.support.hi])
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Exact `∫ f` from the antiderivative `log(N + M x)`.
    pub fn total_mass(&self) -> f64 {
        self.scale
            * self
                .terms
                .iter()
                .map(|t| {
                    t.sign.value()
                        * ((self.n + t.coef * t.support.hi) / (self.n + t.coef * t.support.lo)).ln()
                })
                .sum::<f64>()
    }

    /// `∫ log(x) f(x) dx` term by term with [`log_integral`].
    pub fn log_moment(&self) -> f64 {
        self.scale
            * self
                .terms
                .iter()
                .map(|t| t.sign.value() * log_integral(t.coef, self.n, t.support.lo, t.support.hi))
                .sum::<f64>()
    }
}

/// The density of the absolutely continuous invariant measure of `T_alpha`
/// for `alpha` in the closed plateau of `pair`.
pub fn density_1d(pair: &MatchingPair, alpha: f64) -> Result<PiecewiseLogDensity> {
    let dom = build_domain(pair, alpha)?;
    let h = *dom.heights();
    let m = *dom.marks();
    let term = |sign, coef, lo: f64, hi: f64| LogTerm {
        sign,
        coef,
        support: Interval::new(lo, hi.max(lo)),
    };
    Ok(PiecewiseLogDensity {
        n: pair.n() as f64,
        scale: normalizing_constant(pair)?,
        domain: Interval::new(m.alpha, m.alpha_plus_one),
        terms: vec![
            term(Sign::Plus, h.d, m.alpha, m.t_alpha1),
            term(Sign::Plus, h.e, m.t_alpha1, m.t2_alpha),
            term(Sign::Plus, h.f, m.t2_alpha, m.alpha_plus_one),
            term(Sign::Minus, h.a, m.alpha, m.t2_alpha1),
            term(Sign::Minus, h.b, m.t2_alpha1, m.t_alpha),
            term(Sign::Minus, h.c, m.t_alpha, m.alpha_plus_one),
        ],
    })
}

/// `|f(x) - sum_j f(N/(x+j)) N/(x+j)^2|` over the digits `j` whose branch
/// covers `x`; zero for an invariant density.
pub fn transfer_residual(params: &NExpParams, f: &PiecewiseLogDensity, x: f64) -> f64 {
    let n = params.n() as f64;
    let pushed: f64 = params
        .digit_range()
        .iter()
        .filter_map(|j| {
            let y = n / (x + j as f64);
            let cyl = params.cylinder_unchecked(j);
            cyl.contains(y).then(|| f.eval(y) * y * y / n)
        })
        .sum();
    (f.eval(x) - pushed).abs()
}

/// Entropy of `T_alpha`, in nats, for any `alpha` in the plateau of `pair`.
///
/// Evaluated on the shape at `alpha = B`, where the density reduces to
/// `E` on `(B, B+1)`, `-A` on `(B, D)` and `-C` on `(D, B+1)`.
pub fn entropy_closed_form(pair: &MatchingPair) -> Result<f64> {
    let h = pair.heights();
    let n = pair.n() as f64;
    let scale = normalizing_constant(pair)?;
    let (b, b1, d) = (h.b, h.b + 1.0, h.d);
    let moment =
        log_integral(h.e, n, b, b1) - log_integral(h.a, n, b, d) - log_integral(h.c, n, d, b1);
    Ok(n.ln() - 2.0 * scale * moment)
}

/// Birkhoff average of `log|T'(x)| = log N - 2 log x` along a seeded orbit.
///
/// The start point is uniform in `(alpha, alpha + 1)`; `burn_in` steps are
/// discarded and the next `iterations` images are averaged.
pub fn entropy_birkhoff(params: &NExpParams, iterations: usize, burn_in: usize, seed: u64) -> f64 {
    let mut rng = stream(seed);
    let alpha = params.alpha();
    let mut x = alpha + rng.gen::<f64>();
    for _ in 0..burn_in {
        x = params.step_unchecked(x).x;
    }
    let ln_n = (params.n() as f64).ln();
    let mut acc = 0.0;
    for _ in 0..iterations {
        x = params.step_unchecked(x).x;
        acc += x.ln();
    }
    ln_n - 2.0 * acc / iterations.max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyResult {
    pub closed_form: f64,
    pub birkhoff_estimate: Option<f64>,
    pub birkhoff_iterations: usize,
    pub seed: u64,
}

impl EntropyResult {
    pub fn discrepancy(&self) -> Option<f64> {
        self.birkhoff_estimate.map(|b| (b - self.closed_form).abs())
    }
}

/// Closed-form entropy, optionally paired with a simulation at `alpha`.
pub fn entropy(
    pair: &MatchingPair,
    alpha: Option<f64>,
    iterations: usize,
    seed: u64,
) -> Result<EntropyResult> {
    let closed_form = entropy_closed_form(pair)?;
    let birkhoff_estimate = match alpha {
        Some(a) => {
            let params = NExpParams::new(pair.n(), a)?;
            Some(entropy_birkhoff(&params, iterations, DEFAULT_BURN_IN, seed))
        }
        None => None,
    };
    Ok(EntropyResult {
        closed_form,
        birkhoff_estimate,
        birkhoff_iterations: iterations,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub entropy: f64,
    pub iterations: usize,
    pub seed: u64,
}

/// Simulated entropy on the uniform grid `alpha_lo..=alpha_hi` with `steps`
/// points. Row `k` uses seed `mix_seed(seed, k)`, so the table does not
/// depend on the number of worker threads.
pub fn entropy_sweep(
    n: u64,
    alpha_lo: f64,
    alpha_hi: f64,
    steps: usize,
    iterations: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if steps < 2 {
        return Err(Error::InvalidParams(format!(
            "a sweep needs at least 2 steps, got {steps}"
        )));
    }
    if !(alpha_lo > 0.0 && alpha_lo < alpha_hi) {
        return Err(Error::InvalidParams(format!(
            "need 0 < from < to, got [{alpha_lo}, {alpha_hi}]"
        )));
    }
    if iterations == 0 {
        return Err(Error::InvalidParams("iterations must be positive".into()));
    }
    // Validates the upper end against sqrt(N) - 1.
    NExpParams::new(n, alpha_hi)?;
    let grid: Vec<f64> = (0..steps)
        .map(|k| {
            if k + 1 == steps {
                alpha_hi
            } else {
                alpha_lo + (alpha_hi - alpha_lo) * k as f64 / (steps - 1) as f64
            }
        })
        .collect();
    grid.par_iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let params = NExpParams::new(n, alpha)?;
            let row_seed = mix_seed(seed, k as u64);
            Ok(SweepRow {
                alpha,
                entropy: entropy_birkhoff(&params, iterations, DEFAULT_BURN_IN, row_seed),
                iterations,
                seed: row_seed,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_piecewise};

    fn pair(n: u64, d: u64, i: u64) -> MatchingPair {
        MatchingPair::new(n, d, i).unwrap()
    }

    #[test]
    fn log_integral_matches_quadrature() {
        let v = log_integral(1.0, 1.0, 1.0, 2.0);
        let q = integrate(&|x: f64| x.ln() / (1.0 + x), 1.0, 2.0, 1e-14);
        assert!((v - q).abs() < 1e-12);
        // mpmath: quad(log(x)/(1+x), [1, 2])
        assert!((v - 0.147220676959241).abs() < 1e-13);
        assert_eq!(log_integral(3.0, 2.0, 0.7, 0.7), 0.0);
    }

    #[test]
    fn normalizing_constant_examples() {
        assert!((normalizing_constant(&pair(2, 1, 3)).unwrap() - 3.965116120651161).abs() < 1e-12);
        assert!((normalizing_constant(&pair(8, 2, 2)).unwrap() - 18.377877038370).abs() < 1e-9);
        assert!((normalizing_constant(&pair(8, 7, 57)).unwrap() - 8.7715446381451).abs() < 1e-9);
    }

    #[test]
    fn closed_form_entropy_matches_rohlin_quadrature() {
        // Values from an independent 30-digit quadrature of log N - 2 log x
        // against the fiber density.
        let cases = [
            ((2, 1, 3), 1.137779582561361),
            ((8, 2, 2), 0.9212646326801086),
            ((8, 4, 6), 1.821299225508221),
            ((8, 5, 11), 2.294677499291343),
            ((8, 6, 22), 2.793882141530776),
            ((8, 7, 57), 3.349545677008456),
            ((3, 1, 2), 0.8652426646216606),
            ((3, 2, 7), 1.793703236872682),
        ];
        for ((n, d, i), want) in cases {
            let got = entropy_closed_form(&pair(n, d, i)).unwrap();
            assert!((got - want).abs() < 1e-12, "({n},{d},{i}): {got} vs {want}");
        }
    }

    #[test]
    fn closed_form_equals_density_log_moment_inside_the_plateau() {
        for (n, d, i) in [(2, 1, 3), (8, 4, 6), (20, 10, 12)] {
            let p = pair(n, d, i);
            let h = p.heights();
            let want = entropy_closed_form(&p).unwrap();
            for t in [0.2, 0.5, 0.8] {
                let f = density_1d(&p, h.a + t * (h.b - h.a)).unwrap();
                let via_terms = (n as f64).ln() - 2.0 * f.log_moment();
                let via_quad = integrate_piecewise(
                    &|x: f64| ((n as f64).ln() - 2.0 * x.ln()) * f.eval(x),
                    &f.breakpoints(),
                    1e-12,
                );
                assert!((via_terms - want).abs() < 1e-11);
                assert!((via_quad - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn density_examples() {
        let p = pair(2, 1, 3);
        let f = density_1d(&p, 0.39).unwrap();
        assert_eq!(f.terms.len(), 6);
        let q = integrate_piecewise(&|x| f.eval(x), &f.breakpoints(), 1e-11);
        assert!((q - 1.0).abs() < 1e-8);
        assert!((f.total_mass() - 1.0).abs() < 1e-12);
        for k in 1..1000 {
            let x = 0.39 + k as f64 / 1000.0;
            assert!(f.eval(x) > 0.0);
        }
        assert!(density_1d(&p, 0.3).is_err());
    }

    #[test]
    fn density_is_the_fiber_integral() {
        let p = pair(8, 4, 6);
        let alpha = 0.69;
        let f = density_1d(&p, alpha).unwrap();
        let dom = build_domain(&p, alpha).unwrap();
        let n = 8.0;
        let scale = normalizing_constant(&p).unwrap();
        let mut rng = stream(11);
        for _ in 0..1000 {
            let x = alpha + rng.gen::<f64>();
            let fib = dom.fiber(x).unwrap();
            let direct = scale * (fib.hi / (n + x * fib.hi) - fib.lo / (n + x * fib.lo));
            assert!((f.eval(x) - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn transfer_residual_examples() {
        let p = pair(2, 1, 3);
        let params = NExpParams::new(2, 0.39).unwrap();
        let f = density_1d(&p, 0.39).unwrap();
        assert!(transfer_residual(&params, &f, 0.9) < 1e-10);

        // perturbed scale: the residual is linear in H
        let x = 0.61;
        let mut g = f.clone();
        g.scale *= 1.01;
        let shifted = PiecewiseLogDensity {
            terms: vec![LogTerm {
                sign: Sign::Plus,
                coef: 1.0,
                support: f.domain,
            }],
            ..f.clone()
        };
        let r1 = transfer_residual(&params, &shifted, x);
        let mut shifted2 = shifted.clone();
        shifted2.scale *= 1.01;
        let r2 = transfer_residual(&params, &shifted2, x);
        assert!(r1 > 1e-3);
        assert!((r2 / r1 - 1.01).abs() < 1e-12);
        assert!(transfer_residual(&params, &g, x) < 1e-9);
    }

    #[test]
    fn birkhoff_single_step() {
        let params = NExpParams::new(2, 0.4).unwrap();
        let mut rng = stream(5);
        let x0 = 0.4 + rng.gen::<f64>();
        let x1 = params.step(x0).unwrap().x;
        let want = 2f64.ln() - 2.0 * x1.ln();
        assert!((entropy_birkhoff(&params, 1, 0, 5) - want).abs() < 1e-15);
        assert_eq!(
            entropy_birkhoff(&params, 1000, 10, 5),
            entropy_birkhoff(&params, 1000, 10, 5)
        );
    }

    #[test]
    fn sweep_grid_and_errors() {
        let rows = entropy_sweep(2, 0.3, 0.4, 2, 100, 0).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].alpha, 0.3);
        assert_eq!(rows[1].alpha, 0.4);
        assert!(entropy_sweep(2, 0.3, 0.4, 1, 100, 0).is_err());
        assert!(entropy_sweep(2, 0.4, 0.3, 5, 100, 0).is_err());
        assert!(entropy_sweep(2, 0.3, 0.5, 5, 100, 0).is_err());
        assert!(entropy_sweep(2, 0.0, 0.4, 5, 100, 0).is_err());
        assert_eq!(
            entropy_sweep(8, 0.5, 1.5, 7, 1000, 3).unwrap(),
            entropy_sweep(8, 0.5, 1.5, 7, 1000, 3).unwrap()
        );
    }
}
