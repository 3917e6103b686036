use rand::Rng;

use nexp_core::matching::{endpoint_identities, sub_plateaux, verify_matching};
use nexp_core::measure::{density_1d, transfer_residual};
use nexp_core::natext::{build_domain, check_lamination};
use nexp_core::quadrature::integrate_piecewise;
use nexp_core::quilt::{mass_preservation, Quilt, Rect};
use nexp_core::rng::{mix_seed, stream};
use nexp_core::{MatchingPair, NExpParams};

use crate::output::CliResult;
use crate::Suite;

/// One measured quantity and the bound it must stay below.
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    /// A count that must be exactly zero; `tol` is ignored.
    pub count: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tol,
            count: false,
        }
    }

    fn zero_count(name: impl Into<String>, value: u64) -> Self {
        Check {
            name: name.into(),
            value: value as f64,
            tol: 0.0,
            count: true,
        }
    }

    pub fn pass(&self) -> bool {
        if self.count {
            self.value == 0.0
        } else {
            self.value < self.tol
        }
    }

    pub fn describe(&self) -> String {
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        if self.count {
            format!("{verdict} {}: {} (must be 0)", self.name, self.value)
        } else {
            format!(
                "{verdict} {}: {:.3e} (bound {:.0e})",
                self.name, self.value, self.tol
            )
        }
    }
}

/// The three quartile points of `(A, B)`.
fn interior_alphas(pair: &MatchingPair) -> [f64; 3] {
    let h = pair.heights();
    [0.25, 0.5, 0.75].map(|t| h.a + t * (h.b - h.a))
}

pub fn run(pair: &MatchingPair, suite: Suite, seed: u64) -> CliResult<Vec<Check>> {
    Ok(match suite {
        Suite::Matching => matching(pair, seed)?,
        Suite::Quilting => quilting(pair, seed)?,
        Suite::Lamination => lamination(pair, seed)?,
        Suite::Invariance => invariance(pair)?,
        Suite::Endpoints => endpoint_identities(pair)
            .entries()
            .into_iter()
            .map(|(name, v)| Check::new(name, v, 1e-12))
            .collect(),
    })
}

fn matching(pair: &MatchingPair, seed: u64) -> CliResult<Vec<Check>> {
    let h = pair.heights();
    let mut rng = stream(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let alpha = h.a + (h.b - h.a) * rng.gen_range(1e-9..1.0 - 1e-9);
        worst = worst.max(verify_matching(pair, alpha)?);
    }
    Ok(vec![Check::new(
        "max |T^3(alpha) - T^3(alpha+1)| over 100 alpha",
        worst,
        1e-8,
    )])
}

fn quilting(pair: &MatchingPair, seed: u64) -> CliResult<Vec<Check>> {
    let sub = sub_plateaux(pair, 400)
        .into_iter()
        .max_by(|a, b| (a.hi - a.lo).total_cmp(&(b.hi - b.lo)))
        .ok_or_else(|| crate::output::CliError::Failed("no sub-plateau found".into()))?;
    let mut rng = stream(seed);
    let mut checks = Vec::new();
    for s in 0..2 {
        let (u, v): (f64, f64) = (rng.gen(), rng.gen());
        let w = sub.hi - sub.lo;
        let (alpha, beta) = (sub.lo + w * u.min(v), sub.lo + w * u.max(v));
        let q = Quilt::new(pair, alpha, beta)?;
        checks.push(Check::new(
            format!(
                "corner residual, k = {}, alpha = {alpha:.12}, beta = {beta:.12}",
                q.k()
            ),
            q.residual(),
            1e-9,
        ));
        let d0 = q.patches().d[0];
        let rect = Rect::new(d0.x0, d0.x1, d0.y0 + 0.25 * (d0.y1 - d0.y0), d0.y1);
        let m = mass_preservation(&q, rect, 100_000, mix_seed(seed, s))?;
        checks.push(Check::new(
            "mass difference in standard errors (D0 rectangle)",
            m.z_score(),
            3.0,
        ));
    }
    Ok(checks)
}

fn lamination(pair: &MatchingPair, seed: u64) -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    for (k, alpha) in interior_alphas(pair).into_iter().enumerate() {
        let dom = build_domain(pair, alpha)?;
        let r = check_lamination(&dom, 1_000_000, mix_seed(seed, k as u64));
        checks.push(Check::zero_count(
            format!("violations in {} samples, alpha = {alpha:.12}", r.samples),
            r.violations,
        ));
        checks.push(Check::new(
            "boundary exclusions (fraction)",
            r.excluded_fraction(),
            1e-3,
        ));
    }
    Ok(checks)
}

fn invariance(pair: &MatchingPair) -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    for alpha in interior_alphas(pair) {
        let f = density_1d(pair, alpha)?;
        let mass = integrate_piecewise(&|x| f.eval(x), &f.breakpoints(), 1e-13);
        checks.push(Check::new(
            format!("|integral of density - 1|, alpha = {alpha:.12}"),
            (mass - 1.0).abs(),
            1e-8,
        ));
        let params = NExpParams::new(pair.n(), alpha)?;
        let worst = (0..1000)
            .map(|k| transfer_residual(&params, &f, alpha + (k as f64 + 0.5) / 1000.0))
            .fold(0.0, f64::max);
        checks.push(Check::new(
            "max transfer-operator residual at 1000 points",
            worst,
            1e-9,
        ));
    }
    Ok(checks)
}
