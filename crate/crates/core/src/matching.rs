//! Matching pairs `(d, i)` with `N (i - 1) = d (d + i)` and their plateaux.
//!
//! For such a pair every `alpha` in the open plateau `(A, B)` has digit set
//! `{d, ..., d + i}` and the orbits of `alpha` and `alpha + 1` meet after
//! three steps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{DoubleDouble, Interval, NExpParams};

/// Distance from a plateau endpoint below which `alpha` is reported as a
/// boundary point.
pub const PLATEAU_BOUNDARY_EPS: f64 = 1e-12;

/// Number of positive divisors of `n`.
pub fn sigma0(n: u64) -> u64 {
    assert!(n >= 1, "sigma0 is defined for n >= 1");
    let mut count = 0;
    let mut k = 1u64;
    while k * k <= n {
        if n.is_multiple_of(k) {
            count += if k * k == n { 1 } else { 2 };
        }
        k += 1;
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MatchingPair {
    n: u64,
    d: u64,
    i: u64,
}

impl MatchingPair {
    pub fn new(n: u64, d: u64, i: u64) -> Result<Self> {
        if n < 2 || d < 1 || i < 2 {
            return Err(Error::InvalidParams(format!(
                "need N >= 2, d >= 1, i >= 2; got N={n}, d={d}, i={i}"
            )));
        }
        if d >= n {
            return Err(Error::InvalidParams(format!(
                "smallest digit d={d} must be below N={n}"
            )));
        }
        let lhs = n as u128 * (i as u128 - 1);
        let rhs = d as u128 * (d as u128 + i as u128);
        if lhs != rhs {
            return Err(Error::InvalidParams(format!(
                "(d, i) = ({d}, {i}) does not satisfy N(i-1) = d(d+i) for N={n}"
            )));
        }
        Ok(MatchingPair { n, d, i })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn i(&self) -> u64 {
        self.i
    }

    /// Largest digit `d + i`.
    pub fn top_digit(&self) -> u64 {
        self.d + self.i
    }

    /// `N - d`, the divisor of `d (d + 1)` that produced this pair.
    pub fn k(&self) -> u64 {
        self.n - self.d
    }

    pub fn heights(&self) -> PlateauHeights {
        PlateauHeights::for_pair(self).expect("heights of a validated pair are ordered")
    }
}

/// Result of [`enumerate_matching_pairs`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Enumeration {
    pub n: u64,
    pub pairs: Vec<MatchingPair>,
    /// `D(N)`, the number of pairs.
    pub count: usize,
    /// `M(N) = (sigma0(N) - 1)(sigma0(N + 1) - 1)`, an upper bound on `D(N)`.
    pub bound: u64,
}

/// All matching pairs for `n`, sorted by `d`.
///
/// With `k = N - d` the relation becomes `i = d(d + 1)/k + 1`, so it suffices
/// to walk `k = 1..N-1` and keep the exact divisors.
pub fn enumerate_matching_pairs(n: u64) -> Result<Enumeration> {
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "N must be at least 2, got {n}"
        )));
    }
    let mut pairs = Vec::new();
    for k in (1..n).rev() {
        let d = n - k;
        let prod = d as u128 * (d as u128 + 1);
        if !prod.is_multiple_of(k as u128) {
            continue;
        }
        let i = (prod / k as u128 + 1) as u64;
        if i >= 2 {
            pairs.push(MatchingPair { n, d, i });
        }
    }
    let bound = (sigma0(n) - 1) * (sigma0(n + 1) - 1);
    Ok(Enumeration {
        n,
        count: pairs.len(),
        pairs,
        bound,
    })
}

/// The six heights `A < B < C < D < E < F` of the natural-extension polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlateauHeights {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl PlateauHeights {
    pub fn for_pair(pair: &MatchingPair) -> Result<Self> {
        let n = pair.n as f64;
        let d = pair.d as f64;
        let di = (pair.d + pair.i) as f64;
        let root_a = ((di + 1.0).powi(2) + 4.0 * n).sqrt();
        let root_b = ((d - 1.0).powi(2) + 4.0 * n).sqrt();
        // Rationalized so that no radical is cancelled against a nearby integer.
        let a = 2.0 * n / (root_a + di + 1.0);
        let b = 2.0 * (n - d) / (root_b + d + 1.0);
        let c = 2.0 * n / (root_a + di - 1.0);
        let dh = 2.0 * n / (root_b + d + 1.0);
        let h = PlateauHeights {
            a,
            b,
            c,
            d: dh,
            e: a + 1.0,
            f: b + 1.0,
        };
        let worst = h.chain_residuals(pair).into_iter().fold(0.0, f64::max);
        if !(0.0 < h.a && h.a < h.b && h.b < h.c && h.c < h.d && h.d < h.e && h.e < h.f) {
            return Err(Error::Internal(format!(
                "heights not ordered for {pair:?}: {h:?}"
            )));
        }
        if worst > 1e-12 * h.f.max(1.0) {
            return Err(Error::Internal(format!(
                "height relations off by {worst} for {pair:?}"
            )));
        }
        Ok(h)
    }

    /// The closed plateau `[A, B]`.
    pub fn plateau(&self) -> Interval {
        Interval::new(self.a, self.b)
    }

    /// Residuals of the eight lamination relations between the heights.
    pub fn chain_residuals(&self, pair: &MatchingPair) -> [f64; 8] {
        let n = pair.n as f64;
        let d = pair.d as f64;
        let di = (pair.d + pair.i) as f64;
        [
            (self.a - n / (di + self.e)).abs(),
            (self.b - n / (di + self.d)).abs(),
            (self.c - n / (di + self.a)).abs(),
            (self.c - n / (di - 1.0 + self.e)).abs(),
            (self.d - n / (d + 1.0 + self.b)).abs(),
            (self.d - n / (d + self.f)).abs(),
            (self.e - n / (d + self.c)).abs(),
            (self.f - n / (d + self.b)).abs(),
        ]
    }
}

/// `B` from the continued-fraction identity `B = N/(d+i + N/(d+1+B))`; agrees
/// with [`PlateauHeights::b`] exactly when `(d, i)` is a matching pair.
pub fn alternative_b(pair: &MatchingPair) -> f64 {
    let n = pair.n as f64;
    let d1 = (pair.d + 1) as f64;
    let di = (pair.d + pair.i) as f64;
    (-(d1 * di) + (d1 * d1 * di * di + 4.0 * n * d1 * di).sqrt()) / (2.0 * di)
}

/// Membership of `alpha` in `X_{N,d,i}` and, when a member, its sub-plateau
/// index `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaClass {
    /// `T(alpha)` is interior to cylinder `d` and `T(alpha + 1)` interior to
    /// cylinder `d + i`, with digit set exactly `{d, ..., d + i}`.
    pub member: bool,
    /// `T^2(alpha)` lies in cylinder `k` and `T^2(alpha + 1)` in `k + 1`.
    pub k: Option<u64>,
    /// Both second iterates are interior to their cylinders.
    pub second_interior: bool,
    /// `alpha` is within `PLATEAU_BOUNDARY_EPS` of `A` or `B`.
    pub boundary: bool,
    /// The closed-form test `A < alpha < B`.
    pub in_plateau: bool,
}

pub fn classify_alpha(pair: &MatchingPair, alpha: f64) -> AlphaClass {
    let h = pair.heights();
    let boundary =
        (alpha - h.a).abs() < PLATEAU_BOUNDARY_EPS || (alpha - h.b).abs() < PLATEAU_BOUNDARY_EPS;
    let in_plateau = !boundary && h.a < alpha && alpha < h.b;
    let mut class = AlphaClass {
        member: false,
        k: None,
        second_interior: false,
        boundary,
        in_plateau,
    };
    if boundary {
        return class;
    }
    let Ok(params) = NExpParams::new(pair.n, alpha) else {
        return class;
    };
    let range = params.digit_range();
    if range.min != pair.d || range.max != pair.top_digit() {
        return class;
    }
    let left = params.step_unchecked(alpha);
    let right = params.step_unchecked(alpha + 1.0);
    let first_ok = params.cylinder_unchecked(pair.d).contains_interior(left.x)
        && params
            .cylinder_unchecked(pair.top_digit())
            .contains_interior(right.x);
    if !first_ok {
        return class;
    }
    class.member = true;
    let left2 = params.step_unchecked(left.x).x;
    let right2 = params.step_unchecked(right.x).x;
    let k = params.digit_unchecked(left2);
    let k_right = params.digit_unchecked(right2);
    if k_right == k + 1 && k < pair.top_digit() {
        class.k = Some(k);
        class.second_interior = params.cylinder_unchecked(k).contains_interior(left2)
            && params.cylinder_unchecked(k + 1).contains_interior(right2);
    }
    class
}

/// `|T^3(alpha) - T^3(alpha + 1)|` from two independent orbits.
pub fn verify_matching(pair: &MatchingPair, alpha: f64) -> Result<f64> {
    let class = classify_alpha(pair, alpha);
    if !class.member {
        return Err(Error::Precondition(format!(
            "alpha = {alpha} is not in X_(N={},d={},i={})",
            pair.n, pair.d, pair.i
        )));
    }
    let params = NExpParams::new(pair.n, alpha)?;
    Ok(three_step_gap(&params, alpha))
}

/// `|T^3(alpha) - T^3(alpha + 1)|` for any parameters, without a membership
/// precondition. The orbits run in double-double arithmetic, since for small
/// `alpha` two of the three steps can each stretch by several thousand.
pub fn three_step_gap(params: &NExpParams, alpha: f64) -> f64 {
    let start = DoubleDouble::from(alpha);
    let l = params
        .iterate_precise(start, 3)
        .expect("alpha is in the domain");
    let r = params
        .iterate_precise(start.add_f64(1.0), 3)
        .expect("alpha + 1 is in the domain");
    (l - r).value().abs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointReport {
    /// `N/A - (d+i) = 1 + A`
    pub a_left: f64,
    /// `N/(A+1) - d = N/(A+d+i)`
    pub a_right: f64,
    /// `N/B - (d+i) = N/(B+d+1)`
    pub b_left: f64,
    /// `N/(B+1) - d = B`
    pub b_right: f64,
}

impl EndpointReport {
    pub fn max(&self) -> f64 {
        self.a_left
            .max(self.a_right)
            .max(self.b_left)
            .max(self.b_right)
    }

    pub fn entries(&self) -> [(&'static str, f64); 4] {
        [
            ("T_A(A) = A + 1", self.a_left),
            ("T_A(A + 1) = N/(A + d + i)", self.a_right),
            ("T_B(B) = N/(B + d + 1)", self.b_left),
            ("T_B(B + 1) = B", self.b_right),
        ]
    }
}

/// Residuals of the orbit identities satisfied by the plateau endpoints.
pub fn endpoint_identities(pair: &MatchingPair) -> EndpointReport {
    let h = pair.heights();
    let n = pair.n as f64;
    let d = pair.d as f64;
    let di = pair.top_digit() as f64;
    let (a, b) = (h.a, h.b);
    EndpointReport {
        a_left: (n / a - di - (1.0 + a)).abs(),
        a_right: (n / (a + 1.0) - d - n / (a + di)).abs(),
        b_left: (n / b - di - n / (b + d + 1.0)).abs(),
        b_right: (n / (b + 1.0) - d - b).abs(),
    }
}

/// One maximal run of the plateau on which the sub-index `k` is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubPlateau {
    pub k: u64,
    pub lo: f64,
    pub hi: f64,
}

/// Splits `(A, B)` into the sets `X_{N,d,i,k}` by scanning `grid` points and
/// bisecting every change of `k` down to `1e-14`.
pub fn sub_plateaux(pair: &MatchingPair, grid: usize) -> Vec<SubPlateau> {
    let h = pair.heights();
    let grid = grid.max(2);
    let eps = 1e-11;
    let (lo, hi) = (h.a + eps, h.b - eps);
    let k_at = |a: f64| classify_alpha(pair, a).k;
    let mut out: Vec<SubPlateau> = Vec::new();
    let mut prev_a = lo;
    let mut prev_k = k_at(lo);
    let mut start = lo;
    for s in 1..=grid {
        let a = lo + (hi - lo) * s as f64 / grid as f64;
        let k = k_at(a);
        if k != prev_k {
            let (mut l, mut r) = (prev_a, a);
            while r - l > 1e-14 {
                let m = 0.5 * (l + r);
                if k_at(m) == prev_k {
                    l = m;
                } else {
                    r = m;
                }
            }
            if let Some(kk) = prev_k {
                out.push(SubPlateau {
                    k: kk,
                    lo: start,
                    hi: l,
                });
            }
            start = r;
            prev_k = k;
        }
        prev_a = a;
    }
    if let Some(kk) = prev_k {
        out.push(SubPlateau {
            k: kk,
            lo: start,
            hi,
        });
    }
    out
}
