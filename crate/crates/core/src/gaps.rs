//! Attractor and gap detection for `T_alpha`.
//!
//! Every branch of `T_alpha` that is full maps its cylinder onto the whole of
//! `[alpha, alpha + 1]`, so the full interval is trivially forward invariant
//! and iterating it forward reveals nothing. The attractor is found from the
//! inside instead: a short interval around a typical orbit point is grown by
//! `S <- S ∪ T(S)` until it stops changing, and the result is then pruned by
//! `S <- T(S)` to shed whatever the seed contributed outside the attractor.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{Interval, NExpParams};

pub const DEFAULT_MAX_ROUNDS: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_PARTS: usize = 10_000;

const SEED_START: f64 = 0.618_033_988_749_894_8;
const SEED_BURN_IN: usize = 5_000;
const SEED_HALF_WIDTH: f64 = 1e-9;

/// Sorted union of disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalUnion {
    parts: Vec<Interval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion { parts: Vec::new() }
    }

    pub fn single(iv: Interval) -> Self {
        IntervalUnion { parts: vec![iv] }
    }

    /// Sorts `parts` and merges any two that overlap or are within `eps`.
    pub fn from_parts(mut parts: Vec<Interval>, eps: f64) -> Self {
        parts.retain(|p| p.hi >= p.lo);
        parts.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(parts.len());
        for p in parts {
            match out.last_mut() {
                Some(last) if p.lo <= last.hi + eps => last.hi = last.hi.max(p.hi),
                _ => out.push(p),
            }
        }
        IntervalUnion { parts: out }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.parts.iter().map(Interval::len).sum()
    }

    pub fn union(&self, other: &IntervalUnion, eps: f64) -> IntervalUnion {
        let parts = self.parts.iter().chain(&other.parts).copied().collect();
        IntervalUnion::from_parts(parts, eps)
    }

    pub fn distance_to(&self, x: f64) -> f64 {
        self.parts
            .iter()
            .map(|p| {
                if x < p.lo {
                    p.lo - x
                } else if x > p.hi {
                    x - p.hi
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `sup_{x in self} dist(x, other)`. On each part of `self` the distance
    /// is piecewise linear, so its maximum sits at an endpoint of the part or
    /// at the midpoint of a hole of `other`.
    fn directed_hausdorff(&self, other: &IntervalUnion) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if other.is_empty() {
            return f64::INFINITY;
        }
        let holes: Vec<f64> = other
            .parts
            .windows(2)
            .map(|w| 0.5 * (w[0].hi + w[1].lo))
            .collect();
        let mut worst: f64 = 0.0;
        for p in &self.parts {
            let candidates = [p.lo, p.hi]
                .into_iter()
                .chain(holes.iter().copied().filter(|&m| p.contains(m)));
            for x in candidates {
                worst = worst.max(other.distance_to(x));
            }
        }
        worst
    }

    pub fn hausdorff(&self, other: &IntervalUnion) -> f64 {
        self.directed_hausdorff(other)
            .max(other.directed_hausdorff(self))
    }

    /// Maximal open intervals of `within` not covered by `self`, ignoring
    /// slivers no longer than `eps`.
    pub fn complement(&self, within: Interval, eps: f64) -> Vec<Interval> {
        let mut out = Vec::new();
        let mut cursor = within.lo;
        for p in &self.parts {
            if p.lo - cursor > eps {
                out.push(Interval::new(cursor, p.lo.min(within.hi)));
            }
            cursor = cursor.max(p.hi);
        }
        if within.hi - cursor > eps {
            out.push(Interval::new(cursor, within.hi));
        }
        out
    }
}

/// `T(S)` as a union of intervals, merged at `eps`.
pub fn forward_image(params: &NExpParams, set: &IntervalUnion, eps: f64) -> IntervalUnion {
    let full = params.interval();
    let n = params.n() as f64;
    let mut images = Vec::new();
    for part in set.parts() {
        let j_hi = params.digit_unchecked(part.lo);
        let j_lo = params.digit_unchecked(part.hi);
        if j_hi >= j_lo + 2 {
            // A whole interior cylinder is covered, and its branch is onto.
            images.push(full);
            continue;
        }
        for j in j_lo..=j_hi {
            let cyl = params.cylinder_unchecked(j);
            let lo = part.lo.max(cyl.lo);
            let hi = part.hi.min(cyl.hi);
            if hi < lo {
                continue;
            }
            let jf = j as f64;
            let a = (n / hi - jf).clamp(full.lo, full.hi);
            let b = (n / lo - jf).clamp(full.lo, full.hi);
            images.push(Interval::new(a, b));
        }
    }
    IntervalUnion::from_parts(images, eps)
}

/// Iterates `step` from `start` until successive sets are within `tol` in
/// Hausdorff distance, counting rounds against `budget`.
fn settle(
    start: IntervalUnion,
    budget: &mut usize,
    max_rounds: usize,
    tol: f64,
    mut step: impl FnMut(&IntervalUnion) -> IntervalUnion,
) -> Result<IntervalUnion> {
    let mut cur = start;
    loop {
        if *budget == 0 {
            return Err(Error::NonConvergence { rounds: max_rounds });
        }
        *budget -= 1;
        let next = step(&cur);
        if next.len() > MAX_PARTS {
            return Err(Error::TooManyParts { limit: MAX_PARTS });
        }
        let change = next.hausdorff(&cur);
        cur = next;
        if change < tol {
            return Ok(cur);
        }
    }
}

/// The attractor of `T_alpha` as a finite union of intervals.
pub fn attractor_iterate(
    params: &NExpParams,
    max_rounds: usize,
    tol: f64,
) -> Result<IntervalUnion> {
    if max_rounds == 0 || tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "need max_rounds >= 1 and tol > 0, got {max_rounds}, {tol}"
        )));
    }
    let full = params.interval();
    let x = params.iterate(params.alpha() + SEED_START, SEED_BURN_IN)?;
    let seed = Interval::new(
        (x - SEED_HALF_WIDTH).max(full.lo),
        (x + SEED_HALF_WIDTH).min(full.hi),
    );

    let mut budget = max_rounds;
    let grown = settle(
        IntervalUnion::single(seed),
        &mut budget,
        max_rounds,
        tol,
        |s| s.union(&forward_image(params, s, tol), tol),
    )?;
    settle(grown, &mut budget, max_rounds, tol, |s| {
        forward_image(params, s, tol)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub attractor: Vec<Interval>,
    pub gaps: Vec<Interval>,
    pub min_abs_derivative: f64,
}

/// Gaps of the attractor with the default round budget and tolerance.
pub fn detect_gaps(params: &NExpParams) -> Result<Vec<Interval>> {
    Ok(gap_report(params, DEFAULT_MAX_ROUNDS, DEFAULT_TOL)?.gaps)
}

pub fn gap_report(params: &NExpParams, max_rounds: usize, tol: f64) -> Result<GapReport> {
    let attractor = attractor_iterate(params, max_rounds, tol)?;
    let gaps = attractor.complement(params.interval(), tol);
    Ok(GapReport {
        attractor: attractor.parts().to_vec(),
        gaps,
        min_abs_derivative: derivative_bound(params),
    })
}

/// `min |T'(x)| = N/(alpha + 1)^2`. Above 2 there are no gaps.
pub fn derivative_bound(params: &NExpParams) -> f64 {
    params.derivative_bound()
}
