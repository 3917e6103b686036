//! The planar natural extension `(Omega_alpha, T_alpha)` for `alpha` in a
//! closed plateau `[A, B]`.
//!
//! `Omega_alpha` is a rectilinear 12-gon whose heights are the
//! [`PlateauHeights`] and whose vertical steps sit at the first two iterates
//! of `alpha` and `alpha + 1`. The map is
//! `T(x, y) = (T_alpha(x), N / (d(x) + y))`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{Interval, NExpParams};
use crate::matching::{MatchingPair, PlateauHeights};
use crate::rng::{mix_seed, stream};

/// Distance to a boundary below which Monte Carlo membership is undecided.
pub const MEMBERSHIP_EPS: f64 = 1e-9;

const SLACK: f64 = 1e-12;
const SHARDS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// The x-coordinates at which the boundary of `Omega_alpha` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XMarks {
    pub alpha: f64,
    pub alpha_plus_one: f64,
    /// `T(alpha)`, via digit `d + i`.
    pub t_alpha: f64,
    /// `T(alpha + 1)`, via digit `d`.
    pub t_alpha1: f64,
    /// `T^2(alpha)`, via digit `d`.
    pub t2_alpha: f64,
    /// `T^2(alpha + 1)`, via digit `d + i`.
    pub t2_alpha1: f64,
}

impl XMarks {
    /// Iterates along the fixed branches `d + i, d` for `alpha` and
    /// `d, d + i` for `alpha + 1`. Inside the plateau these are the actual
    /// digits; at the endpoints they give the one-sided limits that make the
    /// polygon degenerate into the one-notch shapes.
    pub fn for_alpha(pair: &MatchingPair, alpha: f64) -> Self {
        let n = pair.n() as f64;
        let d = pair.d() as f64;
        let top = pair.top_digit() as f64;
        let t_alpha = n / alpha - top;
        let t_alpha1 = n / (alpha + 1.0) - d;
        XMarks {
            alpha,
            alpha_plus_one: alpha + 1.0,
            t_alpha,
            t_alpha1,
            t2_alpha: n / t_alpha - d,
            t2_alpha1: n / t_alpha1 - top,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.alpha,
            self.alpha_plus_one,
            self.t_alpha,
            self.t_alpha1,
            self.t2_alpha,
            self.t2_alpha1,
        ]
    }
}

/// Where a point sits relative to a set, up to [`MEMBERSHIP_EPS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NatExtDomain {
    pair: MatchingPair,
    params: NExpParams,
    heights: PlateauHeights,
    marks: XMarks,
}

/// Builds `Omega_alpha` for `alpha` in the closed plateau `[A, B]`.
pub fn build_domain(pair: &MatchingPair, alpha: f64) -> Result<NatExtDomain> {
    let heights = pair.heights();
    if !(alpha >= heights.a - SLACK && alpha <= heights.b + SLACK) {
        return Err(Error::Classification {
            alpha,
            lo: heights.a,
            hi: heights.b,
        });
    }
    let params = NExpParams::new(pair.n(), alpha)?;
    let marks = XMarks::for_alpha(pair, alpha);
    let dom = NatExtDomain {
        pair: *pair,
        params,
        heights,
        marks,
    };
    dom.validate()?;
    Ok(dom)
}

impl NatExtDomain {
    fn validate(&self) -> Result<()> {
        let m = &self.marks;
        let tol = 1e-10;
        for x in m.as_array() {
            if x < m.alpha - tol || x > m.alpha_plus_one + tol {
                return Err(Error::Internal(format!(
                    "x-mark {x} outside [{}, {}]",
                    m.alpha, m.alpha_plus_one
                )));
            }
        }
        if m.t2_alpha1 > m.t_alpha + tol || m.t_alpha1 > m.t2_alpha + tol {
            return Err(Error::Internal(format!("x-marks out of order: {m:?}")));
        }
        Ok(())
    }

    pub fn pair(&self) -> &MatchingPair {
        &self.pair
    }

    pub fn params(&self) -> &NExpParams {
        &self.params
    }

    pub fn heights(&self) -> &PlateauHeights {
        &self.heights
    }

    pub fn marks(&self) -> &XMarks {
        &self.marks
    }

    pub fn alpha(&self) -> f64 {
        self.marks.alpha
    }

    /// The same polygon outline with different heights. No lamination
    /// relations are checked; used for negative controls.
    pub fn with_heights(&self, heights: PlateauHeights) -> NatExtDomain {
        NatExtDomain {
            heights,
            ..self.clone()
        }
    }

    /// Vertices in clockwise order starting at `(alpha, A)`.
    pub fn vertices(&self) -> [Point; 12] {
        let m = &self.marks;
        let h = &self.heights;
        [
            Point::new(m.alpha, h.a),
            Point::new(m.t2_alpha1, h.a),
            Point::new(m.t2_alpha1, h.b),
            Point::new(m.t_alpha, h.b),
            Point::new(m.t_alpha, h.c),
            Point::new(m.alpha_plus_one, h.c),
            Point::new(m.alpha_plus_one, h.f),
            Point::new(m.t2_alpha, h.f),
            Point::new(m.t2_alpha, h.e),
            Point::new(m.t_alpha1, h.e),
            Point::new(m.t_alpha1, h.d),
            Point::new(m.alpha, h.d),
        ]
    }

    /// Plain-text vertex list, one `x y` pair per line.
    pub fn vertex_text(&self) -> String {
        self.vertices()
            .iter()
            .map(|p| format!("{} {}\n", p.x, p.y))
            .collect()
    }

    /// Bounding box `[alpha, alpha + 1] x [A, F]`.
    pub fn bounding_box(&self) -> (Interval, Interval) {
        (
            self.params.interval(),
            Interval::new(self.heights.a, self.heights.f),
        )
    }

    /// Bottom of the closed fiber over `x`.
    pub fn lower(&self, x: f64) -> f64 {
        let (m, h) = (&self.marks, &self.heights);
        if x <= m.t2_alpha1 {
            h.a
        } else if x <= m.t_alpha {
            h.b
        } else {
            h.c
        }
    }

    /// Top of the closed fiber over `x`.
    pub fn upper(&self, x: f64) -> f64 {
        let (m, h) = (&self.marks, &self.heights);
        if x < m.t_alpha1 {
            h.d
        } else if x < m.t2_alpha {
            h.e
        } else {
            h.f
        }
    }

    /// The vertical section `{y : (x, y) in Omega}`.
    pub fn fiber(&self, x: f64) -> Option<Interval> {
        if self.params.interval().contains(x) {
            Some(Interval::new(self.lower(x), self.upper(x)))
        } else {
            None
        }
    }

    /// Containment via the fiber step functions, boundary included.
    pub fn contains_fast(&self, p: Point) -> bool {
        self.fiber(p.x).is_some_and(|f| f.contains(p.y))
    }

    /// Point-in-polygon test on the vertex list, boundary included.
    pub fn contains(&self, p: Point) -> bool {
        let v = self.vertices();
        let on_edge = (0..12).any(|k| on_axis_segment(v[k], v[(k + 1) % 12], p));
        if on_edge {
            return true;
        }
        let mut inside = false;
        for k in 0..12 {
            let (a, b) = (v[k], v[(k + 1) % 12]);
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// x-range of the strip `Theta_j`, i.e. the cylinder of digit `j`.
    pub fn strip(&self, j: u64) -> Result<Interval> {
        self.params.cylinder(j)
    }

    /// The forward map `(T(x), N / (d(x) + y))`.
    pub fn step(&self, p: Point) -> Result<Point> {
        if p.y < 0.0 {
            return Err(Error::InvalidParams(format!(
                "y must be non-negative, got {}",
                p.y
            )));
        }
        let s = self.params.step(p.x)?;
        Ok(Point::new(
            s.x,
            self.params.n() as f64 / (s.digit as f64 + p.y),
        ))
    }

    /// The inverse branch with digit `j`: `(N/(x + j), N/y - j)`.
    pub fn inverse(&self, j: u64, p: Point) -> Result<Point> {
        let n = self.params.n() as f64;
        let y_prev = n / p.y - j as f64;
        if y_prev.is_nan() || y_prev < 0.0 {
            return Err(Error::InvalidBranch { digit: j, y: p.y });
        }
        Ok(Point::new(n / (p.x + j as f64), y_prev))
    }

    /// Position of `q` relative to `Theta_j`.
    pub fn strip_membership(&self, j: u64, q: Point, eps: f64) -> Membership {
        let cyl = self.params.cylinder_unchecked(j);
        let x_state = interval_membership(cyl, q.x, eps);
        if x_state == Membership::Outside {
            return Membership::Outside;
        }
        let full = self.params.interval();
        if interval_membership(full, q.x, eps) == Membership::Outside {
            return Membership::Outside;
        }
        let m = &self.marks;
        let near_step = [m.t_alpha, m.t_alpha1, m.t2_alpha, m.t2_alpha1]
            .iter()
            .any(|s| (q.x - s).abs() < eps);
        let xc = q.x.clamp(full.lo, full.hi);
        let y_state = interval_membership(Interval::new(self.lower(xc), self.upper(xc)), q.y, eps);
        match (x_state, y_state) {
            (_, Membership::Outside) if !near_step => Membership::Outside,
            (Membership::Inside, Membership::Inside) if !near_step => Membership::Inside,
            _ => Membership::Boundary,
        }
    }

    /// Uniform point of `Omega_alpha` by rejection from the bounding box.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        let (bx, by) = self.bounding_box();
        loop {
            let p = Point::new(
                bx.lo + bx.len() * rng.gen::<f64>(),
                by.lo + by.len() * rng.gen::<f64>(),
            );
            if self.contains_fast(p) {
                return p;
            }
        }
    }

    /// Breakpoints of the fiber step functions, sorted, including both ends.
    pub fn x_breakpoints(&self) -> Vec<f64> {
        let mut v = self.marks.as_array().to_vec();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `∫∫_Omega N / (N + xy)^2 dx dy` in closed form; equals `1/H`.
    pub fn invariant_mass(&self) -> f64 {
        let n = self.params.n() as f64;
        let xs = self.x_breakpoints();
        xs.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let (lo, hi) = (self.lower(mid), self.upper(mid));
                ((n + w[1] * hi) / (n + w[0] * hi)).ln() - ((n + w[1] * lo) / (n + w[0] * lo)).ln()
            })
            .sum()
    }
}

fn on_axis_segment(a: Point, b: Point, p: Point) -> bool {
    let tol = 1e-12;
    let (x0, x1) = (a.x.min(b.x), a.x.max(b.x));
    let (y0, y1) = (a.y.min(b.y), a.y.max(b.y));
    p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol
}

fn interval_membership(iv: Interval, v: f64, eps: f64) -> Membership {
    if v > iv.lo + eps && v < iv.hi - eps {
        Membership::Inside
    } else if v < iv.lo - eps || v > iv.hi + eps {
        Membership::Outside
    } else {
        Membership::Boundary
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LaminationReport {
    pub samples: u64,
    /// Samples with a number of interior pre-images other than one.
    pub violations: u64,
    /// Samples with a pre-image within `MEMBERSHIP_EPS` of a strip boundary.
    pub excluded: u64,
    /// Largest number of interior pre-images seen for one sample.
    pub max_overlap: u64,
}

impl LaminationReport {
    fn merge(self, other: Self) -> Self {
        LaminationReport {
            samples: self.samples + other.samples,
            violations: self.violations + other.violations,
            excluded: self.excluded + other.excluded,
            max_overlap: self.max_overlap.max(other.max_overlap),
        }
    }

    pub fn excluded_fraction(&self) -> f64 {
        self.excluded as f64 / self.samples.max(1) as f64
    }
}

/// Monte Carlo check that the images `T(Theta_j)` tile `Omega_alpha`: every
/// sampled point should have exactly one pre-image in exactly one strip.
///
/// Samples are split into a fixed number of shards with derived seeds, so the
/// report is identical for any thread count.
pub fn check_lamination(domain: &NatExtDomain, sample_count: u64, seed: u64) -> LaminationReport {
    let per = sample_count / SHARDS;
    let extra = sample_count % SHARDS;
    (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let count = per + u64::from(s < extra);
            lamination_shard(domain, count, mix_seed(seed, s))
        })
        .reduce(
            || LaminationReport {
                samples: 0,
                violations: 0,
                excluded: 0,
                max_overlap: 0,
            },
            LaminationReport::merge,
        )
}

fn lamination_shard(domain: &NatExtDomain, count: u64, seed: u64) -> LaminationReport {
    let mut rng = stream(seed);
    let n = domain.params.n() as f64;
    let digits = domain.params.digit_range();
    let (_, ybox) = domain.bounding_box();
    let mut report = LaminationReport {
        samples: count,
        violations: 0,
        excluded: 0,
        max_overlap: 0,
    };
    for _ in 0..count {
        let p = domain.sample(&mut rng);
        // Only digits with N/y - j near [lo(A), hi(F)] can land back in Omega.
        let lo_j = (n / p.y - ybox.hi - 1.0).floor().max(digits.min as f64) as u64;
        let hi_j = (n / p.y - ybox.lo + 1.0).ceil().min(digits.max as f64) as u64;
        let mut inside = 0;
        let mut ambiguous = false;
        for j in lo_j..=hi_j {
            let Ok(q) = domain.inverse(j, p) else {
                continue;
            };
            match domain.strip_membership(j, q, MEMBERSHIP_EPS) {
                Membership::Inside => inside += 1,
                Membership::Boundary => ambiguous = true,
                Membership::Outside => {}
            }
        }
        if ambiguous {
            report.excluded += 1;
            continue;
        }
        if inside != 1 {
            report.violations += 1;
        }
        report.max_overlap = report.max_overlap.max(inside);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::classify_alpha;

    fn n2() -> MatchingPair {
        MatchingPair::new(2, 1, 3).unwrap()
    }

    #[test]
    fn n2_marks_follow_the_orbits() {
        let dom = build_domain(&n2(), 0.39).unwrap();
        let m = dom.marks();
        let params = NExpParams::new(2, 0.39).unwrap();
        let l = params.orbit(0.39, 2).unwrap();
        let r = params.orbit(1.39, 2).unwrap();
        assert!((m.t_alpha - l[0].x).abs() < 1e-14);
        assert!((m.t2_alpha - l[1].x).abs() < 1e-14);
        assert!((m.t_alpha1 - r[0].x).abs() < 1e-14);
        assert!((m.t2_alpha1 - r[1].x).abs() < 1e-14);
        assert!((m.t_alpha - 1.128205128).abs() < 1e-8);
        assert!((m.t_alpha1 - 0.438848921).abs() < 1e-8);
        assert!((m.t2_alpha - 0.772727273).abs() < 1e-8);
        assert!((m.t2_alpha1 - 0.557377049).abs() < 1e-8);
    }

    #[test]
    fn vertex_order() {
        let dom = build_domain(&n2(), 0.39).unwrap();
        let v = dom.vertices();
        let h = dom.heights();
        assert_eq!(v[0], Point::new(0.39, h.a));
        assert_eq!(v[5], Point::new(0.39 + 1.0, h.c));
        assert_eq!(v[6], Point::new(0.39 + 1.0, h.f));
        assert_eq!(v[11], Point::new(0.39, h.d));
        for k in 0..12 {
            let (a, b) = (v[k], v[(k + 1) % 12]);
            assert!(a.x == b.x || a.y == b.y, "edge {k} is not axis-parallel");
        }
        assert_eq!(dom.vertex_text().lines().count(), 12);
    }

    #[test]
    fn endpoint_shapes() {
        let p = n2();
        let h = p.heights();
        // alpha = B: T_B(B) = N/(B+d+1) = D and the right-most cylinder is full.
        let dom = build_domain(&p, h.b).unwrap();
        let m = dom.marks();
        assert!((m.t_alpha - h.d).abs() < 1e-12);
        assert!((m.t_alpha1 - h.b).abs() < 1e-12);
        assert!((m.t2_alpha - (h.b + 1.0)).abs() < 1e-12);
        assert!((m.t2_alpha1 - m.t_alpha).abs() < 1e-12);
        // alpha = A: T_A(A) = A + 1 and the left-most cylinder is full.
        let dom = build_domain(&p, h.a).unwrap();
        let m = dom.marks();
        assert!((m.t_alpha - (h.a + 1.0)).abs() < 1e-12);
        assert!((m.t2_alpha1 - h.a).abs() < 1e-12);
        assert!((m.t2_alpha - m.t_alpha1).abs() < 1e-12);

        assert!(matches!(
            build_domain(&p, 0.36),
            Err(Error::Classification { .. })
        ));
        assert!(build_domain(&p, 0.415).is_err());
    }

    #[test]
    fn step_examples() {
        let dom = build_domain(&n2(), 0.39).unwrap();
        let h = *dom.heights();
        let q = dom.step(Point::new(0.39, h.a)).unwrap();
        assert!((q.x - (2.0 / 0.39 - 4.0)).abs() < 1e-14);
        assert!((q.y - 2.0 / (4.0 + h.a)).abs() < 1e-15);
        assert!((q.y - h.c).abs() < 1e-12);

        let q2 = dom.step(Point::new(1.39, h.b)).unwrap();
        assert!((q2.x - 0.438848920863309).abs() < 1e-12);
        assert!((q2.y - h.f).abs() < 1e-12);

        // second coordinate fixes f_j with digit j
        for j in 1..=4 {
            let f = crate::map::fixed_point(2, j);
            assert!((2.0 / (j as f64 + f) - f).abs() < 1e-15);
        }
        assert!(dom.step(Point::new(0.2, 0.5)).is_err());
    }

    #[test]
    fn inverse_examples() {
        let dom = build_domain(&n2(), 0.39).unwrap();
        let h = *dom.heights();
        let p = Point::new(0.39, h.a);
        let q = dom.step(p).unwrap();
        let back = dom.inverse(4, q).unwrap();
        assert!((back.x - p.x).abs() < 1e-14 && (back.y - p.y).abs() < 1e-14);

        let back = dom.inverse(1, Point::new(2.0 / 1.39 - 1.0, h.f)).unwrap();
        assert!((back.x - 1.39).abs() < 1e-14);
        assert!((back.y - h.b).abs() < 1e-14);

        assert!(dom.inverse(4, Point::new(1.0, 0.45)).is_ok());
        assert!(matches!(
            dom.inverse(4, Point::new(1.0, 0.6)),
            Err(Error::InvalidBranch { .. })
        ));
    }

    #[test]
    fn containment_examples() {
        let dom = build_domain(&n2(), 0.39).unwrap();
        let h = *dom.heights();
        let m = *dom.marks();
        let (bx, by) = dom.bounding_box();
        let center = Point::new(bx.mid(), by.mid());
        assert!(dom.contains(center) && dom.contains_fast(center));
        let left = Point::new(0.39 - 1e-6, 0.5 * (h.a + h.d));
        assert!(!dom.contains(left) && !dom.contains_fast(left));
        assert_eq!(classify_alpha(&n2(), 0.39).k, Some(2));
        let notch = Point::new(m.t_alpha1 - 1e-6, 0.5 * (h.d + h.e));
        assert!(!dom.contains(notch) && !dom.contains_fast(notch));
        for v in dom.vertices() {
            assert!(dom.contains(v));
        }
    }

    #[test]
    fn polygon_and_fiber_containment_agree() {
        let dom = build_domain(&MatchingPair::new(8, 4, 6).unwrap(), 0.69).unwrap();
        let (bx, by) = dom.bounding_box();
        let mut rng = stream(3);
        for _ in 0..20_000 {
            let p = Point::new(
                bx.lo - 0.05 + (bx.len() + 0.1) * rng.gen::<f64>(),
                by.lo - 0.05 + (by.len() + 0.1) * rng.gen::<f64>(),
            );
            assert_eq!(dom.contains(p), dom.contains_fast(p), "{p:?}");
        }
    }

    #[test]
    fn mass_is_inverse_normalizing_constant() {
        for (n, d, i) in [(2, 1, 3), (8, 2, 2), (8, 7, 57), (3, 1, 2)] {
            let p = MatchingPair::new(n, d, i).unwrap();
            let h = p.heights();
            let h_inv = 2.0 * h.a.ln() + 2.0 * (h.b + 1.0).ln()
                - (n as f64 - (h.a + 1.0) * d as f64).ln()
                - (n as f64 - (d + i) as f64 * h.b).ln();
            for t in [0.0, 0.3, 0.7, 1.0] {
                let dom = build_domain(&p, h.a + t * (h.b - h.a)).unwrap();
                assert!(
                    (dom.invariant_mass() - h_inv).abs() < 1e-12,
                    "({n},{d},{i}) t={t}"
                );
            }
        }
    }

    #[test]
    fn lamination_passes_and_negative_control_fails() {
        let dom = build_domain(&n2(), 0.39).unwrap();
        let r = check_lamination(&dom, 100_000, 1);
        assert_eq!(r.samples, 100_000);
        assert_eq!(r.violations, 0, "{r:?}");
        assert_eq!(r.max_overlap, 1);
        assert!(r.excluded_fraction() < 1e-3);

        let mut h = *dom.heights();
        h.e += 0.01;
        let bad = check_lamination(&dom.with_heights(h), 100_000, 1);
        assert!(bad.violations > 0, "{bad:?}");
    }

    #[test]
    fn lamination_is_reproducible() {
        let dom = build_domain(&n2(), 0.40).unwrap();
        assert_eq!(
            check_lamination(&dom, 10_000, 9),
            check_lamination(&dom, 10_000, 9)
        );
    }
}
