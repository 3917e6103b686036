//! The one-dimensional map `T(x) = N/x - d(x)` on `[alpha, alpha + 1]`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Slack used when deciding whether a point is inside `[alpha, alpha + 1]`
/// and when snapping `N/x - alpha` onto an integer digit boundary.
pub const BOUNDARY_EPS: f64 = 1e-12;

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// One application of `T`: the image point and the digit that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitStep {
    pub x: f64,
    pub digit: u64,
}

/// Smallest and largest digit used by `T` on `[alpha, alpha + 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DigitRange {
    pub min: u64,
    pub max: u64,
}

impl DigitRange {
    /// Number of gaps between the extreme digits, i.e. `i` for the digit set
    /// `{d, ..., d + i}`.
    pub fn spread(&self) -> u64 {
        self.max - self.min
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.min..=self.max
    }

    pub fn contains(&self, j: u64) -> bool {
        self.min <= j && j <= self.max
    }
}

/// The pair `(N, alpha)` defining `T_alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NExpParams {
    n: u64,
    alpha: f64,
    digits: DigitRange,
}

impl NExpParams {
    pub fn new(n: u64, alpha: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!(
                "N must be at least 2, got {n}"
            )));
        }
        let upper = (n as f64).sqrt() - 1.0;
        if !alpha.is_finite() || alpha <= 0.0 || alpha > upper + BOUNDARY_EPS {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in (0, sqrt(N) - 1] = (0, {upper}], got {alpha}"
            )));
        }
        let nf = n as f64;
        let min = floor_digit(nf / (alpha + 1.0) - alpha).max(1);
        let max = floor_digit(nf / alpha - alpha).max(min);
        Ok(NExpParams {
            n,
            alpha,
            digits: DigitRange { min, max },
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.alpha, self.alpha + 1.0)
    }

    pub fn digit_range(&self) -> DigitRange {
        self.digits
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let (lo, hi) = (self.alpha, self.alpha + 1.0);
        if x.is_nan() || x < lo - BOUNDARY_EPS || x > hi + BOUNDARY_EPS {
            return Err(Error::Domain { x, lo, hi });
        }
        Ok(())
    }

    /// `floor(N/x - alpha)`, with the cylinder boundary `N/(alpha + 1 + d)`
    /// assigned to digit `d + 1`.
    pub fn digit(&self, x: f64) -> Result<u64> {
        self.check_domain(x)?;
        Ok(self.digit_unchecked(x))
    }

    #[inline]
    pub(crate) fn digit_unchecked(&self, x: f64) -> u64 {
        let raw = floor_digit(self.n as f64 / x - self.alpha);
        raw.clamp(self.digits.min, self.digits.max)
    }

    /// `T(x)` together with the digit used.
    pub fn step(&self, x: f64) -> Result<OrbitStep> {
        self.check_domain(x)?;
        Ok(self.step_unchecked(x))
    }

    #[inline]
    pub(crate) fn step_unchecked(&self, x: f64) -> OrbitStep {
        let digit = self.digit_unchecked(x);
        let y = self.n as f64 / x - digit as f64;
        // Snapped boundary digits can leave the image a rounding error below alpha.
        OrbitStep {
            x: y.max(self.alpha),
            digit,
        }
    }

    /// The first `len` steps of the orbit of `x`; `steps[k].x` is `T^(k+1)(x)`.
    pub fn orbit(&self, x: f64, len: usize) -> Result<Vec<OrbitStep>> {
        let mut out = Vec::with_capacity(len);
        let mut cur = x;
        for _ in 0..len {
            let s = self.step(cur)?;
            cur = s.x;
            out.push(s);
        }
        Ok(out)
    }

    /// `T^k(x)`.
    pub fn iterate(&self, x: f64, k: usize) -> Result<f64> {
        self.check_domain(x)?;
        let mut cur = x;
        for _ in 0..k {
            cur = self.step_unchecked(cur).x;
        }
        Ok(cur)
    }

    /// `T^k(x)` evaluated in double-double arithmetic, with digits chosen by
    /// the same snapping rule as [`NExpParams::digit`]. Near small `x` the
    /// map stretches by `N/x^2`, and this keeps a few thousand-fold
    /// stretches per step from eating the whole `f64` mantissa. Start points
    /// such as `alpha + 1` should be formed with [`DoubleDouble::add_f64`] so
    /// that they are exact.
    pub fn iterate_precise(&self, x: DoubleDouble, k: usize) -> Result<DoubleDouble> {
        self.check_domain(x.hi)?;
        let n = self.n as f64;
        let alpha = DoubleDouble::from(self.alpha);
        let mut cur = x;
        for _ in 0..k {
            let q = DoubleDouble::div_f64_by(n, cur);
            let digit = floor_digit((q - alpha).value()).clamp(self.digits.min, self.digits.max);
            cur = q.add_f64(-(digit as f64));
            if (cur - alpha).value() < 0.0 {
                cur = alpha;
            }
        }
        Ok(cur)
    }

    /// The cylinder `{x : d(x) = j}` as a closed interval. All cylinders are
    /// half-open `(N/(alpha+1+j), N/(alpha+j)]` except the largest digit's,
    /// which is clipped to start at `alpha`.
    pub fn cylinder(&self, j: u64) -> Result<Interval> {
        if !self.digits.contains(j) {
            return Err(Error::InvalidDigit {
                digit: j,
                min: self.digits.min,
                max: self.digits.max,
            });
        }
        Ok(self.cylinder_unchecked(j))
    }

    pub(crate) fn cylinder_unchecked(&self, j: u64) -> Interval {
        let nf = self.n as f64;
        let jf = j as f64;
        let lo = if j == self.digits.max {
            self.alpha
        } else {
            nf / (self.alpha + (jf + 1.0))
        };
        let hi = if j == self.digits.min {
            self.alpha + 1.0
        } else {
            nf / (self.alpha + jf)
        };
        Interval::new(lo.max(self.alpha), hi.min(self.alpha + 1.0))
    }

    /// `N / (y + j)`, the pre-image of `y` on branch `j`. Whether it actually
    /// lies in cylinder `j` is for the caller to check.
    pub fn branch_inverse(&self, j: u64, y: f64) -> f64 {
        self.n as f64 / (y + j as f64)
    }

    /// `min |T'(x)| = N / (alpha + 1)^2`.
    pub fn derivative_bound(&self) -> f64 {
        let r = self.alpha + 1.0;
        self.n as f64 / (r * r)
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, about 32 significant
/// digits. Only the operations the orbit evaluation needs are provided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl DoubleDouble {
    /// Nearest `f64`.
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add_f64(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        DoubleDouble { hi, lo }
    }

    /// `n / x`, by one Newton-style correction of the `f64` quotient.
    pub fn div_f64_by(n: f64, x: Self) -> Self {
        let q1 = n / x.hi;
        // n - q1 * x, with the product's rounding error recovered by an fma
        let p = q1 * x.hi;
        let p_err = q1.mul_add(x.hi, -p);
        let r = ((n - p) - p_err) - q1 * x.lo;
        let (hi, lo) = quick_two_sum(q1, r / x.hi);
        DoubleDouble { hi, lo }
    }
}

impl std::ops::Add for DoubleDouble {
    type Output = Self;

    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }
}

impl std::ops::Sub for DoubleDouble {
    type Output = Self;

    fn sub(self, b: Self) -> Self {
        self + DoubleDouble {
            hi: -b.hi,
            lo: -b.lo,
        }
    }
}

/// Floor of `t`, snapping values within a relative `BOUNDARY_EPS` below an
/// integer up to that integer.
#[inline]
fn floor_digit(t: f64) -> u64 {
    let r = t.round();
    let f = if (t - r).abs() <= BOUNDARY_EPS * r.abs().max(1.0) {
        r
    } else {
        t.floor()
    };
    if f < 1.0 {
        1
    } else {
        f as u64
    }
}

/// The fixed point `(sqrt(4N + i^2) - i) / 2` of the branch with digit `i`.
pub fn fixed_point(n: u64, i: u64) -> f64 {
    let (nf, i) = (n as f64, i as f64);
    ((4.0 * nf + i * i).sqrt() - i) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64, alpha: f64) -> NExpParams {
        NExpParams::new(n, alpha).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(NExpParams::new(1, 0.1).is_err());
        assert!(NExpParams::new(2, 0.0).is_err());
        assert!(NExpParams::new(2, -0.1).is_err());
        assert!(NExpParams::new(2, 0.5).is_err());
        assert!(NExpParams::new(2, f64::NAN).is_err());
        assert!(NExpParams::new(2, 2f64.sqrt() - 1.0).is_ok());
    }

    #[test]
    fn digit_examples() {
        let b = 2f64.sqrt() - 1.0;
        assert_eq!(p(2, b).digit(b).unwrap(), 4);
        assert_eq!(p(2, 0.39).digit(1.39).unwrap(), 1);
        assert_eq!(p(51, 6.0).digit(6.0).unwrap(), 2);
        assert!(matches!(p(2, 0.39).digit(0.2), Err(Error::Domain { .. })));
        assert!(p(2, 0.39).digit(1.5).is_err());
    }

    #[test]
    fn step_examples() {
        let s = p(2, 0.39).step(0.39).unwrap();
        assert_eq!(s.digit, 4);
        assert!((s.x - (2.0 / 0.39 - 4.0)).abs() < 1e-15);
        assert!((s.x - 1.128205128205128).abs() < 1e-12);

        let b = 2f64.sqrt() - 1.0;
        let s = p(2, b).step(2f64.sqrt()).unwrap();
        assert_eq!(s.digit, 1);
        assert!((s.x - b).abs() < 1e-15);

        let s = p(51, 6.0).step(7.0).unwrap();
        assert_eq!(s.digit, 1);
        assert!((s.x - (51.0 / 7.0 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn orbit_examples() {
        let params = p(2, 0.39);
        // 0.39 -> 1.128205 -> 0.772727 -> 0.588235
        let o = params.orbit(0.39, 3).unwrap();
        assert_eq!(o.iter().map(|s| s.digit).collect::<Vec<_>>(), vec![4, 1, 2]);
        let x1 = 2.0 / 0.39 - 4.0;
        let x2 = 2.0 / x1 - 1.0;
        let x3 = 2.0 / x2 - 2.0;
        assert!((o[2].x - x3).abs() < 1e-14);
        assert!((o[2].x - 0.588235294117647).abs() < 1e-9);

        let o2 = params.orbit(1.39, 3).unwrap();
        assert_eq!(
            o2.iter().map(|s| s.digit).collect::<Vec<_>>(),
            vec![1, 4, 3]
        );
        assert!((o2[2].x - o[2].x).abs() < 1e-12);

        assert!(params.orbit(0.7, 0).unwrap().is_empty());
    }

    #[test]
    fn digit_range_examples() {
        assert_eq!(p(2, 0.40).digit_range(), DigitRange { min: 1, max: 4 });
        assert_eq!(p(51, 6.0).digit_range(), DigitRange { min: 1, max: 2 });
        assert_eq!(p(2, 0.39).digit_range(), DigitRange { min: 1, max: 4 });
    }

    #[test]
    fn smallest_digit_tends_to_n_minus_one() {
        for n in 2..40 {
            assert_eq!(p(n, 1e-6).digit_range().min, n - 1, "N = {n}");
        }
    }

    #[test]
    fn cylinder_examples() {
        let params = p(2, 0.39);
        let c1 = params.cylinder(1).unwrap();
        assert!((c1.lo - 2.0 / 2.39).abs() < 1e-15);
        assert!((c1.lo - 0.836820083682008).abs() < 1e-12);
        assert_eq!(c1.hi, 0.39 + 1.0);
        let c4 = params.cylinder(4).unwrap();
        assert_eq!(c4.lo, 0.39);
        assert!((c4.hi - 2.0 / 4.39).abs() < 1e-15);
        assert!((c4.hi - 0.455580865603645).abs() < 1e-12);
        assert!(matches!(
            params.cylinder(5),
            Err(Error::InvalidDigit { .. })
        ));
        assert!(params.cylinder(0).is_err());
    }

    #[test]
    fn cylinders_partition_the_interval() {
        for &(n, alpha) in &[(2, 0.39), (8, 0.69), (51, 6.0), (20, 0.3)] {
            let params = p(n, alpha);
            let r = params.digit_range();
            let mut total = 0.0;
            for j in r.iter() {
                let c = params.cylinder(j).unwrap();
                total += c.len();
                if j > r.min {
                    // right end of cylinder j equals left end of cylinder j - 1
                    assert_eq!(c.hi, params.cylinder(j - 1).unwrap().lo);
                }
            }
            assert!((total - 1.0).abs() < 1e-12);
            assert_eq!(params.cylinder(r.max).unwrap().lo, alpha);
            assert_eq!(params.cylinder(r.min).unwrap().hi, alpha + 1.0);
        }
    }

    #[test]
    fn boundary_points_take_the_larger_digit() {
        for &(n, alpha) in &[(2, 0.39), (8, 0.69), (3, 0.3), (20, 1.1)] {
            let params = p(n, alpha);
            let r = params.digit_range();
            for j in r.min..r.max {
                let x = params.cylinder(j).unwrap().lo;
                assert_eq!(params.digit(x).unwrap(), j + 1, "N={n} alpha={alpha} j={j}");
            }
        }
    }

    #[test]
    fn branch_inverse_examples() {
        let params = p(2, 0.39);
        assert!((params.branch_inverse(4, 2.0 / 0.39 - 4.0) - 0.39).abs() < 1e-15);
        assert!((p(51, 6.0).branch_inverse(1, 6.5) - 6.8).abs() < 1e-15);
        for x in [0.5, 0.7, 0.9, 1.2] {
            let s = params.step(x).unwrap();
            assert!((params.branch_inverse(s.digit, s.x) - x).abs() < 1e-14);
        }
    }

    #[test]
    fn double_double_division() {
        let q = DoubleDouble::div_f64_by(1.0, DoubleDouble::from(3.0));
        // 1/3 - fl(1/3) = 1/(3 * 2^54)
        assert_eq!(q.hi, 1.0 / 3.0);
        assert!((q.lo - 1.0 / (3.0 * 2f64.powi(54))).abs() < 1e-32);
        let x = DoubleDouble::from(0.1).add_f64(1.0);
        assert_eq!((x - DoubleDouble::from(1.0)).value(), 0.1);
    }

    #[test]
    fn precise_orbit_agrees_with_plain_orbit() {
        let params = p(8, 0.69);
        for x in [0.7, 1.1, 1.6] {
            let a = params.iterate(x, 3).unwrap();
            let b = params
                .iterate_precise(DoubleDouble::from(x), 3)
                .unwrap()
                .value();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_point_examples() {
        assert!((fixed_point(51, 1) - 6.658910531638177).abs() < 1e-12);
        assert!((fixed_point(51, 2) - 6.211103).abs() < 1e-6);
        assert_eq!(fixed_point(2, 1), 1.0);
        for (n, i) in [(51, 1), (51, 2), (7, 3), (100, 9)] {
            let f = fixed_point(n, i);
            assert!((n as f64 / f - i as f64 - f).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_bound_examples() {
        assert!((p(2, 0.39).derivative_bound() - 2.0 / (1.39 * 1.39)).abs() < 1e-15);
        assert!((p(51, 6.0).derivative_bound() - 51.0 / 49.0).abs() < 1e-15);
        assert_eq!(p(9, 0.5).derivative_bound(), 4.0);
    }
}
