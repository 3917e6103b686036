//! Quilting: a measure-preserving bijection `Omega_beta -> Omega_alpha` for
//! two parameters `alpha < beta` of the same sub-plateau `X_{N,d,i,k}`.
//!
//! The patches are
//!
//! ```text
//! A0 = [alpha, beta] x [A, D]           D0 = [alpha+1, beta+1] x [C, F]
//! A1 = T_alpha(A0), A2 = T_alpha(A1)    D1 = T_beta(D0), D2 = T_beta(D1)
//! ```
//!
//! and matching gives `T_alpha(A2) = T_beta(D2)`. The quilting map is the
//! identity off `D0 ∪ D1 ∪ D2` and `T_alpha^-(l+1) ∘ T_beta^(l+1)` on `D_l`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matching::{classify_alpha, MatchingPair, PlateauHeights};
use crate::natext::{build_domain, NatExtDomain, Point};
use crate::rng::stream;

/// Axis-aligned closed rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn contains(&self, p: Point) -> bool {
        self.x0 <= p.x && p.x <= self.x1 && self.y0 <= p.y && p.y <= self.y1
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x0, self.y0),
            Point::new(self.x1, self.y0),
            Point::new(self.x1, self.y1),
            Point::new(self.x0, self.y1),
        ]
    }

    /// `∫∫ N/(N + xy)^2` over the rectangle, from the antiderivative
    /// `log(N + x y1) - log(N + x y0)` in `x`.
    pub fn invariant_mass(&self, n: f64) -> f64 {
        let g = |x: f64| ((n + x * self.y1) / (n + x * self.y0)).ln();
        g(self.x1) - g(self.x0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuiltPatches {
    pub a: [Rect; 3],
    pub d: [Rect; 3],
}

/// Everything needed to evaluate the quilting map.
#[derive(Debug, Clone)]
pub struct Quilt {
    pair: MatchingPair,
    k: u64,
    source: NatExtDomain,
    target: NatExtDomain,
    patches: QuiltPatches,
}

impl Quilt {
    pub fn new(pair: &MatchingPair, alpha: f64, beta: f64) -> Result<Self> {
        if alpha.is_nan() || beta.is_nan() || alpha > beta {
            return Err(Error::InvalidParams(format!(
                "need alpha <= beta, got {alpha} > {beta}"
            )));
        }
        let ca = classify_alpha(pair, alpha);
        let cb = classify_alpha(pair, beta);
        let h = pair.heights();
        let k = match (ca.k, cb.k) {
            (Some(ka), Some(kb)) if ka == kb && ca.second_interior && cb.second_interior => ka,
            _ => {
                let bad = if ca.k.is_none() || !ca.second_interior {
                    alpha
                } else {
                    beta
                };
                return Err(Error::Classification {
                    alpha: bad,
                    lo: h.a,
                    hi: h.b,
                });
            }
        };
        let target = build_domain(pair, alpha)?;
        let source = build_domain(pair, beta)?;
        let patches = patches(&h, &target, &source);
        Ok(Quilt {
            pair: *pair,
            k,
            source,
            target,
            patches,
        })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn patches(&self) -> &QuiltPatches {
        &self.patches
    }

    /// `Omega_beta`, the domain of the quilting map.
    pub fn source(&self) -> &NatExtDomain {
        &self.source
    }

    /// `Omega_alpha`, the range of the quilting map.
    pub fn target(&self) -> &NatExtDomain {
        &self.target
    }

    /// Largest corner discrepancy between `T_alpha(A2)` and `T_beta(D2)`.
    pub fn residual(&self) -> f64 {
        let n = self.pair.n() as f64;
        let k = self.k as f64;
        let img = |r: &Rect, digit: f64| {
            let xs = [n / r.x1 - digit, n / r.x0 - digit];
            let ys = [n / (digit + r.y1), n / (digit + r.y0)];
            [xs[0], xs[1], ys[0], ys[1]]
        };
        let from_a = img(&self.patches.a[2], k);
        let from_d = img(&self.patches.d[2], k + 1.0);
        from_a
            .iter()
            .zip(&from_d)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max)
    }

    /// The quilting map `Omega_beta -> Omega_alpha`.
    pub fn map(&self, p: Point) -> Result<Point> {
        if !self.source.contains_fast(p) {
            return Err(Error::OutOfDomain { x: p.x, y: p.y });
        }
        let d = self.pair.d();
        let top = self.pair.top_digit();
        // Forward digits of beta along D0 -> D1 -> D2 -> T(D2), and the digits
        // of the alpha patches A0, A1, A2.
        let forward = [d, top, self.k + 1];
        let backward = [top, d, self.k];
        let Some(level) = (0..3).find(|&l| self.patches.d[l].contains(p)) else {
            return Ok(p);
        };
        let n = self.pair.n() as f64;
        let mut q = p;
        for &j in &forward[level..] {
            q = branch(n, j, q);
        }
        for &j in backward[level..].iter().rev() {
            q = inverse_branch(n, j, q);
        }
        Ok(q)
    }
}

fn branch(n: f64, j: u64, p: Point) -> Point {
    Point::new(n / p.x - j as f64, n / (j as f64 + p.y))
}

fn inverse_branch(n: f64, j: u64, p: Point) -> Point {
    Point::new(n / (p.x + j as f64), n / p.y - j as f64)
}

fn patches(h: &PlateauHeights, target: &NatExtDomain, source: &NatExtDomain) -> QuiltPatches {
    let ma = target.marks();
    let mb = source.marks();
    QuiltPatches {
        a: [
            Rect::new(ma.alpha, mb.alpha, h.a, h.d),
            Rect::new(mb.t_alpha, ma.t_alpha, h.b, h.c),
            Rect::new(ma.t2_alpha, mb.t2_alpha, h.e, h.f),
        ],
        d: [
            Rect::new(ma.alpha_plus_one, mb.alpha_plus_one, h.c, h.f),
            Rect::new(mb.t_alpha1, ma.t_alpha1, h.d, h.e),
            Rect::new(ma.t2_alpha1, mb.t2_alpha1, h.a, h.b),
        ],
    }
}

pub fn quilting_regions(pair: &MatchingPair, alpha: f64, beta: f64) -> Result<QuiltPatches> {
    Ok(*Quilt::new(pair, alpha, beta)?.patches())
}

pub fn verify_quilting(pair: &MatchingPair, alpha: f64, beta: f64) -> Result<f64> {
    Ok(Quilt::new(pair, alpha, beta)?.residual())
}

pub fn quilting_map(pair: &MatchingPair, alpha: f64, beta: f64, p: Point) -> Result<Point> {
    Quilt::new(pair, alpha, beta)?.map(p)
}

/// Monte Carlo comparison of the invariant mass of a rectangle and of its
/// quilting image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassCheck {
    pub source_estimate: f64,
    pub source_stderr: f64,
    pub image_estimate: f64,
    pub image_stderr: f64,
    pub source_exact: f64,
    pub image_exact: f64,
}

impl MassCheck {
    /// `|source - image|` in units of the combined standard error.
    pub fn z_score(&self) -> f64 {
        let se = (self.source_stderr.powi(2) + self.image_stderr.powi(2)).sqrt();
        (self.source_estimate - self.image_estimate).abs() / se
    }
}

/// Estimates the mass of `rect` (a subset of a `D_l` patch) and of its image
/// by uniform sampling in each rectangle. Both maps act coordinate-wise and
/// monotonically, so the image of a rectangle is the rectangle spanned by
/// the images of two opposite corners.
pub fn mass_preservation(
    quilt: &Quilt,
    rect: Rect,
    samples: usize,
    seed: u64,
) -> Result<MassCheck> {
    let n = quilt.pair.n() as f64;
    let c0 = quilt.map(Point::new(rect.x0, rect.y0))?;
    let c1 = quilt.map(Point::new(rect.x1, rect.y1))?;
    let image = Rect::new(
        c0.x.min(c1.x),
        c0.x.max(c1.x),
        c0.y.min(c1.y),
        c0.y.max(c1.y),
    );
    let mut rng = stream(seed);
    let mut estimate = |r: &Rect| {
        let area = r.width() * (r.y1 - r.y0);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..samples {
            let x = r.x0 + r.width() * rng.gen::<f64>();
            let y = r.y0 + (r.y1 - r.y0) * rng.gen::<f64>();
            let v = area * n / (n + x * y).powi(2);
            s += v;
            s2 += v * v;
        }
        let m = samples as f64;
        let mean = s / m;
        let var = (s2 / m - mean * mean).max(0.0);
        (mean, (var / m).sqrt())
    };
    let (source_estimate, source_stderr) = estimate(&rect);
    let (image_estimate, image_stderr) = estimate(&image);
    Ok(MassCheck {
        source_estimate,
        source_stderr,
        image_estimate,
        image_stderr,
        source_exact: rect.invariant_mass(n),
        image_exact: image.invariant_mass(n),
    })
}
