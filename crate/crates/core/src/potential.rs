//! The dimensionless optical potential and its critical points.
//!
//! For the coherent three-beam lattice the potential is the squared modulus
//! of the total field amplitude
//!
//! ```text
//! f(r) = s1 + s2 exp(-i b1.r) + s3 exp(i b2.r),
//! v(r) = |f(r)|^2
//!      = (s1^2+s2^2+s3^2) + 2 s1 s2 cos(b1.r) + 2 s1 s3 cos(b2.r)
//!        + 2 s2 s3 cos((b1+b2).r).
//! ```
//!
//! The incoherent standing-wave variant adds a phase `phi` to the Fourier
//! coefficients in the threefold-symmetric way,
//!
//! ```text
//! v(r) = (s1^2+s2^2+s3^2) + 2 s1 s2 cos(b1.r + phi)
//!        + 2 s1 s3 cos(b2.r + phi) + 2 s2 s3 cos((b1+b2).r - phi),
//! ```
//!
//! i.e. the coefficient on `b3 = -(b1+b2)` carries the same phase as those on
//! `b1` and `b2`. That choice keeps the 120-degree rotation symmetry about
//! the lattice sites, pins the A/B/C sites in place for all `phi`, and
//! produces the cubic saddle at the B site for `phi = pi/6`.
//!
//! All positions are in units of `1/k_L`; `v` is in units of `V0`.

use crate::error::{Error, Result};
use crate::geometry::{build_geometry, BeamConfig, LatticeVectors};
use crate::scalar::Real;
use crate::vec2::Vec2;
use num_complex::Complex;

/// Accept a refined critical point only below this gradient norm.
pub const GRAD_NORM_ACCEPT: f64 = 1e-8;
/// Refinement target for the minima search.
pub const GRAD_NORM_REFINE: f64 = 1e-10;
/// Above this gradient norm after refinement a point is not critical.
pub const GRAD_NORM_REJECT: f64 = 1e-6;
/// Cubic-saddle detection: Hessian spectral norm below this fraction of the
/// typical curvature `3 kappa^2 / 4`.
pub const CUBIC_HESSIAN_REL_TOL: f64 = 1e-6;

/// Symmetric 2x2 matrix (Hessians of the potential).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat2<S> {
    pub xx: S,
    pub xy: S,
    pub yy: S,
}

impl<S: Real> SymMat2<S> {
    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> (S, S) {
        let half = S::lit(0.5);
        let mean = (self.xx + self.yy) * half;
        let d = (self.xx - self.yy) * half;
        let rad = (d * d + self.xy * self.xy).sqrt();
        (mean - rad, mean + rad)
    }

    pub fn spectral_norm(&self) -> S {
        let (lo, hi) = self.eigenvalues();
        lo.abs().max(hi.abs())
    }

    pub fn det(&self) -> S {
        self.xx * self.yy - self.xy * self.xy
    }

    /// Solve `M x = rhs`; `None` when (nearly) singular.
    pub fn solve(&self, rhs: Vec2<S>) -> Option<Vec2<S>> {
        let det = self.det();
        let scale = self.spectral_norm();
        if det.abs() <= S::lit(1e-14) * scale * scale {
            return None;
        }
        Some(Vec2::new(
            (self.yy * rhs.x - self.xy * rhs.y) / det,
            (self.xx * rhs.y - self.xy * rhs.x) / det,
        ))
    }
}

/// Potential evaluator with the geometry and coefficient products cached.
#[derive(Debug, Clone)]
pub struct Potential<S> {
    pub geom: LatticeVectors<S>,
    pub cfg: BeamConfig<S>,
    /// 2 s1 s2, 2 s1 s3, 2 s2 s3.
    pair: [S; 3],
    /// s1^2 + s2^2 + s3^2.
    mean: S,
    b12: Vec2<S>,
}

impl<S: Real> Potential<S> {
    pub fn new(cfg: &BeamConfig<S>) -> Result<Self> {
        let geom = build_geometry(cfg)?;
        Ok(Self::with_geometry(cfg, geom))
    }

    pub fn with_geometry(cfg: &BeamConfig<S>, geom: LatticeVectors<S>) -> Self {
        let [s1, s2, s3] = cfg.strengths;
        let two = S::lit(2.0);
        Self {
            geom,
            cfg: *cfg,
            pair: [two * s1 * s2, two * s1 * s3, two * s2 * s3],
            mean: s1 * s1 + s2 * s2 + s3 * s3,
            b12: geom.b1 + geom.b2,
        }
    }

    #[inline]
    fn phases(&self, r: Vec2<S>) -> (S, S, S) {
        let phi = self.cfg.phi;
        (
            self.geom.b1.dot(r) + phi,
            self.geom.b2.dot(r) + phi,
            self.b12.dot(r) - phi,
        )
    }

    /// `v(r)`, dimensionless (units of `V0`).
    pub fn value(&self, r: Vec2<S>) -> S {
        let (u1, u2, u3) = self.phases(r);
        self.mean + self.pair[0] * u1.cos() + self.pair[1] * u2.cos() + self.pair[2] * u3.cos()
    }

    pub fn gradient(&self, r: Vec2<S>) -> Vec2<S> {
        let (u1, u2, u3) = self.phases(r);
        -(self.geom.b1 * (self.pair[0] * u1.sin())
            + self.geom.b2 * (self.pair[1] * u2.sin())
            + self.b12 * (self.pair[2] * u3.sin()))
    }

    pub fn hessian(&self, r: Vec2<S>) -> SymMat2<S> {
        let (u1, u2, u3) = self.phases(r);
        let c = [
            -self.pair[0] * u1.cos(),
            -self.pair[1] * u2.cos(),
            -self.pair[2] * u3.cos(),
        ];
        let bs = [self.geom.b1, self.geom.b2, self.b12];
        let mut h = SymMat2 {
            xx: S::zero(),
            xy: S::zero(),
            yy: S::zero(),
        };
        for (ci, bi) in c.iter().zip(bs.iter()) {
            h.xx += *ci * bi.x * bi.x;
            h.xy += *ci * bi.x * bi.y;
            h.yy += *ci * bi.y * bi.y;
        }
        h
    }

    fn cubic_hessian_tol(&self) -> S {
        let kappa2 = self.geom.kappa * self.geom.kappa;
        S::lit(CUBIC_HESSIAN_REL_TOL) * S::lit(0.75) * kappa2
    }

    /// Newton refinement of `seed` onto a nearby critical point; falls back
    /// to damped gradient flow when the Hessian is (nearly) singular.
    /// Returns the refined position and its gradient norm.
    pub fn refine_critical(&self, seed: Vec2<S>, target: S) -> (Vec2<S>, S) {
        let mut r = seed;
        let step_cap = S::lit(0.2) * self.geom.a;
        for _ in 0..80 {
            let g = self.gradient(r);
            let gn = g.norm();
            if gn <= target {
                break;
            }
            let h = self.hessian(r);
            let mut delta = match h.solve(-g) {
                Some(d) => d,
                // Degenerate curvature: descend along the gradient with a
                // conservative step based on the typical curvature scale.
                None => -g * (S::one() / (S::lit(0.75) * self.geom.kappa * self.geom.kappa)),
            };
            let dn = delta.norm();
            if dn > step_cap {
                delta = delta * (step_cap / dn);
            }
            r += delta;
        }
        (r, self.gradient(r).norm())
    }
}

/// Kind of critical point, from the gradient/Hessian classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Minimum,
    Maximum,
    Saddle,
    /// Gradient and Hessian both vanish (third-order saddle).
    CubicSaddle,
}

/// Which sublattice a critical point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SublatticeTag {
    A,
    B,
    C,
    S,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint<S> {
    /// Position inside the primitive cell, units of `1/k_L`.
    pub position: Vec2<S>,
    pub kind: CriticalKind,
    /// Potential value, units of `V0`.
    pub value: S,
    pub tag: SublatticeTag,
    /// Gradient norm after refinement (diagnostic).
    pub grad_norm: S,
}

/// An ordinary saddle (or the cubic degenerate case) with its barrier height
/// above the deepest minimum, in units of `V0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saddle<S> {
    pub point: CriticalPoint<S>,
    pub barrier: S,
}

/// Total dimensionless field amplitude `f(r)`; only defined for `phi = 0`
/// (the phase variant is an incoherent superposition).
pub fn field_amplitude<S: Real>(r: Vec2<S>, cfg: &BeamConfig<S>) -> Result<Complex<S>> {
    if cfg.phi != S::zero() {
        return Err(Error::PhaseVariant(cfg.phi.to_f64_lossy()));
    }
    let geom = build_geometry(cfg)?;
    let [s1, s2, s3] = cfg.strengths;
    let u1 = geom.b1.dot(r);
    let u2 = geom.b2.dot(r);
    Ok(Complex::new(s1, S::zero())
        + Complex::from_polar(s2, -u1)
        + Complex::from_polar(s3, u2))
}

/// Evaluate the dimensionless optical potential at `r`.
pub fn potential_value<S: Real>(r: Vec2<S>, cfg: &BeamConfig<S>) -> Result<S> {
    Ok(Potential::new(cfg)?.value(r))
}

fn triangle_cosines<S: Real>(s: [S; 3]) -> Result<(S, S)> {
    let [s1, s2, s3] = s;
    let two = S::lit(2.0);
    let c1 = (s3 * s3 - s2 * s2 - s1 * s1) / (two * s1 * s2);
    let c2 = (s2 * s2 - s3 * s3 - s1 * s1) / (two * s1 * s3);
    let tol = S::lit(1e-12);
    if c1.abs() > S::one() + tol || c2.abs() > S::one() + tol {
        return Err(Error::TriangleInequalityViolated(
            s1.to_f64_lossy(),
            s2.to_f64_lossy(),
            s3.to_f64_lossy(),
        ));
    }
    Ok((c1.min(S::one()).max(-S::one()), c2.min(S::one()).max(-S::one())))
}

/// Closed-form minima of the `phi = 0` potential: the zeros of `f(r)` at
/// `cos(b1.r) = (s3^2-s2^2-s1^2)/(2 s1 s2)`, `cos(b2.r) = (s2^2-s3^2-s1^2)/(2 s1 s3)`
/// with `s2 sin(b1.r) = s3 sin(b2.r)` selecting the branch pairing.
fn minima_seeds<S: Real>(cfg: &BeamConfig<S>, geom: &LatticeVectors<S>) -> Result<(Vec2<S>, Vec2<S>)> {
    let (c1, c2) = triangle_cosines(cfg.strengths)?;
    let u = c1.acos();
    let w = c2.acos();
    let two_pi = S::lit(2.0) * S::PI();
    let r_a = (geom.a1 * u + geom.a2 * w) * (S::one() / two_pi);
    let r_b = (geom.a1 + geom.a2) - r_a;
    Ok((r_a, r_b))
}

/// Locate the two potential minima in the primitive cell.
///
/// For `phi = 0` the closed forms above are exact (the minima are zeros of
/// the field amplitude); for `phi != 0` they seed a Newton descent on the
/// full potential. Errors with `TriangleInequalityViolated` when no
/// two-minima structure exists.
pub fn locate_minima<S: Real>(cfg: &BeamConfig<S>) -> Result<(CriticalPoint<S>, CriticalPoint<S>)> {
    let pot = Potential::new(cfg)?;
    let (seed_a, seed_b) = {
        let mut flat = *cfg;
        flat.phi = S::zero();
        minima_seeds(&flat, &pot.geom)?
    };
    let a = refine_and_classify(&pot, seed_a, SublatticeTag::A)?;
    let b = refine_and_classify(&pot, seed_b, SublatticeTag::B)?;
    Ok((a, b))
}

fn refine_and_classify<S: Real>(
    pot: &Potential<S>,
    seed: Vec2<S>,
    tag: SublatticeTag,
) -> Result<CriticalPoint<S>> {
    let (r, gn) = pot.refine_critical(seed, S::lit(GRAD_NORM_REFINE));
    if gn > S::lit(GRAD_NORM_ACCEPT) {
        return Err(Error::NotCritical {
            x: r.x.to_f64_lossy(),
            y: r.y.to_f64_lossy(),
            grad_norm: gn.to_f64_lossy(),
        });
    }
    Ok(CriticalPoint {
        position: r,
        kind: classify_hessian(pot, r),
        value: pot.value(r),
        tag,
        grad_norm: gn,
    })
}

fn classify_hessian<S: Real>(pot: &Potential<S>, r: Vec2<S>) -> CriticalKind {
    let h = pot.hessian(r);
    let tol = pot.cubic_hessian_tol();
    if h.spectral_norm() <= tol {
        return CriticalKind::CubicSaddle;
    }
    let (lo, hi) = h.eigenvalues();
    if lo > tol {
        CriticalKind::Minimum
    } else if hi < -tol {
        CriticalKind::Maximum
    } else {
        // Mixed signs, or one eigenvalue inside the degenerate band: not an
        // extremum either way.
        CriticalKind::Saddle
    }
}

/// Locate the saddle points of the primitive cell and their barrier heights
/// above the deepest minimum.
///
/// For `phi = 0` the three saddles sit at the inversion centers
/// `(a1+a2)/2`, `a1/2`, `a2/2` for every accepted strength/angle
/// configuration. For the threefold-symmetric phase variant the saddle on the
/// A-B line is found by a one-dimensional scan and the other two follow by
/// 120-degree rotations; merged (cubic) cases collapse to a single flagged
/// point. Combined distortions fall back to refining the `phi = 0` seeds.
pub fn locate_saddles<S: Real>(cfg: &BeamConfig<S>) -> Result<Vec<Saddle<S>>> {
    let pot = Potential::new(cfg)?;
    let (min_a, min_b) = locate_minima(cfg)?;
    let v_min = min_a.value.min(min_b.value);
    let geom = &pot.geom;

    let half = S::lit(0.5);
    let seeds: Vec<Vec2<S>> = if cfg.phi == S::zero() {
        vec![
            (geom.a1 + geom.a2) * half,
            geom.a1 * half,
            geom.a2 * half,
        ]
    } else if cfg.theta2 == S::zero()
        && cfg.theta3 == S::zero()
        && cfg.strengths[0] == cfg.strengths[1]
        && cfg.strengths[1] == cfg.strengths[2]
    {
        // Saddles stay on the ...ABCABC... lines; scan the A-B segment for
        // the barrier top, then copy it around by the 120-degree symmetry.
        let s0 = line_maximum(&pot, min_a.position, min_b.position);
        let third_turn = S::lit(2.0) * S::PI() / S::lit(3.0);
        vec![s0, s0.rotated(third_turn), s0.rotated(-third_turn)]
    } else {
        let mut flat = *cfg;
        flat.phi = S::zero();
        let flat_geom = build_geometry(&flat)?;
        vec![
            (flat_geom.a1 + flat_geom.a2) * half,
            flat_geom.a1 * half,
            flat_geom.a2 * half,
        ]
    };

    let mut out: Vec<Saddle<S>> = Vec::new();
    let merge_tol = S::lit(1e-6) * geom.a;
    for seed in seeds {
        let point = refine_and_classify(&pot, seed, SublatticeTag::S)?;
        let mut point = CriticalPoint {
            position: geom.reduce_to_cell(point.position),
            ..point
        };
        point.tag = tag_by_site(geom, &min_a, &min_b, point.position, point.kind);
        if out
            .iter()
            .any(|s| cell_distance(geom, s.point.position, point.position) < merge_tol)
        {
            continue; // merged with an already recorded saddle
        }
        out.push(Saddle {
            point,
            barrier: point.value - v_min,
        });
    }
    Ok(out)
}

/// Golden-section maximum of the potential along the open segment `a..b`.
fn line_maximum<S: Real>(pot: &Potential<S>, a: Vec2<S>, b: Vec2<S>) -> Vec2<S> {
    let gr = (S::lit(5.0).sqrt() - S::one()) * S::lit(0.5);
    let mut lo = S::lit(1e-6);
    let mut hi = S::one() - S::lit(1e-6);
    let at = |t: S| a + (b - a) * t;
    let mut t1 = hi - gr * (hi - lo);
    let mut t2 = lo + gr * (hi - lo);
    let mut f1 = pot.value(at(t1));
    let mut f2 = pot.value(at(t2));
    for _ in 0..120 {
        if f1 < f2 {
            lo = t1;
            t1 = t2;
            f1 = f2;
            t2 = lo + gr * (hi - lo);
            f2 = pot.value(at(t2));
        } else {
            hi = t2;
            t2 = t1;
            f2 = f1;
            t1 = hi - gr * (hi - lo);
            f1 = pot.value(at(t1));
        }
        if hi - lo < S::lit(1e-14) {
            break;
        }
    }
    at((lo + hi) * S::lit(0.5))
}

fn cell_distance<S: Real>(geom: &LatticeVectors<S>, p: Vec2<S>, q: Vec2<S>) -> S {
    let d = p - q;
    let (f1, f2) = geom.fractional(d);
    let f1 = f1 - f1.round();
    let f2 = f2 - f2.round();
    geom.from_fractional(f1, f2).norm()
}

fn tag_by_site<S: Real>(
    geom: &LatticeVectors<S>,
    min_a: &CriticalPoint<S>,
    min_b: &CriticalPoint<S>,
    position: Vec2<S>,
    kind: CriticalKind,
) -> SublatticeTag {
    let tol = S::lit(1e-6) * geom.a;
    if cell_distance(geom, position, min_a.position) < tol {
        SublatticeTag::A
    } else if cell_distance(geom, position, min_b.position) < tol {
        SublatticeTag::B
    } else if cell_distance(geom, position, Vec2::zero()) < tol {
        SublatticeTag::C
    } else if matches!(kind, CriticalKind::Saddle | CriticalKind::CubicSaddle) {
        SublatticeTag::S
    } else {
        SublatticeTag::None
    }
}

/// Refine `r` onto a critical point, classify it and tag its sublattice.
/// Errors with `NotCritical` when the gradient does not vanish nearby.
pub fn classify_point<S: Real>(r: Vec2<S>, cfg: &BeamConfig<S>) -> Result<CriticalPoint<S>> {
    let pot = Potential::new(cfg)?;
    let seed = pot.geom.reduce_to_cell(r);
    let (refined, gn) = pot.refine_critical(seed, S::lit(GRAD_NORM_REFINE));
    // Refinement must stay local: a seed that wanders off was not critical.
    // The acceptance threshold is stricter than GRAD_NORM_REJECT, so any
    // point that fails it cannot satisfy the CriticalPoint invariant either.
    let moved = cell_distance(&pot.geom, refined, seed);
    if gn > S::lit(GRAD_NORM_ACCEPT) || moved > S::lit(0.05) * pot.geom.a {
        return Err(Error::NotCritical {
            x: r.x.to_f64_lossy(),
            y: r.y.to_f64_lossy(),
            grad_norm: gn.to_f64_lossy(),
        });
    }
    let kind = classify_hessian(&pot, refined);
    let tag = match locate_minima(cfg) {
        Ok((a, b)) => tag_by_site(&pot.geom, &a, &b, refined, kind),
        Err(_) => {
            if matches!(kind, CriticalKind::Saddle | CriticalKind::CubicSaddle) {
                SublatticeTag::S
            } else if cell_distance(&pot.geom, refined, Vec2::zero()) < S::lit(1e-6) * pot.geom.a {
                SublatticeTag::C
            } else {
                SublatticeTag::None
            }
        }
    };
    Ok(CriticalPoint {
        position: pot.geom.reduce_to_cell(refined),
        kind,
        value: pot.value(refined),
        tag,
        grad_norm: gn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn balanced() -> BeamConfig<f64> {
        BeamConfig::balanced(32.0)
    }

    #[test]
    fn balanced_landmark_values() {
        let cfg = balanced();
        let g = build_geometry(&cfg).unwrap();
        assert_abs_diff_eq!(potential_value(Vec2::zero(), &cfg).unwrap(), 9.0, epsilon = 1e-13);
        let saddle = (g.a1 + g.a2) * 0.5;
        assert_abs_diff_eq!(potential_value(saddle, &cfg).unwrap(), 1.0, epsilon = 1e-13);
        let r_a = (g.a1 + g.a2) * (1.0 / 3.0);
        assert_abs_diff_eq!(potential_value(r_a, &cfg).unwrap(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn field_amplitude_landmarks() {
        let cfg = balanced();
        let g = build_geometry(&cfg).unwrap();
        let f0 = field_amplitude(Vec2::zero(), &cfg).unwrap();
        assert_abs_diff_eq!(f0.re, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f0.im, 0.0, epsilon = 1e-14);
        let r_a = (g.a1 + g.a2) * (1.0 / 3.0);
        assert!(field_amplitude(r_a, &cfg).unwrap().norm() < 1e-13);

        let eta = 0.37;
        let cfg_s = BeamConfig::strength_imbalanced(32.0, eta);
        let f = field_amplitude(Vec2::zero(), &cfg_s).unwrap();
        assert_abs_diff_eq!(f.re, 3.0 + eta, epsilon = 1e-14);

        let cfg_phi = BeamConfig::phase_variant(32.0, 0.1);
        assert!(matches!(
            field_amplitude(Vec2::zero(), &cfg_phi),
            Err(Error::PhaseVariant(_))
        ));
    }

    #[test]
    fn imbalanced_origin_value_matches_field_square() {
        let eta = 0.5f64;
        let cfg = BeamConfig::strength_imbalanced(32.0, eta);
        let v0 = potential_value(Vec2::zero(), &cfg).unwrap();
        assert_abs_diff_eq!(v0, (3.0 + eta) * (3.0 + eta), epsilon = 1e-12);
        let f = field_amplitude(Vec2::zero(), &cfg).unwrap();
        assert_abs_diff_eq!(v0, f.norm_sqr(), epsilon = 1e-12);
    }

    #[test]
    fn potential_equals_field_square_at_random_points() {
        let cfg = BeamConfig {
            strengths: [1.1, 0.95, 1.02],
            theta2: 0.03,
            theta3: -0.02,
            phi: 0.0,
            v0_over_er: 25.0,
            detuning: crate::geometry::Detuning::Blue,
        };
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 20.0
        };
        for _ in 0..1000 {
            let r = Vec2::new(next(), next());
            let v = potential_value(r, &cfg).unwrap();
            let f = field_amplitude(r, &cfg).unwrap();
            assert_abs_diff_eq!(v, f.norm_sqr(), epsilon = 1e-12);
        }
    }

    #[test]
    fn phase_pi_third_is_inverted_shifted_potential() {
        // v_{phi=pi/3}(r) + v_{phi=0}(r - r_A) = 6, i.e. after shifting the
        // minimum to zero the two patterns are negatives of each other.
        let cfg0 = balanced();
        let cfg3 = BeamConfig::phase_variant(32.0, std::f64::consts::PI / 3.0);
        let g = build_geometry(&cfg0).unwrap();
        let r_a = (g.a1 + g.a2) * (1.0 / 3.0);
        let p0 = Potential::new(&cfg0).unwrap();
        let p3 = Potential::new(&cfg3).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let r = g.a1 * (i as f64 / 20.0) + g.a2 * (j as f64 / 20.0);
                assert_abs_diff_eq!(p3.value(r) + p0.value(r - r_a), 6.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn minimum_hessian_is_isotropic() {
        // Local oscillator: H = (3/2) kappa^2 I / 2 per axis => hbar w0 = 3 sqrt(V0 E_R).
        let cfg = balanced();
        let pot = Potential::new(&cfg).unwrap();
        let g = &pot.geom;
        let r_a = (g.a1 + g.a2) * (1.0 / 3.0);
        let h = pot.hessian(r_a);
        assert_abs_diff_eq!(h.xx, 4.5, epsilon = 1e-12);
        assert_abs_diff_eq!(h.yy, 4.5, epsilon = 1e-12);
        assert_abs_diff_eq!(h.xy, 0.0, epsilon = 1e-12);
        // hbar w0 = hbar sqrt(V0 * h / m) with m = 1/2 -> sqrt(2 V0 h) = 3 sqrt(V0).
        let v0 = cfg.v0_over_er;
        let hbar_w0 = (2.0 * v0 * h.xx).sqrt();
        assert_abs_diff_eq!(hbar_w0, 3.0 * v0.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn balanced_minima_positions() {
        let (a, b) = locate_minima(&balanced()).unwrap();
        let g = build_geometry(&balanced()).unwrap();
        let r_a = (g.a1 + g.a2) * (1.0 / 3.0);
        let r_b = (g.a1 + g.a2) * (2.0 / 3.0);
        assert!((a.position - r_a).norm() < 1e-12);
        assert!((b.position - r_b).norm() < 1e-12);
        assert_eq!(a.kind, CriticalKind::Minimum);
        assert_eq!(b.kind, CriticalKind::Minimum);
        assert!(a.value.abs() < 1e-12 && b.value.abs() < 1e-12);
        assert!(a.grad_norm <= 1e-8 && b.grad_norm <= 1e-8);
    }

    #[test]
    fn imbalanced_minima_closed_form() {
        let eta = 0.5f64;
        let cfg = BeamConfig::strength_imbalanced(32.0, eta);
        let g = build_geometry(&cfg).unwrap();
        let (a, b) = locate_minima(&cfg).unwrap();
        for m in [&a, &b] {
            // Positions along the A-B axis: r = f (a1 + a2), cos(2 pi f) = -(1+eta)/2.
            let (f1, f2) = g.fractional(m.position);
            assert_abs_diff_eq!(f1, f2, epsilon = 1e-10);
            assert_abs_diff_eq!(
                (2.0 * std::f64::consts::PI * f1).cos(),
                -(1.0 + eta) / 2.0,
                epsilon = 1e-10
            );
            assert!(m.value.abs() < 1e-10);
        }
    }

    #[test]
    fn triangle_violation_is_rejected() {
        let cfg = BeamConfig::strength_imbalanced(32.0, 1.5); // s = (2.5, 1, 1)
        assert!(matches!(
            locate_minima(&cfg),
            Err(Error::TriangleInequalityViolated(..))
        ));
    }

    #[test]
    fn phase_variant_minima_depths_differ() {
        let phi = std::f64::consts::PI / 24.0;
        let cfg = BeamConfig::phase_variant(32.0, phi);
        let (a, b) = locate_minima(&cfg).unwrap();
        assert!(a.value < b.value);
        // Both minima stay on the A-B axis (the x axis through the cell).
        let g = build_geometry(&cfg).unwrap();
        let (fa1, fa2) = g.fractional(a.position);
        let (fb1, fb2) = g.fractional(b.position);
        assert_abs_diff_eq!(fa1, fa2, epsilon = 1e-9);
        assert_abs_diff_eq!(fb1, fb2, epsilon = 1e-9);

        // Depths against a dense scan of v along that axis.
        let pot = Potential::new(&cfg).unwrap();
        let axis = g.a1 + g.a2;
        let n = 200_000;
        let mut best_near_a = f64::INFINITY;
        let mut best_near_b = f64::INFINITY;
        for i in 0..=n {
            let f = i as f64 / n as f64;
            let v = pot.value(axis * f);
            if (f - 1.0 / 3.0).abs() < 0.12 {
                best_near_a = best_near_a.min(v);
            }
            if (f - 2.0 / 3.0).abs() < 0.12 {
                best_near_b = best_near_b.min(v);
            }
        }
        assert_abs_diff_eq!(a.value, best_near_a, epsilon = 1e-7);
        assert_abs_diff_eq!(b.value, best_near_b, epsilon = 1e-7);
    }

    #[test]
    fn balanced_saddles_and_barriers() {
        let saddles = locate_saddles(&balanced()).unwrap();
        assert_eq!(saddles.len(), 3);
        for s in &saddles {
            assert_eq!(s.point.kind, CriticalKind::Saddle);
            assert_abs_diff_eq!(s.point.value, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(s.barrier, 1.0, epsilon = 1e-12);
            assert_eq!(s.point.tag, SublatticeTag::S);
        }
    }

    #[test]
    fn imbalanced_barriers_closed_form() {
        let eta = 0.5f64;
        let cfg = BeamConfig::strength_imbalanced(32.0, eta);
        let saddles = locate_saddles(&cfg).unwrap();
        assert_eq!(saddles.len(), 3);
        let mut barriers: Vec<f64> = saddles.iter().map(|s| s.barrier).collect();
        barriers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(barriers[0], (eta - 1.0) * (eta - 1.0), epsilon = 1e-10);
        assert_abs_diff_eq!(barriers[1], (eta + 1.0) * (eta + 1.0), epsilon = 1e-10);
        assert_abs_diff_eq!(barriers[2], (eta + 1.0) * (eta + 1.0), epsilon = 1e-10);
    }

    #[test]
    fn classify_origin_as_maximum() {
        let p = classify_point(Vec2::zero(), &balanced()).unwrap();
        assert_eq!(p.kind, CriticalKind::Maximum);
        assert_abs_diff_eq!(p.value, 9.0, epsilon = 1e-12);
        assert_eq!(p.tag, SublatticeTag::C);
    }

    #[test]
    fn cubic_saddle_at_b_site_for_phi_pi_sixth() {
        let cfg = BeamConfig::phase_variant(32.0, std::f64::consts::PI / 6.0);
        let g = build_geometry(&cfg).unwrap();
        let r_b = (g.a1 + g.a2) * (2.0 / 3.0);
        let p = classify_point(r_b, &cfg).unwrap();
        assert_eq!(p.kind, CriticalKind::CubicSaddle);
        let pot = Potential::new(&cfg).unwrap();
        assert!(pot.gradient(p.position).norm() <= 1e-6);
        assert!(pot.hessian(p.position).spectral_norm() <= 1e-6);
    }

    #[test]
    fn phase_saddles_move_toward_b() {
        let cfg = BeamConfig::phase_variant(32.0, std::f64::consts::PI / 24.0);
        let saddles = locate_saddles(&cfg).unwrap();
        assert_eq!(saddles.len(), 3);
        let g = build_geometry(&cfg).unwrap();
        let on_axis = saddles
            .iter()
            .find(|s| {
                let (f1, f2) = g.fractional(s.point.position);
                (f1 - f2).abs() < 1e-6
            })
            .expect("one saddle on the A-B axis");
        assert_eq!(on_axis.point.kind, CriticalKind::Saddle);
        let (f1, _) = g.fractional(on_axis.point.position);
        // phi = 0 puts the saddle at f = 1/2; it must have moved toward B (2/3).
        assert!(f1 > 0.5 + 1e-3 && f1 < 2.0 / 3.0);
    }

    #[test]
    fn non_critical_point_rejected() {
        let g = build_geometry(&balanced()).unwrap();
        let r = g.a1 * 0.21 + g.a2 * 0.08;
        assert!(matches!(
            classify_point(r, &balanced()),
            Err(Error::NotCritical { .. })
        ));
    }
}
