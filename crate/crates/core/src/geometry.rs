//! Lattice geometry derived from the three-beam configuration.
//!
//! Internal units are fixed once and for all: the laser wave number is
//! `k_L = 1` and the recoil energy is `E_R = 1`. All lengths are in units of
//! `1/k_L`, all wave vectors in units of `k_L`, and all energies in units of
//! `E_R` unless a function says otherwise. With `hbar = 1` this implies an
//! atomic mass `m = 1/2`.
//!
//! The nominal beams form a trine (mutual angles `2pi/3`, zero sum). Beams 2
//! and 3 may be rotated counterclockwise by small offsets, which distorts the
//! reciprocal cell; the Bravais vectors are always recovered from the exact
//! duality relation `a_i . b_j = 2 pi delta_ij`.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec2::Vec2;

/// Laser detuning side. Blue detuning traps at field minima and produces the
/// honeycomb lattice; red detuning flips the sign of the depth and yields a
/// triangular lattice outside the scope of the band analysis here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detuning {
    Blue,
    Red,
}

/// Rotated beams must keep spanning a 2-d reciprocal cell; below this cross
/// product (in units of `k_L^2`) the cell is declared degenerate.
pub const DEGENERATE_CELL_MIN_CROSS: f64 = 1e-6;

/// The full experimental knob set; single source of truth for every
/// downstream computation.
///
/// `strengths` are the dimensionless field-strength factors `s_n` (nominal 1),
/// `theta2`/`theta3` rotate beams 2 and 3 counterclockwise away from their
/// nominal directions (radians), `phi` is the phase of the incoherent
/// standing-wave variant (0 = coherent three-beam lattice) and
/// `v0_over_er` is the lattice depth `V0/E_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamConfig<S> {
    pub strengths: [S; 3],
    pub theta2: S,
    pub theta3: S,
    pub phi: S,
    pub v0_over_er: S,
    pub detuning: Detuning,
}

impl<S: Real> BeamConfig<S> {
    /// Balanced, undistorted, coherent lattice at depth `V0/E_R`.
    pub fn balanced(v0_over_er: S) -> Self {
        Self {
            strengths: [S::one(), S::one(), S::one()],
            theta2: S::zero(),
            theta3: S::zero(),
            phi: S::zero(),
            v0_over_er,
            detuning: Detuning::Blue,
        }
    }

    /// Single imbalanced beam, `s_1 = 1 + eta`.
    pub fn strength_imbalanced(v0_over_er: S, eta: S) -> Self {
        let mut cfg = Self::balanced(v0_over_er);
        cfg.strengths[0] = S::one() + eta;
        cfg
    }

    /// Symmetric angle mismatch `theta3 = -theta2 = theta`; positive `theta`
    /// closes the angle between the reciprocal vectors (the direction that
    /// destroys the Dirac points fastest).
    pub fn angle_mismatched(v0_over_er: S, theta: S) -> Self {
        let mut cfg = Self::balanced(v0_over_er);
        cfg.theta2 = -theta;
        cfg.theta3 = theta;
        cfg
    }

    /// Balanced lattice with the standing-wave phase `phi`.
    pub fn phase_variant(v0_over_er: S, phi: S) -> Self {
        let mut cfg = Self::balanced(v0_over_er);
        cfg.phi = phi;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        for (n, s) in self.strengths.iter().enumerate() {
            if !(*s > S::zero()) || !s.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "beam strength s{} = {} must be positive",
                    n + 1,
                    s
                )));
            }
        }
        if !(self.v0_over_er > S::zero()) || !self.v0_over_er.is_finite() {
            return Err(Error::InvalidInput(format!(
                "lattice depth V0/E_R = {} must be positive",
                self.v0_over_er
            )));
        }
        for v in [self.theta2, self.theta3, self.phi] {
            if !v.is_finite() {
                return Err(Error::InvalidInput("non-finite angle".into()));
            }
        }
        Ok(())
    }

    /// Effective Planck constant `hbar_e = sqrt(2 E_R / V0)`; always derived,
    /// never stored.
    #[inline]
    pub fn hbar_e(&self) -> S {
        (S::lit(2.0) / self.v0_over_er).sqrt()
    }

    /// True when all strengths are equal, the beams are not rotated and
    /// `phi = 0`.
    pub fn is_nominal(&self) -> bool {
        let [s1, s2, s3] = self.strengths;
        s1 == s2
            && s2 == s3
            && self.theta2 == S::zero()
            && self.theta3 == S::zero()
            && self.phi == S::zero()
    }
}

impl<S: Real> Default for BeamConfig<S> {
    fn default() -> Self {
        Self::balanced(S::lit(32.0))
    }
}

/// Beam, reciprocal, Bravais and displacement vectors plus the Brillouin-zone
/// corners, possibly distorted. Produced by [`build_geometry`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeVectors<S> {
    /// Beam wave vectors `k_1, k_2, k_3` (units of `k_L`).
    pub beams: [Vec2<S>; 3],
    /// Reciprocal primitive vectors `b_1 = k_3 - k_1`, `b_2 = k_1 - k_2`.
    pub b1: Vec2<S>,
    pub b2: Vec2<S>,
    /// Bravais primitive vectors from exact duality inversion.
    pub a1: Vec2<S>,
    pub a2: Vec2<S>,
    /// A -> B displacement trine `c_1, c_2, c_3` (sums to zero).
    pub c: [Vec2<S>; 3],
    /// Nominal Brillouin-zone corners `K = (b_2 - b_1)/3`, `K' = -K`.
    pub k_corner: Vec2<S>,
    pub k_corner_prime: Vec2<S>,
    /// Derived lengths: `kappa = sqrt(|b_1||b_2|)`, `lambda = sqrt(|a_1||a_2|)`
    /// and the honeycomb constant `a = 4 pi / (3 kappa)`. Nominal values are
    /// `sqrt(3)`, `4 pi/3` and `4 pi/(3 sqrt(3))`.
    pub kappa: S,
    pub lambda: S,
    pub a: S,
}

impl<S: Real> LatticeVectors<S> {
    /// Fractional coordinates of `r` in the Bravais basis: `r = f1 a1 + f2 a2`.
    #[inline]
    pub fn fractional(&self, r: Vec2<S>) -> (S, S) {
        let two_pi = S::lit(2.0) * S::PI();
        (self.b1.dot(r) / two_pi, self.b2.dot(r) / two_pi)
    }

    /// Point from fractional coordinates in the Bravais basis.
    #[inline]
    pub fn from_fractional(&self, f1: S, f2: S) -> Vec2<S> {
        self.a1 * f1 + self.a2 * f2
    }

    /// Reduce `r` by Bravais translations into the primitive cell
    /// `[0,1) x [0,1)` in fractional coordinates.
    pub fn reduce_to_cell(&self, r: Vec2<S>) -> Vec2<S> {
        let (f1, f2) = self.fractional(r);
        self.from_fractional(f1 - f1.floor(), f2 - f2.floor())
    }

    /// Reduce a wave vector into the first Brillouin zone (minimum-norm
    /// representative over reciprocal translations; deterministic tie-break
    /// toward larger `k_y`, then larger `k_x`).
    pub fn reduce_to_bz(&self, k: Vec2<S>) -> Vec2<S> {
        // Pre-shift by the rounded fractional coordinates so the search
        // window stays small even far outside the first zone.
        let two_pi = S::lit(2.0) * S::PI();
        let f1 = (self.a1.dot(k) / two_pi).round();
        let f2 = (self.a2.dot(k) / two_pi).round();
        let base = k - self.b1 * f1 - self.b2 * f2;
        let mut best = base;
        let tol = S::lit(1e-12) * self.kappa * self.kappa;
        for i in -2..=2 {
            for j in -2..=2 {
                let cand = base - self.b1 * S::from_i32(i).unwrap() - self.b2 * S::from_i32(j).unwrap();
                let d = cand.norm_sq() - best.norm_sq();
                if d < -tol
                    || (d.abs() <= tol
                        && (cand.y > best.y + S::lit(1e-12) * self.kappa
                            || (cand.y - best.y).abs() <= S::lit(1e-12) * self.kappa
                                && cand.x > best.x))
                {
                    best = cand;
                }
            }
        }
        best
    }

    /// Minimum distance between two wave vectors modulo the reciprocal lattice.
    pub fn bz_distance(&self, k1: Vec2<S>, k2: Vec2<S>) -> S {
        let d = k1 - k2;
        let mut best = S::infinity();
        let two_pi = S::lit(2.0) * S::PI();
        let f1 = (self.a1.dot(d) / two_pi).round();
        let f2 = (self.a2.dot(d) / two_pi).round();
        let base = d - self.b1 * f1 - self.b2 * f2;
        for i in -2..=2 {
            for j in -2..=2 {
                let cand = base - self.b1 * S::from_i32(i).unwrap() - self.b2 * S::from_i32(j).unwrap();
                best = best.min(cand.norm());
            }
        }
        best
    }
}

/// Construct all lattice vectors from the beam configuration.
///
/// Beams 2 and 3 are rotated counterclockwise by `theta2`, `theta3`; the
/// reciprocal vectors follow as `b'_1 = k'_3 - k'_1`, `b'_2 = k'_1 - k'_2`
/// and the Bravais vectors from exact 2x2 inversion of the duality relation
/// (first-order formulas are inadequate at sweep-scale mismatches).
/// Rejects configurations whose rotated beams become collinear.
pub fn build_geometry<S: Real>(cfg: &BeamConfig<S>) -> Result<LatticeVectors<S>> {
    cfg.validate()?;

    let half = S::lit(0.5);
    let sqrt3 = S::lit(3.0).sqrt();
    let k1 = Vec2::new(S::zero(), S::one());
    let k2 = Vec2::new(-sqrt3 * half, -half).rotated(cfg.theta2);
    let k3 = Vec2::new(sqrt3 * half, -half).rotated(cfg.theta3);

    let b1 = k3 - k1;
    let b2 = k1 - k2;

    let cross = b1.cross(b2);
    if cross.abs() < S::lit(DEGENERATE_CELL_MIN_CROSS) {
        return Err(Error::DegenerateCell {
            cross_norm: cross.abs().to_f64_lossy(),
            min: DEGENERATE_CELL_MIN_CROSS,
        });
    }

    // a_i . b_j = 2 pi delta_ij, solved exactly: a_1 = 2 pi J b_2 / (b_1 x b_2)
    // with J the 90-degree rotation taking b_2 to its perpendicular.
    let two_pi = S::lit(2.0) * S::PI();
    let a1 = Vec2::new(b2.y, -b2.x) * (two_pi / cross);
    let a2 = Vec2::new(-b1.y, b1.x) * (two_pi / cross);

    let third = S::lit(1.0 / 3.0);
    let c1 = (a1 + a2) * third;
    let c2 = (a2 - a1 * S::lit(2.0)) * third;
    let c3 = (a1 - a2 * S::lit(2.0)) * third;

    let k_corner = (b2 - b1) * third;

    let kappa = (b1.norm() * b2.norm()).sqrt();
    let lambda = (a1.norm() * a2.norm()).sqrt();
    let a = S::lit(4.0) * S::PI() / (S::lit(3.0) * kappa);

    Ok(LatticeVectors {
        beams: [k1, k2, k3],
        b1,
        b2,
        a1,
        a2,
        c: [c1, c2, c3],
        k_corner,
        k_corner_prime: -k_corner,
        kappa,
        lambda,
        a,
    })
}

/// Dipole potential depth and the lattice regime it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleDepth<S> {
    /// `V0 = (hbar Gamma / 8)(Gamma / delta)(I0 / I_s)`, in energy units of
    /// `hbar` times the unit `linewidth` and `detuning` are expressed in.
    pub v0: S,
    /// Blue (`V0 > 0`, honeycomb) or red (`V0 < 0`, triangular, out of the
    /// band analysis scope).
    pub regime: Detuning,
}

/// Convert laser parameters to the lattice depth.
///
/// `linewidth` and `detuning` must share the same (angular frequency) unit;
/// `intensity_ratio` is `I0/I_s`. Zero detuning is rejected.
pub fn dipole_depth<S: Real>(linewidth: S, detuning: S, intensity_ratio: S) -> Result<DipoleDepth<S>> {
    if detuning == S::zero() {
        return Err(Error::ZeroDetuning);
    }
    if !(linewidth > S::zero()) || !(intensity_ratio >= S::zero()) {
        return Err(Error::InvalidInput(
            "linewidth must be positive and intensity ratio non-negative".into(),
        ));
    }
    let v0 = linewidth * (linewidth / detuning) * intensity_ratio / S::lit(8.0);
    let regime = if v0 >= S::zero() { Detuning::Blue } else { Detuning::Red };
    Ok(DipoleDepth { v0, regime })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn nominal() -> LatticeVectors<f64> {
        build_geometry(&BeamConfig::balanced(32.0)).unwrap()
    }

    #[test]
    fn nominal_reciprocal_vectors() {
        let g = nominal();
        let kappa = 3f64.sqrt();
        assert_abs_diff_eq!(g.b1.x, kappa / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.b1.y, -kappa * 3f64.sqrt() / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.b2.x, kappa / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.b2.y, kappa * 3f64.sqrt() / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.kappa, kappa, epsilon = 1e-14);
        assert_abs_diff_eq!(g.lambda, 4.0 * std::f64::consts::PI / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn nominal_trine_and_corners() {
        let g = nominal();
        let sum = g.beams[0] + g.beams[1] + g.beams[2];
        assert!(sum.norm() < 1e-15);
        // K = (b2 - b1)/3 = k_1 and K' = -K.
        assert!((g.k_corner - g.beams[0]).norm() < 1e-14);
        assert!((g.k_corner_prime + g.beams[0]).norm() < 1e-14);
    }

    #[test]
    fn duality_exact_for_distorted_cells() {
        let cfg = BeamConfig {
            strengths: [1.2, 0.9, 1.05],
            theta2: -0.21,
            theta3: 0.13,
            phi: 0.0,
            v0_over_er: 20.0,
            detuning: Detuning::Blue,
        };
        let g = build_geometry(&cfg).unwrap();
        assert_abs_diff_eq!(g.a1.dot(g.b1), 2.0 * std::f64::consts::PI, epsilon = 1e-12);
        assert_abs_diff_eq!(g.a2.dot(g.b2), 2.0 * std::f64::consts::PI, epsilon = 1e-12);
        assert_abs_diff_eq!(g.a1.dot(g.b2), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.a2.dot(g.b1), 0.0, epsilon = 1e-12);
        let csum = g.c[0] + g.c[1] + g.c[2];
        assert!(csum.norm() < 1e-13);
    }

    #[test]
    fn first_order_reciprocal_shift() {
        // theta3 = -theta2 = 1e-3 gives db1 = (theta/sqrt(3)) b2 to first order.
        let theta = 1e-3;
        let g0 = nominal();
        let g = build_geometry(&BeamConfig::angle_mismatched(32.0, theta)).unwrap();
        let db1 = g.b1 - g0.b1;
        let db2 = g.b2 - g0.b2;
        let expect1 = g0.b2 * (theta / 3f64.sqrt());
        let expect2 = g0.b1 * (theta / 3f64.sqrt());
        assert!((db1 - expect1).norm() <= 1e-6 * g0.kappa);
        assert!((db2 - expect2).norm() <= 1e-6 * g0.kappa);
    }

    #[test]
    fn collinear_beams_rejected() {
        // Rotating beam 2 by -2pi/3 aligns it with beam 1 and kills b2.
        let mut cfg = BeamConfig::balanced(32.0);
        cfg.theta2 = -2.0 * std::f64::consts::PI / 3.0;
        match build_geometry(&cfg) {
            Err(Error::DegenerateCell { .. }) => {}
            other => panic!("expected degenerate cell, got {other:?}"),
        }
    }

    #[test]
    fn continuity_in_angles() {
        let g0 = nominal();
        let mut cfg = BeamConfig::balanced(32.0);
        cfg.theta2 = 1e-9;
        cfg.theta3 = -1e-9;
        let g = build_geometry(&cfg).unwrap();
        for (v0, v) in [
            (g0.b1, g.b1),
            (g0.b2, g.b2),
            (g0.a1, g.a1),
            (g0.a2, g.a2),
            (g0.k_corner, g.k_corner),
        ] {
            assert!((v - v0).norm() <= 1e-7);
        }
    }

    #[test]
    fn hbar_e_is_derived() {
        let cfg = BeamConfig::balanced(32.0);
        assert_abs_diff_eq!(cfg.hbar_e(), 0.25, epsilon = 1e-15);
        let cfg = BeamConfig::balanced(10.0);
        assert_abs_diff_eq!(cfg.hbar_e(), (0.2f64).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn dipole_depth_scalings() {
        let d0 = dipole_depth(1.0, 10.0, 100.0).unwrap();
        let d_half = dipole_depth(1.0, 20.0, 100.0).unwrap();
        assert_abs_diff_eq!(d0.v0, 2.0 * d_half.v0, epsilon = 1e-15);
        let d_double_i = dipole_depth(1.0, 10.0, 200.0).unwrap();
        assert_abs_diff_eq!(d_double_i.v0, 2.0 * d0.v0, epsilon = 1e-15);
        let red = dipole_depth(1.0, -10.0, 100.0).unwrap();
        assert!(red.v0 < 0.0);
        assert_eq!(red.regime, Detuning::Red);
        assert!(matches!(dipole_depth(1.0, 0.0, 100.0), Err(Error::ZeroDetuning)));
    }

    #[test]
    fn bz_reduction_of_corner_is_stable() {
        let g = nominal();
        let k = g.k_corner + g.b1 * 2.0 - g.b2 * 1.0;
        let red = g.reduce_to_bz(k);
        assert!(g.bz_distance(red, g.k_corner) < 1e-12);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = BeamConfig::balanced(32.0);
        cfg.strengths[1] = 0.0;
        assert!(build_geometry(&cfg).is_err());
        let cfg2 = BeamConfig::balanced(-5.0);
        assert!(build_geometry(&cfg2).is_err());
    }
}
