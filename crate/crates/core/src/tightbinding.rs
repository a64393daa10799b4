//! Closed-form tight-binding spectrum and Dirac-point analysis.
//!
//! With three nearest-neighbor hopping amplitudes `t_1, t_2, t_3` and an
//! on-site half-imbalance `epsilon`, the two bands are
//!
//! ```text
//! Z_k = sum_a t_a exp(i k.c_a),   e_pm(k) = +-sqrt(epsilon^2 + |Z_k|^2).
//! ```
//!
//! For `epsilon = 0` the bands touch wherever `Z_k = 0`. Factoring out the
//! `c_1` phase turns that condition into a closed triangle of the three
//! magnitudes, so Dirac points exist iff the `|t_n|` satisfy the triangle
//! inequalities, and solve
//!
//! ```text
//! cos(k.a1 - phi1) = (|t3|^2 - |t2|^2 - |t1|^2) / (2 |t1 t2|)
//! cos(k.a2 - phi2) = (|t2|^2 - |t3|^2 - |t1|^2) / (2 |t1 t3|)
//! |t2| sin(k.a1 - phi1) + |t3| sin(k.a2 - phi2) = 0
//! ```
//!
//! with `phi_{1,2} = arg t_{2,3} - arg t_1`.

use crate::error::{Error, Result};
use crate::geometry::LatticeVectors;
use crate::scalar::Real;
use crate::vec2::Vec2;
use num_complex::Complex;

/// Three complex nearest-neighbor amplitudes plus the on-site half-imbalance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoppingSet<S> {
    pub t: [Complex<S>; 3],
    pub epsilon: S,
}

impl<S: Real> HoppingSet<S> {
    /// All three amplitudes equal to `t0`, zero imbalance.
    pub fn uniform(t0: Complex<S>) -> Self {
        Self {
            t: [t0, t0, t0],
            epsilon: S::zero(),
        }
    }

    /// The paper's one-parameter family `t_1 = gamma t0`, `t_2 = t_3 = t0`.
    pub fn gamma_family(gamma: S, t0: S) -> Self {
        Self {
            t: [
                Complex::new(gamma * t0, S::zero()),
                Complex::new(t0, S::zero()),
                Complex::new(t0, S::zero()),
            ],
            epsilon: S::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t.iter().all(|t| t.norm_sqr() == S::zero()) {
            return Err(Error::InvalidInput("all hopping amplitudes vanish".into()));
        }
        Ok(())
    }

    fn magnitudes(&self) -> [S; 3] {
        [self.t[0].norm(), self.t[1].norm(), self.t[2].norm()]
    }
}

/// `Z_k = sum_a t_a exp(i k.c_a)`.
pub fn z_k<S: Real>(k: Vec2<S>, h: &HoppingSet<S>, c: &[Vec2<S>; 3]) -> Complex<S> {
    let mut z = Complex::new(S::zero(), S::zero());
    for (t, cv) in h.t.iter().zip(c.iter()) {
        z += t * Complex::from_polar(S::one(), k.dot(*cv));
    }
    z
}

/// Tight-binding band pair `(e_minus, e_plus)` at `k`, in the units of the
/// hopping amplitudes.
pub fn tb_bands<S: Real>(k: Vec2<S>, h: &HoppingSet<S>, c: &[Vec2<S>; 3]) -> (S, S) {
    let z = z_k(k, h, c);
    let e = (h.epsilon * h.epsilon + z.norm_sqr()).sqrt();
    (-e, e)
}

/// A pair of Dirac points; `merged` marks the measure-zero configurations
/// where both coincide modulo a reciprocal translation (only at the zone
/// center or the mid-edge points).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracPair<S> {
    pub k_d: Vec2<S>,
    pub k_d_prime: Vec2<S>,
    pub merged: bool,
}

/// Tolerance (relative to `kappa`) below which the two Dirac points are
/// reported as merged.
pub const MERGE_TOL_REL: f64 = 1e-6;

/// Solve for the Dirac points of a hopping set on the given lattice.
///
/// Returns `None` when the triangle inequalities on the magnitudes fail (the
/// spectrum is gapped everywhere), and errors with `NonzeroMass` when
/// `epsilon != 0`. The four sign branches of the two arccos calls are
/// enumerated, those satisfying the sine constraint kept, and the resulting
/// pair canonicalized into the first Brillouin zone.
pub fn tb_dirac_points<S: Real>(
    h: &HoppingSet<S>,
    geom: &LatticeVectors<S>,
) -> Result<Option<DiracPair<S>>> {
    h.validate()?;
    if h.epsilon != S::zero() {
        return Err(Error::NonzeroMass(h.epsilon.to_f64_lossy()));
    }
    let [m1, m2, m3] = h.magnitudes();
    if m1 == S::zero() || m2 == S::zero() || m3 == S::zero() {
        // A vanishing amplitude degenerates the triangle; treat the exact
        // boundary through the cosine-range check below with the limit value.
        return Err(Error::InvalidInput(
            "hopping magnitudes must be nonzero (take a small-amplitude limit instead)".into(),
        ));
    }

    let two = S::lit(2.0);
    let c1 = (m3 * m3 - m2 * m2 - m1 * m1) / (two * m1 * m2);
    let c2 = (m2 * m2 - m3 * m3 - m1 * m1) / (two * m1 * m3);
    let tol = S::lit(1e-12);
    if c1.abs() > S::one() + tol || c2.abs() > S::one() + tol {
        return Ok(None);
    }
    let u0 = c1.min(S::one()).max(-S::one()).acos();
    let w0 = c2.min(S::one()).max(-S::one()).acos();

    let phi1 = h.t[1].arg() - h.t[0].arg();
    let phi2 = h.t[2].arg() - h.t[0].arg();

    let sine_tol = S::lit(1e-9) * (m2 + m3);
    let mut solutions: Vec<Vec2<S>> = Vec::new();
    for (su, sw) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let u = S::lit(su) * u0;
        let w = S::lit(sw) * w0;
        if (m2 * u.sin() + m3 * w.sin()).abs() > sine_tol {
            continue;
        }
        let two_pi = S::lit(2.0) * S::PI();
        let k = (geom.b1 * (u + phi1) + geom.b2 * (w + phi2)) * (S::one() / two_pi);
        let k = geom.reduce_to_bz(k);
        if !solutions
            .iter()
            .any(|s| geom.bz_distance(*s, k) <= S::lit(MERGE_TOL_REL) * geom.kappa)
        {
            solutions.push(k);
        }
    }

    let pair = match solutions.len() {
        0 => return Ok(None), // cannot happen for |c| <= 1, kept for safety
        1 => DiracPair {
            k_d: solutions[0],
            k_d_prime: solutions[0],
            merged: true,
        },
        _ => {
            // Canonical order: larger k_y first, then larger k_x.
            let (ka, kb) = (solutions[0], solutions[1]);
            let first = if ka.y > kb.y || (ka.y == kb.y && ka.x >= kb.x) {
                (ka, kb)
            } else {
                (kb, ka)
            };
            DiracPair {
                k_d: first.0,
                k_d_prime: first.1,
                merged: false,
            }
        }
    };
    Ok(Some(pair))
}

/// Derived tight-binding scales for a uniform hopping `t0` on a lattice with
/// nearest-neighbor distance `a`: band width `W = 6 |t0|`, half-filling Fermi
/// energy `E_F = 3 |t0|`, Fermi velocity `v0 = 3 a |t0| / (2 hbar)` and the
/// effective mass `m* = epsilon / v0^2` (`hbar = 1` internally).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TbScales<S> {
    pub bandwidth: S,
    pub fermi_energy: S,
    pub fermi_velocity: S,
    pub effective_mass: S,
}

pub fn tb_scales<S: Real>(t0: Complex<S>, a: S, epsilon: S) -> Result<TbScales<S>> {
    let m = t0.norm();
    if m == S::zero() {
        return Err(Error::InvalidInput("t0 must be nonzero".into()));
    }
    let v0 = S::lit(1.5) * a * m;
    Ok(TbScales {
        bandwidth: S::lit(6.0) * m,
        fermi_energy: S::lit(3.0) * m,
        fermi_velocity: v0,
        effective_mass: epsilon / (v0 * v0),
    })
}

/// Density-of-states histogram per unit cell and per spin, with energies in
/// units of the mean hopping magnitude and origin at the Dirac energy.
#[derive(Debug, Clone)]
pub struct DosHistogram<S> {
    /// Bin centers (reduced energy).
    pub centers: Vec<S>,
    /// Total density of states per bin.
    pub rho: Vec<S>,
    /// Integral of each band's histogram (should be 1 each).
    pub band_norms: (S, S),
    /// Bin width.
    pub bin_width: S,
}

/// Flat-histogram density of states on an `n_grid x n_grid` uniform k-mesh
/// over the primitive reciprocal cell (no interpolation; the Van Hove
/// divergence shows up as a finite spike).
pub fn tb_dos<S: Real>(
    h: &HoppingSet<S>,
    geom: &LatticeVectors<S>,
    n_grid: usize,
    n_bins: usize,
) -> Result<DosHistogram<S>> {
    h.validate()?;
    if n_grid < 100 {
        return Err(Error::InvalidInput(format!(
            "DOS grid {n_grid} too coarse (need >= 100)"
        )));
    }
    if n_bins < 50 {
        return Err(Error::InvalidInput(format!(
            "DOS needs >= 50 bins, got {n_bins}"
        )));
    }
    let [m1, m2, m3] = h.magnitudes();
    let t_ref = (m1 + m2 + m3) / S::lit(3.0);

    // Conservative bound: |Z| <= sum |t_n|.
    let e_max = ((m1 + m2 + m3) / t_ref).hypot(h.epsilon / t_ref) * (S::one() + S::lit(1e-9));
    let lo = -e_max;
    let width = (e_max - lo) / S::from_usize(n_bins).unwrap();

    let mut counts_minus = vec![0u64; n_bins];
    let mut counts_plus = vec![0u64; n_bins];
    let inv_n = S::one() / S::from_usize(n_grid).unwrap();
    let half = S::lit(0.5);
    for i in 0..n_grid {
        let f1 = (S::from_usize(i).unwrap() + half) * inv_n;
        for j in 0..n_grid {
            let f2 = (S::from_usize(j).unwrap() + half) * inv_n;
            let k = geom.b1 * f1 + geom.b2 * f2;
            let (em, ep) = tb_bands(k, h, &geom.c);
            for (e, counts) in [(em, &mut counts_minus), (ep, &mut counts_plus)] {
                let x = ((e / t_ref) - lo) / width;
                let idx = x.floor().to_f64_lossy() as i64;
                let idx = idx.clamp(0, n_bins as i64 - 1) as usize;
                counts[idx] += 1;
            }
        }
    }

    let n_states = S::from_usize(n_grid * n_grid).unwrap();
    let norm = S::one() / (n_states * width);
    let mut centers = Vec::with_capacity(n_bins);
    let mut rho = Vec::with_capacity(n_bins);
    for b in 0..n_bins {
        centers.push(lo + (S::from_usize(b).unwrap() + half) * width);
        rho.push((S::from_u64(counts_minus[b]).unwrap() + S::from_u64(counts_plus[b]).unwrap()) * norm);
    }
    let integral = |counts: &[u64]| {
        counts
            .iter()
            .map(|&c| S::from_u64(c).unwrap())
            .sum::<S>()
            / n_states
    };
    Ok(DosHistogram {
        centers,
        rho,
        band_norms: (integral(&counts_minus), integral(&counts_plus)),
        bin_width: width,
    })
}

impl<S: Real> DosHistogram<S> {
    /// Least-squares slope of `rho = c |E|` over bins with `0 < |E| < window`.
    pub fn low_energy_slope(&self, window: S) -> S {
        let mut num = S::zero();
        let mut den = S::zero();
        for (c, r) in self.centers.iter().zip(self.rho.iter()) {
            let x = c.abs();
            if x > S::zero() && x < window {
                num += x * *r;
                den += x * x;
            }
        }
        num / den
    }

    /// Bin center with the largest density (the Van Hove spike).
    pub fn peak_center(&self) -> S {
        let mut best = S::zero();
        let mut best_rho = S::neg_infinity();
        for (c, r) in self.centers.iter().zip(self.rho.iter()) {
            if *r > best_rho {
                best_rho = *r;
                best = *c;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, BeamConfig};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn geom() -> LatticeVectors<f64> {
        build_geometry(&BeamConfig::balanced(32.0)).unwrap()
    }

    #[test]
    fn band_landmarks() {
        let g = geom();
        let t0 = Complex64::new(-1.0, 0.0);
        let h = HoppingSet::uniform(t0);
        let (em, ep) = tb_bands(Vec2::zero(), &h, &g.c);
        assert_abs_diff_eq!(ep, 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(em, -3.0, epsilon = 1e-13);
        let (em, ep) = tb_bands(g.k_corner, &h, &g.c);
        assert!(ep.abs() < 1e-13 && em.abs() < 1e-13);

        let h_mass = HoppingSet { epsilon: 0.3, ..h };
        let (em, ep) = tb_bands(g.k_corner, &h_mass, &g.c);
        assert_abs_diff_eq!(ep, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(em, -0.3, epsilon = 1e-12);
    }

    #[test]
    fn balanced_dirac_points_at_corners() {
        let g = geom();
        let h = HoppingSet::uniform(Complex64::new(-0.7, 0.0));
        let pair = tb_dirac_points(&h, &g).unwrap().unwrap();
        assert!(!pair.merged);
        assert!(g.bz_distance(pair.k_d, g.k_corner) < 1e-10);
        assert!(g.bz_distance(pair.k_d_prime, g.k_corner_prime) < 1e-10);
        // Opposite locations.
        assert!(g.bz_distance(pair.k_d_prime, -pair.k_d) < 1e-10);
    }

    #[test]
    fn weak_chain_limit() {
        let g = geom();
        let h = HoppingSet::gamma_family(1e-9, 1.0);
        let pair = tb_dirac_points(&h, &g).unwrap().unwrap();
        let expect = Vec2::new(0.0, 0.75);
        assert!(g.bz_distance(pair.k_d, expect) < 1e-8);
    }

    #[test]
    fn gamma_beyond_two_has_no_dirac_points() {
        let g = geom();
        let h = HoppingSet::gamma_family(2.5, 1.0);
        assert!(tb_dirac_points(&h, &g).unwrap().is_none());
    }

    #[test]
    fn gamma_two_merges_at_mid_edge() {
        let g = geom();
        let h = HoppingSet::gamma_family(2.0, 1.0);
        let pair = tb_dirac_points(&h, &g).unwrap().unwrap();
        assert!(pair.merged);
        // Mid-edge point: (b1 + b2)/2 modulo the reciprocal lattice.
        let m = (g.b1 + g.b2) * 0.5;
        assert!(g.bz_distance(pair.k_d, m) < 1e-9);
    }

    #[test]
    fn gamma_trajectory_cosine() {
        let g = geom();
        for gamma in [0.25, 0.5, 1.0, 1.5, 2.0] {
            let h = HoppingSet::gamma_family(gamma, 1.0);
            let pair = tb_dirac_points(&h, &g).unwrap().unwrap();
            // k_D = phi0 (b2 - b1) with cos(2 pi phi0) = -gamma/2; equivalently
            // cos(k_D . a2) = -gamma/2 for any representative.
            let cosine = pair.k_d.dot(g.a2).cos();
            assert_abs_diff_eq!(cosine, -gamma / 2.0, epsilon = 1e-9);
            let z = z_k(pair.k_d, &h, &g.c);
            assert!(z.norm() <= 1e-10);
        }
    }

    #[test]
    fn nonzero_mass_rejected() {
        let g = geom();
        let h = HoppingSet {
            epsilon: 0.1,
            ..HoppingSet::uniform(Complex64::new(1.0, 0.0))
        };
        assert!(matches!(
            tb_dirac_points(&h, &g),
            Err(Error::NonzeroMass(_))
        ));
    }

    #[test]
    fn global_phase_leaves_dirac_points() {
        let g = geom();
        let h = HoppingSet {
            t: [
                Complex64::new(1.3, 0.0),
                Complex64::new(0.9, 0.0),
                Complex64::new(1.1, 0.0),
            ],
            epsilon: 0.0,
        };
        let pair = tb_dirac_points(&h, &g).unwrap().unwrap();
        let chi = Complex64::from_polar(1.0, 0.8371);
        let h2 = HoppingSet {
            t: [h.t[0] * chi, h.t[1] * chi, h.t[2] * chi],
            epsilon: 0.0,
        };
        let pair2 = tb_dirac_points(&h2, &g).unwrap().unwrap();
        assert!(g.bz_distance(pair.k_d, pair2.k_d) < 1e-10);
        assert!(g.bz_distance(pair.k_d_prime, pair2.k_d_prime) < 1e-10);
    }

    #[test]
    fn single_phase_translates_cosine_argument() {
        let g = geom();
        let h = HoppingSet {
            t: [
                Complex64::new(1.2, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.95, 0.0),
            ],
            epsilon: 0.0,
        };
        let chi = 0.6143;
        let h2 = HoppingSet {
            t: [h.t[0], h.t[1] * Complex64::from_polar(1.0, chi), h.t[2]],
            epsilon: 0.0,
        };
        let p1 = tb_dirac_points(&h, &g).unwrap().unwrap();
        let p2 = tb_dirac_points(&h2, &g).unwrap().unwrap();
        // cos(k.a1 - chi) for the shifted set equals cos(k.a1) for the original.
        let c_ref = p1.k_d.dot(g.a1).cos();
        let c_new = (p2.k_d.dot(g.a1) - chi).cos();
        assert_abs_diff_eq!(c_ref, c_new, epsilon = 1e-9);
        // Both solutions still annihilate Z.
        assert!(z_k(p2.k_d, &h2, &g.c).norm() < 1e-10);
        assert!(z_k(p2.k_d_prime, &h2, &g.c).norm() < 1e-10);
    }

    #[test]
    fn dos_normalization_and_shape() {
        let g = geom();
        let h = HoppingSet::uniform(Complex64::new(-1.0, 0.0));
        let dos = tb_dos(&h, &g, 400, 120).unwrap();
        assert_abs_diff_eq!(dos.band_norms.0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dos.band_norms.1, 1.0, epsilon = 1e-12);
        // Van Hove spike at |E| = 1 within one bin.
        assert!((dos.peak_center().abs() - 1.0).abs() <= dos.bin_width);
        // rho(0) vanishes within binning resolution.
        let mid = dos
            .centers
            .iter()
            .position(|c| c.abs() < dos.bin_width / 2.0)
            .unwrap();
        assert!(dos.rho[mid] < 0.05);
        let slope = dos.low_energy_slope(0.2);
        let expect = 2.0 / (3f64.sqrt() * std::f64::consts::PI);
        assert!((slope - expect).abs() / expect < 0.1);
    }

    #[test]
    fn scales() {
        let g = geom();
        let s = tb_scales(Complex64::new(-1.0, 0.0), g.a, 0.0).unwrap();
        assert_abs_diff_eq!(s.bandwidth, 6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.fermi_energy, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.effective_mass, 0.0, epsilon = 1e-14);
        let s2 = tb_scales(Complex64::new(-2.0, 0.0), g.a, 0.0).unwrap();
        assert_abs_diff_eq!(s2.fermi_velocity, 2.0 * s.fermi_velocity, epsilon = 1e-13);
        assert_abs_diff_eq!(s2.bandwidth, 2.0 * s.bandwidth, epsilon = 1e-13);
    }
}
