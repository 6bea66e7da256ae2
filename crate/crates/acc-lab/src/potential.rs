//! Pair interaction potentials `phi(r) = f(|r|)`, their derivatives, decay
//! moduli, and the Cauchy–Born stored energy density.
//!
//! The interaction range is truncated by *reference* bond length (the bond
//! list stops at the cutoff), so the scalar profile is never smoothed and
//! stays C^infinity on `(0, inf)`; deformed bond lengths may exceed the
//! cutoff without harm.

use nalgebra::{Matrix2, Vector2};

use crate::lattice::{OrbitDecomposition, SQRT3};
use crate::{Error, Result};

/// The potential family.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialKind {
    /// `f(s) = depth * ((r0/s)^12 - 2 (r0/s)^6)`: minimum `-depth` at `s = r0`.
    LennardJones,
    /// `f(s) = depth * (e^{-2 a x} - 2 e^{-a x})`, `x = s/r0 - 1`.
    Morse { alpha: f64 },
}

/// A pair potential with configurable well depth and equilibrium spacing.
///
/// The defaults (`depth = 1`, `spacing = 1`) put the minimum of the scalar
/// profile at the lattice spacing with unit depth.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PairPotential {
    #[serde(flatten)]
    pub kind: PotentialKind,
    /// Well depth (energy scale).
    #[serde(default = "one")]
    pub depth: f64,
    /// Location of the scalar minimum (length scale).
    #[serde(default = "one")]
    pub spacing: f64,
    /// Bond lengths below this floor raise a singularity error.
    #[serde(default = "default_min_radius")]
    pub min_radius: f64,
}

fn one() -> f64 {
    1.0
}

fn default_min_radius() -> f64 {
    1e-8
}

/// Default Morse stiffness parameter.
pub const DEFAULT_MORSE_ALPHA: f64 = 4.0;

impl PairPotential {
    pub fn lennard_jones() -> Self {
        PairPotential {
            kind: PotentialKind::LennardJones,
            depth: 1.0,
            spacing: 1.0,
            min_radius: 1e-8,
        }
    }

    pub fn morse(alpha: f64) -> Self {
        PairPotential {
            kind: PotentialKind::Morse { alpha },
            depth: 1.0,
            spacing: 1.0,
            min_radius: 1e-8,
        }
    }

    /// Scalar profile `f(s)`.
    pub fn phi(&self, s: f64) -> f64 {
        let (e, r0) = (self.depth, self.spacing);
        match self.kind {
            PotentialKind::LennardJones => {
                let q = r0 / s;
                let q6 = q.powi(6);
                e * (q6 * q6 - 2.0 * q6)
            }
            PotentialKind::Morse { alpha } => {
                let x = s / r0 - 1.0;
                e * ((-2.0 * alpha * x).exp() - 2.0 * (-alpha * x).exp())
            }
        }
    }

    /// First derivative `f'(s)`.
    pub fn dphi(&self, s: f64) -> f64 {
        let (e, r0) = (self.depth, self.spacing);
        match self.kind {
            PotentialKind::LennardJones => {
                let q = r0 / s;
                let q6 = q.powi(6);
                -12.0 * e / s * (q6 * q6 - q6)
            }
            PotentialKind::Morse { alpha } => {
                let x = s / r0 - 1.0;
                2.0 * alpha * e / r0 * ((-alpha * x).exp() - (-2.0 * alpha * x).exp())
            }
        }
    }

    /// Second derivative `f''(s)`.
    pub fn ddphi(&self, s: f64) -> f64 {
        let (e, r0) = (self.depth, self.spacing);
        match self.kind {
            PotentialKind::LennardJones => {
                let q = r0 / s;
                let q6 = q.powi(6);
                e / (s * s) * (156.0 * q6 * q6 - 84.0 * q6)
            }
            PotentialKind::Morse { alpha } => {
                let x = s / r0 - 1.0;
                2.0 * alpha * alpha * e / (r0 * r0)
                    * (2.0 * (-2.0 * alpha * x).exp() - (-alpha * x).exp())
            }
        }
    }

    /// Third derivative `f'''(s)` (used only by the decay moduli).
    pub fn dddphi(&self, s: f64) -> f64 {
        let (e, r0) = (self.depth, self.spacing);
        match self.kind {
            PotentialKind::LennardJones => {
                let q = r0 / s;
                let q6 = q.powi(6);
                e / (s * s * s) * (-2184.0 * q6 * q6 + 672.0 * q6)
            }
            PotentialKind::Morse { alpha } => {
                let x = s / r0 - 1.0;
                2.0 * alpha.powi(3) * e / r0.powi(3)
                    * ((-alpha * x).exp() - 4.0 * (-2.0 * alpha * x).exp())
            }
        }
    }

    /// Value, gradient, and Hessian of the vector potential `phi(r) = f(|r|)`.
    ///
    /// The gradient is `f'(|r|) r/|r|`; the Hessian is
    /// `f''(|r|) rh⊗rh + (f'(|r|)/|r|) (1 - rh⊗rh)` with `rh = r/|r|`.
    pub fn value_grad_hess(&self, r: Vector2<f64>) -> Result<(f64, Vector2<f64>, Matrix2<f64>)> {
        let s = r.norm();
        if s < self.min_radius {
            return Err(Error::invalid(format!(
                "bond length {s:.3e} below the singularity floor {:.1e}",
                self.min_radius
            )));
        }
        let rh = r / s;
        let (v, d1, d2) = (self.phi(s), self.dphi(s), self.ddphi(s));
        let para = rh * rh.transpose();
        let perp = Matrix2::identity() - para;
        Ok((v, rh * d1, para * d2 + perp * (d1 / s)))
    }

    /// Decay modulus `M_k(s)`: the supremum over `t >= s` of the Frobenius
    /// norm of the k-th derivative tensor of `phi`, expressed through the
    /// scalar profile:
    ///
    /// * `M_0 = sup |f|`,
    /// * `M_1 = sup |f'|`,
    /// * `M_2 = sup sqrt(f''^2 + (f'/t)^2)`,
    /// * `M_3 = sup sqrt(f'''^2 + 3 (f''/t - f'/t^2)^2)`.
    ///
    /// Evaluated by a step-1e-3 grid scan with parabolic refinement on
    /// `[s, s_tail]`; beyond `s_tail = max(s, 4 spacing)` every profile in
    /// this module decays monotonically, so the tail supremum is the grid's
    /// last point.
    pub fn decay_modulus(&self, k: usize, s: f64) -> f64 {
        assert!(k <= 3, "decay modulus defined for k = 0..3");
        assert!(s > 0.0, "decay modulus needs s > 0");
        let f = |t: f64| -> f64 {
            match k {
                0 => self.phi(t).abs(),
                1 => self.dphi(t).abs(),
                2 => (self.ddphi(t).powi(2) + (self.dphi(t) / t).powi(2)).sqrt(),
                _ => {
                    let a = self.dddphi(t);
                    let b = self.ddphi(t) / t - self.dphi(t) / (t * t);
                    (a * a + 3.0 * b * b).sqrt()
                }
            }
        };
        let s_tail = (4.0 * self.spacing).max(s);
        let step = 1e-3;
        let n = ((s_tail - s) / step).ceil() as usize + 1;
        let mut best = f(s_tail);
        let mut best_t = s_tail;
        for i in 0..n {
            let t = s + (i as f64) * step;
            let v = f(t.min(s_tail));
            if v > best {
                best = v;
                best_t = t.min(s_tail);
            }
        }
        // Parabolic refinement around the grid argmax.
        let (lo, hi) = ((best_t - step).max(s), (best_t + step).min(s_tail));
        let mut refined = best;
        let m = 32;
        for i in 0..=m {
            let t = lo + (hi - lo) * i as f64 / m as f64;
            refined = refined.max(f(t));
        }
        refined
    }

    /// Cauchy–Born stored energy density
    /// `W(F) = (1/det A6) sum_{|r| <= cutoff} f(|F r|) = (2/sqrt3) sum f(|F r|)`.
    pub fn cauchy_born_density(&self, f: &Matrix2<f64>, orbits: &OrbitDecomposition) -> Result<f64> {
        let sigma_min = f.singular_values().min();
        if sigma_min < self.min_radius {
            return Err(Error::invalid(format!(
                "deformation gradient is degenerate (sigma_min = {sigma_min:.3e})"
            )));
        }
        let mut sum = 0.0;
        for orbit in &orbits.orbits {
            let mut shell = 0.0;
            for &m in &orbit.members {
                let c = crate::lattice::cartesian(m);
                let fr = f * Vector2::new(c[0], c[1]);
                shell += self.phi(fr.norm());
            }
            sum += shell;
        }
        Ok(2.0 / SQRT3 * sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};

    #[test]
    fn lennard_jones_reference_values() {
        let lj = PairPotential::lennard_jones();
        assert_eq!(lj.phi(1.0), -1.0);
        assert_eq!(lj.dphi(1.0), 0.0);
        assert_eq!(lj.ddphi(1.0), 72.0);
        let (v, g, h) = lj.value_grad_hess(Vector2::new(1.0, 0.0)).unwrap();
        assert_eq!(v, -1.0);
        assert_eq!(g, Vector2::zeros());
        assert_relative_eq!(h, Matrix2::new(72.0, 0.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn morse_reference_values() {
        let m = PairPotential::morse(4.0);
        assert_relative_eq!(m.phi(1.0), -1.0, max_relative = 1e-15);
        assert_abs_diff_eq!(m.dphi(1.0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(m.ddphi(1.0), 32.0, max_relative = 1e-13);
    }

    #[test]
    fn hessian_axis_aligned_eigenstructure() {
        for pot in [PairPotential::lennard_jones(), PairPotential::morse(4.0)] {
            for s in [0.9, 1.0, 1.7, 2.9] {
                let (_, _, h) = pot.value_grad_hess(Vector2::new(s, 0.0)).unwrap();
                assert_relative_eq!(h[(0, 0)], pot.ddphi(s), max_relative = 1e-13);
                assert_relative_eq!(h[(1, 1)], pot.dphi(s) / s, max_relative = 1e-13);
                assert_abs_diff_eq!(h[(0, 1)], 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let h = 1e-5;
        for pot in [PairPotential::lennard_jones(), PairPotential::morse(4.0)] {
            for _ in 0..100 {
                let len = rng.gen_range(0.8..3.0);
                let ang = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = Vector2::new(len * ang.cos(), len * ang.sin());
                let (_, g, hess) = pot.value_grad_hess(r).unwrap();
                let scale = 1.0 + g.norm();
                for k in 0..2 {
                    let mut dp = r;
                    let mut dm = r;
                    dp[k] += h;
                    dm[k] -= h;
                    let fd = (pot.phi(dp.norm()) - pot.phi(dm.norm())) / (2.0 * h);
                    assert_abs_diff_eq!(g[k], fd, epsilon = 1e-6 * scale);
                    let (_, gp, _) = pot.value_grad_hess(dp).unwrap();
                    let (_, gm, _) = pot.value_grad_hess(dm).unwrap();
                    let col = (gp - gm) / (2.0 * h);
                    let hscale = 1.0 + hess.norm();
                    for l in 0..2 {
                        assert_abs_diff_eq!(hess[(l, k)], col[l], epsilon = 1e-5 * hscale);
                    }
                }
            }
        }
    }

    #[test]
    fn singularity_floor_rejects_collapsed_bonds() {
        let lj = PairPotential::lennard_jones();
        assert!(lj.value_grad_hess(Vector2::new(1e-9, 0.0)).is_err());
    }

    #[test]
    fn decay_moduli_are_monotone_and_vanish() {
        for pot in [PairPotential::lennard_jones(), PairPotential::morse(4.0)] {
            for k in 0..=3 {
                let mut prev = f64::INFINITY;
                let mut s = 0.9;
                while s < 3.5 {
                    let m = pot.decay_modulus(k, s);
                    assert!(m <= prev + 1e-12, "M_{k} must be nonincreasing");
                    prev = m;
                    s += 0.1;
                }
                assert!(pot.decay_modulus(k, 12.0) < 1e-4);
            }
        }
    }

    #[test]
    fn lj_first_decay_modulus_attains_inflection_maximum() {
        // |f'| peaks where f'' = 0: s* = (13/7)^{1/6}, |f'(s*)| = 504/(169 s*).
        let lj = PairPotential::lennard_jones();
        let s_star = (13.0f64 / 7.0).powf(1.0 / 6.0);
        let expected = 504.0 / (169.0 * s_star);
        assert_relative_eq!(lj.decay_modulus(1, 1.0), expected, max_relative = 1e-6);
        // On the monotone tail the supremum is attained at the left end.
        for s in [1.5, 2.0, 2.5] {
            assert_relative_eq!(lj.decay_modulus(1, s), lj.dphi(s).abs(), max_relative = 1e-9);
        }
    }

    #[test]
    fn cauchy_born_density_at_identity_matches_shell_oracle() {
        // Direct shell sum with exact rational terms:
        // f(1) = -1, f(sqrt3) = -53/729, f(2) = -127/4096,
        // f(sqrt7) = -685/117649, f(3) = -1457/531441.
        let per_site = -6.0 - 318.0 / 729.0 - 762.0 / 4096.0 - 8220.0 / 117649.0
            - 8742.0 / 531441.0;
        let oracle = 2.0 / SQRT3 * per_site;
        assert_relative_eq!(oracle, -7.746387, max_relative = 1e-6);

        let lj = PairPotential::lennard_jones();
        let orbits = OrbitDecomposition::up_to(3.1).unwrap();
        let w = lj.cauchy_born_density(&Matrix2::identity(), &orbits).unwrap();
        assert_relative_eq!(w, oracle, max_relative = 1e-13);
    }

    #[test]
    fn cauchy_born_density_symmetries() {
        let lj = PairPotential::lennard_jones();
        let orbits = OrbitDecomposition::up_to(3.1).unwrap();
        let f = Matrix2::new(1.02, 0.03, -0.01, 0.97);
        let w = lj.cauchy_born_density(&f, &orbits).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let q = Matrix2::new(a.cos(), -a.sin(), a.sin(), a.cos());
            let wq = lj.cauchy_born_density(&(q * f), &orbits).unwrap();
            assert_relative_eq!(wq, w, max_relative = 1e-12);
        }
        // Lattice symmetry: postcomposition with the 60-degree rotation.
        let c = 0.5;
        let s = 0.5 * SQRT3;
        let q6 = Matrix2::new(c, -s, s, c);
        let w6 = lj.cauchy_born_density(&(f * q6), &orbits).unwrap();
        assert_relative_eq!(w6, w, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_gradient_is_rejected() {
        let lj = PairPotential::lennard_jones();
        let orbits = OrbitDecomposition::up_to(3.1).unwrap();
        let f = Matrix2::new(1.0, 0.0, 0.0, 0.0);
        assert!(lj.cauchy_born_density(&f, &orbits).is_err());
    }
}
