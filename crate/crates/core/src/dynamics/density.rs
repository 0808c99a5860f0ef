use num_complex::Complex64;
use serde::Serialize;

use crate::levels::Qubit;

/// Reduced density matrix of the qubit in the `(u, d)` basis. Hermitian by
/// construction: `rho_du` is the conjugate of `rho_ud`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityMatrix {
    pub rho_uu: f64,
    pub rho_dd: f64,
    pub rho_ud: Complex64,
}

impl DensityMatrix {
    pub fn basis(q: Qubit) -> Self {
        match q {
            Qubit::Up => DensityMatrix { rho_uu: 1.0, rho_dd: 0.0, rho_ud: Complex64::new(0.0, 0.0) },
            Qubit::Down => DensityMatrix { rho_uu: 0.0, rho_dd: 1.0, rho_ud: Complex64::new(0.0, 0.0) },
        }
    }

    /// Projector onto the normalized state `c_u |u> + c_d |d>`.
    pub fn from_amplitudes(c_u: Complex64, c_d: Complex64) -> Self {
        let norm = c_u.norm_sqr() + c_d.norm_sqr();
        DensityMatrix { rho_uu: c_u.norm_sqr() / norm, rho_dd: c_d.norm_sqr() / norm, rho_ud: c_u * c_d.conj() / norm }
    }

    /// Point on or inside the Bloch ball, `rho = (I + x sx + y sy + z sz) / 2`.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Self {
        DensityMatrix { rho_uu: 0.5 * (1.0 + z), rho_dd: 0.5 * (1.0 - z), rho_ud: Complex64::new(0.5 * x, -0.5 * y) }
    }

    pub fn rho_du(&self) -> Complex64 {
        self.rho_ud.conj()
    }

    pub fn trace(&self) -> f64 {
        self.rho_uu + self.rho_dd
    }

    pub fn purity(&self) -> f64 {
        self.rho_uu * self.rho_uu + self.rho_dd * self.rho_dd + 2.0 * self.rho_ud.norm_sqr()
    }

    /// Eigenvalues, smaller first.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * self.trace();
        let half_gap = (0.25 * (self.rho_uu - self.rho_dd).powi(2) + self.rho_ud.norm_sqr()).sqrt();
        [mean - half_gap, mean + half_gap]
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        [2.0 * self.rho_ud.re, -2.0 * self.rho_ud.im, self.rho_uu - self.rho_dd]
    }

    pub(crate) fn to_matrix(self) -> [[Complex64; 2]; 2] {
        [[Complex64::new(self.rho_uu, 0.0), self.rho_ud], [self.rho_ud.conj(), Complex64::new(self.rho_dd, 0.0)]]
    }

    /// Rebuild from a full matrix, symmetrizing away rounding in the
    /// off-diagonal pair.
    pub(crate) fn from_matrix(m: [[Complex64; 2]; 2]) -> Self {
        DensityMatrix { rho_uu: m[0][0].re, rho_dd: m[1][1].re, rho_ud: 0.5 * (m[0][1] + m[1][0].conj()) }
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (self.rho_uu - other.rho_uu)
            .abs()
            .max((self.rho_dd - other.rho_dd).abs())
            .max((self.rho_ud - other.rho_ud).norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bloch_round_trip() {
        let rho = DensityMatrix::from_bloch(0.3, -0.4, 0.5);
        let [x, y, z] = rho.bloch_vector();
        assert!((x - 0.3).abs() < 1e-15 && (y + 0.4).abs() < 1e-15 && (z - 0.5).abs() < 1e-15);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pure_state_eigenvalues() {
        let rho = DensityMatrix::from_amplitudes(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
        let [lo, hi] = rho.eigenvalues();
        assert!(lo.abs() < 1e-15);
        assert!((hi - 1.0).abs() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_state_eigenvalues() {
        let rho = DensityMatrix::from_bloch(0.0, 0.0, 0.0);
        assert_eq!(rho.eigenvalues(), [0.5, 0.5]);
        assert!((rho.purity() - 0.5).abs() < 1e-15);
    }
}
