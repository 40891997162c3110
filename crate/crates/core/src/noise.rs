//! Input noise statistics: squeezed optical vacuum and thermal sidemode baths.
//!
//! Kernels are stored as densities against d(omega')/2pi. The optical
//! coefficients `chi_*` follow the bracketed factors of the correlation table;
//! [`NoiseKernel::optical_matrix`] turns them into the Hermitian 2x2 block that
//! the spectrum assemblers use.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::consts::{HBAR, K_B};
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeParams {
    pub r: f64,
    pub theta: f64,
    /// Thermal photon number of the optical input.
    #[serde(default)]
    pub n_thermal: f64,
}

impl SqueezeParams {
    pub const VACUUM: SqueezeParams = SqueezeParams {
        r: 0.0,
        theta: 0.0,
        n_thermal: 0.0,
    };

    pub fn new(r: f64, theta: f64) -> Self {
        SqueezeParams {
            r,
            theta,
            n_thermal: 0.0,
        }
    }

    pub fn is_vacuum(&self) -> bool {
        self.r == 0.0 && self.n_thermal == 0.0
    }
}

/// Relation between the squeeze phase and the anomalous moment <a a>.
///
/// `Standard` uses the squeezed-vacuum result <a a> = -e^{i theta} sinh r cosh r,
/// so theta = pi squeezes the phase quadrature P. `AsPrinted` takes
/// <a a> = M_r literally, which squeezes Q at theta = pi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezeConvention {
    #[default]
    Standard,
    AsPrinted,
}

/// Returns `(N_r, M_r)` with M_r = e^{i theta} sinh r cosh r (2 N_a + 1).
pub fn squeeze_moments(sq: &SqueezeParams) -> Result<(f64, Complex64)> {
    if !(sq.r >= 0.0) {
        return Err(domain("r", "squeeze amplitude must be >= 0"));
    }
    let (s, c) = (sq.r.sinh(), sq.r.cosh());
    let n = s * s + sq.n_thermal * (s * s + c * c);
    let m = Complex64::from_polar(s * c * (2.0 * sq.n_thermal + 1.0), sq.theta);
    Ok((n, m))
}

/// Optical correlation coefficients of one squeezed input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseKernel {
    pub chi_qq: Complex64,
    pub chi_pp: Complex64,
    pub chi_qp: Complex64,
    pub chi_pq: Complex64,
}

impl NoiseKernel {
    pub fn vacuum() -> Self {
        optical_kernel(&SqueezeParams::VACUUM, SqueezeConvention::Standard).expect("vacuum kernel")
    }

    /// Hermitian covariance block of (Q_in, P_in) per unit d(omega')/2pi.
    ///
    /// The cross entries carry the factor i that the quadrature definitions
    /// imply; `chi_qp - chi_pq = 2` is then the commutator [Q, P] = i.
    pub fn optical_matrix(&self) -> [[Complex64; 2]; 2] {
        let half_i = Complex64::new(0.0, 0.5);
        [
            [0.5 * self.chi_qq, half_i * self.chi_qp],
            [half_i * self.chi_pq, 0.5 * self.chi_pp],
        ]
    }
}

pub fn optical_kernel(sq: &SqueezeParams, convention: SqueezeConvention) -> Result<NoiseKernel> {
    let (n, m_r) = squeeze_moments(sq)?;
    let m = match convention {
        SqueezeConvention::Standard => -m_r,
        SqueezeConvention::AsPrinted => m_r,
    };
    let one = Complex64::new(1.0, 0.0);
    let diag = 2.0 * n + 1.0;
    let anti = m.conj() - m;
    Ok(NoiseKernel {
        chi_qq: Complex64::new(diag + 2.0 * m.re, 0.0),
        chi_pp: Complex64::new(diag - 2.0 * m.re, 0.0),
        chi_qp: one + anti,
        chi_pq: -one + anti,
    })
}

/// Thermal force kernel of one sidemode, B_k (coth(hbar w_k / 2 k_B T) + 1)
/// with B_k = 2 pi gamma omega / omega_k. Arguments in rad/s.
pub fn thermal_kernel(omega: f64, omega_k: f64, temperature: f64, gamma: f64) -> Result<f64> {
    if omega_k == 0.0 || !omega_k.is_finite() {
        return Err(domain("omega_k", "sidemode frequency must be nonzero"));
    }
    if !(temperature >= 0.0) {
        return Err(domain("temperature", "must be >= 0"));
    }
    let b = crate::consts::TWO_PI * gamma * omega / omega_k;
    Ok(b * (coth_occupation(omega_k, temperature) + 1.0))
}

/// coth(hbar w / 2 k_B T), equal to 2 n + 1 for Bose occupation n.
fn coth_occupation(omega_k: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 1.0;
    }
    let x = HBAR * omega_k.abs() / (2.0 * K_B * temperature);
    if x > 350.0 {
        1.0
    } else {
        1.0 / x.tanh()
    }
}

/// Bose occupation at angular frequency `omega_a` (rad/s) and temperature `t`.
pub fn thermal_photon_number(omega_a: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let x = HBAR * omega_a / (K_B * t);
    if x > 50.0 {
        0.0
    } else {
        1.0 / x.exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::{ang, TWO_PI};
    use std::f64::consts::PI;

    #[test]
    fn vacuum_moments() {
        let (n, m) = squeeze_moments(&SqueezeParams::VACUUM).unwrap();
        assert_eq!(n, 0.0);
        assert_eq!(m, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn moments_r2_pi() {
        let (n, m) = squeeze_moments(&SqueezeParams::new(2.0, PI)).unwrap();
        assert!((n - 13.154).abs() < 1e-3);
        // literal value is -sinh(4)/2; the quoted -13.648 agrees to 3e-4 relative
        assert!((m.re + 4f64.sinh() / 2.0).abs() < 1e-12);
        assert!((m.re + 13.648).abs() / 13.648 < 1e-3);
        assert!(m.im.abs() < 1e-12);
    }

    #[test]
    fn minimum_uncertainty() {
        let (n, m) = squeeze_moments(&SqueezeParams::new(1.0, 0.0)).unwrap();
        assert!((m.norm_sqr() - n * (n + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn negative_r_rejected() {
        assert!(squeeze_moments(&SqueezeParams::new(-0.1, 0.0)).is_err());
    }

    #[test]
    fn vacuum_kernel() {
        let k = NoiseKernel::vacuum();
        assert_eq!(k.chi_qq.re, 1.0);
        assert_eq!(k.chi_pp.re, 1.0);
        assert_eq!(k.chi_qp, Complex64::new(1.0, 0.0));
        assert_eq!(k.chi_pq, Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn printed_convention_squeezes_q_at_pi() {
        let k = optical_kernel(&SqueezeParams::new(2.0, PI), SqueezeConvention::AsPrinted).unwrap();
        assert!((k.chi_qq.re - (-4.0f64).exp()).abs() < 1e-10);
        assert!((k.chi_pp.re - 4.0f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn standard_convention_squeezes_p_at_pi() {
        let k = optical_kernel(&SqueezeParams::new(2.0, PI), SqueezeConvention::Standard).unwrap();
        assert!((k.chi_pp.re - (-4.0f64).exp()).abs() < 1e-10);
        assert!((k.chi_qq.re - 4.0f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn quarter_turn_is_balanced() {
        let sq = SqueezeParams::new(2.0, PI / 2.0);
        let (n, _) = squeeze_moments(&sq).unwrap();
        let k = optical_kernel(&sq, SqueezeConvention::Standard).unwrap();
        assert!((k.chi_qq.re - (2.0 * n + 1.0)).abs() < 1e-9);
        assert!((k.chi_pp.re - (2.0 * n + 1.0)).abs() < 1e-9);
    }

    #[test]
    fn optical_matrix_is_hermitian_psd() {
        for &(r, th) in &[(0.0, 0.0), (0.7, 1.1), (2.0, PI), (1.5, 4.0)] {
            let k =
                optical_kernel(&SqueezeParams::new(r, th), SqueezeConvention::Standard).unwrap();
            let m = k.optical_matrix();
            assert!((m[0][1] - m[1][0].conj()).norm() < 1e-12);
            let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).re;
            assert!(m[0][0].re >= 0.0 && det >= -1e-9 * m[0][0].re * m[1][1].re);
        }
    }

    #[test]
    fn thermal_limits() {
        let wk = ang(694.6);
        let g = ang(0.8);
        let zero = thermal_kernel(wk, wk, 0.0, g).unwrap();
        assert!((zero - 2.0 * TWO_PI * g).abs() < 1e-12 * zero);
        assert_eq!(thermal_kernel(0.0, wk, 20e-9, g).unwrap(), 0.0);
        assert!(thermal_kernel(wk, 0.0, 20e-9, g).is_err());
    }

    #[test]
    fn thermal_bracket_at_20nk() {
        let wk = ang(694.6);
        let g = ang(0.8);
        let x = HBAR * wk / (2.0 * K_B * 20e-9);
        assert!((x - 0.833).abs() < 1e-3, "x = {x}");
        let v = thermal_kernel(wk, wk, 20e-9, g).unwrap() / (TWO_PI * g);
        assert!((v - 2.465).abs() < 2e-3, "{v}");
    }

    #[test]
    fn photon_numbers() {
        assert!(thermal_photon_number(ang(1e14), 300.0) < 1e-6);
        assert_eq!(thermal_photon_number(ang(1e14), 0.0), 0.0);
        let t = 1.0;
        let w = 2f64.ln() * K_B * t / HBAR;
        assert!((thermal_photon_number(w, t) - 1.0).abs() < 1e-12);
    }
}
