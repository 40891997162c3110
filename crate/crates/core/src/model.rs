//! Physical parameters of the condensate-cavity system and the closed-form
//! frequencies derived from them.
//!
//! Frequency-like inputs are stored as ordinary frequencies in Hz. Everything
//! in [`Derived`] is angular (rad/s); the conversion happens once, in
//! [`Derived::new`].

use serde::{Deserialize, Serialize};

use crate::consts::{ang, HBAR};
use crate::error::{domain, Result};

/// Cavity detuning, either the bare value or the effective one that already
/// includes the static optomechanical shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "hz", rename_all = "snake_case")]
pub enum Detuning {
    Bare(f64),
    Effective(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub atom_count: f64,
    /// Moment of inertia divided by hbar, in seconds.
    pub inertia_over_hbar: f64,
    /// Persistent-current winding number. Physically an integer; kept real so
    /// spectra can be differentiated with respect to it.
    pub winding: f64,
    /// Orbital angular momentum of the drive light.
    pub oam: u32,
    /// Interaction rate gN, Hz.
    pub collision_hz: f64,
    /// Single-photon optomechanical coupling G, Hz.
    pub coupling_hz: f64,
    pub kappa_hz: f64,
    pub gamma_hz: f64,
    pub detuning: Detuning,
    /// Drive power, W.
    pub power_w: f64,
    pub laser_hz: f64,
    /// Sidemode (condensate) temperature, K.
    pub bec_temperature_k: f64,
    /// Temperature of the optical environment, K.
    pub ambient_temperature_k: f64,
}

impl SystemParams {
    /// Sodium condensate with N = 1e4 atoms in a 12 um ring, probed at 12.4 fW.
    pub fn paper_defaults() -> Self {
        SystemParams {
            atom_count: 1e4,
            inertia_over_hbar: 0.0505,
            winding: 1.0,
            oam: 10,
            collision_hz: 14.0,
            coupling_hz: 7.5e3,
            kappa_hz: 2e6,
            gamma_hz: 0.8,
            detuning: Detuning::Effective(0.0),
            power_w: 12.4e-15,
            laser_hz: 1e14,
            bec_temperature_k: 20e-9,
            ambient_temperature_k: 300.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("atom_count", self.atom_count),
            ("inertia_over_hbar", self.inertia_over_hbar),
            ("kappa_hz", self.kappa_hz),
            ("laser_hz", self.laser_hz),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(name, format!("must be finite and > 0, got {v}")));
            }
        }
        let non_negative = [
            ("gamma_hz", self.gamma_hz),
            ("collision_hz", self.collision_hz),
            ("coupling_hz", self.coupling_hz),
            ("power_w", self.power_w),
            ("bec_temperature_k", self.bec_temperature_k),
            ("ambient_temperature_k", self.ambient_temperature_k),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(domain(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if self.oam == 0 {
            return Err(domain("oam", "must be a positive integer"));
        }
        if !self.winding.is_finite() {
            return Err(domain("winding", "must be finite"));
        }
        Ok(())
    }

    pub fn with_power(&self, power_w: f64) -> Self {
        SystemParams {
            power_w,
            ..self.clone()
        }
    }

    pub fn with_winding(&self, winding: f64) -> Self {
        SystemParams {
            winding,
            ..self.clone()
        }
    }
}

/// Angular frequencies derived from [`SystemParams`]. All in rad/s except
/// `coupling_a` (rad^2/s^2) and `eta` (1/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub omega_c: f64,
    pub omega_d: f64,
    pub big_omega_c: f64,
    pub big_omega_d: f64,
    pub coupling_a: f64,
    pub omega_tilde_c: f64,
    pub omega_tilde_d: f64,
    pub omega_m: f64,
    /// Half the sidemode splitting, the BAE readout frequency.
    pub half_gap: f64,
    pub eta: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub g: f64,
    pub gn: f64,
}

impl Derived {
    pub fn new(p: &SystemParams) -> Result<Self> {
        p.validate()?;
        let (omega_c, omega_d) = sidemode_frequencies(p)?;
        let shift = collision_shift(p, omega_c, omega_d)?;
        Ok(Derived {
            omega_c,
            omega_d,
            big_omega_c: shift.big_omega_c,
            big_omega_d: shift.big_omega_d,
            coupling_a: shift.coupling_a,
            omega_tilde_c: shift.omega_tilde_c,
            omega_tilde_d: shift.omega_tilde_d,
            omega_m: 0.5 * (omega_c + omega_d),
            half_gap: 0.5 * (omega_c - omega_d),
            eta: drive_amplitude(p)?,
            kappa: ang(p.kappa_hz),
            gamma: ang(p.gamma_hz),
            g: ang(p.coupling_hz),
            gn: ang(p.collision_hz),
        })
    }

    /// Same system with collisions switched off.
    pub fn without_collisions(&self) -> Self {
        Derived {
            big_omega_c: self.omega_c,
            big_omega_d: self.omega_d,
            coupling_a: 0.0,
            omega_tilde_c: self.omega_c,
            omega_tilde_d: self.omega_d,
            gn: 0.0,
            ..*self
        }
    }
}

/// Sidemode frequencies `(omega_c, omega_d)` in rad/s for windings L_p +- 2l.
pub fn sidemode_frequencies(p: &SystemParams) -> Result<(f64, f64)> {
    if !(p.inertia_over_hbar > 0.0) {
        return Err(domain("inertia_over_hbar", "must be > 0"));
    }
    let two_l = 2.0 * f64::from(p.oam);
    let c = (p.winding + two_l).powi(2) / (2.0 * p.inertia_over_hbar);
    let d = (p.winding - two_l).powi(2) / (2.0 * p.inertia_over_hbar);
    Ok((c, d))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionShift {
    pub big_omega_c: f64,
    pub big_omega_d: f64,
    pub coupling_a: f64,
    pub omega_tilde_c: f64,
    pub omega_tilde_d: f64,
}

/// Exact collisional renormalisation of the sidemode frequencies.
pub fn collision_shift(p: &SystemParams, omega_c: f64, omega_d: f64) -> Result<CollisionShift> {
    if !(p.collision_hz >= 0.0) {
        return Err(domain("collision_hz", "must be >= 0"));
    }
    let gn = ang(p.collision_hz);
    let shifted = |w: f64| ((w + 4.0 * gn).powi(2) - 4.0 * gn * gn).sqrt();
    Ok(CollisionShift {
        big_omega_c: shifted(omega_c),
        big_omega_d: shifted(omega_d),
        coupling_a: 2.0 * gn * (omega_c - omega_d),
        omega_tilde_c: omega_c + 2.0 * gn,
        omega_tilde_d: omega_d + 2.0 * gn,
    })
}

/// Small-interaction estimate of the collisional shift. Diagnostic only.
pub fn collision_shift_estimate(p: &SystemParams) -> f64 {
    let gn = ang(p.collision_hz);
    2.0 * gn * (2.0 - gn)
}

/// Drive amplitude eta = sqrt(P kappa / (hbar omega_a)), in 1/s.
pub fn drive_amplitude(p: &SystemParams) -> Result<f64> {
    amplitude_for_power(p.power_w, p.kappa_hz, p.laser_hz)
}

pub(crate) fn amplitude_for_power(power_w: f64, kappa_hz: f64, laser_hz: f64) -> Result<f64> {
    if !(power_w >= 0.0) {
        return Err(domain("power_w", "must be >= 0"));
    }
    if !(laser_hz > 0.0) {
        return Err(domain("laser_hz", "must be > 0"));
    }
    Ok((power_w * ang(kappa_hz) / (HBAR * ang(laser_hz))).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingGap {
    /// omega_c - omega_d, rad/s.
    pub full: f64,
    /// (omega_c - omega_d)/2, rad/s.
    pub half: f64,
}

pub fn winding_gap(winding: f64, oam: u32, inertia_over_hbar: f64) -> WindingGap {
    let full = 4.0 * winding * f64::from(oam) / inertia_over_hbar;
    WindingGap {
        full,
        half: 0.5 * full,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::TWO_PI;

    fn hz(w: f64) -> f64 {
        w / TWO_PI
    }

    #[test]
    fn sidemodes_at_default_geometry() {
        let p = SystemParams::paper_defaults();
        let (c, d) = sidemode_frequencies(&p).unwrap();
        // (21^2/2/0.0505)/2pi and (19^2/2/0.0505)/2pi
        assert!((hz(c) - 441.0 / 0.101 / TWO_PI).abs() < 1e-12);
        assert!((hz(c) - 694.9).abs() < 0.5, "{}", hz(c));
        assert!((hz(d) - 568.9).abs() < 0.5, "{}", hz(d));
    }

    #[test]
    fn degenerate_without_winding() {
        let p = SystemParams::paper_defaults().with_winding(0.0);
        let (c, d) = sidemode_frequencies(&p).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn rejects_bad_inertia() {
        let mut p = SystemParams::paper_defaults();
        p.inertia_over_hbar = 0.0;
        assert!(sidemode_frequencies(&p).is_err());
        p.inertia_over_hbar = -1.0;
        assert!(Derived::new(&p).is_err());
    }

    #[test]
    fn collision_shift_values() {
        let p = SystemParams::paper_defaults();
        let d = Derived::new(&p).unwrap();
        assert!(
            (hz(d.big_omega_c) - 750.4).abs() < 0.5,
            "{}",
            hz(d.big_omega_c)
        );
        assert!(
            (hz(d.big_omega_d) - 624.2).abs() < 0.5,
            "{}",
            hz(d.big_omega_d)
        );
        let expect_a = 2.0 * ang(14.0) * (d.omega_c - d.omega_d);
        assert!((d.coupling_a - expect_a).abs() <= 1e-12 * expect_a);
        assert_eq!(d.omega_tilde_c, d.omega_c + 2.0 * ang(14.0));
    }

    #[test]
    fn no_collisions_is_identity() {
        let mut p = SystemParams::paper_defaults();
        p.collision_hz = 0.0;
        let d = Derived::new(&p).unwrap();
        assert_eq!(d.big_omega_c, d.omega_c);
        assert_eq!(d.big_omega_d, d.omega_d);
        assert_eq!(d.coupling_a, 0.0);
        assert_eq!(d.omega_tilde_d, d.omega_d);
    }

    #[test]
    fn estimate_is_far_from_exact_shift() {
        let p = SystemParams::paper_defaults();
        let d = Derived::new(&p).unwrap();
        let exact = d.big_omega_c - d.omega_c;
        assert!((collision_shift_estimate(&p) - exact).abs() > exact);
    }

    #[test]
    fn drive_amplitude_values() {
        let p = SystemParams::paper_defaults();
        let eta = drive_amplitude(&p).unwrap();
        let by_hand = (12.4e-15 * TWO_PI * 2e6 / (1.054_571_817e-34 * TWO_PI * 1e14)).sqrt();
        assert!((eta - by_hand).abs() < 1e-9 * by_hand);
        assert!((eta - 1.53e6).abs() < 0.01e6);
        assert_eq!(drive_amplitude(&p.with_power(0.0)).unwrap(), 0.0);
        let quad = drive_amplitude(&p.with_power(4.0 * p.power_w)).unwrap();
        assert!((quad - 2.0 * eta).abs() < 1e-12 * eta);
        assert!(drive_amplitude(&p.with_power(-1.0)).is_err());
    }

    #[test]
    fn gap_values() {
        let g = winding_gap(1.0, 10, 0.0505);
        assert!((hz(g.half) - 63.03).abs() < 0.05);
        assert_eq!(winding_gap(0.0, 10, 0.0505).full, 0.0);
        let g3 = winding_gap(3.0, 10, 0.0505);
        assert!((hz(g3.full) - 378.2).abs() < 0.1);
        let g2 = winding_gap(2.0, 10, 0.0505);
        assert!((hz(g2.full) - 252.1).abs() < 0.1);
    }
}
