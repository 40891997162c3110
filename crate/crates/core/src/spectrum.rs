//! Shared spectrum assembly: input covariance, paired quadratic forms and the
//! shot / backaction / thermal / squeeze-residual channel split.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::consts::TWO_PI;
use crate::error::Result;
use crate::floquet::FloquetPairing;
use crate::noise::{optical_kernel, thermal_kernel, NoiseKernel, SqueezeConvention, SqueezeParams};
use crate::response::OutputConvention;

/// Convention switches that have more than one defensible reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOptions {
    #[serde(default)]
    pub squeeze: SqueezeConvention,
    #[serde(default)]
    pub output: OutputConvention,
    #[serde(default)]
    pub pairing: FloquetPairing,
}

/// A spectral value split into noise channels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Channels {
    pub total: f64,
    pub shot: f64,
    pub radiation_pressure: f64,
    pub thermal: f64,
    pub squeeze_extra: f64,
}

impl Channels {
    pub fn scaled(&self, s: f64) -> Channels {
        Channels {
            total: self.total * s,
            shot: self.shot * s,
            radiation_pressure: self.radiation_pressure * s,
            thermal: self.thermal * s,
            squeeze_extra: self.squeeze_extra * s,
        }
    }

    /// Noise added by the measurement: everything except the sidemodes' own
    /// thermal and zero-point motion.
    pub fn measurement(&self) -> f64 {
        self.shot + self.radiation_pressure + self.squeeze_extra
    }

    pub fn channel_sum(&self) -> f64 {
        self.shot + self.radiation_pressure + self.thermal + self.squeeze_extra
    }
}

impl std::ops::Add for Channels {
    type Output = Channels;
    fn add(self, o: Channels) -> Channels {
        Channels {
            total: self.total + o.total,
            shot: self.shot + o.shot,
            radiation_pressure: self.radiation_pressure + o.radiation_pressure,
            thermal: self.thermal + o.thermal,
            squeeze_extra: self.squeeze_extra + o.squeeze_extra,
        }
    }
}

pub type Kernel4 = [[Complex64; 4]; 4];

/// Thermal baths of the two sidemodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baths {
    pub omega_c: f64,
    pub omega_d: f64,
    pub temperature: f64,
    pub gamma: f64,
}

/// Covariance of `(Q_in, P_in, eps_c, eps_d)` per unit d(omega')/2pi at
/// frequency `omega`. Thermal entries are taken at |omega|.
pub fn input_covariance(optical: &NoiseKernel, baths: &Baths, omega: f64) -> Result<Kernel4> {
    let z = Complex64::new(0.0, 0.0);
    let mut k = [[z; 4]; 4];
    let o = optical.optical_matrix();
    k[0][0] = o[0][0];
    k[0][1] = o[0][1];
    k[1][0] = o[1][0];
    k[1][1] = o[1][1];
    let w = omega.abs();
    k[2][2] = Complex64::new(
        thermal_kernel(w, baths.omega_c, baths.temperature, baths.gamma)? / TWO_PI,
        0.0,
    );
    k[3][3] = Complex64::new(
        thermal_kernel(w, baths.omega_d, baths.temperature, baths.gamma)? / TWO_PI,
        0.0,
    );
    Ok(k)
}

/// sum_jk c_j(omega) c_k(-omega) K_jk, restricted to the inputs in `mask`.
pub fn paired_form(
    plus: &[Complex64; 4],
    minus: &[Complex64; 4],
    k: &Kernel4,
    mask: [bool; 4],
) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..4 {
        if !mask[j] {
            continue;
        }
        for l in 0..4 {
            if mask[l] {
                acc += plus[j] * minus[l] * k[j][l];
            }
        }
    }
    acc.re
}

const OPTICAL: [bool; 4] = [true, true, false, false];
const MECHANICAL: [bool; 4] = [false, false, true, true];
const ALL: [bool; 4] = [true; 4];

/// Everything the channel split needs at one shifted frequency.
pub struct Split<'a> {
    pub actual: &'a Kernel4,
    pub vacuum: &'a Kernel4,
}

/// Splits one paired term into channels. Shot and backaction use vacuum
/// optical statistics; the squeeze residual is whatever squeezing adds on top.
pub fn split_channels(plus: &[Complex64; 4], minus: &[Complex64; 4], k: Split<'_>) -> Channels {
    let total = paired_form(plus, minus, k.actual, ALL);
    let shot = 0.5 * (plus[1] * minus[1]).re;
    let optical_vac = paired_form(plus, minus, k.vacuum, OPTICAL);
    let thermal = paired_form(plus, minus, k.actual, MECHANICAL);
    let radiation_pressure = optical_vac - shot;
    Channels {
        total,
        shot,
        radiation_pressure,
        thermal,
        squeeze_extra: total - shot - radiation_pressure - thermal,
    }
}

/// Optical kernels for the requested squeezing and for vacuum.
pub fn optical_pair(
    sq: &SqueezeParams,
    convention: SqueezeConvention,
) -> Result<(NoiseKernel, NoiseKernel)> {
    Ok((optical_kernel(sq, convention)?, NoiseKernel::vacuum()))
}
