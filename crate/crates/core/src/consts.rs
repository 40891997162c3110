//! Physical constants (CODATA 2018 exact or recommended values).

use std::f64::consts::PI;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
pub const TWO_PI: f64 = 2.0 * PI;

/// Converts an ordinary frequency (Hz) into an angular frequency (rad/s).
#[inline]
pub fn ang(hz: f64) -> f64 {
    TWO_PI * hz
}
