//! Figures of merit built on the spectra: the sensitivity zeta(omega), its
//! optimum, squeezing enhancement, and noise budgets against drive power.
//!
//! zeta is reported in units of hbar * sqrt(s): the derivative is taken with
//! respect to the winding number, so dividing by hbar once more gives the
//! angular-momentum form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consts::ang;
use crate::error::{Error, Result};
use crate::floquet::{bae_measurement_time, bae_spectrum, BaeDrive, BaeSystem};
use crate::model::{Derived, SystemParams};
use crate::noise::SqueezeParams;
use crate::numeric::{golden_min, linspace};
use crate::response::{default_grid, spectral_density, MonoSystem};
use crate::spectrum::{Channels, ModelOptions};

/// Finite-difference step in the winding number.
pub const WINDING_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    /// Single-tone drive, homodyne angle `phi`.
    Mono { phi: f64 },
    /// Two tones of `power_w` each (the system's input power), locked to omega_m.
    Bae,
}

impl Scheme {
    pub fn mono() -> Self {
        Scheme::Mono {
            phi: std::f64::consts::FRAC_PI_2,
        }
    }
}

/// A system ready to be evaluated under either scheme.
#[derive(Debug, Clone)]
pub enum Built {
    Mono(MonoSystem, f64),
    Bae(BaeSystem),
}

impl Built {
    /// `delta` pins the BAE tone offset (rad/s) instead of following omega_m.
    pub fn new(
        scheme: Scheme,
        p: &SystemParams,
        opts: ModelOptions,
        delta: Option<f64>,
    ) -> Result<Self> {
        match scheme {
            Scheme::Mono { phi } => Ok(Built::Mono(MonoSystem::new(p, opts)?, phi)),
            Scheme::Bae => {
                let drive = BaeDrive {
                    power_plus_w: p.power_w,
                    power_minus_w: p.power_w,
                    delta_hz: delta.map(|d| d / crate::consts::TWO_PI),
                };
                Ok(Built::Bae(BaeSystem::new(p, &drive, opts)?))
            }
        }
    }

    pub fn spectrum(&self, omega: f64, sq: &SqueezeParams) -> Result<Channels> {
        match self {
            Built::Mono(s, phi) => spectral_density(omega, *phi, s, sq),
            Built::Bae(s) => bae_spectrum(omega, s, sq),
        }
    }

    /// Measurement time, s. Frequency independent for the single-tone drive.
    pub fn measurement_time(&self, omega: f64) -> f64 {
        match self {
            Built::Mono(s, _) => {
                let d = &s.derived;
                d.kappa / (8.0 * s.steady.n * d.g * d.g)
            }
            Built::Bae(s) => bae_measurement_time(omega, s),
        }
    }

    pub fn derived(&self) -> &Derived {
        match self {
            Built::Mono(s, _) => &s.derived,
            Built::Bae(s) => &s.derived,
        }
    }

    /// Frequencies around which zeta has its minima, rad/s.
    pub fn resonances(&self) -> Vec<f64> {
        match self {
            Built::Mono(s, _) => vec![s.derived.big_omega_d, s.derived.big_omega_c],
            Built::Bae(s) => vec![s.derived.half_gap],
        }
    }
}

/// Spectrum at the nominal winding and at +-h around it.
pub struct Triple {
    pub base: Built,
    pub plus: Built,
    pub minus: Built,
    pub h: f64,
}

impl Triple {
    pub fn new(scheme: Scheme, p: &SystemParams, opts: ModelOptions, h: f64) -> Result<Self> {
        let base = Built::new(scheme, p, opts, None)?;
        let delta = match &base {
            Built::Bae(s) => Some(s.delta()),
            Built::Mono(..) => None,
        };
        Ok(Triple {
            plus: Built::new(scheme, &p.with_winding(p.winding + h), opts, delta)?,
            minus: Built::new(scheme, &p.with_winding(p.winding - h), opts, delta)?,
            base,
            h,
        })
    }

    /// zeta at `omega`; +inf where the spectrum does not respond to winding.
    pub fn zeta(&self, omega: f64, sq: &SqueezeParams) -> Result<f64> {
        let s = self.base.spectrum(omega, sq)?.total;
        let ds = (self.plus.spectrum(omega, sq)?.total - self.minus.spectrum(omega, sq)?.total)
            / (2.0 * self.h);
        Ok(zeta_value(s, ds, self.base.measurement_time(omega)))
    }
}

/// |S / S'| sqrt(t).
pub fn zeta_value(s: f64, ds: f64, t_meas: f64) -> f64 {
    if ds == 0.0 || !ds.is_finite() {
        f64::INFINITY
    } else {
        (s / ds).abs() * t_meas.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCurve {
    pub omega: Vec<f64>,
    pub zeta: Vec<f64>,
    pub omega_opt: f64,
    pub zeta_opt: f64,
    /// Interior local minima `(omega, zeta)`, best first.
    pub local_minima: Vec<(f64, f64)>,
}

/// Grid for zeta: +-6 gamma windows around each resonance.
pub fn resonance_windows(built: &Built, points_per_window: usize) -> Vec<f64> {
    let d = built.derived();
    let half = 6.0 * d.gamma;
    let mut g: Vec<f64> = built
        .resonances()
        .into_iter()
        .flat_map(|c| linspace(c - half, c + half, points_per_window))
        .collect();
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g.dedup();
    g
}

/// zeta over `grid` (default: the scheme's spectral grid) with the optimum
/// refined by golden-section search.
pub fn sensitivity_curve(
    scheme: Scheme,
    p: &SystemParams,
    sq: &SqueezeParams,
    opts: ModelOptions,
    grid: Option<&[f64]>,
) -> Result<SensitivityCurve> {
    sensitivity_curve_with_step(scheme, p, sq, opts, grid, WINDING_STEP)
}

pub fn sensitivity_curve_with_step(
    scheme: Scheme,
    p: &SystemParams,
    sq: &SqueezeParams,
    opts: ModelOptions,
    grid: Option<&[f64]>,
    h: f64,
) -> Result<SensitivityCurve> {
    let tri = Triple::new(scheme, p, opts, h)?;
    let omega: Vec<f64> = match grid {
        Some(g) => g.to_vec(),
        None => match &tri.base {
            Built::Mono(s, _) => default_grid(&s.derived, 4000),
            Built::Bae(s) => {
                let w = s.derived.half_gap;
                let mut g = linspace(0.2 * w, 2.0 * w, 4000);
                g.extend(resonance_windows(&tri.base, 1201));
                g.sort_by(|a, b| a.partial_cmp(b).unwrap());
                g.dedup();
                g
            }
        },
    };
    curve_on(&tri, omega, sq)
}

fn curve_on(tri: &Triple, omega: Vec<f64>, sq: &SqueezeParams) -> Result<SensitivityCurve> {
    let zeta: Vec<f64> = omega
        .par_iter()
        .map(|&w| tri.zeta(w, sq))
        .collect::<Result<_>>()?;
    let mut minima = Vec::new();
    for i in 1..omega.len().saturating_sub(1) {
        if zeta[i].is_finite() && zeta[i] <= zeta[i - 1] && zeta[i] < zeta[i + 1] {
            let (w, z) = golden_min(
                |w| tri.zeta(w, sq).unwrap_or(f64::INFINITY),
                omega[i - 1],
                omega[i + 1],
                1e-6,
            );
            let z = z.min(zeta[i]);
            let w = if z == zeta[i] { omega[i] } else { w };
            minima.push((w, z));
        }
    }
    minima.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (omega_opt, zeta_opt) = match minima.first() {
        Some(m) => *m,
        None => {
            let i = (0..zeta.len())
                .min_by(|a, b| zeta[*a].partial_cmp(&zeta[*b]).unwrap())
                .ok_or_else(|| Error::NoConvergence("empty frequency grid".into()))?;
            (omega[i], zeta[i])
        }
    };
    Ok(SensitivityCurve {
        omega,
        zeta,
        omega_opt,
        zeta_opt,
        local_minima: minima,
    })
}

/// Optimum (omega_opt, zeta_opt) searched in windows around the resonances.
pub fn optimum(tri: &Triple, sq: &SqueezeParams) -> Result<(f64, f64)> {
    let grid = resonance_windows(&tri.base, 1201);
    let c = curve_on(tri, grid, sq)?;
    Ok((c.omega_opt, c.zeta_opt))
}

/// zeta_opt(vacuum) / zeta_opt(sq) on identical grids; > 1 means squeezing helps.
pub fn enhancement_factor(
    scheme: Scheme,
    p: &SystemParams,
    sq: &SqueezeParams,
    opts: ModelOptions,
) -> Result<f64> {
    let tri = Triple::new(scheme, p, opts, WINDING_STEP)?;
    let (_, plain) = optimum(&tri, &SqueezeParams::VACUUM)?;
    let (_, squeezed) = optimum(&tri, sq)?;
    Ok(plain / squeezed)
}

pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    BistableSkipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetPoint {
    pub power_w: f64,
    pub status: PointStatus,
    pub omega_opt: f64,
    pub zeta_opt: f64,
    pub t_meas: f64,
    /// Spectrum at omega_opt, as computed.
    pub raw: Channels,
    /// Spectrum times t_meas: noise referred to the sidemode displacement.
    pub referred: Channels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudgetCurve {
    pub points: Vec<BudgetPoint>,
    /// Minimum referred total noise of the plain single-tone drive.
    pub s_min: f64,
    /// Minimum of referred shot plus backaction noise of the plain
    /// single-tone drive at zero temperature.
    pub s_sql: f64,
}

fn budget_point(
    scheme: Scheme,
    p: &SystemParams,
    sq: &SqueezeParams,
    opts: ModelOptions,
) -> BudgetPoint {
    let failed = |status| BudgetPoint {
        power_w: p.power_w,
        status,
        omega_opt: f64::NAN,
        zeta_opt: f64::NAN,
        t_meas: f64::NAN,
        raw: Channels::default(),
        referred: Channels::default(),
    };
    let tri = match Triple::new(scheme, p, opts, WINDING_STEP) {
        Ok(t) => t,
        Err(Error::Bistable { .. }) => return failed(PointStatus::BistableSkipped),
        Err(_) => return failed(PointStatus::Failed),
    };
    let eval = || -> Result<BudgetPoint> {
        let (w, z) = optimum(&tri, sq)?;
        let raw = tri.base.spectrum(w, sq)?;
        let t = tri.base.measurement_time(w);
        Ok(BudgetPoint {
            power_w: p.power_w,
            status: PointStatus::Ok,
            omega_opt: w,
            zeta_opt: z,
            t_meas: t,
            raw,
            referred: raw.scaled(t),
        })
    };
    eval().unwrap_or_else(|_| failed(PointStatus::Failed))
}

/// Budget at each power's own zeta-optimal frequency, plus the plain-drive
/// references S_min and S_SQL.
pub fn noise_budget_vs_power(
    scheme: Scheme,
    p: &SystemParams,
    sq: &SqueezeParams,
    opts: ModelOptions,
    powers: &[f64],
) -> Result<NoiseBudgetCurve> {
    let points: Vec<BudgetPoint> = powers
        .par_iter()
        .map(|&w| budget_point(scheme, &p.with_power(w), sq, opts))
        .collect();
    let (s_min, s_sql) = budget_references(p, opts, powers)?;
    Ok(NoiseBudgetCurve {
        points,
        s_min,
        s_sql,
    })
}

/// (S_min, S_SQL) of the plain single-tone drive: grid minimum over `powers`
/// refined by golden-section search in log power.
pub fn budget_references(
    p: &SystemParams,
    opts: ModelOptions,
    powers: &[f64],
) -> Result<(f64, f64)> {
    let cold = SystemParams {
        bec_temperature_k: 0.0,
        ..p.clone()
    };
    let total = |q: &SystemParams, w: f64| {
        let b = budget_point(
            Scheme::mono(),
            &q.with_power(w),
            &SqueezeParams::VACUUM,
            opts,
        );
        (b.status == PointStatus::Ok).then_some(b.referred)
    };
    let s_min = refined_min(powers, |w| total(p, w).map(|c| c.total))?;
    let s_sql = refined_min(powers, |w| {
        total(&cold, w).map(|c| c.shot + c.radiation_pressure)
    })?;
    Ok((s_min, s_sql))
}

fn refined_min<F: Fn(f64) -> Option<f64> + Sync>(powers: &[f64], f: F) -> Result<f64> {
    let vals: Vec<Option<f64>> = powers.par_iter().map(|&w| f(w)).collect();
    let i = (0..powers.len())
        .filter(|i| vals[*i].is_some())
        .min_by(|a, b| vals[*a].unwrap().partial_cmp(&vals[*b].unwrap()).unwrap())
        .ok_or_else(|| Error::NoConvergence("no evaluable power".into()))?;
    let lo = powers[i.saturating_sub(1)].ln();
    let hi = powers[(i + 1).min(powers.len() - 1)].ln();
    if hi <= lo {
        return Ok(vals[i].unwrap());
    }
    let (_, v) = golden_min(|x| f(x.exp()).unwrap_or(f64::INFINITY), lo, hi, 1e-6);
    Ok(v.min(vals[i].unwrap()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub power_w: f64,
    pub zeta_plain: f64,
    pub zeta_squeezed: f64,
    pub zeta_bae: f64,
    pub zeta_bae_squeezed: f64,
}

impl Comparison {
    /// Enhancement over the plain drive in dB: (squeezed, BAE, BAE + squeezed).
    pub fn enhancement_db(&self) -> (f64, f64, f64) {
        (
            to_db(self.zeta_plain / self.zeta_squeezed),
            to_db(self.zeta_plain / self.zeta_bae),
            to_db(self.zeta_plain / self.zeta_bae_squeezed),
        )
    }
}

/// Optimal sensitivity of the four configurations at each power.
pub fn comparison_suite(
    p: &SystemParams,
    sq: &SqueezeParams,
    opts: ModelOptions,
    powers: &[f64],
) -> Result<Vec<Comparison>> {
    powers
        .par_iter()
        .map(|&w| {
            let q = p.with_power(w);
            let mono = Triple::new(Scheme::mono(), &q, opts, WINDING_STEP)?;
            let bae = Triple::new(Scheme::Bae, &q, opts, WINDING_STEP)?;
            Ok(Comparison {
                power_w: w,
                zeta_plain: optimum(&mono, &SqueezeParams::VACUUM)?.1,
                zeta_squeezed: optimum(&mono, sq)?.1,
                zeta_bae: optimum(&bae, &SqueezeParams::VACUUM)?.1,
                zeta_bae_squeezed: optimum(&bae, sq)?.1,
            })
        })
        .collect()
}

/// Frequency in Hz, for reporting.
pub fn hz(omega: f64) -> f64 {
    omega / ang(1.0)
}
