//! Two-tone backaction-evading readout beyond the rotating-wave approximation.
//!
//! The cavity is driven at omega_a +- delta. Linear fluctuations are expanded
//! in harmonics e^{i n delta t}; with stationary inputs only |n| <= 2 survive
//! in the phase quadrature. Steady-state tone populations come from a pair of
//! coupled cubics, solved through a single quintic in the total population.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{amplitude_for_power, Derived, SystemParams};
use crate::noise::SqueezeParams;
use crate::numeric::{poly_add, poly_mul, real_roots};
use crate::ode::{integrate, Tolerance};
use crate::response::{cavity_susceptibility, cubic_branches, sidemode_susceptibility};
use crate::spectrum::{
    input_covariance, optical_pair, split_channels, Baths, Channels, ModelOptions, Split,
};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaeDrive {
    pub power_plus_w: f64,
    pub power_minus_w: f64,
    /// Tone offset from the cavity, Hz. `None` locks it to omega_m.
    #[serde(default)]
    pub delta_hz: Option<f64>,
}

impl BaeDrive {
    /// Both tones at `power_w`, locked to the sidemode mean frequency.
    pub fn symmetric(power_w: f64) -> Self {
        BaeDrive {
            power_plus_w: power_w,
            power_minus_w: power_w,
            delta_hz: None,
        }
    }

    pub fn delta(&self, d: &Derived) -> f64 {
        self.delta_hz.map(crate::consts::ang).unwrap_or(d.omega_m)
    }

    /// Tone amplitudes (eps_+, eps_-) in 1/s.
    pub fn amplitudes(&self, p: &SystemParams) -> Result<(f64, f64)> {
        Ok((
            amplitude_for_power(self.power_plus_w, p.kappa_hz, p.laser_hz)?,
            amplitude_for_power(self.power_minus_w, p.kappa_hz, p.laser_hz)?,
        ))
    }
}

/// Static optomechanical frequency pull per intracavity photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KerrModel {
    #[default]
    Collisionless,
    /// Includes the collisional mixing of the sidemodes in the static response.
    Collisional,
}

impl KerrModel {
    /// Kerr coefficient K (rad/s per photon).
    pub fn coefficient(&self, d: &Derived) -> f64 {
        match self {
            KerrModel::Collisionless => d.g * d.g * (1.0 / d.omega_c + 1.0 / d.omega_d),
            KerrModel::Collisional => {
                let (u_c, u_d) = crate::response::displacement_per_photon(d);
                -d.g * (u_c + u_d)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaeSteadyState {
    pub n_plus1: f64,
    pub n_minus1: f64,
    /// Per-tone amplitude used for linearisation.
    pub a_bar: f64,
    /// Kerr coefficient, rad/s per photon.
    pub kerr: f64,
    pub delta: f64,
    /// Total populations of every real solution, ascending.
    pub branches: Vec<f64>,
    pub monostable: bool,
}

struct Cubics {
    e_plus: f64,
    e_minus: f64,
    k: f64,
    delta: f64,
    q: f64,
}

impl Cubics {
    fn d1(&self, n: f64) -> f64 {
        (self.k * n - self.delta).powi(2) + self.q
    }
    fn d2(&self, n: f64) -> f64 {
        (self.k * n + self.delta).powi(2) + self.q
    }

    /// n - n_1(n) - n_-1(n) for total population n.
    fn g(&self, n: f64) -> f64 {
        n - self.e_plus / self.d1(n) - self.e_minus / self.d2(n)
    }

    fn dg(&self, n: f64) -> f64 {
        let dd1 = 2.0 * self.k * (self.k * n - self.delta);
        let dd2 = 2.0 * self.k * (self.k * n + self.delta);
        1.0 + self.e_plus * dd1 / self.d1(n).powi(2) + self.e_minus * dd2 / self.d2(n).powi(2)
    }

    fn split(&self, n: f64) -> (f64, f64) {
        (self.e_plus / self.d1(n), self.e_minus / self.d2(n))
    }

    fn scale(&self) -> f64 {
        (self.e_plus + self.e_minus) / self.q
    }

    /// All real total populations. With y = K n / sqrt(q) and b = delta / sqrt(q)
    /// the balance n = n_1 + n_-1 becomes the monic quintic
    /// y P_- P_+ = s_+ P_+ + s_- P_-,  P_(+-) = (y +- b)^2 + 1.
    fn roots(&self) -> Vec<f64> {
        if self.scale() == 0.0 {
            return vec![0.0];
        }
        if self.k == 0.0 {
            return vec![self.e_plus / self.d1(0.0) + self.e_minus / self.d2(0.0)];
        }
        let sq = self.q.sqrt();
        let b = self.delta / sq;
        let to_y = self.k / (self.q * sq);
        let (sp, sm) = (self.e_plus * to_y, self.e_minus * to_y);
        let pm = [b * b + 1.0, -2.0 * b, 1.0];
        let pp = [b * b + 1.0, 2.0 * b, 1.0];
        let lhs = poly_mul(&[0.0, 1.0], &poly_mul(&pm, &pp));
        let rhs = poly_add(&pp.map(|x| x * sp), &pm.map(|x| x * sm));
        let poly = poly_add(&lhs, &rhs.iter().map(|x| -x).collect::<Vec<_>>());
        let mut out: Vec<f64> = real_roots(&poly)
            .into_iter()
            .map(|y| self.newton(y * sq / self.k))
            .filter(|n| *n > 0.0 && self.g(*n).abs() <= 1e-9 * n)
            .collect();
        // a near-real complex pair can polish onto an existing root
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-7 * b.abs());
        out
    }

    fn newton(&self, mut n: f64) -> f64 {
        for _ in 0..50 {
            let step = self.g(n) / self.dg(n);
            if !step.is_finite() {
                break;
            }
            n -= step;
            if step.abs() <= 1e-15 * n.abs() {
                break;
            }
        }
        n
    }
}

fn cubics_for(p: &SystemParams, drive: &BaeDrive, kerr: KerrModel) -> Result<Cubics> {
    let d = Derived::new(p)?;
    let (ep, em) = drive.amplitudes(p)?;
    let delta = drive.delta(&d);
    if (d.omega_m - d.half_gap).abs() <= f64::EPSILON * d.omega_m {
        return Err(domain(
            "winding",
            "omega_m equals the half-gap; static response is singular",
        ));
    }
    Ok(Cubics {
        e_plus: ep * ep,
        e_minus: em * em,
        k: kerr.coefficient(&d),
        delta,
        q: 0.25 * d.kappa * d.kappa,
    })
}

/// Steady-state tone populations, following the branch that connects to zero
/// drive.
pub fn bae_steady_state(
    p: &SystemParams,
    drive: &BaeDrive,
    kerr: KerrModel,
) -> Result<BaeSteadyState> {
    let full = cubics_for(p, drive, kerr)?;
    let steps = 400;
    let mut n_prev = 0.0f64;
    for i in 1..=steps {
        let s = (i as f64 / steps as f64).powi(2);
        let cub = Cubics {
            e_plus: s * full.e_plus,
            e_minus: s * full.e_minus,
            ..full
        };
        let roots = cub.roots();
        n_prev = roots
            .iter()
            .copied()
            .find(|r| *r >= n_prev * (1.0 - 1e-9))
            .or_else(|| roots.last().copied())
            .ok_or_else(|| Error::NoConvergence("no real BAE steady state".into()))?;
    }
    finish(full, n_prev)
}

/// Re-solves the steady state by Newton iteration from a known total
/// population.
pub fn bae_steady_state_from(
    p: &SystemParams,
    drive: &BaeDrive,
    kerr: KerrModel,
    n_guess: f64,
) -> Result<BaeSteadyState> {
    let full = cubics_for(p, drive, kerr)?;
    let n = full.newton(n_guess);
    finish(full, n)
}

fn finish(cub: Cubics, n_total: f64) -> Result<BaeSteadyState> {
    let n = if cub.scale() == 0.0 {
        0.0
    } else {
        cub.newton(n_total)
    };
    if !n.is_finite() || n < 0.0 {
        return Err(Error::NoConvergence(format!("BAE population {n}")));
    }
    let (n1, nm1) = cub.split(n);
    let branches = cub.roots();
    let a_bar = ((n1 + nm1) / 2.0).sqrt();
    Ok(BaeSteadyState {
        n_plus1: n1,
        n_minus1: nm1,
        a_bar,
        kerr: cub.k,
        delta: cub.delta,
        monostable: branches.len() <= 1,
        branches,
    })
}

impl BaeSteadyState {
    /// Relative residuals of the two cubics.
    pub fn residuals(&self, p: &SystemParams, drive: &BaeDrive) -> Result<(f64, f64)> {
        let d = Derived::new(p)?;
        let (ep, em) = drive.amplitudes(p)?;
        let q = 0.25 * d.kappa * d.kappa;
        let n = self.n_plus1 + self.n_minus1;
        let r1 = self.n_plus1 * ((self.kerr * n - self.delta).powi(2) + q) - ep * ep;
        let r2 = self.n_minus1 * ((self.kerr * n + self.delta).powi(2) + q) - em * em;
        let rel = |r: f64, e: f64| if e == 0.0 { r.abs() } else { r.abs() / (e * e) };
        Ok((rel(r1, ep), rel(r2, em)))
    }

    /// Number of positive real roots of each cubic with the other population
    /// held at its solved value.
    pub fn cubic_root_counts(&self, kappa: f64, e_plus: f64, e_minus: f64) -> (usize, usize) {
        let count = |other: f64, shift: f64, e: f64| {
            if e == 0.0 {
                return 1;
            }
            cubic_branches(self.kerr * other + shift, self.kerr, kappa, e).len()
        };
        (
            count(self.n_minus1, -self.delta, e_plus),
            count(self.n_plus1, self.delta, e_minus),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum BistabilityAxis {
    /// Per-tone power, W.
    Power(Vec<f64>),
    /// Cavity linewidth, Hz.
    Kappa(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BistabilityPoint {
    pub value: f64,
    pub branch_count: usize,
    pub n_plus1: f64,
    pub n_minus1: f64,
    pub cubic_counts: (usize, usize),
    pub converged: bool,
}

/// Branch structure along one axis; unsolvable points are flagged.
pub fn bistability_map(
    p: &SystemParams,
    drive: &BaeDrive,
    kerr: KerrModel,
    axis: &BistabilityAxis,
) -> Vec<BistabilityPoint> {
    let values = match axis {
        BistabilityAxis::Power(v) | BistabilityAxis::Kappa(v) => v.clone(),
    };
    values
        .par_iter()
        .map(|&v| {
            let (pp, dr) = match axis {
                BistabilityAxis::Power(_) => (
                    p.clone(),
                    BaeDrive {
                        power_plus_w: v,
                        power_minus_w: v,
                        ..*drive
                    },
                ),
                BistabilityAxis::Kappa(_) => (
                    SystemParams {
                        kappa_hz: v,
                        ..p.clone()
                    },
                    *drive,
                ),
            };
            match bae_steady_state(&pp, &dr, kerr) {
                Ok(ss) => {
                    let kappa = crate::consts::ang(pp.kappa_hz);
                    let (ep, em) = dr.amplitudes(&pp).unwrap_or((0.0, 0.0));
                    BistabilityPoint {
                        value: v,
                        branch_count: ss.branches.len().max(1),
                        n_plus1: ss.n_plus1,
                        n_minus1: ss.n_minus1,
                        cubic_counts: ss.cubic_root_counts(kappa, ep, em),
                        converged: true,
                    }
                }
                Err(_) => BistabilityPoint {
                    value: v,
                    branch_count: 0,
                    n_plus1: f64::NAN,
                    n_minus1: f64::NAN,
                    cubic_counts: (0, 0),
                    converged: false,
                },
            }
        })
        .collect()
}

/// Which argument each Floquet component is evaluated at when the
/// time-averaged spectrum is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloquetPairing {
    /// Component n at omega - n delta, partnered with component -n at
    /// -(omega - n delta).
    #[default]
    Shifted,
    /// Component n at omega + n delta (lab-frame frequency bookkeeping).
    LabFrame,
}

/// Coefficients of (Q_in, P_in, eps_c, eps_d) in the output phase quadrature,
/// per Floquet harmonic, at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetCoeffs {
    pub a0: C,
    pub b0: C,
    pub c_p1: C,
    pub c_m1: C,
    pub d_p1: C,
    pub d_m1: C,
    pub a_p2: C,
    pub a_m2: C,
}

impl FloquetCoeffs {
    /// Input coefficient vector of harmonic `n`; zero for |n| >= 3.
    pub fn component(&self, n: i32) -> [C; 4] {
        let z = C::new(0.0, 0.0);
        match n {
            0 => [self.a0, self.b0, z, z],
            1 => [z, z, self.c_p1, self.d_p1],
            -1 => [z, z, self.c_m1, self.d_m1],
            2 => [self.a_p2, z, z, z],
            -2 => [self.a_m2, z, z, z],
            _ => [z; 4],
        }
    }
}

/// A two-tone driven system at a fixed working point.
#[derive(Debug, Clone)]
pub struct BaeSystem {
    pub params: SystemParams,
    pub derived: Derived,
    pub drive: BaeDrive,
    pub steady: BaeSteadyState,
    pub options: ModelOptions,
}

impl BaeSystem {
    /// Collisions are dropped from the sidemode dynamics of this scheme.
    pub fn new(p: &SystemParams, drive: &BaeDrive, options: ModelOptions) -> Result<Self> {
        let derived = Derived::new(p)?.without_collisions();
        let steady = bae_steady_state(p, drive, KerrModel::Collisionless)?;
        if !steady.monostable {
            return Err(Error::Bistable {
                branches: steady.branches.len(),
            });
        }
        Ok(BaeSystem {
            params: p.clone(),
            derived,
            drive: *drive,
            steady,
            options,
        })
    }

    pub fn delta(&self) -> f64 {
        self.steady.delta
    }

    pub fn baths(&self) -> Baths {
        Baths {
            omega_c: self.derived.omega_c,
            omega_d: self.derived.omega_d,
            temperature: self.params.bec_temperature_k,
            gamma: self.derived.gamma,
        }
    }
}

/// Floquet coefficients at `omega`. Harmonic n maps an input at `omega` to
/// the output at `omega - n delta`. The output relation is always the
/// standard one; `OutputConvention` applies to the single-tone model only.
pub fn floquet_coefficients(omega: f64, sys: &BaeSystem) -> FloquetCoeffs {
    let d = &sys.derived;
    let (k, g, ab, dl) = (d.kappa, d.g, sys.steady.a_bar, sys.delta());
    let xa = |x: f64| cavity_susceptibility(x, k);
    let s = |x: f64| {
        d.omega_c * sidemode_susceptibility(x, d.omega_c, d.gamma)
            + d.omega_d * sidemode_susceptibility(x, d.omega_d, d.gamma)
    };
    let xc = sidemode_susceptibility(omega, d.omega_c, d.gamma);
    let xd = sidemode_susceptibility(omega, d.omega_d, d.gamma);
    let g2 = 2.0 * k * g * g * ab * ab;
    let g1 = -(2.0 * k).sqrt() * g * ab;
    FloquetCoeffs {
        a0: g2 * xa(omega) * xa(omega) * (s(omega - dl) + s(omega + dl)),
        b0: k * xa(omega) - 1.0,
        c_p1: g1 * xa(omega - dl) * d.omega_c * xc,
        c_m1: g1 * xa(omega + dl) * d.omega_c * xc,
        d_p1: g1 * xa(omega - dl) * d.omega_d * xd,
        d_m1: g1 * xa(omega + dl) * d.omega_d * xd,
        a_p2: g2 * xa(omega - 2.0 * dl) * xa(omega) * s(omega - dl),
        a_m2: g2 * xa(omega + 2.0 * dl) * xa(omega) * s(omega + dl),
    }
}

/// Time-averaged phase-quadrature spectrum with channel split.
pub fn bae_spectrum(omega: f64, sys: &BaeSystem, sq: &SqueezeParams) -> Result<Channels> {
    let (optical, vacuum) = optical_pair(sq, sys.options.squeeze)?;
    let baths = sys.baths();
    let dl = sys.delta();
    let mut acc = Channels::default();
    for n in -2i32..=2 {
        let x = match sys.options.pairing {
            FloquetPairing::Shifted => omega - n as f64 * dl,
            FloquetPairing::LabFrame => omega + n as f64 * dl,
        };
        let plus = floquet_coefficients(x, sys).component(n);
        let minus = floquet_coefficients(-x, sys).component(-n);
        let actual = input_covariance(&optical, &baths, x)?;
        let vac = input_covariance(&vacuum, &baths, x)?;
        acc = acc
            + split_channels(
                &plus,
                &minus,
                Split {
                    actual: &actual,
                    vacuum: &vac,
                },
            );
    }
    Ok(acc)
}

pub fn bae_spectrum_on_grid(
    grid: &[f64],
    sys: &BaeSystem,
    sq: &SqueezeParams,
) -> Result<Vec<Channels>> {
    grid.par_iter().map(|&w| bae_spectrum(w, sys, sq)).collect()
}

/// Measurement time 1 / |sqrt(2 kappa) G a_bar chi_a(omega)|^2, seconds.
pub fn bae_measurement_time(omega: f64, sys: &BaeSystem) -> f64 {
    let d = &sys.derived;
    let rate =
        (2.0 * d.kappa).sqrt() * d.g * sys.steady.a_bar * cavity_susceptibility(omega, d.kappa);
    1.0 / rate.norm_sqr()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub max_abs_alpha: f64,
    pub bound: f64,
    pub horizon: f64,
    pub samples: usize,
}

/// Integrates the Floquet-truncated mean-field equations from an empty
/// cavity and checks that |alpha(t)| stays within (1 + tol)(|a_1| + |a_-1|).
///
/// The field is alpha = a_1 e^{i delta t} + a_-1 e^{-i delta t}. Sidemodes
/// enter only through their zeroth harmonic, slaved to the tone populations:
/// X_k = -G (|a_1|^2 + |a_-1|^2) / omega_k.
pub fn semiclassical_bound_check(
    p: &SystemParams,
    drive: &BaeDrive,
    horizon: Option<f64>,
    tol: f64,
    ode_tol: Tolerance,
) -> Result<BoundReport> {
    let ss = bae_steady_state(p, drive, KerrModel::Collisionless)?;
    if !ss.monostable {
        return Err(Error::Bistable {
            branches: ss.branches.len(),
        });
    }
    let d = Derived::new(p)?.without_collisions();
    let (ep, em) = drive.amplitudes(p)?;
    let dl = ss.delta;
    let t_end = horizon
        .unwrap_or(50.0 * crate::consts::TWO_PI / d.kappa + 20.0 * crate::consts::TWO_PI / dl);
    let bound = (1.0 + tol) * (ss.n_plus1.sqrt() + ss.n_minus1.sqrt());
    let (k, kerr) = (d.kappa, ss.kerr);
    let minus_i = C::new(0.0, -1.0);
    // state: Re a_1, Im a_1, Re a_-1, Im a_-1 in their rotating frames
    let rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| {
        let (a1, am) = (C::new(y[0], y[1]), C::new(y[2], y[3]));
        // G (X_c + X_d) = -K n
        let shift = -kerr * (a1.norm_sqr() + am.norm_sqr());
        let d1 = C::new(-0.5 * k, -(dl + shift)) * a1 + minus_i * ep;
        let dm = C::new(-0.5 * k, dl - shift) * am + minus_i * em;
        dy[0] = d1.re;
        dy[1] = d1.im;
        dy[2] = dm.re;
        dy[3] = dm.im;
    };
    let mut max_abs = 0.0f64;
    let mut samples = 0usize;
    integrate(rhs, 0.0, &[0.0; 4], t_end, ode_tol, 0.05 / dl, |t, y| {
        samples += 1;
        let (s, co) = (dl * t).sin_cos();
        let alpha = C::new(y[0], y[1]) * C::new(co, s) + C::new(y[2], y[3]) * C::new(co, -s);
        max_abs = max_abs.max(alpha.norm());
    })?;
    if max_abs > bound {
        return Err(Error::BoundViolation { max_abs, bound });
    }
    Ok(BoundReport {
        max_abs_alpha: max_abs,
        bound,
        horizon: t_end,
        samples,
    })
}
