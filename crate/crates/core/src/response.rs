//! Single-tone readout: static working point, 4x4 linear response, output
//! quadrature coefficients and the homodyne spectral density.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consts::ang;
use crate::error::{domain, Error, Result};
use crate::model::{Derived, Detuning, SystemParams};
use crate::noise::SqueezeParams;
use crate::numeric::{linspace, real_roots};
use crate::spectrum::{
    input_covariance, optical_pair, paired_form, split_channels, Baths, Channels, Kernel4,
    ModelOptions, Split,
};

type C = Complex64;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Static working point of the driven cavity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    /// Intracavity amplitude |a_s|; real by choice of the optical phase.
    pub a_s: f64,
    /// Intracavity photon number |a_s|^2.
    pub n: f64,
    pub x_c: f64,
    pub x_d: f64,
    /// Bare detuning, rad/s.
    pub detuning: f64,
    /// Effective detuning Delta - G (X_c + X_d), rad/s.
    pub effective_detuning: f64,
    /// Photon numbers of every real branch at this drive, ascending.
    pub branches: Vec<f64>,
    pub branch_count: usize,
    pub monostable: bool,
}

impl SteadyState {
    pub fn require_monostable(&self) -> Result<&Self> {
        if self.monostable {
            Ok(self)
        } else {
            Err(Error::Bistable {
                branches: self.branch_count,
            })
        }
    }
}

/// Static sidemode displacement per intracavity photon, `(u_c, u_d)`.
pub(crate) fn displacement_per_photon(d: &Derived) -> (f64, f64) {
    // [Omega_c^2, A; -A, Omega_d^2] u = -G [wt_c; wt_d]
    let (a11, a12, a21, a22) = (
        d.big_omega_c.powi(2),
        d.coupling_a,
        -d.coupling_a,
        d.big_omega_d.powi(2),
    );
    let (b1, b2) = (-d.g * d.omega_tilde_c, -d.g * d.omega_tilde_d);
    let det = a11 * a22 - a12 * a21;
    ((b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det)
}

/// Real roots `n` of n [(Delta + k n)^2 + kappa^2/4] = eta^2.
pub(crate) fn cubic_branches(delta: f64, k: f64, kappa: f64, eta: f64) -> Vec<f64> {
    let q = 0.25 * kappa * kappa;
    if eta == 0.0 {
        return vec![0.0];
    }
    if k == 0.0 {
        return vec![eta * eta / (delta * delta + q)];
    }
    // y = k n / sqrt(q):  y [(b + y)^2 + 1] = s
    let sq = q.sqrt();
    let b = delta / sq;
    let s = eta * eta * k / (q * sq);
    let resid = |y: f64| y * ((b + y).powi(2) + 1.0) - s;
    let dres = |y: f64| (b + y).powi(2) + 1.0 + 2.0 * y * (b + y);
    let mut out: Vec<f64> = real_roots(&[-s, b * b + 1.0, 2.0 * b, 1.0])
        .into_iter()
        .map(|mut y| {
            for _ in 0..6 {
                let dy = resid(y) / dres(y);
                if !dy.is_finite() {
                    break;
                }
                y -= dy;
            }
            y * sq / k
        })
        .filter(|n| *n > 0.0)
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    out
}

/// Solves the working point. With an effective detuning the photon number is
/// explicit; with a bare detuning the physical branch is followed from zero
/// drive upward.
pub fn solve_steady_state(p: &SystemParams) -> Result<SteadyState> {
    let d = Derived::new(p)?;
    solve_with_derived(p, &d)
}

pub(crate) fn solve_with_derived(p: &SystemParams, d: &Derived) -> Result<SteadyState> {
    let (u_c, u_d) = displacement_per_photon(d);
    let k = -d.g * (u_c + u_d);
    let q = 0.25 * d.kappa * d.kappa;
    let eta = d.eta;
    let (n, bare) = match p.detuning {
        Detuning::Effective(hz) => {
            let eff = ang(hz);
            let n = eta * eta / (eff * eff + q);
            (n, eff - k * n)
        }
        Detuning::Bare(hz) => {
            let bare = ang(hz);
            let mut n_prev = 0.0f64;
            let steps = 400;
            for i in 1..=steps {
                let e = eta * i as f64 / steps as f64;
                let roots = cubic_branches(bare, k, d.kappa, e);
                let next = roots
                    .iter()
                    .copied()
                    .find(|r| *r >= n_prev * (1.0 - 1e-9))
                    .or_else(|| roots.last().copied())
                    .ok_or_else(|| Error::NoConvergence("no real working point".into()))?;
                n_prev = next;
            }
            (if eta == 0.0 { 0.0 } else { n_prev }, bare)
        }
    };
    let branches = if eta == 0.0 {
        vec![0.0]
    } else {
        cubic_branches(bare, k, d.kappa, eta)
    };
    let branch_count = branches.len().max(1);
    Ok(SteadyState {
        a_s: n.sqrt(),
        n,
        x_c: u_c * n,
        x_d: u_d * n,
        detuning: bare,
        effective_detuning: bare + k * n,
        branches,
        branch_count,
        monostable: branch_count == 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Susceptibilities {
    pub chi_a: C,
    pub chi_c: C,
    pub chi_d: C,
}

impl Susceptibilities {
    pub fn new(omega: f64, d: &Derived) -> Self {
        Susceptibilities {
            chi_a: cavity_susceptibility(omega, d.kappa),
            chi_c: sidemode_susceptibility(omega, d.big_omega_c, d.gamma),
            chi_d: sidemode_susceptibility(omega, d.big_omega_d, d.gamma),
        }
    }
}

pub fn cavity_susceptibility(omega: f64, kappa: f64) -> C {
    C::new(0.5 * kappa, -omega).inv()
}

pub fn sidemode_susceptibility(omega: f64, big_omega: f64, gamma: f64) -> C {
    C::new(big_omega * big_omega - omega * omega, -omega * gamma).inv()
}

/// Linearised response matrix acting on (dQ, dP, dX_c, dX_d).
pub fn response_matrix(omega: f64, d: &Derived, ss: &SteadyState) -> Result<Matrix4<C>> {
    let s = Susceptibilities::new(omega, d);
    let dp = c(ss.effective_detuning);
    let ga = c(2f64.sqrt() * d.g * ss.a_s);
    let a = c(d.coupling_a);
    let z = c(0.0);
    let m = Matrix4::new(
        s.chi_a.inv(),
        dp,
        z,
        z,
        -dp,
        s.chi_a.inv(),
        ga,
        ga,
        ga * d.omega_tilde_c,
        z,
        s.chi_c.inv(),
        a,
        ga * d.omega_tilde_d,
        z,
        -a,
        s.chi_d.inv(),
    );
    let det = m.determinant().norm();
    let scale: f64 = (0..4).map(|i| m.row(i).norm()).product();
    if !(det > 1e-30 * scale) {
        return Err(Error::Singular { omega });
    }
    Ok(m)
}

/// How the intracavity quadratures map to the output field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputConvention {
    /// K_out = sqrt(kappa) dK - K_in for every coefficient.
    #[default]
    Standard,
    /// Scales the direct Q->Q_out and P->P_out coefficients by (sqrt(kappa) - 1).
    AsPrinted,
}

/// Output quadrature coefficients on the inputs (Q_in, P_in, eps_c, eps_d).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadCoeffs {
    pub a_p: C,
    pub b_p: C,
    pub c_p: C,
    pub d_p: C,
    pub a_q: C,
    pub b_q: C,
    pub c_q: C,
    pub d_q: C,
}

impl QuadCoeffs {
    pub fn p(&self) -> [C; 4] {
        [self.a_p, self.b_p, self.c_p, self.d_p]
    }

    pub fn q(&self) -> [C; 4] {
        [self.a_q, self.b_q, self.c_q, self.d_q]
    }

    /// Coefficients of Q cos(phi) + P sin(phi).
    pub fn rotated(&self, phi: f64) -> [C; 4] {
        let (s, co) = phi.sin_cos();
        let (p, q) = (self.p(), self.q());
        [0, 1, 2, 3].map(|i| q[i] * co + p[i] * s)
    }
}

/// Closed-form output coefficients.
pub fn output_coefficients(
    omega: f64,
    d: &Derived,
    ss: &SteadyState,
    convention: OutputConvention,
) -> Result<QuadCoeffs> {
    let s = Susceptibilities::new(omega, d);
    let (xa, xc, xd) = (s.chi_a, s.chi_c, s.chi_d);
    let a = c(d.coupling_a);
    let dp = c(ss.effective_detuning);
    let gs2 = 2.0 * d.g * d.g * ss.a_s * ss.a_s;
    let ga = 2f64.sqrt() * d.g * ss.a_s;
    let sk = d.kappa.sqrt();
    let one = c(1.0);

    let core = xc * (gs2 * d.omega_tilde_c * (a * xd + one) + a * a * dp * xd)
        - gs2 * xd * d.omega_tilde_d * (a * xc - one)
        + dp;
    let mix = a * a * xc * xd + one;
    let den = dp * xa * xa * core + mix;
    if den.norm() < 1e-300 {
        return Err(Error::Singular { omega });
    }

    let aq = xa * sk * mix / den;
    let bq = -dp * xa * xa * sk * mix / den;
    let cq = ga * dp * xa * xa * xc * d.omega_c * (a * xd + one) / den;
    let dq = ga * dp * xa * xa * xd * d.omega_d * (one - a * xc) / den;
    let ap = sk * xa * xa * core / den;
    let bp = xa * sk * mix / den;
    let cp = -ga * xa * xc * d.omega_c * (a * xd + one) / den;
    let dpp = ga * xa * xd * d.omega_d * (a * xc - one) / den;

    let (direct_q, direct_p) = match convention {
        OutputConvention::Standard => (sk * aq - one, sk * bp - one),
        OutputConvention::AsPrinted => ((sk - 1.0) * aq, (sk - 1.0) * bp),
    };
    Ok(QuadCoeffs {
        a_p: sk * ap,
        b_p: direct_p,
        c_p: sk * cp,
        d_p: sk * dpp,
        a_q: direct_q,
        b_q: sk * bq,
        c_q: sk * cq,
        d_q: sk * dq,
    })
}

/// A monochromatically driven system at a fixed working point, ready for
/// spectral evaluation.
#[derive(Debug, Clone)]
pub struct MonoSystem {
    pub params: SystemParams,
    pub derived: Derived,
    pub steady: SteadyState,
    pub options: ModelOptions,
}

impl MonoSystem {
    /// Builds the system; fails if the working point is not monostable.
    pub fn new(params: &SystemParams, options: ModelOptions) -> Result<Self> {
        let derived = Derived::new(params)?;
        let steady = solve_with_derived(params, &derived)?;
        steady.require_monostable()?;
        Ok(MonoSystem {
            params: params.clone(),
            derived,
            steady,
            options,
        })
    }

    pub fn coefficients(&self, omega: f64) -> Result<QuadCoeffs> {
        output_coefficients(omega, &self.derived, &self.steady, self.options.output)
    }

    pub fn baths(&self) -> Baths {
        Baths {
            omega_c: self.derived.omega_c,
            omega_d: self.derived.omega_d,
            temperature: self.params.bec_temperature_k,
            gamma: self.derived.gamma,
        }
    }

    /// Shot-noise floor of the P quadrature far from every resonance.
    pub fn shot_floor(&self) -> f64 {
        0.5
    }
}

/// Spectral density of the output quadrature at homodyne angle `phi`, with
/// its channel split.
pub fn spectral_density(
    omega: f64,
    phi: f64,
    sys: &MonoSystem,
    sq: &SqueezeParams,
) -> Result<Channels> {
    let (optical, vacuum) = optical_pair(sq, sys.options.squeeze)?;
    let baths = sys.baths();
    let actual = input_covariance(&optical, &baths, omega)?;
    let vac = input_covariance(&vacuum, &baths, omega)?;
    let plus = sys.coefficients(omega)?.rotated(phi);
    let minus = sys.coefficients(-omega)?.rotated(phi);
    Ok(split_channels(
        &plus,
        &minus,
        Split {
            actual: &actual,
            vacuum: &vac,
        },
    ))
}

/// Spectrum on a grid, evaluated in parallel; output order follows `grid`.
pub fn spectrum_on_grid(
    grid: &[f64],
    phi: f64,
    sys: &MonoSystem,
    sq: &SqueezeParams,
) -> Result<Vec<Channels>> {
    grid.par_iter()
        .map(|&w| spectral_density(w, phi, sys, sq))
        .collect()
}

/// Default grid: dense linear span of [0.5 Omega_d, 1.2 Omega_c] plus 16x
/// refinement within +-5 gamma of each sidemode resonance. Sorted, rad/s.
pub fn default_grid(d: &Derived, points: usize) -> Vec<f64> {
    let lo = 0.5 * d.big_omega_d.min(d.big_omega_c);
    let hi = 1.2 * d.big_omega_c.max(d.big_omega_d);
    let n = points.max(4000);
    let mut g = linspace(lo, hi, n);
    let step = (hi - lo) / (n - 1) as f64;
    for peak in [d.big_omega_c, d.big_omega_d] {
        let half = 5.0 * d.gamma;
        let m = ((2.0 * half / step) * 16.0).ceil() as usize + 1;
        g.extend(linspace(peak - half, peak + half, m.max(17)));
    }
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g.dedup();
    g
}

/// Optimal homodyne angle, or `Indeterminate` when every angle is equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HomodyneAngle {
    Angle(f64),
    Indeterminate,
}

/// Quadrature-resolved spectra `(S_QQ, S_PP, S_QP, S_PQ)` at `omega`.
pub fn quadrature_spectra(
    omega: f64,
    sys: &MonoSystem,
    sq: &SqueezeParams,
) -> Result<(f64, f64, f64, f64)> {
    let (optical, _) = optical_pair(sq, sys.options.squeeze)?;
    let k: Kernel4 = input_covariance(&optical, &sys.baths(), omega)?;
    let (cp, cm) = (sys.coefficients(omega)?, sys.coefficients(-omega)?);
    let all = [true; 4];
    Ok((
        paired_form(&cp.q(), &cm.q(), &k, all),
        paired_form(&cp.p(), &cm.p(), &k, all),
        paired_form(&cp.q(), &cm.p(), &k, all),
        paired_form(&cp.p(), &cm.q(), &k, all),
    ))
}

/// Homodyne angle in [0, pi) maximising S^phi at `omega`. Unsqueezed input
/// uses the phase quadrature, pi/2.
pub fn optimal_homodyne_angle(
    omega: f64,
    sys: &MonoSystem,
    sq: &SqueezeParams,
) -> Result<HomodyneAngle> {
    if sq.is_vacuum() {
        return Ok(HomodyneAngle::Angle(std::f64::consts::FRAC_PI_2));
    }
    let (qq, pp, qp, pq) = quadrature_spectra(omega, sys, sq)?;
    angle_from_spectra(qq, pp, qp, pq)
}

pub(crate) fn angle_from_spectra(qq: f64, pp: f64, qp: f64, pq: f64) -> Result<HomodyneAngle> {
    let (x, y) = (qq - pp, qp + pq);
    if x.abs() <= 1e-14 * (qq.abs() + pp.abs()) && y.abs() <= 1e-14 * (qq.abs() + pp.abs()) {
        return Ok(HomodyneAngle::Indeterminate);
    }
    if !(x.is_finite() && y.is_finite()) {
        return Err(domain("spectra", "non-finite quadrature spectra"));
    }
    let phi = 0.5 * y.atan2(x);
    Ok(HomodyneAngle::Angle(phi.rem_euclid(std::f64::consts::PI)))
}
