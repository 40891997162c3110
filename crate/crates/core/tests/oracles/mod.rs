//! Reference computations written independently of the library paths they
//! check. Shared by the core integration tests and the acceptance target.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use ringsense::consts::{HBAR, K_B};
use ringsense::{
    BaeDrive, BaeSystem, Derived, Detuning, KerrModel, ModelOptions, MonoSystem, SqueezeParams,
    SystemParams,
};

pub const I: C = C::new(0.0, 1.0);

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

/// Random monostable single-tone systems with a probe frequency and squeezing.
pub fn draws(seed: u64, count: usize) -> Vec<(MonoSystem, f64, f64, SqueezeParams)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let kappa = 10f64.powf(rng.gen_range(5.5..6.7));
        let p = SystemParams {
            power_w: 10f64.powf(rng.gen_range(-16.0..-12.5)),
            collision_hz: rng.gen_range(0.0..30.0),
            kappa_hz: kappa,
            detuning: Detuning::Effective(rng.gen_range(-0.3..0.3) * kappa),
            winding: rng.gen_range(1..4) as f64,
            gamma_hz: rng.gen_range(0.2..5.0),
            ..SystemParams::paper_defaults()
        };
        let Ok(sys) = MonoSystem::new(&p, ModelOptions::default()) else {
            continue;
        };
        let w = rng.gen_range(0.3..1.5) * sys.derived.big_omega_c;
        let phi = rng.gen_range(0.0..PI);
        let sq = SqueezeParams {
            r: rng.gen_range(0.0..1.5),
            theta: rng.gen_range(0.0..2.0 * PI),
            n_thermal: rng.gen_range(0.0..0.2),
        };
        out.push((sys, w, phi, sq));
    }
    out
}

/// Gaussian elimination with partial pivoting.
pub fn solve4(mut m: [[C; 4]; 4], mut b: [C; 4]) -> [C; 4] {
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&i, &j| m[i][col].norm().partial_cmp(&m[j][col].norm()).unwrap())
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                let t = m[col][k];
                m[row][k] -= f * t;
            }
            let t = b[col];
            b[row] -= f * t;
        }
    }
    let mut x = [C::new(0.0, 0.0); 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for k in row + 1..4 {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    x
}

/// Output (Q, P) coefficients on (Q_in, P_in, eps_c, eps_d) from a direct
/// solve of the linearised equations at `omega`.
pub fn mono_by_inversion(omega: f64, sys: &MonoSystem) -> ([C; 4], [C; 4]) {
    let d = &sys.derived;
    let ss = &sys.steady;
    let inv_a = C::new(0.5 * d.kappa, -omega);
    let inv_k = |w: f64| C::new(w * w - omega * omega, -omega * d.gamma);
    let dp = re(ss.effective_detuning);
    let ga = re(2f64.sqrt() * d.g * ss.a_s);
    let a = re(d.coupling_a);
    let z = re(0.0);
    let m = [
        [inv_a, dp, z, z],
        [-dp, inv_a, ga, ga],
        [ga * d.omega_tilde_c, z, inv_k(d.big_omega_c), a],
        [ga * d.omega_tilde_d, z, -a, inv_k(d.big_omega_d)],
    ];
    let sk = d.kappa.sqrt();
    let drives = [
        [re(sk), z, z, z],
        [z, re(sk), z, z],
        [z, z, re(d.omega_c), z],
        [z, z, z, re(d.omega_d)],
    ];
    let mut q = [z; 4];
    let mut p = [z; 4];
    for (j, b) in drives.into_iter().enumerate() {
        let x = solve4(m, b);
        q[j] = sk * x[0] - if j == 0 { 1.0 } else { 0.0 };
        p[j] = sk * x[1] - if j == 1 { 1.0 } else { 0.0 };
    }
    (q, p)
}

/// (Q, P) covariance of a thermal squeezed input built from the a, a^dagger
/// moments N = <a^dagger a> and M = <a a> with M = -e^{i theta} sinh r cosh r (2 n + 1).
pub fn optical_covariance(sq: &SqueezeParams) -> [[C; 2]; 2] {
    let (s, c) = (sq.r.sinh(), sq.r.cosh());
    let nth = sq.n_thermal;
    let n = nth * (2.0 * sq.r).cosh() + s * s;
    let m = -C::from_polar(s * c * (2.0 * nth + 1.0), sq.theta);
    [
        [re(0.5 * (2.0 * n + 1.0 + 2.0 * m.re)), re(m.im) + 0.5 * I],
        [re(m.im) - 0.5 * I, re(0.5 * (2.0 * n + 1.0 - 2.0 * m.re))],
    ]
}

/// Force noise density of one sidemode bath per d(omega)/2pi.
pub fn bath(omega: f64, omega_k: f64, t: f64, gamma: f64) -> f64 {
    let occ = if t == 0.0 {
        1.0
    } else {
        1.0 / (HBAR * omega_k / (2.0 * K_B * t)).tanh()
    };
    gamma * omega.abs() / omega_k * (occ + 1.0)
}

/// sum_jl c_j conj(c_l) K_jl for real-time inputs, where c(-omega) = conj c(omega).
pub fn quadratic(c: &[C; 4], opt: &[[C; 2]; 2], th: [f64; 2]) -> f64 {
    let mut acc = C::new(0.0, 0.0);
    for j in 0..2 {
        for l in 0..2 {
            acc += c[j] * c[l].conj() * opt[j][l];
        }
    }
    acc.re + c[2].norm_sqr() * th[0] + c[3].norm_sqr() * th[1]
}

/// Single-tone spectrum at homodyne angle `phi` via direct inversion.
pub fn mono_spectrum(omega: f64, phi: f64, sys: &MonoSystem, sq: &SqueezeParams) -> f64 {
    let (q, p) = mono_by_inversion(omega, sys);
    let (s, co) = phi.sin_cos();
    let c = [0, 1, 2, 3].map(|j| q[j] * co + p[j] * s);
    let d = &sys.derived;
    let t = sys.params.bec_temperature_k;
    let th = [
        bath(omega, d.omega_c, t, d.gamma),
        bath(omega, d.omega_d, t, d.gamma),
    ];
    quadratic(&c, &optical_covariance(sq), th)
}

/// Vacuum-input spectrum in the compact form 1/2 |c_Q - i c_P|^2 + thermal.
pub fn vacuum_spectrum(omega: f64, phi: f64, sys: &MonoSystem) -> f64 {
    let (q, p) = mono_by_inversion(omega, sys);
    let (s, co) = phi.sin_cos();
    let c = [0, 1, 2, 3].map(|j| q[j] * co + p[j] * s);
    let d = &sys.derived;
    let t = sys.params.bec_temperature_k;
    0.5 * (c[0] - I * c[1]).norm_sqr()
        + c[2].norm_sqr() * bath(omega, d.omega_c, t, d.gamma)
        + c[3].norm_sqr() * bath(omega, d.omega_d, t, d.gamma)
}

/// Number of positive roots of n = n_1(n) + n_-1(n), by sign changes on a
/// dense logarithmic scan.
pub fn brute_root_count(p: &SystemParams, drive: &BaeDrive) -> usize {
    let d = Derived::new(p).unwrap();
    let k = KerrModel::Collisionless.coefficient(&d);
    let (ep, em) = drive.amplitudes(p).unwrap();
    let dl = drive.delta(&d);
    let q = 0.25 * d.kappa * d.kappa;
    let g =
        |n: f64| n - ep * ep / ((k * n - dl).powi(2) + q) - em * em / ((k * n + dl).powi(2) + q);
    // every root lies below (eps_+^2 + eps_-^2) / q
    let top = 1.01 * (ep * ep + em * em) / q;
    let steps = 400_000;
    let (lo, hi) = ((top * 1e-14).ln(), top.ln());
    let mut count = 0;
    let mut prev = g((lo).exp());
    for i in 1..=steps {
        let v = g((lo + (hi - lo) * i as f64 / steps as f64).exp());
        if (v < 0.0) != (prev < 0.0) {
            count += 1;
        }
        prev = v;
    }
    count
}

/// Mean tone amplitude without optomechanical shift.
pub fn linear_bae_amplitude(p: &SystemParams, drive: &BaeDrive) -> f64 {
    let d = Derived::new(p).unwrap();
    let (ep, em) = drive.amplitudes(p).unwrap();
    let dl = drive.delta(&d);
    ((ep * ep + em * em) / 2.0).sqrt() / (dl * dl + 0.25 * d.kappa * d.kappa).sqrt()
}

/// Bad-cavity parameters scaled down so a fixed-step integration resolves
/// every rate in well under a second of simulated time.
pub fn scaled_bae() -> BaeSystem {
    let p = SystemParams {
        kappa_hz: 2e4,
        gamma_hz: 20.0,
        ..SystemParams::paper_defaults()
    };
    BaeSystem::new(&p, &BaeDrive::symmetric(1e-12), ModelOptions::default()).unwrap()
}

/// Time-domain estimate of the Floquet components of the output phase
/// quadrature. Input `channel` (0 = Q_in, 1 = P_in, 2 = eps_c, 3 = eps_d) is
/// driven with e^{-i omega0 t}; the returned entry n + 2 is the amplitude of
/// the output at omega0 - n delta, n = -2..=2.
pub struct TimeDomain {
    pub step: f64,
    pub settle: f64,
    pub window: f64,
}

impl TimeDomain {
    pub fn components(&self, sys: &BaeSystem, omega0: f64, channel: usize) -> [C; 5] {
        let d = &sys.derived;
        let (k, g, gam) = (d.kappa, d.g, d.gamma);
        let (wc, wd) = (d.omega_c, d.omega_d);
        let dl = sys.delta();
        let lam0 = 2.0 * 2f64.sqrt() * g * sys.steady.a_bar;
        let sk = k.sqrt();
        let input = |t: f64| C::from_polar(1.0, -omega0 * t);
        // y = [dQ, dP, x_c, v_c, x_d, v_d]
        let rhs = |t: f64, y: &[C; 6]| -> [C; 6] {
            let u = input(t);
            let (qin, pin, ec, ed) = match channel {
                0 => (u, re(0.0), re(0.0), re(0.0)),
                1 => (re(0.0), u, re(0.0), re(0.0)),
                2 => (re(0.0), re(0.0), u, re(0.0)),
                _ => (re(0.0), re(0.0), re(0.0), u),
            };
            let lam = lam0 * (dl * t).cos();
            [
                -0.5 * k * y[0] + sk * qin,
                -0.5 * k * y[1] - lam * (y[2] + y[4]) + sk * pin,
                y[3],
                -wc * wc * y[2] - gam * y[3] - wc * lam * y[0] + wc * ec,
                y[5],
                -wd * wd * y[4] - gam * y[5] - wd * lam * y[0] + wd * ed,
            ]
        };
        let h = self.step;
        let n_settle = (self.settle / h).round() as usize;
        let n_win = (self.window / h).round() as usize;
        let mut y = [re(0.0); 6];
        let mut t = 0.0;
        let mut acc = [re(0.0); 5];
        let mut wsum = 0.0;
        for i in 0..n_settle + n_win {
            if i >= n_settle {
                let s = (i - n_settle) as f64 / n_win as f64;
                let w = (std::f64::consts::PI * s).sin().powi(2);
                let pin = if channel == 1 { input(t) } else { re(0.0) };
                let out = sk * y[1] - pin;
                for (j, a) in acc.iter_mut().enumerate() {
                    let n = j as f64 - 2.0;
                    *a += w * out * C::from_polar(1.0, (omega0 - n * dl) * t);
                }
                wsum += w;
            }
            let k1 = rhs(t, &y);
            let k2 = rhs(t + 0.5 * h, &add(&y, &k1, 0.5 * h));
            let k3 = rhs(t + 0.5 * h, &add(&y, &k2, 0.5 * h));
            let k4 = rhs(t + h, &add(&y, &k3, h));
            for j in 0..6 {
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            t = (i + 1) as f64 * h;
        }
        acc.map(|a| a / wsum)
    }
}

fn add(y: &[C; 6], k: &[C; 6], h: f64) -> [C; 6] {
    let mut out = *y;
    for j in 0..6 {
        out[j] += h * k[j];
    }
    out
}

/// Largest relative deviation between estimated and reference Floquet
/// components of one channel. Components below `floor` times the channel
/// maximum are compared in absolute terms against that maximum.
pub fn floquet_error(est: &[C; 5], reference: &[C; 5], floor: f64) -> f64 {
    let big = reference.iter().map(|z| z.norm()).fold(0.0, f64::max);
    est.iter()
        .zip(reference)
        .map(|(e, r)| {
            if r.norm() > floor * big {
                (e - r).norm() / r.norm()
            } else {
                (e - r).norm() / big
            }
        })
        .fold(0.0, f64::max)
}
