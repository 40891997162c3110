//! One computation per subcommand, producing a table and a JSON summary for a
//! single sweep point.

use std::f64::consts::PI;

use ringsense::numeric::{golden_min, linspace, logspace};
use ringsense::sensitivity::{hz, PointStatus};
use ringsense::{
    bae_spectrum, bae_steady_state, bistability_map, default_grid, enhancement_factor,
    noise_budget_vs_power, optimal_homodyne_angle, sensitivity_curve, solve_steady_state,
    spectral_density, to_db, BaeSystem, Channels, Derived, Error, HomodyneAngle, KerrModel,
    MonoSystem, Scheme, SqueezeParams, SystemParams,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, SchemeKind};
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    BaeSpectrum,
    Sensitivity,
    Budget,
    Bistability,
    SteadyState,
    AngleScan,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::BaeSpectrum => "bae-spectrum",
            Command::Sensitivity => "sensitivity",
            Command::Budget => "budget",
            Command::Bistability => "bistability",
            Command::SteadyState => "steady-state",
            Command::AngleScan => "angle-scan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    BistableSkipped,
    Failed,
}

pub struct PointResult {
    pub status: Status,
    pub table: Table,
    pub summary: Value,
}

impl PointResult {
    fn from_error(e: Error) -> Self {
        let status = match e {
            Error::Bistable { .. } => Status::BistableSkipped,
            _ => Status::Failed,
        };
        PointResult {
            status,
            table: Table::new(&[]),
            summary: json!({ "error": e.to_string() }),
        }
    }
}

pub fn run_point(cmd: Command, cfg: &RunConfig) -> PointResult {
    let r = match cmd {
        Command::Spectrum => spectrum(cfg),
        Command::BaeSpectrum => bae(cfg),
        Command::Sensitivity => sensitivity(cfg),
        Command::Budget => budget(cfg),
        Command::Bistability => bistability(cfg),
        Command::SteadyState => steady_state(cfg),
        Command::AngleScan => angle_scan(cfg),
    };
    r.unwrap_or_else(PointResult::from_error)
}

const SPECTRUM_COLUMNS: &[(&str, &str)] = &[
    ("omega_hz", "Hz"),
    ("S_total", "1/Hz"),
    ("S_sn", "1/Hz"),
    ("S_rp", "1/Hz"),
    ("S_th", "1/Hz"),
    ("S_add", "1/Hz"),
];

fn channel_row(omega: f64, c: &Channels) -> Vec<Cell> {
    vec![
        Cell::Num(hz(omega)),
        Cell::Num(c.total),
        Cell::Num(c.shot),
        Cell::Num(c.radiation_pressure),
        Cell::Num(c.thermal),
        Cell::Num(c.squeeze_extra),
    ]
}

fn grid_or(cfg: &RunConfig, default: impl FnOnce() -> Vec<f64>) -> Vec<f64> {
    match &cfg.grid {
        Some(r) => r.values().into_iter().map(ringsense::consts::ang).collect(),
        None => default(),
    }
}

/// Interior local maxima `(omega, value)`, highest first.
fn local_maxima(omega: &[f64], v: &[f64]) -> Vec<(f64, f64)> {
    let mut m: Vec<(f64, f64)> = (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1])
        .map(|i| (omega[i], v[i]))
        .collect();
    m.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    m
}

fn spectrum(cfg: &RunConfig) -> Result<PointResult, Error> {
    let sys = MonoSystem::new(&cfg.params, cfg.options)?;
    let grid = grid_or(cfg, || default_grid(&sys.derived, 10_000));
    let s = ringsense::spectrum_on_grid(&grid, cfg.phi, &sys, &cfg.squeeze)?;
    let mut table = Table::new(SPECTRUM_COLUMNS);
    for (w, c) in grid.iter().zip(&s) {
        table.push(channel_row(*w, c));
    }
    let totals: Vec<f64> = s.iter().map(|c| c.total).collect();
    let peaks: Vec<f64> = local_maxima(&grid, &totals)
        .iter()
        .take(2)
        .map(|p| hz(p.0))
        .collect();
    let min = totals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PointResult {
        status: Status::Ok,
        table,
        summary: json!({
            "peaks_hz": peaks,
            "max_total": totals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            "min_total": min,
            "shot_floor": sys.shot_floor(),
            "below_shot_floor": min < sys.shot_floor(),
            "photons": sys.steady.n,
        }),
    })
}

/// Argmax of the BAE spectrum below delta/2, refined by golden-section search.
pub fn bae_peak(sys: &BaeSystem, grid: &[f64], totals: &[f64], sq: &SqueezeParams) -> Option<f64> {
    let cut = 0.5 * sys.delta();
    let i = (0..grid.len())
        .filter(|&i| grid[i] > 0.0 && grid[i] < cut)
        .max_by(|a, b| totals[*a].partial_cmp(&totals[*b]).unwrap())?;
    if i == 0 || i + 1 >= grid.len() {
        return Some(grid[i]);
    }
    let f = |w: f64| {
        -bae_spectrum(w, sys, sq)
            .map(|c| c.total)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (w, fw) = golden_min(f, grid[i - 1], grid[i + 1], 1e-9);
    Some(if -fw >= totals[i] { w } else { grid[i] })
}

fn bae(cfg: &RunConfig) -> Result<PointResult, Error> {
    let sys = BaeSystem::new(&cfg.params, &cfg.bae_drive(), cfg.options)?;
    let cut = 0.5 * sys.delta();
    let grid = grid_or(cfg, || linspace(cut / 10_000.0, cut, 10_000));
    let s = ringsense::bae_spectrum_on_grid(&grid, &sys, &cfg.squeeze)?;
    let mut table = Table::new(SPECTRUM_COLUMNS);
    for (w, c) in grid.iter().zip(&s) {
        table.push(channel_row(*w, c));
    }
    let totals: Vec<f64> = s.iter().map(|c| c.total).collect();
    let peak = bae_peak(&sys, &grid, &totals, &cfg.squeeze);
    Ok(PointResult {
        status: Status::Ok,
        table,
        summary: json!({
            "peak_hz": peak.map(hz),
            "delta_hz": hz(sys.delta()),
            "a_bar": sys.steady.a_bar,
            "max_total": totals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            "min_total": totals.iter().copied().fold(f64::INFINITY, f64::min),
        }),
    })
}

fn scheme(cfg: &RunConfig) -> Scheme {
    match cfg.scheme {
        SchemeKind::MonoSqueezed => Scheme::Mono { phi: cfg.phi },
        SchemeKind::Bae => Scheme::Bae,
    }
}

fn sensitivity(cfg: &RunConfig) -> Result<PointResult, Error> {
    let grid = cfg.grid.as_ref().map(|r| {
        r.values()
            .into_iter()
            .map(ringsense::consts::ang)
            .collect::<Vec<_>>()
    });
    let c = sensitivity_curve(
        scheme(cfg),
        &cfg.params,
        &cfg.squeeze,
        cfg.options,
        grid.as_deref(),
    )?;
    let mut table = Table::new(&[("omega_hz", "Hz"), ("zeta", "hbar*s^0.5")]);
    for (w, z) in c.omega.iter().zip(&c.zeta) {
        table.push(vec![Cell::Num(hz(*w)), Cell::Num(*z)]);
    }
    let enhancement = enhancement_factor(scheme(cfg), &cfg.params, &cfg.squeeze, cfg.options)?;
    Ok(PointResult {
        status: Status::Ok,
        table,
        summary: json!({
            "omega_opt_hz": hz(c.omega_opt),
            "zeta_opt": c.zeta_opt,
            "local_minima_hz": c.local_minima.iter().take(2).map(|m| hz(m.0)).collect::<Vec<_>>(),
            "enhancement": enhancement,
            "enhancement_db": to_db(enhancement),
        }),
    })
}

fn default_powers() -> Vec<f64> {
    logspace(1e-19, 1e-11, 33)
}

fn budget(cfg: &RunConfig) -> Result<PointResult, Error> {
    let powers = cfg
        .powers
        .as_ref()
        .map(|r| r.values())
        .unwrap_or_else(default_powers);
    let curve =
        noise_budget_vs_power(scheme(cfg), &cfg.params, &cfg.squeeze, cfg.options, &powers)?;
    let mut table = Table::new(&[
        ("power_w", "W"),
        ("status", "-"),
        ("omega_opt_hz", "Hz"),
        ("zeta_opt", "hbar*s^0.5"),
        ("t_meas_s", "s"),
        ("S_total", "1/Hz*s"),
        ("S_sn", "1/Hz*s"),
        ("S_rp", "1/Hz*s"),
        ("S_th", "1/Hz*s"),
        ("S_add", "1/Hz*s"),
    ]);
    for p in &curve.points {
        let status = match p.status {
            PointStatus::Ok => "ok",
            PointStatus::BistableSkipped => "bistable-skipped",
            PointStatus::Failed => "failed",
        };
        let r = &p.referred;
        table.push(vec![
            Cell::Num(p.power_w),
            Cell::Text(status.into()),
            Cell::Num(hz(p.omega_opt)),
            Cell::Num(p.zeta_opt),
            Cell::Num(p.t_meas),
            Cell::Num(r.total),
            Cell::Num(r.shot),
            Cell::Num(r.radiation_pressure),
            Cell::Num(r.thermal),
            Cell::Num(r.squeeze_extra),
        ]);
    }
    let ok: Vec<_> = curve
        .points
        .iter()
        .filter(|p| p.status == PointStatus::Ok)
        .collect();
    let best = ok
        .iter()
        .min_by(|a, b| a.referred.total.partial_cmp(&b.referred.total).unwrap());
    // log-interpolated powers where the measurement noise crosses S_SQL
    let mut crossings = Vec::new();
    for w in ok.windows(2) {
        let (a, b) = (
            w[0].referred.measurement() - curve.s_sql,
            w[1].referred.measurement() - curve.s_sql,
        );
        if a.signum() != b.signum() {
            let t = a / (a - b);
            crossings.push((w[0].power_w.ln() + t * (w[1].power_w.ln() - w[0].power_w.ln())).exp());
        }
    }
    Ok(PointResult {
        status: Status::Ok,
        table,
        summary: json!({
            "s_min": curve.s_min,
            "s_sql": curve.s_sql,
            "optimal_power_w": best.map(|p| p.power_w),
            "sql_crossings_w": crossings,
            "below_sql_points": ok.iter().filter(|p| p.referred.measurement() < curve.s_sql).count(),
            "skipped_points": curve.points.len() - ok.len(),
        }),
    })
}

fn bistability(cfg: &RunConfig) -> Result<PointResult, Error> {
    let spec = cfg
        .bistability
        .clone()
        .unwrap_or(crate::config::BistabilitySpec {
            axis: crate::config::BistabilityKind::Power,
            range: crate::config::Range {
                start: 1e-15,
                stop: 1e-3,
                points: 49,
                spacing: crate::config::Spacing::Log,
            },
        });
    let value_unit = match spec.axis {
        crate::config::BistabilityKind::Power => "W",
        crate::config::BistabilityKind::Kappa => "Hz",
    };
    match cfg.scheme {
        SchemeKind::Bae => {
            let pts = bistability_map(
                &cfg.params,
                &cfg.bae_drive(),
                KerrModel::Collisionless,
                &spec.axis(),
            );
            let mut table = Table::new(&[
                ("value", value_unit),
                ("branch_count", "-"),
                ("n_plus1", "photons"),
                ("n_minus1", "photons"),
                ("cubic_plus_roots", "-"),
                ("cubic_minus_roots", "-"),
                ("converged", "-"),
            ]);
            for p in &pts {
                table.push(vec![
                    Cell::Num(p.value),
                    Cell::Int(p.branch_count as i64),
                    Cell::Num(p.n_plus1),
                    Cell::Num(p.n_minus1),
                    Cell::Int(p.cubic_counts.0 as i64),
                    Cell::Int(p.cubic_counts.1 as i64),
                    Cell::Int(p.converged as i64),
                ]);
            }
            let multi: Vec<f64> = pts
                .iter()
                .filter(|p| p.branch_count > 1)
                .map(|p| p.value)
                .collect();
            Ok(PointResult {
                status: Status::Ok,
                table,
                summary: json!({
                    "multistable_values": multi,
                    "max_branches": pts.iter().map(|p| p.branch_count).max(),
                }),
            })
        }
        SchemeKind::MonoSqueezed => {
            let mut table = Table::new(&[
                ("value", value_unit),
                ("branch_count", "-"),
                ("n", "photons"),
            ]);
            let mut multi = Vec::new();
            for v in spec.range.values() {
                let p = match spec.axis {
                    crate::config::BistabilityKind::Power => cfg.params.with_power(v),
                    crate::config::BistabilityKind::Kappa => SystemParams {
                        kappa_hz: v,
                        ..cfg.params.clone()
                    },
                };
                let ss = solve_steady_state(&p)?;
                if ss.branch_count > 1 {
                    multi.push(v);
                }
                table.push(vec![
                    Cell::Num(v),
                    Cell::Int(ss.branch_count as i64),
                    Cell::Num(ss.n),
                ]);
            }
            Ok(PointResult {
                status: Status::Ok,
                table,
                summary: json!({ "multistable_values": multi }),
            })
        }
    }
}

fn steady_state(cfg: &RunConfig) -> Result<PointResult, Error> {
    let powers = cfg
        .powers
        .as_ref()
        .map(|r| r.values())
        .unwrap_or_else(|| vec![cfg.params.power_w]);
    match cfg.scheme {
        SchemeKind::MonoSqueezed => {
            let mut table = Table::new(&[
                ("power_w", "W"),
                ("n", "photons"),
                ("a_s", "sqrt(photons)"),
                ("x_c", "-"),
                ("x_d", "-"),
                ("effective_detuning_hz", "rad/s/2pi"),
                ("branch_count", "-"),
            ]);
            for w in &powers {
                let ss = solve_steady_state(&cfg.params.with_power(*w))?;
                table.push(vec![
                    Cell::Num(*w),
                    Cell::Num(ss.n),
                    Cell::Num(ss.a_s),
                    Cell::Num(ss.x_c),
                    Cell::Num(ss.x_d),
                    Cell::Num(hz(ss.effective_detuning)),
                    Cell::Int(ss.branch_count as i64),
                ]);
            }
            let d = Derived::new(&cfg.params)?;
            Ok(PointResult {
                status: Status::Ok,
                table,
                summary: json!({
                    "sidemode_hz": [hz(d.omega_c), hz(d.omega_d)],
                    "shifted_sidemode_hz": [hz(d.big_omega_c), hz(d.big_omega_d)],
                    "half_gap_hz": hz(d.half_gap),
                    "eta": d.eta,
                }),
            })
        }
        SchemeKind::Bae => {
            let mut table = Table::new(&[
                ("power_w", "W"),
                ("n_plus1", "photons"),
                ("n_minus1", "photons"),
                ("a_bar", "sqrt(photons)"),
                ("branch_count", "-"),
                ("residual_plus", "-"),
                ("residual_minus", "-"),
            ]);
            for w in &powers {
                let p = cfg.params.with_power(*w);
                let drive = ringsense::BaeDrive {
                    power_plus_w: *w,
                    power_minus_w: *w,
                    ..cfg.bae_drive()
                };
                let ss = bae_steady_state(&p, &drive, KerrModel::Collisionless)?;
                let (r1, r2) = ss.residuals(&p, &drive)?;
                table.push(vec![
                    Cell::Num(*w),
                    Cell::Num(ss.n_plus1),
                    Cell::Num(ss.n_minus1),
                    Cell::Num(ss.a_bar),
                    Cell::Int(ss.branches.len() as i64),
                    Cell::Num(r1),
                    Cell::Num(r2),
                ]);
            }
            Ok(PointResult {
                status: Status::Ok,
                table,
                summary: json!({ "kerr_per_photon": KerrModel::Collisionless.coefficient(&Derived::new(&cfg.params)?) }),
            })
        }
    }
}

fn angle_scan(cfg: &RunConfig) -> Result<PointResult, Error> {
    if cfg.scheme == SchemeKind::Bae {
        return Err(Error::Domain {
            field: "scheme".into(),
            reason: "angle-scan applies to the single-tone scheme".into(),
        });
    }
    let sys = MonoSystem::new(&cfg.params, cfg.options)?;
    let d = &sys.derived;
    let grid = grid_or(cfg, || {
        linspace(0.5 * d.big_omega_d, 1.2 * d.big_omega_c, 401)
    });
    let angles = cfg
        .angles
        .as_ref()
        .map(|r| r.values())
        .unwrap_or_else(|| linspace(0.0, 1.0, 65));
    let mut table = Table::new(&[
        ("phi_over_pi", "-"),
        ("omega_hz", "Hz"),
        ("S_total", "1/Hz"),
    ]);
    let mut ridge = Vec::with_capacity(grid.len());
    let mut rows = vec![Vec::new(); angles.len()];
    for &w in &grid {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for (i, a) in angles.iter().enumerate() {
            let s = spectral_density(w, a * PI, &sys, &cfg.squeeze)?.total;
            if s > best.0 {
                best = (s, *a);
            }
            rows[i].push(vec![Cell::Num(*a), Cell::Num(hz(w)), Cell::Num(s)]);
        }
        ridge.push(best.1);
    }
    for r in rows.into_iter().flatten() {
        table.push(r);
    }
    let spec = ringsense::spectrum_on_grid(&grid, PI / 2.0, &sys, &cfg.squeeze)?;
    let totals: Vec<f64> = spec.iter().map(|c| c.total).collect();
    let peak = local_maxima(&grid, &totals)
        .first()
        .map(|p| p.0)
        .unwrap_or(grid[0]);
    let at_peak = match optimal_homodyne_angle(peak, &sys, &cfg.squeeze)? {
        HomodyneAngle::Angle(a) => Some(a / PI),
        HomodyneAngle::Indeterminate => None,
    };
    let ridge_at_peak = grid.iter().position(|w| *w == peak).map(|i| ridge[i]);
    Ok(PointResult {
        status: Status::Ok,
        table,
        summary: json!({
            "peak_hz": hz(peak),
            "ridge_phi_over_pi_at_peak": ridge_at_peak,
            "optimal_phi_over_pi_at_peak": at_peak,
        }),
    })
}
