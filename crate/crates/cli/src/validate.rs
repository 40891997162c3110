//! Invariant checks run by the `validate` subcommand.

use std::f64::consts::PI;
use std::path::Path;

use ringsense::noise::optical_kernel;
use ringsense::numeric::linspace;
use ringsense::{
    bae_spectrum_on_grid, bae_steady_state, default_grid, floquet_coefficients,
    optimal_homodyne_angle, spectrum_on_grid, BaeSystem, Channels, HomodyneAngle, KerrModel,
    MonoSystem, SqueezeParams,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::parse_csv;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

fn closure_error(s: &[Channels]) -> f64 {
    s.iter()
        .map(|c| (c.total - c.channel_sum()).abs() / c.total.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Runs the invariant suite at the configured parameters. Solver errors are
/// reported as failed checks.
pub fn run_checks(cfg: &RunConfig) -> Vec<Check> {
    let mut out = Vec::new();
    let sq = cfg.squeeze;
    match MonoSystem::new(&cfg.params, cfg.options) {
        Ok(sys) => {
            let grid = default_grid(&sys.derived, 2000);
            match spectrum_on_grid(&grid, cfg.phi, &sys, &sq) {
                Ok(s) => {
                    let err = closure_error(&s);
                    out.push(check(
                        "mono channel closure",
                        err < 1e-10,
                        format!("max relative {err:e}"),
                    ));
                    let min = s.iter().map(|c| c.total).fold(f64::INFINITY, f64::min);
                    out.push(check(
                        "mono nonnegativity",
                        min >= 0.0,
                        format!("min {min:e}"),
                    ));
                }
                Err(e) => out.push(check("mono spectrum", false, e.to_string())),
            }
            let rotated = SqueezeParams {
                r: 0.0,
                theta: 1.234,
                n_thermal: 0.0,
            };
            match (
                spectrum_on_grid(&grid, cfg.phi, &sys, &rotated),
                spectrum_on_grid(&grid, cfg.phi, &sys, &SqueezeParams::VACUUM),
            ) {
                (Ok(a), Ok(b)) => {
                    let err = a
                        .iter()
                        .zip(&b)
                        .map(|(x, y)| (x.total - y.total).abs() / y.total)
                        .fold(0.0, f64::max);
                    out.push(check(
                        "vacuum reduction at r = 0",
                        err < 1e-12,
                        format!("max relative {err:e}"),
                    ));
                }
                _ => out.push(check(
                    "vacuum reduction at r = 0",
                    false,
                    "spectrum failed".into(),
                )),
            }
            let w = sys.derived.big_omega_c;
            match optimal_homodyne_angle(w, &sys, &SqueezeParams::VACUUM) {
                Ok(HomodyneAngle::Angle(a)) => out.push(check(
                    "unsqueezed homodyne angle",
                    a == PI / 2.0,
                    format!("phi/pi = {}", a / PI),
                )),
                other => out.push(check(
                    "unsqueezed homodyne angle",
                    false,
                    format!("{other:?}"),
                )),
            }
        }
        Err(e) => out.push(check("mono working point", false, e.to_string())),
    }
    match optical_kernel(&sq, cfg.options.squeeze) {
        Ok(k) => {
            let c = k.chi_qp - k.chi_pq;
            let ok = c.re == 2.0 && c.im == 0.0;
            out.push(check("commutator chi_QP - chi_PQ = 2", ok, format!("{c}")));
        }
        Err(e) => out.push(check(
            "commutator chi_QP - chi_PQ = 2",
            false,
            e.to_string(),
        )),
    }
    let drive = cfg.bae_drive();
    match bae_steady_state(&cfg.params, &drive, KerrModel::Collisionless)
        .and_then(|ss| ss.residuals(&cfg.params, &drive))
    {
        Ok((a, b)) => {
            let r = a.abs().max(b.abs());
            out.push(check(
                "coupled cubic residuals",
                r < 1e-10,
                format!("max {r:e}"),
            ));
        }
        Err(e) => out.push(check("coupled cubic residuals", false, e.to_string())),
    }
    match BaeSystem::new(&cfg.params, &drive, cfg.options) {
        Ok(sys) => {
            let half = 0.5 * sys.delta();
            let grid = linspace(half / 2000.0, 4.0 * half, 2000);
            let zero = grid.iter().all(|&w| {
                let c = floquet_coefficients(w, &sys);
                [-4, -3, 3, 4]
                    .iter()
                    .all(|&n| c.component(n).iter().all(|z| z.norm() == 0.0))
            });
            out.push(check(
                "Floquet truncation beyond |n| = 2",
                zero,
                String::new(),
            ));
            match bae_spectrum_on_grid(&grid, &sys, &sq) {
                Ok(s) => {
                    let err = closure_error(&s);
                    out.push(check(
                        "BAE channel closure",
                        err < 1e-10,
                        format!("max relative {err:e}"),
                    ));
                    let min = s.iter().map(|c| c.total).fold(f64::INFINITY, f64::min);
                    out.push(check(
                        "BAE nonnegativity",
                        min >= 0.0,
                        format!("min {min:e}"),
                    ));
                }
                Err(e) => out.push(check("BAE spectrum", false, e.to_string())),
            }
        }
        Err(e) => out.push(check("BAE working point", false, e.to_string())),
    }
    out
}

/// Parses every CSV below `dir`.
pub fn check_outputs(dir: &Path) -> Vec<Check> {
    let mut files = Vec::new();
    collect_csv(dir, &mut files);
    files.sort();
    files
        .into_iter()
        .map(|f| {
            let name = format!("csv {}", f.display());
            match std::fs::read_to_string(&f)
                .map_err(|e| e.to_string())
                .and_then(|t| parse_csv(&t))
            {
                Ok(p) => check(&name, true, format!("{} rows", p.rows.len())),
                Err(e) => check(&name, false, e),
            }
        })
        .collect()
}

fn collect_csv(dir: &Path, out: &mut Vec<std::path::PathBuf>) {
    let Ok(entries) = std::fs::read_dir(dir) else {
        return;
    };
    for e in entries.flatten() {
        let p = e.path();
        if p.is_dir() {
            collect_csv(&p, out);
        } else if p.extension().is_some_and(|x| x == "csv") {
            out.push(p);
        }
    }
}
