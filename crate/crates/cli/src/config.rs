//! Run configuration: TOML on top of an embedded preset, sweep axes addressed
//! by dotted parameter paths, and a stable content hash.

use ringsense::{BaeDrive, BistabilityAxis, ModelOptions, SqueezeParams, SystemParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    #[default]
    MonoSqueezed,
    Bae,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => ringsense::numeric::linspace(self.start, self.stop, self.points),
            Spacing::Log => ringsense::numeric::logspace(self.start, self.stop, self.points),
        }
    }

    fn check(&self, field: &str) -> Result<(), CliError> {
        let bad = |reason: &str| CliError::Config {
            field: field.to_string(),
            reason: reason.to_string(),
        };
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(bad("range bounds must be finite"));
        }
        if self.points == 0 {
            return Err(bad("points must be >= 1"));
        }
        if self.points > 1 && self.start >= self.stop {
            return Err(bad("start must be below stop"));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(bad("log spacing needs positive bounds"));
        }
        Ok(())
    }
}

/// A swept parameter, e.g. `path = "params.power_w"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub path: String,
    #[serde(flatten)]
    pub range: Range,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BistabilityKind {
    Power,
    Kappa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BistabilitySpec {
    pub axis: BistabilityKind,
    #[serde(flatten)]
    pub range: Range,
}

impl BistabilitySpec {
    pub fn axis(&self) -> BistabilityAxis {
        match self.axis {
            BistabilityKind::Power => BistabilityAxis::Power(self.range.values()),
            BistabilityKind::Kappa => BistabilityAxis::Kappa(self.range.values()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Emit {
    pub csv: bool,
    pub json: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Emit {
            csv: true,
            json: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    pub params: SystemParams,
    pub squeeze: SqueezeParams,
    #[serde(default)]
    pub options: ModelOptions,
    /// Two-tone drive; defaults to both tones at `params.power_w`.
    #[serde(default)]
    pub drive: Option<BaeDrive>,
    /// Homodyne angle, rad.
    pub phi: f64,
    /// Analysis frequencies, Hz. Defaults depend on the scheme.
    #[serde(default)]
    pub grid: Option<Range>,
    /// Drive powers for `budget` and `steady-state`, W.
    #[serde(default)]
    pub powers: Option<Range>,
    #[serde(default)]
    pub bistability: Option<BistabilitySpec>,
    /// Homodyne angles for `angle-scan`, in units of pi.
    #[serde(default)]
    pub angles: Option<Range>,
    #[serde(default)]
    pub sweep: Vec<SweepAxis>,
    #[serde(default)]
    pub emit: Emit,
    #[serde(default)]
    pub jobs: Option<usize>,
}

pub const PRESET_NAMES: &[&str] = &["paper-defaults"];

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self, CliError> {
        match name {
            "paper-defaults" => Ok(RunConfig {
                scheme: SchemeKind::MonoSqueezed,
                params: SystemParams::paper_defaults(),
                squeeze: SqueezeParams::VACUUM,
                options: ModelOptions::default(),
                drive: None,
                phi: std::f64::consts::FRAC_PI_2,
                grid: None,
                powers: None,
                bistability: None,
                angles: None,
                sweep: Vec::new(),
                emit: Emit::default(),
                jobs: None,
            }),
            other => Err(CliError::Config {
                field: "preset".into(),
                reason: format!(
                    "unknown preset `{other}`; known: {}",
                    PRESET_NAMES.join(", ")
                ),
            }),
        }
    }

    /// Parses `text` as overrides on top of `base`. Tables merge key by key.
    pub fn from_toml(text: &str, base: &RunConfig) -> Result<Self, CliError> {
        let user: toml::Value = toml::from_str(text).map_err(|e| CliError::Config {
            field: "<file>".into(),
            reason: e.to_string(),
        })?;
        let user = serde_json::to_value(user).map_err(|e| CliError::Config {
            field: "<file>".into(),
            reason: e.to_string(),
        })?;
        let mut merged = serde_json::to_value(base).expect("config serialises");
        merge(&mut merged, user);
        let cfg: RunConfig = serde_json::from_value(merged).map_err(|e| CliError::Config {
            field: "<file>".into(),
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate().map_err(|e| CliError::Config {
            field: "params".into(),
            reason: e.to_string(),
        })?;
        if !(self.squeeze.r >= 0.0 && self.squeeze.r.is_finite() && self.squeeze.theta.is_finite())
        {
            return Err(CliError::Config {
                field: "squeeze".into(),
                reason: "r must be finite and >= 0, theta finite".into(),
            });
        }
        if !self.phi.is_finite() {
            return Err(CliError::Config {
                field: "phi".into(),
                reason: "must be finite".into(),
            });
        }
        for (name, r) in [
            ("grid", &self.grid),
            ("powers", &self.powers),
            ("angles", &self.angles),
        ] {
            if let Some(r) = r {
                r.check(name)?;
            }
        }
        if let Some(b) = &self.bistability {
            b.range.check("bistability")?;
        }
        let tree = serde_json::to_value(self).expect("config serialises");
        for (i, axis) in self.sweep.iter().enumerate() {
            let field = format!("sweep[{i}]");
            axis.range.check(&field)?;
            match lookup(&tree, &axis.path) {
                Some(Value::Number(_)) => {}
                Some(_) => {
                    return Err(CliError::Config {
                        field,
                        reason: format!("`{}` is not a numeric parameter", axis.path),
                    })
                }
                None => {
                    return Err(CliError::Config {
                        field,
                        reason: format!("unknown parameter path `{}`", axis.path),
                    })
                }
            }
        }
        if self.jobs == Some(0) {
            return Err(CliError::Config {
                field: "jobs".into(),
                reason: "must be >= 1".into(),
            });
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form, together with the command.
    pub fn hash(&self, command: &str) -> String {
        let mut canon = serde_json::to_value(self).expect("config serialises");
        // parallelism does not change results
        if let Value::Object(m) = &mut canon {
            m.remove("jobs");
        }
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0u8]);
        h.update(serde_json::to_string(&canon).expect("json").as_bytes());
        hex::encode(h.finalize())
    }

    /// One config per point of the Cartesian product of the sweep axes, in
    /// row-major order (last axis fastest), with the overrides applied.
    pub fn expand(&self) -> Result<Vec<(Vec<(String, f64)>, RunConfig)>, CliError> {
        let axes: Vec<(String, Vec<f64>)> = self
            .sweep
            .iter()
            .map(|a| (a.path.clone(), a.range.values()))
            .collect();
        let total: usize = axes.iter().map(|(_, v)| v.len()).product();
        let base = serde_json::to_value(self).expect("config serialises");
        let mut out = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut tree = base.clone();
            let mut overrides = Vec::new();
            for (path, values) in axes.iter().rev() {
                let v = values[idx % values.len()];
                idx /= values.len();
                *lookup_mut(&mut tree, path).expect("validated path") = serde_json::json!(v);
                overrides.push((path.clone(), v));
            }
            overrides.reverse();
            if let Value::Object(m) = &mut tree {
                m.insert("sweep".into(), Value::Array(Vec::new()));
            }
            let cfg: RunConfig = serde_json::from_value(tree).map_err(|e| CliError::Config {
                field: "sweep".into(),
                reason: e.to_string(),
            })?;
            cfg.validate()?;
            out.push((overrides, cfg));
        }
        Ok(out)
    }

    pub fn bae_drive(&self) -> BaeDrive {
        self.drive
            .unwrap_or_else(|| BaeDrive::symmetric(self.params.power_w))
    }
}

fn merge(base: &mut Value, user: Value) {
    match (base, user) {
        (Value::Object(b), Value::Object(u)) => {
            for (k, v) in u {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, u) => *b = u,
    }
}

fn lookup<'a>(tree: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(tree, |node, key| node.get(key))
}

fn lookup_mut<'a>(tree: &'a mut Value, path: &str) -> Option<&'a mut Value> {
    path.split('.')
        .try_fold(tree, |node, key| node.get_mut(key))
}
