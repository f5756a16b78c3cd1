//! JSON run configuration.

use krein::finitegap::{ProfileSpec, ENDPOINT_MARGIN};
use krein::KreinProfile;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// `[v, ...]` or `{"start": a, "stop": b, "count": n}` (both ends included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        let pts = match self {
            GridSpec::List(v) => v.clone(),
            GridSpec::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n)
                    .map(|k| start + (stop - start) * k as f64 / (*n - 1) as f64)
                    .collect(),
            },
        };
        if pts.is_empty() {
            return Err(CliError::Config("grid is empty".into()));
        }
        if pts.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config("grid holds a non-finite value".into()));
        }
        Ok(pts)
    }
}

/// `[[re, im], ...]` or the product `{"re": grid, "im": grid}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZGridSpec {
    List(Vec<[f64; 2]>),
    Product { re: GridSpec, im: GridSpec },
}

impl ZGridSpec {
    pub fn points(&self) -> Result<Vec<Complex64>, CliError> {
        let pts: Vec<Complex64> = match self {
            ZGridSpec::List(v) => v.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
            ZGridSpec::Product { re, im } => {
                let (re, im) = (re.points()?, im.points()?);
                im.iter()
                    .flat_map(|&y| re.iter().map(move |&x| Complex64::new(x, y)))
                    .collect()
            }
        };
        if pts.is_empty() {
            return Err(CliError::Config("z-grid is empty".into()));
        }
        if let Some(z) = pts.iter().find(|z| !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CliError::Config(format!("z-grid point {z} is not in the open upper half-plane")));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default)]
    pub z: Option<ZGridSpec>,
    #[serde(default)]
    pub t: Option<GridSpec>,
    #[serde(default)]
    pub x: Option<GridSpec>,
    #[serde(default)]
    pub y: Option<GridSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_xi_tol")]
    pub xi_tol: f64,
    #[serde(default = "default_margin")]
    pub endpoint_margin: f64,
}

fn default_xi_tol() -> f64 {
    1e-6
}

fn default_margin() -> f64 {
    ENDPOINT_MARGIN
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            xi_tol: default_xi_tol(),
            endpoint_margin: default_margin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantPotential {
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must match the subcommand when present.
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Constant potential for `oracle`.
    #[serde(default)]
    pub potential: Option<ConstantPotential>,
    /// Number of seeded random uniform profiles added to a `verify` batch.
    #[serde(default)]
    pub random_profiles: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        if !(t.xi_tol > 0.0 && t.xi_tol.is_finite()) {
            return Err(CliError::Config(format!("xi_tol must be positive, got {}", t.xi_tol)));
        }
        if !(t.endpoint_margin > 0.0 && t.endpoint_margin < 0.5) {
            return Err(CliError::Config(format!(
                "endpoint_margin must lie in (0, 0.5), got {}",
                t.endpoint_margin
            )));
        }
        Ok(())
    }

    pub fn check_command(&self, name: &str) -> Result<(), CliError> {
        match &self.command {
            Some(c) if c != name => Err(CliError::Config(format!(
                "config is for `{c}` but `{name}` was run"
            ))),
            _ => Ok(()),
        }
    }

    /// The configured profile with the configured endpoint margin, if any.
    pub fn profile(&self) -> Result<Option<KreinProfile>, CliError> {
        self.profile
            .as_ref()
            .map(|spec| {
                spec.to_profile()
                    .and_then(|p| p.with_endpoint_margin(self.tolerances.endpoint_margin))
                    .map_err(|e| CliError::Config(e.to_string()))
            })
            .transpose()
    }

    pub fn require_profile(&self) -> Result<KreinProfile, CliError> {
        self.profile()?
            .ok_or_else(|| CliError::Config("`profile` is required".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_include_both_ends() {
        let g: GridSpec = serde_json::from_str(r#"{"start": 0, "stop": 1, "count": 5}"#).unwrap();
        assert_eq!(g.points().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g: GridSpec = serde_json::from_str("[2, 3]").unwrap();
        assert_eq!(g.points().unwrap(), vec![2.0, 3.0]);
        let g: GridSpec = serde_json::from_str("[]").unwrap();
        assert!(g.points().is_err());
    }

    #[test]
    fn z_product_runs_re_fastest() {
        let z: ZGridSpec = serde_json::from_str(r#"{"re": [0, 1], "im": [1, 2]}"#).unwrap();
        let pts = z.points().unwrap();
        assert_eq!(pts[1], Complex64::new(1.0, 1.0));
        assert_eq!(pts[2], Complex64::new(0.0, 2.0));
        let z: ZGridSpec = serde_json::from_str("[[0, -1]]").unwrap();
        assert!(z.points().is_err());
    }

    #[test]
    fn defaults_and_command_check() {
        let cfg = RunConfig::from_json(r#"{"command": "verify"}"#).unwrap();
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert!(cfg.check_command("verify").is_ok());
        assert!(cfg.check_command("evolve").is_err());
        assert!(RunConfig::from_json(r#"{"tolerances": {"endpoint_margin": 0}}"#).is_err());
    }
}
