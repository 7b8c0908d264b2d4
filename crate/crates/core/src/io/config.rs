use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::IoError;
use crate::flow::{FlowConfig, FlowMode};
use crate::grid::{BoundaryKind, DomainKind, DomainSpec};
use crate::renorm::ConeProfile;
use crate::solutions::{BarrierSpec, ExactSolution};
use crate::verify::BOUNDARY_H_CONSTANT;

pub const SCHEMA_VERSION: u32 = 1;

/// Initial data, sampled on the configured domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Flat {},
    /// A closed-form solution sampled at `t0`, which also becomes the
    /// start time of the flow.
    Exact {
        solution: ExactSolution,
        #[serde(default)]
        t0: f64,
    },
    /// `amplitude * prod_i cos(pi (x_i - lo_i) / (hi_i - lo_i))` in the first
    /// component.
    Cosine { amplitude: f64 },
    /// `u(x) = A x + offset`, plus `bump * prod_i sin(pi (x_i - lo_i) / (hi_i - lo_i))`
    /// in the first component. `matrix` has `m` rows of `n` entries.
    Affine {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        offset: Vec<f64>,
        #[serde(default)]
        bump: f64,
    },
    /// Node values, row-major with `m` components per node.
    Inline { u: Vec<f64> },
    /// `U(x) |x| / sqrt(|x|^2 + rho^2)` for a homogeneous cone `U`.
    Cone { profile: ConeProfile, rho: f64 },
    /// A saved state. Its domain and time replace the configured ones.
    Snapshot { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Displacement,
    HDecay,
    GradientPrinciple,
    TameCurvature,
    Acausal,
    DirichletBoundaryH,
    Barriers,
    EntireConvergence,
}

fn default_boundary_h() -> f64 {
    BOUNDARY_H_CONSTANT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {
    #[serde(default = "default_boundary_h")]
    pub boundary_h_constant: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self { boundary_h_constant: default_boundary_h() }
    }
}

fn default_core() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenormParams {
    /// Residuals are taken over `|x~| <= core_fraction * half-width`.
    #[serde(default = "default_core")]
    pub core_fraction: f64,
    /// Fail when the final residual exceeds this.
    #[serde(default)]
    pub residual_tol: Option<f64>,
}

impl Default for RenormParams {
    fn default() -> Self {
        Self { core_fraction: default_core(), residual_tol: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct G2Params {
    /// Bound on the discrete `d phi`; defaults to `h^2`.
    #[serde(default)]
    pub closed_tol: Option<f64>,
    /// Bound on terminal `sup ||H||^2`; defaults to the square of the
    /// flow's steady-state tolerance.
    #[serde(default)]
    pub torsion_tol: Option<f64>,
}

fn default_order_tol() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleParams {
    pub solution: ExactSolution,
    pub n: usize,
    pub bounds: [f64; 2],
    pub times: Vec<f64>,
    pub spacings: Vec<f64>,
    #[serde(default = "default_order_tol")]
    pub order_tol: f64,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// `(n, m)`.
    pub signature: [usize; 2],
    pub domain: DomainSpec,
    pub initial: InitialData,
    pub flow: FlowConfig,
    #[serde(default)]
    pub barriers: Vec<BarrierSpec>,
    #[serde(default)]
    pub checks: Vec<CheckName>,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    /// Only used by randomized tests; the flow is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub verify: VerifyParams,
    #[serde(default)]
    pub renorm: Option<RenormParams>,
    #[serde(default)]
    pub g2: Option<G2Params>,
    #[serde(default)]
    pub oracle: Option<OracleParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::Json,
            _ => Self::Toml,
        }
    }
}

fn cfg_err(e: impl std::fmt::Display) -> IoError {
    IoError::Config(e.to_string())
}

fn parse_value(text: &str, format: Format) -> Result<Value, IoError> {
    match format {
        Format::Toml => toml::from_str(text).map_err(cfg_err),
        Format::Json => serde_json::from_str(text).map_err(cfg_err),
    }
}

/// Parses a `value` written as a TOML literal; anything that does not parse
/// is taken as a bare string.
fn override_value(raw: &str) -> Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|t| t.get("v").cloned())
        .and_then(|v| serde_json::to_value(v).ok())
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `key.path=value` to a parsed document. Numeric path segments
/// index arrays; missing object keys are created.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), IoError> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| cfg_err(format!("override `{spec}` is not key=value")))?;
    let path = path.trim();
    if path.is_empty() {
        return Err(cfg_err(format!("override `{spec}` has an empty key")));
    }
    let mut cur = doc;
    for seg in path.split('.') {
        cur = match cur {
            Value::Object(map) => map.entry(seg.to_string()).or_insert(Value::Null),
            Value::Array(items) => {
                let i: usize = seg.parse().map_err(|_| cfg_err(format!("`{seg}` in `{path}` must index an array")))?;
                let len = items.len();
                items.get_mut(i).ok_or_else(|| cfg_err(format!("index {i} in `{path}` out of range (length {len})")))?
            }
            Value::Null => {
                *cur = Value::Object(Default::default());
                match cur {
                    Value::Object(map) => map.entry(seg.to_string()).or_insert(Value::Null),
                    _ => unreachable!(),
                }
            }
            _ => return Err(cfg_err(format!("`{seg}` in `{path}` descends into a scalar"))),
        };
    }
    *cur = override_value(raw.trim());
    Ok(())
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str, format: Format) -> Result<RunConfig, IoError> {
    parse_config_with(text, format, &[])
}

pub fn parse_config_with(text: &str, format: Format, overrides: &[String]) -> Result<RunConfig, IoError> {
    let mut doc = parse_value(text, format)?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let cfg: RunConfig = serde_json::from_value(doc).map_err(cfg_err)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
    parse_config_with(&text, Format::from_path(path), overrides)
}

impl RunConfig {
    pub fn n(&self) -> usize {
        self.signature[0]
    }

    pub fn m(&self) -> usize {
        self.signature[1]
    }

    pub fn validate(&self) -> Result<(), IoError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(cfg_err(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        let [n, m] = self.signature;
        if n == 0 || m == 0 {
            return Err(cfg_err(format!("invalid signature ({n}, {m})")));
        }
        self.domain.validate().map_err(cfg_err)?;
        if self.domain.n() != n {
            return Err(cfg_err(format!("domain has dimension {}, signature says n = {n}", self.domain.n())));
        }
        self.flow.validate().map_err(cfg_err)?;
        let fits = match self.flow.mode {
            FlowMode::Neumann => self.domain.boundary == BoundaryKind::Neumann && self.domain.kind != DomainKind::EntireTruncation,
            FlowMode::Dirichlet => self.domain.boundary.is_pinned(),
            FlowMode::Entire => self.flow.entire_radii.is_some(),
        };
        if !fits {
            return Err(cfg_err(format!(
                "flow mode {:?} does not fit a {:?} domain with {} boundary",
                self.flow.mode,
                self.domain.kind,
                self.domain.boundary.name()
            )));
        }
        if self.domain.boundary == BoundaryKind::ExactTracking && !matches!(self.initial, InitialData::Exact { .. }) {
            return Err(cfg_err("exact_tracking boundaries need exact initial data"));
        }
        for b in &self.barriers {
            if let BarrierSpec::YangLi(y) = b {
                y.validate().map_err(cfg_err)?;
                if y.n() != n || y.eta.len() != m {
                    return Err(cfg_err("yang_li barrier dimensions do not match the signature"));
                }
            }
            if let BarrierSpec::QuasiSphere(q) = b {
                if q.center.spatial.len() != n || q.center.vertical.len() != m {
                    return Err(cfg_err("quasi_sphere center dimensions do not match the signature"));
                }
            }
        }
        match &self.initial {
            InitialData::Exact { solution, t0 } => {
                if *solution == ExactSolution::HyperbolicExpander && !(*t0 > 0.0) {
                    return Err(cfg_err("the hyperbolic expander needs t0 > 0"));
                }
                if *solution == ExactSolution::GrimReaper && n != 1 {
                    return Err(cfg_err("the grim reaper needs n = 1"));
                }
            }
            InitialData::Affine { matrix, offset, .. } => {
                if matrix.len() != m || matrix.iter().any(|r| r.len() != n) || !(offset.is_empty() || offset.len() == m) {
                    return Err(cfg_err(format!("affine initial data needs an {m} x {n} matrix and {m} offsets")));
                }
            }
            InitialData::Cone { profile, rho } => {
                if profile.m() != m || !(*rho > 0.0) {
                    return Err(cfg_err("cone initial data needs m matching the signature and rho > 0"));
                }
            }
            InitialData::Inline { u } => {
                let expected = self.domain.node_count() * m;
                if u.len() != expected {
                    return Err(cfg_err(format!("inline initial data has {} values, expected {expected}", u.len())));
                }
            }
            _ => {}
        }
        if let Some(o) = &self.oracle {
            if o.spacings.len() < 2 || o.times.is_empty() {
                return Err(cfg_err("oracle studies need at least two spacings and one time"));
            }
        }
        if let Some(r) = &self.renorm {
            if !(r.core_fraction > 0.0 && r.core_fraction <= 1.0) {
                return Err(cfg_err("renorm.core_fraction must lie in (0, 1]"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    pub fn to_toml(&self) -> Result<String, IoError> {
        toml::to_string(self).map_err(cfg_err)
    }

    /// SHA-256 of the compact JSON form, in hex.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("configs serialize");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
schema_version = 1
signature = [1, 1]
initial = { type = "flat" }

[domain]
kind = "interval"
bounds = [[0.0, 1.0]]
resolution = [16]
boundary = "neumann"

[flow]
mode = "neumann"
t_end = 0.1
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL, Format::Toml).unwrap();
        assert_eq!(c.flow.scheme, crate::flow::Scheme::Heun);
        assert_eq!(c.flow.cfl_safety, 0.8);
        assert_eq!(c.output_dir, PathBuf::from("out"));
        assert!(c.checks.is_empty());
    }

    #[test]
    fn typo_is_named() {
        let text = MINIMAL.replace("t_end = 0.1", "t_end = 0.1\nschem = \"euler\"");
        let e = parse_config(&text, Format::Toml).unwrap_err().to_string();
        assert!(e.contains("schem"), "{e}");
        let text = MINIMAL.replace("type = \"flat\"", "type = \"flat\", amplitude = 1.0");
        assert!(parse_config(&text, Format::Toml).is_err());
    }

    #[test]
    fn overrides_follow_dotted_paths() {
        let o = vec![
            "flow.scheme=euler".to_string(),
            "flow.t_end=0.25".to_string(),
            "domain.resolution.0=32".to_string(),
            "flow.fixed_dt = 1e-4".to_string(),
            "output_dir=elsewhere".to_string(),
        ];
        let c = parse_config_with(MINIMAL, Format::Toml, &o).unwrap();
        assert_eq!(c.flow.scheme, crate::flow::Scheme::Euler);
        assert_eq!(c.flow.t_end, 0.25);
        assert_eq!(c.domain.resolution, vec![32]);
        assert_eq!(c.flow.fixed_dt, Some(1e-4));
        assert_eq!(c.output_dir, PathBuf::from("elsewhere"));
        assert!(parse_config_with(MINIMAL, Format::Toml, &["flow.sheme=euler".into()]).unwrap_err().to_string().contains("sheme"));
        assert!(parse_config_with(MINIMAL, Format::Toml, &["domain.resolution.5=3".into()]).is_err());
        assert!(parse_config_with(MINIMAL, Format::Toml, &["novalue".into()]).is_err());
    }

    #[test]
    fn round_trips_through_both_formats() {
        let c = parse_config(MINIMAL, Format::Toml).unwrap();
        assert_eq!(parse_config(&c.to_json(), Format::Json).unwrap(), c);
        assert_eq!(parse_config(&c.to_toml().unwrap(), Format::Toml).unwrap(), c);
    }

    #[test]
    fn semantic_errors() {
        let bad_version = MINIMAL.replace("schema_version = 1", "schema_version = 2");
        assert!(parse_config(&bad_version, Format::Toml).is_err());
        let bad_sig = MINIMAL.replace("signature = [1, 1]", "signature = [2, 1]");
        assert!(parse_config(&bad_sig, Format::Toml).is_err());
        let bad_mode = MINIMAL.replace("mode = \"neumann\"", "mode = \"dirichlet\"");
        assert!(parse_config(&bad_mode, Format::Toml).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = parse_config(MINIMAL, Format::Toml).unwrap();
        let b = parse_config_with(MINIMAL, Format::Toml, &["flow.t_end=0.2".into()]).unwrap();
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
