//! Flat dotted-key JSON configuration.
//!
//! A config file is a single JSON object whose keys are dotted paths into the
//! run configuration, e.g. `{"omega": 1.0, "solver.max_iters": 5000}`. Values
//! are scalars or arrays. Keys are checked against the serialized defaults,
//! file values are applied over the defaults and command-line flags over both.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rotc::sweep::sweep_solver_defaults;
use rotc::{Grid2D, SolverConfig, SweepPlan};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub type FlatMap = Map<String, Value>;

pub fn read_flat(path: &Path) -> CliResult<FlatMap> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_flat(&text)
}

pub fn parse_flat(text: &str) -> CliResult<FlatMap> {
    if text.trim().is_empty() {
        return Ok(FlatMap::new());
    }
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("config is not valid JSON: {e}")))?;
    let Value::Object(map) = value else {
        return Err(CliError::usage("config must be a JSON object"));
    };
    if let Some((key, _)) = map.iter().find(|(_, v)| v.is_object()) {
        return Err(CliError::usage(format!("config key `{key}` holds an object; use dotted keys instead")));
    }
    Ok(map)
}

pub fn flatten(value: &Value) -> FlatMap {
    let mut out = FlatMap::new();
    if let Value::Object(map) = value {
        for (k, v) in map {
            flatten_into(k.clone(), v, &mut out);
        }
    }
    out
}

fn flatten_into(prefix: String, value: &Value, out: &mut FlatMap) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten_into(format!("{prefix}.{k}"), v, out);
            }
        }
        other => {
            out.insert(prefix, other.clone());
        }
    }
}

pub fn unflatten(flat: &FlatMap) -> CliResult<Value> {
    let mut root = Map::new();
    for (key, value) in flat {
        let parts: Vec<&str> = key.split('.').collect();
        let mut node = &mut root;
        for part in &parts[..parts.len() - 1] {
            let entry = node.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
            node = entry
                .as_object_mut()
                .ok_or_else(|| CliError::usage(format!("config key `{key}` conflicts with `{part}`")))?;
        }
        node.insert(parts[parts.len() - 1].to_string(), value.clone());
    }
    Ok(Value::Object(root))
}

/// Applies `file` and then `overrides` over the flattened `defaults`.
pub fn resolve<T: Serialize + DeserializeOwned>(defaults: &T, file: FlatMap, overrides: FlatMap) -> CliResult<T> {
    let mut merged = flatten(&serde_json::to_value(defaults)?);
    let known: BTreeSet<String> = merged.keys().cloned().collect();
    for (key, value) in file.into_iter().chain(overrides) {
        if !known.contains(&key) {
            return Err(CliError::usage(format!("unknown config key `{key}`")));
        }
        merged.insert(key, value);
    }
    serde_json::from_value(unflatten(&merged)?).map_err(|e| CliError::usage(format!("invalid config: {e}")))
}

/// Collects command-line values as dotted-key overrides.
#[derive(Debug, Default)]
pub struct Overrides(FlatMap);

impl Overrides {
    pub fn set<T: Serialize>(&mut self, key: &str, value: Option<T>) -> &mut Self {
        if let Some(v) = value {
            self.0.insert(key.to_string(), serde_json::to_value(v).expect("serializable flag"));
        }
        self
    }

    pub fn flag(&mut self, key: &str, on: bool) -> &mut Self {
        if on {
            self.0.insert(key.to_string(), Value::Bool(true));
        }
        self
    }

    pub fn into_map(self) -> FlatMap {
        self.0
    }
}

fn load(path: Option<&Path>) -> CliResult<FlatMap> {
    path.map_or_else(|| Ok(FlatMap::new()), read_flat)
}

fn check_omega(omega: f64) -> CliResult<()> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(CliError::usage(format!(
            "omega must lie in [0, 1], got {omega}; there are no ground states above the critical speed"
        )));
    }
    Ok(())
}

fn check_a_frac(a_frac: f64) -> CliResult<()> {
    if !(0.0..1.0).contains(&a_frac) {
        return Err(CliError::usage(format!("a must be below a* (a/a* in [0, 1)), got a/a* = {a_frac}")));
    }
    Ok(())
}

fn check_output(path: &Option<PathBuf>) -> CliResult<()> {
    if let Some(p) = path {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(CliError::usage(format!("output directory {} does not exist", parent.display())));
        }
    }
    Ok(())
}

fn check_input(path: &Path) -> CliResult<()> {
    if !path.is_file() {
        return Err(CliError::usage(format!("input file {} does not exist", path.display())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TownesConfig {
    pub shoot_tol: f64,
    pub r_max: f64,
    pub spacing: f64,
    /// Two-column CSV `r,Q` of the radial profile.
    pub profile: Option<PathBuf>,
}

impl Default for TownesConfig {
    fn default() -> Self {
        Self { shoot_tol: 1e-12, r_max: 20.0, spacing: 1e-4, profile: None }
    }
}

impl TownesConfig {
    pub fn load(file: Option<&Path>, overrides: Overrides) -> CliResult<Self> {
        let cfg = resolve(&Self::default(), load(file)?, overrides.into_map())?;
        check_output(&cfg.profile)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// Soliton at the predicted scale for `a ≥ a*/2`, Gaussian otherwise.
    Auto,
    Gaussian,
    Soliton,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeConfig {
    pub omega: f64,
    pub a_frac: f64,
    pub n: usize,
    pub extent: f64,
    pub init: InitKind,
    pub solver: SolverConfig,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    /// CSV of `|φ|²` along the `x₂ = 0` row.
    pub density_slice: Option<PathBuf>,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            omega: 1.0,
            a_frac: 0.0,
            n: 256,
            extent: 8.0,
            init: InitKind::Auto,
            solver: sweep_solver_defaults(),
            out: None,
            report: None,
            density_slice: None,
        }
    }
}

impl MinimizeConfig {
    pub fn load(file: Option<&Path>, overrides: Overrides) -> CliResult<Self> {
        let cfg: Self = resolve(&Self::default(), load(file)?, overrides.into_map())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        check_omega(self.omega)?;
        check_a_frac(self.a_frac)?;
        Grid2D::new(self.n, self.extent)?;
        self.solver.validate()?;
        check_output(&self.out)?;
        check_output(&self.report)?;
        check_output(&self.density_slice)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub field: Option<PathBuf>,
    pub omega: f64,
    pub a_frac: f64,
    pub report: Option<PathBuf>,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        Self { field: None, omega: 1.0, a_frac: 0.0, report: None }
    }
}

impl DiagnoseConfig {
    pub fn load(file: Option<&Path>, overrides: Overrides) -> CliResult<Self> {
        let cfg: Self = resolve(&Self::default(), load(file)?, overrides.into_map())?;
        check_omega(cfg.omega)?;
        check_a_frac(cfg.a_frac)?;
        match &cfg.field {
            Some(p) => check_input(p)?,
            None => return Err(CliError::usage("a field snapshot is required (--field)")),
        }
        check_output(&cfg.report)?;
        Ok(cfg)
    }
}

/// Keys of the joint schedule `Ω = 1 - c (a* - a)^κ`, accepted in sweep plans
/// in place of `omega_schedule`.
pub const JOINT_C: &str = "joint.c";
pub const JOINT_KAPPA: &str = "joint.kappa";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub plan: SweepPlan,
    /// `(c, κ)` when the plan asks for the joint schedule.
    pub joint: Option<(f64, f64)>,
}

pub fn default_plan() -> SweepPlan {
    SweepPlan::new(vec![1.0], vec![0.9, 0.96, 0.99, 0.997, 0.999])
}

impl SweepConfig {
    pub fn load(file: Option<&Path>, overrides: Overrides) -> CliResult<Self> {
        let mut flat = load(file)?;
        let c = flat.remove(JOINT_C);
        let kappa = flat.remove(JOINT_KAPPA);
        let joint = if c.is_some() || kappa.is_some() {
            if flat.contains_key("omega_schedule") {
                return Err(CliError::usage("`omega_schedule` cannot be combined with `joint.c`/`joint.kappa`"));
            }
            let num = |v: Option<Value>, key: &str, default: f64| -> CliResult<f64> {
                v.map_or(Ok(default), |v| {
                    v.as_f64().ok_or_else(|| CliError::usage(format!("config key `{key}` must be a number")))
                })
            };
            Some((num(c, JOINT_C, 1.0)?, num(kappa, JOINT_KAPPA, 0.5)?))
        } else {
            None
        };
        let plan: SweepPlan = resolve(&default_plan(), flat, overrides.into_map())?;
        for f in &plan.a_schedule {
            check_a_frac(*f)?;
        }
        for w in &plan.omega_schedule {
            check_omega(*w)?;
        }
        Ok(Self { plan, joint })
    }

    /// The plan with the joint schedule, if any, expanded against `a*`.
    pub fn resolved_plan(&self, a_star: f64) -> SweepPlan {
        match self.joint {
            Some((c, kappa)) => {
                let joint = SweepPlan::joint(self.plan.a_schedule.clone(), a_star, c, kappa);
                SweepPlan { omega_schedule: joint.omega_schedule, ..self.plan.clone() }
            }
            None => self.plan.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn minimize(text: &str, overrides: Overrides) -> CliResult<MinimizeConfig> {
        let cfg: MinimizeConfig = resolve(&MinimizeConfig::default(), parse_flat(text)?, overrides.into_map())?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(minimize("", Overrides::default()).unwrap(), MinimizeConfig::default());
        assert_eq!(minimize("{}", Overrides::default()).unwrap(), MinimizeConfig::default());
    }

    #[test]
    fn flags_override_file() {
        let mut o = Overrides::default();
        o.set("omega", Some(0.5)).set("solver.max_iters", Some(7usize));
        let cfg = minimize(r#"{"omega": 0.2, "solver.max_iters": 3, "solver.step": 0.01}"#, o).unwrap();
        assert_eq!(cfg.omega, 0.5);
        assert_eq!(cfg.solver.max_iters, 7);
        assert_eq!(cfg.solver.step, 0.01);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = minimize(r#"{"solver.stepp": 0.1}"#, Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("solver.stepp"), "{err}");
        assert_eq!(err.exit_code(), 2);
        let err = minimize(r#"{"solver": {"step": 0.1}}"#, Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("dotted"), "{err}");
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        let err = minimize(r#"{"a_frac": 1.2}"#, Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("a must be below a*"), "{err}");
        let err = minimize(r#"{"omega": 1.5}"#, Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("omega"), "{err}");
        assert!(minimize(r#"{"n": 100}"#, Overrides::default()).is_err());
        assert!(minimize(r#"{"solver.momentum": 1.0}"#, Overrides::default()).is_err());
    }

    #[test]
    fn joint_keys_expand_the_schedule() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plan.json");
        fs::write(&path, r#"{"a_schedule": [0.9, 0.999], "joint.kappa": 0.5}"#).unwrap();
        let cfg = SweepConfig::load(Some(&path), Overrides::default()).unwrap();
        assert_eq!(cfg.joint, Some((1.0, 0.5)));
        let plan = cfg.resolved_plan(11.7);
        assert_eq!(plan.omega_schedule.len(), 2);
        assert_eq!(plan.omega_schedule[0], 0.0);
        assert!((plan.omega_schedule[1] - (1.0 - 0.0117f64.sqrt())).abs() < 1e-12);

        fs::write(&path, r#"{"omega_schedule": [1.0], "joint.c": 1.0}"#).unwrap();
        assert!(SweepConfig::load(Some(&path), Overrides::default()).is_err());
    }

    fn arb_config() -> impl Strategy<Value = MinimizeConfig> {
        (0.0f64..=1.0, 0.0f64..0.999, 6u32..10, 1.0f64..20.0, 0usize..4, 1e-4f64..0.5, any::<bool>(), any::<u64>())
            .prop_map(|(omega, a_frac, log_n, extent, init, step, recenter, seed)| MinimizeConfig {
                omega,
                a_frac,
                n: 1 << log_n,
                extent,
                init: [InitKind::Auto, InitKind::Gaussian, InitKind::Soliton, InitKind::Random][init],
                solver: SolverConfig { step, recenter, seed, ..sweep_solver_defaults() },
                out: Some(PathBuf::from("field.f2d1")),
                report: None,
                density_slice: None,
            })
    }

    proptest! {
        #[test]
        fn config_round_trips(cfg in arb_config()) {
            let flat = flatten(&serde_json::to_value(&cfg).unwrap());
            let text = serde_json::to_string(&flat).unwrap();
            let back: MinimizeConfig =
                resolve(&MinimizeConfig::default(), parse_flat(&text).unwrap(), FlatMap::new()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
