//! Run configuration: a TOML file whose relative paths resolve against the
//! file's own directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use wellgrid::coupling::{builtin_presets, Baseline, ValueTypeSpec};
use wellgrid::mabs::AgentConfig;
use wellgrid::sensor::{CleanseRules, DemandParams, HydroParams, RatingCurve, SensorKind, SolarParams};
use wellgrid::survey::ScreeningThresholds;
use wellgrid::sweep::SweepGrid;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Sweep worker threads; 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    /// When false the manifest also records stage wall-clock times.
    #[serde(default = "yes")]
    pub deterministic: bool,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    pub survey: SurveySection,
    pub sensors: SensorSection,
    pub profiles: ProfileSection,
    pub agents: AgentConfig,
    #[serde(default)]
    pub sweep: SweepGrid,
    /// Fixed status-quo KPIs; derived from the zero-facility policy when
    /// absent.
    #[serde(default)]
    pub baseline: Option<Baseline>,
    #[serde(default)]
    pub simulate: SimulateSection,
    pub coupling: CouplingSection,
    /// Value types in addition to the built-in A, B and C.
    #[serde(default)]
    pub value_types: Vec<ValueTypeSpec>,
}

fn default_seed() -> u64 {
    wellgrid::fixtures::DEFAULT_SEED
}

fn yes() -> bool {
    true
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveySection {
    pub responses: PathBuf,
    pub items: PathBuf,
    pub response: String,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    #[serde(default = "default_p_max")]
    pub p_max: f64,
}

fn default_r_min() -> f64 {
    ScreeningThresholds::default().r_min
}

fn default_p_max() -> f64 {
    ScreeningThresholds::default().p_max
}

impl SurveySection {
    pub fn thresholds(&self) -> ScreeningThresholds {
        ScreeningThresholds {
            r_min: self.r_min,
            p_max: self.p_max,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationFile {
    pub path: PathBuf,
    pub station: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationGroup {
    pub stations: Vec<StationFile>,
    pub donor: Option<StationFile>,
    /// Per-station weights for the combined series; equal when absent.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub rules: Option<CleanseRules>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HydroMeasurement {
    WaterLevel,
    WaterFlow,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroGroup {
    pub measurement: HydroMeasurement,
    pub stations: Vec<StationFile>,
    pub donor: Option<StationFile>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub rules: Option<CleanseRules>,
    /// (level m, flow m³/s) points; required for water-level stations.
    #[serde(default)]
    pub rating_curve: Vec<(f64, f64)>,
}

impl HydroGroup {
    pub fn group(&self) -> StationGroup {
        StationGroup {
            stations: self.stations.clone(),
            donor: self.donor.clone(),
            weights: self.weights.clone(),
            rules: self.rules,
        }
    }

    pub fn kind(&self) -> SensorKind {
        match self.measurement {
            HydroMeasurement::WaterLevel => SensorKind::WaterLevel,
            HydroMeasurement::WaterFlow => SensorKind::WaterFlow,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSection {
    pub year: i32,
    pub solar: StationGroup,
    pub hydro: HydroGroup,
    pub temperature: StationGroup,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub solar: SolarParams,
    pub hydro: HydroParams,
    pub demand: DemandParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySize {
    #[serde(default)]
    pub label: Option<String>,
    pub pv_kw: f64,
    pub hydro_m: f64,
    #[serde(default)]
    pub battery_kwh: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// Individual policies evaluated by the `simulate` stage.
    #[serde(default)]
    pub policies: Vec<PolicySize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    /// The model fitted by the `survey-fit` stage.
    Fitted,
    /// The published reference coefficients.
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanSource {
    /// Column means of the normalized survey.
    Survey,
    /// Means calibrated against the published policy gains.
    Calibrated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub model: ModelSource,
    pub means: MeanSource,
    /// Explicit means that replace individual entries.
    #[serde(default)]
    pub mean_overrides: BTreeMap<String, f64>,
    pub types: Vec<String>,
    /// Electricity expense share applied to every selected value type.
    #[serde(default)]
    pub s_elec: Option<f64>,
}

impl CouplingSection {
    pub fn needs_survey(&self) -> bool {
        self.model == ModelSource::Fitted || self.means == MeanSource::Survey
    }
}

/// A violation with the dotted key path it refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    /// SHA-256 of the file bytes.
    pub sha256: String,
}

impl LoadedConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

pub fn load(path: &Path) -> Result<LoadedConfig, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| format!("{}: not UTF-8: {e}", path.display()))?;
    let config: RunConfig = toml::from_str(&text).map_err(|e| {
        let (line, col) = e
            .span()
            .map(|s| {
                let before = &text[..s.start];
                (
                    before.matches('\n').count() + 1,
                    s.start - before.rfind('\n').map_or(0, |i| i + 1) + 1,
                )
            })
            .unwrap_or((0, 0));
        format!("{}:{line}:{col}: syntax error: {}", path.display(), e.message())
    })?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig {
        config,
        base_dir,
        sha256: crate::manifest::sha256_hex(&bytes),
    })
}

impl RunConfig {
    /// Selected value types with the global `s_elec` override applied.
    pub fn value_types(&self, names: &[String]) -> Result<Vec<ValueTypeSpec>, String> {
        let mut known = builtin_presets();
        known.extend(self.value_types.iter().cloned());
        names
            .iter()
            .map(|n| {
                let mut spec = known
                    .iter()
                    .rev()
                    .find(|s| &s.name == n)
                    .cloned()
                    .ok_or_else(|| format!("unknown value type '{n}'"))?;
                if let Some(s) = self.coupling.s_elec {
                    spec.s_elec = s;
                }
                Ok(spec)
            })
            .collect()
    }

    /// Every range or consistency violation. With `check_paths`, input
    /// files that do not exist are reported too.
    pub fn diagnostics(&self, loaded: Option<&LoadedConfig>, types: &[String]) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut push = |key: &str, message: String| {
            out.push(Diagnostic {
                key: key.to_string(),
                message,
            })
        };

        if !(-1.0..=1.0).contains(&self.survey.r_min) {
            push("survey.r_min", format!("{} outside [-1, 1]", self.survey.r_min));
        }
        if !(self.survey.p_max > 0.0 && self.survey.p_max <= 1.0) {
            push("survey.p_max", format!("{} outside (0, 1]", self.survey.p_max));
        }
        if self.survey.response.trim().is_empty() {
            push("survey.response", "must name the response item".into());
        }

        for (name, group) in [
            ("solar", &self.sensors.solar),
            ("hydro", &self.sensors.hydro.group()),
            ("temperature", &self.sensors.temperature),
        ] {
            let key = format!("sensors.{name}");
            if group.stations.is_empty() {
                push(&format!("{key}.stations"), "at least one station is required".into());
            }
            if let Some(w) = &group.weights {
                if w.len() != group.stations.len() {
                    push(
                        &format!("{key}.weights"),
                        format!("{} weights for {} stations", w.len(), group.stations.len()),
                    );
                }
                if w.iter().any(|x| !(*x > 0.0)) {
                    push(&format!("{key}.weights"), "weights must be positive".into());
                }
            }
            if let Some(r) = &group.rules {
                if !(r.max >= r.min) {
                    push(&format!("{key}.rules.max"), format!("{} is below min {}", r.max, r.min));
                }
                if r.spike.is_some_and(|s| !(s > 0.0)) {
                    push(&format!("{key}.rules.spike"), "must be > 0".into());
                }
            }
        }
        if self.sensors.hydro.measurement == HydroMeasurement::WaterLevel {
            if let Err(e) = RatingCurve::new(self.sensors.hydro.rating_curve.clone()) {
                push("sensors.hydro.rating_curve", e.to_string());
            }
        }

        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.profiles.solar.panel_efficiency) {
            push(
                "profiles.solar.panel_efficiency",
                format!("{} outside (0, 1]", self.profiles.solar.panel_efficiency),
            );
        }
        if !unit(self.profiles.solar.performance_ratio) {
            push(
                "profiles.solar.performance_ratio",
                format!("{} outside (0, 1]", self.profiles.solar.performance_ratio),
            );
        }
        if !unit(self.profiles.hydro.efficiency) {
            push(
                "profiles.hydro.efficiency",
                format!("{} outside (0, 1]", self.profiles.hydro.efficiency),
            );
        }
        let d = &self.profiles.demand;
        for (k, v) in [
            ("base_kwh", d.base_kwh),
            ("deadband_c", d.deadband_c),
            ("coefficient", d.coefficient),
        ] {
            if !(v >= 0.0) {
                push(&format!("profiles.demand.{k}"), format!("{v} must be >= 0"));
            }
        }
        for (k, v) in [
            ("profiles.solar.calibrate_annual", self.profiles.solar.calibrate_annual),
            ("profiles.hydro.calibrate_annual", self.profiles.hydro.calibrate_annual),
            ("profiles.demand.calibrate_annual", d.calibrate_annual),
        ] {
            if v.is_some_and(|t| !(t >= 0.0) || !t.is_finite()) {
                push(k, "must be a finite value >= 0".into());
            }
        }

        for (k, m) in self.agents.diagnostics() {
            push(&format!("agents.{k}"), m);
        }

        for (axis, range) in [
            ("pv", &self.sweep.pv),
            ("hydro", &self.sweep.hydro),
            ("battery", &self.sweep.battery),
        ] {
            for (field, m) in range.diagnostics() {
                push(&format!("sweep.{axis}.{field}"), m);
            }
        }
        if let Ok(n) = self.sweep.candidate_count() {
            if n > self.sweep.max_candidates as u128 {
                push(
                    "sweep.max_candidates",
                    format!("grid has {n} candidates, limit is {}", self.sweep.max_candidates),
                );
            }
        }

        if let Some(b) = &self.baseline {
            if !(b.p0 > 0.0) || !b.p0.is_finite() {
                push("baseline.p0", format!("{} must be > 0", b.p0));
            }
            for (k, v) in [("baseline.u0", b.u0), ("baseline.d0", b.d0)] {
                if !(0.0..=1.0).contains(&v) {
                    push(k, format!("{v} outside [0, 1]"));
                }
            }
        }
        for (i, p) in self.simulate.policies.iter().enumerate() {
            for (k, v) in [
                ("pv_kw", p.pv_kw),
                ("hydro_m", p.hydro_m),
                ("battery_kwh", p.battery_kwh),
            ] {
                if !(v >= 0.0) || !v.is_finite() {
                    push(
                        &format!("simulate.policies[{i}].{k}"),
                        format!("{v} must be finite and >= 0"),
                    );
                }
            }
        }

        if let Some(s) = self.coupling.s_elec {
            if !(s > 0.0 && s < 1.0) {
                push("coupling.s_elec", format!("{s} outside (0, 1)"));
            }
        }
        for (i, vt) in self.value_types.iter().enumerate() {
            if vt.name.trim().is_empty() {
                push(&format!("value_types[{i}].name"), "must not be empty".into());
            }
            if !(vt.s_elec > 0.0 && vt.s_elec < 1.0) {
                push(
                    &format!("value_types[{i}].s_elec"),
                    format!("{} outside (0, 1)", vt.s_elec),
                );
            }
        }
        if types.is_empty() {
            push("coupling.types", "select at least one value type".into());
        }
        if let Err(m) = self.value_types(types) {
            push("coupling.types", m);
        }
        for (id, v) in &self.coupling.mean_overrides {
            if !(0.0..=1.0).contains(v) {
                push(&format!("coupling.mean_overrides.{id}"), format!("{v} outside [0, 1]"));
            }
        }

        if let Some(l) = loaded {
            let hydro = self.sensors.hydro.group();
            let mut inputs: Vec<(String, &Path)> = vec![
                ("survey.responses".into(), self.survey.responses.as_path()),
                ("survey.items".into(), self.survey.items.as_path()),
            ];
            for (name, group) in [
                ("solar", &self.sensors.solar),
                ("hydro", &hydro),
                ("temperature", &self.sensors.temperature),
            ] {
                for (i, s) in group.stations.iter().enumerate() {
                    inputs.push((format!("sensors.{name}.stations[{i}].path"), s.path.as_path()));
                }
                if let Some(dn) = &group.donor {
                    inputs.push((format!("sensors.{name}.donor.path"), dn.path.as_path()));
                }
            }
            for (key, p) in inputs {
                let full = l.resolve(p);
                if !full.is_file() {
                    push(&key, format!("file not found: {}", full.display()));
                }
            }
        }
        out
    }
}
