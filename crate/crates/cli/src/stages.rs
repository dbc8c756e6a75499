//! Pipeline stages. Each stage reads its inputs from the configuration and
//! from artifacts already on disk, so running the stages one by one writes
//! exactly what `run` writes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use wellgrid::coupling::{select_optimal, Baseline, CouplingResult, MeanVector};
use wellgrid::fixtures::{calibrated_means, reference_model, REFERENCE_POLICIES};
use wellgrid::mabs::{simulate_year, PolicyIndices, PolicyParams, Profiles};
use wellgrid::sensor::{
    cleanse, combine_stations, demand_profile, gap_fill, hydro_profile, read_demand, read_generation, read_sensor_csv,
    solar_profile, CleanseRules, CleansingReport, RatingCurve, SensorKind, SensorSeries, SimYear,
};
use wellgrid::survey::{extract_explanatory, fit_ols, load_schema, load_survey, normalize_items, RegressionModel};
use wellgrid::sweep::{
    candidates_csv, evaluate_all, generate_grid, read_candidates_csv, render_ternary_svg, ternary_coords, ternary_csv,
    Highlight,
};

use crate::config::{HydroMeasurement, LoadedConfig, MeanSource, ModelSource, StationGroup};
use crate::manifest::{file_sha256, fingerprint, Manifest, StageRecord, StageStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    SurveyFit,
    Ingest,
    Simulate,
    Sweep,
    Couple,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::SurveyFit,
        Stage::Ingest,
        Stage::Simulate,
        Stage::Sweep,
        Stage::Couple,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::SurveyFit => "survey-fit",
            Stage::Ingest => "ingest",
            Stage::Simulate => "simulate",
            Stage::Sweep => "sweep",
            Stage::Couple => "couple",
            Stage::Report => "report",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub const PROFILE_DIR: &str = "profiles";

/// Everything a stage needs: the parsed configuration plus the command-line
/// overrides already applied.
pub struct Pipeline {
    pub loaded: LoadedConfig,
    pub out_dir: PathBuf,
    pub workers: Option<usize>,
    pub seed: u64,
    pub types: Vec<String>,
}

/// Files produced by one stage, relative to the output directory.
struct Output {
    files: Vec<(String, Vec<u8>)>,
}

impl Output {
    fn new() -> Self {
        Self { files: Vec::new() }
    }

    fn add(&mut self, name: impl Into<String>, text: impl Into<String>) {
        self.files.push((name.into(), text.into().into_bytes()));
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct BaselineFile {
    /// "config" when fixed in the configuration, "simulated" when taken from
    /// the zero-facility year.
    source: String,
    baseline: Baseline,
    status_quo: PolicyIndices,
}

impl Pipeline {
    fn cfg(&self) -> &crate::config::RunConfig {
        &self.loaded.config
    }

    fn input(&self, stage: Stage, p: &Path) -> Result<PathBuf> {
        let full = self.loaded.resolve(p);
        if !full.is_file() {
            bail!("input file not found: {} (stage {stage})", full.display());
        }
        Ok(full)
    }

    fn input_hash(&self, stage: Stage, p: &Path) -> Result<String> {
        let full = self.input(stage, p)?;
        file_sha256(&full)
    }

    fn section<T: Serialize>(v: &T) -> String {
        serde_json::to_string(v).expect("configuration serializes")
    }

    fn sensor_paths(&self) -> Vec<&Path> {
        let s = &self.cfg().sensors;
        let mut out = Vec::new();
        for g in [&s.solar, &s.temperature] {
            out.extend(g.stations.iter().map(|x| x.path.as_path()));
            out.extend(g.donor.iter().map(|x| x.path.as_path()));
        }
        out.extend(s.hydro.stations.iter().map(|x| x.path.as_path()));
        out.extend(s.hydro.donor.iter().map(|x| x.path.as_path()));
        out
    }

    fn upstream(&self, stage: Stage) -> Vec<Stage> {
        match stage {
            Stage::SurveyFit | Stage::Ingest => vec![],
            Stage::Simulate | Stage::Sweep => vec![Stage::Ingest],
            Stage::Couple => {
                let mut v = vec![Stage::Simulate, Stage::Sweep];
                if self.cfg().coupling.needs_survey() {
                    v.insert(0, Stage::SurveyFit);
                }
                v
            }
            Stage::Report => vec![Stage::Sweep, Stage::Couple],
        }
    }

    /// Hash of the configuration sections and input files a stage reads,
    /// chained with the fingerprints of its upstream stages.
    pub fn fingerprint(&self, stage: Stage) -> Result<String> {
        let c = self.cfg();
        let mut parts: Vec<(&str, String)> = vec![("stage", stage.name().to_string())];
        match stage {
            Stage::SurveyFit => {
                parts.push(("survey", Self::section(&c.survey)));
                parts.push(("responses", self.input_hash(stage, &c.survey.responses)?));
                parts.push(("items", self.input_hash(stage, &c.survey.items)?));
            }
            Stage::Ingest => {
                parts.push(("sensors", Self::section(&c.sensors)));
                parts.push(("profiles", Self::section(&c.profiles)));
                for p in self.sensor_paths() {
                    parts.push(("sensor", self.input_hash(stage, p)?));
                }
            }
            Stage::Simulate => {
                parts.push(("agents", Self::section(&c.agents)));
                parts.push(("baseline", Self::section(&c.baseline)));
                parts.push(("simulate", Self::section(&c.simulate)));
            }
            Stage::Sweep => {
                parts.push(("agents", Self::section(&c.agents)));
                parts.push(("sweep", Self::section(&c.sweep)));
            }
            Stage::Couple => {
                parts.push(("coupling", Self::section(&c.coupling)));
                parts.push((
                    "value_types",
                    Self::section(&c.value_types(&self.types).map_err(|e| anyhow!(e))?),
                ));
            }
            Stage::Report => {}
        }
        for up in self.upstream(stage) {
            parts.push(("upstream", self.fingerprint(up)?));
        }
        Ok(fingerprint(&parts))
    }

    /// Confirms the producer stage ran successfully with the current
    /// configuration and that its files are unchanged on disk.
    fn require(&self, manifest: &Manifest, stage: Stage, producer: Stage) -> Result<()> {
        let rec = match manifest.stages.get(producer.name()) {
            Some(r) if r.status == StageStatus::Ok => r,
            _ => bail!(
                "dependency error: stage {stage} needs the artifacts of stage {producer}, which has not completed; run `wellgrid {producer}` first"
            ),
        };
        let expected = self
            .fingerprint(producer)
            .with_context(|| format!("checking stage {producer} for stage {stage}"))?;
        if rec.fingerprint != expected {
            bail!(
                "dependency error: artifacts of stage {producer} are stale (its configuration or inputs changed); rerun `wellgrid {producer}` before stage {stage}"
            );
        }
        for (file, hash) in &rec.files {
            let path = self.out_dir.join(file);
            let actual = file_sha256(&path).map_err(|_| {
                anyhow!(
                    "dependency error: {} from stage {producer} is missing; rerun `wellgrid {producer}`",
                    path.display()
                )
            })?;
            if &actual != hash {
                bail!(
                    "dependency error: {} from stage {producer} was modified after it was written; rerun `wellgrid {producer}`",
                    path.display()
                );
            }
        }
        Ok(())
    }

    /// Runs one stage and records the outcome in the manifest. The error of
    /// a failed stage is returned after the manifest is saved.
    pub fn run_stage(&self, stage: Stage) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("creating output directory {}", self.out_dir.display()))?;
        let mut manifest = Manifest::load_or_default(&self.out_dir)?;
        let started = Instant::now();
        let outcome = self.execute(stage, &manifest);
        let elapsed = (!self.cfg().deterministic).then(|| started.elapsed().as_secs_f64());
        let record = match &outcome {
            Ok((fp, out)) => {
                let mut files = BTreeMap::new();
                for (name, bytes) in &out.files {
                    let path = self.out_dir.join(name);
                    if let Some(dir) = path.parent() {
                        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                    }
                    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
                    files.insert(name.clone(), crate::manifest::sha256_hex(bytes));
                }
                StageRecord {
                    status: StageStatus::Ok,
                    fingerprint: fp.clone(),
                    files,
                    error: None,
                    elapsed_s: elapsed,
                }
            }
            Err(e) => StageRecord {
                status: StageStatus::Failed,
                fingerprint: String::new(),
                files: BTreeMap::new(),
                error: Some(format!("{e:#}")),
                elapsed_s: elapsed,
            },
        };
        manifest.stages.insert(stage.name().to_string(), record);
        manifest.config_sha256 = self.loaded.sha256.clone();
        manifest.seed = self.seed;
        manifest.complete = Stage::ALL.iter().all(|s| {
            manifest
                .stages
                .get(s.name())
                .is_some_and(|r| r.status == StageStatus::Ok && self.fingerprint(*s).is_ok_and(|f| f == r.fingerprint))
        });
        manifest.written_at = if self.cfg().deterministic {
            None
        } else {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .ok()
                .map(|d| format!("{}", d.as_secs()))
        };
        manifest.save(&self.out_dir)?;
        outcome.map(|_| ())
    }

    fn execute(&self, stage: Stage, manifest: &Manifest) -> Result<(String, Output)> {
        let fp = self.fingerprint(stage)?;
        for up in self.upstream(stage) {
            self.require(manifest, stage, up)?;
        }
        let out = match stage {
            Stage::SurveyFit => self.survey_fit(),
            Stage::Ingest => self.ingest(),
            Stage::Simulate => self.simulate(),
            Stage::Sweep => self.sweep(),
            Stage::Couple => self.couple(),
            Stage::Report => self.report(manifest),
        }?;
        Ok((fp, out))
    }

    fn survey_fit(&self) -> Result<Output> {
        let c = &self.cfg().survey;
        let schema = load_schema(&self.input(Stage::SurveyFit, &c.items)?)?;
        let raw = load_survey(&self.input(Stage::SurveyFit, &c.responses)?, &schema)?;
        let matrix = normalize_items(raw)?;
        let report = extract_explanatory(&matrix, &c.response, c.thresholds())?;
        let selected: Vec<String> = report.selected_ids().map(str::to_string).collect();
        if selected.is_empty() {
            bail!("no survey item passed the correlation screening");
        }
        let model = fit_ols(&matrix, &c.response, &selected)?;
        let ids: Vec<String> = matrix
            .items
            .iter()
            .filter(|i| i.id != c.response)
            .map(|i| i.id.clone())
            .collect();
        let means = MeanVector::new("survey", &ids, &matrix.means(&ids)?)?;

        let mut out = Output::new();
        out.add("correlation.csv", report.to_csv());
        out.add("model.json", model.to_json());
        out.add("means.json", serde_json::to_string_pretty(&means)? + "\n");
        Ok(out)
    }

    fn read_station(&self, kind: SensorKind, path: &Path, station: &str) -> Result<SensorSeries> {
        let full = self.input(Stage::Ingest, path)?;
        Ok(read_sensor_csv(&full, kind, station)?)
    }

    fn ingest_group(
        &self,
        kind: SensorKind,
        group: &StationGroup,
        year: SimYear,
        reports: &mut Vec<CleansingReport>,
    ) -> Result<SensorSeries> {
        let rules = group.rules.unwrap_or_else(|| CleanseRules::for_kind(kind));
        let donor = match &group.donor {
            Some(d) => {
                let raw = self.read_station(kind, &d.path, &d.station)?;
                Some(cleanse(&raw, &rules))
            }
            None => None,
        };
        let mut cleaned = Vec::with_capacity(group.stations.len());
        for st in &group.stations {
            let raw = self.read_station(kind, &st.path, &st.station)?;
            let (mut series, mut report) = cleanse(&raw, &rules);
            if let Some((d, _)) = &donor {
                let (filled, n) =
                    gap_fill(&series, d, year).with_context(|| format!("gap filling station {}", st.station))?;
                series = filled;
                report.filled = n;
            }
            reports.push(report);
            cleaned.push(series);
        }
        if let Some((_, report)) = donor {
            reports.push(report);
        }
        Ok(combine_stations(&cleaned, group.weights.as_deref(), year)?)
    }

    fn ingest(&self) -> Result<Output> {
        let c = self.cfg();
        let year = SimYear::new(c.sensors.year);
        let mut reports = Vec::new();
        let irradiance = self.ingest_group(SensorKind::SolarIrradiance, &c.sensors.solar, year, &mut reports)?;
        let hydro = &c.sensors.hydro;
        let water = self.ingest_group(hydro.kind(), &hydro.group(), year, &mut reports)?;
        let flow = match hydro.measurement {
            HydroMeasurement::WaterFlow => water,
            HydroMeasurement::WaterLevel => RatingCurve::new(hydro.rating_curve.clone())?.to_flow(&water)?,
        };
        let temperature = self.ingest_group(SensorKind::AirTemperature, &c.sensors.temperature, year, &mut reports)?;

        let pv = solar_profile(&irradiance, &c.profiles.solar, year).context("solar profile")?;
        let hy = hydro_profile(&flow, &c.profiles.hydro, year).context("hydro profile")?;
        let demand = demand_profile(&temperature, &c.profiles.demand, year).context("demand profile")?;

        let mut csv = csv::Writer::from_writer(Vec::new());
        for r in &reports {
            csv.serialize(r)?;
        }
        let csv = String::from_utf8(csv.into_inner()?)?;

        let mut out = Output::new();
        out.add("cleansing.csv", csv);
        out.add("cleansing.json", serde_json::to_string_pretty(&reports)? + "\n");
        out.add(format!("{PROFILE_DIR}/pv.csv"), pv.to_csv());
        out.add(format!("{PROFILE_DIR}/pv.json"), pv.sidecar_json());
        out.add(format!("{PROFILE_DIR}/hydro.csv"), hy.to_csv());
        out.add(format!("{PROFILE_DIR}/hydro.json"), hy.sidecar_json());
        out.add(format!("{PROFILE_DIR}/demand.csv"), demand.to_csv());
        out.add(format!("{PROFILE_DIR}/demand.json"), demand.sidecar_json());
        Ok(out)
    }

    fn load_profiles(&self) -> Result<Profiles> {
        let dir = self.out_dir.join(PROFILE_DIR);
        let gen = |stem: &str| read_generation(&dir.join(format!("{stem}.csv")), &dir.join(format!("{stem}.json")));
        Ok(Profiles {
            pv: gen("pv")?,
            hydro: gen("hydro")?,
            demand: read_demand(&dir.join("demand.csv"), &dir.join("demand.json"))?,
        })
    }

    fn simulate(&self) -> Result<Output> {
        let c = self.cfg();
        let profiles = self.load_profiles()?;
        let status_quo = simulate_year(&PolicyParams::none(), &profiles, &c.agents)?;
        let (baseline, source) = match c.baseline {
            Some(b) => (b, "config"),
            None => (Baseline::from_indices(&status_quo), "simulated"),
        };
        baseline.validate()?;

        let policies: Vec<(String, PolicyParams)> = if c.simulate.policies.is_empty() {
            REFERENCE_POLICIES
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    (
                        p.label.to_string(),
                        PolicyParams::new(i + 1, p.pv_kw, p.hydro_m, p.battery_kwh),
                    )
                })
                .collect()
        } else {
            c.simulate
                .policies
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let label = p.label.clone().unwrap_or_else(|| format!("P{}", i + 1));
                    (label, PolicyParams::new(i + 1, p.pv_kw, p.hydro_m, p.battery_kwh))
                })
                .collect()
        };
        let mut table = String::from(
            "label,pv_kw,hydro_m,battery_kwh,cost,u,d,grid_purchase,pv_kwh,hydro_kwh,curtailed_kwh,grid_import_kwh,demand_kwh\n",
        );
        for (label, params) in &policies {
            let r = simulate_year(params, &profiles, &c.agents).with_context(|| format!("policy {label}"))?;
            writeln!(
                table,
                "{label},{},{},{},{},{},{},{},{},{},{},{},{}",
                params.pv_kw,
                params.hydro_m,
                params.battery_kwh,
                r.cost_p,
                r.utilization_u,
                r.circulation_d,
                r.grid_purchase,
                r.annual_pv_kwh,
                r.annual_hydro_kwh,
                r.curtailed_kwh,
                r.grid_import_kwh,
                r.demand_kwh
            )
            .expect("string write");
        }
        let file = BaselineFile {
            source: source.to_string(),
            baseline,
            status_quo,
        };
        let mut out = Output::new();
        out.add("baseline.json", serde_json::to_string_pretty(&file)? + "\n");
        out.add("policies.csv", table);
        Ok(out)
    }

    fn sweep(&self) -> Result<Output> {
        let c = self.cfg();
        let profiles = self.load_profiles()?;
        let grid = generate_grid(&c.sweep)?;
        let set = evaluate_all(&grid, &profiles, &c.agents, self.workers)?;
        let points = ternary_coords(&set)?;
        let mut out = Output::new();
        out.add("candidates.csv", candidates_csv(&set, Some(&points)));
        out.add("ternary.csv", ternary_csv(&points));
        Ok(out)
    }

    fn couple(&self) -> Result<Output> {
        let c = self.cfg();
        let model: RegressionModel = match c.coupling.model {
            ModelSource::Fitted => RegressionModel::from_json(&read(&self.out_dir.join("model.json"))?)?,
            ModelSource::Reference => reference_model(),
        };
        let ids = model.ids();
        let pool: MeanVector = match c.coupling.means {
            MeanSource::Survey => {
                serde_json::from_str(&read(&self.out_dir.join("means.json"))?).context("parsing means.json")?
            }
            MeanSource::Calibrated => calibrated_means(),
        };
        let mut entries = Vec::with_capacity(ids.len());
        for id in &ids {
            let e = pool
                .entries
                .iter()
                .find(|e| &e.id == id)
                .ok_or_else(|| anyhow!("no {} mean for model variable {id}", pool.source))?;
            entries.push(e.clone());
        }
        let mut means = MeanVector {
            source: pool.source.clone(),
            entries,
        };
        for (id, v) in &c.coupling.mean_overrides {
            if !ids.contains(id) {
                bail!("mean override for {id}, which is not a model variable");
            }
            means.set(id, *v, true)?;
        }

        let baseline: BaselineFile =
            serde_json::from_str(&read(&self.out_dir.join("baseline.json"))?).context("parsing baseline.json")?;
        let (set, _) = read_candidates_csv(&self.out_dir.join("candidates.csv"))?;
        let specs = c.value_types(&self.types).map_err(|e| anyhow!(e))?;
        let mut out = Output::new();
        for spec in &specs {
            let result = select_optimal(&set, &model, &means, spec, &baseline.baseline)
                .with_context(|| format!("value type {}", spec.name))?;
            out.add(selection_file(&spec.name), result.to_json());
        }
        Ok(out)
    }

    fn report(&self, manifest: &Manifest) -> Result<Output> {
        let (set, points) = read_candidates_csv(&self.out_dir.join("candidates.csv"))?;
        let points = match points {
            Some(p) => p,
            None => ternary_coords(&set)?,
        };
        let couple = &manifest.stages[Stage::Couple.name()];
        let mut results = Vec::new();
        for name in couple.files.keys() {
            let r: CouplingResult =
                serde_json::from_str(&read(&self.out_dir.join(name))?).with_context(|| format!("parsing {name}"))?;
            results.push(r);
        }
        let highlights: Vec<Highlight> = results
            .iter()
            .map(|r| Highlight {
                k: r.k_opt,
                label: format!("Type {}", r.value_type.name),
            })
            .collect();
        let mut table = String::from("type,k_opt,psi_opt,psi_baseline,pv_kw,hydro_m,battery_kwh,cost,u,d\n");
        for r in &results {
            writeln!(
                table,
                "{},{},{},{},{},{},{},{},{},{}",
                r.value_type.name,
                r.k_opt,
                r.psi_opt,
                r.psi_baseline,
                r.params.pv_kw,
                r.params.hydro_m,
                r.params.battery_kwh,
                r.indices.cost_p,
                r.indices.utilization_u,
                r.indices.circulation_d
            )
            .expect("string write");
        }
        let mut out = Output::new();
        out.add("ternary.svg", render_ternary_svg(&points, &highlights));
        out.add("selections.csv", table);
        Ok(out)
    }
}

pub fn selection_file(type_name: &str) -> String {
    let safe: String = type_name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("selection_{safe}.json")
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}
