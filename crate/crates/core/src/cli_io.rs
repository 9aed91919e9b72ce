//! Run configuration, snapshot and diagnostics CSV files, and CSV
//! comparison.
//!
//! Configs are flat `key = value` text with `#` comments. Every key has a
//! default, so an empty file reproduces the reference Sod experiment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dg1d::Mesh1D;
use crate::diagnostics::{DiagnosticsRecord, conserved_totals};
use crate::dg1d::PenaltyParams;
use crate::error::{Error, Result};
use crate::models::{
    Model, ModelKind, ModelParams, PositivityCheck, SimState, SodSetup, initial_condition_sod,
};
use crate::timestep::{RunConfig, RunObserver, RunOutcome, run};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialCondition {
    /// Dense gas outside `[x1, x2]`.
    Sod,
    /// Dense gas inside `[x1, x2]`, shocks meeting at the centre.
    Colliding,
}

impl InitialCondition {
    fn name(self) -> &'static str {
        match self {
            Self::Sod => "sod",
            Self::Colliding => "colliding",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub model: ModelKind,
    pub n_cells: usize,
    pub gamma: f64,
    /// `α = alpha_coefficient · h²`.
    pub alpha_coefficient: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub output_times: Vec<f64>,
    pub ic: InitialCondition,
    pub x1: f64,
    pub x2: f64,
    pub delta: f64,
    pub c_penalty: f64,
    pub flux_dissipation_scale: f64,
    pub positivity: PositivityCheck,
    pub spike_window: Option<(f64, f64)>,
    pub seed: u64,
    pub max_steps: usize,
    pub diagnostics_every: usize,
}

impl Default for Config {
    fn default() -> Self {
        let sod = SodSetup::default();
        let run = RunConfig::default();
        Self {
            model: ModelKind::Igr,
            n_cells: 512,
            gamma: 1.4,
            alpha_coefficient: 5.0,
            cfl: run.cfl,
            t_end: run.t_end,
            output_times: run.output_times,
            ic: InitialCondition::Sod,
            x1: sod.x1,
            x2: sod.x2,
            delta: sod.delta,
            c_penalty: PenaltyParams::default().c_penalty,
            flux_dissipation_scale: 1.0,
            positivity: PositivityCheck::default(),
            spike_window: None,
            seed: 0,
            max_steps: run.max_steps,
            diagnostics_every: run.diagnostics_every,
        }
    }
}

const KEYS: [&str; 18] = [
    "model",
    "n_cells",
    "gamma",
    "alpha_coefficient",
    "cfl",
    "t_end",
    "output_times",
    "ic",
    "x1",
    "x2",
    "delta",
    "c_penalty",
    "flux_dissipation_scale",
    "positivity_check",
    "spike_window",
    "seed",
    "max_steps",
    "diagnostics_every",
];

fn list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl Config {
    /// Parse config text. Later `overrides` (`key=value`) replace file values.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| Error::Config {
                line,
                key: body.to_string(),
                message: "expected `key = value`".into(),
            })?;
            let key = k.trim().to_string();
            if entries.contains_key(&key) {
                return Err(Error::Config {
                    line,
                    key,
                    message: "duplicate key".into(),
                });
            }
            entries.insert(key, (line, v.trim().to_string()));
        }
        for o in overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| Error::Config {
                line: 0,
                key: o.clone(),
                message: "override must be `key=value`".into(),
            })?;
            entries.insert(k.trim().to_string(), (0, v.trim().to_string()));
        }

        let mut c = Config::default();
        for (key, (line, value)) in &entries {
            let err = |message: String| Error::Config {
                line: *line,
                key: key.clone(),
                message,
            };
            let num = |v: &str| v.parse::<f64>().map_err(|e| err(format!("`{v}` is not a number: {e}")));
            let int = |v: &str| v.parse::<u64>().map_err(|e| err(format!("`{v}` is not a non-negative integer: {e}")));
            match key.as_str() {
                "model" => c.model = value.parse().map_err(|e: Error| err(e.to_string()))?,
                "n_cells" => c.n_cells = int(value)? as usize,
                "gamma" => c.gamma = num(value)?,
                "alpha_coefficient" => c.alpha_coefficient = num(value)?,
                "cfl" => c.cfl = num(value)?,
                "t_end" => c.t_end = num(value)?,
                "output_times" => c.output_times = list(value).map_err(err)?,
                "ic" => {
                    c.ic = match value.to_ascii_lowercase().as_str() {
                        "sod" => InitialCondition::Sod,
                        "colliding" => InitialCondition::Colliding,
                        _ => return Err(err(format!("unknown initial condition `{value}` (sod, colliding)"))),
                    }
                }
                "x1" => c.x1 = num(value)?,
                "x2" => c.x2 = num(value)?,
                "delta" => c.delta = num(value)?,
                "c_penalty" => c.c_penalty = num(value)?,
                "flux_dissipation_scale" => c.flux_dissipation_scale = num(value)?,
                "positivity_check" => {
                    c.positivity = match value.to_ascii_lowercase().as_str() {
                        "cell_means" => PositivityCheck::CellMeans,
                        "pointwise" => PositivityCheck::Pointwise,
                        _ => return Err(err(format!("unknown check `{value}` (cell_means, pointwise)"))),
                    }
                }
                "spike_window" => {
                    c.spike_window = match list(value).map_err(err)?.as_slice() {
                        [] => None,
                        [lo, hi] => Some((*lo, *hi)),
                        _ => return Err(err("expected `lo, hi`".into())),
                    }
                }
                "seed" => c.seed = int(value)?,
                "max_steps" => c.max_steps = int(value)? as usize,
                "diagnostics_every" => c.diagnostics_every = int(value)? as usize,
                _ => return Err(err(format!("unknown key; valid keys: {}", KEYS.join(", ")))),
            }
        }
        c.validate(&entries)?;
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    fn validate(&self, entries: &BTreeMap<String, (usize, String)>) -> Result<()> {
        let fail = |key: &str, message: String| Error::Config {
            line: entries.get(key).map_or(0, |e| e.0),
            key: key.to_string(),
            message,
        };
        if self.n_cells < 4 {
            return Err(fail("n_cells", format!("need at least 4 cells, got {}", self.n_cells)));
        }
        if !(self.gamma > 1.0) {
            return Err(fail("gamma", format!("must exceed 1, got {}", self.gamma)));
        }
        if !(self.alpha_coefficient >= 0.0) {
            return Err(fail("alpha_coefficient", "must be non-negative".into()));
        }
        if !(self.c_penalty > 0.0) {
            return Err(fail("c_penalty", "must be positive".into()));
        }
        if !(self.flux_dissipation_scale >= 0.0) {
            return Err(fail("flux_dissipation_scale", "must be non-negative".into()));
        }
        self.sod_setup()
            .validate(1.0)
            .map_err(|e| fail(if entries.contains_key("delta") { "delta" } else { "x2" }, e.to_string()))?;
        if let Some((lo, hi)) = self.spike_window {
            if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                return Err(fail("spike_window", format!("need 0 <= lo < hi <= 1, got ({lo}, {hi})")));
            }
        }
        self.run_config().map_err(|e| {
            let msg = e.to_string();
            let key = ["cfl", "t_end", "max_steps", "output"]
                .into_iter()
                .find(|k| msg.contains(k))
                .map_or("t_end", |k| if k == "output" { "output_times" } else { k });
            fail(key, msg)
        })?;
        Ok(())
    }

    pub fn mesh(&self) -> Result<Mesh1D> {
        Mesh1D::unit(self.n_cells)
    }

    pub fn alpha(&self) -> f64 {
        let h = 1.0 / self.n_cells as f64;
        self.alpha_coefficient * h * h
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let mut p = ModelParams::new(self.model, self.alpha(), self.gamma)?;
        p.penalty = PenaltyParams::new(self.c_penalty)?;
        p.flux_dissipation_scale = self.flux_dissipation_scale;
        p.positivity = self.positivity;
        Ok(p)
    }

    pub fn sod_setup(&self) -> SodSetup {
        SodSetup {
            x1: self.x1,
            x2: self.x2,
            delta: self.delta,
            reflected: self.ic == InitialCondition::Colliding,
        }
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let mut r = RunConfig::new(self.t_end, self.cfl)?.with_outputs(self.output_times.clone())?;
        r.max_steps = self.max_steps;
        r.diagnostics_every = self.diagnostics_every;
        r.spike_window = self.spike_window;
        r.validate()?;
        Ok(r)
    }

    pub fn build(&self) -> Result<(Model, SimState)> {
        let mesh = self.mesh()?;
        let model = Model::new(self.model_params()?, &mesh)?;
        let state = initial_condition_sod(&mesh, model.params(), &self.sod_setup())?;
        Ok((model, state))
    }

    /// Fully resolved config, parseable by [`Config::parse`].
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("model", self.model.name().to_string());
        kv("n_cells", self.n_cells.to_string());
        kv("gamma", self.gamma.to_string());
        kv("alpha_coefficient", self.alpha_coefficient.to_string());
        kv("cfl", self.cfl.to_string());
        kv("t_end", self.t_end.to_string());
        kv("output_times", fmt_list(&self.output_times));
        kv("ic", self.ic.name().to_string());
        kv("x1", self.x1.to_string());
        kv("x2", self.x2.to_string());
        kv("delta", self.delta.to_string());
        kv("c_penalty", self.c_penalty.to_string());
        kv("flux_dissipation_scale", self.flux_dissipation_scale.to_string());
        kv(
            "positivity_check",
            match self.positivity {
                PositivityCheck::CellMeans => "cell_means",
                PositivityCheck::Pointwise => "pointwise",
            }
            .to_string(),
        );
        kv(
            "spike_window",
            self.spike_window.map_or(String::new(), |(a, b)| fmt_list(&[a, b])),
        );
        kv("seed", self.seed.to_string());
        kv("max_steps", self.max_steps.to_string());
        kv("diagnostics_every", self.diagnostics_every.to_string());
        s
    }
}

pub const SNAPSHOT_HEADER: &str = "x,rho,u,E,eps";

pub fn version_string() -> String {
    format!("igrlab-v{}", env!("CARGO_PKG_VERSION"))
}

pub fn snapshot_file_name(n_cells: usize, kind: ModelKind, t: f64) -> String {
    format!("nc{n_cells}_{}_t_{t:.6}.csv", kind.slug())
}

/// Columnar snapshot, one entry per cell centre.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub energy: Vec<f64>,
    pub eps: Vec<f64>,
}

impl Snapshot {
    pub fn from_state(model: &Model, state: &SimState) -> Result<Self> {
        let prims = model.recover_primitives(state)?;
        let mesh = state.mesh();
        let n = mesh.n_cells();
        let at = |f: &crate::dg1d::DgField| (0..n).map(|j| f.value(j, 0.0)).collect::<Vec<_>>();
        Ok(Self {
            x: (0..n).map(|j| mesh.cell_center(j)).collect(),
            rho: at(&state.rho),
            u: at(&prims.u),
            energy: at(&state.energy),
            eps: at(&prims.eps),
        })
    }

    pub fn columns(&self) -> [(&'static str, &[f64]); 5] {
        [
            ("x", &self.x),
            ("rho", &self.rho),
            ("u", &self.u),
            ("E", &self.energy),
            ("eps", &self.eps),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(100 * self.x.len());
        s.push_str(SNAPSHOT_HEADER);
        s.push('\n');
        for i in 0..self.x.len() {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.x[i], self.rho[i], self.u[i], self.energy[i], self.eps[i]
            );
        }
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let csv_err = |message: String| Error::Csv {
            path: path.display().to_string(),
            message,
        };
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == SNAPSHOT_HEADER => {}
            Some(h) => return Err(csv_err(format!("header `{h}`, expected `{SNAPSHOT_HEADER}`"))),
            None => return Err(csv_err("empty file".into())),
        }
        let mut cols: [Vec<f64>; 5] = Default::default();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let vals: Vec<&str> = line.split(',').collect();
            if vals.len() != 5 {
                return Err(csv_err(format!("row {}: {} fields, expected 5", i + 2, vals.len())));
            }
            for (c, v) in cols.iter_mut().zip(vals) {
                c.push(v.trim().parse().map_err(|e| csv_err(format!("row {}: `{v}`: {e}", i + 2)))?);
            }
        }
        let [x, rho, u, energy, eps] = cols;
        Ok(Self { x, rho, u, energy, eps })
    }
}

/// Sidecar text next to each snapshot.
pub fn snapshot_metadata(config: &Config, state: &SimState, step: usize) -> String {
    let [m, p, e] = conserved_totals(state);
    let mut s = String::new();
    let _ = writeln!(s, "# {}", version_string());
    let _ = writeln!(s, "# time = {:.16e}", state.time);
    let _ = writeln!(s, "# step = {step}");
    let _ = writeln!(s, "# total_mass = {m:.16e}");
    let _ = writeln!(s, "# total_momentum = {p:.16e}");
    let _ = writeln!(s, "# total_energy = {e:.16e}");
    s.push_str(&config.echo());
    s
}

pub fn write_snapshot(config: &Config, model: &Model, state: &SimState, step: usize, path: &Path) -> Result<()> {
    fs::write(path, Snapshot::from_state(model, state)?.to_csv())?;
    let mut meta = path.as_os_str().to_owned();
    meta.push(".meta");
    fs::write(PathBuf::from(meta), snapshot_metadata(config, state, step))?;
    Ok(())
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::from(DiagnosticsRecord::CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Writes a snapshot at every output time.
struct SnapshotWriter<'a> {
    config: &'a Config,
    model: &'a Model,
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl RunObserver for SnapshotWriter<'_> {
    fn on_output(&mut self, state: &SimState, record: &DiagnosticsRecord) -> Result<()> {
        let path = self.dir.join(snapshot_file_name(self.config.n_cells, self.config.model, state.time));
        write_snapshot(self.config, self.model, state, record.step, &path)?;
        self.written.push(path);
        Ok(())
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub outcome: RunOutcome,
    pub snapshots: Vec<PathBuf>,
    pub diagnostics: PathBuf,
}

/// Simulate `config`, writing snapshots, `diagnostics.csv` and `config.txt`
/// into `dir`.
pub fn run_to_dir(config: &Config, dir: &Path) -> Result<RunSummary> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.txt"), format!("# {}\n{}", version_string(), config.echo()))?;
    let (model, state) = config.build()?;
    let mut writer = SnapshotWriter {
        config,
        model: &model,
        dir,
        written: Vec::new(),
    };
    let outcome = run(&model, state, &config.run_config()?, &mut writer)?;
    let diagnostics = dir.join("diagnostics.csv");
    fs::write(&diagnostics, diagnostics_csv(&outcome.diagnostics))?;
    Ok(RunSummary {
        outcome,
        snapshots: writer.written,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnNorms {
    pub column: &'static str,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Column-wise discrepancies; `L¹` and `L²` are cell-size weighted on the
/// unit domain.
pub fn compare_snapshots(a: &Snapshot, b: &Snapshot) -> Result<Vec<ColumnNorms>> {
    if a.x.len() != b.x.len() {
        return Err(Error::InvalidParameter(format!(
            "row counts differ: {} vs {}",
            a.x.len(),
            b.x.len()
        )));
    }
    if let Some(i) = (0..a.x.len()).find(|&i| (a.x[i] - b.x[i]).abs() > 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "grids differ at row {}: x = {} vs {}",
            i + 1,
            a.x[i],
            b.x[i]
        )));
    }
    let w = 1.0 / a.x.len().max(1) as f64;
    Ok(a.columns()
        .into_iter()
        .zip(b.columns())
        .skip(1)
        .map(|((name, ca), (_, cb))| {
            let d = ca.iter().zip(cb).map(|(p, q)| (p - q).abs());
            let (mut l1, mut l2, mut linf) = (0.0, 0.0, 0.0f64);
            for v in d {
                l1 += w * v;
                l2 += w * v * v;
                linf = linf.max(v);
            }
            ColumnNorms {
                column: name,
                l1,
                l2: l2.sqrt(),
                linf,
            }
        })
        .collect())
}

pub fn compare_csv(a: &Path, b: &Path) -> Result<Vec<ColumnNorms>> {
    compare_snapshots(&Snapshot::read(a)?, &Snapshot::read(b)?)
}

pub fn compare_report(norms: &[ColumnNorms]) -> String {
    let mut s = String::from("column,l1,l2,linf\n");
    for n in norms {
        let _ = writeln!(s, "{},{:.16e},{:.16e},{:.16e}", n.column, n.l1, n.l2, n.linf);
    }
    s
}

/// Worker count from `IGRLAB_THREADS`; `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("IGRLAB_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidParameter(format!(
                "IGRLAB_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}
