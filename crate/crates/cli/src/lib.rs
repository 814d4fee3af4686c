//! Configuration, validation and dispatch for `kdv-lab`.
//!
//! A run is described by one strict JSON object. Missing keys take the
//! documented defaults; unknown keys are rejected.

use std::path::{Path, PathBuf};

use kdv_core::dynamics::{stable_dt, Integrator, KdvParams};
use kdv_core::ensemble::InitialRecipe;
use kdv_core::experiments::{
    persist, run_absorbing_ball, run_decay, run_energy_identity, run_omega_limit, run_simulation,
    run_split_consistency, run_xsb, smoothing_study, Summary, Thresholds, TrajectoryRecord,
};
use kdv_core::imethod::{EnergyOrder, IMultiplier};
use kdv_core::{GridSpec, SobolevIndex, SpectralField};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Simulate,
    Split,
    Energy,
    Absorbing,
    Decay,
    Smoothing,
    Omega,
    Xsb,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Simulate => "simulate",
            Suite::Split => "split",
            Suite::Energy => "energy",
            Suite::Absorbing => "absorbing",
            Suite::Decay => "decay",
            Suite::Smoothing => "smoothing",
            Suite::Omega => "omega",
            Suite::Xsb => "xsb",
        }
    }

    /// Initial radii used when the config gives none.
    fn default_radii(self) -> Vec<f64> {
        match self {
            Suite::Absorbing => vec![0.1, 10.0],
            Suite::Smoothing => vec![0.2, 0.6, 2.0],
            Suite::Omega => vec![0.1, 10.0],
            _ => vec![1.0],
        }
    }
}

/// Initial data: `count` seeds per radius, normalized in `H^s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub count: usize,
    pub recipe: Option<InitialRecipe>,
    pub radii: Option<Vec<f64>>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { count: 1, recipe: None, radii: None }
    }
}

/// Time-independent forcing, normalized in `L²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    pub recipe: InitialRecipe,
    pub radius: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub suite: Suite,
    /// Band limit `K`.
    pub k: i64,
    pub gamma: f64,
    pub s: f64,
    /// Split cutoff `N`; defaults to `K/4`.
    pub n_split: Option<f64>,
    /// Step size; defaults to the stability rule for the initial data.
    pub dt: Option<f64>,
    /// Horizon; defaults to `10/γ`.
    pub t_end: Option<f64>,
    pub integrator: Integrator,
    pub nonlinear: bool,
    pub forcing: Option<ForcingConfig>,
    pub ensemble: EnsembleConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// I-multiplier cutoff for the energy suites; defaults to `n_split`.
    pub cutoff: Option<f64>,
    /// Modified-energy order recorded by `simulate` (2, 3 or 4); none by default.
    pub energy_order: Option<u8>,
    /// Rerun the largest smoothing member on the `2K` grid.
    pub refine: bool,
    /// Probe times for `omega`; default `[3T/4, T]`.
    pub probes: Option<Vec<f64>>,
    /// Exponents for `xsb`.
    pub bs: Vec<f64>,
    pub snapshots: usize,
    pub thresholds: Thresholds,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            suite: Suite::Simulate,
            k: 32,
            gamma: 0.5,
            s: -0.5,
            n_split: None,
            dt: None,
            t_end: None,
            integrator: Integrator::default(),
            nonlinear: true,
            forcing: None,
            ensemble: EnsembleConfig::default(),
            out_dir: PathBuf::from("out"),
            seed: 0,
            cutoff: None,
            energy_order: None,
            refine: false,
            probes: None,
            bs: vec![0.0, 0.25, 0.5],
            snapshots: 64,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("config key `{key}`: {constraint}")]
    Invalid { key: &'static str, constraint: String },
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Run(#[from] kdv_core::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Syntax(_) | CliError::Invalid { .. } => "config",
            CliError::Read { .. } => "io",
            CliError::Run(e) => e.kind(),
        }
    }

    /// `{"status": "error", "kind": …, "message": …}` on one line.
    pub fn to_json(&self) -> String {
        let mut body = serde_json::json!({
            "status": "error",
            "kind": self.kind(),
            "message": self.to_string(),
        });
        if let CliError::Invalid { key, .. } = self {
            body["key"] = serde_json::Value::from(*key);
        }
        body.to_string()
    }
}

fn invalid(key: &'static str, constraint: impl Into<String>) -> CliError {
    CliError::Invalid { key, constraint: constraint.into() }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = serde_json::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

fn positive(key: &'static str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be a positive number, got {v}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.k < 2 {
            return Err(invalid("k", format!("band limit must be at least 2, got {}", self.k)));
        }
        if self.k > 4096 {
            return Err(invalid("k", format!("band limit {} exceeds 4096", self.k)));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(invalid("gamma", format!("must be >= 0, got {}", self.gamma)));
        }
        if self.gamma == 0.0 && (self.suite == Suite::Decay || self.t_end.is_none()) {
            let why = if self.suite == Suite::Decay {
                "the decay suite needs damping gamma > 0"
            } else {
                "gamma = 0 needs an explicit t_end"
            };
            return Err(invalid("gamma", why));
        }
        if !(SobolevIndex::MIN..=SobolevIndex::MAX).contains(&self.s) {
            return Err(invalid(
                "s",
                format!("must lie in [{}, {}], got {}", SobolevIndex::MIN, SobolevIndex::MAX, self.s),
            ));
        }
        if let Some(n) = self.n_split {
            positive("n_split", n)?;
        }
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        if let Some(t) = self.t_end {
            positive("t_end", t)?;
        }
        if let Some(f) = &self.forcing {
            if !(f.radius.is_finite() && f.radius >= 0.0) {
                return Err(invalid("forcing", format!("radius must be >= 0, got {}", f.radius)));
            }
            f.recipe.sample(self.grid(), 0).map_err(|e| invalid("forcing", e.to_string()))?;
        }
        if self.ensemble.count == 0 {
            return Err(invalid("ensemble", "count must be at least 1"));
        }
        self.recipe().sample(self.grid(), 0).map_err(|e| invalid("ensemble", e.to_string()))?;
        if let Some(r) = &self.ensemble.radii {
            if r.is_empty() || r.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(invalid("ensemble", "radii must be a non-empty list of positive numbers"));
            }
        }
        if let Some(n) = self.cutoff {
            positive("cutoff", n)?;
        }
        if self.matches_energy() && self.s >= 0.0 {
            return Err(invalid("s", "the I-multiplier needs s < 0"));
        }
        if let Some(o) = self.energy_order {
            if !(2..=4).contains(&o) {
                return Err(invalid("energy_order", format!("must be 2, 3 or 4, got {o}")));
            }
        }
        if self.bs.iter().any(|b| !(0.0..=0.5).contains(b)) {
            return Err(invalid("bs", "every b must lie in [0, 0.5]"));
        }
        if self.snapshots < 8 {
            return Err(invalid("snapshots", format!("need at least 8, got {}", self.snapshots)));
        }
        if let Some(p) = &self.probes {
            let t = self.horizon();
            if p.is_empty() || p.iter().any(|&x| !(x >= 0.5 * t && x <= t)) {
                return Err(invalid("probes", format!("must be non-empty and lie in [{}, {t}]", 0.5 * t)));
            }
        }
        Ok(())
    }

    fn matches_energy(&self) -> bool {
        self.suite == Suite::Energy || (self.suite == Suite::Simulate && self.energy_order.is_some())
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.k as usize).expect("validated band limit")
    }

    pub fn horizon(&self) -> f64 {
        self.t_end.unwrap_or(10.0 / self.gamma)
    }

    fn recipe(&self) -> InitialRecipe {
        self.ensemble.recipe.unwrap_or(InitialRecipe::RandomBand { lo: 1, hi: self.k as usize })
    }

    fn radii(&self) -> Vec<f64> {
        self.ensemble.radii.clone().unwrap_or_else(|| self.suite.default_radii())
    }

    /// Members in radius-major order with seeds `seed, seed+1, …`.
    pub fn members(&self) -> Result<Vec<SpectralField>, CliError> {
        let grid = self.grid();
        let recipe = self.recipe();
        let mut out = Vec::new();
        let mut seed = self.seed;
        for r in self.radii() {
            for _ in 0..self.ensemble.count {
                out.push(recipe.sample_normalized(grid, seed, self.s, r)?);
                seed = seed.wrapping_add(1);
            }
        }
        Ok(out)
    }

    /// Solver parameters; `dt` defaults to the stability rule for the
    /// largest member.
    pub fn params(&self, members: &[SpectralField]) -> Result<KdvParams, CliError> {
        let grid = self.grid();
        let mut p = KdvParams::new(grid, self.gamma, self.s)?.with_integrator(self.integrator);
        if !self.nonlinear {
            p = p.linear();
        }
        if let Some(n) = self.n_split {
            p = p.with_split(n)?;
        }
        if let Some(f) = &self.forcing {
            let seed = f.seed.unwrap_or(self.seed.wrapping_add(1_000_000));
            p = p.with_forcing(f.recipe.sample_normalized(grid, seed, 0.0, f.radius)?)?;
        }
        match self.dt {
            Some(dt) => Ok(p.with_dt(dt)?),
            None => {
                let sup = members.iter().map(|u| u.max_abs()).fold(0.0, f64::max);
                let big = members.iter().find(|u| u.max_abs() == sup).cloned();
                match big {
                    Some(u) => Ok(p.with_stable_dt(&u, None)?),
                    None => Ok(p.with_dt(stable_dt(grid, 1.0))?),
                }
            }
        }
    }

    fn multiplier(&self, p: &KdvParams) -> Result<IMultiplier, CliError> {
        Ok(IMultiplier::new(self.cutoff.unwrap_or(p.n_split), self.s)?)
    }
}

/// Result of one dispatched run.
#[derive(Debug)]
pub struct Outcome {
    pub dir: PathBuf,
    pub summary: Summary,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.summary.all_passed()
    }
}

/// Runs the configured suite and writes `<out>/<suite>/{trace.csv, summary.json}`.
pub fn dispatch(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let members = cfg.members()?;
    let p = cfg.params(&members)?;
    let t = cfg.horizon();
    let th = &cfg.thresholds;
    let first = &members[0];
    let (record, summary): (TrajectoryRecord, Summary) = match cfg.suite {
        Suite::Simulate => {
            let order = match cfg.energy_order {
                Some(2) => Some(EnergyOrder::Two),
                Some(3) => Some(EnergyOrder::Three),
                Some(_) => Some(EnergyOrder::Four),
                None => None,
            };
            let im = cfg.multiplier(&p).ok();
            let energies = order.zip(im.as_ref()).map(|(o, m)| (m, o));
            let r = run_simulation(first, &p, t, energies)?;
            let s = r.summary(&p, th);
            (r.record, s)
        }
        Suite::Split => {
            let r = run_split_consistency(first, &p, t)?;
            let s = r.summary(&p, th);
            (r.record, s)
        }
        Suite::Energy => {
            let r = run_energy_identity(first, &p, &cfg.multiplier(&p)?, t)?;
            let s = r.summary(&p, th);
            (r.record, s)
        }
        Suite::Absorbing => {
            let r = run_absorbing_ball(&members, &p, t)?;
            let s = r.summary(&p, th);
            (r.record, s)
        }
        Suite::Decay => {
            let r = run_decay(first, &p, t)?;
            let s = r.summary(&p, th);
            (r.record, s)
        }
        Suite::Smoothing => {
            let r = smoothing_study(&members, &p, t, cfg.refine)?;
            let s = r.summary(&p, th);
            let big = (0..r.members.len())
                .fold(0, |b, i| if r.members[i].initial_hs > r.members[b].initial_hs { i } else { b });
            (r.members[big].record.clone(), s)
        }
        Suite::Omega => {
            let probes = cfg.probes.clone().unwrap_or_else(|| vec![0.75 * t, t]);
            let r = run_omega_limit(&members, &p, t, &probes)?;
            let s = r.summary(&p, th);
            (r.record, s)
        }
        Suite::Xsb => {
            let r = run_xsb(first, &p, t, &cfg.bs, cfg.snapshots)?;
            let s = r.summary(&p, th);
            (r.record, s)
        }
    };
    let dir = out.join(cfg.suite.name());
    persist(&record, &summary, &dir)?;
    Ok(Outcome { dir, summary })
}

/// Reads, parses and validates the file at `path`.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    parse_config(&text)
}
