//! Verification campaigns: many seeded trials per theorem, aggregated into a report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instance::{generate, InstanceSpec};
use crate::error::{Error, Result};
use crate::hermitian::Tolerance;
use crate::verify::{Mode, TheoremId};

pub const CAMPAIGN_SCHEMA_VERSION: u32 = 1;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "UNCERT_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub theorems: Vec<TheoremId>,
    pub spec: InstanceSpec,
    #[serde(default)]
    pub tolerance: Tolerance,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

impl CampaignConfig {
    pub fn new(theorems: Vec<TheoremId>, spec: InstanceSpec) -> Self {
        CampaignConfig { theorems, spec, tolerance: Tolerance::default(), mode: Mode::default(), output_path: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.theorems.is_empty() {
            return Err(Error::InvalidArgument("theorem list is empty".into()));
        }
        if !(self.tolerance.rel >= 0.0 && self.tolerance.abs >= 0.0) {
            return Err(Error::InvalidArgument("tolerances must be nonnegative".into()));
        }
        self.spec.validate()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: CampaignConfig = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub theorem: TheoremId,
    /// False when the map family lies outside the theorem's scope; no trials run.
    pub applicable: bool,
    pub trials: usize,
    pub passes: usize,
    pub failures: usize,
    pub hypothesis_unmet: usize,
    /// Trials aborted by a numerical error.
    pub errors: usize,
    /// Smallest margin among trials whose hypotheses were all met.
    pub min_margin: Option<f64>,
    pub argmin_trial: Option<u64>,
    pub argmin_seed: Option<u64>,
    /// Threshold in force at the argmin trial.
    pub argmin_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub error_messages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema_version: u32,
    pub version: String,
    pub config: CampaignConfig,
    pub threads: usize,
    pub wall_time_s: f64,
    pub theorems: Vec<TheoremSummary>,
}

impl CampaignReport {
    pub fn failures(&self) -> usize {
        self.theorems.iter().map(|t| t.failures).sum()
    }

    pub fn errors(&self) -> usize {
        self.theorems.iter().map(|t| t.errors).sum()
    }

    /// 0 all pass, 1 some margin failure, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        if self.errors() > 0 {
            3
        } else if self.failures() > 0 {
            1
        } else {
            0
        }
    }

    pub fn summary(&self, theorem: TheoremId) -> Option<&TheoremSummary> {
        self.theorems.iter().find(|t| t.theorem == theorem)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    /// One row per theorem; the JSON report stays authoritative.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record([
            "theorem",
            "applicable",
            "trials",
            "passes",
            "failures",
            "hypothesis_unmet",
            "errors",
            "min_margin",
            "argmin_trial",
            "argmin_seed",
        ])
        .map_err(io)?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for t in &self.theorems {
            w.write_record([
                t.theorem.as_str().to_string(),
                t.applicable.to_string(),
                t.trials.to_string(),
                t.passes.to_string(),
                t.failures.to_string(),
                t.hypothesis_unmet.to_string(),
                t.errors.to_string(),
                opt(t.min_margin.map(|m| format!("{m:e}"))),
                opt(t.argmin_trial.map(|v| v.to_string())),
                opt(t.argmin_seed.map(|v| v.to_string())),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

enum Outcome {
    Pass(Option<f64>, f64),
    Fail(Option<f64>, f64),
    Unmet,
    Error(Error),
}

fn run_trial(theorem: TheoremId, config: &CampaignConfig, trial: u64) -> Outcome {
    let report = generate(theorem, &config.spec, trial, config.mode)
        .and_then(|inst| super::instance::run_instance(&inst, &config.tolerance));
    match report {
        Ok(r) if !r.hypotheses_met() => Outcome::Unmet,
        Ok(r) if r.pass => Outcome::Pass(r.margin, r.threshold),
        Ok(r) => Outcome::Fail(r.margin, r.threshold),
        Err(e) => Outcome::Error(e),
    }
}

fn summarize(theorem: TheoremId, config: &CampaignConfig, outcomes: Vec<Outcome>) -> TheoremSummary {
    let mut s = TheoremSummary {
        theorem,
        applicable: true,
        trials: outcomes.len(),
        passes: 0,
        failures: 0,
        hypothesis_unmet: 0,
        errors: 0,
        min_margin: None,
        argmin_trial: None,
        argmin_seed: None,
        argmin_threshold: None,
        error_messages: Vec::new(),
    };
    // sequential fold in trial order, so ties resolve identically for any thread count
    for (t, o) in outcomes.into_iter().enumerate() {
        let t = t as u64;
        let m = match o {
            Outcome::Pass(m, thr) => {
                s.passes += 1;
                m.map(|m| (m, thr))
            }
            Outcome::Fail(m, thr) => {
                s.failures += 1;
                m.map(|m| (m, thr))
            }
            Outcome::Unmet => {
                s.hypothesis_unmet += 1;
                None
            }
            Outcome::Error(e) => {
                // a numerical error is also a failed trial
                s.errors += 1;
                s.failures += 1;
                if s.error_messages.len() < 5 {
                    s.error_messages.push(format!("trial {t}: {e}"));
                }
                None
            }
        };
        if let Some((m, thr)) = m {
            if s.min_margin.is_none_or(|cur| m < cur) {
                s.min_margin = Some(m);
                s.argmin_trial = Some(t);
                s.argmin_seed = Some(config.spec.trial_seed(t));
                s.argmin_threshold = Some(thr);
            }
        }
    }
    s
}

/// Number of worker threads from `UNCERT_THREADS`, or rayon's default.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Runs the campaign on `threads` workers (`None`: honour `UNCERT_THREADS`).
pub fn run_campaign_with_threads(config: &CampaignConfig, threads: Option<usize>) -> Result<CampaignReport> {
    config.validate()?;
    let threads = match threads {
        Some(n) => Some(n),
        None => threads_from_env()?,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let family = config.spec.map_kind;
    let theorems = pool.install(|| {
        config
            .theorems
            .iter()
            .map(|&theorem| {
                if !theorem.supports(family) {
                    let mut s = summarize(theorem, config, Vec::new());
                    s.applicable = false;
                    return s;
                }
                let outcomes: Vec<Outcome> = (0..config.spec.trials as u64)
                    .into_par_iter()
                    .map(|t| run_trial(theorem, config, t))
                    .collect();
                summarize(theorem, config, outcomes)
            })
            .collect()
    });
    Ok(CampaignReport {
        schema_version: CAMPAIGN_SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        threads: pool.current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        theorems,
    })
}

pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport> {
    run_campaign_with_threads(config, None)
}
