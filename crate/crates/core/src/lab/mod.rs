//! Verification lab: random instances, campaigns, counterexample search and replay.

pub mod campaign;
pub mod instance;
pub mod search;

pub use campaign::{run_campaign, run_campaign_with_threads, CampaignConfig, CampaignReport, TheoremSummary};
pub use instance::{generate, run_instance, run_theorem, Instance, InstanceSpec};
pub use search::{counterexample_search, Drop, SearchConfig, SearchReport};

use std::path::Path;

use crate::error::{Error, Result};
use crate::hermitian::Tolerance;
use crate::verify::{Mode, TheoremId, VerifierReport};

/// Re-runs a serialized instance. `theorem` defaults to the instance's own and `mode`
/// to the one it was generated with.
pub fn replay(path: &Path, theorem: Option<TheoremId>, mode: Option<Mode>, tol: &Tolerance) -> Result<VerifierReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let inst = Instance::from_json_str(&text)?;
    run_theorem(&inst, theorem.unwrap_or(inst.theorem), mode.unwrap_or(inst.mode), tol)
}
