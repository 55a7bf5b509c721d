use rado_core::limit_sim::Budgets;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything that can change an output besides the input files. It is
/// echoed into every file the CLI writes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    /// Witness pairs examined by the case detector have at most this many vertices.
    pub pair_len: usize,
    /// Extension searches add at most this many vertices.
    pub depth: usize,
    /// Upper bound on the number of colorings an exhaustive run may visit.
    pub enum_budget: u64,
    pub theta: usize,
    /// Cohesive-oracle slack; `None` means a quarter of the cohesive set.
    pub slack: Option<usize>,
    /// Worker threads for the parallel searches; 0 lets the pool decide.
    pub jobs: usize,
    pub halting_stages: usize,
    pub diag_stages: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = Budgets::default();
        RunConfig {
            seed: 0,
            pair_len: b.pair_len,
            depth: b.depth,
            enum_budget: 1 << 24,
            theta: 3,
            slack: None,
            jobs: 0,
            halting_stages: 200,
            diag_stages: 2000,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let budgets = [
            ("pair-len", self.pair_len as u64),
            ("depth", self.depth as u64),
            ("enum-budget", self.enum_budget),
            ("theta", self.theta as u64),
            ("halting-stages", self.halting_stages as u64),
            ("diag-stages", self.diag_stages as u64),
        ];
        match budgets.iter().find(|(_, v)| *v == 0) {
            Some((name, _)) => Err(CliError::Usage(format!("--{name} must be positive"))),
            None => Ok(()),
        }
    }

    pub fn budgets(&self) -> Budgets {
        Budgets { pair_len: self.pair_len, depth: self.depth }
    }

    /// RADO_JOBS wins over --jobs.
    pub fn apply_env(&mut self, rado_jobs: Option<&str>) -> Result<(), CliError> {
        if let Some(v) = rado_jobs {
            self.jobs = v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("RADO_JOBS must be a thread count, got {v:?}")))?;
        }
        Ok(())
    }

    pub fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| CliError::Failure(format!("cannot start worker pool: {e}")))
    }
}
