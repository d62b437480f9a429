//! Resource limits shared by the SAT engine and the enumerators.

use std::time::{Duration, Instant};

/// Limits for one job. `None` means unlimited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub time_limit: Option<Duration>,
    /// Conflict cap for each individual SAT call.
    pub max_conflicts: Option<u64>,
    /// Stop after this many results (MUSes, MCSes).
    pub max_results: Option<usize>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn with_max_conflicts(mut self, n: u64) -> Self {
        self.max_conflicts = Some(n);
        self
    }

    pub fn with_max_results(mut self, n: usize) -> Self {
        self.max_results = Some(n);
        self
    }

    /// A budget with `fraction` of this budget's time; other caps unchanged.
    pub fn share(&self, fraction: f64) -> Budget {
        Budget {
            time_limit: self.time_limit.map(|t| t.mul_f64(fraction)),
            ..*self
        }
    }

    pub fn start(&self) -> Limits {
        Limits {
            deadline: self.time_limit.map(|t| Instant::now() + t),
            max_conflicts: self.max_conflicts,
        }
    }
}

/// A started budget: an absolute deadline plus the per-call conflict cap.
#[derive(Clone, Copy, Debug, Default)]
pub struct Limits {
    pub deadline: Option<Instant>,
    pub max_conflicts: Option<u64>,
}

impl Limits {
    pub fn none() -> Self {
        Limits::default()
    }

    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    pub fn remaining(&self) -> Option<Duration> {
        self.deadline
            .map(|d| d.saturating_duration_since(Instant::now()))
    }

    /// Limits for a sub-task that gets `fraction` of the remaining time.
    pub fn share(&self, fraction: f64) -> Limits {
        Limits {
            deadline: self
                .remaining()
                .map(|r| Instant::now() + r.mul_f64(fraction)),
            max_conflicts: self.max_conflicts,
        }
    }
}
