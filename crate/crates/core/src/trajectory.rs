//! Per-step training records shared by the population and SGD simulators.

use serde::Serialize;
use std::fmt::Write as _;

/// CSV schema tag written in the first line of every trajectory file.
pub const TRAJECTORY_SCHEMA: &str = "skillcomp.trajectory/v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub step: u64,
    /// Population loss at this step's parameters.
    pub loss: f64,
    pub a: f64,
    pub b: f64,
    /// Norm of the population gradient.
    pub grad_norm: f64,
    pub recovery_error: f64,
    /// `‖∇L‖² / (2k p_min A^{2k-2} L)`, absent when `L <= 1e-14`.
    pub pl_ratio: Option<f64>,
    /// Mean loss of the minibatch that produced this step (SGD only).
    pub batch_loss: Option<f64>,
    /// Bin-restricted population losses, in bin order.
    pub bin_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    pub step: u64,
    pub w: Vec<f64>,
}

/// First step at which a monitored quantity fell to or below `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub threshold: f64,
    pub step: Option<u64>,
}

impl Crossing {
    pub(crate) fn observe(list: &mut [Crossing], step: u64, value: f64) {
        for c in list.iter_mut().filter(|c| c.step.is_none()) {
            if value <= c.threshold {
                c.step = Some(step);
            }
        }
    }
}

/// Logged trajectory. `initial` is the state before any update; `records` hold
/// steps `1..=final_step` at the configured cadence (the final step is always
/// logged).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryLog {
    pub initial: TrajectoryRecord,
    pub records: Vec<TrajectoryRecord>,
    pub checkpoints: Vec<Checkpoint>,
    pub loss_crossings: Vec<Crossing>,
    pub recovery_crossings: Vec<Crossing>,
    pub final_w: Vec<f64>,
    pub final_step: u64,
    /// True when a stop rule ended the run before the step budget.
    pub stopped_early: bool,
}

impl TrajectoryLog {
    /// Initial record followed by all logged records.
    pub fn all_records(&self) -> impl Iterator<Item = &TrajectoryRecord> {
        std::iter::once(&self.initial).chain(self.records.iter())
    }

    pub fn last(&self) -> &TrajectoryRecord {
        self.records.last().unwrap_or(&self.initial)
    }

    pub fn first_loss_crossing(&self, threshold: f64) -> Option<u64> {
        self.loss_crossings.iter().find(|c| c.threshold == threshold).and_then(|c| c.step)
    }

    pub fn first_recovery_crossing(&self, threshold: f64) -> Option<u64> {
        self.recovery_crossings.iter().find(|c| c.threshold == threshold).and_then(|c| c.step)
    }

    /// CSV with a schema/config comment line, a header row and one row per
    /// logged update step.
    pub fn to_csv(&self, config_hash: &str) -> String {
        let bins = self.initial.bin_losses.len();
        let mut out = String::new();
        let _ = writeln!(out, "# schema={TRAJECTORY_SCHEMA} config_hash={config_hash}");
        out.push_str("step,loss,A,B,grad_norm,recovery_error,pl_ratio,batch_loss");
        for b in 1..=bins {
            let _ = write!(out, ",bin{b}_loss");
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(
                out,
                "{},{:?},{:?},{:?},{:?},{:?},{},{}",
                r.step,
                r.loss,
                r.a,
                r.b,
                r.grad_norm,
                r.recovery_error,
                opt(r.pl_ratio),
                opt(r.batch_loss)
            );
            for l in &r.bin_losses {
                let _ = write!(out, ",{l:?}");
            }
            out.push('\n');
        }
        out
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// What to log while simulating.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryOptions {
    /// Record every `log_every` steps (0 or 1 logs every step).
    pub log_every: u64,
    /// Store the parameter vector every `checkpoint_every` steps (0 disables).
    pub checkpoint_every: u64,
    pub loss_thresholds: Vec<f64>,
    pub recovery_thresholds: Vec<f64>,
    /// Stop once the loss is at most this value...
    pub stop_loss: Option<f64>,
    /// ...and the recovery error at most this value (both when both are set).
    pub stop_recovery: Option<f64>,
    /// Skill bins whose restricted losses are logged.
    pub bins: Option<Vec<Vec<usize>>>,
}

impl TrajectoryOptions {
    pub(crate) fn should_log(&self, step: u64) -> bool {
        self.log_every <= 1 || step % self.log_every == 0
    }

    pub(crate) fn should_checkpoint(&self, step: u64) -> bool {
        self.checkpoint_every > 0 && step % self.checkpoint_every == 0
    }

    pub(crate) fn should_stop(&self, loss: f64, recovery: f64) -> bool {
        match (self.stop_loss, self.stop_recovery) {
            (None, None) => false,
            (l, r) => l.is_none_or(|t| loss <= t) && r.is_none_or(|t| recovery <= t),
        }
    }

    pub(crate) fn crossings(&self) -> (Vec<Crossing>, Vec<Crossing>) {
        let mk = |v: &[f64]| v.iter().map(|&threshold| Crossing { threshold, step: None }).collect();
        (mk(&self.loss_thresholds), mk(&self.recovery_thresholds))
    }
}
