//! Minibatch SGD runs logged in the same format as population trajectories.

use rand::Rng;

use crate::composition::{ModelState, SgdTrainer};
use crate::error::Result;
use crate::population::{point_stats, restricted_population_loss, PointStats};
use crate::trajectory::{Checkpoint, Crossing, TrajectoryLog, TrajectoryOptions, TrajectoryRecord};

fn record(step: u64, s: PointStats, batch_loss: Option<f64>, bin_losses: Vec<f64>) -> TrajectoryRecord {
    TrajectoryRecord {
        step,
        loss: s.loss,
        a: s.a,
        b: s.b,
        grad_norm: s.grad_norm,
        recovery_error: s.recovery_error,
        pl_ratio: s.pl_ratio,
        batch_loss,
        bin_losses,
    }
}

/// Runs `steps` minibatch updates on `state`.
///
/// Population statistics are evaluated only at logged steps, unless crossing
/// thresholds or a stop rule need them every step.
pub fn run_sgd<R: Rng + ?Sized>(
    trainer: &mut SgdTrainer<'_>,
    state: &mut ModelState,
    steps: u64,
    opts: &TrajectoryOptions,
    rng: &mut R,
) -> Result<TrajectoryLog> {
    let wstar = trainer.wstar.as_slice();
    let p = trainer.dist.weights();
    let k = trainer.k;
    let bins = |w: &[f64]| -> Result<Vec<f64>> {
        match &opts.bins {
            Some(b) => b.iter().map(|s| restricted_population_loss(w, wstar, p, k, s)).collect(),
            None => Ok(Vec::new()),
        }
    };
    let every_step = !opts.loss_thresholds.is_empty()
        || !opts.recovery_thresholds.is_empty()
        || opts.stop_loss.is_some()
        || opts.stop_recovery.is_some();

    let (mut loss_crossings, mut recovery_crossings) = opts.crossings();
    let s0 = point_stats(&state.w, wstar, p, k);
    Crossing::observe(&mut loss_crossings, 0, s0.loss);
    Crossing::observe(&mut recovery_crossings, 0, s0.recovery_error);
    let initial = record(0, s0, None, bins(&state.w)?);
    let mut checkpoints = Vec::new();
    if opts.checkpoint_every > 0 {
        checkpoints.push(Checkpoint { step: 0, w: state.w.clone() });
    }
    let mut records = Vec::new();
    let mut stopped_early = opts.should_stop(s0.loss, s0.recovery_error);
    let mut t = 0;
    while t < steps && !stopped_early {
        let batch_loss = trainer.step(state, rng)?;
        t += 1;
        let last = t == steps;
        let log_now = last || opts.should_log(t);
        if log_now || every_step {
            let s = point_stats(&state.w, wstar, p, k);
            Crossing::observe(&mut loss_crossings, t, s.loss);
            Crossing::observe(&mut recovery_crossings, t, s.recovery_error);
            stopped_early = !last && opts.should_stop(s.loss, s.recovery_error);
            if log_now || stopped_early {
                records.push(record(t, s, Some(batch_loss), bins(&state.w)?));
            }
        }
        if opts.should_checkpoint(t) || ((last || stopped_early) && opts.checkpoint_every > 0) {
            checkpoints.push(Checkpoint { step: t, w: state.w.clone() });
        }
    }
    Ok(TrajectoryLog {
        initial,
        records,
        checkpoints,
        loss_crossings,
        recovery_crossings,
        final_w: state.w.clone(),
        final_step: t,
        stopped_early,
    })
}
