use super::{RoundEvent, RunObserver, SyncEvent, TrialEvent};

/// Observer that keeps every event, in order.
#[derive(Debug, Clone, Default)]
pub struct Recorder {
    pub trials: Vec<TrialEvent>,
    pub syncs: Vec<SyncEvent>,
    pub rounds: Vec<RoundEvent>,
    skip_trials: bool,
}

impl Recorder {
    /// Records syncs and rounds only; long runs emit far too many trials to keep.
    pub fn without_trials() -> Self {
        Recorder {
            skip_trials: true,
            ..Recorder::default()
        }
    }

    /// `(localcost, newlocalcost)` of every evaluated pair, in trial then worker order.
    pub fn local_cost_pairs(&self) -> Vec<(i64, i64)> {
        self.trials
            .iter()
            .map(|t| (t.local_cost, t.new_local_cost))
            .collect()
    }
}

impl RunObserver for Recorder {
    fn on_trial(&mut self, event: &TrialEvent) {
        if !self.skip_trials {
            self.trials.push(event.clone());
        }
    }

    fn on_sync(&mut self, event: &SyncEvent) {
        self.syncs.push(event.clone());
    }

    fn on_round(&mut self, event: &RoundEvent) {
        self.rounds.push(event.clone());
    }
}
