//! Insertion processes on the torus: 1-choice, the online 2-choice rule g
//! and its coupled uniform sequence, hitting-time tracking, and the time
//! scales that drive the experiments.

mod formulas;
mod hitting;
mod one_choice;
mod online;

pub use formulas::{time_formulas, TimeFormulas};
pub use hitting::{HittingRecord, HittingTracker};
pub use one_choice::{checkpoint_times, run_one_choice, OneChoiceRun, StopRule, POINT_CAP};
pub use online::{
    coupled_y_sequence, run_online, y_hitting_time, CoupledY, OnlineConfig, OnlineMode, OnlineRun,
};

use rand_chacha::ChaCha8Rng;

use crate::geometry::{fill_uniform, trial_rng, TorusPoint};

/// Stream id offset for auxiliary randomness (e.g. Bernoulli routing),
/// keeping it disjoint from the point streams.
pub const AUX_STREAM: u64 = 1 << 63;

/// I.i.d. uniform points X_1, X_2, …; pair i (1-based) is (X_{2i−1}, X_{2i}).
#[derive(Debug, Clone)]
pub struct PairStream {
    rng: ChaCha8Rng,
    d: usize,
    next_index: usize,
}

impl PairStream {
    pub fn new(d: usize, master_seed: u64, stream: u64) -> Self {
        Self {
            rng: trial_rng(master_seed, stream),
            d,
            next_index: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of points emitted so far.
    pub fn next_index(&self) -> usize {
        self.next_index
    }

    /// Writes the next point into `out` (length d).
    pub fn next_into(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.d);
        fill_uniform(&mut self.rng, out);
        self.next_index += 1;
    }

    pub fn next_point(&mut self) -> TorusPoint {
        let mut c = vec![0.0; self.d];
        self.next_into(&mut c);
        TorusPoint::new(&c).expect("uniform coordinates are canonical")
    }

    /// The next partner pair; the stream must be at an even index.
    pub fn next_pair(&mut self) -> (TorusPoint, TorusPoint) {
        debug_assert!(self.next_index % 2 == 0, "pair requested mid-pair");
        (self.next_point(), self.next_point())
    }
}
