//! Fixtures shared by the criterion benches.

use std::collections::BTreeMap;

use bfpdcch_core::abstraction::AlThresholdTable;
use bfpdcch_core::deployment::{simulate_drop, ChannelModel, NetworkLayout};
use bfpdcch_core::sched::{classify_user, UserSchedState};
use bfpdcch_core::{AggregationLevel, BeamSet};

/// A fixed threshold table close to the one the AWGN link chain produces.
pub fn thresholds() -> AlThresholdTable {
    use AggregationLevel::*;
    AlThresholdTable::new(
        BTreeMap::from([(L1, 4.3), (L2, 0.5), (L4, -2.6), (L8, -5.7)]),
        "bench",
    )
}

/// Classified users of one paper-layout drop.
pub fn population(n_users: usize, seed: u64) -> Vec<UserSchedState> {
    let layout = NetworkLayout::paper();
    let beams = BeamSet::sector_grid(layout.tx_power_mw()).expect("paper grid");
    let table = thresholds();
    simulate_drop(&layout, &ChannelModel::default(), &beams, n_users, seed)
        .expect("valid drop")
        .iter()
        .map(|r| classify_user(r, &table))
        .collect()
}
