//! Fast invariant checks run by `bfpdcch selftest`.

use std::collections::BTreeMap;

use rand::Rng;

use crate::abstraction::{AlDecision, AlThresholdTable};
use crate::beam::{array_factor, radiation_pattern, BeamSet, UraConfig};
use crate::campaign::{simulate_campaign, with_threads, CampaignConfig};
use crate::control::{
    candidate_indices, AggregationLevel, CceGrid, SearchSpaceParams, CSS_SIZE, DCI_PAYLOAD_BITS,
};
use crate::link::{decode_dci, encode_dci, qpsk_soft_demod, RateMatcher};
use crate::rng;
use crate::sched::{
    legacy_count, pack_exact, schedule_optimal, Classification, Item, QueuePolicy, UserSchedState,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, failures: usize, of: usize) -> Check {
    Check {
        name,
        passed: failures == 0,
        detail: format!("{failures} failures in {of} cases"),
    }
}

fn search_space(seed: u64) -> Check {
    let mut r = rng::stream(seed, &[1]);
    let n = 2000;
    let mut bad = 0;
    for _ in 0..n {
        let y: u64 = r.random_range(0..65_537);
        let m: u64 = r.random_range(0..6);
        let al = AggregationLevel::ALL[r.random_range(0..4)];
        let n_cce = r.random_range(al.cces()..=128);
        // the block index k is the one leaving a whole number of laps
        let blocks = (n_cce / al.cces()) as u64;
        let k = (0..blocks)
            .find(|&k| ((y + m - k) / blocks) * blocks == y + m - k)
            .expect("some block") as usize;
        let expect = k * al.cces()..k * al.cces() + al.cces();
        if candidate_indices(y, m, al, n_cce).ok() != Some(expect) {
            bad += 1;
        }
    }
    let mut grid = CceGrid::new(42, 8);
    for al in [
        AggregationLevel::L8,
        AggregationLevel::L4,
        AggregationLevel::L4,
    ] {
        let req = crate::control::DciRequest::common(al, 8);
        match grid.place(&req, &SearchSpaceParams::common()) {
            Ok(out) => {
                if out.placed().is_some_and(|p| p.cces().end > CSS_SIZE) {
                    bad += 1;
                }
            }
            Err(_) => bad += 1,
        }
    }
    check("search space candidates", bad, n + 3)
}

fn link_round_trip(seed: u64) -> Check {
    let mut r = rng::stream(seed, &[2]);
    let matcher = RateMatcher::default();
    let mut bad = 0;
    let per_al = 100;
    for al in AggregationLevel::ALL {
        for _ in 0..per_al {
            let payload: Vec<u8> = (0..DCI_PAYLOAD_BITS)
                .map(|_| r.random_range(0..2u8))
                .collect();
            let ok = encode_dci(&matcher, &payload, al)
                .ok()
                .and_then(|s| decode_dci(&matcher, &qpsk_soft_demod(&s, 1.0)))
                .is_some_and(|p| p == payload);
            bad += usize::from(!ok);
        }
    }
    check("noiseless link round trip", bad, 4 * per_al)
}

fn beams() -> Check {
    let mut bad = 0;
    let set = BeamSet::sector_grid(1.0).expect("paper grid");
    bad += usize::from((set.total_power() - 1.0).abs() > 1e-9);
    let cfg = set.array;
    for b in &set.beams {
        let af = array_factor(
            &cfg,
            b.phase_y,
            b.phase_z,
            b.direction.azimuth,
            b.direction.elevation,
        );
        bad += usize::from((af.norm() - (cfg.rows * cfg.cols) as f64).abs() > 1e-9);
    }
    let fan = BeamSet::six_beam_fan(UraConfig::paper_panel(), 1.0).expect("fan");
    let grid: Vec<f64> = (0..=1800)
        .map(|i| -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * i as f64 / 1800.0)
        .collect();
    let pats = radiation_pattern(&fan, &grid, std::f64::consts::FRAC_PI_2).expect("pattern");
    bad += pats
        .iter()
        .filter(|p| p.peak_side_lobe_db().is_none_or(|s| s > -10.0))
        .count();
    check(
        "beam power, peak gain and side lobes",
        bad,
        1 + set.len() + pats.len(),
    )
}

fn legacy_user(id: u32, al: AggregationLevel) -> UserSchedState {
    let d = AlDecision::Level(al);
    UserSchedState {
        user_id: id,
        al_legacy: d,
        al_one_beam: d,
        al_two_beam: d,
        al_all_beams: d,
        classification: Classification::AllBeamUss1,
        best_beam: 1,
        best_pair: None,
    }
}

fn optimal_scheduler(seed: u64) -> Check {
    let mut r = rng::stream(seed, &[3]);
    let n = 300;
    let mut bad = 0;
    for _ in 0..n {
        let n_cce = r.random_range(8..=16);
        let tti = r.random_range(0..10);
        let users: Vec<UserSchedState> = (0..r.random_range(1..=6))
            .map(|_| {
                let al = AggregationLevel::ALL[r.random_range(0..4)];
                legacy_user(r.random_range(0..1000), al)
            })
            .collect();
        let refs: Vec<&UserSchedState> = users.iter().collect();
        let items: Vec<Item> = users
            .iter()
            .map(|u| {
                let al = u.al_legacy.level().expect("level");
                let ss = SearchSpaceParams::for_user(u.user_id, tti);
                let starts: Vec<usize> = (0..ss.candidates[&al] as u64)
                    .map(|m| candidate_indices(ss.y_k, m, al, n_cce).expect("fits").start)
                    .collect();
                Item::new(al.cces(), &starts)
            })
            .collect();
        let exact = pack_exact(&items, 0).iter().flatten().count();
        let mut grid = CceGrid::new(n_cce, 1);
        let policy = QueuePolicy::SkipBlocked;
        let blocked = schedule_optimal(&refs, &mut grid, policy, tti).map(|b| b.len());
        let legacy = legacy_count(&refs, &CceGrid::new(n_cce, 1), policy, tti);
        match (blocked, legacy) {
            (Ok(_), Ok(l)) => {
                let got = grid.placements().len();
                bad += usize::from(got != exact || got < l);
            }
            _ => bad += 1,
        }
    }
    check("optimal scheduler against exact packing", bad, n)
}

fn thread_invariance(seed: u64) -> Check {
    use AggregationLevel::*;
    let table = AlThresholdTable::new(
        BTreeMap::from([(L1, 4.3), (L2, 0.5), (L4, -2.6), (L8, -5.7)]),
        "selftest",
    );
    let cfg = CampaignConfig {
        n_drops: 3,
        n_tti: 20,
        users_per_sector: 40,
        ..CampaignConfig::from_profile("quick", seed).expect("quick profile")
    };
    let runs: Vec<_> = [1, 3]
        .iter()
        .map(|&t| with_threads(t, || simulate_campaign(&cfg, &table)))
        .collect();
    let same = match (&runs[0], &runs[1]) {
        (Ok(Ok(a)), Ok(Ok(b))) => a == b,
        _ => false,
    };
    check("thread-count invariance", usize::from(!same), 1)
}

pub fn run(seed: u64) -> Vec<Check> {
    vec![
        search_space(seed),
        link_round_trip(seed),
        beams(),
        optimal_scheduler(seed),
        thread_invariance(seed),
    ]
}
