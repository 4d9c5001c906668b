//! Per-user SINR for one-beam, two-beam, all-beam and legacy transmission.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{channel_sample, drop_sector_users, ChannelModel, NetworkLayout, User};
use crate::beam::BeamSet;
use crate::control::UserId;
use crate::error::Result;
use crate::units::linear_to_db;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrReport {
    pub user_id: UserId,
    /// 1-based.
    pub best_beam: usize,
    pub sinr_one_beam_db: f64,
    /// 1-based adjacent pair; `None` with a single beam.
    pub best_pair: Option<(usize, usize)>,
    /// `-inf` with a single beam.
    pub sinr_two_beam_db: f64,
    pub sinr_all_beams_db: f64,
    pub legacy_sinr_db: f64,
}

fn argmax(v: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    // first index wins ties
    v.enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, x)| match best {
            Some((_, b)) if b >= x => best,
            _ => Some((i, x)),
        })
}

/// What one receive antenna sees: the beam gains `g_k = h·w_k` of the
/// serving sector and the other-sector interference power.
#[derive(Debug, Clone, PartialEq)]
pub struct RxBranch {
    pub gains: Vec<Complex64>,
    pub i_wrap: f64,
}

/// Evaluate the three beamformed SINRs. Per branch:
///
/// * one beam `j`: `|g_j|^2 / (I + 2 |sum_{k != j} g_k|^2 + n)`
/// * pair `j, j+1`: `|g_j + g_{j+1}|^2 / (I + 2 |sum_{k not in pair} g_k|^2 + n)`
/// * all beams: `|sum_k g_k|^2 / (I + n)`
///
/// The leak term is doubled because the shared reference signal corrupts
/// the channel estimate as well as the data. Branches are combined by MRC,
/// i.e. their SINRs add; beam and pair choices maximize the combined value.
pub fn compute_sinr_report(
    user_id: UserId,
    branches: &[RxBranch],
    noise_var: f64,
    legacy_sinr: f64,
) -> SinrReport {
    assert!(!branches.is_empty(), "at least one receive branch");
    let p = branches[0].gains.len();
    assert!(p > 0, "at least one beam");
    let totals: Vec<Complex64> = branches.iter().map(|b| b.gains.iter().sum()).collect();
    let combined = |signal: &dyn Fn(&[Complex64]) -> Complex64| -> f64 {
        branches
            .iter()
            .zip(&totals)
            .map(|(b, total)| {
                let s = signal(&b.gains);
                s.norm_sqr() / (b.i_wrap + noise_var + 2.0 * (total - s).norm_sqr())
            })
            .sum()
    };
    let (j, s1) = argmax((0..p).map(|j| combined(&|g| g[j]))).expect("non-empty");
    let (pair, s2) = match argmax((0..p.saturating_sub(1)).map(|j| combined(&|g| g[j] + g[j + 1])))
    {
        Some((j, s)) => (Some((j + 1, j + 2)), s),
        None => (None, 0.0),
    };
    let all: f64 = branches
        .iter()
        .zip(&totals)
        .map(|(b, t)| t.norm_sqr() / (b.i_wrap + noise_var))
        .sum();
    SinrReport {
        user_id,
        best_beam: j + 1,
        sinr_one_beam_db: linear_to_db(s1),
        best_pair: pair,
        sinr_two_beam_db: linear_to_db(s2),
        sinr_all_beams_db: linear_to_db(all),
        legacy_sinr_db: linear_to_db(legacy_sinr),
    }
}

/// Other-sector interference on a user, beamformed and legacy, per
/// receive antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct WrapInterference {
    /// Every interfering sector radiates all of its beams.
    pub beamformed: Vec<f64>,
    /// Every interfering sector radiates full power through its sector
    /// antenna.
    pub legacy: Vec<f64>,
}

/// Sum of received power from all sectors except the serving one, each at
/// its nearest wrap image.
pub fn wraparound_interference(
    user: &User,
    layout: &NetworkLayout,
    model: &ChannelModel,
    beams: &BeamSet,
    seed: u64,
) -> WrapInterference {
    let tx = layout.tx_power_mw();
    let rx = model.ue_antennas.max(1);
    let mut out = WrapInterference {
        beamformed: vec![0.0; rx],
        legacy: vec![0.0; rx],
    };
    for s in (0..layout.sector_count()).filter(|&s| s != user.serving_sector) {
        let link = &user.links[layout.sector_site(s)];
        let c = channel_sample(
            layout,
            model,
            &beams.array,
            user.position,
            link,
            user.id,
            s,
            seed,
        );
        for r in 0..rx {
            out.beamformed[r] += beams
                .project(&c.h[r])
                .iter()
                .map(|g| g.norm_sqr())
                .sum::<f64>();
            out.legacy[r] += tx * c.legacy[r].norm_sqr();
        }
    }
    out
}

/// SINR report of one attached user.
pub fn user_report(
    user: &User,
    layout: &NetworkLayout,
    model: &ChannelModel,
    beams: &BeamSet,
    seed: u64,
) -> SinrReport {
    let link = &user.links[layout.sector_site(user.serving_sector)];
    let serving = channel_sample(
        layout,
        model,
        &beams.array,
        user.position,
        link,
        user.id,
        user.serving_sector,
        seed,
    );
    let wrap = wraparound_interference(user, layout, model, beams, seed);
    let noise = layout.noise_power_mw();
    let tx = layout.tx_power_mw();
    let legacy: f64 = serving
        .legacy
        .iter()
        .zip(&wrap.legacy)
        .map(|(h, i)| tx * h.norm_sqr() / (i + noise))
        .sum();
    let branches: Vec<RxBranch> = serving
        .h
        .iter()
        .zip(&wrap.beamformed)
        .map(|(h, &i_wrap)| RxBranch {
            gains: beams.project(h),
            i_wrap,
        })
        .collect();
    compute_sinr_report(user.id, &branches, noise, legacy)
}

/// Drop `n_users` into the reference sector (sector 0) and report each.
/// Beam budgets are in mW, so `beams.budget` should equal the sector's
/// transmit power.
pub fn simulate_drop(
    layout: &NetworkLayout,
    model: &ChannelModel,
    beams: &BeamSet,
    n_users: usize,
    seed: u64,
) -> Result<Vec<SinrReport>> {
    let drop = drop_sector_users(n_users, 0, layout, model, seed)?;
    Ok(drop
        .users
        .par_iter()
        .map(|u| user_report(u, layout, model, beams, seed))
        .collect())
}

pub const SINR_CSV_HEADER: &str = "user_id,best_beam,sinr1_db,sinr2_db,sinr_all_db,legacy_db";

pub fn write_sinr_csv<W: Write>(mut out: W, reports: &[SinrReport]) -> std::io::Result<()> {
    writeln!(out, "{SINR_CSV_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            r.user_id,
            r.best_beam,
            r.sinr_one_beam_db,
            r.sinr_two_beam_db,
            r.sinr_all_beams_db,
            r.legacy_sinr_db
        )?;
    }
    Ok(())
}
