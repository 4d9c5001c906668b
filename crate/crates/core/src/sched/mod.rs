//! The four compared control-channel schedulers and the multi-TTI loop.
//!
//! Every scheme works on a FIFO queue of users with full-buffer demand.
//! Each TTI the queue is walked in order until the control region is
//! exhausted. By default a user that cannot be placed is skipped and the
//! walk goes on ([`QueuePolicy`]). Scheduled users move to the back of the queue,
//! everyone else keeps their place, so a blocked user is tried again before
//! anyone behind them.

mod optimal;
mod place;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::abstraction::{AlDecision, AlThresholdTable};
use crate::control::{
    write_placement_log, AggregationLevel, CceGrid, DciPlacement, DciRequest, UserId,
};
use crate::deployment::SinrReport;
use crate::error::{Error, Result};

pub use optimal::{
    legacy_count, pack_all, pack_exact, pack_heuristic, schedule_optimal, score, Assignment, Item,
    EXACT_LIMIT, PACK_NODE_BUDGET,
};
pub use place::{schedule_bf_pdcch, schedule_epdcch, schedule_legacy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Legacy,
    Optimal,
    Epdcch,
    BfPdcch,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Self::Legacy, Self::Optimal, Self::Epdcch, Self::BfPdcch];

    pub fn name(self) -> &'static str {
        match self {
            Self::Legacy => "legacy",
            Self::Optimal => "optimal",
            Self::Epdcch => "epdcch",
            Self::BfPdcch => "bf_pdcch",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

/// How a user is served by BF-PDCCH.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    /// USS-2 in the best beam.
    OneBeamUss2,
    /// USS-2 in the best adjacent pair.
    TwoBeamUss2,
    /// USS-1 replicated in every beam.
    AllBeamUss1,
    /// Not reachable even with all beams.
    Outage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSchedState {
    pub user_id: UserId,
    pub al_legacy: AlDecision,
    pub al_one_beam: AlDecision,
    pub al_two_beam: AlDecision,
    pub al_all_beams: AlDecision,
    pub classification: Classification,
    /// 1-based.
    pub best_beam: usize,
    pub best_pair: Option<(usize, usize)>,
}

impl UserSchedState {
    /// Aggregation level and beams of the user's BF-PDCCH DCI.
    pub fn bf_request(&self, beam_count: usize) -> Option<DciRequest> {
        let lvl = |d: AlDecision| d.level().expect("classified level");
        match self.classification {
            Classification::OneBeamUss2 => Some(DciRequest::beamformed(
                self.user_id,
                lvl(self.al_one_beam),
                &[self.best_beam],
            )),
            Classification::TwoBeamUss2 => {
                let (a, b) = self.best_pair.expect("pair for two-beam user");
                Some(DciRequest::beamformed(
                    self.user_id,
                    lvl(self.al_two_beam),
                    &[a, b],
                ))
            }
            Classification::AllBeamUss1 => Some(DciRequest::all_beams(
                self.user_id,
                lvl(self.al_all_beams),
                beam_count,
            )),
            Classification::Outage => None,
        }
    }
}

/// Gate of the BF-PDCCH flow: a beamformed USS-2 DCI is used only when the
/// SINR is strictly above the AL4 threshold, so USS-2 never needs AL8.
pub fn classify_user(report: &SinrReport, table: &AlThresholdTable) -> UserSchedState {
    let gate = table.threshold(AggregationLevel::L4);
    let passes = |sinr: f64| gate.is_some_and(|t| sinr > t);
    let al_one_beam = table.sinr_to_al(report.sinr_one_beam_db);
    let al_two_beam = table.sinr_to_al(report.sinr_two_beam_db);
    let al_all_beams = table.sinr_to_al(report.sinr_all_beams_db);
    let classification = if passes(report.sinr_one_beam_db) {
        Classification::OneBeamUss2
    } else if report.best_pair.is_some() && passes(report.sinr_two_beam_db) {
        Classification::TwoBeamUss2
    } else if al_all_beams != AlDecision::Outage {
        Classification::AllBeamUss1
    } else {
        Classification::Outage
    };
    UserSchedState {
        user_id: report.user_id,
        al_legacy: table.sinr_to_al(report.legacy_sinr_db),
        al_one_beam,
        al_two_beam,
        al_all_beams,
        classification,
        best_beam: report.best_beam,
        best_pair: report.best_pair,
    }
}

/// Common DCIs sent every TTI, placed before any user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CssLoad {
    pub levels: Vec<AggregationLevel>,
}

impl Default for CssLoad {
    fn default() -> Self {
        Self {
            levels: vec![AggregationLevel::L8, AggregationLevel::L4],
        }
    }
}

impl CssLoad {
    pub fn none() -> Self {
        Self { levels: Vec::new() }
    }
}

/// EPDCCH region carved from the data channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpdcchConfig {
    pub prbs: usize,
    pub ecces_per_prb: usize,
    /// Users that may share one ECCE block through MU-MIMO.
    pub layers: usize,
}

impl Default for EpdcchConfig {
    fn default() -> Self {
        Self {
            prbs: 4,
            ecces_per_prb: 4,
            layers: 4,
        }
    }
}

impl EpdcchConfig {
    pub fn ecces(&self) -> usize {
        self.prbs * self.ecces_per_prb
    }

    pub fn validate(&self) -> Result<()> {
        if ![0, 2, 4, 8].contains(&self.prbs) {
            return Err(Error::Config(format!(
                "EPDCCH PRBs must be 0, 2, 4 or 8, got {}",
                self.prbs
            )));
        }
        if self.ecces_per_prb == 0 || self.layers == 0 {
            return Err(Error::Config(
                "EPDCCH ECCEs per PRB and layers must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// What a scheduler does when a user cannot be placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueuePolicy {
    /// Users are taken from the front of the queue while their CCE demand
    /// still fits the free CCEs of their rows; only that set is placed.
    Admission,
    /// Every user is tried until the grid is full; blocked users are
    /// skipped.
    #[default]
    SkipBlocked,
    /// The TTI ends at the first blocked user.
    HeadOfLine,
}

impl QueuePolicy {
    pub const ALL: [QueuePolicy; 3] = [Self::Admission, Self::SkipBlocked, Self::HeadOfLine];

    pub fn name(self) -> &'static str {
        match self {
            Self::Admission => "admission",
            Self::SkipBlocked => "skip_blocked",
            Self::HeadOfLine => "head_of_line",
        }
    }
}

impl FromStr for QueuePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown queue policy `{s}`")))
    }
}

/// Resources shared by all schemes of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedParams {
    pub n_cce: usize,
    pub beams: usize,
    pub css: CssLoad,
    pub epdcch: EpdcchConfig,
    pub policy: QueuePolicy,
}

impl SchedParams {
    /// CCEs (plus ECCEs for EPDCCH) that users-per-CCE is normalized by.
    pub fn denominator(&self, scheme: Scheme) -> usize {
        match scheme {
            Scheme::Epdcch => self.n_cce + self.epdcch.ecces(),
            _ => self.n_cce,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cce == 0 || self.beams == 0 {
            return Err(Error::Config("need at least one CCE and one beam".into()));
        }
        self.epdcch.validate()
    }
}

/// Outcome of one TTI for one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtiResult {
    pub scheme: Scheme,
    pub tti: u64,
    /// User DCIs on the PDCCH grid.
    pub placements: Vec<DciPlacement>,
    /// User DCIs in the EPDCCH region; the beam field holds the layer.
    pub ecce_placements: Vec<DciPlacement>,
    pub common: Vec<DciPlacement>,
    /// Tried this TTI but not placed.
    pub blocked: Vec<UserId>,
    /// CCE indices occupied in at least one beam row, plus ECCE indices
    /// occupied in at least one layer.
    pub cce_used: usize,
    pub users_scheduled: usize,
}

impl TtiResult {
    fn new(scheme: Scheme, tti: u64) -> Self {
        Self {
            scheme,
            tti,
            placements: Vec::new(),
            ecce_placements: Vec::new(),
            common: Vec::new(),
            blocked: Vec::new(),
            cce_used: 0,
            users_scheduled: 0,
        }
    }

    fn finish(mut self, grid: &CceGrid, ecce: Option<&CceGrid>) -> Self {
        self.common = grid
            .placements()
            .iter()
            .filter(|p| p.request.user_id.is_none())
            .cloned()
            .collect();
        self.placements = grid
            .placements()
            .iter()
            .filter(|p| p.request.user_id.is_some())
            .cloned()
            .collect();
        if let Some(e) = ecce {
            self.ecce_placements = e.placements().to_vec();
        }
        self.cce_used = grid.used_any() + ecce.map_or(0, CceGrid::used_any);
        self.users_scheduled = self.placements.len() + self.ecce_placements.len();
        self
    }

    pub fn scheduled_users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.placements
            .iter()
            .chain(&self.ecce_placements)
            .filter_map(|p| p.request.user_id)
    }

    /// Aggregation levels of the user DCIs actually sent.
    pub fn levels(&self) -> impl Iterator<Item = AggregationLevel> + '_ {
        self.placements
            .iter()
            .chain(&self.ecce_placements)
            .map(|p| p.request.al)
    }

    pub fn write_log<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write_placement_log(out, self.scheme.name(), self.tti, &self.common)?;
        write_placement_log(out, self.scheme.name(), self.tti, &self.placements)?;
        let tag = format!("{}-ecce", self.scheme.name());
        write_placement_log(out, &tag, self.tti, &self.ecce_placements)
    }
}

/// Grid with this TTI's common DCIs already placed.
pub fn grid_with_common(n_cce: usize, beams: usize, css: &CssLoad) -> Result<CceGrid> {
    let mut grid = CceGrid::new(n_cce, beams);
    let params = crate::control::SearchSpaceParams::common();
    for &al in &css.levels {
        // a common DCI that does not fit is simply not sent
        grid.place(&DciRequest::common(al, beams), &params)?;
    }
    Ok(grid)
}

/// Scan `queue` in order and keep every user whose cost still fits the
/// per-row budget. Stops early once every row is exhausted.
fn admit<'a>(
    queue: &[&'a UserSchedState],
    budget: &mut [usize],
    cost: impl Fn(&UserSchedState) -> Option<(AggregationLevel, Vec<usize>)>,
) -> Vec<&'a UserSchedState> {
    let mut out = Vec::new();
    for &u in queue {
        if budget.iter().all(|&b| b == 0) {
            break;
        }
        let Some((al, rows)) = cost(u) else { continue };
        if rows.iter().all(|&r| budget[r - 1] >= al.cces()) {
            for &r in &rows {
                budget[r - 1] -= al.cces();
            }
            out.push(u);
        }
    }
    out
}

/// Users a scheme takes on this TTI under [`QueuePolicy::Admission`], in
/// queue order. Budgets are the CCEs left free by the common DCIs in each
/// beam row; EPDCCH has a second budget of ECCEs times layers.
pub fn admitted<'a>(
    scheme: Scheme,
    queue: &[&'a UserSchedState],
    grid: &CceGrid,
    params: &SchedParams,
) -> Vec<&'a UserSchedState> {
    let mut budget: Vec<usize> = (1..=grid.beams())
        .map(|b| grid.n_cce() - grid.used(b))
        .collect();
    match scheme {
        Scheme::Legacy | Scheme::Optimal => admit(queue, &mut budget, |u| {
            u.al_legacy.level().map(|al| (al, vec![1]))
        }),
        Scheme::BfPdcch => admit(queue, &mut budget, |u| {
            u.bf_request(params.beams).map(|r| (r.al, r.beams))
        }),
        Scheme::Epdcch => {
            let n_ecce = params.epdcch.ecces();
            let mut budget = [budget[0], n_ecce * params.epdcch.layers];
            let mut out = Vec::new();
            for &u in queue {
                if budget.iter().all(|&b| b == 0) {
                    break;
                }
                let e = u.al_one_beam.level().filter(|al| al.cces() <= n_ecce);
                if let Some(al) = e.filter(|al| al.cces() <= budget[1]) {
                    budget[1] -= al.cces();
                    out.push(u);
                } else if let Some(al) = u.al_legacy.level().filter(|al| al.cces() <= budget[0]) {
                    budget[0] -= al.cces();
                    out.push(u);
                }
            }
            out
        }
    }
}

/// One TTI of `scheme` on the users at the front of `queue`.
pub fn schedule_tti(
    scheme: Scheme,
    queue: &[&UserSchedState],
    params: &SchedParams,
    tti: u64,
) -> Result<TtiResult> {
    let rows = if scheme == Scheme::BfPdcch {
        params.beams
    } else {
        1
    };
    let mut grid = grid_with_common(params.n_cce, rows, &params.css)?;
    let taken;
    let queue = if params.policy == QueuePolicy::Admission {
        taken = admitted(scheme, queue, &grid, params);
        &taken[..]
    } else {
        queue
    };
    let (ecce, blocked) = match scheme {
        Scheme::Legacy => (None, schedule_legacy(queue, &mut grid, params.policy, tti)?),
        Scheme::Optimal => (
            None,
            schedule_optimal(queue, &mut grid, params.policy, tti)?,
        ),
        Scheme::BfPdcch => (
            None,
            schedule_bf_pdcch(queue, &mut grid, params.policy, tti)?,
        ),
        Scheme::Epdcch => {
            let (e, b) = schedule_epdcch(queue, &mut grid, &params.epdcch, params.policy, tti)?;
            (Some(e), b)
        }
    };
    let mut res = TtiResult::new(scheme, tti).finish(&grid, ecce.as_ref());
    res.blocked = blocked;
    Ok(res)
}

/// Whether the scheme can ever serve the user.
pub fn servable(scheme: Scheme, u: &UserSchedState, params: &SchedParams) -> bool {
    let ecces = params.epdcch.ecces();
    match scheme {
        Scheme::Legacy | Scheme::Optimal => u.al_legacy != AlDecision::Outage,
        Scheme::Epdcch => {
            u.al_legacy != AlDecision::Outage
                || u.al_one_beam.level().is_some_and(|al| al.cces() <= ecces)
        }
        Scheme::BfPdcch => u.classification != Classification::Outage,
    }
}

/// Run `n_tti` TTIs with full-buffer demand. Users the scheme cannot serve
/// never enter the queue and are counted in `outage`.
pub fn run_multi_tti(
    users: &[UserSchedState],
    scheme: Scheme,
    params: &SchedParams,
    n_tti: u64,
) -> Result<MultiTtiRun> {
    params.validate()?;
    let mut sorted: Vec<&UserSchedState> = users.iter().collect();
    sorted.sort_by_key(|u| u.user_id);
    let (queue, out): (Vec<_>, Vec<_>) = sorted
        .into_iter()
        .partition(|u| servable(scheme, u, params));
    let mut queue = VecDeque::from(queue);
    let mut ttis = Vec::with_capacity(n_tti as usize);
    for t in 0..n_tti {
        let view: Vec<&UserSchedState> = queue.iter().copied().collect();
        let res = schedule_tti(scheme, &view, params, t)?;
        let done: Vec<UserId> = res.scheduled_users().collect();
        let (served, waiting): (Vec<_>, Vec<_>) =
            queue.drain(..).partition(|u| done.contains(&u.user_id));
        queue.extend(waiting);
        queue.extend(served);
        ttis.push(res);
    }
    Ok(MultiTtiRun {
        scheme,
        ttis,
        outage: out.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiTtiRun {
    pub scheme: Scheme,
    pub ttis: Vec<TtiResult>,
    pub outage: usize,
}

/// What the summaries need from one run, without the placements.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTally {
    pub users_per_tti: Vec<usize>,
    /// DCIs sent per aggregation level, indexed like [`AggregationLevel::ALL`].
    pub al_counts: [usize; 4],
    pub outage: usize,
}

impl RunTally {
    pub fn of(run: &MultiTtiRun) -> Self {
        let mut al_counts = [0; 4];
        for al in run.ttis.iter().flat_map(TtiResult::levels) {
            al_counts[al.index()] += 1;
        }
        Self {
            users_per_tti: run.ttis.iter().map(|t| t.users_scheduled).collect(),
            al_counts,
            outage: run.outage,
        }
    }
}

/// Per-scheme averages over one or more runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub avg_users_per_tti: f64,
    pub avg_users_per_cce: f64,
    /// Fraction of scheduled DCIs per aggregation level (1, 2, 4, 8).
    pub al_histogram: BTreeMap<usize, f64>,
}

impl SchemeSummary {
    pub fn from_runs(scheme: Scheme, runs: &[&MultiTtiRun], params: &SchedParams) -> Self {
        let tallies: Vec<RunTally> = runs.iter().map(|r| RunTally::of(r)).collect();
        Self::from_tallies(scheme, &tallies, params)
    }

    /// Integer totals first, so the result does not depend on the order of
    /// `tallies`.
    pub fn from_tallies(scheme: Scheme, tallies: &[RunTally], params: &SchedParams) -> Self {
        let n = tallies
            .iter()
            .map(|t| t.users_per_tti.len())
            .sum::<usize>()
            .max(1) as f64;
        let denom = params.denominator(scheme) as f64;
        let users: usize = tallies.iter().flat_map(|t| &t.users_per_tti).sum();
        let mut counts = [0usize; 4];
        for t in tallies {
            for (c, x) in counts.iter_mut().zip(t.al_counts) {
                *c += x;
            }
        }
        let total = users.max(1) as f64;
        Self {
            scheme,
            avg_users_per_tti: users as f64 / n,
            avg_users_per_cce: users as f64 / n / denom,
            al_histogram: AggregationLevel::ALL
                .iter()
                .map(|al| (al.cces(), counts[al.index()] as f64 / total))
                .collect(),
        }
    }

    /// One JSON line.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "scheme": self.scheme.name(),
            "avg_users_per_tti": self.avg_users_per_tti,
            "avg_users_per_cce": self.avg_users_per_cce,
            "al_histogram": self.al_histogram,
        })
        .to_string()
    }
}
