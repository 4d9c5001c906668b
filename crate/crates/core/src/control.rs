//! PDCCH resource model: CCE budget, blind-decoding search spaces and the
//! per-beam CCE occupancy grid.
//!
//! A [`CceGrid`] has one row per active beam. Legacy PDCCH is the one-row
//! case. Common (CSS) and USS-1 DCIs occupy the same CCEs in every row;
//! USS-2 DCIs occupy only the rows of their assigned beams, which is what
//! lets different users reuse the same CCEs in different beams.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type UserId = u32;

/// Common search space always lives in the first 16 CCEs.
pub const CSS_SIZE: usize = 16;

/// DCI payload size (format 1).
pub const DCI_PAYLOAD_BITS: usize = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AggregationLevel {
    L1,
    L2,
    L4,
    L8,
}

impl AggregationLevel {
    pub const ALL: [AggregationLevel; 4] = [Self::L1, Self::L2, Self::L4, Self::L8];

    /// CCEs occupied.
    pub const fn cces(self) -> usize {
        match self {
            Self::L1 => 1,
            Self::L2 => 2,
            Self::L4 => 4,
            Self::L8 => 8,
        }
    }

    pub fn from_cces(n: usize) -> Option<Self> {
        Self::ALL.into_iter().find(|al| al.cces() == n)
    }

    pub const fn index(self) -> usize {
        match self {
            Self::L1 => 0,
            Self::L2 => 1,
            Self::L4 => 2,
            Self::L8 => 3,
        }
    }
}

impl fmt::Display for AggregationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.cces())
    }
}

/// Total CCEs in the control region for `(bandwidth, cfi)` times the
/// downlink share, floored.
///
/// Tabulated for 20 MHz with two CRS ports, one PHICH group factor and
/// normal cyclic prefix: 17, 50 and 84 CCEs for CFI 1, 2 and 3.
pub fn cce_capacity(bandwidth_mhz: f64, cfi: u8, dl_fraction: f64) -> Result<usize> {
    if (bandwidth_mhz - 20.0).abs() > 1e-9 {
        return Err(Error::UnsupportedBandwidth(bandwidth_mhz));
    }
    let total = match cfi {
        1 => 17,
        2 => 50,
        3 => 84,
        other => return Err(Error::InvalidCfi(other)),
    };
    if !(0.0..=1.0).contains(&dl_fraction) {
        return Err(Error::Config(format!(
            "dl_fraction {dl_fraction} outside [0, 1]"
        )));
    }
    Ok((total as f64 * dl_fraction + 1e-9).floor() as usize)
}

/// First CCE of candidate `m` at aggregation level `al`:
/// `L * ((Y_k + m) mod floor(N_cce / L))`.
pub fn candidate_start(y_k: u64, m: u64, al: AggregationLevel, n_cce: usize) -> Result<usize> {
    let l = al.cces();
    if n_cce < l {
        return Err(Error::GridTooSmall { n_cce, al: l });
    }
    let blocks = (n_cce / l) as u64;
    Ok(l * ((y_k.wrapping_add(m)) % blocks) as usize)
}

/// The `L` consecutive CCE indices of candidate `m`.
pub fn candidate_indices(
    y_k: u64,
    m: u64,
    al: AggregationLevel,
    n_cce: usize,
) -> Result<std::ops::Range<usize>> {
    let start = candidate_start(y_k, m, al, n_cce)?;
    Ok(start..start + al.cces())
}

const HASH_A: u64 = 39_827;
const HASH_D: u64 = 65_537;

/// UE-specific hash seed `Y_k` for subframe `k` (0..9):
/// `Y_k = (A * Y_{k-1}) mod D`, with `Y_{-1}` the user's RNTI.
pub fn uss_hash(rnti: u32, subframe: u32) -> u64 {
    let mut y = rnti as u64;
    for _ in 0..=subframe % 10 {
        y = (HASH_A * y) % HASH_D;
    }
    y
}

/// RNTI used for a user id (RNTIs are never zero).
pub fn rnti_of(user: UserId) -> u32 {
    user.wrapping_add(1).max(1)
}

/// Hash seed and blind-decoding candidate counts per aggregation level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpaceParams {
    pub y_k: u64,
    pub candidates: BTreeMap<AggregationLevel, usize>,
}

impl SearchSpaceParams {
    /// UE-specific space: 6, 6, 2, 2 candidates for AL 1, 2, 4, 8.
    pub fn ue_specific(y_k: u64) -> Self {
        use AggregationLevel::*;
        Self {
            y_k,
            candidates: BTreeMap::from([(L1, 6), (L2, 6), (L4, 2), (L8, 2)]),
        }
    }

    /// Common space: `Y_k = 0`, 4 candidates at AL4 and 2 at AL8.
    pub fn common() -> Self {
        use AggregationLevel::*;
        Self {
            y_k: 0,
            candidates: BTreeMap::from([(L4, 4), (L8, 2)]),
        }
    }

    pub fn for_user(user: UserId, tti: u64) -> Self {
        Self::ue_specific(uss_hash(rnti_of(user), (tti % 10) as u32))
    }

    pub fn validate(&self) -> Result<()> {
        if self.candidates.values().any(|&c| c == 0) {
            return Err(Error::Config("candidate counts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Candidate block starts for `al`, one per `m`, duplicates removed in
/// order. Empty if the search space has no candidates at `al`.
pub fn enumerate_candidates(
    params: &SearchSpaceParams,
    al: AggregationLevel,
    n_cce: usize,
) -> Result<Vec<usize>> {
    let count = params.candidates.get(&al).copied().unwrap_or(0);
    let mut starts = Vec::with_capacity(count);
    for m in 0..count as u64 {
        let s = candidate_start(params.y_k, m, al, n_cce)?;
        if !starts.contains(&s) {
            starts.push(s);
        }
    }
    Ok(starts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SearchSpaceClass {
    Css,
    Uss1,
    Uss2,
}

impl fmt::Display for SearchSpaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Css => "CSS",
            Self::Uss1 => "USS1",
            Self::Uss2 => "USS2",
        })
    }
}

/// A DCI waiting to be placed. `beams` are 1-based beam ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DciRequest {
    /// `None` for common DCIs.
    pub user_id: Option<UserId>,
    pub payload_bits: usize,
    pub al: AggregationLevel,
    pub class: SearchSpaceClass,
    pub beams: Vec<usize>,
}

impl DciRequest {
    pub fn common(al: AggregationLevel, beam_count: usize) -> Self {
        Self {
            user_id: None,
            payload_bits: DCI_PAYLOAD_BITS,
            al,
            class: SearchSpaceClass::Css,
            beams: (1..=beam_count).collect(),
        }
    }

    /// USS-1: same CCEs in every beam.
    pub fn all_beams(user: UserId, al: AggregationLevel, beam_count: usize) -> Self {
        Self {
            user_id: Some(user),
            payload_bits: DCI_PAYLOAD_BITS,
            al,
            class: SearchSpaceClass::Uss1,
            beams: (1..=beam_count).collect(),
        }
    }

    /// USS-2: only the given beam(s).
    pub fn beamformed(user: UserId, al: AggregationLevel, beams: &[usize]) -> Self {
        let mut beams = beams.to_vec();
        beams.sort_unstable();
        Self {
            user_id: Some(user),
            payload_bits: DCI_PAYLOAD_BITS,
            al,
            class: SearchSpaceClass::Uss2,
            beams,
        }
    }

    pub fn validate(&self, beam_count: usize) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedRequest(m));
        if self.beams.iter().any(|&b| b == 0 || b > beam_count) {
            return bad(format!(
                "beam ids {:?} outside 1..={beam_count}",
                self.beams
            ));
        }
        if self.beams.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("beam ids {:?} not sorted and unique", self.beams));
        }
        match self.class {
            SearchSpaceClass::Uss2 => {
                if !(1..=2).contains(&self.beams.len()) {
                    return bad(format!("USS2 needs 1 or 2 beams, got {}", self.beams.len()));
                }
            }
            SearchSpaceClass::Css | SearchSpaceClass::Uss1 => {
                if self.beams.len() != beam_count {
                    return bad(format!(
                        "{} DCI must span all {beam_count} beams",
                        self.class
                    ));
                }
            }
        }
        if self.class == SearchSpaceClass::Css && self.user_id.is_some() {
            return bad("common DCI carries a user id".into());
        }
        if self.class != SearchSpaceClass::Css && self.user_id.is_none() {
            return bad("user-specific DCI without a user id".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DciPlacement {
    pub request: DciRequest,
    pub start_cce: usize,
}

impl DciPlacement {
    pub fn cces(&self) -> std::ops::Range<usize> {
        self.start_cce..self.start_cce + self.request.al.cces()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlaceOutcome {
    Placed(DciPlacement),
    Blocked,
}

impl PlaceOutcome {
    pub fn placed(self) -> Option<DciPlacement> {
        match self {
            PlaceOutcome::Placed(p) => Some(p),
            PlaceOutcome::Blocked => None,
        }
    }
}

/// Per-beam CCE occupancy for one TTI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CceGrid {
    n_cce: usize,
    rows: Vec<Vec<bool>>,
    log: Vec<DciPlacement>,
    free: usize,
}

impl CceGrid {
    pub fn new(n_cce: usize, beams: usize) -> Self {
        assert!(beams >= 1, "a grid needs at least one beam row");
        Self {
            n_cce,
            rows: vec![vec![false; n_cce]; beams],
            log: Vec::new(),
            free: n_cce * beams,
        }
    }

    /// No free CCE left in any row.
    pub fn is_full(&self) -> bool {
        self.free == 0
    }

    pub fn n_cce(&self) -> usize {
        self.n_cce
    }

    pub fn beams(&self) -> usize {
        self.rows.len()
    }

    pub fn css_size(&self) -> usize {
        CSS_SIZE
    }

    /// Placements in the order they were made.
    pub fn placements(&self) -> &[DciPlacement] {
        &self.log
    }

    pub fn is_occupied(&self, beam: usize, cce: usize) -> bool {
        self.rows[beam - 1][cce]
    }

    /// Occupied CCEs in one beam row.
    pub fn used(&self, beam: usize) -> usize {
        self.rows[beam - 1].iter().filter(|&&b| b).count()
    }

    /// CCE indices occupied in at least one row.
    pub fn used_any(&self) -> usize {
        (0..self.n_cce)
            .filter(|&c| self.rows.iter().any(|r| r[c]))
            .count()
    }

    pub fn is_free(&self, range: std::ops::Range<usize>, beams: &[usize]) -> bool {
        range.end <= self.n_cce
            && beams
                .iter()
                .all(|&b| self.rows[b - 1][range.clone()].iter().all(|&o| !o))
    }

    /// Candidate starts for a request, honouring the CSS restriction.
    pub fn candidates(&self, req: &DciRequest, params: &SearchSpaceParams) -> Result<Vec<usize>> {
        let span = if req.class == SearchSpaceClass::Css {
            self.n_cce.min(CSS_SIZE)
        } else {
            self.n_cce
        };
        if span < req.al.cces() {
            return Ok(Vec::new());
        }
        enumerate_candidates(params, req.al, span)
    }

    /// Place `req` in the first candidate block (lowest `m`) that is free in
    /// every row of `req.beams`.
    pub fn place(&mut self, req: &DciRequest, params: &SearchSpaceParams) -> Result<PlaceOutcome> {
        req.validate(self.beams())?;
        for start in self.candidates(req, params)? {
            let range = start..start + req.al.cces();
            if self.is_free(range, &req.beams) {
                let p = DciPlacement {
                    request: req.clone(),
                    start_cce: start,
                };
                self.occupy(&p);
                return Ok(PlaceOutcome::Placed(p));
            }
        }
        Ok(PlaceOutcome::Blocked)
    }

    /// Place at a given start. The caller guarantees the block is free.
    pub(crate) fn place_at(&mut self, req: &DciRequest, start: usize) -> DciPlacement {
        let p = DciPlacement {
            request: req.clone(),
            start_cce: start,
        };
        debug_assert!(self.is_free(p.cces(), &req.beams));
        self.occupy(&p);
        p
    }

    fn occupy(&mut self, p: &DciPlacement) {
        for &b in &p.request.beams {
            for c in p.cces() {
                self.free -= !self.rows[b - 1][c] as usize;
                self.rows[b - 1][c] = true;
            }
        }
        self.log.push(p.clone());
    }

    /// Undo a placement. Returns false if it is not in the grid.
    pub fn remove(&mut self, p: &DciPlacement) -> bool {
        let Some(pos) = self.log.iter().position(|q| q == p) else {
            return false;
        };
        self.log.remove(pos);
        for &b in &p.request.beams {
            for c in p.cces() {
                self.free += self.rows[b - 1][c] as usize;
                self.rows[b - 1][c] = false;
            }
        }
        true
    }

    /// Rebuild occupancy from the placement log, failing on any double
    /// booking. Used to audit scheduler output.
    pub fn replay(n_cce: usize, beams: usize, log: &[DciPlacement]) -> Result<Self> {
        let mut grid = Self::new(n_cce, beams);
        for p in log {
            p.request.validate(beams)?;
            if !grid.is_free(p.cces(), &p.request.beams) {
                return Err(Error::MalformedRequest(format!(
                    "CCEs {:?} double-booked in beams {:?}",
                    p.cces(),
                    p.request.beams
                )));
            }
            grid.occupy(p);
        }
        Ok(grid)
    }
}

/// Append rows `tti,user_id,ss_class,al,start_cce,beams` to a placement log.
/// Beams are `;`-separated; common DCIs print `common` as the user id.
pub fn write_placement_log<W: Write>(
    out: &mut W,
    scheme: &str,
    tti: u64,
    placements: &[DciPlacement],
) -> std::io::Result<()> {
    for p in placements {
        let user = p
            .request
            .user_id
            .map_or_else(|| "common".to_string(), |u| u.to_string());
        let beams = p
            .request
            .beams
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join(";");
        writeln!(
            out,
            "{scheme},{tti},{user},{},{},{},{beams}",
            p.request.class, p.request.al, p.start_cce
        )?;
    }
    Ok(())
}

pub const PLACEMENT_LOG_HEADER: &str = "scheme,tti,user_id,ss_class,al,start_cce,beams";

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use AggregationLevel::*;

    /// Straight transcription of the candidate formula, kept apart from
    /// `candidate_start`.
    fn oracle(y: u64, m: u64, l: usize, n: usize) -> Vec<usize> {
        let blocks = (n / l) as u64;
        let base = (y + m) % blocks;
        (0..l).map(|i| l * base as usize + i).collect()
    }

    #[test]
    fn capacity_points() {
        assert_eq!(cce_capacity(20.0, 3, 0.5).unwrap(), 42);
        assert_eq!(cce_capacity(20.0, 3, 1.0).unwrap(), 84);
        assert_eq!(cce_capacity(20.0, 3, 0.0).unwrap(), 0);
        assert!(matches!(
            cce_capacity(10.0, 3, 0.5),
            Err(Error::UnsupportedBandwidth(_))
        ));
        assert!(matches!(
            cce_capacity(20.0, 4, 0.5),
            Err(Error::InvalidCfi(4))
        ));
    }

    #[test]
    fn candidate_examples() {
        assert_eq!(candidate_indices(0, 0, L4, 42).unwrap(), 0..4);
        assert_eq!(candidate_indices(123, 1, L2, 42).unwrap(), 38..40);
        assert_eq!(candidate_indices(9, 0, L8, 42).unwrap(), 32..40);
        assert!(candidate_indices(0, 0, L8, 7).is_err());
    }

    #[test]
    fn enumerate_examples() {
        let p = SearchSpaceParams {
            y_k: 0,
            candidates: BTreeMap::from([(L1, 6)]),
        };
        assert_eq!(
            enumerate_candidates(&p, L1, 42).unwrap(),
            vec![0, 1, 2, 3, 4, 5]
        );
        let p = SearchSpaceParams {
            y_k: 0,
            candidates: BTreeMap::from([(L8, 2)]),
        };
        assert_eq!(enumerate_candidates(&p, L8, 16).unwrap(), vec![0, 8]);
        let p = SearchSpaceParams {
            y_k: 5,
            candidates: BTreeMap::from([(L4, 1)]),
        };
        assert_eq!(enumerate_candidates(&p, L4, 4).unwrap(), vec![0]);
        // 8 CCEs hold one AL8 block, so both candidates collapse
        assert_eq!(
            enumerate_candidates(&SearchSpaceParams::ue_specific(3), L8, 8).unwrap(),
            vec![0]
        );
    }

    #[test]
    fn matches_oracle_on_random_tuples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let y = rng.random_range(0..65_537u64);
            let m = rng.random_range(0..8u64);
            let al = AggregationLevel::ALL[rng.random_range(0..4)];
            let n = rng.random_range(al.cces()..=88);
            let got: Vec<usize> = candidate_indices(y, m, al, n).unwrap().collect();
            assert_eq!(got, oracle(y, m, al.cces(), n));
        }
    }

    #[test]
    fn indices_in_range_and_aligned() {
        for y in (0..65_537u64).step_by(97) {
            for al in AggregationLevel::ALL {
                for n in [al.cces(), 16, 17, 42, 84] {
                    if n < al.cces() {
                        continue;
                    }
                    let r = candidate_indices(y, 1, al, n).unwrap();
                    assert!(r.end <= n);
                    assert_eq!(r.start % al.cces(), 0);
                }
            }
        }
    }

    #[test]
    fn hash_recursion() {
        assert_eq!(uss_hash(1, 0), 39_827);
        assert_eq!(uss_hash(1, 1), (39_827u64 * 39_827) % 65_537);
        assert_eq!(uss_hash(1, 0), uss_hash(1, 10));
    }

    #[test]
    fn css_goes_to_first_cces_in_all_beams() {
        let mut g = CceGrid::new(42, 8);
        let p = g
            .place(&DciRequest::common(L8, 8), &SearchSpaceParams::common())
            .unwrap()
            .placed()
            .unwrap();
        assert_eq!(p.start_cce, 0);
        for b in 1..=8 {
            assert!((0..8).all(|c| g.is_occupied(b, c)));
        }
        let p2 = g
            .place(&DciRequest::common(L8, 8), &SearchSpaceParams::common())
            .unwrap()
            .placed()
            .unwrap();
        assert_eq!(p2.start_cce, 8);
        // CSS is full now
        let r = g
            .place(&DciRequest::common(L4, 8), &SearchSpaceParams::common())
            .unwrap();
        assert_eq!(r, PlaceOutcome::Blocked);
    }

    #[test]
    fn uss2_reuses_cces_across_beams() {
        let mut g = CceGrid::new(42, 8);
        let params = SearchSpaceParams::ue_specific(1234);
        let a = g
            .place(&DciRequest::beamformed(1, L4, &[1]), &params)
            .unwrap()
            .placed()
            .unwrap();
        let b = g
            .place(&DciRequest::beamformed(2, L4, &[2]), &params)
            .unwrap()
            .placed()
            .unwrap();
        assert_eq!(a.start_cce, b.start_cce);
        assert!(g.is_occupied(1, a.start_cce) && g.is_occupied(2, a.start_cce));
        assert!(!g.is_occupied(3, a.start_cce));
    }

    #[test]
    fn blocked_when_candidates_taken() {
        let mut g = CceGrid::new(16, 1);
        let params = SearchSpaceParams::ue_specific(0);
        assert!(g
            .place(&DciRequest::all_beams(1, L8, 1), &params)
            .unwrap()
            .placed()
            .is_some());
        assert!(g
            .place(&DciRequest::all_beams(2, L8, 1), &params)
            .unwrap()
            .placed()
            .is_some());
        assert_eq!(
            g.place(&DciRequest::all_beams(3, L8, 1), &params).unwrap(),
            PlaceOutcome::Blocked
        );
    }

    #[test]
    fn malformed_requests_rejected() {
        let mut g = CceGrid::new(42, 4);
        let params = SearchSpaceParams::ue_specific(0);
        let mut r = DciRequest::beamformed(1, L1, &[1, 2]);
        r.beams = vec![1, 2, 3];
        assert!(g.place(&r, &params).is_err());
        assert!(g.place(&DciRequest::all_beams(1, L1, 3), &params).is_err());
        assert!(g
            .place(&DciRequest::beamformed(1, L1, &[5]), &params)
            .is_err());
    }

    proptest! {
        #[test]
        fn placement_sequences_never_double_book(ops in proptest::collection::vec((0u32..50, 0usize..4, 0usize..3, 1usize..5, 0usize..4), 1..60)) {
            let beams = 4;
            let mut g = CceGrid::new(42, beams);
            for (user, al, class, b1, b2) in ops {
                let al = AggregationLevel::ALL[al];
                let req = match class {
                    0 => DciRequest::all_beams(user, al, beams),
                    1 => DciRequest::beamformed(user, al, &[b1]),
                    _ => {
                        let other = (b1 + b2) % beams + 1;
                        if other == b1 { DciRequest::beamformed(user, al, &[b1]) } else { DciRequest::beamformed(user, al, &[b1, other]) }
                    }
                };
                let before = g.clone();
                let params = SearchSpaceParams::for_user(user, 3);
                if let PlaceOutcome::Placed(p) = g.place(&req, &params).unwrap() {
                    // invertible
                    let mut undo = g.clone();
                    prop_assert!(undo.remove(&p));
                    prop_assert_eq!(undo, before);
                }
            }
            let replayed = CceGrid::replay(42, beams, g.placements()).unwrap();
            prop_assert_eq!(&replayed, &g);
            // at most `beams` USS2 DCIs share any CCE block
            for c in 0..42 {
                let sharing = g.placements().iter().filter(|p| p.request.class == SearchSpaceClass::Uss2 && p.cces().contains(&c)).count();
                prop_assert!(sharing <= beams);
            }
        }
    }
}
