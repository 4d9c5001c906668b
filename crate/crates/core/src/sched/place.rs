//! First-fit placers: legacy PDCCH, BF-PDCCH and EPDCCH. Each walks the
//! queue in order until its grid is full, or until the first blocked user
//! under [`QueuePolicy::HeadOfLine`], and returns the users it tried but
//! could not place.

use crate::control::{AggregationLevel, CceGrid, DciRequest, SearchSpaceParams, UserId};
use crate::error::Result;

use super::{EpdcchConfig, QueuePolicy, UserSchedState};

fn first_fit(grid: &mut CceGrid, req: &DciRequest, tti: u64) -> Result<bool> {
    let user = req.user_id.expect("user DCI");
    Ok(grid
        .place(req, &SearchSpaceParams::for_user(user, tti))?
        .placed()
        .is_some())
}

/// Legacy DCI of a user: USS on the single row.
pub(crate) fn legacy_request(u: &UserSchedState) -> Option<DciRequest> {
    u.al_legacy
        .level()
        .map(|al| DciRequest::all_beams(u.user_id, al, 1))
}

/// Place each user at the first free candidate of its legacy level.
/// `grid` must have a single row.
pub fn schedule_legacy(
    users: &[&UserSchedState],
    grid: &mut CceGrid,
    policy: QueuePolicy,
    tti: u64,
) -> Result<Vec<UserId>> {
    assert_eq!(grid.beams(), 1, "legacy PDCCH has no spatial dimension");
    let mut blocked = Vec::new();
    for u in users {
        if grid.is_full() {
            break;
        }
        if let Some(req) = legacy_request(u) {
            if !first_fit(grid, &req, tti)? {
                blocked.push(u.user_id);
                if policy == QueuePolicy::HeadOfLine {
                    break;
                }
            }
        }
    }
    Ok(blocked)
}

/// USS-1 DCIs go to the same CCEs in every row, USS-2 DCIs only to their
/// own beam rows. Common DCIs are expected to be on the grid already.
pub fn schedule_bf_pdcch(
    users: &[&UserSchedState],
    grid: &mut CceGrid,
    policy: QueuePolicy,
    tti: u64,
) -> Result<Vec<UserId>> {
    let mut blocked = Vec::new();
    for u in users {
        if grid.is_full() {
            break;
        }
        if let Some(req) = u.bf_request(grid.beams()) {
            if !first_fit(grid, &req, tti)? {
                blocked.push(u.user_id);
                if policy == QueuePolicy::HeadOfLine {
                    break;
                }
            }
        }
    }
    Ok(blocked)
}

/// A user whose one-beam level fits the EPDCCH region tries it first, the
/// layer index standing in for the beam row; otherwise, or if that fails,
/// legacy PDCCH. Returns the ECCE grid and the blocked users.
pub fn schedule_epdcch(
    users: &[&UserSchedState],
    pdcch: &mut CceGrid,
    cfg: &EpdcchConfig,
    policy: QueuePolicy,
    tti: u64,
) -> Result<(CceGrid, Vec<UserId>)> {
    let n_ecce = cfg.ecces();
    let mut ecce = CceGrid::new(n_ecce, cfg.layers.max(1));
    let mut blocked = Vec::new();
    for u in users {
        if pdcch.is_full() && ecce.is_full() {
            break;
        }
        let al = u.al_one_beam.level().filter(|al| al.cces() <= n_ecce);
        if let Some(al) = al {
            if place_layered(&mut ecce, u.user_id, al, tti)? {
                continue;
            }
        }
        let placed = match legacy_request(u) {
            Some(req) => first_fit(pdcch, &req, tti)?,
            None => false,
        };
        if !placed {
            blocked.push(u.user_id);
            if policy == QueuePolicy::HeadOfLine {
                break;
            }
        }
    }
    Ok((ecce, blocked))
}

/// First candidate block, lowest free layer.
fn place_layered(grid: &mut CceGrid, user: UserId, al: AggregationLevel, tti: u64) -> Result<bool> {
    let params = SearchSpaceParams::for_user(user, tti);
    let probe = DciRequest::beamformed(user, al, &[1]);
    for start in grid.candidates(&probe, &params)? {
        for layer in 1..=grid.beams() {
            if grid.is_free(start..start + al.cces(), &[layer]) {
                grid.place_at(&DciRequest::beamformed(user, al, &[layer]), start);
                return Ok(true);
            }
        }
    }
    Ok(false)
}
