//! Set-packing PDCCH scheduler: make the candidate blocks of as many users
//! as possible disjoint, breaking ties by fewest CCEs.

use crate::control::{CceGrid, DciRequest, SearchSpaceParams, UserId};
use crate::error::{Error, Result};

use std::collections::HashSet;

use super::place::{legacy_request, schedule_legacy};
use super::{QueuePolicy, UserSchedState};

/// Up to this many users the packing is solved exactly.
pub const EXACT_LIMIT: usize = 16;

/// Search nodes [`pack_all`] may visit before giving up.
pub const PACK_NODE_BUDGET: usize = 200_000;

/// One user's options as CCE bitmasks.
#[derive(Debug, Clone)]
pub struct Item {
    pub weight: usize,
    pub masks: Vec<u128>,
}

impl Item {
    pub fn new(weight: usize, starts: &[usize]) -> Self {
        Self {
            weight,
            masks: starts.iter().map(|&s| mask(s..s + weight)).collect(),
        }
    }
}

fn mask(range: std::ops::Range<usize>) -> u128 {
    range.fold(0u128, |m, c| m | (1u128 << c))
}

/// Chosen candidate per item (`None` = not scheduled).
pub type Assignment = Vec<Option<usize>>;

/// Users placed, then fewest CCEs.
pub fn score(items: &[Item], a: &[Option<usize>]) -> (usize, std::cmp::Reverse<usize>) {
    let placed = a.iter().zip(items).filter(|(c, _)| c.is_some());
    let n = placed.clone().count();
    (n, std::cmp::Reverse(placed.map(|(_, it)| it.weight).sum()))
}

/// Exhaustive branch and bound: maximize placed items, then minimize their
/// total weight.
pub fn pack_exact(items: &[Item], occupied: u128) -> Assignment {
    struct Search<'a> {
        items: &'a [Item],
        /// Weight of items `i..` if all were placed.
        tail: Vec<usize>,
        cur: Assignment,
        best: Assignment,
        best_n: usize,
        best_w: usize,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, used: u128, n: usize, w: usize) {
            let rest = self.items.len() - i;
            if n + rest < self.best_n
                || (n + rest == self.best_n && w + self.tail[i] >= self.best_w)
            {
                return;
            }
            if i == self.items.len() {
                self.best_n = n;
                self.best_w = w;
                self.best = self.cur.clone();
                return;
            }
            let item = &self.items[i];
            for (k, &m) in item.masks.iter().enumerate() {
                if used & m == 0 {
                    self.cur[i] = Some(k);
                    self.go(i + 1, used | m, n + 1, w + item.weight);
                }
            }
            self.cur[i] = None;
            self.go(i + 1, used, n, w);
        }
    }
    let mut tail = vec![0; items.len() + 1];
    for i in (0..items.len()).rev() {
        tail[i] = tail[i + 1] + items[i].weight;
    }
    let mut s = Search {
        items,
        tail,
        cur: vec![None; items.len()],
        best: vec![None; items.len()],
        best_n: 0,
        best_w: usize::MAX,
    };
    s.go(0, occupied, 0, 0);
    s.best
}

/// Place items in `order`, each at its first free candidate.
fn greedy(items: &[Item], occupied: u128, order: &[usize]) -> Assignment {
    let mut used = occupied;
    let mut a = vec![None; items.len()];
    for &i in order {
        if let Some(k) = items[i].masks.iter().position(|&m| used & m == 0) {
            used |= items[i].masks[k];
            a[i] = Some(k);
        }
    }
    a
}

/// Local search for more users. Two moves, both adding one user:
///
/// * an unplaced item takes a block held by exactly one placed item, which
///   moves to another of its candidates;
/// * one placed item is dropped and two unplaced items fill its block
///   (with any free CCEs).
fn local_search(items: &[Item], occupied: u128, a: &mut Assignment) {
    let used_by = |a: &Assignment| {
        a.iter()
            .zip(items)
            .filter_map(|(c, it)| c.map(|k| it.masks[k]))
            .fold(occupied, |m, x| m | x)
    };
    let mut used = used_by(a);
    loop {
        if relocate_one(items, occupied, a, &mut used) || two_for_one(items, a, &mut used) {
            continue;
        }
        break;
    }
}

fn relocate_one(items: &[Item], occupied: u128, a: &mut Assignment, used: &mut u128) -> bool {
    let mut owner: Vec<Option<usize>> = vec![None; 128];
    for (i, c) in a.iter().enumerate() {
        if let Some(k) = c {
            for_bits(items[i].masks[*k], |b| owner[b] = Some(i));
        }
    }
    for u in (0..items.len()).filter(|&u| a[u].is_none()) {
        for (ku, &mu) in items[u].masks.iter().enumerate() {
            if occupied & mu != 0 {
                continue;
            }
            if mu & *used == 0 {
                a[u] = Some(ku);
                *used |= mu;
                return true;
            }
            let mut blocker = None;
            let mut single = true;
            for_bits(mu & *used, |b| match (blocker, owner[b]) {
                (None, o) => blocker = o,
                (Some(v), Some(o)) if v != o => single = false,
                _ => {}
            });
            let Some(v) = blocker.filter(|_| single) else {
                continue;
            };
            let mv = items[v].masks[a[v].expect("placed blocker")];
            let after = (*used & !mv) | mu;
            if let Some(kv) = items[v].masks.iter().position(|&m| after & m == 0) {
                a[u] = Some(ku);
                a[v] = Some(kv);
                *used = after | items[v].masks[kv];
                return true;
            }
        }
    }
    false
}

fn two_for_one(items: &[Item], a: &mut Assignment, used: &mut u128) -> bool {
    let placed: Vec<usize> = (0..items.len()).filter(|&v| a[v].is_some()).collect();
    for v in placed {
        let mv = items[v].masks[a[v].expect("placed")];
        let room = !(*used & !mv);
        // candidates inside the room, first one found per unplaced item
        let fits: Vec<(usize, usize, u128)> = (0..items.len())
            .filter(|&u| a[u].is_none())
            .flat_map(|u| {
                items[u]
                    .masks
                    .iter()
                    .enumerate()
                    .filter(move |(_, &m)| m & room == m)
                    .map(move |(k, &m)| (u, k, m))
            })
            .collect();
        for (i, &(u1, k1, m1)) in fits.iter().enumerate() {
            if m1 & mv == 0 {
                // fits without dropping v: relocate_one handles it
                continue;
            }
            if let Some(&(u2, k2, m2)) = fits[i + 1..]
                .iter()
                .find(|&&(u2, _, m2)| u2 != u1 && m2 & m1 == 0)
            {
                a[v] = None;
                a[u1] = Some(k1);
                a[u2] = Some(k2);
                *used = (*used & !mv) | m1 | m2;
                return true;
            }
        }
    }
    false
}

fn for_bits(mut m: u128, mut f: impl FnMut(usize)) {
    while m != 0 {
        let b = m.trailing_zeros() as usize;
        f(b);
        m &= m - 1;
    }
}

/// Largest-level-first greedy and queue-order first-fit, each improved by
/// local search; the better one wins. The first-fit start keeps the result
/// at least as good as legacy scheduling.
pub fn pack_heuristic(items: &[Item], occupied: u128) -> Assignment {
    let queue: Vec<usize> = (0..items.len()).collect();
    let mut by_level = queue.clone();
    by_level.sort_by_key(|&i| std::cmp::Reverse(items[i].weight));
    [queue, by_level]
        .iter()
        .map(|order| {
            let mut a = greedy(items, occupied, order);
            local_search(items, occupied, &mut a);
            a
        })
        .max_by_key(|a| score(items, a))
        .expect("two starts")
}

/// Every item placed, or `None`. Depth-first, most constrained item
/// first, pruned on capacity. Gives up (`None`) after
/// [`PACK_NODE_BUDGET`] nodes.
pub fn pack_all(items: &[Item], occupied: u128) -> Option<Assignment> {
    struct Dfs<'a> {
        items: &'a [Item],
        order: Vec<usize>,
        /// Weight of `order[d..]`.
        tail: Vec<usize>,
        universe: u128,
        nodes: usize,
        a: Assignment,
    }
    impl Dfs<'_> {
        fn go(&mut self, d: usize, used: u128) -> bool {
            if d == self.order.len() {
                return true;
            }
            self.nodes += 1;
            if self.nodes > PACK_NODE_BUDGET
                || ((self.universe & !used).count_ones() as usize) < self.tail[d]
            {
                return false;
            }
            let i = self.order[d];
            for k in 0..self.items[i].masks.len() {
                let m = self.items[i].masks[k];
                if used & m == 0 {
                    self.a[i] = Some(k);
                    if self.go(d + 1, used | m) {
                        return true;
                    }
                }
            }
            self.a[i] = None;
            false
        }
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&i| (items[i].masks.len(), std::cmp::Reverse(items[i].weight)));
    let mut tail = vec![0; order.len() + 1];
    for d in (0..order.len()).rev() {
        tail[d] = tail[d + 1] + items[order[d]].weight;
    }
    let universe = items
        .iter()
        .flat_map(|it| it.masks.iter())
        .fold(0u128, |u, m| u | m);
    let mut s = Dfs {
        items,
        order,
        tail,
        universe,
        nodes: 0,
        a: vec![None; items.len()],
    };
    s.go(0, occupied).then_some(s.a)
}

/// Fit the last item next to the others, which are packed as `current`,
/// moving them if needed.
fn repack(items: &[Item], occupied: u128, current: &Assignment) -> Option<Assignment> {
    if items.len() <= EXACT_LIMIT {
        return pack_all(items, occupied);
    }
    let mut a = current.clone();
    a.push(None);
    local_search(items, occupied, &mut a);
    if a.iter().all(Option::is_some) {
        return Some(a);
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(items[i].weight));
    let mut b = greedy(items, occupied, &order);
    local_search(items, occupied, &mut b);
    b.iter().all(Option::is_some).then_some(b)
}

/// Waste-minimizing PDCCH schedule on a single-row grid.
///
/// With at most [`EXACT_LIMIT`] users the largest packable subset is found
/// exactly (ties: fewest CCEs). Longer queues are served in order like
/// first-fit, but a user whose candidates are all taken is still accepted
/// if the DCIs accepted so far can be moved to other candidates of theirs
/// to make room. The first-fit schedule is kept if it happens to place
/// more users. Returns the users tried and left out.
pub fn schedule_optimal(
    users: &[&UserSchedState],
    grid: &mut CceGrid,
    policy: QueuePolicy,
    tti: u64,
) -> Result<Vec<UserId>> {
    assert_eq!(grid.beams(), 1, "optimal PDCCH has no spatial dimension");
    if grid.n_cce() > 128 {
        return Err(Error::Config(format!(
            "optimal scheduler supports at most 128 CCEs, got {}",
            grid.n_cce()
        )));
    }
    let occupied = (0..grid.n_cce())
        .filter(|&c| grid.is_occupied(1, c))
        .fold(0u128, |m, c| m | (1u128 << c));
    let full = mask(0..grid.n_cce());
    let option = |u: &UserSchedState| -> Result<Option<(DciRequest, Vec<usize>)>> {
        let Some(req) = legacy_request(u) else {
            return Ok(None);
        };
        let starts = grid.candidates(&req, &SearchSpaceParams::for_user(u.user_id, tti))?;
        Ok(Some((req, starts)))
    };

    let mut accepted: Vec<(DciRequest, usize)> = Vec::new();
    let mut left_out = Vec::new();
    if users.len() <= EXACT_LIMIT {
        let mut all = Vec::new();
        for u in users {
            all.extend(option(u)?);
        }
        let items: Vec<Item> = all.iter().map(|(r, s)| Item::new(r.al.cces(), s)).collect();
        let a = pack_exact(&items, occupied);
        for ((req, starts), choice) in all.into_iter().zip(a) {
            match choice {
                Some(k) => accepted.push((req, starts[k])),
                None => left_out.extend(req.user_id),
            }
        }
    } else {
        let mut items: Vec<Item> = Vec::new();
        let mut opts: Vec<(DciRequest, Vec<usize>)> = Vec::new();
        let mut current: Assignment = Vec::new();
        let mut used = occupied;
        let mut hopeless: HashSet<Vec<u128>> = HashSet::new();
        for u in users {
            if used == full {
                break;
            }
            let Some((req, starts)) = option(u)? else {
                continue;
            };
            let item = Item::new(req.al.cces(), &starts);
            let free = (full & !used).count_ones() as usize;
            let direct = item.masks.iter().position(|&m| used & m == 0);
            let fit = if let Some(k) = direct {
                let mut a = current.clone();
                a.push(Some(k));
                Some(a)
            } else if free < item.weight || hopeless.contains(&item.masks) {
                None
            } else {
                items.push(item.clone());
                let r = repack(&items, occupied, &current);
                items.pop();
                r
            };
            match fit {
                Some(a) => {
                    items.push(item);
                    opts.push((req, starts));
                    current = a;
                    used = items
                        .iter()
                        .zip(&current)
                        .fold(occupied, |m, (it, k)| m | it.masks[k.expect("packed")]);
                }
                None => {
                    left_out.extend(req.user_id);
                    if policy == QueuePolicy::HeadOfLine {
                        break;
                    }
                    // accepted sets only grow, so this stays unpackable
                    hopeless.insert(item.masks);
                }
            }
        }
        for ((req, starts), k) in opts.into_iter().zip(current) {
            accepted.push((req, starts[k.expect("packed")]));
        }
    }

    if accepted.len() < legacy_count(users, grid, policy, tti)? {
        return schedule_legacy(users, grid, policy, tti);
    }
    for (req, start) in &accepted {
        grid.place_at(req, *start);
    }
    Ok(left_out)
}

/// Users first-fit would place on a copy of `grid`.
pub fn legacy_count(
    users: &[&UserSchedState],
    grid: &CceGrid,
    policy: QueuePolicy,
    tti: u64,
) -> Result<usize> {
    let mut g = grid.clone();
    let before = g.placements().len();
    schedule_legacy(users, &mut g, policy, tti)?;
    Ok(g.placements().len() - before)
}
