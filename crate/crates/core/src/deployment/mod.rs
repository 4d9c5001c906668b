//! Network layout, user drops, channels and per-user SINR reports.
//!
//! Seven three-sector sites sit on a hexagonal grid that is wrapped onto a
//! torus: every distance is measured to the nearest image of a site, so a
//! user anywhere in the cluster sees a full ring of interferers.

mod channel;
mod sinr;

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::beam::sector_pattern;
use crate::control::UserId;
use crate::error::{Error, Result};
use crate::rng::{self, tag};
use crate::units::{dbm_to_mw, linear_to_db, SPEED_OF_LIGHT, THERMAL_NOISE_DBM_PER_HZ};

pub use channel::{array_response, channel_sample, ChannelModel, ChannelSample, Ray};
pub use sinr::{
    compute_sinr_report, simulate_drop, user_report, wraparound_interference, write_sinr_csv,
    RxBranch, SinrReport, WrapInterference, SINR_CSV_HEADER,
};

pub const SITES: usize = 7;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkLayout {
    pub isd: f64,
    pub sectors_per_site: usize,
    pub bs_height: f64,
    pub ue_height: f64,
    pub carrier_hz: f64,
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    /// Minimum 2D distance between a user and any site.
    pub min_distance: f64,
    pub wrap_around: bool,
    /// Rigid rotation of the whole layout (sites and sector boresights).
    pub rotation: f64,
}

impl Default for NetworkLayout {
    fn default() -> Self {
        Self::paper()
    }
}

fn rotate(p: Point, a: f64) -> Point {
    let (s, c) = a.sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(p: Point) -> f64 {
    p[0].hypot(p[1])
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

impl NetworkLayout {
    /// 7 sites, 3 sectors, 500 m ISD, 2.4 GHz, 44 dBm over 20 MHz.
    pub fn paper() -> Self {
        Self {
            isd: 500.0,
            sectors_per_site: 3,
            bs_height: 25.0,
            ue_height: 1.5,
            carrier_hz: 2.4e9,
            tx_power_dbm: 44.0,
            bandwidth_hz: 20e6,
            noise_figure_db: 9.0,
            min_distance: 35.0,
            wrap_around: true,
            rotation: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("isd", self.isd),
            ("bs_height", self.bs_height),
            ("ue_height", self.ue_height),
            ("carrier_hz", self.carrier_hz),
            ("bandwidth_hz", self.bandwidth_hz),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::Config(format!("layout {name} must be positive")));
        }
        if self.sectors_per_site == 0 {
            return Err(Error::Config(
                "layout needs at least one sector per site".into(),
            ));
        }
        if self.min_distance < 0.0 || self.min_distance >= self.isd / 2.0 {
            return Err(Error::Config("min_distance must lie in [0, isd/2)".into()));
        }
        Ok(())
    }

    pub fn sector_count(&self) -> usize {
        SITES * self.sectors_per_site
    }

    fn basis(&self) -> (Point, Point) {
        let d = self.isd;
        (
            rotate([d, 0.0], self.rotation),
            rotate([d / 2.0, d * 3f64.sqrt() / 2.0], self.rotation),
        )
    }

    /// Centre site first, then its six neighbours counter-clockwise.
    pub fn site_positions(&self) -> [Point; SITES] {
        let (u, v) = self.basis();
        let neg = |p: Point| [-p[0], -p[1]];
        [[0.0, 0.0], u, v, sub(v, u), neg(u), neg(v), sub(u, v)]
    }

    /// Super-lattice of the seven-site cluster.
    pub fn torus_vectors(&self) -> (Point, Point) {
        let (u, v) = self.basis();
        let a = add([2.0 * u[0], 2.0 * u[1]], v);
        let b = add([-u[0], -u[1]], [3.0 * v[0], 3.0 * v[1]]);
        (a, b)
    }

    /// Displacement from `site` to `user`, taken to the nearest wrap image.
    pub fn displacement(&self, site: usize, user: Point) -> Point {
        let d = sub(user, self.site_positions()[site]);
        if !self.wrap_around {
            return d;
        }
        let (a, b) = self.torus_vectors();
        // reduce into the parallelogram centred on the origin first
        let det = a[0] * b[1] - a[1] * b[0];
        let ca = (d[0] * b[1] - d[1] * b[0]) / det;
        let cb = (a[0] * d[1] - a[1] * d[0]) / det;
        let (ra, rb) = (ca.round(), cb.round());
        let d = [d[0] - ra * a[0] - rb * b[0], d[1] - ra * a[1] - rb * b[1]];
        let ba = sub(b, a);
        let shifts = [[0.0, 0.0], a, b, ba];
        shifts
            .iter()
            .flat_map(|&s| [add(d, s), sub(d, s)])
            .min_by(|p, q| norm(*p).total_cmp(&norm(*q)))
            .unwrap_or(d)
    }

    pub fn sector_site(&self, sector: usize) -> usize {
        sector / self.sectors_per_site
    }

    pub fn sector_boresight(&self, sector: usize) -> f64 {
        let k = (sector % self.sectors_per_site) as f64;
        wrap_angle(self.rotation + PI / 6.0 + 2.0 * PI * k / self.sectors_per_site as f64)
    }

    /// Azimuth of the user relative to the sector boresight, and zenith
    /// angle of the user seen from the antenna.
    pub fn sector_angles(&self, sector: usize, user: Point) -> (f64, f64) {
        let d = self.displacement(self.sector_site(sector), user);
        let d2 = norm(d);
        // a user under the mast sits on every boresight
        let azimuth = if d2 < 1e-9 {
            0.0
        } else {
            wrap_angle(d[1].atan2(d[0]) - self.sector_boresight(sector))
        };
        let zenith = PI / 2.0 + (self.bs_height - self.ue_height).atan2(d2);
        (azimuth, zenith)
    }

    pub fn distance_2d(&self, site: usize, user: Point) -> f64 {
        norm(self.displacement(site, user))
    }

    pub fn distance_3d(&self, site: usize, user: Point) -> f64 {
        self.distance_2d(site, user)
            .hypot(self.bs_height - self.ue_height)
    }

    pub fn noise_power_mw(&self) -> f64 {
        dbm_to_mw(
            THERMAL_NOISE_DBM_PER_HZ + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db,
        )
    }

    pub fn tx_power_mw(&self) -> f64 {
        dbm_to_mw(self.tx_power_dbm)
    }

    /// Uniform point on the wrapped cluster.
    fn sample_position<R: Rng>(&self, rng: &mut R) -> Point {
        let (a, b) = self.torus_vectors();
        let (s, t): (f64, f64) = (rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        [s * a[0] + t * b[0], s * a[1] + t * b[1]]
    }

    /// Area over which users are dropped.
    pub fn area(&self) -> f64 {
        let (a, b) = self.torus_vectors();
        (a[0] * b[1] - a[1] * b[0]).abs()
    }
}

/// Probability of line of sight at 2D distance `d2` (urban macro).
pub fn los_probability(d2: f64) -> f64 {
    (18.0 / d2).min(1.0) * (1.0 - (-d2 / 63.0).exp()) + (-d2 / 63.0).exp()
}

/// 3D urban-macro path loss in dB.
///
/// LOS uses the dual-slope model with breakpoint `4 h'bs h'ut fc / c`
/// (1 m effective environment height); NLOS is the larger of the LOS value
/// and the NLOS formula with 20 m streets and 20 m buildings.
pub fn pathloss(distance_3d: f64, los: bool, layout: &NetworkLayout) -> Result<f64> {
    if distance_3d.is_nan() || distance_3d < 10.0 {
        return Err(Error::DistanceTooShort(distance_3d));
    }
    let h_bs = layout.bs_height;
    let h_ut = layout.ue_height;
    let fc_ghz = layout.carrier_hz / 1e9;
    let d2 = (distance_3d.powi(2) - (h_bs - h_ut).powi(2))
        .max(0.0)
        .sqrt();
    let breakpoint = 4.0 * (h_bs - 1.0) * (h_ut - 1.0) * layout.carrier_hz / SPEED_OF_LIGHT;
    let los_pl = if d2 <= breakpoint {
        22.0 * distance_3d.log10() + 28.0 + 20.0 * fc_ghz.log10()
    } else {
        40.0 * distance_3d.log10() + 28.0 + 20.0 * fc_ghz.log10()
            - 9.0 * (breakpoint.powi(2) + (h_bs - h_ut).powi(2)).log10()
    };
    if los {
        return Ok(los_pl);
    }
    let (w, h): (f64, f64) = (20.0, 20.0);
    let nlos = 161.04 - 7.1 * w.log10() + 7.5 * h.log10()
        - (24.37 - 3.7 * (h / h_bs).powi(2)) * h_bs.log10()
        + (43.42 - 3.1 * h_bs.log10()) * (distance_3d.log10() - 3.0)
        + 20.0 * fc_ghz.log10()
        - (3.2 * (17.625f64).log10().powi(2) - 4.97)
        - 0.6 * (h_ut - 1.5);
    Ok(los_pl.max(nlos))
}

/// Large-scale state of one user-site link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteLink {
    pub los: bool,
    pub shadowing_db: f64,
    pub pathloss_db: f64,
}

impl SiteLink {
    /// Linear power gain (PL and shadowing, no antenna).
    pub fn gain(&self) -> f64 {
        10f64.powf(-(self.pathloss_db + self.shadowing_db) / 10.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub id: UserId,
    pub position: Point,
    pub serving_sector: usize,
    /// One entry per site.
    pub links: Vec<SiteLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserDrop {
    pub users: Vec<User>,
}

fn draw_links<R: Rng>(
    rng: &mut R,
    layout: &NetworkLayout,
    model: &ChannelModel,
    pos: Point,
) -> Result<Vec<SiteLink>> {
    (0..SITES)
        .map(|site| {
            let d2 = layout.distance_2d(site, pos);
            let u: f64 = rng.random();
            let z: f64 = Normal::new(0.0, 1.0).expect("unit normal").sample(rng);
            let los = !model.scatter || u < los_probability(d2);
            let sigma = if los {
                model.shadowing_los_db
            } else {
                model.shadowing_nlos_db
            };
            Ok(SiteLink {
                los,
                shadowing_db: if model.scatter { sigma * z } else { 0.0 },
                pathloss_db: pathloss(layout.distance_3d(site, pos), los, layout)?,
            })
        })
        .collect()
}

/// Sector with the strongest long-term received power through the legacy
/// sector antenna.
pub fn strongest_sector(layout: &NetworkLayout, pos: Point, links: &[SiteLink]) -> usize {
    (0..layout.sector_count())
        .map(|s| {
            let link = &links[layout.sector_site(s)];
            let (az, _) = layout.sector_angles(s, pos);
            (s, linear_to_db(link.gain()) + sector_pattern(az))
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(s, _)| s)
        .expect("layout has sectors")
}

fn candidate(
    layout: &NetworkLayout,
    model: &ChannelModel,
    seed: u64,
    attempt: u64,
) -> Result<Option<(Point, Vec<SiteLink>)>> {
    let mut r = rng::stream(seed, &[tag::DROP, attempt]);
    let pos = layout.sample_position(&mut r);
    if (0..SITES).any(|s| layout.distance_2d(s, pos) < layout.min_distance) {
        return Ok(None);
    }
    let mut r = rng::stream(seed, &[tag::SHADOW, attempt]);
    Ok(Some((pos, draw_links(&mut r, layout, model, pos)?)))
}

/// Uniform positions over the wrapped cluster, at least `min_distance` from
/// every site.
pub fn drop_positions(n: usize, layout: &NetworkLayout, seed: u64) -> Vec<Point> {
    let mut out = Vec::with_capacity(n);
    let mut attempt = 0u64;
    while out.len() < n {
        let mut r = rng::stream(seed, &[tag::DROP, attempt]);
        attempt += 1;
        let pos = layout.sample_position(&mut r);
        if (0..SITES).all(|s| layout.distance_2d(s, pos) >= layout.min_distance) {
            out.push(pos);
        }
    }
    out
}

/// `n` users spread over the whole layout, each attached to its strongest
/// sector.
pub fn drop_users(
    n: usize,
    layout: &NetworkLayout,
    model: &ChannelModel,
    seed: u64,
) -> Result<UserDrop> {
    layout.validate()?;
    let mut users = Vec::with_capacity(n);
    let mut attempt = 0u64;
    while users.len() < n {
        if let Some((pos, links)) = candidate(layout, model, seed, attempt)? {
            users.push(User {
                id: users.len() as UserId,
                position: pos,
                serving_sector: strongest_sector(layout, pos, &links),
                links,
            });
        }
        attempt += 1;
    }
    Ok(UserDrop { users })
}

/// `n` users all attached to `sector`, drawn by rejection from the uniform
/// drop over the whole layout.
pub fn drop_sector_users(
    n: usize,
    sector: usize,
    layout: &NetworkLayout,
    model: &ChannelModel,
    seed: u64,
) -> Result<UserDrop> {
    layout.validate()?;
    if sector >= layout.sector_count() {
        return Err(Error::Config(format!("sector {sector} not in layout")));
    }
    let limit = 1000 * (n as u64 + 1) * layout.sector_count() as u64;
    let mut users = Vec::with_capacity(n);
    let mut attempt = 0u64;
    while users.len() < n {
        if attempt >= limit {
            return Err(Error::Config(format!("sector {sector} attracts no users")));
        }
        if let Some((pos, links)) = candidate(layout, model, seed, attempt)? {
            if strongest_sector(layout, pos, &links) == sector {
                users.push(User {
                    id: users.len() as UserId,
                    position: pos,
                    serving_sector: sector,
                    links,
                });
            }
        }
        attempt += 1;
    }
    Ok(UserDrop { users })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sites_are_one_isd_apart() {
        let l = NetworkLayout::paper();
        let s = l.site_positions();
        for p in &s[1..] {
            assert!((norm(*p) - 500.0).abs() < 1e-9);
        }
        let (a, b) = l.torus_vectors();
        assert!((norm(a) - 500.0 * 7f64.sqrt()).abs() < 1e-9);
        assert!((norm(b) - norm(a)).abs() < 1e-9);
        // seven hexagonal site areas
        let hex = 3f64.sqrt() / 2.0 * 500.0 * 500.0;
        assert!((l.area() - 7.0 * hex).abs() < 1e-6);
    }

    #[test]
    fn wrapped_distance_is_short() {
        let l = NetworkLayout::paper();
        let (a, b) = l.torus_vectors();
        // a site's own wrap images map back onto it
        for site in 0..SITES {
            let p = l.site_positions()[site];
            for shift in [a, b, sub(b, a)] {
                assert!(l.distance_2d(site, add(p, shift)) < 1e-6);
            }
        }
        // no point is farther than one ISD from its nearest site
        let pts = drop_positions(2000, &l, 4);
        for p in pts {
            let nearest = (0..SITES)
                .map(|s| l.distance_2d(s, p))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= 500.0 / 3f64.sqrt() + 1e-6);
        }
    }

    #[test]
    fn pathloss_matches_hand_evaluation() {
        let l = NetworkLayout::paper();
        // below the 384 m breakpoint: 22 log10(100) + 28 + 20 log10(2.4)
        let hand = 44.0 + 28.0 + 20.0 * 0.380_211_241_711_606;
        assert!((pathloss(100.0, true, &l).unwrap() - hand).abs() < 1e-9);
        // beyond it: 40 log10(d) + 28 + 20 log10(fc) - 9 log10(bp^2 + 23.5^2),
        // bp = 4 * 24 * 0.5 * 2.4e9 / c = 384.2656 m
        let bp: f64 = 115.2e9 / 299_792_458.0;
        let hand =
            40.0 * 3.0 + 28.0 + 20.0 * 0.380_211_241_711_606 - 9.0 * (bp * bp + 552.25).log10();
        assert!((pathloss(1000.0, true, &l).unwrap() - hand).abs() < 1e-9);
        assert!(pathloss(200.0, false, &l).unwrap() >= pathloss(200.0, true, &l).unwrap());
        assert!(matches!(
            pathloss(5.0, true, &l),
            Err(Error::DistanceTooShort(_))
        ));
    }

    #[test]
    fn pathloss_is_monotone() {
        let l = NetworkLayout::paper();
        for los in [true, false] {
            let mut prev = f64::NEG_INFINITY;
            for d in (24..3000).step_by(7) {
                let pl = pathloss(d as f64, los, &l).unwrap();
                assert!(pl >= prev - 1e-12);
                prev = pl;
            }
        }
    }

    #[test]
    fn los_probability_limits() {
        assert!((los_probability(10.0) - 1.0).abs() < 1e-12);
        assert!(los_probability(500.0) < 0.1);
    }

    #[test]
    fn drops_are_deterministic() {
        let l = NetworkLayout::paper();
        let m = ChannelModel::default();
        let a = drop_users(50, &l, &m, 3).unwrap();
        assert_eq!(a, drop_users(50, &l, &m, 3).unwrap());
        assert_ne!(a, drop_users(50, &l, &m, 4).unwrap());
        let one = drop_users(1, &l, &m, 3).unwrap();
        assert_eq!(one.users.len(), 1);
        assert!(one.users[0].serving_sector < 21);
    }

    #[test]
    fn sector_drop_attaches_everyone() {
        let l = NetworkLayout::paper();
        let m = ChannelModel::default();
        let d = drop_sector_users(40, 0, &l, &m, 1).unwrap();
        assert_eq!(d.users.len(), 40);
        for u in &d.users {
            assert_eq!(strongest_sector(&l, u.position, &u.links), 0);
        }
    }

    #[test]
    fn boresights_cover_the_circle() {
        let l = NetworkLayout::paper();
        let b: Vec<f64> = (0..3).map(|s| l.sector_boresight(s).to_degrees()).collect();
        assert!((b[0] - 30.0).abs() < 1e-9);
        assert!((b[1] - 150.0).abs() < 1e-9);
        assert!((b[2] + 90.0).abs() < 1e-9);
    }

    #[test]
    fn drops_are_uniform_outside_exclusion_zones() {
        // 8x8 bins in torus coordinates; the expected share of each bin is
        // its area minus the parts closer than min_distance to a site,
        // integrated on a fine midpoint grid
        let l = NetworkLayout::paper();
        let (a, b) = l.torus_vectors();
        let det = a[0] * b[1] - a[1] * b[0];
        let coords = |p: Point| {
            let s = (p[0] * b[1] - p[1] * b[0]) / det;
            let t = (a[0] * p[1] - a[1] * p[0]) / det;
            (s + 0.5, t + 0.5)
        };
        const K: usize = 8;
        let bin = |(s, t): (f64, f64)| {
            let i = ((s * K as f64) as usize).min(K - 1);
            let j = ((t * K as f64) as usize).min(K - 1);
            i * K + j
        };
        let q = 400;
        let mut weight = [0.0; K * K];
        for i in 0..q {
            for j in 0..q {
                let (s, t) = ((i as f64 + 0.5) / q as f64, (j as f64 + 0.5) / q as f64);
                let p = [
                    (s - 0.5) * a[0] + (t - 0.5) * b[0],
                    (s - 0.5) * a[1] + (t - 0.5) * b[1],
                ];
                if (0..SITES).all(|k| l.distance_2d(k, p) >= l.min_distance) {
                    weight[bin((s, t))] += 1.0;
                }
            }
        }
        let total: f64 = weight.iter().sum();
        let n = 20_000;
        let mut counts = [0usize; K * K];
        for p in drop_positions(n, &l, 5) {
            counts[bin(coords(p))] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&weight)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&c, &w)| {
                let e = n as f64 * w / total;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        // 99.9% point of chi-square with 63 degrees of freedom
        assert!(chi2 < 103.4, "chi2 = {chi2}");
    }
}
