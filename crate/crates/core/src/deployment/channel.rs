//! Clustered LOS-plus-scatter channel on the array geometry of
//! [`crate::beam`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{NetworkLayout, Point, SiteLink};
use crate::beam::{element_pattern, sector_pattern, UraConfig};
use crate::rng::{self, complex_normal, tag};
use crate::units::db_to_linear;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelModel {
    pub clusters: usize,
    /// Standard deviation of cluster azimuths around the LOS direction (rad).
    pub azimuth_spread: f64,
    pub elevation_spread: f64,
    /// Rician K for LOS links; NLOS links are pure scatter.
    pub k_factor_los_db: f64,
    pub shadowing_los_db: f64,
    pub shadowing_nlos_db: f64,
    /// `false` gives a deterministic single-ray LOS channel with no
    /// shadowing, used for geometric checks.
    pub scatter: bool,
    pub element_pattern: bool,
    /// Receive antennas at the user, combined by MRC.
    pub ue_antennas: usize,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            clusters: 10,
            azimuth_spread: 30f64.to_radians(),
            elevation_spread: 8f64.to_radians(),
            k_factor_los_db: 9.0,
            shadowing_los_db: 4.0,
            shadowing_nlos_db: 6.0,
            scatter: true,
            element_pattern: true,
            ue_antennas: 2,
        }
    }
}

impl ChannelModel {
    pub fn los_only() -> Self {
        Self {
            scatter: false,
            ue_antennas: 1,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub azimuth: f64,
    pub zenith: f64,
    pub gain: Complex64,
}

/// Rays around a LOS direction, one set per receive antenna. The sets
/// share angles; cluster gains are independent across antennas and the LOS
/// ray only changes phase. Amplitudes follow the Rician split with
/// `sum |gain|^2` equal to 1 in expectation.
pub fn draw_rays<R: Rng>(
    rng: &mut R,
    model: &ChannelModel,
    los_dir: (f64, f64),
    los: bool,
) -> Vec<Vec<Ray>> {
    let (az0, zen0) = los_dir;
    let rx = model.ue_antennas.max(1);
    if !model.scatter {
        let ray = Ray {
            azimuth: az0,
            zenith: zen0,
            gain: Complex64::new(1.0, 0.0),
        };
        return vec![vec![ray]; rx];
    }
    let k = if los {
        db_to_linear(model.k_factor_los_db)
    } else {
        0.0
    };
    let scatter_amp = (1.0 / (k + 1.0)).sqrt() / (model.clusters.max(1) as f64).sqrt();
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let angles: Vec<(f64, f64)> = (0..model.clusters)
        .map(|_| {
            let az = super::wrap_angle(az0 + model.azimuth_spread * unit.sample(rng));
            let zen = (zen0 + model.elevation_spread * unit.sample(rng)).clamp(0.0, PI);
            (az, zen)
        })
        .collect();
    (0..rx)
        .map(|r| {
            let mut rays = Vec::with_capacity(model.clusters + 1);
            if k > 0.0 {
                let phase = if r == 0 {
                    0.0
                } else {
                    rng.random_range(0.0..2.0 * PI)
                };
                rays.push(Ray {
                    azimuth: az0,
                    zenith: zen0,
                    gain: Complex64::from_polar((k / (k + 1.0)).sqrt(), phase),
                });
            }
            rays.extend(angles.iter().map(|&(azimuth, zenith)| Ray {
                azimuth,
                zenith,
                gain: complex_normal(rng, 1.0) * scatter_amp,
            }));
            rays
        })
        .collect()
}

/// `sum_r gain_r sqrt(G_elem(r)) a(r)` over the array, without path loss.
pub fn array_response(array: &UraConfig, rays: &[Ray], with_element: bool) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); array.element_count()];
    for r in rays {
        let g = if with_element {
            db_to_linear(element_pattern(r.azimuth, r.zenith)).sqrt()
        } else {
            1.0
        };
        let amp = r.gain * g;
        for (hi, a) in h.iter_mut().zip(array.steering_phasor(r.azimuth, r.zenith)) {
            *hi += amp * a;
        }
    }
    h
}

/// Channel of one user toward one sector, through the FD-MIMO array and
/// through the legacy sector antenna, one entry per receive antenna. Both
/// see the same rays.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub h: Vec<Vec<Complex64>>,
    pub legacy: Vec<Complex64>,
}

/// Draw the channel between `user` (at `pos`, with large-scale `link` to
/// the sector's site) and `sector`. The stream is keyed by
/// `(seed, user_id, sector)`.
#[allow(clippy::too_many_arguments)]
pub fn channel_sample(
    layout: &NetworkLayout,
    model: &ChannelModel,
    array: &UraConfig,
    pos: Point,
    link: &SiteLink,
    user_id: u32,
    sector: usize,
    seed: u64,
) -> ChannelSample {
    let mut r = rng::stream(seed, &[tag::CHANNEL, user_id as u64, sector as u64]);
    let dir = layout.sector_angles(sector, pos);
    let amp = link.gain().sqrt();
    let mut out = ChannelSample {
        h: Vec::new(),
        legacy: Vec::new(),
    };
    for rays in draw_rays(&mut r, model, dir, link.los) {
        let mut h = array_response(array, &rays, model.element_pattern);
        for x in h.iter_mut() {
            *x *= amp;
        }
        out.h.push(h);
        out.legacy.push(
            rays.iter()
                .map(|ray| ray.gain * db_to_linear(sector_pattern(ray.azimuth)).sqrt())
                .sum::<Complex64>()
                * amp,
        );
    }
    out
}
