//! Beam synthesis for a uniform rectangular array (URA).
//!
//! The array factor is evaluated as
//!
//! ```text
//! AF = sum_m sum_n exp(j m (k dz u_z + beta_z)) exp(j n (k dy u_y + beta_y))
//! ```
//!
//! with `u_y = sin(phi) sin(theta)`. The vertical direction cosine `u_z`
//! defaults to `cos(phi) sin(theta)`; [`VerticalTerm::Conventional`] switches
//! it to the textbook `cos(theta)`. Channel steering phasors in
//! [`crate::deployment`] use the same geometry, so beams and channels always
//! agree on what "pointing at a direction" means.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::linear_to_db;

/// How the vertical (z-axis) phase progression depends on direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VerticalTerm {
    /// `cos(phi) sin(theta)`.
    #[default]
    AzimuthCoupled,
    /// `cos(theta)`.
    Conventional,
}

/// Antenna panel geometry `(Mg, Ng, M, N, P)` plus spacing and wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UraConfig {
    pub panels_vertical: usize,
    pub panels_horizontal: usize,
    /// Co-polarized elements per column (M).
    pub rows: usize,
    /// Co-polarized elements per row (N).
    pub cols: usize,
    /// 1 (single) or 2 (cross polarized).
    pub polarizations: usize,
    pub spacing_vertical: f64,
    pub spacing_horizontal: f64,
    pub wavelength: f64,
    pub vertical_term: VerticalTerm,
}

impl UraConfig {
    /// Half-wavelength spaced array at `carrier_hz`.
    pub fn half_wavelength(
        panels_vertical: usize,
        panels_horizontal: usize,
        rows: usize,
        cols: usize,
        polarizations: usize,
        carrier_hz: f64,
    ) -> Self {
        let wavelength = crate::units::SPEED_OF_LIGHT / carrier_hz;
        Self {
            panels_vertical,
            panels_horizontal,
            rows,
            cols,
            polarizations,
            spacing_vertical: wavelength / 2.0,
            spacing_horizontal: wavelength / 2.0,
            wavelength,
            vertical_term: VerticalTerm::default(),
        }
    }

    /// The (1, 1, 4, 8, 2) panel at 2.4 GHz.
    pub fn paper_panel() -> Self {
        Self::half_wavelength(1, 1, 4, 8, 2, 2.4e9)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArray(msg.to_string()));
        if self.rows == 0 || self.cols == 0 {
            return bad("M and N must be at least 1");
        }
        if self.panels_vertical == 0 || self.panels_horizontal == 0 {
            return bad("panel counts must be at least 1");
        }
        if !(self.polarizations == 1 || self.polarizations == 2) {
            return bad("polarization must be 1 or 2");
        }
        if !(self.spacing_vertical > 0.0 && self.spacing_horizontal > 0.0) {
            return bad("element spacing must be positive");
        }
        if !(self.wavelength > 0.0) {
            return bad("wavelength must be positive");
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Elements in one co-polarized aperture (M·N).
    pub fn aperture_len(&self) -> usize {
        self.rows * self.cols
    }

    /// Copies of the aperture (panels × polarizations).
    pub fn replicas(&self) -> usize {
        self.panels_vertical * self.panels_horizontal * self.polarizations
    }

    /// Total logical antenna elements Mg·Ng·M·N·P.
    pub fn element_count(&self) -> usize {
        self.aperture_len() * self.replicas()
    }

    /// Direction cosines `(u_y, u_z)` used in the phase progression.
    pub fn direction_cosines(&self, azimuth: f64, elevation: f64) -> (f64, f64) {
        let u_y = azimuth.sin() * elevation.sin();
        let u_z = match self.vertical_term {
            VerticalTerm::AzimuthCoupled => azimuth.cos() * elevation.sin(),
            VerticalTerm::Conventional => elevation.cos(),
        };
        (u_y, u_z)
    }

    /// Per-element phase increments `(psi_y, psi_z)` seen from a direction.
    fn spatial_phase(&self, azimuth: f64, elevation: f64) -> (f64, f64) {
        let k = self.wavenumber();
        let (u_y, u_z) = self.direction_cosines(azimuth, elevation);
        (
            k * self.spacing_horizontal * u_y,
            k * self.spacing_vertical * u_z,
        )
    }

    /// Array steering phasor toward a direction, one entry per logical
    /// element. Entry `(m, n)` of each replica is
    /// `exp(j (m psi_z + n psi_y))`; replicas are stacked.
    pub fn steering_phasor(&self, azimuth: f64, elevation: f64) -> Vec<Complex64> {
        let (psi_y, psi_z) = self.spatial_phase(azimuth, elevation);
        let aperture = separable_phasor(self.rows, self.cols, psi_z, psi_y);
        aperture.repeat(self.replicas())
    }
}

fn separable_phasor(rows: usize, cols: usize, psi_row: f64, psi_col: f64) -> Vec<Complex64> {
    let col: Vec<Complex64> = (0..cols)
        .map(|n| Complex64::from_polar(1.0, n as f64 * psi_col))
        .collect();
    let mut out = Vec::with_capacity(rows * cols);
    for m in 0..rows {
        let r = Complex64::from_polar(1.0, m as f64 * psi_row);
        out.extend(col.iter().map(|c| r * c));
    }
    out
}

/// Steering direction: azimuth in [-pi, pi], elevation (from zenith) in [0, pi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringDirection {
    pub azimuth: f64,
    pub elevation: f64,
}

impl SteeringDirection {
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        debug_assert!((-PI..=PI).contains(&azimuth));
        debug_assert!((0.0..=PI).contains(&elevation));
        Self { azimuth, elevation }
    }

    /// Horizontal-plane direction (`theta = pi/2`).
    pub fn horizontal(azimuth: f64) -> Self {
        Self::new(azimuth, PI / 2.0)
    }
}

/// Phase excitations `(beta_y, beta_z)` that cancel the per-element phase
/// progression at `dir`, so the array factor peaks there at `M·N`.
pub fn phase_excitations(cfg: &UraConfig, dir: SteeringDirection) -> (f64, f64) {
    let (psi_y, psi_z) = cfg.spatial_phase(dir.azimuth, dir.elevation);
    (-psi_y, -psi_z)
}

/// Array factor of one co-polarized aperture with excitations
/// `(beta_y, beta_z)`, evaluated at `(azimuth, elevation)`.
///
/// The double sum is separable, so it is computed as the product of the
/// vertical and horizontal geometric sums.
pub fn array_factor(
    cfg: &UraConfig,
    beta_y: f64,
    beta_z: f64,
    azimuth: f64,
    elevation: f64,
) -> Complex64 {
    let (psi_y, psi_z) = cfg.spatial_phase(azimuth, elevation);
    let vertical: Complex64 = (0..cfg.rows)
        .map(|m| Complex64::from_polar(1.0, m as f64 * (psi_z + beta_z)))
        .sum();
    let horizontal: Complex64 = (0..cfg.cols)
        .map(|n| Complex64::from_polar(1.0, n as f64 * (psi_y + beta_y)))
        .sum();
    vertical * horizontal
}

/// One steered beam. `weights` covers every logical element (replicas
/// stacked like [`UraConfig::steering_phasor`]) and already carries the
/// power normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    /// 1-based.
    pub id: usize,
    pub direction: SteeringDirection,
    pub phase_y: f64,
    pub phase_z: f64,
    pub weights: Vec<Complex64>,
}

impl Beam {
    pub fn power(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum()
    }

    /// Complex gain `h·w` of a channel vector through this beam.
    pub fn project(&self, channel: &[Complex64]) -> Complex64 {
        debug_assert_eq!(channel.len(), self.weights.len());
        channel.iter().zip(&self.weights).map(|(h, w)| h * w).sum()
    }
}

/// Weights for beam `beam_index` (1-based, out of `beam_count`) steered at
/// `dir`, scaled so the beam radiates `budget / beam_count`.
///
/// Entry `(m, n)` is `exp(j (m beta_z + n beta_y))`, the conjugate of the
/// steering phasor at `dir`: the beam is matched to its own direction.
pub fn beam_weights(
    cfg: &UraConfig,
    beam_index: usize,
    beam_count: usize,
    dir: SteeringDirection,
    budget: f64,
) -> Result<Beam> {
    cfg.validate()?;
    if beam_index == 0 || beam_index > beam_count {
        return Err(Error::BeamIndex {
            index: beam_index,
            count: beam_count,
        });
    }
    let (phase_y, phase_z) = phase_excitations(cfg, dir);
    let scale = (budget / beam_count as f64 / cfg.element_count() as f64).sqrt();
    let weights = separable_phasor(cfg.rows, cfg.cols, phase_z, phase_y)
        .into_iter()
        .map(|w| w * scale)
        .collect::<Vec<_>>()
        .repeat(cfg.replicas());
    Ok(Beam {
        id: beam_index,
        direction: dir,
        phase_y,
        phase_z,
        weights,
    })
}

/// Precode one resource-element symbol onto every antenna element.
pub fn precode(symbol: Complex64, beam: &Beam) -> Vec<Complex64> {
    beam.weights.iter().map(|w| w * symbol).collect()
}

/// The P beams simultaneously active in a sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSet {
    pub array: UraConfig,
    pub beams: Vec<Beam>,
    /// Total transmit power shared by all beams (linear units).
    pub budget: f64,
}

impl BeamSet {
    pub fn new(array: UraConfig, directions: &[SteeringDirection], budget: f64) -> Result<Self> {
        array.validate()?;
        if directions.is_empty() {
            return Err(Error::InvalidArray(
                "a beam set needs at least one beam".into(),
            ));
        }
        let count = directions.len();
        let beams = directions
            .iter()
            .enumerate()
            .map(|(i, &d)| beam_weights(&array, i + 1, count, d, budget))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            array,
            beams,
            budget,
        })
    }

    /// Grid of beams: for each azimuth, one beam per elevation
    /// (elevation varies fastest, so beams `2i-1, 2i` share an azimuth).
    pub fn grid(
        array: UraConfig,
        azimuths: &[f64],
        elevations: &[f64],
        budget: f64,
    ) -> Result<Self> {
        let dirs: Vec<_> = azimuths
            .iter()
            .flat_map(|&az| {
                elevations
                    .iter()
                    .map(move |&el| SteeringDirection::new(az, el))
            })
            .collect();
        Self::new(array, &dirs, budget)
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.beams.iter().map(Beam::power).sum()
    }

    /// `h·w_j` for every beam.
    pub fn project(&self, channel: &[Complex64]) -> Vec<Complex64> {
        self.beams.iter().map(|b| b.project(channel)).collect()
    }
}

/// Normalized azimuth cut of one beam.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamPattern {
    pub beam_id: usize,
    pub azimuth: Vec<f64>,
    pub gain_db: Vec<f64>,
}

impl BeamPattern {
    /// Highest lobe outside the main lobe, in dB relative to the peak.
    /// `None` when the cut has no side lobe.
    pub fn peak_side_lobe_db(&self) -> Option<f64> {
        let g = &self.gain_db;
        let peak = g
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)?;
        // main lobe extends to the first local minimum on either side
        let mut lo = peak;
        while lo > 0 && g[lo - 1] <= g[lo] {
            lo -= 1;
        }
        let mut hi = peak;
        while hi + 1 < g.len() && g[hi + 1] <= g[hi] {
            hi += 1;
        }
        g[..lo]
            .iter()
            .chain(&g[hi + 1..])
            .copied()
            .fold(None, |acc: Option<f64>, x| {
                Some(acc.map_or(x, |a| a.max(x)))
            })
    }
}

/// Per-beam `|AF|^2` in dB over an azimuth cut at `elevation`, normalized
/// to each beam's peak on the grid. Weight amplitudes cancel in the
/// normalization, so only the beam phases matter.
pub fn radiation_pattern(
    beams: &BeamSet,
    azimuth_grid: &[f64],
    elevation: f64,
) -> Result<Vec<BeamPattern>> {
    if azimuth_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let cfg = &beams.array;
    let aperture = cfg.aperture_len();
    let out = beams
        .beams
        .iter()
        .map(|beam| {
            let w = &beam.weights[..aperture];
            let power: Vec<f64> = azimuth_grid
                .iter()
                .map(|&az| {
                    let (psi_y, psi_z) = cfg.spatial_phase(az, elevation);
                    let a = separable_phasor(cfg.rows, cfg.cols, psi_z, psi_y);
                    a.iter()
                        .zip(w)
                        .map(|(a, w)| a * w)
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .collect();
            let peak = power.iter().copied().fold(0.0, f64::max);
            let gain_db = power
                .iter()
                .map(|&p| {
                    if peak > 0.0 {
                        linear_to_db((p / peak).max(1e-30))
                    } else {
                        0.0
                    }
                })
                .collect();
            BeamPattern {
                beam_id: beam.id,
                azimuth: azimuth_grid.to_vec(),
                gain_db,
            }
        })
        .collect();
    Ok(out)
}

/// 3D element pattern (65° beamwidth, 30 dB floor, 8 dBi peak). Angles in
/// radians; `elevation` is measured from zenith.
pub fn element_pattern(azimuth: f64, elevation: f64) -> f64 {
    let theta_deg = elevation.to_degrees();
    let phi_deg = azimuth.to_degrees();
    let vertical = -(12.0 * ((theta_deg - 90.0) / 65.0).powi(2)).min(30.0);
    let horizontal = -(12.0 * (phi_deg / 65.0).powi(2)).min(30.0);
    8.0 - (-(vertical + horizontal)).min(30.0)
}

/// Legacy single-antenna sector pattern (70° beamwidth, 20 dB front-back,
/// 14 dBi peak), horizontal cut only.
pub fn sector_pattern(azimuth: f64) -> f64 {
    let phi_deg = azimuth.to_degrees();
    14.0 - (12.0 * (phi_deg / 70.0).powi(2)).min(20.0)
}

/// Azimuths (rad) of the sector's beam grid.
pub const GRID_AZIMUTHS: [f64; 4] = [-3.0 * PI / 16.0, -PI / 16.0, PI / 16.0, 3.0 * PI / 16.0];
/// Zenith angles (rad) of the sector's beam grid.
pub const GRID_ZENITHS: [f64; 2] = [9.0 * PI / 16.0, 11.0 * PI / 16.0];

impl BeamSet {
    /// Eight beams of the paper panel, four azimuths by two tilts.
    pub fn sector_grid(budget: f64) -> Result<Self> {
        Self::grid(
            UraConfig::paper_panel(),
            &GRID_AZIMUTHS,
            &GRID_ZENITHS,
            budget,
        )
    }

    /// Six horizontal beams at odd multiples of pi/20 around broadside.
    pub fn six_beam_fan(array: UraConfig, budget: f64) -> Result<Self> {
        let dirs: Vec<_> = [-5.0, -3.0, -1.0, 1.0, 3.0, 5.0]
            .iter()
            .map(|k| SteeringDirection::horizontal(k * PI / 20.0))
            .collect();
        Self::new(array, &dirs, budget)
    }
}

pub const PATTERN_CSV_HEADER: &str = "beam_id,azimuth_rad,gain_db";

pub fn write_pattern_csv<W: Write>(mut out: W, patterns: &[BeamPattern]) -> std::io::Result<()> {
    writeln!(out, "{PATTERN_CSV_HEADER}")?;
    for p in patterns {
        for (az, g) in p.azimuth.iter().zip(&p.gain_db) {
            writeln!(out, "{},{az:.6},{g:.4}", p.beam_id)?;
        }
    }
    Ok(())
}
