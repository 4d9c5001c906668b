//! Campaign orchestration: configuration, BLER table caching, drops x TTIs
//! x schemes, and the metric files written at the end of a run.
//!
//! A configuration is a TOML file layered over a named profile: every key
//! the file leaves out comes from the profile. The seed has no default and
//! must be given either in the file or by the caller.
//!
//! Drops are the unit of parallel work. Every drop draws from streams
//! derived from `(seed, drop index)`, per-drop results are collected in drop
//! order, and aggregates are built from integer totals or sorted samples,
//! so the emitted files do not depend on the number of worker threads.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::abstraction::{build_threshold_table, AlThresholdTable};
use crate::beam::{BeamSet, UraConfig, VerticalTerm};
use crate::control::{AggregationLevel, PLACEMENT_LOG_HEADER};
use crate::deployment::{simulate_drop, ChannelModel, NetworkLayout, SinrReport};
use crate::error::{Error, Result};
use crate::link::bler::simulate_all;
use crate::link::{BerPair, BlerCurve, ChannelKind};
use crate::rng::{derive_seed, tag};
use crate::sched::{
    classify_user, run_multi_tti, CssLoad, EpdcchConfig, QueuePolicy, RunTally, SchedParams,
    Scheme, SchemeSummary,
};

pub const PROFILES: [&str; 2] = ["paper", "quick"];

/// Bumped whenever an output schema changes.
pub const OUTPUT_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamGridConfig {
    /// Co-polarized elements per column.
    pub rows: usize,
    pub cols: usize,
    pub polarizations: usize,
    pub azimuths_deg: Vec<f64>,
    /// Measured from zenith.
    pub zeniths_deg: Vec<f64>,
    pub vertical_term: VerticalTerm,
}

impl BeamGridConfig {
    pub fn build(&self, layout: &NetworkLayout) -> Result<BeamSet> {
        let array = UraConfig {
            vertical_term: self.vertical_term,
            ..UraConfig::half_wavelength(
                1,
                1,
                self.rows,
                self.cols,
                self.polarizations,
                layout.carrier_hz,
            )
        };
        let rad = |v: &[f64]| v.iter().map(|d| d.to_radians()).collect::<Vec<_>>();
        if self.azimuths_deg.is_empty() || self.zeniths_deg.is_empty() {
            return Err(Error::Config(
                "beam grid needs at least one azimuth and one zenith".into(),
            ));
        }
        BeamSet::grid(
            array,
            &rad(&self.azimuths_deg),
            &rad(&self.zeniths_deg),
            layout.tx_power_mw(),
        )
    }

    pub fn beam_count(&self) -> usize {
        self.azimuths_deg.len() * self.zeniths_deg.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulerConfig {
    /// Downlink CCEs per TTI.
    pub n_cce: usize,
    /// Aggregation levels (in CCEs) of the common DCIs sent every TTI.
    pub css_levels: Vec<usize>,
    pub policy: QueuePolicy,
    pub epdcch_prbs: usize,
    pub ecces_per_prb: usize,
    pub epdcch_layers: usize,
}

impl SchedulerConfig {
    pub fn params(&self, beams: usize) -> Result<SchedParams> {
        let levels = self
            .css_levels
            .iter()
            .map(|&n| {
                AggregationLevel::from_cces(n)
                    .ok_or_else(|| Error::Config(format!("css level {n} is not 1, 2, 4 or 8")))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = SchedParams {
            n_cce: self.n_cce,
            beams,
            css: CssLoad { levels },
            epdcch: EpdcchConfig {
                prbs: self.epdcch_prbs,
                ecces_per_prb: self.ecces_per_prb,
                layers: self.epdcch_layers,
            },
            policy: self.policy,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlerConfig {
    pub channel: ChannelKind,
    pub sinr_min_db: f64,
    pub sinr_max_db: f64,
    pub step_db: f64,
    pub trials: usize,
    pub seed: u64,
    /// BLER the aggregation-level thresholds are read at.
    pub target: f64,
    /// Empty means `bler_cache` inside the output directory.
    pub cache_dir: String,
}

impl BlerConfig {
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.sinr_max_db - self.sinr_min_db) / self.step_db).round() as usize;
        (0..=n)
            .map(|i| self.sinr_min_db + self.step_db * i as f64)
            .collect()
    }

    /// Identifies the curves this configuration produces; the cache
    /// location does not take part.
    pub fn cache_key(&self) -> String {
        let canonical = BlerConfig {
            cache_dir: String::new(),
            ..self.clone()
        };
        let json = serde_json::to_string(&canonical).expect("serializable");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_db > 0.0) || !(self.sinr_max_db > self.sinr_min_db) {
            return Err(Error::Config(
                "BLER grid needs step_db > 0 and max > min".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::Config("BLER trials must be positive".into()));
        }
        if !(self.target > 0.0 && self.target < 1.0) {
            return Err(Error::Config("BLER target must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub profile: String,
    pub seed: u64,
    pub n_drops: usize,
    pub n_tti: u64,
    pub users_per_sector: usize,
    pub schemes: Vec<Scheme>,
    /// Write every placement of every TTI under `placements/`.
    pub placement_log: bool,
    pub layout: NetworkLayout,
    pub channel: ChannelModel,
    pub beams: BeamGridConfig,
    pub scheduler: SchedulerConfig,
    pub bler: BlerConfig,
}

/// Built-in profile with `seed` set to 0.
pub fn profile(name: &str) -> Result<CampaignConfig> {
    let paper = CampaignConfig {
        profile: "paper".into(),
        seed: 0,
        n_drops: 10,
        n_tti: 1000,
        users_per_sector: 500,
        schemes: Scheme::ALL.to_vec(),
        placement_log: false,
        layout: NetworkLayout::paper(),
        channel: ChannelModel::default(),
        beams: BeamGridConfig {
            rows: 4,
            cols: 8,
            polarizations: 2,
            azimuths_deg: vec![-33.75, -11.25, 11.25, 33.75],
            zeniths_deg: vec![101.25, 123.75],
            vertical_term: VerticalTerm::AzimuthCoupled,
        },
        scheduler: SchedulerConfig {
            n_cce: 42,
            css_levels: vec![8, 4],
            policy: QueuePolicy::SkipBlocked,
            epdcch_prbs: 4,
            ecces_per_prb: 4,
            epdcch_layers: 4,
        },
        bler: BlerConfig {
            channel: ChannelKind::Awgn,
            sinr_min_db: -14.0,
            sinr_max_db: 10.0,
            step_db: 0.5,
            trials: 2000,
            seed: 1,
            target: crate::abstraction::BLER_TARGET,
            cache_dir: String::new(),
        },
    };
    match name {
        "paper" => Ok(paper),
        // small enough for smoke tests
        "quick" => Ok(CampaignConfig {
            profile: "quick".into(),
            n_drops: 2,
            n_tti: 50,
            users_per_sector: 100,
            placement_log: true,
            bler: BlerConfig {
                step_db: 1.0,
                trials: 300,
                ..paper.bler
            },
            ..paper
        }),
        _ => Err(Error::Config(format!(
            "unknown profile `{name}` (known: {})",
            PROFILES.join(", ")
        ))),
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn parse_error(text: &str, e: &toml::de::Error) -> Error {
    let line = e.span().map_or(0, |s| {
        text[..s.start.min(text.len())].matches('\n').count() + 1
    });
    Error::Parse {
        line,
        msg: e.message().to_string(),
    }
}

impl CampaignConfig {
    /// Resolve `text` over its profile. `profile` and `seed` take precedence
    /// over the file.
    pub fn from_toml(text: &str, profile_name: Option<&str>, seed: Option<u64>) -> Result<Self> {
        let mut user: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
        let name = match (profile_name, user.get("profile")) {
            (Some(p), _) => p.to_string(),
            (None, Some(toml::Value::String(p))) => p.clone(),
            (None, Some(_)) => return Err(Error::Config("`profile` must be a string".into())),
            (None, None) => "paper".to_string(),
        };
        let mut table =
            toml::Table::try_from(profile(&name)?).map_err(|e| Error::Config(e.to_string()))?;
        table.remove("seed");
        user.insert("profile".into(), toml::Value::String(name));
        if let Some(s) = seed {
            let s =
                i64::try_from(s).map_err(|_| Error::Config("seed must fit in 63 bits".into()))?;
            user.insert("seed".into(), toml::Value::Integer(s));
        }
        merge(&mut table, user);
        let cfg: CampaignConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, profile_name: Option<&str>, seed: Option<u64>) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, profile_name, seed)
    }

    /// Built-in profile with the given seed.
    pub fn from_profile(name: &str, seed: u64) -> Result<Self> {
        let cfg = CampaignConfig {
            seed,
            ..profile(name)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !PROFILES.contains(&self.profile.as_str()) {
            return Err(Error::Config(format!("unknown profile `{}`", self.profile)));
        }
        if self.n_tti == 0 || self.users_per_sector == 0 {
            return Err(Error::Config(
                "n_tti and users_per_sector must be positive".into(),
            ));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes selected".into()));
        }
        let mut s = self.schemes.clone();
        s.sort();
        s.dedup();
        if s.len() != self.schemes.len() {
            return Err(Error::Config("schemes listed twice".into()));
        }
        if self.schemes.contains(&Scheme::Optimal) && self.scheduler.n_cce > 128 {
            return Err(Error::Config(
                "the optimal scheduler supports at most 128 CCEs".into(),
            ));
        }
        self.layout.validate()?;
        self.beams.build(&self.layout)?;
        self.scheduler.params(self.beams.beam_count())?;
        self.bler.validate()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn cache_dir(&self, out: &Path) -> PathBuf {
        if self.bler.cache_dir.is_empty() {
            out.join("bler_cache")
        } else {
            PathBuf::from(&self.bler.cache_dir)
        }
    }
}

/// Run `f` on a pool of `threads` workers; 0 uses the global pool.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(f))
}

pub fn generate_curves(bler: &BlerConfig) -> Vec<BlerCurve> {
    simulate_all(&bler.grid(), bler.channel, bler.trials, bler.seed)
}

/// Curves for `bler`, read from `dir` when cached there and simulated (then
/// cached) otherwise. An unreadable cache entry is regenerated.
pub fn load_or_generate_curves(bler: &BlerConfig, dir: &Path) -> Result<Vec<BlerCurve>> {
    let path = dir.join(format!("bler_{}.json", bler.cache_key()));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(curves) = serde_json::from_str::<Vec<BlerCurve>>(&text) {
            return Ok(curves);
        }
    }
    let curves = generate_curves(bler);
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_string(&curves)?).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(curves)
}

pub fn thresholds_from(bler: &BlerConfig, curves: &[BlerCurve]) -> AlThresholdTable {
    build_threshold_table(curves, bler.target, &format!("bler_{}", bler.cache_key()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SinrSeries {
    Legacy,
    OneBeam,
    TwoBeam,
    AllBeam,
}

impl SinrSeries {
    pub const ALL: [SinrSeries; 4] = [Self::Legacy, Self::OneBeam, Self::TwoBeam, Self::AllBeam];

    pub fn name(self) -> &'static str {
        match self {
            Self::Legacy => "legacy",
            Self::OneBeam => "one_beam",
            Self::TwoBeam => "two_beam",
            Self::AllBeam => "all_beam",
        }
    }

    fn of(self, r: &SinrReport) -> f64 {
        match self {
            Self::Legacy => r.legacy_sinr_db,
            Self::OneBeam => r.sinr_one_beam_db,
            Self::TwoBeam => r.sinr_two_beam_db,
            Self::AllBeam => r.sinr_all_beams_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeMetrics {
    pub summary: SchemeSummary,
    /// One tally per drop, in drop order.
    pub drops: Vec<RunTally>,
    /// Users per CCE of every TTI, sorted.
    pub users_per_cce: Vec<f64>,
    /// Users the scheme can never serve, over all drops.
    pub outage: usize,
}

impl SchemeMetrics {
    /// Average users per TTI of each drop.
    pub fn per_drop_users_per_tti(&self) -> Vec<f64> {
        self.drops
            .iter()
            .map(|t| {
                t.users_per_tti.iter().sum::<usize>() as f64 / t.users_per_tti.len().max(1) as f64
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsBundle {
    pub config: CampaignConfig,
    pub thresholds: AlThresholdTable,
    /// Sorted finite samples per series, pooled over drops.
    pub sinr: Vec<(SinrSeries, Vec<f64>)>,
    /// In config order; empty when there are no drops.
    pub schemes: Vec<SchemeMetrics>,
    /// Placement log of each drop, when enabled.
    pub placement_logs: Vec<Vec<u8>>,
    pub users_dropped: usize,
}

impl MetricsBundle {
    pub fn scheme(&self, s: Scheme) -> Option<&SchemeMetrics> {
        self.schemes.iter().find(|m| m.summary.scheme == s)
    }

    pub fn samples(&self, s: SinrSeries) -> &[f64] {
        self.sinr
            .iter()
            .find(|(k, _)| *k == s)
            .map_or(&[][..], |(_, v)| v.as_slice())
    }

    /// Share of users strictly above `db`.
    pub fn fraction_above(&self, s: SinrSeries, db: f64) -> f64 {
        let v = self.samples(s);
        v.iter().filter(|&&x| x > db).count() as f64 / v.len().max(1) as f64
    }

    /// Mean of the dB values.
    pub fn mean_db(&self, s: SinrSeries) -> f64 {
        let v = self.samples(s);
        v.iter().sum::<f64>() / v.len().max(1) as f64
    }
}

struct DropOutcome {
    reports: Vec<SinrReport>,
    tallies: Vec<RunTally>,
    log: Vec<u8>,
}

fn run_drop(
    cfg: &CampaignConfig,
    beams: &BeamSet,
    params: &SchedParams,
    table: &AlThresholdTable,
    d: usize,
) -> Result<DropOutcome> {
    let seed = derive_seed(cfg.seed, &[tag::DROP, d as u64]);
    let reports = simulate_drop(&cfg.layout, &cfg.channel, beams, cfg.users_per_sector, seed)?;
    let states: Vec<_> = reports.iter().map(|r| classify_user(r, table)).collect();
    let mut log = Vec::new();
    let mut tallies = Vec::with_capacity(cfg.schemes.len());
    for &scheme in &cfg.schemes {
        let run = run_multi_tti(&states, scheme, params, cfg.n_tti)?;
        if cfg.placement_log {
            for t in &run.ttis {
                t.write_log(&mut log).expect("writing to memory");
            }
        }
        tallies.push(RunTally::of(&run));
    }
    Ok(DropOutcome {
        reports,
        tallies,
        log,
    })
}

/// Simulate every drop of `cfg` with a given threshold table. No files are
/// touched.
pub fn simulate_campaign(cfg: &CampaignConfig, table: &AlThresholdTable) -> Result<MetricsBundle> {
    cfg.validate()?;
    let beams = cfg.beams.build(&cfg.layout)?;
    let params = cfg.scheduler.params(beams.len())?;
    let drops = (0..cfg.n_drops)
        .into_par_iter()
        .map(|d| run_drop(cfg, &beams, &params, table, d))
        .collect::<Result<Vec<_>>>()?;

    let sinr = SinrSeries::ALL
        .iter()
        .map(|&s| {
            let mut v: Vec<f64> = drops
                .iter()
                .flat_map(|d| d.reports.iter().map(|r| s.of(r)))
                .filter(|x| x.is_finite())
                .collect();
            v.sort_by(f64::total_cmp);
            (s, v)
        })
        .collect();
    let schemes = if drops.is_empty() {
        Vec::new()
    } else {
        cfg.schemes
            .iter()
            .enumerate()
            .map(|(i, &scheme)| {
                let tallies: Vec<RunTally> = drops.iter().map(|d| d.tallies[i].clone()).collect();
                let denom = params.denominator(scheme) as f64;
                let mut users_per_cce: Vec<f64> = tallies
                    .iter()
                    .flat_map(|t| &t.users_per_tti)
                    .map(|&u| u as f64 / denom)
                    .collect();
                users_per_cce.sort_by(f64::total_cmp);
                SchemeMetrics {
                    summary: SchemeSummary::from_tallies(scheme, &tallies, &params),
                    outage: tallies.iter().map(|t| t.outage).sum(),
                    drops: tallies,
                    users_per_cce,
                }
            })
            .collect()
    };
    Ok(MetricsBundle {
        config: cfg.clone(),
        thresholds: table.clone(),
        sinr,
        schemes,
        users_dropped: drops.iter().map(|d| d.reports.len()).sum(),
        placement_logs: drops
            .into_iter()
            .map(|d| d.log)
            .filter(|l| !l.is_empty())
            .collect(),
    })
}

/// Validate, build the threshold table (through the cache), simulate and
/// write every output file under `out`.
pub fn run_campaign(cfg: &CampaignConfig, out: &Path) -> Result<MetricsBundle> {
    cfg.validate()?;
    let curves = load_or_generate_curves(&cfg.bler, &cfg.cache_dir(out))?;
    let table = thresholds_from(&cfg.bler, &curves);
    let bundle = simulate_campaign(cfg, &table)?;
    emit_metrics(&bundle, out)?;
    Ok(bundle)
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn manifest(bundle: &MetricsBundle) -> serde_json::Value {
    serde_json::json!({
        "profile": bundle.config.profile,
        "seed": bundle.config.seed,
        "threshold_table": bundle.thresholds,
        "config_hash": bundle.config.hash(),
        "versions": {
            "bfpdcch": env!("CARGO_PKG_VERSION"),
            "output_format": OUTPUT_FORMAT,
        },
    })
}

/// Write the metric CSVs, the summary JSONL, the resolved config and the
/// manifest into `dir`.
pub fn emit_metrics(bundle: &MetricsBundle, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    write_file(&dir.join("sinr_cdf.csv"), |w| {
        writeln!(w, "series,sinr_db,cdf")?;
        for (s, v) in &bundle.sinr {
            let n = v.len() as f64;
            for (i, x) in v.iter().enumerate() {
                writeln!(w, "{},{x:.4},{}", s.name(), (i + 1) as f64 / n)?;
            }
        }
        Ok(())
    })?;

    write_file(&dir.join("al_hist.csv"), |w| {
        writeln!(w, "scheme,al,fraction")?;
        for m in &bundle.schemes {
            for (al, f) in &m.summary.al_histogram {
                writeln!(w, "{},{al},{f}", m.summary.scheme)?;
            }
        }
        Ok(())
    })?;

    write_file(&dir.join("users_per_cce.csv"), |w| {
        writeln!(w, "scheme,value,cdf")?;
        for m in &bundle.schemes {
            let v = &m.users_per_cce;
            let n = v.len() as f64;
            for (i, x) in v.iter().enumerate() {
                // one row per distinct value, at its last occurrence
                if v.get(i + 1) != Some(x) {
                    writeln!(w, "{},{x},{}", m.summary.scheme, (i + 1) as f64 / n)?;
                }
            }
        }
        Ok(())
    })?;

    write_file(&dir.join("summary.csv"), |w| {
        writeln!(w, "scheme,avg_users_per_tti")?;
        for m in &bundle.schemes {
            writeln!(w, "{},{}", m.summary.scheme, m.summary.avg_users_per_tti)?;
        }
        Ok(())
    })?;

    write_file(&dir.join("summary.jsonl"), |w| {
        for m in &bundle.schemes {
            writeln!(w, "{}", m.summary.to_json_line())?;
        }
        Ok(())
    })?;

    write_file(&dir.join("outage.csv"), |w| {
        writeln!(w, "scheme,outage_users,users_dropped")?;
        for m in &bundle.schemes {
            writeln!(
                w,
                "{},{},{}",
                m.summary.scheme, m.outage, bundle.users_dropped
            )?;
        }
        Ok(())
    })?;

    write_file(&dir.join("thresholds.csv"), |w| {
        bundle.thresholds.write_csv(w)
    })?;

    if !bundle.placement_logs.is_empty() {
        let logs = dir.join("placements");
        fs::create_dir_all(&logs).map_err(|e| Error::io(&logs, e))?;
        for (d, log) in bundle.placement_logs.iter().enumerate() {
            write_file(&logs.join(format!("drop_{d:04}.csv")), |w| {
                writeln!(w, "{PLACEMENT_LOG_HEADER}")?;
                w.write_all(log)
            })?;
        }
    }

    write_file(&dir.join("config.toml"), |w| {
        w.write_all(bundle.config.to_toml().as_bytes())
    })?;
    write_file(&dir.join("manifest.json"), |w| {
        writeln!(
            w,
            "{}",
            serde_json::to_string_pretty(&manifest(bundle)).expect("json")
        )
    })
}

pub fn write_bler_csv<W: Write>(mut out: W, curves: &[BlerCurve]) -> std::io::Result<()> {
    writeln!(out, "al,sinr_db,bler")?;
    for c in curves {
        for (s, b) in &c.points {
            writeln!(out, "{},{s},{b}", c.al)?;
        }
    }
    Ok(())
}

pub fn write_ber_csv<W: Write>(mut out: W, pairs: &[BerPair]) -> std::io::Result<()> {
    writeln!(out, "alpha,snr_db,ber_estimation,ber_abstraction")?;
    for p in pairs {
        writeln!(
            out,
            "{},{},{},{}",
            p.alpha, p.snr_db, p.ber_estimation, p.ber_abstraction
        )?;
    }
    Ok(())
}
