use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bfpdcch_core::beam::{radiation_pattern, write_pattern_csv, BeamSet, UraConfig};
use bfpdcch_core::campaign::{
    self, load_or_generate_curves, thresholds_from, with_threads, write_ber_csv, write_bler_csv,
    CampaignConfig,
};
use bfpdcch_core::link::estimation::horizontal_gap;
use bfpdcch_core::link::{estimation_vs_abstraction, AbstractionExperiment};
use bfpdcch_core::{selftest, Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "bfpdcch",
    version,
    about = "Beamformed PDCCH system-level simulator"
)]
struct Cli {
    /// Master seed; overrides the seed in a campaign config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Parameter profile (paper, quick).
    #[arg(long, global = true)]
    profile: Option<String>,
    /// Worker threads; 0 uses every core. Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate BLER curves of the DCI chain and derive AL thresholds.
    Bler,
    /// Dump beam radiation patterns.
    Beams,
    /// Compare explicit channel estimation with the SINR abstraction.
    ValidateAbstraction {
        /// QPSK symbols per point.
        #[arg(long, default_value_t = 200_000)]
        symbols: usize,
    },
    /// Run a full campaign from a config file.
    Campaign { config: PathBuf },
    /// Run the built-in invariant checks.
    Selftest,
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn profile_name(cli: &Cli) -> &str {
    cli.profile.as_deref().unwrap_or("paper")
}

fn bler(cli: &Cli) -> Result<()> {
    let mut cfg = campaign::profile(profile_name(cli))?.bler;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
    let cache = if cfg.cache_dir.is_empty() {
        cli.out.join("bler_cache")
    } else {
        PathBuf::from(&cfg.cache_dir)
    };
    let curves = load_or_generate_curves(&cfg, &cache)?;
    let table = thresholds_from(&cfg, &curves);
    let path = cli.out.join("bler.csv");
    write_bler_csv(create(&path)?, &curves).map_err(|e| Error::io(&path, e))?;
    let path = cli.out.join("thresholds.csv");
    table
        .write_csv(create(&path)?)
        .map_err(|e| Error::io(&path, e))?;
    for (al, t) in &table.thresholds {
        println!("{al}: {t:.2} dB");
    }
    Ok(())
}

fn beams(cli: &Cli) -> Result<()> {
    use std::f64::consts::{FRAC_PI_2, PI};
    fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
    let grid: Vec<f64> = (0..=1800)
        .map(|i| -FRAC_PI_2 + PI * i as f64 / 1800.0)
        .collect();
    let fan = BeamSet::six_beam_fan(UraConfig::paper_panel(), 1.0)?;
    let sector = BeamSet::sector_grid(1.0)?;
    let cut = sector.beams[0].direction.elevation;
    for (name, set, elevation) in [("six_beam", &fan, FRAC_PI_2), ("sector", &sector, cut)] {
        let pats = radiation_pattern(set, &grid, elevation)?;
        let path = cli.out.join(format!("{name}_patterns.csv"));
        write_pattern_csv(create(&path)?, &pats).map_err(|e| Error::io(&path, e))?;
        for p in &pats {
            let sll = p
                .peak_side_lobe_db()
                .map_or("none".into(), |s| format!("{s:.2} dB"));
            println!("{name} beam {}: peak side lobe {sll}", p.beam_id);
        }
    }
    Ok(())
}

fn validate_abstraction(cli: &Cli, symbols: usize) -> Result<()> {
    let exp = AbstractionExperiment {
        symbols,
        seed: cli.seed.unwrap_or(AbstractionExperiment::default().seed),
        ..Default::default()
    };
    fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
    let pairs = with_threads(cli.threads, || estimation_vs_abstraction(&exp))?;
    let path = cli.out.join("abstraction_ber.csv");
    write_ber_csv(create(&path)?, &pairs).map_err(|e| Error::io(&path, e))?;
    for &a in &exp.alphas {
        match horizontal_gap(&pairs, a, 1e-2) {
            Some(g) => println!("alpha {a}: gap {g:.3} dB at BER 1e-2"),
            None => println!("alpha {a}: BER 1e-2 not reached"),
        }
    }
    Ok(())
}

fn run_campaign(cli: &Cli, config: &Path) -> Result<()> {
    let cfg = CampaignConfig::load(config, cli.profile.as_deref(), cli.seed)?;
    let bundle = with_threads(cli.threads, || campaign::run_campaign(&cfg, &cli.out))??;
    for m in &bundle.schemes {
        println!(
            "{:<9} {:>7.2} users/TTI  {:.4} users/CCE  outage {}",
            m.summary.scheme, m.summary.avg_users_per_tti, m.summary.avg_users_per_cce, m.outage
        );
    }
    println!("wrote {}", cli.out.display());
    Ok(())
}

fn run_selftest(cli: &Cli) -> Result<bool> {
    let checks = with_threads(cli.threads, || selftest::run(cli.seed.unwrap_or(1)))?;
    for c in &checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Bler => bler(&cli).map(|()| true),
        Command::Beams => beams(&cli).map(|()| true),
        Command::ValidateAbstraction { symbols } => {
            validate_abstraction(&cli, *symbols).map(|()| true)
        }
        Command::Campaign { config } => run_campaign(&cli, config).map(|()| true),
        Command::Selftest => run_selftest(&cli),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
