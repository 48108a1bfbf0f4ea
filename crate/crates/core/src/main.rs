use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::warn;

use rformant::lts::Domain;
use rformant::report::{
    cmd_analyze, cmd_calibrate, cmd_cluster, cmd_compare, cmd_pvi, AnalysisConfig, Outcome, TimeUnit, CONFIG_ENV,
};
use rformant::stats::Metric;

#[derive(Parser)]
#[command(name = "rformant", version, about = "Rhythm formant analysis of speech recordings")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` config file (falls back to $RFORMANT_CONFIG)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "rformant-out")]
    out: PathBuf,
    /// Seconds of audio to analyze from the start of each clip
    #[arg(long, global = true)]
    trim: Option<f64>,
    /// Analysis band as LO:HI in Hz
    #[arg(long, global = true, value_parser = parse_band)]
    band: Option<(f64, f64)>,
    #[arg(long, global = true)]
    peaks: Option<usize>,
    #[arg(long, global = true)]
    bins: Option<usize>,
    #[arg(long, global = true)]
    metric: Option<Metric>,
    #[arg(long, global = true)]
    permutations: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for analyze (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, default_value = "ams")]
    domain: Domain,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze WAV files into per-clip reports, CSVs and SVG panels
    Analyze {
        #[arg(required = true)]
        wavs: Vec<PathBuf>,
    },
    /// Cross-domain correlation summaries and Mantel tests over reports
    Compare {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// UPGMA dendrogram of one domain's R-formant bins
    Cluster {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// rPVI, nPVI, rates and Wagner quadrants of an annotation CSV
    Pvi {
        annotation: PathBuf,
        #[arg(long, default_value = "s")]
        unit: TimeUnit,
    },
    /// Compare the rate-predicted R-formant with a clip's AMS peaks
    Calibrate {
        wav: PathBuf,
        #[arg(long)]
        words: PathBuf,
        #[arg(long)]
        syllables: PathBuf,
        #[arg(long, default_value = "s")]
        unit: TimeUnit,
    },
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo = lo.trim().parse().map_err(|_| format!("bad LO in {s:?}"))?;
    let hi = hi.trim().parse().map_err(|_| format!("bad HI in {s:?}"))?;
    Ok((lo, hi))
}

fn config(c: &Common) -> rformant::Result<AnalysisConfig> {
    let path = c.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut cfg = match path {
        Some(p) => AnalysisConfig::from_file(p)?,
        None => AnalysisConfig::default(),
    };
    if let Some(t) = c.trim {
        cfg.trim_s = t;
    }
    if let Some((lo, hi)) = c.band {
        cfg.band_lo_hz = lo;
        cfg.band_hi_hz = hi;
    }
    if let Some(n) = c.peaks {
        cfg.n_peaks = n;
    }
    if let Some(n) = c.bins {
        cfg.n_bins = n;
    }
    if let Some(m) = c.metric {
        cfg.metric = m;
    }
    if let Some(n) = c.permutations {
        cfg.mantel_permutations = n;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn finish<T>(o: &Outcome<T>) -> u8 {
    for w in &o.warnings {
        warn!("{w}");
    }
    for f in &o.files {
        log::info!("wrote {}", f.display());
    }
    u8::from(o.partial)
}

fn run(cli: Cli) -> rformant::Result<u8> {
    let cfg = config(&cli.common)?;
    let out = &cli.common.out;
    match cli.command {
        Command::Analyze { wavs } => {
            let o = cmd_analyze(&wavs, &cfg, out, cli.common.jobs)?;
            for r in &o.value {
                let peak = r
                    .profile(Domain::Ams)
                    .and_then(|p| p.peaks.first())
                    .map_or_else(|| "-".into(), |p| format!("{:.2} Hz", p.freq));
                let fems = if r.entry(Domain::Fems).is_some_and(|e| e.present) { "yes" } else { "absent" };
                println!("{}\tAMS top {peak}\tFEMS {fems}", r.label);
            }
            Ok(finish(&o))
        }
        Command::Compare { reports } => {
            let o = cmd_compare(&reports, &cfg, out)?;
            for row in &o.value.mantel {
                match &row.result {
                    Some(m) => println!("{}\tr = {:.3}\tp = {:.4} {}", row.pair, m.r, m.p, m.significance()),
                    None => println!("{}\tNA", row.pair),
                }
            }
            Ok(finish(&o))
        }
        Command::Cluster { reports } => {
            let o = cmd_cluster(&reports, cli.common.domain, &cfg, out)?;
            println!("{}", o.value.newick);
            Ok(finish(&o))
        }
        Command::Pvi { annotation, unit } => {
            let o = cmd_pvi(&annotation, unit, &cfg, out)?;
            let r = &o.value;
            println!("tier\t{}", r.tier);
            println!("count\t{}", r.rates.count);
            println!("total_s\t{:.4}", r.rates.total_s);
            println!("mean_s\t{:.4}", r.rates.mean_s);
            println!("rate_hz\t{:.3}", r.rates.rate_hz);
            println!("rpvi\t{:.2}", r.rpvi);
            println!("npvi\t{:.2}", r.npvi);
            if let Some(q) = r.wagner_quadrants {
                println!("quadrants\t--:{} -+:{} +-:{} ++:{}", q.neg_neg, q.neg_pos, q.pos_neg, q.pos_pos);
            }
            Ok(finish(&o))
        }
        Command::Calibrate { wav, words, syllables, unit } => {
            let o = cmd_calibrate(&wav, &words, &syllables, unit, &cfg, out)?;
            let r = &o.value;
            println!("word_rate_hz\t{:.3}", r.words.rate_hz);
            println!("syllable_rate_hz\t{:.3}", r.syllables.rate_hz);
            println!("predicted_hz\t{:.2} ({:.2}..{:.2})", r.predicted.center, r.predicted.lo, r.predicted.hi);
            println!("measured_hz\t{:.2} ({:.2}..{:.2})", r.measured_hz, r.cluster.lo, r.cluster.hi);
            println!("error_hz\t{:.2}", r.error_hz);
            Ok(finish(&o))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
