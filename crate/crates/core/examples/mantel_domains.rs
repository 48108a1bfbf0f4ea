//! Per-clip domain correlations and Mantel tests over a synthetic corpus.

use rformant::lts::Domain;
use rformant::report::{analyze_signal, compare_reports, AnalysisConfig, UtteranceReport};
use rformant::stats::{distance_matrix, mantel};
use rformant::synth;

fn main() -> rformant::Result<()> {
    let cfg = AnalysisConfig { mantel_permutations: 999, ..AnalysisConfig::default() };
    let mut reports = Vec::new();
    for (i, mod_hz) in [2.4, 3.0, 3.6, 4.2, 4.8, 5.4, 6.0, 6.6, 7.2].into_iter().enumerate() {
        let sig = synth::pulse_train(0.7, 180.0 + 20.0 * i as f64, mod_hz, 0.6, 8000.0, 5.0, &format!("clip{i}"))?;
        reports.push(UtteranceReport::from_analysis(&analyze_signal(&sig, &cfg)?, &cfg));
    }

    let cmp = compare_reports(&reports, &cfg)?;
    for row in &cmp.summaries {
        match &row.summary {
            Some(s) => println!("{:<10} mean r {:.3} (min {:.3} {}, max {:.3} {})", s.pair, s.mean_r, s.min_r, s.min_label, s.max_r, s.max_label),
            None => println!("{:<10} NA ({})", row.pair, row.reason.as_deref().unwrap_or("")),
        }
    }
    for row in &cmp.mantel {
        match &row.result {
            Some(m) => println!("{:<10} Mantel r {:.3}, p {:.3} {}", row.pair, m.r, m.p, m.significance()),
            None => println!("{:<10} Mantel NA ({})", row.pair, row.reason.as_deref().unwrap_or("")),
        }
    }

    // the same test by hand, against itself
    let profiles: Vec<_> = reports.iter().filter_map(|r| r.profile(Domain::Ams).cloned()).collect();
    let d = distance_matrix(&profiles, cfg.metric)?;
    let m = mantel(&d, &d, 999, 0)?;
    println!("AMS vs itself: r {}, p {:.3}", m.r, m.p);
    Ok(())
}
