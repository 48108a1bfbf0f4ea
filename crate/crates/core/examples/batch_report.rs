//! End-to-end batch: synthesize clips, analyze them, then compare and cluster
//! the reports exactly as the command-line tool does.
//!
//! ```text
//! cargo run --example batch_report -- /tmp/rformant-demo
//! ```

use std::path::PathBuf;

use rformant::audio_io::write_wav_i16;
use rformant::lts::Domain;
use rformant::report::{cmd_analyze, cmd_cluster, cmd_compare, AnalysisConfig};
use rformant::synth;

fn main() -> rformant::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "rformant-demo".into()));
    let wav_dir = dir.join("wav");
    std::fs::create_dir_all(&wav_dir).map_err(|e| rformant::Error::InvalidInput(e.to_string()))?;

    let mut wavs = Vec::new();
    for (name, mod_hz, duty) in [("calm", 2.5, 0.5), ("steady", 4.0, 0.7), ("brisk", 5.5, 0.6), ("rapid", 7.0, 0.5)] {
        let sig = synth::pulse_train(0.7, 200.0, mod_hz, duty, 16000.0, 5.0, name)?;
        let path = wav_dir.join(format!("{name}.wav"));
        write_wav_i16(&path, &sig)?;
        wavs.push(path);
    }

    let cfg = AnalysisConfig { mantel_permutations: 999, spectrogram: true, ..AnalysisConfig::default() };
    let analyzed = cmd_analyze(&wavs, &cfg, &dir.join("reports"), 0)?;
    println!("analyzed {} clips, {} files", analyzed.value.len(), analyzed.files.len());
    for w in &analyzed.warnings {
        println!("  warning: {w}");
    }
    let reports: Vec<PathBuf> = analyzed.value.iter().map(|r| dir.join("reports").join(format!("{}.json", r.label))).collect();

    let compared = cmd_compare(&reports, &cfg, &dir.join("compare"))?;
    for row in &compared.value.mantel {
        let shown = row.result.map_or("NA".to_string(), |m| format!("r {:.3}, p {:.3}", m.r, m.p));
        println!("Mantel {}: {shown}", row.pair);
    }
    let clustered = cmd_cluster(&reports, Domain::Ams, &cfg, &dir.join("cluster"))?;
    println!("AMS tree: {}", clustered.value.newick);
    println!("outputs under {}", dir.display());
    Ok(())
}
