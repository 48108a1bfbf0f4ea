//! Average-linkage clustering of R-formant histograms, written as Newick and SVG.

use rformant::cluster::{to_newick, upgma};
use rformant::lts::Domain;
use rformant::profile::RFormantProfile;
use rformant::report::svg;
use rformant::stats::{distance_matrix, Metric};

fn profile(label: &str, bins: [f64; 10]) -> RFormantProfile {
    RFormantProfile {
        label: label.into(),
        domain: Domain::Ams,
        band: (1.0, 11.0),
        n_bins: 10,
        peaks: Vec::new(),
        bins: bins.to_vec(),
    }
}

fn main() -> rformant::Result<()> {
    let profiles = vec![
        profile("slow_a", [0.5, 0.3, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        profile("slow_b", [0.4, 0.4, 0.1, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        profile("mid_a", [0.0, 0.1, 0.3, 0.5, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0]),
        profile("mid_b", [0.0, 0.0, 0.4, 0.4, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0]),
        profile("fast", [0.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.5, 0.2, 0.0, 0.0]),
    ];
    let d = distance_matrix(&profiles, Metric::Manhattan)?;
    print!("{}", d.to_csv());
    let tree = upgma(&d)?;
    for m in &tree.merges {
        println!("merge {} + {} at {:.3} (size {})", m.left, m.right, m.distance, m.size);
    }
    println!("{}", to_newick(&tree));

    let path = std::env::temp_dir().join("rformant_dendrogram.svg");
    std::fs::write(&path, svg::dendrogram("UPGMA, Manhattan distance", &tree, &profiles))
        .map_err(|e| rformant::Error::InvalidInput(e.to_string()))?;
    println!("dendrogram written to {}", path.display());
    Ok(())
}
