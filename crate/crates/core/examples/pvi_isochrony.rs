//! rPVI, nPVI and Wagner quadrants for a few duration patterns.

use rformant::isochrony::{canberra, manhattan, npvi, rpvi, shifted_subvectors, wagner_pairs, Deviation, DurationVector};

fn main() -> rformant::Result<()> {
    let patterns: [(&str, Vec<f64>); 4] = [
        ("alternating", vec![2.0, 4.0, 2.0, 4.0, 2.0, 4.0]),
        ("doubling", vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0]),
        ("linear", vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0]),
        ("syllables (ms)", vec![180.0, 95.0, 210.0, 120.0, 160.0, 90.0, 240.0]),
    ];
    println!("{:<16} {:>8} {:>8} {:>10} {:>10}", "pattern", "rPVI", "nPVI", "manhattan", "canberra");
    for (name, values) in patterns {
        let d = DurationVector::new(values)?;
        let (a, b) = shifted_subvectors(&d);
        println!(
            "{name:<16} {:>8.2} {:>8.2} {:>10.2} {:>10.4}",
            rpvi(&d),
            npvi(&d),
            manhattan(a, b)?,
            canberra(a, b)?
        );
    }

    // alternation shows up in the Wagner quadrants, not in the PVI
    let d = DurationVector::new(vec![2.0, 4.0, 2.0, 4.0, 2.0, 4.0])?;
    let w = wagner_pairs(&d, Deviation::Population)?;
    println!("\nWagner quadrants for the alternating pattern: {:?}", w.quadrants);
    Ok(())
}
