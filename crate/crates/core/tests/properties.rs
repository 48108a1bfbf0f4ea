use proptest::prelude::*;

use rformant::audio_io::SignalBuffer;
use rformant::cluster::upgma;
use rformant::demodulation::{continuize_f0, envelope_peak_pick, rectify, Track, TrackKind};
use rformant::isochrony::{canberra, manhattan, npvi, rpvi, shifted_subvectors, DurationVector};
use rformant::lts::{normalize_log_detrend, Domain, LongTermSpectrum};
use rformant::profile::{profile, top_n_frequencies, weighted_bins, Peak};
use rformant::stats::{metric_distance, pearson_r, DistanceMatrix, Metric};

fn durations() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001..100.0_f64, 2..60)
}

fn spectrum(mags: Vec<f64>) -> LongTermSpectrum {
    let freqs = (0..mags.len()).map(|i| i as f64 * 0.2).collect();
    LongTermSpectrum::from_parts(Domain::Ams, "p", freqs, mags, None, None).unwrap()
}

fn magnitudes() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6..1e3_f64, 60..=60)
}

fn symmetric(m: usize, upper: &[f64]) -> DistanceMatrix {
    let mut rows = vec![vec![0.0; m]; m];
    let mut k = 0;
    for i in 0..m {
        for j in i + 1..m {
            rows[i][j] = upper[k];
            rows[j][i] = upper[k];
            k += 1;
        }
    }
    DistanceMatrix::new((0..m).map(|i| format!("n{i}")).collect(), rows).unwrap()
}

/// Average linkage by brute force: cluster distance is the mean over all
/// cross-cluster leaf pairs, recomputed from the original matrix each step.
fn brute_average_linkage(d: &DistanceMatrix) -> Vec<f64> {
    let mut clusters: Vec<Vec<usize>> = (0..d.size()).map(|i| vec![i]).collect();
    let mut heights = Vec::new();
    while clusters.len() > 1 {
        let mut best = (0, 1, f64::INFINITY);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let sum: f64 = clusters[a]
                    .iter()
                    .flat_map(|&i| clusters[b].iter().map(move |&j| d.get(i, j)))
                    .sum();
                let mean = sum / (clusters[a].len() * clusters[b].len()) as f64;
                if mean < best.2 {
                    best = (a, b, mean);
                }
            }
        }
        let merged = clusters.remove(best.1);
        clusters[best.0].extend(merged);
        heights.push(best.2);
    }
    heights
}

proptest! {
    #[test]
    fn pvi_equals_scaled_distances(v in durations()) {
        let d = DurationVector::new(v.clone()).unwrap();
        let (a, b) = shifted_subvectors(&d);
        let m = (v.len() - 1) as f64;
        let r = rpvi(&d);
        let n = npvi(&d);
        prop_assert!((r - 100.0 * manhattan(a, b).unwrap() / m).abs() <= 1e-9 * r.max(1.0));
        prop_assert!((n - 200.0 * canberra(a, b).unwrap() / m).abs() <= 1e-9 * n.max(1.0));
        prop_assert!((0.0..200.0).contains(&n));
    }

    #[test]
    fn pvi_scale_laws(v in durations(), c in 0.01..100.0_f64) {
        let d = DurationVector::new(v).unwrap();
        let s = d.scaled(c).unwrap();
        prop_assert!((rpvi(&s) - c * rpvi(&d)).abs() <= 1e-9 * (c * rpvi(&d)).max(1.0));
        prop_assert!((npvi(&s) - npvi(&d)).abs() <= 1e-9 * npvi(&d).max(1.0));
    }

    #[test]
    fn pvi_reversal_symmetry(v in durations()) {
        let d = DurationVector::new(v.clone()).unwrap();
        let mut rev = v;
        rev.reverse();
        let r = DurationVector::new(rev).unwrap();
        prop_assert!((rpvi(&d) - rpvi(&r)).abs() <= 1e-9 * rpvi(&d).max(1.0));
        prop_assert!((npvi(&d) - npvi(&r)).abs() <= 1e-9 * npvi(&d).max(1.0));
    }

    #[test]
    fn detrend_is_gain_invariant(mags in magnitudes(), c in 1e-3..1e3_f64) {
        let spec = spectrum(mags);
        let a = normalize_log_detrend(&spec, (1.0, 10.0)).unwrap();
        let b = normalize_log_detrend(&spec.scaled(c), (1.0, 10.0)).unwrap();
        for (x, y) in a.residual().unwrap().iter().zip(b.residual().unwrap()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let pa = profile(&a, 6, 10).unwrap();
        let pb = profile(&b, 6, 10).unwrap();
        for (x, y) in pa.peaks.iter().zip(&pb.peaks) {
            prop_assert_eq!(x.freq, y.freq);
        }
        for (x, y) in pa.bins.iter().zip(&pb.bins) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn residual_has_flat_fit(mags in magnitudes()) {
        let r = normalize_log_detrend(&spectrum(mags), (1.0, 10.0)).unwrap();
        let f = r.freqs();
        let y = r.residual().unwrap();
        let (slope, intercept) = rformant::lts::linear_fit(f, y);
        prop_assert!(slope.abs() < 1e-6 && intercept.abs() < 1e-6);
    }

    #[test]
    fn top_n_is_monotone(mags in magnitudes(), n in 0usize..45) {
        let spec = normalize_log_detrend(&spectrum(mags), (1.0, 10.0)).unwrap();
        let small = top_n_frequencies(&spec, n).unwrap();
        let large = top_n_frequencies(&spec, n + 1).unwrap();
        prop_assert_eq!(&large[..n], &small[..]);
        for w in large.windows(2) {
            prop_assert!(w[0].weight > w[1].weight || (w[0].weight == w[1].weight && w[0].freq < w[1].freq));
        }
        prop_assert!(large.iter().all(|p| p.weight >= 0.0 && (1.0..=10.0 + 1e-9).contains(&p.freq)));
    }

    #[test]
    fn bins_are_a_probability_vector(
        peaks in prop::collection::vec((1.0..=11.0_f64, 0.0..5.0_f64), 0..12),
        n_bins in 1usize..20,
    ) {
        let peaks: Vec<Peak> = peaks.into_iter().map(|(freq, weight)| Peak { freq, weight }).collect();
        let bins = weighted_bins(&peaks, (1.0, 11.0), n_bins).unwrap();
        prop_assert_eq!(bins.len(), n_bins);
        prop_assert!(bins.iter().all(|&b| b >= 0.0));
        let total: f64 = bins.iter().sum();
        prop_assert!(total == 0.0 || (total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pearson_bounds_and_symmetry(
        pairs in prop::collection::vec((-10.0..10.0_f64, -10.0..10.0_f64), 3..30),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let (Ok(a), Ok(b)) = (pearson_r(&x, &y), pearson_r(&y, &x)) {
            prop_assert!((-1.0..=1.0).contains(&a));
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn manhattan_is_a_metric(
        a in prop::collection::vec(0.0..1.0_f64, 10..=10),
        b in prop::collection::vec(0.0..1.0_f64, 10..=10),
        c in prop::collection::vec(0.0..1.0_f64, 10..=10),
    ) {
        let d = |x: &[f64], y: &[f64]| metric_distance(Metric::Manhattan, x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-12);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn upgma_matches_brute_force(m in 2usize..8, seed in prop::collection::vec(0.01..10.0_f64, 28..=28)) {
        let d = symmetric(m, &seed[..m * (m - 1) / 2]);
        let t = upgma(&d).unwrap();
        let heights: Vec<f64> = t.merges.iter().map(|mg| mg.distance).collect();
        let oracle = brute_average_linkage(&d);
        for (x, y) in heights.iter().zip(&oracle) {
            prop_assert!((x - y).abs() < 1e-9, "{heights:?} vs {oracle:?}");
        }
        prop_assert!(heights.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        prop_assert_eq!(t.merges.last().unwrap().size, m);
    }

    #[test]
    fn envelope_is_nonnegative(samples in prop::collection::vec(-1.0..1.0_f64, 400..2000)) {
        let sig = SignalBuffer::new(samples, 8000.0, "x").unwrap();
        let env = envelope_peak_pick(&rectify(&sig), 20.0, 5.0).unwrap();
        prop_assert!(env.values().iter().all(|&v| v >= 0.0));
        let peak = sig.samples().iter().fold(0.0_f64, |m, s| m.max(s.abs()));
        prop_assert!(env.values().iter().all(|&v| v <= peak));
    }

    #[test]
    fn continuized_f0_has_zero_mean(
        raw in prop::collection::vec(prop_oneof![Just(0.0), 60.0..400.0_f64], 2..200),
    ) {
        prop_assume!(raw.iter().any(|&v| v > 0.0));
        let track = Track::new(raw, 100.0, TrackKind::F0Raw).unwrap();
        let cont = continuize_f0(&track).unwrap();
        prop_assert_eq!(cont.len(), track.len());
        let mean = cont.values().iter().sum::<f64>() / cont.len() as f64;
        prop_assert!(mean.abs() < 1e-9);
    }
}
