// Scratch calibration probe used while pinning regime windows; not part of
// the deliverable surface.

use mii_core::attack::{accomplice_analysis, ideal_distances, ideal_outcomes};
use mii_core::eval::{
    negative_pairs, pair_distances, pearson, positive_pairs, success_rate, ThresholdTable,
    EPS2_INDEX,
};
use mii_core::ideal::{halved_negative_distribution, sample_identity_pairs};
use mii_core::sphere::sample_uniform_sphere;
use mii_core::world::{
    embed_world, generate_world, ConcentrationRegime, SyntheticComparator, WorldConfig,
};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();

    // Uniform-sphere statistics at d=128.
    {
        let pts = sample_uniform_sphere(128, 20_000, 1).unwrap();
        let dists: Vec<f64> = pts
            .chunks_exact(2)
            .map(|c| {
                mii_core::sphere::angular_distance(&c[0], &c[1])
                    .unwrap()
                    .radians()
            })
            .collect();
        let n = dists.len() as f64;
        let mean = dists.iter().sum::<f64>() / n;
        let var = dists.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
        println!(
            "uniform d=128: mean={mean:.6} std={:.6} var={var:.8} (1/d={:.8}, 1/sqrt(d)={:.6})",
            var.sqrt(),
            1.0 / 128.0,
            1.0 / (128f64).sqrt()
        );
    }

    for regime in [
        ConcentrationRegime::LowIntraClassVar,
        ConcentrationRegime::HighIntraClassVar,
    ] {
        let t = Instant::now();
        let cfg = WorldConfig {
            d: 128,
            n_identities: 1000,
            images_per_identity: 4,
            regime,
            seed: 20_240_501,
        };
        let world = generate_world(&cfg).unwrap();
        println!(
            "\n[{regime}] kappa={:.2} (gen {:?})",
            world.kappa(),
            t.elapsed()
        );

        let latent = SyntheticComparator::pass_through("latent", 128).unwrap();
        let view = embed_world(&world, &latent).unwrap();
        let pos = pair_distances(&view, &positive_pairs(1000, 4)).unwrap();
        let negp = negative_pairs(1000, 4, 2_000_000, 7).unwrap();
        let neg = pair_distances(&view, &negp).unwrap();
        let mut p_sorted = pos.clone();
        p_sorted.sort_by(f64::total_cmp);
        let median_pos = p_sorted[p_sorted.len() / 2];
        let mean_neg = neg.iter().sum::<f64>() / neg.len() as f64;
        let var_neg =
            neg.iter().map(|d| (d - mean_neg) * (d - mean_neg)).sum::<f64>() / neg.len() as f64;
        println!(
            "  median P+ = {median_pos:.4}; P- mean {mean_neg:.4} std {:.5} (x{:.2} of uniform)",
            var_neg.sqrt(),
            var_neg.sqrt() * (128f64).sqrt()
        );

        let table = ThresholdTable::standard_from_negatives(&neg).unwrap();
        for e in table.entries() {
            print!("  eps@{:.5}={:.4}", e.far_target, e.epsilon.radians());
        }
        println!();
        let eps2 = table.epsilon(EPS2_INDEX).unwrap();

        // Ideal attack on 10k quads.
        let t = Instant::now();
        let pairs = sample_identity_pairs(1000, 10_000, 99).unwrap();
        let outcomes = ideal_outcomes(&view, &pairs, &table).unwrap();
        let rate = success_rate(&outcomes, EPS2_INDEX).unwrap();
        println!(
            "  ideal success@eps2 = {:.4} ({} quads, {:?})",
            rate,
            pairs.len(),
            t.elapsed()
        );
        let dists = ideal_distances(&view, &pairs).unwrap();
        let med = {
            let mut d = dists.clone();
            d.sort_by(f64::total_cmp);
            d[d.len() / 2]
        };
        println!("  ideal dist median = {med:.4} vs eps2 = {eps2:.4}");

        // Halved negatives below eps2.
        let half = halved_negative_distribution(&neg);
        let below = half.iter().filter(|&&h| h < eps2).count() as f64 / half.len() as f64;
        println!("  P-/2 below eps2: {below:.5}");

        // TAR at eps2 for sanity.
        let tar2 = mii_core::eval::tar(&pos, eps2).unwrap();
        println!("  TAR@eps2 = {tar2:.4}");

        // Accomplice conditioning.
        let rep = accomplice_analysis(&world, &latent, &latent, &pairs, eps2).unwrap();
        println!(
            "  accomplice: overall {:.4}, below-median {:.4}",
            rep.overall_rate, rep.below_median_rate
        );

        // Transfer correlations with three comparators.
        let t = Instant::now();
        let cmp_a = SyntheticComparator::from_seed("alpha", 128, 0.2, 101).unwrap();
        let cmp_b = SyntheticComparator::from_seed("beta", 128, 0.2, 202).unwrap();
        let cmp_c = SyntheticComparator::from_seed("gamma", 128, 0.35, 303).unwrap();
        let views: Vec<_> = [&cmp_a, &cmp_b, &cmp_c]
            .iter()
            .map(|c| embed_world(&world, c).unwrap())
            .collect();
        let pos_pairs_list = positive_pairs(1000, 4);
        let neg_sub = negative_pairs(1000, 4, 6000, 11).unwrap();
        let pos_d: Vec<Vec<f64>> = views
            .iter()
            .map(|v| pair_distances(v, &pos_pairs_list).unwrap())
            .collect();
        let neg_d: Vec<Vec<f64>> = views
            .iter()
            .map(|v| pair_distances(v, &neg_sub).unwrap())
            .collect();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let cp = pearson(&pos_d[i], &pos_d[j]).unwrap();
            let cn = pearson(&neg_d[i], &neg_d[j]).unwrap();
            println!(
                "  corr {}-{}: P+ {:.4} P- {:.4} (gap {:+.4})",
                i,
                j,
                cp,
                cn,
                cp - cn
            );
        }
        println!("  transfer block {:?}", t.elapsed());
    }
    println!("\ntotal {:?}", t0.elapsed());
}
