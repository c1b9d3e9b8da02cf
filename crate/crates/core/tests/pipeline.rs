use flrank::dataset::PairCount;
use flrank::diagnostics::{
    diagnose, noise_bound_check, link_margin, min_probability, noise_threshold, noise_trials, DiagnosticSettings,
    MarginSource,
};
use flrank::imc::ImcConfig;
use flrank::model::{generate_synthetic, SyntheticModel};
use flrank::pipeline::{ipr, lrpr_baseline, IprConfig};
use flrank::sampling::{all_pairs, sample_comparisons, sample_support, seeded_rng, Stream, SupportScheme};
use flrank::{dist, ComparisonDataset, Link};
use rand::seq::SliceRandom;

fn dataset(model: SyntheticModel, n: usize, d: usize, m: usize, k: u64, seed: u64) -> (ComparisonDataset, flrank::PreferenceMatrix) {
    let inst = generate_synthetic(model, n, d, 2, seed).unwrap();
    let support = sample_support(n, m, SupportScheme::Uniform, &mut seeded_rng(seed, Stream::Support)).unwrap();
    let data =
        sample_comparisons(&inst.preference, &inst.features, &support, k, &mut seeded_rng(seed, Stream::Comparisons)).unwrap();
    (data, inst.preference)
}

#[test]
fn repeated_runs_agree() {
    let (data, _) = dataset(SyntheticModel::Model2, 30, 5, 150, 20, 1);
    let a = ipr(&data, &IprConfig::default()).unwrap();
    let b = ipr(&data, &IprConfig::default()).unwrap();
    assert_eq!(a.ranking, b.ranking);
    assert_eq!(a.completed, b.completed);
}

#[test]
fn pair_order_is_irrelevant() {
    let (data, _) = dataset(SyntheticModel::Model3, 25, 5, 120, 15, 2);
    let mut pairs = data.pairs().to_vec();
    pairs.shuffle(&mut seeded_rng(2, Stream::Simulation));
    let flipped: Vec<PairCount> = pairs.iter().map(|c| PairCount::new(c.j, c.i, c.trials - c.wins, c.trials)).collect();
    let shuffled = ComparisonDataset::new(data.features().clone(), flipped).unwrap();
    assert_eq!(ipr(&data, &IprConfig::default()).unwrap().ranking, ipr(&shuffled, &IprConfig::default()).unwrap().ranking);
}

#[test]
fn relabeling_items_relabels_the_ranking() {
    let mut checked = 0;
    for seed in 0..6 {
        let (data, _) = dataset(SyntheticModel::Model2, 20, 4, 120, 200, seed);
        let out = ipr(&data, &IprConfig::default()).unwrap();
        // Tie-breaks follow item indices, so only distinct scores are equivariant.
        if !out.scores.all_distinct() {
            continue;
        }
        let mut perm: Vec<usize> = (0..20).collect();
        perm.shuffle(&mut seeded_rng(seed, Stream::Simulation));
        let moved = ipr(&data.relabeled(&perm).unwrap(), &IprConfig::default()).unwrap();
        assert_eq!(moved.ranking, out.ranking.relabeled(&perm));
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn completed_matrix_is_a_preference_matrix() {
    let (data, _) = dataset(SyntheticModel::Model2, 15, 4, 40, 5, 4);
    let q = ipr(&data, &IprConfig::default()).unwrap().completed;
    for i in 0..15 {
        assert_eq!(q.get(i, i), 0.5);
        for j in 0..15 {
            assert!((q.get(i, j) + q.get(j, i) - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn small_model_three_regression() {
    let mut total = 0.0;
    for seed in 0..5 {
        let (data, truth) = dataset(SyntheticModel::Model3, 10, 4, 45, 100_000, seed);
        total += dist(&ipr(&data, &IprConfig::default()).unwrap().ranking, &truth).unwrap();
    }
    assert!(total / 5.0 < 0.05, "mean dist {}", total / 5.0);
}

#[test]
fn dense_noiseless_algorithms_agree() {
    let (data, truth) = dataset(SyntheticModel::Model2, 30, 5, 435, 100_000_000, 5);
    let cfg = IprConfig { imc: ImcConfig { lambda_l: 1e-6, ..ImcConfig::default() }, ..IprConfig::default() };
    let a = dist(&ipr(&data, &cfg).unwrap().ranking, &truth).unwrap();
    let b = dist(&lrpr_baseline(&data, &cfg).unwrap().ranking, &truth).unwrap();
    assert!((a - b).abs() < 0.02, "ipr {a}, lrpr {b}");
}

#[test]
fn features_help_when_pairs_are_scarce() {
    let (mut ipr_total, mut lrpr_total) = (0.0, 0.0);
    for seed in 0..5 {
        let (data, truth) = dataset(SyntheticModel::Model1, 60, 4, 100, 20, seed);
        ipr_total += dist(&ipr(&data, &IprConfig::default()).unwrap().ranking, &truth).unwrap();
        lrpr_total += dist(&lrpr_baseline(&data, &IprConfig::default()).unwrap().ranking, &truth).unwrap();
    }
    assert!(ipr_total <= lrpr_total, "ipr {ipr_total}, lrpr {lrpr_total}");
}

#[test]
fn truncating_at_the_true_rank_does_not_hurt() {
    for seed in 0..10 {
        let (data, truth) = dataset(SyntheticModel::Model3, 30, 6, 435, 1_000_000_000_000, seed);
        let plain = ipr(&data, &IprConfig::default()).unwrap();
        // Rank of psi(P) for a rank-2 W with a unary term.
        let cut = ipr(&data, &IprConfig { rank: Some(6), ..IprConfig::default() }).unwrap();
        assert!(dist(&cut.ranking, &truth).unwrap() <= dist(&plain.ranking, &truth).unwrap(), "seed {seed}");
    }
}

#[test]
fn noise_check_meets_its_premise() {
    let inst = generate_synthetic(SyntheticModel::Model1, 30, 4, 1, 6).unwrap();
    let support = all_pairs(30);
    let link = Link::Logit;
    let delta = link_margin(&inst.preference, link);
    let tau = noise_threshold(30, 0.1, 5.0, delta);
    let lipschitz = link.lipschitz_on(min_probability(&inst.preference) / 2.0);
    let k_min = noise_trials(support.len(), lipschitz, 30, tau).ceil() as u64;
    let mut rng = seeded_rng(6, Stream::Simulation);
    let freq = noise_bound_check(&inst.preference, &support, k_min, link, tau, 100, &mut rng).unwrap();
    assert!(freq >= 0.95, "{freq}");
    let freq = noise_bound_check(&inst.preference, &support, 10 * k_min, link, tau, 100, &mut rng).unwrap();
    assert_eq!(freq, 1.0);
}

#[test]
fn diagnostics_are_finite_and_scale() {
    let (data, truth) = dataset(SyntheticModel::Model1, 40, 5, 300, 50, 7);
    let settings = DiagnosticSettings::default();
    let diag = diagnose(&data, Some(&truth), &settings).unwrap();
    assert_eq!(diag.delta_source, MarginSource::GroundTruth);
    for v in [diag.p_min, diag.delta, diag.kappa, diag.lipschitz, diag.tau, diag.requirements.m_required, diag.requirements.k_required] {
        assert!(v.is_finite() && v > 0.0);
    }
    assert!((diag.kappa - 1.0).abs() < 1e-12);
    let halved = diagnose(&data, Some(&truth), &DiagnosticSettings { epsilon: settings.epsilon / 2.0, ..settings }).unwrap();
    assert!((halved.requirements.m_required / diag.requirements.m_required - 4.0).abs() < 1e-9);
    let empirical = diagnose(&data, None, &settings).unwrap();
    assert_eq!(empirical.delta_source, MarginSource::Empirical);
}
