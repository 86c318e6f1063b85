//! Monte Carlo properties of the cloning protocol. Seeds are fixed.

use dctc_core::cloning::{
    discriminate, empirical_frequencies, hoeffding_bound, labeled_mixture_behavior, run_protocol,
    run_sweep, summarize, CloneRunConfig, DenseAncillaModel, DenseVariant, SweepConfig,
};
use dctc_core::ctc::DEFAULT_DENSE_CAP;
use dctc_core::par;
use dctc_core::povm::{measurement_map, outcome_probabilities, sic_qubit};
use dctc_core::qmath::{random_density_operator, trace_distance, DensityOperator, Purity, SubsystemLayout, C64};
use dctc_core::seed;

const SWEEP: [u64; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];

fn qubit_layout() -> SubsystemLayout {
    SubsystemLayout::single("S", 2).unwrap()
}

#[test]
fn dense_marginal_matches_product_of_measured_states() {
    let povm = sic_qubit();
    for n in 1..=3 {
        for k in 0..3u64 {
            let rho = random_density_operator(2, Purity::Mixed, &mut seed::rng(100 + k)).unwrap();
            let model = DenseAncillaModel::build(&povm, &rho, n, DenseVariant::Measured, DEFAULT_DENSE_CAP).unwrap();
            assert!(model.marginal_defect < 1e-9);
            let omega = measurement_map(&povm, &rho).unwrap();
            assert!(trace_distance(&model.ancillas, &omega.tensor_power(n, "A").unwrap()).unwrap() < 1e-9);
        }
    }
    let rho = random_density_operator(2, Purity::Pure, &mut seed::rng(7)).unwrap();
    let model = DenseAncillaModel::build(&povm, &rho, 1, DenseVariant::Coherent, DEFAULT_DENSE_CAP).unwrap();
    assert!(model.marginal_defect < 1e-9);
}

#[test]
fn haar_pure_median_trace_distance_at_one_million() {
    let cfg = SweepConfig::structured(2, vec![1_000_000], 200, 5);
    let s = summarize(&run_sweep(&cfg).unwrap());
    assert!(s[0].median_trace_distance < 0.01, "{:?}", s[0]);
}

#[test]
fn monotone_accuracy_allowing_one_inversion() {
    let cfg = SweepConfig::structured(2, SWEEP.to_vec(), 200, 11);
    let medians: Vec<f64> = summarize(&run_sweep(&cfg).unwrap()).iter().map(|r| r.median_infidelity).collect();
    let inversions = medians.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(inversions <= 1, "{medians:?}");
}

#[test]
fn frequency_error_scales_as_inverse_root_n() {
    let cfg = SweepConfig::structured(2, SWEEP.to_vec(), 200, 13);
    let scaled: Vec<f64> = summarize(&run_sweep(&cfg).unwrap())
        .iter()
        .map(|r| r.median_max_freq_error * (r.n as f64).sqrt())
        .collect();
    let mut sorted = scaled.clone();
    sorted.sort_by(f64::total_cmp);
    let c = sorted[2];
    assert!(scaled.iter().all(|&x| x >= c / 2.0 && x <= 2.0 * c), "{scaled:?}");
}

#[test]
fn hoeffding_violation_rate_is_within_bound() {
    let probs = [0.1, 0.2, 0.3, 0.4];
    let (n, delta, trials) = (1000u64, 0.05, 10_000usize);
    let freqs = par::map_indexed(trials, |t| empirical_frequencies(&probs, n, seed::derive(3, &[t as u64])).unwrap());
    let bound = hoeffding_bound(n, delta);
    for x in 0..probs.len() {
        let rate = freqs.iter().filter(|f| (f[x] - probs[x]).abs() >= delta).count() as f64 / trials as f64;
        assert!(rate <= bound, "outcome {x}: {rate} > {bound}");
    }
}

fn ket(i: usize) -> DensityOperator {
    DensityOperator::basis_state(qubit_layout(), i).unwrap()
}

fn plus() -> DensityOperator {
    let h = 0.5f64.sqrt();
    DensityOperator::pure(&[C64::new(h, 0.0), C64::new(h, 0.0)], qubit_layout()).unwrap()
}

fn success_rate(a: &DensityOperator, b: &DensityOperator, n: u64, trials: usize, root: u64) -> f64 {
    let hits = par::map_indexed(trials, |t| {
        let truth = t % 2;
        let input = if truth == 0 { a } else { b };
        let cfg = CloneRunConfig::structured(2, n, seed::derive(root, &[t as u64]));
        discriminate(a, b, input, &cfg).unwrap() == truth
    });
    hits.iter().filter(|&&h| h).count() as f64 / trials as f64
}

#[test]
fn orthogonal_states_are_discriminated() {
    assert!(success_rate(&ket(0), &ket(1), 10_000, 1000, 1) >= 0.999);
}

#[test]
fn non_orthogonal_states_are_discriminated() {
    assert!(success_rate(&ket(0), &plus(), 1_000_000, 1000, 2) >= 0.99);
}

#[test]
fn mixture_is_cloned_as_its_average() {
    // Single-clone outputs are linear on average; two-clone outputs are not.
    let n = 1_000_000;
    let cfg = |s: u64| CloneRunConfig::structured(2, n, s).with_clones(2);
    let mixed = labeled_mixture_behavior(&[(0.5, ket(0)), (0.5, plus())], &cfg(1)).unwrap();
    let r0 = run_protocol(&ket(0), &cfg(2)).unwrap();
    let r1 = run_protocol(&plus(), &cfg(3)).unwrap();
    let avg_single = r0.rho_hat.matrix().scale(0.5).add(&r1.rho_hat.matrix().scale(0.5)).unwrap();
    assert!(mixed.result.rho_hat.matrix().max_abs_diff(&avg_single).unwrap() < 0.01);
    assert!(trace_distance(&mixed.result.rho_hat, &mixed.average_state).unwrap() < 0.01);
    let avg_pairs = r0
        .joint_clones(2)
        .unwrap()
        .matrix()
        .scale(0.5)
        .add(&r1.joint_clones(2).unwrap().matrix().scale(0.5))
        .unwrap();
    let pairs = DensityOperator::new(avg_pairs, mixed.result.joint_clones(2).unwrap().layout().clone()).unwrap();
    assert!(trace_distance(&mixed.result.joint_clones(2).unwrap(), &pairs).unwrap() > 0.05);
}

#[test]
fn maximally_mixed_input_gives_uniform_sic_statistics() {
    let pi = DensityOperator::maximally_mixed(qubit_layout());
    assert_eq!(outcome_probabilities(&sic_qubit(), &pi).unwrap(), vec![0.25; 4]);
    let r = run_protocol(&pi, &CloneRunConfig::structured(2, 1_000_000, 9)).unwrap();
    assert!(1.0 - r.clone_fidelity < 1e-5);
}
