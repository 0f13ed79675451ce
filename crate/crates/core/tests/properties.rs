//! Randomized invariants, 200 seeded cases each.

use proptest::prelude::*;
use rand::Rng;

use persistency::bell::chsh::{horodecki_chsh_max, max_chsh};
use persistency::bell::{
    behavior, local_polytope_membership, seesaw_maximize, BellFunctional, DichotomicObservable, Membership, MeasurementScenario,
};
use persistency::linalg;
use persistency::persistency::{analyze, persistency_entanglement, strength, Budget, Sections};
use persistency::separability::{
    entanglement_status, npt_any_bipartition, separable_fit, EntanglementStatus, SeparableDecomposition,
};
use persistency::states::{self, State, StateSpec};
use persistency::{random, trace_distance, DensityOperator, QuditRegister, StateVector};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(200)
}

fn random_mixed(seed: u64, k: usize) -> DensityOperator {
    let mut rng = random::rng(seed);
    let reg = QuditRegister::qubits(k).unwrap();
    let rank = rng.gen_range(1..=1usize << k);
    random::density(&reg, rank, &mut rng)
}

/// Never both an entanglement witness and a separable decomposition.
fn assert_honest(rho: &DensityOperator, status: &EntanglementStatus) {
    status.verify(rho).unwrap();
    if status.is_entangled() {
        assert!(separable_fit(rho, 500, 1).is_none(), "entangled state admitted a separable fit");
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn partial_trace_composes(seed in any::<u64>(), k in 3usize..5) {
        let rho = random_mixed(seed, k);
        let mut rng = random::rng(seed ^ 1);
        let i = rng.gen_range(0..k);
        let mut j = rng.gen_range(0..k - 1);
        if j >= i {
            j += 1;
        }
        let j_after = if j > i { j - 1 } else { j };
        let step = rho.partial_trace(&[i]).unwrap().partial_trace(&[j_after]).unwrap();
        let mut both = [i, j];
        both.sort();
        let direct = rho.partial_trace(&both).unwrap();
        prop_assert!(linalg::max_abs_diff(step.matrix(), direct.matrix()) < 1e-12);
        direct.validate().unwrap();
    }

    #[test]
    fn product_marginals_are_factors(seed in any::<u64>(), k in 2usize..5) {
        let mut rng = random::rng(seed);
        let reg = QuditRegister::qubits(k).unwrap();
        let (psi, factors) = random::product_state(&reg, &mut rng);
        for (s, f) in factors.iter().enumerate() {
            let m = psi.reduced(&[s]).unwrap();
            prop_assert!(linalg::max_abs_diff(m.matrix(), &linalg::outer(f)) < 1e-12);
        }
    }

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>()) {
        let (a, b, c) = (random_mixed(seed, 2), random_mixed(seed ^ 7, 2), random_mixed(seed ^ 11, 2));
        let ab = trace_distance(&a, &b).unwrap();
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(ab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-10);
    }

    #[test]
    fn identity_filter_keeps_noisy_state(seed in any::<u64>(), w in 0.0f64..1.0) {
        let rho = random_mixed(seed, 2).mix_with_white_noise(w).unwrap();
        let id = persistency::LocalFilter::identity(2);
        let (out, p) = rho.apply_filters(&[Some(id.clone()), Some(id)]).unwrap();
        prop_assert!((p - 1.0).abs() < 1e-12);
        prop_assert!(linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn hermitian_eig_reconstructs(seed in any::<u64>(), d in 2usize..65) {
        let mut rng = random::rng(seed);
        let m = random::hermitian(d, &mut rng);
        let e = linalg::hermitian_eig(&m).unwrap();
        let norm = linalg::operator_norm(&m);
        prop_assert!(linalg::max_abs_diff(&e.reconstruct(), &m) <= 1e-9 * norm.max(1.0));
        let sum: f64 = e.values.iter().sum();
        prop_assert!((sum - linalg::trace(&m).re).abs() < 1e-9);
    }

    #[test]
    fn dicke_is_permutation_invariant(seed in any::<u64>(), n in 2usize..7, m in 1usize..6) {
        prop_assume!(m < n);
        let psi = states::dicke_state(n, m).unwrap();
        let mut rng = random::rng(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let moved = psi.permute_sites(&perm).unwrap();
        prop_assert!((moved.overlap(&psi).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embedded_observables_square_to_identity(seed in any::<u64>(), d in 2usize..8) {
        let mut rng = random::rng(seed);
        let i = rng.gen_range(0..d);
        let mut j = rng.gen_range(0..d - 1);
        if j >= i {
            j += 1;
        }
        let o = DichotomicObservable::embedded(d, (i.min(j), i.max(j)), random::unit_vector3(&mut rng)).unwrap();
        let sq = o.matrix() * o.matrix();
        prop_assert!(linalg::max_abs_diff(&sq, &linalg::identity(d)) < 1e-10);
        let r = DichotomicObservable::random(d, &mut rng);
        prop_assert!(linalg::max_abs_diff(&(r.matrix() * r.matrix()), &linalg::identity(d)) < 1e-10);
    }

    #[test]
    fn behaviors_are_no_signalling(seed in any::<u64>(), k in 2usize..5) {
        let rho = random_mixed(seed, k);
        let mut rng = random::rng(seed ^ 3);
        let b = behavior(&rho, &MeasurementScenario::random(&vec![2; k], &mut rng)).unwrap();
        prop_assert!(b.no_signalling_defect() < 1e-9);
    }

    #[test]
    fn lp_witnesses_reverify_exhaustively(seed in any::<u64>(), k in 2usize..4) {
        let mut rng = random::rng(seed);
        let reg = QuditRegister::qubits(k).unwrap();
        let rho = random::pure_state(&reg, &mut rng).density().unwrap();
        let b = behavior(&rho, &MeasurementScenario::random(&vec![2; k], &mut rng)).unwrap();
        match local_polytope_membership(&b).unwrap() {
            Membership::Nonlocal(w) => {
                // every deterministic strategy, enumerated directly
                let c = w.functional.dense();
                let mut best = f64::NEG_INFINITY;
                for lambda in 0..4usize.pow(k as u32) {
                    best = best.max(persistency::bell::correlators::vertex_correlators(lambda, k)
                        .iter().zip(&c).map(|(x, y)| x * y).sum());
                }
                prop_assert!((best - w.functional.local_bound()).abs() < 1e-9);
                prop_assert!(w.functional.value(&b.correlators()).unwrap() > best + 1e-9);
            }
            Membership::Local(d) => {
                for (x, y) in d.correlators().iter().zip(b.correlators()) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn two_qubit_entangled_iff_npt(seed in any::<u64>()) {
        let rho = random_mixed(seed, 2);
        let npt = linalg::min_eigenvalue(&rho.partial_transpose(&[0]).unwrap()) < -1e-9;
        let status = entanglement_status(&rho);
        assert_honest(&rho, &status);
        prop_assert_eq!(status.is_entangled(), npt);
        prop_assert_eq!(npt_any_bipartition(&rho).is_some(), npt);
        if !npt {
            // PPT two-qubit states are separable; the fit cross-checks it
            prop_assert!(!status.is_entangled());
        }
    }

    #[test]
    fn statuses_are_exclusive(seed in any::<u64>(), k in 2usize..4) {
        let rho = random_mixed(seed, k).mix_with_white_noise(0.5).unwrap();
        let status = entanglement_status(&rho);
        assert_honest(&rho, &status);
        let json = serde_json::to_string(&status).unwrap();
        let back: EntanglementStatus = serde_json::from_str(&json).unwrap();
        back.verify(&rho).unwrap();
    }

    #[test]
    fn horodecki_matches_seesaw(seed in any::<u64>()) {
        let rho = random_mixed(seed, 2);
        let h = horodecki_chsh_max(&rho).unwrap().value;
        let (s, _) = seesaw_maximize(&rho, &BellFunctional::chsh(2, 0, 1).unwrap(), 8, seed).unwrap();
        prop_assert!((h - s).abs() <= 1e-6, "horodecki {} seesaw {}", h, s);
    }
}

fn ancilla(state: &StateVector, seed: u64) -> StateVector {
    let mut rng = random::rng(seed);
    let (a, _) = random::product_state(&QuditRegister::qubits(1).unwrap(), &mut rng);
    state.tensor(&a).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn ancilla_does_not_raise_pe(seed in any::<u64>(), which in 0usize..4) {
        let base = match which {
            0 => states::w_state(3).unwrap(),
            1 => states::ghz_state(3, 2).unwrap(),
            2 => states::linear_cluster(3).unwrap(),
            _ => random::pure_state(&QuditRegister::qubits(3).unwrap(), &mut random::rng(seed)),
        };
        let budget = Budget { fit_samples: 300, ..Budget::default() };
        let plain = persistency_entanglement(&State::from(base.clone()), &budget, seed).unwrap();
        let extended = persistency_entanglement(&State::from(ancilla(&base, seed)), &budget, seed).unwrap();
        prop_assert!(extended.lo <= plain.lo.max(1), "{:?} vs {:?}", (extended.lo, extended.hi), (plain.lo, plain.hi));
        prop_assert!(extended.lo <= plain.hi && plain.lo <= extended.hi);
    }

    #[test]
    fn strength_witness_is_affine_and_increasing(t in 0.0f64..1.0) {
        let r = strength_w3();
        let cert = r.per_subset[0].certificate.as_ref().unwrap();
        let rho = State::from(states::w_state(3).unwrap()).density().unwrap();
        let w_star = r.w.unwrap();
        let tol = Budget::default().strength_tol;
        let lo = w_star - tol;
        let ws = [lo + (1.0 - lo) * t * 0.5, lo + (1.0 - lo) * (0.25 + t * 0.5), lo + (1.0 - lo) * (0.5 + t * 0.5)];
        let vals: Vec<f64> = ws
            .iter()
            .map(|&w| {
                let b = behavior(&rho.mix_with_white_noise(w).unwrap(), &cert.scenario).unwrap();
                cert.functional.value(&b.correlators()).unwrap()
            })
            .collect();
        let slope = (vals[2] - vals[0]) / (ws[2] - ws[0]);
        prop_assert!(slope > 0.0);
        prop_assert!((vals[0] + slope * (ws[1] - ws[0]) - vals[1]).abs() < 1e-9);
    }

    #[test]
    fn reports_are_ordered_and_reverify(seed in any::<u64>(), which in 0usize..6) {
        let spec: StateSpec = ["ghz:3", "w:3", "ti:4:2", "dicke:4:2", "linear:4", "bisep3"][which].parse().unwrap();
        let state = spec.build().unwrap();
        let sections = Sections { strength: false, ..Sections::default() };
        let budget = Budget { restarts: 4, fit_samples: 300, ..Budget::default() };
        let r = analyze(&spec, &budget, seed, &sections).unwrap();
        r.verify(&state).unwrap();
        let pe = r.pe.as_ref().unwrap();
        prop_assert!(pe.lo <= pe.hi && pe.hi < r.n);
        let star = r.pnl_star.as_ref().unwrap().lb;
        prop_assert!(r.pnl.lb <= star && star <= pe.hi);
    }
}

fn strength_w3() -> &'static persistency::persistency::StrengthResult {
    static CELL: std::sync::OnceLock<persistency::persistency::StrengthResult> = std::sync::OnceLock::new();
    CELL.get_or_init(|| strength(&State::from(states::w_state(3).unwrap()), 0, &Budget::default(), 0).unwrap())
}

#[test]
fn psi_small_b_pairs_violate_chsh() {
    let mut rng = random::rng(5);
    for _ in 0..20 {
        let n = 3;
        let b = rng.gen_range(0.01..0.1) / (states::psi_term_count(n) as f64).sqrt();
        let psi = states::psi_max_persistency(n, b).unwrap();
        for pair in [[0, 1], [1, 2], [0, 2]] {
            let (v, _) = max_chsh(&psi.reduced(&pair).unwrap(), 16, 3).unwrap();
            assert!(v > 2.0, "b {b} pair {pair:?}: {v}");
        }
    }
}

#[test]
fn w_equals_dicke_one() {
    for n in 2..=7 {
        let (w, d) = (states::w_state(n).unwrap(), states::dicke_state(n, 1).unwrap());
        assert_eq!(w.amplitudes(), d.amplitudes());
    }
}

#[test]
fn separable_decompositions_roundtrip() {
    let rho = random_mixed(3, 2).mix_with_white_noise(0.2).unwrap();
    let EntanglementStatus::Separable(d) = entanglement_status(&rho) else { panic!("expected separable") };
    let json = serde_json::to_string(&d).unwrap();
    let back: SeparableDecomposition = serde_json::from_str(&json).unwrap();
    back.verify(&rho).unwrap();
}
