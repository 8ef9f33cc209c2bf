mod common;

use common::{c, mean_and_se, random_config, stream};
use locc_trace::blockenc::dilate;
use locc_trace::numkit::{haar_unitary, random_density_matrix, ComplexMatrix, RngStream};
use locc_trace::parallel::{with_threads, Execution};
use locc_trace::polyapprox::{BoundedPolynomial, Parity};
use locc_trace::protocol::{
    combine_components, conditional_mean, conditional_mean_states, empirical_variance, estimate_trace, haar_mean,
    median_of_means, plan_samples, replicate, run_shots, run_shots_frozen, IterationComponents, IterationStates,
    Message, PartyId, Payload, ProtocolConfig, Role, ShotTable,
};
use locc_trace::svt::Part;
use locc_trace::Complex64;

fn zero_poly() -> BoundedPolynomial {
    BoundedPolynomial::new(vec![0.0], Parity::Even)
}

fn odd_cubic() -> BoundedPolynomial {
    let x3 = BoundedPolynomial::monomial(3);
    let coeffs = (0..4).map(|k| 0.5 * x3.cheb_coeffs[k] + if k == 1 { 0.5 } else { 0.0 }).collect();
    BoundedPolynomial::new(coeffs, Parity::Odd)
}

fn pure_state_config(n: usize, m: usize, seed: u64) -> ProtocolConfig {
    let rho = random_density_matrix(2, 1, 0.0, &stream(seed, 7)).unwrap();
    let be = dilate(&rho, 1.0).unwrap();
    let id = BoundedPolynomial::identity();
    ProtocolConfig::new(n, m, seed, id.clone(), id, be.clone(), be).unwrap()
}

/// Algorithm-level reference: literal double sums over k, l.
fn reference_value(c: &[IterationComponents]) -> Complex64 {
    let i = c.iter();
    let n = c.len() as f64;
    let j = Complex64::i();
    let mut z = Complex64::new(0.0, 0.0);
    for it in i {
        z += it.z_rr - j * it.z_ri - j * it.z_ir - it.z_ii;
    }
    let mut xy = Complex64::new(0.0, 0.0);
    for k in c {
        for l in c {
            xy += k.x_re * l.y_re - j * k.x_re * l.y_im - j * k.x_im * l.y_re - k.x_im * l.y_im;
        }
    }
    z / n - xy / (n * n)
}

fn decomposition_value(c: &[IterationComponents]) -> Complex64 {
    let n = c.len() as f64;
    let sum = |f: &dyn Fn(&IterationComponents) -> f64| c.iter().map(f).sum::<f64>();
    let cross = |f: &dyn Fn(&IterationComponents) -> f64, g: &dyn Fn(&IterationComponents) -> f64| sum(f) * sum(g);
    let t_rr = sum(&|i| i.z_rr) / n - cross(&|i| i.x_re, &|i| i.y_re) / (n * n);
    let t_ri = -sum(&|i| i.z_ri) / n + cross(&|i| i.x_re, &|i| i.y_im) / (n * n);
    let t_ir = -sum(&|i| i.z_ir) / n + cross(&|i| i.x_im, &|i| i.y_re) / (n * n);
    let t_ii = -sum(&|i| i.z_ii) / n + cross(&|i| i.x_im, &|i| i.y_im) / (n * n);
    Complex64::new(t_rr + t_ii, t_ri + t_ir)
}

#[test]
fn zero_polynomials_give_fair_coins() {
    let cfg = random_config(2, 1, zero_poly(), zero_poly(), 50, 40);
    let table = run_shots(&cfg).unwrap();
    let total = table.communicated_bits();
    assert_eq!(total, 50 * 2 * 4 * 40);
    let ones: usize = table
        .transcript
        .iter()
        .map(|msg| match &msg.payload {
            Payload::Bits(b) => b.iter().filter(|&&x| x).count(),
        })
        .sum();
    let mean = ones as f64 / total as f64;
    let sigma = (0.25 / total as f64).sqrt();
    assert!((mean - 0.5).abs() <= 5.0 * sigma);
}

#[test]
fn identity_block_re_bits_are_zero() {
    let be = dilate(&ComplexMatrix::identity(2), 1.0).unwrap();
    let id = BoundedPolynomial::identity();
    let cfg = ProtocolConfig::new(5, 8, 3, id.clone(), id, be.clone(), be).unwrap();
    let table = run_shots(&cfg).unwrap();
    for i in 0..5 {
        for j in 0..8 {
            for role in [Role::U, Role::V] {
                assert_eq!(table.bit(i, j, PartyId::Alice, role, Part::Re), Some(false));
            }
            for role in [Role::U, Role::W] {
                assert_eq!(table.bit(i, j, PartyId::Bob, role, Part::Re), Some(false));
            }
        }
        assert_eq!(table.zeros(i, PartyId::Alice, Role::V, Part::Re).unwrap(), 8);
    }
}

#[test]
fn table_has_exactly_the_collected_pairs() {
    let cfg = random_config(2, 2, odd_cubic(), odd_cubic(), 2, 3);
    let table = run_shots(&cfg).unwrap();
    assert!(table.bit(0, 0, PartyId::Alice, Role::W, Part::Re).is_none());
    assert!(table.bit(0, 0, PartyId::Bob, Role::V, Part::Im).is_none());
    assert!(table.bit(0, 3, PartyId::Alice, Role::U, Part::Re).is_none());
    assert!(table.bit(2, 0, PartyId::Alice, Role::U, Part::Re).is_none());
    assert!(table.zeros(0, PartyId::Alice, Role::W, Part::Re).is_err());
    for i in 0..2 {
        for part in Part::BOTH {
            for (party, role) in
                [(PartyId::Alice, Role::U), (PartyId::Alice, Role::V), (PartyId::Bob, Role::U), (PartyId::Bob, Role::W)]
            {
                assert!((0..3).all(|j| table.bit(i, j, party, role, part).is_some()));
            }
        }
    }
}

#[test]
fn fixed_seed_tables_identical_across_runs_and_threads() {
    let cfg = random_config(4, 9, odd_cubic(), BoundedPolynomial::monomial(2), 2, 3);
    let reference = run_shots(&cfg).unwrap();
    for threads in [1, 2, 8] {
        let t = with_threads(threads, || run_shots(&cfg).unwrap());
        assert_eq!(t, reference);
    }
    let seq = cfg.prepare().unwrap().with_execution(Execution::Sequential).run_shots().unwrap();
    assert_eq!(seq, reference);
    assert_ne!(run_shots(&cfg.clone().with_seed(10)).unwrap(), reference);
}

#[test]
fn transcript_is_classical_one_message_per_party_per_round() {
    let cfg = random_config(2, 4, odd_cubic(), odd_cubic(), 6, 5);
    let table = run_shots(&cfg).unwrap();
    assert_eq!(table.transcript.len(), 12);
    for (k, Message { party, round, payload }) in table.transcript.iter().enumerate() {
        assert_eq!(*round, k / 2);
        assert_eq!(*party, if k % 2 == 0 { PartyId::Alice } else { PartyId::Bob });
        let Payload::Bits(bits) = payload;
        assert_eq!(bits.len(), 4 * 5);
    }
    let json = serde_json::to_value(&table).unwrap();
    let text = json.to_string();
    assert!(!text.contains("unitary") && !text.contains("block"));
}

#[test]
fn all_zero_bits_formula() {
    let (d, m) = (2, 3);
    let rounds = vec![[vec![false; 4 * m], vec![false; 4 * m]]; 2];
    let table = ShotTable::from_bits(d, m, rounds).unwrap();
    let cfg = random_config(d, 0, zero_poly(), zero_poly(), 2, m);
    let est = estimate_trace(&table, &cfg).unwrap();
    let comps = est.components.clone().unwrap();
    for it in &comps {
        assert_eq!([it.x_re, it.x_im, it.y_re, it.y_im], [2.0; 4]);
        assert_eq!([it.z_rr, it.z_ri, it.z_ir, it.z_ii], [6.0; 4]);
    }
    // (6 − 6i − 6i − 6) − (4 − 4i − 4i − 4)
    assert_eq!(est.value, c(0.0, -4.0));
    assert_eq!(est.value, reference_value(&comps));
}

#[test]
fn value_recomputable_from_components() {
    for seed in 0..5 {
        let cfg = random_config(4, seed, odd_cubic(), BoundedPolynomial::identity(), 7, 5);
        let table = run_shots(&cfg).unwrap();
        let est = estimate_trace(&table, &cfg).unwrap();
        let comps = est.components.as_ref().unwrap();
        assert_eq!(est.value, combine_components(comps));
        assert!((est.value - reference_value(comps)).norm() < 1e-9);
        assert!((est.value - decomposition_value(comps)).norm() < 1e-9);
    }
}

#[test]
fn estimate_rejects_mismatched_table() {
    let cfg = random_config(2, 0, zero_poly(), zero_poly(), 2, 3);
    let table = run_shots(&cfg).unwrap();
    let other = cfg.clone().with_samples(3, 3);
    assert!(estimate_trace(&table, &other).is_err());
    assert!(ShotTable::from_bits(2, 3, vec![[vec![false; 11], vec![false; 12]]]).is_err());
}

#[test]
fn zero_polynomials_estimate_zero() {
    let cfg = random_config(4, 5, zero_poly(), zero_poly(), 200, 16);
    let est = cfg.prepare().unwrap().estimate().unwrap();
    assert!(est.value.norm() <= 5.0 * est.empirical_variance.sqrt());
}

#[test]
fn pure_state_purity_is_one() {
    let cfg = pure_state_config(400, 4, 11);
    let prep = cfg.prepare().unwrap();
    let values: Vec<_> = replicate(&prep, 50).unwrap().iter().map(|t| t.value).collect();
    let (mean, se) = mean_and_se(&values);
    assert!((mean - c(1.0, 0.0)).norm() <= 5.0 * se, "{mean} ± {se}");
}

#[test]
fn conditional_mean_of_zero_polynomials_is_zero() {
    let cfg = random_config(2, 0, zero_poly(), zero_poly(), 2, 3);
    let us: Vec<_> = (0..2)
        .map(|i| {
            let s = stream(i, 0);
            (
                haar_unitary(2, &s.child(0)).unwrap(),
                haar_unitary(2, &s.child(1)).unwrap(),
                haar_unitary(2, &s.child(2)).unwrap(),
            )
        })
        .collect();
    assert_eq!(conditional_mean(&us, &cfg).unwrap(), c(0.0, 0.0));
}

#[test]
fn conditional_mean_matches_brute_force_enumeration() {
    let cfg = random_config(2, 21, BoundedPolynomial::identity(), BoundedPolynomial::identity(), 1, 1);
    let prep = cfg.prepare().unwrap();
    let s = stream(77, 0);
    let (u, v, w) = (
        haar_unitary(2, &s.child(0)).unwrap(),
        haar_unitary(2, &s.child(1)).unwrap(),
        haar_unitary(2, &s.child(2)).unwrap(),
    );
    let st = IterationStates::from_unitaries(&u, &v, &w);
    // Bit order per party: shared Re, shared Im, local Re, local Im.
    let pa = [prep.alice.outcome_p0(&st.u).unwrap(), prep.alice.outcome_p0(&st.v).unwrap()];
    let pb = [prep.bob.outcome_p0(&st.u).unwrap(), prep.bob.outcome_p0(&st.w).unwrap()];
    let probs = [pa[0][0], pa[0][1], pa[1][0], pa[1][1], pb[0][0], pb[0][1], pb[1][0], pb[1][1]];
    let mut expect = c(0.0, 0.0);
    let mut total_weight = 0.0;
    for outcome in 0u32..256 {
        let bits: Vec<bool> = (0..8).map(|k| outcome >> k & 1 == 1).collect();
        let weight: f64 = bits.iter().zip(&probs).map(|(&b, &p0)| if b { 1.0 - p0 } else { p0 }).product();
        let table = ShotTable::from_bits(2, 1, vec![[bits[..4].to_vec(), bits[4..].to_vec()]]).unwrap();
        expect += estimate_trace(&table, &cfg).unwrap().value * weight;
        total_weight += weight;
    }
    assert!((total_weight - 1.0).abs() < 1e-12);
    let cm = conditional_mean(&[(u, v, w)], &cfg).unwrap();
    assert!((cm - expect).norm() < 1e-12, "{cm} vs {expect}");
}

#[test]
fn frozen_replays_converge_to_conditional_mean() {
    let cfg = random_config(2, 31, odd_cubic(), BoundedPolynomial::identity(), 3, 4);
    let prep = cfg.prepare().unwrap();
    let states: Vec<_> = (0..3)
        .map(|i| {
            let s = stream(500 + i, 0);
            IterationStates::from_unitaries(
                &haar_unitary(2, &s.child(0)).unwrap(),
                &haar_unitary(2, &s.child(1)).unwrap(),
                &haar_unitary(2, &s.child(2)).unwrap(),
            )
        })
        .collect();
    let target = conditional_mean_states(&prep, &states).unwrap();
    let values: Vec<_> = (0..10_000u64)
        .map(|r| {
            let table = run_shots_frozen(&prep, &states, &RngStream::new(r)).unwrap();
            estimate_trace(&table, &cfg).unwrap().value
        })
        .collect();
    let (mean, se) = mean_and_se(&values);
    assert!((mean - target).norm() <= 5.0 * se, "{mean} vs {target} (se {se})");
}

#[test]
fn haar_mean_examples() {
    let z = ComplexMatrix::zeros(3, 3);
    assert_eq!(haar_mean(&z, &z, 3).unwrap(), c(0.0, 0.0));
    let id = ComplexMatrix::identity(3);
    assert!((haar_mean(&id, &id, 3).unwrap() - c(3.0, 0.0)).norm() < 1e-12);
    assert!(haar_mean(&id, &ComplexMatrix::identity(2), 3).is_err());
}

#[test]
fn haar_mean_equals_trace_product_on_transformed_blocks() {
    for d in [2, 4] {
        for seed in 0..4 {
            let cfg = random_config(d, seed, odd_cubic(), BoundedPolynomial::monomial(2), 1, 1);
            let prep = cfg.prepare().unwrap();
            let (p, q) = (&prep.alice.block().value, &prep.bob.block().value);
            let hm = haar_mean(p, q, d).unwrap();
            assert!((hm - (p * q).trace()).norm() <= 1e-9);
        }
    }
}

#[test]
fn streaming_and_recorded_paths_agree_in_mean() {
    let cfg = random_config(2, 41, odd_cubic(), BoundedPolynomial::identity(), 20, 4);
    let prep = cfg.prepare().unwrap();
    let target = haar_mean(&prep.alice.block().value, &prep.bob.block().value, 2).unwrap();
    let streaming: Vec<_> = replicate(&prep, 1000).unwrap().iter().map(|t| t.value).collect();
    let recorded: Vec<_> = (0..1000u64)
        .map(|r| prep.clone().with_stream(RngStream::new(r).child(1)).estimate_recorded().unwrap().value)
        .collect();
    for values in [streaming, recorded] {
        let (mean, se) = mean_and_se(&values);
        assert!((mean - target).norm() <= 5.0 * se, "{mean} vs {target}");
    }
}

#[test]
fn streaming_estimate_independent_of_threads() {
    let cfg = random_config(4, 8, odd_cubic(), BoundedPolynomial::identity(), 300, 16);
    let prep = cfg.prepare().unwrap();
    let base = prep.clone().with_execution(Execution::Sequential).estimate().unwrap();
    for threads in [1, 2, 8] {
        let est = with_threads(threads, || prep.estimate().unwrap());
        assert_eq!(est.value.re.to_bits(), base.value.re.to_bits());
        assert_eq!(est.value.im.to_bits(), base.value.im.to_bits());
        assert_eq!(est.empirical_variance.to_bits(), base.empirical_variance.to_bits());
    }
}

#[test]
fn plan_samples_examples() {
    assert_eq!(plan_samples(2, 0.1).unwrap(), (100, 4));
    assert_eq!(plan_samples(2, 1.0).unwrap().0, 1);
    assert_eq!(plan_samples(4, 0.05).unwrap(), (400, 16));
    assert!(plan_samples(4, 0.0).is_err());
}

#[test]
fn variance_scaling_with_iterations() {
    let cfg = random_config(2, 13, zero_poly(), zero_poly(), 10, 4);
    let var = |n: usize, seed: u64| empirical_variance(&cfg.clone().with_samples(n, 4).with_seed(seed), 400).unwrap();
    let (v10, v40, v160) = (var(10, 1), var(40, 1), var(160, 1));
    assert!(v10 > v40 && v40 > v160);
    for (n, v) in [(10.0, v10), (40.0, v40), (160.0, v160)] {
        assert!(v * n < 2.0 * v10 * 10.0, "C/N bound violated at N={n}");
    }
    let ratios: Vec<f64> = (0..5).map(|r| var(20, 100 + r) / var(40, 200 + r)).collect();
    let mean_ratio = ratios.iter().sum::<f64>() / 5.0;
    assert!((2.0 / 1.5..=2.0 * 1.5).contains(&mean_ratio), "ratio {mean_ratio}");
}

#[test]
fn more_shots_reduce_variance() {
    let cfg = random_config(4, 17, odd_cubic(), odd_cubic(), 25, 16);
    let v_m = empirical_variance(&cfg, 400).unwrap();
    let v_8m = empirical_variance(&cfg.clone().with_samples(25, 128), 400).unwrap();
    assert!(v_8m < v_m, "{v_8m} !< {v_m}");
}

#[test]
fn delta_method_variance_tracks_replay_variance() {
    let cfg = random_config(2, 19, odd_cubic(), BoundedPolynomial::identity(), 200, 8);
    let prep = cfg.prepare().unwrap();
    let reps = replicate(&prep, 300).unwrap();
    let values: Vec<_> = reps.iter().map(|t| t.value).collect();
    let (_, se) = mean_and_se(&values);
    let replay_var = se * se * values.len() as f64;
    let predicted = reps.iter().map(|t| t.empirical_variance).sum::<f64>() / reps.len() as f64;
    let ratio = predicted / replay_var;
    assert!((0.7..1.4).contains(&ratio), "ratio {ratio}");
}

#[test]
fn median_of_means_is_componentwise() {
    let v = [c(1.0, 5.0), c(3.0, -1.0), c(2.0, 0.0)];
    assert_eq!(median_of_means(&v).unwrap(), c(2.0, 0.0));
    assert!(median_of_means(&[]).is_err());
}
