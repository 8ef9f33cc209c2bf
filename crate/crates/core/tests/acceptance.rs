//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p locc-trace --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{exact_relative_entropy, exact_renyi, mean_and_se, random_config, stream};
use locc_trace::apps::{
    estimate_trace_fg, estimate_trace_fg_encoded, hamiltonian_expectation, linear_solve, relative_entropy,
    renyi_entropy, AppOptions, FgMode, FnLabel, RenyiParams, SimOptions,
};
use locc_trace::blockenc::{dilate, dilate_perturbed, from_purification, verify};
use locc_trace::numkit::{
    haar_state, haar_unitary, random_contraction, random_density_matrix, random_hermitian, ComplexMatrix,
};
use locc_trace::parallel::{with_threads, Execution};
use locc_trace::polyapprox::{inverse_poly, log_poly, power_poly, rect_poly, BoundedPolynomial, Parity, PowerSign};
use locc_trace::protocol::{haar_mean, replicate, run_shots, Payload, ProtocolConfig};
use locc_trace::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn run(id: u8, name: &str, limit: Duration, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result =
        std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)).unwrap_or_else(|_| outcome(false, "panicked"));
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = result.pass && in_time;
    println!(
        "{} [{id}] {name}: {} ({:.1}s, limit {}s)",
        if pass { "PASS" } else { "FAIL" },
        result.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn odd_cubic() -> BoundedPolynomial {
    let x3 = BoundedPolynomial::monomial(3);
    let coeffs = (0..4).map(|k| 0.5 * x3.cheb_coeffs[k] + if k == 1 { 0.5 } else { 0.0 }).collect();
    BoundedPolynomial::new(coeffs, Parity::Odd)
}

fn fixture_polys(k: u64) -> (BoundedPolynomial, BoundedPolynomial) {
    match k % 4 {
        0 => (BoundedPolynomial::identity(), BoundedPolynomial::identity()),
        1 => (odd_cubic(), BoundedPolynomial::monomial(2)),
        2 => (BoundedPolynomial::monomial(2), power_poly(0.5, Parity::Even, 0.2, 1e-2, PowerSign::Positive).unwrap()),
        _ => (inverse_poly(0.3, 1e-2).unwrap(), odd_cubic()),
    }
}

fn unbiasedness() -> Outcome {
    let (mut worst_exact, mut worst_z) = (0.0f64, 0.0f64);
    for d in [2usize, 4] {
        for k in 0..4u64 {
            let (f, g) = fixture_polys(k);
            let cfg = random_config(d, 1000 + k, f, g, 50, d * d);
            let prep = cfg.prepare().unwrap();
            let (p, q) = (&prep.alice.block().value, &prep.bob.block().value);
            let target = (p * q).trace();
            worst_exact = worst_exact.max((haar_mean(p, q, d).unwrap() - target).norm());
            let values: Vec<Complex64> = replicate(&prep, 2000).unwrap().iter().map(|t| t.value).collect();
            let (mean, se) = mean_and_se(&values);
            worst_z = worst_z.max((mean - target).norm() / se);
        }
    }
    outcome(
        worst_exact <= 1e-9 && worst_z <= 5.0,
        format!("max |haar_mean - Tr(PQ)| = {worst_exact:.1e}, max deviation {worst_z:.2} SE"),
    )
}

fn variance_law() -> Outcome {
    let mut ratios = Vec::new();
    for d in [2usize, 4] {
        let mut diag = vec![0.0; d];
        diag[0] = 1.0;
        let be = dilate(&ComplexMatrix::from_diagonal_real(&diag), 1.0).unwrap();
        let id = BoundedPolynomial::identity();
        for m in [d * d, 4 * d * d, 16 * d * d] {
            for n in [25usize, 100] {
                let cfg =
                    ProtocolConfig::new(n, m, 7 + (d * m * n) as u64, id.clone(), id.clone(), be.clone(), be.clone())
                        .unwrap();
                let values: Vec<Complex64> =
                    replicate(&cfg.prepare().unwrap(), 200).unwrap().iter().map(|t| t.value).collect();
                let (_, se) = mean_and_se(&values);
                let var = se * se * values.len() as f64;
                let (df, mf) = (d as f64, m as f64);
                let law = 1.0 + df * df / mf + df.powi(4) / (mf * mf);
                ratios.push(var * n as f64 / law);
            }
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let spread = hi / lo;
    outcome(spread <= 3.0, format!("Var(T)*N / law spread {spread:.3} over {} cells", ratios.len()))
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn certificates() -> Outcome {
    let (delta, eps) = (0.1, 1e-3);
    let mut notes = Vec::new();
    let mut ok = true;

    let (p, k) = log_poly(delta, eps).unwrap();
    let err = grid(delta, 1.0, 10_000).map(|x| (p.eval(x) - (1.0 / x).ln() / k).abs()).fold(0.0, f64::max);
    let sup = grid(-1.0, 1.0, 10_000).map(|x| p.eval(x).abs()).fold(0.0, f64::max);
    ok &= err <= eps && sup <= 1.0;
    notes.push(format!("log err {err:.1e} sup {sup:.3}"));

    let p = inverse_poly(delta, eps).unwrap();
    let err = grid(delta, 1.0, 10_000).map(|x| (p.eval(x) - 0.75 * delta / x).abs()).fold(0.0, f64::max);
    let at_delta = (p.eval(delta) - 0.75).abs();
    ok &= err <= eps && at_delta <= eps;
    notes.push(format!("inverse err {err:.1e} |P(delta)-3/4| {at_delta:.1e}"));

    let (t, dp) = (0.5, 0.1);
    let p = rect_poly(t, dp, eps).unwrap();
    let plateau = grid(0.0, t - dp, 10_000).all(|x| (1.0 - eps..=1.0).contains(&p.eval(x)));
    let stop = grid(t + dp, 1.0, 10_000).all(|x| (0.0..=eps).contains(&p.eval(x)));
    ok &= plateau && stop;
    notes.push(format!("rect plateau {plateau} stopband {stop}"));

    let mut worst = f64::NEG_INFINITY;
    for cexp in [0.5, 1.5, 2.0] {
        let p = power_poly(cexp, Parity::Even, delta, eps, PowerSign::Positive).unwrap();
        let excess = grid(-1.0, 1.0, 10_000)
            .map(|x| p.eval(x).abs() - (x.abs().powf(cexp) / 2.0 + eps))
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(excess);
    }
    ok &= worst <= 0.0;
    notes.push(format!("power envelope slack {:.1e}", -worst));
    outcome(ok, notes.join(", "))
}

fn success_rate(label: &str, runs: impl Iterator<Item = f64>, eps: f64, notes: &mut Vec<String>) -> bool {
    let errors: Vec<f64> = runs.collect();
    let hits = errors.iter().filter(|&&e| e <= eps).count();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    notes.push(format!("{label} {hits}/{} (worst {worst:.3})", errors.len()));
    hits >= 7
}

fn relative_entropy_check() -> Outcome {
    let eps = 0.1;
    let delta = 0.1;
    let mut fixtures = vec![(
        "diag",
        ComplexMatrix::from_diagonal_real(&[0.375, 0.125, 0.375, 0.125]),
        ComplexMatrix::from_diagonal_real(&[0.125, 0.375, 0.125, 0.375]),
    )];
    for (k, name) in ["rand1", "rand2"].into_iter().enumerate() {
        let rho = random_density_matrix(4, 4, delta, &stream(2000 + k as u64, 0)).unwrap();
        let sigma = random_density_matrix(4, 4, delta, &stream(2000 + k as u64, 1)).unwrap();
        fixtures.push((name, rho, sigma));
    }
    let mut notes = Vec::new();
    let mut ok = (exact_relative_entropy(&fixtures[0].1, &fixtures[0].2) - 0.5 * 3f64.ln()).abs() < 1e-12;
    for (name, rho, sigma) in &fixtures {
        let exact = exact_relative_entropy(rho, sigma);
        let runs = (0..10u64).map(|seed| {
            let r = relative_entropy(rho, sigma, eps, delta, &AppOptions::default().with_seed(seed)).unwrap();
            (r.value - exact).abs()
        });
        ok &= success_rate(name, runs, eps, &mut notes);
    }
    outcome(ok, notes.join(", "))
}

fn renyi_check() -> Outcome {
    let eps = 0.1;
    let cases = [("alpha=2", 2.0, [0.7, 0.3], [0.4, 0.6], 0.3), ("alpha=1/2", 0.5, [0.9, 0.1], [0.5, 0.5], 0.1)];
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, alpha, p, q, delta) in cases {
        let (rho, sigma) = (ComplexMatrix::from_diagonal_real(&p), ComplexMatrix::from_diagonal_real(&q));
        let classical =
            (p.iter().zip(&q).map(|(a, b)| a.powf(alpha) * b.powf(1.0 - alpha)).sum::<f64>()).ln() / (alpha - 1.0);
        ok &= (classical - exact_renyi(&rho, &sigma, alpha)).abs() < 1e-12;
        let params = RenyiParams { delta: Some(delta), ..Default::default() };
        let runs = (0..10u64).map(|seed| {
            let r = renyi_entropy(&rho, &sigma, alpha, eps, &params, &AppOptions::default().with_seed(seed)).unwrap();
            (r.value - classical).abs()
        });
        ok &= success_rate(name, runs, eps, &mut notes);
    }
    outcome(ok, notes.join(", "))
}

fn linear_solver_check() -> Outcome {
    let eps = 0.1;
    let u = haar_unitary(4, &stream(3000, 0)).unwrap();
    let v = haar_unitary(4, &stream(3000, 1)).unwrap();
    let a = &(&u * &ComplexMatrix::from_diagonal_real(&[1.0, 0.7, 0.4, 0.25])) * &v.adjoint();
    let mut b = Vec::new();
    haar_state(4, &mut stream(3000, 2).rng(), &mut b);
    let mut notes = vec![format!("sigma_min {:.3}", a.singular_values()[3])];
    let runs =
        (0..10u64).map(|seed| linear_solve(&a, &b, eps, 0.25, &AppOptions::default().with_seed(seed)).unwrap().error);
    let ok = success_rate("||x~ - A^-1 b|| <= 0.1", runs, eps, &mut notes);
    outcome(ok, notes.join(", "))
}

fn hamsim_check() -> Outcome {
    let eps = 0.05;
    let t = 1.0 / (2.0 * 2.0);
    let sim = SimOptions::default();
    let h1 = ComplexMatrix::from_diagonal_real(&[0.3, -0.5, 1.0, 0.2]);
    let h2 = ComplexMatrix::from_diagonal_real(&[-0.7, 0.1, 0.4, -0.9]);
    let m = random_hermitian(4, 1.0, &stream(4000, 0)).unwrap();
    let rho = random_density_matrix(4, 4, 0.0, &stream(4000, 1)).unwrap();
    let r = hamiltonian_expectation(&h1, &h2, &m, &rho, t, eps, &sim, &AppOptions::default()).unwrap();
    let commuting = (r.estimate - r.exact).abs();
    let mut ok = commuting <= eps && r.commutator_norm <= 1e-12;

    let mut violations = 0;
    let mut worst_ratio = 0.0f64;
    for k in 0..100u64 {
        let h1 = random_hermitian(4, 1.0, &stream(4100 + k, 0)).unwrap();
        let h2 = random_hermitian(4, 1.0, &stream(4100 + k, 1)).unwrap();
        let m = random_hermitian(4, 1.0, &stream(4100 + k, 2)).unwrap();
        let rho = random_density_matrix(4, 1 + (k as usize % 4), 0.0, &stream(4100 + k, 3)).unwrap();
        let r = hamiltonian_expectation(&h1, &h2, &m, &rho, t, eps, &sim, &AppOptions::default().with_seed(k)).unwrap();
        let err = (r.estimate - r.exact).abs();
        let bound = r.commutator_norm + eps;
        worst_ratio = worst_ratio.max(err / bound);
        if err > bound {
            violations += 1;
        }
    }
    ok &= violations == 0;
    outcome(
        ok,
        format!(
            "commuting |S-exact| = {commuting:.4}, random: {violations}/100 violations, max err/bound {worst_ratio:.3}"
        ),
    )
}

fn locc_determinism() -> Outcome {
    let mut ok = true;
    let cfg = random_config(4, 5000, odd_cubic(), BoundedPolynomial::monomial(2), 5, 16);
    let reference = run_shots(&cfg).unwrap();
    let classical = reference.transcript.iter().all(|msg| matches!(msg.payload, Payload::Bits(_)));
    let text = serde_json::to_string(&reference).unwrap();
    ok &= classical && !text.contains("unitary") && !text.contains("block");
    let prep = cfg.clone().with_samples(2000, 16).prepare().unwrap();
    let estimate = prep.clone().with_execution(Execution::Sequential).estimate().unwrap();
    let opts = AppOptions::default();
    let (a, b) =
        (random_contraction(4, 0.9, &stream(5000, 1)).unwrap(), random_contraction(4, 0.9, &stream(5000, 2)).unwrap());
    let app = |threads| {
        with_threads(threads, || {
            estimate_trace_fg(&a, &b, FnLabel::Cube, FnLabel::Identity, 0.05, 0.1, FgMode::ExactHomogeneous, &opts)
                .unwrap()
                .value
        })
    };
    let app_ref = app(1);
    for threads in [1, 2, 8] {
        ok &= with_threads(threads, || run_shots(&cfg).unwrap()) == reference;
        let e = with_threads(threads, || prep.estimate().unwrap());
        ok &=
            e.value.re.to_bits() == estimate.value.re.to_bits() && e.value.im.to_bits() == estimate.value.im.to_bits();
        let v = app(threads);
        ok &= v.re.to_bits() == app_ref.re.to_bits() && v.im.to_bits() == app_ref.im.to_bits();
    }
    outcome(
        ok,
        format!(
            "{} classical messages, {} bits; shot tables, estimates and app values bit-identical on 1/2/8 threads",
            reference.transcript.len(),
            reference.communicated_bits()
        ),
    )
}

fn partial_trace(psi: &[Complex64], ancillas: u32) -> ComplexMatrix {
    let ds = psi.len() >> ancillas;
    let full = ComplexMatrix::outer(psi, psi);
    (0..1usize << ancillas).fold(ComplexMatrix::zeros(ds, ds), |acc, a| &acc + &full.submatrix(a * ds, a * ds, ds, ds))
}

fn block_encoding_contracts() -> Outcome {
    let mut worst_residual = 0.0f64;
    for k in 0..50u64 {
        let d = [2usize, 4, 8][k as usize % 3];
        let a = random_contraction(d, 0.95, &stream(6000 + k, 0)).unwrap();
        let be = dilate(&a, 1.0).unwrap();
        let (_, r) = verify(&be, &a).unwrap();
        worst_residual = worst_residual.max(r).max(be.unitary.unitarity_defect());
    }
    let mut worst_purif = 0.0f64;
    for k in 0..10u64 {
        let mut psi = Vec::new();
        haar_state(16, &mut stream(6100 + k, 0).rng(), &mut psi);
        let (rho, be) = from_purification(&psi, 2).unwrap();
        let oracle = partial_trace(&psi, 2);
        worst_purif = worst_purif.max((&rho - &oracle).max_abs()).max((&be.block() - &oracle).max_abs());
    }

    let eps = 0.05;
    let mut worst_slack = f64::INFINITY;
    let pairs = [(FnLabel::Identity, FnLabel::Identity), (FnLabel::Square, FnLabel::Identity)];
    for k in 0..4u64 {
        let a = random_hermitian(2, 0.9, &stream(6200 + k, 0)).unwrap();
        let b = random_hermitian(2, 0.9, &stream(6200 + k, 1)).unwrap();
        let inject = [1e-3, 1e-2][k as usize % 2];
        let be_a = dilate_perturbed(&a, 1.0, inject, &stream(6200 + k, 2)).unwrap();
        let be_b = dilate_perturbed(&b, 1.0, inject, &stream(6200 + k, 3)).unwrap();
        for (f, g) in pairs {
            let exact = common::spectral_apply(&a, |x| if f == FnLabel::Square { x * x } else { x }).trace_product(&b);
            let r =
                estimate_trace_fg_encoded(&be_a, &be_b, f, g, eps, 0.1, &AppOptions::default().with_seed(k)).unwrap();
            let l = f.lipschitz().unwrap().max(g.lipschitz().unwrap());
            let bound = (l + 1.0) * 2.0 * be_a.eps.max(be_b.eps) + eps;
            worst_slack = worst_slack.min(bound - (r.value - exact).norm());
        }
    }
    let ok = worst_residual <= 1e-10 && worst_purif <= 1e-12 && worst_slack >= 0.0;
    outcome(
        ok,
        format!(
            "dilation residual {worst_residual:.1e}, purification vs partial trace {worst_purif:.1e}, min Lipschitz slack {worst_slack:.4}"
        ),
    )
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        run(1, "unbiasedness", secs(120), unbiasedness),
        run(2, "variance law", secs(300), variance_law),
        run(3, "polynomial certificates", secs(30), certificates),
        run(4, "relative entropy", secs(300), relative_entropy_check),
        run(5, "Renyi divergence", secs(300), renyi_check),
        run(6, "linear solver", secs(300), linear_solver_check),
        run(7, "Hamiltonian simulation", secs(300), hamsim_check),
        run(8, "LOCC structure and determinism", secs(60), locc_determinism),
        run(9, "block-encoding contracts", secs(60), block_encoding_contracts),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
