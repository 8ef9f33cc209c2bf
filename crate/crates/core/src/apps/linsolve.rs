use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{certified_error, require_unit_interval, run_term, AppOptions, BudgetItem, TermInput, TraceTerm};
use crate::blockenc::dilate;
use crate::error::{Error, Result};
use crate::numkit::{svd, ComplexMatrix, RngStream};
use crate::polyapprox::{inverse_poly, BoundedPolynomial};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub x_tilde: Vec<Complex64>,
    /// Direct solve, for reference.
    pub x_exact: Vec<Complex64>,
    pub per_component_eps: f64,
    /// `‖A x̃ − b‖`.
    pub residual: f64,
    /// `‖x̃ − A⁻¹b‖`.
    pub error: f64,
    pub delta: f64,
    pub components: Vec<TraceTerm>,
    pub eps_budget: Vec<BudgetItem>,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `A x = b` componentwise, `x_k = Tr(A⁻¹ |b⟩⟨k|)`.
///
/// Alice encodes `A†` and applies the odd polynomial `≈ 3δ/(4x)`, which maps
/// it to `≈ (3δ/4) A⁻¹`; Bob holds `|b⟩⟨k|`. Each component gets error
/// `eps/√d`, so `‖x̃ − A⁻¹b‖ ≤ eps`.
pub fn linear_solve(
    a: &ComplexMatrix,
    b: &[Complex64],
    eps: f64,
    delta: f64,
    opts: &AppOptions,
) -> Result<SolveResult> {
    require_unit_interval("eps", eps)?;
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 1/2]")));
    }
    if !a.is_square() || !a.rows().is_power_of_two() {
        return Err(Error::InvalidDimension(format!(
            "A must be square with power-of-two size, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let d = a.rows();
    if b.len() != d {
        return Err(Error::InvalidDimension(format!("b has length {}, A is {d}x{d}", b.len())));
    }
    let nb = norm(b);
    if (nb - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("b must be a unit vector (norm {nb})")));
    }
    let dec = svd(a)?;
    let (smax, smin) = (dec.singular_values[0], dec.singular_values[d - 1]);
    if smax > 1.0 + 1e-12 {
        return Err(Error::ScaleViolation { norm: smax });
    }
    if smin < delta {
        return Err(Error::Precondition(format!("smallest singular value {smin:.6e} < delta = {delta}")));
    }

    let df = d as f64;
    let eps_c = eps / df.sqrt();
    let gain = 3.0 * delta / 4.0;
    let e_poly = gain * eps_c / 5.0;
    let e_stat = gain * 4.0 * eps_c / 5.0;
    let p_inv = inverse_poly(delta, e_poly)?;
    let achieved = certified_error(&p_inv);
    let be_a = dilate(&a.adjoint(), 1.0)?;
    let root = RngStream::new(opts.seed);

    let mut components = Vec::with_capacity(d);
    for k in 0..d {
        let mut ek = vec![Complex64::new(0.0, 0.0); d];
        ek[k] = Complex64::new(1.0, 0.0);
        let bk = ComplexMatrix::outer(b, &ek);
        let term = run_term(
            TermInput {
                label: &format!("x[{k}]"),
                poly_f: p_inv.clone(),
                poly_g: BoundedPolynomial::identity(),
                be_a: be_a.clone(),
                be_b: dilate(&bk, 1.0)?,
                eps_stat: e_stat,
                k: 1.0 / gain,
                c: 1.0,
            },
            opts,
            &root.child(10 + k as u64),
        )?;
        components.push(term);
    }
    let x_tilde: Vec<Complex64> = components.iter().map(|t| t.estimate / gain).collect();

    // Reference solution via the SVD: A⁻¹ = V Σ⁻¹ U†.
    let ub = dec.left.adjoint().apply(b);
    let scaled: Vec<Complex64> = ub.iter().zip(&dec.singular_values).map(|(z, s)| z / s).collect();
    let x_exact = dec.right.apply(&scaled);
    let ax = a.apply(&x_tilde);
    let residual = norm(&ax.iter().zip(b).map(|(u, v)| u - v).collect::<Vec<_>>());
    let error = norm(&x_tilde.iter().zip(&x_exact).map(|(u, v)| u - v).collect::<Vec<_>>());
    let stat_achieved = norm(&components.iter().map(|t| Complex64::new(t.std_error / gain, 0.0)).collect::<Vec<_>>());
    let eps_budget = vec![
        BudgetItem::new("poly:inverse", eps / 5.0, df.sqrt() * achieved / gain),
        BudgetItem::new("statistical", 4.0 * eps / 5.0, stat_achieved),
    ];
    Ok(SolveResult { x_tilde, x_exact, per_component_eps: eps_c, residual, error, delta, components, eps_budget })
}
