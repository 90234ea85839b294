//! Explicit constants of the upper and lower rate bounds and the flow
//! Poincaré check.

use std::f64::consts::{E, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use super::{LiftedGenerator, OverdampedModel};
use crate::error::{Error, Result};
use crate::la::{self, Mat};
use crate::lindblad::{Propagator, KERNEL_TOL};
use crate::opalg;
use crate::spectra;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct UpperBound {
    /// Smallest nonzero eigenvalue of `Π₁ (−L_S)^{-1} Π₁`.
    pub s_tilde_m: f64,
    /// `√(λ_O / s̃_m)`.
    pub nu_upper: f64,
    /// `1 / (2 ν_upper)`.
    pub t_rel_lower: f64,
}

/// `γ`-independent ceiling on the convergence rate of any `L_γ`.
pub fn upper_bound_rate(lift: &LiftedGenerator, model: &OverdampedModel) -> Result<UpperBound> {
    let s_tilde_m = s_tilde_min(lift)?;
    if !(s_tilde_m > 0.0) {
        return Err(Error::Precondition("s̃_m vanishes".into()));
    }
    let nu_upper = (model.lambda_o / s_tilde_m).sqrt();
    Ok(UpperBound { s_tilde_m, nu_upper, t_rel_lower: 0.5 / nu_upper })
}

fn s_tilde_min(lift: &LiftedGenerator) -> Result<f64> {
    let n = lift.conj(lift.l_a())?.dot(&lift.frame_columns());
    let w = la::range_basis(&n, 1e-10)?;
    if w.ncols() == 0 {
        return Err(Error::Precondition("L_A E_S = 0".into()));
    }
    let pinv = lift.neg_ls_fn(|x| 1.0 / x)?;
    let m = la::hermitize(&la::adjoint(&w).dot(&pinv.dot(&w)));
    let ev = la::eigvalsh(&m)?;
    let top = ev.iter().cloned().fold(0.0, f64::max);
    Ok(ev.iter().cloned().filter(|&x| x > KERNEL_TOL * top).fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

/// Case-wise maxima of the divergence-equation constants.
pub fn divergence_constants(t: f64, lambda_o: f64) -> Result<DivergenceConstants> {
    if !(t > 0.0 && lambda_o > 0.0) {
        return Err(Error::InvalidArgument(format!("T = {t}, λ_O = {lambda_o}")));
    }
    let rl = lambda_o.sqrt();
    let c1 = 1.0 + E / SQRT_2;
    let c3 = (1.0 / rl).max(t / PI).max(c1 / rl).max(0.5 * t * (1.0 + 1.0 / 3f64.sqrt()));
    let c4 = 8f64.max(5.0 + SQRT_2).max((SQRT_2 * PI * E + 2.0) / (rl * t));
    Ok(DivergenceConstants { c1, c2: E, c3, c4 })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundConstants {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub s_m: f64,
    pub s_tilde_m: f64,
    pub lambda_s: f64,
    pub lambda_o: f64,
    pub t: f64,
    /// `‖(id − E_S) L_A⋆ (−L_S)^{-1/2}‖`, the crude `K2` with `K1 = 0`.
    pub k2_crude: f64,
    /// Smallest `K2` admissible with `K1 = 0`.
    pub k2_sharp: f64,
    /// Whether `(K1, K2)` came from the construction.
    pub k_overridden: bool,
}

/// All constants entering the lower bound. `t` defaults to `λ_O^{-1/2}`.
pub fn bound_constants(lift: &LiftedGenerator, model: &OverdampedModel, t: Option<f64>) -> Result<BoundConstants> {
    let lambda_o = model.lambda_o;
    if !(lambda_o > 0.0) {
        return Err(Error::Precondition("λ_O = 0: L_O is not ergodic on F(L_S)".into()));
    }
    let t = t.unwrap_or(1.0 / lambda_o.sqrt());
    let dc = divergence_constants(t, lambda_o)?;
    let spec = lift.neg_ls_spectrum()?;
    let lambda_s = *spec.first().ok_or_else(|| Error::Precondition("L_S = 0".into()))?;
    let s_m = 1.0 / lambda_s;

    let u = lift.frame_columns();
    let n2 = u.nrows();
    let a = lift.conj(lift.l_a())?;
    let a_star = la::adjoint(&a);
    let p_perp = &la::eye(n2) - &u.dot(&la::adjoint(&u));
    let k2_crude = la::norm2(&p_perp.dot(&a_star).dot(&lift.neg_ls_fn(|x| x.powf(-0.5))?))?;

    // sup_Y ‖(id − E_S) L_A⋆ (−L_S)^{-1} L_A Y‖ / √E_O(Y) over Y ∈ F(L_S).
    let num = p_perp.dot(&a_star).dot(&lift.neg_ls_fn(|x| 1.0 / x)?).dot(&a.dot(&u));
    let lo_half = la::herm_fn(&la::hermitize(&model.l_o.mapv(|z| -z)), |x| {
        if x > KERNEL_TOL * lambda_o.max(1e-300) {
            x.powf(-0.5)
        } else {
            0.0
        }
    })?;
    let k2_sharp = la::norm2(&num.dot(&lo_half))?;

    let s_tilde_m = s_tilde_min(lift)?;
    let (k1, k2, k_overridden) = match lift.k_override() {
        Some((k1, k2)) => (k1, k2, true),
        None => (0.0, k2_crude, false),
    };
    Ok(BoundConstants {
        k0: 1.0,
        k1,
        k2,
        k3: 1.0,
        c1: dc.c1,
        c2: dc.c2,
        c3: dc.c3,
        c4: dc.c4,
        s_m,
        s_tilde_m,
        lambda_s,
        lambda_o,
        t,
        k2_crude,
        k2_sharp,
        k_overridden,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LowerBound {
    pub gamma: f64,
    pub nu: f64,
    pub c0: f64,
    pub c1: f64,
    pub gamma_max: f64,
    pub nu_max: f64,
    /// Flow Poincaré constant `1 / (γ² C0 + C1)`.
    pub alpha: f64,
}

pub fn flow_constants(k: &BoundConstants) -> (f64, f64) {
    let c0 = 2.0 * k.c3 * k.c3 * k.k0 * k.k0;
    let ils = k.lambda_s.powf(-0.5);
    let inner = k.s_m.sqrt() * ils * k.c4 + k.k3 * k.c2 + ils * (k.k1 * k.c1 + k.k2 * k.c3);
    (c0, 2.0 * inner * inner + 1.0 / k.lambda_s)
}

/// `ν(γ) = γ / (γ² C0 + C1)` and its maximizer.
pub fn lower_bound_rate(k: &BoundConstants, gamma: f64) -> LowerBound {
    let (c0, c1) = flow_constants(k);
    let denom = gamma * gamma * c0 + c1;
    LowerBound {
        gamma,
        nu: gamma / denom,
        c0,
        c1,
        gamma_max: (c1 / c0).sqrt(),
        nu_max: 0.5 / (c0 * c1).sqrt(),
        alpha: 1.0 / denom,
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FlowPoincare {
    /// `α_T (1/T) ∫ ‖x_t‖²_{2,σ}`.
    pub lhs: f64,
    /// `(1/T) ∫ E_{L_S}(x_t)`.
    pub rhs: f64,
    /// `lhs / rhs` (0 when both vanish).
    pub ratio: f64,
    pub pass: bool,
    /// Number of Simpson intervals at convergence.
    pub n_quad: usize,
}

const QUAD_RTOL: f64 = 1e-6;
const QUAD_MAX: usize = 1 << 14;

/// Quadrature check of the flow Poincaré inequality along
/// `x_t = exp(t L_γ) X0` over `[0, T]`.
pub fn flow_poincare_check(
    lift: &LiftedGenerator,
    consts: &BoundConstants,
    x0: &Mat,
    n_quad: usize,
) -> Result<FlowPoincare> {
    if n_quad < 16 {
        return Err(Error::InvalidArgument(format!("n_quad must be at least 16, got {n_quad}")));
    }
    let sigma = lift.sigma();
    let x_norm = opalg::kms_norm(x0, sigma)?;
    if x_norm > 0.0 {
        let ef = lift.e_f()?;
        let leak = opalg::kms_norm(&ef.apply(x0), sigma)?;
        if leak > 1e-8 * x_norm {
            return Err(Error::Precondition(format!("E_F(X0) ≠ 0 (norm {leak:e})")));
        }
    }
    let lb = lower_bound_rate(consts, lift.gamma());
    let t = consts.t;
    let prop = Propagator::new(&lift.l_gamma());
    let integrals = |n: usize| -> Result<(f64, f64)> {
        let h = t / n as f64;
        let (mut a, mut b) = (0.0, 0.0);
        for k in 0..=n {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let x = prop.apply(k as f64 * h, x0);
            a += w * opalg::kms_norm(&x, sigma)?.powi(2);
            b += w * spectra::dirichlet_form(lift.l_s(), sigma, &x, &x)?.re;
        }
        Ok((a * h / 3.0 / t, b * h / 3.0 / t))
    };
    let mut n = n_quad + n_quad % 2;
    let mut prev = integrals(n)?;
    loop {
        let next = integrals(2 * n)?;
        n *= 2;
        let rel = |p: f64, q: f64| (p - q).abs() / q.abs().max(1e-300);
        let change = rel(prev.0, next.0).max(rel(prev.1, next.1));
        if change <= QUAD_RTOL || (next.0 == 0.0 && next.1 == 0.0) {
            let lhs = lb.alpha * next.0;
            let rhs = next.1;
            let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
            return Ok(FlowPoincare { lhs, rhs, ratio, pass: lhs <= rhs * (1.0 + 1e-6), n_quad: n });
        }
        if n >= QUAD_MAX {
            return Err(Error::Quadrature(change));
        }
        prev = next;
    }
}
