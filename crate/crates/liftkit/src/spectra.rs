//! Detailed balance, symmetric/antisymmetric splitting, spectral and
//! singular-value gaps, Dirichlet forms and empirical decay rates.
//!
//! All gap computations run on the KMS-conjugated matrix
//! `Γ^{1/2} L Γ^{-1/2}`, whose Euclidean spectrum and singular values are the
//! KMS-geometry ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::la::{self, Mat, C64};
use crate::lindblad::{self, Propagator, KERNEL_TOL};
use crate::opalg::{self, DensityState, Superoperator};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BalanceReport {
    pub pass: bool,
    pub residual: f64,
}

/// Self-adjointness of `L` for `tr(σ^s X† σ^{1−s} Y)`, `s ∈ {1/2, 1}`.
/// `tol` is absolute; the residual is an operator norm on that space.
pub fn is_detailed_balanced(
    l: &Superoperator,
    sigma: &DensityState,
    s: f64,
    tol: f64,
) -> Result<BalanceReport> {
    if s != 0.5 && s != 1.0 {
        return Err(Error::InvalidArgument(format!("s must be 1/2 or 1, got {s}")));
    }
    sigma.require_full_rank()?;
    // ⟨X, Y⟩_s = ⟨X, W Y⟩ with W(Y) = σ^{1−s} Y σ^s.
    let w = Superoperator::sandwich(&sigma.pow(1.0 - s)?, &sigma.pow(s)?);
    let winv = Superoperator::sandwich(&sigma.pow(s - 1.0)?, &sigma.pow(-s)?);
    let adj = winv.compose(&l.hs_adjoint()).compose(&w);
    let half = Superoperator::sandwich(&sigma.pow((1.0 - s) / 2.0)?, &sigma.pow(s / 2.0)?);
    let half_inv = Superoperator::sandwich(&sigma.pow((s - 1.0) / 2.0)?, &sigma.pow(-s / 2.0)?);
    let diff = half.compose(&(l - &adj)).compose(&half_inv);
    let residual = la::norm2(diff.mat())?;
    Ok(BalanceReport { pass: residual <= tol, residual })
}

/// `L_S = (L + L⋆)/2`, `L_A = (L − L⋆)/2`.
pub fn decompose(l: &Superoperator, sigma: &DensityState) -> Result<(Superoperator, Superoperator)> {
    let ls = opalg::kms_adjoint(l, sigma)?;
    Ok((&(l + &ls) * 0.5, &(l - &ls) * 0.5))
}

fn is_hermitian(m: &Mat) -> bool {
    la::fro(&(m - &la::adjoint(m))) <= 1e-12 * la::fro(m).max(1e-300)
}

/// Eigenvalues of `L` (computed on the conjugated matrix).
pub fn spectrum(l: &Superoperator, sigma: &DensityState) -> Result<Vec<C64>> {
    let m = opalg::kms_conjugate(l, sigma)?;
    if is_hermitian(&m) {
        Ok(la::eigvalsh(&m)?.iter().map(|&x| la::c(x)).collect())
    } else {
        Ok(la::eigvals(&m)?.to_vec())
    }
}

/// Spectral gap from a precomputed spectrum.
pub fn gap_from_spectrum(w: &[C64], scale: f64) -> Result<f64> {
    let tol = KERNEL_TOL * scale.max(f64::MIN_POSITIVE);
    let bad: Vec<C64> = w.iter().filter(|z| z.re.abs() <= tol && z.im.abs() > tol).cloned().collect();
    if !bad.is_empty() {
        return Err(Error::NotErgodic(bad));
    }
    w.iter()
        .filter(|z| z.norm() > tol)
        .map(|z| -z.re)
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::Precondition("generator has no nonzero spectrum".into()))
}

/// `min Re(λ)` over the nonzero spectrum of `−L`.
pub fn spectral_gap(l: &Superoperator, sigma: &DensityState) -> Result<f64> {
    let w = spectrum(l, sigma)?;
    gap_from_spectrum(&w, l.norm())
}

/// Smallest singular value of `L` off its kernel, KMS geometry.
pub fn singular_gap(l: &Superoperator, sigma: &DensityState) -> Result<f64> {
    let m = opalg::kms_conjugate(l, sigma)?;
    let s = la::singular_values(&m)?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    s.iter()
        .cloned()
        .filter(|&x| x > KERNEL_TOL * smax)
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::Precondition("generator has no nonzero singular values".into()))
}

/// `−⟨X, L Y⟩_{σ,1/2}`.
pub fn dirichlet_form(l: &Superoperator, sigma: &DensityState, x: &Mat, y: &Mat) -> Result<C64> {
    Ok(-opalg::kms_inner(x, &l.apply(y), sigma)?)
}

/// `E(X) = −⟨X, L_S X⟩_{σ,1/2}`, clipped at zero within round-off.
pub fn dirichlet(ls: &Superoperator, sigma: &DensityState, x: &Mat) -> Result<f64> {
    let v = dirichlet_form(ls, sigma, x, x)?.re;
    let scale = opalg::kms_norm(x, sigma)?.powi(2) * ls.fro().max(1.0);
    if v < -1e-12 * scale.max(1.0) {
        return Err(Error::NegativeForm(v));
    }
    Ok(v.max(0.0))
}

/// Result of a log-linear decay fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateFit {
    pub nu: f64,
    /// Smallest `C` with `n(t) ≤ C e^{−ν t}` on the retained grid.
    pub c: f64,
    /// Fitted intercept `exp(a)` of the tail regression.
    pub intercept: f64,
    pub points_used: usize,
    /// `(t, n(t))` on the retained grid, `n` normalized by `n(0)`.
    pub samples: Vec<(f64, f64)>,
}

/// Fits `log n(t) ≈ a − ν t` over the tail half of the samples; points
/// after the first sample below `1e−14` are dropped.
pub fn fit_decay(ts: &[f64], norms: &[f64]) -> Result<RateFit> {
    if ts.len() != norms.len() || ts.len() < 4 {
        return Err(Error::InvalidArgument("need at least 4 samples".into()));
    }
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("time grid must be increasing".into()));
    }
    let n0 = norms[0];
    if n0 <= 0.0 {
        return Err(Error::InvalidArgument("initial norm vanishes".into()));
    }
    let mut samples = Vec::new();
    for (&t, &n) in ts.iter().zip(norms) {
        let r = n / n0;
        if r < 1e-14 {
            break;
        }
        samples.push((t, r));
    }
    if samples.len() < 4 {
        return Err(Error::InvalidArgument("norm underflows before the tail".into()));
    }
    let tail = &samples[samples.len() / 2..];
    let x: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let y: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
    let (a, b) = la::linfit(&x, &y);
    let nu = -b;
    let c = samples.iter().map(|&(t, r)| r * (nu * t).exp()).fold(0.0, f64::max);
    Ok(RateFit { nu, c, intercept: a.exp(), points_used: tail.len(), samples })
}

/// Trajectory fit of `‖P_t X0‖_{2,σ}`; `X0` should satisfy `E_F(X0) = 0`.
pub fn empirical_rate(
    l: &Superoperator,
    sigma: &DensityState,
    x0: &Mat,
    t_grid: &[f64],
) -> Result<RateFit> {
    let p = Propagator::new(l);
    empirical_rate_with(&p, sigma, x0, t_grid)
}

pub fn empirical_rate_with(
    p: &Propagator,
    sigma: &DensityState,
    x0: &Mat,
    t_grid: &[f64],
) -> Result<RateFit> {
    let norms: Vec<f64> = t_grid
        .iter()
        .map(|&t| opalg::kms_norm(&p.apply(t, x0), sigma))
        .collect::<Result<_>>()?;
    fit_decay(t_grid, &norms)
}

/// Operator-norm decay `n(t) = ‖P_t (id − E_F)‖_{(2,σ)→(2,σ)}`.
pub struct WorstCaseDecay {
    prop: Propagator,
    sigma: DensityState,
    complement: Superoperator,
}

impl WorstCaseDecay {
    pub fn new(l: &Superoperator, sigma: &DensityState) -> Result<Self> {
        let basis = lindblad::kernel_basis(l, KERNEL_TOL)?;
        let ef = lindblad::conditional_expectation(&basis, sigma)?;
        Ok(Self {
            prop: Propagator::new(l),
            sigma: sigma.clone(),
            complement: &Superoperator::identity(l.dim()) - &ef,
        })
    }

    /// Reuses a propagator and a precomputed `E_F`.
    pub fn from_parts(prop: Propagator, sigma: &DensityState, ef: &Superoperator) -> Self {
        Self {
            complement: &Superoperator::identity(ef.dim()) - ef,
            prop,
            sigma: sigma.clone(),
        }
    }

    pub fn norm_at(&self, t: f64) -> Result<f64> {
        let pt = self.prop.superoperator(t).compose(&self.complement);
        opalg::kms_op_norm(&pt, &self.sigma)
    }

    pub fn fit(&self, t_grid: &[f64]) -> Result<RateFit> {
        let norms: Vec<f64> = t_grid.iter().map(|&t| self.norm_at(t)).collect::<Result<_>>()?;
        fit_decay(t_grid, &norms)
    }

    /// First time with `n(t) ≤ e^{-1}`, refined by bisection between grid
    /// points.
    pub fn relaxation_time(&self, t_max: f64, n_grid: usize) -> Result<Option<f64>> {
        let target = (-1.0f64).exp();
        let mut prev = 0.0;
        for k in 1..=n_grid {
            let t = t_max * k as f64 / n_grid as f64;
            if self.norm_at(t)? <= target {
                let (mut lo, mut hi) = (prev, t);
                for _ in 0..50 {
                    let mid = 0.5 * (lo + hi);
                    if self.norm_at(mid)? <= target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Ok(Some(hi));
            }
            prev = t;
        }
        Ok(None)
    }
}

/// `(2 + log σ_min^{−1/2}) · t_rel`.
pub fn time_bounds(relax: f64, sigma_min: f64) -> Result<f64> {
    if relax <= 0.0 || !(sigma_min > 0.0 && sigma_min <= 1.0) {
        return Err(Error::InvalidArgument(format!("relax = {relax}, σ_min = {sigma_min}")));
    }
    Ok((2.0 - 0.5 * sigma_min.ln()) * relax)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HypocoercivityReport {
    pub hypocoercive: bool,
    pub dim_ker_symmetric: usize,
    pub dim_ker: usize,
}

fn kernel_dim(m: &Mat, scale: f64) -> Result<usize> {
    let s = la::singular_values(m)?;
    Ok(s.iter().filter(|&&x| x <= KERNEL_TOL * scale).count())
}

/// `dim ker(L + L⋆) > dim ker L`; requires an ergodic `L`.
pub fn hypocoercivity_check(l: &Superoperator, sigma: &DensityState) -> Result<HypocoercivityReport> {
    let w = spectrum(l, sigma)?;
    gap_from_spectrum(&w, l.norm())?;
    let m = opalg::kms_conjugate(l, sigma)?;
    let sym = &m + &la::adjoint(&m);
    let scale = la::norm2(&m)?;
    let dim_ker = kernel_dim(&m, scale)?;
    let dim_sym = kernel_dim(&sym, scale)?;
    Ok(HypocoercivityReport { hypocoercive: dim_sym > dim_ker, dim_ker_symmetric: dim_sym, dim_ker })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GapReport {
    pub spectral_gap: f64,
    pub singular_gap: f64,
    pub kernel_dim: usize,
    pub hypocoercive: bool,
}

pub fn gap_report(l: &Superoperator, sigma: &DensityState) -> Result<GapReport> {
    let h = hypocoercivity_check(l, sigma)?;
    Ok(GapReport {
        spectral_gap: spectral_gap(l, sigma)?,
        singular_gap: singular_gap(l, sigma)?,
        kernel_dim: h.dim_ker,
        hypocoercive: h.hypocoercive,
    })
}

/// Uniform grid `0, t_max/(n−1), …, t_max`.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}
