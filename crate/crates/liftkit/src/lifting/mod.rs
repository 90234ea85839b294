//! Lifted generators `L_γ = L_A + γ L_S`: lifting conditions, overdamped
//! limits, convergence-rate bounds and the γ sweep.
//!
//! Most computations happen in "conjugated coordinates": an operator `X` is
//! represented by `vec(σ^{1/4} X σ^{1/4})`, which turns the KMS inner product
//! into the Euclidean one and a superoperator `Φ` into
//! `Γ^{1/2} Φ Γ^{-1/2}`.

mod analysis;
mod bounds;

pub use analysis::*;
pub use bounds::*;

use std::sync::OnceLock;

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::la::{self, Mat, C64};
use crate::lindblad::{self, Propagator, KERNEL_TOL};
use crate::opalg::{self, DensityState, Keep, Superoperator};

/// Shape of the fixed-point algebra `F(L_S)`, used to pick a complete
/// positivity test for the overdamped generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameAlgebra {
    General,
    /// Spanned by orthogonal projections; the frame is `P_i / ‖P_i‖`.
    Commutative,
    /// `1_A ⊗ M_B` inside `M_A ⊗ M_B`.
    Factor { dim_a: usize, dim_b: usize },
}

#[derive(Clone, Debug)]
pub struct LiftedGenerator {
    l_a: Superoperator,
    l_s: Superoperator,
    gamma: f64,
    sigma: DensityState,
    e_s: Superoperator,
    frame: Vec<Mat>,
    algebra: FrameAlgebra,
    k_override: Option<(f64, f64)>,
    quarter: Mat,
    quarter_inv: Mat,
    f_basis: OnceLock<Vec<Mat>>,
    neg_ls_eigh: OnceLock<(Array1<f64>, Mat)>,
}

impl LiftedGenerator {
    pub fn new(l_a: Superoperator, l_s: Superoperator, gamma: f64, sigma: DensityState) -> Result<Self> {
        let d = sigma.dim();
        if l_a.dim() != d || l_s.dim() != d {
            return Err(Error::Dimension(format!(
                "L_A on {}, L_S on {}, σ on {d}",
                l_a.dim(),
                l_s.dim()
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("γ must be positive, got {gamma}")));
        }
        sigma.require_full_rank()?;
        let quarter = sigma.pow(0.25)?;
        let quarter_inv = sigma.pow(-0.25)?;
        let mut lift = Self {
            l_a,
            l_s,
            gamma,
            e_s: Superoperator::zero(d),
            frame: Vec::new(),
            algebra: FrameAlgebra::General,
            k_override: None,
            quarter,
            quarter_inv,
            sigma,
            f_basis: OnceLock::new(),
            neg_ls_eigh: OnceLock::new(),
        };
        let kernel = lindblad::kernel_basis(&lift.l_s, KERNEL_TOL)?;
        let cols: Vec<Array1<C64>> = kernel.iter().map(|k| lift.embed(k)).collect();
        let u = la::range_basis(&la::columns(&cols, d * d), 1e-10)?;
        let frame: Vec<Mat> = u.columns().into_iter().map(|c| lift.unembed(&c.to_owned())).collect();
        lift.set_frame(frame)?;
        if let Some(proj) = lift.minimal_projections()? {
            let frame = proj
                .iter()
                .map(|p| {
                    let n = opalg::kms_norm(p, &lift.sigma)?;
                    Ok(p.mapv(|z| z / n))
                })
                .collect::<Result<Vec<_>>>()?;
            lift.set_frame(frame)?;
            lift.algebra = FrameAlgebra::Commutative;
        }
        Ok(lift)
    }

    fn set_frame(&mut self, frame: Vec<Mat>) -> Result<()> {
        self.e_s = lindblad::conditional_expectation(&frame, &self.sigma)?;
        self.frame = frame;
        Ok(())
    }

    /// Replaces the frame of `F(L_S)` by `1_A ⊗ F_k` with `F_k` a
    /// KMS-orthonormal basis of `M_B` for the reduced state.
    pub fn with_factor_frame(mut self, dim_a: usize, dim_b: usize) -> Result<Self> {
        let d = self.dim();
        if dim_a * dim_b != d {
            return Err(Error::Dimension(format!("{dim_a}·{dim_b} ≠ {d}")));
        }
        let sigma_b = DensityState::new(opalg::partial_trace(self.sigma.op(), dim_a, dim_b, Keep::B)?)?;
        let qb = sigma_b.pow(-0.25)?;
        let one_a = la::eye(dim_a);
        let mut frame = Vec::with_capacity(dim_b * dim_b);
        for b in 0..dim_b {
            for a in 0..dim_b {
                let mut e = la::zeros(dim_b, dim_b);
                e[[a, b]] = la::c(1.0);
                frame.push(opalg::tensor(&one_a, &qb.dot(&e).dot(&qb)));
            }
        }
        if frame.len() != self.frame.len() {
            return Err(Error::Precondition(format!(
                "dim F(L_S) = {} but 1⊗M_B has dimension {}",
                self.frame.len(),
                frame.len()
            )));
        }
        let scale = self.l_s.norm().max(1.0);
        for f in &frame {
            if la::fro(&self.l_s.apply(f)) > 1e-9 * scale * la::fro(f) {
                return Err(Error::Precondition("1⊗M_B is not contained in ker L_S".into()));
            }
        }
        self.set_frame(frame)?;
        self.algebra = FrameAlgebra::Factor { dim_a, dim_b };
        Ok(self)
    }

    /// Replaces the default frame by the given KMS-orthonormal one.
    pub fn with_frame(mut self, frame: Vec<Mat>) -> Result<Self> {
        if frame.len() != self.frame.len() {
            return Err(Error::Dimension(format!(
                "frame has {} elements, dim F(L_S) = {}",
                frame.len(),
                self.frame.len()
            )));
        }
        let u = self.embed_all(&frame);
        let gram = la::adjoint(&u).dot(&u);
        if la::fro(&(&gram - &la::eye(frame.len()))) > 1e-9 {
            return Err(Error::InvalidArgument("frame is not KMS-orthonormal".into()));
        }
        self.set_frame(frame)?;
        Ok(self)
    }

    /// Constants `(K1, K2)` known analytically for the construction.
    pub fn with_k_override(mut self, k1: f64, k2: f64) -> Self {
        self.k_override = Some((k1, k2));
        self
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("γ must be positive, got {gamma}")));
        }
        let mut l = self.clone();
        l.gamma = gamma;
        Ok(l)
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn l_a(&self) -> &Superoperator {
        &self.l_a
    }

    pub fn l_s(&self) -> &Superoperator {
        &self.l_s
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma(&self) -> &DensityState {
        &self.sigma
    }

    pub fn e_s(&self) -> &Superoperator {
        &self.e_s
    }

    pub fn fs_frame(&self) -> &[Mat] {
        &self.frame
    }

    pub fn algebra(&self) -> &FrameAlgebra {
        &self.algebra
    }

    pub fn k_override(&self) -> Option<(f64, f64)> {
        self.k_override
    }

    pub fn l_gamma(&self) -> Superoperator {
        self.l_gamma_at(self.gamma)
    }

    pub fn l_gamma_at(&self, gamma: f64) -> Superoperator {
        &self.l_a + &(&self.l_s * gamma)
    }

    /// HS-orthonormal basis of `F(L_γ) = ker L_A ∩ ker L_S`.
    pub fn f_basis(&self) -> &[Mat] {
        self.f_basis.get_or_init(|| {
            let stacked = la::vstack(&[self.l_a.mat(), self.l_s.mat()]);
            let k = la::null_basis(&stacked, KERNEL_TOL).expect("svd");
            k.columns().into_iter().map(|c| la::unvec(&c.to_owned(), self.dim())).collect()
        })
    }

    /// `E_F`, the KMS-orthogonal projection onto `F(L_γ)`.
    pub fn e_f(&self) -> Result<Superoperator> {
        lindblad::conditional_expectation(self.f_basis(), &self.sigma)
    }

    /// Conjugated coordinates `vec(σ^{1/4} X σ^{1/4})`.
    pub fn embed(&self, x: &Mat) -> Array1<C64> {
        la::vec(&self.quarter.dot(x).dot(&self.quarter))
    }

    pub fn unembed(&self, v: &Array1<C64>) -> Mat {
        let m = la::unvec(v, self.dim());
        self.quarter_inv.dot(&m).dot(&self.quarter_inv)
    }

    fn embed_all(&self, xs: &[Mat]) -> Mat {
        let d = self.dim();
        la::columns(&xs.iter().map(|x| self.embed(x)).collect::<Vec<_>>(), d * d)
    }

    /// Columns are the conjugated frame vectors.
    pub fn frame_columns(&self) -> Mat {
        self.embed_all(&self.frame)
    }

    /// `(⟨b_k, X⟩_σ)_k`.
    pub fn coords(&self, x: &Mat) -> Array1<C64> {
        la::adjoint(&self.frame_columns()).dot(&self.embed(x))
    }

    pub fn from_coords(&self, c: &Array1<C64>) -> Mat {
        let d = self.dim();
        let mut x = la::zeros(d, d);
        for (b, &ck) in self.frame.iter().zip(c.iter()) {
            x.scaled_add(ck, b);
        }
        x
    }

    pub fn conj(&self, phi: &Superoperator) -> Result<Mat> {
        opalg::kms_conjugate(phi, &self.sigma)
    }

    /// Eigendecomposition of the Hermitian part of the conjugated `−L_S`.
    fn neg_ls(&self) -> Result<&(Array1<f64>, Mat)> {
        if let Some(v) = self.neg_ls_eigh.get() {
            return Ok(v);
        }
        let m = la::hermitize(&self.conj(&self.l_s)?.mapv(|z| -z));
        let e = la::eigh(&m)?;
        Ok(self.neg_ls_eigh.get_or_init(|| e))
    }

    /// `f` applied to the nonzero spectrum of `−L_S` (zero on the kernel),
    /// in conjugated coordinates. Eigenvalues below `1e−10 · λ_max` count as
    /// kernel.
    pub fn neg_ls_fn(&self, f: impl Fn(f64) -> f64) -> Result<Mat> {
        let (w, u) = self.neg_ls()?;
        let cut = KERNEL_TOL * w.iter().cloned().fold(0.0, f64::max);
        Ok(la::herm_fn_from(w, u, |x| if x > cut { f(x) } else { 0.0 }))
    }

    /// Nonzero spectrum of `−L_S`, ascending.
    pub fn neg_ls_spectrum(&self) -> Result<Vec<f64>> {
        let (w, _) = self.neg_ls()?;
        let cut = KERNEL_TOL * w.iter().cloned().fold(0.0, f64::max);
        Ok(w.iter().cloned().filter(|&x| x > cut).collect())
    }

    fn scale(&self) -> f64 {
        self.l_s.norm().max(self.l_a.norm()).max(1.0)
    }

    /// Minimal projections of `F(L_S)` when it is commutative.
    fn minimal_projections(&self) -> Result<Option<Vec<Mat>>> {
        let m = self.frame.len();
        let d = self.dim();
        let norm = |x: &Mat| la::fro(x).max(1e-300);
        for i in 0..m {
            for j in 0..m {
                let a = &self.frame[i];
                let b = &self.frame[j];
                let tol = 1e-9 * norm(a) * norm(b);
                if la::fro(&la::commutator(a, b)) > tol || la::fro(&la::commutator(a, &la::adjoint(b))) > tol {
                    return Ok(None);
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut h = la::zeros(d, d);
        for b in &self.frame {
            let r: f64 = rand::Rng::random::<f64>(&mut rng) + 0.5;
            h.scaled_add(la::c(r / norm(b)), &la::hermitize(b));
        }
        let (w, u) = la::eigh(&h)?;
        let spread = (w[d - 1] - w[0]).abs().max(1e-300);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for k in 0..d {
            match groups.last_mut() {
                Some(g) if (w[k] - w[g[g.len() - 1]]).abs() <= 1e-8 * spread => g.push(k),
                _ => groups.push(vec![k]),
            }
        }
        if groups.len() != m {
            return Ok(None);
        }
        let mut proj: Vec<Mat> = groups
            .iter()
            .map(|g| {
                let mut p = la::zeros(d, d);
                for &k in g {
                    let col = u.column(k);
                    for i in 0..d {
                        for j in 0..d {
                            p[[i, j]] += col[i] * col[j].conj();
                        }
                    }
                }
                p
            })
            .collect();
        for p in &proj {
            if la::fro(&(&self.e_s.apply(p) - p)) > 1e-8 * norm(p) {
                return Ok(None);
            }
        }
        let key = |p: &Mat| (0..d).find(|&i| p[[i, i]].re > 1e-6).unwrap_or(d);
        proj.sort_by_key(key);
        Ok(Some(proj))
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::json!({
            "L_A": opalg::superoperator_to_value(&self.l_a),
            "L_S": opalg::superoperator_to_value(&self.l_s),
            "gamma": self.gamma,
            "sigma": opalg::operator_to_value(self.sigma.op()),
            "algebra": self.algebra,
            "k_override": self.k_override,
        })
    }

    pub fn from_value(v: &serde_json::Value) -> Result<Self> {
        let field = |k: &str| v.get(k).ok_or_else(|| Error::InvalidArgument(format!("missing field {k}")));
        let l_a = opalg::superoperator_from_value(field("L_A")?)?;
        let l_s = opalg::superoperator_from_value(field("L_S")?)?;
        let gamma = field("gamma")?
            .as_f64()
            .ok_or_else(|| Error::InvalidArgument("gamma must be a number".into()))?;
        let sigma = DensityState::new(opalg::operator_from_value(field("sigma")?)?)?;
        let mut lift = Self::new(l_a, l_s, gamma, sigma)?;
        if let Some(alg) = v.get("algebra") {
            if let FrameAlgebra::Factor { dim_a, dim_b } = serde_json::from_value(alg.clone())? {
                lift = lift.with_factor_frame(dim_a, dim_b)?;
            }
        }
        if let Some(k) = v.get("k_override").filter(|k| !k.is_null()) {
            let (k1, k2): (f64, f64) = serde_json::from_value(k.clone())?;
            lift = lift.with_k_override(k1, k2);
        }
        Ok(lift)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionA {
    pub pass: bool,
    pub symmetric_residual: f64,
    pub antisymmetric_residual: f64,
    /// `max(‖L_S†σ‖, ‖L_A†σ‖)`.
    pub invariance_residual: f64,
}

/// KMS (anti-)self-adjointness of `L_S` and `L_A` and invariance of `σ`.
/// `tol` is relative to `max(1, ‖L_S‖, ‖L_A‖)`.
pub fn verify_condition_a(
    l_s: &Superoperator,
    l_a: &Superoperator,
    sigma: &DensityState,
    tol: f64,
) -> Result<ConditionA> {
    sigma.require_full_rank()?;
    let s = opalg::kms_conjugate(l_s, sigma)?;
    let a = opalg::kms_conjugate(l_a, sigma)?;
    let sym = la::norm2(&(&s - &la::adjoint(&s)))?;
    let anti = la::norm2(&(&a + &la::adjoint(&a)))?;
    let inv = la::fro(&l_s.hs_adjoint().apply(sigma.op())).max(la::fro(&l_a.hs_adjoint().apply(sigma.op())));
    let scale = l_s.norm().max(l_a.norm()).max(1.0);
    let lim = tol * scale;
    Ok(ConditionA {
        pass: sym <= lim && anti <= lim && inv <= lim,
        symmetric_residual: sym,
        antisymmetric_residual: anti,
        invariance_residual: inv,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionB {
    pub pass: bool,
    pub dim_fs: usize,
    pub dim_f: usize,
}

/// `dim F(L_S) > dim F(L_γ)`.
pub fn verify_condition_b(lift: &LiftedGenerator) -> ConditionB {
    let dim_fs = lift.fs_frame().len();
    let dim_f = lift.f_basis().len();
    ConditionB { pass: dim_fs > dim_f, dim_fs, dim_f }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionC {
    pub pass: bool,
    /// `‖E_S L_A E_S‖` in the KMS operator norm.
    pub residual: f64,
}

/// `E_S L_A E_S = 0`; `tol` relative to `max(1, ‖L_A‖)`.
pub fn verify_condition_c(lift: &LiftedGenerator, tol: f64) -> Result<ConditionC> {
    let residual = la::norm2(&first_order_generator(lift)?)?;
    Ok(ConditionC { pass: residual <= tol * lift.l_a.norm().max(1.0), residual })
}

/// Frame matrix `⟨b_k, L_A b_l⟩_σ` of `E_S L_A E_S`.
pub fn first_order_generator(lift: &LiftedGenerator) -> Result<Mat> {
    if lift.frame.is_empty() {
        return Ok(la::zeros(0, 0));
    }
    let u = lift.frame_columns();
    let a = lift.conj(&lift.l_a)?;
    Ok(la::adjoint(&u).dot(&a.dot(&u)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OverdampedModel {
    #[serde(with = "opalg::operator_vec_serde")]
    pub frame: Vec<Mat>,
    /// `⟨b_k, L_O b_l⟩_σ`.
    #[serde(with = "opalg::operator_serde")]
    pub l_o: Mat,
    pub sigma_o: DensityState,
    pub lambda_o: f64,
}

impl OverdampedModel {
    /// Action of `L_O E_S` on `M`.
    pub fn apply(&self, lift: &LiftedGenerator, x: &Mat) -> Mat {
        lift.from_coords(&self.l_o.dot(&lift.coords(x)))
    }

    /// `L_O E_S` as a superoperator on `M`.
    pub fn superoperator(&self, lift: &LiftedGenerator) -> Superoperator {
        Superoperator::from_map(lift.dim(), |x| self.apply(lift, x))
    }

    /// Dimension of `ker L_O` in the frame.
    pub fn kernel_dim(&self) -> Result<usize> {
        let s = la::singular_values(&self.l_o)?;
        let smax = s.iter().cloned().fold(0.0, f64::max);
        Ok(s.iter().filter(|&&x| x <= KERNEL_TOL * smax.max(1e-300)).count())
    }

    /// Generator on `M_B` for a factor frame: `X ↦ tr_A(L_O(1 ⊗ X)) / d_A`.
    pub fn reduced(&self, lift: &LiftedGenerator) -> Result<Superoperator> {
        let FrameAlgebra::Factor { dim_a, dim_b } = *lift.algebra() else {
            return Err(Error::Precondition("frame is not of the form 1⊗M_B".into()));
        };
        let one = la::eye(dim_a);
        let out = Superoperator::from_map(dim_b, |x| {
            let y = self.apply(lift, &opalg::tensor(&one, x));
            opalg::partial_trace(&y, dim_a, dim_b, Keep::B)
                .expect("dims")
                .mapv(|z| z / dim_a as f64)
        });
        Ok(out)
    }

    /// Classical generator `Q_ij` on the minimal projections of a
    /// commutative frame, `L_O(P_j) = Σ_i Q_ij P_i`.
    pub fn classical(&self, lift: &LiftedGenerator) -> Result<Array2Real> {
        if *lift.algebra() != FrameAlgebra::Commutative {
            return Err(Error::Precondition("frame algebra is not commutative".into()));
        }
        let m = self.frame.len();
        let proj: Vec<Mat> = self
            .frame
            .iter()
            .map(|b| {
                let n = la::max_abs(b);
                b.mapv(|z| z / n)
            })
            .collect();
        let mut q = Array2Real::zeros((m, m));
        for j in 0..m {
            let y = self.apply(lift, &proj[j]);
            for i in 0..m {
                q[[i, j]] = (la::trace(&proj[i].dot(&y)) / la::trace(&proj[i])).re;
            }
        }
        Ok(q)
    }
}

pub type Array2Real = ndarray::Array2<f64>;

/// Positive bounded `𝔖` version: `L_O = −(L_A E_S)⋆ 𝔖 L_A E_S`.
pub fn overdamped_generator_general(lift: &LiftedGenerator, s: &Superoperator) -> Result<OverdampedModel> {
    let sc = lift.conj(s)?;
    let u = lift.frame_columns();
    let n2 = sc.nrows();
    let p_perp = &la::eye(n2) - &u.dot(&la::adjoint(&u));
    let restricted = la::hermitize(&p_perp.dot(&sc).dot(&p_perp));
    let scale = la::norm2(&sc)?.max(1e-300);
    let min = la::min_eigh(&restricted)?;
    if min < -1e-10 * scale || la::fro(&(&restricted - &p_perp.dot(&sc).dot(&p_perp))) > 1e-8 * scale * (n2 as f64).sqrt() {
        return Err(Error::InvalidArgument(format!("𝔖 is not positive on F(L_S)^⊥ (min eigenvalue {min:e})")));
    }
    model_from_weight(lift, &sc)
}

/// `L_O = −(L_A E_S)⋆ (−L_S)^{-1} L_A E_S` with the pseudoinverse on
/// `F(L_S)^⊥`.
pub fn overdamped_generator(lift: &LiftedGenerator) -> Result<OverdampedModel> {
    let u = lift.frame_columns();
    let n = lift.conj(&lift.l_a)?.dot(&u);
    let leak = la::norm2(&la::adjoint(&u).dot(&n))?;
    if leak > 1e-8 * lift.scale() {
        return Err(Error::Precondition(format!(
            "L_A E_S leaves ran(L_S) (‖E_S L_A E_S‖ = {leak:e}); Condition C fails"
        )));
    }
    let pinv = lift.neg_ls_fn(|x| 1.0 / x)?;
    model_from_weight(lift, &pinv)
}

fn model_from_weight(lift: &LiftedGenerator, sc: &Mat) -> Result<OverdampedModel> {
    let u = lift.frame_columns();
    let n = lift.conj(&lift.l_a)?.dot(&u);
    let l_o = -la::adjoint(&n).dot(&sc.dot(&n));
    let sigma_o = reduced_state(lift)?;
    let lambda_o = frame_gap(&l_o)?;
    Ok(OverdampedModel { frame: lift.frame.clone(), l_o, sigma_o, lambda_o })
}

/// Smallest nonzero eigenvalue of `−L` for a Hermitian frame matrix.
pub fn frame_gap(l: &Mat) -> Result<f64> {
    if l.nrows() == 0 {
        return Ok(0.0);
    }
    let w = la::eigvalsh(&la::hermitize(&l.mapv(|z| -z)))?;
    let top = w.iter().cloned().fold(0.0, f64::max);
    let gap = w.iter().cloned().filter(|&x| x > KERNEL_TOL * top).fold(f64::INFINITY, f64::min);
    Ok(if gap.is_finite() { gap } else { 0.0 })
}

/// HS projection of `σ` onto `F(L_S)`: the density of the reduced state.
fn reduced_state(lift: &LiftedGenerator) -> Result<DensityState> {
    let d = lift.dim();
    let cols: Vec<Array1<C64>> = lift.frame.iter().map(la::vec).collect();
    let w = la::range_basis(&la::columns(&cols, d * d), 1e-10)?;
    let s = la::vec(lift.sigma.op());
    let p = w.dot(&la::adjoint(&w).dot(&s));
    DensityState::new(la::hermitize(&la::unvec(&p, d)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionD {
    pub pass: bool,
    pub algebra: FrameAlgebra,
    /// `None` when no complete positivity test applies to the algebra.
    pub cp: Option<bool>,
    pub cp_residual: Option<f64>,
    /// Self-adjointness defect of `L_O` for the `σ_o`-KMS product.
    pub balance_residual: f64,
    /// `max |⟨b_k, L_O b_l⟩_σ − ⟨b_k, L_O b_l⟩_{σ_o}|`.
    pub compat_residual: f64,
}

/// Complete positivity, `σ_o`-KMS detailed balance and compatibility of the
/// overdamped generator; `tol` relative to `max(1, ‖L_O‖)`.
pub fn verify_condition_d(lift: &LiftedGenerator, model: &OverdampedModel, tol: f64) -> Result<ConditionD> {
    let m = model.frame.len();
    let scale = la::norm2(&model.l_o)?.max(1.0);
    let mut w_o = la::zeros(m, m);
    for k in 0..m {
        for l in 0..m {
            w_o[[k, l]] = opalg::kms_inner(&model.frame[k], &model.frame[l], &model.sigma_o)?;
        }
    }
    let g = &model.l_o;
    let wg = w_o.dot(g);
    let compat = la::max_abs(&(g - &wg));
    let balance = la::max_abs(&(&wg - &la::adjoint(&wg)));
    let (cp, cp_residual) = match lift.algebra() {
        FrameAlgebra::Commutative => {
            let q = model.classical(lift)?;
            let mut min_off: f64 = 0.0;
            let mut row: f64 = 0.0;
            for i in 0..m {
                row = row.max(q.row(i).sum().abs());
                for j in 0..m {
                    if i != j {
                        min_off = min_off.min(q[[i, j]]);
                    }
                }
            }
            (Some(min_off >= -tol * scale && row <= tol * scale), Some(min_off))
        }
        FrameAlgebra::Factor { .. } => {
            let red = model.reduced(lift)?;
            match lindblad::is_conditionally_cp(&red, tol) {
                Ok(r) => (Some(r.pass), Some(r.residual)),
                Err(Error::Precondition(msg)) => {
                    log::warn!("condition D: {msg}");
                    (Some(false), None)
                }
                Err(e) => return Err(e),
            }
        }
        FrameAlgebra::General => (None, None),
    };
    let pass = cp.unwrap_or(true) && balance <= tol * scale && compat <= tol * scale;
    Ok(ConditionD { pass, algebra: lift.algebra().clone(), cp, cp_residual, balance_residual: balance, compat_residual: compat })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsilonStudy {
    /// `(ε, ‖X^ε(t) − X_0(t)‖_{2,σ})`.
    pub rows: Vec<(f64, f64)>,
    /// Log-log slope; `None` when every error is at round-off level.
    pub slope: Option<f64>,
}

/// Compares `exp(t(ε^{-1}L_A + ε^{-2}L_S)) X0` with `exp(t L_O) X0`.
pub fn overdamped_convergence_test(
    lift: &LiftedGenerator,
    model: &OverdampedModel,
    x0: &Mat,
    t: f64,
    eps: &[f64],
) -> Result<EpsilonStudy> {
    let c0 = lift.coords(x0);
    let back = lift.from_coords(&c0);
    if la::fro(&(&back - x0)) > 1e-8 * la::fro(x0).max(1e-300) {
        return Err(Error::Precondition("X0 is not in F(L_S)".into()));
    }
    let ct = lindblad::expm_pade(&model.l_o.mapv(|z| z * t)).dot(&c0);
    let x_lim = lift.from_coords(&ct);
    let mut rows = Vec::with_capacity(eps.len());
    for &e in eps {
        if !(e > 0.0) {
            return Err(Error::InvalidArgument(format!("ε must be positive, got {e}")));
        }
        let l = &(&lift.l_a * (1.0 / e)) + &(&lift.l_s * (1.0 / (e * e)));
        let x = Propagator::new(&l).apply(t, x0);
        rows.push((e, opalg::kms_norm(&(&x - &x_lim), &lift.sigma)?));
    }
    let tiny = 1e-14 * opalg::kms_norm(x0, &lift.sigma)?.max(1e-300);
    let slope = if rows.len() >= 2 && rows.iter().all(|r| r.1 > tiny) {
        let lx: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
        let ly: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
        Some(la::linfit(&lx, &ly).1)
    } else {
        None
    };
    Ok(EpsilonStudy { rows, slope })
}

/// Random element of `F(L_γ)^⊥` (KMS) built from a Hermitian probe.
pub fn random_mean_zero<R: rand::Rng + ?Sized>(lift: &LiftedGenerator, ef: &Superoperator, rng: &mut R) -> Mat {
    let h = crate::random::random_hermitian(rng, lift.dim());
    let x = &h - &ef.apply(&h);
    let n = opalg::kms_norm(&x, &lift.sigma).unwrap_or(1.0).max(1e-300);
    x.mapv(|z| z / n)
}
