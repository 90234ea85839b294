//! Operator and superoperator algebra.
//!
//! Superoperators are stored as `d² × d²` matrices acting on the
//! column-stacked vectorization `vec(X)[i + j d] = X[i, j]`, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use std::ops::{Add, Mul, Neg, Sub};

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::la::{self, Mat, ONE, ZERO};

/// Dense square complex matrix, an element of B(H).
pub type OperatorMatrix = Mat;

/// Relative eigenvalue floor below which a state counts as singular.
pub const EIG_FLOOR: f64 = 1e-14;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug)]
pub struct DensityState {
    op: Mat,
    evals: Array1<f64>,
    evecs: Mat,
    min_eig: f64,
}

impl DensityState {
    pub fn new(op: Mat) -> Result<Self> {
        let d = square_dim(&op)?;
        if !la::is_finite(&op) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let asym = la::fro(&(&op - &la::adjoint(&op)));
        if asym > 1e-12 * d as f64 * la::fro(&op).max(1.0) {
            return Err(Error::InvalidState(format!("not Hermitian (defect {asym:e})")));
        }
        let op = la::hermitize(&op);
        let tr = la::trace(&op);
        if (tr - ONE).norm() > 1e-12 * d as f64 {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let (evals, evecs) = la::eigh(&op)?;
        let min = evals[0];
        if min < -1e-12 {
            return Err(Error::InvalidState(format!("not PSD (min eigenvalue {min:e})")));
        }
        Ok(Self { op, evals, evecs, min_eig: min.max(0.0) })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new(la::eye(d).mapv(|z| z / d as f64)).expect("maximally mixed state")
    }

    pub fn from_diag(p: &[f64]) -> Result<Self> {
        Self::new(la::diag(p))
    }

    /// Gibbs-type state proportional to `exp(-h)` for Hermitian `h`.
    pub fn gibbs(h: &Mat) -> Result<Self> {
        let (w, u) = la::eigh(h)?;
        let wmin = w.iter().cloned().fold(f64::INFINITY, f64::min);
        let z: f64 = w.iter().map(|x| (-(x - wmin)).exp()).sum();
        Self::new(la::herm_fn_from(&w, &u, |x| (-(x - wmin)).exp() / z))
    }

    pub fn op(&self) -> &Mat {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.nrows()
    }

    pub fn min_eig(&self) -> f64 {
        self.min_eig
    }

    pub fn max_eig(&self) -> f64 {
        self.evals[self.evals.len() - 1]
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.evals
    }

    pub fn eigenvectors(&self) -> &Mat {
        &self.evecs
    }

    pub fn is_full_rank(&self) -> bool {
        self.min_eig > EIG_FLOOR * self.max_eig()
    }

    pub fn require_full_rank(&self) -> Result<()> {
        if self.is_full_rank() {
            Ok(())
        } else {
            Err(Error::SingularState { min: self.min_eig, floor: EIG_FLOOR * self.max_eig() })
        }
    }

    /// `σ^p`; negative and zero powers need a full-rank state.
    pub fn pow(&self, p: f64) -> Result<Mat> {
        if p <= 0.0 {
            self.require_full_rank()?;
        }
        Ok(la::herm_fn_from(&self.evals, &self.evecs, |x| x.max(0.0).powf(p)))
    }

    pub fn is_diagonal(&self) -> bool {
        self.op.indexed_iter().all(|((i, j), z)| i == j || *z == ZERO)
    }

    pub fn tensor(&self, other: &DensityState) -> DensityState {
        DensityState::new(tensor(&self.op, &other.op)).expect("product of states is a state")
    }
}

/// Superoperator on `B(C^d)` in column-stacking convention.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    mat: Mat,
}

impl Superoperator {
    pub fn new(dim: usize, mat: Mat) -> Result<Self> {
        if mat.dim() != (dim * dim, dim * dim) {
            return Err(Error::Dimension(format!(
                "superoperator on dim {dim} needs a {0}x{0} matrix, got {1:?}",
                dim * dim,
                mat.dim()
            )));
        }
        Ok(Self { dim, mat })
    }

    /// Builds the matrix of a linear map by applying it to matrix units.
    pub fn from_map(dim: usize, f: impl Fn(&Mat) -> Mat) -> Self {
        let n = dim * dim;
        let mut mat = la::zeros(n, n);
        let mut e = la::zeros(dim, dim);
        for j in 0..dim {
            for i in 0..dim {
                e[[i, j]] = ONE;
                let y = f(&e);
                e[[i, j]] = ZERO;
                mat.column_mut(i + j * dim).assign(&la::vec(&y));
            }
        }
        Self { dim, mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, mat: la::eye(dim * dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, mat: la::zeros(dim * dim, dim * dim) }
    }

    /// `X ↦ A X B`.
    pub fn sandwich(a: &Mat, b: &Mat) -> Self {
        let d = a.nrows();
        let mut mat = la::zeros(d * d, d * d);
        for bb in 0..d {
            for j in 0..d {
                let bjb = b[[j, bb]];
                if bjb == ZERO {
                    continue;
                }
                for i in 0..d {
                    for aa in 0..d {
                        mat[[aa + bb * d, i + j * d]] = a[[aa, i]] * bjb;
                    }
                }
            }
        }
        Self { dim: d, mat }
    }

    /// `X ↦ A X`.
    pub fn left(a: &Mat) -> Self {
        Self::sandwich(a, &la::eye(a.nrows()))
    }

    /// `X ↦ X B`.
    pub fn right(b: &Mat) -> Self {
        Self::sandwich(&la::eye(b.nrows()), b)
    }

    /// `X ↦ [H, X]`.
    pub fn commutator(h: &Mat) -> Self {
        &Self::left(h) - &Self::right(h)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn into_mat(self) -> Mat {
        self.mat
    }

    pub fn apply(&self, x: &Mat) -> Mat {
        la::unvec(&self.mat.dot(&la::vec(x)), self.dim)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, other.dim, "compose: dimension mismatch");
        Self { dim: self.dim, mat: self.mat.dot(&other.mat) }
    }

    /// Hilbert–Schmidt adjoint.
    pub fn hs_adjoint(&self) -> Superoperator {
        Self { dim: self.dim, mat: la::adjoint(&self.mat) }
    }

    pub fn scale(&self, s: C64) -> Superoperator {
        Self { dim: self.dim, mat: self.mat.mapv(|z| z * s) }
    }

    /// Frobenius norm of the matrix.
    pub fn fro(&self) -> f64 {
        la::fro(&self.mat)
    }

    /// Spectral norm in the Hilbert–Schmidt geometry.
    pub fn norm(&self) -> f64 {
        la::norm2(&self.mat).unwrap_or(f64::NAN)
    }

    /// `Φ ⊗ Ψ` acting on `B(H_A ⊗ H_B)`, A-factor on the left.
    pub fn tensor(&self, other: &Superoperator) -> Superoperator {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut mat = la::zeros(d * d, d * d);
        let mut ea = la::zeros(da, da);
        let mut eb = la::zeros(db, db);
        for ja in 0..da {
            for ia in 0..da {
                ea[[ia, ja]] = ONE;
                let ya = self.apply(&ea);
                ea[[ia, ja]] = ZERO;
                for jb in 0..db {
                    for ib in 0..db {
                        eb[[ib, jb]] = ONE;
                        let yb = other.apply(&eb);
                        eb[[ib, jb]] = ZERO;
                        let y = tensor(&ya, &yb);
                        let col = (ia * db + ib) + (ja * db + jb) * d;
                        mat.column_mut(col).assign(&la::vec(&y));
                    }
                }
            }
        }
        Self { dim: d, mat }
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim);
        Superoperator { dim: self.dim, mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim);
        Superoperator { dim: self.dim, mat: &self.mat - &rhs.mat }
    }
}

impl Mul<f64> for &Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: f64) -> Superoperator {
        Superoperator { dim: self.dim, mat: self.mat.mapv(|z| z * rhs) }
    }
}

impl Neg for &Superoperator {
    type Output = Superoperator;
    fn neg(self) -> Superoperator {
        self * -1.0
    }
}

fn square_dim(x: &Mat) -> Result<usize> {
    let (n, m) = x.dim();
    if n != m || n == 0 {
        return Err(Error::Dimension(format!("expected a nonempty square matrix, got {n}x{m}")));
    }
    Ok(n)
}

/// `tr(X† Y)`.
pub fn hs_inner(x: &Mat, y: &Mat) -> Result<C64> {
    if x.dim() != y.dim() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", x.dim(), y.dim())));
    }
    Ok(x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum())
}

/// `tr(σ^s X† σ^{1−s} Y)`.
pub fn s_inner(x: &Mat, y: &Mat, sigma: &DensityState, s: f64) -> Result<C64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("s = {s} outside [0, 1]")));
    }
    sigma.require_full_rank()?;
    if x.dim() != y.dim() || x.nrows() != sigma.dim() {
        return Err(Error::Dimension("s_inner operands".into()));
    }
    let a = sigma.pow(s)?;
    let b = sigma.pow(1.0 - s)?;
    Ok(la::trace(&a.dot(&la::adjoint(x)).dot(&b).dot(y)))
}

/// KMS inner product `⟨X, Y⟩_{σ,1/2}`.
pub fn kms_inner(x: &Mat, y: &Mat, sigma: &DensityState) -> Result<C64> {
    s_inner(x, y, sigma, 0.5)
}

/// `‖X‖_{2,σ}`.
pub fn kms_norm(x: &Mat, sigma: &DensityState) -> Result<f64> {
    Ok(kms_inner(x, x, sigma)?.re.max(0.0).sqrt())
}

/// `Δ_σ(X) = σ X σ^{-1}`.
pub fn modular_map(sigma: &DensityState) -> Result<Superoperator> {
    Ok(Superoperator::sandwich(sigma.op(), &sigma.pow(-1.0)?))
}

/// `Γ_σ(X) = σ^{1/2} X σ^{1/2}`.
pub fn weighting_map(sigma: &DensityState) -> Result<Superoperator> {
    weighting_power(sigma, 1.0)
}

/// `Γ_σ^p(X) = σ^{p/2} X σ^{p/2}`.
pub fn weighting_power(sigma: &DensityState, p: f64) -> Result<Superoperator> {
    sigma.require_full_rank()?;
    let r = sigma.pow(p / 2.0)?;
    Ok(Superoperator::sandwich(&r, &r))
}

/// Diagonal of `Γ_σ^p` when σ is diagonal.
fn diag_weights(sigma: &DensityState, p: f64) -> Option<Vec<f64>> {
    if !sigma.is_diagonal() {
        return None;
    }
    let d = sigma.dim();
    let s: Vec<f64> = (0..d).map(|i| sigma.op()[[i, i]].re.powf(p / 2.0)).collect();
    Some((0..d * d).map(|k| s[k % d] * s[k / d]).collect())
}

/// `Γ^{a} M Γ^{b}` for a superoperator matrix `M`.
fn weight_both(m: &Mat, sigma: &DensityState, a: f64, b: f64) -> Result<Mat> {
    sigma.require_full_rank()?;
    if let (Some(wa), Some(wb)) = (diag_weights(sigma, a), diag_weights(sigma, b)) {
        return Ok(Array2::from_shape_fn(m.dim(), |(r, c)| m[[r, c]] * (wa[r] * wb[c])));
    }
    let ga = weighting_power(sigma, a)?;
    let gb = weighting_power(sigma, b)?;
    Ok(ga.mat().dot(m).dot(gb.mat()))
}

/// Matrix of `Γ^{1/2} Φ Γ^{-1/2}`: Euclidean quantities of this matrix are
/// KMS-geometry quantities of Φ.
pub fn kms_conjugate(phi: &Superoperator, sigma: &DensityState) -> Result<Mat> {
    weight_both(phi.mat(), sigma, 0.5, -0.5)
}

/// Inverse of [`kms_conjugate`].
pub fn kms_unconjugate(m: &Mat, sigma: &DensityState) -> Result<Superoperator> {
    let d = sigma.dim();
    Superoperator::new(d, weight_both(m, sigma, -0.5, 0.5)?)
}

/// `Γ^{1/2}` applied to an operator: KMS norms become Frobenius norms.
pub fn kms_embed(x: &Mat, sigma: &DensityState) -> Result<Mat> {
    let r = sigma.pow(0.25)?;
    Ok(r.dot(x).dot(&r))
}

/// `Φ⋆ = Γ^{-1} Φ† Γ`.
pub fn kms_adjoint(phi: &Superoperator, sigma: &DensityState) -> Result<Superoperator> {
    let m = weight_both(&la::adjoint(phi.mat()), sigma, -1.0, 1.0)?;
    Superoperator::new(phi.dim(), m)
}

/// Operator norm of Φ on `(M, ‖·‖_{2,σ})`.
pub fn kms_op_norm(phi: &Superoperator, sigma: &DensityState) -> Result<f64> {
    la::norm2(&kms_conjugate(phi, sigma)?)
}

/// Kronecker product, A-factor on the left.
pub fn tensor(x: &Mat, y: &Mat) -> Mat {
    ndarray::linalg::kron(x, y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Keep {
    A,
    B,
}

pub fn partial_trace(x: &Mat, dim_a: usize, dim_b: usize, keep: Keep) -> Result<Mat> {
    if x.dim() != (dim_a * dim_b, dim_a * dim_b) {
        return Err(Error::Dimension(format!(
            "partial trace of {:?} with dims ({dim_a}, {dim_b})",
            x.dim()
        )));
    }
    Ok(match keep {
        Keep::A => Array2::from_shape_fn((dim_a, dim_a), |(a, a2)| {
            (0..dim_b).map(|b| x[[a * dim_b + b, a2 * dim_b + b]]).sum()
        }),
        Keep::B => Array2::from_shape_fn((dim_b, dim_b), |(b, b2)| {
            (0..dim_a).map(|a| x[[a * dim_b + b, a * dim_b + b2]]).sum()
        }),
    })
}

/// Choi matrix `Σ_ij E_ij ⊗ Φ(E_ij)`.
pub fn choi(phi: &Superoperator) -> Mat {
    let d = phi.dim();
    let m = phi.mat();
    Array2::from_shape_fn((d * d, d * d), |(r, c)| {
        let (i, a) = (r / d, r % d);
        let (j, b) = (c / d, c % d);
        m[[a + b * d, i + j * d]]
    })
}

/// Result of a positivity test: pass flag and the minimal eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub pass: bool,
    pub residual: f64,
}

pub fn is_cp(phi: &Superoperator, tol: f64) -> Result<PositivityReport> {
    let min = la::min_eigh(&la::hermitize(&choi(phi)))?;
    Ok(PositivityReport { pass: min >= -tol, residual: min })
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn to_json_parts(m: &Mat) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = m.outer_iter().map(|r| r.iter().map(|z| z.re).collect()).collect();
    let im = m.outer_iter().map(|r| r.iter().map(|z| z.im).collect()).collect();
    (re, im)
}

fn from_json_parts(n: usize, re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Mat> {
    let ok = re.len() == n
        && im.len() == n
        && re.iter().all(|r| r.len() == n)
        && im.iter().all(|r| r.len() == n);
    if !ok {
        return Err(Error::Dimension(format!("expected {n}x{n} re/im arrays")));
    }
    let m = Array2::from_shape_fn((n, n), |(i, j)| C64::new(re[i][j], im[i][j]));
    if !la::is_finite(&m) {
        return Err(Error::InvalidArgument("non-finite entries".into()));
    }
    Ok(m)
}

pub fn operator_to_value(m: &Mat) -> serde_json::Value {
    let (re, im) = to_json_parts(m);
    serde_json::to_value(OperatorJson { dim: m.nrows(), re, im }).expect("serializable")
}

pub fn operator_from_value(v: &serde_json::Value) -> Result<Mat> {
    let o: OperatorJson = serde_json::from_value(v.clone())?;
    if o.dim == 0 {
        return Err(Error::Dimension("dim must be at least 1".into()));
    }
    from_json_parts(o.dim, &o.re, &o.im)
}

pub fn superoperator_to_value(s: &Superoperator) -> serde_json::Value {
    let (re, im) = to_json_parts(s.mat());
    serde_json::to_value(OperatorJson { dim: s.dim(), re, im }).expect("serializable")
}

pub fn superoperator_from_value(v: &serde_json::Value) -> Result<Superoperator> {
    let o: OperatorJson = serde_json::from_value(v.clone())?;
    if o.dim == 0 {
        return Err(Error::Dimension("dim must be at least 1".into()));
    }
    Superoperator::new(o.dim, from_json_parts(o.dim * o.dim, &o.re, &o.im)?)
}

/// Serde adapter for `OperatorMatrix` fields: `#[serde(with = "opalg::operator_serde")]`.
pub mod operator_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> std::result::Result<S::Ok, S::Error> {
        operator_to_value(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Mat, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        operator_from_value(&v).map_err(serde::de::Error::custom)
    }
}

impl Serialize for DensityState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        operator_to_value(&self.op).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        operator_from_value(&v)
            .and_then(DensityState::new)
            .map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<OperatorMatrix>` fields.
pub mod operator_vec_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &[Mat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<_> = m.iter().map(operator_to_value).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Mat>, D::Error> {
        let v = Vec::<serde_json::Value>::deserialize(d)?;
        v.iter().map(|x| operator_from_value(x).map_err(serde::de::Error::custom)).collect()
    }
}
