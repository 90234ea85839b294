//! GKSL generators, semigroup evolution, invariant states and
//! conditional expectations onto fixed-point spaces.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::la::{self, Mat, C64, I, ONE, ZERO};
use crate::opalg::{self, DensityState, PositivityReport, Superoperator};

/// Default relative kernel threshold.
pub const KERNEL_TOL: f64 = 1e-10;

/// Hamiltonian and jump operators of a GKSL generator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GkslSpec {
    #[serde(rename = "H", with = "opalg::operator_serde")]
    pub h: Mat,
    #[serde(with = "opalg::operator_vec_serde")]
    pub jumps: Vec<Mat>,
}

#[derive(Clone, Debug)]
pub struct SemigroupSnapshot {
    pub t: f64,
    pub state: Mat,
}

/// Heisenberg-picture generator `i[H,X] + Σ_j (L_j† X L_j − ½{L_j†L_j, X})`.
pub fn build_gksl(spec: &GkslSpec) -> Result<Superoperator> {
    let d = spec.h.nrows();
    if spec.h.ncols() != d || d == 0 {
        return Err(Error::Dimension("H must be square".into()));
    }
    let defect = la::fro(&(&spec.h - &la::adjoint(&spec.h)));
    if defect > 1e-12 * la::fro(&spec.h).max(1.0) {
        return Err(Error::InvalidArgument(format!("H is not Hermitian (defect {defect:e})")));
    }
    let mut l = Superoperator::commutator(&spec.h).scale(I);
    for j in &spec.jumps {
        if j.dim() != (d, d) {
            return Err(Error::Dimension("jump operator size differs from H".into()));
        }
        let jd = la::adjoint(j);
        let g = jd.dot(j).mapv(|z| z * 0.5);
        l = &l + &Superoperator::sandwich(&jd, j);
        l = &l - &Superoperator::left(&g);
        l = &l - &Superoperator::right(&g);
    }
    Ok(l)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpmMethod {
    Eigen,
    Pade,
}

/// Precomputed `t ↦ exp(tL)`.
#[derive(Clone, Debug)]
pub struct Propagator {
    dim: usize,
    method: ExpmMethod,
    generator: Mat,
    eigen: Option<(Array1<C64>, Mat, Mat)>,
}

/// Eigenvector condition number above which the Padé route is used.
pub const EXPM_COND_MAX: f64 = 1e8;

impl Propagator {
    pub fn new(l: &Superoperator) -> Self {
        let generator = l.mat().clone();
        let eigen = la::eig(&generator).ok().and_then(|(w, v)| {
            let vinv = la::inv(&v).ok()?;
            let cond = la::fro(&v) * la::fro(&vinv) / generator.nrows() as f64;
            (cond.is_finite() && cond < EXPM_COND_MAX).then_some((w, v, vinv))
        });
        let method = if eigen.is_some() { ExpmMethod::Eigen } else { ExpmMethod::Pade };
        Self { dim: l.dim(), method, generator, eigen }
    }

    /// Forces scaling-and-squaring.
    pub fn pade(l: &Superoperator) -> Self {
        Self { dim: l.dim(), method: ExpmMethod::Pade, generator: l.mat().clone(), eigen: None }
    }

    pub fn method(&self) -> ExpmMethod {
        self.method
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Eigenvalues of the generator when the eigen route is active.
    pub fn eigenvalues(&self) -> Option<&Array1<C64>> {
        self.eigen.as_ref().map(|e| &e.0)
    }

    /// Matrix of `exp(tL)`.
    pub fn matrix(&self, t: f64) -> Mat {
        if t == 0.0 {
            return la::eye(self.generator.nrows());
        }
        match &self.eigen {
            Some((w, v, vinv)) => {
                let mut scaled = v.clone();
                for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
                    let e = (w[j] * t).exp();
                    col.mapv_inplace(|z| z * e);
                }
                scaled.dot(vinv)
            }
            None => expm_pade(&self.generator.mapv(|z| z * t)),
        }
    }

    pub fn superoperator(&self, t: f64) -> Superoperator {
        Superoperator::new(self.dim, self.matrix(t)).expect("shape")
    }

    pub fn apply(&self, t: f64, x: &Mat) -> Mat {
        if t == 0.0 {
            return x.clone();
        }
        let v = la::vec(x);
        let y = match &self.eigen {
            Some((w, vecs, vinv)) => {
                let mut c = vinv.dot(&v);
                for (k, z) in c.iter_mut().enumerate() {
                    *z *= (w[k] * t).exp();
                }
                vecs.dot(&c)
            }
            None => expm_pade(&self.generator.mapv(|z| z * t)).dot(&v),
        };
        la::unvec(&y, self.dim)
    }

    pub fn trajectory(&self, x0: &Mat, ts: &[f64]) -> Vec<SemigroupSnapshot> {
        ts.iter().map(|&t| SemigroupSnapshot { t, state: self.apply(t, x0) }).collect()
    }
}

/// Matrix exponential by degree-13 Padé with scaling and squaring.
pub fn expm_pade(a: &Mat) -> Mat {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.mapv(|z| z / 2f64.powi(s));
    let id = la::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> Mat {
        let mut m = a6.mapv(|z| z * c6);
        m.scaled_add(la::c(c4), &a4);
        m.scaled_add(la::c(c2), &a2);
        m.scaled_add(la::c(c0), &id);
        m
    };
    let u_inner = &a6.dot(&lin(B[13], B[11], B[9], 0.0)) + &lin(B[7], B[5], B[3], B[1]);
    let u = a.dot(&u_inner);
    let v = &a6.dot(&lin(B[12], B[10], B[8], 0.0)) + &lin(B[6], B[4], B[2], B[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = la::inv(&q).expect("Padé denominator is invertible").dot(&p);
    for _ in 0..s {
        r = r.dot(&r);
    }
    r
}

/// `exp(tL) X0`.
pub fn evolve(l: &Superoperator, x0: &Mat, t: f64) -> Result<Mat> {
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("negative time {t}")));
    }
    if x0.dim() != (l.dim(), l.dim()) {
        return Err(Error::Dimension("evolve: operand size".into()));
    }
    Ok(Propagator::new(l).apply(t, x0))
}

/// HS-orthonormal basis of the numerical kernel (threshold `tol · s_max`).
pub fn kernel_basis(l: &Superoperator, tol: f64) -> Result<Vec<Mat>> {
    let k = la::null_basis(l.mat(), tol)?;
    Ok(k.columns().into_iter().map(|c| la::unvec(&c.to_owned(), l.dim())).collect())
}

/// Real coordinates of a Hermitian matrix for the trace inner product.
fn herm_coords(h: &Mat) -> Array1<f64> {
    let d = h.nrows();
    let mut v = Vec::with_capacity(d * d);
    let r2 = 2f64.sqrt();
    for i in 0..d {
        v.push(h[[i, i]].re);
        for j in (i + 1)..d {
            v.push(r2 * h[[i, j]].re);
            v.push(r2 * h[[i, j]].im);
        }
    }
    Array1::from(v)
}

/// Invariant state of the dual semigroup: a PSD, trace-one element of
/// `ker L†`, chosen to maximize the minimal eigenvalue when the kernel is
/// degenerate.
pub fn invariant_state(l: &Superoperator) -> Result<DensityState> {
    let d = l.dim();
    let ldag = l.hs_adjoint();
    let kdag = la::null_basis(ldag.mat(), KERNEL_TOL)?;
    let m = kdag.ncols();
    if m == 0 {
        return Err(Error::NoInvariantState(0));
    }

    // Hermitian spanning set of the (Hermiticity-closed) kernel.
    let mut herm: Vec<Mat> = Vec::new();
    for col in kdag.columns() {
        let k = la::unvec(&col.to_owned(), d);
        let kd = la::adjoint(&k);
        herm.push((&k + &kd).mapv(|z| z * 0.5));
        herm.push((&k - &kd).mapv(|z| z / (2.0 * I)));
    }
    let coords: Vec<Array1<f64>> = herm.iter().map(herm_coords).collect();
    let cm = Array2::from_shape_fn((coords[0].len(), coords.len()), |(i, j)| la::c(coords[j][i]));
    let range = la::range_basis(&cm, 1e-8)?;
    // Back to matrices: the range columns are real combinations of coords;
    // rebuild each as a combination of the Hermitian spanning set.
    let pinv_coeffs = least_squares(&cm, &range)?;
    let basis: Vec<Mat> = pinv_coeffs
        .columns()
        .into_iter()
        .map(|c| {
            let mut acc = la::zeros(d, d);
            for (k, h) in herm.iter().enumerate() {
                acc.scaled_add(la::c(c[k].re), h);
            }
            la::hermitize(&acc)
        })
        .collect();

    // Cesàro candidate: spectral projection onto ker L† applied to 1/d.
    let mut candidates: Vec<Mat> = Vec::new();
    let kright = la::null_basis(l.mat(), KERNEL_TOL)?;
    if kright.ncols() == m {
        let w = la::adjoint(&kright);
        if let Ok(g) = la::inv(&w.dot(&kdag)) {
            let p0 = kdag.dot(&g).dot(&w);
            let rho = la::unvec(&p0.dot(&la::vec(&la::eye(d))), d);
            candidates.push(la::hermitize(&rho));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..(8 * basis.len()).min(128) {
        let mut acc = la::zeros(d, d);
        for b in &basis {
            acc.scaled_add(la::c(rng.random::<f64>() * 2.0 - 1.0), b);
        }
        candidates.push(acc);
    }

    let score = |x: &Mat| -> f64 {
        let t = la::trace(x).re;
        if t.abs() < 1e-12 {
            return f64::NEG_INFINITY;
        }
        la::min_eigh(&x.mapv(|z| z / t)).unwrap_or(f64::NEG_INFINITY)
    };
    let mut best = candidates
        .iter()
        .max_by(|a, b| score(a).total_cmp(&score(b)))
        .cloned()
        .ok_or(Error::NoInvariantState(m))?;
    let mut best_score = score(&best);

    if basis.len() > 1 {
        let mut step = 0.1 * la::fro(&best).max(1e-3);
        for _ in 0..400 {
            let mut trial = best.clone();
            for b in &basis {
                trial.scaled_add(la::c(step * (rng.random::<f64>() * 2.0 - 1.0)), b);
            }
            let sc = score(&trial);
            if sc > best_score {
                best = trial;
                best_score = sc;
            } else {
                step *= 0.97;
            }
        }
    }
    if best_score < -1e-10 || !best_score.is_finite() {
        return Err(Error::NoInvariantState(m));
    }
    let t = la::trace(&best).re;
    let mut rho = best.mapv(|z| z / t);
    // Clip round-off negativity before validation.
    if best_score < 0.0 {
        rho = la::herm_fn(&rho, |x| x.max(0.0))?;
        let t = la::trace(&rho).re;
        rho.mapv_inplace(|z| z / t);
    }
    DensityState::new(rho)
}

/// Least-squares solution of `A X = B` via the pseudoinverse.
fn least_squares(a: &Mat, b: &Mat) -> Result<Mat> {
    let (u, s, v) = la::svd(a)?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let r = s.iter().filter(|&&x| x > 1e-12 * smax).count();
    let mut out = la::zeros(a.ncols(), b.ncols());
    for k in 0..r {
        let uk = u.column(k);
        let vk = v.column(k);
        for j in 0..b.ncols() {
            let coeff: C64 = uk.iter().zip(b.column(j)).map(|(x, y)| x.conj() * y).sum::<C64>() / s[k];
            for i in 0..a.ncols() {
                out[[i, j]] += vk[i] * coeff;
            }
        }
    }
    Ok(out)
}

/// KMS-orthogonal projection onto the span of `basis`.
pub fn conditional_expectation(basis: &[Mat], sigma: &DensityState) -> Result<Superoperator> {
    let d = sigma.dim();
    sigma.require_full_rank()?;
    if basis.is_empty() {
        return Ok(Superoperator::zero(d));
    }
    let b = la::columns(&basis.iter().map(la::vec).collect::<Vec<_>>(), d * d);
    let gamma = opalg::weighting_map(sigma)?;
    let wb = gamma.mat().dot(&b);
    let g = la::adjoint(&b).dot(&wb);
    let p = b.dot(&la::inv(&g)?).dot(&la::adjoint(&wb));
    if !spans_identity(basis)? {
        log::warn!("conditional expectation: identity is not in the span of the basis");
    }
    Superoperator::new(d, p)
}

/// Whether `1` lies in the span of `basis`.
pub fn spans_identity(basis: &[Mat]) -> Result<bool> {
    if basis.is_empty() {
        return Ok(false);
    }
    let d = basis[0].nrows();
    let q = la::range_basis(
        &la::columns(&basis.iter().map(la::vec).collect::<Vec<_>>(), d * d),
        1e-10,
    )?;
    let one = la::vec(&la::eye(d));
    let proj = q.dot(&la::adjoint(&q).dot(&one));
    Ok(la::fro(&(&proj - &one).insert_axis(ndarray::Axis(1))) < 1e-8 * (d as f64).sqrt())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErgodicityReport {
    pub ergodic: bool,
    /// Eigenvalues with `|Re λ| ≤ tol` and `|Im λ| > tol`.
    pub violations: Vec<(f64, f64)>,
    pub tol: f64,
}

/// No purely imaginary nonzero eigenvalues; `tol` is relative to `‖L‖`.
pub fn ergodicity_check(l: &Superoperator, tol: f64) -> Result<ErgodicityReport> {
    let scale = l.norm();
    let abs_tol = tol * scale.max(f64::MIN_POSITIVE);
    let w = la::eigvals(l.mat())?;
    let violations: Vec<(f64, f64)> = w
        .iter()
        .filter(|z| z.re.abs() <= abs_tol && z.im.abs() > abs_tol)
        .map(|z| (z.re, z.im))
        .collect();
    let bad_growth = w.iter().any(|z| z.re > abs_tol);
    Ok(ErgodicityReport { ergodic: violations.is_empty() && !bad_growth, violations, tol: abs_tol })
}

/// Conditional complete positivity: `(1 − P_Ω) C(L) (1 − P_Ω) ⪰ −tol`.
pub fn is_conditionally_cp(l: &Superoperator, tol: f64) -> Result<PositivityReport> {
    let d = l.dim();
    let scale = l.fro().max(1.0);
    let unit = la::fro(&l.apply(&la::eye(d)));
    if unit > tol * scale {
        return Err(Error::Precondition(format!("L(1) ≠ 0 (norm {unit:e})")));
    }
    let mut herm_defect: f64 = 0.0;
    let mut e = la::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            e[[i, j]] = ONE;
            let y = l.apply(&e);
            e[[i, j]] = ZERO;
            e[[j, i]] = ONE;
            let y2 = l.apply(&e);
            e[[j, i]] = ZERO;
            herm_defect = herm_defect.max(la::fro(&(&y2 - &la::adjoint(&y))));
        }
    }
    if herm_defect > tol * scale {
        return Err(Error::Precondition(format!("L is not Hermiticity-preserving ({herm_defect:e})")));
    }
    let c = la::hermitize(&opalg::choi(l));
    let n = d * d;
    let mut omega = Array1::<C64>::zeros(n);
    for i in 0..d {
        omega[i * d + i] = la::c(1.0 / (d as f64).sqrt());
    }
    let mut proj = la::eye(n);
    for r in 0..n {
        for s in 0..n {
            proj[[r, s]] -= omega[r] * omega[s].conj();
        }
    }
    let comp = proj.dot(&c).dot(&proj);
    let min = la::min_eigh(&comp)?;
    Ok(PositivityReport { pass: min >= -tol, residual: min })
}
