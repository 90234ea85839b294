//! Concrete lifts: dephasing chain lifts of symmetric Q-matrices with their
//! matrix certificate, GNS-detailed-balanced bipartite lifts built on a
//! depolarizing ancilla, intertwining checks and a few example generators.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::la::{self, Mat, C64, I};
use crate::lifting::{self, LiftedGenerator};
use crate::opalg::{self, DensityState, Superoperator};
use crate::random;
use crate::spectra;

/// `L(X) = −[A, [A, X]]` with `A = diag(κ)`.
pub fn dephasing_generator(kappa: &[f64]) -> Result<Superoperator> {
    check_distinct(kappa)?;
    let ca = Superoperator::commutator(&la::diag(kappa));
    Ok(-&ca.compose(&ca))
}

fn check_distinct(kappa: &[f64]) -> Result<()> {
    for i in 0..kappa.len() {
        for j in 0..i {
            if kappa[i] == kappa[j] {
                return Err(Error::InvalidArgument(format!("κ has a repeated value {}", kappa[i])));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    pub kappa: Vec<f64>,
}

impl ChainSpec {
    /// Reflecting nearest-neighbour walk with rates 1/2 and `κ_i = i − 1`.
    pub fn reflecting(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("chain needs n ≥ 2".into()));
        }
        let mut q = vec![vec![0.0; n]; n];
        for i in 0..n - 1 {
            q[i][i + 1] = 0.5;
            q[i + 1][i] = 0.5;
        }
        for i in 0..n {
            q[i][i] = -q[i].iter().sum::<f64>();
        }
        Ok(Self { n, q, kappa: (0..n).map(|i| i as f64).collect() })
    }

    pub fn q_matrix(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n, self.n), |(i, j)| self.q[i][j])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 2 || self.q.len() != n || self.q.iter().any(|r| r.len() != n) || self.kappa.len() != n {
            return Err(Error::Dimension(format!("chain spec must be {n}x{n} with {n} κ values")));
        }
        check_distinct(&self.kappa)?;
        let q = self.q_matrix();
        let scale = q.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        for i in 0..n {
            if q.row(i).sum().abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument(format!("row {i} of Q does not sum to zero")));
            }
            for j in 0..n {
                if (q[[i, j]] - q[[j, i]]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidArgument("Q is not symmetric".into()));
                }
                if i != j && q[[i, j]] < 0.0 {
                    return Err(Error::InvalidArgument(format!("Q[{i}][{j}] < 0")));
                }
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && q[[i, j]] > 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("Q is reducible".into()));
        }
        Ok(())
    }

    /// Spectral gap of `−Q`.
    pub fn gap(&self) -> Result<f64> {
        let w = la::eigvalsh(&la::from_real(&self.q_matrix().mapv(|x| -x)))?;
        Ok(w[1])
    }

    /// `h_ij = √(Q_ij / 2)` off the diagonal.
    pub fn hamiltonian(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n, self.n), |(i, j)| if i == j { 0.0 } else { (self.q[i][j] / 2.0).sqrt() })
    }
}

/// `L_γ = i[H, ·] + γ L_S` with the dephasing `L_S` of `A = diag(κ)` and
/// `σ = 1/n`.
pub fn chain_lift(spec: &ChainSpec, gamma: f64) -> Result<LiftedGenerator> {
    spec.validate()?;
    let h = la::from_real(&spec.hamiltonian());
    let l_a = Superoperator::commutator(&h).scale(I);
    let l_s = dephasing_generator(&spec.kappa)?;
    LiftedGenerator::new(l_a, l_s, gamma, DensityState::maximally_mixed(spec.n))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainCertificate {
    pub m: Vec<Vec<f64>>,
    pub q2: Vec<Vec<f64>>,
    /// Smallest `C1` with `M ⪯ C1 Q²` (infinite if `M` does not vanish on
    /// `ker Q`).
    pub c1_min: f64,
    /// Minimal eigenvalue of `(3/2) Q² − M`.
    pub min_eig_3_2: f64,
    pub pass_3_2: bool,
}

fn to_rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

/// `M_ij = 2(H⁴)_ii δ_ij − 8(H³)_ij h_ij + 6((H²)_ij)²` against `Q²`.
pub fn chain_certificate(spec: &ChainSpec) -> Result<ChainCertificate> {
    spec.validate()?;
    let n = spec.n;
    let h = spec.hamiltonian();
    let h2 = h.dot(&h);
    let h3 = h2.dot(&h);
    let h4 = h3.dot(&h);
    let m = Array2::from_shape_fn((n, n), |(i, j)| {
        let diag = if i == j { 2.0 * h4[[i, i]] } else { 0.0 };
        diag - 8.0 * h3[[i, j]] * h[[i, j]] + 6.0 * h2[[i, j]] * h2[[i, j]]
    });
    let q = spec.q_matrix();
    let q2 = q.dot(&q);
    let gap = (&q2 * 1.5) - &m;
    let min_eig_3_2 = la::eigvalsh(&la::from_real(&gap))?[0];

    // Generalized eigenproblem on 1^⊥ = ker(Q)^⊥.
    let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
    let ones = ndarray::Array1::from_elem(n, 1.0);
    let c1_min = if m.dot(&ones).iter().any(|x| x.abs() > 1e-10 * scale) {
        f64::INFINITY
    } else {
        let w = la::null_basis(&la::from_real(&ones.clone().insert_axis(ndarray::Axis(0))), 1e-12)?;
        let qr = la::hermitize(&la::adjoint(&w).dot(&la::from_real(&q2)).dot(&w));
        let mr = la::hermitize(&la::adjoint(&w).dot(&la::from_real(&m)).dot(&w));
        let qi = la::herm_fn(&qr, |x| x.powf(-0.5))?;
        *la::eigvalsh(&la::hermitize(&qi.dot(&mr).dot(&qi)))?.last().expect("n ≥ 2")
    };
    Ok(ChainCertificate {
        m: to_rows(&m),
        q2: to_rows(&q2),
        c1_min,
        min_eig_3_2,
        pass_3_2: min_eig_3_2 >= -1e-10,
    })
}

/// `X ↦ −X + tr(σ X) 1`.
pub fn depolarizing_generator(sigma: &DensityState) -> Result<Superoperator> {
    sigma.require_full_rank()?;
    let d = sigma.dim();
    let s = sigma.op().clone();
    Ok(Superoperator::from_map(d, |x| &la::eye(d).mapv(|z| z * la::trace(&s.dot(x))) - x))
}

/// Modular eigenvectors `V_j` with Bohr frequencies `ω_j` and the
/// conjugation `V_j† = V_{j'}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JumpFamily {
    #[serde(with = "opalg::operator_vec_serde")]
    pub jumps: Vec<Mat>,
    pub bohr: Vec<f64>,
    pub conj: Vec<usize>,
}

impl JumpFamily {
    pub fn dim(&self) -> usize {
        self.jumps.first().map_or(0, |v| v.nrows())
    }

    /// Number of `ω = 0` and `ω > 0` jumps.
    pub fn counts(&self) -> (usize, usize) {
        let j0 = self.bohr.iter().filter(|&&w| w == 0.0).count();
        let jp = self.bohr.iter().filter(|&&w| w > 0.0).count();
        (j0, jp)
    }

    /// Largest violation of the modular, conjugation and trace constraints.
    pub fn residual(&self, sigma: &DensityState) -> Result<f64> {
        let n = self.jumps.len();
        if self.bohr.len() != n || self.conj.len() != n {
            return Err(Error::Dimension("jumps, bohr and conj lengths differ".into()));
        }
        let delta = opalg::modular_map(sigma)?;
        let mut r: f64 = 0.0;
        for j in 0..n {
            let v = &self.jumps[j];
            let k = self.conj[j];
            if k >= n || self.conj[k] != j {
                return Err(Error::InvalidArgument(format!("conj is not an involution at {j}")));
            }
            let scale = la::fro(v).max(1e-300);
            r = r.max(la::fro(&(&delta.apply(v) - &v.mapv(|z| z * (-self.bohr[j]).exp()))) / scale);
            r = r.max(la::fro(&(&la::adjoint(v) - &self.jumps[k])) / scale);
            r = r.max((self.bohr[j] + self.bohr[k]).abs());
            r = r.max(la::trace(v).norm() / scale);
        }
        Ok(r)
    }

    /// `Σ_j e^{−ω_j/2} V_j†[X, V_j] + e^{ω_j/2}[V_j, X] V_j†`.
    pub fn generator(&self) -> Superoperator {
        let d = self.dim();
        Superoperator::from_map(d, |x| {
            let mut y = la::zeros(d, d);
            for (v, &w) in self.jumps.iter().zip(&self.bohr) {
                let vd = la::adjoint(v);
                y.scaled_add(la::c((-w / 2.0).exp()), &vd.dot(&la::commutator(x, v)));
                y.scaled_add(la::c((w / 2.0).exp()), &la::commutator(v, x).dot(&vd));
            }
            y
        })
    }

    /// `Σ_j ⟨[V_j, X], [V_j, Y]⟩_{σ,1/2}`.
    pub fn dirichlet_form(&self, sigma: &DensityState, x: &Mat, y: &Mat) -> Result<C64> {
        let mut s = la::c(0.0);
        for v in &self.jumps {
            s += opalg::kms_inner(&la::commutator(v, x), &la::commutator(v, y), sigma)?;
        }
        Ok(s)
    }
}

/// HS-orthonormal traceless basis adapted to the modular operator, with the
/// `ω = 0` part Hermitian.
fn modular_basis(sigma: &DensityState) -> Vec<(Mat, f64)> {
    let d = sigma.dim();
    let p = sigma.eigenvalues();
    let u = sigma.eigenvectors();
    let rot = |m: &Mat| u.dot(m).dot(&la::adjoint(u));
    let unit = |a: usize, b: usize| {
        let mut e = la::zeros(d, d);
        e[[a, b]] = la::c(1.0);
        e
    };
    let r2 = 2f64.sqrt();
    let mut out = Vec::new();
    for k in 1..d {
        let mut m = la::zeros(d, d);
        for i in 0..k {
            m[[i, i]] = la::c(1.0);
        }
        m[[k, k]] = la::c(-(k as f64));
        out.push((rot(&m.mapv(|z| z / ((k * (k + 1)) as f64).sqrt())), 0.0));
    }
    for a in 0..d {
        for b in (a + 1)..d {
            let w = (p[b] / p[a]).ln();
            if w.abs() <= 1e-12 {
                let s = &unit(a, b) + &unit(b, a);
                let t = (&unit(a, b) - &unit(b, a)).mapv(|z| z * I);
                out.push((rot(&s.mapv(|z| z / r2)), 0.0));
                out.push((rot(&t.mapv(|z| z / r2)), 0.0));
            } else {
                out.push((rot(&unit(a, b)), w));
                out.push((rot(&unit(b, a)), -w));
            }
        }
    }
    out
}

/// Relative rank tolerance for the Kossakowski blocks.
pub const JUMP_RANK_TOL: f64 = 1e-9;

/// Canonical jump family of a GNS-detailed-balanced generator, read off its
/// Kossakowski matrix block by block in Bohr frequency.
pub fn jump_family_from_gksl(l_o: &Superoperator, sigma: &DensityState, tol: f64) -> Result<JumpFamily> {
    let d = sigma.dim();
    if l_o.dim() != d {
        return Err(Error::Dimension(format!("generator on {} vs state on {d}", l_o.dim())));
    }
    let scale = l_o.norm().max(1.0);
    let db = spectra::is_detailed_balanced(l_o, sigma, 1.0, tol * scale)?;
    if !db.pass {
        return Err(Error::Precondition(format!("not GNS detailed balanced (residual {:e})", db.residual)));
    }
    let basis = modular_basis(sigma);
    // Bohr-frequency blocks, ω ≥ 0 only; ω < 0 comes from conjugation.
    let mut blocks: Vec<(f64, Vec<usize>)> = Vec::new();
    for (k, (_, w)) in basis.iter().enumerate() {
        if *w < -1e-12 {
            continue;
        }
        match blocks.iter_mut().find(|(w0, _)| (w0 - w).abs() <= 1e-9 * (1.0 + w.abs())) {
            Some((_, idx)) => idx.push(k),
            None => blocks.push((*w, vec![k])),
        }
    }
    blocks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let coeff = |a: &Mat, b: &Mat| -> C64 {
        // ⟨F_bᵀ ⊗ F_a†, mat(L)⟩_HS: coefficient of X ↦ F_a† X F_b.
        let k = opalg::tensor(&b.t().to_owned(), &la::adjoint(a));
        k.iter().zip(l_o.mat().iter()).map(|(x, y)| x.conj() * y).sum()
    };
    let mut spectra_blocks = Vec::new();
    let mut top: f64 = 0.0;
    for (w, idx) in &blocks {
        let n = idx.len();
        let mut c = la::zeros(n, n);
        for (i, &a) in idx.iter().enumerate() {
            for (j, &b) in idx.iter().enumerate() {
                c[[i, j]] = coeff(&basis[a].0, &basis[b].0);
            }
        }
        if *w == 0.0 {
            let im = la::fro(&c.mapv(|z| la::c(z.im)));
            if im > 1e-8 * la::fro(&c).max(1e-300) {
                return Err(Error::Precondition(format!(
                    "ω = 0 block is not real in a Hermitian basis ({im:e})"
                )));
            }
            c.mapv_inplace(|z| la::c(z.re));
        }
        let (ev, vecs) = la::eigh(&la::hermitize(&c))?;
        top = top.max(ev.iter().cloned().fold(0.0, f64::max));
        spectra_blocks.push((*w, idx.clone(), ev, vecs));
    }
    let mut zero = Vec::new();
    let mut plus = Vec::new();
    for (w, idx, ev, vecs) in &spectra_blocks {
        for (k, &lam) in ev.iter().enumerate() {
            if lam < -JUMP_RANK_TOL * top.max(1e-300) {
                return Err(Error::Precondition(format!("Kossakowski matrix has eigenvalue {lam:e}")));
            }
            if lam <= JUMP_RANK_TOL * top {
                continue;
            }
            let mut col = vecs.column(k).to_owned();
            if *w == 0.0 {
                let pivot = col.iter().cloned().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("nonempty");
                let phase = pivot.conj() / pivot.norm();
                col.mapv_inplace(|z| la::c((z * phase).re));
            }
            let mut l = la::zeros(d, d);
            for (&ci, &b) in col.iter().zip(idx) {
                l.scaled_add(ci.conj(), &basis[b].0);
            }
            let v = l.mapv(|z| z * (lam.sqrt() * (w / 4.0).exp() / 2f64.sqrt()));
            if *w == 0.0 {
                zero.push(la::hermitize(&v));
            } else {
                plus.push((v, *w));
            }
        }
    }
    let j0 = zero.len();
    let jp = plus.len();
    let mut jumps = zero;
    let mut bohr = vec![0.0; j0];
    let mut conj: Vec<usize> = (0..j0).collect();
    for (k, (v, w)) in plus.iter().enumerate() {
        jumps.push(v.clone());
        bohr.push(*w);
        conj.push(j0 + jp + k);
    }
    for (k, (v, w)) in plus.iter().enumerate() {
        jumps.push(la::adjoint(v));
        bohr.push(-w);
        conj.push(j0 + k);
    }
    let family = JumpFamily { jumps, bohr, conj };
    let rebuilt = family.generator();
    let err = (&rebuilt - l_o).fro();
    if err > 1e-8 * l_o.fro().max(1e-300) {
        return Err(Error::Precondition(format!("jump family does not reproduce the generator ({err:e})")));
    }
    Ok(family)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GnsLiftArtifacts {
    pub dim_a: usize,
    pub sigma_a: DensityState,
    #[serde(with = "opalg::operator_vec_serde")]
    pub z: Vec<Mat>,
    #[serde(rename = "H", with = "opalg::operator_serde")]
    pub h: Mat,
    pub j0: usize,
    pub jplus: usize,
    pub mu: Vec<f64>,
    /// Intertwining constant when `σ_B ∝ 1` and one exists.
    pub kappa: Option<f64>,
}

impl GnsLiftArtifacts {
    /// Largest violation of orthonormality, `tr(σ_A Z_j) = 0`, the modular
    /// constraint and `Z_j† = Z_{j'}`.
    pub fn residual(&self, family: &JumpFamily) -> Result<f64> {
        let n = self.z.len();
        let delta = opalg::modular_map(&self.sigma_a)?;
        let mut r: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                let ip = opalg::kms_inner(&self.z[k], &self.z[j], &self.sigma_a)?;
                r = r.max((ip - la::c(if j == k { 1.0 } else { 0.0 })).norm());
            }
            r = r.max(la::trace(&self.sigma_a.op().dot(&self.z[j])).norm());
            let zj = &self.z[j];
            r = r.max(la::fro(&(&delta.apply(zj) - &zj.mapv(|z| z * family.bohr[j].exp()))));
            r = r.max(la::fro(&(&la::adjoint(zj) - &self.z[family.conj[j]])));
        }
        Ok(r)
    }
}

/// Bipartite lift `i[Σ_j Z_j ⊗ V_j, ·] + γ (L^A ⊗ id)` with a depolarizing
/// ancilla generator `L^A`.
pub fn gns_lift(
    family: &JumpFamily,
    sigma_b: &DensityState,
    gamma: f64,
) -> Result<(LiftedGenerator, GnsLiftArtifacts)> {
    let res = family.residual(sigma_b)?;
    if res > 1e-8 {
        return Err(Error::InvalidArgument(format!("jump family violates its invariants ({res:e})")));
    }
    let (j0, jp) = family.counts();
    if j0 + 2 * jp != family.jumps.len() {
        return Err(Error::InvalidArgument("jump family has unpaired frequencies".into()));
    }
    if j0 + jp == 0 {
        return Err(Error::InvalidArgument("empty jump family".into()));
    }
    let dim_a = 2 * (j0 + jp);
    let db = sigma_b.dim();
    let pair_mass = 1.0 / (j0 + jp) as f64;
    let mut mu = vec![0.0; dim_a];
    // Pair p occupies basis vectors 2p, 2p+1 (1-based 2p+1, 2p+2).
    let zero_idx: Vec<usize> = (0..family.jumps.len()).filter(|&j| family.bohr[j] == 0.0).collect();
    let plus_idx: Vec<usize> = (0..family.jumps.len()).filter(|&j| family.bohr[j] > 0.0).collect();
    for p in 0..j0 {
        mu[2 * p] = pair_mass / 2.0;
        mu[2 * p + 1] = pair_mass / 2.0;
    }
    for (k, &j) in plus_idx.iter().enumerate() {
        let p = j0 + k;
        let e = family.bohr[j].exp();
        mu[2 * p] = pair_mass * e / (1.0 + e);
        mu[2 * p + 1] = pair_mass / (1.0 + e);
    }
    let sigma_a = DensityState::from_diag(&mu)?;
    let proj = |a: usize, b: usize| {
        let mut e = la::zeros(dim_a, dim_a);
        e[[a, b]] = la::c(1.0);
        e
    };
    let mut z = vec![la::zeros(dim_a, dim_a); family.jumps.len()];
    for (p, &j) in zero_idx.iter().enumerate() {
        let s = (mu[2 * p] + mu[2 * p + 1]).sqrt();
        z[j] = (&proj(2 * p + 1, 2 * p + 1) - &proj(2 * p, 2 * p)).mapv(|x| x / s);
    }
    for (k, &j) in plus_idx.iter().enumerate() {
        let p = j0 + k;
        let s = (mu[2 * p] * mu[2 * p + 1]).powf(0.25);
        z[j] = proj(2 * p, 2 * p + 1).mapv(|x| x / s);
        z[family.conj[j]] = proj(2 * p + 1, 2 * p).mapv(|x| x / s);
    }
    let mut h = la::zeros(dim_a * db, dim_a * db);
    for (zj, vj) in z.iter().zip(&family.jumps) {
        h = &h + &opalg::tensor(zj, vj);
    }
    let h = la::hermitize(&h);
    let l_a = Superoperator::commutator(&h).scale(I);
    let l_s = depolarizing_generator(&sigma_a)?.tensor(&Superoperator::identity(db));
    let sigma = sigma_a.tensor(sigma_b);
    let mut lift = LiftedGenerator::new(l_a, l_s, gamma, sigma)?.with_factor_frame(dim_a, db)?;

    let mixed = jp == 0 && la::fro(&(sigma_b.op() - &la::eye(db).mapv(|x| x / db as f64))) < 1e-12;
    let mut kappa = None;
    if mixed {
        let (k, _) = intertwining_kappa(&family.generator(), family, sigma_b, 1e-9)?;
        if let Some(k) = k {
            let j0f = j0 as f64;
            lift = lift.with_k_override(j0f.sqrt(), (j0f * (-k).max(0.0)).sqrt());
            kappa = Some(k);
        }
    }
    Ok((lift, GnsLiftArtifacts { dim_a, sigma_a, z, h, j0, jplus: jp, mu, kappa }))
}

/// Least-squares `κ` in `∂_j L = L ∂_j − κ ∂_j`, `∂_j = [V_j, ·]`. Returns
/// `None` when the residual exceeds `tol · ‖L‖`.
pub fn intertwining_kappa(
    l: &Superoperator,
    family: &JumpFamily,
    sigma: &DensityState,
    tol: f64,
) -> Result<(Option<f64>, f64)> {
    let d = l.dim();
    let scale = l.fro().max(1e-300);
    // L = −Σ ∂_j⋆ ∂_j, checked through the generator of the family.
    let mut form = Superoperator::zero(d);
    for v in &family.jumps {
        let dj = Superoperator::commutator(v);
        form = &form + &opalg::kms_adjoint(&dj, sigma)?.compose(&dj);
    }
    let mismatch = (&form + l).fro();
    if mismatch > 1e-8 * scale {
        return Err(Error::Precondition(format!("L ≠ −Σ ∂⋆∂ for the family ({mismatch:e})")));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut parts = Vec::new();
    for v in &family.jumps {
        let dj = Superoperator::commutator(v);
        let r = (&dj.compose(l) - &l.compose(&dj)).into_mat();
        num += r.iter().zip(dj.mat().iter()).map(|(a, b)| (b.conj() * a).re).sum::<f64>();
        den += dj.fro().powi(2);
        parts.push((r, dj));
    }
    let kappa = if den > 0.0 { -num / den } else { 0.0 };
    let residual = parts
        .iter()
        .map(|(r, dj)| la::fro(&(r + &dj.mat().mapv(|z| z * kappa))).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(((residual <= tol * scale).then_some(kappa), residual))
}

/// Schur multiplier `L(E_ij) = −‖a(i) − a(j)‖² E_ij` and its jumps
/// `V_k = Σ_j a(j)_k E_jj` (shifted to be traceless).
pub fn schur_generator(points: &[Vec<f64>]) -> Result<(Superoperator, JumpFamily)> {
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no points".into()));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Dimension("points of different dimension".into()));
    }
    let l = Superoperator::from_map(n, |x| {
        Mat::from_shape_fn((n, n), |(i, j)| {
            let d2: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            x[[i, j]] * (-d2)
        })
    });
    let mut jumps = Vec::new();
    for k in 0..dim {
        let mean = points.iter().map(|p| p[k]).sum::<f64>() / n as f64;
        let v: Vec<f64> = points.iter().map(|p| p[k] - mean).collect();
        if v.iter().any(|x| x.abs() > 0.0) {
            jumps.push(la::diag(&v));
        }
    }
    let m = jumps.len();
    Ok((l, JumpFamily { jumps, bohr: vec![0.0; m], conj: (0..m).collect() }))
}

/// `−Σ_k [V_k, [V_k, ·]]` for `k` random traceless Hermitian `V_k`.
pub fn random_symmetric_generator<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> Superoperator {
    let mut l = Superoperator::zero(d);
    for _ in 0..k {
        let c = Superoperator::commutator(&random::random_traceless_hermitian(rng, d));
        l = &l - &c.compose(&c);
    }
    l
}

/// Dephasing lift with random distinct `κ` and random `H`, `σ = 1/d`.
pub fn random_dephasing_lift<R: Rng + ?Sized>(rng: &mut R, d: usize, gamma: f64) -> Result<LiftedGenerator> {
    let mut kappa: Vec<f64> = Vec::with_capacity(d);
    let mut acc = 0.0;
    for _ in 0..d {
        acc += 0.5 + rng.random::<f64>();
        kappa.push(acc);
    }
    let h = random::random_hermitian(rng, d);
    let l_a = Superoperator::commutator(&h).scale(I);
    LiftedGenerator::new(l_a, dephasing_generator(&kappa)?, gamma, DensityState::maximally_mixed(d))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub lambda_q: f64,
    pub gamma_max: f64,
    pub gamma_best: f64,
    pub nu_emp: f64,
    /// `ν_emp(γ_best) / √λ_Q`.
    pub ratio: f64,
}

/// Empirically best rate of the reflecting-chain lift for each `n`, over
/// `n_gamma` log-spaced points on `[γ_max/100, 10 γ_max]`. The lower-bound
/// peak `γ_max` overshoots the empirical optimum by a growing factor, hence
/// the extra decade below it.
pub fn chain_scaling(ns: &[usize], n_gamma: usize, opts: &lifting::AnalyzeOptions) -> Result<Vec<ScalingRow>> {
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let spec = ChainSpec::reflecting(n)?;
        let lift = chain_lift(&spec, 1.0)?;
        let model = lifting::overdamped_generator(&lift)?;
        let consts = lifting::bound_constants(&lift, &model, opts.t_obs)?;
        let gamma_max = lifting::lower_bound_rate(&consts, 1.0).gamma_max;
        let ef = lift.e_f()?;
        let grid = lifting::log_grid(gamma_max / 100.0, gamma_max * 10.0, n_gamma);
        let rates: Vec<(f64, f64)> = lifting::thread_pool().install(|| {
            use rayon::prelude::*;
            grid.par_iter()
                .map(|&g| Ok((g, lifting::empirical_at(&lift, &ef, g, opts)?.0.nu)))
                .collect::<Result<Vec<_>>>()
        })?;
        let (gamma_best, nu_emp) = rates.into_iter().fold((0.0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
        let lambda_q = spec.gap()?;
        out.push(ScalingRow { n, lambda_q, gamma_max, gamma_best, nu_emp, ratio: nu_emp / lambda_q.sqrt() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::{self, verify_condition_a, verify_condition_b, verify_condition_c, verify_condition_d};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(d: usize, i: usize, j: usize) -> Mat {
        let mut e = la::zeros(d, d);
        e[[i, j]] = la::c(1.0);
        e
    }

    /// Family on `σ_B = diag(p0, p1)`, `p1 > p0`: one lowering pair and one
    /// diagonal jump.
    fn thermal_family(p0: f64) -> (JumpFamily, DensityState) {
        let p1 = 1.0 - p0;
        let sigma = DensityState::from_diag(&[p0, p1]).unwrap();
        let v = unit(2, 0, 1).mapv(|z| z * 0.7);
        let h = la::diag(&[0.4, -0.4]);
        let fam = JumpFamily {
            jumps: vec![h, v.clone(), la::adjoint(&v)],
            bohr: vec![0.0, (p1 / p0).ln(), -(p1 / p0).ln()],
            conj: vec![0, 2, 1],
        };
        (fam, sigma)
    }

    #[test]
    fn dephasing_spectrum_on_matrix_units() {
        let kappa = [0.0, 1.0, 2.5];
        let l = dephasing_generator(&kappa).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = unit(3, i, j).mapv(|z| z * -(kappa[i] - kappa[j]).powi(2));
                assert!(la::fro(&(&l.apply(&unit(3, i, j)) - &want)) < 1e-12);
            }
        }
        let l = dephasing_generator(&[0.0, 1.0, 2.0]).unwrap();
        assert!((l.norm() - 4.0).abs() < 1e-10);
        assert!(dephasing_generator(&[0.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn chain_validation() {
        let spec = ChainSpec::reflecting(4).unwrap();
        spec.validate().unwrap();
        let mut bad = spec.clone();
        bad.q[0][1] = 0.0;
        bad.q[1][0] = 0.0;
        bad.q[0][0] = 0.0;
        bad.q[1][1] = -0.5;
        assert!(bad.validate().is_err());
        let mut bad = spec.clone();
        bad.kappa[3] = 0.0;
        assert!(bad.validate().is_err());
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"Q\""));
        let back: ChainSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.q, spec.q);
    }

    #[test]
    fn reflecting_gap_matches_path_laplacian() {
        for n in [2, 3, 8, 13] {
            let spec = ChainSpec::reflecting(n).unwrap();
            let want = 1.0 - (std::f64::consts::PI / n as f64).cos();
            assert!((spec.gap().unwrap() - want).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn two_site_chain() {
        let spec = ChainSpec::reflecting(2).unwrap();
        let h = spec.hamiltonian();
        assert!((h[[0, 1]] - 0.5).abs() < 1e-15 && h[[0, 0]] == 0.0);
        assert!((spec.gap().unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn certificate_corner_entries() {
        for n in [5, 8, 16, 32] {
            let cert = chain_certificate(&ChainSpec::reflecting(n).unwrap()).unwrap();
            assert!(cert.pass_3_2, "n = {n}: {}", cert.min_eig_3_2);
            assert!((cert.m[0][0] - 0.625).abs() < 1e-14);
            assert!((cert.m[0][1] + 1.0).abs() < 1e-14);
            assert!((cert.m[0][2] - 0.375).abs() < 1e-14);
            assert!((cert.q2[0][0] - 0.5).abs() < 1e-14);
            assert!(cert.c1_min <= 1.5 + 1e-9);
        }
    }

    #[test]
    fn two_site_certificate_by_hand() {
        // H = [[0, ½], [½, 0]]: H² = I/4, H³ = H/4, H⁴ = I/16.
        let cert = chain_certificate(&ChainSpec::reflecting(2).unwrap()).unwrap();
        let m_diag = 2.0 / 16.0 + 6.0 / 16.0;
        let m_off = -8.0 * (0.5 / 4.0) * 0.5;
        assert!((cert.m[0][0] - m_diag).abs() < 1e-15);
        assert!((cert.m[0][1] - m_off).abs() < 1e-15);
        // Q² = [[½, −½], [−½, ½]]; both share the eigenvector (1, −1).
        let m_top = m_diag - m_off;
        assert!((cert.c1_min - m_top / 1.0).abs() < 1e-12);
        assert!((cert.min_eig_3_2 - (1.5 - m_top).min(0.0)).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sigma = random::random_state(&mut rng, 3);
        let l = depolarizing_generator(&sigma).unwrap();
        assert!(la::fro(&l.apply(&la::eye(3))) < 1e-13);
        let mut x = random::random_matrix(&mut rng, 3);
        let t = la::trace(&sigma.op().dot(&x));
        x = &x - &la::eye(3).mapv(|z| z * t);
        assert!(la::fro(&(&l.apply(&x) + &x)) < 1e-12);
        assert!(spectra::is_detailed_balanced(&l, &sigma, 1.0, 1e-10).unwrap().pass);
    }

    #[test]
    fn family_from_depolarizing_is_hermitian() {
        let sigma = DensityState::maximally_mixed(2);
        let l = depolarizing_generator(&sigma).unwrap();
        let fam = jump_family_from_gksl(&l, &sigma, 1e-10).unwrap();
        assert_eq!(fam.counts(), (3, 0));
        for v in &fam.jumps {
            assert!(la::fro(&(v - &la::adjoint(v))) < 1e-12);
        }
        assert!(fam.residual(&sigma).unwrap() < 1e-10);
    }

    #[test]
    fn family_round_trip_thermal() {
        let (fam, sigma) = thermal_family(0.3);
        assert!(fam.residual(&sigma).unwrap() < 1e-12);
        let l = fam.generator();
        assert!(spectra::is_detailed_balanced(&l, &sigma, 1.0, 1e-10).unwrap().pass);
        let back = jump_family_from_gksl(&l, &sigma, 1e-10).unwrap();
        assert_eq!(back.counts(), (1, 1));
        assert!((&back.generator() - &l).fro() < 1e-11);
        // Dirichlet form agrees with the generator's on random probes.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x = random::random_matrix(&mut rng, 2);
            let want = spectra::dirichlet_form(&l, &sigma, &x, &x).unwrap();
            let got = back.dirichlet_form(&sigma, &x, &x).unwrap();
            assert!((want - got).norm() < 1e-10 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn single_jump_recovery() {
        let sigma = DensityState::maximally_mixed(3);
        let v = la::hermitize(&random::random_traceless_hermitian(&mut ChaCha8Rng::seed_from_u64(5), 3));
        let c = Superoperator::commutator(&v);
        let l = -&c.compose(&c);
        let fam = jump_family_from_gksl(&l, &sigma, 1e-10).unwrap();
        assert_eq!(fam.jumps.len(), 1);
        let w = &fam.jumps[0];
        // Same span up to sign.
        let ip = opalg::hs_inner(w, &v).unwrap().re;
        assert!((ip.abs() - la::fro(w) * la::fro(&v)).abs() < 1e-10);
    }

    #[test]
    fn non_balanced_input_rejected() {
        let sigma = DensityState::from_diag(&[0.3, 0.7]).unwrap();
        let l = depolarizing_generator(&DensityState::maximally_mixed(2)).unwrap();
        assert!(jump_family_from_gksl(&l, &sigma, 1e-10).is_err());
    }

    #[test]
    fn gns_lift_depolarizing_recovers_generator() {
        let sigma_b = DensityState::maximally_mixed(2);
        let l_o = depolarizing_generator(&sigma_b).unwrap();
        let fam = jump_family_from_gksl(&l_o, &sigma_b, 1e-10).unwrap();
        let (lift, art) = gns_lift(&fam, &sigma_b, 1.0).unwrap();
        assert_eq!(art.dim_a, 6);
        assert!(art.residual(&fam).unwrap() < 1e-11);
        for &m in &art.mu {
            assert!((m - 1.0 / 6.0).abs() < 1e-15);
        }
        let sig = lift.sigma().op();
        assert!(la::fro(&la::commutator(&art.h, sig)) < 1e-11);
        let model = lifting::overdamped_generator(&lift).unwrap();
        let red = model.reduced(&lift).unwrap();
        assert!((&red - &l_o).fro() < 1e-11 * l_o.fro());
        assert!(art.kappa.unwrap().abs() < 1e-10);
        assert_eq!(lift.k_override(), Some((3f64.sqrt(), 0.0)));
    }

    #[test]
    fn gns_lift_thermal_conditions() {
        let (fam, sigma_b) = thermal_family(0.3);
        let l_o = fam.generator();
        let (lift, art) = gns_lift(&fam, &sigma_b, 1.0).unwrap();
        assert!(art.residual(&fam).unwrap() < 1e-11);
        assert!((art.mu[2] / art.mu[3] - fam.bohr[1].exp()).abs() < 1e-12);
        assert!((art.mu.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(art.kappa.is_none());
        let a = verify_condition_a(lift.l_s(), lift.l_a(), lift.sigma(), 1e-9).unwrap();
        assert!(a.pass, "{a:?}");
        assert!(verify_condition_b(&lift).pass);
        assert!(verify_condition_c(&lift, 1e-9).unwrap().pass);
        let model = lifting::overdamped_generator(&lift).unwrap();
        let d = verify_condition_d(&lift, &model, 1e-9).unwrap();
        assert!(d.pass, "{d:?}");
        let red = model.reduced(&lift).unwrap();
        assert!((&red - &l_o).fro() < 1e-10 * l_o.fro());
    }

    #[test]
    fn intertwining_examples() {
        let sigma = DensityState::maximally_mixed(3);
        let l = depolarizing_generator(&sigma).unwrap();
        let fam = jump_family_from_gksl(&l, &sigma, 1e-10).unwrap();
        let (k, res) = intertwining_kappa(&l, &fam, &sigma, 1e-10).unwrap();
        assert!(k.unwrap().abs() < 1e-10 && res < 1e-10);

        let pts = vec![vec![0.0, 1.0], vec![0.5, -1.0], vec![2.0, 0.3]];
        let (l, fam) = schur_generator(&pts).unwrap();
        let (k, res) = intertwining_kappa(&l, &fam, &sigma, 1e-10).unwrap();
        assert!(k.unwrap().abs() < 1e-10 && res < 1e-10);

        // Perturb away from a commuting structure.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = random_symmetric_generator(&mut rng, 3, 2);
        let fam = jump_family_from_gksl(&l, &sigma, 1e-10).unwrap();
        let (k, res) = intertwining_kappa(&l, &fam, &sigma, 1e-10).unwrap();
        assert!(k.is_none() && res > 1e-6);
    }

    #[test]
    fn schur_matches_dephasing_on_a_line() {
        let n = 4;
        let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let (l, fam) = schur_generator(&pts).unwrap();
        let dep = dephasing_generator(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(l.mat(), dep.mat());
        for i in 0..n {
            assert_eq!(la::fro(&l.apply(&unit(n, i, i))), 0.0);
        }
        let rebuilt = fam.generator();
        assert!((&rebuilt - &l).fro() < 1e-12);
    }

    #[test]
    fn chain_lift_basics() {
        let spec = ChainSpec::reflecting(4).unwrap();
        let lift = chain_lift(&spec, 1.0).unwrap();
        assert!(verify_condition_b(&lift).pass);
        assert!(verify_condition_c(&lift, 1e-9).unwrap().pass);
        let model = lifting::overdamped_generator_general(&lift, &Superoperator::identity(4)).unwrap();
        let q = spec.q_matrix();
        let lo = model.l_o.mapv(|z| z.re);
        assert!(lo.iter().zip(q.iter()).all(|(a, b)| (a - b).abs() < 1e-12), "{lo}");
    }
}
