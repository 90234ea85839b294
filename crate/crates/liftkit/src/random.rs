//! Seeded random test objects.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::la::{self, Mat, C64};
use crate::opalg::{DensityState, Superoperator};

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Mat {
    Mat::from_shape_fn((d, d), |_| C64::new(normal(rng), normal(rng)) / 2f64.sqrt())
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Mat {
    la::hermitize(&random_matrix(rng, d))
}

pub fn random_traceless_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Mat {
    let h = random_hermitian(rng, d);
    let t = la::trace(&h) / d as f64;
    &h - &la::eye(d).mapv(|z| z * t)
}

/// Full-rank state `G G† / tr(G G†)` mixed with a little of the identity.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityState {
    let g = random_matrix(rng, d);
    let p = g.dot(&la::adjoint(&g));
    let p = &p / la::trace(&p);
    let mixed = &p.mapv(|z| z * 0.9) + &la::eye(d).mapv(|z| z * (0.1 / d as f64));
    DensityState::new(mixed).expect("random state")
}

/// Full-rank diagonal state with eigenvalues bounded away from zero.
pub fn random_diagonal_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityState {
    let w: Vec<f64> = (0..d).map(|_| 0.2 + rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    DensityState::from_diag(&w.iter().map(|x| x / s).collect::<Vec<_>>()).expect("diag state")
}

pub fn random_superoperator<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Superoperator {
    Superoperator::new(d, random_matrix(rng, d * d)).expect("shape")
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Mat {
    let h = random_hermitian(rng, d);
    let (w, u) = la::eigh(&h).expect("eigh");
    let mut m = la::zeros(d, d);
    for k in 0..d {
        let ph = C64::from_polar(1.0, w[k]);
        for i in 0..d {
            for j in 0..d {
                m[[i, j]] += u[[i, k]] * ph * u[[j, k]].conj();
            }
        }
    }
    m
}

/// Random CP map with `k` Kraus operators.
pub fn random_cp_map<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> Superoperator {
    let mut s = Superoperator::zero(d);
    for _ in 0..k {
        let v = random_matrix(rng, d);
        s = &s + &Superoperator::sandwich(&la::adjoint(&v), &v);
    }
    s
}
