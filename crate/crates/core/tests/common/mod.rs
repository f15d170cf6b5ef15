//! Test-side oracles, written independently of the library's solvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unext::states::{random_bipartite, BipartiteState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rényi entropy in bits of a probability vector (order 0 counts entries above 1e-6).
pub fn renyi(p: &[f64], a: f64) -> f64 {
    let p: Vec<f64> = p.iter().copied().filter(|&x| x > 1e-6).collect();
    if a == 0.0 {
        return (p.len() as f64).log2();
    }
    if a == 1.0 {
        return -p.iter().map(|x| x * x.log2()).sum::<f64>();
    }
    if a.is_infinite() {
        return -p.iter().cloned().fold(0.0, f64::max).log2();
    }
    p.iter().map(|x| x.powf(a)).sum::<f64>().log2() / (1.0 - a)
}

pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

/// Random Schmidt coefficients of length d, sorted descending, none below 0.02.
pub fn schmidt_coeffs(seed: u64, d: usize) -> Vec<f64> {
    let mut r = rng(seed);
    let mut v: Vec<f64> = (0..d).map(|_| 0.02 + r.random::<f64>()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// A two-qubit state that is typically entangled and not two-extendible.
pub fn entangled_mixture(seed: u64, noise_rank: usize, p: f64) -> BipartiteState {
    let psi = random_bipartite(2, 2, 1, seed).unwrap();
    let noise = random_bipartite(2, 2, noise_rank, 1000 + seed).unwrap();
    psi.mix(&noise, p).unwrap()
}

/// Real symmetric embedding of a complex Hermitian matrix.
fn embed(m: &DMatrix<C>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Relative entropy D(ρ‖·) in bits via eigendecompositions of real embeddings
/// (each eigenvalue appears twice there).
pub struct RelEnt {
    rr: DMatrix<f64>,
    neg_s: f64,
}

impl RelEnt {
    pub fn new(rho: &DMatrix<C>) -> Self {
        let rr = embed(rho);
        let er = SymmetricEigen::new(rr.clone());
        let neg_s = er.eigenvalues.iter().filter(|&&x| x > 1e-15).map(|x| x * x.log2()).sum::<f64>() / 2.0;
        Self { rr, neg_s }
    }

    pub fn to(&self, sigma: &DMatrix<C>) -> f64 {
        let es = SymmetricEigen::new(embed(sigma));
        let mut cross = 0.0;
        for k in 0..es.eigenvalues.len() {
            let v = es.eigenvectors.column(k);
            let w = (v.transpose() * &self.rr * v)[(0, 0)];
            if w.abs() > 1e-15 {
                cross += w * es.eigenvalues[k].max(1e-300).log2();
            }
        }
        self.neg_s - cross / 2.0
    }
}

fn qubit(theta: f64, phi: f64) -> [C; 2] {
    [C::new((theta / 2.0).cos(), 0.0), C::from_polar((theta / 2.0).sin(), phi)]
}

fn mixture(x: &[f64], atoms: usize) -> DMatrix<C> {
    let w: Vec<f64> = x[4 * atoms..].iter().map(|v| v.exp()).collect();
    let tot: f64 = w.iter().sum();
    let mut s = DMatrix::<C>::zeros(4, 4);
    for k in 0..atoms {
        let a = qubit(x[4 * k], x[4 * k + 1]);
        let b = qubit(x[4 * k + 2], x[4 * k + 3]);
        let v = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
        for i in 0..4 {
            for j in 0..4 {
                s[(i, j)] += v[i] * v[j].conj() * (w[k] / tot);
            }
        }
    }
    s
}

/// Upper bound on the relative entropy of entanglement of a two-qubit state:
/// multi-start descent over mixtures of `atoms` product pure states.
pub fn separable_mixture_ree(rho: &DMatrix<C>, atoms: usize, starts: usize, seed: u64) -> f64 {
    let np = 5 * atoms;
    let d = RelEnt::new(rho);
    let f = |x: &[f64]| d.to(&mixture(x, atoms));
    let mut r = rng(seed);
    let mut best = f64::INFINITY;
    for _ in 0..starts {
        let mut x: Vec<f64> = (0..np).map(|i| if i < 4 * atoms { r.random::<f64>() * 6.3 } else { 0.0 }).collect();
        let mut fx = f(&x);
        let mut step = 0.5;
        let mut mark = fx;
        for it in 0..4000 {
            if it % 100 == 99 {
                if mark - fx < 1e-10 {
                    break;
                }
                mark = fx;
            }
            let h = 1e-6;
            let g: Vec<f64> = (0..np)
                .map(|i| {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    (f(&xp) - f(&xm)) / (2.0 * h)
                })
                .collect();
            let gn: f64 = g.iter().map(|v| v * v).sum();
            if gn < 1e-18 {
                break;
            }
            step *= 2.0;
            loop {
                let cand: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
                let fc = f(&cand);
                if fc <= fx - 1e-4 * step * gn {
                    x = cand;
                    fx = fc;
                    break;
                }
                step *= 0.5;
                if step < 1e-14 {
                    break;
                }
            }
            if step < 1e-14 {
                break;
            }
        }
        best = best.min(fx);
    }
    best
}
