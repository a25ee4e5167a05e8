//! Random inputs and independent reference implementations shared by the
//! integration tests.
#![allow(dead_code)]

use localdisc::{DeltaMatrix, Operator, SchmidtSpectrum, Vector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn exponential(rng: &mut ChaCha8Rng) -> f64 {
    -(1.0 - rng.random::<f64>()).ln()
}

pub fn random_spectrum(d: usize, rng: &mut ChaCha8Rng) -> SchmidtSpectrum {
    SchmidtSpectrum::random(d, rng)
}

pub fn random_delta(d: usize, rng: &mut ChaCha8Rng) -> DeltaMatrix {
    let rows = (0..d)
        .map(|k| {
            let draws: Vec<f64> = (k..d).map(|_| exponential(rng)).collect();
            let total: f64 = draws.iter().sum();
            draws.into_iter().map(|v| v / total).collect()
        })
        .collect();
    DeltaMatrix::from_rows(rows).unwrap()
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
}

pub fn random_vector(d: usize, rng: &mut ChaCha8Rng) -> Vector {
    Vector::from_complex((0..d).map(|_| random_complex(rng)).collect()).unwrap()
}

/// Gram-Schmidt on random complex vectors.
pub fn random_orthonormal_basis(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::new();
    while basis.len() < d {
        let mut v = random_vector(d, rng);
        for b in &basis {
            v = &v - &b.scale(b.inner(&v));
        }
        if v.norm() > 1e-3 {
            basis.push(v.normalized().unwrap());
        }
    }
    basis
}

/// `G G†` with `G` a random `d × rank` complex matrix.
pub fn random_psd(d: usize, rank: usize, rng: &mut ChaCha8Rng) -> Operator {
    let mut out = Operator::zeros(d);
    for _ in 0..rank {
        out += &Operator::projector(&random_vector(d, rng));
    }
    out
}

pub fn random_density(d: usize, rank: usize, rng: &mut ChaCha8Rng) -> Operator {
    let p = random_psd(d, rank, rng);
    p.scale(1.0 / p.trace_re())
}

/// `M_i = S^{-1/2} G_i S^{-1/2}` with `S = Σ G_i`.
pub fn random_povm(outcomes: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Operator> {
    // the first element has full rank so that the sum is invertible
    let gs: Vec<Operator> = (0..outcomes)
        .map(|i| {
            random_psd(
                d,
                if i == 0 {
                    d
                } else {
                    1 + rng.random_range(0..d)
                },
                rng,
            )
        })
        .collect();
    let total = gs.iter().fold(Operator::zeros(d), |acc, g| &acc + g);
    let w = total.psd_power(-0.5).unwrap();
    gs.iter()
        .map(|g| (&(&w * g) * &w).hermitian_part())
        .collect()
}

/// Keeps exactly the entries `|jk⟩⟨j'k'|` with `j = k, j' = k'` or
/// `(j, k) = (j', k')`, the fixed points of the local phase group.
pub fn pinch(t: &Operator, d: usize) -> Operator {
    let n = d * d;
    let mut entries = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let (j, k, jp, kp) = (r / d, r % d, c / d, c % d);
            let keep = (j == k && jp == kp) || (j == jp && k == kp);
            entries.push(if keep {
                t.get(r, c)
            } else {
                Complex64::new(0.0, 0.0)
            });
        }
    }
    Operator::from_rows(n, &entries).unwrap()
}

pub fn ket(d: usize, a: usize, b: usize) -> Vector {
    Vector::basis(d * d, a * d + b)
}

/// `T = |ψ̃⟩⟨ψ̃| + Σ_{i≠j} √(λ_i λ_j) |ij⟩⟨ij|`.
pub fn separable_t(lambdas: &[f64]) -> Operator {
    let d = lambdas.len();
    let coherent: Vec<f64> = (0..d * d)
        .map(|idx| {
            if idx / d == idx % d {
                lambdas[idx / d].sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut t = Operator::projector(&Vector::from_real(&coherent).unwrap());
    for i in 0..d {
        for j in 0..d {
            if i != j {
                t += &Operator::projector(&ket(d, i, j)).scale((lambdas[i] * lambdas[j]).sqrt());
            }
        }
    }
    t
}

/// `T̄₀ = P + Q` written out entrywise from its defining sums.
pub fn complement_seed(lambdas: &[f64]) -> Operator {
    let d = lambdas.len();
    let q: Vec<f64> = lambdas.iter().map(|v| v.powf(0.25)).collect();
    let mut out = Operator::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let mut a = vec![0.0; d];
            a[i] = q[j];
            a[j] = -q[i];
            let mut b = vec![0.0; d];
            b[i] = q[j];
            b[j] = q[i];
            let ab = Vector::from_real(&a)
                .unwrap()
                .tensor(&Vector::from_real(&b).unwrap());
            out += &Operator::projector(&ab).scale(0.5);
            let others: f64 = (0..d)
                .filter(|&k| k != i && k != j)
                .map(|k| lambdas[k])
                .sum();
            let w = others + (lambdas[i].sqrt() - lambdas[j].sqrt()).powi(2);
            out += &Operator::projector(&ket(d, i, j)).scale(w);
        }
    }
    out
}

/// `Σ_i i · (Σ_k λ_k δ_ki²) / (Σ_k λ_k δ_ki)`, with empty terms dropped.
pub fn closed_form(lambdas: &[f64], delta: &DeltaMatrix) -> f64 {
    let d = lambdas.len();
    let mut total = 0.0;
    for i in 0..d {
        let num: f64 = (0..=i).map(|k| lambdas[k] * delta.get(k, i).powi(2)).sum();
        let den: f64 = (0..=i).map(|k| lambdas[k] * delta.get(k, i)).sum();
        if den > 0.0 {
            total += (i + 1) as f64 * num / den;
        }
    }
    total
}

/// Largest absolute eigenvalue of a Hermitian operator.
pub fn operator_norm(t: &Operator) -> f64 {
    let eig = localdisc::eig_hermitian(&t.hermitian_part()).unwrap();
    eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn psi(lambdas: &[f64]) -> Vector {
    let d = lambdas.len();
    let amps: Vec<f64> = (0..d * d)
        .map(|idx| {
            if idx / d == idx % d {
                lambdas[idx / d].sqrt()
            } else {
                0.0
            }
        })
        .collect();
    Vector::from_real(&amps).unwrap()
}

/// Two-qubit closed form `1/2 - (1 - √(2λ))² / (4(1 - λ))`.
pub fn qubit_beta(lambda: f64) -> f64 {
    0.5 - (1.0 - (2.0 * lambda).sqrt()).powi(2) / (4.0 * (1.0 - lambda))
}
