//! The three-step two-way LOCC protocol for a pure state
//! `|Ψ⟩ = Σ √λ_k |kk⟩` written in its Schmidt basis.
//!
//! 1. Alice measures `M_i = Σ_{k≤i} δ_ki |k⟩⟨k|` and announces `i`.
//! 2. Bob measures in a basis `{ξ_j}` of the support of his conditional
//!    state `ω_B` that is unbiased with respect to it (`⟨ξ_j|ω_B|ξ_j⟩ = 1/r`),
//!    rejecting outright on the orthogonal complement, and announces `j`.
//! 3. Alice accepts iff her state lies in the support of `σ_A^{ij}`.
//!
//! The accepting element is `T = Σ_ij (√M_i Π_ij √M_i) ⊗ |ξ_j⟩⟨ξ_j|` and
//! `⟨Ψ|T|Ψ⟩ = 1` by construction.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{
    c, eig_hermitian, numerical_rank, support_projection, tensor, Operator, Vector, C64,
    CONSTRUCTION_TOL, DERIVED_TOL,
};
use crate::state::SchmidtSpectrum;

/// Row-sum tolerance for `δ`.
const ROW_SUM_TOL: f64 = 1e-12;
/// Denominators `Σ_k λ_k δ_ki` below this count as a never-taken branch.
pub const ZERO_BRANCH_TOL: f64 = 1e-14;

/// Coefficients `δ_ki`, `1 ≤ k ≤ i ≤ d`, with `δ_ki ≥ 0` and
/// `Σ_{i≥k} δ_ki = 1` for every `k`. Stored by row `k` (0-based), entry
/// `i - k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaMatrix {
    rows: Vec<Vec<f64>>,
}

impl DeltaMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::Empty("delta rows"));
        }
        let mut rows = rows;
        for (k, row) in rows.iter_mut().enumerate() {
            if row.len() != d - k {
                return Err(Error::InvalidDelta(format!(
                    "row {} has {} entries, expected {}",
                    k + 1,
                    row.len(),
                    d - k
                )));
            }
            for v in row.iter_mut() {
                if !v.is_finite() || *v < -ROW_SUM_TOL {
                    return Err(Error::InvalidDelta(format!(
                        "negative entry {v} in row {}",
                        k + 1
                    )));
                }
                *v = v.max(0.0);
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidDelta(format!("row {} sums to {sum}", k + 1)));
            }
        }
        Ok(Self { rows })
    }

    /// Rows concatenated in order: `δ_11..δ_1d, δ_22..δ_2d, …`.
    pub fn from_flat(d: usize, values: &[f64]) -> Result<Self> {
        if values.len() != d * (d + 1) / 2 {
            return Err(Error::InvalidDelta(format!(
                "{} values do not fill a {d}-row triangle",
                values.len()
            )));
        }
        let mut rows = Vec::with_capacity(d);
        let mut at = 0;
        for k in 0..d {
            rows.push(values[at..at + d - k].to_vec());
            at += d - k;
        }
        Self::from_rows(rows)
    }

    /// `δ_kd = 1`: Alice's first measurement is trivial (`M_d = I`).
    pub fn trivial(d: usize) -> Self {
        let rows = (0..d).map(|k| {
            let mut row = vec![0.0; d - k];
            row[d - k - 1] = 1.0;
            row
        });
        Self {
            rows: rows.collect(),
        }
    }

    /// `δ_ki = 1/(d - k + 1)` (1-based `k`).
    pub fn uniform(d: usize) -> Self {
        Self {
            rows: (0..d).map(|k| vec![1.0 / (d - k) as f64; d - k]).collect(),
        }
    }

    /// Two-qubit parameterization `δ_11 = δ`, `δ_12 = 1 - δ`, `δ_22 = 1`.
    pub fn qubit(delta: f64) -> Result<Self> {
        Self::from_rows(vec![vec![delta, 1.0 - delta], vec![1.0]])
    }

    pub fn d(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `δ_ki` with 0-based `k`, `i`; zero when `k > i`.
    pub fn get(&self, k: usize, i: usize) -> f64 {
        if k > i {
            0.0
        } else {
            self.rows[k][i - k]
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }

    /// `M_i = Σ_{k≤i} δ_ki |k⟩⟨k|` for `i = 1..d`.
    pub fn alice_povm(&self) -> Vec<Operator> {
        let d = self.d();
        (0..d)
            .map(|i| Operator::diagonal(&(0..d).map(|k| self.get(k, i)).collect::<Vec<_>>()))
            .collect()
    }
}

/// What happens after Alice announces one outcome.
#[derive(Clone, Debug)]
pub struct Branch {
    /// Index `i` of Alice's outcome.
    pub outcome: usize,
    pub alice_element: Operator,
    /// Bob's accepting basis `{ξ_j}`; empty when the branch always rejects.
    pub bob_basis: Vec<Vector>,
    /// Alice's final projectors `Π_ij` onto the support of `σ_A^{ij}`.
    pub final_projectors: Vec<Operator>,
}

#[derive(Clone, Debug)]
pub struct TwoWayProtocol {
    spectrum: SchmidtSpectrum,
    delta: Option<DeltaMatrix>,
    branches: Vec<Branch>,
}

/// Deviations measured by [`TwoWayProtocol::check`].
#[derive(Clone, Copy, Debug)]
pub struct ProtocolCheck {
    pub alice_completeness: f64,
    pub bob_orthonormality: f64,
    pub bob_unbiasedness: f64,
}

impl ProtocolCheck {
    pub fn passed(&self) -> bool {
        self.alice_completeness <= 1e-10
            && self.bob_orthonormality <= DERIVED_TOL
            && self.bob_unbiasedness <= DERIVED_TOL
    }
}

impl TwoWayProtocol {
    /// The protocol that accepts every input (`T = I`).
    pub fn accept_all(spectrum: SchmidtSpectrum) -> Self {
        let d = spectrum.len();
        let basis: Vec<Vector> = (0..d).map(|k| Vector::basis(d, k)).collect();
        let branch = Branch {
            outcome: 0,
            alice_element: Operator::identity(d),
            final_projectors: vec![Operator::identity(d); d],
            bob_basis: basis,
        };
        Self {
            spectrum,
            delta: None,
            branches: vec![branch],
        }
    }

    pub fn spectrum(&self) -> &SchmidtSpectrum {
        &self.spectrum
    }

    pub fn delta(&self) -> Option<&DeltaMatrix> {
        self.delta.as_ref()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn d(&self) -> usize {
        self.spectrum.len()
    }

    pub fn element(&self) -> Operator {
        let d = self.d();
        let mut t = Operator::zeros(d * d);
        for b in &self.branches {
            let root = b.alice_element.sqrt_psd().expect("POVM elements are PSD");
            for (xi, pi) in b.bob_basis.iter().zip(&b.final_projectors) {
                let alice = &(&root * pi) * &root;
                t += &tensor(&alice, &Operator::projector(xi));
            }
        }
        t
    }

    pub fn check(&self) -> ProtocolCheck {
        let d = self.d();
        let mut total = Operator::zeros(d);
        let mut ortho: f64 = 0.0;
        let mut unbiased: f64 = 0.0;
        for b in &self.branches {
            total += &b.alice_element;
            for (j, x) in b.bob_basis.iter().enumerate() {
                for (l, y) in b.bob_basis.iter().enumerate() {
                    let expected = if j == l { 1.0 } else { 0.0 };
                    ortho = ortho.max((x.inner(y) - c(expected)).norm());
                }
            }
            if let Ok(omega) = bob_conditional_state(&self.spectrum, &b.alice_element) {
                let r = b.bob_basis.len() as f64;
                for x in &b.bob_basis {
                    unbiased = unbiased.max((omega.expectation(x).re - 1.0 / r).abs());
                }
            }
        }
        ProtocolCheck {
            alice_completeness: total.max_abs_diff(&Operator::identity(d)),
            bob_orthonormality: ortho,
            bob_unbiasedness: unbiased,
        }
    }
}

fn sqrt_rho(s: &SchmidtSpectrum) -> Operator {
    Operator::diagonal(&s.lambdas().iter().map(|v| v.sqrt()).collect::<Vec<_>>())
}

/// `ω_B = √ρ M^T √ρ / Tr(...)`, Bob's state after Alice's outcome `M`.
pub fn bob_conditional_state(s: &SchmidtSpectrum, m: &Operator) -> Result<Operator> {
    let root = sqrt_rho(s);
    let un = &(&root * &m.transpose()) * &root;
    let p = un.trace_re();
    if p <= ZERO_BRANCH_TOL {
        return Err(Error::ZeroProbability);
    }
    Ok(un.scale(1.0 / p).hermitian_part())
}

/// Alice's conditional state after outcomes `M` (hers) and `N` (Bob's):
/// `√M √ρ_A N^T √ρ_A √M / Tr(M √ρ_A N^T √ρ_A)`, transpose in the Schmidt basis.
pub fn sigma_a(s: &SchmidtSpectrum, m: &Operator, n: &Operator) -> Result<Operator> {
    let d = s.len();
    if m.dim() != d || n.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: m.dim().max(n.dim()),
        });
    }
    let root = sqrt_rho(s);
    let inner = &(&root * &n.transpose()) * &root;
    let normalizer = m.trace_product(&inner).re;
    if normalizer <= ZERO_BRANCH_TOL {
        return Err(Error::ZeroProbability);
    }
    let root_m = m.sqrt_psd()?;
    let sigma = &(&root_m * &inner) * &root_m;
    Ok(sigma.scale(1.0 / normalizer).hermitian_part())
}

/// Fourier basis `ξ_j = r^{-1/2} Σ_k e^{2πijk/r} η_k` over the eigenvectors
/// `η_k` of `ω` with nonzero eigenvalue; each satisfies `⟨ξ_j|ω|ξ_j⟩ = 1/r`.
pub fn build_mub_basis(omega: &Operator, r: usize) -> Result<Vec<Vector>> {
    let rank = numerical_rank(omega, None)?;
    if rank != r {
        return Err(Error::RankMismatch {
            expected: r,
            found: rank,
        });
    }
    let eig = eig_hermitian(omega)?;
    let eta = &eig.vectors[..r];
    let norm = c(1.0 / (r as f64).sqrt());
    let basis = (0..r)
        .map(|j| {
            let mut xi = Vector::zeros(omega.dim());
            for (k, e) in eta.iter().enumerate() {
                let phase = 2.0 * PI * ((j * k) % r) as f64 / r as f64;
                xi = &xi + &e.scale(C64::from_polar(1.0, phase));
            }
            xi.scale(norm)
        })
        .collect();
    Ok(basis)
}

/// Builds the protocol for `δ` and its accepting element `T`.
pub fn build_two_way_t(
    s: &SchmidtSpectrum,
    delta: &DeltaMatrix,
) -> Result<(Operator, TwoWayProtocol)> {
    let d = s.len();
    if delta.d() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: delta.d(),
        });
    }
    let mut branches = Vec::new();
    for (i, m) in delta.alice_povm().into_iter().enumerate() {
        if m.max_abs() == 0.0 {
            continue;
        }
        let mut branch = Branch {
            outcome: i,
            alice_element: m,
            bob_basis: vec![],
            final_projectors: vec![],
        };
        // a branch |Ψ⟩ never reaches rejects unconditionally
        if let Ok(omega) = bob_conditional_state(s, &branch.alice_element) {
            let r = numerical_rank(&omega, None)?;
            for xi in build_mub_basis(&omega, r)? {
                let sigma = sigma_a(s, &branch.alice_element, &Operator::projector(&xi))?;
                branch
                    .final_projectors
                    .push(support_projection(&sigma, None)?);
                branch.bob_basis.push(xi);
            }
        }
        branches.push(branch);
    }
    let protocol = TwoWayProtocol {
        spectrum: s.clone(),
        delta: Some(delta.clone()),
        branches,
    };
    Ok((protocol.element(), protocol))
}

/// Sums `w_i · N_i / D_i` with `N_i = Σ_k λ_k δ_ki²`, `D_i = Σ_k λ_k δ_ki`
/// and `0/0 = 0`.
fn weighted_ratio_sum(lambdas: &[f64], delta: &DeltaMatrix, weight: impl Fn(usize) -> f64) -> f64 {
    let d = delta.d();
    (0..d)
        .map(|i| {
            let (mut num, mut den) = (0.0, 0.0);
            for (k, &l) in lambdas.iter().enumerate().take(i + 1) {
                let v = delta.get(k, i);
                num += l * v * v;
                den += l * v;
            }
            if den < ZERO_BRANCH_TOL {
                0.0
            } else {
                weight(i) * num / den
            }
        })
        .sum()
}

/// `Σ_i i · (Σ_k λ_k δ_ki²) / (Σ_k λ_k δ_ki)`, an upper bound on `Tr T`.
pub fn trace_t_closed_form(s: &SchmidtSpectrum, delta: &DeltaMatrix) -> Result<f64> {
    if delta.d() != s.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            found: delta.d(),
        });
    }
    Ok(weighted_ratio_sum(s.lambdas(), delta, |i| (i + 1) as f64))
}

/// The exact `Tr T` of [`build_two_way_t`]: as [`trace_t_closed_form`]
/// with the weight `i` replaced by `rank ω_B = #{k ≤ i : λ_k δ_ki > 0}`.
/// The two agree whenever every `λ_k δ_ki` with `k ≤ i` is positive.
pub fn trace_t_rank_weighted(s: &SchmidtSpectrum, delta: &DeltaMatrix) -> Result<f64> {
    if delta.d() != s.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            found: delta.d(),
        });
    }
    let l = s.lambdas();
    Ok(weighted_ratio_sum(l, delta, |i| {
        let max = (0..=i).map(|k| l[k] * delta.get(k, i)).fold(0.0, f64::max);
        let cutoff = crate::operators::default_rank_tol(l.len()) * max;
        (0..=i).filter(|&k| l[k] * delta.get(k, i) > cutoff).count() as f64
    }))
}

/// Which state is fed to the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Psi,
    Mixed,
}

/// Empirical acceptance rate with a Wilson 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimulationResult {
    pub samples: u64,
    pub accepted: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Two-sided 97.5% standard normal quantile.
const Z95: f64 = 1.959963984540054;
const CHUNK: u64 = 4096;

impl SimulationResult {
    fn new(samples: u64, accepted: u64) -> Self {
        let n = samples as f64;
        let p = accepted as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Self {
            samples,
            accepted,
            rate: p,
            ci_low: centre - half,
            ci_high: centre + half,
        }
    }

    /// The Wilson interval's standard error (half-width over `z`).
    pub fn sigma(&self) -> f64 {
        (self.ci_high - self.ci_low) / (2.0 * Z95)
    }

    pub fn within_sigmas(&self, expected: f64, k: f64) -> bool {
        (self.rate - expected).abs() <= k * self.sigma()
    }
}

/// Per-branch data in coefficient-matrix form for fast sampling.
struct SamplerBranch {
    root_m: Operator,
    bob_conj: Vec<Vector>,
    projectors: Vec<Operator>,
}

/// Draws an index from unnormalized weights; the last index absorbs rounding.
fn draw(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (idx, w) in weights.iter().enumerate() {
        if u < *w {
            return idx;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// One pass through the cascade for the state with coefficient matrix
/// `coef` (`|ψ⟩ = Σ coef_ab |a⟩|b⟩`). Outcomes whose probability is below
/// `CONSTRUCTION_TOL` are treated as impossible.
fn run_once(branches: &[SamplerBranch], coef: &Operator, rng: &mut ChaCha8Rng) -> bool {
    let clean = |w: f64| if w < CONSTRUCTION_TOL { 0.0 } else { w };
    let after_alice: Vec<Operator> = branches.iter().map(|b| &b.root_m * coef).collect();
    let weights: Vec<f64> = after_alice
        .iter()
        .map(|m| clean(m.matrix().norm_squared()))
        .collect();
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        return false;
    }
    let i = draw(&weights, rng);
    let branch = &branches[i];
    let state = &after_alice[i];
    let norm_a = weights[i];

    // Bob's outcome j leaves Alice with coef · conj(ξ_j)
    let steered: Vec<Vector> = branch.bob_conj.iter().map(|x| state.apply(x)).collect();
    let mut bob_weights: Vec<f64> = steered
        .iter()
        .map(|v| clean(v.norm_sqr() / norm_a))
        .collect();
    let accepted_mass: f64 = bob_weights.iter().sum();
    bob_weights.push(clean(1.0 - accepted_mass));
    let j = draw(&bob_weights, rng);
    if j == steered.len() {
        return false;
    }

    let phi = &steered[j];
    let stay = branch.projectors[j].expectation(phi).re / phi.norm_sqr();
    let leave = clean(1.0 - stay);
    draw(&[clean(stay), leave], rng) == 0
}

/// Samples the protocol `n` times on `|Ψ⟩` or on `I/D`, deterministic in
/// `(seed, n)`. Chunks of samples use independent ChaCha streams and run
/// in parallel.
pub fn simulate_protocol(
    p: &TwoWayProtocol,
    source: Source,
    n: u64,
    seed: u64,
) -> Result<SimulationResult> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    let d = p.d();
    let branches: Vec<SamplerBranch> = p
        .branches()
        .iter()
        .map(|b| -> Result<SamplerBranch> {
            Ok(SamplerBranch {
                root_m: b.alice_element.sqrt_psd()?,
                bob_conj: b.bob_basis.iter().map(Vector::conj).collect(),
                projectors: b.final_projectors.clone(),
            })
        })
        .collect::<Result<_>>()?;
    let psi_coef = sqrt_rho(p.spectrum());

    let chunks = n.div_ceil(CHUNK);
    let accepted: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let size = CHUNK.min(n - chunk * CHUNK);
            let mut hits = 0u64;
            for _ in 0..size {
                let coef = match source {
                    Source::Psi => psi_coef.clone(),
                    Source::Mixed => {
                        let a = rng.random_range(0..d);
                        let b = rng.random_range(0..d);
                        Operator::outer(&Vector::basis(d, a), &Vector::basis(d, b))
                    }
                };
                hits += u64::from(run_once(&branches, &coef, &mut rng));
            }
            hits
        })
        .sum();
    Ok(SimulationResult::new(n, accepted))
}
