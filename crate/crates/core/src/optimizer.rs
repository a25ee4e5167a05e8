//! Minimization of `Σ_i i · (Σ_k λ_k δ_ki²) / (Σ_k λ_k δ_ki)` over the
//! feasible `δ` (a product of simplices, one per row `k` over `i ≥ k`).
//!
//! The main method is multi-start projected gradient with Armijo
//! backtracking. The objective is not known to be convex, so results are
//! cross-checked against the two-qubit closed form and an exhaustive grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::SchmidtSpectrum;
use crate::two_way::{trace_t_closed_form, DeltaMatrix, ZERO_BRANCH_TOL};

/// Qubit results must match the closed form this closely.
const ANALYTIC_TOL: f64 = 1e-6;
const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// When set, also run the grid oracle at this spacing and keep the
    /// better of the two.
    pub grid_step: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 16,
            tol: 1e-9,
            max_iters: 10_000,
            seed: 0,
            grid_step: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Effective rank 1, nothing to optimize.
    Trivial,
    ProjectedGradient,
    Analytic,
    Grid,
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizationResult {
    pub best_delta: DeltaMatrix,
    pub beta_value: f64,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: Vec<String>,
}

/// Objective and gradient on the flattened effective problem.
struct Objective<'a> {
    lambdas: &'a [f64],
    /// `offsets[k]` is the flat index of `δ_kk`.
    offsets: Vec<usize>,
}

impl<'a> Objective<'a> {
    fn new(lambdas: &'a [f64]) -> Self {
        let d = lambdas.len();
        let mut offsets = Vec::with_capacity(d);
        let mut at = 0;
        for k in 0..d {
            offsets.push(at);
            at += d - k;
        }
        Self { lambdas, offsets }
    }

    fn d(&self) -> usize {
        self.lambdas.len()
    }

    fn len(&self) -> usize {
        let d = self.d();
        d * (d + 1) / 2
    }

    fn idx(&self, k: usize, i: usize) -> usize {
        self.offsets[k] + i - k
    }

    fn sums(&self, x: &[f64], i: usize) -> (f64, f64) {
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..=i {
            let v = x[self.idx(k, i)];
            num += self.lambdas[k] * v * v;
            den += self.lambdas[k] * v;
        }
        (num, den)
    }

    fn value(&self, x: &[f64]) -> f64 {
        (0..self.d())
            .map(|i| {
                let (num, den) = self.sums(x, i);
                if den < ZERO_BRANCH_TOL {
                    0.0
                } else {
                    (i + 1) as f64 * num / den
                }
            })
            .sum()
    }

    /// `∂f/∂δ_ki = i · λ_k (2 δ_ki D_i - N_i) / D_i²`.
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.len()];
        for i in 0..self.d() {
            let (num, den) = self.sums(x, i);
            if den < ZERO_BRANCH_TOL {
                continue;
            }
            let w = (i + 1) as f64;
            for k in 0..=i {
                let at = self.idx(k, i);
                g[at] = w * self.lambdas[k] * (2.0 * x[at] * den - num) / (den * den);
            }
        }
        g
    }

    fn project(&self, x: &mut [f64]) {
        let d = self.d();
        for k in 0..d {
            let row = &mut x[self.offsets[k]..self.offsets[k] + d - k];
            project_simplex(row);
        }
    }

    fn to_delta(&self, x: &[f64]) -> DeltaMatrix {
        DeltaMatrix::from_flat(self.d(), x).expect("iterates stay feasible")
    }
}

/// Euclidean projection onto `{x ≥ 0, Σx = 1}` by sorting.
fn project_simplex(row: &mut [f64]) {
    let mut sorted = row.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    for v in row.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
    // absorb rounding so the row sums to one
    let sum: f64 = row.iter().sum();
    if let Some(top) = row.iter_mut().max_by(|a, b| a.total_cmp(b)) {
        *top += 1.0 - sum;
    }
    debug_assert!(row.iter().all(|&v| v >= 0.0));
    debug_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

struct Run {
    x: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// `‖x - P(x - ∇f(x))‖`, zero exactly at stationary points.
fn gradient_mapping(obj: &Objective, x: &[f64], g: &[f64]) -> f64 {
    let mut y: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - b).collect();
    obj.project(&mut y);
    distance(x, &y)
}

fn projected_gradient(obj: &Objective, start: Vec<f64>, tol: f64, max_iters: usize) -> Run {
    let mut x = start;
    obj.project(&mut x);
    let mut fx = obj.value(&x);
    let mut g = obj.gradient(&x);
    let mut step: f64 = 1.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;

    for iter in 0..max_iters {
        if gradient_mapping(obj, &x, &g) <= tol {
            return Run {
                x,
                value: fx,
                iterations: iter,
                converged: true,
            };
        }
        // Barzilai-Borwein guess for the initial trial step
        if let Some((px, pg)) = &prev {
            let s: Vec<f64> = x.iter().zip(px).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g.iter().zip(pg).map(|(a, b)| a - b).collect();
            let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
            let ss: f64 = s.iter().map(|a| a * a).sum();
            step = if sy > 0.0 {
                (ss / sy).clamp(1e-10, 1e10)
            } else {
                (step * 2.0).min(1e10)
            };
        }
        let mut accepted = None;
        let mut trial_step = step;
        while trial_step >= MIN_STEP {
            let mut trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - trial_step * b).collect();
            obj.project(&mut trial);
            let ft = obj.value(&trial);
            let decrease: f64 = g
                .iter()
                .zip(trial.iter().zip(&x))
                .map(|(gi, (t, xi))| gi * (t - xi))
                .sum();
            if ft <= fx + ARMIJO_C * decrease {
                accepted = Some((trial, ft));
                break;
            }
            trial_step *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            // no descent possible at machine precision
            return Run {
                x,
                value: fx,
                iterations: iter,
                converged: false,
            };
        };
        let gnext = obj.gradient(&next);
        prev = Some((
            std::mem::replace(&mut x, next),
            std::mem::replace(&mut g, gnext),
        ));
        fx = fnext;
        step = trial_step;
    }
    let converged = gradient_mapping(obj, &x, &g) <= tol;
    Run {
        x,
        value: fx,
        iterations: max_iters,
        converged,
    }
}

fn start_point(obj: &Objective, index: usize, seed: u64) -> Vec<f64> {
    let d = obj.d();
    let mut x = vec![0.0; obj.len()];
    if index == 0 {
        for k in 0..d {
            for i in k..d {
                x[obj.idx(k, i)] = 1.0 / (d - k) as f64;
            }
        }
        return x;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    for k in 0..d {
        let draws: Vec<f64> = (k..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = draws.iter().sum();
        for (i, v) in (k..d).zip(draws) {
            x[obj.idx(k, i)] = v / total;
        }
    }
    x
}

/// Lifts a `δ` on the nonzero coefficients to the full spectrum. Rows of
/// zero coefficients put all weight on the last outcome and the extra
/// outcomes are never selected by the retained rows.
fn embed_delta(effective: &DeltaMatrix, d: usize) -> DeltaMatrix {
    let r = effective.d();
    let rows = (0..d)
        .map(|k| {
            let mut row = vec![0.0; d - k];
            if k < r {
                row[..r - k].copy_from_slice(&effective.rows()[k]);
            } else {
                row[d - k - 1] = 1.0;
            }
            row
        })
        .collect();
    DeltaMatrix::from_rows(rows).expect("embedding keeps rows stochastic")
}

/// `β̃_↔ = min_δ Σ_i i · N_i/D_i / D`, an upper bound on the two-way LOCC value.
pub fn beta_two_way_upper(
    s: &SchmidtSpectrum,
    dim: usize,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    if config.starts == 0 {
        return Err(Error::InvalidArgument(
            "at least one start is required".into(),
        ));
    }
    let effective = s.effective();
    let lambdas = effective.lambdas();
    let d_eff = lambdas.len();
    let mut result = if d_eff == 1 {
        OptimizationResult {
            best_delta: DeltaMatrix::trivial(1),
            beta_value: 0.0,
            method: Method::Trivial,
            iterations: 0,
            converged: true,
            diagnostics: vec![],
        }
    } else {
        let obj = Objective::new(lambdas);
        let runs: Vec<Run> = (0..config.starts)
            .into_par_iter()
            .map(|idx| {
                projected_gradient(
                    &obj,
                    start_point(&obj, idx, config.seed),
                    config.tol,
                    config.max_iters,
                )
            })
            .collect();
        // lowest value wins, ties go to the earliest start
        let best = runs
            .iter()
            .enumerate()
            .min_by(|(ia, a), (ib, b)| a.value.total_cmp(&b.value).then(ia.cmp(ib)))
            .map(|(_, r)| r)
            .expect("at least one start");
        OptimizationResult {
            best_delta: obj.to_delta(&best.x),
            beta_value: 0.0,
            method: Method::ProjectedGradient,
            iterations: runs.iter().map(|r| r.iterations).sum(),
            converged: best.converged,
            diagnostics: vec![],
        }
    };

    // δ_kd = 1 reproduces the one-way value, so never return anything worse
    let trivial = DeltaMatrix::trivial(d_eff);
    if trace_t_closed_form(&effective, &trivial)?
        <= trace_t_closed_form(&effective, &result.best_delta)?
    {
        result.best_delta = trivial;
        result.method = Method::Trivial;
    }

    if let Some(step) = config.grid_step {
        let grid = grid_search(&effective, step)?;
        let current = trace_t_closed_form(&effective, &result.best_delta)?;
        if grid.1 < current {
            result.diagnostics.push(format!(
                "grid point improved on projected gradient by {:e}",
                current - grid.1
            ));
            result.best_delta = grid.0;
            result.method = Method::Grid;
        }
    }

    result.best_delta = embed_delta(&result.best_delta, s.len());
    result.beta_value = trace_t_closed_form(s, &result.best_delta)? / dim as f64;

    if s.len() == 2 {
        let (analytic, _) = beta_two_way_qubit_analytic(s.lambdas()[1])?;
        let numeric = result.beta_value * dim as f64 / 4.0;
        if (numeric - analytic).abs() > ANALYTIC_TOL {
            result.diagnostics.push(format!(
                "qubit closed form mismatch: numeric {numeric:.12}, analytic {analytic:.12}"
            ));
        }
    }
    Ok(result)
}

/// Two-qubit closed form `β̃_↔ = 1/2 - (1 - √(2λ))² / (4(1 - λ))` for the
/// smaller Schmidt coefficient `λ ∈ [0, 1/2]`, with the minimizer
/// `δ* = (1 - √(2λ)) / (1 - λ)` clamped to `[0, 1]`.
pub fn beta_two_way_qubit_analytic(lambda: f64) -> Result<(f64, f64)> {
    if !(0.0..=0.5).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "λ = {lambda} is outside [0, 1/2]"
        )));
    }
    let gap = 1.0 - (2.0 * lambda).sqrt();
    let beta = 0.5 - gap * gap / (4.0 * (1.0 - lambda));
    let delta = (gap / (1.0 - lambda)).clamp(0.0, 1.0);
    Ok((beta, delta))
}

/// All compositions of `n` into `parts` nonnegative parts.
fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|first| {
            compositions(n - first, parts - 1)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

/// Exhaustive search on the effective spectrum; returns the minimizer and
/// the closed-form trace there.
fn grid_search(effective: &SchmidtSpectrum, step: f64) -> Result<(DeltaMatrix, f64, usize)> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grid step {step} must lie in (0, 1]"
        )));
    }
    let n = (1.0 / step - 1e-9).ceil().max(1.0) as usize;
    let lambdas = effective.lambdas();
    let obj = Objective::new(lambdas);
    let d = obj.d();
    let rows: Vec<Vec<Vec<usize>>> = (0..d).map(|k| compositions(n, d - k)).collect();

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut evaluated = 0usize;
    let mut choice = vec![0usize; d];
    let mut x = vec![0.0; obj.len()];
    loop {
        for k in 0..d {
            for (off, &units) in rows[k][choice[k]].iter().enumerate() {
                x[obj.offsets[k] + off] = units as f64 / n as f64;
            }
        }
        let v = obj.value(&x);
        evaluated += 1;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((x.clone(), v));
        }
        // odometer over row choices
        let mut k = 0;
        while k < d {
            choice[k] += 1;
            if choice[k] < rows[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == d {
            break;
        }
    }
    let (x, v) = best.expect("grid is nonempty");
    Ok((obj.to_delta(&x), v, evaluated))
}

/// Brute-force oracle: minimum over the grid with spacing `1/⌈1/step⌉`.
pub fn grid_oracle(s: &SchmidtSpectrum, dim: usize, step: f64) -> Result<OptimizationResult> {
    let effective = s.effective();
    let (delta, _, evaluated) = grid_search(&effective, step)?;
    let best_delta = embed_delta(&delta, s.len());
    let beta_value = trace_t_closed_form(s, &best_delta)? / dim as f64;
    Ok(OptimizationResult {
        best_delta,
        beta_value,
        method: Method::Grid,
        iterations: evaluated,
        converged: true,
        diagnostics: vec![],
    })
}
