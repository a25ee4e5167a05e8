//! Per-state reports, one-parameter family sweeps and the self-check suite
//! used by the command-line front end.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::one_way::{beta_one_way, build_one_way_test, OneWayBound};
use crate::operators::{eig_hermitian, numerical_rank, DERIVED_TOL, SPECTRAL_TOL};
use crate::optimizer::{beta_two_way_qubit_analytic, beta_two_way_upper, OptimizerConfig};
use crate::separable::{
    beta_sep_pure, build_optimal_separable_povm, sep_lower_bound_mixed, verify_appendix_identity,
};
use crate::state::{
    state_from_spectrum, BipartiteState, MaximallyCorrelatedState, SchmidtSpectrum,
};
use crate::two_way::{
    build_two_way_t, simulate_protocol, trace_t_closed_form, trace_t_rank_weighted, Source,
};

/// Tolerance for the chain `β_g ≤ β_sep ≤ β̃_↔ ≤ β_→`.
pub const ORDERING_TOL: f64 = 1e-9;

/// Flat summary of all bounds for one state.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub spectrum: Vec<f64>,
    #[serde(rename = "D")]
    pub dim: usize,
    pub beta_g: f64,
    pub beta_one_way: f64,
    pub beta_sep: f64,
    pub beta_two_way_upper: Option<f64>,
    pub delta_star: Vec<f64>,
    pub flags: Vec<String>,
}

impl BoundsReport {
    /// Report for the pure state with Schmidt coefficients `s` embedded in
    /// `C^dA ⊗ C^dB`.
    pub fn pure(
        s: &SchmidtSpectrum,
        dims: (usize, usize),
        config: &OptimizerConfig,
    ) -> Result<Self> {
        let room = dims.0.min(dims.1);
        if s.rank() > room {
            return Err(Error::RankMismatch {
                expected: room,
                found: s.rank(),
            });
        }
        let dim = dims.0 * dims.1;
        let two_way = beta_two_way_upper(s, dim, config)?;
        let mut flags = two_way.diagnostics.clone();
        if !two_way.converged {
            flags.push("optimizer-not-converged".into());
        }
        Ok(Self {
            spectrum: s.lambdas().to_vec(),
            dim,
            beta_g: 1.0 / dim as f64,
            beta_one_way: s.rank() as f64 / dim as f64,
            beta_sep: beta_sep_pure(s, dim),
            beta_two_way_upper: Some(two_way.beta_value),
            delta_star: two_way.best_delta.flat(),
            flags,
        })
    }

    /// Report for a general density operator. Only `β_g` is exact; the
    /// separable and one-way entries are lower bounds and no two-way
    /// protocol is optimized.
    pub fn mixed(rho: &BipartiteState) -> Result<Self> {
        let density = rho.density_operator();
        let dim = rho.dim();
        let rank = numerical_rank(&density, None)?;
        let OneWayBound {
            value: one_way,
            exact,
        } = beta_one_way(rho);
        let mut flags = vec!["lower-bound".to_string()];
        if exact {
            flags.clear();
        }
        let spectrum = eig_hermitian(&density)?
            .values
            .into_iter()
            .map(|v| v.max(0.0))
            .collect();
        Ok(Self {
            spectrum,
            dim,
            beta_g: rank as f64 / dim as f64,
            beta_one_way: one_way,
            beta_sep: sep_lower_bound_mixed(rho)?,
            beta_two_way_upper: None,
            delta_star: vec![],
            flags,
        })
    }

    /// Describes the first broken link of the ordering chain, if any. Only
    /// meaningful for exact (pure-state) reports.
    pub fn ordering_violation(&self) -> Option<String> {
        let two = self.beta_two_way_upper?;
        let chain = [
            ("beta_g", self.beta_g),
            ("beta_sep", self.beta_sep),
            ("beta_two_way_upper", two),
            ("beta_one_way", self.beta_one_way),
        ];
        chain
            .windows(2)
            .find(|w| w[0].1 > w[1].1 + ORDERING_TOL)
            .map(|w| format!("{} = {} exceeds {} = {}", w[0].0, w[0].1, w[1].0, w[1].1))
    }
}

/// `λ_k(t) = a_k + b_k t` on `[t_min, t_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    pub name: String,
    pub coefficients: Vec<(f64, f64)>,
    pub t_min: f64,
    pub t_max: f64,
}

const BUILTINS: &[(&str, &str)] = &[
    ("fig1", "1-t,t@0:1/2"),
    ("fig2", "1-2t,t,t@0:1/3"),
    ("fig3", "1-3t,2t,t@0:1/5"),
    ("fig4", "1-4t,3t,t@0:1/7"),
    ("fig5", "1-3t,t,t,t@0:1/4"),
    ("fig6", "1-9/2t,2t,3/2t,t@0:2/13"),
];

/// A number such as `3`, `0.25` or `9/2`.
fn parse_number(text: &str) -> Result<f64> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number '{text}'")))?;
            let d: f64 = d
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number '{text}'")))?;
            n / d
        }
        None => text
            .parse()
            .map_err(|_| Error::Parse(format!("bad number '{text}'")))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Parse(format!("'{text}' is not finite")))
    }
}

/// An affine term like `1-9/2t`, `-t`, `0.5+t` or `3/2t`.
fn parse_affine(text: &str) -> Result<(f64, f64)> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Parse("empty coefficient".into()));
    }
    let (mut a, mut b) = (0.0, 0.0);
    let mut start = 0;
    let bytes = compact.as_bytes();
    for end in 1..=bytes.len() {
        let at_boundary = end == bytes.len() || matches!(bytes[end], b'+' | b'-');
        if !at_boundary {
            continue;
        }
        let term = &compact[start..end];
        let (sign, body) = match term.as_bytes()[0] {
            b'-' => (-1.0, &term[1..]),
            b'+' => (1.0, &term[1..]),
            _ => (1.0, term),
        };
        match body.strip_suffix('t') {
            Some("") => b += sign,
            Some(coef) => b += sign * parse_number(coef.trim_end_matches('*'))?,
            None => a += sign * parse_number(body)?,
        }
        start = end;
    }
    Ok((a, b))
}

impl FamilySpec {
    /// A built-in name (`fig1` … `fig6`) or an expression
    /// `a1+b1 t, a2+b2 t, …@t_min:t_max`, e.g. `1-2t,t,t@0:1/3`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some((name, expr)) = BUILTINS.iter().find(|(n, _)| *n == text) {
            return Self::parse_expression(name, expr);
        }
        Self::parse_expression(text, text)
    }

    pub fn builtin_names() -> impl Iterator<Item = &'static str> {
        BUILTINS.iter().map(|(n, _)| *n)
    }

    fn parse_expression(name: &str, expr: &str) -> Result<Self> {
        let (coefs, range) = expr.split_once('@').ok_or_else(|| {
            Error::InvalidFamily(format!(
                "'{expr}' is neither a built-in nor 'coefficients@tmin:tmax'"
            ))
        })?;
        let (lo, hi) = range
            .split_once(':')
            .ok_or_else(|| Error::InvalidFamily(format!("range '{range}' is not 'tmin:tmax'")))?;
        let coefficients = coefs
            .split(',')
            .map(parse_affine)
            .collect::<Result<Vec<_>>>()?;
        let family = Self {
            name: name.to_string(),
            coefficients,
            t_min: parse_number(lo)?,
            t_max: parse_number(hi)?,
        };
        family.validate()?;
        Ok(family)
    }

    /// Checks that every `λ_k(t) ≥ -1e-12` and `Σ λ_k(t) = 1` on the range.
    /// Both are affine in `t`, so the endpoints suffice.
    pub fn validate(&self) -> Result<()> {
        if self.coefficients.is_empty() {
            return Err(Error::InvalidFamily("no coefficients".into()));
        }
        if self.t_min.partial_cmp(&self.t_max) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidFamily(format!(
                "empty range [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        for t in [self.t_min, self.t_max] {
            let values = self.raw_at(t);
            if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| **v < -1e-12) {
                return Err(Error::InvalidFamily(format!(
                    "coefficient {} is {v} at t = {t}",
                    k + 1
                )));
            }
            let sum: f64 = values.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidFamily(format!(
                    "coefficients sum to {sum} at t = {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.coefficients.len()
    }

    fn raw_at(&self, t: f64) -> Vec<f64> {
        self.coefficients.iter().map(|(a, b)| a + b * t).collect()
    }

    /// `λ(t)` with rounding negatives clamped and the sum renormalized.
    pub fn spectrum_at(&self, t: f64) -> Result<SchmidtSpectrum> {
        let raw: Vec<f64> = self
            .raw_at(t)
            .into_iter()
            .map(|v| if (-1e-12..0.0).contains(&v) { 0.0 } else { v })
            .collect();
        SchmidtSpectrum::new(raw)
    }

    /// `n` evenly spaced parameters including both endpoints.
    pub fn points(&self, n: usize) -> Vec<f64> {
        match n {
            0 => vec![],
            1 => vec![self.t_min],
            _ => (0..n)
                .map(|k| {
                    if k == n - 1 {
                        self.t_max
                    } else {
                        self.t_min + k as f64 * (self.t_max - self.t_min) / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub beta_g: f64,
    pub beta_one_way: f64,
    pub beta_sep: f64,
    pub beta_two_way_upper: f64,
}

/// Evaluates all bounds at `n` points of a family, in increasing `t`.
pub fn sweep(family: &FamilySpec, n: usize, config: &OptimizerConfig) -> Result<Vec<SweepRow>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "a sweep needs at least one point".into(),
        ));
    }
    let d = family.d();
    family
        .points(n)
        .into_par_iter()
        .map(|t| {
            let s = family.spectrum_at(t)?;
            let r = BoundsReport::pure(&s, (d, d), config)?;
            Ok(SweepRow {
                t,
                beta_g: r.beta_g,
                beta_one_way: r.beta_one_way,
                beta_sep: r.beta_sep,
                beta_two_way_upper: r
                    .beta_two_way_upper
                    .expect("pure reports carry the two-way bound"),
            })
        })
        .collect()
}

/// `%g`-style formatting with `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!(
            "{mantissa}e{}{:02}",
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        );
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const CSV_HEADER: &str = "t,beta_g,beta_one_way,beta_sep,beta_two_way_upper";

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        let fields = [
            r.t,
            r.beta_g,
            r.beta_one_way,
            r.beta_sep,
            r.beta_two_way_upper,
        ];
        let line: Vec<String> = fields.iter().map(|v| format_significant(*v, 9)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// One named verification with its measured deviation.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn at_most(name: &'static str, deviation: f64, tolerance: f64) -> Self {
        Self {
            name,
            deviation,
            tolerance,
            passed: deviation <= tolerance,
        }
    }
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<42} deviation {:.3e} (tol {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.deviation,
            self.tolerance
        )
    }
}

/// Builds every operator for the pure state `s` on `C^d ⊗ C^d` and checks
/// it: the separable POVM and both certificates, the twirl identity, the
/// two-way protocol at the optimized `δ` (operator against closed form and
/// a Monte Carlo run of `mc_samples` on each source), the one-way test and
/// the ordering of the four bounds.
pub fn verify(s: &SchmidtSpectrum, mc_samples: u64, seed: u64) -> Result<Vec<CheckOutcome>> {
    let d = s.len();
    let dim = d * d;
    let psi = state_from_spectrum(s);
    let mut out = Vec::new();

    let pair = build_optimal_separable_povm(s);
    let eig = eig_hermitian(&pair.t)?;
    let lo = eig.values.last().copied().unwrap_or(0.0);
    let hi = eig.values.first().copied().unwrap_or(0.0);
    out.push(CheckOutcome::at_most(
        "separable: 0 <= T <= I",
        (-lo).max(hi - 1.0).max(0.0),
        SPECTRAL_TOL,
    ));
    out.push(CheckOutcome::at_most(
        "separable: <Psi|T|Psi> = 1",
        (psi.expectation(&pair.t) - 1.0).abs(),
        SPECTRAL_TOL,
    ));
    out.push(CheckOutcome::at_most(
        "separable: Tr T = (sum sqrt lambda)^2",
        (pair.t.trace_re() - s.sum_sqrt().powi(2)).abs(),
        SPECTRAL_TOL,
    ));
    let cert = pair.check()?;
    out.push(CheckOutcome::at_most(
        "separable: product form of T",
        cert.t_form_deviation,
        DERIVED_TOL,
    ));
    out.push(CheckOutcome::at_most(
        "separable: product form of I - T",
        cert.complement_deviation,
        DERIVED_TOL,
    ));
    out.push(CheckOutcome::at_most(
        "separable: local factors PSD",
        (-cert.min_factor_eigenvalue).max(0.0),
        SPECTRAL_TOL,
    ));
    out.push(CheckOutcome::at_most(
        "separable: twirl of complement seed",
        verify_appendix_identity(s),
        DERIVED_TOL,
    ));

    let config = OptimizerConfig {
        seed,
        ..Default::default()
    };
    let report = BoundsReport::pure(s, (d, d), &config)?;
    let delta = crate::two_way::DeltaMatrix::from_flat(d, &report.delta_star)?;
    let (t, protocol) = build_two_way_t(s, &delta)?;
    let teig = eig_hermitian(&t)?;
    let tlo = teig.values.last().copied().unwrap_or(0.0);
    let thi = teig.values.first().copied().unwrap_or(0.0);
    out.push(CheckOutcome::at_most(
        "two-way: 0 <= T <= I",
        (-tlo).max(thi - 1.0).max(0.0),
        SPECTRAL_TOL,
    ));
    out.push(CheckOutcome::at_most(
        "two-way: <Psi|T|Psi> = 1",
        (psi.expectation(&t) - 1.0).abs(),
        DERIVED_TOL,
    ));
    let pc = protocol.check();
    out.push(CheckOutcome::at_most(
        "two-way: POVM and unbiased bases",
        pc.alice_completeness
            .max(pc.bob_orthonormality)
            .max(pc.bob_unbiasedness),
        DERIVED_TOL,
    ));
    let realized = t.trace_re();
    out.push(CheckOutcome::at_most(
        "two-way: Tr T matches closed form",
        (realized - trace_t_rank_weighted(s, &delta)?).abs(),
        DERIVED_TOL,
    ));
    out.push(CheckOutcome::at_most(
        "two-way: Tr T within reported bound",
        (realized - trace_t_closed_form(s, &delta)?).max(0.0),
        DERIVED_TOL,
    ));

    if mc_samples > 0 {
        let psi_run = simulate_protocol(&protocol, Source::Psi, mc_samples, seed)?;
        out.push(CheckOutcome::at_most(
            "monte carlo: type-1 acceptance = 1",
            1.0 - psi_run.rate,
            0.0,
        ));
        let mixed = simulate_protocol(&protocol, Source::Mixed, mc_samples, seed)?;
        out.push(CheckOutcome::at_most(
            "monte carlo: type-2 acceptance",
            (mixed.rate - realized / dim as f64).abs(),
            3.0 * mixed.sigma(),
        ));
    }

    let mc = MaximallyCorrelatedState::from_spectrum(s);
    let (_, one_way_t) = build_one_way_test(&mc);
    let one_way_dev = (psi.expectation(&one_way_t) - 1.0)
        .abs()
        .max((one_way_t.trace_re() - s.rank() as f64).abs());
    out.push(CheckOutcome::at_most(
        "one-way: test accepts, Tr T = rank",
        one_way_dev,
        SPECTRAL_TOL,
    ));

    let chain = [
        report.beta_g,
        report.beta_sep,
        realized / dim as f64,
        report.beta_two_way_upper.unwrap_or(0.0),
        report.beta_one_way,
    ];
    let ordering_gap = chain.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    out.push(CheckOutcome::at_most(
        "ordering of the four bounds",
        ordering_gap,
        ORDERING_TOL,
    ));

    if d == 2 {
        let (analytic, _) = beta_two_way_qubit_analytic(s.lambdas()[1])?;
        let gap = (report.beta_two_way_upper.unwrap_or(f64::NAN) - analytic).abs();
        out.push(CheckOutcome::at_most("two-qubit closed form", gap, 1e-6));
    }
    Ok(out)
}
