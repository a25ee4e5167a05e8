//! Optimal separable discrimination of a pure state from `I/D`.
//!
//! For `|Ψ⟩ = Σ √λ_i |e_i f_i⟩` the optimal separable POVM element is
//!
//! ```text
//! T = |ψ̃⟩⟨ψ̃| + Σ_{i≠j} √(λ_i λ_j) |e_i f_j⟩⟨e_i f_j|,   |ψ̃⟩ = Σ √λ_i |e_i f_i⟩
//! ```
//!
//! obtained by twirling the product operator `T₀ = |a⟩⟨a| ⊗ |b⟩⟨b|`,
//! `|a⟩ = Σ λ_i^{1/4}|e_i⟩`, `|b⟩ = Σ λ_i^{1/4}|f_i⟩`, over the local phase
//! group `U_θ = (Σ e^{iθ_j}|e_j⟩⟨e_j|) ⊗ (Σ e^{-iθ_k}|f_k⟩⟨f_k|)`. The
//! complement `I - T` is the twirl of another explicit separable operator,
//! so both outcomes carry a constructive separability certificate.
//!
//! The group average equals the pinching onto the invariant subspace
//! spanned by `|e_j f_k⟩⟨e_j f_k|` (`j ≠ k`) and `|e_j f_j⟩⟨e_k f_k|`. On
//! product terms the same average is realized exactly by a finite
//! one-parameter subgroup `θ_j = 2π m c_j / N` whose exponents `c_j` form a
//! Sidon set, which keeps every averaged term in product form. Only the
//! indices a term is supported on need a phase, so the terms of the
//! complement, which each touch two indices, average over just three
//! group elements.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operators::{
    c, eig_hermitian, povm_element_check, tensor, Operator, Vector, C64, DERIVED_TOL, SPECTRAL_TOL,
};
use crate::state::{sqrt_trace_reduced, BipartiteState, SchmidtBases, SchmidtSpectrum};

/// One term `w · A ⊗ B` of a separable decomposition.
#[derive(Clone, Debug)]
pub struct ProductTerm {
    pub weight: f64,
    pub a: Operator,
    pub b: Operator,
}

/// `Σ_i w_i A_i ⊗ B_i` with `w_i ≥ 0`, `A_i, B_i ⪰ 0`.
#[derive(Clone, Debug)]
pub struct SeparableForm {
    dims: (usize, usize),
    terms: Vec<ProductTerm>,
}

impl SeparableForm {
    pub fn new(dims: (usize, usize)) -> Self {
        Self {
            dims,
            terms: Vec::new(),
        }
    }

    pub fn push(&mut self, weight: f64, a: Operator, b: Operator) -> Result<()> {
        if a.dim() != self.dims.0 {
            return Err(Error::DimensionMismatch {
                expected: self.dims.0,
                found: a.dim(),
            });
        }
        if b.dim() != self.dims.1 {
            return Err(Error::DimensionMismatch {
                expected: self.dims.1,
                found: b.dim(),
            });
        }
        if weight < 0.0 || !weight.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "term weight {weight} is negative"
            )));
        }
        self.terms.push(ProductTerm { weight, a, b });
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn assemble(&self) -> Operator {
        let mut out = Operator::zeros(self.dims.0 * self.dims.1);
        for term in &self.terms {
            out += &tensor(&term.a, &term.b).scale(term.weight);
        }
        out
    }

    /// Smallest eigenvalue over all local factors (≥ 0 up to rounding for
    /// a valid certificate).
    pub fn min_factor_eigenvalue(&self) -> Result<f64> {
        let mut worst = f64::INFINITY;
        for term in &self.terms {
            for op in [&term.a, &term.b] {
                let eig = eig_hermitian(op)?;
                worst = worst.min(eig.values.last().copied().unwrap_or(0.0));
            }
        }
        Ok(worst)
    }

    pub fn all_terms_psd(&self, tol: f64) -> bool {
        self.min_factor_eigenvalue().is_ok_and(|v| v >= -tol)
    }

    /// The twirl of every term, each expanded into product terms.
    pub fn twirled(&self, bases: &SchmidtBases) -> Result<SeparableForm> {
        check_complete_bases(bases, bases.len())?;
        if bases.dims() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.0,
                found: bases.dims().0,
            });
        }
        let mut out = SeparableForm::new(self.dims);
        for term in &self.terms {
            PhaseSubgroup::for_term(term, bases).twirl_product(term, bases, &mut out)?;
        }
        Ok(out)
    }
}

/// The finite subgroup `{θ_j(m) = 2π m c_j / N : m = 0..N}` of the phase
/// torus, with Sidon exponents `c_j` on the indices a term touches and
/// `θ_j = 0` elsewhere.
struct PhaseSubgroup {
    exponents: Vec<(usize, u64)>,
    order: u64,
}

impl PhaseSubgroup {
    /// Indices `j` where `⟨e_j|A|e_j⟩` or `⟨f_j|B|f_j⟩` is nonzero. For PSD
    /// factors this is where the term lives, so the average only needs
    /// phases there.
    fn for_term(term: &ProductTerm, bases: &SchmidtBases) -> Self {
        let support: Vec<usize> = (0..bases.len())
            .filter(|&j| {
                term.a.expectation(&bases.a[j]).re > 0.0 || term.b.expectation(&bases.b[j]).re > 0.0
            })
            .collect();
        let sidon = sidon_set(support.len());
        let order = 2 * sidon.last().copied().unwrap_or(0) + 1;
        Self {
            exponents: support.into_iter().zip(sidon).collect(),
            order,
        }
    }

    fn unitaries(&self, m: u64, bases: &SchmidtBases) -> (Operator, Operator) {
        let mut ua = Operator::identity(bases.dims().0);
        let mut ub = Operator::identity(bases.dims().1);
        for &(j, cj) in &self.exponents {
            let phi = 2.0 * PI * ((m * cj) % self.order) as f64 / self.order as f64;
            let shift = C64::from_polar(1.0, phi) - c(1.0);
            ua += &Operator::projector(&bases.a[j]).scale_complex(shift);
            ub += &Operator::projector(&bases.b[j]).scale_complex(shift.conj());
        }
        (ua, ub)
    }

    fn twirl_product(
        &self,
        term: &ProductTerm,
        bases: &SchmidtBases,
        out: &mut SeparableForm,
    ) -> Result<()> {
        if self.order == 1 {
            return out.push(term.weight, term.a.clone(), term.b.clone());
        }
        let w = term.weight / self.order as f64;
        for m in 0..self.order {
            let (ua, ub) = self.unitaries(m, bases);
            let a = &(&ua * &term.a) * &ua.adjoint();
            let b = &(&ub * &term.b) * &ub.adjoint();
            out.push(w, a.hermitian_part(), b.hermitian_part())?;
        }
        Ok(())
    }
}

/// Greedy B2 (Sidon) sequence starting at 0: all pairwise sums
/// `c_i + c_j` (`i ≤ j`) are distinct.
fn sidon_set(n: usize) -> Vec<u64> {
    let mut set: Vec<u64> = Vec::with_capacity(n);
    let mut sums = std::collections::HashSet::new();
    let mut candidate = 0u64;
    while set.len() < n {
        let fresh: Vec<u64> = set
            .iter()
            .map(|&x| x + candidate)
            .chain([2 * candidate])
            .collect();
        let distinct = {
            let mut seen = std::collections::HashSet::new();
            fresh.iter().all(|s| !sums.contains(s) && seen.insert(*s))
        };
        if distinct {
            sums.extend(fresh);
            set.push(candidate);
        }
        candidate += 1;
    }
    set
}

/// `T` with certificates for both `T` and `I - T`.
#[derive(Clone, Debug)]
pub struct SeparablePovmPair {
    pub t: Operator,
    pub t_form: SeparableForm,
    pub complement_form: SeparableForm,
    pub bases: SchmidtBases,
}

/// Deviations measured by [`SeparablePovmPair::check`].
#[derive(Clone, Debug)]
pub struct PairCheck {
    pub povm_element: bool,
    pub t_form_deviation: f64,
    pub complement_deviation: f64,
    pub min_factor_eigenvalue: f64,
}

impl PairCheck {
    pub fn passed(&self) -> bool {
        self.povm_element
            && self.t_form_deviation <= DERIVED_TOL
            && self.complement_deviation <= DERIVED_TOL
            && self.min_factor_eigenvalue >= -SPECTRAL_TOL
    }
}

impl SeparablePovmPair {
    pub fn dims(&self) -> (usize, usize) {
        self.bases.dims()
    }

    pub fn check(&self) -> Result<PairCheck> {
        let d = self.t.dim();
        let complement = &Operator::identity(d) - &self.t;
        let min_factor = self
            .t_form
            .min_factor_eigenvalue()?
            .min(self.complement_form.min_factor_eigenvalue()?);
        Ok(PairCheck {
            povm_element: povm_element_check(&self.t, SPECTRAL_TOL),
            t_form_deviation: self.t_form.assemble().max_abs_diff(&self.t),
            complement_deviation: self.complement_form.assemble().max_abs_diff(&complement),
            min_factor_eigenvalue: min_factor,
        })
    }
}

/// `β_sep(|Ψ⟩) = (Σ √λ_i)² / D`.
pub fn beta_sep_pure(s: &SchmidtSpectrum, dim: usize) -> f64 {
    s.sum_sqrt().powi(2) / dim as f64
}

/// Closed form of the optimal separable element in the given Schmidt bases.
pub fn optimal_separable_element(s: &SchmidtSpectrum, bases: &SchmidtBases) -> Operator {
    let l = s.lambdas();
    let (da, db) = bases.dims();
    let mut coherent = Vector::zeros(da * db);
    for (i, &li) in l.iter().enumerate() {
        coherent = &coherent + &bases.a[i].tensor(&bases.b[i]).scale(c(li.sqrt()));
    }
    let mut t = Operator::projector(&coherent);
    for (i, &li) in l.iter().enumerate() {
        for (j, &lj) in l.iter().enumerate() {
            if i != j {
                let w = (li * lj).sqrt();
                t += &Operator::projector(&bases.a[i].tensor(&bases.b[j])).scale(w);
            }
        }
    }
    t
}

/// `T₀ = |a⟩⟨a| ⊗ |b⟩⟨b|` with `|a⟩ = Σ λ^{1/4}|e⟩`, `|b⟩ = Σ λ^{1/4}|f⟩`.
pub fn seed_product_term(s: &SchmidtSpectrum, bases: &SchmidtBases) -> ProductTerm {
    let (da, db) = bases.dims();
    let mut a = Vector::zeros(da);
    let mut b = Vector::zeros(db);
    for (i, &li) in s.lambdas().iter().enumerate() {
        let q = c(li.powf(0.25));
        a = &a + &bases.a[i].scale(q);
        b = &b + &bases.b[i].scale(q);
    }
    ProductTerm {
        weight: 1.0,
        a: Operator::projector(&a),
        b: Operator::projector(&b),
    }
}

/// Product terms of `T̄₀ = P + Q`, whose twirl is `I - T`:
///
/// * `P = ½ Σ_{i≠j} |ā_ij⟩⟨ā_ij| ⊗ |b̄_ij⟩⟨b̄_ij|` with
///   `|ā_ij⟩ = λ_j^{1/4}|e_i⟩ - λ_i^{1/4}|e_j⟩`,
///   `|b̄_ij⟩ = λ_j^{1/4}|f_i⟩ + λ_i^{1/4}|f_j⟩`;
/// * `Q = Σ_{i≠j} (Σ_{k≠i,j} λ_k + (√λ_i - √λ_j)²) |e_i f_j⟩⟨e_i f_j|`.
pub fn complement_seed(
    s: &SchmidtSpectrum,
    bases: &SchmidtBases,
) -> (SeparableForm, SeparableForm) {
    let l = s.lambdas();
    let total: f64 = l.iter().sum();
    let mut p = SeparableForm::new(bases.dims());
    let mut q = SeparableForm::new(bases.dims());
    for i in 0..l.len() {
        for j in 0..l.len() {
            if i == j {
                continue;
            }
            let (qi, qj) = (c(l[i].powf(0.25)), c(l[j].powf(0.25)));
            let a_bar = &bases.a[i].scale(qj) - &bases.a[j].scale(qi);
            let b_bar = &bases.b[i].scale(qj) + &bases.b[j].scale(qi);
            p.push(
                0.5,
                Operator::projector(&a_bar),
                Operator::projector(&b_bar),
            )
            .expect("dimensions match bases");

            let others = total - l[i] - l[j];
            let w = (others + (l[i].sqrt() - l[j].sqrt()).powi(2)).max(0.0);
            q.push(
                w,
                Operator::projector(&bases.a[i]),
                Operator::projector(&bases.b[j]),
            )
            .expect("dimensions match bases");
        }
    }
    (p, q)
}

/// Builds the optimal separable POVM `{T, I - T}` in the computational
/// Schmidt basis of `C^d ⊗ C^d`, `d = s.len()`.
pub fn build_optimal_separable_povm(s: &SchmidtSpectrum) -> SeparablePovmPair {
    build_optimal_separable_povm_in(s, SchmidtBases::computational(s.len()))
        .expect("computational bases match the spectrum")
}

/// Same as [`build_optimal_separable_povm`] for arbitrary complete
/// Schmidt bases.
pub fn build_optimal_separable_povm_in(
    s: &SchmidtSpectrum,
    bases: SchmidtBases,
) -> Result<SeparablePovmPair> {
    check_complete_bases(&bases, s.len())?;
    let t = optimal_separable_element(s, &bases);

    let mut seed = SeparableForm::new(bases.dims());
    let t0 = seed_product_term(s, &bases);
    seed.push(t0.weight, t0.a, t0.b)?;
    let t_form = seed.twirled(&bases)?;

    let (p, q) = complement_seed(s, &bases);
    let mut complement_form = p.twirled(&bases)?;
    // Q lies in the invariant subspace, so its terms are kept verbatim
    for term in q.terms {
        complement_form.push(term.weight, term.a, term.b)?;
    }
    Ok(SeparablePovmPair {
        t,
        t_form,
        complement_form,
        bases,
    })
}

fn check_complete_bases(bases: &SchmidtBases, d: usize) -> Result<()> {
    let (da, db) = bases.dims();
    if bases.a.len() != d || bases.b.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bases.a.len(),
        });
    }
    if da != d || db != d {
        return Err(Error::InvalidArgument(format!(
            "twirling needs complete local bases: {d} vectors in dimensions {da}x{db}"
        )));
    }
    Ok(())
}

/// Exact average of `U_θ t U_θ†` over the phase torus: the pinching
/// `Σ_{j,k} (E_jj⊗F_jj) t (E_kk⊗F_kk) + Σ_{j≠k} (E_jj⊗F_kk) t (E_jj⊗F_kk)`.
pub fn twirl(t: &Operator, bases: &SchmidtBases) -> Result<Operator> {
    let d = bases.len();
    check_complete_bases(bases, d)?;
    if t.dim() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: t.dim(),
        });
    }
    // move to the product Schmidt basis |e_j f_k⟩, mask, move back
    let kets: Vec<Vector> = (0..d * d)
        .map(|idx| bases.a[idx / d].tensor(&bases.b[idx % d]))
        .collect();
    let mut out = Operator::zeros(d * d);
    for (r, ket_r) in kets.iter().enumerate() {
        let (j, k) = (r / d, r % d);
        for (col, ket_c) in kets.iter().enumerate() {
            let (jp, kp) = (col / d, col % d);
            let invariant = (j == k && jp == kp) || (j == jp && k == kp);
            if invariant {
                let entry = ket_r.inner(&t.apply(ket_c));
                if entry.norm() > 0.0 {
                    out += &Operator::outer(ket_r, ket_c).scale_complex(entry);
                }
            }
        }
    }
    Ok(out)
}

/// `‖twirl(T̄₀) - (I - T)‖_∞` (max entry) for the computational Schmidt basis.
pub fn verify_appendix_identity(s: &SchmidtSpectrum) -> f64 {
    let bases = SchmidtBases::computational(s.len());
    let (p, q) = complement_seed(s, &bases);
    let t_bar = &p.assemble() + &q.assemble();
    let twirled = twirl(&t_bar, &bases).expect("computational bases are complete");
    let t = optimal_separable_element(s, &bases);
    let complement = &Operator::identity(t.dim()) - &t;
    twirled.max_abs_diff(&complement)
}

/// Lower bound `β_sep(ρ) ≥ max{(Tr√ρ_A)², (Tr√ρ_B)²}/D`, tight for pure states.
pub fn sep_lower_bound_mixed(rho: &BipartiteState) -> Result<f64> {
    let (ta, tb) = sqrt_trace_reduced(rho)?;
    Ok(ta.max(tb) / rho.dim() as f64)
}

/// Upper bound on the size of a set perfectly distinguishable under class
/// `c`: `N ≤ D / mean(t_c)`.
pub fn distinguishable_set_bound(values: &[f64], dim: usize) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("t values"));
    }
    if let Some(bad) = values
        .iter()
        .find(|&&t| t.is_nan() || t < 1.0 - SPECTRAL_TOL)
    {
        return Err(Error::InvalidArgument(format!("t value {bad} is below 1")));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(dim as f64 / mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{state_from_spectrum, MaximallyCorrelatedState};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(text: &str) -> SchmidtSpectrum {
        SchmidtSpectrum::parse(text).unwrap()
    }

    #[test]
    fn sidon_sets_have_distinct_sums() {
        let set = sidon_set(8);
        assert_eq!(&set[..6], &[0, 1, 3, 7, 12, 20]);
        let mut sums = std::collections::HashSet::new();
        for i in 0..set.len() {
            for j in i..set.len() {
                assert!(sums.insert(set[i] + set[j]));
            }
        }
    }

    #[test]
    fn beta_sep_examples() {
        assert_abs_diff_eq!(beta_sep_pure(&spec("0.5,0.5"), 4), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_sep_pure(&spec("1.0"), 4), 0.25, epsilon = 1e-15);
        let l: f64 = 0.25;
        let chain = 0.25 + 0.5 * (l * (1.0 - l)).sqrt();
        let direct = (0.75f64.sqrt() + 0.5).powi(2) / 4.0;
        assert_abs_diff_eq!(chain, direct, epsilon = 1e-15);
        assert_abs_diff_eq!(
            beta_sep_pure(&spec("0.75,0.25"), 4),
            0.4665063509461097,
            epsilon = 1e-12
        );
    }

    #[test]
    fn product_state_povm() {
        let pair = build_optimal_separable_povm(&spec("1.0"));
        assert_eq!(pair.t, Operator::identity(1));
        assert!(pair.complement_form.assemble().max_abs() < 1e-15);

        let pair = build_optimal_separable_povm(&spec("1.0,0"));
        let expected = Operator::diagonal(&[1.0, 0.0, 0.0, 0.0]);
        assert!(pair.t.max_abs_diff(&expected) < 1e-15);
        let complement = &Operator::identity(4) - &expected;
        assert!(pair.complement_form.assemble().max_abs_diff(&complement) < 1e-12);
        assert!(pair.check().unwrap().passed());
    }

    #[test]
    fn maximally_entangled_povm_by_substitution() {
        let pair = build_optimal_separable_povm(&spec("0.5,0.5"));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = Vector::from_real(&[h, 0.0, 0.0, h]).unwrap();
        let mut expected = Operator::projector(&phi);
        expected += &Operator::diagonal(&[0.0, 0.5, 0.5, 0.0]);
        assert!(pair.t.max_abs_diff(&expected) < 1e-15);
        assert_abs_diff_eq!(pair.t.trace_re(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn qubit_povm_trace_and_acceptance() {
        let s = spec("0.75,0.25");
        let pair = build_optimal_separable_povm(&s);
        let psi = state_from_spectrum(&s);
        assert_abs_diff_eq!(pair.t.trace_re(), 1.8660254037844386, epsilon = 1e-10);
        assert_abs_diff_eq!(psi.expectation(&pair.t), 1.0, epsilon = 1e-10);
        assert!(povm_element_check(&pair.t, 1e-12));
        let check = pair.check().unwrap();
        assert!(check.passed(), "{check:?}");
    }

    #[test]
    fn twirl_examples() {
        let bases = SchmidtBases::computational(2);
        let id = twirl(&Operator::identity(4), &bases).unwrap();
        assert!(id.max_abs_diff(&Operator::identity(4)) < 1e-15);

        // |e_1 f_2⟩⟨e_2 f_1|
        let off = Operator::outer(&Vector::basis(4, 1), &Vector::basis(4, 2));
        assert!(twirl(&off, &bases).unwrap().max_abs() < 1e-15);

        let s = spec("0.75,0.25");
        let t0 = seed_product_term(&s, &bases);
        let twirled = twirl(&tensor(&t0.a, &t0.b), &bases).unwrap();
        let expected = optimal_separable_element(&s, &bases);
        assert!(twirled.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn twirl_is_idempotent_and_trace_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 2..=4 {
            let bases = SchmidtBases::computational(d);
            let entries: Vec<C64> = (0..d * d * d * d)
                .map(|_| {
                    C64::new(
                        rand::Rng::random::<f64>(&mut rng),
                        rand::Rng::random::<f64>(&mut rng),
                    )
                })
                .collect();
            let g = Operator::from_rows(d * d, &entries).unwrap();
            let t = &g * &g.adjoint();
            let once = twirl(&t, &bases).unwrap();
            let twice = twirl(&once, &bases).unwrap();
            assert!(once.max_abs_diff(&twice) < 1e-12);
            assert_abs_diff_eq!(once.trace_re(), t.trace_re(), epsilon = 1e-10);
            assert!(crate::operators::psd_check(&once, 1e-10));
        }
    }

    #[test]
    fn phase_subgroup_reproduces_pinching() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 2..=5 {
            let bases = SchmidtBases::computational(d);
            let rand_vec = |rng: &mut ChaCha8Rng| {
                let v: Vec<C64> = (0..d)
                    .map(|_| {
                        C64::new(
                            rand::Rng::random::<f64>(rng) - 0.5,
                            rand::Rng::random::<f64>(rng) - 0.5,
                        )
                    })
                    .collect();
                Vector::from_complex(v).unwrap()
            };
            let mut form = SeparableForm::new((d, d));
            let (x, y) = (rand_vec(&mut rng), rand_vec(&mut rng));
            form.push(1.0, Operator::projector(&x), Operator::projector(&y))
                .unwrap();
            let direct = twirl(&form.assemble(), &bases).unwrap();
            let via_subgroup = form.twirled(&bases).unwrap().assemble();
            assert!(direct.max_abs_diff(&via_subgroup) < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn complement_twirl_identity_examples() {
        assert!(verify_appendix_identity(&spec("0.5,0.5")) <= 1e-9);
        assert!(verify_appendix_identity(&spec("0.8,0.1,0.1")) <= 1e-9);
    }

    #[test]
    fn povm_in_rotated_schmidt_bases() {
        // |Ψ⟩ = √0.7 |+⟩|0⟩ + √0.3 |−⟩|1⟩
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = Vector::from_real(&[h, h]).unwrap();
        let minus = Vector::from_real(&[h, -h]).unwrap();
        let bases = SchmidtBases {
            a: vec![plus, minus],
            b: vec![Vector::basis(2, 0), Vector::basis(2, 1)],
        };
        let s = spec("0.7,0.3");
        let psi = &bases.a[0].tensor(&bases.b[0]).scale(c(0.7f64.sqrt()))
            + &bases.a[1].tensor(&bases.b[1]).scale(c(0.3f64.sqrt()));
        let pair = build_optimal_separable_povm_in(&s, bases).unwrap();
        assert_abs_diff_eq!(pair.t.expectation(&psi).re, 1.0, epsilon = 1e-10);
        assert!(pair.check().unwrap().passed());
    }

    #[test]
    fn mixed_lower_bound_examples() {
        let s = spec("0.75,0.25");
        let rho = state_from_spectrum(&s).to_density();
        assert_abs_diff_eq!(
            sep_lower_bound_mixed(&rho).unwrap(),
            beta_sep_pure(&s, 4),
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            sep_lower_bound_mixed(&rho).unwrap(),
            0.4665063509461097,
            epsilon = 1e-10
        );

        let mix = BipartiteState::maximally_mixed((2, 2));
        assert_abs_diff_eq!(sep_lower_bound_mixed(&mix).unwrap(), 0.5, epsilon = 1e-12);

        let mc =
            MaximallyCorrelatedState::with_computational_bases(Operator::diagonal(&[0.5, 0.5]))
                .unwrap();
        assert_abs_diff_eq!(
            sep_lower_bound_mixed(&mc.density()).unwrap(),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn distinguishable_set_examples() {
        assert_abs_diff_eq!(distinguishable_set_bound(&[1.0; 4], 4).unwrap(), 4.0);
        assert_abs_diff_eq!(distinguishable_set_bound(&[2.0, 2.0], 4).unwrap(), 2.0);
        assert_abs_diff_eq!(
            distinguishable_set_bound(&[1.0, 2.0, 1.0], 9).unwrap(),
            6.75
        );
        assert!(matches!(
            distinguishable_set_bound(&[], 4),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn beta_sep_is_symmetric_in_lambda() {
        let a = SchmidtSpectrum::new(vec![0.1, 0.6, 0.3]).unwrap();
        let b = SchmidtSpectrum::new(vec![0.3, 0.1, 0.6]).unwrap();
        assert_eq!(beta_sep_pure(&a, 9), beta_sep_pure(&b, 9));
    }
}
