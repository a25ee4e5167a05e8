//! Bipartite states at the level of their Schmidt data.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::operators::{
    c, default_rank_tol, eig_hermitian, partial_trace, Operator, Side, Vector, C64, SPECTRAL_TOL,
};

/// Inputs whose coefficients sum to within this of 1 are renormalized.
pub const SPECTRUM_SUM_TOL: f64 = 1e-9;

/// Schmidt coefficients, sorted non-increasing and summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    lambdas: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Validates, renormalizes (when within [`SPECTRUM_SUM_TOL`] of 1) and
    /// sorts non-increasing. Ties keep their input order.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpectrum("no coefficients".into()));
        }
        let mut lambdas = Vec::with_capacity(values.len());
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidSpectrum(format!(
                    "coefficient {k} is not finite"
                )));
            }
            if v < -1e-12 {
                return Err(Error::InvalidSpectrum(format!(
                    "coefficient {k} is negative ({v})"
                )));
            }
            lambdas.push(v.max(0.0));
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > SPECTRUM_SUM_TOL {
            return Err(Error::InvalidSpectrum(format!(
                "coefficients sum to {sum}, expected 1 (tolerance {SPECTRUM_SUM_TOL:e})"
            )));
        }
        lambdas.iter_mut().for_each(|v| *v /= sum);
        lambdas.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { lambdas })
    }

    /// Parses comma-separated decimals such as `"0.75,0.25"`.
    pub fn parse(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("invalid Schmidt coefficient {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    /// Samples a spectrum uniformly from the probability simplex.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        assert!(d > 0);
        let raw: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let sum: f64 = raw.iter().sum();
        Self::new(raw.into_iter().map(|x| x / sum).collect()).expect("simplex sample is valid")
    }

    pub fn uniform(d: usize) -> Self {
        Self::new(vec![1.0 / d as f64; d]).expect("uniform spectrum is valid")
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Number of coefficients including zeros (the local dimension).
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Schmidt rank: the number of strictly positive coefficients.
    pub fn rank(&self) -> usize {
        self.lambdas.iter().filter(|&&v| v > 0.0).count()
    }

    /// The spectrum with zero coefficients removed.
    pub fn effective(&self) -> Self {
        Self {
            lambdas: self.lambdas.iter().copied().filter(|&v| v > 0.0).collect(),
        }
    }

    pub fn sum_sqrt(&self) -> f64 {
        self.lambdas.iter().map(|v| v.sqrt()).sum()
    }

    /// Global robustness of entanglement, `(Σ√λ)² - 1`.
    pub fn global_robustness(&self) -> f64 {
        self.sum_sqrt().powi(2) - 1.0
    }

    pub fn is_maximally_entangled(&self, tol: f64) -> bool {
        let r = self.rank() as f64;
        self.lambdas
            .iter()
            .filter(|&&v| v > 0.0)
            .all(|&v| (v - 1.0 / r).abs() <= tol)
    }
}

impl fmt::Display for SchmidtSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lambdas.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Local orthonormal bases `{|e_k⟩}`, `{|f_k⟩}` paired index by index.
#[derive(Clone, Debug)]
pub struct SchmidtBases {
    pub a: Vec<Vector>,
    pub b: Vec<Vector>,
}

impl SchmidtBases {
    pub fn computational(d: usize) -> Self {
        let basis: Vec<Vector> = (0..d).map(|k| Vector::basis(d, k)).collect();
        Self {
            a: basis.clone(),
            b: basis,
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (
            self.a.first().map_or(0, Vector::dim),
            self.b.first().map_or(0, Vector::dim),
        )
    }
}

#[derive(Clone, Debug)]
pub enum Representation {
    Pure(Vector),
    Density(Operator),
}

/// A state on `C^dA ⊗ C^dB`.
#[derive(Clone, Debug)]
pub struct BipartiteState {
    dims: (usize, usize),
    repr: Representation,
}

impl BipartiteState {
    pub fn pure(psi: Vector, dims: (usize, usize)) -> Result<Self> {
        if psi.dim() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch {
                expected: dims.0 * dims.1,
                found: psi.dim(),
            });
        }
        if !psi.is_normalized(SPECTRAL_TOL) {
            return Err(Error::InvalidArgument(format!(
                "state vector has norm {}",
                psi.norm()
            )));
        }
        Ok(Self {
            dims,
            repr: Representation::Pure(psi),
        })
    }

    pub fn density(rho: Operator, dims: (usize, usize)) -> Result<Self> {
        if rho.dim() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch {
                expected: dims.0 * dims.1,
                found: rho.dim(),
            });
        }
        let eig = eig_hermitian(&rho)?;
        if let Some(&min) = eig.values.last() {
            if min < -SPECTRAL_TOL {
                return Err(Error::NotPsd(min));
            }
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > SPECTRAL_TOL || tr.im.abs() > SPECTRAL_TOL {
            return Err(Error::InvalidArgument(format!(
                "density operator has trace {tr}"
            )));
        }
        Ok(Self {
            dims,
            repr: Representation::Density(rho),
        })
    }

    pub fn maximally_mixed(dims: (usize, usize)) -> Self {
        let d = dims.0 * dims.1;
        Self {
            dims,
            repr: Representation::Density(Operator::identity(d).scale(1.0 / d as f64)),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// Total dimension `D = dA · dB`.
    pub fn dim(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn as_pure(&self) -> Option<&Vector> {
        match &self.repr {
            Representation::Pure(v) => Some(v),
            Representation::Density(_) => None,
        }
    }

    pub fn density_operator(&self) -> Operator {
        match &self.repr {
            Representation::Pure(v) => Operator::projector(v),
            Representation::Density(rho) => rho.clone(),
        }
    }

    /// Converts a pure state to its projector; densities are returned as is.
    pub fn to_density(&self) -> Self {
        Self {
            dims: self.dims,
            repr: Representation::Density(self.density_operator()),
        }
    }

    pub fn reduced(&self, keep: Side) -> Operator {
        partial_trace(&self.density_operator(), self.dims, keep)
            .expect("dimensions validated at construction")
    }

    /// `Tr(ρ T)`.
    pub fn expectation(&self, t: &Operator) -> f64 {
        match &self.repr {
            Representation::Pure(v) => t.expectation(v).re,
            Representation::Density(rho) => rho.trace_product(t).re,
        }
    }
}

/// `Σ_k √λ_k |k⟩|k⟩` on `C^d ⊗ C^d`, `d = s.len()`.
pub fn state_from_spectrum(s: &SchmidtSpectrum) -> BipartiteState {
    let d = s.len();
    embed_spectrum(s, (d, d)).expect("square embedding always fits")
}

/// `Σ_k √λ_k |k⟩|k⟩` embedded in `C^dA ⊗ C^dB`.
pub fn embed_spectrum(s: &SchmidtSpectrum, dims: (usize, usize)) -> Result<BipartiteState> {
    let rank = s.rank();
    if rank > dims.0.min(dims.1) {
        return Err(Error::RankMismatch {
            expected: dims.0.min(dims.1),
            found: rank,
        });
    }
    let mut amps = vec![c(0.0); dims.0 * dims.1];
    for (k, &l) in s.lambdas().iter().take(rank).enumerate() {
        amps[k * dims.1 + k] = c(l.sqrt());
    }
    BipartiteState::pure(Vector::from_complex(amps)?, dims)
}

/// Schmidt decomposition via the singular values of the coefficient matrix.
/// Numerically zero coefficients are dropped.
pub fn schmidt_decompose(
    psi: &Vector,
    dims: (usize, usize),
) -> Result<(SchmidtSpectrum, SchmidtBases)> {
    let (da, db) = dims;
    if psi.dim() != da * db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: psi.dim(),
        });
    }
    if !psi.is_normalized(SPECTRAL_TOL) {
        return Err(Error::InvalidArgument(format!(
            "state vector has norm {}",
            psi.norm()
        )));
    }
    let coeffs = nalgebra::DMatrix::from_fn(da, db, |i, j| psi.get(i * db + j));
    let svd = coeffs.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^†");
    let sigma = &svd.singular_values;

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let smax = sigma[order[0]];
    let cutoff = default_rank_tol(da.max(db)) * smax;

    let mut lambdas = Vec::new();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &k in order.iter().filter(|&&k| sigma[k] > cutoff) {
        lambdas.push(sigma[k] * sigma[k]);
        a.push(Vector::from_dvector(u.column(k).into_owned()));
        // row k of V^† holds the coefficients of |f_k⟩ = conj(v_k)
        b.push(Vector::from_dvector(v_t.row(k).transpose().into_owned()));
    }
    Ok((SchmidtSpectrum::new(lambdas)?, SchmidtBases { a, b }))
}

/// Squared traces of the square roots of both marginals:
/// `((Tr √ρ_A)², (Tr √ρ_B)²)`.
pub fn sqrt_trace_reduced(rho: &BipartiteState) -> Result<(f64, f64)> {
    let sq = |side| -> Result<f64> {
        let eig = eig_hermitian(&rho.reduced(side))?;
        let mut total = 0.0;
        for v in eig.values {
            if v < -SPECTRAL_TOL {
                return Err(Error::NotPsd(v));
            }
            total += v.max(0.0).sqrt();
        }
        Ok(total * total)
    };
    Ok((sq(Side::A)?, sq(Side::B)?))
}

/// `ρ = Σ_ij α_ij |u_i v_i⟩⟨u_j v_j|` with orthonormal `{u_i}`, `{v_i}`.
#[derive(Clone, Debug)]
pub struct MaximallyCorrelatedState {
    alpha: Operator,
    u: Vec<Vector>,
    v: Vec<Vector>,
}

fn check_orthonormal(vs: &[Vector], what: &str) -> Result<usize> {
    let dim = vs.first().map(Vector::dim).ok_or(Error::Empty("basis"))?;
    for (i, x) in vs.iter().enumerate() {
        if x.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.dim(),
            });
        }
        for (j, y) in vs.iter().enumerate().skip(i) {
            let expected = if i == j { 1.0 } else { 0.0 };
            if (x.inner(y) - c(expected)).norm() > SPECTRAL_TOL {
                return Err(Error::InvalidArgument(format!(
                    "{what} vectors {i} and {j} are not orthonormal"
                )));
            }
        }
    }
    Ok(dim)
}

impl MaximallyCorrelatedState {
    pub fn new(alpha: Operator, u: Vec<Vector>, v: Vec<Vector>) -> Result<Self> {
        let d = alpha.dim();
        if u.len() != d || v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: u.len().min(v.len()),
            });
        }
        check_orthonormal(&u, "u")?;
        check_orthonormal(&v, "v")?;
        let eig = eig_hermitian(&alpha)?;
        if let Some(&min) = eig.values.last() {
            if min < -SPECTRAL_TOL {
                return Err(Error::NotPsd(min));
            }
        }
        let tr = alpha.trace();
        if (tr.re - 1.0).abs() > SPECTRAL_TOL || tr.im.abs() > SPECTRAL_TOL {
            return Err(Error::InvalidArgument(format!(
                "coefficient matrix has trace {tr}"
            )));
        }
        Ok(Self { alpha, u, v })
    }

    pub fn with_computational_bases(alpha: Operator) -> Result<Self> {
        let d = alpha.dim();
        let basis: Vec<Vector> = (0..d).map(|k| Vector::basis(d, k)).collect();
        Self::new(alpha, basis.clone(), basis)
    }

    /// A pure state is maximally correlated with `α_ij = √(λ_i λ_j)`.
    pub fn from_spectrum(s: &SchmidtSpectrum) -> Self {
        let d = s.len();
        let sq: Vec<f64> = s.lambdas().iter().map(|v| v.sqrt()).collect();
        let entries: Vec<C64> = (0..d)
            .flat_map(|i| {
                let x = sq[i];
                sq.iter().map(move |&y| c(x * y))
            })
            .collect();
        let alpha = Operator::from_rows(d, &entries).expect("square by construction");
        Self::with_computational_bases(alpha).expect("pure-state coefficients are valid")
    }

    pub fn alpha(&self) -> &Operator {
        &self.alpha
    }

    pub fn u(&self) -> &[Vector] {
        &self.u
    }

    pub fn v(&self) -> &[Vector] {
        &self.v
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.u[0].dim(), self.v[0].dim())
    }

    pub fn density(&self) -> BipartiteState {
        let d = self.alpha.dim();
        let dims = self.dims();
        let kets: Vec<Vector> = (0..d).map(|i| self.u[i].tensor(&self.v[i])).collect();
        let mut rho = Operator::zeros(dims.0 * dims.1);
        for i in 0..d {
            for j in 0..d {
                let a = self.alpha.get(i, j);
                if a.norm() > 0.0 {
                    rho += &Operator::outer(&kets[i], &kets[j]).scale_complex(a);
                }
            }
        }
        BipartiteState::density(rho.hermitian_part(), dims).expect("valid by construction")
    }

    /// `rank ρ_A`, i.e. the number of nonzero diagonal coefficients `α_ii`.
    pub fn rank_a(&self) -> usize {
        (0..self.alpha.dim())
            .filter(|&i| self.alpha.get(i, i).re > SPECTRAL_TOL)
            .count()
    }
}
