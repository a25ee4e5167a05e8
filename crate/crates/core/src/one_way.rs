//! One-way LOCC detection: `β_→ = rank ρ_A / D` for pure and maximally
//! correlated states, the explicit test attaining it, and the factorized
//! acceptance criterion for one-way protocols.

use crate::error::{Error, Result};
use crate::operators::{
    c, numerical_rank, partial_trace, psd_check, tensor, Operator, Side, Vector, C64,
    CONSTRUCTION_TOL, DERIVED_TOL, SPECTRAL_TOL,
};
use crate::state::{BipartiteState, MaximallyCorrelatedState};

/// `β_→` together with whether it is the exact value or only a lower bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneWayBound {
    pub value: f64,
    pub exact: bool,
}

/// Alice measures `{M_i}` and sends `i`; Bob measures `{N_j^i}`. The pair
/// `(i, j)` is accepted ("the state is ρ") iff it is in `accept`.
#[derive(Clone, Debug)]
pub struct OneWayProtocol {
    dims: (usize, usize),
    alice_povm: Vec<Operator>,
    bob_povms: Vec<Vec<Operator>>,
    accept: Vec<(usize, usize)>,
}

fn check_povm(elements: &[Operator], dim: usize, who: &str) -> Result<()> {
    let mut total = Operator::zeros(dim);
    for m in elements {
        if m.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.dim(),
            });
        }
        if !psd_check(m, SPECTRAL_TOL) {
            return Err(Error::InvalidArgument(format!(
                "{who} POVM element is not PSD"
            )));
        }
        total += m;
    }
    let dev = total.max_abs_diff(&Operator::identity(dim));
    if dev > SPECTRAL_TOL {
        return Err(Error::InvalidArgument(format!(
            "{who} POVM does not sum to identity (deviation {dev:e})"
        )));
    }
    Ok(())
}

impl OneWayProtocol {
    pub fn new(
        dims: (usize, usize),
        alice_povm: Vec<Operator>,
        bob_povms: Vec<Vec<Operator>>,
        accept: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if alice_povm.len() != bob_povms.len() {
            return Err(Error::DimensionMismatch {
                expected: alice_povm.len(),
                found: bob_povms.len(),
            });
        }
        check_povm(&alice_povm, dims.0, "Alice")?;
        for bob in &bob_povms {
            check_povm(bob, dims.1, "Bob")?;
        }
        for &(i, j) in &accept {
            if i >= bob_povms.len() || j >= bob_povms[i].len() {
                return Err(Error::InvalidArgument(format!(
                    "accepted outcome ({i}, {j}) does not exist"
                )));
            }
        }
        Ok(Self {
            dims,
            alice_povm,
            bob_povms,
            accept,
        })
    }

    /// The trivial protocol whose only outcome accepts (`T = I`).
    pub fn accept_all(dims: (usize, usize)) -> Self {
        Self {
            dims,
            alice_povm: vec![Operator::identity(dims.0)],
            bob_povms: vec![vec![Operator::identity(dims.1)]],
            accept: vec![(0, 0)],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn alice_povm(&self) -> &[Operator] {
        &self.alice_povm
    }

    pub fn bob_povms(&self) -> &[Vec<Operator>] {
        &self.bob_povms
    }

    pub fn accept(&self) -> &[(usize, usize)] {
        &self.accept
    }

    /// `T = Σ_{(i,j) accepted} M_i ⊗ N_j^i`.
    pub fn element(&self) -> Operator {
        let mut t = Operator::zeros(self.dims.0 * self.dims.1);
        for &(i, j) in &self.accept {
            t += &tensor(&self.alice_povm[i], &self.bob_povms[i][j]);
        }
        t
    }

    /// `N_i = Σ_{j : (i,j) accepted} N_j^i`.
    fn accepted_bob(&self, i: usize) -> Option<Operator> {
        let mut out: Option<Operator> = None;
        for &(ai, j) in &self.accept {
            if ai == i {
                let n = &self.bob_povms[i][j];
                out = Some(match out {
                    Some(acc) => &acc + n,
                    None => n.clone(),
                });
            }
        }
        out
    }
}

/// `β_→` of a pure or mixed state. Exact (`rank ρ_A / D`) for pure input;
/// for general mixed input the same expression is only a lower bound.
pub fn beta_one_way(rho: &BipartiteState) -> OneWayBound {
    let rank = numerical_rank(&rho.reduced(Side::A), None).expect("reduced states are Hermitian");
    OneWayBound {
        value: rank as f64 / rho.dim() as f64,
        exact: rho.as_pure().is_some(),
    }
}

/// `β_→` of a maximally correlated state, always exact.
pub fn beta_one_way_correlated(mc: &MaximallyCorrelatedState) -> OneWayBound {
    let (da, db) = mc.dims();
    OneWayBound {
        value: mc.rank_a() as f64 / (da * db) as f64,
        exact: true,
    }
}

/// The test `T = Σ_{i : α_ii > 0} |u_i⟩⟨u_i| ⊗ |v_i⟩⟨v_i|`.
pub fn build_one_way_test(mc: &MaximallyCorrelatedState) -> (OneWayProtocol, Operator) {
    let keep: Vec<bool> = (0..mc.alpha().dim())
        .map(|i| mc.alpha().get(i, i).re > SPECTRAL_TOL)
        .collect();
    build_one_way_test_from(mc.u(), mc.v(), &keep)
        .expect("maximally correlated states have orthonormal local vectors")
}

/// Alice measures in the orthonormal `{u_i}` (plus the complement of their
/// span, which rejects), Bob checks `|v_i⟩⟨v_i|`. The `v_i` need only be
/// unit vectors.
pub fn build_one_way_test_from(
    u: &[Vector],
    v: &[Vector],
    keep: &[bool],
) -> Result<(OneWayProtocol, Operator)> {
    if u.len() != v.len() || u.len() != keep.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len().min(keep.len()),
        });
    }
    let da = u
        .first()
        .map(Vector::dim)
        .ok_or(Error::Empty("local vectors"))?;
    let db = v[0].dim();
    let mut alice = Vec::new();
    let mut bob = Vec::new();
    let mut accept = Vec::new();
    let mut covered = Operator::zeros(da);
    for ((ui, vi), &k) in u.iter().zip(v).zip(keep) {
        if !k {
            continue;
        }
        if !vi.is_normalized(SPECTRAL_TOL) {
            return Err(Error::InvalidArgument(
                "Bob's vectors must be unit vectors".into(),
            ));
        }
        let p = Operator::projector(ui);
        let q = Operator::projector(vi);
        covered += &p;
        accept.push((alice.len(), 0));
        alice.push(p);
        bob.push(vec![q.clone(), &Operator::identity(db) - &q]);
    }
    let rest = &Operator::identity(da) - &covered;
    if rest.max_abs() > CONSTRUCTION_TOL {
        alice.push(rest);
        bob.push(vec![Operator::identity(db)]);
    }
    let protocol = OneWayProtocol::new((da, db), alice, bob, accept)?;
    let t = protocol.element();
    Ok((protocol, t))
}

/// Factorized zero-type-1-error criterion: `Tr ρT = 1` iff
/// `Tr(ρ_A Σ_{accepted i} M_i) = 1` and `Tr(ρ_{B,M_i} N_i) = 1` for every
/// accepted `i` that occurs with nonzero probability, where
/// `ρ_{B,M_i} = Tr_A[ρ (M_i ⊗ I)] / Tr(ρ_A M_i)`.
pub fn check_lemma3(p: &OneWayProtocol, rho: &BipartiteState) -> Result<bool> {
    let dims = p.dims();
    if rho.dims() != dims {
        return Err(Error::DimensionMismatch {
            expected: dims.0 * dims.1,
            found: rho.dim(),
        });
    }
    let density = rho.density_operator();
    let rho_a = rho.reduced(Side::A);
    let id_b = Operator::identity(dims.1);

    let mut accepted_mass = C64::new(0.0, 0.0);
    let mut conditional_ok = true;
    for (i, m) in p.alice_povm().iter().enumerate() {
        let Some(n_i) = p.accepted_bob(i) else {
            continue;
        };
        let prob = rho_a.trace_product(m).re;
        accepted_mass += c(prob);
        if prob <= CONSTRUCTION_TOL {
            continue;
        }
        let steered = partial_trace(&(&density * &tensor(m, &id_b)), dims, Side::B)?;
        let conditional = steered.trace_product(&n_i).re / prob;
        conditional_ok &= (conditional - 1.0).abs() <= DERIVED_TOL;
    }
    Ok((accepted_mass.re - 1.0).abs() <= DERIVED_TOL && conditional_ok)
}
