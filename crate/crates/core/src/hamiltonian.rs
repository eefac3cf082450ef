//! Operator matrices for the Zeeman, flip-flop (XY) and Ising (ZZ) terms.
//!
//! Two bases are supported. [`Basis::Full`] is the 2^N computational basis
//! with bit `k` of the index set when site `k` is up (|1⟩ = |↑⟩_z).
//! [`Basis::SingleExcitation`] keeps only the all-down vacuum (index 0) and
//! the N states with exactly one site up (index `k + 1` for site `k`). All
//! three Hamiltonians conserve Σ I^z, so the sector is closed under them.
//!
//! The subspace builders keep the diagonal vacuum energy: the subspace matrix
//! is exactly the projection of the full-basis matrix, with no offset removed.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg::{hermitian_defect, max_abs, real, CMatrix, ZERO};
use crate::network::{ordered, Pair, SpinNetwork};
use crate::{Error, Result};

/// Largest site count accepted for dense full-basis operators.
pub const MAX_FULL_SITES: usize = 12;

/// Tolerance of the Hermitian flag, relative to `max(1, max |M|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Basis {
    Full { sites: usize },
    SingleExcitation { sites: usize },
}

impl Basis {
    pub fn full(sites: usize) -> Self {
        Basis::Full { sites }
    }

    pub fn single_excitation(sites: usize) -> Self {
        Basis::SingleExcitation { sites }
    }

    pub fn sites(&self) -> usize {
        match *self {
            Basis::Full { sites } | Basis::SingleExcitation { sites } => sites,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Basis::Full { sites } => 1 << sites,
            Basis::SingleExcitation { sites } => sites + 1,
        }
    }

    pub fn is_full(&self) -> bool {
        matches!(self, Basis::Full { .. })
    }

    /// Index of the state with only `site` up.
    pub fn excitation_index(&self, site: usize) -> usize {
        match self {
            Basis::Full { .. } => 1 << site,
            Basis::SingleExcitation { .. } => site + 1,
        }
    }

    pub(crate) fn check(&self, net: &SpinNetwork) -> Result<()> {
        if self.sites() != net.len() {
            return Err(Error::BasisMismatch {
                expected: net.len(),
                found: self.sites(),
            });
        }
        if self.is_full() && self.sites() > MAX_FULL_SITES {
            return Err(Error::BasisTooLarge(self.sites()));
        }
        Ok(())
    }

    /// Number of up spins in the basis state `index`.
    pub fn excitations(&self, index: usize) -> u32 {
        match self {
            Basis::Full { .. } => index.count_ones(),
            Basis::SingleExcitation { .. } => u32::from(index != 0),
        }
    }

    /// Whether `site` is up in basis state `index`.
    pub fn is_up(&self, index: usize, site: usize) -> bool {
        match self {
            Basis::Full { .. } => index >> site & 1 == 1,
            Basis::SingleExcitation { .. } => index == site + 1,
        }
    }
}

/// A dense square operator tagged with its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    data: CMatrix,
    basis: Basis,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Wraps a matrix that must be Hermitian.
    pub fn hermitian(data: CMatrix, basis: Basis) -> Result<Self> {
        check_dim(&data, basis)?;
        let defect = hermitian_defect(&data);
        if defect > HERMITIAN_TOL * max_abs(&data).max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self {
            data,
            basis,
            hermitian: true,
        })
    }

    /// Wraps an arbitrary operator (e.g. a propagator) without a Hermitian flag.
    pub fn general(data: CMatrix, basis: Basis) -> Result<Self> {
        check_dim(&data, basis)?;
        Ok(Self {
            data,
            basis,
            hermitian: false,
        })
    }

    pub fn zeros(basis: Basis) -> Self {
        let d = basis.dim();
        Self {
            data: CMatrix::zeros(d, d),
            basis,
            hermitian: true,
        }
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_data(self) -> CMatrix {
        self.data
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Entries with modulus above `tol`, row-major.
    pub fn nonzero(&self, tol: f64) -> Vec<(usize, usize, Complex64)> {
        let n = self.dim();
        let mut out = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let z = self.data[(r, c)];
                if z.norm() > tol {
                    out.push((r, c, z));
                }
            }
        }
        out
    }

    /// Restriction of a full-basis operator to the vacuum plus
    /// single-excitation states.
    pub fn project_single_excitation(&self) -> Result<Self> {
        let sites = match self.basis {
            Basis::Full { sites } => sites,
            Basis::SingleExcitation { .. } => return Ok(self.clone()),
        };
        let idx: Vec<usize> = core::iter::once(0).chain((0..sites).map(|k| 1 << k)).collect();
        let data = CMatrix::from_fn(sites + 1, sites + 1, |r, c| self.data[(idx[r], idx[c])]);
        Ok(Self {
            data,
            basis: Basis::SingleExcitation { sites },
            hermitian: self.hermitian,
        })
    }

    pub(crate) fn from_parts(data: CMatrix, basis: Basis, hermitian: bool) -> Self {
        Self {
            data,
            basis,
            hermitian,
        }
    }
}

fn check_dim(data: &CMatrix, basis: Basis) -> Result<()> {
    if data.nrows() != basis.dim() || data.ncols() != basis.dim() {
        return Err(Error::BasisMismatch {
            expected: basis.dim(),
            found: data.nrows(),
        });
    }
    Ok(())
}

/// Which pairs a flip-flop term acts on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PairSelection {
    All,
    Only(BTreeSet<Pair>),
}

impl PairSelection {
    pub fn only(pairs: impl IntoIterator<Item = Pair>) -> Self {
        PairSelection::Only(pairs.into_iter().map(|(a, b)| ordered(a, b)).collect())
    }

    fn contains(&self, p: Pair) -> bool {
        match self {
            PairSelection::All => true,
            PairSelection::Only(set) => set.contains(&p),
        }
    }
}

/// One Hamiltonian term of a recipe.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Term {
    /// Σ_{i∉excluded} ΔΩ_i I_i^z.
    Zeeman { excluded: BTreeSet<usize> },
    /// Σ J_ij (I_i^x I_j^x + I_i^y I_j^y) over the selected pairs.
    Xy { pairs: PairSelection },
    /// Σ J_ij I_i^z I_j^z over all coupled pairs.
    Zz,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaledTerm {
    pub term: Term,
    pub scale: f64,
}

/// A weighted sum of [`Term`]s.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HamiltonianRecipe {
    pub terms: Vec<ScaledTerm>,
}

/// Bit-exact identity of a recipe, usable as a map key.
pub type RecipeKey = Vec<(Term, u64)>;

impl HamiltonianRecipe {
    pub fn new() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn with(mut self, term: Term, scale: f64) -> Self {
        self.terms.push(ScaledTerm { term, scale });
        self
    }

    pub fn zeeman() -> Self {
        Self::new().with(Term::Zeeman { excluded: BTreeSet::new() }, 1.0)
    }

    pub fn zeeman_excluding(sites: &[usize]) -> Self {
        Self::new().with(
            Term::Zeeman {
                excluded: sites.iter().copied().collect(),
            },
            1.0,
        )
    }

    pub fn xy() -> Self {
        Self::new().with(Term::Xy { pairs: PairSelection::All }, 1.0)
    }

    pub fn xy_pairs(pairs: impl IntoIterator<Item = Pair>) -> Self {
        Self::new().with(
            Term::Xy {
                pairs: PairSelection::only(pairs),
            },
            1.0,
        )
    }

    pub fn zz() -> Self {
        Self::new().with(Term::Zz, 1.0)
    }

    /// Concatenates the terms of two recipes.
    pub fn plus(mut self, other: HamiltonianRecipe) -> Self {
        self.terms.extend(other.terms);
        self
    }

    /// Multiplies every term by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.scale *= factor);
        self
    }

    pub fn key(&self) -> RecipeKey {
        self.terms
            .iter()
            .map(|t| (t.term.clone(), t.scale.to_bits()))
            .collect()
    }

    pub fn validate(&self, net: &SpinNetwork) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::EmptyRecipe);
        }
        for t in &self.terms {
            if !t.scale.is_finite() {
                return Err(Error::NonFinite(alloc::string::String::from("term scale")));
            }
            match &t.term {
                Term::Zeeman { excluded } => {
                    for &s in excluded {
                        net.check_site(s)?;
                    }
                }
                Term::Xy { pairs } => check_pairs(net, pairs)?,
                Term::Zz => {}
            }
        }
        Ok(())
    }

    /// Whether every term is diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|t| !matches!(t.term, Term::Xy { .. }))
    }
}

impl Default for HamiltonianRecipe {
    fn default() -> Self {
        Self::new()
    }
}

fn check_pairs(net: &SpinNetwork, pairs: &PairSelection) -> Result<()> {
    if let PairSelection::Only(set) = pairs {
        for &(a, b) in set {
            net.check_site(a)?;
            net.check_site(b)?;
            if !net.is_coupled(a, b) {
                return Err(Error::NotCoupled {
                    a: net.label(a).into(),
                    b: net.label(b).into(),
                });
            }
        }
    }
    Ok(())
}

#[inline]
fn iz(up: bool) -> f64 {
    if up {
        0.5
    } else {
        -0.5
    }
}

fn diagonal(basis: Basis, f: impl Fn(usize) -> f64) -> CMatrix {
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d {
        m[(k, k)] = real(f(k));
    }
    m
}

/// Σ_{i∉excluded} ΔΩ_i I_i^z.
pub fn build_zeeman(
    net: &SpinNetwork,
    excluded: &BTreeSet<usize>,
    basis: Basis,
) -> Result<OperatorMatrix> {
    basis.check(net)?;
    for &s in excluded {
        net.check_site(s)?;
    }
    let active: Vec<usize> = (0..net.len()).filter(|s| !excluded.contains(s)).collect();
    let data = diagonal(basis, |idx| {
        active
            .iter()
            .map(|&s| net.shift(s) * iz(basis.is_up(idx, s)))
            .sum()
    });
    Ok(OperatorMatrix::from_parts(data, basis, true))
}

/// Σ J_ij (I_i^x I_j^x + I_i^y I_j^y) = Σ (J_ij/2)(I_i^+ I_j^- + I_i^- I_j^+).
pub fn build_xy(net: &SpinNetwork, pairs: &PairSelection, basis: Basis) -> Result<OperatorMatrix> {
    basis.check(net)?;
    check_pairs(net, pairs)?;
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for ((i, j), coupling) in net.couplings().filter(|(p, _)| pairs.contains(*p)) {
        let element = real(0.5 * coupling);
        match basis {
            Basis::Full { .. } => {
                let mask = (1usize << i) | (1usize << j);
                for idx in 0..d {
                    let bits = idx & mask;
                    if bits != 0 && bits != mask {
                        m[(idx ^ mask, idx)] += element;
                    }
                }
            }
            Basis::SingleExcitation { .. } => {
                m[(i + 1, j + 1)] += element;
                m[(j + 1, i + 1)] += element;
            }
        }
    }
    Ok(OperatorMatrix::from_parts(m, basis, true))
}

/// Σ J_ij I_i^z I_j^z.
pub fn build_zz(net: &SpinNetwork, basis: Basis) -> Result<OperatorMatrix> {
    basis.check(net)?;
    let data = diagonal(basis, |idx| {
        net.couplings()
            .map(|((i, j), c)| c * iz(basis.is_up(idx, i)) * iz(basis.is_up(idx, j)))
            .sum()
    });
    Ok(OperatorMatrix::from_parts(data, basis, true))
}

/// Total z magnetization Σ I_i^z.
pub fn total_z(basis: Basis) -> OperatorMatrix {
    let n = basis.sites();
    let data = diagonal(basis, |idx| basis.excitations(idx) as f64 - 0.5 * n as f64);
    OperatorMatrix::from_parts(data, basis, true)
}

fn build_term(net: &SpinNetwork, term: &Term, basis: Basis) -> Result<OperatorMatrix> {
    match term {
        Term::Zeeman { excluded } => build_zeeman(net, excluded, basis),
        Term::Xy { pairs } => build_xy(net, pairs, basis),
        Term::Zz => build_zz(net, basis),
    }
}

/// Scaled sum of the recipe's terms.
pub fn assemble(
    recipe: &HamiltonianRecipe,
    net: &SpinNetwork,
    basis: Basis,
) -> Result<OperatorMatrix> {
    recipe.validate(net)?;
    basis.check(net)?;
    let d = basis.dim();
    let mut acc = CMatrix::from_element(d, d, ZERO);
    for t in &recipe.terms {
        let m = build_term(net, &t.term, basis)?;
        acc += m.into_data() * real(t.scale);
    }
    Ok(OperatorMatrix::from_parts(acc, basis, true))
}
