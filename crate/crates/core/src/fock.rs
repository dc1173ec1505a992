//! Occupation-number bases, creation/annihilation algebra and the wedge product.
//!
//! Every finite set of fermionic modes is stored as an ascending list of global
//! labels. Position `p` in that list is bit `p` of a basis index, so the
//! canonical ordering of basis elements is
//! `|Ω⟩, |1⟩, |2⟩, |1∧2⟩, |3⟩, …` and each element equals the ascending
//! creation string `(f₁†)^{s₁}…(f_N†)^{s_N}|Ω⟩` with coefficient `+1`.
//!
//! Bras of products follow the dual ordering `⟨i|∧⟨j| = ⟨Ω|f_j f_i`, which is
//! the adjoint of `|i⟩∧|j⟩`. With that convention the operator wedge obeys
//! `(C∧D)(E∧F) = CE∧DF` and `O_X ∧ I_rest` reproduces the fermionic operator
//! obtained by writing `O_X` in the creation and annihilation operators of `X`.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{FermiError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default upper bound on the number of modes of any single space.
pub const DEFAULT_MAX_MODES: usize = 10;

/// Environment variable that overrides [`DEFAULT_MAX_MODES`].
pub const MAX_MODES_ENV: &str = "FERMIQIT_MAX_MODES";

/// Hard ceiling; the basis index is a `u64` mask and dense matrices beyond this are hopeless.
const HARD_MAX_MODES: usize = 24;

/// Default numerical tolerance for equality checks.
pub const DEFAULT_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Mode cap in effect for this process, read once from `FERMIQIT_MAX_MODES`.
pub fn max_modes() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(MAX_MODES_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .map(|v| v.min(HARD_MAX_MODES))
            .unwrap_or(DEFAULT_MAX_MODES)
    })
}

pub(crate) fn check_mode_count(n: usize) -> Result<()> {
    let limit = max_modes();
    if n > limit {
        Err(FermiError::TooManyModes { requested: n, limit })
    } else {
        Ok(())
    }
}

#[inline]
pub(crate) fn sign(odd: bool) -> f64 {
    if odd {
        -1.0
    } else {
        1.0
    }
}

#[inline]
pub(crate) fn is_odd_index(index: usize) -> bool {
    index.count_ones() % 2 == 1
}

/// Parity of a particle number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_index(index: usize) -> Self {
        if is_odd_index(index) {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn combine(self, other: Parity) -> Self {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => f.write_str("even"),
            Parity::Odd => f.write_str("odd"),
        }
    }
}

/// Which ordering the entries of a state or operator refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Canonical occupation ordering, mode 1 as least significant bit.
    Canonical,
    /// Stable parity sort of the canonical ordering: even patterns first.
    ParitySorted,
}

/// An ordered set of distinct global mode labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModeSet(Vec<usize>);

impl ModeSet {
    pub fn new(labels: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = labels.into_iter().collect();
        v.sort_unstable();
        for w in v.windows(2) {
            if w[0] == w[1] {
                return Err(FermiError::DuplicateMode(w[0]));
            }
        }
        check_mode_count(v.len())?;
        Ok(ModeSet(v))
    }

    /// Modes `1..=n`.
    pub fn first(n: usize) -> Result<Self> {
        Self::new(1..=n)
    }

    /// Modes `start..start+n`.
    pub fn contiguous(start: usize, n: usize) -> Result<Self> {
        Self::new(start..start + n)
    }

    pub fn empty() -> Self {
        ModeSet(Vec::new())
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Hilbert-space dimension `2^len`.
    pub fn dim(&self) -> usize {
        1usize << self.0.len()
    }

    pub fn position(&self, label: usize) -> Option<usize> {
        self.0.binary_search(&label).ok()
    }

    pub fn contains(&self, label: usize) -> bool {
        self.position(label).is_some()
    }

    pub fn max_label(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn is_disjoint(&self, other: &ModeSet) -> bool {
        self.0.iter().all(|m| !other.contains(*m))
    }

    pub fn is_subset(&self, other: &ModeSet) -> bool {
        self.0.iter().all(|m| other.contains(*m))
    }

    pub fn union(&self, other: &ModeSet) -> Result<ModeSet> {
        ModeSet::new(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn difference(&self, other: &ModeSet) -> ModeSet {
        ModeSet(self.0.iter().copied().filter(|m| !other.contains(*m)).collect())
    }

    /// Positions of `self`'s modes inside `superset`.
    pub(crate) fn positions_in(&self, superset: &ModeSet) -> Result<Vec<usize>> {
        self.0.iter().map(|m| superset.position(*m).ok_or(FermiError::UnknownMode(*m))).collect()
    }
}

impl fmt::Display for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// Scatter the low bits of `mask` to the given positions.
#[inline]
pub(crate) fn scatter(mask: usize, positions: &[usize]) -> usize {
    positions.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).fold(0, |acc, (_, p)| acc | 1 << p)
}

/// Gather bits at `positions` of `mask` into the low bits.
#[inline]
pub(crate) fn gather(mask: usize, positions: &[usize]) -> usize {
    positions.iter().enumerate().filter(|(_, p)| mask >> *p & 1 == 1).fold(0, |acc, (i, _)| acc | 1 << i)
}

/// An N-bit occupation vector `s₁…s_N`; the canonical label of a Fock basis element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OccPattern {
    mask: u64,
    n_modes: usize,
}

impl OccPattern {
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.len() > 63 {
            return Err(FermiError::InvalidPattern(format!("{} modes", bits.len())));
        }
        let mask = bits.iter().enumerate().filter(|(_, b)| **b).fold(0u64, |acc, (i, _)| acc | 1 << i);
        Ok(OccPattern { mask, n_modes: bits.len() })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Occupation of the mode at position `pos` (0-based).
    pub fn occupied(&self, pos: usize) -> bool {
        pos < self.n_modes && self.mask >> pos & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.n_modes).map(|p| self.occupied(p)).collect()
    }

    pub fn particle_number(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn parity(&self) -> Parity {
        if self.mask.count_ones() % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn index(&self) -> usize {
        self.mask as usize
    }
}

/// Canonical index `Σ s_i 2^{i-1}` of an occupation pattern.
pub fn pattern_index(p: &OccPattern) -> usize {
    p.index()
}

/// Inverse of [`pattern_index`] for an `n_modes`-mode space.
pub fn index_pattern(index: usize, n_modes: usize) -> Result<OccPattern> {
    if n_modes > 63 {
        return Err(FermiError::InvalidPattern(format!("{n_modes} modes")));
    }
    let dim = 1usize << n_modes;
    if index >= dim {
        return Err(FermiError::IndexOutOfRange { index, dim });
    }
    Ok(OccPattern { mask: index as u64, n_modes })
}

impl FromStr for OccPattern {
    type Err = FermiError;

    /// Parses a bitstring whose leftmost character is mode 1.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(FermiError::InvalidPattern(format!("unexpected character {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        OccPattern::from_bits(&bits)
    }
}

impl fmt::Display for OccPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in 0..self.n_modes {
            f.write_str(if self.occupied(p) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// `⟨Ω| f_{i_k}…f_{i_1} f†_{j_1}…f†_{j_m} |Ω⟩`, evaluated as `det W` with
/// `W_ab = δ(i_a, j_b)` (zero when the lengths differ).
pub fn vacuum_overlap(left: &[usize], right: &[usize]) -> i32 {
    if left.len() != right.len() {
        return 0;
    }
    let k = left.len();
    let mut w: Vec<Vec<i64>> = left.iter().map(|i| right.iter().map(|j| i64::from(i == j)).collect()).collect();
    // Bareiss fraction-free elimination keeps everything integral.
    let mut det_sign = 1i64;
    let mut prev = 1i64;
    for col in 0..k {
        if w[col][col] == 0 {
            match (col + 1..k).find(|&r| w[r][col] != 0) {
                Some(r) => {
                    w.swap(col, r);
                    det_sign = -det_sign;
                }
                None => return 0,
            }
        }
        for r in col + 1..k {
            for c in col + 1..k {
                w[r][c] = (w[r][c] * w[col][col] - w[r][col] * w[col][c]) / prev;
            }
            w[r][col] = 0;
        }
        prev = w[col][col];
    }
    let det = if k == 0 { 1 } else { w[k - 1][k - 1] };
    (det_sign * det) as i32
}

/// Precomputed placement of two disjoint factors inside their union.
struct WedgeTable {
    union: ModeSet,
    /// `index[a * dim_b + b]` is the union index of `|a⟩∧|b⟩`.
    index: Vec<usize>,
    /// Sign picked up by sorting the concatenated creation string.
    odd: Vec<bool>,
    dim_b: usize,
}

impl WedgeTable {
    fn new(a: &ModeSet, b: &ModeSet) -> Result<Self> {
        if !a.is_disjoint(b) {
            return Err(FermiError::OverlappingModes);
        }
        let union = a.union(b)?;
        let pos_a = a.positions_in(&union)?;
        let pos_b = b.positions_in(&union)?;
        let (dim_a, dim_b) = (a.dim(), b.dim());
        let mut index = Vec::with_capacity(dim_a * dim_b);
        let mut odd = Vec::with_capacity(dim_a * dim_b);
        for sa in 0..dim_a {
            let ua = scatter(sa, &pos_a);
            for sb in 0..dim_b {
                let ub = scatter(sb, &pos_b);
                // inversions: occupied modes of `a` sitting above an occupied mode of `b`
                let inversions: u32 = pos_b
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| sb >> i & 1 == 1)
                    .map(|(_, p)| (ua >> (p + 1)).count_ones())
                    .sum();
                index.push(ua | ub);
                odd.push(inversions % 2 == 1);
            }
        }
        Ok(WedgeTable { union, index, odd, dim_b })
    }

    #[inline]
    fn at(&self, a: usize, b: usize) -> (usize, f64) {
        let k = a * self.dim_b + b;
        (self.index[k], sign(self.odd[k]))
    }
}

/// A pure state (or any vector) over the occupation basis of a mode set.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    modes: ModeSet,
    amps: CVector,
    basis: Basis,
}

impl FockState {
    pub fn new(modes: ModeSet, amps: CVector) -> Result<Self> {
        Self::with_basis(modes, amps, Basis::Canonical)
    }

    pub fn with_basis(modes: ModeSet, amps: CVector, basis: Basis) -> Result<Self> {
        if amps.len() != modes.dim() {
            return Err(FermiError::DimensionMismatch { expected: modes.dim(), found: amps.len() });
        }
        Ok(FockState { modes, amps, basis })
    }

    pub fn vacuum(modes: &ModeSet) -> Self {
        Self::basis_state(modes, 0).expect("vacuum index is always valid")
    }

    pub fn basis_state(modes: &ModeSet, index: usize) -> Result<Self> {
        let dim = modes.dim();
        if index >= dim {
            return Err(FermiError::IndexOutOfRange { index, dim });
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = ONE;
        Ok(FockState { modes: modes.clone(), amps, basis: Basis::Canonical })
    }

    /// State with the given occupation bitstring (leftmost character = first mode).
    pub fn from_pattern(modes: &ModeSet, pattern: &str) -> Result<Self> {
        let p: OccPattern = pattern.parse()?;
        if p.n_modes() != modes.len() {
            return Err(FermiError::InvalidPattern(format!(
                "{pattern:?} has {} modes, expected {}",
                p.n_modes(),
                modes.len()
            )));
        }
        Self::basis_state(modes, p.index())
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        let mut out = self.clone();
        if n > 0.0 {
            out.amps.unscale_mut(n);
        }
        out
    }

    pub fn scaled(&self, factor: C64) -> Self {
        FockState { modes: self.modes.clone(), amps: &self.amps * factor, basis: self.basis }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockState) -> Result<C64> {
        self.check_same_space(other)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Linear combination `self + other`.
    pub fn plus(&self, other: &FockState) -> Result<FockState> {
        self.check_same_space(other)?;
        Ok(FockState { modes: self.modes.clone(), amps: &self.amps + &other.amps, basis: self.basis })
    }

    fn check_same_space(&self, other: &FockState) -> Result<()> {
        if self.modes != other.modes {
            return Err(FermiError::ModeSetMismatch {
                expected: self.modes.labels().to_vec(),
                found: other.modes.labels().to_vec(),
            });
        }
        if self.basis != other.basis {
            return Err(FermiError::BasisMismatch);
        }
        Ok(())
    }

    /// Parity of the state if its weight outside one sector is below `tol`.
    pub fn definite_parity(&self, tol: f64) -> Option<Parity> {
        self.require_canonical().ok()?;
        let (mut even, mut odd) = (0.0, 0.0);
        for (i, a) in self.amps.iter().enumerate() {
            if is_odd_index(i) {
                odd += a.norm_sqr();
            } else {
                even += a.norm_sqr();
            }
        }
        let tol2 = tol * tol;
        match (even <= tol2, odd <= tol2) {
            (true, false) => Some(Parity::Odd),
            (false, true) => Some(Parity::Even),
            // the zero vector counts as even
            (true, true) => Some(Parity::Even),
            (false, false) => None,
        }
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> FockOperator {
        FockOperator { modes: self.modes.clone(), mat: &self.amps * self.amps.adjoint(), basis: self.basis }
    }

    fn require_canonical(&self) -> Result<()> {
        if self.basis == Basis::Canonical {
            Ok(())
        } else {
            Err(FermiError::BasisMismatch)
        }
    }
}

fn apply_ladder(st: &FockState, mode: usize, create: bool) -> Result<FockState> {
    st.require_canonical()?;
    let p = st.modes.position(mode).ok_or(FermiError::UnknownMode(mode))?;
    let bit = 1usize << p;
    let mut out = CVector::zeros(st.dim());
    for (s, a) in st.amps.iter().enumerate() {
        let occupied = s & bit != 0;
        if occupied == create || *a == ZERO {
            continue;
        }
        let below = (s & (bit - 1)).count_ones();
        out[s ^ bit] += a * sign(below % 2 == 1);
    }
    FockState::new(st.modes.clone(), out)
}

/// `f_j† |st⟩`.
pub fn apply_creation(st: &FockState, mode: usize) -> Result<FockState> {
    apply_ladder(st, mode, true)
}

/// `f_j |st⟩`.
pub fn apply_annihilation(st: &FockState, mode: usize) -> Result<FockState> {
    apply_ladder(st, mode, false)
}

/// `|a⟩ ∧ |b⟩` on the union of two disjoint mode sets.
pub fn wedge_states(a: &FockState, b: &FockState) -> Result<FockState> {
    a.require_canonical()?;
    b.require_canonical()?;
    let table = WedgeTable::new(&a.modes, &b.modes)?;
    let mut out = CVector::zeros(table.union.dim());
    for (ia, xa) in a.amps.iter().enumerate() {
        if *xa == ZERO {
            continue;
        }
        for (ib, xb) in b.amps.iter().enumerate() {
            let (u, s) = table.at(ia, ib);
            out[u] += xa * xb * s;
        }
    }
    FockState::new(table.union, out)
}

/// A dense operator over the occupation basis of a mode set.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    modes: ModeSet,
    mat: CMatrix,
    basis: Basis,
}

impl FockOperator {
    pub fn new(modes: ModeSet, mat: CMatrix) -> Result<Self> {
        Self::with_basis(modes, mat, Basis::Canonical)
    }

    pub fn with_basis(modes: ModeSet, mat: CMatrix, basis: Basis) -> Result<Self> {
        let dim = modes.dim();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(FermiError::DimensionMismatch {
                expected: dim,
                found: if mat.nrows() != dim { mat.nrows() } else { mat.ncols() },
            });
        }
        Ok(FockOperator { modes, mat, basis })
    }

    pub fn identity(modes: &ModeSet) -> Self {
        let d = modes.dim();
        FockOperator { modes: modes.clone(), mat: CMatrix::identity(d, d), basis: Basis::Canonical }
    }

    pub fn zeros(modes: &ModeSet) -> Self {
        let d = modes.dim();
        FockOperator { modes: modes.clone(), mat: CMatrix::zeros(d, d), basis: Basis::Canonical }
    }

    /// `|ket⟩⟨bra|`.
    pub fn ket_bra(ket: &FockState, bra: &FockState) -> Result<Self> {
        ket.check_same_space(bra)?;
        Ok(FockOperator { modes: ket.modes.clone(), mat: &ket.amps * bra.amps.adjoint(), basis: ket.basis })
    }

    /// Creation operator `f_j†` as a matrix on `modes`.
    pub fn creation(modes: &ModeSet, mode: usize) -> Result<Self> {
        Self::ladder(modes, mode, true)
    }

    /// Annihilation operator `f_j` as a matrix on `modes`.
    pub fn annihilation(modes: &ModeSet, mode: usize) -> Result<Self> {
        Self::ladder(modes, mode, false)
    }

    fn ladder(modes: &ModeSet, mode: usize, create: bool) -> Result<Self> {
        let p = modes.position(mode).ok_or(FermiError::UnknownMode(mode))?;
        let bit = 1usize << p;
        let d = modes.dim();
        let mut mat = CMatrix::zeros(d, d);
        for s in 0..d {
            if (s & bit != 0) == create {
                continue;
            }
            let below = (s & (bit - 1)).count_ones();
            mat[(s ^ bit, s)] = C64::from(sign(below % 2 == 1));
        }
        Ok(FockOperator { modes: modes.clone(), mat, basis: Basis::Canonical })
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn adjoint(&self) -> Self {
        FockOperator { modes: self.modes.clone(), mat: self.mat.adjoint(), basis: self.basis }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        FockOperator { modes: self.modes.clone(), mat: &self.mat * factor, basis: self.basis }
    }

    pub fn map_matrix(&self, f: impl FnOnce(&CMatrix) -> CMatrix) -> Result<Self> {
        FockOperator::with_basis(self.modes.clone(), f(&self.mat), self.basis)
    }

    /// Applies the operator to a state on the same modes.
    pub fn apply(&self, st: &FockState) -> Result<FockState> {
        self.check_same_space(&st.modes, st.basis)?;
        FockState::with_basis(self.modes.clone(), &self.mat * &st.amps, self.basis)
    }

    /// `⟨ψ|self|ψ⟩`.
    pub fn expectation(&self, st: &FockState) -> Result<C64> {
        self.check_same_space(&st.modes, st.basis)?;
        Ok(st.amps.dotc(&(&self.mat * &st.amps)))
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs(&(&self.mat - self.mat.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_deviation(&self, other: &FockOperator) -> Result<f64> {
        self.check_same(other)?;
        Ok(max_abs(&(&self.mat - &other.mat)))
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &FockOperator) -> Result<f64> {
        self.check_same(other)?;
        Ok((&self.mat - &other.mat).norm())
    }

    pub fn approx_eq(&self, other: &FockOperator, tol: f64) -> bool {
        self.max_deviation(other).map(|d| d <= tol).unwrap_or(false)
    }

    pub(crate) fn check_same(&self, other: &FockOperator) -> Result<()> {
        self.check_same_space(&other.modes, other.basis)
    }

    fn check_same_space(&self, modes: &ModeSet, basis: Basis) -> Result<()> {
        if &self.modes != modes {
            return Err(FermiError::ModeSetMismatch {
                expected: self.modes.labels().to_vec(),
                found: modes.labels().to_vec(),
            });
        }
        if self.basis != basis {
            return Err(FermiError::BasisMismatch);
        }
        Ok(())
    }

    pub(crate) fn require_canonical(&self) -> Result<()> {
        if self.basis == Basis::Canonical {
            Ok(())
        } else {
            Err(FermiError::BasisMismatch)
        }
    }

    pub fn try_mul(&self, rhs: &FockOperator) -> Result<FockOperator> {
        self.check_same(rhs)?;
        Ok(FockOperator { modes: self.modes.clone(), mat: &self.mat * &rhs.mat, basis: self.basis })
    }

    pub fn try_add(&self, rhs: &FockOperator) -> Result<FockOperator> {
        self.check_same(rhs)?;
        Ok(FockOperator { modes: self.modes.clone(), mat: &self.mat + &rhs.mat, basis: self.basis })
    }

    pub fn try_sub(&self, rhs: &FockOperator) -> Result<FockOperator> {
        self.check_same(rhs)?;
        Ok(FockOperator { modes: self.modes.clone(), mat: &self.mat - &rhs.mat, basis: self.basis })
    }

    /// `self · x · self†`.
    pub fn conjugate(&self, x: &FockOperator) -> Result<FockOperator> {
        self.check_same(x)?;
        Ok(FockOperator { modes: self.modes.clone(), mat: &self.mat * &x.mat * self.mat.adjoint(), basis: self.basis })
    }
}

/// Panicking operator arithmetic for call sites that already know the spaces agree.
impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        self.try_mul(rhs).expect("operator product on mismatched spaces")
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        self.try_add(rhs).expect("operator sum on mismatched spaces")
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        self.try_sub(rhs).expect("operator difference on mismatched spaces")
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `C ∧ D` for operators on disjoint mode sets.
///
/// Ket parts wedge like states and bra parts use the dual ordering, so a
/// monomial `|a⟩⟨b| ∧ |c⟩⟨d|` becomes `(|a⟩∧|c⟩)(|b⟩∧|d⟩)†`.
pub fn wedge_operators(c: &FockOperator, d: &FockOperator) -> Result<FockOperator> {
    c.require_canonical()?;
    d.require_canonical()?;
    let table = WedgeTable::new(&c.modes, &d.modes)?;
    let (dc, dd) = (c.dim(), d.dim());
    let mut out = CMatrix::zeros(dc * dd, dc * dd);
    for a in 0..dc {
        for b in 0..dc {
            let x = c.mat[(a, b)];
            if x == ZERO {
                continue;
            }
            for cc in 0..dd {
                let (row, s_row) = table.at(a, cc);
                for dcol in 0..dd {
                    let y = d.mat[(cc, dcol)];
                    if y == ZERO {
                        continue;
                    }
                    let (col, s_col) = table.at(b, dcol);
                    out[(row, col)] += x * y * (s_row * s_col);
                }
            }
        }
    }
    FockOperator::new(table.union, out)
}

/// `O ∧ I_rest`: the local operator `O` acting on the larger space `modes(O) ∪ rest`.
pub fn embed_local(op: &FockOperator, rest: &ModeSet) -> Result<FockOperator> {
    wedge_operators(op, &FockOperator::identity(rest))
}

/// `n̂ = Σ f_i† f_i`, diagonal in the canonical basis.
pub fn number_operator(modes: &ModeSet) -> FockOperator {
    let d = modes.dim();
    let diag = CVector::from_iterator(d, (0..d).map(|s| C64::from(s.count_ones() as f64)));
    FockOperator { modes: modes.clone(), mat: CMatrix::from_diagonal(&diag), basis: Basis::Canonical }
}

/// `Π = e^{iπn̂}`, diagonal with entries `(-1)^{particle number}`.
pub fn parity_operator(modes: &ModeSet) -> FockOperator {
    let d = modes.dim();
    let diag = CVector::from_iterator(d, (0..d).map(|s| C64::from(sign(is_odd_index(s)))));
    FockOperator { modes: modes.clone(), mat: CMatrix::from_diagonal(&diag), basis: Basis::Canonical }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modes(n: usize) -> ModeSet {
        ModeSet::first(n).unwrap()
    }

    #[test]
    fn vacuum_is_index_zero() {
        let p: OccPattern = "000".parse().unwrap();
        assert_eq!(pattern_index(&p), 0);
    }

    #[test]
    fn modes_one_and_two_occupied_is_index_three() {
        let p: OccPattern = "110".parse().unwrap();
        assert_eq!(pattern_index(&p), 3);
        assert_eq!(p.to_string(), "110");
    }

    #[test]
    fn pattern_round_trip() {
        for n in 0..=6 {
            for i in 0..1usize << n {
                let p = index_pattern(i, n).unwrap();
                assert_eq!(pattern_index(&p), i);
                assert!(p.particle_number() <= n);
            }
        }
        assert!(matches!(index_pattern(8, 3), Err(FermiError::IndexOutOfRange { index: 8, dim: 8 })));
    }

    #[test]
    fn bad_pattern_characters_rejected() {
        assert!("10x".parse::<OccPattern>().is_err());
    }

    #[test]
    fn vacuum_overlap_examples() {
        assert_eq!(vacuum_overlap(&[], &[]), 1);
        assert_eq!(vacuum_overlap(&[1], &[2]), 0);
        assert_eq!(vacuum_overlap(&[1, 2], &[2, 1]), -1);
        assert_eq!(vacuum_overlap(&[1, 2], &[1, 2]), 1);
        assert_eq!(vacuum_overlap(&[1], &[1, 2]), 0);
        assert_eq!(vacuum_overlap(&[1, 1], &[1, 1]), 0);
    }

    #[test]
    fn creation_on_vacuum() {
        let m = modes(2);
        let one = apply_creation(&FockState::vacuum(&m), 1).unwrap();
        assert_eq!(one, FockState::from_pattern(&m, "10").unwrap());
    }

    #[test]
    fn creation_order_flips_sign() {
        let m = modes(2);
        let vac = FockState::vacuum(&m);
        let a = apply_creation(&apply_creation(&vac, 2).unwrap(), 1).unwrap();
        let b = apply_creation(&apply_creation(&vac, 1).unwrap(), 2).unwrap();
        assert_eq!(a.amplitudes(), &(-b.amplitudes()));
        assert_eq!(a, FockState::from_pattern(&m, "11").unwrap());
    }

    #[test]
    fn annihilation_kills_vacuum() {
        let m = modes(2);
        let z = apply_annihilation(&FockState::vacuum(&m), 1).unwrap();
        assert_eq!(z.norm(), 0.0);
    }

    #[test]
    fn unknown_mode_rejected() {
        let m = modes(2);
        assert_eq!(apply_creation(&FockState::vacuum(&m), 7), Err(FermiError::UnknownMode(7)));
    }

    #[test]
    fn wedge_with_vacuum_is_identity() {
        let a = ModeSet::new([1, 3]).unwrap();
        let psi = FockState::new(
            a.clone(),
            CVector::from_vec(vec![C64::new(0.5, 0.0), ZERO, ZERO, C64::new(0.0, 0.5f64.sqrt())]),
        )
        .unwrap();
        let vac = FockState::vacuum(&ModeSet::empty());
        assert_eq!(wedge_states(&vac, &psi).unwrap(), psi);
        assert_eq!(wedge_states(&psi, &vac).unwrap(), psi);
    }

    #[test]
    fn wedge_of_single_modes() {
        let m1 = ModeSet::new([1]).unwrap();
        let m2 = ModeSet::new([2]).unwrap();
        let one = FockState::from_pattern(&m1, "1").unwrap();
        let two = FockState::from_pattern(&m2, "1").unwrap();
        let both = FockState::from_pattern(&modes(2), "11").unwrap();
        assert_eq!(wedge_states(&one, &two).unwrap(), both);
        assert_eq!(wedge_states(&two, &one).unwrap(), both.scaled(C64::from(-1.0)));
    }

    #[test]
    fn wedge_rejects_overlap() {
        let m = modes(2);
        let v = FockState::vacuum(&m);
        assert_eq!(wedge_states(&v, &v), Err(FermiError::OverlappingModes));
        let i = FockOperator::identity(&m);
        assert_eq!(wedge_operators(&i, &i), Err(FermiError::OverlappingModes));
    }

    #[test]
    fn identity_wedge_identity() {
        let a = ModeSet::new([1, 4]).unwrap();
        let b = ModeSet::new([2, 3]).unwrap();
        let w = wedge_operators(&FockOperator::identity(&a), &FockOperator::identity(&b)).unwrap();
        assert_eq!(w, FockOperator::identity(&modes(4)));
    }

    #[test]
    fn diagonal_projector_wedge() {
        let m1 = ModeSet::new([1]).unwrap();
        let m2 = ModeSet::new([2]).unwrap();
        let p1 = FockState::from_pattern(&m1, "1").unwrap().projector();
        let p0 = FockState::vacuum(&m2).projector();
        let w = wedge_operators(&p1, &p0).unwrap();
        let expected = FockState::from_pattern(&modes(2), "10").unwrap().projector();
        assert_eq!(w, expected);
    }

    #[test]
    fn local_first_embedding_matches_global_ladder_operator() {
        let all = modes(3);
        for j in 1..=3 {
            let local = ModeSet::new([j]).unwrap();
            let rest = all.difference(&local);
            let f_local = FockOperator::annihilation(&local, j).unwrap();
            let embedded = embed_local(&f_local, &rest).unwrap();
            assert_eq!(embedded, FockOperator::annihilation(&all, j).unwrap());
        }
    }

    #[test]
    fn parity_operator_examples() {
        let m = modes(2);
        let pi = parity_operator(&m);
        let vac = FockState::vacuum(&m);
        assert_eq!(pi.apply(&vac).unwrap(), vac);
        let both = FockState::from_pattern(&m, "11").unwrap();
        assert_eq!(pi.apply(&both).unwrap(), both);
        let one = FockState::from_pattern(&m, "10").unwrap();
        assert_eq!(pi.apply(&one).unwrap(), one.scaled(C64::from(-1.0)));
        for n in 1..=6 {
            let pi = parity_operator(&modes(n));
            assert_eq!(&pi * &pi, FockOperator::identity(&modes(n)));
        }
    }

    #[test]
    fn number_operator_counts_particles() {
        let m = modes(3);
        let n = number_operator(&m);
        let st = FockState::from_pattern(&m, "101").unwrap();
        assert_eq!(n.expectation(&st).unwrap(), C64::from(2.0));
    }

    #[test]
    fn mode_set_rejects_duplicates() {
        assert_eq!(ModeSet::new([1, 2, 1]), Err(FermiError::DuplicateMode(1)));
    }

    #[test]
    fn definite_parity_detection() {
        let m = modes(1);
        let plus = FockState::vacuum(&m).plus(&FockState::from_pattern(&m, "1").unwrap()).unwrap();
        assert_eq!(plus.definite_parity(1e-12), None);
        assert_eq!(FockState::from_pattern(&m, "1").unwrap().definite_parity(1e-12), Some(Parity::Odd));
    }
}
