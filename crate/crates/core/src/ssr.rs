//! Parity super-selection structure: the parity-sorted basis, block classification
//! and validity checks for states, observables, projectors and unitaries.

use std::fmt;

use crate::error::{FermiError, Result};
use crate::fock::{is_odd_index, max_abs, Basis, CMatrix, FockOperator, ModeSet, Parity, C64, ONE};
use crate::linalg::{self, SectorEigenPair};

/// Canonical indices of one parity sector, ascending. This is also the B′ order inside the sector.
pub fn sector_indices(n_modes: usize, parity: Parity) -> Vec<usize> {
    (0..1usize << n_modes).filter(|&i| Parity::of_index(i) == parity).collect()
}

/// Stable parity sort of the canonical basis: even patterns first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityBasisMap {
    n_modes: usize,
    /// canonical index → position in B′
    perm: Vec<usize>,
    /// position in B′ → canonical index
    inverse: Vec<usize>,
}

impl ParityBasisMap {
    pub fn new(n_modes: usize) -> Self {
        let mut inverse = sector_indices(n_modes, Parity::Even);
        inverse.extend(sector_indices(n_modes, Parity::Odd));
        let mut perm = vec![0; inverse.len()];
        for (pos, &i) in inverse.iter().enumerate() {
            perm[i] = pos;
        }
        ParityBasisMap { n_modes, perm, inverse }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of even basis elements; they occupy positions `0..even_count()` in B′.
    pub fn even_count(&self) -> usize {
        sector_len(self.n_modes, Parity::Even)
    }

    pub fn position(&self, canonical: usize) -> usize {
        self.perm[canonical]
    }

    pub fn canonical(&self, position: usize) -> usize {
        self.inverse[position]
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }
}

fn sector_len(n_modes: usize, parity: Parity) -> usize {
    match (n_modes, parity) {
        (0, Parity::Even) => 1,
        (0, Parity::Odd) => 0,
        (n, _) => 1 << (n - 1),
    }
}

/// Whether basis index `i` of an operator in the given basis is odd.
fn index_odd(basis: Basis, n_modes: usize, i: usize) -> bool {
    match basis {
        Basis::Canonical => is_odd_index(i),
        Basis::ParitySorted => i >= sector_len(n_modes, Parity::Even),
    }
}

pub fn to_parity_basis(op: &FockOperator) -> Result<FockOperator> {
    match op.basis() {
        Basis::ParitySorted => Ok(op.clone()),
        Basis::Canonical => {
            let map = ParityBasisMap::new(op.modes().len());
            let m = op.matrix();
            let mat = CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(map.canonical(i), map.canonical(j))]);
            FockOperator::with_basis(op.modes().clone(), mat, Basis::ParitySorted)
        }
    }
}

pub fn from_parity_basis(op: &FockOperator) -> Result<FockOperator> {
    match op.basis() {
        Basis::Canonical => Ok(op.clone()),
        Basis::ParitySorted => {
            let map = ParityBasisMap::new(op.modes().len());
            let m = op.matrix();
            let mat = CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(map.position(i), map.position(j))]);
            FockOperator::with_basis(op.modes().clone(), mat, Basis::Canonical)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// Preserves parity: nonzero only inside the even and odd sectors.
    BlockDiagonal,
    /// Flips parity: nonzero only between sectors.
    BlockAntiDiagonal,
    Neither,
}

impl BlockKind {
    /// Parity change induced by an operator of this kind.
    pub fn parity(self) -> Option<Parity> {
        match self {
            BlockKind::BlockDiagonal => Some(Parity::Even),
            BlockKind::BlockAntiDiagonal => Some(Parity::Odd),
            BlockKind::Neither => None,
        }
    }

    /// Kind of a product `AB` given the kinds of `A` and `B`.
    pub fn compose(self, other: BlockKind) -> BlockKind {
        match (self.parity(), other.parity()) {
            (Some(a), Some(b)) if a.combine(b) == Parity::Even => BlockKind::BlockDiagonal,
            (Some(_), Some(_)) => BlockKind::BlockAntiDiagonal,
            _ => BlockKind::Neither,
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockKind::BlockDiagonal => "block-diagonal",
            BlockKind::BlockAntiDiagonal => "block-anti-diagonal",
            BlockKind::Neither => "neither",
        })
    }
}

/// The four parity blocks of an operator in B′ together with its classification.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockForm {
    pub kind: BlockKind,
    pub even_even: CMatrix,
    pub even_odd: CMatrix,
    pub odd_even: CMatrix,
    pub odd_odd: CMatrix,
}

impl BlockForm {
    /// The two blocks that carry the operator: `(O₊₊, O₋₋)` for block-diagonal,
    /// `(O₊₋, O₋₊)` for block-anti-diagonal. `None` for [`BlockKind::Neither`].
    pub fn blocks(&self) -> Option<(&CMatrix, &CMatrix)> {
        match self.kind {
            BlockKind::BlockDiagonal => Some((&self.even_even, &self.odd_odd)),
            BlockKind::BlockAntiDiagonal => Some((&self.even_odd, &self.odd_even)),
            BlockKind::Neither => None,
        }
    }

    /// Matrix in B′ rebuilt from the four blocks.
    pub fn reassemble(&self) -> CMatrix {
        let (e, o) = (self.even_even.nrows(), self.odd_odd.nrows());
        let mut m = CMatrix::zeros(e + o, e + o);
        m.view_mut((0, 0), (e, e)).copy_from(&self.even_even);
        m.view_mut((0, e), (e, o)).copy_from(&self.even_odd);
        m.view_mut((e, 0), (o, e)).copy_from(&self.odd_even);
        m.view_mut((e, e), (o, o)).copy_from(&self.odd_odd);
        m
    }
}

/// Largest entries on and off the parity-preserving blocks.
fn sector_weights(op: &FockOperator) -> (f64, f64) {
    let n = op.modes().len();
    let m = op.matrix();
    let (mut on, mut off) = (0.0f64, 0.0f64);
    for j in 0..m.ncols() {
        let oj = index_odd(op.basis(), n, j);
        for i in 0..m.nrows() {
            let a = m[(i, j)].norm();
            if index_odd(op.basis(), n, i) == oj {
                on = on.max(a);
            } else {
                off = off.max(a);
            }
        }
    }
    (on, off)
}

/// Block kind without materialising the blocks. The zero operator counts as block-diagonal.
pub fn block_kind(op: &FockOperator, tol: f64) -> BlockKind {
    let (on, off) = sector_weights(op);
    if off <= tol {
        BlockKind::BlockDiagonal
    } else if on <= tol {
        BlockKind::BlockAntiDiagonal
    } else {
        BlockKind::Neither
    }
}

pub fn classify_operator(op: &FockOperator, tol: f64) -> BlockForm {
    let kind = block_kind(op, tol);
    let sorted = to_parity_basis(op).expect("basis conversion keeps dimensions");
    let m = sorted.matrix();
    let e = sector_len(op.modes().len(), Parity::Even);
    let o = m.nrows() - e;
    BlockForm {
        kind,
        even_even: m.view((0, 0), (e, e)).into_owned(),
        even_odd: m.view((0, e), (e, o)).into_owned(),
        odd_even: m.view((e, 0), (o, e)).into_owned(),
        odd_odd: m.view((e, e), (o, o)).into_owned(),
    }
}

/// First condition a candidate fails.
#[derive(Clone, Debug, PartialEq)]
pub enum SsrViolation {
    NotHermitian {
        deviation: f64,
    },
    NotPositive {
        min_eigenvalue: f64,
    },
    TraceNotOne {
        trace: C64,
    },
    /// Coherence between even and odd sectors.
    ParityCoherence {
        max_entry: f64,
    },
    ParityFlip,
    NotIdempotent {
        deviation: f64,
    },
    NotUnitary {
        deviation: f64,
    },
}

impl fmt::Display for SsrViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SsrViolation::NotHermitian { deviation } => write!(f, "not Hermitian (deviation {deviation:.3e})"),
            SsrViolation::NotPositive { min_eigenvalue } => {
                write!(f, "not positive semi-definite (min eigenvalue {min_eigenvalue:.3e})")
            }
            SsrViolation::TraceNotOne { trace } => write!(f, "trace is {:.6}{:+.6}i, expected 1", trace.re, trace.im),
            SsrViolation::ParityCoherence { max_entry } => {
                write!(f, "parity SSR violated: even/odd coherence of magnitude {max_entry:.3e}")
            }
            SsrViolation::ParityFlip => write!(f, "parity SSR violated: operator maps even states to odd states"),
            SsrViolation::NotIdempotent { deviation } => write!(f, "not idempotent (deviation {deviation:.3e})"),
            SsrViolation::NotUnitary { deviation } => write!(f, "not unitary (deviation {deviation:.3e})"),
        }
    }
}

impl SsrViolation {
    /// True when the failure is the super-selection rule itself rather than a generic matrix property.
    pub fn is_parity_violation(&self) -> bool {
        matches!(self, SsrViolation::ParityCoherence { .. } | SsrViolation::ParityFlip)
    }
}

/// Outcome of an SSR validity check.
#[derive(Clone, Debug, PartialEq)]
pub struct SsrVerdict {
    pub violation: Option<SsrViolation>,
}

impl SsrVerdict {
    fn ok() -> Self {
        SsrVerdict { violation: None }
    }

    fn fail(v: SsrViolation) -> Self {
        SsrVerdict { violation: Some(v) }
    }

    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violation {
            None => Ok(()),
            Some(v) if v.is_parity_violation() => Err(FermiError::NotSsr(v.to_string())),
            Some(SsrViolation::NotPositive { min_eigenvalue }) => Err(FermiError::NotPositive { min_eigenvalue }),
            Some(SsrViolation::NotUnitary { deviation }) => Err(FermiError::NotUnitary { deviation }),
            Some(v) => Err(FermiError::InvalidArgument(v.to_string())),
        }
    }
}

fn parity_check(op: &FockOperator, tol: f64) -> Option<SsrViolation> {
    let (on, off) = sector_weights(op);
    if off <= tol {
        None
    } else if on <= tol {
        Some(SsrViolation::ParityFlip)
    } else {
        Some(SsrViolation::ParityCoherence { max_entry: off })
    }
}

/// Hermitian, positive semi-definite, unit trace and block-diagonal in B′.
pub fn is_ssr_state(rho: &FockOperator, tol: f64) -> SsrVerdict {
    let h = rho.hermiticity_deviation();
    if h > tol {
        return SsrVerdict::fail(SsrViolation::NotHermitian { deviation: h });
    }
    let min = linalg::min_eigenvalue(rho.matrix());
    if min < -tol {
        return SsrVerdict::fail(SsrViolation::NotPositive { min_eigenvalue: min });
    }
    let tr = rho.trace();
    if (tr - ONE).norm() > tol {
        return SsrVerdict::fail(SsrViolation::TraceNotOne { trace: tr });
    }
    match parity_check(rho, tol) {
        Some(v) => SsrVerdict::fail(v),
        None => SsrVerdict::ok(),
    }
}

pub fn check_ssr_observable(a: &FockOperator, tol: f64) -> SsrVerdict {
    let h = a.hermiticity_deviation();
    if h > tol {
        return SsrVerdict::fail(SsrViolation::NotHermitian { deviation: h });
    }
    match parity_check(a, tol) {
        Some(v) => SsrVerdict::fail(v),
        None => SsrVerdict::ok(),
    }
}

pub fn check_ssr_projector(p: &FockOperator, tol: f64) -> SsrVerdict {
    let h = p.hermiticity_deviation();
    if h > tol {
        return SsrVerdict::fail(SsrViolation::NotHermitian { deviation: h });
    }
    let d = max_abs(&(p.matrix() * p.matrix() - p.matrix()));
    if d > tol {
        return SsrVerdict::fail(SsrViolation::NotIdempotent { deviation: d });
    }
    match parity_check(p, tol) {
        Some(v) => SsrVerdict::fail(v),
        None => SsrVerdict::ok(),
    }
}

/// Unitary and block-diagonal. Parity-flipping unitaries are rejected.
pub fn check_ssr_unitary(u: &FockOperator, tol: f64) -> SsrVerdict {
    let d = linalg::unitarity_deviation(u.matrix());
    if d > tol {
        return SsrVerdict::fail(SsrViolation::NotUnitary { deviation: d });
    }
    match parity_check(u, tol) {
        Some(v) => SsrVerdict::fail(v),
        None => SsrVerdict::ok(),
    }
}

pub fn is_ssr_observable(a: &FockOperator, tol: f64) -> bool {
    check_ssr_observable(a, tol).is_valid()
}

pub fn is_ssr_projector(p: &FockOperator, tol: f64) -> bool {
    check_ssr_projector(p, tol).is_valid()
}

pub fn is_ssr_unitary(u: &FockOperator, tol: f64) -> bool {
    check_ssr_unitary(u, tol).is_valid()
}

/// Projector onto one parity sector.
pub fn parity_projector(modes: &ModeSet, parity: Parity) -> FockOperator {
    let d = modes.dim();
    let diag =
        crate::fock::CVector::from_fn(d, |i, _| if Parity::of_index(i) == parity { ONE } else { C64::from(0.0) });
    FockOperator::new(modes.clone(), CMatrix::from_diagonal(&diag)).expect("dimension matches mode set")
}

/// Eigendecomposition of a block-diagonal Hermitian operator with eigenvectors of definite parity.
pub fn ssr_eigen(op: &FockOperator, tol: f64) -> Result<Vec<SectorEigenPair>> {
    op.require_canonical()?;
    if let Some(v) = parity_check(op, tol) {
        return Err(FermiError::NotSsr(v.to_string()));
    }
    Ok(linalg::sector_eigen(op.matrix(), is_odd_index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{parity_operator, CVector, FockState};

    fn modes(n: usize) -> ModeSet {
        ModeSet::first(n).unwrap()
    }

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(v.len(), v.iter().map(|&x| C64::from(x))))
    }

    #[test]
    fn parity_map_is_stable_sort() {
        let map = ParityBasisMap::new(3);
        let order: Vec<usize> = (0..8).map(|p| map.canonical(p)).collect();
        assert_eq!(order, vec![0, 3, 5, 6, 1, 2, 4, 7]);
        assert_eq!(map.even_count(), 4);
    }

    #[test]
    fn diagonal_in_parity_basis() {
        let op = FockOperator::new(modes(2), diag(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        let sorted = to_parity_basis(&op).unwrap();
        assert_eq!(sorted.matrix(), &diag(&[1.0, 4.0, 2.0, 3.0]));
        assert_eq!(from_parity_basis(&sorted).unwrap(), op);
    }

    #[test]
    fn identity_is_invariant_under_reordering() {
        let id = FockOperator::identity(&modes(3));
        assert_eq!(to_parity_basis(&id).unwrap().matrix(), id.matrix());
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_operator(&FockOperator::identity(&modes(2)), 1e-12).kind, BlockKind::BlockDiagonal);
        let f = FockOperator::annihilation(&modes(1), 1).unwrap();
        assert_eq!(classify_operator(&f, 1e-12).kind, BlockKind::BlockAntiDiagonal);
        let m = modes(1);
        let vac = FockState::vacuum(&m);
        let one = FockState::from_pattern(&m, "1").unwrap();
        let mixed = vac.projector().try_add(&FockOperator::ket_bra(&vac, &one).unwrap()).unwrap();
        assert_eq!(classify_operator(&mixed, 1e-12).kind, BlockKind::Neither);
    }

    #[test]
    fn block_form_reassembles() {
        let m = CMatrix::from_fn(8, 8, |i, j| C64::new(i as f64, j as f64));
        let op = FockOperator::new(modes(3), m).unwrap();
        let form = classify_operator(&op, 1e-12);
        assert_eq!(form.reassemble(), to_parity_basis(&op).unwrap().into_matrix());
    }

    #[test]
    fn state_checks() {
        let m = modes(1);
        let vac = FockState::vacuum(&m);
        let one = FockState::from_pattern(&m, "1").unwrap();
        assert!(is_ssr_state(&vac.projector(), 1e-10).is_valid());
        let plus = vac.plus(&one).unwrap().normalized();
        let verdict = is_ssr_state(&plus.projector(), 1e-10);
        assert!(matches!(verdict.violation, Some(SsrViolation::ParityCoherence { .. })));
        assert!(verdict.violation.unwrap().to_string().contains("parity SSR violated"));
        let mixed = vac.projector().try_add(&one.projector()).unwrap().scaled(C64::from(0.5));
        assert!(is_ssr_state(&mixed, 1e-10).is_valid());
    }

    #[test]
    fn unitary_and_projector_checks() {
        let id = FockOperator::identity(&modes(2));
        assert!(is_ssr_observable(&id, 1e-12));
        assert!(is_ssr_projector(&id, 1e-12));
        assert!(is_ssr_unitary(&id, 1e-12));

        let m = modes(1);
        let vac = FockState::vacuum(&m);
        let one = FockState::from_pattern(&m, "1").unwrap();
        let x =
            FockOperator::ket_bra(&vac, &one).unwrap().try_add(&FockOperator::ket_bra(&one, &vac).unwrap()).unwrap();
        assert!(crate::linalg::unitarity_deviation(x.matrix()) < 1e-15);
        assert!(!is_ssr_unitary(&x, 1e-12));

        let m2 = modes(2);
        let p = FockState::vacuum(&m2)
            .projector()
            .try_add(&FockState::from_pattern(&m2, "11").unwrap().projector())
            .unwrap();
        assert!(is_ssr_projector(&p, 1e-12));
    }

    #[test]
    fn parity_operator_commutes_with_block_diagonal() {
        let pi = parity_operator(&modes(2));
        let id = FockOperator::identity(&modes(2));
        assert_eq!(pi.conjugate(&id).unwrap(), id);
    }

    #[test]
    fn compose_kinds() {
        use BlockKind::*;
        assert_eq!(BlockAntiDiagonal.compose(BlockAntiDiagonal), BlockDiagonal);
        assert_eq!(BlockDiagonal.compose(BlockAntiDiagonal), BlockAntiDiagonal);
        assert_eq!(Neither.compose(BlockDiagonal), Neither);
    }

    #[test]
    fn sector_projectors_sum_to_identity() {
        let m = modes(3);
        let s = parity_projector(&m, Parity::Even).try_add(&parity_projector(&m, Parity::Odd)).unwrap();
        assert_eq!(s, FockOperator::identity(&m));
    }
}
