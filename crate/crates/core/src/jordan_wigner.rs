//! The canonical Jordan–Wigner map to qubits and a comparison of fermionic and
//! qubit partial traces.
//!
//! Mode `i` becomes qubit `i`, with qubit 1 as the most significant bit of a
//! computational-basis index. `f_i ↦ −(σ_z^{⊗ i−1}) ⊗ |0⟩⟨1| ⊗ I`, so a basis
//! element with particle number `n` picks up the phase `(−1)^n`.

use crate::error::{FermiError, Result};
use crate::fock::{CMatrix, CVector, FockOperator, FockState, ModeSet, C64};
use crate::linalg;
use crate::ptrace::ptrace;

/// Computational-basis index of occupation pattern `s` on `n` modes.
pub fn qubit_index(s: usize, n: usize) -> usize {
    (0..n).filter(|p| s >> p & 1 == 1).fold(0, |acc, p| acc | 1 << (n - 1 - p))
}

fn phase(s: usize) -> f64 {
    if s.count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Pure state of `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitState {
    pub n_qubits: usize,
    pub amps: CVector,
}

impl QubitState {
    /// Bitstring of a basis index, qubit 1 first.
    pub fn label(&self, index: usize) -> String {
        (0..self.n_qubits).map(|q| if index >> (self.n_qubits - 1 - q) & 1 == 1 { '1' } else { '0' }).collect()
    }
}

/// Density matrix of `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitDensity {
    pub n_qubits: usize,
    pub matrix: CMatrix,
}

impl QubitDensity {
    pub fn new(n_qubits: usize, matrix: CMatrix) -> Result<Self> {
        let d = 1usize << n_qubits;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(FermiError::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        Ok(QubitDensity { n_qubits, matrix })
    }

    pub fn spectrum(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn entropy(&self) -> f64 {
        linalg::entropy_bits(&self.spectrum())
    }
}

pub fn jw_map_state(psi: &FockState) -> Result<QubitState> {
    if psi.basis() != crate::fock::Basis::Canonical {
        return Err(FermiError::BasisMismatch);
    }
    let n = psi.modes().len();
    let mut amps = CVector::zeros(psi.dim());
    for (s, a) in psi.amplitudes().iter().enumerate() {
        amps[qubit_index(s, n)] = a * phase(s);
    }
    Ok(QubitState { n_qubits: n, amps })
}

/// `JW·ρ·JW†`. For SSR operators the phases cancel and only the index order changes.
pub fn jw_map_operator(rho: &FockOperator) -> Result<QubitDensity> {
    if rho.basis() != crate::fock::Basis::Canonical {
        return Err(FermiError::BasisMismatch);
    }
    let n = rho.modes().len();
    let d = rho.dim();
    let m = rho.matrix();
    let mut out = CMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            out[(qubit_index(r, n), qubit_index(c, n))] = m[(r, c)] * (phase(r) * phase(c));
        }
    }
    QubitDensity::new(n, out)
}

/// Ordinary tensor-factor partial trace over the given qubits (labels `1..=n`).
pub fn qubit_ptrace(rho: &QubitDensity, traced: &[usize]) -> Result<QubitDensity> {
    let n = rho.n_qubits;
    let mut traced_set = traced.to_vec();
    traced_set.sort_unstable();
    traced_set.dedup();
    if traced_set.len() != traced.len() {
        return Err(FermiError::InvalidArgument("qubit listed twice".into()));
    }
    if let Some(&q) = traced_set.iter().find(|&&q| q == 0 || q > n) {
        return Err(FermiError::InvalidArgument(format!("qubit {q} is not in 1..={n}")));
    }
    // bit position of qubit q inside an index
    let bit = |q: usize| n - q;
    let kept: Vec<usize> = (1..=n).filter(|q| !traced_set.contains(q)).collect();
    let nk = kept.len();
    let nt = traced_set.len();
    let compose = |k: usize, t: usize| -> usize {
        let mut idx = 0;
        for (i, &q) in kept.iter().enumerate() {
            if k >> (nk - 1 - i) & 1 == 1 {
                idx |= 1 << bit(q);
            }
        }
        for (i, &q) in traced_set.iter().enumerate() {
            if t >> (nt - 1 - i) & 1 == 1 {
                idx |= 1 << bit(q);
            }
        }
        idx
    };
    let dk = 1usize << nk;
    let mut out = CMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = C64::from(0.0);
            for t in 0..1usize << nt {
                acc += rho.matrix[(compose(a, t), compose(b, t))];
            }
            out[(a, b)] = acc;
        }
    }
    QubitDensity::new(nk, out)
}

/// Both orders of "trace out modes" and "map to qubits".
#[derive(Clone, Debug)]
pub struct InconsistencyReport {
    /// Fermionic partial trace first, then the qubit map.
    pub fermionic_first: QubitDensity,
    /// Qubit map first, then the qubit partial trace.
    pub qubit_first: QubitDensity,
    pub fermionic_spectrum: Vec<f64>,
    pub qubit_spectrum: Vec<f64>,
    pub fermionic_entropy: f64,
    pub qubit_entropy: f64,
}

impl InconsistencyReport {
    /// Largest entry of the difference between the two reduced states.
    pub fn discrepancy(&self) -> f64 {
        crate::fock::max_abs(&(&self.fermionic_first.matrix - &self.qubit_first.matrix))
    }
}

/// Reduces `rho` over `traced` along both routes.
pub fn demonstrate_inconsistency(rho: &FockOperator, traced: &ModeSet) -> Result<InconsistencyReport> {
    let reduced = ptrace(rho, traced)?;
    let fermionic_first = jw_map_operator(&reduced)?;
    let positions: Vec<usize> = traced.positions_in(rho.modes())?.into_iter().map(|p| p + 1).collect();
    let qubit_first = qubit_ptrace(&jw_map_operator(rho)?, &positions)?;
    let fermionic_spectrum = fermionic_first.spectrum();
    let qubit_spectrum = qubit_first.spectrum();
    Ok(InconsistencyReport {
        fermionic_entropy: linalg::entropy_bits(&fermionic_spectrum),
        qubit_entropy: linalg::entropy_bits(&qubit_spectrum),
        fermionic_first,
        qubit_first,
        fermionic_spectrum,
        qubit_spectrum,
    })
}

/// Four-mode state `(I + λ·C)/16`, where `C` couples every pair of occupation
/// patterns that differ exactly in modes 1 and 4 with coefficient `+1`.
///
/// At `λ = 1` tracing modes 2 and 3 gives `I/4` fermionically but a rank-two
/// state on the qubit side. Positive for `|λ| ≤ 1`.
pub fn outer_pair_coherent_state(lambda: f64) -> Result<FockOperator> {
    let modes = ModeSet::first(4)?;
    let flip = 0b1001;
    let mut m = CMatrix::identity(16, 16);
    for s in 0..16usize {
        m[(s, s ^ flip)] += C64::from(lambda);
    }
    FockOperator::new(modes, m / C64::from(16.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::wedge_operators;
    use crate::random::{seeded, ssr_density};

    fn modes(n: usize) -> ModeSet {
        ModeSet::first(n).unwrap()
    }

    #[test]
    fn vacuum_and_single_particle() {
        let m = modes(4);
        let q = jw_map_state(&FockState::vacuum(&m)).unwrap();
        assert_eq!(q.amps[0], C64::from(1.0));
        assert_eq!(q.label(0), "0000");
        let one = jw_map_state(&FockState::from_pattern(&m, "1000").unwrap()).unwrap();
        assert_eq!(one.amps[8], C64::from(-1.0));
        assert_eq!(one.label(8), "1000");
        let both = jw_map_state(&FockState::from_pattern(&m, "1100").unwrap()).unwrap();
        assert_eq!(both.amps[12], C64::from(1.0));
    }

    #[test]
    fn ssr_operator_entries_are_unchanged() {
        let m = modes(2);
        let rho = ssr_density(&mut seeded(1), &m);
        let q = jw_map_operator(&rho).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(q.matrix[(qubit_index(r, 2), qubit_index(c, 2))], rho.matrix()[(r, c)]);
            }
        }
    }

    #[test]
    fn bell_state_marginal() {
        let mut m = CMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            m[(r, c)] = C64::from(0.5);
        }
        let rho = QubitDensity::new(2, m).unwrap();
        let r = qubit_ptrace(&rho, &[2]).unwrap();
        assert!((r.matrix - CMatrix::identity(2, 2) * C64::from(0.5)).norm() < 1e-15);
        let full = qubit_ptrace(&rho, &[1, 2]).unwrap();
        assert!((full.matrix[(0, 0)] - C64::from(1.0)).norm() < 1e-15);
    }

    #[test]
    fn product_trace_keeps_left_factor() {
        let a = CMatrix::from_fn(2, 2, |i, j| C64::new((i + 1) as f64, j as f64 - i as f64));
        let b = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::from(0.25), C64::from(0.75)]));
        let rho = QubitDensity::new(2, a.kronecker(&b)).unwrap();
        assert!((qubit_ptrace(&rho, &[2]).unwrap().matrix - a).norm() < 1e-14);
    }

    #[test]
    fn outer_pair_state_routes_disagree() {
        let rho = outer_pair_coherent_state(1.0).unwrap();
        let report = demonstrate_inconsistency(&rho, &ModeSet::new([2, 3]).unwrap()).unwrap();
        assert!((report.fermionic_entropy - 2.0).abs() < 1e-12);
        assert!((report.qubit_entropy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_states_agree_on_both_routes() {
        let mut rng = seeded(4);
        let a = ModeSet::new([1, 2]).unwrap();
        let b = ModeSet::new([3, 4]).unwrap();
        let rho = wedge_operators(&ssr_density(&mut rng, &a), &ssr_density(&mut rng, &b)).unwrap();
        let report = demonstrate_inconsistency(&rho, &b).unwrap();
        assert!(report.discrepancy() < 1e-10);
    }
}
