//! A control qubit plus two fermionic parties, used to show that parity-flipping
//! local unitaries would let one party signal to the other.
//!
//! Protocol: prepare `|+⟩⟨+| ⊗ ρ_AB`; apply `U_B`; apply `U_A` controlled on the
//! qubit; undo `U_B`; undo the controlled `U_A`. The qubit ends in `|+⟩` when the
//! two local unitaries commute and in `|−⟩` when they anticommute.

use crate::error::{FermiError, Result};
use crate::fock::{embed_local, max_abs, CMatrix, FockOperator, ModeSet, C64};
use crate::linalg::unitarity_deviation;

/// State of qubit ⊗ fermions, stored as the 2×2 grid of fermionic blocks `R_{qq'}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridState {
    modes: ModeSet,
    blocks: [[CMatrix; 2]; 2],
}

impl HybridState {
    /// `|+⟩⟨+| ⊗ ρ`.
    pub fn plus_state(rho: &FockOperator) -> Self {
        let half = rho.matrix() * C64::from(0.5);
        HybridState { modes: rho.modes().clone(), blocks: [[half.clone(), half.clone()], [half.clone(), half]] }
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    /// Applies `|0⟩⟨0| ⊗ X₀ + |1⟩⟨1| ⊗ X₁`.
    pub fn apply_controlled(&mut self, x0: &CMatrix, x1: &CMatrix) {
        let xs = [x0, x1];
        for q in 0..2 {
            for qp in 0..2 {
                self.blocks[q][qp] = xs[q] * &self.blocks[q][qp] * xs[qp].adjoint();
            }
        }
    }

    /// Applies `I_Q ⊗ X`.
    pub fn apply_fermionic(&mut self, x: &CMatrix) {
        self.apply_controlled(x, x);
    }

    /// Qubit marginal: `[q][q'] = Tr R_{qq'}`.
    pub fn qubit_marginal(&self) -> CMatrix {
        CMatrix::from_fn(2, 2, |q, qp| self.blocks[q][qp].trace())
    }

    /// Fermionic marginal: `R₀₀ + R₁₁`.
    pub fn fermionic_marginal(&self) -> Result<FockOperator> {
        FockOperator::new(self.modes.clone(), &self.blocks[0][0] + &self.blocks[1][1])
    }

    /// Full matrix with the qubit as the most significant factor.
    pub fn to_matrix(&self) -> CMatrix {
        let d = self.blocks[0][0].nrows();
        let mut m = CMatrix::zeros(2 * d, 2 * d);
        for q in 0..2 {
            for qp in 0..2 {
                m.view_mut((q * d, qp * d), (d, d)).copy_from(&self.blocks[q][qp]);
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolOutcome {
    /// Final reduced state of the control qubit.
    pub qubit: CMatrix,
    /// Final reduced state of the fermionic modes.
    pub fermionic: FockOperator,
}

impl ProtocolOutcome {
    pub fn signal_strength(&self) -> f64 {
        signal_strength(&self.qubit)
    }
}

fn check_unitary(u: &FockOperator, name: &str) -> Result<()> {
    let dev = unitarity_deviation(u.matrix());
    if dev > 1e-9 {
        return Err(FermiError::NotUnitary { deviation: dev })
            .map_err(|e| FermiError::InvalidArgument(format!("{name}: {e}")));
    }
    Ok(())
}

/// Runs the four-step protocol. `u_a` acts on `a_modes`; `u_b` (if any) on the remaining modes of `rho_ab`.
///
/// Parity-flipping unitaries are accepted on purpose.
pub fn run_protocol(
    rho_ab: &FockOperator,
    a_modes: &ModeSet,
    u_a: &FockOperator,
    u_b: Option<&FockOperator>,
) -> Result<ProtocolOutcome> {
    if !a_modes.is_subset(rho_ab.modes()) {
        return Err(FermiError::InvalidPartition(format!("{a_modes} is not a subset of {}", rho_ab.modes())));
    }
    let b_modes = rho_ab.modes().difference(a_modes);
    if u_a.modes() != a_modes {
        return Err(FermiError::ModeSetMismatch {
            expected: a_modes.labels().to_vec(),
            found: u_a.modes().labels().to_vec(),
        });
    }
    check_unitary(u_a, "U_A")?;
    let d = rho_ab.dim();
    let id = CMatrix::identity(d, d);
    let va = embed_local(u_a, &b_modes)?.into_matrix();
    let vb = match u_b {
        None => None,
        Some(u) => {
            if u.modes() != &b_modes {
                return Err(FermiError::ModeSetMismatch {
                    expected: b_modes.labels().to_vec(),
                    found: u.modes().labels().to_vec(),
                });
            }
            check_unitary(u, "U_B")?;
            Some(embed_local(u, a_modes)?.into_matrix())
        }
    };

    let mut st = HybridState::plus_state(rho_ab);
    if let Some(vb) = &vb {
        st.apply_fermionic(vb);
    }
    st.apply_controlled(&id, &va);
    if let Some(vb) = &vb {
        st.apply_fermionic(&vb.adjoint());
    }
    st.apply_controlled(&id, &va.adjoint());
    Ok(ProtocolOutcome { qubit: st.qubit_marginal(), fermionic: st.fermionic_marginal()? })
}

/// `⟨−|ρ|−⟩`: 0 for `|+⟩⟨+|`, 1 for `|−⟩⟨−|`.
pub fn signal_strength(qubit: &CMatrix) -> f64 {
    (0.5 * (qubit[(0, 0)] + qubit[(1, 1)] - qubit[(0, 1)] - qubit[(1, 0)])).re
}

/// `|+⟩⟨+|` and `|−⟩⟨−|`.
pub fn plus_projector() -> CMatrix {
    CMatrix::from_element(2, 2, C64::from(0.5))
}

pub fn minus_projector() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::from(0.5), C64::from(-0.5), C64::from(-0.5), C64::from(0.5)])
}

/// Largest entry of `(U_A∧I)(U_B∧I) + (U_B∧I)(U_A∧I)` and of the commutator; returns `(anticommutator, commutator)`.
pub fn graded_commutators(u_a: &FockOperator, u_b: &FockOperator) -> Result<(f64, f64)> {
    let a = embed_local(u_a, u_b.modes())?;
    let b = embed_local(u_b, u_a.modes())?;
    let ab = a.try_mul(&b)?.into_matrix();
    let ba = b.try_mul(&a)?.into_matrix();
    Ok((max_abs(&(&ab + &ba)), max_abs(&(&ab - &ba))))
}
