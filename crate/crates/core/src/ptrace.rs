//! The signed fermionic partial trace.
//!
//! Tracing mode `m` sends the monomial
//! `(f₁†)^{s₁}…(f_N†)^{s_N}|Ω⟩⟨Ω|f_N^{r_N}…f₁^{r₁}` to
//! `δ(s_m, r_m)·(−1)^k` times the same monomial with mode `m` removed, where
//! `k = s_m·Σ_{j>m} s_j + r_m·Σ_{j>m} r_j`.

use rand::Rng;

use crate::error::{FermiError, Result};
use crate::fock::{embed_local, wedge_operators, CMatrix, FockOperator, FockState, ModeSet, C64, ZERO};

/// Removes bit `p` from `s`, shifting higher bits down.
#[inline]
fn remove_bit(s: usize, p: usize) -> usize {
    let low = (1usize << p) - 1;
    (s & low) | ((s >> (p + 1)) << p)
}

/// Traces out a single mode.
pub fn ptrace_mode(rho: &FockOperator, mode: usize) -> Result<FockOperator> {
    rho.require_canonical()?;
    let p = rho.modes().position(mode).ok_or(FermiError::UnknownMode(mode))?;
    let remaining = rho.modes().difference(&ModeSet::new([mode])?);
    let dim = rho.dim();
    let bit = 1usize << p;
    let m = rho.matrix();
    let mut out = CMatrix::zeros(dim / 2, dim / 2);
    for c in 0..dim {
        let rc = c & bit != 0;
        let kc = if rc { (c >> (p + 1)).count_ones() } else { 0 };
        for r in 0..dim {
            if (r & bit != 0) != rc {
                continue;
            }
            let x = m[(r, c)];
            if x == ZERO {
                continue;
            }
            let kr = if rc { (r >> (p + 1)).count_ones() } else { 0 };
            let v = if (kr + kc) % 2 == 1 { -x } else { x };
            out[(remove_bit(r, p), remove_bit(c, p))] += v;
        }
    }
    FockOperator::new(remaining, out)
}

/// Traces out modes one at a time in the given order.
pub fn ptrace_in_order(rho: &FockOperator, order: &[usize]) -> Result<FockOperator> {
    let mut cur = rho.clone();
    for &m in order {
        cur = ptrace_mode(&cur, m)?;
    }
    Ok(cur)
}

/// Traces out every mode of `traced`. The result does not depend on the order;
/// modes are removed from the highest label down.
pub fn ptrace(rho: &FockOperator, traced: &ModeSet) -> Result<FockOperator> {
    if let Some(&m) = traced.labels().iter().find(|m| !rho.modes().contains(**m)) {
        return Err(FermiError::UnknownMode(m));
    }
    let order: Vec<usize> = traced.labels().iter().rev().copied().collect();
    ptrace_in_order(rho, &order)
}

/// Keeps only `kept`, tracing out the complement.
pub fn reduce_to(rho: &FockOperator, kept: &ModeSet) -> Result<FockOperator> {
    if !kept.is_subset(rho.modes()) {
        let bad = kept.labels().iter().find(|m| !rho.modes().contains(**m)).copied().unwrap_or(0);
        return Err(FermiError::UnknownMode(bad));
    }
    ptrace(rho, &rho.modes().difference(kept))
}

/// Which factor of `|a⟩⟨b| ∧ |c⟩⟨d|` is traced away.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TracedFactor {
    /// Trace over the modes of `a, b`, leaving `⟨b|a⟩·|c⟩⟨d|`.
    First,
    /// Trace over the modes of `c, d`, leaving `⟨d|c⟩·|a⟩⟨b|`.
    Second,
}

/// Partial trace of a product monomial by inner product instead of the sign rule.
///
/// All four states must have definite parity; that is what makes the
/// reordering signs cancel.
pub fn product_trace_shortcut(
    a: &FockState,
    b: &FockState,
    c: &FockState,
    d: &FockState,
    traced: TracedFactor,
) -> Result<FockOperator> {
    for (name, st) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        if st.definite_parity(1e-12).is_none() {
            return Err(FermiError::NotSsr(format!("factor {name} has no definite parity")));
        }
    }
    if !a.modes().is_disjoint(c.modes()) {
        return Err(FermiError::OverlappingModes);
    }
    Ok(match traced {
        TracedFactor::First => FockOperator::ket_bra(c, d)?.scaled(b.inner(a)?),
        TracedFactor::Second => FockOperator::ket_bra(a, b)?.scaled(d.inner(c)?),
    })
}

/// Largest `|Tr((O_A ∧ I_B) ρ_AB) − Tr(O_A ρ_A)|` over `trials` random SSR observables `O_A`.
pub fn consistency_check<R: Rng + ?Sized>(
    rho_ab: &FockOperator,
    rho_a: &FockOperator,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let a_modes = rho_a.modes();
    if !a_modes.is_subset(rho_ab.modes()) {
        return Err(FermiError::ModeSetMismatch {
            expected: rho_ab.modes().labels().to_vec(),
            found: a_modes.labels().to_vec(),
        });
    }
    let b_modes = rho_ab.modes().difference(a_modes);
    let mut worst = 0.0f64;
    for _ in 0..trials.max(1) {
        let o = crate::random::ssr_observable(rng, a_modes);
        let global = embed_local(&o, &b_modes)?;
        let lhs: C64 = (global.matrix() * rho_ab.matrix()).trace();
        let rhs: C64 = (o.matrix() * rho_a.matrix()).trace();
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// `ρ_A ∧ ρ_B` built from the two marginals of `rho` across `a_modes`.
pub fn product_of_marginals(rho: &FockOperator, a_modes: &ModeSet) -> Result<FockOperator> {
    let b_modes = rho.modes().difference(a_modes);
    let rho_a = ptrace(rho, &b_modes)?;
    let rho_b = ptrace(rho, a_modes)?;
    wedge_operators(&rho_a, &rho_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::CVector;
    use crate::linalg::hermitian_eigenvalues;
    use crate::random::{seeded, ssr_density};

    fn modes(n: usize) -> ModeSet {
        ModeSet::first(n).unwrap()
    }

    fn state(m: &ModeSet, pattern: &str) -> FockState {
        FockState::from_pattern(m, pattern).unwrap()
    }

    #[test]
    fn trace_top_mode_of_pair() {
        let m = modes(2);
        let rho = state(&m, "11").projector();
        let out = ptrace_mode(&rho, 2).unwrap();
        assert_eq!(out, state(&ModeSet::new([1]).unwrap(), "1").projector());
    }

    #[test]
    fn trace_bottom_mode_of_pair() {
        let m = modes(2);
        let rho = state(&m, "11").projector();
        let out = ptrace_mode(&rho, 1).unwrap();
        assert_eq!(out, state(&ModeSet::new([2]).unwrap(), "1").projector());
    }

    #[test]
    fn off_diagonal_in_traced_mode_vanishes() {
        let m = modes(2);
        let op = FockOperator::ket_bra(&state(&m, "10"), &state(&m, "01")).unwrap();
        let out = ptrace_mode(&op, 1).unwrap();
        assert_eq!(out.matrix().norm(), 0.0);
    }

    #[test]
    fn sign_appears_for_coherence_across_higher_mode() {
        // both patterns have one occupied mode above mode 1, so the two signs cancel
        let m = modes(3);
        let op = FockOperator::ket_bra(&state(&m, "101"), &state(&m, "110")).unwrap();
        let out = ptrace_mode(&op, 1).unwrap();
        let rest = ModeSet::new([2, 3]).unwrap();
        let expected = FockOperator::ket_bra(&state(&rest, "01"), &state(&rest, "10")).unwrap();
        assert_eq!(out, expected);
        let op2 = FockOperator::ket_bra(&state(&m, "101"), &state(&m, "100")).unwrap();
        let out2 = ptrace_mode(&op2, 1).unwrap();
        let expected2 =
            FockOperator::ket_bra(&state(&rest, "01"), &state(&rest, "00")).unwrap().scaled(C64::from(-1.0));
        assert_eq!(out2, expected2);
    }

    #[test]
    fn empty_and_full_traces() {
        let m = modes(3);
        let rho = ssr_density(&mut seeded(5), &m);
        assert_eq!(ptrace(&rho, &ModeSet::empty()).unwrap(), rho);
        let full = ptrace(&rho, &m).unwrap();
        assert_eq!(full.dim(), 1);
        assert!((full.matrix()[(0, 0)] - rho.trace()).norm() < 1e-14);
    }

    #[test]
    fn unknown_mode_rejected() {
        let rho = FockOperator::identity(&modes(2));
        assert_eq!(ptrace_mode(&rho, 5), Err(FermiError::UnknownMode(5)));
        assert_eq!(ptrace(&rho, &ModeSet::new([3]).unwrap()), Err(FermiError::UnknownMode(3)));
    }

    #[test]
    fn order_independence() {
        let m = modes(4);
        let rho = ssr_density(&mut seeded(11), &m);
        let a = ptrace_in_order(&rho, &[1, 3]).unwrap();
        let b = ptrace_in_order(&rho, &[3, 1]).unwrap();
        assert!(a.max_deviation(&b).unwrap() < 1e-12);
    }

    #[test]
    fn shortcut_examples() {
        let a_modes = ModeSet::new([1]).unwrap();
        let b_modes = ModeSet::new([2]).unwrap();
        let vac_a = FockState::vacuum(&a_modes);
        let one_b = state(&b_modes, "1");
        let out = product_trace_shortcut(&vac_a, &vac_a, &one_b, &one_b, TracedFactor::Second).unwrap();
        assert_eq!(out, vac_a.projector());

        let b2 = ModeSet::new([2, 3]).unwrap();
        let one_a = state(&a_modes, "1");
        let out =
            product_trace_shortcut(&one_a, &one_a, &FockState::vacuum(&b2), &state(&b2, "11"), TracedFactor::First)
                .unwrap();
        assert_eq!(out, FockOperator::ket_bra(&FockState::vacuum(&b2), &state(&b2, "11")).unwrap());
    }

    #[test]
    fn shortcut_rejects_indefinite_parity() {
        let m = ModeSet::new([1]).unwrap();
        let plus = FockState::new(m.clone(), CVector::from_element(2, C64::from(0.5f64.sqrt()))).unwrap();
        let other = FockState::vacuum(&ModeSet::new([2]).unwrap());
        assert!(matches!(
            product_trace_shortcut(&plus, &plus, &other, &other, TracedFactor::First),
            Err(FermiError::NotSsr(_))
        ));
    }

    #[test]
    fn corrupted_marginal_is_detected() {
        let mut rng = seeded(21);
        let m = modes(4);
        let rho = ssr_density(&mut rng, &m);
        let a = ModeSet::new([1, 2]).unwrap();
        let rho_a = reduce_to(&rho, &a).unwrap();
        assert!(consistency_check(&rho, &rho_a, 100, &mut rng).unwrap() < 1e-10);
        // swap the weights of |Ω⟩ and |1∧2⟩
        let mut bad = rho_a.matrix().clone();
        bad.swap_rows(0, 3);
        bad.swap_columns(0, 3);
        let bad = FockOperator::new(a, bad).unwrap();
        assert!(consistency_check(&rho, &bad, 100, &mut rng).unwrap() > 0.01);
        assert!(hermitian_eigenvalues(bad.matrix()).iter().all(|&l| l > -1e-12));
    }
}
