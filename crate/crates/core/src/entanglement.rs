//! Schmidt decomposition, purification, entropy and the three notions of an
//! uncorrelated bipartite state.

use rand::Rng;

use crate::error::{FermiError, Result};
use crate::fock::{
    embed_local, gather, is_odd_index, scatter, wedge_operators, wedge_states, CMatrix, CVector, FockOperator,
    FockState, ModeSet, Parity, C64,
};
use crate::linalg::{self, fix_phase};
use crate::ptrace::ptrace;
use crate::random;
use crate::ssr::{is_ssr_state, ssr_eigen};

/// `|ψ⟩ = Σ √pᵢ |i⟩_A ∧ |i⟩_B` with definite-parity orthonormal factors.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    /// Probabilities `pᵢ`, descending; zero terms are omitted.
    pub coeffs: Vec<f64>,
    pub left: Vec<FockState>,
    pub right: Vec<FockState>,
}

impl SchmidtDecomposition {
    pub fn schmidt_number(&self, tol: f64) -> usize {
        self.coeffs.iter().filter(|&&p| p > tol).count()
    }

    /// `Σ √pᵢ |i⟩_A ∧ |i⟩_B`.
    pub fn reconstruct(&self) -> Result<FockState> {
        let mut acc: Option<FockState> = None;
        for ((p, a), b) in self.coeffs.iter().zip(&self.left).zip(&self.right) {
            let term = wedge_states(a, b)?.scaled(C64::from(p.sqrt()));
            acc = Some(match acc {
                None => term,
                Some(x) => x.plus(&term)?,
            });
        }
        acc.ok_or_else(|| FermiError::InvalidArgument("empty decomposition".into()))
    }

    /// Entanglement entropy `−Σ pᵢ log₂ pᵢ`.
    pub fn entropy(&self) -> f64 {
        linalg::entropy_bits(&self.coeffs)
    }
}

fn check_partition(all: &ModeSet, a: &ModeSet) -> Result<ModeSet> {
    if !a.is_subset(all) {
        return Err(FermiError::InvalidPartition(format!("{a} is not a subset of {all}")));
    }
    if a.is_empty() || a.len() == all.len() {
        return Err(FermiError::InvalidPartition(format!("{a} is a trivial part of {all}")));
    }
    Ok(all.difference(a))
}

/// Coefficients `C[a][b]` with `|ψ⟩ = Σ C[a][b] |a⟩_A ∧ |b⟩_B`.
fn coefficient_matrix(psi: &FockState, a: &ModeSet, b: &ModeSet) -> Result<CMatrix> {
    let pa = a.positions_in(psi.modes())?;
    let pb = b.positions_in(psi.modes())?;
    let amps = psi.amplitudes();
    let mut c = CMatrix::zeros(a.dim(), b.dim());
    for u in 0..psi.dim() {
        let (ia, ib) = (gather(u, &pa), gather(u, &pb));
        debug_assert_eq!(scatter(ia, &pa) | scatter(ib, &pb), u);
        // |a⟩∧|b⟩ = (−1)^{inversions} |u⟩, and the sign is its own inverse
        let inversions: u32 = pb
            .iter()
            .enumerate()
            .filter(|(i, _)| ib >> i & 1 == 1)
            .map(|(_, p)| (scatter(ia, &pa) >> (p + 1)).count_ones())
            .sum();
        let x = amps[u];
        c[(ia, ib)] = if inversions % 2 == 1 { -x } else { x };
    }
    Ok(c)
}

/// Schmidt decomposition of an SSR pure state across `a_modes` and the rest.
///
/// The A-side basis diagonalises the marginal `C C†` sector by sector; the
/// B-side vectors are the partial inner products `Cᵀ conj(uᵢ)/√pᵢ`.
pub fn schmidt(psi: &FockState, a_modes: &ModeSet, tol: f64) -> Result<SchmidtDecomposition> {
    let b_modes = check_partition(psi.modes(), a_modes)?;
    let parity = psi
        .definite_parity(tol.max(1e-12))
        .ok_or_else(|| FermiError::NotSsr("state mixes even and odd sectors".into()))?;
    let n = psi.norm();
    if (n - 1.0).abs() > 1e-8 {
        return Err(FermiError::InvalidArgument(format!("state is not normalised (norm {n})")));
    }
    let c = coefficient_matrix(psi, a_modes, &b_modes)?;
    let marginal = &c * c.adjoint();
    let mut coeffs = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for mut pair in linalg::sector_eigen(&marginal, is_odd_index) {
        if pair.value <= tol {
            continue;
        }
        fix_phase(&mut pair.vector);
        let w: CVector = c.transpose() * pair.vector.map(|z| z.conj()) / C64::from(pair.value.sqrt());
        let right_state = FockState::new(b_modes.clone(), w)?;
        debug_assert_eq!(right_state.definite_parity(1e-8), Some(parity.combine(pair.parity)));
        coeffs.push(pair.value);
        left.push(FockState::new(a_modes.clone(), pair.vector)?);
        right.push(right_state);
    }
    Ok(SchmidtDecomposition { coeffs, left, right })
}

/// Even pure state on `modes(ρ) ∪ E` whose trace over the environment `E` is `ρ`.
///
/// `E` has as many modes as the system and sits directly above it.
pub fn purify(rho: &FockOperator, tol: f64) -> Result<FockState> {
    is_ssr_state(rho, tol.max(1e-9)).into_result()?;
    let sys = rho.modes().clone();
    let env = ModeSet::contiguous(sys.max_label().map_or(1, |m| m + 1), sys.len())?;
    let mut next_even = crate::ssr::sector_indices(env.len(), Parity::Even).into_iter();
    let mut next_odd = crate::ssr::sector_indices(env.len(), Parity::Odd).into_iter();
    let mut acc = FockState::new(sys.union(&env)?, CVector::zeros(sys.dim() * env.dim()))?;
    for mut pair in ssr_eigen(rho, tol.max(1e-9))? {
        let slot = match pair.parity {
            Parity::Even => next_even.next(),
            Parity::Odd => next_odd.next(),
        }
        .expect("environment sectors match system sectors");
        if pair.value <= 0.0 {
            continue;
        }
        fix_phase(&mut pair.vector);
        let psi = FockState::new(sys.clone(), pair.vector)?;
        let term = wedge_states(&psi, &FockState::basis_state(&env, slot)?)?;
        acc = acc.plus(&term.scaled(C64::from(pair.value.sqrt())))?;
    }
    let n = acc.norm();
    Ok(if n > 0.0 { acc.scaled(C64::from(1.0 / n)) } else { acc })
}

/// `−Tr ρ log₂ ρ`.
pub fn von_neumann_entropy(rho: &FockOperator, tol: f64) -> Result<f64> {
    let spectrum = linalg::hermitian_eigenvalues(rho.matrix());
    let min = spectrum.last().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(FermiError::NotPositive { min_eigenvalue: min });
    }
    Ok(linalg::entropy_bits(&spectrum))
}

/// Which notion of "uncorrelated" to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UncorrelatedDefinition {
    /// Expectations of all local observable products factorise.
    AllObservables,
    /// The state equals the wedge of its marginals.
    ProductOfMarginals,
    /// Expectations of SSR local observable products factorise.
    SsrObservables,
}

/// How the observable quantifier is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Random Gaussian Hermitian pairs.
    Random { trials: usize, seed: u64 },
    /// Every pair from a Hermitian basis; exact because the deviation is bilinear.
    Spanning,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationVerdict {
    pub uncorrelated: bool,
    /// Largest factorisation deviation, or the Frobenius distance for the product test.
    pub witness: f64,
}

/// Hermitian basis of operators on `modes`: `E_jj`, `E_jk + E_kj`, `i(E_jk − E_kj)`.
/// With `ssr_only` the off-diagonal elements are restricted to equal-parity pairs.
pub fn hermitian_basis(modes: &ModeSet, ssr_only: bool) -> Vec<FockOperator> {
    let d = modes.dim();
    let mut out = Vec::new();
    for j in 0..d {
        for k in j..d {
            if ssr_only && is_odd_index(j) != is_odd_index(k) {
                continue;
            }
            let mut m = CMatrix::zeros(d, d);
            if j == k {
                m[(j, j)] = C64::from(1.0);
                out.push(FockOperator::new(modes.clone(), m).expect("dimension matches"));
                continue;
            }
            m[(j, k)] = C64::from(1.0);
            m[(k, j)] = C64::from(1.0);
            out.push(FockOperator::new(modes.clone(), m.clone()).expect("dimension matches"));
            m[(j, k)] = C64::new(0.0, 1.0);
            m[(k, j)] = C64::new(0.0, -1.0);
            out.push(FockOperator::new(modes.clone(), m).expect("dimension matches"));
        }
    }
    out
}

fn factorisation_deviation(
    rho: &FockOperator,
    rho_a: &FockOperator,
    rho_b: &FockOperator,
    oa: &FockOperator,
    ob: &FockOperator,
) -> Result<f64> {
    let joint = wedge_operators(oa, ob)?;
    let lhs: C64 = (joint.matrix() * rho.matrix()).trace();
    let ea: C64 = (oa.matrix() * rho_a.matrix()).trace();
    let eb: C64 = (ob.matrix() * rho_b.matrix()).trace();
    Ok((lhs - ea * eb).norm())
}

/// Tests whether `rho` is uncorrelated across `a_modes | rest` under the chosen definition.
pub fn is_uncorrelated(
    rho: &FockOperator,
    a_modes: &ModeSet,
    definition: UncorrelatedDefinition,
    sampling: Sampling,
    tol: f64,
) -> Result<CorrelationVerdict> {
    let b_modes = check_partition(rho.modes(), a_modes)?;
    is_ssr_state(rho, tol.max(1e-9)).into_result()?;
    let rho_a = ptrace(rho, &b_modes)?;
    let rho_b = ptrace(rho, a_modes)?;
    let witness = match definition {
        UncorrelatedDefinition::ProductOfMarginals => {
            let prod = wedge_operators(&rho_a, &rho_b)?;
            rho.frobenius_distance(&prod)?
        }
        UncorrelatedDefinition::AllObservables | UncorrelatedDefinition::SsrObservables => {
            let ssr_only = definition == UncorrelatedDefinition::SsrObservables;
            let mut worst = 0.0f64;
            match sampling {
                Sampling::Spanning => {
                    let ba = hermitian_basis(a_modes, ssr_only);
                    let bb = hermitian_basis(&b_modes, ssr_only);
                    for oa in &ba {
                        for ob in &bb {
                            worst = worst.max(factorisation_deviation(rho, &rho_a, &rho_b, oa, ob)?);
                        }
                    }
                }
                Sampling::Random { trials, seed } => {
                    let mut rng = random::seeded(seed);
                    for _ in 0..trials.max(1) {
                        let (oa, ob) = random_pair(&mut rng, a_modes, &b_modes, ssr_only);
                        worst = worst.max(factorisation_deviation(rho, &rho_a, &rho_b, &oa, &ob)?);
                    }
                }
            }
            worst
        }
    };
    Ok(CorrelationVerdict { uncorrelated: witness < tol, witness })
}

fn random_pair<R: Rng + ?Sized>(rng: &mut R, a: &ModeSet, b: &ModeSet, ssr_only: bool) -> (FockOperator, FockOperator) {
    if ssr_only {
        (random::ssr_observable(rng, a), random::ssr_observable(rng, b))
    } else {
        (random::hermitian_operator(rng, a), random::hermitian_operator(rng, b))
    }
}

/// `Tr((O_A ∧ I_B) ρ)`.
pub fn local_expectation(rho: &FockOperator, o: &FockOperator) -> Result<C64> {
    let rest = rho.modes().difference(o.modes());
    let big = embed_local(o, &rest)?;
    let big = FockOperator::new(rho.modes().clone(), big.into_matrix())?;
    Ok((big.matrix() * rho.matrix()).trace())
}

/// Σ pᵢ ρᵢ^A ∧ ρᵢ^B.
pub fn separable_mixture(terms: &[(f64, FockOperator, FockOperator)]) -> Result<FockOperator> {
    let mut acc: Option<FockOperator> = None;
    for (p, a, b) in terms {
        let t = wedge_operators(a, b)?.scaled(C64::from(*p));
        acc = Some(match acc {
            None => t,
            Some(x) => x.try_add(&t)?,
        });
    }
    acc.ok_or_else(|| FermiError::InvalidArgument("empty mixture".into()))
}

/// Two-mode state `[[9,0,0,−i],[0,3,−i,0],[0,i,3,0],[i,0,0,1]]/16`.
///
/// Its single-mode marginals are both `diag(12, 4)/16` and every product of
/// SSR local observables factorises, yet it differs from `ρ₁ ∧ ρ₂` through
/// coherences that only parity-odd local operators can see.
pub fn ssr_invisible_correlation_state() -> FockOperator {
    let i = C64::new(0.0, 1.0);
    let z = C64::from(0.0);
    let r = C64::from;
    let m = CMatrix::from_row_slice(4, 4, &[r(9.0), z, z, -i, z, r(3.0), -i, z, z, i, r(3.0), z, i, z, z, r(1.0)])
        / C64::from(16.0);
    FockOperator::new(ModeSet::first(2).expect("two modes"), m).expect("4x4 matches two modes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{seeded, ssr_density, ssr_pure_state};

    fn modes(n: usize) -> ModeSet {
        ModeSet::first(n).unwrap()
    }

    fn st(m: &ModeSet, p: &str) -> FockState {
        FockState::from_pattern(m, p).unwrap()
    }

    fn bell(even: bool) -> FockState {
        let m = modes(2);
        let (x, y) = if even { ("00", "11") } else { ("10", "01") };
        st(&m, x).plus(&st(&m, y)).unwrap().scaled(C64::from(0.5f64.sqrt()))
    }

    #[test]
    fn product_state_has_one_coefficient() {
        let d = schmidt(&st(&modes(2), "11"), &ModeSet::new([1]).unwrap(), 1e-12).unwrap();
        assert_eq!(d.coeffs.len(), 1);
        assert!((d.coeffs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn even_and_odd_bell_states() {
        for even in [true, false] {
            let psi = bell(even);
            let d = schmidt(&psi, &ModeSet::new([1]).unwrap(), 1e-12).unwrap();
            assert_eq!(d.coeffs.len(), 2);
            for p in &d.coeffs {
                assert!((p - 0.5).abs() < 1e-12);
            }
            for (a, b) in d.left.iter().zip(&d.right) {
                let pa = a.definite_parity(1e-12).unwrap();
                let pb = b.definite_parity(1e-12).unwrap();
                assert_eq!(pa == pb, even);
            }
            let back = d.reconstruct().unwrap();
            assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-12);
            assert!((d.entropy() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn schmidt_rejects_bad_input() {
        let m = modes(2);
        let mixed = st(&m, "00").plus(&st(&m, "10")).unwrap().scaled(C64::from(0.5f64.sqrt()));
        assert!(matches!(schmidt(&mixed, &ModeSet::new([1]).unwrap(), 1e-12), Err(FermiError::NotSsr(_))));
        assert!(matches!(schmidt(&bell(true), &m, 1e-12), Err(FermiError::InvalidPartition(_))));
    }

    #[test]
    fn interleaved_partition_reconstructs() {
        let mut rng = seeded(2);
        let m = modes(4);
        let a = ModeSet::new([1, 3]).unwrap();
        for parity in [Parity::Even, Parity::Odd] {
            let psi = ssr_pure_state(&mut rng, &m, parity);
            let d = schmidt(&psi, &a, 1e-12).unwrap();
            let back = d.reconstruct().unwrap();
            assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-10);
            let marginal = ptrace(&psi.projector(), &m.difference(&a)).unwrap();
            let spectrum = linalg::hermitian_eigenvalues(marginal.matrix());
            for (x, y) in d.coeffs.iter().zip(&spectrum) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn purify_vacuum_and_mixture() {
        let m = modes(1);
        let w = purify(&FockState::vacuum(&m).projector(), 1e-10).unwrap();
        assert_eq!(w, FockState::vacuum(&modes(2)));

        let half = FockState::vacuum(&m).projector().try_add(&st(&m, "1").projector()).unwrap().scaled(C64::from(0.5));
        let w = purify(&half, 1e-10).unwrap();
        let expected = bell(true);
        assert!((w.amplitudes() - expected.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn purification_marginal_matches() {
        let mut rng = seeded(3);
        let m = modes(2);
        for _ in 0..20 {
            let rho = ssr_density(&mut rng, &m);
            let w = purify(&rho, 1e-10).unwrap();
            assert_eq!(w.definite_parity(1e-12), Some(Parity::Even));
            let env = w.modes().difference(&m);
            let back = ptrace(&w.projector(), &env).unwrap();
            assert!(back.max_deviation(&rho).unwrap() < 1e-10);
        }
    }

    #[test]
    fn entropy_examples() {
        let m = modes(2);
        assert!(von_neumann_entropy(&bell(true).projector(), 1e-10).unwrap().abs() < 1e-10);
        let mixed = FockOperator::identity(&m).scaled(C64::from(0.25));
        assert!((von_neumann_entropy(&mixed, 1e-10).unwrap() - 2.0).abs() < 1e-12);
        let half = st(&m, "00").projector().try_add(&st(&m, "11").projector()).unwrap().scaled(C64::from(0.5));
        assert!((von_neumann_entropy(&half, 1e-10).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_states_are_uncorrelated_everywhere() {
        let mut rng = seeded(4);
        let a = ModeSet::new([1]).unwrap();
        let b = ModeSet::new([2]).unwrap();
        let rho = wedge_operators(&ssr_density(&mut rng, &a), &ssr_density(&mut rng, &b)).unwrap();
        for def in [
            UncorrelatedDefinition::AllObservables,
            UncorrelatedDefinition::ProductOfMarginals,
            UncorrelatedDefinition::SsrObservables,
        ] {
            assert!(is_uncorrelated(&rho, &a, def, Sampling::Spanning, 1e-10).unwrap().uncorrelated);
        }
    }

    #[test]
    fn entangled_pure_state_is_correlated_everywhere() {
        let rho = bell(true).projector();
        let a = ModeSet::new([1]).unwrap();
        for def in [
            UncorrelatedDefinition::AllObservables,
            UncorrelatedDefinition::ProductOfMarginals,
            UncorrelatedDefinition::SsrObservables,
        ] {
            assert!(!is_uncorrelated(&rho, &a, def, Sampling::Spanning, 1e-10).unwrap().uncorrelated);
        }
    }

    #[test]
    fn invisible_correlations() {
        let rho = ssr_invisible_correlation_state();
        assert!(is_ssr_state(&rho, 1e-12).is_valid());
        let a = ModeSet::new([1]).unwrap();
        let ssr = is_uncorrelated(&rho, &a, UncorrelatedDefinition::SsrObservables, Sampling::Spanning, 1e-10).unwrap();
        assert!(ssr.uncorrelated && ssr.witness < 1e-12);
        let prod =
            is_uncorrelated(&rho, &a, UncorrelatedDefinition::ProductOfMarginals, Sampling::Spanning, 1e-10).unwrap();
        assert!(!prod.uncorrelated);
        assert!((prod.witness - 0.125).abs() < 1e-12);
        let all = is_uncorrelated(&rho, &a, UncorrelatedDefinition::AllObservables, Sampling::Spanning, 1e-10).unwrap();
        assert!(!all.uncorrelated);
        let random = is_uncorrelated(
            &rho,
            &a,
            UncorrelatedDefinition::AllObservables,
            Sampling::Random { trials: 20, seed: 1 },
            1e-10,
        )
        .unwrap();
        assert!(!random.uncorrelated);
    }

    #[test]
    fn separable_mixture_is_ssr() {
        let mut rng = seeded(5);
        let a = ModeSet::new([1, 2]).unwrap();
        let b = ModeSet::new([3]).unwrap();
        let terms: Vec<_> =
            (0..3).map(|i| ((i + 1) as f64 / 6.0, ssr_density(&mut rng, &a), ssr_density(&mut rng, &b))).collect();
        let rho = separable_mixture(&terms).unwrap();
        assert!(is_ssr_state(&rho, 1e-10).is_valid());
    }
}
