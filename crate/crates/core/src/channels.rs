//! Quantum operations in Kraus, Choi and Stinespring form, with converters.
//!
//! Ancilla and environment modes are always placed above the system modes, so
//! `|s⟩ ∧ |e⟩` has index `s + 2^N·e` with no reordering sign.

use rand::Rng;

use crate::error::{FermiError, Result};
use crate::fock::{
    check_mode_count, embed_local, is_odd_index, max_abs, wedge_operators, wedge_states, CMatrix, CVector,
    FockOperator, FockState, ModeSet, Parity, C64, DEFAULT_TOL, ONE,
};
use crate::linalg::{self, fix_phase};
use crate::ptrace::ptrace;
use crate::random;
use crate::ssr::{block_kind, check_ssr_unitary, is_ssr_state, sector_indices, BlockKind};

/// Kraus operators below this spectral norm are dropped.
pub const KRAUS_PRUNE_TOL: f64 = 1e-12;

/// Anything that maps operators on a mode set to operators on the same mode set.
pub trait LinearMap {
    fn modes(&self) -> &ModeSet;
    fn apply(&self, rho: &FockOperator) -> Result<FockOperator>;
}

fn kind_tol(m: &CMatrix) -> f64 {
    DEFAULT_TOL * max_abs(m).max(1.0)
}

/// A channel `ρ ↦ Σ E_k ρ E_k†` with parity-definite Kraus operators.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    modes: ModeSet,
    ops: Vec<FockOperator>,
    kinds: Vec<BlockKind>,
}

impl KrausChannel {
    /// Rejects operators of mixed block form and sets whose `Σ E†E` exceeds the identity.
    pub fn new(modes: ModeSet, ops: Vec<FockOperator>) -> Result<Self> {
        if ops.is_empty() {
            return Err(FermiError::InvalidArgument("a channel needs at least one Kraus operator".into()));
        }
        let mut kinds = Vec::with_capacity(ops.len());
        for (index, op) in ops.iter().enumerate() {
            op.require_canonical()?;
            if op.modes() != &modes {
                return Err(FermiError::ModeSetMismatch {
                    expected: modes.labels().to_vec(),
                    found: op.modes().labels().to_vec(),
                });
            }
            match block_kind(op, kind_tol(op.matrix())) {
                BlockKind::Neither => return Err(FermiError::MixedBlockForm { index }),
                k => kinds.push(k),
            }
        }
        let ch = KrausChannel { modes, ops, kinds };
        let max = linalg::max_eigenvalue(&ch.completeness());
        if max > 1.0 + 1e-9 {
            return Err(FermiError::NotContractive { max_eigenvalue: max });
        }
        Ok(ch)
    }

    pub fn identity(modes: &ModeSet) -> Self {
        KrausChannel {
            modes: modes.clone(),
            ops: vec![FockOperator::identity(modes)],
            kinds: vec![BlockKind::BlockDiagonal],
        }
    }

    /// `{P_even, P_odd}`.
    pub fn parity_dephasing(modes: &ModeSet) -> Self {
        use crate::ssr::parity_projector;
        KrausChannel {
            modes: modes.clone(),
            ops: vec![parity_projector(modes, Parity::Even), parity_projector(modes, Parity::Odd)],
            kinds: vec![BlockKind::BlockDiagonal; 2],
        }
    }

    pub fn operators(&self) -> &[FockOperator] {
        &self.ops
    }

    pub fn kinds(&self) -> &[BlockKind] {
        &self.kinds
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// `Σ E_k† E_k`.
    pub fn completeness(&self) -> CMatrix {
        let d = self.modes.dim();
        self.ops.iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e.matrix().adjoint() * e.matrix())
    }

    /// Largest absolute entry of `Σ E_k† E_k − I`.
    pub fn completeness_deviation(&self) -> f64 {
        let d = self.modes.dim();
        max_abs(&(self.completeness() - CMatrix::identity(d, d)))
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.completeness_deviation() <= tol
    }

    /// Number of Kraus operators of each parity, `(block-diagonal, block-anti-diagonal)`.
    pub fn parity_counts(&self) -> (usize, usize) {
        let even = self.kinds.iter().filter(|k| **k == BlockKind::BlockDiagonal).count();
        (even, self.kinds.len() - even)
    }
}

impl LinearMap for KrausChannel {
    fn modes(&self) -> &ModeSet {
        &self.modes
    }

    fn apply(&self, rho: &FockOperator) -> Result<FockOperator> {
        apply_kraus(self, rho)
    }
}

/// `Σ E_k ρ E_k†`.
pub fn apply_kraus(ch: &KrausChannel, rho: &FockOperator) -> Result<FockOperator> {
    let mut out = FockOperator::zeros(&ch.modes);
    for e in &ch.ops {
        out = out.try_add(&e.conjugate(rho)?)?;
    }
    Ok(out)
}

/// `(φ ∧ I)(ρ)` for `ρ` on the system modes plus disjoint extra modes.
///
/// Each Kraus operator is embedded as `E_k ∧ I_extra`.
pub fn apply_extended(ch: &KrausChannel, rho: &FockOperator) -> Result<FockOperator> {
    if !ch.modes.is_subset(rho.modes()) {
        return Err(FermiError::ModeSetMismatch {
            expected: ch.modes.labels().to_vec(),
            found: rho.modes().labels().to_vec(),
        });
    }
    let extra = rho.modes().difference(&ch.modes);
    let mut out = FockOperator::zeros(rho.modes());
    for e in &ch.ops {
        let big = embed_local(e, &extra)?;
        out = out.try_add(&big.conjugate(rho)?)?;
    }
    Ok(out)
}

/// `ρ ↦ ρᵀ`. Positive and trace preserving, but not completely positive.
#[derive(Clone, Debug)]
pub struct TransposeMap {
    modes: ModeSet,
}

impl TransposeMap {
    pub fn new(modes: ModeSet) -> Self {
        TransposeMap { modes }
    }
}

impl LinearMap for TransposeMap {
    fn modes(&self) -> &ModeSet {
        &self.modes
    }

    fn apply(&self, rho: &FockOperator) -> Result<FockOperator> {
        rho.map_matrix(|m| m.transpose())
    }
}

/// How the maximally entangled reference state is scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChoiNormalization {
    /// `|α⟩ = 2^{-N/2} Σ_s |s⟩∧|s⟩_L`, unit norm; recovery multiplies by `2^N`.
    UnitNorm,
}

impl ChoiNormalization {
    /// The prefactor `c` of `|α⟩`.
    pub fn prefactor(self, n_modes: usize) -> f64 {
        match self {
            ChoiNormalization::UnitNorm => (0.5f64).powf(n_modes as f64 / 2.0),
        }
    }
}

/// The operator `σ = (φ ∧ I_L)(|α⟩⟨α|)` on system ∪ ancilla.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiState {
    system: ModeSet,
    ancilla: ModeSet,
    sigma: FockOperator,
    normalization: ChoiNormalization,
}

impl ChoiState {
    /// Wraps a doubled-space operator. The ancilla is the upper half of its modes.
    pub fn from_operator(system: ModeSet, sigma: FockOperator) -> Result<Self> {
        let ancilla = ancilla_for(&system)?;
        let expected = system.union(&ancilla)?;
        if sigma.modes().len() != expected.len() {
            return Err(FermiError::DimensionMismatch { expected: expected.dim(), found: sigma.dim() });
        }
        let sigma = FockOperator::new(expected, sigma.into_matrix())?;
        Ok(ChoiState { system, ancilla, sigma, normalization: ChoiNormalization::UnitNorm })
    }

    pub fn system(&self) -> &ModeSet {
        &self.system
    }

    pub fn ancilla(&self) -> &ModeSet {
        &self.ancilla
    }

    pub fn operator(&self) -> &FockOperator {
        &self.sigma
    }

    pub fn normalization(&self) -> ChoiNormalization {
        self.normalization
    }

    fn scale(&self) -> f64 {
        let c = self.normalization.prefactor(self.system.len());
        1.0 / (c * c)
    }

    /// `φ(|η⟩⟨η|) = (1/c²)⟨η̃|σ|η̃⟩`, the partial contraction of σ against `η` on the ancilla.
    pub fn recover(&self, eta: &FockState) -> Result<FockOperator> {
        if eta.modes() != &self.system {
            return Err(FermiError::ModeSetMismatch {
                expected: self.system.labels().to_vec(),
                found: eta.modes().labels().to_vec(),
            });
        }
        self.recover_operator(&eta.projector())
    }

    /// Action of the encoded map on an arbitrary operator, by linearity.
    pub fn recover_operator(&self, rho: &FockOperator) -> Result<FockOperator> {
        if rho.modes() != &self.system {
            return Err(FermiError::ModeSetMismatch {
                expected: self.system.labels().to_vec(),
                found: rho.modes().labels().to_vec(),
            });
        }
        let d = self.system.dim();
        let s = self.sigma.matrix();
        let r = rho.matrix();
        let mut out = CMatrix::zeros(d, d);
        for l in 0..d {
            for lp in 0..d {
                let w = r[(l, lp)];
                if w == C64::from(0.0) {
                    continue;
                }
                for a in 0..d {
                    for b in 0..d {
                        out[(a, b)] += w * s[(a + d * l, b + d * lp)];
                    }
                }
            }
        }
        FockOperator::new(self.system.clone(), out * C64::from(self.scale()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(self.sigma.matrix())
    }

    /// Numerical rank: eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        linalg::hermitian_eigenvalues(self.sigma.matrix()).iter().filter(|&&l| l > tol).count()
    }
}

fn ancilla_for(system: &ModeSet) -> Result<ModeSet> {
    let start = system.max_label().map_or(1, |m| m + 1);
    ModeSet::contiguous(start, system.len())
}

/// `|α⟩ = c·Σ_s |s⟩ ∧ |s⟩_L`.
fn reference_state(system: &ModeSet, ancilla: &ModeSet, c: f64) -> Result<FockState> {
    let d = system.dim();
    let mut acc: Option<FockState> = None;
    for s in 0..d {
        let term = wedge_states(&FockState::basis_state(system, s)?, &FockState::basis_state(ancilla, s)?)?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.plus(&term)?,
        });
    }
    let alpha = acc.expect("at least the vacuum term");
    Ok(alpha.scaled(C64::from(c)))
}

/// Choi state of a Kraus channel, `Σ_k (E_k∧I_L)|α⟩⟨α|(E_k∧I_L)†`.
pub fn choi_of_channel(ch: &KrausChannel) -> Result<ChoiState> {
    let system = ch.modes.clone();
    let ancilla = ancilla_for(&system)?;
    check_mode_count(2 * system.len())?;
    let norm = ChoiNormalization::UnitNorm;
    let alpha = reference_state(&system, &ancilla, norm.prefactor(system.len()))?.projector();
    let id_l = FockOperator::identity(&ancilla);
    let mut sigma = FockOperator::zeros(alpha.modes());
    for e in &ch.ops {
        let big = wedge_operators(e, &id_l)?;
        sigma = sigma.try_add(&big.conjugate(&alpha)?)?;
    }
    Ok(ChoiState { system, ancilla, sigma, normalization: norm })
}

/// Choi state of any linear map, `c²·Σ_{l,l'} φ(|l⟩⟨l'|) ∧ |l⟩⟨l'|_L`.
pub fn choi_of_map(map: &dyn LinearMap) -> Result<ChoiState> {
    let system = map.modes().clone();
    let ancilla = ancilla_for(&system)?;
    check_mode_count(2 * system.len())?;
    let norm = ChoiNormalization::UnitNorm;
    let c = norm.prefactor(system.len());
    let d = system.dim();
    let mut sigma = FockOperator::zeros(&system.union(&ancilla)?);
    for l in 0..d {
        for lp in 0..d {
            let unit_s =
                FockOperator::ket_bra(&FockState::basis_state(&system, l)?, &FockState::basis_state(&system, lp)?)?;
            let unit_l =
                FockOperator::ket_bra(&FockState::basis_state(&ancilla, l)?, &FockState::basis_state(&ancilla, lp)?)?;
            let image = map.apply(&unit_s)?;
            sigma = sigma.try_add(&wedge_operators(&image, &unit_l)?)?;
        }
    }
    Ok(ChoiState { system, ancilla, sigma: sigma.scaled(C64::from(c * c)), normalization: norm })
}

/// Kraus operators `E_k[s][l] = (1/c)·√a_k·v_k[s + 2^N·l]` from the parity-sector eigenvectors of σ.
///
/// Eigenvalues at or below `tol` are dropped.
pub fn kraus_from_choi(choi: &ChoiState, tol: f64) -> Result<KrausChannel> {
    let sigma = choi.sigma.matrix();
    let h = choi.sigma.hermiticity_deviation();
    if h > tol.max(1e-9) {
        return Err(FermiError::InvalidArgument(format!("Choi operator is not Hermitian (deviation {h:e})")));
    }
    let verdict = crate::ssr::check_ssr_observable(&choi.sigma, tol.max(1e-9));
    if let Some(v) = verdict.violation {
        return Err(FermiError::NotSsr(v.to_string()));
    }
    let pairs = linalg::sector_eigen(sigma, is_odd_index);
    let min = pairs.last().map_or(0.0, |p| p.value);
    if min < -tol.max(1e-9) {
        return Err(FermiError::NotPositive { min_eigenvalue: min });
    }
    let d = choi.system.dim();
    let c = choi.normalization.prefactor(choi.system.len());
    let mut ops = Vec::new();
    for mut pair in pairs.into_iter().filter(|p| p.value > tol) {
        fix_phase(&mut pair.vector);
        let scale = pair.value.sqrt() / c;
        let e = CMatrix::from_fn(d, d, |s, l| pair.vector[s + d * l] * scale);
        ops.push(FockOperator::new(choi.system.clone(), e)?);
    }
    if ops.is_empty() {
        return Err(FermiError::InvalidArgument("Choi operator has no eigenvalue above tolerance".into()));
    }
    KrausChannel::new(choi.system.clone(), ops)
}

/// An environment state, a global SSR unitary, and the system/environment split.
#[derive(Clone, Debug, PartialEq)]
pub struct StinespringDilation {
    system: ModeSet,
    env: ModeSet,
    env_state: FockState,
    unitary: FockOperator,
}

impl StinespringDilation {
    /// Checks that `env_state` is a normalised SSR state on `env` and `unitary` an SSR unitary on `system ∪ env`.
    pub fn new(system: ModeSet, env: ModeSet, env_state: FockState, unitary: FockOperator) -> Result<Self> {
        if !system.is_disjoint(&env) {
            return Err(FermiError::OverlappingModes);
        }
        if let (Some(top), Some(&low)) = (system.max_label(), env.labels().first()) {
            if low < top {
                return Err(FermiError::InvalidArgument("environment modes must lie above the system modes".into()));
            }
        }
        let total = system.union(&env)?;
        if unitary.modes() != &total {
            return Err(FermiError::ModeSetMismatch {
                expected: total.labels().to_vec(),
                found: unitary.modes().labels().to_vec(),
            });
        }
        if env_state.modes() != &env {
            return Err(FermiError::ModeSetMismatch {
                expected: env.labels().to_vec(),
                found: env_state.modes().labels().to_vec(),
            });
        }
        is_ssr_state(&env_state.projector(), 1e-9).into_result()?;
        check_ssr_unitary(&unitary, 1e-9).into_result()?;
        Ok(StinespringDilation { system, env, env_state, unitary })
    }

    pub fn system(&self) -> &ModeSet {
        &self.system
    }

    pub fn env(&self) -> &ModeSet {
        &self.env
    }

    pub fn env_state(&self) -> &FockState {
        &self.env_state
    }

    pub fn unitary(&self) -> &FockOperator {
        &self.unitary
    }

    /// `Tr_E(U(ρ∧ω)U†)`.
    pub fn apply(&self, rho: &FockOperator) -> Result<FockOperator> {
        let joint = wedge_operators(rho, &self.env_state.projector())?;
        let joint = FockOperator::new(self.unitary.modes().clone(), joint.into_matrix())?;
        ptrace(&self.unitary.conjugate(&joint)?, &self.env)
    }
}

impl LinearMap for StinespringDilation {
    fn modes(&self) -> &ModeSet {
        &self.system
    }

    fn apply(&self, rho: &FockOperator) -> Result<FockOperator> {
        StinespringDilation::apply(self, rho)
    }
}

/// Smallest environment that gives every Kraus operator its own basis state of matching parity.
pub fn required_env_modes(ch: &KrausChannel) -> usize {
    let (even, odd) = ch.parity_counts();
    let need = even.max(odd).max(1);
    let mut k = 1;
    while (1usize << (k - 1)) < need {
        k += 1;
    }
    k
}

/// Dilation with `K = max(n_Kraus, N)` environment modes.
pub fn stinespring_from_kraus(ch: &KrausChannel) -> Result<StinespringDilation> {
    stinespring_from_kraus_with_env(ch, ch.len().max(ch.n_modes()))
}

/// Dilation on an explicit number of environment modes, initialised in the vacuum.
pub fn stinespring_from_kraus_with_env(ch: &KrausChannel, env_modes: usize) -> Result<StinespringDilation> {
    let dev = ch.completeness_deviation();
    if dev > 1e-9 {
        return Err(FermiError::NotTracePreserving { deviation: dev });
    }
    let required = required_env_modes(ch);
    if env_modes < required {
        return Err(FermiError::InsufficientEnvironment { available: env_modes, required });
    }
    let n = ch.n_modes();
    check_mode_count(n + env_modes)?;
    let system = ch.modes.clone();
    let env = ModeSet::contiguous(system.max_label().map_or(1, |m| m + 1), env_modes)?;
    let total = system.union(&env)?;

    // ω_k: next unused environment basis state of the right parity, vacuum first
    let mut next_even = sector_indices(env_modes, Parity::Even).into_iter();
    let mut next_odd = sector_indices(env_modes, Parity::Odd).into_iter();
    let slots: Vec<usize> = ch
        .kinds
        .iter()
        .map(|k| match k {
            BlockKind::BlockDiagonal => next_even.next(),
            _ => next_odd.next(),
        })
        .collect::<Option<Vec<_>>>()
        .ok_or(FermiError::InsufficientEnvironment { available: env_modes, required })?;

    let d = system.dim();
    let big = total.dim();
    let mut u = CMatrix::zeros(big, big);
    for (e, &w) in ch.ops.iter().zip(&slots) {
        let em = e.matrix();
        for s in 0..d {
            for sp in 0..d {
                u[(sp + d * w, s)] += em[(sp, s)];
            }
        }
    }
    complete_unitary(&mut u, d);
    let unitary = FockOperator::new(total, u)?;
    let env_state = FockState::vacuum(&env);
    StinespringDilation::new(system, env, env_state, unitary)
}

/// Fills columns `d..` of `u` so that it becomes unitary, working inside each global
/// parity sector. The first `d` columns must already be orthonormal and parity-definite.
fn complete_unitary(u: &mut CMatrix, d: usize) {
    let big = u.nrows();
    for parity in [Parity::Even, Parity::Odd] {
        let sector: Vec<usize> = (0..big).filter(|&i| Parity::of_index(i) == parity).collect();
        let mut basis: Vec<CVector> = sector.iter().filter(|&&c| c < d).map(|&c| u.column(c).into_owned()).collect();
        let free: Vec<usize> = sector.iter().copied().filter(|&c| c >= d).collect();
        let mut candidates = sector.iter().copied();
        for &col in &free {
            loop {
                let cand = candidates.next().expect("sector basis spans the sector");
                let mut v = CVector::zeros(big);
                v[cand] = ONE;
                // two passes of Gram–Schmidt keep the columns orthonormal to machine precision
                for _ in 0..2 {
                    for b in &basis {
                        let proj = b.dotc(&v);
                        v -= b * proj;
                    }
                }
                let norm = v.norm();
                if norm > 1e-6 {
                    v.unscale_mut(norm);
                    u.set_column(col, &v);
                    basis.push(v);
                    break;
                }
            }
        }
    }
}

/// `E_i = ⟨f_i|_E U |ω⟩_E` over the canonical environment basis, dropping near-zero operators.
pub fn kraus_from_stinespring(dil: &StinespringDilation) -> Result<KrausChannel> {
    check_ssr_unitary(&dil.unitary, 1e-9).into_result()?;
    let d = dil.system.dim();
    let de = dil.env.dim();
    let u = dil.unitary.matrix();
    let omega = dil.env_state.amplitudes();
    let mut ops = Vec::new();
    for f in 0..de {
        let mut e = CMatrix::zeros(d, d);
        for (ew, w) in omega.iter().enumerate() {
            if *w == C64::from(0.0) {
                continue;
            }
            for s in 0..d {
                for sp in 0..d {
                    e[(sp, s)] += u[(sp + d * f, s + d * ew)] * w;
                }
            }
        }
        if linalg::spectral_norm(&e) >= KRAUS_PRUNE_TOL {
            ops.push(FockOperator::new(dil.system.clone(), e)?);
        }
    }
    KrausChannel::new(dil.system.clone(), ops)
}

/// Results of checking the three channel axioms numerically.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    /// Largest `|Tr φ(ρ) − 1|` over random SSR states.
    pub trace_deviation: f64,
    /// Largest entry of `φ(Σ pᵢρᵢ) − Σ pᵢφ(ρᵢ)`.
    pub convexity_deviation: f64,
    /// Smallest eigenvalue of the Choi operator.
    pub choi_min_eigenvalue: f64,
    pub trace_preserving: bool,
    pub convex_linear: bool,
    pub completely_positive: bool,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.trace_preserving && self.convex_linear && self.completely_positive
    }
}

/// Checks trace preservation, convex linearity and complete positivity of `map`.
pub fn verify_axioms<R: Rng + ?Sized>(
    map: &dyn LinearMap,
    trials: usize,
    tol: f64,
    rng: &mut R,
) -> Result<AxiomReport> {
    let modes = map.modes();
    let mut trace_dev = 0.0f64;
    let mut convex_dev = 0.0f64;
    for _ in 0..trials.max(1) {
        let r1 = random::ssr_density(rng, modes);
        let r2 = random::ssr_density(rng, modes);
        let p: f64 = rng.random();
        let out1 = map.apply(&r1)?;
        let out2 = map.apply(&r2)?;
        trace_dev = trace_dev.max((out1.trace() - ONE).norm()).max((out2.trace() - ONE).norm());
        let mix = r1.scaled(C64::from(p)).try_add(&r2.scaled(C64::from(1.0 - p)))?;
        let lhs = map.apply(&mix)?;
        let rhs = out1.scaled(C64::from(p)).try_add(&out2.scaled(C64::from(1.0 - p)))?;
        convex_dev = convex_dev.max(lhs.max_deviation(&rhs)?);
    }
    let choi = choi_of_map(map)?;
    let min = choi.min_eigenvalue();
    Ok(AxiomReport {
        trace_deviation: trace_dev,
        convexity_deviation: convex_dev,
        choi_min_eigenvalue: min,
        trace_preserving: trace_dev <= tol,
        convex_linear: convex_dev <= tol,
        completely_positive: min >= -tol,
    })
}
