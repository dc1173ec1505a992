//! Seeded random generators for states, observables, unitaries and channels.
//!
//! Everything takes an explicit `&mut impl Rng`; [`seeded`] gives the
//! reproducible generator used across tests and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::KrausChannel;
use crate::error::{FermiError, Result};
use crate::fock::{CMatrix, CVector, FockOperator, FockState, ModeSet, Parity, C64};
use crate::linalg;
use crate::ssr::{sector_indices, BlockKind};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian: real and imaginary parts each N(0, 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVector {
    CVector::from_fn(len, |_, _| complex_gaussian(rng))
}

/// Haar-random unitary from the QR decomposition of a Gaussian matrix.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    if dim == 0 {
        return CMatrix::zeros(0, 0);
    }
    let qr = gaussian_matrix(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Random Hermitian matrix with Gaussian entries.
pub fn hermitian_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let g = gaussian_matrix(rng, dim, dim);
    (&g + g.adjoint()).scale(0.5)
}

/// Matrix with Gaussian entries placed only where the block kind allows.
pub fn block_matrix<R: Rng + ?Sized>(rng: &mut R, n_modes: usize, kind: BlockKind) -> CMatrix {
    let d = 1usize << n_modes;
    CMatrix::from_fn(d, d, |i, j| {
        let same = Parity::of_index(i) == Parity::of_index(j);
        let keep = match kind {
            BlockKind::BlockDiagonal => same,
            BlockKind::BlockAntiDiagonal => !same,
            BlockKind::Neither => true,
        };
        if keep {
            complex_gaussian(rng)
        } else {
            C64::from(0.0)
        }
    })
}

pub fn block_operator<R: Rng + ?Sized>(rng: &mut R, modes: &ModeSet, kind: BlockKind) -> FockOperator {
    FockOperator::new(modes.clone(), block_matrix(rng, modes.len(), kind)).expect("dimension matches mode set")
}

/// Random Hermitian operator with no parity restriction.
pub fn hermitian_operator<R: Rng + ?Sized>(rng: &mut R, modes: &ModeSet) -> FockOperator {
    FockOperator::new(modes.clone(), hermitian_matrix(rng, modes.dim())).expect("dimension matches mode set")
}

/// Random Hermitian block-diagonal operator.
pub fn ssr_observable<R: Rng + ?Sized>(rng: &mut R, modes: &ModeSet) -> FockOperator {
    let g = block_matrix(rng, modes.len(), BlockKind::BlockDiagonal);
    FockOperator::new(modes.clone(), (&g + g.adjoint()).scale(0.5)).expect("dimension matches mode set")
}

/// Normalised pure state supported on one parity sector.
pub fn ssr_pure_state<R: Rng + ?Sized>(rng: &mut R, modes: &ModeSet, parity: Parity) -> FockState {
    let d = modes.dim();
    let mut amps = CVector::zeros(d);
    for i in sector_indices(modes.len(), parity) {
        amps[i] = complex_gaussian(rng);
    }
    let n = amps.norm();
    if n > 0.0 {
        amps.unscale_mut(n);
    } else {
        amps[0] = C64::from(1.0);
    }
    FockState::new(modes.clone(), amps).expect("dimension matches mode set")
}

/// Pure SSR state of random parity.
pub fn any_ssr_pure_state<R: Rng + ?Sized>(rng: &mut R, modes: &ModeSet) -> FockState {
    let parity = if modes.is_empty() || rng.random::<bool>() { Parity::Even } else { Parity::Odd };
    ssr_pure_state(rng, modes, parity)
}

/// Full-rank SSR density operator `GG†/Tr(GG†)` with `G` block-diagonal.
pub fn ssr_density<R: Rng + ?Sized>(rng: &mut R, modes: &ModeSet) -> FockOperator {
    let g = block_matrix(rng, modes.len(), BlockKind::BlockDiagonal);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    FockOperator::new(modes.clone(), rho / tr).expect("dimension matches mode set")
}

/// Unitary that is Haar-random inside each parity sector and zero across sectors.
pub fn ssr_unitary<R: Rng + ?Sized>(rng: &mut R, modes: &ModeSet) -> FockOperator {
    let n = modes.len();
    let mut u = CMatrix::zeros(modes.dim(), modes.dim());
    for parity in [Parity::Even, Parity::Odd] {
        let idx = sector_indices(n, parity);
        let w = haar_unitary(rng, idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                u[(i, j)] = w[(a, b)];
            }
        }
    }
    FockOperator::new(modes.clone(), u).expect("dimension matches mode set")
}

/// Unitary that swaps the parity sectors: `[[0, W₁], [W₂, 0]]` in B′. Needs at least one mode.
pub fn anti_diagonal_unitary<R: Rng + ?Sized>(rng: &mut R, modes: &ModeSet) -> Result<FockOperator> {
    let n = modes.len();
    if n == 0 {
        return Err(FermiError::InvalidArgument("a parity-flipping unitary needs at least one mode".into()));
    }
    let even = sector_indices(n, Parity::Even);
    let odd = sector_indices(n, Parity::Odd);
    let w1 = haar_unitary(rng, even.len());
    let w2 = haar_unitary(rng, odd.len());
    let mut u = CMatrix::zeros(modes.dim(), modes.dim());
    for (a, &i) in even.iter().enumerate() {
        for (b, &j) in odd.iter().enumerate() {
            u[(i, j)] = w1[(a, b)];
            u[(j, i)] = w2[(b, a)];
        }
    }
    FockOperator::new(modes.clone(), u)
}

/// Trace-preserving channel with `kinds.len()` Kraus operators of the given block kinds.
///
/// Draws block-structured `G_k` and sets `E_k = G_k S^{-1/2}` with `S = Σ G_k†G_k`;
/// `S` is block-diagonal so each `E_k` keeps the block form of `G_k`.
pub fn trace_preserving_channel<R: Rng + ?Sized>(
    rng: &mut R,
    modes: &ModeSet,
    kinds: &[BlockKind],
) -> Result<KrausChannel> {
    if kinds.is_empty() || kinds.contains(&BlockKind::Neither) {
        return Err(FermiError::InvalidArgument("Kraus kinds must be non-empty and parity-definite".into()));
    }
    let gs: Vec<CMatrix> = kinds.iter().map(|&k| block_matrix(rng, modes.len(), k)).collect();
    let s = gs.iter().fold(CMatrix::zeros(modes.dim(), modes.dim()), |acc, g| acc + g.adjoint() * g);
    let s_inv = linalg::inverse_sqrt(&s);
    let ops = gs
        .into_iter()
        .zip(kinds)
        .map(|(g, &kind)| {
            // scrub the rounding noise that the inverse square root leaves in forbidden blocks
            let mut e = g * &s_inv;
            for i in 0..e.nrows() {
                for j in 0..e.ncols() {
                    let same = Parity::of_index(i) == Parity::of_index(j);
                    if same != (kind == BlockKind::BlockDiagonal) {
                        e[(i, j)] = C64::from(0.0);
                    }
                }
            }
            FockOperator::new(modes.clone(), e)
        })
        .collect::<Result<Vec<_>>>()?;
    KrausChannel::new(modes.clone(), ops)
}

/// Trace-preserving channel with a random number (1..=max_kraus) of Kraus operators of random kinds.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, modes: &ModeSet, max_kraus: usize) -> Result<KrausChannel> {
    let n = rng.random_range(1..=max_kraus.max(1));
    let kinds: Vec<BlockKind> = (0..n)
        .map(|_| {
            if modes.is_empty() || rng.random::<bool>() {
                BlockKind::BlockDiagonal
            } else {
                BlockKind::BlockAntiDiagonal
            }
        })
        .collect();
    trace_preserving_channel(rng, modes, &kinds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssr::{block_kind, is_ssr_state, is_ssr_unitary};

    #[test]
    fn seeded_generators_are_reproducible() {
        let m = ModeSet::first(2).unwrap();
        let a = ssr_density(&mut seeded(7), &m);
        let b = ssr_density(&mut seeded(7), &m);
        assert_eq!(a, b);
    }

    #[test]
    fn generated_objects_have_requested_structure() {
        let mut rng = seeded(1);
        let m = ModeSet::first(3).unwrap();
        for _ in 0..10 {
            assert!(is_ssr_state(&ssr_density(&mut rng, &m), 1e-10).is_valid());
            assert!(is_ssr_unitary(&ssr_unitary(&mut rng, &m), 1e-10));
            let x = anti_diagonal_unitary(&mut rng, &m).unwrap();
            assert_eq!(block_kind(&x, 1e-12), BlockKind::BlockAntiDiagonal);
            assert!(linalg::unitarity_deviation(x.matrix()) < 1e-10);
            let psi = ssr_pure_state(&mut rng, &m, Parity::Odd);
            assert_eq!(psi.definite_parity(1e-12), Some(Parity::Odd));
            assert!((psi.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_channels_are_trace_preserving() {
        let mut rng = seeded(3);
        let m = ModeSet::first(2).unwrap();
        for _ in 0..10 {
            let ch = random_channel(&mut rng, &m, 4).unwrap();
            assert!(ch.completeness_deviation() < 1e-10);
        }
    }
}
