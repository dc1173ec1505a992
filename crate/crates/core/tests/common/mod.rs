#![allow(dead_code)]

use fermiqit::random::{seeded, SeededRng};
use fermiqit::{CMatrix, ModeSet};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn rng(seed: u64) -> SeededRng {
    seeded(seed)
}

/// Two disjoint, possibly interleaved mode sets drawn from labels `1..=pool`.
pub fn disjoint_sets(rng: &mut SeededRng, na: usize, nb: usize, pool: usize) -> (ModeSet, ModeSet) {
    let mut labels: Vec<usize> = (1..=pool).collect();
    labels.shuffle(rng);
    let a = ModeSet::new(labels[..na].iter().copied()).unwrap();
    let b = ModeSet::new(labels[na..na + nb].iter().copied()).unwrap();
    (a, b)
}

pub fn random_set(rng: &mut SeededRng, n: usize, pool: usize) -> ModeSet {
    disjoint_sets(rng, n, 0, pool).0
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn coin(rng: &mut SeededRng) -> bool {
    rng.random()
}
