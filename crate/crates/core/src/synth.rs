//! Seeded random categorical instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::EncodedDataset;

/// Penalties used for randomized instances.
pub const LAMBDAS: [f64; 3] = [0.01, 0.05, 0.25];

/// A random instance and the penalty to fit it with.
#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub dataset: EncodedDataset,
    pub lambda: f64,
}

/// Random dataset with the given shape. Every class occurs at least once.
///
/// Half of the datasets have labels driven by a random function of two
/// features with 10% label noise; the rest have independent labels.
pub fn random_dataset(rng: &mut impl Rng, categories: &[usize], n: usize, k: usize) -> EncodedDataset {
    assert!(n >= k, "need at least one row per class");
    let q = categories.len();
    let rows: Vec<Vec<u32>> = (0..n)
        .map(|_| categories.iter().map(|&c| rng.gen_range(0..c as u32)).collect())
        .collect();
    let structured = rng.gen_bool(0.5);
    let (a, b) = (rng.gen_range(0..q), rng.gen_range(0..q));
    let table: Vec<u32> = (0..categories[a] * categories[b]).map(|_| rng.gen_range(0..k as u32)).collect();
    let mut labels: Vec<u32> = rows
        .iter()
        .map(|r| {
            if structured && !rng.gen_bool(0.1) {
                table[r[a] as usize * categories[b] + r[b] as usize]
            } else {
                rng.gen_range(0..k as u32)
            }
        })
        .collect();
    // plant each class on a distinct random row
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for (class, &row) in order.iter().take(k).enumerate() {
        labels[row] = class as u32;
    }
    EncodedDataset::from_rows(categories.to_vec(), &rows, labels).expect("generated rows are in range")
}

/// Instance with `q` in 2..=4, `C_i` in {2, 3}, `n` in 8..=40, `K` in {2, 3}
/// and a penalty from [`LAMBDAS`].
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = rng.gen_range(2..=4);
    let categories: Vec<usize> = (0..q).map(|_| rng.gen_range(2..=3)).collect();
    let n = rng.gen_range(8..=40);
    let k = rng.gen_range(2..=3);
    let lambda = LAMBDAS[rng.gen_range(0..LAMBDAS.len())];
    Instance {
        seed,
        dataset: random_dataset(&mut rng, &categories, n, k),
        lambda,
    }
}
