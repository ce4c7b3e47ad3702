//! Fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rxnident_core::random::{random_confoundable_pair, random_network, NetworkShape};
use rxnident_core::{
    generator_coefficients, parse_network, GeneratorCoefficients, ReactionNetwork,
};

/// Seeded random networks of the given shape.
pub fn networks(count: usize, shape: &NetworkShape, seed: u64) -> Vec<ReactionNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_network(&mut rng, shape))
        .collect()
}

pub fn confoundable_pairs(
    count: usize,
    shape: &NetworkShape,
    seed: u64,
) -> Vec<(ReactionNetwork, ReactionNetwork)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::iter::repeat_with(|| random_confoundable_pair(&mut rng, shape, 100))
        .flatten()
        .take(count)
        .collect()
}

/// Immigration with bursts and linear death, one species.
pub fn immigration_death() -> GeneratorCoefficients {
    let doc = parse_network("0 -> 2 S [1]\n0 -> S [4]\nS -> 0 [1]\n0 -> 3 S [2]").unwrap();
    generator_coefficients(&doc.network, doc.rates.as_ref().unwrap()).unwrap()
}

/// Two species with a bimolecular reaction, so the diffusion is a full 2x2.
pub fn dimerization() -> GeneratorCoefficients {
    let doc = parse_network(
        "species: A, B\n0 -> A [20]\n2 A -> B [1/10]\nB -> 2 A [1]\nA -> 0 [1]\nB -> 0 [1/2]",
    )
    .unwrap();
    generator_coefficients(&doc.network, doc.rates.as_ref().unwrap()).unwrap()
}
