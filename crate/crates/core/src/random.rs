//! Seeded random networks for property tests and benchmarks.

use num::Signed;
use rand::Rng;

use crate::analysis::{check_identifiability, ModelSemantics};
use crate::model::{Complex, Reaction, ReactionNetwork};

#[derive(Debug, Clone, Copy)]
pub struct NetworkShape {
    pub max_species: usize,
    pub max_reactions: usize,
    /// Largest stoichiometric coefficient.
    pub max_coefficient: u32,
    /// Sources are drawn from a pool of at most this many complexes, so
    /// that reactions share sources often enough to be interesting.
    pub max_sources: usize,
}

impl Default for NetworkShape {
    fn default() -> Self {
        NetworkShape {
            max_species: 4,
            max_reactions: 8,
            max_coefficient: 3,
            max_sources: 3,
        }
    }
}

fn random_complex<R: Rng>(rng: &mut R, n: usize, max: u32) -> Complex {
    Complex::new((0..n).map(|_| rng.random_range(0..=max)).collect())
}

pub fn species_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("S{}", i)).collect()
}

/// A reaction over `n` species that is not already in `existing`, or
/// `None` if a bounded number of draws found nothing new (small species
/// counts run out of reactions quickly).
pub fn random_reaction<R: Rng>(
    rng: &mut R,
    n: usize,
    max_coefficient: u32,
    existing: &[Reaction],
) -> Option<Reaction> {
    (0..1000).find_map(|_| {
        let s = random_complex(rng, n, max_coefficient);
        let p = random_complex(rng, n, max_coefficient);
        Reaction::new(s, p).ok().filter(|r| !existing.contains(r))
    })
}

pub fn random_network<R: Rng>(rng: &mut R, shape: &NetworkShape) -> ReactionNetwork {
    let n = rng.random_range(1..=shape.max_species);
    let d = rng.random_range(1..=shape.max_reactions);
    let pool: Vec<Complex> = (0..rng.random_range(1..=shape.max_sources))
        .map(|_| random_complex(rng, n, shape.max_coefficient))
        .collect();
    let mut reactions: Vec<Reaction> = Vec::with_capacity(d);
    let mut attempts = 0;
    while reactions.len() < d && attempts < 1000 {
        attempts += 1;
        let source = pool[rng.random_range(0..pool.len())].clone();
        let product = random_complex(rng, n, shape.max_coefficient);
        if let Ok(r) = Reaction::new(source, product) {
            if !reactions.contains(&r) {
                reactions.push(r);
            }
        }
    }
    ReactionNetwork::new(species_names(n), reactions).expect("distinct reactions by construction")
}

/// Two networks that are confoundable with respect to their generators,
/// built from a random SDE-non-identifiable network: a dependence
/// `sum_P c e = sum_N |c| e` among the extended vectors of one source lets
/// the network without the N-reactions mimic the one without the
/// P-reactions. `None` if no non-identifiable network turned up.
pub fn random_confoundable_pair<R: Rng>(
    rng: &mut R,
    shape: &NetworkShape,
    tries: usize,
) -> Option<(ReactionNetwork, ReactionNetwork)> {
    for _ in 0..tries {
        let net = random_network(rng, shape);
        let verdict = check_identifiability(&net, ModelSemantics::Sde).ok()?;
        let (Some(source), Some(coeffs)) =
            (verdict.dependent_source, verdict.dependence_coefficients)
        else {
            continue;
        };
        let out = net.reactions_from(&source);
        let drop_negative: Vec<usize> = out
            .iter()
            .zip(&coeffs)
            .filter(|(_, c)| c.is_negative())
            .map(|(&r, _)| r)
            .collect();
        let drop_positive: Vec<usize> = out
            .iter()
            .zip(&coeffs)
            .filter(|(_, c)| c.is_positive())
            .map(|(&r, _)| r)
            .collect();
        let keep = |drop: &[usize]| -> Vec<Reaction> {
            net.reactions()
                .iter()
                .enumerate()
                .filter(|(i, _)| !drop.contains(i))
                .map(|(_, r)| r.clone())
                .collect()
        };
        let names = net.species_names();
        let a = ReactionNetwork::new(names.clone(), keep(&drop_negative)).ok()?;
        let b = ReactionNetwork::new(names, keep(&drop_positive)).ok()?;
        return Some((a, b));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn networks_respect_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let shape = NetworkShape::default();
        for _ in 0..50 {
            let net = random_network(&mut rng, &shape);
            assert!(net.species_count() <= 4);
            assert!((1..=8).contains(&net.reaction_count()));
            assert!(net.source_complexes().len() <= 3);
            for r in net.reactions() {
                assert!(r.source().coefficients().iter().all(|&c| c <= 3));
                assert!(r.product().coefficients().iter().all(|&c| c <= 3));
            }
        }
    }

    #[test]
    fn confoundable_pairs_are_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (a, b) = random_confoundable_pair(&mut rng, &NetworkShape::default(), 200).unwrap();
        assert!(!a.same_reaction_set(&b).unwrap());
    }
}
