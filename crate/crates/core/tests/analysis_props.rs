use num::One;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rxnident_core::langevin::ode_drifts_equal;
use rxnident_core::random::{
    random_confoundable_pair, random_network, random_reaction, NetworkShape,
};
use rxnident_core::{
    check_confoundability, check_identifiability, generators_equal, Complex, ModelSemantics,
    RateVector, Rational, Reaction, ReactionNetwork,
};

fn shape() -> NetworkShape {
    NetworkShape::default()
}

fn padded(k: &RateVector, extra: usize) -> RateVector {
    k.extended(&vec![Rational::one(); extra]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ode_identifiable_implies_sde_identifiable(seed in any::<u64>()) {
        let net = random_network(&mut ChaCha8Rng::seed_from_u64(seed), &shape());
        let ode = check_identifiability(&net, ModelSemantics::Ode).unwrap();
        let sde = check_identifiability(&net, ModelSemantics::Sde).unwrap();
        if ode.identifiable {
            prop_assert!(sde.identifiable);
        }
    }

    #[test]
    fn non_identifiable_witnesses_revalidate(seed in any::<u64>()) {
        let net = random_network(&mut ChaCha8Rng::seed_from_u64(seed), &shape());
        for sem in [ModelSemantics::Ode, ModelSemantics::Sde] {
            let v = check_identifiability(&net, sem).unwrap();
            match v.witness_pair {
                None => prop_assert!(v.identifiable),
                Some((k, k2)) => {
                    prop_assert!(!v.identifiable);
                    prop_assert_ne!(&k, &k2);
                    let same = match sem {
                        ModelSemantics::Ode => ode_drifts_equal(&net, &k, &net, &k2).unwrap(),
                        ModelSemantics::Sde => generators_equal(&net, &k, &net, &k2).unwrap(),
                    };
                    prop_assert!(same);
                }
            }
        }
    }

    #[test]
    fn supernetworks_stay_non_identifiable(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = loop {
            let n = random_network(&mut rng, &shape());
            if !check_identifiability(&n, ModelSemantics::Sde).unwrap().identifiable {
                break n;
            }
        };
        let (k, k2) = check_identifiability(&base, ModelSemantics::Sde)
            .unwrap()
            .witness_pair
            .unwrap();
        let extra_count = 1 + (seed % 3) as usize;
        let mut extra: Vec<Reaction> = Vec::new();
        for _ in 0..extra_count {
            let mut taken = base.reactions().to_vec();
            taken.extend(extra.iter().cloned());
            let Some(r) = random_reaction(&mut rng, base.species_count(), 3, &taken) else {
                return Ok(());
            };
            extra.push(r);
        }
        let sup = base.with_reactions(&extra).unwrap();
        prop_assert!(!check_identifiability(&sup, ModelSemantics::Sde).unwrap().identifiable);
        let (kp, k2p) = (padded(&k, extra_count), padded(&k2, extra_count));
        prop_assert!(generators_equal(&sup, &kp, &sup, &k2p).unwrap());
    }

    #[test]
    fn common_reaction_keeps_confoundability(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some((a, b)) = random_confoundable_pair(&mut rng, &shape(), 100) else {
            return Ok(());
        };
        let v = check_confoundability(&a, &b, ModelSemantics::Sde).unwrap();
        prop_assert!(v.confoundable);
        let (ka, kb) = v.witness.unwrap();
        let mut taken = a.reactions().to_vec();
        taken.extend(b.reactions().iter().cloned());
        let Some(r) = random_reaction(&mut rng, a.species_count(), 3, &taken) else {
            return Ok(());
        };
        let a2 = a.with_reactions(std::slice::from_ref(&r)).unwrap();
        let b2 = b.with_reactions(&[r]).unwrap();
        prop_assert!(generators_equal(&a2, &padded(&ka, 1), &b2, &padded(&kb, 1)).unwrap());
        prop_assert!(check_confoundability(&a2, &b2, ModelSemantics::Sde).unwrap().confoundable);
    }

    #[test]
    fn sde_confoundable_implies_ode_confoundable(seed in any::<u64>(), constructed in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = if constructed {
            random_confoundable_pair(&mut rng, &shape(), 100)
        } else {
            // Independent pair over a shared species set: mostly unconfoundable.
            let a = random_network(&mut rng, &shape());
            let n = a.species_count();
            let mut reactions: Vec<Reaction> = Vec::new();
            while reactions.len() < a.reaction_count() {
                match random_reaction(&mut rng, n, 2, &reactions) {
                    Some(r) => reactions.push(r),
                    None => break,
                }
            }
            let b = ReactionNetwork::new(a.species_names(), reactions).unwrap();
            Some((a, b))
        };
        let Some((a, b)) = pair else { return Ok(()) };
        if a.same_reaction_set(&b).unwrap() {
            return Ok(());
        }
        let sde = check_confoundability(&a, &b, ModelSemantics::Sde).unwrap();
        let ode = check_confoundability(&a, &b, ModelSemantics::Ode).unwrap();
        if sde.confoundable {
            prop_assert!(ode.confoundable);
        }
        if let Some((ka, kb)) = ode.witness {
            prop_assert!(ode_drifts_equal(&a, &ka, &b, &kb).unwrap());
        }
    }

    #[test]
    fn k_unary_networks_are_identifiable(
        n in 1usize..=4,
        ks in prop::collection::vec(1u32..=3, 4),
        picks in prop::collection::vec((0usize..5, 0usize..5), 1..12),
    ) {
        // Complexes are 0 and k_i S_i; index n stands for 0.
        let complex = |i: usize| {
            let mut c = vec![0; n];
            if i < n {
                c[i] = ks[i];
            }
            Complex::new(c)
        };
        let mut reactions: Vec<Reaction> = Vec::new();
        for (s, p) in picks {
            let (s, p) = (s % (n + 1), p % (n + 1));
            if s == p {
                continue;
            }
            let r = Reaction::new(complex(s), complex(p)).unwrap();
            if !reactions.contains(&r) {
                reactions.push(r);
            }
        }
        prop_assume!(!reactions.is_empty());
        let names: Vec<String> = (1..=n).map(|i| format!("S{i}")).collect();
        let net = ReactionNetwork::new(names, reactions).unwrap();
        prop_assert!(check_identifiability(&net, ModelSemantics::Ode).unwrap().identifiable);
        prop_assert!(check_identifiability(&net, ModelSemantics::Sde).unwrap().identifiable);
    }

    #[test]
    fn one_species_rule(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = NetworkShape { max_species: 1, ..shape() };
        let net = random_network(&mut rng, &s);
        let at_most_two = net
            .source_complexes()
            .iter()
            .all(|y| net.reactions_from(y).len() <= 2);
        let v = check_identifiability(&net, ModelSemantics::Sde).unwrap();
        prop_assert_eq!(v.identifiable, at_most_two);
    }
}

#[test]
fn generator_of_identical_rates_matches() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let net = random_network(&mut rng, &shape());
        let k = RateVector::ones(net.reaction_count());
        assert!(generators_equal(&net, &k, &net, &k).unwrap());
    }
}
