use num::{One, Signed, Zero};

use super::ModelSemantics;
use crate::error::{Error, Result};
use crate::langevin::{generators_equal, ode_drifts_equal};
use crate::linalg::RationalMatrix;
use crate::model::{Complex, RateVector, ReactionNetwork};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentifiabilityVerdict {
    pub identifiable: bool,
    /// First source complex (canonical order) whose reactions are dependent.
    pub dependent_source: Option<Complex>,
    /// Nullspace vector over the reactions out of `dependent_source`, in
    /// reaction order.
    pub dependence_coefficients: Option<Vec<Rational>>,
    /// Two distinct rate vectors with the same dynamics.
    pub witness_pair: Option<(RateVector, RateVector)>,
}

fn source_matrix(net: &ReactionNetwork, source: &Complex, sem: ModelSemantics) -> RationalMatrix {
    let columns: Vec<Vec<i64>> = net
        .reactions_from(source)
        .into_iter()
        .map(|r| sem.reaction_column(&net.reactions()[r]))
        .collect();
    RationalMatrix::from_i64_columns(sem.column_len(net.species_count()), &columns)
}

pub(crate) fn same_dynamics(
    a: &ReactionNetwork,
    ka: &RateVector,
    b: &ReactionNetwork,
    kb: &RateVector,
    sem: ModelSemantics,
) -> Result<bool> {
    match sem {
        ModelSemantics::Ode => ode_drifts_equal(a, ka, b, kb),
        ModelSemantics::Sde => generators_equal(a, ka, b, kb),
    }
}

/// Identifiable iff, for every source complex, the vectors of its reactions
/// (reaction vectors for the ODE, extended reaction vectors for the SDE)
/// are linearly independent.
pub fn check_identifiability(
    net: &ReactionNetwork,
    sem: ModelSemantics,
) -> Result<IdentifiabilityVerdict> {
    for source in net.source_complexes() {
        let m = source_matrix(net, &source, sem);
        if m.rank() == m.cols() {
            continue;
        }
        let coeffs = m
            .nullspace()
            .into_iter()
            .next()
            .expect("rank deficiency implies a nullspace vector");
        let pair = witness_from_dependence(net, &source, &coeffs, sem)?;
        return Ok(IdentifiabilityVerdict {
            identifiable: false,
            dependent_source: Some(source),
            dependence_coefficients: Some(coeffs),
            witness_pair: Some(pair),
        });
    }
    Ok(IdentifiabilityVerdict {
        identifiable: true,
        dependent_source: None,
        dependence_coefficients: None,
        witness_pair: None,
    })
}

/// Two positive rate vectors whose difference is `coeffs` on the reactions
/// out of `source` and zero elsewhere: k = 1 + max(c, 0), k' = 1 + max(-c, 0).
/// Fails unless the pair really gives the same dynamics.
pub fn witness_from_dependence(
    net: &ReactionNetwork,
    source: &Complex,
    coeffs: &[Rational],
    sem: ModelSemantics,
) -> Result<(RateVector, RateVector)> {
    let out = net.reactions_from(source);
    if out.len() != coeffs.len() {
        return Err(Error::InvalidWitness(format!(
            "{} coefficients for {} reactions out of {}",
            coeffs.len(),
            out.len(),
            net.complex_label(source)
        )));
    }
    if coeffs.iter().all(Zero::is_zero) {
        return Err(Error::InvalidWitness(
            "dependence coefficients are all zero".into(),
        ));
    }
    let mut kappa = vec![Rational::one(); net.reaction_count()];
    let mut kappa_prime = kappa.clone();
    for (&r, c) in out.iter().zip(coeffs) {
        if c.is_positive() {
            kappa[r] += c;
        } else {
            kappa_prime[r] -= c;
        }
    }
    let kappa = RateVector::new(kappa)?;
    let kappa_prime = RateVector::new(kappa_prime)?;
    if !same_dynamics(net, &kappa, net, &kappa_prime, sem)? {
        return Err(Error::InvalidWitness(
            "coefficients are not a dependence among the source's reactions".into(),
        ));
    }
    Ok((kappa, kappa_prime))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_network;

    fn net(text: &str) -> ReactionNetwork {
        parse_network(text).unwrap().network
    }

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    const EX_4_1: &str = "X -> 2X + Y\nX -> 3X + 2Y\nX -> 4X + 3Y";

    #[test]
    fn birth_death() {
        let bd = net("S -> 0\nS -> 2S");
        assert!(
            check_identifiability(&bd, ModelSemantics::Sde)
                .unwrap()
                .identifiable
        );
        let v = check_identifiability(&bd, ModelSemantics::Ode).unwrap();
        assert!(!v.identifiable);
        let (k, k2) = v.witness_pair.unwrap();
        assert_ne!(k, k2);
        assert!(ode_drifts_equal(&bd, &k, &bd, &k2).unwrap());
        // (3/2,1) and (2,3/2) is another witness
        let a = RateVector::from_fractions(&[(3, 2), (1, 1)]).unwrap();
        let b = RateVector::from_fractions(&[(2, 1), (3, 2)]).unwrap();
        assert!(ode_drifts_equal(&bd, &a, &bd, &b).unwrap());
    }

    #[test]
    fn example_4_1_sde() {
        let n = net(EX_4_1);
        let v = check_identifiability(&n, ModelSemantics::Sde).unwrap();
        assert!(!v.identifiable);
        assert_eq!(v.dependent_source, Some(Complex::new(vec![1, 0])));
        let c = v.dependence_coefficients.unwrap();
        // proportional to (3, -3, 1)
        let s = &c[2];
        assert_eq!(c, vec![q(3, 1) * s, q(-3, 1) * s, s.clone()]);
        let (k, k2) = v.witness_pair.unwrap();
        assert!(generators_equal(&n, &k, &n, &k2).unwrap());
        assert!(
            check_identifiability(&n.without_reaction(2).unwrap(), ModelSemantics::Sde)
                .unwrap()
                .identifiable
        );
    }

    #[test]
    fn single_reaction_per_source_is_identifiable() {
        let n = net("0 -> A\nA -> B\nB -> 2A + C\nC -> 0");
        for sem in [ModelSemantics::Ode, ModelSemantics::Sde] {
            assert!(check_identifiability(&n, sem).unwrap().identifiable);
        }
    }

    #[test]
    fn witness_from_coefficients() {
        let n = net(EX_4_1);
        let x = Complex::new(vec![1, 0]);
        let coeffs = vec![q(3, 1), q(-3, 1), q(1, 1)];
        let (k, k2) = witness_from_dependence(&n, &x, &coeffs, ModelSemantics::Sde).unwrap();
        assert_eq!(k, RateVector::from_integers(&[4, 1, 2]).unwrap());
        assert_eq!(k2, RateVector::from_integers(&[1, 4, 1]).unwrap());

        let doubled: Vec<Rational> = coeffs.iter().map(|c| c * q(2, 1)).collect();
        let (k, k2) = witness_from_dependence(&n, &x, &doubled, ModelSemantics::Sde).unwrap();
        assert!(generators_equal(&n, &k, &n, &k2).unwrap());

        let bd = net("S -> 0\nS -> 2S");
        let (k, k2) = witness_from_dependence(
            &bd,
            &Complex::new(vec![1]),
            &[q(1, 1), q(1, 1)],
            ModelSemantics::Ode,
        )
        .unwrap();
        assert_eq!(k, RateVector::from_integers(&[2, 2]).unwrap());
        assert_eq!(k2, RateVector::from_integers(&[1, 1]).unwrap());
    }

    #[test]
    fn witness_errors() {
        let n = net(EX_4_1);
        let x = Complex::new(vec![1, 0]);
        let zero = vec![q(0, 1); 3];
        assert!(matches!(
            witness_from_dependence(&n, &x, &zero, ModelSemantics::Sde),
            Err(Error::InvalidWitness(_))
        ));
        assert!(witness_from_dependence(&n, &x, &[q(1, 1)], ModelSemantics::Sde).is_err());
        assert!(
            witness_from_dependence(&n, &x, &[q(1, 1), q(0, 1), q(0, 1)], ModelSemantics::Sde)
                .is_err()
        );
    }
}
