use std::collections::BTreeSet;

use num::One;

use super::identifiability::same_dynamics;
use super::ModelSemantics;
use crate::error::{Error, Result};
use crate::linalg::{lp_feasible_cone, RationalMatrix};
use crate::model::{Complex, RateVector, ReactionNetwork};
use crate::Rational;

/// Why two networks cannot share dynamics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// SDE only: source sets differ. Every source contributes a nonzero
    /// positive semi-definite block to B, so no rate choice can hide one.
    SourceMismatch {
        only_in_first: Vec<Complex>,
        only_in_second: Vec<Complex>,
    },
    /// The two cones at this source do not intersect (the LP is infeasible).
    InfeasibleSource { source: Complex },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfoundabilityVerdict {
    pub confoundable: bool,
    /// Rates for the first and second network, in their own reaction order.
    pub witness: Option<(RateVector, RateVector)>,
    pub certificate: Option<Certificate>,
}

/// Decides whether some positive rates make the two networks produce the
/// same ODE (`Ode`) or the same generator (`Sde`). Species are matched by
/// name.
///
/// For every source y in the union of the source sets we ask for positive
/// weights with `sum_{R, y} k v - sum_{R', y} k' v' = 0`, a homogeneous
/// system solved by [`lp_feasible_cone`]. Each reaction has exactly one
/// source, so the per-source weights assemble into global rate vectors.
pub fn check_confoundability(
    a: &ReactionNetwork,
    b: &ReactionNetwork,
    sem: ModelSemantics,
) -> Result<ConfoundabilityVerdict> {
    let b_aligned = b.aligned_to(&a.species_names())?;
    if a.same_reaction_set(&b_aligned)? {
        return Err(Error::IdenticalNetworks);
    }

    let sources_a: BTreeSet<Complex> = a.source_complexes().into_iter().collect();
    let sources_b: BTreeSet<Complex> = b_aligned.source_complexes().into_iter().collect();
    if sem == ModelSemantics::Sde && sources_a != sources_b {
        return Ok(ConfoundabilityVerdict {
            confoundable: false,
            witness: None,
            certificate: Some(Certificate::SourceMismatch {
                only_in_first: sources_a.difference(&sources_b).cloned().collect(),
                only_in_second: sources_b.difference(&sources_a).cloned().collect(),
            }),
        });
    }

    let n = a.species_count();
    let rows = sem.column_len(n);
    let mut kappa_a = vec![Rational::one(); a.reaction_count()];
    let mut kappa_b = vec![Rational::one(); b.reaction_count()];
    for source in sources_a.union(&sources_b) {
        let out_a = a.reactions_from(source);
        let out_b = b_aligned.reactions_from(source);
        let mut columns: Vec<Vec<i64>> = out_a
            .iter()
            .map(|&r| sem.reaction_column(&a.reactions()[r]))
            .collect();
        columns.extend(out_b.iter().map(|&r| {
            sem.reaction_column(&b_aligned.reactions()[r])
                .into_iter()
                .map(|v| -v)
                .collect::<Vec<_>>()
        }));
        let m = RationalMatrix::from_i64_columns(rows, &columns);
        match lp_feasible_cone(&m) {
            Some(w) if w.slack_ok => {
                let (wa, wb) = w.point.split_at(out_a.len());
                for (&r, v) in out_a.iter().zip(wa) {
                    kappa_a[r] = v.clone();
                }
                for (&r, v) in out_b.iter().zip(wb) {
                    kappa_b[r] = v.clone();
                }
            }
            Some(_) => {
                return Err(Error::Internal(format!(
                    "cone witness at {} failed re-check",
                    a.complex_label(source)
                )))
            }
            None => {
                return Ok(ConfoundabilityVerdict {
                    confoundable: false,
                    witness: None,
                    certificate: Some(Certificate::InfeasibleSource {
                        source: source.clone(),
                    }),
                })
            }
        }
    }

    let kappa_a = RateVector::new(kappa_a)?;
    let kappa_b = RateVector::new(kappa_b)?;
    if !same_dynamics(a, &kappa_a, b, &kappa_b, sem)? {
        return Err(Error::Internal(
            "assembled confoundability witness does not reproduce the dynamics".into(),
        ));
    }
    Ok(ConfoundabilityVerdict {
        confoundable: true,
        witness: Some((kappa_a, kappa_b)),
        certificate: None,
    })
}
