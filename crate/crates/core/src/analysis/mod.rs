//! Decision procedures: reaction-identifiability, confoundability and
//! linear conjugacy, each returning an exactly re-checked witness or a
//! certificate.
//!
//! All three reduce to per-source-complex linear algebra. Rate constants
//! out of a source y only ever appear through
//! `sum_{y->y'} k (y'-y)` (ODE) or additionally
//! `sum_{y->y'} k (y'-y)(y'-y)^T` (SDE / generator), so each source is an
//! independent linear system over its own reactions.

mod confoundability;
mod conjugacy;
mod identifiability;

pub use confoundability::{check_confoundability, Certificate, ConfoundabilityVerdict};
pub use conjugacy::{
    check_linear_conjugacy, verify_conjugacy_witness, ConjugacyOptions, ConjugacyVerdict,
    ConjugacyWitness,
};
pub use identifiability::{check_identifiability, witness_from_dependence, IdentifiabilityVerdict};

use std::fmt;
use std::str::FromStr;

use crate::model::{extended_reaction_vector, Reaction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelSemantics {
    /// Deterministic mass-action ODE; reaction vectors only.
    Ode,
    /// Langevin SDE / its generator; extended reaction vectors.
    Sde,
}

impl ModelSemantics {
    /// The vector a reaction contributes to its source's coefficient block.
    pub fn reaction_column(self, r: &Reaction) -> Vec<i64> {
        match self {
            ModelSemantics::Ode => r.reaction_vector(),
            ModelSemantics::Sde => extended_reaction_vector(r).flattened(),
        }
    }

    pub fn column_len(self, n: usize) -> usize {
        match self {
            ModelSemantics::Ode => n,
            ModelSemantics::Sde => n + n * (n + 1) / 2,
        }
    }
}

impl fmt::Display for ModelSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelSemantics::Ode => "ode",
            ModelSemantics::Sde => "sde",
        })
    }
}

impl FromStr for ModelSemantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ode" => Ok(ModelSemantics::Ode),
            "sde" | "generator" => Ok(ModelSemantics::Sde),
            other => Err(format!("unknown model `{}` (expected ode or sde)", other)),
        }
    }
}
