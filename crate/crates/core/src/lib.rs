//! Structural identifiability and confoundability of mass-action reaction
//! networks with respect to their chemical Langevin equation, together with
//! the exact linear-algebra kernel the decisions rest on and an
//! Euler–Maruyama simulator for the stopped diffusion.
//!
//! The crate is organized bottom-up:
//!
//! * [`model`]: species, complexes, reactions, rate vectors.
//! * [`parser`]: the line-oriented `.rn` text format.
//! * [`linalg`]: exact rational RREF, rank, nullspace and a phase-1 simplex.
//! * [`langevin`]: drift/diffusion coefficients, evaluation, simulation.
//! * [`analysis`]: identifiability, confoundability, linear conjugacy.
//! * [`random`]: seeded random networks for tests and benchmarks.

pub mod analysis;
pub mod error;
pub mod langevin;
pub mod linalg;
pub mod model;
pub mod parser;
pub mod random;

pub use analysis::{
    check_confoundability, check_identifiability, check_linear_conjugacy, verify_conjugacy_witness,
    witness_from_dependence, Certificate, ConfoundabilityVerdict, ConjugacyOptions,
    ConjugacyVerdict, ConjugacyWitness, IdentifiabilityVerdict, ModelSemantics,
};
pub use error::{Error, Result};
pub use langevin::{
    eval_diffusion, eval_drift, generator_coefficients, generators_equal, ode_rhs, psd_sqrt,
    simulate_em, BoxDomain, EmConfig, GeneratorCoefficients, SimulationPath,
};
pub use linalg::{lp_feasible_cone, FeasibilityWitness, RationalMatrix};
pub use model::{
    extended_reaction_vector, is_subnetwork, Complex, ExtendedReactionVector, RateVector, Reaction,
    ReactionNetwork, Species,
};
pub use parser::{format_network, parse_network, NetworkDocument, ParseError};

/// Arbitrary-precision rational used for every exact quantity.
pub type Rational = num::BigRational;
