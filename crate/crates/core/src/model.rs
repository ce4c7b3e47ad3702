//! Reaction network domain model: species, complexes, reactions and the
//! exact integer objects (reaction vectors, extended reaction vectors) built
//! from them.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num::{BigInt, One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Species {
    pub name: String,
    pub index: usize,
}

/// Non-negative integer combination of species. The zero vector is the
/// empty complex.
///
/// The derived ordering is lexicographic on the coefficient vector, which is
/// the canonical complex order used throughout the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Complex(Vec<u32>);

impl Complex {
    pub fn new(coefficients: Vec<u32>) -> Self {
        Complex(coefficients)
    }

    pub fn empty(dim: usize) -> Self {
        Complex(vec![0; dim])
    }

    pub fn coefficients(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty_complex(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Total number of molecules, |y|.
    pub fn molecularity(&self) -> u64 {
        self.0.iter().map(|&c| u64::from(c)).sum()
    }

    /// Human-readable form such as `2 A + B`, or `0` for the empty complex.
    pub fn label<S: AsRef<str>>(&self, names: &[S]) -> String {
        let terms: Vec<String> = self
            .0
            .iter()
            .zip(names)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, name)| {
                if c == 1 {
                    name.as_ref().to_string()
                } else {
                    format!("{} {}", c, name.as_ref())
                }
            })
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }

    /// Re-express this complex in another species coordinate system.
    /// `map[i]` is the target index of species `i`.
    fn remap(&self, map: &[usize], dim: usize) -> Complex {
        let mut out = vec![0; dim];
        for (i, &c) in self.0.iter().enumerate() {
            out[map[i]] = c;
        }
        Complex(out)
    }

    /// Monomial x^y evaluated exactly.
    pub fn monomial(&self, x: &[Rational]) -> Rational {
        self.0.iter().zip(x).fold(Rational::one(), |acc, (&e, xi)| {
            acc * num::pow(xi.clone(), e as usize)
        })
    }

    /// Monomial x^y in floating point. Zero exponents contribute 1, also at x_i = 0.
    pub fn monomial_f64(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Reaction {
    source: Complex,
    product: Complex,
}

impl Reaction {
    pub fn new(source: Complex, product: Complex) -> Result<Self> {
        if source.dim() != product.dim() {
            return Err(Error::Dimension {
                expected: source.dim(),
                got: product.dim(),
            });
        }
        if source == product {
            return Err(Error::InvalidNetwork(
                "reaction source and product must differ".into(),
            ));
        }
        Ok(Reaction { source, product })
    }

    pub fn source(&self) -> &Complex {
        &self.source
    }

    pub fn product(&self) -> &Complex {
        &self.product
    }

    /// Net stoichiometric change y' - y.
    pub fn reaction_vector(&self) -> Vec<i64> {
        self.product
            .0
            .iter()
            .zip(&self.source.0)
            .map(|(&p, &s)| i64::from(p) - i64::from(s))
            .collect()
    }

    pub fn label<S: AsRef<str>>(&self, names: &[S]) -> String {
        format!(
            "{} -> {}",
            self.source.label(names),
            self.product.label(names)
        )
    }
}

/// The triple (species, complexes, reactions). Complexes are derived from
/// the reactions rather than stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactionNetwork {
    name: Option<String>,
    species: Vec<Species>,
    reactions: Vec<Reaction>,
}

impl ReactionNetwork {
    pub fn new<S: Into<String>>(species: Vec<S>, reactions: Vec<Reaction>) -> Result<Self> {
        let species: Vec<Species> = species
            .into_iter()
            .enumerate()
            .map(|(index, name)| Species {
                name: name.into(),
                index,
            })
            .collect();
        let mut seen = HashSet::new();
        for s in &species {
            if s.name.is_empty() {
                return Err(Error::InvalidNetwork("empty species name".into()));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(Error::InvalidNetwork(format!(
                    "species `{}` declared twice",
                    s.name
                )));
            }
        }
        let n = species.len();
        let names: Vec<&str> = species.iter().map(|s| s.name.as_str()).collect();
        let mut distinct = HashSet::new();
        for r in &reactions {
            if r.source.dim() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: r.source.dim(),
                });
            }
            if !distinct.insert(r) {
                return Err(Error::DuplicateReaction(r.label(&names)));
            }
        }
        Ok(ReactionNetwork {
            name: None,
            species,
            reactions,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn species_names(&self) -> Vec<&str> {
        self.species.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn reaction_count(&self) -> usize {
        self.reactions.len()
    }

    pub fn reaction_label(&self, index: usize) -> String {
        self.reactions[index].label(&self.species_names())
    }

    pub fn complex_label(&self, c: &Complex) -> String {
        c.label(&self.species_names())
    }

    /// All complexes (sources and products), deduplicated, canonical order.
    pub fn complexes(&self) -> Vec<Complex> {
        let set: BTreeSet<&Complex> = self
            .reactions
            .iter()
            .flat_map(|r| [&r.source, &r.product])
            .collect();
        set.into_iter().cloned().collect()
    }

    /// n x d integer matrix whose column r is the reaction vector of reaction r.
    pub fn stoichiometric_matrix(&self) -> Vec<Vec<i64>> {
        let n = self.species_count();
        let mut rows = vec![vec![0i64; self.reaction_count()]; n];
        for (r, reaction) in self.reactions.iter().enumerate() {
            for (i, v) in reaction.reaction_vector().into_iter().enumerate() {
                rows[i][r] = v;
            }
        }
        rows
    }

    /// Deduplicated reaction sources in canonical (lexicographic) order.
    pub fn source_complexes(&self) -> Vec<Complex> {
        let set: BTreeSet<&Complex> = self.reactions.iter().map(|r| &r.source).collect();
        set.into_iter().cloned().collect()
    }

    /// Indices of reactions with the given source, in reaction order.
    pub fn reactions_from(&self, source: &Complex) -> Vec<usize> {
        self.reactions
            .iter()
            .enumerate()
            .filter(|(_, r)| &r.source == source)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn contains_reaction(&self, reaction: &Reaction) -> bool {
        self.reactions.contains(reaction)
    }

    /// A copy with `extra` appended to the reaction list.
    pub fn with_reactions(&self, extra: &[Reaction]) -> Result<Self> {
        let mut reactions = self.reactions.clone();
        reactions.extend_from_slice(extra);
        let mut out = ReactionNetwork::new(self.species_names(), reactions)?;
        out.name = self.name.clone();
        Ok(out)
    }

    /// A copy without the reaction at `index`.
    pub fn without_reaction(&self, index: usize) -> Result<Self> {
        if index >= self.reactions.len() {
            return Err(Error::Dimension {
                expected: self.reactions.len(),
                got: index,
            });
        }
        let mut reactions = self.reactions.clone();
        reactions.remove(index);
        let mut out = ReactionNetwork::new(self.species_names(), reactions)?;
        out.name = self.name.clone();
        Ok(out)
    }

    /// Re-express the network over `names` (a permutation of its species).
    /// Fails unless the two species sets coincide.
    pub fn aligned_to<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let target: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_ref(), i))
            .collect();
        if target.len() != self.species_count() {
            return Err(Error::SpeciesMismatch(format!(
                "{} species vs {}",
                self.species_count(),
                names.len()
            )));
        }
        let map = self
            .species
            .iter()
            .map(|s| {
                target.get(s.name.as_str()).copied().ok_or_else(|| {
                    Error::SpeciesMismatch(format!("species `{}` not present in both", s.name))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = names.len();
        let reactions = self
            .reactions
            .iter()
            .map(|r| Reaction {
                source: r.source.remap(&map, n),
                product: r.product.remap(&map, n),
            })
            .collect();
        let mut out = ReactionNetwork::new(
            names.iter().map(|s| s.as_ref().to_string()).collect(),
            reactions,
        )?;
        out.name = self.name.clone();
        Ok(out)
    }

    /// True iff both networks have the same reaction set once species are
    /// matched by name.
    pub fn same_reaction_set(&self, other: &ReactionNetwork) -> Result<bool> {
        let other = other.aligned_to(&self.species_names())?;
        let a: HashSet<&Reaction> = self.reactions.iter().collect();
        let b: HashSet<&Reaction> = other.reactions.iter().collect();
        Ok(a == b)
    }
}

/// Positive rate constants, one per reaction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RateVector(Vec<Rational>);

impl RateVector {
    pub fn new(rates: Vec<Rational>) -> Result<Self> {
        if let Some(index) = rates.iter().position(|r| !r.is_positive()) {
            return Err(Error::NonPositiveRate { index });
        }
        Ok(RateVector(rates))
    }

    pub fn from_integers(rates: &[i64]) -> Result<Self> {
        Self::new(
            rates
                .iter()
                .map(|&r| Rational::from_integer(r.into()))
                .collect(),
        )
    }

    /// Parse `p/q` or integer strings.
    pub fn from_fractions(rates: &[(i64, i64)]) -> Result<Self> {
        Self::new(
            rates
                .iter()
                .map(|&(p, q)| Rational::new(p.into(), q.into()))
                .collect(),
        )
    }

    pub fn ones(len: usize) -> Self {
        RateVector(vec![Rational::one(); len])
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0
            .iter()
            .map(|r| r.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// Fails unless the vector has one entry per reaction of `net`.
    pub fn check_for(&self, net: &ReactionNetwork) -> Result<()> {
        if self.len() != net.reaction_count() {
            return Err(Error::RateLength {
                expected: net.reaction_count(),
                got: self.len(),
            });
        }
        Ok(())
    }

    /// A copy with `extra` appended.
    pub fn extended(&self, extra: &[Rational]) -> Result<Self> {
        let mut v = self.0.clone();
        v.extend_from_slice(extra);
        Self::new(v)
    }

    /// Entrywise strings in `p/q` form (integers without denominator).
    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|r| r.to_string()).collect()
    }
}

impl fmt::Display for RateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

/// The pair (y' - y, (y' - y)(y' - y)^T) with the symmetric matrix stored as
/// its row-major upper triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedReactionVector {
    pub drift_part: Vec<i64>,
    pub diffusion_part: Vec<i64>,
}

impl ExtendedReactionVector {
    /// Drift part followed by diffusion part.
    pub fn flattened(&self) -> Vec<i64> {
        let mut v = self.drift_part.clone();
        v.extend_from_slice(&self.diffusion_part);
        v
    }
}

/// Position of entry (i, j), i <= j, in a row-major upper triangle of an
/// n x n matrix.
pub fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * n - i * (i + 1) / 2 + j
}

pub fn extended_reaction_vector(r: &Reaction) -> ExtendedReactionVector {
    let v = r.reaction_vector();
    let n = v.len();
    let mut diffusion_part = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            diffusion_part.push(v[i] * v[j]);
        }
    }
    ExtendedReactionVector {
        drift_part: v,
        diffusion_part,
    }
}

/// Every reaction of `sub` occurs in `sup`, with species matched by name.
/// Species of `sub` must all be present in `sup`.
pub fn is_subnetwork(sub: &ReactionNetwork, sup: &ReactionNetwork) -> Result<bool> {
    let target: HashMap<&str, usize> = sup
        .species
        .iter()
        .map(|s| (s.name.as_str(), s.index))
        .collect();
    let map = sub
        .species
        .iter()
        .map(|s| {
            target.get(s.name.as_str()).copied().ok_or_else(|| {
                Error::SpeciesMismatch(format!("species `{}` absent from supernetwork", s.name))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = sup.species_count();
    Ok(sub.reactions.iter().all(|r| {
        let mapped = Reaction {
            source: r.source.remap(&map, n),
            product: r.product.remap(&map, n),
        };
        sup.contains_reaction(&mapped)
    }))
}

pub(crate) fn rational_from_i64(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}
