//! Linear conjugacy search.
//!
//! A witness is G = D P (positive diagonal times permutation), rates k for
//! the first network and weights b for the second with, at every source y,
//!
//! ```text
//! sum_{y->y' in R}  k (y'-y)            = sum_{w->w' in R', Pw = y} b G(w'-w)
//! sum_{y->y' in R}  k (y'-y)(y'-y)^T    = sum_{w->w' in R', Pw = y} b G(w'-w)(w'-w)^T G^T
//! ```
//!
//! The system is polynomial in (k, b, c), so it is attacked numerically:
//! Levenberg–Marquardt on the residual in log variables (which keeps every
//! unknown positive), from several seeded random starts. A converged point
//! is rationalized by continued fractions and re-checked exactly. The search
//! is sound but not complete, hence [`ConjugacyVerdict::Unknown`].

use std::collections::BTreeSet;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num::{BigInt, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    extended_reaction_vector, rational_from_i64, upper_index, Complex, RateVector, Reaction,
    ReactionNetwork,
};
use crate::Rational;

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyOptions {
    /// Accept when ||residual|| / max(||lhs||, ||rhs||) falls below this.
    pub tol: f64,
    /// Random starts per permutation.
    pub starts: usize,
    /// Upper bound on permutations enumerated.
    pub max_perms: usize,
    /// Beyond this many species only the identity permutation is tried.
    pub max_species_for_perms: usize,
    pub max_iterations: usize,
    pub max_denominator: u64,
    pub seed: u64,
    /// Restrict the search to one permutation.
    pub fixed_permutation: Option<Vec<usize>>,
}

impl Default for ConjugacyOptions {
    fn default() -> Self {
        ConjugacyOptions {
            tol: 1e-10,
            starts: 10,
            max_perms: 40_320,
            max_species_for_perms: 8,
            max_iterations: 500,
            max_denominator: 1_000_000,
            seed: 0,
            fixed_permutation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyWitness {
    /// `permutation[i] = j`: species i of the first network corresponds to
    /// species j of the second, i.e. (P v)_i = v_j.
    pub permutation: Vec<usize>,
    /// Diagonal of D, rationalized.
    pub scaling: Vec<Rational>,
    /// Diagonal of D as found by the solver, before rationalization.
    pub float_scaling: Vec<f64>,
    pub kappa: RateVector,
    pub beta: RateVector,
    /// b_{w->w'} * c^{Pw} for every reaction of the second network.
    pub kappa_prime: RateVector,
    /// Relative residual of the float solution; 0 when `exact`.
    pub residual: f64,
    /// The rationalized values pass [`verify_conjugacy_witness`].
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConjugacyVerdict {
    Witness(ConjugacyWitness),
    /// No permutation maps the source complexes of one network onto the other's.
    StructurallyImpossible,
    /// Search exhausted without a witness; conjugacy is not ruled out.
    Unknown {
        permutations_tried: usize,
        best_residual: f64,
    },
}

/// Second network in the coordinates of the first: matched by name when
/// the species sets agree, by position otherwise.
fn align(a: &ReactionNetwork, b: &ReactionNetwork) -> Result<ReactionNetwork> {
    if a.species_count() != b.species_count() {
        return Err(Error::SpeciesMismatch(format!(
            "{} species vs {}",
            a.species_count(),
            b.species_count()
        )));
    }
    let names_a: BTreeSet<&str> = a.species_names().into_iter().collect();
    let names_b: BTreeSet<&str> = b.species_names().into_iter().collect();
    if names_a == names_b {
        b.aligned_to(&a.species_names())
    } else {
        Ok(b.clone())
    }
}

fn permute(c: &Complex, perm: &[usize]) -> Complex {
    Complex::new(perm.iter().map(|&j| c.coefficients()[j]).collect())
}

fn permute_vec<T: Clone>(v: &[T], perm: &[usize]) -> Vec<T> {
    perm.iter().map(|&j| v[j].clone()).collect()
}

fn is_permutation(perm: &[usize], n: usize) -> bool {
    perm.len() == n && perm.iter().copied().collect::<BTreeSet<_>>() == (0..n).collect()
}

fn admissible(a: &ReactionNetwork, b: &ReactionNetwork, perm: &[usize]) -> bool {
    let sa: BTreeSet<Complex> = a.source_complexes().into_iter().collect();
    let sb: BTreeSet<Complex> = b
        .source_complexes()
        .iter()
        .map(|w| permute(w, perm))
        .collect();
    sa == sb
}

/// Exact check of the drift and diffusion equalities under G = D P.
pub fn verify_conjugacy_witness(
    a: &ReactionNetwork,
    kappa: &RateVector,
    b: &ReactionNetwork,
    beta: &RateVector,
    scaling: &[Rational],
    permutation: &[usize],
) -> Result<bool> {
    let b = align(a, b)?;
    let n = a.species_count();
    kappa.check_for(a)?;
    beta.check_for(&b)?;
    if scaling.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: scaling.len(),
        });
    }
    if !is_permutation(permutation, n) {
        return Err(Error::InvalidWitness("not a permutation".into()));
    }
    if scaling.iter().any(|c| *c <= Rational::zero()) {
        return Err(Error::InvalidWitness("scaling must be positive".into()));
    }
    let width = n + n * (n + 1) / 2;
    let mut sources: BTreeSet<Complex> = a.source_complexes().into_iter().collect();
    sources.extend(b.source_complexes().iter().map(|w| permute(w, permutation)));
    for y in &sources {
        let mut lhs = vec![Rational::zero(); width];
        for (r, k) in a.reactions().iter().zip(kappa.as_slice()) {
            if r.source() != y {
                continue;
            }
            for (acc, v) in lhs.iter_mut().zip(extended_reaction_vector(r).flattened()) {
                *acc += k * rational_from_i64(v);
            }
        }
        let mut rhs = vec![Rational::zero(); width];
        for (r, bt) in b.reactions().iter().zip(beta.as_slice()) {
            if &permute(r.source(), permutation) != y {
                continue;
            }
            let gv: Vec<Rational> = permute_vec(&r.reaction_vector(), permutation)
                .into_iter()
                .zip(scaling)
                .map(|(v, c)| c * rational_from_i64(v))
                .collect();
            for i in 0..n {
                rhs[i] += bt * &gv[i];
                for j in i..n {
                    rhs[n + upper_index(n, i, j)] += bt * &gv[i] * &gv[j];
                }
            }
        }
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Search for G = D P and rates making the two networks linearly conjugate
/// with respect to their SDEs.
pub fn check_linear_conjugacy(
    a: &ReactionNetwork,
    b: &ReactionNetwork,
    opts: &ConjugacyOptions,
) -> Result<ConjugacyVerdict> {
    let b = align(a, b)?;
    if a.same_reaction_set(&b).unwrap_or(false) && a.species_names() == b.species_names() {
        return Err(Error::IdenticalNetworks);
    }
    let n = a.species_count();

    let (candidates, complete): (Vec<Vec<usize>>, bool) = match &opts.fixed_permutation {
        Some(p) => {
            if !is_permutation(p, n) {
                return Err(Error::InvalidWitness(
                    "fixed permutation is not a permutation".into(),
                ));
            }
            (vec![p.clone()], false)
        }
        None if n > opts.max_species_for_perms => (vec![(0..n).collect()], false),
        None => {
            let all: Vec<Vec<usize>> = (0..n).permutations(n).take(opts.max_perms.max(1)).collect();
            let complete = all.len() == (1..=n).product::<usize>();
            (all, complete)
        }
    };
    let admissible: Vec<(usize, Vec<usize>)> = candidates
        .into_iter()
        .filter(|p| admissible(a, &b, p))
        .enumerate()
        .collect();
    if admissible.is_empty() {
        return Ok(if complete {
            ConjugacyVerdict::StructurallyImpossible
        } else {
            ConjugacyVerdict::Unknown {
                permutations_tried: 0,
                best_residual: f64::INFINITY,
            }
        });
    }

    let outcomes: Vec<Result<SolveOutcome>> = admissible
        .par_iter()
        .map(|(idx, perm)| solve_permutation(a, &b, perm, *idx as u64, opts))
        .collect();
    let mut best = f64::INFINITY;
    for outcome in outcomes {
        match outcome? {
            SolveOutcome::Found(w) => return Ok(ConjugacyVerdict::Witness(*w)),
            SolveOutcome::Missed(r) => best = best.min(r),
        }
    }
    Ok(ConjugacyVerdict::Unknown {
        permutations_tried: admissible.len(),
        best_residual: best,
    })
}

enum SolveOutcome {
    Found(Box<ConjugacyWitness>),
    Missed(f64),
}

/// Float form of one permutation's system.
struct System {
    n: usize,
    width: usize,
    d_a: usize,
    d_b: usize,
    /// Row block (source index) of each reaction.
    block_a: Vec<usize>,
    block_b: Vec<usize>,
    /// Extended vectors of the first network.
    ext_a: Vec<Vec<f64>>,
    /// Permuted reaction vectors of the second network.
    vec_b: Vec<Vec<f64>>,
    blocks: usize,
}

impl System {
    fn new(a: &ReactionNetwork, b: &ReactionNetwork, perm: &[usize]) -> Self {
        let n = a.species_count();
        let sources = a.source_complexes();
        let index = |c: &Complex| sources.binary_search(c).expect("admissible permutation");
        System {
            n,
            width: n + n * (n + 1) / 2,
            d_a: a.reaction_count(),
            d_b: b.reaction_count(),
            block_a: a.reactions().iter().map(|r| index(r.source())).collect(),
            block_b: b
                .reactions()
                .iter()
                .map(|r| index(&permute(r.source(), perm)))
                .collect(),
            ext_a: a
                .reactions()
                .iter()
                .map(|r| {
                    extended_reaction_vector(r)
                        .flattened()
                        .into_iter()
                        .map(|v| v as f64)
                        .collect()
                })
                .collect(),
            vec_b: b
                .reactions()
                .iter()
                .map(|r: &Reaction| {
                    permute_vec(&r.reaction_vector(), perm)
                        .into_iter()
                        .map(|v| v as f64)
                        .collect()
                })
                .collect(),
            blocks: sources.len(),
        }
    }

    fn params(&self) -> usize {
        self.d_a + self.d_b + self.n
    }

    fn rows(&self) -> usize {
        self.blocks * self.width
    }

    /// (lhs, rhs) stacked over blocks, and the Jacobian of lhs - rhs plus a
    /// normalization row fixing the mean of log k to zero.
    fn evaluate(&self, theta: &[f64]) -> (DVector<f64>, DVector<f64>, DMatrix<f64>) {
        let n = self.n;
        let (log_k, rest) = theta.split_at(self.d_a);
        let (log_b, log_c) = rest.split_at(self.d_b);
        let c: Vec<f64> = log_c.iter().map(|v| v.exp()).collect();
        let rows = self.rows();
        let mut lhs = DVector::zeros(rows);
        let mut rhs = DVector::zeros(rows);
        let mut jac = DMatrix::zeros(rows + 1, self.params());

        for r in 0..self.d_a {
            let k = log_k[r].exp();
            let base = self.block_a[r] * self.width;
            for (t, &u) in self.ext_a[r].iter().enumerate() {
                lhs[base + t] += k * u;
                jac[(base + t, r)] = k * u;
            }
        }
        for (s, lb) in log_b.iter().enumerate() {
            let bt = lb.exp();
            let base = self.block_b[s] * self.width;
            let gv: Vec<f64> = self.vec_b[s].iter().zip(&c).map(|(v, ci)| v * ci).collect();
            let col = self.d_a + s;
            for i in 0..n {
                let term = bt * gv[i];
                rhs[base + i] += term;
                jac[(base + i, col)] -= term;
                jac[(base + i, self.d_a + self.d_b + i)] -= term;
                for j in i..n {
                    let row = base + n + upper_index(n, i, j);
                    let term = bt * gv[i] * gv[j];
                    rhs[row] += term;
                    jac[(row, col)] -= term;
                    jac[(row, self.d_a + self.d_b + i)] -= term;
                    jac[(row, self.d_a + self.d_b + j)] -= term;
                }
            }
        }
        for r in 0..self.d_a {
            jac[(rows, r)] = 1.0 / self.d_a as f64;
        }
        (lhs, rhs, jac)
    }

    fn residual(&self, theta: &[f64]) -> (DVector<f64>, f64) {
        let (lhs, rhs, _) = self.evaluate(theta);
        let mean_log_k = theta[..self.d_a].iter().sum::<f64>() / self.d_a.max(1) as f64;
        let mut r = DVector::zeros(self.rows() + 1);
        r.rows_mut(0, self.rows()).copy_from(&(&lhs - &rhs));
        r[self.rows()] = mean_log_k;
        let scale = lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);
        let rel = (&lhs - &rhs).norm() / scale;
        (r, rel)
    }
}

/// Levenberg–Marquardt from `theta`; returns the final point and its
/// relative residual.
fn levenberg_marquardt(
    sys: &System,
    mut theta: Vec<f64>,
    opts: &ConjugacyOptions,
) -> (Vec<f64>, f64) {
    let p = sys.params();
    let (mut r, mut rel) = sys.residual(&theta);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..opts.max_iterations {
        if rel < opts.tol * 1e-3 {
            break;
        }
        let (_, _, jac) = sys.evaluate(&theta);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &r;
        let mut improved = false;
        for _ in 0..30 {
            let mut lhs = jtj.clone();
            for i in 0..p {
                lhs[(i, i)] += lambda * (jtj[(i, i)] + 1e-12);
            }
            let Some(chol) = lhs.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&(-&grad));
            let candidate: Vec<f64> = theta
                .iter()
                .zip(delta.iter())
                .map(|(t, d)| (t + d).clamp(-50.0, 50.0))
                .collect();
            let (cr, crel) = sys.residual(&candidate);
            let ccost = cr.norm_squared();
            if ccost < cost {
                theta = candidate;
                r = cr;
                rel = crel;
                cost = ccost;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (theta, rel)
}

/// Best rational approximation with bounded denominator (continued fractions).
pub(crate) fn rationalize(x: f64, max_den: u64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = v - a;
        if frac.abs() < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 == 0 {
        return None;
    }
    Some(Rational::new(BigInt::from(h1), BigInt::from(k1)))
}

fn solve_permutation(
    a: &ReactionNetwork,
    b: &ReactionNetwork,
    perm: &[usize],
    stream: u64,
    opts: &ConjugacyOptions,
) -> Result<SolveOutcome> {
    let sys = System::new(a, b, perm);
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let mut best = f64::INFINITY;
    for _ in 0..opts.starts.max(1) {
        let start: Vec<f64> = (0..sys.params())
            .map(|_| rng.random_range(-1.5..1.5))
            .collect();
        let (theta, rel) = levenberg_marquardt(&sys, start, opts);
        best = best.min(rel);
        if rel >= opts.tol {
            continue;
        }
        return Ok(SolveOutcome::Found(Box::new(build_witness(
            a, b, perm, &sys, &theta, rel, opts,
        )?)));
    }
    Ok(SolveOutcome::Missed(best))
}

fn build_witness(
    a: &ReactionNetwork,
    b: &ReactionNetwork,
    perm: &[usize],
    sys: &System,
    theta: &[f64],
    rel: f64,
    opts: &ConjugacyOptions,
) -> Result<ConjugacyWitness> {
    // (k, b) is determined up to a common factor; pin the first rate to 1.
    let shift = theta.first().copied().unwrap_or(0.0);
    let kappa_f: Vec<f64> = theta[..sys.d_a].iter().map(|v| (v - shift).exp()).collect();
    let beta_f: Vec<f64> = theta[sys.d_a..sys.d_a + sys.d_b]
        .iter()
        .map(|v| (v - shift).exp())
        .collect();
    let float_scaling: Vec<f64> = theta[sys.d_a + sys.d_b..].iter().map(|v| v.exp()).collect();

    let to_positive = |values: &[f64]| -> Option<Vec<Rational>> {
        values
            .iter()
            .map(|&v| rationalize(v, opts.max_denominator).filter(|q| *q > Rational::zero()))
            .collect()
    };
    let (Some(kappa), Some(beta), Some(scaling)) = (
        to_positive(&kappa_f),
        to_positive(&beta_f),
        to_positive(&float_scaling),
    ) else {
        return Err(Error::Internal(
            "could not rationalize conjugacy witness".into(),
        ));
    };
    let kappa = RateVector::new(kappa)?;
    let beta = RateVector::new(beta)?;
    let exact = verify_conjugacy_witness(a, &kappa, b, &beta, &scaling, perm)?;
    let kappa_prime = RateVector::new(
        b.reactions()
            .iter()
            .zip(beta.as_slice())
            .map(|(r, bt)| bt * permute(r.source(), perm).monomial(&scaling))
            .collect(),
    )?;
    Ok(ConjugacyWitness {
        permutation: perm.to_vec(),
        scaling,
        float_scaling,
        kappa,
        beta,
        kappa_prime,
        residual: if exact { 0.0 } else { rel },
        exact,
    })
}

impl ConjugacyWitness {
    pub fn scaling_f64(&self) -> Vec<f64> {
        self.scaling
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn is_identity_scaling(&self) -> bool {
        self.scaling.iter().all(One::is_one)
    }
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

    #[test]
    fn continued_fractions() {
        assert_eq!(rationalize(0.5, 100), Some(q(1, 2)));
        assert_eq!(rationalize(2.0000000001, 1_000_000), Some(q(2, 1)));
        assert_eq!(rationalize(11.0 / 18.0, 1_000_000), Some(q(11, 18)));
        assert_eq!(rationalize(std::f64::consts::PI, 1000), Some(q(355, 113)));
        assert_eq!(rationalize(f64::NAN, 10), None);
    }

    #[test]
    fn verify_growth_pair() {
        let a = net("S1 -> 3 S1");
        let b = net("S1 -> 2 S1");
        let one = RateVector::ones(1);
        assert!(verify_conjugacy_witness(&a, &one, &b, &one, &[q(2, 1)], &[0]).unwrap());
        assert!(!verify_conjugacy_witness(&a, &one, &b, &one, &[q(3, 1)], &[0]).unwrap());
    }

    #[test]
    fn verify_identity() {
        let a = net("X -> 2X + Y\nY -> X");
        let k = RateVector::from_integers(&[3, 5]).unwrap();
        assert!(verify_conjugacy_witness(&a, &k, &a, &k, &[q(1, 1), q(1, 1)], &[0, 1]).unwrap());
    }

    #[test]
    fn verify_rejects_bad_shapes() {
        let a = net("S1 -> 3 S1");
        let one = RateVector::ones(1);
        assert!(verify_conjugacy_witness(&a, &one, &a, &one, &[q(1, 1), q(1, 1)], &[0]).is_err());
        assert!(
            verify_conjugacy_witness(&a, &one, &a, &RateVector::ones(2), &[q(1, 1)], &[0]).is_err()
        );
        assert!(verify_conjugacy_witness(&a, &one, &a, &one, &[q(1, 1)], &[1]).is_err());
    }

    #[test]
    fn finds_scaling_two() {
        let a = net("S1 -> 3 S1");
        let b = net("S1 -> 2 S1");
        let v = check_linear_conjugacy(&a, &b, &ConjugacyOptions::default()).unwrap();
        let ConjugacyVerdict::Witness(w) = v else {
            panic!("expected witness, got {:?}", v)
        };
        assert!((w.float_scaling[0] - 2.0).abs() < 1e-8);
        assert!(w.exact);
        assert_eq!(w.scaling, vec![q(2, 1)]);
        assert_eq!(w.kappa, w.beta);
        assert_eq!(w.kappa_prime.as_slice()[0], &w.beta.as_slice()[0] * q(2, 1));
    }

    #[test]
    fn fixed_identity_permutation_recovers_scaling() {
        let a = net("S -> 3S");
        let b = net("S -> 2S");
        let opts = ConjugacyOptions {
            fixed_permutation: Some(vec![0]),
            seed: 99,
            ..Default::default()
        };
        let ConjugacyVerdict::Witness(w) = check_linear_conjugacy(&a, &b, &opts).unwrap() else {
            panic!("no witness")
        };
        // Analytic oracle: 2k = c b and 4k = c^2 b give c = 4k/(2k) = 2.
        assert_eq!(w.scaling, vec![q(2, 1)]);
    }

    #[test]
    fn renamed_species_give_permutation_witness() {
        let a = net("X -> 2X + Y\nY -> X");
        // U plays Y and V plays X.
        let b = net("species: U, V\nV -> 2V + U\nU -> V");
        let ConjugacyVerdict::Witness(w) =
            check_linear_conjugacy(&a, &b, &ConjugacyOptions::default()).unwrap()
        else {
            panic!("no witness")
        };
        assert_eq!(w.permutation, vec![1, 0]);
        assert!(w.exact);
        assert!(w.is_identity_scaling());
    }

    #[test]
    fn source_sets_that_cannot_match() {
        let a = net("species: A, B\n0 -> A\nA -> B");
        let b = net("species: A, B\n2A -> B\nB -> 0");
        assert_eq!(
            check_linear_conjugacy(&a, &b, &ConjugacyOptions::default()).unwrap(),
            ConjugacyVerdict::StructurallyImpossible
        );
    }

    #[test]
    fn sign_obstruction_is_unknown() {
        // Same source, but the drifts point in opposite directions.
        let a = net("S -> 2S");
        let b = net("S -> 0");
        let v = check_linear_conjugacy(&a, &b, &ConjugacyOptions::default()).unwrap();
        assert!(matches!(
            v,
            ConjugacyVerdict::Unknown {
                permutations_tried: 1,
                ..
            }
        ));
    }

    #[test]
    fn species_count_mismatch() {
        let a = net("S -> 2S");
        let b = net("A -> B");
        assert!(matches!(
            check_linear_conjugacy(&a, &b, &ConjugacyOptions::default()),
            Err(Error::SpeciesMismatch(_))
        ));
    }
}
