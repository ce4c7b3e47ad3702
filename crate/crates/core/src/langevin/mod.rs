//! Drift and diffusion of the chemical Langevin equation.
//!
//! For mass-action kinetics both coefficients are polynomials whose
//! monomials are the source complexes:
//!
//! ```text
//! A(x) = sum_y x^y sum_{y->y'} k (y'-y)
//! B(x) = sum_y x^y sum_{y->y'} k (y'-y)(y'-y)^T
//! ```
//!
//! [`GeneratorCoefficients`] stores the per-source sums exactly. Two
//! networks have the same generator iff these tables agree.

mod simulate;

pub use simulate::{
    simulate_em, simulate_endpoints, simulate_path, simulate_paths, BoxDomain, EmConfig, PathEnd,
    SimulationPath,
};

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{
    extended_reaction_vector, rational_from_i64, upper_index, Complex, RateVector, ReactionNetwork,
};
use crate::Rational;

/// Coefficients of one source complex y: the vector multiplying x^y in the
/// drift and the symmetric matrix (upper triangle, row-major) multiplying it
/// in the diffusion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorBlock {
    pub drift: Vec<Rational>,
    pub diffusion: Vec<Rational>,
}

impl GeneratorBlock {
    fn zero(n: usize) -> Self {
        GeneratorBlock {
            drift: vec![Rational::zero(); n],
            diffusion: vec![Rational::zero(); n * (n + 1) / 2],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.drift.iter().chain(&self.diffusion).all(Zero::is_zero)
    }

    pub fn diffusion_entry(&self, n: usize, i: usize, j: usize) -> &Rational {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.diffusion[upper_index(n, i, j)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorCoefficients {
    species: Vec<String>,
    blocks: BTreeMap<Complex, GeneratorBlock>,
}

impl GeneratorCoefficients {
    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    /// Per-source blocks in canonical complex order.
    pub fn blocks(&self) -> &BTreeMap<Complex, GeneratorBlock> {
        &self.blocks
    }

    pub fn block(&self, source: &Complex) -> Option<&GeneratorBlock> {
        self.blocks.get(source)
    }

    fn keys_union<'a>(&'a self, other: &'a Self) -> impl Iterator<Item = &'a Complex> {
        let mut keys: Vec<&Complex> = self.blocks.keys().chain(other.blocks.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
    }

    fn compare(&self, other: &Self, with_diffusion: bool) -> bool {
        if self.species != other.species {
            return false;
        }
        let zero = GeneratorBlock::zero(self.species_count());
        self.keys_union(other).all(|y| {
            let a = self.blocks.get(y).unwrap_or(&zero);
            let b = other.blocks.get(y).unwrap_or(&zero);
            a.drift == b.drift && (!with_diffusion || a.diffusion == b.diffusion)
        })
    }

    /// Same drift and diffusion polynomials; absent sources count as zero.
    pub fn same_generator(&self, other: &Self) -> bool {
        self.compare(other, true)
    }

    /// Same drift polynomial, i.e. the same mass-action ODE.
    pub fn same_drift(&self, other: &Self) -> bool {
        self.compare(other, false)
    }
}

pub fn generator_coefficients(
    net: &ReactionNetwork,
    kappa: &RateVector,
) -> Result<GeneratorCoefficients> {
    kappa.check_for(net)?;
    let n = net.species_count();
    let mut blocks: BTreeMap<Complex, GeneratorBlock> = BTreeMap::new();
    for (r, k) in net.reactions().iter().zip(kappa.as_slice()) {
        let ext = extended_reaction_vector(r);
        let block = blocks
            .entry(r.source().clone())
            .or_insert_with(|| GeneratorBlock::zero(n));
        for (acc, &v) in block.drift.iter_mut().zip(&ext.drift_part) {
            *acc += k * rational_from_i64(v);
        }
        for (acc, &v) in block.diffusion.iter_mut().zip(&ext.diffusion_part) {
            *acc += k * rational_from_i64(v);
        }
    }
    Ok(GeneratorCoefficients {
        species: net.species_names().iter().map(|s| s.to_string()).collect(),
        blocks,
    })
}

/// Coefficient tables of both networks, with `b` re-expressed in the species
/// order of `a`.
fn paired_coefficients(
    a: &ReactionNetwork,
    kappa_a: &RateVector,
    b: &ReactionNetwork,
    kappa_b: &RateVector,
) -> Result<(GeneratorCoefficients, GeneratorCoefficients)> {
    let b = b.aligned_to(&a.species_names())?;
    Ok((
        generator_coefficients(a, kappa_a)?,
        generator_coefficients(&b, kappa_b)?,
    ))
}

/// Exact generator equality: per-source drift and diffusion coefficients
/// agree as rationals.
pub fn generators_equal(
    a: &ReactionNetwork,
    kappa_a: &RateVector,
    b: &ReactionNetwork,
    kappa_b: &RateVector,
) -> Result<bool> {
    let (ga, gb) = paired_coefficients(a, kappa_a, b, kappa_b)?;
    Ok(ga.same_generator(&gb))
}

/// Exact equality of the mass-action ODE right-hand sides.
pub fn ode_drifts_equal(
    a: &ReactionNetwork,
    kappa_a: &RateVector,
    b: &ReactionNetwork,
    kappa_b: &RateVector,
) -> Result<bool> {
    let (ga, gb) = paired_coefficients(a, kappa_a, b, kappa_b)?;
    Ok(ga.same_drift(&gb))
}

fn check_positive_exact(x: &[Rational], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x.len(),
        });
    }
    for (index, v) in x.iter().enumerate() {
        if *v <= Rational::zero() {
            return Err(Error::NonPositiveState {
                index,
                value: v.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

fn check_positive(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x.len(),
        });
    }
    for (index, &value) in x.iter().enumerate() {
        if value.is_nan() || value <= 0.0 {
            return Err(Error::NonPositiveState { index, value });
        }
    }
    Ok(())
}

/// Mass-action ODE right-hand side sum_r k_r (y'_r - y_r) x^{y_r}, exact.
pub fn ode_rhs(net: &ReactionNetwork, kappa: &RateVector, x: &[Rational]) -> Result<Vec<Rational>> {
    kappa.check_for(net)?;
    check_positive_exact(x, net.species_count())?;
    let mut out = vec![Rational::zero(); net.species_count()];
    for (r, k) in net.reactions().iter().zip(kappa.as_slice()) {
        let rate = k * r.source().monomial(x);
        for (acc, v) in out.iter_mut().zip(r.reaction_vector()) {
            if v != 0 {
                *acc += &rate * rational_from_i64(v);
            }
        }
    }
    Ok(out)
}

pub fn ode_rhs_f64(net: &ReactionNetwork, kappa: &RateVector, x: &[f64]) -> Result<Vec<f64>> {
    kappa.check_for(net)?;
    check_positive(x, net.species_count())?;
    let mut out = vec![0.0; net.species_count()];
    for (r, k) in net.reactions().iter().zip(kappa.to_f64()) {
        let rate = k * r.source().monomial_f64(x);
        for (acc, v) in out.iter_mut().zip(r.reaction_vector()) {
            *acc += rate * v as f64;
        }
    }
    Ok(out)
}

/// A(x) in floating point.
pub fn eval_drift(gc: &GeneratorCoefficients, x: &[f64]) -> Result<Vec<f64>> {
    check_positive(x, gc.species_count())?;
    Ok(FloatGenerator::new(gc).drift(x))
}

/// B(x) in floating point, as a full symmetric matrix.
pub fn eval_diffusion(gc: &GeneratorCoefficients, x: &[f64]) -> Result<DMatrix<f64>> {
    check_positive(x, gc.species_count())?;
    Ok(FloatGenerator::new(gc).diffusion(x))
}

/// A(x) exactly at a rational point.
pub fn eval_drift_exact(gc: &GeneratorCoefficients, x: &[Rational]) -> Result<Vec<Rational>> {
    let n = gc.species_count();
    check_positive_exact(x, n)?;
    let mut out = vec![Rational::zero(); n];
    for (y, block) in &gc.blocks {
        let m = y.monomial(x);
        for (acc, c) in out.iter_mut().zip(&block.drift) {
            *acc += c * &m;
        }
    }
    Ok(out)
}

/// B(x) exactly at a rational point, upper triangle row-major.
pub fn eval_diffusion_exact(gc: &GeneratorCoefficients, x: &[Rational]) -> Result<Vec<Rational>> {
    let n = gc.species_count();
    check_positive_exact(x, n)?;
    let mut out = vec![Rational::zero(); n * (n + 1) / 2];
    for (y, block) in &gc.blocks {
        let m = y.monomial(x);
        for (acc, c) in out.iter_mut().zip(&block.diffusion) {
            *acc += c * &m;
        }
    }
    Ok(out)
}

/// Float copy of the coefficient table for repeated evaluation. All-zero
/// blocks are dropped so that networks with equal generators compile to
/// identical term lists.
#[derive(Debug, Clone)]
pub(crate) struct FloatGenerator {
    n: usize,
    terms: Vec<(Vec<u32>, Vec<f64>, Vec<f64>)>,
}

impl FloatGenerator {
    pub(crate) fn new(gc: &GeneratorCoefficients) -> Self {
        let to_f = |v: &[Rational]| v.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        FloatGenerator {
            n: gc.species_count(),
            terms: gc
                .blocks
                .iter()
                .filter(|(_, b)| !b.is_zero())
                .map(|(y, b)| {
                    (
                        y.coefficients().to_vec(),
                        to_f(&b.drift),
                        to_f(&b.diffusion),
                    )
                })
                .collect(),
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    fn monomial(exps: &[u32], x: &[f64]) -> f64 {
        exps.iter()
            .zip(x)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }

    pub(crate) fn drift(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.drift_into(x, &mut out);
        out
    }

    pub(crate) fn drift_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (exps, drift, _) in &self.terms {
            let m = Self::monomial(exps, x);
            for (acc, c) in out.iter_mut().zip(drift) {
                *acc += c * m;
            }
        }
    }

    pub(crate) fn diffusion_upper_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (exps, _, diffusion) in &self.terms {
            let m = Self::monomial(exps, x);
            for (acc, c) in out.iter_mut().zip(diffusion) {
                *acc += c * m;
            }
        }
    }

    pub(crate) fn diffusion(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let mut upper = vec![0.0; n * (n + 1) / 2];
        self.diffusion_upper_into(x, &mut upper);
        upper_to_matrix(n, &upper)
    }
}

pub(crate) fn upper_to_matrix(n: usize, upper: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = upper[upper_index(n, i, j)];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Default clamping tolerance for [`psd_sqrt`].
pub const PSD_TOL: f64 = 1e-10;

/// Symmetric positive semi-definite square root via eigendecomposition.
/// Eigenvalues in [-tol, 0) are clamped to zero; anything below -tol is an
/// error.
pub fn psd_sqrt(b: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    if b.nrows() != b.ncols() {
        return Err(Error::Dimension {
            expected: b.nrows(),
            got: b.ncols(),
        });
    }
    let n = b.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if n == 1 {
        let v = b[(0, 0)];
        if v < -tol {
            return Err(Error::NotPsd(v));
        }
        return Ok(DMatrix::from_element(1, 1, v.max(0.0).sqrt()));
    }
    let sym = (b + b.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let min = eig.eigenvalues.min();
    if min < -tol {
        return Err(Error::NotPsd(min));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    let sigma = q * DMatrix::from_diagonal(&roots) * q.transpose();
    Ok((&sigma + sigma.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_network;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    fn doc(text: &str) -> (ReactionNetwork, RateVector) {
        let d = parse_network(text).unwrap();
        (d.network, d.rates.unwrap())
    }

    const EX_1_1: &str = "0 -> 2 S [1]\n0 -> S [4]\nS -> 0 [1]\n0 -> 3 S [2]";

    #[test]
    fn example_1_1_coefficients() {
        let (net, k) = doc(EX_1_1);
        let gc = generator_coefficients(&net, &k).unwrap();
        let empty = gc.block(&Complex::new(vec![0])).unwrap();
        assert_eq!(empty.drift, vec![q(12, 1)]);
        assert_eq!(empty.diffusion, vec![q(26, 1)]);
        let s = gc.block(&Complex::new(vec![1])).unwrap();
        assert_eq!(s.drift, vec![q(-1, 1)]);
        assert_eq!(s.diffusion, vec![q(1, 1)]);

        let other = RateVector::from_integers(&[4, 1, 1, 1]).unwrap();
        assert_eq!(generator_coefficients(&net, &other).unwrap(), gc);
        assert!(generators_equal(&net, &k, &net, &other).unwrap());
    }

    #[test]
    fn single_birth() {
        let (net, k) = doc("0 -> S [1]");
        let gc = generator_coefficients(&net, &k).unwrap();
        let b = gc.block(&Complex::new(vec![0])).unwrap();
        assert_eq!(
            (b.drift.clone(), b.diffusion.clone()),
            (vec![q(1, 1)], vec![q(1, 1)])
        );
    }

    #[test]
    fn rate_length_mismatch() {
        let (net, _) = doc(EX_1_1);
        let k = RateVector::from_integers(&[1, 2]).unwrap();
        assert!(matches!(
            generator_coefficients(&net, &k),
            Err(Error::RateLength {
                expected: 4,
                got: 2
            })
        ));
    }

    #[test]
    fn example_4_1_same_sde() {
        let net = parse_network("X -> 2X + Y\nX -> 3X + 2Y\nX -> 4X + 3Y")
            .unwrap()
            .network;
        let k = RateVector::from_integers(&[2, 7, 5]).unwrap();
        let k2 = RateVector::from_integers(&[5, 4, 6]).unwrap();
        assert!(generators_equal(&net, &k, &net, &k2).unwrap());
    }

    #[test]
    fn example_5_12_same_sde() {
        let (a, ka) = doc("0 -> S [5]\n0 -> 4S [1]\nS -> 0 [1]");
        let (b, kb) = doc("0 -> 2S [3]\n0 -> 3S [1]\nS -> 0 [1]");
        assert!(generators_equal(&a, &ka, &b, &kb).unwrap());
    }

    #[test]
    fn scaling_rates_changes_generator() {
        let (net, k) = doc(EX_1_1);
        let doubled = RateVector::new(k.as_slice().iter().map(|v| v * q(2, 1)).collect()).unwrap();
        assert!(!generators_equal(&net, &k, &net, &doubled).unwrap());
    }

    #[test]
    fn generators_equal_requires_same_species() {
        let (a, ka) = doc("0 -> S [1]");
        let (b, kb) = doc("0 -> T [1]");
        assert!(matches!(
            generators_equal(&a, &ka, &b, &kb),
            Err(Error::SpeciesMismatch(_))
        ));
    }

    #[test]
    fn ode_rhs_values() {
        let (net, k) = doc(EX_1_1);
        assert_eq!(ode_rhs(&net, &k, &[q(3, 1)]).unwrap(), vec![q(9, 1)]);
        let (bd, k) = doc("S -> 0 [3/2]\nS -> 2S [1]");
        assert_eq!(ode_rhs(&bd, &k, &[q(2, 1)]).unwrap(), vec![q(-1, 1)]);
        assert!(ode_rhs(&bd, &k, &[q(0, 1)]).is_err());
        // x^0 = 1 for species absent from the source
        let (net, k) = doc("species: A, B\n0 -> A [2]\nB -> 0 [3]");
        assert_eq!(
            ode_rhs(&net, &k, &[q(5, 1), q(7, 1)]).unwrap(),
            vec![q(2, 1), q(-21, 1)]
        );
    }

    #[test]
    fn evaluation() {
        let (net, k) = doc(EX_1_1);
        let gc = generator_coefficients(&net, &k).unwrap();
        assert_eq!(eval_drift(&gc, &[1.0]).unwrap(), vec![11.0]);
        assert_eq!(eval_diffusion(&gc, &[1.0]).unwrap()[(0, 0)], 27.0);
        let (net, k) = doc("0 -> S [5]\n0 -> 4S [1]\nS -> 0 [1]");
        let gc = generator_coefficients(&net, &k).unwrap();
        assert_eq!(eval_drift(&gc, &[9.0]).unwrap(), vec![0.0]);
        assert!(eval_drift(&gc, &[-1.0]).is_err());

        let empty = ReactionNetwork::new(vec!["S"], vec![]).unwrap();
        let gc = generator_coefficients(&empty, &RateVector::ones(0)).unwrap();
        assert_eq!(eval_drift(&gc, &[2.0]).unwrap(), vec![0.0]);
        assert_eq!(eval_diffusion(&gc, &[2.0]).unwrap()[(0, 0)], 0.0);
    }

    #[test]
    fn psd_sqrt_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert!((psd_sqrt(&id, PSD_TOL).unwrap() - &id).norm() < 1e-14);
        assert_eq!(
            psd_sqrt(&DMatrix::from_element(1, 1, 4.0), PSD_TOL).unwrap()[(0, 0)],
            2.0
        );
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(psd_sqrt(&neg, PSD_TOL), Err(Error::NotPsd(_))));
        let tiny = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-12]);
        let s = psd_sqrt(&tiny, PSD_TOL).unwrap();
        assert!(s[(1, 1)].abs() < 1e-14);
    }

    #[test]
    fn psd_sqrt_example_3_3_diffusion() {
        let net = parse_network("A0 -> 2 A1\nA0 -> A1 + A2\nA0 -> 2 A3")
            .unwrap()
            .network;
        let gc = generator_coefficients(&net, &RateVector::ones(3)).unwrap();
        let b = eval_diffusion(&gc, &[1.0; 4]).unwrap();
        // Oracle: assemble B directly from the outer products.
        let vs: [[f64; 4]; 3] = [
            [-1.0, 2.0, 0.0, 0.0],
            [-1.0, 1.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0, 2.0],
        ];
        let mut oracle = DMatrix::zeros(4, 4);
        for v in vs {
            let v = nalgebra::DVector::from_row_slice(&v);
            oracle += &v * v.transpose();
        }
        assert_eq!(b, oracle);
        let s = psd_sqrt(&b, PSD_TOL).unwrap();
        assert!((&s * s.transpose() - &b).norm() <= 1e-10 * (1.0 + b.norm()));
        assert!((&s - s.transpose()).norm() < 1e-14);
    }
}
