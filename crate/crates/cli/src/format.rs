//! Text rendering of exact coefficients and polynomials.

use std::collections::BTreeSet;

use num::{One, Signed, Zero};
use rxnident_core::{Complex, GeneratorCoefficients, Rational};

/// Exact rational as `p` or `p/q`.
pub fn rational(q: &Rational) -> String {
    q.to_string()
}

pub fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(rational).collect()
}

/// Polynomial variables: lower-cased species names, unless that would make
/// two of them collide.
pub fn variables(species: &[String]) -> Vec<String> {
    let lower: Vec<String> = species.iter().map(|s| s.to_lowercase()).collect();
    let distinct: BTreeSet<&String> = lower.iter().collect();
    if distinct.len() == lower.len() {
        lower
    } else {
        species.to_vec()
    }
}

pub fn monomial(c: &Complex, vars: &[String]) -> String {
    c.coefficients()
        .iter()
        .zip(vars)
        .filter(|(&e, _)| e > 0)
        .map(|(&e, v)| {
            if e == 1 {
                v.clone()
            } else {
                format!("{}^{}", v, e)
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// `sum_y coeff_y x^y`, positive terms first and each sign group by
/// descending degree, so `12 - s` and `s + 26` read as usual.
pub fn polynomial<'a, I>(terms: I, vars: &[String]) -> String
where
    I: IntoIterator<Item = (&'a Complex, &'a Rational)>,
{
    let mut terms: Vec<(&Complex, &Rational)> =
        terms.into_iter().filter(|(_, q)| !q.is_zero()).collect();
    if terms.is_empty() {
        return "0".into();
    }
    terms.sort_by(|(ca, qa), (cb, qb)| {
        qb.is_positive()
            .cmp(&qa.is_positive())
            .then(cb.molecularity().cmp(&ca.molecularity()))
            .then(cb.cmp(ca))
    });
    let mut out = String::new();
    for (i, (c, q)) in terms.into_iter().enumerate() {
        let magnitude = q.abs();
        let m = monomial(c, vars);
        let body = match (m.is_empty(), magnitude.is_one()) {
            (true, _) => rational(&magnitude),
            (false, true) => m,
            (false, false) => format!("{}*{}", rational(&magnitude), m),
        };
        match (i, q.is_negative()) {
            (0, true) => out.push_str(&format!("-{}", body)),
            (0, false) => out.push_str(&body),
            (_, true) => out.push_str(&format!(" - {}", body)),
            (_, false) => out.push_str(&format!(" + {}", body)),
        }
    }
    out
}

pub fn drift_component(gc: &GeneratorCoefficients, i: usize, vars: &[String]) -> String {
    polynomial(gc.blocks().iter().map(|(y, b)| (y, &b.drift[i])), vars)
}

pub fn diffusion_entry(gc: &GeneratorCoefficients, i: usize, j: usize, vars: &[String]) -> String {
    let n = gc.species_count();
    polynomial(
        gc.blocks()
            .iter()
            .map(|(y, b)| (y, b.diffusion_entry(n, i, j))),
        vars,
    )
}

/// `A(s) = ...` for one species; `A[x](x, y) = ...` per component otherwise.
pub fn drift_lines(gc: &GeneratorCoefficients) -> Vec<String> {
    let vars = variables(gc.species());
    let args = vars.join(", ");
    let n = gc.species_count();
    (0..n)
        .map(|i| {
            let head = if n == 1 {
                format!("A({})", args)
            } else {
                format!("A[{}]({})", vars[i], args)
            };
            format!("{} = {}", head, drift_component(gc, i, &vars))
        })
        .collect()
}

pub fn diffusion_lines(gc: &GeneratorCoefficients) -> Vec<String> {
    let vars = variables(gc.species());
    let args = vars.join(", ");
    let n = gc.species_count();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let head = if n == 1 {
                format!("B({})", args)
            } else {
                format!("B[{},{}]({})", vars[i], vars[j], args)
            };
            out.push(format!("{} = {}", head, diffusion_entry(gc, i, j, &vars)));
        }
    }
    out
}
