//! The `.rn` text format.
//!
//! ```text
//! # comment
//! network: birth-death
//! species: S
//! S -> 0      [3/2]
//! S -> 2 S    [1]
//! A <-> B     [1, 0.5]
//! ```
//!
//! Species order is the `species:` line when given, otherwise order of first
//! appearance. Rates are integers, decimals or fractions and are kept exact.
//! A reversible arrow expands into the forward reaction followed by the
//! backward one, and takes either no rates or exactly two.

use std::collections::HashMap;
use std::fmt;

use num::{BigInt, Signed, Zero};

use crate::model::{Complex, RateVector, Reaction, ReactionNetwork};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDocument {
    pub network: ReactionNetwork,
    pub rates: Option<RateVector>,
    pub source_text: String,
}

impl NetworkDocument {
    pub fn new(network: ReactionNetwork, rates: Option<RateVector>) -> crate::Result<Self> {
        if let Some(r) = &rates {
            r.check_for(&network)?;
        }
        let mut doc = NetworkDocument {
            network,
            rates,
            source_text: String::new(),
        };
        doc.source_text = format_network(&doc);
        Ok(doc)
    }
}

struct RawReaction {
    line: usize,
    column: usize,
    source: Vec<(u32, String)>,
    product: Vec<(u32, String)>,
    rate: Option<Rational>,
}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    line: usize,
    text: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Cursor {
            chars: text.char_indices().collect(),
            pos: 0,
            line,
            text,
        }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        let start = match self.chars.get(self.pos) {
            Some(&(b, _)) => b,
            None => return false,
        };
        if self.text[start..].starts_with(s) {
            self.pos += s.chars().count();
            true
        } else {
            false
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            out.push(c);
            self.pos += 1;
        }
        out
    }

    fn identifier(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_alphabetic() || c == '_' => {
                Ok(self.take_while(|c| c.is_alphanumeric() || c == '_' || c == '\''))
            }
            _ => Err(self.error("expected species name")),
        }
    }

    fn complex(&mut self) -> Result<Vec<(u32, String)>, ParseError> {
        self.skip_ws();
        if self.eat("∅") {
            return Ok(Vec::new());
        }
        let mut terms = Vec::new();
        loop {
            self.skip_ws();
            let col = self.column();
            let digits = self.take_while(|c| c.is_ascii_digit());
            let coefficient = if digits.is_empty() {
                1
            } else {
                digits.parse::<u32>().map_err(|_| ParseError {
                    line: self.line,
                    column: col,
                    message: format!("coefficient `{}` out of range", digits),
                })?
            };
            self.skip_ws();
            let has_name = matches!(self.peek(), Some(c) if c.is_alphabetic() || c == '_');
            if !has_name {
                if coefficient == 0 && !digits.is_empty() && terms.is_empty() {
                    return Ok(Vec::new());
                }
                return Err(self.error("expected species name"));
            }
            let name = self.identifier()?;
            if coefficient == 0 {
                return Err(ParseError {
                    line: self.line,
                    column: col,
                    message: "zero stoichiometric coefficient".into(),
                });
            }
            terms.push((coefficient, name));
            if !self.eat("+") {
                break;
            }
        }
        Ok(terms)
    }

    fn rate(&mut self) -> Result<Rational, ParseError> {
        self.skip_ws();
        let col = self.column();
        let literal = self.take_while(|c| !c.is_whitespace() && c != ',' && c != ']');
        parse_rate(&literal).map_err(|message| ParseError {
            line: self.line,
            column: col,
            message,
        })
    }
}

/// Exact value of an integer, decimal or `p/q` literal; must be positive.
pub fn parse_rate(literal: &str) -> Result<Rational, String> {
    if literal.is_empty() {
        return Err("expected rate".into());
    }
    let value = if let Some((p, q)) = literal.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| format!("invalid rate `{}`", literal))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| format!("invalid rate `{}`", literal))?;
        if q.is_zero() {
            return Err("zero denominator in rate".into());
        }
        Rational::new(p, q)
    } else if let Some((int, frac)) = literal.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let valid = |s: &str| s.chars().all(|c| c.is_ascii_digit());
        if !valid(int_digits) || !valid(frac) || (int_digits.is_empty() && frac.is_empty()) {
            return Err(format!("invalid rate `{}`", literal));
        }
        let digits = format!("{}{}", int_digits, frac);
        let mut numer: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits
                .parse()
                .map_err(|_| format!("invalid rate `{}`", literal))?
        };
        if negative {
            numer = -numer;
        }
        Rational::new(numer, num::pow(BigInt::from(10), frac.len()))
    } else {
        Rational::from_integer(
            literal
                .parse()
                .map_err(|_| format!("invalid rate `{}`", literal))?,
        )
    };
    if !value.is_positive() {
        return Err("rate must be positive".into());
    }
    Ok(value)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

pub fn parse_network(text: &str) -> Result<NetworkDocument, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError {
            line: 1,
            column: 1,
            message: "empty input".into(),
        });
    }
    let mut name = None;
    let mut declared: Option<Vec<String>> = None;
    let mut raw = Vec::new();

    for (i, full_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(full_line);
        if line.trim().is_empty() {
            continue;
        }
        let trimmed = line.trim_start();
        let indent = line.chars().count() - trimmed.chars().count();
        if let Some(rest) = trimmed.strip_prefix("network:") {
            name = Some(rest.trim().to_string());
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("species:") {
            if declared.is_some() {
                return Err(ParseError {
                    line: line_no,
                    column: indent + 1,
                    message: "species declared twice".into(),
                });
            }
            if !raw.is_empty() {
                return Err(ParseError {
                    line: line_no,
                    column: indent + 1,
                    message: "species line must precede reactions".into(),
                });
            }
            let mut list = Vec::new();
            for s in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let mut c = Cursor::new(s, line_no);
                let id = c.identifier()?;
                if !c.at_end() || list.contains(&id) {
                    return Err(ParseError {
                        line: line_no,
                        column: indent + 1,
                        message: format!("invalid species declaration `{}`", s),
                    });
                }
                list.push(id);
            }
            declared = Some(list);
            continue;
        }
        parse_reaction_line(line, line_no, &mut raw)?;
    }

    let mut species: Vec<String> = declared.clone().unwrap_or_default();
    let mut index: HashMap<String, usize> = species
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    for r in &raw {
        for (_, s) in r.source.iter().chain(&r.product) {
            if !index.contains_key(s) {
                if declared.is_some() {
                    return Err(ParseError {
                        line: r.line,
                        column: r.column,
                        message: format!("unknown species `{}`", s),
                    });
                }
                index.insert(s.clone(), species.len());
                species.push(s.clone());
            }
        }
    }
    if species.is_empty() {
        return Err(ParseError {
            line: 1,
            column: 1,
            message: "no species".into(),
        });
    }

    let n = species.len();
    let to_complex = |terms: &[(u32, String)]| {
        let mut v = vec![0u32; n];
        for (c, s) in terms {
            v[index[s]] += c;
        }
        Complex::new(v)
    };
    let rated = raw.iter().filter(|r| r.rate.is_some()).count();
    if rated != 0 && rated != raw.len() {
        let first = raw.iter().find(|r| r.rate.is_none()).unwrap();
        return Err(ParseError {
            line: first.line,
            column: first.column,
            message: "rates must be given for all reactions or none".into(),
        });
    }

    let mut reactions: Vec<Reaction> = Vec::with_capacity(raw.len());
    for r in &raw {
        let reaction =
            Reaction::new(to_complex(&r.source), to_complex(&r.product)).map_err(|_| {
                ParseError {
                    line: r.line,
                    column: r.column,
                    message: "source and product complexes are identical".into(),
                }
            })?;
        if reactions.contains(&reaction) {
            return Err(ParseError {
                line: r.line,
                column: r.column,
                message: format!("duplicate reaction `{}`", reaction.label(&species)),
            });
        }
        reactions.push(reaction);
    }

    let mut network = ReactionNetwork::new(species, reactions).map_err(|e| ParseError {
        line: 1,
        column: 1,
        message: e.to_string(),
    })?;
    if let Some(name) = name.filter(|s| !s.is_empty()) {
        network = network.with_name(name);
    }
    let rates = if rated > 0 {
        let values = raw.into_iter().map(|r| r.rate.unwrap()).collect();
        Some(RateVector::new(values).expect("rates validated during parsing"))
    } else {
        None
    };
    Ok(NetworkDocument {
        network,
        rates,
        source_text: text.to_string(),
    })
}

fn parse_reaction_line(
    line: &str,
    line_no: usize,
    out: &mut Vec<RawReaction>,
) -> Result<(), ParseError> {
    let mut c = Cursor::new(line, line_no);
    c.skip_ws();
    let column = c.column();
    let source = c.complex()?;
    let reversible = if c.eat("<->") || c.eat("⇌") {
        true
    } else if c.eat("->") || c.eat("→") {
        false
    } else {
        return Err(c.error("expected `->` or `<->`"));
    };
    let product = c.complex()?;
    let mut rates = Vec::new();
    if c.eat("[") {
        loop {
            rates.push(c.rate()?);
            if c.eat(",") {
                continue;
            }
            if c.eat("]") {
                break;
            }
            return Err(c.error("expected `,` or `]`"));
        }
    }
    if !c.at_end() {
        return Err(c.error("unexpected trailing input"));
    }
    let expected = if reversible { 2 } else { 1 };
    if !rates.is_empty() && rates.len() != expected {
        return Err(ParseError {
            line: line_no,
            column,
            message: if reversible {
                "reversible reaction needs two rates `[forward, backward]`".into()
            } else {
                format!("expected one rate, got {}", rates.len())
            },
        });
    }
    let mut rates = rates.into_iter();
    let forward = rates.next();
    let backward = rates.next();
    if reversible {
        out.push(RawReaction {
            line: line_no,
            column,
            source: source.clone(),
            product: product.clone(),
            rate: forward,
        });
        out.push(RawReaction {
            line: line_no,
            column,
            source: product,
            product: source,
            rate: backward,
        });
    } else {
        out.push(RawReaction {
            line: line_no,
            column,
            source,
            product,
            rate: forward,
        });
    }
    Ok(())
}

/// Canonical text of a document. Always writes the species line so that
/// species order survives a round trip; rates appear only when present.
pub fn format_network(doc: &NetworkDocument) -> String {
    let net = &doc.network;
    let names = net.species_names();
    let mut out = String::new();
    if let Some(name) = net.name() {
        out.push_str(&format!("network: {}\n", name));
    }
    out.push_str(&format!("species: {}\n", names.join(", ")));
    for (i, r) in net.reactions().iter().enumerate() {
        out.push_str(&r.label(&names));
        if let Some(rates) = &doc.rates {
            out.push_str(&format!(" [{}]", rates.as_slice()[i]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn example_1_1_document() {
        let doc = parse_network("0 -> 2 S [1]\n0 -> S [4]\nS -> 0 [1]\n0 -> 3 S [2]").unwrap();
        assert_eq!(doc.network.species_names(), vec!["S"]);
        assert_eq!(doc.network.reaction_count(), 4);
        assert_eq!(
            doc.rates.unwrap(),
            RateVector::from_integers(&[1, 4, 1, 2]).unwrap()
        );
    }

    #[test]
    fn fractional_rate_and_sum_complex() {
        let doc = parse_network("A0 -> A1 + A2 [2/9]").unwrap();
        let net = &doc.network;
        assert_eq!(net.species_names(), vec!["A0", "A1", "A2"]);
        assert_eq!(net.reactions()[0].source().coefficients(), &[1, 0, 0]);
        assert_eq!(net.reactions()[0].product().coefficients(), &[0, 1, 1]);
        assert_eq!(doc.rates.unwrap().as_slice(), &[q(2, 9)]);
    }

    #[test]
    fn reversible_expands_forward_first() {
        let doc = parse_network("S <-> 0").unwrap();
        let net = &doc.network;
        assert_eq!(net.reaction_label(0), "S -> 0");
        assert_eq!(net.reaction_label(1), "0 -> S");
        assert!(doc.rates.is_none());
        let doc = parse_network("A <-> B [1, 0.5]").unwrap();
        assert_eq!(doc.rates.unwrap().as_slice(), &[q(1, 1), q(1, 2)]);
    }

    #[test]
    fn decimal_rates_are_exact() {
        let doc = parse_network("S -> 0 [1.5]\n0 -> S [0.125]\nS -> 2S [.5]").unwrap();
        assert_eq!(doc.rates.unwrap().as_slice(), &[q(3, 2), q(1, 8), q(1, 2)]);
    }

    #[test]
    fn empty_complex_spellings() {
        let doc = parse_network("∅ -> S\nS → ∅\n2S -> 0").unwrap();
        assert_eq!(doc.network.reaction_label(1), "S -> 0");
        assert_eq!(doc.network.reaction_label(2), "2 S -> 0");
    }

    #[test]
    fn header_lines_and_comments() {
        let doc = parse_network(
            "# birth and death\nnetwork: bd\nspecies: T, S\nS -> 0 [3/2] # death\nS -> 2 S [1]\n",
        )
        .unwrap();
        assert_eq!(doc.network.name(), Some("bd"));
        assert_eq!(doc.network.species_names(), vec!["T", "S"]);
    }

    #[test]
    fn errors_are_positioned() {
        let err = parse_network("S -> 0 [0]").unwrap_err();
        assert_eq!((err.line, err.column), (1, 9));
        assert!(err.message.contains("rate must be positive"));

        let err = parse_network("S -> 0 [-1]").unwrap_err();
        assert!(err.message.contains("rate must be positive"));

        let err = parse_network("S -> 0\nS -> 0").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("duplicate"));

        let err = parse_network("species: A\nA -> B").unwrap_err();
        assert!(err.message.contains("unknown species `B`"));

        let err = parse_network("A <-> B [1]").unwrap_err();
        assert!(err.message.contains("two rates"));

        let err = parse_network("A => B").unwrap_err();
        assert_eq!((err.line, err.column), (1, 3));

        assert!(parse_network("A -> B [1]\nB -> A").is_err());
        assert!(parse_network("A -> A").is_err());
        assert!(parse_network("").is_err());
        assert!(parse_network("A -> B [1/0]").is_err());
        assert!(parse_network("A -> B [x]").is_err());
        assert!(parse_network("A -> B [1] extra").is_err());
    }

    #[test]
    fn format_prints_fractions() {
        let doc = parse_network("A0 -> 2 A3 [11/18]").unwrap();
        let text = format_network(&doc);
        assert!(text.contains("[11/18]"), "{}", text);
        let doc = parse_network("A -> B").unwrap();
        assert!(!format_network(&doc).contains('['));
    }

    #[test]
    fn round_trip_example_1_1() {
        let doc = parse_network("0 -> 2 S [1]\n0 -> S [4]\nS -> 0 [1]\n0 -> 3 S [2]").unwrap();
        let again = parse_network(&format_network(&doc)).unwrap();
        assert_eq!(again.network, doc.network);
        assert_eq!(again.rates, doc.rates);
    }
}
