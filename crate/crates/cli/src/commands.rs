use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rxnident_core::langevin::{simulate_endpoints, simulate_paths, PathEnd};
use rxnident_core::parser::parse_rate;
use rxnident_core::{
    check_confoundability, check_identifiability, check_linear_conjugacy, generator_coefficients,
    parse_network, BoxDomain, Certificate, Complex, ConjugacyOptions, ConjugacyVerdict, EmConfig,
    NetworkDocument, RateVector, ReactionNetwork,
};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::args::{ConfoundArgs, ConjugacyArgs, IdentArgs, ReportArgs, SimulateArgs, ValidateArgs};
use crate::format;
use crate::CliError;

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// What a subcommand produced, before rendering.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: u8,
    pub text: String,
    pub result: Value,
    pub inputs: Vec<InputDigest>,
}

pub struct Input {
    pub doc: NetworkDocument,
    pub digest: InputDigest,
}

pub fn load(path: &Path) -> Result<Input, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::new(format!("{}: {}", path.display(), e)))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::new(format!("{}: not valid UTF-8", path.display())))?;
    let doc =
        parse_network(&text).map_err(|e| CliError::new(format!("{}:{}", path.display(), e)))?;
    Ok(Input {
        doc,
        digest: InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        },
    })
}

/// Comma-separated rate literals.
pub fn parse_rates(list: &str, net: &ReactionNetwork) -> Result<RateVector, CliError> {
    let rates = list
        .split(',')
        .map(|s| {
            parse_rate(s.trim())
                .map_err(|e| CliError::new(format!("--rates `{}`: {}", s.trim(), e)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rates = RateVector::new(rates)?;
    rates.check_for(net)?;
    Ok(rates)
}

fn rates_of(input: &Input, overridden: Option<&str>) -> Result<RateVector, CliError> {
    match overridden {
        Some(list) => parse_rates(list, &input.doc.network),
        None => input
            .doc
            .rates
            .clone()
            .ok_or_else(|| CliError::new(format!("{}: rates required", input.digest.path))),
    }
}

fn labels(net: &ReactionNetwork) -> Vec<String> {
    (0..net.reaction_count())
        .map(|i| net.reaction_label(i))
        .collect()
}

#[derive(Serialize)]
struct NetworkSummary {
    name: Option<String>,
    species: Vec<String>,
    reactions: Vec<String>,
    source_complexes: Vec<String>,
    rates: Option<Vec<String>>,
}

fn summary(doc: &NetworkDocument) -> NetworkSummary {
    let net = &doc.network;
    NetworkSummary {
        name: net.name().map(str::to_string),
        species: net.species_names().iter().map(|s| s.to_string()).collect(),
        reactions: labels(net),
        source_complexes: net
            .source_complexes()
            .iter()
            .map(|c| net.complex_label(c))
            .collect(),
        rates: doc.rates.as_ref().map(RateVector::to_strings),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn validate(args: &ValidateArgs) -> Result<Outcome, CliError> {
    let input = load(&args.file)?;
    let net = &input.doc.network;
    let text = format!(
        "valid: {} species, {} reactions{}\n",
        net.species_count(),
        net.reaction_count(),
        if input.doc.rates.is_some() {
            ", rates given"
        } else {
            ""
        }
    );
    Ok(Outcome {
        exit_code: 0,
        text,
        result: to_value(&summary(&input.doc)),
        inputs: vec![input.digest],
    })
}

#[derive(Serialize)]
struct DriftEntry {
    species: String,
    polynomial: String,
}

#[derive(Serialize)]
struct DiffusionEntry {
    row: String,
    column: String,
    polynomial: String,
}

#[derive(Serialize)]
struct CoefficientBlock {
    source: String,
    drift: Vec<String>,
    diffusion: Vec<String>,
}

#[derive(Serialize)]
struct ReportResult {
    network: NetworkSummary,
    rates: Vec<String>,
    stoichiometric_matrix: Vec<Vec<i64>>,
    drift: Vec<DriftEntry>,
    diffusion: Vec<DiffusionEntry>,
    coefficients: Vec<CoefficientBlock>,
}

pub fn report(args: &ReportArgs) -> Result<Outcome, CliError> {
    let input = load(&args.file)?;
    let rates = rates_of(&input, args.rates.as_deref())?;
    let net = &input.doc.network;
    let gc = generator_coefficients(net, &rates)?;
    let names: Vec<String> = gc.species().to_vec();
    let vars = format::variables(&names);
    let n = names.len();

    let mut text = String::new();
    if let Some(name) = net.name() {
        writeln!(text, "network: {}", name).unwrap();
    }
    writeln!(text, "species: {}", names.join(", ")).unwrap();
    writeln!(text, "reactions:").unwrap();
    for (i, (label, k)) in labels(net).iter().zip(rates.as_slice()).enumerate() {
        writeln!(text, "  R{}  {}  [{}]", i + 1, label, format::rational(k)).unwrap();
    }
    writeln!(text, "stoichiometric matrix:").unwrap();
    let sm = net.stoichiometric_matrix();
    let width = names.iter().map(String::len).max().unwrap_or(1);
    for (name, row) in names.iter().zip(&sm) {
        let cells: Vec<String> = row.iter().map(|v| format!("{:>3}", v)).collect();
        writeln!(
            text,
            "  {:<width$} {}",
            name,
            cells.join(" "),
            width = width
        )
        .unwrap();
    }
    writeln!(text, "drift:").unwrap();
    for line in format::drift_lines(&gc) {
        writeln!(text, "  {}", line).unwrap();
    }
    writeln!(text, "diffusion:").unwrap();
    for line in format::diffusion_lines(&gc) {
        writeln!(text, "  {}", line).unwrap();
    }

    let mut diffusion = Vec::new();
    for i in 0..n {
        for j in i..n {
            diffusion.push(DiffusionEntry {
                row: names[i].clone(),
                column: names[j].clone(),
                polynomial: format::diffusion_entry(&gc, i, j, &vars),
            });
        }
    }
    let result = ReportResult {
        network: summary(&input.doc),
        rates: rates.to_strings(),
        stoichiometric_matrix: sm,
        drift: (0..n)
            .map(|i| DriftEntry {
                species: names[i].clone(),
                polynomial: format::drift_component(&gc, i, &vars),
            })
            .collect(),
        diffusion,
        coefficients: gc
            .blocks()
            .iter()
            .map(|(y, b)| CoefficientBlock {
                source: net.complex_label(y),
                drift: format::rationals(&b.drift),
                diffusion: format::rationals(&b.diffusion),
            })
            .collect(),
    };
    Ok(Outcome {
        exit_code: 0,
        text,
        result: to_value(&result),
        inputs: vec![input.digest],
    })
}

#[derive(Serialize)]
struct DependenceTerm {
    reaction: String,
    coefficient: String,
}

#[derive(Serialize)]
struct RatePair {
    kappa: Vec<String>,
    kappa_prime: Vec<String>,
}

#[derive(Serialize)]
struct IdentResult {
    model: String,
    identifiable: bool,
    dependent_source: Option<String>,
    dependence: Option<Vec<DependenceTerm>>,
    witness: Option<RatePair>,
}

pub fn check_ident(args: &IdentArgs) -> Result<Outcome, CliError> {
    let input = load(&args.file)?;
    let net = &input.doc.network;
    let v = check_identifiability(net, args.model)?;
    let mut text = String::new();
    let dependence = match (&v.dependent_source, &v.dependence_coefficients) {
        (Some(y), Some(c)) => Some(
            net.reactions_from(y)
                .into_iter()
                .zip(c)
                .map(|(r, q)| DependenceTerm {
                    reaction: net.reaction_label(r),
                    coefficient: format::rational(q),
                })
                .collect::<Vec<_>>(),
        ),
        _ => None,
    };
    if v.identifiable {
        writeln!(text, "identifiable ({})", args.model).unwrap();
    } else {
        writeln!(text, "not identifiable ({})", args.model).unwrap();
        if let (Some(y), Some(terms)) = (&v.dependent_source, &dependence) {
            writeln!(
                text,
                "  reactions out of {} are linearly dependent:",
                net.complex_label(y)
            )
            .unwrap();
            let w = terms.iter().map(|t| t.reaction.len()).max().unwrap_or(0);
            let c = terms.iter().map(|t| t.coefficient.len()).max().unwrap_or(0);
            for t in terms {
                writeln!(text, "    {:<w$}  {:>c$}", t.reaction, t.coefficient).unwrap();
            }
        }
        if args.witness {
            if let Some((k, k2)) = &v.witness_pair {
                writeln!(text, "  kappa  = {}", k).unwrap();
                writeln!(text, "  kappa' = {}", k2).unwrap();
            }
        }
    }
    let result = IdentResult {
        model: args.model.to_string(),
        identifiable: v.identifiable,
        dependent_source: v.dependent_source.as_ref().map(|y| net.complex_label(y)),
        dependence,
        witness: v.witness_pair.as_ref().map(|(k, k2)| RatePair {
            kappa: k.to_strings(),
            kappa_prime: k2.to_strings(),
        }),
    };
    Ok(Outcome {
        exit_code: if v.identifiable { 0 } else { 1 },
        text,
        result: to_value(&result),
        inputs: vec![input.digest],
    })
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum CertificateJson {
    SourceMismatch {
        only_in_first: Vec<String>,
        only_in_second: Vec<String>,
    },
    InfeasibleSource {
        source: String,
    },
}

#[derive(Serialize)]
struct ConfoundWitness {
    first: Vec<String>,
    second: Vec<String>,
}

#[derive(Serialize)]
struct ConfoundResult {
    model: String,
    confoundable: bool,
    certificate: Option<CertificateJson>,
    witness: Option<ConfoundWitness>,
}

fn complex_labels(net: &ReactionNetwork, cs: &[Complex]) -> Vec<String> {
    cs.iter().map(|c| net.complex_label(c)).collect()
}

pub fn check_confound(args: &ConfoundArgs) -> Result<Outcome, CliError> {
    let a = load(&args.first)?;
    let b = load(&args.second)?;
    let (na, nb) = (&a.doc.network, &b.doc.network);
    let v = check_confoundability(na, nb, args.model)?;
    let mut text = String::new();
    let certificate = v.certificate.as_ref().map(|c| match c {
        Certificate::SourceMismatch {
            only_in_first,
            only_in_second,
        } => CertificateJson::SourceMismatch {
            only_in_first: complex_labels(na, only_in_first),
            only_in_second: complex_labels(na, only_in_second),
        },
        Certificate::InfeasibleSource { source } => CertificateJson::InfeasibleSource {
            source: na.complex_label(source),
        },
    });
    if v.confoundable {
        writeln!(text, "confoundable ({})", args.model).unwrap();
        if args.witness {
            if let Some((ka, kb)) = &v.witness {
                writeln!(text, "  first  = {}", ka).unwrap();
                writeln!(text, "  second = {}", kb).unwrap();
            }
        }
    } else {
        writeln!(text, "unconfoundable ({})", args.model).unwrap();
        match &certificate {
            Some(CertificateJson::SourceMismatch {
                only_in_first,
                only_in_second,
            }) => {
                writeln!(
                    text,
                    "  source complexes differ: only in first [{}], only in second [{}]",
                    only_in_first.join(", "),
                    only_in_second.join(", ")
                )
                .unwrap();
            }
            Some(CertificateJson::InfeasibleSource { source }) => {
                writeln!(text, "  no positive rates agree at source {}", source).unwrap();
            }
            None => {}
        }
    }
    let result = ConfoundResult {
        model: args.model.to_string(),
        confoundable: v.confoundable,
        certificate,
        witness: v.witness.as_ref().map(|(ka, kb)| ConfoundWitness {
            first: ka.to_strings(),
            second: kb.to_strings(),
        }),
    };
    Ok(Outcome {
        exit_code: if v.confoundable { 1 } else { 0 },
        text,
        result: to_value(&result),
        inputs: vec![a.digest, b.digest],
    })
}

#[derive(Serialize)]
struct SpeciesPair {
    first: String,
    second: String,
}

#[derive(Serialize)]
struct ConjugacyResult {
    verdict: &'static str,
    permutation: Option<Vec<SpeciesPair>>,
    scaling: Option<Vec<String>>,
    scaling_float: Option<Vec<f64>>,
    kappa: Option<Vec<String>>,
    beta: Option<Vec<String>>,
    kappa_prime: Option<Vec<String>>,
    exact: Option<bool>,
    permutations_tried: Option<usize>,
    best_residual: Option<f64>,
}

impl ConjugacyResult {
    fn bare(verdict: &'static str) -> Self {
        ConjugacyResult {
            verdict,
            permutation: None,
            scaling: None,
            scaling_float: None,
            kappa: None,
            beta: None,
            kappa_prime: None,
            exact: None,
            permutations_tried: None,
            best_residual: None,
        }
    }
}

pub fn check_conjugacy(args: &ConjugacyArgs) -> Result<Outcome, CliError> {
    let a = load(&args.first)?;
    let b = load(&args.second)?;
    let (na, nb) = (&a.doc.network, &b.doc.network);
    let opts = ConjugacyOptions {
        tol: args.tol,
        starts: args.starts,
        max_perms: args.max_perms,
        seed: args.seed,
        ..Default::default()
    };
    let verdict = check_linear_conjugacy(na, nb, &opts)?;
    // The search matches species by name when both files use the same
    // names, by position otherwise; the permutation indexes that order.
    let names_a: Vec<String> = na.species_names().iter().map(|s| s.to_string()).collect();
    let set_a: BTreeSet<&str> = na.species_names().into_iter().collect();
    let set_b: BTreeSet<&str> = nb.species_names().into_iter().collect();
    let same_names = set_a == set_b;
    let names_b: Vec<String> = if same_names {
        names_a.clone()
    } else {
        nb.species_names().iter().map(|s| s.to_string()).collect()
    };

    let mut text = String::new();
    let (exit_code, result) = match verdict {
        ConjugacyVerdict::Witness(w) => {
            let pairs: Vec<SpeciesPair> = w
                .permutation
                .iter()
                .enumerate()
                .map(|(i, &j)| SpeciesPair {
                    first: names_a[i].clone(),
                    second: names_b[j].clone(),
                })
                .collect();
            writeln!(text, "linearly conjugate").unwrap();
            let map: Vec<String> = pairs
                .iter()
                .map(|p| format!("{} -> {}", p.first, p.second))
                .collect();
            writeln!(text, "  species map: {}", map.join(", ")).unwrap();
            writeln!(
                text,
                "  scaling = ({})",
                format::rationals(&w.scaling).join(", ")
            )
            .unwrap();
            writeln!(text, "  kappa   = {}", w.kappa).unwrap();
            writeln!(text, "  beta    = {}", w.beta).unwrap();
            writeln!(text, "  kappa'  = {}", w.kappa_prime).unwrap();
            if !w.exact {
                writeln!(
                    text,
                    "  (float solution, residual {:e}; exact re-check failed)",
                    w.residual
                )
                .unwrap();
            }
            let result = ConjugacyResult {
                permutation: Some(pairs),
                scaling: Some(format::rationals(&w.scaling)),
                scaling_float: Some(w.float_scaling.clone()),
                kappa: Some(w.kappa.to_strings()),
                beta: Some(w.beta.to_strings()),
                kappa_prime: Some(w.kappa_prime.to_strings()),
                exact: Some(w.exact),
                ..ConjugacyResult::bare("witness")
            };
            (0, result)
        }
        ConjugacyVerdict::StructurallyImpossible => {
            writeln!(
                text,
                "not linearly conjugate: no species permutation matches the source complexes"
            )
            .unwrap();
            (1, ConjugacyResult::bare("structurally_impossible"))
        }
        ConjugacyVerdict::Unknown {
            permutations_tried,
            best_residual,
        } => {
            writeln!(
                text,
                "unknown: no witness found over {} admissible permutation(s), best residual {:e}",
                permutations_tried, best_residual
            )
            .unwrap();
            let result = ConjugacyResult {
                permutations_tried: Some(permutations_tried),
                best_residual: best_residual.is_finite().then_some(best_residual),
                ..ConjugacyResult::bare("unknown")
            };
            (3, result)
        }
    };
    Ok(Outcome {
        exit_code,
        text,
        result: to_value(&result),
        inputs: vec![a.digest, b.digest],
    })
}

fn parse_floats(list: &str, what: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::new(format!("{}: `{}` is not a number", what, s.trim())))
        })
        .collect()
}

fn broadcast(v: Vec<f64>, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    match v.len() {
        1 => Ok(vec![v[0]; n]),
        len if len == n => Ok(v),
        len => Err(CliError::new(format!(
            "{}: expected 1 or {} values, got {}",
            what, n, len
        ))),
    }
}

pub fn parse_box(spec: Option<&str>, n: usize) -> Result<BoxDomain, CliError> {
    let Some(spec) = spec else {
        return Ok(BoxDomain::default_for(n));
    };
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for part in spec.split(',') {
        let (lo, hi) = part
            .split_once(':')
            .ok_or_else(|| CliError::new(format!("--box: `{}` is not LO:HI", part.trim())))?;
        lower.extend(parse_floats(lo, "--box")?);
        upper.extend(parse_floats(hi, "--box")?);
    }
    Ok(BoxDomain::new(
        broadcast(lower, n, "--box")?,
        broadcast(upper, n, "--box")?,
    )?)
}

#[derive(Serialize)]
struct SimulateResult {
    species: Vec<String>,
    paths: usize,
    step: f64,
    horizon: f64,
    seed: u64,
    diffusion: bool,
    stopped: usize,
    mean: Vec<f64>,
    std_error: Vec<f64>,
    out: Option<String>,
}

fn endpoint_stats(ends: &[PathEnd], n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = ends.len() as f64;
    let mean: Vec<f64> = (0..n)
        .map(|i| ends.iter().map(|e| e.state[i]).sum::<f64>() / m)
        .collect();
    let se: Vec<f64> = (0..n)
        .map(|i| {
            if ends.len() < 2 {
                return 0.0;
            }
            let var = ends
                .iter()
                .map(|e| (e.state[i] - mean[i]).powi(2))
                .sum::<f64>()
                / (m - 1.0);
            (var / m).sqrt()
        })
        .collect();
    (mean, se)
}

fn write_csv(
    out: &PathBuf,
    species: &[String],
    paths: &[rxnident_core::SimulationPath],
    thin: usize,
) -> Result<(), CliError> {
    let file =
        fs::File::create(out).map_err(|e| CliError::new(format!("{}: {}", out.display(), e)))?;
    let mut w = BufWriter::new(file);
    let many = paths.len() > 1;
    let io = |e: std::io::Error| CliError::new(format!("{}: {}", out.display(), e));
    let mut header = Vec::new();
    if many {
        header.push("path_id".to_string());
    }
    header.push("t".into());
    header.extend(species.iter().cloned());
    header.push("stopped".into());
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for (id, p) in paths.iter().enumerate() {
        let last = p.states.len() - 1;
        for (k, (t, x)) in p.times.iter().zip(&p.states).enumerate() {
            if k % thin != 0 && k != last {
                continue;
            }
            let mut row = String::new();
            if many {
                write!(row, "{},", id).unwrap();
            }
            write!(row, "{}", t).unwrap();
            for v in x {
                write!(row, ",{}", v).unwrap();
            }
            let stopped = p.tau_index == Some(k);
            write!(row, ",{}", u8::from(stopped)).unwrap();
            writeln!(w, "{}", row).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn simulate(args: &SimulateArgs) -> Result<Outcome, CliError> {
    let input = load(&args.file)?;
    let net = &input.doc.network;
    let rates = rates_of(&input, args.rates.as_deref())?;
    let n = net.species_count();
    let x0 = broadcast(parse_floats(&args.x0, "--x0")?, n, "--x0")?;
    let domain = parse_box(args.domain.as_deref(), n)?;
    if args.paths == 0 {
        return Err(CliError::new("--paths must be at least 1"));
    }
    if args.thin == 0 {
        return Err(CliError::new("--thin must be at least 1"));
    }
    let mut cfg = EmConfig::new(args.step, args.horizon, args.seed);
    if args.zero_diffusion {
        cfg = cfg.without_diffusion();
    }
    let gc = generator_coefficients(net, &rates)?;
    let species: Vec<String> = gc.species().to_vec();

    let ends: Vec<PathEnd> = match &args.out {
        Some(out) => {
            let paths = simulate_paths(&gc, &x0, &domain, &cfg, args.paths)?;
            write_csv(out, &species, &paths, args.thin)?;
            paths
                .into_iter()
                .map(|p| PathEnd {
                    time: *p.times.last().expect("nonempty path"),
                    state: p.states.last().expect("nonempty path").clone(),
                    stopped: p.stopped,
                })
                .collect()
        }
        None => simulate_endpoints(&gc, &x0, &domain, &cfg, args.paths)?,
    };
    let stopped = ends.iter().filter(|e| e.stopped).count();
    let (mean, std_error) = endpoint_stats(&ends, n);

    let mut text = String::new();
    writeln!(
        text,
        "{} path(s), step {}, horizon {}, seed {}{}",
        args.paths,
        args.step,
        args.horizon,
        args.seed,
        if args.zero_diffusion {
            ", no diffusion"
        } else {
            ""
        }
    )
    .unwrap();
    writeln!(text, "stopped before the horizon: {}", stopped).unwrap();
    for (i, s) in species.iter().enumerate() {
        writeln!(
            text,
            "  final {}: mean {} (standard error {})",
            s, mean[i], std_error[i]
        )
        .unwrap();
    }
    if let Some(out) = &args.out {
        writeln!(text, "wrote {}", out.display()).unwrap();
    }
    let result = SimulateResult {
        species,
        paths: args.paths,
        step: args.step,
        horizon: args.horizon,
        seed: args.seed,
        diffusion: !args.zero_diffusion,
        stopped,
        mean,
        std_error,
        out: args.out.as_ref().map(|p| p.display().to_string()),
    };
    Ok(Outcome {
        exit_code: 0,
        text,
        result: to_value(&result),
        inputs: vec![input.digest],
    })
}
