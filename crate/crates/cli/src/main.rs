// SPDX-License-Identifier: Apache-2.0
//! `symcirc`: command-line access to circuit analyses.
//!
//! Machine-readable results go to stdout as JSON, one document per run;
//! short human summaries go to stderr. Exit codes: 0 success or "yes",
//! 1 "no", 2 usage or parse error, 3 precondition violated, 4 budget
//! exceeded.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use symcirc::equivalence::{quotient, syntactic_classes, EquivalenceError};
use symcirc::eval::{decide_invariant, evaluate, EvalError};
use symcirc::gi::{bipartite_iso, GiError, GiKind};
use symcirc::io::{self, IoError};
use symcirc::majority::{compile_symmetric, lower_to_majority, CompileError, SymmetricSpec};
use symcirc::normalize::{has_unique_labels, is_transparent, to_unique_labels};
use symcirc::oracle::{brute_automorphisms, truth_table, OracleError};
use symcirc::orbits::{decide_symmetric, gate_orbits, transposition_maps};
use symcirc::permutation::Permutation;
use symcirc::rank_support::{injective_assignments, Assignment, RankSupportError, SupportMatrix};
use symcirc::structure::StructureError;
use symcirc::symmetry::{SymmetryContext, SymmetryError};
use symcirc::{Bijection, Budget, Circuit, MajorityConvention};

#[derive(Parser)]
#[command(
    name = "symcirc",
    version,
    about = "Analyses of symmetric Boolean circuits over relational structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check well-formedness and report every violation.
    Validate { circuit: PathBuf },
    /// Evaluate on a structure under a bijection (identity by default).
    Eval {
        circuit: PathBuf,
        #[arg(long)]
        structure: PathBuf,
        /// Bijection as `name=index` pairs, e.g. `a=2,b=1`.
        #[arg(long)]
        gamma: Option<String>,
    },
    /// Decide whether the computed query is isomorphism-invariant.
    Invariant {
        circuit: PathBuf,
        #[arg(long)]
        max_budget: Option<u64>,
    },
    /// Syntactic-equivalence classes of a transparent circuit.
    Classes { circuit: PathBuf },
    /// Quotient a transparent circuit by syntactic equivalence.
    Quotient {
        circuit: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exit 0 iff no rank gate has two equivalent children.
    Transparent { circuit: PathBuf },
    /// Exit 0 iff every gate's children are pairwise distinct and inequivalent.
    UniqueLabels { circuit: PathBuf },
    /// Rewrite a transparent circuit into an equivalent one with unique labels.
    Normalize {
        circuit: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exit 0 iff every permutation of `[n]` extends to an automorphism.
    Symmetric { circuit: PathBuf },
    /// Gate orbits of a unique-label circuit.
    Orbits { circuit: PathBuf },
    /// Coarsest supporting partitions and canonical supports per gate.
    Supports { circuit: PathBuf },
    /// Extend a permutation of `[n]` to an automorphism.
    Extend {
        circuit: PathBuf,
        #[arg(long)]
        perm: String,
    },
    /// Compile a symmetric function to the majority basis.
    CompileSym {
        #[arg(long)]
        n: usize,
        /// Accepted one-counts as n + 1 bits, e.g. `0110`.
        #[arg(long)]
        cf: String,
        /// Majority means strictly more than half.
        #[arg(long)]
        strict: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Replace table-specified symmetric gates with majority fragments.
    Lower {
        circuit: PathBuf,
        #[arg(long)]
        tables: PathBuf,
        #[arg(long)]
        strict: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a circuit encoding bipartite-graph isomorphism.
    GenGi {
        /// One of syn, uc, sym, ul.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        b1: PathBuf,
        #[arg(long)]
        b2: PathBuf,
        #[arg(long, default_value_t = 1)]
        rank_r: usize,
        #[arg(long, default_value_t = 2)]
        rank_p: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a rank gate from supports and compare with direct evaluation.
    RankEval {
        circuit: PathBuf,
        #[arg(long)]
        gate: String,
        #[arg(long)]
        structure: PathBuf,
        /// Assignment of the gate support, e.g. `1=a`; all when omitted.
        #[arg(long)]
        eta: Option<String>,
    },
    /// Exhaustive reference procedures.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Bipartite-graph isomorphism by brute force.
    IsoCheck {
        #[arg(long)]
        b1: PathBuf,
        #[arg(long)]
        b2: PathBuf,
    },
    /// Automorphisms extending a permutation, by backtracking search.
    BruteAut {
        circuit: PathBuf,
        #[arg(long)]
        perm: String,
        #[arg(long, default_value_t = 16)]
        limit: usize,
    },
    /// Output values on every encoded input.
    TruthTable { circuit: PathBuf },
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

type Outcome = Result<(Value, bool), Failure>;

fn fail(code: u8, error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code,
        error: error.into(),
    }
}

trait ExitClass {
    fn code(&self) -> u8;
}

impl ExitClass for IoError {
    fn code(&self) -> u8 {
        2
    }
}
impl ExitClass for StructureError {
    fn code(&self) -> u8 {
        2
    }
}
impl ExitClass for EvalError {
    fn code(&self) -> u8 {
        match self {
            EvalError::TooLarge { .. } => 4,
            EvalError::Structure(_) => 2,
        }
    }
}
impl ExitClass for OracleError {
    fn code(&self) -> u8 {
        match self {
            OracleError::TooLarge(_) => 4,
            _ => 3,
        }
    }
}
impl ExitClass for GiError {
    fn code(&self) -> u8 {
        match self {
            GiError::TooLarge { .. } => 4,
            GiError::Oracle(e) => e.code(),
            GiError::GateNotFound(_) => 3,
            _ => 2,
        }
    }
}
impl ExitClass for CompileError {
    fn code(&self) -> u8 {
        match self {
            CompileError::BadSpec(_) => 2,
            _ => 3,
        }
    }
}
impl ExitClass for EquivalenceError {
    fn code(&self) -> u8 {
        3
    }
}
impl ExitClass for SymmetryError {
    fn code(&self) -> u8 {
        3
    }
}
impl ExitClass for RankSupportError {
    fn code(&self) -> u8 {
        3
    }
}

fn classify<E: ExitClass + std::error::Error + Send + Sync + 'static>(e: E) -> Failure {
    fail(e.code(), e)
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(|e| fail(2, e))
}

fn load_circuit(path: &Path) -> Result<Circuit, Failure> {
    io::parse_circuit(&read(path)?)
        .map_err(|e| fail(2, anyhow!(e).context(format!("parsing {}", path.display()))))
}

fn parse_perm(text: &str, n: usize) -> Result<Permutation, Failure> {
    let sigma = Permutation::parse(text, n).map_err(|e| fail(2, e))?;
    if sigma.degree() != n {
        return Err(fail(
            2,
            anyhow!(
                "permutation has degree {}, circuit has order {n}",
                sigma.degree()
            ),
        ));
    }
    Ok(sigma)
}

/// Writes a circuit to `output`, or returns it for stdout.
fn emit_circuit(c: &Circuit, output: Option<&Path>) -> Result<Value, Failure> {
    let text = io::serialize_circuit(c);
    match output {
        Some(path) => {
            std::fs::write(path, &text)
                .with_context(|| format!("writing {}", path.display()))
                .map_err(|e| fail(2, e))?;
            Ok(json!({ "written": path.display().to_string(), "gates": c.len() }))
        }
        None => Ok(serde_json::from_str(&text).expect("serialized circuit is JSON")),
    }
}

fn convention(strict: bool) -> MajorityConvention {
    if strict {
        MajorityConvention::Strict
    } else {
        MajorityConvention::AtLeastHalf
    }
}

fn unique_context(c: &Circuit) -> Result<SymmetryContext<'_>, Failure> {
    SymmetryContext::new(c).map_err(classify)
}

fn run(command: Command) -> Outcome {
    let budget = Budget::from_env();
    match command {
        Command::Validate { circuit } => {
            let doc = io::parse_circuit_document(&read(&circuit)?).map_err(classify)?;
            let report = doc.to_builder().map_err(classify)?.validate();
            eprintln!(
                "{} violation(s), {} warning(s)",
                report.violations.len(),
                report.warnings.len()
            );
            let valid = report.is_valid();
            Ok((json!({ "valid": valid, "report": report }), valid))
        }
        Command::Eval {
            circuit,
            structure,
            gamma,
        } => {
            let c = load_circuit(&circuit)?;
            let a = io::parse_structure(&read(&structure)?).map_err(classify)?;
            let gamma = match gamma {
                Some(text) => Bijection::parse(&text, &a).map_err(classify)?,
                None => Bijection::identity(a.size()),
            };
            let result = evaluate(&c, &a, &gamma).map_err(classify)?;
            let rows: Vec<Value> = result
                .iter()
                .map(|(t, v)| json!({ "tuple": t.iter().map(|&u| a.universe()[u].clone()).collect::<Vec<_>>(), "value": v }))
                .collect();
            Ok((json!({ "results": rows }), true))
        }
        Command::Invariant {
            circuit,
            max_budget,
        } => {
            let c = load_circuit(&circuit)?;
            let budget = max_budget.map(Budget).unwrap_or(budget);
            let report = decide_invariant(&c, budget).map_err(classify)?;
            let witness = report.witness.as_ref().map(|(a, g1, g2)| {
                json!({
                    "structure": serde_json::from_str::<Value>(&io::serialize_structure(a)).unwrap(),
                    "gamma1": g1.images(),
                    "gamma2": g2.images(),
                })
            });
            eprintln!("invariant: {}", report.invariant);
            Ok((
                json!({ "invariant": report.invariant, "witness": witness }),
                report.invariant,
            ))
        }
        Command::Classes { circuit } => {
            let c = load_circuit(&circuit)?;
            let classes = syntactic_classes(&c).map_err(classify)?;
            eprintln!("{} class(es) over {} gates", classes.len(), c.len());
            Ok((json!({ "classes": classes.to_ids(&c) }), true))
        }
        Command::Quotient { circuit, output } => {
            let c = load_circuit(&circuit)?;
            let q = quotient(&c).map_err(classify)?;
            eprintln!("{} -> {} gates", c.len(), q.len());
            Ok((emit_circuit(&q, output.as_deref())?, true))
        }
        Command::Transparent { circuit } => {
            let c = load_circuit(&circuit)?;
            let report = is_transparent(&c);
            Ok((serde_json::to_value(&report).unwrap(), report.transparent))
        }
        Command::UniqueLabels { circuit } => {
            let c = load_circuit(&circuit)?;
            let unique = has_unique_labels(&c);
            Ok((json!({ "unique_labels": unique }), unique))
        }
        Command::Normalize { circuit, output } => {
            let c = load_circuit(&circuit)?;
            let u = to_unique_labels(&c).map_err(classify)?;
            eprintln!("{} -> {} gates", c.len(), u.len());
            Ok((emit_circuit(&u, output.as_deref())?, true))
        }
        Command::Symmetric { circuit } => {
            let c = load_circuit(&circuit)?;
            let symmetric = decide_symmetric(&c, budget).map_err(classify)?;
            eprintln!("symmetric: {symmetric}");
            Ok((json!({ "symmetric": symmetric }), symmetric))
        }
        Command::Orbits { circuit } => {
            let c = load_circuit(&circuit)?;
            let ctx = unique_context(&c)?;
            if let Err(e) = transposition_maps(&ctx) {
                return not_symmetric(e);
            }
            let s = gate_orbits(&ctx).map_err(classify)?;
            let orbits: BTreeMap<String, Vec<String>> = (0..c.len())
                .map(|g| (c.id(g).to_string(), c.ids(s.orbits[g].iter().copied())))
                .collect();
            Ok((json!({ "symmetric": true, "orbits": orbits }), true))
        }
        Command::Supports { circuit } => {
            let c = load_circuit(&circuit)?;
            let ctx = unique_context(&c)?;
            if let Err(e) = transposition_maps(&ctx) {
                return not_symmetric(e);
            }
            let s = gate_orbits(&ctx).map_err(classify)?;
            let max_norm = s.supports.iter().map(|i| i.norm).max().unwrap_or(0);
            let max_orbit = s.orbits.iter().map(Vec::len).max().unwrap_or(0);
            let small = s.supports.iter().filter(|i| i.has_small_support()).count();
            eprintln!("max norm {max_norm}, largest orbit {max_orbit}, {small}/{} gates with small support", c.len());
            Ok((
                json!({
                    "symmetric": true,
                    "summary": { "order": c.order(), "gates": c.len(), "max_norm": max_norm, "max_orbit": max_orbit, "small_support_gates": small },
                    "gates": s.to_report(&c),
                }),
                true,
            ))
        }
        Command::Extend { circuit, perm } => {
            let c = load_circuit(&circuit)?;
            let sigma = parse_perm(&perm, c.order())?;
            let ctx = unique_context(&c)?;
            match ctx.extend(&sigma).map_err(classify)? {
                Some(map) => Ok((serde_json::to_value(map.to_report(&c)).unwrap(), true)),
                None => {
                    eprintln!("{sigma} does not extend");
                    Ok((
                        json!({ "permutation": sigma.to_string(), "images": null }),
                        false,
                    ))
                }
            }
        }
        Command::CompileSym {
            n,
            cf,
            strict,
            output,
        } => {
            let spec = SymmetricSpec::parse(&cf).map_err(classify)?;
            if spec.inputs() != n {
                return Err(fail(
                    2,
                    anyhow!("--cf has {} bits, --n {n} needs {}", cf.len(), n + 1),
                ));
            }
            let c = compile_symmetric(&spec, convention(strict));
            eprintln!("compiled {n}-input function into {} gates", c.len());
            Ok((emit_circuit(&c, output.as_deref())?, true))
        }
        Command::Lower {
            circuit,
            tables,
            strict,
            output,
        } => {
            let c = load_circuit(&circuit)?;
            let tables = io::parse_tables(&read(&tables)?).map_err(classify)?;
            let lowered = lower_to_majority(&c, &tables, convention(strict)).map_err(classify)?;
            eprintln!("{} -> {} gates", c.len(), lowered.len());
            Ok((emit_circuit(&lowered, output.as_deref())?, true))
        }
        Command::GenGi {
            kind,
            b1,
            b2,
            rank_r,
            rank_p,
            output,
        } => {
            let kind = GiKind::parse(&kind).ok_or_else(|| {
                fail(
                    2,
                    anyhow!("unknown kind {kind:?}; expected syn, uc, sym or ul"),
                )
            })?;
            let g1 = io::parse_bipartite(&read(&b1)?).map_err(classify)?;
            let g2 = io::parse_bipartite(&read(&b2)?).map_err(classify)?;
            let instance = kind.generate(&g1, &g2, rank_r, rank_p).map_err(classify)?;
            let circuit = emit_circuit(&instance.circuit, output.as_deref())?;
            Ok((
                json!({ "first": instance.first, "second": instance.second, "circuit": circuit }),
                true,
            ))
        }
        Command::RankEval {
            circuit,
            gate,
            structure,
            eta,
        } => {
            let c = load_circuit(&circuit)?;
            let a = io::parse_structure(&read(&structure)?).map_err(classify)?;
            a.check(c.vocabulary()).map_err(classify)?;
            if a.size() != c.order() {
                return Err(fail(
                    2,
                    anyhow!(
                        "structure has {} elements, circuit has order {}",
                        a.size(),
                        c.order()
                    ),
                ));
            }
            let g = c
                .index_of(&gate)
                .ok_or_else(|| fail(3, anyhow!("unknown gate {gate}")))?;
            let ctx = unique_context(&c)?;
            let s = gate_orbits(&ctx).map_err(classify)?;
            let support = s
                .canonical_support(g)
                .ok_or_else(|| fail(3, anyhow!("gate {gate} has no small support")))?
                .to_vec();
            let etas = match eta {
                Some(text) => vec![parse_eta(&text, &a)?],
                None => injective_assignments(&support, c.order(), &Assignment::new()),
            };
            let m = SupportMatrix::new(&ctx, &s, &a);
            let mut reports = Vec::new();
            let mut skipped = Vec::new();
            for eta in &etas {
                match m.evaluate(g, eta) {
                    Ok(r) => reports.push(r),
                    Err(e) if e.is_skip() => skipped.push(e.to_string()),
                    Err(e) => return Err(classify(e)),
                }
            }
            let agree = reports.iter().all(|r| r.agreement());
            let agreements: Vec<bool> = reports.iter().map(|r| r.agreement()).collect();
            eprintln!(
                "{} instance(s), {} skipped, all agree: {agree}",
                reports.len(),
                skipped.len()
            );
            Ok((
                json!({ "gate": gate, "support": support, "reports": reports, "agreement": agreements, "skipped": skipped }),
                agree,
            ))
        }
        Command::Oracle { command } => run_oracle(command, budget),
    }
}

fn not_symmetric(e: SymmetryError) -> Outcome {
    match e {
        SymmetryError::NotSymmetric(sigma) => {
            eprintln!("not symmetric: {sigma} does not extend");
            Ok((
                json!({ "symmetric": false, "witness": sigma.to_string() }),
                false,
            ))
        }
        other => Err(classify(other)),
    }
}

fn parse_eta(text: &str, a: &symcirc::RhoStructure) -> Result<Assignment, Failure> {
    let mut eta = Assignment::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, name) = part
            .split_once('=')
            .ok_or_else(|| fail(2, anyhow!("expected index=name, got {part}")))?;
        let k: usize = k
            .trim()
            .parse()
            .map_err(|_| fail(2, anyhow!("bad index in {part}")))?;
        eta.insert(k, a.element(name.trim()).map_err(classify)?);
    }
    Ok(eta)
}

fn run_oracle(command: OracleCommand, budget: Budget) -> Outcome {
    match command {
        OracleCommand::IsoCheck { b1, b2 } => {
            let g1 = io::parse_bipartite(&read(&b1)?).map_err(classify)?;
            let g2 = io::parse_bipartite(&read(&b2)?).map_err(classify)?;
            let iso = bipartite_iso(&g1, &g2, budget).map_err(classify)?;
            Ok((json!({ "isomorphic": iso }), iso))
        }
        OracleCommand::BruteAut {
            circuit,
            perm,
            limit,
        } => {
            let c = load_circuit(&circuit)?;
            let sigma = parse_perm(&perm, c.order())?;
            let found = brute_automorphisms(&c, &sigma, limit, budget).map_err(classify)?;
            let maps: Vec<BTreeMap<String, String>> = found
                .iter()
                .map(|images| {
                    (0..c.len())
                        .map(|g| (c.id(g).to_string(), c.id(images[g]).to_string()))
                        .collect()
                })
                .collect();
            eprintln!("{} automorphism(s) found (limit {limit})", maps.len());
            Ok((
                json!({ "permutation": sigma.to_string(), "automorphisms": maps }),
                !maps.is_empty(),
            ))
        }
        OracleCommand::TruthTable { circuit } => {
            let c = load_circuit(&circuit)?;
            let table = truth_table(&c, MajorityConvention::default(), budget).map_err(classify)?;
            let outputs: Vec<&Vec<usize>> = c.outputs().keys().collect();
            Ok((json!({ "outputs": outputs, "rows": table }), true))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((value, yes)) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(
                std::io::stdout(),
                "{}",
                serde_json::to_string_pretty(&value).unwrap()
            );
            ExitCode::from(if yes { 0 } else { 1 })
        }
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
