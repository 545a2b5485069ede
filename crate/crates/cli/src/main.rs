//! `hbl`: exact exponent polytopes, membership, brute-force checks and the
//! Diophantine encoding, all speaking JSON on stdin/stdout.
//!
//! Exit codes: 0 success or true, 1 false or refuted, 2 usage or input
//! error, 3 budget exhausted.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hbl_core::decision::TraceStep;
use hbl_core::diophantine::{
    bounded_witness_search, encode, extract_solution, to_basic_set, verify_witness,
    witness_from_solution, DiophEncoding, PolySystem,
};
use hbl_core::oracle::{
    brute_force_constraints, counterexample_family, random_function_table, sample_rng,
    verify_function_inequality, verify_set_inequality, verify_sets_batch, FunctionTable,
};
use hbl_core::rational::parse_rational_list;
use hbl_core::{enumerate_subspaces, Error, ExponentTuple, HblDatum, Rational, Solver, Subspace};
use serde::Serialize;
use serde_json::{json, Value};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "hbl", version, about = "Exact exponent polytopes of HBL data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DatumArg {
    /// Datum JSON file; `-` or omitted reads standard input.
    #[arg(long)]
    datum: Option<PathBuf>,
    /// Cap on enumerated subspaces per polytope computation.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the exact polytope with witnesses, vertices and certificates.
    Polytope {
        #[command(flatten)]
        datum: DatumArg,
        /// Also compare against the brute-force oracle at this height.
        #[arg(long)]
        oracle_height: Option<usize>,
    },
    /// Decide whether an exponent tuple lies in the polytope.
    Member {
        #[command(flatten)]
        datum: DatumArg,
        /// Comma-separated rationals, e.g. "1/2,1/2,1/2".
        #[arg(long)]
        s: String,
        /// Include the reduction trace.
        #[arg(long)]
        trace: bool,
    },
    /// Minimize a weighted sum of exponents over the polytope.
    Shbl {
        #[command(flatten)]
        datum: DatumArg,
        /// Comma-separated weights; all ones by default.
        #[arg(long)]
        weights: Option<String>,
    },
    /// Check the set form of the inequality on seeded random point sets.
    VerifySets {
        #[command(flatten)]
        datum: DatumArg,
        #[arg(long)]
        s: String,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// An integer, or `random`.
        #[arg(long)]
        seed: Option<String>,
        /// Coordinates are drawn from [-box, box].
        #[arg(long = "box", default_value_t = 10)]
        bound: i64,
        #[arg(long, default_value_t = 100)]
        max_size: usize,
    },
    /// Check the function form of the inequality, numerically.
    VerifyFunctions {
        #[command(flatten)]
        datum: DatumArg,
        #[arg(long)]
        s: String,
        /// JSON array with one function table per map; random tables if omitted.
        #[arg(long)]
        functions: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Grow the sets E_N from a supercritical subspace until the inequality fails.
    Counterexample {
        #[command(flatten)]
        datum: DatumArg,
        #[arg(long)]
        s: String,
        /// Subspace JSON; if omitted, the refuting subspace from the membership test.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long, default_value_t = 32)]
        max_n: usize,
    },
    /// List the first N subspaces of Q^D in enumeration order.
    EnumSubspaces {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
    },
    /// Rewrite a polynomial system as a basic system.
    DiophBasic {
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// Encode a query point of a polynomial system as rank data.
    DiophEncode {
        #[arg(long)]
        system: Option<PathBuf>,
        /// Comma-separated queried coordinates (may be empty).
        #[arg(long, default_value = "")]
        a: String,
    },
    /// Build the witness subspace from a solution of the polynomial system.
    DiophWitness {
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long)]
        point: String,
    },
    /// Check a witness subspace against an encoding.
    DiophVerify {
        #[arg(long)]
        encoding: Option<PathBuf>,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Read the solution off a witness subspace.
    DiophExtract {
        #[arg(long)]
        encoding: Option<PathBuf>,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Search for a witness of bounded height. Finding none proves nothing.
    DiophSearch {
        #[arg(long)]
        encoding: Option<PathBuf>,
        #[arg(long)]
        height: usize,
    },
}

/// A command result: rendered JSON for stdout and whether the answer was positive.
struct Answer {
    json: String,
    positive: bool,
}

impl Answer {
    fn new(json: impl Serialize, positive: bool) -> Result<Self, Error> {
        Ok(Answer {
            json: serde_json::to_string(&json)?,
            positive,
        })
    }

    fn yes(json: impl Serialize) -> Result<Self, Error> {
        Self::new(json, true)
    }
}

fn read_input(path: Option<&PathBuf>) -> Result<String, Error> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => {
            text = std::fs::read_to_string(p)
                .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", p.display())))?;
        }
        _ => {
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Error::Precondition(format!("cannot read standard input: {e}")))?;
        }
    }
    Ok(text)
}

fn load_datum(arg: &DatumArg) -> Result<HblDatum, Error> {
    HblDatum::from_json(&read_input(arg.datum.as_ref())?)
}

fn parse_tuple(datum: &HblDatum, text: &str) -> Result<ExponentTuple, Error> {
    let s = ExponentTuple::parse(text)?;
    if s.len() != datum.num_maps() {
        return Err(Error::LengthMismatch {
            expected: datum.num_maps(),
            found: s.len(),
        });
    }
    s.check_unit_box()?;
    Ok(s)
}

fn parse_seed(seed: Option<&str>) -> Result<u64, Error> {
    match seed {
        None => Ok(DEFAULT_SEED),
        Some("random") => Ok(rand::random()),
        Some(text) => text.parse().map_err(|_| Error::Parse {
            position: 0,
            message: format!("seed must be an integer or `random`, got {text:?}"),
        }),
    }
}

fn parse_list(text: &str) -> Result<Vec<Rational>, Error> {
    if text.trim().is_empty() {
        Ok(Vec::new())
    } else {
        parse_rational_list(text)
    }
}

fn load_subspace(path: &PathBuf) -> Result<Subspace, Error> {
    Ok(serde_json::from_str(&read_input(Some(path))?)?)
}

#[derive(Serialize)]
struct Shbl {
    value: Rational,
    argmin: Vec<Rational>,
}

fn run(command: Command) -> Result<Answer, Error> {
    match command {
        Command::Polytope { datum, oracle_height } => {
            let d = load_datum(&datum)?;
            let r = Solver::with_budget(Some(datum.budget)).compute_polytope(&d)?;
            let mut out = r.to_json_value();
            let mut positive = true;
            if let Some(h) = oracle_height {
                let oracle = brute_force_constraints(&d, h)?;
                let contained = r.vertices.iter().all(|v| oracle.satisfies_inequalities(&v.point));
                let oracle_vertices: Vec<Vec<Rational>> =
                    oracle.extreme_points().into_iter().map(|v| v.point).collect();
                let agrees = r.vertices.iter().map(|v| &v.point).eq(oracle_vertices.iter());
                positive = contained;
                out["oracle"] = json!({
                    "height": h,
                    "contained": contained,
                    "agrees": agrees,
                    "vertices": oracle_vertices,
                });
            }
            Answer::new(out, positive)
        }
        Command::Member { datum, s, trace } => {
            let d = load_datum(&datum)?;
            let s = parse_tuple(&d, &s)?;
            let t = Solver::with_budget(Some(datum.budget)).is_member(&d, &s)?;
            let mut out = json!({ "member": t.member });
            if trace {
                out["trace"] = serde_json::to_value(&t)?;
            }
            Answer::new(out, t.member)
        }
        Command::Shbl { datum, weights } => {
            let d = load_datum(&datum)?;
            let w = match weights {
                Some(text) => parse_list(&text)?,
                None => vec![Rational::one(); d.num_maps()],
            };
            let r = Solver::with_budget(Some(datum.budget)).compute_polytope(&d)?;
            let (value, v) = r.polytope.minimize_linear(&w)?;
            Answer::yes(Shbl {
                value,
                argmin: v.point,
            })
        }
        Command::VerifySets {
            datum,
            s,
            samples,
            seed,
            bound,
            max_size,
        } => {
            let d = load_datum(&datum)?;
            let s = parse_tuple(&d, &s)?;
            let seed = parse_seed(seed.as_deref())?;
            let report = verify_sets_batch(&d, &s, samples, seed, bound, max_size)?;
            let mut out = serde_json::to_value(&report)?;
            out["seed"] = seed.into();
            Answer::new(out, report.violations.is_empty())
        }
        Command::VerifyFunctions {
            datum,
            s,
            functions,
            samples,
            seed,
            tol,
        } => {
            let d = load_datum(&datum)?;
            let s = parse_tuple(&d, &s)?;
            let seed = parse_seed(seed.as_deref())?;
            let tables: Vec<Vec<FunctionTable>> = match functions {
                Some(path) => vec![serde_json::from_str(&read_input(Some(&path))?)?],
                None => {
                    (0..samples as u64)
                        .map(|i| {
                            let mut rng = sample_rng(seed, i);
                            d.maps()
                                .iter()
                                .map(|m| random_function_table(&mut rng, m.rows(), 2, 8))
                                .collect()
                        })
                        .collect()
                }
            };
            let mut violations = Vec::new();
            let mut worst = f64::NEG_INFINITY;
            for f in &tables {
                let c = verify_function_inequality(&d, &s, f, tol)?;
                if c.lhs > 0.0 {
                    worst = worst.max((c.lhs / c.rhs).ln());
                }
                if !c.holds {
                    violations.push(f.clone());
                }
            }
            let positive = violations.is_empty();
            Answer::new(
                json!({
                    "seed": seed,
                    "trials": tables.len(),
                    "violations": violations,
                    "worst_ratio_log": if worst.is_finite() { Some(worst) } else { None },
                }),
                positive,
            )
        }
        Command::Counterexample {
            datum,
            s,
            witness,
            max_n,
        } => {
            let d = load_datum(&datum)?;
            let s = parse_tuple(&d, &s)?;
            let h = match witness {
                Some(path) => load_subspace(&path)?,
                None => {
                    let t = Solver::with_budget(Some(datum.budget)).is_member(&d, &s)?;
                    let mut found = None;
                    t.walk(&mut |n| {
                        if let (None, TraceStep::Supercritical(w)) = (&found, &n.step) {
                            found = Some(w.clone());
                        }
                    });
                    found.ok_or_else(|| {
                        Error::Precondition(format!("{s} lies in the polytope; nothing to refute"))
                    })?
                }
            };
            for n in 1..=max_n {
                let e = counterexample_family(&d, &s, &h, n)?;
                let c = verify_set_inequality(&d, &s, &e)?;
                if !c.holds {
                    return Answer::yes(json!({
                        "witness": h,
                        "n": n,
                        "size": e.len(),
                        "lhs_pow": c.lhs_pow.to_string(),
                        "rhs_pow": c.rhs_pow.to_string(),
                    }));
                }
            }
            Answer::new(json!({ "witness": h, "n": Value::Null, "max_n": max_n }), false)
        }
        Command::EnumSubspaces { d, n } => Answer::yes(enumerate_subspaces(d, n)),
        Command::DiophBasic { system } => {
            let s = PolySystem::from_json(&read_input(system.as_ref())?)?;
            Answer::yes(to_basic_set(&s)?.to_json_value())
        }
        Command::DiophEncode { system, a } => {
            let s = PolySystem::from_json(&read_input(system.as_ref())?)?;
            let enc = encode(&to_basic_set(&s)?, &parse_list(&a)?)?;
            Answer::yes(enc.to_json_value()?)
        }
        Command::DiophWitness { system, point } => {
            let s = PolySystem::from_json(&read_input(system.as_ref())?)?;
            let x = parse_list(&point)?;
            if !s.is_solution(&x) {
                return Err(Error::Precondition("the point does not solve the system".into()));
            }
            let basic = to_basic_set(&s)?;
            let w = witness_from_solution(&basic, &basic.lift(&x)?)?;
            Answer::yes(w)
        }
        Command::DiophVerify { encoding, witness } => {
            let enc = DiophEncoding::from_json(&read_input(encoding.as_ref())?)?;
            let ok = verify_witness(&enc, &load_subspace(&witness)?)?;
            Answer::new(json!({ "witness": ok }), ok)
        }
        Command::DiophExtract { encoding, witness } => {
            let enc = DiophEncoding::from_json(&read_input(encoding.as_ref())?)?;
            let x = extract_solution(&enc, &load_subspace(&witness)?)?;
            Answer::yes(x)
        }
        Command::DiophSearch { encoding, height } => {
            let enc = DiophEncoding::from_json(&read_input(encoding.as_ref())?)?;
            let found = bounded_witness_search(&enc, height)?;
            let positive = found.is_some();
            Answer::new(json!({ "height": height, "witness": found }), positive)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(answer) => {
            println!("{}", answer.json);
            ExitCode::from(if answer.positive { 0 } else { 1 })
        }
        Err(Error::BudgetExhausted { budget, outer }) => {
            println!(
                "{}",
                json!({
                    "error": "budget exhausted",
                    "budget": budget,
                    "outer": outer.to_json_value(),
                })
            );
            eprintln!("hbl: budget of {budget} subspaces exhausted");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("hbl: {e}");
            ExitCode::from(2)
        }
    }
}
