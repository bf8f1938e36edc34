//! Command-line front end: every toolkit operation over JSON documents,
//! with machine-readable reports on standard output.
//!
//! Exit codes: 0 affirmative/valid, 1 negative/refuted, 2 unknown or
//! budget exhausted, 64 usage error, 65 input document error.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cslogic::algebra::{ConditionalLattice, LatticeDoc};
use cslogic::duality::{eta_check, filter_frame, theta_check, triangle_eta_holds, triangle_theta_holds, EtaFailure, ThetaFailure};
use cslogic::extensions::{
    corr_check, fill_in, find_persistence_failure, int_eval, persistence_test, AxiomId,
    CorrError, CorrVariant, FillInKind, PersistenceSearchBounds,
};
use cslogic::frame::{validates, FrameDoc, GeneralFrame, Model, Validity, ValidityError, Valuation};
use cslogic::search::proof::ProofTreeDoc;
use cslogic::search::{decide, derive, find_countermodel, Budget, Countermodel, Verdict};
use cslogic::semilattice::{FiniteSemilattice, Filter, SemilatticeDoc};
use cslogic::syntax::{parse_pair, ConsequencePair, TheoryGamma};

const EXIT_OK: i32 = 0;
const EXIT_NEGATIVE: i32 = 1;
const EXIT_UNKNOWN: i32 = 2;
const EXIT_USAGE: i32 = 64;
const EXIT_INPUT: i32 = 65;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Parser)]
#[command(
    name = "cslogic",
    version,
    about = "Finite-model toolkit for conditional semilattice logic"
)]
struct Cli {
    /// Output format for the report on stdout
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Seed for every sampling operation
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a semilattice, frame, or lattice document
    Validate {
        #[arg(long)]
        semilattice: Option<PathBuf>,
        #[arg(long)]
        frame: Option<PathBuf>,
        #[arg(long)]
        lattice: Option<PathBuf>,
    },
    /// Evaluate a formula in a frame under a valuation
    Eval {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        formula: String,
        /// JSON object mapping atoms to element-name arrays
        #[arg(long)]
        valuation: String,
    },
    /// Check a consequence pair on a frame over all admissible valuations
    Check {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        pair: Option<String>,
        #[arg(long)]
        pair_file: Option<PathBuf>,
        #[arg(long, default_value_t = cslogic::frame::DEFAULT_VALUATION_BUDGET)]
        budget: u64,
    },
    /// Search for a derivation of a pair
    Prove {
        #[arg(long)]
        pair: Option<String>,
        #[arg(long)]
        pair_file: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        max_depth: usize,
    },
    /// Search for a countermodel to a pair
    Refute {
        #[arg(long)]
        pair: Option<String>,
        #[arg(long)]
        pair_file: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        #[arg(long, default_value_t = 64)]
        max_tables: usize,
        /// named, sampled, both, or exhaustive
        #[arg(long, default_value = "both")]
        strategy: String,
        #[arg(long)]
        wall_ms: Option<u64>,
    },
    /// Run prover and countermodel search together
    Decide {
        #[arg(long)]
        pair: Option<String>,
        #[arg(long)]
        pair_file: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        #[arg(long, default_value_t = 6)]
        max_depth: usize,
        #[arg(long, default_value_t = 64)]
        max_tables: usize,
        /// named, sampled, both, or exhaustive
        #[arg(long, default_value = "both")]
        strategy: String,
        #[arg(long)]
        wall_ms: Option<u64>,
    },
    /// Emit the filter frame of a conditional lattice
    Dual {
        #[arg(long)]
        lattice: PathBuf,
    },
    /// Check the lattice-side duality unit
    ThetaCheck {
        #[arg(long)]
        lattice: PathBuf,
    },
    /// Check the frame-side duality unit
    EtaCheck {
        #[arg(long)]
        frame: PathBuf,
    },
    /// Extend the selection function to all filters
    Fillin {
        #[arg(long)]
        frame: PathBuf,
        /// k1, kup, or kr
        #[arg(long)]
        kind: String,
    },
    /// Evaluate an axiom's frame condition
    Correspond {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        axiom: String,
        #[arg(long, default_value_t = false)]
        primed: bool,
    },
    /// Test or search fill-in persistence of an axiom
    Persist {
        #[arg(long)]
        frame: Option<PathBuf>,
        #[arg(long)]
        axiom: String,
        /// k1, kup, or kr
        #[arg(long)]
        kind: String,
        /// Search generated frames for a persistence failure instead of
        /// testing one frame
        #[arg(long, default_value_t = false)]
        search: bool,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        #[arg(long, default_value_t = 50)]
        max_tables: usize,
    },
    /// Enumerate semilattices of a given size
    Enumerate {
        #[arg(long)]
        n: usize,
        /// Emit the labeled stream instead of one representative per
        /// isomorphism class
        #[arg(long, default_value_t = false)]
        labeled: bool,
        #[arg(long, default_value_t = false)]
        count_only: bool,
    },
    /// Evaluate a formula intuitionistically over a distributive base
    IntEval {
        #[arg(long)]
        semilattice: PathBuf,
        #[arg(long)]
        formula: String,
        /// JSON object mapping atoms to element-name arrays
        #[arg(long)]
        valuation: String,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

struct Outcome {
    code: i32,
    status: &'static str,
    data: Value,
}

fn ok(status: &'static str, data: Value) -> Result<Outcome, Failure> {
    Ok(Outcome {
        code: EXIT_OK,
        status,
        data,
    })
}

fn negative(status: &'static str, data: Value) -> Result<Outcome, Failure> {
    Ok(Outcome {
        code: EXIT_NEGATIVE,
        status,
        data,
    })
}

fn unknown(data: Value) -> Result<Outcome, Failure> {
    Ok(Outcome {
        code: EXIT_UNKNOWN,
        status: "unknown",
        data,
    })
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_semilattice(path: &PathBuf) -> Result<FiniteSemilattice, Failure> {
    let text = read_file(path)?;
    let doc: SemilatticeDoc =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("semilattice document: {e}")))?;
    doc.to_semilattice()
        .map_err(|e| Failure::input(format!("semilattice document: {e}")))
}

fn load_frame(path: &PathBuf) -> Result<GeneralFrame, Failure> {
    let text = read_file(path)?;
    let doc: FrameDoc =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("frame document: {e}")))?;
    doc.to_frame()
        .map_err(|e| Failure::input(format!("frame document: {e}")))
}

fn load_lattice(path: &PathBuf) -> Result<ConditionalLattice, Failure> {
    let text = read_file(path)?;
    let doc: LatticeDoc =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("lattice document: {e}")))?;
    doc.to_lattice()
        .map_err(|e| Failure::input(format!("lattice document: {e}")))
}

fn load_pair(inline: &Option<String>, file: &Option<PathBuf>) -> Result<ConsequencePair, Failure> {
    let text = match (inline, file) {
        (Some(t), None) => t.clone(),
        (None, Some(p)) => read_file(p)?,
        _ => return Err(Failure::usage("provide exactly one of --pair and --pair-file")),
    };
    parse_pair(text.trim()).map_err(|e| Failure::input(e.to_string()))
}

fn load_gamma(path: &Option<PathBuf>) -> Result<TheoryGamma, Failure> {
    match path {
        None => Ok(TheoryGamma::empty()),
        Some(p) => {
            let text = read_file(p)?;
            let mut pairs = Vec::new();
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                pairs.push(parse_pair(line).map_err(|e| Failure::input(e.to_string()))?);
            }
            Ok(TheoryGamma::new(pairs))
        }
    }
}

fn parse_valuation(
    base: &FiniteSemilattice,
    text: &str,
) -> Result<BTreeMap<String, Filter>, Failure> {
    let raw: BTreeMap<String, Vec<String>> =
        serde_json::from_str(text).map_err(|e| Failure::input(format!("valuation: {e}")))?;
    let mut out = BTreeMap::new();
    for (atom, names) in raw {
        let mut f = Filter::EMPTY;
        for name in &names {
            let i = base
                .index_of(name)
                .ok_or_else(|| Failure::input(format!("valuation: unknown element `{name}`")))?;
            f = f.with(i);
        }
        out.insert(atom, f);
    }
    Ok(out)
}

fn filter_json(base: &FiniteSemilattice, f: Filter) -> Value {
    Value::Array(
        base.filter_names(f)
            .into_iter()
            .map(Value::String)
            .collect(),
    )
}

fn valuation_json(base: &FiniteSemilattice, v: &Valuation) -> Value {
    let mut map = serde_json::Map::new();
    for (atom, &f) in &v.0 {
        map.insert(atom.clone(), filter_json(base, f));
    }
    Value::Object(map)
}

fn countermodel_json(cm: &Countermodel) -> Value {
    json!({
        "frame": serde_json::to_value(FrameDoc::from_frame(&cm.frame)).unwrap(),
        "valuation": valuation_json(cm.frame.base(), &cm.valuation),
        "world": cm.frame.base().name(cm.world),
    })
}

fn axiom_from_token(tok: &str) -> Result<AxiomId, Failure> {
    AxiomId::from_token(tok)
        .ok_or_else(|| Failure::usage(format!("unknown axiom `{tok}`; expected one of refl, cond, veq, cs, det, expl, pnp, mp, tr, cm, dist")))
}

fn fill_kind_from_token(tok: &str) -> Result<FillInKind, Failure> {
    FillInKind::from_token(tok)
        .ok_or_else(|| Failure::usage(format!("unknown fill-in kind `{tok}`; expected k1, kup, or kr")))
}

fn table_strategy_from_token(tok: &str) -> Result<cslogic::search::TableStrategy, Failure> {
    cslogic::search::TableStrategy::from_token(tok).ok_or_else(|| {
        Failure::usage(format!(
            "unknown strategy `{tok}`; expected named, sampled, both, or exhaustive"
        ))
    })
}

fn map_validity_error(e: ValidityError) -> Outcome {
    Outcome {
        code: EXIT_UNKNOWN,
        status: "unknown",
        data: json!({ "reason": e.to_string() }),
    }
}

fn run(command: Command, seed: u64) -> Result<Outcome, Failure> {
    match command {
        Command::Validate {
            semilattice,
            frame,
            lattice,
        } => {
            let given = [semilattice.is_some(), frame.is_some(), lattice.is_some()]
                .iter()
                .filter(|b| **b)
                .count();
            if given != 1 {
                return Err(Failure::usage(
                    "provide exactly one of --semilattice, --frame, --lattice",
                ));
            }
            let violations: Vec<String> = if let Some(p) = semilattice {
                load_semilattice(&p)?
                    .validate()
                    .iter()
                    .map(|v| v.to_string())
                    .collect()
            } else if let Some(p) = frame {
                load_frame(&p)?
                    .validate()
                    .iter()
                    .map(|v| v.to_string())
                    .collect()
            } else {
                load_lattice(&lattice.unwrap())?
                    .validate()
                    .iter()
                    .map(|v| v.to_string())
                    .collect()
            };
            let data = json!({ "violations": violations });
            if violations_empty(&data) {
                ok("valid", data)
            } else {
                negative("invalid", data)
            }
        }

        Command::Eval {
            frame,
            formula,
            valuation,
        } => {
            let g = load_frame(&frame)?;
            let f = cslogic::parse_formula(&formula).map_err(|e| Failure::input(e.to_string()))?;
            let v = parse_valuation(g.base(), &valuation)?;
            let model = Model::new(&g, Valuation::new(v));
            let truth = model
                .eval(&f)
                .map_err(|e| Failure::input(e.to_string()))?;
            let worlds = filter_json(g.base(), truth);
            ok("ok", json!({ "formula": f.to_string(), "truth_set": worlds }))
        }

        Command::Check {
            frame,
            pair,
            pair_file,
            budget,
        } => {
            let g = load_frame(&frame)?;
            let cp = load_pair(&pair, &pair_file)?;
            match validates(&g, &cp, budget) {
                Ok(Validity::Valid) => ok("valid", json!({ "pair": cp.to_string() })),
                Ok(Validity::Refuted { valuation, world }) => negative(
                    "refuted",
                    json!({
                        "pair": cp.to_string(),
                        "valuation": valuation_json(g.base(), &valuation),
                        "world": g.base().name(world),
                    }),
                ),
                Err(e) => Ok(map_validity_error(e)),
            }
        }

        Command::Prove {
            pair,
            pair_file,
            gamma,
            max_depth,
        } => {
            let cp = load_pair(&pair, &pair_file)?;
            let gamma = load_gamma(&gamma)?;
            match derive(&cp, &gamma, max_depth) {
                Some(tree) => ok(
                    "derivable",
                    json!({ "proof": serde_json::to_value(ProofTreeDoc::from(&tree)).unwrap() }),
                ),
                None => unknown(json!({ "reason": "no derivation within depth", "max_depth": max_depth })),
            }
        }

        Command::Refute {
            pair,
            pair_file,
            gamma,
            max_n,
            max_tables,
            strategy,
            wall_ms,
        } => {
            let cp = load_pair(&pair, &pair_file)?;
            let gamma = load_gamma(&gamma)?;
            let budget = Budget {
                max_frame_size: max_n,
                max_tables_per_frame: max_tables,
                strategy: table_strategy_from_token(&strategy)?,
                wall_ms,
                ..Budget::default()
            };
            match find_countermodel(&cp, &gamma, &budget, seed) {
                Ok(Some(cm)) => negative("refuted", countermodel_json(&cm)),
                Ok(None) => unknown(json!({
                    "reason": "no countermodel within bounds",
                    "max_n": max_n,
                    "max_tables": max_tables,
                })),
                Err(e) => Ok(map_validity_error(e)),
            }
        }

        Command::Decide {
            pair,
            pair_file,
            gamma,
            max_n,
            max_depth,
            max_tables,
            strategy,
            wall_ms,
        } => {
            let cp = load_pair(&pair, &pair_file)?;
            let gamma = load_gamma(&gamma)?;
            let budget = Budget {
                max_frame_size: max_n,
                max_depth,
                max_tables_per_frame: max_tables,
                strategy: table_strategy_from_token(&strategy)?,
                wall_ms,
                valuation_budget: cslogic::frame::DEFAULT_VALUATION_BUDGET,
            };
            match decide(&cp, &gamma, &budget, seed) {
                Ok(Verdict::Derivable(tree)) => ok(
                    "derivable",
                    json!({ "proof": serde_json::to_value(ProofTreeDoc::from(&tree)).unwrap() }),
                ),
                Ok(Verdict::Refuted(cm)) => negative("refuted", countermodel_json(&cm)),
                Ok(Verdict::Unknown(report)) => {
                    unknown(json!({ "exhausted": serde_json::to_value(report).unwrap() }))
                }
                Err(e) => Ok(map_validity_error(e)),
            }
        }

        Command::Dual { lattice } => {
            let cl = load_lattice(&lattice)?;
            let ff = filter_frame(&cl).map_err(|e| Failure::input(e.to_string()))?;
            let mut element_map = serde_json::Map::new();
            for e in 0..cl.n() {
                element_map.insert(
                    cl.name(e).to_owned(),
                    filter_json(ff.frame.base(), ff.element_map[e]),
                );
            }
            ok(
                "ok",
                json!({
                    "frame": serde_json::to_value(FrameDoc::from_frame(&ff.frame)).unwrap(),
                    "element_map": Value::Object(element_map),
                }),
            )
        }

        Command::ThetaCheck { lattice } => {
            let cl = load_lattice(&lattice)?;
            match theta_check(&cl) {
                Ok(_) => {
                    let triangles = triangle_theta_holds(&cl)
                        .map_err(|e| Failure::input(e.to_string()))?;
                    if triangles {
                        ok("pass", json!({ "triangle": true }))
                    } else {
                        negative("fail", json!({ "triangle": false }))
                    }
                }
                Err(ThetaFailure::Duality(e)) => Err(Failure::input(e.to_string())),
                Err(e) => negative("fail", json!({ "reason": e.to_string() })),
            }
        }

        Command::EtaCheck { frame } => {
            let g = load_frame(&frame)?;
            match eta_check(&g) {
                Ok(_) => {
                    let triangles =
                        triangle_eta_holds(&g).map_err(|e| Failure::input(e.to_string()))?;
                    if triangles {
                        ok("pass", json!({ "triangle": true }))
                    } else {
                        negative("fail", json!({ "triangle": false }))
                    }
                }
                Err(EtaFailure::Duality(e)) => negative("fail", json!({ "reason": e.to_string() })),
                Err(e) => negative("fail", json!({ "reason": e.to_string() })),
            }
        }

        Command::Fillin { frame, kind } => {
            let g = load_frame(&frame)?;
            let kind = fill_kind_from_token(&kind)?;
            let filled = fill_in(&g, kind);
            ok(
                "ok",
                json!({ "frame": serde_json::to_value(FrameDoc::from_frame(&filled)).unwrap() }),
            )
        }

        Command::Correspond {
            frame,
            axiom,
            primed,
        } => {
            let g = load_frame(&frame)?;
            let ax = axiom_from_token(&axiom)?;
            let variant = if primed {
                CorrVariant::Primed
            } else {
                CorrVariant::Plain
            };
            match corr_check(&g, &ax, variant) {
                Ok(true) => ok("holds", json!({ "axiom": ax.token(), "primed": primed })),
                Ok(false) => negative("fails", json!({ "axiom": ax.token(), "primed": primed })),
                Err(e @ CorrError::NoCorrespondence(_)) => Err(Failure::usage(e.to_string())),
                Err(e @ CorrError::NoPrimedVariant(_)) => Err(Failure::usage(e.to_string())),
                Err(e @ CorrError::PrimedRequiresFullOrDescriptive) => {
                    Err(Failure::input(e.to_string()))
                }
            }
        }

        Command::Persist {
            frame,
            axiom,
            kind,
            search,
            max_n,
            max_tables,
        } => {
            let ax = axiom_from_token(&axiom)?;
            let kind = fill_kind_from_token(&kind)?;
            if search {
                if frame.is_some() {
                    return Err(Failure::usage("--search ignores --frame; drop one"));
                }
                let bounds = PersistenceSearchBounds {
                    max_n,
                    tables_per_family: max_tables,
                    seed,
                };
                match find_persistence_failure(&ax, kind, bounds) {
                    Ok(Some(failure)) => negative(
                        "failure-found",
                        json!({
                            "axiom": ax.token(),
                            "kind": kind.token(),
                            "frame": serde_json::to_value(FrameDoc::from_frame(&failure.frame)).unwrap(),
                            "valuation": valuation_json(failure.frame.base(), &failure.valuation),
                            "world": failure.frame.base().name(failure.world),
                        }),
                    ),
                    Ok(None) => ok(
                        "no-failure-found",
                        json!({ "axiom": ax.token(), "kind": kind.token(), "max_n": max_n }),
                    ),
                    Err(e) => Ok(map_validity_error(e)),
                }
            } else {
                let path = frame.ok_or_else(|| {
                    Failure::usage("provide --frame, or --search to hunt for failures")
                })?;
                let g = load_frame(&path)?;
                match persistence_test(&g, &ax, kind) {
                    Ok(true) => ok("persists", json!({ "axiom": ax.token(), "kind": kind.token() })),
                    Ok(false) => {
                        negative("not-persistent", json!({ "axiom": ax.token(), "kind": kind.token() }))
                    }
                    Err(e) => Ok(map_validity_error(e)),
                }
            }
        }

        Command::Enumerate {
            n,
            labeled,
            count_only,
        } => {
            let all = cslogic::search::generate::enumerate_semilattices(n, !labeled)
                .map_err(|e| Failure::usage(e.to_string()))?;
            let mut data = json!({ "n": n, "count": all.len(), "labeled": labeled });
            if !count_only {
                let docs: Vec<Value> = all
                    .iter()
                    .map(|s| serde_json::to_value(SemilatticeDoc::from_semilattice(s)).unwrap())
                    .collect();
                data["semilattices"] = Value::Array(docs);
            }
            ok("ok", data)
        }

        Command::IntEval {
            semilattice,
            formula,
            valuation,
        } => {
            let base = load_semilattice(&semilattice)?;
            let f = cslogic::parse_formula(&formula).map_err(|e| Failure::input(e.to_string()))?;
            let v = parse_valuation(&base, &valuation)?;
            let truth = int_eval(&base, &v, &f).map_err(|e| Failure::input(e.to_string()))?;
            ok(
                "ok",
                json!({ "formula": f.to_string(), "truth_set": filter_json(&base, truth) }),
            )
        }
    }
}

fn violations_empty(data: &Value) -> bool {
    data["violations"].as_array().is_some_and(|a| a.is_empty())
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Validate { .. } => "validate",
        Command::Eval { .. } => "eval",
        Command::Check { .. } => "check",
        Command::Prove { .. } => "prove",
        Command::Refute { .. } => "refute",
        Command::Decide { .. } => "decide",
        Command::Dual { .. } => "dual",
        Command::ThetaCheck { .. } => "theta-check",
        Command::EtaCheck { .. } => "eta-check",
        Command::Fillin { .. } => "fillin",
        Command::Correspond { .. } => "correspond",
        Command::Persist { .. } => "persist",
        Command::Enumerate { .. } => "enumerate",
        Command::IntEval { .. } => "int-eval",
    }
}

fn print_report(format: Format, command: &'static str, status: &str, data: &Value) {
    match format {
        Format::Json => {
            let mut report = serde_json::Map::new();
            report.insert("command".to_owned(), Value::String(command.to_owned()));
            report.insert("status".to_owned(), Value::String(status.to_owned()));
            if !data.is_null() {
                report.insert("data".to_owned(), data.clone());
            }
            println!("{}", Value::Object(report));
        }
        Format::Text => {
            println!("{command}: {status}");
            if !data.is_null() {
                println!("{}", serde_json::to_string_pretty(data).unwrap());
            }
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message; help and version requests are
            // not usage errors
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let name = command_name(&cli.command);
    match run(cli.command, cli.seed) {
        Ok(outcome) => {
            print_report(cli.format, name, outcome.status, &outcome.data);
            std::process::exit(outcome.code);
        }
        Err(failure) => {
            print_report(
                cli.format,
                name,
                "error",
                &json!({ "error": failure.message }),
            );
            std::process::exit(failure.code);
        }
    }
}
