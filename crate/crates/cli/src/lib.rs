//! Command-line front end. Every command prints one JSON document on stdout;
//! errors print one JSON document on stderr.
//!
//! Exit codes: 0 success, 1 domain error, 2 parse or usage error, 3
//! verification failures.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use dualgraph::canonical::{classify_k_type, compute_dnatural, format_rational};
use dualgraph::verify::{run_suite, Budget, Suite};
use dualgraph::{
    build_family, build_family_unbounded, classify_family, parse_dgn, parse_twig,
    predicted_k_type, to_dgn, DualGraph, FamilyInstance, Twig,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Parser)]
#[command(name = "dualgraph", version, about = "Weighted dual graphs of boundary divisors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Twig arithmetic.
    #[command(subcommand)]
    Twig(TwigCmd),
    /// Queries on a DGN graph read from a file or stdin.
    Graph {
        #[command(subcommand)]
        op: GraphCmd,
    },
    /// Build, classify or type a configuration.
    #[command(subcommand)]
    Family(FamilyCmd),
    /// Run the verification suites.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum TwigCmd {
    /// d(A).
    Det { twig: String },
    /// A*.
    Adjoint { twig: String },
    /// e(A) as p/q.
    Inductance { twig: String },
    /// The twig with inductance p/q.
    FromE { e: String },
}

#[derive(Args)]
struct GraphInput {
    /// DGN file; stdin when omitted or `-`.
    file: Option<PathBuf>,
    /// Delete the marked curve first.
    #[arg(long)]
    without_c: bool,
}

#[derive(Subcommand)]
enum GraphCmd {
    Negdef(GraphInput),
    /// det(-I) and det(I).
    Det(GraphInput),
    Dnatural(GraphInput),
    Ktype(GraphInput),
    /// Contract (-1)-curves of degree <= 2 until none is left.
    Contract(GraphInput),
    Shape(GraphInput),
}

#[derive(Subcommand)]
enum FamilyCmd {
    Build {
        /// Family spec JSON, e.g. '{"family":3,"A":[2],"n":3,"l":7}'.
        spec: String,
        /// Skip the upper bound on l.
        #[arg(long)]
        unbounded: bool,
    },
    /// Match a DGN graph against the configuration list.
    Classify {
        file: Option<PathBuf>,
    },
    Ktype {
        spec: String,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = Suite::NAMES)]
    suite: String,
    #[arg(long)]
    max_det: Option<u64>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    max_n: Option<i64>,
    #[arg(long)]
    max_m: Option<i64>,
    #[arg(long)]
    max_b_len: Option<usize>,
    #[arg(long)]
    max_b_weight: Option<i64>,
    #[arg(long)]
    fujita_max_weight: Option<i64>,
    /// Also write the report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

/// A failed command: exit code and message.
struct Failure {
    code: i32,
    body: Value,
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_DOMAIN,
        body: json!({ "error": e.to_string() }),
    }
}

fn parse_error(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_PARSE,
        body: json!({ "error": e.to_string() }),
    }
}

fn number(n: &BigInt) -> Value {
    Value::Number(n.to_string().parse().expect("integers are JSON numbers"))
}

fn twig_arg(text: &str) -> Result<Twig, Failure> {
    parse_twig(text).map_err(parse_error)
}

fn read_input(file: Option<&PathBuf>, stdin: &mut dyn Read) -> Result<String, Failure> {
    let mut text = String::new();
    match file {
        Some(p) if p.as_os_str() != "-" => {
            text = std::fs::read_to_string(p)
                .map_err(|e| domain(format!("cannot read {}: {e}", p.display())))?;
        }
        _ => {
            stdin
                .read_to_string(&mut text)
                .map_err(|e| domain(format!("cannot read stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn read_graph(input: &GraphInput, stdin: &mut dyn Read) -> Result<DualGraph, Failure> {
    let text = read_input(input.file.as_ref(), stdin)?;
    let g = parse_dgn(&text).map_err(|e| Failure {
        code: EXIT_PARSE,
        body: json!({ "error": e.message, "line": e.line }),
    })?;
    Ok(if input.without_c { g.without_mark() } else { g })
}

fn spec_arg(text: &str) -> Result<FamilyInstance, Failure> {
    serde_json::from_str(text).map_err(parse_error)
}

fn twig_cmd(cmd: TwigCmd) -> Result<Value, Failure> {
    Ok(match cmd {
        TwigCmd::Det { twig } => json!({ "det": number(&twig_arg(&twig)?.determinant()) }),
        TwigCmd::Adjoint { twig } => {
            let star = twig_arg(&twig)?.adjoint().map_err(domain)?;
            json!({ "adjoint": star.to_string() })
        }
        TwigCmd::Inductance { twig } => {
            let e = twig_arg(&twig)?.inductance().map_err(domain)?;
            json!({ "inductance": format_rational(&e) })
        }
        TwigCmd::FromE { e } => {
            let q = BigRational::from_str(e.trim()).map_err(|_| {
                parse_error(format!("expected a rational p/q, got '{e}'"))
            })?;
            let t = Twig::from_inductance(&q).map_err(domain)?;
            json!({ "twig": t.to_string() })
        }
    })
}

fn graph_cmd(op: GraphCmd, stdin: &mut dyn Read) -> Result<Value, Failure> {
    Ok(match op {
        GraphCmd::Negdef(i) => json!({ "negdef": read_graph(&i, stdin)?.is_negative_definite() }),
        GraphCmd::Det(i) => {
            let g = read_graph(&i, stdin)?;
            json!({
                "graph_d": number(&g.graph_d()),
                "signed_determinant": number(&g.signed_determinant()),
            })
        }
        GraphCmd::Dnatural(i) => {
            let dn = compute_dnatural(&read_graph(&i, stdin)?).map_err(domain)?;
            json!({ "dnatural": dn })
        }
        GraphCmd::Ktype(i) => {
            let c = classify_k_type(&read_graph(&i, stdin)?).map_err(domain)?;
            json!({
                "ktype": c.ktype,
                "pairing": format_rational(&c.pairing),
                "dnatural": c.dnatural,
            })
        }
        GraphCmd::Contract(i) => {
            let h = read_graph(&i, stdin)?.contract_all().map_err(domain)?;
            json!({ "graph": to_dgn(&h) })
        }
        GraphCmd::Shape(i) => serde_json::to_value(read_graph(&i, stdin)?.shape_report())
            .expect("shape reports serialize"),
    })
}

fn family_cmd(cmd: FamilyCmd, stdin: &mut dyn Read) -> Result<Value, Failure> {
    Ok(match cmd {
        FamilyCmd::Build { spec, unbounded } => {
            let spec = spec_arg(&spec)?;
            let g = if unbounded {
                build_family_unbounded(&spec)
            } else {
                build_family(&spec)
            }
            .map_err(domain)?;
            json!({ "spec": spec, "graph": to_dgn(&g) })
        }
        FamilyCmd::Classify { file } => {
            let text = read_input(file.as_ref(), stdin)?;
            let g = parse_dgn(&text).map_err(|e| Failure {
                code: EXIT_PARSE,
                body: json!({ "error": e.message, "line": e.line }),
            })?;
            match classify_family(&g) {
                Ok(m) => serde_json::to_value(m).expect("matches serialize"),
                Err(e) => {
                    return Err(Failure {
                        code: EXIT_DOMAIN,
                        body: json!({ "error": "not in the list", "stage": e.stage, "message": e.message }),
                    })
                }
            }
        }
        FamilyCmd::Ktype { spec } => {
            let spec = spec_arg(&spec)?;
            let g = build_family(&spec).map_err(domain)?;
            // C is a 0-curve in family (1); its type comes from the list.
            let ktype = if spec.family == 1 {
                predicted_k_type(&spec).map_err(domain)?
            } else {
                classify_k_type(&g).map_err(domain)?.ktype
            };
            json!({ "ktype": ktype })
        }
    })
}

fn threads_from_env() -> Result<usize, Failure> {
    match std::env::var("DUALGRAPH_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| parse_error(format!("DUALGRAPH_THREADS must be a count, got '{v}'"))),
        Err(_) => Ok(0),
    }
}

fn verify_cmd(args: VerifyArgs) -> Result<(Value, bool), Failure> {
    let d = Budget::default();
    let budget = Budget {
        max_det: args.max_det.unwrap_or(d.max_det),
        max_len: args.max_len.unwrap_or(d.max_len),
        max_n: args.max_n.unwrap_or(d.max_n),
        max_m: args.max_m.unwrap_or(d.max_m),
        max_b_len: args.max_b_len.unwrap_or(d.max_b_len),
        max_b_weight: args.max_b_weight.unwrap_or(d.max_b_weight),
        fujita_max_weight: args.fujita_max_weight.unwrap_or(d.fujita_max_weight),
    };
    let suite: Suite = args.suite.parse().map_err(parse_error)?;
    let run = run_suite(suite, &budget, threads_from_env()?);
    let value = serde_json::to_value(&run).expect("reports serialize");
    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(&value).expect("reports serialize") + "\n";
        std::fs::write(path, text)
            .map_err(|e| domain(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok((value, run.passed()))
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Twig(cmd) => twig_cmd(cmd).map(|v| (v, true)),
        Command::Graph { op } => graph_cmd(op, stdin).map(|v| (v, true)),
        Command::Family(cmd) => family_cmd(cmd, stdin).map(|v| (v, true)),
        Command::Verify(args) => verify_cmd(args),
    };
    match result {
        Ok((value, passed)) => {
            let _ = writeln!(out, "{value}");
            if passed {
                0
            } else {
                EXIT_VERIFY
            }
        }
        Err(f) => {
            let _ = writeln!(err, "{}", f.body);
            f.code
        }
    }
}
