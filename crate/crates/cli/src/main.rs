use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use tropicurve::io::{
    divisor_to_json, graph_to_json, locus_tsv, locus_to_json, parse_graph, trace_to_json, trace_tsv,
};
use tropicurve::rank::{default_rank_set, rank, riemann_roch};
use tropicurve::redmap::trace_edge;
use tropicurve::reduction::{lin_equiv, oracle_reduce, reduce};
use tropicurve::special::{canonical_classification, d_weierstrass_locus, is_very_ample, weierstrass_locus};
use tropicurve::{corpus, Divisor, Error, MetricGraph, PointOnGraph};

#[derive(Parser)]
#[command(name = "tropicurve", version, about = "Divisors on metric graphs with exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// First Betti number of the graph.
    Genus {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Reduced divisor linearly equivalent to D with respect to a base point.
    Reduce {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        divisor: String,
        #[arg(long)]
        base: String,
        /// Write the witness function as JSON.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Compare against the subdivision oracle; exit 3 on disagreement.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Rank of D with a certificate.
    Rank {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        divisor: String,
    },
    /// Checks r(D) - r(K - D) = deg D + 1 - g.
    RrCheck {
        #[arg(long)]
        graph: PathBuf,
        /// Divisors to check; random ones are drawn when none are given.
        #[arg(long, allow_hyphen_values = true)]
        divisor: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Reduced-divisor map along one edge.
    Trace {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        divisor: String,
        #[arg(long)]
        edge: String,
        #[arg(long)]
        emit_plot: Option<PathBuf>,
    },
    /// Weierstrass locus of K, or of D when given.
    Weierstrass {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        divisor: Option<String>,
        #[arg(long)]
        emit_plot: Option<PathBuf>,
    },
    /// Whether the reduced-divisor map of D is injective.
    VeryAmple {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        divisor: String,
    },
    /// Which family, if any, keeps K from being very ample.
    Canonical {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Decides D1 ~ D2 and prints a function f with D1 = D2 + div f.
    LinEquiv {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        d1: String,
        #[arg(long, allow_hyphen_values = true)]
        d2: String,
    },
    /// Prints a named curve as a graph file, or lists the names.
    Corpus {
        name: Option<String>,
        #[arg(long, default_value_t = 3)]
        genus: usize,
    },
}

enum Failure {
    Input(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvariantViolation(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<Value, Failure>;

fn load(path: &Path) -> Result<MetricGraph, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(parse_graph(&text)?)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn show(g: &MetricGraph, d: &Divisor) -> Value {
    divisor_to_json(g, d)
}

fn random_divisor(rng: &mut ChaCha8Rng, g: &MetricGraph) -> Divisor {
    let mut sites = default_rank_set(g);
    for (e, edge) in g.edges().iter().enumerate() {
        let den = rng.gen_range(2..=4);
        let num = rng.gen_range(1..den);
        let offset = &edge.length * tropicurve::rational::frac(num, den);
        sites.push(g.point(e, offset).expect("offset inside the edge"));
    }
    let genus = g.genus() as i64;
    let target = rng.gen_range(-2..=2 * genus + 2);
    let mut d = Divisor::zero();
    for _ in 0..rng.gen_range(0..=3) {
        let p = sites[rng.gen_range(0..sites.len())].clone();
        d.add(p, rng.gen_range(-2..=2));
    }
    let p = sites[rng.gen_range(0..sites.len())].clone();
    d.add(p, target - d.degree());
    d
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Genus { graph } => {
            let g = load(&graph)?;
            Ok(json!({ "genus": g.genus() }))
        }
        Command::Reduce {
            graph,
            divisor,
            base,
            witness,
            oracle_check,
        } => {
            let g = load(&graph)?;
            let d = Divisor::parse(&divisor, &g)?;
            let base = g.parse_point(&base)?;
            let r = reduce(&g, &d, &base)?;
            if let Some(path) = witness {
                write(&path, &serde_json::to_string_pretty(&r.witness.to_json(&g)).unwrap_or_default())?;
            }
            let mut out = json!({ "divisor": show(&g, &r.divisor), "phases": r.phases });
            if oracle_check {
                let o = oracle_reduce(&g, &d, &base)?;
                if o != r.divisor {
                    return Err(Failure::Invariant(format!(
                        "oracle disagrees: {} vs {}",
                        o.display(&g),
                        r.divisor.display(&g)
                    )));
                }
                out["oracle"] = json!("agrees");
            }
            Ok(out)
        }
        Command::Rank { graph, divisor } => {
            let g = load(&graph)?;
            let d = Divisor::parse(&divisor, &g)?;
            let r = rank(&g, &d)?;
            Ok(json!({ "rank": r.rank, "certificate": show(&g, &r.certificate) }))
        }
        Command::RrCheck {
            graph,
            divisor,
            seed,
            count,
        } => {
            let g = load(&graph)?;
            let divisors: Vec<Divisor> = if divisor.is_empty() {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count).map(|_| random_divisor(&mut rng, &g)).collect()
            } else {
                divisor
                    .iter()
                    .map(|t| Divisor::parse(t, &g))
                    .collect::<Result<_, _>>()?
            };
            let mut rows = Vec::new();
            for d in &divisors {
                let rr = riemann_roch(&g, d)?;
                if !rr.holds() {
                    return Err(Failure::Invariant(format!("Riemann-Roch fails for {}", d.display(&g))));
                }
                rows.push(json!({
                    "divisor": show(&g, d),
                    "degree": rr.degree,
                    "rank": rr.rank,
                    "dual_rank": rr.dual_rank,
                }));
            }
            Ok(json!({ "genus": g.genus(), "seed": seed, "checks": rows, "holds": true }))
        }
        Command::Trace {
            graph,
            divisor,
            edge,
            emit_plot,
        } => {
            let g = load(&graph)?;
            let d = Divisor::parse(&divisor, &g)?;
            let e = g.edge_id(&edge)?;
            let tr = trace_edge(&g, &d, e)?;
            if !tr.is_continuous(&g) {
                return Err(Failure::Invariant("trace is discontinuous".into()));
            }
            if let Some(path) = emit_plot {
                write(&path, &trace_tsv(&g, &tr))?;
            }
            Ok(trace_to_json(&g, &tr))
        }
        Command::Weierstrass {
            graph,
            divisor,
            emit_plot,
        } => {
            let g = load(&graph)?;
            let locus = match divisor {
                Some(text) => d_weierstrass_locus(&g, &Divisor::parse(&text, &g)?)?,
                None => weierstrass_locus(&g)?,
            };
            if let Some(path) = emit_plot {
                write(&path, &locus_tsv(&g, &locus))?;
            }
            Ok(locus_to_json(&g, &locus))
        }
        Command::VeryAmple { graph, divisor } => {
            let g = load(&graph)?;
            let d = Divisor::parse(&divisor, &g)?;
            let v = is_very_ample(&g, &d)?;
            Ok(json!({ "very_ample": v.very_ample, "witness": pair(&g, &v.witness) }))
        }
        Command::Canonical { graph } => {
            let g = load(&graph)?;
            let c = canonical_classification(&g)?;
            Ok(json!({ "case": c.case.label(), "witness": pair(&g, &c.witness) }))
        }
        Command::LinEquiv { graph, d1, d2 } => {
            let g = load(&graph)?;
            let (a, b) = (Divisor::parse(&d1, &g)?, Divisor::parse(&d2, &g)?);
            Ok(match lin_equiv(&g, &a, &b)? {
                Some(f) => json!({ "equivalent": true, "function": f.to_json(&g) }),
                None => json!({ "equivalent": false }),
            })
        }
        Command::Corpus { name, genus } => match name {
            None => Ok(json!(corpus::NAMES)),
            Some(n) => Ok(graph_to_json(&corpus::by_name(&n, genus)?)),
        },
    }
}

fn pair(g: &MetricGraph, w: &Option<(PointOnGraph, PointOnGraph)>) -> Value {
    match w {
        Some((p, q)) => json!([g.point_name(p), g.point_name(q)]),
        None => Value::Null,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).unwrap_or_default();
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violation: {msg}");
            ExitCode::from(3)
        }
    }
}
