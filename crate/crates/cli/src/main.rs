use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rltsdp::compare::{compare, generate, GenOptions};
use rltsdp::graph::{check_poly_conditions, DEFAULT_DEGREE_CAP, DEFAULT_WIDTH_CAP};
use rltsdp::instance::QpInstance;
use rltsdp::relax::{build_baseline, build_exact_hull, build_psd2, Baseline, Psd2Config, RelaxError, RelaxationProgram};
use rltsdp::sdp::{export_sdpa, import_sdpa, lower, solve, SolveStatus};
use serde_json::json;

const EXIT_USAGE: u8 = 1;
const EXIT_REFUSED: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "rltsdp", version, about = "SDP relaxations for sparse box-constrained QPs")]
struct Cli {
    /// Print one JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Structural conditions for a polynomial-size exact formulation.
    Check {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WIDTH_CAP)]
        width_cap: usize,
        #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
        degree_cap: usize,
    },
    /// Build a relaxation and optionally export it in SDPA sparse format.
    Build {
        instance: PathBuf,
        /// shor | shor-mc | shor-mc-tri | psd2:P={..},M={..} | exact
        #[arg(long, short)]
        relaxation: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Also solve the lowered program.
        #[arg(long)]
        solve: bool,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Solve an SDPA sparse file.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Bounds from the baseline relaxations and the new one.
    Compare {
        instance: PathBuf,
        #[arg(long)]
        with_oracle: bool,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Write a seeded random instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        plus: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_triplet: bool,
        #[arg(long, default_value_t = 10)]
        coef_max: i64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, msg: msg.into() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let json = cli.json;
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if json {
                println!("{}", json!({ "error": f.msg, "exit_code": f.code }));
            } else {
                eprintln!("error: {}", f.msg);
            }
            ExitCode::from(f.code)
        }
    }
}

fn read_instance(path: &Path) -> Result<QpInstance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    QpInstance::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.cmd {
        Cmd::Check { instance, width_cap, degree_cap } => {
            let inst = read_instance(&instance)?;
            let report = check_poly_conditions(&inst.build_graph(), width_cap, degree_cap);
            if cli.json {
                println!("{}", serde_json::to_string(&report).expect("serializable"));
            } else {
                println!("plus components:");
                for c in &report.components {
                    println!("  {:?} neighborhood {:?}", c.nodes, c.neighborhood);
                }
                println!("width bound {} (after elimination {})", report.width_bound, report.eliminated_width_bound);
                println!("max plus degree {}", report.max_plus_degree);
                println!("poly_ok {}", report.poly_ok);
                for r in &report.reasons {
                    println!("  {r}");
                }
            }
            Ok(if report.poly_ok { 0 } else { EXIT_REFUSED })
        }
        Cmd::Build { instance, relaxation, out, solve: do_solve, tol } => {
            let inst = read_instance(&instance)?;
            let (prog, cfg) = build_named(&inst, &relaxation)?;
            let low = lower(&prog).map_err(|e| Failure { code: EXIT_REFUSED, msg: e.to_string() })?;
            if let Some(path) = &out {
                let mut file = fs::File::create(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                export_sdpa(&low.sdp, &mut file).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            }
            let result = if do_solve {
                Some(solve(&low.sdp, tol).map_err(|e| Failure::usage(e.to_string()))?)
            } else {
                None
            };
            if cli.json {
                let mut v = json!({
                    "relaxation": relaxation,
                    "extended_variables": prog.registry().len(),
                    "sdp_variables": low.sdp.num_vars,
                    "blocks": prog.block_histogram(),
                    "equalities": prog.equalities().len(),
                    "summary": prog.size_summary(),
                });
                if let Some(cfg) = &cfg {
                    v["formula"] = json!({
                        "lmis": cfg.expected_lmis(),
                        "scalar_blocks": cfg.expected_scalar_blocks(),
                        "variables": cfg.expected_variables(),
                    });
                }
                if let Some(res) = &result {
                    v["solve"] = serde_json::to_value(res).expect("serializable");
                }
                println!("{v}");
            } else {
                println!("{}", prog.size_summary());
                println!("extended variables {}, SDP variables {}, equalities {}", prog.registry().len(), low.sdp.num_vars, prog.equalities().len());
                if let Some(cfg) = &cfg {
                    println!(
                        "formula: {} LMIs of size >= 2, {} scalar blocks, {} variables",
                        cfg.expected_lmis(),
                        cfg.expected_scalar_blocks(),
                        cfg.expected_variables()
                    );
                }
                if let Some(res) = &result {
                    println!("status {:?}, bound {}", res.status, res.primal_objective);
                }
            }
            Ok(match result {
                Some(res) if res.status != SolveStatus::Optimal => EXIT_SOLVER,
                _ => 0,
            })
        }
        Cmd::Solve { file, tol } => {
            let text = fs::read_to_string(&file).map_err(|e| Failure::usage(format!("{}: {e}", file.display())))?;
            let sdp = import_sdpa(&text).map_err(|e| Failure::usage(format!("{}: {e}", file.display())))?;
            let res = solve(&sdp, tol).map_err(|e| Failure::usage(e.to_string()))?;
            if cli.json {
                println!("{}", serde_json::to_string(&res).expect("serializable"));
            } else {
                println!("status {:?}", res.status);
                println!("primal {}", res.primal_objective);
                println!("dual {}", res.dual_objective);
                println!("iterations {}", res.iterations);
            }
            Ok(if res.status == SolveStatus::Optimal { 0 } else { EXIT_SOLVER })
        }
        Cmd::Compare { instance, with_oracle, tol } => {
            let inst = read_instance(&instance)?;
            let report = compare(&inst, with_oracle, tol);
            if cli.json {
                println!("{}", serde_json::to_string(&report).expect("serializable"));
            } else {
                print!("{}", report.render());
            }
            Ok(if report.all_optimal() { 0 } else { EXIT_SOLVER })
        }
        Cmd::Gen { n, density, plus, seed, no_triplet, coef_max, out } => {
            let opts = GenOptions { n, density, plus, seed, no_triplet, coef_max };
            let inst = generate(&opts).map_err(|e| Failure::usage(e.to_string()))?;
            let text = inst.emit();
            match out {
                Some(path) => fs::write(&path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}

fn build_named(inst: &QpInstance, name: &str) -> Result<(RelaxationProgram, Option<Psd2Config>), Failure> {
    let g = inst.build_graph();
    let refused = |e: RelaxError| Failure { code: EXIT_REFUSED, msg: e.to_string() };
    match name {
        "shor" => Ok((build_baseline(&g, inst, Baseline::Shor).map_err(refused)?, None)),
        "shor-mc" => Ok((build_baseline(&g, inst, Baseline::ShorMc).map_err(refused)?, None)),
        "shor-mc-tri" => Ok((build_baseline(&g, inst, Baseline::ShorMcTri).map_err(refused)?, None)),
        "exact" => Ok((build_exact_hull(&g, inst).map_err(refused)?, None)),
        _ => {
            let spec = name
                .strip_prefix("psd2:")
                .ok_or_else(|| Failure::usage(format!("unknown relaxation '{name}'")))?;
            let cfg = parse_psd2(spec)?;
            let mut prog = build_psd2(&g, &cfg).map_err(refused)?;
            prog.set_instance_objective(inst);
            Ok((prog, Some(cfg)))
        }
    }
}

/// Parses `P={1,2},M={3}`; `M` may be omitted, `∅` or `{}` is empty, and
/// braces around a single node are optional.
fn parse_psd2(spec: &str) -> Result<Psd2Config, Failure> {
    let bad = || Failure::usage(format!("cannot parse psd2 spec '{spec}', expected P={{..}},M={{..}}"));
    let rest = spec.trim().strip_prefix("P=").ok_or_else(bad)?;
    let (p, m) = match rest.find("M=") {
        Some(pos) => (rest[..pos].trim_end().trim_end_matches(',').trim_end(), &rest[pos + 2..]),
        None => (rest, ""),
    };
    let set = |s: &str| -> Result<Vec<usize>, Failure> {
        let s = s.trim();
        if s.is_empty() || s == "∅" {
            return Ok(Vec::new());
        }
        let inner = s.strip_prefix('{').and_then(|t| t.strip_suffix('}')).unwrap_or(s);
        inner
            .split([',', ' '])
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|_| bad()))
            .collect()
    };
    Psd2Config::new(set(p)?, set(m)?).map_err(|e| Failure::usage(e.to_string()))
}
