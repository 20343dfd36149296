use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use invbv::bv::{BitVec, Width};
use invbv::catalog::{catalog_entries, Catalog, IcKey, Side};
use invbv::cegqi::{solve_assertions, CegqiOptions, Config, Verdict};
use invbv::qfbv::{GroundSolver, SatConfig, DEFAULT_ENUM_BITS};
use invbv::smtlib::parse_script;
use invbv::term::{SmtPrinter, Sort, TermManager, Value};
use invbv::verifier::{
    emit_sygus, emit_verification_smt2, sygus_keys, verify_keys, Grammar, Status, VerificationReport,
    VerificationSummary,
};

#[derive(Parser)]
#[command(name = "invbv", version, about = "Quantified bit-vector solver and invertibility-condition tools")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide an SMT-LIB 2 script in the BV or QF_BV logic.
    Solve {
        file: PathBuf,
        #[arg(long, default_value = "k", value_parser = parse_config)]
        config: Config,
        #[arg(long = "max-inst", default_value_t = 10_000)]
        max_inst: u64,
        /// bitblast, enum, or external:CMD
        #[arg(long, default_value = "bitblast")]
        backend: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print statistics as key=value lines on stderr.
        #[arg(long)]
        stats: bool,
        #[arg(long = "print-model")]
        print_model: bool,
    },
    /// Check catalog conditions exhaustively.
    VerifyIc {
        #[arg(long = "width-min", default_value_t = 1)]
        width_min: u32,
        #[arg(long = "width-max", default_value_t = 6)]
        width_max: u32,
        /// A single row as OP:SIDE:REL, e.g. udiv:right:ne.
        #[arg(long)]
        entry: Option<String>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Write one SMT-LIB equivalence query per catalog row.
    EmitVerify {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 32)]
        width: u32,
    },
    /// Write SyGuS synthesis problems for the condition grid.
    EmitSygus {
        #[arg(long, value_enum)]
        grammar: GrammarArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        width: u32,
    },
    /// Print every catalog row with its condition.
    DumpCatalog {
        #[arg(long, default_value_t = 8)]
        width: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Records,
}

#[derive(Clone, Copy, ValueEnum)]
enum GrammarArg {
    R,
    G,
}

fn parse_config(s: &str) -> Result<Config, String> {
    s.parse()
}

fn parse_backend(s: &str, seed: u64) -> Result<GroundSolver, String> {
    match s {
        "bitblast" => Ok(GroundSolver::Bitblast(SatConfig { seed, ..SatConfig::default() })),
        "enum" => Ok(GroundSolver::Enumerate { max_bits: DEFAULT_ENUM_BITS }),
        _ => match s.strip_prefix("external:") {
            Some(cmd) if !cmd.trim().is_empty() => {
                Ok(GroundSolver::External { command: cmd.split_whitespace().map(str::to_string).collect() })
            }
            _ => Err(format!("unknown backend `{s}` (expected bitblast, enum or external:CMD)")),
        },
    }
}

fn width_arg(w: u32) -> Result<Width, String> {
    Width::new(w).map_err(|e| e.to_string())
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Solve { file, config, max_inst, backend, seed, stats, print_model } => {
            let backend = match parse_backend(&backend, seed) {
                Ok(b) => b,
                Err(e) => return usage_error(e),
            };
            let opts = CegqiOptions { config, max_instantiations: max_inst, backend, ..Default::default() };
            cmd_solve(&file, &opts, stats, print_model)
        }
        Cmd::VerifyIc { width_min, width_max, entry, jobs, format } => {
            cmd_verify(width_min, width_max, entry, jobs, format)
        }
        Cmd::EmitVerify { out, width } => cmd_emit_verify(&out, width),
        Cmd::EmitSygus { grammar, out, width } => {
            let g = match grammar {
                GrammarArg::R => Grammar::R,
                GrammarArg::G => Grammar::G,
            };
            cmd_emit_sygus(&out, g, width)
        }
        Cmd::DumpCatalog { width } => cmd_dump_catalog(width),
    }
}

fn cmd_solve(file: &Path, opts: &CegqiOptions, stats: bool, print_model: bool) -> ExitCode {
    let text = match fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return usage_error(format!("{}: {e}", file.display())),
    };
    let mut tm = TermManager::new();
    let script = match parse_script(&mut tm, &text) {
        Ok(s) => s,
        Err(e) => return usage_error(format!("{}:{e}", file.display())),
    };
    let start = Instant::now();
    let out = match solve_assertions(&mut tm, &script.assertions, opts) {
        Ok(o) => o,
        Err(e) => return usage_error(format!("{}: {e}", file.display())),
    };
    println!("{}", out.verdict.name());
    if print_model {
        if let Verdict::Sat(m) = &out.verdict {
            let p = SmtPrinter::new(&tm);
            for &v in &script.declarations {
                let sort = tm.var_sort(v);
                let val = match (m.get(v), sort) {
                    (Some(Value::Bool(b)), _) => b.to_string(),
                    (Some(Value::Bv(c)), _) => c.to_string(),
                    (None, Sort::Bool) => "false".into(),
                    (None, Sort::Bv(w)) => BitVec::zero(w).to_string(),
                };
                println!("(define-fun {} () {} {})", p.var(v), sort, val);
            }
        }
    }
    if stats {
        let s = out.stats;
        eprintln!("config={}", opts.config);
        eprintln!("backend={}", opts.backend);
        eprintln!("rounds={}", s.rounds);
        eprintln!("instantiations={}", s.instantiations);
        eprintln!("duplicates={}", s.duplicates);
        eprintln!("model_fallbacks={}", s.model_fallbacks);
        eprintln!("choices={}", s.choices);
        eprintln!("ground_checks={}", s.ground_checks);
        eprintln!("time_ms={}", start.elapsed().as_millis());
        if let Verdict::ResourceOut(why) = &out.verdict {
            eprintln!("reason={why}");
        }
    }
    match out.verdict {
        Verdict::Sat(_) | Verdict::Unsat => ExitCode::SUCCESS,
        Verdict::ResourceOut(_) => ExitCode::from(1),
    }
}

fn status_name(s: &Status) -> &'static str {
    match s {
        Status::Verified => "verified",
        Status::Refuted(_) => "refuted",
        Status::Skipped(_) => "skipped",
    }
}

fn record(r: &VerificationReport) -> serde_json::Value {
    let cex = match &r.status {
        Status::Refuted(c) => json!({
            "s": c.s.map(|v| v.to_string()),
            "t": c.t.to_string(),
            "condition": c.condition,
            "exists": c.exists,
            "shape": c.shape,
        }),
        _ => serde_json::Value::Null,
    };
    let mut v = json!({
        "entry": r.key.to_string(),
        "width": r.width.bits(),
        "status": status_name(&r.status),
        "counterexample": cex,
    });
    if let Status::Skipped(why) = &r.status {
        v["reason"] = json!(why);
    }
    v
}

fn print_reports(summary: &VerificationSummary, format: Format) -> io::Result<()> {
    let mut out = io::stdout().lock();
    match format {
        Format::Records => {
            for r in &summary.reports {
                writeln!(out, "{}", record(r))?;
            }
        }
        Format::Table => {
            writeln!(out, "{:>5}  {:>8}  {:>7}  {:>7}", "width", "verified", "refuted", "skipped")?;
            for (w, t) in summary.per_width() {
                writeln!(out, "{:>5}  {:>8}  {:>7}  {:>7}", w.bits(), t.verified, t.refuted, t.skipped)?;
            }
            for r in &summary.reports {
                match &r.status {
                    Status::Refuted(c) => writeln!(out, "refuted {} at width {}: {c:?}", r.key, r.width)?,
                    Status::Skipped(why) => writeln!(out, "skipped {} at width {}: {why}", r.key, r.width)?,
                    Status::Verified => {}
                }
            }
        }
    }
    Ok(())
}

fn cmd_verify(width_min: u32, width_max: u32, entry: Option<String>, jobs: Option<usize>, format: Format) -> ExitCode {
    if let Err(e) = width_arg(width_min).and(width_arg(width_max)) {
        return usage_error(e);
    }
    if width_min > width_max {
        return usage_error("--width-min exceeds --width-max");
    }
    let keys: Vec<IcKey> = match entry {
        Some(e) => match e.parse() {
            Ok(k) => vec![k],
            Err(err) => return usage_error(err),
        },
        None => catalog_entries(),
    };
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let start = Instant::now();
    let summary = verify_keys(&keys, width_min..=width_max, jobs);
    let elapsed = start.elapsed();
    // a closed pipe only truncates the listing
    let _ = print_reports(&summary, format);
    eprintln!(
        "rows={} checks={} verified={} refuted={} skipped={} time_ms={}",
        keys.len(),
        summary.reports.len(),
        summary.verified(),
        summary.refuted(),
        summary.skipped(),
        elapsed.as_millis()
    );
    if summary.refuted() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn file_stem(key: IcKey) -> String {
    key.to_string().replace(':', "_")
}

fn cmd_emit_verify(out: &Path, width: u32) -> ExitCode {
    let w = match width_arg(width) {
        Ok(w) => w,
        Err(e) => return usage_error(e),
    };
    if let Err(e) = fs::create_dir_all(out) {
        return usage_error(format!("{}: {e}", out.display()));
    }
    let mut written = 0;
    for key in catalog_entries() {
        let text = match emit_verification_smt2(key, w) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("skipping {key}: {e}");
                continue;
            }
        };
        let path = out.join(format!("{}_w{}.smt2", file_stem(key), width));
        if let Err(e) = fs::write(&path, text) {
            return usage_error(format!("{}: {e}", path.display()));
        }
        written += 1;
    }
    eprintln!("written={written}");
    ExitCode::SUCCESS
}

fn cmd_emit_sygus(out: &Path, grammar: Grammar, width: u32) -> ExitCode {
    let w = match width_arg(width) {
        Ok(w) => w,
        Err(e) => return usage_error(e),
    };
    if let Err(e) = fs::create_dir_all(out) {
        return usage_error(format!("{}: {e}", out.display()));
    }
    let keys = sygus_keys();
    for &key in &keys {
        let path = out.join(format!("{}.sl", file_stem(key)));
        if let Err(e) = fs::write(&path, emit_sygus(key, grammar, w)) {
            return usage_error(format!("{}: {e}", path.display()));
        }
    }
    eprintln!("written={}", keys.len());
    ExitCode::SUCCESS
}

fn cmd_dump_catalog(width: u32) -> ExitCode {
    let w = match width_arg(width) {
        Ok(w) => w,
        Err(e) => return usage_error(e),
    };
    let cat = Catalog::default();
    let mut out = io::stdout().lock();
    for key in catalog_entries() {
        let mut tm = TermManager::new();
        let t = tm.new_var("t", Sort::Bv(w));
        let tt = tm.var(t);
        let s = match key.side {
            Side::Unary => None,
            _ => {
                let s = tm.new_var("s", Sort::Bv(w));
                Some(tm.var(s))
            }
        };
        let line = match cat.condition(&mut tm, key, s, tt) {
            Ok(c) => writeln!(out, "{key}\t{}", tm.display(c)),
            Err(e) => writeln!(out, "{key}\t; {e}"),
        };
        if line.is_err() {
            break;
        }
    }
    ExitCode::SUCCESS
}
