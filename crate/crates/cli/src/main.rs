//! `aggrelab`: command-line front end for the aggregation toolkit.
//!
//! Verdicts print `YES` or `NO` and exit 0 or 1. Usage errors exit 2 and
//! unreadable or malformed input exits 3.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aggrelab_core::ballistic::{
    bd_predict, bead_sort, certificate_for, parse_digraph, parse_graph, parse_layered, parse_sequence, parse_site,
    reduce_exact_to_layered, reduce_ldereach_to_bd,
};
use aggrelab_core::circuits::{check_compiled, compile_to_2dla, parse_assignment, parse_circuit, read_probes};
use aggrelab_core::oracle::{oracle_check_with, Budget, Execution, OracleKind};
use aggrelab_core::realize1::{brute_force_realizable_1d, construct_sequence_1d, realizable_1d};
use aggrelab_core::realize2::{brute_force_realizable, construct_realization_2d, realizable_2d};
use aggrelab_core::{
    pad_figure, parse_script, predict, random_script, read_figure, render_figure, run_script, Cell, DirectionSet,
    Figure, RenderFormat,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aggrelab", version, about = "Directionally biased DLA and ballistic deposition")]
struct Cli {
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a throw script and print the resulting figure.
    Simulate {
        #[arg(long, conflicts_with = "random")]
        script: Option<PathBuf>,
        /// Generate a script instead: "N M L".
        #[arg(long, required_unless_present = "script")]
        random: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        k: u8,
        #[arg(long, value_enum, default_value_t = Format::Ascii)]
        format: Format,
        /// Print the generated script instead of the figure.
        #[arg(long, requires = "random")]
        emit_script: bool,
    },
    /// Decide whether a site is occupied after a throw script.
    Predict {
        #[arg(long)]
        script: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: u8,
        /// "height col", or "row col" with --row-convention.
        #[arg(long, allow_hyphen_values = true)]
        site: String,
        #[arg(long)]
        row_convention: bool,
    },
    /// Decide whether a ballistic deposition site is occupied.
    BdPredict {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        seq: PathBuf,
        /// "height vertex".
        #[arg(long)]
        site: String,
        /// Also print a certificate chain "vertex num pos weight" per line.
        #[arg(long)]
        certificate: bool,
    },
    /// Sort positive integers decreasingly with falling beads.
    BeadSort {
        #[arg(required = true, num_args = 1.., allow_negative_numbers = true)]
        values: Vec<i64>,
    },
    /// Decide whether a figure can be built with k directions.
    Realize {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        k: u8,
        #[arg(long)]
        figure: PathBuf,
        /// Lattice size; inferred from the file when absent.
        #[arg(long)]
        n: Option<usize>,
        /// With k=1, print a drop sequence that builds the figure.
        #[arg(long)]
        emit_sequence: bool,
        /// With k=2, print a placement order as "row col" lines.
        #[arg(long)]
        emit_order: bool,
        /// Decide by exhaustive search instead.
        #[arg(long)]
        oracle: bool,
    },
    /// Compile a NOR circuit into a 2-direction throw script.
    CompileCircuit {
        #[arg(long)]
        circuit: PathBuf,
        /// "a=1,b=0".
        #[arg(long)]
        assign: String,
        #[arg(long)]
        emit_script: bool,
        /// Simulate the script and compare every probe with the evaluator.
        #[arg(long)]
        check: bool,
    },
    /// Run one of the reductions.
    #[command(subcommand)]
    Reduce(Reduction),
    /// Compare a decider with its brute-force oracle.
    OracleCheck {
        #[arg(long)]
        kind: String,
        /// Number of random instances on top of the exhaustive part.
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        sequential: bool,
    },
    /// Render a figure file as text or PBM.
    Render {
        #[arg(long)]
        figure: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Ascii)]
        format: Format,
        #[arg(long, default_value_t = 0)]
        pad: usize,
    },
}

#[derive(Subcommand)]
enum Reduction {
    /// Exact-length path in a digraph to layered reachability.
    Exact {
        #[arg(long)]
        digraph: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long)]
        k: usize,
    },
    /// Layered reachability to ballistic deposition prediction.
    Ldereach {
        #[arg(long)]
        instance: PathBuf,
        /// Answer the produced instance instead of printing it.
        #[arg(long)]
        predict: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Ascii,
    Pbm,
}

impl From<Format> for RenderFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Ascii => RenderFormat::Ascii,
            Format::Pbm => RenderFormat::Pbm,
        }
    }
}

enum Failure {
    Usage(String),
    Input(String),
}

fn input<E: Display>(what: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{what}: {e}"))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn dirs(k: u8) -> Result<DirectionSet, Failure> {
    DirectionSet::new(k).map_err(|e| Failure::Usage(e.to_string()))
}

fn numbers(text: &str, what: &str) -> Result<Vec<usize>, Failure> {
    text.split_whitespace().map(|t| t.parse().map_err(input(what))).collect()
}

/// What a command produces: a verdict line, a block of output, or a report
/// whose exit code says whether it is clean.
enum Output {
    Verdict(bool, String),
    Text(Vec<u8>),
    Report(bool, String),
}

fn verdict(yes: bool) -> Output {
    Output::Verdict(yes, String::new())
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    Ok(match &cli.command {
        Command::Simulate { script, random, seed, k, format, emit_script } => {
            let dirs = dirs(*k)?;
            let script = match (script, random) {
                (Some(path), _) => parse_script(&read(path)?).map_err(input("script"))?,
                (None, Some(dims)) => {
                    let [n, m, l] = numbers(dims, "--random")?[..] else {
                        return Err(Failure::Usage("--random needs \"N M L\"".into()));
                    };
                    if n == 0 {
                        return Err(Failure::Usage("--random needs N >= 1".into()));
                    }
                    random_script(n, m, l, dirs, *seed)
                }
                (None, None) => return Err(Failure::Usage("give --script or --random".into())),
            };
            if *emit_script {
                Output::Text(script.to_string().into_bytes())
            } else {
                let fig = run_script(&script, dirs).map_err(input("script"))?;
                Output::Text(render_figure(&fig, (*format).into()))
            }
        }
        Command::Predict { script, k, site, row_convention } => {
            let script = parse_script(&read(script)?).map_err(input("script"))?;
            let n = script.n_size;
            let [a, col] = numbers(site, "site")?[..] else {
                return Err(Failure::Input(format!("site needs two numbers, got {site:?}")));
            };
            let cell = if *row_convention {
                Cell::new(a, col)
            } else if (1..=n).contains(&a) {
                Cell::from_height(n, a, col)
            } else {
                return Err(Failure::Input(format!("height {a} is outside 1..={n}")));
            };
            verdict(predict(&script, dirs(*k)?, cell).map_err(input("predict"))?)
        }
        Command::BdPredict { graph, seq, site, certificate } => {
            let g = parse_graph(&read(graph)?).map_err(input("graph"))?;
            let s = parse_sequence(&read(seq)?).map_err(input("sequence"))?;
            let site = parse_site(site).map_err(input("site"))?;
            let yes = bd_predict(&g, &s, site).map_err(input("bd-predict"))?;
            let mut extra = String::new();
            if *certificate {
                for link in certificate_for(&g, &s, site).map_err(input("bd-predict"))?.unwrap_or_default() {
                    let p = link.particle;
                    extra.push_str(&format!("{} {} {} {}\n", p.vertex, p.num, p.pos, link.weight));
                }
            }
            Output::Verdict(yes, extra)
        }
        Command::BeadSort { values } => {
            let sorted = bead_sort(values).map_err(input("values"))?;
            let words: Vec<String> = sorted.iter().map(i64::to_string).collect();
            Output::Text(format!("{}\n", words.join(" ")).into_bytes())
        }
        Command::Realize { k, figure, n, emit_sequence, emit_order, oracle } => {
            let fig = read_figure(&read(figure)?, *n).map_err(input("figure"))?;
            realize(&fig, *k, *emit_sequence, *emit_order, *oracle)?
        }
        Command::CompileCircuit { circuit, assign, emit_script, check } => {
            let c = parse_circuit(&read(circuit)?).map_err(input("circuit"))?;
            let asg = parse_assignment(assign, &c).map_err(input("assignment"))?;
            if *check {
                return Ok(verdict(check_compiled(&c, &asg).map_err(input("compile"))?));
            }
            let compiled = compile_to_2dla(&c, &asg).map_err(input("compile"))?;
            if *emit_script {
                Output::Text(compiled.script.to_string().into_bytes())
            } else {
                let fig = run_script(&compiled.script, dirs(2)?).map_err(input("compile"))?;
                let values = read_probes(&compiled, &fig);
                let mut text = String::new();
                for (name, cell) in &compiled.probes {
                    text.push_str(&format!("{name} {} {} {}\n", cell.row, cell.col, u8::from(values[name])));
                }
                Output::Text(text.into_bytes())
            }
        }
        Command::Reduce(Reduction::Exact { digraph, from, to, k }) => {
            let g = parse_digraph(&read(digraph)?).map_err(input("digraph"))?;
            let inst = reduce_exact_to_layered(&g, *from, *to, *k).map_err(input("reduce"))?;
            Output::Text(inst.to_string().into_bytes())
        }
        Command::Reduce(Reduction::Ldereach { instance, predict }) => {
            let inst = parse_layered(&read(instance)?).map_err(input("instance"))?;
            let (g, s, site) = reduce_ldereach_to_bd(&inst).map_err(input("reduce"))?;
            if *predict {
                verdict(bd_predict(&g, &s, site).map_err(input("reduce"))?)
            } else {
                Output::Text(format!("# graph\n{g}# sequence\n{s}\n# site\n{} {}\n", site.height, site.vertex).into_bytes())
            }
        }
        Command::OracleCheck { kind, budget, seed, sequential } => {
            let kind: OracleKind = kind.parse().map_err(Failure::Usage)?;
            let exec = if *sequential { Execution::Sequential } else { Execution::default() };
            let report = oracle_check_with(kind, Budget { instances: *budget, seed: *seed }, exec);
            eprintln!("wall time {:.3}s", report.elapsed.as_secs_f64());
            let mut text = format!("{}: {} instances, {} mismatches\n", kind.name(), report.instances, report.mismatches);
            for s in &report.samples {
                text.push_str(&format!("  {}\n", s.replace('\n', "\n  ")));
            }
            Output::Report(report.mismatches == 0, text)
        }
        Command::Render { figure, n, format, pad } => {
            let fig = read_figure(&read(figure)?, *n).map_err(input("figure"))?;
            Output::Text(render_figure(&pad_figure(&fig, *pad), (*format).into()))
        }
    })
}

fn realize(fig: &Figure, k: u8, emit_sequence: bool, emit_order: bool, oracle: bool) -> Result<Output, Failure> {
    if (emit_sequence && k != 1) || (emit_order && k != 2) {
        return Err(Failure::Usage("--emit-sequence needs --k 1 and --emit-order needs --k 2".into()));
    }
    let yes = match (k, oracle) {
        (1, false) => realizable_1d(fig),
        (1, true) => brute_force_realizable_1d(fig, 25).map_err(input("oracle"))?,
        (_, false) => realizable_2d(fig),
        (_, true) => brute_force_realizable(fig).map_err(input("oracle"))?,
    };
    let mut extra = String::new();
    if yes && emit_sequence {
        extra = format!("{}\n", construct_sequence_1d(fig).map_err(input("realize"))?);
    }
    if yes && emit_order {
        for c in construct_realization_2d(fig).map_err(input("realize"))?.order {
            extra.push_str(&format!("{} {}\n", c.row, c.col));
        }
    }
    Ok(Output::Verdict(yes, extra))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| Failure::Input(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = run(&cli).and_then(|output| match output {
        Output::Verdict(yes, extra) => {
            println!("{}", if yes { "YES" } else { "NO" });
            if !extra.is_empty() {
                emit(cli.out.as_deref(), extra.as_bytes())?;
            }
            Ok(if yes { 0 } else { 1 })
        }
        Output::Text(bytes) => emit(cli.out.as_deref(), &bytes).map(|_| 0),
        Output::Report(clean, text) => emit(cli.out.as_deref(), text.as_bytes()).map(|_| if clean { 0 } else { 1 }),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(3)
        }
    }
}
