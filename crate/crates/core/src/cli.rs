//! Command-line front end. `run` maps argv onto the library and renders
//! JSON (single results) or CSV (tables).

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytic::{
    closed_form_equilibrium, conditional_evs, expected_payoff, taxonomy_table,
};
use crate::engine::{CardModel, GameConfig};
use crate::error::Error;
use crate::montecarlo::{
    brute_force_discrete, convergence_report, simulate_with, MCEstimate, SimulationOptions,
    DEFAULT_CHUNK_SIZE,
};
use crate::solver::{best_response, exploitability, fictitious_play, ratio_sweep};
use crate::strategy::{NamedStrategy, Strategy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "bluffsolve",
    version,
    about = "Payoffs, best responses and equilibria of a one-round high/low sealed-bid poker game"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact expected payoff of s1 against s2.
    Payoff {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Conditional values of betting High and Low on a grid of own cards.
    Evs {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        strategy: SingleArgs,
        /// Number of evenly spaced card values in [0, 1].
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Best pure response to a strategy and its value.
    BestResponse {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        strategy: SingleArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exploitability (best-response value) of a strategy.
    Exploit {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        strategy: SingleArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fictitious play over uniformly binned strategies.
    Solve {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        solve: SolveArgs,
        /// Write the solved strategy to this file.
        #[arg(long)]
        dump_strategy: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Closed-form equilibrium and a solver check for each bet ratio.
    Sweep {
        /// Comma-separated a/b values, each above 1.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        ratios: Vec<f64>,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seeded Monte Carlo estimate of s1's payoff against s2.
    Simulate {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 1_000_000)]
        hands: u64,
        /// Comma-separated hand counts; emits one row per count.
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<u64>>,
        #[arg(long, env = "BLUFFSOLVE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
        chunk_size: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact value over a finite deck (requires --deck M).
    BruteForce {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Payoff table between always-High, always-Low and the 0.5 threshold.
    Taxonomy {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Closed-form equilibrium threshold and bluffing probability.
    Equilibrium {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct GameArgs {
    /// High bet.
    #[arg(long, conflicts_with = "ratio")]
    a: Option<f64>,
    /// Low bet.
    #[arg(long, conflicts_with = "ratio")]
    b: Option<f64>,
    /// Bet ratio a/b, with b = 1.
    #[arg(long)]
    ratio: Option<f64>,
    /// `continuous` or a card count M >= 2.
    #[arg(long, default_value = "continuous")]
    deck: String,
}

impl GameArgs {
    fn config(&self) -> Result<GameConfig, CliError> {
        let (a, b) = match self.ratio {
            Some(r) => (r, 1.0),
            None => (self.a.unwrap_or(2.0), self.b.unwrap_or(1.0)),
        };
        let model = match self.deck.as_str() {
            "continuous" => CardModel::Continuous,
            m => CardModel::Discrete {
                cards: m.parse().map_err(|_| {
                    CliError::Usage(format!(
                        "--deck expects `continuous` or a card count, got `{m}`"
                    ))
                })?,
            },
        };
        Ok(GameConfig::new(a, b, model)?)
    }
}

#[derive(Debug, Args)]
struct SingleArgs {
    /// Inline strategy: a-type, b-type, m-det:T or threshold:T:P.
    #[arg(long = "s", visible_alias = "opponent", conflicts_with = "strategy_file")]
    inline: Option<String>,
    /// Strategy file ({"breakpoints": [...], "high_prob": [...]}).
    #[arg(long)]
    strategy_file: Option<PathBuf>,
    /// Write the resolved input strategy to this file.
    #[arg(long)]
    dump_strategy: Option<PathBuf>,
}

impl SingleArgs {
    fn resolve(&self) -> Result<Strategy, CliError> {
        let s = load_strategy(
            self.inline.as_deref(),
            self.strategy_file.as_deref(),
            "--s/--opponent or --strategy-file",
        )?;
        if let Some(path) = &self.dump_strategy {
            dump_strategy(path, &s)?;
        }
        Ok(s)
    }
}

#[derive(Debug, Args)]
struct PairArgs {
    #[arg(long, conflicts_with = "s1_file")]
    s1: Option<String>,
    #[arg(long, conflicts_with = "s2_file")]
    s2: Option<String>,
    #[arg(long)]
    s1_file: Option<PathBuf>,
    #[arg(long)]
    s2_file: Option<PathBuf>,
}

impl PairArgs {
    fn resolve(&self) -> Result<(Strategy, Strategy), CliError> {
        Ok((
            load_strategy(self.s1.as_deref(), self.s1_file.as_deref(), "--s1 or --s1-file")?,
            load_strategy(self.s2.as_deref(), self.s2_file.as_deref(), "--s2 or --s2-file")?,
        ))
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, default_value_t = 200)]
    bins: usize,
    /// Target exploitability in units of b (default 1e-3).
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 200_000)]
    max_iters: u64,
    /// Exit with status 1 when the target is not reached.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Compute(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ReplayLimit(_) | Error::DegenerateReplay => CliError::Compute(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn load_strategy(
    inline: Option<&str>,
    file: Option<&Path>,
    what: &str,
) -> Result<Strategy, CliError> {
    match (inline, file) {
        (Some(text), None) => Ok(text.parse::<NamedStrategy>()?.to_strategy()?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read strategy file {}: {e}", path.display()))
            })?;
            Strategy::from_json(&text).map_err(|e| {
                CliError::Usage(format!("{}: {e}", path.display()))
            })
        }
        _ => Err(CliError::Usage(format!("exactly one of {what} is required"))),
    }
}

fn dump_strategy(path: &Path, s: &Strategy) -> Result<(), CliError> {
    std::fs::write(path, s.to_json() + "\n").map_err(|e| {
        CliError::Compute(format!("cannot write strategy to {}: {e}", path.display()))
    })
}

/// Shortest representation that parses back to the same f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
        }
    }

    fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report serializes") + "\n"
}

fn estimate_row(e: &MCEstimate) -> Vec<String> {
    vec![
        e.hands.to_string(),
        fmt_float(e.mean),
        fmt_float(e.std_error),
        fmt_float(e.replay_rate),
        e.seed.to_string(),
    ]
}

const ESTIMATE_HEADER: [&str; 5] = ["hands", "mean", "std_err", "replay_rate", "seed"];

struct Report {
    text: String,
    /// Set when the run produced output but missed a `--strict` target.
    failure: Option<String>,
}

impl From<String> for Report {
    fn from(text: String) -> Self {
        Report {
            text,
            failure: None,
        }
    }
}

fn execute(command: Command) -> Result<(Report, Option<PathBuf>), CliError> {
    match command {
        Command::Payoff { game, pair, output } => {
            let cfg = game.config()?;
            let (s1, s2) = pair.resolve()?;
            let v = expected_payoff(&cfg, &s1, &s2)?;
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => json(&v),
                Format::Csv => {
                    let mut csv = Csv::new(&["value", "hh", "hl", "lh", "ll"]);
                    csv.row(&[v.value, v.hh, v.hl, v.lh, v.ll].map(fmt_float));
                    csv.text
                }
            };
            Ok((text.into(), output.out))
        }
        Command::Evs {
            game,
            strategy,
            grid,
            output,
        } => {
            let cfg = game.config()?;
            let opponent = strategy.resolve()?;
            if grid < 2 {
                return Err(CliError::Usage("--grid must be at least 2".into()));
            }
            let evs = conditional_evs(&cfg, &opponent)?;
            let rows: Vec<[f64; 3]> = (0..grid)
                .map(|i| {
                    let v = i as f64 / (grid - 1) as f64;
                    [v, evs.ev_high.eval(v), evs.ev_low.eval(v)]
                })
                .collect();
            let text = match output.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut csv = Csv::new(&["v", "ev_high", "ev_low"]);
                    rows.iter().for_each(|r| csv.row(&r.map(fmt_float)));
                    csv.text
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Row {
                        v: f64,
                        ev_high: f64,
                        ev_low: f64,
                    }
                    let rows: Vec<Row> = rows
                        .iter()
                        .map(|&[v, ev_high, ev_low]| Row { v, ev_high, ev_low })
                        .collect();
                    json(&rows)
                }
            };
            Ok((text.into(), output.out))
        }
        Command::BestResponse {
            game,
            strategy,
            output,
        } => {
            let cfg = game.config()?;
            let br = best_response(&cfg, &strategy.resolve()?)?;
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => json(&br),
                Format::Csv => pieces_csv(&br.action_rule),
            };
            Ok((text.into(), output.out))
        }
        Command::Exploit {
            game,
            strategy,
            output,
        } => {
            let cfg = game.config()?;
            let value = exploitability(&cfg, &strategy.resolve()?)?;
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out {
                        value: f64,
                    }
                    json(&Out { value })
                }
                Format::Csv => {
                    let mut csv = Csv::new(&["value"]);
                    csv.row(&[fmt_float(value)]);
                    csv.text
                }
            };
            Ok((text.into(), output.out))
        }
        Command::Solve {
            game,
            solve,
            dump_strategy: dump,
            output,
        } => {
            let cfg = game.config()?;
            let epsilon = solve.epsilon * cfg.low_bet();
            let r = fictitious_play(&cfg, solve.bins, epsilon, solve.max_iters)?;
            if let Some(path) = &dump {
                dump_strategy(path, &r.strategy)?;
            }
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out<'a> {
                        #[serde(flatten)]
                        result: &'a crate::solver::EquilibriumResult,
                        threshold: f64,
                        mean_below_threshold: f64,
                    }
                    let summary = r.threshold_summary();
                    json(&Out {
                        result: &r,
                        threshold: summary.threshold,
                        mean_below_threshold: summary.mean_below,
                    })
                }
                Format::Csv => pieces_csv(&r.strategy),
            };
            let failure = (solve.strict && !r.converged).then(|| {
                format!(
                    "fictitious play stopped at exploitability {} after {} iterations (target {})",
                    fmt_float(r.exploitability),
                    r.iterations,
                    fmt_float(epsilon)
                )
            });
            Ok((Report { text, failure }, output.out))
        }
        Command::Sweep {
            ratios,
            solve,
            output,
        } => {
            let rows = ratio_sweep(&ratios, solve.bins, solve.epsilon, solve.max_iters)?;
            let text = match output.format.unwrap_or(Format::Csv) {
                Format::Json => json(&rows),
                Format::Csv => {
                    let mut csv = Csv::new(&[
                        "ratio",
                        "t_star",
                        "p_star",
                        "exploitability",
                        "iterations",
                    ]);
                    for r in &rows {
                        csv.row(&[
                            fmt_float(r.ratio),
                            fmt_float(r.t_star),
                            fmt_float(r.p_star),
                            fmt_float(r.exploitability),
                            r.iterations.to_string(),
                        ]);
                    }
                    csv.text
                }
            };
            let unconverged: Vec<String> = rows
                .iter()
                .filter(|r| !r.converged)
                .map(|r| fmt_float(r.ratio))
                .collect();
            let failure = (solve.strict && !unconverged.is_empty()).then(|| {
                format!(
                    "fictitious play missed the target for ratio(s) {}",
                    unconverged.join(", ")
                )
            });
            Ok((Report { text, failure }, output.out))
        }
        Command::Simulate {
            game,
            pair,
            hands,
            schedule,
            seed,
            chunk_size,
            output,
        } => {
            let cfg = game.config()?;
            let (s1, s2) = pair.resolve()?;
            let text = match schedule {
                Some(schedule) => {
                    if schedule.is_empty() {
                        return Err(CliError::Usage("--schedule is empty".into()));
                    }
                    let rows = convergence_report(&cfg, &s1, &s2, &schedule, seed)?;
                    match output.format.unwrap_or(Format::Csv) {
                        Format::Json => json(&rows),
                        Format::Csv => {
                            let mut csv = Csv::new(&ESTIMATE_HEADER);
                            rows.iter().for_each(|e| csv.row(&estimate_row(e)));
                            csv.text
                        }
                    }
                }
                None => {
                    let opts = SimulationOptions {
                        chunk_size,
                        mirrored: false,
                    };
                    let e = simulate_with(&cfg, &s1, &s2, hands, seed, &opts)?;
                    match output.format.unwrap_or(Format::Json) {
                        Format::Json => json(&e),
                        Format::Csv => {
                            let mut csv = Csv::new(&ESTIMATE_HEADER);
                            csv.row(&estimate_row(&e));
                            csv.text
                        }
                    }
                }
            };
            Ok((text.into(), output.out))
        }
        Command::BruteForce { game, pair, output } => {
            let cfg = game.config()?;
            let (s1, s2) = pair.resolve()?;
            let r = brute_force_discrete(&cfg, &s1, &s2)?;
            #[derive(Serialize)]
            struct Out {
                value: f64,
                value_exact: String,
                replay_probability: f64,
                replay_probability_exact: String,
            }
            let out = Out {
                value: r.value_f64(),
                value_exact: r.value.to_string(),
                replay_probability: r.replay_probability_f64(),
                replay_probability_exact: r.replay_probability.to_string(),
            };
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => json(&out),
                Format::Csv => {
                    let mut csv = Csv::new(&[
                        "value",
                        "value_exact",
                        "replay_probability",
                        "replay_probability_exact",
                    ]);
                    csv.row(&[
                        fmt_float(out.value),
                        out.value_exact,
                        fmt_float(out.replay_probability),
                        out.replay_probability_exact,
                    ]);
                    csv.text
                }
            };
            Ok((text.into(), output.out))
        }
        Command::Taxonomy { game, output } => {
            let cfg = game.config()?;
            let table = taxonomy_table(&cfg)?;
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out {
                        labels: [&'static str; 3],
                        values: [[f64; 3]; 3],
                    }
                    json(&Out {
                        labels: table.labels,
                        values: table.entries.map(|row| row.map(|e| e.value)),
                    })
                }
                Format::Csv => {
                    let mut csv = Csv::new(&["row", "column", "value", "hh", "hl", "lh", "ll"]);
                    for (i, row) in table.entries.iter().enumerate() {
                        for (j, e) in row.iter().enumerate() {
                            let mut cells = vec![table.labels[i].into(), table.labels[j].into()];
                            cells.extend([e.value, e.hh, e.hl, e.lh, e.ll].map(fmt_float));
                            csv.row(&cells);
                        }
                    }
                    csv.text
                }
            };
            Ok((text.into(), output.out))
        }
        Command::Equilibrium { game, output } => {
            let eq = closed_form_equilibrium(&game.config()?)?;
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => json(&eq),
                Format::Csv => {
                    let mut csv = Csv::new(&["t_star", "p_star"]);
                    csv.row(&[fmt_float(eq.t_star), fmt_float(eq.p_star)]);
                    csv.text
                }
            };
            Ok((text.into(), output.out))
        }
    }
}

fn pieces_csv(s: &Strategy) -> String {
    let mut csv = Csv::new(&["lo", "hi", "high_prob"]);
    for p in s.pieces() {
        csv.row(&[p.lo, p.hi, p.high_prob].map(fmt_float));
    }
    csv.text
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit status: 0 success, 1 computation failure,
/// 2 usage error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let sink: &mut dyn Write = if informational { stdout } else { stderr };
            let _ = write!(sink, "{}", e.render());
            return if informational { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let (report, out) = match execute(cli.command) {
        Ok(r) => r,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
        Err(CliError::Compute(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_COMPUTE;
        }
    };
    let written = match &out {
        Some(path) => std::fs::write(path, &report.text),
        None => stdout.write_all(report.text.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_COMPUTE;
    }
    match report.failure {
        Some(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_COMPUTE
        }
        None => EXIT_OK,
    }
}
