//! Command-line front end: decision, oracle, synthesis, verification,
//! interactive play, generation, and cross-validation.

pub mod fixtures;
pub mod play;
pub mod xcheck;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::automata::{AutomatonError, ParityAutomaton};
use crate::delaygame::{self, DelayError};
use crate::monoid::build_profile_automaton;
use crate::paritygame::Player;
use crate::sggame::{self, SgError, StrategyMachine};

/// Exit codes are a stable contract: 0 success / Player O, 2 Player I or a
/// failed verification, 1 usage or input errors, 3 cross-check failures.
pub const EXIT_O: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_I: i32 = 2;
pub const EXIT_XCHECK: i32 = 3;

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Write {
        path: String,
        source: io::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Delay(#[from] DelayError),
    #[error(transparent)]
    Sg(#[from] SgError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser)]
#[command(
    name = "delayg",
    version,
    about = "decide, solve, and synthesize regular games with delayed output"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether Player O wins with some finite constant delay
    Solve { file: PathBuf },
    /// Report the input-block classification behind the decision
    Profile { file: PathBuf },
    /// Solve the game for one fixed delay exactly
    Oracle {
        file: PathBuf,
        /// the constant delay to solve for
        #[arg(long, conflicts_with = "sweep", required_unless_present = "sweep")]
        delay: Option<u64>,
        /// write the winning strategy for Player O as a machine
        #[arg(long, requires = "delay", value_name = "FILE")]
        dump_strategy: Option<PathBuf>,
        /// try delays 0..=MAX and report the least winning one
        #[arg(long, value_name = "MAX")]
        sweep: Option<u64>,
    },
    /// Produce a constant-delay strategy machine for Player O
    Synthesize {
        file: PathBuf,
        /// output path for the machine text (stdout when absent)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check a strategy machine against an automaton at a given delay
    Verify {
        file: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        delay: u64,
    },
    /// Play the delay game interactively as Player I
    Play {
        file: PathBuf,
        #[arg(long)]
        delay: u64,
        /// machine file for Player O; defaults to the oracle's strategy
        #[arg(long)]
        strategy: Option<PathBuf>,
    },
    /// Generate a random automaton on stdout
    Gen {
        #[arg(long)]
        states: usize,
        #[arg(long)]
        colors: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cross-validate the solvers on random instances
    Xcheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        max_states: usize,
        #[arg(long, default_value_t = 4)]
        max_delay: u64,
        #[arg(long, default_value_t = 6)]
        nprime_cap: usize,
    },
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli.command, &mut out) {
        Ok(code) => code,
        // Quietly adopt the conventional SIGPIPE exit status when the
        // consumer of our output goes away (e.g. `delayg profile x | head`).
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 141,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Solve { file } => cmd_solve(&file, out),
        Command::Profile { file } => cmd_profile(&file, out),
        Command::Oracle {
            file,
            delay,
            dump_strategy,
            sweep,
        } => cmd_oracle(&file, delay, dump_strategy.as_deref(), sweep, out),
        Command::Synthesize { file, out: target } => cmd_synthesize(&file, target.as_deref(), out),
        Command::Verify {
            file,
            strategy,
            delay,
        } => cmd_verify(&file, &strategy, delay, out),
        Command::Play {
            file,
            delay,
            strategy,
        } => cmd_play(&file, delay, strategy.as_deref(), out),
        Command::Gen {
            states,
            colors,
            seed,
        } => cmd_gen(states, colors, seed, out),
        Command::Xcheck {
            seed,
            count,
            max_states,
            max_delay,
            nprime_cap,
        } => cmd_xcheck(
            xcheck::XcheckConfig {
                seed,
                count,
                max_states,
                max_delay,
                nprime_cap,
            },
            out,
        ),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn load_automaton(path: &Path) -> Result<ParityAutomaton, CliError> {
    Ok(ParityAutomaton::parse(&read_file(path)?)?)
}

fn load_machine(path: &Path) -> Result<StrategyMachine, CliError> {
    Ok(StrategyMachine::parse(&read_file(path)?)?)
}

fn winner_exit(winner: Player) -> i32 {
    if winner == Player::O {
        EXIT_O
    } else {
        EXIT_I
    }
}

fn cmd_solve(file: &Path, out: &mut dyn Write) -> Result<i32, CliError> {
    let a = load_automaton(file)?;
    let verdict = sggame::decide_finite_delay(&a);
    writeln!(out, "WINNER={}", verdict.winner)?;
    writeln!(out, "NPRIME={}", verdict.n_prime)?;
    writeln!(out, "DPRIME={}", verdict.d_prime)?;
    match verdict.bound {
        Some(bound) => writeln!(out, "BOUND={bound}")?,
        None => writeln!(out, "BOUND=-")?,
    }
    writeln!(out, "MONOID={}", verdict.monoid_size)?;
    let n = a.state_count();
    let m = a.max_color() + 1;
    writeln!(out, "WORSTCASE=2*2^({}^{})-1", m * n, 2 * n)?;
    match verdict.winner {
        Player::O => writeln!(
            out,
            "a continuous (equivalently, uniformly continuous) solution exists; \
             some constant delay up to BOUND wins for player O"
        )?,
        Player::I => writeln!(
            out,
            "no continuous (equivalently, uniformly continuous) solution exists; \
             player I wins at every finite delay"
        )?,
    }
    Ok(winner_exit(verdict.winner))
}

fn cmd_profile(file: &Path, out: &mut dyn Write) -> Result<i32, CliError> {
    let a = load_automaton(file)?;
    let profiles = build_profile_automaton(&a);
    writeln!(out, "MONOID={}", profiles.monoid().len())?;
    writeln!(out, "PROFILES={}", profiles.n_prime() - 1)?;
    writeln!(out, "NPRIME={}", profiles.n_prime())?;
    writeln!(out, "DPRIME={}", profiles.d_prime())?;
    for s in 0..profiles.n_prime() {
        let kind = if s == 0 { "init" } else { "profile" };
        let size = profiles
            .profile(s)
            .map_or_else(|| "-".to_string(), |m| m.len().to_string());
        let finite = if profiles.language_finite(s) { "yes" } else { "no" };
        writeln!(out, "STATE={s} KIND={kind} SIZE={size} FINITE={finite}")?;
    }
    Ok(EXIT_O)
}

fn cmd_oracle(
    file: &Path,
    delay: Option<u64>,
    dump_strategy: Option<&Path>,
    sweep: Option<u64>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let a = load_automaton(file)?;
    if let Some(max) = sweep {
        // winning is monotone in the delay, so the first win is the minimum
        for d in 0..=max {
            let solved = delaygame::solve_fixed_delay(&a, d)?;
            writeln!(out, "DELAY={d} WINNER={}", solved.winner())?;
            if solved.winner() == Player::O {
                writeln!(out, "MINDELAY={d}")?;
                return Ok(EXIT_O);
            }
        }
        writeln!(out, "MINDELAY=-")?;
        return Ok(EXIT_I);
    }
    let d = delay.expect("clap requires --delay without --sweep");
    let solved = delaygame::solve_fixed_delay(&a, d)?;
    writeln!(out, "DELAY={d} WINNER={}", solved.winner())?;
    if let Some(path) = dump_strategy {
        if solved.winner() == Player::O {
            let machine = sggame::machine_from_oracle(&a, &solved)?;
            write_file(path, &machine.to_text())?;
        } else {
            let _ = writeln!(io::stderr(), "no strategy to dump: player I wins at delay {d}");
        }
    }
    Ok(winner_exit(solved.winner()))
}

fn cmd_synthesize(
    file: &Path,
    target: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let a = load_automaton(file)?;
    match sggame::synthesize_constant_delay_strategy(&a) {
        Ok(machine) => {
            match target {
                Some(path) => {
                    write_file(path, &machine.to_text())?;
                    writeln!(out, "DELAY={}", machine.delay())?;
                    writeln!(out, "STATES={}", machine.state_count())?;
                    writeln!(out, "OUT={}", path.display())?;
                }
                None => write!(out, "{}", machine.to_text())?,
            }
            Ok(EXIT_O)
        }
        Err(SgError::Unrealizable) => {
            let _ = writeln!(io::stderr(), "player I wins: no finite-delay strategy exists");
            Ok(EXIT_I)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_verify(
    file: &Path,
    strategy: &Path,
    delay: u64,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let a = load_automaton(file)?;
    let machine = load_machine(strategy)?;
    if sggame::verify_synthesized(&a, &machine, delay)? {
        writeln!(out, "PASS")?;
        Ok(EXIT_O)
    } else {
        writeln!(out, "FAIL")?;
        Ok(EXIT_I)
    }
}

fn cmd_play(
    file: &Path,
    delay: u64,
    strategy: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let a = load_automaton(file)?;
    let machine = match strategy {
        Some(path) => {
            let machine = load_machine(path)?;
            if machine.delay() != delay {
                return Err(SgError::DelayMismatch {
                    machine: machine.delay(),
                    expected: delay,
                }
                .into());
            }
            if machine.input() != a.input() || machine.output() != a.output() {
                return Err(SgError::AlphabetMismatch.into());
            }
            machine
        }
        None => {
            let solved = delaygame::solve_fixed_delay(&a, delay)?;
            if solved.winner() == Player::I {
                let _ = writeln!(
                    io::stderr(),
                    "player I wins at delay {delay}; there is no winning machine to play against"
                );
                return Ok(EXIT_I);
            }
            sggame::machine_from_oracle(&a, &solved)?
        }
    };
    let stdin = io::stdin();
    let mut input = stdin.lock();
    Ok(play::run_session(&a, &machine, &mut input, out)?)
}

fn cmd_gen(states: usize, colors: usize, seed: u64, out: &mut dyn Write) -> Result<i32, CliError> {
    if states == 0 {
        return Err(CliError::Usage("--states must be at least 1".into()));
    }
    if colors == 0 {
        return Err(CliError::Usage("--colors must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    write!(out, "{}", xcheck::gen_dpa(&mut rng, states, colors).to_text())?;
    Ok(EXIT_O)
}

fn cmd_xcheck(config: xcheck::XcheckConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let report = xcheck::run(&config);
    report.write(out)?;
    Ok(if report.ok() { EXIT_O } else { EXIT_XCHECK })
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}
