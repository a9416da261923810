//! Terminal loop for playing the delay game by hand: the human supplies
//! Player I's letters, a strategy machine answers for Player O, and the
//! session can be adjudicated by declaring a cycle over the last rounds.

use std::collections::VecDeque;
use std::io::{self, BufRead, Write};

use crate::automata::{Color, ParityAutomaton, SymbolId};
use crate::delaygame::{DelaySpec, Position, Stepper};
use crate::paritygame::{lasso_winner, Player};
use crate::sggame::{Emission, StrategyMachine};

/// Joint configuration after a completed round; equality of two of these
/// makes the rounds between them a genuine cycle of the play.
#[derive(Clone, PartialEq, Eq)]
struct RoundConfig {
    position: Position,
    machine_state: usize,
    pending: VecDeque<SymbolId>,
}

/// Runs the session until `:quit`, end of input, or a `:loop` adjudication.
/// Returns the process exit code: 0 for a quiet exit or an O verdict, 2 for
/// an I verdict.
pub fn run_session(
    a: &ParityAutomaton,
    machine: &StrategyMachine,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> io::Result<i32> {
    let spec = DelaySpec::fixed_delay(machine.delay());
    let stepper = Stepper::new(a, &spec);
    let mut position = stepper.initial();
    let mut machine_state = machine.initial();
    let mut pending: VecDeque<SymbolId> = VecDeque::new();
    let mut emitted: Vec<Color> = Vec::new();
    let mut configs: Vec<RoundConfig> = Vec::new();

    writeln!(
        out,
        "you are player I (delay {}); enter a letter ({}), ':loop k' to declare \
         the last k rounds a cycle, ':quit' to stop",
        machine.delay(),
        a.input().symbols().join(" ")
    )?;

    let mut round = 0usize;
    loop {
        writeln!(
            out,
            "round {round} | state {} color {} | buffer: {}",
            position.state,
            a.color(position.state),
            render_buffer(a, &position)
        )?;
        while position.appends_left > 0 {
            write!(out, "I> ")?;
            out.flush()?;
            let Some(line) = read_line(input)? else {
                writeln!(out, "end of input; goodbye")?;
                return Ok(0);
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line == ":quit" {
                writeln!(out, "goodbye")?;
                return Ok(0);
            }
            if let Some(rest) = line.strip_prefix(":loop") {
                match close_loop(rest, &configs, &emitted) {
                    Ok(verdict) => {
                        writeln!(out, "VERDICT={verdict}")?;
                        return Ok(if verdict == Player::O { 0 } else { 2 });
                    }
                    Err(msg) => {
                        writeln!(out, "{msg}")?;
                        continue;
                    }
                }
            }
            let Some(letter) = a.input().id_of(line) else {
                writeln!(
                    out,
                    "unknown input letter '{line}'; expected one of: {}",
                    a.input().symbols().join(" ")
                )?;
                continue;
            };
            position = stepper.append(&position, letter);
            let (next_state, emission) = machine.step(machine_state, letter);
            machine_state = next_state;
            if let Emission::Letter(b) = emission {
                pending.push_back(b);
            }
        }

        let Some(b) = pending.pop_front() else {
            writeln!(out, "the machine broke its emission contract; aborting")?;
            return Ok(1);
        };
        let (next, color) = stepper.consume(&position, b);
        writeln!(
            out,
            "O emits '{}' -> state {}, color {}",
            a.output().symbol(b),
            next.state,
            color
        )?;
        emitted.push(color);
        position = next;
        let recent: Vec<String> = emitted
            .iter()
            .rev()
            .take(12)
            .rev()
            .map(ToString::to_string)
            .collect();
        writeln!(
            out,
            "color history ({} rounds): ... {}",
            emitted.len(),
            recent.join(" ")
        )?;
        configs.push(RoundConfig {
            position: position.clone(),
            machine_state,
            pending: pending.clone(),
        });
        round += 1;
    }
}

fn render_buffer(a: &ParityAutomaton, position: &Position) -> String {
    if position.buffer.is_empty() {
        "(empty)".to_string()
    } else {
        position
            .buffer
            .iter()
            .map(|&l| a.input().symbol(l).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn close_loop(
    rest: &str,
    configs: &[RoundConfig],
    emitted: &[Color],
) -> Result<Player, String> {
    let k: usize = rest
        .trim()
        .parse()
        .map_err(|_| format!("usage: :loop k (got '{}')", rest.trim()))?;
    let rounds = configs.len();
    if k == 0 || k >= rounds {
        return Err(format!(
            "need 1 <= k < completed rounds (k={k}, completed={rounds})"
        ));
    }
    if configs[rounds - 1] != configs[rounds - 1 - k] {
        return Err(format!(
            "the last {k} rounds do not close a cycle (configurations differ); \
             keep playing or pick another k"
        ));
    }
    Ok(lasso_winner(
        &emitted[..rounds - k],
        &emitted[rounds - k..],
    ))
}

fn read_line(input: &mut dyn BufRead) -> io::Result<Option<String>> {
    let mut line = String::new();
    let n = input.read_line(&mut line)?;
    Ok(if n == 0 { None } else { Some(line) })
}
