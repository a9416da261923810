//! Random instance generation and the cross-validation harness behind the
//! `xcheck` subcommand. The generators here are also the source of random
//! automata and arenas for the property tests of the other modules.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{Alphabet, Color, ParityAutomaton, SymbolId};
use crate::delaygame::solve_fixed_delay;
use crate::monoid::{try_build_profile_automaton, word_matrix, MatrixId, ProfileAutomaton};
use crate::paritygame::{
    exhaustive_regions, solve, verify_positional_strategy, ParityGameArena, Player,
};
use crate::sggame::{
    decide_finite_delay, synthesize_with_budget, verify_synthesized, Emission,
};

/// Uniformly random total DPA over the boolean alphabets, with exactly
/// `states` states and colors drawn from `0..colors`. Deterministic in the
/// generator state.
pub fn gen_dpa(rng: &mut ChaCha8Rng, states: usize, colors: usize) -> ParityAutomaton {
    assert!(states >= 1, "need at least one state");
    assert!(colors >= 1, "need at least one color");
    let input = Alphabet::boolean();
    let output = Alphabet::boolean();
    let palette: Vec<Color> = (0..states)
        .map(|_| rng.gen_range(0..colors) as Color)
        .collect();
    let table_len = states * input.len() * output.len();
    let delta: Vec<usize> = (0..table_len).map(|_| rng.gen_range(0..states)).collect();
    ParityAutomaton::new(input, output, 0, palette, delta).expect("generated table is total")
}

/// Random DPA with sampled state and color counts (both at least 1).
pub fn random_dpa(
    rng: &mut ChaCha8Rng,
    max_states: usize,
    max_colors: usize,
) -> ParityAutomaton {
    let states = rng.gen_range(1..=max_states);
    let colors = rng.gen_range(1..=max_colors);
    gen_dpa(rng, states, colors)
}

/// Random parity game arena; every vertex gets 1..=`max_degree` successors,
/// so the arena is always valid.
pub fn random_arena(
    rng: &mut ChaCha8Rng,
    max_vertices: usize,
    max_degree: usize,
    max_color: Color,
) -> ParityGameArena {
    let n = rng.gen_range(1..=max_vertices);
    let owners: Vec<Player> = (0..n)
        .map(|_| if rng.gen::<bool>() { Player::O } else { Player::I })
        .collect();
    let colors: Vec<Color> = (0..n).map(|_| rng.gen_range(0..=max_color)).collect();
    let edges: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let degree = rng.gen_range(1..=max_degree);
            (0..degree).map(|_| rng.gen_range(0..n)).collect()
        })
        .collect();
    ParityGameArena::new(owners, colors, edges).expect("successor lists are nonempty")
}

#[derive(Debug, Clone)]
pub struct XcheckConfig {
    pub seed: u64,
    pub count: usize,
    pub max_states: usize,
    pub max_delay: u64,
    pub nprime_cap: usize,
}

impl Default for XcheckConfig {
    fn default() -> Self {
        XcheckConfig {
            seed: 1,
            count: 100,
            max_states: 4,
            max_delay: 4,
            nprime_cap: 6,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub property: &'static str,
    pub case_seed: u64,
    pub detail: String,
    pub instance: String,
}

#[derive(Debug, Default)]
pub struct XcheckReport {
    pub cases: usize,
    /// property name → (passes, failures)
    pub checks: BTreeMap<&'static str, (usize, usize)>,
    pub failures: Vec<Failure>,
}

impl XcheckReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(
        &mut self,
        property: &'static str,
        case_seed: u64,
        ok: bool,
        fail: impl FnOnce() -> (String, String),
    ) {
        let entry = self.checks.entry(property).or_insert((0, 0));
        if ok {
            entry.0 += 1;
        } else {
            entry.1 += 1;
            let (detail, instance) = fail();
            self.failures.push(Failure {
                property,
                case_seed,
                detail,
                instance,
            });
        }
    }

    pub fn write(&self, out: &mut dyn Write) -> io::Result<()> {
        for (property, (pass, fail)) in &self.checks {
            writeln!(out, "PROP {property} PASS={pass} FAIL={fail}")?;
        }
        writeln!(out, "CASES={} FAILURES={}", self.cases, self.failures.len())?;
        if let Some(first) = self.failures.first() {
            writeln!(
                out,
                "FIRST-FAILURE property={} case-seed={} {}",
                first.property, first.case_seed, first.detail
            )?;
            write!(out, "{}", first.instance)?;
        }
        Ok(())
    }
}

pub fn run(config: &XcheckConfig) -> XcheckReport {
    let mut report = XcheckReport::default();
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.count {
        let case_seed = master.gen::<u64>();
        let mut rng = ChaCha8Rng::seed_from_u64(case_seed);
        report.cases += 1;

        let a = random_dpa(&mut rng, config.max_states, 3);
        check_matrices(&a, case_seed, &mut rng, &mut report);
        // The profile construction can blow up exponentially; skip the
        // profile-based checks for monsters rather than drown in them.
        if let Some(profiles) = try_build_profile_automaton(&a, 512) {
            check_profiles(&a, &profiles, case_seed, &mut report);
            check_against_oracle(config, &a, &profiles, case_seed, &mut rng, &mut report);
        }

        let small = random_arena(&mut rng, 8, 3, 3);
        check_solver_vs_exhaustive(&small, case_seed, &mut report);
        let big = random_arena(&mut rng, 40, 4, 4);
        check_determinacy(&big, case_seed, &mut report);
    }
    report
}

/// Matrix entries must equal an independent re-walk of the automaton that
/// maximizes colors with plain integer max, and folding must be a monoid
/// homomorphism under splits.
fn check_matrices(
    a: &ParityAutomaton,
    case_seed: u64,
    rng: &mut ChaCha8Rng,
    report: &mut XcheckReport,
) {
    for _ in 0..4 {
        let len = rng.gen_range(2..=4);
        let u: Vec<SymbolId> = (0..len).map(|_| rng.gen_range(0..a.input().len())).collect();
        let v: Vec<SymbolId> = (0..len)
            .map(|_| rng.gen_range(0..a.output().len()))
            .collect();
        let m = word_matrix(a, &u, &v).expect("letters in range");
        let ok = (0..a.state_count()).all(|p| {
            let mut q = p;
            let mut best: Color = 0;
            let mut first = true;
            for i in 0..len {
                q = a.step(q, u[i], v[i]);
                let c = a.color(q);
                best = if first { c } else { best.max(c) };
                first = false;
            }
            m.row(p) == (q, best)
        });
        report.record("matrix-vs-run", case_seed, ok, || {
            (
                format!("matrix disagrees with a direct run on u={u:?} v={v:?}"),
                a.to_text(),
            )
        });
    }

    for _ in 0..4 {
        let xlen = rng.gen_range(1..=3);
        let ylen = rng.gen_range(1..=3);
        let total = xlen + ylen;
        let u: Vec<SymbolId> = (0..total)
            .map(|_| rng.gen_range(0..a.input().len()))
            .collect();
        let v: Vec<SymbolId> = (0..total)
            .map(|_| rng.gen_range(0..a.output().len()))
            .collect();
        let whole = word_matrix(a, &u, &v).expect("letters in range");
        let left = word_matrix(a, &u[..xlen], &v[..xlen]).expect("letters in range");
        let right = word_matrix(a, &u[xlen..], &v[xlen..]).expect("letters in range");
        let ok = left.mul(&right).expect("same dimension") == whole;
        report.record("monoid-homomorphism", case_seed, ok, || {
            (
                format!("fold of u={u:?} v={v:?} is not the product of its split at {xlen}"),
                a.to_text(),
            )
        });
    }
}

/// The subset construction must agree with brute-force enumeration of all
/// realizable matrices, for every input word up to length 3.
fn check_profiles(
    a: &ParityAutomaton,
    profiles: &ProfileAutomaton,
    case_seed: u64,
    report: &mut XcheckReport,
) {
    let monoid = profiles.monoid();
    let n_in = a.input().len();
    let n_out = a.output().len();
    let mut ok = true;
    let mut detail = String::new();
    for len in 1..=3usize {
        for code in 0..n_in.pow(len as u32) {
            let u: Vec<SymbolId> = (0..len).map(|i| (code / n_in.pow(i as u32)) % n_in).collect();
            let mut brute: Vec<MatrixId> = (0..n_out.pow(len as u32))
                .map(|vcode| {
                    let v: Vec<SymbolId> =
                        (0..len).map(|i| (vcode / n_out.pow(i as u32)) % n_out).collect();
                    let m = word_matrix(a, &u, &v).expect("letters in range");
                    monoid.id_of(&m).expect("every block matrix is in the monoid")
                })
                .collect();
            brute.sort_unstable();
            brute.dedup();
            let state = profiles.state_on_word(&u).expect("letters in range");
            let got = profiles.profile(state).expect("nonempty word");
            if got != brute.as_slice() {
                ok = false;
                detail = format!("profile of u={u:?} is {got:?}, brute force says {brute:?}");
                break;
            }
        }
        if !ok {
            break;
        }
    }
    report.record("profile-bruteforce", case_seed, ok, || (detail, a.to_text()));
}

/// The delay-independent decision must match the fixed-delay oracle in both
/// directions, winning must be monotone in the delay, and synthesized
/// machines must verify and respect the emission contract.
fn check_against_oracle(
    config: &XcheckConfig,
    a: &ParityAutomaton,
    profiles: &ProfileAutomaton,
    case_seed: u64,
    rng: &mut ChaCha8Rng,
    report: &mut XcheckReport,
) {
    if profiles.n_prime() > config.nprime_cap {
        return;
    }
    let verdict = decide_finite_delay(a);
    let bound = 2 * verdict.n_prime as u64 - 1;

    match verdict.winner {
        Player::O => {
            let at_bound = solve_fixed_delay(a, bound).map(|s| s.winner());
            report.record(
                "decision-vs-oracle",
                case_seed,
                at_bound == Ok(Player::O),
                || {
                    (
                        format!("decision says O but the oracle at delay {bound} says {at_bound:?}"),
                        a.to_text(),
                    )
                },
            );

            match synthesize_with_budget(a, 250_000) {
                Ok(machine) => {
                    let verified = verify_synthesized(a, &machine, machine.delay());
                    report.record(
                        "synthesis-verifies",
                        case_seed,
                        verified == Ok(true),
                        || {
                            (
                                format!(
                                    "machine with delay {} fails verification: {verified:?}",
                                    machine.delay()
                                ),
                                a.to_text(),
                            )
                        },
                    );

                    let d = machine.delay() as usize;
                    let inputs: Vec<SymbolId> = (0..3 * d.max(1))
                        .map(|_| rng.gen_range(0..a.input().len()))
                        .collect();
                    let emissions = machine.run(&inputs);
                    let emitted = emissions
                        .iter()
                        .filter(|e| matches!(e, Emission::Letter(_)))
                        .count();
                    let prefix_waits = emissions
                        .iter()
                        .take(d)
                        .all(|e| matches!(e, Emission::Wait));
                    let ok = emitted == inputs.len() - d && prefix_waits;
                    report.record("emission-contract", case_seed, ok, || {
                        (
                            format!(
                                "on {} inputs the machine emitted {emitted} letters (delay {d})",
                                inputs.len()
                            ),
                            a.to_text(),
                        )
                    });
                }
                Err(e) => {
                    report.record("synthesis-verifies", case_seed, false, || {
                        (format!("synthesis failed although O wins: {e}"), a.to_text())
                    });
                }
            }
        }
        Player::I => {
            let mut bad = None;
            for d in 0..=bound {
                match solve_fixed_delay(a, d).map(|s| s.winner()) {
                    Ok(Player::I) => {}
                    other => {
                        bad = Some((d, other));
                        break;
                    }
                }
            }
            report.record("decision-vs-oracle", case_seed, bad.is_none(), || {
                let (d, got) = bad.as_ref().expect("failure recorded");
                (
                    format!("decision says I but the oracle at delay {d} says {got:?}"),
                    a.to_text(),
                )
            });
        }
    }

    let winners: Vec<Player> = (0..=config.max_delay)
        .map(|d| {
            solve_fixed_delay(a, d)
                .map(|s| s.winner())
                .expect("small delays fit the budget")
        })
        .collect();
    let monotone = winners
        .windows(2)
        .all(|w| !(w[0] == Player::O && w[1] == Player::I));
    report.record("monotone-in-delay", case_seed, monotone, || {
        (format!("oracle winners by delay: {winners:?}"), a.to_text())
    });
}

fn check_solver_vs_exhaustive(
    arena: &ParityGameArena,
    case_seed: u64,
    report: &mut XcheckReport,
) {
    let solution = solve(arena);
    let (o_mask, i_mask) = exhaustive_regions(arena).expect("within the exhaustive limits");
    let mut ok = true;
    let mut detail = String::new();
    for v in 0..arena.vertex_count() {
        if o_mask[v] == i_mask[v] {
            ok = false;
            detail = format!("exhaustive regions do not partition at vertex {v}");
            break;
        }
        if (solution.winner(v) == Player::O) != o_mask[v] {
            ok = false;
            detail = format!(
                "solver says {} at vertex {v}, exhaustive enumeration disagrees",
                solution.winner(v)
            );
            break;
        }
    }
    report.record("zielonka-vs-exhaustive", case_seed, ok, || {
        (detail, arena.dump_text())
    });
}

fn check_determinacy(arena: &ParityGameArena, case_seed: u64, report: &mut XcheckReport) {
    let solution = solve(arena);
    let mut ok = true;
    let mut detail = String::new();
    for v in 0..arena.vertex_count() {
        let winner = solution.winner(v);
        match verify_positional_strategy(arena, winner, solution.strategies(), v) {
            Ok(true) => {}
            other => {
                ok = false;
                detail = format!("{winner}'s strategy from vertex {v} does not verify: {other:?}");
                break;
            }
        }
    }
    report.record("determinacy", case_seed, ok, || (detail, arena.dump_text()));
}
