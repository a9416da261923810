//! Delay games in explicit form: delay-function specs and their transforms,
//! the fixed-delay parity arena (the brute-force oracle this crate checks
//! itself against), and a round-by-round play simulator.
//!
//! A delay function f assigns every round i a positive number of input
//! letters Player I must supply before Player O answers with one output
//! letter. Bounded specs (tail 1) yield finite arenas because the pending
//! input buffer stays below a computable cap.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;
use thiserror::Error;

use crate::automata::{Color, ParityAutomaton, StateId, SymbolId};
use crate::paritygame::{self, ParityGameArena, Player, Solution, VertexId};

/// Default cap on arena vertices for oracle construction.
pub const DEFAULT_ARENA_BUDGET: usize = 2_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DelayError {
    #[error("delay functions take positive values only")]
    ZeroValue,
    #[error("tail {tail} is not 1: the pending buffer would grow forever")]
    UnboundedTail { tail: u64 },
    #[error("delay arena needs at least {needed} vertices, over the budget of {budget}")]
    Budget { needed: u128, budget: usize },
    #[error("player {player} strategy undefined at round {round}")]
    StrategyUndefined { player: Player, round: usize },
}

/// Eventually-constant delay function: f(i) = head[i] for i < |head|, and
/// the tail value afterwards. Stored normalized (no trailing head entries
/// equal to the tail), so equal functions compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DelaySpec {
    head: Vec<u64>,
    tail: u64,
}

impl DelaySpec {
    pub fn new(head: Vec<u64>, tail: u64) -> Result<Self, DelayError> {
        if tail == 0 || head.contains(&0) {
            return Err(DelayError::ZeroValue);
        }
        let mut spec = DelaySpec { head, tail };
        spec.normalize();
        Ok(spec)
    }

    pub fn constant(value: u64) -> Result<Self, DelayError> {
        DelaySpec::new(Vec::new(), value)
    }

    /// The classic fixed-delay shape: d+1 letters up front, then lockstep.
    pub fn fixed_delay(d: u64) -> Self {
        DelaySpec::new(vec![d + 1], 1).expect("positive by construction")
    }

    fn normalize(&mut self) {
        while self.head.last() == Some(&self.tail) {
            self.head.pop();
        }
    }

    pub fn f(&self, i: usize) -> u64 {
        self.head.get(i).copied().unwrap_or(self.tail)
    }

    pub fn head(&self) -> &[u64] {
        &self.head
    }

    pub fn tail(&self) -> u64 {
        self.tail
    }

    pub fn is_bounded(&self) -> bool {
        self.tail == 1
    }

    /// Largest pending-buffer size a bounded spec can reach (exact for
    /// tail 1): sum(head) − |head| + 1.
    pub fn max_buffer(&self) -> u128 {
        let sum: u128 = self.head.iter().map(|&x| x as u128).sum();
        sum - self.head.len() as u128 + 1
    }

    /// The one-step lookahead absorption: f′(0) = f(0)+f(1), f′(i) = f(i+1).
    pub fn f_prime(&self) -> DelaySpec {
        let mut head = vec![self.f(0) + self.f(1)];
        if self.head.len() > 2 {
            head.extend_from_slice(&self.head[2..]);
        }
        DelaySpec::new(head, self.tail).expect("positive by construction")
    }

    /// Sum of the first `count` values of f, in arbitrary precision.
    fn partial_sum(&self, count: &BigUint) -> BigUint {
        let len = BigUint::from(self.head.len());
        if *count <= len {
            let c: usize = count.try_into().expect("count below head length");
            self.head[..c].iter().map(|&x| BigUint::from(x)).sum()
        } else {
            let head_sum: BigUint = self.head.iter().map(|&x| BigUint::from(x)).sum();
            head_sum + (count - len) * BigUint::from(self.tail)
        }
    }

    /// The doubling transform: f″(0) = f(0) and
    /// f″(i+1) = Σ_{j=0}^{2(f″(0)+…+f″(i))} f(j). Grows doubly
    /// exponentially, hence the big integers.
    pub fn f_double_prime(&self, k: usize) -> Vec<BigUint> {
        assert!(k >= 1, "need at least one value");
        let mut out: Vec<BigUint> = Vec::with_capacity(k);
        out.push(BigUint::from(self.f(0)));
        let mut cumulative = out[0].clone();
        for _ in 1..k {
            let terms = BigUint::from(2u32) * &cumulative + BigUint::from(1u32);
            let value = self.partial_sum(&terms);
            cumulative += &value;
            out.push(value);
        }
        out
    }
}

impl std::fmt::Display for DelaySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let head: Vec<String> = self.head.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}],{}", head.join(","), self.tail)
    }
}

/// A snapshot of the delay game between moves: current automaton state, the
/// pending (not yet consumed) input letters, the saturated round counter,
/// and how many appends remain before Player O answers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Position {
    pub state: StateId,
    pub buffer: Vec<SymbolId>,
    pub phase: usize,
    pub appends_left: u64,
}

impl Position {
    pub fn is_input_turn(&self) -> bool {
        self.appends_left > 0
    }
}

/// Move logic shared by the arena builder, the simulator, and the product
/// checker in the synthesis module.
pub(crate) struct Stepper<'a> {
    automaton: &'a ParityAutomaton,
    spec: &'a DelaySpec,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(automaton: &'a ParityAutomaton, spec: &'a DelaySpec) -> Self {
        Stepper { automaton, spec }
    }

    pub(crate) fn initial(&self) -> Position {
        Position {
            state: self.automaton.initial(),
            buffer: Vec::new(),
            phase: 0,
            appends_left: self.spec.f(0),
        }
    }

    pub(crate) fn append(&self, p: &Position, letter: SymbolId) -> Position {
        debug_assert!(p.appends_left > 0);
        let mut buffer = p.buffer.clone();
        buffer.push(letter);
        Position {
            state: p.state,
            buffer,
            phase: p.phase,
            appends_left: p.appends_left - 1,
        }
    }

    /// Player O consumes the oldest buffered letter together with `out`,
    /// advancing the automaton; returns the fresh round-start position and
    /// the color it emits.
    pub(crate) fn consume(&self, p: &Position, out: SymbolId) -> (Position, Color) {
        debug_assert!(p.appends_left == 0 && !p.buffer.is_empty());
        let state = self.automaton.step(p.state, p.buffer[0], out);
        let phase = (p.phase + 1).min(self.spec.head().len());
        let position = Position {
            state,
            buffer: p.buffer[1..].to_vec(),
            phase,
            appends_left: self.spec.f(phase),
        };
        let color = self.automaton.color(state);
        (position, color)
    }

    /// Static vertex color. Only fresh round starts entered by a consume
    /// carry the automaton color; mid-round positions are neutral. A fresh
    /// start is recognizable from the key alone: appends_left is at its
    /// round maximum, and (unless the head is empty, where every phase is 0)
    /// phase 0 happens only before the first consume.
    pub(crate) fn vertex_color(&self, p: &Position) -> Color {
        let fresh = p.appends_left == self.spec.f(p.phase);
        if fresh && (p.phase >= 1 || self.spec.head().is_empty()) {
            self.automaton.color(p.state)
        } else {
            0
        }
    }
}

/// The explicit arena of a bounded delay game, with enough side data to
/// decode vertices and edges back into game moves.
#[derive(Debug, Clone)]
pub struct DelayArena {
    arena: ParityGameArena,
    initial: VertexId,
    positions: Vec<Position>,
    moves: Vec<Vec<SymbolId>>,
    spec: DelaySpec,
}

impl DelayArena {
    pub fn arena(&self) -> &ParityGameArena {
        &self.arena
    }

    pub fn spec(&self) -> &DelaySpec {
        &self.spec
    }

    pub fn initial(&self) -> VertexId {
        self.initial
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn position(&self, v: VertexId) -> &Position {
        &self.positions[v]
    }

    /// The letter labeling each outgoing edge of `v` (input letters on
    /// Player I vertices, output letters on Player O vertices).
    pub fn move_letters(&self, v: VertexId) -> &[SymbolId] {
        &self.moves[v]
    }

    pub fn edge_for_letter(&self, v: VertexId, letter: SymbolId) -> Option<usize> {
        self.moves[v].iter().position(|&l| l == letter)
    }

    pub fn letter_for_target(&self, v: VertexId, target: VertexId) -> Option<SymbolId> {
        self.arena
            .successors(v)
            .iter()
            .position(|&t| t == target)
            .map(|i| self.moves[v][i])
    }
}

pub fn build_delay_arena(
    automaton: &ParityAutomaton,
    spec: &DelaySpec,
) -> Result<DelayArena, DelayError> {
    build_delay_arena_with_budget(automaton, spec, DEFAULT_ARENA_BUDGET)
}

pub fn build_delay_arena_with_budget(
    automaton: &ParityAutomaton,
    spec: &DelaySpec,
    budget: usize,
) -> Result<DelayArena, DelayError> {
    if !spec.is_bounded() {
        return Err(DelayError::UnboundedTail { tail: spec.tail() });
    }
    // Cheap lower bound before enumerating: every buffer content of maximal
    // size shows up at some steady-state vertex.
    let cap = spec.max_buffer();
    let letters = automaton.input().len() as u128;
    let floor = if cap >= 128 {
        u128::MAX
    } else {
        letters.checked_pow(cap as u32).unwrap_or(u128::MAX)
    };
    if floor > budget as u128 {
        return Err(DelayError::Budget {
            needed: floor,
            budget,
        });
    }

    let stepper = Stepper::new(automaton, spec);
    let mut index: HashMap<Position, VertexId> = HashMap::new();
    let mut positions: Vec<Position> = Vec::new();
    let mut queue: VecDeque<VertexId> = VecDeque::new();

    let mut intern = |p: Position,
                      positions: &mut Vec<Position>,
                      queue: &mut VecDeque<VertexId>|
     -> Result<VertexId, DelayError> {
        if let Some(&v) = index.get(&p) {
            return Ok(v);
        }
        let v = positions.len();
        if v >= budget {
            return Err(DelayError::Budget {
                needed: budget as u128 + 1,
                budget,
            });
        }
        index.insert(p.clone(), v);
        positions.push(p);
        queue.push_back(v);
        Ok(v)
    };

    let initial = intern(stepper.initial(), &mut positions, &mut queue)?;
    let mut owners: Vec<Player> = Vec::new();
    let mut colors: Vec<Color> = Vec::new();
    let mut edges: Vec<Vec<VertexId>> = Vec::new();
    let mut moves: Vec<Vec<SymbolId>> = Vec::new();

    while let Some(v) = queue.pop_front() {
        let p = positions[v].clone();
        debug_assert_eq!(owners.len(), v);
        colors.push(stepper.vertex_color(&p));
        if p.is_input_turn() {
            owners.push(Player::I);
            let mut succ = Vec::with_capacity(automaton.input().len());
            let mut letters = Vec::with_capacity(automaton.input().len());
            for a in automaton.input().ids() {
                succ.push(intern(stepper.append(&p, a), &mut positions, &mut queue)?);
                letters.push(a);
            }
            edges.push(succ);
            moves.push(letters);
        } else {
            assert!(!p.buffer.is_empty(), "output turn with an empty buffer");
            owners.push(Player::O);
            let mut succ = Vec::with_capacity(automaton.output().len());
            let mut letters = Vec::with_capacity(automaton.output().len());
            for b in automaton.output().ids() {
                let (next, _) = stepper.consume(&p, b);
                succ.push(intern(next, &mut positions, &mut queue)?);
                letters.push(b);
            }
            edges.push(succ);
            moves.push(letters);
        }
    }

    let arena = ParityGameArena::new(owners, colors, edges).expect("arena is total by construction");
    Ok(DelayArena {
        arena,
        initial,
        positions,
        moves,
        spec: spec.clone(),
    })
}

/// Winner and decoded strategy of the fixed-delay game: the independent
/// oracle everything else is measured against.
#[derive(Debug, Clone)]
pub struct FixedDelaySolution {
    arena: DelayArena,
    solution: Solution,
}

impl FixedDelaySolution {
    pub fn winner(&self) -> Player {
        self.solution.winner(self.arena.initial())
    }

    pub fn arena(&self) -> &DelayArena {
        &self.arena
    }

    pub fn solution(&self) -> &Solution {
        &self.solution
    }

    /// Decodes the positional strategy at `v` into the letter it plays.
    pub fn move_for(&self, v: VertexId) -> Option<SymbolId> {
        let target = self.solution.strategy(v)?;
        self.arena.letter_for_target(v, target)
    }
}

pub fn solve_fixed_delay(
    automaton: &ParityAutomaton,
    delay: u64,
) -> Result<FixedDelaySolution, DelayError> {
    solve_fixed_delay_with_budget(automaton, delay, DEFAULT_ARENA_BUDGET)
}

pub fn solve_fixed_delay_with_budget(
    automaton: &ParityAutomaton,
    delay: u64,
    budget: usize,
) -> Result<FixedDelaySolution, DelayError> {
    let spec = DelaySpec::fixed_delay(delay);
    let arena = build_delay_arena_with_budget(automaton, &spec, budget)?;
    let solution = paritygame::solve(arena.arena());
    Ok(FixedDelaySolution { arena, solution })
}

/// What a strategy gets to see when asked for its next letter.
pub struct PlayView<'a> {
    pub inputs: &'a [SymbolId],
    pub outputs: &'a [SymbolId],
}

pub trait InputStrategy {
    fn next_input(&mut self, view: &PlayView<'_>) -> Option<SymbolId>;
    /// Some(state hash) when the strategy is finite-state; the simulator
    /// uses it for lasso detection. None disables adjudication.
    fn fingerprint(&self) -> Option<u64>;
}

pub trait OutputStrategy {
    fn next_output(&mut self, view: &PlayView<'_>) -> Option<SymbolId>;
    fn fingerprint(&self) -> Option<u64>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlayEvent {
    Input {
        round: usize,
        letter: SymbolId,
    },
    Output {
        round: usize,
        letter: SymbolId,
        state: StateId,
        color: Color,
    },
}

#[derive(Debug, Clone)]
pub struct PlayOutcome {
    pub trace: Vec<PlayEvent>,
    pub rounds: usize,
    /// Some when both strategies were finite-state and a configuration
    /// repeated within the round limit.
    pub verdict: Option<Player>,
}

///// Plays the delay game round by round: f(i) input letters, then one output
/// letter. When both strategies expose fingerprints, repeated joint
/// configurations close a lasso and the play is adjudicated.
pub fn simulate_play(
    automaton: &ParityAutomaton,
    spec: &DelaySpec,
    strat_i: &mut dyn InputStrategy,
    strat_o: &mut dyn OutputStrategy,
    max_rounds: usize,
) -> Result<PlayOutcome, DelayError> {
    let stepper = Stepper::new(automaton, spec);
    let mut position = stepper.initial();
    let mut inputs: Vec<SymbolId> = Vec::new();
    let mut outputs: Vec<SymbolId> = Vec::new();
    let mut trace: Vec<PlayEvent> = Vec::new();
    let mut emitted: Vec<Color> = Vec::new();
    let mut seen: HashMap<(Position, u64, u64), usize> = HashMap::new();

    for round in 0..max_rounds {
        while position.appends_left > 0 {
            let view = PlayView {
                inputs: &inputs,
                outputs: &outputs,
            };
            let letter = strat_i
                .next_input(&view)
                .ok_or(DelayError::StrategyUndefined {
                    player: Player::I,
                    round,
                })?;
            assert!(letter < automaton.input().len(), "input letter out of range");
            position = stepper.append(&position, letter);
            inputs.push(letter);
            trace.push(PlayEvent::Input { round, letter });
        }
        let view = PlayView {
            inputs: &inputs,
            outputs: &outputs,
        };
        let letter = strat_o
            .next_output(&view)
            .ok_or(DelayError::StrategyUndefined {
                player: Player::O,
                round,
            })?;
        assert!(letter < automaton.output().len(), "output letter out of range");
        let (next, color) = stepper.consume(&position, letter);
        outputs.push(letter);
        trace.push(PlayEvent::Output {
            round,
            letter,
            state: next.state,
            color,
        });
        emitted.push(color);
        position = next;

        if let (Some(fi), Some(fo)) = (strat_i.fingerprint(), strat_o.fingerprint()) {
            let key = (position.clone(), fi, fo);
            if let Some(&first) = seen.get(&key) {
                let verdict = paritygame::lasso_winner(&emitted[..first], &emitted[first..]);
                return Ok(PlayOutcome {
                    trace,
                    rounds: round + 1,
                    verdict: Some(verdict),
                });
            }
            seen.insert(key, round + 1);
        }
    }

    Ok(PlayOutcome {
        trace,
        rounds: max_rounds,
        verdict: None,
    })
}

/// Plays the positional strategy extracted from a solved delay arena,
/// usable on whichever side the strategy belongs to. Keeps its own cursor
/// in the arena, synchronized against the observed history.
pub struct ArenaStrategyAdapter<'a> {
    arena: &'a DelayArena,
    solution: &'a Solution,
    cursor: VertexId,
    synced_inputs: usize,
    synced_outputs: usize,
}

impl<'a> ArenaStrategyAdapter<'a> {
    pub fn new(source: &'a FixedDelaySolution) -> Self {
        ArenaStrategyAdapter {
            arena: source.arena(),
            solution: source.solution(),
            cursor: source.arena().initial(),
            synced_inputs: 0,
            synced_outputs: 0,
        }
    }

    /// Replays history the adapter has not seen yet, moving the cursor.
    fn sync(&mut self, view: &PlayView<'_>) -> Option<()> {
        while self.synced_inputs < view.inputs.len() || self.synced_outputs < view.outputs.len() {
            let position = self.arena.position(self.cursor);
            let letter = if position.is_input_turn() {
                if self.synced_inputs == view.inputs.len() {
                    return None;
                }
                let l = view.inputs[self.synced_inputs];
                self.synced_inputs += 1;
                l
            } else {
                if self.synced_outputs == view.outputs.len() {
                    return None;
                }
                let l = view.outputs[self.synced_outputs];
                self.synced_outputs += 1;
                l
            };
            let edge = self.arena.edge_for_letter(self.cursor, letter)?;
            self.cursor = self.arena.arena().successors(self.cursor)[edge];
        }
        Some(())
    }

    fn choose(&mut self) -> Option<SymbolId> {
        let target = self.solution.strategy(self.cursor)?;
        self.arena.letter_for_target(self.cursor, target)
    }
}

impl InputStrategy for ArenaStrategyAdapter<'_> {
    fn next_input(&mut self, view: &PlayView<'_>) -> Option<SymbolId> {
        self.sync(view)?;
        debug_assert!(self.arena.position(self.cursor).is_input_turn());
        self.choose()
    }

    fn fingerprint(&self) -> Option<u64> {
        Some(self.cursor as u64)
    }
}

impl OutputStrategy for ArenaStrategyAdapter<'_> {
    fn next_output(&mut self, view: &PlayView<'_>) -> Option<SymbolId> {
        self.sync(view)?;
        debug_assert!(!self.arena.position(self.cursor).is_input_turn());
        self.choose()
    }

    fn fingerprint(&self) -> Option<u64> {
        Some(self.cursor as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn copy_dpa() -> ParityAutomaton {
        crate::automata::tests::copy_dpa()
    }

    #[test]
    fn specs_normalize_and_validate() {
        let spec = DelaySpec::new(vec![3, 1, 1], 1).unwrap();
        assert_eq!(spec.head(), &[3]);
        assert_eq!(spec.tail(), 1);
        assert_eq!(DelaySpec::fixed_delay(0), DelaySpec::constant(1).unwrap());
        assert_eq!(DelaySpec::fixed_delay(2).head(), &[3]);
        assert_eq!(DelaySpec::new(vec![], 0).unwrap_err(), DelayError::ZeroValue);
        assert_eq!(
            DelaySpec::new(vec![1, 0], 1).unwrap_err(),
            DelayError::ZeroValue
        );
        assert_eq!(DelaySpec::fixed_delay(2).to_string(), "[3],1");
        assert_eq!(DelaySpec::constant(1).unwrap().max_buffer(), 1);
        assert_eq!(DelaySpec::fixed_delay(3).max_buffer(), 4);
    }

    #[test]
    fn f_prime_matches_hand_evaluation() {
        let const3 = DelaySpec::fixed_delay(3);
        assert_eq!(const3.f_prime(), DelaySpec::new(vec![5], 1).unwrap());
        let two_three = DelaySpec::new(vec![2, 3], 1).unwrap();
        assert_eq!(two_three.f_prime(), DelaySpec::new(vec![5], 1).unwrap());
        let ones = DelaySpec::constant(1).unwrap();
        assert_eq!(ones.f_prime(), DelaySpec::new(vec![2], 1).unwrap());
    }

    #[test]
    fn f_double_prime_matches_hand_evaluation() {
        let ones = DelaySpec::constant(1).unwrap();
        let values = ones.f_double_prime(3);
        let expect: Vec<BigUint> = [1u32, 3, 9].into_iter().map(BigUint::from).collect();
        assert_eq!(values, expect);

        let const1 = DelaySpec::fixed_delay(1);
        let values = const1.f_double_prime(2);
        let expect: Vec<BigUint> = [2u32, 6].into_iter().map(BigUint::from).collect();
        assert_eq!(values, expect);
    }

    #[test]
    fn copy_game_without_lookahead_is_won_by_o() {
        let a = copy_dpa();
        for d in 0..4 {
            let solved = solve_fixed_delay(&a, d).unwrap();
            assert_eq!(solved.winner(), Player::O, "copy loses at delay {d}");
        }
    }

    #[test]
    fn arena_respects_the_buffer_cap_and_decodes_moves() {
        let a = copy_dpa();
        let spec = DelaySpec::fixed_delay(2);
        let arena = build_delay_arena(&a, &spec).unwrap();
        let cap = spec.max_buffer() as usize;
        for v in 0..arena.arena().vertex_count() {
            let p = arena.position(v);
            assert!(p.buffer.len() <= cap);
            let expected_moves = if p.is_input_turn() {
                a.input().len()
            } else {
                a.output().len()
            };
            assert_eq!(arena.move_letters(v).len(), expected_moves);
            assert_eq!(arena.arena().successors(v).len(), expected_moves);
        }
        let init = arena.position(arena.initial());
        assert_eq!(init.state, a.initial());
        assert!(init.buffer.is_empty());
        assert_eq!(init.appends_left, 3);
    }

    #[test]
    fn unbounded_tails_are_rejected() {
        let a = copy_dpa();
        let spec = DelaySpec::constant(2).unwrap();
        assert_eq!(
            build_delay_arena(&a, &spec).unwrap_err(),
            DelayError::UnboundedTail { tail: 2 }
        );
    }

    #[test]
    fn oversized_arenas_report_the_budget() {
        let a = copy_dpa();
        let err = build_delay_arena_with_budget(&a, &DelaySpec::fixed_delay(30), 1000).unwrap_err();
        match err {
            DelayError::Budget { needed, budget } => {
                assert_eq!(budget, 1000);
                assert!(needed > 1000);
            }
            other => panic!("expected budget error, got {other}"),
        }
    }

    struct ConstantInput(SymbolId);

    impl InputStrategy for ConstantInput {
        fn next_input(&mut self, _: &PlayView<'_>) -> Option<SymbolId> {
            Some(self.0)
        }
        fn fingerprint(&self) -> Option<u64> {
            Some(0)
        }
    }

    /// Outputs some fixed function of the oldest pending input letter.
    struct FrontMap(fn(SymbolId) -> SymbolId);

    impl OutputStrategy for FrontMap {
        fn next_output(&mut self, view: &PlayView<'_>) -> Option<SymbolId> {
            Some((self.0)(view.inputs[view.outputs.len()]))
        }
        fn fingerprint(&self) -> Option<u64> {
            Some(0)
        }
    }

    struct Undefined;

    impl OutputStrategy for Undefined {
        fn next_output(&mut self, _: &PlayView<'_>) -> Option<SymbolId> {
            None
        }
        fn fingerprint(&self) -> Option<u64> {
            Some(0)
        }
    }

    #[test]
    fn simulation_adjudicates_copy_and_complement() {
        let a = copy_dpa();
        let spec = DelaySpec::constant(1).unwrap();
        let outcome = simulate_play(
            &a,
            &spec,
            &mut ConstantInput(0),
            &mut FrontMap(|l| l),
            64,
        )
        .unwrap();
        assert_eq!(outcome.verdict, Some(Player::O));

        let outcome = simulate_play(
            &a,
            &spec,
            &mut ConstantInput(0),
            &mut FrontMap(|l| 1 - l),
            64,
        )
        .unwrap();
        assert_eq!(outcome.verdict, Some(Player::I));
        assert!(outcome.trace.iter().any(|e| matches!(
            e,
            PlayEvent::Output { color: 1, .. }
        )));
    }

    #[test]
    fn undefined_strategies_surface_as_errors() {
        let a = copy_dpa();
        let spec = DelaySpec::constant(1).unwrap();
        assert_eq!(
            simulate_play(&a, &spec, &mut ConstantInput(0), &mut Undefined, 8).unwrap_err(),
            DelayError::StrategyUndefined {
                player: Player::O,
                round: 0
            }
        );
    }

    #[test]
    fn arena_adapter_replays_the_winning_strategy() {
        let a = copy_dpa();
        let solved = solve_fixed_delay(&a, 1).unwrap();
        assert_eq!(solved.winner(), Player::O);
        let spec = DelaySpec::fixed_delay(1);
        let mut o = ArenaStrategyAdapter::new(&solved);
        let outcome = simulate_play(&a, &spec, &mut ConstantInput(1), &mut o, 128).unwrap();
        assert_eq!(outcome.verdict, Some(Player::O));
    }

    /// An ultimately periodic input source, finite-state by construction.
    struct PeriodicInput {
        letters: Vec<SymbolId>,
        at: usize,
    }

    impl InputStrategy for PeriodicInput {
        fn next_input(&mut self, _: &PlayView<'_>) -> Option<SymbolId> {
            let l = self.letters[self.at];
            self.at = (self.at + 1) % self.letters.len();
            Some(l)
        }
        fn fingerprint(&self) -> Option<u64> {
            Some(self.at as u64)
        }
    }

    struct PeriodicOutput {
        letters: Vec<SymbolId>,
        at: usize,
    }

    impl OutputStrategy for PeriodicOutput {
        fn next_output(&mut self, _: &PlayView<'_>) -> Option<SymbolId> {
            let l = self.letters[self.at];
            self.at = (self.at + 1) % self.letters.len();
            Some(l)
        }
        fn fingerprint(&self) -> Option<u64> {
            Some(self.at as u64)
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn double_prime_is_monotone(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let head: Vec<u64> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(1..=5)).collect();
            let tail = rng.gen_range(1..=3);
            let spec = DelaySpec::new(head, tail).unwrap();
            let values = spec.f_double_prime(6);
            for pair in values.windows(2) {
                prop_assert!(pair[1] >= pair[0], "{} not monotone: {:?}", spec, values);
            }
        }

        #[test]
        fn winning_regions_are_monotone_in_the_delay(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = crate::cli::xcheck::random_dpa(&mut rng, 3, 3);
            let mut last = None;
            for d in 0..3u64 {
                let winner = solve_fixed_delay(&a, d).unwrap().winner();
                if last == Some(Player::O) {
                    prop_assert_eq!(
                        winner,
                        Player::O,
                        "O won delay {} but loses delay {} on\n{}",
                        d - 1,
                        d,
                        a.to_text()
                    );
                }
                last = Some(winner);
            }
        }

        #[test]
        fn extracted_strategies_beat_periodic_opponents(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = crate::cli::xcheck::random_dpa(&mut rng, 3, 3);
            let d = rng.gen_range(0..=2);
            let solved = solve_fixed_delay(&a, d).unwrap();
            let spec = DelaySpec::fixed_delay(d);
            let period_len = rng.gen_range(1..=4);
            if solved.winner() == Player::O {
                let mut i = PeriodicInput {
                    letters: (0..period_len).map(|_| rng.gen_range(0..a.input().len())).collect(),
                    at: 0,
                };
                let mut o = ArenaStrategyAdapter::new(&solved);
                let outcome = simulate_play(&a, &spec, &mut i, &mut o, 4096).unwrap();
                prop_assert_eq!(outcome.verdict, Some(Player::O), "dpa\n{}", a.to_text());
            } else {
                let mut i = ArenaStrategyAdapter::new(&solved);
                let mut o = PeriodicOutput {
                    letters: (0..period_len).map(|_| rng.gen_range(0..a.output().len())).collect(),
                    at: 0,
                };
                let outcome = simulate_play(&a, &spec, &mut i, &mut o, 4096).unwrap();
                prop_assert_eq!(outcome.verdict, Some(Player::I), "dpa\n{}", a.to_text());
            }
        }
    }
}
