//! The delay-independent decision game and constant-delay synthesis.
//!
//! Player I moves by choosing profile classes (restricted to those with
//! infinitely many member words, so any block length can realize them), and
//! Player O answers the class picked two moves earlier with one of its
//! matrices, emitting that matrix's color at the current automaton state.
//! The winner of this finite parity game from the opening vertex decides
//! whether any finite lookahead suffices; on a win for O, a finite-state
//! machine with constant delay is extracted from the positional strategy.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::automata::{
    parse_count, syntax, Alphabet, AutomatonError, Color, LineReader, ParityAutomaton, StateId,
    SymbolId,
};
use crate::delaygame::{DelayError, DelaySpec, FixedDelaySolution, Stepper};
use crate::monoid::{build_profile_automaton, find_matching_output, MatrixId, ProfileAutomaton};
use crate::paritygame::{self, ParityGameArena, Player, Solution, VertexId};

/// Default cap on synthesized machine states.
pub const DEFAULT_MACHINE_BUDGET: usize = 1_000_000;
/// Default cap on product nodes in `verify_synthesized`.
pub const DEFAULT_PRODUCT_BUDGET: usize = 4_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum SgError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("machine is missing a transition for state {state} on '{input}'")]
    MissingTransition { state: usize, input: String },
    #[error("line {line}: duplicate transition for state {state} on '{input}'")]
    DuplicateTransition {
        state: usize,
        input: String,
        line: usize,
    },
    #[error("state {state} out of range ({count} states)")]
    StateRange { state: usize, count: usize },
    #[error("emission symbol {symbol} out of range")]
    EmissionRange { symbol: usize },
    #[error("player I wins: no finite-delay strategy exists")]
    Unrealizable,
    #[error("delay mismatch: machine declares {machine}, expected {expected}")]
    DelayMismatch { machine: u64, expected: u64 },
    #[error("machine alphabets do not match the automaton")]
    AlphabetMismatch,
    #[error("emission contract violated: {detail}")]
    EmissionContract { detail: String },
    #[error("strategy machine needs more than {budget} states")]
    MachineBudget { budget: usize },
    #[error("product check needs more than {budget} nodes")]
    ProductBudget { budget: usize },
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Delay(#[from] DelayError),
}

/// Decoded meaning of a vertex in the semigroup game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SgVertex {
    /// Player I picks the profile O will answer first.
    Init,
    /// Player I picks the follow-up profile (the opening is two moves deep).
    Init2 { pending: usize },
    /// Player O answers `pending` with one of its matrices; `next` is the
    /// profile I chose in the meantime.
    Answer {
        state: StateId,
        pending: usize,
        next: usize,
    },
    /// Player I picks the next profile; the vertex carries the color O's
    /// answer emitted.
    Pick {
        state: StateId,
        next: usize,
        color: Color,
    },
}

pub struct SemigroupGame {
    arena: ParityGameArena,
    labels: Vec<SgVertex>,
    profiles: ProfileAutomaton,
    infinite: Vec<usize>,
    answers: HashMap<(StateId, usize, usize), VertexId>,
}

impl SemigroupGame {
    pub fn arena(&self) -> &ParityGameArena {
        &self.arena
    }

    pub fn initial(&self) -> VertexId {
        0
    }

    pub fn label(&self, v: VertexId) -> SgVertex {
        self.labels[v]
    }

    pub fn profiles(&self) -> &ProfileAutomaton {
        &self.profiles
    }

    /// Profile-automaton states Player I may choose (infinite language).
    pub fn infinite_profiles(&self) -> &[usize] {
        &self.infinite
    }

    pub fn answer_vertex(&self, state: StateId, pending: usize, next: usize) -> Option<VertexId> {
        self.answers.get(&(state, pending, next)).copied()
    }

    /// Recovers which matrix an O-strategy edge answers with: the first
    /// matrix of the pending profile matching the pick vertex's state and
    /// color, which is also how the builder ordered the edges.
    pub fn decode_answer(&self, answer: VertexId, pick: VertexId) -> MatrixId {
        let SgVertex::Answer { state, pending, .. } = self.labels[answer] else {
            panic!("decode_answer on a non-answer vertex");
        };
        let SgVertex::Pick {
            state: target,
            color,
            ..
        } = self.labels[pick]
        else {
            panic!("strategy target is not a pick vertex");
        };
        let monoid = self.profiles.monoid();
        self.profiles
            .profile(pending)
            .expect("pending indexes a profile state")
            .iter()
            .copied()
            .find(|&m| monoid.matrix(m).row(state) == (target, color))
            .expect("pick vertex originates from the pending profile")
    }
}

pub fn build_semigroup_game(a: &ParityAutomaton) -> SemigroupGame {
    let profiles = build_profile_automaton(a);
    let infinite = profiles.infinite_states();
    assert!(
        !infinite.is_empty(),
        "a total automaton always has an infinite profile class"
    );

    let mut index: HashMap<SgVertex, VertexId> = HashMap::new();
    let mut labels: Vec<SgVertex> = Vec::new();
    let mut answers: HashMap<(StateId, usize, usize), VertexId> = HashMap::new();
    let mut queue: VecDeque<VertexId> = VecDeque::new();

    let mut intern = |label: SgVertex,
                      labels: &mut Vec<SgVertex>,
                      queue: &mut VecDeque<VertexId>|
     -> VertexId {
        if let Some(&v) = index.get(&label) {
            return v;
        }
        let v = labels.len();
        index.insert(label, v);
        labels.push(label);
        if let SgVertex::Answer {
            state,
            pending,
            next,
        } = label
        {
            answers.insert((state, pending, next), v);
        }
        queue.push_back(v);
        v
    };

    intern(SgVertex::Init, &mut labels, &mut queue);
    let mut owners: Vec<Player> = Vec::new();
    let mut colors: Vec<Color> = Vec::new();
    let mut edges: Vec<Vec<VertexId>> = Vec::new();
    let monoid = profiles.monoid();

    while let Some(v) = queue.pop_front() {
        debug_assert_eq!(owners.len(), v);
        match labels[v] {
            SgVertex::Init => {
                owners.push(Player::I);
                colors.push(0);
                let succ = infinite
                    .iter()
                    .map(|&p| intern(SgVertex::Init2 { pending: p }, &mut labels, &mut queue))
                    .collect();
                edges.push(succ);
            }
            SgVertex::Init2 { pending } => {
                owners.push(Player::I);
                colors.push(0);
                let succ = infinite
                    .iter()
                    .map(|&next| {
                        intern(
                            SgVertex::Answer {
                                state: a.initial(),
                                pending,
                                next,
                            },
                            &mut labels,
                            &mut queue,
                        )
                    })
                    .collect();
                edges.push(succ);
            }
            SgVertex::Answer {
                state,
                pending,
                next,
            } => {
                owners.push(Player::O);
                colors.push(0);
                let mut succ: Vec<VertexId> = Vec::new();
                for &m in profiles.profile(pending).expect("profile state") {
                    let (target, color) = monoid.matrix(m).row(state);
                    let pick = intern(
                        SgVertex::Pick {
                            state: target,
                            next,
                            color,
                        },
                        &mut labels,
                        &mut queue,
                    );
                    if !succ.contains(&pick) {
                        succ.push(pick);
                    }
                }
                edges.push(succ);
            }
            SgVertex::Pick { state, next, color } => {
                owners.push(Player::I);
                colors.push(color);
                let succ = infinite
                    .iter()
                    .map(|&p| {
                        intern(
                            SgVertex::Answer {
                                state,
                                pending: next,
                                next: p,
                            },
                            &mut labels,
                            &mut queue,
                        )
                    })
                    .collect();
                edges.push(succ);
            }
        }
    }

    let arena = ParityGameArena::new(owners, colors, edges)
        .expect("every semigroup game vertex has a move");
    SemigroupGame {
        arena,
        labels,
        profiles,
        infinite,
        answers,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDelayVerdict {
    pub winner: Player,
    pub n_prime: usize,
    pub d_prime: usize,
    pub monoid_size: usize,
    /// 2·n′−1 when Player O wins, None otherwise.
    pub bound: Option<u64>,
}

/// Decides whether Player O wins with some finite constant delay. The
/// positive answer comes with the delay bound 2·n′−1.
pub fn decide_finite_delay(a: &ParityAutomaton) -> FiniteDelayVerdict {
    let game = build_semigroup_game(a);
    let solution = paritygame::solve(game.arena());
    verdict_of(&game, &solution)
}

fn verdict_of(game: &SemigroupGame, solution: &Solution) -> FiniteDelayVerdict {
    let winner = solution.winner(game.initial());
    let n_prime = game.profiles().n_prime();
    FiniteDelayVerdict {
        winner,
        n_prime,
        d_prime: game.profiles().d_prime(),
        monoid_size: game.profiles().monoid().len(),
        bound: (winner == Player::O).then(|| 2 * n_prime as u64 - 1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Emission {
    Wait,
    Letter(SymbolId),
}

/// A finite-state constant-delay strategy for Player O: one transition per
/// (state, input letter), each emitting either an output letter or a wait.
/// On every input stream the machine waits for exactly the first `delay`
/// letters and emits on every letter after that.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyMachine {
    delay: u64,
    input: Alphabet,
    output: Alphabet,
    state_count: usize,
    initial: usize,
    transitions: Vec<(usize, Emission)>,
}

impl StrategyMachine {
    pub fn new(
        delay: u64,
        input: Alphabet,
        output: Alphabet,
        state_count: usize,
        initial: usize,
        transitions: Vec<(usize, Emission)>,
    ) -> Result<Self, SgError> {
        assert_eq!(
            transitions.len(),
            state_count * input.len(),
            "one transition per state and input letter"
        );
        if initial >= state_count {
            return Err(SgError::StateRange {
                state: initial,
                count: state_count,
            });
        }
        for &(target, emission) in &transitions {
            if target >= state_count {
                return Err(SgError::StateRange {
                    state: target,
                    count: state_count,
                });
            }
            if let Emission::Letter(b) = emission {
                if b >= output.len() {
                    return Err(SgError::EmissionRange { symbol: b });
                }
            }
        }
        Ok(StrategyMachine {
            delay,
            input,
            output,
            state_count,
            initial,
            transitions,
        })
    }

    pub fn delay(&self) -> u64 {
        self.delay
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn step(&self, state: usize, input: SymbolId) -> (usize, Emission) {
        self.transitions[state * self.input.len() + input]
    }

    /// Feeds a finite input word from the initial state, collecting the
    /// emission of every step.
    pub fn run(&self, inputs: &[SymbolId]) -> Vec<Emission> {
        let mut state = self.initial;
        inputs
            .iter()
            .map(|&a| {
                let (next, emission) = self.step(state, a);
                state = next;
                emission
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        out.push_str("strategy\n");
        let _ = writeln!(out, "delay: {}", self.delay);
        let _ = writeln!(out, "in: {}", self.input.symbols().join(" "));
        let _ = writeln!(out, "out: {}", self.output.symbols().join(" "));
        let _ = writeln!(out, "states: {}", self.state_count);
        let _ = writeln!(out, "init: {}", self.initial);
        for state in 0..self.state_count {
            for a in self.input.ids() {
                let (target, emission) = self.step(state, a);
                let em = match emission {
                    Emission::Wait => "-",
                    Emission::Letter(b) => self.output.symbol(b),
                };
                let _ = writeln!(
                    out,
                    "{state} {} -> {target} / {em}",
                    self.input.symbol(a)
                );
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self, SgError> {
        let mut r = LineReader::new(text);
        r.expect_literal("strategy")?;
        let (line_d, d_str) = r.expect_keyed("delay")?;
        let delay: u64 = d_str.parse().map_err(|_| SgError::Syntax {
            line: line_d,
            msg: format!("invalid delay '{d_str}'"),
        })?;
        let (_, in_line) = r.expect_keyed("in")?;
        let input = Alphabet::new(in_line.split_whitespace())?;
        let (_, out_line) = r.expect_keyed("out")?;
        let output = Alphabet::new(out_line.split_whitespace())?;
        let (line_k, k_str) = r.expect_keyed("states")?;
        let state_count = parse_count(line_k, k_str, "state count")?;
        if state_count == 0 {
            return Err(SgError::Syntax {
                line: line_k,
                msg: "need at least one state".into(),
            });
        }
        let (line_i, i_str) = r.expect_keyed("init")?;
        let initial = parse_count(line_i, i_str, "initial state")?;

        let mut slots: Vec<Option<(usize, Emission)>> = vec![None; state_count * input.len()];
        loop {
            let Some((line_no, line)) = r.next() else {
                return Err(syntax(
                    r.last_line_number() + 1,
                    "expected a transition or 'end', found end of file",
                )
                .into());
            };
            if line == "end" {
                break;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 6 || tokens[2] != "->" || tokens[4] != "/" {
                return Err(SgError::Syntax {
                    line: line_no,
                    msg: "expected '<src> <in> -> <dst> / <emission>'".into(),
                });
            }
            let src: usize = tokens[0].parse().map_err(|_| SgError::Syntax {
                line: line_no,
                msg: format!("invalid state '{}'", tokens[0]),
            })?;
            if src >= state_count {
                return Err(SgError::Syntax {
                    line: line_no,
                    msg: format!("state {src} out of range ({state_count} states)"),
                });
            }
            let a = input.id_of(tokens[1]).ok_or_else(|| SgError::Syntax {
                line: line_no,
                msg: format!("unknown input symbol '{}'", tokens[1]),
            })?;
            let dst: usize = tokens[3].parse().map_err(|_| SgError::Syntax {
                line: line_no,
                msg: format!("invalid state '{}'", tokens[3]),
            })?;
            let emission = if tokens[5] == "-" {
                Emission::Wait
            } else {
                Emission::Letter(output.id_of(tokens[5]).ok_or_else(|| SgError::Syntax {
                    line: line_no,
                    msg: format!("unknown output symbol '{}'", tokens[5]),
                })?)
            };
            let slot = src * input.len() + a;
            if slots[slot].is_some() {
                return Err(SgError::DuplicateTransition {
                    state: src,
                    input: tokens[1].to_string(),
                    line: line_no,
                });
            }
            slots[slot] = Some((dst, emission));
        }
        if let Some((line_no, line)) = r.next() {
            return Err(syntax(line_no, format!("unexpected content after 'end': '{line}'")).into());
        }
        let mut transitions = Vec::with_capacity(slots.len());
        for (i, slot) in slots.iter().enumerate() {
            match slot {
                Some(t) => transitions.push(*t),
                None => {
                    return Err(SgError::MissingTransition {
                        state: i / input.len(),
                        input: input.symbol(i % input.len()).to_string(),
                    })
                }
            }
        }
        StrategyMachine::new(delay, input, output, state_count, initial, transitions)
    }
}

/// Synthesizes a constant-delay machine for Player O, or reports that
/// Player I wins. Blocks of n′ input letters give the advertised delay
/// 2n′−1; when that machine would blow the state budget the block length
/// falls back to d′+1 (the shortest length for which every block lies in an
/// infinite profile class), shrinking the delay along with the machine.
pub fn synthesize_constant_delay_strategy(
    a: &ParityAutomaton,
) -> Result<StrategyMachine, SgError> {
    synthesize_with_budget(a, DEFAULT_MACHINE_BUDGET)
}

pub fn synthesize_with_budget(
    a: &ParityAutomaton,
    budget: usize,
) -> Result<StrategyMachine, SgError> {
    let game = build_semigroup_game(a);
    let solution = paritygame::solve(game.arena());
    if solution.winner(game.initial()) == Player::I {
        return Err(SgError::Unrealizable);
    }
    let n_prime = game.profiles().n_prime();
    let shortest = game.profiles().d_prime() + 1;
    let mut blocks = vec![n_prime];
    if shortest != n_prime {
        blocks.push(shortest);
    }
    for (i, &block) in blocks.iter().enumerate() {
        let last = i + 1 == blocks.len();
        // A cheap overestimate decides whether attempting this block length
        // is worthwhile at all; the interning cap below is authoritative.
        if !last && machine_state_estimate(a, block) > (budget as u128).saturating_mul(16) {
            continue;
        }
        match build_machine(a, &game, &solution, block, budget) {
            Err(SgError::MachineBudget { .. }) if !last => continue,
            result => return result,
        }
    }
    unreachable!("the final block length either builds or reports its error")
}

fn machine_state_estimate(a: &ParityAutomaton, block: usize) -> u128 {
    if block > 96 {
        return u128::MAX;
    }
    let n = a.state_count() as u128;
    let s = a.input().len() as u128;
    let t = a.output().len() as u128;
    let prev = s.checked_pow(block as u32).unwrap_or(u128::MAX);
    let mut mid: u128 = 0;
    for c in 0..block {
        let cur = s.checked_pow(c as u32).unwrap_or(u128::MAX);
        let queue = t.checked_pow((block - 1 - c) as u32).unwrap_or(u128::MAX);
        mid = mid.saturating_add(cur.saturating_mul(queue));
    }
    n.saturating_mul(prev).saturating_mul(mid)
}

#[derive(Debug, Clone)]
struct MachineState {
    q: StateId,
    prev: Option<Vec<SymbolId>>,
    cur: Vec<SymbolId>,
    emit: VecDeque<SymbolId>,
}

fn encode_state(st: &MachineState) -> Vec<u32> {
    let mut key = Vec::with_capacity(
        4 + st.prev.as_ref().map_or(0, Vec::len) + st.cur.len() + st.emit.len(),
    );
    key.push(st.q as u32);
    match &st.prev {
        None => key.push(0),
        Some(p) => {
            key.push(1);
            key.extend(p.iter().map(|&l| l as u32));
        }
    }
    key.push(st.cur.len() as u32);
    key.extend(st.cur.iter().map(|&l| l as u32));
    key.extend(st.emit.iter().map(|&l| l as u32));
    key
}

fn decode_state(key: &[u32], block: usize) -> MachineState {
    let q = key[0] as StateId;
    let mut at = 1;
    let prev = if key[at] == 0 {
        at += 1;
        None
    } else {
        at += 1;
        let p: Vec<SymbolId> = key[at..at + block].iter().map(|&l| l as SymbolId).collect();
        at += block;
        Some(p)
    };
    let cur_len = key[at] as usize;
    at += 1;
    let cur: Vec<SymbolId> = key[at..at + cur_len].iter().map(|&l| l as SymbolId).collect();
    at += cur_len;
    let emit: VecDeque<SymbolId> = key[at..].iter().map(|&l| l as SymbolId).collect();
    MachineState { q, prev, cur, emit }
}

fn build_machine(
    a: &ParityAutomaton,
    game: &SemigroupGame,
    solution: &Solution,
    block: usize,
    budget: usize,
) -> Result<StrategyMachine, SgError> {
    let profiles = game.profiles();
    let monoid = profiles.monoid();
    let letters = a.input().len();

    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut keys: Vec<Vec<u32>> = Vec::new();
    let mut intern = |st: &MachineState, keys: &mut Vec<Vec<u32>>| -> Result<usize, SgError> {
        let key = encode_state(st);
        if let Some(&id) = index.get(&key) {
            return Ok(id);
        }
        let id = keys.len();
        if id >= budget {
            return Err(SgError::MachineBudget { budget });
        }
        index.insert(key.clone(), id);
        keys.push(key);
        Ok(id)
    };

    let start = MachineState {
        q: a.initial(),
        prev: None,
        cur: Vec::new(),
        emit: VecDeque::new(),
    };
    intern(&start, &mut keys)?;

    let mut transitions: Vec<(usize, Emission)> = Vec::new();
    let mut at = 0;
    while at < keys.len() {
        let base = decode_state(&keys[at], block);
        at += 1;
        for letter in 0..letters {
            let mut st = base.clone();
            st.cur.push(letter);
            if st.cur.len() == block {
                let finished = std::mem::take(&mut st.cur);
                match st.prev.take() {
                    None => st.prev = Some(finished),
                    Some(pending) => {
                        let p_pending = profiles
                            .state_on_word(&pending)
                            .expect("block letters are alphabet ids");
                        let p_next = profiles
                            .state_on_word(&finished)
                            .expect("block letters are alphabet ids");
                        let answer = game
                            .answer_vertex(st.q, p_pending, p_next)
                            .expect("tracked play stays on game vertices");
                        let pick = solution
                            .strategy(answer)
                            .expect("tracked play stays in O's winning region");
                        let matrix = monoid.matrix(game.decode_answer(answer, pick));
                        let outputs = find_matching_output(a, &pending, matrix)
                            .expect("block letters are alphabet ids")
                            .expect("answers come from the pending block's profile");
                        st.emit.extend(outputs);
                        st.q = matrix.row(st.q).0;
                        st.prev = Some(finished);
                    }
                }
            }
            let emission = match st.emit.pop_front() {
                Some(b) => Emission::Letter(b),
                None => Emission::Wait,
            };
            let next = intern(&st, &mut keys)?;
            transitions.push((next, emission));
        }
    }

    StrategyMachine::new(
        2 * block as u64 - 1,
        a.input().clone(),
        a.output().clone(),
        keys.len(),
        0,
        transitions,
    )
}

/// Checks a machine against the fixed-delay game it claims to win: the
/// product of delay-game positions with machine states is deterministic on
/// O's side, so the machine is correct iff every reachable cycle has an
/// even maximum color. Also enforces the emission contract along the way.
pub fn verify_synthesized(
    a: &ParityAutomaton,
    machine: &StrategyMachine,
    delay: u64,
) -> Result<bool, SgError> {
    verify_synthesized_with_budget(a, machine, delay, DEFAULT_PRODUCT_BUDGET)
}

pub fn verify_synthesized_with_budget(
    a: &ParityAutomaton,
    machine: &StrategyMachine,
    delay: u64,
    budget: usize,
) -> Result<bool, SgError> {
    if machine.delay() != delay {
        return Err(SgError::DelayMismatch {
            machine: machine.delay(),
            expected: delay,
        });
    }
    if machine.input() != a.input() || machine.output() != a.output() {
        return Err(SgError::AlphabetMismatch);
    }
    let spec = DelaySpec::fixed_delay(delay);
    let stepper = Stepper::new(a, &spec);

    type Node = (crate::delaygame::Position, usize);
    let mut index: HashMap<Node, usize> = HashMap::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut intern = |node: Node, nodes: &mut Vec<Node>| -> Result<usize, SgError> {
        if let Some(&id) = index.get(&node) {
            return Ok(id);
        }
        let id = nodes.len();
        if id >= budget {
            return Err(SgError::ProductBudget { budget });
        }
        index.insert(node.clone(), id);
        nodes.push(node);
        Ok(id)
    };

    intern((stepper.initial(), machine.initial()), &mut nodes)?;
    let mut colors: Vec<Color> = Vec::new();
    let mut edges: Vec<Vec<VertexId>> = Vec::new();
    let mut at = 0;
    while at < nodes.len() {
        let (position, m_state) = nodes[at].clone();
        at += 1;
        colors.push(stepper.vertex_color(&position));
        let mut succ = Vec::with_capacity(a.input().len());
        for letter in a.input().ids() {
            let appended = stepper.append(&position, letter);
            let (m_next, emission) = machine.step(m_state, letter);
            let next = if appended.appends_left == 0 {
                let Emission::Letter(b) = emission else {
                    return Err(SgError::EmissionContract {
                        detail: format!(
                            "machine waits when an output is due (machine state {m_state})"
                        ),
                    });
                };
                let (consumed, _) = stepper.consume(&appended, b);
                (consumed, m_next)
            } else {
                if let Emission::Letter(_) = emission {
                    return Err(SgError::EmissionContract {
                        detail: format!(
                            "machine emits during the waiting phase (machine state {m_state})"
                        ),
                    });
                }
                (appended, m_next)
            };
            succ.push(intern(next, &mut nodes)?);
        }
        edges.push(succ);
    }

    let owners = vec![Player::I; nodes.len()];
    let product = ParityGameArena::new(owners, colors, edges)
        .expect("product nodes always have successors");
    let empty = vec![None; product.vertex_count()];
    Ok(paritygame::verify_positional_strategy(&product, Player::O, &empty, 0)
        .expect("player O owns no product vertex"))
}

/// Converts a winning oracle solution into a strategy machine with the same
/// delay: machine states are the arena's Player-I vertices inside the
/// winning region, and O's consumptions happen eagerly after the append
/// that completes a round.
pub fn machine_from_oracle(
    a: &ParityAutomaton,
    solved: &FixedDelaySolution,
) -> Result<StrategyMachine, SgError> {
    if solved.winner() != Player::O {
        return Err(SgError::Unrealizable);
    }
    let arena = solved.arena();
    let spec = arena.spec();
    assert!(
        spec.head().len() <= 1 && spec.tail() == 1,
        "constant-delay machines need a fixed-delay arena"
    );
    let delay = spec.f(0) - 1;
    let solution = solved.solution();
    let game = arena.arena();

    let mut index: HashMap<VertexId, usize> = HashMap::new();
    let mut order: Vec<VertexId> = Vec::new();
    let mut intern = |v: VertexId, order: &mut Vec<VertexId>| -> usize {
        *index.entry(v).or_insert_with(|| {
            order.push(v);
            order.len() - 1
        })
    };

    intern(arena.initial(), &mut order);
    let mut transitions: Vec<(usize, Emission)> = Vec::new();
    let mut at = 0;
    while at < order.len() {
        let v = order[at];
        at += 1;
        debug_assert!(arena.position(v).is_input_turn());
        for letter in a.input().ids() {
            let edge = arena
                .edge_for_letter(v, letter)
                .expect("input vertices offer every input letter");
            let appended = game.successors(v)[edge];
            let (next_vertex, emission) = if arena.position(appended).is_input_turn() {
                (appended, Emission::Wait)
            } else {
                let target = solution
                    .strategy(appended)
                    .expect("winning O vertices carry a strategy");
                let b = arena
                    .letter_for_target(appended, target)
                    .expect("strategy edges decode to letters");
                (target, Emission::Letter(b))
            };
            let next = intern(next_vertex, &mut order);
            transitions.push((next, emission));
        }
    }

    StrategyMachine::new(
        delay,
        a.input().clone(),
        a.output().clone(),
        order.len(),
        0,
        transitions,
    )
}

/// Plays a strategy machine inside `simulate_play`: buffered emissions come
/// out one per round, and any violation of the wait/emit contract poisons
/// the adapter so the simulator reports the strategy as undefined.
pub struct MachineOutputAdapter<'a> {
    machine: &'a StrategyMachine,
    state: usize,
    fed: usize,
    queue: VecDeque<SymbolId>,
    broken: bool,
}

impl<'a> MachineOutputAdapter<'a> {
    pub fn new(machine: &'a StrategyMachine) -> Self {
        MachineOutputAdapter {
            machine,
            state: machine.initial(),
            fed: 0,
            queue: VecDeque::new(),
            broken: false,
        }
    }
}

impl crate::delaygame::OutputStrategy for MachineOutputAdapter<'_> {
    fn next_output(&mut self, view: &crate::delaygame::PlayView<'_>) -> Option<SymbolId> {
        if self.broken {
            return None;
        }
        while self.fed < view.inputs.len() {
            let a = view.inputs[self.fed];
            let (next, emission) = self.machine.step(self.state, a);
            self.state = next;
            self.fed += 1;
            let waiting = (self.fed as u64) <= self.machine.delay();
            match emission {
                Emission::Wait if waiting => {}
                Emission::Letter(b) if !waiting => self.queue.push_back(b),
                _ => {
                    self.broken = true;
                    return None;
                }
            }
        }
        self.queue.pop_front()
    }

    fn fingerprint(&self) -> Option<u64> {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.state.hash(&mut h);
        self.queue.hash(&mut h);
        Some(h.finish())
    }
}

#[cfg(test)]
mod tests {
    use num_bigint::BigUint;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::automata::tests::copy_dpa;
    use crate::delaygame::{simulate_play, solve_fixed_delay, InputStrategy, PlayView};

    const PREDICT_TEXT: &str = include_str!("../fixtures/predict.dpa");
    const INFONES_TEXT: &str = include_str!("../fixtures/infones.dpa");

    fn predict() -> ParityAutomaton {
        ParityAutomaton::parse(PREDICT_TEXT).expect("fixture parses")
    }

    fn infones() -> ParityAutomaton {
        ParityAutomaton::parse(INFONES_TEXT).expect("fixture parses")
    }

    struct Alternate(usize);

    impl InputStrategy for Alternate {
        fn next_input(&mut self, _: &PlayView<'_>) -> Option<SymbolId> {
            self.0 += 1;
            Some(self.0 % 2)
        }
        fn fingerprint(&self) -> Option<u64> {
            Some((self.0 % 2) as u64)
        }
    }

    #[test]
    fn copy_game_has_the_expected_shape() {
        let a = copy_dpa();
        let game = build_semigroup_game(&a);
        assert_eq!(game.arena().vertex_count(), 7);
        assert_eq!(game.infinite_profiles(), &[2]);
        assert_eq!(game.label(game.initial()), SgVertex::Init);
        assert_eq!(game.label(1), SgVertex::Init2 { pending: 2 });
        assert_eq!(
            game.label(2),
            SgVertex::Answer {
                state: 0,
                pending: 2,
                next: 2
            }
        );
        for v in 0..game.arena().vertex_count() {
            match game.label(v) {
                SgVertex::Pick { color, .. } => {
                    assert_eq!(game.arena().color(v), color);
                    assert_eq!(game.arena().owner(v), Player::I);
                }
                SgVertex::Answer { .. } => {
                    assert_eq!(game.arena().color(v), 0);
                    assert_eq!(game.arena().owner(v), Player::O);
                }
                SgVertex::Init | SgVertex::Init2 { .. } => {
                    assert_eq!(game.arena().color(v), 0);
                    assert_eq!(game.arena().owner(v), Player::I);
                }
            }
        }
    }

    #[test]
    fn copy_is_decided_for_o_with_bound_five() {
        let verdict = decide_finite_delay(&copy_dpa());
        assert_eq!(
            verdict,
            FiniteDelayVerdict {
                winner: Player::O,
                n_prime: 3,
                d_prime: 1,
                monoid_size: 3,
                bound: Some(5),
            }
        );
    }

    #[test]
    fn the_winning_answer_at_the_opening_keeps_the_run_even() {
        let game = build_semigroup_game(&copy_dpa());
        let solution = paritygame::solve(game.arena());
        let answer = game.answer_vertex(0, 2, 2).expect("opening answer vertex");
        let pick = solution.strategy(answer).expect("O wins the opening");
        // only the diagonal matrix keeps the run in the even state, so the
        // winning strategy has no other choice
        assert_eq!(game.decode_answer(answer, pick), 0);
    }

    #[test]
    fn ones_checker_is_decided_for_i() {
        let verdict = decide_finite_delay(&infones());
        assert_eq!(verdict.winner, Player::I);
        assert_eq!(verdict.bound, None);
        assert!(matches!(
            synthesize_constant_delay_strategy(&infones()),
            Err(SgError::Unrealizable)
        ));
    }

    #[test]
    fn copy_synthesis_gives_a_delay_five_machine() {
        let a = copy_dpa();
        let machine = synthesize_constant_delay_strategy(&a).expect("O wins");
        assert_eq!(machine.delay(), 5);
        assert!(verify_synthesized(&a, &machine, 5).unwrap());
        assert_eq!(
            verify_synthesized(&a, &machine, 4),
            Err(SgError::DelayMismatch {
                machine: 5,
                expected: 4
            })
        );
    }

    #[test]
    fn synthesis_falls_back_when_the_budget_is_tight() {
        let a = copy_dpa();
        // too small for three-letter blocks, comfortable for two-letter ones
        let machine = synthesize_with_budget(&a, 50).expect("fallback fits");
        assert_eq!(machine.delay(), 3);
        assert!(verify_synthesized(&a, &machine, 3).unwrap());
    }

    #[test]
    fn machine_emissions_respect_the_delay_contract() {
        let a = copy_dpa();
        let machine = synthesize_constant_delay_strategy(&a).expect("O wins");
        let d = machine.delay() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let inputs: Vec<SymbolId> = (0..3 * d).map(|_| rng.gen_range(0..2)).collect();
            let emissions = machine.run(&inputs);
            assert_eq!(emissions.len(), 3 * d);
            for (i, e) in emissions.iter().enumerate() {
                if i < d {
                    assert_eq!(*e, Emission::Wait);
                } else {
                    assert!(matches!(e, Emission::Letter(_)));
                }
            }
        }
    }

    #[test]
    fn machine_text_round_trips() {
        let machine = synthesize_constant_delay_strategy(&copy_dpa()).expect("O wins");
        let text = machine.to_text();
        let back = StrategyMachine::parse(&text).expect("own output parses");
        assert_eq!(back, machine);
    }

    #[test]
    fn machine_parse_reports_errors() {
        let good = "strategy\ndelay: 0\nin: 0 1\nout: 0 1\nstates: 1\ninit: 0\n\
                    0 0 -> 0 / 0\n0 1 -> 0 / 1\nend\n";
        assert!(StrategyMachine::parse(good).is_ok());

        let dup = "strategy\ndelay: 0\nin: 0 1\nout: 0 1\nstates: 1\ninit: 0\n\
                   0 0 -> 0 / 0\n0 0 -> 0 / 1\n0 1 -> 0 / 1\nend\n";
        assert_eq!(
            StrategyMachine::parse(dup).unwrap_err(),
            SgError::DuplicateTransition {
                state: 0,
                input: "0".into(),
                line: 8
            }
        );

        let missing = "strategy\ndelay: 0\nin: 0 1\nout: 0 1\nstates: 1\ninit: 0\n\
                       0 0 -> 0 / 0\nend\n";
        assert_eq!(
            StrategyMachine::parse(missing).unwrap_err(),
            SgError::MissingTransition {
                state: 0,
                input: "1".into()
            }
        );

        let arrow = "strategy\ndelay: 0\nin: 0\nout: 0\nstates: 1\ninit: 0\n\
                     0 0 => 0 / 0\nend\n";
        assert!(matches!(
            StrategyMachine::parse(arrow).unwrap_err(),
            SgError::Syntax { line: 7, .. }
        ));

        let symbol = "strategy\ndelay: 0\nin: 0\nout: 0\nstates: 1\ninit: 0\n\
                      0 0 -> 0 / 2\nend\n";
        assert!(matches!(
            StrategyMachine::parse(symbol).unwrap_err(),
            SgError::Syntax { line: 7, .. }
        ));

        let trailing = "strategy\ndelay: 0\nin: 0\nout: 0\nstates: 1\ninit: 0\n\
                        0 0 -> 0 / 0\nend\nextra\n";
        assert!(matches!(
            StrategyMachine::parse(trailing).unwrap_err(),
            SgError::Automaton(AutomatonError::Syntax { .. })
        ));

        let reserved = "strategy\ndelay: 0\nin: 0\nout: -\nstates: 1\ninit: 0\n\
                        0 0 -> 0 / 0\nend\n";
        assert!(matches!(
            StrategyMachine::parse(reserved).unwrap_err(),
            SgError::Automaton(AutomatonError::InvalidSymbol { .. })
        ));
    }

    #[test]
    fn machine_construction_validates_targets_and_emissions() {
        let a = copy_dpa();
        assert_eq!(
            StrategyMachine::new(
                0,
                a.input().clone(),
                a.output().clone(),
                1,
                0,
                vec![(1, Emission::Letter(0)), (0, Emission::Letter(1))],
            )
            .unwrap_err(),
            SgError::StateRange { state: 1, count: 1 }
        );
        assert_eq!(
            StrategyMachine::new(
                0,
                a.input().clone(),
                a.output().clone(),
                1,
                0,
                vec![(0, Emission::Letter(7)), (0, Emission::Letter(1))],
            )
            .unwrap_err(),
            SgError::EmissionRange { symbol: 7 }
        );
        assert_eq!(
            StrategyMachine::new(
                0,
                a.input().clone(),
                a.output().clone(),
                1,
                5,
                vec![(0, Emission::Letter(0)), (0, Emission::Letter(1))],
            )
            .unwrap_err(),
            SgError::StateRange { state: 5, count: 1 }
        );
    }

    #[test]
    fn handwritten_machines_verify_by_behavior() {
        let a = copy_dpa();
        let copy = StrategyMachine::new(
            0,
            a.input().clone(),
            a.output().clone(),
            1,
            0,
            vec![(0, Emission::Letter(0)), (0, Emission::Letter(1))],
        )
        .unwrap();
        assert!(verify_synthesized(&a, &copy, 0).unwrap());

        let flip = StrategyMachine::new(
            0,
            a.input().clone(),
            a.output().clone(),
            1,
            0,
            vec![(0, Emission::Letter(1)), (0, Emission::Letter(0))],
        )
        .unwrap();
        assert!(!verify_synthesized(&a, &flip, 0).unwrap());
    }

    #[test]
    fn emission_contract_violations_are_reported() {
        let a = copy_dpa();
        let lazy = StrategyMachine::new(
            0,
            a.input().clone(),
            a.output().clone(),
            1,
            0,
            vec![(0, Emission::Wait), (0, Emission::Wait)],
        )
        .unwrap();
        assert!(matches!(
            verify_synthesized(&a, &lazy, 0),
            Err(SgError::EmissionContract { .. })
        ));

        let eager = StrategyMachine::new(
            1,
            a.input().clone(),
            a.output().clone(),
            1,
            0,
            vec![(0, Emission::Letter(0)), (0, Emission::Letter(1))],
        )
        .unwrap();
        assert!(matches!(
            verify_synthesized(&a, &eager, 1),
            Err(SgError::EmissionContract { .. })
        ));
    }

    #[test]
    fn alphabet_mismatches_are_reported() {
        let a = copy_dpa();
        let ternary = Alphabet::new(["0", "1", "2"]).unwrap();
        let machine = StrategyMachine::new(
            0,
            ternary,
            a.output().clone(),
            1,
            0,
            vec![
                (0, Emission::Letter(0)),
                (0, Emission::Letter(1)),
                (0, Emission::Letter(0)),
            ],
        )
        .unwrap();
        assert_eq!(
            verify_synthesized(&a, &machine, 0),
            Err(SgError::AlphabetMismatch)
        );
    }

    #[test]
    fn oracle_solutions_convert_to_machines() {
        let a = copy_dpa();
        let solved = solve_fixed_delay(&a, 0).unwrap();
        assert_eq!(solved.winner(), Player::O);
        let machine = machine_from_oracle(&a, &solved).expect("O wins at delay 0");
        assert_eq!(machine.delay(), 0);
        assert!(verify_synthesized(&a, &machine, 0).unwrap());

        let b = infones();
        let lost = solve_fixed_delay(&b, 1).unwrap();
        assert_eq!(lost.winner(), Player::I);
        assert!(matches!(
            machine_from_oracle(&b, &lost),
            Err(SgError::Unrealizable)
        ));
    }

    #[test]
    fn machine_adapter_wins_simulated_plays() {
        let a = copy_dpa();
        let machine = synthesize_constant_delay_strategy(&a).expect("O wins");
        let spec = DelaySpec::fixed_delay(machine.delay());
        let mut input = Alternate(0);
        let mut output = MachineOutputAdapter::new(&machine);
        let outcome = simulate_play(&a, &spec, &mut input, &mut output, 4096).unwrap();
        assert_eq!(outcome.verdict, Some(Player::O));
    }

    #[test]
    fn prediction_fixture_decides_for_o_and_synthesizes_a_short_machine() {
        let a = predict();
        let verdict = decide_finite_delay(&a);
        assert_eq!(verdict.winner, Player::O);
        assert_eq!(verdict.d_prime, 3);
        let machine = synthesize_constant_delay_strategy(&a).expect("O wins");
        assert_eq!(machine.delay(), 2 * (verdict.d_prime as u64 + 1) - 1);
        assert!(machine.delay() <= verdict.bound.unwrap());
        assert!(verify_synthesized(&a, &machine, machine.delay()).unwrap());
    }

    #[test]
    fn prediction_fixture_oracle_machine_wins_at_delay_three() {
        let a = predict();
        let solved = solve_fixed_delay(&a, 3).unwrap();
        assert_eq!(solved.winner(), Player::O);
        let machine = machine_from_oracle(&a, &solved).expect("O wins at delay 3");
        assert_eq!(machine.delay(), 3);
        assert!(verify_synthesized(&a, &machine, 3).unwrap());

        let spec = DelaySpec::fixed_delay(3);
        let mut input = Alternate(0);
        let mut output = MachineOutputAdapter::new(&machine);
        let outcome = simulate_play(&a, &spec, &mut input, &mut output, 4096).unwrap();
        assert_eq!(outcome.verdict, Some(Player::O));
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

        #[test]
        fn decision_agrees_with_the_oracle_and_machines_verify(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = crate::cli::xcheck::random_dpa(&mut rng, 3, 3);
            let gate = crate::monoid::try_build_profile_automaton(&a, 512);
            prop_assume!(gate.is_some_and(|pa| pa.n_prime() <= 4));
            let game = build_semigroup_game(&a);
            let solution = paritygame::solve(game.arena());
            let verdict = verdict_of(&game, &solution);

            let p = game.infinite_profiles().len();
            let n = a.state_count();
            let m = a.max_color();
            let count = game.arena().vertex_count();
            prop_assert!(count <= (1 + p) + n * p * p + n * p * (m + 1));
            if p >= 2 && m >= 1 {
                prop_assert!(count <= p * p * n * (m + 1) + 1 + p);
            }
            let pow = BigUint::from((m + 1) * n).pow(n as u32) * 2u32;
            if let Ok(e) = u32::try_from(&pow) {
                if e <= 1_000_000 {
                    let cap = BigUint::from(2u32).pow(e) * ((m + 1) * n);
                    prop_assert!(BigUint::from(count) <= cap);
                }
            }

            if verdict.winner == Player::O {
                let d = verdict.bound.unwrap();
                let solved = solve_fixed_delay(&a, d).expect("bound-sized arena fits");
                prop_assert_eq!(solved.winner(), Player::O);
                let machine = synthesize_constant_delay_strategy(&a).unwrap();
                prop_assert!(verify_synthesized(&a, &machine, machine.delay()).unwrap());
            } else {
                for d in [0u64, 3] {
                    prop_assert_eq!(solve_fixed_delay(&a, d).unwrap().winner(), Player::I);
                }
            }
        }
    }
}
