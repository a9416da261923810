//! The algebraic machinery behind the delay decision procedure.
//!
//! Every block of paired letters `(u/v)` acts on the automaton as a *color
//! matrix*: row `p` records which state the block leads to from `p` and the
//! maximum color entered along the way. Matrices multiply in the semiring
//! `{⊥} ∪ {0..m}` (join = max, ⊥ absorbing), and because the automaton is
//! deterministic each row has exactly one non-⊥ entry — so a matrix is stored
//! as one `(target, color)` pair per row and multiplication is linear in the
//! number of states.
//!
//! On top of the matrices sit:
//! - the finite monoid they generate (all matrices realized by nonempty
//!   blocks),
//! - per-word *profiles* — the set of matrices realizable over a fixed input
//!   word by varying the output word — and the deterministic profile
//!   automaton over input letters whose states are those profiles,
//! - recognizers for single matrix classes (`class_automaton`,
//!   `tracking_automaton`),
//! - `find_matching_output`, which materializes a concrete output word
//!   hitting a requested matrix without enumerating all outputs.

use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use thiserror::Error;

use crate::automata::{Alphabet, Color, FiniteAutomaton, ParityAutomaton, StateId, SymbolId};

pub type MatrixId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MonoidError {
    #[error("state {state} out of range (automaton has {count} states)")]
    StateRange { state: usize, count: usize },
    #[error("color {color} is not used by any state")]
    UnusedColor { color: Color },
    #[error("symbol #{symbol} out of range")]
    SymbolRange { symbol: usize },
    #[error("matrix dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("paired words must have equal length, got |u|={input}, |v|={output}")]
    LengthMismatch { input: usize, output: usize },
    #[error("the empty word has no matrix")]
    EmptyWord,
    #[error("matrix is not realized by any word pair")]
    Unrealized,
}

/// Join of two colors along a composed path.
///
/// Normally `max`. Setting `DELAYG_MUTATE=semiring-join` in the environment
/// deliberately corrupts this to `min` so the cross-check harness can
/// demonstrate that its oracle comparisons actually catch implementation
/// bugs (the fixed-delay oracle never multiplies matrices, so a corrupted
/// join shows up as verdict mismatches). Never set it otherwise.
fn semiring_join(x: Color, y: Color) -> Color {
    static MUTATED: OnceLock<bool> = OnceLock::new();
    let mutated = *MUTATED.get_or_init(|| {
        std::env::var_os("DELAYG_MUTATE").is_some_and(|v| v == "semiring-join")
    });
    if mutated {
        x.min(y)
    } else {
        x.max(y)
    }
}

/// Matrix of one block's action: row `p` holds the state reached from `p`
/// and the maximum color entered on the way (the source state's own color is
/// not counted). Derived ordering gives a canonical enumeration order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColorMatrix {
    rows: Vec<(StateId, Color)>,
}

impl ColorMatrix {
    pub fn from_rows(rows: Vec<(StateId, Color)>) -> Self {
        ColorMatrix { rows }
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    /// The unique non-⊥ entry of row `p` as (target state, color).
    pub fn row(&self, p: StateId) -> (StateId, Color) {
        self.rows[p]
    }

    /// Entry (p,q): the color if q is row p's target, ⊥ (None) otherwise.
    pub fn entry(&self, p: StateId, q: StateId) -> Option<Color> {
        let (target, color) = self.rows[p];
        (target == q).then_some(color)
    }

    pub fn mul(&self, other: &ColorMatrix) -> Result<ColorMatrix, MonoidError> {
        if self.dimension() != other.dimension() {
            return Err(MonoidError::DimensionMismatch {
                left: self.dimension(),
                right: other.dimension(),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|&(q, k)| {
                let (r, k2) = other.rows[q];
                (r, semiring_join(k, k2))
            })
            .collect();
        Ok(ColorMatrix { rows })
    }
}

pub fn letter_matrix(
    a: &ParityAutomaton,
    input: SymbolId,
    output: SymbolId,
) -> Result<ColorMatrix, MonoidError> {
    if input >= a.input().len() {
        return Err(MonoidError::SymbolRange { symbol: input });
    }
    if output >= a.output().len() {
        return Err(MonoidError::SymbolRange { symbol: output });
    }
    let rows = (0..a.state_count())
        .map(|p| {
            let q = a.step(p, input, output);
            (q, a.color(q))
        })
        .collect();
    Ok(ColorMatrix { rows })
}

/// Matrix of the block `(u/v)`: the fold of the letter matrices. Both words
/// must be nonempty and of equal length.
pub fn word_matrix(
    a: &ParityAutomaton,
    u: &[SymbolId],
    v: &[SymbolId],
) -> Result<ColorMatrix, MonoidError> {
    if u.len() != v.len() {
        return Err(MonoidError::LengthMismatch {
            input: u.len(),
            output: v.len(),
        });
    }
    if u.is_empty() {
        return Err(MonoidError::EmptyWord);
    }
    let mut acc = letter_matrix(a, u[0], v[0])?;
    for i in 1..u.len() {
        acc = acc.mul(&letter_matrix(a, u[i], v[i])?)?;
    }
    Ok(acc)
}

/// The monoid generated by the letter matrices: every matrix realized by a
/// nonempty block, with canonical ids (ascending matrix order) and
/// right-multiplication tables for fast closure walks.
#[derive(Debug, Clone)]
pub struct Monoid {
    matrices: Vec<ColorMatrix>,
    index: HashMap<ColorMatrix, MatrixId>,
    /// letter (a,b) → matrix id, at `a * n_out + b`
    letters: Vec<MatrixId>,
    /// (id, letter (a,b)) → id of the product, at `id * n_letters + a*n_out + b`
    right_mul: Vec<MatrixId>,
    n_out: usize,
}

impl Monoid {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[ColorMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, id: MatrixId) -> &ColorMatrix {
        &self.matrices[id]
    }

    pub fn id_of(&self, m: &ColorMatrix) -> Option<MatrixId> {
        self.index.get(m).copied()
    }

    pub fn letter_id(&self, input: SymbolId, output: SymbolId) -> MatrixId {
        self.letters[input * self.n_out + output]
    }

    pub fn right_mul_letter(&self, id: MatrixId, input: SymbolId, output: SymbolId) -> MatrixId {
        self.right_mul[id * self.letters.len() + input * self.n_out + output]
    }
}

/// Breadth-first closure of the letter matrices under right multiplication.
/// Right multiplication alone saturates: every realized matrix is a
/// left-to-right product of letter matrices.
pub fn enumerate_monoid(a: &ParityAutomaton) -> Monoid {
    let n_in = a.input().len();
    let n_out = a.output().len();
    let mut letter_mats = Vec::with_capacity(n_in * n_out);
    for i in 0..n_in {
        for o in 0..n_out {
            letter_mats.push(letter_matrix(a, i, o).expect("symbols in range"));
        }
    }

    let mut seen: HashMap<ColorMatrix, ()> = HashMap::new();
    let mut queue: VecDeque<ColorMatrix> = VecDeque::new();
    for m in &letter_mats {
        if seen.insert(m.clone(), ()).is_none() {
            queue.push_back(m.clone());
        }
    }
    while let Some(m) = queue.pop_front() {
        for l in &letter_mats {
            let p = m.mul(l).expect("equal dimensions");
            if seen.insert(p.clone(), ()).is_none() {
                queue.push_back(p);
            }
        }
    }

    let mut matrices: Vec<ColorMatrix> = seen.into_keys().collect();
    matrices.sort();
    let index: HashMap<ColorMatrix, MatrixId> = matrices
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    let letters: Vec<MatrixId> = letter_mats.iter().map(|m| index[m]).collect();
    let mut right_mul = Vec::with_capacity(matrices.len() * letters.len());
    for m in &matrices {
        for l in &letter_mats {
            right_mul.push(index[&m.mul(l).expect("equal dimensions")]);
        }
    }
    Monoid {
        matrices,
        index,
        letters,
        right_mul,
        n_out,
    }
}

/// DFA over the paired alphabet accepting exactly the blocks whose matrix is
/// `m`: walk the monoid from a fresh initial state, accept at `m`.
pub fn class_automaton(
    a: &ParityAutomaton,
    m: &ColorMatrix,
) -> Result<FiniteAutomaton, MonoidError> {
    let monoid = enumerate_monoid(a);
    let target = monoid.id_of(m).ok_or(MonoidError::Unrealized)?;
    let sigma = Alphabet::paired(a.input(), a.output());
    let n_letters = sigma.len();
    // state 0 = initial (empty word), state 1+id = matrix id
    let state_count = 1 + monoid.len();
    let mut delta = Vec::with_capacity(state_count * n_letters);
    for s in 0..n_letters {
        delta.push(1 + monoid.letters[s]);
    }
    for id in 0..monoid.len() {
        for s in 0..n_letters {
            delta.push(1 + monoid.right_mul[id * n_letters + s]);
        }
    }
    Ok(
        FiniteAutomaton::new(sigma, state_count, 0, vec![1 + target], delta)
            .expect("well-formed by construction"),
    )
}

/// DFA over the paired alphabet accepting exactly the blocks that lead from
/// `p` to `q` with maximum entered color `k`. States are (color-so-far,
/// state) pairs; color-so-far 0 means "no step taken yet", `c+1` means the
/// maximum so far is `c`.
pub fn tracking_automaton(
    a: &ParityAutomaton,
    p: StateId,
    q: StateId,
    k: Color,
) -> Result<FiniteAutomaton, MonoidError> {
    let n = a.state_count();
    for state in [p, q] {
        if state >= n {
            return Err(MonoidError::StateRange { state, count: n });
        }
    }
    if !a.colors().contains(&k) {
        return Err(MonoidError::UnusedColor { color: k });
    }
    let sigma = Alphabet::paired(a.input(), a.output());
    let n_out = a.output().len();
    let levels = a.max_color() + 2;
    let state_count = levels * n;
    let mut delta = Vec::with_capacity(state_count * sigma.len());
    for cs in 0..levels {
        for state in 0..n {
            for ai in 0..a.input().len() {
                for bo in 0..n_out {
                    let r = a.step(state, ai, bo);
                    let cs2 = cs.max(a.color(r) + 1);
                    delta.push(cs2 * n + r);
                }
            }
        }
    }
    let initial = p; // level 0 = neutral
    let accept = (k + 1) * n + q;
    Ok(
        FiniteAutomaton::new(sigma, state_count, initial, vec![accept], delta)
            .expect("well-formed by construction"),
    )
}

/// Deterministic automaton over input letters whose non-initial states are
/// profiles: the sets of matrices realizable over the word read so far.
#[derive(Debug, Clone)]
pub struct ProfileAutomaton {
    monoid: Monoid,
    input_len: usize,
    /// state `s ≥ 1` is `profiles[s-1]`, a sorted set of matrix ids
    profiles: Vec<Vec<MatrixId>>,
    /// (state, input symbol) → state, at `s * input_len + a`
    delta: Vec<StateId>,
    /// per state: is the set of words reaching it finite?
    finite: Vec<bool>,
    d_prime: usize,
}

impl ProfileAutomaton {
    pub fn monoid(&self) -> &Monoid {
        &self.monoid
    }

    /// Total state count including the initial pseudo-state.
    pub fn n_prime(&self) -> usize {
        1 + self.profiles.len()
    }

    /// Length of a longest word reaching a finite-language state (0 when
    /// only the initial state is finite).
    pub fn d_prime(&self) -> usize {
        self.d_prime
    }

    pub fn initial(&self) -> StateId {
        0
    }

    pub fn transition(&self, s: StateId, input: SymbolId) -> StateId {
        self.delta[s * self.input_len + input]
    }

    /// The profile at state `s`; None for the initial pseudo-state.
    pub fn profile(&self, s: StateId) -> Option<&[MatrixId]> {
        s.checked_sub(1).map(|i| self.profiles[i].as_slice())
    }

    pub fn language_finite(&self, s: StateId) -> bool {
        self.finite[s]
    }

    /// Non-initial states with infinite language, ascending.
    pub fn infinite_states(&self) -> Vec<StateId> {
        (1..self.n_prime()).filter(|&s| !self.finite[s]).collect()
    }

    pub fn state_on_word(&self, u: &[SymbolId]) -> Result<StateId, MonoidError> {
        let mut s = 0;
        for &a in u {
            if a >= self.input_len {
                return Err(MonoidError::SymbolRange { symbol: a });
            }
            s = self.transition(s, a);
        }
        Ok(s)
    }
}

pub fn build_profile_automaton(a: &ParityAutomaton) -> ProfileAutomaton {
    try_build_profile_automaton(a, usize::MAX).expect("no cap in effect")
}

/// Like [`build_profile_automaton`], but gives up (returning None) once more
/// than `max_profiles` distinct profiles have been discovered. The number of
/// profiles can grow exponentially in the monoid size, so bulk consumers
/// (random cross-validation, property tests) bound it instead of gambling on
/// the instance being tame.
pub fn try_build_profile_automaton(
    a: &ParityAutomaton,
    max_profiles: usize,
) -> Option<ProfileAutomaton> {
    let monoid = enumerate_monoid(a);
    let n_in = a.input().len();
    let n_out = a.output().len();
    let n_letters = n_in * n_out;

    let mut profiles: Vec<Vec<MatrixId>> = Vec::new();
    let mut index: HashMap<Vec<MatrixId>, StateId> = HashMap::new();
    let mut delta: Vec<StateId> = vec![0; n_in]; // init row, patched below
    let mut queue: VecDeque<StateId> = VecDeque::new();

    let mut intern = |profile: Vec<MatrixId>,
                      profiles: &mut Vec<Vec<MatrixId>>,
                      queue: &mut VecDeque<StateId>|
     -> StateId {
        if let Some(&s) = index.get(&profile) {
            return s;
        }
        profiles.push(profile.clone());
        let s = profiles.len(); // state ids are offset by the init state
        index.insert(profile, s);
        queue.push_back(s);
        s
    };

    for (input, slot) in delta.iter_mut().enumerate() {
        let mut p: Vec<MatrixId> = (0..n_out)
            .map(|output| monoid.letter_id(input, output))
            .collect();
        p.sort_unstable();
        p.dedup();
        *slot = intern(p, &mut profiles, &mut queue);
    }
    if profiles.len() > max_profiles {
        return None;
    }
    while let Some(s) = queue.pop_front() {
        let source = profiles[s - 1].clone();
        for input in 0..n_in {
            let right_mul = &monoid.right_mul;
            let mut p: Vec<MatrixId> = source
                .iter()
                .flat_map(|&m| {
                    (0..n_out).map(move |output| right_mul[m * n_letters + input * n_out + output])
                })
                .collect();
            p.sort_unstable();
            p.dedup();
            let t = intern(p, &mut profiles, &mut queue);
            if profiles.len() > max_profiles {
                return None;
            }
            let slot = s * n_in + input;
            if delta.len() <= slot {
                delta.resize(slot + 1, 0);
            }
            delta[slot] = t;
        }
    }

    let state_count = 1 + profiles.len();
    debug_assert_eq!(delta.len(), state_count * n_in);

    // Deduplicated successor lists (the initial state has no predecessors:
    // every transition target is a profile state).
    let succs: Vec<Vec<StateId>> = (0..state_count)
        .map(|s| {
            let mut t: Vec<StateId> = (0..n_in).map(|i| delta[s * n_in + i]).collect();
            t.sort_unstable();
            t.dedup();
            t
        })
        .collect();

    // A state's language is infinite iff it is reachable from a state that
    // lies on a cycle. All states here are reachable from the initial state,
    // so "lies on a cycle" is absolute.
    let mut on_cycle = vec![false; state_count];
    for s in 0..state_count {
        let mut seen = vec![false; state_count];
        let mut bfs: VecDeque<StateId> = succs[s].iter().copied().collect();
        for &t in &succs[s] {
            seen[t] = true;
        }
        while let Some(t) = bfs.pop_front() {
            if t == s {
                on_cycle[s] = true;
                break;
            }
            for &u in &succs[t] {
                if !seen[u] {
                    seen[u] = true;
                    bfs.push_back(u);
                }
            }
        }
    }
    let mut infinite = on_cycle.clone();
    let mut bfs: VecDeque<StateId> = (0..state_count).filter(|&s| on_cycle[s]).collect();
    while let Some(s) = bfs.pop_front() {
        for &t in &succs[s] {
            if !infinite[t] {
                infinite[t] = true;
                bfs.push_back(t);
            }
        }
    }
    let finite: Vec<bool> = infinite.iter().map(|&b| !b).collect();

    // Longest path from the initial state within the finite states. Finite
    // states form a DAG (a cycle would pump an infinite language), and every
    // predecessor of a finite state is finite, so a topological pass over
    // the finite subgraph suffices.
    let mut indegree = vec![0usize; state_count];
    for s in 0..state_count {
        if !finite[s] {
            continue;
        }
        for &t in &succs[s] {
            if finite[t] {
                indegree[t] += 1;
            }
        }
    }
    let mut dist = vec![0usize; state_count];
    let mut topo: VecDeque<StateId> = (0..state_count)
        .filter(|&s| finite[s] && indegree[s] == 0)
        .collect();
    let mut d_prime = 0;
    while let Some(s) = topo.pop_front() {
        d_prime = d_prime.max(dist[s]);
        for &t in &succs[s] {
            if finite[t] {
                dist[t] = dist[t].max(dist[s] + 1);
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    topo.push_back(t);
                }
            }
        }
    }
    debug_assert!(finite[0], "the initial state accepts only the empty word");
    assert!(
        d_prime < state_count,
        "a longest finite-class word visits no state twice"
    );

    Some(ProfileAutomaton {
        monoid,
        input_len: n_in,
        profiles,
        delta,
        finite,
        d_prime,
    })
}

/// Finds an output word `v` with `word_matrix(u, v) = m`, or None if no such
/// `v` exists. Forward pass: the set of matrices realizable over each prefix
/// of `u`. Backward pass: commit letters from the end, always taking the
/// first (matrix, output letter) pair in canonical order, so the result is
/// deterministic.
pub fn find_matching_output(
    a: &ParityAutomaton,
    u: &[SymbolId],
    m: &ColorMatrix,
) -> Result<Option<Vec<SymbolId>>, MonoidError> {
    if u.is_empty() {
        return Err(MonoidError::EmptyWord);
    }
    let n_out = a.output().len();
    for &input in u {
        if input >= a.input().len() {
            return Err(MonoidError::SymbolRange { symbol: input });
        }
    }
    if m.dimension() != a.state_count() {
        return Err(MonoidError::DimensionMismatch {
            left: m.dimension(),
            right: a.state_count(),
        });
    }

    // letters[i][b] = matrix of (u_i / b)
    let letters: Vec<Vec<ColorMatrix>> = u
        .iter()
        .map(|&input| {
            (0..n_out)
                .map(|output| letter_matrix(a, input, output).expect("symbols in range"))
                .collect()
        })
        .collect();

    let mut sets: Vec<Vec<ColorMatrix>> = Vec::with_capacity(u.len());
    let mut first: Vec<ColorMatrix> = letters[0].clone();
    first.sort();
    first.dedup();
    sets.push(first);
    for i in 1..u.len() {
        let mut next: Vec<ColorMatrix> = sets[i - 1]
            .iter()
            .flat_map(|prev| {
                letters[i]
                    .iter()
                    .map(move |l| prev.mul(l).expect("equal dimensions"))
            })
            .collect();
        next.sort();
        next.dedup();
        sets.push(next);
    }

    if sets[u.len() - 1].binary_search(m).is_err() {
        return Ok(None);
    }

    let mut v = vec![0; u.len()];
    let mut target = m.clone();
    for i in (1..u.len()).rev() {
        let mut found = false;
        'search: for prev in &sets[i - 1] {
            for (output, l) in letters[i].iter().enumerate() {
                if prev.mul(l).expect("equal dimensions") == target {
                    v[i] = output;
                    target = prev.clone();
                    found = true;
                    break 'search;
                }
            }
        }
        assert!(found, "forward sets cover every backward target");
    }
    let output = (0..n_out)
        .find(|&output| letters[0][output] == target)
        .expect("forward sets cover every backward target");
    v[0] = output;
    Ok(Some(v))
}
