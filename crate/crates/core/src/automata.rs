//! Deterministic parity automata over paired input/output letters, the
//! finite-word automata used by the congruence machinery, and the text
//! formats for both.
//!
//! A parity automaton here reads pairs `(a, b)` — one input letter, one
//! output letter per step — and accepts an infinite word iff the maximum
//! color visited infinitely often is even. Max-color bookkeeping over finite
//! prefixes is source-exclusive: the color of the state a walk starts in is
//! not counted, the colors of all states it enters are.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

pub type StateId = usize;
pub type SymbolId = usize;
pub type Color = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing transition {state} {input}/{output}")]
    MissingTransition {
        state: StateId,
        input: String,
        output: String,
    },
    #[error("line {line}: duplicate transition {state} {input}/{output}")]
    DuplicateTransition {
        state: StateId,
        input: String,
        output: String,
        line: usize,
    },
    #[error("state {state} out of range (automaton has {count} states)")]
    StateRange { state: usize, count: usize },
    #[error("unknown symbol '{symbol}'")]
    UnknownSymbol { symbol: String },
    #[error("invalid symbol '{symbol}': {reason}")]
    InvalidSymbol { symbol: String, reason: String },
    #[error("duplicate symbol '{symbol}'")]
    DuplicateSymbol { symbol: String },
    #[error("alphabet must have at least {min} symbols, got {got}")]
    AlphabetTooSmall { min: usize, got: usize },
    #[error("expected {expected} colors, got {got}")]
    ColorCount { expected: usize, got: usize },
    #[error("lasso cycle must be nonempty")]
    EmptyCycle,
    #[error("language is finite")]
    LanguageFinite,
}

/// An ordered set of printable symbol tokens with O(1) lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, SymbolId>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self, AutomatonError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(AutomatonError::AlphabetTooSmall { min: 1, got: 0 });
        }
        let mut index = HashMap::new();
        for (i, sym) in symbols.iter().enumerate() {
            if sym.is_empty() || sym.chars().any(char::is_whitespace) || sym.contains('#') {
                return Err(AutomatonError::InvalidSymbol {
                    symbol: sym.clone(),
                    reason: "symbols must be nonempty and free of whitespace and '#'".into(),
                });
            }
            if sym == "-" {
                return Err(AutomatonError::InvalidSymbol {
                    symbol: sym.clone(),
                    reason: "'-' is reserved for the wait emission".into(),
                });
            }
            if index.insert(sym.clone(), i).is_some() {
                return Err(AutomatonError::DuplicateSymbol {
                    symbol: sym.clone(),
                });
            }
        }
        Ok(Alphabet { symbols, index })
    }

    /// The two-letter alphabet `0 1` used by the generated games.
    pub fn boolean() -> Self {
        Alphabet::new(["0", "1"]).expect("boolean alphabet is valid")
    }

    /// The product alphabet with tokens `a/b`, input-major order, used by the
    /// finite automata that read paired letters.
    pub fn paired(input: &Alphabet, output: &Alphabet) -> Self {
        let mut symbols = Vec::with_capacity(input.len() * output.len());
        for a in input.symbols() {
            for b in output.symbols() {
                symbols.push(format!("{a}/{b}"));
            }
        }
        Alphabet::new(symbols).expect("paired alphabet is valid")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbol(&self, id: SymbolId) -> &str {
        &self.symbols[id]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn id_of(&self, symbol: &str) -> Option<SymbolId> {
        self.index.get(symbol).copied()
    }

    pub fn ids(&self) -> std::ops::Range<SymbolId> {
        0..self.symbols.len()
    }

    fn require(&self, symbol: &str) -> Result<SymbolId, AutomatonError> {
        self.id_of(symbol)
            .ok_or_else(|| AutomatonError::UnknownSymbol {
                symbol: symbol.to_string(),
            })
    }
}

/// A finite prefix plus a nonempty cycle, both over paired letters; denotes
/// the ultimately periodic word `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    prefix: Vec<(SymbolId, SymbolId)>,
    cycle: Vec<(SymbolId, SymbolId)>,
}

impl Lasso {
    pub fn new(
        prefix: Vec<(SymbolId, SymbolId)>,
        cycle: Vec<(SymbolId, SymbolId)>,
    ) -> Result<Self, AutomatonError> {
        if cycle.is_empty() {
            return Err(AutomatonError::EmptyCycle);
        }
        Ok(Lasso { prefix, cycle })
    }

    pub fn prefix(&self) -> &[(SymbolId, SymbolId)] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[(SymbolId, SymbolId)] {
        &self.cycle
    }
}

/// A deterministic max-parity automaton over paired letters with a total
/// transition function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityAutomaton {
    input: Alphabet,
    output: Alphabet,
    initial: StateId,
    colors: Vec<Color>,
    /// `delta[state * |in| * |out| + a * |out| + b]`
    delta: Vec<StateId>,
}

impl ParityAutomaton {
    pub fn new(
        input: Alphabet,
        output: Alphabet,
        initial: StateId,
        colors: Vec<Color>,
        delta: Vec<StateId>,
    ) -> Result<Self, AutomatonError> {
        if input.len() < 2 {
            return Err(AutomatonError::AlphabetTooSmall {
                min: 2,
                got: input.len(),
            });
        }
        if output.len() < 2 {
            return Err(AutomatonError::AlphabetTooSmall {
                min: 2,
                got: output.len(),
            });
        }
        let n = colors.len();
        if n == 0 {
            return Err(AutomatonError::StateRange { state: 0, count: 0 });
        }
        if initial >= n {
            return Err(AutomatonError::StateRange {
                state: initial,
                count: n,
            });
        }
        assert_eq!(
            delta.len(),
            n * input.len() * output.len(),
            "transition table size mismatch"
        );
        for &target in &delta {
            if target >= n {
                return Err(AutomatonError::StateRange {
                    state: target,
                    count: n,
                });
            }
        }
        Ok(ParityAutomaton {
            input,
            output,
            initial,
            colors,
            delta,
        })
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn state_count(&self) -> usize {
        self.colors.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn color(&self, q: StateId) -> Color {
        self.colors[q]
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    /// The color bound `m`: the largest color in use.
    pub fn max_color(&self) -> Color {
        *self.colors.iter().max().expect("at least one state")
    }

    pub fn step(&self, q: StateId, a: SymbolId, b: SymbolId) -> StateId {
        self.delta[(q * self.input.len() + a) * self.output.len() + b]
    }

    fn check_pair(&self, a: SymbolId, b: SymbolId) -> Result<(), AutomatonError> {
        if a >= self.input.len() {
            return Err(AutomatonError::UnknownSymbol {
                symbol: format!("input #{a}"),
            });
        }
        if b >= self.output.len() {
            return Err(AutomatonError::UnknownSymbol {
                symbol: format!("output #{b}"),
            });
        }
        Ok(())
    }

    /// Runs the automaton on a finite word of paired letters from the initial
    /// state. Returns the visited state sequence (length `|word| + 1`) and
    /// the maximum color over positions `1..=|word|` — `None` on the empty
    /// word, since the start state's color is not counted.
    pub fn run_prefix(
        &self,
        word: &[(SymbolId, SymbolId)],
    ) -> Result<(Vec<StateId>, Option<Color>), AutomatonError> {
        let mut states = Vec::with_capacity(word.len() + 1);
        let mut q = self.initial;
        states.push(q);
        let mut max_color = None;
        for &(a, b) in word {
            self.check_pair(a, b)?;
            q = self.step(q, a, b);
            states.push(q);
            max_color = Some(max_color.map_or(self.colors[q], |m: Color| m.max(self.colors[q])));
        }
        Ok((states, max_color))
    }

    /// Decides acceptance of `prefix · cycle^ω`: simulate the prefix, then
    /// iterate the cycle until a `(state, cycle position)` pair repeats, and
    /// accept iff the maximum color on the repeating loop is even.
    pub fn accepts_lasso(&self, lasso: &Lasso) -> Result<bool, AutomatonError> {
        let mut q = self.initial;
        for &(a, b) in lasso.prefix() {
            self.check_pair(a, b)?;
            q = self.step(q, a, b);
        }
        for &(a, b) in lasso.cycle() {
            self.check_pair(a, b)?;
        }
        let cycle = lasso.cycle();
        let mut seen: HashMap<(StateId, usize), usize> = HashMap::new();
        let mut colors_entered: Vec<Color> = Vec::new();
        let mut pos = 0;
        loop {
            if let Some(&first) = seen.get(&(q, pos)) {
                let loop_max = colors_entered[first..]
                    .iter()
                    .max()
                    .expect("loop has at least one step");
                return Ok(loop_max.is_multiple_of(2));
            }
            seen.insert((q, pos), colors_entered.len());
            let (a, b) = cycle[pos];
            q = self.step(q, a, b);
            colors_entered.push(self.colors[q]);
            pos = (pos + 1) % cycle.len();
        }
    }

    /// Parses the `dpa` text format.
    pub fn parse(text: &str) -> Result<Self, AutomatonError> {
        parse_dpa(text)
    }

    /// Serializes to the canonical `dpa` text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("dpa\n");
        let _ = writeln!(out, "in: {}", self.input.symbols().join(" "));
        let _ = writeln!(out, "out: {}", self.output.symbols().join(" "));
        let _ = writeln!(out, "states: {}", self.state_count());
        let _ = writeln!(out, "init: {}", self.initial);
        let colors: Vec<String> = self.colors.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "colors: {}", colors.join(" "));
        for q in 0..self.state_count() {
            for a in self.input.ids() {
                for b in self.output.ids() {
                    let _ = writeln!(
                        out,
                        "{q} {}/{} {}",
                        self.input.symbol(a),
                        self.output.symbol(b),
                        self.step(q, a, b)
                    );
                }
            }
        }
        out.push_str("end\n");
        out
    }
}

/// A complete DFA over an arbitrary alphabet, with final states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAutomaton {
    alphabet: Alphabet,
    initial: StateId,
    finals: Vec<bool>,
    /// `delta[state * |sigma| + sym]`
    delta: Vec<StateId>,
}

impl FiniteAutomaton {
    pub fn new(
        alphabet: Alphabet,
        state_count: usize,
        initial: StateId,
        finals: Vec<StateId>,
        delta: Vec<StateId>,
    ) -> Result<Self, AutomatonError> {
        if state_count == 0 {
            return Err(AutomatonError::StateRange { state: 0, count: 0 });
        }
        if initial >= state_count {
            return Err(AutomatonError::StateRange {
                state: initial,
                count: state_count,
            });
        }
        assert_eq!(
            delta.len(),
            state_count * alphabet.len(),
            "transition table size mismatch"
        );
        for &t in &delta {
            if t >= state_count {
                return Err(AutomatonError::StateRange {
                    state: t,
                    count: state_count,
                });
            }
        }
        let mut final_mask = vec![false; state_count];
        for q in finals {
            if q >= state_count {
                return Err(AutomatonError::StateRange {
                    state: q,
                    count: state_count,
                });
            }
            final_mask[q] = true;
        }
        Ok(FiniteAutomaton {
            alphabet,
            initial,
            finals: final_mask,
            delta,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.finals.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals[q]
    }

    pub fn final_states(&self) -> Vec<StateId> {
        (0..self.state_count()).filter(|&q| self.finals[q]).collect()
    }

    pub fn step(&self, q: StateId, sym: SymbolId) -> StateId {
        self.delta[q * self.alphabet.len() + sym]
    }

    pub fn accepts(&self, word: &[SymbolId]) -> Result<bool, AutomatonError> {
        let mut q = self.initial;
        for &s in word {
            if s >= self.alphabet.len() {
                return Err(AutomatonError::UnknownSymbol {
                    symbol: format!("symbol #{s}"),
                });
            }
            q = self.step(q, s);
        }
        Ok(self.finals[q])
    }

    fn reachable_from_initial(&self) -> Vec<bool> {
        let n = self.state_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            for s in 0..self.alphabet.len() {
                let t = self.step(q, s);
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    fn coreachable_to_final(&self) -> Vec<bool> {
        let n = self.state_count();
        let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for q in 0..n {
            for s in 0..self.alphabet.len() {
                preds[self.step(q, s)].push(q);
            }
        }
        let mut seen = self.finals.clone();
        let mut queue: VecDeque<StateId> =
            (0..n).filter(|&q| self.finals[q]).collect();
        while let Some(q) = queue.pop_front() {
            for &p in &preds[q] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// True iff the accepted language is infinite: some state on a cycle is
    /// reachable from the initial state and co-reachable to a final state.
    pub fn language_infinite(&self) -> bool {
        let n = self.state_count();
        let reach = self.reachable_from_initial();
        let coreach = self.coreachable_to_final();
        let trim: Vec<bool> = (0..n).map(|q| reach[q] && coreach[q]).collect();
        // A state of the trim part lies on a cycle iff it can reach itself by
        // at least one step inside the trim part.
        for q in 0..n {
            if !trim[q] {
                continue;
            }
            let mut seen = vec![false; n];
            let mut queue = VecDeque::new();
            for s in 0..self.alphabet.len() {
                let t = self.step(q, s);
                if trim[t] && !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
            while let Some(p) = queue.pop_front() {
                if p == q {
                    return true;
                }
                for s in 0..self.alphabet.len() {
                    let t = self.step(p, s);
                    if trim[t] && !seen[t] {
                        seen[t] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        false
    }

    /// For an infinite language, returns an accepted word of length between
    /// `i` and `i + state_count`: take any length-`i` word that ends in a
    /// state from which a final state is reachable, then append a shortest
    /// completion.
    pub fn length_witness(&self, i: usize) -> Result<Vec<SymbolId>, AutomatonError> {
        if !self.language_infinite() {
            return Err(AutomatonError::LanguageFinite);
        }
        let n = self.state_count();
        let coreach = self.coreachable_to_final();
        // Forward layers with parent pointers: layer j holds the states
        // reachable by words of length exactly j.
        let mut layers: Vec<Vec<Option<(StateId, SymbolId)>>> = Vec::with_capacity(i + 1);
        let mut current = vec![false; n];
        current[self.initial] = true;
        layers.push(vec![None; n]);
        for _ in 0..i {
            let mut next = vec![false; n];
            let mut parents: Vec<Option<(StateId, SymbolId)>> = vec![None; n];
            for (q, &live) in current.iter().enumerate() {
                if !live {
                    continue;
                }
                for s in 0..self.alphabet.len() {
                    let t = self.step(q, s);
                    if parents[t].is_none() {
                        parents[t] = Some((q, s));
                    }
                    next[t] = true;
                }
            }
            layers.push(parents);
            current = next;
        }
        let pivot = (0..n)
            .find(|&q| current[q] && coreach[q])
            .expect("an infinite language has arbitrarily long co-reachable prefixes");
        // Reconstruct the length-i word.
        let mut word = Vec::with_capacity(i);
        let mut q = pivot;
        for j in (1..=i).rev() {
            let (p, s) = layers[j][q].expect("layer parents cover reached states");
            word.push(s);
            q = p;
        }
        word.reverse();
        // Shortest completion from the pivot to a final state.
        let mut parents: Vec<Option<(StateId, SymbolId)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([pivot]);
        seen[pivot] = true;
        let mut target = if self.finals[pivot] { Some(pivot) } else { None };
        while target.is_none() {
            let q = queue.pop_front().expect("a final state is reachable from the pivot");
            for s in 0..self.alphabet.len() {
                let t = self.step(q, s);
                if !seen[t] {
                    seen[t] = true;
                    parents[t] = Some((q, s));
                    if self.finals[t] {
                        target = Some(t);
                        break;
                    }
                    queue.push_back(t);
                }
            }
        }
        let mut tail = Vec::new();
        let mut q = target.expect("completion found");
        while q != pivot {
            let (p, s) = parents[q].expect("parents cover the BFS tree");
            tail.push(s);
            q = p;
        }
        tail.reverse();
        word.extend(tail);
        Ok(word)
    }

    /// Parses the `dfa` text format.
    pub fn parse(text: &str) -> Result<Self, AutomatonError> {
        parse_dfa(text)
    }

    /// Serializes to the canonical `dfa` text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("dfa\n");
        let _ = writeln!(out, "sigma: {}", self.alphabet.symbols().join(" "));
        let _ = writeln!(out, "states: {}", self.state_count());
        let _ = writeln!(out, "init: {}", self.initial);
        let finals: Vec<String> = self
            .final_states()
            .iter()
            .map(|q| q.to_string())
            .collect();
        if finals.is_empty() {
            out.push_str("finals:\n");
        } else {
            let _ = writeln!(out, "finals: {}", finals.join(" "));
        }
        for q in 0..self.state_count() {
            for s in self.alphabet.ids() {
                let _ = writeln!(out, "{q} {} {}", self.alphabet.symbol(s), self.step(q, s));
            }
        }
        out.push_str("end\n");
        out
    }
}

pub(crate) fn syntax(line: usize, msg: impl Into<String>) -> AutomatonError {
    AutomatonError::Syntax {
        line,
        msg: msg.into(),
    }
}

pub(crate) struct LineReader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> LineReader<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        LineReader {
            lines: crate::textio::significant_lines(text),
            pos: 0,
        }
    }

    pub(crate) fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.lines.get(self.pos).copied();
        self.pos += 1;
        item
    }

    pub(crate) fn last_line_number(&self) -> usize {
        self.lines.last().map_or(0, |&(n, _)| n)
    }

    pub(crate) fn expect_literal(&mut self, what: &str) -> Result<(), AutomatonError> {
        match self.next() {
            Some((_, line)) if line == what => Ok(()),
            Some((n, line)) => Err(syntax(n, format!("expected '{what}', found '{line}'"))),
            None => Err(syntax(
                self.last_line_number() + 1,
                format!("expected '{what}', found end of file"),
            )),
        }
    }

    pub(crate) fn expect_keyed(&mut self, key: &str) -> Result<(usize, &'a str), AutomatonError> {
        match self.next() {
            Some((n, line)) => match crate::textio::keyed(line, key) {
                Some(value) => Ok((n, value)),
                None => Err(syntax(n, format!("expected '{key}: ...', found '{line}'"))),
            },
            None => Err(syntax(
                self.last_line_number() + 1,
                format!("expected '{key}: ...', found end of file"),
            )),
        }
    }
}

pub(crate) fn parse_count(line: usize, value: &str, what: &str) -> Result<usize, AutomatonError> {
    value
        .parse::<usize>()
        .map_err(|_| syntax(line, format!("invalid {what} '{value}'")))
}

fn parse_dpa(text: &str) -> Result<ParityAutomaton, AutomatonError> {
    let mut rd = LineReader::new(text);
    rd.expect_literal("dpa")?;
    let (line_in, in_val) = rd.expect_keyed("in")?;
    let input =
        Alphabet::new(in_val.split_whitespace()).map_err(|e| syntax(line_in, e.to_string()))?;
    let (line_out, out_val) = rd.expect_keyed("out")?;
    let output = Alphabet::new(out_val.split_whitespace())
        .map_err(|e| syntax(line_out, e.to_string()))?;
    for (line, alphabet) in [(line_in, &input), (line_out, &output)] {
        if alphabet.len() < 2 {
            return Err(syntax(line, "game alphabets need at least 2 symbols"));
        }
        for sym in alphabet.symbols() {
            if sym.contains('/') {
                return Err(syntax(line, format!("symbol '{sym}' must not contain '/'")));
            }
        }
    }
    let (line_n, n_val) = rd.expect_keyed("states")?;
    let n = parse_count(line_n, n_val, "state count")?;
    if n == 0 {
        return Err(syntax(line_n, "state count must be positive"));
    }
    let (line_init, init_val) = rd.expect_keyed("init")?;
    let initial = parse_count(line_init, init_val, "initial state")?;
    if initial >= n {
        return Err(AutomatonError::StateRange {
            state: initial,
            count: n,
        });
    }
    let (line_colors, colors_val) = rd.expect_keyed("colors")?;
    let colors: Vec<Color> = colors_val
        .split_whitespace()
        .map(|tok| parse_count(line_colors, tok, "color"))
        .collect::<Result<_, _>>()?;
    if colors.len() != n {
        return Err(AutomatonError::ColorCount {
            expected: n,
            got: colors.len(),
        });
    }

    let mut delta: Vec<Option<StateId>> = vec![None; n * input.len() * output.len()];
    loop {
        let (line, content) = match rd.next() {
            Some(item) => item,
            None => {
                return Err(syntax(
                    rd.last_line_number() + 1,
                    "expected transition or 'end', found end of file",
                ))
            }
        };
        if content == "end" {
            break;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(syntax(
                line,
                format!("expected '<src> <in>/<out> <dst>', found '{content}'"),
            ));
        }
        let src = parse_count(line, tokens[0], "source state")?;
        let dst = parse_count(line, tokens[2], "target state")?;
        for state in [src, dst] {
            if state >= n {
                return Err(AutomatonError::StateRange { state, count: n });
            }
        }
        let (in_sym, out_sym) = tokens[1]
            .split_once('/')
            .ok_or_else(|| syntax(line, format!("expected '<in>/<out>', found '{}'", tokens[1])))?;
        let a = input.require(in_sym)?;
        let b = output.require(out_sym)?;
        let slot = (src * input.len() + a) * output.len() + b;
        if delta[slot].is_some() {
            return Err(AutomatonError::DuplicateTransition {
                state: src,
                input: in_sym.to_string(),
                output: out_sym.to_string(),
                line,
            });
        }
        delta[slot] = Some(dst);
    }
    if let Some((line, content)) = rd.next() {
        return Err(syntax(line, format!("unexpected content after 'end': '{content}'")));
    }
    let mut table = Vec::with_capacity(delta.len());
    for (slot, entry) in delta.iter().enumerate() {
        match entry {
            Some(t) => table.push(*t),
            None => {
                let b = slot % output.len();
                let a = (slot / output.len()) % input.len();
                let state = slot / (output.len() * input.len());
                return Err(AutomatonError::MissingTransition {
                    state,
                    input: input.symbol(a).to_string(),
                    output: output.symbol(b).to_string(),
                });
            }
        }
    }
    ParityAutomaton::new(input, output, initial, colors, table)
}

fn parse_dfa(text: &str) -> Result<FiniteAutomaton, AutomatonError> {
    let mut rd = LineReader::new(text);
    rd.expect_literal("dfa")?;
    let (line_sigma, sigma_val) = rd.expect_keyed("sigma")?;
    let alphabet = Alphabet::new(sigma_val.split_whitespace())
        .map_err(|e| syntax(line_sigma, e.to_string()))?;
    let (line_n, n_val) = rd.expect_keyed("states")?;
    let n = parse_count(line_n, n_val, "state count")?;
    if n == 0 {
        return Err(syntax(line_n, "state count must be positive"));
    }
    let (line_init, init_val) = rd.expect_keyed("init")?;
    let initial = parse_count(line_init, init_val, "initial state")?;
    if initial >= n {
        return Err(AutomatonError::StateRange {
            state: initial,
            count: n,
        });
    }
    let (line_finals, finals_val) = rd.expect_keyed("finals")?;
    let finals: Vec<StateId> = finals_val
        .split_whitespace()
        .map(|tok| parse_count(line_finals, tok, "final state"))
        .collect::<Result<_, _>>()?;

    let mut delta: Vec<Option<StateId>> = vec![None; n * alphabet.len()];
    loop {
        let (line, content) = match rd.next() {
            Some(item) => item,
            None => {
                return Err(syntax(
                    rd.last_line_number() + 1,
                    "expected transition or 'end', found end of file",
                ))
            }
        };
        if content == "end" {
            break;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(syntax(
                line,
                format!("expected '<src> <sym> <dst>', found '{content}'"),
            ));
        }
        let src = parse_count(line, tokens[0], "source state")?;
        let dst = parse_count(line, tokens[2], "target state")?;
        for state in [src, dst] {
            if state >= n {
                return Err(AutomatonError::StateRange { state, count: n });
            }
        }
        let s = alphabet.require(tokens[1])?;
        let slot = src * alphabet.len() + s;
        if delta[slot].is_some() {
            return Err(AutomatonError::DuplicateTransition {
                state: src,
                input: tokens[1].to_string(),
                output: String::new(),
                line,
            });
        }
        delta[slot] = Some(dst);
    }
    if let Some((line, content)) = rd.next() {
        return Err(syntax(line, format!("unexpected content after 'end': '{content}'")));
    }
    let mut table = Vec::with_capacity(delta.len());
    for (slot, entry) in delta.iter().enumerate() {
        match entry {
            Some(t) => table.push(*t),
            None => {
                let s = slot % alphabet.len();
                let state = slot / alphabet.len();
                return Err(AutomatonError::MissingTransition {
                    state,
                    input: alphabet.symbol(s).to_string(),
                    output: String::new(),
                });
            }
        }
    }
    FiniteAutomaton::new(alphabet, n, initial, finals, table)
}
