//! Finite two-player max-parity games: arenas, Zielonka's recursive solver
//! with positional strategy extraction, strategy verification by cycle
//! analysis, and a brute-force reference solver for small arenas.
//!
//! Player O wins a play iff the maximum color seen infinitely often is even;
//! Player I wins otherwise. Both players have positional winning strategies
//! on their winning regions, which is what `solve` extracts.

use std::collections::VecDeque;

use thiserror::Error;

use crate::automata::Color;

pub type VertexId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    I,
    O,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::I => Player::O,
            Player::O => Player::I,
        }
    }

    /// The parity this player wants the dominant color to have.
    fn good_even(self) -> bool {
        self == Player::O
    }
}

impl std::fmt::Display for Player {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Player::I => "I",
            Player::O => "O",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("vertex {vertex} has no successors")]
    NoSuccessors { vertex: usize },
    #[error("vertex {vertex} out of range (arena has {count} vertices)")]
    VertexRange { vertex: usize, count: usize },
    #[error("strategy leaves reachable vertex {vertex} without a choice")]
    StrategyIncomplete { vertex: usize },
    #[error("strategy at vertex {vertex} picks {target}, which is not a successor")]
    StrategyEdge { vertex: usize, target: usize },
    #[error("arena too large for exhaustive solving ({vertices} vertices)")]
    TooLargeForExhaustive { vertices: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityGameArena {
    owners: Vec<Player>,
    colors: Vec<Color>,
    edges: Vec<Vec<VertexId>>,
}

impl ParityGameArena {
    pub fn new(
        owners: Vec<Player>,
        colors: Vec<Color>,
        edges: Vec<Vec<VertexId>>,
    ) -> Result<Self, GameError> {
        assert_eq!(owners.len(), colors.len());
        assert_eq!(owners.len(), edges.len());
        let n = owners.len();
        for (v, succs) in edges.iter().enumerate() {
            if succs.is_empty() {
                return Err(GameError::NoSuccessors { vertex: v });
            }
            for &t in succs {
                if t >= n {
                    return Err(GameError::VertexRange { vertex: t, count: n });
                }
            }
        }
        Ok(ParityGameArena {
            owners,
            colors,
            edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.owners.len()
    }

    pub fn owner(&self, v: VertexId) -> Player {
        self.owners[v]
    }

    pub fn color(&self, v: VertexId) -> Color {
        self.colors[v]
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.edges[v]
    }

    pub fn max_color(&self) -> Color {
        self.colors.iter().copied().max().unwrap_or(0)
    }

    /// Debug dump: one line per vertex, `v owner color succ,succ,...`.
    pub fn dump_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        for v in 0..self.vertex_count() {
            let succs: Vec<String> = self.edges[v].iter().map(|t| t.to_string()).collect();
            let _ = writeln!(
                out,
                "{v} {} {} {}",
                self.owners[v],
                self.colors[v],
                succs.join(",")
            );
        }
        out
    }
}

/// Winner and positional strategy per vertex. A vertex's strategy entry is
/// Some exactly when its owner wins it, and then points at a successor
/// inside the owner's winning region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    winners: Vec<Player>,
    strategy: Vec<Option<VertexId>>,
}

impl Solution {
    pub fn winner(&self, v: VertexId) -> Player {
        self.winners[v]
    }

    pub fn winners(&self) -> &[Player] {
        &self.winners
    }

    pub fn strategy(&self, v: VertexId) -> Option<VertexId> {
        self.strategy[v]
    }

    pub fn strategies(&self) -> &[Option<VertexId>] {
        &self.strategy
    }

    pub fn win_region(&self, p: Player) -> Vec<VertexId> {
        (0..self.winners.len())
            .filter(|&v| self.winners[v] == p)
            .collect()
    }
}

/// Solves the arena with Zielonka's recursive attractor decomposition,
/// extracting positional strategies for both players. Runs on a dedicated
/// thread with a large stack: the recursion depth can degenerate towards the
/// vertex count.
pub fn solve(arena: &ParityGameArena) -> Solution {
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .name("zielonka".into())
            .stack_size(256 * 1024 * 1024)
            .spawn_scoped(scope, || solve_on_thread(arena))
            .expect("spawn solver thread")
            .join()
            .expect("solver thread panicked")
    })
}

fn solve_on_thread(arena: &ParityGameArena) -> Solution {
    let n = arena.vertex_count();
    // Predecessor lists, one entry per edge.
    let mut preds: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for v in 0..n {
        for &t in arena.successors(v) {
            preds[t].push(v);
        }
    }
    let mut winners = vec![Player::I; n];
    let mut strategy = vec![None; n];
    let mask = vec![true; n];
    zielonka(arena, &preds, mask, &mut winners, &mut strategy);
    Solution { winners, strategy }
}

/// Attractor of `targets` for player `p` within `mask`. Records, for
/// p-owned vertices pulled in (but not for the targets themselves), the edge
/// used to enter the attractor — rank-decreasing by BFS order, so following
/// it reaches the target set.
fn attractor(
    arena: &ParityGameArena,
    preds: &[Vec<VertexId>],
    mask: &[bool],
    targets: &[VertexId],
    p: Player,
    strategy: &mut [Option<VertexId>],
) -> Vec<bool> {
    let n = arena.vertex_count();
    let mut in_attr = vec![false; n];
    let mut queue: VecDeque<VertexId> = VecDeque::new();
    for &t in targets {
        in_attr[t] = true;
        queue.push_back(t);
    }
    // For opponent vertices: how many in-mask successors are still outside.
    let mut remaining = vec![0usize; n];
    for v in 0..n {
        if mask[v] && arena.owner(v) != p {
            remaining[v] = arena
                .successors(v)
                .iter()
                .filter(|&&t| mask[t])
                .count();
        }
    }
    while let Some(v) = queue.pop_front() {
        for &u in &preds[v] {
            if !mask[u] {
                continue;
            }
            if arena.owner(u) == p {
                if !in_attr[u] {
                    in_attr[u] = true;
                    strategy[u] = Some(v);
                    queue.push_back(u);
                }
            } else {
                remaining[u] -= 1;
                if remaining[u] == 0 && !in_attr[u] {
                    in_attr[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    in_attr
}

fn zielonka(
    arena: &ParityGameArena,
    preds: &[Vec<VertexId>],
    mask: Vec<bool>,
    winners: &mut Vec<Player>,
    strategy: &mut Vec<Option<VertexId>>,
) {
    let Some(top_color) = (0..arena.vertex_count())
        .filter(|&v| mask[v])
        .map(|v| arena.color(v))
        .max()
    else {
        return;
    };
    let player = if top_color % 2 == 0 {
        Player::O
    } else {
        Player::I
    };
    let opp = player.opponent();
    let targets: Vec<VertexId> = (0..arena.vertex_count())
        .filter(|&v| mask[v] && arena.color(v) == top_color)
        .collect();

    let in_a = attractor(arena, preds, &mask, &targets, player, strategy);
    let mask2: Vec<bool> = (0..arena.vertex_count())
        .map(|v| mask[v] && !in_a[v])
        .collect();
    zielonka(arena, preds, mask2.clone(), winners, strategy);

    let w_opp: Vec<VertexId> = (0..arena.vertex_count())
        .filter(|&v| mask2[v] && winners[v] == opp)
        .collect();

    if w_opp.is_empty() {
        for v in 0..arena.vertex_count() {
            if !mask[v] {
                continue;
            }
            winners[v] = player;
            if arena.owner(v) == opp {
                strategy[v] = None;
            }
        }
        // Top-color vertices owned by the winner: any move that stays in the
        // subgame works (the play either revisits the top color forever or
        // settles in the recursive winning region).
        for &v in &targets {
            if arena.owner(v) == player {
                let t = arena
                    .successors(v)
                    .iter()
                    .copied()
                    .find(|&t| mask[t])
                    .expect("subgames keep at least one successor");
                strategy[v] = Some(t);
            }
        }
    } else {
        let in_b = attractor(arena, preds, &mask, &w_opp, opp, strategy);
        for v in 0..arena.vertex_count() {
            if in_b[v] {
                winners[v] = opp;
                if arena.owner(v) == player {
                    strategy[v] = None;
                }
            }
        }
        let mask3: Vec<bool> = (0..arena.vertex_count())
            .map(|v| mask[v] && !in_b[v])
            .collect();
        zielonka(arena, preds, mask3, winners, strategy);
    }
}

/// Adjudicates an ultimately periodic play: O wins iff the maximum color on
/// the cycle part is even. The prefix never matters.
pub fn lasso_winner(prefix: &[Color], cycle: &[Color]) -> Player {
    let _ = prefix;
    let max = cycle
        .iter()
        .copied()
        .max()
        .expect("lasso cycles are nonempty");
    if max % 2 == 0 {
        Player::O
    } else {
        Player::I
    }
}

/// Checks a positional strategy for `player` from `start`: restrict the
/// player's moves to the strategy, then demand that every cycle reachable
/// from `start` has a maximum color of the player's parity. Cycle analysis
/// removes the dominant color level by level, splitting into strongly
/// connected components as it goes.
pub fn verify_positional_strategy(
    arena: &ParityGameArena,
    player: Player,
    strategy: &[Option<VertexId>],
    start: VertexId,
) -> Result<bool, GameError> {
    let n = arena.vertex_count();
    assert_eq!(strategy.len(), n, "strategy must cover every vertex");
    if start >= n {
        return Err(GameError::VertexRange {
            vertex: start,
            count: n,
        });
    }
    let mut succ: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut active = vec![false; n];
    let mut queue = VecDeque::from([start]);
    active[start] = true;
    while let Some(v) = queue.pop_front() {
        succ[v] = if arena.owner(v) == player {
            let t = strategy[v].ok_or(GameError::StrategyIncomplete { vertex: v })?;
            if !arena.successors(v).contains(&t) {
                return Err(GameError::StrategyEdge {
                    vertex: v,
                    target: t,
                });
            }
            vec![t]
        } else {
            arena.successors(v).to_vec()
        };
        for &t in &succ[v] {
            if !active[t] {
                active[t] = true;
                queue.push_back(t);
            }
        }
    }
    Ok(cycles_have_parity(
        arena.colors(),
        &succ,
        &active,
        player.good_even(),
    ))
}

/// True iff every cycle within the active subgraph has a maximum color of
/// the requested parity.
fn cycles_have_parity(
    colors: &[Color],
    succ: &[Vec<VertexId>],
    active: &[bool],
    good_even: bool,
) -> bool {
    for scc in strongly_connected_components(succ, active) {
        let has_cycle =
            scc.len() > 1 || succ[scc[0]].iter().any(|&t| t == scc[0]);
        if !has_cycle {
            continue;
        }
        let top = scc.iter().map(|&v| colors[v]).max().expect("nonempty SCC");
        if (top % 2 == 0) != good_even {
            return false;
        }
        // Cycles avoiding the top color entirely must also be good.
        let mut sub_active = vec![false; colors.len()];
        let mut nonempty = false;
        for &v in &scc {
            if colors[v] != top {
                sub_active[v] = true;
                nonempty = true;
            }
        }
        if nonempty && !cycles_have_parity(colors, succ, &sub_active, good_even) {
            return false;
        }
    }
    true
}

/// Iterative Tarjan over the subgraph induced by `active`.
fn strongly_connected_components(succ: &[Vec<VertexId>], active: &[bool]) -> Vec<Vec<VertexId>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<VertexId> = Vec::new();
    let mut next_index = 0usize;
    let mut result: Vec<Vec<VertexId>> = Vec::new();
    let mut call: Vec<(VertexId, usize)> = Vec::new();

    for root in 0..n {
        if !active[root] || index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            let mut descended = false;
            while *edge < succ[v].len() {
                let t = succ[v][*edge];
                *edge += 1;
                if !active[t] {
                    continue;
                }
                if index[t] == usize::MAX {
                    call.push((t, 0));
                    index[t] = next_index;
                    low[t] = next_index;
                    next_index += 1;
                    stack.push(t);
                    on_stack[t] = true;
                    descended = true;
                    break;
                } else if on_stack[t] {
                    low[v] = low[v].min(index[t]);
                }
            }
            if descended {
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut scc = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    scc.push(w);
                    if w == v {
                        break;
                    }
                }
                result.push(scc);
            }
        }
    }
    result
}

/// Brute-force reference solver: enumerates every positional strategy of
/// each player and checks which start vertices it wins. Only usable on tiny
/// arenas; `solve` must agree with it. Returns (O's region, I's region) as
/// vertex masks.
pub fn exhaustive_regions(arena: &ParityGameArena) -> Result<(Vec<bool>, Vec<bool>), GameError> {
    let n = arena.vertex_count();
    if n > 16 {
        return Err(GameError::TooLargeForExhaustive { vertices: n });
    }
    for p in [Player::O, Player::I] {
        let combos: u64 = (0..n)
            .filter(|&v| arena.owner(v) == p)
            .map(|v| arena.successors(v).len() as u64)
            .product();
        if combos > 1 << 20 {
            return Err(GameError::TooLargeForExhaustive { vertices: n });
        }
    }
    Ok((
        exhaustive_region(arena, Player::O),
        exhaustive_region(arena, Player::I),
    ))
}

fn exhaustive_region(arena: &ParityGameArena, p: Player) -> Vec<bool> {
    let n = arena.vertex_count();
    let owned: Vec<VertexId> = (0..n).filter(|&v| arena.owner(v) == p).collect();
    let mut choice = vec![0usize; owned.len()];
    let mut region = vec![false; n];
    loop {
        // Restrict p's moves to the current strategy; the opponent stays free.
        let succ: Vec<Vec<VertexId>> = (0..n)
            .map(|v| match owned.iter().position(|&o| o == v) {
                Some(i) => vec![arena.successors(v)[choice[i]]],
                None => arena.successors(v).to_vec(),
            })
            .collect();
        // A vertex lies on a bad cycle iff its color has the wrong parity
        // and it can reach itself through colors no larger than its own.
        let mut bad = vec![false; n];
        for x in 0..n {
            if arena.color(x).is_multiple_of(2) == p.good_even() {
                continue;
            }
            let cap = arena.color(x);
            let mut seen = vec![false; n];
            let mut queue: VecDeque<VertexId> = VecDeque::new();
            for &t in &succ[x] {
                if arena.color(t) <= cap && !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
            while let Some(v) = queue.pop_front() {
                if v == x {
                    bad[x] = true;
                    break;
                }
                for &t in &succ[v] {
                    if arena.color(t) <= cap && !seen[t] {
                        seen[t] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        // The strategy wins exactly the vertices that cannot reach a bad cycle.
        let mut reach_bad = bad.clone();
        let mut preds: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for (v, targets) in succ.iter().enumerate() {
            for &t in targets {
                preds[t].push(v);
            }
        }
        let mut queue: VecDeque<VertexId> = (0..n).filter(|&v| bad[v]).collect();
        while let Some(v) = queue.pop_front() {
            for &u in &preds[v] {
                if !reach_bad[u] {
                    reach_bad[u] = true;
                    queue.push_back(u);
                }
            }
        }
        for v in 0..n {
            if !reach_bad[v] {
                region[v] = true;
            }
        }
        // Next strategy (odometer).
        let mut i = 0;
        loop {
            if i == owned.len() {
                return region;
            }
            choice[i] += 1;
            if choice[i] < arena.successors(owned[i]).len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_vertex_arena() -> ParityGameArena {
        // v0: owner O, color 1, edges to v0 and v1; v1: owner I, color 2,
        // edge back to v0.
        ParityGameArena::new(
            vec![Player::O, Player::I],
            vec![1, 2],
            vec![vec![0, 1], vec![0]],
        )
        .unwrap()
    }

    #[test]
    fn solves_self_loops() {
        let even = ParityGameArena::new(vec![Player::O], vec![0], vec![vec![0]]).unwrap();
        let sol = solve(&even);
        assert_eq!(sol.winner(0), Player::O);
        assert_eq!(sol.strategy(0), Some(0));

        let odd = ParityGameArena::new(vec![Player::I], vec![1], vec![vec![0]]).unwrap();
        let sol = solve(&odd);
        assert_eq!(sol.winner(0), Player::I);
        assert_eq!(sol.strategy(0), Some(0));
    }

    #[test]
    fn solves_two_vertex_escape_game() {
        let arena = two_vertex_arena();
        let sol = solve(&arena);
        assert_eq!(sol.winners(), &[Player::O, Player::O]);
        assert_eq!(sol.strategy(0), Some(1));
        assert_eq!(sol.strategy(1), None);
        assert_eq!(sol.win_region(Player::O), vec![0, 1]);
        assert!(sol.win_region(Player::I).is_empty());
    }

    #[test]
    fn verifies_the_winning_and_losing_strategy() {
        let arena = two_vertex_arena();
        let to_v1 = vec![Some(1), None];
        assert!(verify_positional_strategy(&arena, Player::O, &to_v1, 0).unwrap());
        let self_loop = vec![Some(0), None];
        assert!(!verify_positional_strategy(&arena, Player::O, &self_loop, 0).unwrap());
    }

    #[test]
    fn verify_rejects_incomplete_or_invalid_strategies() {
        let arena = two_vertex_arena();
        assert_eq!(
            verify_positional_strategy(&arena, Player::O, &[None, None], 0).unwrap_err(),
            GameError::StrategyIncomplete { vertex: 0 }
        );
        // v1 is not... v0's successor 1 is valid; test an edge that does not exist.
        let arena2 = ParityGameArena::new(
            vec![Player::O, Player::I],
            vec![0, 0],
            vec![vec![1], vec![0]],
        )
        .unwrap();
        assert_eq!(
            verify_positional_strategy(&arena2, Player::O, &[Some(0), None], 0).unwrap_err(),
            GameError::StrategyEdge {
                vertex: 0,
                target: 0
            }
        );
        assert_eq!(
            verify_positional_strategy(&arena, Player::O, &[None, None], 9).unwrap_err(),
            GameError::VertexRange {
                vertex: 9,
                count: 2
            }
        );
    }

    #[test]
    fn all_even_colors_verify_under_any_strategy() {
        let arena = ParityGameArena::new(
            vec![Player::O, Player::O, Player::I],
            vec![0, 2, 4],
            vec![vec![1, 2], vec![0], vec![1, 0]],
        )
        .unwrap();
        for first in [1, 2] {
            let strategy = vec![Some(first), Some(0), None];
            assert!(verify_positional_strategy(&arena, Player::O, &strategy, 0).unwrap());
        }
    }

    #[test]
    fn lasso_winner_ignores_prefix() {
        assert_eq!(lasso_winner(&[], &[2]), Player::O);
        assert_eq!(lasso_winner(&[], &[1, 2, 3]), Player::I);
        assert_eq!(lasso_winner(&[5], &[0]), Player::O);
    }

    #[test]
    fn arena_validation() {
        assert_eq!(
            ParityGameArena::new(vec![Player::I], vec![0], vec![vec![]]).unwrap_err(),
            GameError::NoSuccessors { vertex: 0 }
        );
        assert_eq!(
            ParityGameArena::new(vec![Player::I], vec![0], vec![vec![3]]).unwrap_err(),
            GameError::VertexRange { vertex: 3, count: 1 }
        );
    }

    #[test]
    fn dump_text_lists_vertices() {
        let arena = two_vertex_arena();
        assert_eq!(arena.dump_text(), "0 O 1 0,1\n1 I 2 0\n");
    }

    #[test]
    fn exhaustive_oracle_matches_on_the_examples() {
        let arena = two_vertex_arena();
        let (o_region, i_region) = exhaustive_regions(&arena).unwrap();
        assert_eq!(o_region, vec![true, true]);
        assert_eq!(i_region, vec![false, false]);
    }

    use crate::cli::xcheck::random_arena;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn regions_partition_and_strategies_verify(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let arena = random_arena(&mut rng, 40, 5, 5);
            let sol = solve(&arena);
            for v in 0..arena.vertex_count() {
                let winner = sol.winner(v);
                // The winner's strategy must verify from every vertex of the region.
                prop_assert!(
                    verify_positional_strategy(&arena, winner, sol.strategies(), v).unwrap(),
                    "strategy fails from vertex {} of {}",
                    v,
                    arena.dump_text()
                );
                // Strategy entries exist exactly for the owner inside the owner's region.
                prop_assert_eq!(sol.strategy(v).is_some(), sol.winner(v) == arena.owner(v));
                if let Some(t) = sol.strategy(v) {
                    prop_assert!(arena.successors(v).contains(&t));
                    prop_assert_eq!(sol.winner(t), winner);
                }
            }
        }

        #[test]
        fn zielonka_matches_exhaustive_enumeration(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let arena = random_arena(&mut rng, 8, 3, 5);
            let sol = solve(&arena);
            let (o_region, i_region) = exhaustive_regions(&arena).unwrap();
            for v in 0..arena.vertex_count() {
                prop_assert!(o_region[v] != i_region[v], "determinacy violated at {}", v);
                let expect = if o_region[v] { Player::O } else { Player::I };
                prop_assert_eq!(
                    sol.winner(v),
                    expect,
                    "mismatch at vertex {} of\n{}",
                    v,
                    arena.dump_text()
                );
            }
        }

        #[test]
        fn dual_arena_swaps_regions(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let arena = random_arena(&mut rng, 24, 4, 4);
            let dual = ParityGameArena::new(
                (0..arena.vertex_count()).map(|v| arena.owner(v).opponent()).collect(),
                arena.colors().iter().map(|&c| c + 1).collect(),
                (0..arena.vertex_count()).map(|v| arena.successors(v).to_vec()).collect(),
            ).unwrap();
            let sol = solve(&arena);
            let dual_sol = solve(&dual);
            for v in 0..arena.vertex_count() {
                prop_assert_eq!(sol.winner(v), dual_sol.winner(v).opponent());
            }
        }
    }
}
