//! Brute-force reference implementations used to cross-check the library.
//!
//! Everything here works from raw payoff lookups and explicit profile
//! vectors; none of it calls the library's response, graph or chain code.

#![allow(dead_code)]

use genwag::{Game, GraphKind, Payoff};
use proptest::prelude::*;

pub fn profiles(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &k in counts {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn flat(counts: &[usize], a: &[usize]) -> usize {
    a.iter().zip(counts).fold(0, |acc, (&x, &k)| acc * k + x)
}

pub fn u(game: &Game, i: usize, a: &[usize]) -> Payoff {
    game.payoff_at(i, flat(game.action_counts(), a))
}

fn deviate(a: &[usize], i: usize, x: usize) -> Vec<usize> {
    let mut b = a.to_vec();
    b[i] = x;
    b
}

pub fn satisfied(game: &Game, i: usize, a: &[usize]) -> bool {
    let here = u(game, i, a);
    (0..game.action_counts()[i]).all(|x| u(game, i, &deviate(a, i, x)) <= here)
}

pub fn is_nash(game: &Game, a: &[usize]) -> bool {
    (0..a.len()).all(|i| satisfied(game, i, a))
}

pub fn is_strict_nash(game: &Game, a: &[usize]) -> bool {
    (0..a.len()).all(|i| {
        let here = u(game, i, a);
        (0..game.action_counts()[i]).all(|x| x == a[i] || u(game, i, &deviate(a, i, x)) < here)
    })
}

pub fn edge(game: &Game, kind: GraphKind, a1: &[usize], a2: &[usize]) -> bool {
    (0..a1.len()).all(|i| {
        if satisfied(game, i, a1) {
            return a2[i] == a1[i];
        }
        if a2[i] == a1[i] {
            return true;
        }
        let moved = u(game, i, &deviate(a1, i, a2[i]));
        match kind {
            GraphKind::Best => satisfied(game, i, &deviate(a1, i, a2[i])),
            GraphKind::Better => moved >= u(game, i, a1),
            GraphKind::Sat => true,
        }
    })
}

/// `adj[x][y]` for distinct profiles, by exhaustive pair testing.
pub fn adjacency(game: &Game, kind: GraphKind) -> Vec<Vec<bool>> {
    let ps = profiles(game.action_counts());
    ps.iter()
        .map(|a| {
            ps.iter()
                .map(|b| a != b && edge(game, kind, a, b))
                .collect()
        })
        .collect()
}

/// Reflexive-transitive closure by Warshall's algorithm.
pub fn closure(adj: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = adj.len();
    let mut r: Vec<Vec<bool>> = adj.to_vec();
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for k in 0..n {
        let via = r[k].clone();
        for row in r.iter_mut() {
            if row[k] {
                for (x, &v) in row.iter_mut().zip(&via) {
                    *x |= v;
                }
            }
        }
    }
    r
}

pub fn nash_flats(game: &Game) -> Vec<usize> {
    profiles(game.action_counts())
        .iter()
        .enumerate()
        .filter(|(_, a)| is_nash(game, a))
        .map(|(f, _)| f)
        .collect()
}

/// Per-start forward search: does each profile reach a pure equilibrium?
pub fn reaches_nash(game: &Game, kind: GraphKind) -> Vec<bool> {
    let adj = adjacency(game, kind);
    let nash = nash_flats(game);
    let n = adj.len();
    (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(x) = stack.pop() {
                if nash.contains(&x) {
                    return true;
                }
                for y in 0..n {
                    if adj[x][y] && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            false
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdicts {
    pub has_pure_nash: bool,
    pub weakly_acyclic: bool,
    pub genwag: bool,
}

pub fn classify(game: &Game) -> Verdicts {
    let has = !nash_flats(game).is_empty();
    Verdicts {
        has_pure_nash: has,
        weakly_acyclic: has && reaches_nash(game, GraphKind::Better).iter().all(|&b| b),
        genwag: has && reaches_nash(game, GraphKind::Sat).iter().all(|&b| b),
    }
}

/// Satisficing-chain transition probability from the update rule directly.
pub fn transition(game: &Game, a1: &[usize], a2: &[usize]) -> Payoff {
    let mut p = Payoff::from_integer(1);
    for i in 0..a1.len() {
        if satisfied(game, i, a1) {
            if a2[i] != a1[i] {
                return Payoff::from_integer(0);
            }
        } else {
            p /= game.action_counts()[i] as i64;
        }
    }
    p
}

/// Closed communicating classes from mutual reachability in the kernel support.
pub fn closed_classes(game: &Game) -> Vec<Vec<usize>> {
    let ps = profiles(game.action_counts());
    let adj: Vec<Vec<bool>> = ps
        .iter()
        .map(|a| {
            ps.iter()
                .map(|b| transition(game, a, b) > Payoff::from_integer(0))
                .collect()
        })
        .collect();
    let r = closure(&adj);
    let n = ps.len();
    let mut seen = vec![false; n];
    let mut closed = Vec::new();
    for x in 0..n {
        if seen[x] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&y| r[x][y] && r[y][x]).collect();
        for &m in &class {
            seen[m] = true;
        }
        if (0..n).all(|y| !r[x][y] || r[y][x]) {
            closed.push(class);
        }
    }
    closed
}

/// Absorption probabilities by iterating the kernel in floating point.
pub fn absorption_by_iteration(game: &Game, rounds: usize) -> Vec<f64> {
    let ps = profiles(game.action_counts());
    let n = ps.len();
    let p: Vec<Vec<f64>> = ps
        .iter()
        .map(|a| {
            ps.iter()
                .map(|b| {
                    let t = transition(game, a, b);
                    *t.numer() as f64 / *t.denom() as f64
                })
                .collect()
        })
        .collect();
    let nash = nash_flats(game);
    let mut h: Vec<f64> = (0..n)
        .map(|x| if nash.contains(&x) { 1.0 } else { 0.0 })
        .collect();
    for _ in 0..rounds {
        h = (0..n)
            .map(|x| (0..n).map(|y| p[x][y] * h[y]).sum())
            .collect();
    }
    h
}

/// Pure equilibria and strict pure equilibria of each induced subgame,
/// visited as one `Option` per player (`None` = kept).
pub fn subgame_counts(game: &Game) -> Vec<(Vec<Option<usize>>, usize, usize)> {
    let counts = game.action_counts();
    let choices: Vec<usize> = counts.iter().map(|k| k + 1).collect();
    profiles(&choices)
        .into_iter()
        .map(|code| {
            let fixed: Vec<Option<usize>> = code
                .iter()
                .zip(counts)
                .map(|(&c, &k)| (c < k).then_some(c))
                .collect();
            let free: Vec<usize> = (0..counts.len()).filter(|&i| fixed[i].is_none()).collect();
            let free_counts: Vec<usize> = free.iter().map(|&i| counts[i]).collect();
            let mut nash = 0;
            let mut strict = 0;
            for sub in profiles(&free_counts) {
                let mut a: Vec<usize> = fixed.iter().map(|x| x.unwrap_or(0)).collect();
                for (&i, &x) in free.iter().zip(&sub) {
                    a[i] = x;
                }
                let ne = free.iter().all(|&i| satisfied(game, i, &a));
                let st = free.iter().all(|&i| {
                    let here = u(game, i, &a);
                    (0..counts[i]).all(|x| x == a[i] || u(game, i, &deviate(&a, i, x)) < here)
                });
                nash += ne as usize;
                strict += (ne && st) as usize;
            }
            (fixed, nash, strict)
        })
        .collect()
}

pub fn isp(game: &Game) -> bool {
    subgame_counts(game)
        .iter()
        .all(|&(_, n, s)| n == 1 && s == 1)
}

pub fn conjecture_hypothesis(game: &Game) -> bool {
    subgame_counts(game).iter().all(|&(_, _, s)| s >= 1)
}

/// Small games with heavy payoff ties: 1 to 3 players, 1 to 3 actions each.
pub fn small_game() -> impl Strategy<Value = Game> {
    prop::collection::vec(1usize..=3, 1..=3)
        .prop_flat_map(|counts| {
            let profiles: usize = counts.iter().product();
            let n = counts.len();
            (
                Just(counts),
                prop::collection::vec(prop::collection::vec(0i64..=3, profiles), n),
            )
        })
        .prop_map(|(counts, payoffs)| Game::from_integers(counts, payoffs).unwrap())
}

pub fn two_player_game() -> impl Strategy<Value = Game> {
    (1usize..=3, 1usize..=3)
        .prop_flat_map(|(r, c)| {
            prop::collection::vec(prop::collection::vec(0i64..=2, r * c), 2)
                .prop_map(move |p| (r, c, p))
        })
        .prop_map(|(r, c, p)| Game::from_integers(vec![r, c], p).unwrap())
}
