//! Strict-equilibrium sufficient conditions and induced-subgame scans.
//!
//! Three checks are provided:
//!
//! - [`check_theorem2`]: a two-player game with a strict pure Nash
//!   equilibrium is generalized weakly acyclic.
//! - [`check_isp`]: the induced subgame property. Every induced subgame has a
//!   unique pure Nash equilibrium and it is strict. Sufficient for any
//!   number of players.
//! - [`check_conjecture_hypothesis`]: every induced subgame has at least one
//!   strict pure Nash equilibrium. Whether this suffices for three or more
//!   players is open; the check only evaluates instances.
//!
//! Subgames are visited with the kept-player set growing in size, subsets of
//! equal size in lexicographic order, then fixed profiles in lexicographic
//! order. The first failure in that order is the reported witness.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::format::game_to_json;
use crate::game::{Game, InducedSubgame, Limits, PartialProfile, PlayerSubset};
use crate::graph::ProfileRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Theorem2,
    Isp,
    ConjectureHypothesis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scan {
    /// Stop at the first failing subgame.
    #[default]
    FirstFailure,
    /// Visit every subgame and list all failures.
    Exhaustive,
}

/// A failing induced subgame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgameWitness {
    /// Parent indices of the kept players.
    pub players: Vec<usize>,
    /// Frozen action per parent player; `null` for kept players.
    pub fixed: Vec<Option<usize>>,
    /// The subgame in game file format.
    pub game: Value,
    pub pure_nash: usize,
    pub strict_pure_nash: usize,
}

impl SubgameWitness {
    fn new(sub: &InducedSubgame, pure_nash: usize, strict_pure_nash: usize) -> Self {
        SubgameWitness {
            players: sub.players.members().to_vec(),
            fixed: sub.fixed.assignments().to_vec(),
            game: game_to_json(&sub.game),
            pure_nash,
            strict_pure_nash,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Witness {
    StrictNash { profile: ProfileRef },
    Subgame(SubgameWitness),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub condition: Condition,
    pub holds: bool,
    pub witness: Option<Witness>,
    /// Failures after the first, filled only by [`Scan::Exhaustive`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub further_failures: Vec<SubgameWitness>,
}

pub fn strict_pure_nash_flat(game: &Game) -> Vec<usize> {
    game.pure_nash_flat()
        .into_iter()
        .filter(|&f| game.is_strict_pure_nash_at(f))
        .collect()
}

pub fn strict_pure_nash_set(game: &Game) -> Vec<crate::game::ActionProfile> {
    strict_pure_nash_flat(game)
        .into_iter()
        .map(|f| game.decode(f))
        .collect()
}

pub fn check_theorem2(game: &Game) -> ConditionVerdict {
    let witness = if game.num_players() == 2 {
        strict_pure_nash_flat(game)
            .first()
            .map(|&f| Witness::StrictNash {
                profile: ProfileRef::new(game, f),
            })
    } else {
        None
    };
    ConditionVerdict {
        condition: Condition::Theorem2,
        holds: witness.is_some(),
        witness,
        further_failures: Vec::new(),
    }
}

/// `sum_{N ⊆ [n]} prod_{i ∉ N} |A^i|`, which factors as `prod_i (1 + |A^i|)`.
pub fn induced_subgame_count(game: &Game) -> u128 {
    game.action_counts()
        .iter()
        .fold(1u128, |acc, &k| acc.saturating_mul(1 + k as u128))
}

fn subsets_by_size(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(1 << n.min(20));
    for size in 0..=n {
        // Lexicographic combinations of `size` out of `n`.
        let mut comb: Vec<usize> = (0..size).collect();
        loop {
            out.push(comb.clone());
            let mut i = size;
            let advanced = loop {
                if i == 0 {
                    break false;
                }
                i -= 1;
                if comb[i] < n - size + i {
                    comb[i] += 1;
                    for j in i + 1..size {
                        comb[j] = comb[j - 1] + 1;
                    }
                    break true;
                }
            };
            if !advanced {
                break;
            }
        }
    }
    out
}

/// Every induced subgame exactly once, in the documented order.
pub fn enumerate_induced_subgames<'g>(
    game: &'g Game,
    limits: &Limits,
) -> Result<impl Iterator<Item = InducedSubgame> + 'g> {
    let total = induced_subgame_count(game);
    if total > limits.max_subgames {
        return Err(Error::resource(
            "induced subgame count",
            total,
            limits.max_subgames,
        ));
    }
    let n = game.num_players();
    let counts = game.action_counts().to_vec();
    Ok(subsets_by_size(n).into_iter().flat_map(move |members| {
        let keep = PlayerSubset::new(members, n).expect("generated subsets lie in range");
        let free: Vec<usize> = (0..n).filter(|&i| !keep.contains(i)).collect();
        let combos: usize = free.iter().map(|&i| counts[i]).product();
        let counts = counts.clone();
        (0..combos).map(move |mut k| {
            let mut fixed = vec![None; n];
            for &i in free.iter().rev() {
                fixed[i] = Some(k % counts[i]);
                k /= counts[i];
            }
            game.induced_subgame(&keep, &PartialProfile::new(fixed))
                .expect("enumerated partial profile is valid")
        })
    }))
}

fn scan(
    game: &Game,
    condition: Condition,
    mode: Scan,
    limits: &Limits,
    passes: impl Fn(usize, usize) -> bool,
) -> Result<ConditionVerdict> {
    let mut failures = Vec::new();
    for sub in enumerate_induced_subgames(game, limits)? {
        let nash = sub.game.pure_nash_flat();
        let strict = nash
            .iter()
            .filter(|&&f| sub.game.is_strict_pure_nash_at(f))
            .count();
        if !passes(nash.len(), strict) {
            failures.push(SubgameWitness::new(&sub, nash.len(), strict));
            if mode == Scan::FirstFailure {
                break;
            }
        }
    }
    let mut failures = failures.into_iter();
    let witness = failures.next().map(Witness::Subgame);
    Ok(ConditionVerdict {
        condition,
        holds: witness.is_none(),
        witness,
        further_failures: failures.collect(),
    })
}

/// Induced subgame property: exactly one pure Nash equilibrium per induced subgame, and it is strict.
pub fn check_isp(game: &Game, mode: Scan, limits: &Limits) -> Result<ConditionVerdict> {
    scan(game, Condition::Isp, mode, limits, |nash, strict| {
        nash == 1 && strict == 1
    })
}

/// At least one strict pure Nash equilibrium per induced subgame.
pub fn check_conjecture_hypothesis(
    game: &Game,
    mode: Scan,
    limits: &Limits,
) -> Result<ConditionVerdict> {
    scan(
        game,
        Condition::ConjectureHypothesis,
        mode,
        limits,
        |_, strict| strict >= 1,
    )
}

pub fn check(
    game: &Game,
    condition: Condition,
    mode: Scan,
    limits: &Limits,
) -> Result<ConditionVerdict> {
    match condition {
        Condition::Theorem2 => Ok(check_theorem2(game)),
        Condition::Isp => check_isp(game, mode, limits),
        Condition::ConjectureHypothesis => check_conjecture_hypothesis(game, mode, limits),
    }
}
