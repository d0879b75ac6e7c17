//! Exact finite normal-form games and per-player response primitives.
//!
//! Profiles are addressed either as an [`ActionProfile`] (one action per
//! player) or by their flat index. The flat encoding is mixed-radix with
//! player 0 most significant, and every module and file format uses it.

use std::fmt;
use std::str::FromStr;

use num::rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational reward.
pub type Payoff = Ratio<i64>;

pub const DEFAULT_MAX_PROFILES: usize = 1_000_000;
pub const DEFAULT_MAX_EDGES: usize = 100_000_000;
pub const DEFAULT_MAX_SUBGAMES: u128 = 10_000_000;

/// Size caps applied when building games and derived structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_profiles: usize,
    pub max_edges: usize,
    pub max_subgames: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_profiles: DEFAULT_MAX_PROFILES,
            max_edges: DEFAULT_MAX_EDGES,
            max_subgames: DEFAULT_MAX_SUBGAMES,
        }
    }
}

impl Limits {
    pub fn with_max_profiles(max_profiles: usize) -> Self {
        Limits {
            max_profiles,
            ..Limits::default()
        }
    }

    pub(crate) fn check_profiles(&self, count: usize) -> Result<()> {
        if count > self.max_profiles {
            return Err(Error::resource(
                "profile count",
                count as u128,
                self.max_profiles as u128,
            ));
        }
        Ok(())
    }
}

/// One action index per player.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionProfile(Vec<usize>);

impl ActionProfile {
    pub fn new(actions: Vec<usize>) -> Self {
        ActionProfile(actions)
    }

    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl From<Vec<usize>> for ActionProfile {
    fn from(v: Vec<usize>) -> Self {
        ActionProfile(v)
    }
}

impl std::ops::Index<usize> for ActionProfile {
    type Output = usize;

    fn index(&self, player: usize) -> &usize {
        &self.0[player]
    }
}

/// A sorted set of player indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerSubset(Vec<usize>);

impl PlayerSubset {
    /// Builds a subset of `{0, .., num_players - 1}`; duplicates are merged.
    pub fn new(mut members: Vec<usize>, num_players: usize) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&p| p >= num_players) {
            return Err(Error::domain(format!(
                "player {bad} out of range for a {num_players}-player game"
            )));
        }
        Ok(PlayerSubset(members))
    }

    pub fn empty() -> Self {
        PlayerSubset(Vec::new())
    }

    pub fn all(num_players: usize) -> Self {
        PlayerSubset((0..num_players).collect())
    }

    pub fn contains(&self, player: usize) -> bool {
        self.0.binary_search(&player).is_ok()
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

/// An assignment of actions to some of the players; `None` marks a free player.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartialProfile(Vec<Option<usize>>);

impl PartialProfile {
    pub fn new(assignments: Vec<Option<usize>>) -> Self {
        PartialProfile(assignments)
    }

    /// No player fixed.
    pub fn free(num_players: usize) -> Self {
        PartialProfile(vec![None; num_players])
    }

    pub fn from_pairs(num_players: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut v = vec![None; num_players];
        for &(player, action) in pairs {
            let slot = v
                .get_mut(player)
                .ok_or_else(|| Error::domain(format!("player {player} out of range")))?;
            *slot = Some(action);
        }
        Ok(PartialProfile(v))
    }

    pub fn get(&self, player: usize) -> Option<usize> {
        self.0.get(player).copied().flatten()
    }

    pub fn assignments(&self) -> &[Option<usize>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A subgame obtained by freezing the players outside `players` at `fixed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedSubgame {
    pub game: Game,
    /// Parent indices of the subgame's players, in subgame order.
    pub players: PlayerSubset,
    /// Frozen actions of the parent players outside `players`.
    pub fixed: PartialProfile,
}

impl InducedSubgame {
    /// Lifts a subgame profile to the parent profile it stands for.
    pub fn lift(&self, sub: &ActionProfile) -> ActionProfile {
        let mut actions: Vec<usize> = self
            .fixed
            .assignments()
            .iter()
            .map(|a| a.unwrap_or(0))
            .collect();
        for (k, player) in self.players.iter().enumerate() {
            actions[player] = sub[k];
        }
        ActionProfile(actions)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    action_counts: Vec<usize>,
    /// `strides[i]` is the flat-index weight of player `i`'s action.
    strides: Vec<usize>,
    num_profiles: usize,
    /// Player-major: `payoffs[player * num_profiles + flat]`.
    payoffs: Vec<Payoff>,
    labels: Option<Vec<Vec<String>>>,
}

fn layout(action_counts: &[usize], limits: &Limits) -> Result<(Vec<usize>, usize)> {
    let mut strides = vec![0; action_counts.len()];
    let mut total: usize = 1;
    for (i, &k) in action_counts.iter().enumerate().rev() {
        if k == 0 {
            return Err(Error::domain(format!("player {i} has no actions")));
        }
        strides[i] = total;
        total = total.checked_mul(k).ok_or_else(|| {
            Error::resource("profile count", u128::MAX, limits.max_profiles as u128)
        })?;
    }
    limits.check_profiles(total)?;
    Ok((strides, total))
}

impl Game {
    /// `payoffs[i][flat]` is player `i`'s reward at profile `flat`.
    pub fn new(action_counts: Vec<usize>, payoffs: Vec<Vec<Payoff>>) -> Result<Self> {
        Self::with_limits(action_counts, payoffs, &Limits::default())
    }

    pub fn with_limits(
        action_counts: Vec<usize>,
        payoffs: Vec<Vec<Payoff>>,
        limits: &Limits,
    ) -> Result<Self> {
        if action_counts.is_empty() {
            return Err(Error::domain("a game needs at least one player"));
        }
        let (strides, num_profiles) = layout(&action_counts, limits)?;
        if payoffs.len() != action_counts.len() {
            return Err(Error::domain(format!(
                "expected payoffs for {} players, got {}",
                action_counts.len(),
                payoffs.len()
            )));
        }
        let mut flat = Vec::with_capacity(num_profiles * action_counts.len());
        for (i, p) in payoffs.into_iter().enumerate() {
            if p.len() != num_profiles {
                return Err(Error::domain(format!(
                    "player {i}: expected {num_profiles} payoffs, got {}",
                    p.len()
                )));
            }
            flat.extend(p);
        }
        Ok(Game {
            action_counts,
            strides,
            num_profiles,
            payoffs: flat,
            labels: None,
        })
    }

    /// Builds a game from a reward function `f(player, actions)`.
    pub fn from_fn<F>(action_counts: Vec<usize>, limits: &Limits, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &[usize]) -> Payoff,
    {
        if action_counts.is_empty() {
            return Err(Error::domain("a game needs at least one player"));
        }
        let (strides, num_profiles) = layout(&action_counts, limits)?;
        let n = action_counts.len();
        let mut payoffs = Vec::with_capacity(n * num_profiles);
        let mut actions = vec![0; n];
        for player in 0..n {
            for flat in 0..num_profiles {
                decode_into(&action_counts, &strides, flat, &mut actions);
                payoffs.push(f(player, &actions));
            }
        }
        Ok(Game {
            action_counts,
            strides,
            num_profiles,
            payoffs,
            labels: None,
        })
    }

    /// Integer payoffs, `payoffs[i][flat]`.
    pub fn from_integers(action_counts: Vec<usize>, payoffs: Vec<Vec<i64>>) -> Result<Self> {
        let exact = payoffs
            .into_iter()
            .map(|p| p.into_iter().map(Payoff::from_integer).collect())
            .collect();
        Self::new(action_counts, exact)
    }

    /// Two-player game from row-player and column-player matrices.
    pub fn bimatrix(row: &[Vec<i64>], col: &[Vec<i64>]) -> Result<Self> {
        let rows = row.len();
        let cols = row.first().map_or(0, Vec::len);
        if col.len() != rows
            || row.iter().any(|r| r.len() != cols)
            || col.iter().any(|r| r.len() != cols)
        {
            return Err(Error::domain(
                "bimatrix payoff matrices must share one rectangular shape",
            ));
        }
        let flatten = |m: &[Vec<i64>]| m.iter().flatten().copied().collect::<Vec<_>>();
        Self::from_integers(vec![rows, cols], vec![flatten(row), flatten(col)])
    }

    pub fn zeros(action_counts: Vec<usize>) -> Result<Self> {
        Self::from_fn(action_counts, &Limits::default(), |_, _| {
            Payoff::from_integer(0)
        })
    }

    /// The game with no players and its single empty profile.
    pub(crate) fn empty() -> Self {
        Game {
            action_counts: Vec::new(),
            strides: Vec::new(),
            num_profiles: 1,
            payoffs: Vec::new(),
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Result<Self> {
        if labels.len() != self.num_players()
            || labels
                .iter()
                .zip(&self.action_counts)
                .any(|(l, &k)| l.len() != k)
        {
            return Err(Error::domain("action labels must match the action counts"));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn num_profiles(&self) -> usize {
        self.num_profiles
    }

    pub fn labels(&self) -> Option<&[Vec<String>]> {
        self.labels.as_deref()
    }

    /// True when both games have the same shape and identical rewards (labels ignored).
    pub fn payoff_identical(&self, other: &Game) -> bool {
        self.action_counts == other.action_counts && self.payoffs == other.payoffs
    }

    pub fn action_label(&self, player: usize, action: usize) -> String {
        match &self.labels {
            Some(l) => l[player][action].clone(),
            None => action.to_string(),
        }
    }

    pub fn profile_labels(&self, flat: usize) -> Vec<String> {
        (0..self.num_players())
            .map(|i| self.action_label(i, self.action_of(flat, i)))
            .collect()
    }

    /// `(T,L)`-style rendering of a profile.
    pub fn profile_label(&self, flat: usize) -> String {
        format!("({})", self.profile_labels(flat).join(","))
    }

    fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.num_players() {
            return Err(Error::domain(format!(
                "player {player} out of range for a {}-player game",
                self.num_players()
            )));
        }
        Ok(())
    }

    pub fn encode(&self, profile: &ActionProfile) -> Result<usize> {
        if profile.len() != self.num_players() {
            return Err(Error::domain(format!(
                "profile has {} actions, game has {} players",
                profile.len(),
                self.num_players()
            )));
        }
        let mut flat = 0;
        for (i, (&a, &k)) in profile
            .actions()
            .iter()
            .zip(&self.action_counts)
            .enumerate()
        {
            if a >= k {
                return Err(Error::domain(format!(
                    "action {a} out of range for player {i} ({k} actions)"
                )));
            }
            flat += a * self.strides[i];
        }
        Ok(flat)
    }

    /// Panics if `flat` is not below [`Game::num_profiles`].
    pub fn decode(&self, flat: usize) -> ActionProfile {
        assert!(flat < self.num_profiles, "flat index {flat} out of range");
        let mut actions = vec![0; self.num_players()];
        decode_into(&self.action_counts, &self.strides, flat, &mut actions);
        ActionProfile(actions)
    }

    #[inline]
    pub fn action_of(&self, flat: usize, player: usize) -> usize {
        (flat / self.strides[player]) % self.action_counts[player]
    }

    #[inline]
    pub fn stride(&self, player: usize) -> usize {
        self.strides[player]
    }

    /// Flat index of `flat` with `player`'s action replaced by `action`.
    #[inline]
    pub fn with_action(&self, flat: usize, player: usize, action: usize) -> usize {
        let s = self.strides[player];
        flat - self.action_of(flat, player) * s + action * s
    }

    pub fn payoff(&self, player: usize, profile: &ActionProfile) -> Result<Payoff> {
        self.check_player(player)?;
        let flat = self.encode(profile)?;
        Ok(self.payoff_at(player, flat))
    }

    #[inline]
    pub fn payoff_at(&self, player: usize, flat: usize) -> Payoff {
        self.payoffs[player * self.num_profiles + flat]
    }

    /// Player `player`'s rewards over all profiles, indexed by flat index.
    pub fn payoffs_of(&self, player: usize) -> &[Payoff] {
        let p = self.num_profiles;
        &self.payoffs[player * p..(player + 1) * p]
    }

    /// Rewards of `player` along its own action axis through `flat`.
    fn line(&self, player: usize, flat: usize) -> impl Iterator<Item = Payoff> + '_ {
        let s = self.strides[player];
        let base = flat - self.action_of(flat, player) * s;
        let row = self.payoffs_of(player);
        (0..self.action_counts[player]).map(move |a| row[base + a * s])
    }

    fn line_max(&self, player: usize, flat: usize) -> Payoff {
        self.line(player, flat)
            .max()
            .expect("every player has an action")
    }

    /// Argmax actions of `player` against the others' actions, given in
    /// player order with `player` itself omitted.
    pub fn best_responses(&self, player: usize, counterprofile: &[usize]) -> Result<Vec<usize>> {
        self.check_player(player)?;
        if counterprofile.len() + 1 != self.num_players() {
            return Err(Error::domain(format!(
                "counterprofile must list {} actions",
                self.num_players() - 1
            )));
        }
        let mut actions = counterprofile.to_vec();
        actions.insert(player, 0);
        let flat = self.encode(&ActionProfile(actions))?;
        Ok(self.best_responses_at(player, flat))
    }

    /// Best responses of `player` to the counterprofile of `flat`.
    pub fn best_responses_at(&self, player: usize, flat: usize) -> Vec<usize> {
        let m = self.line_max(player, flat);
        self.line(player, flat)
            .enumerate()
            .filter_map(|(a, r)| (r == m).then_some(a))
            .collect()
    }

    pub fn better_responses(&self, player: usize, profile: &ActionProfile) -> Result<Vec<usize>> {
        self.check_player(player)?;
        let flat = self.encode(profile)?;
        Ok(self.better_responses_at(player, flat))
    }

    /// Actions doing at least as well as the current one (weak inequality).
    pub fn better_responses_at(&self, player: usize, flat: usize) -> Vec<usize> {
        let current = self.payoff_at(player, flat);
        self.line(player, flat)
            .enumerate()
            .filter_map(|(a, r)| (r >= current).then_some(a))
            .collect()
    }

    #[inline]
    pub fn is_satisfied_at(&self, player: usize, flat: usize) -> bool {
        let current = self.payoff_at(player, flat);
        self.line(player, flat).all(|r| r <= current)
    }

    /// True when `player`'s current action is the unique maximizer.
    pub fn is_strict_best_at(&self, player: usize, flat: usize) -> bool {
        let own = self.action_of(flat, player);
        let current = self.payoff_at(player, flat);
        self.line(player, flat)
            .enumerate()
            .all(|(a, r)| a == own || r < current)
    }

    pub fn satisfied_set(&self, profile: &ActionProfile) -> Result<PlayerSubset> {
        let flat = self.encode(profile)?;
        Ok(PlayerSubset(self.satisfied_at(flat)))
    }

    pub fn satisfied_at(&self, flat: usize) -> Vec<usize> {
        (0..self.num_players())
            .filter(|&i| self.is_satisfied_at(i, flat))
            .collect()
    }

    pub fn unsatisfied_at(&self, flat: usize) -> Vec<usize> {
        (0..self.num_players())
            .filter(|&i| !self.is_satisfied_at(i, flat))
            .collect()
    }

    pub fn is_pure_nash_at(&self, flat: usize) -> bool {
        (0..self.num_players()).all(|i| self.is_satisfied_at(i, flat))
    }

    /// Flat indices of all pure Nash equilibria, ascending.
    pub fn pure_nash_flat(&self) -> Vec<usize> {
        (0..self.num_profiles)
            .filter(|&f| self.is_pure_nash_at(f))
            .collect()
    }

    pub fn enumerate_pure_nash(&self) -> Vec<ActionProfile> {
        self.pure_nash_flat()
            .into_iter()
            .map(|f| self.decode(f))
            .collect()
    }

    pub fn is_strict_pure_nash(&self, profile: &ActionProfile) -> Result<bool> {
        let flat = self.encode(profile)?;
        Ok(self.is_strict_pure_nash_at(flat))
    }

    pub fn is_strict_pure_nash_at(&self, flat: usize) -> bool {
        (0..self.num_players()).all(|i| self.is_strict_best_at(i, flat))
    }

    /// Freezes every player outside `keep` at its action in `fixed`.
    pub fn induced_subgame(
        &self,
        keep: &PlayerSubset,
        fixed: &PartialProfile,
    ) -> Result<InducedSubgame> {
        let n = self.num_players();
        if fixed.len() != n {
            return Err(Error::domain(format!(
                "partial profile has {} slots, game has {n} players",
                fixed.len()
            )));
        }
        if let Some(&bad) = keep.members().iter().find(|&&p| p >= n) {
            return Err(Error::domain(format!("player {bad} out of range")));
        }
        for i in 0..n {
            match (keep.contains(i), fixed.get(i)) {
                (true, Some(_)) => {
                    return Err(Error::domain(format!("player {i} is both kept and fixed")))
                }
                (false, None) => {
                    return Err(Error::domain(format!(
                        "player {i} is neither kept nor fixed"
                    )))
                }
                (false, Some(a)) if a >= self.action_counts[i] => {
                    return Err(Error::domain(format!(
                        "fixed action {a} out of range for player {i}"
                    )))
                }
                _ => {}
            }
        }

        let mut base = 0;
        for i in 0..n {
            if let Some(a) = fixed.get(i) {
                base += a * self.strides[i];
            }
        }

        let game = if keep.is_empty() {
            Game::empty()
        } else {
            let counts: Vec<usize> = keep.iter().map(|i| self.action_counts[i]).collect();
            let (strides, num_profiles) = layout(&counts, &Limits::with_max_profiles(usize::MAX))?;
            let mut sub_actions = vec![0; counts.len()];
            let mut parent_flats = Vec::with_capacity(num_profiles);
            for sub in 0..num_profiles {
                decode_into(&counts, &strides, sub, &mut sub_actions);
                let parent = keep
                    .iter()
                    .zip(&sub_actions)
                    .fold(base, |acc, (i, &a)| acc + a * self.strides[i]);
                parent_flats.push(parent);
            }
            let mut payoffs = Vec::with_capacity(keep.len() * num_profiles);
            for i in keep.iter() {
                payoffs.extend(parent_flats.iter().map(|&f| self.payoff_at(i, f)));
            }
            let labels = self
                .labels
                .as_ref()
                .map(|l| keep.iter().map(|i| l[i].clone()).collect());
            Game {
                action_counts: counts,
                strides,
                num_profiles,
                payoffs,
                labels,
            }
        };

        Ok(InducedSubgame {
            game,
            players: keep.clone(),
            fixed: fixed.clone(),
        })
    }
}

pub(crate) fn decode_into(counts: &[usize], strides: &[usize], flat: usize, out: &mut [usize]) {
    for i in 0..counts.len() {
        out[i] = (flat / strides[i]) % counts[i];
    }
}

/// Built-in example games.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedExample {
    /// Discoordination: no pure equilibrium.
    Fig1,
    /// Pure equilibrium, generalized weakly acyclic but not weakly acyclic.
    Fig2,
    /// Pure equilibrium, not generalized weakly acyclic.
    Fig3,
}

type Matrix = Vec<Vec<i64>>;

impl NamedExample {
    pub const ALL: [NamedExample; 3] = [NamedExample::Fig1, NamedExample::Fig2, NamedExample::Fig3];

    pub fn as_str(self) -> &'static str {
        match self {
            NamedExample::Fig1 => "fig1",
            NamedExample::Fig2 => "fig2",
            NamedExample::Fig3 => "fig3",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            NamedExample::Fig1 => "discoordination game (no pure Nash equilibrium)",
            NamedExample::Fig2 => "pure Nash equilibrium, not weakly acyclic",
            NamedExample::Fig3 => "pure Nash equilibrium, not generalized weakly acyclic",
        }
    }

    pub fn game(self) -> Game {
        let (row, col, labels): (Matrix, Matrix, [&[&str]; 2]) = match self {
            NamedExample::Fig1 => (
                vec![vec![1, 0], vec![0, 1]],
                vec![vec![0, 1], vec![1, 0]],
                [&["A", "B"], &["a", "b"]],
            ),
            NamedExample::Fig2 => (
                vec![vec![9, 0, 0], vec![0, 2, 1], vec![0, 1, 2]],
                vec![vec![9, 0, 0], vec![0, 1, 2], vec![0, 2, 1]],
                [&["T", "M", "B"], &["L", "C", "R"]],
            ),
            NamedExample::Fig3 => (
                vec![vec![1, 0, 0], vec![1, 1, 0], vec![1, 0, 1]],
                vec![vec![1, 1, 1], vec![0, 0, 1], vec![0, 1, 0]],
                [&["T", "M", "B"], &["L", "C", "R"]],
            ),
        };
        let labels = labels
            .iter()
            .map(|l| l.iter().map(|s| s.to_string()).collect())
            .collect();
        Game::bimatrix(&row, &col)
            .and_then(|g| g.with_labels(labels))
            .expect("embedded examples are well formed")
    }
}

impl FromStr for NamedExample {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(NamedExample::Fig1),
            "fig2" => Ok(NamedExample::Fig2),
            "fig3" => Ok(NamedExample::Fig3),
            other => Err(Error::domain(format!(
                "unknown example {other:?} (expected fig1, fig2 or fig3)"
            ))),
        }
    }
}

impl fmt::Display for NamedExample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn named_example(name: &str) -> Result<Game> {
    Ok(name.parse::<NamedExample>()?.game())
}
