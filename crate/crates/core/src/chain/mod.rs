//! The satisficing Markov chain and the inertial better-response dynamics.
//!
//! Under the satisficing chain a satisfied player repeats its action and each
//! unsatisfied player independently redraws uniformly from its whole action
//! set. The support of the kernel row at `a` is therefore every profile that
//! agrees with `a` on the satisfied players, each with probability
//! `prod_{i unsatisfied} 1/|A^i|`.

mod absorption;
mod classes;
mod rng;

use num::rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game, Limits};
use crate::graph::{for_each_joint_move, ProfileRef};

pub use absorption::{
    absorption_probability, analyze_absorption, expected_steps_to_nash, AbsorptionAnalysis,
    Probability, SolveMethod, EXACT_SOLVE_LIMIT, RESIDUAL_BOUND,
};
pub use classes::{communicating_classes, CommunicatingClass};
pub use rng::{TrajectoryRng, RNG_ALGORITHM};

/// Exact transition probability.
pub type Prob = Ratio<i64>;

/// Sparse row-stochastic kernel over flat profile indices.
///
/// All supported entries of a row share one probability, so a row is stored
/// as its support plus that value.
#[derive(Debug, Clone)]
pub struct ChainKernel<'g> {
    game: &'g Game,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    row_prob: Vec<Prob>,
}

impl<'g> ChainKernel<'g> {
    pub fn build(game: &'g Game) -> Result<Self> {
        Self::build_with_limits(game, &Limits::default())
    }

    pub fn build_with_limits(game: &'g Game, limits: &Limits) -> Result<Self> {
        limits.check_profiles(game.num_profiles())?;
        let n = game.num_players();
        let rows: Vec<(Vec<usize>, Prob)> = (0..game.num_profiles())
            .into_par_iter()
            .map(|from| {
                let moves: Vec<Vec<usize>> = (0..n)
                    .map(|i| {
                        if game.is_satisfied_at(i, from) {
                            vec![game.action_of(from, i)]
                        } else {
                            (0..game.action_counts()[i]).collect()
                        }
                    })
                    .collect();
                let width: usize = moves.iter().map(Vec::len).product();
                let mut support = Vec::with_capacity(width);
                for_each_joint_move(game, &moves, |to| support.push(to));
                (support, Prob::new(1, width as i64))
            })
            .collect();

        let total: usize = rows.iter().map(|(s, _)| s.len()).sum();
        if total > limits.max_edges {
            return Err(Error::resource(
                "kernel entries",
                total as u128,
                limits.max_edges as u128,
            ));
        }
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut targets = Vec::with_capacity(total);
        let mut row_prob = Vec::with_capacity(rows.len());
        offsets.push(0);
        for (support, p) in rows {
            targets.extend(support);
            offsets.push(targets.len());
            row_prob.push(p);
        }
        Ok(ChainKernel {
            game,
            offsets,
            targets,
            row_prob,
        })
    }

    pub fn game(&self) -> &'g Game {
        self.game
    }

    pub fn num_states(&self) -> usize {
        self.row_prob.len()
    }

    /// Successors of `flat` with positive probability, ascending; includes `flat` itself.
    pub fn support(&self, flat: usize) -> &[usize] {
        &self.targets[self.offsets[flat]..self.offsets[flat + 1]]
    }

    pub fn row(&self, flat: usize) -> impl Iterator<Item = (usize, Prob)> + '_ {
        let p = self.row_prob[flat];
        self.support(flat).iter().map(move |&t| (t, p))
    }

    pub fn probability(&self, from: usize, to: usize) -> Prob {
        if self.support(from).binary_search(&to).is_ok() {
            self.row_prob[from]
        } else {
            Prob::from_integer(0)
        }
    }

    pub fn row_sum(&self, flat: usize) -> Prob {
        self.row(flat).map(|(_, p)| p).sum()
    }
}

pub fn build_kernel(game: &Game) -> Result<ChainKernel<'_>> {
    ChainKernel::build(game)
}

pub fn transition_probability(
    game: &Game,
    from: &ActionProfile,
    to: &ActionProfile,
) -> Result<Prob> {
    let f = game.encode(from)?;
    let t = game.encode(to)?;
    let mut width: i64 = 1;
    for i in 0..game.num_players() {
        if game.is_satisfied_at(i, f) {
            if game.action_of(f, i) != game.action_of(t, i) {
                return Ok(Prob::from_integer(0));
            }
        } else {
            width *= game.action_counts()[i] as i64;
        }
    }
    Ok(Prob::new(1, width))
}

/// Fixed points of the kernel, ascending.
pub fn absorbing_states(kernel: &ChainKernel<'_>) -> Vec<usize> {
    (0..kernel.num_states())
        .filter(|&f| kernel.support(f) == [f])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateRule {
    /// Unsatisfied players redraw uniformly over all actions.
    Satisficing,
    /// Unsatisfied players redraw uniformly over `Better(a) ∪ {current}`.
    InertialBetter,
}

impl UpdateRule {
    pub fn as_str(self) -> &'static str {
        match self {
            UpdateRule::Satisficing => "satisficing",
            UpdateRule::InertialBetter => "inertial-better",
        }
    }
}

impl std::fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for UpdateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "satisficing" => Ok(UpdateRule::Satisficing),
            "inertial-better" => Ok(UpdateRule::InertialBetter),
            other => Err(Error::domain(format!(
                "unknown update rule {other:?} (expected satisficing or inertial-better)"
            ))),
        }
    }
}

/// Candidate actions of every player for one step of `rule` out of `flat`.
fn step_choices(game: &Game, rule: UpdateRule, flat: usize) -> Vec<Vec<usize>> {
    (0..game.num_players())
        .map(|i| {
            let current = game.action_of(flat, i);
            if game.is_satisfied_at(i, flat) {
                return vec![current];
            }
            match rule {
                UpdateRule::Satisficing => (0..game.action_counts()[i]).collect(),
                UpdateRule::InertialBetter => {
                    let mut v = game.better_responses_at(i, flat);
                    if let Err(pos) = v.binary_search(&current) {
                        v.insert(pos, current);
                    }
                    v
                }
            }
        })
        .collect()
}

/// Samples one transition. `rng` must already be positioned at the step.
fn sample_step(game: &Game, rule: UpdateRule, flat: usize, rng: &mut TrajectoryRng) -> usize {
    let choices = step_choices(game, rule, flat);
    let mut next = 0;
    for (i, c) in choices.iter().enumerate() {
        // One draw per player, used or not.
        let k = rng.draw(c.len());
        next += c[k] * game.stride(i);
    }
    next
}

/// One satisficing-chain transition from `flat`.
pub fn satisficing_step(game: &Game, flat: usize, rng: &mut TrajectoryRng) -> usize {
    sample_step(game, UpdateRule::Satisficing, flat, rng)
}

/// One step of the randomized inertial better-response dynamics.
pub fn inertial_better_response_step(
    game: &Game,
    profile: &ActionProfile,
    rng: &mut TrajectoryRng,
) -> Result<ActionProfile> {
    let f = game.encode(profile)?;
    Ok(game.decode(sample_step(game, UpdateRule::InertialBetter, f, rng)))
}

/// Exact one-step distribution of `rule` out of `flat`, ascending by successor.
pub fn step_distribution(game: &Game, rule: UpdateRule, flat: usize) -> Vec<(usize, Prob)> {
    let choices = step_choices(game, rule, flat);
    let width: usize = choices.iter().map(Vec::len).product();
    let p = Prob::new(1, width as i64);
    let mut out = Vec::with_capacity(width);
    for_each_joint_move(game, &choices, |to| out.push((to, p)));
    out
}

/// A simulated run; `profiles[0]` is the start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub rng: String,
    pub seed: u64,
    pub stream: u64,
    pub rule: UpdateRule,
    pub profiles: Vec<usize>,
}

impl Trajectory {
    pub fn last(&self) -> usize {
        *self.profiles.last().expect("a trajectory holds its start")
    }

    pub fn report(&self, game: &Game) -> TrajectoryReport {
        TrajectoryReport {
            rng: self.rng.clone(),
            seed: self.seed,
            stream: self.stream,
            rule: self.rule,
            steps: self.profiles.len() - 1,
            profiles: self.profiles.clone(),
            labels: self
                .profiles
                .iter()
                .map(|&f| game.profile_labels(f))
                .collect(),
        }
    }
}

/// Serializable trajectory with label arrays alongside flat indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub rng: String,
    pub seed: u64,
    pub stream: u64,
    pub rule: UpdateRule,
    pub steps: usize,
    pub profiles: Vec<usize>,
    pub labels: Vec<Vec<String>>,
}

pub fn simulate_stream(
    game: &Game,
    rule: UpdateRule,
    start: &ActionProfile,
    steps: usize,
    seed: u64,
    stream: u64,
) -> Result<Trajectory> {
    let mut cur = game.encode(start)?;
    let mut rng = TrajectoryRng::new(seed, stream, game.num_players());
    let mut profiles = Vec::with_capacity(steps + 1);
    profiles.push(cur);
    for t in 0..steps {
        rng.seek(t as u64);
        cur = sample_step(game, rule, cur, &mut rng);
        profiles.push(cur);
    }
    Ok(Trajectory {
        rng: RNG_ALGORITHM.to_string(),
        seed,
        stream,
        rule,
        profiles,
    })
}

/// Satisficing-chain trajectory of `steps` transitions (stream 0).
pub fn simulate(game: &Game, start: &ActionProfile, steps: usize, seed: u64) -> Result<Trajectory> {
    simulate_stream(game, UpdateRule::Satisficing, start, steps, seed, 0)
}

/// `count` independent trajectories; trajectory `j` uses stream `j`.
/// Output is independent of thread scheduling.
pub fn simulate_many(
    game: &Game,
    rule: UpdateRule,
    start: &ActionProfile,
    steps: usize,
    seed: u64,
    count: u64,
) -> Result<Vec<Trajectory>> {
    game.encode(start)?;
    (0..count)
        .into_par_iter()
        .map(|j| simulate_stream(game, rule, start, steps, seed, j))
        .collect()
}

/// Final-profile tally over a batch of trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub rng: String,
    pub seed: u64,
    pub rule: UpdateRule,
    pub steps: usize,
    pub trajectories: u64,
    pub start: ProfileRef,
    /// Final profiles with their counts, ascending by flat index.
    pub final_profiles: Vec<(ProfileRef, u64)>,
    /// Trajectories whose final profile is a pure Nash equilibrium.
    pub ended_at_nash: u64,
}

pub fn summarize(game: &Game, trajectories: &[Trajectory]) -> Option<SimulationSummary> {
    let first = trajectories.first()?;
    let mut counts = std::collections::BTreeMap::new();
    for t in trajectories {
        *counts.entry(t.last()).or_insert(0u64) += 1;
    }
    let ended_at_nash = counts
        .iter()
        .filter(|(&f, _)| game.is_pure_nash_at(f))
        .map(|(_, &c)| c)
        .sum();
    Some(SimulationSummary {
        rng: first.rng.clone(),
        seed: first.seed,
        rule: first.rule,
        steps: first.profiles.len() - 1,
        trajectories: trajectories.len() as u64,
        start: ProfileRef::new(game, first.profiles[0]),
        final_profiles: counts
            .into_iter()
            .map(|(f, c)| (ProfileRef::new(game, f), c))
            .collect(),
        ended_at_nash,
    })
}
