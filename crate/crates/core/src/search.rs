//! Game corpora, classification censuses and parallel sweeps.
//!
//! A [`SearchSpec`] names a deterministic sequence of games, each addressed
//! by a `u64` generation index, and optionally a slice `(start, stride)` of
//! those indices. [`run_search`] evaluates a [`Predicate`] over the slice on
//! a rayon pool, reduces results in index order, and can checkpoint a
//! resumable cursor to a JSON file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::chain::{
    absorbing_states, analyze_absorption, communicating_classes, ChainKernel, TrajectoryRng,
    RNG_ALGORITHM,
};
use crate::conditions::{
    check_conjecture_hypothesis, check_isp, check_theorem2, strict_pure_nash_flat, Scan,
};
use crate::error::{Error, Result};
use crate::format::{game_to_json, game_to_string, parse_rational, rational_to_json};
use crate::game::{Game, Limits, NamedExample, Payoff};
use crate::graph::{classify, classify_flags, Classification, GraphKind, ResponseGraph};

/// Largest number of games a single run examines unless overridden.
pub const DEFAULT_BUDGET: u64 = 1_000_000;
pub const DEFAULT_CHECKPOINT_EVERY: u64 = 100_000;
/// Smallest generation indices kept per census bucket.
pub const SAMPLES_PER_BUCKET: usize = 8;
const CHUNK: u64 = 4096;

mod payoff_list {
    use super::*;

    pub fn serialize<S: Serializer>(
        values: &[Payoff],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(values.iter().map(rational_to_json))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Payoff>, D::Error> {
        let raw = Vec::<Value>::deserialize(d)?;
        raw.iter()
            .map(|v| {
                let text = match v {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => n.to_string(),
                    other => return Err(format!("not a rational: {other}")),
                };
                parse_rational(&text)
            })
            .collect::<std::result::Result<_, _>>()
            .map_err(serde::de::Error::custom)
    }
}

/// How a random generator draws each payoff.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PayoffDistribution {
    /// Uniform over a finite list.
    Alphabet {
        #[serde(with = "payoff_list")]
        values: Vec<Payoff>,
    },
    /// Uniform over the integers `low..=high`.
    IntRange { low: i64, high: i64 },
}

impl PayoffDistribution {
    fn draw(&self, rng: &mut TrajectoryRng) -> Payoff {
        match self {
            PayoffDistribution::Alphabet { values } => values[rng.draw(values.len())],
            PayoffDistribution::IntRange { low, high } => {
                let width = (high - low) as usize + 1;
                Payoff::from_integer(low + rng.draw(width) as i64)
            }
        }
    }
}

/// A deterministic, indexable sequence of games.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    /// Every payoff assignment over a finite alphabet. Game `k` writes `k`
    /// in base `|alphabet|` over the positions `(player, flat profile)`,
    /// first position most significant.
    Exhaustive {
        action_counts: Vec<usize>,
        #[serde(with = "payoff_list")]
        alphabet: Vec<Payoff>,
    },
    /// Game `k` draws its payoffs in `(player, flat profile)` order from
    /// stream `k` of `seed`.
    Random {
        action_counts: Vec<usize>,
        payoffs: PayoffDistribution,
        seed: u64,
        count: u64,
    },
    Named {
        examples: Vec<NamedExample>,
    },
    /// The listed generators back to back.
    Concat {
        parts: Vec<GeneratorSpec>,
    },
}

impl GeneratorSpec {
    pub fn exhaustive(action_counts: Vec<usize>, alphabet: &[i64]) -> Self {
        GeneratorSpec::Exhaustive {
            action_counts,
            alphabet: alphabet.iter().copied().map(Payoff::from_integer).collect(),
        }
    }

    pub fn random_ints(
        action_counts: Vec<usize>,
        low: i64,
        high: i64,
        seed: u64,
        count: u64,
    ) -> Self {
        GeneratorSpec::Random {
            action_counts,
            payoffs: PayoffDistribution::IntRange { low, high },
            seed,
            count,
        }
    }

    pub fn named() -> Self {
        GeneratorSpec::Named {
            examples: NamedExample::ALL.to_vec(),
        }
    }

    fn validate(&self) -> Result<()> {
        let shape = |counts: &[usize]| {
            if counts.is_empty() || counts.contains(&0) {
                Err(Error::domain(
                    "every generated game needs at least one player and one action each",
                ))
            } else {
                Ok(())
            }
        };
        match self {
            GeneratorSpec::Exhaustive {
                action_counts,
                alphabet,
            } => {
                shape(action_counts)?;
                if alphabet.is_empty() {
                    return Err(Error::domain("payoff alphabet is empty"));
                }
            }
            GeneratorSpec::Random {
                action_counts,
                payoffs,
                ..
            } => {
                shape(action_counts)?;
                match payoffs {
                    PayoffDistribution::Alphabet { values } if values.is_empty() => {
                        return Err(Error::domain("payoff alphabet is empty"))
                    }
                    PayoffDistribution::IntRange { low, high } if low > high => {
                        return Err(Error::domain(format!("empty payoff range {low}..={high}")))
                    }
                    _ => {}
                }
            }
            GeneratorSpec::Named { .. } => {}
            GeneratorSpec::Concat { parts } => {
                parts.iter().try_for_each(GeneratorSpec::validate)?
            }
        }
        Ok(())
    }

    /// Number of games in the sequence.
    pub fn total(&self) -> Result<u64> {
        self.validate()?;
        let too_many = || Error::resource("generated game count", u128::MAX, u64::MAX as u128);
        match self {
            GeneratorSpec::Exhaustive {
                action_counts,
                alphabet,
            } => {
                let positions =
                    action_counts.len() as u32 * action_counts.iter().product::<usize>() as u32;
                (alphabet.len() as u64)
                    .checked_pow(positions)
                    .ok_or_else(too_many)
            }
            GeneratorSpec::Random { count, .. } => Ok(*count),
            GeneratorSpec::Named { examples } => Ok(examples.len() as u64),
            GeneratorSpec::Concat { parts } => parts.iter().try_fold(0u64, |acc, p| {
                acc.checked_add(p.total()?).ok_or_else(too_many)
            }),
        }
    }

    /// The game at generation index `index`.
    pub fn game_at(&self, index: u64) -> Result<Game> {
        match self {
            GeneratorSpec::Exhaustive {
                action_counts,
                alphabet,
            } => {
                let profiles: usize = action_counts.iter().product();
                let positions = action_counts.len() * profiles;
                let base = alphabet.len() as u64;
                let mut digits = vec![0usize; positions];
                let mut rest = index;
                for d in digits.iter_mut().rev() {
                    *d = (rest % base) as usize;
                    rest /= base;
                }
                if rest != 0 {
                    return Err(Error::domain(format!("game index {index} out of range")));
                }
                let payoffs = digits
                    .chunks(profiles)
                    .map(|c| c.iter().map(|&d| alphabet[d]).collect())
                    .collect();
                Game::new(action_counts.clone(), payoffs)
            }
            GeneratorSpec::Random {
                action_counts,
                payoffs,
                seed,
                count,
            } => {
                if index >= *count {
                    return Err(Error::domain(format!("game index {index} out of range")));
                }
                let profiles: usize = action_counts.iter().product();
                let mut rng = TrajectoryRng::new(*seed, index, 1);
                let table = (0..action_counts.len())
                    .map(|_| (0..profiles).map(|_| payoffs.draw(&mut rng)).collect())
                    .collect();
                Game::new(action_counts.clone(), table)
            }
            GeneratorSpec::Named { examples } => examples
                .get(index as usize)
                .map(|e| e.game())
                .ok_or_else(|| Error::domain(format!("game index {index} out of range"))),
            GeneratorSpec::Concat { parts } => {
                let mut offset = index;
                for part in parts {
                    let n = part.total()?;
                    if offset < n {
                        return part.game_at(offset);
                    }
                    offset -= n;
                }
                Err(Error::domain(format!("game index {index} out of range")))
            }
        }
    }

    fn uses_rng(&self) -> bool {
        match self {
            GeneratorSpec::Random { .. } => true,
            GeneratorSpec::Concat { parts } => parts.iter().any(GeneratorSpec::uses_rng),
            _ => false,
        }
    }
}

/// Generation indices `start, start + stride, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slice {
    pub start: u64,
    pub stride: u64,
}

impl Slice {
    pub fn new(start: u64, stride: u64) -> Result<Self> {
        if stride == 0 {
            return Err(Error::domain("slice stride must be positive"));
        }
        Ok(Slice { start, stride })
    }

    /// Number of slice positions inside `0..total`.
    pub fn len(&self, total: u64) -> u64 {
        if self.start >= total {
            0
        } else {
            (total - self.start - 1) / self.stride + 1
        }
    }

    pub fn index(&self, position: u64) -> u64 {
        self.start + position * self.stride
    }
}

impl Default for Slice {
    fn default() -> Self {
        Slice {
            start: 0,
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub generator: GeneratorSpec,
    /// Without a slice the whole sequence must fit in the budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<Slice>,
    /// Games examined by one run; a sliced run stops here and can be resumed.
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

impl SearchSpec {
    pub fn new(generator: GeneratorSpec) -> Self {
        SearchSpec {
            generator,
            slice: None,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_slice(mut self, slice: Slice) -> Self {
        self.slice = Some(slice);
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Positions of the slice in this run's scope, checked against the budget.
    pub fn positions(&self) -> Result<u64> {
        let total = self.generator.total()?;
        let slice = self.slice.unwrap_or_default();
        let len = slice.len(total);
        if self.slice.is_none() && len > self.budget {
            return Err(Error::resource(
                "generated game count",
                len as u128,
                self.budget as u128,
            ));
        }
        Ok(len)
    }

    /// Generation index and game for each slice position, in order.
    pub fn generate(&self) -> Result<impl Iterator<Item = Result<(u64, Game)>> + '_> {
        let len = self.positions()?.min(self.budget);
        let slice = self.slice.unwrap_or_default();
        Ok((0..len).map(move |p| {
            let index = slice.index(p);
            self.generator.game_at(index).map(|g| (index, g))
        }))
    }
}

/// The proved statements a sweep re-checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sweep {
    /// Generalized weak acyclicity, closed classes with equilibria, and
    /// certain absorption coincide.
    Theorem1,
    /// Two players and a strict pure equilibrium imply GenWAG.
    Theorem2,
    /// The induced subgame property implies GenWAG.
    Theorem3,
    /// Absorbing states are exactly the pure Nash equilibria.
    Lemma2,
    /// Best edges are better edges, and better edges are satisficing edges.
    Containment,
}

impl Sweep {
    pub const ALL: [Sweep; 5] = [
        Sweep::Theorem1,
        Sweep::Theorem2,
        Sweep::Theorem3,
        Sweep::Lemma2,
        Sweep::Containment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Sweep::Theorem1 => "theorem1",
            Sweep::Theorem2 => "theorem2",
            Sweep::Theorem3 => "theorem3",
            Sweep::Lemma2 => "lemma2",
            Sweep::Containment => "containment",
        }
    }
}

impl std::str::FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Sweep::ALL
            .into_iter()
            .find(|w| w.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::domain(format!("unknown sweep {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "predicate", content = "which", rename_all = "kebab-case")]
pub enum Predicate {
    Census,
    /// Hits are games satisfying the conjecture hypothesis that are not GenWAG.
    Conjecture,
    Sweep(Sweep),
}

impl Predicate {
    pub fn name(self) -> String {
        match self {
            Predicate::Census => "census".into(),
            Predicate::Conjecture => "conjecture".into(),
            Predicate::Sweep(w) => w.as_str().into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bucket {
    NoPureNash,
    WeaklyAcyclic,
    GenwagNotWag,
    PureNashNotGenwag,
}

impl Bucket {
    fn of(flags: Classification) -> Option<Bucket> {
        match (
            flags.has_pure_nash,
            flags.is_weakly_acyclic,
            flags.is_genwag,
        ) {
            (false, false, false) => Some(Bucket::NoPureNash),
            (true, true, true) => Some(Bucket::WeaklyAcyclic),
            (true, false, true) => Some(Bucket::GenwagNotWag),
            (true, false, false) => Some(Bucket::PureNashNotGenwag),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusTallies {
    pub no_pure_nash: u64,
    pub weakly_acyclic: u64,
    pub genwag_not_wag: u64,
    pub pure_nash_not_genwag: u64,
    /// Impossible; any count here aborts the run.
    pub wag_without_pure_nash: u64,
}

impl CensusTallies {
    pub fn total(&self) -> u64 {
        self.no_pure_nash
            + self.weakly_acyclic
            + self.genwag_not_wag
            + self.pure_nash_not_genwag
            + self.wag_without_pure_nash
    }

    fn slot(&mut self, bucket: Bucket) -> &mut u64 {
        match bucket {
            Bucket::NoPureNash => &mut self.no_pure_nash,
            Bucket::WeaklyAcyclic => &mut self.weakly_acyclic,
            Bucket::GenwagNotWag => &mut self.genwag_not_wag,
            Bucket::PureNashNotGenwag => &mut self.pure_nash_not_genwag,
        }
    }
}

/// Smallest generation indices seen in each bucket.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketSamples {
    pub no_pure_nash: Vec<u64>,
    pub weakly_acyclic: Vec<u64>,
    pub genwag_not_wag: Vec<u64>,
    pub pure_nash_not_genwag: Vec<u64>,
}

impl BucketSamples {
    fn slot(&mut self, bucket: Bucket) -> &mut Vec<u64> {
        match bucket {
            Bucket::NoPureNash => &mut self.no_pure_nash,
            Bucket::WeaklyAcyclic => &mut self.weakly_acyclic,
            Bucket::GenwagNotWag => &mut self.genwag_not_wag,
            Bucket::PureNashNotGenwag => &mut self.pure_nash_not_genwag,
        }
    }

    pub fn get(&self, bucket: Bucket) -> &[u64] {
        match bucket {
            Bucket::NoPureNash => &self.no_pure_nash,
            Bucket::WeaklyAcyclic => &self.weakly_acyclic,
            Bucket::GenwagNotWag => &self.genwag_not_wag,
            Bucket::PureNashNotGenwag => &self.pure_nash_not_genwag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub index: u64,
    pub game: Value,
    /// Confirmed by a single-threaded evaluation from scratch.
    pub reverified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub predicate: String,
    pub spec: SearchSpec,
    pub spec_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    pub games_examined: u64,
    pub tallies: CensusTallies,
    pub samples: BucketSamples,
    pub counterexamples: Vec<Counterexample>,
    /// Slice positions consumed so far.
    pub cursor: u64,
    /// Slice positions in total.
    pub positions: u64,
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl SearchReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Checkpoint {
    spec_hash: String,
    report: SearchReport,
}

#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    /// Rayon worker threads; 0 picks the rayon default.
    pub workers: usize,
    /// Resume from and write to this file.
    pub checkpoint: Option<PathBuf>,
    /// Games between checkpoint writes; 0 means [`DEFAULT_CHECKPOINT_EVERY`].
    pub checkpoint_every: u64,
    /// Record wall time in the report. Off by default so reports are reproducible byte for byte.
    pub record_timing: bool,
}

/// Identifies a (predicate, generator, slice) triple; the budget is excluded so runs can resume with a new one.
pub fn spec_hash(spec: &SearchSpec, predicate: Predicate) -> String {
    let key = serde_json::json!({
        "predicate": predicate,
        "generator": spec.generator,
        "slice": spec.slice,
    });
    hex::encode(Sha256::digest(key.to_string().as_bytes()))
}

struct Outcome {
    bucket: Bucket,
    hit: bool,
}

fn violation(sweep: Sweep, index: u64, game: &Game, detail: String) -> Error {
    Error::InternalConsistency {
        message: format!("{} violated by game {index}: {detail}", sweep.as_str()),
        game: Some(game_to_string(game)),
    }
}

fn check_sweep(sweep: Sweep, index: u64, game: &Game, flags: Classification) -> Result<()> {
    match sweep {
        Sweep::Theorem1 => {
            let kernel = ChainKernel::build(game)?;
            let nash = game.pure_nash_flat();
            let classes_ok = communicating_classes(&kernel)
                .iter()
                .filter(|c| c.closed)
                .all(|c| c.members.iter().any(|m| nash.binary_search(m).is_ok()));
            let certain = analyze_absorption(&kernel)?
                .probabilities
                .iter()
                .all(|p| p.is_exactly_one());
            if flags.is_genwag != classes_ok || classes_ok != certain {
                return Err(violation(
                    sweep,
                    index,
                    game,
                    format!("genwag {}, closed classes hold equilibria {classes_ok}, certain absorption {certain}", flags.is_genwag),
                ));
            }
        }
        Sweep::Theorem2 => {
            if check_theorem2(game).holds && !flags.is_genwag {
                return Err(violation(
                    sweep,
                    index,
                    game,
                    "strict equilibrium but not GenWAG".into(),
                ));
            }
        }
        Sweep::Theorem3 => {
            if check_isp(game, Scan::FirstFailure, &Limits::default())?.holds && !flags.is_genwag {
                return Err(violation(
                    sweep,
                    index,
                    game,
                    "induced subgame property but not GenWAG".into(),
                ));
            }
        }
        Sweep::Lemma2 => {
            let kernel = ChainKernel::build(game)?;
            let absorbing = absorbing_states(&kernel);
            let nash = game.pure_nash_flat();
            if absorbing != nash {
                return Err(violation(
                    sweep,
                    index,
                    game,
                    format!("absorbing {absorbing:?}, pure Nash {nash:?}"),
                ));
            }
        }
        Sweep::Containment => {
            let graphs = GraphKind::ALL.map(|k| ResponseGraph::build(game, k));
            let [best, better, sat] = graphs;
            let (best, better, sat) = (best?, better?, sat?);
            for (inner, outer) in [(&best, &better), (&better, &sat)] {
                if let Some((a, b)) = inner.edges().find(|&(a, b)| !outer.has_edge(a, b)) {
                    return Err(violation(
                        sweep,
                        index,
                        game,
                        format!(
                            "{} edge {a} -> {b} missing from {} graph",
                            inner.kind(),
                            outer.kind()
                        ),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// From-scratch check of a conjecture hit using the full classification report.
fn reverify_conjecture(game: &Game) -> Result<bool> {
    let hypothesis =
        check_conjecture_hypothesis(game, Scan::FirstFailure, &Limits::default())?.holds;
    Ok(hypothesis && !classify(game)?.is_genwag)
}

fn evaluate(predicate: Predicate, index: u64, game: &Game) -> Result<Outcome> {
    let flags = classify_flags(game)?;
    let bucket = Bucket::of(flags).ok_or_else(|| Error::InternalConsistency {
        message: format!("game {index} classified weakly acyclic without a pure Nash equilibrium"),
        game: Some(game_to_string(game)),
    })?;
    let hit = match predicate {
        Predicate::Census => false,
        Predicate::Conjecture => {
            !flags.is_genwag
                && !strict_pure_nash_flat(game).is_empty()
                && check_conjecture_hypothesis(game, Scan::FirstFailure, &Limits::default())?.holds
        }
        Predicate::Sweep(sweep) => {
            check_sweep(sweep, index, game, flags)?;
            false
        }
    };
    Ok(Outcome { bucket, hit })
}

fn load_checkpoint(path: &Path, hash: &str) -> Result<Option<SearchReport>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path)?;
    let cp: Checkpoint = serde_json::from_str(&text)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    if cp.spec_hash != hash {
        return Err(Error::domain(format!(
            "checkpoint {} belongs to a different search (hash {})",
            path.display(),
            cp.spec_hash
        )));
    }
    Ok(Some(cp.report))
}

fn write_checkpoint(path: &Path, report: &SearchReport) -> Result<()> {
    let cp = Checkpoint {
        spec_hash: report.spec_hash.clone(),
        report: SearchReport {
            wall_time_seconds: None,
            ..report.clone()
        },
    };
    let tmp = path.with_extension("tmp");
    fs::write(
        &tmp,
        serde_json::to_string_pretty(&cp).expect("checkpoints serialize"),
    )?;
    fs::rename(tmp, path)?;
    Ok(())
}

/// Evaluates `predicate` over the search slice, at most `spec.budget` games per call.
pub fn run_search(
    spec: &SearchSpec,
    predicate: Predicate,
    options: &SearchOptions,
) -> Result<SearchReport> {
    let started = Instant::now();
    let positions = spec.positions()?;
    let slice = spec.slice.unwrap_or_default();
    let hash = spec_hash(spec, predicate);

    let resumed = match &options.checkpoint {
        Some(path) => load_checkpoint(path, &hash)?,
        None => None,
    };
    let mut report = resumed.unwrap_or_else(|| SearchReport {
        predicate: predicate.name(),
        spec: spec.clone(),
        spec_hash: hash.clone(),
        rng: spec.generator.uses_rng().then(|| RNG_ALGORITHM.to_string()),
        games_examined: 0,
        tallies: CensusTallies::default(),
        samples: BucketSamples::default(),
        counterexamples: Vec::new(),
        cursor: 0,
        positions,
        complete: positions == 0,
        wall_time_seconds: None,
    });
    report.spec = spec.clone();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
    let every = match options.checkpoint_every {
        0 => DEFAULT_CHECKPOINT_EVERY,
        n => n,
    };
    let end = positions.min(report.cursor.saturating_add(spec.budget));
    let mut since_checkpoint = 0u64;

    while report.cursor < end {
        let chunk_end = end.min(report.cursor + CHUNK);
        let outcomes: Vec<Result<(u64, Outcome)>> = pool.install(|| {
            (report.cursor..chunk_end)
                .into_par_iter()
                .map(|p| {
                    let index = slice.index(p);
                    let game = spec.generator.game_at(index)?;
                    evaluate(predicate, index, &game).map(|o| (index, o))
                })
                .collect()
        });
        for outcome in outcomes {
            let (index, outcome) = outcome?;
            report.games_examined += 1;
            *report.tallies.slot(outcome.bucket) += 1;
            let samples = report.samples.slot(outcome.bucket);
            if samples.len() < SAMPLES_PER_BUCKET {
                samples.push(index);
            }
            if outcome.hit {
                let game = spec.generator.game_at(index)?;
                if !reverify_conjecture(&game)? {
                    return Err(Error::InternalConsistency {
                        message: format!("conjecture hit at game {index} failed re-verification"),
                        game: Some(game_to_string(&game)),
                    });
                }
                report.counterexamples.push(Counterexample {
                    index,
                    game: game_to_json(&game),
                    reverified: true,
                });
            }
        }
        since_checkpoint += chunk_end - report.cursor;
        report.cursor = chunk_end;
        report.complete = report.cursor == positions;
        if let Some(path) = &options.checkpoint {
            if since_checkpoint >= every {
                write_checkpoint(path, &report)?;
                since_checkpoint = 0;
            }
        }
    }
    if let Some(path) = &options.checkpoint {
        write_checkpoint(path, &report)?;
    }

    report.wall_time_seconds = options
        .record_timing
        .then(|| started.elapsed().as_secs_f64());
    Ok(report)
}

pub fn census(spec: &SearchSpec, options: &SearchOptions) -> Result<SearchReport> {
    run_search(spec, Predicate::Census, options)
}

pub fn hunt_conjecture(spec: &SearchSpec, options: &SearchOptions) -> Result<SearchReport> {
    run_search(spec, Predicate::Conjecture, options)
}

pub fn hunt_theorem_violations(
    spec: &SearchSpec,
    which: Sweep,
    options: &SearchOptions,
) -> Result<SearchReport> {
    run_search(spec, Predicate::Sweep(which), options)
}
