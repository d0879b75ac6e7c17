//! Best-response, better-response and satisficing graphs over profiles.
//!
//! In all three graphs satisfied players keep their action along an edge;
//! the kinds differ only in where an unsatisfied player may move:
//!
//! | kind     | unsatisfied player `i` may move to          |
//! |----------|---------------------------------------------|
//! | `Best`   | a best response to the tail's counterprofile |
//! | `Better` | an action weakly better than its current one |
//! | `Sat`    | any action                                   |
//!
//! Any subset of the unsatisfied players may move at once. Every node has a
//! self-loop under all three definitions; stored graphs omit them, so a sink
//! (no stored out-edge) is exactly a pure Nash equilibrium.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game, Limits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Best,
    Better,
    Sat,
}

impl GraphKind {
    pub const ALL: [GraphKind; 3] = [GraphKind::Best, GraphKind::Better, GraphKind::Sat];

    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Best => "best",
            GraphKind::Better => "better",
            GraphKind::Sat => "sat",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "best" => Ok(GraphKind::Best),
            "better" => Ok(GraphKind::Better),
            "sat" | "satisficing" => Ok(GraphKind::Sat),
            other => Err(Error::domain(format!(
                "unknown graph kind {other:?} (expected best, better or sat)"
            ))),
        }
    }
}

/// Actions `player` may take along an edge out of `flat`, ascending.
/// Always contains the current action.
pub fn allowed_moves(game: &Game, kind: GraphKind, flat: usize, player: usize) -> Vec<usize> {
    let current = game.action_of(flat, player);
    if game.is_satisfied_at(player, flat) {
        return vec![current];
    }
    match kind {
        GraphKind::Best => {
            let mut v = game.best_responses_at(player, flat);
            // An unsatisfied player's current action is never a best response.
            let pos = v.binary_search(&current).unwrap_err();
            v.insert(pos, current);
            v
        }
        GraphKind::Better => game.better_responses_at(player, flat),
        GraphKind::Sat => (0..game.action_counts()[player]).collect(),
    }
}

pub(crate) fn edge_exists_flat(game: &Game, kind: GraphKind, from: usize, to: usize) -> bool {
    (0..game.num_players()).all(|i| {
        let a1 = game.action_of(from, i);
        let a2 = game.action_of(to, i);
        if a1 == a2 {
            return true;
        }
        if game.is_satisfied_at(i, from) {
            return false;
        }
        match kind {
            GraphKind::Best => game.best_responses_at(i, from).contains(&a2),
            GraphKind::Better => {
                game.payoff_at(i, game.with_action(from, i, a2)) >= game.payoff_at(i, from)
            }
            GraphKind::Sat => true,
        }
    })
}

/// Evaluates the edge predicate of `kind` between two profiles.
/// `from == to` is always an edge.
pub fn edge_exists(
    game: &Game,
    kind: GraphKind,
    from: &ActionProfile,
    to: &ActionProfile,
) -> Result<bool> {
    let f = game.encode(from)?;
    let t = game.encode(to)?;
    Ok(edge_exists_flat(game, kind, f, t))
}

/// Calls `visit` on every profile reachable in one joint move where
/// `player` picks from `moves[player]`, in ascending flat order.
pub(crate) fn for_each_joint_move(game: &Game, moves: &[Vec<usize>], mut visit: impl FnMut(usize)) {
    let n = moves.len();
    let mut cursor = vec![0usize; n];
    loop {
        let flat: usize = (0..n).map(|i| moves[i][cursor[i]] * game.stride(i)).sum();
        visit(flat);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            cursor[i] += 1;
            if cursor[i] < moves[i].len() {
                break;
            }
            cursor[i] = 0;
        }
    }
}

/// A response graph in compressed adjacency form, self-loops omitted.
#[derive(Debug, Clone)]
pub struct ResponseGraph<'g> {
    game: &'g Game,
    kind: GraphKind,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    nash: Vec<usize>,
}

impl<'g> ResponseGraph<'g> {
    pub fn build(game: &'g Game, kind: GraphKind) -> Result<Self> {
        Self::build_with_limits(game, kind, &Limits::default())
    }

    pub fn build_with_limits(game: &'g Game, kind: GraphKind, limits: &Limits) -> Result<Self> {
        limits.check_profiles(game.num_profiles())?;
        let n = game.num_players();
        let mut offsets = Vec::with_capacity(game.num_profiles() + 1);
        let mut targets = Vec::new();
        let mut nash = Vec::new();
        offsets.push(0);
        for from in 0..game.num_profiles() {
            let moves: Vec<Vec<usize>> =
                (0..n).map(|i| allowed_moves(game, kind, from, i)).collect();
            if moves.iter().all(|m| m.len() == 1) {
                if game.is_pure_nash_at(from) {
                    nash.push(from);
                }
            } else {
                let out: usize = moves.iter().map(Vec::len).product::<usize>() - 1;
                if targets.len() + out > limits.max_edges {
                    return Err(Error::resource(
                        "edge count",
                        (targets.len() + out) as u128,
                        limits.max_edges as u128,
                    ));
                }
                for_each_joint_move(game, &moves, |to| {
                    if to != from {
                        targets.push(to);
                    }
                });
            }
            offsets.push(targets.len());
        }
        Ok(ResponseGraph {
            game,
            kind,
            offsets,
            targets,
            nash,
        })
    }

    pub fn game(&self) -> &'g Game {
        self.game
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    /// Out-neighbours of `flat`, ascending.
    pub fn successors(&self, flat: usize) -> &[usize] {
        &self.targets[self.offsets[flat]..self.offsets[flat + 1]]
    }

    /// All edges ordered by (from, to).
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes()).flat_map(move |f| self.successors(f).iter().map(move |&t| (f, t)))
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.successors(from).binary_search(&to).is_ok()
    }

    /// Pure Nash equilibria; these are exactly the sinks.
    pub fn nash(&self) -> &[usize] {
        &self.nash
    }

    pub fn in_degree(&self, flat: usize) -> usize {
        self.targets.iter().filter(|&&t| t == flat).count()
    }

    fn reverse(&self) -> (Vec<usize>, Vec<usize>) {
        let nodes = self.num_nodes();
        let mut counts = vec![0usize; nodes + 1];
        for &t in &self.targets {
            counts[t + 1] += 1;
        }
        for i in 0..nodes {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut sources = vec![0usize; self.targets.len()];
        for (f, t) in self.edges() {
            sources[fill[t]] = f;
            fill[t] += 1;
        }
        (counts, sources)
    }

    /// Length of a shortest path from each profile to the Nash set, by
    /// breadth-first search backwards from every equilibrium.
    pub fn distances_to_nash(&self) -> Vec<Option<usize>> {
        let (offsets, sources) = self.reverse();
        let mut dist = vec![None; self.num_nodes()];
        let mut queue = VecDeque::new();
        for &s in &self.nash {
            dist[s] = Some(0);
            queue.push_back(s);
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].expect("queued nodes have a distance");
            for &u in &sources[offsets[v]..offsets[v + 1]] {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Profiles with no path to any pure Nash equilibrium, ascending.
    pub fn profiles_without_path(&self) -> Vec<usize> {
        self.distances_to_nash()
            .iter()
            .enumerate()
            .filter_map(|(f, d)| d.is_none().then_some(f))
            .collect()
    }

    /// Shortest path from `start` into the Nash set, breaking ties toward the
    /// smallest flat index at every hop.
    pub fn witness_path(&self, start: usize) -> Option<Vec<usize>> {
        let dist = self.distances_to_nash();
        self.witness_path_with(&dist, start)
    }

    fn witness_path_with(&self, dist: &[Option<usize>], start: usize) -> Option<Vec<usize>> {
        let mut d = dist[start]?;
        let mut path = vec![start];
        let mut cur = start;
        while d > 0 {
            cur = *self
                .successors(cur)
                .iter()
                .find(|&&t| dist[t] == Some(d - 1))
                .expect("a node at distance d has a successor at distance d - 1");
            path.push(cur);
            d -= 1;
        }
        Some(path)
    }

    /// Graphviz rendering. Pure Nash nodes get a doubled outline.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {} {{", self.kind);
        let _ = writeln!(out, "  node [shape=ellipse];");
        for f in 0..self.num_nodes() {
            let label = escape_dot(&self.game.profile_label(f));
            if self.game.is_pure_nash_at(f) {
                let _ = writeln!(out, "  n{f} [label=\"{label}\", peripheries=2];");
            } else {
                let _ = writeln!(out, "  n{f} [label=\"{label}\"];");
            }
        }
        for (f, t) in self.edges() {
            let _ = writeln!(out, "  n{f} -> n{t};");
        }
        out.push_str("}\n");
        out
    }
}

fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn build_graph(game: &Game, kind: GraphKind) -> Result<ResponseGraph<'_>> {
    ResponseGraph::build(game, kind)
}

/// Profiles lacking a path to a pure Nash equilibrium in `graph`.
pub fn paths_to_nash_exist(graph: &ResponseGraph<'_>) -> Vec<ActionProfile> {
    graph
        .profiles_without_path()
        .into_iter()
        .map(|f| graph.game().decode(f))
        .collect()
}

pub fn witness_path(
    game: &Game,
    kind: GraphKind,
    start: &ActionProfile,
) -> Result<Option<Vec<ActionProfile>>> {
    let s = game.encode(start)?;
    let graph = ResponseGraph::build(game, kind)?;
    Ok(graph
        .witness_path(s)
        .map(|p| p.into_iter().map(|f| game.decode(f)).collect()))
}

pub fn export_dot(graph: &ResponseGraph<'_>) -> String {
    graph.to_dot()
}

/// A profile rendered for reports: flat index plus action labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRef {
    pub index: usize,
    pub labels: Vec<String>,
}

impl ProfileRef {
    pub fn new(game: &Game, flat: usize) -> Self {
        ProfileRef {
            index: flat,
            labels: game.profile_labels(flat),
        }
    }
}

impl fmt::Display for ProfileRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.labels.join(","))
    }
}

fn refs(game: &Game, flats: &[usize]) -> Vec<ProfileRef> {
    flats.iter().map(|&f| ProfileRef::new(game, f)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnreachableProfiles {
    pub best: Vec<ProfileRef>,
    pub better: Vec<ProfileRef>,
    pub sat: Vec<ProfileRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPath {
    pub kind: GraphKind,
    pub profiles: Vec<ProfileRef>,
}

/// Verdicts of [`classify`] with supporting profile sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub pure_nash: Vec<ProfileRef>,
    pub is_weakly_acyclic: bool,
    pub is_genwag: bool,
    pub unreachable_profiles: UnreachableProfiles,
    /// For a game that is generalized weakly acyclic but not weakly acyclic:
    /// a satisficing path from the first profile lacking a better-response
    /// path. For a weakly acyclic game: a better-response path from the first
    /// non-equilibrium profile. Absent otherwise.
    pub witness: Option<WitnessPath>,
}

impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[ProfileRef]| {
            if v.is_empty() {
                "none".to_string()
            } else {
                v.iter()
                    .map(ProfileRef::to_string)
                    .collect::<Vec<_>>()
                    .join(" ")
            }
        };
        writeln!(f, "pure Nash equilibria: {}", list(&self.pure_nash))?;
        writeln!(f, "weakly acyclic: {}", self.is_weakly_acyclic)?;
        writeln!(f, "generalized weakly acyclic: {}", self.is_genwag)?;
        writeln!(
            f,
            "no best-response path: {}",
            list(&self.unreachable_profiles.best)
        )?;
        writeln!(
            f,
            "no better-response path: {}",
            list(&self.unreachable_profiles.better)
        )?;
        writeln!(
            f,
            "no satisficing path: {}",
            list(&self.unreachable_profiles.sat)
        )?;
        if let Some(w) = &self.witness {
            let hops: Vec<String> = w.profiles.iter().map(ProfileRef::to_string).collect();
            writeln!(f, "witness ({} path): {}", w.kind, hops.join(" -> "))?;
        }
        Ok(())
    }
}

/// The three verdicts alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Classification {
    pub has_pure_nash: bool,
    pub is_weakly_acyclic: bool,
    pub is_genwag: bool,
}

pub fn classify_flags(game: &Game) -> Result<Classification> {
    let better = ResponseGraph::build(game, GraphKind::Better)?;
    let has_pure_nash = !better.nash().is_empty();
    let is_weakly_acyclic = has_pure_nash && better.profiles_without_path().is_empty();
    let is_genwag = is_weakly_acyclic || {
        let sat = ResponseGraph::build(game, GraphKind::Sat)?;
        has_pure_nash && sat.profiles_without_path().is_empty()
    };
    Ok(Classification {
        has_pure_nash,
        is_weakly_acyclic,
        is_genwag,
    })
}

pub fn classify(game: &Game) -> Result<ClassificationReport> {
    let best = ResponseGraph::build(game, GraphKind::Best)?;
    let better = ResponseGraph::build(game, GraphKind::Better)?;
    let sat = ResponseGraph::build(game, GraphKind::Sat)?;
    let nash = game.pure_nash_flat();

    let better_dist = better.distances_to_nash();
    let sat_dist = sat.distances_to_nash();
    let missing = |d: &[Option<usize>]| -> Vec<usize> {
        d.iter()
            .enumerate()
            .filter_map(|(f, x)| x.is_none().then_some(f))
            .collect()
    };
    let no_best = best.profiles_without_path();
    let no_better = missing(&better_dist);
    let no_sat = missing(&sat_dist);

    let is_weakly_acyclic = !nash.is_empty() && no_better.is_empty();
    let is_genwag = !nash.is_empty() && no_sat.is_empty();

    let witness = if is_weakly_acyclic {
        (0..game.num_profiles())
            .find(|&f| !game.is_pure_nash_at(f))
            .and_then(|s| better.witness_path_with(&better_dist, s))
            .map(|p| (GraphKind::Better, p))
    } else if is_genwag {
        sat.witness_path_with(&sat_dist, no_better[0])
            .map(|p| (GraphKind::Sat, p))
    } else {
        None
    };

    Ok(ClassificationReport {
        pure_nash: refs(game, &nash),
        is_weakly_acyclic,
        is_genwag,
        unreachable_profiles: UnreachableProfiles {
            best: refs(game, &no_best),
            better: refs(game, &no_better),
            sat: refs(game, &no_sat),
        },
        witness: witness.map(|(kind, p)| WitnessPath {
            kind,
            profiles: refs(game, &p),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::NamedExample;

    fn flat(game: &Game, a: &[usize]) -> usize {
        game.encode(&ActionProfile::new(a.to_vec())).unwrap()
    }

    #[test]
    fn fig1_best_edges() {
        let g = NamedExample::Fig1.game();
        let (ba, aa, ab) = (
            ActionProfile::new(vec![1, 0]),
            ActionProfile::new(vec![0, 0]),
            ActionProfile::new(vec![0, 1]),
        );
        assert!(edge_exists(&g, GraphKind::Best, &ba, &aa).unwrap());
        assert!(!edge_exists(&g, GraphKind::Best, &ba, &ab).unwrap());
        for kind in GraphKind::ALL {
            assert!(edge_exists(&g, kind, &ab, &ab).unwrap());
        }
    }

    #[test]
    fn fig1_graph_is_four_cycle() {
        let g = NamedExample::Fig1.game();
        let best = build_graph(&g, GraphKind::Best).unwrap();
        let cycle = [[1, 0], [0, 0], [0, 1], [1, 1]];
        let mut expected: Vec<(usize, usize)> = (0..4)
            .map(|k| (flat(&g, &cycle[k]), flat(&g, &cycle[(k + 1) % 4])))
            .collect();
        expected.sort();
        assert_eq!(best.edges().collect::<Vec<_>>(), expected);
        let better = build_graph(&g, GraphKind::Better).unwrap();
        assert_eq!(better.edges().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn zero_game_sat_graph_is_empty() {
        let g = Game::zeros(vec![2, 3]).unwrap();
        let sat = build_graph(&g, GraphKind::Sat).unwrap();
        assert_eq!(sat.num_edges(), 0);
        assert_eq!(sat.nash().len(), 6);
    }

    #[test]
    fn unreachable_sets() {
        let fig2 = NamedExample::Fig2.game();
        let better = build_graph(&fig2, GraphKind::Better).unwrap();
        assert!(better
            .profiles_without_path()
            .contains(&flat(&fig2, &[1, 1])));
        let sat = build_graph(&fig2, GraphKind::Sat).unwrap();
        assert!(sat.profiles_without_path().is_empty());

        let fig3 = NamedExample::Fig3.game();
        let sat = build_graph(&fig3, GraphKind::Sat).unwrap();
        let missing = sat.profiles_without_path();
        for a in [[1, 1], [1, 2], [2, 1], [2, 2]] {
            assert!(missing.contains(&flat(&fig3, &a)));
        }
        assert_eq!(sat.in_degree(0), 0);
    }

    #[test]
    fn witness_paths() {
        let fig2 = NamedExample::Fig2.game();
        let mc = ActionProfile::new(vec![1, 1]);
        let path = witness_path(&fig2, GraphKind::Sat, &mc).unwrap().unwrap();
        let expected: Vec<ActionProfile> = [[1, 1], [1, 0], [0, 0]]
            .iter()
            .map(|a| ActionProfile::new(a.to_vec()))
            .collect();
        assert_eq!(path, expected);
        let tl = ActionProfile::new(vec![0, 0]);
        assert_eq!(
            witness_path(&fig2, GraphKind::Sat, &tl).unwrap().unwrap(),
            vec![tl]
        );

        let fig3 = NamedExample::Fig3.game();
        assert!(witness_path(&fig3, GraphKind::Sat, &mc).unwrap().is_none());
    }

    #[test]
    fn classify_examples() {
        let r1 = classify(&NamedExample::Fig1.game()).unwrap();
        assert!(r1.pure_nash.is_empty() && !r1.is_weakly_acyclic && !r1.is_genwag);
        assert!(r1.witness.is_none());
        let r2 = classify(&NamedExample::Fig2.game()).unwrap();
        assert_eq!(r2.pure_nash.len(), 1);
        assert!(!r2.is_weakly_acyclic && r2.is_genwag);
        assert_eq!(r2.witness.as_ref().unwrap().kind, GraphKind::Sat);
        let r3 = classify(&NamedExample::Fig3.game()).unwrap();
        assert_eq!(r3.pure_nash[0].labels, vec!["T", "L"]);
        assert!(!r3.is_weakly_acyclic && !r3.is_genwag);
    }

    #[test]
    fn dot_output() {
        let g = NamedExample::Fig1.game();
        let dot = build_graph(&g, GraphKind::Best).unwrap().to_dot();
        assert_eq!(dot.matches("->").count(), 4);
        assert!(dot.starts_with("digraph best {"));
        assert!(dot.contains("n2 [label=\"(B,a)\"]"));

        let zero = Game::zeros(vec![2]).unwrap();
        let dot = build_graph(&zero, GraphKind::Sat).unwrap().to_dot();
        assert_eq!(dot.matches("->").count(), 0);
        assert_eq!(dot.matches("peripheries=2").count(), 2);
    }

    #[test]
    fn edge_cap_is_enforced() {
        let g = NamedExample::Fig2.game();
        let limits = Limits {
            max_edges: 3,
            ..Limits::default()
        };
        assert!(matches!(
            ResponseGraph::build_with_limits(&g, GraphKind::Sat, &limits),
            Err(Error::Resource { .. })
        ));
        let limits = Limits::with_max_profiles(4);
        assert!(matches!(
            ResponseGraph::build_with_limits(&g, GraphKind::Sat, &limits),
            Err(Error::Resource { .. })
        ));
    }
}
