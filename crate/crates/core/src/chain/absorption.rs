//! Probability of eventually entering the pure-Nash set, and expected entry time.
//!
//! A graph-only pass first fixes every state whose probability is exactly 0
//! (no path to equilibrium) or exactly 1 (no path to a probability-0 state).
//! Only the remaining states go through a linear solve: exactly over big
//! rationals when there are at most [`EXACT_SOLVE_LIMIT`] of them, otherwise
//! by LU in `f64` with the residual checked against [`RESIDUAL_BOUND`].

use std::collections::VecDeque;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::{ChainKernel, Prob};
use crate::error::{Error, Result};
use crate::game::ActionProfile;

pub const EXACT_SOLVE_LIMIT: usize = 64;
pub const RESIDUAL_BOUND: f64 = 1e-12;

/// A solved quantity: exact, or a float from the numeric fallback.
#[derive(Debug, Clone, PartialEq)]
pub enum Probability {
    Exact(BigRational),
    Approx(f64),
}

impl Probability {
    pub fn zero() -> Self {
        Probability::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Probability::Exact(BigRational::one())
    }

    pub fn is_exactly_one(&self) -> bool {
        matches!(self, Probability::Exact(r) if r.is_one())
    }

    pub fn is_exactly_zero(&self) -> bool {
        matches!(self, Probability::Exact(r) if r.is_zero())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Probability::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Probability::Approx(x) => *x,
        }
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probability::Exact(r) => write!(f, "{r}"),
            Probability::Approx(x) => write!(f, "{x}"),
        }
    }
}

/// Exact values serialize as `"p/q"` strings, floats as JSON numbers.
impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Probability::Exact(r) => s.serialize_str(&r.to_string()),
            Probability::Approx(x) => s.serialize_f64(*x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    /// Every state was settled by the graph pass.
    Qualitative,
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionAnalysis {
    /// Indexed by flat profile.
    pub probabilities: Vec<Probability>,
    pub method: SolveMethod,
    /// Number of states with probability strictly between 0 and 1.
    pub intermediate_states: usize,
    /// Infinity-norm residual of the float solve; 0 otherwise.
    pub residual: f64,
}

impl AbsorptionAnalysis {
    /// Entry from every start is certain, decided by the graph pass alone.
    pub fn all_certain(&self) -> bool {
        self.probabilities.iter().all(Probability::is_exactly_one)
    }
}

fn reverse_csr(kernel: &ChainKernel<'_>) -> (Vec<usize>, Vec<usize>) {
    let n = kernel.num_states();
    let mut offsets = vec![0usize; n + 1];
    for &t in &kernel.targets {
        offsets[t + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut sources = vec![0; kernel.targets.len()];
    for f in 0..n {
        for &t in kernel.support(f) {
            sources[fill[t]] = f;
            fill[t] += 1;
        }
    }
    (offsets, sources)
}

/// States with a supported path into `seeds` (seeds included).
fn can_reach(rev: &(Vec<usize>, Vec<usize>), seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let (offsets, sources) = rev;
    let mut seen = vec![false; offsets.len() - 1];
    let mut queue = VecDeque::new();
    for s in seeds {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &u in &sources[offsets[v]..offsets[v + 1]] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

fn big(p: Prob) -> BigRational {
    BigRational::new(BigInt::from(*p.numer()), BigInt::from(*p.denom()))
}

/// Solves `x_s - sum_{t unknown} P(s,t) x_t = rhs_s` over `unknown`.
fn solve(
    kernel: &ChainKernel<'_>,
    unknown: &[usize],
    slot: &[Option<usize>],
    rhs: Vec<BigRational>,
) -> Result<(Vec<Probability>, SolveMethod, f64)> {
    let m = unknown.len();
    if m == 0 {
        return Ok((Vec::new(), SolveMethod::Qualitative, 0.0));
    }
    if m <= EXACT_SOLVE_LIMIT {
        let mut a: Vec<Vec<BigRational>> = (0..m)
            .map(|r| {
                let mut row = vec![BigRational::zero(); m + 1];
                row[r] = BigRational::one();
                for (t, p) in kernel.row(unknown[r]) {
                    if let Some(c) = slot[t] {
                        row[c] -= big(p);
                    }
                }
                row[m] = rhs[r].clone();
                row
            })
            .collect();
        for col in 0..m {
            let pivot = (col..m)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(Error::Numerical {
                    residual: f64::INFINITY,
                    bound: 0.0,
                })?;
            a.swap(col, pivot);
            let inv = a[col][col].recip();
            for x in &mut a[col][col..] {
                *x *= &inv;
            }
            let pivot_row = a[col].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != col && !row[col].is_zero() {
                    let factor = row[col].clone();
                    for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                        *x -= &factor * p;
                    }
                }
            }
        }
        let values = a
            .into_iter()
            .map(|row| Probability::Exact(row[m].clone()))
            .collect();
        return Ok((values, SolveMethod::Exact, 0.0));
    }

    let to_f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
    let mut mat = DMatrix::<f64>::identity(m, m);
    for r in 0..m {
        for (t, p) in kernel.row(unknown[r]) {
            if let Some(c) = slot[t] {
                mat[(r, c)] -= *p.numer() as f64 / *p.denom() as f64;
            }
        }
    }
    let b = DVector::from_iterator(m, rhs.iter().map(to_f));
    let x = mat.clone().lu().solve(&b).ok_or(Error::Numerical {
        residual: f64::INFINITY,
        bound: RESIDUAL_BOUND,
    })?;
    let residual = (&mat * &x - &b).amax();
    if !residual.is_finite() || residual > RESIDUAL_BOUND {
        return Err(Error::Numerical {
            residual,
            bound: RESIDUAL_BOUND,
        });
    }
    Ok((
        x.iter().map(|&v| Probability::Approx(v)).collect(),
        SolveMethod::Float,
        residual,
    ))
}

pub fn analyze_absorption(kernel: &ChainKernel<'_>) -> Result<AbsorptionAnalysis> {
    let n = kernel.num_states();
    let nash: Vec<usize> = super::absorbing_states(kernel);
    let rev = reverse_csr(kernel);
    let reaches_nash = can_reach(&rev, nash.iter().copied());
    let reaches_zero = can_reach(&rev, (0..n).filter(|&s| !reaches_nash[s]));

    let mut probabilities: Vec<Probability> = (0..n)
        .map(|s| {
            if !reaches_nash[s] {
                Probability::zero()
            } else if !reaches_zero[s] {
                Probability::one()
            } else {
                Probability::Approx(f64::NAN)
            }
        })
        .collect();

    let unknown: Vec<usize> = (0..n)
        .filter(|&s| reaches_nash[s] && reaches_zero[s])
        .collect();
    let mut slot = vec![None; n];
    for (k, &s) in unknown.iter().enumerate() {
        slot[s] = Some(k);
    }
    let rhs = unknown
        .iter()
        .map(|&s| {
            kernel
                .row(s)
                .filter(|&(t, _)| reaches_nash[t] && !reaches_zero[t])
                .map(|(_, p)| big(p))
                .fold(BigRational::zero(), |acc, p| acc + p)
        })
        .collect();
    let (values, method, residual) = solve(kernel, &unknown, &slot, rhs)?;
    for (&s, v) in unknown.iter().zip(values) {
        probabilities[s] = match v {
            Probability::Approx(x) => Probability::Approx(x.clamp(0.0, 1.0)),
            exact => exact,
        };
    }
    Ok(AbsorptionAnalysis {
        probabilities,
        method,
        intermediate_states: unknown.len(),
        residual,
    })
}

pub fn absorption_probability(
    kernel: &ChainKernel<'_>,
    start: &ActionProfile,
) -> Result<Probability> {
    let s = kernel.game().encode(start)?;
    Ok(analyze_absorption(kernel)?.probabilities.swap_remove(s))
}

/// Expected number of transitions until the chain first sits at a pure Nash
/// equilibrium. `None` where entry is not certain (the expectation is infinite).
pub fn expected_steps_to_nash(kernel: &ChainKernel<'_>) -> Result<Vec<Option<Probability>>> {
    let n = kernel.num_states();
    let nash = super::absorbing_states(kernel);
    let rev = reverse_csr(kernel);
    let reaches_nash = can_reach(&rev, nash.iter().copied());
    let reaches_zero = can_reach(&rev, (0..n).filter(|&s| !reaches_nash[s]));
    let is_nash = {
        let mut v = vec![false; n];
        for &s in &nash {
            v[s] = true;
        }
        v
    };
    let unknown: Vec<usize> = (0..n)
        .filter(|&s| reaches_nash[s] && !reaches_zero[s] && !is_nash[s])
        .collect();
    let mut slot = vec![None; n];
    for (k, &s) in unknown.iter().enumerate() {
        slot[s] = Some(k);
    }
    let rhs = vec![BigRational::one(); unknown.len()];
    let (values, _, _) = solve(kernel, &unknown, &slot, rhs)?;
    let mut out: Vec<Option<Probability>> =
        (0..n).map(|s| is_nash[s].then(Probability::zero)).collect();
    for (&s, v) in unknown.iter().zip(values) {
        out[s] = Some(v);
    }
    Ok(out)
}
