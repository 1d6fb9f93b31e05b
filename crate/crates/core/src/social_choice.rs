//! Condorcet winners, the Smith decomposition of the majority tournament,
//! and verdicts relating a game solution to both.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PreferenceMatrix;
use crate::solver::NashReport;

/// Mass a solution may place outside the Smith set and still count as inside.
pub const DEFAULT_MASS_THRESHOLD: f64 = 1e-6;

/// The response beating every other by strict majority, if any.
pub fn condorcet_winner(prefs: &PreferenceMatrix) -> Option<usize> {
    let n = prefs.n();
    (0..n).find(|&i| (0..n).all(|j| j == i || prefs.beats(i, j)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Singleton,
    Cycle,
}

/// Ordered partition `S_1, ..., S_k` of the responses: every member of an
/// earlier group beats every member of a later one, and each group is a
/// single response or a strongly connected majority cycle. `S_1` is the
/// Smith set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub groups: Vec<Vec<usize>>,
    pub kinds: Vec<GroupKind>,
}

impl Decomposition {
    pub fn smith_set(&self) -> &[usize] {
        &self.groups[0]
    }

    /// Index of the group containing response `i`.
    pub fn group_of(&self, i: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&i))
    }
}

/// Strongly connected components of the majority digraph (`i -> j` iff
/// `i` beats `j`), in Tarjan's emission order: every component is emitted
/// after all components it reaches.
fn tarjan(prefs: &PreferenceMatrix) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = prefs.n();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut next = 0;
    // explicit call stack of (vertex, next successor to try)
    let mut calls: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        calls.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut succ)) = calls.last_mut() {
            if let Some(w) = (*succ..n).find(|&w| w != v && prefs.beats(v, w)) {
                *succ = w + 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                component.sort_unstable();
                components.push(component);
            }
        }
    }
    components
}

/// Splits the responses into the ordered groups of the majority tournament.
///
/// Refuses matrices with ties: without strict majorities the decomposition
/// is not unique.
pub fn smith_decomposition(prefs: &PreferenceMatrix) -> Result<Decomposition> {
    if !prefs.no_tie() {
        return Err(Error::Ties);
    }
    let mut groups = tarjan(prefs);
    groups.reverse();

    // In a tournament the condensation is a total order; confirm it.
    for (a, upper) in groups.iter().enumerate() {
        for lower in &groups[a + 1..] {
            for &i in upper {
                for &j in lower {
                    if !prefs.beats(i, j) {
                        return Err(Error::Internal(format!(
                            "condensation is not totally ordered: {i} does not beat {j}"
                        )));
                    }
                }
            }
        }
    }
    let kinds = groups
        .iter()
        .map(|g| if g.len() == 1 { GroupKind::Singleton } else { GroupKind::Cycle })
        .collect();
    Ok(Decomposition { groups, kinds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyVerdict {
    pub condorcet_winner: Option<usize>,
    /// Defined only when a Condorcet winner exists.
    pub condorcet_consistent: Option<bool>,
    pub smith_consistent: bool,
    pub is_mixed: bool,
    pub mass_outside_smith: f64,
    pub smith_set: Vec<usize>,
    pub support: Vec<usize>,
}

/// Compares the row strategy of `nash` with the social-choice structure of `prefs`.
pub fn consistency_verdict(
    prefs: &PreferenceMatrix,
    nash: &NashReport,
    support_threshold: f64,
) -> Result<ConsistencyVerdict> {
    consistency_verdict_with(prefs, nash, support_threshold, DEFAULT_MASS_THRESHOLD)
}

pub fn consistency_verdict_with(
    prefs: &PreferenceMatrix,
    nash: &NashReport,
    support_threshold: f64,
    mass_threshold: f64,
) -> Result<ConsistencyVerdict> {
    let n = prefs.n();
    if nash.row_strategy.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: nash.row_strategy.n() });
    }
    let decomposition = smith_decomposition(prefs)?;
    let smith_set = decomposition.smith_set().to_vec();
    let winner = condorcet_winner(prefs);
    let support = nash.row_strategy.support(support_threshold);
    let mass_outside_smith = (0..n)
        .filter(|i| !smith_set.contains(i))
        .map(|i| nash.row_strategy.get(i))
        .fold(0.0, |acc, w| acc + w);
    Ok(ConsistencyVerdict {
        condorcet_winner: winner,
        condorcet_consistent: winner.map(|w| support == [w]),
        smith_consistent: mass_outside_smith <= mass_threshold,
        is_mixed: support.len() > 1,
        mass_outside_smith,
        smith_set,
        support,
    })
}
