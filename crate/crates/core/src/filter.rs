//! Two-stage node selection under an extra-qubit budget.
//!
//! Stage 1 maximizes the number of selected nodes; since every node counts
//! the same, taking the cheapest nodes first is exact. Stage 2 fixes that
//! count and maximizes distinct covered qubits by depth-first branch and
//! bound over candidates in ascending id order, trying inclusion first. That
//! order visits equal-size subsets lexicographically, so keeping only strict
//! improvements returns the lexicographically smallest optimal id set.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Circuit;
use crate::reconstruct::extra_qubit_cost;
use crate::select::{MonitorPlan, Node};
use crate::trace::TraceError;

/// Default bound on original plus extra qubits.
pub const DEFAULT_Q_MAX: usize = 20;

/// Most candidates the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("{0} candidates exceed the exhaustive-search limit of {BRUTE_FORCE_LIMIT}")]
    TooManyCandidates(usize),

    #[error("covered qubit {0} exceeds the supported range")]
    QubitOutOfRange(usize),

    #[error("candidate id {0} appears twice")]
    DuplicateId(usize),

    #[error(transparent)]
    Trace(#[from] TraceError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: usize,
    /// Extra qubits the node needs.
    pub cost: usize,
    pub covers: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterInstance {
    pub q_base: usize,
    pub q_max: usize,
    pub candidates: Vec<Candidate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterSolution {
    /// Ascending.
    pub selected: Vec<usize>,
    pub covered: BTreeSet<usize>,
    pub obj1: usize,
    pub obj2: usize,
    /// Set when the instance admits no selection at all.
    pub warning: Option<String>,
}

impl FilterSolution {
    fn from_ids(instance: &FilterInstance, mut selected: Vec<usize>) -> FilterSolution {
        selected.sort_unstable();
        let covered: BTreeSet<usize> = instance
            .candidates
            .iter()
            .filter(|c| selected.binary_search(&c.id).is_ok())
            .flat_map(|c| c.covers.iter().copied())
            .collect();
        FilterSolution {
            obj1: selected.len(),
            obj2: covered.len(),
            selected,
            covered,
            warning: None,
        }
    }

    fn infeasible(instance: &FilterInstance) -> FilterSolution {
        FilterSolution {
            selected: Vec::new(),
            covered: BTreeSet::new(),
            obj1: 0,
            obj2: 0,
            warning: Some(format!(
                "{} original qubits already exceed the budget of {}",
                instance.q_base, instance.q_max
            )),
        }
    }

    pub fn total_cost(&self, instance: &FilterInstance) -> usize {
        instance
            .candidates
            .iter()
            .filter(|c| self.selected.binary_search(&c.id).is_ok())
            .map(|c| c.cost)
            .sum()
    }
}

fn mask_of(covers: &BTreeSet<usize>) -> Result<u128, FilterError> {
    covers.iter().try_fold(0u128, |m, &q| {
        if q < 128 {
            Ok(m | 1 << q)
        } else {
            Err(FilterError::QubitOutOfRange(q))
        }
    })
}

fn check_ids(instance: &FilterInstance) -> Result<(), FilterError> {
    let mut seen = BTreeSet::new();
    for c in &instance.candidates {
        if !seen.insert(c.id) {
            return Err(FilterError::DuplicateId(c.id));
        }
    }
    Ok(())
}

pub fn filter_nodes(instance: &FilterInstance) -> Result<FilterSolution, FilterError> {
    check_ids(instance)?;
    if instance.q_base > instance.q_max {
        return Ok(FilterSolution::infeasible(instance));
    }
    let budget = instance.q_max - instance.q_base;
    let total: usize = instance.candidates.iter().map(|c| c.cost).sum();
    if total <= budget {
        let all = instance.candidates.iter().map(|c| c.id).collect();
        return Ok(FilterSolution::from_ids(instance, all));
    }

    // Stage 1.
    let mut costs: Vec<usize> = instance.candidates.iter().map(|c| c.cost).collect();
    costs.sort_unstable();
    let mut spent = 0;
    let mut z1 = 0;
    for c in costs {
        if spent + c > budget {
            break;
        }
        spent += c;
        z1 += 1;
    }

    // Stage 2.
    let mut items: Vec<(usize, usize, u128)> = instance
        .candidates
        .iter()
        .map(|c| Ok((c.id, c.cost, mask_of(&c.covers)?)))
        .collect::<Result<_, FilterError>>()?;
    items.sort_by_key(|t| t.0);
    let mut search = Search {
        items: &items,
        need: z1,
        budget,
        suffix_costs: suffix_sorted_costs(&items),
        best: None,
        chosen: Vec::with_capacity(z1),
    };
    search.run(0, 0, 0);
    let (_, ids) = search.best.expect("stage 1 count is attainable");
    Ok(FilterSolution::from_ids(instance, ids))
}

/// For each position, the costs of the remaining items, ascending.
fn suffix_sorted_costs(items: &[(usize, usize, u128)]) -> Vec<Vec<usize>> {
    (0..=items.len())
        .map(|pos| {
            let mut v: Vec<usize> = items[pos..].iter().map(|t| t.1).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

struct Search<'a> {
    items: &'a [(usize, usize, u128)],
    need: usize,
    budget: usize,
    suffix_costs: Vec<Vec<usize>>,
    best: Option<(u32, Vec<usize>)>,
    chosen: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, pos: usize, cost: usize, covered: u128) {
        let missing = self.need - self.chosen.len();
        if missing == 0 {
            let value = covered.count_ones();
            if self.best.as_ref().is_none_or(|(b, _)| value > *b) {
                self.best = Some((value, self.chosen.clone()));
            }
            return;
        }
        let rest = &self.suffix_costs[pos];
        if rest.len() < missing || cost + rest[..missing].iter().sum::<usize>() > self.budget {
            return;
        }
        if let Some((best, _)) = &self.best {
            if self.coverage_bound(pos, covered, missing) <= *best {
                return;
            }
        }
        let (id, c, mask) = self.items[pos];
        if cost + c <= self.budget {
            self.chosen.push(id);
            self.run(pos + 1, cost + c, covered | mask);
            self.chosen.pop();
        }
        self.run(pos + 1, cost, covered);
    }

    /// Coverage reachable by adding `missing` more items from `pos` on.
    fn coverage_bound(&self, pos: usize, covered: u128, missing: usize) -> u32 {
        let union = self.items[pos..].iter().fold(covered, |m, t| m | t.2);
        let mut gains: Vec<u32> = self.items[pos..].iter().map(|t| (t.2 & !covered).count_ones()).collect();
        gains.sort_unstable_by(|a, b| b.cmp(a));
        let greedy: u32 = gains.iter().take(missing).sum();
        union.count_ones().min(covered.count_ones() + greedy)
    }
}

/// Exhaustive search with the same objective and tie-break.
pub fn brute_force_filter(instance: &FilterInstance) -> Result<FilterSolution, FilterError> {
    check_ids(instance)?;
    let n = instance.candidates.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(FilterError::TooManyCandidates(n));
    }
    if instance.q_base > instance.q_max {
        return Ok(FilterSolution::infeasible(instance));
    }
    let budget = instance.q_max - instance.q_base;
    let mut best: Option<(usize, usize, Vec<usize>)> = None;
    for mask in 0u32..1 << n {
        let picked: Vec<&Candidate> = (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| &instance.candidates[k]).collect();
        if picked.iter().map(|c| c.cost).sum::<usize>() > budget {
            continue;
        }
        let mut ids: Vec<usize> = picked.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        let covered: BTreeSet<usize> = picked.iter().flat_map(|c| c.covers.iter().copied()).collect();
        let better = match &best {
            None => true,
            Some((o1, o2, b)) => (ids.len(), covered.len()) > (*o1, *o2) || ((ids.len(), covered.len()) == (*o1, *o2) && ids < *b),
        };
        if better {
            best = Some((ids.len(), covered.len(), ids));
        }
    }
    let (_, _, ids) = best.expect("the empty set is always feasible");
    Ok(FilterSolution::from_ids(instance, ids))
}

/// Filter instance for a plan: candidate `k` is `nodes[k]`, costing its
/// extra qubits and covering its monitored qubit.
pub fn plan_instance(circuit: &Circuit, plan: &MonitorPlan, q_max: usize) -> Result<(FilterInstance, Vec<Node>), FilterError> {
    let nodes = plan.nodes();
    let candidates = nodes
        .iter()
        .enumerate()
        .map(|(id, &node)| {
            Ok(Candidate {
                id,
                cost: extra_qubit_cost(circuit, node)?,
                covers: BTreeSet::from([node.qubit]),
            })
        })
        .collect::<Result<_, FilterError>>()?;
    Ok((
        FilterInstance {
            q_base: circuit.num_qubits(),
            q_max,
            candidates,
        },
        nodes,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(q_base: usize, q_max: usize, cands: &[(usize, &[usize])]) -> FilterInstance {
        FilterInstance {
            q_base,
            q_max,
            candidates: cands
                .iter()
                .enumerate()
                .map(|(id, (cost, covers))| Candidate {
                    id,
                    cost: *cost,
                    covers: covers.iter().copied().collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn everything_fits() {
        let i = inst(3, 20, &[(2, &[0]), (5, &[1]), (0, &[2])]);
        let s = filter_nodes(&i).unwrap();
        assert_eq!(s.selected, vec![0, 1, 2]);
        assert_eq!((s.obj1, s.obj2), (3, 3));
    }

    #[test]
    fn count_beats_coverage() {
        let i = inst(18, 20, &[(1, &[0]), (1, &[0]), (2, &[0, 1])]);
        let s = filter_nodes(&i).unwrap();
        assert_eq!(s.selected, vec![0, 1]);
        assert_eq!(s.covered, BTreeSet::from([0]));
        assert_eq!(brute_force_filter(&i).unwrap(), s);
    }

    #[test]
    fn tie_goes_to_lowest_id() {
        let i = inst(19, 20, &[(1, &[0]), (1, &[1])]);
        let s = filter_nodes(&i).unwrap();
        assert_eq!(s.selected, vec![0]);
        assert_eq!((s.obj1, s.obj2), (1, 1));
        assert_eq!(brute_force_filter(&i).unwrap(), s);
    }

    #[test]
    fn coverage_breaks_count_ties() {
        let i = inst(10, 12, &[(1, &[0]), (1, &[0]), (1, &[1]), (3, &[2])]);
        let s = filter_nodes(&i).unwrap();
        assert_eq!(s.selected, vec![0, 2]);
        assert_eq!(s.obj2, 2);
    }

    #[test]
    fn over_budget_base() {
        let i = inst(21, 20, &[(0, &[0])]);
        let s = filter_nodes(&i).unwrap();
        assert!(s.selected.is_empty());
        assert!(s.warning.is_some());
    }

    #[test]
    fn oracle_edge_cases() {
        let empty = inst(2, 20, &[]);
        let s = brute_force_filter(&empty).unwrap();
        assert_eq!((s.obj1, s.obj2), (0, 0));
        assert_eq!(filter_nodes(&empty).unwrap(), s);
        let single = inst(2, 3, &[(1, &[0])]);
        assert_eq!(brute_force_filter(&single).unwrap().selected, vec![0]);
        let many = inst(0, 100, &vec![(1usize, &[0usize][..]); 21]);
        assert!(matches!(brute_force_filter(&many), Err(FilterError::TooManyCandidates(21))));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut i = inst(0, 1, &[(1, &[0]), (1, &[1])]);
        i.candidates[1].id = 0;
        assert!(matches!(filter_nodes(&i), Err(FilterError::DuplicateId(0))));
    }
}
