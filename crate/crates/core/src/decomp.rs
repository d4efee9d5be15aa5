//! Dependency graph, strongly connected components, and depth metrics.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::mps::MonotoneSystem;

/// Edge `i -> j` whenever `x_j` occurs in some monomial of `P_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph {
    succ: Vec<Vec<usize>>,
}

impl DependencyGraph {
    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    /// Sorted, deduplicated successors of `i`.
    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.succ[i].binary_search(&j).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
    }
}

pub fn build_graph(sys: &MonotoneSystem) -> DependencyGraph {
    let succ = sys
        .equations()
        .iter()
        .map(|eq| {
            let mut s: Vec<usize> = eq.iter().flat_map(|m| m.variables()).collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    DependencyGraph { succ }
}

/// Iterative Tarjan; components come out in reverse topological order of
/// the condensation (sinks first).
fn tarjan(g: &DependencyGraph) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = g.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&(v, pos)) = call.last() {
            if let Some(&w) = g.succ[v].get(pos) {
                if let Some(top) = call.last_mut() {
                    top.1 += 1;
                }
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Scc {
    /// Sorted variable indices.
    pub vars: Vec<usize>,
    pub nonlinear: bool,
    /// Longest SCC count on any DAG path starting here.
    pub height: usize,
    /// Largest nonlinear SCC count on any DAG path starting here.
    pub nonlinear_height: usize,
    /// Indices (into `Decomposition::sccs`) of directly depended-on SCCs.
    pub successors: Vec<usize>,
    /// Every variable reachable from this SCC outside of it, sorted.
    pub deps: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    /// Topological order: every SCC appears after the SCCs it depends on.
    pub sccs: Vec<Scc>,
    pub scc_of: Vec<usize>,
    pub depth: usize,
    pub nonlinear_depth: usize,
}

impl Decomposition {
    /// SCC indices grouped by height; each group depends only on earlier groups.
    pub fn levels(&self) -> Vec<Vec<usize>> {
        let mut levels = vec![Vec::new(); self.depth];
        for (k, s) in self.sccs.iter().enumerate() {
            levels[s.height - 1].push(k);
        }
        levels
    }
}

pub fn decompose(g: &DependencyGraph, sys: &MonotoneSystem) -> Decomposition {
    let n = g.len();
    let comps = tarjan(g);
    let c = comps.len();
    let mut comp_of = vec![0; n];
    for (k, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = k;
        }
    }

    let mut comp_succ: Vec<Vec<usize>> = vec![Vec::new(); c];
    let mut comp_pred: Vec<Vec<usize>> = vec![Vec::new(); c];
    for (i, j) in g.edges() {
        let (a, b) = (comp_of[i], comp_of[j]);
        if a != b {
            comp_succ[a].push(b);
            comp_pred[b].push(a);
        }
    }
    for s in comp_succ.iter_mut().chain(comp_pred.iter_mut()) {
        s.sort_unstable();
        s.dedup();
    }

    // Kahn: emit a component once everything it depends on is emitted,
    // smallest contained variable first.
    let mut pending: Vec<usize> = comp_succ.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..c)
        .filter(|&k| pending[k] == 0)
        .map(|k| Reverse((comps[k][0], k)))
        .collect();
    let mut order = Vec::with_capacity(c);
    while let Some(Reverse((_, k))) = ready.pop() {
        order.push(k);
        for &p in &comp_pred[k] {
            pending[p] -= 1;
            if pending[p] == 0 {
                ready.push(Reverse((comps[p][0], p)));
            }
        }
    }
    debug_assert_eq!(order.len(), c);
    let mut position = vec![0; c];
    for (pos, &k) in order.iter().enumerate() {
        position[k] = pos;
    }

    let mut sccs: Vec<Scc> = Vec::with_capacity(c);
    let mut scc_of = vec![0; n];
    for &k in &order {
        let vars = comps[k].clone();
        for &v in &vars {
            scc_of[v] = position[k];
        }
        let nonlinear = vars.iter().any(|&i| {
            sys.equation(i)
                .iter()
                .any(|m| m.exponents().iter().filter(|(v, _)| comp_of[**v] == k).map(|(_, e)| e).sum::<u32>() >= 2)
        });
        let mut successors: Vec<usize> = comp_succ[k].iter().map(|&s| position[s]).collect();
        successors.sort_unstable();
        let height = 1 + successors.iter().map(|&s| sccs[s].height).max().unwrap_or(0);
        let nonlinear_height = usize::from(nonlinear)
            + successors.iter().map(|&s| sccs[s].nonlinear_height).max().unwrap_or(0);
        let mut deps: Vec<usize> = successors
            .iter()
            .flat_map(|&s| sccs[s].vars.iter().chain(&sccs[s].deps).copied())
            .collect();
        deps.sort_unstable();
        deps.dedup();
        sccs.push(Scc { vars, nonlinear, height, nonlinear_height, successors, deps });
    }

    let depth = sccs.iter().map(|s| s.height).max().unwrap_or(0);
    let nonlinear_depth = sccs.iter().map(|s| s.nonlinear_height).max().unwrap_or(0);
    Decomposition { sccs, scc_of, depth, nonlinear_depth }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn sys(json: &str) -> MonotoneSystem {
        MonotoneSystem::parse(json).unwrap()
    }

    #[test]
    fn self_loop_for_univariate() {
        let s = sys(r#"{"vars":["x"],"eqs":[[{"c":"1/2","m":{"x":2}},{"c":"1/2","m":{}}]]}"#);
        let g = build_graph(&s);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 0)]);
    }

    #[test]
    fn chain_graph_and_depths() {
        let s = fixtures::chain(3);
        let g = build_graph(&s);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)]);
        let d = decompose(&g, &s);
        assert_eq!(d.sccs.len(), 3);
        assert!(d.sccs.iter().all(|c| c.nonlinear));
        assert_eq!((d.depth, d.nonlinear_depth), (3, 3));
        assert_eq!(d.sccs.iter().map(|c| c.vars.clone()).collect::<Vec<_>>(), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(d.sccs[2].deps, vec![0, 1]);
    }

    #[test]
    fn single_edge_without_loops() {
        let s = sys(r#"{"vars":["a","b"],"eqs":[[{"c":"1/2","m":{}}],[{"c":"1","m":{"a":1}}]]}"#);
        let g = build_graph(&s);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(1, 0)]);
        let d = decompose(&g, &s);
        assert_eq!(d.sccs.len(), 2);
        assert!(d.sccs.iter().all(|c| !c.nonlinear));
        assert_eq!(d.sccs[0].vars, vec![0]);
        assert_eq!(d.depth, 2);
    }

    #[test]
    fn linear_cycle_is_one_scc() {
        let s = sys(
            r#"{"vars":["a","b"],"eqs":[[{"c":"1","m":{"b":1}},{"c":"1/3","m":{}}],[{"c":"1","m":{"a":1}}]]}"#,
        );
        let d = decompose(&build_graph(&s), &s);
        assert_eq!(d.sccs.len(), 1);
        assert_eq!(d.sccs[0].vars, vec![0, 1]);
        assert!(!d.sccs[0].nonlinear);
        assert_eq!((d.depth, d.nonlinear_depth), (1, 0));
    }

    #[test]
    fn lower_scc_square_counts_as_constant() {
        let s = sys(r#"{"vars":["a","b"],"eqs":[[{"c":"1","m":{"b":2}}],[{"c":"1/2","m":{}}]]}"#);
        let d = decompose(&build_graph(&s), &s);
        assert_eq!(d.sccs.len(), 2);
        assert!(d.sccs.iter().all(|c| !c.nonlinear));
        assert_eq!(d.nonlinear_depth, 0);
    }

    #[test]
    fn ties_break_on_smallest_variable() {
        // three independent bottom SCCs listed out of order by dependence
        let s = sys(
            r#"{"vars":["c","b","a"],"eqs":[[{"c":"1/2","m":{}}],[{"c":"1/2","m":{}}],[{"c":"1/2","m":{}}]]}"#,
        );
        let d = decompose(&build_graph(&s), &s);
        assert_eq!(d.sccs.iter().map(|c| c.vars[0]).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(d.levels(), vec![vec![0, 1, 2]]);
    }
}
