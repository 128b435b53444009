//! The subshift of finite type obtained by adding an absorbing vertex 0 to
//! an automaton, and its decomposition into irreducible blocks.

use std::collections::BTreeSet;

use super::automaton::{LabeledAutomaton, START};
use crate::error::{Error, Result};
use crate::group::Letter;

/// Transition structure on `V ∪ {0}`. Automaton vertices keep their ids and
/// the added vertex gets id `num_states() - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedShift {
    succ: Vec<Vec<usize>>,
    /// Edge labels, parallel to `succ`; `None` for edges into the zero state.
    labels: Vec<Vec<Option<Letter>>>,
    zero: usize,
    start: usize,
}

impl AugmentedShift {
    pub fn from_automaton(a: &LabeledAutomaton) -> Self {
        let n = a.num_vertices();
        let zero = n;
        let mut succ = vec![Vec::new(); n + 1];
        let mut labels = vec![Vec::new(); n + 1];
        for e in a.edges() {
            succ[e.from].push(e.to);
            labels[e.from].push(Some(e.label));
        }
        for v in 0..=n {
            succ[v].push(zero);
            labels[v].push(None);
        }
        let mut shift = AugmentedShift { succ, labels, zero, start: START };
        shift.sort_edges();
        shift
    }

    /// A shift from explicit unlabelled edges on states `0..n`; the zero
    /// state `n` and its edges are added.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let zero = n;
        let mut succ = vec![Vec::new(); n + 1];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Usage(format!("edge ({u}, {v}) outside 0..{n}")));
            }
            succ[u].push(v);
        }
        for s in succ.iter_mut() {
            s.push(zero);
            s.sort_unstable();
            s.dedup();
        }
        let labels = succ.iter().map(|s| vec![None; s.len()]).collect();
        Ok(AugmentedShift { succ, labels, zero, start: 0 })
    }

    fn sort_edges(&mut self) {
        for v in 0..self.succ.len() {
            let mut pairs: Vec<(usize, Option<Letter>)> =
                self.succ[v].iter().copied().zip(self.labels[v].iter().copied()).collect();
            pairs.sort();
            self.succ[v] = pairs.iter().map(|p| p.0).collect();
            self.labels[v] = pairs.iter().map(|p| p.1).collect();
        }
    }

    pub fn num_states(&self) -> usize {
        self.succ.len()
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn transition(&self, u: usize, v: usize) -> bool {
        self.succ[u].binary_search(&v).is_ok()
    }

    pub fn label(&self, u: usize, v: usize) -> Option<Letter> {
        let i = self.succ[u].binary_search(&v).ok()?;
        self.labels[u][i]
    }

    /// Whether consecutive states are all joined by transitions.
    pub fn is_admissible(&self, path: &[usize]) -> bool {
        path.iter().all(|&v| v < self.num_states()) && path.windows(2).all(|p| self.transition(p[0], p[1]))
    }

    pub fn scc_decompose(&self) -> ComponentGraph {
        ComponentGraph::new(self)
    }
}

/// Strongly connected components ordered so that every transition goes from
/// a later block to an earlier one or stays inside its block; in that order
/// the transition matrix is lower block-triangular.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentGraph {
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    /// Condensation edges `(i, j)`, `i ≠ j`, meaning some transition goes from
    /// component `i` to component `j`.
    pub edges: BTreeSet<(usize, usize)>,
    /// Whether each component contains a cycle (a self-loop or two states).
    pub has_cycle: Vec<bool>,
}

impl ComponentGraph {
    fn new(shift: &AugmentedShift) -> Self {
        let components = tarjan(&shift.succ);
        let mut component_of = vec![0; shift.num_states()];
        for (i, comp) in components.iter().enumerate() {
            for &v in comp {
                component_of[v] = i;
            }
        }
        let mut edges = BTreeSet::new();
        let mut has_cycle = vec![false; components.len()];
        for (u, succ) in shift.succ.iter().enumerate() {
            for &v in succ {
                let (cu, cv) = (component_of[u], component_of[v]);
                if cu != cv {
                    edges.insert((cu, cv));
                } else {
                    has_cycle[cu] = true;
                }
            }
        }
        ComponentGraph {
            components,
            component_of,
            edges,
            has_cycle,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// States listed block by block; the permutation of the block form.
    pub fn block_order(&self) -> Vec<usize> {
        self.components.iter().flatten().copied().collect()
    }

    /// Checks the lower block-triangular shape: no transition may go from a
    /// block to a later block.
    pub fn check_block_triangular(&self, shift: &AugmentedShift) -> Result<()> {
        let order = self.block_order();
        let mut position = vec![0; order.len()];
        let mut block_of_position = vec![0; order.len()];
        for (p, &v) in order.iter().enumerate() {
            position[v] = p;
            block_of_position[p] = self.component_of[v];
        }
        for u in 0..shift.num_states() {
            for &v in shift.successors(u) {
                let (bu, bv) = (block_of_position[position[u]], block_of_position[position[v]]);
                if bv > bu {
                    return Err(Error::Check(format!(
                        "transition {u} -> {v} goes from block {bu} up to block {bv}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether component `j` is reachable from component `i` (reflexive).
    pub fn reaches(&self, i: usize, j: usize) -> bool {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![i];
        seen[i] = true;
        while let Some(c) = stack.pop() {
            if c == j {
                return true;
            }
            for &(_, d) in self.edges.range((c, 0)..(c + 1, 0)) {
                if !seen[d] {
                    seen[d] = true;
                    stack.push(d);
                }
            }
        }
        false
    }

    /// Largest number of components from `marked` visited by one path in the
    /// condensation.
    pub fn max_marked_on_path(&self, marked: &[bool]) -> usize {
        // Edges go from higher to lower indices, so a pass in increasing order
        // sees every successor before its predecessors.
        let mut best = vec![0usize; self.len()];
        for c in 0..self.len() {
            let tail = self
                .edges
                .range((c, 0)..(c + 1, 0))
                .map(|&(_, d)| best[d])
                .max()
                .unwrap_or(0);
            best[c] = tail + usize::from(marked[c]);
        }
        best.into_iter().max().unwrap_or(0)
    }

    /// The gcd of cycle lengths inside a component, or `None` for a wandering
    /// component without cycles.
    pub fn period(&self, shift: &AugmentedShift, component: usize) -> Option<usize> {
        if !self.has_cycle[component] {
            return None;
        }
        let comp = &self.components[component];
        let mut level = vec![usize::MAX; shift.num_states()];
        level[comp[0]] = 0;
        let mut queue = std::collections::VecDeque::from([comp[0]]);
        let mut g = 0usize;
        while let Some(u) = queue.pop_front() {
            for &v in shift.successors(u) {
                if self.component_of[v] != component {
                    continue;
                }
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                } else {
                    g = gcd(g, (level[u] + 1).abs_diff(level[v]));
                }
            }
        }
        Some(g)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Iterative Tarjan; components come out sinks first.
fn tarjan(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut next_index = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GeneratorSet;

    fn closure(shift: &AugmentedShift) -> Vec<Vec<bool>> {
        let n = shift.num_states();
        let mut r = vec![vec![false; n]; n];
        for u in 0..n {
            r[u][u] = true;
            for &v in shift.successors(u) {
                r[u][v] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if r[i][k] && r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
        r
    }

    #[test]
    fn cannon_shift_components() {
        let g = GeneratorSet::free(2).unwrap();
        let shift = AugmentedShift::from_automaton(&LabeledAutomaton::geodesic(&g));
        assert_eq!(shift.num_states(), 6);
        for v in 0..6 {
            assert!(shift.transition(v, shift.zero()));
        }
        let cg = shift.scc_decompose();
        assert_eq!(cg.components, vec![vec![5], vec![1, 2, 3, 4], vec![0]]);
        assert_eq!(cg.has_cycle, vec![true, true, false]);
        cg.check_block_triangular(&shift).unwrap();
        assert_eq!(cg.period(&shift, 1), Some(1));
        assert_eq!(cg.period(&shift, 0), Some(1));
        assert_eq!(cg.period(&shift, 2), None);

        // Components agree with mutual reachability.
        let r = closure(&shift);
        for u in 0..6 {
            for v in 0..6 {
                assert_eq!(cg.component_of[u] == cg.component_of[v], r[u][v] && r[v][u]);
            }
        }
    }

    #[test]
    fn small_graphs() {
        let path = AugmentedShift::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let cg = path.scc_decompose();
        assert_eq!(cg.len(), 4);
        assert_eq!(cg.components.iter().filter(|c| c.len() == 1).count(), 4);
        assert_eq!(cg.has_cycle.iter().filter(|&&c| c).count(), 1);
        cg.check_block_triangular(&path).unwrap();

        let two_cycle = AugmentedShift::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        let cg = two_cycle.scc_decompose();
        let c = cg.component_of[0];
        assert_eq!(cg.period(&two_cycle, c), Some(2));

        let mixed = AugmentedShift::from_edges(3, &[(0, 1), (1, 2), (2, 0), (0, 2)]).unwrap();
        let cg = mixed.scc_decompose();
        assert_eq!(cg.period(&mixed, cg.component_of[0]), Some(1));
        let loop1 = AugmentedShift::from_edges(1, &[(0, 0)]).unwrap();
        let cg = loop1.scc_decompose();
        assert_eq!(cg.period(&loop1, cg.component_of[0]), Some(1));
    }

    #[test]
    fn marked_components_along_paths() {
        // Two cycles joined by an edge, and a third hanging off the first.
        let shift = AugmentedShift::from_edges(
            5,
            &[(0, 0), (0, 1), (1, 1), (2, 2), (2, 3), (3, 4), (4, 3)],
        )
        .unwrap();
        let cg = shift.scc_decompose();
        let mut marked = vec![false; cg.len()];
        marked[cg.component_of[0]] = true;
        marked[cg.component_of[1]] = true;
        assert_eq!(cg.max_marked_on_path(&marked), 2);
        let mut parallel = vec![false; cg.len()];
        parallel[cg.component_of[1]] = true;
        parallel[cg.component_of[3]] = true;
        assert_eq!(cg.max_marked_on_path(&parallel), 1);
        assert!(cg.reaches(cg.component_of[0], cg.component_of[1]));
        assert!(!cg.reaches(cg.component_of[1], cg.component_of[0]));
    }
}
