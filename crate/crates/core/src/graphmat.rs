//! Sparse Boolean adjacency matrices and the structural algorithms on them.
//!
//! Matrix convention: entry `(i, j)` is set iff there is an edge `j -> i`, so
//! row `i` lists the in-neighbors of vertex `i`. Every hot operation of the
//! relaxation (minimal rows, products with an eigenvector) is row-local, so
//! only rows are stored; out-neighbor lists are built on demand by
//! [`BoolMatrix::transpose`].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::GraphError;

/// Sorted, deduplicated set of vertex indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new() -> Self {
        IndexSet(Vec::new())
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    /// Wraps a vector that is already strictly increasing.
    pub(crate) fn from_sorted(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        IndexSet(v)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> core::iter::Copied<core::slice::Iter<'_, usize>> {
        self.0.iter().copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    /// Position of `index` inside the set, i.e. its label after restriction.
    pub fn position(&self, index: usize) -> Option<usize> {
        self.0.binary_search(&index).ok()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        sorted_subset(&self.0, &other.0)
    }

    pub fn check_range(&self, n: usize) -> Result<(), GraphError> {
        match self.0.last() {
            Some(&index) if index >= n => Err(GraphError::IndexOutOfRange { index, n }),
            _ => Ok(()),
        }
    }

    /// Membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for i in self.iter() {
            mask[i] = true;
        }
        mask
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        IndexSet::from_indices(iter)
    }
}

pub(crate) fn sorted_subset(a: &[usize], b: &[usize]) -> bool {
    let mut bi = b.iter();
    'outer: for x in a {
        for y in bi.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

fn normalize_row(row: &mut Vec<usize>, n: usize) -> Result<(), GraphError> {
    row.sort_unstable();
    row.dedup();
    match row.last() {
        Some(&index) if index >= n => Err(GraphError::IndexOutOfRange { index, n }),
        _ => Ok(()),
    }
}

/// Square Boolean matrix stored as sorted in-neighbor lists.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
}

impl BoolMatrix {
    pub fn empty(n: usize) -> Self {
        BoolMatrix {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    /// Builds a matrix from per-row column lists; rows are sorted and
    /// deduplicated.
    pub fn from_rows(mut rows: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        let n = rows.len();
        for row in &mut rows {
            normalize_row(row, n)?;
        }
        Ok(BoolMatrix { n, rows })
    }

    /// Builds the adjacency matrix of the edges `u -> v`. Parallel edges
    /// collapse into one entry.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut rows = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n {
                return Err(GraphError::IndexOutOfRange { index: u, n });
            }
            if v >= n {
                return Err(GraphError::IndexOutOfRange { index: v, n });
            }
            rows[v].push(u);
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        Ok(BoolMatrix { n, rows })
    }

    /// Directed cycle `0 -> 1 -> .. -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Self {
        let edges = (0..n).map(|i| (i, (i + 1) % n));
        BoolMatrix::from_edges(n, edges).expect("indices in range")
    }

    /// Complete digraph without self-loops.
    pub fn complete(n: usize) -> Self {
        let rows = (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect();
        BoolMatrix { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub(crate) fn set_row(&mut self, i: usize, row: Vec<usize>) {
        debug_assert!(row.windows(2).all(|w| w[0] < w[1]));
        self.rows[i] = row;
    }

    /// Entry `(i, j)`, i.e. whether the edge `j -> i` exists.
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&j).is_ok()
    }

    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.get(target, source)
    }

    /// Edges `(source, target)`, grouped by target.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&j| (j, i)))
    }

    /// Number of 1-entries.
    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.rows[i].len()
    }

    pub fn max_in_degree(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn self_loop_count(&self) -> usize {
        (0..self.n).filter(|&i| self.get(i, i)).count()
    }

    /// Out-neighbor lists, i.e. the rows of the transposed matrix.
    pub fn transpose(&self) -> BoolMatrix {
        let mut rows = vec![Vec::new(); self.n];
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row {
                rows[j].push(i);
            }
        }
        BoolMatrix { n: self.n, rows }
    }

    /// Entrywise `self <= other`.
    pub fn is_subgraph_of(&self, other: &BoolMatrix) -> bool {
        self.n == other.n
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| sorted_subset(a, b))
    }

    /// Structural acyclicity test. Self-loops count as cycles.
    pub fn is_acyclic(&self) -> bool {
        // Peel sinks off the graph: a vertex is removable once all of its
        // out-edges lead to removed vertices.
        let mut out_deg = vec![0usize; self.n];
        for row in &self.rows {
            for &j in row {
                out_deg[j] += 1;
            }
        }
        let mut stack: Vec<usize> = (0..self.n).filter(|&i| out_deg[i] == 0).collect();
        let mut removed = 0;
        while let Some(i) = stack.pop() {
            removed += 1;
            for &j in &self.rows[i] {
                out_deg[j] -= 1;
                if out_deg[j] == 0 {
                    stack.push(j);
                }
            }
        }
        removed == self.n
    }

    /// Strongly connected components, sinks first: every edge between two
    /// components runs from a later component to an earlier one.
    pub fn strongly_connected_components(&self) -> Vec<IndexSet> {
        // Tarjan over in-edges emits ancestors before descendants, so the
        // emitted order is sources first; reverse it at the end.
        const UNVISITED: usize = usize::MAX;
        let n = self.n;
        let mut index = vec![UNVISITED; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut call: Vec<(usize, usize)> = Vec::new();
        let mut next = 0usize;
        let mut comps = Vec::new();

        for root in 0..n {
            if index[root] != UNVISITED {
                continue;
            }
            call.push((root, 0));
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;

            while let Some(&mut (v, ref mut pos)) = call.last_mut() {
                let row = &self.rows[v];
                if *pos < row.len() {
                    let w = row[*pos];
                    *pos += 1;
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
                    comps.push(IndexSet::from_indices(comp));
                }
            }
        }
        comps.reverse();
        comps
    }

    /// Frobenius normal form. See [`FrobeniusForm`] for the orientation.
    pub fn frobenius_factorize(&self) -> FrobeniusForm {
        FrobeniusForm::from_blocks(self.n, self.strongly_connected_components())
    }

    /// Principal submatrix on `subset`, relabelled by position in the set.
    pub fn restrict(&self, subset: &IndexSet) -> Result<BoolMatrix, GraphError> {
        subset.check_range(self.n)?;
        let mut label = vec![usize::MAX; self.n];
        for (pos, i) in subset.iter().enumerate() {
            label[i] = pos;
        }
        let rows = subset
            .iter()
            .map(|i| {
                self.rows[i]
                    .iter()
                    .filter_map(|&j| (label[j] != usize::MAX).then_some(label[j]))
                    .collect()
            })
            .collect();
        Ok(BoolMatrix {
            n: subset.len(),
            rows,
        })
    }

    /// `P^{-1} M P` for the permutation that lists `order[k]` at position `k`.
    pub fn permuted(&self, order: &[usize]) -> Result<BoolMatrix, GraphError> {
        if order.len() != self.n {
            return Err(GraphError::DimensionMismatch {
                expected: self.n,
                got: order.len(),
            });
        }
        let mut position = vec![usize::MAX; self.n];
        for (k, &i) in order.iter().enumerate() {
            if i >= self.n {
                return Err(GraphError::IndexOutOfRange { index: i, n: self.n });
            }
            position[i] = k;
        }
        if position.contains(&usize::MAX) {
            return Err(GraphError::DimensionMismatch {
                expected: self.n,
                got: IndexSet::from_indices(order.iter().copied()).len(),
            });
        }
        let rows = order
            .iter()
            .map(|&i| {
                let mut row: Vec<usize> = self.rows[i].iter().map(|&j| position[j]).collect();
                row.sort_unstable();
                row
            })
            .collect();
        Ok(BoolMatrix { n: self.n, rows })
    }
}

/// Permutation plus irreducible diagonal blocks of a nonnegative matrix.
///
/// Blocks are ordered sinks first, so after relabelling by `order` the matrix
/// is block upper triangular: an entry `(p, q)` with `p` in a later block than
/// `q` never occurs. The first block receives edges only from later blocks and
/// the last block (the basic set, when defined) only emits them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusForm {
    order: Vec<usize>,
    blocks: Vec<IndexSet>,
    block_of: Vec<usize>,
}

impl FrobeniusForm {
    fn from_blocks(n: usize, blocks: Vec<IndexSet>) -> Self {
        let mut order = Vec::with_capacity(n);
        let mut block_of = vec![0; n];
        for (b, block) in blocks.iter().enumerate() {
            for i in block.iter() {
                order.push(i);
                block_of[i] = b;
            }
        }
        FrobeniusForm {
            order,
            blocks,
            block_of,
        }
    }

    /// Original vertex at each position of the permuted matrix.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn blocks(&self) -> &[IndexSet] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, vertex: usize) -> usize {
        self.block_of[vertex]
    }

    pub fn last_block(&self) -> Option<&IndexSet> {
        self.blocks.last()
    }

    /// Block-level successor lists: `succ[b]` holds the blocks that receive an
    /// edge from block `b`. Every successor has a smaller index.
    pub fn condensation(&self, m: &BoolMatrix) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.blocks.len()];
        for (i, row) in m.rows().iter().enumerate() {
            let bi = self.block_of[i];
            for &j in row {
                let bj = self.block_of[j];
                if bj != bi {
                    succ[bj].push(bi);
                }
            }
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        succ
    }
}

/// Sparse matrix with strictly positive weights, same index discipline as
/// [`BoolMatrix`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl WeightedMatrix {
    /// Weighted edges `(u, v, w)` meaning `u -> v` with weight `w`. A repeated
    /// edge keeps its last weight.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (u, v, w) in edges {
            if u >= n {
                return Err(GraphError::IndexOutOfRange { index: u, n });
            }
            if v >= n {
                return Err(GraphError::IndexOutOfRange { index: v, n });
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(GraphError::BadWeight {
                    source_vertex: u,
                    target: v,
                    weight: w,
                });
            }
            rows[v].push((u, w));
        }
        for row in &mut rows {
            // stable sort keeps insertion order among duplicates
            row.sort_by_key(|&(j, _)| j);
            let mut dedup: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, w) in row.iter() {
                match dedup.last_mut() {
                    Some(last) if last.0 == j => last.1 = w,
                    _ => dedup.push((j, w)),
                }
            }
            *row = dedup;
        }
        Ok(WeightedMatrix { n, rows })
    }

    /// Unit weights on the pattern of `m`.
    pub fn unit(m: &BoolMatrix) -> Self {
        let rows = m
            .rows()
            .iter()
            .map(|row| row.iter().map(|&j| (j, 1.0)).collect())
            .collect();
        WeightedMatrix { n: m.n(), rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .ok()
            .map(|k| self.rows[i][k].1)
    }

    pub fn row_total(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, w)| w).sum()
    }

    pub fn max_row_total(&self) -> f64 {
        (0..self.n).map(|i| self.row_total(i)).fold(0.0, f64::max)
    }

    pub fn pattern(&self) -> BoolMatrix {
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|&(j, _)| j).collect())
            .collect();
        BoolMatrix { n: self.n, rows }
    }

    /// Weighted edges `(source, target, weight)`, grouped by target.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, w)| (j, i, w)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> BoolMatrix {
        BoolMatrix::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn assert_block_upper_triangular(m: &BoolMatrix, form: &FrobeniusForm) {
        for (i, row) in m.rows().iter().enumerate() {
            for &j in row {
                assert!(
                    form.block_of(i) <= form.block_of(j),
                    "entry ({i},{j}) lies below the block diagonal"
                );
            }
        }
    }

    #[test]
    fn row_convention_is_in_neighbors() {
        let m = BoolMatrix::from_edges(2, [(0, 1)]).unwrap();
        assert_eq!(m.row(1), &[0]);
        assert!(m.row(0).is_empty());
        assert!(m.has_edge(0, 1));
        assert!(m.get(1, 0));
    }

    #[test]
    fn acyclicity_examples() {
        assert!(!BoolMatrix::cycle(3).is_acyclic());
        assert!(chain3().is_acyclic());
        let looped = BoolMatrix::from_edges(1, [(0, 0)]).unwrap();
        assert!(!looped.is_acyclic());
        assert!(BoolMatrix::empty(0).is_acyclic());
    }

    #[test]
    fn scc_examples() {
        let two_pairs = BoolMatrix::from_edges(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        let comps = two_pairs.strongly_connected_components();
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.len() == 2));

        let comps = chain3().strongly_connected_components();
        assert_eq!(comps.len(), 3);
        // sinks first
        assert_eq!(comps[0].as_slice(), &[2]);
        assert_eq!(comps[2].as_slice(), &[0]);

        let comps = BoolMatrix::complete(3).strongly_connected_components();
        assert_eq!(comps, vec![IndexSet::full(3)]);
    }

    #[test]
    fn frobenius_examples() {
        let form = BoolMatrix::cycle(5).frobenius_factorize();
        assert_eq!(form.block_count(), 1);

        let chain = chain3();
        let form = chain.frobenius_factorize();
        assert_eq!(form.block_count(), 3);
        let permuted = chain.permuted(form.order()).unwrap();
        for (a, row) in permuted.rows().iter().enumerate() {
            assert!(row.iter().all(|&b| b > a), "strictly upper triangular");
        }
    }

    #[test]
    fn frobenius_two_coupled_pairs() {
        // pair {0,1} feeds pair {2,3} through 1 -> 2
        let m = BoolMatrix::from_edges(4, [(0, 1), (1, 0), (2, 3), (3, 2), (1, 2)]).unwrap();
        let form = m.frobenius_factorize();
        assert_eq!(form.blocks(), &[IndexSet::from_indices([2, 3]), IndexSet::from_indices([0, 1])]);
        let p = m.permuted(form.order()).unwrap();
        // entrywise: order = [2,3,0,1]; the coupling edge 1->2 is entry (2,1)
        // of M, which lands at (0, 3) of the permuted matrix
        let expected = BoolMatrix::from_rows(vec![vec![1, 3], vec![0], vec![3], vec![2]]).unwrap();
        assert_eq!(p, expected);
        assert_block_upper_triangular(&m, &form);
    }

    #[test]
    fn restrict_examples() {
        let c = BoolMatrix::cycle(3);
        assert_eq!(c.restrict(&IndexSet::full(3)).unwrap(), c);
        let sub = c.restrict(&IndexSet::from_indices([0, 1])).unwrap();
        assert_eq!(sub.edge_count(), 1);
        assert!(sub.has_edge(0, 1));
        let empty = c.restrict(&IndexSet::new()).unwrap();
        assert_eq!(empty.n(), 0);
        assert_eq!(
            c.restrict(&IndexSet::from_indices([0, 7])),
            Err(GraphError::IndexOutOfRange { index: 7, n: 3 })
        );
    }

    #[test]
    fn edge_count_examples() {
        assert_eq!(BoolMatrix::cycle(3).edge_count(), 3);
        assert_eq!(BoolMatrix::empty(4).edge_count(), 0);
        assert_eq!(BoolMatrix::complete(4).edge_count(), 12);
    }

    #[test]
    fn parallel_edges_collapse() {
        let m = BoolMatrix::from_edges(2, [(0, 1), (0, 1)]).unwrap();
        assert_eq!(m.edge_count(), 1);
        assert!(BoolMatrix::from_edges(2, [(0, 2)]).is_err());
    }

    #[test]
    fn weighted_basics() {
        let w = WeightedMatrix::from_edges(2, [(0, 1, 2.5), (1, 0, 1.0)]).unwrap();
        assert_eq!(w.weight(1, 0), Some(2.5));
        assert_eq!(w.max_row_total(), 2.5);
        assert_eq!(w.pattern(), BoolMatrix::cycle(2));
        assert!(WeightedMatrix::from_edges(2, [(0, 1, 0.0)]).is_err());
        assert!(WeightedMatrix::from_edges(2, [(0, 1, -1.0)]).is_err());
    }

    #[test]
    fn index_set_ops() {
        let s = IndexSet::from_indices([5, 1, 3, 3]);
        assert_eq!(s.as_slice(), &[1, 3, 5]);
        assert_eq!(s.position(5), Some(2));
        assert!(IndexSet::from_indices([1, 5]).is_subset(&s));
        assert!(!IndexSet::from_indices([2]).is_subset(&s));
        assert!(IndexSet::new().is_subset(&s));
    }
}
