//! Monochromatic target structures: m-sumgraphs, partite m-sumgraphs,
//! partite m-graphs, (m,p,c)-sets and arithmetic progressions.
//!
//! Sumgraphs are built by two independent routes. The direct route
//! enumerates index-set chains `H_1 < .. < H_m` together with choice
//! functions from the blocks. The recursive route grows prefix tables
//! the way the block structure composes. The two must agree; the
//! cross-check is part of the acceptance suite.

use std::collections::BTreeSet;
use thiserror::Error;

use crate::coloring::{Color, Coloring, ColoringError};
use crate::semigroup::{is_proper, Elem, Properness, Semigroup};
use crate::sets::nonempty_subsets;

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("sequence is not proper: a_H repeats for the choice {0:?}")]
    NotProper(Vec<Elem>),
    #[error("properness not checkable for the choice {0:?}: undefined sum")]
    NotCheckable(Vec<Elem>),
    #[error("undefined sum while building the structure (bounded carrier overflow)")]
    UndefinedSum,
    #[error("blocks must be nonempty")]
    EmptyBlock,
    #[error("blocks {0} and {1} are not disjoint")]
    BlocksNotDisjoint(usize, usize),
    #[error("edge {0:?} collapses to fewer than {1} elements")]
    EdgeCollision(Vec<Elem>, usize),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}

/// A set of m-element subsets of the carrier, kept sorted for diffing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    pub arity: usize,
    pub edges: BTreeSet<Vec<Elem>>,
}

impl EdgeSet {
    pub fn new(arity: usize) -> Self {
        EdgeSet { arity, edges: BTreeSet::new() }
    }

    fn insert(&mut self, mut edge: Vec<Elem>) -> Result<(), StructureError> {
        edge.sort_unstable();
        edge.dedup();
        if edge.len() != self.arity {
            return Err(StructureError::EdgeCollision(edge, self.arity));
        }
        self.edges.insert(edge);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn union(mut self, other: EdgeSet) -> EdgeSet {
        self.edges.extend(other.edges);
        self
    }
}

/// Outcome of a monochromaticity test. An empty edge set is vacuously
/// monochromatic and reported as `Any`, never as a concrete color.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonoResult {
    Any,
    Mono(Color),
    NotMono,
}

impl MonoResult {
    pub fn is_mono(&self) -> bool {
        !matches!(self, MonoResult::NotMono)
    }
}

/// The common color of an edge set, if any.
pub fn is_monochromatic(coloring: &Coloring, edges: &EdgeSet) -> Result<MonoResult, StructureError> {
    if edges.arity != coloring.arity {
        return Err(StructureError::Coloring(ColoringError::ArityMismatch(
            vec![],
            edges.arity,
            coloring.arity,
        )));
    }
    let mut seen: Option<Color> = None;
    for edge in &edges.edges {
        let c = coloring.color(edge)?;
        match seen {
            None => seen = Some(c),
            Some(prev) if prev != c => return Ok(MonoResult::NotMono),
            _ => {}
        }
    }
    Ok(match seen {
        None => MonoResult::Any,
        Some(c) => MonoResult::Mono(c),
    })
}

/// Checks that every sequence in the product of `blocks` is proper;
/// reports the first offending choice.
pub fn all_products_proper(blocks: &[Vec<Elem>], sg: &Semigroup) -> Result<(), StructureError> {
    for block in blocks {
        if block.is_empty() {
            return Err(StructureError::EmptyBlock);
        }
    }
    let mut choice = vec![0usize; blocks.len()];
    loop {
        let seq: Vec<Elem> = blocks.iter().zip(&choice).map(|(b, &i)| b[i]).collect();
        match is_proper(&seq, sg).expect("indices in range") {
            Properness::Proper => {}
            Properness::Improper { .. } => return Err(StructureError::NotProper(seq)),
            Properness::NotCheckable { .. } => return Err(StructureError::NotCheckable(seq)),
        }
        // advance the mixed-radix counter
        let mut pos = 0;
        loop {
            if pos == blocks.len() {
                return Ok(());
            }
            choice[pos] += 1;
            if choice[pos] < blocks[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// All index sums over one chain element: every nonempty `H` within
/// `range`, one block choice per index, folded left to right.
pub fn block_sums(
    blocks: &[Vec<Elem>],
    range: std::ops::Range<usize>,
    sg: &Semigroup,
) -> Result<BTreeSet<Elem>, StructureError> {
    let indices: Vec<usize> = range.collect();
    let mut out = BTreeSet::new();
    for h in nonempty_subsets(&indices) {
        // fold over all choice functions on h
        let mut partial: Vec<Option<Elem>> = vec![None];
        for &i in &h {
            let mut next = Vec::new();
            for acc in &partial {
                for &x in &blocks[i] {
                    match acc {
                        None => next.push(Some(x)),
                        Some(a) => match sg.combine(*a, x) {
                            Some(v) => next.push(Some(v)),
                            None => return Err(StructureError::UndefinedSum),
                        },
                    }
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().flatten());
    }
    Ok(out)
}

/// Direct route: enumerate chains `H_1 < .. < H_m` of index sets over the
/// block positions, then every choice function on their union.
pub fn sumgraph_blocks_direct(
    blocks: &[Vec<Elem>],
    m: usize,
    sg: &Semigroup,
) -> Result<EdgeSet, StructureError> {
    let n = blocks.len();
    let mut out = EdgeSet::new(m);
    if m == 0 || m > n {
        return Ok(out);
    }
    // chains of m disjoint, block-ordered index sets over 0..n
    fn chains(start: usize, n: usize, m: usize) -> Vec<Vec<Vec<usize>>> {
        if m == 0 {
            return vec![vec![]];
        }
        let mut res = Vec::new();
        let base: Vec<usize> = (start..n).collect();
        for h in nonempty_subsets(&base) {
            let next_start = h.last().unwrap() + 1;
            for rest in chains(next_start, n, m - 1) {
                let mut chain = vec![h.clone()];
                chain.extend(rest);
                res.push(chain);
            }
        }
        res
    }
    for chain in chains(0, n, m) {
        // choice functions over the indices used by this chain
        let used: Vec<usize> = chain.iter().flatten().copied().collect();
        let mut assignments: Vec<Vec<(usize, Elem)>> = vec![vec![]];
        for &i in &used {
            let mut next = Vec::new();
            for a in &assignments {
                for &x in &blocks[i] {
                    let mut a2 = a.clone();
                    a2.push((i, x));
                    next.push(a2);
                }
            }
            assignments = next;
        }
        for a in assignments {
            let lookup = |i: usize| a.iter().find(|(j, _)| *j == i).unwrap().1;
            let mut edge = Vec::with_capacity(m);
            for h in &chain {
                let mut acc: Option<Elem> = None;
                for &i in h {
                    let x = lookup(i);
                    acc = match acc {
                        None => Some(x),
                        Some(v) => match sg.combine(v, x) {
                            Some(w) => Some(w),
                            None => return Err(StructureError::UndefinedSum),
                        },
                    };
                }
                edge.push(acc.unwrap());
            }
            out.insert(edge)?;
        }
    }
    Ok(out)
}

/// Recursive route: prefix tables composed with range block sums.
///
/// `SG^j` over a prefix splits every edge into a lower-arity part living
/// on a shorter prefix and one single sum over the remaining range,
/// mirroring how the round construction extends structures.
#[allow(clippy::needless_range_loop)] // two rows of the table are live at once
pub fn sumgraph_blocks_recursive(
    blocks: &[Vec<Elem>],
    m: usize,
    sg: &Semigroup,
) -> Result<EdgeSet, StructureError> {
    let n = blocks.len();
    let mut out = EdgeSet::new(m);
    if m == 0 || m > n {
        return Ok(out);
    }
    // range1[t][l] = single sums over block positions t..l, built by
    // splitting off the first block of the range
    let mut range1: Vec<Vec<BTreeSet<Elem>>> = vec![vec![BTreeSet::new(); n + 1]; n + 1];
    for t in (0..n).rev() {
        for l in t + 1..=n {
            let rest = range1[t + 1][l].clone();
            let mut s = rest.clone();
            for &x in &blocks[t] {
                s.insert(x);
                for &y in &rest {
                    match sg.combine(x, y) {
                        Some(v) => {
                            s.insert(v);
                        }
                        None => return Err(StructureError::UndefinedSum),
                    }
                }
            }
            range1[t][l] = s;
        }
    }
    // level[l] = SG^j over the prefix of length l, for the current j
    let mut level: Vec<BTreeSet<Vec<Elem>>> = (0..=n)
        .map(|l| range1[0][l].iter().map(|&v| vec![v]).collect())
        .collect();
    for j in 2..=m {
        let mut next = vec![BTreeSet::new(); n + 1];
        for (l, slot) in next.iter_mut().enumerate().take(n + 1).skip(j) {
            let mut edges: BTreeSet<Vec<Elem>> = BTreeSet::new();
            for t in (j - 1)..l {
                for e in &level[t] {
                    for &b in &range1[t][l] {
                        let mut edge = e.clone();
                        edge.push(b);
                        edge.sort_unstable();
                        edge.dedup();
                        if edge.len() != j {
                            return Err(StructureError::EdgeCollision(edge, j));
                        }
                        edges.insert(edge);
                    }
                }
            }
            *slot = edges;
        }
        level = next;
    }
    for edge in &level[n] {
        out.insert(edge.clone())?;
    }
    Ok(out)
}

fn singleton_blocks(seq: &[Elem]) -> Vec<Vec<Elem>> {
    seq.iter().map(|&a| vec![a]).collect()
}

/// The m-sumgraph of a proper sequence. Empty when `m` exceeds the
/// sequence length.
pub fn sumgraph(seq: &[Elem], m: usize, sg: &Semigroup) -> Result<EdgeSet, StructureError> {
    match is_proper(seq, sg).expect("indices in range") {
        Properness::Proper => {}
        Properness::Improper { .. } => return Err(StructureError::NotProper(seq.to_vec())),
        Properness::NotCheckable { .. } => return Err(StructureError::NotCheckable(seq.to_vec())),
    }
    sumgraph_blocks_direct(&singleton_blocks(seq), m, sg)
}

/// The partite m-sumgraph of a block sequence: the union of m-sumgraphs
/// over every choice sequence from the blocks.
pub fn partite_sumgraph(
    blocks: &[Vec<Elem>],
    m: usize,
    sg: &Semigroup,
) -> Result<EdgeSet, StructureError> {
    all_products_proper(blocks, sg)?;
    sumgraph_blocks_direct(blocks, m, sg)
}

/// Union of `SG^i` for `i <= m` (or `i < m` when `strict`), without the
/// properness precondition re-check of the public builders.
pub fn sumgraph_upto(
    blocks: &[Vec<Elem>],
    m: usize,
    strict: bool,
    sg: &Semigroup,
) -> Result<Vec<EdgeSet>, StructureError> {
    all_products_proper(blocks, sg)?;
    let top = if strict { m.saturating_sub(1) } else { m };
    (1..=top).map(|i| sumgraph_blocks_direct(blocks, i, sg)).collect()
}

/// The partite m-graph of pairwise disjoint blocks: one element chosen
/// from each of m block positions, no summing.
pub fn partite_graph(blocks: &[Vec<Elem>], m: usize) -> Result<EdgeSet, StructureError> {
    for block in blocks {
        if block.is_empty() {
            return Err(StructureError::EmptyBlock);
        }
    }
    for i in 0..blocks.len() {
        for j in (i + 1)..blocks.len() {
            if blocks[i].iter().any(|x| blocks[j].contains(x)) {
                return Err(StructureError::BlocksNotDisjoint(i, j));
            }
        }
    }
    let n = blocks.len();
    let mut out = EdgeSet::new(m);
    if m == 0 || m > n {
        return Ok(out);
    }
    let positions: Vec<usize> = (0..n).collect();
    for combo in combinations(&positions, m) {
        let mut edges: Vec<Vec<Elem>> = vec![vec![]];
        for &i in &combo {
            let mut next = Vec::new();
            for e in &edges {
                for &x in &blocks[i] {
                    let mut e2 = e.clone();
                    e2.push(x);
                    next.push(e2);
                }
            }
            edges = next;
        }
        for e in edges {
            out.insert(e)?;
        }
    }
    Ok(out)
}

fn combinations<T: Copy>(items: &[T], m: usize) -> Vec<Vec<T>> {
    if m == 0 {
        return vec![vec![]];
    }
    if items.len() < m {
        return vec![];
    }
    let mut res = Vec::new();
    for i in 0..=(items.len() - m) {
        for mut rest in combinations(&items[i + 1..], m - 1) {
            rest.insert(0, items[i]);
            res.push(rest);
        }
    }
    res
}

/// Parameters of an (m,p,c)-set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MpcParams {
    pub m: usize,
    pub p: u32,
    pub c: i64,
    pub x: Vec<i64>,
}

/// Row sums of an (m,p,c)-set. Coefficients range over |λ| <= p-1
/// including zero and negatives, so sums may leave the naturals; `valid`
/// records whether all of them are positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MpcSet {
    pub sums: BTreeSet<i64>,
    pub valid: bool,
}

pub fn mpc_set(params: &MpcParams) -> MpcSet {
    assert!(params.m >= 1 && params.p >= 1 && params.c >= 1);
    assert_eq!(params.x.len(), params.m);
    let lam_range: Vec<i64> = {
        let p = params.p as i64;
        (-(p - 1)..=(p - 1)).collect()
    };
    let mut sums = BTreeSet::new();
    for i in 0..params.m {
        // row i: c*x_i + sum_{j>i} lambda_j * x_j
        let mut partials = vec![params.c * params.x[i]];
        for &xj in &params.x[i + 1..] {
            let mut next = Vec::new();
            for s in &partials {
                for &l in &lam_range {
                    next.push(s + l * xj);
                }
            }
            partials = next;
        }
        sums.extend(partials);
    }
    let valid = sums.iter().all(|&s| s >= 1);
    MpcSet { sums, valid }
}

/// `{a, a+d, .., a+(len-1)d}`.
pub fn arithmetic_progression(a: Elem, d: Elem, len: usize) -> BTreeSet<Elem> {
    assert!(a >= 1 && d >= 1 && len >= 1);
    (0..len as Elem).map(|i| a + i * d).collect()
}
