//! Exhaustive witness searchers: fixed-coloring least witnesses, and
//! forced thresholds over all colorings of an initial segment.
//!
//! The all-colorings mode runs a pruned depth-first scan over color
//! assignments: a branch dies as soon as some target structure inside the
//! assigned prefix goes monochromatic. Structures are precomputed as item
//! lists indexed into the coloring domain (elements for arity 1, pairs
//! for arity 2), so one scan loop serves every kind. Shards over leading
//! assignments run in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{Color, Coloring};
use crate::semigroup::{Elem, NatOp, Semigroup};
use crate::structures::{mpc_set, MpcParams};

use super::certificate::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchKind {
    Schur,
    Vdw,
    MillikenTaylor,
    PartiteSumgraph,
    Mpc,
}

#[derive(Debug, Clone)]
pub struct SearchRequest {
    pub kind: SearchKind,
    /// Elements range over `1..=bound`.
    pub bound: Elem,
    pub colors: Color,
    /// Arity of the colored sets (Milliken-Taylor / partite kinds).
    pub arity: usize,
    /// Sequence length, progression length, or block count.
    pub len: usize,
    /// Block size for the partite kind.
    pub block_size: usize,
    /// (m, p, c) for the mpc kind.
    pub mpc: Option<(usize, u32, i64)>,
    /// Fixed coloring to search under; absent in all-colorings mode.
    pub coloring: Option<Coloring>,
    pub all_colorings: bool,
    pub max_states: u64,
}

impl SearchRequest {
    pub fn new(kind: SearchKind, bound: Elem, colors: Color) -> Self {
        SearchRequest {
            kind,
            bound,
            colors,
            arity: match kind {
                SearchKind::MillikenTaylor | SearchKind::PartiteSumgraph => 2,
                _ => 1,
            },
            len: match kind {
                SearchKind::Vdw => 3,
                SearchKind::Schur => 2,
                _ => 2,
            },
            block_size: 1,
            mpc: None,
            coloring: None,
            all_colorings: false,
            max_states: 1 << 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SearchOutcome {
    /// Least witness under the fixed coloring: the generating blocks and
    /// the common color of the target structure.
    Witness { witness: Vec<Vec<Elem>>, color: Color },
    NoWitness,
    /// Least bound whose every coloring admits a witness.
    ForcedThreshold { threshold: Elem },
    Unforced,
}

type FoundWitness = (Vec<Vec<Elem>>, Color);

/// The structures a coloring must avoid, as index lists into the domain.
/// Arity 1 indexes elements (`v-1`), arity 2 indexes ordered pairs.
struct DomainStructures {
    domain_size: usize,
    structures: Vec<Vec<usize>>,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    // lexicographic rank of {i<j} within pairs of 0..n
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Proper sequences of the given length with every partial sum in range,
/// visited in lexicographic order.
fn proper_sequences(bound: Elem, len: usize, sg: &Semigroup) -> Vec<Vec<Elem>> {
    let mut out = Vec::new();
    let mut seq = vec![1u64; len];
    loop {
        if crate::semigroup::is_proper(&seq, sg)
            .map(|p| p.is_proper())
            .unwrap_or(false)
            && crate::structures::block_sums(
                &seq.iter().map(|&a| vec![a]).collect::<Vec<_>>(),
                0..len,
                sg,
            )
            .is_ok()
        {
            out.push(seq.clone());
        }
        let mut pos = len;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            seq[pos] += 1;
            if seq[pos] <= bound {
                break;
            }
            seq[pos] = 1;
        }
    }
}

fn structures_for(req: &SearchRequest, bound: Elem) -> Result<DomainStructures, EngineError> {
    let n = bound as usize;
    let sg = Semigroup::naturals(bound, NatOp::Add)?;
    let mut structures: Vec<Vec<usize>> = Vec::new();
    let domain_size = match req.arity {
        1 => n,
        2 => n * (n - 1) / 2,
        other => return Err(EngineError::ArityUnsupported(other)),
    };
    match req.kind {
        SearchKind::Schur => {
            for a in 1..=bound {
                for b in (a + 1)..=bound {
                    let s = a + b;
                    if s <= bound {
                        structures.push(vec![a as usize - 1, b as usize - 1, s as usize - 1]);
                    }
                }
            }
        }
        SearchKind::Vdw => {
            let len = req.len.max(1) as Elem;
            for a in 1..=bound {
                for d in 1..=bound {
                    let last = a + (len - 1) * d;
                    if last > bound {
                        break;
                    }
                    structures
                        .push((0..len).map(|i| (a + i * d) as usize - 1).collect());
                }
            }
        }
        SearchKind::Mpc => {
            let (m, p, c) =
                req.mpc.ok_or_else(|| EngineError::Input("mpc parameters required".into()))?;
            let est = bound.saturating_pow(m as u32);
            if est > req.max_states {
                return Err(EngineError::Guard { estimate: est, limit: req.max_states });
            }
            let mut x = vec![1i64; m];
            loop {
                let set = mpc_set(&MpcParams { m, p, c, x: x.clone() });
                if set.valid && set.sums.iter().all(|&s| s >= 1 && s <= bound as i64) {
                    structures.push(set.sums.iter().map(|&s| s as usize - 1).collect());
                }
                let mut pos = m;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    x[pos] += 1;
                    if x[pos] <= bound as i64 {
                        break;
                    }
                    x[pos] = 1;
                }
                if x.iter().all(|&v| v == 1) {
                    break;
                }
            }
        }
        SearchKind::MillikenTaylor | SearchKind::PartiteSumgraph => {
            let len = req.len.max(req.arity);
            let est = bound.saturating_pow((len * req.block_size.max(1)) as u32);
            if est > req.max_states {
                return Err(EngineError::Guard { estimate: est, limit: req.max_states });
            }
            for seq in proper_sequences(bound, len, &sg) {
                let blocks: Vec<Vec<Elem>> = seq.iter().map(|&a| vec![a]).collect();
                match req.arity {
                    1 => {
                        let sums =
                            crate::structures::block_sums(&blocks, 0..blocks.len(), &sg)
                                .map_err(|_| EngineError::UndefinedSum { round: 0 })?;
                        if sums.iter().all(|&v| v <= bound) {
                            structures.push(sums.iter().map(|&v| v as usize - 1).collect());
                        }
                    }
                    2 => {
                        let edges =
                            crate::structures::sumgraph_blocks_direct(&blocks, 2, &sg);
                        if let Ok(es) = edges {
                            let mut items = Vec::new();
                            let mut ok = true;
                            for e in &es.edges {
                                let (i, j) = (e[0] as usize - 1, e[1] as usize - 1);
                                if j >= n {
                                    ok = false;
                                    break;
                                }
                                items.push(pair_index(n, i, j));
                            }
                            if ok && !items.is_empty() {
                                items.sort_unstable();
                                items.dedup();
                                structures.push(items);
                            }
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
    }
    Ok(DomainStructures { domain_size, structures })
}

/// Whether some k-coloring of the domain avoids every structure.
/// Pruned depth-first scan, sharded over the leading assignments.
fn avoider_exists(domain: usize, k: Color, structures: &[Vec<usize>]) -> bool {
    if domain == 0 {
        return structures.is_empty();
    }
    if structures.iter().any(|s| s.len() <= 1) {
        // a singleton structure is monochromatic under any coloring
        return false;
    }
    let mut by_last: Vec<Vec<usize>> = vec![Vec::new(); domain];
    for (si, s) in structures.iter().enumerate() {
        let last = *s.iter().max().unwrap();
        by_last[last].push(si);
    }

    fn dfs(
        colors: &mut Vec<Color>,
        domain: usize,
        k: Color,
        structures: &[Vec<usize>],
        by_last: &[Vec<usize>],
    ) -> bool {
        let i = colors.len();
        if i == domain {
            return true;
        }
        // color symmetry: the first item may fix color 1
        let choices: Color = if i == 0 { 1 } else { k };
        for c in 1..=choices {
            colors.push(c);
            let dead = by_last[i].iter().any(|&si| {
                let s = &structures[si];
                let c0 = colors[s[0]];
                s.iter().all(|&item| colors[item] == c0)
            });
            if !dead && dfs(colors, domain, k, structures, by_last) {
                return true;
            }
            colors.pop();
        }
        false
    }

    // shard over the first few items beyond the fixed one
    let mut prefix_len = 1usize;
    let mut shards: u64 = 1;
    while prefix_len < domain && shards * (k as u64) <= 256 {
        shards *= k as u64;
        prefix_len += 1;
    }
    (0..shards).into_par_iter().any(|code| {
        let mut colors: Vec<Color> = Vec::with_capacity(domain);
        colors.push(1);
        let mut rest = code;
        for _ in 1..prefix_len {
            colors.push(1 + (rest % k as u64) as Color);
            rest /= k as u64;
        }
        // reject shards whose prefix already completes a structure
        for (i, group) in by_last.iter().enumerate().take(colors.len()) {
            let _ = i;
            for &si in group {
                let s = &structures[si];
                let c0 = colors[s[0]];
                if s.iter().all(|&item| colors[item] == c0) {
                    return false;
                }
            }
        }
        dfs(&mut colors, domain, k, structures, &by_last)
    })
}

fn color_item(coloring: &Coloring, arity: usize, bound: Elem, item: usize) -> Result<Color, EngineError> {
    match arity {
        1 => Ok(coloring.color(&[item as Elem + 1])?),
        2 => {
            // invert the pair index
            let n = bound as usize;
            let mut i = 0usize;
            let mut base = 0usize;
            while base + (n - i - 1) <= item {
                base += n - i - 1;
                i += 1;
            }
            let j = i + 1 + (item - base);
            Ok(coloring.color(&[i as Elem + 1, j as Elem + 1])?)
        }
        other => Err(EngineError::ArityUnsupported(other)),
    }
}

fn witness_under(
    req: &SearchRequest,
    bound: Elem,
    coloring: &Coloring,
) -> Result<Option<FoundWitness>, EngineError> {
    if coloring.arity != req.arity {
        return Err(EngineError::Input(format!(
            "coloring arity {} does not match the search arity {}",
            coloring.arity, req.arity
        )));
    }
    let ds = structures_for(req, bound)?;
    for s in &ds.structures {
        let c0 = color_item(coloring, req.arity, bound, s[0])?;
        let mut mono = true;
        for &item in s.iter().skip(1) {
            if color_item(coloring, req.arity, bound, item)? != c0 {
                mono = false;
                break;
            }
        }
        if mono {
            let witness: Vec<Vec<Elem>> = match req.arity {
                1 => vec![s.iter().map(|&i| i as Elem + 1).collect()],
                _ => s
                    .iter()
                    .map(|&item| {
                        let n = bound as usize;
                        let mut i = 0usize;
                        let mut base = 0usize;
                        while base + (n - i - 1) <= item {
                            base += n - i - 1;
                            i += 1;
                        }
                        let j = i + 1 + (item - base);
                        vec![i as Elem + 1, j as Elem + 1]
                    })
                    .collect(),
            };
            return Ok(Some((witness, c0)));
        }
    }
    Ok(None)
}

/// Runs the requested search. With a fixed coloring the first (least)
/// monochromatic target structure is reported; in all-colorings mode the
/// scan finds the least initial segment forcing one.
pub fn search_witness(req: &SearchRequest) -> Result<SearchOutcome, EngineError> {
    if req.bound == 0 {
        return Err(EngineError::Input("bound must be positive".into()));
    }
    if req.all_colorings {
        let domain_estimate = match req.arity {
            1 => req.bound,
            _ => req.bound * req.bound,
        };
        let est = (req.colors as u64).saturating_pow(domain_estimate.min(200) as u32);
        if est > req.max_states {
            return Err(EngineError::Guard { estimate: est, limit: req.max_states });
        }
        for n in 1..=req.bound {
            let ds = structures_for(req, n)?;
            if ds.structures.is_empty() {
                continue;
            }
            if !avoider_exists(ds.domain_size, req.colors, &ds.structures) {
                return Ok(SearchOutcome::ForcedThreshold { threshold: n });
            }
        }
        Ok(SearchOutcome::Unforced)
    } else {
        let coloring = req
            .coloring
            .clone()
            .ok_or_else(|| EngineError::Input("fixed search needs a coloring".into()))?;
        match witness_under(req, req.bound, &coloring)? {
            Some((witness, color)) => Ok(SearchOutcome::Witness { witness, color }),
            None => Ok(SearchOutcome::NoWitness),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schur_forced_threshold_two_colors() {
        let mut req = SearchRequest::new(SearchKind::Schur, 12, 2);
        req.all_colorings = true;
        // pinned by the independent exhaustive scan over all 2^N colorings
        assert_eq!(
            search_witness(&req).unwrap(),
            SearchOutcome::ForcedThreshold { threshold: 9 }
        );
    }

    #[test]
    fn vdw_three_term_threshold_two_colors() {
        let mut req = SearchRequest::new(SearchKind::Vdw, 12, 2);
        req.len = 3;
        req.all_colorings = true;
        // pinned by the independent exhaustive scan
        assert_eq!(
            search_witness(&req).unwrap(),
            SearchOutcome::ForcedThreshold { threshold: 9 }
        );
    }

    #[test]
    fn constant_coloring_yields_least_witness() {
        let mut req = SearchRequest::new(SearchKind::Schur, 10, 1);
        req.coloring = Some(Coloring::constant(1));
        match search_witness(&req).unwrap() {
            SearchOutcome::Witness { witness, color } => {
                assert_eq!(witness, vec![vec![1, 2, 3]]);
                assert_eq!(color, 1);
            }
            other => panic!("expected witness, got {:?}", other),
        }
    }

    #[test]
    fn parity_avoids_small_schur() {
        // parity coloring of {1..8}: no a<b with {a,b,a+b} monochromatic
        // needs checking; a,b both even works: 2,4 -> 6 all even
        let mut req = SearchRequest::new(SearchKind::Schur, 8, 2);
        req.coloring = Some(Coloring::parity(1));
        match search_witness(&req).unwrap() {
            SearchOutcome::Witness { witness, .. } => {
                assert_eq!(witness, vec![vec![2, 4, 6]]);
            }
            other => panic!("expected witness, got {:?}", other),
        }
    }

    #[test]
    fn milliken_taylor_pairs_under_constant() {
        let mut req = SearchRequest::new(SearchKind::MillikenTaylor, 10, 1);
        req.arity = 2;
        req.len = 2;
        req.coloring = Some(Coloring::constant(2));
        match search_witness(&req).unwrap() {
            SearchOutcome::Witness { witness, .. } => {
                // first proper sequence is (1,2): single edge {1,2}
                assert_eq!(witness, vec![vec![1, 2]]);
            }
            other => panic!("expected witness, got {:?}", other),
        }
    }

    #[test]
    fn guard_refuses_oversized_scan() {
        let mut req = SearchRequest::new(SearchKind::Mpc, 100, 2);
        req.mpc = Some((5, 2, 1));
        req.coloring = Some(Coloring::constant(1));
        req.max_states = 1000;
        assert!(matches!(search_witness(&req), Err(EngineError::Guard { .. })));
    }

    #[test]
    fn unforced_when_bound_too_small() {
        let mut req = SearchRequest::new(SearchKind::Schur, 8, 2);
        req.all_colorings = true;
        assert_eq!(search_witness(&req).unwrap(), SearchOutcome::Unforced);
    }
}
