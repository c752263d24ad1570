//! Offline certificate verification.
//!
//! The verifier re-derives everything by direct enumeration from the
//! certificate alone: no oracle, and no code shared with the builders in
//! the structures module. Properness of every product sequence and the
//! color of every edge of the claimed structure are checked from scratch.

use serde::{Deserialize, Serialize};

use crate::coloring::Coloring;
use crate::oracle::{check_log_laws, replay_is_deterministic};
use crate::semigroup::{Elem, Semigroup};

use super::certificate::{Certificate, Constraint, StructureKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub properness_failure: Option<String>,
    pub mono_failure: Option<String>,
    pub constraint_failure: Option<String>,
    pub laws_ok: bool,
    pub replay_ok: bool,
    pub edges_checked: usize,
    pub sequences_checked: usize,
}

impl VerifyReport {
    fn fail_properness(msg: String) -> Self {
        VerifyReport {
            pass: false,
            properness_failure: Some(msg),
            mono_failure: None,
            constraint_failure: None,
            laws_ok: false,
            replay_ok: false,
            edges_checked: 0,
            sequences_checked: 0,
        }
    }
}

/// Left-to-right fold of the operation over chosen values at the given
/// positions. `None` marks an undefined sum.
fn fold(seq: &[Elem], positions: &[usize], sg: &Semigroup) -> Option<Elem> {
    let mut acc: Option<Elem> = None;
    for &p in positions {
        let x = seq[p];
        acc = match acc {
            None => Some(x),
            Some(a) => Some(sg.combine(a, x)?),
        };
    }
    acc
}

/// All nonempty position subsets of `lo..hi` as sorted vectors.
fn position_subsets(lo: usize, hi: usize) -> Vec<Vec<usize>> {
    let width = hi - lo;
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << width) {
        let mut v = Vec::new();
        for (i, pos) in (lo..hi).enumerate() {
            if mask & (1 << i) != 0 {
                v.push(pos);
            }
        }
        out.push(v);
    }
    out
}

/// Every chain `H_1 < .. < H_m` of position subsets over `0..n`.
fn chains(n: usize, m: usize) -> Vec<Vec<Vec<usize>>> {
    fn go(start: usize, n: usize, m: usize) -> Vec<Vec<Vec<usize>>> {
        if m == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for h in position_subsets(start, n) {
            let next = h.last().unwrap() + 1;
            for rest in go(next, n, m - 1) {
                let mut chain = vec![h.clone()];
                chain.extend(rest);
                out.push(chain);
            }
        }
        out
    }
    go(0, n, m)
}

/// Walks every choice sequence from the blocks through `visit`;
/// stops early when `visit` returns an error message.
fn for_each_product<F>(blocks: &[Vec<Elem>], mut visit: F) -> Result<(usize, usize), String>
where
    F: FnMut(&[Elem]) -> Result<usize, String>,
{
    if blocks.iter().any(|b| b.is_empty()) {
        return Err("empty block".into());
    }
    let mut counters = vec![0usize; blocks.len()];
    let mut sequences = 0usize;
    let mut edges = 0usize;
    loop {
        let seq: Vec<Elem> = blocks.iter().zip(&counters).map(|(b, &i)| b[i]).collect();
        edges += visit(&seq)?;
        sequences += 1;
        let mut pos = 0;
        loop {
            if pos == blocks.len() {
                return Ok((sequences, edges));
            }
            counters[pos] += 1;
            if counters[pos] < blocks[pos].len() {
                break;
            }
            counters[pos] = 0;
            pos += 1;
        }
    }
}

/// Properness of one sequence: distinct folds over block-ordered pairs.
fn check_sequence_proper(seq: &[Elem], sg: &Semigroup) -> Result<(), String> {
    let n = seq.len();
    for split in 1..n {
        for h1 in position_subsets(0, split) {
            if *h1.last().unwrap() != split - 1 {
                continue;
            }
            let s1 = fold(seq, &h1, sg)
                .ok_or_else(|| format!("undefined sum at positions {:?} of {:?}", h1, seq))?;
            for h2 in position_subsets(split, n) {
                let s2 = fold(seq, &h2, sg)
                    .ok_or_else(|| format!("undefined sum at positions {:?} of {:?}", h2, seq))?;
                if s1 == s2 {
                    return Err(format!(
                        "properness fails in {:?}: positions {:?} and {:?} both sum to {}",
                        seq,
                        h1.iter().map(|p| p + 1).collect::<Vec<_>>(),
                        h2.iter().map(|p| p + 1).collect::<Vec<_>>(),
                        s1
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Checks the claimed color of every arity-m edge of one sequence.
fn check_sequence_edges(
    seq: &[Elem],
    m: usize,
    claimed: u32,
    coloring: &Coloring,
    sg: &Semigroup,
) -> Result<usize, String> {
    let mut edges = 0usize;
    for chain in chains(seq.len(), m) {
        let mut edge = Vec::with_capacity(m);
        for h in &chain {
            match fold(seq, h, sg) {
                Some(v) => edge.push(v),
                None => return Err(format!("undefined sum in edge chain {:?} of {:?}", chain, seq)),
            }
        }
        let mut sorted = edge.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != m {
            return Err(format!("edge {:?} of {:?} collapses", edge, seq));
        }
        let c = coloring
            .color(&sorted)
            .map_err(|e| format!("coloring rejects edge {:?}: {}", sorted, e))?;
        if c != claimed {
            return Err(format!(
                "edge {:?} of {:?} has color {}, claimed {}",
                sorted, seq, c, claimed
            ));
        }
        edges += 1;
    }
    Ok(edges)
}

/// The mapped block of one index set in the tilde structure: the round
/// block for singletons, the sub-products of the chosen elements
/// otherwise.
fn tilde_block(
    h: &[usize],
    blocks: &[Vec<Elem>],
    products: &[Elem],
    sg_mul: &Semigroup,
) -> Result<Vec<Elem>, String> {
    if h.len() == 1 {
        return Ok(blocks[h[0]].clone());
    }
    let mut out = Vec::new();
    for sub in position_subsets(0, h.len()) {
        let chosen: Vec<Elem> = sub.iter().map(|&i| products[h[i]]).collect();
        let mut acc: Option<Elem> = None;
        for &y in &chosen {
            acc = match acc {
                None => Some(y),
                Some(a) => match sg_mul.combine(a, y) {
                    Some(v) => Some(v),
                    None => {
                        return Err(format!(
                            "product of {:?} overflows the carrier",
                            chosen
                        ))
                    }
                },
            };
        }
        let v = acc.unwrap();
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn check_constraint(cert: &Certificate) -> Option<String> {
    let constraint = cert.constraint.as_ref()?;
    let blocks = &cert.blocks;
    for n in 1..blocks.len() {
        let prefix_max = blocks[..n].iter().flatten().copied().max().unwrap_or(0);
        match constraint {
            Constraint::Tail => {
                if let Some(&min) = blocks[n].iter().min() {
                    if min <= prefix_max {
                        return Some(format!(
                            "block {} starts at {} but the accumulated maximum is {}",
                            n + 1,
                            min,
                            prefix_max
                        ));
                    }
                }
            }
            Constraint::Sets { sets } => match sets.get(n) {
                Some(image) => {
                    if let Some(bad) = blocks[n].iter().find(|e| !image.contains(e)) {
                        return Some(format!(
                            "block {} element {} outside the round's constraint image",
                            n + 1,
                            bad
                        ));
                    }
                }
                None => return Some(format!("no constraint image for block {}", n + 1)),
            },
        }
    }
    None
}

/// Independently re-derives a certificate: properness of every product
/// sequence, the color of every edge of the claimed structure, the
/// constraint images, and the oracle laws over the embedded log.
pub fn verify_certificate(cert: &Certificate) -> VerifyReport {
    let sg = match cert.semigroup.build() {
        Ok(s) => s,
        Err(e) => return VerifyReport::fail_properness(format!("bad semigroup spec: {}", e)),
    };
    let coloring = match cert.coloring.build() {
        Ok(c) => c,
        Err(e) => return VerifyReport::fail_properness(format!("bad coloring spec: {}", e)),
    };
    let m = cert.arity;

    let mut properness_failure: Option<String> = None;
    let mut mono_failure: Option<String> = None;
    let mut sequences = 0usize;
    let mut edges = 0usize;

    // assemble the block lists to check: the claimed structure, plus the
    // member sets backing one-mode picks
    let mut block_lists: Vec<Vec<Vec<Elem>>> = Vec::new();
    match cert.kind {
        StructureKind::PartiteSumgraph | StructureKind::MSumgraph | StructureKind::PartiteGraph => {
            block_lists.push(cert.blocks.clone());
            if let Some(members) = &cert.member_sets {
                block_lists.push(members.clone());
            }
        }
        StructureKind::TildeSumgraph => {
            let products = cert.products.clone().unwrap_or_default();
            if products.len() != cert.blocks.len() {
                return VerifyReport::fail_properness(
                    "tilde certificate needs one product element per block".into(),
                );
            }
            let bound = match &sg {
                Semigroup::Naturals(n) => n.bound(),
                _ => {
                    return VerifyReport::fail_properness(
                        "tilde certificates live over bounded naturals".into(),
                    )
                }
            };
            let mul = Semigroup::naturals(bound, crate::semigroup::NatOp::Mul)
                .expect("bound validated");
            let n = cert.blocks.len();
            // every chain of index sets over the rounds maps to a block list
            for k in 1..=n {
                for chain in chains(n, k) {
                    let mut mapped = Vec::with_capacity(k);
                    let mut ok = true;
                    for h in &chain {
                        match tilde_block(h, &cert.blocks, &products, &mul) {
                            Ok(b) => mapped.push(b),
                            Err(e) => {
                                mono_failure = Some(e);
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok {
                        block_lists.push(mapped);
                    }
                }
            }
        }
    }

    if mono_failure.is_none() {
        'lists: for blocks in &block_lists {
            if blocks.is_empty() {
                continue;
            }
            let result = for_each_product(blocks, |seq| {
                check_sequence_proper(seq, &sg).map_err(|e| format!("P:{}", e))?;
                if matches!(cert.kind, StructureKind::PartiteGraph) {
                    // no sums: the edges are the choice tuples themselves
                    let mut edge: Vec<Elem> = seq.to_vec();
                    edge.sort_unstable();
                    edge.dedup();
                    if edge.len() != seq.len() {
                        return Err(format!("M:choice {:?} collapses", seq));
                    }
                    return Ok(0);
                }
                check_sequence_edges(seq, m, cert.claimed_color, &coloring, &sg)
                    .map_err(|e| format!("M:{}", e))
            });
            match result {
                Ok((s, e)) => {
                    sequences += s;
                    edges += e;
                }
                Err(msg) => {
                    if let Some(rest) = msg.strip_prefix("P:") {
                        properness_failure = Some(rest.to_string());
                    } else {
                        mono_failure =
                            Some(msg.strip_prefix("M:").unwrap_or(&msg).to_string());
                    }
                    break 'lists;
                }
            }
        }
    }

    let constraint_failure = check_constraint(cert);

    let universe = sg.universe_set();
    let law_report = check_log_laws(&cert.decision_log, &universe);
    let replay_ok = replay_is_deterministic(&cert.decision_log, &universe);

    VerifyReport {
        pass: properness_failure.is_none()
            && mono_failure.is_none()
            && constraint_failure.is_none(),
        properness_failure,
        mono_failure,
        constraint_failure,
        laws_ok: law_report.ok(),
        replay_ok,
        edges_checked: edges,
        sequences_checked: sequences,
    }
}
