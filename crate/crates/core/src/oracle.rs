//! Membership oracles standing in for an idempotent ultrafilter.
//!
//! No finite object realizes a nonprincipal ultrafilter, so the oracle
//! maintains a *consistent fragment*: a growing list of sets asserted in
//! or out, with answers kept propositionally satisfiable (every finite
//! intersection of in-sets stays nonempty, out-answers commit the
//! complement). Correctness of anything built on top is established by
//! certificate verification, never by trusting the oracle.
//!
//! Three realizations:
//! - `Principal` at an idempotent element e: `A ∈ e` iff `e ∈ A`.
//! - `Scripted`: answers come from a decision list; replaying a log
//!   reproduces the run.
//! - `Backtracking`: greedy free choices (prefer the side that keeps the
//!   larger consistent core), deterministic under a seed, with rotation
//!   of tie-breaks across restart attempts.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::coloring::splitmix64;
use crate::semigroup::{Elem, Semigroup};
use crate::sets::SmallSet;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle exhausted at {label}: committing {set:?} contradicts prior decisions")]
    Exhausted { label: String, set: Vec<Elem> },
    #[error("scripted oracle has no entry for {0:?}")]
    ScriptMiss(Vec<Elem>),
    #[error("script answer for {0:?} contradicts forced consistency")]
    ScriptInconsistent(Vec<Elem>),
    #[error("queried set {0:?} leaves the universe")]
    OutOfUniverse(Vec<Elem>),
    #[error("no color class can consistently be committed for {label}")]
    NoConsistentClass { label: String },
    #[error("principal element {0} is not idempotent in this semigroup")]
    NotIdempotent(Elem),
    #[error("largeness violated: no member of the family fits inside {0:?}")]
    NotLarge(Vec<Elem>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    In,
    Out,
}

/// One recorded choice point. The optional partition id groups the
/// entries of a single partition query for the law checker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub set: Vec<Elem>,
    pub answer: Answer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<u32>,
}

/// Oracle realization.
#[derive(Debug, Clone)]
pub enum OracleKind {
    Principal { e: Elem },
    Scripted { answers: BTreeMap<Vec<Elem>, Answer> },
    Backtracking { seed: u64, attempt: u64 },
}

/// A consistency-maintaining membership oracle over a fixed universe.
#[derive(Debug, Clone)]
pub struct MembershipOracle {
    universe: SmallSet,
    /// Intersection of every committed in-set; nonempty is the invariant.
    core: SmallSet,
    committed_in: Vec<SmallSet>,
    committed_out: Vec<SmallSet>,
    log: Vec<Decision>,
    kind: OracleKind,
    partition_counter: u32,
    free_decisions: u64,
}

fn set_to_vec(s: &SmallSet) -> Vec<Elem> {
    s.iter().map(|i| i as Elem).collect()
}

pub fn set_of(universe: &SmallSet, elems: &[Elem]) -> SmallSet {
    SmallSet::from_iter(universe.capacity(), elems.iter().map(|&e| e as usize))
}

impl MembershipOracle {
    pub fn new(universe: SmallSet, kind: OracleKind) -> Self {
        let core = universe.clone();
        MembershipOracle {
            universe,
            core,
            committed_in: Vec::new(),
            committed_out: Vec::new(),
            log: Vec::new(),
            kind,
            partition_counter: 0,
            free_decisions: 0,
        }
    }

    /// Principal oracle at an idempotent of a total semigroup.
    pub fn principal(sg: &Semigroup, e: Elem) -> Result<Self, OracleError> {
        if sg.combine(e, e) != Some(e) {
            return Err(OracleError::NotIdempotent(e));
        }
        Ok(Self::new(sg.universe_set(), OracleKind::Principal { e }))
    }

    pub fn scripted(universe: SmallSet, script: &[Decision]) -> Self {
        let mut answers = BTreeMap::new();
        for d in script {
            let mut key = d.set.clone();
            key.sort_unstable();
            key.dedup();
            answers.entry(key).or_insert(d.answer);
        }
        Self::new(universe, OracleKind::Scripted { answers })
    }

    pub fn backtracking(universe: SmallSet, seed: u64, attempt: u64) -> Self {
        Self::new(universe, OracleKind::Backtracking { seed, attempt })
    }

    pub fn universe(&self) -> &SmallSet {
        &self.universe
    }

    /// The current consistent core: the intersection of all in-commitments.
    pub fn core(&self) -> &SmallSet {
        &self.core
    }

    pub fn committed_in(&self) -> &[SmallSet] {
        &self.committed_in
    }

    pub fn decision_log(&self) -> &[Decision] {
        &self.log
    }

    pub fn into_log(self) -> Vec<Decision> {
        self.log
    }

    fn record(&mut self, set: &SmallSet, answer: Answer, partition: Option<u32>) {
        self.log.push(Decision { set: set_to_vec(set), answer, partition });
        match answer {
            Answer::In => {
                self.core.intersect_with(set);
                self.committed_in.push(set.clone());
            }
            Answer::Out => {
                let comp = set.complement_in(&self.universe);
                self.core.intersect_with(&comp);
                self.committed_in.push(comp);
                self.committed_out.push(set.clone());
            }
        }
        debug_assert!(!self.core.is_empty(), "consistency invariant broken");
    }

    /// Answer already forced by the commitments, if any.
    fn forced(&self, set: &SmallSet) -> Option<Answer> {
        if self.core.is_subset(set) {
            Some(Answer::In)
        } else if self.core.is_disjoint(set) {
            Some(Answer::Out)
        } else {
            None
        }
    }

    fn backtracking_bit(&mut self, seed: u64, attempt: u64) -> bool {
        let d = self.free_decisions;
        self.free_decisions += 1;
        if attempt == 0 {
            return false;
        }
        splitmix64(seed ^ splitmix64(attempt) ^ splitmix64(d.wrapping_mul(0x517c_c1b7)))
            & 1
            == 1
    }

    /// Consistent membership answer for `set`; the answer is recorded and
    /// later queries must agree.
    pub fn query(&mut self, set: &SmallSet) -> Result<Answer, OracleError> {
        if !set.is_subset(&self.universe) {
            return Err(OracleError::OutOfUniverse(set_to_vec(set)));
        }
        if let Some(a) = self.forced(set) {
            self.record(set, a, None);
            return Ok(a);
        }
        let answer = match &self.kind {
            OracleKind::Principal { e } => {
                if set.contains(*e as usize) {
                    Answer::In
                } else {
                    Answer::Out
                }
            }
            OracleKind::Scripted { answers } => {
                let key = set_to_vec(set);
                *answers.get(&key).ok_or(OracleError::ScriptMiss(key))?
            }
            OracleKind::Backtracking { seed, attempt } => {
                let (seed, attempt) = (*seed, *attempt);
                let inside = self.core.intersection(set).len();
                let outside = self.core.len() - inside;
                let prefer_in = match inside.cmp(&outside) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => {
                        // tie: smaller minimum element goes in
                        let min_in = self.core.intersection(set).min();
                        let min_out = self.core.difference(set).min();
                        min_in <= min_out
                    }
                };
                if self.backtracking_bit(seed, attempt) {
                    if prefer_in {
                        Answer::Out
                    } else {
                        Answer::In
                    }
                } else if prefer_in {
                    Answer::In
                } else {
                    Answer::Out
                }
            }
        };
        self.record(set, answer, None);
        Ok(answer)
    }

    /// Demands `set ∈ e`; fails with the labeled commitment when the
    /// demand contradicts prior decisions.
    pub fn require_in(&mut self, set: &SmallSet, label: &str) -> Result<(), OracleError> {
        if !set.is_subset(&self.universe) {
            return Err(OracleError::OutOfUniverse(set_to_vec(set)));
        }
        match self.forced(set) {
            Some(Answer::In) => {
                self.record(set, Answer::In, None);
                Ok(())
            }
            Some(Answer::Out) => {
                Err(OracleError::Exhausted { label: label.to_string(), set: set_to_vec(set) })
            }
            None => match &self.kind {
                OracleKind::Principal { e } => {
                    if set.contains(*e as usize) {
                        self.record(set, Answer::In, None);
                        Ok(())
                    } else {
                        Err(OracleError::Exhausted {
                            label: label.to_string(),
                            set: set_to_vec(set),
                        })
                    }
                }
                OracleKind::Scripted { answers } => {
                    let key = set_to_vec(set);
                    match answers.get(&key) {
                        Some(Answer::In) => {
                            self.record(set, Answer::In, None);
                            Ok(())
                        }
                        Some(Answer::Out) => Err(OracleError::Exhausted {
                            label: label.to_string(),
                            set: key,
                        }),
                        None => Err(OracleError::ScriptMiss(key)),
                    }
                }
                OracleKind::Backtracking { .. } => {
                    self.record(set, Answer::In, None);
                    Ok(())
                }
            },
        }
    }

    /// Partition query: given pairwise disjoint parts, commits exactly one
    /// part in and the rest out. Returns the index of the chosen part.
    pub fn query_partition(
        &mut self,
        parts: &[SmallSet],
        label: &str,
    ) -> Result<usize, OracleError> {
        for (i, p) in parts.iter().enumerate() {
            if !p.is_subset(&self.universe) {
                return Err(OracleError::OutOfUniverse(set_to_vec(p)));
            }
            for q in &parts[i + 1..] {
                if !p.is_disjoint(q) {
                    return Err(OracleError::NoConsistentClass {
                        label: format!("{label}: parts overlap"),
                    });
                }
            }
        }
        let forced_in: Vec<usize> = parts
            .iter()
            .enumerate()
            .filter(|(_, p)| self.forced(p) == Some(Answer::In))
            .map(|(i, _)| i)
            .collect();
        let consistent: Vec<usize> = parts
            .iter()
            .enumerate()
            .filter(|(_, p)| self.forced(p) != Some(Answer::Out))
            .map(|(i, _)| i)
            .collect();
        let chosen = if let Some(&i) = forced_in.first() {
            i
        } else if consistent.is_empty() {
            return Err(OracleError::NoConsistentClass { label: label.to_string() });
        } else {
            match &self.kind {
                OracleKind::Principal { e } => {
                    match parts.iter().position(|p| p.contains(*e as usize)) {
                        Some(i) => i,
                        None => {
                            return Err(OracleError::NoConsistentClass {
                                label: label.to_string(),
                            })
                        }
                    }
                }
                OracleKind::Scripted { answers } => {
                    let mut found = None;
                    for &i in &consistent {
                        let key = set_to_vec(&parts[i]);
                        if answers.get(&key) == Some(&Answer::In) {
                            found = Some(i);
                            break;
                        }
                    }
                    found.ok_or(OracleError::NoConsistentClass { label: label.to_string() })?
                }
                OracleKind::Backtracking { seed, attempt } => {
                    let (seed, attempt) = (*seed, *attempt);
                    // rank: larger core overlap first, then smaller minimum
                    let mut ranked: Vec<usize> = consistent.clone();
                    ranked.sort_by_key(|&i| {
                        let inter = self.core.intersection(&parts[i]);
                        (std::cmp::Reverse(inter.len()), inter.min().unwrap_or(usize::MAX))
                    });
                    let d = self.free_decisions;
                    self.free_decisions += 1;
                    let shift = if attempt == 0 {
                        0
                    } else {
                        (splitmix64(seed ^ splitmix64(attempt) ^ splitmix64(d)) as usize)
                            % ranked.len()
                    };
                    ranked[shift]
                }
            }
        };
        if self.forced(&parts[chosen]) == Some(Answer::Out) {
            return Err(OracleError::NoConsistentClass { label: label.to_string() });
        }
        let group = self.partition_counter;
        self.partition_counter += 1;
        self.log.push(Decision {
            set: set_to_vec(&parts[chosen]),
            answer: Answer::In,
            partition: Some(group),
        });
        self.core.intersect_with(&parts[chosen]);
        self.committed_in.push(parts[chosen].clone());
        for (i, p) in parts.iter().enumerate() {
            if i == chosen {
                continue;
            }
            self.log.push(Decision { set: set_to_vec(p), answer: Answer::Out, partition: Some(group) });
            let comp = p.complement_in(&self.universe);
            self.core.intersect_with(&comp);
            self.committed_in.push(comp);
            self.committed_out.push(p.clone());
        }
        debug_assert!(!self.core.is_empty());
        Ok(chosen)
    }
}

/// Star operator: a witness `B ∈ e` with `B ⊆ D`, and the committed set
/// `D★ = {b ∈ D : b + B ⊆ D}`. Candidates for `B` are drawn from the
/// in-commitments restricted to `D` (largest first, then the full core);
/// the first candidate whose `D★` can be committed wins.
pub fn star(
    oracle: &mut MembershipOracle,
    d: &SmallSet,
    sg: &Semigroup,
) -> Result<(SmallSet, SmallSet), OracleError> {
    oracle.require_in(d, "star precondition D")?;
    if let OracleKind::Principal { e } = &oracle.kind {
        let e = *e;
        let b = SmallSet::from_iter(oracle.universe.capacity(), [e as usize]);
        let d_star = translates_into(d, &b, d, sg);
        oracle.require_in(&b, "star witness {e}")?;
        oracle.require_in(&d_star, "star D*")?;
        return Ok((d_star, b));
    }
    let mut candidates: Vec<SmallSet> = Vec::new();
    for c in &oracle.committed_in {
        let inside = c.intersection(d);
        if !inside.is_empty() && !candidates.contains(&inside) {
            candidates.push(inside);
        }
    }
    let core_in = oracle.core.intersection(d);
    if !core_in.is_empty() && !candidates.contains(&core_in) {
        candidates.push(core_in);
    }
    candidates.sort_by_key(|c| std::cmp::Reverse(c.len()));
    for b in candidates {
        let d_star = translates_into(d, &b, d, sg);
        if d_star.is_empty() || oracle.core.is_disjoint(&d_star) || oracle.core.is_disjoint(&b) {
            continue;
        }
        oracle.require_in(&b, "star witness B")?;
        oracle.require_in(&d_star, "star D*")?;
        return Ok((d_star, b));
    }
    Err(OracleError::Exhausted { label: "star witness".into(), set: set_to_vec(d) })
}

/// `{b ∈ from : b + shift ⊆ target}`, undefined sums excluded.
pub fn translates_into(
    from: &SmallSet,
    shift: &SmallSet,
    target: &SmallSet,
    sg: &Semigroup,
) -> SmallSet {
    let mut out = SmallSet::empty(from.capacity());
    'next: for b in from.iter() {
        for x in shift.iter() {
            match sg.combine(b as Elem, x as Elem) {
                Some(v) if target.contains(v as usize) => {}
                _ => continue 'next,
            }
        }
        out.insert(b);
    }
    out
}

/// Greedy maximal pairwise-disjoint subfamily of `family` inside `d`,
/// first-fit in canonical order; its union is committed in.
pub fn disjointify(
    oracle: &mut MembershipOracle,
    family: &[Vec<Elem>],
    d: &SmallSet,
) -> Result<Vec<Vec<Elem>>, OracleError> {
    let mut members: Vec<Vec<Elem>> = family
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.sort_unstable();
            r.dedup();
            r
        })
        .collect();
    members.sort();
    members.dedup();
    let mut chosen: Vec<Vec<Elem>> = Vec::new();
    let mut union = SmallSet::empty(d.capacity());
    for r in members {
        if r.is_empty() {
            continue;
        }
        let rs = set_of(&oracle.universe, &r);
        if rs.is_subset(d) && rs.is_disjoint(&union) {
            union.union_with(&rs);
            chosen.push(r);
        }
    }
    if chosen.is_empty() {
        return Err(OracleError::NotLarge(set_to_vec(d)));
    }
    oracle.require_in(&union, "disjointified union")?;
    Ok(chosen)
}

/// Largeness of the oracle's commitments for a family: every committed
/// in-set contains a member of the family.
pub fn is_large_for(oracle: &MembershipOracle, family: &[Vec<Elem>]) -> bool {
    oracle.committed_in.iter().all(|c| {
        family.iter().any(|r| {
            !r.is_empty() && r.iter().all(|&e| c.contains(e as usize))
        })
    })
}

/// Violations found by the decision-log law checker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawReport {
    pub complement_violations: Vec<(Vec<Elem>, Vec<Elem>)>,
    pub upward_violations: Vec<(Vec<Elem>, Vec<Elem>)>,
    pub partition_violations: Vec<u32>,
}

impl LawReport {
    pub fn ok(&self) -> bool {
        self.complement_violations.is_empty()
            && self.upward_violations.is_empty()
            && self.partition_violations.is_empty()
    }
}

/// Checks complement law, upward closure and partition regularity over a
/// recorded decision log.
pub fn check_log_laws(log: &[Decision], universe: &SmallSet) -> LawReport {
    let mut report = LawReport {
        complement_violations: Vec::new(),
        upward_violations: Vec::new(),
        partition_violations: Vec::new(),
    };
    let sets: Vec<(SmallSet, Answer)> = log
        .iter()
        .map(|d| (set_of(universe, &d.set), d.answer))
        .collect();
    for (i, (a, ans_a)) in sets.iter().enumerate() {
        for (b, ans_b) in sets.iter().skip(i + 1) {
            // complement law: complementary sets answer oppositely
            if a.union(b) == *universe && a.is_disjoint(b) && ans_a == ans_b {
                report
                    .complement_violations
                    .push((set_to_vec(a), set_to_vec(b)));
            }
        }
    }
    for (a, ans_a) in &sets {
        if *ans_a != Answer::In {
            continue;
        }
        for (b, ans_b) in &sets {
            if a.is_subset(b) && *ans_b == Answer::Out {
                report.upward_violations.push((set_to_vec(a), set_to_vec(b)));
            }
        }
    }
    let mut groups: BTreeMap<u32, usize> = BTreeMap::new();
    for d in log {
        if let Some(g) = d.partition {
            if d.answer == Answer::In {
                *groups.entry(g).or_insert(0) += 1;
            } else {
                groups.entry(g).or_insert(0);
            }
        }
    }
    for (g, ins) in groups {
        if ins != 1 {
            report.partition_violations.push(g);
        }
    }
    report
}

/// Replays a log through a scripted oracle and checks that every answer
/// reproduces exactly.
pub fn replay_is_deterministic(log: &[Decision], universe: &SmallSet) -> bool {
    let mut oracle = MembershipOracle::scripted(universe.clone(), log);
    for d in log {
        let s = set_of(universe, &d.set);
        match oracle.query(&s) {
            Ok(a) if a == d.answer => {}
            _ => return false,
        }
    }
    true
}
