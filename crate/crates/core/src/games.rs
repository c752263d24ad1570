//! Finite-horizon selection games, selection principles, cover and
//! superfilter predicates, and the index-set lift of a base oracle.
//!
//! Games are solved exactly by backward induction, memoized on
//! (round, collected set) since the target only depends on what Bob has
//! accumulated. Selection checks quantify over all non-adaptive move
//! sequences. Cover notions take finite-scale parameters: the classical
//! definitions are vacuous or trivial on finite spaces, so ω-covers get a
//! subset-size `s`, γ- and large covers a threshold `t`.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

use crate::coloring::Coloring;
use crate::oracle::{Answer, MembershipOracle, OracleError};
use crate::semigroup::{index_sum, Elem, IndexSet, Semigroup};
use crate::sets::SmallSet;

#[derive(Debug, Error)]
pub enum GamesError {
    #[error("guard rail exceeded: estimated {estimate} nodes, limit {limit}")]
    Guard { estimate: u64, limit: u64 },
    #[error("bad system: {0}")]
    BadSystem(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    G1,
    GFin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winner {
    Alice,
    Bob,
}

/// Flags computed by [`cover_predicates`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverFlags {
    pub is_cover: bool,
    pub is_omega: bool,
    pub is_gamma: bool,
    pub is_large: bool,
    pub is_ascending: bool,
}

/// Finite-scale cover predicates over an explicit point space.
///
/// - cover: nonempty proper subsets whose union is the space;
/// - ω(s): members are nonempty proper subsets and every nonempty subset
///   of the space of size at most `s` lies inside some member (so for
///   s >= 1 an ω(s) family is a cover);
/// - γ(t): every point is outside at most `t` members;
/// - large(t): every point is inside at least `t` members;
/// - ascending: some strictly increasing chain of members unions to the
///   space. Finitely that forces the chain's top to be the whole space,
///   so the properness demand of the cover notion is waived here.
pub fn cover_predicates(space: &SmallSet, family: &[SmallSet], s: usize, t: usize) -> CoverFlags {
    let mut union = SmallSet::empty(space.capacity());
    for f in family {
        union.union_with(f);
    }
    let members_proper =
        !family.is_empty() && family.iter().all(|f| !f.is_empty() && f.is_subset(space) && *f != *space);
    let is_cover = members_proper && union == *space;

    let points: Vec<usize> = space.iter().collect();
    let mut is_omega = members_proper;
    if is_omega {
        'subsets: for mask in 1u64..(1u64 << points.len().min(62)) {
            if (mask.count_ones() as usize) > s {
                continue;
            }
            let subset: Vec<usize> = points
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &p)| p)
                .collect();
            for f in family {
                if subset.iter().all(|&p| f.contains(p)) {
                    continue 'subsets;
                }
            }
            is_omega = false;
            break;
        }
    }

    let mut is_gamma = true;
    let mut is_large = true;
    for &p in &points {
        let inside = family.iter().filter(|f| f.contains(p)).count();
        let outside = family.len() - inside;
        if outside > t {
            is_gamma = false;
        }
        if inside < t {
            is_large = false;
        }
    }

    let has_top = family.iter().any(|f| f == space);
    let has_lower = family.iter().any(|f| f.is_subset(space) && *f != *space && !f.is_empty());
    let is_ascending = has_top && has_lower && union == *space;

    CoverFlags { is_cover, is_omega, is_gamma, is_large, is_ascending }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverFlagKind {
    Cover,
    Omega,
    Gamma,
    Large,
    Ascending,
}

/// Target family for a selection game, evaluated on the set Bob collected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    /// Exact membership in a listed family.
    List(Vec<SmallSet>),
    /// Upward closure: the collected set contains some listed set.
    UpClosure(Vec<SmallSet>),
    /// The collected universe tokens, read through their extents, satisfy
    /// a cover predicate over a point space.
    CoverPred { flag: CoverFlagKind, s: usize, t: usize, space: SmallSet, extents: Vec<SmallSet> },
}

impl Target {
    pub fn satisfied(&self, collected: &SmallSet) -> bool {
        match self {
            Target::List(sets) => sets.iter().any(|s| s == collected),
            Target::UpClosure(sets) => sets.iter().any(|s| s.is_subset(collected)),
            Target::CoverPred { flag, s, t, space, extents } => {
                let family: Vec<SmallSet> =
                    collected.iter().map(|i| extents[i].clone()).collect();
                let flags = cover_predicates(space, &family, *s, *t);
                match flag {
                    CoverFlagKind::Cover => flags.is_cover,
                    CoverFlagKind::Omega => flags.is_omega,
                    CoverFlagKind::Gamma => flags.is_gamma,
                    CoverFlagKind::Large => flags.is_large,
                    CoverFlagKind::Ascending => flags.is_ascending,
                }
            }
        }
    }
}

/// A set system: Alice's per-round menus of nonempty sets over a finite
/// universe, plus the target family. A single menu is reused every round.
#[derive(Debug, Clone)]
pub struct GameSystem {
    pub universe: Vec<Elem>,
    pub menus: Vec<Vec<SmallSet>>,
    pub target: Target,
}

impl GameSystem {
    pub fn capacity(&self) -> usize {
        self.universe.iter().map(|&e| e as usize + 1).max().unwrap_or(1)
    }

    fn menu_at(&self, round: usize) -> Result<&[SmallSet], GamesError> {
        if self.menus.len() == 1 {
            Ok(&self.menus[0])
        } else {
            self.menus
                .get(round)
                .map(|m| m.as_slice())
                .ok_or_else(|| GamesError::BadSystem(format!("no menu for round {}", round)))
        }
    }

    fn validate(&self, horizon: usize) -> Result<(), GamesError> {
        if self.menus.is_empty() {
            return Err(GamesError::BadSystem("no menus".into()));
        }
        if self.menus.len() != 1 && self.menus.len() < horizon {
            return Err(GamesError::BadSystem(format!(
                "{} menus for horizon {}",
                self.menus.len(),
                horizon
            )));
        }
        for menu in &self.menus {
            if menu.is_empty() {
                return Err(GamesError::BadSystem("empty menu".into()));
            }
            for set in menu {
                if set.is_empty() {
                    return Err(GamesError::BadSystem("menu set must be nonempty".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GameSpec {
    pub kind: GameKind,
    pub horizon: usize,
    pub system: GameSystem,
}

/// One strategy entry at a reachable position.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyMove {
    pub round: usize,
    pub collected: Vec<Elem>,
    /// Index of Alice's menu set. For an Alice strategy this is her move;
    /// for a Bob strategy it is the move he is answering.
    pub alice_move: usize,
    /// Bob's reply (absent in Alice strategies).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<Vec<Elem>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Strategy {
    pub player: Winner,
    pub moves: Vec<StrategyMove>,
}

#[derive(Debug, Clone)]
pub struct GameOutcome {
    pub winner: Winner,
    pub strategy: Strategy,
    pub states_explored: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct GuardRails {
    pub max_nodes: u64,
}

impl Default for GuardRails {
    fn default() -> Self {
        GuardRails { max_nodes: 1 << 22 }
    }
}

fn set_key(s: &SmallSet) -> Vec<Elem> {
    s.iter().map(|i| i as Elem).collect()
}

fn replies(kind: GameKind, alice_set: &SmallSet) -> Vec<SmallSet> {
    match kind {
        GameKind::G1 => alice_set
            .iter()
            .map(|p| SmallSet::from_iter(alice_set.capacity(), [p]))
            .collect(),
        GameKind::GFin => {
            let elems: Vec<usize> = alice_set.iter().collect();
            (0u64..(1 << elems.len()))
                .map(|mask| {
                    SmallSet::from_iter(
                        alice_set.capacity(),
                        elems
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask & (1 << i) != 0)
                            .map(|(_, &p)| p),
                    )
                })
                .collect()
        }
    }
}

struct Solver<'a> {
    spec: &'a GameSpec,
    memo: HashMap<(usize, Vec<Elem>), bool>,
}

impl Solver<'_> {
    fn bob_wins(&mut self, round: usize, collected: &SmallSet) -> Result<bool, GamesError> {
        if round == self.spec.horizon {
            return Ok(self.spec.system.target.satisfied(collected));
        }
        let key = (round, set_key(collected));
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let menu = self.spec.system.menu_at(round)?.to_vec();
        let mut bob_wins_here = true;
        for alice_set in &menu {
            let mut reply_wins = false;
            for reply in replies(self.spec.kind, alice_set) {
                let next = collected.union(&reply);
                if self.bob_wins(round + 1, &next)? {
                    reply_wins = true;
                    break;
                }
            }
            if !reply_wins {
                bob_wins_here = false;
                break;
            }
        }
        self.memo.insert(key, bob_wins_here);
        Ok(bob_wins_here)
    }
}

/// Exact backward-induction solve. Finite games are determined, so
/// exactly one player wins; a positional witnessing strategy is returned.
pub fn solve_game(spec: &GameSpec, guard: &GuardRails) -> Result<GameOutcome, GamesError> {
    spec.system.validate(spec.horizon)?;
    let max_menu = spec.system.menus.iter().map(|m| m.len()).max().unwrap_or(0) as u64;
    let max_set = spec
        .system
        .menus
        .iter()
        .flat_map(|m| m.iter().map(|s| s.len()))
        .max()
        .unwrap_or(0);
    let reply_factor = match spec.kind {
        GameKind::G1 => max_set as u64,
        GameKind::GFin => 1u64 << max_set.min(62),
    };
    let universe_bits = spec.system.universe.len().min(62);
    let estimate = (spec.horizon as u64 + 1)
        .saturating_mul(1u64 << universe_bits)
        .saturating_mul(max_menu)
        .saturating_mul(reply_factor);
    if estimate > guard.max_nodes {
        return Err(GamesError::Guard { estimate, limit: guard.max_nodes });
    }

    let mut solver = Solver { spec, memo: HashMap::new() };
    let empty = SmallSet::empty(spec.system.capacity());
    let bob = solver.bob_wins(0, &empty)?;
    let winner = if bob { Winner::Bob } else { Winner::Alice };

    // extract a positional strategy for the winner
    let mut moves: Vec<StrategyMove> = Vec::new();
    let mut frontier = vec![(0usize, empty)];
    while let Some((round, collected)) = frontier.pop() {
        if round == spec.horizon {
            continue;
        }
        let menu = spec.system.menu_at(round)?.to_vec();
        match winner {
            Winner::Bob => {
                for (ai, alice_set) in menu.iter().enumerate() {
                    if moves.iter().any(|m| {
                        m.round == round
                            && m.collected == set_key(&collected)
                            && m.alice_move == ai
                    }) {
                        continue;
                    }
                    let mut chosen = None;
                    for reply in replies(spec.kind, alice_set) {
                        let next = collected.union(&reply);
                        if solver.bob_wins(round + 1, &next)? {
                            chosen = Some((reply, next));
                            break;
                        }
                    }
                    let (reply, next) =
                        chosen.expect("winning reply exists at a Bob-winning node");
                    moves.push(StrategyMove {
                        round,
                        collected: set_key(&collected),
                        alice_move: ai,
                        reply: Some(set_key(&reply)),
                    });
                    frontier.push((round + 1, next));
                }
            }
            Winner::Alice => {
                if moves
                    .iter()
                    .any(|m| m.round == round && m.collected == set_key(&collected))
                {
                    continue;
                }
                let mut pick = None;
                for (ai, alice_set) in menu.iter().enumerate() {
                    let mut all_lose = true;
                    for reply in replies(spec.kind, alice_set) {
                        let next = collected.union(&reply);
                        if solver.bob_wins(round + 1, &next)? {
                            all_lose = false;
                            break;
                        }
                    }
                    if all_lose {
                        pick = Some(ai);
                        break;
                    }
                }
                let ai = pick.expect("losing move exists at an Alice-winning node");
                moves.push(StrategyMove {
                    round,
                    collected: set_key(&collected),
                    alice_move: ai,
                    reply: None,
                });
                for reply in replies(spec.kind, &menu[ai]) {
                    frontier.push((round + 1, collected.union(&reply)));
                }
            }
        }
    }
    let states = solver.memo.len();
    Ok(GameOutcome { winner, strategy: Strategy { player: winner, moves }, states_explored: states })
}

fn selection_choices(set: &SmallSet, one: bool) -> Vec<SmallSet> {
    if one {
        replies(GameKind::G1, set)
    } else {
        replies(GameKind::GFin, set)
    }
}

fn exists_selection(
    seq: &[SmallSet],
    idx: usize,
    collected: &SmallSet,
    one: bool,
    target: &Target,
) -> bool {
    if idx == seq.len() {
        return target.satisfied(collected);
    }
    selection_choices(&seq[idx], one)
        .iter()
        .any(|c| exists_selection(seq, idx + 1, &collected.union(c), one, target))
}

/// Non-adaptive selection check: for every length-T sequence of menu sets
/// (repetitions included) there is a selection landing in the target.
fn selection_check(
    system: &GameSystem,
    horizon: usize,
    one: bool,
    guard: &GuardRails,
) -> Result<bool, GamesError> {
    system.validate(horizon)?;
    let mut menus: Vec<&[SmallSet]> = Vec::with_capacity(horizon);
    for r in 0..horizon {
        menus.push(system.menu_at(r)?);
    }
    let seq_count: u64 = menus.iter().map(|m| m.len() as u64).product();
    let max_set = menus.iter().flat_map(|m| m.iter().map(|s| s.len())).max().unwrap_or(0);
    let reply_factor = if one { max_set as u64 } else { 1u64 << max_set.min(62) };
    let estimate = seq_count.saturating_mul(reply_factor.saturating_pow(horizon as u32));
    if estimate > guard.max_nodes {
        return Err(GamesError::Guard { estimate, limit: guard.max_nodes });
    }

    let empty = SmallSet::empty(system.capacity());
    let mut counters = vec![0usize; horizon];
    loop {
        let seq: Vec<SmallSet> = counters
            .iter()
            .enumerate()
            .map(|(r, &i)| menus[r][i].clone())
            .collect();
        if !exists_selection(&seq, 0, &empty, one, &system.target) {
            return Ok(false);
        }
        let mut pos = 0;
        loop {
            if pos == horizon {
                return Ok(true);
            }
            counters[pos] += 1;
            if counters[pos] < menus[pos].len() {
                break;
            }
            counters[pos] = 0;
            pos += 1;
        }
    }
}

pub fn sfin_check(
    system: &GameSystem,
    horizon: usize,
    guard: &GuardRails,
) -> Result<bool, GamesError> {
    selection_check(system, horizon, false, guard)
}

pub fn sone_check(
    system: &GameSystem,
    horizon: usize,
    guard: &GuardRails,
) -> Result<bool, GamesError> {
    selection_check(system, horizon, true, guard)
}

/// Flags computed by [`superfilter_predicates`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperfilterFlags {
    pub is_superfilter: bool,
    pub is_translation_invariant: bool,
    pub is_idempotent_superfilter: bool,
}

/// Direct checks of the three superfilter definitions over a total
/// semigroup carrier, exhaustive over subsets.
pub fn superfilter_predicates(sg: &Semigroup, family: &[Vec<Elem>]) -> SuperfilterFlags {
    let n = sg.card();
    assert!(n <= 16, "superfilter checks enumerate all subsets; carrier too large");
    let elems = sg.elements();
    let to_mask = |set: &[Elem]| -> u32 {
        let mut m = 0u32;
        for e in set {
            if let Some(pos) = elems.iter().position(|x| x == e) {
                m |= 1 << pos;
            }
        }
        m
    };
    let members: Vec<u32> = family.iter().map(|s| to_mask(s)).collect();
    let fam_contains = |m: u32| members.contains(&m);
    let full: u32 = ((1u64 << n) - 1) as u32;

    let nonempty_members = !members.is_empty() && members.iter().all(|&m| m != 0);

    let mut upward = true;
    'up: for &a in &members {
        let mut b = a;
        loop {
            if !fam_contains(b) {
                upward = false;
                break 'up;
            }
            if b == full {
                break;
            }
            b = (b + 1) | a;
        }
    }

    let mut splitting = true;
    'split: for x in 0..=full {
        for y in 0..=full {
            if fam_contains(x | y) && !fam_contains(x) && !fam_contains(y) {
                splitting = false;
                break 'split;
            }
        }
    }
    let is_superfilter = nonempty_members && upward && splitting;

    let translate = |s: Elem, m: u32| -> Option<u32> {
        let mut out = 0u32;
        for (i, &a) in elems.iter().enumerate() {
            if m & (1 << i) != 0 {
                let v = sg.combine(s, a)?;
                let pos = elems.iter().position(|&x| x == v)?;
                out |= 1 << pos;
            }
        }
        Some(out)
    };
    let mut ti = true;
    'ti: for &s in &elems {
        for &a in &members {
            match translate(s, a) {
                Some(m) if fam_contains(m) => {}
                _ => {
                    ti = false;
                    break 'ti;
                }
            }
        }
    }

    // idempotent: whenever {b : some C in F has b+C inside A} is in F,
    // A itself is in F
    let mut idem = true;
    for a in 0..=full {
        let mut b_a = 0u32;
        for (bi, &b) in elems.iter().enumerate() {
            let witness = members.iter().any(|&c| {
                c != 0
                    && match translate(b, c) {
                        Some(shifted) => shifted & !a == 0,
                        None => false,
                    }
            });
            if witness {
                b_a |= 1 << bi;
            }
        }
        if fam_contains(b_a) && !fam_contains(a) {
            idem = false;
            break;
        }
    }

    SuperfilterFlags {
        is_superfilter,
        is_translation_invariant: ti,
        is_idempotent_superfilter: idem,
    }
}

/// Exhaustively enumerates every superfilter on the carrier by filtering
/// all families of nonempty subsets.
pub fn enumerate_superfilters(sg: &Semigroup) -> Vec<Vec<Vec<Elem>>> {
    let n = sg.card();
    assert!(n <= 4, "superfilter enumeration walks 2^(2^n - 1) families");
    let elems = sg.elements();
    let subsets: Vec<u32> = (1..(1u32 << n)).collect();
    let mut out = Vec::new();
    for fam_mask in 1u64..(1u64 << subsets.len()) {
        let members: Vec<Vec<Elem>> = subsets
            .iter()
            .enumerate()
            .filter(|(i, _)| fam_mask & (1 << i) != 0)
            .map(|(_, &m)| (0..n).filter(|&i| m & (1 << i) != 0).map(|i| elems[i]).collect())
            .collect();
        let flags = superfilter_predicates(sg, &members);
        if flags.is_superfilter {
            out.push(members);
        }
    }
    out
}

/// The lift of a base oracle along a sequence: membership for a family of
/// index sets, answered through finitely many base queries on the images
/// `{a_F : F in the family, min F > n}`. Index sets whose sums are
/// undefined in a bounded carrier contribute nothing to the image.
pub fn lift_query(
    base: &mut MembershipOracle,
    seq: &[Elem],
    sg: &Semigroup,
    family: &[IndexSet],
) -> Result<Answer, GamesError> {
    if family.is_empty() {
        return Ok(Answer::Out);
    }
    let bound = family.iter().map(|f| f.min_index()).max().unwrap_or(1);
    for n in 0..bound {
        let mut image = SmallSet::empty(base.universe().capacity());
        for f in family {
            if f.min_index() > n {
                if let Some(v) = index_sum(seq, f, sg)
                    .map_err(|e| GamesError::BadSystem(format!("bad index set: {}", e)))?
                {
                    image.insert(v as usize);
                }
            }
        }
        if image.is_empty() {
            return Ok(Answer::Out);
        }
        if base.query(&image)? == Answer::Out {
            return Ok(Answer::Out);
        }
    }
    Ok(Answer::In)
}

/// Lifts a family over the carrier to a family over index sets: each
/// member becomes its full preimage under `F -> a_F` over the nonempty
/// index sets of `1..=len(seq)`. Members not fully realized are dropped.
pub fn lift_family(family: &[Vec<Elem>], seq: &[Elem], sg: &Semigroup) -> Vec<Vec<IndexSet>> {
    let positions: Vec<usize> = (1..=seq.len()).collect();
    let all_index_sets: Vec<IndexSet> = crate::sets::nonempty_subsets(&positions)
        .map(|v| IndexSet::new(v).expect("nonempty"))
        .collect();
    let mut out = Vec::new();
    for r in family {
        let mut preimage = Vec::new();
        let mut realized: Vec<Elem> = Vec::new();
        for f in &all_index_sets {
            if let Ok(Some(v)) = index_sum(seq, f, sg) {
                if r.contains(&v) {
                    preimage.push(f.clone());
                    if !realized.contains(&v) {
                        realized.push(v);
                    }
                }
            }
        }
        if realized.len() == r.len() && !preimage.is_empty() {
            out.push(preimage);
        }
    }
    out
}

/// The refinement coloring of a cover decomposition: token sets
/// `U ∩ W_n`, pairs from a common block colored 1, others 2.
#[derive(Debug, Clone)]
pub struct RefinedCover {
    /// Distinct refined sets, indexed by token id.
    pub tokens: Vec<SmallSet>,
    /// Token ids per decomposition block.
    pub blocks: Vec<Vec<usize>>,
    /// 2-coloring of token-id pairs.
    pub coloring: Coloring,
}

pub fn coloring_from_cover(
    decomposition: &[Vec<SmallSet>],
    windows: &[SmallSet],
) -> Result<RefinedCover, GamesError> {
    if decomposition.len() != windows.len() {
        return Err(GamesError::BadSystem("decomposition and window counts differ".into()));
    }
    let mut tokens: Vec<SmallSet> = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (us, w) in decomposition.iter().zip(windows) {
        let mut block = Vec::new();
        for u in us {
            let refined = u.intersection(w);
            if refined.is_empty() {
                continue;
            }
            let id = match tokens.iter().position(|t| *t == refined) {
                Some(i) => i,
                None => {
                    tokens.push(refined);
                    tokens.len() - 1
                }
            };
            if !block.contains(&id) {
                block.push(id);
            }
        }
        blocks.push(block);
    }
    let mut entries = Vec::new();
    for i in 0..tokens.len() {
        for j in (i + 1)..tokens.len() {
            let same_block = blocks.iter().any(|b| b.contains(&i) && b.contains(&j));
            entries.push((vec![i as Elem, j as Elem], if same_block { 1 } else { 2 }));
        }
    }
    let coloring =
        Coloring::explicit(2, 2, entries).map_err(|e| GamesError::BadSystem(e.to_string()))?;
    Ok(RefinedCover { tokens, blocks, coloring })
}

/// Wire format for set systems.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub universe: Vec<Elem>,
    pub families: Vec<Vec<Vec<Elem>>>,
    pub target: TargetFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetFile {
    List { sets: Vec<Vec<Elem>> },
    Upclosure { sets: Vec<Vec<Elem>> },
    Cover { space: Vec<Elem>, extents: Vec<Vec<Elem>> },
    Omega {
        space: Vec<Elem>,
        extents: Vec<Vec<Elem>>,
        #[serde(default = "default_s")]
        s: usize,
    },
    Gamma {
        space: Vec<Elem>,
        extents: Vec<Vec<Elem>>,
        #[serde(default = "default_t")]
        t: usize,
    },
    Large {
        space: Vec<Elem>,
        extents: Vec<Vec<Elem>>,
        #[serde(default = "default_t")]
        t: usize,
    },
    Ascending { space: Vec<Elem>, extents: Vec<Vec<Elem>> },
}

fn default_s() -> usize {
    2
}

fn default_t() -> usize {
    1
}

impl SystemFile {
    pub fn build(&self) -> Result<GameSystem, GamesError> {
        let capacity = self.universe.iter().map(|&e| e as usize + 1).max().unwrap_or(1);
        let to_set = |v: &Vec<Elem>| -> Result<SmallSet, GamesError> {
            for e in v {
                if !self.universe.contains(e) {
                    return Err(GamesError::BadSystem(format!(
                        "element {} not in the universe",
                        e
                    )));
                }
            }
            Ok(SmallSet::from_iter(capacity, v.iter().map(|&e| e as usize)))
        };
        let menus = self
            .families
            .iter()
            .map(|fam| fam.iter().map(&to_set).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let space_and_extents = |space: &Vec<Elem>,
                                 extents: &Vec<Vec<Elem>>|
         -> Result<(SmallSet, Vec<SmallSet>), GamesError> {
            if extents.len() != self.universe.len() {
                return Err(GamesError::BadSystem("one extent per universe token required".into()));
            }
            let space_cap = space.iter().map(|&e| e as usize + 1).max().unwrap_or(1);
            let sp = SmallSet::from_iter(space_cap, space.iter().map(|&e| e as usize));
            let mut ext = vec![SmallSet::empty(space_cap); capacity];
            for (tok, e) in self.universe.iter().zip(extents) {
                ext[*tok as usize] = SmallSet::from_iter(space_cap, e.iter().map(|&p| p as usize));
            }
            Ok((sp, ext))
        };
        let target = match &self.target {
            TargetFile::List { sets } => {
                Target::List(sets.iter().map(&to_set).collect::<Result<Vec<_>, _>>()?)
            }
            TargetFile::Upclosure { sets } => {
                Target::UpClosure(sets.iter().map(&to_set).collect::<Result<Vec<_>, _>>()?)
            }
            TargetFile::Cover { space, extents } => {
                let (sp, ext) = space_and_extents(space, extents)?;
                Target::CoverPred { flag: CoverFlagKind::Cover, s: 2, t: 1, space: sp, extents: ext }
            }
            TargetFile::Omega { space, extents, s } => {
                let (sp, ext) = space_and_extents(space, extents)?;
                Target::CoverPred { flag: CoverFlagKind::Omega, s: *s, t: 1, space: sp, extents: ext }
            }
            TargetFile::Gamma { space, extents, t } => {
                let (sp, ext) = space_and_extents(space, extents)?;
                Target::CoverPred { flag: CoverFlagKind::Gamma, s: 2, t: *t, space: sp, extents: ext }
            }
            TargetFile::Large { space, extents, t } => {
                let (sp, ext) = space_and_extents(space, extents)?;
                Target::CoverPred { flag: CoverFlagKind::Large, s: 2, t: *t, space: sp, extents: ext }
            }
            TargetFile::Ascending { space, extents } => {
                let (sp, ext) = space_and_extents(space, extents)?;
                Target::CoverPred {
                    flag: CoverFlagKind::Ascending,
                    s: 2,
                    t: 1,
                    space: sp,
                    extents: ext,
                }
            }
        };
        Ok(GameSystem { universe: self.universe.clone(), menus, target })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Decision;
    use crate::semigroup::{max_semigroup, NatOp};

    fn sys(universe: &[Elem], menu: &[&[Elem]], target: Target) -> GameSystem {
        let cap = universe.iter().map(|&e| e as usize + 1).max().unwrap_or(1);
        GameSystem {
            universe: universe.to_vec(),
            menus: vec![menu
                .iter()
                .map(|s| SmallSet::from_iter(cap, s.iter().map(|&e| e as usize)))
                .collect()],
            target,
        }
    }

    fn exact(cap: usize, sets: &[&[Elem]]) -> Target {
        Target::List(
            sets.iter()
                .map(|s| SmallSet::from_iter(cap, s.iter().map(|&e| e as usize)))
                .collect(),
        )
    }

    fn up(cap: usize, sets: &[&[Elem]]) -> Target {
        Target::UpClosure(
            sets.iter()
                .map(|s| SmallSet::from_iter(cap, s.iter().map(|&e| e as usize)))
                .collect(),
        )
    }

    #[test]
    fn bob_wins_single_pick() {
        let system = sys(&[1, 2], &[&[1, 2]], up(3, &[&[1]]));
        let spec = GameSpec { kind: GameKind::G1, horizon: 1, system };
        let out = solve_game(&spec, &GuardRails::default()).unwrap();
        assert_eq!(out.winner, Winner::Bob);
        let mv = &out.strategy.moves[0];
        assert_eq!(mv.reply.as_deref(), Some(&[1][..]));
    }

    #[test]
    fn alice_wins_by_repeating() {
        // menu {{1},{2}} reused, target exactly {1,2}: Alice plays {1}
        // twice and Bob can only ever collect inside {1}
        let system = sys(&[1, 2], &[&[1], &[2]], exact(3, &[&[1, 2]]));
        let spec = GameSpec { kind: GameKind::G1, horizon: 2, system };
        let out = solve_game(&spec, &GuardRails::default()).unwrap();
        assert_eq!(out.winner, Winner::Alice);
    }

    #[test]
    fn guard_rail_refuses() {
        let universe: Vec<Elem> = (0..40).collect();
        let menu: Vec<SmallSet> = vec![SmallSet::from_iter(40, 0..30)];
        let system = GameSystem { universe, menus: vec![menu], target: Target::List(vec![]) };
        let spec = GameSpec { kind: GameKind::GFin, horizon: 3, system };
        assert!(matches!(
            solve_game(&spec, &GuardRails { max_nodes: 1000 }),
            Err(GamesError::Guard { .. })
        ));
    }

    #[test]
    fn selection_checks() {
        // target: every nonempty subset -> trivially true
        let all_nonempty: Vec<&[Elem]> = vec![&[1], &[2], &[1, 2]];
        let system = sys(&[1, 2], &[&[1], &[2]], exact(3, &all_nonempty));
        assert!(sfin_check(&system, 2, &GuardRails::default()).unwrap());

        // empty target family -> false
        let system = sys(&[1, 2], &[&[1], &[2]], exact(3, &[]));
        assert!(!sfin_check(&system, 1, &GuardRails::default()).unwrap());

        // the repeated sequence ({1},{1}) has no selection reaching {1,2}
        let system = sys(&[1, 2], &[&[1], &[2]], exact(3, &[&[1, 2]]));
        assert!(!sone_check(&system, 2, &GuardRails::default()).unwrap());
    }

    #[test]
    fn selection_gap_instance() {
        // target {{1,3},{2},{3}} over menu {{1,2},{3}}: every non-adaptive
        // sequence completes, but adaptive Alice wins the game.
        let menu: Vec<&[Elem]> = vec![&[1, 2], &[3]];
        let target = exact(4, &[&[1, 3], &[2], &[3]]);
        let system = sys(&[1, 2, 3], &menu, target);
        assert!(sone_check(&system, 2, &GuardRails::default()).unwrap());
        let spec = GameSpec { kind: GameKind::G1, horizon: 2, system };
        let out = solve_game(&spec, &GuardRails::default()).unwrap();
        assert_eq!(out.winner, Winner::Alice);
    }

    #[test]
    fn cover_predicate_examples() {
        let space = SmallSet::from_iter(4, [1, 2, 3]);
        let family = vec![
            SmallSet::from_iter(4, [1, 2]),
            SmallSet::from_iter(4, [2, 3]),
            SmallSet::from_iter(4, [1, 3]),
        ];
        let flags = cover_predicates(&space, &family, 2, 1);
        assert!(flags.is_cover);
        assert!(flags.is_omega);
        assert!(flags.is_gamma); // each point misses exactly one member
        assert!(!flags.is_ascending);
        let flags3 = cover_predicates(&space, &family, 3, 2);
        assert!(!flags3.is_omega); // {1,2,3} fits in no proper member
        assert!(flags3.is_large); // each point lies in exactly 2
        let flags4 = cover_predicates(&space, &family, 2, 3);
        assert!(!flags4.is_large);
    }

    #[test]
    fn gamma_implies_large_complement() {
        let space = SmallSet::from_iter(5, [1, 2, 3, 4]);
        let family = vec![
            SmallSet::from_iter(5, [1, 2, 3]),
            SmallSet::from_iter(5, [2, 3, 4]),
            SmallSet::from_iter(5, [1, 3, 4]),
            SmallSet::from_iter(5, [1, 2, 4]),
        ];
        for t in 0..=family.len() {
            let f = cover_predicates(&space, &family, 2, t);
            if f.is_gamma {
                let f2 = cover_predicates(&space, &family, 2, family.len() - t);
                assert!(f2.is_large);
            }
        }
    }

    #[test]
    fn ascending_needs_a_top() {
        let space = SmallSet::from_iter(4, [1, 2, 3]);
        let family = vec![SmallSet::from_iter(4, [1]), SmallSet::from_iter(4, [1, 2, 3])];
        assert!(cover_predicates(&space, &family, 2, 1).is_ascending);
        let family = vec![SmallSet::from_iter(4, [1, 2]), SmallSet::from_iter(4, [2, 3])];
        assert!(!cover_predicates(&space, &family, 2, 1).is_ascending);
    }

    #[test]
    fn superfilters_on_two_points_under_max() {
        let sg = max_semigroup(2);
        let sfs = enumerate_superfilters(&sg);
        assert_eq!(sfs.len(), 3);
        // every superfilter here is idempotent; translation-invariance
        // holds exactly when the generating points are upward closed in
        // the order (so not for the one generated by the bottom element)
        let mut ti_count = 0;
        for f in &sfs {
            let flags = superfilter_predicates(&sg, f);
            assert!(flags.is_superfilter);
            assert!(flags.is_idempotent_superfilter);
            if flags.is_translation_invariant {
                ti_count += 1;
            } else {
                assert!(f.contains(&vec![0]), "only the bottom-generated one may fail");
            }
        }
        assert_eq!(ti_count, 2);
    }

    #[test]
    fn translation_invariant_superfilters_are_idempotent() {
        for n in 1..=3 {
            let sg = max_semigroup(n);
            for f in enumerate_superfilters(&sg) {
                let flags = superfilter_predicates(&sg, f.as_slice());
                if flags.is_translation_invariant {
                    assert!(flags.is_idempotent_superfilter);
                }
            }
        }
    }

    #[test]
    fn splitting_failure_detected() {
        let sg = max_semigroup(2);
        // {{0,1}} alone: 0 and 1 split it but neither part belongs
        let flags = superfilter_predicates(&sg, &[vec![0, 1]]);
        assert!(!flags.is_superfilter);
        // full powerset minus the empty set: a superfilter
        let flags = superfilter_predicates(&sg, &[vec![0], vec![1], vec![0, 1]]);
        assert!(flags.is_superfilter);
    }

    #[test]
    fn lift_examples() {
        let sg = Semigroup::naturals(64, NatOp::Add).unwrap();
        let seq: Vec<Elem> = vec![2, 4, 8, 16];
        let universe = sg.universe_set();
        // scripted base oracle committing every FS tail image
        let mut script = Vec::new();
        for n in 0..seq.len() {
            let mut tail = Vec::new();
            let positions: Vec<usize> = (n + 1..=seq.len()).collect();
            for sub in crate::sets::nonempty_subsets(&positions) {
                let f = IndexSet::new(sub).unwrap();
                if let Ok(Some(v)) = index_sum(&seq, &f, &sg) {
                    tail.push(v);
                }
            }
            tail.sort_unstable();
            tail.dedup();
            script.push(Decision { set: tail, answer: Answer::In, partition: None });
        }
        let mut base = MembershipOracle::scripted(universe, &script);

        // family of all index sets with min > 1: lifted answer is in
        let positions: Vec<usize> = (2..=4).collect();
        let family: Vec<IndexSet> = crate::sets::nonempty_subsets(&positions)
            .map(|v| IndexSet::new(v).unwrap())
            .collect();
        assert_eq!(lift_query(&mut base, &seq, &sg, &family).unwrap(), Answer::In);
        assert_eq!(lift_query(&mut base, &seq, &sg, &[]).unwrap(), Answer::Out);
    }

    #[test]
    fn lift_family_preimages() {
        let sg = Semigroup::naturals(64, NatOp::Add).unwrap();
        let seq: Vec<Elem> = vec![2, 4, 8];
        // {6, 12} is realized: 6 = 2+4, 12 = 4+8
        let lifted = lift_family(&[vec![6, 12], vec![5]], &seq, &sg);
        assert_eq!(lifted.len(), 1);
        let pre = &lifted[0];
        assert!(pre.contains(&IndexSet::new(vec![1, 2]).unwrap()));
        assert!(pre.contains(&IndexSet::new(vec![2, 3]).unwrap()));
        assert_eq!(pre.len(), 2);
    }

    #[test]
    fn refinement_coloring() {
        let w1 = SmallSet::from_iter(6, [1, 2]);
        let w2 = SmallSet::from_iter(6, [3, 4, 5]);
        let u1 = vec![SmallSet::from_iter(6, [1, 2, 3]), SmallSet::from_iter(6, [2, 4])];
        let u2 = vec![SmallSet::from_iter(6, [3, 4, 5]), SmallSet::from_iter(6, [1, 4])];
        let refined = coloring_from_cover(&[u1, u2], &[w1, w2]).unwrap();
        assert_eq!(refined.blocks.len(), 2);
        let b0 = &refined.blocks[0];
        let b1 = &refined.blocks[1];
        // same-block pairs get color 1, cross-block pairs color 2
        if b0.len() >= 2 {
            assert_eq!(refined.coloring.color(&[b0[0] as Elem, b0[1] as Elem]).unwrap(), 1);
        }
        let cross = b1.iter().find(|id| !b0.contains(id)).unwrap();
        assert_eq!(refined.coloring.color(&[b0[0] as Elem, *cross as Elem]).unwrap(), 2);
    }

    #[test]
    fn cover_target_game() {
        // tokens 0,1,2 with extents over a 3-point space; Bob must
        // collect tokens whose extents form a cover
        let space: Vec<Elem> = vec![0, 1, 2];
        let extents = [vec![0, 1], vec![1, 2], vec![0, 2]];
        let ext_sets: Vec<SmallSet> = extents
            .iter()
            .map(|e| SmallSet::from_iter(3, e.iter().map(|&p| p as usize)))
            .collect();
        let system = GameSystem {
            universe: vec![0, 1, 2],
            menus: vec![vec![SmallSet::from_iter(3, [0, 1, 2])]],
            target: Target::CoverPred {
                flag: CoverFlagKind::Cover,
                s: 2,
                t: 1,
                space: SmallSet::from_iter(3, space.iter().map(|&p| p as usize)),
                extents: ext_sets,
            },
        };
        // gfin: Bob grabs tokens 0 and 1, whose extents cover the space
        let spec = GameSpec { kind: GameKind::GFin, horizon: 1, system: system.clone() };
        let out = solve_game(&spec, &GuardRails::default()).unwrap();
        assert_eq!(out.winner, Winner::Bob);
        // a single g1 pick never covers: every extent misses a point
        let spec = GameSpec { kind: GameKind::G1, horizon: 1, system };
        let out = solve_game(&spec, &GuardRails::default()).unwrap();
        assert_eq!(out.winner, Winner::Alice);
    }

    #[test]
    fn refinement_mono_selections_stay_in_one_block() {
        // three windows, refined family per window: a selection of one
        // token per round whose pairs are all color 1 must come from a
        // single refined block, whose union misses part of the space
        let space = SmallSet::from_iter(10, 1..=9);
        let windows = vec![
            SmallSet::from_iter(10, [1, 2, 3]),
            SmallSet::from_iter(10, [4, 5, 6]),
            SmallSet::from_iter(10, [7, 8, 9]),
        ];
        let decomposition: Vec<Vec<SmallSet>> = windows
            .iter()
            .map(|w| {
                let pts: Vec<usize> = w.iter().collect();
                vec![
                    SmallSet::from_iter(10, [pts[0], pts[1]]),
                    SmallSet::from_iter(10, [pts[1], pts[2]]),
                    SmallSet::from_iter(10, [pts[0], pts[2]]),
                ]
            })
            .collect();
        let refined = coloring_from_cover(&decomposition, &windows).unwrap();
        assert_eq!(refined.blocks.len(), 3);
        // every choice of one token per block
        for &a in &refined.blocks[0] {
            for &b in &refined.blocks[1] {
                for &c in &refined.blocks[2] {
                    let mono1 = [(a, b), (a, c), (b, c)].iter().all(|&(x, y)| {
                        refined.coloring.color(&[x as Elem, y as Elem]).unwrap() == 1
                    });
                    if mono1 {
                        let one_block = refined
                            .blocks
                            .iter()
                            .any(|blk| blk.contains(&a) && blk.contains(&b) && blk.contains(&c));
                        assert!(one_block);
                        // and a single block never covers the space
                        let mut union = SmallSet::empty(10);
                        for &t in &[a, b, c] {
                            union.union_with(&refined.tokens[t]);
                        }
                        assert!(union != space);
                    }
                }
            }
        }
    }

    #[test]
    fn system_file_roundtrip() {
        let json = r#"{
            "universe": [1, 2, 3],
            "families": [[[1, 2], [3]]],
            "target": {"kind": "upclosure", "sets": [[1], [3]]}
        }"#;
        let file: SystemFile = serde_json::from_str(json).unwrap();
        let system = file.build().unwrap();
        let spec = GameSpec { kind: GameKind::GFin, horizon: 2, system };
        let out = solve_game(&spec, &GuardRails::default()).unwrap();
        assert_eq!(out.winner, Winner::Bob);
    }
}
