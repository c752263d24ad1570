//! The round construction: colorings induced through the oracle, the
//! G(F) intersection sets, and the engine loop that emits certificates.
//!
//! Arity 1 runs through the arity-2 code path with the degenerate
//! constant pair coloring: its G(F) intersections reduce to excluding
//! previously generated sums, which is exactly the properness bookkeeping
//! the conclusions need. The monochromatic demand for arity 1 comes from
//! drawing every block inside the committed color class.

use crate::coloring::{Color, Coloring};
use crate::oracle::{
    disjointify, set_of, MembershipOracle, OracleError,
};
use crate::semigroup::{Elem, Semigroup};
use crate::sets::SmallSet;
use crate::structures::{block_sums, StructureError};

use super::certificate::{
    BobPolicy, Certificate, Constraint, EngineConfig, EngineError, EngineMode, FamilySequence,
    OracleSpec, StructureKind, CERTIFICATE_VERSION,
};
use crate::coloring::ColoringFile;
use crate::semigroup::SemigroupSpec;

/// `{x ∈ domain : v + x ∈ target for every v ∈ left}`; undefined sums
/// disqualify x. Left multiplication respects noncommutative carriers.
pub(crate) fn left_translates_into(
    left: &SmallSet,
    domain: &SmallSet,
    target: &SmallSet,
    sg: &Semigroup,
) -> SmallSet {
    let mut out = SmallSet::empty(domain.capacity());
    'next: for x in domain.iter() {
        for v in left.iter() {
            match sg.combine(v as Elem, x as Elem) {
                Some(r) if target.contains(r as usize) => {}
                _ => continue 'next,
            }
        }
        out.insert(x);
    }
    out
}

/// The star set used by the rounds: elements of `d` with at least one
/// translate of `d` staying inside `d`. This is the pointwise reading of
/// the star operator, the witness being found per element.
pub(crate) fn star_set(d: &SmallSet, sg: &Semigroup) -> SmallSet {
    let elems: Vec<usize> = d.iter().collect();
    let mut out = SmallSet::empty(d.capacity());
    'outer: for &b in &elems {
        for &x in &elems {
            if let Some(v) = sg.combine(b as Elem, x as Elem) {
                if d.contains(v as usize) {
                    out.insert(b);
                    continue 'outer;
                }
            }
        }
    }
    out
}

/// The color class of a set `A` under the oracle: the unique color whose
/// extension class `{s ∈ S∖A : χ(A ∪ {s}) = c}` is committed in.
pub fn induced_color(
    coloring: &Coloring,
    a: &[Elem],
    oracle: &mut MembershipOracle,
    sg: &Semigroup,
) -> Result<Color, EngineError> {
    let k = coloring.colors();
    if k == 1 {
        // the single class is everything off A; no query needed
        return Ok(1);
    }
    let universe = sg.universe_set();
    let mut classes: Vec<SmallSet> = (0..k).map(|_| SmallSet::empty(universe.capacity())).collect();
    for s in universe.iter() {
        let s = s as Elem;
        if a.contains(&s) {
            continue;
        }
        let mut edge = a.to_vec();
        edge.push(s);
        let c = coloring.color(&edge)?;
        classes[(c - 1) as usize].insert(s as usize);
    }
    let label = format!("color classes of {:?}", a);
    let idx = oracle.query_partition(&classes, &label)?;
    Ok((idx + 1) as Color)
}

/// Materializes the induced colorings `χ_{m-1}, .., χ_1` over the whole
/// carrier. Feasible for small scripted or principal setups; the engine
/// itself works lazily through [`g_of`] instead.
pub fn induce_colorings(
    coloring: &Coloring,
    oracle: &mut MembershipOracle,
    sg: &Semigroup,
) -> Result<Vec<Coloring>, EngineError> {
    let m = coloring.arity;
    if m < 2 {
        return Err(EngineError::Input("induction needs arity at least 2".into()));
    }
    let carrier = sg.elements();
    let mut out = Vec::new();
    let mut current = coloring.clone();
    for arity in (1..m).rev() {
        let mut entries = Vec::new();
        let mut stack: Vec<Vec<Elem>> = vec![vec![]];
        // lexicographic arity-subsets of the carrier
        while let Some(prefix) = stack.pop() {
            if prefix.len() == arity {
                let c = induced_color(&current, &prefix, oracle, sg)?;
                entries.push((prefix, c));
                continue;
            }
            let start = prefix.last().map(|&e| e + 1).unwrap_or_else(|| carrier[0]);
            for &e in carrier.iter().filter(|&&e| e >= start) {
                let mut next = prefix.clone();
                next.push(e);
                stack.push(next);
            }
        }
        let induced = Coloring::explicit(arity, current.colors(), entries)?;
        out.push(induced.clone());
        current = induced;
    }
    Ok(out)
}

/// `G(F) = ⋂_{A ∈ F} {s ∈ S∖A : χ(A ∪ {s}) = green}`, committed in.
/// The empty family yields the whole carrier.
pub fn g_of(
    oracle: &mut MembershipOracle,
    f: &[Vec<Elem>],
    coloring: &Coloring,
    green: Color,
    sg: &Semigroup,
) -> Result<SmallSet, EngineError> {
    let universe = sg.universe_set();
    let mut out = universe.clone();
    for a in f {
        let mut class = SmallSet::empty(universe.capacity());
        for s in universe.iter() {
            let s_elem = s as Elem;
            if a.contains(&s_elem) {
                continue;
            }
            let mut edge = a.clone();
            edge.push(s_elem);
            if coloring.color(&edge)? == green {
                class.insert(s);
            }
        }
        out.intersect_with(&class);
    }
    oracle.require_in(&out, "G(F)")?;
    Ok(out)
}

/// Same intersection without committing; used for Bob's feasibility scan.
fn g_set_uncommitted(
    f: &[Vec<Elem>],
    coloring: &Coloring,
    green: Color,
    universe: &SmallSet,
) -> Result<SmallSet, EngineError> {
    let mut out = universe.clone();
    for a in f {
        let mut class = SmallSet::empty(universe.capacity());
        for s in universe.iter() {
            let s_elem = s as Elem;
            if a.contains(&s_elem) {
                continue;
            }
            let mut edge = a.clone();
            edge.push(s_elem);
            if coloring.color(&edge)? == green {
                class.insert(s);
            }
        }
        out.intersect_with(&class);
    }
    Ok(out)
}

pub(crate) fn build_oracle(
    sg: &Semigroup,
    spec: &OracleSpec,
    attempt: u64,
) -> Result<MembershipOracle, EngineError> {
    Ok(match spec {
        OracleSpec::Principal { e } => MembershipOracle::principal(sg, *e)?,
        OracleSpec::Scripted { script } => {
            MembershipOracle::scripted(sg.universe_set(), script)
        }
        OracleSpec::Backtracking { seed } => {
            MembershipOracle::backtracking(sg.universe_set(), *seed, attempt)
        }
    })
}

pub(crate) fn constraint_image(
    constraint: &Option<Constraint>,
    accumulated: &SmallSet,
    round: usize,
    universe: &SmallSet,
) -> Result<SmallSet, EngineError> {
    match constraint {
        None => Ok(universe.clone()),
        Some(Constraint::Tail) => {
            let max = accumulated.max().unwrap_or(0);
            let mut out = SmallSet::empty(universe.capacity());
            for x in universe.iter() {
                if x > max {
                    out.insert(x);
                }
            }
            Ok(out)
        }
        Some(Constraint::Sets { sets }) => {
            let set = sets.get(round - 1).ok_or_else(|| {
                EngineError::Input(format!("constraint has no image for round {}", round))
            })?;
            Ok(set_of(universe, set))
        }
    }
}

fn require(
    oracle: &mut MembershipOracle,
    set: &SmallSet,
    label: &str,
    round: usize,
) -> Result<(), EngineError> {
    oracle.require_in(set, label).map_err(|e| match e {
        OracleError::Exhausted { label, set } => {
            EngineError::Exhausted { round, label, size: set.len() }
        }
        other => EngineError::Oracle(other),
    })
}

struct RoundPlan {
    bob_reply: Vec<Elem>,
    chosen_members: Vec<Vec<Elem>>,
    block: Vec<Elem>,
}

/// Length of a greedy sum-closed chain inside `x`: elements picked
/// ascending whose whole subset-sum closure stays in `x` with all sums
/// distinct. Bob uses this to keep enough additive room for the
/// remaining rounds.
fn kernel_depth(x: &SmallSet, needed: usize, sg: &Semigroup) -> usize {
    if needed == 0 {
        return 0;
    }
    let mut closure: Vec<Elem> = Vec::new();
    let mut depth = 0;
    for cand in x.iter() {
        let c = cand as Elem;
        if closure.contains(&c) {
            continue;
        }
        let mut extension = vec![c];
        let mut ok = true;
        for &s in &closure {
            match sg.combine(s, c) {
                Some(v)
                    if x.contains(v as usize)
                        && !closure.contains(&v)
                        && !extension.contains(&v) =>
                {
                    extension.push(v)
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        closure.append(&mut extension);
        depth += 1;
        if depth >= needed {
            break;
        }
    }
    depth
}

/// Evaluates what committing a candidate reply would leave of the core;
/// `None` means the sums overflow the carrier.
#[allow(clippy::too_many_arguments)]
fn core_after_reply(
    blocks: &[Vec<Elem>],
    candidate_block: &[Elem],
    d: &SmallSet,
    oracle: &MembershipOracle,
    work_coloring: &Coloring,
    green: Color,
    constraint: &Option<Constraint>,
    round: usize,
    sg: &Semigroup,
) -> Result<Option<SmallSet>, EngineError> {
    let mut all_blocks = blocks.to_vec();
    all_blocks.push(candidate_block.to_vec());
    let sums = match block_sums(&all_blocks, 0..all_blocks.len(), sg) {
        Ok(s) => s,
        Err(StructureError::UndefinedSum) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let universe = sg.universe_set();
    let v_set = set_of(&universe, candidate_block);
    let b_n = left_translates_into(&v_set, d, d, sg);
    let singles: Vec<Vec<Elem>> = sums.iter().map(|&v| vec![v]).collect();
    let g = g_set_uncommitted(&singles, work_coloring, green, &universe)?;
    let mut acc = SmallSet::empty(universe.capacity());
    for b in &all_blocks {
        acc.union_with(&set_of(&universe, b));
    }
    let cons = constraint_image(constraint, &acc, round + 1, &universe)?;
    let mut core = oracle.core().clone();
    core.intersect_with(&b_n);
    core.intersect_with(&g);
    core.intersect_with(&cons);
    Ok(Some(core))
}

#[allow(clippy::too_many_arguments)]
fn plan_round(
    a_n: &SmallSet,
    chosen_family: &[Vec<Elem>],
    blocks: &[Vec<Elem>],
    d: &SmallSet,
    oracle: &MembershipOracle,
    work_coloring: &Coloring,
    green: Color,
    config: &EngineConfig,
    round: usize,
    rounds_total: usize,
    sg: &Semigroup,
) -> Result<RoundPlan, EngineError> {
    let last_round = round == rounds_total;
    let remaining = rounds_total - round;
    let covering = |reply: &[Elem]| -> Vec<Vec<Elem>> {
        chosen_family
            .iter()
            .filter(|r| r.iter().any(|e| reply.contains(e)))
            .cloned()
            .collect()
    };
    let block_of = |members: &[Vec<Elem>]| -> Vec<Elem> {
        let mut v: Vec<Elem> = members.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let singleton = matches!(config.mode, EngineMode::One);
    let cap = match &config.bob {
        BobPolicy::Adaptive { cap } | BobPolicy::Smallest { cap } => {
            if singleton {
                1
            } else {
                (*cap).max(1)
            }
        }
        BobPolicy::Scripted { .. } => usize::MAX,
    };

    let reply: Vec<Elem> = match &config.bob {
        BobPolicy::Scripted { replies } => {
            let r = replies.get(round - 1).ok_or_else(|| {
                EngineError::Input(format!("scripted Bob has no reply for round {}", round))
            })?;
            if r.is_empty() || r.iter().any(|e| !a_n.contains(*e as usize)) {
                return Err(EngineError::Input(format!(
                    "scripted reply {:?} is not a nonempty subset of Alice's move",
                    r
                )));
            }
            if singleton && r.len() != 1 {
                return Err(EngineError::Input("one mode needs singleton replies".into()));
            }
            r.clone()
        }
        BobPolicy::Smallest { .. } => {
            a_n.iter().take(cap).map(|x| x as Elem).collect()
        }
        BobPolicy::Adaptive { .. } => {
            let mut picked: Vec<Elem> = Vec::new();
            for (scanned, x) in a_n.iter().enumerate() {
                if picked.len() >= cap || scanned >= config.scan_cap {
                    break;
                }
                let mut tentative = picked.clone();
                tentative.push(x as Elem);
                if last_round {
                    // nothing left to commit afterwards
                    let members = covering(&tentative);
                    if block_sums(
                        &{
                            let mut b = blocks.to_vec();
                            b.push(block_of(&members));
                            b
                        },
                        0..blocks.len() + 1,
                        sg,
                    )
                    .is_ok()
                    {
                        picked = tentative;
                    }
                    continue;
                }
                let members = covering(&tentative);
                let candidate_block = block_of(&members);
                match core_after_reply(
                    blocks,
                    &candidate_block,
                    d,
                    oracle,
                    work_coloring,
                    green,
                    &config.constraint,
                    round,
                    sg,
                )? {
                    Some(core)
                        if !core.is_empty()
                            && kernel_depth(&core, remaining + 1, sg) > remaining =>
                    {
                        picked = tentative
                    }
                    _ => {}
                }
            }
            if picked.is_empty() {
                // forced: take the least element and let the commitments
                // report the dead end honestly
                picked = a_n.iter().take(1).map(|x| x as Elem).collect();
            }
            picked
        }
    };

    let chosen_members = covering(&reply);
    let block = if singleton {
        // the blocks of the claim are the picks themselves; the member
        // set still drives the commitments
        block_of(&chosen_members)
    } else {
        block_of(&chosen_members)
    };
    Ok(RoundPlan { bob_reply: reply, chosen_members, block })
}

/// Runs the round construction and emits a certificate. Backtracking
/// oracles retry with rotated tie-breaks up to the configured budget.
pub fn run_engine(
    sg: &Semigroup,
    coloring: &Coloring,
    families: &FamilySequence,
    oracle_spec: &OracleSpec,
    config: &EngineConfig,
) -> Result<Certificate, EngineError> {
    let budget = match oracle_spec {
        OracleSpec::Backtracking { .. } => config.retry_budget.max(1),
        _ => 1,
    };
    let mut last_err = None;
    for attempt in 0..budget {
        match run_attempt(sg, coloring, families, oracle_spec, config, attempt) {
            Ok(cert) => return Ok(cert),
            Err(e) if retryable(&e) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt ran"))
}

fn retryable(e: &EngineError) -> bool {
    matches!(
        e,
        EngineError::Exhausted { .. }
            | EngineError::Oracle(OracleError::Exhausted { .. })
            | EngineError::Oracle(OracleError::NoConsistentClass { .. })
            | EngineError::Oracle(OracleError::NotLarge(_))
    )
}

fn run_attempt(
    sg: &Semigroup,
    coloring: &Coloring,
    families: &FamilySequence,
    oracle_spec: &OracleSpec,
    config: &EngineConfig,
    attempt: u64,
) -> Result<Certificate, EngineError> {
    let m = coloring.arity;
    if m == 0 || m > 2 {
        return Err(EngineError::ArityUnsupported(m));
    }
    if m >= 2 && matches!(oracle_spec, OracleSpec::Principal { .. }) {
        // the induced color of a set containing the principal element is
        // undefined: no extension class can contain it
        return Err(EngineError::Input(
            "principal oracles support arity 1 only".into(),
        ));
    }
    if config.rounds == 0 {
        return Err(EngineError::Input("at least one round required".into()));
    }
    let mut oracle = build_oracle(sg, oracle_spec, attempt)?;
    let universe = sg.universe_set();
    let carrier = sg.elements();
    let k = coloring.colors();

    // green color and first chain set
    let (green, mut d) = if m == 1 {
        let mut classes: Vec<SmallSet> =
            (0..k).map(|_| SmallSet::empty(universe.capacity())).collect();
        for &e in &carrier {
            let c = coloring.color(&[e])?;
            classes[(c - 1) as usize].insert(e as usize);
        }
        let idx = oracle.query_partition(&classes, "arity-1 color classes")?;
        ((idx + 1) as Color, classes[idx].clone())
    } else {
        let green = 1 + (attempt % k as u64) as Color;
        oracle.require_in(&universe, "D1 = S")?;
        (green, universe.clone())
    };

    // arity 1 rides the arity-2 path with the constant pair coloring
    let work_coloring = if m == 1 { Coloring::constant(2) } else { coloring.clone() };
    let work_green = if m == 1 { 1 } else { green };

    let mut internal_blocks: Vec<Vec<Elem>> = Vec::new();
    let mut claim_blocks: Vec<Vec<Elem>> = Vec::new();
    let mut families_chosen: Vec<Vec<Vec<Elem>>> = Vec::new();
    let mut bob_replies: Vec<Vec<Elem>> = Vec::new();
    let mut member_sets: Vec<Vec<Elem>> = Vec::new();
    let mut collected = SmallSet::empty(universe.capacity());

    for round in 1..=config.rounds {
        let last_round = round == config.rounds;

        let d_star = star_set(&d, sg);
        require(&mut oracle, &d_star, "star D*", round)?;

        let family = families.family_for(round, &carrier)?;
        let chosen_family = disjointify(&mut oracle, &family, &d_star).map_err(|e| match e {
            OracleError::Exhausted { label, set } => {
                EngineError::Exhausted { round, label, size: set.len() }
            }
            OracleError::NotLarge(set) => EngineError::Exhausted {
                round,
                label: "disjointify largeness".into(),
                size: set.len(),
            },
            other => EngineError::Oracle(other),
        })?;
        let mut a_n = SmallSet::empty(universe.capacity());
        for r in &chosen_family {
            a_n.union_with(&set_of(&universe, r));
        }

        let plan = plan_round(
            &a_n,
            &chosen_family,
            &internal_blocks,
            &d,
            &oracle,
            &work_coloring,
            work_green,
            config,
            round,
            config.rounds,
            sg,
        )?;

        collected.union_with(&set_of(&universe, &plan.bob_reply));
        bob_replies.push(plan.bob_reply.clone());
        families_chosen.push(plan.chosen_members.clone());
        if matches!(config.mode, EngineMode::One) {
            member_sets.push(plan.block.clone());
            claim_blocks.push(plan.bob_reply.clone());
        } else {
            claim_blocks.push(plan.block.clone());
        }
        internal_blocks.push(plan.block.clone());

        if last_round {
            break;
        }

        let sums = block_sums(&internal_blocks, 0..internal_blocks.len(), sg)
            .map_err(|e| match e {
                StructureError::UndefinedSum => EngineError::UndefinedSum { round },
                other => other.into(),
            })?;
        let v_set = set_of(&universe, &internal_blocks[internal_blocks.len() - 1]);
        let b_n = left_translates_into(&v_set, &d, &d, sg);
        require(&mut oracle, &b_n, "translation witness B", round)?;

        let singles: Vec<Vec<Elem>> = sums.iter().map(|&v| vec![v]).collect();
        let g = g_of(&mut oracle, &singles, &work_coloring, work_green, sg).map_err(|e| {
            match e {
                EngineError::Oracle(OracleError::Exhausted { label, set }) => {
                    EngineError::Exhausted { round, label, size: set.len() }
                }
                other => other,
            }
        })?;

        let mut acc = SmallSet::empty(universe.capacity());
        for b in &internal_blocks {
            acc.union_with(&set_of(&universe, b));
        }
        let cons = constraint_image(&config.constraint, &acc, round + 1, &universe)?;

        let mut next = b_n;
        next.intersect_with(&g);
        next.intersect_with(&cons);
        require(&mut oracle, &next, "next chain set D", round)?;
        d = next;
    }

    Ok(Certificate {
        version: CERTIFICATE_VERSION,
        semigroup: SemigroupSpec::of(sg),
        coloring: ColoringFile::of(coloring),
        kind: match config.mode {
            EngineMode::Fin => StructureKind::PartiteSumgraph,
            EngineMode::One => StructureKind::MSumgraph,
        },
        arity: m,
        claimed_color: green,
        mode: config.mode,
        blocks: claim_blocks,
        families: families_chosen,
        bob_replies,
        member_sets: if matches!(config.mode, EngineMode::One) {
            Some(member_sets)
        } else {
            None
        },
        products: None,
        collected: collected.iter().map(|x| x as Elem).collect(),
        constraint: config.constraint.clone(),
        oracle: oracle_spec.clone(),
        attempt,
        decision_log: oracle.into_log(),
        manifest: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Answer, Decision};
    use crate::semigroup::{max_semigroup, NatOp};
    use super::super::certificate::FamilyGenerator;

    fn nat(bound: Elem) -> Semigroup {
        Semigroup::naturals(bound, NatOp::Add).unwrap()
    }

    #[test]
    fn one_color_induces_trivially() {
        let sg = nat(6);
        let mut oracle = MembershipOracle::backtracking(sg.universe_set(), 0, 0);
        let induced = induce_colorings(&Coloring::constant(2), &mut oracle, &sg).unwrap();
        assert_eq!(induced.len(), 1);
        for e in 1..=6u64 {
            assert_eq!(induced[0].color(&[e]).unwrap(), 1);
        }
    }

    #[test]
    fn scripted_parity_induction_at_three() {
        // evens committed in: the class of even extensions of {3} is the
        // odd numbers, out; the odd-sum class (even numbers) is in
        let sg = nat(10);
        let universe = sg.universe_set();
        let evens: Vec<Elem> = (1..=5).map(|i| 2 * i).collect();
        let script = vec![Decision { set: evens, answer: Answer::In, partition: None }];
        let mut oracle = MembershipOracle::scripted(universe, &script);
        let parity = Coloring::parity(2);
        let c = induced_color(&parity, &[3], &mut oracle, &sg).unwrap();
        // 3 + even is odd, and odd pair sums carry color 2
        assert_eq!(c, 2);
    }

    #[test]
    fn principal_cannot_color_sets_containing_e() {
        let sg = max_semigroup(4);
        let mut oracle = MembershipOracle::principal(&sg, 2).unwrap();
        let parity = Coloring::parity(2);
        let err = induced_color(&parity, &[2], &mut oracle, &sg).unwrap_err();
        assert!(matches!(
            err,
            EngineError::Oracle(OracleError::NoConsistentClass { .. })
        ));
    }

    #[test]
    fn g_of_empty_family_is_the_carrier() {
        let sg = nat(8);
        let mut oracle = MembershipOracle::backtracking(sg.universe_set(), 0, 0);
        let g = g_of(&mut oracle, &[], &Coloring::constant(2), 1, &sg).unwrap();
        assert_eq!(g, sg.universe_set());
    }

    #[test]
    fn g_of_single_set_under_constant_coloring() {
        let sg = nat(8);
        let mut oracle = MembershipOracle::backtracking(sg.universe_set(), 0, 0);
        let g = g_of(&mut oracle, &[vec![3]], &Coloring::constant(2), 1, &sg).unwrap();
        let expected: Vec<usize> = (1..=8usize).filter(|&x| x != 3).collect();
        assert_eq!(g.to_vec(), expected);
    }

    #[test]
    fn g_of_matches_direct_filter() {
        let sg = nat(8);
        let mut oracle = MembershipOracle::backtracking(sg.universe_set(), 0, 0);
        let parity = Coloring::parity(2);
        let g = g_of(&mut oracle, &[vec![2]], &parity, 1, &sg).unwrap();
        let expected: Vec<usize> = (1..=8u64)
            .filter(|&s| s != 2 && parity.color(&[2, s]).unwrap() == 1)
            .map(|s| s as usize)
            .collect();
        assert_eq!(g.to_vec(), expected);
    }

    #[test]
    fn principal_engine_is_arity_one_only() {
        let sg = max_semigroup(4);
        let err = run_engine(
            &sg,
            &Coloring::parity(2),
            &FamilySequence::singletons(),
            &OracleSpec::Principal { e: 3 },
            &EngineConfig { rounds: 1, ..Default::default() },
        )
        .unwrap_err();
        assert!(matches!(err, EngineError::Input(_)));
    }

    #[test]
    fn smallest_bob_takes_minimal_elements() {
        let sg = nat(60);
        let config = EngineConfig {
            rounds: 1,
            mode: EngineMode::Fin,
            bob: BobPolicy::Smallest { cap: 2 },
            ..Default::default()
        };
        let cert = run_engine(
            &sg,
            &Coloring::constant(1),
            &FamilySequence::singletons(),
            &OracleSpec::Backtracking { seed: 0 },
            &config,
        )
        .unwrap();
        assert_eq!(cert.bob_replies[0].len(), 2);
        assert_eq!(cert.bob_replies[0][0], 1);
    }

    #[test]
    fn scripted_bob_replies_are_validated() {
        let sg = nat(60);
        let config = EngineConfig {
            rounds: 1,
            mode: EngineMode::Fin,
            bob: BobPolicy::Scripted { replies: vec![vec![2, 4]] },
            ..Default::default()
        };
        let cert = run_engine(
            &sg,
            &Coloring::constant(1),
            &FamilySequence::singletons(),
            &OracleSpec::Backtracking { seed: 0 },
            &config,
        )
        .unwrap();
        assert_eq!(cert.bob_replies[0], vec![2, 4]);

        let bad = EngineConfig {
            rounds: 1,
            mode: EngineMode::Fin,
            bob: BobPolicy::Scripted { replies: vec![vec![]] },
            ..Default::default()
        };
        assert!(matches!(
            run_engine(
                &sg,
                &Coloring::constant(1),
                &FamilySequence::singletons(),
                &OracleSpec::Backtracking { seed: 0 },
                &bad,
            ),
            Err(EngineError::Input(_))
        ));
    }

    #[test]
    fn per_round_constraint_images_hold() {
        let sg = nat(200);
        let config = EngineConfig {
            rounds: 2,
            mode: EngineMode::Fin,
            constraint: Some(Constraint::Sets {
                sets: vec![(1..=200).collect(), (40..=200).collect()],
            }),
            ..Default::default()
        };
        let cert = run_engine(
            &sg,
            &Coloring::constant(1),
            &FamilySequence::singletons(),
            &OracleSpec::Backtracking { seed: 1 },
            &config,
        )
        .unwrap();
        assert!(cert.blocks[1].iter().all(|&e| e >= 40));
    }

    #[test]
    fn scripted_replay_reproduces_certificate() {
        let sg = nat(90);
        let coloring = Coloring::parity(1);
        let config = EngineConfig { rounds: 2, mode: EngineMode::Fin, ..Default::default() };
        let original = run_engine(
            &sg,
            &coloring,
            &FamilySequence::singletons(),
            &OracleSpec::Backtracking { seed: 4 },
            &config,
        )
        .unwrap();
        let replayed = run_engine(
            &sg,
            &coloring,
            &FamilySequence::singletons(),
            &OracleSpec::Scripted { script: original.decision_log.clone() },
            &config,
        )
        .unwrap();
        assert_eq!(replayed.blocks, original.blocks);
        assert_eq!(replayed.families, original.families);
        assert_eq!(replayed.bob_replies, original.bob_replies);
        assert_eq!(replayed.claimed_color, original.claimed_color);
        assert_eq!(replayed.decision_log, original.decision_log);
    }

    #[test]
    fn ap_families_generate_progressions() {
        let sg = nat(30);
        let families = FamilySequence { generator: FamilyGenerator::Aps { len: 3 } };
        let fam = families.family_for(1, &sg.elements()).unwrap();
        assert!(fam.contains(&vec![1, 2, 3]));
        assert!(fam.contains(&vec![5, 10, 15]));
        assert!(fam.iter().all(|r| r.len() == 3));
    }
}
