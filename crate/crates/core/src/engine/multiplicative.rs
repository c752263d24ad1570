//! The two-operation variant of the round construction over bounded
//! naturals: rounds pick a block `F_n = R_n ∪ {y_n}` whose element `y_n`
//! carries the multiplicative structure, and the chain sets additionally
//! thread through the division sets `D★/y`.
//!
//! The emitted structure mixes block sums with sub-products of the chosen
//! `y` elements; the per-round translation witness is taken against every
//! accumulated mixed sum, which is what the greenness induction needs for
//! chains that start at a product block.

use crate::coloring::{Color, Coloring, ColoringFile};
use crate::oracle::{set_of, OracleError};
use crate::semigroup::{Elem, NatOp, Semigroup, SemigroupSpec};
use crate::sets::SmallSet;
use crate::structures::{block_sums, StructureError};

use super::certificate::{
    Certificate, EngineConfig, EngineError, EngineMode, FamilySequence, OracleSpec, StructureKind,
    CERTIFICATE_VERSION,
};
use super::run::{build_oracle, constraint_image, g_of, left_translates_into};

/// All sub-products of the chosen elements at the given rounds; `None`
/// on carrier overflow.
fn sub_products(products: &[Elem], rounds: &[usize], mul: &Semigroup) -> Option<Vec<Elem>> {
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << rounds.len()) {
        let mut acc: Option<Elem> = None;
        for (i, &r) in rounds.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            let y = products[r];
            acc = match acc {
                None => Some(y),
                Some(a) => Some(mul.combine(a, y)?),
            };
        }
        let v = acc.unwrap();
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out.sort_unstable();
    Some(out)
}

fn chains_over(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn subsets(lo: usize, hi: usize) -> Vec<Vec<usize>> {
        let width = hi - lo;
        (1u64..(1u64 << width))
            .map(|mask| {
                (lo..hi)
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, p)| p)
                    .collect()
            })
            .collect()
    }
    fn go(start: usize, n: usize) -> Vec<Vec<Vec<usize>>> {
        let mut out = vec![vec![]];
        for h in subsets(start, n) {
            let next = h.last().unwrap() + 1;
            for rest in go(next, n) {
                let mut chain = vec![h.clone()];
                chain.extend(rest);
                out.push(chain);
            }
        }
        out
    }
    go(0, n).into_iter().filter(|c| !c.is_empty()).collect()
}

/// Every element of the mixed single-sum structure over the blocks so
/// far: for each chain of round sets, all block sums of the mapped
/// blocks (round blocks at singletons, sub-products elsewhere).
fn tilde_sums1(
    blocks: &[Vec<Elem>],
    products: &[Elem],
    add: &Semigroup,
    mul: &Semigroup,
) -> Result<Vec<Elem>, StructureError> {
    let n = blocks.len();
    let mut out: Vec<Elem> = Vec::new();
    for chain in chains_over(n) {
        let mut mapped: Vec<Vec<Elem>> = Vec::with_capacity(chain.len());
        for h in &chain {
            if h.len() == 1 {
                mapped.push(blocks[h[0]].clone());
            } else {
                match sub_products(products, h, mul) {
                    Some(b) => mapped.push(b),
                    None => return Err(StructureError::UndefinedSum),
                }
            }
        }
        let sums = block_sums(&mapped, 0..mapped.len(), add)?;
        for v in sums {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Runs the multiplicative rounds and emits a tilde-structure
/// certificate. Retries follow the same policy as the additive engine.
pub fn run_multiplicative_engine(
    bound: Elem,
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
        match run_mult_attempt(bound, coloring, families, oracle_spec, config, attempt) {
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
            | EngineError::DivisionExhausted { .. }
            | EngineError::Oracle(OracleError::Exhausted { .. })
            | EngineError::Oracle(OracleError::NoConsistentClass { .. })
            | EngineError::Oracle(OracleError::NotLarge(_))
    )
}

fn require(
    oracle: &mut crate::oracle::MembershipOracle,
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

fn run_mult_attempt(
    bound: Elem,
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
    if config.rounds == 0 {
        return Err(EngineError::Input("at least one round required".into()));
    }
    let add = Semigroup::naturals(bound, NatOp::Add)?;
    let mul = Semigroup::naturals(bound, NatOp::Mul)?;
    let mut oracle = build_oracle(&add, oracle_spec, attempt)?;
    let universe = add.universe_set();
    let carrier = add.elements();
    let k = coloring.colors();

    let (green, d1_base) = if m == 1 {
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
    let work_coloring = if m == 1 { Coloring::constant(2) } else { coloring.clone() };
    let work_green = if m == 1 { 1 } else { green };

    // D1 additionally meets the union of the first family
    let family1 = families.family_for(1, &carrier)?;
    let mut d = d1_base;
    {
        let mut union1 = SmallSet::empty(universe.capacity());
        for r in &family1 {
            union1.union_with(&set_of(&universe, r));
        }
        d.intersect_with(&union1);
    }
    require(&mut oracle, &d, "D1", 1)?;

    let mut blocks: Vec<Vec<Elem>> = Vec::new();
    let mut products: Vec<Elem> = Vec::new();
    let mut member_sets: Vec<Vec<Elem>> = Vec::new();
    let mut collected = SmallSet::empty(universe.capacity());

    for round in 1..=config.rounds {
        let last_round = round == config.rounds;

        let d_star = super::run::star_set(&d, &add);
        require(&mut oracle, &d_star, "star D*", round)?;

        // division witness: an element y of D* whose division set stays
        // consistent; 1 divides trivially and is the last resort. The
        // last round needs no division set, only the element itself.
        let mut y_pick: Option<(Elem, SmallSet)> = None;
        let mut one_fallback: Option<(Elem, SmallSet)> = None;
        for y in d_star.iter() {
            let y = y as Elem;
            let mut division = SmallSet::empty(universe.capacity());
            for x in universe.iter() {
                if let Some(v) = mul.combine(x as Elem, y) {
                    if d_star.contains(v as usize) {
                        division.insert(x);
                    }
                }
            }
            if !last_round && oracle.core().is_disjoint(&division) {
                continue;
            }
            if y == 1 {
                one_fallback = Some((y, division));
                continue;
            }
            y_pick = Some((y, division));
            break;
        }
        let (y_n, division) = y_pick
            .or(one_fallback)
            .ok_or(EngineError::DivisionExhausted { round })?;
        if !last_round {
            require(&mut oracle, &division, "division D*/y", round)?;
        }

        let family = families.family_for(round, &carrier)?;
        let r_n = family
            .iter()
            .find(|r| !r.is_empty() && r.iter().all(|&e| d_star.contains(e as usize)))
            .cloned()
            .ok_or_else(|| EngineError::Exhausted {
                round,
                label: "family member within D*".into(),
                size: d_star.len(),
            })?;
        let mut f_n = r_n.clone();
        if !f_n.contains(&y_n) {
            f_n.push(y_n);
        }
        f_n.sort_unstable();

        collected.union_with(&set_of(&universe, &f_n));
        member_sets.push(r_n);
        blocks.push(f_n);
        products.push(y_n);

        if last_round {
            break;
        }

        let tsums = tilde_sums1(&blocks, &products, &add, &mul).map_err(|e| match e {
            StructureError::UndefinedSum => EngineError::UndefinedSum { round },
            other => other.into(),
        })?;
        let t_set = set_of(&universe, &tsums);
        let b_n = left_translates_into(&t_set, &d, &d, &add);
        require(&mut oracle, &b_n, "translation witness B", round)?;

        let singles: Vec<Vec<Elem>> = tsums.iter().map(|&v| vec![v]).collect();
        let g = g_of(&mut oracle, &singles, &work_coloring, work_green, &add).map_err(|e| {
            match e {
                EngineError::Oracle(OracleError::Exhausted { label, set }) => {
                    EngineError::Exhausted { round, label, size: set.len() }
                }
                other => other,
            }
        })?;

        let next_family = families.family_for(round + 1, &carrier)?;
        let mut next_union = SmallSet::empty(universe.capacity());
        for r in &next_family {
            next_union.union_with(&set_of(&universe, r));
        }
        let cons = constraint_image(&config.constraint, &t_set, round + 1, &universe)?;

        let mut next = b_n;
        next.intersect_with(&division);
        next.intersect_with(&g);
        next.intersect_with(&next_union);
        next.intersect_with(&cons);
        require(&mut oracle, &next, "next chain set D", round)?;
        d = next;
    }

    Ok(Certificate {
        version: CERTIFICATE_VERSION,
        semigroup: SemigroupSpec::of(&add),
        coloring: ColoringFile::of(coloring),
        kind: StructureKind::TildeSumgraph,
        arity: m,
        claimed_color: green,
        mode: EngineMode::Fin,
        blocks: blocks.clone(),
        families: member_sets.iter().map(|r| vec![r.clone()]).collect(),
        bob_replies: blocks,
        member_sets: Some(member_sets),
        products: Some(products),
        collected: collected.iter().map(|x| x as Elem).collect(),
        constraint: config.constraint.clone(),
        oracle: oracle_spec.clone(),
        attempt,
        decision_log: oracle.into_log(),
        manifest: None,
    })
}
