//! Finite and bounded semigroup carriers with the index-sum machinery.
//!
//! Two carrier kinds are supported: an explicit Cayley table (total or
//! partial) over `{0, .., n-1}`, and the naturals `{1, .., B}` truncated
//! at a bound, under addition or multiplication. A partial operation
//! returns `None` on undefined combinations; undefinedness always
//! propagates, it is never clamped.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

use crate::sets::{nonempty_subsets, SmallSet};

/// Carrier element. Table semigroups use `0..n`, bounded naturals use `1..=B`.
pub type Elem = u64;

#[derive(Debug, Error)]
pub enum SemigroupError {
    #[error("operation table is not square: row {row} has {got} entries, expected {expected}")]
    RaggedTable { row: usize, got: usize, expected: usize },
    #[error("table entry {value} at ({a},{b}) is outside the carrier 0..{size}")]
    EntryOutOfRange { a: Elem, b: Elem, value: Elem, size: usize },
    #[error("operation declared total but ({a},{b}) is undefined")]
    MissingEntry { a: Elem, b: Elem },
    #[error("associativity fails at ({a},{b},{c}): ({a}+{b})+{c} != {a}+({b}+{c})")]
    NotAssociative { a: Elem, b: Elem, c: Elem },
    #[error("bound must be positive")]
    ZeroBound,
    #[error("index {index} is out of range for a sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("index set must be nonempty")]
    EmptyIndexSet,
    #[error("index range {lo}..={hi} is empty or exceeds the sequence length {len}")]
    BadRange { lo: usize, hi: usize, len: usize },
    #[error("element {0} is not in the carrier")]
    NotAnElement(Elem),
    #[error("operation requires a total semigroup")]
    NotTotal,
}

/// Cayley-table semigroup over `{0, .., size-1}`. `None` entries mark
/// undefined combinations in partial mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSemigroup {
    size: usize,
    table: Vec<Option<Elem>>,
    labels: Option<Vec<String>>,
    partial: bool,
}

impl FiniteSemigroup {
    /// Builds and validates a table semigroup. Associativity is checked over
    /// all triples (all defined triples in partial mode).
    pub fn new(
        table: Vec<Vec<Option<Elem>>>,
        partial: bool,
        labels: Option<Vec<String>>,
    ) -> Result<Self, SemigroupError> {
        let size = table.len();
        let mut flat = Vec::with_capacity(size * size);
        for (r, row) in table.iter().enumerate() {
            if row.len() != size {
                return Err(SemigroupError::RaggedTable { row: r, got: row.len(), expected: size });
            }
            for (c, &entry) in row.iter().enumerate() {
                match entry {
                    Some(v) if (v as usize) >= size => {
                        return Err(SemigroupError::EntryOutOfRange {
                            a: r as Elem,
                            b: c as Elem,
                            value: v,
                            size,
                        })
                    }
                    None if !partial => {
                        return Err(SemigroupError::MissingEntry { a: r as Elem, b: c as Elem })
                    }
                    e => flat.push(e),
                }
            }
        }
        let sg = FiniteSemigroup { size, table: flat, labels, partial };
        sg.check_associativity()?;
        Ok(sg)
    }

    /// Total semigroup from a table of plain entries.
    pub fn total(table: Vec<Vec<Elem>>) -> Result<Self, SemigroupError> {
        let wrapped = table
            .into_iter()
            .map(|row| row.into_iter().map(Some).collect())
            .collect();
        Self::new(wrapped, false, None)
    }

    fn check_associativity(&self) -> Result<(), SemigroupError> {
        for a in 0..self.size as Elem {
            for b in 0..self.size as Elem {
                for c in 0..self.size as Elem {
                    let left = self.op(a, b).and_then(|ab| self.op(ab, c));
                    let right = self.op(b, c).and_then(|bc| self.op(a, bc));
                    let ok = if self.partial {
                        match (left, right) {
                            (Some(x), Some(y)) => x == y,
                            _ => true,
                        }
                    } else {
                        left == right && left.is_some()
                    };
                    if !ok {
                        return Err(SemigroupError::NotAssociative { a, b, c });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn op(&self, a: Elem, b: Elem) -> Option<Elem> {
        let (a, b) = (a as usize, b as usize);
        if a >= self.size || b >= self.size {
            return None;
        }
        self.table[a * self.size + b]
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn label(&self, e: Elem) -> String {
        match &self.labels {
            Some(l) if (e as usize) < l.len() => l[e as usize].clone(),
            _ => e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NatOp {
    Add,
    Mul,
}

/// The naturals `{1, .., bound}` with addition or multiplication,
/// undefined past the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundedNaturals {
    bound: Elem,
    op: NatOp,
}

impl BoundedNaturals {
    pub fn new(bound: Elem, op: NatOp) -> Result<Self, SemigroupError> {
        if bound == 0 {
            return Err(SemigroupError::ZeroBound);
        }
        Ok(BoundedNaturals { bound, op })
    }

    pub fn bound(&self) -> Elem {
        self.bound
    }

    pub fn op(&self, a: Elem, b: Elem) -> Option<Elem> {
        if a == 0 || b == 0 || a > self.bound || b > self.bound {
            return None;
        }
        let r = match self.op {
            NatOp::Add => a.checked_add(b)?,
            NatOp::Mul => a.checked_mul(b)?,
        };
        (r <= self.bound).then_some(r)
    }
}

/// Unified carrier handle used by every other module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Semigroup {
    Table(FiniteSemigroup),
    Naturals(BoundedNaturals),
}

impl Semigroup {
    pub fn naturals(bound: Elem, op: NatOp) -> Result<Self, SemigroupError> {
        Ok(Semigroup::Naturals(BoundedNaturals::new(bound, op)?))
    }

    pub fn combine(&self, a: Elem, b: Elem) -> Option<Elem> {
        match self {
            Semigroup::Table(t) => t.op(a, b),
            Semigroup::Naturals(n) => n.op(a, b),
        }
    }

    pub fn contains(&self, e: Elem) -> bool {
        match self {
            Semigroup::Table(t) => (e as usize) < t.size(),
            Semigroup::Naturals(n) => e >= 1 && e <= n.bound(),
        }
    }

    /// Number of carrier elements.
    pub fn card(&self) -> usize {
        match self {
            Semigroup::Table(t) => t.size(),
            Semigroup::Naturals(n) => n.bound() as usize,
        }
    }

    pub fn elements(&self) -> Vec<Elem> {
        match self {
            Semigroup::Table(t) => (0..t.size() as Elem).collect(),
            Semigroup::Naturals(n) => (1..=n.bound()).collect(),
        }
    }

    /// Bitset capacity large enough to index every element directly.
    pub fn set_capacity(&self) -> usize {
        match self {
            Semigroup::Table(t) => t.size(),
            Semigroup::Naturals(n) => n.bound() as usize + 1,
        }
    }

    pub fn universe_set(&self) -> SmallSet {
        SmallSet::from_iter(self.set_capacity(), self.elements().iter().map(|&e| e as usize))
    }

    pub fn is_total(&self) -> bool {
        match self {
            Semigroup::Table(t) => !t.partial,
            Semigroup::Naturals(_) => false,
        }
    }
}

/// Wire format for semigroup inputs.
///
/// Either `{"size": n, "table": [[..]], "partial": bool}` with `null`
/// table entries for undefined combinations, or
/// `{"naturals": {"bound": B, "op": "add"|"mul"}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SemigroupSpec {
    Naturals { naturals: NaturalsSpec },
    Table {
        size: usize,
        table: Vec<Vec<Option<Elem>>>,
        #[serde(default)]
        partial: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NaturalsSpec {
    pub bound: Elem,
    pub op: NatOp,
}

impl SemigroupSpec {
    pub fn build(&self) -> Result<Semigroup, SemigroupError> {
        match self {
            SemigroupSpec::Naturals { naturals } => {
                Semigroup::naturals(naturals.bound, naturals.op)
            }
            SemigroupSpec::Table { size, table, partial, labels } => {
                if table.len() != *size {
                    return Err(SemigroupError::RaggedTable {
                        row: 0,
                        got: table.len(),
                        expected: *size,
                    });
                }
                Ok(Semigroup::Table(FiniteSemigroup::new(
                    table.clone(),
                    *partial,
                    labels.clone(),
                )?))
            }
        }
    }

    pub fn of(sg: &Semigroup) -> SemigroupSpec {
        match sg {
            Semigroup::Naturals(n) => SemigroupSpec::Naturals {
                naturals: NaturalsSpec { bound: n.bound(), op: n.op },
            },
            Semigroup::Table(t) => SemigroupSpec::Table {
                size: t.size(),
                table: (0..t.size())
                    .map(|a| (0..t.size()).map(|b| t.op(a as Elem, b as Elem)).collect())
                    .collect(),
                partial: t.partial,
                labels: t.labels.clone(),
            },
        }
    }
}

/// A finite nonempty set of 1-based sequence indices, kept sorted.
///
/// `H1 < H2` compares by `max H1 < min H2`; overlapping index sets are
/// incomparable and rejected by operations that need the ordering.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(mut indices: Vec<usize>) -> Result<Self, SemigroupError> {
        if indices.is_empty() {
            return Err(SemigroupError::EmptyIndexSet);
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(IndexSet(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn min_index(&self) -> usize {
        self.0[0]
    }

    pub fn max_index(&self) -> usize {
        *self.0.last().unwrap()
    }

    /// Block ordering: every index here sits below every index there.
    pub fn precedes(&self, other: &IndexSet) -> bool {
        self.max_index() < other.min_index()
    }
}

/// Fold of the semigroup operation over `seq` restricted to `h`, in
/// increasing index order. Indices are 1-based. `None` marks an
/// undefined (out-of-bound) sum, which propagates.
pub fn index_sum(
    seq: &[Elem],
    h: &IndexSet,
    sg: &Semigroup,
) -> Result<Option<Elem>, SemigroupError> {
    let mut acc: Option<Elem> = None;
    for &i in h.indices() {
        if i == 0 || i > seq.len() {
            return Err(SemigroupError::IndexOutOfRange { index: i, len: seq.len() });
        }
        let x = seq[i - 1];
        acc = match acc {
            None => Some(x),
            Some(a) => match sg.combine(a, x) {
                Some(v) => Some(v),
                None => return Ok(None),
            },
        };
    }
    Ok(acc)
}

/// Result of an FS-set computation: the defined sums, plus the index
/// sets whose sums fell outside a partial carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FsSet {
    pub sums: BTreeSet<Elem>,
    pub undefined: Vec<IndexSet>,
}

/// All index sums over nonempty `H ⊆ {lo, .., hi}` (1-based, inclusive).
pub fn fs_set(seq: &[Elem], lo: usize, hi: usize, sg: &Semigroup) -> Result<FsSet, SemigroupError> {
    if lo == 0 || lo > hi || hi > seq.len() {
        return Err(SemigroupError::BadRange { lo, hi, len: seq.len() });
    }
    let range: Vec<usize> = (lo..=hi).collect();
    let mut sums = BTreeSet::new();
    let mut undefined = Vec::new();
    for subset in nonempty_subsets(&range) {
        let h = IndexSet::new(subset)?;
        match index_sum(seq, &h, sg)? {
            Some(v) => {
                sums.insert(v);
            }
            None => undefined.push(h),
        }
    }
    Ok(FsSet { sums, undefined })
}

/// Outcome of a properness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Properness {
    Proper,
    /// Two block-ordered index sets with equal sums.
    Improper { h1: IndexSet, h2: IndexSet, value: Elem },
    /// A sum needed by the check is undefined; the offending index set is reported.
    NotCheckable { h: IndexSet },
}

impl Properness {
    pub fn is_proper(&self) -> bool {
        matches!(self, Properness::Proper)
    }
}

/// Checks `a_{H1} != a_{H2}` for all `H1 < H2` over the whole index range
/// of `seq`.
pub fn is_proper(seq: &[Elem], sg: &Semigroup) -> Result<Properness, SemigroupError> {
    let n = seq.len();
    if n == 0 {
        return Ok(Properness::Proper);
    }
    // Group pairs by the split point j = max H1 < min H2.
    for j in 1..n {
        let left: Vec<usize> = (1..=j).collect();
        let right: Vec<usize> = (j + 1..=n).collect();
        for h1_raw in nonempty_subsets(&left) {
            if *h1_raw.last().unwrap() != j {
                continue; // counted at its own split point
            }
            let h1 = IndexSet::new(h1_raw)?;
            let s1 = match index_sum(seq, &h1, sg)? {
                Some(v) => v,
                None => return Ok(Properness::NotCheckable { h: h1 }),
            };
            for h2_raw in nonempty_subsets(&right) {
                let h2 = IndexSet::new(h2_raw)?;
                let s2 = match index_sum(seq, &h2, sg)? {
                    Some(v) => v,
                    None => return Ok(Properness::NotCheckable { h: h2 }),
                };
                if s1 == s2 {
                    return Ok(Properness::Improper { h1, h2, value: s1 });
                }
            }
        }
    }
    Ok(Properness::Proper)
}

/// The idempotent power of `a` in a total semigroup, with the least
/// exponent `j >= 1` such that `a^j` is idempotent. Existence is
/// guaranteed: the power trajectory enters a cycle whose length divides
/// some idempotent position.
pub fn idempotent_power(a: Elem, sg: &Semigroup) -> Result<(Elem, u64), SemigroupError> {
    if !sg.is_total() {
        return Err(SemigroupError::NotTotal);
    }
    if !sg.contains(a) {
        return Err(SemigroupError::NotAnElement(a));
    }
    let mut x = a;
    let limit = (sg.card() as u64).saturating_mul(sg.card() as u64) + 1;
    for j in 1..=limit {
        if sg.combine(x, x) == Some(x) {
            return Ok((x, j));
        }
        x = sg.combine(x, a).expect("total semigroup");
    }
    unreachable!("a finite total semigroup always has an idempotent power");
}

/// All idempotent elements of a total semigroup.
pub fn all_idempotents(sg: &Semigroup) -> Result<Vec<Elem>, SemigroupError> {
    if !sg.is_total() {
        return Err(SemigroupError::NotTotal);
    }
    Ok(sg
        .elements()
        .into_iter()
        .filter(|&e| sg.combine(e, e) == Some(e))
        .collect())
}

/// The max-semigroup on `n` elements: `a ∨ b = max(a, b)`. Every element
/// is idempotent and every superfilter on it is translation-invariant.
pub fn max_semigroup(n: usize) -> Semigroup {
    let table = (0..n as Elem)
        .map(|a| (0..n as Elem).map(|b| a.max(b)).collect())
        .collect();
    Semigroup::Table(FiniteSemigroup::total(table).expect("max is associative"))
}

/// The min-semigroup on `n` elements: `a ∧ b = min(a, b)`.
pub fn min_semigroup(n: usize) -> Semigroup {
    let table = (0..n as Elem)
        .map(|a| (0..n as Elem).map(|b| a.min(b)).collect())
        .collect();
    Semigroup::Table(FiniteSemigroup::total(table).expect("min is associative"))
}

/// The cyclic group Z_n as a table semigroup.
pub fn cyclic_semigroup(n: usize) -> Semigroup {
    let table = (0..n as Elem)
        .map(|a| (0..n as Elem).map(|b| (a + b) % n as Elem).collect())
        .collect();
    Semigroup::Table(FiniteSemigroup::total(table).expect("modular addition is associative"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat(bound: Elem) -> Semigroup {
        Semigroup::naturals(bound, NatOp::Add).unwrap()
    }

    fn h(ix: &[usize]) -> IndexSet {
        IndexSet::new(ix.to_vec()).unwrap()
    }

    #[test]
    fn index_sum_examples() {
        let sg = nat(100);
        assert_eq!(index_sum(&[2, 3, 5], &h(&[1, 3]), &sg).unwrap(), Some(7));
        assert_eq!(index_sum(&[9], &h(&[1]), &sg).unwrap(), Some(9));
        let small = nat(5);
        assert_eq!(index_sum(&[1, 2, 4], &h(&[1, 2, 3]), &small).unwrap(), None);
        assert!(index_sum(&[1, 2], &h(&[3]), &sg).is_err());
    }

    #[test]
    fn fs_set_examples() {
        let sg = nat(100);
        let fs = fs_set(&[1, 2, 4], 1, 3, &sg).unwrap();
        assert_eq!(fs.sums, (1..=7).collect());
        assert!(fs.undefined.is_empty());

        let fs = fs_set(&[1, 1], 1, 2, &sg).unwrap();
        assert_eq!(fs.sums.iter().copied().collect::<Vec<_>>(), vec![1, 2]);

        // All 7 nonempty subsets of {1,2,3} enumerated by hand:
        // 3, 5, 9, 3+5=8, 3+9=12, 5+9=14, 3+5+9=17.
        let fs = fs_set(&[3, 5, 9], 1, 3, &sg).unwrap();
        assert_eq!(
            fs.sums.iter().copied().collect::<Vec<_>>(),
            vec![3, 5, 8, 9, 12, 14, 17]
        );

        assert!(fs_set(&[1, 2], 2, 1, &sg).is_err());
    }

    #[test]
    fn fs_set_flags_undefined() {
        let sg = nat(6);
        let fs = fs_set(&[1, 2, 4], 1, 3, &sg).unwrap();
        assert_eq!(fs.sums.iter().copied().collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(fs.undefined, vec![h(&[1, 2, 3])]);
    }

    #[test]
    fn properness_examples() {
        let sg = nat(100);
        assert!(is_proper(&[1, 2, 4], &sg).unwrap().is_proper());
        match is_proper(&[1, 1], &sg).unwrap() {
            Properness::Improper { value, .. } => assert_eq!(value, 1),
            other => panic!("expected improper, got {:?}", other),
        }
        // 9 ordered pairs H1 < H2 over {1,2,3}, all distinct sums.
        assert!(is_proper(&[2, 3, 7], &sg).unwrap().is_proper());
        // (2,3,5) collides: a_{1,2} = 5 = a_{3}
        match is_proper(&[2, 3, 5], &sg).unwrap() {
            Properness::Improper { h1, h2, value } => {
                assert_eq!(h1.indices(), &[1, 2]);
                assert_eq!(h2.indices(), &[3]);
                assert_eq!(value, 5);
            }
            other => panic!("expected improper, got {:?}", other),
        }
    }

    #[test]
    fn properness_not_checkable_reports_index_set() {
        // pairs compare 3+4 (undefined at bound 5) against the last entry
        let sg = nat(5);
        match is_proper(&[3, 4, 1], &sg).unwrap() {
            Properness::NotCheckable { h } => assert_eq!(h.indices(), &[1, 2]),
            other => panic!("expected not-checkable, got {:?}", other),
        }
        // a length-2 sequence never needs the joint sum
        assert!(is_proper(&[3, 4], &sg).unwrap().is_proper());
    }

    #[test]
    fn idempotents_in_cyclic_group() {
        let z4 = cyclic_semigroup(4);
        let (e, j) = idempotent_power(1, &z4).unwrap();
        assert_eq!(e, 0);
        assert_eq!(j, 4); // powers 1,2,3,0
        assert_eq!(all_idempotents(&z4).unwrap(), vec![0]);
    }

    #[test]
    fn idempotents_in_lattice_semigroups() {
        let maxsg = max_semigroup(4);
        assert_eq!(all_idempotents(&maxsg).unwrap(), vec![0, 1, 2, 3]);
        for a in 0..4 {
            let (e, j) = idempotent_power(a, &maxsg).unwrap();
            assert_eq!((e, j), (a, 1));
        }
        let minsg = min_semigroup(4);
        assert_eq!(all_idempotents(&minsg).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn noncommutative_fold_respects_index_order() {
        // left projection: a+b = a; the fold over H keeps the first entry
        let table: Vec<Vec<Elem>> = (0..4).map(|a| vec![a; 4]).collect();
        let sg = Semigroup::Table(FiniteSemigroup::total(table).unwrap());
        let seq = [2, 0, 3, 1];
        assert_eq!(index_sum(&seq, &h(&[2, 3]), &sg).unwrap(), Some(0));
        assert_eq!(index_sum(&seq, &h(&[1, 2, 3, 4]), &sg).unwrap(), Some(2));
        // a_H collapses to the first chosen entry, so repeats collide
        assert!(!is_proper(&[2, 0, 2], &sg).unwrap().is_proper());
    }

    #[test]
    fn rejects_non_associative_table() {
        // 2-element magma with a*b chosen to break associativity:
        // (0*0)*1 = 1*1 = 0 but 0*(0*1) = 0*1 = 1.
        let bad = FiniteSemigroup::total(vec![vec![1, 1], vec![1, 0]]);
        assert!(matches!(bad, Err(SemigroupError::NotAssociative { .. })));
    }

    #[test]
    fn partial_table_associativity_only_where_defined() {
        // {0,1} with op defined only on (0,0) -> 1; all products of
        // defined pairs undefined, so the partial law holds.
        let sg = FiniteSemigroup::new(
            vec![vec![Some(1), None], vec![None, None]],
            true,
            None,
        );
        assert!(sg.is_ok());
    }

    #[test]
    fn spec_roundtrip() {
        let sg = cyclic_semigroup(3);
        let spec = SemigroupSpec::of(&sg);
        let json = serde_json::to_string(&spec).unwrap();
        let back: SemigroupSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build().unwrap(), sg);

        let nat_spec: SemigroupSpec =
            serde_json::from_str(r#"{"naturals": {"bound": 100, "op": "add"}}"#).unwrap();
        assert_eq!(nat_spec.build().unwrap(), nat(100));
    }
}
