//! Colorings of `m`-element subsets of a finite universe.
//!
//! A coloring is total on its arity: every `m`-set of carrier elements
//! gets a color in `1..=k`. Besides explicit edge lists, a few named
//! generators are supported so large universes never need a materialized
//! map: `const` (one color), `parity` (parity of the edge sum), `mod:q`
//! (edge sum mod q), and `random:SEED` (seeded hash, stable across runs).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::semigroup::Elem;

pub type Color = u32;

#[derive(Debug, Error)]
pub enum ColoringError {
    #[error("edge {0:?} has arity {1}, expected {2}")]
    ArityMismatch(Vec<Elem>, usize, usize),
    #[error("edge {0:?} repeats an element; colorings are defined on sets")]
    NotASet(Vec<Elem>),
    #[error("explicit coloring has no entry for edge {0:?}")]
    MissingEdge(Vec<Elem>),
    #[error("color {0} outside 1..={1}")]
    ColorOutOfRange(Color, Color),
    #[error("cannot parse coloring spec {0:?}")]
    BadSpec(String),
}

/// Deterministic 64-bit mixer; the only randomness source in the crate.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Hash a sorted edge together with a seed; basis for `random` colorings.
fn edge_hash(seed: u64, edge: &[Elem]) -> u64 {
    let mut acc = splitmix64(seed ^ 0x517c_c1b7_2722_0a95);
    for &e in edge {
        acc = splitmix64(acc ^ e);
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColoringRule {
    /// Everything gets color 1.
    Const,
    /// Color 1 if the sum of the edge is even, else 2.
    Parity,
    /// Color `1 + (sum mod q)`.
    Mod { q: u32 },
    /// Seeded hash into `1..=k`.
    Random { seed: u64, k: Color },
    /// Explicit assignment; the map key is the sorted edge.
    Explicit { k: Color, edges: BTreeMap<Vec<Elem>, Color> },
}

/// A total k-coloring of the m-element subsets of the carrier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub arity: usize,
    rule: ColoringRule,
}

impl Coloring {
    pub fn constant(arity: usize) -> Self {
        Coloring { arity, rule: ColoringRule::Const }
    }

    pub fn parity(arity: usize) -> Self {
        Coloring { arity, rule: ColoringRule::Parity }
    }

    pub fn modular(arity: usize, q: u32) -> Self {
        assert!(q >= 1);
        Coloring { arity, rule: ColoringRule::Mod { q } }
    }

    pub fn random(arity: usize, k: Color, seed: u64) -> Self {
        assert!(k >= 1);
        Coloring { arity, rule: ColoringRule::Random { seed, k } }
    }

    pub fn explicit(
        arity: usize,
        k: Color,
        entries: impl IntoIterator<Item = (Vec<Elem>, Color)>,
    ) -> Result<Self, ColoringError> {
        let mut edges = BTreeMap::new();
        for (mut edge, c) in entries {
            edge.sort_unstable();
            edge.dedup();
            if edge.len() != arity {
                return Err(ColoringError::ArityMismatch(edge.clone(), edge.len(), arity));
            }
            if c < 1 || c > k {
                return Err(ColoringError::ColorOutOfRange(c, k));
            }
            edges.insert(edge, c);
        }
        Ok(Coloring { arity, rule: ColoringRule::Explicit { k, edges } })
    }

    pub fn colors(&self) -> Color {
        match &self.rule {
            ColoringRule::Const => 1,
            ColoringRule::Parity => 2,
            ColoringRule::Mod { q } => *q,
            ColoringRule::Random { k, .. } => *k,
            ColoringRule::Explicit { k, .. } => *k,
        }
    }

    /// Color of an m-set given as a slice (any order, no repeats).
    pub fn color(&self, edge: &[Elem]) -> Result<Color, ColoringError> {
        let mut sorted = edge.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != edge.len() {
            return Err(ColoringError::NotASet(edge.to_vec()));
        }
        if sorted.len() != self.arity {
            return Err(ColoringError::ArityMismatch(sorted, edge.len(), self.arity));
        }
        match &self.rule {
            ColoringRule::Const => Ok(1),
            ColoringRule::Parity => {
                let s: Elem = sorted.iter().sum();
                Ok(1 + (s % 2) as Color)
            }
            ColoringRule::Mod { q } => {
                let s: Elem = sorted.iter().sum();
                Ok(1 + (s % *q as Elem) as Color)
            }
            ColoringRule::Random { seed, k } => {
                Ok(1 + (edge_hash(*seed, &sorted) % *k as u64) as Color)
            }
            ColoringRule::Explicit { edges, .. } => {
                edges.get(&sorted).copied().ok_or(ColoringError::MissingEdge(sorted))
            }
        }
    }

    /// Parses the CLI spec syntax: `const`, `parity`, `mod:q`,
    /// `random:SEED` (k supplied separately), or inline JSON.
    pub fn parse_spec(spec: &str, arity: usize, k: Color) -> Result<Self, ColoringError> {
        if spec.trim_start().starts_with('{') {
            let parsed: ColoringFile = serde_json::from_str(spec)
                .map_err(|_| ColoringError::BadSpec(spec.to_string()))?;
            return parsed.build();
        }
        match spec.split(':').collect::<Vec<_>>().as_slice() {
            ["const"] => Ok(Self::constant(arity)),
            ["parity"] => Ok(Self::parity(arity)),
            ["mod", q] => {
                let q: u32 = q.parse().map_err(|_| ColoringError::BadSpec(spec.into()))?;
                if q == 0 {
                    return Err(ColoringError::BadSpec(spec.into()));
                }
                Ok(Self::modular(arity, q))
            }
            ["random", seed] => {
                let seed: u64 = seed.parse().map_err(|_| ColoringError::BadSpec(spec.into()))?;
                Ok(Self::random(arity, k.max(1), seed))
            }
            _ => Err(ColoringError::BadSpec(spec.to_string())),
        }
    }
}

/// JSON file format: `{"m": 2, "k": 2, "edges": [[[1,2],1], ...]}` or
/// `{"m": 2, "k": 2, "rule": {...}}` for a named generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColoringFile {
    pub m: usize,
    pub k: Color,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(Vec<Elem>, Color)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<ColoringRule>,
}

impl ColoringFile {
    pub fn build(&self) -> Result<Coloring, ColoringError> {
        match (&self.edges, &self.rule) {
            (Some(edges), _) => Coloring::explicit(self.m, self.k, edges.iter().cloned()),
            (None, Some(rule)) => Ok(Coloring { arity: self.m, rule: rule.clone() }),
            (None, None) => Err(ColoringError::BadSpec("no edges and no rule".into())),
        }
    }

    pub fn of(c: &Coloring) -> Self {
        ColoringFile { m: c.arity, k: c.colors(), edges: None, rule: Some(c.rule.clone()) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_colors() {
        let c = Coloring::parity(2);
        assert_eq!(c.color(&[1, 3]).unwrap(), 1); // 4 even
        assert_eq!(c.color(&[1, 2]).unwrap(), 2); // 3 odd
        assert_eq!(c.color(&[3, 1]).unwrap(), 1); // order-insensitive
    }

    #[test]
    fn random_is_deterministic() {
        let a = Coloring::random(2, 3, 42);
        let b = Coloring::random(2, 3, 42);
        for x in 1..20u64 {
            for y in (x + 1)..20 {
                assert_eq!(a.color(&[x, y]).unwrap(), b.color(&[x, y]).unwrap());
                let c = a.color(&[x, y]).unwrap();
                assert!((1..=3).contains(&c));
            }
        }
    }

    #[test]
    fn arity_is_enforced() {
        let c = Coloring::parity(2);
        assert!(matches!(c.color(&[1]), Err(ColoringError::ArityMismatch(..))));
        assert!(matches!(c.color(&[1, 1]), Err(ColoringError::NotASet(..))));
    }

    #[test]
    fn explicit_lookup() {
        let c = Coloring::explicit(2, 2, [(vec![2, 1], 1), (vec![1, 3], 2)]).unwrap();
        assert_eq!(c.color(&[1, 2]).unwrap(), 1);
        assert_eq!(c.color(&[3, 1]).unwrap(), 2);
        assert!(matches!(c.color(&[2, 3]), Err(ColoringError::MissingEdge(_))));
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(Coloring::parse_spec("parity", 2, 2).unwrap(), Coloring::parity(2));
        assert_eq!(Coloring::parse_spec("mod:3", 1, 3).unwrap(), Coloring::modular(1, 3));
        assert_eq!(
            Coloring::parse_spec("random:7", 2, 3).unwrap(),
            Coloring::random(2, 3, 7)
        );
        assert!(Coloring::parse_spec("nope", 2, 2).is_err());
    }
}
