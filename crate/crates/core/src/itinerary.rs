//! Symbols, finite paths and a few infinite symbol streams.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::WallSide;

/// Which homoclinic connection a passage follows: `Gamma1` leaves through the
/// top cap, `Gamma2` through the bottom cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Gamma1,
    Gamma2,
}

impl Symbol {
    pub fn from_side(side: WallSide) -> Option<Self> {
        match side {
            WallSide::Plus => Some(Symbol::Gamma1),
            WallSide::Minus => Some(Symbol::Gamma2),
            WallSide::Stable => None,
        }
    }

    /// Symbol emitted by a passage starting at height `y`.
    pub fn from_height(y: f64) -> Option<Self> {
        if y > 0.0 {
            Some(Symbol::Gamma1)
        } else if y < 0.0 {
            Some(Symbol::Gamma2)
        } else {
            None
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            Symbol::Gamma1 => Symbol::Gamma2,
            Symbol::Gamma2 => Symbol::Gamma1,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::Gamma1 => '1',
            Symbol::Gamma2 => '2',
        }
    }

    /// `+1` for the top branch, `-1` for the bottom one.
    pub fn sign(self) -> f64 {
        match self {
            Symbol::Gamma1 => 1.0,
            Symbol::Gamma2 => -1.0,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "1" => Ok(Symbol::Gamma1),
            "2" => Ok(Symbol::Gamma2),
            other => Err(serde::de::Error::custom(format!("unknown symbol {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid path {0:?}: symbols must be '1' or '2'")]
pub struct ParsePathError(pub String);

/// Finite word over `{1, 2}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ItineraryPath(Vec<Symbol>);

impl ItineraryPath {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Self(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    /// Prefix order: `self` is inside `other` when `other` starts with `self`.
    pub fn is_prefix_of(&self, other: &ItineraryPath) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn prefix(&self, k: usize) -> ItineraryPath {
        Self(self.0[..k.min(self.0.len())].to_vec())
    }

    pub fn swapped(&self) -> ItineraryPath {
        Self(self.0.iter().map(|s| s.swapped()).collect())
    }

    /// Number of adjacent positions with different symbols.
    pub fn switches(&self) -> usize {
        self.0.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// All `2^k` words of order `k`, in lexicographic order.
    pub fn all_of_order(k: usize) -> Vec<ItineraryPath> {
        (0..1usize << k)
            .map(|bits| {
                Self(
                    (0..k)
                        .map(|i| {
                            if bits >> (k - 1 - i) & 1 == 0 {
                                Symbol::Gamma1
                            } else {
                                Symbol::Gamma2
                            }
                        })
                        .collect(),
                )
            })
            .collect()
    }
}

impl fmt::Display for ItineraryPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for ItineraryPath {
    type Err = ParsePathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '1' => Ok(Symbol::Gamma1),
                '2' => Ok(Symbol::Gamma2),
                _ => Err(ParsePathError(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

impl FromIterator<Symbol> for ItineraryPath {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl Serialize for ItineraryPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ItineraryPath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Named infinite streams used by the CLI and the acceptance suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamKind {
    Constant,
    Alternating,
    ThueMorse,
}

impl StreamKind {
    pub fn symbols(self) -> Box<dyn Iterator<Item = Symbol> + Send> {
        match self {
            StreamKind::Constant => Box::new(std::iter::repeat(Symbol::Gamma1)),
            StreamKind::Alternating => Box::new((0u64..).map(|n| {
                if n % 2 == 0 {
                    Symbol::Gamma1
                } else {
                    Symbol::Gamma2
                }
            })),
            StreamKind::ThueMorse => Box::new((0u64..).map(|n| {
                if n.count_ones() % 2 == 0 {
                    Symbol::Gamma1
                } else {
                    Symbol::Gamma2
                }
            })),
        }
    }
}

impl FromStr for StreamKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "constant" => Ok(StreamKind::Constant),
            "alternating" => Ok(StreamKind::Alternating),
            "thue-morse" => Ok(StreamKind::ThueMorse),
            _ => Err(format!("unknown stream {s:?} (constant, alternating, thue-morse)")),
        }
    }
}
