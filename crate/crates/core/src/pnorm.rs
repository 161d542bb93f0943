//! The theory parameter `p`: a real number `p >= 1` or the distinguished
//! value infinity (max-norm), never represented as a large float.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PNorm {
    Finite(f64),
    Infinity,
}

impl PNorm {
    pub const TWO: PNorm = PNorm::Finite(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            return Ok(PNorm::Infinity);
        }
        if !p.is_finite() || p < 1.0 {
            return Err(domain(format!("p must be >= 1 or inf, got {p}")));
        }
        Ok(PNorm::Finite(p))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, PNorm::Infinity)
    }

    /// `1/p`, which is `0` at infinity.
    pub fn reciprocal(&self) -> f64 {
        match self {
            PNorm::Finite(p) => 1.0 / p,
            PNorm::Infinity => 0.0,
        }
    }

    /// `base^(1/p)`; equals `1` at infinity for positive bases.
    pub fn root(&self, base: f64) -> f64 {
        base.powf(self.reciprocal())
    }

    /// `sum_j |v_j|^p`, or `max_j |v_j|` at infinity.
    pub fn power_sum<I: IntoIterator<Item = f64>>(&self, values: I) -> f64 {
        match self {
            PNorm::Finite(p) => values.into_iter().map(|v| v.abs().powf(*p)).sum(),
            PNorm::Infinity => values.into_iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// The p-norm `(sum |v|^p)^(1/p)`, or the max-norm at infinity.
    pub fn norm<I: IntoIterator<Item = f64>>(&self, values: I) -> f64 {
        match self {
            PNorm::Finite(p) => {
                let values: Vec<f64> = values.into_iter().map(f64::abs).collect();
                let max = values.iter().cloned().fold(0.0, f64::max);
                if max == 0.0 {
                    return 0.0;
                }
                // factor out the max so huge p does not underflow
                let s: f64 = values.iter().map(|v| (v / max).powf(*p)).sum();
                max * s.powf(1.0 / p)
            }
            PNorm::Infinity => values.into_iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::Finite(p) => write!(f, "{p}"),
            PNorm::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for PNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(PNorm::Infinity);
        }
        let p: f64 = t.parse().map_err(|_| Error::Parse(format!("expected a number >= 1 or 'inf', got '{s}'")))?;
        PNorm::new(p)
    }
}

impl Serialize for PNorm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PNorm::Finite(p) => serializer.serialize_f64(*p),
            PNorm::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PNorm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(p) => PNorm::new(p).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_inf_token() {
        assert_eq!("inf".parse::<PNorm>().unwrap(), PNorm::Infinity);
        assert_eq!("2".parse::<PNorm>().unwrap(), PNorm::Finite(2.0));
        assert!("0.5".parse::<PNorm>().is_err());
        assert!("abc".parse::<PNorm>().is_err());
    }

    #[test]
    fn infinity_is_max_norm() {
        let v = [0.3, -0.9, 0.5];
        assert_eq!(PNorm::Infinity.power_sum(v), 0.9);
        assert_eq!(PNorm::Infinity.norm(v), 0.9);
        assert_eq!(PNorm::Infinity.root(7.0), 1.0);
    }

    #[test]
    fn large_p_norm_does_not_underflow() {
        let n = PNorm::Finite(10000.0).norm([0.6, 0.8]);
        assert!((n - 0.8).abs() < 1e-3 && n >= 0.8);
    }

    #[test]
    fn serde_round_trip() {
        let s = serde_json::to_string(&PNorm::Infinity).unwrap();
        assert_eq!(s, "\"inf\"");
        assert_eq!(serde_json::from_str::<PNorm>("3").unwrap(), PNorm::Finite(3.0));
        assert_eq!(serde_json::from_str::<PNorm>(&s).unwrap(), PNorm::Infinity);
    }
}
