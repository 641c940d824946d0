use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, PointOnGraph};

/// A finite formal integer combination of points. Zero coefficients are
/// never stored, so structural equality is divisor equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Divisor {
    support: BTreeMap<PointOnGraph, i64>,
}

impl Divisor {
    pub fn zero() -> Self {
        Divisor::default()
    }

    pub fn point(p: PointOnGraph, coefficient: i64) -> Self {
        let mut d = Divisor::zero();
        d.add(p, coefficient);
        d
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (PointOnGraph, i64)>) -> Self {
        let mut d = Divisor::zero();
        for (p, c) in terms {
            d.add(p, c);
        }
        d
    }

    pub fn add(&mut self, p: PointOnGraph, coefficient: i64) {
        if coefficient == 0 {
            return;
        }
        match self.support.entry(p) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += coefficient;
                if *o.get() == 0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(coefficient);
            }
        }
    }

    pub fn coefficient(&self, p: &PointOnGraph) -> i64 {
        self.support.get(p).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.support.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_effective(&self) -> bool {
        self.support.values().all(|&c| c >= 0)
    }

    /// Effective away from `base`.
    pub fn is_effective_outside(&self, base: &PointOnGraph) -> bool {
        self.support.iter().all(|(p, &c)| c >= 0 || p == base)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PointOnGraph, i64)> {
        self.support.iter().map(|(p, c)| (p, *c))
    }

    pub fn support(&self) -> impl Iterator<Item = &PointOnGraph> {
        self.support.keys()
    }

    pub fn negated(&self) -> Divisor {
        Divisor {
            support: self.support.iter().map(|(p, c)| (p.clone(), -c)).collect(),
        }
    }

    pub fn plus(&self, other: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, c) in other.terms() {
            out.add(p.clone(), c);
        }
        out
    }

    pub fn minus(&self, other: &Divisor) -> Divisor {
        self.plus(&other.negated())
    }

    pub fn check_on(&self, graph: &MetricGraph) -> Result<()> {
        for p in self.support.keys() {
            graph.check_point(p)?;
        }
        Ok(())
    }

    /// Renders `2*(P) + 1*(e1@1/3) - 1*(Q)`; the zero divisor renders as `0`.
    pub fn display<'a>(&'a self, graph: &'a MetricGraph) -> DivisorDisplay<'a> {
        DivisorDisplay {
            divisor: self,
            graph,
        }
    }

    /// Parses a signed sum of `c*(point)` terms. A coefficient may be
    /// omitted (`(P)` means `1*(P)`), and the keyword `K` expands to the
    /// canonical divisor of `graph`, optionally scaled as `c*K`.
    pub fn parse(text: &str, graph: &MetricGraph) -> Result<Divisor> {
        let mut out = Divisor::zero();
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(Error::Parse("empty divisor".into()));
        }
        if cleaned == "0" {
            return Ok(out);
        }
        let bytes = cleaned.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let mut sign = 1i64;
            if bytes[i] == b'+' || bytes[i] == b'-' {
                if bytes[i] == b'-' {
                    sign = -1;
                }
                i += 1;
            } else if i > 0 {
                return Err(Error::Parse(format!("expected + or - at position {i} in {text:?}")));
            }
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let mut coeff: i64 = 1;
            if i > start {
                coeff = cleaned[start..i]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad coefficient in {text:?}")))?;
                if i < bytes.len() && bytes[i] == b'*' {
                    i += 1;
                } else if i >= bytes.len() || bytes[i] != b'(' && bytes[i] != b'K' {
                    return Err(Error::Parse(format!("expected `*` after coefficient in {text:?}")));
                }
            }
            if i < bytes.len() && bytes[i] == b'K' {
                i += 1;
                for (p, c) in graph.canonical_divisor().terms() {
                    out.add(p.clone(), sign * coeff * c);
                }
                continue;
            }
            if i >= bytes.len() || bytes[i] != b'(' {
                return Err(Error::Parse(format!("expected `(` in {text:?}")));
            }
            let close = cleaned[i..]
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unclosed `(` in {text:?}")))?
                + i;
            let point = graph.parse_point(&cleaned[i + 1..close])?;
            out.add(point, sign * coeff);
            i = close + 1;
        }
        Ok(out)
    }
}

pub struct DivisorDisplay<'a> {
    divisor: &'a Divisor,
    graph: &'a MetricGraph,
}

impl fmt::Display for DivisorDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.divisor.is_zero() {
            return write!(f, "0");
        }
        for (i, (p, c)) in self.divisor.terms().enumerate() {
            let name = self.graph.point_name(p);
            match (i, c < 0) {
                (0, false) => write!(f, "{c}*({name})")?,
                (0, true) => write!(f, "-{}*({name})", -c)?,
                (_, false) => write!(f, " + {c}*({name})")?,
                (_, true) => write!(f, " - {}*({name})", -c)?,
            }
        }
        Ok(())
    }
}
