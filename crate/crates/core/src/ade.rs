//! ADE labels, Dynkin recognition and discriminant groups.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::{dot, IntVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ade {
    A(u8),
    D(u8),
    E(u8),
}

impl Ade {
    pub fn rank(&self) -> usize {
        match *self {
            Ade::A(n) | Ade::D(n) | Ade::E(n) => n as usize,
        }
    }

    fn letter_rank(&self) -> u8 {
        match self {
            Ade::E(_) => 0,
            Ade::D(_) => 1,
            Ade::A(_) => 2,
        }
    }

    /// Invariant factors of the discriminant group.
    pub fn discriminant(&self) -> Vec<i64> {
        match *self {
            Ade::A(n) => vec![n as i64 + 1],
            Ade::D(n) if n % 2 == 1 => vec![4],
            Ade::D(_) => vec![2, 2],
            Ade::E(6) => vec![3],
            Ade::E(7) => vec![2],
            Ade::E(_) => vec![],
        }
    }

    /// Order of the binary polyhedral group with this quotient singularity.
    pub fn local_group_order(&self) -> usize {
        match *self {
            Ade::A(n) => n as usize + 1,
            Ade::D(n) => 4 * (n as usize - 2),
            Ade::E(6) => 24,
            Ade::E(7) => 48,
            Ade::E(_) => 120,
        }
    }

    /// Simply laced label from an A/D/E letter and rank, normalizing small coincidences.
    pub fn new(letter: char, n: u8) -> Result<Ade> {
        match (letter, n) {
            ('A', n) if n >= 1 => Ok(Ade::A(n)),
            ('D', 3) => Ok(Ade::A(3)),
            ('D', n) if n >= 4 => Ok(Ade::D(n)),
            ('E', 6..=8) => Ok(Ade::E(n)),
            _ => Err(Error::Parse(format!("no Dynkin type {letter}{n}"))),
        }
    }
}

impl Ord for Ade {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.letter_rank()
            .cmp(&other.letter_rank())
            .then(other.rank().cmp(&self.rank()))
    }
}

impl PartialOrd for Ade {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ade::A(n) => write!(f, "A{n}"),
            Ade::D(n) => write!(f, "D{n}"),
            Ade::E(n) => write!(f, "E{n}"),
        }
    }
}

impl FromStr for Ade {
    type Err = Error;
    fn from_str(s: &str) -> Result<Ade> {
        let mut ch = s.chars();
        let letter = ch.next().ok_or_else(|| Error::Parse("empty component".into()))?;
        let n: u8 = ch.as_str().parse().map_err(|_| Error::Parse(format!("bad component {s}")))?;
        Ade::new(letter, n)
    }
}

/// Multiset of components, kept sorted (E before D before A, larger rank first).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct AdeType(pub Vec<Ade>);

impl AdeType {
    pub fn new(mut v: Vec<Ade>) -> Self {
        v.sort();
        AdeType(v)
    }

    pub fn rank(&self) -> usize {
        self.0.iter().map(|c| c.rank()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, c: Ade) -> usize {
        self.0.iter().filter(|&&x| x == c).count()
    }
}

impl fmt::Display for AdeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let mut j = i;
            while j < self.0.len() && self.0[j] == self.0[i] {
                j += 1;
            }
            if j - i > 1 {
                parts.push(format!("{}{}", j - i, self.0[i]));
            } else {
                parts.push(self.0[i].to_string());
            }
            i = j;
        }
        write!(f, "{}", parts.join("+"))
    }
}

impl FromStr for AdeType {
    type Err = Error;
    fn from_str(s: &str) -> Result<AdeType> {
        let mut v = Vec::new();
        if s.is_empty() {
            return Ok(AdeType::default());
        }
        for part in s.split('+') {
            let split = part
                .find(|c: char| c.is_ascii_alphabetic())
                .ok_or_else(|| Error::Parse(format!("bad component {part}")))?;
            let mult: usize = if split == 0 {
                1
            } else {
                part[..split].parse().map_err(|_| Error::Parse(format!("bad multiplicity in {part}")))?
            };
            if mult == 0 {
                return Err(Error::Parse(format!("zero multiplicity in {part}")));
            }
            let c: Ade = part[split..].parse()?;
            v.extend(std::iter::repeat(c).take(mult));
        }
        Ok(AdeType::new(v))
    }
}

/// A connected Dynkin component with its simple roots in standard order.
///
/// A_n: the path. D_n: the long arm ending at the branch vertex, then the two
/// short legs. E_n: 1-3-4-5-.. with 2 attached at 4.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub label: Ade,
    pub roots: Vec<IntVector>,
}

/// Split a simple system into Dynkin components in standard order.
pub fn recognize(simple: &[IntVector]) -> Result<Vec<Component>> {
    let n = simple.len();
    for (i, u) in simple.iter().enumerate() {
        if dot(u, u) != -2 {
            return Err(Error::Domain(format!("root {i} has self-intersection {}", dot(u, u))));
        }
        for v in &simple[i + 1..] {
            let p = dot(u, v);
            if p != 0 && p != 1 {
                return Err(Error::Domain(format!("simple roots pair to {p}")));
            }
        }
    }
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && dot(&simple[i], &simple[j]) == 1).collect())
        .collect();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut k = 0;
        while k < comp.len() {
            for &j in &adj[comp[k]] {
                if !seen[j] {
                    seen[j] = true;
                    comp.push(j);
                }
            }
            k += 1;
        }
        let (order, label) = order_component(&comp, &adj)?;
        out.push(Component { label, roots: order.iter().map(|&i| simple[i].clone()).collect() });
    }
    out.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(out)
}

/// Arrange the vertices of a connected Dynkin diagram in standard order.
fn order_component(comp: &[usize], adj: &[Vec<usize>]) -> Result<(Vec<usize>, Ade)> {
    let edges: usize = comp.iter().map(|&i| adj[i].len()).sum::<usize>() / 2;
    if edges + 1 != comp.len() {
        return Err(Error::Domain("root configuration contains a cycle".into()));
    }
    let branches: Vec<usize> = comp.iter().copied().filter(|&i| adj[i].len() >= 3).collect();
    if branches.is_empty() {
        let start = *comp.iter().find(|&&i| adj[i].len() <= 1).unwrap();
        let mut path = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        while let Some(&nx) = adj[cur].iter().find(|&&j| j != prev) {
            path.push(nx);
            prev = cur;
            cur = nx;
        }
        let n = path.len() as u8;
        return Ok((path, Ade::A(n)));
    }
    if branches.len() > 1 || adj[branches[0]].len() > 3 {
        return Err(Error::Domain("not a Dynkin diagram".into()));
    }
    let b = branches[0];
    // arms from the branch vertex outward
    let mut arms: Vec<Vec<usize>> = adj[b]
        .iter()
        .map(|&first| {
            let mut arm = vec![first];
            let mut prev = b;
            let mut cur = first;
            while let Some(&nx) = adj[cur].iter().find(|&&j| j != prev) {
                arm.push(nx);
                prev = cur;
                cur = nx;
            }
            arm
        })
        .collect();
    arms.sort_by_key(|a| a.len());
    let lens: Vec<usize> = arms.iter().map(|a| a.len()).collect();
    match lens.as_slice() {
        [1, 1, _] => {
            let mut order: Vec<usize> = arms[2].iter().rev().copied().collect();
            order.push(b);
            order.push(arms[0][0]);
            order.push(arms[1][0]);
            let n = order.len() as u8;
            Ok((order, Ade::new('D', n)?))
        }
        [1, 2, k] if (2..=4).contains(k) => {
            // 1 - 3 - 4 - 5 ..., 2 attached to 4
            let mut order = vec![arms[1][1], arms[0][0], arms[1][0], b];
            order.extend(arms[2].iter().copied());
            let n = order.len() as u8;
            Ok((order, Ade::new('E', n)?))
        }
        _ => Err(Error::Domain(format!("arm lengths {lens:?} are not of Dynkin type"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in ["E6+A2", "D4+3A1", "2A3+A1", "A5+A2+A1", "4A2", "D6+2A1", "2D4", "A7+A1"] {
            let t: AdeType = s.parse().unwrap();
            assert_eq!(t.to_string(), s);
        }
        let t: AdeType = "A1+A3+A1".parse().unwrap();
        assert_eq!(t.to_string(), "A3+2A1");
    }

    #[test]
    fn discriminants() {
        assert_eq!(Ade::A(4).discriminant(), vec![5]);
        assert_eq!(Ade::D(5).discriminant(), vec![4]);
        assert_eq!(Ade::D(6).discriminant(), vec![2, 2]);
        assert_eq!(Ade::E(8).discriminant(), Vec::<i64>::new());
    }
}
