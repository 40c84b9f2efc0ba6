//! Cremona isometry groups as automorphism groups of dual graphs.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use log::warn;
use num_rational::Rational64;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{rank, solve_rational, AbelianGroupInvariants, IntVector};
use crate::types::{DualGraph, SurfaceType, VertexKind};

/// A permutation of `0..n`; `compose(p, q)` applies `q` first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn compose(&self, q: &Permutation) -> Permutation {
        Permutation(q.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut v = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            v[j] = i;
        }
        Permutation(v)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn order(&self) -> usize {
        let mut seen = vec![false; self.0.len()];
        let mut l = 1usize;
        for s in 0..self.0.len() {
            if seen[s] {
                continue;
            }
            let mut c = 0;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = self.0[x];
                c += 1;
            }
            l = num_integer::lcm(l, c);
        }
        l
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] == i).collect()
    }

    /// Nontrivial cycles in canonical order.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for s in 0..self.0.len() {
            if seen[s] || self.0[s] == s {
                continue;
            }
            let mut c = Vec::new();
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                c.push(x);
                x = self.0[x];
            }
            out.push(c);
        }
        out
    }

    /// Disjoint-cycle notation over vertex labels, e.g. `(1,4)(2,3)`.
    pub fn to_cycle_string(&self, labels: &[String]) -> String {
        let s: String = self
            .cycles()
            .iter()
            .map(|c| format!("({})", c.iter().map(|&i| labels[i].as_str()).collect::<Vec<_>>().join(",")))
            .collect();
        if s.is_empty() {
            "()".into()
        } else {
            s
        }
    }

    /// Parse disjoint-cycle notation over the given labels.
    pub fn parse_cycles(s: &str, labels: &[String]) -> Result<Permutation> {
        let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut p: Vec<usize> = (0..labels.len()).collect();
        let mut touched = HashSet::new();
        for cyc in s.split(')').map(str::trim).filter(|c| !c.is_empty()) {
            let body = cyc.strip_prefix('(').ok_or_else(|| Error::Parse(format!("bad cycle in {s}")))?;
            let pts = body
                .split(',')
                .map(|x| index.get(x.trim()).copied().ok_or_else(|| Error::Parse(format!("unknown label {x:?}"))))
                .collect::<Result<Vec<usize>>>()?;
            for (k, &a) in pts.iter().enumerate() {
                if !touched.insert(a) {
                    return Err(Error::Parse(format!("label {} repeated in {s}", labels[a])));
                }
                p[a] = pts[(k + 1) % pts.len()];
            }
        }
        Ok(Permutation(p))
    }
}

/// Largest group whose elements are materialized.
pub const ELEMENT_LIMIT: u128 = 200_000;

/// Finite permutation group. Elements are materialized (sorted) up to
/// [`ELEMENT_LIMIT`]; beyond that only generators and the order are kept.
#[derive(Clone, Debug)]
pub struct PermGroup {
    pub degree: usize,
    pub generators: Vec<Permutation>,
    pub elements: Vec<Permutation>,
    order: u128,
}

impl PermGroup {
    pub fn trivial(n: usize) -> Self {
        PermGroup { degree: n, generators: Vec::new(), elements: vec![Permutation::identity(n)], order: 1 }
    }

    /// Closure of a generating set (must be small enough to materialize).
    pub fn generate(n: usize, generators: Vec<Permutation>) -> Self {
        let generators: Vec<Permutation> = generators.into_iter().filter(|g| !g.is_identity()).collect();
        let mut set: HashSet<Permutation> = HashSet::new();
        let id = Permutation::identity(n);
        set.insert(id.clone());
        let mut frontier = vec![id];
        while let Some(x) = frontier.pop() {
            for g in &generators {
                let y = g.compose(&x);
                if set.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        let mut elements: Vec<Permutation> = set.into_iter().collect();
        elements.sort();
        let order = elements.len() as u128;
        PermGroup { degree: n, generators, elements, order }
    }

    pub fn from_elements(n: usize, mut elements: Vec<Permutation>) -> Self {
        elements.sort();
        elements.dedup();
        let generators = small_generating_set(n, &elements);
        let order = elements.len() as u128;
        PermGroup { degree: n, generators, elements, order }
    }

    fn unmaterialized(n: usize, generators: Vec<Permutation>, order: u128) -> Self {
        PermGroup { degree: n, generators, elements: Vec::new(), order }
    }

    pub fn order(&self) -> u128 {
        self.order
    }

    pub fn is_materialized(&self) -> bool {
        self.elements.len() as u128 == self.order
    }

    fn require_elements(&self) -> Result<&[Permutation]> {
        if self.is_materialized() {
            Ok(&self.elements)
        } else {
            Err(Error::Refused(format!("group of order {} is too large to list", self.order)))
        }
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.elements.binary_search(p).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &PermGroup) -> bool {
        self.generators.iter().all(|g| other.contains(g))
    }

    pub fn conjugate(&self, g: &Permutation) -> PermGroup {
        let gi = g.inverse();
        let elements = self.elements.iter().map(|h| g.compose(h).compose(&gi)).collect();
        let mut out = PermGroup::from_elements(self.degree, elements);
        out.generators = self.generators.iter().map(|h| g.compose(h).compose(&gi)).collect();
        out
    }

    pub fn is_abelian(&self) -> bool {
        self.generators
            .iter()
            .all(|a| self.generators.iter().all(|b| a.compose(b) == b.compose(a)))
    }

    /// Image under restriction to an invariant block of points, renumbered in order.
    pub fn restrict(&self, points: &[usize]) -> PermGroup {
        let pos: HashMap<usize, usize> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let r = |g: &Permutation| Permutation(points.iter().map(|&p| pos[&g.apply(p)]).collect());
        let elements = self.elements.iter().map(r).collect();
        PermGroup::from_elements(points.len(), elements)
    }

    /// Best-effort isomorphism label, `G<order>` when unrecognized.
    pub fn name(&self) -> String {
        if self.order > 2048 || !self.is_materialized() {
            return format!("G{}", self.order);
        }
        group_name(&self.elements)
    }
}

fn small_generating_set(n: usize, elements: &[Permutation]) -> Vec<Permutation> {
    let mut gens: Vec<Permutation> = Vec::new();
    let mut span: HashSet<Permutation> = HashSet::new();
    span.insert(Permutation::identity(n));
    // larger orders first keeps generating sets short
    let mut order: Vec<&Permutation> = elements.iter().collect();
    order.sort_by_key(|p| (std::cmp::Reverse(p.order()), (*p).clone()));
    for g in order {
        if span.len() == elements.len() {
            break;
        }
        if span.contains(g) {
            continue;
        }
        gens.push(g.clone());
        span = PermGroup::generate(n, gens.clone()).elements.into_iter().collect();
    }
    gens
}

/// Best-effort isomorphism label; equality of groups is never decided by name.
pub fn group_name(elements: &[Permutation]) -> String {
    let n = elements.len();
    if n == 1 {
        return "C1".into();
    }
    let orders: Vec<usize> = elements.iter().map(|e| e.order()).collect();
    let count = |k: usize| orders.iter().filter(|&&o| o == k).count();
    let abelian = elements.iter().all(|a| elements.iter().all(|b| a.compose(b) == b.compose(a)));
    if abelian {
        return abelian_invariants(&orders).to_string();
    }
    let max = *orders.iter().max().unwrap();
    let inv = count(2);
    let center = elements.iter().filter(|a| elements.iter().all(|b| a.compose(b) == b.compose(a))).count();
    if n % 2 == 0 && max == n / 2 {
        let m = n / 2;
        let outside_involutions = if m % 2 == 0 { inv - 1 } else { inv };
        if outside_involutions == m {
            return if m == 3 { "S3".into() } else { format!("D{m}") };
        }
    }
    match (n, inv, count(3), count(4), center) {
        (8, 1, _, _, _) => "Q8".into(),
        (12, 3, 8, 0, 1) => "A4".into(),
        (24, 9, 8, 6, 1) => "S4".into(),
        (16, 11, _, 4, 4) => "C2xD4".into(),
        (24, 7, 8, 0, 2) => "C2xA4".into(),
        (24, 15, 2, 0, 2) => "C2xD6".into(),
        (48, 19, 8, 12, 2) => "C2xS4".into(),
        (36, 15, 8, 0, 1) => "S3xS3".into(),
        (18, 3, 8, 0, 3) => "C3xS3".into(),
        (12, 1, 2, 6, 2) => "Dic3".into(),
        _ => format!("G{n}"),
    }
}

/// Invariant factors of an abelian group from its element orders.
fn abelian_invariants(orders: &[usize]) -> AbelianGroupInvariants {
    let mut prime_powers: Vec<i64> = Vec::new();
    let mut m = orders.len();
    let mut p = 2;
    while m > 1 {
        if m % p != 0 {
            p += 1;
            continue;
        }
        while m % p == 0 {
            m /= p;
        }
        // |G[p^k]| = p^(number of factors with exponent >= 1, .., k summed)
        let mut at_least = Vec::new();
        let mut prev = 1usize;
        let mut pk = p;
        loop {
            let c = orders.iter().filter(|&&o| pk % o == 0).count();
            if c == prev {
                break;
            }
            let mut r = c / prev;
            let mut l = 0;
            while r > 1 {
                r /= p;
                l += 1;
            }
            at_least.push(l);
            prev = c;
            pk *= p;
        }
        for (k, &cnt) in at_least.iter().enumerate() {
            let next = at_least.get(k + 1).copied().unwrap_or(0);
            for _ in next..cnt {
                prime_powers.push((p as i64).pow(k as u32 + 1));
            }
        }
        p += 1;
    }
    AbelianGroupInvariants::from_orders(&prime_powers)
}

/// Weighted graph with vertex colors, the input to automorphism search.
#[derive(Clone, Debug)]
pub struct ColoredGraph {
    pub weights: Vec<Vec<i64>>,
    pub colors: Vec<u64>,
}

impl ColoredGraph {
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Intersection matrix of a dual graph, colored by kind and self-intersection.
    pub fn from_dual(g: &DualGraph) -> ColoredGraph {
        let colors = g
            .vertices
            .iter()
            .map(|v| {
                let k = match v.kind {
                    VertexKind::Line => 0u64,
                    VertexKind::Node => 1,
                    VertexKind::Curve => 2,
                };
                (k << 32) | ((v.self_int + (1 << 16)) as u64)
            })
            .collect();
        ColoredGraph { weights: g.matrix(), colors }
    }
}

/// Joint color refinement of two colorings of graphs `a` and `b`, with
/// canonical color numbering so the results are comparable. `None` when the
/// color class sizes diverge (no color-preserving isomorphism exists).
fn refine_pair(a: &ColoredGraph, ca: &[u64], b: &ColoredGraph, cb: &[u64]) -> Option<(Vec<u64>, Vec<u64>)> {
    let mut ca = ca.to_vec();
    let mut cb = cb.to_vec();
    let classes = |c: &[u64]| c.iter().collect::<BTreeSet<_>>().len();
    loop {
        let sig = |g: &ColoredGraph, c: &[u64], i: usize| {
            let mut nb: Vec<(i64, u64)> =
                (0..g.len()).filter(|&j| j != i && g.weights[i][j] != 0).map(|j| (g.weights[i][j], c[j])).collect();
            nb.sort_unstable();
            (c[i], nb)
        };
        let sa: Vec<_> = (0..a.len()).map(|i| sig(a, &ca, i)).collect();
        let sb: Vec<_> = (0..b.len()).map(|i| sig(b, &cb, i)).collect();
        let mut all: Vec<_> = sa.iter().chain(sb.iter()).cloned().collect();
        all.sort();
        all.dedup();
        let id = |s: &(u64, Vec<(i64, u64)>)| all.binary_search(s).unwrap() as u64;
        let na: Vec<u64> = sa.iter().map(id).collect();
        let nb: Vec<u64> = sb.iter().map(id).collect();
        let mut ha: Vec<u64> = na.clone();
        let mut hb: Vec<u64> = nb.clone();
        ha.sort_unstable();
        hb.sort_unstable();
        if ha != hb {
            return None;
        }
        let done = classes(&na) == classes(&ca);
        ca = na;
        cb = nb;
        if done {
            return Some((ca, cb));
        }
    }
}

const PINNED: u64 = 1 << 63;

fn pin(colors: &[u64], pairs: &[usize]) -> Vec<u64> {
    let mut c = colors.to_vec();
    for (k, &v) in pairs.iter().enumerate() {
        c[v] = PINNED + k as u64;
    }
    c
}

/// One isomorphism `a -> b` extending the prescribed partial map, if any.
fn extend_isomorphism(a: &ColoredGraph, b: &ColoredGraph, fixed: &[(usize, usize)]) -> Option<Permutation> {
    let n = a.len();
    if n != b.len() {
        return None;
    }
    let src: Vec<usize> = fixed.iter().map(|p| p.0).collect();
    let dst: Vec<usize> = fixed.iter().map(|p| p.1).collect();
    let (ca, cb) = refine_pair(a, &pin(&a.colors, &src), b, &pin(&b.colors, &dst))?;
    // order source vertices: pinned first, then greedily by connection to the ordered set
    let mut order: Vec<usize> = src.clone();
    let mut placed = vec![false; n];
    for &v in &order {
        placed[v] = true;
    }
    let mut links = vec![0usize; n];
    for &v in &order {
        for j in 0..n {
            if a.weights[v][j] != 0 {
                links[j] += 1;
            }
        }
    }
    let class_size = |c: u64| ca.iter().filter(|&&x| x == c).count();
    while order.len() < n {
        let v = (0..n)
            .filter(|&v| !placed[v])
            .min_by_key(|&v| (std::cmp::Reverse(links[v]), class_size(ca[v]), v))
            .unwrap();
        placed[v] = true;
        order.push(v);
        for j in 0..n {
            if a.weights[v][j] != 0 {
                links[j] += 1;
            }
        }
    }
    let mut by_color: HashMap<u64, Vec<usize>> = HashMap::new();
    for w in 0..n {
        by_color.entry(cb[w]).or_default().push(w);
    }
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn dfs(
        k: usize,
        order: &[usize],
        a: &ColoredGraph,
        b: &ColoredGraph,
        ca: &[u64],
        by_color: &HashMap<u64, Vec<usize>>,
        image: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let v = order[k];
        let Some(cands) = by_color.get(&ca[v]) else { return false };
        for &w in cands {
            if used[w] || a.weights[v][v] != b.weights[w][w] {
                continue;
            }
            if order[..k].iter().any(|&u| a.weights[v][u] != b.weights[w][image[u]]) {
                continue;
            }
            image[v] = w;
            used[w] = true;
            if dfs(k + 1, order, a, b, ca, by_color, image, used) {
                return true;
            }
            used[w] = false;
            image[v] = usize::MAX;
        }
        false
    }
    if dfs(0, &order, a, b, &ca, &by_color, &mut image, &mut used) {
        Some(Permutation(image))
    } else {
        None
    }
}

/// A color- and weight-preserving bijection from `a` onto `b`.
pub fn isomorphism(a: &ColoredGraph, b: &ColoredGraph) -> Option<Permutation> {
    extend_isomorphism(a, b, &[])
}

/// Automorphism group with a strong generating set along a base.
#[derive(Clone, Debug)]
pub struct AutomorphismGroup {
    pub base: Vec<usize>,
    /// generators of the pointwise stabilizer chain, deepest level last
    pub generators: Vec<Permutation>,
    pub orbit_sizes: Vec<usize>,
}

impl AutomorphismGroup {
    pub fn order(&self) -> u128 {
        self.orbit_sizes.iter().map(|&s| s as u128).product()
    }
}

fn orbit(start: usize, gens: &[Permutation]) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for g in gens {
            let y = g.apply(x);
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen
}

/// Full automorphism group by individualization, refinement and backtracking.
pub fn automorphisms(g: &ColoredGraph) -> AutomorphismGroup {
    let n = g.len();
    // base: individualize the first vertex of the smallest nontrivial cell until discrete
    let mut base = Vec::new();
    let mut cells = Vec::new();
    loop {
        let (c, _) = refine_pair(g, &pin(&g.colors, &base), g, &pin(&g.colors, &base)).unwrap();
        let mut sizes: HashMap<u64, usize> = HashMap::new();
        for &x in &c {
            *sizes.entry(x).or_default() += 1;
        }
        let Some(v) = (0..n).filter(|&v| sizes[&c[v]] > 1).min_by_key(|&v| (sizes[&c[v]], v)) else { break };
        cells.push((0..n).filter(|&w| c[w] == c[v]).collect::<Vec<usize>>());
        base.push(v);
    }
    let mut gens: Vec<Permutation> = Vec::new();
    let mut orbit_sizes = vec![0; base.len()];
    for level in (0..base.len()).rev() {
        let b = base[level];
        let mut fixed: Vec<(usize, usize)> = base[..level].iter().map(|&x| (x, x)).collect();
        let mut orb = orbit(b, &gens);
        for &c in &cells[level] {
            if orb.contains(&c) {
                continue;
            }
            fixed.push((b, c));
            if let Some(p) = extend_isomorphism(g, g, &fixed) {
                gens.push(p);
                orb = orbit(b, &gens);
            }
            fixed.pop();
        }
        orbit_sizes[level] = orb.len();
    }
    gens.reverse();
    AutomorphismGroup { base, generators: gens, orbit_sizes }
}

/// Cremona isometry group of a type, as the automorphism group of its dual graph.
pub fn graph_automorphisms(g: &DualGraph) -> PermGroup {
    if g.degree == 1 && g.indices(VertexKind::Line).len() > 4 {
        warn!("automorphisms of a degree 1 graph with {} vertices may be slow", g.len());
    }
    let cg = ColoredGraph::from_dual(g);
    let aut = automorphisms(&cg);
    for p in &aut.generators {
        assert!(
            (0..g.len()).all(|v| g.vertices[p.apply(v)].kind == g.vertices[v].kind),
            "automorphism mixes vertex kinds"
        );
    }
    group_from_aut(g.len(), aut)
}

pub fn group_from_aut(n: usize, aut: AutomorphismGroup) -> PermGroup {
    let order = aut.order();
    if order <= ELEMENT_LIMIT {
        PermGroup::generate(n, aut.generators)
    } else {
        PermGroup::unmaterialized(n, aut.generators, order)
    }
}

/// A conjugacy class of subgroups.
#[derive(Clone, Debug)]
pub struct SubgroupClass {
    pub representative: PermGroup,
    pub conjugates_count: usize,
}

pub const DEFAULT_SUBGROUP_BOUND: u128 = 64;

/// All subgroups of `g` up to conjugacy, sorted by order then canonical form.
pub fn subgroups_up_to_conjugacy(g: &PermGroup) -> Result<Vec<SubgroupClass>> {
    subgroups_up_to_conjugacy_bounded(g, DEFAULT_SUBGROUP_BOUND)
}

pub fn subgroups_up_to_conjugacy_bounded(g: &PermGroup, bound: u128) -> Result<Vec<SubgroupClass>> {
    if g.order() > bound {
        return Err(Error::Refused(format!("group of order {} exceeds the subgroup bound {bound}", g.order())));
    }
    let table = GroupTable::new(g.require_elements()?);
    Ok(table
        .subgroup_classes()
        .into_iter()
        .map(|canon| {
            let conj: HashSet<Vec<u32>> = (0..table.elements.len() as u32).map(|x| table.conjugate_set(&canon, x)).collect();
            SubgroupClass {
                representative: PermGroup::from_elements(
                    g.degree,
                    canon.iter().map(|&i| table.elements[i as usize].clone()).collect(),
                ),
                conjugates_count: conj.len(),
            }
        })
        .collect())
}

/// Multiplication and conjugation tables over a materialized group.
pub struct GroupTable {
    pub elements: Vec<Permutation>,
    mul: Vec<Vec<u32>>,
    inv: Vec<u32>,
}

impl GroupTable {
    pub fn new(elements: &[Permutation]) -> GroupTable {
        let index: HashMap<&Permutation, u32> = elements.iter().enumerate().map(|(i, p)| (p, i as u32)).collect();
        let mul = elements
            .iter()
            .map(|a| elements.iter().map(|b| index[&a.compose(b)]).collect())
            .collect();
        let inv = elements.iter().map(|a| index[&a.inverse()]).collect();
        GroupTable { elements: elements.to_vec(), mul, inv }
    }

    pub fn index_of(&self, p: &Permutation) -> Option<u32> {
        self.elements.binary_search(p).ok().map(|i| i as u32)
    }

    pub fn identity(&self) -> u32 {
        self.elements.iter().position(|p| p.is_identity()).unwrap() as u32
    }

    /// Sorted element indices of the subgroup generated by `gens`.
    pub fn closure(&self, gens: &[u32]) -> Vec<u32> {
        let mut seen = vec![false; self.elements.len()];
        let e = self.identity();
        seen[e as usize] = true;
        let mut stack = vec![e];
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = self.mul[g as usize][x as usize];
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    stack.push(y);
                }
            }
        }
        (0..self.elements.len() as u32).filter(|&i| seen[i as usize]).collect()
    }

    pub fn conjugate_set(&self, h: &[u32], g: u32) -> Vec<u32> {
        let gi = self.inv[g as usize] as usize;
        let mut v: Vec<u32> = h.iter().map(|&x| self.mul[self.mul[g as usize][x as usize] as usize][gi]).collect();
        v.sort_unstable();
        v
    }

    /// Lexicographically least conjugate.
    pub fn canonical(&self, h: &[u32]) -> Vec<u32> {
        self.canonical_with(h).0
    }

    /// Least conjugate together with a conjugating element reaching it.
    pub fn canonical_with(&self, h: &[u32]) -> (Vec<u32>, u32) {
        (0..self.elements.len() as u32).map(|g| (self.conjugate_set(h, g), g)).min().unwrap()
    }

    /// One canonical representative per conjugacy class of subgroups, sorted
    /// by order then encoding. Classes are grown by joining class
    /// representatives with cyclic subgroups.
    pub fn subgroup_classes(&self) -> Vec<Vec<u32>> {
        let n = self.elements.len() as u32;
        let mut cyclic: Vec<(Vec<u32>, u32)> = (0..n).map(|g| (self.closure(&[g]), g)).collect();
        cyclic.sort();
        cyclic.dedup_by(|a, b| a.0 == b.0);
        let e = self.identity();
        let mut classes: Vec<(Vec<u32>, Vec<u32>)> = vec![(vec![e], Vec::new())];
        let mut canon_seen: HashSet<Vec<u32>> = HashSet::from([vec![e]]);
        let mut raw_seen: HashSet<Vec<u32>> = HashSet::from([vec![e]]);
        let mut next = 0;
        while next < classes.len() {
            let (h, gens) = classes[next].clone();
            next += 1;
            let mut member = vec![false; n as usize];
            for &x in &h {
                member[x as usize] = true;
            }
            for (_, gc) in &cyclic {
                if member[*gc as usize] {
                    continue;
                }
                let mut g2 = gens.clone();
                g2.push(*gc);
                let j = self.closure(&g2);
                if !raw_seen.insert(j.clone()) {
                    continue;
                }
                let (canon, c) = self.canonical_with(&j);
                if canon_seen.insert(canon.clone()) {
                    let ci = self.inv[c as usize] as usize;
                    let cg = g2.iter().map(|&x| self.mul[self.mul[c as usize][x as usize] as usize][ci]).collect();
                    classes.push((canon, cg));
                }
            }
        }
        let mut out: Vec<Vec<u32>> = classes.into_iter().map(|c| c.0).collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        out
    }
}

/// Linear extension of a vertex permutation to the Picard lattice.
///
/// Returns the integer matrix `M` (acting on column coordinate vectors) with
/// `M * class(v) = class(p(v))` for every vertex.
pub fn pic_action(g: &DualGraph, p: &Permutation) -> Result<Vec<Vec<i64>>> {
    let classes: Vec<IntVector> = g.vertices.iter().map(|v| v.class.clone()).collect();
    let r = g.form.len();
    // pick a rational basis among the vertex classes
    let mut basis: Vec<usize> = Vec::new();
    for i in 0..classes.len() {
        let mut trial: Vec<IntVector> = basis.iter().map(|&j| classes[j].clone()).collect();
        trial.push(classes[i].clone());
        if rank(&trial) > basis.len() {
            basis.push(i);
        }
    }
    if basis.len() < r {
        return Err(Error::Refused(format!(
            "vertex classes span rank {} of a rank {r} lattice; no linear extension",
            basis.len()
        )));
    }
    let rows: Vec<IntVector> = basis.iter().map(|&i| classes[i].clone()).collect();
    // M^T rows: for each unit vector e_k, write e_k = sum x_i class_i, then M e_k = sum x_i class_p(i)
    let mut m = vec![vec![0i64; r]; r];
    for k in 0..r {
        let mut e = vec![0; r];
        e[k] = 1;
        let x = solve_rational(&rows, &e).expect("basis spans");
        for row in 0..r {
            let mut s = Rational64::zero();
            for (xi, &bi) in x.iter().zip(&basis) {
                s += *xi * Rational64::from_integer(classes[p.apply(bi)][row]);
            }
            if !s.is_integer() {
                return Err(Error::Refused("linear extension is not integral".into()));
            }
            m[row][k] = s.to_integer();
        }
    }
    for (v, c) in classes.iter().enumerate() {
        if apply_matrix(&m, c) != classes[p.apply(v)] {
            return Err(Error::Refused(format!("permutation is not linear on vertex {}", g.vertices[v].label)));
        }
    }
    Ok(m)
}

pub fn apply_matrix(m: &[Vec<i64>], v: &[i64]) -> IntVector {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Rank of the span of `K` and the orbit sums of all vertex classes under `h`.
pub fn invariant_picard_rank(g: &DualGraph, h: &PermGroup) -> usize {
    let mut rows: Vec<IntVector> = vec![g.canonical.clone()];
    let gens = &h.generators;
    let mut done = vec![false; g.len()];
    for v in 0..g.len() {
        if done[v] {
            continue;
        }
        let orb = orbit(v, gens);
        let mut s = vec![0i64; g.form.len()];
        for &w in &orb {
            done[w] = true;
            for (a, b) in s.iter_mut().zip(&g.vertices[w].class) {
                *a += b;
            }
        }
        rows.push(s);
    }
    rank(&rows)
}

/// Fixed-space dimension as the average trace of the Picard representation.
pub fn fixed_space_dimension(g: &DualGraph, h: &PermGroup) -> Result<usize> {
    let els = h.require_elements()?;
    let mut total = Rational64::zero();
    for p in els {
        let m = pic_action(g, p)?;
        total += Rational64::from_integer((0..m.len()).map(|i| m[i][i]).sum());
    }
    let avg = total / Rational64::from_integer(els.len() as i64);
    if !avg.is_integer() {
        return Err(Error::Classification(format!("average trace {avg} is not an integer")));
    }
    Ok(avg.to_integer() as usize)
}

/// Whether `m` preserves the form of `g` and fixes its canonical class.
pub fn is_cremona_isometry(g: &DualGraph, m: &[Vec<i64>]) -> bool {
    let r = g.form.len();
    let col = |j: usize| -> IntVector { (0..r).map(|i| m[i][j]).collect() };
    let preserves = (0..r).all(|i| (0..r).all(|j| g.pair(&col(i), &col(j)) == g.form[i][j]));
    preserves && apply_matrix(m, &g.canonical) == g.canonical
}

impl fmt::Display for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (order {})", self.name(), self.order)
    }
}

/// Cremona isometry group of a surface type.
pub fn cris_group(t: &SurfaceType) -> Result<PermGroup> {
    let g = crate::types::dual_graph(t)?;
    Ok(graph_automorphisms(&g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::parse_type_name;

    fn cris(name: &str) -> PermGroup {
        cris_group(parse_type_name(name).unwrap()).unwrap()
    }

    #[test]
    fn appendix_orders() {
        assert_eq!(cris("S3(4A1)").order(), 24);
        assert_eq!(cris("S3(4A1)").name(), "S4");
        assert_eq!(cris("S2(6A1)").name(), "C2xS4");
        assert_eq!(cris("S2(A7)").order(), 2);
        assert_eq!(cris("S2(3A2)").name(), "D6");
    }

    #[test]
    fn smooth_weyl_orders() {
        assert_eq!(cris("S6").order(), 12);
        assert_eq!(cris("S5").order(), 120);
        assert_eq!(cris("S4").order(), 1920);
        assert_eq!(cris("S3").order(), 51840);
        assert_eq!(cris("S2").order(), 2903040);
    }

    #[test]
    fn complete_graph() {
        let n = 5;
        let weights = (0..n).map(|i| (0..n).map(|j| if i == j { -1 } else { 1 }).collect()).collect();
        let g = ColoredGraph { weights, colors: vec![0; n] };
        assert_eq!(automorphisms(&g).order(), 120);
    }

    #[test]
    fn subgroup_classes() {
        let s3 = PermGroup::generate(3, vec![Permutation(vec![1, 0, 2]), Permutation(vec![1, 2, 0])]);
        assert_eq!(subgroups_up_to_conjugacy(&s3).unwrap().len(), 4);
        let s4 = PermGroup::generate(4, vec![Permutation(vec![1, 0, 2, 3]), Permutation(vec![1, 2, 3, 0])]);
        let classes = subgroups_up_to_conjugacy(&s4).unwrap();
        assert_eq!(classes.len(), 11);
        assert_eq!(classes.iter().map(|c| c.conjugates_count).sum::<usize>(), 30);
        let c2 = PermGroup::generate(2, vec![Permutation(vec![1, 0])]);
        assert_eq!(subgroups_up_to_conjugacy(&c2).unwrap().len(), 2);
    }

    #[test]
    fn names() {
        let c2c4 = PermGroup::generate(6, vec![Permutation(vec![1, 0, 2, 3, 4, 5]), Permutation(vec![0, 1, 3, 4, 5, 2])]);
        assert_eq!(c2c4.name(), "C2xC4");
        let v4 = PermGroup::generate(4, vec![Permutation(vec![1, 0, 3, 2]), Permutation(vec![2, 3, 0, 1])]);
        assert_eq!(v4.name(), "C2^2");
        let d4 = PermGroup::generate(4, vec![Permutation(vec![1, 2, 3, 0]), Permutation(vec![0, 3, 2, 1])]);
        assert_eq!(d4.name(), "D4");
    }

    #[test]
    fn cycle_strings() {
        let labels: Vec<String> = (1..=5).map(|i| i.to_string()).collect();
        let p = Permutation::parse_cycles("(1,4)(2,3,5)", &labels).unwrap();
        assert_eq!(p.to_cycle_string(&labels), "(1,4)(2,3,5)");
        assert_eq!(p.order(), 6);
    }

    #[test]
    fn pic_action_is_isometry() {
        let t = parse_type_name("S2(A7)").unwrap();
        let g = crate::types::dual_graph(t).unwrap();
        let grp = graph_automorphisms(&g);
        for p in &grp.elements {
            let m = pic_action(&g, p).unwrap();
            assert!(is_cremona_isometry(&g, &m));
        }
        assert_eq!(invariant_picard_rank(&g, &PermGroup::trivial(g.len())), 8);
        assert_eq!(invariant_picard_rank(&g, &grp), fixed_space_dimension(&g, &grp).unwrap());
    }
}
