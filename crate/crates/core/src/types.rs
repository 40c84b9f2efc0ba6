//! Du Val del Pezzo types as root subsystems, the per-degree registry, and dual graphs.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use log::{debug, warn};
use num_rational::Rational64;
use num_traits::Zero;
use serde::Serialize;

use crate::ade::{recognize, AdeType, Component};
use crate::error::{Error, Result};
use crate::lattice::{
    dot, enumerate_classes, inverse_rational, rank, torsion_quotient, AbelianGroupInvariants, IntVector,
    PicardBasis,
};

/// A simple system of roots inside the Picard lattice of some degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSubsystem {
    pub basis: PicardBasis,
    /// simple roots, listed component by component in standard Dynkin order
    pub simple_roots: Vec<IntVector>,
    pub components: Vec<Component>,
}

impl RootSubsystem {
    pub fn new(basis: PicardBasis, simple_roots: Vec<IntVector>) -> Result<Self> {
        for r in &simple_roots {
            if r.len() != basis.rank {
                return Err(Error::Dimension { expected: basis.rank, found: r.len() });
            }
            if basis.k_pairing(r) != 0 {
                return Err(Error::Domain(format!("{} is not orthogonal to K", basis.format(r))));
            }
        }
        let components = recognize(&simple_roots)?;
        let simple_roots = components.iter().flat_map(|c| c.roots.iter().cloned()).collect();
        Ok(RootSubsystem { basis, simple_roots, components })
    }

    pub fn ade(&self) -> AdeType {
        AdeType::new(self.components.iter().map(|c| c.label).collect())
    }

    pub fn rank(&self) -> usize {
        self.simple_roots.len()
    }

    /// Offsets of each component inside `simple_roots`.
    pub fn component_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.components
            .iter()
            .map(|c| {
                let r = start..start + c.roots.len();
                start = r.end;
                r
            })
            .collect()
    }
}

fn lex_positive(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// Simple roots of a root system given by all of its roots, for the lexicographic order.
pub fn simple_system(roots: &[IntVector]) -> Vec<IntVector> {
    let pos: Vec<&IntVector> = roots.iter().filter(|r| lex_positive(r)).collect();
    let set: HashSet<&IntVector> = pos.iter().copied().collect();
    let mut simple: Vec<IntVector> = pos
        .iter()
        .filter(|a| {
            !pos.iter().any(|b| {
                let d: IntVector = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
                set.contains(&d)
            })
        })
        .map(|a| (*a).clone())
        .collect();
    simple.sort();
    simple
}

/// Membership test for the Z-span of linearly independent vectors.
struct SpanTest<'a> {
    basis: &'a [IntVector],
    ginv: Vec<Vec<Rational64>>,
}

impl<'a> SpanTest<'a> {
    fn new(basis: &'a [IntVector]) -> Option<Self> {
        let g: Vec<Vec<i64>> = basis.iter().map(|u| basis.iter().map(|v| dot(u, v)).collect()).collect();
        Some(SpanTest { basis, ginv: inverse_rational(&g)? })
    }

    fn contains(&self, x: &[i64]) -> bool {
        let bx: Vec<i64> = self.basis.iter().map(|b| dot(b, x)).collect();
        let mut y = vec![0i64; x.len()];
        for (row, b) in self.ginv.iter().zip(self.basis) {
            let c: Rational64 = row.iter().zip(&bx).map(|(g, &v)| *g * v).fold(Rational64::zero(), |s, t| s + t);
            if !c.is_integer() {
                return false;
            }
            let c = c.to_integer();
            for (yi, bi) in y.iter_mut().zip(b) {
                *yi += c * bi;
            }
        }
        y == x
    }
}

/// Roots and lines of the smooth surface of a given degree, computed once.
pub struct DegreeData {
    pub basis: PicardBasis,
    pub roots: Vec<IntVector>,
    pub lines: Vec<IntVector>,
}

pub fn degree_data(degree: u8) -> Result<&'static DegreeData> {
    static DATA: [OnceLock<DegreeData>; 9] = [const { OnceLock::new() }; 9];
    if !(1..=9).contains(&degree) {
        return Err(Error::Domain(format!("degree {degree} outside 1..9")));
    }
    let cell = &DATA[degree as usize - 1];
    if let Some(d) = cell.get() {
        return Ok(d);
    }
    let basis = PicardBasis::new(degree)?;
    let roots = enumerate_classes(&basis, -2, 0)?;
    let lines = enumerate_classes(&basis, -1, -1)?;
    Ok(cell.get_or_init(|| DegreeData { basis, roots, lines }))
}

/// The full root system `R_d` (orthogonal complement of `K`, and of `H` too in degree 7).
pub fn del_pezzo_lattice(degree: u8) -> Result<RootSubsystem> {
    if !(1..=7).contains(&degree) {
        return Err(Error::Domain(format!("degree {degree} has no root datum; only terminal types")));
    }
    let data = degree_data(degree)?;
    RootSubsystem::new(data.basis.clone(), simple_system(&data.roots))
}

/// Number of (-1)-classes pairing nonnegatively with every simple root.
pub fn count_lines(sub: &RootSubsystem) -> usize {
    match degree_data(sub.basis.degree) {
        Ok(data) => integral_lines(&data.lines, &sub.simple_roots).count(),
        Err(_) => 0,
    }
}

fn integral_lines<'a>(lines: &'a [IntVector], simple: &'a [IntVector]) -> impl Iterator<Item = &'a IntVector> {
    lines.iter().filter(move |l| simple.iter().all(|r| dot(l, r) >= 0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Terminal {
    P2,
    P1xP1,
    F1,
    F2,
}

impl Terminal {
    pub fn name(&self) -> &'static str {
        match self {
            Terminal::P2 => "P2",
            Terminal::P1xP1 => "P1xP1",
            Terminal::F1 => "F1",
            Terminal::F2 => "F2",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SurfaceType {
    pub degree: u8,
    pub ade: AdeType,
    pub lines: usize,
    pub pi1: AbelianGroupInvariants,
    pub representative: Option<RootSubsystem>,
    pub name: String,
    pub geometric: bool,
    pub terminal: Option<Terminal>,
}

impl PartialEq for SurfaceType {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.ade == other.ade && self.lines == other.lines && self.pi1 == other.pi1
    }
}

impl Eq for SurfaceType {}

impl fmt::Display for SurfaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl SurfaceType {
    pub fn basis(&self) -> Result<PicardBasis> {
        PicardBasis::new(self.degree)
    }

    pub fn simple_roots(&self) -> &[IntVector] {
        self.representative.as_ref().map_or(&[], |r| &r.simple_roots)
    }

    pub fn is_smooth(&self) -> bool {
        self.ade.is_empty()
    }

    /// Picard rank of the minimal resolution.
    pub fn picard_rank(&self) -> usize {
        10 - self.degree as usize
    }
}

const NON_GEOMETRIC: [(u8, &str); 4] = [(2, "7A1"), (1, "7A1"), (1, "8A1"), (1, "D4+4A1")];

pub fn is_non_geometric(degree: u8, ade: &AdeType) -> bool {
    NON_GEOMETRIC.iter().any(|&(d, s)| d == degree && s.parse::<AdeType>().is_ok_and(|x| &x == ade))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct SearchKey {
    ade: AdeType,
    lines: usize,
    pi1: Vec<i64>,
    complement: AdeType,
}

fn search_key(data: &DegreeData, simple: &[IntVector]) -> Result<SearchKey> {
    let ade = AdeType::new(recognize(simple)?.iter().map(|c| c.label).collect());
    let lines = integral_lines(&data.lines, simple).count();
    let pi1 = torsion_quotient(simple, &data.basis)?.factors;
    let orth: Vec<IntVector> =
        data.roots.iter().filter(|r| simple.iter().all(|s| dot(r, s) == 0)).cloned().collect();
    let complement = AdeType::new(recognize(&simple_system(&orth))?.iter().map(|c| c.label).collect());
    Ok(SearchKey { ade, lines, pi1, complement })
}

/// Breadth-first search over root sublattices, one representative per search key.
fn search(degree: u8) -> Result<Vec<(SearchKey, Vec<IntVector>)>> {
    let data = degree_data(degree)?;
    let positive: Vec<&IntVector> = data.roots.iter().filter(|r| lex_positive(r)).collect();
    let mut keys: HashSet<SearchKey> = HashSet::new();
    let mut seen_systems: HashSet<Vec<IntVector>> = HashSet::new();
    let mut out = Vec::new();
    let empty = search_key(data, &[])?;
    keys.insert(empty.clone());
    out.push((empty, Vec::new()));
    let mut layer: Vec<Vec<IntVector>> = vec![Vec::new()];
    while !layer.is_empty() {
        let mut next = Vec::new();
        for s in &layer {
            for r in &positive {
                let mut b = s.clone();
                b.push((*r).clone());
                if rank(&b) != b.len() {
                    continue;
                }
                let test = SpanTest::new(&b).expect("roots of a definite lattice are independent");
                let phi: Vec<IntVector> = data.roots.iter().filter(|x| test.contains(x)).cloned().collect();
                let simple = simple_system(&phi);
                if !seen_systems.insert(simple.clone()) {
                    continue;
                }
                let key = search_key(data, &simple)?;
                if keys.insert(key.clone()) {
                    out.push((key, simple.clone()));
                    next.push(simple);
                }
            }
        }
        debug!("degree {degree}: {} new subsystems of rank {}", next.len(), layer[0].len() + 1);
        layer = next;
    }
    Ok(out)
}

fn build_registry(degree: u8) -> Result<Vec<SurfaceType>> {
    if degree >= 8 {
        return Ok(terminal_types(degree));
    }
    let data = degree_data(degree)?;
    let mut groups: BTreeMap<(usize, AdeType, usize), Vec<(SearchKey, Vec<IntVector>)>> = BTreeMap::new();
    for (key, simple) in search(degree)? {
        groups.entry((key.ade.rank(), key.ade.clone(), key.lines)).or_default().push((key, simple));
    }
    let mut types = Vec::new();
    for ((_, ade, lines), mut members) in groups {
        members.sort_by(|a, b| a.0.pi1.cmp(&b.0.pi1).then(a.1.cmp(&b.1)));
        let mut pis: Vec<Vec<i64>> = members.iter().map(|m| m.0.pi1.clone()).collect();
        pis.dedup();
        if pis.len() > 1 {
            warn!("degree {degree} type {ade} with {lines} lines splits by fundamental group: {pis:?}");
        } else if members.len() > 1 {
            debug!("degree {degree} type {ade} with {lines} lines: {} search classes merged", members.len());
        }
        for pi in pis {
            let (key, simple) = members.iter().find(|m| m.0.pi1 == pi).unwrap();
            let representative = RootSubsystem::new(data.basis.clone(), simple.clone())?;
            types.push(SurfaceType {
                degree,
                ade: ade.clone(),
                lines,
                pi1: AbelianGroupInvariants { factors: key.pi1.clone() },
                representative: Some(representative),
                name: String::new(),
                geometric: !is_non_geometric(degree, &ade),
                terminal: None,
            });
        }
    }
    let mut counts: HashMap<AdeType, usize> = HashMap::new();
    for t in &types {
        *counts.entry(t.ade.clone()).or_default() += 1;
    }
    for t in &mut types {
        t.name = format_name(degree, &t.ade, (counts[&t.ade] > 1).then_some(t.lines));
    }
    Ok(types)
}

fn format_name(degree: u8, ade: &AdeType, lines: Option<usize>) -> String {
    match (ade.is_empty(), lines) {
        (true, _) => format!("S{degree}"),
        (false, None) => format!("S{degree}({ade})"),
        (false, Some(l)) => format!("S{degree}({ade}({l}l))"),
    }
}

fn terminal_types(degree: u8) -> Vec<SurfaceType> {
    let mk = |t: Terminal, degree: u8, ade: &str, lines: usize| SurfaceType {
        degree,
        ade: ade.parse().unwrap(),
        lines,
        pi1: AbelianGroupInvariants::trivial(),
        representative: None,
        name: t.name().to_string(),
        geometric: true,
        terminal: Some(t),
    };
    match degree {
        9 => vec![mk(Terminal::P2, 9, "", 0)],
        8 => vec![
            mk(Terminal::P1xP1, 8, "", 0),
            mk(Terminal::F1, 8, "", 1),
            mk(Terminal::F2, 8, "A1", 0),
        ],
        _ => Vec::new(),
    }
}

/// All types of a degree (geometric or not), computed once and cached.
pub fn enumerate_types(degree: u8) -> Result<&'static [SurfaceType]> {
    static REG: [OnceLock<Vec<SurfaceType>>; 9] = [const { OnceLock::new() }; 9];
    if !(1..=9).contains(&degree) {
        return Err(Error::Domain(format!("degree {degree} outside 1..9")));
    }
    let cell = &REG[degree as usize - 1];
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = build_registry(degree)?;
    Ok(cell.get_or_init(|| v))
}

/// Types with the given degree and ADE multiset.
pub fn lookup(degree: u8, ade: &AdeType) -> Result<Vec<&'static SurfaceType>> {
    Ok(enumerate_types(degree)?.iter().filter(|t| &t.ade == ade).collect())
}

/// Resolve a name such as `S4(2A1(8l))` or `P1xP1` against the registry.
pub fn parse_type_name(s: &str) -> Result<&'static SurfaceType> {
    let s = s.trim();
    let unknown = || Error::UnknownType(s.to_string());
    for t in [Terminal::P2, Terminal::P1xP1, Terminal::F1, Terminal::F2] {
        if s == t.name() {
            let deg = if t == Terminal::P2 { 9 } else { 8 };
            return Ok(enumerate_types(deg)?.iter().find(|x| x.terminal == Some(t)).unwrap());
        }
    }
    let rest = s.strip_prefix('S').ok_or_else(unknown)?;
    let (deg_str, inner) = match rest.find('(') {
        Some(i) => {
            let inner = rest[i..].strip_prefix('(').and_then(|x| x.strip_suffix(')')).ok_or_else(unknown)?;
            (&rest[..i], Some(inner))
        }
        None => (rest, None),
    };
    let degree: u8 = deg_str.parse().map_err(|_| unknown())?;
    if !(1..=9).contains(&degree) {
        return Err(unknown());
    }
    let (ade, lines) = match inner {
        None => (AdeType::default(), None),
        Some(inner) => match inner.find('(') {
            Some(i) => {
                let q = inner[i..].strip_prefix('(').and_then(|x| x.strip_suffix("l)")).ok_or_else(unknown)?;
                let l: usize = q.parse().map_err(|_| unknown())?;
                (inner[..i].parse::<AdeType>().map_err(|_| unknown())?, Some(l))
            }
            None => (inner.parse::<AdeType>().map_err(|_| unknown())?, None),
        },
    };
    if inner.is_some() && ade.is_empty() {
        return Err(unknown());
    }
    let candidates: Vec<&'static SurfaceType> =
        lookup(degree, &ade)?.into_iter().filter(|t| lines.is_none_or(|l| t.lines == l)).collect();
    match candidates.len() {
        0 => Err(unknown()),
        1 => Ok(candidates[0]),
        _ => Err(Error::AmbiguousType {
            name: s.to_string(),
            candidates: candidates.iter().map(|t| t.name.clone()).collect(),
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum VertexKind {
    /// (-1)-curve
    Line,
    /// (-2)-curve
    Node,
    /// extremal curve of nonnegative self-intersection (degrees 8 and 9 only)
    Curve,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Vertex {
    pub kind: VertexKind,
    pub class: IntVector,
    pub label: String,
    pub self_int: i64,
}

/// Weighted graph of extremal curve classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualGraph {
    pub degree: u8,
    pub vertices: Vec<Vertex>,
    pub edges: BTreeMap<(usize, usize), i64>,
    /// Gram matrix of the coordinate basis used for the classes
    pub form: Vec<Vec<i64>>,
    pub canonical: IntVector,
}

impl DualGraph {
    /// Build a graph from classes; edges are the positive pairings.
    pub fn from_classes(
        degree: u8,
        classes: Vec<(VertexKind, IntVector, String)>,
        form: Vec<Vec<i64>>,
        canonical: IntVector,
    ) -> DualGraph {
        let pair = |u: &[i64], v: &[i64]| -> i64 {
            let mut s = 0;
            for (i, a) in u.iter().enumerate() {
                for (j, b) in v.iter().enumerate() {
                    s += a * form[i][j] * b;
                }
            }
            s
        };
        let vertices: Vec<Vertex> = classes
            .into_iter()
            .map(|(kind, class, label)| Vertex { self_int: pair(&class, &class), kind, class, label })
            .collect();
        let mut edges = BTreeMap::new();
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                let w = pair(&vertices[i].class, &vertices[j].class);
                if w > 0 {
                    edges.insert((i, j), w);
                }
            }
        }
        DualGraph { degree, vertices, edges, form, canonical }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn weight(&self, i: usize, j: usize) -> i64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.edges.get(&key).copied().unwrap_or(0)
    }

    /// Full intersection matrix, self-intersections on the diagonal.
    pub fn matrix(&self) -> Vec<Vec<i64>> {
        let n = self.len();
        let mut m = vec![vec![0; n]; n];
        for (i, v) in self.vertices.iter().enumerate() {
            m[i][i] = v.self_int;
        }
        for (&(i, j), &w) in &self.edges {
            m[i][j] = w;
            m[j][i] = w;
        }
        m
    }

    pub fn pair(&self, u: &[i64], v: &[i64]) -> i64 {
        let mut s = 0;
        for (i, a) in u.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in v.iter().enumerate() {
                s += a * self.form[i][j] * b;
            }
        }
        s
    }

    pub fn indices(&self, kind: VertexKind) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.vertices[i].kind == kind).collect()
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.len()).filter(|&j| j != i && self.weight(i, j) > 0).collect()
    }

    pub fn find_label(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.label == label)
    }

    /// Boxes for lines, circles for nodes, doubled circles for `branched`.
    pub fn to_dot(&self, name: &str, branched: &BTreeSet<usize>) -> String {
        let mut out = format!("graph \"{name}\" {{\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let shape = match v.kind {
                VertexKind::Line => "box",
                VertexKind::Node if branched.contains(&i) => "doublecircle",
                VertexKind::Node => "circle",
                VertexKind::Curve => "ellipse",
            };
            out.push_str(&format!("  v{i} [shape={shape}, label=\"{}\"];\n", v.label));
        }
        for (&(i, j), &w) in &self.edges {
            if w == 1 {
                out.push_str(&format!("  v{i} -- v{j};\n"));
            } else {
                out.push_str(&format!("  v{i} -- v{j} [label=\"{w}\"];\n"));
            }
        }
        out.push_str("}\n");
        out
    }
}

fn diagonal_form(rank: usize) -> Vec<Vec<i64>> {
    (0..rank).map(|i| (0..rank).map(|j| if i != j { 0 } else if i == 0 { 1 } else { -1 }).collect()).collect()
}

/// Dual graph of extremal curves: lines first, then nodes in component order.
pub fn dual_graph(t: &SurfaceType) -> Result<DualGraph> {
    if !t.geometric {
        return Err(Error::Refused(format!(
            "{} is realized only in characteristic 2; it has no dual graph here",
            t.name
        )));
    }
    if let Some(term) = t.terminal {
        return Ok(terminal_graph(term));
    }
    let data = degree_data(t.degree)?;
    let simple = t.simple_roots();
    let mut classes: Vec<(VertexKind, IntVector, String)> = integral_lines(&data.lines, simple)
        .map(|l| (VertexKind::Line, l.clone(), data.basis.format(l)))
        .collect();
    classes.extend(simple.iter().map(|r| (VertexKind::Node, r.clone(), data.basis.format(r))));
    Ok(DualGraph::from_classes(t.degree, classes, diagonal_form(data.basis.rank), data.basis.canonical_class.clone()))
}

fn terminal_graph(t: Terminal) -> DualGraph {
    let c = |kind, v: Vec<i64>, l: &str| (kind, v, l.to_string());
    match t {
        Terminal::P2 => DualGraph::from_classes(9, vec![c(VertexKind::Curve, vec![1], "H")], diagonal_form(1), vec![-3]),
        Terminal::F1 => DualGraph::from_classes(
            8,
            vec![c(VertexKind::Line, vec![0, 1], "E1"), c(VertexKind::Curve, vec![1, -1], "H-E1")],
            diagonal_form(2),
            vec![-3, 1],
        ),
        Terminal::P1xP1 => DualGraph::from_classes(
            8,
            vec![c(VertexKind::Curve, vec![1, 0], "F"), c(VertexKind::Curve, vec![0, 1], "G")],
            vec![vec![0, 1], vec![1, 0]],
            vec![-2, -2],
        ),
        // basis (fibre f, negative section s)
        Terminal::F2 => DualGraph::from_classes(
            8,
            vec![c(VertexKind::Curve, vec![1, 0], "f"), c(VertexKind::Node, vec![0, 1], "s")],
            vec![vec![0, 1], vec![1, -2]],
            vec![-4, -2],
        ),
    }
}

/// Violations of the intersection rules for lines against nodes and other lines.
pub fn check_intersection_rules(g: &DualGraph, degree: u8) -> Vec<String> {
    let mut out = Vec::new();
    let lines = g.indices(VertexKind::Line);
    let nodes = g.indices(VertexKind::Node);
    let components = node_components(g, &nodes);
    for &c in &lines {
        let mut equality = Vec::new();
        for comp in &components {
            for mask in 1u32..(1 << comp.len()) {
                let set: Vec<usize> = (0..comp.len()).filter(|&k| mask >> k & 1 == 1).map(|k| comp[k]).collect();
                if !connected(g, &set) {
                    continue;
                }
                let w: i64 = set.iter().map(|&n| g.weight(c, n)).sum();
                if w > 2 {
                    out.push(format!("line {} meets a connected union of {} nodes {} times", g.vertices[c].label, set.len(), w));
                } else if w == 2 {
                    equality.push(set);
                }
            }
        }
        if equality.len() > 1 {
            out.push(format!(
                "line {} meets {} connected unions of nodes twice",
                g.vertices[c].label,
                equality.len()
            ));
        } else if let Some(d) = equality.first() {
            let ends: Vec<usize> =
                d.iter().copied().filter(|&n| d.iter().filter(|&&m| m != n && g.weight(n, m) > 0).count() <= 1).collect();
            let is_chain = d.iter().all(|&n| d.iter().filter(|&&m| m != n && g.weight(n, m) > 0).count() <= 2);
            let meets_ends = if d.len() == 1 { g.weight(c, d[0]) == 2 } else { ends.iter().all(|&e| g.weight(c, e) == 1) };
            if !is_chain || !meets_ends {
                out.push(format!("line {} meets a node union twice away from the ends of a chain", g.vertices[c].label));
            }
        }
    }
    if degree >= 2 {
        for (a, &i) in lines.iter().enumerate() {
            for &j in &lines[a + 1..] {
                if g.weight(i, j) >= 3 {
                    out.push(format!(
                        "lines {} and {} meet {} times",
                        g.vertices[i].label,
                        g.vertices[j].label,
                        g.weight(i, j)
                    ));
                }
            }
        }
        let heavy: Vec<(usize, usize)> = g
            .edges
            .iter()
            .filter(|(&(i, j), &w)| w >= 2 && g.vertices[i].kind == VertexKind::Line && g.vertices[j].kind == VertexKind::Line)
            .map(|(&k, _)| k)
            .collect();
        for &(i, j) in &heavy {
            for &k in &lines {
                if k > j && g.weight(i, k) >= 2 && g.weight(j, k) >= 2 {
                    out.push(format!(
                        "lines {}, {}, {} pairwise meet at least twice",
                        g.vertices[i].label, g.vertices[j].label, g.vertices[k].label
                    ));
                }
            }
        }
    }
    out
}

fn node_components(g: &DualGraph, nodes: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for &s in nodes {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut k = 0;
        while k < comp.len() {
            for &m in nodes {
                if g.weight(comp[k], m) > 0 && seen.insert(m) {
                    comp.push(m);
                }
            }
            k += 1;
        }
        out.push(comp);
    }
    out
}

fn connected(g: &DualGraph, set: &[usize]) -> bool {
    let mut reached = vec![set[0]];
    let mut k = 0;
    while k < reached.len() {
        for &m in set {
            if !reached.contains(&m) && g.weight(reached[k], m) > 0 {
                reached.push(m);
            }
        }
        k += 1;
    }
    reached.len() == set.len()
}

/// Components of the root subsystem belonging to a type, if any.
pub fn components(t: &SurfaceType) -> &[Component] {
    t.representative.as_ref().map_or(&[], |r| &r.components)
}

/// Position of the nodes of component `c` among the vertices of `dual_graph(t)`.
pub fn component_vertices(t: &SurfaceType, g: &DualGraph) -> Vec<Vec<usize>> {
    components(t)
        .iter()
        .map(|c| c.roots.iter().map(|r| g.vertices.iter().position(|v| v.kind == VertexKind::Node && &v.class == r).unwrap()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_one() {
        let want = ["E8", "E7", "E6", "D5", "A4", "A2+A1", "A1"];
        for (d, w) in (1..=7).zip(want) {
            assert_eq!(del_pezzo_lattice(d).unwrap().ade().to_string(), w, "degree {d}");
        }
        assert!(del_pezzo_lattice(8).is_err());
    }

    #[test]
    fn degree_seven_and_four() {
        let names: Vec<String> = enumerate_types(7).unwrap().iter().map(|t| t.name.clone()).collect();
        assert_eq!(names, vec!["S7", "S7(A1)"]);
        let t = enumerate_types(4).unwrap();
        let two: Vec<usize> = t.iter().filter(|t| t.ade.to_string() == "2A1").map(|t| t.lines).collect();
        assert_eq!(two, vec![8, 9]);
    }

    #[test]
    fn names_parse() {
        assert_eq!(parse_type_name("S4(2A1(8l))").unwrap().lines, 8);
        assert!(matches!(parse_type_name("S4(2A1)"), Err(Error::AmbiguousType { .. })));
        assert!(matches!(parse_type_name("S4(E8)"), Err(Error::UnknownType(_))));
        assert_eq!(parse_type_name("S9").unwrap().name, "P2");
        assert_eq!(parse_type_name("S8(A1)").unwrap().name, "F2");
        assert!(matches!(parse_type_name("S8"), Err(Error::AmbiguousType { .. })));
    }

    #[test]
    fn smooth_graphs() {
        let g = dual_graph(parse_type_name("S6").unwrap()).unwrap();
        assert_eq!(g.len(), 6);
        assert!(g.vertices.iter().all(|v| g.neighbors(g.find_label(&v.label).unwrap()).len() == 2));
        let g = dual_graph(parse_type_name("S3").unwrap()).unwrap();
        assert_eq!(g.len(), 27);
    }

    #[test]
    fn intersection_violation_detected() {
        let g = DualGraph::from_classes(
            2,
            vec![(VertexKind::Line, vec![1, 0], "a".into()), (VertexKind::Line, vec![0, 1], "b".into())],
            vec![vec![-1, 3], vec![3, -1]],
            vec![0, 0],
        );
        assert_eq!(check_intersection_rules(&g, 2).len(), 1);
    }
}
