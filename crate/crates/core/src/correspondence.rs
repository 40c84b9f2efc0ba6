//! Extremal-curve correspondence of a cyclic cover, Cris(π) and the accumulation search.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use log::{debug, info, warn};
use num_rational::Rational64;
use num_traits::Zero;
use serde::Serialize;

use crate::covers::{branch_data, BranchData, CoverContext, TorsionClass};
use crate::cris::{
    automorphisms, graph_automorphisms, group_from_aut, invariant_picard_rank, isomorphism, ColoredGraph,
    GroupTable, PermGroup, Permutation,
};
use crate::error::{Error, Result};
use crate::lattice::{inverse_rational, IntVector};
use crate::types::{dual_graph, enumerate_types, DualGraph, SurfaceType, VertexKind};

/// A cyclic cover `T -> S` of prime degree given by one torsion class.
#[derive(Clone, Debug)]
pub struct Cover {
    pub base: &'static SurfaceType,
    pub cover: &'static SurfaceType,
    pub p: i64,
    pub class: TorsionClass,
    pub branch: BranchData,
}

/// All prime-degree covers of a type, one per subgroup of order p of the torsion group.
pub fn prime_covers(s: &'static SurfaceType) -> Result<Vec<Cover>> {
    let ctx = CoverContext::new(s)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for x in ctx.group.elements() {
        let o = ctx.group.element_order(&x);
        if o < 2 || (2..o).any(|d| o % d == 0) {
            continue;
        }
        let sub = ctx.group.span(&[x.clone()]);
        if !seen.insert(sub) {
            continue;
        }
        let step = ctx.cover_along_chain(&[x.clone()])?;
        let class = ctx.class(&x);
        let branch = branch_data(s, &class)?;
        out.push(Cover { base: s, cover: step.surface, p: o, class, branch });
    }
    Ok(out)
}

/// Image of a vertex of Γ(Y).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Image {
    Vertex(usize),
    NonExtremal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum FiberKind {
    Disjoint,
    Star,
    IrreducibleNonnegative,
}

/// One solution of the correspondence problem.
#[derive(Clone, Debug, Serialize)]
pub struct Correspondence {
    pub base: String,
    pub cover: String,
    /// deck transformation as an automorphism of Γ(Y)
    pub sigma: Permutation,
    /// relation between vertices of Γ(Y) and Γ(X) ∪ {NonExtremal}
    pub pairs: Vec<(usize, Image)>,
    /// fiber type over each line of X
    pub fiber_kinds: BTreeMap<usize, FiberKind>,
    /// X lines whose preimage is a curve vertex of Y (degree 8 and 9 covers)
    pub curve_fibers: Vec<(usize, usize)>,
    /// set when some 3-star could equally be non-extremal
    pub flagged: bool,
}

impl Correspondence {
    pub fn images(&self, y: usize) -> Vec<Image> {
        self.pairs.iter().filter(|p| p.0 == y).map(|p| p.1).collect()
    }

    pub fn is_function(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.pairs.iter().all(|p| seen.insert(p.0))
    }
}

/// Both dual graphs of a cover with the projected Gram data.
pub struct CoverGraphs {
    pub x: DualGraph,
    pub y: DualGraph,
    pub branched: BTreeSet<usize>,
    /// `p (D'.E')` for X vertices, `D'` the projection orthogonal to the branched nodes
    pub projected: Vec<Vec<Rational64>>,
    projections: Vec<Vec<Rational64>>,
}

impl CoverGraphs {
    pub fn new(c: &Cover) -> Result<CoverGraphs> {
        let x = dual_graph(c.base)?;
        let y = dual_graph(c.cover)?;
        let nodes = x.indices(VertexKind::Node);
        // simple roots and X nodes are in the same order
        let branched: BTreeSet<usize> = c.branch.nodes.iter().map(|&(i, _)| nodes[i]).collect();
        let b: Vec<usize> = branched.iter().copied().collect();
        let n = x.len();
        let projections: Vec<Vec<Rational64>> = if b.is_empty() {
            (0..n).map(|i| (0..n).map(|j| q(x.weight_full(i, j))).collect()).collect()
        } else {
            let gb: Vec<Vec<i64>> = b.iter().map(|&i| b.iter().map(|&j| x.weight_full(i, j)).collect()).collect();
            let ginv = inverse_rational(&gb).expect("branched nodes are independent");
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut s = q(x.weight_full(i, j));
                            for (a, &bi) in b.iter().enumerate() {
                                for (c2, &bj) in b.iter().enumerate() {
                                    s -= q(x.weight_full(i, bi)) * ginv[a][c2] * q(x.weight_full(bj, j));
                                }
                            }
                            s
                        })
                        .collect()
                })
                .collect()
        };
        let p = q(c.p);
        let projected = projections.iter().map(|r| r.iter().map(|v| *v * p).collect()).collect();
        Ok(CoverGraphs { x, y, branched, projected, projections })
    }

    /// `D'.E'` without the factor p.
    pub fn projection_pairing(&self, i: usize, j: usize) -> Rational64 {
        self.projections[i][j]
    }
}

fn q(x: i64) -> Rational64 {
    Rational64::from_integer(x)
}

trait FullWeight {
    fn weight_full(&self, i: usize, j: usize) -> i64;
}

impl FullWeight for DualGraph {
    fn weight_full(&self, i: usize, j: usize) -> i64 {
        if i == j {
            self.vertices[i].self_int
        } else {
            self.pair(&self.vertices[i].class, &self.vertices[j].class)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum OrbitKind {
    Nodes,
    DisjointLines,
    MeetingLines,
    Circle,
    Curves,
}

#[derive(Clone, Debug)]
struct Orbit {
    members: Vec<usize>,
    kind: OrbitKind,
    sum: IntVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value {
    Vertex(usize),
    /// a class of X lines with equal projection, by index into `line_classes`
    LineClass(usize),
    NonExtremal,
    Unmatched,
}

fn orbits_of(y: &DualGraph, sigma: &Permutation, p: i64) -> Option<Vec<Orbit>> {
    let mut done = vec![false; y.len()];
    let mut out = Vec::new();
    for v in 0..y.len() {
        if done[v] {
            continue;
        }
        let mut members = vec![v];
        let mut w = sigma.apply(v);
        while w != v {
            members.push(w);
            w = sigma.apply(w);
        }
        for &m in &members {
            done[m] = true;
        }
        let mut sum = vec![0; y.form.len()];
        for &m in &members {
            for (a, b) in sum.iter_mut().zip(&y.vertices[m].class) {
                *a += b;
            }
        }
        let k = members.len();
        let meet = |a: usize, b: usize| y.weight(members[a], members[b]) > 0;
        let kind = match y.vertices[v].kind {
            VertexKind::Node => {
                if k > 1 && (0..k).any(|a| (a + 1..k).any(|b| meet(a, b))) {
                    return None;
                }
                OrbitKind::Nodes
            }
            VertexKind::Curve => OrbitKind::Curves,
            VertexKind::Line => {
                if k == 1 {
                    return None;
                }
                let degs: Vec<usize> = (0..k).map(|a| (0..k).filter(|&b| b != a && meet(a, b)).count()).collect();
                if degs.iter().all(|&d| d == 0) {
                    OrbitKind::DisjointLines
                } else if p == 3 && degs.iter().all(|&d| d == 2) {
                    OrbitKind::MeetingLines
                } else if degs.iter().all(|&d| d == 2) || (p == 2 && degs.iter().all(|&d| d == 1)) {
                    OrbitKind::Circle
                } else {
                    return None;
                }
            }
        };
        out.push(Orbit { members, kind, sum });
    }
    Some(out)
}

/// Deck transformation candidates: elements of Cris(Y) of order dividing p that
/// fix no line and whose invariant Picard rank is `10 - deg(X) - #branched`,
/// one per conjugacy class of generated subgroup.
pub fn deck_candidates(g: &CoverGraphs, c: &Cover) -> Vec<Permutation> {
    let cris = graph_automorphisms(&g.y);
    if !cris.is_materialized() {
        warn!("Cris({}) is too large to search for deck transformations", c.cover.name);
        return Vec::new();
    }
    let target = 10 - c.base.degree as usize - g.branched.len();
    let lines = g.y.indices(VertexKind::Line);
    let table = (cris.order() <= 5000).then(|| GroupTable::new(&cris.elements));
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in &cris.elements {
        if (c.p as usize) % s.order() != 0 || lines.iter().any(|&l| s.apply(l) == l) {
            continue;
        }
        let h = PermGroup::generate(g.y.len(), vec![s.clone()]);
        if invariant_picard_rank(&g.y, &h) != target {
            continue;
        }
        let key = match &table {
            Some(t) => {
                let idx: Vec<u32> = h.elements.iter().map(|e| t.index_of(e).unwrap()).collect();
                t.canonical(&idx)
            }
            None => h.elements.iter().map(|e| cris.elements.binary_search(e).unwrap() as u32).collect(),
        };
        if seen.insert(key) {
            out.push(s.clone());
        }
    }
    out
}

struct Csp<'a> {
    g: &'a CoverGraphs,
    orbits: Vec<Orbit>,
    domains: Vec<Vec<Value>>,
    line_classes: Vec<Vec<usize>>,
    unbranched_nodes: Vec<usize>,
    x_lines: Vec<usize>,
    k_y: IntVector,
}

impl Csp<'_> {
    fn rep(&self, v: Value) -> Option<usize> {
        match v {
            Value::Vertex(x) => Some(x),
            Value::LineClass(c) => Some(self.line_classes[c][0]),
            _ => None,
        }
    }

    fn consistent(&self, i: usize, vi: Value, j: usize, vj: Value) -> bool {
        let (Some(a), Some(b)) = (self.rep(vi), self.rep(vj)) else { return true };
        if vi == vj {
            return false;
        }
        if let (Value::LineClass(c), Value::Vertex(x)) | (Value::Vertex(x), Value::LineClass(c)) = (vi, vj) {
            if self.line_classes[c].contains(&x) {
                return false;
            }
        }
        let s = self.g.y.pair(&self.orbits[i].sum, &self.orbits[j].sum);
        q(s) == self.g.projected[a][b]
    }

    fn solve(&self) -> Vec<Vec<Value>> {
        let n = self.orbits.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (self.domains[i].len(), i));
        let mut assign = vec![Value::Unmatched; n];
        let mut out = Vec::new();
        self.dfs(0, &order, &mut assign, &mut out);
        out
    }

    fn dfs(&self, k: usize, order: &[usize], assign: &mut Vec<Value>, out: &mut Vec<Vec<Value>>) {
        if k == order.len() {
            if self.complete(assign) {
                out.push(assign.clone());
            }
            return;
        }
        let i = order[k];
        for &v in &self.domains[i] {
            if order[..k].iter().all(|&j| self.consistent(i, v, j, assign[j])) {
                assign[i] = v;
                self.dfs(k + 1, order, assign, out);
            }
        }
        assign[i] = Value::Unmatched;
    }

    fn complete(&self, assign: &[Value]) -> bool {
        let mut hit = BTreeSet::new();
        for v in assign {
            match *v {
                Value::Vertex(x) => {
                    hit.insert(x);
                }
                Value::LineClass(c) => hit.extend(self.line_classes[c].iter().copied()),
                _ => {}
            }
        }
        if self.unbranched_nodes.iter().any(|n| !hit.contains(n)) {
            return false;
        }
        self.x_lines.iter().filter(|l| !hit.contains(l)).all(|&l| self.g.projected[l][l] >= Rational64::zero())
    }
}

/// All correspondences up to the Cris(Y) x Cris(X) action.
pub fn solve_correspondence(c: &Cover) -> Result<Vec<Correspondence>> {
    let g = CoverGraphs::new(c)?;
    let sols = solve_with(&g, c)?;
    if sols.is_empty() {
        return Err(Error::Classification(format!(
            "no correspondence for the degree {} cover {} -> {}",
            c.p, c.cover.name, c.base.name
        )));
    }
    Ok(sols)
}

pub fn solve_with(g: &CoverGraphs, c: &Cover) -> Result<Vec<Correspondence>> {
    let x = &g.x;
    let unbranched_nodes: Vec<usize> =
        x.indices(VertexKind::Node).into_iter().filter(|n| !g.branched.contains(n)).collect();
    let x_lines = x.indices(VertexKind::Line);
    // X lines with identical projections
    let mut line_classes: Vec<Vec<usize>> = Vec::new();
    for &l in &x_lines {
        let same = |m: usize| (0..x.len()).all(|j| g.projections[l][j] == g.projections[m][j]);
        match line_classes.iter_mut().find(|cl| same(cl[0])) {
            Some(cl) => cl.push(l),
            None => line_classes.push(vec![l]),
        }
    }
    let k_y = g.y.canonical.clone();
    let mut found: Vec<Correspondence> = Vec::new();
    let mut graphs: Vec<ColoredGraph> = Vec::new();
    for sigma in deck_candidates(g, c) {
        let Some(orbits) = orbits_of(&g.y, &sigma, c.p) else { continue };
        let domains: Vec<Vec<Value>> = orbits
            .iter()
            .map(|o| {
                let s2 = q(g.y.pair(&o.sum, &o.sum));
                let fits = |x: usize| g.projected[x][x] == s2;
                match o.kind {
                    OrbitKind::Nodes => unbranched_nodes.iter().copied().filter(|&n| fits(n)).map(Value::Vertex).collect(),
                    OrbitKind::DisjointLines => x_lines.iter().copied().filter(|&l| fits(l)).map(Value::Vertex).collect(),
                    OrbitKind::MeetingLines => {
                        let mut d: Vec<Value> = x_lines.iter().copied().filter(|&l| fits(l)).map(Value::Vertex).collect();
                        d.push(Value::NonExtremal);
                        d
                    }
                    OrbitKind::Circle => vec![Value::NonExtremal],
                    OrbitKind::Curves => {
                        let kdot = g.y.pair(&o.sum, &k_y);
                        (0..line_classes.len())
                            .filter(|&ci| fits(line_classes[ci][0]) && kdot == -c.p)
                            .map(Value::LineClass)
                            .collect()
                    }
                }
            })
            .collect();
        let csp = Csp {
            g,
            orbits,
            domains,
            line_classes: line_classes.clone(),
            unbranched_nodes: unbranched_nodes.clone(),
            x_lines: x_lines.clone(),
            k_y: k_y.clone(),
        };
        let _ = &csp.k_y;
        for assign in csp.solve() {
            let corr = build(c, g, &csp, &sigma, &assign);
            let cg = combined_graph(g, &corr);
            if graphs.iter().any(|h| isomorphism(h, &cg).is_some()) {
                continue;
            }
            graphs.push(cg);
            found.push(corr);
        }
    }
    // a 3-star read as non-extremal is recorded, the star reading is flagged
    let any_ne_star = found.iter().any(|f| f.flagged);
    if any_ne_star {
        found.sort_by_key(|f| !f.pairs.iter().any(|p| p.1 == Image::NonExtremal));
    }
    debug!("{} -> {}: {} correspondence classes", c.cover.name, c.base.name, found.len());
    Ok(found)
}

fn build(c: &Cover, g: &CoverGraphs, csp: &Csp, sigma: &Permutation, assign: &[Value]) -> Correspondence {
    let mut pairs = Vec::new();
    let mut fiber_kinds = BTreeMap::new();
    let mut curve_fibers = Vec::new();
    let mut flagged = false;
    for (o, v) in csp.orbits.iter().zip(assign) {
        match *v {
            Value::Vertex(x) => {
                for &m in &o.members {
                    pairs.push((m, Image::Vertex(x)));
                }
                match o.kind {
                    OrbitKind::DisjointLines => {
                        fiber_kinds.insert(x, FiberKind::Disjoint);
                    }
                    OrbitKind::MeetingLines => {
                        fiber_kinds.insert(x, FiberKind::Star);
                        flagged = true;
                    }
                    _ => {}
                }
            }
            Value::LineClass(ci) => {
                for &x in &csp.line_classes[ci] {
                    for &m in &o.members {
                        pairs.push((m, Image::Vertex(x)));
                        curve_fibers.push((m, x));
                    }
                    fiber_kinds.insert(x, FiberKind::IrreducibleNonnegative);
                }
            }
            Value::NonExtremal => {
                if o.kind == OrbitKind::MeetingLines {
                    flagged = true;
                }
                for &m in &o.members {
                    pairs.push((m, Image::NonExtremal));
                }
            }
            Value::Unmatched => {}
        }
    }
    for &l in &csp.x_lines {
        fiber_kinds.entry(l).or_insert(FiberKind::IrreducibleNonnegative);
    }
    pairs.sort();
    let _ = g;
    Correspondence {
        base: c.base.name.clone(),
        cover: c.cover.name.clone(),
        sigma: sigma.clone(),
        pairs,
        fiber_kinds,
        curve_fibers,
        flagged,
    }
}

pub const RELATION: i64 = 1000;
pub const SIDE_X: u64 = 1 << 40;
pub const NE_FLAG: u64 = 1 << 41;

/// Γ(Y) ⊔ Γ(X) with relation edges; Y vertices come first.
pub fn combined_graph(g: &CoverGraphs, corr: &Correspondence) -> ColoredGraph {
    let cy = ColoredGraph::from_dual(&g.y);
    let cx = ColoredGraph::from_dual(&g.x);
    let (ny, nx) = (cy.len(), cx.len());
    let n = ny + nx;
    let mut weights = vec![vec![0; n]; n];
    for i in 0..ny {
        for j in 0..ny {
            weights[i][j] = cy.weights[i][j];
        }
    }
    for i in 0..nx {
        for j in 0..nx {
            weights[ny + i][ny + j] = cx.weights[i][j];
        }
    }
    let mut colors: Vec<u64> = cy.colors.clone();
    colors.extend(cx.colors.iter().map(|c| c | SIDE_X));
    for &(y, im) in &corr.pairs {
        match im {
            Image::Vertex(x) => {
                weights[y][ny + x] = RELATION;
                weights[ny + x][y] = RELATION;
            }
            Image::NonExtremal => colors[y] |= NE_FLAG,
        }
    }
    ColoredGraph { weights, colors }
}

/// Stabilizer of the correspondence in Cris(Y) x Cris(X), acting on Y vertices then X vertices.
pub fn cris_pi(g: &CoverGraphs, corr: &Correspondence) -> PermGroup {
    let cg = combined_graph(g, corr);
    group_from_aut(cg.len(), automorphisms(&cg))
}

/// One row of an accumulation table.
#[derive(Clone, Debug, Serialize)]
pub struct AccumulationRecord {
    #[serde(skip)]
    pub h_s: PermGroup,
    #[serde(skip)]
    pub h_t: PermGroup,
    /// canonical encoding of the H_S conjugacy class in the ambient group
    #[serde(skip)]
    pub h_s_class: Vec<u32>,
    pub h_s_name: String,
    pub h_t_name: String,
    pub h_s_generators: Vec<String>,
    pub h_t_generators: Vec<String>,
    pub rho_s: usize,
    pub rho_t: usize,
    pub geq: bool,
    pub gt: bool,
    pub face_contracting: bool,
}

pub const CRIS_PI_SUBGROUP_BOUND: u128 = 4096;

/// Pairs (H_S, H_T) of projections of subgroups H of Cris(π), up to conjugacy
/// in the projected groups, with invariant Picard ranks; sorted by |H_S|
/// descending then canonical encoding.
pub fn accumulation_table(g: &CoverGraphs, corr: &Correspondence) -> Result<Vec<AccumulationRecord>> {
    let pi = cris_pi(g, corr);
    let ny = g.y.len();
    let nx = g.x.len();
    let ys: Vec<usize> = (0..ny).collect();
    let xs: Vec<usize> = (ny..ny + nx).collect();
    let amb_s = ambient(graph_automorphisms(&g.x), || pi.restrict(&xs));
    let amb_t = ambient(graph_automorphisms(&g.y), || pi.restrict(&ys));
    let tab_s = GroupTable::new(&amb_s.elements);
    let tab_t = GroupTable::new(&amb_t.elements);
    let table = GroupTable::new(pi_elements(&pi)?);
    let subs = table.subgroup_classes();
    if pi.order() > CRIS_PI_SUBGROUP_BOUND {
        return Err(Error::Refused(format!("Cris(pi) of order {} exceeds the subgroup bound", pi.order())));
    }
    let face = face_contracting(corr);
    let mut records: BTreeMap<(std::cmp::Reverse<usize>, Vec<u32>, Vec<u32>), AccumulationRecord> = BTreeMap::new();
    for h in subs {
        let grp = PermGroup::from_elements(pi.degree, h.iter().map(|&i| table.elements[i as usize].clone()).collect());
        let h_s = grp.restrict(&xs);
        let h_t = grp.restrict(&ys);
        let idx = |t: &GroupTable, e: &[Permutation]| -> Vec<u32> {
            let mut v: Vec<u32> = e.iter().map(|p| t.index_of(p).unwrap()).collect();
            v.sort_unstable();
            v
        };
        let ks = tab_s.canonical(&idx(&tab_s, &h_s.elements));
        let kt = tab_t.canonical(&idx(&tab_t, &h_t.elements));
        let key = (std::cmp::Reverse(h_s.elements.len()), ks.clone(), kt);
        if records.contains_key(&key) {
            continue;
        }
        let rho_s = invariant_picard_rank(&g.x, &h_s);
        let rho_t = invariant_picard_rank(&g.y, &h_t);
        let lx: Vec<String> = g.x.vertices.iter().map(|v| v.label.clone()).collect();
        let ly: Vec<String> = g.y.vertices.iter().map(|v| v.label.clone()).collect();
        records.insert(
            key,
            AccumulationRecord {
                h_s_class: ks,
                h_s_name: h_s.name(),
                h_t_name: h_t.name(),
                h_s_generators: h_s.generators.iter().map(|p| p.to_cycle_string(&lx)).collect(),
                h_t_generators: h_t.generators.iter().map(|p| p.to_cycle_string(&ly)).collect(),
                h_s,
                h_t,
                rho_s,
                rho_t,
                geq: rho_t >= rho_s,
                gt: rho_t > rho_s,
                face_contracting: face,
            },
        );
    }
    Ok(records.into_values().collect())
}

fn ambient(full: PermGroup, fallback: impl Fn() -> PermGroup) -> PermGroup {
    if full.is_materialized() && full.order() <= AMBIENT_BOUND {
        full
    } else {
        fallback()
    }
}

const AMBIENT_BOUND: u128 = 5000;

fn pi_elements(pi: &PermGroup) -> Result<&[Permutation]> {
    if pi.is_materialized() {
        Ok(&pi.elements)
    } else {
        Err(Error::Refused(format!("Cris(pi) of order {} is too large", pi.order())))
    }
}

/// One row per conjugacy class of H_S: the compatible H_T of largest
/// invariant rank, ties broken towards the larger group.
pub fn best_rows(records: &[AccumulationRecord]) -> Vec<&AccumulationRecord> {
    let mut best: BTreeMap<(std::cmp::Reverse<usize>, &[u32]), &AccumulationRecord> = BTreeMap::new();
    for r in records {
        let key = (std::cmp::Reverse(r.h_s.elements.len()), r.h_s_class.as_slice());
        let better = |o: &AccumulationRecord| (r.rho_t, r.h_t.elements.len()) > (o.rho_t, o.h_t.elements.len());
        match best.get(&key) {
            Some(o) if !better(o) => {}
            _ => {
                best.insert(key, r);
            }
        }
    }
    best.into_values().collect()
}

/// Two extremal curves of Y with the same image.
pub fn face_contracting(corr: &Correspondence) -> bool {
    let mut count: HashMap<usize, usize> = HashMap::new();
    for &(_, im) in &corr.pairs {
        if let Image::Vertex(x) = im {
            *count.entry(x).or_default() += 1;
        }
    }
    count.values().any(|&c| c >= 2)
}

/// Outcome of the accumulation search for one cover.
#[derive(Clone, Debug, Serialize)]
pub struct CoverSearch {
    pub base: String,
    pub cover: String,
    pub lines: usize,
    pub degree_s: u8,
    pub degree_t: u8,
    pub p: i64,
    pub geq: bool,
    pub gt: bool,
    pub solutions: usize,
    pub records: Vec<AccumulationRecord>,
}

/// Solve and search one cover; records from every correspondence class are merged.
pub fn search_cover(c: &Cover) -> Result<CoverSearch> {
    let g = CoverGraphs::new(c)?;
    let sols = solve_with(&g, c)?;
    // in degree 1 the relation and the function reading of the correspondence can differ
    for s in sols.iter().filter(|s| c.base.degree == 1 && !s.is_function()) {
        warn!("{} -> {}: correspondence is not a function; Cris(pi) uses the relation", s.cover, s.base);
    }
    if sols.is_empty() {
        return Err(Error::Classification(format!("no correspondence for {} -> {}", c.cover.name, c.base.name)));
    }
    let mut records = accumulation_table(&g, &sols[0])?;
    for other in &sols[1..] {
        let alt = accumulation_table(&g, other)?;
        let summary = |r: &[AccumulationRecord]| -> BTreeSet<(String, String, usize, usize)> {
            r.iter().filter(|x| x.geq).map(|x| (x.h_s_name.clone(), x.h_t_name.clone(), x.rho_s, x.rho_t)).collect()
        };
        if summary(&alt) != summary(&records) {
            info!("{} -> {}: correspondence classes give different (>=) rows", c.cover.name, c.base.name);
            records.extend(alt);
        }
    }
    Ok(CoverSearch {
        base: c.base.name.clone(),
        cover: c.cover.name.clone(),
        lines: c.base.lines,
        degree_s: c.base.degree,
        degree_t: c.cover.degree,
        p: c.p,
        geq: records.iter().any(|r| r.geq),
        gt: records.iter().any(|r| r.gt),
        solutions: sols.len(),
        records,
    })
}

/// One row per (nonprimitive type, prime cover type).
#[derive(Clone, Debug, Serialize)]
pub struct SummaryRow {
    pub degree_s: u8,
    pub lines: usize,
    pub type_s: String,
    pub degree_t: u8,
    pub type_t: String,
    pub geq: bool,
    pub gt: bool,
}

pub const DEGREE_ONE_MAX_LINES: usize = 4;

/// Accumulation summary for every nonprimitive geometric type of a degree
/// (degree 1 limited to at most 4 lines).
pub fn summary_table(degree: u8) -> Result<Vec<SummaryRow>> {
    summary_table_with(degree, (degree == 1).then_some(DEGREE_ONE_MAX_LINES))
}

pub fn summary_table_with(degree: u8, max_lines: Option<usize>) -> Result<Vec<SummaryRow>> {
    let mut rows: BTreeMap<(usize, String, String), SummaryRow> = BTreeMap::new();
    for s in enumerate_types(degree)? {
        if !s.geometric || s.pi1.is_trivial() || max_lines.is_some_and(|m| s.lines > m) {
            continue;
        }
        if degree == 1 && s.lines > DEGREE_ONE_MAX_LINES {
            warn!("{} is outside the computed range of degree 1; this may be slow", s.name);
        }
        for c in prime_covers(s)? {
            let key = (s.lines, s.name.clone(), c.cover.name.clone());
            if rows.get(&key).is_some_and(|r| r.geq && r.gt) {
                continue;
            }
            let r = search_cover(&c)?;
            let row = rows.entry(key).or_insert(SummaryRow {
                degree_s: s.degree,
                lines: s.lines,
                type_s: s.name.clone(),
                degree_t: c.cover.degree,
                type_t: c.cover.name.clone(),
                geq: false,
                gt: false,
            });
            row.geq |= r.geq;
            row.gt |= r.gt;
        }
    }
    Ok(rows.into_values().collect())
}

/// Result of the exhaustive degree >= 3 scan.
#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub covers_checked: usize,
    pub geq_hits_degree_ge_4: Vec<String>,
    pub gt_hits_degree_ge_3: Vec<String>,
    pub geq_degree_3: Vec<String>,
    pub nonprimitive_degree_ge_5: Vec<String>,
}

impl ScanReport {
    pub fn consistent(&self) -> bool {
        self.geq_hits_degree_ge_4.is_empty() && self.gt_hits_degree_ge_3.is_empty() && self.nonprimitive_degree_ge_5.is_empty()
    }
}

/// No (>=) cover over degree >= 4 and no (>) cover over degree >= 3.
pub fn accumulation_scan() -> Result<ScanReport> {
    let mut rep = ScanReport {
        covers_checked: 0,
        geq_hits_degree_ge_4: Vec::new(),
        gt_hits_degree_ge_3: Vec::new(),
        geq_degree_3: Vec::new(),
        nonprimitive_degree_ge_5: Vec::new(),
    };
    for d in 3..=9u8 {
        for s in enumerate_types(d)? {
            if !s.geometric || s.pi1.is_trivial() {
                continue;
            }
            if d >= 5 {
                rep.nonprimitive_degree_ge_5.push(s.name.clone());
                continue;
            }
            for c in prime_covers(s)? {
                rep.covers_checked += 1;
                let r = search_cover(&c)?;
                let tag = format!("{} -> {}", c.cover.name, s.name);
                if r.geq && d >= 4 {
                    rep.geq_hits_degree_ge_4.push(tag.clone());
                }
                if r.gt {
                    rep.gt_hits_degree_ge_3.push(tag.clone());
                }
                if r.geq && d == 3 {
                    rep.geq_degree_3.push(tag);
                }
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::parse_type_name;

    fn cover(base: &str) -> Cover {
        prime_covers(parse_type_name(base).unwrap()).unwrap().remove(0)
    }

    #[test]
    fn a7_branch_and_fibers() {
        let c = cover("S2(A7)");
        assert_eq!(c.cover.name, "S4(A3(4l))");
        let g = CoverGraphs::new(&c).unwrap();
        let labels: Vec<&str> = g.branched.iter().map(|&i| g.x.vertices[i].label.as_str()).collect();
        assert_eq!(labels.len(), 4);
        let sols = solve_correspondence(&c).unwrap();
        assert_eq!(sols.len(), 1);
        let s = &sols[0];
        assert!(s.is_function());
        assert!(s.fiber_kinds.values().all(|k| *k == FiberKind::Disjoint));
    }

    #[test]
    fn example_p5() {
        let c = cover("S1(2A4)");
        assert_eq!(c.p, 5);
        let sols = solve_correspondence(&c).unwrap();
        let s = &sols[0];
        let ne = s.pairs.iter().filter(|p| p.1 == Image::NonExtremal).count();
        assert_eq!(ne, 10);
        assert!(s.fiber_kinds.values().all(|k| *k == FiberKind::IrreducibleNonnegative));
        assert_eq!(s.fiber_kinds.len(), 6);
    }
}
