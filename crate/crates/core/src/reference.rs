//! Bundled reference data from the published tables and figures.
//!
//! Every entry carries a locator string naming where it was read from. The
//! bundle is never regenerated from the engine.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::correspondence::{combined_graph, CoverGraphs, Correspondence, NE_FLAG, RELATION, SIDE_X};
use crate::cris::{isomorphism, ColoredGraph, PermGroup, Permutation};
use crate::error::{Error, Result};
use crate::types::{DualGraph, SurfaceType};

pub const REFERENCE_ENV: &str = "DELPEZZO_REFERENCE";

const BUNDLED: &str = include_str!("../data/reference.json");

/// Branched nodes carry this color bit when figures are compared.
pub const BRANCHED: u64 = 1 << 42;

#[derive(Clone, Debug, Deserialize)]
pub struct ReferenceBundle {
    pub schema_version: u32,
    pub lattices: Vec<LatticeRef>,
    pub non_geometric: Vec<NonGeometricRef>,
    pub families: Vec<FamilyRef>,
    pub summary: Vec<SummaryRef>,
    pub appendix: Vec<AppendixTable>,
    pub cris: Vec<CrisRef>,
    pub figures: Vec<FigureRef>,
    pub fixtures: Vec<FixtureRef>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct LatticeRef {
    pub degree: u8,
    pub root_system: String,
    pub locator: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct NonGeometricRef {
    #[serde(rename = "type")]
    pub type_name: String,
    pub locator: String,
}

/// A cover diagram: nodes are (subgroup name, surface), edges index nodes.
#[derive(Clone, Debug, Deserialize)]
pub struct FamilyRef {
    pub base: String,
    pub group: String,
    pub nodes: Vec<(String, String)>,
    pub edges: Vec<(usize, usize)>,
    pub locator: String,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct SummaryRef {
    pub degree_s: u8,
    pub lines: usize,
    pub type_s: String,
    pub degree_t: u8,
    pub type_t: String,
    pub geq: bool,
    pub gt: bool,
    pub locator: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct AppendixTable {
    pub key: String,
    pub base: String,
    pub cover: String,
    pub rows: Vec<AppendixRow>,
    pub locator: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct AppendixRow {
    pub h_s: String,
    pub h_t: String,
    pub rho_s: usize,
    pub rho_t: usize,
    pub strict: bool,
    #[serde(default)]
    pub h_s_label: Option<String>,
    /// cycles on the figure's E-numbering
    #[serde(default)]
    pub h_s_generators: Vec<String>,
    #[serde(default)]
    pub h_t_generators: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct CrisRef {
    pub key: String,
    #[serde(rename = "type")]
    pub type_name: String,
    pub group: String,
    pub order: u128,
    #[serde(default)]
    pub generators: Vec<String>,
    pub locator: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct FigureVertex {
    pub label: String,
    pub kind: String,
    pub thick: bool,
}

#[derive(Clone, Debug, Deserialize)]
pub struct FigureRef {
    pub key: String,
    pub base: String,
    pub cover: String,
    pub vertices: Vec<FigureVertex>,
    pub edges: Vec<(usize, usize, i64)>,
    pub locator: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct FixtureRef {
    pub claim: String,
    pub key: String,
    #[serde(default)]
    pub h_s_label: Option<String>,
    #[serde(default)]
    pub h_s_normal: bool,
    pub rho_s: usize,
    pub rho_t: usize,
    pub locator: String,
}

impl ReferenceBundle {
    pub fn parse(text: &str) -> Result<ReferenceBundle> {
        let b: ReferenceBundle = serde_json::from_str(text).map_err(|e| Error::Reference(e.to_string()))?;
        if b.schema_version != 1 {
            return Err(Error::Reference(format!("unsupported schema_version {}", b.schema_version)));
        }
        Ok(b)
    }

    /// Explicit path, then the environment variable, then the bundled copy.
    pub fn load(path: Option<&Path>) -> Result<ReferenceBundle> {
        let env = std::env::var_os(REFERENCE_ENV);
        let path = path.or(env.as_deref().map(Path::new));
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Reference(format!("{}: {e}", p.display())))?;
                ReferenceBundle::parse(&text)
            }
            None => Ok(bundled().clone()),
        }
    }

    pub fn figure(&self, key: &str) -> Option<&FigureRef> {
        self.figures.iter().find(|f| f.key == key)
    }

    pub fn table(&self, key: &str) -> Option<&AppendixTable> {
        self.appendix.iter().find(|t| t.key == key)
    }
}

pub fn bundled() -> &'static ReferenceBundle {
    static B: OnceLock<ReferenceBundle> = OnceLock::new();
    B.get_or_init(|| ReferenceBundle::parse(BUNDLED).expect("bundled reference data is valid"))
}

/// Picks the candidate that the bundled cover diagrams place directly above `below`.
pub fn bundled_cover_choice(below: &SurfaceType, pool: &[&'static SurfaceType]) -> Option<&'static SurfaceType> {
    let mut hits: Vec<&'static SurfaceType> = Vec::new();
    for f in &bundled().families {
        for &(a, b) in &f.edges {
            // edges point from the cover to the covered surface
            if f.nodes[b].1 != below.name {
                continue;
            }
            if let Some(t) = pool.iter().find(|t| t.name == f.nodes[a].1) {
                if !hits.iter().any(|h| h.name == t.name) {
                    hits.push(t);
                }
            }
        }
    }
    (hits.len() == 1).then(|| hits[0])
}

fn kind_color(kind: &str) -> Result<(u64, i64)> {
    match kind {
        "line" => Ok((0, -1)),
        "node" => Ok((1, -2)),
        "curve" => Ok((2, 0)),
        _ => Err(Error::Reference(format!("unknown figure vertex kind {kind}"))),
    }
}

/// The E-numbers a figure label `F5,7''` refers to, or `None` for a letter
/// such as `Fa` whose target is left open by the figure.
fn label_targets(label: &str) -> Option<Vec<String>> {
    let body = label[1..].trim_end_matches('\'');
    body.split(',').map(|x| x.parse::<usize>().ok().map(|i| i.to_string())).collect()
}

/// How an open F-label (`Fa`) is read: as one E-number or as non-extremal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpenLabel {
    Target(String),
    NonExtremal,
}

impl FigureRef {
    fn side(&self, prefix: char) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| self.vertices[i].label.starts_with(prefix)).collect()
    }

    pub fn has_open_labels(&self) -> bool {
        self.vertices.iter().any(|v| v.label.starts_with('F') && label_targets(&v.label).is_none())
    }

    /// Readings of the open labels: each E-number among the X vertices, plus non-extremal.
    pub fn open_readings(&self) -> Vec<OpenLabel> {
        if !self.has_open_labels() {
            return vec![OpenLabel::NonExtremal];
        }
        let mut out: Vec<OpenLabel> =
            self.side('E').iter().map(|&i| OpenLabel::Target(self.vertices[i].label[1..].to_string())).collect();
        out.push(OpenLabel::NonExtremal);
        out
    }

    /// Combined graph of the figure, F vertices then E vertices, with the
    /// conventions of the computed combined graph plus branched colors.
    pub fn combined(&self, open: &OpenLabel) -> Result<(ColoredGraph, Vec<usize>)> {
        let mut order = self.side('F');
        let ny = order.len();
        order.extend(self.side('E'));
        let pos: HashMap<usize, usize> = order.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let n = order.len();
        let mut weights = vec![vec![0i64; n]; n];
        let mut colors = vec![0u64; n];
        let mut e_index: BTreeMap<String, usize> = BTreeMap::new();
        for (k, &i) in order.iter().enumerate() {
            let v = &self.vertices[i];
            let (kc, si) = kind_color(&v.kind)?;
            weights[k][k] = si;
            colors[k] = (kc << 32) | ((si + (1 << 16)) as u64);
            if k >= ny {
                colors[k] |= SIDE_X;
                if v.thick {
                    colors[k] |= BRANCHED;
                }
                e_index.insert(v.label[1..].to_string(), k);
            }
        }
        for &(a, b, w) in &self.edges {
            let (Some(&a), Some(&b)) = (pos.get(&a), pos.get(&b)) else { continue };
            weights[a][b] = w;
            weights[b][a] = w;
        }
        for k in 0..ny {
            let targets = match (label_targets(&self.vertices[order[k]].label), open) {
                (Some(t), _) => Some(t),
                (None, OpenLabel::Target(t)) => Some(vec![t.clone()]),
                (None, OpenLabel::NonExtremal) => None,
            };
            let hits: Vec<usize> = targets.iter().flatten().filter_map(|t| e_index.get(t).copied()).collect();
            if hits.is_empty() {
                colors[k] |= NE_FLAG;
            }
            for x in hits {
                weights[k][x] = RELATION;
                weights[x][k] = RELATION;
            }
        }
        Ok((ColoredGraph { weights, colors }, order))
    }

    /// Graph on the E vertices alone.
    pub fn base_graph(&self) -> Result<(ColoredGraph, Vec<usize>)> {
        let (g, order) = self.combined(&OpenLabel::NonExtremal)?;
        let ny = self.side('F').len();
        let keep: Vec<usize> = (ny..order.len()).collect();
        let weights = keep.iter().map(|&i| keep.iter().map(|&j| g.weights[i][j]).collect()).collect();
        let colors = keep.iter().map(|&i| g.colors[i]).collect();
        Ok((ColoredGraph { weights, colors }, order[ny..].to_vec()))
    }

    /// Map from E-number to figure vertex position.
    pub fn e_numbers(&self) -> BTreeMap<String, usize> {
        self.side('E').into_iter().map(|i| (self.vertices[i].label[1..].to_string(), i)).collect()
    }
}

/// Computed combined graph with branched X nodes colored.
pub fn marked_combined_graph(g: &CoverGraphs, corr: &Correspondence) -> ColoredGraph {
    let mut cg = combined_graph(g, corr);
    let ny = g.y.len();
    for &b in &g.branched {
        cg.colors[ny + b] |= BRANCHED;
    }
    cg
}

/// Dual graph of X with branched nodes colored.
pub fn marked_base_graph(g: &CoverGraphs) -> ColoredGraph {
    let mut cg = ColoredGraph::from_dual(&g.x);
    for &b in &g.branched {
        cg.colors[b] |= BRANCHED;
    }
    cg
}

/// Drawings show meeting curves by one stroke whatever the intersection
/// number, so figures are compared on incidence only.
fn incidence(mut g: ColoredGraph) -> ColoredGraph {
    let n = g.len();
    for i in 0..n {
        for j in 0..n {
            if i != j && g.weights[i][j] > 0 && g.weights[i][j] != RELATION {
                g.weights[i][j] = 1;
            }
        }
    }
    g
}

/// Outcome of comparing a figure with the computed correspondences.
#[derive(Clone, Debug)]
pub struct FigureCheck {
    pub key: String,
    pub open: bool,
    /// for each computed solution, the figure readings it matches
    pub matched: Vec<Vec<OpenLabel>>,
    /// E-number to X vertex, from the first matching solution (or the base graph)
    pub x_map: Option<BTreeMap<String, usize>>,
}

impl FigureCheck {
    /// Every solution matches some reading; with open labels, both the
    /// non-extremal reading and some extremal reading are realized.
    pub fn consistent(&self) -> bool {
        if self.matched.is_empty() || self.matched.iter().any(|m| m.is_empty()) {
            return false;
        }
        let all = || self.matched.iter().flatten();
        !self.open
            || (all().any(|r| *r == OpenLabel::NonExtremal) && all().any(|r| matches!(r, OpenLabel::Target(_))))
    }
}

pub fn check_figure(fig: &FigureRef, g: &CoverGraphs, sols: &[Correspondence]) -> Result<FigureCheck> {
    let numbers = fig.e_numbers();
    let ny = g.y.len();
    let mut matched = Vec::new();
    let mut x_map = None;
    for corr in sols {
        let ours = incidence(marked_combined_graph(g, corr));
        let mut hits = Vec::new();
        for reading in fig.open_readings() {
            let (fg, order) = fig.combined(&reading)?;
            if let Some(phi) = isomorphism(&incidence(fg), &ours) {
                if x_map.is_none() {
                    let at: HashMap<usize, usize> = order.iter().enumerate().map(|(k, &i)| (i, k)).collect();
                    x_map = Some(numbers.iter().map(|(e, i)| (e.clone(), phi.apply(at[i]) - ny)).collect());
                }
                hits.push(reading);
            }
        }
        matched.push(hits);
    }
    if x_map.is_none() {
        let (fg, order) = fig.base_graph()?;
        if let Some(phi) = isomorphism(&incidence(fg), &incidence(marked_base_graph(g))) {
            let at: HashMap<usize, usize> = order.iter().enumerate().map(|(k, &i)| (i, k)).collect();
            x_map = Some(numbers.iter().map(|(e, i)| (e.clone(), phi.apply(at[i]))).collect());
        }
    }
    Ok(FigureCheck { key: fig.key.clone(), open: fig.has_open_labels(), matched, x_map })
}

/// Group on the X vertices generated by cycles written on figure E-numbers.
pub fn figure_group(x: &DualGraph, x_map: &BTreeMap<String, usize>, cycles: &[String]) -> Result<PermGroup> {
    let n = x.len();
    let mut gens = Vec::new();
    for c in cycles {
        let mut img: Vec<usize> = (0..n).collect();
        for cyc in c.split(')').map(|s| s.trim_start_matches('(')).filter(|s| !s.trim().is_empty()) {
            let pts: Vec<usize> = cyc
                .split(',')
                .map(|t| x_map.get(t.trim()).copied().ok_or_else(|| Error::Parse(format!("figure label E{t} in {c}"))))
                .collect::<Result<_>>()?;
            for k in 0..pts.len() {
                img[pts[k]] = pts[(k + 1) % pts.len()];
            }
        }
        gens.push(Permutation(img));
    }
    Ok(PermGroup::generate(n, gens))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundle_parses() {
        let b = bundled();
        assert_eq!(b.summary.len(), 22);
        assert_eq!(b.lattices.len(), 7);
        assert!(b.families.iter().all(|f| !f.locator.is_empty()));
        assert!(b.appendix.iter().flat_map(|t| &t.rows).all(|r| r.strict == (r.rho_t > r.rho_s)));
    }

    #[test]
    fn labels() {
        assert_eq!(label_targets("F5,7"), Some(vec!["5".into(), "7".into()]));
        assert_eq!(label_targets("F9''"), Some(vec!["9".into()]));
        assert_eq!(label_targets("Fa'"), None);
    }
}
