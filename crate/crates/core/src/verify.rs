//! Recomputation of the reference bundle and a pass/fail report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::correspondence::{best_rows, prime_covers, search_cover, solve_with, summary_table, Cover, CoverGraphs, CoverSearch};
use crate::covers::{cover_diagram, fundamental_group};
use crate::cris::{cris_group, invariant_picard_rank, GroupTable, PermGroup};
use crate::error::{Error, Result};
use crate::reference::{check_figure, figure_group, AppendixTable, ReferenceBundle};
use crate::types::{del_pezzo_lattice, enumerate_types, parse_type_name};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, expected: impl fmt::Display, computed: impl fmt::Display, pass: bool) -> Check {
        Check { name: name.into(), expected: expected.to_string(), computed: computed.to_string(), pass }
    }

    fn eq<T: PartialEq + fmt::Display>(name: impl Into<String>, expected: T, computed: T) -> Check {
        let pass = expected == computed;
        Check::new(name, expected, computed, pass)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub scope: String,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

impl VerifyReport {
    pub fn new(scope: &str, checks: Vec<Check>) -> VerifyReport {
        let passed = checks.iter().filter(|c| c.pass).count();
        VerifyReport { scope: scope.into(), failed: checks.len() - passed, passed, checks }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    All,
    Types,
    Covers,
    Cris,
    Tables,
    Figures,
}

impl FromStr for Scope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scope> {
        match s {
            "all" => Ok(Scope::All),
            "types" => Ok(Scope::Types),
            "covers" => Ok(Scope::Covers),
            "cris" => Ok(Scope::Cris),
            "tables" => Ok(Scope::Tables),
            "figures" => Ok(Scope::Figures),
            _ => Err(Error::Parse(format!("unknown verify scope {s:?}; expected all, types, covers, cris, tables or figures"))),
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scope::All => "all",
            Scope::Types => "types",
            Scope::Covers => "covers",
            Scope::Cris => "cris",
            Scope::Tables => "tables",
            Scope::Figures => "figures",
        };
        f.write_str(s)
    }
}

pub fn verify(b: &ReferenceBundle, scope: Scope) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let all = scope == Scope::All;
    if all || scope == Scope::Types {
        checks.extend(check_lattices(b)?);
        checks.extend(check_non_geometric(b)?);
        checks.extend(check_line_counts(b)?);
    }
    if all || scope == Scope::Covers {
        checks.extend(check_fundamental_groups(b)?);
        checks.extend(check_covers(b)?);
    }
    if all || scope == Scope::Cris {
        checks.extend(check_cris(b)?);
    }
    if all || scope == Scope::Tables {
        checks.extend(check_tables(b)?);
        checks.extend(check_fixtures(b)?);
        checks.extend(check_summary(b)?);
    }
    if all || scope == Scope::Figures {
        checks.extend(check_figures(b)?);
    }
    Ok(VerifyReport::new(&scope.to_string(), checks))
}

fn canonical_name(name: &str) -> Result<String> {
    Ok(parse_type_name(name)?.name.clone())
}

/// Registry name of a reference name. Names printed without a line-count
/// qualifier are resolved against the computed names in `context`.
fn resolve_name(name: &str, context: &[&str]) -> Result<String> {
    match parse_type_name(name) {
        Ok(t) => Ok(t.name.clone()),
        Err(Error::AmbiguousType { candidates, .. }) => {
            let hits: Vec<&String> = candidates.iter().filter(|c| context.contains(&c.as_str())).collect();
            Ok(if hits.len() == 1 { hits[0].clone() } else { name.to_string() })
        }
        Err(e) => Err(e),
    }
}

pub fn check_lattices(b: &ReferenceBundle) -> Result<Vec<Check>> {
    b.lattices
        .iter()
        .map(|l| Ok(Check::eq(format!("lattice degree {}", l.degree), l.root_system.clone(), del_pezzo_lattice(l.degree)?.ade().to_string())))
        .collect()
}

pub fn check_non_geometric(b: &ReferenceBundle) -> Result<Vec<Check>> {
    let expected: BTreeSet<String> = b.non_geometric.iter().map(|t| canonical_name(&t.type_name)).collect::<Result<_>>()?;
    let mut computed = BTreeSet::new();
    for d in 1..=9 {
        for t in enumerate_types(d)? {
            if !t.geometric {
                computed.insert(t.name.clone());
            }
        }
    }
    let show = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(", ");
    Ok(vec![Check::new("non-geometric types", show(&expected), show(&computed), expected == computed)])
}

pub fn check_line_counts(b: &ReferenceBundle) -> Result<Vec<Check>> {
    b.summary
        .iter()
        .map(|r| Ok(Check::eq(format!("lines of {}", r.type_s), r.lines, parse_type_name(&r.type_s)?.lines)))
        .collect()
}

pub fn check_fundamental_groups(b: &ReferenceBundle) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for f in &b.families {
        let mut seen = BTreeSet::new();
        for (group, surface) in &f.nodes {
            if !seen.insert(surface.clone()) {
                continue;
            }
            let ctx = cover_context(f)?;
            let ctx: Vec<&str> = ctx.iter().map(|s| s.as_str()).collect();
            let t = parse_type_name(&resolve_name(surface, &ctx)?)?;
            out.push(Check::eq(format!("pi1 of {surface} ({})", f.locator), group.clone(), fundamental_group(t)?.to_string()));
        }
    }
    Ok(out)
}

/// Edge multisets of a diagram by (cover name, group of cover, base name, group of base).
pub fn check_covers(b: &ReferenceBundle) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for f in &b.families {
        let d = cover_diagram(parse_type_name(&f.base)?)?;
        let ctx: Vec<&str> = d.nodes.iter().map(|n| n.surface.as_str()).collect();
        let canonical_name = |s: &str| resolve_name(s, &ctx);
        let mut expected: BTreeMap<String, usize> = BTreeMap::new();
        for &(a, c) in &f.edges {
            let key = format!("{} -> {}", canonical_name(&f.nodes[a].1)?, canonical_name(&f.nodes[c].1)?);
            *expected.entry(key).or_default() += 1;
        }
        let mut computed: BTreeMap<String, usize> = BTreeMap::new();
        for e in &d.edges {
            let key = format!("{} -> {}", d.nodes[e.source].surface, d.nodes[e.target].surface);
            *computed.entry(key).or_default() += 1;
        }
        let mut en: BTreeMap<String, usize> = BTreeMap::new();
        for (g, s) in &f.nodes {
            *en.entry(format!("{} {g}", canonical_name(s)?)).or_default() += 1;
        }
        let mut cn: BTreeMap<String, usize> = BTreeMap::new();
        for n in &d.nodes {
            *cn.entry(format!("{} {}", n.surface, n.subgroup_name)).or_default() += 1;
        }
        out.push(Check::new(format!("cover edges of {} ({})", f.base, f.locator), show_multiset(&expected), show_multiset(&computed), expected == computed));
        out.push(Check::new(format!("cover nodes of {} ({})", f.base, f.locator), show_multiset(&en), show_multiset(&cn), en == cn));
    }
    Ok(out)
}

fn cover_context(f: &crate::reference::FamilyRef) -> Result<Vec<String>> {
    Ok(cover_diagram(parse_type_name(&f.base)?)?.nodes.into_iter().map(|n| n.surface).collect())
}

fn show_multiset(m: &BTreeMap<String, usize>) -> String {
    m.iter().map(|(k, v)| if *v == 1 { k.clone() } else { format!("{v}x {k}") }).collect::<Vec<_>>().join("; ")
}

/// The cover of a table or figure: the first prime cover of `base` of type `cover`.
pub fn find_cover(base: &str, cover: &str) -> Result<Cover> {
    let s = parse_type_name(base)?;
    let target = canonical_name(cover)?;
    prime_covers(s)?
        .into_iter()
        .find(|c| c.cover.name == target)
        .ok_or_else(|| Error::Classification(format!("no prime cover {cover} -> {base}")))
}

pub fn check_cris(b: &ReferenceBundle) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for c in &b.cris {
        let t = parse_type_name(&c.type_name)?;
        let g = cris_group(t)?;
        out.push(Check::eq(
            format!("Cris({}) ({})", c.type_name, c.locator),
            format!("{} of order {}", c.group, c.order),
            format!("{} of order {}", g.name(), g.order()),
        ));
        if c.generators.is_empty() {
            continue;
        }
        // named generators act on the figure's numbering
        let Some(fig) = b.figure(&c.key) else { continue };
        let cover = find_cover(&fig.base, &fig.cover)?;
        let graphs = CoverGraphs::new(&cover)?;
        let sols = solve_with(&graphs, &cover)?;
        let fc = check_figure(fig, &graphs, &sols)?;
        let computed = match &fc.x_map {
            Some(m) => {
                let h = figure_group(&graphs.x, m, &c.generators)?;
                let inside = h.is_subgroup_of(&graph_cris(&graphs));
                format!("order {}{}", h.order(), if inside { "" } else { ", not isometries" })
            }
            None => "figure does not match".into(),
        };
        out.push(Check::eq(format!("named generators of Cris({})", c.type_name), format!("order {}", c.order), computed));
    }
    Ok(out)
}

fn graph_cris(g: &CoverGraphs) -> PermGroup {
    crate::cris::graph_automorphisms(&g.x)
}

type Row = (String, String, usize, usize);

fn row_string(r: &Row) -> String {
    format!("({}, {}, {}, {})", r.0, r.1, r.2, r.3)
}

/// Computed rows of one appendix table: one per H_S class with ρ_T >= ρ_S.
pub fn table_rows(search: &CoverSearch) -> Vec<Row> {
    best_rows(&search.records)
        .into_iter()
        .filter(|r| r.geq)
        .map(|r| (r.h_s_name.clone(), r.h_t_name.clone(), r.rho_s, r.rho_t))
        .collect()
}

pub fn check_table(t: &AppendixTable, b: &ReferenceBundle) -> Result<Vec<Check>> {
    let cover = find_cover(&t.base, &t.cover)?;
    let search = search_cover(&cover)?;
    let mut computed: Vec<Row> = table_rows(&search);
    let mut out = Vec::new();
    let mut unmatched = Vec::new();
    for r in &t.rows {
        let want: Row = (r.h_s.clone(), r.h_t.clone(), r.rho_s, r.rho_t);
        let name = format!("{} row {}{}", t.key, row_string(&want), r.h_s_label.as_ref().map(|l| format!(" [{l}]")).unwrap_or_default());
        match computed.iter().position(|c| *c == want) {
            Some(i) => {
                computed.remove(i);
                out.push(Check::new(name, row_string(&want), "present", true));
            }
            None => unmatched.push((name, want)),
        }
    }
    for (name, want) in unmatched {
        let near: Vec<String> = computed.iter().filter(|c| c.0 == want.0).map(row_string).collect();
        let shown = if near.is_empty() { "absent".to_string() } else { format!("absent; same H_S: {}", near.join(" ")) };
        out.push(Check::new(name, row_string(&want), shown, false));
    }
    out.push(Check::new(
        format!("{} no further rows", t.key),
        "none",
        if computed.is_empty() { "none".into() } else { computed.iter().map(row_string).collect::<Vec<_>>().join(" ") },
        computed.is_empty(),
    ));
    // rows given by generators: the named H_S must occur with the stated ranks
    let named: Vec<_> = t.rows.iter().filter(|r| !r.h_s_generators.is_empty()).collect();
    if !named.is_empty() {
        if let Some(fig) = b.figure(&t.key) {
            let graphs = CoverGraphs::new(&cover)?;
            let sols = solve_with(&graphs, &cover)?;
            let fc = check_figure(fig, &graphs, &sols)?;
            for r in named {
                let label = r.h_s_label.clone().unwrap_or_else(|| r.h_s_generators.join(" "));
                let computed = match &fc.x_map {
                    None => "figure does not match".to_string(),
                    Some(m) => {
                        let h = figure_group(&graphs.x, m, &r.h_s_generators)?;
                        let rho = invariant_picard_rank(&graphs.x, &h);
                        let best = best_for(&search, &graphs, &h);
                        format!("rho_S {rho}, best rho_T {}", best.map(|x| x.to_string()).unwrap_or_else(|| "none".into()))
                    }
                };
                out.push(Check::eq(format!("{} named H_S {label}", t.key), format!("rho_S {}, best rho_T {}", r.rho_s, r.rho_t), computed));
            }
        }
    }
    Ok(out)
}

/// Largest ρ_T over records whose H_S is conjugate to `h` in Cris(X).
fn best_for(search: &CoverSearch, g: &CoverGraphs, h: &PermGroup) -> Option<usize> {
    let amb = crate::cris::graph_automorphisms(&g.x);
    if !amb.is_materialized() {
        return None;
    }
    let table = GroupTable::new(&amb.elements);
    let idx = |p: &PermGroup| -> Option<Vec<u32>> {
        let mut v: Vec<u32> = p.elements.iter().map(|e| table.index_of(e)).collect::<Option<_>>()?;
        v.sort_unstable();
        Some(table.canonical(&v))
    };
    let key = idx(h)?;
    search.records.iter().filter(|r| r.h_s.order() == h.order() && idx(&r.h_s).as_ref() == Some(&key)).map(|r| r.rho_t).max()
}

pub fn check_tables(b: &ReferenceBundle) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for t in &b.appendix {
        out.extend(check_table(t, b)?);
    }
    Ok(out)
}

pub fn check_fixtures(b: &ReferenceBundle) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for f in &b.fixtures {
        let t = b.table(&f.key).ok_or_else(|| Error::Reference(format!("fixture {} names missing table {}", f.claim, f.key)))?;
        let cover = find_cover(&t.base, &t.cover)?;
        let graphs = CoverGraphs::new(&cover)?;
        let search = search_cover(&cover)?;
        let row = t.rows.iter().find(|r| r.h_s_label == f.h_s_label && r.rho_s == f.rho_s);
        let computed = if f.h_s_normal {
            let amb = crate::cris::graph_automorphisms(&graphs.x);
            let normal: Vec<_> = search
                .records
                .iter()
                .filter(|r| r.h_s_name == row.map(|x| x.h_s.as_str()).unwrap_or("") && is_normal(&r.h_s, &amb))
                .collect();
            normal.iter().map(|r| (r.rho_s, r.rho_t)).max_by_key(|x| x.1)
        } else if let Some(r) = row.filter(|r| !r.h_s_generators.is_empty()) {
            let fig = b.figure(&f.key);
            let sols = solve_with(&graphs, &cover)?;
            match fig.map(|fig| check_figure(fig, &graphs, &sols)).transpose()?.and_then(|c| c.x_map) {
                Some(m) => {
                    let h = figure_group(&graphs.x, &m, &r.h_s_generators)?;
                    best_for(&search, &graphs, &h).map(|rt| (invariant_picard_rank(&graphs.x, &h), rt))
                }
                None => None,
            }
        } else {
            let rows = table_rows(&search);
            rows.iter().find(|c| c.2 == f.rho_s && c.3 == f.rho_t).or(rows.iter().find(|c| c.2 == f.rho_s)).map(|c| (c.2, c.3))
        };
        let shown = computed.map(|(s, t)| format!("rho(X) {s}, rho(Y) {t}")).unwrap_or_else(|| "no such subgroup".into());
        out.push(Check::eq(format!("fixture {} ({})", f.claim, f.locator), format!("rho(X) {}, rho(Y) {}", f.rho_s, f.rho_t), shown));
    }
    Ok(out)
}

fn is_normal(h: &PermGroup, g: &PermGroup) -> bool {
    g.generators.iter().all(|x| h.conjugate(x).elements == h.elements)
}

pub fn check_summary(b: &ReferenceBundle) -> Result<Vec<Check>> {
    let mut computed = BTreeMap::new();
    let degrees: BTreeSet<u8> = b.summary.iter().map(|r| r.degree_s).collect();
    for d in degrees {
        for r in summary_table(d)? {
            computed.insert((r.type_s.clone(), r.type_t.clone()), r);
        }
    }
    let yn = |x: bool| if x { "YES" } else { "NO" };
    let mut out = Vec::new();
    for r in &b.summary {
        let covers: Vec<&str> = computed.keys().filter(|k| k.0 == r.type_s).map(|k| k.1.as_str()).collect();
        let key = (canonical_name(&r.type_s)?, resolve_name(&r.type_t, &covers)?);
        let expected = format!("{}/{}", yn(r.geq), yn(r.gt));
        let c = computed.get(&key);
        let got = c.map(|c| format!("{}/{}", yn(c.geq), yn(c.gt))).unwrap_or_else(|| "missing".into());
        out.push(Check::eq(format!("summary {} -> {}", r.type_s, r.type_t), expected, got));
    }
    Ok(out)
}

pub fn check_figures(b: &ReferenceBundle) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for fig in &b.figures {
        let cover = find_cover(&fig.base, &fig.cover)?;
        let graphs = CoverGraphs::new(&cover)?;
        let sols = solve_with(&graphs, &cover)?;
        let fc = check_figure(fig, &graphs, &sols)?;
        let computed = fc
            .matched
            .iter()
            .enumerate()
            .map(|(i, m)| format!("solution {i}: {} readings", m.len()))
            .collect::<Vec<_>>()
            .join(", ");
        out.push(Check::new(format!("figure {} ({})", fig.key, fig.locator), "every solution matches", computed, fc.consistent()));
    }
    Ok(out)
}
