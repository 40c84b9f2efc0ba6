use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use delpezzo::correspondence::{
    best_rows, prime_covers, search_cover, solve_with, summary_table_with, CoverGraphs, Image, DEGREE_ONE_MAX_LINES,
};
use delpezzo::covers::{cover_diagram, fundamental_group, is_nonprimitive};
use delpezzo::cris::{cris_group, invariant_picard_rank, subgroups_up_to_conjugacy_bounded, PermGroup};
use delpezzo::reference::{ReferenceBundle, REFERENCE_ENV};
use delpezzo::types::{dual_graph, enumerate_types, parse_type_name, DualGraph};
use delpezzo::verify::{verify, Scope};
use delpezzo::Error;

const SCHEMA_VERSION: u32 = 1;
const SUBGROUP_BOUND: u128 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Table,
}

#[derive(Parser)]
#[command(name = "delpezzo", version, about = "Quasi-étale covers of Du Val del Pezzo surfaces")]
struct Cli {
    #[arg(long, value_enum, default_value = "table", global = true)]
    format: Format,
    /// reference bundle used by `verify` (defaults to the bundled copy)
    #[arg(long, env = REFERENCE_ENV, global = true)]
    reference: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the types of one degree, or of all degrees.
    Types {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9))]
        degree: Option<u8>,
        #[arg(long)]
        max_lines: Option<usize>,
    },
    /// Fundamental group of the smooth locus.
    Pi1 { name: String },
    /// Diagram of all quasi-étale covers.
    Covers { name: String },
    /// Cremona isometry group, as automorphisms of the dual graph.
    Cris { name: String },
    /// Subgroups of the Cremona isometry group up to conjugacy, with invariant Picard ranks.
    Subgroups { name: String },
    /// Accumulation search for the prime covers of a type, or the summary of a degree.
    Accumulating {
        name: Option<String>,
        /// restrict to prime covers of this type
        #[arg(long)]
        cover: Option<String>,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9), conflicts_with = "name")]
        degree: Option<u8>,
        /// skip types with more lines (default 4 in degree 1)
        #[arg(long)]
        max_lines: Option<usize>,
    },
    /// Recompute and compare against the reference bundle.
    Verify { scope: String },
}

enum Output {
    Json(Value),
    Text(String),
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Res = std::result::Result<Output, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(&cli);
    let (out, code) = match result {
        Ok(o) => (Some(o), 0),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            (None, 1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            (None, if e.is_discrepancy() { 2 } else { 1 })
        }
        Err(Failure::Mismatch(report)) => (Some(Output::Text(report)), 2),
    };
    match out {
        Some(Output::Json(mut v)) => {
            if let Value::Object(m) = &mut v {
                m.insert("schema_version".into(), json!(SCHEMA_VERSION));
            }
            println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
        }
        Some(Output::Text(s)) => print!("{s}"),
        None => {}
    }
    ExitCode::from(code)
}

fn run(cli: &Cli) -> Res {
    let f = cli.format;
    match &cli.command {
        Command::Types { degree, max_lines } => cmd_types(f, *degree, *max_lines),
        Command::Pi1 { name } => cmd_pi1(f, name),
        Command::Covers { name } => cmd_covers(f, name),
        Command::Cris { name } => cmd_cris(f, name),
        Command::Subgroups { name } => cmd_subgroups(f, name),
        Command::Accumulating { name: Some(name), cover, max_lines: None, .. } => cmd_accumulating(f, name, cover.as_deref()),
        Command::Accumulating { name: Some(_), .. } => Err(Failure::Usage("--max-lines applies to --degree".into())),
        Command::Accumulating { name: None, cover: Some(_), .. } => Err(Failure::Usage("--cover needs a base type".into())),
        Command::Accumulating { name: None, degree: Some(d), max_lines, .. } => cmd_summary(f, *d, *max_lines),
        Command::Accumulating { .. } => Err(Failure::Usage("accumulating needs a type or --degree".into())),
        Command::Verify { scope } => cmd_verify(f, cli.reference.as_deref(), scope),
    }
}

fn no_dot(f: Format, what: &str) -> std::result::Result<(), Failure> {
    if f == Format::Dot {
        return Err(Failure::Usage(format!("{what} has no DOT output")));
    }
    Ok(())
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            w[i] = w[i].max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let s: Vec<String> = cells.iter().enumerate().map(|(i, c)| format!("{c:<width$}", width = w[i])).collect();
        format!("{}\n", s.join("  ").trim_end())
    };
    let rule: Vec<String> = w.iter().map(|&n| "-".repeat(n)).collect();
    let mut out = format!("{}{}\n", line(header.to_vec()), rule.join("  "));
    for r in rows {
        out.push_str(&line(r.iter().map(|s| s.as_str()).collect()));
    }
    out
}

fn cmd_types(f: Format, degree: Option<u8>, max_lines: Option<usize>) -> Res {
    no_dot(f, "types")?;
    let degrees: Vec<u8> = degree.map_or((1..=9).rev().collect(), |d| vec![d]);
    let mut list = Vec::new();
    for d in degrees {
        for t in enumerate_types(d)? {
            if max_lines.is_some_and(|m| t.lines > m) {
                continue;
            }
            list.push(t);
        }
    }
    Ok(match f {
        Format::Json => Output::Json(json!({
            "types": list.iter().map(|t| json!({
                "name": t.name,
                "degree": t.degree,
                "ade": t.ade.to_string(),
                "lines": t.lines,
                "pi1": t.pi1.to_string(),
                "geometric": t.geometric,
            })).collect::<Vec<_>>(),
        })),
        _ => Output::Text(table(
            &["name", "degree", "lines", "pi1", "geometric"],
            &list
                .iter()
                .map(|t| vec![t.name.clone(), t.degree.to_string(), t.lines.to_string(), t.pi1.to_string(), yes(t.geometric)])
                .collect::<Vec<_>>(),
        )),
    })
}

fn yes(b: bool) -> String {
    if b { "YES" } else { "NO" }.into()
}

fn cmd_pi1(f: Format, name: &str) -> Res {
    no_dot(f, "pi1")?;
    let t = parse_type_name(name)?;
    let g = fundamental_group(t)?;
    let nonprim = is_nonprimitive(t)?;
    Ok(match f {
        Format::Json => Output::Json(json!({
            "type": t.name,
            "pi1": g.to_string(),
            "factors": g.factors,
            "order": g.order(),
            "nonprimitive": nonprim,
        })),
        _ => Output::Text(format!("{}: {} (order {})\n", t.name, g, g.order())),
    })
}

fn cmd_covers(f: Format, name: &str) -> Res {
    let t = parse_type_name(name)?;
    let d = cover_diagram(t)?;
    Ok(match f {
        Format::Dot => Output::Text(d.to_dot()),
        Format::Json => Output::Json(json!({
            "base": d.base,
            "group": d.group,
            "nodes": d.nodes.iter().map(|n| json!({
                "subgroup": n.subgroup_name,
                "subgroup_elements": n.subgroup,
                "type": n.surface,
            })).collect::<Vec<_>>(),
            "edges": d.edges.iter().map(|e| json!({"from": e.source, "to": e.target, "degree": e.degree})).collect::<Vec<_>>(),
        })),
        Format::Table => {
            let mut out = format!("{}  pi1 = {}\n\n", d.base, d.group);
            out.push_str(&table(
                &["node", "pi1 quotient", "type"],
                &d.nodes
                    .iter()
                    .enumerate()
                    .map(|(i, n)| vec![i.to_string(), n.subgroup_name.clone(), n.surface.clone()])
                    .collect::<Vec<_>>(),
            ));
            out.push('\n');
            out.push_str(&table(
                &["cover", "base", "degree"],
                &d.edges
                    .iter()
                    .map(|e| vec![d.nodes[e.source].surface.clone(), d.nodes[e.target].surface.clone(), e.degree.to_string()])
                    .collect::<Vec<_>>(),
            ));
            Output::Text(out)
        }
    })
}

fn labels(g: &DualGraph) -> Vec<String> {
    g.vertices.iter().map(|v| v.label.clone()).collect()
}

fn generators(g: &PermGroup, labels: &[String]) -> Vec<String> {
    g.generators.iter().filter(|p| !p.is_identity()).map(|p| p.to_cycle_string(labels)).collect()
}

fn cmd_cris(f: Format, name: &str) -> Res {
    let t = parse_type_name(name)?;
    let g = dual_graph(t)?;
    let cris = cris_group(t)?;
    let l = labels(&g);
    Ok(match f {
        Format::Dot => Output::Text(g.to_dot(&t.name, &BTreeSet::new())),
        Format::Json => Output::Json(json!({
            "type": t.name,
            "order": cris.order().to_string(),
            "name": cris.name(),
            "generators": generators(&cris, &l),
            "vertices": l,
        })),
        Format::Table => {
            let mut out = format!("{}: Cris = {} (order {})\n", t.name, cris.name(), cris.order());
            for s in generators(&cris, &l) {
                out.push_str(&format!("  {s}\n"));
            }
            Output::Text(out)
        }
    })
}

fn cmd_subgroups(f: Format, name: &str) -> Res {
    no_dot(f, "subgroups")?;
    let t = parse_type_name(name)?;
    let g = dual_graph(t)?;
    let cris = cris_group(t)?;
    let l = labels(&g);
    let classes = subgroups_up_to_conjugacy_bounded(&cris, SUBGROUP_BOUND)?;
    let rows: Vec<(String, usize, usize, usize, Vec<String>)> = classes
        .iter()
        .map(|c| {
            let h = &c.representative;
            (h.name(), h.elements.len(), c.conjugates_count, invariant_picard_rank(&g, h), small_generators(h, &l))
        })
        .collect();
    Ok(match f {
        Format::Json => Output::Json(json!({
            "type": t.name,
            "cris_order": cris.order().to_string(),
            "subgroups": rows.iter().map(|r| json!({
                "name": r.0, "order": r.1, "conjugates": r.2, "rho": r.3, "generators": r.4,
            })).collect::<Vec<_>>(),
        })),
        _ => Output::Text(table(
            &["name", "order", "conjugates", "rho", "generators"],
            &rows
                .iter()
                .map(|r| vec![r.0.clone(), r.1.to_string(), r.2.to_string(), r.3.to_string(), r.4.join(" ")])
                .collect::<Vec<_>>(),
        )),
    })
}

/// A short generating set picked greedily from the elements.
fn small_generators(h: &PermGroup, labels: &[String]) -> Vec<String> {
    let mut gens = Vec::new();
    let mut span = PermGroup::trivial(h.degree);
    for p in &h.elements {
        if span.elements.len() == h.elements.len() {
            break;
        }
        if !span.contains(p) {
            gens.push(p.clone());
            span = PermGroup::generate(h.degree, gens.clone());
        }
    }
    gens.iter().map(|p| p.to_cycle_string(labels)).collect()
}

fn cmd_accumulating(f: Format, name: &str, cover: Option<&str>) -> Res {
    let t = parse_type_name(name)?;
    let want = cover.map(parse_type_name).transpose()?;
    let covers: Vec<_> = prime_covers(t)?.into_iter().filter(|c| want.is_none_or(|w| std::ptr::eq(w, c.cover))).collect();
    if covers.is_empty() {
        return Err(Failure::Usage(match want {
            Some(w) => format!("{} is not a prime cover of {}", w.name, t.name),
            None => format!("{} has no quasi-étale covers", t.name),
        }));
    }
    if f == Format::Dot {
        if covers.len() != 1 {
            return Err(Failure::Usage("DOT output needs a single cover; pass --cover".into()));
        }
        let g = CoverGraphs::new(&covers[0])?;
        return Ok(Output::Text(g.x.to_dot(&format!("{} <- {}", t.name, covers[0].cover.name), &g.branched)));
    }
    let mut results = Vec::new();
    let mut text = String::new();
    for c in &covers {
        let s = search_cover(c)?;
        let g = CoverGraphs::new(c)?;
        let sols = solve_with(&g, c)?;
        let rows: Vec<_> = best_rows(&s.records).into_iter().filter(|r| r.geq).collect();
        let ly = labels(&g.y);
        let lx = labels(&g.x);
        text.push_str(&format!(
            "{} <- {} (degree {}): (>=) {}  (>) {}\n",
            s.base,
            s.cover,
            s.p,
            yes(s.geq),
            yes(s.gt)
        ));
        text.push_str(&table(
            &["H_S", "H_T", "rho_S", "rho_T", "H_S generators"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.h_s_name.clone(),
                        r.h_t_name.clone(),
                        r.rho_s.to_string(),
                        r.rho_t.to_string(),
                        r.h_s_generators.join(" "),
                    ]
                })
                .collect::<Vec<_>>(),
        ));
        text.push('\n');
        results.push(json!({
            "base": s.base,
            "cover": s.cover,
            "p": s.p,
            "geq": s.geq,
            "gt": s.gt,
            "rows": rows.iter().map(|r| json!({
                "h_s": r.h_s_name,
                "h_t": r.h_t_name,
                "rho_s": r.rho_s,
                "rho_t": r.rho_t,
                "h_s_generators": r.h_s_generators,
                "h_t_generators": r.h_t_generators,
                "face_contracting": r.face_contracting,
            })).collect::<Vec<_>>(),
            "correspondences": sols.iter().map(|corr| json!({
                "cover": corr.cover,
                "assignments": corr.pairs.iter().map(|&(y, im)| json!({
                    "from": ly[y],
                    "to": match im { Image::Vertex(x) => json!(lx[x]), Image::NonExtremal => json!("nonextremal") },
                })).collect::<Vec<_>>(),
                "fiber_kinds": corr.fiber_kinds.iter().map(|(&x, k)| (lx[x].clone(), json!(format!("{k:?}")))).collect::<serde_json::Map<_, _>>(),
                "flagged": corr.flagged,
            })).collect::<Vec<_>>(),
        }));
    }
    Ok(match f {
        Format::Json => Output::Json(json!({ "type": t.name, "covers": results })),
        _ => Output::Text(text),
    })
}

fn cmd_summary(f: Format, degree: u8, max_lines: Option<usize>) -> Res {
    no_dot(f, "accumulating --degree")?;
    let max_lines = max_lines.or((degree == 1).then_some(DEGREE_ONE_MAX_LINES));
    let rows = summary_table_with(degree, max_lines)?;
    Ok(match f {
        Format::Json => Output::Json(json!({
            "degree": degree,
            "max_lines": max_lines,
            "rows": rows.iter().map(|r| json!({
                "degree_s": r.degree_s,
                "lines": r.lines,
                "type_s": r.type_s,
                "degree_t": r.degree_t,
                "type_t": r.type_t,
                "geq": r.geq,
                "gt": r.gt,
            })).collect::<Vec<_>>(),
        })),
        _ => Output::Text(table(
            &["d_S", "lines", "type S", "d_T", "type T", "(>=)", "(>)"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.degree_s.to_string(),
                        r.lines.to_string(),
                        r.type_s.clone(),
                        r.degree_t.to_string(),
                        r.type_t.clone(),
                        yes(r.geq),
                        yes(r.gt),
                    ]
                })
                .collect::<Vec<_>>(),
        )),
    })
}

fn cmd_verify(f: Format, reference: Option<&std::path::Path>, scope: &str) -> Res {
    no_dot(f, "verify")?;
    if scope.trim().is_empty() {
        return Err(Failure::Usage("empty verify scope; use all, types, covers, cris, tables or figures".into()));
    }
    let scope: Scope = scope.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let bundle = ReferenceBundle::load(reference)?;
    let report = verify(&bundle, scope)?;
    let out = match f {
        Format::Json => {
            let mut v = serde_json::to_value(&report).expect("serializable");
            v["schema_version"] = json!(SCHEMA_VERSION);
            format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable"))
        }
        _ => {
            let mut s = String::new();
            for c in &report.checks {
                let mark = if c.pass { "PASS" } else { "FAIL" };
                if c.pass {
                    s.push_str(&format!("{mark}  {}  {}\n", c.name, c.computed));
                } else {
                    s.push_str(&format!("{mark}  {}  expected {}  computed {}\n", c.name, c.expected, c.computed));
                }
            }
            s.push_str(&format!("{}: {} passed, {} failed\n", report.scope, report.passed, report.failed));
            s
        }
    };
    if report.ok() {
        Ok(Output::Text(out))
    } else {
        Err(Failure::Mismatch(out))
    }
}
