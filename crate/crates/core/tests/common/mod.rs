#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use delpezzo::ade::Ade;
use delpezzo::covers::{disc_factors, local_cover_type, CoverContext, FiniteAbelian, LocalCharacter, LocalCover};
use delpezzo::cris::{graph_automorphisms, invariant_picard_rank, PermGroup};
use delpezzo::types::{count_lines, degree_data, dual_graph, enumerate_types, RootSubsystem, SurfaceType};

/// Element of SU(2), stored as the first row (a, b) of [[a, b], [-b̄, ā]].
#[derive(Clone, Copy, Debug)]
struct Su2(Complex64, Complex64);

impl Su2 {
    fn mul(self, o: Su2) -> Su2 {
        Su2(self.0 * o.0 - self.1 * o.1.conj(), self.0 * o.1 + self.1 * o.0.conj())
    }

    fn inv(self) -> Su2 {
        Su2(self.0.conj(), -self.1)
    }

    fn quaternion(a: f64, b: f64, c: f64, d: f64) -> Su2 {
        Su2(Complex64::new(a, b), Complex64::new(c, d))
    }

    fn key(self) -> [i64; 4] {
        let r = |x: f64| (x * 1e6).round() as i64;
        [r(self.0.re), r(self.0.im), r(self.1.re), r(self.1.im)]
    }
}

/// Finite subgroup of SU(2) as a multiplication table.
pub struct FiniteGroup {
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    fn generate(gens: &[Su2]) -> FiniteGroup {
        let one = Su2::quaternion(1.0, 0.0, 0.0, 0.0);
        let mut elems = vec![one];
        let mut index: BTreeMap<[i64; 4], usize> = BTreeMap::from([(one.key(), 0)]);
        let mut i = 0;
        while i < elems.len() {
            for g in gens {
                let x = elems[i].mul(*g);
                if !index.contains_key(&x.key()) {
                    index.insert(x.key(), elems.len());
                    elems.push(x);
                }
            }
            i += 1;
        }
        let pos = |x: Su2| index[&x.key()];
        let mul = elems.iter().map(|a| elems.iter().map(|b| pos(a.mul(*b))).collect()).collect();
        let inv = elems.iter().map(|a| pos(a.inv())).collect();
        FiniteGroup { mul, inv, identity: 0 }
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[self.identity] = true;
        let mut out = vec![self.identity];
        let mut i = 0;
        while i < out.len() {
            for &g in gens {
                let x = self.mul[out[i]][g];
                if !seen[x] {
                    seen[x] = true;
                    out.push(x);
                }
            }
            i += 1;
        }
        out.sort();
        out
    }

    fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul[x][g];
            k += 1;
        }
        k
    }

    fn commutator_subgroup(&self) -> Vec<usize> {
        let n = self.order();
        let comms: HashSet<usize> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .map(|(a, b)| self.mul[self.mul[self.inv[a]][self.inv[b]]][self.mul[a][b]])
            .collect();
        self.closure(&comms.into_iter().collect::<Vec<_>>())
    }

    /// Kernels of the characters of order `p`: subgroups of index `p` containing the commutators.
    fn character_kernels(&self, p: usize) -> Vec<Vec<usize>> {
        let comm = self.commutator_subgroup();
        let n = self.order();
        let mut out: Vec<Vec<usize>> = Vec::new();
        for a in 0..n {
            for b in a..n {
                let mut gens = comm.clone();
                gens.extend([a, b]);
                let k = self.closure(&gens);
                if k.len() * p == n && !out.contains(&k) {
                    out.push(k);
                }
            }
        }
        out
    }

    /// ADE label of a subgroup: cyclic, binary dihedral, or one of the three exceptional groups.
    fn subgroup_type(&self, h: &[usize]) -> Option<Ade> {
        let n = h.len();
        let max = h.iter().map(|&g| self.element_order(g)).max().unwrap_or(1);
        if max == n {
            return (n > 1).then(|| Ade::A(n as u8 - 1));
        }
        if n % 4 == 0 && max == n / 2 {
            return Some(Ade::new('D', (n / 4 + 2) as u8).unwrap());
        }
        match n {
            24 => Some(Ade::E(6)),
            48 => Some(Ade::E(7)),
            120 => Some(Ade::E(8)),
            _ => panic!("unrecognized subgroup of order {n}"),
        }
    }
}

/// The binary polyhedral group of a Du Val singularity.
pub fn binary_polyhedral(c: Ade) -> FiniteGroup {
    use std::f64::consts::PI;
    let rot = |m: usize| {
        let t = PI / m as f64;
        Su2(Complex64::new(t.cos(), t.sin()), Complex64::new(0.0, 0.0))
    };
    let j = Su2::quaternion(0.0, 0.0, 1.0, 0.0);
    let i = Su2::quaternion(0.0, 1.0, 0.0, 0.0);
    let w = Su2::quaternion(0.5, 0.5, 0.5, 0.5);
    let g = match c {
        // rot(m) has order 2m, so rot(m)^2 generates the cyclic group of order m
        Ade::A(n) => {
            let r = rot(n as usize + 1);
            FiniteGroup::generate(&[r.mul(r)])
        }
        Ade::D(n) => FiniteGroup::generate(&[rot(n as usize - 2), j]),
        Ade::E(6) => FiniteGroup::generate(&[i, j, w]),
        Ade::E(7) => FiniteGroup::generate(&[i, j, w, Su2::quaternion(0.5f64.sqrt(), 0.5f64.sqrt(), 0.0, 0.0)]),
        Ade::E(_) => {
            let phi = (1.0 + 5f64.sqrt()) / 2.0;
            FiniteGroup::generate(&[w, Su2::quaternion(phi / 2.0, 0.5 / phi, 0.5, 0.0)])
        }
    };
    assert_eq!(g.order(), c.local_group_order(), "{c}");
    g
}

/// Components up to rank 8 tested by the oracle.
pub fn oracle_components() -> Vec<Ade> {
    let mut v: Vec<Ade> = (1..=8).map(Ade::A).collect();
    v.extend((4..=8).map(Ade::D));
    v.extend([Ade::E(6), Ade::E(7), Ade::E(8)]);
    v
}

fn primes_dividing(n: usize) -> Vec<usize> {
    (2..=n).filter(|&p| n % p == 0 && (2..p).all(|d| p % d != 0)).collect()
}

/// Compare `local_cover_type` with the kernels of the characters of the binary
/// polyhedral group, as multisets over characters of order 1 and p. Returns mismatches.
pub fn local_cover_oracle() -> (usize, Vec<String>) {
    let mut checked = 0;
    let mut bad = Vec::new();
    for c in oracle_components() {
        let g = binary_polyhedral(c);
        let disc = FiniteAbelian::new(&disc_factors(c));
        let ab = g.order() / g.commutator_subgroup().len();
        if ab != disc.order() {
            bad.push(format!("{c}: abelianization of order {ab}, discriminant group of order {}", disc.order()));
            continue;
        }
        let mut ps = primes_dividing(disc.order());
        ps.push(2);
        ps.sort();
        ps.dedup();
        for p in ps {
            let mut expected: BTreeMap<String, usize> = BTreeMap::new();
            *expected.entry(format!("{:?}", LocalCover::SplitsInto(p))).or_default() += 1;
            if disc.order() % p == 0 {
                for k in g.character_kernels(p) {
                    let ty = LocalCover::ConnectedCover(g.subgroup_type(&k));
                    *expected.entry(format!("{ty:?}")).or_default() += p - 1;
                }
            }
            let mut computed: BTreeMap<String, usize> = BTreeMap::new();
            for e in disc.elements() {
                let chi = LocalCharacter::new(c, e);
                if chi.order != 1 && chi.order != p as i64 {
                    continue;
                }
                match local_cover_type(c, p as i64, &chi) {
                    Ok(r) => *computed.entry(format!("{r:?}")).or_default() += 1,
                    Err(err) => bad.push(format!("{c}, p = {p}, {chi}: {err}")),
                }
            }
            checked += 1;
            if expected != computed {
                bad.push(format!("{c}, p = {p}: group gives {expected:?}, table gives {computed:?}"));
            }
        }
    }
    (checked, bad)
}

/// Geometric types of degree >= 2 with a dual graph.
pub fn graph_types(min_degree: u8) -> Vec<&'static SurfaceType> {
    (min_degree..=9).flat_map(|d| enumerate_types(d).unwrap().iter()).filter(|t| t.geometric).collect()
}

/// Line counts are unchanged when a random Weyl reflection moves the root subsystem.
pub fn weyl_invariance(rng: &mut StdRng, trials: usize) -> Vec<String> {
    let pool: Vec<&SurfaceType> =
        (1..=7).flat_map(|d| enumerate_types(d).unwrap().iter()).filter(|t| t.representative.is_some()).collect();
    let mut bad = Vec::new();
    for _ in 0..trials {
        let t = pool.choose(rng).unwrap();
        let sub = t.representative.as_ref().unwrap();
        let roots = &degree_data(t.degree).unwrap().roots;
        let r = roots.choose(rng).unwrap();
        let moved: Vec<_> = sub.simple_roots.iter().map(|v| delpezzo::lattice::reflect(v, r)).collect();
        let moved = RootSubsystem::new(sub.basis.clone(), moved).unwrap();
        let (a, b) = (count_lines(sub), count_lines(&moved));
        if a != b || a != t.lines {
            bad.push(format!("{}: {a} lines, {b} after reflecting in {r:?}", t.name));
        }
    }
    bad
}

/// Invariant Picard rank is constant on conjugacy classes of subgroups of Cris.
pub fn conjugacy_invariance(rng: &mut StdRng, trials: usize) -> Vec<String> {
    let pool: Vec<(&SurfaceType, PermGroup)> = graph_types(2)
        .into_iter()
        .filter_map(|t| {
            let g = dual_graph(t).ok()?;
            let c = graph_automorphisms(&g);
            (c.is_materialized() && c.order() > 2 && c.order() <= 5000).then_some((t, c))
        })
        .collect();
    let mut bad = Vec::new();
    for _ in 0..trials {
        let (t, cris) = &pool[rng.gen_range(0..pool.len())];
        let g = dual_graph(t).unwrap();
        let k = rng.gen_range(1..=2);
        let gens: Vec<_> = (0..k).map(|_| cris.elements.choose(rng).unwrap().clone()).collect();
        let h = PermGroup::generate(g.len(), gens);
        let s = cris.elements.choose(rng).unwrap();
        let hc = h.conjugate(s);
        let (a, b) = (invariant_picard_rank(&g, &h), invariant_picard_rank(&g, &hc));
        if a != b {
            bad.push(format!("{}: rank {a} for H, {b} for a conjugate", t.name));
        }
    }
    bad
}

/// All chains of prime steps ending at the subgroup `k`.
fn chains(g: &FiniteAbelian, k: &[Vec<i64>], cur: Vec<Vec<i64>>, prefix: Vec<Vec<i64>>, out: &mut Vec<Vec<Vec<i64>>>) {
    if cur.len() == k.len() {
        out.push(prefix);
        return;
    }
    for x in k {
        if cur.binary_search(x).is_ok() {
            continue;
        }
        let next = g.span(&[cur.clone(), vec![x.clone()]].concat());
        let idx = next.len() / cur.len();
        if !(2..idx).all(|d| idx % d != 0) {
            continue;
        }
        let mut p = prefix.clone();
        p.push(x.clone());
        chains(g, k, next, p, out);
    }
}

/// Every chain of prime steps to the same subgroup of classes yields the same cover type.
pub fn chain_independence() -> (usize, Vec<String>) {
    let mut checked = 0;
    let mut bad = Vec::new();
    for t in graph_types(1) {
        if t.pi1.order() < 4 || (2..t.pi1.order()).all(|d| t.pi1.order() % d != 0) {
            continue;
        }
        let ctx = CoverContext::new(t).unwrap();
        for h in ctx.group.subgroups() {
            let k = ctx.group.annihilator(&h);
            if k.len() < 4 || (2..k.len()).all(|d| k.len() % d != 0) {
                continue;
            }
            let mut all = Vec::new();
            chains(&ctx.group, &k, vec![ctx.group.zero()], Vec::new(), &mut all);
            let names: Vec<String> = all
                .iter()
                .map(|c| ctx.cover_along_chain(c).map_or_else(|e| format!("error: {e}"), |s| s.surface.name.clone()))
                .collect();
            checked += 1;
            if names.iter().any(|n| n != &names[0]) {
                bad.push(format!("{} with classes {k:?}: {names:?}", t.name));
            }
        }
    }
    (checked, bad)
}

/// Intersection rules for lines and nodes on every geometric dual graph of degree >= 2.
pub fn lemma_checks() -> (usize, Vec<String>) {
    let mut n = 0;
    let mut bad = Vec::new();
    for t in graph_types(2) {
        let g = dual_graph(t).unwrap();
        n += 1;
        for v in delpezzo::types::check_intersection_rules(&g, t.degree) {
            bad.push(format!("{}: {v}", t.name));
        }
    }
    (n, bad)
}

pub fn seeded(seed: u64) -> StdRng {
    rand::SeedableRng::seed_from_u64(seed)
}
