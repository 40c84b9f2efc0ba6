//! Fundamental groups of smooth loci, local Du Val covers and cover diagrams.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use log::{debug, warn};
use num_rational::Rational64;
use serde::Serialize;

use crate::ade::{Ade, AdeType, Component};
use crate::cris::{graph_automorphisms, invariant_picard_rank, PermGroup};
use crate::error::{Error, Result};
use crate::lattice::{
    dot, gram, integral_coordinates, inverse_rational, AbelianGroupInvariants, IntVector, TorsionData,
};
use crate::types::{dual_graph, enumerate_types, SurfaceType, VertexKind};

/// `(Pic(X)/R)_tors`, which is the fundamental group of the smooth locus.
pub fn fundamental_group(t: &SurfaceType) -> Result<AbelianGroupInvariants> {
    Ok(torsion_data(t)?.invariants)
}

/// Same group, read as the Brauer group.
pub fn brauer_group(t: &SurfaceType) -> Result<AbelianGroupInvariants> {
    fundamental_group(t)
}

pub fn is_nonprimitive(t: &SurfaceType) -> Result<bool> {
    Ok(!fundamental_group(t)?.is_trivial())
}

pub fn torsion_data(t: &SurfaceType) -> Result<TorsionData> {
    if t.degree >= 8 || t.is_smooth() {
        return TorsionData::compute(&[], &t.basis()?);
    }
    TorsionData::compute(t.simple_roots(), &t.basis()?)
}

/// Finite abelian group `Z/n1 x .. x Z/nk` with elements as coordinate tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAbelian {
    pub factors: Vec<i64>,
}

impl FiniteAbelian {
    pub fn new(factors: &[i64]) -> Self {
        FiniteAbelian { factors: factors.to_vec() }
    }

    pub fn order(&self) -> usize {
        self.factors.iter().product::<i64>() as usize
    }

    pub fn zero(&self) -> Vec<i64> {
        vec![0; self.factors.len()]
    }

    pub fn elements(&self) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for &n in &self.factors {
            out = out.into_iter().flat_map(|v| (0..n).map(move |x| [v.clone(), vec![x]].concat())).collect();
        }
        out
    }

    pub fn add(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        a.iter().zip(b).zip(&self.factors).map(|((x, y), n)| (x + y).rem_euclid(*n)).collect()
    }

    pub fn scale(&self, k: i64, a: &[i64]) -> Vec<i64> {
        a.iter().zip(&self.factors).map(|(x, n)| (k * x).rem_euclid(*n)).collect()
    }

    pub fn element_order(&self, a: &[i64]) -> i64 {
        a.iter()
            .zip(&self.factors)
            .map(|(&x, &n)| n / num_integer::gcd(x, n))
            .fold(1, num_integer::lcm)
    }

    /// Sorted elements of the subgroup generated by `gens`.
    pub fn span(&self, gens: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let mut set = BTreeSet::from([self.zero()]);
        let mut frontier = vec![self.zero()];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = self.add(&x, g);
                if set.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        set.into_iter().collect()
    }

    /// `sum x_i y_i / n_i` mod 1, as a perfect self-pairing.
    pub fn pairing(&self, a: &[i64], b: &[i64]) -> Rational64 {
        let s: Rational64 = a
            .iter()
            .zip(b)
            .zip(&self.factors)
            .map(|((x, y), n)| Rational64::new(x * y, *n))
            .sum();
        s - Rational64::from_integer(s.floor().to_integer())
    }

    pub fn annihilator(&self, h: &[Vec<i64>]) -> Vec<Vec<i64>> {
        self.elements()
            .into_iter()
            .filter(|x| h.iter().all(|y| self.pairing(x, y) == Rational64::from_integer(0)))
            .collect()
    }

    /// All subgroups as sorted element lists, ordered by size.
    pub fn subgroups(&self) -> Vec<Vec<Vec<i64>>> {
        let els = self.elements();
        let mut found: BTreeSet<Vec<Vec<i64>>> = BTreeSet::new();
        let mut queue = vec![vec![self.zero()]];
        found.insert(vec![self.zero()]);
        while let Some(h) = queue.pop() {
            for g in &els {
                if h.binary_search(g).is_ok() {
                    continue;
                }
                let mut gens = h.clone();
                gens.push(g.clone());
                let j = self.span(&gens);
                if found.insert(j.clone()) {
                    queue.push(j);
                }
            }
        }
        let mut out: Vec<_> = found.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        out
    }

    /// Invariants of the quotient by a subgroup.
    pub fn quotient_invariants(&self, k: &[Vec<i64>]) -> AbelianGroupInvariants {
        let q = self.order() / k.len();
        if q == 1 {
            return AbelianGroupInvariants::trivial();
        }
        // element orders in the quotient determine it
        let kset: BTreeSet<&Vec<i64>> = k.iter().collect();
        let coset_order = |x: &Vec<i64>| -> i64 {
            let mut m = 1;
            let mut y = x.clone();
            while !kset.contains(&y) {
                y = self.add(&y, x);
                m += 1;
            }
            m
        };
        let orders: Vec<i64> = self.elements().iter().map(coset_order).collect();
        invariants_from_orders(&orders, k.len())
    }
}

/// Abelian invariants from the multiset of element orders (each counted `mult` times).
fn invariants_from_orders(orders: &[i64], mult: usize) -> AbelianGroupInvariants {
    let n = orders.len() / mult;
    let mut prime_powers = Vec::new();
    let mut m = n as i64;
    let mut p = 2;
    while m > 1 {
        if m % p != 0 {
            p += 1;
            continue;
        }
        while m % p == 0 {
            m /= p;
        }
        let mut at_least = Vec::new();
        let mut prev = 1i64;
        let mut pk = p;
        loop {
            let c = (orders.iter().filter(|&&o| pk % o == 0).count() / mult) as i64;
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
                prime_powers.push(p.pow(k as u32 + 1));
            }
        }
        p += 1;
    }
    AbelianGroupInvariants::from_orders(&prime_powers)
}

/// A torsion element of `Pic(X)/R` with a lattice representative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionClass {
    pub representative: IntVector,
    pub coordinates: Vec<i64>,
    pub order: i64,
}

impl TorsionClass {
    pub fn new(data: &TorsionData, coordinates: &[i64]) -> TorsionClass {
        let g = FiniteAbelian::new(&data.invariants.factors);
        let c: Vec<i64> = g.scale(1, coordinates);
        TorsionClass { representative: data.element(&c), order: g.element_order(&c), coordinates: c }
    }
}

/// Discriminant-group element of one singular point.
///
/// Coordinates: `A_n` in `Z/(n+1)`; `D_n`, n odd, in `Z/4` with the vector
/// class `2`; `D_n`, n even, as `[vector, spinor]` in `(Z/2)^2`; `E6` in `Z/3`;
/// `E7` in `Z/2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LocalCharacter {
    pub component: Ade,
    pub disc_element: Vec<i64>,
    pub order: i64,
}

impl LocalCharacter {
    pub fn new(component: Ade, disc_element: Vec<i64>) -> LocalCharacter {
        let g = FiniteAbelian::new(&disc_factors(component));
        let e = g.scale(1, &disc_element);
        LocalCharacter { component, order: g.element_order(&e), disc_element: e }
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }
}

impl fmt::Display for LocalCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{:?}", self.component, self.disc_element)
    }
}

/// Cyclic factors in the coordinate convention of [`LocalCharacter`].
pub fn disc_factors(c: Ade) -> Vec<i64> {
    match c {
        Ade::D(n) if n % 2 == 0 => vec![2, 2],
        _ => c.discriminant(),
    }
}

/// Pairing vector against the simple roots of a weight representing `elem`.
fn weight_vector(c: Ade, elem: &[i64]) -> IntVector {
    let n = c.rank();
    let mut w = vec![0; n];
    match c {
        Ade::A(_) | Ade::E(6) => w[0] = elem[0],
        Ade::D(m) if m % 2 == 0 => {
            w[0] = elem[0];
            w[n - 1] = elem[1];
        }
        Ade::D(_) | Ade::E(7) => w[n - 1] = elem[0],
        Ade::E(_) => {}
    }
    w
}

/// Gram matrix of a component in standard order.
pub fn component_gram(c: Ade) -> Vec<Vec<i64>> {
    let n = c.rank();
    let mut g = vec![vec![0; n]; n];
    let mut link = |i: usize, j: usize| {
        g[i][j] = 1;
        g[j][i] = 1;
    };
    match c {
        Ade::A(_) => (1..n).for_each(|i| link(i - 1, i)),
        Ade::D(_) => {
            (1..n - 1).for_each(|i| link(i - 1, i));
            link(n - 3, n - 1);
        }
        Ade::E(_) => {
            link(0, 2);
            link(1, 3);
            (3..n).for_each(|i| link(i - 1, i));
        }
    }
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = -2;
    }
    g
}

/// Root coordinates of a weight with the given pairings.
fn weight_in_roots(c: Ade, w: &[i64]) -> Vec<Rational64> {
    let ginv = inverse_rational(&component_gram(c)).expect("Cartan matrices are invertible");
    ginv.iter().map(|row| row.iter().zip(w).map(|(a, &b)| *a * b).sum()).collect()
}

fn identify(c: Ade, w: &[i64]) -> Vec<i64> {
    let g = FiniteAbelian::new(&disc_factors(c));
    for e in g.elements() {
        let we = weight_vector(c, &e);
        let diff: Vec<i64> = w.iter().zip(&we).map(|(a, b)| a - b).collect();
        if weight_in_roots(c, &diff).iter().all(|q| q.is_integer()) {
            return e;
        }
    }
    unreachable!("every weight class of {c} has a representative")
}

/// Image of a torsion class in the discriminant group of one component.
pub fn local_restriction(b: &TorsionClass, component: &Component) -> LocalCharacter {
    let w: IntVector = component.roots.iter().map(|r| dot(&b.representative, r)).collect();
    LocalCharacter::new(component.label, identify(component.label, &w))
}

/// Restrictions of a class to every singular point, in component order.
pub fn local_characters(t: &SurfaceType, b: &TorsionClass) -> Vec<LocalCharacter> {
    crate::types::components(t).iter().map(|c| local_restriction(b, c)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum LocalCover {
    /// étale: that many disjoint copies of the singularity
    SplitsInto(usize),
    /// connected cover with the given singularity (`None` is a smooth point)
    ConnectedCover(Option<Ade>),
}

fn a_or_smooth(k: i64) -> Option<Ade> {
    (k >= 1).then(|| Ade::A(k as u8))
}

fn d_or_a(n: i64) -> Option<Ade> {
    Some(Ade::new('D', n as u8).expect("D_n with n >= 3"))
}

/// Cyclic degree `p` cover of one Du Val point with local character `chi`.
pub fn local_cover_type(component: Ade, p: i64, chi: &LocalCharacter) -> Result<LocalCover> {
    if chi.component != component {
        return Err(Error::Domain(format!("character of {} used on {component}", chi.component)));
    }
    if chi.order == 1 {
        return Ok(LocalCover::SplitsInto(p as usize));
    }
    if chi.order != p {
        return Err(Error::Domain(format!("character {chi} has order {} but the step has degree {p}", chi.order)));
    }
    let out = match component {
        Ade::A(n) => a_or_smooth((n as i64 + 1) / p - 1),
        Ade::D(n) => {
            let n = n as i64;
            let vector = if n % 2 == 0 { chi.disc_element == [1, 0] } else { true };
            if vector {
                a_or_smooth(2 * n - 5)
            } else {
                d_or_a((n + 2) / 2)
            }
        }
        Ade::E(6) => Some(Ade::D(4)),
        Ade::E(7) => Some(Ade::E(6)),
        Ade::E(_) => return Err(Error::Domain("E8 has no nontrivial local characters".into())),
    };
    Ok(LocalCover::ConnectedCover(out))
}

/// Singularity over a point after quotienting by all characters in `s` at once.
pub fn local_quotient(component: Ade, s: &[Vec<i64>]) -> Option<Ade> {
    let g = FiniteAbelian::new(&disc_factors(component));
    let s = g.span(s);
    let k = s.len() as i64;
    match component {
        Ade::A(n) => a_or_smooth((n as i64 + 1) / k - 1),
        Ade::D(n) => {
            let n = n as i64;
            match k {
                1 => Some(component),
                4 => a_or_smooth(n - 3),
                _ => {
                    let vector = n % 2 == 1 || s.contains(&vec![1, 0]);
                    if vector {
                        a_or_smooth(2 * n - 5)
                    } else {
                        d_or_a((n + 2) / 2)
                    }
                }
            }
        }
        Ade::E(6) if k == 3 => Some(Ade::D(4)),
        Ade::E(7) if k == 2 => Some(Ade::E(6)),
        _ => Some(component),
    }
}

/// Number of nodes of a point carrying weight `chi` that are branched in a degree `p` step.
pub fn branched_node_count(chi: &LocalCharacter, p: i64) -> usize {
    if chi.is_trivial() || chi.component.rank() == 0 {
        return 0;
    }
    let y = weight_in_roots(chi.component, &weight_vector(chi.component, &chi.disc_element));
    y.iter()
        .filter(|q| {
            let m = (**q * p).to_integer();
            m.rem_euclid(p) != 0
        })
        .count()
}

/// Branch structure of the cyclic cover defined by one torsion class.
#[derive(Clone, Debug, Serialize)]
pub struct BranchData {
    pub p: i64,
    /// indices into the type's simple roots with their multiplicity mod p
    pub nodes: Vec<(usize, i64)>,
    /// maximal chains of branched nodes, each listed along the chain
    pub chains: Vec<Vec<usize>>,
    /// every chain has p - 1 nodes with weights a, 2a, .., (p-1)a along it
    pub chain_form: bool,
}

/// `p B = sum m_j C_j` reduced mod `p`, for a class of prime order `p`.
pub fn branch_data(t: &SurfaceType, b: &TorsionClass) -> Result<BranchData> {
    let p = b.order;
    if !is_prime(p) {
        return Err(Error::Domain(format!("branch data needs a class of prime order, got {p}")));
    }
    let simple = t.simple_roots();
    let pb: IntVector = b.representative.iter().map(|x| p * x).collect();
    let m = integral_coordinates(simple, &pb)
        .ok_or_else(|| Error::Classification("p times a torsion class is not in R".into()))?;
    let nodes: Vec<(usize, i64)> =
        m.iter().enumerate().filter(|(_, x)| x.rem_euclid(p) != 0).map(|(i, x)| (i, x.rem_euclid(p))).collect();
    let branched: BTreeSet<usize> = nodes.iter().map(|n| n.0).collect();
    let g = gram(simple);
    let mut seen = BTreeSet::new();
    let mut chains = Vec::new();
    let mut chain_form = true;
    for &s in &branched {
        if seen.contains(&s) {
            continue;
        }
        let mut comp = vec![s];
        seen.insert(s);
        let mut k = 0;
        while k < comp.len() {
            let v = comp[k];
            for &u in &branched {
                if g[v][u] == 1 && seen.insert(u) {
                    comp.push(u);
                }
            }
            k += 1;
        }
        // walk the chain from an end
        let deg = |v: usize| comp.iter().filter(|&&u| g[v][u] == 1).count();
        let path = match comp.iter().copied().find(|&v| deg(v) <= 1) {
            Some(start) if comp.iter().all(|&v| deg(v) <= 2) => {
                let mut path = vec![start];
                while path.len() < comp.len() {
                    let last = *path.last().unwrap();
                    let next = comp.iter().copied().find(|&u| g[last][u] == 1 && !path.contains(&u));
                    match next {
                        Some(u) => path.push(u),
                        None => break,
                    }
                }
                path
            }
            _ => {
                chain_form = false;
                comp.clone()
            }
        };
        let weights: Vec<i64> = path.iter().map(|&v| m[v].rem_euclid(p)).collect();
        let a = weights[0];
        let progression = |w: &[i64]| w.iter().enumerate().all(|(i, &x)| x == (a * (i as i64 + 1)).rem_euclid(p));
        let mut rev = weights.clone();
        rev.reverse();
        let a_rev = rev[0];
        let progression_rev = rev.iter().enumerate().all(|(i, &x)| x == (a_rev * (i as i64 + 1)).rem_euclid(p));
        if path.len() as i64 != p - 1 || !(progression(&weights) || progression_rev) {
            chain_form = false;
        }
        chains.push(path);
    }
    Ok(BranchData { p, nodes, chains, chain_form })
}

fn is_prime(p: i64) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn smallest_prime_factor(n: i64) -> i64 {
    (2..=n).find(|d| n % d == 0).unwrap()
}

#[derive(Clone, Debug)]
struct PointState {
    origin: Ade,
    count: usize,
    current: Option<Ade>,
    restricted: Vec<Vec<i64>>,
}

/// Torsion group of a type with its subgroup bookkeeping.
pub struct CoverContext<'a> {
    pub base: &'a SurfaceType,
    pub data: TorsionData,
    pub group: FiniteAbelian,
    components: Vec<Component>,
}

impl<'a> CoverContext<'a> {
    pub fn new(base: &'a SurfaceType) -> Result<CoverContext<'a>> {
        if !base.geometric {
            return Err(Error::Refused(format!("{} is not realized in characteristic 0", base.name)));
        }
        let data = torsion_data(base)?;
        let group = FiniteAbelian::new(&data.invariants.factors);
        let components = crate::types::components(base).to_vec();
        Ok(CoverContext { base, data, group, components })
    }

    pub fn class(&self, coords: &[i64]) -> TorsionClass {
        TorsionClass::new(&self.data, coords)
    }

    /// A chain `0 = K_0 < K_1 < .. < K` of prime steps: the added class per step.
    pub fn default_chain(&self, k: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let mut chain = Vec::new();
        let mut cur = vec![self.group.zero()];
        while cur.len() < k.len() {
            // element of prime order modulo the current subgroup
            let b = k
                .iter()
                .filter(|x| cur.binary_search(x).is_err())
                .find_map(|x| {
                    let o = self.order_mod(x, &cur);
                    let p = smallest_prime_factor(o);
                    let y = self.group.scale(o / p, x);
                    Some(y)
                })
                .unwrap();
            cur = self.group.span(&[cur.clone(), vec![b.clone()]].concat());
            chain.push(b);
        }
        chain
    }

    fn order_mod(&self, x: &[i64], sub: &[Vec<i64>]) -> i64 {
        let mut m = 1;
        let mut y = x.to_vec();
        while sub.binary_search(&y).is_err() {
            y = self.group.add(&y, x);
            m += 1;
        }
        m
    }

    /// Cover attached to the classes `k` (the annihilator of a subgroup of π₁),
    /// built along a chain of prime steps.
    pub fn cover_along_chain(&self, chain: &[Vec<i64>]) -> Result<CoverStep> {
        let mut states: Vec<PointState> = self
            .components
            .iter()
            .map(|c| PointState { origin: c.label, count: 1, current: Some(c.label), restricted: Vec::new() })
            .collect();
        let mut sub = vec![self.group.zero()];
        let mut ty: &'static SurfaceType = lookup_registry(self.base)?;
        let mut steps = Vec::new();
        for b in chain {
            let p = self.order_mod(b, &sub);
            if !is_prime(p) {
                return Err(Error::Domain(format!("chain step of non-prime order {p}")));
            }
            let class = self.class(b);
            let mut branched = 0;
            for (st, comp) in states.iter_mut().zip(&self.components) {
                let chi = local_restriction(&class, comp);
                let dg = FiniteAbelian::new(&disc_factors(st.origin));
                let s = dg.span(&st.restricted);
                if s.binary_search(&chi.disc_element).is_ok() {
                    st.count *= p as usize;
                    continue;
                }
                let cur = st.current.expect("a smooth point has no nontrivial local character");
                let chi_now = intermediate_character(st, cur, &chi, p);
                branched += st.count * branched_node_count(&chi_now, p);
                let next = match local_cover_type(cur, p, &chi_now)? {
                    LocalCover::ConnectedCover(a) => a,
                    LocalCover::SplitsInto(_) => unreachable!("nontrivial character"),
                };
                st.restricted.push(chi.disc_element.clone());
                let closed = local_quotient(st.origin, &st.restricted);
                if closed != next {
                    return Err(Error::Classification(format!(
                        "stepwise cover of {} gives {next:?} but the quotient gives {closed:?}",
                        st.origin
                    )));
                }
                st.current = next;
            }
            sub = self.group.span(&[sub.clone(), vec![b.clone()]].concat());
            let ade = AdeType::new(
                states.iter().flat_map(|s| std::iter::repeat(s.current).take(s.count)).flatten().collect(),
            );
            let degree = self.base.degree as usize * sub.len();
            if degree > 9 {
                return Err(Error::Classification(format!("cover of degree {degree} is not del Pezzo")));
            }
            let pi1 = self.group.quotient_invariants(&sub);
            let prev = ty;
            ty = resolve(degree as u8, &ade, &pi1, prev, p, branched)?;
            steps.push((p, branched));
        }
        Ok(CoverStep { surface: ty, classes: sub, steps })
    }

    /// Subgroup `h` of π₁ (identified with the torsion group through the pairing).
    pub fn cover_type(&self, h: &[Vec<i64>]) -> Result<&'static SurfaceType> {
        let h = self.group.span(h);
        let k = self.group.annihilator(&h);
        Ok(self.cover_along_chain(&self.default_chain(&k))?.surface)
    }
}

/// Result of a chain of cyclic steps.
#[derive(Clone, Debug)]
pub struct CoverStep {
    pub surface: &'static SurfaceType,
    pub classes: Vec<Vec<i64>>,
    /// (degree, number of branched nodes) per step
    pub steps: Vec<(i64, usize)>,
}

/// The character seen by the current singularity over a point.
fn intermediate_character(st: &PointState, cur: Ade, chi: &LocalCharacter, p: i64) -> LocalCharacter {
    if st.restricted.is_empty() {
        return chi.clone();
    }
    match cur {
        Ade::A(k) => LocalCharacter::new(cur, vec![(k as i64 + 1) / p]),
        Ade::D(m) if m % 2 == 0 => LocalCharacter::new(cur, vec![1, 0]),
        Ade::D(_) => LocalCharacter::new(cur, vec![2]),
        _ => unreachable!("no further characters on {cur} after a partial quotient"),
    }
}

fn lookup_registry(t: &SurfaceType) -> Result<&'static SurfaceType> {
    enumerate_types(t.degree)?
        .iter()
        .find(|x| *x == t)
        .ok_or_else(|| Error::UnknownType(t.name.clone()))
}

/// Match (degree, ADE, π₁) in the registry, disambiguating by the deck action.
fn resolve(
    degree: u8,
    ade: &AdeType,
    pi1: &AbelianGroupInvariants,
    below: &SurfaceType,
    p: i64,
    branched: usize,
) -> Result<&'static SurfaceType> {
    let cands: Vec<&'static SurfaceType> =
        enumerate_types(degree)?.iter().filter(|t| &t.ade == ade && &t.pi1 == pi1 && t.geometric).collect();
    match cands.len() {
        0 => {
            return Err(Error::Classification(format!(
                "no degree {degree} type {ade} with fundamental group {pi1} (cover of {})",
                below.name
            )))
        }
        1 => return Ok(cands[0]),
        _ => {}
    }
    let target_rank = 10 - below.degree as usize - branched;
    let passing: Vec<&'static SurfaceType> =
        cands.iter().copied().filter(|t| admits_deck_action(t, p, target_rank)).collect();
    debug!(
        "degree {degree} {ade}: candidates {:?}, deck filter keeps {:?}",
        cands.iter().map(|t| &t.name).collect::<Vec<_>>(),
        passing.iter().map(|t| &t.name).collect::<Vec<_>>()
    );
    if passing.len() == 1 {
        return Ok(passing[0]);
    }
    let pool = if passing.is_empty() { &cands } else { &passing };
    match crate::reference::bundled_cover_choice(below, pool) {
        Some(t) => {
            warn!("cover of {} of degree {degree} with {ade} resolved to {} from reference data", below.name, t.name);
            Ok(t)
        }
        None => Err(Error::AmbiguousType {
            name: format!("degree {p} cover of {}", below.name),
            candidates: pool.iter().map(|t| t.name.clone()).collect(),
        }),
    }
}

/// Whether Cris(t) has an element of order dividing `p` moving every line with
/// invariant Picard rank `rank`.
pub fn admits_deck_action(t: &SurfaceType, p: i64, rank: usize) -> bool {
    let Ok(g) = dual_graph(t) else { return false };
    let cris = graph_automorphisms(&g);
    if !cris.is_materialized() {
        return true;
    }
    let lines = g.indices(VertexKind::Line);
    cris.elements.iter().any(|s| {
        (p as usize) % s.order() == 0
            && lines.iter().all(|&l| s.apply(l) != l)
            && invariant_picard_rank(&g, &PermGroup::generate(g.len(), vec![s.clone()])) == rank
    })
}

/// One node of a cover diagram.
#[derive(Clone, Debug, Serialize)]
pub struct CoverNode {
    /// subgroup of π₁, as sorted coordinate tuples
    pub subgroup: Vec<Vec<i64>>,
    pub subgroup_name: String,
    /// torsion classes defining the cover (annihilator of the subgroup)
    pub classes: Vec<Vec<i64>>,
    pub surface: String,
    pub degree: u8,
}

/// `source` covers `target` with the given degree.
#[derive(Clone, Debug, Serialize, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoverEdge {
    pub source: usize,
    pub target: usize,
    pub degree: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverDiagram {
    pub base: String,
    pub group: String,
    pub nodes: Vec<CoverNode>,
    pub edges: Vec<CoverEdge>,
}

/// All quasi-étale covers of a type, one node per subgroup of π₁.
pub fn cover_diagram(s: &SurfaceType) -> Result<CoverDiagram> {
    let ctx = CoverContext::new(s)?;
    let subs = ctx.group.subgroups();
    let mut nodes = Vec::new();
    for h in &subs {
        let k = ctx.group.annihilator(h);
        let cover = ctx.cover_along_chain(&ctx.default_chain(&k))?;
        let name = ctx.group.quotient_invariants(&k).to_string();
        nodes.push(CoverNode {
            subgroup: h.clone(),
            subgroup_name: name,
            classes: k,
            surface: cover.surface.name.clone(),
            degree: cover.surface.degree,
        });
    }
    let mut edges = Vec::new();
    for (i, a) in subs.iter().enumerate() {
        for (j, b) in subs.iter().enumerate() {
            if b.len() % a.len() != 0 || b.len() == a.len() || !is_prime((b.len() / a.len()) as i64) {
                continue;
            }
            if a.iter().all(|x| b.binary_search(x).is_ok()) {
                edges.push(CoverEdge { source: i, target: j, degree: b.len() / a.len() });
            }
        }
    }
    edges.sort();
    Ok(CoverDiagram { base: s.name.clone(), group: ctx.group.quotient_invariants(&[ctx.group.zero()]).to_string(), nodes, edges })
}

impl CoverDiagram {
    pub fn to_dot(&self) -> String {
        let mut out = format!("digraph \"{}\" {{\n  rankdir=LR;\n", self.base);
        for (i, n) in self.nodes.iter().enumerate() {
            out.push_str(&format!("  n{i} [label=\"{}\\n{}\"];\n", n.surface, n.subgroup_name));
        }
        for e in &self.edges {
            out.push_str(&format!("  n{} -> n{} [label=\"{}\"];\n", e.source, e.target, e.degree));
        }
        out.push_str("}\n");
        out
    }

    /// Multiset of (cover, base, degree) triples by type name.
    pub fn edge_names(&self) -> BTreeMap<(String, String, usize), usize> {
        let mut m = BTreeMap::new();
        for e in &self.edges {
            *m.entry((self.nodes[e.source].surface.clone(), self.nodes[e.target].surface.clone(), e.degree))
                .or_default() += 1;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::parse_type_name;

    fn t(name: &str) -> &'static SurfaceType {
        parse_type_name(name).unwrap()
    }

    #[test]
    fn fundamental_groups() {
        assert_eq!(fundamental_group(t("S1(4A2)")).unwrap().to_string(), "C3^2");
        assert_eq!(fundamental_group(t("S1(2A3+2A1)")).unwrap().to_string(), "C2xC4");
        assert_eq!(fundamental_group(t("S2(3A2)")).unwrap().to_string(), "C3");
        assert!(is_nonprimitive(t("S2(A7)")).unwrap());
        assert!(!is_nonprimitive(t("S3(A1)")).unwrap());
        assert!(!is_nonprimitive(t("S3")).unwrap());
    }

    #[test]
    fn local_table() {
        let chi = |c: Ade, e: Vec<i64>| LocalCharacter::new(c, e);
        assert_eq!(local_cover_type(Ade::A(7), 2, &chi(Ade::A(7), vec![4])).unwrap(), LocalCover::ConnectedCover(Some(Ade::A(3))));
        assert_eq!(local_cover_type(Ade::E(6), 3, &chi(Ade::E(6), vec![1])).unwrap(), LocalCover::ConnectedCover(Some(Ade::D(4))));
        assert_eq!(local_cover_type(Ade::D(6), 2, &chi(Ade::D(6), vec![1, 0])).unwrap(), LocalCover::ConnectedCover(Some(Ade::A(7))));
        assert_eq!(local_cover_type(Ade::D(6), 2, &chi(Ade::D(6), vec![0, 1])).unwrap(), LocalCover::ConnectedCover(Some(Ade::D(4))));
        assert_eq!(local_cover_type(Ade::A(1), 2, &chi(Ade::A(1), vec![0])).unwrap(), LocalCover::SplitsInto(2));
        assert_eq!(local_cover_type(Ade::E(7), 2, &chi(Ade::E(7), vec![1])).unwrap(), LocalCover::ConnectedCover(Some(Ade::E(6))));
        assert!(local_cover_type(Ade::A(5), 2, &chi(Ade::A(5), vec![1])).is_err());
    }

    #[test]
    fn restrictions() {
        let s = t("S1(2A4)");
        let ctx = CoverContext::new(s).unwrap();
        let b = ctx.class(&[1]);
        assert!(local_characters(s, &b).iter().all(|c| c.order == 5));
        let s = t("S2(A5+A1(6l))");
        let ctx = CoverContext::new(s).unwrap();
        let chis = local_characters(s, &ctx.class(&[1]));
        let a5 = chis.iter().find(|c| c.component == Ade::A(5)).unwrap();
        assert_eq!(a5.order, 2);
    }

    #[test]
    fn cover_types() {
        let s = t("S1(A5+A2+A1)");
        let ctx = CoverContext::new(s).unwrap();
        // the subgroup of order 2
        let c2: Vec<Vec<i64>> = ctx.group.elements().into_iter().filter(|x| ctx.group.element_order(x) == 2).collect();
        assert_eq!(ctx.cover_type(&c2).unwrap().name, "S3(4A1)");
        assert_eq!(ctx.cover_type(&[]).unwrap().name, "S6");
        let full = ctx.group.elements();
        assert_eq!(ctx.cover_type(&full).unwrap().name, s.name);
        let ctx = CoverContext::new(t("S1(2A4)")).unwrap();
        assert_eq!(ctx.cover_type(&[]).unwrap().name, "S5");
    }

    #[test]
    fn diagrams() {
        let d = cover_diagram(t("S1(D6+2A1)")).unwrap();
        let mut names: Vec<&str> = d.nodes.iter().map(|n| n.surface.as_str()).collect();
        names.sort();
        assert_eq!(names, ["S1(D6+2A1)", "S2(A7)", "S2(D4+2A1)", "S2(D4+2A1)", "S4(A3(4l))"]);
        assert_eq!(cover_diagram(t("S1(2A4)")).unwrap().nodes.len(), 2);
        assert_eq!(cover_diagram(t("S4")).unwrap().nodes.len(), 1);
    }

    #[test]
    fn branch_chains() {
        let s = t("S2(A7)");
        let ctx = CoverContext::new(s).unwrap();
        let bd = branch_data(s, &ctx.class(&[1])).unwrap();
        assert_eq!(bd.nodes.iter().map(|n| n.0).collect::<Vec<_>>(), [0, 2, 4, 6]);
        assert!(bd.chain_form);
    }
}
