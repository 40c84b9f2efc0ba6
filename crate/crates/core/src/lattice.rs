//! Exact integer linear algebra on the Picard lattice of a blow-up of the plane.
//!
//! Coordinates are taken in the basis `(H, E1, ..., E(9-d))` with the form
//! `diag(1, -1, ..., -1)` and canonical class `K = -3H + E1 + ... + E(9-d)`.

use log::trace;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

pub type IntVector = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PicardBasis {
    pub degree: u8,
    pub rank: usize,
    pub labels: Vec<String>,
    pub canonical_class: IntVector,
}

impl PicardBasis {
    pub fn new(degree: u8) -> Result<Self> {
        if !(1..=9).contains(&degree) {
            return Err(Error::Domain(format!("degree {degree} outside 1..9")));
        }
        let rank = 10 - degree as usize;
        let mut labels = vec!["H".to_string()];
        labels.extend((1..rank).map(|i| format!("E{i}")));
        let mut k = vec![1; rank];
        k[0] = -3;
        Ok(PicardBasis { degree, rank, labels, canonical_class: k })
    }

    /// Unit vector for basis element `i` (0 is `H`).
    pub fn unit(&self, i: usize) -> IntVector {
        let mut v = vec![0; self.rank];
        v[i] = 1;
        v
    }

    pub fn k_pairing(&self, v: &[i64]) -> i64 {
        dot(&self.canonical_class, v)
    }

    /// Human-readable expansion such as `H-E1-E2`.
    pub fn format(&self, v: &[i64]) -> String {
        let mut out = String::new();
        for (c, l) in v.iter().zip(&self.labels) {
            if *c == 0 {
                continue;
            }
            if *c > 0 && !out.is_empty() {
                out.push('+');
            }
            match *c {
                1 => {}
                -1 => out.push('-'),
                c => out.push_str(&c.to_string()),
            }
            out.push_str(l);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

/// Unchecked hyperbolic pairing `u0 v0 - sum ui vi`.
#[inline]
pub fn dot(u: &[i64], v: &[i64]) -> i64 {
    debug_assert_eq!(u.len(), v.len());
    let mut s = u[0] * v[0];
    for i in 1..u.len() {
        s -= u[i] * v[i];
    }
    s
}

pub fn pairing(u: &[i64], v: &[i64]) -> Result<i64> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::Dimension { expected: u.len(), found: v.len() });
    }
    Ok(dot(u, v))
}

/// All `v` with `v.v = self_int` and `K.v = k_pairing`.
pub fn enumerate_classes(basis: &PicardBasis, self_int: i64, k_pairing: i64) -> Result<Vec<IntVector>> {
    if !matches!((self_int, k_pairing), (-2, 0) | (-1, -1)) {
        return Err(Error::Domain(format!(
            "unsupported class data (self-intersection {self_int}, K-pairing {k_pairing})"
        )));
    }
    let n = basis.rank;
    let d = basis.degree as f64;
    if n == 1 {
        return Ok(Vec::new());
    }
    // v = (k/d) K + w with w in the negative definite complement of K;
    // Cauchy-Schwarz there bounds every coordinate.
    let m = (k_pairing * k_pairing) as f64 / d - self_int as f64;
    if m < 0.0 {
        return Ok(Vec::new());
    }
    let kf = k_pairing as f64;
    let h_norm = 9.0 / d - 1.0;
    let e_norm = 1.0 + 1.0 / d;
    let a_mid = -3.0 * kf / d;
    let a_rad = (h_norm * m).sqrt() + 1e-9;
    let b_mid = kf / d;
    let b_rad = (e_norm * m).sqrt() + 1e-9;
    let a_lo = (a_mid - a_rad).floor() as i64;
    let a_hi = (a_mid + a_rad).ceil() as i64;
    let b_lo = (b_mid - b_rad).floor() as i64;
    let b_hi = (b_mid + b_rad).ceil() as i64;
    trace!("enumerate_classes d={} a in [{a_lo},{a_hi}] b in [{b_lo},{b_hi}]", basis.degree);

    let mut out = Vec::new();
    let mut cur = vec![0i64; n];
    for a in a_lo..=a_hi {
        // sum b_i^2 = a^2 - self_int, sum b_i = -3a - k_pairing
        let sq = a * a - self_int;
        let lin = -3 * a - k_pairing;
        if sq < 0 {
            continue;
        }
        cur[0] = a;
        fill(&mut cur, 1, b_lo, b_hi, sq, lin, &mut out);
    }
    out.sort();
    Ok(out)
}

fn fill(cur: &mut [i64], i: usize, lo: i64, hi: i64, sq: i64, lin: i64, out: &mut Vec<IntVector>) {
    let n = cur.len();
    if i == n {
        if sq == 0 && lin == 0 {
            out.push(cur.to_vec());
        }
        return;
    }
    let left = (n - i) as i64;
    for b in lo..=hi {
        let s2 = sq - b * b;
        if s2 < 0 {
            continue;
        }
        let l2 = lin - b;
        // remaining coordinates must satisfy (sum)^2 <= count * (sum of squares)
        if l2 * l2 > (left - 1) * s2 {
            continue;
        }
        cur[i] = b;
        fill(cur, i + 1, lo, hi, s2, l2, out);
    }
    cur[i] = 0;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnfResult {
    pub invariant_factors: Vec<i64>,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct AbelianGroupInvariants {
    pub factors: Vec<i64>,
}

impl AbelianGroupInvariants {
    pub fn trivial() -> Self {
        Self { factors: Vec::new() }
    }

    /// Canonical form of `Z/n1 x ... x Z/nk` for arbitrary positive `ni`.
    pub fn from_orders(orders: &[i64]) -> Self {
        let diag: Vec<Vec<BigInt>> = (0..orders.len())
            .map(|i| (0..orders.len()).map(|j| BigInt::from(if i == j { orders[i] } else { 0 })).collect())
            .collect();
        let snf = Snf::compute(diag);
        Self {
            factors: snf.diagonal.iter().map(|x| x.to_i64().unwrap()).filter(|&x| x > 1).collect(),
        }
    }

    pub fn order(&self) -> i64 {
        self.factors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }
}

impl fmt::Display for AbelianGroupInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "C1");
        }
        // write repeated factors as powers: C3^2, C2xC4
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.factors.len() {
            let mut j = i;
            while j < self.factors.len() && self.factors[j] == self.factors[i] {
                j += 1;
            }
            if j - i == 1 {
                parts.push(format!("C{}", self.factors[i]));
            } else {
                parts.push(format!("C{}^{}", self.factors[i], j - i));
            }
            i = j;
        }
        write!(f, "{}", parts.join("x"))
    }
}

/// Smith normal form `P * M * C = D` with the column transform and its inverse kept.
#[derive(Clone, Debug)]
pub struct Snf {
    pub diagonal: Vec<BigInt>,
    pub cols: Vec<Vec<BigInt>>,
    pub cols_inv: Vec<Vec<BigInt>>,
}

impl Snf {
    pub fn compute(mut m: Vec<Vec<BigInt>>) -> Snf {
        let rows = m.len();
        let ncols = if rows == 0 { 0 } else { m[0].len() };
        let ident = |n: usize| -> Vec<Vec<BigInt>> {
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
                .collect()
        };
        let mut c = ident(ncols);
        let mut cinv = ident(ncols);
        let mut t = 0;
        while t < rows.min(ncols) {
            // pivot of least absolute value in the remaining block
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..ncols {
                    if !m[i][j].is_zero() {
                        let better = match best {
                            None => true,
                            Some((bi, bj)) => m[i][j].abs() < m[bi][bj].abs(),
                        };
                        if better {
                            best = Some((i, j));
                        }
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            m.swap(t, pi);
            swap_cols(&mut m, t, pj);
            swap_cols(&mut c, t, pj);
            cinv.swap(t, pj);
            let mut clean = false;
            while !clean {
                clean = true;
                // clear the pivot column
                for i in t + 1..rows {
                    if m[i][t].is_zero() {
                        continue;
                    }
                    let q = m[i][t].div_floor(&m[t][t]);
                    for j in t..ncols {
                        let sub = &q * &m[t][j];
                        m[i][j] -= sub;
                    }
                    if !m[i][t].is_zero() {
                        clean = false;
                    }
                }
                // clear the pivot row
                for j in t + 1..ncols {
                    if m[t][j].is_zero() {
                        continue;
                    }
                    let q = m[t][j].div_floor(&m[t][t]);
                    col_axpy(&mut m, j, t, &q);
                    col_axpy(&mut c, j, t, &q);
                    // C <- C E  means  C^-1 <- E^-1 C^-1: row t += q row j
                    for k in 0..ncols {
                        let add = &q * &cinv[j][k];
                        cinv[t][k] += add;
                    }
                    if !m[t][j].is_zero() {
                        clean = false;
                    }
                }
                if !clean {
                    // move the new smallest entry of row/column t into the pivot
                    let mut best = (t, t);
                    for i in t..rows {
                        if !m[i][t].is_zero() && m[i][t].abs() < m[best.0][best.1].abs() {
                            best = (i, t);
                        }
                    }
                    for j in t..ncols {
                        if !m[t][j].is_zero() && m[t][j].abs() < m[best.0][best.1].abs() {
                            best = (t, j);
                        }
                    }
                    if best.1 == t {
                        m.swap(t, best.0);
                    } else {
                        swap_cols(&mut m, t, best.1);
                        swap_cols(&mut c, t, best.1);
                        cinv.swap(t, best.1);
                    }
                    continue;
                }
                // divisibility: pivot must divide the rest of the block
                let mut fix = None;
                'outer: for i in t + 1..rows {
                    for j in t + 1..ncols {
                        if !(&m[i][j] % &m[t][t]).is_zero() {
                            fix = Some(i);
                            break 'outer;
                        }
                    }
                }
                if let Some(i) = fix {
                    for j in t..ncols {
                        let add = m[i][j].clone();
                        m[t][j] += add;
                    }
                    clean = false;
                }
            }
            if m[t][t].is_negative() {
                for j in t..ncols {
                    m[t][j] = -m[t][j].clone();
                }
            }
            t += 1;
        }
        let diagonal = (0..t).map(|i| m[i][i].clone()).collect();
        Snf { diagonal, cols: c, cols_inv: cinv }
    }
}

fn swap_cols(m: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a != b {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
}

/// column `j -= q * column t`
fn col_axpy(m: &mut [Vec<BigInt>], j: usize, t: usize, q: &BigInt) {
    for row in m.iter_mut() {
        let sub = q * &row[t];
        row[j] -= sub;
    }
}

fn to_big(rows: &[IntVector]) -> Vec<Vec<BigInt>> {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn big_to_i64(x: &BigInt) -> i64 {
    x.to_i64().expect("lattice entry exceeds i64")
}

pub fn smith_normal_form(rows: &[IntVector]) -> Result<SnfResult> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Domain("empty matrix".into()));
    }
    let w = rows[0].len();
    if rows.iter().any(|r| r.len() != w) {
        return Err(Error::Dimension { expected: w, found: rows.iter().map(|r| r.len()).find(|&l| l != w).unwrap() });
    }
    let snf = Snf::compute(to_big(rows));
    let invariant_factors: Vec<i64> = snf.diagonal.iter().map(big_to_i64).collect();
    Ok(SnfResult { rank: invariant_factors.len(), invariant_factors })
}

/// The torsion subgroup of `Z^n / span(rows)` together with explicit generators.
#[derive(Clone, Debug)]
pub struct TorsionData {
    pub invariants: AbelianGroupInvariants,
    /// one representative in the ambient lattice per invariant factor
    pub generators: Vec<IntVector>,
    offset: usize,
    cols: Vec<IntVector>,
}

impl TorsionData {
    pub fn compute(sublattice: &[IntVector], ambient: &PicardBasis) -> Result<TorsionData> {
        check_rows(sublattice, ambient)?;
        if sublattice.is_empty() {
            return Ok(TorsionData {
                invariants: AbelianGroupInvariants::trivial(),
                generators: Vec::new(),
                offset: 0,
                cols: Vec::new(),
            });
        }
        let snf = Snf::compute(to_big(sublattice));
        if snf.diagonal.len() != sublattice.len() {
            return Err(Error::Rank(format!(
                "{} vectors span a lattice of rank {}",
                sublattice.len(),
                snf.diagonal.len()
            )));
        }
        let diag: Vec<i64> = snf.diagonal.iter().map(big_to_i64).collect();
        let offset = diag.iter().take_while(|&&x| x == 1).count();
        let generators = (offset..diag.len())
            .map(|i| snf.cols_inv[i].iter().map(big_to_i64).collect())
            .collect();
        let cols = snf.cols.iter().map(|r| r.iter().map(big_to_i64).collect()).collect();
        Ok(TorsionData {
            invariants: AbelianGroupInvariants { factors: diag[offset..].to_vec() },
            generators,
            offset,
            cols,
        })
    }

    /// Coordinates of an element of the saturation in the torsion group.
    pub fn coordinates(&self, v: &[i64]) -> Vec<i64> {
        self.invariants
            .factors
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let col = self.offset + k;
                let y: i64 = v.iter().zip(&self.cols).map(|(x, row)| x * row[col]).sum();
                y.rem_euclid(n)
            })
            .collect()
    }

    /// Lattice vector representing the torsion element with the given coordinates.
    pub fn element(&self, coords: &[i64]) -> IntVector {
        let n = self.generators.first().map_or(0, |g| g.len());
        let mut v = vec![0; n];
        for (c, g) in coords.iter().zip(&self.generators) {
            for (x, y) in v.iter_mut().zip(g) {
                *x += c * y;
            }
        }
        v
    }
}

fn check_rows(rows: &[IntVector], ambient: &PicardBasis) -> Result<()> {
    for r in rows {
        if r.len() != ambient.rank {
            return Err(Error::Dimension { expected: ambient.rank, found: r.len() });
        }
    }
    Ok(())
}

pub fn torsion_quotient(sublattice: &[IntVector], ambient: &PicardBasis) -> Result<AbelianGroupInvariants> {
    Ok(TorsionData::compute(sublattice, ambient)?.invariants)
}

/// Basis of `(span tensor Q) meet Z^n`.
pub fn saturation(sublattice: &[IntVector], ambient: &PicardBasis) -> Result<Vec<IntVector>> {
    check_rows(sublattice, ambient)?;
    if sublattice.is_empty() {
        return Ok(Vec::new());
    }
    let snf = Snf::compute(to_big(sublattice));
    if snf.diagonal.len() != sublattice.len() {
        return Err(Error::Rank(format!(
            "{} vectors span a lattice of rank {}",
            sublattice.len(),
            snf.diagonal.len()
        )));
    }
    Ok((0..sublattice.len()).map(|i| snf.cols_inv[i].iter().map(big_to_i64).collect()).collect())
}

/// Rank of an integer matrix over Q.
pub fn rank(rows: &[IntVector]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let w = m[0].len();
    let mut r = 0;
    for c in 0..w {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if m[i][c] == 0 {
                continue;
            }
            let (a, b) = (m[r][c], m[i][c]);
            let g = a.gcd(&b);
            let (fa, fb) = (b / g, a / g);
            let mut row_g = 0i128;
            for j in 0..w {
                m[i][j] = m[i][j] * fb - m[r][j] * fa;
                row_g = row_g.gcd(&m[i][j]);
            }
            if row_g > 1 {
                for j in 0..w {
                    m[i][j] /= row_g;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Solve `x * A = b` over Q for a row vector `x`; rows of `a` are the basis.
pub fn solve_rational(a: &[IntVector], b: &[i64]) -> Option<Vec<Rational64>> {
    let n = a.len();
    let w = b.len();
    // augmented transpose: w equations in n unknowns
    let mut m: Vec<Vec<Rational64>> = (0..w)
        .map(|j| {
            let mut row: Vec<Rational64> = (0..n).map(|i| Rational64::from_integer(a[i][j])).collect();
            row.push(Rational64::from_integer(b[j]));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..w).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for j in c..=n {
            m[r][j] *= inv;
        }
        for i in 0..w {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                for j in c..=n {
                    let s = f * m[r][j];
                    m[i][j] -= s;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if (r..w).any(|i| !m[i][n].is_zero()) {
        return None;
    }
    let mut x = vec![Rational64::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][n];
    }
    Some(x)
}

/// Integer coefficients of `v` in the basis `a`, if `v` lies in its Z-span.
pub fn integral_coordinates(a: &[IntVector], v: &[i64]) -> Option<Vec<i64>> {
    let x = solve_rational(a, v)?;
    if x.iter().all(|q| q.is_integer()) {
        Some(x.iter().map(|q| q.to_integer()).collect())
    } else {
        None
    }
}

/// Gram matrix of a list of vectors.
pub fn gram(vs: &[IntVector]) -> Vec<Vec<i64>> {
    vs.iter().map(|u| vs.iter().map(|v| dot(u, v)).collect()).collect()
}

/// Inverse of a nonsingular integer matrix over Q.
pub fn inverse_rational(m: &[Vec<i64>]) -> Option<Vec<Vec<Rational64>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<Rational64> = row.iter().map(|&x| Rational64::from_integer(x)).collect();
            r.extend((0..n).map(|j| if i == j { Rational64::one() } else { Rational64::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let inv = a[c][c].recip();
        for j in 0..2 * n {
            a[c][j] *= inv;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c];
                for j in 0..2 * n {
                    let s = f * a[c][j];
                    a[i][j] -= s;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Weyl reflection in the root `r` (with `r.r = -2`).
pub fn reflect(v: &[i64], r: &[i64]) -> IntVector {
    let c = dot(v, r);
    v.iter().zip(r).map(|(x, y)| x + c * y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_labels_and_k() {
        let b = PicardBasis::new(3).unwrap();
        assert_eq!(b.labels, vec!["H", "E1", "E2", "E3", "E4", "E5", "E6"]);
        assert_eq!(dot(&b.canonical_class, &b.canonical_class), 3);
        assert_eq!(b.format(&[1, -1, -1, 0, 0, 0, 0]), "H-E1-E2");
    }

    #[test]
    fn pairing_dimension_mismatch() {
        assert!(pairing(&[1, 0], &[1, 0, 0]).is_err());
        assert_eq!(pairing(&[1, 0], &[1, 0]).unwrap(), 1);
        assert_eq!(pairing(&[0, 1], &[0, 1]).unwrap(), -1);
    }

    #[test]
    fn unsupported_classes() {
        let b = PicardBasis::new(3).unwrap();
        assert!(enumerate_classes(&b, -2, -1).is_err());
        assert!(enumerate_classes(&b, 0, 2).is_err());
    }

    #[test]
    fn snf_small_cases() {
        assert_eq!(
            smith_normal_form(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap().invariant_factors,
            vec![1, 1, 1]
        );
        assert_eq!(smith_normal_form(&[vec![2, 0], vec![0, 2]]).unwrap().invariant_factors, vec![2, 2]);
        assert_eq!(smith_normal_form(&[vec![2, 0], vec![0, 3]]).unwrap().invariant_factors, vec![1, 6]);
        assert!(smith_normal_form(&[]).is_err());
    }

    #[test]
    fn torsion_of_doubled_vector() {
        let b = PicardBasis::new(8).unwrap();
        let t = torsion_quotient(&[vec![0, 2]], &b).unwrap();
        assert_eq!(t.factors, vec![2]);
        assert_eq!(saturation(&[vec![0, 2]], &b).unwrap(), vec![vec![0, 1]]);
        assert!(torsion_quotient(&[vec![0, 2], vec![0, 4]], &b).is_err());
    }

    #[test]
    fn group_display() {
        assert_eq!(AbelianGroupInvariants::from_orders(&[3, 3]).to_string(), "C3^2");
        assert_eq!(AbelianGroupInvariants::from_orders(&[4, 2]).to_string(), "C2xC4");
        assert_eq!(AbelianGroupInvariants::from_orders(&[2, 3]).factors, vec![6]);
        assert_eq!(AbelianGroupInvariants::trivial().to_string(), "C1");
    }
}
