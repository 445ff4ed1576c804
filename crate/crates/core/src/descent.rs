//! Mordell-Weil bases, coordinates of points in them, the relation `∼_m`
//! and its classes, division by `m`, and pairs on the curve `X_R`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_integer::Integer;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heights::{canonical_height, gram};
use crate::jacobian::GroupContext;
use crate::points::{enumerate_points, PlanePoint};

/// Largest torsion subgroup over `Q`.
const MAX_TORSION: usize = 16;

/// Generators, torsion subgroup and regulator matrix of `Jac(C)(Q)`
/// (identified with `C(Q)` through the base point).
#[derive(Clone, Debug)]
pub struct MordellWeilBasis {
    generators: Vec<PlanePoint>,
    torsion: Vec<PlanePoint>,
    torsion_index: HashMap<PlanePoint, usize>,
    table: Vec<Vec<usize>>,
    gram: Vec<Vec<f64>>,
    tol: f64,
    verified: bool,
}

/// A point written as `Σ n_i g_i ⊕ t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coordinates {
    pub n: Vec<i64>,
    pub torsion: usize,
}

impl MordellWeilBasis {
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PlanePoint] {
        &self.generators
    }

    pub fn torsion(&self) -> &[PlanePoint] {
        &self.torsion
    }

    pub fn gram(&self) -> &[Vec<f64>] {
        &self.gram
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// False when the basis came from a bounded search and only certifies a
    /// lower bound for the rank.
    pub fn is_verified(&self) -> bool {
        self.verified
    }

    pub fn torsion_index(&self, p: &PlanePoint) -> Option<usize> {
        self.torsion_index.get(p).copied()
    }

    fn torsion_add(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    fn torsion_mul(&self, m: i64, i: usize) -> usize {
        let k = m.rem_euclid(self.torsion.len() as i64);
        let mut acc = 0;
        for _ in 0..k {
            acc = self.torsion_add(acc, i);
        }
        acc
    }

    /// Indices of `m T`.
    pub fn multiples_of_m(&self, m: i64) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.torsion.len()).map(|i| self.torsion_mul(m, i)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Least index in the coset `t + mT`.
    pub fn coset_id(&self, t: usize, m: i64) -> usize {
        self.multiples_of_m(m).iter().map(|&s| self.torsion_add(t, s)).min().unwrap()
    }

    /// `#(T / mT)`.
    pub fn quotient_order(&self, m: i64) -> usize {
        self.torsion.len() / self.multiples_of_m(m).len()
    }

    pub fn combination(&self, ctx: &GroupContext, c: &Coordinates) -> PlanePoint {
        let mut acc = self.torsion[c.torsion].clone();
        for (g, &n) in self.generators.iter().zip(&c.n) {
            acc = ctx.add(&acc, &ctx.smul(n, g));
        }
        acc
    }
}

/// Reads `gen x0 x1 x2` and `tor x0 x1 x2` lines; `#` starts a comment.
pub fn parse_basis_file(text: &str) -> Result<(Vec<PlanePoint>, Vec<PlanePoint>)> {
    let mut gens = Vec::new();
    let mut tors = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (tag, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let p: PlanePoint = rest
            .parse()
            .map_err(|e| Error::Format(format!("basis line {}: {e}", lineno + 1)))?;
        match tag {
            "gen" => gens.push(p),
            "tor" => tors.push(p),
            _ => return Err(Error::Format(format!("basis line {}: unknown tag '{tag}'", lineno + 1))),
        }
    }
    Ok((gens, tors))
}

/// Index of each torsion point and the addition table on indices.
type TorsionTable = (HashMap<PlanePoint, usize>, Vec<Vec<usize>>);

fn torsion_table(ctx: &GroupContext, torsion: &[PlanePoint]) -> Result<TorsionTable> {
    let index: HashMap<PlanePoint, usize> = torsion.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let mut table = vec![vec![0; torsion.len()]; torsion.len()];
    for (i, a) in torsion.iter().enumerate() {
        for (j, b) in torsion.iter().enumerate() {
            let s = ctx.add(a, b);
            table[i][j] = *index
                .get(&s)
                .ok_or_else(|| Error::TorsionNotClosed(format!("{a} + {b} = {s} is missing")))?;
        }
        let n = ctx.neg(a);
        if !index.contains_key(&n) {
            return Err(Error::TorsionNotClosed(format!("-{a} = {n} is missing")));
        }
    }
    Ok((index, table))
}

/// Threshold below which a regulator counts as singular. The pairing carries
/// an error of a few `tol` per entry, so the determinant error scales with
/// the size of the entries.
fn singular_threshold(g: &[Vec<f64>], tol: f64) -> f64 {
    let r = g.len() as i32;
    let scale = g.iter().map(|row| row.iter().fold(0.0f64, |m, x| m.max(x.abs()))).fold(1.0f64, f64::max);
    (tol.powi(r)).max(100.0 * r as f64 * tol * scale.powi(r - 1))
}

fn det(g: &[Vec<f64>]) -> f64 {
    let n = g.len();
    if n == 0 {
        return 1.0;
    }
    DMatrix::from_fn(n, n, |i, j| g[i][j]).determinant()
}

/// Validates a basis: points on the curve, generators of infinite order and
/// independent, torsion list closed under the group law.
pub fn load_mw_basis(
    ctx: &GroupContext,
    generators: Vec<PlanePoint>,
    torsion: Vec<PlanePoint>,
    tol: f64,
) -> Result<MordellWeilBasis> {
    build_basis(ctx, generators, torsion, tol, true)
}

fn build_basis(
    ctx: &GroupContext,
    generators: Vec<PlanePoint>,
    torsion: Vec<PlanePoint>,
    tol: f64,
    verified: bool,
) -> Result<MordellWeilBasis> {
    for p in generators.iter().chain(&torsion) {
        ctx.check(p)?;
    }
    let mut tors = vec![ctx.identity()];
    for t in torsion {
        if ctx.torsion_order(&t).is_none() {
            return Err(Error::TorsionNotClosed(format!("{t} has infinite order")));
        }
        if !tors.contains(&t) {
            tors.push(t);
        }
    }
    tors[1..].sort();
    if tors.len() > MAX_TORSION {
        return Err(Error::TorsionNotClosed(format!("{} torsion points exceed the bound 16", tors.len())));
    }
    let (torsion_index, table) = torsion_table(ctx, &tors)?;
    for g in &generators {
        if ctx.torsion_order(g).is_some() || canonical_height(ctx, g, tol)? <= tol {
            return Err(Error::TorsionGenerator(g.to_string()));
        }
    }
    let gm = gram(ctx, &generators, tol)?;
    let d = det(&gm);
    if !generators.is_empty() && d <= singular_threshold(&gm, tol) {
        return Err(Error::Dependent(d));
    }
    Ok(MordellWeilBasis { generators, torsion: tors, torsion_index, table, gram: gm, tol, verified })
}

fn solve(g: &[Vec<f64>], v: &[f64]) -> Option<Vec<f64>> {
    let n = g.len();
    let m = DMatrix::from_fn(n, n, |i, j| g[i][j]);
    m.lu().solve(&DVector::from_column_slice(v)).map(|x| x.iter().copied().collect())
}

/// Real coordinates of `D` against the generators, and `ĥ(D)`.
fn real_coordinates(ctx: &GroupContext, gens: &[PlanePoint], g: &[Vec<f64>], d: &PlanePoint, tol: f64) -> Result<(Vec<f64>, f64)> {
    let hd = canonical_height(ctx, d, tol)?;
    let v: Vec<f64> = gens
        .iter()
        .enumerate()
        .map(|(i, gi)| canonical_height(ctx, &ctx.add(d, gi), tol).map(|h| (h - hd - g[i][i]) / 2.0))
        .collect::<Result<_>>()?;
    let x = solve(g, &v).ok_or_else(|| Error::Internal("regulator matrix is singular".into()))?;
    Ok((x, hd))
}

/// `D = Σ n_i g_i ⊕ t`, verified exactly.
pub fn coordinates(ctx: &GroupContext, basis: &MordellWeilBasis, d: &PlanePoint) -> Result<Coordinates> {
    ctx.check(d)?;
    if let Some(t) = basis.torsion_index(d) {
        return Ok(Coordinates { n: vec![0; basis.rank()], torsion: t });
    }
    if basis.rank() == 0 {
        return Err(Error::NotInSpan(d.to_string()));
    }
    let (x, _) = real_coordinates(ctx, &basis.generators, &basis.gram, d, basis.tol)?;
    let mut n = Vec::with_capacity(x.len());
    for xi in x {
        let r = xi.round();
        if (xi - r).abs() >= 0.25 || r.abs() > 1e15 {
            return Err(Error::NotInSpan(format!("{d} (coordinate {xi:.4})")));
        }
        n.push(r as i64);
    }
    let mut rest = d.clone();
    for (g, &k) in basis.generators.iter().zip(&n) {
        rest = ctx.sub(&rest, &ctx.smul(k, g));
    }
    match basis.torsion_index(&rest) {
        Some(t) => Ok(Coordinates { n, torsion: t }),
        None => Err(Error::NotInSpan(format!("{d} (remainder {rest} is not in the torsion list)"))),
    }
}

/// Label of a class of `∼_m`: coordinates mod `m` and a coset of `mT`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassLabel {
    pub residues: Vec<i64>,
    pub coset: usize,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r: Vec<String> = self.residues.iter().map(|x| x.to_string()).collect();
        write!(f, "({};t{})", r.join(" "), self.coset)
    }
}

#[derive(Clone, Debug)]
pub struct DescentClass {
    pub label: ClassLabel,
    pub representative: PlanePoint,
    pub members: Vec<PlanePoint>,
}

pub fn class_label(basis: &MordellWeilBasis, c: &Coordinates, m: u32) -> ClassLabel {
    let m = m as i64;
    ClassLabel { residues: c.n.iter().map(|x| x.rem_euclid(m)).collect(), coset: basis.coset_id(c.torsion, m) }
}

/// Whether `ψ(P, Q)` lies in `m Jac(C)(Q)`.
pub fn equivalent_m(ctx: &GroupContext, basis: &MordellWeilBasis, p: &PlanePoint, q: &PlanePoint, m: u32) -> Result<bool> {
    if m == 0 {
        return Err(Error::Precondition("m must be positive".into()));
    }
    if m == 1 || p == q {
        return Ok(true);
    }
    let c = coordinates(ctx, basis, &ctx.psi(p, q))?;
    let mi = m as i64;
    Ok(c.n.iter().all(|x| x.rem_euclid(mi) == 0) && basis.multiples_of_m(mi).contains(&c.torsion))
}

/// Classes of `∼_m` on `points`, ordered by label; members sorted and the
/// representative is the least member.
pub fn partition(ctx: &GroupContext, basis: &MordellWeilBasis, points: &[PlanePoint], m: u32) -> Result<Vec<DescentClass>> {
    if m == 0 {
        return Err(Error::Precondition("m must be positive".into()));
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let labels: Vec<ClassLabel> = if m == 1 {
        vec![ClassLabel { residues: vec![0; basis.rank()], coset: 0 }; points.len()]
    } else {
        points
            .par_iter()
            .map(|p| coordinates(ctx, basis, p).map(|c| class_label(basis, &c, m)))
            .collect::<Result<_>>()?
    };
    let mut groups: BTreeMap<ClassLabel, Vec<PlanePoint>> = BTreeMap::new();
    for (label, p) in labels.into_iter().zip(points) {
        groups.entry(label).or_default().push(p.clone());
    }
    Ok(groups
        .into_iter()
        .map(|(label, mut members)| {
            members.sort();
            members.dedup();
            DescentClass { label, representative: members[0].clone(), members }
        })
        .collect())
}

/// A preimage of `D` under multiplication by `m`, if one exists: the one
/// with coordinates `n / m` and the least torsion index.
pub fn divide_by_m(ctx: &GroupContext, basis: &MordellWeilBasis, d: &PlanePoint, m: u32) -> Result<Option<PlanePoint>> {
    if m == 0 {
        return Err(Error::Precondition("m must be positive".into()));
    }
    if m == 1 {
        return Ok(Some(d.clone()));
    }
    let mi = m as i64;
    let c = coordinates(ctx, basis, d)?;
    if c.n.iter().any(|x| x.rem_euclid(mi) != 0) {
        return Ok(None);
    }
    let Some(t) = (0..basis.torsion.len()).find(|&s| basis.torsion_mul(mi, s) == c.torsion) else {
        return Ok(None);
    };
    let q = basis.combination(ctx, &Coordinates { n: c.n.iter().map(|x| x / mi).collect(), torsion: t });
    if ctx.smul(mi, &q) != *d {
        return Err(Error::Internal(format!("{m} * {q} != {d}")));
    }
    Ok(Some(q))
}

/// A rational point `(P, Q)` of `X_R`: `[P] = m[Q] - (m-1)[R]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XRPair {
    pub p: PlanePoint,
    pub q: PlanePoint,
    pub r: PlanePoint,
    pub m: u32,
}

impl XRPair {
    pub fn verify(&self, ctx: &GroupContext) -> Result<()> {
        let m = self.m as i64;
        let rhs = ctx.sub(&ctx.smul(m, &self.q), &ctx.smul(m - 1, &self.r));
        if rhs == self.p {
            Ok(())
        } else {
            Err(Error::NotOnDescentCurve(format!("P={} Q={} R={} m={}", self.p, self.q, self.r, self.m)))
        }
    }
}

/// The pairs `(P, Q)` on `X_R` for every `P` in a class containing `R`.
pub fn xr_pairs_for_class(
    ctx: &GroupContext,
    basis: &MordellWeilBasis,
    members: &[PlanePoint],
    r: &PlanePoint,
    m: u32,
) -> Result<Vec<XRPair>> {
    members
        .par_iter()
        .map(|p| {
            let q = if m == 1 {
                p.clone()
            } else {
                let y = divide_by_m(ctx, basis, &ctx.psi(p, r), m)?.ok_or_else(|| {
                    Error::NotInSpan(format!("psi({p}, {r}) is not divisible by {m}; the basis is incomplete"))
                })?;
                ctx.add(r, &y)
            };
            let pair = XRPair { p: p.clone(), q, r: r.clone(), m };
            pair.verify(ctx)?;
            Ok(pair)
        })
        .collect()
}

/// Row-style Hermite reduction of an integer matrix, returning the nonzero
/// rows and the unimodular transform with `U * input = output`.
fn hermite(mut a: Vec<Vec<i128>>) -> (Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut u: Vec<Vec<i128>> = (0..rows).map(|i| (0..rows).map(|j| (i == j) as i128).collect()).collect();
    let mut pivot = 0;
    for col in 0..cols {
        if pivot == rows {
            break;
        }
        for i in pivot + 1..rows {
            let (x, y) = (a[pivot][col], a[i][col]);
            if y == 0 {
                continue;
            }
            let e = x.extended_gcd(&y);
            let (g, s, t) = (e.gcd, e.x, e.y);
            let (xg, yg) = (x / g, y / g);
            let combine = |m: &mut Vec<Vec<i128>>| {
                let (rp, ri) = (m[pivot].clone(), m[i].clone());
                for k in 0..rp.len() {
                    m[pivot][k] = s * rp[k] + t * ri[k];
                    m[i][k] = -yg * rp[k] + xg * ri[k];
                }
            };
            combine(&mut a);
            combine(&mut u);
        }
        if a[pivot][col] != 0 {
            pivot += 1;
        }
    }
    let keep: Vec<usize> = (0..rows).filter(|&i| a[i].iter().any(|&x| x != 0)).collect();
    (keep.iter().map(|&i| a[i].clone()).collect(), keep.iter().map(|&i| u[i].clone()).collect())
}

/// Bounded-search basis: all points up to height `bound`, torsion closed
/// under the group law, non-torsion points saturated into a lattice basis.
/// The result only certifies a lower bound for the rank.
pub fn fallback_basis(ctx: &GroupContext, bound: u64, tol: f64) -> Result<MordellWeilBasis> {
    let pts = enumerate_points(ctx.curve(), bound)?;
    let mut torsion: Vec<PlanePoint> = vec![ctx.identity()];
    let mut free: Vec<(f64, PlanePoint)> = Vec::new();
    for p in &pts {
        if ctx.torsion_order(p).is_some() {
            if !torsion.contains(p) {
                torsion.push(p.clone());
            }
        } else {
            free.push((canonical_height(ctx, p, tol)?, p.clone()));
        }
    }
    loop {
        let mut grown = false;
        for i in 0..torsion.len() {
            for j in 0..torsion.len() {
                let s = ctx.add(&torsion[i], &torsion[j]);
                if !torsion.contains(&s) {
                    torsion.push(s);
                    grown = true;
                }
            }
        }
        if !grown || torsion.len() > MAX_TORSION {
            break;
        }
    }
    free.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));

    let tors_basis = build_basis(ctx, Vec::new(), torsion.clone(), tol, false)?;
    let mut gens: Vec<PlanePoint> = Vec::new();
    let mut g: Vec<Vec<f64>> = Vec::new();
    for (hd, d) in free {
        if gens.is_empty() {
            gens.push(d);
            g = gram(ctx, &gens, tol)?;
            continue;
        }
        let (x, _) = real_coordinates(ctx, &gens, &g, &d, tol)?;
        let qx: f64 = (0..x.len()).map(|i| (0..x.len()).map(|j| x[i] * g[i][j] * x[j]).sum::<f64>()).sum();
        if hd - qx > 1e-4 * hd.max(1.0) {
            gens.push(d);
            g = gram(ctx, &gens, tol)?;
            continue;
        }
        // D is in the rational span: find k with k D in the lattice plus torsion.
        let mut relation = None;
        for k in 1..=12i64 {
            let n: Vec<f64> = x.iter().map(|xi| xi * k as f64).collect();
            if n.iter().any(|v| (v - v.round()).abs() > 1e-3) {
                continue;
            }
            let n: Vec<i64> = n.iter().map(|v| v.round() as i64).collect();
            let mut rest = ctx.smul(k, &d);
            for (gi, &ni) in gens.iter().zip(&n) {
                rest = ctx.sub(&rest, &ctx.smul(ni, gi));
            }
            if tors_basis.torsion_index(&rest).is_some() {
                relation = Some((k, n));
                break;
            }
        }
        let Some((k, n)) = relation else {
            return Err(Error::Internal(format!("no small relation for dependent point {d}")));
        };
        if k == 1 {
            continue;
        }
        let r = gens.len();
        let mut rows: Vec<Vec<i128>> = (0..r).map(|i| (0..r).map(|j| if i == j { k as i128 } else { 0 }).collect()).collect();
        rows.push(n.iter().map(|&v| v as i128).collect());
        let (_, u) = hermite(rows);
        let sources: Vec<PlanePoint> = gens.iter().cloned().chain(std::iter::once(d.clone())).collect();
        gens = u
            .iter()
            .map(|row| {
                let mut acc = ctx.identity();
                for (c, s) in row.iter().zip(&sources) {
                    acc = ctx.add(&acc, &ctx.smul(*c as i64, s));
                }
                acc
            })
            .collect();
        g = gram(ctx, &gens, tol)?;
    }
    build_basis(ctx, gens, torsion, tol, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::CubicForm;

    const TOL: f64 = 1e-8;

    fn pt(x: [i64; 3]) -> PlanePoint {
        PlanePoint::from_i64(x).unwrap()
    }

    fn ctx(c: [i64; 10], base: [i64; 3]) -> GroupContext {
        GroupContext::new(CubicForm::new(c).unwrap(), pt(base)).unwrap()
    }

    fn c37() -> (GroupContext, MordellWeilBasis) {
        let g = ctx([1, 0, 0, 0, 0, -1, 0, -1, -1, 0], [0, 1, 0]);
        let b = load_mw_basis(&g, vec![pt([0, 0, 1])], vec![], TOL).unwrap();
        (g, b)
    }

    fn c389() -> (GroupContext, MordellWeilBasis) {
        let g = ctx([1, 0, 1, 0, 0, -2, 0, -1, -1, 0], [0, 1, 0]);
        let b = load_mw_basis(&g, vec![pt([1, -1, -1]), pt([0, 0, 1])], vec![], TOL).unwrap();
        (g, b)
    }

    fn fermat() -> (GroupContext, MordellWeilBasis) {
        let g = ctx([1, 0, 0, 0, 0, 0, 1, 0, 0, 1], [1, -1, 0]);
        let b = load_mw_basis(&g, vec![], vec![pt([0, 1, -1]), pt([1, 0, -1])], TOL).unwrap();
        (g, b)
    }

    #[test]
    fn basis_validation() {
        let (g, b) = c37();
        assert_eq!((b.rank(), b.torsion().len()), (1, 1));
        let two = g.smul(2, &pt([0, 0, 1]));
        assert!(matches!(load_mw_basis(&g, vec![pt([0, 0, 1]), two], vec![], TOL), Err(Error::Dependent(_))));
        assert!(matches!(load_mw_basis(&g, vec![pt([1, 2, 3])], vec![], TOL), Err(Error::NotOnCurve(_))));
        let (f, fb) = fermat();
        assert_eq!((fb.rank(), fb.torsion().len()), (0, 3));
        assert!(matches!(load_mw_basis(&f, vec![], vec![pt([0, 1, -1])], TOL), Err(Error::TorsionNotClosed(_))));
        assert!(matches!(load_mw_basis(&f, vec![pt([0, 1, -1])], vec![], TOL), Err(Error::TorsionGenerator(_))));
    }

    #[test]
    fn parse_basis_lines() {
        let (g, t) = parse_basis_file("# 389a\ngen 1 -1 -1\ngen 0 0 1\ntor 0 1 0\n").unwrap();
        assert_eq!((g.len(), t.len()), (2, 1));
        assert!(parse_basis_file("foo 1 2 3").is_err());
        assert!(parse_basis_file("gen 1 2").is_err());
    }

    #[test]
    fn coordinates_round_trip() {
        let (g, b) = c389();
        assert_eq!(coordinates(&g, &b, &g.identity()).unwrap(), Coordinates { n: vec![0, 0], torsion: 0 });
        assert_eq!(coordinates(&g, &b, &b.generators()[0]).unwrap().n, vec![1, 0]);
        for (i, j) in [(3, 0), (-2, 5), (4, -4), (1, 1)] {
            let c = Coordinates { n: vec![i, j], torsion: 0 };
            let d = b.combination(&g, &c);
            assert_eq!(coordinates(&g, &b, &d).unwrap(), c);
        }
        let (f, fb) = fermat();
        for t in fb.torsion() {
            assert_eq!(coordinates(&f, &fb, t).unwrap().n.len(), 0);
        }
    }

    #[test]
    fn coordinates_with_torsion_part() {
        let g = ctx([1, 0, -1, 0, 0, 0, 0, -1, -1, 0], [0, 1, 0]);
        let tors: Vec<PlanePoint> = [[0, 0, 1], [0, 1, -1], [1, 0, 1], [1, -1, 1]].iter().map(|&x| pt(x)).collect();
        let b = load_mw_basis(&g, vec![], tors, TOL).unwrap();
        assert_eq!(b.torsion().len(), 5);
        assert_eq!(b.quotient_order(5), 5);
        assert_eq!(b.quotient_order(2), 1);
    }

    #[test]
    fn equivalence_and_partition_on_37a() {
        let (g, b) = c37();
        let gen = pt([0, 0, 1]);
        assert!(!equivalent_m(&g, &b, &gen, &g.identity(), 2).unwrap());
        assert!(equivalent_m(&g, &b, &gen, &g.identity(), 1).unwrap());
        let pts = enumerate_points(g.curve(), 60).unwrap();
        let classes = partition(&g, &b, &pts, 2).unwrap();
        assert!(classes.len() <= 2);
        assert_eq!(partition(&g, &b, &pts, 1).unwrap().len(), 1);
        for c in &classes {
            assert_eq!(c.representative, c.members[0]);
        }
        // the relation is an equivalence relation matching the labels
        for p in &pts {
            assert!(equivalent_m(&g, &b, p, p, 2).unwrap());
            for q in &pts {
                let pq = equivalent_m(&g, &b, p, q, 2).unwrap();
                assert_eq!(pq, equivalent_m(&g, &b, q, p, 2).unwrap());
                let same = classes.iter().any(|c| c.members.contains(p) && c.members.contains(q));
                assert_eq!(pq, same);
            }
        }
    }

    #[test]
    fn fermat_partition_bound() {
        let (g, b) = fermat();
        let pts = enumerate_points(g.curve(), 20).unwrap();
        let classes = partition(&g, &b, &pts, 3).unwrap();
        assert!(classes.len() <= 3 && classes.len() <= 16);
        assert_eq!(classes.len(), b.quotient_order(3));
    }

    #[test]
    fn division_by_m() {
        let (g, b) = c37();
        let gen = pt([0, 0, 1]);
        assert_eq!(divide_by_m(&g, &b, &g.smul(2, &gen), 2).unwrap(), Some(gen.clone()));
        assert_eq!(divide_by_m(&g, &b, &gen, 2).unwrap(), None);
        assert_eq!(divide_by_m(&g, &b, &g.identity(), 5).unwrap(), Some(g.identity()));
        let (f, fb) = fermat();
        for x in fb.torsion() {
            let q = divide_by_m(&f, &fb, &f.smul(3, x), 3).unwrap().unwrap();
            assert!(f.torsion_order(&f.sub(&q, x)).is_some_and(|n| 3 % n == 0));
        }
    }

    #[test]
    fn xr_pairs_satisfy_identity() {
        let (g, b) = c389();
        let pts = enumerate_points(g.curve(), 40).unwrap();
        for c in partition(&g, &b, &pts, 2).unwrap() {
            let pairs = xr_pairs_for_class(&g, &b, &c.members, &c.representative, 2).unwrap();
            assert_eq!(pairs.len(), c.members.len());
            let rep = pairs.iter().find(|pr| pr.p == c.representative).unwrap();
            assert_eq!(rep.q, c.representative);
        }
        let single = xr_pairs_for_class(&g, &b, &pts[..1], &pts[0], 1).unwrap();
        assert_eq!(single[0].q, pts[0]);
    }

    #[test]
    fn hermite_basis_of_saturated_lattice() {
        // span of 2e1, 2e2 and (1,1)
        let (h, u) = hermite(vec![vec![2, 0], vec![0, 2], vec![1, 1]]);
        assert_eq!(h.len(), 2);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        assert_eq!(det.abs(), 2);
        assert_eq!(u.len(), 2);
    }

    #[test]
    fn fallback_finds_rank_zero_for_fermat() {
        let g = ctx([1, 0, 0, 0, 0, 0, 1, 0, 0, 1], [1, -1, 0]);
        let b = fallback_basis(&g, 100, TOL).unwrap();
        assert_eq!((b.rank(), b.torsion().len(), b.is_verified()), (0, 3, false));
    }

    #[test]
    fn fallback_recovers_rank_one() {
        let g = ctx([1, 0, 0, 0, 0, -1, 0, -1, -1, 0], [0, 1, 0]);
        let b = fallback_basis(&g, 100, TOL).unwrap();
        assert_eq!(b.rank(), 1);
        let (_, known) = c37();
        assert!((b.gram()[0][0] - known.gram()[0][0]).abs() < 1e-6);
    }
}
