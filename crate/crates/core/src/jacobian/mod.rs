//! The chord-tangent group law on a plane cubic with an arbitrary rational
//! base point, over `Q` and over `F_p`, plus the bridge to a Weierstrass
//! model used for heights.

mod weierstrass;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use rand::Rng;

use crate::error::{Error, Result};
use crate::forms::{eval, gradient, CubicForm};
use crate::fp;
use crate::points::PlanePoint;
use crate::ring::{Arith, Integers, PrimeField};

pub use weierstrass::{hx, WPoint, WeierstrassModel};

fn dot<A: Arith>(r: &A, a: &[A::El; 3], b: &[A::El; 3]) -> A::El {
    let t = r.add(&r.mul(&a[0], &b[0]), &r.mul(&a[1], &b[1]));
    r.add(&t, &r.mul(&a[2], &b[2]))
}

fn cross<A: Arith>(r: &A, a: &[A::El; 3], b: &[A::El; 3]) -> [A::El; 3] {
    [
        r.sub(&r.mul(&a[1], &b[2]), &r.mul(&a[2], &b[1])),
        r.sub(&r.mul(&a[2], &b[0]), &r.mul(&a[0], &b[2])),
        r.sub(&r.mul(&a[0], &b[1]), &r.mul(&a[1], &b[0])),
    ]
}

fn is_null<A: Arith>(r: &A, v: &[A::El; 3]) -> bool {
    v.iter().all(|x| r.is_zero(x))
}

/// `s*u - t*v`.
fn combine<A: Arith>(r: &A, s: &A::El, u: &[A::El; 3], t: &A::El, v: &[A::El; 3]) -> [A::El; 3] {
    [
        r.sub(&r.mul(s, &u[0]), &r.mul(t, &v[0])),
        r.sub(&r.mul(s, &u[1]), &r.mul(t, &v[1])),
        r.sub(&r.mul(s, &u[2]), &r.mul(t, &v[2])),
    ]
}

fn unit_vector<A: Arith>(r: &A, k: usize) -> [A::El; 3] {
    let mut e = [r.zero(), r.zero(), r.zero()];
    e[k] = r.from_i64(1);
    e
}

/// A smooth plane cubic over a ring with a chosen identity point. Points are
/// always held in the ring's canonical projective normalisation.
#[derive(Clone, Debug)]
pub struct CurveGroup<A: Arith> {
    ring: A,
    coeffs: [A::El; 10],
    base: [A::El; 3],
    /// Third intersection of the tangent at the base point.
    base_partner: [A::El; 3],
}

impl<A: Arith> CurveGroup<A> {
    pub fn new(ring: A, coeffs: [A::El; 10], base: [A::El; 3]) -> Self {
        let base = ring.normalize(base);
        let mut g = CurveGroup { ring, coeffs, base_partner: base.clone(), base };
        g.base_partner = g.third(&g.base, &g.base);
        g
    }

    pub fn ring(&self) -> &A {
        &self.ring
    }

    pub fn identity(&self) -> &[A::El; 3] {
        &self.base
    }

    pub fn normalize(&self, p: [A::El; 3]) -> [A::El; 3] {
        self.ring.normalize(p)
    }

    pub fn contains(&self, p: &[A::El; 3]) -> bool {
        self.ring.is_zero(&eval(&self.ring, &self.coeffs, p))
    }

    pub fn is_identity(&self, p: &[A::El; 3]) -> bool {
        *p == self.base
    }

    /// The third intersection of the line through `p` and `q` (the tangent
    /// when they coincide) with the curve.
    pub fn third(&self, p: &[A::El; 3], q: &[A::El; 3]) -> [A::El; 3] {
        let r = &self.ring;
        let c = &self.coeffs;
        let out = if p == q {
            let g = gradient(r, c, p);
            let s = (0..3)
                .map(|k| cross(r, &g, &unit_vector(r, k)))
                .find(|s| !is_null(r, s) && !is_null(r, &cross(r, s, p)))
                .expect("tangent line at a smooth point has a second point");
            let fs = eval(r, c, &s);
            let ps = dot(r, p, &gradient(r, c, &s));
            combine(r, &fs, p, &ps, &s)
        } else {
            let a = dot(r, p, &gradient(r, c, q));
            let b = dot(r, q, &gradient(r, c, p));
            combine(r, &a, p, &b, q)
        };
        assert!(!is_null(r, &out), "line contained in the cubic");
        r.normalize(out)
    }

    pub fn add(&self, p: &[A::El; 3], q: &[A::El; 3]) -> [A::El; 3] {
        self.third(&self.base, &self.third(p, q))
    }

    pub fn neg(&self, p: &[A::El; 3]) -> [A::El; 3] {
        self.third(p, &self.base_partner)
    }

    pub fn sub(&self, p: &[A::El; 3], q: &[A::El; 3]) -> [A::El; 3] {
        self.add(p, &self.neg(q))
    }

    pub fn smul(&self, m: i64, p: &[A::El; 3]) -> [A::El; 3] {
        let base = if m < 0 { self.neg(p) } else { p.clone() };
        let k = m.unsigned_abs();
        let mut acc = self.base.clone();
        for bit in (0..64 - k.leading_zeros()).rev() {
            acc = self.add(&acc, &acc);
            if (k >> bit) & 1 == 1 {
                acc = self.add(&acc, &base);
            }
        }
        acc
    }

    /// Least `n` in `1..=limit` with `n*p = O`.
    pub fn order_up_to(&self, p: &[A::El; 3], limit: u64) -> Option<u64> {
        let mut acc = p.clone();
        for n in 1..=limit {
            if self.is_identity(&acc) {
                return Some(n);
            }
            acc = self.add(&acc, p);
        }
        None
    }
}

/// A point of `C(F_p)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpPoint {
    pub p: u64,
    pub x: [u64; 3],
}

impl fmt::Display for FpPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}] mod {}", self.x[0], self.x[1], self.x[2], self.p)
    }
}

impl fmt::Debug for FpPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Reduction of a rational point modulo `p`; the primitive triple never
/// reduces to zero.
pub fn reduce_point(point: &PlanePoint, p: u64) -> FpPoint {
    let field = PrimeField::new(p);
    let x = point.coords().clone().map(|c| field.reduce(&c));
    FpPoint { p, x: field.normalize(x) }
}

/// The reduction of a curve at a good prime, with the group law based at the
/// reduction of a rational base point.
pub type FpCurve = CurveGroup<PrimeField>;

pub fn reduce_curve(f: &CubicForm, base: &PlanePoint, p: u64) -> Result<FpCurve> {
    if !f.is_good_prime(p) {
        return Err(Error::BadPrime(p));
    }
    let field = PrimeField::new(p);
    Ok(CurveGroup::new(field, f.coeffs_in(&field), reduce_point(base, p).x))
}

/// Coefficients (low to high) of `F(x0, x1, t)` as a cubic in `t`.
fn fibre_cubic(field: &PrimeField, c: &[u64; 10], x0: u64, x1: u64) -> [u64; 4] {
    let r = field;
    let m = |a: u64, b: u64| r.mul(&a, &b);
    let ad = |a: u64, b: u64| r.add(&a, &b);
    let (x00, x01, x11) = (m(x0, x0), m(x0, x1), m(x1, x1));
    [
        ad(ad(m(c[0], m(x00, x0)), m(c[1], m(x00, x1))), ad(m(c[3], m(x0, x11)), m(c[6], m(x11, x1)))),
        ad(ad(m(c[2], x00), m(c[4], x01)), m(c[7], x11)),
        ad(m(c[5], x0), m(c[8], x1)),
        c[9],
    ]
}

fn points_on_fibre<R: Rng>(field: &PrimeField, c: &[u64; 10], x0: u64, x1: u64, rng: &mut R) -> Vec<[u64; 3]> {
    let cubic = fibre_cubic(field, c, x0, x1);
    if cubic.iter().all(|&v| v == 0) {
        panic!("line contained in a smooth cubic");
    }
    fp::roots(&cubic, field.p, rng).into_iter().map(|t| field.normalize([x0, x1, t])).collect()
}

/// All points of `C(F_p)` in normalised form, sorted.
pub fn fp_points(f: &CubicForm, p: u64) -> Result<Vec<FpPoint>> {
    use rand::SeedableRng;
    if !f.is_good_prime(p) {
        return Err(Error::BadPrime(p));
    }
    let field = PrimeField::new(p);
    let c = f.coeffs_in(&field);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(p);
    let mut set = BTreeSet::new();
    if c[9] == 0 {
        set.insert([0, 0, 1]);
    }
    for x1 in 0..p {
        for x in points_on_fibre(&field, &c, 1, x1, &mut rng) {
            set.insert(x);
        }
    }
    for x in points_on_fibre(&field, &c, 0, 1, &mut rng) {
        set.insert(x);
    }
    Ok(set.into_iter().map(|x| FpPoint { p, x }).collect())
}

/// Up to `count` distinct random points of `C(F_q)` with `x0 = 1`.
pub fn random_fp_points<R: Rng>(f: &CubicForm, q: u64, count: usize, rng: &mut R) -> Result<Vec<[u64; 3]>> {
    if !f.is_good_prime(q) {
        return Err(Error::BadPrime(q));
    }
    let field = PrimeField::new(q);
    let c = f.coeffs_in(&field);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    let mut misses = 0usize;
    while out.len() < count && misses < 64 * count + 1000 {
        let x1 = rng.gen_range(0..q);
        let fibre = points_on_fibre(&field, &c, 1, x1, rng);
        if fibre.is_empty() {
            misses += 1;
            continue;
        }
        let pick = fibre[rng.gen_range(0..fibre.len())];
        if seen.insert(pick) {
            out.push(pick);
        } else {
            misses += 1;
        }
    }
    Ok(out)
}

/// A smooth plane cubic over `Q` with a rational base point, its group law
/// and its Weierstrass model.
#[derive(Clone, Debug)]
pub struct GroupContext {
    curve: CubicForm,
    base: PlanePoint,
    group: CurveGroup<Integers>,
    weierstrass: WeierstrassModel,
}

impl GroupContext {
    pub fn new(curve: CubicForm, base: PlanePoint) -> Result<Self> {
        if !curve.is_smooth() {
            return Err(Error::Singular(None));
        }
        if !base.is_on(&curve) {
            return Err(Error::NotOnCurve(base.to_string()));
        }
        let group = CurveGroup::new(Integers, curve.coeffs_in(&Integers), base.coords().clone());
        let weierstrass = WeierstrassModel::new(&curve, &base, &group.base_partner)?;
        Ok(GroupContext { curve, base, group, weierstrass })
    }

    pub fn curve(&self) -> &CubicForm {
        &self.curve
    }

    pub fn base(&self) -> &PlanePoint {
        &self.base
    }

    pub fn identity(&self) -> PlanePoint {
        self.base.clone()
    }

    pub fn weierstrass(&self) -> &WeierstrassModel {
        &self.weierstrass
    }

    pub fn group(&self) -> &CurveGroup<Integers> {
        &self.group
    }

    fn wrap(&self, x: [BigInt; 3]) -> PlanePoint {
        PlanePoint::from_normalized(x)
    }

    pub fn check(&self, p: &PlanePoint) -> Result<()> {
        if p.is_on(&self.curve) {
            Ok(())
        } else {
            Err(Error::NotOnCurve(p.to_string()))
        }
    }

    pub fn is_identity(&self, p: &PlanePoint) -> bool {
        *p == self.base
    }

    pub fn third_intersection(&self, p: &PlanePoint, q: &PlanePoint) -> PlanePoint {
        self.wrap(self.group.third(p.coords(), q.coords()))
    }

    pub fn add(&self, p: &PlanePoint, q: &PlanePoint) -> PlanePoint {
        self.wrap(self.group.add(p.coords(), q.coords()))
    }

    pub fn neg(&self, p: &PlanePoint) -> PlanePoint {
        self.wrap(self.group.neg(p.coords()))
    }

    pub fn sub(&self, p: &PlanePoint, q: &PlanePoint) -> PlanePoint {
        self.wrap(self.group.sub(p.coords(), q.coords()))
    }

    pub fn smul(&self, m: i64, p: &PlanePoint) -> PlanePoint {
        self.wrap(self.group.smul(m, p.coords()))
    }

    /// The class of `[P] - [Q]`, represented by `P ⊖ Q`.
    pub fn psi(&self, p: &PlanePoint, q: &PlanePoint) -> PlanePoint {
        self.sub(p, q)
    }

    /// Order of `p` if it is at most 12, the largest torsion order over `Q`.
    pub fn torsion_order(&self, p: &PlanePoint) -> Option<u64> {
        self.group.order_up_to(p.coords(), 12)
    }

    pub fn reduce(&self, p: u64) -> Result<FpCurve> {
        reduce_curve(&self.curve, &self.base, p)
    }

    pub fn to_weierstrass(&self, p: &PlanePoint) -> WPoint {
        self.weierstrass.forward(p.coords())
    }

    pub fn from_weierstrass(&self, w: &WPoint) -> PlanePoint {
        match w {
            WPoint::Infinity => self.base.clone(),
            _ => PlanePoint::new(self.weierstrass.backward(w)).expect("nonzero image"),
        }
    }
}
