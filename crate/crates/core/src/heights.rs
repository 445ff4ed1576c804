//! Naive, x-coordinate and canonical heights, the height pairing, and the
//! empirical audit of the crude bound on `H(Q)` for pairs on `X_R`.
//!
//! The canonical height is `lim h_x(2^n P) / 4^n`. Writing `x(2^k P) = a_k/b_k`
//! on an integral model, each doubling is a pair of binary quartics
//! `(A, D)` and
//!
//! `h_x(2^{k+1} P) = 4 h_x(2^k P) + Φ(a_k : b_k) - log gcd(A(a_k,b_k), D(a_k,b_k))`,
//!
//! where `Φ(u : v) = log max(|A(u,v)|, |D(u,v)|)` for `max(|u|,|v|) = 1`. The
//! gcd always divides the resultant `R` of `A` and `D`, so it is computed
//! exactly from residues of `a_k, b_k` modulo a power of `R`, while `Φ` only
//! needs the real direction of `(a_k, b_k)`. Neither ever needs the full
//! exponentially long numerators.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{ln_abs, unit_pair};
use crate::descent::XRPair;
use crate::error::{Error, Result};
use crate::jacobian::{hx, GroupContext, WPoint, WeierstrassModel};
use crate::linalg::{bareiss_det, rref};
use crate::points::PlanePoint;

pub const DEFAULT_TOL: f64 = 1e-8;
const MAX_DOUBLINGS: u32 = 40;

/// Heights of one point.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightReport {
    pub h_naive: f64,
    pub h_x: f64,
    pub h_hat: f64,
    pub tol: f64,
}

impl HeightReport {
    pub fn csv_header() -> &'static str {
        "h_naive,h_x,h_hat,tol"
    }

    pub fn csv_row(&self) -> String {
        format!("{:.12},{:.12},{:.12},{:e}", self.h_naive, self.h_x, self.h_hat, self.tol)
    }
}

/// Coefficients of a binary form, `c[i]` on `a^{deg-i} b^i`.
type BinaryForm = Vec<BigInt>;

fn eval_binary(c: &[f64], u: f64, v: f64) -> f64 {
    let deg = c.len() - 1;
    if v == 0.0 {
        return c[0] * u.powi(deg as i32);
    }
    // sum c_i u^{deg-i} v^i
    let mut acc = 0.0;
    let mut vp = 1.0;
    for (i, &ci) in c.iter().enumerate() {
        acc += ci * u.powi((deg - i) as i32) * vp;
        vp *= v;
    }
    acc
}

fn eval_binary_mod(c: &[BigInt], a: &BigInt, b: &BigInt, m: &BigInt) -> BigInt {
    let deg = c.len() - 1;
    let mut apow = vec![BigInt::one(); deg + 1];
    let mut bpow = vec![BigInt::one(); deg + 1];
    for i in 1..=deg {
        apow[i] = (&apow[i - 1] * a).mod_floor(m);
        bpow[i] = (&bpow[i - 1] * b).mod_floor(m);
    }
    let mut acc = BigInt::zero();
    for (i, ci) in c.iter().enumerate() {
        acc += ci * &apow[deg - i] * &bpow[i];
    }
    acc.mod_floor(m)
}

/// Sylvester resultant of two binary forms of equal degree `d`.
fn binary_resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    sylvester_matrix(f, g).map(|m| bareiss_det(&m)).unwrap()
}

fn sylvester_matrix(f: &[BigInt], g: &[BigInt]) -> Option<Vec<Vec<BigInt>>> {
    let d = f.len() - 1;
    let e = g.len() - 1;
    let n = d + e;
    let mut rows = Vec::with_capacity(n);
    for s in 0..e {
        let mut r = vec![BigInt::zero(); n];
        for (i, c) in f.iter().enumerate() {
            r[s + i] = c.clone();
        }
        rows.push(r);
    }
    for s in 0..d {
        let mut r = vec![BigInt::zero(); n];
        for (i, c) in g.iter().enumerate() {
            r[s + i] = c.clone();
        }
        rows.push(r);
    }
    Some(rows)
}

/// Forms `U, V` of degree `d - 1` with `U f + V g = R * target`, where
/// `target` is `a^{2d-1}` (`which = 0`) or `b^{2d-1}` (`which = 1`).
/// Returns `‖U‖_1 + ‖V‖_1` as a float.
fn bezout_weight(f: &[BigInt], g: &[BigInt], res: &BigInt, which: usize) -> f64 {
    let d = f.len() - 1;
    let n = 2 * d;
    // Unknown vector: u_0..u_{d-1}, v_0..v_{d-1}. Column of the product
    // coefficient k (on a^{n-1-k} b^k) receives u_s f_i for s + i = k.
    let mut aug: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n + 1]; n];
    for s in 0..d {
        for (i, c) in f.iter().enumerate() {
            aug[s + i][s] = c.clone();
        }
        for (i, c) in g.iter().enumerate() {
            aug[s + i][d + s] = c.clone();
        }
    }
    let target_row = if which == 0 { 0 } else { n - 1 };
    aug[target_row][n] = res.clone();
    let (rows, pivots) = rref(&aug, n + 1);
    assert_eq!(pivots.len(), n, "resultant is nonzero so the system is regular");
    rows.iter()
        .map(|r| {
            let x: &BigRational = &r[n];
            x.numer().abs().to_f64().unwrap_or(f64::INFINITY) / x.denom().to_f64().unwrap_or(1.0)
        })
        .sum()
}

/// The doubling map on an integral short Weierstrass model.
#[derive(Debug, Clone)]
pub struct DoublingMap {
    num: BinaryForm,
    den: BinaryForm,
    num_f: Vec<f64>,
    den_f: Vec<f64>,
    resultant: BigInt,
    /// Upper bound for `|Φ|` over the unit square boundary.
    phi_bound: f64,
}

impl DoublingMap {
    pub fn new(alpha: &BigInt, beta: &BigInt) -> Self {
        let two = BigInt::from(2);
        let four = BigInt::from(4);
        let eight = BigInt::from(8);
        let num = vec![BigInt::one(), BigInt::zero(), -(&two * alpha), -(&eight * beta), alpha * alpha];
        let den = vec![BigInt::zero(), four.clone(), BigInt::zero(), &four * alpha, &four * beta];
        let resultant = binary_resultant(&num, &den).abs();
        assert!(!resultant.is_zero(), "singular model");
        let to_f = |c: &BinaryForm| -> Vec<f64> { c.iter().map(|x| x.to_f64().unwrap()).collect() };
        let (num_f, den_f) = (to_f(&num), to_f(&den));
        let l1 = |c: &[f64]| c.iter().map(|x| x.abs()).sum::<f64>();
        let phi_hi = l1(&num_f).max(l1(&den_f)).ln();
        let weight = bezout_weight(&num, &den, &resultant, 0).max(bezout_weight(&num, &den, &resultant, 1));
        let phi_lo = ln_abs(&resultant) - weight.ln();
        let phi_bound = phi_hi.abs().max(phi_lo.abs());
        DoublingMap { num, den, num_f, den_f, resultant, phi_bound }
    }

    pub fn resultant(&self) -> &BigInt {
        &self.resultant
    }

    fn phi(&self, u: f64, v: f64) -> (f64, f64, f64) {
        let a = eval_binary(&self.num_f, u, v);
        let d = eval_binary(&self.den_f, u, v);
        let m = a.abs().max(d.abs());
        (m.ln(), a / m, d / m)
    }

    /// Number of doublings after which the neglected tail is below `tol / 4`.
    pub fn doublings_for(&self, tol: f64) -> Result<u32> {
        let c = self.phi_bound + ln_abs(&self.resultant);
        let mut n = 0;
        while c / (3.0 * 4f64.powi(n as i32)) > tol / 4.0 {
            n += 1;
            if n > MAX_DOUBLINGS {
                return Err(Error::NonConvergence(format!(
                    "tail bound {c:.3} needs more than {MAX_DOUBLINGS} doublings for tol {tol:e}"
                )));
            }
        }
        Ok(n)
    }

    /// Partial sums `h_x(2^k P) / 4^k` for `k = 0..=n`, starting from
    /// `x = a/b` in lowest terms.
    pub fn partial_sums(&self, a: &BigInt, b: &BigInt, n: u32) -> Vec<f64> {
        let r = &self.resultant;
        let mut modulus = num_traits::pow::pow(r.clone(), n as usize + 1);
        let (mut am, mut bm) = (a.mod_floor(&modulus), b.mod_floor(&modulus));
        let (mut u, mut v) = unit_pair(a, b);
        let h0 = ln_abs(&a.abs().max(b.abs()));
        let mut sums = vec![h0];
        let mut acc = h0;
        let mut weight = 0.25;
        for _ in 0..n {
            let (phi, nu, nv) = self.phi(u, v);
            let big_a = eval_binary_mod(&self.num, &am, &bm, &modulus);
            let big_d = eval_binary_mod(&self.den, &am, &bm, &modulus);
            let g = big_a.gcd(&big_d).gcd(r);
            acc += weight * (phi - ln_abs(&g));
            sums.push(acc);
            weight *= 0.25;
            let next = &modulus / r;
            am = (big_a / &g).mod_floor(&next);
            bm = (big_d / &g).mod_floor(&next);
            modulus = next;
            u = nu;
            v = nv;
        }
        sums
    }
}

/// `x` on the integral model `u^4 α, u^6 β` as a reduced fraction.
fn scaled_x(x: &BigRational, u: &BigInt) -> (BigInt, BigInt) {
    let s = x * BigRational::from_integer(u * u);
    (s.numer().clone(), s.denom().clone())
}

/// Canonical height of a point of the Weierstrass model.
pub fn canonical_height_w(model: &WeierstrassModel, w: &WPoint, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let mut acc = w.clone();
    for _ in 1..=12 {
        if acc == WPoint::Infinity {
            return Ok(0.0);
        }
        acc = model.add(&acc, w);
    }
    let (u, alpha, beta) = model.integral_scaling();
    let map = DoublingMap::new(&alpha, &beta);
    let n = map.doublings_for(tol)?;
    let (a, b) = scaled_x(w.x().unwrap(), &u);
    let sums = map.partial_sums(&a, &b, n);
    let h = *sums.last().unwrap();
    if !h.is_finite() {
        return Err(Error::NonConvergence(format!("non-finite height estimate {h}")));
    }
    Ok(h.max(0.0))
}

pub fn canonical_height(ctx: &GroupContext, p: &PlanePoint, tol: f64) -> Result<f64> {
    ctx.check(p)?;
    if ctx.torsion_order(p).is_some() {
        return Ok(0.0);
    }
    canonical_height_w(ctx.weierstrass(), &ctx.to_weierstrass(p), tol)
}

pub fn height_report(ctx: &GroupContext, p: &PlanePoint, tol: f64) -> Result<HeightReport> {
    let w = ctx.to_weierstrass(p);
    Ok(HeightReport { h_naive: p.log_height(), h_x: hx(&w), h_hat: canonical_height(ctx, p, tol)?, tol })
}

/// `<P, Q> = (ĥ(P ⊕ Q) - ĥ(P) - ĥ(Q)) / 2`.
pub fn height_pairing(ctx: &GroupContext, p: &PlanePoint, q: &PlanePoint, tol: f64) -> Result<f64> {
    let hp = canonical_height(ctx, p, tol)?;
    let hq = canonical_height(ctx, q, tol)?;
    let hs = canonical_height(ctx, &ctx.add(p, q), tol)?;
    Ok((hs - hp - hq) / 2.0)
}

/// Gram matrix of the height pairing; symmetric by construction.
pub fn gram(ctx: &GroupContext, points: &[PlanePoint], tol: f64) -> Result<Vec<Vec<f64>>> {
    let n = points.len();
    let diag: Vec<f64> = points.par_iter().map(|p| canonical_height(ctx, p, tol)).collect::<Result<_>>()?;
    let idx: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let off: Vec<f64> = idx
        .par_iter()
        .map(|&(i, j)| {
            canonical_height(ctx, &ctx.add(&points[i], &points[j]), tol).map(|h| (h - diag[i] - diag[j]) / 2.0)
        })
        .collect::<Result<_>>()?;
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        g[i][i] = diag[i];
    }
    for (&(i, j), v) in idx.iter().zip(off) {
        g[i][j] = v;
        g[j][i] = v;
    }
    Ok(g)
}

/// `max log H(Q) / log B` over pairs on `X_R` with `H(P), H(R) <= B`.
pub fn crude_height_audit(ctx: &GroupContext, pairs: &[XRPair], bound: u64) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Precondition("no pairs to audit".into()));
    }
    if bound < 2 {
        return Err(Error::Precondition("B must be at least 2".into()));
    }
    let b = BigInt::from(bound);
    let lb = (bound as f64).ln();
    let mut worst: f64 = 0.0;
    for pair in pairs {
        pair.verify(ctx)?;
        if pair.p.height() > b || pair.r.height() > b {
            return Err(Error::Precondition(format!("pair ({}, {}) exceeds height bound {bound}", pair.p, pair.r)));
        }
        worst = worst.max(pair.q.log_height() / lb);
    }
    Ok(worst)
}

/// `max |ĥ(P) - h_x(P)| / (1 + log ‖F‖)` over the given points.
pub fn comparison_constant(ctx: &GroupContext, points: &[PlanePoint], tol: f64) -> Result<f64> {
    let scale = 1.0 + (ctx.curve().coeff_height() as f64).ln();
    let mut worst: f64 = 0.0;
    for p in points {
        let r = height_report(ctx, p, tol)?;
        worst = worst.max((r.h_hat - r.h_x).abs() / scale);
    }
    Ok(worst)
}
