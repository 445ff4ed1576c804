//! Short Weierstrass model `y^2 = x^3 + αx + β` of a plane cubic with a
//! rational point, and the birational maps in both directions.
//!
//! Coordinates are changed so that `Q = O∘O` sits at `[0:0:1]` and the
//! tangent at `O` is `Y = 0`. Lines `X = τY` through `Q` cut out a quadratic
//! whose discriminant `e(τ)` is a cubic in `τ`; `σ^2 = e(τ)` is then moved to
//! short form by scaling and completing the cube.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::forms::{gradient, CubicForm};
use crate::ring::{normalize_triple, Integers};
use crate::ternary::TernaryPoly;

type Q = BigRational;

fn rat(x: &BigInt) -> Q {
    Q::from_integer(x.clone())
}

fn int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Polynomial in one variable, coefficients low to high.
fn poly_eval(c: &[BigInt], t: &Q) -> Q {
    c.iter().rev().fold(Q::zero(), |acc, ci| acc * t + rat(ci))
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn mat_vec(m: &[[BigInt; 3]; 3], v: &[BigInt; 3]) -> [BigInt; 3] {
    [0, 1, 2].map(|i| &m[i][0] * &v[0] + &m[i][1] * &v[1] + &m[i][2] * &v[2])
}

fn adjugate(m: &[[BigInt; 3]; 3]) -> [[BigInt; 3]; 3] {
    let c = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        &m[r0][c0] * &m[r1][c1] - &m[r0][c1] * &m[r1][c0]
    };
    // adj[i][j] = cofactor[j][i]
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| c(j, i)))
}

fn cross(a: &[BigInt; 3], b: &[BigInt; 3]) -> [BigInt; 3] {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

/// A point of the Weierstrass model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WPoint {
    Infinity,
    Affine(Q, Q),
}

impl WPoint {
    pub fn x(&self) -> Option<&Q> {
        match self {
            WPoint::Infinity => None,
            WPoint::Affine(x, _) => Some(x),
        }
    }
}

/// `log max(|num|, |den|)` of the x-coordinate; 0 at infinity by convention.
pub fn hx(p: &WPoint) -> f64 {
    match p {
        WPoint::Infinity => 0.0,
        WPoint::Affine(x, _) => rational_log_height(x),
    }
}

pub(crate) fn rational_log_height(x: &Q) -> f64 {
    let m = x.numer().abs().max(x.denom().abs());
    crate::arith::ln_abs(&m)
}

#[derive(Clone, Debug)]
pub struct WeierstrassModel {
    alpha: Q,
    beta: Q,
    base: [BigInt; 3],
    to_new: [[BigInt; 3]; 3],
    to_old: [[BigInt; 3]; 3],
    u1: Vec<BigInt>,
    u2: Vec<BigInt>,
    u3: Vec<BigInt>,
    e: [BigInt; 4],
}

impl WeierstrassModel {
    /// `partner` is the third intersection of the tangent at `base`.
    pub(crate) fn new(curve: &CubicForm, base: &crate::points::PlanePoint, partner: &[BigInt; 3]) -> Result<Self> {
        let o = base.coords().clone();
        let coeffs = curve.coeffs_in(&Integers);
        let tangent = gradient(&Integers, &coeffs, &o);
        let j = partner.iter().position(|c| !c.is_zero()).unwrap();
        let mut unit = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
        let line = (0..3)
            .map(|k| {
                unit = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
                unit[k] = BigInt::one();
                cross(partner, &unit)
            })
            .find(|l| cross(l, &tangent).iter().any(|c| !c.is_zero()))
            .ok_or_else(|| Error::Internal("no line through O∘O independent of the tangent".into()))?;
        let mut ej = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
        ej[j] = BigInt::one();
        let to_new = [line, tangent, ej];
        let to_old = adjugate(&to_new);

        let g = curve.to_poly().substitute_linear(&to_old);
        if !g.coeff([0, 0, 3]).is_zero() {
            return Err(Error::Internal("O∘O does not map to [0:0:1]".into()));
        }
        let part = |g: &TernaryPoly, d: u32| -> Vec<BigInt> { (0..=d).map(|i| g.coeff([i, d - i, 3 - d])).collect() };
        let (u1, u2, u3) = (part(&g, 1), part(&g, 2), part(&g, 3));
        let sq = poly_mul(&u2, &u2);
        let prod = poly_mul(&u1, &u3);
        let quartic: Vec<BigInt> = (0..5).map(|i| &sq[i] - BigInt::from(4) * &prod[i]).collect();
        if !quartic[4].is_zero() || quartic[3].is_zero() {
            return Err(Error::Internal("discriminant of the line pencil is not a cubic".into()));
        }
        let e = [quartic[0].clone(), quartic[1].clone(), quartic[2].clone(), quartic[3].clone()];
        let (e0, e1, e2, e3) = (rat(&e[0]), rat(&e[1]), rat(&e[2]), rat(&e[3]));
        let alpha = &e1 * &e3 - &e2 * &e2 / int(3);
        let beta = int(2) * &e2 * &e2 * &e2 / int(27) - &e1 * &e3 * &e2 / int(3) + &e0 * &e3 * &e3;
        let model = WeierstrassModel { alpha, beta, base: o, to_new, to_old, u1, u2, u3, e };
        if model.delta().is_zero() {
            return Err(Error::Internal("Weierstrass model is singular".into()));
        }
        Ok(model)
    }

    /// A model with no plane curve attached; only the arithmetic on
    /// `y^2 = x^3 + αx + β` is usable.
    pub fn bare(alpha: Q, beta: Q) -> Self {
        let z = || [BigInt::zero(), BigInt::zero(), BigInt::zero()];
        WeierstrassModel {
            alpha,
            beta,
            base: [BigInt::zero(), BigInt::one(), BigInt::zero()],
            to_new: [z(), z(), z()],
            to_old: [z(), z(), z()],
            u1: Vec::new(),
            u2: Vec::new(),
            u3: Vec::new(),
            e: [BigInt::zero(), BigInt::zero(), BigInt::zero(), BigInt::one()],
        }
    }

    pub fn alpha(&self) -> &Q {
        &self.alpha
    }

    pub fn beta(&self) -> &Q {
        &self.beta
    }

    /// `4α^3 + 27β^2`.
    pub fn delta(&self) -> Q {
        int(4) * &self.alpha * &self.alpha * &self.alpha + int(27) * &self.beta * &self.beta
    }

    /// Discriminant `-16(4α^3 + 27β^2)`.
    pub fn discriminant(&self) -> Q {
        int(-16) * self.delta()
    }

    pub fn j_invariant(&self) -> Q {
        int(1728) * int(4) * &self.alpha * &self.alpha * &self.alpha / self.delta()
    }

    /// Smallest `u > 0` (among divisors of the lcm of denominators) making
    /// `u^4 α` and `u^6 β` integers, with those integers.
    pub fn integral_scaling(&self) -> (BigInt, BigInt, BigInt) {
        let l = self.alpha.denom().lcm(self.beta.denom());
        let mut u = BigInt::one();
        // smallest u with denom(α) | u^4 and denom(β) | u^6: build u from l's primes
        for p in crate::arith::prime_divisors(&l) {
            let p = BigInt::from(p);
            let va = multiplicity(self.alpha.denom(), &p);
            let vb = multiplicity(self.beta.denom(), &p);
            let k = va.div_ceil(4).max(vb.div_ceil(6));
            for _ in 0..k {
                u *= &p;
            }
        }
        let u2 = &u * &u;
        let u4 = &u2 * &u2;
        let a = &self.alpha * rat(&u4);
        let b = &self.beta * rat(&(&u4 * &u2));
        debug_assert!(a.is_integer() && b.is_integer());
        (u, a.to_integer(), b.to_integer())
    }

    /// `h([1, α, β])`.
    pub fn projective_height(&self) -> f64 {
        let l = self.alpha.denom().lcm(self.beta.denom());
        let v = normalize_triple([
            l.clone(),
            (&self.alpha * rat(&l)).to_integer(),
            (&self.beta * rat(&l)).to_integer(),
        ]);
        let m = v.iter().map(|x| x.abs()).max().unwrap();
        crate::arith::ln_abs(&m)
    }

    pub fn contains(&self, p: &WPoint) -> bool {
        match p {
            WPoint::Infinity => true,
            WPoint::Affine(x, y) => y * y == x * x * x + &self.alpha * x + &self.beta,
        }
    }

    /// The image of a point of the plane cubic.
    pub fn forward(&self, p: &[BigInt; 3]) -> WPoint {
        if normalize_triple(p.clone()) == self.base {
            return WPoint::Infinity;
        }
        let n = mat_vec(&self.to_new, p);
        let (tau, sigma) = if !n[1].is_zero() {
            let tau = Q::new(n[0].clone(), n[1].clone());
            let r = Q::new(n[2].clone(), n[1].clone());
            let s = -(poly_eval(&self.u2, &tau) + int(2) * poly_eval(&self.u1, &tau) * r);
            (tau, s)
        } else {
            // The only point other than O on the tangent at O is O∘O.
            debug_assert!(n[0].is_zero());
            let tau = Q::new(-self.u1[0].clone(), self.u1[1].clone());
            let s = poly_eval(&self.u2, &tau);
            (tau, s)
        };
        let e2 = rat(&self.e[2]);
        let e3 = rat(&self.e[3]);
        WPoint::Affine(&e3 * tau + e2 / int(3), e3 * sigma)
    }

    /// A homogeneous integer triple for the preimage of an affine point.
    pub fn backward(&self, w: &WPoint) -> [BigInt; 3] {
        let (x, y) = match w {
            WPoint::Infinity => return self.base.clone(),
            WPoint::Affine(x, y) => (x, y),
        };
        let e3 = rat(&self.e[3]);
        let tau = (x - rat(&self.e[2]) / int(3)) / &e3;
        let sigma = y / &e3;
        let (v1, v2, v3) = (poly_eval(&self.u1, &tau), poly_eval(&self.u2, &tau), poly_eval(&self.u3, &tau));
        let new: [Q; 3] = if !v1.is_zero() {
            [tau.clone(), Q::one(), -(&sigma + &v2) / (int(2) * v1)]
        } else if sigma == v2 {
            [Q::zero(), Q::zero(), Q::one()]
        } else {
            [tau.clone(), Q::one(), -v3 / v2]
        };
        let den = new.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints = new.map(|c| (c * rat(&den)).to_integer());
        normalize_triple(mat_vec(&self.to_old, &ints))
    }

    pub fn neg(&self, p: &WPoint) -> WPoint {
        match p {
            WPoint::Infinity => WPoint::Infinity,
            WPoint::Affine(x, y) => WPoint::Affine(x.clone(), -y.clone()),
        }
    }

    pub fn add(&self, p: &WPoint, q: &WPoint) -> WPoint {
        let (x1, y1, x2, y2) = match (p, q) {
            (WPoint::Infinity, _) => return q.clone(),
            (_, WPoint::Infinity) => return p.clone(),
            (WPoint::Affine(a, b), WPoint::Affine(c, d)) => (a, b, c, d),
        };
        let lambda = if x1 == x2 {
            if (y1 + y2).is_zero() {
                return WPoint::Infinity;
            }
            (int(3) * x1 * x1 + &self.alpha) / (int(2) * y1)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let x3 = &lambda * &lambda - x1 - x2;
        let y3 = lambda * (x1 - &x3) - y1;
        WPoint::Affine(x3, y3)
    }

    pub fn double(&self, p: &WPoint) -> WPoint {
        self.add(p, p)
    }
}

fn multiplicity(n: &BigInt, p: &BigInt) -> u32 {
    let mut v = 0;
    let mut m = n.clone();
    while (&m % p).is_zero() {
        m /= p;
        v += 1;
    }
    v
}
