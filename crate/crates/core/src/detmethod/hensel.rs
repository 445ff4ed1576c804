//! Implicit `p`-adic parametrisation of a residue class of `C(Q_p)`.
//!
//! Around a smooth point `Q* = (1, z1*, z2*)` of the reduction with
//! `∂F/∂y1(Q*)` a unit, the points of the class satisfy `z1 = φ(z2 - z2*)`
//! for a power series `φ` with `p`-integral coefficients. Truncated modulo
//! `(p^n, u^n)` it gives a polynomial `f_n` with `z1 ≡ f_n(z2) (mod p^n)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{inv_mod_big, valuation};
use crate::error::{Error, Result};
use crate::forms::{CubicForm, MONOMIALS};
use crate::jacobian::FpPoint;
use crate::points::PlanePoint;

/// Moves the first nonzero coordinate of the residue to the front; the
/// other two keep their order.
pub fn unit_permutation(q_star: &FpPoint) -> [usize; 3] {
    let u = q_star.x.iter().position(|&c| c != 0).expect("projective point");
    let rest: Vec<usize> = (0..3).filter(|&i| i != u).collect();
    [u, rest[0], rest[1]]
}

/// Index `i ∈ {1, 2}` (in permuted coordinates) with `∂F/∂y_i(Q*)` a unit
/// mod `p`, preferring 1.
pub fn partials_unit(f: &CubicForm, q_star: &FpPoint) -> Result<usize> {
    let p = q_star.p;
    let perm = unit_permutation(q_star);
    let field = crate::ring::PrimeField::new(p);
    let c = f.coeffs_in(&field);
    let grad = crate::forms::gradient(&field, &c, &q_star.x);
    for i in [1, 2] {
        if grad[perm[i]] != 0 {
            return Ok(i);
        }
    }
    Err(Error::Internal(format!("both partials vanish at {q_star}; the reduction is singular")))
}

/// Truncated series ring `(Z/M)[u]/(u^n)`.
#[derive(Clone, Debug)]
struct Series {
    modulus: BigInt,
    len: usize,
}

impl Series {
    fn reduce(&self, mut v: Vec<BigInt>) -> Vec<BigInt> {
        v.resize(self.len, BigInt::zero());
        v.into_iter().map(|c| c.mod_floor(&self.modulus)).collect()
    }

    fn constant(&self, c: &BigInt) -> Vec<BigInt> {
        self.reduce(vec![c.clone()])
    }

    fn add(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        self.reduce(a.iter().zip(b).map(|(x, y)| x + y).collect())
    }

    fn sub(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        self.reduce(a.iter().zip(b).map(|(x, y)| x - y).collect())
    }

    fn mul(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.len];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(self.len - i) {
                out[i + j] += x * y;
            }
        }
        self.reduce(out)
    }

    fn scale(&self, a: &[BigInt], k: &BigInt) -> Vec<BigInt> {
        self.reduce(a.iter().map(|x| x * k).collect())
    }

    /// Inverse of a series whose constant term is a unit.
    fn inv(&self, a: &[BigInt]) -> Option<Vec<BigInt>> {
        let c0 = inv_mod_big(&a[0], &self.modulus)?;
        let mut out = vec![BigInt::zero(); self.len];
        out[0] = c0.clone();
        for k in 1..self.len {
            let mut s = BigInt::zero();
            for j in 1..=k {
                s += &a[j] * &out[k - j];
            }
            out[k] = (-s * &c0).mod_floor(&self.modulus);
        }
        Some(out)
    }

    /// `(p, u)`-adic order: `min_j (j + v_p(c_j))`, a zero coefficient
    /// contributing `j + n`.
    fn order(&self, a: &[BigInt], p: u64, n: u32) -> u32 {
        a.iter()
            .enumerate()
            .map(|(j, c)| j as u32 + valuation(c, p).map_or(n, |v| v.min(n)))
            .min()
            .unwrap_or(n)
    }
}

/// The polynomial `f_n` together with the coordinate choices it refers to.
#[derive(Clone, Debug)]
pub struct HenselLift {
    pub residue: FpPoint,
    pub n: u32,
    pub modulus: BigInt,
    /// `perm[t]` is the original coordinate placed at position `t`.
    pub perm: [usize; 3],
    /// Position (1 or 2) of the coordinate solved for.
    pub solved: usize,
    /// Coefficients of `f_n` in the free coordinate, low to high, reduced
    /// into `[0, p^n)`.
    pub coeffs: Vec<BigInt>,
    /// `(p, u)`-adic order of the defect before each Newton step and after
    /// the last one.
    pub defects: Vec<u32>,
}

impl HenselLift {
    fn free(&self) -> usize {
        3 - self.solved
    }

    /// `v_p(z_solved - f_n(z_free))` at a point of the residue class;
    /// `None` when the difference is exactly zero.
    pub fn residual_valuation(&self, point: &PlanePoint) -> Result<Option<u32>> {
        let p = self.residue.p;
        if crate::jacobian::reduce_point(point, p) != self.residue {
            return Err(Error::Precondition(format!("{point} does not reduce to {}", self.residue)));
        }
        let y = self.perm.map(|i| point.coords()[i].clone());
        let d = self.coeffs.len() - 1;
        let mut pow0 = vec![BigInt::one()];
        for _ in 0..=d {
            let next = pow0.last().unwrap() * &y[0];
            pow0.push(next);
        }
        let mut num = &y[self.solved] * &pow0[d];
        let mut yf = BigInt::one();
        for (k, c) in self.coeffs.iter().enumerate() {
            num -= c * &yf * &pow0[d + 1 - k];
            yf *= &y[self.free()];
        }
        Ok(valuation(&num, p))
    }
}

/// Builds `f_n` for the residue class of `q_star`.
pub fn hensel_implicit(f: &CubicForm, q_star: &FpPoint, n: u32) -> Result<HenselLift> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let p = q_star.p;
    if !f.is_good_prime(p) {
        return Err(Error::BadPrime(p));
    }
    if f.eval_i128(q_star.x.map(|c| c as i128)).rem_euclid(p as i128) != 0 {
        return Err(Error::NotOnCurve(q_star.to_string()));
    }
    let perm = unit_permutation(q_star);
    let solved = partials_unit(f, q_star)?;
    let free = 3 - solved;
    let modulus = BigInt::from(p).pow(n);
    let ring = Series { modulus: modulus.clone(), len: n as usize };
    let z_solved = BigInt::from(q_star.x[perm[solved]]);
    let z_free = BigInt::from(q_star.x[perm[free]]);

    // g(z, u) = F(1, z, z_free* + u) in permuted coordinates, as Σ h_e(u) z^e.
    let shift = ring.reduce(vec![z_free.clone(), BigInt::one()]);
    let mut h: Vec<Vec<BigInt>> = vec![ring.constant(&BigInt::zero()); 4];
    for (ex, &c) in MONOMIALS.iter().zip(f.coeffs()) {
        if c == 0 {
            continue;
        }
        let (e_solved, e_free) = (ex[perm[solved]] as usize, ex[perm[free]]);
        let mut term = ring.constant(&BigInt::from(c));
        for _ in 0..e_free {
            term = ring.mul(&term, &shift);
        }
        h[e_solved] = ring.add(&h[e_solved], &term);
    }
    let eval = |phi: &[BigInt]| -> (Vec<BigInt>, Vec<BigInt>) {
        let mut g = h[3].clone();
        let mut dg = ring.scale(&h[3], &BigInt::from(3));
        for e in (0..3).rev() {
            g = ring.add(&ring.mul(&g, phi), &h[e]);
            if e > 0 {
                dg = ring.add(&ring.mul(&dg, phi), &ring.scale(&h[e], &BigInt::from(e)));
            }
        }
        (g, dg)
    };

    let mut phi = ring.constant(&z_solved);
    let mut defects = Vec::new();
    let mut step = 0u32;
    loop {
        let (g, dg) = eval(&phi);
        let order = ring.order(&g, p, n);
        let expected = (1u64 << step.min(40)).min(n as u64) as u32;
        if order < expected {
            return Err(Error::Internal(format!("Newton step {step}: defect order {order} < {expected}")));
        }
        defects.push(order);
        if (1u64 << step.min(40)) >= 2 * n as u64 - 1 {
            break;
        }
        let inv = ring
            .inv(&dg)
            .ok_or_else(|| Error::Internal(format!("derivative is not a unit at {q_star}")))?;
        phi = ring.sub(&phi, &ring.mul(&g, &inv));
        step += 1;
    }

    // φ(z - z*) expanded in powers of z.
    let len = n as usize;
    let mut coeffs = vec![BigInt::zero(); len];
    let neg = -z_free;
    let mut binom = vec![BigInt::one(); len];
    for (j, a) in phi.iter().enumerate() {
        // binom[i] = C(j, i)
        if j > 0 {
            for i in (1..j).rev() {
                binom[i] = &binom[i] + &binom[i - 1];
            }
            binom[j] = BigInt::one();
        }
        let mut pw = BigInt::one();
        for i in (0..=j).rev() {
            coeffs[i] += a * &binom[i] * &pw;
            pw *= &neg;
        }
    }
    let coeffs = coeffs.into_iter().map(|c| c.mod_floor(&modulus)).collect();
    Ok(HenselLift { residue: *q_star, n, modulus, perm, solved, coeffs, defects })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobian::{reduce_point, GroupContext};

    fn c37() -> GroupContext {
        GroupContext::new(
            CubicForm::new([1, 0, 0, 0, 0, -1, 0, -1, -1, 0]).unwrap(),
            PlanePoint::from_i64([0, 1, 0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn partials_on_fermat_mod_5() {
        let f = CubicForm::new([1, 0, 0, 0, 0, 0, 1, 0, 0, 1]).unwrap();
        let q = FpPoint { p: 5, x: [1, 4, 0] };
        // ∂/∂x1 = 3·16 ≢ 0 mod 5
        assert_eq!(partials_unit(&f, &q).unwrap(), 1);
        let q = FpPoint { p: 5, x: [1, 0, 4] };
        assert_eq!(partials_unit(&f, &q).unwrap(), 2);
    }

    #[test]
    fn level_one_is_the_residue() {
        let ctx = c37();
        let q = reduce_point(&PlanePoint::from_i64([0, 0, 1]).unwrap(), 7);
        let lift = hensel_implicit(ctx.curve(), &q, 1).unwrap();
        assert_eq!(lift.coeffs.len(), 1);
        assert_eq!(lift.coeffs[0], BigInt::from(q.x[lift.perm[lift.solved]]));
    }

    #[test]
    fn class_members_satisfy_the_congruence() {
        let ctx = c37();
        let g = PlanePoint::from_i64([0, 0, 1]).unwrap();
        for p in [5u64, 7, 11] {
            let k = ctx.reduce(p).unwrap().order_up_to(&reduce_point(&g, p).x, 2 * p + 2).unwrap() as i64;
            let q0 = ctx.smul(3, &g);
            let star = reduce_point(&q0, p);
            for n in [2u32, 4, 6] {
                let lift = hensel_implicit(ctx.curve(), &star, n).unwrap();
                for (i, d) in lift.defects.iter().enumerate() {
                    assert!(*d >= (1u32 << i).min(n));
                }
                for j in -4..=4 {
                    let q = ctx.add(&q0, &ctx.smul(j * k, &g));
                    let v = lift.residual_valuation(&q).unwrap();
                    assert!(v.is_none_or(|v| v >= n), "p={p} n={n} j={j} v={v:?}");
                }
            }
        }
    }

    #[test]
    fn rejects_points_outside_the_class() {
        let ctx = c37();
        let q = reduce_point(&PlanePoint::from_i64([0, 0, 1]).unwrap(), 7);
        let lift = hensel_implicit(ctx.curve(), &q, 3).unwrap();
        assert!(lift.residual_valuation(&PlanePoint::from_i64([0, 1, 0]).unwrap()).is_err());
        assert!(hensel_implicit(ctx.curve(), &FpPoint { p: 7, x: [1, 1, 1] }, 3).is_err());
    }
}
