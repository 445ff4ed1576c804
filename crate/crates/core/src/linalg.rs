//! Exact linear algebra: fraction-free determinants, rational kernels and
//! rank over `F_p`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{mul_mod, pow_mod};

/// Determinant of a square integer matrix by Bareiss fraction-free
/// elimination. Every intermediate value is an exact minor.
pub fn bareiss_det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    assert!(m.iter().all(|r| r.len() == n), "bareiss_det: matrix not square");
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Reduced row echelon form over `Q`. Returns the reduced rows and the pivot
/// columns in increasing order.
pub fn rref(m: &[Vec<BigInt>], ncols: usize) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == a.len() {
            break;
        }
        let Some(p) = (row..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for x in a[row].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..a.len() {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in col..ncols {
                    let d = &f * &a[row][j];
                    a[i][j] -= d;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    a.truncate(row);
    (a, pivots)
}

pub fn rank(m: &[Vec<BigInt>], ncols: usize) -> usize {
    rref(m, ncols).1.len()
}

/// The kernel vector attached to the first free column of the RREF, cleared
/// to a primitive integer vector whose first nonzero entry is positive.
/// `None` when the matrix has full column rank.
pub fn first_kernel_vector(m: &[Vec<BigInt>], ncols: usize) -> Option<Vec<BigInt>> {
    let (r, pivots) = rref(m, ncols);
    let free = (0..ncols).find(|c| !pivots.contains(c))?;
    let mut v = vec![BigRational::zero(); ncols];
    v[free] = BigRational::one();
    for (row, &pc) in r.iter().zip(&pivots) {
        if pc < free {
            v[pc] = -row[free].clone();
        }
    }
    Some(primitive_integer_vector(&v))
}

/// Scales a nonzero rational vector to a primitive integer vector with
/// positive leading entry.
pub fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let den = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&den / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let lead_neg = ints.iter().find(|x| !x.is_zero()).map(|x| x.is_negative()).unwrap_or(false);
    ints.into_iter()
        .map(|x| {
            let y = x / &g;
            if lead_neg {
                -y
            } else {
                y
            }
        })
        .collect()
}

/// Greedy pivot columns over `F_p`: column `j` is selected iff it is not in
/// the span of the previously selected columns.
pub fn pivot_columns_mod_p(rows: &[Vec<u64>], ncols: usize, p: u64) -> Vec<usize> {
    let mut a: Vec<Vec<u64>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == a.len() {
            break;
        }
        let Some(pr) = (row..a.len()).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(row, pr);
        let inv = pow_mod(a[row][col], p - 2, p);
        for x in a[row][col..].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let pivot_row = a[row].clone();
        for (i, r) in a.iter_mut().enumerate() {
            if i != row && r[col] != 0 {
                let f = r[col];
                for j in col..ncols {
                    r[j] = (r[j] + p - mul_mod(f, pivot_row[j], p)) % p;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn int_matrix(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}
