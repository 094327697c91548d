//! The lattice generated by `e_1, ..., e_s` and `alpha' = (alpha, 1)`.
//!
//! Lattice elements are stored by their exact integer coordinates `(a, n)`,
//! standing for `(n*alpha_1 + a_1, ..., n*alpha_s + a_s, n)`. Real
//! embeddings are always recomputed from those integers.

use std::fmt;

use log::warn;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::real::{self, check_precision, dist_to_integer, parse_real, tolerance};

/// The rotation `T(x) = x + alpha` on the `s`-torus, at a fixed working precision.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationContext {
    alpha: Vec<Float>,
    precision: u32,
}

impl RotationContext {
    /// `alpha` must be non-empty with every component in `[0, 1)`.
    ///
    /// Total irrationality is assumed, not checked; see
    /// [`RotationContext::integer_relation`] for an advisory test.
    pub fn new(alpha: Vec<Float>, precision: u32) -> Result<Self> {
        check_precision(precision)?;
        if alpha.is_empty() {
            return Err(Error::InvalidInput("rotation vector is empty".into()));
        }
        let mut alpha = alpha;
        for (i, a) in alpha.iter_mut().enumerate() {
            if *a < 0 || *a >= 1 {
                return Err(Error::InvalidInput(format!(
                    "alpha_{} = {} is outside [0, 1)",
                    i + 1,
                    real::format_real(a)
                )));
            }
            a.set_prec(precision);
        }
        Ok(RotationContext { alpha, precision })
    }

    pub fn from_decimal<S: AsRef<str>>(alpha: &[S], precision: u32) -> Result<Self> {
        check_precision(precision)?;
        let parsed = alpha
            .iter()
            .map(|s| parse_real(s.as_ref(), precision))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parsed, precision)
    }

    /// Torus dimension `s`.
    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[Float] {
        &self.alpha
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Boundary tolerance `2^(-P/2)`.
    pub fn tolerance(&self) -> Float {
        tolerance(self.precision)
    }

    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        Self::new(self.alpha.clone(), precision)
    }

    /// Advisory search for a relation `c . alpha = 0 (mod 1)` with integer
    /// coefficients `|c_i| <= bound`, not all zero.
    ///
    /// Uses a meet-in-the-middle scan in `f64`, confirming hits at working
    /// precision. For large `s` the bound is reduced to keep each half of the
    /// search below a few million entries. Logs a warning on a hit; never
    /// rejects the input.
    pub fn integer_relation(&self, bound: i64) -> Option<Vec<i64>> {
        const HALF_CAP: f64 = 4.0e6;
        let s = self.dim();
        let left = s.div_ceil(2);
        let mut bound = bound.max(1);
        let side = |b: i64| (2 * b + 1) as f64;
        while side(bound).powi(left as i32) > HALF_CAP && bound > 1 {
            bound = ((HALF_CAP.powf(1.0 / left as f64) - 1.0) / 2.0).floor() as i64;
        }
        let alpha: Vec<f64> = self.alpha.iter().map(|a| a.to_f64()).collect();
        let (lo, hi) = alpha.split_at(left);

        let combos = |coords: &[f64]| -> Vec<(f64, Vec<i64>)> {
            let mut out = vec![(0.0, Vec::new())];
            for &a in coords {
                let mut next = Vec::with_capacity(out.len() * (2 * bound as usize + 1));
                for (v, c) in &out {
                    for k in -bound..=bound {
                        let mut cc = c.clone();
                        cc.push(k);
                        next.push(((v + k as f64 * a).rem_euclid(1.0), cc));
                    }
                }
                out = next;
            }
            out
        };
        let mut table = combos(lo);
        table.sort_by(|x, y| x.0.total_cmp(&y.0));
        let keys: Vec<f64> = table.iter().map(|e| e.0).collect();
        let eps = 1e-9;
        let tol = Float::with_val(self.precision, Float::i_exp(1, -((self.precision / 4) as i32)));

        for (v, c_hi) in combos(hi) {
            // need lo-sum + v = 0 (mod 1): lo-sum near 1 - v or -v
            for target in [(1.0 - v).rem_euclid(1.0), 0.0, 1.0] {
                let start = keys.partition_point(|&k| k < target - eps);
                for entry in &table[start..] {
                    if entry.0 > target + eps {
                        break;
                    }
                    let coeffs: Vec<i64> = entry.1.iter().chain(c_hi.iter()).copied().collect();
                    if coeffs.iter().all(|&c| c == 0) {
                        continue;
                    }
                    let mut sum = Float::new(self.precision);
                    for (c, a) in coeffs.iter().zip(&self.alpha) {
                        sum += Float::with_val(self.precision, a * *c);
                    }
                    if dist_to_integer(&sum) < tol {
                        warn!(
                            "rotation vector looks rationally dependent: coefficients {:?} give an integer",
                            coeffs
                        );
                        return Some(coeffs);
                    }
                }
            }
        }
        None
    }
}

/// An element of the lattice, by exact integer coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeVector {
    a: Vec<i64>,
    n: i64,
}

impl LatticeVector {
    pub fn new(a: Vec<i64>, n: i64) -> Self {
        LatticeVector { a, n }
    }

    pub fn zero(s: usize) -> Self {
        LatticeVector { a: vec![0; s], n: 0 }
    }

    /// The standard basis vector `e_i` (0-based).
    pub fn unit(s: usize, i: usize) -> Self {
        let mut a = vec![0; s];
        a[i] = 1;
        LatticeVector { a, n: 0 }
    }

    /// `alpha' = (alpha, 1)`.
    pub fn alpha_prime(s: usize) -> Self {
        LatticeVector { a: vec![0; s], n: 1 }
    }

    /// Parses the row layout `[a_1, ..., a_s, n]`.
    pub fn from_row(row: &[i64]) -> Result<Self> {
        match row.split_last() {
            Some((&n, a)) if !a.is_empty() => Ok(LatticeVector { a: a.to_vec(), n }),
            _ => Err(Error::InvalidInput(format!("lattice row {row:?} is too short"))),
        }
    }

    pub fn to_row(&self) -> Vec<i64> {
        let mut row = self.a.clone();
        row.push(self.n);
        row
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[i64] {
        &self.a
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.n == 0 && self.a.iter().all(|&x| x == 0)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.axpy(1, other)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1, other)
    }

    pub fn checked_scale(&self, k: i64) -> Result<Self> {
        LatticeVector::zero(self.dim()).axpy(k, self)
    }

    /// `self + k * other`.
    pub fn axpy(&self, k: i64, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let term = |x: i64, y: i64| y.checked_mul(k).and_then(|v| x.checked_add(v)).ok_or(Error::Overflow);
        let a = self
            .a
            .iter()
            .zip(&other.a)
            .map(|(&x, &y)| term(x, y))
            .collect::<Result<Vec<_>>>()?;
        Ok(LatticeVector {
            a,
            n: term(self.n, other.n)?,
        })
    }

    /// Integer combination `sum_i coeffs[i] * vectors[i]`.
    pub fn combination(coeffs: &[i64], vectors: &[LatticeVector]) -> Result<Self> {
        let s = vectors.first().map(|v| v.dim()).unwrap_or(0);
        coeffs
            .iter()
            .zip(vectors)
            .try_fold(LatticeVector::zero(s), |acc, (&c, v)| acc.axpy(c, v))
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.a.iter().map(|x| x.to_string()).collect();
        write!(f, "({}|{})", a.join(","), self.n)
    }
}

/// `(n*alpha + a, n)` at working precision.
pub fn embed(ctx: &RotationContext, v: &LatticeVector) -> Vec<Float> {
    let prec = ctx.precision();
    let mut out: Vec<Float> = ctx
        .alpha()
        .iter()
        .zip(v.a())
        .map(|(alpha, &a)| {
            let mut x = Float::with_val(prec, alpha * v.n());
            x += a;
            x
        })
        .collect();
    out.push(Float::with_val(prec, v.n()));
    out
}

/// The projection `phi` onto the first `s` coordinates.
pub fn phys(embedded: &[Float]) -> Vec<Float> {
    embedded[..embedded.len().saturating_sub(1)].to_vec()
}

/// The last coordinate `phi_{s+1}`, read exactly.
pub fn last(v: &LatticeVector) -> i64 {
    v.n()
}

fn check_square(basis: &[LatticeVector]) -> Result<usize> {
    let s = basis.first().map(|v| v.dim()).unwrap_or(0);
    if s == 0 || basis.len() != s + 1 {
        return Err(Error::DimensionMismatch {
            expected: s + 1,
            found: basis.len(),
        });
    }
    if let Some(v) = basis.iter().find(|v| v.dim() != s) {
        return Err(Error::DimensionMismatch {
            expected: s,
            found: v.dim(),
        });
    }
    Ok(s)
}

/// Exact determinant of the matrix whose rows are `(a, n)` of each vector.
///
/// `±1` exactly when the vectors form a Z-basis of the lattice. Uses
/// fraction-free (Bareiss) elimination.
pub fn basis_determinant(basis: &[LatticeVector]) -> Result<Integer> {
    let s = check_square(basis)?;
    let dim = s + 1;
    let mut m: Vec<Vec<Integer>> = basis
        .iter()
        .map(|v| v.to_row().into_iter().map(Integer::from).collect())
        .collect();
    let mut sign = 1i32;
    let mut prev = Integer::from(1);
    for k in 0..dim {
        let Some(pivot) = (k..dim).find(|&r| m[r][k] != 0) else {
            return Ok(Integer::new());
        };
        if pivot != k {
            m.swap(pivot, k);
            sign = -sign;
        }
        for i in k + 1..dim {
            for j in k + 1..dim {
                let val = Integer::from(&m[i][j] * &m[k][k]) - Integer::from(&m[i][k] * &m[k][j]);
                m[i][j] = val.div_exact(&prev);
            }
            m[i][k] = Integer::new();
        }
        prev = m[k][k].clone();
    }
    Ok(prev * sign)
}

/// Exact inverse of a unimodular basis: integer coordinates of lattice
/// vectors with respect to `v_1, ..., v_{s+1}`.
#[derive(Clone, Debug)]
pub struct BasisCoordinates {
    inverse: Vec<Vec<i64>>,
}

impl BasisCoordinates {
    /// Fails unless the basis is unimodular.
    #[allow(clippy::needless_range_loop)]
    pub fn new(basis: &[LatticeVector]) -> Result<Self> {
        let s = check_square(basis)?;
        let dim = s + 1;
        // columns of M are the basis vectors; solve M k = x
        let mut aug: Vec<Vec<Rational>> = (0..dim)
            .map(|r| {
                let mut row: Vec<Rational> = basis.iter().map(|v| Rational::from(v.to_row()[r])).collect();
                row.extend((0..dim).map(|c| Rational::from(i32::from(c == r))));
                row
            })
            .collect();
        for k in 0..dim {
            let pivot = (k..dim)
                .find(|&r| aug[r][k] != 0)
                .ok_or_else(|| Error::InvalidInput("basis is singular".into()))?;
            aug.swap(pivot, k);
            let p = aug[k][k].clone();
            for x in aug[k].iter_mut() {
                *x /= &p;
            }
            for r in 0..dim {
                if r != k && aug[r][k] != 0 {
                    let f = aug[r][k].clone();
                    for c in 0..2 * dim {
                        let delta = Rational::from(&f * &aug[k][c]);
                        aug[r][c] -= delta;
                    }
                }
            }
        }
        let inverse = aug
            .into_iter()
            .map(|row| {
                row[dim..]
                    .iter()
                    .map(|q| {
                        if *q.denom() != 1 {
                            return Err(Error::InvalidInput("basis is not unimodular".into()));
                        }
                        q.numer().to_i64().ok_or(Error::Overflow)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BasisCoordinates { inverse })
    }

    /// Integer coefficients `k` with `x = sum_i k_i v_i`.
    pub fn coordinates(&self, x: &LatticeVector) -> Result<Vec<i64>> {
        let row = x.to_row();
        self.inverse
            .iter()
            .map(|w| {
                w.iter().zip(&row).try_fold(0i64, |acc, (&p, &q)| {
                    p.checked_mul(q).and_then(|t| acc.checked_add(t)).ok_or(Error::Overflow)
                })
            })
            .collect()
    }
}
