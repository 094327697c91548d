use rug::Float;

use super::SpecialBasis;
use crate::error::{Error, Result};
use crate::lattice::{embed, phys, BasisCoordinates, RotationContext};
use crate::real;

/// Shift tables larger than this are refused; such regions are too
/// elongated for box enumeration.
const MAX_SHIFT_ENTRIES: usize = 1 << 24;

/// Real data of the parallelotope `A = phi(P(v_1, ..., v_s))`.
///
/// `columns` is the `s x s` matrix `B` whose columns are `phi(v_i)`;
/// coordinates of a point `x` are `u = B^-1 (x - origin)`, and the region is
/// the half-open cube `u in [0, 1)^s`.
#[derive(Clone, Debug)]
pub struct RegionGeometry {
    pub(crate) ctx: RotationContext,
    pub(crate) columns: Vec<Vec<Float>>,
    pub(crate) inverse: Vec<Vec<Float>>,
    pub(crate) beta: Vec<Float>,
    pub(crate) t: Vec<Float>,
    pub(crate) volume: Float,
    pub(crate) origin: Vec<Float>,
    pub(crate) basis: Option<SpecialBasis>,
    pub(crate) coords: Option<BasisCoordinates>,
    pub(crate) index: ShiftIndex,
}

/// `f64` copy of the geometry with every integer shift that can move a point
/// of `[0, 1)^s` into the parallelotope, sorted by the first region
/// coordinate of the shift.
#[derive(Clone, Debug)]
pub(crate) struct ShiftIndex {
    pub(crate) s: usize,
    pub(crate) inverse: Vec<f64>,
    pub(crate) origin: Vec<f64>,
    pub(crate) bounds: Vec<(i64, i64)>,
    pub(crate) shifts: Vec<i64>,
    pub(crate) images: Vec<f64>,
    pub(crate) keys: Vec<f64>,
    pub(crate) margin: f64,
}

/// Inverts a square matrix by Gauss-Jordan elimination with partial
/// pivoting, carrying 64 guard bits. Returns the inverse and the determinant.
#[allow(clippy::needless_range_loop)]
pub(crate) fn invert(m: &[Vec<Float>], prec: u32) -> Result<(Vec<Vec<Float>>, Float)> {
    let n = m.len();
    let work = prec + 64;
    let mut a: Vec<Vec<Float>> = m
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let mut out: Vec<Float> = row.iter().map(|x| Float::with_val(work, x)).collect();
            out.extend((0..n).map(|c| Float::with_val(work, i32::from(r == c))));
            out
        })
        .collect();
    let mut det = Float::with_val(work, 1);
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| {
                let (x, y) = (
                    Float::with_val(work, a[i][k].abs_ref()),
                    Float::with_val(work, a[j][k].abs_ref()),
                );
                x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[pivot][k].is_zero() {
            return Err(Error::SingularBasis);
        }
        if pivot != k {
            a.swap(pivot, k);
            det = -det;
        }
        let p = a[k][k].clone();
        det *= &p;
        for x in a[k].iter_mut() {
            *x /= &p;
        }
        for r in 0..n {
            if r == k || a[r][k].is_zero() {
                continue;
            }
            let f = a[r][k].clone();
            for c in 0..2 * n {
                let delta = Float::with_val(work, &f * &a[k][c]);
                a[r][c] -= delta;
            }
        }
    }
    let inverse = a
        .into_iter()
        .map(|row| row[n..].iter().map(|x| Float::with_val(prec, x)).collect())
        .collect();
    Ok((inverse, Float::with_val(prec, det)))
}

pub(crate) fn mat_vec(m: &[Vec<Float>], v: &[Float], prec: u32) -> Vec<Float> {
    m.iter()
        .map(|row| {
            let mut acc = Float::new(prec);
            for (a, b) in row.iter().zip(v) {
                acc += Float::with_val(prec, a * b);
            }
            acc
        })
        .collect()
}

impl RegionGeometry {
    /// Geometry of the region spanned by `v_1, ..., v_s` of `basis`, with
    /// `beta = phi(v_{s+1})`.
    pub fn from_basis(basis: &SpecialBasis) -> Result<Self> {
        let ctx = basis.context();
        let s = ctx.dim();
        let vectors = basis.vectors();
        let cols: Vec<Vec<Float>> = vectors[..s].iter().map(|v| phys(&embed(ctx, v))).collect();
        let beta = phys(&embed(ctx, &vectors[s]));
        let coords = BasisCoordinates::new(vectors).ok();
        Self::assemble(ctx.clone(), cols, beta, Some(basis.clone()), coords)
    }

    /// A bare parallelotope with the given column vectors and return vector,
    /// not tied to a lattice basis. Useful for control regions.
    pub fn from_parallelotope(ctx: &RotationContext, columns: Vec<Vec<Float>>, beta: Vec<Float>) -> Result<Self> {
        let s = ctx.dim();
        if columns.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: columns.len(),
            });
        }
        if let Some(c) = columns.iter().chain(std::iter::once(&beta)).find(|c| c.len() != s) {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: c.len(),
            });
        }
        let prec = ctx.precision();
        let columns = columns
            .into_iter()
            .map(|c| c.into_iter().map(|x| Float::with_val(prec, x)).collect())
            .collect();
        let beta = beta.into_iter().map(|x| Float::with_val(prec, x)).collect();
        Self::assemble(ctx.clone(), columns, beta, None, None)
    }

    fn assemble(
        ctx: RotationContext,
        cols: Vec<Vec<Float>>,
        beta: Vec<Float>,
        basis: Option<SpecialBasis>,
        coords: Option<BasisCoordinates>,
    ) -> Result<Self> {
        let s = ctx.dim();
        let prec = ctx.precision();
        let columns: Vec<Vec<Float>> = (0..s).map(|i| (0..s).map(|j| cols[j][i].clone()).collect()).collect();
        let (inverse, det) = invert(&columns, prec)?;
        let volume = det.abs();
        if volume < ctx.tolerance() {
            return Err(Error::SingularBasis);
        }
        let t = mat_vec(&inverse, &beta, prec);
        let origin = vec![real::zero(prec); s];
        let index = ShiftIndex::build(&columns, &inverse, &origin)?;
        Ok(RegionGeometry {
            ctx,
            columns,
            inverse,
            beta,
            t,
            volume,
            origin,
            basis,
            coords,
            index,
        })
    }

    /// The region translated by `offset`: membership of `x` in the result
    /// equals membership of `x - offset` in `self`.
    pub fn translated(&self, offset: &[Float]) -> Result<Self> {
        let s = self.dim();
        if offset.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: offset.len(),
            });
        }
        let prec = self.precision();
        let origin: Vec<Float> = self
            .origin
            .iter()
            .zip(offset)
            .map(|(o, w)| Float::with_val(prec, o + w))
            .collect();
        let index = ShiftIndex::build(&self.columns, &self.inverse, &origin)?;
        Ok(RegionGeometry {
            origin,
            index,
            ..self.clone()
        })
    }

    pub fn context(&self) -> &RotationContext {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }

    pub fn precision(&self) -> u32 {
        self.ctx.precision()
    }

    /// `B`, row-major: `columns()[i][j]` is coordinate `i` of `phi(v_j)`.
    pub fn columns(&self) -> &[Vec<Float>] {
        &self.columns
    }

    pub fn inverse(&self) -> &[Vec<Float>] {
        &self.inverse
    }

    pub fn beta(&self) -> &[Float] {
        &self.beta
    }

    /// Coordinates of `beta` in the spanning vectors.
    pub fn t(&self) -> &[Float] {
        &self.t
    }

    /// `|A| = |det B|`.
    pub fn volume(&self) -> &Float {
        &self.volume
    }

    pub fn origin(&self) -> &[Float] {
        &self.origin
    }

    pub fn is_translated(&self) -> bool {
        self.origin.iter().any(|o| !o.is_zero())
    }

    /// The lattice basis the region was built from, if any.
    pub fn basis(&self) -> Option<&SpecialBasis> {
        self.basis.as_ref()
    }

    pub(crate) fn basis_coordinates(&self) -> Option<&BasisCoordinates> {
        self.coords.as_ref()
    }

    /// Inclusive range of integer shifts per axis that can carry a point of
    /// `[0, 1)^s` into the parallelotope.
    pub fn diameter_box(&self) -> &[(i64, i64)] {
        &self.index.bounds
    }

    /// Region coordinates `B^-1 (x - origin)` of a point of `R^s`, with no
    /// reduction modulo `Z^s`.
    pub fn region_coordinates(&self, x: &[Float]) -> Vec<Float> {
        let prec = self.precision();
        let shifted: Vec<Float> = x
            .iter()
            .zip(&self.origin)
            .map(|(a, o)| Float::with_val(prec, a - o))
            .collect();
        mat_vec(&self.inverse, &shifted, prec)
    }

    /// `B^-1 d` for a displacement `d`.
    pub fn apply_inverse(&self, d: &[Float]) -> Vec<Float> {
        mat_vec(&self.inverse, d, self.precision())
    }

    /// The point `B u + origin`.
    pub fn point_at(&self, u: &[Float]) -> Vec<Float> {
        let prec = self.precision();
        mat_vec(&self.columns, u, prec)
            .into_iter()
            .zip(&self.origin)
            .map(|(x, o)| x + o)
            .collect()
    }
}

impl ShiftIndex {
    fn build(columns: &[Vec<Float>], inverse: &[Vec<Float>], origin: &[Float]) -> Result<Self> {
        let s = columns.len();
        let inv: Vec<f64> = inverse.iter().flat_map(|r| r.iter().map(|x| x.to_f64())).collect();
        let origin_f: Vec<f64> = origin.iter().map(|x| x.to_f64()).collect();
        let bounds: Vec<(i64, i64)> = (0..s)
            .map(|i| {
                let (mut lo, mut hi) = (0.0f64, 0.0f64);
                for x in &columns[i] {
                    let x = x.to_f64();
                    if x < 0.0 {
                        lo += x;
                    } else {
                        hi += x;
                    }
                }
                let o = origin_f[i];
                ((lo + o).floor() as i64 - 2, (hi + o).ceil() as i64 + 1)
            })
            .collect();
        let total = bounds
            .iter()
            .try_fold(1usize, |acc, (lo, hi)| acc.checked_mul((hi - lo + 1) as usize))
            .filter(|&n| n <= MAX_SHIFT_ENTRIES)
            .ok_or_else(|| {
                Error::InvalidInput(format!("region too elongated for shift enumeration: box {bounds:?}"))
            })?;

        let mut entries: Vec<(Vec<i64>, Vec<f64>)> = Vec::with_capacity(total);
        let mut m: Vec<i64> = bounds.iter().map(|b| b.0).collect();
        loop {
            let img: Vec<f64> = (0..s)
                .map(|i| (0..s).map(|j| inv[i * s + j] * m[j] as f64).sum())
                .collect();
            entries.push((m.clone(), img));
            let mut axis = 0;
            loop {
                if axis == s {
                    break;
                }
                m[axis] += 1;
                if m[axis] <= bounds[axis].1 {
                    break;
                }
                m[axis] = bounds[axis].0;
                axis += 1;
            }
            if axis == s {
                break;
            }
        }
        entries.sort_by(|a, b| a.1[0].total_cmp(&b.1[0]));

        let row_sum = (0..s)
            .map(|i| (0..s).map(|j| inv[i * s + j].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let reach = bounds
            .iter()
            .map(|(lo, hi)| lo.abs().max(hi.abs()) as f64)
            .fold(0.0, f64::max)
            + origin_f.iter().map(|o| o.abs()).fold(0.0, f64::max)
            + 2.0;
        let margin = 1e-9 * (1.0 + row_sum * reach);

        let keys: Vec<f64> = entries.iter().map(|e| e.1[0]).collect();
        let mut shifts = Vec::with_capacity(total * s);
        let mut images = Vec::with_capacity(total * s);
        for (m, img) in entries {
            shifts.extend(m);
            images.extend(img);
        }
        Ok(ShiftIndex {
            s,
            inverse: inv,
            origin: origin_f,
            bounds,
            shifts,
            images,
            keys,
            margin,
        })
    }

    /// Indices of shifts that might place the point with fractional
    /// coordinates `x` inside the region.
    pub(crate) fn candidates(&self, x: &[f64], out: &mut Vec<usize>) {
        out.clear();
        let s = self.s;
        if s > 32 {
            return self.candidates_slow(x, out);
        }
        let row = |i: usize| -> f64 { (0..s).map(|j| self.inverse[i * s + j] * (x[j] - self.origin[j])).sum() };
        let y0 = row(0);
        let lo = -self.margin - y0;
        let hi = 1.0 + self.margin - y0;
        let start = lower_bound(&self.keys, lo);
        if start == self.keys.len() || self.keys[start] > hi {
            return;
        }
        let mut y = [0.0f64; 32];
        for (i, yi) in y.iter_mut().enumerate().take(s).skip(1) {
            *yi = row(i);
        }
        for e in start..self.keys.len() {
            if self.keys[e] > hi {
                break;
            }
            let img = &self.images[e * s..(e + 1) * s];
            if (1..s).all(|i| {
                let u = y[i] + img[i];
                u >= -self.margin && u <= 1.0 + self.margin
            }) {
                out.push(e);
            }
        }
    }

    fn candidates_slow(&self, x: &[f64], out: &mut Vec<usize>) {
        let s = self.s;
        let y: Vec<f64> = (0..s)
            .map(|i| (0..s).map(|j| self.inverse[i * s + j] * (x[j] - self.origin[j])).sum())
            .collect();
        for e in 0..self.keys.len() {
            let img = &self.images[e * s..(e + 1) * s];
            if (0..s).all(|i| {
                let u = y[i] + img[i];
                u >= -self.margin && u <= 1.0 + self.margin
            }) {
                out.push(e);
            }
        }
    }

    pub(crate) fn shift(&self, entry: usize) -> &[i64] {
        &self.shifts[entry * self.s..(entry + 1) * self.s]
    }
}

/// First index with `keys[i] >= x`, without data-dependent branches.
fn lower_bound(keys: &[f64], x: f64) -> usize {
    let mut base = 0usize;
    let mut size = keys.len();
    if size == 0 {
        return 0;
    }
    while size > 1 {
        let half = size / 2;
        let mid = base + half;
        base = if keys[mid] < x { mid } else { base };
        size -= half;
    }
    base + usize::from(keys[base] < x)
}
