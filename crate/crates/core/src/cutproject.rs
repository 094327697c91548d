//! Cut-and-project sets for a `d`-dimensional subspace `V` of `R^k` and the
//! explicit bounded-distance map to a lattice.
//!
//! `V` is parameterized by `y in R^d` as `(y, sum_i y_i alpha_i)`, where the
//! rows `alpha_i in R^s` (`s = k - d`) form the `d x s` matrix of the scheme.
//! Taking the special region for `alpha = alpha_1 mod 1` as section, the
//! integer point `(n_1, ..., n_d)` is selected when
//! `n_1 alpha + gamma(n_2, ..., n_d) + w` lies in the region modulo `Z^s`,
//! with `gamma = sum_{i >= 2} n_i alpha_i`. Within a column of fixed tail
//! `(n_2, ..., n_d)` the selected `n_1` are the visit times `ell_i` of one
//! orbit, and `ell_i -> i / |A|` moves each point a bounded distance.

use rayon::prelude::*;
use rug::Float;

use crate::error::{Error, Result};
use crate::lattice::RotationContext;
use crate::real::{self, check_budget};
use crate::region::{OrbitProbe, RegionGeometry};

/// Parameters `k`, `d` and the `d x s` matrix of a cut-and-project scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct Scheme {
    k: usize,
    d: usize,
    alphas: Vec<Vec<Float>>,
    precision: u32,
}

impl Scheme {
    pub fn new(k: usize, d: usize, alphas: Vec<Vec<Float>>, precision: u32) -> Result<Self> {
        real::check_precision(precision)?;
        if d == 0 || d >= k {
            return Err(Error::InvalidInput(format!("need 1 <= d < k, got d = {d}, k = {k}")));
        }
        if alphas.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: alphas.len(),
            });
        }
        let s = k - d;
        if let Some(row) = alphas.iter().find(|r| r.len() != s) {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: row.len(),
            });
        }
        let alphas = alphas
            .into_iter()
            .map(|r| r.into_iter().map(|x| Float::with_val(precision, x)).collect())
            .collect();
        Ok(Scheme {
            k,
            d,
            alphas,
            precision,
        })
    }

    pub fn from_decimal<S: AsRef<str>>(k: usize, d: usize, alphas: &[Vec<S>], precision: u32) -> Result<Self> {
        let rows = alphas
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| real::parse_real(x.as_ref(), precision))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(k, d, rows, precision)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn s(&self) -> usize {
        self.k - self.d
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Rows `alpha_1, ..., alpha_d` as given (integer parts kept).
    pub fn alphas(&self) -> &[Vec<Float>] {
        &self.alphas
    }

    /// The rotation by the first row reduced into `[0, 1)^s`.
    pub fn rotation(&self) -> Result<RotationContext> {
        RotationContext::new(self.alphas[0].iter().map(real::frac).collect(), self.precision)
    }

    /// The point `(n, sum_i n_i alpha_i)` of `R^k`.
    pub fn embed(&self, n: &[i64]) -> Vec<Float> {
        let mut out: Vec<Float> = n.iter().map(|&x| Float::with_val(self.precision, x)).collect();
        for j in 0..self.s() {
            let mut acc = real::zero(self.precision);
            for (row, &ni) in self.alphas.iter().zip(n) {
                acc += Float::with_val(self.precision, &row[j] * ni);
            }
            out.push(acc);
        }
        out
    }

    /// Operator norm of `y -> (y, sum_i y_i alpha_i)` from `R^d` onto `V`:
    /// the factor converting displacements in parameter space to `R^k`.
    pub fn embedding_norm(&self) -> f64 {
        let (d, s) = (self.d, self.s());
        let a: Vec<Vec<f64>> = self
            .alphas
            .iter()
            .map(|r| r.iter().map(Float::to_f64).collect())
            .collect();
        // G = I + A A^T; its largest eigenvalue by power iteration
        let g: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| f64::from(u8::from(i == j)) + (0..s).map(|c| a[i][c] * a[j][c]).sum::<f64>())
                    .collect()
            })
            .collect();
        let mut v = vec![1.0; d];
        let mut lambda = 1.0;
        for _ in 0..500 {
            let w: Vec<f64> = (0..d).map(|i| (0..d).map(|j| g[i][j] * v[j]).sum()).collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = w.iter().map(|x| x / norm).collect();
            if (norm - lambda).abs() <= 1e-15 * norm {
                lambda = norm;
                break;
            }
            lambda = norm;
        }
        lambda.sqrt()
    }
}

/// `gamma(n_2, ..., n_d) = sum_{i >= 2} n_i alpha_i`; zero for `d = 1`.
pub fn gamma_shift(scheme: &Scheme, tail: &[i64]) -> Result<Vec<Float>> {
    if tail.len() != scheme.d - 1 {
        return Err(Error::DimensionMismatch {
            expected: scheme.d - 1,
            found: tail.len(),
        });
    }
    let prec = scheme.precision;
    let mut g = vec![real::zero(prec); scheme.s()];
    for (row, &ni) in scheme.alphas[1..].iter().zip(tail) {
        for (gj, a) in g.iter_mut().zip(row) {
            *gj += Float::with_val(prec, a * ni);
        }
    }
    Ok(g)
}

/// A scheme together with a section: the region for its rotation, shifted
/// by `offset`.
#[derive(Clone, Debug)]
pub struct SectionedScheme {
    scheme: Scheme,
    region: RegionGeometry,
    offset: Vec<Float>,
}

impl SectionedScheme {
    pub fn new(scheme: Scheme, region: RegionGeometry, offset: Vec<Float>) -> Result<Self> {
        let rot = scheme.rotation()?;
        if region.dim() != scheme.s() {
            return Err(Error::DimensionMismatch {
                expected: scheme.s(),
                found: region.dim(),
            });
        }
        if offset.len() != scheme.s() {
            return Err(Error::DimensionMismatch {
                expected: scheme.s(),
                found: offset.len(),
            });
        }
        let tol = rot.tolerance();
        let same = rot
            .alpha()
            .iter()
            .zip(region.context().alpha())
            .all(|(a, b)| Float::with_val(a.prec(), a - b).abs() < tol);
        if !same {
            return Err(Error::InvalidInput("region was built for a different rotation".into()));
        }
        Ok(SectionedScheme { scheme, region, offset })
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn region(&self) -> &RegionGeometry {
        &self.region
    }

    pub fn offset(&self) -> &[Float] {
        &self.offset
    }
}

/// Reduction of a starting point `x in R^k` of the cut-and-project set: with
/// `x = (x_p, x_int)`, the points of `Y_{S,x}` are `n - x_p` for the integer
/// points `n` selected with section offset
/// `w = x_int - sum_i x_{p,i} alpha_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldedOffset {
    pub offset: Vec<Float>,
    pub relabel: Vec<Float>,
}

pub fn fold_offset(scheme: &Scheme, x: &[Float]) -> Result<FoldedOffset> {
    if x.len() != scheme.k {
        return Err(Error::DimensionMismatch {
            expected: scheme.k,
            found: x.len(),
        });
    }
    let prec = scheme.precision;
    let (xp, xi) = x.split_at(scheme.d);
    let mut offset: Vec<Float> = xi.iter().map(|v| Float::with_val(prec, v)).collect();
    for (row, p) in scheme.alphas.iter().zip(xp) {
        for (w, a) in offset.iter_mut().zip(row) {
            *w -= Float::with_val(prec, a * p);
        }
    }
    Ok(FoldedOffset {
        offset,
        relabel: xp.iter().map(|v| Float::with_val(prec, v)).collect(),
    })
}

/// Selected `n_1` for one tail `(n_2, ..., n_d)`, increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub tail: Vec<i64>,
    pub n1: Vec<i64>,
}

/// The generated part of `Y'`, ordered lexicographically by tail and then
/// by `n_1`.
#[derive(Clone, Debug)]
pub struct PointSet {
    scheme: Scheme,
    pub n1_range: (i64, i64),
    pub columns: Vec<Column>,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.columns.iter().map(|c| c.n1.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Integer coordinates `(n_1, ..., n_d)` of every point.
    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        self.columns.iter().flat_map(|c| {
            c.n1.iter().map(move |&n| {
                let mut p = Vec::with_capacity(c.tail.len() + 1);
                p.push(n);
                p.extend_from_slice(&c.tail);
                p
            })
        })
    }

    /// Points with their embeddings in `R^k`, computed on demand.
    pub fn embedded(&self) -> impl Iterator<Item = (Vec<i64>, Vec<Float>)> + '_ {
        self.points().map(|p| {
            let e = self.scheme.embed(&p);
            (p, e)
        })
    }
}

fn tails(tail_box: &[(i64, i64)]) -> Result<Vec<Vec<i64>>> {
    if let Some((lo, hi)) = tail_box.iter().find(|(lo, hi)| lo > hi) {
        return Err(Error::InvalidInput(format!("empty tail range {lo}..={hi}")));
    }
    let mut out = vec![Vec::new()];
    for &(lo, hi) in tail_box {
        out = out
            .into_iter()
            .flat_map(|t| {
                (lo..=hi).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    Ok(out)
}

/// Selects the integer points of `Y'` with tail in `tail_box` (one inclusive
/// range per coordinate `n_2, ..., n_d`) and `n_1` in `n1_range`.
pub fn generate_points(ss: &SectionedScheme, tail_box: &[(i64, i64)], n1_range: (i64, i64)) -> Result<PointSet> {
    let scheme = &ss.scheme;
    if tail_box.len() != scheme.d - 1 {
        return Err(Error::DimensionMismatch {
            expected: scheme.d - 1,
            found: tail_box.len(),
        });
    }
    let (lo, hi) = n1_range;
    if lo > hi {
        return Err(Error::InvalidInput(format!("empty range {lo}..={hi} for n_1")));
    }
    check_budget(scheme.precision, lo.unsigned_abs().max(hi.unsigned_abs()))?;
    let prec = scheme.precision;
    let columns = tails(tail_box)?
        .into_par_iter()
        .map(|tail| {
            let mut start = gamma_shift(scheme, &tail)?;
            for (x, w) in start.iter_mut().zip(&ss.offset) {
                *x = Float::with_val(prec, &*x + w);
            }
            let probe = OrbitProbe::new(&ss.region, &start)?;
            let mut cands = Vec::new();
            let mut n1 = Vec::new();
            for n in lo..=hi {
                let hit = probe.visit_with(n, &mut cands).map_err(|e| match e {
                    Error::BoundaryAmbiguity(msg) => {
                        Error::BoundaryAmbiguity(format!("n_1 = {n}, tail {tail:?}: {msg}"))
                    }
                    e => e,
                })?;
                if hit.is_some() {
                    n1.push(n);
                }
            }
            Ok(Column { tail, n1 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PointSet {
        scheme: scheme.clone(),
        n1_range,
        columns,
    })
}

/// Per-column pairing data: the selected `n_1` are `ell_i` with
/// `i = index - origin`, so that `ell_{-1} < 0 <= ell_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairColumn {
    pub tail: Vec<i64>,
    pub ells: Vec<i64>,
    pub origin: usize,
    pub sup: Float,
}

impl PairColumn {
    pub fn index(&self, position: usize) -> i64 {
        position as i64 - self.origin as i64
    }
}

/// One matched pair `(ell_i, tail) -> (i / |A|, tail)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pair {
    pub source: Vec<i64>,
    pub i: i64,
    pub target: Float,
    pub displacement: Float,
}

/// The map `(ell_i, n_2, ..., n_d) -> (i |A|^-1, n_2, ..., n_d)` on a
/// generated sample, with its largest displacement. Sampled suprema are
/// lower bounds for the constant of the bounded-distance map.
#[derive(Clone, Debug)]
pub struct BDPairing {
    pub volume: Float,
    pub columns: Vec<PairColumn>,
    pub sup_displacement: Float,
}

impl BDPairing {
    /// Largest and smallest column suprema.
    pub fn column_extremes(&self) -> (Float, Float) {
        let prec = self.volume.prec();
        let mut max = real::zero(prec);
        let mut min = Float::with_val(prec, rug::float::Special::Infinity);
        for c in &self.columns {
            max.max_mut(&c.sup);
            min.min_mut(&c.sup);
        }
        (max, min)
    }

    pub fn len(&self) -> usize {
        self.columns.iter().map(|c| c.ells.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        let prec = self.volume.prec();
        self.columns.iter().flat_map(move |c| {
            c.ells.iter().enumerate().map(move |(pos, &ell)| {
                let i = c.index(pos);
                let target = Float::with_val(prec, i) / &self.volume;
                let displacement = Float::with_val(prec, &target - ell).abs();
                let mut source = vec![ell];
                source.extend_from_slice(&c.tail);
                Pair {
                    source,
                    i,
                    target,
                    displacement,
                }
            })
        })
    }
}

/// Pairs the points of [`generate_points`] column by column. `n1_range`
/// must contain `0` so that every column sees its index origin.
pub fn bd_pairing(ss: &SectionedScheme, tail_box: &[(i64, i64)], n1_range: (i64, i64)) -> Result<BDPairing> {
    pair_points(&generate_points(ss, tail_box, n1_range)?, ss.region.volume())
}

pub fn pair_points(points: &PointSet, volume: &Float) -> Result<BDPairing> {
    let (lo, hi) = points.n1_range;
    if lo > 0 || hi < 0 {
        return Err(Error::InvalidInput(format!("n_1 range {lo}..={hi} must contain 0")));
    }
    let prec = volume.prec();
    let mut sup = real::zero(prec);
    let mut columns = Vec::with_capacity(points.columns.len());
    for col in &points.columns {
        if col.n1.is_empty() {
            return Err(Error::EmptyColumn { tail: col.tail.clone() });
        }
        let origin = col.n1.partition_point(|&n| n < 0);
        let mut csup = real::zero(prec);
        for (pos, &ell) in col.n1.iter().enumerate() {
            let i = pos as i64 - origin as i64;
            let mut disp = Float::with_val(prec, i) / volume;
            disp -= ell;
            let disp = disp.abs();
            if disp > csup {
                csup = disp;
            }
        }
        sup.max_mut(&csup);
        columns.push(PairColumn {
            tail: col.tail.clone(),
            ells: col.n1.clone(),
            origin,
            sup: csup,
        });
    }
    Ok(BDPairing {
        volume: volume.clone(),
        columns,
        sup_displacement: sup,
    })
}
