//! Special regions: lattice bases whose spanning parallelotope projects to a
//! bounded remainder set, and the basis-exchange construction producing them.
//!
//! A basis `v_1, ..., v_{s+1}` of the lattice is *special* when
//!
//! * the region `A` is the projection of the parallelotope on `v_1, ..., v_s`,
//! * `beta = phi(v_{s+1})` lies in `A` (coordinates `t` in `[0, 1)^s`),
//! * the vectors form a Z-basis (determinant `±1`),
//! * `last(v_{s+1}) - sum_{i in I} last(v_i) > 0` for every subset `I`.
//!
//! Starting from `e_1, ..., e_s, alpha'` (the whole torus), each
//! [`exchange_step`] replaces `v_j` by `v_j - v_{s+1}` and pulls the return
//! vector back into the shrunken region with non-negative integer
//! coefficients. For `s = 1` this is the continued fraction algorithm.

mod geometry;
mod membership;

use rug::{Float, Integer};

pub use geometry::RegionGeometry;
pub use membership::{Membership, OrbitProbe};

use crate::error::{Error, Result};
use crate::lattice::{basis_determinant, last, LatticeVector, RotationContext};
use crate::real::{self, floor_i64};

/// Largest `s` for which the subset condition is checked exhaustively.
pub const MAX_EXHAUSTIVE_DIM: usize = 20;

/// An ordered candidate basis `v_1, ..., v_{s+1}` of the lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecialBasis {
    ctx: RotationContext,
    vectors: Vec<LatticeVector>,
}

impl SpecialBasis {
    /// Checks shapes only; use [`check_conditions`] for the special-region conditions.
    pub fn new(ctx: RotationContext, vectors: Vec<LatticeVector>) -> Result<Self> {
        let s = ctx.dim();
        if vectors.len() != s + 1 {
            return Err(Error::DimensionMismatch {
                expected: s + 1,
                found: vectors.len(),
            });
        }
        if let Some(v) = vectors.iter().find(|v| v.dim() != s) {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: v.dim(),
            });
        }
        Ok(SpecialBasis { ctx, vectors })
    }

    pub fn context(&self) -> &RotationContext {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }

    pub fn vectors(&self) -> &[LatticeVector] {
        &self.vectors
    }

    /// `v_1, ..., v_s`.
    pub fn spanning(&self) -> &[LatticeVector] {
        &self.vectors[..self.dim()]
    }

    /// `v_{s+1}`.
    pub fn return_vector(&self) -> &LatticeVector {
        &self.vectors[self.dim()]
    }

    /// `last(v_i) <= 0` for `i <= s` and `last(v_{s+1}) >= 1`.
    pub fn sign_invariant(&self) -> bool {
        self.spanning().iter().all(|v| last(v) <= 0) && last(self.return_vector()) >= 1
    }

    pub fn geometry(&self) -> Result<RegionGeometry> {
        RegionGeometry::from_basis(self)
    }
}

/// The basis `e_1, ..., e_s, alpha'`; its region is the whole torus.
pub fn initial_basis(ctx: &RotationContext) -> SpecialBasis {
    let s = ctx.dim();
    let mut vectors: Vec<LatticeVector> = (0..s).map(|i| LatticeVector::unit(s, i)).collect();
    vectors.push(LatticeVector::alpha_prime(s));
    SpecialBasis {
        ctx: ctx.clone(),
        vectors,
    }
}

pub fn geometry(basis: &SpecialBasis) -> Result<RegionGeometry> {
    RegionGeometry::from_basis(basis)
}

/// Outcome of checking the special-region conditions on a basis.
#[derive(Clone, Debug)]
pub struct ConditionReport {
    /// The spanning vectors project to a non-degenerate parallelotope.
    pub s1: bool,
    /// `beta` lies in the region: every `t_i` in `[0, 1)`.
    pub s2: bool,
    /// The basis is unimodular.
    pub s3: bool,
    /// The return-time positivity condition over all subsets.
    pub s4: bool,
    /// `false` when `s` exceeds [`MAX_EXHAUSTIVE_DIM`] and `s4` was inferred
    /// from the sign invariant alone.
    pub s4_exhaustive: bool,
    pub sign_invariant: bool,
    pub determinant: Integer,
    pub t: Vec<Float>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.s1 && self.s2 && self.s3 && self.s4
    }
}

pub fn check_conditions(basis: &SpecialBasis) -> Result<ConditionReport> {
    let determinant = basis_determinant(basis.vectors())?;
    let s3 = determinant == 1 || determinant == -1;
    let sign_invariant = basis.sign_invariant();

    let s = basis.dim();
    let top = last(basis.return_vector());
    let lasts: Vec<i64> = basis.spanning().iter().map(last).collect();
    let (s4, s4_exhaustive) = if s <= MAX_EXHAUSTIVE_DIM {
        let ok = (0u64..1 << s).all(|mask| {
            let sum: i128 = (0..s).filter(|i| mask >> i & 1 == 1).map(|i| lasts[i] as i128).sum();
            top as i128 - sum > 0
        });
        (ok, true)
    } else {
        (sign_invariant, false)
    };

    let (s1, s2, t) = match RegionGeometry::from_basis(basis) {
        Ok(geom) => {
            let tol = basis.ctx.tolerance();
            for (i, ti) in geom.t().iter().enumerate() {
                let near_zero = Float::with_val(ti.prec(), ti.abs_ref()) < tol;
                let near_one = Float::with_val(ti.prec(), ti - 1u32).abs() < tol;
                if near_one || (near_zero && !ti.is_zero()) {
                    return Err(Error::BoundaryAmbiguity(format!(
                        "t_{} = {} is within tolerance of the region boundary",
                        i + 1,
                        real::format_real(ti)
                    )));
                }
            }
            let s2 = geom.t().iter().all(|ti| *ti >= 0 && *ti < 1);
            (true, s2, geom.t().to_vec())
        }
        Err(Error::SingularBasis) => (false, false, Vec::new()),
        Err(e) => return Err(e),
    };
    Ok(ConditionReport {
        s1,
        s2,
        s3,
        s4,
        s4_exhaustive,
        sign_invariant,
        determinant,
        t,
    })
}

/// Coefficients `c` of `beta` in the spanning set with `v_j` replaced by
/// `v_j - v_{s+1}` (`j` is 1-based): `c_i = t_i / (1 - t_j)` for every `i`.
pub fn cone_coefficients(geom: &RegionGeometry, j: usize) -> Result<Vec<Float>> {
    let s = geom.dim();
    if j == 0 || j > s {
        return Err(Error::InvalidInput(format!("exchange index {j} outside 1..={s}")));
    }
    let prec = geom.precision();
    let tol = geom.context().tolerance();
    let t = geom.t();
    let denom = Float::with_val(prec, 1u32 - &t[j - 1]);
    if denom < tol {
        return Err(Error::DegenerateCoefficient(format!(
            "t_{j} = {} is within tolerance of 1",
            real::format_real(&t[j - 1])
        )));
    }
    Ok(t.iter().map(|ti| Float::with_val(prec, ti / &denom)).collect())
}

/// One basis-exchange step on index `j` (1-based).
pub fn exchange_step(basis: &SpecialBasis, j: usize) -> Result<SpecialBasis> {
    let s = basis.dim();
    if !basis.sign_invariant() {
        return Err(Error::Precondition("sign invariant does not hold".into()));
    }
    let geom = RegionGeometry::from_basis(basis)?;
    if let Some(i) = geom.t().iter().position(|ti| *ti < 0 || *ti >= 1) {
        return Err(Error::Precondition(format!("t_{} is outside [0, 1)", i + 1)));
    }
    let c = cone_coefficients(&geom, j)?;
    let tol = basis.ctx.tolerance();
    let mut b = Vec::with_capacity(s);
    for (i, ci) in c.iter().enumerate() {
        if real::dist_to_integer(ci) < tol {
            return Err(Error::DegenerateCoefficient(format!(
                "c_{} = {} is within tolerance of an integer",
                i + 1,
                real::format_real(ci)
            )));
        }
        b.push(floor_i64(ci)?);
    }

    let vs = basis.vectors();
    let mut next = vs.to_vec();
    next[j - 1] = vs[j - 1].checked_sub(&vs[s])?;
    let mut ret = vs[s].clone();
    for i in 0..s {
        ret = ret.axpy(-b[i], &next[i])?;
    }
    next[s] = ret;
    let out = SpecialBasis {
        ctx: basis.ctx.clone(),
        vectors: next,
    };
    debug_assert!(out.sign_invariant());
    Ok(out)
}

/// Folds [`exchange_step`] over `steps` starting from [`initial_basis`].
pub fn construct(ctx: &RotationContext, steps: &[usize]) -> Result<SpecialBasis> {
    steps
        .iter()
        .try_fold(initial_basis(ctx), |basis, &j| exchange_step(&basis, j))
}

/// The default step sequence `1, 2, ..., s, 1, 2, ...` of length `count`.
pub fn round_robin(s: usize, count: usize) -> Vec<usize> {
    (0..count).map(|k| k % s + 1).collect()
}
