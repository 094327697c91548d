//! Deciding whether a torus point lies in a region.
//!
//! A point `x` of `R^s` is in `A` modulo `Z^s` when some integer shift `m`
//! puts `x + m` in the half-open parallelotope. Candidate shifts come from an
//! `f64` prefilter with a generous margin; every surviving candidate is then
//! decided at working precision. Coordinates within `2^(-P/2)` of a face are
//! ambiguous, except for orbit points of the origin: those are lattice points,
//! and a face hit is then decided exactly from integer basis coordinates.

use rug::Float;

use super::geometry::RegionGeometry;
use crate::error::{Error, Result};
use crate::lattice::LatticeVector;
use crate::real::{self, fixed_to_f64, to_fixed};

/// A successful membership decision.
#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    /// Region coordinates `u in [0, 1)^s`.
    pub coords: Vec<Float>,
    /// Integer vector `m` with `x + m` inside the parallelotope.
    pub shift: Vec<i64>,
}

enum Side {
    Inside,
    Outside,
    Near,
}

impl RegionGeometry {
    /// Coordinates of `x mod Z^s` in the region, or `None` if outside.
    ///
    /// A coordinate that is exactly `0` counts as inside and exactly `1` as
    /// outside; anything else within `2^(-P/2)` of a face is a
    /// [`Error::BoundaryAmbiguity`].
    pub fn torus_membership(&self, x: &[Float]) -> Result<Option<Vec<Float>>> {
        Ok(self.locate(x)?.map(|m| m.coords))
    }

    /// Like [`RegionGeometry::torus_membership`], also returning the shift.
    pub fn locate(&self, x: &[Float]) -> Result<Option<Membership>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let x_f: Vec<f64> = x.iter().map(|v| real::frac(v).to_f64()).collect();
        let mut cands = Vec::new();
        self.index.candidates(&x_f, &mut cands);
        self.confirm(x.to_vec(), &x_f, &cands, None)
    }

    fn confirm(
        &self,
        x: Vec<Float>,
        x_f: &[f64],
        cands: &[usize],
        lattice_n: Option<i64>,
    ) -> Result<Option<Membership>> {
        if cands.is_empty() {
            return Ok(None);
        }
        let s = self.dim();
        let prec = self.precision();
        let tol = self.ctx.tolerance();

        // reduce x by the integer vector consistent with the f64 fraction
        let mut floor = Vec::with_capacity(s);
        let mut reduced = Vec::with_capacity(s);
        for (xi, &fi) in x.iter().zip(x_f) {
            let mut fl = real::floor_i64(xi)?;
            let r = Float::with_val(prec, xi - fl);
            let gap = r.to_f64() - fi;
            if gap > 0.5 {
                fl += 1;
            } else if gap < -0.5 {
                fl -= 1;
            }
            reduced.push(Float::with_val(prec, xi - fl));
            floor.push(fl);
        }

        let mut hits: Vec<Membership> = Vec::new();
        let mut ambiguous: Option<String> = None;
        for &e in cands {
            let m = self.index.shift(e);
            let z: Vec<Float> = (0..s)
                .map(|i| {
                    let mut v = Float::with_val(prec, &reduced[i] + m[i]);
                    v -= &self.origin[i];
                    v
                })
                .collect();
            let u = super::geometry::mat_vec(&self.inverse, &z, prec);
            let mut outside = false;
            let mut near = false;
            for ui in &u {
                match classify(ui, &tol, lattice_n.is_some()) {
                    Side::Outside => outside = true,
                    Side::Near => near = true,
                    Side::Inside => {}
                }
            }
            if outside {
                continue;
            }
            let shift: Vec<i64> = m
                .iter()
                .zip(&floor)
                .map(|(&mi, &fi)| mi.checked_sub(fi).ok_or(Error::Overflow))
                .collect::<Result<_>>()?;
            if !near {
                hits.push(Membership { coords: u, shift });
                continue;
            }
            match lattice_n {
                Some(n) => {
                    if let Some(exact) = self.exact_coordinates(&shift, n)? {
                        if exact.iter().all(|&k| k == 0) {
                            let coords = vec![real::zero(prec); s];
                            hits.push(Membership { coords, shift });
                        }
                        continue;
                    }
                    ambiguous = Some(format!(
                        "orbit point n = {n} lies within tolerance of a face (shift {shift:?})"
                    ));
                }
                None => {
                    let shown: Vec<String> = x.iter().map(real::format_real).collect();
                    ambiguous = Some(format!(
                        "point ({}) lies within tolerance of a face (shift {shift:?})",
                        shown.join(", ")
                    ));
                }
            }
        }
        if let Some(msg) = ambiguous {
            return Err(Error::BoundaryAmbiguity(msg));
        }
        if hits.len() > 1 {
            let shifts: Vec<&Vec<i64>> = hits.iter().map(|h| &h.shift).collect();
            return Err(Error::InjectivityViolation(format!("shifts {shifts:?} both qualify")));
        }
        Ok(hits.pop())
    }

    /// For the lattice point `(shift, n)`, its integer region coordinates when
    /// it lies in the hyperplane spanned by `v_1, ..., v_s`.
    fn exact_coordinates(&self, shift: &[i64], n: i64) -> Result<Option<Vec<i64>>> {
        let Some(coords) = self.basis_coordinates() else {
            return Ok(None);
        };
        if self.is_translated() {
            return Ok(None);
        }
        let k = coords.coordinates(&LatticeVector::new(shift.to_vec(), n))?;
        let s = self.dim();
        Ok((k[s] == 0).then(|| k[..s].to_vec()))
    }
}

fn classify(u: &Float, tol: &Float, lattice: bool) -> Side {
    if !lattice {
        if u.is_zero() {
            return Side::Inside;
        }
        if *u == 1 {
            return Side::Outside;
        }
    }
    let from_one = Float::with_val(u.prec(), u - 1u32);
    if *u <= -tol.clone() || from_one >= *tol {
        Side::Outside
    } else if *u < *tol || from_one > -tol.clone() {
        Side::Near
    } else {
        Side::Inside
    }
}

/// Membership tests along one orbit `x0 + n*alpha`.
///
/// Positions are first located with exact 128-bit fixed-point arithmetic on
/// the torus and an `f64` filter; the working-precision point
/// `x0 + n*alpha` is only formed (from scratch, never incrementally) when
/// the filter reports a candidate. When `x0` is exactly the origin the orbit
/// consists of lattice points and face hits are decided exactly.
pub struct OrbitProbe<'g> {
    geom: &'g RegionGeometry,
    start: Vec<Float>,
    start_fixed: Vec<u128>,
    alpha_fixed: Vec<u128>,
    lattice: bool,
}

impl<'g> OrbitProbe<'g> {
    pub fn new(geom: &'g RegionGeometry, start: &[Float]) -> Result<Self> {
        let s = geom.dim();
        if start.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: start.len(),
            });
        }
        let prec = geom.precision();
        let start: Vec<Float> = start.iter().map(|x| Float::with_val(prec, x)).collect();
        let lattice = start.iter().all(|x| x.is_zero()) && geom.basis_coordinates().is_some() && !geom.is_translated();
        Ok(OrbitProbe {
            geom,
            start_fixed: start.iter().map(to_fixed).collect(),
            alpha_fixed: geom.ctx.alpha().iter().map(to_fixed).collect(),
            start,
            lattice,
        })
    }

    /// Orbit of the origin. For a region built from a lattice basis its
    /// points are lattice points, decided exactly on faces.
    pub fn origin(geom: &'g RegionGeometry) -> Self {
        let zero = vec![real::zero(geom.precision()); geom.dim()];
        Self::new(geom, &zero).expect("dimensions agree")
    }

    /// Whether face hits are decided exactly.
    pub fn is_lattice_orbit(&self) -> bool {
        self.lattice
    }

    /// The working-precision point `x0 + n*alpha`.
    pub fn point(&self, n: i64) -> Vec<Float> {
        let prec = self.geom.precision();
        self.start
            .iter()
            .zip(self.geom.ctx.alpha())
            .map(|(x0, a)| {
                let mut p = Float::with_val(prec, a * n);
                p += x0;
                p
            })
            .collect()
    }

    /// Whether `x0 + n*alpha` lies in the region modulo `Z^s`.
    pub fn visit(&self, n: i64) -> Result<Option<Membership>> {
        let mut cands = Vec::new();
        self.visit_with(n, &mut cands)
    }

    fn confirm(&self, n: i64, x_f: &[f64], cands: &[usize]) -> Result<Option<Membership>> {
        self.geom
            .confirm(self.point(n), x_f, cands, self.lattice.then_some(n))
            .map_err(|e| match e {
                Error::BoundaryAmbiguity(msg) if !self.lattice => {
                    Error::BoundaryAmbiguity(format!("{msg} at orbit step {n}"))
                }
                e => e,
            })
    }

    /// First `n` in `from + 1 ..= from + cap` whose point is in the region.
    pub fn next_visit(&self, from: i64, cap: u64, cands: &mut Vec<usize>) -> Result<Option<(i64, Membership)>> {
        let s = self.start.len();
        if s > 32 {
            for step in 1..=cap as i64 {
                let n = from.checked_add(step).ok_or(Error::Overflow)?;
                if let Some(hit) = self.visit_with(n, cands)? {
                    return Ok(Some((n, hit)));
                }
            }
            return Ok(None);
        }
        let first = from.checked_add(1).ok_or(Error::Overflow)?;
        from.checked_add(cap as i64).ok_or(Error::Overflow)?;
        let mut pos = [0u128; 32];
        let mut x_f = [0.0f64; 32];
        let nn = first as i128 as u128;
        for ((p, x), a) in pos.iter_mut().zip(&self.start_fixed).zip(&self.alpha_fixed) {
            *p = x.wrapping_add(nn.wrapping_mul(*a));
        }
        for n in first..first + cap as i64 {
            for ((x, p), a) in x_f.iter_mut().zip(pos.iter_mut()).zip(&self.alpha_fixed) {
                *x = fixed_to_f64(*p);
                *p = p.wrapping_add(*a);
            }
            self.geom.index.candidates(&x_f[..s], cands);
            if cands.is_empty() {
                continue;
            }
            if let Some(hit) = self.confirm(n, &x_f[..s], cands)? {
                return Ok(Some((n, hit)));
            }
        }
        Ok(None)
    }

    pub(crate) fn visit_with(&self, n: i64, cands: &mut Vec<usize>) -> Result<Option<Membership>> {
        let s = self.start.len();
        let mut x_f = [0.0f64; 32];
        let mut heap;
        let x_f: &mut [f64] = if s <= 32 {
            &mut x_f[..s]
        } else {
            heap = vec![0.0; s];
            &mut heap
        };
        let nn = n as i128 as u128;
        for ((x, p), a) in x_f.iter_mut().zip(&self.start_fixed).zip(&self.alpha_fixed) {
            *x = fixed_to_f64(p.wrapping_add(nn.wrapping_mul(*a)));
        }
        self.geom.index.candidates(x_f, cands);
        if cands.is_empty() {
            return Ok(None);
        }
        self.confirm(n, x_f, cands)
    }
}
