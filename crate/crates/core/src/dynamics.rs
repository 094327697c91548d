//! Orbits of the rotation `T(x) = x + alpha` on a region: remainder traces,
//! first returns, the lattice points of the orbit of `0`, and Rauzy's
//! sufficient conditions for a bounded remainder set.
//!
//! The orbit of `0` visits `A` exactly at the lattice points
//! `x_k = k v_{s+1} - sum_i floor(k t_i) v_i`, one in each hyperplane
//! `H_k = H_0 + k v_{s+1}`. Between consecutive points the return time grows
//! by `last(v_{s+1}) - sum_{i in I_k} last(v_i)`, where `I_k` is the set of
//! coordinates of `k t` that wrap. This gives return times without scanning.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

use crate::error::{Error, Result};
use crate::lattice::{embed, last, phys, LatticeVector};
use crate::real::{self, check_budget, dist_to_integer, floor_i64};
use crate::region::{Membership, OrbitProbe, RegionGeometry, SpecialBasis};

/// Longest gap tolerated between two visits before a scan gives up.
pub const DEFAULT_RETURN_CAP: u64 = 1 << 26;

#[derive(Clone, Debug, PartialEq)]
pub struct RemainderSample {
    pub n: u64,
    /// `sum_{m < n} chi_A(x0 + m alpha) - n |A|`.
    pub remainder: Float,
    /// Largest `|remainder|` over all `N <= n`.
    pub running_max: Float,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RemainderTrace {
    pub x0: Vec<Float>,
    pub volume: Float,
    pub n_max: u64,
    pub stride: u64,
    pub visits: u64,
    pub samples: Vec<RemainderSample>,
    /// Largest `|remainder|` over `N <= n_max`.
    pub max_abs: Float,
}

impl RemainderTrace {
    /// Running maximum at the last sample with `n <= bound`.
    pub fn max_abs_upto(&self, bound: u64) -> Option<&Float> {
        self.samples
            .iter()
            .take_while(|s| s.n <= bound)
            .last()
            .map(|s| &s.running_max)
    }
}

/// Scans `x0 + n alpha` for `n < n_max`, sampling the remainder at every
/// multiple of `stride`.
///
/// Between visits the remainder falls linearly, so its extremes are at the
/// step just before and just after a visit; only those are evaluated at
/// working precision.
pub fn remainder_trace(geom: &RegionGeometry, x0: &[Float], n_max: u64, stride: u64) -> Result<RemainderTrace> {
    if stride == 0 {
        return Err(Error::InvalidInput("stride must be positive".into()));
    }
    let prec = geom.precision();
    check_budget(prec, n_max)?;
    let probe = OrbitProbe::new(geom, x0)?;
    let volume = geom.volume().clone();

    let remainder = |count: u64, n: u64| {
        let mut r = Float::with_val(prec, &volume * n);
        r = Float::with_val(prec, count) - r;
        r
    };
    let mut max_abs = real::zero(prec);
    let bump = |r: &Float, max_abs: &mut Float| {
        if Float::with_val(prec, r.abs_ref()) > *max_abs {
            *max_abs = Float::with_val(prec, r.abs_ref());
        }
    };

    let mut samples = Vec::new();
    let mut count = 0u64;
    let mut cands = Vec::new();
    let mut next_sample = stride;
    let mut from = -1i64;
    loop {
        let left = n_max as i64 - 1 - from;
        let hit = if left > 0 {
            probe.next_visit(from, left as u64, &mut cands)?
        } else {
            None
        };
        let limit = hit.as_ref().map_or(n_max, |(n, _)| *n as u64);
        while next_sample <= limit {
            let r = remainder(count, next_sample);
            bump(&r, &mut max_abs);
            samples.push(RemainderSample {
                n: next_sample,
                remainder: r,
                running_max: max_abs.clone(),
            });
            next_sample += stride;
        }
        let Some((n, _)) = hit else { break };
        let n = n as u64;
        bump(&remainder(count, n), &mut max_abs);
        count += 1;
        bump(&remainder(count, n + 1), &mut max_abs);
        from = n as i64;
    }
    bump(&remainder(count, n_max), &mut max_abs);
    Ok(RemainderTrace {
        x0: probe.point(0),
        volume,
        n_max,
        stride,
        visits: count,
        samples,
        max_abs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReturnMethod {
    Naive,
    Renormalized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReturnEntry {
    pub k: i64,
    /// Time of the `k`-th return after the start.
    pub ell: i64,
    /// Region coordinates of the `k`-th return point.
    pub u: Vec<Float>,
}

/// Successive returns `k = 1, 2, ...` to the region; the start itself
/// (`k = 0`, `ell = 0`) is not listed.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnSequence {
    pub entries: Vec<ReturnEntry>,
    pub method: ReturnMethod,
}

impl ReturnSequence {
    pub fn times(&self) -> Vec<i64> {
        self.entries.iter().map(|e| e.ell).collect()
    }
}

/// First `count` returns of `x0` found by scanning the orbit.
pub fn naive_returns(geom: &RegionGeometry, x0: &[Float], count: usize, cap: u64) -> Result<ReturnSequence> {
    let probe = OrbitProbe::new(geom, x0)?;
    if probe.visit(0)?.is_none() {
        return Err(Error::Precondition("orbit start is not in the region".into()));
    }
    let mut entries = Vec::with_capacity(count);
    let mut cands = Vec::new();
    let mut from = 0i64;
    for k in 1..=count as i64 {
        let (ell, hit) = next_visit(&probe, from, cap, &mut cands)?;
        entries.push(ReturnEntry { k, ell, u: hit.coords });
        from = ell;
    }
    check_budget(geom.precision(), from.unsigned_abs())?;
    Ok(ReturnSequence {
        entries,
        method: ReturnMethod::Naive,
    })
}

fn next_visit(probe: &OrbitProbe<'_>, from: i64, cap: u64, cands: &mut Vec<usize>) -> Result<(i64, Membership)> {
    probe
        .next_visit(from, cap, cands)?
        .ok_or(Error::NonReturning { from, cap })
}

fn require_basis(geom: &RegionGeometry) -> Result<&SpecialBasis> {
    match geom.basis() {
        Some(b) if !geom.is_translated() => Ok(b),
        _ => Err(Error::Precondition(
            "needs an untranslated region built from a lattice basis".into(),
        )),
    }
}

/// `floor(k t_i)` for every `i`, refusing values within tolerance of an
/// integer (other than at `k = 0`).
fn floors(geom: &RegionGeometry, k: i64) -> Result<Vec<i64>> {
    let prec = geom.precision();
    let tol = geom.context().tolerance();
    geom.t()
        .iter()
        .enumerate()
        .map(|(i, ti)| {
            let kt = Float::with_val(prec, ti * k);
            if k != 0 && dist_to_integer(&kt) < tol {
                return Err(Error::BoundaryAmbiguity(format!(
                    "{k} t_{} = {} is within tolerance of an integer",
                    i + 1,
                    real::format_real(&kt)
                )));
            }
            floor_i64(&kt)
        })
        .collect()
}

/// Returns of the orbit of `0`, from the return-time cocycle.
pub fn renormalized_returns(geom: &RegionGeometry, count: usize) -> Result<ReturnSequence> {
    let basis = require_basis(geom)?;
    let s = geom.dim();
    let prec = geom.precision();
    let lasts: Vec<i64> = basis.spanning().iter().map(last).collect();
    let top = last(basis.return_vector());

    let mut entries = Vec::with_capacity(count);
    let mut prev = vec![0i64; s];
    let mut ell = 0i64;
    for k in 1..=count as i64 {
        let fl = floors(geom, k)?;
        let mut delta = top;
        for i in 0..s {
            if fl[i] != prev[i] {
                delta = delta.checked_sub(lasts[i]).ok_or(Error::Overflow)?;
            }
        }
        debug_assert!(delta >= 1);
        ell = ell.checked_add(delta).ok_or(Error::Overflow)?;
        let u = geom
            .t()
            .iter()
            .zip(&fl)
            .map(|(ti, &f)| {
                let mut x = Float::with_val(prec, ti * k);
                x -= f;
                x
            })
            .collect();
        entries.push(ReturnEntry { k, ell, u });
        prev = fl;
    }
    Ok(ReturnSequence {
        entries,
        method: ReturnMethod::Renormalized,
    })
}

/// Lattice points `x_k` of the orbit of `0` for `k` in `k_lo..=k_hi`,
/// generated by the recursion `x_{k+1} = x_k + v_{s+1} - sum_{i in I_k} v_i`
/// in both directions from `x_0 = 0`.
pub fn orbit_lattice_points(geom: &RegionGeometry, k_lo: i64, k_hi: i64) -> Result<Vec<LatticeVector>> {
    let basis = require_basis(geom)?;
    if k_lo > k_hi {
        return Ok(Vec::new());
    }
    let s = geom.dim();
    let vs = basis.vectors();
    let wraps = |k: i64| -> Result<Vec<bool>> {
        let (a, b) = (floors(geom, k)?, floors(geom, k + 1)?);
        Ok(a.iter().zip(&b).map(|(x, y)| x != y).collect())
    };
    let step = |x: &LatticeVector, w: &[bool], sign: i64| -> Result<LatticeVector> {
        let mut y = x.axpy(sign, &vs[s])?;
        for i in (0..s).filter(|&i| w[i]) {
            y = y.axpy(-sign, &vs[i])?;
        }
        Ok(y)
    };

    let mut x = LatticeVector::zero(s);
    if k_lo >= 0 {
        for k in 0..k_lo {
            x = step(&x, &wraps(k)?, 1)?;
        }
    } else {
        for k in (k_lo..0).rev() {
            x = step(&x, &wraps(k)?, -1)?;
        }
    }
    let mut out = Vec::with_capacity((k_hi - k_lo + 1) as usize);
    out.push(x.clone());
    for k in k_lo..k_hi {
        x = step(&x, &wraps(k)?, 1)?;
        out.push(x.clone());
    }
    Ok(out)
}

/// Searches each hyperplane `H_k` for lattice points whose projection lies
/// in the region, checking that there is exactly one and that it is the
/// orbit point `x_k`.
///
/// Candidates are `sum_i c_i v_i + k v_{s+1}` with `c_i` within 2 of
/// `-floor(k t_i)`; at `k = 0` membership is decided on the exact integer
/// coordinates `c`.
pub fn hyperplane_points(geom: &RegionGeometry, k_lo: i64, k_hi: i64) -> Result<Vec<LatticeVector>> {
    let basis = require_basis(geom)?;
    let orbit = orbit_lattice_points(geom, k_lo, k_hi)?;
    let ctx = geom.context();
    let s = geom.dim();
    let tol = ctx.tolerance();
    let vs = basis.vectors();
    const REACH: i64 = 2;

    let mut out = Vec::with_capacity(orbit.len());
    for (k, expected) in (k_lo..=k_hi).zip(orbit) {
        let centre: Vec<i64> = floors(geom, k)?.into_iter().map(|f| -f).collect();
        let mut found: Vec<LatticeVector> = Vec::new();
        let mut offs = vec![-REACH; s];
        loop {
            let c: Vec<i64> = centre.iter().zip(&offs).map(|(a, b)| a + b).collect();
            let inside = if k == 0 {
                c.iter().all(|&ci| ci == 0)
            } else {
                let mut coeffs = c.clone();
                coeffs.push(k);
                let lambda = LatticeVector::combination(&coeffs, vs)?;
                let u = geom.region_coordinates(&phys(&embed(ctx, &lambda)));
                let mut inside = true;
                for ui in &u {
                    let from_one = Float::with_val(ui.prec(), ui - 1u32);
                    if Float::with_val(ui.prec(), ui.abs_ref()) < tol || from_one.abs() < tol {
                        return Err(Error::BoundaryAmbiguity(format!(
                            "hyperplane {k}: candidate {c:?} is on a face"
                        )));
                    }
                    inside &= *ui > 0 && *ui < 1;
                }
                inside
            };
            if inside {
                let mut coeffs = c;
                coeffs.push(k);
                found.push(LatticeVector::combination(&coeffs, vs)?);
            }
            if !advance(&mut offs, REACH) {
                break;
            }
        }
        if found.len() != 1 {
            return Err(Error::CardinalityViolation { k, count: found.len() });
        }
        let point = found.pop().unwrap();
        if point != expected {
            return Err(Error::VerificationFailure(format!(
                "hyperplane {k}: found {point}, recursion gives {expected}"
            )));
        }
        out.push(point);
    }
    Ok(out)
}

fn advance(offs: &mut [i64], reach: i64) -> bool {
    for o in offs.iter_mut() {
        *o += 1;
        if *o <= reach {
            return true;
        }
        *o = -reach;
    }
    false
}

/// Result of one verification check.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionResult {
    pub condition: String,
    pub pass: bool,
    pub max_residual: Option<Float>,
    pub witness: Option<String>,
}

impl ConditionResult {
    pub fn new(condition: &str, pass: bool) -> Self {
        ConditionResult {
            condition: condition.into(),
            pass,
            max_residual: None,
            witness: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RauzyReport {
    pub seed: u64,
    pub samples: usize,
    pub results: Vec<ConditionResult>,
}

impl RauzyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    /// `Err(VerificationFailure)` naming the first failed condition.
    pub fn into_result(self) -> Result<Self> {
        match self.results.iter().find(|r| !r.pass) {
            None => Ok(self),
            Some(r) => Err(Error::VerificationFailure(format!(
                "{} fails{}",
                r.condition,
                r.witness.as_deref().map(|w| format!(" at {w}")).unwrap_or_default()
            ))),
        }
    }
}

fn show(x: &[Float]) -> String {
    let parts: Vec<String> = x.iter().map(real::format_real).collect();
    format!("({})", parts.join(", "))
}

fn random_coords(rng: &mut ChaCha8Rng, s: usize, prec: u32) -> Vec<Float> {
    (0..s).map(|_| Float::with_val(prec, rng.gen::<f64>())).collect()
}

/// Checks (R1) that distinct points of `A` are distinct modulo the lattice
/// `M` spanned by the columns of `B`, and (R2) that the first return map
/// found by scanning is translation by `beta` modulo `M`.
pub fn verify_rauzy(geom: &RegionGeometry, samples: usize, seed: u64) -> Result<RauzyReport> {
    verify_rauzy_with_cap(geom, samples, seed, DEFAULT_RETURN_CAP)
}

pub fn verify_rauzy_with_cap(geom: &RegionGeometry, samples: usize, seed: u64, cap: u64) -> Result<RauzyReport> {
    let s = geom.dim();
    let prec = geom.precision();
    let tol = geom.context().tolerance();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut r1 = ConditionResult::new("R1", true);
    for _ in 0..samples {
        let (u, v) = (random_coords(&mut rng, s, prec), random_coords(&mut rng, s, prec));
        if u == v {
            continue;
        }
        let (a, b) = (geom.point_at(&u), geom.point_at(&v));
        let diff: Vec<Float> = a.iter().zip(&b).map(|(x, y)| Float::with_val(prec, x - y)).collect();
        let k = geom.apply_inverse(&diff);
        let congruent = k.iter().all(|c| dist_to_integer(c) < tol);
        let seen = geom.torus_membership(&a)?;
        let round_trip = seen
            .as_ref()
            .is_some_and(|w| w.iter().zip(&u).all(|(x, y)| Float::with_val(prec, x - y).abs() < tol));
        if congruent || !round_trip {
            r1.pass = false;
            r1.witness = Some(format!("{} and {}", show(&a), show(&b)));
            break;
        }
    }

    let mut r2 = ConditionResult::new("R2", true);
    let mut worst = real::zero(prec);
    let mut cands = Vec::new();
    for _ in 0..samples {
        let u = random_coords(&mut rng, s, prec);
        let x = geom.point_at(&u);
        let probe = OrbitProbe::new(geom, &x)?;
        let (ell, hit) = next_visit(&probe, 0, cap, &mut cands)?;
        check_budget(prec, ell as u64)?;
        let d: Vec<Float> = geom
            .context()
            .alpha()
            .iter()
            .zip(&hit.shift)
            .zip(geom.beta())
            .map(|((a, &m), b)| {
                let mut v = Float::with_val(prec, a * ell);
                v += m;
                v -= b;
                v
            })
            .collect();
        let k = geom.apply_inverse(&d);
        let residual = k
            .iter()
            .map(dist_to_integer)
            .fold(real::zero(prec), |acc, r| acc.max(&r));
        if residual > worst {
            worst = residual.clone();
        }
        if residual >= tol && r2.pass {
            r2.pass = false;
            r2.witness = Some(format!("x = {}, return time {ell}", show(&x)));
        }
    }
    r2.max_residual = Some(worst);

    Ok(RauzyReport {
        seed,
        samples,
        results: vec![r1, r2],
    })
}

#[cfg(test)]
mod tests;
