//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use brs_core::cutproject::pair_points;
use brs_core::real::{format_real, parse_real};
use brs_core::region::cone_coefficients;
use brs_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

const PREC: u32 = 256;

/// Seed for the random rotation vectors and step sequences.
const REGION_SEED: u64 = 1;
const REGION_COUNT: usize = 20;
const REGION_DIGITS: usize = 45;
const REGION_STEPS: usize = 10;

const GOLDEN_60: &str = "0.618033988749894848204586834365638117720309179805762862135448";
const GOLDEN: &str = "0.618033988749894848204586834365638117720309179805762862135448622705260462818902449707207204";
const ONE_MINUS_GOLDEN: &str =
    "0.381966011250105151795413165634361882279690820194237137864551377294739537181097550292792796";
const SQRT2_M1: &str = "0.414213562373095048801688724209698078569671875376948073176679737990732478462107038850387534";
const SQRT3_M1: &str = "0.732050807568877293527446341505872366942805253810380628055806979451933016908800037081146187";

/// Maxima of |remainder| for N <= 10^4 and N <= 10^6 on the orbit of 0,
/// one pair per region, in generation order.
const FROZEN_MAXIMA: [(&str, &str); REGION_COUNT] = [
    (
        "5.045354945804719261004386951976524645431",
        "5.086629562041240238793645138605915238008",
    ),
    (
        "0.9999605991576770655008963192544398844728",
        "1.526317442413393665004144555272165417978",
    ),
    (
        "3.055635823226684807941427200565527598706",
        "3.128045631656961389374979028366780881479",
    ),
    (
        "0.9999670262529325993602062446852301895925",
        "1.412354820010858510330429690240233299678",
    ),
    (
        "7.584004748680816604249539105206308417915",
        "8.123479682328900378493534564523227690313",
    ),
    (
        "1.628708381395501490188329233031451536799",
        "2.065046889045996306675114077533131203983",
    ),
    (
        "3.188654247746314324756615508537873756052",
        "3.189234708716639146761546826104069030957",
    ),
    (
        "1.410012307093932202244359796191260919287",
        "2.111622743411424064809339769735969606714",
    ),
    (
        "0.9999945931281219870172987534617376516713",
        "1.623637508476771149536083713013134144657",
    ),
    (
        "6.694005138075412394684968507346789120705",
        "6.698339659421197358831557006039640901650",
    ),
    (
        "0.9999421597178326298298680764068717620537",
        "1.188313275728711231500522182561108105511",
    ),
    (
        "1.484959531188731820962222483300899588547",
        "1.522181498442167457763516167183068248045",
    ),
    (
        "1.378580307576839427891154187192273117188",
        "1.380032145537602431846872081524403903751",
    ),
    (
        "1.448720678801651391975006968435823508562",
        "1.491966073755101330011733253265591269859",
    ),
    (
        "1.397209469322577577253158254416802402617",
        "1.668317140250949405385153246166237470705",
    ),
    (
        "1.500549304551696843899802444273293886721",
        "1.557121655706323514063701003337581747025",
    ),
    (
        "2.433006482258046210200960030728454679055",
        "2.486520574784978158376683573363297751195",
    ),
    (
        "2.274433313343109676201929955656667287850",
        "2.328155236406976489427946257366232674024",
    ),
    (
        "4.314293391961839323700810403199823651956",
        "4.320489281771330885588807939486164466127",
    ),
    (
        "1.762558703046490150932747324517813110865",
        "1.856465480028437695839943596070739785151",
    ),
];
/// Regression values are compared to this many decimal places.
const FROZEN_TOL: f64 = 1e-30;

/// Largest displacement of the golden pairing over the first 10^5 returns.
const GOLDEN_BD_SUP: &str = "0.99999035512432155028233586590824245529604923361239149648173759751713998686878802378364385368826289307755587953939672062";
/// Largest and smallest column suprema for the two-dimensional scheme.
const PLANE_BD_MAX: &str =
    "1.68297397068633320352670194588764875846740596578115282478347755498771123957129270680779911695825415779955994189";
const PLANE_BD_MIN: &str = "0.50966799187808312330807834942067702845900002412467668330750323140687862157485048642480219696906065504088615877838700966";
const PLANE_BD_RATIO: &str = "3.30209861616916047837424839468664624626389742049411360872746120751565629786257242515642029227390928027855230810444";

type Check<'a> = Box<dyn Fn() -> Result<Outcome> + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn tol(bits: i32) -> Float {
    Float::with_val(PREC, Float::i_exp(1, -bits))
}

fn real(text: &str) -> Float {
    parse_real(text, PREC).unwrap()
}

fn diff(a: &Float, b: &Float) -> Float {
    Float::with_val(PREC, a - b).abs()
}

fn zeros(s: usize) -> Vec<Float> {
    vec![Float::new(PREC); s]
}

fn golden_region() -> RegionGeometry {
    let ctx = RotationContext::from_decimal(&[GOLDEN], PREC).unwrap();
    construct(&ctx, &[1]).unwrap().geometry().unwrap()
}

fn plane_region() -> RegionGeometry {
    let ctx = RotationContext::from_decimal(&[SQRT2_M1, SQRT3_M1], PREC).unwrap();
    construct(&ctx, &[1]).unwrap().geometry().unwrap()
}

struct RandomRegion {
    steps: Vec<usize>,
    basis: SpecialBasis,
}

fn random_regions() -> Result<Vec<RandomRegion>> {
    let mut rng = ChaCha8Rng::seed_from_u64(REGION_SEED);
    (0..REGION_COUNT)
        .map(|r| {
            let s = r % 3 + 1;
            let alpha: Vec<String> = (0..s)
                .map(|_| {
                    let digits: String = (0..REGION_DIGITS)
                        .map(|_| char::from(b'0' + rng.gen_range(0..10u8)))
                        .collect();
                    format!("0.{digits}")
                })
                .collect();
            let steps: Vec<usize> = (0..REGION_STEPS).map(|_| rng.gen_range(1..=s)).collect();
            let ctx = RotationContext::from_decimal(&alpha, PREC)?;
            let basis = construct(&ctx, &steps)?;
            Ok(RandomRegion { steps, basis })
        })
        .collect()
}

fn construction_validity(regions: &[RandomRegion]) -> Result<Outcome> {
    for (r, region) in regions.iter().enumerate() {
        let report = check_conditions(&region.basis)?;
        let det = basis_determinant(region.basis.vectors())?;
        let unimodular = det == 1 || det == -1;
        if !(report.all_pass() && report.s4_exhaustive && unimodular && region.basis.sign_invariant()) {
            return Ok(outcome(
                false,
                format!("region {r} (steps {:?}) fails: {report:?}", region.steps),
            ));
        }
    }
    Ok(outcome(
        true,
        format!("{} regions, s in 1..=3, all conditions hold exactly", regions.len()),
    ))
}

fn golden_regression() -> Result<Outcome> {
    let ctx = RotationContext::from_decimal(&[GOLDEN_60], PREC)?;
    let basis = construct(&ctx, &[1])?;
    let rows: Vec<Vec<i64>> = basis.vectors().iter().map(LatticeVector::to_row).collect();
    let geom = basis.geometry()?;
    let times = renormalized_returns(&geom, 5)?.times();
    let naive = naive_returns(&geom, &zeros(1), 5, 100)?.times();
    let vol_err = diff(geom.volume(), &real(ONE_MINUS_GOLDEN));
    let t_err = diff(&geom.t()[0], &real(GOLDEN));
    let c = cone_coefficients(&initial_basis(&ctx).geometry()?, 1)?;
    let pass = rows == [vec![1, -1], vec![-1, 2]]
        && vol_err < tol(100)
        && t_err < tol(100)
        && times == [2, 5, 7, 10, 13]
        && naive == times
        && c[0] > 1;
    Ok(outcome(
        pass,
        format!(
            "vectors {rows:?}, volume {}, returns {times:?}, |t - alpha| = {:.3e}",
            format_real(geom.volume()),
            t_err.to_f64()
        ),
    ))
}

fn oracle_equivalence() -> Result<Outcome> {
    let mut notes = Vec::new();
    for (name, geom) in [("golden", golden_region()), ("plane", plane_region())] {
        let s = geom.dim();
        let naive = naive_returns(&geom, &zeros(s), 10_000, 1 << 24)?.times();
        let renorm = renormalized_returns(&geom, 10_000)?.times();
        if naive != renorm {
            let at = naive.iter().zip(&renorm).position(|(a, b)| a != b);
            return Ok(outcome(false, format!("{name}: sequences differ at return {at:?}")));
        }
        notes.push(format!("{name} ell_10000 = {}", renorm[9_999]));
    }
    Ok(outcome(true, notes.join(", ")))
}

fn boundedness(regions: &[RandomRegion]) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for (r, region) in regions.iter().enumerate() {
        let geom = region.basis.geometry()?;
        let trace = remainder_trace(&geom, &zeros(geom.dim()), 1_000_000, 10_000)?;
        let early = trace.max_abs_upto(10_000).expect("sample at 10^4").clone();
        let late = trace.max_abs.clone();
        let (want_early, want_late) = FROZEN_MAXIMA[r];
        if diff(&early, &real(want_early)) > FROZEN_TOL || diff(&late, &real(want_late)) > FROZEN_TOL {
            return Ok(outcome(
                false,
                format!(
                    "region {r}: maxima {} / {} differ from regression",
                    format_real(&early),
                    format_real(&late)
                ),
            ));
        }
        // the running max over N <= 10^6 bounds the max over (10^4, 10^6]
        let ratio = (late / &early).to_f64();
        worst = worst.max(ratio);
        if ratio > 2.0 {
            return Ok(outcome(
                false,
                format!("region {r}: late maximum is {ratio:.4} times the early one"),
            ));
        }
    }
    Ok(outcome(
        true,
        format!("largest late/early ratio {worst:.4}, maxima match regression"),
    ))
}

fn unboundedness_control() -> Result<Outcome> {
    let ctx = RotationContext::from_decimal(&[GOLDEN], PREC)?;
    let half = Float::with_val(PREC, 0.5);
    let geom = RegionGeometry::from_parallelotope(&ctx, vec![vec![half]], ctx.alpha().to_vec())?;
    let trace = remainder_trace(&geom, &zeros(1), 1_000_000, 10_000)?;
    let early = trace.max_abs_upto(10_000).expect("sample at 10^4").clone();
    Ok(outcome(
        trace.max_abs > early,
        format!(
            "max up to 10^4 = {}, up to 10^6 = {}",
            format_real(&early),
            format_real(&trace.max_abs)
        ),
    ))
}

fn rauzy(regions: &[RandomRegion]) -> Result<Outcome> {
    let mut worst = Float::new(PREC);
    for (r, region) in regions.iter().enumerate() {
        let geom = region.basis.geometry()?;
        let report = verify_rauzy(&geom, 10_000, r as u64)?;
        let residual = report.results[1]
            .max_residual
            .clone()
            .unwrap_or_else(|| Float::new(PREC));
        if !report.passed() || residual >= geom.context().tolerance() {
            return Ok(outcome(false, format!("region {r}: {:?}", report.results)));
        }
        worst.max_mut(&residual);
    }
    Ok(outcome(
        true,
        format!("R1 and R2 hold on all regions, max R2 residual {:.3e}", worst.to_f64()),
    ))
}

fn hyperplanes() -> Result<Outcome> {
    let mut notes = Vec::new();
    for (name, geom) in [("golden", golden_region()), ("plane", plane_region())] {
        let pts = hyperplane_points(&geom, -1000, 1000)?;
        let increasing = pts.windows(2).all(|w| w[0].n() < w[1].n());
        if pts.len() != 2001 || !increasing {
            return Ok(outcome(
                false,
                format!("{name}: {} points, increasing {increasing}", pts.len()),
            ));
        }
        notes.push(format!("{name}: 2001 hyperplanes, one point each"));
    }
    Ok(outcome(true, notes.join(", ")))
}

fn bd_map() -> Result<Outcome> {
    let mut pass = true;
    let mut notes = Vec::new();

    let scheme = Scheme::from_decimal(2, 1, &[vec![GOLDEN]], PREC)?;
    let region = construct(&scheme.rotation()?, &[1])?.geometry()?;
    let ss = SectionedScheme::new(scheme, region.clone(), zeros(1))?;
    let sup_over = |returns: usize| -> Result<Float> {
        let last = renormalized_returns(&region, returns - 1)?.times()[returns - 2];
        let pairing = bd_pairing(&ss, &[], (0, last))?;
        assert_eq!(pairing.len(), returns);
        Ok(pairing.sup_displacement)
    };
    let sup = sup_over(100_000)?;
    let doubled = sup_over(200_000)?;
    let matches = diff(&sup, &real(GOLDEN_BD_SUP)) < tol(PREC as i32 / 2);
    let steady = doubled <= sup;
    pass &= matches && steady;
    notes.push(format!(
        "golden sup {} (regression {}), doubled window {} ({})",
        format_real(&sup),
        if matches { "ok" } else { "MISMATCH" },
        format_real(&doubled),
        if steady { "no increase" } else { "INCREASES" }
    ));

    let scheme = Scheme::from_decimal(3, 2, &[vec![SQRT2_M1], vec![SQRT3_M1]], PREC)?;
    let region = construct(&scheme.rotation()?, &[1])?.geometry()?;
    let ss = SectionedScheme::new(scheme, region.clone(), zeros(1))?;
    let points = generate_points(&ss, &[(-50, 50)], (-10_000, 10_000))?;
    let pairing = pair_points(&points, region.volume())?;
    let (max, min) = pairing.column_extremes();
    let ratio = Float::with_val(PREC, &max / &min);
    let t = tol(PREC as i32 / 2);
    let frozen = diff(&max, &real(PLANE_BD_MAX)) < t
        && diff(&min, &real(PLANE_BD_MIN)) < t
        && diff(&ratio, &real(PLANE_BD_RATIO)) < t;
    let bounded = min > 0 && ratio.is_finite() && max <= real(PLANE_BD_MAX);
    pass &= frozen && bounded;
    notes.push(format!(
        "plane: {} columns, column sup max {} min {} ratio {} ({})",
        pairing.columns.len(),
        format_real(&max),
        format_real(&min),
        format_real(&ratio),
        if frozen { "matches regression" } else { "MISMATCH" }
    ));
    Ok(outcome(pass, notes.join("; ")))
}

fn main() -> ExitCode {
    let regions = random_regions();
    let criteria: Vec<(&str, Option<Duration>, Check<'_>)> = vec![
        (
            "construction validity",
            Some(Duration::from_secs(10)),
            Box::new(|| {
                let regions = random_regions()?;
                construction_validity(&regions)
            }),
        ),
        ("golden regression", None, Box::new(golden_regression)),
        (
            "naive and renormalized returns agree",
            Some(Duration::from_secs(30)),
            Box::new(oracle_equivalence),
        ),
        (
            "remainders stay bounded",
            None,
            Box::new(|| boundedness(regions.as_ref().map_err(clone_err)?)),
        ),
        ("unbounded control interval", None, Box::new(unboundedness_control)),
        (
            "Rauzy conditions",
            None,
            Box::new(|| rauzy(regions.as_ref().map_err(clone_err)?)),
        ),
        ("one orbit point per hyperplane", None, Box::new(hyperplanes)),
        ("bounded-distance map", Some(Duration::from_secs(120)), Box::new(bd_map)),
    ];

    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (mut pass, mut detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if let Some(limit) = limit {
            if elapsed > *limit {
                pass = false;
                detail.push_str(&format!("; over the {limit:?} budget"));
            }
        }
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name} [{:.1} s] {detail}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn clone_err(e: &Error) -> Error {
    Error::InvalidInput(e.to_string())
}
