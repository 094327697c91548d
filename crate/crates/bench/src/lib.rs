//! Fixtures shared by the benchmarks in `benches/`.

use brs_core::{construct, RegionGeometry, RotationContext};

pub const PRECISION: u32 = 256;

pub const GOLDEN: &str = "0.618033988749894848204586834365638117720309179805762862135448622705260462818902449707207204";
pub const SQRT2_M1: &str =
    "0.414213562373095048801688724209698078569671875376948073176679737990732478462107038850387534";
pub const SQRT3_M1: &str =
    "0.732050807568877293527446341505872366942805253810380628055806979451933016908800037081146187";
/// `2^(1/3) - 1`, `4^(1/3) - 1`, `sqrt(7) - 2`.
pub const CUBIC: [&str; 3] = [
    "0.259921049894873164767210607278228350570251464701507980081975112155299676513959483729396562",
    "0.587401051968199474751705639272308260391493327899853009808285761825216505624219173273544213",
    "0.645751311064590590501615753639260425710259183082450180368334459201068823230283627760392886",
];

pub fn context(alpha: &[&str]) -> RotationContext {
    RotationContext::from_decimal(alpha, PRECISION).expect("fixture rotation")
}

pub fn region(alpha: &[&str], steps: &[usize]) -> RegionGeometry {
    construct(&context(alpha), steps)
        .and_then(|b| b.geometry())
        .expect("fixture region")
}
