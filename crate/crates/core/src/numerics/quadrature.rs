//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Kronrod abscissae on [-1, 1] (non-negative half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SEGMENTS: usize = 5000;

/// Absolute and relative error targets; the integral is accepted once the
/// summed error estimate is below `max(abs, rel · |integral|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok(Segment { a, b, value, error })
}

/// Integrates a fallible integrand over consecutive intervals delimited by
/// `breakpoints` (at least two, non-decreasing).
pub fn try_integrate<F>(mut f: F, breakpoints: &[f64], tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if breakpoints.len() < 2 {
        return Err(Error::domain("quadrature needs at least two breakpoints"));
    }
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        if w[1] < w[0] {
            return Err(Error::domain("quadrature breakpoints must be non-decreasing"));
        }
        if w[1] > w[0] {
            heap.push(gauss_kronrod(&mut f, w[0], w[1])?);
        }
    }
    loop {
        let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target {
            return Ok(value);
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature { estimate: error, tolerance: target });
        }
        let worst = heap.pop().expect("heap is non-empty while error exceeds tolerance");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; nothing left to refine.
            return Err(Error::Quadrature { estimate: error, tolerance: target });
        }
        heap.push(gauss_kronrod(&mut f, worst.a, mid)?);
        heap.push(gauss_kronrod(&mut f, mid, worst.b)?);
    }
}

/// Infallible-integrand convenience wrapper around [`try_integrate`].
pub fn integrate<F>(mut f: F, breakpoints: &[f64], tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), breakpoints, tol)
}
