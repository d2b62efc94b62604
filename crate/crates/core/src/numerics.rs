//! Adaptive Gauss–Kronrod quadrature and bracketed root search.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae (positive half, descending) and weights; the
// odd-indexed nodes together with the centre form the embedded 7-point
// Gauss rule.
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Maximum number of subintervals held by [`integrate`].
pub const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
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
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv = [0.0; 14];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += w * (f1 + f2);
        abs_sum += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment {
        lo,
        hi,
        value,
        error,
    }
}

/// Integrates `f` over `[points[0], points[last]]` to absolute tolerance
/// `abs_tol`. Interior entries of `points` are breakpoints (kinks or jumps of
/// `f`) and must be non-decreasing.
///
/// Subdivision always bisects the segment with the largest error estimate.
/// Fails with `QuadratureNotConverged` when `MAX_INTERVALS` is reached or the
/// segments become too short to split.
pub fn integrate<F: Fn(f64) -> f64>(f: F, points: &[f64], abs_tol: f64) -> Result<Quadrature> {
    // negated form also rejects NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    let unsorted = points.windows(2).any(|w| !(w[0] <= w[1]));
    if points.len() < 2 || unsorted {
        return Err(Error::InvalidArgument(format!(
            "integration breakpoints must be sorted, got {points:?}"
        )));
    }
    let mut heap: BinaryHeap<Segment> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gauss_kronrod(&f, w[0], w[1]))
        .collect();
    loop {
        let (value, error) = totals(&heap);
        if error <= abs_tol {
            return Ok(Quadrature {
                value,
                abs_error: error,
                intervals: heap.len(),
            });
        }
        let worst = match heap.peek() {
            Some(s) => *s,
            None => unreachable!("nonzero error implies a segment"),
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if heap.len() >= MAX_INTERVALS || !(worst.lo < mid && mid < worst.hi) {
            return Err(Error::QuadratureNotConverged {
                estimate: value,
                error,
                tolerance: abs_tol,
            });
        }
        heap.pop();
        heap.push(gauss_kronrod(&f, worst.lo, mid));
        heap.push(gauss_kronrod(&f, mid, worst.hi));
    }
}

fn totals(heap: &BinaryHeap<Segment>) -> (f64, f64) {
    heap.iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
}

/// Finds the smallest `s` in `[0, len]` with `pred(s)` true, assuming `pred`
/// is monotone (false then true) and `pred(len)` holds. Bisects until the
/// bracket is below `x_tol` or stops shrinking in floating point.
pub fn first_true<P: FnMut(f64) -> bool>(mut pred: P, len: f64, x_tol: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, len);
    if pred(lo) {
        return lo;
    }
    while hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
