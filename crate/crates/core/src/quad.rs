//! Adaptive Gauss-Kronrod quadrature, fixed Gauss-Legendre rules and
//! polynomial extrapolation to zero.
//!
//! Everything here works for real and complex integrands through the small
//! [`QuadValue`] trait. The adaptive driver is the usual globally adaptive
//! scheme: keep a heap of sub-intervals ordered by their local error estimate
//! and bisect the worst one until the summed error meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

/// Values that can be integrated: real or complex scalars.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// An integral value together with its absolute error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub abs_error: f64,
    pub evaluations: usize,
}

impl<T: QuadValue> Estimate<T> {
    pub fn exact(value: T) -> Self {
        Estimate {
            value,
            abs_error: 0.0,
            evaluations: 0,
        }
    }

    /// Scales value and error by a constant factor.
    pub fn scaled(self, factor: f64) -> Self {
        Estimate {
            value: self.value * factor,
            abs_error: self.abs_error * factor.abs(),
            evaluations: self.evaluations,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("adaptive quadrature did not converge: error estimate {abs_error:e} after {intervals} intervals")]
    NonConvergence { abs_error: f64, intervals: usize },
    #[error("error estimate {abs_error:e} exceeds the requested {tol:e}")]
    ToleranceNotMet { abs_error: f64, tol: f64 },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
    #[error("invalid integration range [{0}, {1}]")]
    InvalidRange(f64, f64),
}

/// Tolerances and limits for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl AdaptiveOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        AdaptiveOptions {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    pub fn with_max_intervals(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }
}

// 21-point Kronrod abscissae and weights, with the embedded 10-point Gauss
// weights (Gauss nodes are the odd-indexed Kronrod nodes).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_690,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<T: QuadValue, F: Fn(f64) -> T>(
    f: &F,
    a: f64,
    b: f64,
) -> Result<Segment<T>, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [T::zero(); 21];
    fv[10] = f(center);
    for j in 0..10 {
        let dx = half * XGK[j];
        fv[j] = f(center - dx);
        fv[20 - j] = f(center + dx);
    }
    for (k, v) in fv.iter().enumerate() {
        if !v.magnitude().is_finite() {
            let x = if k == 10 {
                center
            } else if k < 10 {
                center - half * XGK[k]
            } else {
                center + half * XGK[20 - k]
            };
            return Err(QuadError::NonFinite(x));
        }
    }

    let mut kron = fv[10] * WGK[10];
    let mut gauss = T::zero();
    let mut res_abs = fv[10].magnitude() * WGK[10];
    for j in 0..10 {
        let pair = fv[j] + fv[20 - j];
        kron = kron + pair * WGK[j];
        res_abs += WGK[j] * (fv[j].magnitude() + fv[20 - j].magnitude());
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut res_asc = WGK[10] * (fv[10] - mean).magnitude();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv[j] - mean).magnitude() + (fv[20 - j] - mean).magnitude());
    }

    let scale = half.abs();
    let value = kron * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut error = ((kron - gauss) * half).magnitude();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, error })
}

/// Globally adaptive 21-point Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// `breaks` are interior points where the integrand is known to be sharp
/// (poles smoothed by a regulator, kinks, resonance peaks); points outside
/// the open interval are ignored.
pub fn integrate<T, F>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: AdaptiveOptions,
) -> Result<Estimate<T>, QuadError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(QuadError::InvalidRange(a, b));
    }
    if a == b {
        return Ok(Estimate::exact(T::zero()));
    }
    let mut points: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    points.push(a);
    points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    points.push(b);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment<T>> = Vec::new();
    for w in points.windows(2) {
        heap.push(kronrod21(&f, w[0], w[1])?);
    }
    let mut evaluations = 21 * heap.len();

    loop {
        let (total, err) = heap
            .iter()
            .chain(frozen.iter())
            .fold((T::zero(), 0.0), |(v, e), s| (v + s.value, e + s.error));
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if err <= target || heap.is_empty() {
            if err <= target {
                return Ok(Estimate {
                    value: total,
                    abs_error: err,
                    evaluations,
                });
            }
            return Err(QuadError::NonConvergence {
                abs_error: err,
                intervals: frozen.len(),
            });
        }
        if heap.len() + frozen.len() >= opts.max_intervals {
            return Err(QuadError::NonConvergence {
                abs_error: err,
                intervals: heap.len() + frozen.len(),
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        let width = worst.b - worst.a;
        if width <= 64.0 * f64::EPSILON * (worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE))
        {
            // cannot bisect further
            frozen.push(worst);
            continue;
        }
        heap.push(kronrod21(&f, worst.a, mid)?);
        heap.push(kronrod21(&f, mid, worst.b)?);
        evaluations += 42;
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Cached 24-point Gauss-Legendre rule used by the special-function code.
pub(crate) fn gl24() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(24))
}

/// Neville polynomial extrapolation of `(x_i, y_i)` to `x = 0`.
///
/// Returns the full-order extrapolant and an error estimate taken as its
/// distance from the extrapolant built without the point farthest from zero.
pub fn extrapolate_to_zero<T: QuadValue>(xs: &[f64], ys: &[T]) -> Estimate<T> {
    assert_eq!(xs.len(), ys.len(), "abscissae and values differ in length");
    assert!(!xs.is_empty(), "nothing to extrapolate");
    let neville = |idx: &[usize]| -> T {
        let mut p: Vec<T> = idx.iter().map(|&i| ys[i]).collect();
        let x: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        let n = p.len();
        for level in 1..n {
            for i in 0..n - level {
                let (xi, xj) = (x[i], x[i + level]);
                p[i] = (p[i] * (-xj) - p[i + 1] * (-xi)) * (1.0 / (xi - xj));
            }
        }
        p[0]
    };
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].abs().total_cmp(&xs[j].abs()));
    let full = neville(&order);
    let abs_error = if order.len() > 1 {
        (full - neville(&order[..order.len() - 1])).magnitude()
    } else {
        0.0
    };
    Estimate {
        value: full,
        abs_error,
        evaluations: 0,
    }
}

/// Lagrange weights `w_i` with `p(0) = Σ w_i y_i` for the interpolant
/// through `(x_i, y_i)`; `Σ |w_i|` bounds how input errors propagate into
/// [`extrapolate_to_zero`].
pub fn extrapolation_weights(xs: &[f64]) -> Vec<f64> {
    (0..xs.len())
        .map(|i| {
            xs.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| -xj / (xs[i] - xj))
                .product()
        })
        .collect()
}
