//! Numerical integration: the first-kind Chebyshev–Gauss rule used by the
//! closed-form uplink expressions, and an adaptive Gauss–Kronrod integrator
//! that serves as the independent reference in tests and audits.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// First-kind Chebyshev–Gauss quadrature rule with `n` nodes
/// `t_i = cos((2i-1) pi / (2n))` and uniform weights `pi/n`.
///
/// Applied to a plain integral via the compensation factor `sqrt(1 - t^2)`:
///
/// ```text
/// int_lo^hi g(x) dx  ~=  (hi-lo)/2 * sum_i  w_i sqrt(1 - t_i^2) g(x_i),
/// x_i = (hi-lo)/2 * t_i + (hi+lo)/2
/// ```
///
/// The nodes are open (all in `(-1, 1)`), so integrands that are singular at
/// an endpoint are never evaluated there. When the integrand itself carries a
/// `1/sqrt(hi - x)` edge singularity the factor cancels it and the rule
/// converges quickly; at a regular endpoint the artificial square-root factor
/// limits convergence to O(n^-2).
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevRule {
    // nodes t_i, strictly decreasing, mirrored exactly around zero
    nodes: Vec<f64>,
    // sin of the node angles, i.e. sqrt(1 - t_i^2)
    sines: Vec<f64>,
}

impl ChebyshevRule {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidRule("node count must be at least one"));
        }
        let mut nodes = vec![0.0; n];
        let mut sines = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let angle = (2 * i + 1) as f64 * PI / (2 * n) as f64;
            let (sin, cos) = angle.sin_cos();
            nodes[i] = cos;
            sines[i] = sin;
            // mirror so that odd integrands cancel exactly
            nodes[n - 1 - i] = -cos;
            sines[n - 1 - i] = sin;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
            sines[n / 2] = 1.0;
        }
        Ok(Self { nodes, sines })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Uniform weight `pi/n`.
    pub fn weight(&self) -> f64 {
        PI / self.nodes.len() as f64
    }

    /// Nodes in strictly decreasing order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Approximates `int_lo^hi g(x) dx` with the compensated rule.
    ///
    /// Returns zero for `lo == hi` and an error for `lo > hi`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F, lo: f64, hi: f64) -> Result<f64> {
        if lo > hi {
            return Err(Error::DegenerateInterval { lo, hi });
        }
        if lo == hi {
            return Ok(0.0);
        }
        let half = (hi - lo) / 2.0;
        let mid = (hi + lo) / 2.0;
        let w = self.weight();
        let mut sum = 0.0;
        for (t, s) in self.nodes.iter().zip(&self.sines) {
            sum += w * s * g(mid + half * t);
        }
        Ok(half * sum)
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule (positive abscissae).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss–Kronrod 7-15 pass over `[lo, hi]`: returns the Kronrod estimate
/// and a scaled error bound in the QUADPACK style.
fn kronrod15<F: Fn(f64) -> f64>(g: &F, lo: f64, hi: f64) -> (f64, f64) {
    let half = (hi - lo) / 2.0;
    let mid = (hi + lo) / 2.0;
    let f_mid = g(mid);
    let mut resg = WG[3] * f_mid;
    let mut resk = WGK[7] * f_mid;
    let mut values = [0.0f64; 15];
    values[7] = f_mid;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = g(mid - dx);
        let f2 = g(mid + dx);
        values[j] = f1;
        values[14 - j] = f2;
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let estimate = resk * half;
    let mean = resk / 2.0;
    let mut resasc = WGK[7] * (f_mid - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((values[j] - mean).abs() + (values[14 - j] - mean).abs());
    }
    resasc *= half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    (estimate, err)
}

#[derive(Debug)]
struct Cell {
    estimate: f64,
    error: f64,
    lo: f64,
    hi: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

const MAX_CELLS: usize = 4096;

/// Adaptive estimate of `int_lo^hi g(x) dx` with absolute error at most
/// `tol`.
///
/// The interval is split at its midpoint and each half is mapped through
/// `x = edge +/- u^2` before the worst-cell-first Gauss–Kronrod refinement.
/// The substitution regularizes inverse-square-root singularities at either
/// endpoint while leaving smooth integrands smooth, so the integrand is never
/// evaluated at `lo` or `hi` themselves.
///
/// Fails with [`Error::QuadratureNonConvergence`] (carrying the partial
/// estimate and its error bound) if the refinement budget is exhausted.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidConfig("integration bounds must be finite"));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidConfig("tolerance must be finite and > 0"));
    }
    if lo > hi {
        return Err(Error::DegenerateInterval { lo, hi });
    }
    if lo == hi {
        return Ok(0.0);
    }
    let mid = lo + (hi - lo) / 2.0;
    let left = adaptive_plain(
        |u| {
            let x = lo + u * u;
            2.0 * u * g(x)
        },
        0.0,
        (mid - lo).sqrt(),
        tol / 2.0,
    );
    let right = adaptive_plain(
        |u| {
            let x = hi - u * u;
            2.0 * u * g(x)
        },
        0.0,
        (hi - mid).sqrt(),
        tol / 2.0,
    );
    match (left, right) {
        (Ok(l), Ok(r)) => Ok(l + r),
        (l, r) => {
            let (estimate, error_bound) = partial_sum(l, r);
            Err(Error::QuadratureNonConvergence {
                estimate,
                error_bound,
                tolerance: tol,
            })
        }
    }
}

fn partial_sum(l: Result<f64>, r: Result<f64>) -> (f64, f64) {
    let unpack = |side: Result<f64>| match side {
        Ok(v) => (v, 0.0),
        Err(Error::QuadratureNonConvergence {
            estimate,
            error_bound,
            ..
        }) => (estimate, error_bound),
        Err(_) => (f64::NAN, f64::INFINITY),
    };
    let (lv, le) = unpack(l);
    let (rv, re) = unpack(r);
    (lv + rv, le + re)
}

fn adaptive_plain<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (estimate, error) = kronrod15(&g, lo, hi);
    let mut heap = BinaryHeap::new();
    heap.push(Cell {
        estimate,
        error,
        lo,
        hi,
    });
    let mut total_estimate = estimate;
    let mut total_error = error;
    while !(total_error <= tol) {
        if heap.len() >= MAX_CELLS {
            return Err(Error::QuadratureNonConvergence {
                estimate: sum_estimates(&heap),
                error_bound: total_error,
                tolerance: tol,
            });
        }
        let worst = heap.pop().expect("heap cannot be empty while error > tol");
        let mid = worst.lo + (worst.hi - worst.lo) / 2.0;
        if mid <= worst.lo || mid >= worst.hi {
            // interval at floating-point resolution; keep as-is
            let stuck = worst;
            let remaining: f64 = heap.iter().map(|c| c.error).sum::<f64>() + stuck.error;
            if remaining <= tol {
                heap.push(stuck);
                break;
            }
            return Err(Error::QuadratureNonConvergence {
                estimate: sum_estimates(&heap) + stuck.estimate,
                error_bound: remaining,
                tolerance: tol,
            });
        }
        let (le, lerr) = kronrod15(&g, worst.lo, mid);
        let (re, rerr) = kronrod15(&g, mid, worst.hi);
        total_estimate += le + re - worst.estimate;
        total_error += lerr + rerr - worst.error;
        heap.push(Cell {
            estimate: le,
            error: lerr,
            lo: worst.lo,
            hi: mid,
        });
        heap.push(Cell {
            estimate: re,
            error: rerr,
            lo: mid,
            hi: worst.hi,
        });
        // refresh accumulated sums occasionally to limit drift
        if heap.len() % 256 == 0 {
            total_estimate = sum_estimates(&heap);
            total_error = heap.iter().map(|c| c.error).sum();
        }
    }
    let _ = total_estimate;
    Ok(sum_estimates(&heap))
}

fn sum_estimates(heap: &BinaryHeap<Cell>) -> f64 {
    // compensated sum: cell estimates can span many magnitudes
    let mut sum = 0.0;
    let mut comp = 0.0;
    for c in heap.iter() {
        let y = c.estimate - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}
