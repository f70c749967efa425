//! Adaptive Gauss–Kronrod quadrature (7/15-point pairs, globally adaptive).
//!
//! Every integral in the crate goes through [`integrate_1d`] or one of the
//! nested 2-D drivers built on it. Unbounded limits are never passed in: the
//! caller truncates them to `mean ± cutoff_sigmas·σ` windows via
//! [`IntegrationConfig::window`].

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Half-width of Gaussian integration windows, in standard deviations.
    pub cutoff_sigmas: f64,
    pub max_subdivisions: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            cutoff_sigmas: 10.0,
            max_subdivisions: 2000,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "integration tolerances must be positive (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if !(self.cutoff_sigmas >= 6.0) {
            return Err(Error::InvalidParameter(format!(
                "cutoff_sigmas must be at least 6, got {}",
                self.cutoff_sigmas
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParameter("max_subdivisions must be positive".into()));
        }
        Ok(())
    }

    /// `mean ± cutoff_sigmas·sigma`.
    pub fn window(&self, mean: f64, sigma: f64) -> (f64, f64) {
        let half = self.cutoff_sigmas * sigma;
        (mean - half, mean + half)
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }
}

/// Result of a converged quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub evaluations: usize,
}

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

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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

/// One 15-point Kronrod rule with the QUADPACK error heuristic.
fn qk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error }
}

/// Globally adaptive quadrature of `f` over `[a, b]`.
///
/// Converges when the summed error estimate drops below
/// `max(abs_tol, rel_tol·|I|)`. Non-finite integrand values are treated as a
/// failure of the caller's underflow policy and reported as an integration
/// error.
pub fn integrate_1d<F>(mut f: F, interval: (f64, f64), cfg: &IntegrationConfig) -> Result<Quadrature>
where
    F: FnMut(f64) -> f64,
{
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration limits must be finite: [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let mut evaluations = 0usize;
    let mut g = |x: f64| {
        evaluations += 1;
        f(x)
    };

    let first = qk15(&mut g, a, b);
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut frozen_err = 0.0;
    let mut subdivisions = 1usize;

    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Integration { estimate: total, error: total_err });
        }
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if frozen_err > tol {
            return Err(Error::Integration { estimate: total, error: total_err });
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::Integration { estimate: total, error: total_err });
        };
        let mid = 0.5 * (worst.a + worst.b);
        let width = (worst.b - worst.a).abs();
        if width <= 64.0 * f64::EPSILON * (1.0 + mid.abs()) {
            // Cannot be split further in floating point.
            frozen_err += worst.error;
            continue;
        }
        if subdivisions >= cfg.max_subdivisions {
            heap.push(worst);
            return Err(Error::Integration { estimate: total, error: total_err });
        }
        let left = qk15(&mut g, worst.a, mid);
        let right = qk15(&mut g, mid, worst.b);
        subdivisions += 1;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift accumulated by incremental updates.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum::<f64>() + frozen_err;
    Ok(Quadrature { value, error, evaluations })
}

/// Nested quadrature over a rectangle `[x0, x1] × [y0, y1]`.
pub fn integrate_2d<F>(
    f: F,
    rectangle: ((f64, f64), (f64, f64)),
    cfg: &IntegrationConfig,
) -> Result<Quadrature>
where
    F: Fn(f64, f64) -> f64,
{
    let (xs, ys) = rectangle;
    integrate_2d_region(f, xs, |_| ys, cfg)
}

/// Nested quadrature over `{(x, y) : x0 ≤ x ≤ x1, y0(x) ≤ y ≤ y1(x)}`.
///
/// Letting the inner window follow `x` keeps narrow ridges (strongly
/// correlated Gaussians) inside the sampled region.
pub fn integrate_2d_region<F, B>(
    f: F,
    xs: (f64, f64),
    y_bounds: B,
    cfg: &IntegrationConfig,
) -> Result<Quadrature>
where
    F: Fn(f64, f64) -> f64,
    B: Fn(f64) -> (f64, f64),
{
    let width = (xs.1 - xs.0).abs().max(f64::MIN_POSITIVE);
    let inner_cfg = IntegrationConfig {
        abs_tol: 0.1 * cfg.abs_tol / width,
        rel_tol: 0.1 * cfg.rel_tol,
        ..*cfg
    };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_err = RefCell::new(0.0f64);
    let inner_evals = RefCell::new(0usize);
    let outer = integrate_1d(
        |x| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            match integrate_1d(|y| f(x, y), y_bounds(x), &inner_cfg) {
                Ok(q) => {
                    let mut e = inner_err.borrow_mut();
                    *e = e.max(q.error);
                    *inner_evals.borrow_mut() += q.evaluations;
                    q.value
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        xs,
        cfg,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(Quadrature {
        value: outer.value,
        error: outer.error + width * inner_err.into_inner(),
        evaluations: inner_evals.into_inner(),
    })
}
