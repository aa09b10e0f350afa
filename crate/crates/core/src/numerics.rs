//! Log-factorials, integer-shape gamma functions, signed series accumulation
//! and adaptive quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const TABLE_LEN: usize = 4096;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE_LEN);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..TABLE_LEN {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`.
pub fn ln_factorial(n: u32) -> f64 {
    let n = n as usize;
    if n < TABLE_LEN {
        return ln_factorial_table()[n];
    }
    // Stirling with three correction terms; the table covers every case the
    // evaluators hit, this only guards against panics.
    let x = n as f64 + 1.0;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Exact binomial coefficient as `u128`, saturating on overflow.
pub fn binomial_u128(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `k * ln(x)` with the convention `0 * ln(0) = 0`.
pub fn ln_pow(x: f64, k: u32) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * x.ln()
    }
}

/// Stable `ln(exp(a) + exp(b))`.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Regularized upper incomplete gamma `Q(n, x)` for integer shape `n >= 1`:
/// `exp(-x) * sum_{k<n} x^k / k!`.
pub fn gamma_q(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < n as f64 {
        return -gamma_p_series_ln(n, x).exp_m1();
    }
    gamma_q_sum_ln(n, x).exp()
}

/// Regularized lower incomplete gamma `P(n, x)` for integer shape `n >= 1`.
pub fn gamma_p(n: u32, x: f64) -> f64 {
    ln_gamma_p(n, x).exp()
}

/// `ln P(n, x)` with full relative precision, including the far left tail.
pub fn ln_gamma_p(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x < n as f64 + 1.0 {
        gamma_p_series_ln(n, x)
    } else {
        (-gamma_q_sum_ln(n, x).exp()).ln_1p()
    }
}

/// `ln Q(n, x)`.
pub fn ln_gamma_q(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < n as f64 {
        (-gamma_p_series_ln(n, x).exp()).ln_1p()
    } else {
        gamma_q_sum_ln(n, x)
    }
}

/// `ln` of `exp(-x) * sum_{k<n} x^k/k!`, summed in the log domain.
fn gamma_q_sum_ln(n: u32, x: f64) -> f64 {
    let lx = x.ln();
    // terms grow with k while k < x; the last one dominates
    let top = (n - 1) as f64 * lx - ln_factorial(n - 1);
    let mut s = 0.0;
    for k in 0..n {
        s += (k as f64 * lx - ln_factorial(k) - top).exp();
    }
    top + s.ln() - x
}

/// `ln` of the lower series `x^n e^-x / n! * sum_j x^j / ((n+1)...(n+j))`.
fn gamma_p_series_ln(n: u32, x: f64) -> f64 {
    let nf = n as f64;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut j = 1.0;
    loop {
        term *= x / (nf + j);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
        j += 1.0;
        if j > 100_000.0 {
            break;
        }
    }
    nf * x.ln() - x - ln_factorial(n) + sum.ln()
}

/// Gamma law with integer shape and per-unit scale, i.e. a sum of `shape`
/// iid exponentials of mean `scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLaw {
    pub shape: u32,
    pub scale: f64,
}

impl GammaLaw {
    pub fn new(shape: u32, scale: f64) -> Self {
        Self { shape, scale }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        let n = self.shape;
        if x == 0.0 {
            return if n == 1 {
                -self.scale.ln()
            } else {
                f64::NEG_INFINITY
            };
        }
        (n - 1) as f64 * x.ln() - x / self.scale - n as f64 * self.scale.ln() - ln_factorial(n - 1)
    }

    pub fn ln_cdf(&self, x: f64) -> f64 {
        ln_gamma_p(self.shape, x / self.scale)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        gamma_p(self.shape, x / self.scale)
    }

    pub fn sf(&self, x: f64) -> f64 {
        gamma_q(self.shape, x / self.scale)
    }

    pub fn mean(&self) -> f64 {
        self.shape as f64 * self.scale
    }
}

/// How a signed series is reduced to a float.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Summation {
    /// Terms added in generation order in plain floating point.
    Naive,
    /// Terms sorted by magnitude and compensated-summed after scaling by the
    /// largest magnitude.
    #[default]
    LogDomain,
}

/// Result of a signed series reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Sum of term magnitudes.
    pub abs_sum: f64,
    pub terms: usize,
}

impl SeriesValue {
    /// `sum |t| / |sum t|`; the relative error amplification of the series.
    pub fn condition(&self) -> f64 {
        if self.abs_sum == 0.0 {
            1.0
        } else {
            self.abs_sum / self.value.abs()
        }
    }
}

/// Collects sign-tracked terms as `(negative, ln |t|)`.
#[derive(Debug, Clone, Default)]
pub struct SignedSeries {
    terms: Vec<(bool, f64)>,
}

impl SignedSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_ln(&mut self, negative: bool, ln_mag: f64) {
        if ln_mag != f64::NEG_INFINITY {
            debug_assert!(!ln_mag.is_nan());
            self.terms.push((negative, ln_mag));
        }
    }

    pub fn push(&mut self, value: f64) {
        if value != 0.0 {
            self.terms.push((value < 0.0, value.abs().ln()));
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sum(&self, mode: Summation) -> SeriesValue {
        match mode {
            Summation::Naive => {
                let mut value = 0.0;
                let mut abs_sum = 0.0;
                for &(neg, l) in &self.terms {
                    let t = l.exp();
                    value += if neg { -t } else { t };
                    abs_sum += t;
                }
                SeriesValue {
                    value,
                    abs_sum,
                    terms: self.terms.len(),
                }
            }
            Summation::LogDomain => self.sum_log_domain(),
        }
    }

    fn sum_log_domain(&self) -> SeriesValue {
        if self.terms.is_empty() {
            return SeriesValue {
                value: 0.0,
                abs_sum: 0.0,
                terms: 0,
            };
        }
        let mut sorted = self.terms.clone();
        sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
        let top = sorted.last().map(|t| t.1).unwrap_or(0.0);
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut abs_sum = 0.0f64;
        for &(neg, l) in &sorted {
            let t = (l - top).exp();
            abs_sum += t;
            let x = if neg { -t } else { t };
            let s = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - s) + x;
            } else {
                comp += (x - s) + sum;
            }
            sum = s;
        }
        let scale = top.exp();
        SeriesValue {
            value: (sum + comp) * scale,
            abs_sum: abs_sum * scale,
            terms: sorted.len(),
        }
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const GK_WEIGHTS_G: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
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

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WEIGHTS_K[7];
    let mut g = fc * GK_WEIGHTS_G[3];
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        k += GK_WEIGHTS_K[i] * s;
        if i % 2 == 1 {
            g += GK_WEIGHTS_G[i / 2] * s;
        }
    }
    Segment {
        a,
        b,
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_segments: usize,
    pub initial_segments: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_segments: 4000,
            initial_segments: 16,
        }
    }
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Returns `(estimate, error_estimate)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> (f64, f64) {
    if b <= a {
        return (0.0, 0.0);
    }
    let mut heap = BinaryHeap::new();
    let n0 = opts.initial_segments.max(1);
    let w = (b - a) / n0 as f64;
    for i in 0..n0 {
        let lo = a + w * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + w };
        heap.push(gk15(&f, lo, hi));
    }
    loop {
        let (total, err) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= target || heap.len() >= opts.max_segments {
            return (total, err);
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
    }
}

/// Integrates `f` over `[0, inf)` through `x = s * u / (1 - u)`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(
    f: F,
    scale: f64,
    opts: &QuadOptions,
    what: &'static str,
) -> Result<f64> {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - u;
        let x = scale * u / one_minus;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * scale / (one_minus * one_minus)
        }
    };
    let (value, error) = integrate(g, 0.0, 1.0, opts);
    check_quadrature(value, error, opts, what)
}

pub fn check_quadrature(
    value: f64,
    error: f64,
    opts: &QuadOptions,
    what: &'static str,
) -> Result<f64> {
    // The loop stops at the segment cap; only a result far from the requested
    // tolerance is treated as a failure.
    if !value.is_finite() || error > 1e-7 * value.abs() + opts.abs_tol {
        return Err(Error::Quadrature {
            what,
            estimate: value,
            error,
        });
    }
    Ok(value)
}
