//! Localization weights `gamma_{j,T}(k)` for the local scalogram.
//!
//! Two families: two-sided kernel weights centred at `u T_j` and one-sided
//! exponentially forgetting (recursive) weights ending at `[u T_j] - 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::compensated_sum;

/// Kernel profile on `[-1/2, 1/2]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// Indicator of the closed interval `[-1/2, 1/2]`.
    Rectangle,
    /// Values on an equispaced grid over `[-1/2, 1/2]`, linearly
    /// interpolated, zero outside.
    Taps(Vec<f64>),
}

impl Kernel {
    /// Validate a custom profile: at least two finite nonnegative symmetric
    /// values, not all zero.
    pub fn from_taps(taps: Vec<f64>) -> Result<Self> {
        if taps.len() < 2 {
            return Err(Error::config("kernel needs at least two taps"));
        }
        if taps.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::config("kernel taps must be finite and nonnegative"));
        }
        let top = taps.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return Err(Error::config("kernel taps are all zero"));
        }
        let n = taps.len();
        if (0..n / 2).any(|i| (taps[i] - taps[n - 1 - i]).abs() > 1e-12 * top) {
            return Err(Error::config("kernel taps must be symmetric"));
        }
        Ok(Kernel::Taps(taps))
    }

    pub fn eval(&self, x: f64) -> f64 {
        if !(-0.5..=0.5).contains(&x) {
            return 0.0;
        }
        match self {
            Kernel::Rectangle => 1.0,
            Kernel::Taps(t) => {
                let pos = (x + 0.5) * (t.len() - 1) as f64;
                let i = (pos.floor() as usize).min(t.len() - 2);
                let w = pos - i as f64;
                (1.0 - w) * t[i] + w * t[i + 1]
            }
        }
    }

    /// `(||K||_1, ||K||_2^2, ||K||_inf)`.
    pub fn norms(&self) -> (f64, f64, f64) {
        match self {
            Kernel::Rectangle => (1.0, 1.0, 1.0),
            Kernel::Taps(t) => {
                // exact for the piecewise-linear interpolant
                let h = 1.0 / (t.len() - 1) as f64;
                let l1 = t.windows(2).map(|w| h * (w[0] + w[1]) / 2.0).sum();
                let l2 = t
                    .windows(2)
                    .map(|w| h * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]) / 3.0)
                    .sum();
                let sup = t.iter().cloned().fold(0.0, f64::max);
                (l1, l2, sup)
            }
        }
    }
}

/// Weight family.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Kernel(Kernel),
    Recursive,
}

/// A nonnegative weight vector over `k = 0..len`, stored as a dense block of
/// nonzero entries starting at `offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    len: usize,
    offset: usize,
    values: Vec<f64>,
}

impl WeightVector {
    /// Ambient length `T_j`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Values on `offset..offset + values().len()`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.values.len()
    }

    pub fn get(&self, k: usize) -> f64 {
        if self.support().contains(&k) {
            self.values[k - self.offset]
        } else {
            0.0
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &g)| (self.offset + i, g))
    }

    /// `delta = sup_k gamma(k)`.
    pub fn delta(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// `sum_k gamma(k) x_k^2` over the support; `x` is indexed from 0.
    pub fn weighted_squares(&self, x: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(&x[self.support()])
            .map(|(g, w)| g * w * w)
            .sum()
    }

    /// Dense copy of length `len`.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.len];
        d[self.support()].copy_from_slice(&self.values);
        d
    }
}

fn check_tj(tj: usize) -> Result<()> {
    if tj == 0 {
        Err(Error::boundary("no wavelet coefficients at this scale"))
    } else {
        Ok(())
    }
}

/// `gamma(k) = rho^{-1} K((u T_j - k) / (b T_j))`, normalized to sum 1.
pub fn kernel_weights(u: f64, tj: usize, b: f64, kernel: &Kernel) -> Result<WeightVector> {
    check_tj(tj)?;
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::config(format!("bandwidth {b} must be positive")));
    }
    let t = tj as f64;
    let bt = b * t;
    if bt < 2.0 {
        return Err(Error::config(format!(
            "b T_j = {bt} < 2: the window holds fewer than two coefficients"
        )));
    }
    let c = u * t;
    let lo = (c - bt / 2.0).ceil() - 1.0;
    let hi = (c + bt / 2.0).floor() + 1.0;
    let lo = lo.max(0.0) as usize;
    let hi = if hi < 0.0 { 0 } else { (hi as usize).min(tj - 1) };
    let raw: Vec<(usize, f64)> = (lo..=hi.max(lo))
        .filter(|&k| k < tj)
        .map(|k| (k, kernel.eval((c - k as f64) / bt)))
        .collect();
    let first = raw.iter().position(|&(_, g)| g > 0.0);
    let last = raw.iter().rposition(|&(_, g)| g > 0.0);
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::boundary(format!(
            "no kernel weight falls inside the series at u = {u}; drop u < b/2 or u > 1 - b/2"
        )));
    };
    let block: Vec<f64> = raw[first..=last].iter().map(|&(_, g)| g).collect();
    let rho = compensated_sum(block.iter().copied());
    Ok(WeightVector {
        len: tj,
        offset: raw[first].0,
        values: block.into_iter().map(|g| g / rho).collect(),
    })
}

/// `rho = sum_{k < n} e^{-k / bt}`.
pub fn recursive_rho(n: usize, bt: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    // (1 - r^n) / (1 - r) with r = e^{-1/bt}
    (-(n as f64) / bt).exp_m1() / (-1.0 / bt).exp_m1()
}

/// One-sided weights `gamma(k) = rho^{-1} e^{-([u T_j] - 1 - k) / (b T_j)}`
/// for `k < [u T_j]`.
pub fn recursive_weights(u: f64, tj: usize, b: f64) -> Result<WeightVector> {
    check_tj(tj)?;
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::config(format!("bandwidth {b} must be positive")));
    }
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::boundary(format!("recursive weights need u in (0, 1], got {u}")));
    }
    let n = ((u * tj as f64).floor() as usize).min(tj);
    if n < 1 {
        return Err(Error::boundary(format!(
            "u T_j = {} < 1: no coefficient precedes u",
            u * tj as f64
        )));
    }
    let bt = b * tj as f64;
    let rho = recursive_rho(n, bt);
    let values = (0..n).map(|k| (-((n - 1 - k) as f64) / bt).exp() / rho).collect();
    Ok(WeightVector { len: tj, offset: 0, values })
}

/// `delta` and `Gamma_q` for `q = 0, 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightDiagnostics {
    pub delta: f64,
    pub gamma_q: [f64; 3],
}

/// Diagnostics of `w` about `centre = T u 2^{-j}`.
pub fn diagnostics(w: &WeightVector, centre: f64) -> WeightDiagnostics {
    let moment = |q: i32| compensated_sum(w.iter().map(|(k, g)| g.abs() * (k as f64 - centre).abs().powi(q)));
    WeightDiagnostics {
        delta: w.delta(),
        gamma_q: [moment(0), moment(1), moment(2)],
    }
}

/// `Phi(lambda; i, v) = sum_l gamma(2^i l + v) e^{i l lambda}` for weights
/// `w` of scale `j - i`.
pub fn weight_fourier(w: &WeightVector, i: u32, v: usize, lambdas: &[f64]) -> Vec<Complex64> {
    let step = 1usize << i;
    assert!(v < step, "v must be below 2^i");
    let terms: Vec<(f64, f64)> = w
        .iter()
        .filter(|&(k, _)| k >= v && (k - v).is_multiple_of(step))
        .map(|(k, g)| (((k - v) / step) as f64, g))
        .collect();
    lambdas
        .iter()
        .map(|&lam| terms.iter().map(|&(l, g)| g * Complex64::from_polar(1.0, l * lam)).sum())
        .collect()
}

/// `int Phi(.; i, v) conj(Phi(.; i', v'))` evaluated exactly as
/// `2 pi sum_l gamma_a(2^i l + v) gamma_b(2^{i'} l + v')`.
pub fn conv_disc(a: &WeightVector, i: u32, v: usize, b: &WeightVector, i2: u32, v2: usize) -> f64 {
    let (sa, sb) = (1usize << i, 1usize << i2);
    // l range on which 2^i l + v lies in a's support
    let range = |w: &WeightVector, s: usize, off: usize| -> (usize, usize) {
        let r = w.support();
        let lo = r.start.saturating_sub(off).div_ceil(s);
        let hi = if r.end > off { (r.end - off).div_ceil(s) } else { 0 };
        (lo, hi)
    };
    let (alo, ahi) = range(a, sa, v);
    let (blo, bhi) = range(b, sb, v2);
    let terms = (alo.max(blo)..ahi.min(bhi)).map(|l| a.get(sa * l + v) * b.get(sb * l + v2));
    2.0 * PI * compensated_sum(terms)
}

/// Weight family with its bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    kind: WeightKind,
    bandwidth: f64,
}

/// Reference point for numerically evaluated limit constants.
const REF_TJ: usize = 100_000;
const REF_B: f64 = 0.01;

impl WeightScheme {
    pub fn new(kind: WeightKind, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth <= 1.0) {
            return Err(Error::config(format!("bandwidth {bandwidth} must lie in (0, 1]")));
        }
        Ok(WeightScheme { kind, bandwidth })
    }

    pub fn rectangle(bandwidth: f64) -> Result<Self> {
        Self::new(WeightKind::Kernel(Kernel::Rectangle), bandwidth)
    }

    pub fn recursive(bandwidth: f64) -> Result<Self> {
        Self::new(WeightKind::Recursive, bandwidth)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn is_recursive(&self) -> bool {
        matches!(self.kind, WeightKind::Recursive)
    }

    pub fn tag(&self) -> &'static str {
        match &self.kind {
            WeightKind::Kernel(Kernel::Rectangle) => "rectangle",
            WeightKind::Kernel(Kernel::Taps(_)) => "kernel",
            WeightKind::Recursive => "recursive",
        }
    }

    /// Whether `u` is inside the evaluation range of the family: two-sided
    /// kernels need `b/2 <= u <= 1 - b/2`, recursive weights `0 < u <= 1`.
    pub fn admits(&self, u: f64) -> bool {
        match self.kind {
            WeightKind::Kernel(_) => u >= self.bandwidth / 2.0 && u <= 1.0 - self.bandwidth / 2.0,
            WeightKind::Recursive => u > 0.0 && u <= 1.0,
        }
    }

    /// Weights at `u` for a scale holding `tj` coefficients.
    pub fn weights(&self, u: f64, tj: usize) -> Result<WeightVector> {
        match &self.kind {
            WeightKind::Kernel(k) => kernel_weights(u, tj, self.bandwidth, k),
            WeightKind::Recursive => recursive_weights(u, tj, self.bandwidth),
        }
    }

    /// Limit of `delta_{j,T} b T_j`.
    pub fn limit_delta_rate(&self) -> f64 {
        match &self.kind {
            WeightKind::Kernel(k) => {
                let (l1, _, sup) = k.norms();
                sup / l1
            }
            WeightKind::Recursive => 1.0,
        }
    }

    /// Limit constant `V(i, v; i', v')`.
    pub fn limit_v(&self, i: u32, v: usize, i2: u32, v2: usize) -> f64 {
        let scale = 0.5f64.powi((i + i2) as i32);
        match &self.kind {
            WeightKind::Kernel(Kernel::Rectangle) => 2.0 * PI * scale,
            WeightKind::Recursive => PI * scale,
            WeightKind::Kernel(k) => {
                let probe = WeightScheme {
                    kind: WeightKind::Kernel(k.clone()),
                    bandwidth: REF_B,
                };
                probe.numeric_v(0.5, REF_TJ, i, v, i2, v2).expect("reference point is admissible")
            }
        }
    }

    /// `delta_j^{-1} int Phi(.; i, v) conj(Phi(.; i', v'))` at finite `T_j`,
    /// with `T_{j-i} = 2^i T_j`.
    pub fn numeric_v(&self, u: f64, tj: usize, i: u32, v: usize, i2: u32, v2: usize) -> Result<f64> {
        let delta = self.weights(u, tj)?.delta();
        let a = self.weights(u, tj << i)?;
        let b = if i2 == i { a.clone() } else { self.weights(u, tj << i2)? };
        Ok(conv_disc(&a, i, v, &b, i2, v2) / delta)
    }
}
