//! Locally stationary long-memory models: tvARFIMA(q, d, r) and tvFGN.
//!
//! A model exposes its generalized spectral density
//! `f(u, lambda) = |1 - e^{-i lambda}|^{-2 d(u)} f*(u, lambda)` and a
//! time-domain moving-average representation of its `p`-th difference.
//! Paths are drawn by applying the frozen-`u` filter at every `t` to a
//! single seeded noise stream, so a path and its tangent at `u` share the
//! same innovations.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Number of points of the `u` grid on which curve constraints are checked.
pub const CHECK_GRID: usize = 1025;

/// Default MA truncation `N`.
pub const DEFAULT_TRUNCATION: usize = 4096;

fn check_grid() -> impl Iterator<Item = f64> {
    (0..CHECK_GRID).map(|i| i as f64 / (CHECK_GRID - 1) as f64)
}

/// A real parameter as a function of rescaled time `u in [0, 1]`.
#[derive(Clone)]
pub enum ParamCurve {
    Constant(f64),
    /// `start + amplitude * (1 - cos(pi u / 2))`.
    CosineRamp { start: f64, amplitude: f64 },
    /// Linear interpolation through `(u, value)` knots sorted by `u`;
    /// constant beyond the outer knots.
    PiecewiseLinear(Vec<(f64, f64)>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ParamCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamCurve::Constant(c) => write!(f, "Constant({c})"),
            ParamCurve::CosineRamp { start, amplitude } => {
                write!(f, "CosineRamp {{ start: {start}, amplitude: {amplitude} }}")
            }
            ParamCurve::PiecewiseLinear(k) => write!(f, "PiecewiseLinear({k:?})"),
            ParamCurve::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl ParamCurve {
    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        ParamCurve::Custom(Arc::new(f))
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::config("piecewise-linear curve needs at least one knot"));
        }
        if knots.iter().any(|(u, v)| !u.is_finite() || !v.is_finite()) {
            return Err(Error::config("piecewise-linear knots must be finite"));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::config("piecewise-linear knots must have increasing u"));
        }
        Ok(ParamCurve::PiecewiseLinear(knots))
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            ParamCurve::Constant(c) => *c,
            ParamCurve::CosineRamp { start, amplitude } => start + amplitude * (1.0 - (PI * u / 2.0).cos()),
            ParamCurve::PiecewiseLinear(knots) => {
                let i = knots.partition_point(|&(x, _)| x <= u);
                if i == 0 {
                    knots[0].1
                } else if i == knots.len() {
                    knots[i - 1].1
                } else {
                    let (u0, v0) = knots[i - 1];
                    let (u1, v1) = knots[i];
                    v0 + (v1 - v0) * (u - u0) / (u1 - u0)
                }
            }
            ParamCurve::Custom(f) => f(u),
        }
    }

    /// True when the curve is known to be constant without sampling it.
    pub fn is_constant(&self) -> bool {
        match self {
            ParamCurve::Constant(_) => true,
            ParamCurve::CosineRamp { amplitude, .. } => *amplitude == 0.0,
            ParamCurve::PiecewiseLinear(k) => k.iter().all(|&(_, v)| v == k[0].1),
            ParamCurve::Custom(_) => false,
        }
    }

    /// `(min, max)` over the check grid.
    pub fn range(&self) -> (f64, f64) {
        check_grid()
            .map(|u| self.eval(u))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Largest difference quotient over consecutive check-grid points.
    pub fn lipschitz_estimate(&self) -> f64 {
        let h = 1.0 / (CHECK_GRID - 1) as f64;
        let vals: Vec<f64> = check_grid().map(|u| self.eval(u)).collect();
        vals.windows(2).map(|w| (w[1] - w[0]).abs() / h).fold(0.0, f64::max)
    }
}

impl From<f64> for ParamCurve {
    fn from(c: f64) -> Self {
        ParamCurve::Constant(c)
    }
}

/// Memory parameter curve `u -> d(u)`.
#[derive(Debug, Clone)]
pub struct MemoryCurve {
    curve: ParamCurve,
    declared_range: (f64, f64),
    lipschitz_hint: f64,
}

impl MemoryCurve {
    pub fn new(curve: ParamCurve) -> Result<Self> {
        let declared_range = curve.range();
        if !declared_range.0.is_finite() || !declared_range.1.is_finite() {
            return Err(Error::config("memory curve must be finite on [0, 1]"));
        }
        let lipschitz_hint = curve.lipschitz_estimate();
        Ok(MemoryCurve {
            curve,
            declared_range,
            lipschitz_hint,
        })
    }

    pub fn constant(d: f64) -> Result<Self> {
        Self::new(ParamCurve::Constant(d))
    }

    /// `d(u) = (1 - cos(pi u / 2)) / 3`.
    pub fn cosine_ramp() -> Self {
        Self::new(ParamCurve::CosineRamp {
            start: 0.0,
            amplitude: 1.0 / 3.0,
        })
        .expect("finite curve")
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.curve.eval(u)
    }

    pub fn curve(&self) -> &ParamCurve {
        &self.curve
    }

    pub fn declared_range(&self) -> (f64, f64) {
        self.declared_range
    }

    pub fn lipschitz_hint(&self) -> f64 {
        self.lipschitz_hint
    }
}

/// Innovation distribution. Every variant has mean 0 and variance 1.
#[derive(Clone, Default)]
pub enum Noise {
    #[default]
    Gaussian,
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    Uniform,
    /// Caller-supplied i.i.d. draw; must be centered with unit variance.
    Custom(Arc<dyn Fn(&mut ChaCha8Rng) -> f64 + Send + Sync>),
}

impl fmt::Debug for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Noise::Gaussian => f.write_str("Gaussian"),
            Noise::Uniform => f.write_str("Uniform"),
            Noise::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Noise {
    /// `len` innovations from the stream seeded by `seed`.
    pub fn draw(&self, seed: u64, len: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            Noise::Gaussian => (0..len).map(|_| StandardNormal.sample(&mut rng)).collect(),
            Noise::Uniform => {
                let a = 3f64.sqrt();
                (0..len).map(|_| a * (2.0 * rng.random::<f64>() - 1.0)).collect()
            }
            Noise::Custom(f) => (0..len).map(|_| f(&mut rng)).collect(),
        }
    }
}

/// Time-domain filter `Y_t = sum_i coeffs[i] * eps_{t + lead - i}`.
///
/// Causal filters have `lead = 0`, so `coeffs[k]` multiplies `eps_{t-k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Taps {
    pub lead: usize,
    pub coeffs: Vec<f64>,
}

impl Taps {
    /// Number of past lags covered.
    pub fn lag(&self) -> usize {
        self.coeffs.len() - 1 - self.lead
    }

    /// Estimated fraction of the filter energy lost by truncation, from the
    /// power-law decay of the last octave of taps.
    pub fn tail_mass(&self) -> f64 {
        let energy: f64 = self.coeffs.iter().map(|c| c * c).sum();
        if energy == 0.0 {
            return 0.0;
        }
        let side_tail = |end: f64, mid: f64, n: usize| -> f64 {
            if n < 8 || end == 0.0 {
                return 0.0;
            }
            if mid == 0.0 {
                return f64::INFINITY;
            }
            // |c_k| ~ C k^a  =>  sum_{k>n} c_k^2 ~ c_n^2 n / (-2a - 1)
            let a = (end.abs() / mid.abs()).log2();
            let s = -2.0 * a - 1.0;
            if s <= 0.0 {
                f64::INFINITY
            } else {
                end * end * n as f64 / s
            }
        };
        let n = self.lag();
        let past = side_tail(self.coeffs[self.coeffs.len() - 1], self.coeffs[self.lead + n / 2], n);
        let future = side_tail(self.coeffs[0], self.coeffs[self.lead - self.lead / 2], self.lead);
        (past + future) / energy
    }
}

/// A locally stationary model with a time-varying linear representation.
pub trait LocalModel: Send + Sync {
    /// Short identifier recorded on simulated paths.
    fn tag(&self) -> String;

    fn differencing_order(&self) -> usize;

    /// `d(u)`.
    fn memory(&self, u: f64) -> f64;

    /// Short-memory part `f*(u, lambda)`.
    fn smooth_part(&self, u: f64, lambda: f64) -> f64;

    /// True when no parameter depends on `u`.
    fn is_time_invariant(&self) -> bool;

    /// Frozen-`u` filter of the `p`-th difference with `n` past lags.
    fn taps(&self, u: f64, n: usize) -> Result<Taps>;

    /// Filter evaluator for many `u`; override when a per-call [`Self::taps`]
    /// is expensive.
    fn tap_plan(&self, n: usize) -> Result<Box<dyn Fn(f64) -> Taps + Sync + '_>> {
        self.taps(0.5, n)?;
        Ok(Box::new(move |u| self.taps(u, n).expect("validated model")))
    }
}

/// `f(u, lambda) = |1 - e^{-i lambda}|^{-2 d(u)} f*(u, lambda)`.
pub fn local_spectral_density<M: LocalModel + ?Sized>(model: &M, u: f64, lambda: f64) -> Result<f64> {
    let d = model.memory(u);
    if lambda == 0.0 {
        return match d {
            d if d > 0.0 => Err(Error::domain(format!("f(u, 0) is infinite for d(u) = {d} > 0"))),
            d if d < 0.0 => Ok(0.0),
            _ => Ok(model.smooth_part(u, 0.0)),
        };
    }
    let g = 2.0 * (lambda / 2.0).sin().abs();
    Ok(g.powf(-2.0 * d) * model.smooth_part(u, lambda))
}

/// Fractional integration weights `pi_k(delta)`, `k < n`, of `(1 - z)^{-delta}`.
pub fn fractional_weights(delta: f64, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n);
    let mut c = 1.0;
    for k in 0..n {
        w.push(c);
        c *= (k as f64 + delta) / (k as f64 + 1.0);
    }
    w
}

/// Reflection-coefficient test for `1 - sum phi_k z^k != 0` on `|z| <= 1`.
pub fn is_causal(phi: &[f64]) -> bool {
    let mut a = phi.to_vec();
    while let Some(&k) = a.last() {
        if !(k.abs() < 1.0) {
            return false;
        }
        let m = a.len();
        let den = 1.0 - k * k;
        a = (0..m - 1).map(|i| (a[i] + k * a[m - 2 - i]) / den).collect();
    }
    true
}

/// tvARFIMA(q, d, r) model with `p`-times integrated representation.
#[derive(Debug, Clone)]
pub struct TvArfimaModel {
    memory: MemoryCurve,
    ar: Vec<ParamCurve>,
    ma: Vec<ParamCurve>,
    sigma: ParamCurve,
    p: usize,
}

/// Builder for [`TvArfimaModel`]; validation happens in [`Self::build`].
#[derive(Debug, Clone)]
pub struct TvArfimaBuilder {
    model: TvArfimaModel,
}

impl TvArfimaBuilder {
    pub fn ar(mut self, phi: Vec<ParamCurve>) -> Self {
        self.model.ar = phi;
        self
    }

    pub fn ma(mut self, theta: Vec<ParamCurve>) -> Self {
        self.model.ma = theta;
        self
    }

    pub fn sigma(mut self, sigma: impl Into<ParamCurve>) -> Self {
        self.model.sigma = sigma.into();
        self
    }

    pub fn differencing(mut self, p: usize) -> Self {
        self.model.p = p;
        self
    }

    pub fn build(self) -> Result<TvArfimaModel> {
        let m = self.model;
        let (_, d_max) = m.memory.declared_range();
        if d_max >= m.p as f64 + 0.5 {
            return Err(Error::domain(format!(
                "d(u) reaches {d_max}, must stay below p + 1/2 = {}",
                m.p as f64 + 0.5
            )));
        }
        let mut phi = vec![0.0; m.ar.len()];
        for u in check_grid() {
            let s = m.sigma.eval(u);
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::config(format!("sigma({u}) = {s} is not positive")));
            }
            for (x, c) in phi.iter_mut().zip(&m.ar) {
                *x = c.eval(u);
            }
            if !is_causal(&phi) {
                return Err(Error::config(format!("AR polynomial has a root in the unit disk at u = {u}")));
            }
            if m.ma.iter().any(|c| !c.eval(u).is_finite()) {
                return Err(Error::config(format!("MA coefficient not finite at u = {u}")));
            }
        }
        Ok(m)
    }
}

impl TvArfimaModel {
    pub fn builder(memory: MemoryCurve) -> TvArfimaBuilder {
        TvArfimaBuilder {
            model: TvArfimaModel {
                memory,
                ar: Vec::new(),
                ma: Vec::new(),
                sigma: ParamCurve::Constant(1.0),
                p: 0,
            },
        }
    }

    /// Cosine-ramp memory, `phi_1 = 0.8`, `sigma = 1`, `p = 0`.
    pub fn cosine_ramp_ar1() -> Self {
        Self::builder(MemoryCurve::cosine_ramp())
            .ar(vec![ParamCurve::Constant(0.8)])
            .build()
            .expect("valid model")
    }

    pub fn memory_curve(&self) -> &MemoryCurve {
        &self.memory
    }

    pub fn ar_at(&self, u: f64) -> Vec<f64> {
        self.ar.iter().map(|c| c.eval(u)).collect()
    }

    pub fn ma_at(&self, u: f64) -> Vec<f64> {
        self.ma.iter().map(|c| c.eval(u)).collect()
    }

    pub fn sigma_at(&self, u: f64) -> f64 {
        self.sigma.eval(u)
    }

    /// Hölder exponent of `f*` at frequency zero.
    pub fn smoothness_exponent(&self) -> f64 {
        2.0
    }

    /// MA(inf) weights of the frozen ARFIMA(q, d(u) - p, r), without scale.
    fn impulse_response(&self, u: f64, n: usize) -> Result<Vec<f64>> {
        let delta = self.memory(u) - self.p as f64;
        if delta >= 0.5 {
            return Err(Error::domain(format!(
                "d(u) - p = {delta} >= 1/2: the MA weights are not square summable"
            )));
        }
        let mut psi = fractional_weights(delta, n);
        let theta = self.ma_at(u);
        if !theta.is_empty() {
            for k in (1..n).rev() {
                psi[k] += theta
                    .iter()
                    .enumerate()
                    .take_while(|(i, _)| *i < k)
                    .map(|(i, t)| t * psi[k - i - 1])
                    .sum::<f64>();
            }
        }
        let phi = self.ar_at(u);
        for k in 1..n {
            let mut acc = psi[k];
            for (i, &ph) in phi.iter().enumerate().take(k) {
                acc += ph * psi[k - i - 1];
            }
            psi[k] = acc;
        }
        Ok(psi)
    }
}

/// First `n_taps` Fourier coefficients of the frozen transfer function
/// `A(u, .)`, i.e. the MA weights scaled by `sigma(u) / sqrt(2 pi)`.
pub fn ma_coefficients(model: &TvArfimaModel, u: f64, n_taps: usize) -> Result<Vec<f64>> {
    if n_taps == 0 {
        return Err(Error::config("n_taps must be at least 1"));
    }
    let scale = model.sigma_at(u) / (2.0 * PI).sqrt();
    let mut psi = model.impulse_response(u, n_taps)?;
    psi.iter_mut().for_each(|c| *c *= scale);
    Ok(psi)
}

fn poly_on_circle(coeffs: &[f64], sign: f64, lambda: f64) -> Complex64 {
    // 1 + sign * sum_k c_k e^{-i k lambda}
    let mut acc = Complex64::new(1.0, 0.0);
    for (k, &c) in coeffs.iter().enumerate() {
        acc += sign * c * Complex64::from_polar(1.0, -((k + 1) as f64) * lambda);
    }
    acc
}

impl LocalModel for TvArfimaModel {
    fn tag(&self) -> String {
        format!("tvarfima({},d,{};p={})", self.ar.len(), self.ma.len(), self.p)
    }

    fn differencing_order(&self) -> usize {
        self.p
    }

    fn memory(&self, u: f64) -> f64 {
        self.memory.eval(u)
    }

    fn smooth_part(&self, u: f64, lambda: f64) -> f64 {
        let s = self.sigma_at(u);
        let num = poly_on_circle(&self.ma_at(u), 1.0, lambda).norm_sqr();
        let den = poly_on_circle(&self.ar_at(u), -1.0, lambda).norm_sqr();
        s * s / (2.0 * PI) * num / den
    }

    fn is_time_invariant(&self) -> bool {
        self.memory.curve().is_constant()
            && self.sigma.is_constant()
            && self.ar.iter().chain(&self.ma).all(ParamCurve::is_constant)
    }

    fn taps(&self, u: f64, n: usize) -> Result<Taps> {
        let s = self.sigma_at(u);
        let mut coeffs = self.impulse_response(u, n + 1)?;
        coeffs.iter_mut().for_each(|c| *c *= s);
        Ok(Taps { lead: 0, coeffs })
    }
}

/// `f_FBM(lambda; H)` with the lattice sum truncated at `|k| <= terms` plus a
/// midpoint Euler-Maclaurin estimate of the remainder.
pub fn fbm_smooth_part(lambda: f64, hurst: f64, terms: usize) -> f64 {
    let s = 2.0 * hurst + 1.0;
    if lambda == 0.0 {
        return 1.0;
    }
    let two_pi = 2.0 * PI;
    let g = 2.0 * (lambda / 2.0).sin().abs();
    let mut sum = 0.0;
    for k in (1..=terms).rev() {
        let x = two_pi * k as f64;
        sum += (x + lambda).abs().powf(-s) + (x - lambda).abs().powf(-s);
    }
    let edge = two_pi * (terms as f64 + 0.5);
    sum += ((edge + lambda).powf(1.0 - s) + (edge - lambda).powf(1.0 - s)) / (two_pi * (s - 1.0));
    sum -= s * two_pi / 24.0 * ((edge + lambda).powf(-s - 1.0) + (edge - lambda).powf(-s - 1.0));
    (g / lambda.abs()).powf(s) + g.powf(s) * sum
}

/// Default lattice truncation for [`fbm_smooth_part`].
pub const FBM_LATTICE_TERMS: usize = 256;

/// tvFGN(H): `p = 0`, `d(u) = H(u) - 1/2`, `f* = f_FBM(.; H(u))`.
#[derive(Debug, Clone)]
pub struct TvFgnModel {
    hurst: ParamCurve,
    lattice_terms: usize,
    grid_nodes: usize,
}

impl TvFgnModel {
    pub fn new(hurst: impl Into<ParamCurve>) -> Result<Self> {
        let hurst = hurst.into();
        for u in check_grid() {
            let h = hurst.eval(u);
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::config(format!("H({u}) = {h} is outside (0, 1)")));
            }
        }
        Ok(TvFgnModel {
            hurst,
            lattice_terms: FBM_LATTICE_TERMS,
            grid_nodes: 129,
        })
    }

    pub fn with_lattice_terms(mut self, terms: usize) -> Self {
        self.lattice_terms = terms.max(1);
        self
    }

    /// Number of `u` nodes on which filters of a time-varying `H` are
    /// computed before linear interpolation.
    pub fn with_grid_nodes(mut self, nodes: usize) -> Self {
        self.grid_nodes = nodes.max(2);
        self
    }

    pub fn hurst(&self, u: f64) -> f64 {
        self.hurst.eval(u)
    }

    /// Two-sided filter for a fixed `H`, `n` taps on each side.
    fn fgn_taps(&self, h: f64, n: usize) -> Taps {
        let d = h - 0.5;
        // Fourier coefficients of sqrt(2 pi f_FBM), smooth and periodic
        let m = 8192usize;
        let half = m / 4;
        let mut planner = FftPlanner::<f64>::new();
        let mut buf: Vec<Complex64> = (0..m)
            .map(|i| {
                let lam = 2.0 * PI * i as f64 / m as f64;
                let lam = if lam > PI { lam - 2.0 * PI } else { lam };
                Complex64::new((2.0 * PI * fbm_smooth_part(lam, h, self.lattice_terms)).sqrt(), 0.0)
            })
            .collect();
        planner.plan_fft_forward(m).process(&mut buf);
        let b: Vec<f64> = (0..=half).map(|k| buf[k].re / m as f64).collect();

        // symmetric coefficients of |1 - e^{-i lambda}|^{-d}
        let reach = n + half;
        let mut c = Vec::with_capacity(reach + 1);
        let mut ck = statrs::function::gamma::ln_gamma(1.0 - d) - 2.0 * statrs::function::gamma::ln_gamma(1.0 - d / 2.0);
        ck = ck.exp();
        for k in 0..=reach {
            if k > 0 {
                ck *= (k as f64 - 1.0 + d / 2.0) / (k as f64 - d / 2.0);
            }
            c.push(ck);
        }
        let c_at = |k: i64| c[k.unsigned_abs() as usize];
        let b_at = |k: i64| b[k.unsigned_abs() as usize];

        // a_k = sum_m b_m c_{k-m}; symmetric in k
        let size = (2 * reach + 1 + 2 * half + 1).next_power_of_two();
        let mut fc = vec![Complex64::new(0.0, 0.0); size];
        let mut fb = vec![Complex64::new(0.0, 0.0); size];
        for (i, k) in (-(reach as i64)..=reach as i64).enumerate() {
            fc[i].re = c_at(k);
        }
        for (i, k) in (-(half as i64)..=half as i64).enumerate() {
            fb[i].re = b_at(k);
        }
        let fwd = planner.plan_fft_forward(size);
        fwd.process(&mut fc);
        fwd.process(&mut fb);
        for (x, y) in fc.iter_mut().zip(&fb) {
            *x *= y;
        }
        planner.plan_fft_inverse(size).process(&mut fc);
        // index of a_0 in the full convolution
        let zero = reach + half;
        let a0: Vec<f64> = (0..=n).map(|k| fc[zero + k].re / size as f64).collect();
        let mut coeffs = Vec::with_capacity(2 * n + 1);
        coeffs.extend(a0.iter().rev());
        coeffs.extend(&a0[1..]);
        Taps { lead: n, coeffs }
    }
}

impl LocalModel for TvFgnModel {
    fn tag(&self) -> String {
        "tvfgn".into()
    }

    fn differencing_order(&self) -> usize {
        0
    }

    fn memory(&self, u: f64) -> f64 {
        self.hurst(u) - 0.5
    }

    fn smooth_part(&self, u: f64, lambda: f64) -> f64 {
        fbm_smooth_part(lambda, self.hurst(u), self.lattice_terms)
    }

    fn is_time_invariant(&self) -> bool {
        self.hurst.is_constant()
    }

    fn taps(&self, u: f64, n: usize) -> Result<Taps> {
        Ok(self.fgn_taps(self.hurst(u), n))
    }

    fn tap_plan(&self, n: usize) -> Result<Box<dyn Fn(f64) -> Taps + Sync + '_>> {
        if self.is_time_invariant() {
            let t = self.fgn_taps(self.hurst(0.0), n);
            return Ok(Box::new(move |_| t.clone()));
        }
        let g = self.grid_nodes;
        let nodes: Vec<Taps> = (0..g)
            .map(|i| self.fgn_taps(self.hurst(i as f64 / (g - 1) as f64), n))
            .collect();
        Ok(Box::new(move |u| {
            let x = u.clamp(0.0, 1.0) * (g - 1) as f64;
            let i = (x.floor() as usize).min(g - 2);
            let w = x - i as f64;
            let coeffs = nodes[i]
                .coeffs
                .iter()
                .zip(&nodes[i + 1].coeffs)
                .map(|(a, b)| (1.0 - w) * a + w * b)
                .collect();
            Taps { lead: n, coeffs }
        }))
    }
}

/// Truncation and driver settings for path simulation.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    /// Past lags `N` of the MA truncation.
    pub truncation: usize,
    pub noise: Noise,
    /// Threshold for [`SimulatedPath::truncation_warning`].
    pub tail_tolerance: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            truncation: DEFAULT_TRUNCATION,
            noise: Noise::Gaussian,
            tail_tolerance: 1e-2,
        }
    }
}

/// A simulated series `X_{1,T}, .., X_{T,T}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub values: Vec<f64>,
    pub seed: u64,
    pub model_tag: String,
    /// Largest estimated relative energy of the truncated filter tail.
    pub tail_mass: f64,
    tail_tolerance: f64,
}

impl SimulatedPath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when the MA truncation drops more than the configured share of
    /// the filter energy.
    pub fn truncation_warning(&self) -> bool {
        self.tail_mass > self.tail_tolerance
    }
}

/// Linear convolution `(a * b)[i]` for `i in lo..lo + len`.
fn fft_convolve_range(a: &[f64], b: &[f64], lo: usize, len: usize) -> Vec<f64> {
    let size = (a.len() + b.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fa.resize(size, Complex64::new(0.0, 0.0));
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fb.resize(size, Complex64::new(0.0, 0.0));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    planner.plan_fft_inverse(size).process(&mut fa);
    let scale = 1.0 / size as f64;
    fa[lo..lo + len].iter().map(|z| z.re * scale).collect()
}

fn apply_filter(coeffs: &[f64], eps: &[f64], s: usize) -> f64 {
    // sum_i c_i eps[s + C - 1 - i]
    let c = coeffs.len();
    coeffs
        .iter()
        .zip(eps[s..s + c].iter().rev())
        .map(|(a, b)| a * b)
        .sum()
}

fn integrate(values: &mut [f64], p: usize) {
    for _ in 0..p {
        let mut acc = 0.0;
        for v in values.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
}

/// Simulate `T` samples of `model` from the noise stream of `seed`.
///
/// Innovations `eps_{1-N}, .., eps_{T+lead}` are drawn in order from one
/// stream, so any two models sharing `N` and `lead` see the same noise.
pub fn simulate<M: LocalModel + ?Sized>(model: &M, len: usize, seed: u64, cfg: &SimulationConfig) -> Result<SimulatedPath> {
    if len == 0 {
        return Err(Error::config("series length must be at least 1"));
    }
    let n = cfg.truncation;
    let tf = len as f64;
    let (values, tail_mass) = if model.is_time_invariant() {
        let taps = model.taps(0.5, n)?;
        let eps = cfg.noise.draw(seed, n + len + taps.lead);
        let c = taps.coeffs.len();
        let nonzero = taps.coeffs.iter().rposition(|&x| x != 0.0).map_or(0, |i| i + 1);
        let vals = if nonzero <= 64 || len <= 64 {
            (0..len).map(|s| apply_filter(&taps.coeffs, &eps, s)).collect()
        } else {
            fft_convolve_range(&taps.coeffs, &eps, c - 1, len)
        };
        (vals, taps.tail_mass())
    } else {
        let plan = model.tap_plan(n)?;
        let probe = plan(0.0);
        let eps = cfg.noise.draw(seed, n + len + probe.lead);
        let vals = (0..len)
            .map(|s| apply_filter(&plan((s + 1) as f64 / tf).coeffs, &eps, s))
            .collect();
        let tail = (0..=8).map(|i| plan(i as f64 / 8.0).tail_mass()).fold(0.0, f64::max);
        (vals, tail)
    };
    let mut values = values;
    integrate(&mut values, model.differencing_order());
    Ok(SimulatedPath {
        values,
        seed,
        model_tag: model.tag(),
        tail_mass,
        tail_tolerance: cfg.tail_tolerance,
    })
}

/// Simulate a tvARFIMA path.
pub fn simulate_tvarfima(model: &TvArfimaModel, len: usize, seed: u64, cfg: &SimulationConfig) -> Result<SimulatedPath> {
    simulate(model, len, seed, cfg)
}

/// A model with every parameter curve frozen at `u`.
#[derive(Debug, Clone)]
pub struct Frozen<'a, M: ?Sized> {
    inner: &'a M,
    u: f64,
}

impl<'a, M: LocalModel + ?Sized> Frozen<'a, M> {
    pub fn new(inner: &'a M, u: f64) -> Self {
        Frozen { inner, u }
    }
}

impl<M: LocalModel + ?Sized> LocalModel for Frozen<'_, M> {
    fn tag(&self) -> String {
        format!("{}@u={}", self.inner.tag(), self.u)
    }

    fn differencing_order(&self) -> usize {
        self.inner.differencing_order()
    }

    fn memory(&self, _u: f64) -> f64 {
        self.inner.memory(self.u)
    }

    fn smooth_part(&self, _u: f64, lambda: f64) -> f64 {
        self.inner.smooth_part(self.u, lambda)
    }

    fn is_time_invariant(&self) -> bool {
        true
    }

    fn taps(&self, _u: f64, n: usize) -> Result<Taps> {
        if self.inner.is_time_invariant() {
            // same evaluation point as the unfrozen path, for bitwise coupling
            self.inner.taps(0.5, n)
        } else {
            self.inner.taps(self.u, n)
        }
    }
}

/// Tangent stationary path at `u`, driven by the same noise as
/// [`simulate`] with the same seed.
pub fn simulate_tangent<M: LocalModel + ?Sized>(
    model: &M,
    u: f64,
    len: usize,
    seed: u64,
    cfg: &SimulationConfig,
) -> Result<SimulatedPath> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::config(format!("u = {u} is outside [0, 1]")));
    }
    simulate(&Frozen::new(model, u), len, seed, cfg)
}
