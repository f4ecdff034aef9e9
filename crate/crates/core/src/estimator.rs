//! Local log-regression estimator of `d(u)`, its plug-in confidence
//! intervals, and the rate-based tuning advisor.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::asymptotics::{AsymptoticConfig, Asymptotics};
use crate::quad::compensated_sum;
use crate::scalogram::{dwt, local_scalogram, max_feasible_scale, LocalScalogram};
use crate::wavelet::{build_bank, coefficient_count, WaveletSpec};
use crate::weights::WeightScheme;
use crate::{Error, Result};

/// Step of the `d` grid on which the limit variance is tabulated.
pub const VARIANCE_GRID_STEP: f64 = 0.01;

/// Truncation tolerance used for the limit variance behind confidence intervals.
pub const CI_TOLERANCE: f64 = 1e-3;

/// Smallest effective window `T_L b` accepted by the tuning advisor.
pub const MIN_WINDOW: f64 = 16.0;

/// Regression weights `w_0..w_ell` with `sum w_i = 0` and `2 ln 2 sum i w_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionWeights {
    w: Vec<f64>,
}

impl RegressionWeights {
    /// Ordinary least-squares slope weights `(i - ell/2) / (2 ln 2 sum_m (m - ell/2)^2)`.
    pub fn ols(ell: usize) -> Result<Self> {
        if ell == 0 {
            return Err(Error::config("ell must be at least 1: a slope needs two scales"));
        }
        let mid = ell as f64 / 2.0;
        let ss: f64 = (0..=ell).map(|m| (m as f64 - mid).powi(2)).sum();
        let denom = 2.0 * std::f64::consts::LN_2 * ss;
        Ok(RegressionWeights {
            w: (0..=ell).map(|i| (i as f64 - mid) / denom).collect(),
        })
    }

    /// User-supplied weights, checked against both constraints to 1e-10.
    pub fn custom(w: Vec<f64>) -> Result<Self> {
        if w.len() < 2 || w.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("regression weights need at least two finite entries"));
        }
        let (sum, slope) = constraint_values(&w);
        if sum.abs() > 1e-10 || (slope - 1.0).abs() > 1e-10 {
            return Err(Error::config(format!(
                "regression weights violate the constraints: sum = {sum:e}, 2 ln2 sum i w_i = {slope}"
            )));
        }
        Ok(RegressionWeights { w })
    }

    pub fn ell(&self) -> usize {
        self.w.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    /// `(sum w_i, 2 ln 2 sum i w_i)`.
    pub fn constraints(&self) -> (f64, f64) {
        constraint_values(&self.w)
    }
}

fn constraint_values(w: &[f64]) -> (f64, f64) {
    let sum = compensated_sum(w.iter().copied());
    let slope = 2.0 * std::f64::consts::LN_2 * compensated_sum(w.iter().enumerate().map(|(i, x)| i as f64 * x));
    (sum, slope)
}

/// `u_i = i / n` for `i = 0..=n`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

/// Scales, weights, evaluation points and confidence level of an estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationPlan {
    lowest: usize,
    weights: RegressionWeights,
    scheme: WeightScheme,
    grid: Vec<f64>,
    level: f64,
}

impl EstimationPlan {
    /// Scales `lowest..=lowest + ell` with OLS weights, a 64-point grid and level 0.95.
    pub fn new(lowest: usize, ell: usize, scheme: WeightScheme) -> Result<Self> {
        if lowest == 0 {
            return Err(Error::config("the lowest scale L must be at least 1"));
        }
        Ok(EstimationPlan {
            lowest,
            weights: RegressionWeights::ols(ell)?,
            scheme,
            grid: uniform_grid(64),
            level: 0.95,
        })
    }

    pub fn with_weights(mut self, weights: RegressionWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.iter().any(|u| !(0.0..=1.0).contains(u)) {
            return Err(Error::config("u grid must be non-empty and inside [0, 1]"));
        }
        self.grid = grid;
        Ok(self)
    }

    pub fn with_level(mut self, level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::config(format!("confidence level {level} must lie in (0, 1)")));
        }
        self.level = level;
        Ok(self)
    }

    pub fn lowest(&self) -> usize {
        self.lowest
    }

    pub fn ell(&self) -> usize {
        self.weights.ell()
    }

    pub fn highest(&self) -> usize {
        self.lowest + self.ell()
    }

    pub fn scales(&self) -> Vec<usize> {
        (self.lowest..=self.highest()).collect()
    }

    pub fn weights(&self) -> &RegressionWeights {
        &self.weights
    }

    pub fn scheme(&self) -> &WeightScheme {
        &self.scheme
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    /// Checks that `len` samples reach scale `L + ell`.
    pub fn check_feasible(&self, spec: &WaveletSpec, len: usize) -> Result<()> {
        let feasible = max_feasible_scale(spec.base_len(), len);
        if self.highest() > feasible {
            return Err(Error::ScaleDepth {
                requested: self.highest(),
                max_feasible: feasible,
                len,
            });
        }
        Ok(())
    }
}

/// Reasons an individual `u` carries no estimate or no interval.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EstimateFlags {
    /// `u` is outside the weight family's admissible range.
    pub boundary: bool,
    /// Some scalogram value used by the regression is zero or not finite.
    pub zero_scalogram: bool,
    /// `d_hat` is outside the range where the limit variance is available.
    pub ci_unavailable: bool,
}

impl EstimateFlags {
    pub fn any(&self) -> bool {
        self.boundary || self.zero_scalogram || self.ci_unavailable
    }

    /// Compact `|`-separated label, empty when nothing is flagged.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.boundary {
            parts.push("boundary");
        }
        if self.zero_scalogram {
            parts.push("zero_scalogram");
        }
        if self.ci_unavailable {
            parts.push("ci_unavailable");
        }
        parts.join("|")
    }
}

/// Estimate at one `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalEstimate {
    pub u: f64,
    pub d_hat: Option<f64>,
    pub std_error: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub flags: EstimateFlags,
}

/// `d_hat(u)` over the plan's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEstimate {
    pub points: Vec<LocalEstimate>,
    pub scales: Vec<usize>,
    pub level: f64,
    pub scheme_tag: String,
}

impl MemoryEstimate {
    /// `(u, d_hat)` for every estimated point.
    pub fn estimated(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().filter_map(|p| p.d_hat.map(|d| (p.u, d)))
    }
}

/// `d_hat(u) = sum_i w_i log sigma^2_{L+i}(u)` at every grid point of the
/// scalogram. The sum is formed from log-ratios to scale `L`, which is the
/// same quantity because the weights sum to zero.
pub fn estimate_d(scalogram: &LocalScalogram, plan: &EstimationPlan) -> Result<MemoryEstimate> {
    let scales = plan.scales();
    let rows = scales
        .iter()
        .map(|&j| {
            scalogram
                .row(j)
                .ok_or_else(|| Error::config(format!("scalogram has no scale {j}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let w = plan.weights().values();
    let points = scalogram
        .grid()
        .iter()
        .enumerate()
        .map(|(iu, &u)| {
            let mut p = LocalEstimate {
                u,
                d_hat: None,
                std_error: None,
                ci: None,
                flags: EstimateFlags::default(),
            };
            let cells: Option<Vec<f64>> = rows.iter().map(|r| r[iu]).collect();
            match cells {
                Some(v) if plan.scheme().admits(u) => {
                    if v.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
                        p.flags.zero_scalogram = true;
                    } else {
                        let d = compensated_sum(w.iter().zip(&v).skip(1).map(|(wi, s)| wi * (s / v[0]).ln()));
                        p.d_hat = Some(d);
                    }
                }
                _ => p.flags.boundary = true,
            }
            p
        })
        .collect();
    Ok(MemoryEstimate {
        points,
        scales,
        level: plan.level(),
        scheme_tag: scalogram.scheme_tag().to_string(),
    })
}

/// Limit variance tabulated on a `d` grid of step [`VARIANCE_GRID_STEP`]
/// and read back by linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceCache {
    start: f64,
    values: Vec<Option<f64>>,
}

impl VarianceCache {
    /// Tabulate over `[d_lo, d_hi]`, widened to whole grid steps and clipped
    /// to the open domain of the limit variance. Nodes where the variance
    /// cannot be certified are left empty.
    pub fn build(asym: &Asymptotics, plan: &EstimationPlan, d_lo: f64, d_hi: f64) -> Result<Self> {
        if !(d_lo <= d_hi) {
            return Err(Error::config(format!("empty d range [{d_lo}, {d_hi}]")));
        }
        let v_table = Asymptotics::limit_v_table(plan.scheme(), plan.ell());
        let (lo, hi) = variance_domain(asym.spec());
        let first = ((d_lo.max(lo) / VARIANCE_GRID_STEP).floor() as i64).max((lo / VARIANCE_GRID_STEP).floor() as i64 + 1);
        let last = ((d_hi.min(hi) / VARIANCE_GRID_STEP).ceil() as i64).min((hi / VARIANCE_GRID_STEP).ceil() as i64 - 1);
        let w = plan.weights().values();
        let values = (first..=last.max(first))
            .into_par_iter()
            .map(|k| {
                let d = k as f64 * VARIANCE_GRID_STEP;
                let sigma = asym.sigma_matrix_with(d, &v_table).ok()?;
                asym.variance_from(d, &sigma, w).ok()
            })
            .collect();
        Ok(VarianceCache {
            start: first as f64 * VARIANCE_GRID_STEP,
            values,
        })
    }

    /// Interpolated limit variance, `None` outside the tabulated range.
    pub fn get(&self, d: f64) -> Option<f64> {
        let x = (d - self.start) / VARIANCE_GRID_STEP;
        if !(x >= 0.0) {
            return None;
        }
        let i = x.floor() as usize;
        let t = x - i as f64;
        match (self.values.get(i).copied().flatten(), self.values.get(i + 1).copied().flatten()) {
            (Some(a), _) if t == 0.0 => Some(a),
            (Some(a), Some(b)) => Some(a + t * (b - a)),
            _ => None,
        }
    }

    pub fn range(&self) -> (f64, f64) {
        (
            self.start,
            self.start + (self.values.len().saturating_sub(1)) as f64 * VARIANCE_GRID_STEP,
        )
    }
}

/// Open range of `d` on which `K(d)` and `Sigma` are finite.
pub fn variance_domain(spec: &WaveletSpec) -> (f64, f64) {
    let (lo, _) = spec.memory_domain();
    (lo, spec.vanishing_moments() as f64 + 0.25)
}

/// Two-sided Gaussian quantile `z_{1 - (1 - level)/2}`.
pub fn normal_quantile(level: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - (1.0 - level) / 2.0)
}

/// Attach `d_hat +- z sqrt(delta_{L,T} V(d_hat))` to every estimated point.
/// `len` is the length of the analysed series.
pub fn confidence_interval(
    estimate: &mut MemoryEstimate,
    plan: &EstimationPlan,
    spec: &WaveletSpec,
    len: usize,
    cache: &VarianceCache,
) -> Result<()> {
    let tl = coefficient_count(spec.base_len(), plan.lowest(), len);
    let z = normal_quantile(plan.level());
    for p in estimate.points.iter_mut() {
        let Some(d) = p.d_hat else { continue };
        let delta = match plan.scheme().weights(p.u, tl) {
            Ok(w) => w.delta(),
            Err(Error::Boundary(_)) => {
                p.flags.boundary = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        match cache.get(d) {
            Some(v) if v > 0.0 => {
                let se = (delta * v).sqrt();
                p.std_error = Some(se);
                p.ci = Some((d - z * se, d + z * se));
            }
            _ => p.flags.ci_unavailable = true,
        }
    }
    estimate.level = plan.level();
    Ok(())
}

/// Asymptotics evaluator with the tolerance used for confidence intervals.
pub fn interval_asymptotics(spec: WaveletSpec) -> Asymptotics {
    let cfg = AsymptoticConfig {
        tolerance: CI_TOLERANCE,
        ..AsymptoticConfig::default()
    };
    Asymptotics::with_config(spec, cfg).expect("interval configuration is valid")
}

/// Run the pipeline on a series: DWT, local scalogram, regression and,
/// when `asym` is given, confidence intervals.
pub fn estimate_series(
    series: &[f64],
    spec: WaveletSpec,
    plan: &EstimationPlan,
    asym: Option<&Asymptotics>,
) -> Result<(LocalScalogram, MemoryEstimate)> {
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::data("series contains non-finite values"));
    }
    plan.check_feasible(&spec, series.len())?;
    let bank = build_bank(spec, plan.highest())?;
    let pyramid = dwt(series, &bank, plan.highest())?;
    let scalogram = local_scalogram(&pyramid, plan.scheme(), plan.grid(), &plan.scales())?;
    let mut estimate = estimate_d(&scalogram, plan)?;
    if let Some(asym) = asym {
        let (lo, hi) = estimate
            .estimated()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, d)| (a.min(d), b.max(d)));
        if lo <= hi {
            let cache = VarianceCache::build(asym, plan, lo, hi)?;
            confidence_interval(&mut estimate, plan, &spec, series.len(), &cache)?;
        }
    }
    Ok((scalogram, estimate))
}

/// Output of [`advise_tuning`].
#[derive(Debug, Clone, PartialEq)]
pub struct TuningAdvice {
    pub lowest: usize,
    pub bandwidth: f64,
    /// `2 / (3 + 6 beta - 2 d + 2 p)`: `2^L` grows like `T` to this power.
    pub scale_exponent: f64,
    /// Exponent of `T` in the bandwidth rate.
    pub bandwidth_exponent: f64,
    /// Exponent of `T` in the resulting error rate.
    pub error_exponent: f64,
    /// True when the rate-optimal pair was adjusted to keep `T_L b >= 16`.
    pub clamped: bool,
}

/// Rate-balancing choice of `(L, b)` for a series of length `len`.
pub fn advise_tuning(len: usize, d_prior: f64, beta: f64, p: usize) -> Result<TuningAdvice> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::config(format!("beta = {beta} must lie in (0, 2]")));
    }
    let pf = p as f64;
    if !(d_prior < pf + 0.5) {
        return Err(Error::config(format!("d_prior = {d_prior} must be below p + 1/2 = {}", pf + 0.5)));
    }
    let t = len as f64;
    let den = 3.0 + 6.0 * beta - 2.0 * d_prior + 2.0 * pf;
    let scale_exponent = 2.0 / den;
    let bandwidth_exponent = (2.0 * d_prior - 2.0 * pf - 2.0 * beta - 1.0) / den;
    let error_exponent = -2.0 * beta / (3.0 + 6.0 * beta + 2.0 * (pf - d_prior));
    let mut lowest = ((t.log2() * scale_exponent).round() as usize).max(1);
    let mut bandwidth = t.powf(bandwidth_exponent).min(1.0);
    let mut clamped = false;
    loop {
        let tl = t / 2f64.powi(lowest as i32);
        if tl * bandwidth >= MIN_WINDOW {
            break;
        }
        clamped = true;
        if MIN_WINDOW / tl <= 1.0 {
            bandwidth = MIN_WINDOW / tl;
            break;
        }
        if lowest == 1 {
            return Err(Error::config(format!(
                "series of length {len} is too short for a window of {MIN_WINDOW} coefficients"
            )));
        }
        lowest -= 1;
    }
    Ok(TuningAdvice {
        lowest,
        bandwidth,
        scale_exponent,
        bandwidth_exponent,
        error_exponent,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate, MemoryCurve, SimulationConfig, TvArfimaModel};

    fn geometric(plan: &EstimationPlan, d: f64, c: f64) -> LocalScalogram {
        let grid = plan.grid().to_vec();
        let rows = plan
            .scales()
            .iter()
            .map(|&j| grid.iter().map(|_| Some(c * 2f64.powf(2.0 * d * j as f64))).collect())
            .collect();
        LocalScalogram::from_rows(plan.scales(), grid, rows, "rectangle", 0.25).unwrap()
    }

    #[test]
    fn ols_weights_example_and_constraints() {
        let w = RegressionWeights::ols(2).unwrap();
        let want = 1.0 / (4.0 * std::f64::consts::LN_2);
        assert!((w.values()[0] + want).abs() < 1e-15 && w.values()[1] == 0.0 && (w.values()[2] - want).abs() < 1e-15);
        assert!((want - 0.360674).abs() < 1e-6);
        for ell in 1..=8 {
            let (s, slope) = RegressionWeights::ols(ell).unwrap().constraints();
            assert!(s.abs() <= 1e-14 && (slope - 1.0).abs() <= 1e-14, "ell={ell}");
        }
        assert!(RegressionWeights::ols(0).is_err());
    }

    #[test]
    fn custom_weights_are_validated() {
        assert!(RegressionWeights::custom(vec![-0.5, 0.5]).is_err());
        let ok = RegressionWeights::custom(vec![-1.0 / (2.0 * std::f64::consts::LN_2), 1.0 / (2.0 * std::f64::consts::LN_2)]);
        assert!(ok.is_ok());
    }

    #[test]
    fn exact_slope_recovery() {
        for ell in [1, 2, 4] {
            let plan = EstimationPlan::new(2, ell, WeightScheme::rectangle(0.25).unwrap())
                .unwrap()
                .with_grid(vec![0.5])
                .unwrap();
            for d in [-0.4, 0.0, 0.3, 0.7, 1.2] {
                let est = estimate_d(&geometric(&plan, d, 3.7), &plan).unwrap();
                let got = est.points[0].d_hat.unwrap();
                assert!((got - d).abs() < 1e-12, "ell={ell} d={d}: {got}");
            }
        }
    }

    #[test]
    fn zero_and_boundary_cells_are_flagged() {
        let plan = EstimationPlan::new(1, 2, WeightScheme::rectangle(0.25).unwrap())
            .unwrap()
            .with_grid(vec![0.05, 0.5])
            .unwrap();
        let mut s = geometric(&plan, 0.2, 1.0);
        let rows = plan
            .scales()
            .iter()
            .map(|&j| vec![s.get(j, 0), if j == 2 { Some(0.0) } else { s.get(j, 1) }])
            .collect();
        s = LocalScalogram::from_rows(plan.scales(), plan.grid().to_vec(), rows, "rectangle", 0.25).unwrap();
        let est = estimate_d(&s, &plan).unwrap();
        assert!(est.points[0].flags.boundary && est.points[0].d_hat.is_none());
        assert!(est.points[1].flags.zero_scalogram && est.points[1].d_hat.is_none());
        assert_eq!(est.points[1].flags.label(), "zero_scalogram");
    }

    #[test]
    fn missing_scale_is_a_plan_error() {
        let plan = EstimationPlan::new(3, 2, WeightScheme::rectangle(0.25).unwrap()).unwrap();
        let other = EstimationPlan::new(1, 2, WeightScheme::rectangle(0.25).unwrap()).unwrap();
        assert!(matches!(estimate_d(&geometric(&other, 0.1, 1.0), &plan), Err(Error::Config(_))));
    }

    #[test]
    fn scaling_and_trend_invariance() {
        let model = TvArfimaModel::builder(MemoryCurve::constant(0.3).unwrap()).build().unwrap();
        let x = simulate(&model, 4096, 11, &SimulationConfig::default()).unwrap().values;
        let spec = WaveletSpec::daubechies(2).unwrap();
        let plan = EstimationPlan::new(2, 2, WeightScheme::rectangle(0.25).unwrap())
            .unwrap()
            .with_grid(uniform_grid(16))
            .unwrap();
        let (_, base) = estimate_series(&x, spec, &plan, None).unwrap();
        let pow2: Vec<f64> = x.iter().map(|v| v * 1024.0).collect();
        let (_, e) = estimate_series(&pow2, spec, &plan, None).unwrap();
        assert_eq!(base.points, e.points);
        for c in [1e-6, 1e6] {
            let y: Vec<f64> = x.iter().map(|v| v * c).collect();
            let (_, e) = estimate_series(&y, spec, &plan, None).unwrap();
            for (a, b) in base.estimated().zip(e.estimated()) {
                assert!((a.1 - b.1).abs() < 1e-12);
            }
        }
        let n = x.len() as f64;
        let trended: Vec<f64> = x.iter().enumerate().map(|(t, v)| v + 3.0 + 5.0 * t as f64 / n).collect();
        let (_, e) = estimate_series(&trended, spec, &plan, None).unwrap();
        for (a, b) in base.estimated().zip(e.estimated()) {
            assert!((a.1 - b.1).abs() < 1e-8);
        }
    }

    #[test]
    fn variance_cache_interpolates_and_rejects_outside() {
        let spec = WaveletSpec::daubechies(2).unwrap();
        let asym = interval_asymptotics(spec);
        let plan = EstimationPlan::new(2, 2, WeightScheme::rectangle(0.25).unwrap()).unwrap();
        let cache = VarianceCache::build(&asym, &plan, 0.195, 0.214).unwrap();
        assert_eq!(cache.range(), (0.19, 0.22));
        let direct = asym.estimator_variance(0.2, plan.weights().values(), plan.scheme()).unwrap();
        assert!((cache.get(0.2).unwrap() / direct - 1.0).abs() < 1e-12);
        let mid = cache.get(0.205).unwrap();
        let exact = asym.estimator_variance(0.205, plan.weights().values(), plan.scheme()).unwrap();
        assert!((mid / exact - 1.0).abs() < 1e-3);
        assert!(cache.get(0.3).is_none() && cache.get(0.1).is_none());
    }

    #[test]
    fn interval_width_and_level_monotonicity() {
        let model = TvArfimaModel::builder(MemoryCurve::constant(0.2).unwrap()).build().unwrap();
        let x = simulate(&model, 8192, 5, &SimulationConfig::default()).unwrap().values;
        let spec = WaveletSpec::daubechies(2).unwrap();
        let asym = interval_asymptotics(spec);
        let mut widths = Vec::new();
        for level in [0.8, 0.9, 0.95, 0.99] {
            let plan = EstimationPlan::new(2, 2, WeightScheme::rectangle(0.25).unwrap())
                .unwrap()
                .with_grid(vec![0.5])
                .unwrap()
                .with_level(level)
                .unwrap();
            let (_, e) = estimate_series(&x, spec, &plan, Some(&asym)).unwrap();
            let p = e.points[0];
            let (lo, hi) = p.ci.unwrap();
            let d = p.d_hat.unwrap();
            assert!(lo <= d && d <= hi);
            let z = normal_quantile(level);
            assert!(((hi - lo) - 2.0 * z * p.std_error.unwrap()).abs() < 1e-12);
            widths.push(hi - lo);
        }
        assert!(widths.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn quantile_matches_known_values() {
        assert!((normal_quantile(0.95) - 1.959_963_984_540_054).abs() < 1e-9);
        assert!((normal_quantile(0.99) - 2.575_829_303_548_901).abs() < 1e-9);
    }

    #[test]
    fn advisor_examples() {
        let a = advise_tuning(1 << 20, 0.0, 2.0, 0).unwrap();
        assert!((a.scale_exponent - 2.0 / 15.0).abs() < 1e-15);
        assert_eq!(a.lowest, 3);
        assert!(!a.clamped);
        let e = advise_tuning(1 << 20, 0.4, 2.0, 0).unwrap();
        assert!((e.error_exponent + 4.0 / 14.2).abs() < 1e-12);
        assert!((e.error_exponent + 0.2817).abs() < 1e-4);
        // approaching p + 1/2 raises L
        let ls: Vec<usize> = [0.0, 0.2, 0.45, 0.49]
            .iter()
            .map(|&d| advise_tuning(1 << 40, d, 0.3, 0).unwrap().lowest)
            .collect();
        assert!(ls.windows(2).all(|w| w[1] >= w[0]) && ls[3] > ls[0], "{ls:?}");
        assert!(advise_tuning(20, 0.0, 2.0, 0).is_err());
        assert!(advise_tuning(1000, 0.6, 2.0, 0).is_err());
        let c = advise_tuning(512, 0.0, 2.0, 0).unwrap();
        assert!(c.bandwidth * 512.0 / 2f64.powi(c.lowest as i32) >= MIN_WINDOW - 1e-9);
    }

    #[test]
    fn plan_feasibility() {
        let spec = WaveletSpec::daubechies(2).unwrap();
        let plan = EstimationPlan::new(3, 4, WeightScheme::rectangle(0.25).unwrap()).unwrap();
        assert!(matches!(plan.check_feasible(&spec, 100), Err(Error::ScaleDepth { .. })));
        assert!(plan.check_feasible(&spec, 4096).is_ok());
        assert!(EstimationPlan::new(0, 2, WeightScheme::rectangle(0.25).unwrap()).is_err());
        assert!(plan.clone().with_level(1.0).is_err());
    }
}
