//! Wavelet coefficient pyramid and local scalograms.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sim::{simulate_tangent, LocalModel, SimulationConfig};
use crate::wavelet::{coefficient_count, dot, WaveletBank, MAX_ORDER};
use crate::weights::{recursive_rho, WeightScheme};

/// Detail coefficients `W_{j,k}` for `j = 1..=J`, `k < T_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    len: usize,
    details: Vec<Vec<f64>>,
}

impl WaveletPyramid {
    /// Length `T` of the analysed series.
    pub fn source_len(&self) -> usize {
        self.len
    }

    /// Deepest scale `J`.
    pub fn max_scale(&self) -> usize {
        self.details.len()
    }

    /// Coefficients at scale `j >= 1`.
    pub fn coefficients(&self, j: usize) -> &[f64] {
        &self.details[j - 1]
    }

    /// `T_j`.
    pub fn count(&self, j: usize) -> usize {
        self.details[j - 1].len()
    }
}

/// Deepest scale with at least one coefficient for `len` samples.
pub fn max_feasible_scale(base_len: usize, len: usize) -> usize {
    (1..64).take_while(|&j| coefficient_count(base_len, j, len) >= 1).last().unwrap_or(0)
}

fn check_depth(bank: &WaveletBank, len: usize, depth: usize) -> Result<()> {
    if depth == 0 {
        return Err(Error::config("at least one scale is required"));
    }
    let feasible = max_feasible_scale(bank.spec().base_len(), len);
    if depth > feasible {
        return Err(Error::ScaleDepth {
            requested: depth,
            max_feasible: feasible,
            len,
        });
    }
    if depth > bank.max_scale() {
        return Err(Error::config(format!(
            "scale {depth} exceeds the bank depth {}",
            bank.max_scale()
        )));
    }
    Ok(())
}

/// High-pass output on one window, applied as `M` first differences
/// followed by the cofactor taps so that polynomials of degree below `M`
/// give exact zeros whenever their differences are exact.
fn factored_detail(cofactor: &[f64], moments: usize, window: &[f64]) -> f64 {
    let mut buf = [0.0; 2 * MAX_ORDER];
    let n = window.len();
    buf[..n].copy_from_slice(window);
    for o in 0..moments {
        for i in 1..n - o {
            buf[i - 1] -= buf[i];
        }
    }
    dot(cofactor, &buf[..cofactor.len()])
}

/// Valid-mode DWT by the pyramid recursion.
pub fn dwt(series: &[f64], bank: &WaveletBank, depth: usize) -> Result<WaveletPyramid> {
    check_depth(bank, series.len(), depth)?;
    let g = bank.spec().low_pass();
    let l0 = g.len();
    let r = bank.spec().high_pass_cofactor();
    let m = bank.spec().vanishing_moments();
    let mut details = Vec::with_capacity(depth);
    let mut approx = series.to_vec();
    for _ in 0..depth {
        let n = if approx.len() < l0 { 0 } else { (approx.len() - l0) / 2 + 1 };
        let d = (0..n).map(|k| factored_detail(&r, m, &approx[2 * k..2 * k + l0])).collect();
        let a = (0..n).map(|k| dot(g, &approx[2 * k..2 * k + l0])).collect();
        details.push(d);
        approx = a;
    }
    Ok(WaveletPyramid {
        len: series.len(),
        details,
    })
}

/// DWT by direct correlation with each scale's detail filter.
pub fn dwt_direct(series: &[f64], bank: &WaveletBank, depth: usize) -> Result<WaveletPyramid> {
    check_depth(bank, series.len(), depth)?;
    let details = (1..=depth)
        .map(|j| {
            let f = bank.filter(j).expect("depth checked").taps();
            let step = 1usize << j;
            (0..bank.coefficient_count(j, series.len()))
                .map(|k| dot(f, &series[step * k..step * k + f.len()]))
                .collect()
        })
        .collect();
    Ok(WaveletPyramid {
        len: series.len(),
        details,
    })
}

/// `T_j^{-1} sum_k W_{j,k}^2`.
pub fn global_scalogram(pyramid: &WaveletPyramid, j: usize) -> f64 {
    let w = pyramid.coefficients(j);
    w.iter().map(|x| x * x).sum::<f64>() / w.len() as f64
}

/// `sigma^2_{j,T}(u)` on a `(j, u)` grid. Cells whose weights cannot be
/// formed at `u` (boundary) are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalScalogram {
    scales: Vec<usize>,
    grid: Vec<f64>,
    values: Vec<Vec<Option<f64>>>,
    scheme_tag: String,
    bandwidth: f64,
}

impl LocalScalogram {
    /// Assemble from per-scale rows over `grid`.
    pub fn from_rows(
        scales: Vec<usize>,
        grid: Vec<f64>,
        values: Vec<Vec<Option<f64>>>,
        scheme_tag: impl Into<String>,
        bandwidth: f64,
    ) -> Result<Self> {
        if values.len() != scales.len() || values.iter().any(|r| r.len() != grid.len()) {
            return Err(Error::config("scalogram rows do not match the scale and u grids"));
        }
        Ok(LocalScalogram {
            scales,
            grid,
            values,
            scheme_tag: scheme_tag.into(),
            bandwidth,
        })
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn scheme_tag(&self) -> &str {
        &self.scheme_tag
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Row of scale `j` over the grid.
    pub fn row(&self, j: usize) -> Option<&[Option<f64>]> {
        self.scales.iter().position(|&s| s == j).map(|i| self.values[i].as_slice())
    }

    /// Value at scale `j` and grid index `iu`.
    pub fn get(&self, j: usize, iu: usize) -> Option<f64> {
        self.row(j).and_then(|r| r[iu])
    }
}

fn check_scales(pyramid: &WaveletPyramid, scales: &[usize]) -> Result<()> {
    match scales.iter().find(|&&j| j == 0 || j > pyramid.max_scale()) {
        Some(&j) => Err(Error::config(format!(
            "scale {j} is not in the pyramid (1..={})",
            pyramid.max_scale()
        ))),
        None => Ok(()),
    }
}

/// `sigma_t = e^{-1/bt} sigma_{t-1} + W_t^2`, the unnormalized recursive
/// scalogram after each coefficient.
fn forgetting_sums(w: &[f64], bt: f64) -> Vec<f64> {
    let r = (-1.0 / bt).exp();
    let mut s = 0.0;
    w.iter()
        .map(|x| {
            s = r * s + x * x;
            s
        })
        .collect()
}

fn recursive_row(w: &[f64], b: f64, grid: &[f64]) -> Vec<Option<f64>> {
    let tj = w.len();
    let bt = b * tj as f64;
    let sums = forgetting_sums(w, bt);
    grid.iter()
        .map(|&u| {
            if !(u > 0.0 && u <= 1.0) {
                return None;
            }
            let n = ((u * tj as f64).floor() as usize).min(tj);
            (n >= 1).then(|| sums[n - 1] / recursive_rho(n, bt))
        })
        .collect()
}

/// Local scalogram `sum_k gamma_{j,T}(k) W_{j,k}^2` at every `(j, u)`.
///
/// Recursive weights are evaluated through the forgetting recursion, which
/// is algebraically the explicit weighted sum.
pub fn local_scalogram(
    pyramid: &WaveletPyramid,
    scheme: &WeightScheme,
    grid: &[f64],
    scales: &[usize],
) -> Result<LocalScalogram> {
    check_scales(pyramid, scales)?;
    let values = scales
        .par_iter()
        .map(|&j| {
            let w = pyramid.coefficients(j);
            if scheme.is_recursive() {
                return Ok(recursive_row(w, scheme.bandwidth(), grid));
            }
            grid.iter()
                .map(|&u| match scheme.weights(u, w.len()) {
                    Ok(g) => Ok(Some(g.weighted_squares(w))),
                    Err(Error::Boundary(_)) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    LocalScalogram::from_rows(scales.to_vec(), grid.to_vec(), values, scheme.tag(), scheme.bandwidth())
}

struct Level {
    buf: Vec<f64>,
    received: usize,
}

/// Online recursive scalogram.
///
/// Samples are pushed one at a time; every coefficient whose support is
/// complete is folded into `sigma_{j,t}` immediately, and the value at each
/// requested `u` is captured when index `[u T_j] - 1` is reached.
pub struct StreamingScalogram {
    low: &'static [f64],
    cofactor: Vec<f64>,
    moments: usize,
    levels: Vec<Level>,
    scales: Vec<usize>,
    grid: Vec<f64>,
    bandwidth: f64,
    len: usize,
    pushed: usize,
    // per tracked scale
    counts: Vec<usize>,
    tjs: Vec<usize>,
    decay: Vec<f64>,
    sigma: Vec<f64>,
    targets: Vec<Vec<usize>>,
    captured: Vec<Vec<Option<f64>>>,
}

impl StreamingScalogram {
    /// Engine for a series of known length `len`, tracking `scales` at the
    /// rescaled times in `grid`.
    pub fn new(bank: &WaveletBank, scales: &[usize], bandwidth: f64, len: usize, grid: &[f64]) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::config(format!("bandwidth {bandwidth} must be positive")));
        }
        let depth = scales.iter().copied().max().ok_or_else(|| Error::config("no scales requested"))?;
        if scales.contains(&0) {
            return Err(Error::config("scales start at 1"));
        }
        check_depth(bank, len, depth)?;
        let base = bank.spec().base_len();
        let mut decay = Vec::new();
        let mut targets = Vec::new();
        let mut tjs = Vec::new();
        for &j in scales {
            let tj = coefficient_count(base, j, len);
            tjs.push(tj);
            decay.push((-1.0 / (bandwidth * tj as f64)).exp());
            targets.push(
                grid.iter()
                    .map(|&u| {
                        if u > 0.0 && u <= 1.0 {
                            ((u * tj as f64).floor() as usize).min(tj)
                        } else {
                            0
                        }
                    })
                    .collect(),
            );
        }
        Ok(StreamingScalogram {
            low: bank.spec().low_pass(),
            cofactor: bank.spec().high_pass_cofactor(),
            moments: bank.spec().vanishing_moments(),
            levels: (0..depth)
                .map(|_| Level {
                    buf: Vec::with_capacity(4 * base),
                    received: 0,
                })
                .collect(),
            scales: scales.to_vec(),
            grid: grid.to_vec(),
            bandwidth,
            len,
            pushed: 0,
            counts: vec![0; scales.len()],
            tjs,
            decay,
            sigma: vec![0.0; scales.len()],
            captured: vec![vec![None; grid.len()]; scales.len()],
            targets,
        })
    }

    /// Consume the next sample.
    pub fn push(&mut self, x: f64) -> Result<()> {
        if self.pushed == self.len {
            return Err(Error::data(format!("stream already holds all {} samples", self.len)));
        }
        self.pushed += 1;
        let l0 = self.low.len();
        let mut value = x;
        for j in 1..=self.levels.len() {
            let level = &mut self.levels[j - 1];
            level.buf.push(value);
            level.received += 1;
            if level.received < l0 || !(level.received - l0).is_multiple_of(2) {
                return Ok(());
            }
            let window = &level.buf[level.buf.len() - l0..];
            let detail = factored_detail(&self.cofactor, self.moments, window);
            value = dot(self.low, window);
            if level.buf.len() >= 4 * l0 {
                level.buf.drain(..level.buf.len() - l0);
            }
            if let Some(s) = self.scales.iter().position(|&t| t == j) {
                self.fold(s, detail);
            }
        }
        Ok(())
    }

    fn fold(&mut self, s: usize, w: f64) {
        self.sigma[s] = self.decay[s] * self.sigma[s] + w * w;
        self.counts[s] += 1;
        let k = self.counts[s];
        let tj = self.tjs[s];
        let bt = self.bandwidth * tj as f64;
        for (iu, &n) in self.targets[s].iter().enumerate() {
            if n == k {
                self.captured[s][iu] = Some(self.sigma[s] / recursive_rho(n, bt));
            }
        }
    }

    /// Number of coefficients folded so far at tracked scale `j`.
    pub fn emitted(&self, j: usize) -> usize {
        self.scales.iter().position(|&t| t == j).map_or(0, |s| self.counts[s])
    }

    /// Samples consumed.
    pub fn consumed(&self) -> usize {
        self.pushed
    }

    /// Largest number of samples buffered by any level.
    pub fn buffered(&self) -> usize {
        self.levels.iter().map(|l| l.buf.len()).sum()
    }

    /// Values at the requested `u`. Fails if some `u` with `[u T_j] >= 1`
    /// has not been reached by the stream yet.
    pub fn finalize(&self) -> Result<LocalScalogram> {
        for (s, row) in self.targets.iter().enumerate() {
            for (iu, &n) in row.iter().enumerate() {
                if n >= 1 && self.captured[s][iu].is_none() {
                    return Err(Error::boundary(format!(
                        "u = {} at scale {} needs {n} coefficients, only {} available",
                        self.grid[iu], self.scales[s], self.counts[s]
                    )));
                }
            }
        }
        LocalScalogram::from_rows(
            self.scales.clone(),
            self.grid.clone(),
            self.captured.clone(),
            "recursive",
            self.bandwidth,
        )
    }
}

/// Recursive scalogram of a whole series through [`StreamingScalogram`].
pub fn streaming_scalogram(
    series: &[f64],
    bank: &WaveletBank,
    scales: &[usize],
    bandwidth: f64,
    grid: &[f64],
) -> Result<LocalScalogram> {
    let mut engine = StreamingScalogram::new(bank, scales, bandwidth, series.len(), grid)?;
    for &x in series {
        engine.push(x)?;
    }
    engine.finalize()
}

/// Scalogram of the tangent path at `u` with the same weights and noise,
/// `sigma~^2_{j,T}(u)` for each scale.
#[allow(clippy::too_many_arguments)]
pub fn tangent_scalogram<M: LocalModel + ?Sized>(
    model: &M,
    u: f64,
    len: usize,
    seed: u64,
    cfg: &SimulationConfig,
    scheme: &WeightScheme,
    bank: &WaveletBank,
    scales: &[usize],
) -> Result<Vec<f64>> {
    let path = simulate_tangent(model, u, len, seed, cfg)?;
    let depth = scales.iter().copied().max().unwrap_or(0);
    let pyramid = dwt(&path.values, bank, depth)?;
    let sc = local_scalogram(&pyramid, scheme, &[u], scales)?;
    scales
        .iter()
        .map(|&j| {
            sc.get(j, 0)
                .ok_or_else(|| Error::boundary(format!("no weights at u = {u} for scale {j}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{MemoryCurve, Noise, TvArfimaModel};
    use crate::wavelet::{build_bank, WaveletSpec};
    use crate::weights::recursive_weights;

    fn bank(order: usize, depth: usize) -> WaveletBank {
        build_bank(WaveletSpec::daubechies(order).unwrap(), depth).unwrap()
    }

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        Noise::Gaussian.draw(seed, n)
    }

    #[test]
    fn pyramid_equals_direct_convolution() {
        for order in [1, 2, 4] {
            let b = bank(order, 5);
            let x = noise(1000, order as u64);
            let p = dwt(&x, &b, 5).unwrap();
            let q = dwt_direct(&x, &b, 5).unwrap();
            for j in 1..=5 {
                assert_eq!(p.count(j), b.coefficient_count(j, 1000));
                let diff = p
                    .coefficients(j)
                    .iter()
                    .zip(q.coefficients(j))
                    .map(|(a, c)| (a - c).abs())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-10, "order {order} j {j}: {diff}");
            }
        }
    }

    #[test]
    fn vanishing_moments_annihilate() {
        let b = bank(2, 4);
        let ones = vec![3.5; 300];
        let ramp: Vec<f64> = (0..300).map(|t| 2.0 + 0.25 * t as f64).collect();
        for x in [&ones, &ramp] {
            let p = dwt(x, &b, 4).unwrap();
            for j in 1..=4 {
                let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
                assert!(p.coefficients(j).iter().all(|w| w.abs() < 1e-8 * scale));
            }
        }
    }

    #[test]
    fn depth_errors_name_the_limit() {
        let b = bank(2, 10);
        let err = dwt(&noise(40, 1), &b, 6).unwrap_err();
        let feasible = max_feasible_scale(4, 40);
        assert_eq!(
            err,
            Error::ScaleDepth {
                requested: 6,
                max_feasible: feasible,
                len: 40
            }
        );
        assert!(dwt(&noise(40, 1), &b, feasible).is_ok());
    }

    #[test]
    fn coefficient_counts_follow_dyadic_law() {
        let b = bank(3, 8);
        for len in [100, 777, 4096] {
            let p = dwt(&noise(len, 2), &b, max_feasible_scale(6, len).min(8)).unwrap();
            for j in 1..=p.max_scale() {
                let ideal = len as f64 / (1u64 << j) as f64;
                let tj = p.count(j) as f64;
                assert!(tj <= ideal && tj >= ideal - 5.0, "{len} {j} {tj}");
            }
        }
    }

    #[test]
    fn wide_rectangle_gives_global_scalogram() {
        let b = bank(2, 3);
        let p = dwt(&noise(512, 3), &b, 3).unwrap();
        let scheme = WeightScheme::rectangle(1.0).unwrap();
        for j in 1..=3 {
            let tj = p.count(j);
            let w = crate::weights::kernel_weights(0.5, tj, 2.5, &crate::weights::Kernel::Rectangle).unwrap();
            let local = w.weighted_squares(p.coefficients(j));
            let global = global_scalogram(&p, j);
            assert!((local / global - 1.0).abs() < 1e-14);
        }
        assert!(local_scalogram(&p, &scheme, &[0.5], &[1, 2, 3]).is_ok());
    }

    #[test]
    fn kernel_boundary_cells_are_empty() {
        let b = bank(2, 3);
        let p = dwt(&noise(2048, 4), &b, 3).unwrap();
        let scheme = WeightScheme::rectangle(0.25).unwrap();
        let s = local_scalogram(&p, &scheme, &[-0.5, 0.5], &[1, 3]).unwrap();
        assert_eq!(s.get(1, 0), None);
        assert!(s.get(3, 1).unwrap() > 0.0);
        assert!(local_scalogram(&p, &scheme, &[0.5], &[4]).is_err());
    }

    #[test]
    fn streaming_matches_explicit_weights() {
        let b = bank(2, 6);
        let x = noise(5000, 5);
        let grid: Vec<f64> = (1..=40).map(|i| i as f64 / 40.0).collect();
        let scales = [2, 3, 4, 6];
        let s = streaming_scalogram(&x, &b, &scales, 0.1, &grid).unwrap();
        let p = dwt(&x, &b, 6).unwrap();
        let batch = local_scalogram(&p, &WeightScheme::recursive(0.1).unwrap(), &grid, &scales).unwrap();
        assert_eq!(s, batch);
        for &j in &scales {
            let w = p.coefficients(j);
            for (iu, &u) in grid.iter().enumerate() {
                let g = recursive_weights(u, w.len(), 0.1).unwrap();
                let explicit = g.weighted_squares(w);
                let got = s.get(j, iu).unwrap();
                assert!((got / explicit - 1.0).abs() < 1e-10, "{j} {u}");
            }
        }
    }

    #[test]
    fn streaming_single_coefficient_and_early_finalize() {
        let b = bank(1, 2);
        let x = noise(64, 6);
        let p = dwt(&x, &b, 2).unwrap();
        let t2 = p.count(2) as f64;
        let s = streaming_scalogram(&x, &b, &[2], 0.3, &[1.0 / t2]).unwrap();
        assert_eq!(s.get(2, 0).unwrap(), p.coefficients(2)[0].powi(2));

        let mut e = StreamingScalogram::new(&b, &[2], 0.3, 64, &[0.9]).unwrap();
        for &v in &x[..20] {
            e.push(v).unwrap();
        }
        assert!(matches!(e.finalize(), Err(Error::Boundary(_))));
    }

    #[test]
    fn streaming_memory_is_bounded() {
        let b = bank(2, 5);
        let x = noise(20_000, 7);
        let mut e = StreamingScalogram::new(&b, &[3, 5], 0.1, x.len(), &[0.5, 1.0]).unwrap();
        let mut peak = 0;
        for &v in &x {
            e.push(v).unwrap();
            peak = peak.max(e.buffered());
        }
        assert!(peak <= 5 * 4 * 4);
        assert!(e.push(0.0).is_err());
        assert_eq!(e.emitted(5), b.coefficient_count(5, x.len()));
    }

    #[test]
    fn scaling_is_quadratic() {
        let b = bank(2, 4);
        let x = noise(3000, 8);
        let grid = [0.3, 0.5, 0.7];
        let scheme = WeightScheme::rectangle(0.2).unwrap();
        let base = local_scalogram(&dwt(&x, &b, 4).unwrap(), &scheme, &grid, &[1, 4]).unwrap();
        let y: Vec<f64> = x.iter().map(|v| v * 4.0).collect();
        let scaled = local_scalogram(&dwt(&y, &b, 4).unwrap(), &scheme, &grid, &[1, 4]).unwrap();
        for j in [1, 4] {
            for iu in 0..3 {
                assert_eq!(scaled.get(j, iu).unwrap(), 16.0 * base.get(j, iu).unwrap());
            }
        }
    }

    #[test]
    fn tangent_scalogram_of_constant_model() {
        let m = TvArfimaModel::builder(MemoryCurve::constant(0.2).unwrap()).build().unwrap();
        let cfg = SimulationConfig {
            truncation: 512,
            ..Default::default()
        };
        let b = bank(2, 4);
        let scheme = WeightScheme::rectangle(0.25).unwrap();
        let tan = tangent_scalogram(&m, 0.4, 2048, 3, &cfg, &scheme, &b, &[2, 3]).unwrap();
        let path = crate::sim::simulate(&m, 2048, 3, &cfg).unwrap();
        let direct = local_scalogram(&dwt(&path.values, &b, 3).unwrap(), &scheme, &[0.4], &[2, 3]).unwrap();
        assert_eq!(tan, vec![direct.get(2, 0).unwrap(), direct.get(3, 0).unwrap()]);
    }

    #[test]
    fn constant_series_gives_exact_zero_details() {
        for order in [1, 2, 4] {
            let b = bank(order, 5);
            let x = vec![3.7; 1000];
            let p = dwt(&x, &b, 5).unwrap();
            let s = streaming_scalogram(&x, &b, &[1, 5], 0.2, &[0.5, 1.0]).unwrap();
            for j in 1..=5 {
                assert!(p.coefficients(j).iter().all(|&w| w == 0.0), "db{order} j={j}");
            }
            assert_eq!(s.get(5, 1), Some(0.0));
        }
    }
}
