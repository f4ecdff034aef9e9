//! Limit objects of the local log-regression estimator: the constant `K(d)`,
//! local wavelet spectra, the cross-spectral densities `D`, the covariance
//! matrix `Sigma` and the limit variance of `d_hat`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::quad::{compensated_sum, GaussRule, TanhSinhRule};
use crate::sim::{local_spectral_density, LocalModel};
use crate::wavelet::{PsiHat, WaveletBank, WaveletSpec};
use crate::weights::WeightScheme;
use crate::{Error, Result};

/// Largest scale lag `i - i'` supported by [`Asymptotics`].
pub const MAX_LAG: usize = 12;

/// Quadrature and truncation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticConfig {
    /// Gauss–Legendre points per panel.
    pub panel_nodes: usize,
    /// Lattice terms `|l| <= lattice_terms` kept in `D`.
    pub lattice_terms: usize,
    /// Dyadic bands `[pi 2^-k-1, pi 2^-k]` covering the frequency integrals.
    pub frequency_bands: usize,
    /// `K(d)` is integrated over `[2^low_octave, 2^(high_octave+1)]` (the
    /// psi-hat window) and extrapolated outside.
    pub low_octave: i32,
    pub high_octave: i32,
    /// Relative tolerance on truncation tails.
    pub tolerance: f64,
}

impl Default for AsymptoticConfig {
    fn default() -> Self {
        AsymptoticConfig {
            panel_nodes: 16,
            lattice_terms: 1024,
            frequency_bands: 24,
            low_octave: -24,
            high_octave: 12,
            tolerance: 1e-6,
        }
    }
}

impl AsymptoticConfig {
    /// Same settings with twice the quadrature nodes.
    pub fn refined(&self) -> Self {
        AsymptoticConfig {
            panel_nodes: 2 * self.panel_nodes,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.panel_nodes < 4 {
            return Err(Error::config("panel_nodes must be at least 4"));
        }
        if self.panel_nodes * self.frequency_bands < 256 {
            return Err(Error::config(format!(
                "frequency quadrature has {} nodes; at least 256 are required",
                self.panel_nodes * self.frequency_bands
            )));
        }
        if self.lattice_terms < 4 {
            return Err(Error::config("lattice_terms must be at least 4"));
        }
        if self.high_octave - self.low_octave < 8 {
            return Err(Error::config("psi-hat window must span at least 8 octaves"));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::config("tolerance must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// `int |xi|^-2d w(xi)` tabulated on dyadic bands: entries `(ln xi, weight * |psi_hat|^2)`.
struct BandTable {
    bands: Vec<Vec<(f64, f64)>>,
}

struct CrossNode {
    lambda: f64,
    weight: f64,
    // (ln |xi_l|, conj(psi_hat(xi_l)) psi_hat(2^-m xi_l)) for l = -L..=L
    terms: Vec<(f64, Complex64)>,
}

struct CrossTable {
    nodes: Vec<CrossNode>,
    // lower end of the frequency grid; [0, floor] is handled by a tail term
    floor: f64,
}

/// Evaluator of the limit objects for one wavelet.
///
/// Fourier-side tables do not depend on `d` and are built lazily once, so
/// repeated evaluations over a grid of `d` values only pay for the sums.
pub struct Asymptotics {
    spec: WaveletSpec,
    psi: PsiHat,
    cfg: AsymptoticConfig,
    gauss: OnceLock<BandTable>,
    tanh_sinh: OnceLock<BandTable>,
    cross: Vec<OnceLock<CrossTable>>,
}

impl std::fmt::Debug for Asymptotics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Asymptotics").field("spec", &self.spec).field("cfg", &self.cfg).finish()
    }
}

impl Asymptotics {
    pub fn new(spec: WaveletSpec) -> Self {
        Self::with_config(spec, AsymptoticConfig::default()).expect("default configuration is valid")
    }

    pub fn with_config(spec: WaveletSpec, cfg: AsymptoticConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Asymptotics {
            psi: PsiHat::new(&spec),
            spec,
            cfg,
            gauss: OnceLock::new(),
            tanh_sinh: OnceLock::new(),
            cross: (0..=MAX_LAG).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn spec(&self) -> &WaveletSpec {
        &self.spec
    }

    pub fn config(&self) -> &AsymptoticConfig {
        &self.cfg
    }

    fn check_domain(&self, d: f64) -> Result<()> {
        let (lo, hi) = self.spec.memory_domain();
        if !(d > lo && d < hi) {
            return Err(Error::domain(format!("d = {d} outside ({lo}, {hi})")));
        }
        Ok(())
    }

    // one period of |psi_hat|^2 in xi
    fn oscillation_period(&self) -> f64 {
        2.0 * PI / (self.spec.base_len() - 1) as f64
    }

    fn build_bands<I>(&self, nodes_on: I) -> BandTable
    where
        I: Fn(f64, f64) -> Vec<(f64, f64)> + Sync,
    {
        let bands = (self.cfg.low_octave..=self.cfg.high_octave)
            .into_par_iter()
            .map(|k| {
                let a = 2f64.powi(k);
                nodes_on(a, 2.0 * a)
                    .into_iter()
                    .map(|(xi, w)| (xi.ln(), w * self.psi.modulus_sqr(xi)))
                    .collect()
            })
            .collect();
        BandTable { bands }
    }

    fn gauss_table(&self) -> &BandTable {
        self.gauss.get_or_init(|| {
            let rule = GaussRule::new(self.cfg.panel_nodes);
            let period = self.oscillation_period();
            self.build_bands(|a, b| {
                let panels = ((b - a) / period).ceil().max(1.0) as usize;
                let h = (b - a) / panels as f64;
                (0..panels)
                    .flat_map(|p| rule.mapped(a + p as f64 * h, a + (p + 1) as f64 * h).collect::<Vec<_>>())
                    .collect()
            })
        })
    }

    fn tanh_sinh_table(&self) -> &BandTable {
        self.tanh_sinh.get_or_init(|| {
            let rule = TanhSinhRule::new(1.0 / 8.0);
            let period = 1.5 * self.oscillation_period();
            self.build_bands(|a, b| {
                let panels = ((b - a) / period).ceil().max(1.0) as usize;
                let h = (b - a) / panels as f64;
                (0..panels)
                    .flat_map(|p| rule.mapped(a + p as f64 * h, a + (p + 1) as f64 * h).collect::<Vec<_>>())
                    .collect()
            })
        })
    }

    fn k_from(&self, table: &BandTable, d: f64) -> Result<f64> {
        self.check_domain(d)?;
        let sums: Vec<f64> = table
            .bands
            .iter()
            .map(|band| compensated_sum(band.iter().map(|&(l, w)| w * (-2.0 * d * l).exp())))
            .collect();
        let m = self.spec.vanishing_moments() as f64;
        // |psi_hat|^2 ~ c xi^2M at the origin: band integrals shrink by 2^-(2M+1-2d)
        let qs = 2f64.powf(-(2.0 * m + 1.0 - 2.0 * d));
        let small = sums[0] * qs / (1.0 - qs);
        let n = sums.len();
        let q = sums[n - 1] / sums[n - 2];
        if !(q < 1.0) {
            return Err(Error::Precision {
                msg: format!("K({d}): band sums do not decay inside the psi-hat window"),
                suggestion: None,
            });
        }
        let large = sums[n - 1] * q / (1.0 - q);
        let total = 2.0 * (compensated_sum(sums.iter().copied()) + small + large);
        if 2.0 * large > 0.1 * total {
            return Err(Error::Precision {
                msg: format!(
                    "K({d}): extrapolated tail is {:.1e} of the total; raise high_octave",
                    2.0 * large / total
                ),
                suggestion: Some((self.cfg.high_octave + 4) as usize),
            });
        }
        Ok(total)
    }

    /// `K(d) = int |xi|^-2d |psi_hat(xi)|^2 dxi` (composite Gauss–Legendre).
    pub fn k_of_d(&self, d: f64) -> Result<f64> {
        self.k_from(self.gauss_table(), d)
    }

    /// `K(d)` by composite tanh-sinh on a different panel layout, as an
    /// independent check of [`Asymptotics::k_of_d`].
    pub fn k_of_d_check(&self, d: f64) -> Result<f64> {
        self.k_from(self.tanh_sinh_table(), d)
    }

    fn cross_term(&self, xi: f64, lag: usize) -> (Complex64, f64) {
        let coarse = xi / (1u64 << lag) as f64;
        (self.psi.eval(xi).conj() * self.psi.eval(coarse), coarse)
    }

    fn cross_table(&self, lag: usize) -> Result<&CrossTable> {
        if lag > MAX_LAG {
            return Err(Error::config(format!("scale lag {lag} exceeds {MAX_LAG}")));
        }
        Ok(self.cross[lag].get_or_init(|| {
            let rule = GaussRule::new(self.cfg.panel_nodes);
            let big_l = self.cfg.lattice_terms as i64;
            let bands = self.cfg.frequency_bands;
            let nodes = (0..bands)
                .into_par_iter()
                .flat_map_iter(|k| {
                    let hi = PI / 2f64.powi(k as i32);
                    rule.mapped(hi / 2.0, hi).collect::<Vec<_>>()
                })
                .map(|(lambda, weight)| {
                    let terms = (-big_l..=big_l)
                        .map(|l| {
                            let xi = lambda + 2.0 * PI * l as f64;
                            (xi.abs().ln(), self.cross_term(xi, lag).0)
                        })
                        .collect();
                    CrossNode { lambda, weight, terms }
                })
                .collect();
            CrossTable {
                nodes,
                floor: PI / 2f64.powi(bands as i32),
            }
        }))
    }

    // ratio of successive lattice octaves of the term envelope |xi|^(-2d-2 alpha)
    fn shell_ratio(&self, d: f64) -> f64 {
        2f64.powf(1.0 - 2.0 * d - 2.0 * self.spec.fourier_decay())
    }

    /// `D_{lag,v}(lambda; d)` by direct summation over `|l| <= lattice_terms`.
    pub fn cross_spectral_d(&self, lambda: f64, lag: usize, v: usize, d: f64) -> Result<Complex64> {
        self.check_domain(d)?;
        if lag > MAX_LAG || v >= 1 << lag {
            return Err(Error::config(format!("need lag <= {MAX_LAG} and v < 2^lag, got ({lag}, {v})")));
        }
        let big_l = self.cfg.lattice_terms as i64;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        let mut shell = 0.0;
        for l in -big_l..=big_l {
            let xi = lambda + 2.0 * PI * l as f64;
            if xi == 0.0 {
                continue;
            }
            let (product, coarse) = self.cross_term(xi, lag);
            let t = product * Complex64::from_polar(xi.abs().powf(-2.0 * d), -(v as f64) * coarse);
            sum += t;
            mass += t.norm();
            if 2 * l.abs() > big_l {
                shell += t.norm();
            }
        }
        let q = self.shell_ratio(d);
        let bound = shell * q / (1.0 - q);
        if bound > self.cfg.tolerance * mass {
            return Err(self.lattice_error(bound / mass, q));
        }
        Ok(sum / 2f64.powf(lag as f64 / 2.0))
    }

    fn lattice_error(&self, rel: f64, q: f64) -> Error {
        let octaves = ((rel / self.cfg.tolerance).ln() / (1.0 / q).ln()).ceil().max(1.0) as u32;
        let suggestion = self.cfg.lattice_terms.checked_shl(octaves).filter(|s| *s <= 1 << 20);
        Error::Precision {
            msg: format!(
                "lattice tail of D is {rel:.1e} relative, above {:.1e}; raise lattice_terms",
                self.cfg.tolerance
            ),
            suggestion,
        }
    }

    /// `int_{-pi}^{pi} |D_{lag,v}(lambda; d)|^2 dlambda`.
    pub fn cross_energy(&self, lag: usize, v: usize, d: f64) -> Result<f64> {
        if lag > MAX_LAG || v >= 1 << lag {
            return Err(Error::config(format!("need lag <= {MAX_LAG} and v < 2^lag, got ({lag}, {v})")));
        }
        Ok(self.cross_energies(lag, d)?[v])
    }

    /// [`Asymptotics::cross_energy`] for every `v < 2^lag`.
    pub fn cross_energies(&self, lag: usize, d: f64) -> Result<Vec<f64>> {
        self.check_domain(d)?;
        let m = self.spec.vanishing_moments() as f64;
        // |D|^2 ~ lambda^(4M - 4d) at the origin when d > M
        let s = (4.0 * (m - d) + 1.0).min(1.0);
        if s <= 0.0 {
            return Err(Error::domain(format!("|D|^2 is not integrable at 0 for d = {d} >= M + 1/4")));
        }
        let table = self.cross_table(lag)?;
        let q = self.shell_ratio(d);
        let period = 1usize << lag;
        let norm = 1.0 / period as f64;
        let big_l = self.cfg.lattice_terms as i64;
        let roots: Vec<Complex64> = (0..period)
            .map(|r| Complex64::from_polar(1.0, -2.0 * PI * r as f64 / period as f64))
            .collect();
        // per node: |D_v|^2 for each v, the squared term mass, and the error bound on each v
        let per_node: Vec<(Vec<f64>, f64, Vec<f64>)> = table
            .nodes
            .par_iter()
            .map(|node| {
                let base = Complex64::from_polar(1.0, -node.lambda / period as f64);
                let mut sums = vec![Complex64::new(0.0, 0.0); period];
                let mut shell = 0.0;
                let mut mass = 0.0;
                for (i, &(ln_xi, product)) in node.terms.iter().enumerate() {
                    let l = i as i64 - big_l;
                    let amp = product * (-2.0 * d * ln_xi).exp();
                    mass += amp.norm();
                    if 2 * l.abs() > big_l {
                        shell += amp.norm();
                    }
                    // phase e^{-i v 2^-m xi_l} = (base * root_{l mod 2^m})^v
                    let ph = base * roots[l.rem_euclid(period as i64) as usize];
                    let mut t = amp;
                    for acc in sums.iter_mut() {
                        *acc += t;
                        t *= ph;
                    }
                }
                let bound = shell * q / (1.0 - q);
                let e = sums.iter().map(|z| norm * z.norm_sqr()).collect();
                let err = sums.iter().map(|z| norm * (2.0 * z.norm() * bound + bound * bound)).collect();
                (e, norm * mass * mass, err)
            })
            .collect();
        let nearest = table
            .nodes
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.lambda.total_cmp(&b.1.lambda))
            .map(|(i, _)| i)
            .expect("table has nodes");
        // truncation is judged against the integral of the squared term mass,
        // which stays meaningful where D itself cancels to 0
        let scale = 2.0 * compensated_sum(table.nodes.iter().zip(&per_node).map(|(n, p)| n.weight * p.1));
        (0..period)
            .map(|v| {
                let body = compensated_sum(table.nodes.iter().zip(&per_node).map(|(n, p)| n.weight * p.0[v]));
                let err: f64 = 2.0 * table.nodes.iter().zip(&per_node).map(|(n, p)| n.weight * p.2[v]).sum::<f64>();
                // |D|^2 ~ c lambda^(s-1) below the floor
                let tail = table.floor * per_node[nearest].0[v] / s;
                if err > self.cfg.tolerance * scale {
                    return Err(self.lattice_error(err / scale, q));
                }
                Ok(2.0 * (body + tail))
            })
            .collect()
    }

    /// `V(0,0; m, v)` for `m = 0..=lag`, `v < 2^m`.
    pub fn limit_v_table(scheme: &WeightScheme, ell: usize) -> Vec<Vec<f64>> {
        (0..=ell)
            .map(|m| (0..1usize << m).map(|v| scheme.limit_v(0, 0, m as u32, v)).collect())
            .collect()
    }

    /// `Sigma` for regression over `ell + 1` scales, given the table of
    /// limit constants from [`Asymptotics::limit_v_table`].
    pub fn sigma_matrix_with(&self, d: f64, v_table: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let n = v_table.len();
        if n == 0 || n - 1 > MAX_LAG {
            return Err(Error::config(format!("number of regression scales must lie in 1..={}", MAX_LAG + 1)));
        }
        // energies depend only on the lag
        let lag_sums: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|m| -> Result<f64> {
                let energies = self.cross_energies(m, d)?;
                Ok(compensated_sum(v_table[m].iter().zip(energies).map(|(vv, e)| vv * e)))
            })
            .collect::<Result<_>>()?;
        let mut sigma = DMatrix::zeros(n, n);
        for i in 0..n {
            for i2 in 0..=i {
                let value = 2.0 * 2f64.powf((1.0 + 4.0 * d) * i as f64) * lag_sums[i - i2];
                sigma[(i, i2)] = value;
                sigma[(i2, i)] = value;
            }
        }
        Ok(sigma)
    }

    pub fn sigma_matrix(&self, d: f64, ell: usize, scheme: &WeightScheme) -> Result<DMatrix<f64>> {
        if ell > MAX_LAG {
            return Err(Error::config(format!("ell = {ell} exceeds {MAX_LAG}")));
        }
        self.sigma_matrix_with(d, &Self::limit_v_table(scheme, ell))
    }

    /// `K(d)^-2 sum_{i,i'} Sigma_{i,i'} 2^{-2(i+i')d} w_i w_i'`.
    pub fn variance_from(&self, d: f64, sigma: &DMatrix<f64>, w: &[f64]) -> Result<f64> {
        if w.len() != sigma.nrows() {
            return Err(Error::config(format!(
                "{} regression weights for a {}x{} covariance",
                w.len(),
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        let k = self.k_of_d(d)?;
        let scaled: Vec<f64> = w.iter().enumerate().map(|(i, wi)| wi * 2f64.powf(-2.0 * d * i as f64)).collect();
        let q = compensated_sum(
            (0..w.len()).flat_map(|i| (0..w.len()).map(move |i2| (i, i2))).map(|(i, i2)| sigma[(i, i2)] * scaled[i] * scaled[i2]),
        );
        Ok(q / (k * k))
    }

    /// Limit variance of `delta^-1/2 (d_hat - d)`.
    pub fn estimator_variance(&self, d: f64, w: &[f64], scheme: &WeightScheme) -> Result<f64> {
        if w.len() < 2 {
            return Err(Error::config("at least two regression weights are required"));
        }
        let sigma = self.sigma_matrix(d, w.len() - 1, scheme)?;
        self.variance_from(d, &sigma, w)
    }

    pub fn variance_report(&self, d: f64, w: &[f64], scheme: &WeightScheme) -> Result<VarianceReport> {
        if w.len() < 2 {
            return Err(Error::config("at least two regression weights are required"));
        }
        let sigma = self.sigma_matrix(d, w.len() - 1, scheme)?;
        let v_value = self.variance_from(d, &sigma, w)?;
        Ok(VarianceReport {
            d,
            k_value: self.k_of_d(d)?,
            sigma,
            v_value,
            scheme_tag: scheme.tag().to_string(),
            weights: w.to_vec(),
        })
    }
}

/// `K(d)`, `Sigma` and the limit variance at one value of `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub d: f64,
    pub k_value: f64,
    pub sigma: DMatrix<f64>,
    pub v_value: f64,
    pub scheme_tag: String,
    pub weights: Vec<f64>,
}

impl VarianceReport {
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.sigma.clone()).eigenvalues.min()
    }

    /// Eigenvalues are all above `-1e-10 * trace`.
    pub fn is_positive_semidefinite(&self) -> bool {
        self.min_eigenvalue() >= -1e-10 * self.sigma.trace().abs()
    }
}

/// `sigma_j^2(u) = int |H_j(lambda)|^2 f(u, lambda) dlambda` with default settings.
pub fn local_wavelet_spectrum<M: LocalModel + ?Sized>(model: &M, u: f64, j: usize, bank: &WaveletBank) -> Result<f64> {
    local_wavelet_spectrum_with(model, u, j, bank, &AsymptoticConfig::default())
}

/// [`local_wavelet_spectrum`] with explicit quadrature settings. Frequencies
/// are split into dyadic bands refined toward the singularity at 0, with
/// panels no wider than one oscillation of `|H_j|^2`.
pub fn local_wavelet_spectrum_with<M: LocalModel + ?Sized>(
    model: &M,
    u: f64,
    j: usize,
    bank: &WaveletBank,
    cfg: &AsymptoticConfig,
) -> Result<f64> {
    cfg.validate()?;
    let filter = bank
        .filter(j)
        .ok_or_else(|| Error::config(format!("scale {j} not in bank (max {})", bank.max_scale())))?;
    let d = model.memory(u);
    let m = bank.spec().vanishing_moments() as f64;
    let s = 2.0 * (m - d) + 1.0;
    if s <= 0.0 {
        return Err(Error::domain(format!(
            "|H_j|^2 f is not integrable at 0: d(u) = {d} with {m} vanishing moments"
        )));
    }
    let period = 2.0 * PI / (filter.support_length() as f64 - 1.0).max(1.0);
    let rule = GaussRule::new(cfg.panel_nodes);
    let bands = j + cfg.frequency_bands;
    let integrand = |lambda: f64| -> Result<f64> { Ok(bank.squared_gain(j, lambda) * local_spectral_density(model, u, lambda)?) };
    let parts = (0..bands)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let hi = PI / 2f64.powi(k as i32);
            let lo = hi / 2.0;
            let panels = ((hi - lo) / period).ceil().max(1.0) as usize;
            let h = (hi - lo) / panels as f64;
            let mut vals = Vec::with_capacity(panels * cfg.panel_nodes);
            for p in 0..panels {
                for (x, w) in rule.mapped(lo + p as f64 * h, lo + (p + 1) as f64 * h) {
                    vals.push(w * integrand(x)?);
                }
            }
            Ok(compensated_sum(vals))
        })
        .collect::<Result<Vec<f64>>>()?;
    let floor = PI / 2f64.powi(bands as i32);
    // integrand ~ c lambda^(s-1) below the floor
    let tail = floor * integrand(floor)? / s;
    Ok(2.0 * (compensated_sum(parts) + tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{fbm_smooth_part, MemoryCurve, TvArfimaModel, TvFgnModel};
    use crate::wavelet::build_bank;

    fn db2() -> WaveletSpec {
        WaveletSpec::daubechies(2).unwrap()
    }

    // shorter lattice for tests that sum D directly at many frequencies
    fn short_lattice() -> Asymptotics {
        let cfg = AsymptoticConfig {
            lattice_terms: 256,
            tolerance: 1e-4,
            ..AsymptoticConfig::default()
        };
        Asymptotics::with_config(db2(), cfg).unwrap()
    }

    #[test]
    fn parseval_at_zero() {
        for order in [1, 2, 3] {
            let a = Asymptotics::new(WaveletSpec::daubechies(order).unwrap());
            let k = a.k_of_d(0.0).unwrap();
            assert!((k / (2.0 * PI) - 1.0).abs() < 1e-6, "db{order}: {k}");
        }
    }

    #[test]
    fn dual_quadrature_agrees() {
        let a = Asymptotics::new(db2());
        for d in [-0.3, 0.2, 0.4, 1.0] {
            let x = a.k_of_d(d).unwrap();
            let y = a.k_of_d_check(d).unwrap();
            assert!((x / y - 1.0).abs() < 1e-5, "d={d}: {x} vs {y}");
        }
    }

    #[test]
    fn haar_k_matches_closed_form_integrand() {
        // direct integration of 16 sin^4(xi/4) xi^(-2-2d) with a fine rule
        let a = Asymptotics::new(WaveletSpec::haar());
        let d = 0.2;
        let gl = GaussRule::new(32);
        let mut direct = 0.0;
        for k in -30..17 {
            let lo = 2f64.powi(k);
            let panels = (lo / 2.0).ceil() as usize;
            direct += gl.composite(lo, 2.0 * lo, panels, |x| crate::wavelet::haar_psi_hat_sqr(x) * x.powf(-2.0 * d));
        }
        // sin^4 averages to 3/8 beyond the window
        let top = 2f64.powi(17);
        direct += 6.0 * top.powf(-1.0 - 2.0 * d) / (1.0 + 2.0 * d);
        direct *= 2.0;
        let k = a.k_of_d(d).unwrap();
        assert!((k / direct - 1.0).abs() < 1e-5, "{k} vs {direct}");
    }

    #[test]
    fn k_is_finite_across_domain_and_rejects_outside() {
        let a = Asymptotics::new(db2());
        for i in 0..=36 {
            let d = -0.4 + 0.05 * i as f64;
            let k = a.k_of_d(d).unwrap();
            assert!(k.is_finite() && k > 0.0, "d={d}");
        }
        assert!(matches!(a.k_of_d(2.5), Err(Error::Domain(_))));
        assert!(matches!(a.k_of_d(-0.85), Err(Error::Domain(_))));
    }

    #[test]
    fn flat_spectrum_gives_filter_energy() {
        let model = TvArfimaModel::builder(MemoryCurve::constant(0.0).unwrap()).build().unwrap();
        let bank = build_bank(db2(), 6).unwrap();
        for j in 1..=6 {
            let s = local_wavelet_spectrum(&model, 0.5, j, &bank).unwrap();
            let energy: f64 = bank.filter(j).unwrap().taps().iter().map(|h| h * h).sum();
            assert!((s - energy).abs() < 1e-8 * energy.max(1.0), "j={j}: {s} vs {energy}");
        }
    }

    #[test]
    fn fgn_bias_law() {
        let model = TvFgnModel::new(0.9).unwrap();
        let bank = build_bank(db2(), 9).unwrap();
        let s: Vec<f64> = (6..=9).map(|j| local_wavelet_spectrum(&model, 0.5, j, &bank).unwrap()).collect();
        for w in s.windows(2) {
            let slope = (w[1] / w[0]).log2() / 2.0;
            assert!((slope - 0.4).abs() < 0.02, "{slope}");
        }
        // and the level: 2^-2jd sigma_j^2 -> f*(0) K(d)
        let k = Asymptotics::new(db2()).k_of_d(0.4).unwrap();
        let lim = fbm_smooth_part(0.0, 0.9, 256) * k;
        let r = s[3] * 2f64.powf(-2.0 * 9.0 * 0.4) / lim;
        assert!((r - 1.0).abs() < 0.02, "{r}");
    }

    #[test]
    fn arfima_bias_decays_like_two_to_minus_two_j() {
        let d = 0.25;
        let model = TvArfimaModel::builder(MemoryCurve::constant(d).unwrap()).ar(vec![0.5.into()]).build().unwrap();
        let bank = build_bank(db2(), 10).unwrap();
        let k = Asymptotics::new(db2()).k_of_d(d).unwrap();
        let fstar0 = 1.0 / (2.0 * PI) / 0.25;
        let errs: Vec<f64> = (4..=10)
            .map(|j| {
                let s = local_wavelet_spectrum(&model, 0.5, j, &bank).unwrap();
                (s * 2f64.powf(-2.0 * j as f64 * d) / (fstar0 * k) - 1.0).abs()
            })
            .collect();
        // least-squares slope of log2 |err| against j
        let n = errs.len() as f64;
        let xs: Vec<f64> = (4..=10).map(|j| j as f64).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.log2()).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((-slope - 2.0).abs() < 0.4, "slope {slope}, errors {errs:?}");
    }

    #[test]
    fn nonintegrable_spectrum_is_rejected() {
        let model = TvArfimaModel::builder(MemoryCurve::constant(1.7).unwrap()).differencing(2).build().unwrap();
        let bank = build_bank(WaveletSpec::haar(), 3).unwrap();
        assert!(matches!(local_wavelet_spectrum(&model, 0.5, 2, &bank), Err(Error::Domain(_))));
    }

    #[test]
    fn cross_density_symmetry_and_zero_lag_integral() {
        let a = short_lattice();
        for lambda in [0.1, 0.7, 2.0, 3.1] {
            for (lag, v) in [(0, 0), (1, 1), (2, 3)] {
                let p = a.cross_spectral_d(lambda, lag, v, 0.2).unwrap();
                let n = a.cross_spectral_d(-lambda, lag, v, 0.2).unwrap();
                assert!((p - n.conj()).norm() < 1e-13 * p.norm().max(1.0), "{lambda} {lag} {v}");
            }
        }
        // integrating the zero-lag density over the circle rebuilds K(d)
        let gl = GaussRule::new(32);
        for d in [0.0, 0.3] {
            let mut total = 0.0;
            for k in 0..40 {
                let hi = PI / 2f64.powi(k);
                total += gl.integrate(hi / 2.0, hi, |x| a.cross_spectral_d(x, 0, 0, d).unwrap().re);
            }
            let k = a.k_of_d(d).unwrap();
            assert!((2.0 * total / k - 1.0).abs() < 1e-4, "d={d}: {} vs {k}", 2.0 * total);
        }
    }

    #[test]
    fn white_noise_cross_terms_vanish() {
        // orthonormal wavelet coefficients of white noise are uncorrelated across scales
        let a = Asymptotics::new(db2());
        for lambda in [0.3, 1.1, 2.9] {
            for v in 0..2 {
                let x = a.cross_spectral_d(lambda, 1, v, 0.0).unwrap();
                assert!(x.norm() < 1e-6, "{lambda} {v}: {x}");
            }
            let x = a.cross_spectral_d(lambda, 0, 0, 0.0).unwrap();
            assert!((x.re - 1.0).abs() < 1e-4 && x.im.abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn energy_matches_direct_evaluation() {
        let a = short_lattice();
        let gl = GaussRule::new(24);
        for (lag, v) in [(0, 0), (1, 1), (2, 2)] {
            let mut direct = 0.0;
            for k in 0..30 {
                let hi = PI / 2f64.powi(k);
                direct += gl.integrate(hi / 2.0, hi, |x| a.cross_spectral_d(x, lag, v, 0.2).unwrap().norm_sqr());
            }
            direct *= 2.0;
            let e = a.cross_energy(lag, v, 0.2).unwrap();
            assert!(e > 0.0);
            assert!((e / direct - 1.0).abs() < 1e-6, "{lag},{v}: {e} vs {direct}");
        }
    }

    #[test]
    fn white_noise_sigma_matches_independent_coefficients() {
        // white noise, rectangle weights: Var(delta^-1/2 sigma_hat^2_i) -> 2 * 2^i / f*(0)^2
        let a = Asymptotics::new(db2());
        let scheme = WeightScheme::rectangle(0.2).unwrap();
        let sigma = a.sigma_matrix(0.0, 2, &scheme).unwrap();
        let f0 = 1.0 / (2.0 * PI);
        for i in 0..3 {
            let want = 2.0 * 2f64.powi(i as i32);
            assert!((sigma[(i, i)] * f0 * f0 / want - 1.0).abs() < 1e-5, "{i}: {}", sigma[(i, i)]);
        }
        assert!(sigma[(1, 0)].abs() < 1e-6 * sigma[(0, 0)]);
    }

    #[test]
    fn sigma_scheme_ratio_and_psd() {
        let a = Asymptotics::new(db2());
        let rect = WeightScheme::rectangle(0.25).unwrap();
        let rec = WeightScheme::recursive(0.25).unwrap();
        let w = [-1.0 / (4.0 * 2f64.ln()), 0.0, 1.0 / (4.0 * 2f64.ln())];
        let s1 = a.sigma_matrix(0.2, 2, &rect).unwrap();
        let s2 = a.sigma_matrix(0.2, 2, &rec).unwrap();
        for (x, y) in s1.iter().zip(s2.iter()) {
            assert!((x - 2.0 * y).abs() <= 1e-12 * x.abs());
        }
        assert!(((&s1 - s1.transpose()).abs().max()) <= 1e-12 * s1.abs().max());
        for d in [0.0, 0.2, 0.4] {
            let r = a.variance_report(d, &w, &rect).unwrap();
            assert!(r.is_positive_semidefinite(), "d={d}: {}", r.min_eigenvalue());
            assert!(r.v_value > 0.0);
            let rr = a.variance_report(d, &w, &rec).unwrap();
            assert!((r.v_value / rr.v_value - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_refinement_is_stable() {
        let coarse = Asymptotics::new(db2());
        let fine = Asymptotics::with_config(db2(), AsymptoticConfig::default().refined()).unwrap();
        for d in [-0.2, 0.3, 0.9] {
            let (x, y) = (coarse.k_of_d(d).unwrap(), fine.k_of_d(d).unwrap());
            assert!((x / y - 1.0).abs() < 1e-5, "K({d})");
        }
        let scheme = WeightScheme::rectangle(0.25).unwrap();
        let s1 = coarse.sigma_matrix(0.3, 2, &scheme).unwrap();
        let s2 = fine.sigma_matrix(0.3, 2, &scheme).unwrap();
        for (x, y) in s1.iter().zip(s2.iter()) {
            assert!((x - y).abs() < 1e-5 * y.abs().max(1e-3 * s2.max()), "{x} vs {y}");
        }
        let model = TvFgnModel::new(0.7).unwrap();
        let bank = build_bank(db2(), 5).unwrap();
        let cfg = AsymptoticConfig::default();
        let a = local_wavelet_spectrum_with(&model, 0.5, 5, &bank, &cfg).unwrap();
        let b = local_wavelet_spectrum_with(&model, 0.5, 5, &bank, &cfg.refined()).unwrap();
        assert!((a / b - 1.0).abs() < 1e-5);
    }

    #[test]
    fn lattice_truncation_reports_precision() {
        let cfg = AsymptoticConfig {
            lattice_terms: 4,
            ..AsymptoticConfig::default()
        };
        let a = Asymptotics::with_config(db2(), cfg).unwrap();
        match a.cross_energy(0, 0, -0.3) {
            Err(Error::Precision { suggestion: Some(n), .. }) => assert!(n > 4),
            other => panic!("expected precision error, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let bad = AsymptoticConfig {
            panel_nodes: 8,
            frequency_bands: 8,
            ..AsymptoticConfig::default()
        };
        assert!(matches!(Asymptotics::with_config(db2(), bad), Err(Error::Config(_))));
    }
}
