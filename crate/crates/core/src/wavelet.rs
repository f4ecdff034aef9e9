//! Daubechies filter bank: per-scale detail filters, their transfer
//! functions, and the Fourier transform of the continuous wavelet.
//!
//! Detail filters are stored in correlation form. For scale `j` with taps
//! `f[0..S]` the wavelet coefficient at position `k` of a series `x`
//! (0-based) is
//!
//! ```text
//! W[j,k] = sum_m f[m] * x[2^j k + m]
//! ```
//!
//! which is the usual `W_{j,k} = sum_t h_{j, 2^j k - t} X_t` with 1-based
//! `X_t` and `h_{j,t} = f[-t-1]` supported on `t in {-S, .., -1}`. With this
//! placement the coefficient uses only samples inside the series exactly
//! when `0 <= k < T_j = floor((T - S) / 2^j) + 1`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported Daubechies order.
pub const MAX_ORDER: usize = 10;

/// Depth of the truncated infinite product used for the wavelet's Fourier
/// transform.
pub const PSI_HAT_DEPTH: usize = 25;

// Extremal-phase Daubechies low-pass filters, normalized to sum sqrt(2).
// Order N has 2N taps and N vanishing moments.
const DB1: [f64; 2] = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
const DB2: [f64; 4] = [
    0.482_962_913_144_534_143_37,
    0.836_516_303_737_807_905_58,
    0.224_143_868_042_013_381_03,
    -0.129_409_522_551_260_381_17,
];
const DB3: [f64; 6] = [
    0.332_670_552_950_082_616,
    0.806_891_509_311_092_576_49,
    0.459_877_502_118_491_570_1,
    -0.135_011_020_010_254_588_7,
    -0.085_441_273_882_026_661_693,
    0.035_226_291_885_709_536_603,
];
const DB4: [f64; 8] = [
    0.230_377_813_308_896_500_86,
    0.714_846_570_552_915_647_09,
    0.630_880_767_929_858_907_88,
    -0.027_983_769_416_859_854_211,
    -0.187_034_811_719_093_084_08,
    0.030_841_381_835_560_763_627,
    0.032_883_011_666_885_199_735,
    -0.010_597_401_785_069_032_105,
];
const DB5: [f64; 10] = [
    0.160_102_397_974_192_914_48,
    0.603_829_269_797_189_670_54,
    0.724_308_528_437_772_927_73,
    0.138_428_145_901_320_731_51,
    -0.242_294_887_066_382_031_86,
    -0.032_244_869_584_638_374_648,
    0.077_571_493_840_045_713_523,
    -0.006_241_490_212_798_274_274_2,
    -0.012_580_751_999_081_999_469,
    0.003_335_725_285_473_771_278,
];
const DB6: [f64; 12] = [
    0.111_540_743_350_109_463_62,
    0.494_623_890_398_453_085_68,
    0.751_133_908_021_095_350_68,
    0.315_250_351_709_197_629_09,
    -0.226_264_693_965_439_820_08,
    -0.129_766_867_567_261_935_56,
    0.097_501_605_587_323_049_102,
    0.027_522_865_530_305_728_626,
    -0.031_582_039_317_486_029_565,
    0.000_553_842_201_161_496_139_25,
    0.004_777_257_510_945_510_639_6,
    -0.001_077_301_085_308_479_564_9,
];
const DB7: [f64; 14] = [
    0.077_852_054_085_009_179_02,
    0.396_539_319_481_917_306_54,
    0.729_132_090_846_235_119_92,
    0.469_782_287_405_193_122_47,
    -0.143_906_003_928_564_975_41,
    -0.224_036_184_993_874_982_64,
    0.071_309_219_266_830_264_751,
    0.080_612_609_151_083_071_913,
    -0.038_029_936_935_014_413_58,
    -0.016_574_541_630_666_880_654,
    0.012_550_998_556_099_840_613,
    0.000_429_577_972_921_366_521_13,
    -0.001_801_640_704_047_490_915_3,
    0.000_353_713_799_974_520_248_45,
];
const DB8: [f64; 16] = [
    0.054_415_842_243_104_009_955,
    0.312_871_590_914_299_970_66,
    0.675_630_736_297_289_806_81,
    0.585_354_683_654_206_712_77,
    -0.015_829_105_256_349_305_667,
    -0.284_015_542_961_546_926_52,
    0.000_472_484_573_913_282_770_36,
    0.128_747_426_620_478_458_86,
    -0.017_369_301_001_807_546_17,
    -0.044_088_253_930_794_751_507,
    0.013_981_027_917_398_281_649,
    0.008_746_094_047_405_776_716_4,
    -0.004_870_352_993_451_574_310_4,
    -0.000_391_740_373_376_947_046_3,
    0.000_675_449_406_450_569_366_37,
    -0.000_117_476_784_124_769_533_73,
];
const DB9: [f64; 18] = [
    0.038_077_947_363_878_346_589,
    0.243_834_674_612_590_353_73,
    0.604_823_123_690_111_111_9,
    0.657_288_078_051_300_538_08,
    0.133_197_385_825_007_576_19,
    -0.293_273_783_279_174_908_81,
    -0.096_840_783_222_976_460_514,
    0.148_540_749_338_106_380_14,
    0.030_725_681_479_333_379_212,
    -0.067_632_829_061_329_973_676,
    0.000_250_947_114_831_451_957_59,
    0.022_361_662_123_679_097_205,
    -0.004_723_204_757_751_397_277_9,
    -0.004_281_503_682_463_429_834_5,
    0.001_847_646_883_056_226_476_6,
    0.000_230_385_763_523_195_967_21,
    -0.000_251_963_188_942_710_136_97,
    0.000_039_347_320_316_271_599_481,
];
const DB10: [f64; 20] = [
    0.026_670_057_900_555_553_587,
    0.188_176_800_077_691_489_02,
    0.527_201_188_931_725_586_48,
    0.688_459_039_453_603_565_74,
    0.281_172_343_660_577_460_75,
    -0.249_846_424_327_315_379_42,
    -0.195_946_274_377_377_043_5,
    0.127_369_340_335_793_260_08,
    0.093_057_364_603_572_351_16,
    -0.071_394_147_166_397_087_145,
    -0.029_457_536_821_875_812_858,
    0.033_212_674_059_341_001_74,
    0.003_606_553_566_956_169_655_4,
    -0.010_733_175_483_330_575_044,
    0.001_395_351_747_052_901_165_8,
    0.001_992_405_295_185_056_117_2,
    -0.000_685_856_694_959_711_626_56,
    -0.000_116_466_855_129_285_450_95,
    0.000_093_588_670_320_069_591_334,
    -0.000_013_264_202_894_521_244_812,
];

const LOW_PASS: [&[f64]; MAX_ORDER] = [
    &DB1, &DB2, &DB3, &DB4, &DB5, &DB6, &DB7, &DB8, &DB9, &DB10,
];

// Fourier decay exponents of the Daubechies wavelets (sup-norm decay of psi-hat).
const FOURIER_DECAY: [f64; MAX_ORDER] = [1.00, 1.34, 1.64, 1.91, 2.18, 2.43, 2.68, 2.93, 3.17, 3.41];

/// A member of the Daubechies family together with the differencing order
/// of the model it will analyse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveletSpec {
    order: usize,
    differencing: usize,
}

impl WaveletSpec {
    /// Daubechies wavelet of the given order (order 1 is Haar).
    pub fn daubechies(order: usize) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::config(format!(
                "unsupported Daubechies order {order}; supported orders are 1..={MAX_ORDER}"
            )));
        }
        Ok(WaveletSpec {
            order,
            differencing: 0,
        })
    }

    pub fn haar() -> Self {
        WaveletSpec {
            order: 1,
            differencing: 0,
        }
    }

    /// Attach the differencing order `p` of the analysed model. Requires
    /// `p <= M` so the wavelet annihilates the integration offsets.
    pub fn with_differencing(mut self, p: usize) -> Result<Self> {
        if p > self.vanishing_moments() {
            return Err(Error::config(format!(
                "differencing order {p} exceeds the {} vanishing moments of db{}",
                self.vanishing_moments(),
                self.order
            )));
        }
        self.differencing = p;
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vanishing_moments(&self) -> usize {
        self.order
    }

    /// Exponent `alpha` with `|psi_hat(xi)| = O((1 + |xi|)^-alpha)`.
    pub fn fourier_decay(&self) -> f64 {
        FOURIER_DECAY[self.order - 1]
    }

    pub fn differencing_order(&self) -> usize {
        self.differencing
    }

    pub fn low_pass(&self) -> &'static [f64] {
        LOW_PASS[self.order - 1]
    }

    /// Quadrature-mirror high-pass: alternating-sign, time-reversed low-pass.
    pub fn high_pass(&self) -> Vec<f64> {
        let g = self.low_pass();
        let n = g.len();
        (0..n)
            .map(|m| {
                let v = g[n - 1 - m];
                if m % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect()
    }

    /// Taps `r` of the cofactor in `high_pass(z) = (1 - z)^M r(z)`.
    pub fn high_pass_cofactor(&self) -> Vec<f64> {
        FactoredHighPass::new(&self.high_pass(), self.vanishing_moments()).rest
    }

    pub fn base_len(&self) -> usize {
        2 * self.order
    }

    /// Open interval `(1/2 - alpha, M + 1/2)` on which `K(d)` is finite.
    pub fn memory_domain(&self) -> (f64, f64) {
        (
            0.5 - self.fourier_decay(),
            self.vanishing_moments() as f64 + 0.5,
        )
    }
}

/// Support length of the scale-`j` detail filter for a base filter of
/// length `base_len`.
pub fn support_length(base_len: usize, j: usize) -> usize {
    ((1usize << j) - 1) * (base_len - 1) + 1
}

/// Detail filter at one scale, stored in correlation form (see module docs).
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleFilter {
    scale: usize,
    taps: Vec<f64>,
}

impl ScaleFilter {
    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn support_length(&self) -> usize {
        self.taps.len()
    }

    /// Tap `h_{j,t}` in the convolution indexing of the DWT definition.
    pub fn h(&self, t: i64) -> f64 {
        let s = self.taps.len() as i64;
        if (-s..0).contains(&t) {
            self.taps[(-t - 1) as usize]
        } else {
            0.0
        }
    }

    /// Undecimated valid-mode correlation `y[n] = sum_m f[m] x[n + m]`.
    pub fn correlate(&self, x: &[f64]) -> Vec<f64> {
        if x.len() < self.taps.len() {
            return Vec::new();
        }
        x.windows(self.taps.len())
            .map(|w| dot(&self.taps, w))
            .collect()
    }

    /// `H_j(lambda) = sum_t h_{j,t} e^{-i t lambda}`, summed directly over the taps.
    pub fn transfer_function(&self, lambda: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, lambda);
        let mut acc = Complex64::new(0.0, 0.0);
        for &f in self.taps.iter().rev() {
            acc = acc * z + f;
        }
        acc * z
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-scale detail filters `j = 1..=max_scale` built by the pyramid cascade.
#[derive(Debug, Clone)]
pub struct WaveletBank {
    spec: WaveletSpec,
    high_pass: FactoredHighPass,
    filters: Vec<ScaleFilter>,
}

/// Build the detail filters for scales `1..=max_scale`.
pub fn build_bank(spec: WaveletSpec, max_scale: usize) -> Result<WaveletBank> {
    if max_scale == 0 {
        return Err(Error::config("max_scale must be at least 1"));
    }
    if max_scale > 30 {
        return Err(Error::config(format!("max_scale {max_scale} is unreasonably deep")));
    }
    // Re-validate in case the wavelet description was built by hand.
    WaveletSpec::daubechies(spec.order)?;
    let g = spec.low_pass();
    let hp = spec.high_pass();
    let mut filters = Vec::with_capacity(max_scale);
    // Cascade low-pass g^{(j-1)}: approximation at level j-1 in terms of the input.
    let mut approx = vec![1.0];
    for j in 1..=max_scale {
        let step = 1usize << (j - 1);
        let len = approx.len() + step * (hp.len() - 1);
        let mut detail = vec![0.0; len];
        let mut next = vec![0.0; len];
        for (r, (&hr, &gr)) in hp.iter().zip(g).enumerate() {
            for (m, &a) in approx.iter().enumerate() {
                detail[m + step * r] += hr * a;
                next[m + step * r] += gr * a;
            }
        }
        filters.push(ScaleFilter {
            scale: j,
            taps: detail,
        });
        approx = next;
    }
    Ok(WaveletBank {
        spec,
        high_pass: FactoredHighPass::new(&hp, spec.vanishing_moments()),
        filters,
    })
}

impl WaveletBank {
    pub fn spec(&self) -> &WaveletSpec {
        &self.spec
    }

    pub fn max_scale(&self) -> usize {
        self.filters.len()
    }

    pub fn filters(&self) -> &[ScaleFilter] {
        &self.filters
    }

    /// Detail filter at scale `j >= 1`.
    pub fn filter(&self, j: usize) -> Option<&ScaleFilter> {
        j.checked_sub(1).and_then(|i| self.filters.get(i))
    }

    /// Number `T_j` of coefficients at scale `j` computable from `len` samples.
    pub fn coefficient_count(&self, j: usize, len: usize) -> usize {
        coefficient_count(self.spec.base_len(), j, len)
    }

    /// `H_j(lambda)` through the cascade product; cost O(j * base_len)
    /// instead of O(support).
    pub fn transfer(&self, j: usize, lambda: f64) -> Complex64 {
        assert!(j >= 1, "scales start at 1");
        let g = self.spec.low_pass();
        let mut acc = self.high_pass.eval(lambda * (1u64 << (j - 1)) as f64);
        for k in 0..j - 1 {
            acc *= poly_eval(g, Complex64::from_polar(1.0, lambda * (1u64 << k) as f64));
        }
        acc * Complex64::from_polar(1.0, lambda)
    }

    /// `|H_j(lambda)|^2`.
    pub fn squared_gain(&self, j: usize, lambda: f64) -> f64 {
        self.transfer(j, lambda).norm_sqr()
    }
}

/// `T_j = floor((T - S_j) / 2^j) + 1`, or 0 when the series is shorter than the filter.
pub fn coefficient_count(base_len: usize, j: usize, len: usize) -> usize {
    let s = support_length(base_len, j);
    if len < s {
        0
    } else {
        (len - s) / (1usize << j) + 1
    }
}

/// High-pass symbol `sum_m h_m e^{i m theta}` stored as `(1 - z)^M R(z)` so
/// the zero at `theta = 0` keeps full relative accuracy.
#[derive(Debug, Clone)]
struct FactoredHighPass {
    order: usize,
    rest: Vec<f64>,
}

impl FactoredHighPass {
    fn new(taps: &[f64], order: usize) -> Self {
        let mut rest = taps.to_vec();
        for _ in 0..order {
            // synthetic division by (1 - z): q_m = sum_{n <= m} c_n
            let mut acc = 0.0;
            let mut q = Vec::with_capacity(rest.len() - 1);
            for &c in &rest[..rest.len() - 1] {
                acc += c;
                q.push(acc);
            }
            rest = q;
        }
        FactoredHighPass { order, rest }
    }

    fn eval(&self, theta: f64) -> Complex64 {
        // 1 - e^{i theta} = -2i sin(theta/2) e^{i theta/2}
        let zero = Complex64::new(0.0, -2.0 * (theta / 2.0).sin()) * Complex64::from_polar(1.0, theta / 2.0);
        zero.powu(self.order as u32) * poly_eval(&self.rest, Complex64::from_polar(1.0, theta))
    }
}

fn poly_eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Evaluator of the continuous wavelet's Fourier transform
/// `psi_hat(xi) = m1(xi/2) prod_{k>=2} m0(xi/2^k)`.
///
/// The product is truncated after [`PSI_HAT_DEPTH`] low-pass factors; the
/// remaining factor `phi_hat(eta)` with tiny `eta` is replaced by its
/// first-order expansion `exp(-i mu eta)`, `mu` being the centroid of the
/// scaling function, so the truncation error is O(eta^2).
#[derive(Debug, Clone)]
pub struct PsiHat {
    low: Vec<f64>,
    high: FactoredHighPass,
    centroid: f64,
}

impl PsiHat {
    pub fn new(spec: &WaveletSpec) -> Self {
        let low: Vec<f64> = spec.low_pass().iter().map(|g| g * FRAC_1_SQRT_2).collect();
        let taps: Vec<f64> = spec.high_pass().iter().map(|h| h * FRAC_1_SQRT_2).collect();
        let high = FactoredHighPass::new(&taps, spec.vanishing_moments());
        let centroid = low.iter().enumerate().map(|(n, g)| n as f64 * g).sum();
        PsiHat {
            low,
            high,
            centroid,
        }
    }

    /// `psi_hat(xi)`.
    pub fn eval(&self, xi: f64) -> Complex64 {
        // z[k] = exp(-i xi / 2^k) for k = 1..=DEPTH+1, computed by repeated
        // squaring from a fresh sincos every 8 levels to bound error growth.
        const REFRESH: usize = 8;
        let depth = PSI_HAT_DEPTH + 1;
        let mut z = [Complex64::new(1.0, 0.0); PSI_HAT_DEPTH + 2];
        let mut k = depth;
        loop {
            let top = k;
            z[top] = Complex64::from_polar(1.0, -xi / (2f64).powi(top as i32));
            let bottom = top.saturating_sub(REFRESH - 1).max(1);
            let mut i = top;
            while i > bottom {
                z[i - 1] = z[i] * z[i];
                i -= 1;
            }
            if bottom == 1 {
                break;
            }
            k = bottom - 1;
        }
        let mut acc = self.high.eval(-xi / 2.0);
        for zk in &z[2..=depth] {
            acc *= poly_eval(&self.low, *zk);
        }
        let eta = xi / (2f64).powi(depth as i32);
        acc * Complex64::from_polar(1.0, -self.centroid * eta)
    }

    /// `|psi_hat(xi)|^2`.
    pub fn modulus_sqr(&self, xi: f64) -> f64 {
        self.eval(xi).norm_sqr()
    }
}

/// Convenience wrapper around [`PsiHat::eval`].
pub fn psi_hat(spec: &WaveletSpec, xi: f64) -> Complex64 {
    PsiHat::new(spec).eval(xi)
}

/// Closed-form `|psi_hat|^2` of the Haar wavelet, `16 sin^4(xi/4) / xi^2`.
pub fn haar_psi_hat_sqr(xi: f64) -> f64 {
    if xi == 0.0 {
        return 0.0;
    }
    16.0 * (xi / 4.0).sin().powi(4) / (xi * xi)
}
