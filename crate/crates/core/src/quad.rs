//! Fixed quadrature rules used by the spectral integrals.

use gauss_quad::legendre::GaussLegendre;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pairs: Vec<(f64, f64)>,
}

impl GaussRule {
    /// `n`-point rule; `n` is clamped to at least 2.
    pub fn new(n: usize) -> Self {
        let rule = GaussLegendre::new(n.max(2)).expect("degree >= 2");
        GaussRule {
            pairs: rule.as_node_weight_pairs().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self.pairs.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + i as f64 * h;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.pairs.iter().map(move |&(x, w)| (mid + half * x, half * w))
    }
}

/// Double-exponential (tanh-sinh) rule on `[-1, 1]` with step `h` and
/// abscissae truncated once the weights drop below 1e-40.
#[derive(Debug, Clone)]
pub struct TanhSinhRule {
    // (x, 1 - |x|, w); keeping 1 - |x| avoids cancellation next to the endpoints
    pairs: Vec<(f64, f64, f64)>,
}

impl TanhSinhRule {
    pub fn new(h: f64) -> Self {
        use std::f64::consts::FRAC_PI_2;
        let mut pairs = Vec::new();
        let mut k = 0i64;
        loop {
            let t = k as f64 * h;
            let s = FRAC_PI_2 * t.sinh();
            let c = s.cosh();
            let w = h * FRAC_PI_2 * t.cosh() / (c * c);
            // 1 - tanh(s) = 2 / (1 + e^{2s})
            let comp = 2.0 / (1.0 + (2.0 * s).exp());
            if w < 1e-40 || comp <= 1e-300 {
                break;
            }
            let x = 1.0 - comp;
            if k == 0 {
                pairs.push((0.0, 1.0, w));
            } else {
                pairs.push((x, comp, w));
                pairs.push((-x, comp, w));
            }
            k += 1;
        }
        TanhSinhRule { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self
            .pairs
            .iter()
            .map(|&(x, comp, w)| {
                // evaluate from the nearer endpoint to keep the abscissa exact
                let t = if x >= 0.0 { b - half * comp } else if x < 0.0 { a + half * comp } else { mid };
                w * f(t)
            })
            .sum::<f64>()
    }

    pub fn composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + i as f64 * h;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.pairs.iter().map(move |&(x, comp, w)| {
            let t = if x > 0.0 { b - half * comp } else if x < 0.0 { a + half * comp } else { mid };
            (t, half * w)
        })
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
