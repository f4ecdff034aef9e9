//! Parsers for the structured flag values.

use locmem::sim::ParamCurve;
use locmem::wavelet::WaveletSpec;

use crate::error::{CliError, CliResult};

fn number(s: &str, what: &str) -> CliResult<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::config(format!("{what}: '{s}' is not a finite number")))
}

/// `0.3`, `cosine` (`(1 - cos(pi u / 2)) / 3`), `cosine:START:AMPLITUDE`
/// or `piecewise:U=V,U=V,...`.
pub fn curve(s: &str) -> CliResult<ParamCurve> {
    let s = s.trim();
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    match head {
        "cosine" if rest.is_empty() => Ok(ParamCurve::CosineRamp {
            start: 0.0,
            amplitude: 1.0 / 3.0,
        }),
        "cosine" => {
            let (a, b) = rest
                .split_once(':')
                .ok_or_else(|| CliError::config(format!("curve '{s}': expected cosine:START:AMPLITUDE")))?;
            Ok(ParamCurve::CosineRamp {
                start: number(a, "cosine start")?,
                amplitude: number(b, "cosine amplitude")?,
            })
        }
        "piecewise" => {
            let knots = rest
                .split(',')
                .map(|k| {
                    let (u, v) = k
                        .split_once('=')
                        .ok_or_else(|| CliError::config(format!("curve '{s}': knot '{k}' is not U=V")))?;
                    Ok((number(u, "knot position")?, number(v, "knot value")?))
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(ParamCurve::piecewise_linear(knots)?)
        }
        _ if rest.is_empty() => Ok(ParamCurve::Constant(number(head, "curve")?)),
        _ => Err(CliError::config(format!("unknown curve '{s}'"))),
    }
}

/// `;`-separated curves; `none` or empty gives no curves.
pub fn curves(s: &str) -> CliResult<Vec<ParamCurve>> {
    let s = s.trim();
    if s.is_empty() || s == "none" {
        return Ok(Vec::new());
    }
    s.split(';').map(curve).collect()
}

/// `haar`, `dbN` or `N`.
pub fn wavelet(s: &str) -> CliResult<WaveletSpec> {
    let s = s.trim().to_ascii_lowercase();
    if s == "haar" {
        return Ok(WaveletSpec::haar());
    }
    let digits = s.strip_prefix("db").unwrap_or(&s);
    let order = digits
        .parse::<usize>()
        .map_err(|_| CliError::config(format!("unknown wavelet '{s}' (use haar or dbN)")))?;
    Ok(WaveletSpec::daubechies(order)?)
}

/// `L:ELL` (scales `L..=L+ELL`) or an inclusive range `A..B`, as
/// `(lowest, ell)`.
pub fn scales(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::config(format!("scales '{s}': expected L:ELL or A..B with 1 <= A < B"));
    let int = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let (lowest, ell) = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (int(a)?, int(b)?);
        (a, b.checked_sub(a).ok_or_else(bad)?)
    } else if let Some((l, e)) = s.split_once(':') {
        (int(l)?, int(e)?)
    } else {
        return Err(bad());
    };
    if lowest == 0 || ell == 0 {
        return Err(bad());
    }
    Ok((lowest, ell))
}

/// Comma-separated finite numbers.
pub fn floats(s: &str, what: &str) -> CliResult<Vec<f64>> {
    s.split(',').map(|t| number(t, what)).collect()
}

/// `LO:HI:STEP` (inclusive) or a comma-separated list.
pub fn d_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 1 {
        return floats(s, "d grid");
    }
    let [lo, hi, step] = parts[..] else {
        return Err(CliError::config(format!("d grid '{s}': expected LO:HI:STEP")));
    };
    let (lo, hi, step) = (number(lo, "d grid")?, number(hi, "d grid")?, number(step, "d grid")?);
    if !(step > 0.0 && lo <= hi) {
        return Err(CliError::config(format!("d grid '{s}': need LO <= HI and STEP > 0")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(CliError::config(format!("d grid '{s}' has more than 100000 points")));
    }
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}
