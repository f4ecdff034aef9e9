use std::path::Path;

use rayon::prelude::*;

use locmem::asymptotics::{AsymptoticConfig, Asymptotics};
use locmem::estimator::{
    advise_tuning, estimate_series, interval_asymptotics, uniform_grid, EstimationPlan, MemoryEstimate,
    RegressionWeights,
};
use locmem::scalogram::{dwt, local_scalogram};
use locmem::sim::{simulate, LocalModel, MemoryCurve, SimulationConfig, TvArfimaModel, TvFgnModel};
use locmem::wavelet::{build_bank, WaveletBank, WaveletSpec};
use locmem::weights::{Kernel, WeightKind, WeightScheme};

use crate::args::{
    AdviseArgs, AsymptoticsArgs, EstimateArgs, ModelKind, ScalogramArgs, SimulateArgs, WeightsKind, WindowArgs,
};
use crate::error::{CliError, CliResult};
use crate::io::{emit, read_series, Cell, Format, Table};
use crate::parse;

pub fn make_scheme(kind: WeightsKind, bandwidth: f64, taps: Option<&str>) -> CliResult<WeightScheme> {
    let scheme = match (kind, taps) {
        (WeightsKind::Kernel, None) => WeightScheme::rectangle(bandwidth)?,
        (WeightsKind::Kernel, Some(t)) => {
            let kernel = Kernel::from_taps(parse::floats(t, "kernel taps")?)?;
            WeightScheme::new(WeightKind::Kernel(kernel), bandwidth)?
        }
        (WeightsKind::Recursive, None) => WeightScheme::recursive(bandwidth)?,
        (WeightsKind::Recursive, Some(_)) => {
            return Err(CliError::config("--kernel-taps only applies to --weights kernel"));
        }
    };
    Ok(scheme)
}

fn window_scheme(w: &WindowArgs) -> CliResult<WeightScheme> {
    make_scheme(w.weights, w.bandwidth, w.kernel_taps.as_deref())
}

fn grid(n: usize) -> CliResult<Vec<f64>> {
    if n == 0 {
        return Err(CliError::config("--grid must be at least 1"));
    }
    Ok(uniform_grid(n))
}

fn regression_weights(values: Option<&str>, ell: usize) -> CliResult<RegressionWeights> {
    let Some(v) = values else {
        return Ok(RegressionWeights::ols(ell)?);
    };
    let w = parse::floats(v, "regression weights")?;
    if w.len() != ell + 1 {
        return Err(CliError::config(format!(
            "{} regression weights given for {} scales",
            w.len(),
            ell + 1
        )));
    }
    Ok(RegressionWeights::custom(w)?)
}

fn dump_taps(bank: &WaveletBank, path: &Path, format: Format) -> CliResult<()> {
    let mut t = Table::new(vec!["j", "t", "h"]);
    for f in bank.filters() {
        for (i, &h) in f.taps().iter().enumerate() {
            t.push(vec![f.scale().into(), i.into(), h.into()]);
        }
    }
    emit(&t.render(format), Some(path))
}

pub fn simulate_cmd(a: &SimulateArgs, format: Format) -> CliResult<()> {
    let model: Box<dyn LocalModel> = match a.model {
        ModelKind::Arfima => Box::new(
            TvArfimaModel::builder(MemoryCurve::new(parse::curve(&a.memory)?)?)
                .ar(parse::curves(&a.ar)?)
                .ma(parse::curves(&a.ma)?)
                .sigma(parse::curve(&a.sigma)?)
                .differencing(a.differencing)
                .build()?,
        ),
        ModelKind::Fgn => {
            if a.differencing != 0 {
                return Err(CliError::config("--differencing applies to the arfima model only"));
            }
            Box::new(TvFgnModel::new(parse::curve(&a.hurst)?)?)
        }
    };
    if a.len == 0 {
        return Err(CliError::config("--len must be positive"));
    }
    let cfg = SimulationConfig {
        truncation: a.truncation,
        ..SimulationConfig::default()
    };
    let path = simulate(model.as_ref(), a.len, a.seed, &cfg)?;
    if path.truncation_warning() {
        eprintln!(
            "warning: truncation {} drops an estimated {:.2e} of the filter energy",
            a.truncation, path.tail_mass
        );
    }
    let mut t = Table::new(vec!["x"]);
    t.rows = path.values.iter().map(|&x| vec![Cell::Num(x)]).collect();
    emit(&t.render(format), a.out.as_deref())
}

pub fn scalogram_cmd(a: &ScalogramArgs, format: Format) -> CliResult<()> {
    let spec = parse::wavelet(&a.window.wavelet)?;
    let (lowest, ell) = parse::scales(&a.scales)?;
    let scheme = window_scheme(&a.window)?;
    let plan = EstimationPlan::new(lowest, ell, scheme.clone())?.with_grid(grid(a.window.grid)?)?;
    let series = read_series(&a.input)?;
    plan.check_feasible(&spec, series.len())?;

    let bank = build_bank(spec, plan.highest())?;
    if let Some(p) = &a.window.dump_taps {
        dump_taps(&bank, p, format)?;
    }
    let pyramid = dwt(&series, &bank, plan.highest())?;
    let scales = plan.scales();
    let sc = local_scalogram(&pyramid, &scheme, plan.grid(), &scales)?;
    let mut t = Table::new(vec!["u", "j", "sigma2"]);
    for (iu, &u) in plan.grid().iter().enumerate() {
        for &j in &scales {
            t.push(vec![u.into(), j.into(), sc.get(j, iu).into()]);
        }
    }
    emit(&t.render(format), a.out.as_deref())
}

pub fn estimate_table(est: &MemoryEstimate) -> Table {
    let mut t = Table::new(vec!["u", "d_hat", "se", "ci_lo", "ci_hi", "flags"]);
    for p in &est.points {
        t.push(vec![
            p.u.into(),
            p.d_hat.into(),
            p.std_error.into(),
            p.ci.map(|c| c.0).into(),
            p.ci.map(|c| c.1).into(),
            p.flags.label().into(),
        ]);
    }
    t
}

fn report_flags(est: &MemoryEstimate) {
    let count = |f: fn(&locmem::estimator::EstimateFlags) -> bool| est.points.iter().filter(|p| f(&p.flags)).count();
    let n = est.points.len();
    let zero = count(|f| f.zero_scalogram);
    if zero > 0 {
        eprintln!("warning: {zero} of {n} grid points have a vanishing scalogram and carry no estimate");
    }
    let boundary = count(|f| f.boundary);
    if boundary > 0 {
        eprintln!("warning: {boundary} of {n} grid points lie outside the admissible range of the weights");
    }
    let no_ci = count(|f| f.ci_unavailable);
    if no_ci > 0 {
        eprintln!("warning: {no_ci} of {n} estimates fall outside the range where intervals are available");
    }
}

pub fn estimate_cmd(a: &EstimateArgs, format: Format) -> CliResult<()> {
    let spec = parse::wavelet(&a.window.wavelet)?.with_differencing(a.differencing)?;
    let (lowest, ell) = parse::scales(&a.scales)?;
    let plan = EstimationPlan::new(lowest, ell, window_scheme(&a.window)?)?
        .with_weights(regression_weights(a.regression_weights.as_deref(), ell)?)
        .with_grid(grid(a.window.grid)?)?
        .with_level(a.level)?;
    let series = read_series(&a.input)?;
    plan.check_feasible(&spec, series.len())?;

    if let Some(p) = &a.window.dump_taps {
        dump_taps(&build_bank(spec, plan.highest())?, p, format)?;
    }
    let asym = (!a.no_ci).then(|| interval_asymptotics(spec));
    let (_, est) = estimate_series(&series, spec, &plan, asym.as_ref())?;
    report_flags(&est);
    emit(&estimate_table(&est).render(format), a.out.as_deref())
}

pub fn asymptotics_cmd(a: &AsymptoticsArgs, format: Format) -> CliResult<()> {
    let spec: WaveletSpec = parse::wavelet(&a.wavelet)?.with_differencing(a.differencing)?;
    let mut cfg = AsymptoticConfig::default();
    if let Some(n) = a.lattice_terms {
        cfg.lattice_terms = n;
    }
    if let Some(tol) = a.tolerance {
        cfg.tolerance = tol;
    }
    let asym = Asymptotics::with_config(spec, cfg)?;
    let scheme = make_scheme(a.weights, a.bandwidth, a.kernel_taps.as_deref())?;
    let w = regression_weights(a.regression_weights.as_deref(), a.ell)?;
    let ds = parse::d_grid(&a.d_grid)?;

    let reports = ds
        .par_iter()
        .map(|&d| asym.variance_report(d, w.values(), &scheme))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(vec!["quantity", "d", "i", "k", "value"]);
    for r in &reports {
        t.push(vec!["K".into(), r.d.into(), Cell::Missing, Cell::Missing, r.k_value.into()]);
        for i in 0..r.sigma.nrows() {
            for k in 0..r.sigma.ncols() {
                t.push(vec!["sigma".into(), r.d.into(), i.into(), k.into(), r.sigma[(i, k)].into()]);
            }
        }
        t.push(vec!["variance".into(), r.d.into(), Cell::Missing, Cell::Missing, r.v_value.into()]);
        t.push(vec![
            "min_eigenvalue".into(),
            r.d.into(),
            Cell::Missing,
            Cell::Missing,
            r.min_eigenvalue().into(),
        ]);
    }
    emit(&t.render(format), a.out.as_deref())
}

pub fn advise_cmd(a: &AdviseArgs, format: Format) -> CliResult<()> {
    let adv = advise_tuning(a.len, a.d_prior, a.beta, a.differencing)?;
    let mut t = Table::new(vec![
        "len",
        "lowest",
        "bandwidth",
        "scale_exponent",
        "bandwidth_exponent",
        "error_exponent",
        "clamped",
    ]);
    t.push(vec![
        a.len.into(),
        adv.lowest.into(),
        adv.bandwidth.into(),
        adv.scale_exponent.into(),
        adv.bandwidth_exponent.into(),
        adv.error_exponent.into(),
        adv.clamped.into(),
    ]);
    emit(&t.render(format), a.out.as_deref())
}
