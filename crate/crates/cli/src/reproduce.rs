//! Monte Carlo study of the estimator on the cosine-ramp tvARFIMA(1,d,0)
//! model with `phi_1 = 0.8`, Daubechies order 2, `L in {1, 2, 3}`, `ell = 2`.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use locmem::estimator::{
    confidence_interval, estimate_d, interval_asymptotics, uniform_grid, EstimationPlan, MemoryEstimate,
    VarianceCache,
};
use locmem::scalogram::{dwt, local_scalogram, LocalScalogram};
use locmem::sim::{simulate, LocalModel, SimulationConfig, TvArfimaModel};
use locmem::wavelet::{build_bank, WaveletSpec};
use locmem::weights::WeightScheme;

use crate::args::{ReproduceArgs, SchemeChoice};
use crate::error::{CliError, CliResult};
use crate::io::{emit, Format, Table};

const LOWEST: [usize; 3] = [1, 2, 3];
const ELL: usize = 2;
const SCALES: [usize; 5] = [1, 2, 3, 4, 5];
/// Rescaled-time window of the summary statistics.
const WINDOW: (f64, f64) = (0.2, 0.8);

struct Run {
    seed: u64,
    /// Per scheme: scalogram on scales 1..=5 and one estimate per `L`.
    per_scheme: Vec<(LocalScalogram, Vec<MemoryEstimate>)>,
}

fn in_window(u: f64) -> bool {
    u >= WINDOW.0 - 1e-12 && u <= WINDOW.1 + 1e-12
}

fn nearest(grid: &[f64], u: f64) -> usize {
    (0..grid.len())
        .min_by(|&a, &b| (grid[a] - u).abs().total_cmp(&(grid[b] - u).abs()))
        .expect("grid is not empty")
}

fn mean_sd(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = xs.len();
    if n == 0 {
        return (None, None);
    }
    let m = xs.iter().sum::<f64>() / n as f64;
    let sd = (n > 1).then(|| (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
    (Some(m), sd)
}

fn write(dir: &Path, name: &str, table: &Table, format: Format) -> CliResult<()> {
    emit(&table.render(format), Some(&dir.join(format!("{name}.{}", format.extension()))))
}

pub fn reproduce_cmd(a: &ReproduceArgs, format: Format) -> CliResult<()> {
    if a.seeds == 0 || a.grid == 0 {
        return Err(CliError::config("--seeds and --grid must be positive"));
    }
    let spec = WaveletSpec::daubechies(2)?;
    let schemes: Vec<(&str, WeightScheme)> = match a.weights {
        SchemeChoice::Both => vec![
            ("kernel", WeightScheme::rectangle(a.bandwidth)?),
            ("recursive", WeightScheme::recursive(a.bandwidth)?),
        ],
        SchemeChoice::Kernel => vec![("kernel", WeightScheme::rectangle(a.bandwidth)?)],
        SchemeChoice::Recursive => vec![("recursive", WeightScheme::recursive(a.bandwidth)?)],
    };
    let grid = uniform_grid(a.grid);
    let plans = schemes
        .iter()
        .map(|(_, s)| {
            LOWEST
                .iter()
                .map(|&l| {
                    let p = EstimationPlan::new(l, ELL, s.clone())?.with_grid(grid.clone())?.with_level(a.level)?;
                    p.check_feasible(&spec, a.len)?;
                    Ok(p)
                })
                .collect::<CliResult<Vec<_>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", a.out_dir.display())))?;

    let model = TvArfimaModel::cosine_ramp_ar1();
    let cfg = SimulationConfig::default();
    let bank = build_bank(spec, SCALES.len())?;
    let seeds: Vec<u64> = (0..a.seeds).map(|i| a.first_seed + i).collect();
    let mut runs = seeds
        .par_iter()
        .map(|&seed| {
            let path = simulate(&model, a.len, seed, &cfg)?;
            if seed == a.first_seed && path.truncation_warning() {
                eprintln!("warning: MA truncation drops an estimated {:.2e} of the filter energy", path.tail_mass);
            }
            let pyramid = dwt(&path.values, &bank, SCALES.len())?;
            let per_scheme = schemes
                .iter()
                .zip(&plans)
                .map(|((_, s), ps)| {
                    let sc = local_scalogram(&pyramid, s, &grid, &SCALES)?;
                    let ests = ps.iter().map(|p| estimate_d(&sc, p)).collect::<locmem::Result<Vec<_>>>()?;
                    Ok((sc, ests))
                })
                .collect::<locmem::Result<Vec<_>>>()?;
            Ok(Run { seed, per_scheme })
        })
        .collect::<locmem::Result<Vec<_>>>()?;

    let asym = interval_asymptotics(spec);
    for (s, ps) in plans.iter().enumerate() {
        let (lo, hi) = runs
            .iter()
            .flat_map(|r| r.per_scheme[s].1.iter().flat_map(|e| e.estimated().map(|(_, d)| d)))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), d| (a.min(d), b.max(d)));
        if lo > hi {
            continue;
        }
        let cache = VarianceCache::build(&asym, &ps[0], lo, hi)?;
        for r in runs.iter_mut() {
            for (est, p) in r.per_scheme[s].1.iter_mut().zip(ps) {
                confidence_interval(est, p, &spec, a.len, &cache)?;
            }
        }
    }

    let truth: Vec<f64> = grid.iter().map(|&u| model.memory(u)).collect();
    let mut curves = Table::new(vec!["seed", "scheme", "L", "u", "d_true", "d_hat", "se", "ci_lo", "ci_hi", "flags"]);
    let mut scalograms = Table::new(vec!["seed", "scheme", "u", "j", "sigma2"]);
    for r in &runs {
        for ((name, _), (sc, ests)) in schemes.iter().zip(&r.per_scheme) {
            for (est, &l) in ests.iter().zip(&LOWEST) {
                for (p, &d) in est.points.iter().zip(&truth) {
                    curves.push(vec![
                        r.seed.into(),
                        (*name).into(),
                        l.into(),
                        p.u.into(),
                        d.into(),
                        p.d_hat.into(),
                        p.std_error.into(),
                        p.ci.map(|c| c.0).into(),
                        p.ci.map(|c| c.1).into(),
                        p.flags.label().into(),
                    ]);
                }
            }
            for (iu, &u) in grid.iter().enumerate() {
                for &j in &SCALES {
                    scalograms.push(vec![r.seed.into(), (*name).into(), u.into(), j.into(), sc.get(j, iu).into()]);
                }
            }
        }
    }

    let (i03, i09, i05) = (nearest(&grid, 0.3), nearest(&grid, 0.9), nearest(&grid, 0.5));
    let mut summary = Table::new(vec!["scheme", "L", "points", "mae", "bias", "coverage", "sd_u03", "sd_u09"]);
    let mut figure = Table::new(vec!["scheme", "L", "u", "series", "value"]);
    let mut dispersion = Table::new(vec!["scheme", "j", "u", "mean", "variance"]);
    for (s, (name, _)) in schemes.iter().enumerate() {
        for (il, &l) in LOWEST.iter().enumerate() {
            let point = |r: &Run, iu: usize| r.per_scheme[s].1[il].points[iu];
            let (mut errs, mut hits, mut intervals) = (Vec::new(), 0usize, 0usize);
            for (iu, &u) in grid.iter().enumerate() {
                let d_hats: Vec<f64> = runs.iter().filter_map(|r| point(r, iu).d_hat).collect();
                let cis: Vec<(f64, f64)> = runs.iter().filter_map(|r| point(r, iu).ci).collect();
                let covered = cis.iter().filter(|c| c.0 <= truth[iu] && truth[iu] <= c.1).count();
                if in_window(u) {
                    errs.extend(d_hats.iter().map(|d| d - truth[iu]));
                    hits += covered;
                    intervals += cis.len();
                }
                let (mean, sd) = mean_sd(&d_hats);
                let lo: Vec<f64> = cis.iter().map(|c| c.0).collect();
                let hi: Vec<f64> = cis.iter().map(|c| c.1).collect();
                let first = point(&runs[0], iu);
                let coverage = (!cis.is_empty()).then(|| covered as f64 / cis.len() as f64);
                let series: [(&str, Option<f64>); 9] = [
                    ("d_true", Some(truth[iu])),
                    ("mean_d_hat", mean),
                    ("sd_d_hat", sd),
                    ("mean_ci_lo", mean_sd(&lo).0),
                    ("mean_ci_hi", mean_sd(&hi).0),
                    ("coverage", coverage),
                    ("first_d_hat", first.d_hat),
                    ("first_ci_lo", first.ci.map(|c| c.0)),
                    ("first_ci_hi", first.ci.map(|c| c.1)),
                ];
                for (tag, v) in series {
                    figure.push(vec![(*name).into(), l.into(), u.into(), tag.into(), v.into()]);
                }
            }
            let sd_at = |iu: usize| mean_sd(&runs.iter().filter_map(|r| point(r, iu).d_hat).collect::<Vec<_>>()).1;
            let n = errs.len();
            summary.push(vec![
                (*name).into(),
                l.into(),
                n.into(),
                (n > 0).then(|| errs.iter().map(|e| e.abs()).sum::<f64>() / n as f64).into(),
                (n > 0).then(|| errs.iter().sum::<f64>() / n as f64).into(),
                (intervals > 0).then(|| hits as f64 / intervals as f64).into(),
                sd_at(i03).into(),
                sd_at(i09).into(),
            ]);
        }
        for &j in &SCALES {
            let xs: Vec<f64> = runs.iter().filter_map(|r| r.per_scheme[s].0.get(j, i05)).collect();
            let (mean, sd) = mean_sd(&xs);
            dispersion.push(vec![
                (*name).into(),
                j.into(),
                grid[i05].into(),
                mean.into(),
                sd.map(|v| v * v).into(),
            ]);
        }
    }

    let dir = a.out_dir.as_path();
    write(dir, "curves", &curves, format)?;
    write(dir, "scalograms", &scalograms, format)?;
    write(dir, "figure", &figure, format)?;
    write(dir, "scalogram_variance", &dispersion, format)?;
    write(dir, "summary", &summary, format)?;
    emit(&summary.render(format), None)
}
