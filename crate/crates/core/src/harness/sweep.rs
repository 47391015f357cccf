use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;

use super::cache::ReferenceStore;
use super::config::{SweepConfig, SweepScheme};
use super::relative_error;
use crate::error::{argument, Error, Result};
use crate::initdata::prepare_initial_data;
use crate::integrators::{extract_at_phase, integrate, IntegrateOptions};
use crate::models::{Model, ModelId};
use crate::reference::{
    averaged_to_state, integrate_averaged, run_splitting, ReferenceSolution, SplittingOrder,
    NKG_AVERAGE_NODES,
};
use crate::spectral::SpatialField;

pub const CSV_HEADER: &str = "model,scheme,init_order,eps,dt,nx,ntau,error_h1,runtime_s";

/// One sweep cell. A diverged run carries `NaN` in `error_hs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub model: ModelId,
    pub scheme: SweepScheme,
    pub init_order: u8,
    pub eps: f64,
    pub dt: f64,
    pub nx: usize,
    pub ntau: usize,
    #[serde(rename = "error_h1")]
    pub error_hs: f64,
    #[serde(rename = "runtime_s")]
    pub runtime_seconds: f64,
}

impl ErrorRecord {
    pub fn diverged(&self) -> bool {
        !self.error_hs.is_finite()
    }
}

pub fn write_csv(records: &[ErrorRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| argument(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn averaged_nodes(config: &SweepConfig) -> usize {
    match config.model {
        ModelId::Nkg => NKG_AVERAGE_NODES,
        ModelId::Nls => config.ntau,
    }
}

/// Unfiltered state at `t_final` for one cell. `averaged` supplies the
/// limit-model solution when the scheme needs it.
fn solve_cell(
    config: &SweepConfig,
    model: &Model,
    state0: &SpatialField,
    k: u32,
    averaged: Option<&SpatialField>,
) -> Result<SpatialField> {
    let n = 1usize << k;
    let t = config.t_final;
    match config.scheme {
        SweepScheme::Ua1 | SweepScheme::Ua2 => {
            let scheme = config.scheme.two_scale().unwrap();
            let f = model.field();
            let tg = f.tau_grid(config.ntau)?;
            let data = prepare_initial_data(f, &f.filter(state0, 0.0), &tg, config.init_order)?;
            let tr = integrate(f, &data, t, n, scheme, IntegrateOptions::default(), &mut [])?;
            Ok(extract_at_phase(f, &tr.final_state, t, tr.tau_star))
        }
        SweepScheme::Strang => run_splitting(model, state0, t, n, SplittingOrder::Strang),
        SweepScheme::Averaged => {
            let w = match averaged {
                Some(w) => w.clone(),
                None => integrate_averaged(model, state0, t, n, averaged_nodes(config))?,
            };
            Ok(averaged_to_state(model, &w, t))
        }
    }
}

/// Runs one `(ε, K)` cell against `reference`.
pub fn run_cell(
    config: &SweepConfig,
    model: &Model,
    state0: &SpatialField,
    k: u32,
    reference: &ReferenceSolution,
    averaged: Option<&SpatialField>,
) -> Result<ErrorRecord> {
    let clock = Instant::now();
    let error_hs = match solve_cell(config, model, state0, k, averaged) {
        Ok(state) => relative_error(
            &model.physical(&state),
            &reference.physical(),
            config.norm_s,
        )?,
        Err(Error::Diverged { .. }) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok(ErrorRecord {
        model: config.model,
        scheme: config.scheme,
        init_order: config.init_order.as_u8(),
        eps: model.epsilon(),
        dt: config.dt(k),
        nx: config.nx,
        ntau: config.ntau,
        error_hs,
        runtime_seconds: clock.elapsed().as_secs_f64(),
    })
}

/// Runs every `(ε, K)` cell of `config` on `jobs` worker threads (rayon's
/// default when `None`). Records come back ordered by ε, then K, and are
/// written to `config.output` when set.
pub fn run_sweep(config: &SweepConfig, jobs: Option<usize>) -> Result<Vec<ErrorRecord>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| argument(e.to_string()))?;
    let records = pool.install(|| sweep_inner(config))?;
    if let Some(path) = &config.output {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        write_csv(&records, std::fs::File::create(path)?)?;
    }
    Ok(records)
}

fn sweep_inner(config: &SweepConfig) -> Result<Vec<ErrorRecord>> {
    let store = ReferenceStore::new(config.cache_dir());
    let setups: Vec<(Model, SpatialField)> = config
        .eps_list
        .iter()
        .map(|&eps| {
            let m = Model::paper(config.model, config.nx, eps)?;
            let u0 = m.paper_initial_data()?;
            Ok((m, u0))
        })
        .collect::<Result<_>>()?;
    let refs: Vec<ReferenceSolution> = setups
        .par_iter()
        .map(|(m, u0)| {
            store
                .get_or_build(
                    m,
                    u0,
                    config.t_final,
                    config.reference_policy,
                    config.ntau,
                    false,
                )
                .map(|r| r.0)
        })
        .collect::<Result<_>>()?;

    // the limit model has no ε: solve once per distinct datum and K
    let mut distinct: Vec<usize> = Vec::new();
    let owner: Vec<usize> = setups
        .iter()
        .enumerate()
        .map(
            |(i, (_, u0))| match distinct.iter().find(|&&j| setups[j].1 == *u0) {
                Some(&j) => j,
                None => {
                    distinct.push(i);
                    i
                }
            },
        )
        .collect();
    let averaged: Vec<(usize, u32, Option<SpatialField>)> = if config.scheme
        == SweepScheme::Averaged
    {
        distinct
            .iter()
            .flat_map(|&i| config.k_list.iter().map(move |&k| (i, k)))
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&(i, k)| {
                let (m, u0) = &setups[i];
                let w =
                    integrate_averaged(m, u0, config.t_final, 1usize << k, averaged_nodes(config))
                        .ok();
                (i, k, w)
            })
            .collect()
    } else {
        Vec::new()
    };

    let cells: Vec<(usize, u32)> = (0..setups.len())
        .flat_map(|i| config.k_list.iter().map(move |&k| (i, k)))
        .collect();
    cells
        .par_iter()
        .map(|&(i, k)| {
            let (m, u0) = &setups[i];
            let memo = averaged
                .iter()
                .find(|(j, kk, _)| *j == owner[i] && *kk == k)
                .map(|(_, _, w)| w);
            match memo {
                // a diverged limit run
                Some(None) => Ok(ErrorRecord {
                    model: config.model,
                    scheme: config.scheme,
                    init_order: config.init_order.as_u8(),
                    eps: m.epsilon(),
                    dt: config.dt(k),
                    nx: config.nx,
                    ntau: config.ntau,
                    error_hs: f64::NAN,
                    runtime_seconds: 0.0,
                }),
                Some(Some(w)) => run_cell(config, m, u0, k, &refs[i], Some(w)),
                None => run_cell(config, m, u0, k, &refs[i], None),
            }
        })
        .collect()
}
