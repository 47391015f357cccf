//! `ua`: single runs, error sweeps, cached references and mode traces.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ua_core::harness::{
    mode_trace, relative_error, run_sweep, write_csv, ReferenceStore, SweepConfig, SweepScheme,
};
use ua_core::initdata::prepare_initial_data;
use ua_core::integrators::{extract_at_phase, integrate, IntegrateOptions};
use ua_core::reference::{
    averaged_to_state, integrate_averaged, run_splitting, ReferencePolicy, SplittingOrder,
};
use ua_core::{Model, ModelId, PreparationOrder, SpatialField};

#[derive(Parser)]
#[command(
    name = "ua",
    version,
    about = "Uniformly accurate two-scale solvers for NKG and NLS"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one problem and write u(t_final) as `x re im` columns.
    Run(RunArgs),
    /// Run an (ε, Δt) error sweep described by a JSON config.
    Sweep(SweepArgs),
    /// Build (or load) the cached reference solution for one ε.
    Reference(ReferenceArgs),
    /// Write |û_m(t, τ=0)| along a UA2 trajectory.
    Trace(TraceArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    model: ModelId,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value = "ua2")]
    scheme: SweepScheme,
    #[arg(long, default_value_t = 2)]
    init_order: u8,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ntau: Option<usize>,
    #[arg(long, default_value_t = 0.4)]
    tfinal: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also report the H¹ relative error against the cached reference.
    #[arg(long)]
    compare: bool,
    #[arg(long, default_value = ".ua-cache")]
    cache_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Published grids: K up to 18 and the paper's reference recipe.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ReferenceArgs {
    #[arg(long)]
    model: ModelId,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    force: bool,
    #[arg(long, default_value_t = 0.4)]
    tfinal: f64,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ntau: Option<usize>,
    #[arg(long, default_value = "desk")]
    policy: ReferencePolicy,
    #[arg(long, default_value = ".ua-cache")]
    cache_dir: PathBuf,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    model: ModelId,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,3,5,7,9,11,13")]
    modes: Vec<i64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.4)]
    tfinal: f64,
    #[arg(long, default_value_t = 1024)]
    steps: usize,
    /// Store every n-th step.
    #[arg(long, default_value_t = 4)]
    every: usize,
    #[arg(long, default_value_t = 3)]
    init_order: u8,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ntau: Option<usize>,
}

fn defaults(model: ModelId) -> (usize, usize) {
    match model {
        ModelId::Nkg => (200, 64),
        ModelId::Nls => (64, 2048),
    }
}

fn order(n: u8) -> Result<PreparationOrder> {
    Ok(PreparationOrder::try_from(n)?)
}

fn write_field(u: &SpatialField, out: impl Write) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    let x = u.grid().points();
    writeln!(out, "# x re(u) im(u)")?;
    for (x, z) in x.iter().zip(u.values()) {
        writeln!(out, "{x:.16e} {:.16e} {:.16e}", z.re, z.im)?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<std::fs::File> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

fn run(a: RunArgs) -> Result<()> {
    let (nx0, nt0) = defaults(a.model);
    let (nx, ntau) = (a.nx.unwrap_or(nx0), a.ntau.unwrap_or(nt0));
    let m = Model::paper(a.model, nx, a.eps)?;
    let u0 = m.paper_initial_data()?;
    let clock = Instant::now();
    let state = match a.scheme {
        SweepScheme::Ua1 | SweepScheme::Ua2 => {
            let f = m.field();
            let tg = f.tau_grid(ntau)?;
            let data = prepare_initial_data(f, &f.filter(&u0, 0.0), &tg, order(a.init_order)?)?;
            let scheme = a.scheme.two_scale().unwrap();
            let tr = integrate(
                f,
                &data,
                a.tfinal,
                a.steps,
                scheme,
                IntegrateOptions::default(),
                &mut [],
            )?;
            extract_at_phase(f, &tr.final_state, a.tfinal, tr.tau_star)
        }
        SweepScheme::Strang => run_splitting(&m, &u0, a.tfinal, a.steps, SplittingOrder::Strang)?,
        SweepScheme::Averaged => {
            let nodes = match a.model {
                ModelId::Nkg => ua_core::reference::NKG_AVERAGE_NODES,
                ModelId::Nls => ntau,
            };
            let w = integrate_averaged(&m, &u0, a.tfinal, a.steps, nodes)?;
            averaged_to_state(&m, &w, a.tfinal)
        }
    };
    let u = m.physical(&state);
    eprintln!(
        "{} {} eps={} steps={} nx={nx} ntau={ntau}: {:.3} s",
        a.model,
        a.scheme,
        a.eps,
        a.steps,
        clock.elapsed().as_secs_f64()
    );
    if a.compare {
        let store = ReferenceStore::new(&a.cache_dir);
        let (r, _) = store.get_or_build(&m, &u0, a.tfinal, ReferencePolicy::Desk, ntau, false)?;
        println!("error_h1 {:e}", relative_error(&u, &r.physical(), 1.0)?);
    }
    match &a.out {
        Some(p) => write_field(&u, create(p)?),
        None if !a.compare => write_field(&u, std::io::stdout().lock()),
        None => Ok(()),
    }
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut cfg =
        SweepConfig::load(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    if a.full {
        cfg = cfg.full();
    }
    if a.jobs == Some(0) {
        bail!("--jobs must be at least 1");
    }
    let records = run_sweep(&cfg, a.jobs)?;
    let diverged = records.iter().filter(|r| r.diverged()).count();
    if cfg.output.is_none() {
        write_csv(&records, std::io::stdout().lock())?;
    }
    eprintln!("{} records, {diverged} diverged", records.len());
    Ok(())
}

fn reference(a: ReferenceArgs) -> Result<()> {
    let (nx0, nt0) = defaults(a.model);
    let m = Model::paper(a.model, a.nx.unwrap_or(nx0), a.eps)?;
    let u0 = m.paper_initial_data()?;
    let store = ReferenceStore::new(&a.cache_dir);
    let clock = Instant::now();
    let (r, built) =
        store.get_or_build(&m, &u0, a.tfinal, a.policy, a.ntau.unwrap_or(nt0), a.force)?;
    let key = ReferenceStore::key(&m, &u0, a.tfinal, &r.recipe);
    println!(
        "{} {}: {} with {} steps (dt {:e}), nx {}, ntau {}, self-consistency {:.2e}, checksum {:e}",
        if built { "built" } else { "cached" },
        store.paths(&key).0.display(),
        r.solver(),
        r.recipe.n_steps,
        r.dt_used(),
        r.nx(),
        r.recipe.ntau,
        r.self_error,
        r.checksum
    );
    eprintln!("{:.1} s", clock.elapsed().as_secs_f64());
    Ok(())
}

fn trace(a: TraceArgs) -> Result<()> {
    if a.every == 0 {
        bail!("--every must be at least 1");
    }
    let (nx0, nt0) = defaults(a.model);
    let m = Model::paper(a.model, a.nx.unwrap_or(nx0), a.eps)?;
    let f = m.field();
    let u0 = m.paper_initial_data()?;
    let tg = f.tau_grid(a.ntau.unwrap_or(nt0))?;
    let data = prepare_initial_data(f, &f.filter(&u0, 0.0), &tg, order(a.init_order)?)?;
    let opts = IntegrateOptions {
        snapshot_every: Some(a.every),
    };
    let tr = integrate(
        f,
        &data,
        a.tfinal,
        a.steps,
        ua_core::Scheme::Ua2,
        opts,
        &mut [],
    )?;
    mode_trace(&tr.snapshots, &a.modes, 0.0)?
        .write_text(std::io::BufWriter::new(create(&a.out)?))?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Reference(a) => reference(a),
        Command::Trace(a) => trace(a),
    }
}
