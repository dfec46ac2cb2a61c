//! `koblab`: reproducible experiment runner for Kobayashi metric brackets,
//! approximate geodesics and boundary-behavior probes.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use koblab::error::KobError;
use serde_json::json;

use commands::{Ctx, Outputs};
use config::ExperimentConfig;

const REPORT_COLUMNS: &str = "CSV columns: grid_value,lower,upper,statistic,flags \
(floats with 17 significant digits, flags joined by ';').";

#[derive(Parser)]
#[command(name = "koblab", version, about = "Certified Kobayashi metric and distance experiments on convex domains")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON experiment config: `domain`, `solver`, `seed`, `format`,
    /// `output_dir`, `label` plus the command's own parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for all random sampling (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fixed output label and no timestamp metadata, so equal inputs give
    /// byte-identical JSON.
    #[arg(long, global = true)]
    reproducible: bool,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Certified bracket for k(x, y). Params: x, y.
    ///
    /// CSV columns: lower,upper,method.
    Distance,
    /// Approximate geodesic between x and y. Params: x, y.
    ///
    /// CSV columns: index,cumulative_lower,cumulative_upper,boundary_distance,re_1,im_1,...
    Geodesic,
    /// Bracket for the Gromov product (x|y)_o. Params: x, y, o (default: base point).
    ///
    /// CSV columns: lower,upper.
    Gromov,
    /// Boundary distance of geodesics between points approaching p and q.
    /// Params: p, q, eps_grid, approach.
    #[command(after_help = REPORT_COLUMNS)]
    VisibilityScan,
    /// k(z, D \ W) + ½ log δ(z) as z tends to p. Params: p, w_radius, eps_grid.
    #[command(after_help = REPORT_COLUMNS)]
    KPoint,
    /// Fit of k(o, z) against log(1/δ(z)). Params: o, samples.
    #[command(after_help = REPORT_COLUMNS)]
    GrowthFit,
    /// Goldilocks function M(r) and its integrability. Params: r_grid, focus.
    #[command(after_help = REPORT_COLUMNS)]
    Goldilocks,
    /// Local vs global distance differences on a boundary patch.
    /// Params: u_center, u_radius, v_radius, pairs.
    #[command(after_help = REPORT_COLUMNS)]
    Localize,
    /// Diameter vs boundary geodesic in the bidisc.
    #[command(after_help = REPORT_COLUMNS)]
    CaseBidisc(EpsArgs),
    /// Gromov products of p_ε, q_ε in Ω_ψ. Params: eps_grid, o.
    #[command(after_help = REPORT_COLUMNS)]
    CaseOmegaPsi(EpsArgs),
    /// Inclusion of Kobayashi balls in Euclidean balls. Params: q, z, r.
    ///
    /// CSV columns: holds,lhs,rhs,margin,distance_lower,distance_upper.
    BallsCheck,
    /// Endpoint separation of same-height geodesics. Params: region, delta_grid, m.
    #[command(after_help = REPORT_COLUMNS)]
    Sameheight,
}

#[derive(Args)]
struct EpsArgs {
    /// Grid value; repeat for several (overrides `eps_grid` in the config).
    #[arg(long = "eps")]
    eps: Vec<f64>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Distance => "distance",
            Command::Geodesic => "geodesic",
            Command::Gromov => "gromov",
            Command::VisibilityScan => "visibility-scan",
            Command::KPoint => "k-point",
            Command::GrowthFit => "growth-fit",
            Command::Goldilocks => "goldilocks",
            Command::Localize => "localize",
            Command::CaseBidisc(_) => "case-bidisc",
            Command::CaseOmegaPsi(_) => "case-omega-psi",
            Command::BallsCheck => "balls-check",
            Command::Sameheight => "sameheight",
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    let cfg = match &g.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(g.threads).build_global() {
        anyhow::bail!("thread pool: {e}");
    }
    let out_dir = g.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let label = match (&cfg.label, g.reproducible) {
        (Some(l), _) => l.clone(),
        (None, true) => "run".to_string(),
        (None, false) => now.to_string(),
    };
    let ctx = Ctx { cfg: &cfg, seed: g.seed.or(cfg.seed).unwrap_or(0) };
    let name = cli.command.name();
    let outputs = match &cli.command {
        Command::Distance => commands::distance(&ctx),
        Command::Geodesic => commands::geodesic(&ctx),
        Command::Gromov => commands::gromov(&ctx),
        Command::VisibilityScan => commands::visibility(&ctx),
        Command::KPoint => commands::k_point(&ctx),
        Command::GrowthFit => commands::growth(&ctx),
        Command::Goldilocks => commands::goldilocks(&ctx),
        Command::Localize => commands::localize(&ctx),
        Command::CaseBidisc(a) => commands::case_bidisc(&ctx, &a.eps),
        Command::CaseOmegaPsi(a) => commands::case_omega_psi(&ctx, &a.eps),
        Command::BallsCheck => commands::balls(&ctx),
        Command::Sameheight => commands::sameheight(&ctx),
    }?;
    let metadata = (!g.reproducible).then(|| {
        json!({ "unix_time": now, "version": env!("CARGO_PKG_VERSION"), "seed": ctx.seed })
    });
    write_outputs(&out_dir, &format!("{name}-{label}"), name, outputs, metadata, &cfg)
}

fn write_outputs(
    dir: &Path,
    stem: &str,
    command: &str,
    out: Outputs,
    metadata: Option<serde_json::Value>,
    cfg: &ExperimentConfig,
) -> anyhow::Result<()> {
    let write = |ext: &str, body: &str| -> anyhow::Result<()> {
        let path = dir.join(format!("{stem}.{ext}"));
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {}", path.display());
        Ok(())
    };
    if cfg.format.json() {
        let j = commands::finish(out.json, command, metadata)?;
        write("json", &(serde_json::to_string_pretty(&j)? + "\n"))?;
    }
    if cfg.format.csv() {
        if let Some(csv) = &out.csv {
            write("csv", csv)?;
        }
    }
    if let Some(svg) = &out.svg {
        write("svg", svg)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 3 for a failed soundness re-check anywhere in the chain, 2 otherwise.
fn exit_code(e: &anyhow::Error) -> u8 {
    let soundness = e.chain().any(|c| matches!(c.downcast_ref::<KobError>(), Some(KobError::Soundness(_))));
    if soundness {
        3
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soundness_errors_map_to_three() {
        let e = anyhow::Error::from(KobError::Soundness("x".into())).context("writing report");
        assert_eq!(exit_code(&e), 3);
        assert_eq!(exit_code(&anyhow::Error::from(KobError::Precondition("y".into()))), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("plain")), 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
