//! One function per subcommand. Each returns the rendered outputs; nothing
//! here touches the filesystem.

use anyhow::{bail, Context};
use koblab::cases::{run_bidisc_case, run_omega_psi_case};
use koblab::diagnostics::{
    balls_inequality_check, fmt_float, geometric_grid, goldilocks_probe, gromov_product, growth_fit,
    k_point_probe, localization_check, sameheight_scaling, visibility_scan, Approach, ProbeReport, SameheightRegion,
    REPORT_SCHEMA,
};
use koblab::domain::{DomainKind, OmegaPsiParams};
use koblab::error::KobError;
use koblab::geodesic::{distance_bracket, solve_geodesic, DistanceEstimate, SolverConfig};
use koblab::metric::MetricBracket;
use koblab::point::CPoint;
use koblab::svg::{line_plot, report_plot, Series};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;

pub struct Outputs {
    pub json: Value,
    pub csv: Option<String>,
    pub svg: Option<String>,
}

pub struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub seed: u64,
}

impl Ctx<'_> {
    fn solver(&self) -> SolverConfig {
        SolverConfig { seed: self.seed, ..self.cfg.solver.clone() }
    }
}

fn soundness(b: &MetricBracket, what: &str) -> anyhow::Result<()> {
    if !(b.lower.is_finite() && b.upper.is_finite() && b.lower <= b.upper) {
        return Err(KobError::Soundness(format!("{what}: certified lower {} above upper {}", b.lower, b.upper)).into());
    }
    Ok(())
}

fn from_report(report: ProbeReport, title: &str, y_label: &str) -> anyhow::Result<Outputs> {
    report.check()?;
    let svg = report_plot(&report, title, y_label);
    let csv = report.to_csv();
    Ok(Outputs { json: serde_json::to_value(&report)?, csv: Some(csv), svg: Some(svg) })
}

fn default_grid(hi: f64, lo: f64) -> Vec<f64> {
    geometric_grid(hi, lo, 8).expect("valid default grid")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairParams {
    x: CPoint,
    y: CPoint,
}

fn estimate_json(e: &DistanceEstimate) -> Value {
    json!({
        "lower": e.bracket.lower,
        "upper": e.bracket.upper,
        "method": e.method,
        "repaired_reading": e.repaired_reading,
    })
}

pub fn distance(ctx: &Ctx) -> anyhow::Result<Outputs> {
    let d = ctx.cfg.domain()?;
    let p: PairParams = ctx.cfg.params()?;
    let e = distance_bracket(d, &p.x, &p.y, &ctx.solver())?;
    soundness(&e.bracket, "distance")?;
    let mut j = estimate_json(&e);
    j["domain"] = serde_json::to_value(d)?;
    j["x"] = serde_json::to_value(&p.x)?;
    j["y"] = serde_json::to_value(&p.y)?;
    let method = serde_json::to_value(e.method)?;
    let csv = format!(
        "lower,upper,method\n{},{},{}\n",
        fmt_float(e.bracket.lower),
        fmt_float(e.bracket.upper),
        method.as_str().unwrap_or_default()
    );
    Ok(Outputs { json: j, csv: Some(csv), svg: None })
}

pub fn geodesic(ctx: &Ctx) -> anyhow::Result<Outputs> {
    let d = ctx.cfg.domain()?;
    let p: PairParams = ctx.cfg.params()?;
    let r = solve_geodesic(d, &p.x, &p.y, &ctx.solver())?;
    soundness(&r.distance, "geodesic distance")?;
    for (i, s) in r.path.segments.iter().enumerate() {
        soundness(s, &format!("segment {i}"))?;
    }
    let n = d.dim();
    let mut csv = String::from("index,cumulative_lower,cumulative_upper,boundary_distance");
    for j in 1..=n {
        csv.push_str(&format!(",re_{j},im_{j}"));
    }
    csv.push('\n');
    let (mut lo, mut up) = (0.0, 0.0);
    let mut profile = Vec::new();
    for (i, z) in r.path.points.iter().enumerate() {
        if i > 0 {
            lo += r.path.segments[i - 1].lower;
            up += r.path.segments[i - 1].upper;
        }
        let bd = d.boundary_distance(z)?;
        profile.push((up, bd));
        let coords: Vec<String> = z.to_reals().iter().map(|v| fmt_float(*v)).collect();
        csv.push_str(&format!("{i},{},{},{},{}\n", fmt_float(lo), fmt_float(up), fmt_float(bd), coords.join(",")));
    }
    let svg = line_plot(
        "boundary distance along the path",
        "cumulative upper length",
        "boundary distance",
        &[Series { name: "path".into(), points: profile }],
    );
    let mut j = serde_json::to_value(&r)?;
    j["domain"] = serde_json::to_value(d)?;
    Ok(Outputs { json: j, csv: Some(csv), svg: Some(svg) })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GromovParams {
    x: CPoint,
    y: CPoint,
    #[serde(default)]
    o: Option<CPoint>,
}

pub fn gromov(ctx: &Ctx) -> anyhow::Result<Outputs> {
    let d = ctx.cfg.domain()?;
    let p: GromovParams = ctx.cfg.params()?;
    let o = p.o.unwrap_or_else(|| d.base_point().clone());
    let b = gromov_product(d, &p.x, &p.y, &o, &ctx.solver())?;
    soundness(&b, "gromov product")?;
    let j = json!({ "lower": b.lower, "upper": b.upper, "x": p.x, "y": p.y, "o": o, "domain": d });
    let csv = format!("lower,upper\n{},{}\n", fmt_float(b.lower), fmt_float(b.upper));
    Ok(Outputs { json: j, csv: Some(csv), svg: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VisibilityParams {
    p: CPoint,
    q: CPoint,
    #[serde(default)]
    eps_grid: Option<Vec<f64>>,
    #[serde(default)]
    approach: Approach,
}

pub fn visibility(ctx: &Ctx) -> anyhow::Result<Outputs> {
    let d = ctx.cfg.domain()?;
    let p: VisibilityParams = ctx.cfg.params()?;
    let grid = p.eps_grid.unwrap_or_else(|| default_grid(1e-1, 1e-4));
    let r = visibility_scan(d, &p.p, &p.q, &grid, &p.approach, &ctx.solver())?;
    from_report(r, "visibility scan", "max boundary distance")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KPointParams {
    p: CPoint,
    w_radius: f64,
    #[serde(default)]
    eps_grid: Option<Vec<f64>>,
}

pub fn k_point(ctx: &Ctx) -> anyhow::Result<Outputs> {
    let d = ctx.cfg.domain()?;
    let p: KPointParams = ctx.cfg.params()?;
    let grid = p.eps_grid.unwrap_or_else(|| default_grid(1e-1, 1e-4));
    let r = k_point_probe(d, &p.p, p.w_radius, &grid, ctx.seed)?;
    from_report(r, "k-point statistic", "k(z, W^c) + log(δ)/2")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GrowthParams {
    #[serde(default)]
    o: Option<CPoint>,
    #[serde(default = "default_samples")]
    samples: usize,
}

fn default_samples() -> usize {
    32
}

pub fn growth(ctx: &Ctx) -> anyhow::Result<Outputs> {
    let d = ctx.cfg.domain()?;
    let p: GrowthParams = ctx.cfg.params()?;
    let o = p.o.unwrap_or_else(|| d.base_point().clone());
    let r = growth_fit(d, &o, p.samples, ctx.seed, &ctx.solver())?;
    from_report(r, "growth of k(o, z)", "upper bound of k(o, z)")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GoldilocksParams {
    #[serde(default)]
    r_grid: Option<Vec<f64>>,
    #[serde(default)]
    focus: Option<CPoint>,
}

pub fn goldilocks(ctx: &Ctx) -> anyhow::Result<Outputs> {
    let d = ctx.cfg.domain()?;
    let p: GoldilocksParams = ctx.cfg.params()?;
    let grid = p.r_grid.unwrap_or_else(|| default_grid(1e-1, 1e-4));
    let r = goldilocks_probe(d, &grid, p.focus.as_ref(), ctx.seed)?;
    from_report(r, "Goldilocks function M(r)", "M(r)")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalizeParams {
    u_center: CPoint,
    u_radius: f64,
    v_radius: f64,
    #[serde(default = "default_pairs")]
    pairs: usize,
}

fn default_pairs() -> usize {
    100
}

pub fn localize(ctx: &Ctx) -> anyhow::Result<Outputs> {
    let d = ctx.cfg.domain()?;
    let p: LocalizeParams = ctx.cfg.params()?;
    let r = localization_check(d, &p.u_center, p.u_radius, p.v_radius, p.pairs, ctx.seed)?;
    report_with_index_plot(r)
}

fn report_with_index_plot(r: ProbeReport) -> anyhow::Result<Outputs> {
    r.check()?;
    let points = r.samples.iter().map(|s| (s.grid_value, s.statistic)).collect();
    let svg = line_plot(
        "local lower minus global upper",
        "pair index",
        "difference",
        &[Series { name: "pairs".into(), points }],
    );
    let csv = r.to_csv();
    Ok(Outputs { json: serde_json::to_value(&r)?, csv: Some(csv), svg: Some(svg) })
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BidiscParams {
    #[serde(default)]
    eps_grid: Option<Vec<f64>>,
}

pub fn case_bidisc(ctx: &Ctx, eps: &[f64]) -> anyhow::Result<Outputs> {
    let p: BidiscParams = ctx.cfg.params()?;
    let grid = if !eps.is_empty() {
        eps.to_vec()
    } else {
        p.eps_grid.unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4])
    };
    let r = run_bidisc_case(&grid)?;
    from_report(r, "bidisc boundary geodesic", "max boundary distance")
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OmegaPsiCaseParams {
    #[serde(default)]
    eps_grid: Option<Vec<f64>>,
    #[serde(default)]
    o: Option<CPoint>,
}

pub fn case_omega_psi(ctx: &Ctx, eps: &[f64]) -> anyhow::Result<Outputs> {
    let p: OmegaPsiCaseParams = ctx.cfg.params()?;
    let params = match ctx.cfg.domain.as_ref().map(|d| d.kind()) {
        None => OmegaPsiParams::exp_neg_c_over_x(std::f64::consts::PI)?,
        Some(DomainKind::OmegaPsi(params)) => params.clone(),
        Some(_) => bail!(KobError::InvalidInput("case-omega-psi needs an omega_psi domain".into())),
    };
    let grid = if !eps.is_empty() {
        eps.to_vec()
    } else {
        p.eps_grid.unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3])
    };
    let r = run_omega_psi_case(&params, &grid, p.o.as_ref(), &ctx.solver())?;
    from_report(r, "Ω_ψ case", "statistic")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BallsParams {
    q: CPoint,
    z: CPoint,
    r: f64,
}

pub fn balls(ctx: &Ctx) -> anyhow::Result<Outputs> {
    let d = ctx.cfg.domain()?;
    let p: BallsParams = ctx.cfg.params()?;
    let c = balls_inequality_check(d, &p.q, &p.z, p.r, &ctx.solver())?;
    soundness(&c.distance, "k(q, z)")?;
    if c.distance.upper >= p.r {
        return Err(KobError::Soundness("certified distance not below r".into()).into());
    }
    let csv = format!(
        "holds,lhs,rhs,margin,distance_lower,distance_upper\n{},{},{},{},{},{}\n",
        c.holds,
        fmt_float(c.lhs),
        fmt_float(c.rhs),
        fmt_float(c.margin),
        fmt_float(c.distance.lower),
        fmt_float(c.distance.upper)
    );
    let mut j = serde_json::to_value(&c)?;
    j["q"] = serde_json::to_value(&p.q)?;
    j["z"] = serde_json::to_value(&p.z)?;
    j["r"] = json!(p.r);
    Ok(Outputs { json: j, csv: Some(csv), svg: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SameheightParams {
    region: SameheightRegion,
    #[serde(default)]
    delta_grid: Option<Vec<f64>>,
    #[serde(default = "default_type")]
    m: u32,
}

fn default_type() -> u32 {
    2
}

pub fn sameheight(ctx: &Ctx) -> anyhow::Result<Outputs> {
    let d = ctx.cfg.domain()?;
    let p: SameheightParams = ctx.cfg.params()?;
    let grid = p.delta_grid.unwrap_or_else(|| vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3]);
    let r = sameheight_scaling(d, &p.region, &grid, p.m, &ctx.solver())?;
    from_report(r, "same-height separation", "endpoint separation")
}

/// Adds the schema tag and, outside reproducible runs, a metadata block.
pub fn finish(mut j: Value, command: &str, metadata: Option<Value>) -> anyhow::Result<Value> {
    let obj = j.as_object_mut().context("outputs are JSON objects")?;
    obj.entry("schema").or_insert_with(|| json!(REPORT_SCHEMA));
    obj.insert("command".into(), json!(command));
    match metadata {
        Some(m) => {
            obj.insert("metadata".into(), m);
        }
        None => {
            obj.remove("metadata");
        }
    }
    Ok(j)
}

