//! Batch front end over the bounds and FEM crates: one-shot commands that
//! read a flat key-value config, compute, and emit a JSON or CSV report
//! with the full input echoed back.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use nb_core::bounds::{cusp_mu_lower, szego_weinberger_upper, SearchOpts, Variant};
use nb_core::config::KvConfig;
use nb_core::verify::{sample_admissible_tuples, verify_tuple, VerifyRow};
use nb_core::{ClassicalBounds, CuspProfile, NbError, QuadSpec};
use nb_fem::assembly::tri_geoms;
use nb_fem::error::FemError;
use nb_fem::mesh::TriMesh;
use nb_fem::{
    capacity_p, capacity_transfer_check, mesh_annulus, mesh_cusp_2d, mesh_disc, mesh_rect,
    mesh_square, mu2_fem_report, mup_rayleigh, CondenserSpec, Plate,
};
use rayon::prelude::*;
use serde_json::{json, Value};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "nb", version, about = "Neumann eigenvalue bounds for cusp domains")]
struct Cli {
    /// Pipeline to run.
    #[arg(long, value_enum)]
    cmd: Cmd,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format. Defaults to the command's native one (json for
    /// bound/classical/eig/capacity, csv for verify-constants/sweep).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides the config key `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config key `h`.
    #[arg(long)]
    h: Option<f64>,
    /// Overrides the config key `grading_levels`.
    #[arg(long)]
    grading_levels: Option<usize>,
    /// Overrides the config key `p`.
    #[arg(long)]
    p: Option<f64>,
    /// Overrides the config key `restarts`.
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Cmd {
    Bound,
    Classical,
    VerifyConstants,
    Eig,
    Capacity,
    Sweep,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Bound => "bound",
            Cmd::Classical => "classical",
            Cmd::VerifyConstants => "verify-constants",
            Cmd::Eig => "eig",
            Cmd::Capacity => "capacity",
            Cmd::Sweep => "sweep",
        }
    }

    fn native_format(self) -> Format {
        match self {
            Cmd::VerifyConstants | Cmd::Sweep => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<FemError>() {
            return if e.is_input_error() { 2 } else { 3 };
        }
        if let Some(e) = cause.downcast_ref::<NbError>() {
            return if e.is_input_error() { 2 } else { 3 };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    3
}

fn config_error(msg: String) -> anyhow::Error {
    anyhow::Error::new(NbError::Config(msg))
}

fn run(cli: Cli) -> Result<()> {
    if let Ok(raw) = std::env::var("NB_THREADS") {
        let n: usize = raw
            .parse()
            .map_err(|_| config_error(format!("NB_THREADS = `{raw}` is not an integer")))?;
        if n > 0 {
            // Ignore the error if a pool already exists (tests call run twice).
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }

    let text = fs::read_to_string(&cli.config)
        .with_context(|| format!("reading config {}", cli.config.display()))?;
    let mut kv = KvConfig::parse(&text)?;
    if let Some(v) = cli.seed {
        kv.set("seed", v);
    }
    if let Some(v) = cli.h {
        kv.set("h", v);
    }
    if let Some(v) = cli.grading_levels {
        kv.set("grading_levels", v);
    }
    if let Some(v) = cli.p {
        kv.set("p", v);
    }
    if let Some(v) = cli.restarts {
        kv.set("restarts", v);
    }

    let native = cli.cmd.native_format();
    if cli.format.unwrap_or(native) != native {
        return Err(config_error(format!(
            "command `{}` only emits {}",
            cli.cmd.name(),
            match native {
                Format::Json => "json",
                Format::Csv => "csv",
            }
        )));
    }

    let output = match cli.cmd {
        Cmd::Bound => cmd_bound(&kv)?,
        Cmd::Classical => cmd_classical(&kv)?,
        Cmd::VerifyConstants => cmd_verify_constants(&kv)?,
        Cmd::Eig => cmd_eig(&kv)?,
        Cmd::Capacity => cmd_capacity(&kv)?,
        Cmd::Sweep => cmd_sweep(&kv)?,
    };

    match &cli.out {
        Some(path) => fs::write(path, &output)
            .with_context(|| format!("writing report {}", path.display()))?,
        None => print!("{output}"),
    }
    Ok(())
}

// ---------------------------------------------------------------- reports

fn render_json(command: &str, kv: &KvConfig, report: Value) -> String {
    let input: serde_json::Map<String, Value> = kv
        .entries()
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let doc = json!({
        "version": VERSION,
        "command": command,
        "input": input,
        "report": report,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialization");
    s.push('\n');
    s
}

fn render_csv(command: &str, kv: &KvConfig, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# nb {VERSION} {command}\n"));
    for (k, v) in kv.entries() {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out.push_str(&format!("# columns: {}\n", columns.join(",")));
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Keeps error text usable inside an unquoted CSV cell.
fn csv_safe(s: &str) -> String {
    s.replace(',', ";").replace('\n', " ")
}

fn opt_cell<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn seed_of(kv: &KvConfig) -> Result<u64> {
    match kv.get("seed") {
        None => Ok(0),
        Some(raw) => raw
            .parse()
            .map_err(|_| config_error(format!("key `seed`: `{raw}` is not a non-negative integer"))),
    }
}

// --------------------------------------------------------------- commands

fn search_opts(kv: &KvConfig) -> Result<SearchOpts> {
    let mut opts = SearchOpts::default();
    if let Some(v) = kv.get_usize("q_points")? {
        opts.q_points = v;
    }
    if let Some(v) = kv.get_usize("r_points")? {
        opts.r_points = v;
    }
    if let Some(v) = kv.get_usize("refine_rounds")? {
        opts.refine_rounds = v;
    }
    if let Some(raw) = kv.get("variant") {
        opts.variant = match raw.to_ascii_lowercase().as_str() {
            "corrected" => Variant::Corrected,
            "simplified" => Variant::Simplified,
            _ => {
                return Err(config_error(format!(
                    "key `variant`: `{raw}` is neither `corrected` nor `simplified`"
                )))
            }
        };
    }
    Ok(opts)
}

fn cmd_bound(kv: &KvConfig) -> Result<String> {
    let profile = CuspProfile::from_kv(kv)?;
    let p = kv.require_f64("p")?;
    let report = cusp_mu_lower(&profile, p, &search_opts(kv)?)?;
    Ok(render_json("bound", kv, serde_json::to_value(&report)?))
}

fn cmd_classical(kv: &KvConfig) -> Result<String> {
    let n = kv.require_usize("n")?;
    let volume = kv.require_f64("volume")?;
    let diameter = kv.require_f64("diameter")?;
    let p = kv.require_f64("p")?;
    let report = ClassicalBounds::compute(n, volume, diameter, p)?;
    Ok(render_json("classical", kv, serde_json::to_value(&report)?))
}

const VERIFY_COLUMNS: &[&str] = &[
    "n",
    "gammas",
    "a",
    "p",
    "q",
    "r",
    "k_closed_corrected",
    "k_closed_simplified",
    "k_numeric",
    "m_exact",
    "m_numeric",
    "status",
];

fn verify_row_cells(row: &VerifyRow) -> Vec<String> {
    let t = &row.tuple;
    vec![
        t.profile.n.to_string(),
        t.profile.gammas.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(";"),
        t.a.to_string(),
        t.p.to_string(),
        t.q.to_string(),
        t.r.to_string(),
        row.k_closed_corrected.to_string(),
        opt_cell(&row.k_closed_simplified),
        row.k_numeric.to_string(),
        row.m_exact.to_string(),
        row.m_numeric.to_string(),
        csv_safe(&row.status),
    ]
}

fn cmd_verify_constants(kv: &KvConfig) -> Result<String> {
    let count = kv.get_usize("count")?.unwrap_or(50);
    let seed = seed_of(kv)?;
    let spec = QuadSpec::default();
    let tuples = sample_admissible_tuples(count, seed);
    let rows = tuples
        .par_iter()
        .map(|t| verify_tuple(t, &spec))
        .collect::<Result<Vec<_>, NbError>>()?;
    let cells: Vec<Vec<String>> = rows.iter().map(verify_row_cells).collect();
    Ok(render_csv("verify-constants", kv, VERIFY_COLUMNS, &cells))
}

/// Builds the mesh named by the `domain` key. Returns the mesh along with
/// the cusp exponent when the domain has one.
fn build_mesh(kv: &KvConfig) -> Result<(TriMesh, Option<f64>)> {
    let domain = kv.require("domain")?;
    let h = kv.require_f64("h")?;
    match domain {
        "square" => Ok((mesh_square(h)?, None)),
        "rect" => {
            let width = kv.require_f64("width")?;
            let depth = kv.require_f64("depth")?;
            Ok((mesh_rect(width, depth, h)?, None))
        }
        "disc" => Ok((mesh_disc(h)?, None)),
        "annulus" => {
            let r_inner = kv.require_f64("r_inner")?;
            let r_outer = kv.require_f64("r_outer")?;
            Ok((mesh_annulus(r_inner, r_outer, h)?, None))
        }
        "cusp" => {
            let gamma1 = kv.require_f64("gamma1")?;
            let levels = kv.get_usize("grading_levels")?.unwrap_or(12);
            Ok((mesh_cusp_2d(gamma1, h, levels)?, Some(gamma1)))
        }
        other => Err(config_error(format!(
            "key `domain`: `{other}` is not one of square, rect, disc, annulus, cusp"
        ))),
    }
}

fn mesh_area(mesh: &TriMesh) -> f64 {
    tri_geoms(mesh).iter().map(|g| g.area).sum()
}

/// Composite lower bound and equal-volume-ball upper bound for a cusp
/// domain, compared against a FEM value. Unavailability (no admissible
/// exponents, negative radicand everywhere) is reported, not fatal.
fn bracket_json(gamma1: f64, p: f64, area: f64, fem_value: f64) -> Value {
    let bound = CuspProfile::new(2, vec![gamma1])
        .and_then(|profile| cusp_mu_lower(&profile, p, &SearchOpts::default()));
    match bound {
        Ok(report) => {
            let sw = szego_weinberger_upper(2, area).expect("positive mesh area");
            let ok = report.mu_lower <= fem_value && fem_value <= sw * 1.02;
            json!({
                "mu_lower": report.mu_lower,
                "sw_upper": sw,
                "ok": ok,
                "report": serde_json::to_value(&report).expect("report serialization"),
            })
        }
        Err(e) => json!({ "status": format!("unavailable: {e}") }),
    }
}

fn cmd_eig(kv: &KvConfig) -> Result<String> {
    let (mesh, gamma1) = build_mesh(kv)?;
    let p = kv.get_f64("p")?.unwrap_or(2.0);
    let restarts = kv.get_usize("restarts")?.unwrap_or(8);
    let iters = kv.get_usize("iters")?.unwrap_or(500);
    let seed = seed_of(kv)?;

    let mu2 = mu2_fem_report(&mesh)?;
    let mup = mup_rayleigh(&mesh, p, restarts, iters, seed)?;
    let bracket = match gamma1 {
        Some(g) => bracket_json(g, p, mesh_area(&mesh), mup.value),
        None => Value::Null,
    };
    let report = json!({
        "n_vertices": mesh.vertices.len(),
        "n_triangles": mesh.triangles.len(),
        "mu2": {
            "value": mu2.value,
            "residual": mu2.residual,
            "iterations": mu2.iterations,
            "dense": mu2.dense,
        },
        "mup": {
            "value": mup.value,
            "p": mup.p,
            "best_restart": mup.best_restart,
            "iterations": mup.iterations,
            "restarts": mup.restarts,
            "discretization": mup.discretization,
        },
        "bracket": bracket,
    });
    Ok(render_json("eig", kv, report))
}

fn parse_plates(key: &str, raw: &str) -> Result<Vec<Plate>> {
    raw.split(';')
        .map(|item| {
            let item = item.trim();
            let bad = || {
                config_error(format!(
                    "key `{key}`: `{item}` is not disc:cx,cy,r | rect:x0,y0,x1,y1 | ring:cx,cy,ri,ro"
                ))
            };
            let (kind, nums) = item.split_once(':').ok_or_else(bad)?;
            let vals: Vec<f64> = nums
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?;
            match (kind.trim(), vals.len()) {
                ("disc", 3) => Ok(Plate::Disc { center: [vals[0], vals[1]], radius: vals[2] }),
                ("rect", 4) => Ok(Plate::Rect {
                    corner0: [vals[0], vals[1]],
                    corner1: [vals[2], vals[3]],
                }),
                ("ring", 4) => Ok(Plate::Ring {
                    center: [vals[0], vals[1]],
                    inner: vals[2],
                    outer: vals[3],
                }),
                _ => Err(bad()),
            }
        })
        .collect()
}

fn cmd_capacity(kv: &KvConfig) -> Result<String> {
    let p = kv.require_f64("p")?;
    let cond = CondenserSpec {
        plate0: parse_plates("plate0", kv.require("plate0")?)?,
        plate1: parse_plates("plate1", kv.require("plate1")?)?,
    };
    let report = if let Some(a) = kv.get_f64("a")? {
        // A map parameter requests the pullback comparison on a cusp pair.
        let gamma1 = kv.require_f64("gamma1")?;
        let h = kv.require_f64("h")?;
        let levels = kv.get_usize("grading_levels")?.unwrap_or(12);
        let profile = CuspProfile::new(2, vec![gamma1])?;
        let t = capacity_transfer_check(&profile, a, p, &cond, h, levels)?;
        json!({
            "capacity": t.cap_original,
            "transfer": {
                "a": t.a,
                "p": t.p,
                "gammas": t.gammas,
                "h": t.h,
                "k_sup": t.k_sup,
                "cap_pullback": t.cap_pullback,
                "cap_original": t.cap_original,
                "ratio": t.ratio,
                "mesh_tol": t.mesh_tol,
                "pass": t.pass,
            },
        })
    } else {
        let (mesh, _) = build_mesh(kv)?;
        let c = capacity_p(&mesh, &cond, p)?;
        json!({
            "capacity": c.value,
            "p": c.p,
            "grad_norm": c.grad_norm,
            "iterations": c.iterations,
            "pinned0": c.pinned0,
            "pinned1": c.pinned1,
            "transfer": Value::Null,
        })
    };
    Ok(render_json("capacity", kv, report))
}

// ------------------------------------------------------------------ sweep

/// Cartesian expansion of the comma lists under `keys`, in config order,
/// first-listed key varying slowest. Keys absent from the config are
/// skipped. Each combo is returned as (key, value) assignments.
fn expand_grid(kv: &KvConfig, keys: &[&str]) -> Vec<Vec<(String, String)>> {
    let axes: Vec<(String, Vec<String>)> = kv
        .entries()
        .iter()
        .filter(|(k, _)| keys.contains(&k.as_str()))
        .map(|(k, v)| {
            (k.clone(), v.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>())
        })
        .collect();
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in &axes {
        let mut next = Vec::with_capacity(combos.len() * values.len());
        for combo in &combos {
            for v in values {
                let mut c = combo.clone();
                c.push((key.clone(), v.clone()));
                next.push(c);
            }
        }
        combos = next;
    }
    combos
}

fn row_config(kv: &KvConfig, combo: &[(String, String)]) -> KvConfig {
    let mut row = kv.clone();
    for (k, v) in combo {
        row.set(k, v);
    }
    row
}

const SWEEP_EIG_COLUMNS: &[&str] = &[
    "gamma1",
    "h",
    "p",
    "grading_levels",
    "restarts",
    "iters",
    "seed",
    "mu2",
    "mup",
    "mu_lower",
    "sw_upper",
    "bracket_ok",
    "status",
];

fn sweep_eig_row(kv: &KvConfig) -> Vec<String> {
    let mut cells = Vec::with_capacity(SWEEP_EIG_COLUMNS.len());
    let run = || -> Result<Vec<String>> {
        let gamma1 = kv.require_f64("gamma1")?;
        let h = kv.require_f64("h")?;
        let p = kv.get_f64("p")?.unwrap_or(2.0);
        let levels = kv.get_usize("grading_levels")?.unwrap_or(12);
        let restarts = kv.get_usize("restarts")?.unwrap_or(8);
        let iters = kv.get_usize("iters")?.unwrap_or(500);
        let seed = seed_of(kv)?;

        let mesh = mesh_cusp_2d(gamma1, h, levels)?;
        let mu2 = mu2_fem_report(&mesh)?;
        let mup = mup_rayleigh(&mesh, p, restarts, iters, seed)?;
        let bound = CuspProfile::new(2, vec![gamma1])
            .and_then(|profile| cusp_mu_lower(&profile, p, &SearchOpts::default()));
        let sw = szego_weinberger_upper(2, mesh_area(&mesh))?;
        let (mu_lower, bracket_ok) = match &bound {
            Ok(rep) => {
                let ok = rep.mu_lower <= mup.value && mup.value <= sw * 1.02;
                (Some(rep.mu_lower), Some(ok))
            }
            Err(_) => (None, None),
        };
        Ok(vec![
            gamma1.to_string(),
            h.to_string(),
            p.to_string(),
            levels.to_string(),
            restarts.to_string(),
            iters.to_string(),
            seed.to_string(),
            mu2.value.to_string(),
            mup.value.to_string(),
            opt_cell(&mu_lower),
            sw.to_string(),
            opt_cell(&bracket_ok),
            match &bound {
                Ok(_) => "ok".to_string(),
                Err(e) => csv_safe(&format!("no-bound: {e}")),
            },
        ])
    };
    match run() {
        Ok(row) => return row,
        Err(e) => {
            for key in &SWEEP_EIG_COLUMNS[..7] {
                cells.push(kv.get(key).unwrap_or("").to_string());
            }
            for _ in 7..SWEEP_EIG_COLUMNS.len() - 1 {
                cells.push(String::new());
            }
            cells.push(csv_safe(&format!("error: {e:#}")));
        }
    }
    cells
}

const SWEEP_BOUND_COLUMNS: &[&str] = &[
    "n",
    "gammas",
    "p",
    "a_star",
    "k_pq",
    "m_rp",
    "b_rq",
    "mu_lower",
    "extrapolated",
    "simplified_invalid",
    "mu_lower_simplified",
    "status",
];

fn sweep_bound_row(kv: &KvConfig, opts: &SearchOpts) -> Vec<String> {
    let run = || -> Result<Vec<String>> {
        let n = kv.require_usize("n")?;
        let gammas = kv.require_f64_list("gammas")?;
        let p = kv.require_f64("p")?;
        let profile = CuspProfile::new(n, gammas)?;
        let rep = cusp_mu_lower(&profile, p, opts)?;
        Ok(vec![
            n.to_string(),
            rep.profile.gammas.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(";"),
            p.to_string(),
            rep.a_star.to_string(),
            rep.k_pq.to_string(),
            rep.m_rp.to_string(),
            rep.b_rq.to_string(),
            rep.mu_lower.to_string(),
            rep.extrapolated.to_string(),
            rep.simplified_invalid.to_string(),
            opt_cell(&rep.mu_lower_simplified),
            "ok".to_string(),
        ])
    };
    run().unwrap_or_else(|e| {
        let mut cells = Vec::with_capacity(SWEEP_BOUND_COLUMNS.len());
        for key in &SWEEP_BOUND_COLUMNS[..3] {
            cells.push(kv.get(key).map(|v| csv_safe(v)).unwrap_or_default());
        }
        for _ in 3..SWEEP_BOUND_COLUMNS.len() - 1 {
            cells.push(String::new());
        }
        cells.push(csv_safe(&format!("error: {e:#}")));
        cells
    })
}

fn cmd_sweep(kv: &KvConfig) -> Result<String> {
    let task = kv.require("task")?;
    match task {
        "eig" => {
            let combos = expand_grid(kv, &["gamma1", "h", "p", "grading_levels"]);
            let rows: Vec<Vec<String>> = combos
                .par_iter()
                .map(|combo| sweep_eig_row(&row_config(kv, combo)))
                .collect();
            Ok(render_csv("sweep", kv, SWEEP_EIG_COLUMNS, &rows))
        }
        "bound" => {
            let opts = search_opts(kv)?;
            // `gammas` lists whole profiles: components split by commas
            // inside each ';'-separated group.
            let mut base = kv.clone();
            let groups: Vec<String> = kv
                .require("gammas")?
                .split(';')
                .map(|g| g.trim().to_string())
                .collect();
            base.set("gammas", "placeholder");
            let mut combos = Vec::new();
            for scalar in expand_grid(&base, &["n", "p"]) {
                for g in &groups {
                    let mut c = scalar.clone();
                    c.push(("gammas".to_string(), g.replace(';', ",")));
                    combos.push(c);
                }
            }
            let rows: Vec<Vec<String>> = combos
                .par_iter()
                .map(|combo| sweep_bound_row(&row_config(kv, combo), &opts))
                .collect();
            Ok(render_csv("sweep", kv, SWEEP_BOUND_COLUMNS, &rows))
        }
        other => Err(config_error(format!(
            "key `task`: `{other}` is neither `eig` nor `bound`"
        ))),
    }
}
