//! Command dispatch behind the `cayley-forge` binary.
//!
//! Every subcommand prints its main result to stdout and writes the same data,
//! tagged with the run seed, into the output directory. Floats in CSV files use
//! `%.12e`; JSON keys are sorted.

pub mod cache;
pub mod config;
pub mod report;

pub use config::{load_config, parse_config, RunConfig, Scenario};
pub use report::{float_csv, json_string, svg_loglog, Reporter};

use crate::error::{Error, Result};
use crate::flow::iterate::{initial_error_scan, iterate_with, IterateParams, ScanSetup};
use crate::flow::{Deformation, LsqrOptions, TangentMode};
use crate::fmt::sci;
use crate::gluing::{
    alpha_cayley_scan, alpha_decay_scan_with, cone_scenario, partition_alpha, quadric_scenario, seam_diagnostics,
    seams_csv, GluedImmersion, Part,
};
use crate::spectra::{
    check_flat_table, compact_index_formula, extract_operator_coeffs, flat_rate_table, index_change, RateTable,
};
use crate::spin7::{angle_criterion, random_frame, OrientedPlane4, Vec8};
use crate::weighted::{
    weighted_holder_norm_with, weighted_sobolev_norm_with, Field, PatchGeometry, RadiusFunction, WeightedNormSpec,
};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use serde::Serialize;
use std::io::Write as _;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "cayley-forge",
    version,
    about = "Cayley planes, conical Cayley gluing and the deformation iteration"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// TOML run configuration; without it the built-in defaults are used.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir` from the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots for scan commands.
    #[arg(long, global = true)]
    pub svg: bool,
    /// Rebuild cached operator matrices instead of reading them.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Seed override for randomized sweeps.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Φ₀ and |τ| of an oriented 4-plane.
    CheckPlane {
        /// Comma-separated basis vectors, e.g. `e1,e2,e3,e4` or `e1,-e2,e3,e4`.
        #[arg(long, allow_hyphen_values = true)]
        frame: String,
    },
    /// Characteristic angles between two 4-planes.
    AngleTest {
        #[arg(long, allow_hyphen_values = true, default_value = "e1,e2,e3,e4")]
        p1: String,
        /// Second plane as basis vectors.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "angles")]
        p2: Option<String>,
        /// Second plane as `span(e1..e4)` rotated by these angles towards `span(e5..e8)`.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        angles: Option<Vec<f64>>,
        /// Additionally sample this many random pairs (uses the seed).
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
    /// Critical rates of the linearized operator on a flat Cayley plane.
    CriticalRates {
        #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
        range: Vec<f64>,
        /// Skip the comparison with the reference table.
        #[arg(long)]
        no_check: bool,
    },
    /// Index jump between two weights.
    IndexChange {
        #[arg(long, allow_hyphen_values = true)]
        delta1: f64,
        #[arg(long, allow_hyphen_values = true)]
        delta2: f64,
        /// Rate table CSV; computed for the flat plane when absent.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Index of a compact Cayley submanifold.
    Index {
        #[arg(long, allow_hyphen_values = true)]
        sigma: i64,
        #[arg(long, allow_hyphen_values = true)]
        euler: i64,
        #[arg(long, allow_hyphen_values = true)]
        self_int: i64,
        #[arg(long, allow_hyphen_values = true)]
        dim_s: i64,
    },
    /// Build the glued immersion at the configured scale.
    Glue {
        #[arg(long)]
        dump_seams: bool,
    },
    /// Cayley margin and cutoff decay over the configured scales.
    AlphaScan,
    /// Initial error ‖F(0)‖ over the configured scales.
    ErrorScan,
    /// Run the deformation iteration at the configured scale.
    Iterate,
    /// Weighted norms of reference fields on the glued immersion.
    Norms,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    0
                }
                ErrorKind::InvalidSubcommand => {
                    let name = e
                        .get(clap::error::ContextKind::InvalidSubcommand)
                        .map(|v| v.to_string())
                        .unwrap_or_default();
                    let err = Error::UnknownCommand(name);
                    eprintln!("error: {err}; run `cayley-forge --help` for the list of commands");
                    err.exit_code()
                }
                _ => {
                    let _ = e.print();
                    2
                }
            };
        }
    };
    configure_threads();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::ConfigInvalid { key, .. } = &e {
                eprintln!("hint: fix `{key}` in the config file");
            }
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("CAYLEY_FORGE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        // a second call in the same process (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Resolved configuration with command-line overrides applied.
pub fn resolve_config(global: &GlobalOpts) -> Result<RunConfig> {
    let mut cfg = match &global.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &global.out {
        cfg.out_dir = o.clone();
    }
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(&cli.global)?;
    let rep = Reporter::new(&cfg.out_dir, cfg.seed)?;
    rep.text("resolved_config.toml", &cfg.to_toml())?;
    let g = &cli.global;
    match &cli.command {
        Command::CheckPlane { frame } => check_plane(&rep, frame),
        Command::AngleTest { p1, p2, angles, random } => {
            angle_test(&rep, p1, p2.as_deref(), angles.as_deref(), *random)
        }
        Command::CriticalRates { range, no_check } => critical_rates(&rep, range[0], range[1], !no_check),
        Command::IndexChange { delta1, delta2, table } => {
            let table = match table {
                Some(p) => RateTable::load(p)?,
                // one unit wider so that a critical endpoint is seen and rejected
                None => flat_rate_table(&extract_operator_coeffs()?, delta1.floor() - 1.0, delta2.ceil() + 1.0)?,
            };
            let k = index_change(&table, *delta1, *delta2)?;
            rep.json(
                "index_change.json",
                &serde_json::json!({"delta1": delta1, "delta2": delta2, "index_change": k}),
            )?;
            println!("{k}");
            Ok(())
        }
        Command::Index {
            sigma,
            euler,
            self_int,
            dim_s,
        } => {
            let k = compact_index_formula(*sigma, *euler, *self_int, *dim_s)?;
            rep.json(
                "index.json",
                &serde_json::json!({"sigma": sigma, "euler": euler, "self_intersection": self_int, "dim_family": dim_s, "index": k}),
            )?;
            println!("{k}");
            Ok(())
        }
        Command::Glue { dump_seams } => glue(&rep, &cfg, *dump_seams),
        Command::AlphaScan => alpha_scan(&rep, &cfg, g.svg),
        Command::ErrorScan => error_scan(&rep, &cfg, g.svg),
        Command::Iterate => iterate(&rep, &cfg, g.svg, !g.no_cache),
        Command::Norms => norms(&rep, &cfg),
    }
}

/// `e3`, `-e7` and friends, comma separated, four of them.
pub fn parse_frame(spec: &str) -> Result<[Vec8; 4]> {
    let vecs: Vec<Vec8> = spec
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            let (sign, rest) = match tok.strip_prefix('-') {
                Some(r) => (-1.0, r),
                None => (1.0, tok.strip_prefix('+').unwrap_or(tok)),
            };
            let idx: usize = rest
                .strip_prefix('e')
                .and_then(|d| d.parse().ok())
                .filter(|i| (1..=8).contains(i))
                .ok_or_else(|| Error::BadRange(format!("frame entry `{tok}` is not one of e1..e8")))?;
            let mut v = [0.0; 8];
            v[idx - 1] = sign;
            Ok(v)
        })
        .collect::<Result<_>>()?;
    vecs.try_into()
        .map_err(|v: Vec<Vec8>| Error::BadRange(format!("a frame needs 4 vectors, got {}", v.len())))
}

#[derive(Serialize)]
struct PlaneReport {
    phi: f64,
    tau_norm: f64,
    cayley: bool,
}

fn check_plane(rep: &Reporter, frame: &str) -> Result<()> {
    let plane = OrientedPlane4::new(parse_frame(frame)?)?;
    let tau = plane.tau().norm();
    let phi = crate::spin7::cayley_margin(&plane);
    let out = PlaneReport {
        phi,
        tau_norm: tau,
        cayley: tau < 1e-10 && phi > 0.0,
    };
    rep.json("check_plane.json", &out)?;
    print!("{}", json_string(&out));
    Ok(())
}

fn angle_test(rep: &Reporter, p1: &str, p2: Option<&str>, angles: Option<&[f64]>, random: usize) -> Result<()> {
    let a = OrientedPlane4::new(parse_frame(p1)?)?;
    let b = match (p2, angles) {
        (Some(s), _) => OrientedPlane4::new(parse_frame(s)?)?,
        (None, Some(th)) => {
            let th: [f64; 4] = th
                .try_into()
                .map_err(|_| Error::BadRange(format!("--angles needs 4 values, got {}", th.len())))?;
            let rot = crate::spin7::angles::rotated_reference(th);
            // express the rotation relative to p1
            let frame = rot.frame.map(|r| {
                let mut v = [0.0; 8];
                for (k, c) in r.iter().enumerate().take(4) {
                    for m in 0..8 {
                        v[m] += c * a.frame[k][m];
                    }
                }
                let comp = crate::spin7::plane::orthonormal_complement(&a.frame);
                for (k, c) in r.iter().enumerate().skip(4) {
                    for m in 0..8 {
                        v[m] += c * comp[k - 4][m];
                    }
                }
                v
            });
            OrientedPlane4::from_vectors(&frame)?
        }
        (None, None) => return Err(Error::BadRange("give --p2 or --angles".into())),
    };
    let report = angle_criterion(&a, &b)?;
    rep.json("angle_test.json", &report)?;
    print!("{}", json_string(&report));
    if random > 0 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rep.seed);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "theta1",
            "theta2",
            "theta3",
            "theta4",
            "sum",
            "passes",
            "intersection_sign",
        ])
        .expect("in-memory write");
        for _ in 0..random {
            let (x, y) = (random_frame(&mut rng), random_frame(&mut rng));
            let r = angle_criterion(&x, &y)?;
            let mut rec: Vec<String> = r.angles.iter().map(|v| sci(*v)).collect();
            rec.extend([sci(r.sum), r.passes.to_string(), r.intersection_sign.to_string()]);
            w.write_record(rec).expect("in-memory write");
        }
        rep.csv(
            "angle_sweep.csv",
            &String::from_utf8(w.into_inner().expect("flush")).expect("utf8"),
        )?;
    }
    Ok(())
}

fn critical_rates(rep: &Reporter, lo: f64, hi: f64, check: bool) -> Result<()> {
    let op = extract_operator_coeffs()?;
    let table = flat_rate_table(&op, lo, hi)?;
    let csv = table.to_csv();
    rep.csv("critical_rates.csv", &csv)?;
    print!("{csv}");
    std::io::stdout().flush()?;
    if check && (lo, hi) == (-4.0, 2.0) {
        check_flat_table(&table)?;
    }
    Ok(())
}

fn build(cfg: &RunConfig, t: f64) -> Result<GluedImmersion> {
    let data = cfg.gluing(t);
    match cfg.scenario {
        Scenario::Quadric => quadric_scenario(cfg.epsilon, &data, cfg.resolution()),
        Scenario::Cone => cone_scenario(&data, cfg.resolution()),
    }
}

fn part_name(p: Part) -> &'static str {
    match p {
        Part::Upper => "upper",
        Part::Middle => "middle",
        Part::Lower => "lower",
        Part::Leftover => "leftover",
    }
}

fn glue(rep: &Reporter, cfg: &RunConfig, dump_seams: bool) -> Result<()> {
    let glued = build(cfg, cfg.t)?;
    glued.export(&rep.dir, "glued")?;
    let margin = alpha_cayley_scan(&glued)?;
    let counts = glued.part_counts();
    let parts: std::collections::BTreeMap<&str, usize> = [Part::Upper, Part::Middle, Part::Lower, Part::Leftover]
        .iter()
        .map(|&p| (part_name(p), counts[p as usize]))
        .collect();
    let summary = serde_json::json!({
        "t": cfg.t,
        "nodes": glued.len(),
        "parts": parts,
        "min_margin": margin.min_margin,
        "argmin_node": margin.argmin,
        "argmin_part": part_name(glued.parts[margin.argmin]),
        "radius_sandwich": glued.radius_sandwich(),
    });
    rep.json("glue.json", &summary)?;
    print!("{}", json_string(&summary));
    if dump_seams {
        rep.csv("seams.csv", &seams_csv(&seam_diagnostics(&glued)))?;
    }
    Ok(())
}

fn alpha_scan(rep: &Reporter, cfg: &RunConfig, svg: bool) -> Result<()> {
    let rows = cfg
        .t_list
        .iter()
        .map(|&t| {
            let glued = build(cfg, t)?;
            let geom = PatchGeometry::new(&glued.patch);
            let m = alpha_cayley_scan(&glued)?;
            let d = alpha_decay_scan_with(&glued, &geom)?;
            let (lo, hi) = glued.data.alpha_transition();
            let inside = d.rho_at_argmax >= lo * (1.0 - 1e-9) && d.rho_at_argmax <= hi * (1.0 + 1e-9);
            Ok(vec![
                t,
                m.min_margin,
                1.0 - m.min_margin,
                d.sup_rho_grad_alpha,
                d.normalized,
                d.rho_at_argmax,
                f64::from(u8::from(inside)),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let csv = float_csv(
        &[
            "t",
            "min_margin",
            "margin_deficit",
            "sup_rho_grad_alpha",
            "normalized",
            "rho_at_argmax",
            "argmax_in_transition",
        ],
        &rows,
    );
    rep.csv("alpha_scan.csv", &csv)?;
    print!("{csv}");
    if svg {
        let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[3]).collect();
        rep.text(
            "alpha_scan.svg",
            &svg_loglog("cutoff decay", "t", "sup rho |grad alpha|", &t, &y),
        )?;
    }
    Ok(())
}

fn error_scan(rep: &Reporter, cfg: &RunConfig, svg: bool) -> Result<()> {
    let setup = ScanSetup {
        epsilon: cfg.epsilon,
        nu: cfg.nu,
        big_r0: cfg.big_r0,
        r0: cfg.r0,
        lambda: cfg.lambda,
        mu: cfg.mu,
        delta: cfg.delta,
        p: cfg.p,
        k: cfg.k,
        res: cfg.resolution(),
        cone_only: cfg.scenario == Scenario::Cone,
    };
    let scan = initial_error_scan(&setup, &cfg.t_list)?;
    let csv = scan.to_csv();
    rep.csv("error_scan.csv", &csv)?;
    rep.json(
        "error_scan.json",
        &serde_json::json!({"slope": scan.slope, "predicted": scan.predicted}),
    )?;
    print!("{csv}");
    println!("# slope={} predicted={}", sci(scan.slope), sci(scan.predicted));
    if svg {
        let t: Vec<f64> = scan.rows.iter().map(|r| r.t).collect();
        let y: Vec<f64> = scan.rows.iter().map(|r| r.f0_norm).collect();
        rep.text("error_scan.svg", &svg_loglog("initial error", "t", "||F(0)||", &t, &y))?;
    }
    Ok(())
}

fn iterate(rep: &Reporter, cfg: &RunConfig, svg: bool, use_cache: bool) -> Result<()> {
    let glued = build(cfg, cfg.t)?;
    let deform = Deformation::new(&glued.patch, TangentMode::Analytic, glued.rho.clone())?;
    let geom = PatchGeometry::new(&glued.patch);
    let d = if use_cache {
        cache::assembled_d(&rep.dir.join("cache"), &cfg_key(cfg), &deform)?
    } else {
        deform.assemble_d()
    };
    let params = IterateParams {
        max_iter: cfg.max_iter,
        tol: cfg.tol,
        delta: cfg.delta,
        p: cfg.p,
        k: cfg.k,
        lsqr: LsqrOptions {
            max_iter: cfg.lsqr_max_iter,
            ..LsqrOptions::default()
        },
        ..IterateParams::default()
    };
    let r = iterate_with(&deform, &geom, &d, &params)?;
    let csv = r.history_csv();
    rep.csv("iterate_history.csv", &csv)?;
    let mut bin = Vec::with_capacity(8 + 32 * r.v_final.values.len());
    bin.extend_from_slice(&(r.v_final.values.len() as u64).to_le_bytes());
    for v in &r.v_final.values {
        for x in v {
            bin.extend_from_slice(&x.to_le_bytes());
        }
    }
    std::fs::write(rep.path("v_final.bin"), bin)?;
    let summary = serde_json::json!({
        "converged": r.converged,
        "iterations": r.history.len(),
        "f0_norm": r.f0_norm,
        "final_f_norm": r.final_f_norm,
        "initial_margin": r.initial_margin,
        "final_margin": r.final_margin,
        "v_norm": r.v_norm,
        "first_step_norm": r.first_step_norm,
    });
    rep.json("iterate.json", &summary)?;
    print!("{csv}");
    if svg {
        let it: Vec<f64> = r.history.iter().map(|h| h.iter as f64).collect();
        let s: Vec<f64> = r.history.iter().map(|h| h.step_norm).collect();
        rep.text(
            "iterate.svg",
            &svg_loglog("step norms", "iteration", "step norm", &it, &s),
        )?;
    }
    Ok(())
}

/// Everything that determines the assembled operator.
fn cfg_key(cfg: &RunConfig) -> String {
    format!(
        "scenario={:?};epsilon={};t={};nu={};nu_p={};nu_pp={};big_r0={};r0={};link={:?};radial={}",
        cfg.scenario, cfg.epsilon, cfg.t, cfg.nu, cfg.nu_p, cfg.nu_pp, cfg.big_r0, cfg.r0, cfg.link_res, cfg.radial_res
    )
}

fn norms(rep: &Reporter, cfg: &RunConfig) -> Result<()> {
    let glued = build(cfg, cfg.t)?;
    let geom = PatchGeometry::new(&glued.patch);
    let deform = Deformation::new(&glued.patch, TangentMode::Analytic, glued.rho.clone())?;
    let resolution = format!(
        "{}x{}x{}x{}",
        cfg.link_res[0], cfg.link_res[1], cfg.link_res[2], cfg.radial_res
    );
    let rho: &RadiusFunction = &glued.rho;
    let fields: Vec<(&str, Field)> = vec![
        ("one", Field::scalar(vec![1.0; glued.len()])),
        ("alpha", Field::scalar(partition_alpha(&glued))),
        (
            "rho_delta",
            Field::scalar(rho.values.iter().map(|r| r.powf(cfg.delta)).collect()),
        ),
        ("f0", deform.f0().to_field()),
    ];
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["norm_kind", "p", "k", "delta", "value", "resolution"])
        .expect("in-memory write");
    for (name, f) in &fields {
        for k in 0..=cfg.k {
            let spec = WeightedNormSpec::new(cfg.p, k, cfg.delta)?;
            let s = weighted_sobolev_norm_with(&geom, f, &spec, rho)?;
            let h = weighted_holder_norm_with(&geom, f, &spec, rho)?;
            for (kind, v) in [("sobolev", s), ("holder", h)] {
                w.write_record([
                    format!("{kind}:{name}"),
                    sci(cfg.p),
                    k.to_string(),
                    sci(cfg.delta),
                    sci(v),
                    resolution.clone(),
                ])
                .expect("in-memory write");
            }
        }
    }
    let csv = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
    rep.csv("norms.csv", &csv)?;
    print!("{csv}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_tokens() {
        let f = parse_frame("e1,-e2,e3,e8").unwrap();
        assert_eq!(f[1][1], -1.0);
        assert_eq!(f[3][7], 1.0);
        assert!(parse_frame("e1,e2,e3").is_err());
        assert!(parse_frame("e1,e2,e3,e9").is_err());
    }

    #[test]
    fn unknown_command_exits_2() {
        assert_eq!(dispatch(["cayley-forge", "frobnicate"]), 2);
    }
}
