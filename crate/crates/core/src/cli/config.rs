//! Run configuration: a TOML file with every key optional except `scenario`.

use crate::error::{Error, Result};
use crate::gluing::GluingData;
use crate::scenarios::Resolution;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Quadric cone glued to its rescaled smoothing.
    Quadric,
    /// Quadric cone glued to itself (already Cayley).
    Cone,
}

/// Keys as they appear in the file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<Scenario>,
    epsilon: Option<f64>,
    t: Option<f64>,
    t_list: Option<Vec<f64>>,
    nu: Option<f64>,
    nu_p: Option<f64>,
    nu_pp: Option<f64>,
    big_r0: Option<f64>,
    r0: Option<f64>,
    p: Option<f64>,
    k: Option<usize>,
    delta: Option<f64>,
    mu: Option<f64>,
    lambda: Option<f64>,
    link_res: Option<[usize; 3]>,
    radial_res: Option<usize>,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    max_iter: Option<usize>,
    tol: Option<f64>,
    lsqr_max_iter: Option<usize>,
}

/// Fully resolved configuration; serialized back as the config echo.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub epsilon: f64,
    pub t: f64,
    pub t_list: Vec<f64>,
    pub nu: f64,
    pub nu_p: f64,
    pub nu_pp: f64,
    pub big_r0: f64,
    pub r0: f64,
    pub p: f64,
    pub k: usize,
    pub delta: f64,
    pub mu: f64,
    pub lambda: f64,
    pub link_res: [usize; 3],
    pub radial_res: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub lsqr_max_iter: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        resolve(RawConfig {
            scenario: Some(Scenario::Quadric),
            ..Default::default()
        })
        .expect("defaults are valid")
    }
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let scenario = raw
        .scenario
        .ok_or_else(|| Error::config("scenario", "missing; use \"quadric\" or \"cone\""))?;
    let epsilon = raw.epsilon.unwrap_or(0.1);
    let lambda = raw.lambda.unwrap_or(-1.0);
    let mu = raw.mu.unwrap_or(1.5);
    let nu = match raw.nu {
        Some(nu) => nu,
        None => GluingData::balanced_nu(lambda, mu).map_err(|e| Error::config("nu", e.to_string()))?,
    };
    let cfg = RunConfig {
        scenario,
        epsilon,
        t: raw.t.unwrap_or(0.02),
        t_list: raw.t_list.unwrap_or_else(|| vec![0.08, 0.04, 0.02, 0.01]),
        nu,
        nu_p: raw.nu_p.unwrap_or(0.85 * nu),
        nu_pp: raw.nu_pp.unwrap_or(0.7 * nu),
        big_r0: raw.big_r0.unwrap_or(0.5),
        r0: raw.r0.unwrap_or(2.0 * epsilon),
        p: raw.p.unwrap_or(2.0),
        k: raw.k.unwrap_or(1),
        delta: raw.delta.unwrap_or(1.25),
        mu,
        lambda,
        link_res: raw.link_res.unwrap_or([6, 6, 6]),
        radial_res: raw.radial_res.unwrap_or(64),
        out_dir: raw.out_dir.unwrap_or_else(|| PathBuf::from("cayley-forge-out")),
        seed: raw.seed.unwrap_or(0),
        max_iter: raw.max_iter.unwrap_or(20),
        tol: raw.tol.unwrap_or(1e-10),
        lsqr_max_iter: raw.lsqr_max_iter.unwrap_or(20_000),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(Error::config("nu", format!("must lie in (0, 1), got {}", self.nu)));
        }
        if !(self.nu_p > 0.0 && self.nu_p < self.nu) {
            return Err(Error::config(
                "nu_p",
                format!("need ν″ < ν′ < ν, got ν′ = {} with ν = {}", self.nu_p, self.nu),
            ));
        }
        if !(self.nu_pp > 0.0 && self.nu_pp < self.nu_p) {
            return Err(Error::config(
                "nu_pp",
                format!("need 0 < ν″ < ν′, got ν″ = {} with ν′ = {}", self.nu_pp, self.nu_p),
            ));
        }
        if !(self.big_r0 > 0.0 && self.big_r0 < 1.0) {
            return Err(Error::config("big_r0", "R₀ must lie in (0, 1)"));
        }
        if !(self.r0 > self.epsilon) {
            return Err(Error::config(
                "r0",
                format!("the neck start r₀t must lie above the core εt; got r₀ = {}", self.r0),
            ));
        }
        if !(self.p > 1.0) {
            return Err(Error::config("p", "must exceed 1"));
        }
        if self.k > 1 {
            return Err(Error::config(
                "k",
                "k ≤ 1 (the iteration reports k + 1 ≤ 2 derivatives)",
            ));
        }
        if self.link_res.iter().any(|&n| n < 3) || self.radial_res < 8 {
            return Err(Error::config(
                "link_res",
                "link axes need ≥ 3 nodes and the radial axis ≥ 8",
            ));
        }
        for (key, list) in [("t", vec![self.t]), ("t_list", self.t_list.clone())] {
            for t in list {
                if !(t > 0.0 && t < self.big_r0) {
                    return Err(Error::config(
                        key,
                        format!("scale {t} must satisfy 0 < t < R₀ = {}", self.big_r0),
                    ));
                }
                self.gluing(t)
                    .validate()
                    .map_err(|e| Error::config(key, e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn gluing(&self, t: f64) -> GluingData {
        GluingData {
            scales: vec![t],
            nu: self.nu,
            nu_p: self.nu_p,
            nu_pp: self.nu_pp,
            big_r0: self.big_r0,
            r0: self.r0,
        }
    }

    pub fn resolution(&self) -> Resolution {
        Resolution {
            link: self.link_res,
            radial: self.radial_res,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        // serde names the offending field in backticks
        let key = msg.split('`').nth(1).unwrap_or("<file>").to_string();
        Error::config(&key, msg)
    })?;
    resolve(raw)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::config("<file>", format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
