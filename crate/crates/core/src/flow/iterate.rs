//! Initial-error scaling scans and the fixed-point iteration
//! `D v_{i+1} = −F(0) − Q(v_i)`, solved as chord steps `D Δ = −F(v_i)`.

use super::{lsqr, Csr, Deformation, EField, LsqrOptions, NormalField, TangentMode};
use crate::error::{Error, Result};
use crate::fmt::sci;
use crate::gluing::{quadric_scenario, GluedImmersion, GluingData, Part};
use crate::scenarios::Resolution;
use crate::weighted::{weighted_sobolev_norm_with, PatchGeometry, WeightedNormSpec};
use serde::Serialize;

#[derive(Clone, Copy, Debug)]
pub struct IterateParams {
    pub max_iter: usize,
    /// Stop when `‖v_{i+1} − v_i‖_{L^p_{k+1,δ}} < tol`.
    pub tol: f64,
    pub delta: f64,
    pub p: f64,
    pub k: usize,
    /// NoContraction after two consecutive ratios above this.
    pub contraction_limit: f64,
    pub lsqr: LsqrOptions,
}

impl Default for IterateParams {
    fn default() -> Self {
        IterateParams {
            max_iter: 20,
            tol: 1e-10,
            delta: 1.25,
            p: 2.0,
            k: 0,
            contraction_limit: 0.9,
            lsqr: LsqrOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub step_norm: f64,
    /// `‖v_{i+1} − v_i‖ / ‖v_i − v_{i−1}‖`; NaN at the first step.
    pub ratio: f64,
    pub f_norm: f64,
    pub min_margin: f64,
    pub lsqr_iterations: usize,
}

#[derive(Clone, Debug)]
pub struct IterationReport {
    pub v_final: NormalField,
    pub history: Vec<IterRecord>,
    pub converged: bool,
    pub f0_norm: f64,
    pub final_f_norm: f64,
    pub initial_margin: f64,
    pub final_margin: f64,
    pub v_norm: f64,
    pub first_step_norm: f64,
}

impl IterationReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.ratio).collect()
    }

    /// Header `iter,step_norm,ratio,F_norm,min_margin`.
    pub fn history_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["iter", "step_norm", "ratio", "F_norm", "min_margin"])
            .expect("in-memory write");
        for r in &self.history {
            w.write_record([
                r.iter.to_string(),
                sci(r.step_norm),
                sci(r.ratio),
                sci(r.f_norm),
                sci(r.min_margin),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

/// Weights of the discrete norms: unknowns by `√q·ρ^{−δ}`, residuals by
/// `√q·ρ^{1−δ}`, with `q = dμ·ρ^{−4}`.
pub struct SolveWeights {
    pub unknown: Vec<f64>,
    pub residual: Vec<f64>,
}

impl SolveWeights {
    pub fn new(deform: &Deformation, geom: &PatchGeometry, delta: f64) -> Self {
        let mut unknown = Vec::with_capacity(4 * deform.len());
        let mut residual = Vec::with_capacity(4 * deform.len());
        for n in 0..deform.len() {
            let r = deform.rho.values[n];
            let q = (geom.dmu[n] * r.powi(-4)).sqrt();
            for _ in 0..4 {
                unknown.push(q * r.powf(-delta));
                residual.push(q * r.powf(1.0 - delta));
            }
        }
        SolveWeights { unknown, residual }
    }

    /// Discrete `L²_{0,δ−1}` norm of an E-field.
    pub fn residual_norm(&self, f: &EField) -> f64 {
        f.flat()
            .iter()
            .zip(&self.residual)
            .map(|(x, w)| (x * w).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// As [`residual_norm`](Self::residual_norm) over the listed flat indices.
    pub fn residual_norm_on(&self, f: &EField, rows: &[usize]) -> f64 {
        let flat = f.flat();
        rows.iter()
            .map(|&r| (flat[r] * self.residual[r]).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Drive `F` to zero from `v = 0` with the outer radial ring clamped.
///
/// Each chord step solves `D Δ = −F(v)` for the increment of least weighted
/// norm over the equations off the closure levels, so `F` norms
/// in the report are taken over those equations.
pub fn iterate_to_cayley(glued: &GluedImmersion, params: &IterateParams) -> Result<IterationReport> {
    let deform = Deformation::new(&glued.patch, TangentMode::Analytic, glued.rho.clone())?;
    let geom = PatchGeometry::new(&glued.patch);
    let d = deform.assemble_d();
    iterate_with(&deform, &geom, &d, params)
}

/// As [`iterate_to_cayley`] with a prebuilt deformation, geometry and `D`.
pub fn iterate_with(
    deform: &Deformation,
    geom: &PatchGeometry,
    d: &Csr,
    params: &IterateParams,
) -> Result<IterationReport> {
    let n = deform.len();
    let ring = deform.outer_ring();
    let closure = deform.closure_levels();
    let rows: Vec<usize> = (0..4 * n).filter(|&r| !closure[r / 4]).collect();
    let cols: Vec<usize> = (0..4 * n).filter(|&c| !ring[c / 4]).collect();
    let w = SolveWeights::new(deform, geom, params.delta);
    let inv_u: Vec<f64> = cols.iter().map(|&c| 1.0 / w.unknown[c]).collect();
    // the equations are consistent, so unit row norms leave the minimum-norm
    // solution alone and roughly halve the LSQR iteration count
    let a = d.submatrix(&rows, &cols).scaled(&vec![1.0; rows.len()], &inv_u);
    let eq: Vec<f64> = (0..a.nrows)
        .map(|r| 1.0 / a.row(r).map(|(_, v)| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
        .collect();
    let a = a.scaled(&eq, &vec![1.0; a.ncols]);
    let at = a.transpose();
    let step_spec = WeightedNormSpec::new(params.p, params.k + 1, params.delta)?;

    let f0 = deform.f0().clone();
    let f0_norm = w.residual_norm_on(&f0, &rows);
    let initial_margin = deform.margins.iter().copied().fold(f64::INFINITY, f64::min);
    let mut v = NormalField::zeros(n);
    let mut fv = f0.clone();
    let mut history: Vec<IterRecord> = Vec::new();
    let mut converged = false;
    let mut high = 0;
    for iter in 1..=params.max_iter {
        let flat = fv.flat();
        let b: Vec<f64> = rows.iter().zip(&eq).map(|(&r, e)| -flat[r] * e).collect();
        let sol = lsqr(&a, &at, &b, params.lsqr)?;
        if sol.x.iter().any(|x| !x.is_finite()) {
            return Err(Error::SolverFailure(format!(
                "non-finite increment at iteration {iter}"
            )));
        }
        let mut step = NormalField::zeros(n);
        for (j, &c) in cols.iter().enumerate() {
            step.values[c / 4][c % 4] = sol.x[j] * inv_u[j];
        }
        v = v.axpy(1.0, &step);
        fv = deform.nonlinear_f(&v)?;
        let step_norm = weighted_sobolev_norm_with(geom, &step.to_field(), &step_spec, &deform.rho)?;
        let ratio = history.last().map_or(f64::NAN, |r| step_norm / r.step_norm);
        history.push(IterRecord {
            iter,
            step_norm,
            ratio,
            f_norm: w.residual_norm_on(&fv, &rows),
            min_margin: deform.perturbed_min_margin(&v),
            lsqr_iterations: sol.iterations,
        });
        if step_norm < params.tol {
            converged = true;
            break;
        }
        high = if ratio > params.contraction_limit { high + 1 } else { 0 };
        if high >= 2 {
            return Err(Error::NoContraction(history.iter().map(|r| r.ratio).collect()));
        }
    }
    let v_norm = weighted_sobolev_norm_with(geom, &v.to_field(), &step_spec, &deform.rho)?;
    let last = history.last().expect("at least one iteration");
    Ok(IterationReport {
        final_f_norm: last.f_norm,
        final_margin: last.min_margin,
        first_step_norm: history[0].step_norm,
        v_final: v,
        history,
        converged,
        f0_norm,
        initial_margin,
        v_norm,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorScanRow {
    pub t: f64,
    pub f0_norm: f64,
    pub f0_sup: f64,
    /// Largest `|F(0)|` outside the middle part.
    pub off_middle_sup: f64,
    pub nodes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorScan {
    pub rows: Vec<ErrorScanRow>,
    pub slope: f64,
    pub predicted: f64,
}

impl ErrorScan {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "F0_norm", "F0_sup", "off_middle_sup", "nodes"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                sci(r.t),
                sci(r.f0_norm),
                sci(r.f0_sup),
                sci(r.off_middle_sup),
                r.nodes.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Scenario parameters for [`initial_error_scan`].
#[derive(Clone, Copy, Debug)]
pub struct ScanSetup {
    pub epsilon: f64,
    pub nu: f64,
    pub big_r0: f64,
    pub r0: f64,
    pub lambda: f64,
    pub mu: f64,
    pub delta: f64,
    pub p: f64,
    pub k: usize,
    pub res: Resolution,
    /// Replace the AC piece by the cone (nothing is glued).
    pub cone_only: bool,
}

/// `‖F(0)‖_{L^p_{k,δ−1}}` of the glued quadric over a geometric list of
/// scales, with the fitted log–log slope and the prediction `ν(μ − δ)`.
pub fn initial_error_scan(setup: &ScanSetup, t_list: &[f64]) -> Result<ErrorScan> {
    if t_list.len() < 3 {
        return Err(Error::BadRange(format!("need at least 3 scales, got {}", t_list.len())));
    }
    let ratios: Vec<f64> = t_list.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.iter().any(|r| (r / ratios[0] - 1.0).abs() > 1e-9 || !(*r > 0.0)) {
        return Err(Error::BadRange("scales must be geometrically spaced".into()));
    }
    let upper = (setup.mu * (setup.lambda - 2.0) + 1.0) / (setup.lambda - setup.mu);
    if !(setup.delta > 1.0 && setup.delta < upper) {
        return Err(Error::BadRange(format!("δ = {} outside (1, {upper})", setup.delta)));
    }
    let spec = WeightedNormSpec::new(setup.p, setup.k, setup.delta - 1.0)?;
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let data = GluingData::new(t, setup.nu, setup.big_r0, setup.r0);
        let glued = if setup.cone_only {
            crate::gluing::cone_scenario(&data, setup.res)?
        } else {
            quadric_scenario(setup.epsilon, &data, setup.res)?
        };
        let deform = Deformation::new(&glued.patch, TangentMode::Analytic, glued.rho.clone())?;
        let geom = PatchGeometry::new(&glued.patch);
        let f0 = deform.f0();
        let f0_norm = weighted_sobolev_norm_with(&geom, &f0.to_field(), &spec, &glued.rho)?;
        let off_middle_sup = (0..glued.len())
            .filter(|&n| glued.parts[n] != Part::Middle)
            .flat_map(|n| f0.values[n])
            .fold(0.0f64, |m, x| m.max(x.abs()));
        rows.push(ErrorScanRow {
            t,
            f0_norm,
            f0_sup: f0.sup(),
            off_middle_sup,
            nodes: glued.len(),
        });
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.f0_norm).collect();
    let slope = if ys.iter().all(|y| *y > 0.0) {
        loglog_slope(&ts, &ys)
    } else {
        f64::NAN
    };
    Ok(ErrorScan {
        rows,
        slope,
        predicted: setup.nu * (setup.mu - setup.delta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|t: &f64| 3.0 * t.powf(0.7)).collect();
        assert!((loglog_slope(&x, &y) - 0.7).abs() < 1e-12);
    }
}
