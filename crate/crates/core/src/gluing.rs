//! Gluing a rescaled asymptotically conical piece into a conically singular
//! one across a neck, with part labels, the glued radius function and the
//! partition of unity used to split estimates between the two sides.
//!
//! One conical end per run. The CS side of the quadric scenario is the exact
//! cone, so the upper part is Cayley; the AC side is the smoothing rescaled by
//! the local scale `t`.

use crate::error::{Error, Result};
use crate::fmt::sci;
use crate::grid::Axis;
use crate::scenarios::{
    conical_patch, smoothstep, ImmersionMap, LinkKind, ParametricPatch, PatchKind, RadialProfile, Resolution,
};
use crate::spin7::cayley_margin;
use crate::weighted::{weighted_sobolev_norm_with, Field, PatchGeometry, RadiusFunction, WeightedNormSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Cutoff with `φ = 0` on `(−∞, ¼]`, `φ = 1` on `[¾, ∞)`.
pub fn cutoff_phi(s: f64) -> f64 {
    smoothstep(s, 0.25, 0.75).0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluingData {
    /// Local scales, one per conical end; `0` leaves the singularity in place.
    pub scales: Vec<f64>,
    pub nu: f64,
    pub nu_p: f64,
    pub nu_pp: f64,
    /// Outer radius `R₀` of the neck region.
    pub big_r0: f64,
    /// Inner cutoff `r₀`: the neck starts at `r₀·t`.
    pub r0: f64,
}

impl GluingData {
    /// Defaults `ν′ = 0.85ν`, `ν″ = 0.7ν`.
    pub fn new(t: f64, nu: f64, big_r0: f64, r0: f64) -> Self {
        GluingData {
            scales: vec![t],
            nu,
            nu_p: 0.85 * nu,
            nu_pp: 0.7 * nu,
            big_r0,
            r0,
        }
    }

    /// `ν = (λ − 1)/(λ − μ)`, which balances the AC and CS error terms.
    pub fn balanced_nu(lambda: f64, mu: f64) -> Result<f64> {
        let nu = (lambda - 1.0) / (lambda - mu);
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::ScaleViolation(format!("balanced ν = {nu} outside (0, 1)")));
        }
        Ok(nu)
    }

    /// Radii `(t^ν′, t^ν″)` between which the partition `α` falls from 1 to 0.
    pub fn alpha_transition(&self) -> (f64, f64) {
        let t = self.global_scale();
        (t.powf(self.nu_p), t.powf(self.nu_pp))
    }

    pub fn global_scale(&self) -> f64 {
        self.scales.iter().copied().fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let (nu, nup, nupp) = (self.nu, self.nu_p, self.nu_pp);
        if !(0.0 < nupp && nupp < nup && nup < nu && nu < 1.0) {
            return Err(Error::ScaleViolation(format!(
                "need 0 < ν″ < ν′ < ν < 1, got ({nupp}, {nup}, {nu})"
            )));
        }
        if !(self.big_r0 < 1.0 && self.r0 > 0.0) {
            return Err(Error::ScaleViolation(format!(
                "need r₀ > 0 and R₀ < 1, got ({}, {})",
                self.r0, self.big_r0
            )));
        }
        for &t in &self.scales {
            if t < 0.0 {
                return Err(Error::ScaleViolation(format!("negative scale {t}")));
            }
            if t > 0.0 {
                let tn = t.powf(nu);
                if !(self.r0 * t < 0.5 * tn && tn < self.big_r0) {
                    return Err(Error::ScaleViolation(format!(
                        "need 0 < r₀t < ½t^ν < t^ν < R₀ < 1, got r₀t = {}, t^ν = {tn}, R₀ = {}",
                        self.r0 * t,
                        self.big_r0
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum Part {
    /// The CS piece outside the neck: `s ≥ t^ν`.
    Upper = 0,
    /// The neck `r₀t < s < t^ν`, where the interpolation happens.
    Middle = 1,
    /// The rescaled AC tip `s ≤ r₀t`.
    Lower = 2,
    /// A CS end left unglued (`t = 0`), inside `s < t_global^ν`.
    Leftover = 3,
}

/// Which source map a node is evaluated from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Ac,
    Cs,
    Blend { phi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Source,
    pub link: [f64; 3],
    pub s: f64,
}

#[derive(Clone, Debug)]
pub struct GluedImmersion {
    pub patch: ParametricPatch,
    pub data: GluingData,
    pub parts: Vec<Part>,
    pub rho: RadiusFunction,
}

/// Log-uniform radial nodes between forced radii: the neck ends, the cutoff
/// plateau boundaries `⅝t^ν`, `⅞t^ν`, the partition-of-unity plateaus and `R₀`.
pub fn glued_radial_axis(t: f64, data: &GluingData, s_lo: f64, s_hi: f64, n: usize) -> Result<Axis> {
    let tn = t.powf(data.nu);
    let mut forced = vec![
        s_lo,
        data.r0 * t,
        0.25 * tn,
        0.5 * tn,
        0.625 * tn,
        0.75 * tn,
        0.875 * tn,
        tn,
        t.powf(data.nu_p),
        t.powf(data.nu_pp),
        data.big_r0,
        s_hi,
    ];
    forced.sort_by(f64::total_cmp);
    forced.dedup();
    if forced.windows(2).any(|w| !(w[1] > w[0] * (1.0 + 1e-12)))
        || forced[0] != s_lo
        || forced[forced.len() - 1] != s_hi
    {
        return Err(Error::ScaleViolation(format!(
            "forced radial nodes out of order: {forced:?}"
        )));
    }
    let logs: Vec<f64> = forced.iter().map(|s| s.ln()).collect();
    let lens: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    // the blend window carries the only non-conical profile variation in the neck
    let minimum: Vec<usize> = forced
        .windows(2)
        .map(|w| {
            if w[0] >= 0.625 * tn * (1.0 - 1e-12) && w[1] <= 0.875 * tn * (1.0 + 1e-12) {
                4
            } else {
                1
            }
        })
        .collect();
    let intervals = n.saturating_sub(1).max(minimum.iter().sum());
    let counts = apportion(&lens, &minimum, intervals);
    let mut nodes = vec![logs[0]];
    for (w, &k) in logs.windows(2).zip(&counts) {
        for j in 1..=k {
            nodes.push(if j == k {
                w[1]
            } else {
                w[0] + (w[1] - w[0]) * j as f64 / k as f64
            });
        }
    }
    Ok(Axis::closed(nodes))
}

/// Splits `total` intervals over segments of the given lengths: each gets its
/// minimum, the rest goes by length with largest remainders first.
fn apportion(lens: &[f64], minimum: &[usize], total: usize) -> Vec<usize> {
    let spare = total - minimum.iter().sum::<usize>();
    let len_sum: f64 = lens.iter().sum();
    let ideal: Vec<f64> = lens.iter().map(|l| spare as f64 * l / len_sum).collect();
    let mut counts: Vec<usize> = minimum
        .iter()
        .zip(&ideal)
        .map(|(m, x)| m + x.floor() as usize)
        .collect();
    let mut order: Vec<usize> = (0..lens.len()).collect();
    order.sort_by(|&a, &b| {
        (ideal[b] - ideal[b].floor())
            .total_cmp(&(ideal[a] - ideal[a].floor()))
            .then(a.cmp(&b))
    });
    let left = total - counts.iter().sum::<usize>();
    for &i in order.iter().take(left) {
        counts[i] += 1;
    }
    counts
}

fn profile_epsilon(p: &ParametricPatch) -> Result<f64> {
    match p.profile() {
        Some(RadialProfile::Smoothing { epsilon }) => Ok(epsilon),
        Some(RadialProfile::Cone) => Ok(0.0),
        _ => Err(Error::ConeMismatch("AC piece must be a smoothing or a cone".into())),
    }
}

/// The asymptotic cone of a conical patch at radius `s`, on every link node.
fn cone_samples(p: &ParametricPatch, link: LinkKind, s: f64) -> Vec<[f64; 8]> {
    let cone = ParametricPatch {
        map: ImmersionMap::Conical {
            link,
            profile: RadialProfile::Cone,
        },
        ..p.clone()
    };
    let [n0, n1, n2, _] = p.grid.dims();
    (0..n0 * n1 * n2)
        .map(|n| {
            let c = p.grid.coords(n);
            cone.jet_at([c[0], c[1], c[2], s.ln()]).x
        })
        .collect()
}

fn check_same_cone(cs: &ParametricPatch, ac: &ParametricPatch, s: f64) -> Result<LinkKind> {
    let (Some(l1), Some(l2)) = (cs.link(), ac.link()) else {
        return Err(Error::ConeMismatch("both pieces must be conical".into()));
    };
    if l1 != l2 {
        return Err(Error::ConeMismatch(format!("links differ: {l1:?} vs {l2:?}")));
    }
    for a in 0..3 {
        if cs.grid.axes[a] != ac.grid.axes[a] {
            return Err(Error::ConeMismatch(format!("link axis {a} differs")));
        }
    }
    let dev = cone_samples(cs, l1, s)
        .iter()
        .zip(cone_samples(ac, l2, s))
        .flat_map(|(x, y)| (0..8).map(move |k| (x[k] - y[k]).abs()))
        .fold(0.0, f64::max);
    if dev > 1e-10 {
        return Err(Error::ConeMismatch(format!("asymptotic cones differ by {dev:.3e}")));
    }
    Ok(l1)
}

/// Build `N^t`. A zero scale returns the CS piece unchanged (relabelled).
pub fn build_glued_immersion(
    cs: &ParametricPatch,
    acs: &[ParametricPatch],
    data: &GluingData,
) -> Result<GluedImmersion> {
    data.validate()?;
    if acs.len() != data.scales.len() || acs.len() != 1 {
        return Err(Error::BadRange(format!(
            "one conical end per run, got {} pieces and {} scales",
            acs.len(),
            data.scales.len()
        )));
    }
    if cs.profile() != Some(RadialProfile::Cone) {
        return Err(Error::ConeMismatch("CS piece must be the exact cone".into()));
    }
    let t = data.scales[0];
    let s_hi = cs.grid.axes[3].nodes.last().copied().unwrap_or(0.0).exp();
    if !(s_hi > data.big_r0) {
        return Err(Error::ScaleViolation(format!("CS piece ends at {s_hi} ≤ R₀")));
    }
    if t == 0.0 {
        let patch = ParametricPatch {
            kind: PatchKind::Glued,
            ..cs.clone()
        };
        let tn = data.global_scale().powf(data.nu);
        let parts = (0..patch.len())
            .map(|n| {
                if patch.radial(n).expect("conical") < tn {
                    Part::Leftover
                } else {
                    Part::Upper
                }
            })
            .collect();
        let rho = RadiusFunction::distance_to_vertex(&patch);
        return Ok(GluedImmersion {
            patch,
            data: data.clone(),
            parts,
            rho,
        });
    }
    let tn = t.powf(data.nu);
    let link = check_same_cone(cs, &acs[0], tn)?;
    let eps_ac = profile_epsilon(&acs[0])?;
    let s_lo = if eps_ac > 0.0 { eps_ac * t } else { 0.5 * data.r0 * t };
    if !(s_lo < data.r0 * t) {
        return Err(Error::ScaleViolation(format!(
            "AC core εt = {s_lo} reaches the neck start r₀t = {}",
            data.r0 * t
        )));
    }
    let radial = glued_radial_axis(t, data, s_lo, s_hi, cs.grid.dims()[3])?;
    let [n0, n1, n2, _] = cs.grid.dims();
    let patch = conical_patch(
        PatchKind::Glued,
        link,
        RadialProfile::Glued {
            epsilon_t: eps_ac * t,
            t_nu: tn,
        },
        [n0, n1, n2],
        radial,
    )?;
    // the link axes are rebuilt from the resolution, so they must agree with the CS piece
    debug_assert!((0..3).all(|a| patch.grid.axes[a] == cs.grid.axes[a]));
    let parts = (0..patch.len())
        .map(|n| {
            let s = patch.radial(n).expect("conical");
            if s <= data.r0 * t {
                Part::Lower
            } else if s < tn {
                Part::Middle
            } else {
                Part::Upper
            }
        })
        .collect();
    let floor = 0.5 * data.r0 * t;
    let rho = RadiusFunction::from_values(
        RadiusFunction::distance_to_vertex(&patch)
            .values
            .into_iter()
            .map(|r| r.max(floor))
            .collect(),
    )?;
    Ok(GluedImmersion {
        patch,
        data: data.clone(),
        parts,
        rho,
    })
}

/// CS cone and AC smoothing for the quadric scenario, glued at scale `t`.
pub fn quadric_scenario(epsilon: f64, data: &GluingData, res: Resolution) -> Result<GluedImmersion> {
    let t = data.global_scale();
    let lo = if t > 0.0 { data.r0 * t } else { data.r0 * 1e-3 };
    let cs = crate::scenarios::make_quadric_cone(lo.min(0.5 * data.big_r0), 1.0, res)?;
    let ac = crate::scenarios::make_quadric_smoothing(epsilon, 1.0, res)?;
    build_glued_immersion(&cs, &[ac], data)
}

/// The quadric cone glued to itself: every piece is Cayley.
pub fn cone_scenario(data: &GluingData, res: Resolution) -> Result<GluedImmersion> {
    let t = data.global_scale();
    let lo = if t > 0.0 { data.r0 * t } else { data.r0 * 1e-3 };
    let cs = crate::scenarios::make_quadric_cone(lo.min(0.5 * data.big_r0), 1.0, res)?;
    let ac = cs.clone();
    build_glued_immersion(&cs, &[ac], data)
}

impl GluedImmersion {
    pub fn len(&self) -> usize {
        self.patch.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patch.is_empty()
    }

    pub fn scale(&self) -> f64 {
        self.data.scales[0]
    }

    pub fn part_counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for p in &self.parts {
            c[*p as usize] += 1;
        }
        c
    }

    pub fn provenance(&self, node: usize) -> Provenance {
        let c = self.patch.grid.coords(node);
        let s = c[3].exp();
        let source = match self.patch.profile() {
            Some(RadialProfile::Glued { t_nu, .. }) => {
                let phi = cutoff_phi(2.0 * s / t_nu - 1.0);
                if phi == 0.0 {
                    Source::Ac
                } else if phi == 1.0 {
                    Source::Cs
                } else {
                    Source::Blend { phi }
                }
            }
            _ => Source::Cs,
        };
        Provenance {
            source,
            link: [c[0], c[1], c[2]],
            s,
        }
    }

    /// Largest ratio `max(ρ/c, c/ρ)` against the comparison value `c`: `r₀t` on
    /// the tip, `s` on the neck and upper part, `R₀` beyond `R₀`.
    pub fn radius_sandwich(&self) -> f64 {
        let t = self.scale();
        (0..self.len())
            .map(|n| {
                let s = self.patch.radial(n).expect("conical");
                let c = match self.parts[n] {
                    Part::Lower => self.data.r0 * t,
                    _ if s > self.data.big_r0 => self.data.big_r0,
                    _ => s,
                };
                let r = self.rho.values[n];
                (r / c).max(c / r)
            })
            .fold(1.0, f64::max)
    }

    /// Write `<stem>.json` (header), `<stem>.bin` (8 f64 LE per node) and
    /// `<stem>.parts` (one byte per node).
    pub fn export(&self, dir: &Path, stem: &str) -> Result<()> {
        let counts = self.part_counts();
        let header = serde_json::json!({
            "data": self.data,
            "dims": self.patch.grid.dims(),
            "map": self.patch.map,
            "orientation": self.patch.orientation,
            "nodes": self.len(),
            "part_counts": { "upper": counts[0], "middle": counts[1], "lower": counts[2], "leftover": counts[3] },
            "layout": "f64le[nodes][8] in .bin; u8[nodes] part labels in .parts (0 upper, 1 middle, 2 lower, 3 leftover)",
        });
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join(format!("{stem}.json")),
            serde_json::to_string_pretty(&header).expect("json") + "\n",
        )?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{stem}.bin")))?);
        for n in 0..self.len() {
            for v in self.patch.point(n) {
                f.write_all(&v.to_le_bytes())?;
            }
        }
        f.flush()?;
        let bytes: Vec<u8> = self.parts.iter().map(|p| *p as u8).collect();
        std::fs::write(dir.join(format!("{stem}.parts")), bytes)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarginScan {
    pub min_margin: f64,
    pub argmin: usize,
}

/// Minimum Cayley margin of the tangent planes over all nodes.
pub fn alpha_cayley_scan(glued: &GluedImmersion) -> Result<MarginScan> {
    let margins = (0..glued.len())
        .into_par_iter()
        .map(|n| glued.patch.frames(n).map(|f| cayley_margin(&f.tangent)))
        .collect::<Result<Vec<f64>>>()?;
    let (argmin, min_margin) = margins
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, m)| if m < acc.1 { (i, m) } else { acc });
    Ok(MarginScan { min_margin, argmin })
}

/// `α = φ̃(log ρ / log t)` on the glued end, with `φ̃` rising from 0 at `ν″`
/// to 1 at `ν′`; 1 on the tip; 0 on an unglued end.
pub fn partition_alpha(glued: &GluedImmersion) -> Vec<f64> {
    let t = glued.scale();
    let d = &glued.data;
    (0..glued.len())
        .map(|n| {
            if t == 0.0 {
                return 0.0;
            }
            match glued.parts[n] {
                Part::Lower => 1.0,
                Part::Leftover => 0.0,
                _ => smoothstep(glued.rho.values[n].ln() / t.ln(), d.nu_pp, d.nu_p).0,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayScan {
    pub sup_rho_grad_alpha: f64,
    pub normalized: f64,
    pub argmax: usize,
    pub rho_at_argmax: f64,
}

/// `sup ρ|∇α|` with `∇` from grid differences, and `sup·|log t|`.
pub fn alpha_decay_scan(glued: &GluedImmersion) -> Result<DecayScan> {
    let t = glued.scale();
    if !(t < 0.5) {
        return Err(Error::BadRange(format!("decay scan needs t < 0.5, got {t}")));
    }
    let geom = PatchGeometry::new(&glued.patch);
    alpha_decay_scan_with(glued, &geom)
}

pub fn alpha_decay_scan_with(glued: &GluedImmersion, geom: &PatchGeometry) -> Result<DecayScan> {
    let t = glued.scale();
    let alpha = Field::scalar(partition_alpha(glued));
    let d = geom.derivative_norms(&alpha, 1)?;
    let (argmax, sup) = (0..glued.len())
        .map(|n| glued.rho.values[n] * d[n][1])
        .enumerate()
        .fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let normalized = if t > 0.0 { sup * t.ln().abs() } else { 0.0 };
    Ok(DecayScan {
        sup_rho_grad_alpha: sup,
        normalized,
        argmax,
        rho_at_argmax: glued.rho.values[argmax],
    })
}

/// `‖αu‖ / ‖u‖` in `L^p_{k,δ}`.
pub fn product_ratio(glued: &GluedImmersion, geom: &PatchGeometry, u: &Field, spec: &WeightedNormSpec) -> Result<f64> {
    let alpha = partition_alpha(glued);
    let au = multiply(u, &alpha);
    Ok(weighted_sobolev_norm_with(geom, &au, spec, &glued.rho)?
        / weighted_sobolev_norm_with(geom, u, spec, &glued.rho)?)
}

/// `‖∇α ⋄ u‖_{k,δ−1} · |log t| / ‖u‖_{k,δ}` with the pairing `|∇α|·u`.
pub fn gradient_product_ratio(
    glued: &GluedImmersion,
    geom: &PatchGeometry,
    u: &Field,
    spec: &WeightedNormSpec,
) -> Result<f64> {
    let alpha = Field::scalar(partition_alpha(glued));
    let grad: Vec<f64> = geom.derivative_norms(&alpha, 1)?.into_iter().map(|d| d[1]).collect();
    let gu = multiply(u, &grad);
    let lower = WeightedNormSpec {
        delta: spec.delta - 1.0,
        ..*spec
    };
    Ok(
        weighted_sobolev_norm_with(geom, &gu, &lower, &glued.rho)? * glued.scale().ln().abs()
            / weighted_sobolev_norm_with(geom, u, spec, &glued.rho)?,
    )
}

fn multiply(u: &Field, f: &[f64]) -> Field {
    let data = u.data.iter().enumerate().map(|(i, x)| x * f[i / u.comps]).collect();
    Field { comps: u.comps, data }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeamRecord {
    /// `lo` at `⅝t^ν` (start of blending), `hi` at `⅞t^ν`.
    pub seam: &'static str,
    pub link_node: usize,
    pub s: f64,
    pub coord_jump: f64,
    pub diff_jump: f64,
}

/// One-sided limits of coordinates and radial derivatives across each seam,
/// sampled at `s(1 ± 1e−10)` on every link node.
pub fn seam_diagnostics(glued: &GluedImmersion) -> Vec<SeamRecord> {
    let Some(RadialProfile::Glued { t_nu, .. }) = glued.patch.profile() else {
        return Vec::new();
    };
    let [n0, n1, n2, _] = glued.patch.grid.dims();
    let mut out = Vec::new();
    for (name, s) in [("lo", 0.625 * t_nu), ("hi", 0.875 * t_nu)] {
        for l in 0..n0 * n1 * n2 {
            let c = glued.patch.grid.coords(l);
            let at = |f: f64| glued.patch.jet_at([c[0], c[1], c[2], (s * f).ln()]);
            let (a, b) = (at(1.0 - 1e-10), at(1.0 + 1e-10));
            let jump = |x: &[f64; 8], y: &[f64; 8]| (0..8).map(|k| (x[k] - y[k]).abs()).fold(0.0, f64::max);
            let coord_jump = jump(&a.x, &b.x);
            let diff_jump = (0..4).map(|i| jump(&a.d1[i], &b.d1[i])).fold(0.0, f64::max);
            out.push(SeamRecord {
                seam: name,
                link_node: l,
                s,
                coord_jump,
                diff_jump,
            });
        }
    }
    out
}

pub fn seams_csv(records: &[SeamRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["seam", "link_node", "s", "coord_jump", "diff_jump"])
        .expect("in-memory write");
    for r in records {
        w.write_record([
            r.seam.to_string(),
            r.link_node.to_string(),
            sci(r.s),
            sci(r.coord_jump),
            sci(r.diff_jump),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res() -> Resolution {
        Resolution {
            link: [6, 6, 6],
            radial: 40,
        }
    }

    fn data(t: f64) -> GluingData {
        GluingData::new(t, 0.8, 0.5, 0.2)
    }

    #[test]
    fn cutoff_values() {
        assert_eq!(cutoff_phi(0.1), 0.0);
        assert_eq!(cutoff_phi(0.9), 1.0);
        assert!((cutoff_phi(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scale_inequalities() {
        assert!(data(0.02).validate().is_ok());
        assert!(matches!(data(0.9).validate(), Err(Error::ScaleViolation(_))));
        let mut d = data(0.02);
        d.nu_pp = d.nu_p;
        assert!(d.validate().is_err());
        assert!((GluingData::balanced_nu(-1.0, 1.5).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_scale_reproduces_cs_piece() {
        let cs = crate::scenarios::make_quadric_cone(0.01, 1.0, res()).unwrap();
        let g = build_glued_immersion(&cs, std::slice::from_ref(&cs), &data(0.0)).unwrap();
        for n in (0..g.len()).step_by(37) {
            assert_eq!(g.patch.point(n), cs.point(n));
        }
        assert!(partition_alpha(&g).iter().all(|a| *a == 0.0));
    }

    #[test]
    fn interpolation_endpoints_match_pure_pieces() {
        let t = 0.02;
        let g = quadric_scenario(0.1, &data(t), res()).unwrap();
        let tn = t.powf(0.8);
        let ac = ParametricPatch {
            map: ImmersionMap::Conical {
                link: LinkKind::Quadric,
                profile: RadialProfile::Smoothing { epsilon: 0.1 * t },
            },
            ..g.patch.clone()
        };
        let cone = ParametricPatch {
            map: ImmersionMap::Conical {
                link: LinkKind::Quadric,
                profile: RadialProfile::Cone,
            },
            ..g.patch.clone()
        };
        let c = [0.3, 1.1, 0.7];
        for (f, other) in [(0.5, &ac), (0.95, &cone)] {
            let u = (f * tn).ln();
            let x = g.patch.jet_at([c[0], c[1], c[2], u]).x;
            let y = other.jet_at([c[0], c[1], c[2], u]).x;
            for k in 0..8 {
                assert!((x[k] - y[k]).abs() < 1e-15, "{f}");
            }
        }
    }

    #[test]
    fn parts_and_radius() {
        let g = quadric_scenario(0.1, &data(0.02), res()).unwrap();
        let c = g.part_counts();
        assert!(c[0] > 0 && c[1] > 0 && c[2] > 0 && c[3] == 0);
        assert!(g.radius_sandwich() <= 2.0);
        let a = partition_alpha(&g);
        for n in 0..g.len() {
            match g.parts[n] {
                Part::Lower => assert_eq!(a[n], 1.0),
                _ if g.rho.values[n] >= 0.02f64.powf(g.data.nu_pp) => assert_eq!(a[n], 0.0),
                _ if g.rho.values[n] <= 0.02f64.powf(g.data.nu_p) => assert_eq!(a[n], 1.0),
                _ => {}
            }
        }
    }

    #[test]
    fn seams_are_continuous() {
        let g = quadric_scenario(0.1, &data(0.02), res()).unwrap();
        let recs = seam_diagnostics(&g);
        assert!(!recs.is_empty());
        for r in &recs {
            assert!(r.coord_jump <= 1e-8 && r.diff_jump <= 1e-8, "{r:?}");
        }
        assert!(seams_csv(&recs).starts_with("seam,link_node,s,coord_jump,diff_jump\n"));
    }

    #[test]
    fn cone_glued_to_cone_is_cayley() {
        let g = cone_scenario(&data(0.02), res()).unwrap();
        assert!((alpha_cayley_scan(&g).unwrap().min_margin - 1.0).abs() < 1e-9);
    }
}
