//! End-to-end evaluation of one domain and of the perturbed-disk sweep.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fem::solve_domain;
use crate::geometry::{boundary_trace, geometry_summary, GeometrySummary, Point, StarDomain};
use crate::identities::{cs_deficit, identity_suite, serrin_checks, DeficitReport, IdentityReport, SerrinChecks};
use crate::oracles::{gradient_bounds, GradientBounds};
use crate::spectral::{spectral_estimate, SpectralEstimate, DEFAULT_DEGREE};
use crate::stability::{
    aggregate_report, check_stability, deviation_norms, AggregateEntry, Branch, DeviationNorms, DomainAnalysis,
    StabilityParams, StabilityReport, Theorem,
};

/// Equispaced samples for geometric quantities (area, diameter, touching radii).
pub const DENSE_SAMPLES: usize = 2048;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum X0Policy {
    #[default]
    MinPoint,
    CenterOfMass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    pub n_radial: usize,
    pub n_angular: usize,
    pub basis_degree: usize,
    /// Second Neumann eigenvalue; the convex-domain bound is used when absent.
    pub mu2: Option<f64>,
    pub c0: f64,
    pub x0_policy: X0Policy,
    pub theorems: Vec<Theorem>,
    pub stability: StabilityParams,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            n_radial: 32,
            n_angular: 128,
            basis_degree: DEFAULT_DEGREE,
            mu2: None,
            c0: 1.0,
            x0_policy: X0Policy::MinPoint,
            theorems: Theorem::ALL.to_vec(),
            stability: StabilityParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainResult {
    pub domain_id: String,
    pub n_radial: usize,
    pub n_angular: usize,
    pub summary: GeometrySummary,
    pub min_points: Vec<Point>,
    pub max_gradient: f64,
    pub gradient_bounds: GradientBounds,
    pub cg_iterations: usize,
    pub identities: Vec<IdentityReport>,
    pub deficit: DeficitReport,
    pub serrin: SerrinChecks,
    pub deviations: DeviationNorms,
    pub spectral: SpectralEstimate,
    pub stability: Vec<StabilityReport>,
    pub aggregate: Vec<AggregateEntry>,
}

pub fn run_domain(domain_id: &str, domain: &StarDomain, opts: &RunOptions) -> Result<DomainResult> {
    let dense = boundary_trace(domain, DENSE_SAMPLES)?;
    let summary = geometry_summary(domain, &dense);
    let field = solve_domain(domain, opts.n_radial, opts.n_angular)?;
    let identities = identity_suite(&field, &field.trace, &summary)?;
    let deficit = cs_deficit(&field)?;
    let serrin = serrin_checks(&field, &field.trace, &summary);
    let deviations = deviation_norms(&field.trace, &field, &summary);
    let x0 = match opts.x0_policy {
        X0Policy::MinPoint => field.min_points.first().copied().unwrap_or(domain.center),
        X0Policy::CenterOfMass => summary.center_of_mass,
    };
    let spectral = spectral_estimate(domain, &field.mesh, &dense, &summary, x0, opts.basis_degree, opts.mu2)?;
    let analysis = DomainAnalysis {
        field: &field,
        summary: &summary,
        deviations: &deviations,
        spectral: &spectral,
    };
    let mut stability = Vec::new();
    for &th in &opts.theorems {
        for branch in [Branch::HighDim, Branch::LowDim] {
            stability.push(check_stability(th, branch, &analysis, &opts.stability)?);
        }
    }
    let aggregate = aggregate_report(&field, &dense)?;
    Ok(DomainResult {
        domain_id: domain_id.to_string(),
        n_radial: opts.n_radial,
        n_angular: opts.n_angular,
        summary,
        min_points: field.min_points.clone(),
        max_gradient: field.max_gradient,
        gradient_bounds: gradient_bounds(&summary, crate::geometry::PLANE_DIM, opts.c0)?,
        cg_iterations: field.iterations,
        identities,
        deficit,
        serrin,
        deviations,
        spectral,
        stability,
        aggregate,
    })
}

/// One row of the `ρ = 1 + t cos kθ` sweep, for the explicit-constant main theorem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub dev_l1: f64,
    pub dev_inf: f64,
    pub rho_i: f64,
    pub rho_e: f64,
    pub gap: f64,
    pub c: f64,
    pub eps: f64,
    pub tau: f64,
    pub holds: bool,
    pub smallness_ok: bool,
    pub hk_deficit: Option<f64>,
    pub aggregate_ok: bool,
    pub n_minima: usize,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(t: f64, error: String) -> Self {
        SweepRow {
            t,
            dev_l1: f64::NAN,
            dev_inf: f64::NAN,
            rho_i: f64::NAN,
            rho_e: f64::NAN,
            gap: f64::NAN,
            c: f64::NAN,
            eps: f64::NAN,
            tau: f64::NAN,
            holds: false,
            smallness_ok: false,
            hk_deficit: None,
            aggregate_ok: false,
            n_minima: 0,
            error: Some(error),
        }
    }
}

/// A sweep row with the full domain result behind it, when the run succeeded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub row: SweepRow,
    pub detail: Option<DomainResult>,
}

fn sweep_entry(t: f64, k: usize, opts: &RunOptions) -> Result<SweepEntry> {
    let domain = StarDomain::perturbed_disk(t, k)?;
    let mut opts = opts.clone();
    if !opts.theorems.contains(&Theorem::Main) {
        opts.theorems.insert(0, Theorem::Main);
    }
    let r = run_domain(&format!("t={t}"), &domain, &opts)?;
    let main = r
        .stability
        .iter()
        .find(|s| s.theorem == Theorem::Main && s.branch == Branch::HighDim)
        .expect("main theorem report");
    let row = SweepRow {
        t,
        dev_l1: r.deviations.h0_minus_h_l1,
        dev_inf: r.deviations.h0_minus_h_inf,
        rho_i: main.rho_i,
        rho_e: main.rho_e,
        gap: main.gap(),
        c: main.c,
        eps: main.eps.unwrap_or(f64::INFINITY),
        tau: main.tau,
        holds: main.holds,
        smallness_ok: main.smallness_ok,
        hk_deficit: r.deviations.hk_deficit,
        aggregate_ok: r.aggregate.iter().all(|a| a.inclusions_ok),
        n_minima: r.aggregate.len(),
        error: (!main.applicable).then(|| main.notice.clone().unwrap_or_default()),
    };
    Ok(SweepEntry { row, detail: Some(r) })
}

/// Entries in the order of `values`; a failing row records its error and the sweep continues.
pub fn sweep_detailed(k: usize, values: &[f64], opts: &RunOptions) -> Vec<SweepEntry> {
    values
        .par_iter()
        .map(|&t| {
            sweep_entry(t, k, opts).unwrap_or_else(|e| SweepEntry {
                row: SweepRow::failed(t, e.to_string()),
                detail: None,
            })
        })
        .collect()
}

/// Rows of the `ρ = 1 + t cos kθ` sweep for the main theorem.
pub fn sweep(k: usize, values: &[f64], opts: &RunOptions) -> Vec<SweepRow> {
    let mut opts = opts.clone();
    opts.theorems = vec![Theorem::Main];
    sweep_detailed(k, values, &opts).into_iter().map(|e| e.row).collect()
}

pub const SWEEP_HEADER: &str =
    "t,dev_L1,dev_inf,rho_i,rho_e,gap,C,eps,tau,holds,smallness_ok,hk_deficit,aggregate_ok,n_minima,error";

/// CSV with 17 significant digits and no locale dependence.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let hk = r.hk_deficit.map(fmt_f64).unwrap_or_default();
        let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.dev_l1),
            fmt_f64(r.dev_inf),
            fmt_f64(r.rho_i),
            fmt_f64(r.rho_e),
            fmt_f64(r.gap),
            fmt_f64(r.c),
            fmt_f64(r.eps),
            fmt_f64(r.tau),
            r.holds,
            r.smallness_ok,
            hk,
            r.aggregate_ok,
            r.n_minima,
            err
        );
    }
    out
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Least-squares slope of `log y` against `log x` over the pairs with both positive.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [0.1, 0.2, 0.4, 0.8];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 1.5).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn csv_format() {
        let row = SweepRow::failed(0.5, "bad, input".into());
        let csv = sweep_csv(&[row]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert!(lines[1].starts_with("5.0000000000000000e-1,NaN,"));
        assert!(lines[1].ends_with(",false,0,bad; input"));
        assert_eq!(lines[1].split(',').count(), SWEEP_HEADER.split(',').count());
    }
}
