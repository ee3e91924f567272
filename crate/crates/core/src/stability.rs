//! Deviation norms, the explicit stability constants and the resulting bounds on `ρ_e − ρ_i`.
//!
//! Every theorem variant reduces to the same chain. An identity gives `‖∇²h‖₂² ≤ K·dev`;
//! the harmonic Poincaré inequality gives `‖h − h(z)‖₂ ≤ μ⁻¹‖∇²h‖₂`; the parallel-set
//! estimate then yields `ρ_e − ρ_i ≤ a_N M^{N/(N+2)} |Ω|^{−1/N} ‖h − h(z)‖₂^{2/(N+2)}` as long
//! as `‖h − h(z)‖₂ < s_N M r_i^{(N+2)/2}`. Where `M` appears, `C` uses its upper bound
//! `c_N d(d + r_e)/r_e` and `ε` its lower bound `r_i`, so both stay sufficient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::TorsionField;
use crate::geometry::{rho_bounds, BoundaryTrace, GeometrySummary, Point, PLANE_DIM};
use crate::oracles::{c_n, unit_ball_volume};
use crate::spectral::SpectralEstimate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Deviation `‖H₀ − H‖₁`, center at a minimum point of `u`, constant `μ₀`.
    Main,
    /// As `Main` with the center of mass and `μ̄`.
    MainCmVariant,
    /// Deviation `∫dS/H − N|Ω|`.
    Hk,
    /// Deviation `‖H₀ − H‖_∞` with `H ≥ H̲ > 0`.
    MeanConvex,
    /// Deviation `‖u_ν − 1/H‖₁`.
    Obvp,
}

impl Theorem {
    pub const ALL: [Theorem; 5] = [
        Theorem::Main,
        Theorem::MainCmVariant,
        Theorem::Hk,
        Theorem::MeanConvex,
        Theorem::Obvp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Theorem::Main => "main",
            Theorem::MainCmVariant => "main_cm_variant",
            Theorem::Hk => "hk",
            Theorem::MeanConvex => "mean_convex",
            Theorem::Obvp => "obvp",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Exponent ½, needs the Sobolev immersion constant.
    LowDim,
    /// Exponent `1/(N+2)`, fully explicit.
    HighDim,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuSource {
    /// Explicit lower bound (conservative).
    LowerBound,
    /// Galerkin upper estimate (optimistic).
    UpperEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilityParams {
    /// Hölder exponent `γ ∈ (0, 1)` of the planar low-dimensional branch.
    pub gamma: f64,
    pub sobolev_c: Option<f64>,
    pub mu_source: MuSource,
    /// Use `∫(H₀ − H)⁺` in place of `‖H₀ − H‖₁`.
    pub positive_part: bool,
}

impl Default for StabilityParams {
    fn default() -> Self {
        StabilityParams {
            gamma: 0.5,
            sobolev_c: None,
            mu_source: MuSource::LowerBound,
            positive_part: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationNorms {
    pub h0_minus_h_l1: f64,
    pub h0_minus_h_plus_l1: f64,
    pub h0_minus_h_inf: f64,
    /// `∫dS/H − N|Ω|`, when `H > 0`.
    pub hk_deficit: Option<f64>,
    /// `‖u_ν − 1/H‖₁`, when `H > 0`.
    pub obvp_l1: Option<f64>,
    pub underline_h: f64,
}

pub fn deviation_norms(trace: &BoundaryTrace, field: &TorsionField, summary: &GeometrySummary) -> DeviationNorms {
    let h0 = summary.h0;
    let underline_h = trace.min_curvature();
    let mut l1 = 0.0;
    let mut plus = 0.0;
    let mut inf = 0.0f64;
    for s in &trace.samples {
        let d = h0 - s.curvature;
        l1 += s.weight * d.abs();
        plus += s.weight * d.max(0.0);
        inf = inf.max(d.abs());
    }
    let (hk_deficit, obvp_l1) = if underline_h > 0.0 {
        let u_nu = field.boundary_normal_derivative(trace);
        let inv_h = trace.integrate(|s| 1.0 / s.curvature);
        let obvp = trace
            .samples
            .iter()
            .zip(&u_nu)
            .map(|(s, un)| s.weight * (un - 1.0 / s.curvature).abs())
            .sum();
        (Some(inv_h - PLANE_DIM as f64 * summary.area), Some(obvp))
    } else {
        (None, None)
    };
    DeviationNorms {
        h0_minus_h_l1: l1,
        h0_minus_h_plus_l1: plus,
        h0_minus_h_inf: inf,
        hk_deficit,
        obvp_l1,
        underline_h,
    }
}

/// Geometric and spectral inputs of the constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantInputs {
    pub n: usize,
    pub area: f64,
    pub diameter: f64,
    pub r_i: f64,
    pub r_e: f64,
    /// `μ₀` for the minimum-point variants, `μ̄` for the center-of-mass variant.
    pub mu: f64,
    /// `H̲`, needed by the mean-convex theorem.
    pub underline_h: Option<f64>,
}

/// Every factor entering `C` and `ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTrace {
    pub n: usize,
    pub ball_volume: f64,
    pub area: f64,
    pub diameter: f64,
    pub r_i: f64,
    pub r_e: f64,
    pub mu: f64,
    /// Measured `max |∇u|`, reported only.
    pub m_measured: Option<f64>,
    /// `c_N d(d + r_e)/r_e`, used in `C`.
    pub m_upper: f64,
    /// `r_i`, used in `ε`.
    pub m_lower: f64,
    pub c_n: f64,
    pub a_n: f64,
    /// `√|B| / (N 2^{N+1})`.
    pub s_n: f64,
    pub k_n: f64,
    pub alpha_n: f64,
    /// `K` in `‖∇²h‖₂² ≤ K·dev`, with `M = m_upper`.
    pub k_factor: f64,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub underline_h: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c: f64,
    /// Smallness threshold; `None` for the low-dimensional branch.
    pub eps: Option<f64>,
    pub tau: f64,
    pub trace: ConstantsTrace,
}

/// `2^{2+N/(N+2)} (N+2) N^{−N/(N+2)} |B|^{1/N − 1/(N+2)}`.
pub fn a_n(n: usize) -> f64 {
    let nf = n as f64;
    let b = unit_ball_volume(n);
    2f64.powf(2.0 + nf / (nf + 2.0)) * (nf + 2.0) * nf.powf(-nf / (nf + 2.0)) * b.powf(1.0 / nf - 1.0 / (nf + 2.0))
}

/// `|B| / (N² 4^{N+1} (N−1))`.
pub fn alpha_n(n: usize) -> f64 {
    let nf = n as f64;
    unit_ball_volume(n) / (nf * nf * 4f64.powf(nf + 1.0) * (nf - 1.0))
}

/// `√|B| / (N 2^{N+1})`.
pub fn smallness_coeff(n: usize) -> f64 {
    let nf = n as f64;
    unit_ball_volume(n).sqrt() / (nf * 2f64.powf(nf + 1.0))
}

pub fn assemble_constants(
    theorem: Theorem,
    branch: Branch,
    inputs: &ConstantInputs,
    params: &StabilityParams,
) -> Result<Constants> {
    let ConstantInputs {
        n,
        area,
        diameter: d,
        r_i,
        r_e,
        mu,
        underline_h,
    } = *inputs;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("dimension {n} must be at least 2")));
    }
    if !(area > 0.0 && d > 0.0 && r_i > 0.0 && r_e > 0.0 && mu > 0.0) {
        return Err(Error::InvalidArgument(format!("constant inputs must be positive: {inputs:?}")));
    }
    let nf = n as f64;
    let cn = c_n(n);
    let m_upper = cn * d * (d + r_e) / r_e;
    let m_lower = r_i;
    // K(M) without and with the M-dependence split out: K = kappa · M^p
    let (kappa, p) = match theorem {
        Theorem::Main | Theorem::MainCmVariant => (nf - 1.0, 2.0),
        Theorem::Hk => (nf - 1.0, 0.0),
        Theorem::MeanConvex => {
            let hl = underline_h
                .filter(|&h| h > 0.0)
                .ok_or_else(|| Error::InvalidArgument("mean-convex constants need H̲ > 0".into()))?;
            ((nf - 1.0) * nf * area / hl, 0.0)
        }
        Theorem::Obvp => ((nf - 1.0) / r_i, 1.0),
    };
    let k_upper = kappa * m_upper.powf(p);
    let k_lower = kappa * m_lower.powf(p);
    let a = a_n(n);
    let s = smallness_coeff(n);
    let b = unit_ball_volume(n);
    let mut trace = ConstantsTrace {
        n,
        ball_volume: b,
        area,
        diameter: d,
        r_i,
        r_e,
        mu,
        m_measured: None,
        m_upper,
        m_lower,
        c_n: cn,
        a_n: a,
        s_n: s,
        k_n: 0.0,
        alpha_n: alpha_n(n),
        k_factor: k_upper,
        c: None,
        gamma: None,
        underline_h,
    };
    match branch {
        Branch::HighDim => {
            let tau = 1.0 / (nf + 2.0);
            let c = a * m_upper.powf(nf * tau) * k_upper.powf(tau) * mu.powf(-2.0 * tau) * area.powf(-1.0 / nf);
            let eps = s * s * mu * mu * m_lower * m_lower * r_i.powf(nf + 2.0) / k_lower;
            trace.k_n = match theorem {
                Theorem::Main | Theorem::MainCmVariant => a * (nf - 1.0).powf(tau) * cn,
                Theorem::MeanConvex => a * ((nf - 1.0) * nf).powf(tau),
                _ => a * (nf - 1.0).powf(tau),
            };
            Ok(Constants {
                c,
                eps: Some(eps),
                tau,
                trace,
            })
        }
        Branch::LowDim => {
            if n > 3 {
                return Err(Error::InvalidArgument("the exponent-½ branch needs N = 2 or 3".into()));
            }
            let sc = params
                .sobolev_c
                .ok_or_else(|| Error::InvalidArgument("the exponent-½ branch needs the Sobolev constant c".into()))?;
            let gamma = if n == 3 { 0.5 } else { params.gamma };
            if !(gamma > 0.0 && gamma < 1.0) {
                return Err(Error::InvalidArgument(format!("γ = {gamma} must lie in (0, 1)")));
            }
            // ½(ρ_e² − ρ_i²) ≤ c d^γ (1 + 1/μ)‖∇²h‖₂ and ρ_e + ρ_i ≥ (|Ω|/|B|)^{1/N}
            let lead = 2.0 * b.powf(1.0 / nf);
            let c = lead * sc * d.powf(gamma) * area.powf(-1.0 / nf) * (1.0 + mu) / mu * k_upper.sqrt();
            trace.k_n = lead * (nf - 1.0).sqrt();
            trace.c = Some(sc);
            trace.gamma = Some(gamma);
            Ok(Constants {
                c,
                eps: None,
                tau: 0.5,
                trace,
            })
        }
    }
}

/// Per-domain inputs shared by all theorem variants.
#[derive(Clone, Debug)]
pub struct DomainAnalysis<'a> {
    pub field: &'a TorsionField,
    pub summary: &'a GeometrySummary,
    pub deviations: &'a DeviationNorms,
    /// Spectral estimate at the minimum point `z`.
    pub spectral: &'a SpectralEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub theorem: Theorem,
    pub branch: Branch,
    pub applicable: bool,
    pub notice: Option<String>,
    pub z: Point,
    pub rho_i: f64,
    pub rho_e: f64,
    pub c: f64,
    pub eps: Option<f64>,
    pub deviation: f64,
    pub tau: f64,
    /// `C·dev^τ` when the smallness condition holds, the diameter otherwise.
    pub bound_rhs: f64,
    /// `C·dev^τ` regardless of smallness.
    pub formula_rhs: f64,
    /// `holds` means `ρ_e − ρ_i ≤ bound_rhs + tolerance`.
    pub holds: bool,
    pub tolerance: f64,
    pub smallness_ok: bool,
    pub mu_source: MuSource,
    pub constants_trace: Option<ConstantsTrace>,
}

impl StabilityReport {
    pub fn gap(&self) -> f64 {
        self.rho_e - self.rho_i
    }

    fn inapplicable(theorem: Theorem, branch: Branch, mu_source: MuSource, notice: String) -> Self {
        StabilityReport {
            theorem,
            branch,
            applicable: false,
            notice: Some(notice),
            z: [f64::NAN; 2],
            rho_i: f64::NAN,
            rho_e: f64::NAN,
            c: f64::NAN,
            eps: None,
            deviation: f64::NAN,
            tau: f64::NAN,
            bound_rhs: f64::NAN,
            formula_rhs: f64::NAN,
            holds: false,
            tolerance: f64::NAN,
            smallness_ok: false,
            mu_source,
            constants_trace: None,
        }
    }
}

pub fn check_stability(
    theorem: Theorem,
    branch: Branch,
    analysis: &DomainAnalysis,
    params: &StabilityParams,
) -> Result<StabilityReport> {
    let field = analysis.field;
    let summary = analysis.summary;
    let dev = analysis.deviations;
    let sp = analysis.spectral;
    let skip = |notice: &str| Ok(StabilityReport::inapplicable(theorem, branch, params.mu_source, notice.to_string()));

    let z = match theorem {
        Theorem::MainCmVariant => summary.center_of_mass,
        _ => match field.min_points.first() {
            Some(&z) => z,
            None => return skip("no interior minimum point of u"),
        },
    };
    let mu = match (theorem, params.mu_source) {
        // μ̄ exceeds the second Neumann eigenvalue
        (Theorem::MainCmVariant, MuSource::LowerBound) => sp.mu2_lower_used,
        (Theorem::MainCmVariant, MuSource::UpperEstimate) => Some(sp.mubar_upper),
        (_, MuSource::LowerBound) => sp.mu0_lower,
        (_, MuSource::UpperEstimate) => Some(sp.mu0_upper),
    };
    let Some(mu) = mu else {
        return skip("no lower bound for the spectral constant (supply μ₂)");
    };
    let deviation = match theorem {
        Theorem::Main | Theorem::MainCmVariant if params.positive_part => Some(dev.h0_minus_h_plus_l1),
        Theorem::Main | Theorem::MainCmVariant => Some(dev.h0_minus_h_l1),
        Theorem::Hk => dev.hk_deficit,
        Theorem::MeanConvex => (dev.underline_h > 0.0).then_some(dev.h0_minus_h_inf),
        Theorem::Obvp => dev.obvp_l1,
    };
    let Some(deviation) = deviation else {
        return skip("mean curvature is not positive on the boundary");
    };
    if branch == Branch::LowDim && params.sobolev_c.is_none() {
        return skip("exponent-½ branch skipped: no Sobolev constant supplied");
    }
    let inputs = ConstantInputs {
        n: PLANE_DIM,
        area: summary.area,
        diameter: summary.diameter,
        r_i: summary.r_interior,
        r_e: summary.r_exterior,
        mu,
        underline_h: (dev.underline_h > 0.0).then_some(dev.underline_h),
    };
    let mut constants = assemble_constants(theorem, branch, &inputs, params)?;
    constants.trace.m_measured = Some(field.max_gradient);
    let (rho_i, rho_e) = rho_bounds(&field.trace, z)?;
    let formula_rhs = constants.c * deviation.max(0.0).powf(constants.tau);
    let smallness_ok = constants.eps.is_none_or(|e| deviation < e);
    let bound_rhs = if smallness_ok { formula_rhs } else { summary.diameter };
    let tolerance = mesh_allowance(field);
    Ok(StabilityReport {
        theorem,
        branch,
        applicable: true,
        notice: None,
        z,
        rho_i,
        rho_e,
        c: constants.c,
        eps: constants.eps,
        deviation,
        tau: constants.tau,
        bound_rhs,
        formula_rhs,
        holds: rho_e - rho_i <= bound_rhs + tolerance,
        tolerance,
        smallness_ok,
        mu_source: params.mu_source,
        constants_trace: Some(constants.trace),
    })
}

/// `1e-9 + 2h²` with `h` the longest boundary edge, the allowance for comparing discrete radii.
pub fn mesh_allowance(field: &TorsionField) -> f64 {
    let h = field
        .mesh
        .boundary_edges
        .iter()
        .map(|e| {
            let (a, b) = (field.mesh.vertices[e.vertices[0]], field.mesh.vertices[e.vertices[1]]);
            (a[0] - b[0]).hypot(a[1] - b[1])
        })
        .fold(0.0, f64::max);
    1e-9 + 2.0 * h * h
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateEntry {
    pub z: Point,
    pub rho_i: f64,
    pub rho_e: f64,
    /// Largest `ρ_i − |x − z|` over the check samples (≤ 0 when the inner ball is inside).
    pub inner_violation: f64,
    /// Largest `|x − z| − ρ_e` over the check samples.
    pub outer_violation: f64,
    pub inclusions_ok: bool,
}

/// Inner and outer balls about each minimum cluster of `u`, with radii from the solver's
/// boundary samples and the inclusions checked on the independent samples of `check`.
pub fn aggregate_report(field: &TorsionField, check: &BoundaryTrace) -> Result<Vec<AggregateEntry>> {
    let tol = mesh_allowance(field);
    field
        .min_points
        .iter()
        .map(|&z| {
            let (rho_i, rho_e) = rho_bounds(&field.trace, z)?;
            let mut inner = f64::NEG_INFINITY;
            let mut outer = f64::NEG_INFINITY;
            for s in &check.samples {
                let r = (s.point[0] - z[0]).hypot(s.point[1] - z[1]);
                inner = inner.max(rho_i - r);
                outer = outer.max(r - rho_e);
            }
            Ok(AggregateEntry {
                z,
                rho_i,
                rho_e,
                inner_violation: inner,
                outer_violation: outer,
                inclusions_ok: inner <= tol && outer <= tol,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn aggregate_of_two_balls_on_lobed_domain() {
        use crate::fem::solve_domain;
        use crate::geometry::{boundary_trace, StarDomain};
        let d = StarDomain::perturbed_disk(0.45, 2).unwrap();
        let f = solve_domain(&d, 32, 128).unwrap();
        let agg = aggregate_report(&f, &boundary_trace(&d, 2048).unwrap()).unwrap();
        assert_eq!(agg.len(), 2, "{agg:?}");
        for a in &agg {
            assert!(a.inclusions_ok, "{a:?}");
            assert!((a.z[0].abs() - 0.25).abs() < 0.02 && a.z[1].abs() < 0.01, "{a:?}");
            assert!(a.rho_i < a.rho_e);
        }
    }

    #[test]
    fn dimensional_constants() {
        assert!((a_n(2) - 16.0 * PI.powf(0.25)).abs() < 1e-12);
        assert!((a_n(2) - 21.29).abs() < 0.02);
        assert!((alpha_n(2) - PI / 256.0).abs() < 1e-15);
        // α_N is the square of the smallness coefficient over N − 1
        for n in 2..=8 {
            let s = smallness_coeff(n);
            assert!((alpha_n(n) - s * s / (n as f64 - 1.0)).abs() <= 1e-15 * alpha_n(n));
        }
    }

    fn disk_inputs(mu: f64) -> ConstantInputs {
        ConstantInputs {
            n: 2,
            area: PI,
            diameter: 2.0,
            r_i: 1.0,
            r_e: 2.0,
            mu,
            underline_h: Some(1.0),
        }
    }

    #[test]
    fn disk_eps_matches_hand_composition() {
        let k = assemble_constants(Theorem::Main, Branch::HighDim, &disk_inputs(4.0), &StabilityParams::default()).unwrap();
        assert!((k.eps.unwrap() - PI / 16.0).abs() < 1e-14);
        assert_eq!(k.tau, 0.25);
        // C = a_2 · 1^{1/4} · c_2 d(d + r_e)/r_e · μ^{−1/2} · |Ω|^{−1/2}
        let expected = a_n(2) * 1.5 * 2.0 * 4.0 / 2.0 * 0.5 / PI.sqrt();
        assert!((k.c - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn hk_and_obvp_eps_match_printed_forms() {
        let p = StabilityParams::default();
        let inp = disk_inputs(3.0);
        let (mu, ri, m) = (3.0f64, 1.0f64, 1.0f64);
        let hk = assemble_constants(Theorem::Hk, Branch::HighDim, &inp, &p).unwrap();
        assert!((hk.eps.unwrap() - alpha_n(2) * mu * mu * m * m * ri.powi(4)).abs() < 1e-15);
        let ob = assemble_constants(Theorem::Obvp, Branch::HighDim, &inp, &p).unwrap();
        assert!((ob.eps.unwrap() - alpha_n(2) * mu * mu * m * ri.powi(5)).abs() < 1e-15);
        let mc = assemble_constants(Theorem::MeanConvex, Branch::HighDim, &inp, &p).unwrap();
        assert!((mc.eps.unwrap() - alpha_n(2) / 2.0 * (1.0 / PI) * mu * mu * ri.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn smaller_mu_is_more_conservative() {
        let p = StabilityParams::default();
        for th in Theorem::ALL {
            let lo = assemble_constants(th, Branch::HighDim, &disk_inputs(0.5), &p).unwrap();
            let hi = assemble_constants(th, Branch::HighDim, &disk_inputs(4.0), &p).unwrap();
            assert!(lo.c >= hi.c && lo.eps.unwrap() <= hi.eps.unwrap(), "{th:?}");
        }
    }

    #[test]
    fn low_dim_branch_needs_sobolev_constant() {
        let inp = disk_inputs(4.0);
        let mut p = StabilityParams::default();
        assert!(assemble_constants(Theorem::Main, Branch::LowDim, &inp, &p).is_err());
        p.sobolev_c = Some(1.0);
        let k = assemble_constants(Theorem::Main, Branch::LowDim, &inp, &p).unwrap();
        assert_eq!(k.tau, 0.5);
        assert!(k.eps.is_none());
        // 2√π · c · 2^γ / √π · (1 + μ)/μ · √(N−1) · M
        let expected = 2.0 * 2f64.sqrt() * 1.25 * 6.0;
        assert!((k.c - expected).abs() < 1e-12 * expected, "{} {expected}", k.c);
        p.gamma = 1.0;
        assert!(assemble_constants(Theorem::Main, Branch::LowDim, &inp, &p).is_err());
    }

    #[test]
    fn rejects_invalid_inputs() {
        let p = StabilityParams::default();
        let mut inp = disk_inputs(4.0);
        inp.mu = 0.0;
        assert!(assemble_constants(Theorem::Main, Branch::HighDim, &inp, &p).is_err());
        let mut inp = disk_inputs(4.0);
        inp.underline_h = None;
        assert!(assemble_constants(Theorem::MeanConvex, Branch::HighDim, &inp, &p).is_err());
    }
}
