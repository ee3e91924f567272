//! Command-line front end. Exit codes: 0 success, 1 verification failure, 2 usage or config error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::fem::solve_domain;
use crate::geometry::{boundary_trace, geometry_summary, StarDomain, PLANE_DIM};
use crate::identities::{cs_deficit, identity_suite, serrin_checks, DeficitReport, IdentityName, IdentityReport, SerrinChecks};
use crate::oracles::{annulus_check, f_kappa, f_sup, gradient_bounds, AnnulusCheck, FMode, FSup, GradientBounds};
use crate::pipeline::{loglog_slope, sweep_csv, sweep_detailed, SweepEntry, X0Policy, DENSE_SAMPLES};
use crate::spectral::{spectral_estimate, SpectralEstimate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Residuals below this are treated as round-off when checking monotone decrease.
const ROUNDOFF_FLOOR: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "bubblestab", version, about = "Torsion-function checks of soap-bubble stability estimates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integral identities on every domain and refinement level.
    Verify(RunArgs),
    /// Stability sweep over `ρ = 1 + t cos kθ`.
    Sweep(RunArgs),
    /// Harmonic Poincaré constant estimates.
    Spectral(RunArgs),
    /// Closed-form oracle tables.
    Oracles(OracleArgs),
    /// Nodal error against closed-form solutions across refinement levels.
    Convergence(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (default: current directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Adds gradient bounds for the configured domains.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Only the suprema of f(κ).
    #[arg(long)]
    pub fsup: bool,
    /// Single dimension instead of 2..=8.
    #[arg(long = "N", value_name = "N")]
    pub dimension: Option<usize>,
}

enum Outcome {
    Passed,
    Failed,
}

pub fn run(cli: Cli) -> i32 {
    let res = match cli.command {
        Command::Verify(a) => with_config(&a, cmd_verify),
        Command::Sweep(a) => with_config(&a, cmd_sweep),
        Command::Spectral(a) => with_config(&a, cmd_spectral),
        Command::Convergence(a) => with_config(&a, cmd_convergence),
        Command::Oracles(a) => cmd_oracles(&a),
    };
    match res {
        Ok(Outcome::Passed) => EXIT_OK,
        Ok(Outcome::Failed) => EXIT_FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::InvalidArgument(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

fn with_config(a: &RunArgs, f: fn(&ExperimentConfig, &Path) -> Result<Outcome>) -> Result<Outcome> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let out = out_dir(a.out.as_deref())?;
    f(&cfg, &out)
}

fn out_dir(out: Option<&Path>) -> Result<PathBuf> {
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn require_domains(cfg: &ExperimentConfig) -> Result<Vec<(String, StarDomain)>> {
    if cfg.domains.is_empty() {
        return Err(Error::Config("domains: at least one domain is required".into()));
    }
    cfg.built_domains()
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub domain_id: String,
    pub n_radial: usize,
    pub n_angular: usize,
    pub identities: Vec<IdentityReport>,
    pub deficit: Option<DeficitReport>,
    pub serrin: Option<SerrinChecks>,
    /// Nodal L∞ error when a closed-form solution is known.
    pub nodal_error: Option<f64>,
    pub max_gradient: Option<f64>,
    pub gradient_bounds: Option<GradientBounds>,
    pub cg_iterations: Option<usize>,
    pub error: Option<String>,
}

fn verify_level(id: &str, domain: &StarDomain, nr: usize, nt: usize, c0: f64) -> VerifyReport {
    let mut rep = VerifyReport {
        domain_id: id.to_string(),
        n_radial: nr,
        n_angular: nt,
        identities: vec![],
        deficit: None,
        serrin: None,
        nodal_error: None,
        max_gradient: None,
        gradient_bounds: None,
        cg_iterations: None,
        error: None,
    };
    let res = (|| -> Result<()> {
        let dense = boundary_trace(domain, DENSE_SAMPLES)?;
        let summary = geometry_summary(domain, &dense);
        let field = solve_domain(domain, nr, nt)?;
        rep.identities = identity_suite(&field, &field.trace, &summary)?;
        rep.deficit = Some(cs_deficit(&field)?);
        rep.serrin = Some(serrin_checks(&field, &field.trace, &summary));
        rep.nodal_error = domain.exact_torsion().map(|e| field.nodal_error(&e));
        rep.max_gradient = Some(field.max_gradient);
        rep.gradient_bounds = Some(gradient_bounds(&summary, PLANE_DIM, c0)?);
        rep.cg_iterations = Some(field.iterations);
        Ok(())
    })();
    if let Err(e) = res {
        rep.error = Some(e.to_string());
    }
    rep
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityProgress {
    pub identity: IdentityName,
    /// `residual_rel` from coarsest to finest level.
    pub residual_rel: Vec<f64>,
    pub monotone: bool,
    pub within_threshold: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainVerifySummary {
    pub domain_id: String,
    pub levels: Vec<(usize, usize)>,
    pub identities: Vec<IdentityProgress>,
    pub errors: Vec<String>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySummary {
    pub threshold: f64,
    pub domains: Vec<DomainVerifySummary>,
    pub passed: bool,
}

fn summarize(id: &str, levels: &[(usize, usize)], reps: &[VerifyReport], threshold: f64) -> DomainVerifySummary {
    let errors: Vec<String> = reps.iter().filter_map(|r| r.error.clone()).collect();
    let finest = reps.last().expect("at least one level");
    let mut identities = Vec::new();
    for fr in finest.identities.iter().filter(|r| r.applicable) {
        let series: Vec<f64> = reps
            .iter()
            .filter_map(|r| r.identities.iter().find(|x| x.name == fr.name).map(|x| x.residual_rel))
            .collect();
        let monotone = series
            .windows(2)
            .all(|w| w[1] <= w[0] || w[0].max(w[1]) < ROUNDOFF_FLOOR);
        identities.push(IdentityProgress {
            identity: fr.name,
            residual_rel: series,
            monotone,
            within_threshold: fr.residual_rel <= threshold,
        });
    }
    let passed = errors.is_empty() && identities.iter().all(|p| p.within_threshold);
    DomainVerifySummary {
        domain_id: id.to_string(),
        levels: levels.to_vec(),
        identities,
        errors,
        passed,
    }
}

fn cmd_verify(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let domains = require_domains(cfg)?;
    let levels = cfg.mesh.levels();
    let jobs: Vec<(usize, usize)> = (0..domains.len()).flat_map(|d| (0..levels.len()).map(move |l| (d, l))).collect();
    let reports: Vec<VerifyReport> = jobs
        .par_iter()
        .map(|&(d, l)| {
            let (nr, nt) = levels[l];
            verify_level(&domains[d].0, &domains[d].1, nr, nt, cfg.params.c0)
        })
        .collect();
    for r in &reports {
        write_json(&out.join(format!("verify_{}_{}x{}.json", r.domain_id, r.n_radial, r.n_angular)), r)?;
    }
    let threshold = cfg.thresholds.residual_rel;
    let summaries: Vec<DomainVerifySummary> = reports
        .chunks(levels.len())
        .zip(&domains)
        .map(|(reps, (id, _))| summarize(id, &levels, reps, threshold))
        .collect();
    for s in &summaries {
        for p in &s.identities {
            let fin = p.residual_rel.last().copied().unwrap_or(f64::NAN);
            println!(
                "{:<16} {:<20} residual_rel {:.3e} {}{}",
                s.domain_id,
                p.identity.as_str(),
                fin,
                if p.within_threshold { "ok" } else { "FAIL" },
                if p.monotone { "" } else { " (not monotone)" }
            );
        }
        for e in &s.errors {
            println!("{:<16} error: {e}", s.domain_id);
        }
    }
    let passed = summaries.iter().all(|s| s.passed);
    write_json(
        &out.join("verify_summary.json"),
        &VerifySummary {
            threshold,
            domains: summaries,
            passed,
        },
    )?;
    Ok(if passed { Outcome::Passed } else { Outcome::Failed })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub mode_k: usize,
    pub n_radial: usize,
    pub n_angular: usize,
    /// Slope of `log(ρ_e − ρ_i)` against `log ‖H₀ − H‖₁` over the successful rows.
    pub loglog_slope: Option<f64>,
    pub entries: Vec<SweepEntry>,
}

fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep: block is required for this command".into()))?;
    let opts = cfg.run_options();
    let entries = sweep_detailed(sw.mode_k, &sw.values, &opts);
    let rows: Vec<_> = entries.iter().map(|e| e.row.clone()).collect();
    std::fs::write(out.join(&cfg.outputs.csv_path), sweep_csv(&rows))?;
    let ok: Vec<_> = rows.iter().filter(|r| r.error.is_none()).collect();
    let slope = loglog_slope(
        &ok.iter().map(|r| r.dev_l1).collect::<Vec<_>>(),
        &ok.iter().map(|r| r.gap).collect::<Vec<_>>(),
    );
    let violations = rows.iter().filter(|r| r.smallness_ok && !r.holds).count();
    for r in &rows {
        println!(
            "t={:<8} dev_L1={:.4e} gap={:.4e} C={:.4e} eps={:.3e} smallness={} holds={}{}",
            r.t,
            r.dev_l1,
            r.gap,
            r.c,
            r.eps,
            r.smallness_ok,
            r.holds,
            r.error.as_deref().map(|e| format!(" error: {e}")).unwrap_or_default()
        );
    }
    if let Some(s) = slope {
        println!("log-log slope of gap vs dev_L1: {s:.4}");
    }
    write_json(
        &out.join(&cfg.outputs.json_path),
        &SweepReport {
            mode_k: sw.mode_k,
            n_radial: opts.n_radial,
            n_angular: opts.n_angular,
            loglog_slope: slope,
            entries,
        },
    )?;
    Ok(if violations == 0 { Outcome::Passed } else { Outcome::Failed })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralEntry {
    pub domain_id: String,
    pub estimate: Option<SpectralEstimate>,
    pub error: Option<String>,
}

fn cmd_spectral(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let domains = require_domains(cfg)?;
    let (nr, nt) = cfg.mesh.finest();
    let p = &cfg.params;
    let entries: Vec<SpectralEntry> = domains
        .par_iter()
        .map(|(id, domain)| {
            let est = (|| {
                let dense = boundary_trace(domain, DENSE_SAMPLES)?;
                let summary = geometry_summary(domain, &dense);
                let field = solve_domain(domain, nr, nt)?;
                let x0 = match p.x0_policy {
                    X0Policy::MinPoint => field.min_points.first().copied().unwrap_or(domain.center),
                    X0Policy::CenterOfMass => summary.center_of_mass,
                };
                spectral_estimate(domain, &field.mesh, &dense, &summary, x0, p.basis_degree, p.mu2)
            })();
            match est {
                Ok(e) => SpectralEntry {
                    domain_id: id.clone(),
                    estimate: Some(e),
                    error: None,
                },
                Err(e) => SpectralEntry {
                    domain_id: id.clone(),
                    estimate: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let mut failed = false;
    for e in &entries {
        match (&e.estimate, &e.error) {
            (Some(s), _) => {
                failed |= !(s.consistent && s.ordered);
                println!(
                    "{:<16} mu0_upper {:.6} mubar_upper {:.6} mu0_lower {}",
                    e.domain_id,
                    s.mu0_upper,
                    s.mubar_upper,
                    s.mu0_lower.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into())
                );
            }
            (None, err) => {
                failed = true;
                println!("{:<16} error: {}", e.domain_id, err.as_deref().unwrap_or(""));
            }
        }
    }
    write_json(&out.join("spectral.json"), &entries)?;
    Ok(if failed { Outcome::Failed } else { Outcome::Passed })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceEntry {
    pub domain_id: String,
    pub levels: Vec<(usize, usize)>,
    /// Nodal L∞ errors, coarsest first; empty without a closed form.
    pub errors: Vec<f64>,
    /// `log₂(e_k / e_{k+1})` between consecutive levels.
    pub orders: Vec<f64>,
    pub note: Option<String>,
}

fn cmd_convergence(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let domains = require_domains(cfg)?;
    let levels = cfg.mesh.levels();
    let mut failed = false;
    let mut entries = Vec::new();
    for (id, domain) in &domains {
        let mut entry = ConvergenceEntry {
            domain_id: id.clone(),
            levels: levels.clone(),
            errors: vec![],
            orders: vec![],
            note: None,
        };
        match domain.exact_torsion() {
            None => entry.note = Some("no closed-form solution for this shape".into()),
            Some(exact) => {
                let errs: Vec<Result<f64>> = levels
                    .par_iter()
                    .map(|&(nr, nt)| Ok(solve_domain(domain, nr, nt)?.nodal_error(&exact)))
                    .collect();
                match errs.into_iter().collect::<Result<Vec<f64>>>() {
                    Ok(errs) => {
                        entry.orders = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
                        entry.errors = errs;
                    }
                    Err(e) => {
                        failed = true;
                        entry.note = Some(e.to_string());
                    }
                }
            }
        }
        for ((nr, nt), e) in levels.iter().zip(&entry.errors) {
            println!("{:<16} {:>4}x{:<5} L_inf error {:.4e}", id, nr, nt, e);
        }
        if !entry.orders.is_empty() {
            let o: Vec<String> = entry.orders.iter().map(|v| format!("{v:.3}")).collect();
            println!("{:<16} orders {}", id, o.join(" "));
        }
        if let Some(n) = &entry.note {
            println!("{id:<16} {n}");
        }
        entries.push(entry);
    }
    write_json(&out.join("convergence.json"), &entries)?;
    Ok(if failed { Outcome::Failed } else { Outcome::Passed })
}

#[derive(Clone, Debug, Serialize)]
pub struct FSupEntry {
    pub dimension: usize,
    pub derived: f64,
    pub printed: f64,
    pub claimed: f64,
    /// Derived supremum agrees with the claimed constant to 1e-6.
    pub matches_claimed: bool,
    pub discrepancy: bool,
    pub derived_detail: FSup,
    pub printed_detail: FSup,
}

#[derive(Clone, Debug, Serialize)]
pub struct FRow {
    pub dimension: usize,
    pub kappa: f64,
    pub printed: f64,
    pub derived: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainBounds {
    pub domain_id: String,
    pub bounds: GradientBounds,
}

#[derive(Clone, Debug, Serialize)]
pub struct OraclesReport {
    pub f_sup: Vec<FSupEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_table: Option<Vec<FRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annulus: Option<Vec<AnnulusCheck>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradient_bounds: Option<Vec<DomainBounds>>,
}

pub fn fsup_entry(n: usize) -> Result<FSupEntry> {
    let d = f_sup(n, FMode::Derived)?;
    let p = f_sup(n, FMode::Printed)?;
    Ok(FSupEntry {
        dimension: n,
        derived: d.value,
        printed: p.value,
        claimed: d.claimed_value,
        matches_claimed: !d.discrepancy,
        discrepancy: d.discrepancy,
        derived_detail: d,
        printed_detail: p,
    })
}

pub fn oracles_report(dims: &[usize], fsup_only: bool, cfg: Option<&ExperimentConfig>) -> Result<OraclesReport> {
    let f_sup = dims.iter().map(|&n| fsup_entry(n)).collect::<Result<Vec<_>>>()?;
    if fsup_only {
        return Ok(OraclesReport {
            f_sup,
            f_table: None,
            annulus: None,
            gradient_bounds: None,
        });
    }
    let kappas: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let mut table = Vec::new();
    let mut annulus = Vec::new();
    for &n in dims {
        for &k in &kappas {
            table.push(FRow {
                dimension: n,
                kappa: k,
                printed: f_kappa(k, n, FMode::Printed)?,
                derived: f_kappa(k, n, FMode::Derived)?,
            });
            annulus.push(annulus_check(n, k)?);
        }
    }
    let gradient_bounds = match cfg {
        None => None,
        Some(cfg) => Some(
            cfg.built_domains()?
                .into_iter()
                .map(|(id, d)| {
                    let dense = boundary_trace(&d, DENSE_SAMPLES)?;
                    let summary = geometry_summary(&d, &dense);
                    Ok(DomainBounds {
                        domain_id: id,
                        bounds: gradient_bounds(&summary, PLANE_DIM, cfg.params.c0)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    Ok(OraclesReport {
        f_sup,
        f_table: Some(table),
        annulus: Some(annulus),
        gradient_bounds,
    })
}

fn cmd_oracles(a: &OracleArgs) -> Result<Outcome> {
    let cfg = a.config.as_deref().map(ExperimentConfig::load).transpose()?;
    let dims: Vec<usize> = match a.dimension {
        Some(n) if n < 2 => return Err(Error::InvalidArgument(format!("--N must be >= 2, got {n}"))),
        Some(n) => vec![n],
        None => (2..=8).collect(),
    };
    let report = oracles_report(&dims, a.fsup, cfg.as_ref())?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(out) = &a.out {
        write_json(&out_dir(Some(out))?.join("oracles.json"), &report)?;
    }
    Ok(Outcome::Passed)
}
