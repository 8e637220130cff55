use std::fmt;

use serde_json::{json, Value};
use spa_core::channels::{approx_transpose, measure_prepare_from_design, Channel};
use spa_core::designs::{
    frame_potential, frame_potential_bound, is_prime, mub_prime, sic_from_fiducial, Design,
    Fiducial,
};
use spa_core::estimator::detect_with_confidence;
use spa_core::io::{
    parse_fiducial_file, parse_state_file, to_json, write_json, FiducialFile, StateFile,
};
use spa_core::optics::build_optical_pipeline;
use spa_core::search::fiducial_search;
use spa_core::sic_measurement::TwoStepCircuit;
use spa_core::suite::{run_suite, SuiteConfig};
use spa_core::witness::{
    aew_for_cut, detection_report, evaluate_tripartite_example, Cut, DetectionReport, Verdict,
};
use spa_core::Error;

use crate::{Cli, Command, Kind, Via};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Usage(_) => 2,
        CliError::Core(
            Error::Io(_) | Error::Parse(_) | Error::Validation { .. } | Error::NotPrime(_),
        ) => 2,
        CliError::Core(_) => 1,
    }
}

fn emit(cli: &Cli, value: &Value) -> Result<()> {
    if let Some(path) = &cli.json {
        write_json(path, value)?;
    }
    Ok(())
}

/// Runs the selected command; `Ok(false)` means a verification did not pass.
pub fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::VerifyDesign {
            dim,
            kind,
            fiducial,
        } => verify_design(cli, *dim, *kind, fiducial.as_deref()),
        Command::SearchFiducial {
            dim,
            max_iters,
            out,
        } => search(cli, *dim, *max_iters, out.as_deref()),
        Command::ApplyApproxTranspose { state, via, out } => {
            apply(cli, state, *via, out.as_deref())
        }
        Command::Detect {
            state,
            cut,
            shots,
            confidence,
        } => detect(cli, state, cut, *shots, *confidence),
        Command::TripartiteDemo => tripartite(cli),
        Command::VerifyAll { max_dim } => verify_all(cli, *max_dim),
    }
}

fn verify_design(cli: &Cli, d: usize, kind: Kind, file: Option<&std::path::Path>) -> Result<bool> {
    let design = match kind {
        Kind::Sic => {
            let f = match file {
                Some(p) => parse_fiducial_file(p)?,
                None => Fiducial::builtin(d).ok_or_else(|| {
                    CliError::Usage(format!(
                        "no built-in SIC fiducial for d = {d}; pass --fiducial (see search-fiducial)"
                    ))
                })?,
            };
            if f.d != d {
                return Err(CliError::Usage(format!(
                    "fiducial has dimension {}, --dim is {d}",
                    f.d
                )));
            }
            sic_from_fiducial(&f)?
        }
        Kind::Mub => mub_prime(d)?,
    };
    let fp = frame_potential(&design);
    let bound = frame_potential_bound(design.len(), d);
    let passed =
        design.two_design_residual <= cli.tolerance && design.coherence_residual <= cli.tolerance;
    println!(
        "{} d={d} with {} vectors",
        format!("{kind:?}").to_uppercase(),
        design.len()
    );
    println!("  two-design residual  {:.3e}", design.two_design_residual);
    println!("  coherence residual   {:.3e}", design.coherence_residual);
    println!("  frame potential      {fp:.15} (bound {bound:.15})");
    println!("{}", if passed { "verified" } else { "NOT verified" });
    emit(
        cli,
        &json!({
            "dim": d,
            "kind": format!("{kind:?}").to_lowercase(),
            "vectors": design.len(),
            "two_design_residual": design.two_design_residual,
            "coherence_residual": design.coherence_residual,
            "frame_potential": fp,
            "frame_potential_bound": bound,
            "tolerance": cli.tolerance,
            "passed": passed,
        }),
    )?;
    Ok(passed)
}

fn search(cli: &Cli, d: usize, max_iters: usize, out: Option<&std::path::Path>) -> Result<bool> {
    let result = fiducial_search(d, cli.seed, max_iters)?;
    let mut file = FiducialFile::from_fiducial(&result.fiducial);
    file.frame_potential = Some(result.frame_potential);
    file.max_overlap_deviation = Some(result.max_overlap_deviation);
    file.seed = Some(cli.seed);
    match out {
        Some(path) => {
            write_json(path, &file)?;
            println!(
                "d={d}: restart {}, {} iterations, frame potential excess {:.3e}, overlap deviation {:.3e}",
                result.restart,
                result.total_iterations,
                result.frame_potential_excess,
                result.max_overlap_deviation
            );
            println!("wrote {}", path.display());
        }
        None => print!("{}", to_json(&file)?),
    }
    emit(
        cli,
        &json!({
            "dim": d,
            "seed": cli.seed,
            "restart": result.restart,
            "iterations": result.total_iterations,
            "frame_potential": result.frame_potential,
            "frame_potential_excess": result.frame_potential_excess,
            "max_overlap_deviation": result.max_overlap_deviation,
            "accepted": result.accepted(),
        }),
    )?;
    Ok(result.accepted())
}

fn design_for(d: usize) -> Option<spa_core::Result<Design>> {
    if let Some(f) = Fiducial::builtin(d) {
        Some(sic_from_fiducial(&f))
    } else if is_prime(d) {
        Some(mub_prime(d))
    } else {
        None
    }
}

fn realization(d: usize, via: Via) -> Option<spa_core::Result<Channel>> {
    match via {
        Via::Formula => Some(approx_transpose(d)),
        Via::Design => design_for(d).map(|g| {
            g.and_then(|g| measure_prepare_from_design(&g))
                .map(|r| r.channel)
        }),
        Via::TwoStep => Fiducial::builtin(d).map(|f| TwoStepCircuit::new(&f).map(|c| c.channel())),
        Via::Optics => (d == 2).then(|| {
            build_optical_pipeline(&Fiducial::qubit_tetrahedral()).map(|p| p.output_channel())
        }),
    }
}

fn via_name(v: Via) -> &'static str {
    match v {
        Via::Formula => "formula",
        Via::Design => "design",
        Via::TwoStep => "two-step",
        Via::Optics => "optics",
    }
}

fn apply(
    cli: &Cli,
    state: &std::path::Path,
    via: Via,
    out: Option<&std::path::Path>,
) -> Result<bool> {
    let rho = parse_state_file(state)?;
    let d = rho.dim();
    let mut channels = Vec::new();
    for v in [Via::Formula, Via::Design, Via::TwoStep, Via::Optics] {
        if let Some(ch) = realization(d, v) {
            channels.push((v, ch?));
        }
    }
    let chosen = channels
        .iter()
        .find(|(v, _)| *v == via)
        .map(|(_, ch)| ch)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "--via {} is not available for d = {d}",
                via_name(via)
            ))
        })?;
    let output = chosen.apply_state(&rho)?.with_dims(rho.dims())?;

    let mut pairs = Vec::new();
    let mut worst = 0.0f64;
    for (i, (a, ca)) in channels.iter().enumerate() {
        for (b, cb) in &channels[i + 1..] {
            let dist = ca.distance(cb);
            worst = worst.max(dist);
            pairs.push(json!({"a": via_name(*a), "b": via_name(*b), "cj_distance": dist}));
        }
    }
    let passed = worst <= cli.tolerance;
    match out {
        Some(path) => {
            write_json(path, &StateFile::from_state(&output))?;
            println!(
                "applied via {} (d={d}), wrote {}",
                via_name(via),
                path.display()
            );
            for p in &pairs {
                println!(
                    "  {:>8} vs {:<8} CJ distance {:.3e}",
                    p["a"].as_str().unwrap_or_default(),
                    p["b"].as_str().unwrap_or_default(),
                    p["cj_distance"].as_f64().unwrap_or(f64::NAN)
                );
            }
        }
        None => print!("{}", to_json(&StateFile::from_state(&output))?),
    }
    if !passed {
        eprintln!(
            "cross-check failed: max CJ distance {worst:.3e} > {:.1e}",
            cli.tolerance
        );
    }
    emit(
        cli,
        &json!({
            "dim": d,
            "via": via_name(via),
            "cross_check": pairs,
            "max_cj_distance": worst,
            "passed": passed,
        }),
    )?;
    Ok(passed)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Detected => "detected",
        Verdict::NotDetected => "not-detected",
        Verdict::Boundary => "boundary",
    }
}

fn print_report(r: &DetectionReport) {
    println!(
        "{:<6} {:>16} {:>16} {:>13} {:>4}",
        "cut", "value", "threshold", "verdict", "PPT"
    );
    for c in &r.cuts {
        println!(
            "{:<6} {:>16.12} {:>16.12} {:>13} {:>4}",
            c.cut,
            c.value,
            c.threshold,
            verdict_name(c.verdict),
            format!("{:?}", c.ppt).to_uppercase()
        );
    }
    if let Some(reference) = &r.reference {
        println!(
            "reference {}: oracle {:.12}, nominal {:.12}, closed form {:.12} (|s⟩) / {:.12} (|s*⟩)",
            reference.cut,
            reference.oracle,
            reference.nominal,
            reference.closed_form,
            reference.closed_form_conj
        );
    }
    if let Some(e) = &r.estimator {
        let (lo, hi) = e.result.confidence_interval;
        println!(
            "estimator: {} shots, estimate {:.6} ± {:.6}, {:.0}% interval [{lo:.6}, {hi:.6}] → {:?}",
            e.result.shots,
            e.result.estimate,
            e.result.std_error,
            100.0 * e.result.level,
            e.verdict
        );
    }
    for c in &r.caveats {
        println!("caveat: {c}");
    }
}

fn report_json(r: &DetectionReport) -> Result<Value> {
    serde_json::to_value(r).map_err(|e| CliError::Core(Error::Parse(e.to_string())))
}

fn detect(
    cli: &Cli,
    state: &std::path::Path,
    spec: &str,
    shots: Option<u64>,
    level: f64,
) -> Result<bool> {
    let rho = parse_state_file(state)?;
    let cut = Cut::parse(spec, rho.dims().len()).map_err(|e| CliError::Usage(e.to_string()))?;
    if cut.side.len() != 1 {
        return Err(CliError::Usage(format!(
            "cut {spec:?} must isolate a single party"
        )));
    }
    let mut report = detection_report(&rho, std::slice::from_ref(&cut))?;
    if let Some(n) = shots {
        let a = aew_for_cut(&rho, &cut)?;
        report.estimator = Some(detect_with_confidence(&rho, &a, n, cli.seed, level)?);
    }
    print_report(&report);
    emit(cli, &report_json(&report)?)?;
    Ok(true)
}

fn tripartite(cli: &Cli) -> Result<bool> {
    let report = evaluate_tripartite_example()?;
    print_report(&report);
    let ok = report.cuts[0].verdict == Verdict::Detected
        && report.cuts[1..]
            .iter()
            .all(|c| c.verdict == Verdict::Boundary);
    emit(cli, &report_json(&report)?)?;
    Ok(ok)
}

fn verify_all(cli: &Cli, max_dim: usize) -> Result<bool> {
    if max_dim < 2 {
        return Err(CliError::Usage("--max-dim must be at least 2".into()));
    }
    let results = run_suite(&SuiteConfig {
        max_dim,
        seed: cli.seed,
    });
    for c in &results {
        println!(
            "{} [{:>2}] {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.detail
        );
    }
    let passed = results.iter().all(|c| c.passed);
    emit(
        cli,
        &json!({"max_dim": max_dim, "seed": cli.seed, "criteria": results, "passed": passed}),
    )?;
    Ok(passed)
}
