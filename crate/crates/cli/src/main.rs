//! Command-line harness: JSON ingestion of tuples, resolutions and
//! automorphisms; homology, Dirac and spectrum reports; grid scans; and the
//! localized-resolution comparison commands.
//!
//! Exit codes: 0 success, 1 a verified property failed, 2 invalid input.

mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use arveson::{
    base_point_overlap, base_point_transport_defect,
    build_composition_unitary, build_koszul, compare_local_homology_moebius,
    compare_local_homology_origin, default_point_grid, dirac_report, ergodicity_scan,
    fredholm_index, homology_dims, kernel_identity_residual, localized_homology,
    row_moebius_check, spectrum_membership, unitarity_defect, verify_exactness, ComparisonReport,
    ErgodicityOutcome, Error, MoebiusMap,
};

use input::{load, parse_point, InputFile};
use report::{point_json, write_atomic, ConfigEcho, GridRow, Report};

#[derive(Debug)]
pub enum CliError {
    /// Invalid or unreadable input: exit code 2.
    Input(String),
    /// A checked property failed: exit code 1.
    Assertion(String),
}

impl CliError {
    pub fn input(msg: String) -> Self {
        CliError::Input(msg)
    }

    pub fn assertion(msg: String) -> Self {
        CliError::Assertion(msg)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "arveson",
    about = "Koszul homology, Taylor spectra, ball automorphisms and localized resolutions \
             on truncated Drury-Arveson modules",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Number of variables (defaults to the value in the input file).
    #[arg(long, global = true)]
    d: Option<usize>,

    /// Truncation degree of the working space.
    #[arg(long, global = true)]
    cap: Option<usize>,

    /// Expanded truncation degree for composition operators.
    #[arg(long, global = true)]
    expansion_cap: Option<usize>,

    /// Relative singular-value threshold for rank decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    rank_tol: f64,

    /// Seed for all randomized sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Grid specification `reMin:reMax:steps,imMin:imMax:steps`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,

    /// 1-based coordinate that the grid varies (others fixed).
    #[arg(long, global = true, default_value_t = 1)]
    grid_coord: usize,

    /// Fixed values `re,im;re,im;..` for the non-varying coordinates.
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid_fixed: Option<String>,

    /// Safety cap on the number of grid points.
    #[arg(long, global = true, default_value_t = 10_000)]
    max_grid_points: usize,

    /// Input JSON file.
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Output file (report JSON, or the grid file for taylor-spectrum).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Grid output format.
    #[arg(long, global = true, default_value = "json")]
    format: String,

    /// Evaluation point `re,im;re,im;..` for localize / compare-87.
    #[arg(long, global = true, allow_hyphen_values = true)]
    point: Option<String>,

    /// Number of random samples for moebius-check.
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,

    /// Relative defect threshold for the ergodicity scanner.
    #[arg(long, global = true, default_value_t = 0.01)]
    threshold: f64,

    /// Largest purity iterate to report.
    #[arg(long, global = true, default_value_t = 10)]
    n_max: usize,

    /// Radius of the default ergodicity grid.
    #[arg(long, global = true, default_value_t = 0.3)]
    grid_radius: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Koszul homology dimensions of a tuple, with gap certificates.
    KoszulHomology,
    /// Dirac operator report: harmonic dimensions and invertibility.
    Dirac,
    /// Grid scan of Taylor spectrum membership and Dirac smallest singular
    /// value.
    TaylorSpectrum,
    /// Kernel-identity and row-multiplier checks for an automorphism.
    MoebiusCheck,
    /// Build the composition operator and report its defects.
    BuildUnitary,
    /// Verify composite-zero and strandwise exactness of a resolution.
    ResolutionVerify,
    /// Localize a resolution at a point and report homology dimensions.
    Localize,
    /// Compare Koszul homology of a module with its resolution localized at
    /// the origin.
    #[command(name = "compare-39-25")]
    Compare3925,
    /// Compare Koszul homology of the transformed module with the resolution
    /// localized at the base point, over a point or a default grid.
    #[command(name = "compare-87")]
    Compare87,
    /// Scan base points for a submodule element moved off the submodule.
    ErgodicityScan,
    /// Purity defect sequence of a tuple.
    Purity,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::KoszulHomology => "koszul-homology",
            Command::Dirac => "dirac",
            Command::TaylorSpectrum => "taylor-spectrum",
            Command::MoebiusCheck => "moebius-check",
            Command::BuildUnitary => "build-unitary",
            Command::ResolutionVerify => "resolution-verify",
            Command::Localize => "localize",
            Command::Compare3925 => "compare-39-25",
            Command::Compare87 => "compare-87",
            Command::ErgodicityScan => "ergodicity-scan",
            Command::Purity => "purity",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = run(&cli);
    eprintln!(
        "arveson {}: {:.3}s",
        cli.command.name(),
        started.elapsed().as_secs_f64()
    );
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Assertion(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn config_echo(cli: &Cli) -> ConfigEcho {
    ConfigEcho {
        d: cli.d,
        cap: cli.cap,
        expansion_cap: cli.expansion_cap,
        rank_tol: cli.rank_tol,
        seed: cli.seed,
        input: cli.input.clone(),
        output: cli.output.clone(),
        grid: cli.grid.clone(),
        format: cli.format.clone(),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if !(cli.rank_tol > 0.0 && cli.rank_tol < 1e-3) {
        return Err(CliError::input(format!(
            "rank tolerance {} must lie in (0, 1e-3)",
            cli.rank_tol
        )));
    }
    match cli.command {
        Command::KoszulHomology => koszul_homology(cli),
        Command::Dirac => dirac(cli),
        Command::TaylorSpectrum => taylor_spectrum(cli),
        Command::MoebiusCheck => moebius_check(cli),
        Command::BuildUnitary => build_unitary(cli),
        Command::ResolutionVerify => resolution_verify(cli),
        Command::Localize => localize(cli),
        Command::Compare3925 => compare_origin(cli),
        Command::Compare87 => compare_moebius(cli),
        Command::ErgodicityScan => ergodicity(cli),
        Command::Purity => purity(cli),
    }
}

fn required_input(cli: &Cli) -> Result<InputFile, CliError> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| CliError::input("--input is required for this command".into()))?;
    load(path)
}

fn expect_tuple(file: InputFile) -> Result<input::TupleFile, CliError> {
    match file {
        InputFile::Tuple(t) => Ok(t),
        other => Err(CliError::input(format!(
            "expected a tuple input, found kind '{}'",
            other.kind_name()
        ))),
    }
}

fn expect_automorphism(file: InputFile) -> Result<input::AutomorphismFile, CliError> {
    match file {
        InputFile::Automorphism(a) => Ok(a),
        other => Err(CliError::input(format!(
            "expected an automorphism input, found kind '{}'",
            other.kind_name()
        ))),
    }
}

fn koszul_homology(cli: &Cli) -> Result<(), CliError> {
    let tuple = expect_tuple(required_input(cli)?)?.build()?;
    let complex = build_koszul(&tuple)?;
    let h = homology_dims(&complex, cli.rank_tol);
    let results = json!({
        "d": tuple.d(),
        "dim": tuple.dim(),
        "commutator_residual": tuple.commutator_residual(),
        "chain_dims": complex.dims(),
        "homology_dims": h.dims,
        "boundary_ranks": h.boundary_ranks,
        "gap_ratios": h.gap_ratios,
        "index": fredholm_index(&h),
        "flagged": h.flagged,
    });
    let warnings = if h.flagged {
        vec!["a rank decision failed its spectral-gap certificate".to_string()]
    } else {
        Vec::new()
    };
    Report::new("koszul-homology", config_echo(cli), results, warnings).emit(cli.output.as_deref())
}

fn dirac(cli: &Cli) -> Result<(), CliError> {
    let tuple = expect_tuple(required_input(cli)?)?.build()?;
    let complex = build_koszul(&tuple)?;
    let dr = dirac_report(&complex, cli.rank_tol);
    let results = json!({
        "harmonic_dims": dr.harmonic_dims,
        "sigma_min": dr.sigma_min,
        "sigma_max": dr.sigma_max,
        "self_adjoint_residual": dr.self_adjoint_residual,
        "invertible": dr.invertible,
        "flagged": dr.flagged,
    });
    Report::new("dirac", config_echo(cli), results, Vec::new()).emit(cli.output.as_deref())
}

struct GridAxis {
    min: f64,
    max: f64,
    steps: usize,
}

fn parse_axis(text: &str) -> Result<GridAxis, CliError> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::input(format!("grid axis '{text}' is not min:max:steps")));
    }
    let min: f64 = parts[0]
        .parse()
        .map_err(|e| CliError::input(format!("bad grid bound '{}': {e}", parts[0])))?;
    let max: f64 = parts[1]
        .parse()
        .map_err(|e| CliError::input(format!("bad grid bound '{}': {e}", parts[1])))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|e| CliError::input(format!("bad step count '{}': {e}", parts[2])))?;
    if max < min {
        return Err(CliError::input(format!("degenerate grid axis '{text}'")));
    }
    // steps == 0 denotes an empty axis: the scan emits a header-only file
    Ok(GridAxis { min, max, steps })
}

fn axis_value(axis: &GridAxis, i: usize) -> f64 {
    if axis.steps == 1 {
        axis.min
    } else {
        axis.min + (axis.max - axis.min) * i as f64 / (axis.steps - 1) as f64
    }
}

fn taylor_spectrum(cli: &Cli) -> Result<(), CliError> {
    let tuple = expect_tuple(required_input(cli)?)?.build()?;
    let d = tuple.d();
    let spec = cli.grid.as_deref().unwrap_or("-1:1:21,-1:1:21");
    let axes: Vec<&str> = spec.split(',').collect();
    if axes.len() != 2 {
        return Err(CliError::input(format!(
            "grid '{spec}' must have a real and an imaginary axis"
        )));
    }
    let re_axis = parse_axis(axes[0])?;
    let im_axis = parse_axis(axes[1])?;
    let total = re_axis.steps * im_axis.steps;
    if total > cli.max_grid_points {
        return Err(CliError::input(format!(
            "grid has {total} points, above the limit {} (override with --max-grid-points)",
            cli.max_grid_points
        )));
    }
    if cli.grid_coord == 0 || cli.grid_coord > d {
        return Err(CliError::input(format!(
            "--grid-coord {} out of range for d = {d}",
            cli.grid_coord
        )));
    }
    let mut base = vec![Complex64::new(0.0, 0.0); d];
    if let Some(fixed) = &cli.grid_fixed {
        let values = parse_point(fixed, d - 1)?;
        let mut it = values.into_iter();
        for (i, slot) in base.iter_mut().enumerate() {
            if i + 1 != cli.grid_coord {
                *slot = it.next().expect("parse_point returned d-1 values");
            }
        }
    }

    let mut rows = Vec::with_capacity(total);
    for i in 0..re_axis.steps {
        for j in 0..im_axis.steps {
            let re = axis_value(&re_axis, i);
            let im = axis_value(&im_axis, j);
            let mut lambda = base.clone();
            lambda[cli.grid_coord - 1] = Complex64::new(re, im);
            let membership = spectrum_membership(&tuple, &lambda, cli.rank_tol)?;
            let shifted = tuple.shifted(&lambda)?;
            let complex = build_koszul(&shifted)?;
            let dr = dirac_report(&complex, cli.rank_tol);
            rows.push(GridRow { re, im, membership, dirac_sigma_min: dr.sigma_min });
        }
    }
    let rendered = report::render_grid(&rows, &cli.format)?;
    match cli.output.as_deref() {
        Some(path) => write_atomic(path, &rendered)?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&rendered)
                .map_err(|e| CliError::input(format!("cannot write grid: {e}")))?;
        }
    }
    let members = rows.iter().filter(|r| r.membership).count();
    eprintln!("taylor-spectrum: {members}/{} grid points in the spectrum", rows.len());
    Ok(())
}

fn random_ball_point(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<Complex64> {
    loop {
        let p: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n: f64 = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-3 && n < 1.0 {
            let target = radius * rng.gen_range(0.05..1.0f64);
            return p.iter().map(|z| z * (target / n)).collect();
        }
    }
}

fn moebius_check(cli: &Cli) -> Result<(), CliError> {
    let map = expect_automorphism(required_input(cli)?)?.build()?;
    let d = map.d();
    let cap = cli.cap.unwrap_or(4);
    let expansion = cli.expansion_cap.unwrap_or(cap + 40);
    let space = arveson::DASpace::new(d, cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);

    let mut max_kernel_identity = 0.0f64;
    let mut samples = Vec::with_capacity(cli.samples);
    for _ in 0..cli.samples {
        let z = random_ball_point(&mut rng, d, 0.9);
        let w = random_ball_point(&mut rng, d, 0.9);
        max_kernel_identity = max_kernel_identity.max(kernel_identity_residual(&map, &z, &w)?);
        samples.push((z, w));
    }
    let row = row_moebius_check(&map, &space, &samples, expansion)?;
    let results = json!({
        "lambda": point_json(map.lambda()),
        "samples": cli.samples,
        "kernel_identity_max_residual": max_kernel_identity,
        "closed_form_max_residual": row.max_closed_form_residual,
        "operator_residual": row.operator_residual,
        "thresholds": {
            "kernel_identity": 1e-12,
            "closed_form": 1e-12,
            "operator": 1e-6,
        },
    });
    let passed = max_kernel_identity <= 1e-12
        && row.max_closed_form_residual <= 1e-12
        && row.operator_residual <= 1e-6;
    Report::new("moebius-check", config_echo(cli), results, Vec::new())
        .emit(cli.output.as_deref())?;
    if passed {
        Ok(())
    } else {
        Err(CliError::assertion(format!(
            "residuals above threshold: kernel {max_kernel_identity:.3e}, closed form {:.3e}, \
             operator {:.3e}",
            row.max_closed_form_residual, row.operator_residual
        )))
    }
}

fn build_unitary(cli: &Cli) -> Result<(), CliError> {
    let map = expect_automorphism(required_input(cli)?)?.build()?;
    let cap = cli.cap.unwrap_or(4);
    let expansion = cli.expansion_cap.unwrap_or(cap + 40);
    let u = build_composition_unitary(&map, cap, expansion)?;
    let results = json!({
        "lambda": point_json(map.lambda()),
        "source_cap": cap,
        "expansion_cap": expansion,
        "unitarity_defect": unitarity_defect(&u),
        "base_point_transport_defect": base_point_transport_defect(&u)?,
        "base_point_overlap": base_point_overlap(&u)?,
        "matrix_shape": [u.target().dim(), u.source().dim()],
    });
    Report::new("build-unitary", config_echo(cli), results, Vec::new()).emit(cli.output.as_deref())
}

fn resolution_repr(
    file: InputFile,
) -> Result<(usize, usize, input::ResolutionSpecRepr), CliError> {
    match file {
        InputFile::Resolution(r) => Ok((r.d, r.cap, r.resolution)),
        other => Err(CliError::input(format!(
            "expected a resolution input, found kind '{}'",
            other.kind_name()
        ))),
    }
}

fn resolution_verify(cli: &Cli) -> Result<(), CliError> {
    let (d, cap, repr) = resolution_repr(required_input(cli)?)?;
    let spec = repr.build(cli.d.unwrap_or(d), cli.cap.unwrap_or(cap))?;
    let report = verify_exactness(&spec, cli.rank_tol)?;
    let strands: Vec<serde_json::Value> = report
        .strands
        .iter()
        .map(|s| {
            json!({
                "stage": s.stage,
                "strand": s.strand,
                "kernel_dim": s.kernel_dim,
                "image_rank": s.image_rank,
                "exact": s.exact,
                "complete": s.complete,
                "flagged": s.flagged,
            })
        })
        .collect();
    let results = json!({
        "ranks": spec.ranks(),
        "target": spec.target(),
        "composite_residuals": report.composite_residuals,
        "composite_ok": report.composite_ok,
        "strands": strands,
        "passed": report.passed,
        "notes": report.notes,
    });
    let passed = report.passed;
    Report::new("resolution-verify", config_echo(cli), results, Vec::new())
        .emit(cli.output.as_deref())?;
    if passed {
        Ok(())
    } else {
        Err(CliError::assertion("resolution failed exactness verification".into()))
    }
}

fn localize(cli: &Cli) -> Result<(), CliError> {
    let (d, cap, repr) = resolution_repr(required_input(cli)?)?;
    let d = cli.d.unwrap_or(d);
    let spec = repr.build(d, cli.cap.unwrap_or(cap))?;
    let text = cli
        .point
        .as_ref()
        .ok_or_else(|| CliError::input("--point is required for localize".into()))?;
    let lambda = parse_point(text, d)?;
    let localized = localized_homology(&spec, &lambda, cli.rank_tol)?;
    let results = json!({
        "point": point_json(&lambda),
        "ranks": spec.ranks(),
        "dims": localized.dims,
        "gap_ratios": localized.gap_ratios,
        "flagged": localized.flagged,
    });
    let warnings = if localized.flagged {
        vec!["a localized rank decision failed its gap certificate".to_string()]
    } else {
        Vec::new()
    };
    Report::new("localize", config_echo(cli), results, warnings).emit(cli.output.as_deref())
}

fn compare_file(cli: &Cli) -> Result<(usize, usize, input::CompareFile), CliError> {
    match required_input(cli)? {
        InputFile::Compare(c) => {
            let d = cli.d.unwrap_or(c.d);
            let cap = cli.cap.unwrap_or(c.cap);
            Ok((d, cap, c))
        }
        other => Err(CliError::input(format!(
            "expected a compare input, found kind '{}'",
            other.kind_name()
        ))),
    }
}

fn comparison_json(report: &ComparisonReport) -> serde_json::Value {
    json!({
        "point": point_json(&report.point),
        "koszul_dims": report.koszul_dims,
        "localized_dims": report.localized_dims,
        "matches": report.matches,
        "all_match": report.all_match,
        // comparisons refuse uncertified rank data, so emitted dimensions
        // always carry their gap certificates
        "gap_certified": true,
        "notes": report.notes,
    })
}

fn refuse_flagged(e: Error) -> CliError {
    // Gap-flag refusals are input errors by contract: the data cannot be
    // certified, so the comparison refuses to run.
    CliError::Input(e.to_string())
}

fn compare_origin(cli: &Cli) -> Result<(), CliError> {
    let (d, cap, file) = compare_file(cli)?;
    let module = file.module.build(d, cap)?;
    let spec = file.resolution.build(d, cap)?;
    let report =
        compare_local_homology_origin(&spec, &module, cli.rank_tol).map_err(refuse_flagged)?;
    let all_match = report.all_match;
    let results = comparison_json(&report);
    Report::new("compare-39-25", config_echo(cli), results, Vec::new())
        .emit(cli.output.as_deref())?;
    if all_match {
        Ok(())
    } else {
        Err(CliError::assertion(
            "Koszul homology does not match the localized resolution at the origin".into(),
        ))
    }
}

fn compare_moebius(cli: &Cli) -> Result<(), CliError> {
    let (d, cap, file) = compare_file(cli)?;
    let module = file.module.build(d, cap)?;
    let spec = file.resolution.build(d, cap)?;
    let grid: Vec<Vec<Complex64>> = match &cli.point {
        Some(text) => vec![parse_point(text, d)?],
        None => default_point_grid(d),
    };
    let mut reports = Vec::with_capacity(grid.len());
    let mut all_match = true;
    for lambda in grid {
        let map = MoebiusMap::from_lambda(lambda)?;
        let report = compare_local_homology_moebius(&spec, &module, &map, cli.rank_tol)
            .map_err(refuse_flagged)?;
        all_match &= report.all_match;
        reports.push(comparison_json(&report));
    }
    let results = json!({
        "points": reports,
        "all_match": all_match,
    });
    Report::new("compare-87", config_echo(cli), results, Vec::new())
        .emit(cli.output.as_deref())?;
    if all_match {
        Ok(())
    } else {
        Err(CliError::assertion(
            "Koszul homology of the transformed module does not match the localization".into(),
        ))
    }
}

fn ergodicity(cli: &Cli) -> Result<(), CliError> {
    let file = match required_input(cli)? {
        InputFile::Submodule(s) => s,
        other => {
            return Err(CliError::input(format!(
                "expected a submodule input, found kind '{}'",
                other.kind_name()
            )))
        }
    };
    let (space, basis) = file.build()?;
    let d = space.d();
    let expansion = cli.expansion_cap.unwrap_or(space.cap() + 20);
    let r = cli.grid_radius;
    if !(r > 0.0 && r < 1.0) {
        return Err(CliError::input(format!("grid radius {r} must lie in (0, 1)")));
    }
    let mut grid = Vec::new();
    for axis in 0..d {
        for value in [
            Complex64::new(r, 0.0),
            Complex64::new(0.0, r),
            Complex64::new(-r, 0.0),
            Complex64::new((r + 0.5).min(0.9), 0.0),
        ] {
            let mut p = vec![Complex64::new(0.0, 0.0); d];
            p[axis] = value;
            grid.push(p);
        }
    }
    let outcome = ergodicity_scan(&space, &basis, &grid, expansion, cli.threshold)?;
    let (results, witnessed) = match &outcome {
        ErgodicityOutcome::Witness(w) => (
            json!({
                "witness": {
                    "lambda": point_json(&w.lambda),
                    "basis_index": w.basis_index,
                    "defect": w.defect,
                },
                "threshold": cli.threshold,
                "submodule_dim": basis.len(),
            }),
            true,
        ),
        ErgodicityOutcome::Exhausted { max_defect } => (
            json!({
                "witness": null,
                "max_defect": max_defect,
                "threshold": cli.threshold,
                "submodule_dim": basis.len(),
            }),
            false,
        ),
    };
    Report::new("ergodicity-scan", config_echo(cli), results, Vec::new())
        .emit(cli.output.as_deref())?;
    if witnessed {
        Ok(())
    } else {
        Err(CliError::assertion(
            "no base point moved a submodule element past the threshold".into(),
        ))
    }
}

fn purity(cli: &Cli) -> Result<(), CliError> {
    let tuple = expect_tuple(required_input(cli)?)?.build()?;
    let defects: Vec<f64> = (0..=cli.n_max).map(|n| tuple.purity_defect(n)).collect();
    let cutoff = defects.iter().position(|&v| v <= 1e-10);
    let results = json!({
        "defects": defects,
        "cutoff": cutoff,
        "row_contraction_defect": tuple.row_contraction_defect(),
    });
    Report::new("purity", config_echo(cli), results, Vec::new()).emit(cli.output.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use report::complex_json;

    #[test]
    fn point_parsing_round_trip() {
        let p = parse_point("0.3,0;0.1,-0.2", 2).unwrap();
        assert_eq!(p[0], Complex64::new(0.3, 0.0));
        assert_eq!(p[1], Complex64::new(0.1, -0.2));
        assert!(parse_point("0.3,0", 2).is_err());
        assert!(parse_point("x,0;0,0", 2).is_err());
    }

    #[test]
    fn axis_parsing() {
        let a = parse_axis("-1:1:21").unwrap();
        assert_eq!(a.steps, 21);
        assert_eq!(axis_value(&a, 0), -1.0);
        assert_eq!(axis_value(&a, 20), 1.0);
        assert!(parse_axis("1:2").is_err());
        assert!(parse_axis("2:1:5").is_err());
    }

    #[test]
    fn grid_rendering_is_stable() {
        let rows = vec![
            GridRow { re: -1.0, im: 0.5, membership: true, dirac_sigma_min: 0.25 },
            GridRow { re: 0.0, im: 0.0, membership: false, dirac_sigma_min: 1.0 },
        ];
        let csv = report::render_grid(&rows, "csv").unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(
            text,
            "re,im,membership,dirac_sigma_min\n-1,0.5,1,0.25\n0,0,0,1\n"
        );
        assert!(report::render_grid(&rows, "yaml").is_err());
    }

    #[test]
    fn complex_json_shape() {
        let v = complex_json(Complex64::new(1.5, -2.0));
        assert_eq!(v, serde_json::json!([1.5, -2.0]));
    }
}
