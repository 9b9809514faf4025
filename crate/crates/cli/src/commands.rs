use std::io::Write;
use std::path::{Path, PathBuf};

use ghz_core::optimizer::{DEFAULT_TEMPERATURES, GENERATOR};
use ghz_core::protocol::{self, evaluate, monte_carlo, McReport, Protocol};
use ghz_core::{base_dp, multi_run, RandomSearchConfig};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::manifest::{csv_bytes, sibling, write_file, ManifestBuilder};
use crate::{Algorithm, BaselineArgs, BaselineName, EvaluateArgs, MonteCarloArgs, OptimizeArgs};

pub const GRID_HEADER: [&str; 3] = ["n", "k", "best_fidelity"];
pub const RUNS_HEADER: [&str; 4] = ["run", "temperature", "stream", "final_fidelity"];
pub const SWEEP_HEADER: [&str; 3] = ["F_bell", "F_ghz", "min_node_success_prob"];
pub const RETRIES_HEADER: [&str; 6] = [
    "F_bell",
    "node_path",
    "success_probability",
    "shots",
    "total_failures",
    "mean_failures_per_shot",
];

fn read_protocol(path: &Path) -> CliResult<Protocol> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    protocol::deserialize(&bytes).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn write_protocol(path: &Path, mut p: Protocol, manifest: &mut ManifestBuilder) -> CliResult<()> {
    p.provenance.manifest = Some(manifest.path().display().to_string());
    write_file(path, &protocol::serialize(&p))?;
    manifest.output(path);
    Ok(())
}

fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
    manifest: &mut ManifestBuilder,
) -> CliResult<()> {
    write_file(path, &csv_bytes(path, header, rows)?)?;
    manifest.output(path);
    Ok(())
}

fn print_csv(header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let bytes = csv_bytes(Path::new("<stdout>"), header, rows)?;
    std::io::stdout()
        .write_all(&bytes)
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn check_fidelity(f: f64, flag: &str) -> CliResult<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{flag} must lie in [0, 1], got {f}")))
    }
}

pub fn optimize(args: &OptimizeArgs) -> CliResult<()> {
    check_fidelity(args.fidelity, "--fidelity")?;
    let random = args.algorithm == Algorithm::Random;
    if !random && !args.temperatures.is_empty() {
        return Err(CliError::Usage("--temperature requires --algorithm random".into()));
    }
    if !random && args.runs.is_some() {
        return Err(CliError::Usage("--runs requires --algorithm random".into()));
    }
    let buffer = args.buffer.unwrap_or(if random { 200 } else { 1 });
    let temperatures = if args.temperatures.is_empty() {
        DEFAULT_TEMPERATURES.to_vec()
    } else {
        args.temperatures.clone()
    };
    let runs = args.runs.unwrap_or(1);

    let mut params = json!({
        "n": args.n,
        "k": args.k,
        "fidelity": args.fidelity,
        "algorithm": if random { "random" } else { "base" },
        "buffer": buffer,
    });
    if random {
        params["temperatures"] = json!(temperatures);
        params["runs"] = json!(runs);
    }
    let mut manifest = ManifestBuilder::new("optimize", params, &args.out);

    let (best, grid, run_rows) = if random {
        manifest.seed(args.seed, Some(GENERATOR.into()));
        let cfg = RandomSearchConfig {
            buffer,
            temperature: temperatures[0],
            seed: args.seed,
            runs,
            temperatures,
        };
        let report = multi_run(args.n, args.k, args.fidelity, &cfg)?;
        let rows: Vec<Vec<String>> = report
            .runs
            .iter()
            .map(|r| {
                vec![
                    r.run.to_string(),
                    r.temperature.to_string(),
                    r.stream.to_string(),
                    r.fidelity.to_string(),
                ]
            })
            .collect();
        (report.best, report.grid, Some(rows))
    } else {
        let table = base_dp(args.n, args.k, args.fidelity, buffer)?;
        (table.final_protocol()?, table.best_grid(), None)
    };

    let fidelity = best.predicted_fidelity.unwrap_or(f64::NAN);
    write_protocol(&args.out, best, &mut manifest)?;
    let grid_rows: Vec<Vec<String>> = grid
        .iter()
        .map(|(n, k, f)| vec![n.to_string(), k.to_string(), f.to_string()])
        .collect();
    write_csv(&sibling(&args.out, "grid.csv"), &GRID_HEADER, &grid_rows, &mut manifest)?;
    if let Some(rows) = run_rows {
        write_csv(&sibling(&args.out, "runs.csv"), &RUNS_HEADER, &rows, &mut manifest)?;
    }
    let manifest_path = manifest.finish()?;
    println!(
        "({}, {}) at F_bell = {}: best fidelity {fidelity}; protocol {}, manifest {}",
        args.n,
        args.k,
        args.fidelity,
        args.out.display(),
        manifest_path.display()
    );
    Ok(())
}

/// Evenly spaced points from `fmin` to `fmax`; a single step yields `fmin`.
pub fn sweep_points(fmin: f64, fmax: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![fmin];
    }
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                fmax
            } else {
                fmin + (fmax - fmin) * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

pub fn evaluate_sweep(args: &EvaluateArgs) -> CliResult<()> {
    check_fidelity(args.fmin, "--fmin")?;
    check_fidelity(args.fmax, "--fmax")?;
    if args.fmin > args.fmax {
        return Err(CliError::Usage("--fmin must not exceed --fmax".into()));
    }
    if args.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    let p = read_protocol(&args.protocol)?;
    let mut rows = Vec::with_capacity(args.steps);
    for f in sweep_points(args.fmin, args.fmax, args.steps) {
        let row = match evaluate(&p.root, f) {
            Ok(e) => vec![
                f.to_string(),
                e.state.fidelity().to_string(),
                e.min_success_probability().to_string(),
            ],
            // some branch has probability zero at this fidelity
            Err(ghz_core::Error::ImpossibleBranch { .. }) => {
                vec![f.to_string(), f64::NAN.to_string(), 0.0.to_string()]
            }
            Err(e) => return Err(e.into()),
        };
        rows.push(row);
    }
    match &args.out {
        None => print_csv(&SWEEP_HEADER, &rows),
        Some(out) => {
            let params = json!({
                "protocol": args.protocol.display().to_string(),
                "fmin": args.fmin,
                "fmax": args.fmax,
                "steps": args.steps,
            });
            let mut manifest = ManifestBuilder::new("evaluate", params, out);
            write_csv(out, &SWEEP_HEADER, &rows, &mut manifest)?;
            manifest.finish()?;
            Ok(())
        }
    }
}

pub fn montecarlo(args: &MonteCarloArgs) -> CliResult<()> {
    for &f in &args.fidelity {
        check_fidelity(f, "--fidelity")?;
    }
    if args.shots == 0 {
        return Err(CliError::Usage("--shots must be at least 1".into()));
    }
    let p = read_protocol(&args.protocol)?;
    let id = args
        .protocol
        .file_stem()
        .map_or_else(|| "protocol".into(), |s| s.to_string_lossy().into_owned());
    let reports: Vec<McReport> = args
        .fidelity
        .iter()
        .map(|&f| monte_carlo(&p.root, f, args.shots, args.seed))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<String>> = reports.iter().map(|r| r.csv_record(&id)).collect();
    match &args.out {
        None => print_csv(&McReport::CSV_HEADER, &rows),
        Some(out) => {
            let params = json!({
                "protocol": args.protocol.display().to_string(),
                "fidelity": args.fidelity,
                "shots": args.shots,
            });
            let mut manifest = ManifestBuilder::new("montecarlo", params, out);
            manifest.seed(args.seed, Some("ChaCha8Rng (rand_chacha 0.9), stream = shot index".into()));
            write_csv(out, &McReport::CSV_HEADER, &rows, &mut manifest)?;
            let retries: Vec<Vec<String>> = reports
                .iter()
                .flat_map(|r| {
                    r.retries.iter().map(move |n| {
                        vec![
                            r.fidelity.to_string(),
                            n.path.clone(),
                            n.success_probability.to_string(),
                            r.shots.to_string(),
                            n.total_failures.to_string(),
                            n.mean_failures_per_shot.to_string(),
                        ]
                    })
                })
                .collect();
            write_csv(&sibling(out, "retries.csv"), &RETRIES_HEADER, &retries, &mut manifest)?;
            manifest.finish()?;
            Ok(())
        }
    }
}

pub fn baseline(args: &BaselineArgs) -> CliResult<()> {
    let (name, p) = match args.name {
        BaselineName::Expedient => ("expedient", protocol::expedient()),
        BaselineName::Stringent => ("stringent", protocol::stringent()),
    };
    let mut manifest = ManifestBuilder::new("baseline", json!({ "name": name }), &args.out);
    let (n, k) = (p.n(), p.k());
    write_protocol(&args.out, p, &mut manifest)?;
    manifest.finish()?;
    println!("{name}: n = {n}, k = {k}; protocol {}", args.out.display());
    Ok(())
}
