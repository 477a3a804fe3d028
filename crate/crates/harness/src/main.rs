use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsc_crypt::analyze::analyze;
use dsc_crypt::config::{Experiment, ExperimentConfig};
use dsc_crypt::output::{validate_csv, write_csv_atomic};
use dsc_crypt::suite::{experiment_system, random_suite, SystemInstance};
use dsc_crypt::sweep::{regions, run_sweep, summary};
use dsc_crypt::verify::{verify_all, Check};
use dsc_crypt::HarnessError;

#[derive(Parser)]
#[command(
    name = "dsc-crypt",
    version,
    about = "Correlated-key distributed encryption experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the source and key rate regions and where each setting falls.
    Analyze(Args),
    /// Check the decoder and leakage invariants on every configured system.
    Verify(Args),
    /// Evaluate every (n, trial) and write one CSV row each.
    Sweep(Args),
}

#[derive(clap::Args)]
struct Args {
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &Args) -> Result<Experiment, HarnessError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()
}

fn verify_systems(exp: &Experiment) -> Result<Vec<SystemInstance>, HarnessError> {
    let cfg = &exp.config;
    match &cfg.suite {
        Some(suite) => random_suite(suite, cfg.seed, cfg.random_offsets, cfg.corrupt_decoder),
        None => exp
            .settings
            .iter()
            .flat_map(|&s| (0..cfg.trials).map(move |t| (s, t)))
            .map(|(s, t)| experiment_system(exp, s, t, cfg.seed).map(|(inst, _)| inst))
            .collect(),
    }
}

fn cmd_verify(exp: &Experiment, out: &mut dyn Write) -> Result<bool, HarnessError> {
    let systems = verify_systems(exp)?;
    let verdicts = verify_all(&systems)?;
    let mut failed = 0;
    for v in &verdicts {
        if !v.passed() {
            failed += 1;
            writeln!(out, "FAIL {}", v.label).map_err(io_err)?;
            write!(out, "{v}").map_err(io_err)?;
        }
    }
    writeln!(
        out,
        "check                         systems passed   worst deviation"
    )
    .map_err(io_err)?;
    for check in Check::ALL {
        let passed = verdicts.iter().filter(|v| v.get(check).passed).count();
        let worst = verdicts
            .iter()
            .map(|v| v.get(check).worst)
            .fold(0.0, f64::max);
        writeln!(
            out,
            "{:<28} {passed:>8}/{:<6} {worst:.3e}",
            check.name(),
            verdicts.len()
        )
        .map_err(io_err)?;
    }
    writeln!(
        out,
        "{} of {} systems passed all checks",
        verdicts.len() - failed,
        verdicts.len()
    )
    .map_err(io_err)?;
    Ok(failed == 0)
}

fn cmd_sweep(exp: &Experiment, out: &mut dyn Write) -> Result<(), HarnessError> {
    let path = exp
        .config
        .output
        .clone()
        .ok_or_else(|| HarnessError::Config {
            field: "output".into(),
            message: "sweep needs an output path (config or --out)".into(),
        })?;
    let start = std::time::Instant::now();
    let rows = run_sweep(exp, exp.config.seed)?;
    write_csv_atomic(&path, &rows)?;
    let (sw, key) = regions(exp);
    let checked = validate_csv(&path, &sw, &key)?;
    write!(out, "{}", summary(&rows)).map_err(io_err)?;
    writeln!(
        out,
        "wrote {checked} rows to {} in {:.1} s",
        path.display(),
        start.elapsed().as_secs_f64()
    )
    .map_err(io_err)?;
    Ok(())
}

fn io_err(e: io::Error) -> HarnessError {
    HarnessError::Output(e.to_string())
}

/// Runs a command, writing its report to `out`; returns the exit status.
fn run(cli: Cli, out: &mut dyn Write) -> Result<u8, HarnessError> {
    match cli.command {
        Command::Analyze(args) => {
            write!(out, "{}", analyze(&load(&args)?)?.render()).map_err(io_err)?;
            Ok(0)
        }
        Command::Verify(args) => Ok(if cmd_verify(&load(&args)?, out)? {
            0
        } else {
            1
        }),
        Command::Sweep(args) => {
            cmd_sweep(&load(&args)?, out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli, &mut io::stdout().lock()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("dsc-crypt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EQUAL_BITS: &str = "[[0.5, 0.0], [0.0, 0.5]]";
    const UNIFORM_BITS: &str = "[[0.25, 0.25], [0.25, 0.25]]";
    const DSBS: &str = "[[0.445, 0.055], [0.055, 0.445]]";

    struct Run {
        code: u8,
        text: String,
    }

    fn invoke(dir: &tempfile::TempDir, command: &str, config: &str, extra: &[&str]) -> Run {
        let path = dir.path().join(format!("{command}.json"));
        std::fs::write(&path, config).unwrap();
        let mut argv = vec!["dsc-crypt", command, path.to_str().unwrap()];
        argv.extend_from_slice(extra);
        let mut out = Vec::new();
        let code = match run(Cli::try_parse_from(argv).unwrap(), &mut out) {
            Ok(code) => code,
            Err(e) => {
                out.extend_from_slice(e.to_string().as_bytes());
                e.exit_code() as u8
            }
        };
        Run {
            code,
            text: String::from_utf8(out).unwrap(),
        }
    }

    fn config(src: &str, keys: &str, rest: &str) -> String {
        format!(r#"{{"source_pmf": {src}, "key_pmf": {keys}, "q1": 2, "q2": 2 {rest}}}"#)
    }

    #[test]
    fn analyze_equal_bits() {
        let dir = tempfile::tempdir().unwrap();
        let r = invoke(
            &dir,
            "analyze",
            &config(
                EQUAL_BITS,
                EQUAL_BITS,
                r#", "n": [2, 4], "m": [[1, 1], [2, 2]]"#,
            ),
            &[],
        );
        assert_eq!(r.code, 0);
        assert!(
            r.text.contains("thresholds (0.000000, 0.000000, 1.000000)"),
            "{}",
            r.text
        );
        assert!(r.text.contains("thresholds (1.000000, 1.000000, 1.000000)"));
        assert!(r.text.contains("witness (0.500000, 0.500000)"));
    }

    #[test]
    fn analyze_conflicting_and_dsbs() {
        let dir = tempfile::tempdir().unwrap();
        let r = invoke(
            &dir,
            "analyze",
            &config(UNIFORM_BITS, EQUAL_BITS, r#", "n": [2], "m": [[1, 1]]"#),
            &[],
        );
        assert!(r.text.contains("intersection empty"));
        let r = invoke(
            &dir,
            "analyze",
            &config(DSBS, UNIFORM_BITS, r#", "n": [2], "m": [[1, 1]]"#),
            &[],
        );
        assert!(
            r.text.contains("thresholds (0.499916, 0.499916, 1.499916)"),
            "{}",
            r.text
        );
    }

    #[test]
    fn malformed_config_exits_2_naming_field() {
        let dir = tempfile::tempdir().unwrap();
        let r = invoke(
            &dir,
            "analyze",
            &config(EQUAL_BITS, "[[1.0]]", r#", "n": [2], "m": [[1, 1]]"#),
            &[],
        );
        assert_eq!(r.code, 2);
        assert!(r.text.contains("`key_pmf`"), "{}", r.text);
        let r = invoke(&dir, "verify", "{ not json", &[]);
        assert_eq!(r.code, 2);
        let r = invoke(
            &dir,
            "sweep",
            &config(EQUAL_BITS, EQUAL_BITS, r#", "n": [2], "m": [[1, 1]]"#),
            &[],
        );
        assert_eq!(r.code, 2);
        assert!(r.text.contains("`output`"));
    }

    #[test]
    fn verify_default_suite_passes() {
        let dir = tempfile::tempdir().unwrap();
        let r = invoke(
            &dir,
            "verify",
            &config(
                DSBS,
                UNIFORM_BITS,
                r#", "n": [2], "m": [[1, 1]], "suite": {}"#,
            ),
            &[],
        );
        assert_eq!(r.code, 0, "{}", r.text);
        assert!(r.text.contains("50 of 50 systems passed all checks"));
    }

    #[test]
    fn verify_detects_corrupted_decoder() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            DSBS,
            UNIFORM_BITS,
            r#", "n": [2], "m": [[1, 1]], "corrupt_decoder": true, "suite": {"systems": 4}"#,
        );
        let r = invoke(&dir, "verify", &cfg, &["--seed", "5"]);
        assert_eq!(r.code, 1);
        assert!(r.text.contains("FAIL system 0 (seed 5"), "{}", r.text);
        assert!(r.text.contains("FAIL decoding-set sums equal one"));
        assert!(r.text.contains("deficit"));
    }

    #[test]
    fn verify_identity_pad() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            DSBS,
            UNIFORM_BITS,
            r#", "n": [2, 3], "encoder": "identity""#,
        );
        let r = invoke(&dir, "verify", &cfg, &[]);
        assert_eq!(r.code, 0, "{}", r.text);
        assert!(r.text.contains("2 of 2 systems passed"));
    }

    #[test]
    fn sweep_identity_rows() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("rows.csv");
        let cfg = config(
            DSBS,
            UNIFORM_BITS,
            r#", "n": [2, 3, 4], "encoder": "identity", "trials": 2"#,
        );
        let r = invoke(&dir, "sweep", &cfg, &["--out", out.to_str().unwrap()]);
        assert_eq!(r.code, 0, "{}", r.text);
        let rows = dsc_crypt::output::read_csv(&out).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.p_e == 0.0 && r.delta.abs() < 1e-9));
    }

    #[test]
    fn sweep_outside_key_region() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("rows.csv");
        // H(K1) = H(K2) = 1 but H(K1K2) = 1: any sum rate above 1 is outside
        let cfg = config(
            DSBS,
            EQUAL_BITS,
            r#", "n": [4, 6], "rate_targets": [0.75, 0.75], "trials": 3"#,
        );
        let r = invoke(&dir, "sweep", &cfg, &["--out", out.to_str().unwrap()]);
        assert_eq!(r.code, 0, "{}", r.text);
        for row in dsc_crypt::output::read_csv(&out).unwrap() {
            assert!(!row.in_key);
            assert!(row.lemma2_bound > 0.0 && row.delta >= row.lemma2_bound - 1e-9);
        }
    }

    #[test]
    fn resource_cap_exits_3() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("rows.csv");
        let cfg = config(DSBS, UNIFORM_BITS, r#", "n": [30], "m": [[1, 1]]"#);
        let r = invoke(&dir, "sweep", &cfg, &["--out", out.to_str().unwrap()]);
        assert_eq!(r.code, 3, "{}", r.text);
        assert!(!out.exists());
    }
}
