//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgMatches, Command};
use corruption_lattice::oracle::{enumerate, MAX_ENUMERATION_SITES};
use corruption_lattice::{label_clusters, mean_state, Observable};

use crate::config::{RawConfig, KEYS, OUTPUT_ENV};
use crate::error::{CliError, Result};
use crate::formats;
use crate::run::{cmd_resume, cmd_run, RunSummary};
use crate::sweep::{cmd_sweep, summary_csv};

fn with_config_flags(cmd: Command) -> Command {
    let cmd = cmd.allow_negative_numbers(true).arg(
        Arg::new("config")
            .value_name("CONFIG")
            .help("configuration file of `key = value` lines"),
    );
    KEYS.iter().fold(cmd, |cmd, (key, help)| {
        cmd.arg(
            Arg::new(*key)
                .long(*key)
                .value_name("VALUE")
                .help(*help)
                .help_heading("Configuration keys"),
        )
    })
}

pub fn command() -> Command {
    Command::new("corruption-lattice")
        .about("Metropolis simulation of corrupt and honest agents on a periodic lattice")
        .after_help(format!(
            "Outputs go to `output`, defaulting to ${OUTPUT_ENV} and then ./out.\n\
             Exit codes: 0 success, 1 configuration error, 2 I/O or malformed file, 3 numeric or contract violation."
        ))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(with_config_flags(Command::new("run").about("run one chain, writing series, snapshots and clusters")))
        .subcommand(
            with_config_flags(Command::new("resume").about("continue a run from its checkpoint")).arg(
                Arg::new("checkpoint")
                    .long("checkpoint")
                    .value_name("PATH")
                    .help("checkpoint file [OUTPUT/checkpoint.txt]"),
            ),
        )
        .subcommand(with_config_flags(
            Command::new("sweep").about("independent chains over `temperatures` x `seeds_per_temperature`"),
        ))
        .subcommand(
            with_config_flags(Command::new("enumerate").about("exact Boltzmann marginal of an observable, as CSV"))
                .arg(
                    Arg::new("observable")
                        .long("observable")
                        .value_parser(["U", "W", "m"])
                        .default_value("U")
                        .help("observable to tabulate"),
                ),
        )
        .subcommand(
            Command::new("clusters")
                .about("cluster report for a snapshot (.lat dump or +/- grid)")
                .arg(Arg::new("snapshot").value_name("SNAPSHOT").required(true))
                .arg(
                    Arg::new("sizes")
                        .long("sizes")
                        .value_name("PATH")
                        .help("also write `cluster_id,size` rows here"),
                )
                .arg(
                    Arg::new("bins")
                        .long("bins")
                        .value_name("N")
                        .value_parser(clap::value_parser!(usize))
                        .help("print a size histogram with N bins"),
                ),
        )
}

fn raw_config(m: &ArgMatches) -> Result<RawConfig> {
    let flags: Vec<(String, String)> = KEYS
        .iter()
        .filter_map(|(k, _)| m.get_one::<String>(k).map(|v| (k.to_string(), v.clone())))
        .collect();
    RawConfig::load(m.get_one::<String>("config").map(Path::new), &flags)
}

fn report_run(out: &mut dyn Write, summary: &RunSummary) -> Result<()> {
    let state = &summary.state;
    let secs = summary.elapsed.as_secs_f64();
    let clusters = label_clusters(state.config(), state.geometry())?.n_clusters();
    writeln!(
        out,
        "steps={} elapsed_s={:.3} steps_per_s={:.0} W={} m={} n_clusters={}",
        state.step_count(),
        secs,
        state.step_count() as f64 / secs.max(1e-9),
        state.current_w(),
        mean_state(state.config()),
        clusters
    )
    .map_err(|e| CliError::io("<stdout>", e))
}

fn dispatch(matches: &ArgMatches, out: &mut dyn Write) -> Result<()> {
    let stdout_err = |e| CliError::io("<stdout>", e);
    match matches.subcommand() {
        Some(("run", m)) => {
            let cfg = raw_config(m)?.resolve()?;
            report_run(out, &cmd_run(&cfg)?)
        }
        Some(("resume", m)) => {
            let cfg = raw_config(m)?.resolve()?;
            let checkpoint = m.get_one::<String>("checkpoint").map(PathBuf::from);
            report_run(out, &cmd_resume(&cfg, checkpoint.as_deref())?)
        }
        Some(("sweep", m)) => {
            let cfg = raw_config(m)?.resolve()?;
            let results = cmd_sweep(&cfg)?;
            out.write_all(summary_csv(&results).as_bytes())
                .map_err(stdout_err)
        }
        Some(("enumerate", m)) => {
            let mut raw = raw_config(m)?;
            raw.set_default("steps", "1")?;
            let cfg = raw.resolve()?;
            let geometry = cfg.geometry()?;
            if geometry.site_count() > MAX_ENUMERATION_SITES {
                return Err(CliError::Usage(format!(
                    "enumeration is limited to {MAX_ENUMERATION_SITES} sites, lattice has {}",
                    geometry.site_count()
                )));
            }
            let model = cfg.model(&geometry)?;
            let observable = match m.get_one::<String>("observable").map(String::as_str) {
                Some("W") => Observable::Objective,
                Some("m") => Observable::MeanState,
                _ => Observable::Profit,
            };
            let dist = enumerate(&geometry, &model, 1.0 / cfg.temperature)?;
            writeln!(out, "value,probability").map_err(stdout_err)?;
            for (value, p) in dist.observable_marginal(observable) {
                writeln!(out, "{value},{p}").map_err(stdout_err)?;
            }
            Ok(())
        }
        Some(("clusters", m)) => {
            let path = Path::new(m.get_one::<String>("snapshot").expect("required"));
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let snap = formats::parse_snapshot(path, &text)?;
            let report = label_clusters(&snap.config, &snap.geometry)?.report();
            if let Some(sizes) = m.get_one::<String>("sizes") {
                std::fs::write(sizes, formats::cluster_sizes_csv(&report))
                    .map_err(|e| CliError::io(sizes, e))?;
            }
            out.write_all(formats::cluster_summary_csv(&report).as_bytes())
                .map_err(stdout_err)?;
            if let Some(&bins) = m.get_one::<usize>("bins") {
                let hist = report.size_histogram(bins)?;
                writeln!(out, "size_from,size_to,count").map_err(stdout_err)?;
                for (i, count) in hist.counts.iter().enumerate() {
                    let lo = hist.lower_bound(i);
                    writeln!(out, "{lo},{},{count}", lo + hist.width - 1).map_err(stdout_err)?;
                }
            }
            Ok(())
        }
        _ => unreachable!("subcommand required"),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match dispatch(&matches, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(
            std::iter::once("corruption-lattice").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn command_definition_is_consistent() {
        command().debug_assert();
    }

    #[test]
    fn enumerate_binomial_at_infinite_temperature_limit() {
        // Very high T approaches the binomial(4, 1/2) table.
        let (code, out, _) = run(&["enumerate", "--lengths", "2,2", "--T", "1e12"]);
        assert_eq!(code, 0);
        let rows: Vec<(f64, f64)> = out
            .lines()
            .skip(1)
            .map(|l| {
                let (a, b) = l.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect();
        let want = [1.0, 4.0, 6.0, 4.0, 1.0].map(|k| k / 16.0);
        assert_eq!(rows.len(), 5);
        for (u, ((value, p), w)) in rows.iter().zip(want).enumerate() {
            assert_eq!(*value, u as f64);
            assert!((p - w).abs() < 1e-9);
        }
    }

    #[test]
    fn enumerate_refuses_large_lattice() {
        let (code, _, err) = run(&["enumerate", "--lengths", "5,5", "--T", "1"]);
        assert_eq!(code, 1);
        assert!(err.contains("limited to 24 sites"));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(&["frobnicate"]).0, 1);
        assert_eq!(run(&["run", "--T"]).0, 1);
        assert_eq!(run(&["--help"]).0, 0);
        let (code, _, err) = run(&["run", "--lengths", "4,4", "--T", "-1", "--steps", "5"]);
        assert_eq!(code, 1);
        assert!(err.contains("flag --T"), "{err}");
    }

    #[test]
    fn missing_config_file_is_io_error() {
        assert_eq!(run(&["run", "/nonexistent/run.conf"]).0, 2);
        assert_eq!(run(&["clusters", "/nonexistent/snap.txt"]).0, 2);
    }
}
