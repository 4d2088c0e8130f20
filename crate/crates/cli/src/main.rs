//! Command-line driver: validate instances, run the invariant-set
//! construction, cross-check against the brute-force oracle, and run the
//! lemma battery.
//!
//! Exit codes are part of the interface:
//!   0  success, all asserted properties hold
//!   1  parse error (malformed file or JSON)
//!   2  validation failure (bad group, bad family, bad permutation)
//!   3  lemma violation or oracle mismatch (a report is still written)
//!   4  cap or budget exceedance

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use asg_core::approx::{family_validate, Family};
use asg_core::covering::SearchLimits;
use asg_core::error::Error;
use asg_core::group::Automorphism;
use asg_core::io::{
    build_report, read_instance, realize_instance, to_canonical_json, write_atomic, InstanceFile,
};
use asg_core::oracle::{check_lemmas, lemma_battery, oracle_core, BatteryOutcome, OracleReport};
use asg_core::pipeline::{invariance_check, run_pipeline, PipelineConfig};

/// Brute-force automorphism enumeration is used up to this order when the
/// instance supplies no explicit automorphism list.
const AUTO_ENUMERATION_CAP: usize = 16;

#[derive(Parser)]
#[command(
    name = "asg",
    about = "Exact invariant approximate subgroups over finite groups",
    long_about = "Builds the invariant approximate subgroups H and H' for a uniform family \
of commensurable approximate subgroups in a finite group, with verifiable certificates.\n\n\
Exit codes: 0 success; 1 parse error; 2 validation failure; 3 lemma violation or oracle \
mismatch (report still written); 4 cap/budget exceedance.\n\n\
The environment variable ASG_BUDGET overrides the default search budget; an explicit \
--budget flag takes precedence over both."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress the human-readable summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an instance and validate the family; prints K and N.
    Validate { path: PathBuf },
    /// Run the full construction and write a report.
    Run {
        path: PathBuf,
        /// Report destination; written atomically. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also run every lemma check against this instance.
        #[arg(long)]
        check_lemmas: bool,
        /// Cross-check all pipeline fields against the brute-force oracle
        /// (instance must fit the oracle caps).
        #[arg(long)]
        oracle: bool,
        /// Enumerate only unions of at most this many members.
        #[arg(long)]
        max_union: Option<usize>,
        /// Node budget for the exact searches.
        #[arg(long)]
        budget: Option<u64>,
        /// Include wall-clock timing in the report (breaks byte-for-byte
        /// determinism of the output file).
        #[arg(long)]
        timing: bool,
    },
    /// Seeded lemma battery over random small instances.
    Battery {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long, default_value_t = 16)]
        group_cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        budget: Option<u64>,
        /// Test hook: inject a fabricated failure to exercise the
        /// reproducer path.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Run only the oracle comparison for an instance.
    Oracle {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Json(_) => 1,
        Error::LemmaViolation { .. } | Error::OracleMismatch { .. } => 3,
        Error::FamilyTooLargeForExhaustive { .. }
        | Error::CapExceeded { .. }
        | Error::OrderCapExceeded { .. }
        | Error::SearchBudgetExceeded { .. } => 4,
        _ => 2,
    }
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_code_for(err))
}

/// flag > ASG_BUDGET > instance config > default
fn resolve_limits(flag: Option<u64>, instance: Option<u64>) -> SearchLimits {
    let env = std::env::var("ASG_BUDGET")
        .ok()
        .and_then(|v| v.parse::<u64>().ok());
    match flag.or(env).or(instance) {
        Some(budget) => SearchLimits::with_budget(budget),
        None => SearchLimits::default(),
    }
}

fn load_family(path: &Path, limits: &SearchLimits) -> Result<Family, Error> {
    let instance = read_instance(path)?;
    let realized = realize_instance(&instance)?;
    family_validate(&realized.family, limits)
}

fn cmd_validate(path: &Path, quiet: bool) -> ExitCode {
    let limits = resolve_limits(None, None);
    match load_family(path, &limits) {
        Ok(family) => {
            if !quiet {
                println!("K={} N={}", family.k_uniform, family.n_uniform);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    path: &Path,
    out: Option<&Path>,
    with_lemmas: bool,
    with_oracle: bool,
    max_union: Option<usize>,
    budget: Option<u64>,
    timing: bool,
    quiet: bool,
) -> ExitCode {
    let started = Instant::now();
    let instance = match read_instance(path) {
        Ok(i) => i,
        Err(e) => return fail(&e),
    };
    let inst_config = instance.config.clone().unwrap_or_default();
    let limits = resolve_limits(budget, inst_config.budget);
    let realized = match realize_instance(&instance) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let family = match family_validate(&realized.family, &limits) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let config = PipelineConfig {
        max_union: max_union.or(inst_config.max_union),
        exhaustive_cap: inst_config.exhaustive_cap.unwrap_or(12),
        limits,
    };
    let mut result = match run_pipeline(&family, &config) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };

    let auto_cap = inst_config.automorphism_cap.unwrap_or(AUTO_ENUMERATION_CAP);
    let autos: Vec<Automorphism> = match &realized.automorphisms {
        Some(list) => list.clone(),
        None if realized.group.order() <= auto_cap => {
            match asg_core::group::enumerate_automorphisms(&realized.group, auto_cap) {
                Ok(a) => a,
                Err(e) => return fail(&e),
            }
        }
        None => vec![Automorphism::identity(&realized.group)],
    };
    let invariance = match invariance_check(&result, &family, &autos) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    result.invariance = Some(invariance.clone());

    let mut violation: Option<Error> = invariance.ensure_invariant().err();

    let lemma_tallies = if with_lemmas {
        match check_lemmas(&family, &limits) {
            Ok((tallies, failures)) => {
                if violation.is_none() {
                    if let Some(f) = failures.first() {
                        violation = Some(Error::LemmaViolation {
                            lemma: f.lemma.clone(),
                            detail: f.detail.clone(),
                        });
                    }
                }
                Some(tallies)
            }
            Err(e) => return fail(&e),
        }
    } else {
        None
    };

    let oracle_section: Option<OracleReport> = if with_oracle {
        match oracle_core(&family) {
            Ok(report) => Some(report),
            Err(Error::OracleMismatch { field, detail }) => {
                let report = serde_json::from_str(&detail).ok();
                if violation.is_none() {
                    violation = Some(Error::OracleMismatch { field, detail });
                }
                report
            }
            Err(e) => return fail(&e),
        }
    } else {
        None
    };

    let timing_ms = timing.then(|| started.elapsed().as_millis() as u64);
    let report = build_report(
        &instance,
        &family,
        &result,
        &invariance,
        lemma_tallies,
        oracle_section,
        timing_ms,
    );
    let text = to_canonical_json(&report);
    if let Some(out_path) = out {
        if let Err(e) = write_atomic(out_path, &text) {
            return fail(&e);
        }
    } else if quiet {
        // nothing to print
    } else {
        print!("{text}");
    }
    if !quiet {
        println!(
            "m={} k0={} n0={} m'={} n2={} |H|={} |H'|={} K(H)={}",
            result.m,
            result.k0,
            result.n0,
            result.m_prime,
            result.n2,
            result.h.len(),
            result.h_prime.len(),
            result.h_doubling.doubling_k,
        );
    }
    match violation {
        Some(e) => fail(&e),
        None => ExitCode::SUCCESS,
    }
}

fn reproducer_path(out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => p.with_extension("reproducer.json"),
        None => PathBuf::from("battery.reproducer.json"),
    }
}

fn cmd_battery(
    seed: u64,
    trials: u64,
    group_cap: usize,
    out: Option<&Path>,
    budget: Option<u64>,
    inject_fault: bool,
    quiet: bool,
) -> ExitCode {
    let limits = resolve_limits(budget, None);
    let mut outcome: BatteryOutcome = match lemma_battery(seed, trials, group_cap, &limits) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    if inject_fault {
        let instance = InstanceFile {
            group: asg_core::io::GroupSpec::Cyclic { n: 2 },
            family: vec![vec![0]],
            automorphisms: None,
            config: None,
        };
        outcome.failures.push(asg_core::oracle::BatteryFailure {
            trial: trials,
            lemma: "injected-fault".to_string(),
            detail: "fault injected by --inject-fault".to_string(),
            instance,
        });
    }
    if let Some(out_path) = out {
        if let Err(e) = write_atomic(out_path, &to_canonical_json(&outcome)) {
            return fail(&e);
        }
    }
    if !quiet {
        for (lemma, tally) in &outcome.report.lemma_tallies {
            println!("{lemma}: {} pass / {} fail", tally.pass, tally.fail);
        }
    }
    if let Some(first) = outcome.failures.first() {
        let repro = reproducer_path(out);
        if let Err(e) = write_atomic(&repro, &to_canonical_json(&first.instance)) {
            return fail(&e);
        }
        eprintln!(
            "error: {} failed on trial {}: {} (reproducer: {})",
            first.lemma,
            first.trial,
            first.detail,
            repro.display()
        );
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

fn cmd_oracle(path: &Path, out: Option<&Path>, quiet: bool) -> ExitCode {
    let limits = resolve_limits(None, None);
    let family = match load_family(path, &limits) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    match oracle_core(&family) {
        Ok(report) => {
            if let Some(out_path) = out {
                if let Err(e) = write_atomic(out_path, &to_canonical_json(&report)) {
                    return fail(&e);
                }
            }
            if !quiet {
                println!("oracle match: all fields agree");
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Validate { path } => cmd_validate(path, cli.quiet),
        Command::Run {
            path,
            out,
            check_lemmas,
            oracle,
            max_union,
            budget,
            timing,
        } => cmd_run(
            path,
            out.as_deref(),
            *check_lemmas,
            *oracle,
            *max_union,
            *budget,
            *timing,
            cli.quiet,
        ),
        Command::Battery {
            seed,
            trials,
            group_cap,
            out,
            budget,
            inject_fault,
        } => cmd_battery(
            *seed,
            *trials,
            *group_cap,
            out.as_deref(),
            *budget,
            *inject_fault,
            cli.quiet,
        ),
        Command::Oracle { path, out } => cmd_oracle(path, out.as_deref(), cli.quiet),
    }
}
