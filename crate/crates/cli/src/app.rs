//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use pipedream::enumeration::{query, SetKind, SetQuery, DEFAULT_GUARD};
use pipedream::grid::RenderFormat;
use pipedream::ktheory::resolve;
use pipedream::perm::{Permutation, SubwordSelection};
use pipedream::poly::BetaPolynomial;
use pipedream::specialization::{CoefficientMode, Specializer};
use pipedream::verify::{maxima_table_with, run_check_with, CheckReport, VerifyError, CHECK_IDS};

use crate::cache;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pipedream", version, about = "Bumpless pipe dreams and principal specializations")]
pub struct Cli {
    /// Worker threads for exhaustive sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Cache file, overriding PIPEDREAM_CACHE and the default location.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the grids of a family.
    Enumerate {
        #[arg(long)]
        perm: Permutation,
        /// BPD, bpd, BPD_K, mBPD or mbpd.
        #[arg(long, default_value = "BPD")]
        kind: SetKind,
        /// 1-based positions of a subword, e.g. `1,2,5,6,7`; selects BPD(w;v) or bpd(w;v).
        #[arg(long)]
        subword: Option<String>,
        #[arg(long, default_value = "ascii")]
        format: RenderFormat,
    },
    /// Print ν_w^(β).
    Nu {
        #[arg(long)]
        perm: Permutation,
        /// Evaluate at an integer β instead of printing the polynomial.
        #[arg(long, allow_negative_numbers = true)]
        at: Option<i64>,
    },
    /// Print the pattern coefficient c_w^(β).
    Coeff {
        #[arg(long)]
        perm: Permutation,
        /// recursive or ie (inclusion-exclusion).
        #[arg(long, default_value = "recursive")]
        mode: CoefficientMode,
        #[arg(long, allow_negative_numbers = true)]
        at: Option<i64>,
    },
    /// Print the β-Grothendieck polynomial.
    Poly {
        #[arg(long)]
        perm: Permutation,
    },
    /// Draw the K-th grid (1-based) of a family.
    Render {
        #[arg(long)]
        perm: Permutation,
        #[arg(long)]
        index: usize,
        #[arg(long, default_value = "ascii")]
        format: RenderFormat,
        #[arg(long, default_value = "BPD")]
        kind: SetKind,
        /// Draw the K-theoretic resolution, with bumps as `b`.
        #[arg(long)]
        resolved: bool,
    },
    /// Run a named check over every size up to N.
    Verify {
        check_id: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// Maxima of ν^(β) and c^(β) over S_N.
    Maxima {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        beta: i64,
        #[arg(long)]
        json: bool,
    },
    /// Inspect or clear the ν cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CacheAction {
    Path,
    Clear,
}

enum Failure {
    Usage(String),
    Other(String),
}

type Outcome = Result<i32, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn other(e: impl std::fmt::Display) -> Failure {
    Failure::Other(e.to_string())
}

/// Runs the command line `args` (including the program name) and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            log::debug!("thread pool already configured: {e}");
        }
    }
    match execute(&cli, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Other(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn cache_path(cli: &Cli) -> PathBuf {
    cli.cache.clone().unwrap_or_else(cache::default_path)
}

/// A specializer seeded from the cache; `finish` writes back new ν values.
struct Session {
    sp: Specializer,
    path: Option<PathBuf>,
    loaded: usize,
}

impl Session {
    fn open(cli: &Cli) -> Result<Session, Failure> {
        let sp = Specializer::new(DEFAULT_GUARD);
        if cli.no_cache {
            return Ok(Session { sp, path: None, loaded: 0 });
        }
        let path = cache_path(cli);
        let loaded = cache::load(&path).map_err(other)?;
        if loaded.skipped > 0 {
            log::warn!("skipped {} unreadable cache lines", loaded.skipped);
        }
        let count = loaded.entries.len();
        sp.preload(loaded.entries);
        Ok(Session {
            sp,
            path: Some(path),
            loaded: count,
        })
    }

    fn finish(self) -> Result<(), Failure> {
        let Some(path) = self.path else {
            return Ok(());
        };
        let all = self.sp.cached_nu();
        if all.len() > self.loaded {
            cache::store(&path, all.iter().map(|(w, nu)| (w, nu))).map_err(other)?;
        }
        Ok(())
    }
}

fn print_poly(out: &mut dyn Write, p: &BetaPolynomial, at: Option<i64>) -> Outcome {
    match at {
        Some(b) => writeln!(out, "{}", p.evaluate_i64(b)),
        None => writeln!(out, "{p}"),
    }
    .map_err(other)?;
    Ok(EXIT_OK)
}

fn family(perm: &Permutation, kind: SetKind, subword: Option<&str>) -> Result<SetQuery, Failure> {
    let Some(text) = subword else {
        return SetQuery::new(kind, perm.clone()).map_err(usage);
    };
    let text = text.trim();
    let positions = if text.is_empty() || text == "∅" {
        Vec::new()
    } else {
        text.split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| usage(format!("bad subword {text:?}: {e}")))?
    };
    let v = SubwordSelection::new(perm, &positions).map_err(usage)?;
    let kind = match kind {
        SetKind::All | SetKind::Subword => SetKind::Subword,
        SetKind::Reduced | SetKind::ReducedSubword => SetKind::ReducedSubword,
        other => return Err(usage(format!("--subword cannot be combined with {other:?}"))),
    };
    SetQuery::with_subword(kind, perm.clone(), v).map_err(usage)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::Enumerate {
            perm,
            kind,
            subword,
            format,
        } => {
            let q = family(perm, *kind, subword.as_deref())?;
            let grids = query(&q, DEFAULT_GUARD).map_err(usage)?;
            match format {
                RenderFormat::Json => {
                    for g in &grids {
                        writeln!(out, "{}", g.to_json()).map_err(other)?;
                    }
                }
                RenderFormat::Ascii => {
                    let blocks: Vec<String> = grids.iter().map(|g| g.to_ascii()).collect();
                    if !blocks.is_empty() {
                        writeln!(out, "{}", blocks.join("\n\n")).map_err(other)?;
                    }
                }
                RenderFormat::Svg => return Err(usage("enumerate supports ascii and json")),
            }
            Ok(EXIT_OK)
        }
        Command::Nu { perm, at } => {
            let session = Session::open(cli)?;
            let nu = session.sp.nu(perm).map_err(usage)?;
            session.finish()?;
            print_poly(out, &nu, *at)
        }
        Command::Coeff { perm, mode, at } => {
            let session = Session::open(cli)?;
            let c = session.sp.coefficient(perm, *mode).map_err(usage)?;
            session.finish()?;
            print_poly(out, &c, *at)
        }
        Command::Poly { perm } => {
            let sp = Specializer::new(DEFAULT_GUARD);
            let g = sp.grothendieck(perm).map_err(usage)?;
            writeln!(out, "{g}").map_err(other)?;
            Ok(EXIT_OK)
        }
        Command::Render {
            perm,
            index,
            format,
            kind,
            resolved,
        } => {
            let grids = query(&family(perm, *kind, None)?, DEFAULT_GUARD).map_err(usage)?;
            let grid = index
                .checked_sub(1)
                .and_then(|k| grids.get(k))
                .ok_or_else(|| usage(format!("index {index} outside 1..={}", grids.len())))?;
            let text = if *resolved {
                resolve(grid).grid.render(*format)
            } else {
                grid.render(*format)
            };
            writeln!(out, "{text}").map_err(other)?;
            Ok(EXIT_OK)
        }
        Command::Verify { check_id, n, json } => {
            let sp = Specializer::new(DEFAULT_GUARD);
            let report = run_check_with(&sp, check_id, *n).map_err(|e| match e {
                VerifyError::UnknownCheck(_) => usage(format!("{e}; known checks: {}", CHECK_IDS.join(", "))),
                VerifyError::GuardExceeded { .. } => usage(e),
                VerifyError::Spec(_) => other(e),
            })?;
            log::info!("{check_id} finished in {:.3}s", report.elapsed_secs);
            write_report(out, &report, *json).map_err(other)?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Maxima { n, beta, json } => {
            let sp = Specializer::new(DEFAULT_GUARD);
            let row = maxima_table_with(&sp, *n, *beta).map_err(|e| match e {
                VerifyError::GuardExceeded { .. } | VerifyError::Spec(pipedream::specialization::SpecError::GuardExceeded { .. }) => usage(e),
                _ => other(e),
            })?;
            let words = |v: &[Permutation]| v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ");
            if *json {
                writeln!(out, "{}", serde_json::to_string(&row).map_err(other)?).map_err(other)?;
            } else {
                writeln!(out, "n          {}", row.n).map_err(other)?;
                writeln!(out, "beta       {}", row.beta_value).map_err(other)?;
                writeln!(out, "max_nu     {}", row.max_nu).map_err(other)?;
                writeln!(out, "max_c      {}", row.max_c).map_err(other)?;
                writeln!(out, "argmax_nu  {}", words(&row.argmax_nu)).map_err(other)?;
                writeln!(out, "argmax_c   {}", words(&row.argmax_c)).map_err(other)?;
                writeln!(out, "layered    {}", row.argmax_layered()).map_err(other)?;
                writeln!(out, "agree      {}", row.argmax_agree()).map_err(other)?;
            }
            let violated = *beta == 1 && !(row.argmax_layered() && row.argmax_agree());
            Ok(if violated { EXIT_FAILURE } else { EXIT_OK })
        }
        Command::Cache { action } => {
            let path = cache_path(cli);
            match action {
                CacheAction::Path => writeln!(out, "{}", path.display()).map_err(other)?,
                CacheAction::Clear => {
                    let removed = cache::clear(&path).map_err(other)?;
                    let verb = if removed { "removed" } else { "no cache at" };
                    writeln!(out, "{verb} {}", path.display()).map_err(other)?;
                }
            }
            Ok(EXIT_OK)
        }
    }
}

/// Timing goes to the log, so that stdout is reproducible.
fn write_report(out: &mut dyn Write, report: &CheckReport, json: bool) -> std::io::Result<()> {
    if json {
        let mut value = serde_json::to_value(report).expect("reports serialize");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("elapsed_secs");
        }
        return writeln!(out, "{value}");
    }
    writeln!(out, "check      {}", report.check_id)?;
    writeln!(out, "n          {}", report.n)?;
    writeln!(out, "instances  {}", report.instances_checked)?;
    writeln!(out, "failures   {}", report.failure_count)?;
    for f in &report.failures {
        writeln!(out, "  {f}")?;
    }
    writeln!(out, "result     {}", if report.passed() { "PASS" } else { "FAIL" })
}
