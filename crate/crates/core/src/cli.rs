//! The `latcomb` command line.
//!
//! Exit codes: 0 success, 2 verification or tail-certification failure,
//! 3 malformed input or arguments.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::almostperiodic::{check_ap_distribution, find_almost_periods, AlmostPeriodReport, PeriodSearch, ProbeGrid, Ray};
use crate::comb::Truncation;
use crate::document::{
    document_format, parse_comb, parse_expsum, parse_points, parse_testfn, write_comb, write_window,
};
use crate::error::Error;
use crate::fourier::{distribution_ft, random_probes, verify_pairing};
use crate::gallery;
use crate::pointset::{diagnose, PDiscreteness, Window};
use crate::scalar::{format_f64, Scalar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "latcomb", version, about = "Lattice Dirac combs, their Fourier transforms, and diagnostics")]
struct Cli {
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Operations on comb documents.
    #[command(subcommand)]
    Comb(CombCommand),
    /// Numerical identity checks.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Point-set diagnostics.
    #[command(subcommand)]
    Pointset(PointsetCommand),
    /// Almost-period search.
    #[command(subcommand)]
    Ap(ApCommand),
    /// Emit a named construction: zd, derivative-comb, polynomial-comb,
    /// counterexample:J=<n>, random:seed=<n>.
    Gallery {
        name: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[command(flatten)]
        io: Output,
    },
}

#[derive(Debug, Args)]
struct Input {
    /// Input file; `-` or omitted reads stdin.
    #[arg(long = "in")]
    input: Option<String>,
}

#[derive(Debug, Args)]
struct Output {
    /// Output file; omitted writes stdout.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Subcommand)]
enum CombCommand {
    /// Restrict to a closed ball and list (point, k, coefficient) rows.
    Eval {
        #[command(flatten)]
        input: Input,
        /// Comma-separated coordinates; defaults to the origin.
        #[arg(long)]
        center: Option<String>,
        #[arg(long)]
        radius: String,
    },
    /// Fourier transform.
    Ft {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        io: Output,
    },
    /// Pair with a test function.
    Pair {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        testfn: String,
        /// Tail tolerance for automatic truncation.
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
        /// Fixed truncation radius instead of automatic selection.
        #[arg(long)]
        radius: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Check <f̂, φ> = <f, φ̂> on seeded Gaussian-Hermite probes.
    Poisson {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 20)]
        probes: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
enum PointsetCommand {
    /// Separation, p-discreteness, density, covering and counting report.
    Diagnose {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "1,2,4,8,16")]
        radii: String,
        /// Window center for comb input or covering radius.
        #[arg(long)]
        center: Option<String>,
        /// Window radius (required for comb input).
        #[arg(long)]
        radius: Option<String>,
        #[arg(long, requires = "h")]
        c: Option<f64>,
        #[arg(long, requires = "c")]
        h: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum ApCommand {
    /// Scan for ε-almost periods of an exponential sum, or of
    /// t ↦ <f, φ(t - ·)> for a comb and a test function.
    Periods {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        eps: f64,
        /// `start,end`.
        #[arg(long)]
        range: String,
        #[arg(long)]
        step: f64,
        #[arg(long, default_value_t = 2000)]
        probes: usize,
        #[arg(long, default_value_t = 0.1)]
        probe_spacing: f64,
        #[arg(long, default_value_t = 0.0)]
        probe_start: f64,
        /// Test function for comb input.
        #[arg(long)]
        testfn: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, requires = "ray_direction")]
        ray_origin: Option<String>,
        #[arg(long, requires = "ray_origin")]
        ray_direction: Option<String>,
    },
}

enum Failure {
    Input(String),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::TailCertification { .. } => Failure::Verify(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    if let Some(n) = cli.threads {
        // a pool already built by an earlier in-process call stays in place
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut out = Vec::new();
    let result = dispatch(cli.command, stdin, &mut out);
    let _ = stdout.write_all(&out);
    match result {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Verify(msg)) => {
            let _ = writeln!(stderr, "verification failed: {msg}");
            EXIT_VERIFY
        }
    }
}

fn read_input(input: &Input, stdin: &mut dyn Read) -> CliResult<String> {
    match input.input.as_deref() {
        None | Some("-") => {
            let mut s = String::new();
            stdin.read_to_string(&mut s)?;
            Ok(s)
        }
        Some(path) => fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}"))),
    }
}

fn read_file(path: &str) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))
}

fn emit(io: &Output, text: &str, out: &mut Vec<u8>) -> CliResult<()> {
    match &io.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{path}: {e}"))),
        None => {
            out.extend_from_slice(text.as_bytes());
            Ok(())
        }
    }
}

fn parse_list(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            Scalar::parse(t, crate::scalar::Regime::Float)
                .map(|x| x.to_f64())
                .map_err(|e| Failure::Input(format!("--{flag}: {e}")))
        })
        .collect()
}

fn parse_scalars(flag: &str, s: &str, regime: crate::scalar::Regime) -> CliResult<Vec<Scalar>> {
    s.split(',').map(|t| Scalar::parse(t, regime).map_err(|e| Failure::Input(format!("--{flag}: {e}")))).collect()
}

/// JSON with every float written to 17 significant digits.
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
    value.serialize(&mut ser).expect("reports serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("utf-8")
}

fn dispatch(command: Command, stdin: &mut dyn Read, out: &mut Vec<u8>) -> CliResult<i32> {
    match command {
        Command::Comb(CombCommand::Eval { input, center, radius }) => {
            let f = parse_comb(&read_input(&input, stdin)?)?;
            let regime = f.regime();
            let center = match center {
                Some(c) => parse_scalars("center", &c, regime)?,
                None => vec![Scalar::zero(regime); f.dim()],
            };
            let radius = Scalar::parse(&radius, regime).map_err(|e| Failure::Input(format!("--radius: {e}")))?;
            let w = f.evaluate_window(&center, &radius)?;
            out.extend_from_slice(write_window(&w).as_bytes());
            Ok(EXIT_OK)
        }
        Command::Comb(CombCommand::Ft { input, io }) => {
            let f = parse_comb(&read_input(&input, stdin)?)?;
            emit(&io, &write_comb(&distribution_ft(&f)?), out)?;
            Ok(EXIT_OK)
        }
        Command::Comb(CombCommand::Pair { input, testfn, tol, radius }) => {
            let f = parse_comb(&read_input(&input, stdin)?)?;
            let phi = parse_testfn(&read_file(&testfn)?)?;
            let truncation = match radius {
                Some(r) => Truncation::Radius(r),
                None => Truncation::Auto { tolerance: tol },
            };
            let r = f.pair(&phi, truncation)?;
            let text = format!(
                "value {} {}\ntail_bound {}\nradius {}\n",
                format_f64(r.value.re),
                format_f64(r.value.im),
                format_f64(r.tail_bound),
                format_f64(r.radius)
            );
            out.extend_from_slice(text.as_bytes());
            Ok(EXIT_OK)
        }
        Command::Verify(VerifyCommand::Poisson { input, probes, tol, seed }) => {
            let f = parse_comb(&read_input(&input, stdin)?)?;
            let probe_set = random_probes(f.dim(), probes, seed);
            let truncation = Truncation::Auto { tolerance: (tol * 1e-3).min(1e-11) };
            let report = verify_pairing(&f, &probe_set, truncation, tol)?;
            let mut text = String::from("# probe defect tail_bound\n");
            for (i, p) in report.probes.iter().enumerate() {
                text.push_str(&format!("{i} {} {}\n", format_f64(p.defect), format_f64(p.tail_bound)));
            }
            text.push_str(&format!(
                "max_defect {}\ntolerance {}\nresult {}\n",
                format_f64(report.max_defect),
                format_f64(tol),
                if report.passed { "pass" } else { "fail" }
            ));
            out.extend_from_slice(text.as_bytes());
            Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY })
        }
        Command::Pointset(PointsetCommand::Diagnose { input, radii, center, radius, c, h }) => {
            let text = read_input(&input, stdin)?;
            let radii = parse_list("radii", &radii)?;
            let params = match (c, h) {
                (Some(c), Some(h)) => Some(PDiscreteness::new(c, h)?),
                _ => None,
            };
            let is_comb = text.trim_start().starts_with("format") && document_format(&text).is_ok_and(|f| f == "comb");
            let report = if is_comb {
                let f = parse_comb(&text)?;
                let regime = f.regime();
                let center_s = match &center {
                    Some(c) => parse_scalars("center", c, regime)?,
                    None => vec![Scalar::zero(regime); f.dim()],
                };
                let radius = radius.ok_or_else(|| Failure::Input("--radius is required for comb input".into()))?;
                let radius_s =
                    Scalar::parse(&radius, regime).map_err(|e| Failure::Input(format!("--radius: {e}")))?;
                let w = f.evaluate_window(&center_s, &radius_s)?;
                let window = Window { center: crate::scalar::vec_to_f64(&center_s), radius: radius_s.to_f64() };
                diagnose(&w.points_f64(), Some(window), params, &radii, Some(&w))?
            } else {
                let points = parse_points(&text)?;
                let window = match radius {
                    Some(r) => {
                        let d = points.first().map_or(1, Vec::len);
                        let center = match &center {
                            Some(c) => parse_list("center", c)?,
                            None => vec![0.0; d],
                        };
                        Some(Window { center, radius: parse_list("radius", &r)?[0] })
                    }
                    None => None,
                };
                diagnose(&points, window, params, &radii, None)?
            };
            out.extend_from_slice(to_json(&report).as_bytes());
            Ok(EXIT_OK)
        }
        Command::Ap(ApCommand::Periods {
            input,
            eps,
            range,
            step,
            probes,
            probe_spacing,
            probe_start,
            testfn,
            tol,
            ray_origin,
            ray_direction,
        }) => {
            let text = read_input(&input, stdin)?;
            let bounds = parse_list("range", &range)?;
            if bounds.len() != 2 {
                return Err(Failure::Input("--range expects start,end".into()));
            }
            let search = PeriodSearch {
                epsilon: eps,
                start: bounds[0],
                end: bounds[1],
                step,
                probes: ProbeGrid { start: probe_start, spacing: probe_spacing, count: probes },
            };
            let ray = match (ray_origin, ray_direction) {
                (Some(o), Some(d)) => Some(Ray { origin: parse_list("ray-origin", &o)?, direction: parse_list("ray-direction", &d)? }),
                _ => None,
            };
            let header;
            let report = match document_format(&text)?.as_str() {
                "expsum" => {
                    let g = parse_expsum(&text)?;
                    let g = match &ray {
                        Some(r) => g.restrict_to_ray(&r.origin, &r.direction)?,
                        None => g,
                    };
                    header = String::new();
                    find_almost_periods(&g, &search)?
                }
                "comb" => {
                    let f = parse_comb(&text)?;
                    let path = testfn.ok_or_else(|| Failure::Input("--testfn is required for comb input".into()))?;
                    let phi = parse_testfn(&read_file(&path)?)?;
                    let r = check_ap_distribution(&f, &phi, tol, &search, ray.as_ref())?;
                    header = format!(
                        "# spectrum_radius {}\n# tail_bound {}\n# terms {}\n",
                        format_f64(r.spectrum_radius),
                        format_f64(r.tail_bound),
                        r.terms
                    );
                    r.report
                }
                other => return Err(Failure::Input(format!("format: expected \"expsum\" or \"comb\", found {other:?}"))),
            };
            out.extend_from_slice(header.as_bytes());
            out.extend_from_slice(period_columns(&report).as_bytes());
            Ok(EXIT_OK)
        }
        Command::Gallery { name, dim, io } => {
            let f = gallery::by_name(&name, dim)?;
            emit(&io, &write_comb(&f), out)?;
            Ok(EXIT_OK)
        }
    }
}

fn period_columns(r: &AlmostPeriodReport) -> String {
    let s = &r.search;
    let opt = |x: Option<f64>| x.map_or("none".to_string(), format_f64);
    let mut text = format!(
        "# epsilon {}\n# range {} {} step {}\n# probes start {} spacing {} count {}\n# note {}\n# found {}\n# max_gap {}\n# trailing_gap {}\n# tau grid_defect upper_bound\n",
        format_f64(s.epsilon),
        format_f64(s.start),
        format_f64(s.end),
        format_f64(s.step),
        format_f64(s.probes.start),
        format_f64(s.probes.spacing),
        s.probes.count,
        r.note,
        r.periods.len(),
        opt(r.max_gap),
        opt(r.trailing_gap),
    );
    for p in &r.periods {
        text.push_str(&format!("{} {} {}\n", format_f64(p.tau), format_f64(p.grid_defect), format_f64(p.upper_bound)));
    }
    text
}
