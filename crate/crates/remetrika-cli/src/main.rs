//! Command-line front end: instance I/O, pipeline orchestration, JSON/CSV
//! reports, and SVG rendering for planar demo instances.
//!
//! Exit codes are a stable contract: 0 success, 1 mathematical gate failure,
//! 2 input error, 3 internal verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use remetrika::chainmetric::{
    dmu_exact, dmu_truncated, parse_mu_spec, truncation_suite, semi_metric_suite,
};
use remetrika::converse::{bessaga_metric, unbounded_metric, wong_metric};
use remetrika::cover::{limit_set_suite, extended_cylinder_suite};
use remetrika::instance::{fixture, parse_instance, Instance};
use remetrika::monoid::{build_automaton, ConditionA, MonoidAutomaton, DEFAULT_STATE_CAP};
use remetrika::ratio::{parse_rat, rat_to_f64, rat_to_string, Rat};
use remetrika::remetrize::{remetrize, ScaleSequence};
use remetrika::render::{render_svg, RenderOptions};
use remetrika::{Error, MetricMatrix, SuiteReport, WeightSequence};

const EXIT_GATE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "remetrika",
    about = "Attractor decisions and constructive remetrization for finite map families",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InstanceArg {
    /// Path to an instance JSON document, or a bundled fixture name
    /// (T1..T5 or e.g. "binary-shift").
    instance: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add decimal approximations alongside exact rationals.
    #[arg(long)]
    float: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the family has an attractor; exit 0 iff it does.
    Check(InstanceArg),
    /// Print the attractor, escape depths and symbolic addresses.
    Attractor(InstanceArg),
    /// Compute the chain metric d^mu (exact, or depth-truncated).
    Metric {
        #[command(flatten)]
        common: InstanceArg,
        /// Weight sequence: constant:M | geometric:r | file:<path>.
        #[arg(long, default_value = "geometric:1/2")]
        mu: String,
        /// Truncate chains to cylinders of words no longer than this.
        #[arg(long)]
        depth: Option<usize>,
        /// Output format.
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
    },
    /// Run the full remetrization pipeline and emit its certificate.
    Remetrize {
        #[command(flatten)]
        common: InstanceArg,
        /// Bound for the synthesized metric (d <= 4M).
        #[arg(long = "M", default_value = "1")]
        m: String,
        /// Also write the comparison-function breakpoints as CSV.
        #[arg(long)]
        phi_csv: Option<PathBuf>,
        /// For single-map instances, include the prescribed-factor metric.
        #[arg(long)]
        single: bool,
        /// Contraction factor for --single.
        #[arg(long, default_value = "1/2")]
        alpha: String,
    },
    /// Single-map metric with a prescribed contraction factor.
    Bessaga {
        #[command(flatten)]
        common: InstanceArg,
        #[arg(long, default_value = "1/2")]
        alpha: String,
    },
    /// Common-fixed-point family metric with a prescribed factor.
    Wong {
        #[command(flatten)]
        common: InstanceArg,
        #[arg(long, default_value = "1/2")]
        alpha: String,
    },
    /// Unbounded extension from a forward-invariant core.
    Unbounded {
        #[command(flatten)]
        common: InstanceArg,
        /// The core, as a JSON array of point indices, e.g. "[0,1]".
        #[arg(long)]
        x1: String,
        /// Escape factor in (0,1).
        #[arg(long, default_value = "1/2")]
        a: String,
        /// Pipeline bound for the core metric.
        #[arg(long = "M", default_value = "1")]
        m: String,
    },
    /// Run every property suite; exit 0 iff all checks pass.
    Verify {
        #[command(flatten)]
        common: InstanceArg,
        /// Word-enumeration depth for the cylinder suites.
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Chaos-game SVG for an affine2d instance; deterministic per seed.
    Render {
        #[command(flatten)]
        common: InstanceArg,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Overlay the depth-N cylinder polygons.
        #[arg(long)]
        cylinders: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("remetrika: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::Validation(_) | Error::Resource(_) => EXIT_INPUT,
        Error::NoAttractor { .. } | Error::Precondition(_) => EXIT_GATE,
        Error::Verification(_) => EXIT_VERIFY,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Check(common) => cmd_check(&common),
        Command::Attractor(common) => cmd_attractor(&common),
        Command::Metric {
            common,
            mu,
            depth,
            format,
        } => cmd_metric(&common, &mu, depth, &format),
        Command::Remetrize {
            common,
            m,
            phi_csv,
            single,
            alpha,
        } => cmd_remetrize(&common, &m, phi_csv.as_deref(), single, &alpha),
        Command::Bessaga { common, alpha } => cmd_bessaga(&common, &alpha),
        Command::Wong { common, alpha } => cmd_wong(&common, &alpha),
        Command::Unbounded { common, x1, a, m } => cmd_unbounded(&common, &x1, &a, &m),
        Command::Verify { common, depth } => cmd_verify(&common, depth),
        Command::Render {
            common,
            samples,
            seed,
            cylinders,
        } => cmd_render(&common, samples, seed, cylinders),
    }
}

fn state_cap() -> usize {
    std::env::var("REMETRIKA_STATE_CAP")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_STATE_CAP)
}

fn load_instance(arg: &InstanceArg) -> Result<Instance, Error> {
    if let Some(inst) = fixture(&arg.instance) {
        return Ok(Instance::Finite(inst));
    }
    let text = std::fs::read_to_string(&arg.instance).map_err(|e| Error::Parse {
        path: arg.instance.clone(),
        message: format!("cannot read instance ({e}); not a fixture name either"),
    })?;
    parse_instance(&text)
}

fn load_finite_automaton(arg: &InstanceArg) -> Result<(Instance, MonoidAutomaton), Error> {
    let instance = load_instance(arg)?;
    let aut = build_automaton(instance.as_finite()?, state_cap())?;
    Ok((instance, aut))
}

fn emit(arg: &InstanceArg, text: &str) -> Result<(), Error> {
    match &arg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn emit_json(arg: &InstanceArg, value: &Value) -> Result<(), Error> {
    emit(
        arg,
        &serde_json::to_string_pretty(value).expect("JSON serializes"),
    )
}

fn matrix_json(m: &MetricMatrix, float: bool) -> Value {
    if !float {
        return m.to_json();
    }
    json!({
        "exact": m.to_json(),
        "float": (0..m.size()).map(|x| {
            (0..m.size()).map(|y| rat_to_f64(m.get(x, y))).collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
    })
}

fn certificate_json(aut: &MonoidAutomaton) -> Result<(bool, Value), Error> {
    let cert = aut.attractor_certificate();
    let mut out = Map::new();
    match &cert.condition_a {
        ConditionA::Holds => {
            out.insert("condition_a".into(), Value::Bool(true));
            out.insert("condition_b".into(), json!("derived-from-a"));
        }
        ConditionA::Violated { lasso } => {
            out.insert("condition_a".into(), json!({ "lasso": lasso.to_string() }));
        }
    }
    out.insert("has_attractor".into(), Value::Bool(cert.has_attractor));
    if cert.has_attractor {
        let info = aut.attractor_info()?;
        out.insert("attractor".into(), json!(info.attractor));
        let n: Map<String, Value> = info
            .n_table
            .iter()
            .enumerate()
            .map(|(x, v)| (x.to_string(), v.map_or_else(|| json!("inf"), |n| json!(n))))
            .collect();
        out.insert("n".into(), Value::Object(n));
        let addresses: Map<String, Value> = info
            .addresses
            .iter()
            .map(|(p, w)| (p.to_string(), json!(w.to_string())))
            .collect();
        out.insert("addresses".into(), Value::Object(addresses));
        out.insert(
            "separation_spot_checks".into(),
            json!(cert
                .spot_checks
                .iter()
                .map(|(a, b, n0)| json!({"alpha": a.to_string(), "beta": b.to_string(), "n0": n0}))
                .collect::<Vec<_>>()),
        );
    }
    Ok((cert.has_attractor, Value::Object(out)))
}

fn cmd_check(arg: &InstanceArg) -> Result<u8, Error> {
    let (_, aut) = load_finite_automaton(arg)?;
    let (ok, value) = certificate_json(&aut)?;
    emit_json(arg, &value)?;
    Ok(if ok { 0 } else { EXIT_GATE })
}

fn cmd_attractor(arg: &InstanceArg) -> Result<u8, Error> {
    let (_, aut) = load_finite_automaton(arg)?;
    aut.require_attractor()?;
    let (_, value) = certificate_json(&aut)?;
    emit_json(arg, &value)?;
    Ok(0)
}

fn cmd_metric(
    arg: &InstanceArg,
    mu_spec: &str,
    depth: Option<usize>,
    format: &str,
) -> Result<u8, Error> {
    let (_, aut) = load_finite_automaton(arg)?;
    let mu = parse_mu_spec(mu_spec)?.resolve()?;
    let matrix = match depth {
        Some(n) => dmu_truncated(&aut, &mu, n)?,
        None => dmu_exact(&aut, &mu)?,
    };
    match format {
        "csv" => emit(arg, matrix.to_csv().trim_end())?,
        _ => emit_json(
            arg,
            &json!({ "mu": mu.to_json(), "d": matrix_json(&matrix, arg.float) }),
        )?,
    }
    Ok(0)
}

fn suite_json(report: &SuiteReport) -> Value {
    json!({ "name": report.name, "checks": report.to_json(), "pass": report.all_pass() })
}

fn cmd_remetrize(
    arg: &InstanceArg,
    m: &str,
    phi_csv: Option<&std::path::Path>,
    single: bool,
    alpha: &str,
) -> Result<u8, Error> {
    let (instance, aut) = load_finite_automaton(arg)?;
    let m: Rat = parse_rat(m)?;
    let cert = remetrize(&aut, &m, &ScaleSequence)?;
    let mut value = cert.to_json();
    if arg.float {
        let obj = value.as_object_mut().expect("certificate is an object");
        obj.insert(
            "d_float".into(),
            matrix_json(&cert.d, true)["float"].clone(),
        );
    }
    if single {
        let alpha: Rat = parse_rat(alpha)?;
        let d = bessaga_metric(instance.as_finite()?, &alpha)?;
        let obj = value.as_object_mut().expect("certificate is an object");
        obj.insert(
            "bessaga".into(),
            json!({ "alpha": rat_to_string(&alpha), "d": matrix_json(&d, arg.float) }),
        );
    }
    if let Some(path) = phi_csv {
        std::fs::write(path, cert.phi_csv())
            .map_err(|e| Error::Validation(format!("cannot write {}: {e}", path.display())))?;
    }
    emit_json(arg, &value)?;
    Ok(if cert.checks.all_pass() {
        0
    } else {
        EXIT_VERIFY
    })
}

fn cmd_bessaga(arg: &InstanceArg, alpha: &str) -> Result<u8, Error> {
    let instance = load_instance(arg)?;
    let alpha: Rat = parse_rat(alpha)?;
    let d = bessaga_metric(instance.as_finite()?, &alpha)?;
    emit_json(
        arg,
        &json!({ "alpha": rat_to_string(&alpha), "d": matrix_json(&d, arg.float) }),
    )?;
    Ok(0)
}

fn cmd_wong(arg: &InstanceArg, alpha: &str) -> Result<u8, Error> {
    let instance = load_instance(arg)?;
    let alpha: Rat = parse_rat(alpha)?;
    let d = wong_metric(instance.as_finite()?, &alpha)?;
    emit_json(
        arg,
        &json!({ "alpha": rat_to_string(&alpha), "d": matrix_json(&d, arg.float) }),
    )?;
    Ok(0)
}

fn cmd_unbounded(arg: &InstanceArg, x1: &str, a: &str, m: &str) -> Result<u8, Error> {
    let instance = load_instance(arg)?;
    let core: Vec<usize> = serde_json::from_str(x1).map_err(|e| Error::Parse {
        path: "--x1".into(),
        message: format!("expected a JSON array of indices: {e}"),
    })?;
    let a: Rat = parse_rat(a)?;
    let m: Rat = parse_rat(m)?;
    let cert = unbounded_metric(instance.as_finite()?, &core, &a, &m)?;
    let levels: Vec<Value> = cert
        .levels
        .levels
        .iter()
        .map(|l| match l {
            remetrika::converse::Level::Inside => json!("inside"),
            remetrika::converse::Level::Steps(q) => json!(q),
        })
        .collect();
    let value = json!({
        "core": cert.core,
        "levels": levels,
        "M": rat_to_string(&cert.m_bound),
        "a": rat_to_string(&a),
        "D": matrix_json(&cert.d, arg.float),
        "psi": cert.psi.to_json(),
        "phi": cert.inner.phi.to_json(),
        "checks": suite_json(&cert.checks),
    });
    emit_json(arg, &value)?;
    Ok(if cert.checks.all_pass() {
        0
    } else {
        EXIT_VERIFY
    })
}

fn cmd_verify(arg: &InstanceArg, depth: usize) -> Result<u8, Error> {
    let (instance, aut) = load_finite_automaton(arg)?;
    aut.require_attractor()?;
    let inst = instance.as_finite()?;
    let mut suites: Vec<SuiteReport> = vec![
        ScaleSequence.axioms_report(64),
        limit_set_suite(&aut, depth)?,
        extended_cylinder_suite(&aut, depth)?,
    ];
    let mus = [
        ("constant:1", WeightSequence::constant(parse_rat("1")?)?),
        (
            "geometric:1/2",
            WeightSequence::geometric(parse_rat("1/2")?)?,
        ),
        (
            "geometric:9/10",
            WeightSequence::geometric(parse_rat("9/10")?)?,
        ),
    ];
    for (label, mu) in &mus {
        let mut suite = semi_metric_suite(&aut, mu)?;
        suite.name = format!("{} [{label}]", suite.name);
        suites.push(suite);
    }
    let mut suite = truncation_suite(&aut, &mus[1].1, depth.max(2))?;
    suite.name = format!("{} [geometric:1/2]", suite.name);
    suites.push(suite);

    // Escape-depth discreteness bound under each weight sequence.
    let attractor = aut.attractor_info()?.attractor.clone();
    let mut discrete = SuiteReport::new("discreteness-bound");
    for (label, mu) in &mus {
        let d = dmu_exact(&aut, mu)?;
        let mut bad = None;
        for x in 0..inst.points {
            if attractor.contains(&x) {
                continue;
            }
            let bound = mu.value_at(aut.m_of_point(x).expect("finite off the attractor"));
            for y in 0..inst.points {
                if y != x && d.get(x, y) < &bound {
                    bad.get_or_insert(format!("x = {x}, y = {y} under {label}"));
                }
            }
        }
        discrete.check(
            &format!("nearest-neighbor-bound [{label}]"),
            bad.is_none(),
            || bad.clone().unwrap(),
        );
    }
    suites.push(discrete);

    // Converse checks where the shape admits them.
    if inst.map_count() == 1 {
        let mut suite = SuiteReport::new("bessaga");
        let ok = bessaga_metric(inst, &parse_rat("1/2")?);
        suite.check("alpha-contraction [1/2]", ok.is_ok(), || {
            format!("{:?}", ok.as_ref().err())
        });
        suites.push(suite);
    }
    if (0..inst.points).any(|x| inst.maps.iter().all(|t| t[x] == x)) {
        let mut suite = SuiteReport::new("wong");
        for alpha in ["1/2", "9/10"] {
            let ok = wong_metric(inst, &parse_rat(alpha)?);
            suite.check(&format!("alpha-contraction [{alpha}]"), ok.is_ok(), || {
                format!("{:?}", ok.as_ref().err())
            });
        }
        suites.push(suite);
    }

    let all_pass = suites.iter().all(|s| s.all_pass());
    let value = json!({
        "instance": inst.name,
        "depth": depth,
        "suites": suites.iter().map(suite_json).collect::<Vec<_>>(),
        "all_pass": all_pass,
    });
    emit_json(arg, &value)?;
    Ok(if all_pass { 0 } else { EXIT_VERIFY })
}

fn cmd_render(
    arg: &InstanceArg,
    samples: usize,
    seed: u64,
    cylinders: Option<usize>,
) -> Result<u8, Error> {
    let instance = load_instance(arg)?;
    let affine = match &instance {
        Instance::Affine2d(a) => a,
        Instance::Finite(_) => {
            return Err(Error::Validation(
                "render needs an affine2d instance; use `verify` for finite ones".into(),
            ))
        }
    };
    let svg = render_svg(
        affine,
        &RenderOptions {
            samples,
            seed,
            cylinders,
        },
    );
    emit(arg, &svg)?;
    Ok(0)
}
