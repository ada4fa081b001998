//! Command-line surface: exact predicate checks, enumerations, the
//! obstruction report, level-set sampling, per-datum certification, the
//! octonion calibration, and the consolidated suite.
//!
//! Exit status: 0 when every requested check passed, 1 when a predicate or
//! certificate reported a finding, 2 on usage errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use triquot::algebra::MultiplicationConvention;
use triquot::levelset::{sample_level_set, LevelSetSpec};
use triquot::suite::{run_suite, SuiteConfig};
use triquot::verify::{verify_quad, verify_theta, verify_triple, SamplingOptions, VerificationReport};
use triquot::weights::{
    admissibility_verdict, box_determinants, enumerate_admissible_triples, enumerate_free_quads,
    minor_determinants, quad_verdict, singular_group_orders, theta_locally_free,
    theta_smoothness_obstruction, verify_box_identity, WeightMatrix, WeightQuad, WeightTriple,
};

const CONVENTION_ENV: &str = "TRIQUOT_CONVENTION";
const CONVENTION_DEFAULT: &str = "octonion-convention.json";

#[derive(Parser)]
#[command(
    name = "triquot",
    version,
    about = "Moment-map level sets, weight admissibility, and quotient certificates"
)]
struct Cli {
    /// Worker threads for sampling (0 = all available). Results do not
    /// depend on the thread count.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Triple,
    Quad,
    Theta,
}

#[derive(Subcommand)]
enum Command {
    /// Exact predicate checks for one weight datum.
    Check {
        #[command(subcommand)]
        what: CheckTarget,
    },
    /// Enumerate admissible triples or free quadruples up to a bound.
    Enumerate {
        #[command(subcommand)]
        what: EnumerateTarget,
    },
    /// Exact obstruction reports.
    Obstruction {
        #[command(subcommand)]
        what: ObstructionTarget,
    },
    /// Sample a level set and write the certified points to a JSON file.
    Sample(SampleArgs),
    /// Run the verification pipeline for one weight datum.
    Certify(CertifyArgs),
    /// Search the octonion sign conventions and freeze the result.
    CalibrateOctonions {
        /// Output path for the frozen convention.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run the consolidated check suite.
    Suite {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        bound: i64,
        /// Integer-arithmetic checks only.
        #[arg(long)]
        exact_only: bool,
        /// Skip the 1-vs-8-thread determinism self-check.
        #[arg(long)]
        no_self_check: bool,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CheckTarget {
    /// A weight triple, e.g. `1,2,3`.
    Triple {
        datum: String,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// A weight quadruple, e.g. `0,1,2,3`.
    Quad {
        datum: String,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// A 2x3 weight matrix, e.g. `1,0,1;0,1,1`.
    Theta {
        datum: String,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum EnumerateTarget {
    /// Admissible triples with largest entry up to the bound.
    Triples {
        #[arg(long)]
        bound: i64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Free quadruples with largest entry up to the bound.
    Quads {
        #[arg(long)]
        bound: i64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum ObstructionTarget {
    /// The eight-assignment box-determinant enumeration.
    Theta {
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Weight datum: `a,b,c`, `a,b,c,d`, or `p1,p2,p3;q1,q2,q3`.
    #[arg(long)]
    weights: String,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output JSON file of certified points.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Weight datum: `a,b,c`, `a,b,c,d`, or `p1,p2,p3;q1,q2,q3`.
    #[arg(long)]
    weights: String,
    /// Force the numerical pipeline even when the exact verdict is
    /// negative (rank deficiencies become findings).
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the full JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) =
            rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()
        {
            eprintln!("error: cannot configure {} threads: {e}", cli.threads);
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Check { what } => check(what),
        Command::Enumerate { what } => enumerate(what),
        Command::Obstruction { what } => obstruction(what),
        Command::Sample(args) => sample(args),
        Command::Certify(args) => certify(args),
        Command::CalibrateOctonions { out, samples, seed } => calibrate(&out, samples, seed),
        Command::Suite { seed, bound, exact_only, no_self_check, out } => {
            suite(seed, bound, exact_only, !no_self_check, out.as_deref())
        }
    }
}

fn parse_triple(s: &str) -> Result<WeightTriple> {
    s.parse::<WeightTriple>().map_err(Into::into)
}

fn parse_quad(s: &str) -> Result<WeightQuad> {
    s.parse::<WeightQuad>().map_err(Into::into)
}

fn parse_theta(s: &str) -> Result<WeightMatrix> {
    s.parse::<WeightMatrix>().map_err(Into::into)
}

fn check(target: CheckTarget) -> Result<bool> {
    match target {
        CheckTarget::Triple { datum, format } => {
            let p = parse_triple(&datum)?;
            let verdict = admissibility_verdict(p);
            let positive = verdict.is_admissible();
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "family": "triple",
                        "weights": p.to_string(),
                        "admissible": positive,
                        "reason": verdict.to_string(),
                    }))?
                ),
                _ => {
                    if positive {
                        println!("admissible: true");
                    } else {
                        println!("admissible: false ({verdict})");
                    }
                }
            }
            Ok(positive)
        }
        CheckTarget::Quad { datum, format } => {
            let p = parse_quad(&datum)?;
            let verdict = quad_verdict(p);
            let positive = verdict.is_free();
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "family": "quad",
                        "weights": p.to_string(),
                        "free": positive,
                        "reason": verdict.to_string(),
                    }))?
                ),
                _ => {
                    if positive {
                        println!("free: true");
                    } else {
                        println!("free: false ({verdict})");
                    }
                }
            }
            Ok(positive)
        }
        CheckTarget::Theta { datum, format } => {
            let m = parse_theta(&datum)?;
            let verdict = theta_locally_free(m);
            let positive = verdict.is_locally_free();
            let minors = minor_determinants(m);
            let boxes = box_determinants(m);
            let identity = verify_box_identity(m);
            let orders = singular_group_orders(m).ok();
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "family": "theta",
                        "weights": m.to_string(),
                        "minors": [minors.d12, minors.d13, minors.d23],
                        "boxes": boxes.as_array(),
                        "box_identity": identity,
                        "locally_free": positive,
                        "reason": verdict.to_string(),
                        "singular_orders": orders,
                    }))?
                ),
                _ => {
                    println!("minors: {},{},{}", minors.d12, minors.d13, minors.d23);
                    println!("locally free: {positive}");
                    if !positive {
                        println!("reason: {verdict}");
                    }
                    let b = boxes.as_array();
                    println!("boxes[--,+-,-+,++]: {},{},{},{}", b[0], b[1], b[2], b[3]);
                    if let Some(o) = orders {
                        println!("singular orders: {},{},{},{}", o[0], o[1], o[2], o[3]);
                    }
                }
            }
            Ok(positive && identity)
        }
    }
}

fn write_or_print(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?;
        }
        None => println!("{body}"),
    }
    Ok(())
}

fn enumerate(target: EnumerateTarget) -> Result<bool> {
    match target {
        EnumerateTarget::Triples { bound, out, format } => {
            let items = enumerate_admissible_triples(bound);
            let body = match format {
                Format::Csv => {
                    let mut s = format!("predicate=admissible_triple,bound={bound}\n");
                    for t in &items {
                        s.push_str(&format!("{t}\n"));
                    }
                    s
                }
                Format::Json => serde_json::to_string_pretty(&serde_json::json!({
                    "predicate": "admissible_triple",
                    "bound": bound,
                    "triples": items.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                }))?,
                Format::Human => {
                    let mut s = format!("{} admissible triples with p3 <= {bound}\n", items.len());
                    for t in &items {
                        s.push_str(&format!("{t}\n"));
                    }
                    s
                }
            };
            write_or_print(out.as_deref(), body.trim_end())?;
            Ok(true)
        }
        EnumerateTarget::Quads { bound, out, format } => {
            let items = enumerate_free_quads(bound);
            let body = match format {
                Format::Csv => {
                    let mut s = format!("predicate=free_quadruple,bound={bound}\n");
                    for t in &items {
                        s.push_str(&format!("{t}\n"));
                    }
                    s
                }
                Format::Json => serde_json::to_string_pretty(&serde_json::json!({
                    "predicate": "free_quadruple",
                    "bound": bound,
                    "quads": items.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                }))?,
                Format::Human => {
                    let mut s = format!("{} free quadruples with p4 <= {bound}\n", items.len());
                    for t in &items {
                        s.push_str(&format!("{t}\n"));
                    }
                    s
                }
            };
            write_or_print(out.as_deref(), body.trim_end())?;
            Ok(true)
        }
    }
}

fn obstruction(target: ObstructionTarget) -> Result<bool> {
    let ObstructionTarget::Theta { format } = target;
    let rep = theta_smoothness_obstruction();
    let pass = rep.every_assignment_has_pm3 && rep.no_assignment_all_unit;
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rep)?),
        _ => {
            println!("sign assignments of (d12, d23, d13) and the boxes they force:");
            for row in &rep.rows {
                println!(
                    "  ({:+},{:+},{:+}) -> boxes [{},{},{},{}], magnitude-3 count {}",
                    row.assignment[0],
                    row.assignment[1],
                    row.assignment[2],
                    row.boxes[0],
                    row.boxes[1],
                    row.boxes[2],
                    row.boxes[3],
                    row.boxes_pm3
                );
            }
            println!("every assignment has a magnitude-3 box: {}", rep.every_assignment_has_pm3);
            println!("no assignment has all boxes of magnitude 1: {}", rep.no_assignment_all_unit);
            println!("{}", rep.multiplicity_note);
        }
    }
    Ok(pass)
}

fn spec_for(family: FamilyArg, weights: &str) -> Result<LevelSetSpec> {
    Ok(match family {
        FamilyArg::Triple => LevelSetSpec::triple(parse_triple(weights)?),
        FamilyArg::Quad => LevelSetSpec::quad(parse_quad(weights)?),
        FamilyArg::Theta => LevelSetSpec::theta(parse_theta(weights)?),
    })
}

/// On-disk record for one certified sample point.
#[derive(serde::Serialize, serde::Deserialize)]
struct SampleRecord {
    seed: u64,
    u: Vec<f64>,
    residual: f64,
    jacobian_rank: usize,
    killing_rank: usize,
    min_sv_constraints: f64,
    min_sv_killing: f64,
}

fn sample(args: SampleArgs) -> Result<bool> {
    let spec = spec_for(args.family, &args.weights)?;
    let batch = sample_level_set(&spec, args.count, args.seed)
        .map_err(|e| anyhow::anyhow!("sampling failed: {e}"))?;
    let records: Vec<SampleRecord> = batch
        .points
        .iter()
        .map(|p| SampleRecord {
            seed: p.seed,
            u: p.u.to_flat(),
            residual: p.residual,
            jacobian_rank: p.jacobian_rank,
            killing_rank: p.killing_rank,
            min_sv_constraints: p.min_sv_constraints,
            min_sv_killing: p.min_sv_killing,
        })
        .collect();
    let body = serde_json::to_string_pretty(&records)?;
    std::fs::write(&args.out, body).with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!(
        "wrote {} points ({} attempted, seed {}) to {}",
        records.len(),
        batch.attempted,
        args.seed,
        args.out.display()
    );
    Ok(records.len() == batch.attempted)
}

fn load_convention() -> Result<MultiplicationConvention> {
    let path = match std::env::var_os(CONVENTION_ENV) {
        Some(p) => Some(PathBuf::from(p)),
        None => {
            let default = PathBuf::from(CONVENTION_DEFAULT);
            default.exists().then_some(default)
        }
    };
    match path {
        Some(p) => {
            let body = std::fs::read_to_string(&p)
                .with_context(|| format!("reading convention file {}", p.display()))?;
            let rec = serde_json::from_str(&body)
                .with_context(|| format!("parsing convention file {}", p.display()))?;
            MultiplicationConvention::from_file_record(&rec)
                .with_context(|| format!("validating convention file {}", p.display()))
        }
        None => Ok(MultiplicationConvention::calibrated()),
    }
}

fn human_report(rep: &VerificationReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("family: {}\nweights: {}\n", rep.family, rep.weights));
    s.push_str(&format!("verdict: {}\n", rep.exact.verdict));
    if let Some(m) = &rep.exact.minors {
        s.push_str(&format!("minors: {},{},{}\n", m.d12, m.d13, m.d23));
    }
    if let Some(b) = &rep.exact.boxes {
        let a = b.as_array();
        s.push_str(&format!("boxes[--,+-,-+,++]: {},{},{},{}\n", a[0], a[1], a[2], a[3]));
    }
    if let Some(o) = &rep.exact.singular_orders {
        s.push_str(&format!("singular orders: {},{},{},{}\n", o[0], o[1], o[2], o[3]));
    }
    let d = &rep.exact.dimension;
    s.push_str(&format!(
        "dimensions: sphere {} -> level set {} -> quotient {}\n",
        d.ambient_sphere_dim, d.expected_level_set_dim, d.expected_quotient_dim
    ));
    if let Some(n) = &rep.numerical {
        if n.attempted > 0 {
            s.push_str(&format!(
                "samples: {}/{} converged, max residual {:.3e}\n",
                n.converged, n.attempted, n.max_residual
            ));
            s.push_str(&format!(
                "constraint rank: expected {}, pass {}, min margin {:.3e}\n",
                n.smoothness.expected_rank, n.smoothness.pass, n.smoothness.min_margin
            ));
            s.push_str(&format!(
                "killing rank: expected {}, pass {}, min margin {:.3e}\n",
                n.freeness.expected_rank, n.freeness.pass, n.freeness.min_margin
            ));
        }
        if let Some(v) = &n.vertex_scan {
            s.push_str(&format!(
                "vertex scan: {} feasible / {} patterns, pass {}\n",
                v.feasible_patterns.len(),
                v.outcomes.len(),
                v.pass
            ));
        }
        if let Some(st) = &n.stratum {
            s.push_str(&format!(
                "singular stratum: residual {:.3e}, killing rank {}, label {}\n",
                st.residual, st.killing_rank, st.label
            ));
        }
        if let Some(c) = &n.coassociativity {
            s.push_str(&format!(
                "calibration: raw |phi| in [{:.6}, {:.6}] (all unit: {}), circle-aligned min {:.9} (all unit: {})\n",
                c.raw_min, c.raw_max, c.raw_all_unit, c.aligned_min, c.aligned_all_unit
            ));
        }
        for w in &n.witnesses {
            s.push_str(&format!(
                "isotropy witness: order {}, residual {:.3e}, fix error {:.3e}\n",
                w.order, w.residual, w.fix_error
            ));
        }
    }
    for note in &rep.notes {
        s.push_str(&format!("note: {note}\n"));
    }
    s.push_str(&format!("pass: {}\n", rep.pass));
    s
}

fn certify(args: CertifyArgs) -> Result<bool> {
    let opts = SamplingOptions {
        count: args.count,
        seed: args.seed,
        force_sampling: args.full,
        exact_only: false,
    };
    let rep = match args.family {
        FamilyArg::Triple => {
            let conv = load_convention()?;
            verify_triple(parse_triple(&args.weights)?, &opts, &conv)
        }
        FamilyArg::Quad => verify_quad(parse_quad(&args.weights)?, &opts),
        FamilyArg::Theta => verify_theta(parse_theta(&args.weights)?, &opts),
    };
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&rep)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rep)?),
        _ => print!("{}", human_report(&rep)),
    }
    Ok(rep.pass)
}

fn calibrate(out: &Path, samples: usize, seed: u64) -> Result<bool> {
    let conv = MultiplicationConvention::calibrate(samples, seed)
        .map_err(|e| anyhow::anyhow!("calibration aborted: {e}"))?;
    let rec = conv.to_file_record();
    std::fs::write(out, serde_json::to_string_pretty(&rec)?)
        .with_context(|| format!("writing {}", out.display()))?;
    eprintln!(
        "frozen convention written to {} (pairing axis {}, cross coefficient {})",
        out.display(),
        rec.pairing_axis,
        rec.cross_coefficient
    );
    Ok(true)
}

fn suite(
    seed: u64,
    bound: i64,
    exact_only: bool,
    self_check: bool,
    out: Option<&Path>,
) -> Result<bool> {
    let cfg = SuiteConfig { seed, bound, exact_only, self_check, rank_rel_threshold: None };
    let rep = run_suite(&cfg);
    for c in &rep.criteria {
        eprintln!(
            "check {:2} {:<32} {}",
            c.id,
            c.name,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let body = rep.to_json_pretty();
    match out {
        Some(p) => {
            std::fs::write(p, &body).with_context(|| format!("writing {}", p.display()))?;
            eprintln!("report written to {}", p.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.write_all(b"\n")?;
        }
    }
    Ok(rep.pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use triquot::momentmaps::{constraint_residual, QuaternionVector};

    #[test]
    fn sample_records_roundtrip() {
        let spec = LevelSetSpec::triple(WeightTriple(1, 2, 3));
        let batch = sample_level_set(&spec, 5, 42).unwrap();
        let records: Vec<SampleRecord> = batch
            .points
            .iter()
            .map(|p| SampleRecord {
                seed: p.seed,
                u: p.u.to_flat(),
                residual: p.residual,
                jacobian_rank: p.jacobian_rank,
                killing_rank: p.killing_rank,
                min_sv_constraints: p.min_sv_constraints,
                min_sv_killing: p.min_sv_killing,
            })
            .collect();
        let body = serde_json::to_string(&records).unwrap();
        let back: Vec<SampleRecord> = serde_json::from_str(&body).unwrap();
        for rec in &back {
            let u = QuaternionVector::from_flat(&rec.u).unwrap();
            let r = constraint_residual(&u, &spec).unwrap().norm();
            assert!((r - rec.residual).abs() <= 1e-14);
        }
    }
}
