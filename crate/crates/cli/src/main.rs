use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use assocvar::algebra::FpAlgebra;
use assocvar::exec::Exec;
use assocvar::field::{Field, Scalar};
use assocvar::geodesic::{integrate_geodesic, RealChart};
use assocvar::linalg::Matrix;
use assocvar::localrep::{local_ring, parse_module_file, product_local_rings};
use assocvar::metric::{
    check_tensor_field, euclidean_metric, is_riemannian_with, metric_at, tangent_space_at,
    tensor_field_of, tensor_square, RiemannCheck, TensorFieldCheck,
};
use assocvar::phase::{fiber_over, phase_space};
use assocvar::points::{basic_open, enumerate_points_with, section_space, Point, PointSet};
use assocvar::rewrite::{member_in, Membership};
use assocvar::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const SCHEMA: &str = "assocvar/1";

#[derive(Parser)]
#[command(name = "assocvar", version, about = "Finitely presented algebras, their points, phase spaces and geodesics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// Override the truncation bound of the presentation.
    #[arg(long, global = true)]
    bound: Option<usize>,
    /// Worker threads for point enumeration and sampling; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a presentation and report its rewrite system.
    Parse { file: PathBuf },
    /// Normal form of a polynomial.
    Nf {
        #[arg(long)]
        poly: String,
        file: PathBuf,
    },
    /// Ideal membership of a polynomial.
    Member {
        #[arg(long)]
        poly: String,
        file: PathBuf,
    },
    /// All points over a prime field.
    Points { file: PathBuf },
    /// The basic open set where a polynomial does not vanish.
    Open {
        #[arg(long)]
        poly: String,
        file: PathBuf,
    },
    /// Sections over the basic open set of `--poly` (all points without it).
    Sections {
        #[arg(long)]
        poly: Option<String>,
        file: PathBuf,
    },
    /// Local function ring of a module file; several modules give the product.
    Localring { file: PathBuf },
    /// Presentation of the phase space.
    Ph { file: PathBuf },
    /// Tangent space at a point.
    Tangent {
        #[arg(long)]
        point: String,
        file: PathBuf,
    },
    /// Gram matrix of the Euclidean metric on the tangent space at a point.
    MetricAt {
        #[arg(long)]
        point: String,
        /// Orthonormalize the tangent basis first when the field allows it.
        #[arg(long)]
        orthonormal: bool,
        file: PathBuf,
    },
    /// Check the Euclidean metric on sampled points.
    Riemannian {
        /// Sample point; repeatable. Without it all points over a prime field are used.
        #[arg(long)]
        point: Vec<String>,
        /// Draw this many of the enumerated points with `--seed`.
        #[arg(long)]
        samples: Option<usize>,
        file: PathBuf,
    },
    /// Points of the phase space lying over a point.
    Fiber {
        #[arg(long)]
        point: String,
        file: PathBuf,
    },
    /// Tensor square presentation and the Euclidean tensor field.
    Tensor {
        #[arg(long)]
        point: Vec<String>,
        file: PathBuf,
    },
    /// Integrate a geodesic and write the trace as CSV.
    Geodesic {
        #[arg(long)]
        point: String,
        #[arg(long)]
        velocity: String,
        #[arg(long)]
        length: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Keep every n-th sample; the last sample is always written.
        #[arg(long, default_value_t = 1)]
        every: usize,
        /// Write the diagnostics JSON here instead of stderr.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
        file: PathBuf,
    },
}

enum Failure {
    Domain(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.opts.jobs {
        std::env::set_var("RAYON_NUM_THREADS", n.max(1).to_string());
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, message, witness) = match f {
                Failure::Domain(e) => (error_code(&e), e.to_string(), error_witness(&e)),
                Failure::Io(m) => ("io", m, None),
            };
            let mut doc = json!({"schema": SCHEMA, "error": {"code": code, "message": message}});
            if let Some(w) = witness {
                doc["error"]["witness"] = w;
            }
            print_out(&serde_json::to_string_pretty(&doc).unwrap());
            ExitCode::from(1)
        }
    }
}

fn error_code(e: &Error) -> &'static str {
    match e {
        Error::Syntax { .. } => "syntax",
        Error::UnknownGenerator { .. } => "unknown_generator",
        Error::DuplicateGenerator(_) => "duplicate_generator",
        Error::NonPrimeModulus(_) => "non_prime_modulus",
        Error::BoundTooSmall { .. } => "bound_too_small",
        Error::Mismatch(_) => "mismatch",
        Error::ArityMismatch { .. } => "arity_mismatch",
        Error::Truncation { .. } => "truncation",
        Error::UnsupportedField { .. } => "unsupported_field",
        Error::SearchSpace { .. } => "search_space",
        Error::EmptyOpenSet => "empty_open_set",
        Error::NotAPoint { .. } => "not_a_point",
        Error::InvalidHom { .. } => "invalid_hom",
        Error::InvalidDerivation { .. } => "invalid_derivation",
        Error::NonHomogeneous { .. } => "non_homogeneous",
        Error::NameClash(_) => "name_clash",
        Error::Shape(_) => "shape",
        Error::ModuleTooLarge { .. } => "module_too_large",
        Error::IsomorphicModules(..) => "isomorphic_modules",
        Error::NotInvertible => "not_invertible",
        Error::RankDeficient(_) => "rank_deficient",
        Error::NonConvergence { .. } => "non_convergence",
        Error::InvalidStep(_) => "invalid_step",
        Error::Invalid(_) => "invalid",
    }
}

fn error_witness(e: &Error) -> Option<Value> {
    match e {
        Error::NotAPoint { relation, value } => Some(json!({"relation": relation, "value": value})),
        Error::InvalidHom { relation, witness } | Error::InvalidDerivation { relation, witness } => {
            Some(json!({"relation": relation, "normal_form": witness}))
        }
        Error::IsomorphicModules(i, j) => Some(json!([i, j])),
        Error::RankDeficient(x) => Some(json!(x)),
        _ => None,
    }
}

fn read(path: &Path) -> Run<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load(path: &Path, opts: &Opts) -> Run<Arc<FpAlgebra>> {
    let mut pres = assocvar::parse_presentation(&read(path)?)?;
    if let Some(b) = opts.bound {
        pres = pres.with_bound(b)?;
    }
    let a = FpAlgebra::new(pres);
    if let Some(c) = a.rewrite().caveat() {
        eprintln!("warning: {c}");
    }
    Ok(Arc::new(a))
}

fn exec(opts: &Opts) -> Exec {
    if opts.jobs == Some(1) {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn scalar(s: &Scalar) -> Value {
    match s {
        Scalar::Mod { value, .. } => json!(value),
        Scalar::Real(x) => json!(x),
        Scalar::Rat(_) => json!(s.to_string()),
    }
}

fn vector(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(scalar).collect())
}

fn matrix(m: &Matrix) -> Value {
    Value::Array(m.to_rows().iter().map(|r| vector(r)).collect())
}

fn text_vector(v: &[Scalar]) -> String {
    v.iter().map(Scalar::to_string).collect::<Vec<_>>().join(",")
}

fn text_matrix(m: &Matrix) -> String {
    m.to_rows().iter().map(|r| text_vector(r)).collect::<Vec<_>>().join("\n")
}

fn parse_point(text: &str, field: Field) -> Run<Point> {
    let values = text
        .split(',')
        .map(|s| {
            field
                .parse_scalar(s.trim())
                .ok_or_else(|| Error::Invalid(format!("`{}` is not an element of {field}", s.trim())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Point::new(values))
}

fn parse_reals(text: &str) -> Run<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Failure::Domain(Error::Invalid(format!("`{}` is not a number", s.trim())))))
        .collect()
}

fn emit(opts: &Opts, mut doc: Value, text: impl FnOnce() -> String) {
    let body = match opts.format {
        Format::Json => {
            let mut out = json!({"schema": SCHEMA});
            out.as_object_mut().unwrap().append(doc.as_object_mut().unwrap());
            serde_json::to_string_pretty(&out).unwrap()
        }
        Format::Text => text(),
    };
    print_out(&body);
}

/// Writes `body` with exactly one trailing newline; a closed pipe is not an error.
fn print_out(body: &str) {
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "{}", body.trim_end_matches('\n'));
}

fn point_set(set: &PointSet) -> Value {
    Value::Array(set.points().iter().map(|p| vector(p.values())).collect())
}

fn text_points(set: &PointSet) -> String {
    set.points().iter().map(|p| text_vector(p.values())).collect::<Vec<_>>().join("\n")
}

fn run(cli: &Cli) -> Run<()> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Parse { file } => {
            let a = load(file, opts)?;
            let rw = a.rewrite();
            let rules: Vec<String> = rw.rules().iter().map(|r| a.format(&r.as_poly(a.field()))).collect();
            let pres = a.presentation().to_string();
            emit(
                opts,
                json!({
                    "field": a.field().to_string(),
                    "gens": a.gens(),
                    "relations": a.rels().iter().map(|r| a.format(r)).collect::<Vec<_>>(),
                    "bound": rw.bound(),
                    "complete_up_to": rw.complete_up_to(),
                    "rules": rules,
                    "presentation": pres,
                }),
                || pres.clone(),
            );
        }
        Command::Nf { poly, file } => {
            let a = load(file, opts)?;
            let nf = a.format(&a.nf(&a.poly(poly)?)?);
            emit(opts, json!({"normal_form": nf}), || nf.clone());
        }
        Command::Member { poly, file } => {
            let a = load(file, opts)?;
            let doc = match member_in(&a.poly(poly)?, a.rewrite())? {
                Membership::Yes => json!({"member": true}),
                Membership::NoUpToBound { normal_form, caveat } => {
                    json!({"member": false, "normal_form": a.format(&normal_form), "caveat": caveat})
                }
            };
            let line = if doc["member"] == json!(true) { "yes".to_string() } else { format!("no: {}", doc["normal_form"].as_str().unwrap()) };
            emit(opts, doc, || line);
        }
        Command::Points { file } => {
            let a = load(file, opts)?;
            let pts = enumerate_points_with(&a, exec(opts))?;
            emit(opts, json!({"gens": a.gens(), "count": pts.len(), "points": point_set(&pts)}), || text_points(&pts));
        }
        Command::Open { poly, file } => {
            let a = load(file, opts)?;
            let pts = enumerate_points_with(&a, exec(opts))?;
            let open = basic_open(&a.poly(poly)?, &pts)?;
            emit(opts, json!({"gens": a.gens(), "count": open.len(), "points": point_set(&open)}), || text_points(&open));
        }
        Command::Sections { poly, file } => {
            let a = load(file, opts)?;
            let mut u = enumerate_points_with(&a, exec(opts))?;
            if let Some(f) = poly {
                u = basic_open(&a.poly(f)?, &u)?;
            }
            let s = section_space(&u)?;
            let basis: Vec<Value> = s.basis.iter().map(|t| vector(t)).collect();
            let dim = s.dim();
            emit(
                opts,
                json!({
                    "open_set": point_set(&s.open_set),
                    "dim": dim,
                    "basis": basis,
                    "contains_unit_inverses": s.contains_unit_inverses,
                }),
                || format!("dim {dim} over {} points", s.open_set.len()),
            );
        }
        Command::Localring { file } => {
            let (_, modules) = parse_module_file(&read(file)?)?;
            let ring = if modules.len() == 1 { local_ring(&modules[0])? } else { product_local_rings(&modules)? };
            let dim = ring.dim();
            emit(
                opts,
                json!({
                    "modules": modules.len(),
                    "blocks": ring.blocks(),
                    "dim": dim,
                    "adjoined_inverses": ring.adjoined_inverses.iter().map(matrix).collect::<Vec<_>>(),
                    "basis": ring.basis.iter().map(matrix).collect::<Vec<_>>(),
                }),
                || format!("dim {dim}"),
            );
        }
        Command::Ph { file } => {
            let a = load(file, opts)?;
            let ph = phase_space(&a)?;
            let text = ph.presentation().to_string();
            emit(
                opts,
                json!({"gens": ph.algebra().gens(), "presentation": text}),
                || text.clone(),
            );
        }
        Command::Tangent { point, file } => {
            let a = load(file, opts)?;
            let t = tangent_space_at(&a, &parse_point(point, a.field())?)?;
            emit(opts, json!({"dim": t.dim, "basis": matrix(&t.basis)}), || text_matrix(&t.basis));
        }
        Command::MetricAt { point, orthonormal, file } => {
            let a = load(file, opts)?;
            let mut t = tangent_space_at(&a, &parse_point(point, a.field())?)?;
            let mut normalized = false;
            if *orthonormal {
                if let Some(o) = t.orthonormalized() {
                    t = o;
                    normalized = true;
                } else {
                    eprintln!("warning: tangent basis has no orthonormalization over {}", a.field());
                }
            }
            let ip = metric_at(&euclidean_metric(&a)?, &t)?;
            emit(
                opts,
                json!({
                    "basis": matrix(&t.basis),
                    "orthonormal": normalized,
                    "gram": matrix(&ip.gram),
                    "positive_definite": ip.positive_definite,
                }),
                || text_matrix(&ip.gram),
            );
        }
        Command::Riemannian { point, samples, file } => {
            let a = load(file, opts)?;
            let sample = sample_points(&a, point, *samples, opts)?;
            let g = euclidean_metric(&a)?;
            let (doc, line) = match is_riemannian_with(&g, &sample, exec(opts))? {
                RiemannCheck::Yes { vacuous } => (json!({"riemannian": true, "vacuous": vacuous, "sampled": sample.len()}), "yes".to_string()),
                RiemannCheck::No { witness } => (
                    json!({"riemannian": false, "witness": vector(witness.values()), "sampled": sample.len()}),
                    format!("no at {}", text_vector(witness.values())),
                ),
            };
            emit(opts, doc, || line);
        }
        Command::Fiber { point, file } => {
            let a = load(file, opts)?;
            let p = parse_point(point, a.field())?;
            assocvar::points::check_point(&a, &p)?;
            let ph = phase_space(&a)?;
            let total: Vec<Vec<Scalar>> =
                enumerate_points_with(ph.algebra(), exec(opts))?.points().iter().map(|q| q.values().to_vec()).collect();
            let fiber = fiber_over(&total, p.values());
            let lines = fiber.iter().map(|v| text_vector(v)).collect::<Vec<_>>().join("\n");
            emit(
                opts,
                json!({"count": fiber.len(), "tangent_vectors": fiber.iter().map(|v| vector(v)).collect::<Vec<_>>()}),
                || lines,
            );
        }
        Command::Tensor { point, file } => {
            let a = load(file, opts)?;
            let ts = tensor_square(&a)?;
            let g = euclidean_metric(&a)?;
            let h = tensor_field_of(&g)?;
            let sample = sample_points(&a, point, None, opts)?;
            let check = match check_tensor_field(&h, &ts, &sample)? {
                TensorFieldCheck::Commutes => json!({"commutes": true}),
                TensorFieldCheck::Fails { point, generator } => {
                    json!({"commutes": false, "point": vector(point.values()), "generator": generator})
                }
            };
            let pres = ts.presentation().to_string();
            let metric = ts.algebra().format(g.g_of_t());
            emit(
                opts,
                json!({"presentation": pres, "metric": metric, "sampled": sample.len(), "check": check}),
                || format!("{pres}\n# g(t) = {metric}"),
            );
        }
        Command::Geodesic { point, velocity, length, step, every, diagnostics, file } => {
            let a = load(file, opts)?;
            let chart = RealChart::from_algebra(&a)?;
            let trace = integrate_geodesic(&chart, &parse_reals(point)?, &parse_reals(velocity)?, *length, *step)?;
            write_trace(&chart, &trace, (*every).max(1)).map_err(|e| Failure::Io(e.to_string()))?;
            let d = &trace.diagnostics;
            let doc = json!({
                "schema": SCHEMA,
                "steps": d.steps,
                "step": d.step,
                "max_constraint_drift": d.max_constraint_drift,
                "max_speed_drift": d.max_speed_drift,
                "renormalized": d.renormalized,
                "projection_tol": d.projection_tol,
                "end": trace.end().position,
            });
            let body = serde_json::to_string_pretty(&doc).unwrap();
            match diagnostics {
                Some(path) => fs::write(path, body + "\n").map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?,
                None => eprintln!("{body}"),
            }
        }
    }
    Ok(())
}

fn write_trace(chart: &RealChart, trace: &assocvar::geodesic::GeodesicTrace, every: usize) -> io::Result<()> {
    let mut out = BufWriter::new(io::stdout().lock());
    let mut header = vec!["s".to_string()];
    header.extend(chart.names().iter().cloned());
    header.extend(chart.names().iter().map(|n| format!("v{n}")));
    if let Err(e) = writeln!(out, "{}", header.join(",")) {
        return if e.kind() == io::ErrorKind::BrokenPipe { Ok(()) } else { Err(e) };
    }
    let last = trace.samples.len() - 1;
    for (i, s) in trace.samples.iter().enumerate() {
        if i % every != 0 && i != last {
            continue;
        }
        let mut row = vec![format!("{:.12e}", s.arclength)];
        row.extend(s.position.iter().chain(&s.velocity).map(|x| format!("{x:.12e}")));
        match writeln!(out, "{}", row.join(",")) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => return Ok(()),
            r => r?,
        }
    }
    match out.flush() {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

fn sample_points(a: &Arc<FpAlgebra>, given: &[String], samples: Option<usize>, opts: &Opts) -> Run<Vec<Point>> {
    if !given.is_empty() {
        return given.iter().map(|p| parse_point(p, a.field())).collect();
    }
    let mut all = enumerate_points_with(a, exec(opts))?.points().to_vec();
    if let Some(n) = samples {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        all.shuffle(&mut rng);
        all.truncate(n);
        all.sort();
    }
    Ok(all)
}
