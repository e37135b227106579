use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tspn_core::geom::{Point, PolytopeV, Tour};
use tspn_core::harness::{compare, emit_svg, run_ptas, HarnessError};
use tspn_core::instance::{parse_instance, random_instance, validate_instance, write_result, BaseSetMode, Instance, RunConfig};
use tspn_core::sparsify::sparsify_polytope;

#[derive(Parser)]
#[command(name = "tspn", version, about = "Tours visiting every hyperplane of an instance")]
struct Cli {
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the approximation scheme and print the result record.
    Solve(SolveArgs),
    /// Run the approximation scheme next to the box and local-search tours.
    Compare(SolveArgs),
    /// Sparsify a random polytope and report how many vertices survive.
    SparsifyDemo(DemoArgs),
    /// Write a random instance.
    Gen(GenArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (`-` reads stdin).
    instance: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Reject instances of any other dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// `axis`, `full`, or a file of normals.
    #[arg(long, default_value = "axis")]
    base_set: String,
    #[arg(long, default_value_t = 24)]
    order_cap: usize,
    #[arg(long, default_value_t = 24)]
    config_cap: usize,
    #[arg(long, default_value_t = 4096)]
    guess_cap: usize,
    /// Open path instead of a closed tour.
    #[arg(long)]
    path: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write a drawing of the instance and tours (d = 2).
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 60)]
    vertices: usize,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Number of hyperplanes.
    #[arg(long, short = 'n', default_value_t = 8)]
    count: usize,
    /// Largest absolute normal coefficient.
    #[arg(long, default_value_t = 5)]
    coeff: i64,
    /// Largest absolute offset.
    #[arg(long, default_value_t = 10)]
    offset: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes with their exit codes.
enum Failure {
    Parse(anyhow::Error),
    NoCandidate(anyhow::Error),
    Internal(anyhow::Error),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::NoCandidate(_) => 3,
            Failure::Internal(_) => 4,
            Failure::Other(_) => 1,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Parse(e) | Failure::NoCandidate(e) | Failure::Internal(e) | Failure::Other(e) => e,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::NoCandidateFound(_) => Failure::NoCandidate(e.into()),
            HarnessError::FeasibilityViolation { .. } => Failure::Internal(e.into()),
            HarnessError::Config(_) | HarnessError::BaseSet(_) => Failure::Parse(e.into()),
            e => Failure::Other(e.into()),
        }
    }
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    if path == Path::new("-") {
        return std::io::read_to_string(std::io::stdin()).context("reading stdin");
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &SolveArgs) -> Result<(Instance, RunConfig), Failure> {
    let text = read_input(&args.instance)?;
    let inst = parse_instance(&text)
        .with_context(|| format!("parsing {}", args.instance.display()))
        .map_err(Failure::Parse)?;
    if let Some(d) = args.dim {
        if d != inst.dim() {
            return Err(Failure::Parse(anyhow::anyhow!(
                "--dim {d} does not match the instance dimension {}",
                inst.dim()
            )));
        }
    }
    for w in validate_instance(&inst) {
        eprintln!("warning: {w}");
    }
    let base_set_mode = match args.base_set.as_str() {
        "axis" => BaseSetMode::Axis,
        "full" => BaseSetMode::Full,
        path => BaseSetMode::File(path.into()),
    };
    let cfg = RunConfig {
        epsilon: args.epsilon,
        base_set_mode,
        order_cap: args.order_cap,
        config_cap: args.config_cap,
        guess_cap: args.guess_cap,
        path_mode: args.path,
        seed: args.seed,
        ..RunConfig::default()
    };
    cfg.validate().map_err(|e| Failure::Parse(e.into()))?;
    Ok((inst, cfg))
}

fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let (inst, cfg) = load(args)?;
    let rec = run_ptas(&inst, &cfg)?;
    if let Some(svg) = &args.svg {
        let tour = rec.tour();
        fs::write(svg, emit_svg(&inst.hyperplanes(), &[("ptas", &tour)])?).context("writing SVG")?;
    }
    emit(args.out.as_deref(), &(write_result(&rec) + "\n"))?;
    eprintln!(
        "length {:.6}, {} LPs solved, {:.1} ms",
        rec.length, rec.counters.lps_solved, rec.wall_ms
    );
    Ok(())
}

fn compare_cmd(args: &SolveArgs) -> Result<(), Failure> {
    let (inst, cfg) = load(args)?;
    let table = compare(&inst, &cfg)?;
    print!("{}", table.to_text());
    if let Some(out) = &args.out {
        emit(Some(out), &(table.to_json() + "\n"))?;
    }
    if let Some(svg) = &args.svg {
        let tours: Vec<Tour> = table.records.iter().map(|r| r.tour()).collect();
        let labeled: Vec<(&str, &Tour)> = table
            .records
            .iter()
            .zip(&tours)
            .map(|(r, t)| (r.algorithm.as_str(), t))
            .collect();
        fs::write(svg, emit_svg(&inst.hyperplanes(), &labeled)?).context("writing SVG")?;
    }
    Ok(())
}

/// Polygon outline through the vertices in angular order around their centroid.
fn outline(pts: &[Point]) -> Tour {
    let c = pts.iter().fold(Point::zeros(2), |a, p| a + p) / pts.len() as f64;
    let mut sorted = pts.to_vec();
    sorted.sort_by(|a, b| (a[1] - c[1]).atan2(a[0] - c[0]).total_cmp(&(b[1] - c[1]).atan2(b[0] - c[0])));
    Tour::closed(sorted)
}

fn sparsify_demo(args: &DemoArgs) -> Result<(), Failure> {
    if !(2..=4).contains(&args.dim) || args.vertices <= args.dim {
        return Err(Failure::Parse(anyhow::anyhow!(
            "need 2 ≤ dim ≤ 4 and more than dim vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let pts: Vec<Point> = (0..args.vertices)
        .map(|_| {
            let dir = Point::from_fn(args.dim, |_, _| rng.gen_range(-1.0..1.0));
            dir.normalize() * rng.gen_range(0.8..1.0)
        })
        .collect();
    let poly = PolytopeV::from_points(pts).context("building the hull")?;
    let rep = sparsify_polytope(&poly, args.epsilon).context("sparsifying")?;
    let summary = serde_json::json!({
        "dim": args.dim,
        "epsilon": args.epsilon,
        "vertices": rep.num_vertices,
        "selected": rep.num_selected,
        "rays": rep.rays,
        "containment_margin": rep.containment_margin,
        "selected_indices": rep.selected,
    });
    emit(args.out.as_deref(), &(serde_json::to_string_pretty(&summary).expect("json") + "\n"))?;
    if let Some(svg) = &args.svg {
        if args.dim != 2 {
            return Err(HarnessError::DimensionUnsupported(args.dim).into());
        }
        let original = outline(poly.vertices());
        let expanded = outline(rep.expanded.vertices());
        fs::write(svg, emit_svg(&[], &[("original", &original), ("expanded", &expanded)])?).context("writing SVG")?;
    }
    Ok(())
}

fn gen(args: &GenArgs) -> Result<(), Failure> {
    if !(2..=4).contains(&args.dim) || args.count == 0 || args.coeff < 1 || args.offset < 0 {
        return Err(Failure::Parse(anyhow::anyhow!(
            "need 2 ≤ dim ≤ 4, count ≥ 1, coeff ≥ 1, offset ≥ 0"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let inst = random_instance(&mut rng, args.dim, args.count, args.coeff, args.offset);
    emit(args.out.as_deref(), &inst.to_string())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let res = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Compare(a) => compare_cmd(a),
        Command::SparsifyDemo(a) => sparsify_demo(a),
        Command::Gen(a) => gen(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tspn_core::geom::point;

    #[test]
    fn harness_errors_map_to_exit_codes() {
        let none: Failure = HarnessError::NoCandidateFound("x".into()).into();
        assert_eq!(none.code(), 3);
        let bad: Failure = HarnessError::FeasibilityViolation {
            unvisited: vec![0],
            tour: Tour::closed(vec![point(&[0., 0.])]),
        }
        .into();
        assert_eq!(bad.code(), 4);
        let dim: Failure = HarnessError::DimensionUnsupported(3).into();
        assert_eq!(dim.code(), 1);
    }

    #[test]
    fn outline_is_convex_order() {
        let pts = vec![point(&[1., 1.]), point(&[0., 0.]), point(&[1., 0.]), point(&[0., 1.])];
        assert!((outline(&pts).length() - 4.0).abs() < 1e-12);
    }
}
