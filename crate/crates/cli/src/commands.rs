use std::fs;
use std::path::{Path, PathBuf};

use rrs_core::harness::{
    output::write_pgm, resolve_target, run_bench, run_bound, run_curve, run_tomo, BenchSpec,
    MethodSpec, Target, TomoSpec, NOISE_STREAM, PROBLEM_STREAM,
};
use rrs_core::matrix::Representation;
use rrs_core::problems::{
    add_noise, gen_gaussian, gen_parallel_tomo, write_vector, Phantom, TomoGeometry,
};
use rrs_core::solver::{solve, ErrOracle, DEFAULT_MAX_REFLECTIONS, DEFAULT_TOL};
use rrs_core::{Error, Method, Problem, Result, RngStream, SolveConfig};

use crate::args::{
    BoundArgs, Cli, Command, Common, GenArgs, Geometry, RunArgs, SolveArgs, Source, TomoArgs,
};
use crate::settings::Settings;

const DEFAULT_QS: [usize; 3] = [5, 10, 20];

pub fn run(cli: Cli) -> Result<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Gen(a) => gen(&settings, a),
        Command::Solve(a) => solve_cmd(&settings, a),
        Command::Bench(a) => bench(&settings, a),
        Command::Curve(a) => curve(&settings, a),
        Command::Tomo(a) => tomo(&settings, a),
        Command::Bound(a) => bound(&settings, a),
    }
}

/// Shared flags after merging with the config file.
struct Shared {
    seed: u64,
    tol: f64,
    max_reflections: usize,
    trials: usize,
    qs: Vec<usize>,
    target: Target,
    out: PathBuf,
    jobs: Option<usize>,
    timing: bool,
}

fn shared(s: &Settings, c: Common) -> Result<Shared> {
    let target = match s.opt(c.target, "target")? {
        Some(t) => t.parse::<Target>()?,
        None => Target::Auto,
    };
    Ok(Shared {
        seed: s.get(c.seed, "seed", 0)?,
        tol: s.get(c.tol, "tol", DEFAULT_TOL)?,
        max_reflections: s.get(
            c.max_reflections,
            "max-reflections",
            DEFAULT_MAX_REFLECTIONS,
        )?,
        trials: s.get(c.trials, "trials", 40)?,
        qs: s.list(&c.q, "q", &DEFAULT_QS)?,
        target,
        out: s.path(c.out, "out").unwrap_or_else(|| PathBuf::from("out")),
        jobs: s.opt(c.jobs, "jobs")?,
        timing: s.flag(c.timing, "timing")?,
    })
}

fn parse_dims(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::Argument(format!("expected MxN dimensions, got '{text}'"));
    let (m, n) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((
        m.trim().parse().map_err(|_| bad())?,
        n.trim().parse().map_err(|_| bad())?,
    ))
}

fn load_problem(s: &Settings, src: Source, seed: u64) -> Result<Problem> {
    let repr = match s.opt(src.repr, "repr")? {
        None => Representation::Auto,
        Some(r) => match r.as_str() {
            "auto" => Representation::Auto,
            "dense" => Representation::Dense,
            "csr" => Representation::Csr,
            other => return Err(Error::Argument(format!("unknown representation '{other}'"))),
        },
    };
    let gaussian: Option<String> = s.opt(src.gaussian, "gaussian")?;
    let matrix = s.path(src.matrix, "matrix");
    let dir = s.path(src.problem, "problem");
    let given = gaussian.is_some() as usize + matrix.is_some() as usize + dir.is_some() as usize;
    if given != 1 {
        return Err(Error::Argument(
            "give exactly one of --gaussian MxN, --matrix FILE or --problem DIR".into(),
        ));
    }
    let mut problem = if let Some(g) = gaussian {
        let (m, n) = parse_dims(&g)?;
        gen_gaussian(m, n, &mut RngStream::new(seed, PROBLEM_STREAM))?
    } else if let Some(path) = matrix {
        Problem::from_matrix_file(path, repr)?
    } else {
        Problem::read_dir(dir.expect("one source is set"), repr)?
    };
    if let Some(delta) = s.opt(src.noise, "noise")? {
        problem = add_noise(problem, delta, &mut RngStream::new(seed, NOISE_STREAM))?;
    }
    Ok(problem)
}

fn geometry(s: &Settings, g: Geometry) -> Result<TomoGeometry> {
    let d = TomoSpec::default().geometry;
    let geom = TomoGeometry::uniform(
        s.get(g.grid, "grid", d.grid_size)?,
        s.get(g.angles, "angles", d.angles.len())?,
        s.get(g.detectors, "detectors", d.detectors)?,
    );
    geom.validate()?;
    Ok(geom)
}

/// `rs`, `kaczmarz`, and `rrs` expanded over every q, in the order given.
fn method_list(s: &Settings, names: &[String], qs: &[usize]) -> Result<Vec<MethodSpec>> {
    let names = s.list(names, "method", &["rs".to_string(), "rrs".to_string()])?;
    let mut out = Vec::new();
    for name in names {
        match name.parse::<Method>()? {
            Method::Rs => out.push(MethodSpec::rs()),
            Method::Kaczmarz => out.push(MethodSpec::kaczmarz()),
            Method::Rrs => out.extend(qs.iter().map(|&q| MethodSpec::rrs(q))),
            Method::RrsWeighted => {
                return Err(Error::Argument(
                    "rrs-weighted needs explicit weights; use `rrs solve --weights`".into(),
                ))
            }
        }
    }
    for m in &out {
        m.config().validate()?;
    }
    Ok(out)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents)?;
    Ok(())
}

fn gen(s: &Settings, a: GenArgs) -> Result<()> {
    let sh = shared(s, a.common)?;
    let tomo = s.flag(a.tomo, "tomo")?;
    let gaussian: Option<String> = s.opt(a.gaussian, "gaussian")?;
    let mut problem = match (gaussian, tomo) {
        (Some(g), false) => {
            let (m, n) = parse_dims(&g)?;
            gen_gaussian(m, n, &mut RngStream::new(sh.seed, PROBLEM_STREAM))?
        }
        (None, true) => gen_parallel_tomo(&geometry(s, a.geometry)?, &Phantom::head())?,
        _ => {
            return Err(Error::Argument(
                "give exactly one of --gaussian MxN or --tomo".into(),
            ))
        }
    };
    if let Some(delta) = s.opt(a.delta, "delta")? {
        problem = add_noise(problem, delta, &mut RngStream::new(sh.seed, NOISE_STREAM))?;
    }
    problem.write_dir(&sh.out)?;
    println!(
        "wrote {} problem {}x{} to {}",
        problem.kind,
        problem.nrows(),
        problem.ncols(),
        sh.out.display()
    );
    Ok(())
}

fn solve_cmd(s: &Settings, a: SolveArgs) -> Result<()> {
    let sh = shared(s, a.common)?;
    let problem = load_problem(s, a.source, sh.seed)?;
    let x_ref = resolve_target(&problem, sh.target)?;
    let method: Method = s.get(a.method, "method", "rrs".to_string())?.parse()?;
    let weights: Option<String> = s.opt(a.weights, "weights")?;
    let mut cfg = match method {
        Method::Rs => SolveConfig::rs(),
        Method::Kaczmarz => SolveConfig::kaczmarz(),
        Method::Rrs => SolveConfig::rrs(sh.qs[0]),
        Method::RrsWeighted => {
            let raw =
                weights.ok_or_else(|| Error::Argument("rrs-weighted requires --weights".into()))?;
            let w = raw
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Argument(format!("invalid weights '{raw}'")))?;
            SolveConfig::rrs_weighted(w)
        }
    }
    .with_tol(sh.tol)
    .with_budget(sh.max_reflections)
    .with_stream(sh.seed, s.get(a.stream, "stream", 0)?);
    if let Some(stride) = s.opt(a.stride, "stride")? {
        cfg = cfg.with_stride(stride);
    }
    let x0 = vec![0.0; problem.ncols()];
    let oracle = ErrOracle::new(&x_ref, &x0)?;
    let trace = solve(&problem.a, &problem.b, &x0, &cfg, &oracle)?;

    fs::create_dir_all(&sh.out)?;
    let mut csv = String::from("reflections,restarts,err,elapsed_s\n");
    for cp in &trace.checkpoints {
        let elapsed = if sh.timing {
            format!("{:.6}", cp.elapsed)
        } else {
            "0".into()
        };
        csv.push_str(&format!(
            "{},{},{:e},{elapsed}\n",
            cp.reflections, cp.restarts, cp.err
        ));
    }
    write(&sh.out.join("trace.csv"), csv)?;
    write_vector(sh.out.join("solution.txt"), &trace.solution)?;
    println!("method       {}", cfg.label());
    println!("termination  {}", trace.termination);
    println!("reflections  {}", trace.iterations());
    println!("restarts     {}", trace.restarts());
    println!("err          {:e}", trace.final_err());
    Ok(())
}

fn bench(s: &Settings, a: RunArgs) -> Result<()> {
    let sh = shared(s, a.common)?;
    let problem = load_problem(s, a.source, sh.seed)?;
    let x_ref = resolve_target(&problem, sh.target)?;
    let spec = BenchSpec {
        methods: method_list(s, &a.method, &sh.qs)?,
        trials: sh.trials,
        tol: sh.tol,
        max_reflections: sh.max_reflections,
        seed: sh.seed,
        checkpoint_stride: s.opt(a.stride, "stride")?,
        jobs: sh.jobs,
    };
    let report = run_bench(&problem, &x_ref, &spec)?;
    fs::create_dir_all(&sh.out)?;
    write(&sh.out.join("trials.csv"), report.trials_csv(sh.timing))?;
    write(&sh.out.join("summary.csv"), report.summary_csv(sh.timing))?;
    print!("{}", report.summary_table());
    Ok(())
}

fn curve(s: &Settings, a: RunArgs) -> Result<()> {
    let sh = shared(s, a.common)?;
    let problem = load_problem(s, a.source, sh.seed)?;
    let x_ref = resolve_target(&problem, sh.target)?;
    let methods = method_list(s, &a.method, &sh.qs)?;
    let stride = s.opt(a.stride, "stride")?;
    let report = run_curve(
        &problem,
        &x_ref,
        &methods,
        sh.max_reflections,
        sh.tol,
        sh.seed,
        stride,
    )?;
    fs::create_dir_all(&sh.out)?;
    let title = format!("{}x{} {}", problem.nrows(), problem.ncols(), problem.kind);
    write(&sh.out.join("curve.csv"), report.csv())?;
    write(&sh.out.join("curve.svg"), report.svg(&title))?;
    let spacing = match stride {
        Some(k) => format!("every {k} reflections"),
        None => "rs/kaczmarz every 5 reflections, rrs at every restart".to_string(),
    };
    let meta = format!(
        "problem={title}\nseed={}\ntol={:e}\nmax_reflections={}\ntarget={}\ncheckpoints={spacing}\n",
        sh.seed, sh.tol, sh.max_reflections, sh.target
    );
    write(&sh.out.join("curve_meta.txt"), meta)?;
    for series in &report.series {
        let last = series
            .checkpoints
            .last()
            .expect("every run records its start");
        println!(
            "{:<10} {:>8} reflections  err {:e}",
            series.method.label(),
            last.reflections,
            last.err
        );
    }
    Ok(())
}

fn tomo(s: &Settings, a: TomoArgs) -> Result<()> {
    let sh = shared(s, a.common)?;
    let d = TomoSpec::default();
    let spec = TomoSpec {
        geometry: geometry(s, a.geometry)?,
        phantom: d.phantom,
        delta: s.get(a.delta, "delta", d.delta)?,
        methods: method_list(s, &a.method, &sh.qs)?,
        budget_multiplier: s.get(
            a.budget_multiplier,
            "budget-multiplier",
            d.budget_multiplier,
        )?,
        seed: sh.seed,
    };
    let report = run_tomo(&spec)?;
    let n = spec.geometry.grid_size;
    fs::create_dir_all(&sh.out)?;
    write_pgm(sh.out.join("phantom.pgm"), report.clean_image(), n)?;
    for r in &report.results {
        let name = format!("{}{}.pgm", r.method.method, r.method.q_field());
        write_pgm(sh.out.join(name), &r.image, n)?;
    }
    write(&sh.out.join("snr.csv"), report.snr_csv())?;
    println!(
        "{}x{} system, budget {} reflections",
        report.problem.nrows(),
        report.problem.ncols(),
        report.budget
    );
    for r in &report.results {
        println!("{:<10} {:>10.4} dB", r.method.label(), r.snr_db);
    }
    Ok(())
}

fn bound(s: &Settings, a: BoundArgs) -> Result<()> {
    let sh = shared(s, a.common)?;
    let problem = load_problem(s, a.source, sh.seed)?;
    let run = run_bound(&problem.a, &sh.qs, s.get(a.k_max, "k-max", 20)?)?;
    print!("{}", run.text());
    if s.flag(a.csv, "csv")? {
        fs::create_dir_all(&sh.out)?;
        write(&sh.out.join("bound.csv"), run.csv())?;
    }
    Ok(())
}
