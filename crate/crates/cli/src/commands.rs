use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use tempoly::constructions::{
    compose_fast_forward, compose_fast_rewind, formanek_central, perm_poly, qubit_central, qubit_rewind, rewind_poly,
    rewind_poly_vw, scaled_fit, swap_poly_symbolic, Rewinder, SwapPolys,
};
use tempoly::ncpoly::{self, expr_to_value, load_any, PolyExpr, ScaledMatrix, TensorPoly, EXPAND_LIMIT};
use tempoly::numkit::{
    ginibre, haar_unitary, permutation_operator, random_hermitian, swap_matrix, ComplexMatrix, RngStream,
};
use tempoly::planner::{compile, feasible, plan, verify_schedule, FeasibilityQuery};
use tempoly::protocol::{
    experiment_card, monte_carlo, program_from_value, program_to_value, Branching, ModelSource, MonteCarloOptions,
    ProtocolProgram, PsiPolicy, Sampler,
};
use tempoly::reproduce::{reproduce, ReproduceOptions};
use tempoly::search::{
    default_var_names, orthocomplement, search_dense, search_mps, sparsify_quotient, GeneratorConfig, SparsifyOptions,
    MPS_TOL,
};

use crate::args::*;
use crate::Failure;

type Res<T> = Result<T, Failure>;

struct Ctx<'a> {
    seed: u64,
    out: Option<&'a Path>,
    command: Vec<String>,
}

impl Ctx<'_> {
    fn provenance(&self) -> Value {
        json!({ "tool": "tempoly", "version": tempoly::VERSION, "seed": self.seed, "command": self.command })
    }

    fn wrap(&self, result: impl Serialize) -> Value {
        let mut doc = self.provenance();
        doc["result"] = serde_json::to_value(result).expect("result serializes");
        doc
    }

    /// Writes `doc` to `--out` or stdout.
    fn emit(&self, doc: &Value) -> Res<()> {
        let text = pretty(doc);
        match self.out {
            Some(p) => write_file(p, &text),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Res<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Res<Vec<u8>> {
    fs::read(path).map_err(|e| Failure { code: 2, kind: "io".into(), message: format!("{}: {e}", path.display()) })
}

fn read_json(path: &Path) -> Res<Value> {
    serde_json::from_slice(&read_file(path)?).map_err(|e| Failure {
        code: 2,
        kind: "json".into(),
        message: format!("{}: {e}", path.display()),
    })
}

pub fn dispatch(cli: &Cli, argv: &[String]) -> Res<()> {
    let ctx =
        Ctx { seed: cli.global.seed, out: cli.global.out.as_deref(), command: argv.iter().skip(1).cloned().collect() };
    match &cli.command {
        Command::Construct(a) => construct(&ctx, a),
        Command::Search(a) => search(&ctx, a),
        Command::Verify(a) => verify(&ctx, a),
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Card(a) => card(&ctx, a),
        Command::Plan(a) => plan_cmd(&ctx, a),
        Command::ReproducePaper(a) => reproduce_cmd(&ctx, a),
    }
}

/// SWAP polynomials from a file, or the bundled qubit fixture.
fn load_swaps(path: Option<&Path>, d: usize) -> Res<SwapPolys> {
    let expr = match path {
        Some(p) => load_any(&read_file(p)?)?.0,
        None if d == 2 => PolyExpr::leaf(tempoly::fixtures::omega()?),
        None => return Err(Failure::usage(format!("no bundled SWAP polynomial for d = {d}; pass --swap"))),
    };
    Ok(SwapPolys::uniform(d, expr)?)
}

fn poly_document(expr: &PolyExpr, expand: bool, metadata: Value) -> Res<Value> {
    if expand {
        return Ok(ncpoly::json::to_value(&expr.expand(EXPAND_LIMIT)?, Some(metadata)));
    }
    Ok(match expr.as_leaf() {
        Some(p) => ncpoly::json::to_value(p, Some(metadata)),
        None => expr_to_value(expr, Some(metadata)),
    })
}

fn construct(ctx: &Ctx, a: &ConstructArgs) -> Res<()> {
    let leaf = |p: TensorPoly| PolyExpr::leaf(p);
    let expr = match a.kind {
        ConstructKind::Formanek => leaf(formanek_central(a.d)?.into_poly()),
        ConstructKind::QubitCentral => leaf(qubit_central()?.into_poly()),
        ConstructKind::Rewind => leaf(rewind_poly(a.d, a.s)?),
        ConstructKind::RewindVw => leaf(rewind_poly_vw(a.d, a.s)?),
        ConstructKind::QubitRewind => leaf(qubit_rewind(a.s)?),
        ConstructKind::SwapFixture => match &a.swap {
            Some(p) => leaf(tempoly::fixtures::load_swap_fixture(&read_file(p)?)?.poly),
            None => leaf(tempoly::fixtures::omega()?),
        },
        ConstructKind::FastForward => compose_fast_forward(a.n, a.j, a.s, &load_swaps(a.swap.as_deref(), a.d)?)?,
        ConstructKind::FastRewind => {
            let rewinder = Rewinder::default_for(a.d).build(a.s)?;
            compose_fast_rewind(a.n, a.j, &load_swaps(a.swap.as_deref(), a.d)?, &rewinder)?
        }
        ConstructKind::SwapSymbolic => swap_poly_symbolic(a.d, ctx.seed)?.swap,
        ConstructKind::Perm => {
            if a.perm.is_empty() {
                return Err(Failure::usage("perm needs --perm, e.g. --perm 1,2,0"));
            }
            perm_poly(a.perm.len(), a.d, &a.perm, &swap_poly_symbolic(a.d, ctx.seed)?)?
        }
    };
    let mut meta = ctx.provenance();
    meta["construction"] = json!({
        "kind": a.kind.to_possible_value().expect("named").get_name(), "d": a.d, "s": a.s, "n": a.n, "j": a.j, "perm": a.perm,
        "degrees": expr.degrees(),
    });
    ctx.emit(&poly_document(&expr, a.expand, meta)?)
}

fn target_matrix(target: &str, n_parties: usize, d: usize) -> Res<ComplexMatrix> {
    match target {
        "swap" if n_parties == 2 => Ok(swap_matrix(d)),
        "swap" => Err(Failure::usage(format!("target swap needs two parties, got {n_parties}"))),
        "identity" => Ok(ComplexMatrix::identity(d.pow(n_parties as u32))),
        t => {
            let list = t.strip_prefix("perm:").ok_or_else(|| Failure::usage(format!("unknown target {t}")))?;
            let perm = list
                .split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::usage(format!("bad permutation {list}: {e}")))?;
            if perm.len() != n_parties {
                return Err(Failure::usage(format!("permutation of {} for {n_parties} parties", perm.len())));
            }
            Ok(permutation_operator(n_parties, d, &perm)?)
        }
    }
}

fn search(ctx: &Ctx, a: &SearchArgs) -> Res<()> {
    let target = match (a.target, a.perm.is_empty()) {
        (SearchTarget::Swap, _) => target_matrix("swap", a.parties, a.d)?,
        (SearchTarget::Identity, _) => target_matrix("identity", a.parties, a.d)?,
        (SearchTarget::Perm, true) => return Err(Failure::usage("--target perm needs --perm")),
        (SearchTarget::Perm, false) => {
            let list: Vec<String> = a.perm.iter().map(|x| x.to_string()).collect();
            target_matrix(&format!("perm:{}", list.join(",")), a.parties, a.d)?
        }
    };
    let mut cfg = GeneratorConfig::new(a.d, a.vars, a.m, a.parties, target.clone()).with_seed(ctx.seed);
    if let Some(t) = a.tol {
        cfg.tol = t;
    }
    let result = match a.mode {
        ModeArg::Mps => {
            if a.sparsify {
                return Err(Failure::usage("--sparsify needs --mode dense"));
            }
            let report = search_mps(&cfg, a.tol.unwrap_or(MPS_TOL))?;
            if let Some(dir) = &a.out_dir {
                write_file(&dir.join("report.json"), &pretty(&ctx.wrap(&report)))?;
            }
            json!({ "report": report })
        }
        ModeArg::Dense => {
            let s = search_dense(&cfg)?;
            let polys = s.quotient_polys(&cfg)?;
            let mut files = Vec::new();
            if let Some(dir) = &a.out_dir {
                for (i, p) in polys.iter().enumerate() {
                    let name = format!("quotient_{i}.json");
                    let mut meta = ctx.provenance();
                    meta["basis_index"] = json!(i);
                    write_file(&dir.join(&name), &pretty(&ncpoly::json::to_value(p, Some(meta))))?;
                    files.push(name);
                }
            }
            let mut out = json!({ "report": s.report, "quotient_files": files });
            if a.sparsify {
                let null = orthocomplement(&s.nperp, ctx.seed)?;
                let mut opts = SparsifyOptions::new(target, a.d, a.parties, a.m, default_var_names(a.vars));
                opts.seed = ctx.seed;
                let r = sparsify_quotient(&s.quotient, &null, &opts)?;
                out["sparse"] = json!({
                    "terms": r.terms,
                    "verification": r.verification,
                    "verified_directions": r.verified_directions,
                });
                if let Some(dir) = &a.out_dir {
                    let mut meta = ctx.provenance();
                    meta["verification"] = serde_json::to_value(r.verification).expect("serializes");
                    write_file(&dir.join("sparse.json"), &pretty(&ncpoly::json::to_value(&r.poly, Some(meta))))?;
                }
            }
            if let Some(dir) = &a.out_dir {
                write_file(&dir.join("report.json"), &pretty(&ctx.wrap(&out)))?;
            }
            out
        }
    };
    ctx.emit(&ctx.wrap(result))
}

/// Σ|g|·∏‖X‖ over terms, the triangle-inequality scale of an evaluation.
fn term_scale(p: &TensorPoly, xs: &[ComplexMatrix]) -> f64 {
    let norms: Vec<f64> = xs.iter().map(|x| x.norm()).collect();
    p.terms()
        .map(|(words, c)| {
            c.norm() * words.iter().flat_map(|w| w.letters()).map(|&l| norms[l as usize]).product::<f64>()
        })
        .sum()
}

#[derive(Serialize)]
struct VerifyReport {
    target: String,
    d: usize,
    sampler: String,
    samples: usize,
    passes: usize,
    zero_draws: usize,
    /// Draws re-evaluated in double-double precision.
    extended_draws: usize,
    worst_relative: f64,
    tol: f64,
    pass: bool,
}

fn verify(ctx: &Ctx, a: &VerifyArgs) -> Res<()> {
    let (expr, _) = load_any(&read_file(&a.poly)?)?;
    let target = target_matrix(&a.target, expr.n_parties(), a.d)?;
    let haar_at = |i: usize| -> Res<bool> {
        match a.sampler.as_str() {
            "haar" => Ok(true),
            "ginibre" => Ok(false),
            "mixed" => Ok(i % 2 == 0),
            s => Err(Failure::usage(format!("unknown sampler {s} (haar, ginibre, mixed)"))),
        }
    };
    let mut rng = RngStream::named(ctx.seed, "verify");
    let mut rep = VerifyReport {
        target: a.target.clone(),
        d: a.d,
        sampler: a.sampler.clone(),
        samples: a.samples,
        passes: 0,
        zero_draws: 0,
        extended_draws: 0,
        worst_relative: 0.0,
        tol: a.tol,
        pass: false,
    };
    for i in 0..a.samples {
        let haar = haar_at(i)?;
        let xs: Vec<ComplexMatrix> = (0..expr.n_vars())
            .map(|_| if haar { haar_unitary(a.d, &mut rng) } else { ginibre(a.d, a.d, &mut rng) })
            .collect();
        let scale = expr.as_leaf().map(|p| term_scale(p, &xs));
        let small = |v: &ScaledMatrix, rel: f64| v.is_zero() || scale.is_some_and(|s| v.log2_norm() < (rel * s).log2());
        let mut val = expr.evaluate_scaled(&xs)?;
        let mut fit = scaled_fit(&val, &target)?;
        // Below f64 resolution: settle the draw in double-double.
        if small(&val, 1e-10) || fit.relative > a.tol {
            val = expr.evaluate_extended(&xs)?;
            fit = scaled_fit(&val, &target)?;
            rep.extended_draws += 1;
        }
        if small(&val, 1e-28) {
            rep.zero_draws += 1;
        } else {
            rep.worst_relative = rep.worst_relative.max(fit.relative);
            if fit.relative <= a.tol {
                rep.passes += 1;
            }
        }
    }
    rep.pass = rep.passes == a.samples;
    ctx.emit(&ctx.wrap(&rep))?;
    if rep.pass {
        Ok(())
    } else {
        Err(Failure::numerical(
            "verification",
            format!(
                "{} of {} draws failed (worst residual {:.3e})",
                a.samples - rep.passes,
                a.samples,
                rep.worst_relative
            ),
        ))
    }
}

fn simulate(ctx: &Ctx, a: &SimulateArgs) -> Res<()> {
    let branching = match a.mode {
        BranchArg::Canonical => Branching::Canonical,
        BranchArg::Compressed => Branching::Compressed,
    };
    let prog = match (&a.poly, &a.program) {
        (Some(p), _) => ProtocolProgram::single(load_any(&read_file(p)?)?.0, branching)?,
        (None, Some(p)) => program_from_value(read_json(p)?)?.0,
        (None, None) => return Err(Failure::usage("pass --poly or --program")),
    };
    let sampler = match a.sampler.as_str() {
        "haar" => Sampler::Haar { d: a.d },
        "ginibre" => Sampler::Ginibre { d: a.d },
        s => {
            let path = s
                .strip_prefix("model:")
                .ok_or_else(|| Failure::usage(format!("unknown sampler {s} (haar, ginibre, model:<file>)")))?;
            let src: ModelSource = serde_json::from_value(read_json(Path::new(path))?).map_err(|e| Failure {
                code: 2,
                kind: "json".into(),
                message: format!("{path}: {e}"),
            })?;
            Sampler::Model(src)
        }
    };
    let mut opts = MonteCarloOptions::new(a.trials, ctx.seed);
    opts.psi = match a.psi {
        PsiArg::Auto => PsiPolicy::Auto,
        PsiArg::Random => PsiPolicy::Random,
    };
    if a.csv.is_some() {
        opts = opts.keep_trials();
    }
    let mut est = monte_carlo(&prog, &sampler, &opts)?;
    if let (Some(path), Some(per)) = (&a.csv, est.per_trial.take()) {
        let mut w = csv::Writer::from_path(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let io = |e: csv::Error| Failure::usage(e.to_string());
        w.write_record(["trial", "prob"]).map_err(io)?;
        for (i, p) in per.iter().enumerate() {
            w.write_record([i.to_string(), format!("{p:e}")]).map_err(io)?;
        }
        w.flush()?;
    }
    ctx.emit(&ctx.wrap(&est))
}

fn card(ctx: &Ctx, a: &CardArgs) -> Res<()> {
    let (expr, _) = load_any(&read_file(&a.poly)?)?;
    let poly = match expr.as_leaf() {
        Some(p) => p.clone(),
        None => expr.expand(EXPAND_LIMIT)?,
    };
    ctx.emit(&ctx.wrap(experiment_card(&poly)?))
}

fn plan_cmd(ctx: &Ctx, a: &PlanArgs) -> Res<()> {
    if let Some(n) = a.n.filter(|&n| n != a.targets.len()) {
        return Err(Failure::usage(format!("--n {n} but {} targets given", a.targets.len())));
    }
    if a.compile && a.dt.is_none() {
        return Err(Failure::usage("--compile needs --dt"));
    }
    let query = FeasibilityQuery::new(a.d, a.budget, a.targets.clone());
    query.validate()?;
    let feas = feasible(&query);
    let schedule = plan(&query)?;
    let h0 = random_hermitian(a.d, 1.0, &mut RngStream::named(ctx.seed, "plan-verify"));
    let verification = verify_schedule(&schedule, &h0)?;
    let mut result = json!({
        "query": query,
        "feasibility": feas,
        "schedule": schedule,
        "verification": verification,
    });
    if a.compile {
        let dt = a.dt.expect("checked above");
        let swaps = if query.n > 1 { Some(load_swaps(a.swap.as_deref(), a.d)?) } else { None };
        let compiled = compile(&schedule, dt, swaps.as_ref(), Rewinder::default_for(a.d))?;
        result["compile"] = serde_json::to_value(&compiled.report).expect("serializes");
        let program = program_to_value(&compiled.program, Some(ctx.provenance()));
        match &a.program_out {
            Some(p) => {
                write_file(p, &pretty(&program))?;
                result["program_file"] = json!(p.display().to_string());
            }
            None => result["program"] = program,
        }
    }
    ctx.emit(&ctx.wrap(&result))?;
    if verification.pass {
        Ok(())
    } else {
        Err(Failure::numerical("verification", format!("schedule check failed: {:?}", verification.suspect_phases)))
    }
}

fn reproduce_cmd(ctx: &Ctx, a: &ReproduceArgs) -> Res<()> {
    let mut opts = ReproduceOptions::new(ctx.seed);
    opts.only = a.only.clone();
    if let Some(p) = &a.fixture {
        opts.fixture = Some(read_file(p)?);
    }
    let mut lines = String::new();
    let summary = reproduce(&opts, |r| {
        let line = r.line();
        eprintln!("{line}");
        lines.push_str(&line);
        lines.push('\n');
    })?;
    let doc = ctx.wrap(&summary);
    write_file(&a.report_dir.join("summary.json"), &pretty(&doc))?;
    lines.push_str(&format!(
        "{} of {} criteria passed in {:.1}s\n",
        summary.criteria.iter().filter(|c| c.pass).count(),
        summary.criteria.len(),
        summary.runtime_s
    ));
    write_file(&a.report_dir.join("summary.txt"), &lines)?;
    ctx.emit(&doc)?;
    if summary.all_pass {
        Ok(())
    } else {
        let failed: Vec<String> =
            summary.criteria.iter().filter(|c| !c.pass).map(|c| format!("{} {}", c.id, c.name)).collect();
        Err(Failure::numerical("criteria", format!("failed: {}", failed.join(", "))))
    }
}
