use std::path::Path;
use std::process::ExitCode;

use serde::Serialize;
use serde_json::{json, Value};

use nexp_core::gaps::{gap_report, DEFAULT_MAX_ROUNDS, DEFAULT_TOL};
use nexp_core::matching::{classify_alpha, sub_plateaux};
use nexp_core::measure::{entropy, entropy_closed_form, entropy_sweep, normalizing_constant};
use nexp_core::natext::build_domain;
use nexp_core::{enumerate_matching_pairs, Interval, MatchingPair, NExpParams};

use crate::output::{print_json, round15, write_file, write_or_print, CliError, CliResult};
use crate::{svg, verify, Cli, Command, PairArgs};

pub fn run(cli: &Cli) -> CliResult<ExitCode> {
    match &cli.command {
        Command::Enumerate { n, json } => enumerate(*n, *json),
        Command::Plateau { pair } => plateau(pair),
        Command::Classify { pair, alpha } => classify(pair, *alpha),
        Command::Verify { pair, suite } => {
            let pair = to_pair(pair)?;
            let checks = verify::run(&pair, *suite, cli.seed)?;
            for c in &checks {
                println!("{}", c.describe());
            }
            let failed = checks.iter().filter(|c| !c.pass()).count();
            if failed == 0 {
                println!("PASS {suite:?}: all {} checks", checks.len());
                Ok(ExitCode::SUCCESS)
            } else {
                println!("FAIL {suite:?}: {failed} of {} checks failed", checks.len());
                Ok(ExitCode::from(1))
            }
        }
        Command::Entropy { pair, alpha, iters } => entropy_cmd(pair, *alpha, *iters, cli.seed),
        Command::Sweep {
            n,
            from,
            to,
            steps,
            iters,
            out,
            svg,
        } => sweep(
            *n,
            *from,
            *to,
            *steps,
            *iters,
            cli.seed,
            out.as_deref(),
            svg.as_deref(),
        ),
        Command::Gaps { n, alpha } => gaps(*n, *alpha),
        Command::Domain {
            pair,
            alpha,
            out,
            svg,
        } => domain(pair, *alpha, out.as_deref(), svg.as_deref()),
    }
}

fn to_pair(p: &PairArgs) -> CliResult<MatchingPair> {
    Ok(MatchingPair::new(p.n, p.d, p.i)?)
}

fn interval(iv: &Interval) -> Value {
    json!([iv.lo, iv.hi])
}

fn pair_summary(p: &MatchingPair) -> CliResult<Value> {
    let h = p.heights();
    Ok(json!({
        "d": p.d(),
        "i": p.i(),
        "A": h.a,
        "B": h.b,
        "H": normalizing_constant(p)?,
        "h": entropy_closed_form(p)?,
    }))
}

fn enumerate(n: u64, as_json: bool) -> CliResult<ExitCode> {
    let e = enumerate_matching_pairs(n)?;
    if as_json {
        let pairs = e
            .pairs
            .iter()
            .map(pair_summary)
            .collect::<CliResult<Vec<_>>>()?;
        print_json(json!({ "N": e.n, "D": e.count, "M": e.bound, "pairs": pairs }));
    } else {
        println!("N = {}: D(N) = {}, M(N) = {}", e.n, e.count, e.bound);
        println!(
            "{:>6} {:>10} {:>18} {:>18} {:>18} {:>18}",
            "d", "i", "A", "B", "H", "h"
        );
        for p in &e.pairs {
            let h = p.heights();
            println!(
                "{:>6} {:>10} {:>18.15} {:>18.15} {:>18.12} {:>18.15}",
                p.d(),
                p.i(),
                h.a,
                h.b,
                normalizing_constant(p)?,
                entropy_closed_form(p)?
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn plateau(args: &PairArgs) -> CliResult<ExitCode> {
    let p = to_pair(args)?;
    let h = p.heights();
    let subs: Vec<Value> = sub_plateaux(&p, 400)
        .iter()
        .map(|s| json!({ "k": s.k, "lo": s.lo, "hi": s.hi }))
        .collect();
    print_json(json!({
        "N": p.n(),
        "d": p.d(),
        "i": p.i(),
        "plateau": [h.a, h.b],
        "heights": { "A": h.a, "B": h.b, "C": h.c, "D": h.d, "E": h.e, "F": h.f },
        "H": normalizing_constant(&p)?,
        "h": entropy_closed_form(&p)?,
        "sub_plateaux": subs,
    }));
    Ok(ExitCode::SUCCESS)
}

fn classify(args: &PairArgs, alpha: f64) -> CliResult<ExitCode> {
    let p = to_pair(args)?;
    NExpParams::new(p.n(), alpha)?;
    let c = classify_alpha(&p, alpha);
    print_json(json!({
        "alpha": alpha,
        "member": c.member,
        "k": c.k,
        "second_interior": c.second_interior,
        "boundary": c.boundary,
        "in_plateau": c.in_plateau,
    }));
    Ok(ExitCode::SUCCESS)
}

fn entropy_cmd(
    args: &PairArgs,
    alpha: Option<f64>,
    iters: usize,
    seed: u64,
) -> CliResult<ExitCode> {
    let p = to_pair(args)?;
    if let Some(a) = alpha {
        let h = p.heights();
        if !(h.a <= a && a <= h.b) {
            return Err(CliError::Usage(format!(
                "alpha = {a} is outside the plateau [{}, {}]",
                h.a, h.b
            )));
        }
    }
    if alpha.is_some() && iters == 0 {
        return Err(CliError::Usage("--iters must be positive".into()));
    }
    let r = entropy(&p, alpha, iters, seed)?;
    print_json(json!({
        "closed_form": r.closed_form,
        "alpha": alpha,
        "birkhoff_estimate": r.birkhoff_estimate,
        "iterations": alpha.map(|_| r.birkhoff_iterations),
        "seed": seed,
        "discrepancy": r.discrepancy(),
    }));
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CsvRow {
    alpha: f64,
    entropy: f64,
    iterations: usize,
    seed: u64,
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    n: u64,
    from: f64,
    to: f64,
    steps: usize,
    iters: usize,
    seed: u64,
    out: Option<&Path>,
    svg_path: Option<&Path>,
) -> CliResult<ExitCode> {
    let rows = entropy_sweep(n, from, to, steps, iters, seed)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in &rows {
        w.serialize(CsvRow {
            alpha: round15(r.alpha),
            entropy: round15(r.entropy),
            iterations: r.iterations,
            seed: r.seed,
        })
        .map_err(|e| CliError::Failed(format!("CSV encoding failed: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Failed(format!("CSV encoding failed: {e}")))?;
    write_or_print(out, &bytes)?;
    if let Some(path) = svg_path {
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.alpha, r.entropy)).collect();
        write_file(path, svg::line_plot(&points, "alpha", "entropy").as_bytes())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn gaps(n: u64, alpha: f64) -> CliResult<ExitCode> {
    let params = NExpParams::new(n, alpha)?;
    let r = gap_report(&params, DEFAULT_MAX_ROUNDS, DEFAULT_TOL)?;
    print_json(json!({
        "N": n,
        "alpha": alpha,
        "attractor": r.attractor.iter().map(interval).collect::<Vec<_>>(),
        "gaps": r.gaps.iter().map(interval).collect::<Vec<_>>(),
        "min_abs_derivative": r.min_abs_derivative,
    }));
    Ok(ExitCode::SUCCESS)
}

fn domain(
    args: &PairArgs,
    alpha: f64,
    out: Option<&Path>,
    svg_path: Option<&Path>,
) -> CliResult<ExitCode> {
    let p = to_pair(args)?;
    let dom = build_domain(&p, alpha)?;
    write_or_print(out, dom.vertex_text().as_bytes())?;
    if let Some(path) = svg_path {
        let vertices: Vec<(f64, f64)> = dom.vertices().iter().map(|v| (v.x, v.y)).collect();
        let params = dom.params();
        let r = params.digit_range();
        let dividers: Vec<f64> = (r.min..r.max)
            .map(|j| params.cylinder(j).map(|c| c.lo))
            .collect::<Result<_, _>>()?;
        let drawing = svg::outline(&vertices, &dividers, |x| dom.fiber(x).map(|f| (f.lo, f.hi)));
        write_file(path, drawing.as_bytes())?;
    }
    Ok(ExitCode::SUCCESS)
}
