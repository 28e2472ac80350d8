//! Batch driver: read a JSON problem description, run the matching solver,
//! emit a deterministic machine-readable report.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use serde::Deserialize;

use mi_core::{
    best_subspace_sampler, residual, solve_problem1, solve_problem2, solve_si, solve_si_extra,
    is_translation_invariant, totally_decomposable_check, wiener_set, C64, CMat, Decomposition,
    Error as CoreError, FiniteAbelianGroup, Lattice, MiSolution, Signal, VectorField,
    WeightedGrid,
};
use mi_core::lca::element_id;

mod json;
use json::J;

#[derive(Parser)]
#[command(name = "mi-cli", about = "Optimal invariant-subspace batch solver")]
struct Args {
    /// Path to the JSON problem description.
    #[arg(long)]
    problem: PathBuf,
    /// Report destination: a file path, or "-" for standard output.
    #[arg(long, default_value = "-")]
    out: String,
    /// Random-candidate optimality probe sample count (0 disables it).
    #[arg(long, default_value_t = 0)]
    probe_samples: usize,
    /// Seed for the optimality probe.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative rank threshold, used unless the spec sets its own.
    #[arg(long, default_value_t = 1e-10)]
    epsilon: f64,
}

enum CliError {
    Invalid(String),
    Numerical(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NumericalFailure(m) => CliError::Numerical(m),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Invalid(msg.into()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    fibers: Vec<String>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecompositionSpec {
    blocks: Vec<Vec<usize>>,
    basis: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSpec {
    kind: String,
    grid: Option<GridSpec>,
    decomposition: Option<DecompositionSpec>,
    group: Option<Vec<u32>>,
    lattice: Option<Vec<Vec<u32>>>,
    gamma: Option<Vec<Vec<u32>>>,
    data: serde_json::Value,
    length: Option<usize>,
    epsilon: Option<f64>,
    seed: Option<u64>,
}

fn cx(v: &[f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

fn complex_to_json(z: &C64) -> J {
    J::Arr(vec![J::Num(z.re), J::Num(z.im)])
}

fn vec_to_json(v: &[C64]) -> J {
    J::Arr(v.iter().map(complex_to_json).collect())
}

fn field_to_json(f: &VectorField) -> J {
    J::Arr(f.values().iter().map(|v| vec_to_json(v)).collect())
}

fn parse_mi_data(
    spec: &ProblemSpec,
    grid: &Arc<WeightedGrid>,
) -> Result<Vec<VectorField>, CliError> {
    let raw: Vec<Vec<Vec<[f64; 2]>>> = serde_json::from_value(spec.data.clone())
        .map_err(|e| CliError::Invalid(format!("data: expected field -> fiber -> [re,im] coordinates: {e}")))?;
    if raw.is_empty() {
        return invalid("data: at least one field is required");
    }
    raw.iter()
        .enumerate()
        .map(|(k, field)| {
            if field.len() != grid.len() {
                return invalid(format!(
                    "data[{k}]: {} fiber values for a grid of {} fibers",
                    field.len(),
                    grid.len()
                ));
            }
            let values = field
                .iter()
                .map(|v| v.iter().map(cx).collect())
                .collect();
            VectorField::new(grid.clone(), values).map_err(CliError::from)
        })
        .collect()
}

fn parse_signals(
    spec: &ProblemSpec,
    group: &Arc<FiniteAbelianGroup>,
) -> Result<Vec<Signal>, CliError> {
    let raw: Vec<Vec<[f64; 2]>> = serde_json::from_value(spec.data.clone())
        .map_err(|e| CliError::Invalid(format!("data: expected signal -> [re,im] values: {e}")))?;
    if raw.is_empty() {
        return invalid("data: at least one signal is required");
    }
    raw.iter()
        .map(|vals| {
            Signal::new(group.clone(), vals.iter().map(cx).collect()).map_err(CliError::from)
        })
        .collect()
}

fn parse_decomposition(spec: &ProblemSpec) -> Result<Decomposition, CliError> {
    let d = spec
        .decomposition
        .as_ref()
        .ok_or_else(|| CliError::Invalid("mi-decomposed requires a decomposition".into()))?;
    let basis = match &d.basis {
        None => None,
        Some(rows) => {
            let rows: Vec<Vec<C64>> = rows
                .iter()
                .map(|r| r.iter().map(cx).collect())
                .collect();
            Some(CMat::from_rows(&rows)?)
        }
    };
    Ok(Decomposition::new(d.blocks.clone(), basis)?)
}

fn parse_group(spec: &ProblemSpec) -> Result<Arc<FiniteAbelianGroup>, CliError> {
    let orders = spec
        .group
        .as_ref()
        .ok_or_else(|| CliError::Invalid("this problem kind requires a group".into()))?;
    Ok(Arc::new(FiniteAbelianGroup::new(orders.clone())?))
}

fn parse_lattice(
    elements: &Option<Vec<Vec<u32>>>,
    group: &Arc<FiniteAbelianGroup>,
    name: &str,
) -> Result<Lattice, CliError> {
    let elems = elements
        .as_ref()
        .ok_or_else(|| CliError::Invalid(format!("this problem kind requires {name}")))?;
    Ok(Lattice::new(group.clone(), elems.clone())?)
}

fn required_length(spec: &ProblemSpec) -> Result<usize, CliError> {
    match spec.length {
        Some(l) if l >= 1 => Ok(l),
        Some(_) => invalid("length must be at least 1"),
        None => invalid("this problem kind requires a length"),
    }
}

/// Max entrywise deviation of the generator frame operator from the
/// projection onto the solution range, over all fibers.
fn parseval_max_deviation(sol: &MiSolution) -> f64 {
    let grid = sol.range.grid();
    let n = sol.range.dim();
    let mut max = 0.0f64;
    for fiber in 0..grid.len() {
        for a in 0..n {
            for b in 0..n {
                let s: C64 = sol
                    .generators
                    .iter()
                    .map(|g| g.value(fiber)[a] * g.value(fiber)[b].conj())
                    .sum();
                let p: C64 = sol
                    .range
                    .fiber_basis(fiber)
                    .iter()
                    .map(|v| v[a] * v[b].conj())
                    .sum();
                max = max.max((s - p).norm());
            }
        }
    }
    max
}

/// Weighted sum over fibers of the sampled best-subspace error: an upper
/// bound on the optimum, deterministic under the seed.
fn optimality_probe(
    data: &[VectorField],
    ell: usize,
    samples: usize,
    seed: u64,
) -> Result<f64, CliError> {
    let grid = data[0].grid();
    let mut total = 0.0;
    for fiber in 0..grid.len() {
        let vecs: Vec<Vec<C64>> = data.iter().map(|f| f.value(fiber).to_vec()).collect();
        total += grid.weight(fiber)
            * best_subspace_sampler(&vecs, ell, samples, seed.wrapping_add(fiber as u64))?;
    }
    Ok(total)
}

fn selections_json(sol: &MiSolution) -> J {
    match &sol.selections {
        None => J::Null,
        Some(per_fiber) => J::Arr(
            per_fiber
                .iter()
                .map(|picks| {
                    J::Arr(
                        picks
                            .iter()
                            .map(|p| {
                                J::Obj(vec![
                                    ("component", J::Int(p.component as i64)),
                                    ("index", J::Int(p.index as i64)),
                                    ("value", J::Num(p.value)),
                                ])
                            })
                            .collect(),
                    )
                })
                .collect(),
        ),
    }
}

fn mi_report_fields(
    sol: &MiSolution,
    data: &[VectorField],
    probe: Option<f64>,
) -> Result<Vec<(&'static str, J)>, CliError> {
    let res = residual(data, &sol.range)?;
    Ok(vec![
        ("error", J::Num(sol.error)),
        ("requested_length", J::Int(sol.requested_length as i64)),
        ("achieved_length", J::Int(sol.achieved_length as i64)),
        (
            "eigenvalues",
            J::Arr(
                sol.spectrum
                    .iter()
                    .map(|vals| J::Arr(vals.iter().map(|&v| J::Num(v)).collect()))
                    .collect(),
            ),
        ),
        ("selections", selections_json(sol)),
        (
            "generators",
            J::Arr(sol.generators.iter().map(field_to_json).collect()),
        ),
        ("residual", J::Num(res)),
        ("residual_deviation", J::Num((res - sol.error).abs())),
        ("parseval_max_deviation", J::Num(parseval_max_deviation(sol))),
        ("probe", probe.map(J::Num).unwrap_or(J::Null)),
    ])
}

fn elements_json(elems: &[Vec<u32>]) -> J {
    J::Arr(
        elems
            .iter()
            .map(|e| J::Arr(e.iter().map(|&v| J::Int(v as i64)).collect()))
            .collect(),
    )
}

fn run(args: &Args) -> Result<String, CliError> {
    let text = fs::read_to_string(&args.problem)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", args.problem.display())))?;
    let spec: ProblemSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("parse failure at line {}: {e}", e.line())))?;
    let epsilon = spec.epsilon.unwrap_or(args.epsilon);
    let seed = spec.seed.unwrap_or(args.seed);

    let report = match spec.kind.as_str() {
        "mi" | "mi-decomposed" => {
            let gs = spec
                .grid
                .as_ref()
                .ok_or_else(|| CliError::Invalid("mi problems require a grid".into()))?;
            let grid = Arc::new(WeightedGrid::new(gs.fibers.clone(), gs.weights.clone())?);
            let data = parse_mi_data(&spec, &grid)?;
            let ell = required_length(&spec)?;
            let sol = if spec.kind == "mi" {
                solve_problem1(&data, ell, epsilon)?
            } else {
                let d = parse_decomposition(&spec)?;
                solve_problem2(&data, &d, ell, epsilon)?
            };
            let probe = if args.probe_samples > 0 {
                Some(optimality_probe(&data, ell, args.probe_samples, seed)?)
            } else {
                None
            };
            let mut fields = vec![("kind", J::Str(spec.kind.clone()))];
            fields.extend(mi_report_fields(&sol, &data, probe)?);
            J::Obj(fields)
        }
        "si" | "si-extra" => {
            let group = parse_group(&spec)?;
            let lattice = parse_lattice(&spec.lattice, &group, "a lattice")?;
            let data = parse_signals(&spec, &group)?;
            let ell = required_length(&spec)?;
            let sol = if spec.kind == "si" {
                solve_si(&data, &lattice, ell, epsilon)?
            } else {
                let gamma = parse_lattice(&spec.gamma, &group, "a gamma lattice")?;
                solve_si_extra(&data, &lattice, &gamma, ell, epsilon)?
            };
            let fd = &sol.fiberization;
            let fields = data
                .iter()
                .map(|f| mi_core::fiberize(f, fd))
                .collect::<Result<Vec<_>, _>>()?;
            let probe = if args.probe_samples > 0 {
                Some(optimality_probe(&fields, ell, args.probe_samples, seed)?)
            } else {
                None
            };
            let mut out = vec![("kind", J::Str(spec.kind.clone()))];
            out.extend(mi_report_fields(&sol.mi, &fields, probe)?);
            out.push((
                "time_generators",
                J::Arr(
                    sol.generators
                        .iter()
                        .map(|s| vec_to_json(s.values()))
                        .collect(),
                ),
            ));
            out.push(("wiener_set", elements_json(&wiener_set(&sol.generators))));
            out.push(("section", elements_json(fd.section())));
            out.push(("annihilator", elements_json(fd.annihilator())));
            out.push((
                "section_ids",
                J::Arr(fd.section().iter().map(|w| J::Str(element_id(w))).collect()),
            ));
            J::Obj(out)
        }
        "check-translation-invariance" => {
            let group = parse_group(&spec)?;
            let lattice = parse_lattice(&spec.lattice, &group, "a lattice")?;
            let data = parse_signals(&spec, &group)?;
            let ti = is_translation_invariant(&data, &lattice)?;
            let td = totally_decomposable_check(&data, &lattice)?;
            J::Obj(vec![
                ("kind", J::Str(spec.kind.clone())),
                ("translation_invariant", J::Bool(ti)),
                ("totally_decomposable", J::Bool(td)),
                ("wiener_set", elements_json(&wiener_set(&data))),
            ])
        }
        other => return invalid(format!("unknown problem kind {other:?}")),
    };

    let mut text = report.to_json();
    text.push('\n');
    Ok(text)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(report) => {
            if args.out == "-" {
                print!("{report}");
                ExitCode::SUCCESS
            } else {
                match fs::write(&args.out, &report) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => {
                        eprintln!("error: cannot write {}: {e}", args.out);
                        ExitCode::from(1)
                    }
                }
            }
        }
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: invalid input: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
