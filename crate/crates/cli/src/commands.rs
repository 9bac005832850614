use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use hermitizer::bgosc::{compare_spectra, BGParams, GridSpec};
use hermitizer::chains::{metrics_from_dyson, validate};
use hermitizer::conjugation::{is_quasi_hermitian, MetricContext};
use hermitizer::evolve::{physical_norm, propagate, EvolutionSpec, Method};
use hermitizer::lattice::{all_representations, census, enumerate_paths, representation, Choice};
use hermitizer::matkernel::spectral_distance;
use hermitizer::scoring::{rank, Weights};
use hermitizer::toymodel::{
    self, build, verify_fixtures, ToyParams, DECLARED_N_PAR, GENERICITY_MARGIN,
};
use hermitizer::{ComplexMatrix, FactorOrder, Tolerance, C64};

use crate::error::{CliError, CliResult};
use crate::model::{encode_matrix, ChainSource, DeclaredNPar, Model, ModelFile};
use crate::report::{
    entry, representation_report, score_table_csv, score_table_text, PairingCheck, VerifyReport,
};

pub const TOLERANCE_ENV: &str = "HERMITIZER_TOL";

#[derive(Debug, Parser)]
#[command(
    name = "hermitizer",
    version,
    about = "Representations of quasi-Hermitian Hamiltonians with factorized Dyson maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Rk4,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the metric chain and the quasi-Hermiticity of every representation
    Verify { model: PathBuf },

    /// Count lattice nodes and Hermitization paths
    Paths {
        model: PathBuf,
        /// List every path
        #[arg(long)]
        list: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },

    /// Physical Hamiltonian and metric at metric depth k (all depths if omitted)
    Transform {
        model: PathBuf,
        #[arg(long)]
        k: Option<usize>,
    },

    /// Complexity scores of all representations, best first
    Score {
        model: PathBuf,
        /// Weights for zero count, non-Hermiticity and log condition number
        #[arg(long, value_delimiter = ',', num_args = 1)]
        weights: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },

    /// Generate the three-level example model and check its closed forms
    Toy {
        #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
        r: f64,
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        t: f64,
        /// Write the model file here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Check this many random parameter points instead
        #[arg(long)]
        sweep: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Evolve a state in one representation and print the trace as CSV
    Evolve {
        model: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t_final: f64,
        /// Working-space state: `1,0,0` (real) or `[[re,im],...]`
        #[arg(long, allow_hyphen_values = true)]
        state: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },

    /// Low spectra of the complex anharmonic oscillator and its double-well partner
    Bg {
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        g: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        j: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        eta: f64,
        #[arg(long, default_value_t = 12.0)]
        grid_l: f64,
        #[arg(long, default_value_t = 2000)]
        grid_n: usize,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

/// What a command produced; `code` is 0 or 1 (a check failed).
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            ..Self::default()
        }
    }
}

pub fn tolerance_from_env(value: Option<&str>) -> CliResult<Tolerance> {
    let Some(raw) = value else {
        return Ok(Tolerance::default());
    };
    let rel_eq: f64 = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Schema(format!("{TOLERANCE_ENV}={raw} is not a number")))?;
    Tolerance::default()
        .with_rel_eq(rel_eq)
        .map_err(|e| CliError::Schema(format!("{TOLERANCE_ENV}: {e}")))
}

fn json<T: Serialize>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn load(path: &Path, tol: &Tolerance) -> CliResult<Model> {
    ModelFile::load(path)?.decode(tol)
}

pub fn run(cli: Cli, tol: &Tolerance) -> CliResult<Outcome> {
    match cli.command {
        Command::Verify { model } => verify(&load(&model, tol)?, tol),
        Command::Paths {
            model,
            list,
            format,
        } => paths(&load(&model, tol)?, list, format),
        Command::Transform { model, k } => transform(&load(&model, tol)?, k, tol),
        Command::Score {
            model,
            weights,
            format,
        } => score_cmd(&load(&model, tol)?, weights, format, tol),
        Command::Toy {
            r,
            s,
            t,
            out,
            sweep,
            seed,
        } => match sweep {
            Some(n) => toy_sweep(n, seed, tol),
            None => toy(ToyParams::new(r, s, t)?, out.as_deref(), tol),
        },
        Command::Evolve {
            model,
            k,
            t_final,
            state,
            samples,
            method,
            step,
        } => {
            let method = match method {
                MethodArg::Exact => Method::ExactDiagonalization,
                MethodArg::Rk4 => Method::Rk4 { step },
            };
            evolve(
                &load(&model, tol)?,
                k,
                t_final,
                &parse_state(&state)?,
                samples,
                method,
                tol,
            )
        }
        Command::Bg {
            g,
            j,
            eta,
            grid_l,
            grid_n,
            levels,
            format,
        } => bg(
            BGParams::new(g, j, eta)?,
            GridSpec::new(grid_l, grid_n)?,
            levels,
            format,
            tol,
        ),
    }
}

fn verify(model: &Model, tol: &Tolerance) -> CliResult<Outcome> {
    let certificate = match &model.source {
        ChainSource::Dyson(chain) => validate(&metrics_from_dyson(chain, tol)?, tol),
        ChainSource::Metric { certificate, .. } => certificate.clone(),
    };
    let mut pairings = Vec::new();
    if certificate.passed {
        let chain = model.chain()?;
        for rep in all_representations(model.hamiltonian()?, chain, tol)? {
            let ctx = MetricContext::new(rep.physical_metric.clone(), tol)?;
            let qh = is_quasi_hermitian(&rep.physical_hamiltonian, &ctx, tol);
            pairings.push(PairingCheck {
                metric_depth: rep.metric_depth,
                residual: qh.residual,
                passed: qh.passed,
            });
        }
    }
    let passed = certificate.passed && pairings.iter().all(|p| p.passed);
    let report = VerifyReport {
        chain: certificate,
        pairings,
        passed,
    };
    let mut out = Outcome::ok(json(&report)?);
    if !passed {
        out.code = 1;
        out.stderr = "verification failed\n".into();
    }
    Ok(out)
}

fn choice_letters(choices: &[Choice]) -> String {
    choices
        .iter()
        .map(|c| match c {
            Choice::Amend => 'A',
            Choice::Dyson => 'D',
        })
        .collect()
}

#[derive(Serialize)]
struct PathEntry {
    choices: String,
    superscripts: Vec<usize>,
    metric_depth: usize,
}

#[derive(Serialize)]
struct PathsReport {
    n_factors: usize,
    node_count: usize,
    path_count: u64,
    per_terminal: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paths: Option<Vec<PathEntry>>,
}

fn model_factor_count(model: &Model) -> usize {
    match &model.source {
        ChainSource::Dyson(c) => c.n_factors(),
        ChainSource::Metric { chain, .. } => chain.n_factors(),
    }
}

fn paths(model: &Model, list: bool, format: Format) -> CliResult<Outcome> {
    let all = enumerate_paths(model_factor_count(model))?;
    let c = census(&all)?;
    let entries: Vec<PathEntry> = all
        .iter()
        .map(|p| PathEntry {
            choices: choice_letters(&p.choices()),
            superscripts: p.superscripts(),
            metric_depth: p.metric_depth(),
        })
        .collect();
    let summary = format!(
        "{} nodes, {} paths, terminals: {}",
        c.node_count,
        c.path_count,
        c.per_terminal
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("/")
    );
    let text = match format {
        Format::Json => json(&PathsReport {
            n_factors: c.n_factors,
            node_count: c.node_count,
            path_count: c.path_count,
            per_terminal: c.per_terminal,
            paths: list.then_some(entries),
        })?,
        Format::Text => {
            let mut s = summary + "\n";
            if list {
                for e in &entries {
                    s.push_str(&format!(
                        "{}  {:?}  k={}\n",
                        e.choices, e.superscripts, e.metric_depth
                    ));
                }
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("choices,superscripts,metric_depth\n");
            for e in &entries {
                let sup: Vec<String> = e.superscripts.iter().map(|v| v.to_string()).collect();
                s.push_str(&format!(
                    "{},{},{}\n",
                    e.choices,
                    sup.join(" "),
                    e.metric_depth
                ));
            }
            s
        }
    };
    Ok(Outcome::ok(text))
}

fn transform(model: &Model, k: Option<usize>, tol: &Tolerance) -> CliResult<Outcome> {
    let text = match k {
        Some(k) => {
            let rep = representation(model.hamiltonian()?, model.chain()?, k, tol)?;
            json(&entry(&rep, model.n_par(k), tol)?)?
        }
        None => json(&representation_report(model, tol)?)?,
    };
    Ok(Outcome::ok(text))
}

fn score_cmd(
    model: &Model,
    weights: Option<Vec<f64>>,
    format: Format,
    tol: &Tolerance,
) -> CliResult<Outcome> {
    let weights = match weights.as_deref() {
        None => Weights::default(),
        Some(&[a, b, c]) => Weights::new(a, b, c)?,
        Some(_) => {
            return Err(CliError::Schema(
                "--weights takes exactly three numbers".into(),
            ))
        }
    };
    let report = representation_report(model, tol)?;
    let scores: Vec<_> = report
        .representations
        .iter()
        .map(|e| e.score.clone())
        .collect();
    let ranked = rank(&scores, &weights)?;
    let text = match format {
        Format::Text => score_table_text(&ranked),
        Format::Csv => score_table_csv(&ranked),
        Format::Json => json(&ranked)?,
    };
    Ok(Outcome::ok(text))
}

pub fn toy_model_file(params: &ToyParams) -> ModelFile {
    let target =
        ComplexMatrix::from_real_diagonal(&toymodel::TARGET_SPECTRUM).expect("finite diagonal");
    ModelFile {
        dimension: 3,
        hamiltonian: None,
        target_hamiltonian: Some(encode_matrix(&target)),
        dyson_factors: Some(
            toymodel::factors(params)
                .iter()
                .map(encode_matrix)
                .collect(),
        ),
        metric_factors: None,
        factor_order: FactorOrder::Descending,
        declared_n_par: Some(DeclaredNPar::PerDepth(DECLARED_N_PAR.to_vec())),
    }
}

fn toy(params: ToyParams, out: Option<&Path>, tol: &Tolerance) -> CliResult<Outcome> {
    let inst = build(params, tol)?;
    let fixtures = verify_fixtures(&inst, tol);
    let model = toy_model_file(&params).to_json()? + "\n";
    let mut outcome = match out {
        Some(path) => {
            fs::write(path, model)?;
            Outcome::ok(json(&fixtures)?)
        }
        None => {
            let mut o = Outcome::ok(model);
            for e in &fixtures.entries {
                o.stderr
                    .push_str(&format!("{:<20} {:.3e}\n", e.name, e.residual));
            }
            o
        }
    };
    if !fixtures.all_passed {
        outcome.code = 1;
        outcome.stderr.push_str("fixture check failed\n");
    }
    if !params.is_generic(GENERICITY_MARGIN) {
        outcome
            .stderr
            .push_str("note: parameters are not generic, zero counts may differ\n");
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct SweepReport {
    seed: u64,
    points: usize,
    generic_points: usize,
    max_spectral_error: f64,
    max_fixture_residual: f64,
    zero_count_mismatches: usize,
    passed: bool,
}

fn toy_sweep(points: usize, seed: u64, tol: &Tolerance) -> CliResult<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target: Vec<C64> = toymodel::TARGET_SPECTRUM
        .iter()
        .map(|&x| C64::new(x, 0.0))
        .collect();
    let mut report = SweepReport {
        seed,
        points,
        generic_points: 0,
        max_spectral_error: 0.0,
        max_fixture_residual: 0.0,
        zero_count_mismatches: 0,
        passed: true,
    };
    for _ in 0..points {
        let p = ToyParams::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        )?;
        let inst = build(p, tol)?;
        let ev = inst.hamiltonian.eigenvalues()?;
        report.max_spectral_error = report
            .max_spectral_error
            .max(spectral_distance(&ev, &target));
        for e in verify_fixtures(&inst, tol).entries {
            report.max_fixture_residual = report.max_fixture_residual.max(e.residual);
        }
        if p.is_generic(GENERICITY_MARGIN) {
            report.generic_points += 1;
            let zeros: Vec<usize> = inst
                .representations(tol)?
                .iter()
                .map(|r| r.physical_hamiltonian.count_zeros(tol.zero_abs))
                .collect();
            if zeros != [6, 4, 2, 0] {
                report.zero_count_mismatches += 1;
            }
        }
    }
    report.passed = report.max_spectral_error < 1e-9
        && report.max_fixture_residual <= tol.rel_eq
        && report.zero_count_mismatches == 0;
    let code = if report.passed { 0 } else { 1 };
    Ok(Outcome {
        stdout: json(&report)?,
        code,
        ..Outcome::default()
    })
}

pub fn parse_state(raw: &str) -> CliResult<Vec<C64>> {
    let raw = raw.trim();
    if raw.starts_with('[') {
        let value: serde_json::Value = serde_json::from_str(raw)?;
        let items = value
            .as_array()
            .ok_or_else(|| CliError::Schema("state must be an array".into()))?;
        items
            .iter()
            .map(|item| match item {
                serde_json::Value::Number(n) => Ok(C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
                serde_json::Value::Array(pair) if pair.len() == 2 => {
                    let re = pair[0].as_f64();
                    let im = pair[1].as_f64();
                    match (re, im) {
                        (Some(re), Some(im)) => Ok(C64::new(re, im)),
                        _ => Err(CliError::Schema("state entries must be numbers".into())),
                    }
                }
                _ => Err(CliError::Schema(
                    "state entries must be numbers or [re, im] pairs".into(),
                )),
            })
            .collect()
    } else {
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map(|x| C64::new(x, 0.0))
                    .map_err(|_| CliError::Schema(format!("bad state entry {s:?}")))
            })
            .collect()
    }
}

fn evolve(
    model: &Model,
    k: usize,
    t_final: f64,
    state: &[C64],
    samples: usize,
    method: Method,
    tol: &Tolerance,
) -> CliResult<Outcome> {
    let h = model.hamiltonian()?;
    if state.len() != h.dim() {
        return Err(CliError::Schema(format!(
            "state has {} entries, model dimension is {}",
            state.len(),
            h.dim()
        )));
    }
    let rep = representation(h, model.chain()?, k, tol)?;
    let spec = EvolutionSpec {
        hamiltonian: rep.physical_hamiltonian.clone(),
        metric: rep.physical_metric.clone(),
        initial_state: rep.transform.mul_vec(state),
        t_final,
        n_samples: samples,
        method,
    };
    let trace = propagate(&spec, tol)?;
    // energy expectation in the physical inner product
    let theta_h = &rep.physical_metric * &rep.physical_hamiltonian;
    let mut csv = String::from("time,norm,expectation_re,expectation_im\n");
    for ((t, s), n) in trace
        .times
        .iter()
        .zip(&trace.states)
        .zip(&trace.physical_norms)
    {
        let e: C64 = s
            .iter()
            .zip(theta_h.mul_vec(s))
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            / *n;
        csv.push_str(&format!("{t},{n:e},{:e},{:e}\n", e.re, e.im));
    }
    debug_assert!(
        (physical_norm(&spec.metric, &trace.states[0]) - trace.physical_norms[0]).abs()
            <= f64::EPSILON
    );
    Ok(Outcome {
        stdout: csv,
        stderr: format!("max norm drift {:.3e}\n", trace.max_norm_drift),
        code: 0,
    })
}

fn bg(
    params: BGParams,
    grid: GridSpec,
    levels: usize,
    format: Format,
    tol: &Tolerance,
) -> CliResult<Outcome> {
    let report = compare_spectra(&params, &grid, levels, tol)?;
    let mut outcome = Outcome::ok(match format {
        Format::Json => json(&report)?,
        Format::Csv | Format::Text => {
            let mut s = String::from("level,bg_re,bg_im,q,imaginary_ratio,relative_gap\n");
            for i in 0..report.bg_levels.len() {
                s.push_str(&format!(
                    "{i},{:e},{:e},{:e},{:e},{:e}\n",
                    report.bg_levels[i].re,
                    report.bg_levels[i].im,
                    report.q_levels[i],
                    report.imaginary_ratios[i],
                    report.relative_gaps[i]
                ));
            }
            s
        }
    });
    if !report.supported {
        outcome.stderr = format!(
            "warning: |g| = {} is outside the supported range, results are unverified\n",
            params.g.abs()
        );
    }
    Ok(outcome)
}
