//! Executes a [`RunConfig`] end to end and checks it against the oracles.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use h2dist_core::geometry::{assemble_dense, Helmholtz, Kernel, Laplace, TriangleMesh, TriangleQuadRule};
use h2dist_core::h2::{H2Matrix, StorageCensus};
use h2dist_core::linalg::{gemv, relative_error};
use h2dist_core::transport::MessageCensus;
use h2dist_core::Scalar;

use crate::config::{KernelChoice, RunConfig, Variant};
use crate::exec::RayonExecutor;
use crate::pipeline::{run_distributed_setup, run_shared_setup};
use crate::report::{ErrorMetric, Errors, MeshStats, NodeReport, PhaseTraffic, RunReport, Storage, SweepReport, SweepRow, Timing};
use crate::BenchError;

/// `count` vectors with entries uniform in [-1, 1] (both parts for complex
/// scalars), reproducible from `seed`.
pub fn random_vectors<T: Scalar>(n: usize, count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words = vec![0.0; T::WORDS];
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| {
                    words.iter_mut().for_each(|w| *w = rng.gen_range(-1.0..=1.0));
                    T::read_words(&words)
                })
                .collect()
        })
        .collect()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[k]
    } else {
        0.5 * (xs[k - 1] + xs[k])
    }
}

/// Runs `f` `repeats` times and returns the last result with the median time.
fn timed<R>(repeats: usize, mut f: impl FnMut() -> Result<R, BenchError>) -> Result<(R, f64), BenchError> {
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let t = Instant::now();
        last = Some(f()?);
        times.push(t.elapsed().as_secs_f64());
    }
    Ok((last.expect("at least one repeat"), median(times)))
}

/// A finished run with the products it computed.
#[derive(Debug, Clone)]
pub struct Outcome<T> {
    pub report: RunReport,
    pub inputs: Vec<Vec<T>>,
    pub outputs: Vec<Vec<T>>,
}

fn node_report(
    rank: usize,
    indices: usize,
    stored_blocks: usize,
    storage: StorageCensus,
    phases: &[(&str, &MessageCensus)],
) -> NodeReport {
    NodeReport {
        rank,
        indices,
        stored_blocks,
        storage: storage.into(),
        messages: phases.iter().map(|(name, c)| (name.to_string(), PhaseTraffic::from(*c))).collect(),
    }
}

fn compare<T: Scalar>(outputs: &[Vec<T>], reference: impl Fn(&[T]) -> Result<Vec<T>, BenchError>, inputs: &[Vec<T>]) -> Result<ErrorMetric, BenchError> {
    let errs = inputs
        .iter()
        .zip(outputs)
        .map(|(x, y)| Ok(relative_error(y, &reference(x)?)))
        .collect::<Result<Vec<f64>, BenchError>>()?;
    Ok(ErrorMetric::of(&errs))
}

pub fn run_with<K: Kernel + Sync>(cfg: &RunConfig, kernel: &K, force_dense: bool) -> Result<Outcome<K::Scalar>, BenchError> {
    cfg.validate()?;
    let mesh = TriangleMesh::sphere(cfg.level)?;
    let n = mesh.len();
    let params = cfg.params();
    let exec = RayonExecutor::new(cfg.threads).map_err(|e| BenchError::Other(e.to_string()))?;
    let rule = TriangleQuadRule::new(params.rule_order)?;
    let inputs: Vec<Vec<K::Scalar>> = random_vectors(n, cfg.vectors, cfg.seed);

    let mut storage = Storage::default();
    let mut nodes = Vec::new();
    let mut errors = Errors::default();
    let (outputs, setup_s, mvm_s) = match cfg.variant {
        Variant::Dense => {
            let (g, setup_s) = timed(cfg.repeats, || Ok(assemble_dense(&mesh, kernel, &rule, cfg.dense_limit())?))?;
            let (_, mvm_s) = timed(cfg.repeats, || Ok(gemv(&g, &inputs[0])))?;
            (inputs.iter().map(|x| gemv(&g, x)).collect::<Vec<_>>(), setup_s, mvm_s)
        }
        Variant::H2 => {
            let (h, setup_s) = timed(cfg.repeats, || Ok(H2Matrix::from_mesh(&mesh, kernel, &params, &exec)?))?;
            let (_, mvm_s) = timed(cfg.repeats, || Ok(h.mvm(&inputs[0])?))?;
            storage = h.census().into();
            let ys = inputs.iter().map(|x| h.mvm(x)).collect::<Result<Vec<_>, _>>()?;
            (ys, setup_s, mvm_s)
        }
        Variant::Distributed => {
            let (run, setup_s) = timed(cfg.repeats, || Ok(run_distributed_setup(&mesh, kernel, &params, cfg.p, &exec)?))?;
            let ((_, mvm_census), mvm_s) = timed(cfg.repeats, || Ok(run.mvm(&inputs[0])?))?;
            let mut total = StorageCensus::default();
            for (rank, h) in run.nodes.iter().enumerate() {
                total.add(&h.census());
                nodes.push(node_report(
                    rank,
                    h.part.len(),
                    h.stored_blocks(),
                    h.census(),
                    &[("build", &run.build_census[rank]), ("setup", &run.setup_census[rank]), ("mvm", &mvm_census[rank])],
                ));
            }
            storage = total.into();
            let ys = inputs.iter().map(|x| Ok(run.mvm(x)?.0)).collect::<Result<Vec<_>, BenchError>>()?;
            if cfg.verify_sequential {
                let seq = run.sequential(&mesh, kernel, &params, &exec)?;
                errors.sequential = Some(compare(&ys, |x| Ok(seq.mvm(x)?), &inputs)?);
            }
            (ys, setup_s, mvm_s)
        }
        Variant::Shared => {
            let fan_out = cfg.fan_out.into();
            let (run, setup_s) =
                timed(cfg.repeats, || Ok(run_shared_setup(&mesh, kernel, &params, cfg.p, fan_out, &exec)?))?;
            let ((_, mvm_census), mvm_s) = timed(cfg.repeats, || Ok(run.mvm(&inputs[0])?))?;
            let mut total = StorageCensus::default();
            for (rank, h) in run.nodes.iter().enumerate() {
                total.add(&h.census());
                nodes.push(node_report(
                    rank,
                    h.part.len(),
                    h.stored_blocks(),
                    h.census(),
                    &[
                        ("tree", &run.tree_census[rank]),
                        ("build", &run.build_census[rank]),
                        ("setup", &run.setup_census[rank]),
                        ("mvm", &mvm_census[rank]),
                    ],
                ));
            }
            storage = total.into();
            let ys = inputs.iter().map(|x| Ok(run.mvm(x)?.0)).collect::<Result<Vec<_>, BenchError>>()?;
            if cfg.verify_sequential {
                let (seq, _) = run.sequential(&mesh, kernel, &params, &exec)?;
                errors.sequential = Some(compare(&ys, |x| Ok(seq.mvm(x)?), &inputs)?);
            }
            (ys, setup_s, mvm_s)
        }
    };
    if (cfg.verify_dense || force_dense) && cfg.variant != Variant::Dense {
        let g = assemble_dense(&mesh, kernel, &rule, cfg.dense_limit())?;
        errors.dense = Some(compare(&outputs, |x| Ok(gemv(&g, x)), &inputs)?);
    }

    let report = RunReport {
        config: cfg.clone(),
        n,
        mesh: MeshStats::of(&mesh),
        dense_scalars: n * n,
        storage,
        scalars_per_index: storage.total as f64 / n as f64,
        nodes,
        errors,
        timing: Timing { repeats: cfg.repeats, setup_s, mvm_s },
    };
    Ok(Outcome { report, inputs, outputs })
}

/// Fails with [`BenchError::Verification`] when a requested oracle check
/// exceeds its tolerance.
pub fn verify(report: &RunReport) -> Result<(), BenchError> {
    let cfg = &report.config;
    if cfg.verify_dense {
        let e = report.errors.dense.expect("dense oracle ran").max;
        if !(e < cfg.dense_tol) {
            return Err(BenchError::Verification(format!("error vs dense {e:e} is not below {:e}", cfg.dense_tol)));
        }
    }
    if cfg.verify_sequential {
        let e = report.errors.sequential.expect("sequential oracle ran").max;
        if !(e <= cfg.sequential_tol) {
            return Err(BenchError::Verification(format!(
                "error vs sequential {e:e} exceeds {:e}",
                cfg.sequential_tol
            )));
        }
    }
    Ok(())
}

/// Runs one configuration without checking tolerances.
pub fn execute(cfg: &RunConfig) -> Result<RunReport, BenchError> {
    Ok(match cfg.kernel {
        KernelChoice::Laplace => run_with(cfg, &Laplace, false)?.report,
        KernelChoice::Helmholtz => run_with(cfg, &Helmholtz { wavenumber: cfg.kappa }, false)?.report,
    })
}

/// Runs and verifies one configuration.
pub fn run(cfg: &RunConfig) -> Result<RunReport, BenchError> {
    let report = execute(cfg)?;
    verify(&report)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Level,
    M,
    P,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Level => "level",
            Axis::M => "m",
            Axis::P => "p",
        }
    }

    fn apply(self, base: &RunConfig, value: usize) -> Result<RunConfig, BenchError> {
        let mut c = base.clone();
        match self {
            Axis::Level => {
                c.level = u32::try_from(value).map_err(|_| BenchError::Usage(format!("level {value} is too large")))?
            }
            Axis::M => c.m = value,
            Axis::P => c.p = value,
        }
        Ok(c)
    }
}

/// One run per value of `axis`. Sweeps over `m` compare against the dense
/// matrix and require the error to decrease strictly; sweeps over `p`
/// require every row's products to match the first row's within the
/// sequential tolerance.
pub fn sweep(base: &RunConfig, axis: Axis, values: &[usize]) -> Result<SweepReport, BenchError> {
    if values.is_empty() {
        return Err(BenchError::Usage("a sweep needs at least one value".into()));
    }
    match base.kernel {
        KernelChoice::Laplace => sweep_with(base, axis, values, &Laplace),
        KernelChoice::Helmholtz => sweep_with(base, axis, values, &Helmholtz { wavenumber: base.kappa }),
    }
}

fn sweep_with<K: Kernel + Sync>(base: &RunConfig, axis: Axis, values: &[usize], kernel: &K) -> Result<SweepReport, BenchError> {
    let mut rows: Vec<SweepRow> = Vec::new();
    let mut runs = Vec::new();
    let mut first: Option<Vec<Vec<K::Scalar>>> = None;
    for &value in values {
        let cfg = axis.apply(base, value)?;
        let out = run_with(&cfg, kernel, axis == Axis::M && cfg.variant != Variant::Dense)?;
        verify(&out.report)?;
        let r = &out.report;
        let deviation = match (axis, &first) {
            (Axis::P, Some(f)) => Some(
                f.iter().zip(&out.outputs).map(|(a, b)| relative_error(b, a)).fold(0.0, f64::max),
            ),
            (Axis::P, None) => Some(0.0),
            _ => None,
        };
        if first.is_none() {
            first = Some(out.outputs.clone());
        }
        rows.push(SweepRow {
            value: value as f64,
            variant: format!("{:?}", cfg.variant).to_lowercase(),
            level: cfg.level,
            n: r.n,
            m: cfg.m,
            p: cfg.p,
            storage_total: r.storage.total,
            scalars_per_index: r.scalars_per_index,
            growth: rows.last().map(|prev| r.scalars_per_index / prev.scalars_per_index),
            max_stored_blocks: r.max_stored_blocks(),
            messages: r.total_messages(),
            bytes: r.total_bytes(),
            error_dense: r.errors.dense.map(|e| e.max),
            error_sequential: r.errors.sequential.map(|e| e.max),
            deviation_from_first: deviation,
            setup_s: r.timing.setup_s,
            mvm_s: r.timing.mvm_s,
        });
        runs.push(out.report);
    }
    let report = SweepReport { axis: axis.name().into(), rows, runs };
    check_sweep(&report, base)?;
    Ok(report)
}

fn check_sweep(report: &SweepReport, base: &RunConfig) -> Result<(), BenchError> {
    match report.axis.as_str() {
        "m" => {
            for w in report.rows.windows(2) {
                if let (Some(a), Some(b)) = (w[0].error_dense, w[1].error_dense) {
                    if !(b < a) {
                        return Err(BenchError::Verification(format!(
                            "error did not decrease from m={} ({a:e}) to m={} ({b:e})",
                            w[0].m, w[1].m
                        )));
                    }
                }
            }
        }
        "p" => {
            for row in &report.rows {
                let d = row.deviation_from_first.unwrap_or(0.0);
                if !(d <= base.sequential_tol) {
                    return Err(BenchError::Verification(format!(
                        "products at p={} deviate by {d:e} from p={}",
                        row.p, report.rows[0].p
                    )));
                }
            }
        }
        _ => {}
    }
    Ok(())
}
