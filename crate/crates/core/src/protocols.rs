//! Multi-step protocol runners: iterative correction with doubled angles,
//! iterative retries with fresh program copies, the single-shot gate
//! array, and the preprocess-then-run pipeline.
//!
//! Every runner enumerates its branch tree exactly. Branch magnitudes of
//! the in-scope schemes are dyadic, so success probabilities and failure
//! histograms are accumulated as [`ExactRational`]s; floating point is
//! used only for residual fidelities. Monte-Carlo mode additionally
//! samples heralded outcomes with a seeded generator and reports the
//! empirical success rate next to the exact value.

use std::collections::BTreeMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num_complex::Complex64;

use crate::analysis::{p_multicopy, ExactRational};
use crate::error::{Error, Result};
use crate::preprocess::{
    build_allocation, measurement_cascade, synthesize_permutation, CascadeBranch,
};
use crate::processor::{
    cnot_processor, hzb_u1_processor, run_processor, single_shot_processor, ProcessorBranch,
};
use crate::programs::{basic_program, copies_program};
use crate::statevec::{StateVector, NORM_TOL};

/// Seeded deterministic random stream; the same seed reproduces the same
/// trial transcript.
#[derive(Clone, Debug)]
pub struct TrialRng {
    seed: u64,
    rng: ChaCha8Rng,
}

impl TrialRng {
    pub fn new(seed: u64) -> Self {
        TrialRng {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// How a runner executes: exact branch enumeration only, or enumeration
/// plus seeded sampling of `trials` heralded runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

/// Outcome record of one protocol run.
#[derive(Clone, Debug)]
pub struct ProtocolResult {
    /// Probability that the protocol heralds success, as an exact dyadic
    /// rational from branch enumeration.
    pub success_probability_exact: ExactRational,
    /// Fraction of sampled trials that heralded success; `None` in exact
    /// mode.
    pub empirical_rate: Option<f64>,
    pub trials: u64,
    /// Smallest fidelity between a success-branch residual and the target
    /// `U(theta)|data>`, across all success branches.
    pub residual_fidelity_on_success: f64,
    /// Probability of each residual rotation `U(m theta)` on failure,
    /// keyed by the integer `m`.
    pub failure_rotation_histogram: BTreeMap<i64, ExactRational>,
}

impl ProtocolResult {
    /// Success probability plus all failure weights; 1 for a lossless
    /// enumeration.
    pub fn total_probability(&self) -> ExactRational {
        self.failure_rotation_histogram
            .values()
            .fold(self.success_probability_exact.clone(), |acc, p| acc + p.clone())
    }
}

/// Iterative correction: step `m` consumes the single-qubit program with
/// angle `2^{m-1} theta` through the controlled-NOT processor and stops on
/// the first outcome 0. Succeeds with probability `1 - 1/2^n`, failing
/// only when all `n` steps herald the wrong direction, which leaves the
/// data rotated by `-(2^n - 1) theta`.
pub fn run_vmc_iterative(
    theta: f64,
    n: u32,
    data: &StateVector,
    mode: Mode,
) -> Result<ProtocolResult> {
    validate_steps(n)?;
    validate_data(data)?;
    let cnot = cnot_processor();
    let target = data.apply_u1(0, theta)?;

    let mut success = ExactRational::zero();
    let mut min_fidelity = f64::INFINITY;
    let mut state = data.clone();
    for step in 1..=n {
        let program = basic_program(doubling_angle(theta, step));
        let branches = run_processor(&cnot, &state, &program)?;
        expect_uniform(&branches, 2)?;
        let fidelity = branches[0].residual.fidelity_up_to_global_phase(&target)?;
        min_fidelity = min_fidelity.min(fidelity);
        success += &ExactRational::dyadic(1, step);
        state = branches[1].residual.clone();
    }
    let mut histogram = BTreeMap::new();
    histogram.insert(-(((1u64 << n) - 1) as i64), ExactRational::dyadic(1, n));

    let (empirical_rate, trials) = match mode {
        Mode::Exact => (None, 0),
        Mode::MonteCarlo { trials, seed } => {
            let mut rng = TrialRng::new(seed);
            let mut hits = 0u64;
            for _ in 0..trials {
                let mut state = data.clone();
                for step in 1..=n {
                    let program = basic_program(doubling_angle(theta, step));
                    let branches = run_processor(&cnot, &state, &program)?;
                    let branch = sample_branch(&branches, rng.uniform());
                    if branch.operator.outcome == 0 {
                        hits += 1;
                        break;
                    }
                    state = branch.residual.clone();
                }
            }
            (Some(hits as f64 / trials as f64), trials)
        }
    };

    Ok(ProtocolResult {
        success_probability_exact: success,
        empirical_rate,
        trials,
        residual_fidelity_on_success: min_fidelity,
        failure_rotation_histogram: histogram,
    })
}

/// Iterative retries: every step consumes a fresh copy of the
/// single-qubit program through the controlled-NOT processor. The applied
/// rotation performs a fair +-theta walk; the protocol stops at the first
/// passage to net `+theta` or when the `n` copies are exhausted.
pub fn run_multicopy_iterative(
    theta: f64,
    n: u32,
    data: &StateVector,
    mode: Mode,
) -> Result<ProtocolResult> {
    validate_steps(n)?;
    validate_data(data)?;
    let cnot = cnot_processor();
    let program = basic_program(theta);
    let target = data.apply_u1(0, theta)?;

    let mut success = ExactRational::zero();
    let mut min_fidelity = f64::INFINITY;
    let mut histogram: BTreeMap<i64, ExactRational> = BTreeMap::new();
    let mut stack = vec![(data.clone(), 0i64, 0u32)];
    while let Some((state, net, steps)) = stack.pop() {
        if net == 1 {
            let fidelity = state.fidelity_up_to_global_phase(&target)?;
            min_fidelity = min_fidelity.min(fidelity);
            success += &ExactRational::dyadic(1, steps);
            continue;
        }
        if steps == n {
            let weight = ExactRational::dyadic(1, steps);
            *histogram.entry(net).or_insert_with(ExactRational::zero) += &weight;
            continue;
        }
        let branches = run_processor(&cnot, &state, &program)?;
        expect_uniform(&branches, 2)?;
        stack.push((branches[0].residual.clone(), net + 1, steps + 1));
        stack.push((branches[1].residual.clone(), net - 1, steps + 1));
    }

    let (empirical_rate, trials) = match mode {
        Mode::Exact => (None, 0),
        Mode::MonteCarlo { trials, seed } => {
            let mut rng = TrialRng::new(seed);
            let mut hits = 0u64;
            for _ in 0..trials {
                let mut state = data.clone();
                let mut net = 0i64;
                for _ in 0..n {
                    let branches = run_processor(&cnot, &state, &program)?;
                    let branch = sample_branch(&branches, rng.uniform());
                    net += if branch.operator.outcome == 0 { 1 } else { -1 };
                    state = branch.residual.clone();
                    if net == 1 {
                        hits += 1;
                        break;
                    }
                }
            }
            (Some(hits as f64 / trials as f64), trials)
        }
    };

    Ok(ProtocolResult {
        success_probability_exact: success,
        empirical_rate,
        trials,
        residual_fidelity_on_success: min_fidelity,
        failure_rotation_histogram: histogram,
    })
}

/// Single-shot execution: the whole copies register passes once through
/// the Hamming-weight-matched gate array. Outcomes whose column maps step
/// the weight up by one herald success; the rest leave the data rotated by
/// a non-positive multiple of theta recorded in the histogram.
pub fn run_single_shot(
    theta: f64,
    n: u32,
    data: &StateVector,
    mode: Mode,
) -> Result<ProtocolResult> {
    validate_steps(n)?;
    validate_data(data)?;
    let spec = single_shot_processor(n)?;
    let program = copies_program(theta, n)?;
    let branches = run_processor(&spec, data, &program)?;
    expect_uniform(&branches, 1usize << n)?;
    let target = data.apply_u1(0, theta)?;

    let mut success_count = 0u64;
    let mut min_fidelity = f64::INFINITY;
    let mut histogram: BTreeMap<i64, ExactRational> = BTreeMap::new();
    let mut rotation = vec![0i64; 1 << n];
    for branch in &branches {
        let outcome = branch.operator.outcome;
        let m = spec.one_map()[outcome].count_ones() as i64 - outcome.count_ones() as i64;
        rotation[outcome] = m;
        if m == 1 {
            success_count += 1;
            let fidelity = branch.residual.fidelity_up_to_global_phase(&target)?;
            min_fidelity = min_fidelity.min(fidelity);
        } else {
            let weight = ExactRational::dyadic(1, n);
            *histogram.entry(m).or_insert_with(ExactRational::zero) += &weight;
        }
    }

    let (empirical_rate, trials) = match mode {
        Mode::Exact => (None, 0),
        Mode::MonteCarlo { trials, seed } => {
            let mut rng = TrialRng::new(seed);
            let dim = 1usize << n;
            let mut hits = 0u64;
            for _ in 0..trials {
                // Outcomes were verified uniform above, so the inverse CDF
                // is a single multiply.
                let outcome = ((rng.uniform() * dim as f64) as usize).min(dim - 1);
                if rotation[outcome] == 1 {
                    hits += 1;
                }
            }
            (Some(hits as f64 / trials as f64), trials)
        }
    };

    Ok(ProtocolResult {
        success_probability_exact: ExactRational::dyadic(success_count, n),
        empirical_rate,
        trials,
        residual_fidelity_on_success: min_fidelity,
        failure_rotation_histogram: histogram,
    })
}

/// Preprocess-then-run pipeline: permutes `2^x - 1` program copies,
/// cascades measurements into some level-`s` ramp program, then runs the
/// shift-register processor with it. Success is heralded by any processor
/// outcome other than `2^s - 1`.
pub fn run_preprocess_pipeline(
    theta: f64,
    x: u32,
    data: &StateVector,
    mode: Mode,
) -> Result<ProtocolResult> {
    validate_data(data)?;
    let plan = build_allocation(x)?;
    let permutation = synthesize_permutation(&plan)?;
    let copies = copies_program(theta, plan.num_copies() as u32)?;
    let permuted = permutation.apply(&copies)?;
    let cascade = measurement_cascade(&permuted, &plan)?;
    let target = data.apply_u1(0, theta)?;

    let mut success = ExactRational::zero();
    let mut min_fidelity = f64::INFINITY;
    let mut histogram: BTreeMap<i64, ExactRational> = BTreeMap::new();
    let mut stage_runs: Vec<Vec<ProcessorBranch>> = Vec::with_capacity(cascade.len());
    for stage in &cascade {
        verify_cascade_state(theta, stage)?;
        let processor = hzb_u1_processor(stage.level)?;
        let runs = run_processor(&processor, data, &stage.program_state)?;
        expect_uniform(&runs, 1usize << stage.level)?;
        let failure_outcome = (1usize << stage.level) - 1;
        for run in &runs {
            let weight = stage.probability.clone() * ExactRational::dyadic(1, stage.level);
            if run.operator.outcome != failure_outcome {
                let fidelity = run.residual.fidelity_up_to_global_phase(&target)?;
                min_fidelity = min_fidelity.min(fidelity);
                success += &weight;
            } else {
                let m = -((1i64 << stage.level) - 1);
                *histogram.entry(m).or_insert_with(ExactRational::zero) += &weight;
            }
        }
        stage_runs.push(runs);
    }

    let (empirical_rate, trials) = match mode {
        Mode::Exact => (None, 0),
        Mode::MonteCarlo { trials, seed } => {
            let mut rng = TrialRng::new(seed);
            let stage_cdf: Vec<f64> = cascade
                .iter()
                .scan(0.0, |acc, b| {
                    *acc += b.probability.to_f64();
                    Some(*acc)
                })
                .collect();
            let mut hits = 0u64;
            for _ in 0..trials {
                let draw = rng.uniform();
                let index = stage_cdf
                    .iter()
                    .position(|&edge| draw < edge)
                    .unwrap_or(cascade.len() - 1);
                let failure_outcome = (1usize << cascade[index].level) - 1;
                let run = sample_branch(&stage_runs[index], rng.uniform());
                if run.operator.outcome != failure_outcome {
                    hits += 1;
                }
            }
            (Some(hits as f64 / trials as f64), trials)
        }
    };

    Ok(ProtocolResult {
        success_probability_exact: success,
        empirical_rate,
        trials,
        residual_fidelity_on_success: min_fidelity,
        failure_rotation_histogram: histogram,
    })
}

/// One row of the scheme-equivalence table: all entries are exact, and
/// they agree for every `n` where all schemes are defined.
#[derive(Clone, Debug)]
pub struct EquivalenceRow {
    pub n: u32,
    pub p_iterative: ExactRational,
    pub p_single_shot: ExactRational,
    /// Present only when `n = 2^x - 1` for a supported `x`.
    pub p_pipeline: Option<ExactRational>,
    pub p_formula: ExactRational,
}

/// Computes the equivalence table over the requested (odd) copy counts.
/// Outcome statistics are data-independent, so the rows are computed with
/// a fixed balanced data state.
pub fn scheme_equivalence_table(theta: f64, ns: &[u32]) -> Result<Vec<EquivalenceRow>> {
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let data = StateVector::from_raw(1, vec![Complex64::new(w, 0.0), Complex64::new(w, 0.0)]);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        if n == 0 || n % 2 == 0 {
            return Err(Error::OutOfRange {
                what: "table row copies (must be odd)",
                got: n as u64,
                min: 1,
                max: u64::MAX,
            });
        }
        let p_iterative =
            run_multicopy_iterative(theta, n, &data, Mode::Exact)?.success_probability_exact;
        let p_single_shot =
            run_single_shot(theta, n, &data, Mode::Exact)?.success_probability_exact;
        let p_pipeline = if (n + 1).is_power_of_two() && n < 16 {
            let x = (n + 1).trailing_zeros();
            Some(run_preprocess_pipeline(theta, x, &data, Mode::Exact)?.success_probability_exact)
        } else {
            None
        };
        rows.push(EquivalenceRow {
            n,
            p_iterative,
            p_single_shot,
            p_pipeline,
            p_formula: p_multicopy(n)?,
        });
    }
    Ok(rows)
}

fn doubling_angle(theta: f64, step: u32) -> f64 {
    (1u64 << (step - 1)) as f64 * theta
}

fn validate_steps(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "program copies",
            got: 0,
            min: 1,
            max: crate::statevec::MAX_QUBITS as u64,
        });
    }
    Ok(())
}

fn validate_data(data: &StateVector) -> Result<()> {
    if data.num_qubits() != 1 {
        return Err(Error::DataNotSingleQubit(data.num_qubits()));
    }
    Ok(())
}

/// All heralded outcomes of the in-scope processors are uniform; anything
/// else means a broken construction.
fn expect_uniform(branches: &[ProcessorBranch], count: usize) -> Result<()> {
    if branches.len() != count {
        return Err(Error::NonUniformOutcome(branches.len() as f64));
    }
    let expected = (count as f64).recip();
    for branch in branches {
        if (branch.probability - expected).abs() > NORM_TOL {
            return Err(Error::NonUniformOutcome(branch.probability));
        }
    }
    Ok(())
}

fn sample_branch(branches: &[ProcessorBranch], draw: f64) -> &ProcessorBranch {
    let mut accumulated = 0.0;
    for branch in branches {
        accumulated += branch.probability;
        if draw < accumulated {
            return branch;
        }
    }
    branches.last().expect("processor runs have outcomes")
}

/// Rechecks a cascade branch against the explicit ramp state
/// `e^{-i c theta} 2^{-s/2} sum_t e^{-i t theta}|t>` now that theta is in
/// hand; the inner product must be 1 including phase.
fn verify_cascade_state(theta: f64, stage: &CascadeBranch) -> Result<()> {
    let dim = 1usize << stage.level;
    let scale = (dim as f64).sqrt().recip();
    let amps = (0..dim)
        .map(|t| Complex64::cis(-((stage.global_phase_exponent + t) as f64) * theta) * scale)
        .collect();
    let expected = StateVector::from_raw(stage.level as usize, amps);
    let agreement = expected.inner(&stage.program_state)?;
    if (agreement - Complex64::ONE).norm() > NORM_TOL {
        return Err(Error::CascadeMismatch(format!(
            "stage at path {:?} is off its planned state by {agreement}",
            stage.path
        )));
    }
    Ok(())
}
