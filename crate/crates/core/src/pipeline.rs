//! Quantum training and detection.
//!
//! Both phases run the same circuit on registers `[ext, data, eigen, flag]`
//! (most significant first):
//!
//! 1. load the input on `data` with `ext` set (`0` for training, `1` for
//!    detection);
//! 2. phase estimation of `e^{-i H t}` for the extended Hamiltonian `H`,
//!    writing `round(mu t N / 2 pi)` in two's complement on `eigen` for each
//!    eigenvalue `mu = ±lambda_j`;
//! 3. a rotation of `flag` by `theta = arcsin(f(mu_hat))`, with
//!    `f(l) = C l/(l^2 + alpha)` for training and `f(l) = C' l` for detection;
//! 4. inverse phase estimation and post-selection of `flag = 1`.
//!
//! Because `f` is odd, the `±lambda_j` branches recombine onto the opposite
//! `ext` sector: training leaves `|1⟩|w⟩`, detection `|0⟩|y_hat⟩`. The output
//! is the `data` register after projecting `eigen` onto zero and `ext` onto
//! that sector.
//!
//! With an exact evolver the circuit is simulated with the system register
//! expressed in the eigenbasis of `H`, where the controlled evolutions are
//! diagonal phases. Approximate evolvers use dense controlled powers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circulant::{spectral, CirculantOperator};
use crate::error::{QvtError, Result};
use crate::hamiltonian::{Eigenpair, Evolver, ExactEvolver, ExtendedHamiltonian, LcuEvolver};
use crate::statevector::{qubits_for, Layout, Qubit, StateVector};
use crate::tracker::label_coefficients;
use crate::C64;

/// Largest rotation amplitude allowed by the default constants.
pub const ROTATION_CEILING: f64 = 0.9;

/// Default fraction of the unwrapped range used by the largest eigenphase:
/// `t lambda_max / (2 pi) = 0.45`.
pub const DEFAULT_PHASE_FILL: f64 = 0.45;

/// Eigen-register distributions larger than this are not kept in traces.
pub const SNAPSHOT_LIMIT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenvalueMode {
    /// Full phase estimation circuit.
    PhaseEstimation,
    /// Rotate directly in the eigenbasis using the exact eigenvalues.
    ExactStub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionPolicy {
    /// Reject configurations with fewer precision qubits than
    /// `ceil(log2(kappa/epsilon)) + 2`.
    Enforce,
    /// Run anyway; the caller verifies the result against a classical oracle.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMethod {
    Exact,
    Lcu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Precision qubits for training.
    pub s0: usize,
    /// Precision qubits for detection.
    pub s1: usize,
    /// Training evolution time; defaults to `2 pi 0.45 / lambda_max`.
    pub t0: Option<f64>,
    /// Detection evolution time; defaults to `2 pi 0.45 / gamma_max`.
    pub t1: Option<f64>,
    pub alpha: f64,
    /// Training rotation constant; defaults to `0.9 / max_j lambda_j/(lambda_j^2 + alpha)`.
    pub c: Option<f64>,
    /// Detection rotation constant; defaults to `0.9 / gamma_max`.
    pub c_prime: Option<f64>,
    pub epsilon: f64,
    /// Number of odd Taylor terms of arcsin; 0 is exact.
    pub arcsin_order: usize,
    pub eigenvalue_mode: EigenvalueMode,
    pub precision_policy: PrecisionPolicy,
    pub evolution: EvolutionMethod,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            s0: 10,
            s1: 10,
            t0: None,
            t1: None,
            alpha: 0.1,
            c: None,
            c_prime: None,
            epsilon: 0.05,
            arcsin_order: 0,
            eigenvalue_mode: EigenvalueMode::PhaseEstimation,
            precision_policy: PrecisionPolicy::Enforce,
            evolution: EvolutionMethod::Exact,
        }
    }
}

/// Truncated Maclaurin series of arcsin with `order` odd terms; `order = 0`
/// is the exact function.
pub fn arcsin_taylor(v: f64, order: usize) -> Result<f64> {
    if !(v.abs() <= 1.0) {
        return Err(QvtError::invalid(format!("arcsin argument {v} outside [-1, 1]")));
    }
    if order == 0 {
        return Ok(v.asin());
    }
    if v.abs() > 1.0 - 1e-6 {
        return Err(QvtError::SeriesDivergence(v));
    }
    let v2 = v * v;
    let mut term = v;
    let mut sum = 0.0;
    for k in 0..order {
        sum += term;
        let kf = k as f64;
        term *= v2 * (2.0 * kf + 1.0).powi(2) / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
    }
    Ok(sum)
}

/// Smallest series order reaching `tol` at `v`.
pub fn arcsin_order_for(v: f64, tol: f64) -> Result<usize> {
    let exact = v.asin();
    for order in 1..100_000 {
        if (arcsin_taylor(v, order)? - exact).abs() <= tol {
            return Ok(order);
        }
    }
    Err(QvtError::invalid("arcsin series did not reach tolerance"))
}

/// `ceil(log2(kappa / epsilon)) + 2`.
pub fn required_precision(kappa: f64, epsilon: f64) -> usize {
    ((kappa / epsilon).log2().ceil().max(0.0) as usize) + 2
}

/// `round(mu t N / 2 pi)` in two's complement on `bits` qubits.
pub fn encode_signed(mu: f64, t: f64, bits: usize) -> usize {
    let n = 1i64 << bits;
    let m = (mu * t * n as f64 / (2.0 * PI)).round() as i64;
    m.rem_euclid(n) as usize
}

/// Eigenvalue estimate for register value `l`.
pub fn decode_signed(l: usize, t: f64, bits: usize) -> f64 {
    let n = 1usize << bits;
    let m = if l < n / 2 { l as f64 } else { l as f64 - n as f64 };
    2.0 * PI * m / (n as f64 * t)
}

/// Default evolution time for spectrum radius `lambda_max`.
pub fn default_time(lambda_max: f64) -> f64 {
    2.0 * PI * DEFAULT_PHASE_FILL / lambda_max
}

fn check_wrap(t: f64, lambda_max: f64) -> Result<()> {
    let ratio = t * lambda_max / (2.0 * PI);
    if !(ratio < 0.5) || !(t > 0.0) {
        return Err(QvtError::WrapViolation { ratio });
    }
    Ok(())
}

/// `0.9 / max_j lambda_j / (lambda_j^2 + alpha)`.
pub fn training_constant<O: CirculantOperator + ?Sized>(x: &O, alpha: f64) -> f64 {
    let g = x
        .eigenvalues()
        .iter()
        .map(|z| {
            let l = z.norm();
            l / (l * l + alpha)
        })
        .fold(0.0, f64::max);
    ROTATION_CEILING / g
}

/// `0.9 / gamma_max`.
pub fn detection_constant<O: CirculantOperator + ?Sized>(z: &O) -> f64 {
    ROTATION_CEILING / z.eigenvalues().iter().map(|e| e.norm()).fold(0.0, f64::max)
}

/// `sum_j (C beta_j lambda_j / (lambda_j^2 + alpha))^2` for labels `y`.
pub fn training_success_analytic<O: CirculantOperator + ?Sized>(x: &O, y: &[f64], alpha: f64, c: f64) -> f64 {
    let spec = spectral(x);
    let beta = label_coefficients(&spec, y);
    spec.singular_values
        .iter()
        .zip(&beta)
        .map(|(&l, b)| b.norm_sqr() * (c * l / (l * l + alpha)).powi(2))
        .sum()
}

/// `sum_j (C' delta_j gamma_j)^2` with `delta_j = v_j^† w / ||w||`.
pub fn detection_success_analytic<O: CirculantOperator + ?Sized>(z: &O, w: &[C64], c_prime: f64) -> f64 {
    let spec = spectral(z);
    let norm: f64 = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    spec.right_vectors
        .iter()
        .zip(&spec.singular_values)
        .map(|(v, &g)| {
            let d: C64 = v.iter().zip(w).map(|(a, b)| a.conj() * b).sum::<C64>() / norm;
            d.norm_sqr() * (c_prime * g).powi(2)
        })
        .sum()
}

/// Phase-estimation readout of one eigenbranch of the input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchEstimate {
    pub eigenvalue: f64,
    pub register_value: usize,
    pub estimate: f64,
    /// Squared amplitude of the branch in the input.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: String,
    pub norm_sqr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub phase: String,
    pub precision_qubits: usize,
    pub time: f64,
    pub rotation_constant: f64,
    pub steps: Vec<StepRecord>,
    /// Marginal distribution of `eigen` after forward phase estimation, when
    /// small enough to keep.
    pub eigen_distribution: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    /// Post-selected state on the `data` register.
    pub output_state: StateVector,
    /// Probability of `flag = 1`.
    pub success_probability: f64,
    /// Probability of `eigen = 0` and the expected `ext` given `flag = 1`.
    pub cleanup_probability: f64,
    pub eigen_register_trace: Vec<BranchEstimate>,
    pub trace: PipelineTrace,
}

impl PipelineResult {
    pub fn trace_json(&self) -> Result<String> {
        let value = serde_json::json!({
            "trace": self.trace,
            "success_probability": self.success_probability,
            "cleanup_probability": self.cleanup_probability,
            "branches": self.eigen_register_trace,
        });
        Ok(serde_json::to_string_pretty(&value)?)
    }
}

/// Which half of the algorithm is running.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Training,
    Detection,
}

struct Plan {
    phase: Phase,
    bits: usize,
    t: f64,
    constant: f64,
    alpha: f64,
    order: usize,
    mode: EigenvalueMode,
}

impl Plan {
    fn input_ext(&self) -> usize {
        match self.phase {
            Phase::Training => 0,
            Phase::Detection => 1,
        }
    }

    fn rotation_target(&self, mu: f64) -> f64 {
        let v = match self.phase {
            Phase::Training => {
                let d = mu * mu + self.alpha;
                if d == 0.0 {
                    0.0
                } else {
                    self.constant * mu / d
                }
            }
            Phase::Detection => self.constant * mu,
        };
        v.clamp(-1.0, 1.0)
    }

    fn rotation(&self, mu: f64) -> Result<[[C64; 2]; 2]> {
        let v = self.rotation_target(mu);
        let theta = if self.order > 0 && v.abs() > 1.0 - 1e-6 {
            v.signum() * std::f64::consts::FRAC_PI_2
        } else {
            arcsin_taylor(v, self.order)?
        };
        let (s, c) = theta.sin_cos();
        Ok([[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]])
    }

    fn phase_name(&self) -> &'static str {
        match self.phase {
            Phase::Training => "training",
            Phase::Detection => "detection",
        }
    }
}

fn check_input(h: &ExtendedHamiltonian, input: &StateVector) -> Result<()> {
    let regs = input.layout().registers();
    if regs.len() != 1 || regs[0].name != "data" || regs[0].qubits != h.data_qubits() {
        return Err(QvtError::LayoutMismatch(format!(
            "input must be a single `data` register of {} qubits",
            h.data_qubits()
        )));
    }
    if input.amplitudes()[h.n()..].iter().any(|a| a.norm_sqr() > 1e-20) {
        return Err(QvtError::LayoutMismatch("input has weight on padding states".into()));
    }
    Ok(())
}

fn validate_common<O: CirculantOperator + ?Sized>(op: &O, cfg: &PipelineConfig) -> Result<()> {
    if !op.is_oracle_normalized() {
        return Err(QvtError::NotNormalized);
    }
    if op.is_singular() {
        return Err(QvtError::Singular("phase estimation needs a finite condition number".into()));
    }
    if !(cfg.alpha >= 0.0) || !cfg.alpha.is_finite() {
        return Err(QvtError::invalid(format!("alpha must be finite and >= 0, got {}", cfg.alpha)));
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
        return Err(QvtError::invalid(format!("epsilon must lie in (0, 1), got {}", cfg.epsilon)));
    }
    Ok(())
}

fn check_precision(bits: usize, kappa: f64, cfg: &PipelineConfig) -> Result<()> {
    if cfg.eigenvalue_mode == EigenvalueMode::ExactStub {
        return Ok(());
    }
    if bits == 0 {
        return Err(QvtError::invalid("phase estimation needs at least one precision qubit"));
    }
    let required = required_precision(kappa, cfg.epsilon);
    if cfg.precision_policy == PrecisionPolicy::Enforce && bits < required {
        return Err(QvtError::InsufficientPrecision { required, available: bits, kappa, epsilon: cfg.epsilon });
    }
    Ok(())
}

/// Quantum training: prepares `|w⟩` from `|y⟩`.
pub fn train_quantum<O>(x: &O, y_state: &StateVector, cfg: &PipelineConfig) -> Result<PipelineResult>
where
    O: CirculantOperator + Clone + Send + 'static,
{
    validate_common(x, cfg)?;
    let h = ExtendedHamiltonian::new(x.clone());
    check_input(&h, y_state)?;
    check_precision(cfg.s0, x.condition_number(), cfg)?;
    let t = cfg.t0.unwrap_or_else(|| default_time(h.lambda_max()));
    check_wrap(t, h.lambda_max())?;
    let plan = Plan {
        phase: Phase::Training,
        bits: cfg.s0,
        t,
        constant: cfg.c.unwrap_or_else(|| training_constant(x, cfg.alpha)),
        alpha: cfg.alpha,
        order: cfg.arcsin_order,
        mode: cfg.eigenvalue_mode,
    };
    run(&h, y_state, &plan, cfg)
}

/// Quantum detection: prepares `|y_hat⟩` from `|w⟩`.
pub fn detect_quantum<O>(z: &O, w_state: &StateVector, cfg: &PipelineConfig) -> Result<PipelineResult>
where
    O: CirculantOperator + Clone + Send + 'static,
{
    validate_common(z, cfg)?;
    let h = ExtendedHamiltonian::new(z.clone());
    check_input(&h, w_state)?;
    check_precision(cfg.s1, z.condition_number(), cfg)?;
    let t = cfg.t1.unwrap_or_else(|| default_time(h.lambda_max()));
    check_wrap(t, h.lambda_max())?;
    let plan = Plan {
        phase: Phase::Detection,
        bits: cfg.s1,
        t,
        constant: cfg.c_prime.unwrap_or_else(|| detection_constant(z)),
        alpha: cfg.alpha,
        order: cfg.arcsin_order,
        mode: cfg.eigenvalue_mode,
    };
    run(&h, w_state, &plan, cfg)
}

fn run(h: &ExtendedHamiltonian, input: &StateVector, plan: &Plan, cfg: &PipelineConfig) -> Result<PipelineResult> {
    let spectrum = h.spectrum();
    let system = system_vector(h, input, plan.input_ext());
    let coeffs: Vec<C64> = spectrum
        .iter()
        .map(|e| e.vector.iter().zip(&system).map(|(a, b)| a.conj() * b).sum())
        .collect();
    let branches = branch_estimates(&spectrum, &coeffs, plan);
    match (plan.mode, cfg.evolution) {
        (EigenvalueMode::ExactStub, _) => run_stub(h, &spectrum, &coeffs, plan, branches),
        (EigenvalueMode::PhaseEstimation, EvolutionMethod::Exact) => {
            run_eigenframe(h, &spectrum, &coeffs, plan, branches)
        }
        (EigenvalueMode::PhaseEstimation, EvolutionMethod::Lcu) => {
            let evolver = LcuEvolver::new(h.clone(), plan.t, cfg.epsilon / 2.0)?;
            run_dense(&evolver, input, plan, branches)
        }
    }
}

/// The input embedded in the `[ext, data]` system space.
fn system_vector(h: &ExtendedHamiltonian, input: &StateVector, ext: usize) -> Vec<C64> {
    let pad = h.padded();
    let mut v = vec![C64::new(0.0, 0.0); 2 * pad];
    v[ext * pad..(ext + 1) * pad].copy_from_slice(input.amplitudes());
    v
}

fn branch_estimates(spectrum: &[Eigenpair], coeffs: &[C64], plan: &Plan) -> Vec<BranchEstimate> {
    spectrum
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| c.norm_sqr() > 1e-14)
        .map(|(e, c)| {
            let (register_value, estimate) = match plan.mode {
                EigenvalueMode::PhaseEstimation => {
                    let l = encode_signed(e.value, plan.t, plan.bits);
                    (l, decode_signed(l, plan.t, plan.bits))
                }
                EigenvalueMode::ExactStub => (0, e.value),
            };
            BranchEstimate { eigenvalue: e.value, register_value, estimate, weight: c.norm_sqr() }
        })
        .collect()
}

/// Turn eigenbasis amplitudes back into `[ext, data]` and post-select `ext`.
fn finish(
    h: &ExtendedHamiltonian,
    spectrum: &[Eigenpair],
    amps: &[C64],
    plan: &Plan,
) -> Result<(StateVector, f64)> {
    let dim = h.dim();
    let mut sys = vec![C64::new(0.0, 0.0); dim];
    for (e, a) in spectrum.iter().zip(amps) {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        for (s, v) in sys.iter_mut().zip(&e.vector) {
            *s += a * v;
        }
    }
    let layout = Layout::of(&[("ext", 1), ("data", h.data_qubits())])?;
    let state = StateVector::from_unnormalized(layout, sys)?;
    state.project_out("ext", 1 - plan.input_ext())
}

fn run_stub(
    h: &ExtendedHamiltonian,
    spectrum: &[Eigenpair],
    coeffs: &[C64],
    plan: &Plan,
    branches: Vec<BranchEstimate>,
) -> Result<PipelineResult> {
    let mut success = 0.0;
    let mut out = Vec::with_capacity(coeffs.len());
    for (e, c) in spectrum.iter().zip(coeffs) {
        let g = plan.rotation(e.value)?;
        let amp = c * g[1][0];
        success += amp.norm_sqr();
        out.push(amp);
    }
    if success < crate::statevector::MIN_PROBABILITY {
        return Err(QvtError::ZeroProbability { probability: success });
    }
    let (output_state, cleanup) = finish(h, spectrum, &out, plan)?;
    Ok(PipelineResult {
        output_state,
        success_probability: success,
        cleanup_probability: cleanup,
        eigen_register_trace: branches,
        trace: PipelineTrace {
            phase: plan.phase_name().into(),
            precision_qubits: 0,
            time: plan.t,
            rotation_constant: plan.constant,
            steps: vec![StepRecord { step: "exact_rotation".into(), norm_sqr: success }],
            eigen_distribution: None,
        },
    })
}

/// Rotation gates indexed by eigen-register value.
fn rotation_table(plan: &Plan) -> Result<Vec<[[C64; 2]; 2]>> {
    (0..1usize << plan.bits)
        .map(|l| plan.rotation(decode_signed(l, plan.t, plan.bits)))
        .collect()
}

fn run_eigenframe(
    h: &ExtendedHamiltonian,
    spectrum: &[Eigenpair],
    coeffs: &[C64],
    plan: &Plan,
    branches: Vec<BranchEstimate>,
) -> Result<PipelineResult> {
    let sys_bits = qubits_for(h.dim());
    let layout = Layout::of(&[("sys", sys_bits), ("eigen", plan.bits), ("flag", 1)])?;
    let eigen_dim = 1usize << plan.bits;
    let stride = eigen_dim * 2;
    let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
    for (e, c) in coeffs.iter().enumerate() {
        amps[e * stride] = *c;
    }
    let mut state = StateVector::from_unnormalized(layout, amps)?;
    let mut steps = Vec::new();
    let mu: Vec<f64> = spectrum.iter().map(|e| e.value).collect();

    estimate_eigenframe(&mut state, &mu, plan.t, plan.bits, false)?;
    steps.push(StepRecord { step: "phase_estimation".into(), norm_sqr: state.norm_sqr() });
    let eigen_distribution = (eigen_dim <= SNAPSHOT_LIMIT).then(|| state.probabilities("eigen")).transpose()?;

    let table = rotation_table(plan)?;
    let sh = 1usize;
    state.apply_multiplexed(Qubit { register: "flag", bit: 0 }, |i| table[(i >> sh) & (eigen_dim - 1)])?;
    steps.push(StepRecord { step: "controlled_rotation".into(), norm_sqr: state.norm_sqr() });

    estimate_eigenframe(&mut state, &mu, plan.t, plan.bits, true)?;
    steps.push(StepRecord { step: "inverse_phase_estimation".into(), norm_sqr: state.norm_sqr() });

    let (state, success) = state.project_out("flag", 1)?;
    let (state, clean_eigen) = state.project_out("eigen", 0)?;
    let (output_state, clean_ext) = finish(h, spectrum, state.amplitudes(), plan)?;
    steps.push(StepRecord { step: "post_selection".into(), norm_sqr: success });
    Ok(PipelineResult {
        output_state,
        success_probability: success,
        cleanup_probability: clean_eigen * clean_ext,
        eigen_register_trace: branches,
        trace: PipelineTrace {
            phase: plan.phase_name().into(),
            precision_qubits: plan.bits,
            time: plan.t,
            rotation_constant: plan.constant,
            steps,
            eigen_distribution,
        },
    })
}

/// Phase estimation with `sys` in the eigenbasis of `H`: each controlled
/// `e^{-i H t 2^k}` is the phase `e^{-i mu_e t 2^k}` on eigen bit `k`.
fn estimate_eigenframe(state: &mut StateVector, mu: &[f64], t: f64, bits: usize, inverse: bool) -> Result<()> {
    let eigen_shift = state.layout().shift("eigen")?;
    let sys_shift = state.layout().shift("sys")?;
    let sign = if inverse { 1.0 } else { -1.0 };
    let apply_powers = |state: &mut StateVector| {
        for k in 0..bits {
            let bit = 1usize << (eigen_shift + k);
            let scale = sign * t * (1u64 << k) as f64;
            let phases: Vec<C64> = mu.iter().map(|m| C64::from_polar(1.0, m * scale)).collect();
            state.apply_diagonal(|i| {
                let e = i >> sys_shift;
                if i & bit != 0 && e < phases.len() {
                    phases[e]
                } else {
                    C64::new(1.0, 0.0)
                }
            });
        }
    };
    if inverse {
        state.inverse_qft("eigen")?;
        apply_powers(state);
        state.hadamard_all("eigen")?;
    } else {
        state.hadamard_all("eigen")?;
        apply_powers(state);
        state.qft("eigen")?;
    }
    Ok(())
}

/// Phase estimation of `e^{-i H t}` on a state whose first two registers are
/// `ext` and `data`; appends an `eigen` register holding the signed estimate.
pub fn signed_phase_estimate(evolver: &dyn Evolver, state: &StateVector, precision_qubits: usize) -> Result<StateVector> {
    let h = evolver.hamiltonian();
    check_wrap(evolver.time(), h.lambda_max())?;
    let eig = StateVector::zero(Layout::of(&[("eigen", precision_qubits)])?);
    let mut s = state.tensor(&eig)?;
    dense_estimate(evolver, &mut s, precision_qubits, false)?;
    Ok(s)
}

/// Inverse of [`signed_phase_estimate`] (the `eigen` register is kept).
pub fn inverse_signed_phase_estimate(evolver: &dyn Evolver, state: &mut StateVector, precision_qubits: usize) -> Result<()> {
    dense_estimate(evolver, state, precision_qubits, true)
}

fn dense_estimate(evolver: &dyn Evolver, state: &mut StateVector, bits: usize, inverse: bool) -> Result<()> {
    if state.layout().width("eigen")? != bits {
        return Err(QvtError::LayoutMismatch("eigen register width differs from precision".into()));
    }
    let powers = (0..bits)
        .map(|k| {
            let u = evolver.power(1u64 << k)?;
            Ok(if inverse { u.adjoint() } else { u })
        })
        .collect::<Result<Vec<_>>>()?;
    let targets = ["ext", "data"];
    if inverse {
        state.inverse_qft("eigen")?;
        for (k, u) in powers.iter().enumerate() {
            state.apply_matrix(u, &targets, Some(Qubit { register: "eigen", bit: k }))?;
        }
        state.hadamard_all("eigen")?;
    } else {
        state.hadamard_all("eigen")?;
        for (k, u) in powers.iter().enumerate() {
            state.apply_matrix(u, &targets, Some(Qubit { register: "eigen", bit: k }))?;
        }
        state.qft("eigen")?;
    }
    Ok(())
}

fn run_dense(evolver: &dyn Evolver, input: &StateVector, plan: &Plan, branches: Vec<BranchEstimate>) -> Result<PipelineResult> {
    let ext = StateVector::basis(Layout::of(&[("ext", 1)])?, &[plan.input_ext()])?;
    let sys = ext.tensor(input)?;
    let mut state = signed_phase_estimate(evolver, &sys, plan.bits)?;
    state = state.tensor(&StateVector::zero(Layout::of(&[("flag", 1)])?))?;
    let mut steps = vec![StepRecord { step: "phase_estimation".into(), norm_sqr: state.norm_sqr() }];
    let eigen_dim = 1usize << plan.bits;
    let eigen_distribution = (eigen_dim <= SNAPSHOT_LIMIT).then(|| state.probabilities("eigen")).transpose()?;

    let table = rotation_table(plan)?;
    let eigen_shift = state.layout().shift("eigen")?;
    state.apply_multiplexed(Qubit { register: "flag", bit: 0 }, |i| table[(i >> eigen_shift) & (eigen_dim - 1)])?;
    steps.push(StepRecord { step: "controlled_rotation".into(), norm_sqr: state.norm_sqr() });

    inverse_signed_phase_estimate(evolver, &mut state, plan.bits)?;
    steps.push(StepRecord { step: "inverse_phase_estimation".into(), norm_sqr: state.norm_sqr() });
    // An approximate evolver is only close to unitary; fold its norm drift
    // into the success probability.
    let drift = state.norm_sqr();
    let (state, success) = state.project_out("flag", 1)?;
    let (state, clean_eigen) = state.project_out("eigen", 0)?;
    let (output_state, clean_ext) = state.project_out("ext", 1 - plan.input_ext())?;
    steps.push(StepRecord { step: "post_selection".into(), norm_sqr: success * drift });
    Ok(PipelineResult {
        output_state,
        success_probability: success * drift,
        cleanup_probability: clean_eigen * clean_ext,
        eigen_register_trace: branches,
        trace: PipelineTrace {
            phase: plan.phase_name().into(),
            precision_qubits: plan.bits,
            time: plan.t,
            rotation_constant: plan.constant,
            steps,
            eigen_distribution,
        },
    })
}

/// Training run through the dense controlled-power circuit with the exact
/// exponential, for cross-checking the eigenbasis simulation.
pub fn train_quantum_dense<O>(x: &O, y_state: &StateVector, cfg: &PipelineConfig) -> Result<PipelineResult>
where
    O: CirculantOperator + Clone + Send + 'static,
{
    validate_common(x, cfg)?;
    let h = ExtendedHamiltonian::new(x.clone());
    check_input(&h, y_state)?;
    check_precision(cfg.s0, x.condition_number(), cfg)?;
    let t = cfg.t0.unwrap_or_else(|| default_time(h.lambda_max()));
    check_wrap(t, h.lambda_max())?;
    let plan = Plan {
        phase: Phase::Training,
        bits: cfg.s0,
        t,
        constant: cfg.c.unwrap_or_else(|| training_constant(x, cfg.alpha)),
        alpha: cfg.alpha,
        order: cfg.arcsin_order,
        mode: EigenvalueMode::PhaseEstimation,
    };
    let evolver = ExactEvolver::new(h, t);
    run_dense(&evolver, y_state, &plan, Vec::new())
}

/// Load a real vector as the `data` register input for a base of size `n`.
pub fn data_state(v: &[f64]) -> Result<StateVector> {
    StateVector::from_real("data", v)
}

/// Real-valued view of a state's amplitudes with the global phase removed,
/// truncated to the first `n` entries.
pub fn real_amplitudes(state: &StateVector, n: usize) -> Vec<f64> {
    let amps = &state.amplitudes()[..n];
    let pivot = amps.iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())).unwrap_or(C64::new(1.0, 0.0));
    let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
    amps.iter().map(|a| (a * phase).re).collect()
}
