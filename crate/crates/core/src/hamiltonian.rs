//! The extended circulant Hamiltonian and its simulation.
//!
//! For a circulant (or block-circulant) `X` the Hermitian extension
//! `X~ = |0⟩⟨1| ⊗ X + |1⟩⟨0| ⊗ X^†` has eigenpairs
//! `±lambda_j, (|0⟩u_j ± |1⟩v_j)/sqrt(2)` built from the singular triples of
//! `X`. It is the sum `sum_j x_j V~_j` of unitaries
//! `V~_j = (|0⟩⟨0| ⊗ V_j + |1⟩⟨1| ⊗ V_j^†)(sigma_X ⊗ I)`, which makes it
//! amenable to simulation by a linear combination of unitaries.
//!
//! When `n` is not a power of two the data register is padded to `N =
//! 2^ceil(log2 n)`; padding states have eigenvalue zero.
//!
//! The ancilla register of the layout is called `ext` and is the most
//! significant qubit: basis index `ext * N + data`.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circulant::{spectral, CirculantOperator};
use crate::error::{QvtError, Result};
use crate::statevector::qubits_for;
use crate::{CMatrix, C64};

/// Largest dense dimension `exact_evolve` accepts.
pub const EXACT_DIM_LIMIT: usize = 128;

/// Nominal ancilla budget for the LCU bookkeeping.
pub const LCU_ANCILLA_LIMIT: usize = 64;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// The shift `V_j |l⟩ = |(l - j + 1) mod n⟩` for `1 <= j <= n`.
pub fn shift_unitary(j: usize, n: usize) -> Result<CMatrix> {
    if n == 0 || j == 0 || j > n {
        return Err(QvtError::invalid(format!("shift index {j} outside 1..={n}")));
    }
    let d = j - 1;
    let mut m = CMatrix::zeros(n, n);
    for l in 0..n {
        m[((l + n - d) % n, l)] = one();
    }
    Ok(m)
}

/// One eigenpair of the extended Hamiltonian.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<C64>,
}

/// `X~` for a circulant-family base operator.
#[derive(Clone)]
pub struct ExtendedHamiltonian {
    base: Arc<dyn CirculantOperator + Send>,
}

impl std::fmt::Debug for ExtendedHamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExtendedHamiltonian").field("n", &self.n()).finish()
    }
}

impl ExtendedHamiltonian {
    pub fn new<O: CirculantOperator + Send + 'static>(base: O) -> Self {
        Self { base: Arc::new(base) }
    }

    pub fn base(&self) -> &dyn CirculantOperator {
        self.base.as_ref()
    }

    /// Size of the base operator.
    pub fn n(&self) -> usize {
        self.base.dim()
    }

    /// Padded data dimension `N`.
    pub fn padded(&self) -> usize {
        1 << self.data_qubits()
    }

    pub fn data_qubits(&self) -> usize {
        qubits_for(self.n())
    }

    /// Dense dimension `2N`.
    pub fn dim(&self) -> usize {
        2 * self.padded()
    }

    /// Largest eigenvalue modulus, `max_j lambda_j`.
    pub fn lambda_max(&self) -> f64 {
        self.base.eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn dense(&self) -> CMatrix {
        let (n, pad) = (self.n(), self.padded());
        let x = self.base.dense();
        let mut h = CMatrix::zeros(2 * pad, 2 * pad);
        for i in 0..n {
            for k in 0..n {
                h[(i, pad + k)] = C64::new(x[(i, k)], 0.0);
                h[(pad + k, i)] = C64::new(x[(i, k)], 0.0);
            }
        }
        h
    }

    /// Eigenpairs from the singular triples of the base: `+lambda_j` then
    /// `-lambda_j` for every mode in spectral order, then the zero-eigenvalue
    /// padding states.
    pub fn spectrum(&self) -> Vec<Eigenpair> {
        let (n, pad) = (self.n(), self.padded());
        let spec = spectral(self.base.as_ref());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::with_capacity(2 * pad);
        for j in 0..n {
            for sign in [1.0, -1.0] {
                let mut v = vec![zero(); 2 * pad];
                for i in 0..n {
                    v[i] = spec.left_vectors[j][i] * h;
                    v[pad + i] = spec.right_vectors[j][i] * (sign * h);
                }
                out.push(Eigenpair { value: sign * spec.singular_values[j], vector: v });
            }
        }
        for ext in 0..2 {
            for i in n..pad {
                let mut v = vec![zero(); 2 * pad];
                v[ext * pad + i] = one();
                out.push(Eigenpair { value: 0.0, vector: v });
            }
        }
        out
    }

    /// `V~_j` for 0-based generator index `j`. Requires `n` to be a power of two.
    pub fn select_unitary(&self, j: usize) -> Result<CMatrix> {
        let n = self.n();
        if n != self.padded() {
            return Err(QvtError::invalid(format!("select unitaries need a power-of-two dimension, got {n}")));
        }
        let perm = self.base.shift_permutation(j);
        let mut m = CMatrix::zeros(2 * n, 2 * n);
        for (l, &dst) in perm.iter().enumerate() {
            // |1⟩|l⟩ -> |0⟩ V|l⟩ and |0⟩|dst⟩ -> |1⟩ V^†|dst⟩ = |1⟩|l⟩.
            m[(dst, n + l)] = one();
            m[(n + l, dst)] = one();
        }
        Ok(m)
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.iter().copied().fold(0.0, f64::max)
}

/// `e^{-i X~ t}` from a dense Hermitian eigendecomposition.
pub fn exact_evolve(h: &ExtendedHamiltonian, t: f64) -> Result<CMatrix> {
    if h.dim() > EXACT_DIM_LIMIT {
        return Err(QvtError::BudgetExceeded(format!(
            "dense exponential of dimension {} exceeds {EXACT_DIM_LIMIT}",
            h.dim()
        )));
    }
    Ok(hermitian_exp(&h.dense(), t))
}

pub(crate) fn hermitian_exp(m: &CMatrix, t: f64) -> CMatrix {
    let eig = m.clone().symmetric_eigen();
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&mu| C64::from_polar(1.0, -mu * t)),
    ));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Something that realises powers of `e^{-i X~ t}`.
pub trait Evolver: Sync {
    fn hamiltonian(&self) -> &ExtendedHamiltonian;

    fn time(&self) -> f64;

    /// Dense approximation of `e^{-i X~ t k}`.
    fn power(&self, k: u64) -> Result<CMatrix>;

    /// Whether the evolver is the exact exponential, in which case callers
    /// may work in the analytic eigenbasis instead of with dense powers.
    fn is_exact(&self) -> bool;
}

#[derive(Debug, Clone)]
pub struct ExactEvolver {
    h: ExtendedHamiltonian,
    t: f64,
}

impl ExactEvolver {
    pub fn new(h: ExtendedHamiltonian, t: f64) -> Self {
        Self { h, t }
    }
}

impl Evolver for ExactEvolver {
    fn hamiltonian(&self) -> &ExtendedHamiltonian {
        &self.h
    }

    fn time(&self) -> f64 {
        self.t
    }

    fn power(&self, k: u64) -> Result<CMatrix> {
        exact_evolve(&self.h, self.t * k as f64)
    }

    fn is_exact(&self) -> bool {
        true
    }
}

/// `sum_{k > order} x^k / k!`.
pub fn taylor_tail(x: f64, order: usize) -> f64 {
    let mut term = 1.0f64;
    for k in 1..=order {
        term *= x / k as f64;
    }
    let mut tail = 0.0;
    for k in order + 1..order + 200 {
        term *= x / k as f64;
        tail += term;
        if term < tail * 1e-17 {
            break;
        }
    }
    tail
}

/// Segment count `r = ceil(t)` and the smallest truncation order `K` with
/// `r * tail(t/r, K) <= epsilon / 2`. Assumes `||X~|| <= 1`.
pub fn lcu_order_for(t: f64, epsilon: f64) -> Result<(usize, usize)> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(QvtError::invalid(format!("evolution time must be finite and >= 0, got {t}")));
    }
    if !(epsilon > 0.0) {
        return Err(QvtError::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if t == 0.0 {
        return Ok((0, 0));
    }
    let r = t.ceil() as usize;
    let tau = t / r as f64;
    let mut k = 0;
    while r as f64 * taylor_tail(tau, k) > epsilon / 2.0 {
        k += 1;
        if k > 200 {
            return Err(QvtError::invalid("Taylor order search did not converge"));
        }
    }
    Ok((r, k))
}

/// Truncated-Taylor LCU simulation of `e^{-i X~ t}`.
///
/// PREPARE maps `|0⟩` to `sum_j sqrt(x_j) |j⟩`, SELECT applies `V~_j`
/// conditioned on `|j⟩`, and the block `⟨0|PREPARE^† SELECT PREPARE|0⟩` is
/// `X~`. Each of the `r` segments applies `sum_{k<=K} (-i tau)^k X~^k / k!`
/// with `tau = t/r`; the ancilla post-selection (amplified obliviously) is
/// modelled as an exact projection, so the resulting operator is the
/// truncated series itself.
#[derive(Debug, Clone)]
pub struct LcuEvolver {
    h: ExtendedHamiltonian,
    t: f64,
    epsilon: Option<f64>,
    segments: usize,
    order: usize,
    /// `sum_{k<=K} tau^k / k!`, the LCU normalisation of one segment.
    lcu_norm: f64,
    ancilla_qubits: usize,
    op: CMatrix,
}

/// Encoded `X~` recovered from the PREPARE/SELECT circuit.
pub fn block_encoding(h: &ExtendedHamiltonian) -> Result<CMatrix> {
    if !h.base().is_oracle_normalized() {
        return Err(QvtError::NotNormalized);
    }
    let n = h.n();
    let w = h.base().weights();
    let amps: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let prep = householder_from_e0(&amps);
    let sys = h.dim();
    let mut select = CMatrix::zeros(n * sys, n * sys);
    for j in 0..n {
        select.view_mut((j * sys, j * sys), (sys, sys)).copy_from(&h.select_unitary(j)?);
    }
    let big_prep = prep.kronecker(&CMatrix::identity(sys, sys));
    let full = big_prep.adjoint() * select * big_prep;
    Ok(full.view((0, 0), (sys, sys)).into_owned())
}

/// Real Householder reflection sending `e_0` to the unit vector `a`.
fn householder_from_e0(a: &[f64]) -> CMatrix {
    let n = a.len();
    let mut w: Vec<f64> = a.iter().map(|v| -v).collect();
    w[0] += 1.0;
    let wn: f64 = w.iter().map(|v| v * v).sum();
    if wn < 1e-300 {
        return CMatrix::identity(n, n);
    }
    CMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        C64::new(id - 2.0 * w[i] * w[j] / wn, 0.0)
    })
}

fn matrix_power(m: &CMatrix, mut k: u64) -> CMatrix {
    let mut result = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

impl LcuEvolver {
    /// Choose `r` and `K` for target error `epsilon`.
    pub fn new(h: ExtendedHamiltonian, t: f64, epsilon: f64) -> Result<Self> {
        let (r, k) = lcu_order_for(t, epsilon)?;
        let mut e = Self::build(h, t, r, k)?;
        e.epsilon = Some(epsilon);
        Ok(e)
    }

    /// Fixed truncation order with the default segment count.
    pub fn with_order(h: ExtendedHamiltonian, t: f64, order: usize) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(QvtError::invalid(format!("evolution time must be finite and >= 0, got {t}")));
        }
        let r = t.ceil() as usize;
        Self::build(h, t, r, order)
    }

    fn build(h: ExtendedHamiltonian, t: f64, r: usize, k: usize) -> Result<Self> {
        let sys = h.dim();
        let index_qubits = qubits_for(h.n());
        let ancilla_qubits = qubits_for(k + 1) + k * index_qubits;
        if ancilla_qubits > LCU_ANCILLA_LIMIT {
            return Err(QvtError::BudgetExceeded(format!(
                "LCU needs {ancilla_qubits} ancilla qubits, limit {LCU_ANCILLA_LIMIT}"
            )));
        }
        let b = block_encoding(&h)?;
        if r == 0 {
            return Ok(Self {
                h,
                t,
                epsilon: None,
                segments: 0,
                order: k,
                lcu_norm: 1.0,
                ancilla_qubits: 0,
                op: CMatrix::identity(sys, sys),
            });
        }
        let tau = t / r as f64;
        let mut segment = CMatrix::identity(sys, sys);
        let mut term = CMatrix::identity(sys, sys);
        let mut lcu_norm = 1.0;
        let mut weight = 1.0;
        for j in 1..=k {
            term = &term * &b * C64::new(0.0, -tau / j as f64);
            segment += &term;
            weight *= tau / j as f64;
            lcu_norm += weight;
        }
        let op = matrix_power(&segment, r as u64);
        Ok(Self { h, t, epsilon: None, segments: r, order: k, lcu_norm, ancilla_qubits, op })
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn lcu_norm(&self) -> f64 {
        self.lcu_norm
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.ancilla_qubits
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    /// Post-selected system operator.
    pub fn operator(&self) -> &CMatrix {
        &self.op
    }

    /// `||U_lcu - e^{-i X~ t}||_2`.
    pub fn measured_error(&self) -> Result<f64> {
        Ok(spectral_norm(&(&self.op - exact_evolve(&self.h, self.t)?)))
    }
}

impl Evolver for LcuEvolver {
    fn hamiltonian(&self) -> &ExtendedHamiltonian {
        &self.h
    }

    fn time(&self) -> f64 {
        self.t
    }

    fn power(&self, k: u64) -> Result<CMatrix> {
        Ok(matrix_power(&self.op, k))
    }

    fn is_exact(&self) -> bool {
        false
    }
}

/// Build the simulated operator for `(t, epsilon)`.
pub fn lcu_evolve(h: &ExtendedHamiltonian, t: f64, epsilon: f64) -> Result<LcuEvolver> {
    LcuEvolver::new(h.clone(), t, epsilon)
}

/// One row of the error certification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertRow {
    pub n: usize,
    pub t: f64,
    pub epsilon_target: f64,
    pub k: usize,
    pub r: usize,
    pub epsilon_measured: f64,
}

impl CertRow {
    pub fn passed(&self) -> bool {
        self.epsilon_measured <= self.epsilon_target
    }
}

pub fn certify(h: &ExtendedHamiltonian, t: f64, epsilon: f64) -> Result<CertRow> {
    let e = lcu_evolve(h, t, epsilon)?;
    Ok(CertRow {
        n: h.n(),
        t,
        epsilon_target: epsilon,
        k: e.order(),
        r: e.segments(),
        epsilon_measured: e.measured_error()?,
    })
}

pub fn write_cert_csv<W: Write>(w: W, rows: &[CertRow]) -> Result<()> {
    use crate::csvio::fmt_f64;
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for r in rows {
        wr.write_record([
            r.n.to_string(),
            fmt_f64(r.t),
            fmt_f64(r.epsilon_target),
            r.k.to_string(),
            r.r.to_string(),
            fmt_f64(r.epsilon_measured),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Least-squares fit `y = a x + b`; returns `(a, b, r_squared)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let b = my - a * mx;
    let r2 = if syy > 0.0 { 1.0 - y.iter().zip(x).map(|(yy, xx)| (yy - a * xx - b).powi(2)).sum::<f64>() / syy } else { 1.0 };
    (a, b, r2)
}

/// `L / ln L` with `L = ln(t/epsilon)`, the expected growth of the order `K`.
pub fn order_trend_regressor(t: f64, epsilon: f64) -> f64 {
    let l = (t / epsilon).ln();
    l / l.ln()
}
