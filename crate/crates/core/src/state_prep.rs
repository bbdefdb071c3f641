//! Preparation of the label state `|y⟩`.
//!
//! The squared labels `y_i^2 = exp(-2 d_i^2 / s^2)` have no closed-form range
//! sums, so a surrogate `y~` is prepared first: `y~_i^2` integrates the same
//! Gaussian over the unit interval ending at `d_i`, giving range sums in terms
//! of the error function. A rational approximation `G` of `erf` keeps these
//! cheap. Since the Gaussian decreases, `y_i^2 <= y~_i^2`, and a controlled
//! rotation by `y_i / y~_i` followed by post-selection turns `|y~⟩` into `|y⟩`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::csvio::fmt_f64;
use crate::error::{QvtError, Result};
use crate::statevector::{qubits_for, Layout, Qubit, StateVector};
use crate::tracker::LabelVector;
use crate::C64;

pub const ERF_P: f64 = 0.47047;
pub const ERF_A1: f64 = 0.3480242;
pub const ERF_A2: f64 = -0.0958798;
pub const ERF_A3: f64 = 0.7478556;

/// Documented accuracy of [`erf_g`] on `x >= 0`.
pub const ERF_G_ACCURACY: f64 = 2.5e-5;

/// Largest excess `y_i^2 - y~_i^2` tolerated as rounding noise (and clamped).
pub const DOMINANCE_SLACK: f64 = 1e-10;

/// `G(x) = 1 - (a1 t + a2 t^2 + a3 t^3) e^{-x^2}` with `t = 1/(1 + p x)`.
pub fn erf_g(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(QvtError::invalid(format!("erf approximation needs x >= 0, got {x}")));
    }
    Ok(erf_g_unchecked(x))
}

fn erf_g_unchecked(x: f64) -> f64 {
    let t = 1.0 / (1.0 + ERF_P * x);
    1.0 - (ERF_A1 * t + ERF_A2 * t * t + ERF_A3 * t * t * t) * (-x * x).exp()
}

/// Surrogate squared amplitudes with prefix sums for range queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateLabels {
    pub n: usize,
    pub s: f64,
    pub y_tilde_sq: Vec<f64>,
    /// `prefix_sums[k] = sum_{i<k} y~_i^2`, length `n + 1`.
    pub prefix_sums: Vec<f64>,
}

impl SurrogateLabels {
    /// `sum_{a <= i < b} y~_i^2`; indices beyond `n` contribute nothing.
    pub fn range_sum(&self, a: usize, b: usize) -> f64 {
        let (a, b) = (a.min(self.n), b.min(self.n));
        if b <= a {
            return 0.0;
        }
        self.prefix_sums[b] - self.prefix_sums[a]
    }

    pub fn total(&self) -> f64 {
        self.prefix_sums[self.n]
    }

    /// Rows `(i, y_i^2, y~_i^2, prefix)` with `i` 0-based and prefix inclusive.
    pub fn write_csv<W: Write>(&self, w: W, y: &LabelVector) -> Result<()> {
        if y.len() != self.n {
            return Err(QvtError::DimensionMismatch { expected: self.n, got: y.len() });
        }
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for i in 0..self.n {
            wr.write_record([
                i.to_string(),
                fmt_f64(y.y[i] * y.y[i]),
                fmt_f64(self.y_tilde_sq[i]),
                fmt_f64(self.prefix_sums[i + 1]),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Build the surrogate for `n` labels with bandwidth `s`.
///
/// With 1-based `i` and `h = floor((n+1)/2)`: `y~_1^2 = 1`,
/// `y~_i^2 = (sqrt(pi)/(2 sqrt 2)) s (G(sqrt2 (i-1)/s) - G(sqrt2 (i-2)/s))` for
/// `2 <= i <= h`, and `y~_i^2 = y~_{n+2-i}^2` beyond. For even `n` the index
/// `i = n/2 + 1` is its own mirror and uses the integral formula directly.
pub fn surrogate(n: usize, s: f64) -> Result<SurrogateLabels> {
    if n < 4 {
        return Err(QvtError::invalid(format!("surrogate needs n >= 4, got {n}")));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(QvtError::invalid(format!("bandwidth must be positive, got {s}")));
    }
    let h = n.div_ceil(2);
    let k = std::f64::consts::PI.sqrt() / (2.0 * std::f64::consts::SQRT_2) * s;
    let r2 = std::f64::consts::SQRT_2 / s;
    let integral = |i: usize| k * (erf_g_unchecked(r2 * (i - 1) as f64) - erf_g_unchecked(r2 * (i - 2) as f64));
    let mut yt = vec![0.0; n];
    yt[0] = 1.0;
    for i in 2..=h {
        yt[i - 1] = integral(i);
    }
    for i in h + 1..=n {
        let mirror = n + 2 - i;
        yt[i - 1] = if mirror > h { integral(i) } else { yt[mirror - 1] };
    }
    let mut prefix_sums = Vec::with_capacity(n + 1);
    prefix_sums.push(0.0);
    for v in &yt {
        prefix_sums.push(prefix_sums.last().copied().unwrap_or(0.0) + v);
    }
    Ok(SurrogateLabels { n, s, y_tilde_sq: yt, prefix_sums })
}

/// Prepared surrogate state and the number of bisection rotations used.
#[derive(Debug, Clone)]
pub struct SurrogateState {
    pub state: StateVector,
    pub rotations: usize,
}

/// Recursive bisection: level `l` rotates qubit `m-1-l` of `data`, controlled
/// on the higher qubits, by the angle splitting each node's mass between its
/// two halves.
pub fn prepare_surrogate_state(labels: &SurrogateLabels) -> Result<SurrogateState> {
    if !(labels.total() > 0.0) {
        return Err(QvtError::ZeroVector);
    }
    if labels.prefix_sums.len() != labels.n + 1 {
        return Err(QvtError::invalid("prefix sums do not match the label count"));
    }
    let m = qubits_for(labels.n);
    // Node masses summed bottom-up; differences of prefix sums would lose
    // the small tail masses to cancellation.
    let mut tree = vec![labels.y_tilde_sq.clone()];
    tree[0].resize(1 << m, 0.0);
    for _ in 0..m {
        let next = tree.last().expect("leaf level").chunks(2).map(|p| p[0] + p[1]).collect();
        tree.push(next);
    }
    let mut state = StateVector::zero(Layout::of(&[("data", m)])?);
    let mut rotations = 0;
    for level in 0..m {
        let children = &tree[m - level - 1];
        let gates: Vec<[[C64; 2]; 2]> = (0..1usize << level)
            .map(|node| {
                let (left, right) = (children[2 * node], children[2 * node + 1]);
                let total = left + right;
                let (c, s) = if total > 0.0 { ((left / total).sqrt(), (right / total).sqrt()) } else { (1.0, 0.0) };
                [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
            })
            .collect();
        rotations += gates.len();
        let bit = m - 1 - level;
        state.apply_multiplexed(Qubit { register: "data", bit }, |i| gates[i >> (bit + 1)])?;
    }
    Ok(SurrogateState { state, rotations })
}

#[derive(Debug, Clone)]
pub struct RefinedState {
    pub state: StateVector,
    pub success_probability: f64,
    /// Indices (0-based) where `y_i > y~_i` by rounding and the ratio was clamped to 1.
    pub clamped: Vec<usize>,
}

/// Rotate an ancilla by `y_i / y~_i` conditioned on `|i⟩` and post-select
/// the ancilla on `|1⟩`.
pub fn refine_to_y(surrogate_state: &StateVector, y: &LabelVector, labels: &SurrogateLabels) -> Result<RefinedState> {
    let n = y.len();
    if labels.n != n {
        return Err(QvtError::DimensionMismatch { expected: labels.n, got: n });
    }
    let regs = surrogate_state.layout().registers();
    if regs.len() != 1 || regs[0].name != "data" || regs[0].qubits != qubits_for(n) {
        return Err(QvtError::LayoutMismatch("surrogate state must be a single `data` register".into()));
    }
    let mut clamped = Vec::new();
    let mut ratio = vec![0.0; 1 << qubits_for(n)];
    for i in 0..n {
        let (y2, yt2) = (y.y[i] * y.y[i], labels.y_tilde_sq[i]);
        if y2 > yt2 {
            if y2 - yt2 > DOMINANCE_SLACK {
                return Err(QvtError::DominanceViolation { index: i, y: y2.sqrt(), y_tilde: yt2.max(0.0).sqrt() });
            }
            clamped.push(i);
            ratio[i] = 1.0;
        } else if yt2 > 0.0 {
            ratio[i] = (y2 / yt2).sqrt();
        }
    }
    let anc = StateVector::zero(Layout::of(&[("anc", 1)])?);
    let mut state = surrogate_state.tensor(&anc)?;
    state.apply_multiplexed(Qubit { register: "anc", bit: 0 }, |i| {
        let r = ratio[i >> 1];
        let c = (1.0 - r * r).max(0.0).sqrt();
        [[C64::new(c, 0.0), C64::new(-r, 0.0)], [C64::new(r, 0.0), C64::new(c, 0.0)]]
    })?;
    let (state, p) = state.project_out("anc", 1)?;
    Ok(RefinedState { state, success_probability: p, clamped })
}
