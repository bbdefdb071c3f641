//! Dense statevector over named registers.
//!
//! Registers are listed most-significant first: with layout `[a:2, b:3]` the
//! basis index is `a * 8 + b`. Within a register, bit `k` has weight `2^k`.

use std::io::Write;

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use crate::error::{QvtError, Result};
use crate::seed::SeedTree;
use crate::{exec, fft, CMatrix, C64};

/// Largest number of qubits a state may span.
pub const MAX_QUBITS: usize = 22;

/// Tolerance on `||U^† U - I||_max` for accepted unitaries.
pub const UNITARY_TOL: f64 = 1e-10;

/// Tolerance on the norm of a state.
pub const NORM_TOL: f64 = 1e-10;

/// Outcomes with probability below this are rejected by [`StateVector::project`].
pub const MIN_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub qubits: usize,
}

impl Register {
    pub fn new(name: &str, qubits: usize) -> Self {
        Self { name: name.to_string(), qubits }
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    registers: Vec<Register>,
}

impl Layout {
    pub fn new(registers: Vec<Register>) -> Result<Self> {
        let total: usize = registers.iter().map(|r| r.qubits).sum();
        if total > MAX_QUBITS {
            return Err(QvtError::QubitBudget { requested: total, limit: MAX_QUBITS });
        }
        for (i, r) in registers.iter().enumerate() {
            if registers[..i].iter().any(|o| o.name == r.name) {
                return Err(QvtError::LayoutMismatch(format!("duplicate register `{}`", r.name)));
            }
        }
        Ok(Self { registers })
    }

    /// Build from `(name, qubits)` pairs.
    pub fn of(spec: &[(&str, usize)]) -> Result<Self> {
        Self::new(spec.iter().map(|&(n, q)| Register::new(n, q)).collect())
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn total_qubits(&self) -> usize {
        self.registers.iter().map(|r| r.qubits).sum()
    }

    pub fn dim(&self) -> usize {
        1 << self.total_qubits()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| QvtError::RegisterNotFound(name.to_string()))
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        Ok(&self.registers[self.position(name)?])
    }

    /// Bit position of the least significant qubit of a register.
    pub fn shift(&self, name: &str) -> Result<usize> {
        let p = self.position(name)?;
        Ok(self.registers[p + 1..].iter().map(|r| r.qubits).sum())
    }

    pub fn width(&self, name: &str) -> Result<usize> {
        Ok(self.register(name)?.qubits)
    }

    /// Value held by register `name` in basis state `index`.
    pub fn value_of(&self, index: usize, name: &str) -> Result<usize> {
        let (shift, width) = (self.shift(name)?, self.width(name)?);
        Ok((index >> shift) & ((1 << width) - 1))
    }

    /// Basis index for one value per register, in layout order.
    pub fn index_of(&self, values: &[usize]) -> Result<usize> {
        if values.len() != self.registers.len() {
            return Err(QvtError::LayoutMismatch(format!(
                "{} values for {} registers",
                values.len(),
                self.registers.len()
            )));
        }
        let mut idx = 0;
        for (r, &v) in self.registers.iter().zip(values) {
            if v >= r.dim() {
                return Err(QvtError::invalid(format!("value {v} does not fit register `{}`", r.name)));
            }
            idx = (idx << r.qubits) | v;
        }
        Ok(idx)
    }

    /// Layout without register `name`.
    pub fn without(&self, name: &str) -> Result<Layout> {
        let p = self.position(name)?;
        let mut regs = self.registers.clone();
        regs.remove(p);
        Layout::new(regs)
    }

    /// Bit masks of the listed registers, concatenated with the first listed
    /// register most significant.
    fn sub_offsets(&self, targets: &[&str]) -> Result<(Vec<usize>, usize)> {
        let mut mask = 0usize;
        let mut fields = Vec::with_capacity(targets.len());
        for t in targets {
            let (shift, width) = (self.shift(t)?, self.width(t)?);
            let m = ((1usize << width) - 1) << shift;
            if mask & m != 0 {
                return Err(QvtError::LayoutMismatch(format!("register `{t}` listed twice")));
            }
            mask |= m;
            fields.push((shift, width));
        }
        let sub_bits: usize = fields.iter().map(|f| f.1).sum();
        let offsets = (0..1usize << sub_bits)
            .map(|s| {
                let mut off = 0;
                let mut rem = sub_bits;
                for &(shift, width) in &fields {
                    rem -= width;
                    off |= ((s >> rem) & ((1 << width) - 1)) << shift;
                }
                off
            })
            .collect();
        Ok((offsets, mask))
    }
}

/// Indices with all bits in `mask` cleared, in increasing order.
fn rest_offsets(total_bits: usize, mask: usize) -> Vec<usize> {
    let free: Vec<usize> = (0..total_bits).filter(|b| mask & (1 << b) == 0).collect();
    (0..1usize << free.len())
        .map(|r| free.iter().enumerate().fold(0, |acc, (k, &b)| acc | (((r >> k) & 1) << b)))
        .collect()
}

/// Check `||U^† U - I||_max <= UNITARY_TOL`.
pub fn check_unitary(u: &CMatrix) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(QvtError::DimensionMismatch { expected: u.nrows(), got: u.ncols() });
    }
    let dev = unitarity_deviation(u);
    if dev > UNITARY_TOL {
        return Err(QvtError::NonUnitary { deviation: dev });
    }
    Ok(())
}

pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    let n = g.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g[(i, j)] - target).norm());
        }
    }
    dev
}

/// A qubit addressed by register name and bit index within the register.
#[derive(Debug, Clone, Copy)]
pub struct Qubit<'a> {
    pub register: &'a str,
    pub bit: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: Layout,
    amps: Vec<C64>,
}

impl StateVector {
    /// All registers in `|0⟩`.
    pub fn zero(layout: Layout) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
        amps[0] = C64::new(1.0, 0.0);
        Self { layout, amps }
    }

    /// Computational basis state with one value per register.
    pub fn basis(layout: Layout, values: &[usize]) -> Result<Self> {
        let idx = layout.index_of(values)?;
        let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
        amps[idx] = C64::new(1.0, 0.0);
        Ok(Self { layout, amps })
    }

    /// Amplitudes must already have unit norm.
    pub fn from_amplitudes(layout: Layout, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(QvtError::DimensionMismatch { expected: layout.dim(), got: amps.len() });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QvtError::invalid(format!("state has squared norm {norm}, expected 1")));
        }
        Ok(Self { layout, amps })
    }

    /// Normalise the given amplitudes. Shorter inputs are zero-padded, so a
    /// length-`n` vector can be loaded into a `ceil(log2 n)`-qubit register.
    pub fn from_unnormalized(layout: Layout, mut amps: Vec<C64>) -> Result<Self> {
        if amps.len() > layout.dim() {
            return Err(QvtError::DimensionMismatch { expected: layout.dim(), got: amps.len() });
        }
        amps.resize(layout.dim(), C64::new(0.0, 0.0));
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(QvtError::ZeroVector);
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { layout, amps })
    }

    /// Real data vector encoded on a single register named `name`.
    pub fn from_real(name: &str, data: &[f64]) -> Result<Self> {
        let layout = Layout::of(&[(name, qubits_for(data.len()))])?;
        Self::from_unnormalized(layout, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Tensor product, `self` most significant.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let mut regs = self.layout.registers.clone();
        regs.extend(other.layout.registers.iter().cloned());
        let layout = Layout::new(regs)?;
        let amps = exec::map_range(layout.dim(), |i| {
            self.amps[i / other.amps.len()] * other.amps[i % other.amps.len()]
        });
        Ok(Self { layout, amps })
    }

    /// Same amplitudes with the registers renamed, in layout order.
    pub fn relabel(&self, names: &[&str]) -> Result<StateVector> {
        let regs = &self.layout.registers;
        if names.len() != regs.len() {
            return Err(QvtError::LayoutMismatch(format!("{} names for {} registers", names.len(), regs.len())));
        }
        let layout = Layout::new(regs.iter().zip(names).map(|(r, n)| Register::new(n, r.qubits)).collect())?;
        Ok(StateVector { layout, amps: self.amps.clone() })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        exec::sum_range(self.amps.len(), |i| self.amps[i].norm_sqr())
    }

    /// Rescale to unit norm; fails on the zero vector.
    pub fn renormalize(&mut self) -> Result<f64> {
        let p = self.norm_sqr();
        if !(p > 0.0) {
            return Err(QvtError::ZeroProbability { probability: p });
        }
        let s = 1.0 / p.sqrt();
        exec::for_each_indexed(&mut self.amps, |_, a| *a *= s);
        Ok(p)
    }

    /// Apply `u` to the concatenation of `targets` (first listed register
    /// most significant).
    pub fn apply_unitary(&mut self, u: &CMatrix, targets: &[&str]) -> Result<()> {
        check_unitary(u)?;
        self.apply_matrix(u, targets, None)
    }

    /// Apply `u` on `targets` conditioned on `control` being `|1⟩`.
    pub fn apply_controlled_unitary(&mut self, u: &CMatrix, targets: &[&str], control: Qubit<'_>) -> Result<()> {
        check_unitary(u)?;
        self.apply_matrix(u, targets, Some(control))
    }

    /// Apply an arbitrary (possibly non-unitary) block. Used for the LCU
    /// post-selected operators, which are contractions; the caller handles
    /// renormalisation.
    pub fn apply_matrix(&mut self, u: &CMatrix, targets: &[&str], control: Option<Qubit<'_>>) -> Result<()> {
        let (subs, mut mask) = self.layout.sub_offsets(targets)?;
        if u.nrows() != subs.len() || u.ncols() != subs.len() {
            return Err(QvtError::DimensionMismatch { expected: subs.len(), got: u.nrows() });
        }
        let ctrl_bit = match control {
            Some(q) => {
                if q.bit >= self.layout.width(q.register)? {
                    return Err(QvtError::invalid(format!("bit {} outside register `{}`", q.bit, q.register)));
                }
                let b = 1usize << (self.layout.shift(q.register)? + q.bit);
                if mask & b != 0 {
                    return Err(QvtError::LayoutMismatch("control qubit overlaps targets".into()));
                }
                mask |= b;
                Some(b)
            }
            None => None,
        };
        let mut rests = rest_offsets(self.layout.total_qubits(), mask);
        if let Some(b) = ctrl_bit {
            rests.iter_mut().for_each(|r| *r |= b);
        }
        let d = subs.len();
        let amps = &self.amps;
        let blocks: Vec<Option<Vec<C64>>> = exec::map_slice(&rests, |&r| {
            let x: Vec<C64> = subs.iter().map(|&s| amps[r | s]).collect();
            if x.iter().all(|a| a.re == 0.0 && a.im == 0.0) {
                return None;
            }
            Some(
                (0..d)
                    .map(|i| (0..d).map(|k| u[(i, k)] * x[k]).sum())
                    .collect(),
            )
        });
        for (r, block) in rests.iter().zip(blocks) {
            if let Some(b) = block {
                for (s, v) in subs.iter().zip(b) {
                    self.amps[r | s] = v;
                }
            }
        }
        Ok(())
    }

    /// Apply a 2x2 gate to a single qubit.
    pub fn apply_single(&mut self, gate: [[C64; 2]; 2], q: Qubit<'_>) -> Result<()> {
        if q.bit >= self.layout.width(q.register)? {
            return Err(QvtError::invalid(format!("bit {} outside register `{}`", q.bit, q.register)));
        }
        let bit = 1usize << (self.layout.shift(q.register)? + q.bit);
        let span = bit << 1;
        exec::for_each_chunk(&mut self.amps, span.max(1 << 12), |_, chunk| {
            for base in (0..chunk.len()).step_by(span) {
                for i in base..base + bit {
                    let (a0, a1) = (chunk[i], chunk[i + bit]);
                    chunk[i] = gate[0][0] * a0 + gate[0][1] * a1;
                    chunk[i + bit] = gate[1][0] * a0 + gate[1][1] * a1;
                }
            }
        });
        Ok(())
    }

    /// Multiply every amplitude by `phase(index)`. The map must have unit
    /// modulus for the operation to be unitary; this is not checked.
    pub fn apply_diagonal(&mut self, phase: impl Fn(usize) -> C64 + Sync + Send) {
        exec::for_each_indexed(&mut self.amps, |i, a| *a *= phase(i));
    }

    /// Single-qubit gate on `q` chosen per basis state of the other qubits:
    /// `gate(i)` receives the basis index with the target bit cleared.
    pub fn apply_multiplexed(
        &mut self,
        q: Qubit<'_>,
        gate: impl Fn(usize) -> [[C64; 2]; 2] + Sync + Send,
    ) -> Result<()> {
        if q.bit >= self.layout.width(q.register)? {
            return Err(QvtError::invalid(format!("bit {} outside register `{}`", q.bit, q.register)));
        }
        let bit = 1usize << (self.layout.shift(q.register)? + q.bit);
        let span = bit << 1;
        exec::for_each_chunk(&mut self.amps, span.max(1 << 12), |ci, chunk| {
            let offset = ci * span.max(1 << 12);
            for base in (0..chunk.len()).step_by(span) {
                for i in base..base + bit {
                    let g = gate(offset + i);
                    let (a0, a1) = (chunk[i], chunk[i + bit]);
                    chunk[i] = g[0][0] * a0 + g[0][1] * a1;
                    chunk[i + bit] = g[1][0] * a0 + g[1][1] * a1;
                }
            }
        });
        Ok(())
    }

    /// Hadamard on every qubit of a register.
    pub fn hadamard_all(&mut self, register: &str) -> Result<()> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let gate = [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]];
        for bit in 0..self.layout.width(register)? {
            self.apply_single(gate, Qubit { register, bit })?;
        }
        Ok(())
    }

    /// Run `f` on every fibre of a register (all amplitudes that differ only
    /// in that register's value), in place.
    pub(crate) fn for_each_fibre(&mut self, register: &str, f: impl Fn(&mut [C64]) + Sync + Send) -> Result<()> {
        let (subs, mask) = self.layout.sub_offsets(&[register])?;
        let shift = self.layout.shift(register)?;
        let d = subs.len();
        if shift == 0 {
            exec::for_each_chunk(&mut self.amps, d, |_, c| f(c));
            return Ok(());
        }
        let rests = rest_offsets(self.layout.total_qubits(), mask);
        let amps = &self.amps;
        let blocks: Vec<Vec<C64>> = exec::map_slice(&rests, |&r| {
            let mut x: Vec<C64> = subs.iter().map(|&s| amps[r | s]).collect();
            f(&mut x);
            x
        });
        for (r, b) in rests.iter().zip(blocks) {
            for (s, v) in subs.iter().zip(b) {
                self.amps[r | s] = v;
            }
        }
        Ok(())
    }

    /// Quantum Fourier transform, `|k⟩ -> sum_l e^{2 pi i kl/N} |l⟩ / sqrt(N)`.
    pub fn qft(&mut self, register: &str) -> Result<()> {
        let n = self.layout.register(register)?.dim();
        let s = 1.0 / (n as f64).sqrt();
        self.for_each_fibre(register, |x| {
            fft::inverse(x);
            x.iter_mut().for_each(|a| *a *= s);
        })
    }

    pub fn inverse_qft(&mut self, register: &str) -> Result<()> {
        let n = self.layout.register(register)?.dim();
        let s = 1.0 / (n as f64).sqrt();
        self.for_each_fibre(register, |x| {
            fft::forward(x);
            x.iter_mut().for_each(|a| *a *= s);
        })
    }

    /// Permute basis states: amplitude at `i` moves to `f(i)`. `f` must be a
    /// bijection on `0..dim`.
    pub fn permute_basis(&mut self, f: impl Fn(usize) -> usize + Sync + Send) -> Result<()> {
        let dim = self.amps.len();
        let dest = exec::map_range(dim, &f);
        let mut seen = vec![false; dim];
        for &d in &dest {
            if d >= dim || std::mem::replace(&mut seen[d], true) {
                return Err(QvtError::invalid("basis map is not a permutation"));
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (i, &d) in dest.iter().enumerate() {
            out[d] = self.amps[i];
        }
        self.amps = out;
        Ok(())
    }

    /// Born probabilities of every value of a register.
    pub fn probabilities(&self, register: &str) -> Result<Vec<f64>> {
        let (shift, width) = (self.layout.shift(register)?, self.layout.width(register)?);
        let mask = (1usize << width) - 1;
        let mut p = vec![0.0; 1 << width];
        for (i, a) in self.amps.iter().enumerate() {
            p[(i >> shift) & mask] += a.norm_sqr();
        }
        Ok(p)
    }

    /// Probability that a register holds `outcome`.
    pub fn probability(&self, register: &str, outcome: usize) -> Result<f64> {
        let (shift, width) = (self.layout.shift(register)?, self.layout.width(register)?);
        if outcome >> width != 0 {
            return Err(QvtError::invalid(format!("outcome {outcome} does not fit register `{register}`")));
        }
        let mask = (1usize << width) - 1;
        Ok(exec::sum_range(self.amps.len(), |i| {
            if (i >> shift) & mask == outcome {
                self.amps[i].norm_sqr()
            } else {
                0.0
            }
        }))
    }

    /// Project a register onto `outcome`, keeping the layout. Returns the
    /// renormalised state and the Born probability.
    pub fn project(&self, register: &str, outcome: usize) -> Result<(StateVector, f64)> {
        let mut s = self.clone();
        let p = s.project_in_place(register, outcome)?;
        Ok((s, p))
    }

    pub fn project_in_place(&mut self, register: &str, outcome: usize) -> Result<f64> {
        let p = self.probability(register, outcome)?;
        if p < MIN_PROBABILITY {
            return Err(QvtError::ZeroProbability { probability: p });
        }
        let (shift, width) = (self.layout.shift(register)?, self.layout.width(register)?);
        let mask = (1usize << width) - 1;
        let s = 1.0 / p.sqrt();
        exec::for_each_indexed(&mut self.amps, |i, a| {
            if (i >> shift) & mask == outcome {
                *a *= s;
            } else {
                *a = C64::new(0.0, 0.0);
            }
        });
        Ok(p)
    }

    /// Project a register onto `outcome` and drop it from the layout.
    pub fn project_out(&self, register: &str, outcome: usize) -> Result<(StateVector, f64)> {
        let p = self.probability(register, outcome)?;
        if p < MIN_PROBABILITY {
            return Err(QvtError::ZeroProbability { probability: p });
        }
        let layout = self.layout.without(register)?;
        let (shift, width) = (self.layout.shift(register)?, self.layout.width(register)?);
        let low = (1usize << shift) - 1;
        let s = 1.0 / p.sqrt();
        let amps = exec::map_range(layout.dim(), |j| {
            let i = ((j >> shift) << (shift + width)) | (outcome << shift) | (j & low);
            self.amps[i] * s
        });
        Ok((StateVector { layout, amps }, p))
    }

    /// Draw `shots` measurements of a register; returns counts per value.
    pub fn sample(&self, register: &str, shots: u64, seed: u64) -> Result<Vec<u64>> {
        if shots == 0 {
            return Err(QvtError::invalid("shots must be >= 1"));
        }
        let p = self.probabilities(register)?;
        let dist = WeightedIndex::new(&p).map_err(|e| QvtError::invalid(format!("bad distribution: {e}")))?;
        let mut rng = SeedTree::new(seed).rng();
        let mut counts = vec![0u64; p.len()];
        for _ in 0..shots {
            counts[dist.sample(&mut rng)] += 1;
        }
        Ok(counts)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.layout != other.layout {
            return Err(QvtError::LayoutMismatch("inner product of states with different layouts".into()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|^2`.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }

    /// Dump as `(basis_index, re, im)` CSV rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for (i, a) in self.amps.iter().enumerate() {
            wr.write_record([i.to_string(), crate::csvio::fmt_f64(a.re), crate::csvio::fmt_f64(a.im)])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn layout_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.layout)?)
    }
}

/// Qubits needed to hold `n` basis states (at least one).
pub fn qubits_for(n: usize) -> usize {
    n.max(2).next_power_of_two().trailing_zeros() as usize
}

/// Overlap of two unnormalised complex vectors, `|⟨a|b⟩|^2 / (‖a‖² ‖b‖²)`.
pub fn vector_overlap(a: &[C64], b: &[C64]) -> f64 {
    let ip: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    ip.norm_sqr() / (na * nb)
}
