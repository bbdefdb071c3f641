//! Swap test, object-disappearance detection and motion matching.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circulant::{make_block_circulant, make_circulant, CirculantOperator};
use crate::error::{QvtError, Result};
use crate::pipeline::{data_state, detect_quantum, train_quantum, PipelineConfig, PrecisionPolicy};
use crate::seed::SeedTree;
use crate::statevector::{vector_overlap, Layout, Qubit, StateVector};
use crate::tracker::{argmax, gaussian_labels, gaussian_labels_2d, train_ridge_fft};
use crate::{exec, C64};

/// How overlaps are read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Measurement {
    /// Exact Born probabilities.
    Projection,
    /// Repeated swap tests with seeded sampling.
    Sampled { shots: u64, seed: u64 },
}

/// Shots needed for accuracy `delta`, `ceil(4 / delta^2)`.
pub fn shots_for_accuracy(delta: f64) -> u64 {
    (4.0 / (delta * delta)).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapTestEstimate {
    pub overlap_estimate: f64,
    /// Zero in projection mode.
    pub shots: u64,
    pub standard_error: f64,
    /// Exact probability of reading the ancilla as `0`.
    pub p0: f64,
}

impl SwapTestEstimate {
    fn from_counts(p0: f64, zeros: u64, shots: u64) -> Self {
        let f = zeros as f64 / shots as f64;
        Self {
            overlap_estimate: (2.0 * f - 1.0).clamp(0.0, 1.0),
            shots,
            standard_error: 2.0 * (f * (1.0 - f) / shots as f64).sqrt(),
            p0,
        }
    }

    fn exact(p0: f64) -> Self {
        Self { overlap_estimate: (2.0 * p0 - 1.0).clamp(0.0, 1.0), shots: 0, standard_error: 0.0, p0 }
    }
}

/// Ancilla Hadamard, controlled SWAP of the two inputs, Hadamard, measure.
pub fn swap_test(a: &StateVector, b: &StateVector, mode: Measurement) -> Result<SwapTestEstimate> {
    if a.layout() != b.layout() {
        return Err(QvtError::LayoutMismatch("swap test needs identical layouts".into()));
    }
    let q = a.layout().total_qubits();
    let a1 = StateVector::from_amplitudes(Layout::of(&[("a", q)])?, a.amplitudes().to_vec())?;
    let b1 = StateVector::from_amplitudes(Layout::of(&[("b", q)])?, b.amplitudes().to_vec())?;
    let anc = StateVector::zero(Layout::of(&[("anc", 1)])?);
    let mut s = anc.tensor(&a1)?.tensor(&b1)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]];
    let anc_q = Qubit { register: "anc", bit: 0 };
    s.apply_single(hadamard, anc_q)?;
    let field = (1usize << q) - 1;
    let top = 1usize << (2 * q);
    s.permute_basis(|i| {
        if i & top == 0 {
            return i;
        }
        let (x, y) = ((i >> q) & field, i & field);
        top | (y << q) | x
    })?;
    s.apply_single(hadamard, anc_q)?;
    let p0 = s.probability("anc", 0)?;
    match mode {
        Measurement::Projection => Ok(SwapTestEstimate::exact(p0)),
        Measurement::Sampled { shots, seed } => {
            let counts = s.sample("anc", shots, seed)?;
            Ok(SwapTestEstimate::from_counts(p0, counts[0], shots))
        }
    }
}

/// Swap-test outcome statistics for a known overlap, without building the
/// joint state: each shot reads `0` with probability `(1 + overlap)/2`.
pub fn sampled_swap_estimate(overlap: f64, shots: u64, seed: u64) -> Result<SwapTestEstimate> {
    if shots == 0 {
        return Err(QvtError::invalid("shots must be >= 1"));
    }
    let p0 = (1.0 + overlap.clamp(0.0, 1.0)) / 2.0;
    let mut rng = SeedTree::new(seed).rng();
    let zeros = (0..shots).filter(|_| rng.gen::<f64>() < p0).count() as u64;
    Ok(SwapTestEstimate::from_counts(p0, zeros, shots))
}

/// Uniform superposition over the first `n` basis states of a register of
/// `qubits` qubits.
pub fn uniform_state(n: usize, qubits: usize) -> Result<StateVector> {
    let layout = Layout::of(&[("data", qubits)])?;
    StateVector::from_unnormalized(layout, vec![C64::new(1.0, 0.0); n])
}

/// `P1 = |⟨y_hat|1⟩|^2` against the uniform state over the `n` patch
/// positions; the object is declared gone when `P1 >= threshold`.
pub fn p1_disappearance(y_hat: &StateVector, n: usize, threshold: f64, mode: Measurement) -> Result<(f64, bool)> {
    let regs = y_hat.layout().registers();
    if regs.len() != 1 {
        return Err(QvtError::LayoutMismatch("response state must be a single register".into()));
    }
    let uniform = uniform_state(n, regs[0].qubits)?.relabel(&[&regs[0].name])?;
    let p1 = match mode {
        Measurement::Projection => uniform.overlap(y_hat)?,
        m => swap_test(y_hat, &uniform, m)?.overlap_estimate,
    };
    Ok((p1, p1 >= threshold))
}

/// `P1` for a classical response vector.
pub fn p1_classical(y_hat: &[f64]) -> f64 {
    let s: f64 = y_hat.iter().sum();
    let q: f64 = y_hat.iter().map(|v| v * v).sum();
    s * s / (y_hat.len() as f64 * q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisappearanceExperiment {
    pub frame_len: usize,
    pub patch_len: usize,
    pub object_len: usize,
    pub patch_start: usize,
    pub object_start: usize,
    pub shift: usize,
    pub runs: usize,
    pub threshold: f64,
    pub seed: u64,
    pub alpha: f64,
    pub c: f64,
    pub background: (f64, f64),
    pub object: (f64, f64),
    pub s0: usize,
    pub s1: usize,
    pub mode: Measurement,
}

impl Default for DisappearanceExperiment {
    fn default() -> Self {
        Self {
            frame_len: 50,
            patch_len: 20,
            object_len: 10,
            patch_start: 15,
            object_start: 20,
            shift: 3,
            runs: 50,
            threshold: 0.75,
            seed: 2019,
            alpha: 0.03,
            c: 0.5,
            background: (0.3, 0.4),
            object: (0.8, 1.0),
            s0: 12,
            s1: 12,
            mode: Measurement::Projection,
        }
    }
}

impl DisappearanceExperiment {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(QvtError::invalid(m.to_string()));
        if self.patch_len < 4 || self.patch_start + self.patch_len > self.frame_len {
            return bad("patch must fit inside the frame and span at least 4 pixels");
        }
        if self.object_len == 0
            || self.object_start < self.patch_start
            || self.object_start + self.object_len + self.shift > self.patch_start + self.patch_len
        {
            return bad("object and its shifted copy must stay inside the patch");
        }
        if !(self.background.0 >= 0.0 && self.background.0 < self.background.1) {
            return bad("background range must be nonnegative and nonempty");
        }
        if !(self.object.0 >= 0.0 && self.object.0 < self.object.1) {
            return bad("object range must be nonnegative and nonempty");
        }
        if !(self.alpha > 0.0) || !(self.c > 0.0) {
            return bad("alpha and c must be positive");
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad("threshold must lie in (0, 1)");
        }
        if self.runs == 0 {
            return bad("runs must be >= 1");
        }
        Ok(())
    }

    fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            s0: self.s0,
            s1: self.s1,
            alpha: self.alpha,
            precision_policy: PrecisionPolicy::Verify,
            ..Default::default()
        }
    }
}

/// The three frames of one run: training, object shifted, object removed.
#[derive(Debug, Clone, PartialEq)]
pub struct DisappearanceFrames {
    pub training: Vec<f64>,
    pub exists: Vec<f64>,
    pub gone: Vec<f64>,
}

/// Frames for run `run`. The detection frames share a fresh background; in
/// the "gone" frame the object pixels are replaced by new background draws.
pub fn disappearance_frames(cfg: &DisappearanceExperiment, run: usize) -> DisappearanceFrames {
    let mut rng = SeedTree::new(cfg.seed).child("disappearance").index(run as u64).child("frames").rng();
    let (bl, bh) = cfg.background;
    let (ol, oh) = cfg.object;
    let bg: Vec<f64> = (0..cfg.frame_len).map(|_| rng.gen_range(bl..bh)).collect();
    let obj: Vec<f64> = (0..cfg.object_len).map(|_| rng.gen_range(ol..oh)).collect();
    let mut training = bg;
    training[cfg.object_start..cfg.object_start + cfg.object_len].copy_from_slice(&obj);
    let bg2: Vec<f64> = (0..cfg.frame_len).map(|_| rng.gen_range(bl..bh)).collect();
    let at = cfg.object_start + cfg.shift;
    let mut exists = bg2.clone();
    exists[at..at + cfg.object_len].copy_from_slice(&obj);
    let mut gone = bg2;
    for v in &mut gone[at..at + cfg.object_len] {
        *v = rng.gen_range(bl..bh);
    }
    DisappearanceFrames { training, exists, gone }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisappearanceRow {
    pub run: usize,
    pub p1_exists: f64,
    pub p1_gone: f64,
    pub p1_exists_classical: f64,
    pub p1_gone_classical: f64,
    /// Classical response peak in the "exists" frame (0-based shift).
    pub argmax_exists: usize,
    pub training_fidelity: f64,
}

impl DisappearanceRow {
    pub fn correctly_classified(&self, threshold: f64) -> (bool, bool) {
        (self.p1_exists < threshold, self.p1_gone >= threshold)
    }
}

/// Classical and quantum responses for one run.
pub fn disappearance_run(cfg: &DisappearanceExperiment, run: usize) -> Result<DisappearanceRow> {
    let frames = disappearance_frames(cfg, run);
    let range = cfg.patch_start..cfg.patch_start + cfg.patch_len;
    let x = make_circulant(&frames.training[range.clone()], true)?;
    let z_exists = make_circulant(&frames.exists[range.clone()], true)?;
    let z_gone = make_circulant(&frames.gone[range], true)?;
    let labels = gaussian_labels(cfg.patch_len, cfg.c)?;
    let w = train_ridge_fft(&x, &labels.y, cfg.alpha)?.w;
    let yc_exists = z_exists.apply_real(&w)?;
    let yc_gone = z_gone.apply_real(&w)?;

    let pcfg = cfg.pipeline();
    let trained = train_quantum(&x, &data_state(&labels.y)?, &pcfg)?;
    let w_c: Vec<C64> = w.iter().map(|&v| C64::new(v, 0.0)).collect();
    let training_fidelity = vector_overlap(trained.output_state.amplitudes(), &w_c);
    let mode_seed = SeedTree::new(cfg.seed).child("disappearance").index(run as u64).child("swap");
    let mut p1 = [0.0; 2];
    for (k, z) in [&z_exists, &z_gone].into_iter().enumerate() {
        let y_hat = detect_quantum(z, &trained.output_state, &pcfg)?.output_state;
        let mode = match cfg.mode {
            Measurement::Sampled { shots, .. } => Measurement::Sampled { shots, seed: mode_seed.index(k as u64).value() },
            m => m,
        };
        p1[k] = p1_disappearance(&y_hat, cfg.patch_len, cfg.threshold, mode)?.0;
    }
    Ok(DisappearanceRow {
        run,
        p1_exists: p1[0],
        p1_gone: p1[1],
        p1_exists_classical: p1_classical(&yc_exists),
        p1_gone_classical: p1_classical(&yc_gone),
        argmax_exists: argmax(&yc_exists),
        training_fidelity,
    })
}

/// All runs, in run order. Runs execute in parallel when enabled.
pub fn run_disappearance_experiment(cfg: &DisappearanceExperiment) -> Result<Vec<DisappearanceRow>> {
    cfg.validate()?;
    exec::map_range(cfg.runs, |run| disappearance_run(cfg, run)).into_iter().collect()
}

/// A row-major grayscale frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame2d {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseEngine {
    /// Normalised classical responses `Z w`.
    Classical,
    /// Quantum training and detection.
    Quantum { s0: usize, s1: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionMatchConfig {
    pub threshold: f64,
    pub delta: f64,
    pub alpha: f64,
    pub c: f64,
    pub engine: ResponseEngine,
    pub mode: Measurement,
}

impl Default for MotionMatchConfig {
    fn default() -> Self {
        Self {
            threshold: 0.9,
            delta: 0.09,
            alpha: 0.03,
            c: 0.5,
            engine: ResponseEngine::Classical,
            mode: Measurement::Projection,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionMatchResult {
    /// Exact `P2`.
    pub p2: f64,
    /// `P2` as read out under the configured measurement.
    pub p2_measured: f64,
    pub matched: bool,
    /// `|⟨y_t^k|y_a^k⟩|^2` per frame.
    pub components: Vec<f64>,
}

/// Response states for a set of frames given training weights.
fn responses(frames: &[Frame2d], initial: &Frame2d, cfg: &MotionMatchConfig) -> Result<Vec<Vec<C64>>> {
    let (rows, cols) = (initial.rows, initial.cols);
    let x = make_block_circulant(&initial.pixels, rows, cols, true)?;
    let labels = gaussian_labels_2d(rows, cols, cfg.c)?;
    match cfg.engine {
        ResponseEngine::Classical => {
            let w = train_ridge_fft(&x, &labels.y, cfg.alpha)?.w;
            exec::map_slice(frames, |f| {
                let z = make_block_circulant(&f.pixels, f.rows, f.cols, true)?;
                Ok(z.apply_real(&w)?.into_iter().map(|v| C64::new(v, 0.0)).collect())
            })
            .into_iter()
            .collect()
        }
        ResponseEngine::Quantum { s0, s1 } => {
            let pcfg = PipelineConfig { s0, s1, alpha: cfg.alpha, precision_policy: PrecisionPolicy::Verify, ..Default::default() };
            let w = train_quantum(&x, &data_state(&labels.y)?, &pcfg)?.output_state;
            exec::map_slice(frames, |f| {
                let z = make_block_circulant(&f.pixels, f.rows, f.cols, true)?;
                Ok(detect_quantum(&z, &w, &pcfg)?.output_state.into_amplitudes())
            })
            .into_iter()
            .collect()
        }
    }
}

/// Compare the responses of `actual` frames with those of `templates`
/// frame by frame; `P2 = prod_k |⟨y_t^k|y_a^k⟩|^2`.
pub fn motion_match(
    initial: &Frame2d,
    templates: &[Frame2d],
    actual: &[Frame2d],
    cfg: &MotionMatchConfig,
    seed: u64,
) -> Result<MotionMatchResult> {
    if templates.len() < 2 {
        return Err(QvtError::invalid("motion matching needs at least two template frames"));
    }
    if templates.len() != actual.len() {
        return Err(QvtError::DimensionMismatch { expected: templates.len(), got: actual.len() });
    }
    for f in templates.iter().chain(actual) {
        if (f.rows, f.cols) != (initial.rows, initial.cols) || f.pixels.len() != f.rows * f.cols {
            return Err(QvtError::invalid("all frames must share the initial frame's shape"));
        }
    }
    let t = responses(templates, initial, cfg)?;
    let a = responses(actual, initial, cfg)?;
    let components: Vec<f64> = t.iter().zip(&a).map(|(x, y)| vector_overlap(x, y)).collect();
    let p2: f64 = components.iter().product();
    let p2_measured = match cfg.mode {
        Measurement::Projection => p2,
        Measurement::Sampled { shots, .. } => sampled_swap_estimate(p2, shots, seed)?.overlap_estimate,
    };
    Ok(MotionMatchResult { p2, p2_measured, matched: p2_measured >= cfg.threshold, components })
}

/// `|⟨psi_t|psi_a⟩|^2` with both K-fold tensor products materialised.
pub fn joint_overlap(templates: &[StateVector], actual: &[StateVector]) -> Result<f64> {
    if templates.len() != actual.len() || templates.is_empty() {
        return Err(QvtError::invalid("need equally many nonzero template and actual states"));
    }
    let build = |states: &[StateVector]| -> Result<StateVector> {
        let mut acc: Option<StateVector> = None;
        for (k, s) in states.iter().enumerate() {
            let name = format!("r{k}");
            let names: Vec<String> = (0..s.layout().registers().len()).map(|j| format!("{name}_{j}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let r = s.relabel(&refs)?;
            acc = Some(match acc {
                None => r,
                Some(prev) => prev.tensor(&r)?,
            });
        }
        Ok(acc.expect("non-empty"))
    };
    build(templates)?.overlap(&build(actual)?)
}

/// Top-left object positions `(row, col)` tracing a "Z" on an 8x8 frame.
pub const Z_PATH: [(usize, usize); 7] = [(1, 1), (1, 3), (1, 5), (3, 3), (5, 1), (5, 3), (5, 5)];

/// Synthetic 8x8 videos for the Z-path template: a static random background
/// in `[0, 0.2]` and a 2x2 object in `[0.8, 1]`.
#[derive(Debug, Clone)]
pub struct ZScenario {
    pub background: Vec<f64>,
    pub object: [f64; 4],
    pub noise: f64,
    seed: SeedTree,
}

impl ZScenario {
    pub const ROWS: usize = 8;
    pub const COLS: usize = 8;

    /// Frame with the object's top-left corner at `pos`, plus uniform noise
    /// of amplitude `noise` drawn from `stream` when given.
    pub fn frame(&self, pos: (usize, usize), stream: Option<&mut rand_chacha::ChaCha8Rng>) -> Frame2d {
        let cols = Self::COLS;
        let mut px = self.background.clone();
        for dr in 0..2 {
            for dc in 0..2 {
                px[(pos.0 + dr) * cols + pos.1 + dc] = self.object[dr * 2 + dc];
            }
        }
        if let Some(r) = stream {
            for p in &mut px {
                *p += self.noise * r.gen_range(-1.0..1.0);
            }
        }
        Frame2d { rows: Self::ROWS, cols, pixels: px }
    }

    pub fn initial(&self) -> Frame2d {
        self.frame(Z_PATH[0], None)
    }

    pub fn templates(&self) -> Vec<Frame2d> {
        Z_PATH.iter().map(|&p| self.frame(p, None)).collect()
    }

    /// A noisy video along `path`; `label` selects the noise stream.
    pub fn video(&self, path: &[(usize, usize)], label: &str) -> Vec<Frame2d> {
        let mut rng = self.seed.child(label).rng();
        path.iter().map(|&p| self.frame(p, Some(&mut rng))).collect()
    }

    /// Object follows the template path.
    pub fn matching(&self) -> Vec<Frame2d> {
        self.video(&Z_PATH, "matching")
    }

    /// Object follows the path mirrored left to right.
    pub fn mismatched(&self) -> Vec<Frame2d> {
        let mirrored: Vec<(usize, usize)> = Z_PATH.iter().map(|&(r, c)| (r, 6 - c)).collect();
        self.video(&mirrored, "mismatched")
    }

    /// The template path with the first `m` positions moved off-path to `(3, 6)`.
    pub fn with_mismatches(&self, m: usize) -> Vec<Frame2d> {
        let path: Vec<(usize, usize)> = Z_PATH.iter().enumerate().map(|(k, &p)| if k < m { (3, 6) } else { p }).collect();
        self.video(&path, "sweep")
    }
}

pub fn z_scenario(seed: u64, noise: f64) -> ZScenario {
    let root = SeedTree::new(seed).child("motion");
    let mut rng = root.child("scene").rng();
    let background: Vec<f64> = (0..ZScenario::ROWS * ZScenario::COLS).map(|_| rng.gen_range(0.0..0.2)).collect();
    let object = [0; 4].map(|_| rng.gen_range(0.8..1.0));
    ZScenario { background, object, noise, seed: root }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(v: &[f64]) -> StateVector {
        StateVector::from_real("data", v).unwrap()
    }

    #[test]
    fn swap_test_limits() {
        let a = state(&[1.0, 2.0, 0.5, -1.0]);
        let r = swap_test(&a, &a, Measurement::Projection).unwrap();
        assert!((r.p0 - 1.0).abs() < 1e-12);
        assert!((r.overlap_estimate - 1.0).abs() < 1e-12);
        let e0 = state(&[1.0, 0.0]);
        let e1 = state(&[0.0, 1.0]);
        let r = swap_test(&e0, &e1, Measurement::Projection).unwrap();
        assert!((r.p0 - 0.5).abs() < 1e-12);
        let s = swap_test(&e0, &e1, Measurement::Sampled { shots: 2000, seed: 3 }).unwrap();
        assert!(s.overlap_estimate <= 3.0 * s.standard_error + 1e-12);
        let other = StateVector::from_real("data", &[1.0; 8]).unwrap();
        assert!(swap_test(&a, &other, Measurement::Projection).is_err());
    }

    #[test]
    fn swap_probability_matches_overlap() {
        let a = state(&[0.3, 0.1, -0.7, 0.2]);
        let b = state(&[0.5, 0.5, 0.1, -0.2]);
        let r = swap_test(&a, &b, Measurement::Projection).unwrap();
        assert!((r.p0 - (1.0 + a.overlap(&b).unwrap()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn p1_limits() {
        let u = uniform_state(20, 5).unwrap();
        let (p1, gone) = p1_disappearance(&u, 20, 0.75, Measurement::Projection).unwrap();
        assert!((p1 - 1.0).abs() < 1e-12 && gone);
        let e = StateVector::basis(Layout::of(&[("data", 5)]).unwrap(), &[3]).unwrap();
        let (p1, gone) = p1_disappearance(&e, 20, 0.75, Measurement::Projection).unwrap();
        assert!((p1 - 1.0 / 20.0).abs() < 1e-12 && !gone);
    }

    #[test]
    fn frames_follow_geometry() {
        let cfg = DisappearanceExperiment::default();
        let f = disappearance_frames(&cfg, 0);
        assert_eq!(f.training.len(), 50);
        assert!(f.training[20..30].iter().all(|&v| v >= 0.8));
        assert!(f.exists[23..33].iter().all(|&v| v >= 0.8));
        assert!(f.gone.iter().all(|&v| v < 0.5));
        assert_eq!(f.exists[23..33], f.training[20..30]);
        assert_eq!(f, disappearance_frames(&cfg, 0));
        assert_ne!(f, disappearance_frames(&cfg, 1));
    }

    #[test]
    fn identical_videos_match() {
        let sc = z_scenario(1, 0.0);
        let cfg = MotionMatchConfig::default();
        let t = sc.templates();
        let r = motion_match(&sc.initial(), &t, &t, &cfg, 0).unwrap();
        assert!((r.p2 - 1.0).abs() < 1e-12 && r.matched);
        assert!(motion_match(&sc.initial(), &t, &t[..3], &cfg, 0).is_err());
    }

    #[test]
    fn product_equals_joint_overlap() {
        let t = [state(&[0.1, 0.4, 0.3, 0.2]), state(&[0.5, -0.1, 0.2, 0.7])];
        let a = [state(&[0.2, 0.3, 0.3, 0.1]), state(&[0.4, 0.1, -0.2, 0.6])];
        let prod: f64 = t.iter().zip(&a).map(|(x, y)| x.overlap(y).unwrap()).product();
        assert!((joint_overlap(&t, &a).unwrap() - prod).abs() <= 1e-12);
    }
}
