//! Classical circulant ridge-regression tracker.
//!
//! Training solves `(X^†X + alpha I) w = X^† y` where `X` is the circulant of
//! the base patch and `y` are Gaussian labels peaked at shift zero. Detection
//! forms the response `Z w` for the circulant `Z` of the next patch; the
//! argmax gives the cyclic shift that best explains the new patch, and hence
//! the displacement of the object.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::circulant::{
    make_block_circulant, make_circulant, spectral, CirculantOperator, SpectralDecomposition,
};
use crate::error::{QvtError, Result};
use crate::C64;

/// Default bandwidth constant in `s = c sqrt(n)`.
pub const DEFAULT_BANDWIDTH_C: f64 = 0.5;

/// Gaussian regression targets over cyclic shifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelVector {
    pub y: Vec<f64>,
    /// Bandwidth in pixels.
    pub s: f64,
    pub c: f64,
}

impl LabelVector {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn sum_sq(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.sum_sq().sqrt()
    }
}

/// Cyclic distance of shift `i` from zero on a ring of `n`: `i` for the first
/// `ceil(n/2)` indices, `n - i` after.
pub fn cyclic_distance(i: usize, n: usize) -> usize {
    if i < n.div_ceil(2) {
        i
    } else {
        n - i
    }
}

/// `y_i = exp(-d_i^2 / s^2)` with `s = c sqrt(n)`.
pub fn gaussian_labels(n: usize, c: f64) -> Result<LabelVector> {
    if n < 2 {
        return Err(QvtError::invalid("labels need n >= 2"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(QvtError::invalid(format!("bandwidth constant must be positive, got {c}")));
    }
    let s = c * (n as f64).sqrt();
    Ok(gaussian_labels_with_bandwidth(n, s, c))
}

pub(crate) fn gaussian_labels_with_bandwidth(n: usize, s: f64, c: f64) -> LabelVector {
    let y = (0..n)
        .map(|i| {
            let d = cyclic_distance(i, n) as f64;
            (-d * d / (s * s)).exp()
        })
        .collect();
    LabelVector { y, s, c }
}

/// Row-major `rows x cols` labels, `exp(-(da^2 + db^2)/s^2)` with `s = c sqrt(rows cols)`.
pub fn gaussian_labels_2d(rows: usize, cols: usize, c: f64) -> Result<LabelVector> {
    if rows < 2 || cols < 2 {
        return Err(QvtError::invalid("2D labels need both sides >= 2"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(QvtError::invalid(format!("bandwidth constant must be positive, got {c}")));
    }
    let s = c * ((rows * cols) as f64).sqrt();
    let mut y = Vec::with_capacity(rows * cols);
    for a in 0..rows {
        for b in 0..cols {
            let da = cyclic_distance(a, rows) as f64;
            let db = cyclic_distance(b, cols) as f64;
            y.push((-(da * da + db * db) / (s * s)).exp());
        }
    }
    Ok(LabelVector { y, s, c })
}

/// Ridge-regression weights together with their spectral coefficients.
#[derive(Debug, Clone)]
pub struct RidgeSolution {
    pub w: Vec<f64>,
    pub alpha: f64,
    /// `beta_j = u_j^† y / ||y||` in the order of [`SpectralDecomposition`];
    /// empty for the dense solver, which has no spectrum at hand.
    pub beta: Vec<C64>,
    pub y_norm: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(QvtError::invalid(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    Ok(())
}

fn real_part(v: Vec<C64>) -> Vec<f64> {
    v.into_iter().map(|z| z.re).collect()
}

fn to_complex(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// Training in the Fourier domain, `w = F diag(conj(mu)/(|mu|^2 + alpha)) F^† y`.
pub fn train_ridge_fft<O: CirculantOperator + ?Sized>(x: &O, y: &[f64], alpha: f64) -> Result<RidgeSolution> {
    check_alpha(alpha)?;
    if y.len() != x.dim() {
        return Err(QvtError::DimensionMismatch { expected: x.dim(), got: y.len() });
    }
    if alpha == 0.0 && x.is_singular() {
        return Err(QvtError::Singular("alpha = 0 with a singular data matrix".into()));
    }
    let w = x.apply_filter(&to_complex(y), &|mu| mu.conj() / (mu.norm_sqr() + alpha))?;
    let spec = spectral(x);
    let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(RidgeSolution {
        w: real_part(w),
        alpha,
        beta: label_coefficients(&spec, y),
        y_norm,
    })
}

/// `beta_j = u_j^† y / ||y||`.
pub fn label_coefficients(spec: &SpectralDecomposition, y: &[f64]) -> Vec<C64> {
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    spec.left_vectors
        .iter()
        .map(|u| u.iter().zip(y).map(|(a, &b)| a.conj() * b).sum::<C64>() / norm)
        .collect()
}

/// `w = sum_j beta_j lambda_j ||y|| / (lambda_j^2 + alpha) v_j`.
pub fn spectral_assembly(spec: &SpectralDecomposition, beta: &[C64], y_norm: f64, alpha: f64) -> Vec<C64> {
    let n = spec.right_vectors.first().map_or(0, Vec::len);
    let mut w = vec![C64::new(0.0, 0.0); n];
    for ((v, &lambda), b) in spec.right_vectors.iter().zip(&spec.singular_values).zip(beta) {
        let denom = lambda * lambda + alpha;
        if denom == 0.0 {
            continue;
        }
        let coef = b * (lambda * y_norm / denom);
        for (wi, vi) in w.iter_mut().zip(v) {
            *wi += coef * vi;
        }
    }
    w
}

/// Direct dense solve of the normal equations by Gaussian elimination with
/// partial pivoting: `O(n^3)`.
pub fn train_ridge_naive(x: &DMatrix<f64>, y: &[f64], alpha: f64) -> Result<RidgeSolution> {
    check_alpha(alpha)?;
    let n = x.ncols();
    if y.len() != x.nrows() {
        return Err(QvtError::DimensionMismatch { expected: x.nrows(), got: y.len() });
    }
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = (0..x.nrows()).map(|k| x[(k, i)] * x[(k, j)]).sum::<f64>();
        }
        a[i][i] += alpha;
        a[i][n] = (0..x.nrows()).map(|k| x[(k, i)] * y[k]).sum();
    }
    let w = gauss_solve(a)?;
    let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(RidgeSolution { w, alpha, beta: Vec::new(), y_norm })
}

/// Solve the augmented system `[A | b]` in place.
fn gauss_solve(mut a: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let n = a.len();
    let scale = a.iter().flat_map(|r| r[..n].iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[pivot][col].abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(QvtError::Singular(format!("normal matrix has no pivot in column {col}")));
        }
        a.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..=n {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut w = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|k| a[i][k] * w[k]).sum();
        w[i] = (a[i][n] - tail) / a[i][i];
    }
    Ok(w)
}

/// Responses of all cyclic shifts of the detection patch.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseVector {
    pub y_hat: Vec<f64>,
    /// Smallest index attaining the maximum (0-based).
    pub argmax_index: usize,
}

pub fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
        .0
}

/// `y_hat = Z w`.
pub fn detect<O: CirculantOperator + ?Sized>(z: &O, w: &[f64]) -> Result<ResponseVector> {
    let y_hat = z.apply_real(w)?;
    let argmax_index = argmax(&y_hat);
    Ok(ResponseVector { y_hat, argmax_index })
}

/// Signed displacement encoded by a response peak at cyclic shift `a` on a
/// ring of `n`: the peak at `a` means the content moved by `-a`, reported in
/// `(-n/2, n/2]`.
pub fn peak_displacement(a: usize, n: usize) -> i64 {
    let d = ((n - a % n) % n) as i64;
    if 2 * d > n as i64 {
        d - n as i64
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackerConfig {
    pub patch_len: usize,
    pub alpha: f64,
    pub c: f64,
    /// Rescale each patch to unit sum (and shift if negative) before use.
    pub normalize: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self { patch_len: 20, alpha: 0.03, c: DEFAULT_BANDWIDTH_C, normalize: true }
    }
}

fn extract(frame: &[f64], start: i64, len: usize) -> Result<&[f64]> {
    let end = start + len as i64;
    if start < 0 || end > frame.len() as i64 {
        return Err(QvtError::PatchOutOfBounds { start, end, len: frame.len() });
    }
    Ok(&frame[start as usize..end as usize])
}

/// Frame-to-frame tracking. Returns the patch start for every frame; `init`
/// is the patch start in the first frame.
pub fn track(frames: &[Vec<f64>], init: usize, cfg: &TrackerConfig) -> Result<Vec<usize>> {
    if frames.len() < 2 {
        return Err(QvtError::invalid("tracking needs at least two frames"));
    }
    check_alpha(cfg.alpha)?;
    let labels = gaussian_labels(cfg.patch_len, cfg.c)?;
    let mut pos = init as i64;
    let mut out = vec![init];
    for pair in frames.windows(2) {
        let base = make_circulant(extract(&pair[0], pos, cfg.patch_len)?, cfg.normalize)?;
        let sol = train_ridge_fft(&base, &labels.y, cfg.alpha)?;
        let next = make_circulant(extract(&pair[1], pos, cfg.patch_len)?, cfg.normalize)?;
        let resp = detect(&next, &sol.w)?;
        pos += peak_displacement(resp.argmax_index, cfg.patch_len);
        extract(&pair[1], pos, cfg.patch_len)?;
        out.push(pos as usize);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tracker2dConfig {
    pub patch_rows: usize,
    pub patch_cols: usize,
    pub alpha: f64,
    pub c: f64,
    pub normalize: bool,
}

impl Default for Tracker2dConfig {
    fn default() -> Self {
        Self { patch_rows: 8, patch_cols: 8, alpha: 0.03, c: DEFAULT_BANDWIDTH_C, normalize: true }
    }
}

fn extract_2d(frame: &[Vec<f64>], at: (i64, i64), rows: usize, cols: usize) -> Result<Vec<f64>> {
    let height = frame.len();
    let width = frame.first().map_or(0, Vec::len);
    if frame.iter().any(|r| r.len() != width) {
        return Err(QvtError::invalid("ragged frame rows"));
    }
    let (r0, c0) = at;
    if r0 < 0 || r0 + rows as i64 > height as i64 {
        return Err(QvtError::PatchOutOfBounds { start: r0, end: r0 + rows as i64, len: height });
    }
    if c0 < 0 || c0 + cols as i64 > width as i64 {
        return Err(QvtError::PatchOutOfBounds { start: c0, end: c0 + cols as i64, len: width });
    }
    let (r0, c0) = (r0 as usize, c0 as usize);
    Ok(frame[r0..r0 + rows].iter().flat_map(|r| r[c0..c0 + cols].iter().copied()).collect())
}

/// Two-dimensional tracking with block-circulant patches. Positions are
/// `(row, col)` of the patch's top-left corner.
pub fn track_2d(
    frames: &[Vec<Vec<f64>>],
    init: (usize, usize),
    cfg: &Tracker2dConfig,
) -> Result<Vec<(usize, usize)>> {
    if frames.len() < 2 {
        return Err(QvtError::invalid("tracking needs at least two frames"));
    }
    check_alpha(cfg.alpha)?;
    let (pr, pc) = (cfg.patch_rows, cfg.patch_cols);
    let labels = gaussian_labels_2d(pr, pc, cfg.c)?;
    let mut pos = (init.0 as i64, init.1 as i64);
    let mut out = vec![init];
    for pair in frames.windows(2) {
        let base = make_block_circulant(&extract_2d(&pair[0], pos, pr, pc)?, pr, pc, cfg.normalize)?;
        let sol = train_ridge_fft(&base, &labels.y, cfg.alpha)?;
        let next = make_block_circulant(&extract_2d(&pair[1], pos, pr, pc)?, pr, pc, cfg.normalize)?;
        let resp = detect(&next, &sol.w)?;
        let (a, b) = (resp.argmax_index / pc, resp.argmax_index % pc);
        pos = (pos.0 + peak_displacement(a, pr), pos.1 + peak_displacement(b, pc));
        extract_2d(&pair[1], pos, pr, pc)?;
        out.push((pos.0 as usize, pos.1 as usize));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
        num / den
    }

    #[test]
    fn labels_peak_and_symmetry() {
        let l = gaussian_labels(9, 0.5).unwrap();
        assert_eq!(l.y[0], 1.0);
        for i in 1..9 {
            assert_eq!(l.y[i], l.y[9 - i]);
        }
    }

    #[test]
    fn labels_unit_bandwidth() {
        let l = gaussian_labels(4, 0.5).unwrap();
        assert_eq!(l.s, 1.0);
        let e = (-1.0f64).exp();
        let expect = [1.0, e, (-4.0f64).exp(), e];
        for (a, b) in l.y.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn labels_reject_bad_parameters() {
        assert!(gaussian_labels(1, 0.5).is_err());
        assert!(gaussian_labels(8, 0.0).is_err());
        assert!(gaussian_labels(8, f64::NAN).is_err());
    }

    #[test]
    fn identity_training() {
        let mut e1 = vec![0.0; 6];
        e1[0] = 1.0;
        let x = make_circulant(&e1, false).unwrap();
        let y = gaussian_labels(6, 0.5).unwrap().y;
        let w0 = train_ridge_fft(&x, &y, 0.0).unwrap().w;
        assert!(rel_err(&w0, &y) < 1e-14);
        let w1 = train_ridge_fft(&x, &y, 1.0).unwrap().w;
        let half: Vec<f64> = y.iter().map(|v| v / 2.0).collect();
        assert!(rel_err(&w1, &half) < 1e-14);
        let d = x.dense();
        assert!(rel_err(&train_ridge_naive(&d, &y, 0.0).unwrap().w, &y) < 1e-14);
        assert!(rel_err(&train_ridge_naive(&d, &y, 1.0).unwrap().w, &half) < 1e-14);
    }

    #[test]
    fn singular_without_regulariser_is_rejected() {
        let x = make_circulant(&[0.5, 0.5], false).unwrap();
        assert!(matches!(train_ridge_fft(&x, &[1.0, 0.0], 0.0), Err(QvtError::Singular(_))));
        assert!(train_ridge_fft(&x, &[1.0, 0.0], 0.1).is_ok());
        assert!(matches!(train_ridge_naive(&x.dense(), &[1.0, 0.0], 0.0), Err(QvtError::Singular(_))));
        assert!(train_ridge_fft(&x, &[1.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn fft_matches_naive_and_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..1.0)).collect();
        let op = make_circulant(&x, true).unwrap();
        let y = gaussian_labels(8, 0.5).unwrap().y;
        let fast = train_ridge_fft(&op, &y, 0.1).unwrap();
        let slow = train_ridge_naive(&op.dense(), &y, 0.1).unwrap();
        assert!(rel_err(&fast.w, &slow.w) < 1e-12);
        let d = op.dense();
        let lhs = (d.transpose() * &d + DMatrix::identity(8, 8) * 0.1) * nalgebra::DVector::from_vec(fast.w.clone());
        let rhs = d.transpose() * nalgebra::DVector::from_vec(y.clone());
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((lhs - rhs).norm() <= 1e-8 * ynorm);
    }

    #[test]
    fn spectral_assembly_reproduces_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..16).map(|_| rng.gen_range(0.0..1.0)).collect();
        let op = make_circulant(&x, true).unwrap();
        let y = gaussian_labels(16, 0.5).unwrap().y;
        let sol = train_ridge_fft(&op, &y, 0.05).unwrap();
        let w = spectral_assembly(&spectral(&op), &sol.beta, sol.y_norm, sol.alpha);
        assert!(w.iter().all(|z| z.im.abs() < 1e-10));
        let wr: Vec<f64> = w.iter().map(|z| z.re).collect();
        assert!(rel_err(&wr, &sol.w) < 1e-10);
    }

    #[test]
    fn detection_identity_and_self_response() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut e1 = vec![0.0; 8];
        e1[0] = 1.0;
        let w: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = detect(&make_circulant(&e1, false).unwrap(), &w).unwrap();
        assert!(rel_err(&r.y_hat, &w) < 1e-14);

        let x: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..1.0)).collect();
        let op = make_circulant(&x, true).unwrap();
        let y = gaussian_labels(8, 0.5).unwrap().y;
        let sol = train_ridge_fft(&op, &y, 0.0).unwrap();
        let r = detect(&op, &sol.w).unwrap();
        assert!(rel_err(&r.y_hat, &y) < 1e-9);
        assert_eq!(r.argmax_index, 0);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[0.0, 2.0, 1.0, 2.0]), 1);
        assert_eq!(peak_displacement(17, 20), 3);
        assert_eq!(peak_displacement(2, 20), -2);
        assert_eq!(peak_displacement(0, 20), 0);
        assert_eq!(peak_displacement(10, 20), 10);
    }

    fn frame_with_object(len: usize, at: usize, rng: &mut ChaCha8Rng, obj: &[f64]) -> Vec<f64> {
        let mut f: Vec<f64> = (0..len).map(|_| rng.gen_range(0.3..0.4)).collect();
        f[at..at + obj.len()].copy_from_slice(obj);
        f
    }

    #[test]
    fn static_and_moving_objects() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let obj: Vec<f64> = (0..10).map(|_| rng.gen_range(0.8..1.0)).collect();
        let cfg = TrackerConfig::default();
        let still: Vec<Vec<f64>> = (0..5).map(|_| frame_with_object(80, 30, &mut rng, &obj)).collect();
        assert_eq!(track(&still, 25, &cfg).unwrap(), vec![25; 5]);
        let moving: Vec<Vec<f64>> = (0..5).map(|k| frame_with_object(80, 20 + 3 * k, &mut rng, &obj)).collect();
        let traj = track(&moving, 15, &cfg).unwrap();
        assert_eq!(traj, vec![15, 18, 21, 24, 27]);
    }

    #[test]
    fn patch_bounds_are_enforced() {
        let frames = vec![vec![0.5; 30], vec![0.5; 30]];
        let cfg = TrackerConfig::default();
        assert!(matches!(track(&frames, 15, &cfg), Err(QvtError::PatchOutOfBounds { .. })));
        assert!(track(&frames[..1], 0, &cfg).is_err());
    }
}
