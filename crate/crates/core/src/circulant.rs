//! Circulant and block-circulant data matrices.
//!
//! A circulant `X = C(x)` has row `i` equal to `x` cyclically shifted right by
//! `i`, so `X[i][k] = x[(k - i) mod n]`. With `F[k][m] = e^{-2 pi i km/n}/sqrt(n)`
//! it factors as `X = F diag(DFT(x)) F^†`, where `DFT` is the unnormalised
//! forward transform. The block variant uses the same layout at both levels and
//! is diagonalised by `F_n ⊗ F_m`.
//!
//! Indices are 0-based throughout.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{QvtError, Result};
use crate::{fft, C64};

/// Relative threshold below which the smallest singular value marks an
/// operator as singular.
pub const SINGULAR_RTOL: f64 = 1e-8;

/// Record of the transform applied to raw pixels to meet the oracle
/// assumption (nonnegative entries summing to one): `x = (raw - shift) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleNormalization {
    pub shift: f64,
    pub scale: f64,
}

impl OracleNormalization {
    /// Shift by the minimum only when some entry is negative, then scale to unit sum.
    fn fit(raw: &[f64]) -> Result<Self> {
        let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let shift = min.min(0.0);
        let scale: f64 = raw.iter().map(|v| v - shift).sum();
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(QvtError::ZeroVector);
        }
        Ok(Self { shift, scale })
    }

    pub fn apply(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter().map(|v| (v - self.shift) / self.scale).collect()
    }
}

/// Common interface of [`CirculantMatrix`] and [`BlockCirculant`].
pub trait CirculantOperator: Sync {
    /// Side length of the (square) dense realisation.
    fn dim(&self) -> usize;

    /// Generator entries in the order matching [`shift_permutation`](Self::shift_permutation),
    /// i.e. `X = sum_j weights[j] * V_j`.
    fn weights(&self) -> &[f64];

    /// Eigenvalues `mu_j` of the operator in Fourier-mode order.
    fn eigenvalues(&self) -> &[C64];

    /// Unit eigenvector for Fourier mode `j`.
    fn fourier_mode(&self, j: usize) -> Vec<C64>;

    /// Destination permutation of the `j`-th cyclic shift `V_j`:
    /// `V_j |l⟩ = |perm[l]⟩`.
    fn shift_permutation(&self, j: usize) -> Vec<usize>;

    /// Apply `F diag(f(mu)) F^†` to `v`.
    fn apply_filter(&self, v: &[C64], f: &dyn Fn(C64) -> C64) -> Result<Vec<C64>>;

    /// Dense realisation.
    fn dense(&self) -> DMatrix<f64>;

    /// The preprocessing applied to reach oracle form, or `None` if the
    /// generator was taken as-is.
    fn normalization(&self) -> Option<OracleNormalization>;

    /// `X v` in `O(n log n)`.
    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.apply_filter(v, &|mu| mu)
    }

    /// `X^† v` in `O(n log n)`.
    fn apply_adjoint(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.apply_filter(v, &|mu| mu.conj())
    }

    fn apply_real(&self, v: &[f64]) -> Result<Vec<f64>> {
        let c: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        Ok(self.apply(&c)?.into_iter().map(|z| z.re).collect())
    }

    /// Whether the generator is nonnegative with unit sum, so that `||X||_2 = 1`.
    fn is_oracle_normalized(&self) -> bool {
        let w = self.weights();
        let sum: f64 = w.iter().sum();
        w.iter().all(|&v| v >= 0.0) && (sum - 1.0).abs() <= 1e-12
    }

    fn condition_number(&self) -> f64 {
        let (max, min) = modulus_extremes(self.eigenvalues());
        max / min
    }

    fn is_singular(&self) -> bool {
        let (max, min) = modulus_extremes(self.eigenvalues());
        min < SINGULAR_RTOL * max || max == 0.0
    }
}

fn modulus_extremes(mu: &[C64]) -> (f64, f64) {
    mu.iter().fold((0.0f64, f64::INFINITY), |(mx, mn), z| {
        let a = z.norm();
        (mx.max(a), mn.min(a))
    })
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(QvtError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// One-dimensional circulant generated by a real vector.
#[derive(Debug, Clone)]
pub struct CirculantMatrix {
    generator: Vec<f64>,
    eigenvalues: Vec<C64>,
    normalization: Option<OracleNormalization>,
}

/// Build `C(x)`. With `normalize_for_oracle` the generator is shifted to be
/// nonnegative (only if it has negative entries) and rescaled to unit sum.
pub fn make_circulant(x: &[f64], normalize_for_oracle: bool) -> Result<CirculantMatrix> {
    if x.is_empty() {
        return Err(QvtError::EmptyInput);
    }
    if x.len() < 2 {
        return Err(QvtError::invalid("circulant generator needs at least 2 entries"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(QvtError::invalid("generator contains non-finite values"));
    }
    let (generator, normalization) = if normalize_for_oracle {
        let norm = OracleNormalization::fit(x)?;
        (norm.apply(x), Some(norm))
    } else {
        (x.to_vec(), None)
    };
    let mut eigenvalues: Vec<C64> = generator.iter().map(|&v| C64::new(v, 0.0)).collect();
    fft::forward(&mut eigenvalues);
    Ok(CirculantMatrix {
        generator,
        eigenvalues,
        normalization,
    })
}

impl CirculantMatrix {
    pub fn n(&self) -> usize {
        self.generator.len()
    }

    pub fn generator(&self) -> &[f64] {
        &self.generator
    }
}

impl CirculantOperator for CirculantMatrix {
    fn dim(&self) -> usize {
        self.generator.len()
    }

    fn weights(&self) -> &[f64] {
        &self.generator
    }

    fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    fn fourier_mode(&self, j: usize) -> Vec<C64> {
        fourier_column(self.n(), j)
    }

    fn shift_permutation(&self, j: usize) -> Vec<usize> {
        let n = self.n();
        (0..n).map(|l| (l + n - j % n) % n).collect()
    }

    fn apply_filter(&self, v: &[C64], f: &dyn Fn(C64) -> C64) -> Result<Vec<C64>> {
        let n = self.n();
        check_len(n, v.len())?;
        let mut buf = v.to_vec();
        fft::inverse(&mut buf);
        for (b, mu) in buf.iter_mut().zip(&self.eigenvalues) {
            *b *= f(*mu);
        }
        fft::forward(&mut buf);
        let inv_n = 1.0 / n as f64;
        buf.iter_mut().for_each(|b| *b *= inv_n);
        Ok(buf)
    }

    fn dense(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, k| self.generator[(k + n - i) % n])
    }

    fn normalization(&self) -> Option<OracleNormalization> {
        self.normalization
    }
}

fn fourier_column(n: usize, j: usize) -> Vec<C64> {
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            let phase = -2.0 * std::f64::consts::PI * ((k * j) % n) as f64 / n as f64;
            C64::from_polar(scale, phase)
        })
        .collect()
}

/// Block circulant with circulant blocks. The generator is an `n x m` matrix
/// whose row `d` generates the `m x m` block placed on block-diagonal `d`:
/// `X[(a, r), (b, l)] = x[(b - a) mod n][(l - r) mod m]`.
#[derive(Debug, Clone)]
pub struct BlockCirculant {
    rows: usize,
    cols: usize,
    generator: Vec<f64>,
    eigenvalues: Vec<C64>,
    normalization: Option<OracleNormalization>,
}

/// Build the block circulant from row-major `rows x cols` generator entries.
pub fn make_block_circulant(
    x: &[f64],
    rows: usize,
    cols: usize,
    normalize_for_oracle: bool,
) -> Result<BlockCirculant> {
    if rows < 2 || cols < 2 {
        return Err(QvtError::invalid(format!(
            "block circulant needs n, m >= 2 (got {rows} x {cols})"
        )));
    }
    check_len(rows * cols, x.len())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(QvtError::invalid("generator contains non-finite values"));
    }
    let (generator, normalization) = if normalize_for_oracle {
        let norm = OracleNormalization::fit(x)?;
        (norm.apply(x), Some(norm))
    } else {
        (x.to_vec(), None)
    };
    let mut eigenvalues: Vec<C64> = generator.iter().map(|&v| C64::new(v, 0.0)).collect();
    fft::along_both_axes(&mut eigenvalues, rows, cols, fft::forward);
    Ok(BlockCirculant {
        rows,
        cols,
        generator,
        eigenvalues,
        normalization,
    })
}

/// Convenience wrapper over a slice of equal-length rows.
pub fn make_block_circulant_rows(x: &[Vec<f64>], normalize_for_oracle: bool) -> Result<BlockCirculant> {
    let rows = x.len();
    let cols = x.first().map_or(0, Vec::len);
    if x.iter().any(|r| r.len() != cols) {
        return Err(QvtError::invalid("ragged generator rows"));
    }
    let flat: Vec<f64> = x.iter().flatten().copied().collect();
    make_block_circulant(&flat, rows, cols, normalize_for_oracle)
}

impl BlockCirculant {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn generator(&self) -> &[f64] {
        &self.generator
    }

    /// The `m x m` circulant generated by row `d`.
    pub fn block(&self, d: usize) -> CirculantMatrix {
        let row = &self.generator[d * self.cols..(d + 1) * self.cols];
        make_circulant(row, false).expect("block rows have length >= 2")
    }
}

impl CirculantOperator for BlockCirculant {
    fn dim(&self) -> usize {
        self.rows * self.cols
    }

    fn weights(&self) -> &[f64] {
        &self.generator
    }

    fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    fn fourier_mode(&self, j: usize) -> Vec<C64> {
        let (p, q) = (j / self.cols, j % self.cols);
        let fp = fourier_column(self.rows, p);
        let fq = fourier_column(self.cols, q);
        fp.iter()
            .flat_map(|a| fq.iter().map(move |b| a * b))
            .collect()
    }

    fn shift_permutation(&self, j: usize) -> Vec<usize> {
        let (n, m) = (self.rows, self.cols);
        let (d, e) = (j / m, j % m);
        (0..n * m)
            .map(|idx| {
                let (a, r) = (idx / m, idx % m);
                ((a + n - d) % n) * m + (r + m - e) % m
            })
            .collect()
    }

    fn apply_filter(&self, v: &[C64], f: &dyn Fn(C64) -> C64) -> Result<Vec<C64>> {
        let dim = self.dim();
        check_len(dim, v.len())?;
        let mut buf = v.to_vec();
        fft::along_both_axes(&mut buf, self.rows, self.cols, fft::inverse);
        for (b, mu) in buf.iter_mut().zip(&self.eigenvalues) {
            *b *= f(*mu);
        }
        fft::along_both_axes(&mut buf, self.rows, self.cols, fft::forward);
        let inv = 1.0 / dim as f64;
        buf.iter_mut().for_each(|b| *b *= inv);
        Ok(buf)
    }

    fn dense(&self) -> DMatrix<f64> {
        let (n, m) = (self.rows, self.cols);
        DMatrix::from_fn(n * m, n * m, |row, col| {
            let (a, r) = (row / m, row % m);
            let (b, l) = (col / m, col % m);
            self.generator[((b + n - a) % n) * m + (l + m - r) % m]
        })
    }

    fn normalization(&self) -> Option<OracleNormalization> {
        self.normalization
    }
}

/// Singular triples `X v_j = lambda_j u_j` of a circulant operator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Nonnegative, descending.
    pub singular_values: Vec<f64>,
    pub left_vectors: Vec<Vec<C64>>,
    pub right_vectors: Vec<Vec<C64>>,
    /// Fourier-mode index of each triple.
    pub mode_index: Vec<usize>,
    /// `max |mu| / min |mu|`, infinite when some eigenvalue vanishes.
    pub condition_number: f64,
    pub singular: bool,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.singular_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singular_values.is_empty()
    }

    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn min_singular_value(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

/// Singular value decomposition read off the Fourier diagonalisation: the
/// right vectors are Fourier modes, the left vectors the same modes with the
/// eigenvalue phase absorbed. Sorted by descending value; values equal to
/// within 1e-12 (relative) keep ascending mode order.
pub fn spectral<O: CirculantOperator + ?Sized>(op: &O) -> SpectralDecomposition {
    let mu = op.eigenvalues();
    let moduli: Vec<f64> = mu.iter().map(|z| z.norm()).collect();
    let mut order: Vec<usize> = (0..mu.len()).collect();
    order.sort_by(|&a, &b| moduli[b].total_cmp(&moduli[a]).then(a.cmp(&b)));
    let scale = moduli.iter().copied().fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && (moduli[order[start]] - moduli[order[end]]).abs() <= tol {
            end += 1;
        }
        order[start..end].sort_unstable();
        start = end;
    }

    let mut singular_values = Vec::with_capacity(mu.len());
    let mut left_vectors = Vec::with_capacity(mu.len());
    let mut right_vectors = Vec::with_capacity(mu.len());
    for &j in &order {
        let v = op.fourier_mode(j);
        let lambda = moduli[j];
        let phase = if lambda > 0.0 { mu[j] / lambda } else { C64::new(1.0, 0.0) };
        left_vectors.push(v.iter().map(|c| c * phase).collect());
        right_vectors.push(v);
        singular_values.push(lambda);
    }
    SpectralDecomposition {
        singular_values,
        left_vectors,
        right_vectors,
        mode_index: order,
        condition_number: op.condition_number(),
        singular: op.is_singular(),
    }
}

/// `F diag(mu) F^†` assembled densely, for checking the factorisation.
pub fn fourier_reconstruction<O: CirculantOperator + ?Sized>(op: &O) -> DMatrix<C64> {
    let n = op.dim();
    let modes: Vec<Vec<C64>> = (0..n).map(|j| op.fourier_mode(j)).collect();
    let mu = op.eigenvalues();
    DMatrix::from_fn(n, n, |r, c| {
        (0..n).map(|j| modes[j][r] * mu[j] * modes[j][c].conj()).sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shift_right_oracle(x: &[f64]) -> Vec<Vec<f64>> {
        let n = x.len();
        let mut rows = Vec::with_capacity(n);
        let mut row = x.to_vec();
        for _ in 0..n {
            rows.push(row.clone());
            row.rotate_right(1);
        }
        rows
    }

    fn dense_matvec(a: &DMatrix<f64>, v: &[C64]) -> Vec<C64> {
        (0..a.nrows())
            .map(|i| (0..a.ncols()).map(|k| v[k] * a[(i, k)]).sum())
            .collect()
    }

    #[test]
    fn three_by_three_layout() {
        let x = [1.0, 2.0, 3.0];
        let d = make_circulant(&x, false).unwrap().dense();
        let expect = [[1.0, 2.0, 3.0], [3.0, 1.0, 2.0], [2.0, 3.0, 1.0]];
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(d[(i, k)], expect[i][k]);
            }
        }
    }

    #[test]
    fn delta_generates_identity() {
        let mut x = vec![0.0; 6];
        x[0] = 1.0;
        let d = make_circulant(&x, false).unwrap().dense();
        assert_eq!(d, DMatrix::identity(6, 6));
    }

    #[test]
    fn dense_matches_row_shift_oracle() {
        let x = [0.5, 0.3, 0.2];
        let d = make_circulant(&x, false).unwrap().dense();
        let rows = shift_right_oracle(&x);
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(d[(i, k)], rows[i][k]);
            }
        }
    }

    #[test]
    fn rejects_degenerate_generators() {
        assert!(matches!(make_circulant(&[], false), Err(QvtError::EmptyInput)));
        assert!(make_circulant(&[1.0], false).is_err());
        assert!(matches!(make_circulant(&[0.0, 0.0, 0.0], true), Err(QvtError::ZeroVector)));
        assert!(make_circulant(&[0.0, 0.0], false).is_ok());
    }

    #[test]
    fn normalization_shifts_only_negative_input() {
        let x = make_circulant(&[2.0, 1.0, 1.0], true).unwrap();
        assert_eq!(x.generator(), &[0.5, 0.25, 0.25]);
        assert_eq!(x.normalization().unwrap().shift, 0.0);
        let y = make_circulant(&[-1.0, 1.0, 0.0], true).unwrap();
        assert_eq!(y.normalization().unwrap().shift, -1.0);
        assert!((y.generator().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(y.is_oracle_normalized());
        assert!((spectral(&y).max_singular_value() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_spectrum() {
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        let s = spectral(&make_circulant(&x, false).unwrap());
        assert!(s.singular_values.iter().all(|&l| (l - 1.0).abs() < 1e-15));
        assert_eq!(s.condition_number, 1.0);
        assert_eq!(s.mode_index, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn symmetric_pair_is_singular() {
        let s = spectral(&make_circulant(&[0.5, 0.5], false).unwrap());
        assert!((s.singular_values[0] - 1.0).abs() < 1e-15);
        assert!(s.singular_values[1].abs() < 1e-15);
        assert!(s.singular);
        assert!(s.condition_number.is_infinite());
    }

    #[test]
    fn singular_values_match_dense_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let op = make_circulant(&x, false).unwrap();
        let s = spectral(&op);
        let mut svd: Vec<f64> = op.dense().svd(false, false).singular_values.iter().copied().collect();
        svd.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in s.singular_values.iter().zip(&svd) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn singular_triples_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..7).map(|_| rng.gen_range(0.0..1.0)).collect();
        let op = make_circulant(&x, true).unwrap();
        let s = spectral(&op);
        for j in 0..7 {
            let xv = op.apply(&s.right_vectors[j]).unwrap();
            let res: f64 = xv
                .iter()
                .zip(&s.left_vectors[j])
                .map(|(a, u)| (a - u * s.singular_values[j]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-9);
            for k in 0..7 {
                let uu: C64 = s.left_vectors[j].iter().zip(&s.left_vectors[k]).map(|(a, b)| a.conj() * b).sum();
                let vv: C64 = s.right_vectors[j].iter().zip(&s.right_vectors[k]).map(|(a, b)| a.conj() * b).sum();
                let delta = if j == k { 1.0 } else { 0.0 };
                assert!((uu - delta).norm() < 1e-10);
                assert!((vv - delta).norm() < 1e-10);
            }
        }
        let w = s.singular_values.windows(2).all(|p| p[0] >= p[1]);
        assert!(w);
    }

    #[test]
    fn apply_identity_and_shift() {
        let v: Vec<C64> = (0..5).map(|i| C64::new(i as f64, -(i as f64) * 0.5)).collect();
        let id = make_circulant(&[1.0, 0.0, 0.0, 0.0, 0.0], false).unwrap();
        let out = id.apply(&v).unwrap();
        for (a, b) in out.iter().zip(&v) {
            assert!((a - b).norm() < 1e-12);
        }
        // x = e_2: (Xv)_i = v_{i+1}, a cyclic shift of v.
        let sh = make_circulant(&[0.0, 1.0, 0.0, 0.0, 0.0], false).unwrap();
        let out = sh.apply(&v).unwrap();
        for i in 0..5 {
            assert!((out[i] - v[(i + 1) % 5]).norm() < 1e-12);
        }
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        let op = make_circulant(&[1.0, 2.0, 3.0], false).unwrap();
        let v = vec![C64::new(1.0, 0.0); 4];
        assert!(matches!(op.apply(&v), Err(QvtError::DimensionMismatch { expected: 3, got: 4 })));
    }

    #[test]
    fn apply_matches_dense_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let x: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<C64> = (0..16).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let op = make_circulant(&x, false).unwrap();
        let fast = op.apply(&v).unwrap();
        let slow = dense_matvec(&op.dense(), &v);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
        let adj = op.apply_adjoint(&v).unwrap();
        let slow_adj = dense_matvec(&op.dense().transpose(), &v);
        for (a, b) in adj.iter().zip(&slow_adj) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn fourier_factorisation_reconstructs_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 3, 8, 20, 64] {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let op = make_circulant(&x, false).unwrap();
            let rec = fourier_reconstruction(&op);
            let d = op.dense();
            let err = (0..n * n).map(|i| (rec[i] - d[i]).norm()).fold(0.0, f64::max);
            assert!(err <= 1e-10, "n={n} err={err}");
        }
    }

    #[test]
    fn block_delta_is_identity() {
        let mut x = vec![0.0; 12];
        x[0] = 1.0;
        let b = make_block_circulant(&x, 3, 4, false).unwrap();
        assert_eq!(b.dense(), DMatrix::identity(12, 12));
    }

    #[test]
    fn block_layout_matches_hand_assembly() {
        let x = [0.1, 0.2, 0.3, 0.4];
        let b = make_block_circulant(&x, 2, 2, false).unwrap();
        let c1 = make_circulant(&[0.1, 0.2], false).unwrap().dense();
        let c2 = make_circulant(&[0.3, 0.4], false).unwrap().dense();
        let mut hand = DMatrix::zeros(4, 4);
        hand.view_mut((0, 0), (2, 2)).copy_from(&c1);
        hand.view_mut((0, 2), (2, 2)).copy_from(&c2);
        hand.view_mut((2, 0), (2, 2)).copy_from(&c2);
        hand.view_mut((2, 2), (2, 2)).copy_from(&c1);
        assert_eq!(b.dense(), hand);
    }

    #[test]
    fn uniform_block_generator_is_rank_one() {
        let x = vec![1.0 / 12.0; 12];
        let b = make_block_circulant(&x, 3, 4, false).unwrap();
        let sv = b.dense().svd(false, false).singular_values;
        let mut s: Vec<f64> = sv.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        assert!((s[0] - 1.0).abs() < 1e-12);
        assert!(s[1] < 1e-12);
    }

    #[test]
    fn block_apply_and_fourier_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x: Vec<f64> = (0..12).map(|_| rng.gen_range(0.0..1.0)).collect();
        let b = make_block_circulant(&x, 3, 4, true).unwrap();
        let v: Vec<C64> = (0..12).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let fast = b.apply(&v).unwrap();
        let slow = dense_matvec(&b.dense(), &v);
        for (a, c) in fast.iter().zip(&slow) {
            assert!((a - c).norm() < 1e-10);
        }
        let rec = fourier_reconstruction(&b);
        let d = b.dense();
        let err = (0..144).map(|i| (rec[i] - d[i]).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn shift_permutations_rebuild_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = make_block_circulant(&x, 2, 3, false).unwrap();
        let mut sum = DMatrix::<f64>::zeros(6, 6);
        for j in 0..6 {
            for (l, &dst) in b.shift_permutation(j).iter().enumerate() {
                sum[(dst, l)] += b.weights()[j];
            }
        }
        assert!((sum - b.dense()).abs().max() < 1e-15);
    }
}
