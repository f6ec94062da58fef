//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Everything here works on [`ComplexMatrix`], a row-major dense matrix of
//! `Complex64`. Dimensions stay small (the joint space is capped around 64),
//! so the algorithms favour accuracy and determinism over asymptotics: the
//! Hermitian eigensolver is a cyclic Jacobi sweep, and matrix functions are
//! evaluated spectrally.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Eigenvalues closer than this fraction of the spectral range are treated as
/// one degenerate subspace.
pub const DEGENERACY_RTOL: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |M - M^dagger| = {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("support violation: rho has weight {weight:e} where sigma vanishes")]
    SupportViolation { weight: f64 },
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics if the entry count is
    /// not `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self::from_vec(r, c, data)
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m[(i, j)] = ui * vj.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * k).collect(),
        }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(Complex64::new(k, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) <= tol
    }

    /// Largest entry of |M - M†|; `f64::INFINITY` for non-square input.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut r: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// ⟨u|M|v⟩.
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        inner(u, &self.mul_vec(v))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// ⟨u|v⟩ (conjugate-linear in the first argument).
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn kron_vec(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for a in u {
        for b in v {
            out.push(a * b);
        }
    }
    out
}

/// Eigenpairs of a Hermitian matrix, values descending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector paired with `values[k]`.
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_real_diag(&self.values);
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }

    /// Applies `f` to the spectrum: V f(Λ) V†.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let fk = f(self.values[k]);
            let v = self.vector(k);
            for i in 0..n {
                let vik = v[i] * fk;
                for j in 0..n {
                    out[(i, j)] += vik * v[j].conj();
                }
            }
        }
        out
    }
}

fn ensure_hermitian(m: &ComplexMatrix) -> Result<(), LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let residual = m.hermiticity_residual();
    let tol = 1e-10 * m.max_abs().max(1.0);
    if residual > tol {
        return Err(LinalgError::NotHermitian { residual });
    }
    Ok(())
}

/// Cyclic Jacobi on a Hermitian matrix. Returns unsorted (values, vectors).
fn jacobi(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), LinalgError> {
    let n = m.rows;
    // symmetrise so that rounding in the input cannot drift
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            return Ok(((0..n).map(|i| a[(i, i)].re).collect(), v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 || mag <= 1e-18 * scale {
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = D R with D = diag(1, conj(phase)) on (p, q)
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = phase.conj() * (-s);
                let jqq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }
    let off: f64 = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| a[(i, j)].norm_sqr())
        .sum::<f64>()
        .sqrt();
    Err(LinalgError::NoConvergence {
        sweeps: JACOBI_MAX_SWEEPS,
        off,
    })
}

/// Rotates each column so that its first non-negligible component is real
/// and positive.
fn fix_phases(v: &mut ComplexMatrix) {
    for k in 0..v.cols {
        let col = v.column(k);
        let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(z) = col.iter().find(|z| z.norm() > 1e-8 * max.max(1e-300)) {
            let ph = z.conj() / z.norm();
            for i in 0..v.rows {
                v[(i, k)] *= ph;
            }
        }
    }
}

/// Diagonalises a Hermitian matrix.
///
/// Eigenvalues come back in descending order. Eigenvalues within
/// [`DEGENERACY_RTOL`] of the spectral range form one subspace; when a
/// `tiebreak` operator is supplied, each such subspace is re-diagonalised
/// against it so that ⟨v_k|T|v_k⟩ ascends inside the block. Every vector has
/// its first non-negligible component made real positive.
pub fn hermitian_eigendecompose(
    m: &ComplexMatrix,
    tiebreak: Option<&ComplexMatrix>,
) -> Result<EigenSystem, LinalgError> {
    ensure_hermitian(m)?;
    if let Some(t) = tiebreak {
        ensure_hermitian(t)?;
        if t.rows != m.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "tiebreak is {}x{}, matrix is {}x{}",
                t.rows, t.cols, m.rows, m.cols
            )));
        }
    }
    let n = m.rows;
    let (vals, vecs) = jacobi(m)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
    let mut values: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new)] = vecs[(i, old)];
        }
    }

    if let Some(t) = tiebreak {
        let range = values.first().copied().unwrap_or(0.0) - values.last().copied().unwrap_or(0.0);
        let maxabs = values.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let tol = DEGENERACY_RTOL * range.max(f64::EPSILON * maxabs).max(f64::MIN_POSITIVE);
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && (values[start] - values[end]).abs() <= tol {
                end += 1;
            }
            if end - start > 1 {
                rotate_block(&mut vectors, &mut values, start, end, t)?;
            }
            start = end;
        }
    }

    fix_phases(&mut vectors);
    Ok(EigenSystem { values, vectors })
}

fn rotate_block(
    vectors: &mut ComplexMatrix,
    values: &mut [f64],
    start: usize,
    end: usize,
    t: &ComplexMatrix,
) -> Result<(), LinalgError> {
    let n = vectors.rows;
    let k = end - start;
    let mut basis = ComplexMatrix::zeros(n, k);
    for c in 0..k {
        for i in 0..n {
            basis[(i, c)] = vectors[(i, start + c)];
        }
    }
    let projected = &(&basis.adjoint() * t) * &basis;
    let sub = hermitian_eigendecompose(&projected, None)?;
    // ascending tiebreak expectation
    let mut rotation = ComplexMatrix::zeros(k, k);
    for c in 0..k {
        let src = k - 1 - c;
        for i in 0..k {
            rotation[(i, c)] = sub.vectors[(i, src)];
        }
    }
    let rotated = &basis * &rotation;
    let mean = values[start..end].iter().sum::<f64>() / k as f64;
    for c in 0..k {
        for i in 0..n {
            vectors[(i, start + c)] = rotated[(i, c)];
        }
        values[start + c] = mean;
    }
    Ok(())
}

pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let x = a[(ia, ja)];
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    out[(ia * b.rows + ib, ja * b.cols + jb)] = x * b[(ib, jb)];
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Reduced operator on `keep` of a square operator on A⊗B (A-index major).
pub fn partial_trace(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    keep: Subsystem,
) -> Result<ComplexMatrix, LinalgError> {
    if !m.is_square() || m.rows != dim_a * dim_b {
        return Err(LinalgError::DimensionMismatch(format!(
            "operator is {}x{}, expected {}x{}",
            m.rows,
            m.cols,
            dim_a * dim_b,
            dim_a * dim_b
        )));
    }
    Ok(match keep {
        Subsystem::A => {
            let mut out = ComplexMatrix::zeros(dim_a, dim_a);
            for i in 0..dim_a {
                for j in 0..dim_a {
                    out[(i, j)] = (0..dim_b).map(|b| m[(i * dim_b + b, j * dim_b + b)]).sum();
                }
            }
            out
        }
        Subsystem::B => {
            let mut out = ComplexMatrix::zeros(dim_b, dim_b);
            for i in 0..dim_b {
                for j in 0..dim_b {
                    out[(i, j)] = (0..dim_a).map(|a| m[(a * dim_b + i, a * dim_b + j)]).sum();
                }
            }
            out
        }
    })
}

/// U(t) = exp(-i t H), evaluated spectrally.
pub fn unitary_from_hamiltonian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix, LinalgError> {
    let eig = hermitian_eigendecompose(h, None)?;
    Ok(eig.map_spectrum(|e| Complex64::from_polar(1.0, -e * t)))
}

/// Largest entry magnitude of AB - BA.
pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64, LinalgError> {
    if !a.is_square() || !b.is_square() || a.rows != b.rows {
        return Err(LinalgError::DimensionMismatch(format!(
            "commutator of {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok((&(a * b) - &(b * a)).max_abs())
}

/// Von Neumann entropy -tr ρ ln ρ with 0 ln 0 = 0.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64, LinalgError> {
    let eig = hermitian_eigendecompose(rho, None)?;
    Ok(eig
        .values
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum())
}

/// Quantum relative entropy S(ρ‖σ) = tr ρ ln ρ - tr ρ ln σ.
pub fn relative_entropy(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64, LinalgError> {
    const SUPPORT_TOL: f64 = 1e-12;
    if rho.rows != sigma.rows {
        return Err(LinalgError::DimensionMismatch(format!(
            "rho is {}x{}, sigma is {}x{}",
            rho.rows, rho.cols, sigma.rows, sigma.cols
        )));
    }
    let neg_entropy = -von_neumann_entropy(rho)?;
    let sig = hermitian_eigendecompose(sigma, None)?;
    let mut cross = 0.0;
    for (k, &mu) in sig.values.iter().enumerate() {
        let w = sig.vector(k);
        let weight = rho.sandwich(&w, &w).re;
        if mu <= SUPPORT_TOL {
            if weight > SUPPORT_TOL {
                return Err(LinalgError::SupportViolation { weight });
            }
            continue;
        }
        cross += weight * mu.ln();
    }
    Ok((neg_entropy - cross).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]])
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&[1.0, -1.0])
    }

    #[test]
    fn pauli_z_is_already_diagonal() {
        let e = hermitian_eigendecompose(&pauli_z(), None).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
        assert!(e.vectors.approx_eq(&ComplexMatrix::identity(2), 0.0));
    }

    #[test]
    fn degenerate_identity_ordered_by_tiebreak() {
        let t = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let e = hermitian_eigendecompose(&ComplexMatrix::identity(2), Some(&t)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        let ex: Vec<f64> = (0..2)
            .map(|k| t.sandwich(&e.vector(k), &e.vector(k)).re)
            .collect();
        assert!(ex[0] < ex[1]);
        assert!(e.vectors.approx_eq(&ComplexMatrix::identity(2), 1e-14));
    }

    #[test]
    fn tiebreak_resolves_rotated_degenerate_block() {
        // diag(2, 1, 1) with tiebreak pauli-x on the degenerate block
        let m = ComplexMatrix::from_real_diag(&[2.0, 1.0, 1.0]);
        let mut t = ComplexMatrix::zeros(3, 3);
        t[(1, 2)] = c(1.0, 0.0);
        t[(2, 1)] = c(1.0, 0.0);
        let e = hermitian_eigendecompose(&m, Some(&t)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v1 = e.vector(1);
        let v2 = e.vector(2);
        assert!((t.sandwich(&v1, &v1).re + 1.0).abs() < 1e-12);
        assert!((t.sandwich(&v2, &v2).re - 1.0).abs() < 1e-12);
        assert!((v2[1].re - s).abs() < 1e-12 && (v2[2].re - s).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            hermitian_eigendecompose(&m, None),
            Err(LinalgError::NotHermitian { .. })
        ));
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            hermitian_eigendecompose(&r, None),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn tensor_of_occupations() {
        let a = ComplexMatrix::from_real_diag(&[0.8, 0.2]);
        let b = ComplexMatrix::from_real_diag(&[0.7, 0.3]);
        let ab = tensor_product(&a, &b);
        let expected = ComplexMatrix::from_real_diag(&[0.56, 0.24, 0.14, 0.06]);
        assert!(ab.approx_eq(&expected, 1e-15));
        assert!(tensor_product(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2))
            .approx_eq(&ComplexMatrix::identity(4), 0.0));
    }

    #[test]
    fn tensor_of_projectors_is_product_projector() {
        let p0 = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let p1 = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let m = tensor_product(&p0, &p1);
        let expected = ComplexMatrix::from_real_diag(&[0.0, 1.0, 0.0, 0.0]);
        assert!(m.approx_eq(&expected, 0.0));
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = vec![c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)];
        let p = ComplexMatrix::outer(&phi, &phi);
        let r = partial_trace(&p, 2, 2, Subsystem::B).unwrap();
        assert!(r.approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), 1e-15));
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let m = ComplexMatrix::identity(4);
        assert!(partial_trace(&m, 3, 2, Subsystem::A).is_err());
    }

    #[test]
    fn pauli_commutators() {
        assert_eq!(commutator_norm(&pauli_z(), &pauli_z()).unwrap(), 0.0);
        assert!((commutator_norm(&pauli_x(), &pauli_z()).unwrap() - 2.0).abs() < 1e-15);
        assert!(commutator_norm(&pauli_z(), &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn zero_time_unitary_is_identity() {
        let u = unitary_from_hamiltonian(&pauli_x(), 0.0).unwrap();
        assert!(u.approx_eq(&ComplexMatrix::identity(2), 1e-15));
    }

    #[test]
    fn relative_entropy_cases() {
        let rho = ComplexMatrix::from_real_diag(&[0.3, 0.7]);
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-15);
        let pure = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let mixed = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        let s = relative_entropy(&pure, &mixed).unwrap();
        assert!((s - std::f64::consts::LN_2).abs() < 1e-14);
        assert!(matches!(
            relative_entropy(&mixed, &pure),
            Err(LinalgError::SupportViolation { .. })
        ));
    }
}
