//! Dense complex linear algebra sized for registers of up to a few qubits.
//!
//! Everything here works on row-major `dim × dim` matrices of `Complex64`.
//! Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
//! basis-state index.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-9;
/// Eigenvalues at or below this value are treated as zero in `λ log λ`.
pub const EIGEN_CUTOFF: f64 = 1e-12;
/// Eigenvalues below this value mean a "physical" input is not physical.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-6;

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Bit of basis index `index` belonging to qubit `qubit` in an `n`-qubit register.
#[inline]
pub fn qubit_bit(index: usize, qubit: usize, n_qubits: usize) -> usize {
    (index >> (n_qubits - 1 - qubit)) & 1
}

/// Bitstring with position 0 holding qubit 0.
pub fn index_to_bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if qubit_bit(index, q, n_qubits) == 1 { '1' } else { '0' })
        .collect()
}

pub fn bitstring_to_index(bits: &str) -> Result<usize> {
    bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        other => Err(Error::Parse(format!("invalid bit '{other}' in \"{bits}\""))),
    })
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a
    /// non-zero perfect square.
    pub fn from_vec(entries: Vec<Complex64>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != entries.len() {
            return Err(Error::DimensionMismatch {
                expected: dim.max(1) * dim.max(1),
                actual: entries.len(),
            });
        }
        Ok(Self { dim, data: entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: 0,
            });
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// `|ψ⟩⟨ψ|`
    pub fn outer(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "matrix-vector dimension mismatch");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "add dimension mismatch");
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|m[i][j] − conj(m[j][i])|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `(M + M†)/2`
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = self.adjoint().matmul(self);
        prod.sub(&Self::identity(self.dim)).frobenius_norm() <= tol
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

// Serialized as nested rows of `[re, im]` pairs.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim)
            .map(|i| self.row(i).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let rows: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

/// Single-qubit Pauli operators, in the order I, X, Y, Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> ComplexMatrix {
        let z = ZERO;
        let o = ONE;
        let i = Complex64::new(0.0, 1.0);
        let rows = match self {
            Pauli::I => vec![vec![o, z], vec![z, o]],
            Pauli::X => vec![vec![z, o], vec![o, z]],
            Pauli::Y => vec![vec![z, i.conj()], vec![i, z]],
            Pauli::Z => vec![vec![o, z], vec![z, -o]],
        };
        ComplexMatrix::from_rows(&rows).expect("2x2")
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::Parse(format!("unknown Pauli symbol '{other}'"))),
        }
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    let mut out = ComplexMatrix::zeros(da * db);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: len.next_power_of_two().max(1),
                actual: len,
            });
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[index] = ONE;
        Self {
            n_qubits,
            amplitudes,
        }
    }

    pub(crate) fn from_raw_parts(n_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        Self {
            n_qubits,
            amplitudes,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix {
            mat: ComplexMatrix::outer(&self.amplitudes),
            physical: true,
        }
    }
}

/// Hermitian, unit-trace matrix. `physical` is set only for states known to be
/// positive semidefinite (pure states, projections, and their reductions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    physical: bool,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace; the result is not marked physical.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let herm = mat.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        Ok(Self {
            mat,
            physical: false,
        })
    }

    /// Validates like [`DensityMatrix::new`] and additionally checks that no
    /// eigenvalue is below `-1e-9`.
    pub fn new_physical(mat: ComplexMatrix) -> Result<Self> {
        let rho = Self::new(mat)?;
        let eig = hermitian_eig(&rho.mat)?;
        if let Some(&min) = eig.values.first() {
            if min < -HERMITIAN_TOL {
                return Err(Error::NegativeEigenvalue(min));
            }
        }
        Ok(Self {
            physical: true,
            ..rho
        })
    }

    pub(crate) fn from_parts_unchecked(mat: ComplexMatrix, physical: bool) -> Self {
        Self { mat, physical }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            mat: ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
            physical: true,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn is_physical(&self) -> bool {
        self.physical
    }

    pub fn dim(&self) -> usize {
        self.mat.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.mat.dim.trailing_zeros() as usize
    }
}

/// Reduced state on the qubits in `keep`, listed in ascending order in the output.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize], n_qubits: usize) -> Result<DensityMatrix> {
    let mat = partial_trace_matrix(&rho.mat, keep, n_qubits)?;
    Ok(DensityMatrix {
        mat,
        physical: rho.physical,
    })
}

pub(crate) fn partial_trace_matrix(
    mat: &ComplexMatrix,
    keep: &[usize],
    n_qubits: usize,
) -> Result<ComplexMatrix> {
    if n_qubits >= usize::BITS as usize || mat.dim != 1usize << n_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1usize.checked_shl(n_qubits as u32).unwrap_or(0),
            actual: mat.dim,
        });
    }
    if keep.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    for w in kept.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateQubit(w[0]));
        }
    }
    if let Some(&bad) = kept.iter().find(|&&q| q >= n_qubits) {
        return Err(Error::QubitOutOfRange {
            index: bad,
            n_qubits,
        });
    }
    let traced: Vec<usize> = (0..n_qubits).filter(|q| kept.binary_search(q).is_err()).collect();

    let scatter = |local: usize, qubits: &[usize]| -> usize {
        let k = qubits.len();
        qubits.iter().enumerate().fold(0usize, |acc, (m, &q)| {
            acc | (((local >> (k - 1 - m)) & 1) << (n_qubits - 1 - q))
        })
    };
    let kept_idx: Vec<usize> = (0..1usize << kept.len()).map(|i| scatter(i, &kept)).collect();
    let traced_idx: Vec<usize> = (0..1usize << traced.len()).map(|t| scatter(t, &traced)).collect();

    let dk = kept_idx.len();
    let mut out = ComplexMatrix::zeros(dk);
    for (i, &fi) in kept_idx.iter().enumerate() {
        for (j, &fj) in kept_idx.iter().enumerate() {
            out[(i, j)] = traced_idx.iter().map(|&t| mat[(fi | t, fj | t)]).sum();
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    /// `V · diag(f(λ)) · V†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.dim;
        let mapped: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n)
                    .map(|k| self.vectors[(i, k)] * self.vectors[(j, k)].conj() * mapped[k])
                    .sum();
            }
        }
        out
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.vectors.dim).map(|i| self.vectors[(i, k)]).collect()
    }
}

/// Cyclic complex Jacobi eigensolver.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<Eigen> {
    let herm = h.hermiticity_error();
    if herm > HERMITIAN_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let n = h.dim;
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let threshold = JACOBI_TOL * a.frobenius_norm().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));
    let values = order.iter().map(|&k| diag[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (new_k, &old_k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new_k)] = v[(i, old_k)];
        }
    }
    Ok(Eigen { values, vectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

// Zeroes a[p][q] with G = diag(1, e^{-iφ}) · [[c, s], [-s, c]] acting on the
// (p, q) plane, where a[p][q] = r e^{iφ}: A ← G† A G, V ← V G.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r < f64::MIN_POSITIVE {
        return;
    }
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let ph = phase.conj();
    let g00 = Complex64::new(c, 0.0);
    let g01 = Complex64::new(s, 0.0);
    let g10 = ph * (-s);
    let g11 = ph * c;
    let n = a.dim;

    // A ← A G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g00 + akq * g10;
        a[(k, q)] = akp * g01 + akq * g11;
    }
    // A ← G† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g00.conj() * apk + g10.conj() * aqk;
        a[(q, k)] = g01.conj() * apk + g11.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g00 + vkq * g10;
        v[(k, q)] = vkp * g01 + vkq * g11;
    }
}

/// Principal square root of a positive semidefinite state. Eigenvalues in
/// `[-1e-6, 0)` are clamped to zero.
pub fn matrix_sqrt_psd(rho: &DensityMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(&rho.mat)?;
    if let Some(&min) = eig.values.first() {
        if min < -NEGATIVE_EIGEN_TOL {
            return Err(Error::NegativeEigenvalue(min));
        }
    }
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyMode {
    /// Input must be marked physical.
    Physical,
    /// Accepts unprojected reconstructions; negative eigenvalues contribute 0.
    Raw,
}

impl std::str::FromStr for EntropyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "physical" => Ok(EntropyMode::Physical),
            "raw" => Ok(EntropyMode::Raw),
            other => Err(Error::Parse(format!("unknown mode \"{other}\""))),
        }
    }
}

impl fmt::Display for EntropyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntropyMode::Physical => "physical",
            EntropyMode::Raw => "raw",
        })
    }
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix, mode: EntropyMode) -> Result<f64> {
    if mode == EntropyMode::Physical && !rho.physical {
        return Err(Error::NotPhysical);
    }
    let eig = hermitian_eig(&rho.mat)?;
    if mode == EntropyMode::Physical {
        if let Some(&min) = eig.values.first() {
            if min < -NEGATIVE_EIGEN_TOL {
                return Err(Error::NegativeEigenvalue(min));
            }
        }
    }
    Ok(shannon_bits(&eig.values))
}

/// `-Σ λ log₂ λ` over `λ > 1e-12`.
pub(crate) fn shannon_bits(values: &[f64]) -> f64 {
    let h: f64 = values
        .iter()
        .filter(|&&l| l > EIGEN_CUTOFF)
        .map(|&l| -l * l.log2())
        .sum();
    // avoid printing -0
    if h == 0.0 {
        0.0
    } else {
        h
    }
}

/// `Tr(ρ²)`
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.mat.data.iter().map(|z| z.norm_sqr()).sum()
}

/// `Tr √(√ρ_t ρ_e √ρ_t)`, clamped to `[0, 1]`.
pub fn fidelity(rho_t: &DensityMatrix, rho_e: &DensityMatrix) -> Result<f64> {
    if rho_t.dim() != rho_e.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho_t.dim(),
            actual: rho_e.dim(),
        });
    }
    if !rho_t.physical || !rho_e.physical {
        return Err(Error::NotPhysical);
    }
    let sqrt_t = matrix_sqrt_psd(rho_t)?;
    let inner = sqrt_t.matmul(&rho_e.mat).matmul(&sqrt_t).hermitian_part();
    let eig = hermitian_eig(&inner)?;
    let f: f64 = eig.values.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}
