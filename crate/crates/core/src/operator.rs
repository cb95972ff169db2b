//! Dense complex square matrices.
//!
//! `Operator` is the arena every other module works in: tone coefficients
//! `h_m`, commutators, nested products and propagators. Storage is row-major
//! and values are immutable once built; arithmetic returns new operators.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Largest dimension accepted by constructors and tensor products.
pub const MAX_DIM: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("operator dimension must be positive")]
    EmptyDimension,
    #[error("expected {expected} entries, got {found}")]
    EntryCount { expected: usize, found: usize },
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("invalid standard operator: {0}")]
    InvalidStandard(String),
}

/// Dense complex square matrix.
#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<Complex64>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "operator dimension must be positive");
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            out.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        out
    }

    /// Builds an operator from row-major entries, validating shape and finiteness.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self, OperatorError> {
        if dim == 0 {
            return Err(OperatorError::EmptyDimension);
        }
        if dim > MAX_DIM {
            return Err(OperatorError::DimensionCap { dim, cap: MAX_DIM });
        }
        if data.len() != dim * dim {
            return Err(OperatorError::EntryCount { expected: dim * dim, found: data.len() });
        }
        if let Some(idx) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(OperatorError::NonFinite { row: idx / dim, col: idx % dim });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self, OperatorError> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != dim {
                return Err(OperatorError::NotSquare { row, len: r.len(), expected: dim });
            }
            data.extend(r);
        }
        Self::from_vec(dim, data)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, OperatorError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn from_diag(diag: &[Complex64]) -> Result<Self, OperatorError> {
        let dim = diag.len();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            data[i * dim + i] = d;
        }
        Self::from_vec(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                data.push(self.data[j * d + i].conj());
            }
        }
        Self { dim: d, data }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * c).collect() }
    }

    fn check_dim(&self, other: &Self) -> Result<(), OperatorError> {
        if self.dim != other.dim {
            return Err(OperatorError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_dim(other)?;
        Ok(self.matmul_unchecked(other))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    fn matmul_unchecked(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            let row = &mut out[i * d..(i + 1) * d];
            for k in 0..d {
                let a = self.data[i * d + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &other.data[k * d..(k + 1) * d];
                for (o, &b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Self { dim: d, data: out }
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_dim(other)?;
        let ab = self.matmul_unchecked(other);
        let ba = other.matmul_unchecked(self);
        Ok(ab.zip_with(&ba, |x, y| x - y))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor_product(&self, other: &Self) -> Result<Self, OperatorError> {
        let (da, db) = (self.dim, other.dim);
        let dim = da.checked_mul(db).unwrap_or(usize::MAX);
        if dim > MAX_DIM {
            return Err(OperatorError::DimensionCap { dim, cap: MAX_DIM });
        }
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..da {
            for j in 0..da {
                let a = self.data[i * da + j];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        data[(i * db + k) * dim + j * db + l] = a * other.data[k * db + l];
                    }
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let d = self.dim;
        (0..d)
            .map(|j| (0..d).map(|i| self.data[i * d + j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm of `self − other`; panics on dimension mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "distance: dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// `exp(self)` by Padé scaling and squaring.
    pub fn matrix_exponential(&self) -> Result<Self, OperatorError> {
        if let Some(idx) = self.data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(OperatorError::NonFinite { row: idx / self.dim, col: idx % self.dim });
        }
        Ok(expm::pade_expm(self))
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self.get(i, j);
                write!(f, "{:+.6e}{:+.6e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "add: dimension mismatch");
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "sub: dimension mismatch");
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "mul: dimension mismatch");
        self.matmul_unchecked(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        assert_eq!(self.dim, rhs.dim, "add_assign: dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

/// Built-in operator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardOp {
    Identity,
    Annihilate,
    Create,
    SigmaX,
    SigmaY,
    SigmaZ,
    SigmaPlus,
    SigmaMinus,
    Projector(usize, usize),
}

/// Constructs a standard operator of the given dimension.
///
/// Ladder operators use the truncated Fock convention: `a[n-1][n] = √n`, so the
/// top level has no upward coupling and `[a, a†]` deviates there. Pauli kinds
/// are defined on a qubit only; `σ₊ = |0⟩⟨1|`, `σ_z = diag(1, −1)`.
pub fn make_standard_operator(kind: StandardOp, dim: usize) -> Result<Operator, OperatorError> {
    if dim == 0 {
        return Err(OperatorError::EmptyDimension);
    }
    if dim > MAX_DIM {
        return Err(OperatorError::DimensionCap { dim, cap: MAX_DIM });
    }
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let pauli = |rows: [[Complex64; 2]; 2]| -> Result<Operator, OperatorError> {
        if dim != 2 {
            return Err(OperatorError::InvalidStandard(format!(
                "{kind:?} requires dimension 2, got {dim}"
            )));
        }
        Ok(Operator { dim: 2, data: rows.into_iter().flatten().collect() })
    };
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match kind {
        StandardOp::Identity => Ok(Operator::identity(dim)),
        StandardOp::Annihilate => {
            let mut op = Operator::zeros(dim);
            for n in 1..dim {
                op.data[(n - 1) * dim + n] = c((n as f64).sqrt(), 0.0);
            }
            Ok(op)
        }
        StandardOp::Create => Ok(make_standard_operator(StandardOp::Annihilate, dim)?.adjoint()),
        StandardOp::SigmaX => pauli([[z, one], [one, z]]),
        StandardOp::SigmaY => pauli([[z, c(0.0, -1.0)], [c(0.0, 1.0), z]]),
        StandardOp::SigmaZ => pauli([[one, z], [z, -one]]),
        StandardOp::SigmaPlus => pauli([[z, one], [z, z]]),
        StandardOp::SigmaMinus => pauli([[z, z], [one, z]]),
        StandardOp::Projector(i, j) => {
            if i >= dim || j >= dim {
                return Err(OperatorError::InvalidStandard(format!(
                    "projector indices ({i}, {j}) out of range for dimension {dim}"
                )));
            }
            let mut op = Operator::zeros(dim);
            op.data[i * dim + j] = one;
            Ok(op)
        }
    }
}

mod expm {
    use super::Operator;
    use num_complex::Complex64;

    const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
    const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
    const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
    const B9: [f64; 10] = [
        17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0,
        3960.0, 90.0, 1.0,
    ];
    const B13: [f64; 14] = [
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0, 10559470521600.0, 670442572800.0, 33522128640.0, 1323241920.0,
        40840800.0, 960960.0, 16380.0, 182.0, 1.0,
    ];
    // Backward-error thresholds on the 1-norm for each Padé degree.
    const THETA: [(usize, f64); 4] = [
        (3, 1.495585217958292e-2),
        (5, 2.539398330063230e-1),
        (7, 9.504178996162932e-1),
        (9, 2.097847961257068),
    ];
    const THETA13: f64 = 5.371920351148152;

    fn axpy(acc: &mut Operator, c: f64, x: &Operator) {
        for (a, b) in acc.data_mut().iter_mut().zip(x.as_slice()) {
            *a += b * c;
        }
    }

    fn low_order(a: &Operator, b: &[f64]) -> (Operator, Operator) {
        let d = a.dim();
        let a2 = a * a;
        let mut u = Operator::identity(d).scale_real(b[1]);
        let mut v = Operator::identity(d).scale_real(b[0]);
        let mut pow = Operator::identity(d);
        let mut k = 2;
        while k < b.len() {
            pow = &pow * &a2;
            axpy(&mut v, b[k], &pow);
            if k + 1 < b.len() {
                axpy(&mut u, b[k + 1], &pow);
            }
            k += 2;
        }
        (a * &u, v)
    }

    fn order13(a: &Operator) -> (Operator, Operator) {
        let d = a.dim();
        let b = &B13;
        let a2 = a * a;
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let ident = Operator::identity(d);

        let mut inner_u = a6.scale_real(b[13]);
        axpy(&mut inner_u, b[11], &a4);
        axpy(&mut inner_u, b[9], &a2);
        let mut u = &a6 * &inner_u;
        axpy(&mut u, b[7], &a6);
        axpy(&mut u, b[5], &a4);
        axpy(&mut u, b[3], &a2);
        axpy(&mut u, b[1], &ident);
        let u = a * &u;

        let mut inner_v = a6.scale_real(b[12]);
        axpy(&mut inner_v, b[10], &a4);
        axpy(&mut inner_v, b[8], &a2);
        let mut v = &a6 * &inner_v;
        axpy(&mut v, b[6], &a6);
        axpy(&mut v, b[4], &a4);
        axpy(&mut v, b[2], &a2);
        axpy(&mut v, b[0], &ident);
        (u, v)
    }

    pub(super) fn pade_expm(a: &Operator) -> Operator {
        let norm = a.one_norm();
        if norm == 0.0 {
            return Operator::identity(a.dim());
        }
        for (m, theta) in THETA {
            if norm <= theta {
                let b: &[f64] = match m {
                    3 => &B3,
                    5 => &B5,
                    7 => &B7,
                    _ => &B9,
                };
                let (u, v) = low_order(a, b);
                return solve_pade(&u, &v);
            }
        }
        let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
        let scaled = a.scale_real(2f64.powi(-s));
        let (u, v) = order13(&scaled);
        let mut r = solve_pade(&u, &v);
        for _ in 0..s {
            r = &r * &r;
        }
        r
    }

    /// Solves `(V − U) R = (V + U)`.
    fn solve_pade(u: &Operator, v: &Operator) -> Operator {
        let p = v + u;
        let q = v - u;
        lu_solve(&q, &p)
    }

    /// LU with partial pivoting; solves `A X = B` for square `B`.
    fn lu_solve(a: &Operator, b: &Operator) -> Operator {
        let n = a.dim();
        let mut lu: Vec<Complex64> = a.as_slice().to_vec();
        let mut x: Vec<Complex64> = b.as_slice().to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| lu[i * n + col].norm().total_cmp(&lu[j * n + col].norm()))
                .unwrap_or(col);
            if pivot != col {
                for k in 0..n {
                    lu.swap(col * n + k, pivot * n + k);
                    x.swap(col * n + k, pivot * n + k);
                }
            }
            let diag = lu[col * n + col];
            for row in col + 1..n {
                let f = lu[row * n + col] / diag;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                lu[row * n + col] = f;
                for k in col + 1..n {
                    let t = lu[col * n + k];
                    lu[row * n + k] -= f * t;
                }
                for k in 0..n {
                    let t = x[col * n + k];
                    x[row * n + k] -= f * t;
                }
            }
        }
        for col in (0..n).rev() {
            let diag = lu[col * n + col];
            for k in 0..n {
                let mut acc = x[col * n + k];
                for j in col + 1..n {
                    acc -= lu[col * n + j] * x[j * n + k];
                }
                x[col * n + k] = acc / diag;
            }
        }
        Operator::from_vec(n, x).unwrap_or_else(|_| Operator::zeros(n))
    }
}
