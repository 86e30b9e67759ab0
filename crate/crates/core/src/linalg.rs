//! Dense complex matrices and the handful of kernels the correction
//! algorithm needs: normalized Hilbert–Schmidt geometry, a cyclic Jacobi
//! Hermitian eigensolver, polar decomposition and the exponential of a
//! skew-Hermitian matrix.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Upper bound on Jacobi sweeps before the eigensolver gives up refining.
const MAX_JACOBI_SWEEPS: usize = 100;
/// Singular values below this are treated as kernel directions by the polar
/// fallback.
pub const SINGULAR_CUTOFF: f64 = 1e-8;
/// Newton iteration is abandoned for the spectral route above this estimated
/// condition number.
const NEWTON_MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not skew-Hermitian (defect {0:.3e})")]
    NotSkew(f64),
    #[error("matrix must be square with positive dimension, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Builds a matrix from rows; fails unless square, non-empty and finite.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self, LinalgError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(LinalgError::BadShape { rows: 0, cols: 0 });
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(LinalgError::BadShape { rows: dim, cols: row.len() });
            }
            data.extend(row);
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { dim, data })
    }

    /// Convenience constructor from real row-major entries (tests, fixtures).
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(rows).expect("square finite real matrix")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Sum of squared moduli of all entries.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Sum of squared moduli of the off-diagonal entries.
    pub fn off_diagonal_sq(&self) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    s += self[(r, c)].norm_sqr();
                }
            }
        }
        s
    }

    /// Copy with the diagonal zeroed.
    pub fn off_diagonal(&self) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m[(i, i)] = ZERO;
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matmul");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            let out_row = &mut out.data[r * n..(r + 1) * n];
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                let other_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self* · other` without materializing the adjoint.
    pub fn adjoint_mul(&self, other: &Self) -> Self {
        self.adjoint().matmul(other)
    }

    /// `self · other*`.
    pub fn mul_adjoint(&self, other: &Self) -> Self {
        self.matmul(&other.adjoint())
    }

    /// Commutator `self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Hermitian part `(m + m*)/2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// Integer power; negative exponents use the adjoint (caller guarantees
    /// unitarity when that matters).
    pub fn powi(&self, exp: i64) -> Self {
        let base = if exp < 0 { self.adjoint() } else { self.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = Self::identity(self.dim);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.matmul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.matmul(&sq);
            }
        }
        acc
    }

    /// Matrix whose columns are the selected columns of `self` (dim × k,
    /// returned as a column list).
    pub fn columns(&self, idx: &[usize]) -> Vec<Vec<C64>> {
        idx.iter().map(|&c| self.column(c)).collect()
    }

    /// Overwrites the off-diagonal part with the Hermitian average so that
    /// `m == m*` holds exactly.
    pub fn symmetrize(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for r in 0..n {
            out[(r, r)] = C64::new(self[(r, r)].re, 0.0);
            for c in (r + 1)..n {
                let z = (self[(r, c)] + self[(c, r)].conj()) * 0.5;
                out[(r, c)] = z;
                out[(c, r)] = z.conj();
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in add");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sub");
        ComplexMatrix {
            dim: self.dim,
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

// Nested arrays of `[re, im]` pairs, row-major.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim)
            .map(|r| self.row(r).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(rows).map_err(D::Error::custom)
    }
}

/// Normalized Hilbert–Schmidt norm `sqrt(tr(m*m)/dim)`.
pub fn hs_norm(m: &ComplexMatrix) -> f64 {
    if m.dim == 0 {
        return 0.0;
    }
    (m.frobenius_sq() / m.dim as f64).sqrt()
}

/// `‖a − b‖₂`.
pub fn hs_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    hs_norm(&(a - b))
}

/// `‖m*m − I‖₂`.
pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    hs_norm(&(&m.adjoint_mul(m) - &ComplexMatrix::identity(m.dim)))
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub basis: ComplexMatrix,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_real_diag(&self.eigenvalues);
        self.basis.matmul(&d).mul_adjoint(&self.basis)
    }
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// The input is accepted when `‖m − m*‖₂ ≤ 1e-10` and symmetrized before the
/// sweeps start.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig, LinalgError> {
    let defect = hs_distance(m, &m.adjoint());
    if defect > 1e-10 {
        return Err(LinalgError::NotHermitian(defect));
    }
    Ok(jacobi_eig(m.symmetrize()))
}

fn jacobi_eig(mut a: ComplexMatrix) -> HermitianEig {
    let n = a.dim;
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_sq().sqrt().max(f64::MIN_POSITIVE);
    let floor = 1e-30 * scale;

    // Sweep until no off-diagonal entry is visible next to its diagonal
    // entries; this goes past the 1e-14·n·scale mark to full precision.
    for _ in 0..MAX_JACOBI_SWEEPS {
        if a.off_diagonal_sq().sqrt() <= floor {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let negligible = app.abs() + 100.0 * r == app.abs() && aqq.abs() + 100.0 * r == aqq.abs();
                if r <= floor || negligible {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                rotated = true;
                // Phase-rotate so the (p, q) entry is real, then a real
                // symmetric Jacobi rotation zeroes it.
                let phase = apq / r;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Columns p, q are replaced by  col_p·c − col_q·s·conj(phase),
                // col_p·s·phase + col_q·c.
                let g = [
                    [C64::new(c, 0.0), phase * s],
                    [-phase.conj() * s, C64::new(c, 0.0)],
                ];
                apply_two_sided(&mut a, p, q, &g);
                apply_right(&mut v, p, q, &g);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut basis = ComplexMatrix::zeros(n);
    for (new_c, &old_c) in order.iter().enumerate() {
        for r in 0..n {
            basis[(r, new_c)] = v[(r, old_c)];
        }
    }
    HermitianEig { eigenvalues, basis }
}

/// `m ← m·G` on columns p, q, where G is the 2×2 block `g` (rows p, q).
pub(crate) fn apply_right(m: &mut ComplexMatrix, p: usize, q: usize, g: &[[C64; 2]; 2]) {
    for r in 0..m.dim {
        let xp = m[(r, p)];
        let xq = m[(r, q)];
        m[(r, p)] = xp * g[0][0] + xq * g[1][0];
        m[(r, q)] = xp * g[0][1] + xq * g[1][1];
    }
}

/// `m ← G*·m·G` for the 2×2 rotation `g` embedded at p, q.
pub(crate) fn apply_two_sided(m: &mut ComplexMatrix, p: usize, q: usize, g: &[[C64; 2]; 2]) {
    apply_right(m, p, q, g);
    for c in 0..m.dim {
        let xp = m[(p, c)];
        let xq = m[(q, c)];
        m[(p, c)] = g[0][0].conj() * xp + g[1][0].conj() * xq;
        m[(q, c)] = g[0][1].conj() * xp + g[1][1].conj() * xq;
    }
}

/// Inverse by Gauss–Jordan elimination with partial pivoting. Returns `None`
/// when a pivot vanishes.
pub fn inverse(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.dim;
    let mut a = m.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, a[(r, col)].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty pivot range");
        if piv_abs == 0.0 || !piv_abs.is_finite() {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.data.swap(piv * n + c, col * n + c);
                inv.data.swap(piv * n + c, col * n + c);
            }
        }
        let d = ONE / a[(col, col)];
        for c in 0..n {
            a[(col, c)] *= d;
            inv[(col, c)] *= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f == ZERO {
                continue;
            }
            for c in 0..n {
                let ac = a[(col, c)];
                let ic = inv[(col, c)];
                a[(r, c)] -= f * ac;
                inv[(r, c)] -= f * ic;
            }
        }
    }
    Some(inv)
}

/// Unitary factor of the polar decomposition `m = U·P`.
///
/// Scaled Newton iteration `X ← (ζX + (ζX)^{-*})/2` for well-conditioned
/// input. Ill-conditioned or singular input goes through the eigenvectors
/// of `m*m`; directions with singular value below [`SINGULAR_CUTOFF`] are
/// mapped onto an orthonormal completion of the range, chosen as close to
/// the identity as the range allows.
pub fn polar_unitary(m: &ComplexMatrix) -> ComplexMatrix {
    newton_polar(m).unwrap_or_else(|| spectral_polar(m))
}

fn newton_polar(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.dim;
    let fro = m.frobenius_sq().sqrt();
    if fro == 0.0 {
        return None;
    }
    let mut x = m.clone();
    for iter in 0..60 {
        let xi = inverse(&x)?;
        let fro_x = x.frobenius_sq().sqrt();
        let fro_xi = xi.frobenius_sq().sqrt();
        if iter == 0 && fro_x * fro_xi / n as f64 > NEWTON_MAX_CONDITION {
            return None;
        }
        // Frobenius-norm scaling; switched off once close to convergence.
        let zeta = if iter < 8 { (fro_xi / fro_x).sqrt() } else { 1.0 };
        let xi_adj = xi.adjoint();
        let next = &x.scale_real(0.5 * zeta) + &xi_adj.scale_real(0.5 / zeta);
        let step = (&next - &x).frobenius_sq().sqrt();
        x = next;
        if !x.is_finite() {
            return None;
        }
        if step <= 1e-14 * (n as f64).sqrt() {
            break;
        }
    }
    // One Newton polish on a nearly unitary iterate.
    if let Some(xi) = inverse(&x) {
        x = (&x + &xi.adjoint()).scale_real(0.5);
    }
    (unitarity_defect(&x) <= 1e-13).then_some(x)
}

fn spectral_polar(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.dim;
    let gram = m.adjoint_mul(m).symmetrize();
    let eig = jacobi_eig(gram);
    // Descending singular values.
    let mut range_in: Vec<Vec<C64>> = Vec::new();
    let mut range_out: Vec<Vec<C64>> = Vec::new();
    let mut kernel: Vec<Vec<C64>> = Vec::new();
    for idx in (0..n).rev() {
        let sigma = eig.eigenvalues[idx].max(0.0).sqrt();
        let v = eig.basis.column(idx);
        if sigma >= SINGULAR_CUTOFF {
            let mv = mat_vec(m, &v);
            let u: Vec<C64> = mv.iter().map(|z| z / sigma).collect();
            range_in.push(v);
            range_out.push(u);
        } else {
            kernel.push(v);
        }
    }
    // Re-orthonormalize the image vectors; they lose accuracy as sigma
    // approaches the cutoff.
    let mut outs: Vec<Vec<C64>> = Vec::with_capacity(n);
    for u in range_out {
        let u = orthonormalize_against(&u, &outs).unwrap_or_else(|| {
            fallback_unit_vector(&outs, n)
        });
        outs.push(u);
    }
    for k in &kernel {
        let w = orthonormalize_against(k, &outs).unwrap_or_else(|| fallback_unit_vector(&outs, n));
        outs.push(w);
    }
    let ins: Vec<&Vec<C64>> = range_in.iter().chain(kernel.iter()).collect();
    let mut u = ComplexMatrix::zeros(n);
    for (out, inp) in outs.iter().zip(ins) {
        for r in 0..n {
            for c in 0..n {
                u[(r, c)] += out[r] * inp[c].conj();
            }
        }
    }
    u
}

pub(crate) fn mat_vec(m: &ComplexMatrix, v: &[C64]) -> Vec<C64> {
    (0..m.dim)
        .map(|r| m.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Gram–Schmidt with one reorthogonalization pass. `None` when `v` lies
/// (numerically) in the span of `basis`.
pub(crate) fn orthonormalize_against(v: &[C64], basis: &[Vec<C64>]) -> Option<Vec<C64>> {
    let start = vec_norm(v);
    if start == 0.0 {
        return None;
    }
    let mut w = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let proj = dot(b, &w);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= proj * bi;
            }
        }
    }
    let norm = vec_norm(&w);
    if norm < 1e-6 * start {
        return None;
    }
    Some(w.into_iter().map(|z| z / norm).collect())
}

fn fallback_unit_vector(basis: &[Vec<C64>], n: usize) -> Vec<C64> {
    (0..n)
        .find_map(|i| {
            let mut e = vec![ZERO; n];
            e[i] = ONE;
            orthonormalize_against(&e, basis)
        })
        .expect("a standard basis vector outside a proper subspace")
}

/// `exp(k)` for skew-Hermitian `k`, computed through the spectral
/// decomposition of the Hermitian matrix `i·k`.
pub fn matrix_exp_skew(k: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let defect = hs_norm(&(k + &k.adjoint()));
    if defect > 1e-10 {
        return Err(LinalgError::NotSkew(defect));
    }
    let h = k.scale(C64::i());
    let eig = jacobi_eig(h.symmetrize());
    // k = −i·h, so exp(k) = V·diag(e^{−iλ})·V*.
    let phases: Vec<C64> = eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -l)).collect();
    Ok(eig.basis.matmul(&ComplexMatrix::from_diag(&phases)).mul_adjoint(&eig.basis))
}

fn gaussian_matrix(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim);
    for z in m.data.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *z = C64::new(re, im);
    }
    m
}

/// Haar-like random unitary: Gram–Schmidt on the columns of a complex
/// Gaussian matrix.
pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    assert!(dim >= 1, "random_unitary needs dim >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(dim, &mut rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for c in 0..dim {
        let v = g.column(c);
        let u = orthonormalize_against(&v, &cols).unwrap_or_else(|| fallback_unit_vector(&cols, dim));
        cols.push(u);
    }
    let mut u = ComplexMatrix::zeros(dim);
    for (c, col) in cols.iter().enumerate() {
        for r in 0..dim {
            u[(r, c)] = col[r];
        }
    }
    u
}

/// Random skew-Hermitian matrix with `hs_norm == 1`.
pub fn random_skew(dim: usize, seed: u64) -> ComplexMatrix {
    assert!(dim >= 1, "random_skew needs dim >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let g = gaussian_matrix(dim, &mut rng);
        let k = (&g - &g.adjoint()).scale_real(0.5);
        let n = hs_norm(&k);
        if n > 1e-8 {
            return k.scale_real(1.0 / n);
        }
    }
}
