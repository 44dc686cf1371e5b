//! Linear measurement operators `A: C^{n1×n2} → C^m` given by a stack of
//! matrices, `[A(Z)]_ℓ = ⟨M_ℓ, Z⟩ = trace(M_ℓ^* Z)`.
//!
//! Storage is one flat buffer indexed `ℓ + m·(j + n1·k)` for entry `(j, k)` of
//! `M_ℓ`. Every operation below touches each stored entry once, with the
//! measurement index innermost.

use std::io::{Read, Write};

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::random::{complex_gaussian, rng_from_seed};
use crate::scalar::{all_finite, czero, lit, to_f64, CMatrix, CVector, Real};

/// Default cap on the number of stored complex entries (`m·n1·n2`).
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 27;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOperator<T: Real> {
    m: usize,
    n1: usize,
    n2: usize,
    data: Vec<Complex<T>>,
    seed: Option<u64>,
}

/// Parameters of an i.i.d. `CN(0, 1/m)` operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianSpec {
    pub m: usize,
    pub n1: usize,
    pub n2: usize,
    pub seed: u64,
    pub max_entries: usize,
}

impl GaussianSpec {
    pub fn new(m: usize, n1: usize, n2: usize, seed: u64) -> Self {
        Self {
            m,
            n1,
            n2,
            seed,
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }
}

impl<T: Real> MeasurementOperator<T> {
    /// Builds an operator from explicit sensing matrices.
    pub fn from_matrices(matrices: &[CMatrix<T>]) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return invalid("operator needs at least one measurement matrix");
        };
        let (n1, n2) = first.shape();
        if n1 == 0 || n2 == 0 {
            return invalid("measurement matrices must have positive shape");
        }
        if matrices.iter().any(|mat| mat.shape() != (n1, n2)) {
            return invalid("measurement matrices do not share one shape");
        }
        let m = matrices.len();
        let mut data = vec![czero(); m * n1 * n2];
        for (l, mat) in matrices.iter().enumerate() {
            for k in 0..n2 {
                for j in 0..n1 {
                    data[l + m * (j + n1 * k)] = mat[(j, k)];
                }
            }
        }
        Self::from_raw(m, n1, n2, data, None)
    }

    /// Builds an operator from a closure giving `[M_ℓ]_{j,k}`.
    pub fn from_fn(
        m: usize,
        n1: usize,
        n2: usize,
        mut f: impl FnMut(usize, usize, usize) -> Complex<T>,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(m * n1 * n2);
        for k in 0..n2 {
            for j in 0..n1 {
                for l in 0..m {
                    data.push(f(l, j, k));
                }
            }
        }
        Self::from_raw(m, n1, n2, data, None)
    }

    fn from_raw(
        m: usize,
        n1: usize,
        n2: usize,
        data: Vec<Complex<T>>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if m == 0 || n1 == 0 || n2 == 0 {
            return invalid(format!(
                "operator dimensions must be positive, got ({m}, {n1}, {n2})"
            ));
        }
        debug_assert_eq!(data.len(), m * n1 * n2);
        if !all_finite(&data) {
            return invalid("operator entries must be finite");
        }
        Ok(Self {
            m,
            n1,
            n2,
            data,
            seed,
        })
    }

    /// The operator returning all `n1·n2` entries of its argument, ordered
    /// column-major (`ℓ = j + n1·k`).
    pub fn vectorization(n1: usize, n2: usize) -> Result<Self> {
        let m = n1 * n2;
        Self::from_fn(m, n1, n2, |l, j, k| {
            if l == j + n1 * k {
                Complex::new(T::one(), T::zero())
            } else {
                czero()
            }
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.m, self.n1, self.n2)
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `M_ℓ` as a dense matrix.
    pub fn matrix(&self, l: usize) -> CMatrix<T> {
        CMatrix::from_fn(self.n1, self.n2, |j, k| self.entry(l, j, k))
    }

    #[inline]
    pub fn entry(&self, l: usize, j: usize, k: usize) -> Complex<T> {
        self.data[l + self.m * (j + self.n1 * k)]
    }

    #[inline]
    fn slab(&self, j: usize, k: usize) -> &[Complex<T>] {
        let start = self.m * (j + self.n1 * k);
        &self.data[start..start + self.m]
    }

    /// `A(Z)`.
    pub fn apply(&self, z: &CMatrix<T>) -> Result<CVector<T>> {
        if z.shape() != (self.n1, self.n2) {
            return invalid(format!(
                "apply: argument shape {:?} does not match ({}, {})",
                z.shape(),
                self.n1,
                self.n2
            ));
        }
        let mut out = vec![czero(); self.m];
        for k in 0..self.n2 {
            for j in 0..self.n1 {
                let zjk = z[(j, k)];
                if zjk == czero() {
                    continue;
                }
                for (o, a) in out.iter_mut().zip(self.slab(j, k)) {
                    *o += a.conj() * zjk;
                }
            }
        }
        Ok(CVector::from_vec(out))
    }

    /// `A(x y^*)` without forming the outer product.
    pub fn apply_rank_one(&self, x: &CVector<T>, y: &CVector<T>) -> Result<CVector<T>> {
        let f = self.build_f(y)?;
        if x.len() != self.n1 {
            return invalid("apply_rank_one: left factor length mismatch");
        }
        Ok(f * x)
    }

    /// `A^*(w) = Σ_ℓ w_ℓ M_ℓ`.
    pub fn adjoint(&self, w: &CVector<T>) -> Result<CMatrix<T>> {
        if w.len() != self.m {
            return invalid(format!(
                "adjoint: expected length {}, got {}",
                self.m,
                w.len()
            ));
        }
        let w = w.as_slice();
        Ok(CMatrix::from_fn(self.n1, self.n2, |j, k| {
            self.slab(j, k)
                .iter()
                .zip(w)
                .fold(czero(), |acc, (a, wl)| acc + *a * *wl)
        }))
    }

    /// `F(y)`: the `m×n1` matrix with row `ℓ` equal to `y^* M_ℓ^*`, so that
    /// `A(x y^*) = F(y) x`.
    pub fn build_f(&self, y: &CVector<T>) -> Result<CMatrix<T>> {
        if y.len() != self.n2 {
            return invalid(format!(
                "build_F: expected length {}, got {}",
                self.n2,
                y.len()
            ));
        }
        let mut f = CMatrix::from_element(self.m, self.n1, czero());
        for k in 0..self.n2 {
            let yk = y[k];
            if yk == czero() {
                continue;
            }
            for j in 0..self.n1 {
                let slab = self.slab(j, k);
                for (o, a) in f.column_mut(j).iter_mut().zip(slab) {
                    *o += *a * yk;
                }
            }
        }
        f.iter_mut().for_each(|z| *z = z.conj());
        Ok(f)
    }

    /// `G(x)`: the `m×n2` matrix with row `ℓ` equal to `x^* M_ℓ`, so that
    /// `A(x y^*) = conj(G(x) y)`.
    pub fn build_g(&self, x: &CVector<T>) -> Result<CMatrix<T>> {
        if x.len() != self.n1 {
            return invalid(format!(
                "build_G: expected length {}, got {}",
                self.n1,
                x.len()
            ));
        }
        let mut g = CMatrix::from_element(self.m, self.n2, czero());
        for k in 0..self.n2 {
            let mut col = g.column_mut(k);
            for j in 0..self.n1 {
                let xj = x[j].conj();
                if xj == czero() {
                    continue;
                }
                for (o, a) in col.iter_mut().zip(self.slab(j, k)) {
                    *o += *a * xj;
                }
            }
        }
        Ok(g)
    }

    /// Gram matrix `A A^*`, entry `(ℓ, ℓ')` equal to `⟨M_ℓ, M_ℓ'⟩`.
    pub fn gram(&self) -> CMatrix<T> {
        let mut g = CMatrix::from_element(self.m, self.m, czero());
        for k in 0..self.n2 {
            for j in 0..self.n1 {
                let slab = self.slab(j, k);
                for (lp, b) in slab.iter().enumerate() {
                    let mut col = g.column_mut(lp);
                    for (o, a) in col.iter_mut().zip(slab) {
                        *o += a.conj() * b;
                    }
                }
            }
        }
        g
    }

    /// Writes the operator in the binary container format:
    ///
    /// | field   | type     |
    /// |---------|----------|
    /// | magic   | `b"SPFMEAS\0"` |
    /// | version | u32 LE (= 1) |
    /// | flags   | u32 LE, bit 0 set when a seed is recorded |
    /// | m, n1, n2 | u64 LE each |
    /// | seed    | u64 LE (0 when absent) |
    /// | entries | `m·n1·n2` pairs of f64 LE `(re, im)`, `M_ℓ` in order of `ℓ`, each row-major |
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        let flags: u32 = u32::from(self.seed.is_some());
        w.write_all(&flags.to_le_bytes())?;
        for d in [self.m, self.n1, self.n2] {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        w.write_all(&self.seed.unwrap_or(0).to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.n1 * self.n2);
        for l in 0..self.m {
            buf.clear();
            for j in 0..self.n1 {
                for k in 0..self.n2 {
                    let z = self.entry(l, j, k);
                    buf.extend_from_slice(&to_f64(z.re).to_le_bytes());
                    buf.extend_from_slice(&to_f64(z.im).to_le_bytes());
                }
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    /// Reads an operator written by [`write_to`](Self::write_to).
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let flags = read_u32(&mut r)?;
        let m = read_u64(&mut r)? as usize;
        let n1 = read_u64(&mut r)? as usize;
        let n2 = read_u64(&mut r)? as usize;
        let seed = read_u64(&mut r)?;
        let total = m
            .checked_mul(n1)
            .and_then(|x| x.checked_mul(n2))
            .filter(|&t| t > 0 && t <= DEFAULT_MAX_ENTRIES)
            .ok_or_else(|| Error::Format(format!("implausible dimensions ({m}, {n1}, {n2})")))?;
        let mut data = vec![czero(); total];
        let mut row = vec![0u8; 16 * n1 * n2];
        for l in 0..m {
            r.read_exact(&mut row)?;
            for j in 0..n1 {
                for k in 0..n2 {
                    let off = 16 * (j * n2 + k);
                    let re = f64::from_le_bytes(row[off..off + 8].try_into().unwrap());
                    let im = f64::from_le_bytes(row[off + 8..off + 16].try_into().unwrap());
                    data[l + m * (j + n1 * k)] = Complex::new(lit(re), lit(im));
                }
            }
        }
        let seed = (flags & 1 == 1).then_some(seed);
        Self::from_raw(m, n1, n2, data, seed)
    }
}

const MAGIC: &[u8; 8] = b"SPFMEAS\0";
const FORMAT_VERSION: u32 = 1;

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Draws an i.i.d. `CN(0, 1/m)` operator. Entries are generated in storage
/// order (measurement index fastest, then row, then column) from the ChaCha8
/// stream keyed by `spec.seed`.
pub fn gaussian_operator<T: Real>(spec: &GaussianSpec) -> Result<MeasurementOperator<T>> {
    let GaussianSpec {
        m,
        n1,
        n2,
        seed,
        max_entries,
    } = *spec;
    if m == 0 || n1 == 0 || n2 == 0 {
        return invalid(format!(
            "operator dimensions must be positive, got ({m}, {n1}, {n2})"
        ));
    }
    let total = m
        .checked_mul(n1)
        .and_then(|x| x.checked_mul(n2))
        .filter(|&t| t <= max_entries)
        .ok_or_else(|| {
            Error::Resource(format!(
                "operator with ({m}, {n1}, {n2}) exceeds the budget of {max_entries} entries"
            ))
        })?;
    let mut rng = rng_from_seed(seed);
    let variance = 1.0 / m as f64;
    let data = (0..total)
        .map(|_| complex_gaussian(&mut rng, variance))
        .collect();
    MeasurementOperator::from_raw(m, n1, n2, data, Some(seed))
}

/// Coefficients `f_ℓ(ξ_j, ζ_k)` of `m` bilinear forms in bases `(ξ_j)` of
/// `C^{n1}` and `(ζ_k)` of `C^{n2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearProblem<T: Real> {
    m: usize,
    n1: usize,
    n2: usize,
    // row-major (ℓ, j, k)
    coefficients: Vec<Complex<T>>,
}

impl<T: Real> BilinearProblem<T> {
    pub fn new(m: usize, n1: usize, n2: usize, coefficients: Vec<Complex<T>>) -> Result<Self> {
        if m == 0 || n1 == 0 || n2 == 0 {
            return invalid("bilinear problem dimensions must be positive");
        }
        if coefficients.len() != m * n1 * n2 {
            return invalid(format!(
                "coefficient tensor has {} entries, expected {}",
                coefficients.len(),
                m * n1 * n2
            ));
        }
        if !all_finite(&coefficients) {
            return invalid("bilinear coefficients must be finite");
        }
        Ok(Self {
            m,
            n1,
            n2,
            coefficients,
        })
    }

    pub fn from_fn(
        m: usize,
        n1: usize,
        n2: usize,
        mut f: impl FnMut(usize, usize, usize) -> Complex<T>,
    ) -> Result<Self> {
        let mut c = Vec::with_capacity(m * n1 * n2);
        for l in 0..m {
            for j in 0..n1 {
                for k in 0..n2 {
                    c.push(f(l, j, k));
                }
            }
        }
        Self::new(m, n1, n2, c)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.m, self.n1, self.n2)
    }

    pub fn coefficient(&self, l: usize, j: usize, k: usize) -> Complex<T> {
        self.coefficients[(l * self.n1 + j) * self.n2 + k]
    }

    /// Evaluates `f_ℓ(x, y) = Σ_{j,k} x_j y_k f_ℓ(ξ_j, ζ_k)` for every ℓ.
    pub fn evaluate(&self, x: &CVector<T>, y: &CVector<T>) -> Result<CVector<T>> {
        if x.len() != self.n1 || y.len() != self.n2 {
            return invalid("evaluate: argument length mismatch");
        }
        Ok(CVector::from_fn(self.m, |l, _| {
            let mut acc = czero();
            for j in 0..self.n1 {
                for k in 0..self.n2 {
                    acc += x[j] * y[k] * self.coefficient(l, j, k);
                }
            }
            acc
        }))
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|z| *z * c).collect(),
            ..self.clone()
        }
    }
}

/// Lifts a bilinear system to a linear one on `x y^T`: the returned operator
/// has `[M_ℓ]_{j,k} = conj(f_ℓ(ξ_j, ζ_k))`, hence
/// `A(u v^*)_ℓ = Σ_{j,k} u_j conj(v_k) f_ℓ(ξ_j, ζ_k)`.
pub fn lift_bilinear<T: Real>(problem: &BilinearProblem<T>) -> Result<MeasurementOperator<T>> {
    let (m, n1, n2) = problem.shape();
    MeasurementOperator::from_fn(m, n1, n2, |l, j, k| problem.coefficient(l, j, k).conj())
}

/// Circular convolution of length-`n` signals over the standard bases:
/// `f_ℓ(e_j, e_k) = 1` when `j + k ≡ ℓ (mod n)`.
pub fn make_convolution_lifting<T: Real>(n: usize) -> Result<BilinearProblem<T>> {
    if n < 2 {
        return invalid("convolution length must be at least 2");
    }
    BilinearProblem::from_fn(n, n, n, |l, j, k| {
        if (j + k) % n == l {
            Complex::new(T::one(), T::zero())
        } else {
            czero()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{complex_gaussian_vector, rng_from_seed};
    use crate::scalar::cplx;

    fn random_matrix(rng: &mut crate::random::SeededRng, r: usize, c: usize) -> CMatrix<f64> {
        CMatrix::from_fn(r, c, |_, _| complex_gaussian(rng, 1.0))
    }

    #[test]
    fn vectorization_reads_entries() {
        let a = MeasurementOperator::<f64>::vectorization(3, 2).unwrap();
        let mut rng = rng_from_seed(1);
        let z = random_matrix(&mut rng, 3, 2);
        let y = a.apply(&z).unwrap();
        assert_eq!(y.as_slice(), z.as_slice());
        let back = a.adjoint(&y).unwrap();
        assert_eq!(back, z);
        assert_eq!(a.apply(&CMatrix::zeros(3, 2)).unwrap(), CVector::zeros(6));
    }

    #[test]
    fn adjoint_of_unit_vector_is_matrix() {
        let a: MeasurementOperator<f64> =
            gaussian_operator(&GaussianSpec::new(5, 3, 4, 9)).unwrap();
        let mut e = CVector::zeros(5);
        e[2] = cplx(1.0, 0.0);
        assert_eq!(a.adjoint(&e).unwrap(), a.matrix(2));
    }

    #[test]
    fn shape_errors() {
        let a: MeasurementOperator<f64> =
            gaussian_operator(&GaussianSpec::new(5, 3, 4, 9)).unwrap();
        assert!(matches!(
            a.apply(&CMatrix::zeros(4, 3)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            a.adjoint(&CVector::zeros(4)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            a.build_f(&CVector::zeros(3)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            a.build_g(&CVector::zeros(4)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(MeasurementOperator::<f64>::from_matrices(&[]).is_err());
        assert!(MeasurementOperator::from_matrices(&[
            CMatrix::<f64>::zeros(2, 2),
            CMatrix::zeros(2, 3)
        ])
        .is_err());
    }

    #[test]
    fn f_and_g_select_columns_and_rows() {
        let a: MeasurementOperator<f64> =
            gaussian_operator(&GaussianSpec::new(4, 3, 5, 2)).unwrap();
        let mut ek = CVector::zeros(5);
        ek[1] = cplx(1.0, 0.0);
        let f = a.build_f(&ek).unwrap();
        for l in 0..4 {
            for j in 0..3 {
                assert_eq!(f[(l, j)], a.matrix(l)[(j, 1)].conj());
            }
        }
        let mut ej = CVector::zeros(3);
        ej[2] = cplx(1.0, 0.0);
        let g = a.build_g(&ej).unwrap();
        for l in 0..4 {
            for k in 0..5 {
                assert_eq!(g[(l, k)], a.matrix(l)[(2, k)]);
            }
        }
    }

    #[test]
    fn f_and_g_are_antilinear() {
        let a: MeasurementOperator<f64> =
            gaussian_operator(&GaussianSpec::new(6, 3, 4, 3)).unwrap();
        let mut rng = rng_from_seed(4);
        let y = complex_gaussian_vector::<f64, _>(&mut rng, 4, 1.0);
        let x = complex_gaussian_vector::<f64, _>(&mut rng, 3, 1.0);
        let c = cplx::<f64>(0.3, -1.7);
        let lhs = a.build_f(&(&y * c)).unwrap();
        let rhs = a.build_f(&y).unwrap() * c.conj();
        assert!((lhs - rhs).norm() < 1e-12);
        let lhs = a.build_g(&(&x * c)).unwrap();
        let rhs = a.build_g(&x).unwrap() * c.conj();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn gaussian_is_deterministic() {
        let s = GaussianSpec::new(7, 4, 3, 42);
        let a: MeasurementOperator<f64> = gaussian_operator(&s).unwrap();
        let b: MeasurementOperator<f64> = gaussian_operator(&s).unwrap();
        assert_eq!(a, b);
        let c: MeasurementOperator<f64> =
            gaussian_operator(&GaussianSpec::new(7, 4, 3, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_budget_is_enforced() {
        let mut s = GaussianSpec::new(100, 100, 100, 1);
        s.max_entries = 1000;
        assert!(matches!(
            gaussian_operator::<f64>(&s),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn gram_matches_apply_adjoint() {
        let a: MeasurementOperator<f64> =
            gaussian_operator(&GaussianSpec::new(5, 3, 2, 8)).unwrap();
        let g = a.gram();
        let mut rng = rng_from_seed(3);
        let w = complex_gaussian_vector::<f64, _>(&mut rng, 5, 1.0);
        let direct = a.apply(&a.adjoint(&w).unwrap()).unwrap();
        assert!((g * &w - direct).norm() < 1e-12);
    }

    #[test]
    fn binary_container_round_trip() {
        let a: MeasurementOperator<f64> =
            gaussian_operator(&GaussianSpec::new(3, 2, 4, 77)).unwrap();
        let mut buf = Vec::new();
        a.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 4 + 8 * 4 + 16 * 24);
        assert_eq!(&buf[..8], b"SPFMEAS\0");
        // first entry: M_0[0,0]
        let re = f64::from_le_bytes(buf[48..56].try_into().unwrap());
        assert_eq!(re, a.entry(0, 0, 0).re);
        // second entry is M_0[0,1] (row-major within a matrix)
        let re = f64::from_le_bytes(buf[64..72].try_into().unwrap());
        assert_eq!(re, a.entry(0, 0, 1).re);
        let b = MeasurementOperator::<f64>::read_from(&buf[..]).unwrap();
        assert_eq!(a, b);
        assert_eq!(b.seed(), Some(77));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            MeasurementOperator::<f64>::read_from(&bad[..]),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn convolution_lifting_n2() {
        let p = make_convolution_lifting::<f64>(2).unwrap();
        assert_eq!(p.shape(), (2, 2, 2));
        let u = CVector::from_vec(vec![cplx(1.5, 0.0), cplx(-0.5, 2.0)]);
        let w = CVector::from_vec(vec![cplx(0.25, 1.0), cplx(3.0, 0.0)]);
        let out = p.evaluate(&u, &w).unwrap();
        assert_eq!(out[0], u[0] * w[0] + u[1] * w[1]);
        assert_eq!(out[1], u[0] * w[1] + u[1] * w[0]);
        assert!(make_convolution_lifting::<f64>(1).is_err());
    }

    #[test]
    fn delta_forms_lift_to_vectorization() {
        let (n1, n2) = (3, 2);
        let p = BilinearProblem::<f64>::from_fn(n1 * n2, n1, n2, |l, j, k| {
            if l == j + n1 * k {
                cplx(1.0, 0.0)
            } else {
                cplx(0.0, 0.0)
            }
        })
        .unwrap();
        let lifted = lift_bilinear(&p).unwrap();
        assert_eq!(lifted, MeasurementOperator::vectorization(n1, n2).unwrap());
    }

    #[test]
    fn lifting_is_linear_in_the_tensor() {
        let mut rng = rng_from_seed(12);
        let p = BilinearProblem::<f64>::from_fn(4, 3, 3, |_, _, _| complex_gaussian(&mut rng, 1.0))
            .unwrap();
        let c = cplx(0.5, 2.0);
        let u = complex_gaussian_vector::<f64, _>(&mut rng, 3, 1.0);
        let v = complex_gaussian_vector::<f64, _>(&mut rng, 3, 1.0);
        let x = u.clone() * v.adjoint();
        let base = lift_bilinear(&p).unwrap().apply(&x).unwrap();
        let scaled = lift_bilinear(&p.scaled(c)).unwrap().apply(&x).unwrap();
        assert!((scaled - base * c).norm() < 1e-12);
    }
}
