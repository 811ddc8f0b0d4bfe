//! Small dense symmetric/PSD linear algebra: solves, eigendecomposition,
//! inverse square roots, and weighted norms.
//!
//! Everything here is double precision and deterministic. The eigensolver is
//! a cyclic Jacobi iteration and the solver is a Cholesky factorization with
//! a single jitter retry; dimensions in this crate stay in the low hundreds,
//! so simplicity wins over speed.

use crate::error::{Error, Result};

/// Dense symmetric matrix, full row-major storage.
///
/// Symmetry is maintained structurally: all constructors and mutators write
/// both `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be >= 1");
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * m.dim + i] = v;
        }
        m
    }

    /// Build from an arbitrary generator; only the upper triangle is
    /// evaluated and mirrored, so the result is exactly symmetric.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    /// Rank-1 update `self += scale * v vᵀ`.
    pub fn add_outer(&mut self, v: &[f64], scale: f64) {
        assert_eq!(v.len(), self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let inc = scale * v[i] * v[j];
                self.data[i * self.dim + j] += inc;
                if i != j {
                    self.data[j * self.dim + i] += inc;
                }
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add_shift(&self, shift: f64) -> SymMatrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.data[i * self.dim + i] += shift;
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            out[i] = dot(row, x);
        }
        out
    }

    /// Difference `self - other`, used by diagnostics like `‖Σ̂₀ − Σ₀‖₂`.
    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= b;
        }
        out
    }

    /// Spectral norm (largest eigenvalue magnitude) via full decomposition.
    pub fn spectral_norm(&self) -> Result<f64> {
        let spec = sym_eig(self)?;
        Ok(spec
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs())))
    }
}

/// Eigendecomposition of a symmetric matrix: `A = V diag(λ) Vᵀ`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[j]` is the unit eigenvector for `eigenvalues[j]`.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl Spectrum {
    /// Re-assemble `V diag(λ) Vᵀ`; used by tests and the pseudo-inverse.
    pub fn reconstruct(&self) -> SymMatrix {
        let d = self.eigenvectors.first().map_or(0, |v| v.len());
        let mut m = SymMatrix::zeros(d.max(1));
        for (lam, vec) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            m.add_outer(vec, *lam);
        }
        m
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

fn off_diag_frobenius(a: &SymMatrix) -> f64 {
    let d = a.dim;
    let mut s = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            let v = a.get(i, j);
            s += 2.0 * v * v;
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigendecomposition. Converges when the off-diagonal
/// Frobenius norm drops below `1e-12 · ‖A‖_F`, capped at 100 sweeps.
pub fn sym_eig(a: &SymMatrix) -> Result<Spectrum> {
    let d = a.dim;
    let norm = a.frobenius();
    let tol = 1e-12 * norm;
    let mut m = a.clone();
    // v[j] accumulates the j-th eigenvector.
    let mut v: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            e
        })
        .collect();

    if norm > 0.0 {
        let mut converged = false;
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            if off_diag_frobenius(&m) <= tol {
                converged = true;
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let apq = m.get(p, q);
                    if apq.abs() <= tol / (d as f64) {
                        continue;
                    }
                    let app = m.get(p, p);
                    let aqq = m.get(q, q);
                    let tau = (aqq - app) / (2.0 * apq);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // Symmetry-preserving plane rotation: only the (p, q)
                    // cross entries and the 2x2 block change.
                    for k in 0..d {
                        if k == p || k == q {
                            continue;
                        }
                        let mkp = m.get(k, p);
                        let mkq = m.get(k, q);
                        m.set(k, p, c * mkp - s * mkq);
                        m.set(k, q, s * mkp + c * mkq);
                    }
                    m.set(p, q, 0.0);
                    m.set(p, p, app - t * apq);
                    m.set(q, q, aqq + t * apq);
                    // Eigenvector columns p and q rotate with the same angle.
                    for k in 0..d {
                        let vkp = v[p][k];
                        let vkq = v[q][k];
                        v[p][k] = c * vkp - s * vkq;
                        v[q][k] = s * vkp + c * vkq;
                    }
                }
            }
        }
        if !converged && off_diag_frobenius(&m) > tol {
            return Err(Error::NoConvergence {
                sweeps: JACOBI_MAX_SWEEPS,
                residual: off_diag_frobenius(&m),
            });
        }
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..d).map(|j| (m.get(j, j), v[j].clone())).collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Lower-triangular Cholesky factor of a PSD matrix plus shift.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    dim: usize,
    l: Vec<f64>,
}

impl CholeskyFactor {
    /// Solve `(L Lᵀ) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim);
        let d = self.dim;
        let mut y = b.to_vec();
        for i in 0..d {
            for j in 0..i {
                y[i] -= self.l[i * d + j] * y[j];
            }
            y[i] /= self.l[i * d + i];
        }
        for i in (0..d).rev() {
            for j in (i + 1)..d {
                y[i] -= self.l[j * d + i] * y[j];
            }
            y[i] /= self.l[i * d + i];
        }
        y
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn try_cholesky(a: &SymMatrix, shift: f64) -> std::result::Result<CholeskyFactor, (usize, f64)> {
    let d = a.dim;
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a.get(i, j) + if i == j { shift } else { 0.0 };
            for k in 0..j {
                sum -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err((i, sum));
                }
                l[i * d + i] = sum.sqrt();
            } else {
                l[i * d + j] = sum / l[j * d + j];
            }
        }
    }
    Ok(CholeskyFactor { dim: d, l })
}

/// Cholesky factorization of `A + shift·I` with a single jitter retry
/// (`1e-12 · trace/dim` added to the diagonal) before giving up.
pub fn cholesky(a: &SymMatrix, shift: f64) -> Result<CholeskyFactor> {
    match try_cholesky(a, shift) {
        Ok(f) => Ok(f),
        Err(_) => {
            let jitter = 1e-12 * a.add_shift(shift).trace() / a.dim as f64;
            try_cholesky(a, shift + jitter)
                .map_err(|(pivot, value)| Error::Singular { pivot, value })
        }
    }
}

/// Solve `(A + shift·I) x = b` for PSD `A`.
///
/// An exactly singular but consistent system still solves through the jitter
/// retry; an inconsistent one fails the residual check and reports the pivot
/// where the plain factorization broke down.
pub fn spd_solve(a: &SymMatrix, shift: f64, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.dim {
        return Err(Error::DimMismatch {
            what: "spd_solve rhs",
            expected: a.dim,
            actual: b.len(),
        });
    }
    match try_cholesky(a, shift) {
        Ok(f) => Ok(f.solve(b)),
        Err((pivot, value)) => {
            let jitter = 1e-12 * a.add_shift(shift).trace() / a.dim as f64;
            let f = try_cholesky(a, shift + jitter)
                .map_err(|(pivot, value)| Error::Singular { pivot, value })?;
            let x = f.solve(b);
            let ax = a.add_shift(shift).matvec(&x);
            let res = norm(&sub(&ax, b));
            if res > 1e-9 * norm(b).max(1.0) {
                return Err(Error::Singular { pivot, value });
            }
            Ok(x)
        }
    }
}

/// Symmetric inverse square root: returns `M` with `M (A + shift·I) M = I`.
pub fn spd_inv_sqrt(a: &SymMatrix, shift: f64) -> Result<SymMatrix> {
    if shift <= 0.0 {
        return Err(Error::invalid(format!(
            "spd_inv_sqrt requires shift > 0, got {shift}"
        )));
    }
    let spec = sym_eig(a)?;
    let mut m = SymMatrix::zeros(a.dim);
    for (lam, vec) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
        let shifted = lam.max(0.0) + shift;
        m.add_outer(vec, 1.0 / shifted.sqrt());
    }
    Ok(m)
}

/// Symmetric square root of `A + shift·I` (the inverse map of
/// [`spd_inv_sqrt`]); used by the coordinate-change oracle in tests and the
/// preconditioning equivalence check.
pub fn spd_sqrt(a: &SymMatrix, shift: f64) -> Result<SymMatrix> {
    if shift <= 0.0 {
        return Err(Error::invalid(format!(
            "spd_sqrt requires shift > 0, got {shift}"
        )));
    }
    let spec = sym_eig(a)?;
    let mut m = SymMatrix::zeros(a.dim);
    for (lam, vec) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
        m.add_outer(vec, (lam.max(0.0) + shift).sqrt());
    }
    Ok(m)
}

/// Weighted norm `sqrt(vᵀ (A + shift·I) v)` for PSD `A`.
pub fn weighted_norm(v: &[f64], a: &SymMatrix, shift: f64) -> Result<f64> {
    if v.len() != a.dim {
        return Err(Error::DimMismatch {
            what: "weighted_norm vector",
            expected: a.dim,
            actual: v.len(),
        });
    }
    let av = a.matvec(v);
    let q = dot(v, &av) + shift * dot(v, v);
    if q < -1e-9 {
        return Err(Error::PsdViolation { value: q });
    }
    Ok(q.max(0.0).sqrt())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `y += s * x`
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng as _;

    fn random_spd(dim: usize, seed: u64) -> SymMatrix {
        let mut rng = rng_from_seed(seed);
        let m: Vec<f64> = (0..dim * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        // MᵀM is PSD.
        SymMatrix::from_fn(dim, |i, j| {
            (0..dim).map(|k| m[k * dim + i] * m[k * dim + j]).sum()
        })
    }

    #[test]
    fn eig_of_diagonal_matrix() {
        let spec = sym_eig(&SymMatrix::from_diag(&[3.0, 1.0])).unwrap();
        assert_eq!(spec.eigenvalues, vec![3.0, 1.0]);
        // Standard basis up to sign.
        assert!((spec.eigenvectors[0][0].abs() - 1.0).abs() < 1e-12);
        assert!(spec.eigenvectors[0][1].abs() < 1e-12);
        assert!((spec.eigenvectors[1][1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_of_identity() {
        let spec = sym_eig(&SymMatrix::identity(4)).unwrap();
        for l in &spec.eigenvalues {
            assert!((l - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_reconstructs_random_spd() {
        let a = random_spd(6, 7);
        let spec = sym_eig(&a).unwrap();
        let rec = spec.reconstruct();
        let err = rec.sub(&a).frobenius() / a.frobenius();
        assert!(err < 1e-10, "reconstruction error {err}");
    }

    #[test]
    fn eig_of_zero_matrix() {
        let spec = sym_eig(&SymMatrix::zeros(3)).unwrap();
        assert_eq!(spec.eigenvalues, vec![0.0; 3]);
    }

    #[test]
    fn solve_identity_no_shift() {
        let b = vec![1.0, -2.0, 3.0];
        let x = spd_solve(&SymMatrix::identity(3), 0.0, &b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn solve_identity_with_shift_halves() {
        let b = vec![2.0, 4.0];
        let x = spd_solve(&SymMatrix::identity(2), 1.0, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn solve_residual_on_random_spd() {
        let a = random_spd(5, 11);
        let mut rng = rng_from_seed(12);
        let b: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = spd_solve(&a, 0.1, &b).unwrap();
        let ax = a.add_shift(0.1).matvec(&x);
        let res = norm(&sub(&ax, &b)) / norm(&b);
        assert!(res < 1e-9, "residual {res}");
    }

    #[test]
    fn solve_singular_reports_pivot() {
        // Rank-1 matrix, shift 0: not solvable even with jitter at this scale.
        let a = SymMatrix::from_fn(3, |i, j| if i == 0 && j == 0 { 1.0 } else { 0.0 });
        let err = spd_solve(&a, 0.0, &[1.0, 1.0, 1.0]).unwrap_err();
        match err {
            Error::Singular { pivot, .. } => assert!(pivot > 0),
            other => panic!("expected Singular, got {other:?}"),
        }
    }

    #[test]
    fn inv_sqrt_of_scaled_identity() {
        let m = spd_inv_sqrt(&SymMatrix::from_diag(&[3.0, 3.0]), 1.0).unwrap();
        for i in 0..2 {
            assert!((m.get(i, i) - 0.5).abs() < 1e-12);
        }
        let z = spd_inv_sqrt(&SymMatrix::zeros(2), 4.0).unwrap();
        for i in 0..2 {
            assert!((z.get(i, i) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn inv_sqrt_rejects_nonpositive_shift() {
        assert!(spd_inv_sqrt(&SymMatrix::identity(2), 0.0).is_err());
    }

    #[test]
    fn inv_sqrt_product_is_identity() {
        let a = random_spd(4, 21);
        let m = spd_inv_sqrt(&a, 0.5).unwrap();
        let shifted = a.add_shift(0.5);
        // m * shifted * m == I
        let mut prod = SymMatrix::zeros(4);
        for i in 0..4 {
            let col: Vec<f64> = (0..4).map(|k| m.get(k, i)).collect();
            let t = shifted.matvec(&col);
            let mt = m.matvec(&t);
            for j in 0..4 {
                prod.set(j, i, mt[j]);
            }
        }
        let err = prod.sub(&SymMatrix::identity(4)).frobenius();
        assert!(err < 1e-8, "product error {err}");
    }

    #[test]
    fn weighted_norm_examples() {
        let v = vec![0.3, -0.4, 1.2];
        let n = weighted_norm(&v, &SymMatrix::identity(3), 0.0).unwrap();
        assert!((n - norm(&v)).abs() < 1e-12);

        let n2 = weighted_norm(&[1.0, 0.0], &SymMatrix::from_diag(&[4.0, 9.0]), 0.0).unwrap();
        assert!((n2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_norm_matches_triple_loop() {
        let a = random_spd(5, 33);
        let mut rng = rng_from_seed(34);
        let v: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut q = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                q += v[i] * a.get(i, j) * v[j];
            }
        }
        let n = weighted_norm(&v, &a, 0.0).unwrap();
        assert!((n - q.max(0.0).sqrt()).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn solve_multiply_back(seed in 0u64..500, dim in 1usize..7) {
            let a = random_spd(dim, seed);
            let mut rng = rng_from_seed(seed ^ 0xabcd);
            let b: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let shift = 0.01 + (seed % 10) as f64 * 0.1;
            let x = spd_solve(&a, shift, &b).unwrap();
            let ax = a.add_shift(shift).matvec(&x);
            let scale = norm(&b).max(1e-12);
            prop_assert!(norm(&sub(&ax, &b)) / scale < 1e-9);
        }

        #[test]
        fn eig_sum_equals_trace(seed in 0u64..500, dim in 1usize..7) {
            let a = random_spd(dim, seed);
            let spec = sym_eig(&a).unwrap();
            let sum: f64 = spec.eigenvalues.iter().sum();
            let tr = a.trace();
            prop_assert!((sum - tr).abs() <= 1e-9 * tr.abs().max(1.0));
        }

        #[test]
        fn weighted_norm_shift_split(seed in 0u64..500, dim in 1usize..7, shift in 0.0f64..3.0) {
            let a = random_spd(dim, seed);
            let mut rng = rng_from_seed(seed ^ 0x1234);
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let with = weighted_norm(&v, &a, shift).unwrap().powi(2);
            let without = weighted_norm(&v, &a, 0.0).unwrap().powi(2);
            let expected = without + shift * dot(&v, &v);
            prop_assert!((with - expected).abs() <= 1e-10 * expected.abs().max(1.0));
        }
    }
}
