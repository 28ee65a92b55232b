//! Benchmark objectives: PCA on the Stiefel manifold, low-rank matrix
//! completion on the Grassmann manifold, and the sqrt-abs objective on the
//! sphere.
//!
//! Each objective is an average `f(x) = (1/N) Σ_j f_j(x)`. Minibatch
//! evaluations average over a multiset of sample indices; `None` means the
//! full dataset.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::manifold::{ManifoldDescriptor, ManifoldPoint, TangentVector};

pub use crate::manifold::subspace_distance;

/// An objective with per-sample loss and gradient oracles.
pub trait Problem: Send + Sync {
    fn manifold(&self) -> ManifoldDescriptor;

    /// Dataset size `N`.
    fn num_samples(&self) -> usize;

    fn loss(&self, x: &ManifoldPoint, indices: Option<&[usize]>) -> Result<f64>;

    /// Euclidean gradient of the (minibatch) loss.
    fn egrad(&self, x: &ManifoldPoint, indices: Option<&[usize]>) -> Result<DMatrix<f64>>;

    fn rgrad(&self, x: &ManifoldPoint, indices: Option<&[usize]>) -> Result<TangentVector> {
        let g = self.egrad(x, indices)?;
        self.manifold().egrad_to_rgrad(x, &g)
    }
}

fn check_indices(indices: Option<&[usize]>, n: usize) -> Result<()> {
    if let Some(idx) = indices {
        if idx.is_empty() {
            return Err(Error::invalid("empty minibatch"));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::invalid(format!("sample index {bad} out of range for N = {n}")));
        }
    }
    Ok(())
}

fn check_point(m: &ManifoldDescriptor, x: &ManifoldPoint) -> Result<()> {
    if x.shape() != m.shape() {
        return Err(Error::shape(m.shape(), x.shape()));
    }
    Ok(())
}

/// PCA: `f(U) = (1/N) Σ_j ‖x_j − UUᵀx_j‖²` over `U ∈ St(r, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PcaProblem {
    /// `n × N`, one sample per column.
    data: DMatrix<f64>,
    manifold: ManifoldDescriptor,
}

impl PcaProblem {
    /// Builds the problem from an `N × n` matrix with one sample per row.
    pub fn new(x: &DMatrix<f64>, r: usize) -> Result<Self> {
        Self::from_columns(x.transpose(), r)
    }

    /// Builds the problem from an `n × N` matrix with one sample per column.
    pub fn from_columns(data: DMatrix<f64>, r: usize) -> Result<Self> {
        if data.ncols() == 0 {
            return Err(Error::invalid("PCA needs at least one sample"));
        }
        let manifold = ManifoldDescriptor::stiefel(data.nrows(), r)?;
        Ok(PcaProblem { data, manifold })
    }

    /// Samples as columns (`n × N`).
    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    fn batch(&self, indices: Option<&[usize]>) -> Result<std::borrow::Cow<'_, DMatrix<f64>>> {
        check_indices(indices, self.data.ncols())?;
        Ok(match indices {
            None => std::borrow::Cow::Borrowed(&self.data),
            Some(idx) => std::borrow::Cow::Owned(self.data.select_columns(idx)),
        })
    }
}

impl Problem for PcaProblem {
    fn manifold(&self) -> ManifoldDescriptor {
        self.manifold
    }

    fn num_samples(&self) -> usize {
        self.data.ncols()
    }

    fn loss(&self, x: &ManifoldPoint, indices: Option<&[usize]>) -> Result<f64> {
        check_point(&self.manifold, x)?;
        let xb = self.batch(indices)?;
        let u = x.value();
        let coeff = u.tr_mul(&xb);
        let residual = xb.as_ref() - u * coeff;
        Ok(residual.norm_squared() / xb.ncols() as f64)
    }

    fn egrad(&self, x: &ManifoldPoint, indices: Option<&[usize]>) -> Result<DMatrix<f64>> {
        check_point(&self.manifold, x)?;
        let xb = self.batch(indices)?;
        let coeff = x.value().tr_mul(&xb);
        Ok(xb.as_ref() * coeff.transpose() * (-2.0 / xb.ncols() as f64))
    }
}

/// Top-`r` eigenvectors of `XᵀX`, the global minimizer of the PCA objective.
#[derive(Clone, Debug)]
pub struct EvdOracle {
    pub point: ManifoldPoint,
    /// Eigenvalues of `XᵀX`, descending.
    pub eigenvalues: Vec<f64>,
    /// Set when `λ_r` and `λ_{r+1}` tie, so the optimal subspace is not unique.
    pub degenerate: bool,
}

/// Eigendecomposition oracle for PCA; `x` has one sample per row (`N × n`).
pub fn pca_evd_oracle(x: &DMatrix<f64>, r: usize) -> Result<EvdOracle> {
    let n = x.ncols();
    let m = ManifoldDescriptor::stiefel(n, r)?;
    let gram = x.tr_mul(x);
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let basis = eig.eigenvectors.select_columns(&order[..r]);
    let degenerate = r < n && {
        let scale = eigenvalues[0].abs().max(f64::MIN_POSITIVE);
        (eigenvalues[r - 1] - eigenvalues[r]).abs() <= 1e-10 * scale
    };
    let point = m.point(basis)?;
    Ok(EvdOracle { point, eigenvalues, degenerate })
}

/// One column of a partially observed matrix.
#[derive(Clone, Debug, Default, PartialEq)]
struct MaskedColumn {
    rows: Vec<usize>,
    values: Vec<f64>,
}

/// Low-rank matrix completion:
/// `f(U) = (1/N) Σ_j ‖P_{Ω_j}(U q_j(U) − z_j)‖²` over `U ∈ Gr(r, n)`, where
/// `q_j(U)` is the least-squares fit of the observed entries of column `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LrmcProblem {
    columns: Vec<MaskedColumn>,
    manifold: ManifoldDescriptor,
}

impl LrmcProblem {
    /// `entries` are `(row, column, value)` triplets of an `n × N` matrix.
    pub fn new(n: usize, num_cols: usize, r: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        if num_cols == 0 {
            return Err(Error::invalid("matrix completion needs at least one column"));
        }
        let manifold = ManifoldDescriptor::grassmann(n, r)?;
        let mut columns = vec![MaskedColumn::default(); num_cols];
        let mut sorted: Vec<(usize, usize, f64)> = entries.to_vec();
        sorted.sort_by_key(|&(i, j, _)| (j, i));
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::invalid(format!("duplicate entry ({}, {})", w[0].0, w[0].1)));
            }
        }
        for (i, j, v) in sorted {
            if i >= n || j >= num_cols {
                return Err(Error::invalid(format!(
                    "entry ({i}, {j}) outside a {n} x {num_cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::invalid(format!("entry ({i}, {j}) is not finite")));
            }
            columns[j].rows.push(i);
            columns[j].values.push(v);
        }
        Ok(LrmcProblem { columns, manifold })
    }

    pub fn num_observed(&self) -> usize {
        self.columns.iter().map(|c| c.rows.len()).sum()
    }

    /// Columns with fewer than `r` observed entries; these contribute
    /// nothing to the loss or gradient.
    pub fn rank_deficient_columns(&self) -> Vec<usize> {
        let r = self.manifold.r();
        (0..self.columns.len()).filter(|&j| self.columns[j].rows.len() < r).collect()
    }

    /// Observed entries as `(row, column, value)` in column-major order.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.num_observed());
        for (j, c) in self.columns.iter().enumerate() {
            for (&i, &v) in c.rows.iter().zip(&c.values) {
                out.push((i, j, v));
            }
        }
        out
    }

    /// Residual `P_Ω(U q − z)` restricted to the observed rows, with `q`.
    fn column_fit(&self, u: &DMatrix<f64>, j: usize) -> Result<Option<(DVector<f64>, DVector<f64>)>> {
        let col = &self.columns[j];
        if col.rows.len() < self.manifold.r() {
            return Ok(None);
        }
        let q = lrmc_inner_solve(u, &col.rows, &col.values)?;
        let a = u.select_rows(&col.rows);
        let residual = a * &q - DVector::from_column_slice(&col.values);
        Ok(Some((residual, q)))
    }

    fn columns_of<'a>(&self, indices: Option<&'a [usize]>) -> Box<dyn Iterator<Item = usize> + 'a> {
        match indices {
            None => Box::new(0..self.columns.len()),
            Some(idx) => Box::new(idx.iter().copied()),
        }
    }
}

impl Problem for LrmcProblem {
    fn manifold(&self) -> ManifoldDescriptor {
        self.manifold
    }

    fn num_samples(&self) -> usize {
        self.columns.len()
    }

    fn loss(&self, x: &ManifoldPoint, indices: Option<&[usize]>) -> Result<f64> {
        check_point(&self.manifold, x)?;
        check_indices(indices, self.columns.len())?;
        let mut total = 0.0;
        let mut count = 0usize;
        for j in self.columns_of(indices) {
            if let Some((res, _)) = self.column_fit(x.value(), j)? {
                total += res.norm_squared();
            }
            count += 1;
        }
        Ok(total / count as f64)
    }

    fn egrad(&self, x: &ManifoldPoint, indices: Option<&[usize]>) -> Result<DMatrix<f64>> {
        check_point(&self.manifold, x)?;
        check_indices(indices, self.columns.len())?;
        let (n, r) = self.manifold.shape();
        let mut g = DMatrix::zeros(n, r);
        let mut count = 0usize;
        for j in self.columns_of(indices) {
            if let Some((res, q)) = self.column_fit(x.value(), j)? {
                for (k, &i) in self.columns[j].rows.iter().enumerate() {
                    for c in 0..r {
                        g[(i, c)] += 2.0 * res[k] * q[c];
                    }
                }
            }
            count += 1;
        }
        Ok(g / count as f64)
    }
}

/// `argmin_q ‖P_Ω(U q − z)‖`, the minimum-norm minimizer when the observed
/// rows of `U` are rank deficient. `rows` lists the observed row indices and
/// `z` the observed values.
pub fn lrmc_inner_solve(u: &DMatrix<f64>, rows: &[usize], z: &[f64]) -> Result<DVector<f64>> {
    if rows.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} values", rows.len()),
            actual: format!("{} values", z.len()),
        });
    }
    let r = u.ncols();
    if rows.is_empty() {
        return Ok(DVector::zeros(r));
    }
    if let Some(&bad) = rows.iter().find(|&&i| i >= u.nrows()) {
        return Err(Error::invalid(format!("row index {bad} out of range")));
    }
    let a = u.select_rows(rows);
    let rhs = DVector::from_column_slice(z);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * (rows.len().max(r) as f64) * f64::EPSILON;
    svd.solve(&rhs, eps)
        .map_err(|e| Error::NumericalDegeneracy(format!("masked least squares failed: {e}")))
}

/// `f(w) = (1/N) Σ_j √|⟨x_j, w⟩|` on the unit sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct SqrtAbsSphereProblem {
    /// `n × N`, unit-norm columns.
    data: DMatrix<f64>,
    manifold: ManifoldDescriptor,
}

impl SqrtAbsSphereProblem {
    /// Builds the problem from an `N × n` matrix of unit-norm rows.
    pub fn new(x: &DMatrix<f64>) -> Result<Self> {
        Self::from_columns(x.transpose())
    }

    pub fn from_columns(data: DMatrix<f64>) -> Result<Self> {
        if data.ncols() == 0 {
            return Err(Error::invalid("sqrt-abs problem needs at least one sample"));
        }
        let manifold = ManifoldDescriptor::sphere(data.nrows())?;
        for (j, col) in data.column_iter().enumerate() {
            let dev = (col.norm() - 1.0).abs();
            if !(dev <= 1e-10) {
                return Err(Error::invalid(format!("sample {j} is not unit norm (|‖x‖ − 1| = {dev:e})")));
            }
        }
        Ok(SqrtAbsSphereProblem { data, manifold })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Unit vector orthogonal to sample `i`, from Gram-Schmidt of the
    /// coordinate axis on which `x_i` is smallest.
    pub fn witness_direction(&self, i: usize) -> Result<DVector<f64>> {
        check_indices(Some(&[i]), self.data.ncols())?;
        let xi = self.data.column(i);
        let n = xi.len();
        if n < 2 {
            return Err(Error::invalid("witness direction needs n >= 2"));
        }
        let k = (0..n).min_by(|&a, &b| xi[a].abs().total_cmp(&xi[b].abs())).unwrap_or(0);
        let mut u = DVector::zeros(n);
        u[k] = 1.0;
        u.axpy(-xi[k] / xi.norm_squared(), &xi, 1.0);
        let norm = u.norm();
        Ok(u / norm)
    }

    /// `w_t = x_i/(t‖x_i‖) + √(1 − 1/t²)·u` for `t ≥ 1` and `u ⊥ x_i` unit.
    pub fn witness_point(&self, i: usize, u: &DVector<f64>, t: f64) -> Result<ManifoldPoint> {
        check_indices(Some(&[i]), self.data.ncols())?;
        if !(t >= 1.0) {
            return Err(Error::invalid(format!("witness parameter t must be >= 1, got {t}")));
        }
        if u.len() != self.data.nrows() {
            return Err(Error::shape((self.data.nrows(), 1), (u.len(), 1)));
        }
        let xi = self.data.column(i);
        let w = xi / (t * xi.norm()) + u * (1.0 - 1.0 / (t * t)).sqrt();
        self.manifold.point(DMatrix::from_column_slice(w.len(), 1, w.as_slice()))
    }

    /// `‖grad f(w_t)‖` along the witness sequence for sample `i`.
    pub fn witness_gradient_norms(&self, i: usize, ts: &[f64]) -> Result<Vec<f64>> {
        let u = self.witness_direction(i)?;
        ts.iter()
            .map(|&t| Ok(self.rgrad(&self.witness_point(i, &u, t)?, None)?.frobenius_norm()))
            .collect()
    }

    fn inner_products(&self, x: &ManifoldPoint, indices: Option<&[usize]>) -> Result<Vec<(usize, f64)>> {
        check_point(&self.manifold, x)?;
        check_indices(indices, self.data.ncols())?;
        let w = x.value().column(0);
        let out = match indices {
            None => (0..self.data.ncols()).map(|j| (j, self.data.column(j).dot(&w))).collect(),
            Some(idx) => idx.iter().map(|&j| (j, self.data.column(j).dot(&w))).collect(),
        };
        Ok(out)
    }
}

impl Problem for SqrtAbsSphereProblem {
    fn manifold(&self) -> ManifoldDescriptor {
        self.manifold
    }

    fn num_samples(&self) -> usize {
        self.data.ncols()
    }

    fn loss(&self, x: &ManifoldPoint, indices: Option<&[usize]>) -> Result<f64> {
        let s = self.inner_products(x, indices)?;
        let total: f64 = s.iter().map(|&(_, v)| v.abs().sqrt()).sum();
        Ok(total / s.len() as f64)
    }

    fn egrad(&self, x: &ManifoldPoint, indices: Option<&[usize]>) -> Result<DMatrix<f64>> {
        let s = self.inner_products(x, indices)?;
        let mut g = DMatrix::zeros(self.data.nrows(), 1);
        for &(j, v) in &s {
            if v == 0.0 {
                return Err(Error::NonDifferentiable { sample: j });
            }
            let coeff = 0.5 * v.signum() / v.abs().sqrt();
            g.column_mut(0).axpy(coeff, &self.data.column(j), 1.0);
        }
        Ok(g / s.len() as f64)
    }
}

/// Any of the benchmark problems.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyProblem {
    Pca(PcaProblem),
    Lrmc(LrmcProblem),
    SqrtAbs(SqrtAbsSphereProblem),
}

impl AnyProblem {
    fn inner(&self) -> &dyn Problem {
        match self {
            AnyProblem::Pca(p) => p,
            AnyProblem::Lrmc(p) => p,
            AnyProblem::SqrtAbs(p) => p,
        }
    }
}

impl Problem for AnyProblem {
    fn manifold(&self) -> ManifoldDescriptor {
        self.inner().manifold()
    }

    fn num_samples(&self) -> usize {
        self.inner().num_samples()
    }

    fn loss(&self, x: &ManifoldPoint, indices: Option<&[usize]>) -> Result<f64> {
        self.inner().loss(x, indices)
    }

    fn egrad(&self, x: &ManifoldPoint, indices: Option<&[usize]>) -> Result<DMatrix<f64>> {
        self.inner().egrad(x, indices)
    }

    fn rgrad(&self, x: &ManifoldPoint, indices: Option<&[usize]>) -> Result<TangentVector> {
        self.inner().rgrad(x, indices)
    }
}

/// Empirical per-sample gradient variance `(1/N) Σ_j ‖grad f_j(x) − grad f(x)‖²`.
pub fn gradient_variance<P: Problem + ?Sized>(problem: &P, x: &ManifoldPoint) -> Result<f64> {
    let full = problem.rgrad(x, None)?;
    let n = problem.num_samples();
    let mut total = 0.0;
    for j in 0..n {
        let gj = problem.rgrad(x, Some(&[j]))?;
        total += (gj.value() - full.value()).norm_squared();
    }
    Ok(total / n as f64)
}

/// Analytic versus central-difference directional derivatives of the full
/// loss along random unit tangent directions.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientCheck {
    /// `⟨grad f(x), v_k⟩` for each direction.
    pub analytic: Vec<f64>,
    /// `(f(R_x(h v_k)) − f(R_x(−h v_k)))/(2h)` for each direction.
    pub numeric: Vec<f64>,
    /// `‖numeric − analytic‖ / ‖analytic‖` over all directions.
    pub rel_error: f64,
}

pub fn gradient_check<P: Problem + ?Sized>(
    problem: &P,
    x: &ManifoldPoint,
    directions: usize,
    h: f64,
    seed: u64,
) -> Result<GradientCheck> {
    use rand::SeedableRng;
    let m = problem.manifold();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let g = problem.rgrad(x, None)?;
    let mut analytic = Vec::with_capacity(directions);
    let mut numeric = Vec::with_capacity(directions);
    for _ in 0..directions {
        let v = m.random_tangent(x, &mut rng)?;
        let v = v.scaled(1.0 / v.frobenius_norm());
        analytic.push(m.inner(x, &g, &v)?);
        let fp = problem.loss(&m.retract(x, &v.scaled(h))?, None)?;
        let fm = problem.loss(&m.retract(x, &v.scaled(-h))?, None)?;
        numeric.push((fp - fm) / (2.0 * h));
    }
    let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let rel_error = if scale > 0.0 { diff / scale } else { diff };
    Ok(GradientCheck { analytic, numeric, rel_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::orthonormalize;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        crate::manifold::gaussian_matrix(rng, r, c)
    }

    #[test]
    fn pca_zero_loss_and_gradient_in_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = ManifoldDescriptor::stiefel(6, 2).unwrap();
        let u = m.random_point(&mut rng).unwrap();
        let coeffs = gaussian(&mut rng, 2, 9);
        let cols = u.value() * coeffs;
        let p = PcaProblem::from_columns(cols, 2).unwrap();
        assert!(p.loss(&u, None).unwrap() < 1e-28);
        assert!(p.rgrad(&u, None).unwrap().value().norm() < 1e-13);
    }

    #[test]
    fn pca_loss_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = gaussian(&mut rng, 15, 7);
        let p = PcaProblem::new(&x, 3).unwrap();
        let u = p.manifold().random_point(&mut rng).unwrap();
        let n = 15.0;
        let lhs = p.loss(&u, None).unwrap();
        let total: f64 = x.row_iter().map(|r| r.norm_squared()).sum::<f64>() / n;
        let proj = (&x * u.value()).norm_squared() / n;
        assert!((lhs - (total - proj)).abs() < 1e-10);
    }

    #[test]
    fn lrmc_full_observation_of_low_rank_has_zero_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = ManifoldDescriptor::grassmann(5, 2).unwrap();
        let u = m.random_point(&mut rng).unwrap();
        let z = u.value() * gaussian(&mut rng, 2, 4);
        let mut entries = Vec::new();
        for j in 0..4 {
            for i in 0..5 {
                entries.push((i, j, z[(i, j)]));
            }
        }
        let p = LrmcProblem::new(5, 4, 2, &entries).unwrap();
        assert!(p.loss(&u, None).unwrap() < 1e-26);
    }

    #[test]
    fn lrmc_rejects_duplicates() {
        let e = [(0, 0, 1.0), (0, 0, 2.0)];
        assert!(LrmcProblem::new(2, 1, 1, &e).is_err());
    }

    #[test]
    fn inner_solve_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = orthonormalize(gaussian(&mut rng, 6, 3)).unwrap();
        let a = DVector::from_column_slice(&[0.3, -1.2, 2.0]);
        let z = &u * &a;
        let rows: Vec<usize> = (0..6).collect();
        let q = lrmc_inner_solve(&u, &rows, z.as_slice()).unwrap();
        assert!((q - &a).amax() < 1e-10);

        // exactly r observed rows: square solve
        let rows = [0usize, 2, 5];
        let vals = [1.0, -2.0, 0.5];
        let q = lrmc_inner_solve(&u, &rows, &vals).unwrap();
        let sub = u.select_rows(&rows);
        let direct = sub.lu().solve(&DVector::from_column_slice(&vals)).unwrap();
        assert!((q - direct).amax() < 1e-10);

        // right-hand side orthogonal to the masked columns
        let e = DMatrix::identity(4, 2);
        let q = lrmc_inner_solve(&e, &[2, 3], &[1.0, -1.0]).unwrap();
        assert_eq!(q.norm(), 0.0);

        assert_eq!(lrmc_inner_solve(&e, &[], &[]).unwrap().norm(), 0.0);
    }

    #[test]
    fn sqrt_abs_examples() {
        let w = DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 0.0]);
        let p = SqrtAbsSphereProblem::from_columns(w.clone()).unwrap();
        let x = p.manifold().point(w).unwrap();
        assert_eq!(p.loss(&x, None).unwrap(), 1.0);
        assert!(p.rgrad(&x, None).unwrap().value().norm() < 1e-16);

        let y = p.manifold().point(DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0])).unwrap();
        assert!(matches!(p.egrad(&y, None), Err(Error::NonDifferentiable { sample: 0 })));
        assert!(SqrtAbsSphereProblem::new(&DMatrix::from_element(1, 3, 1.0)).is_err());
    }

    #[test]
    fn evd_oracle_examples() {
        let oracle = pca_evd_oracle(&DMatrix::identity(4, 4), 4).unwrap();
        assert!(subspace_distance(oracle.point.value(), &DMatrix::identity(4, 4)).unwrap() < 1e-12);

        let mut x = DMatrix::zeros(5, 3);
        for i in 0..5 {
            x[(i, 0)] = i as f64 + 1.0;
        }
        let oracle = pca_evd_oracle(&x, 1).unwrap();
        assert!((oracle.point.value()[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(!oracle.degenerate);

        let tie = pca_evd_oracle(&DMatrix::identity(4, 4), 2).unwrap();
        assert!(tie.degenerate);
    }

    #[test]
    fn index_validation() {
        let p = PcaProblem::new(&DMatrix::identity(3, 3), 1).unwrap();
        let u = p.manifold().point(DMatrix::identity(3, 1)).unwrap();
        assert!(p.loss(&u, Some(&[3])).is_err());
        assert!(p.loss(&u, Some(&[])).is_err());
    }
}
