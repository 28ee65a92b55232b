//! Matrix-manifold geometry for the unit sphere S^{n-1}, the Stiefel manifold
//! St(r, n) and the Grassmann manifold Gr(r, n).
//!
//! Every point is stored as a tall `n × r` matrix with orthonormal columns
//! (`UᵀU = I_r`; the sphere is the `r = 1` case). Grassmann points are
//! orthonormal representatives of their column span, and Grassmann tangent
//! vectors live in the horizontal space `{V : UᵀV = 0}`.
//!
//! All three manifolds use the Euclidean trace metric `⟨U, V⟩ = tr(UᵀV)`.
//! The sphere retracts by normalization, `R_x(v) = (x + v)/‖x + v‖`; Stiefel
//! and Grassmann use the Q factor of the thin QR decomposition of `x + v`,
//! with the sign of each column chosen so that `R` has a positive diagonal.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when validating the orthonormality of a point.
pub const TOL_ORTH: f64 = 1e-8;
/// Tolerance used when validating that a matrix is tangent at a point.
pub const TOL_TAN: f64 = 1e-8;
/// Default tolerance for deciding whether two Grassmann representatives span
/// the same subspace.
pub const DEFAULT_SUBSPACE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Sphere,
    Stiefel,
    Grassmann,
}

/// Which manifold, and the shape `n × r` of its points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ManifoldDescriptor {
    kind: ManifoldKind,
    n: usize,
    r: usize,
}

/// A point on a matrix manifold. Construct through
/// [`ManifoldDescriptor::point`] so the orthonormality invariant is checked.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldPoint(DMatrix<f64>);

/// A tangent (for Grassmann: horizontal) vector at some point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector(DMatrix<f64>);

impl ManifoldPoint {
    pub fn value(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }
}

impl TangentVector {
    pub fn zeros(n: usize, r: usize) -> Self {
        TangentVector(DMatrix::zeros(n, r))
    }

    pub fn value(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    /// `alpha · self`; tangent spaces are linear so the result stays tangent.
    pub fn scaled(&self, alpha: f64) -> TangentVector {
        TangentVector(&self.0 * alpha)
    }

    /// `self + other`, both tangent at the same point.
    pub fn plus(&self, other: &TangentVector) -> Result<TangentVector> {
        if self.shape() != other.shape() {
            return Err(Error::shape(self.shape(), other.shape()));
        }
        Ok(TangentVector(&self.0 + &other.0))
    }

    /// Frobenius norm, equal to the Riemannian norm under the trace metric.
    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl ManifoldDescriptor {
    pub fn new(kind: ManifoldKind, n: usize, r: usize) -> Result<Self> {
        if r == 0 || r > n {
            return Err(Error::invalid(format!(
                "manifold requires 1 <= r <= n, got n={n}, r={r}"
            )));
        }
        if kind == ManifoldKind::Sphere {
            if r != 1 {
                return Err(Error::invalid(format!("sphere requires r = 1, got r={r}")));
            }
            if n < 2 {
                return Err(Error::invalid("sphere requires n >= 2"));
            }
        }
        Ok(ManifoldDescriptor { kind, n, r })
    }

    pub fn sphere(n: usize) -> Result<Self> {
        Self::new(ManifoldKind::Sphere, n, 1)
    }

    pub fn stiefel(n: usize, r: usize) -> Result<Self> {
        Self::new(ManifoldKind::Stiefel, n, r)
    }

    pub fn grassmann(n: usize, r: usize) -> Result<Self> {
        Self::new(ManifoldKind::Grassmann, n, r)
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.r)
    }

    fn check_shape(&self, m: &DMatrix<f64>) -> Result<()> {
        if m.shape() != self.shape() {
            return Err(Error::shape(self.shape(), m.shape()));
        }
        Ok(())
    }

    /// Distance of `value` from satisfying the point invariant: `|‖x‖ − 1|`
    /// on the sphere, `‖XᵀX − I‖_F` otherwise.
    pub fn orthonormality_error(&self, value: &DMatrix<f64>) -> f64 {
        match self.kind {
            ManifoldKind::Sphere => (value.norm() - 1.0).abs(),
            ManifoldKind::Stiefel | ManifoldKind::Grassmann => {
                let gram = value.tr_mul(value);
                (gram - DMatrix::identity(value.ncols(), value.ncols())).norm()
            }
        }
    }

    /// Distance of `v` from the tangent (horizontal) space at `x`.
    pub fn tangency_error(&self, x: &ManifoldPoint, v: &DMatrix<f64>) -> f64 {
        let xtv = x.0.tr_mul(v);
        match self.kind {
            ManifoldKind::Sphere => xtv[(0, 0)].abs(),
            ManifoldKind::Stiefel => (&xtv + xtv.transpose()).norm(),
            ManifoldKind::Grassmann => xtv.norm(),
        }
    }

    /// Wraps `value` as a point after checking shape and orthonormality.
    pub fn point(&self, value: DMatrix<f64>) -> Result<ManifoldPoint> {
        self.check_shape(&value)?;
        let err = self.orthonormality_error(&value);
        if !(err <= TOL_ORTH) {
            return Err(Error::invalid(format!(
                "matrix is not on the {:?} manifold (orthonormality error {err:e})",
                self.kind
            )));
        }
        Ok(ManifoldPoint(value))
    }

    /// Wraps `value` as a tangent vector at `x` after checking tangency.
    pub fn tangent(&self, x: &ManifoldPoint, value: DMatrix<f64>) -> Result<TangentVector> {
        self.check_shape(&x.0)?;
        self.check_shape(&value)?;
        let err = self.tangency_error(x, &value);
        if !(err <= TOL_TAN) {
            return Err(Error::invalid(format!(
                "matrix is not tangent to the {:?} manifold (tangency error {err:e})",
                self.kind
            )));
        }
        Ok(TangentVector(value))
    }

    pub fn inner(&self, x: &ManifoldPoint, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        self.check_shape(&x.0)?;
        self.check_shape(&u.0)?;
        self.check_shape(&v.0)?;
        Ok(u.0.dot(&v.0))
    }

    pub fn norm(&self, x: &ManifoldPoint, v: &TangentVector) -> Result<f64> {
        Ok(self.inner(x, v, v)?.sqrt())
    }

    /// Orthogonal projection of an ambient matrix onto the tangent space at `x`.
    ///
    /// Sphere and Grassmann: `(I − xxᵀ)Z`. Stiefel: `Z − X·sym(XᵀZ)`.
    pub fn project_tangent(&self, x: &ManifoldPoint, z: &DMatrix<f64>) -> Result<TangentVector> {
        self.check_shape(&x.0)?;
        self.check_shape(z)?;
        let xtz = x.0.tr_mul(z);
        let projected = match self.kind {
            ManifoldKind::Sphere | ManifoldKind::Grassmann => z - &x.0 * xtz,
            ManifoldKind::Stiefel => {
                let sym = (&xtz + xtz.transpose()) * 0.5;
                z - &x.0 * sym
            }
        };
        Ok(TangentVector(projected))
    }

    /// Converts a Euclidean gradient into the Riemannian gradient. Under the
    /// embedded trace metric this is the tangent projection.
    pub fn egrad_to_rgrad(&self, x: &ManifoldPoint, egrad: &DMatrix<f64>) -> Result<TangentVector> {
        self.project_tangent(x, egrad)
    }

    pub fn retract(&self, x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
        self.check_shape(&x.0)?;
        self.check_shape(&v.0)?;
        let moved = &x.0 + &v.0;
        let value = match self.kind {
            ManifoldKind::Sphere => {
                let norm = moved.norm();
                if !(norm > 0.0) || !norm.is_finite() {
                    return Err(Error::NumericalDegeneracy(format!(
                        "cannot normalize x + v with norm {norm}"
                    )));
                }
                moved / norm
            }
            ManifoldKind::Stiefel | ManifoldKind::Grassmann => orthonormalize(moved)?,
        };
        Ok(ManifoldPoint(value))
    }

    /// A random point: the orthonormalized factor of a standard Gaussian matrix.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ManifoldPoint> {
        let g = gaussian_matrix(rng, self.n, self.r);
        let value = match self.kind {
            ManifoldKind::Sphere => {
                let norm = g.norm();
                g / norm
            }
            _ => orthonormalize(g)?,
        };
        Ok(ManifoldPoint(value))
    }

    /// A random tangent vector at `x`: a projected standard Gaussian matrix.
    pub fn random_tangent<R: Rng + ?Sized>(&self, x: &ManifoldPoint, rng: &mut R) -> Result<TangentVector> {
        let g = gaussian_matrix(rng, self.n, self.r);
        self.project_tangent(x, &g)
    }

    /// Whether two points coincide. Grassmann points are compared as
    /// subspaces with [`subspace_distance`]; the others entrywise.
    pub fn same_point(&self, a: &ManifoldPoint, b: &ManifoldPoint, tol: f64) -> Result<bool> {
        self.check_shape(&a.0)?;
        self.check_shape(&b.0)?;
        Ok(match self.kind {
            ManifoldKind::Grassmann => subspace_distance(&a.0, &b.0)? <= tol,
            _ => (&a.0 - &b.0).norm() <= tol,
        })
    }
}

/// `‖U₁U₁ᵀ − U₂U₂ᵀ‖_F`, the Frobenius distance between the orthogonal
/// projectors onto the two column spans.
pub fn subspace_distance(u1: &DMatrix<f64>, u2: &DMatrix<f64>) -> Result<f64> {
    if u1.shape() != u2.shape() {
        return Err(Error::shape(u1.shape(), u2.shape()));
    }
    let p1 = u1 * u1.transpose();
    let p2 = u2 * u2.transpose();
    Ok((p1 - p2).norm())
}

/// Thin-QR orthonormalization with a positive-diagonal `R`.
pub fn orthonormalize(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, r) = m.shape();
    if r > n {
        return Err(Error::invalid(format!("cannot orthonormalize {n}x{r} (wide) matrix")));
    }
    let scale = m.amax();
    if !scale.is_finite() {
        return Err(Error::NumericalDegeneracy("non-finite entries in QR input".into()));
    }
    let qr = m.qr();
    let rfac = qr.r();
    let mut q = qr.q();
    let tol = scale * (n as f64) * f64::EPSILON;
    for j in 0..r {
        let d = rfac[(j, j)];
        if !(d.abs() > tol) {
            return Err(Error::NumericalDegeneracy(format!(
                "QR factor is rank deficient (|R[{j},{j}]| = {:e})",
                d.abs()
            )));
        }
        if d < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    // Column-major fill keeps the draw order stable across nalgebra versions.
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_vec(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn descriptor_invariants() {
        assert!(ManifoldDescriptor::stiefel(4, 5).is_err());
        assert!(ManifoldDescriptor::stiefel(4, 0).is_err());
        assert!(ManifoldDescriptor::new(ManifoldKind::Sphere, 4, 2).is_err());
        assert!(ManifoldDescriptor::sphere(1).is_err());
        assert!(ManifoldDescriptor::stiefel(3, 3).is_ok());
    }

    #[test]
    fn point_validation_rejects_non_orthonormal() {
        let m = ManifoldDescriptor::stiefel(3, 2).unwrap();
        assert!(m.point(DMatrix::from_element(3, 2, 1.0)).is_err());
        assert!(m.point(DMatrix::identity(3, 2)).is_ok());
        assert!(m.point(DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn inner_with_zero_and_self() {
        let m = ManifoldDescriptor::stiefel(4, 2).unwrap();
        let mut rng = rng();
        let x = m.random_point(&mut rng).unwrap();
        let v = m.random_tangent(&x, &mut rng).unwrap();
        let zero = TangentVector::zeros(4, 2);
        assert_eq!(m.inner(&x, &zero, &v).unwrap(), 0.0);
        let vv = m.inner(&x, &v, &v).unwrap();
        assert!(vv > 0.0);
        assert!((vv - v.value().norm_squared()).abs() < 1e-14);
    }

    #[test]
    fn inner_matches_elementwise_double_loop() {
        let m = ManifoldDescriptor::stiefel(4, 2).unwrap();
        let mut rng = rng();
        let x = m.random_point(&mut rng).unwrap();
        let u = m.random_tangent(&x, &mut rng).unwrap();
        let v = m.random_tangent(&x, &mut rng).unwrap();
        let mut oracle = 0.0;
        for i in 0..4 {
            for j in 0..2 {
                oracle += u.value()[(i, j)] * v.value()[(i, j)];
            }
        }
        let got = m.inner(&x, &u, &v).unwrap();
        assert!((got - oracle).abs() < 1e-14);
        let n = m.norm(&x, &v).unwrap();
        let mut sq = 0.0;
        for val in v.value().iter() {
            sq += val * val;
        }
        assert!((n - sq.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn norm_of_single_entry() {
        let m = ManifoldDescriptor::grassmann(3, 1).unwrap();
        let x = m.point(DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0])).unwrap();
        let v = m.tangent(&x, DMatrix::from_column_slice(3, 1, &[0.0, 3.0, 0.0])).unwrap();
        assert_eq!(m.norm(&x, &v).unwrap(), 3.0);
        assert_eq!(m.norm(&x, &TangentVector::zeros(3, 1)).unwrap(), 0.0);
    }

    #[test]
    fn inner_dimension_mismatch() {
        let m = ManifoldDescriptor::stiefel(4, 2).unwrap();
        let x = m.point(DMatrix::identity(4, 2)).unwrap();
        let u = TangentVector::zeros(4, 2);
        let bad = TangentVector::zeros(3, 2);
        assert!(matches!(m.inner(&x, &u, &bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn projection_examples() {
        let mut rng = rng();
        let sphere = ManifoldDescriptor::sphere(5).unwrap();
        let x = sphere.random_point(&mut rng).unwrap();
        let p = sphere.project_tangent(&x, x.value()).unwrap();
        assert!(p.value().norm() < 1e-15);

        let gr = ManifoldDescriptor::grassmann(6, 2).unwrap();
        let u = gr.random_point(&mut rng).unwrap();
        let a = gaussian_matrix(&mut rng, 2, 2);
        let p = gr.project_tangent(&u, &(u.value() * a)).unwrap();
        assert!(p.value().norm() < 1e-14);

        for m in [
            ManifoldDescriptor::sphere(5).unwrap(),
            ManifoldDescriptor::stiefel(6, 3).unwrap(),
            ManifoldDescriptor::grassmann(6, 3).unwrap(),
        ] {
            let x = m.random_point(&mut rng).unwrap();
            let v = m.random_tangent(&x, &mut rng).unwrap();
            assert!(m.tangency_error(&x, v.value()) < 1e-12);
            let again = m.project_tangent(&x, v.value()).unwrap();
            assert!((again.value() - v.value()).norm() < 1e-12);
        }
    }

    #[test]
    fn retract_zero_is_identity() {
        let mut rng = rng();
        for m in [
            ManifoldDescriptor::sphere(7).unwrap(),
            ManifoldDescriptor::stiefel(7, 3).unwrap(),
            ManifoldDescriptor::grassmann(7, 3).unwrap(),
            ManifoldDescriptor::stiefel(4, 4).unwrap(),
        ] {
            let x = m.random_point(&mut rng).unwrap();
            let y = m.retract(&x, &TangentVector::zeros(m.n(), m.r())).unwrap();
            assert!((y.value() - x.value()).amax() <= 1e-14);
        }
    }

    #[test]
    fn sphere_retraction_formula() {
        let m = ManifoldDescriptor::sphere(3).unwrap();
        let x = m.point(DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0])).unwrap();
        let v = m.tangent(&x, DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 0.0])).unwrap();
        let y = m.retract(&x, &v).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((y.value()[(0, 0)] - s).abs() < 1e-15);
        assert!((y.value()[(1, 0)] - s).abs() < 1e-15);
        assert_eq!(y.value()[(2, 0)], 0.0);
    }

    #[test]
    fn stiefel_retraction_stays_orthonormal() {
        let m = ManifoldDescriptor::stiefel(4, 2).unwrap();
        let mut rng = rng();
        let x = m.random_point(&mut rng).unwrap();
        let v = m.random_tangent(&x, &mut rng).unwrap();
        let y = m.retract(&x, &v).unwrap();
        let gram = y.value().transpose() * y.value();
        assert!((gram - DMatrix::<f64>::identity(2, 2)).norm() <= 1e-10);
    }

    #[test]
    fn qr_breakdown_is_reported() {
        let m = ManifoldDescriptor::stiefel(3, 2).unwrap();
        let x = m.point(DMatrix::identity(3, 2)).unwrap();
        // x + v has identical columns: rank one
        let v = TangentVector(DMatrix::from_column_slice(3, 2, &[0.0, 0.0, 0.0, 1.0, -1.0, 0.0]));
        assert!(matches!(m.retract(&x, &v), Err(Error::NumericalDegeneracy(_))));
    }

    #[test]
    fn subspace_distance_examples() {
        let mut rng = rng();
        let m = ManifoldDescriptor::grassmann(6, 3).unwrap();
        let u = m.random_point(&mut rng).unwrap();
        assert_eq!(subspace_distance(u.value(), u.value()).unwrap(), 0.0);
        let q = orthonormalize(gaussian_matrix(&mut rng, 3, 3)).unwrap();
        let rotated = u.value() * q;
        assert!(subspace_distance(u.value(), &rotated).unwrap() < 1e-12);
        assert!(m.same_point(&u, &ManifoldPoint(rotated), DEFAULT_SUBSPACE_TOL).unwrap());

        // complementary coordinate subspaces of R^{2r}
        let e1 = DMatrix::identity(6, 3);
        let mut e2 = DMatrix::zeros(6, 3);
        for j in 0..3 {
            e2[(j + 3, j)] = 1.0;
        }
        let d = subspace_distance(&e1, &e2).unwrap();
        assert!((d - 6f64.sqrt()).abs() < 1e-14);
        assert!(subspace_distance(&e1, &DMatrix::identity(5, 3)).is_err());
    }
}
