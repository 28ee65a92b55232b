use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rsgd::manifold::{subspace_distance, ManifoldDescriptor, ManifoldKind, TangentVector};
use rsgd::problems::{PcaProblem, Problem};

fn manifold_strategy() -> impl Strategy<Value = ManifoldDescriptor> {
    (0usize..3, 2usize..9, 1usize..5).prop_map(|(k, n, r)| match k {
        0 => ManifoldDescriptor::sphere(n).unwrap(),
        1 => ManifoldDescriptor::stiefel(n, r.min(n)).unwrap(),
        _ => ManifoldDescriptor::grassmann(n, r.min(n)).unwrap(),
    })
}

fn ambient(rng: &mut ChaCha8Rng, m: &ManifoldDescriptor) -> DMatrix<f64> {
    use rand_distr::{Distribution, StandardNormal};
    DMatrix::from_fn(m.n(), m.r(), |_, _| StandardNormal.sample(rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn retract_zero_is_identity(m in manifold_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = m.random_point(&mut rng).unwrap();
        let y = m.retract(&x, &TangentVector::zeros(m.n(), m.r())).unwrap();
        prop_assert!((y.value() - x.value()).amax() <= 1e-14);
    }

    #[test]
    fn retraction_keeps_orthonormality(m in manifold_strategy(), seed in any::<u64>(), scale in 0.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = m.random_point(&mut rng).unwrap();
        let v = m.random_tangent(&x, &mut rng).unwrap().scaled(scale);
        let y = m.retract(&x, &v).unwrap();
        prop_assert!(m.orthonormality_error(y.value()) <= 1e-10);
        prop_assert!(m.point(y.value().clone()).is_ok());
    }

    #[test]
    fn projection_is_idempotent_and_self_adjoint(m in manifold_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = m.random_point(&mut rng).unwrap();
        let z = ambient(&mut rng, &m);
        let w = ambient(&mut rng, &m);
        let pz = m.project_tangent(&x, &z).unwrap();
        let ppz = m.project_tangent(&x, pz.value()).unwrap();
        prop_assert!((ppz.value() - pz.value()).amax() <= 1e-12);
        prop_assert!(m.tangency_error(&x, pz.value()) <= 1e-12);
        let pw = m.project_tangent(&x, &w).unwrap();
        let lhs = pz.value().dot(&w);
        let rhs = z.dot(pw.value());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn inner_is_symmetric_and_nonnegative(m in manifold_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = m.random_point(&mut rng).unwrap();
        let u = m.random_tangent(&x, &mut rng).unwrap();
        let v = m.random_tangent(&x, &mut rng).unwrap();
        prop_assert_eq!(m.inner(&x, &u, &v).unwrap(), m.inner(&x, &v, &u).unwrap());
        prop_assert!(m.inner(&x, &v, &v).unwrap() >= 0.0);
        prop_assert!((m.norm(&x, &v).unwrap() - m.inner(&x, &v, &v).unwrap().sqrt()).abs() == 0.0);
    }

    #[test]
    fn subspace_distance_ignores_basis_rotation(n in 2usize..10, r in 1usize..5, seed in any::<u64>()) {
        let r = r.min(n);
        let m = ManifoldDescriptor::grassmann(n, r).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = m.random_point(&mut rng).unwrap();
        let q = ManifoldDescriptor::stiefel(r, r).unwrap().random_point(&mut rng).unwrap();
        let rotated = u.value() * q.value();
        prop_assert!(subspace_distance(u.value(), &rotated).unwrap() <= 1e-12);
    }
}

#[test]
fn egrad_to_rgrad_zero_and_normal_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = ManifoldDescriptor::sphere(6).unwrap();
    let x = s.random_point(&mut rng).unwrap();
    assert_eq!(s.egrad_to_rgrad(&x, &DMatrix::zeros(6, 1)).unwrap().value().norm(), 0.0);
    let g = s.egrad_to_rgrad(&x, &(x.value() * 3.5)).unwrap();
    assert!(g.value().norm() < 1e-14);
}

#[test]
fn retraction_has_identity_differential() {
    // d/dt f(R_x(t v)) at t = 0 equals ⟨grad f(x), v⟩
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data = DMatrix::from_fn(12, 7, |i, j| ((i * 7 + j) as f64 * 0.37).sin());
    let p = PcaProblem::new(&data, 3).unwrap();
    let m = p.manifold();
    assert_eq!(m.kind(), ManifoldKind::Stiefel);
    for _ in 0..10 {
        let x = m.random_point(&mut rng).unwrap();
        let v = m.random_tangent(&x, &mut rng).unwrap();
        let g = p.rgrad(&x, None).unwrap();
        let exact = m.inner(&x, &g, &v).unwrap();
        let h = 1e-5;
        let fp = p.loss(&m.retract(&x, &v.scaled(h)).unwrap(), None).unwrap();
        let fm = p.loss(&m.retract(&x, &v.scaled(-h)).unwrap(), None).unwrap();
        let fd = (fp - fm) / (2.0 * h);
        assert!((fd - exact).abs() <= 1e-4 * exact.abs().max(1e-8), "fd {fd} vs {exact}");
    }
}
