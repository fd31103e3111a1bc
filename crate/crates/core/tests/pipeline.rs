use betaflow::distributions::{ProductBeta3, TriShapeParams, TrivariateH};
use betaflow::funceq::{params_from_shapes, residual};
use betaflow::stat_tests::{ks_one_sample, ks_two_sample};
use betaflow::transforms::{big_psi, psi, psi_inv, psi_jacobian, Pivot};
use betaflow::{HPoint, RngStream, UnitCube3};
use proptest::prelude::*;

fn shapes() -> TriShapeParams {
    TriShapeParams::new(2.0, 1.5, 1.0).unwrap()
}

#[test]
fn density_on_h_is_the_pullback_of_the_product() {
    let h = TrivariateH::new(shapes()).unwrap();
    let prod = ProductBeta3::invariant(shapes()).unwrap();
    let mut rng = RngStream::new(5, 1);
    for k in 0..500 {
        let x = h.sample(&mut rng);
        let pivot = if k % 2 == 0 { Pivot::First } else { Pivot::Second };
        let y = psi(pivot, &x).unwrap();
        let lhs = h.ln_pdf(&x).unwrap();
        let rhs = prod.ln_pdf(&y).unwrap() + psi_jacobian(pivot, &x).unwrap().ln();
        assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()), "{x:?}: {lhs} vs {rhs}");
    }
}

#[test]
fn both_pivots_push_h_to_the_same_product() {
    let h = TrivariateH::new(shapes()).unwrap();
    let mut rng = RngStream::new(6, 1);
    let xs: Vec<HPoint> = (0..20_000).map(|_| h.sample(&mut rng)).collect();
    let prod = ProductBeta3::invariant(shapes()).unwrap();
    for pivot in [Pivot::First, Pivot::Second] {
        let ys: Vec<[f64; 3]> = xs.iter().map(|x| psi(pivot, x).unwrap().to_array()).collect();
        for (k, m) in prod.marginals().iter().enumerate() {
            let col: Vec<f64> = ys.iter().map(|y| y[k]).collect();
            let rep = ks_one_sample(&col, |t| m.cdf(t), 0.001).unwrap();
            assert!(rep.pass, "{pivot:?} coordinate {k}: {rep:?}");
        }
    }
}

#[test]
fn big_psi_preserves_the_product_law() {
    let prod = ProductBeta3::invariant(shapes()).unwrap();
    let mut rng = RngStream::new(7, 1);
    let ys = prod.sample_n(&mut rng, 20_000);
    let zs: Vec<UnitCube3> = ys.iter().map(|y| big_psi(y).unwrap()).collect();
    let fresh = prod.sample_n(&mut rng, 20_000);
    for k in 0..3 {
        let a: Vec<f64> = zs.iter().map(|z| z.to_array()[k]).collect();
        let b: Vec<f64> = fresh.iter().map(|z| z.to_array()[k]).collect();
        assert!(ks_two_sample(&a, &b, 0.001).unwrap().pass, "coordinate {k}");
    }
}

#[test]
fn log_density_family_solves_the_equation_on_samples() {
    let p = params_from_shapes(2.0, 1.5, 1.0).unwrap();
    let prod = ProductBeta3::invariant(shapes()).unwrap();
    let mut rng = RngStream::new(8, 1);
    for y in prod.sample_n(&mut rng, 1000) {
        assert!(residual(&y, &p).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn psi_inv_lands_in_h(y in prop::array::uniform3(0.001f64..0.999)) {
        let y = UnitCube3::from_array(y).unwrap();
        for pivot in [Pivot::First, Pivot::Second] {
            let x = psi_inv(pivot, &y).unwrap();
            prop_assert!(x.is_valid());
        }
    }
}
