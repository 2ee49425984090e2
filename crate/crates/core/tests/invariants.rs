use proptest::prelude::*;

use uq_core::bases::{tensor_crystal, TensorConvention};
use uq_core::cartan::Weight;
use uq_core::qscalar::FieldElement;
use uq_core::rmatrix::{check_intertwiner, Irrep, Session};

fn a1() -> &'static Session {
    static S: std::sync::OnceLock<Session> = std::sync::OnceLock::new();
    S.get_or_init(|| Session::from_type("A1").unwrap())
}

fn a2() -> &'static Session {
    static S: std::sync::OnceLock<Session> = std::sync::OnceLock::new();
    S.get_or_init(|| Session::from_type("A2").unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn crystals_satisfy_axioms(a in 0i64..3, b in 0i64..3) {
        prop_assume!(a + b > 0);
        let v = a2().irrep(&Weight(vec![a, b])).unwrap();
        v.basis.crystal.check_axioms(&a2().cartan).unwrap();
        prop_assert_eq!(v.basis.crystal.highest_weight_vertices().len(), 1);
        prop_assert_eq!(v.basis.len(), v.module.dim());
    }

    #[test]
    fn tensor_crystal_components_match_dimension(a in 1i64..4, b in 1i64..4) {
        let (v, w) = (a1().irrep(&Weight(vec![a])).unwrap(), a1().irrep(&Weight(vec![b])).unwrap());
        let t = tensor_crystal(&v.basis.crystal, &w.basis.crystal, TensorConvention::Kashiwara).unwrap();
        t.check_axioms(&a1().cartan).unwrap();
        // Clebsch-Gordan: one component per highest weight a+b, a+b-2, ..., |a-b|
        prop_assert_eq!(t.highest_weight_vertices().len() as i64, a.min(b) + 1);
    }

    #[test]
    fn global_basis_scales_with_pin(n in 1i64..4, k in -3i64..4, c in 1i64..5) {
        let v = a1().irrep(&Weight(vec![n])).unwrap();
        let order = v.module.order();
        let z = FieldElement::from_int(c, order) + FieldElement::q_int(k, order);
        prop_assume!(!z.is_zero());
        let scaled = Irrep::with_hw(v.module.clone(), &v.hw().scale(&z)).unwrap();
        for (x, y) in scaled.basis.elements.iter().zip(&v.basis.elements) {
            prop_assert_eq!(x, &y.scale(&z));
        }
    }

    #[test]
    fn r_matrix_is_an_intertwiner(a in 1i64..3, b in 1i64..3) {
        let p = a1().pair(&Weight(vec![a]), &Weight(vec![b])).unwrap();
        let r = p.r_oracle().unwrap();
        let rep = check_intertwiner("R", &p.braiding().unwrap(), &p.product.module, &p.reversed);
        prop_assert!(rep.pass, "{}", rep.name);
        prop_assert!(r.matrix.nnz() > 0);
    }
}
