//! Property tests for the polynomial layer: evaluation homomorphism, shift
//! round trips, Hasse-derivative identities, and substitution consistency.

use std::collections::BTreeMap;

use proptest::prelude::*;

use pit_core::field::{Field, Felt};
use pit_core::poly::{PolyMap, SparsePoly};

fn field_strategy() -> impl Strategy<Value = Field> {
    prop_oneof![Just(Field::new(2).unwrap()), Just(Field::new(101).unwrap())]
}

#[derive(Debug, Clone)]
struct Instance {
    field: Field,
    n: usize,
    f: SparsePoly,
    g: SparsePoly,
    alpha: Vec<u64>,
}

fn instance_strategy() -> impl Strategy<Value = Instance> {
    (field_strategy(), 1usize..=3).prop_flat_map(|(field, n)| {
        let term = (proptest::collection::vec(0u32..4, n), 0u64..101);
        (
            Just(field),
            Just(n),
            proptest::collection::vec(term.clone(), 0..6),
            proptest::collection::vec(term, 0..6),
            proptest::collection::vec(0u64..101, n),
        )
            .prop_map(|(field, n, ft, gt, alpha)| {
                let build = |terms: Vec<(Vec<u32>, u64)>| {
                    let mut p = SparsePoly::zero(field, n);
                    for (e, c) in terms {
                        let m = SparsePoly::monomial(field, n, &e, field.elt(c as i128));
                        p = p.add(&m).unwrap();
                    }
                    p
                };
                Instance { field, n, f: build(ft), g: build(gt), alpha }
            })
    })
}

fn felts(field: Field, vals: &[u64]) -> Vec<Felt> {
    vals.iter().map(|&v| field.elt(v as i128)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eval_is_a_ring_homomorphism(inst in instance_strategy()) {
        let point = felts(inst.field, &inst.alpha);
        let sum = inst.f.add(&inst.g).unwrap();
        let prod = inst.f.mul(&inst.g).unwrap();
        let (fv, gv) = (inst.f.eval(&point).unwrap(), inst.g.eval(&point).unwrap());
        prop_assert_eq!(sum.eval(&point).unwrap(), fv + gv);
        prop_assert_eq!(prod.eval(&point).unwrap(), fv * gv);
    }

    #[test]
    fn shift_round_trip(inst in instance_strategy()) {
        let alpha = felts(inst.field, &inst.alpha);
        let back: Vec<Felt> = alpha.iter().map(|&a| -a).collect();
        let shifted = inst.f.shift_point(&alpha).unwrap();
        prop_assert_eq!(shifted.shift_point(&back).unwrap(), inst.f);
    }

    #[test]
    fn hasse_derivative_is_shift_coefficient(inst in instance_strategy()) {
        // coeff of x^b in f(x + alpha) equals d_b(f)(alpha)
        let alpha = felts(inst.field, &inst.alpha);
        let shifted = inst.f.shift_point(&alpha).unwrap();
        for b in pit_core::rank::grid_exponents(inst.n, 4) {
            let lhs = shifted.coeff(&b).unwrap();
            let rhs = inst.f.hasse_derivative(&b).unwrap().eval(&alpha).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn compose_with_identity(inst in instance_strategy()) {
        let id = PolyMap::identity(inst.field, inst.n);
        prop_assert_eq!(inst.f.compose(&id).unwrap(), inst.f);
    }

    #[test]
    fn substitute_all_vars_is_eval(inst in instance_strategy()) {
        let point = felts(inst.field, &inst.alpha);
        let assign: BTreeMap<usize, Felt> =
            point.iter().enumerate().map(|(i, &v)| (i, v)).collect();
        let fixed = inst.f.substitute(&assign).unwrap();
        prop_assert_eq!(fixed.arity(), 0);
        prop_assert_eq!(fixed.eval(&[]).unwrap(), inst.f.eval(&point).unwrap());
    }

    #[test]
    fn kronecker_preserves_nonzeroness(inst in instance_strategy()) {
        // pair each variable with a fresh z-variable of matching exponent
        let n = inst.n;
        let f = inst.field;
        let mut wide = SparsePoly::zero(f, 2 * n);
        for (e, c) in inst.f.terms() {
            let mut exps = vec![0u32; 2 * n];
            exps[..n].copy_from_slice(e);
            for i in 0..n {
                exps[n + i] = e[i] % 2;
            }
            wide = wide.add(&SparsePoly::monomial(f, 2 * n, &exps, c)).unwrap();
        }
        let z_block: Vec<usize> = (n..2 * n).collect();
        let folded = wide.kronecker_substitute(&z_block, 8).unwrap();
        prop_assert_eq!(folded.is_zero(), wide.is_zero());
    }
}
