//! The functional grammar of the norming set: tree-structured functionals
//! (type 0, averages, type I, type II, convex combinations, restrictions and
//! negations), special sequences chained by the coding function, exact
//! evaluation, validation against the five construction clauses, and a
//! stable text serialization.

mod evaluate;
mod ops;
mod serial;
mod tree;
mod validate;

pub use evaluate::{evaluate, evaluate_clipped, to_coeffs};
pub use ops::{branch_action, separates, weight_set, BranchAction};
pub use serial::{parse_func, parse_func_text, FUNCTIONAL_HEADER};
pub use tree::{Func, Node, Sign, SpecialSequence};
pub use validate::{
    validate_functional, validate_special_sequence, Violation, ViolationCode,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finvec::{FinVec, Window};
    use crate::profile::ParameterProfile;
    use crate::rational::{q, qi};

    fn strict() -> ParameterProfile {
        ParameterProfile::strict()
    }

    #[test]
    fn unit_evaluation() {
        let p = strict();
        let f = Func::unit(Sign::Plus, 3);
        let x = FinVec::from_entries([(3, qi(5))]).unwrap();
        assert_eq!(evaluate(&f, &x, &p), qi(5));
        assert_eq!(evaluate(&Func::neg(f), &x, &p), qi(-5));
    }

    /// The weight-1 functional (1/2)(e_2* + (1/5)e_5*): admissible mins
    /// {2,5}, sizes 1 then 5 > 2^2 under the strict growth rule.
    fn sample_ia(second_size: u64) -> Func {
        let a1 = Func::alpha_avg(1u32.into(), vec![Func::unit(Sign::Plus, 2)]);
        let a2 = Func::alpha_avg(second_size.into(), vec![Func::unit(Sign::Plus, 5)]);
        Func::type_ia(1, Sign::Plus, Window::FULL, vec![a1, a2])
    }

    #[test]
    fn clause_example_validates_and_evaluates() {
        let p = strict();
        let f = sample_ia(5);
        assert!(validate_functional(&f, &p, None).is_empty());
        let x = FinVec::from_entries([(2, qi(1)), (5, qi(1))]).unwrap();
        assert_eq!(evaluate(&f, &x, &p), q(3, 5));
    }

    #[test]
    fn vfg_mutation_is_caught() {
        let p = strict();
        let f = sample_ia(2);
        let v = validate_functional(&f, &p, None);
        assert!(
            v.iter()
                .any(|v| v.code == ViolationCode::VfgSize && v.detail.contains("2 <= 2^2")),
            "got {v:?}"
        );
    }

    #[test]
    fn evaluation_is_linear() {
        let p = strict();
        let f = sample_ia(5);
        let x = FinVec::from_entries([(2, q(1, 3)), (5, qi(2))]).unwrap();
        let y = FinVec::from_entries([(2, qi(-1)), (4, qi(7))]).unwrap();
        let (a, b) = (q(3, 7), q(-5, 2));
        let lhs = evaluate(&f, &x.scale(&a).add(&y.scale(&b)), &p);
        let rhs = a * evaluate(&f, &x, &p) + b * evaluate(&f, &y, &p);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn evaluation_matches_coefficients() {
        let p = strict();
        let f = sample_ia(5);
        let x = FinVec::from_entries([(2, q(2, 3)), (5, q(-1, 4)), (9, qi(3))]).unwrap();
        assert_eq!(evaluate(&f, &x, &p), to_coeffs(&f, &p).dot(&x));
    }

    #[test]
    fn window_action() {
        let p = strict();
        let f = sample_ia(5);
        let e = Window::new(3, 9).unwrap();
        let x = FinVec::from_entries([(2, qi(1)), (5, qi(1))]).unwrap();
        let restricted = Func::restrict(e, f.clone());
        assert_eq!(evaluate(&restricted, &x, &p), evaluate(&f, &x.restrict(&e), &p));
        assert_eq!(evaluate(&restricted, &x, &p), q(1, 10));
    }

    #[test]
    fn dual_ball_bound() {
        // |f(x)| <= l1(x) for a validated functional
        let p = strict();
        let f = sample_ia(5);
        let x = FinVec::from_entries([(2, q(-7, 2)), (5, qi(4)), (7, qi(1))]).unwrap();
        assert!(evaluate(&f, &x, &p).abs() <= x.l1());
        // and the coefficient vector sits in the unit ball of l_inf
        assert!(to_coeffs(&f, &p).linf() <= qi(1));
    }

    use num_traits::Signed;
}
