use pipedream::perm::{pattern_count, Permutation};
use pipedream::verify::{run_check, VerifyError, CHECK_IDS};
use proptest::prelude::*;

#[test]
fn every_check_passes_through_size_5() {
    for id in CHECK_IDS {
        let report = run_check(id, 5).unwrap();
        assert!(report.passed(), "{id}: {:?}", report.failures);
        assert!(report.instances_checked > 0, "{id}");
    }
}

#[test]
fn table_checks_reach_size_6() {
    for id in ["stanley", "gao-bound", "pattern-sum", "conj-gao"] {
        let report = run_check(id, 6).unwrap();
        assert!(report.passed(), "{id}: {:?}", report.failures);
    }
}

#[test]
fn unknown_check_is_rejected() {
    assert!(matches!(run_check("nope", 3), Err(VerifyError::UnknownCheck(_))));
}

fn perm(max: usize) -> impl Strategy<Value = Permutation> {
    (0..=max)
        .prop_flat_map(|n| Just((1..=n).collect::<Vec<_>>()).prop_shuffle())
        .prop_map(|w| Permutation::parse(&w).unwrap())
}

proptest! {
    #[test]
    fn inverse_is_involutive(w in perm(8)) {
        prop_assert_eq!(w.inverse().inverse(), w.clone());
        prop_assert_eq!(w.inverse().coxeter_length(), w.coxeter_length());
    }

    #[test]
    fn sums_contain_their_summands(u in perm(4), v in perm(4)) {
        let s = u.skew_sum(&v);
        prop_assert!(s.contains(&u) && s.contains(&v));
        prop_assert_eq!(s.coxeter_length(), u.coxeter_length() + v.coxeter_length() + u.len() * v.len());
        let d = u.direct_sum(&v);
        prop_assert_eq!(d.coxeter_length(), u.coxeter_length() + v.coxeter_length());
    }

    #[test]
    fn pattern_count_matches_containment(u in perm(3), w in perm(6)) {
        prop_assert_eq!(pattern_count(&u, &w) > 0, w.contains(&u));
    }
}

#[test]
fn nonreduced_grid_can_keep_its_permutation() {
    use pipedream::grid::BpdGrid;
    use pipedream::ktheory::resolve;
    let g = BpdGrid::from_ascii("...r-\n..r+-\n.r+jr\nr+jr+\n||r++").unwrap();
    let res = resolve(&g);
    assert_eq!(res.grid.bump_count(), 2);
    assert_eq!(res.permutation_type, g.permutation());
    assert_eq!(res.permutation_type, "21543".parse().unwrap());
}
