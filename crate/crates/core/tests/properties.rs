use bruhat_core::ldu::{check_inverse_factors, ldu_rec_with, midpoint_split};
use bruhat_core::minors::{leading_minor, oracle_rank, sylvester_pairs};
use bruhat_core::*;
use proptest::prelude::*;

fn matrix(n: usize, m: usize, lo: i64, hi: i64) -> impl Strategy<Value = Matrix<Integer>> {
    proptest::collection::vec(lo..=hi, n * m)
        .prop_map(move |v| Matrix::new(n, m, v.into_iter().map(int).collect()).unwrap())
}

fn any_shape(max: usize) -> impl Strategy<Value = Matrix<Integer>> {
    (1..=max, 1..=max).prop_flat_map(|(n, m)| {
        prop_oneof![
            matrix(n, m, -9, 9),
            matrix(n, m, -1, 1),
            (1..=n.min(m))
                .prop_flat_map(move |r| (matrix(n, r, -4, 4), matrix(r, m, -4, 4)))
                .prop_map(|(x, y)| x.matmul(&y).unwrap()),
        ]
    })
}

fn square(lo: usize, hi: usize) -> impl Strategy<Value = Matrix<Integer>> {
    (lo..=hi).prop_flat_map(|n| matrix(n, n, -9, 9))
}

fn is_generic(a: &Matrix<Integer>) -> bool {
    (1..=a.rows()).all(|k| !leading_minor(a, k).unwrap().is_zero())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ldu_matches_minors(a in square(1, 7)) {
        prop_assume!(is_generic(&a));
        let f = ldu_full(&a, &mut OpCounter::new()).unwrap();
        prop_assert_eq!(reconstruct_ldu(&f), a.to_fractions());
        prop_assert!(check_inverse_factors(&f));
        let n = a.rows();
        for i in 0..n {
            prop_assert_eq!(&f.alphas[i], &leading_minor(&a, i + 1).unwrap());
            for j in 0..=i {
                prop_assert_eq!(&f.l[(i, j)], &alpha_minor(&a, MinorSpec::new(j + 1, i, j)).unwrap());
                prop_assert_eq!(&f.u[(j, i)], &alpha_minor(&a, MinorSpec::new(j + 1, j, i)).unwrap());
            }
        }
    }

    #[test]
    fn ldu_split_invariance(a in square(3, 7), cut in 0usize..3) {
        prop_assume!(is_generic(&a));
        let rule: fn(usize) -> usize = match cut {
            0 => |_| 1,
            1 => |m| m - 1,
            _ => midpoint_split,
        };
        let reference = ldu_full(&a, &mut OpCounter::new()).unwrap();
        let f = ldu_rec_with(&a, 0, &int(1), rule, &mut OpCounter::new(), None).unwrap();
        prop_assert_eq!(f, reference);
    }

    #[test]
    fn sylvester_holds(a in square(3, 5)) {
        for (k, s) in sylvester_pairs(a.rows()) {
            prop_assert!(check_sylvester(&a, k, s).unwrap());
        }
    }

    #[test]
    fn base_identity_holds(a in matrix(4, 4, -9, 9), i in 0usize..4, j in 0usize..4, k in 0usize..4, span in 1usize..4) {
        let s = (k + span).min(4);
        prop_assume!(k < s);
        prop_assert!(check_base_minor_identity(&a, i, j, k, s).unwrap());
    }

    #[test]
    fn etd_is_valid(a in any_shape(7)) {
        let f = etd(&a, &mut OpCounter::new()).unwrap();
        prop_assert!(verify_etd(&a, &f).unwrap());
        prop_assert_eq!(f.rank, oracle_rank(&a));
        let (l, d, u) = etd_to_ldu_grouping(&f);
        prop_assert!(l.is_lower_triangular() && u.is_upper_triangular());
        prop_assert_eq!(l.to_fractions().matmul(&d).unwrap().matmul(&u.to_fractions()).unwrap(), a.to_fractions());
    }

    #[test]
    fn etd_of_transpose(a in any_shape(6)) {
        let f = etd(&a.transpose(), &mut OpCounter::new()).unwrap();
        prop_assert!(verify_etd(&a, &f.transposed()).unwrap());
    }

    #[test]
    fn bruhat_general_is_valid(a in any_shape(7)) {
        let f = bruhat_general(&a, &mut OpCounter::new()).unwrap();
        prop_assert!(verify_bruhat(&a, &f).unwrap());
        prop_assert_eq!(f.rank, oracle_rank(&a));
    }

    #[test]
    fn bruhat_paths_agree(a in square(2, 6)) {
        if let Ok(f) = bruhat_flip(&a, &mut OpCounter::new()) {
            prop_assert!(verify_bruhat(&a, &f).unwrap());
            let g = bruhat_general(&a, &mut OpCounter::new()).unwrap();
            prop_assert_eq!(f.reconstruct().unwrap(), g.reconstruct().unwrap());
        }
    }

    #[test]
    fn rank_matches_bareiss(a in any_shape(7)) {
        prop_assert_eq!(etd(&a, &mut OpCounter::new()).unwrap().rank, bareiss_rank(&a));
    }
}

#[test]
fn counts_follow_recurrence_for_powers_of_two() {
    let mut seed = 0u64;
    for n in [2usize, 4, 8] {
        let mut found = 0;
        while found < 4 {
            seed += 1;
            let a = Matrix::from_fn(n, n, |i, j| {
                int(((seed as i64 * 31 + (i * 7 + j * 13) as i64 * 17) % 19) - 9)
            });
            if !is_generic(&a) {
                continue;
            }
            found += 1;
            let r = measure_ldu(&a).unwrap();
            assert_eq!(r.measured_total(), recurrence_t(n).unwrap());
        }
    }
}
