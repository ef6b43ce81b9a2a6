use num_bigint::BigInt;
use num_traits::Zero;
use troptev::formula::{per_curve_multiplicity, predicted_counts, trop_tev, trop_tev_p2, ZeroReason};
use troptev::model::{instance_grid, ContactData};
use troptev::oracle::{full_oracle_seeded, invariance_check, structured_oracle_seeded, FullOracleOptions, Split};

#[test]
fn formula_structured_oracle_and_counts_agree_on_grid() {
    let grid = instance_grid(&[1, 2, 3], 3, 4, 6);
    assert!(grid.len() > 500);
    for (i, g) in grid.iter().enumerate() {
        let f = trop_tev(g).value;
        assert!(f >= BigInt::zero());
        assert_eq!(structured_oracle_seeded(g, i as u64).unwrap().trop_tev, f, "{g}");
        let counted = match per_curve_multiplicity(g) {
            Some(m) => predicted_counts(g).total_labelled * m / g.symmetry(),
            None => BigInt::zero(),
        };
        assert_eq!(counted, f, "{g}");
        let swapped = g.swap_mu1_mu3();
        assert_eq!(trop_tev(&swapped).value, f, "{g}");
        assert_eq!(structured_oracle_seeded(&swapped, i as u64 + 1).unwrap().trop_tev, f, "{g}");
    }
}

#[test]
fn full_oracle_agrees_and_limit_types_have_a_central_vertex() {
    for g in [
        ContactData::hirzebruch(2, 3, [&[1], &[], &[1], &[1, 1]]).unwrap(),
        ContactData::hirzebruch(1, 3, [&[1], &[1], &[1], &[2]]).unwrap(),
        ContactData::hirzebruch(1, 4, [&[1, 1], &[], &[1, 1], &[1, 1]]).unwrap(),
        ContactData::hirzebruch(2, 4, [&[1], &[1], &[1], &[1, 1, 1]]).unwrap(),
    ] {
        let r = full_oracle_seeded(&g, 3, None, FullOracleOptions::default()).unwrap();
        assert_eq!(r.report.trop_tev, trop_tev(&g).value, "{g}");
        assert_eq!(r.limit.trop_tev, trop_tev(&g).value, "{g}");
        assert_eq!(r.central_after_contraction, r.limit_accepted, "{g}");
    }
}

#[test]
fn p2_needs_the_n4_gate() {
    let g = ContactData::p2(4, [&[4], &[], &[4], &[1, 1, 1, 1]]).unwrap();
    let f = trop_tev_p2(&g).unwrap();
    assert_eq!(f.value, BigInt::zero());
    assert_eq!(f.zero_reason, Some(ZeroReason::Mu4TooLong));
    assert_eq!(full_oracle_seeded(&g, 0, None, FullOracleOptions::default()).unwrap().report.trop_tev, BigInt::zero());
    assert_eq!(structured_oracle_seeded(&g, 0).unwrap().trop_tev, BigInt::zero());
}

#[test]
fn totals_do_not_depend_on_seeds_or_splits() {
    let toy = ContactData::hirzebruch(1, 4, [&[1, 1], &[], &[1, 1], &[1, 1]]).unwrap();
    let r = invariance_check(&toy, 5, 11, FullOracleOptions::default()).unwrap();
    assert!(r.consistent);
    assert_eq!(r.full.len(), Split::ALL.len());
}

#[test]
fn oversized_instances_are_refused() {
    let g = ContactData::hirzebruch(2, 5, [&[1, 2], &[2], &[1, 1, 1], &[4, 4]]).unwrap();
    assert!(full_oracle_seeded(&g, 0, None, FullOracleOptions::default()).is_err());
}
