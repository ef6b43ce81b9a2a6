use num_bigint::BigInt;
use troptev::curves::CurveType;
use troptev::enumeration::{enumerate_instance, exclusion_audit, standard_point_config, total};
use troptev::formula::{per_curve_multiplicity, predicted_counts, trop_tev};
use troptev::model::{instance_grid, ContactData};
use troptev::render::{render_files, render_svg, RenderOptions};

#[test]
fn enumeration_matches_formula_and_predicted_type_split() {
    for g in instance_grid(&[1, 2], 3, 3, 5).iter().filter(|g| trop_tev(g).value != BigInt::from(0)) {
        let e = enumerate_instance(g, 11).unwrap();
        let p = predicted_counts(g);
        assert_eq!(e.report.trop_tev, trop_tev(g).value, "{g}");
        assert_eq!(e.report.labelled_curves, p.total_labelled, "{g}");
        assert_eq!(e.type_a_labelled, p.type_a_labelled, "{g}");
        assert_eq!(e.type_b_labelled, p.type_b_labelled, "{g}");
        assert_eq!(e.curves.len() as u64, u64::try_from(&p.total_unlabelled).unwrap(), "{g}");
        let m = per_curve_multiplicity(g).unwrap();
        assert!(e.curves.iter().all(|c| c.multiplicity == m), "{g}");
    }
}

#[test]
fn mixed_instance_has_one_curve_of_each_type() {
    let g = ContactData::hirzebruch(1, 4, [&[1, 1, 1], &[1], &[3], &[4]]).unwrap();
    let e = enumerate_instance(&g, 0).unwrap();
    let mut types: Vec<CurveType> = e.curves.iter().map(|c| c.curve_type).collect();
    types.sort();
    assert_eq!(types, vec![CurveType::A, CurveType::B]);
    assert_eq!(e.report.labelled_sum, BigInt::from(144));
    assert_eq!(e.report.trop_tev, BigInt::from(24));
}

#[test]
fn enumeration_is_independent_of_the_point_seed() {
    let g = ContactData::hirzebruch(2, 5, [&[1, 2], &[2], &[1, 1, 1], &[4, 4]]).unwrap();
    let totals: Vec<BigInt> = (0..4).map(|s| total(&g, &standard_point_config(&g, s).unwrap()).unwrap().report.trop_tev).collect();
    assert_eq!(totals, vec![BigInt::from(512); 4]);
}

#[test]
fn excluded_placements_contribute_nothing() {
    let g = ContactData::hirzebruch(3, 4, [&[1, 1], &[], &[2], &[2, 2, 2]]).unwrap();
    assert!(trop_tev(&g).value > BigInt::from(0));
    let report = exclusion_audit(&g, &standard_point_config(&g, 2).unwrap()).unwrap();
    assert!(report.passed());
    assert!(!report.cases.is_empty());
}

#[test]
fn rendering_produces_one_file_per_curve_and_a_contact_sheet() {
    let g = ContactData::hirzebruch(1, 4, [&[1, 1, 1], &[1], &[3], &[4]]).unwrap();
    let curves = enumerate_instance(&g, 0).unwrap().curves;
    let files = render_files(&curves, RenderOptions::default()).unwrap();
    assert_eq!(files.len(), curves.len() + 1);
    assert!(files.iter().any(|(name, _)| name == "contact_sheet.svg"));
    let svg = render_svg(&curves[..1], RenderOptions::default()).unwrap();
    assert_eq!(svg, render_svg(&curves[..1], RenderOptions::default()).unwrap());
    assert!(render_svg(&[], RenderOptions::default()).is_err());
}
