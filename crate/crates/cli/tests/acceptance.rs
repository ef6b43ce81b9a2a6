//! Acceptance gate: every criterion prints one PASS or FAIL line; the run
//! fails if any criterion fails or overruns its time budget.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use troptev::enumeration::{exclusion_audit, standard_point_config};
use troptev::exactmath::det2;
use troptev::formula::{comparison_report, comparison_sweep, per_curve_multiplicity, predicted_counts, trop_tev, ComparisonVerdict, Parity};
use troptev::model::{instance_grid, ContactData, FanSpec, Ray};
use troptev::oracle::{full_oracle_seeded, identity_check, structured_oracle_seeded, FullOracleOptions, Split};

type Check = fn() -> Result<String, String>;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

/// Runs the binary; returns the exit status and the parsed JSON output.
fn troptev(args: &[&str]) -> Result<(i32, Value), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_troptev")).args(args).output().map_err(|e| e.to_string())?;
    let code = out.status.code().unwrap_or(-1);
    let json = serde_json::from_slice(&out.stdout)
        .map_err(|e| format!("troptev {}: {e}; stderr: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))?;
    Ok((code, json))
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, expected {want:?}"))
    }
}

fn grid() -> Vec<ContactData> {
    instance_grid(&[1, 2, 3], 3, 4, 6)
}

fn mixed_end_to_end() -> Result<String, String> {
    let input = data("mixed_a1_n4.json");
    let (code, c) = troptev(&["compute", "--input", &input])?;
    expect("compute exit", code, 0)?;
    expect("compute value", c["value"].as_str(), Some("24"))?;
    let (code, e) = troptev(&["enumerate", "--input", &input, "--seed", "0"])?;
    expect("enumerate exit", code, 0)?;
    let curves = e["curves"].as_array().ok_or("no curve list")?;
    expect("unlabelled curves", curves.len(), 2)?;
    let mut types: Vec<&str> = curves.iter().filter_map(|c| c["curve_type"].as_str()).collect();
    types.sort();
    expect("curve types", types, vec!["A", "B"])?;
    for c in curves {
        expect("multiplicity", c["multiplicity"].as_str(), Some("12"))?;
    }
    expect("labelled sum", e["report"]["labelled_sum"].as_str(), Some("144"))?;
    let (code, v) = troptev(&["verify", "--input", &input, "--oracle", "both", "--trials", "5"])?;
    expect("verify exit", code, 0)?;
    expect("verify agree", v["agree"].as_bool(), Some(true))?;
    expect("full oracle", v["full"]["report"]["trop_tev"].as_str(), Some("24"))?;
    expect("type space", v["full"]["type_space"].as_str(), Some("2027025"))?;
    Ok(format!(
        "24; 2 curves (A, B) of multiplicity 12; labelled sum 144; full oracle 24 over {} trees after pruning",
        v["full"]["trees_evaluated"]
    ))
}

fn weighted_end_to_end() -> Result<String, String> {
    let input = data("weighted_a2_n5.json");
    let (_, c) = troptev(&["compute", "--input", &input])?;
    expect("compute value", c["value"].as_str(), Some("512"))?;
    let (_, e) = troptev(&["enumerate", "--input", &input, "--seed", "0"])?;
    let curves = e["curves"].as_array().ok_or("no curve list")?;
    expect("unlabelled curves", curves.len(), 4)?;
    for c in curves {
        expect("curve type", c["curve_type"].as_str(), Some("A"))?;
        expect("multiplicity", c["multiplicity"].as_str(), Some("128"))?;
    }
    let (code, v) = troptev(&["verify", "--input", &input, "--oracle", "structured", "--trials", "5"])?;
    expect("verify exit", code, 0)?;
    let totals: Vec<&str> = v["structured"].as_array().ok_or("no totals")?.iter().filter_map(|t| t["total"].as_str()).collect();
    expect("structured totals", totals, vec!["512"; 5])?;
    let (code, bad) = troptev(&["compute", "--input", &data("weighted_a2_n5_unbalanced.json")])?;
    expect("unbalanced exit", code, 2)?;
    let violations = bad["violations"].as_array().ok_or("no violations")?;
    expect("violation count", violations.len(), 1)?;
    expect("violation kind", violations[0]["kind"].as_str(), Some("BalanceViolation"))?;
    expect("violation axis", violations[0]["axis"].as_str(), Some("y"))?;
    expect("violation excess", violations[0]["excess"].as_i64(), Some(1))?;
    Ok("512; 4 type-A curves of multiplicity 128; 5 seeds agree; unbalanced data rejected with y excess +1".into())
}

fn p2_degree_two() -> Result<String, String> {
    let input = data("p2_degree2.json");
    let (_, c) = troptev(&["compute", "--input", &input, "--p2"])?;
    expect("P2 formula", c["value"].as_str(), Some("1"))?;
    let (code, v) = troptev(&["verify", "--input", &input, "--oracle", "both", "--trials", "5"])?;
    expect("verify exit", code, 0)?;
    expect("full oracle", v["full"]["report"]["trop_tev"].as_str(), Some("1"))?;
    expect("structured oracle", v["structured"][0]["total"].as_str(), Some("1"))?;
    Ok("formula 1 = structured oracle 1 = full oracle 1".into())
}

fn grid_consistency() -> Result<String, String> {
    let grid = grid();
    let mut nonzero = 0;
    for (i, g) in grid.iter().enumerate() {
        let f = trop_tev(g).value;
        if f < BigInt::from(0) {
            return Err(format!("negative degree for {g}"));
        }
        let o = structured_oracle_seeded(g, i as u64).map_err(|e| format!("{g}: {e}"))?.trop_tev;
        expect(&format!("structured oracle for {g}"), &o, &f)?;
        let counted = match per_curve_multiplicity(g) {
            Some(m) => predicted_counts(g).total_labelled * m / g.symmetry(),
            None => BigInt::from(0),
        };
        expect(&format!("curve count times multiplicity for {g}"), &counted, &f)?;
        if f != BigInt::from(0) {
            nonzero += 1;
        }
    }
    Ok(format!("{} instances ({nonzero} nonzero) agree", grid.len()))
}

fn invariance() -> Result<String, String> {
    let grid = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let nonzero: Vec<&ContactData> = grid.iter().filter(|g| trop_tev(g).value != BigInt::from(0)).collect();
    let zero: Vec<&ContactData> = grid.iter().filter(|g| trop_tev(g).value == BigInt::from(0)).collect();
    let mut sample: Vec<&ContactData> = nonzero.choose_multiple(&mut rng, 15).copied().collect();
    sample.extend(zero.choose_multiple(&mut rng, 5).copied());
    for (i, g) in sample.iter().enumerate() {
        let totals: Vec<BigInt> = (0..5)
            .map(|s| structured_oracle_seeded(g, 1000 * i as u64 + s).map(|r| r.trop_tev))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        if totals.iter().any(|t| t != &totals[0]) {
            return Err(format!("seed-dependent totals {totals:?} for {g}"));
        }
    }
    let toy = ContactData::hirzebruch(1, 3, [&[1], &[1], &[1], &[2]]).map_err(|e| e.to_string())?;
    let toy_totals: Vec<BigInt> = (0..3)
        .map(|s| full_oracle_seeded(&toy, s, None, FullOracleOptions::default()).map(|r| r.report.trop_tev))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    if toy_totals.iter().any(|t| t != &trop_tev(&toy).value) {
        return Err(format!("three-marking totals {toy_totals:?} differ from the formula {}", trop_tev(&toy).value));
    }
    // three markings have no quartet; splits are varied with four
    let four = ContactData::hirzebruch(1, 4, [&[1, 1], &[], &[1, 1], &[1, 1]]).map_err(|e| e.to_string())?;
    let split_totals: Vec<BigInt> = Split::ALL
        .iter()
        .map(|&s| full_oracle_seeded(&four, 7, Some(s), FullOracleOptions::default()).map(|r| r.report.trop_tev))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    if split_totals.iter().any(|t| t != &trop_tev(&four).value) {
        return Err(format!("split-dependent totals {split_totals:?}"));
    }
    Ok(format!(
        "20 instances x 5 seeds constant; three-marking full oracle {} over 3 targets; four-marking full oracle {} for all 3 splits",
        toy_totals[0], split_totals[0]
    ))
}

fn zero_theorems() -> Result<String, String> {
    let n1 = |g: &ContactData| g.n() as i64 - 1;
    let vanishing: Vec<ContactData> = grid()
        .into_iter()
        .filter(|g| g.len_of(Ray::N1) > n1(g) || g.len_of(Ray::N3) > n1(g) || g.len_of(Ray::N2) > n1(g) - g.len_of(Ray::N4))
        .collect();
    let mut full_checked = 0;
    for (i, g) in vanishing.iter().enumerate() {
        expect(&format!("formula for {g}"), trop_tev(g).value, BigInt::from(0))?;
        let o = structured_oracle_seeded(g, i as u64).map_err(|e| e.to_string())?.trop_tev;
        expect(&format!("structured oracle for {g}"), o, BigInt::from(0))?;
        if g.n() + g.m() <= 7 {
            let f = full_oracle_seeded(g, i as u64, None, FullOracleOptions::default()).map_err(|e| e.to_string())?;
            expect(&format!("full oracle for {g}"), f.report.trop_tev, BigInt::from(0))?;
            full_checked += 1;
        }
    }
    let long = ContactData::hirzebruch(1, 4, [&[1, 1, 1, 1], &[], &[4], &[4]]).map_err(|e| e.to_string())?;
    let f = full_oracle_seeded(&long, 0, None, FullOracleOptions::default()).map_err(|e| e.to_string())?;
    expect("full oracle with mu1 too long", f.report.trop_tev, BigInt::from(0))?;
    Ok(format!("{} vanishing instances give 0 from formula and structured oracle; {} also from the full oracle", vanishing.len(), full_checked + 1))
}

fn swap_symmetry() -> Result<String, String> {
    let grid = grid();
    for (i, g) in grid.iter().enumerate() {
        let s = g.swap_mu1_mu3();
        let f = trop_tev(g).value;
        expect(&format!("formula under swap for {g}"), trop_tev(&s).value, f.clone())?;
        let o = structured_oracle_seeded(&s, 7 + i as u64).map_err(|e| e.to_string())?.trop_tev;
        expect(&format!("structured oracle under swap for {g}"), o, f)?;
    }
    Ok(format!("{} instances invariant under exchanging mu1 and mu3", grid.len()))
}

fn identities() -> Result<String, String> {
    let r = identity_check((-10, 10), (0, 10), 12, &grid(), 0);
    if !r.passed() {
        return Err(r.failures.join("; "));
    }
    if r.lemma_checked == 0 {
        return Err("no second-case instance checked".into());
    }
    Ok(format!(
        "reflection {} pairs; complement {} pairs ({} with x <= 0 outside its domain); Vandermonde {} samples; type-split sum {} instances ({} with negative counts, all of degree 0)",
        r.reflection_checked, r.complement_checked, r.complement_skipped, r.vandermonde_checked, r.lemma_checked, r.lemma_skipped
    ))
}

fn exclusion() -> Result<String, String> {
    let mut instances = vec![
        ContactData::hirzebruch(2, 5, [&[1, 2], &[2], &[1, 1, 1], &[4, 4]]).map_err(|e| e.to_string())?,
        ContactData::hirzebruch(1, 4, [&[1, 1, 1], &[1], &[3], &[4]]).map_err(|e| e.to_string())?,
    ];
    let nonzero: Vec<ContactData> = grid().into_iter().filter(|g| trop_tev(g).value != BigInt::from(0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    instances.extend(nonzero.choose_multiple(&mut rng, 10).cloned());
    let mut cases = 0;
    for (i, g) in instances.iter().enumerate() {
        let c = standard_point_config(g, i as u64).map_err(|e| format!("{g}: {e}"))?;
        let r = exclusion_audit(g, &c).map_err(|e| format!("{g}: {e}"))?;
        if !r.passed() {
            return Err(format!("{} extra solutions for {g}", r.failures.len().max(1)));
        }
        cases += r.cases.len();
    }
    Ok(format!("{} instances, {cases} excluded placement classes, no extra solutions", instances.len()))
}

fn comparison() -> Result<String, String> {
    let odd = (1..=3).flat_map(|j| comparison_sweep(Parity::Odd, j, 6)).find(|r| {
        r.constraints_satisfied && r.verdict == ComparisonVerdict::Separated && r.lhs == BigInt::from(0) && r.rhs > BigInt::from(0)
    });
    let odd = odd.ok_or("no odd parameters separate the two counts")?;
    for j in 2..=4 {
        for d in 1..=4 {
            let r = comparison_report(Parity::Even, j, d, None, 2 * d + 1);
            if r.infeasible.is_none() || r.lhs != BigInt::from(0) || r.rhs != BigInt::from(1) {
                return Err(format!("even j={j} d={d}: expected an infeasible class with 0 vs 1, got {} vs {}", r.lhs, r.rhs));
            }
        }
    }
    for d in 1..=4 {
        let r = comparison_report(Parity::Even, 1, d, None, 2 * d + 1);
        if r.verdict != ComparisonVerdict::PaperDiscrepancy || r.lhs != BigInt::from(1) {
            return Err(format!("even j=1 d={d}: expected a flagged discrepancy with value 1, got {:?} {}", r.verdict, r.lhs));
        }
    }
    Ok(format!(
        "odd j={} d={} k={:?} n={} separates ({} vs {}); even j>=2 infeasible (0 vs 1); even j=1 flagged with value 1",
        odd.j, odd.d, odd.k, odd.n, odd.lhs, odd.rhs
    ))
}

fn determinant_table() -> Result<String, String> {
    for a in 1..=5u32 {
        let fan = FanSpec::hirzebruch(a);
        let ai = a as i64;
        let table = [
            (Ray::N1, Ray::N2, 1),
            (Ray::N1, Ray::N3, ai),
            (Ray::N1, Ray::N4, 1),
            (Ray::N2, Ray::N3, 1),
            (Ray::N2, Ray::N4, 0),
            (Ray::N3, Ray::N4, 1),
        ];
        for (r, s, want) in table {
            expect(&format!("|det({r}, {s})| for a = {a}"), det2(fan.ray(r), fan.ray(s)).abs(), want)?;
            expect(&format!("|det({s}, {r})| for a = {a}"), det2(fan.ray(s), fan.ray(r)).abs(), want)?;
        }
    }
    Ok("all six ray pairs match for a = 1..5".into())
}

fn main() {
    let criteria: [(&str, Duration, Check); 11] = [
        ("mixed-weight instance end to end", Duration::from_secs(60), mixed_end_to_end),
        ("weighted instance and unbalanced data", Duration::from_secs(10), weighted_end_to_end),
        ("P2 degree two", Duration::from_secs(60), p2_degree_two),
        ("grid consistency", Duration::from_secs(300), grid_consistency),
        ("invariance", Duration::from_secs(300), invariance),
        ("vanishing theorems", Duration::from_secs(300), zero_theorems),
        ("mu1/mu3 symmetry", Duration::from_secs(300), swap_symmetry),
        ("binomial identities", Duration::from_secs(300), identities),
        ("exclusion audit", Duration::from_secs(300), exclusion),
        ("log vs stable comparison", Duration::from_secs(60), comparison),
        ("determinant table", Duration::from_secs(10), determinant_table),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let verdict = match result {
            Ok(detail) if took <= *budget => format!("PASS  {:>2}. {name}: {detail} [{:.1}s]", i + 1, took.as_secs_f64()),
            Ok(detail) => {
                failed += 1;
                format!("FAIL  {:>2}. {name}: over budget {:.1}s > {}s ({detail})", i + 1, took.as_secs_f64(), budget.as_secs())
            }
            Err(why) => {
                failed += 1;
                format!("FAIL  {:>2}. {name}: {why} [{:.1}s]", i + 1, took.as_secs_f64())
            }
        };
        println!("{verdict}");
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
