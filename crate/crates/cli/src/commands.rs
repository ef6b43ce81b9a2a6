use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use troptev::curves::CurveRecord;
use troptev::enumeration::{enumerate_instance, standard_regions, point_list, total, PointConfig};
use troptev::exactmath::{decimal, Vec2Q};
use troptev::formula::{comparison_report, conjecture_blowup, conjecture_pbundle, trop_tev, trop_tev_p2, FormulaResult, Parity};
use troptev::model::{instance_grid, ContactData, RawInstance, Target};
use troptev::oracle::{full_oracle_seeded, identity_check, structured_oracle_seeded, FullOracleOptions, FullReport};
use troptev::render::{render_files, RenderOptions};

use crate::manifest::digest;
use crate::{Command, ConjectureCmd, OracleChoice, Outcome, ParityArg};

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn ok<T: Serialize>(v: &T, gamma: Option<RawInstance>, seed: Option<u64>) -> Result<Outcome> {
    Ok(Outcome { json: pretty(v)?, status: 0, gamma, seed })
}

fn read_raw(path: &Path) -> Result<RawInstance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing contact data in {}", path.display()))
}

/// Validated data, or the validation report as the command's output.
fn load(path: &Path, force_p2: bool) -> Result<std::result::Result<ContactData, Outcome>> {
    let mut raw = read_raw(path)?;
    if force_p2 {
        raw.target = Target::P2;
    }
    match ContactData::validate(&raw) {
        Ok(g) => Ok(Ok(g)),
        Err(e) => {
            let report = serde_json::json!({ "error": e.to_string(), "violations": e.violations });
            Ok(Err(Outcome { json: pretty(&report)?, status: 2, gamma: Some(raw), seed: None }))
        }
    }
}

fn formula_for(g: &ContactData) -> Result<FormulaResult> {
    match g.fan().target {
        Target::P2 => Ok(trop_tev_p2(g)?),
        Target::Hirzebruch => Ok(trop_tev(g)),
    }
}

pub fn dispatch(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Compute(a) => {
            let g = match load(&a.input, a.p2)? {
                Ok(g) => g,
                Err(report) => return Ok(report),
            };
            ok(&formula_for(&g)?, Some(g.to_raw()), None)
        }
        Command::Enumerate(a) => {
            let g = match load(&a.input, false)? {
                Ok(g) => g,
                Err(report) => return Ok(report),
            };
            let result = match &a.points {
                None => enumerate_instance(&g, a.seed)?,
                Some(p) => total(&g, &read_points(&g, p, a.seed)?)?,
            };
            ok(&result, Some(g.to_raw()), Some(a.seed))
        }
        Command::Verify(a) => {
            let g = match load(&a.input, a.p2)? {
                Ok(g) => g,
                Err(report) => return Ok(report),
            };
            let v = verify(&g, a.oracle, a.trials, a.seed, a.max_leaves)?;
            let status = if v.agree { 0 } else { 1 };
            Ok(Outcome { json: pretty(&v)?, status, gamma: Some(g.to_raw()), seed: Some(a.seed) })
        }
        Command::Sweep(a) => sweep(a),
        Command::Identities(a) => {
            let grid = instance_grid(&[1, 2, 3], 3, 4, a.grid_nmax);
            let r = identity_check(a.xrange, a.yrange, a.nmax, &grid, a.seed);
            let passed = r.passed();
            let json = pretty(&serde_json::json!({ "passed": passed, "report": r }))?;
            Ok(Outcome { json, status: if passed { 0 } else { 1 }, gamma: None, seed: Some(a.seed) })
        }
        Command::Compare(a) => {
            let parity = match a.parity {
                ParityArg::Even => Parity::Even,
                ParityArg::Odd => Parity::Odd,
            };
            ok(&comparison_report(parity, a.j, a.d, a.k, a.n), None, None)
        }
        Command::Render(a) => render(a),
        Command::Conjecture { which } => {
            let value = match which {
                ConjectureCmd::Pbundle { r, a, mu, n } => conjecture_pbundle(*r, *a, &parse_mu(mu)?, *n)?,
                ConjectureCmd::Blowup { r, mu, n } => conjecture_blowup(*r, &parse_mu(mu)?, *n)?,
            };
            ok(&value, None, None)
        }
        Command::Replay { .. } => bail!("replay is handled before dispatch"),
    }
}

fn parse_mu(s: &str) -> Result<Vec<Vec<u32>>> {
    serde_json::from_str(s).with_context(|| format!("profiles must be a JSON list of lists, got {s:?}"))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointsFile {
    Config(PointConfig),
    Enumeration { config: PointConfig },
    Bare(#[serde(with = "point_list")] Vec<Vec2Q>),
}

/// User points for `enumerate`: they must sit in the standard regions.
fn read_points(g: &ContactData, path: &Path, seed: u64) -> Result<PointConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let points = match serde_json::from_str(&text).with_context(|| format!("parsing points in {}", path.display()))? {
        PointsFile::Config(c) | PointsFile::Enumeration { config: c } => c.points,
        PointsFile::Bare(p) => p,
    };
    let regions = standard_regions(g)?;
    if points.len() != regions.len() {
        bail!("{} points given, {} markings expected", points.len(), regions.len());
    }
    let config = PointConfig { a: g.a(), points, regions, seed };
    if !config.is_pairwise_generic() {
        bail!("points must lie in their standard regions with distinct x, y and ax+y values");
    }
    Ok(config)
}

#[derive(Debug, Serialize)]
pub struct SeedTotal {
    pub seed: u64,
    #[serde(with = "decimal")]
    pub total: BigInt,
}

#[derive(Debug, Serialize)]
pub struct Verdict {
    #[serde(with = "decimal")]
    pub formula: BigInt,
    pub zero_reason: Option<troptev::formula::ZeroReason>,
    pub structured: Vec<SeedTotal>,
    pub full: Option<FullReport>,
    pub full_skipped: Option<String>,
    pub agree: bool,
    pub discrepancies: Vec<String>,
}

pub fn verify(g: &ContactData, oracle: OracleChoice, trials: u64, seed: u64, max_leaves: usize) -> Result<Verdict> {
    let f = formula_for(g)?;
    let mut discrepancies = Vec::new();
    let mut structured = Vec::new();
    if oracle != OracleChoice::Full {
        let totals: Vec<_> = (0..trials)
            .into_par_iter()
            .map(|t| structured_oracle_seeded(g, seed + t).map(|r| SeedTotal { seed: seed + t, total: r.trop_tev }))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| anyhow!("structured oracle: {e}"))?;
        for s in &totals {
            if s.total != f.value {
                discrepancies.push(format!("structured oracle with seed {} gives {} but the formula gives {}", s.seed, s.total, f.value));
            }
        }
        structured = totals;
    }
    let (mut full, mut full_skipped) = (None, None);
    if oracle != OracleChoice::Structured {
        let legs = g.n() + g.m();
        if legs > max_leaves {
            let why = format!("{legs} legs exceed --max-leaves {max_leaves}");
            if oracle == OracleChoice::Full {
                bail!(why);
            }
            full_skipped = Some(why);
        } else {
            let r = full_oracle_seeded(g, seed, None, FullOracleOptions { max_leaves, ..Default::default() }).map_err(|e| anyhow!("full oracle: {e}"))?;
            if r.report.trop_tev != f.value {
                discrepancies.push(format!("full oracle gives {} but the formula gives {}", r.report.trop_tev, f.value));
            }
            if r.limit.trop_tev != f.value {
                discrepancies.push(format!("full oracle at vanishing lengths gives {} but the formula gives {}", r.limit.trop_tev, f.value));
            }
            if r.central_after_contraction != r.limit_accepted {
                discrepancies.push(format!(
                    "{} of {} limit types lack a central vertex",
                    r.limit_accepted - r.central_after_contraction,
                    r.limit_accepted
                ));
            }
            full = Some(r);
        }
    }
    Ok(Verdict { formula: f.value, zero_reason: f.zero_reason, structured, full, full_skipped, agree: discrepancies.is_empty(), discrepancies })
}

#[derive(Debug, Serialize)]
struct SweepRow {
    a: i64,
    n: usize,
    mu1: String,
    mu2: String,
    mu3: String,
    mu4: String,
    formula: String,
    oracle: String,
    agree: bool,
}

fn profile_text(p: &[u32]) -> String {
    p.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" ")
}

fn sweep(a: &crate::SweepArgs) -> Result<Outcome> {
    let a_values: Vec<i64> = (a.a.0..=a.a.1).collect();
    if a_values.iter().any(|&x| x < 1) {
        bail!("a must be positive");
    }
    let grid = instance_grid(&a_values, a.s1_max, a.wmax, a.nmax);
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let f = trop_tev(g).value;
            let o = structured_oracle_seeded(g, a.seed + i as u64).map_err(|e| anyhow!("{g}: {e}"))?.trop_tev;
            let p = g.profiles();
            Ok(SweepRow {
                a: g.a(),
                n: g.n(),
                mu1: profile_text(p[0].weights()),
                mu2: profile_text(p[1].weights()),
                mu3: profile_text(p[2].weights()),
                mu4: profile_text(p[3].weights()),
                formula: f.to_string(),
                oracle: o.to_string(),
                agree: f == o,
            })
        })
        .collect::<Result<_>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow!("writing CSV: {e}"))?;
    std::fs::write(&a.out, &bytes).with_context(|| format!("writing {}", a.out.display()))?;
    let disagreements = rows.iter().filter(|r| !r.agree).count();
    let summary = serde_json::json!({
        "instances": rows.len(),
        "nonzero": rows.iter().filter(|r| r.formula != "0").count(),
        "disagreements": disagreements,
        "out": a.out.display().to_string(),
        "csv_sha256": digest(std::str::from_utf8(&bytes)?),
    });
    Ok(Outcome { json: pretty(&summary)?, status: if disagreements == 0 { 0 } else { 1 }, gamma: None, seed: Some(a.seed) })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CurvesFile {
    Bare(Vec<CurveRecord>),
    Enumeration { curves: Vec<CurveRecord> },
}

fn render(a: &crate::RenderArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&a.curves).with_context(|| format!("reading {}", a.curves.display()))?;
    let curves = match serde_json::from_str(&text).with_context(|| format!("parsing curves in {}", a.curves.display()))? {
        CurvesFile::Bare(c) => c,
        CurvesFile::Enumeration { curves } => curves,
    };
    let files = render_files(&curves, RenderOptions { fan: !a.no_fan, label_all: a.label_all })?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut listing = Vec::new();
    for (name, svg) in &files {
        let path = a.out.join(name);
        std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
        listing.push(serde_json::json!({ "file": name, "sha256": digest(svg) }));
    }
    ok(&serde_json::json!({ "curves": curves.len(), "files": listing }), None, None)
}
