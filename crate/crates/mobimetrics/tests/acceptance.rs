//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use mobimetrics::config::PipelineConfig;
use mobimetrics::io;
use mobimetrics::oracle::{oracle_cohort, oracle_ols, oracle_pip};
use mobimetrics::pipeline::{self, BoxOfficeInputs, Ingested, Presence, Stage};
use mobimetrics::synth::{generate_boxoffice, World, WorldConfig};
use mobimetrics_core::anomaly::{window_iou, DetectParams};
use mobimetrics_core::cohort::{continuous_users, monthly_activity};
use mobimetrics_core::econometrics::{ols, pearson, Matrix, ModelSpec};
use mobimetrics_core::indices::{build_index, consumption_trends, yoy_growth, YoyPeriod};
use mobimetrics_core::presence::is_consumer;
use mobimetrics_core::{Aoi, AoiCatalog, AoiIndex, AoiKind, Date, GeoPoint, MonthId, PositioningRecord, RejectLog, StudyWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
    /// False only when the check cannot be met on this machine.
    required: bool,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail, required: true }
    }
}

struct DefaultRun {
    _dir: tempfile::TempDir,
    world: World,
    cfg: PipelineConfig,
    ing: Ingested,
    presence: Presence,
    out: std::path::PathBuf,
}

fn default_run() -> DefaultRun {
    let dir = tempfile::tempdir().unwrap();
    let (world, cfg) = common::materialize(&common::world_config("default.cfg"), &dir.path().join("data"));
    let ing = pipeline::ingest(&cfg).unwrap();
    let cohorts = pipeline::cohort(&cfg, &ing).unwrap();
    let presence = pipeline::presence(&cfg, &ing, &cohorts).unwrap();
    let out = dir.path().join("out");
    DefaultRun { _dir: dir, world, cfg, ing, presence, out }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn c1_ols_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t0 = Instant::now();
    let (mut worst_b, mut worst_r2, mut skipped) = (0.0f64, 0.0f64, 0);
    for _ in 0..200 {
        let n = rng.random_range(10..300);
        let k = rng.random_range(1..7);
        let beta: Vec<f64> = (0..=k).map(|_| rng.random_range(-5.0..5.0)).collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| std::iter::once(1.0).chain((0..k).map(|_| rng.random_range(-10.0..10.0))).collect())
            .collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>() + rng.random_range(-3.0..3.0))
            .collect();
        let (Ok(fit), Some(want)) = (ols(&y, &Matrix::from_rows(&rows).unwrap()), oracle_ols(&y, &rows)) else {
            skipped += 1;
            continue;
        };
        let norm = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in fit.coefficients.iter().zip(&want) {
            worst_b = worst_b.max((a - b).abs() / norm);
        }
        let mean = y.iter().sum::<f64>() / n as f64;
        let ssr: f64 = rows.iter().zip(&y).map(|(r, y)| (y - r.iter().zip(&want).map(|(x, b)| x * b).sum::<f64>()).powi(2)).sum();
        let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
        worst_r2 = worst_r2.max((fit.r_squared - (1.0 - ssr / sst)).abs());
    }
    let elapsed = t0.elapsed();
    Outcome::new(
        worst_b <= 1e-9 && worst_r2 <= 1e-12 && elapsed < Duration::from_secs(5) && skipped == 0,
        format!("max coef rel diff {worst_b:.2e}, max R2 diff {worst_r2:.2e}, {skipped} singular, {elapsed:.2?}"),
    )
}

fn c2_table_direction(run: &DefaultRun) -> Outcome {
    let fits = pipeline::fit(&run.cfg, &run.ing, &run.presence).unwrap();
    let gamma = run.world.config.visitors_per_query;
    let mut ok = !fits.is_empty();
    let mut detail = String::new();
    let (mut worst, mut min_gain) = (0.0f64, f64::INFINITY);
    for f in &fits {
        let base = f.model(ModelSpec::Baseline).unwrap();
        let aug = f.model(ModelSpec::QueryAugmented).unwrap();
        let q = aug.coefficients[aug.columns.iter().position(|c| c == "q").unwrap()];
        worst = worst.max(rel(q, gamma));
        min_gain = min_gain.min(aug.r_squared - base.r_squared);
        ok &= aug.r_squared > base.r_squared && base.n_observations == aug.n_observations && rel(q, gamma) <= 0.05;
    }
    let noise_share = run.world.config.visit_noise_sd;
    ok &= noise_share <= 0.10;
    write!(detail, "{} venues, min R2 gain {min_gain:.3}, worst |q coef - {gamma}| {:.2}%, noise sd {:.0}% of signal", fits.len(), worst * 100.0, noise_share * 100.0).unwrap();
    Outcome::new(ok, detail)
}

fn c3_nowcast(run: &DefaultRun) -> Outcome {
    let t0 = Instant::now();
    let bo = pipeline::load_boxoffice(&run.cfg).unwrap();
    let n = pipeline::nowcast(&run.cfg, &bo).unwrap();
    let elapsed = t0.elapsed();
    Outcome::new(
        n.mae_ratio <= 0.5 && elapsed < Duration::from_secs(30),
        format!(
            "MAE baseline {:.0}, query model {:.0}, ratio {:.3}, {elapsed:.2?}",
            n.mae["baseline"], n.mae["query_augmented"], n.mae_ratio
        ),
    )
}

fn boxoffice_inputs(cfg: &WorldConfig) -> (BoxOfficeInputs, Vec<String>, Vec<String>) {
    let venues: Vec<String> = (0..cfg.n_venues).map(|v| format!("cinema_{v:02}")).collect();
    let bo = generate_boxoffice(cfg, &venues);
    let inputs = BoxOfficeInputs { panel: bo.panel(), platform: bo.platform_series() };
    (inputs, bo.suspected, bo.control)
}

fn c4_fraud() -> Outcome {
    let base = common::world_config("default.cfg");
    let truth = (base.fraud_start, base.fraud_end);
    let params = DetectParams::new(Date::from_ymd(2015, 1, 1).unwrap(), Date::from_ymd(2015, 6, 30).unwrap());
    let results: Vec<(f64, usize)> = (1..=20u64)
        .into_par_iter()
        .map(|seed| {
            let planted = WorldConfig { seed, ..base.clone() };
            let (bo, s, c) = boxoffice_inputs(&planted);
            let hit = pipeline::detect_groups(&bo, &s, &c, &params).unwrap();
            let best = hit.flagged_windows.iter().map(|w| window_iou(*w, truth)).fold(0.0, f64::max);
            let clean = WorldConfig { seed: seed + 1000, fraud_sigma: 0.0, ..base.clone() };
            let (bo, s, c) = boxoffice_inputs(&clean);
            let spurious = pipeline::detect_groups(&bo, &s, &c, &params).unwrap().flagged_windows.len();
            (best, spurious)
        })
        .collect();
    let hits = results.iter().filter(|r| r.0 >= 0.8).count();
    let spurious: usize = results.iter().map(|r| r.1).sum();
    let min_iou = results.iter().map(|r| r.0).fold(1.0, f64::min);
    Outcome::new(hits >= 18 && spurious <= 1, format!("{hits}/20 windows with IoU >= 0.8 (min {min_iou:.2}), {spurious} spurious on 20 clean seeds"))
}

fn c5_cohort() -> Outcome {
    let first = MonthId::new(2014, 1).unwrap();
    let last = MonthId::new(2015, 12).unwrap();
    let window = StudyWindow::from_dates(first.first_day(), last.last_day());
    let mut mismatches = 0;
    let mut checked = 0;
    for w in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + w);
        let mut records = Vec::new();
        let n_users = rng.random_range(20..120);
        let p_active: f64 = rng.random_range(0.85..1.0);
        for u in 0..n_users {
            for m in first.through(last) {
                if rng.random_bool(p_active) {
                    for _ in 0..rng.random_range(1..4) {
                        let t = m.first_day().local_midnight() + rng.random_range(0..(m.first_day().days_until(m.last_day()) as i64 + 1) * 86_400);
                        records.push(PositioningRecord::new(&format!("u{u}"), 121.0, 31.0, t, &window).unwrap());
                    }
                }
            }
        }
        let calendar = monthly_activity(&records).with_coverage(first, last);
        for report in MonthId::new(2015, 1).unwrap().through(last) {
            let got: BTreeSet<String> = continuous_users(&calendar, report).unwrap().iter().map(|u| u.to_string()).collect();
            checked += 1;
            if got != oracle_cohort(&records, report) {
                mismatches += 1;
            }
        }
    }
    let report = MonthId::new(2015, 6).unwrap();
    let mut holes_ok = true;
    for gap in 0..13 {
        let hole = report.add_months(gap - 12);
        let recs: Vec<PositioningRecord> = (0..13)
            .map(|i| report.add_months(i - 12))
            .filter(|m| *m != hole)
            .map(|m| PositioningRecord::new("h", 121.0, 31.0, m.first_day().local_midnight() + 3600, &window).unwrap())
            .collect();
        holes_ok &= !continuous_users(&monthly_activity(&recs).with_coverage(first, last), report).unwrap().contains("h");
    }
    Outcome::new(
        mismatches == 0 && holes_ok,
        format!("{checked} report months over 50 worlds, {mismatches} mismatches; single-month holes excluded: {holes_ok}"),
    )
}

fn c6_indices() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let m0 = MonthId::new(2013, 1).unwrap();
    let months: Vec<MonthId> = (0..48).map(|i| m0.add_months(i)).collect();
    let (mut worst_mean, mut worst_scale) = (0.0f64, 0.0f64);
    let mut repeat_ok = true;
    for _ in 0..50 {
        let counts: BTreeMap<MonthId, f64> = months.iter().map(|m| (*m, rng.random_range(1.0..1e6))).collect();
        let s = build_index(&counts, 2014, "x").unwrap();
        let mean = (1..=12).map(|m| s.values[&MonthId::new(2014, m).unwrap()]).sum::<f64>() / 12.0;
        worst_mean = worst_mean.max(rel(mean, 100.0));
        for c in [0.5, 2.0, 10.0] {
            let scaled: BTreeMap<MonthId, f64> = counts.iter().map(|(k, v)| (*k, v * c)).collect();
            let t = build_index(&scaled, 2014, "x").unwrap();
            for k in &months {
                worst_scale = worst_scale.max(rel(t.values[k], s.values[k]));
            }
        }
        let year: Vec<f64> = (0..12).map(|_| rng.random_range(1.0..1e4)).collect();
        let rep: BTreeMap<MonthId, f64> = months.iter().enumerate().map(|(i, m)| (*m, year[i % 12])).collect();
        let r = build_index(&rep, 2014, "r").unwrap();
        repeat_ok &= r.yoy.values().all(|g| *g == 0.0) && !r.yoy.is_empty();
    }
    // (Jan, Feb) of the prior year, then of the current year, and the merged growth in percent.
    let fixtures = [((100.0, 50.0), (90.0, 90.0), 20.0), ((200.0, 100.0), (120.0, 150.0), -10.0), ((80.0, 120.0), (130.0, 70.0), 0.0)];
    let mut fixtures_ok = true;
    for ((j0, f0), (j1, f1), want) in fixtures {
        let mut counts: BTreeMap<MonthId, f64> = months.iter().map(|m| (*m, 100.0)).collect();
        counts.insert(MonthId::new(2014, 1).unwrap(), j0);
        counts.insert(MonthId::new(2014, 2).unwrap(), f0);
        counts.insert(MonthId::new(2015, 1).unwrap(), j1);
        counts.insert(MonthId::new(2015, 2).unwrap(), f1);
        let s = build_index(&counts, 2014, "f").unwrap();
        let got = yoy_growth(&s, YoyPeriod::JanFeb(2015)).unwrap();
        fixtures_ok &= (got - want).abs() <= 1e-9 && s.yoy_for_month(MonthId::new(2015, 2).unwrap()) == Some(got);
    }
    Outcome::new(
        worst_mean <= 1e-9 && worst_scale <= 1e-9 && repeat_ok && fixtures_ok,
        format!("base mean rel err {worst_mean:.1e}, scale rel err {worst_scale:.1e}, repeated-year zero: {repeat_ok}, Jan+Feb fixtures: {fixtures_ok}"),
    )
}

fn random_aois(rng: &mut ChaCha8Rng, n: usize, span: (f64, f64), radius: (f64, f64)) -> AoiCatalog {
    let aois = (0..n)
        .map(|i| {
            let (cx, cy) = (121.0 + rng.random_range(0.0..span.0), 31.0 + rng.random_range(0.0..span.1));
            let r = rng.random_range(radius.0..radius.1);
            let k = rng.random_range(3..10usize);
            let step = std::f64::consts::TAU / k as f64;
            let verts = (0..k)
                .map(|j| {
                    let a = step * (j as f64 + rng.random_range(-0.3..0.3));
                    let rr = r * rng.random_range(0.3..1.0);
                    GeoPoint::raw(cx + rr * a.cos(), cy + rr * a.sin())
                })
                .collect();
            Aoi::new(&format!("a{i:05}"), "x", AoiKind::Commercial, verts).unwrap()
        })
        .collect();
    AoiCatalog::new(aois).unwrap()
}

fn c7_spatial() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let catalog = random_aois(&mut rng, 500, (0.5, 0.5), (0.005, 0.04));
    let index = AoiIndex::build(&catalog, 0.01).unwrap();
    let (mut agree, mut buffered, mut total) = (0, 0, 0);
    for _ in 0..10_000 {
        let p = GeoPoint::raw(121.0 + rng.random_range(-0.05..0.55), 31.0 + rng.random_range(-0.05..0.55));
        if catalog.iter().any(|a| a.polygon.distance_to_boundary(p) <= 1e-9) {
            buffered += 1;
            continue;
        }
        total += 1;
        let got: BTreeSet<&str> = index.assign(p).into_iter().map(|id| id.as_str()).collect();
        let want: BTreeSet<&str> = catalog.iter().filter(|a| oracle_pip(a.polygon.vertices(), p)).map(|a| a.aoi_id.as_str()).collect();
        if got == want {
            agree += 1;
        }
    }
    let square = vec![GeoPoint::raw(121.0, 31.0), GeoPoint::raw(121.01, 31.0), GeoPoint::raw(121.01, 31.01), GeoPoint::raw(121.0, 31.01)];
    let fixture = AoiCatalog::new(vec![Aoi::new("sq", "square", AoiKind::Commercial, square).unwrap()]).unwrap();
    let fx = AoiIndex::build(&fixture, 0.01).unwrap();
    let edge_mid = GeoPoint::raw(121.005, 31.0);
    let boundary_ok = fx.assign(edge_mid).len() == 1 && fixture.iter().next().unwrap().polygon.contains(edge_mid);
    Outcome::new(
        agree == total && boundary_ok,
        format!("{agree}/{total} probes agree ({buffered} inside the edge buffer), edge midpoint inside: {boundary_ok}"),
    )
}

fn c8_presence(run: &DefaultRun) -> Outcome {
    let t = &run.world.truth;
    let (mut worst_e, mut worst_c) = (0.0f64, 0.0f64);
    let mut zero_mismatch = 0;
    for (aoi, months) in &run.presence.employees {
        let Some(planted) = t.employees.get(aoi.as_str()) else { continue };
        for (m, got) in months {
            let want = planted[m];
            if want == 0 {
                zero_mismatch += (*got != 0) as usize;
            } else {
                worst_e = worst_e.max(rel(*got as f64, want as f64));
            }
        }
    }
    for (aoi, months) in &run.presence.consumers {
        for (m, got) in months {
            worst_c = worst_c.max(rel(*got as f64, t.consumers[aoi.as_str()][m] as f64));
        }
    }
    let k = run.cfg.day_threshold;
    let mut staff_as_consumer = 0;
    for (mall, staff) in &t.mall_staff {
        for m in run.cfg.report_first.through(run.cfg.report_last) {
            for s in staff {
                if run.presence.matrix.get(s, mall, m).is_some_and(|st| is_consumer(st, k)) {
                    staff_as_consumer += 1;
                }
            }
        }
    }
    Outcome::new(
        worst_e <= 0.05 && worst_c <= 0.05 && zero_mismatch == 0 && staff_as_consumer == 0,
        format!("worst employee error {:.2}%, worst consumer error {:.2}%, staff counted as consumers: {staff_as_consumer}", worst_e * 100.0, worst_c * 100.0),
    )
}

fn c9_pearson(run: &DefaultRun) -> Outcome {
    let path = ["Automobile", "Car Dealer"];
    let w = run.cfg.study_window();
    let mut rejects = RejectLog::new();
    let s = consumption_trends(&run.ing.queries.records, &run.ing.pois, &path, w.first_month(), w.last_month(), run.cfg.base_year, &mut rejects).unwrap();
    let planted = &run.world.truth.categories["Automobile/Car Dealer"];
    let (a, b): (Vec<f64>, Vec<f64>) = s.values.iter().map(|(m, v)| (*v, planted[m])).unzip();
    let c = pearson(&a, &b).unwrap();
    Outcome::new(c.r >= 0.9 && c.p_value < 0.001, format!("r = {:.3}, p = {:.1e}, n = {}", c.r, c.p_value, c.n))
}

/// Assigns `n` generated records in shards of `shard`; returns per-AOI hit
/// counts serialized as text.
fn assign_stream(index: &AoiIndex, n: usize, shard: usize) -> Vec<u8> {
    let window = StudyWindow::from_dates(Date::from_ymd(2015, 1, 1).unwrap(), Date::from_ymd(2015, 12, 31).unwrap());
    let counts = (0..n.div_ceil(shard))
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(10);
            rng.set_stream(s as u64);
            let mut counts = vec![0u64; index.len()];
            let mut hits = Vec::new();
            let mut user = String::new();
            for i in 0..shard.min(n - s * shard) {
                user.clear();
                write!(user, "u{}", (s * shard + i) % 100_000).unwrap();
                let r = PositioningRecord::new(&user, 121.0 + rng.random_range(0.0..3.0), 31.0 + rng.random_range(0.0..2.0), window.start + rng.random_range(0..31_000_000), &window).unwrap();
                hits.clear();
                index.assign_into(r.point, &mut hits);
                for h in &hits {
                    counts[*h as usize] += 1;
                }
            }
            counts
        })
        .reduce(|| vec![0u64; index.len()], |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        });
    let mut out = Vec::new();
    for (i, c) in counts.iter().enumerate() {
        writeln!(&mut out as &mut dyn std::io::Write, "{},{c}", index.id(i as u32)).unwrap();
    }
    out
}

fn c10_performance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let catalog = random_aois(&mut rng, 6000, (3.0, 2.0), (0.002, 0.01));
    let index = AoiIndex::build(&catalog, 0.01).unwrap();
    let n = 10_000_000;
    let time = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let t0 = Instant::now();
        let out = pool.install(|| assign_stream(&index, n, 250_000));
        (t0.elapsed(), out)
    };
    let (t1, out1) = time(1);
    let (t8, out8) = time(8);
    let speedup = t1.as_secs_f64() / t8.as_secs_f64();
    let identical = out1 == out8;
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let base_ok = t1 < Duration::from_secs(60) && identical;
    Outcome {
        pass: base_ok && speedup >= 3.0,
        detail: format!(
            "1 thread {t1:.2?}, 8 threads {t8:.2?}, speedup {speedup:.2}x (needs 3x), identical outputs: {identical}, {cores} core(s) available"
        ),
        required: !base_ok || cores >= 8,
    }
}

fn c11_determinism(run: &DefaultRun) -> Outcome {
    let stages: BTreeSet<Stage> = [Stage::Ingest, Stage::Cohort, Stage::Presence, Stage::Index, Stage::Fit, Stage::Nowcast, Stage::Detect].into();
    pipeline::run(&run.cfg, &stages, &run.out).unwrap();
    let data_dir = run.cfg.positioning.parent().unwrap().to_path_buf();
    let first = digests(&data_dir, &run.out);

    let dir = tempfile::tempdir().unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let second = pool.install(|| {
        let (_, cfg) = common::materialize(&common::world_config("default.cfg"), &dir.path().join("data"));
        let out = dir.path().join("out");
        pipeline::run(&cfg, &stages, &out).unwrap();
        digests(&dir.path().join("data"), &out)
    });
    let same = first == second;
    let golden_path = common::worlds_dir().join("default.sha256");
    let golden = match std::fs::read_to_string(&golden_path) {
        Ok(text) => {
            let want: Vec<(String, String)> = text.lines().filter_map(|l| l.split_once("  ").map(|(h, p)| (p.to_string(), h.to_string()))).collect();
            Some(want == first)
        }
        Err(_) => None,
    };
    if std::env::var_os("MOBIMETRICS_WRITE_GOLDEN").is_some() && same {
        let text: String = first.iter().map(|(p, h)| format!("{h}  {p}\n")).collect();
        std::fs::write(&golden_path, text).unwrap();
    }
    Outcome::new(
        same && golden != Some(false),
        format!("{} files identical across two runs: {same}; golden checksums: {}", first.len(), match golden {
            Some(true) => "match",
            Some(false) => "MISMATCH",
            None => "absent",
        }),
    )
}

fn digests(data: &Path, out: &Path) -> Vec<(String, String)> {
    let mut all: Vec<(String, String)> = io::digest_tree(data).unwrap().into_iter().map(|(p, h)| (format!("data/{p}"), h)).collect();
    all.extend(io::digest_tree(out).unwrap().into_iter().map(|(p, h)| (format!("out/{p}"), h)));
    all
}

fn main() {
    let run = default_run();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("OLS oracle equivalence", Box::new(c1_ols_oracle)),
        ("query-augmented fit beats baseline", Box::new(|| c2_table_direction(&run))),
        ("nowcasting gain", Box::new(|| c3_nowcast(&run))),
        ("fraud detection", Box::new(c4_fraud)),
        ("cohort exactness", Box::new(c5_cohort)),
        ("index invariants", Box::new(c6_indices)),
        ("spatial correctness", Box::new(c7_spatial)),
        ("presence classification", Box::new(|| c8_presence(&run))),
        ("consumption trend correlation", Box::new(|| c9_pearson(&run))),
        ("assignment throughput and scaling", Box::new(c10_performance)),
        ("determinism", Box::new(|| c11_determinism(&run))),
    ];
    let mut failed_required = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!("criterion {:>2} {}: {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass && o.required {
            failed_required.push(i + 1);
        }
    }
    if !failed_required.is_empty() {
        eprintln!("failed criteria: {failed_required:?}");
        std::process::exit(1);
    }
}
