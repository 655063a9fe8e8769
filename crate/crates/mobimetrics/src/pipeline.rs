//! Pipeline stages. Each stage computes its results in memory and writes
//! plot-ready CSV/JSON under the output directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use mobimetrics_core::anomaly::{self, AnomalyReport, DetectParams};
use mobimetrics_core::cohort::{monthly_activity, CohortSchedule};
use mobimetrics_core::econometrics::{
    fit_model, mae, normalize_queries, pearson, rolling_forecast, Correlation, DailySeries, ForecastRecord, ModelSpec,
    RegressionFit,
};
use mobimetrics_core::footfall::{daily_query_volume, FootTrafficBuilder};
use mobimetrics_core::indices::{consumer_index, consumption_trends, employment_index, category_counts, EmploymentIndices, IndexSeries};
use mobimetrics_core::presence::{PresenceBuilder, PresenceMatrix};
use mobimetrics_core::{
    AoiCatalog, AoiId, AoiIndex, AoiKind, Date, MapQueryRecord, MonthId, PoiCatalog, PoiId, PositioningRecord, RejectLog,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{Context, Error, Result};
use crate::io::{self, num, BoxOfficePanel, Loaded};
use crate::VERSION;

/// Records per parallel aggregation shard.
const SHARD: usize = 1 << 16;

pub struct Ingested {
    pub positioning: Loaded<PositioningRecord>,
    pub queries: Loaded<MapQueryRecord>,
    pub pois: PoiCatalog,
    pub aois: AoiCatalog,
    pub index: AoiIndex,
}

pub fn ingest(cfg: &PipelineConfig) -> Result<Ingested> {
    let window = cfg.study_window();
    let (pois, aois) = io::load_catalog(&cfg.pois, &cfg.aois)?;
    let index = AoiIndex::build(&aois, cfg.cell_size).context("aoi index")?;
    Ok(Ingested {
        positioning: io::load_positioning(&cfg.positioning, &window)?,
        queries: io::load_queries(&cfg.queries, &window)?,
        pois,
        aois,
        index,
    })
}

#[derive(Serialize)]
struct FileSummary {
    lines: u64,
    accepted: usize,
    rejected: usize,
}

#[derive(Serialize)]
struct IngestSummary {
    version: &'static str,
    window_start: Date,
    window_end: Date,
    positioning: FileSummary,
    queries: FileSummary,
    pois: usize,
    aois: usize,
}

pub fn write_ingest(cfg: &PipelineConfig, ing: &Ingested, out: &Path) -> Result<()> {
    let pos_name = file_name(&cfg.positioning);
    let q_name = file_name(&cfg.queries);
    let rows = ing
        .positioning
        .rejects
        .entries()
        .iter()
        .map(|r| [pos_name.clone(), r.line.to_string(), r.reason.clone()])
        .chain(ing.queries.rejects.entries().iter().map(|r| [q_name.clone(), r.line.to_string(), r.reason.clone()]));
    io::write_csv(&out.join("rejects.csv"), &["file", "line", "reason"], rows)?;
    io::write_json(
        &out.join("ingest.json"),
        &IngestSummary {
            version: VERSION,
            window_start: cfg.window_start,
            window_end: cfg.window_end,
            positioning: summary(&ing.positioning),
            queries: summary(&ing.queries),
            pois: ing.pois.len(),
            aois: ing.aois.len(),
        },
    )
}

fn summary<T>(l: &Loaded<T>) -> FileSummary {
    FileSummary { lines: l.lines, accepted: l.records.len(), rejected: l.rejects.len() }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Continuous-user cohorts for every report month.
pub fn cohort(cfg: &PipelineConfig, ing: &Ingested) -> Result<CohortSchedule> {
    let window = cfg.study_window();
    let calendar = ing
        .positioning
        .records
        .par_chunks(SHARD)
        .map(monthly_activity)
        .reduce(Default::default, |mut a, b| {
            a.merge(b);
            a
        })
        .with_coverage(window.first_month(), window.last_month());
    CohortSchedule::build(&calendar, cfg.report_first, cfg.report_last).context("cohort")
}

pub fn write_cohort(cohorts: &CohortSchedule, out: &Path) -> Result<()> {
    io::write_csv(&out.join("cohort.csv"), &["month", "users"], cohorts.iter().map(|(m, s)| [m.to_string(), s.len().to_string()]))?;
    io::write_csv(
        &out.join("cohort_members.csv"),
        &["month", "user_id"],
        cohorts.iter().flat_map(|(m, s)| s.iter().map(move |u| [m.to_string(), u.to_string()])),
    )
}

pub struct Presence {
    pub matrix: PresenceMatrix,
    pub employees: BTreeMap<AoiId, BTreeMap<MonthId, u64>>,
    pub consumers: BTreeMap<AoiId, BTreeMap<MonthId, u64>>,
    /// Distinct daily visitors for commercial AOIs over the whole window.
    pub foot_traffic: BTreeMap<AoiId, DailySeries>,
}

pub fn presence(cfg: &PipelineConfig, ing: &Ingested, cohorts: &CohortSchedule) -> Result<Presence> {
    let records = &ing.positioning.records;
    let (first, last) = (cfg.report_first, cfg.report_last);
    let matrix = records
        .par_chunks(SHARD)
        .map(|c| {
            let mut b = PresenceBuilder::new(&ing.index, cohorts, first, last, cfg.work_hours);
            b.extend(c);
            b
        })
        .reduce_with(|mut a, b| {
            a.merge(b);
            a
        })
        .unwrap_or_else(|| PresenceBuilder::new(&ing.index, cohorts, first, last, cfg.work_hours))
        .finish();
    let kinds = [AoiKind::Commercial];
    let foot_traffic = records
        .par_chunks(SHARD)
        .map(|c| {
            let mut b = FootTrafficBuilder::new(&ing.index, &kinds, cfg.window_start, cfg.window_end);
            b.extend(c);
            b
        })
        .reduce_with(|mut a, b| {
            a.merge(b);
            a
        })
        .unwrap_or_else(|| FootTrafficBuilder::new(&ing.index, &kinds, cfg.window_start, cfg.window_end))
        .finish();
    let k = cfg.day_threshold;
    Ok(Presence {
        employees: matrix.employee_counts(first, last, k).context("employees")?,
        consumers: matrix.consumer_counts(first, last, k).context("consumers")?,
        matrix,
        foot_traffic,
    })
}

pub fn write_presence(ing: &Ingested, p: &Presence, out: &Path) -> Result<()> {
    let mut rows = Vec::new();
    for (aoi, months) in &p.employees {
        let kind = ing.aois.get(aoi.as_str()).map(|a| a.kind.label()).unwrap_or_default();
        for (m, n) in months {
            let consumers = p.consumers.get(aoi).and_then(|c| c.get(m)).map(|c| c.to_string()).unwrap_or_default();
            rows.push([aoi.to_string(), kind.to_string(), m.to_string(), n.to_string(), consumers]);
        }
    }
    io::write_csv(&out.join("presence.csv"), &["aoi_id", "kind", "month", "employees", "consumers"], rows)?;
    io::write_csv(
        &out.join("foot_traffic.csv"),
        &["date", "aoi_id", "visitors"],
        p.foot_traffic.iter().flat_map(|(a, s)| s.iter().map(move |(d, v)| [d.to_string(), a.to_string(), num(v)])),
    )
}

pub struct Indices {
    pub employment: EmploymentIndices,
    pub consumer: IndexSeries,
    pub categories: Vec<IndexSeries>,
    /// Query records (1-based positions among accepted records) naming POIs
    /// missing from the catalog.
    pub unresolved: RejectLog,
}

impl Indices {
    pub fn all(&self) -> impl Iterator<Item = &IndexSeries> {
        [&self.employment.all, &self.employment.traditional, &self.employment.high_tech, &self.consumer]
            .into_iter()
            .chain(&self.categories)
    }
}

pub fn indices(cfg: &PipelineConfig, ing: &Ingested, p: &Presence) -> Result<Indices> {
    let employment = employment_index(&p.employees, &ing.aois, cfg.base_year).context("employment index")?;
    let consumer = consumer_index(&p.consumers, &ing.aois, cfg.base_year).context("consumer index")?;
    let window = cfg.study_window();
    let (first, last) = (window.first_month(), window.last_month());
    let mut unresolved = RejectLog::new();
    let mut categories = Vec::new();
    for (i, (path, normalized)) in cfg.all_categories().enumerate() {
        let mut scratch = RejectLog::new();
        let log = if i == 0 { &mut unresolved } else { &mut scratch };
        let label = path.join("/");
        let series = if normalized {
            consumption_trends(&ing.queries.records, &ing.pois, path, first, last, cfg.base_year, log)
        } else {
            category_counts(&ing.queries.records, &ing.pois, path, first, last, log)
                .and_then(|c| IndexSeries::unnormalized(&c, cfg.base_year, &label))
        };
        categories.push(series.context(format!("category {label}"))?);
    }
    Ok(Indices { employment, consumer, categories, unresolved })
}

/// File-name form of a series label.
pub fn slug(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect()
}

pub fn write_indices(ix: &Indices, out: &Path) -> Result<()> {
    for s in ix.all() {
        io::write_csv(
            &out.join(format!("index_{}.csv", slug(&s.label))),
            &["month", "raw", "value", "yoy"],
            s.monthly.iter().map(|(m, raw)| {
                let yoy = s.yoy_for_month(*m).map(num).unwrap_or_default();
                [m.to_string(), num(*raw), num(s.values[m]), yoy]
            }),
        )?;
    }
    io::write_csv(
        &out.join("unresolved_queries.csv"),
        &["record", "reason"],
        ix.unresolved.entries().iter().map(|r| [r.line.to_string(), r.reason.clone()]),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct VenueFit {
    pub aoi_id: String,
    pub poi_id: String,
    pub visitors_queries: Correlation,
    pub models: Vec<RegressionFit>,
    #[serde(skip)]
    pub visitors: DailySeries,
    #[serde(skip)]
    pub queries: DailySeries,
}

impl VenueFit {
    pub fn model(&self, spec: ModelSpec) -> Option<&RegressionFit> {
        self.models.iter().find(|m| m.spec == Some(spec))
    }
}

/// Pairs each commercial AOI with the first POI (by id) located inside it.
pub fn venue_pairs(ing: &Ingested) -> Vec<(AoiId, PoiId)> {
    let mut pairs: BTreeMap<AoiId, PoiId> = BTreeMap::new();
    let mut hits = Vec::new();
    let mut pois: Vec<_> = ing.pois.iter().collect();
    pois.sort_by(|a, b| a.poi_id.cmp(&b.poi_id));
    for poi in pois {
        hits.clear();
        ing.index.assign_into(poi.location, &mut hits);
        for &h in &hits {
            if ing.index.kind(h) == AoiKind::Commercial {
                pairs.entry(ing.index.id(h).clone()).or_insert_with(|| poi.poi_id.clone());
            }
        }
    }
    pairs.into_iter().collect()
}

/// Baseline, query-augmented and query-only fits for every commercial venue.
pub fn fit(cfg: &PipelineConfig, ing: &Ingested, p: &Presence) -> Result<Vec<VenueFit>> {
    let pairs = venue_pairs(ing);
    let poi_ids: Vec<PoiId> = pairs.iter().map(|(_, poi)| poi.clone()).collect();
    let volumes = daily_query_volume(&ing.queries.records, &poi_ids, cfg.fit_first, cfg.fit_last);
    pairs
        .par_iter()
        .map(|(aoi, poi)| {
            let what = format!("fit {aoi}");
            let visitors = p.foot_traffic[aoi].slice(cfg.fit_first, cfg.fit_last).context(what.clone())?;
            let queries = volumes[poi].clone();
            let models = ModelSpec::ALL
                .iter()
                .map(|s| fit_model(&visitors, Some(&queries), *s))
                .collect::<std::result::Result<Vec<_>, _>>()
                .context(what.clone())?;
            Ok(VenueFit {
                aoi_id: aoi.to_string(),
                poi_id: poi.to_string(),
                visitors_queries: pearson(visitors.values(), queries.values()).context(what)?,
                models,
                visitors,
                queries,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    version: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Serialize)]
struct FitReport<'a> {
    fit_first: Date,
    fit_last: Date,
    venues: &'a [VenueFit],
}

pub fn write_fit(cfg: &PipelineConfig, fits: &[VenueFit], out: &Path) -> Result<()> {
    let body = FitReport { fit_first: cfg.fit_first, fit_last: cfg.fit_last, venues: fits };
    io::write_json(&out.join("fit_report.json"), &Versioned { version: VERSION, body: &body })?;
    io::write_csv(
        &out.join("venue_daily.csv"),
        &["date", "aoi_id", "poi_id", "visitors", "queries"],
        fits.iter().flat_map(|f| {
            f.visitors
                .iter()
                .zip(f.queries.values())
                .map(|((d, v), q)| [d.to_string(), f.aoi_id.clone(), f.poi_id.clone(), num(v), num(*q)])
        }),
    )
}

/// Box-office inputs shared by `nowcast` and `detect`.
pub struct BoxOfficeInputs {
    pub panel: BoxOfficePanel,
    pub platform: DailySeries,
}

pub fn load_boxoffice(cfg: &PipelineConfig) -> Result<BoxOfficeInputs> {
    let need = |p: &Option<std::path::PathBuf>, key: &str| p.clone().ok_or_else(|| Error::Config(format!("{key} is required for this stage")));
    let panel = io::load_boxoffice(&need(&cfg.boxoffice, "boxoffice")?)?;
    let platform = io::load_platform(&need(&cfg.platform, "platform")?)?;
    Ok(BoxOfficeInputs { panel, platform })
}

/// Summed revenue and platform-normalized summed queries over `venues`.
pub fn group_inputs(bo: &BoxOfficeInputs, venues: &[String]) -> Result<(DailySeries, DailySeries)> {
    let y = anomaly::group_series(&bo.panel.revenue, venues).context("revenue")?;
    let q = anomaly::group_series(&bo.panel.queries, venues).context("queries")?;
    let platform = bo.platform.slice(q.start(), q.end()).context("platform")?;
    Ok((y, normalize_queries(&q, &platform).context("normalizing queries")?))
}

#[derive(Debug, Clone, Serialize)]
pub struct Nowcast {
    pub start: Date,
    pub mae: BTreeMap<&'static str, f64>,
    /// MAE of the query-augmented model over the baseline MAE.
    pub mae_ratio: f64,
    #[serde(skip)]
    pub forecasts: Vec<(ModelSpec, Vec<ForecastRecord>)>,
}

pub fn nowcast(cfg: &PipelineConfig, bo: &BoxOfficeInputs) -> Result<Nowcast> {
    let start = cfg.forecast_start.ok_or_else(|| Error::Config("forecast_start is required for nowcast".into()))?;
    let venues: Vec<String> = bo.panel.venues().map(String::from).collect();
    let (y, q) = group_inputs(bo, &venues)?;
    let forecasts = ModelSpec::ALL
        .par_iter()
        .map(|s| Ok((*s, rolling_forecast(&y, Some(&q), *s, start).context(format!("nowcast {}", s.label()))?)))
        .collect::<Result<Vec<_>>>()?;
    let mut errors = BTreeMap::new();
    for (s, f) in &forecasts {
        errors.insert(s.label(), mae(f).context("mae")?);
    }
    let mae_ratio = errors["query_augmented"] / errors["baseline"];
    Ok(Nowcast { start, mae: errors, mae_ratio, forecasts })
}

pub fn write_nowcast(n: &Nowcast, out: &Path) -> Result<()> {
    for (s, f) in &n.forecasts {
        io::write_csv(
            &out.join(format!("nowcast_{}.csv", s.label())),
            &["date", "actual", "predicted", "abs_error"],
            f.iter().map(|r| [r.date.to_string(), num(r.actual), num(r.predicted), num(r.abs_error)]),
        )?;
    }
    io::write_json(&out.join("nowcast.json"), &Versioned { version: VERSION, body: n })
}

pub fn venue_groups(cfg: &PipelineConfig) -> Result<(Vec<String>, Vec<String>)> {
    let path = cfg.venue_groups.as_ref().ok_or_else(|| Error::Config("venue_groups is required for detect".into()))?;
    let groups = io::load_venue_groups(path)?;
    let pick = |g: &str| groups.iter().filter(|(_, v)| v.as_str() == g).map(|(k, _)| k.clone()).collect::<Vec<_>>();
    let (s, c) = (pick("suspected"), pick("control"));
    if s.is_empty() || c.is_empty() {
        return Err(Error::format(path, "need at least one suspected and one control venue"));
    }
    Ok((s, c))
}

pub fn detect(cfg: &PipelineConfig, bo: &BoxOfficeInputs) -> Result<AnomalyReport> {
    let (suspected, control) = venue_groups(cfg)?;
    let (Some(train_first), Some(train_last)) = (cfg.train_first, cfg.train_last) else {
        return Err(Error::Config("train_first and train_last are required for detect".into()));
    };
    let params = DetectParams {
        train_first,
        train_last,
        z_threshold: cfg.z_threshold,
        min_run: cfg.min_run,
        control_quiet_share: cfg.control_quiet_share,
    };
    detect_groups(bo, &suspected, &control, &params)
}

pub fn detect_groups(bo: &BoxOfficeInputs, suspected: &[String], control: &[String], params: &DetectParams) -> Result<AnomalyReport> {
    let (sy, sq) = group_inputs(bo, suspected)?;
    let (cy, cq) = group_inputs(bo, control)?;
    anomaly::detect(&sy, &sq, &cy, &cq, params).context("detect")
}

pub fn write_detect(report: &AnomalyReport, out: &Path) -> Result<()> {
    io::write_json(&out.join("anomaly.json"), &Versioned { version: VERSION, body: report })
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    files: BTreeMap<&'a str, &'a str>,
}

/// Writes `manifest.json` listing the SHA-256 of every other file in `out`.
pub fn write_manifest(out: &Path) -> Result<()> {
    let digests = io::digest_tree(out)?;
    let files = digests.iter().filter(|(p, _)| p != "manifest.json").map(|(p, h)| (p.as_str(), h.as_str())).collect();
    io::write_json(&out.join("manifest.json"), &Manifest { version: VERSION, files })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Cohort,
    Presence,
    Index,
    Fit,
    Nowcast,
    Detect,
}

/// Runs `stages` (plus whatever they depend on, unwritten) into `out`.
pub fn run(cfg: &PipelineConfig, stages: &BTreeSet<Stage>, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let wants = |s: Stage| stages.contains(&s);
    if stages.iter().any(|s| *s <= Stage::Fit) {
        let ing = ingest(cfg)?;
        if wants(Stage::Ingest) {
            write_ingest(cfg, &ing, out)?;
        }
        if stages.iter().any(|s| (Stage::Cohort..=Stage::Fit).contains(s)) {
            let cohorts = cohort(cfg, &ing)?;
            if wants(Stage::Cohort) {
                write_cohort(&cohorts, out)?;
            }
            if stages.iter().any(|s| (Stage::Presence..=Stage::Fit).contains(s)) {
                let p = presence(cfg, &ing, &cohorts)?;
                if wants(Stage::Presence) {
                    write_presence(&ing, &p, out)?;
                }
                if wants(Stage::Index) {
                    write_indices(&indices(cfg, &ing, &p)?, out)?;
                }
                if wants(Stage::Fit) {
                    write_fit(cfg, &fit(cfg, &ing, &p)?, out)?;
                }
            }
        }
    }
    if wants(Stage::Nowcast) || wants(Stage::Detect) {
        let bo = load_boxoffice(cfg)?;
        if wants(Stage::Nowcast) {
            write_nowcast(&nowcast(cfg, &bo)?, out)?;
        }
        if wants(Stage::Detect) {
            write_detect(&detect(cfg, &bo)?, out)?;
        }
    }
    write_manifest(out)
}
