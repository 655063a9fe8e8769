//! Event generation for users, industrial parks, malls and POI categories,
//! plus writing the dataset and truth files.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use mobimetrics_core::{AoiKind, Date, GeoPoint, MapQueryRecord, MonthId, PositioningRecord, StudyWindow};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use super::boxoffice::{generate_boxoffice, BoxOffice};
use super::config::WorldConfig;
use super::corrupt::{self, Corruption, CorruptionKind};
use super::layout::{Category, Layout};
use super::{poisson, stream, Domain};
use crate::error::{Error, Result};
use crate::io::{self, num};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosEvent {
    pub t: i64,
    pub user: u32,
    pub point: GeoPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryEvent {
    pub t: i64,
    pub user: u32,
    pub poi: u32,
    pub with_keyword: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MallDay {
    pub date: Date,
    pub mall: usize,
    pub expected_queries: f64,
    pub queries: u32,
    pub visitors: u32,
    pub staff: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParkTruth {
    pub aoi_id: String,
    pub kind: AoiKind,
    pub level: f64,
    pub trend: f64,
    pub pool_first_user: String,
    pub pool_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FraudTruth {
    pub start: Date,
    pub end: Date,
    pub sigma: f64,
    pub in_control: bool,
    pub suspected: Vec<String>,
    pub control: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub first_day: Date,
    pub last_day: Date,
    pub visitors_per_query: f64,
    pub weekend_uplift: f64,
    pub parks: Vec<ParkTruth>,
    /// Roster members present in each park-month; all are cohort members
    /// once the month has twelve predecessors in the window.
    pub employees: BTreeMap<String, BTreeMap<MonthId, u64>>,
    pub mall_staff: BTreeMap<String, Vec<String>>,
    /// Distinct visitors per mall-month.
    pub visitors: BTreeMap<String, BTreeMap<MonthId, u64>>,
    /// Distinct visitors who are cohort members, for report months only.
    pub consumers: BTreeMap<String, BTreeMap<MonthId, u64>>,
    /// Users with a month of no records.
    pub churn: BTreeMap<String, MonthId>,
    /// Expected monthly query events per category.
    pub categories: BTreeMap<String, BTreeMap<MonthId, f64>>,
    pub fraud: FraudTruth,
    #[serde(skip)]
    pub mall_days: Vec<MallDay>,
    #[serde(skip)]
    pub corruptions: Vec<Corruption>,
}

#[derive(Debug, Clone)]
pub struct World {
    pub config: WorldConfig,
    pub layout: Layout,
    pub positioning: Vec<PosEvent>,
    pub queries: Vec<QueryEvent>,
    pub boxoffice: BoxOffice,
    pub truth: GroundTruth,
}

pub fn user_id(u: u32) -> String {
    format!("u{u:06}")
}

/// Whether a user with gap month `churn` is in the cohort of month index `m`.
pub fn in_cohort(churn: Option<usize>, m: usize) -> bool {
    m >= 12 && churn.is_none_or(|c| c + 12 < m || c > m)
}

struct Plan<'a> {
    cfg: &'a WorldConfig,
    layout: &'a Layout,
    months: Vec<MonthId>,
    pool: usize,
    mall_staff_base: usize,
    general_base: usize,
    churn: Vec<Option<usize>>,
    homes: Vec<GeoPoint>,
}

fn time_in(day: Date, from_hour: i64, to_hour: i64, rng: &mut ChaCha8Rng) -> i64 {
    day.local_midnight() + rng.random_range(from_hour * 3600..to_hour * 3600)
}

fn random_day(m: MonthId, rng: &mut ChaCha8Rng) -> Date {
    m.first_day().add_days(rng.random_range(0..m.days() as i32))
}

impl Plan<'_> {
    fn month_index(&self, d: Date) -> usize {
        self.months[0].months_until(d.month_id()) as usize
    }

    fn background(&self, u: usize) -> Vec<PosEvent> {
        let mut rng = stream(self.cfg.seed, Domain::User, u as u64, 1);
        let mut out = Vec::new();
        for (i, m) in self.months.iter().enumerate() {
            if self.churn[u] == Some(i) {
                continue;
            }
            let n = 1 + poisson(&mut rng, self.cfg.background_points) as usize;
            for _ in 0..n {
                let day = random_day(*m, &mut rng);
                let t = time_in(day, 0, 24, &mut rng);
                out.push(PosEvent { t, user: u as u32, point: Layout::near_home(self.homes[u], &mut rng) });
            }
        }
        out
    }

    /// Present roster size per month for park `p`.
    fn roster_sizes(&self, p: usize) -> (f64, f64, Vec<usize>) {
        let cfg = self.cfg;
        let mut rng = stream(cfg.seed, Domain::Park, p as u64, 0);
        let level = rng.random_range(cfg.employment_level_min..=cfg.employment_level_max);
        let trad = p < cfg.n_traditional;
        let trend = if trad { cfg.traditional_trend } else { cfg.high_tech_trend };
        let id = self.layout.aois[p].aoi_id.as_str();
        let sizes = (0..self.months.len())
            .map(|i| {
                let shock: f64 = cfg
                    .shocks
                    .iter()
                    .filter(|s| s.aoi_id == id && self.months[i] >= s.month)
                    .map(|s| 1.0 + s.magnitude)
                    .product();
                ((level * (1.0 + trend).powi(i as i32) * shock).round() as usize).min(self.pool)
            })
            .collect();
        (level, trend, sizes)
    }

    /// Work-hour weekday points for one park member; returns the months the
    /// member was present.
    fn member(&self, p: usize, j: usize, sizes: &[usize], out: &mut Vec<PosEvent>) -> Vec<usize> {
        let cfg = self.cfg;
        let user = (p * self.pool + j) as u32;
        let mut present = Vec::new();
        for (i, m) in self.months.iter().enumerate() {
            if j >= sizes[i] {
                continue;
            }
            let mut rng = stream(cfg.seed, Domain::Member, (p * 4096 + j) as u64, i as u64);
            if m.month() == 2 && !rng.random_bool(cfg.festival_attendance) {
                continue;
            }
            present.push(i);
            let weekdays: Vec<Date> = (0..m.days() as i32).map(|d| m.first_day().add_days(d)).filter(|d| d.is_weekday()).collect();
            let mut on: Vec<bool> = weekdays.iter().map(|_| rng.random_bool(cfg.attendance)).collect();
            let need = cfg.staff_min_days.min(weekdays.len());
            while on.iter().filter(|x| **x).count() < need {
                let k = rng.random_range(0..on.len());
                on[k] = true;
            }
            for (d, _) in weekdays.iter().zip(&on).filter(|(_, o)| **o) {
                let t = time_in(*d, 9, 17, &mut rng);
                out.push(PosEvent { t, user, point: self.layout.inside(p, &mut rng) });
            }
        }
        present
    }

    fn eligible_visitor(&self, u: usize, month_idx: usize) -> bool {
        !(self.mall_staff_base..self.general_base).contains(&u) && self.churn[u] != Some(month_idx)
    }

    fn mall(&self, m: usize) -> (Vec<PosEvent>, Vec<QueryEvent>, Vec<MallDay>, BTreeMap<usize, BTreeSet<u32>>) {
        let cfg = self.cfg;
        let aoi = cfg.n_parks() + m;
        let poi = self.layout.mall_pois[m] as u32;
        let mut rng = stream(cfg.seed, Domain::Mall, m as u64, 0);
        let shock = Normal::new(0.0, cfg.demand_sd).unwrap();
        let vnoise = Normal::new(0.0, cfg.visit_noise_sd * cfg.visitors_per_query * cfg.mall_base_queries).unwrap();
        let staff: Vec<u32> = (0..cfg.mall_staff).map(|s| (self.mall_staff_base + m * cfg.mall_staff + s) as u32).collect();
        let (mut pos, mut qs, mut days) = (Vec::new(), Vec::new(), Vec::new());
        let mut monthly: BTreeMap<usize, BTreeSet<u32>> = BTreeMap::new();
        let mut x = 0.0;
        let n_days = cfg.first_day().days_until(cfg.last_day()) + 1;
        for d in 0..n_days {
            let day = cfg.first_day().add_days(d);
            let mi = self.month_index(day);
            x = cfg.demand_ar * x + shock.sample(&mut rng);
            let weekly = if day.is_weekday() { 1.0 } else { cfg.weekend_uplift };
            let seasonal = match day.month_id().month() {
                7 | 8 => cfg.summer_bump,
                2 => cfg.festival_dip,
                _ => 1.0,
            };
            let mu = cfg.mall_base_queries * weekly * seasonal * x.exp();
            let q = poisson(&mut rng, mu) as u32;
            let v = (cfg.visitors_per_query * q as f64 + vnoise.sample(&mut rng)).round().max(0.0) as u32;

            let mut picked: Vec<u32> = Vec::with_capacity(v as usize);
            while picked.len() < v as usize {
                let u = rng.random_range(0..cfg.n_users);
                if self.eligible_visitor(u, mi) && !picked.contains(&(u as u32)) {
                    picked.push(u as u32);
                }
            }
            for &u in &picked {
                let t = time_in(day, 10, 22, &mut rng);
                pos.push(PosEvent { t, user: u, point: self.layout.inside(aoi, &mut rng) });
            }
            monthly.entry(mi).or_default().extend(&picked);
            for &s in &staff {
                let t = time_in(day, 10, 18, &mut rng);
                pos.push(PosEvent { t, user: s, point: self.layout.inside(aoi, &mut rng) });
            }

            let mut askers: Vec<u32> = Vec::with_capacity(q as usize);
            while askers.len() < q as usize {
                let u = rng.random_range(0..cfg.n_users) as u32;
                if !askers.contains(&u) {
                    askers.push(u);
                }
            }
            for &u in &askers {
                let t = time_in(day, 8, 22, &mut rng);
                let with_keyword = rng.random_bool(0.5);
                qs.push(QueryEvent { t, user: u, poi, with_keyword });
                if rng.random_bool(cfg.duplicate_query_rate) {
                    qs.push(QueryEvent { t: t + rng.random_range(1..600), user: u, poi, with_keyword });
                }
            }
            days.push(MallDay { date: day, mall: m, expected_queries: mu, queries: q, visitors: v, staff: staff.len() as u32 });
        }
        (pos, qs, days, monthly)
    }

    fn category_curve(&self, c: usize) -> Vec<f64> {
        let cfg = self.cfg;
        let cat = Category::ALL[c];
        let base = cat.monthly(cfg);
        let mut rng = stream(cfg.seed, Domain::Category, c as u64, 0);
        let walk = Normal::new(0.0, 0.1).unwrap();
        let mut w: f64 = 0.0;
        self.months
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let phase = std::f64::consts::TAU * (m.month() as f64 - 12.0) / 12.0;
                let i = i as f64;
                match cat {
                    Category::Auto => base * (1.0 + 0.012 * i) * (1.0 + 0.12 * phase.cos()),
                    Category::Restaurant => base * (1.0 - 0.008 * i) * (1.0 + 0.05 * phase.cos()),
                    Category::Finance => {
                        w += walk.sample(&mut rng);
                        base * w.exp()
                    }
                    Category::Tourism => {
                        let peak = match m.month() {
                            5 | 10 => 0.6,
                            7 | 8 => 0.3,
                            _ => 0.0,
                        };
                        base * (1.0 + peak)
                    }
                }
            })
            .collect()
    }

    fn category_events(&self, c: usize, curve: &[f64]) -> Vec<QueryEvent> {
        let cfg = self.cfg;
        let pois = &self.layout.category_pois[c];
        let mut out = Vec::new();
        for (i, m) in self.months.iter().enumerate() {
            let mut rng = stream(cfg.seed, Domain::Category, c as u64, 1 + i as u64);
            let n = poisson(&mut rng, curve[i]) as usize;
            for _ in 0..n {
                let user = rng.random_range(0..cfg.n_users) as u32;
                let poi = pois[rng.random_range(0..pois.len())] as u32;
                let t = time_in(random_day(*m, &mut rng), 8, 23, &mut rng);
                let with_keyword = rng.random_bool(0.5);
                out.push(QueryEvent { t, user, poi, with_keyword });
                if rng.random_bool(cfg.duplicate_query_rate) {
                    out.push(QueryEvent { t: t + rng.random_range(1..600), user, poi, with_keyword });
                }
            }
        }
        out
    }
}

pub fn generate(cfg: &WorldConfig) -> Result<World> {
    cfg.validate()?;
    let mut lrng = stream(cfg.seed, Domain::Layout, 0, 0);
    let layout = Layout::generate(cfg, &mut lrng);
    let months: Vec<MonthId> = cfg.start_month.through(cfg.last_month()).collect();
    let pool = cfg.pool_size();
    if pool > 4096 {
        return Err(Error::Config("employment levels too large for the park pool".into()));
    }
    let mall_staff_base = cfg.n_parks() * pool;
    let general_base = mall_staff_base + cfg.n_commercial * cfg.mall_staff;

    let profiles: Vec<(GeoPoint, Option<usize>)> = (0..cfg.n_users)
        .into_par_iter()
        .map(|u| {
            let mut rng = stream(cfg.seed, Domain::User, u as u64, 0);
            let home = layout.home(&mut rng);
            let churn = (u >= general_base && rng.random_bool(cfg.churn_rate)).then(|| rng.random_range(0..months.len()));
            (home, churn)
        })
        .collect();
    let plan = Plan {
        cfg,
        layout: &layout,
        months: months.clone(),
        pool,
        mall_staff_base,
        general_base,
        homes: profiles.iter().map(|p| p.0).collect(),
        churn: profiles.iter().map(|p| p.1).collect(),
    };

    let mut positioning: Vec<PosEvent> = (0..cfg.n_users).into_par_iter().flat_map_iter(|u| plan.background(u)).collect();

    let mut parks = Vec::new();
    let mut employees = BTreeMap::new();
    for p in 0..cfg.n_parks() {
        let (level, trend, sizes) = plan.roster_sizes(p);
        let members: Vec<(Vec<PosEvent>, Vec<usize>)> = (0..pool)
            .into_par_iter()
            .map(|j| {
                let mut ev = Vec::new();
                let present = plan.member(p, j, &sizes, &mut ev);
                (ev, present)
            })
            .collect();
        let mut counts: BTreeMap<MonthId, u64> = months.iter().map(|m| (*m, 0)).collect();
        for (ev, present) in members {
            positioning.extend(ev);
            for i in present {
                *counts.get_mut(&months[i]).unwrap() += 1;
            }
        }
        let aoi = &layout.aois[p];
        employees.insert(aoi.aoi_id.to_string(), counts);
        parks.push(ParkTruth {
            aoi_id: aoi.aoi_id.to_string(),
            kind: aoi.kind,
            level,
            trend,
            pool_first_user: user_id((p * pool) as u32),
            pool_size: pool,
        });
    }

    let malls: Vec<_> = (0..cfg.n_commercial).into_par_iter().map(|m| plan.mall(m)).collect();
    let mut queries = Vec::new();
    let mut mall_days = Vec::new();
    let mut visitors = BTreeMap::new();
    let mut consumers = BTreeMap::new();
    let mut mall_staff = BTreeMap::new();
    for (m, (pos, qs, days, monthly)) in malls.into_iter().enumerate() {
        positioning.extend(pos);
        queries.extend(qs);
        mall_days.extend(days);
        let id = Layout::mall_id(m);
        let mut all = BTreeMap::new();
        let mut cohort = BTreeMap::new();
        for (i, users) in monthly {
            all.insert(months[i], users.len() as u64);
            if i >= 12 {
                let n = users.iter().filter(|u| in_cohort(plan.churn[**u as usize], i)).count();
                cohort.insert(months[i], n as u64);
            }
        }
        visitors.insert(id.clone(), all);
        consumers.insert(id.clone(), cohort);
        let first = mall_staff_base + m * cfg.mall_staff;
        mall_staff.insert(id, (first..first + cfg.mall_staff).map(|u| user_id(u as u32)).collect());
    }

    let mut categories = BTreeMap::new();
    for (c, cat) in Category::ALL.iter().enumerate() {
        let curve = plan.category_curve(c);
        queries.extend(plan.category_events(c, &curve));
        categories.insert(cat.path().to_string(), months.iter().copied().zip(curve).collect());
    }

    positioning.par_sort_unstable_by(|a, b| {
        (a.t, a.user).cmp(&(b.t, b.user)).then(a.point.lon.total_cmp(&b.point.lon)).then(a.point.lat.total_cmp(&b.point.lat))
    });
    queries.par_sort_unstable_by_key(|q| (q.t, q.user, q.poi, q.with_keyword));

    let boxoffice = generate_boxoffice(cfg, &layout.cinema_ids);

    let mut crng = stream(cfg.seed, Domain::Corrupt, 0, 0);
    let n_pos = (cfg.corruption_rate * positioning.len() as f64).round() as usize;
    let n_q = (cfg.corruption_rate * queries.len() as f64).round() as usize;
    let mut corruptions = corrupt::plan(&mut crng, "positioning.ndjson", positioning.len(), n_pos, &CorruptionKind::POSITIONING);
    corruptions.extend(corrupt::plan(&mut crng, "queries.ndjson", queries.len(), n_q, &CorruptionKind::QUERIES));

    let churn = plan
        .churn
        .iter()
        .enumerate()
        .filter_map(|(u, c)| c.map(|i| (user_id(u as u32), months[i])))
        .collect();
    let truth = GroundTruth {
        seed: cfg.seed,
        first_day: cfg.first_day(),
        last_day: cfg.last_day(),
        visitors_per_query: cfg.visitors_per_query,
        weekend_uplift: cfg.weekend_uplift,
        parks,
        employees,
        mall_staff,
        visitors,
        consumers,
        churn,
        categories,
        fraud: FraudTruth {
            start: cfg.fraud_start,
            end: cfg.fraud_end,
            sigma: cfg.fraud_sigma,
            in_control: cfg.fraud_in_control,
            suspected: boxoffice.suspected.clone(),
            control: boxoffice.control.clone(),
        },
        mall_days,
        corruptions,
    };
    Ok(World { config: cfg.clone(), layout, positioning, queries, boxoffice, truth })
}

impl World {
    pub fn window(&self) -> StudyWindow {
        StudyWindow::from_dates(self.config.first_day(), self.config.last_day())
    }

    /// Clean positioning records, in file order.
    pub fn positioning_records(&self) -> Vec<PositioningRecord> {
        let w = self.window();
        self.positioning
            .iter()
            .map(|e| PositioningRecord::new(&user_id(e.user), e.point.lon, e.point.lat, e.t, &w).expect("generated records are valid"))
            .collect()
    }

    pub fn query_records(&self) -> Vec<MapQueryRecord> {
        let w = self.window();
        self.queries
            .iter()
            .map(|q| {
                let poi = &self.layout.pois[q.poi as usize];
                let kw = q.with_keyword.then(|| poi.category_path.last().unwrap().as_str());
                MapQueryRecord::new(&user_id(q.user), poi.poi_id.as_str(), kw, q.t, &w).expect("generated records are valid")
            })
            .collect()
    }

    /// Base year for indices: the first calendar year whose January has a
    /// full cohort window behind it.
    pub fn base_year(&self) -> i32 {
        let m = self.config.start_month.add_months(12);
        if m.month() == 1 {
            m.year()
        } else {
            m.year() + 1
        }
    }
}

#[derive(Serialize)]
struct AoiOut<'a> {
    aoi_id: &'a str,
    name: &'a str,
    kind: &'static str,
    polygon: Vec<[f64; 2]>,
}

fn write_events<F>(path: &Path, clean: usize, corruptions: &[&Corruption], mut line: F, crng: &mut ChaCha8Rng, bad: fn(CorruptionKind, &mut ChaCha8Rng, &StudyWindow) -> Vec<u8>, window: &StudyWindow) -> Result<()>
where
    F: FnMut(usize, &mut dyn Write) -> std::io::Result<()>,
{
    let mut w = io::create(path)?;
    let mut next = corruptions.iter().peekable();
    let mut i = 0;
    let total = clean + corruptions.len();
    for n in 1..=total as u64 {
        let res = match next.peek() {
            Some(c) if c.line == n => {
                let kind = c.kind;
                next.next();
                let mut b = bad(kind, crng, window);
                b.push(b'\n');
                w.write_all(&b)
            }
            _ => {
                i += 1;
                line(i - 1, &mut w)
            }
        };
        res.map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the dataset, a matching pipeline config `run.cfg`, and truth files
/// under `dir/truth/`.
pub fn write_world(world: &World, dir: &Path) -> Result<()> {
    let cfg = &world.config;
    let window = world.window();
    let mut crng = stream(cfg.seed, Domain::Corrupt, 1, 0);
    let of = |file: &str| world.truth.corruptions.iter().filter(|c| c.file == file).collect::<Vec<_>>();

    let ids: Vec<String> = (0..cfg.n_users as u32).map(user_id).collect();
    write_events(
        &dir.join("positioning.ndjson"),
        world.positioning.len(),
        &of("positioning.ndjson"),
        |i, w| {
            let e = &world.positioning[i];
            io::positioning_line(w, &ids[e.user as usize], e.point.lon, e.point.lat, e.t)
        },
        &mut crng,
        corrupt::positioning_line,
        &window,
    )?;
    write_events(
        &dir.join("queries.ndjson"),
        world.queries.len(),
        &of("queries.ndjson"),
        |i, w| {
            let q = &world.queries[i];
            let poi = &world.layout.pois[q.poi as usize];
            let kw = q.with_keyword.then(|| poi.category_path.last().unwrap().as_str());
            io::query_line(w, &ids[q.user as usize], poi.poi_id.as_str(), kw, q.t)
        },
        &mut crng,
        corrupt::query_line,
        &window,
    )?;

    io::write_csv(
        &dir.join("pois.csv"),
        &["poi_id", "name", "lon", "lat", "category_path"],
        world.layout.pois.iter().map(|p| {
            [p.poi_id.to_string(), p.name.clone(), num(p.location.lon), num(p.location.lat), p.category_path.join("/")]
        }),
    )?;
    let aois: Vec<AoiOut> = world
        .layout
        .aois
        .iter()
        .map(|a| AoiOut {
            aoi_id: a.aoi_id.as_str(),
            name: &a.name,
            kind: a.kind.label(),
            polygon: a.polygon.vertices().iter().map(|v| [v.lon, v.lat]).collect(),
        })
        .collect();
    io::write_json(&dir.join("aois.json"), &aois)?;

    let bo = &world.boxoffice;
    let days = bo.platform.len();
    io::write_csv(
        &dir.join("boxoffice.csv"),
        &["date", "venue_id", "revenue", "queries"],
        (0..days).flat_map(|t| {
            bo.venues.iter().enumerate().map(move |(v, id)| {
                [bo.first.add_days(t as i32).to_string(), id.clone(), format!("{:.2}", bo.revenue[v][t]), num(bo.queries[v][t])]
            })
        }),
    )?;
    io::write_csv(
        &dir.join("platform.csv"),
        &["date", "total"],
        (0..days).map(|t| [bo.first.add_days(t as i32).to_string(), num(bo.platform[t])]),
    )?;
    io::write_csv(
        &dir.join("venue_groups.csv"),
        &["venue_id", "group"],
        bo.suspected
            .iter()
            .map(|v| [v.clone(), "suspected".to_string()])
            .chain(bo.control.iter().map(|v| [v.clone(), "control".to_string()])),
    )?;

    let y = cfg.boxoffice_year;
    let run_cfg = format!(
        "# pipeline config for a generated world (seed {seed})\n\
         positioning = positioning.ndjson\n\
         queries = queries.ndjson\n\
         pois = pois.csv\n\
         aois = aois.json\n\
         boxoffice = boxoffice.csv\n\
         platform = platform.csv\n\
         venue_groups = venue_groups.csv\n\
         window_start = {first}\n\
         window_end = {last}\n\
         base_year = {base}\n\
         day_threshold = {k}\n\
         categories = Automobile/Car Dealer; Food/Restaurant; Tourism/Attraction; Shopping/Mall\n\
         unnormalized_categories = Finance/Investment\n\
         forecast_start = {y}-07-01\n\
         train_first = {y}-01-01\n\
         train_last = {y}-06-30\n\
         z_threshold = 3\n\
         min_run = 5\n\
         out = out\n",
        seed = cfg.seed,
        first = cfg.first_day(),
        last = cfg.last_day(),
        base = world.base_year(),
        k = cfg.staff_min_days,
    );
    std::fs::write(dir.join("run.cfg"), run_cfg).map_err(|e| Error::io(&dir.join("run.cfg"), e))?;

    let truth = dir.join("truth");
    io::write_json(&truth.join("truth.json"), &world.truth)?;
    io::write_csv(
        &truth.join("mall_daily.csv"),
        &["date", "aoi_id", "expected_queries", "queries", "visitors", "staff"],
        world.truth.mall_days.iter().map(|d| {
            [
                d.date.to_string(),
                Layout::mall_id(d.mall),
                format!("{:.6}", d.expected_queries),
                d.queries.to_string(),
                d.visitors.to_string(),
                d.staff.to_string(),
            ]
        }),
    )?;
    io::write_csv(
        &truth.join("corruptions.csv"),
        &["file", "line", "kind"],
        world.truth.corruptions.iter().map(|c| [c.file.clone(), c.line.to_string(), c.kind.label().to_string()]),
    )?;
    io::write_csv(
        &truth.join("boxoffice_market.csv"),
        &["date", "market", "platform_growth"],
        (0..days).map(|t| [bo.first.add_days(t as i32).to_string(), format!("{:.6}", bo.market[t]), format!("{:.6}", bo.growth[t])]),
    )?;
    Ok(())
}
