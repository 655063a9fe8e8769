use std::path::Path;

use mobimetrics_core::{Date, MonthId};

use crate::config::KeyValues;
use crate::error::{Error, Result};

/// A headcount level change for one industrial park, applied from `month`
/// onwards as a factor `1 + magnitude`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shock {
    pub aoi_id: String,
    pub month: MonthId,
    pub magnitude: f64,
}

impl std::str::FromStr for Shock {
    type Err = String;

    /// `aoi_id@YYYY-MM:magnitude`
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (aoi, rest) = s.split_once('@').ok_or("expected aoi@YYYY-MM:magnitude")?;
        let (month, mag) = rest.split_once(':').ok_or("expected aoi@YYYY-MM:magnitude")?;
        Ok(Shock {
            aoi_id: aoi.trim().to_string(),
            month: month.trim().parse().map_err(|_| format!("bad month {month:?}"))?,
            magnitude: mag.trim().parse().map_err(|_| format!("bad magnitude {mag:?}"))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub seed: u64,
    pub n_users: usize,
    pub start_month: MonthId,
    pub months: usize,
    pub n_traditional: usize,
    pub n_high_tech: usize,
    pub n_commercial: usize,
    /// Extra background points per active user-month, Poisson mean, on top of one.
    pub background_points: f64,
    pub churn_rate: f64,

    pub employment_level_min: f64,
    pub employment_level_max: f64,
    pub traditional_trend: f64,
    pub high_tech_trend: f64,
    /// Share of the roster present in February.
    pub festival_attendance: f64,
    pub attendance: f64,
    pub staff_min_days: usize,
    pub shocks: Vec<Shock>,

    pub mall_staff: usize,
    pub mall_base_queries: f64,
    pub weekend_uplift: f64,
    pub summer_bump: f64,
    pub festival_dip: f64,
    pub demand_ar: f64,
    pub demand_sd: f64,
    pub visitors_per_query: f64,
    /// Visitor noise sd as a share of the mean daily visitor count.
    pub visit_noise_sd: f64,

    pub auto_monthly: f64,
    pub restaurant_monthly: f64,
    pub finance_monthly: f64,
    pub tourism_monthly: f64,
    pub n_auto_pois: usize,
    pub n_restaurant_pois: usize,
    pub n_finance_pois: usize,
    pub n_tourism_pois: usize,
    pub duplicate_query_rate: f64,

    pub boxoffice_year: i32,
    pub n_venues: usize,
    pub n_suspected: usize,
    pub venue_base_queries: f64,
    pub ticket_price: f64,
    pub revenue_noise_sd: f64,
    pub market_ar: f64,
    pub market_sd: f64,
    pub platform_growth: f64,
    pub platform_base: f64,
    pub platform_noise_sd: f64,
    pub fraud_start: Date,
    pub fraud_end: Date,
    /// Revenue inflation per suspected venue in units of its revenue noise sd;
    /// zero disables the plant.
    pub fraud_sigma: f64,
    pub fraud_in_control: bool,

    pub corruption_rate: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            n_users: 20_000,
            start_month: MonthId::new(2013, 1).unwrap(),
            months: 42,
            n_traditional: 15,
            n_high_tech: 15,
            n_commercial: 10,
            background_points: 0.5,
            churn_rate: 0.05,
            employment_level_min: 40.0,
            employment_level_max: 80.0,
            traditional_trend: -0.005,
            high_tech_trend: 0.008,
            festival_attendance: 0.7,
            attendance: 0.75,
            staff_min_days: 10,
            shocks: vec![
                Shock { aoi_id: "trad_00".into(), month: MonthId::new(2016, 3).unwrap(), magnitude: -0.9 },
                Shock { aoi_id: "tech_00".into(), month: MonthId::new(2015, 6).unwrap(), magnitude: 0.3 },
            ],
            mall_staff: 15,
            mall_base_queries: 20.0,
            weekend_uplift: 1.4,
            summer_bump: 1.25,
            festival_dip: 0.8,
            demand_ar: 0.5,
            demand_sd: 0.2,
            visitors_per_query: 2.6,
            visit_noise_sd: 0.05,
            auto_monthly: 3000.0,
            restaurant_monthly: 2000.0,
            finance_monthly: 500.0,
            tourism_monthly: 800.0,
            n_auto_pois: 40,
            n_restaurant_pois: 50,
            n_finance_pois: 20,
            n_tourism_pois: 20,
            duplicate_query_rate: 0.1,
            boxoffice_year: 2015,
            n_venues: 60,
            n_suspected: 30,
            venue_base_queries: 200.0,
            ticket_price: 35.0,
            revenue_noise_sd: 0.05,
            market_ar: 0.7,
            market_sd: 0.2,
            platform_growth: 0.3,
            platform_base: 1_000_000.0,
            platform_noise_sd: 0.01,
            fraud_start: Date::from_ymd(2015, 8, 25).unwrap(),
            fraud_end: Date::from_ymd(2015, 9, 16).unwrap(),
            fraud_sigma: 4.0,
            fraud_in_control: false,
            corruption_rate: 0.001,
        }
    }
}

macro_rules! fields {
    ($mac:ident) => {
        $mac!(
            seed, n_users, start_month, months, n_traditional, n_high_tech, n_commercial, background_points, churn_rate,
            employment_level_min, employment_level_max, traditional_trend, high_tech_trend, festival_attendance,
            attendance, staff_min_days, mall_staff, mall_base_queries, weekend_uplift, summer_bump, festival_dip,
            demand_ar, demand_sd, visitors_per_query, visit_noise_sd, auto_monthly, restaurant_monthly,
            finance_monthly, tourism_monthly, n_auto_pois, n_restaurant_pois, n_finance_pois, n_tourism_pois,
            duplicate_query_rate, boxoffice_year, n_venues, n_suspected, venue_base_queries, ticket_price,
            revenue_noise_sd, market_ar, market_sd, platform_growth, platform_base, platform_noise_sd, fraud_start,
            fraud_end, fraud_sigma, fraud_in_control, corruption_rate
        )
    };
}

macro_rules! key_names {
    ($($f:ident),*) => {
        &[$(stringify!($f)),*, "shocks"]
    };
}

impl WorldConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_kv(&KeyValues::load(path)?)
    }

    /// Unlisted keys keep their defaults.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        kv.check_known(fields!(key_names))?;
        let mut c = Self::default();
        macro_rules! read {
            ($($f:ident),*) => {
                $( if let Some(v) = kv.parsed(stringify!($f))? { c.$f = v; } )*
            };
        }
        fields!(read);
        if let Some(list) = kv.get("shocks") {
            c.shocks = list
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|e| Error::Config(format!("shocks: {e}"))))
                .collect::<Result<_>>()?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn last_month(&self) -> MonthId {
        self.start_month.add_months(self.months as i64 - 1)
    }

    pub fn first_day(&self) -> Date {
        self.start_month.first_day()
    }

    pub fn last_day(&self) -> Date {
        self.last_month().last_day()
    }

    pub fn n_parks(&self) -> usize {
        self.n_traditional + self.n_high_tech
    }

    pub fn boxoffice_first(&self) -> Date {
        Date::from_ymd(self.boxoffice_year, 1, 1).unwrap()
    }

    pub fn boxoffice_last(&self) -> Date {
        Date::from_ymd(self.boxoffice_year, 12, 31).unwrap()
    }

    /// Largest roster a park can reach, which sizes its user pool.
    pub fn pool_size(&self) -> usize {
        let growth = (1.0 + self.traditional_trend.max(self.high_tech_trend).max(0.0)).powi(self.months as i32);
        let shock = self.shocks.iter().map(|s| 1.0 + s.magnitude.max(0.0)).fold(1.0, f64::max);
        (self.employment_level_max * growth * shock).ceil() as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.months < 13 {
            return bad("months must be at least 13 for any cohort".into());
        }
        let reserved = self.n_parks() * self.pool_size() + self.n_commercial * self.mall_staff;
        if self.n_users < reserved + 1000 {
            return bad(format!("n_users must be at least {} for this many parks and malls", reserved + 1000));
        }
        for s in &self.shocks {
            if s.month < self.start_month || s.month > self.last_month() {
                return bad(format!("shock month {} for {} outside the generated window", s.month, s.aoi_id));
            }
            if !(s.magnitude > -1.0) {
                return bad(format!("shock magnitude for {} must exceed -1", s.aoi_id));
            }
            let known = parse_park(&s.aoi_id).is_some_and(|(trad, i)| i < if trad { self.n_traditional } else { self.n_high_tech });
            if !known {
                return bad(format!("shock names unknown park {}", s.aoi_id));
            }
        }
        if self.fraud_start > self.fraud_end || self.fraud_start < self.boxoffice_first() || self.fraud_end > self.boxoffice_last() {
            return bad("fraud window must lie inside the box-office year".into());
        }
        if self.n_suspected == 0 || self.n_suspected >= self.n_venues {
            return bad("n_suspected must be between 1 and n_venues - 1".into());
        }
        if !(self.employment_level_min > 0.0 && self.employment_level_min <= self.employment_level_max) {
            return bad("employment levels must satisfy 0 < min <= max".into());
        }
        let unit = [self.churn_rate, self.attendance, self.festival_attendance, self.duplicate_query_rate, self.corruption_rate];
        if unit.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("rates must lie in [0, 1]".into());
        }
        if self.n_commercial == 0 || self.n_parks() == 0 {
            return bad("need at least one park and one mall".into());
        }
        let nonneg = [self.demand_sd, self.visit_noise_sd, self.market_sd, self.revenue_noise_sd, self.platform_noise_sd];
        if nonneg.iter().any(|v| !(*v >= 0.0)) {
            return bad("noise levels must be non-negative".into());
        }
        Ok(())
    }
}

/// `trad_07` -> (true, 7), `tech_03` -> (false, 3).
pub fn parse_park(id: &str) -> Option<(bool, usize)> {
    let (prefix, n) = id.split_once('_')?;
    let n = n.parse().ok()?;
    match prefix {
        "trad" => Some((true, n)),
        "tech" => Some((false, n)),
        _ => None,
    }
}
