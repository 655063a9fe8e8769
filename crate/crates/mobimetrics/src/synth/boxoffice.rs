//! One year of daily cinema revenue and query counts.
//!
//! A market-wide log-AR(1) demand process drives every venue. Queries are
//! Poisson around venue demand times platform growth; revenue is ticket price
//! times `visitors_per_query` times demand, with multiplicative noise. The
//! fraud plant adds `fraud_sigma` revenue-noise deviations to each venue of
//! the suspected group (and optionally the control group) inside the window.

use std::collections::BTreeMap;

use mobimetrics_core::econometrics::DailySeries;
use mobimetrics_core::Date;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::WorldConfig;
use super::{poisson, stream, Domain};
use crate::io::BoxOfficePanel;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxOffice {
    pub first: Date,
    pub venues: Vec<String>,
    /// `[venue][day]`
    pub revenue: Vec<Vec<f64>>,
    pub queries: Vec<Vec<f64>>,
    pub platform: Vec<f64>,
    /// Market demand multiplier per day.
    pub market: Vec<f64>,
    pub growth: Vec<f64>,
    pub suspected: Vec<String>,
    pub control: Vec<String>,
}

/// Chinese New Year's day for the years the generator is used with.
fn spring_festival(year: i32) -> Option<Date> {
    let (m, d) = match year {
        2012 => (1, 23),
        2013 => (2, 10),
        2014 => (1, 31),
        2015 => (2, 19),
        2016 => (2, 8),
        2017 => (1, 28),
        _ => return None,
    };
    Date::from_ymd(year, m, d)
}

fn calendar_factor(d: Date) -> f64 {
    let (y, m, dom) = d.ymd();
    let weekly = match d.weekday() {
        4 => 1.2,
        5 => 1.5,
        6 => 1.4,
        _ => 1.0,
    };
    let mut f = weekly;
    if m == 10 && dom <= 7 {
        f *= 1.8;
    }
    if m == 7 || m == 8 {
        f *= 1.2;
    }
    if let Some(sf) = spring_festival(y) {
        let off = sf.days_until(d);
        if (0..7).contains(&off) {
            f *= 1.6;
        }
    }
    f
}

pub fn generate_boxoffice(cfg: &WorldConfig, venues: &[String]) -> BoxOffice {
    let first = cfg.boxoffice_first();
    let days = (first.days_until(cfg.boxoffice_last()) + 1) as usize;
    let mut mrng = stream(cfg.seed, Domain::Market, 0, 0);
    let shock = Normal::new(0.0, cfg.market_sd).unwrap();
    let pnoise = Normal::new(0.0, cfg.platform_noise_sd).unwrap();
    let mut x = 0.0;
    let mut market = Vec::with_capacity(days);
    let mut growth = Vec::with_capacity(days);
    let mut platform = Vec::with_capacity(days);
    for t in 0..days {
        x = cfg.market_ar * x + shock.sample(&mut mrng);
        market.push(calendar_factor(first.add_days(t as i32)) * x.exp());
        let g = (cfg.platform_growth * t as f64 / 365.0).exp();
        growth.push(g);
        platform.push((cfg.platform_base * g * pnoise.sample(&mut mrng).exp()).round());
    }

    let suspected: Vec<String> = venues[..cfg.n_suspected].to_vec();
    let control: Vec<String> = venues[cfg.n_suspected..].to_vec();
    let fraud_lo = first.days_until(cfg.fraud_start) as usize;
    let fraud_hi = first.days_until(cfg.fraud_end) as usize;
    let rnoise = Normal::new(0.0, cfg.revenue_noise_sd).unwrap();
    let mut revenue = Vec::with_capacity(venues.len());
    let mut queries = Vec::with_capacity(venues.len());
    for (v, _) in venues.iter().enumerate() {
        let mut rng = stream(cfg.seed, Domain::Venue, v as u64, 0);
        let size = rng.random_range(0.5..1.5);
        let planted = cfg.fraud_sigma > 0.0 && (v < cfg.n_suspected || cfg.fraud_in_control);
        let mut rev = Vec::with_capacity(days);
        let mut qs = Vec::with_capacity(days);
        for t in 0..days {
            let lambda = cfg.venue_base_queries * size * market[t];
            qs.push(poisson(&mut rng, lambda * growth[t]));
            let expected = cfg.ticket_price * cfg.visitors_per_query * lambda;
            let mut r = expected * (1.0 + rnoise.sample(&mut rng));
            if planted && (fraud_lo..=fraud_hi).contains(&t) {
                r += cfg.fraud_sigma * cfg.revenue_noise_sd * expected;
            }
            rev.push((r.max(0.0) * 100.0).round() / 100.0);
        }
        revenue.push(rev);
        queries.push(qs);
    }
    BoxOffice { first, venues: venues.to_vec(), revenue, queries, platform, market, growth, suspected, control }
}

impl BoxOffice {
    pub fn panel(&self) -> BoxOfficePanel {
        let series = |rows: &[Vec<f64>]| -> BTreeMap<String, DailySeries> {
            self.venues
                .iter()
                .zip(rows)
                .map(|(v, r)| (v.clone(), DailySeries::new(self.first, r.clone()).expect("non-negative")))
                .collect()
        };
        BoxOfficePanel { revenue: series(&self.revenue), queries: series(&self.queries) }
    }

    pub fn platform_series(&self) -> DailySeries {
        DailySeries::new(self.first, self.platform.clone()).expect("positive totals")
    }

    pub fn last(&self) -> Date {
        self.first.add_days(self.platform.len() as i32 - 1)
    }
}
