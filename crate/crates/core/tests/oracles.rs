//! Cross-checks against chrono and statrs.

use chrono::{Datelike, NaiveDate};
use mobimetrics_core::calendar::{local_date, local_second_of_day};
use mobimetrics_core::econometrics::{pearson, regularized_incomplete_beta, student_t_two_sided_p};
use mobimetrics_core::Date;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::beta::beta_reg;

proptest! {
    #[test]
    fn dates_agree_with_chrono(days in -200_000i32..200_000) {
        let ours = Date::from_days(days);
        let theirs = NaiveDate::from_ymd_opt(1970, 1, 1).unwrap() + chrono::TimeDelta::days(days as i64);
        let (y, m, d) = ours.ymd();
        prop_assert_eq!((y, m as u32, d as u32), (theirs.year(), theirs.month(), theirs.day()));
        prop_assert_eq!(ours.weekday() as u32, theirs.weekday().num_days_from_monday());
        prop_assert_eq!(Date::from_ymd(y, m, d), Some(ours));
    }

    #[test]
    fn local_time_agrees_with_chrono(ts in -2_000_000_000i64..4_000_000_000) {
        let utc8 = chrono::FixedOffset::east_opt(8 * 3600).unwrap();
        let t = chrono::DateTime::from_timestamp(ts, 0).unwrap().with_timezone(&utc8);
        let d = local_date(ts);
        let (y, m, day) = d.ymd();
        prop_assert_eq!((y, m as u32, day as u32), (t.year(), t.month(), t.day()));
        prop_assert_eq!(local_second_of_day(ts), chrono::Timelike::num_seconds_from_midnight(&t));
    }

    #[test]
    fn t_p_values_agree_with_statrs(t in -12.0f64..12.0, df in 1u32..400) {
        let dist = StudentsT::new(0.0, 1.0, df as f64).unwrap();
        let want = 2.0 * (1.0 - dist.cdf(t.abs()));
        let got = student_t_two_sided_p(t, df as f64);
        prop_assert!((got - want).abs() < 1e-9 + 1e-7 * want, "t={} df={} got={} want={}", t, df, got, want);
    }

    #[test]
    fn incomplete_beta_agrees_with_statrs(a in 0.1f64..50.0, b in 0.1f64..50.0, x in 0.0f64..=1.0) {
        let got = regularized_incomplete_beta(a, b, x);
        let want = beta_reg(a, b, x);
        prop_assert!((got - want).abs() < 1e-10, "a={} b={} x={} got={} want={}", a, b, x, got, want);
    }
}

#[test]
fn pearson_matches_textbook_example() {
    let a = [1.0, 2.0, 3.0, 4.0, 5.0];
    let b = [2.0, 4.0, 5.0, 4.0, 5.0];
    let c = pearson(&a, &b).unwrap();
    assert!((c.r - 0.7745966692414834).abs() < 1e-12);
    let t = c.r * (3.0f64 / (1.0 - c.r * c.r)).sqrt();
    let want = 2.0 * (1.0 - StudentsT::new(0.0, 1.0, 3.0).unwrap().cdf(t));
    assert!((c.p_value - want).abs() < 1e-10);
}
