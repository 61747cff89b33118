//! Seeded synthetic desert weather for demos and trend tests.
//!
//! The generator produces a hot-desert profile: strong irradiance peaking in
//! June, weak winds around 3 m/s, and a handful of multi-day winter cloud
//! events. It is deliberately simple; real studies should feed measured
//! CSVs instead.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{synthesize_load, LoadShape, ScenarioSeries};

const DAYS_PER_YEAR: f64 = 365.0;
/// Day-of-year with the longest, brightest day (late June).
const PEAK_DAY: f64 = 171.0;

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; one draw per call keeps the stream simple to reason about.
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Hourly `(ghi_wm2, wind_ms)` for the requested number of days.
///
/// Identical `(days, seed)` inputs always produce identical series.
pub fn desert_weather(days: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ghi = Vec::with_capacity(days * 24);
    let mut wind = Vec::with_capacity(days * 24);

    // Daily clearness: mostly clear sky with small haze losses.
    let mut clearness: Vec<f64> = (0..days)
        .map(|_| (0.97 - 0.05 * standard_normal(&mut rng).abs()).clamp(0.72, 1.0))
        .collect();

    // Multi-day cloud events, biased into the low-sun season. One event per
    // run is made very dark so storage sizing is exercised by a realistic
    // worst week.
    let winter_pool: Vec<usize> = (0..days)
        .filter(|&d| {
            let s = (TAU * (d as f64 - PEAK_DAY) / DAYS_PER_YEAR).cos();
            s < -0.25
        })
        .collect();
    let n_events = if days >= 30 { 2 + days / 120 } else { 0 };
    for event in 0..n_events {
        let pool = if winter_pool.is_empty() { None } else { Some(&winter_pool) };
        let start = match pool {
            Some(p) => p[rng.random_range(0..p.len())],
            None => rng.random_range(0..days),
        };
        let duration = rng.random_range(2..=4usize);
        let depth = if event == 0 {
            0.06 + 0.04 * rng.random::<f64>()
        } else {
            0.18 + 0.14 * rng.random::<f64>()
        };
        for c in clearness.iter_mut().take((start + duration).min(days)).skip(start) {
            *c = c.min(depth);
        }
    }

    let mut w = 3.0; // wind AR(1) state, m/s
    for (d, &clear) in clearness.iter().enumerate() {
        let season = (TAU * (d as f64 - PEAK_DAY) / DAYS_PER_YEAR).cos();
        let clear_peak = 920.0 + 120.0 * season; // W/m² at solar noon
        let half_day = 6.3 + 1.1 * season; // hours from noon to zero output

        for h in 0..24 {
            let x = (h as f64 + 0.5 - 12.0) / half_day;
            let shape = if x.abs() < 1.0 {
                (PI * x / 2.0).cos().powf(1.3)
            } else {
                0.0
            };
            let noise = 1.0 + 0.03 * (rng.random::<f64>() - 0.5);
            ghi.push((clear * clear_peak * shape * noise).max(0.0));

            // Weak desert wind with an afternoon bump; clouds arrive with
            // slightly stronger winds.
            let gusty = if clear < 0.4 { 0.8 } else { 0.0 };
            let mean = 3.0 + 0.3 * season + 0.7 * (TAU * (h as f64 - 15.0) / 24.0).cos().max(0.0)
                + gusty;
            w += 0.25 * (mean - w) + 0.45 * standard_normal(&mut rng);
            w = w.clamp(0.0, 14.0);
            wind.push(w);
        }
    }
    (ghi, wind)
}

/// One 365-day hourly scenario: desert weather plus the bundled
/// constant-base, midday-peak load profile (19.01 kWh/day).
pub fn synthetic_desert_year(seed: u64) -> ScenarioSeries {
    let days = 365;
    let (ghi, wind) = desert_weather(days, seed);
    let load = synthesize_load(&LoadShape::default_site(), days)
        .expect("default load shape is valid");
    ScenarioSeries::from_hourly(ghi, wind, load).expect("generator output is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = desert_weather(40, 7);
        let b = desert_weather(40, 7);
        assert_eq!(a, b);
        let c = desert_weather(40, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn year_has_desert_character() {
        let series = synthetic_desert_year(42);
        assert_eq!(series.len(), 8760);

        // Mean daily irradiation in a plausible desert band.
        let total_kwh_m2: f64 = series.ghi_wm2.iter().sum::<f64>() / 1000.0;
        let daily = total_kwh_m2 / 365.0;
        assert!((4.0..8.0).contains(&daily), "mean daily GHI {daily}");

        // June outshines November.
        let month_kwh = |d0: usize, d1: usize| -> f64 {
            series.ghi_wm2[d0 * 24..d1 * 24].iter().sum::<f64>() / (d1 - d0) as f64
        };
        assert!(month_kwh(152, 181) > 1.3 * month_kwh(305, 334));

        // Weak wind overall.
        let mean_wind = series.wind_ms.iter().sum::<f64>() / 8760.0;
        assert!((1.5..5.0).contains(&mean_wind), "mean wind {mean_wind}");

        // At least one genuinely dark multi-day spell exists.
        let mut darkest = f64::INFINITY;
        for d in 0..363 {
            let e: f64 = series.ghi_wm2[d * 24..(d + 3) * 24].iter().sum::<f64>() / 3000.0;
            darkest = darkest.min(e);
        }
        assert!(darkest < 1.5, "darkest 3-day mean {darkest} kWh/m2/day");

        // Load repeats the default site's daily energy.
        assert!((series.daily_load_kwh() - 19.01).abs() < 1e-9);
    }

    #[test]
    fn night_is_dark_noon_is_not() {
        let series = synthetic_desert_year(1);
        for d in [10usize, 180, 300] {
            assert_eq!(series.ghi_wm2[d * 24], 0.0, "midnight of day {d}");
            assert!(series.ghi_wm2[d * 24 + 12] > 50.0, "noon of day {d}");
        }
    }
}
