//! Weather and load time series, power curves, and per-unit availability.
//!
//! A scenario is one aligned set of hourly irradiance, wind-speed, and load
//! series. This module converts raw scenarios into what the dispatcher
//! actually consumes: per-kW PV availability and per-unit WT availability.

mod io;
mod synth;

pub use io::{
    read_load_csv, read_power_curve, read_scenario, read_scenario_with, read_weather_csv,
    write_power_curve, write_scenario, ColumnMap,
};
pub use synth::{desert_weather, synthetic_desert_year};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time axis of a series: plain hour indices or calendar timestamps.
///
/// Both forms must be strictly increasing with uniform spacing. Hour
/// indices advance one step per index unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeAxis {
    Hours(Vec<i64>),
    Stamps(Vec<NaiveDateTime>),
}

impl TimeAxis {
    pub fn len(&self) -> usize {
        match self {
            TimeAxis::Hours(v) => v.len(),
            TimeAxis::Stamps(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Uniform spacing in hours. Errors when the axis is not strictly
    /// increasing or not uniform.
    pub fn step_hours(&self) -> Result<f64> {
        match self {
            TimeAxis::Hours(v) => {
                if v.len() < 2 {
                    return Ok(1.0);
                }
                let d = v[1] - v[0];
                if d < 1 {
                    return Err(Error::invalid("timestamps", "hour index must increase"));
                }
                for (i, w) in v.windows(2).enumerate() {
                    if w[1] - w[0] != d {
                        return Err(Error::invalid(
                            "timestamps",
                            format!("non-uniform spacing at step {}", i + 1),
                        ));
                    }
                }
                Ok(d as f64)
            }
            TimeAxis::Stamps(v) => {
                if v.len() < 2 {
                    return Ok(1.0);
                }
                let d = v[1] - v[0];
                if d.num_seconds() <= 0 {
                    return Err(Error::invalid("timestamps", "must strictly increase"));
                }
                for (i, w) in v.windows(2).enumerate() {
                    if w[1] - w[0] != d {
                        return Err(Error::invalid(
                            "timestamps",
                            format!("non-uniform spacing at step {}", i + 1),
                        ));
                    }
                }
                Ok(d.num_seconds() as f64 / 3600.0)
            }
        }
    }
}

/// One evaluation horizon of aligned hourly data.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSeries {
    pub timestamps: TimeAxis,
    /// Global horizontal irradiance, W/m².
    pub ghi_wm2: Vec<f64>,
    /// Wind speed, m/s.
    pub wind_ms: Vec<f64>,
    /// Demand, kW.
    pub load_kw: Vec<f64>,
}

impl ScenarioSeries {
    pub fn new(
        timestamps: TimeAxis,
        ghi_wm2: Vec<f64>,
        wind_ms: Vec<f64>,
        load_kw: Vec<f64>,
    ) -> Result<Self> {
        let t = timestamps.len();
        if t == 0 {
            return Err(Error::invalid("timestamps", "series must be non-empty"));
        }
        for (name, v) in [("ghi_wm2", &ghi_wm2), ("wind_ms", &wind_ms), ("load_kw", &load_kw)] {
            if v.len() != t {
                return Err(Error::LengthMismatch {
                    context: format!("{name} vs timestamps"),
                    expected: t,
                    found: v.len(),
                });
            }
            for (i, &x) in v.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::Invalid {
                        field: name,
                        reason: format!("non-finite value at step {i}"),
                    });
                }
                if x < 0.0 {
                    return Err(Error::Invalid {
                        field: name,
                        reason: format!("negative value {x} at step {i}"),
                    });
                }
            }
        }
        timestamps.step_hours()?;
        Ok(ScenarioSeries {
            timestamps,
            ghi_wm2,
            wind_ms,
            load_kw,
        })
    }

    /// Series on a fresh hourly index 0..T.
    pub fn from_hourly(ghi_wm2: Vec<f64>, wind_ms: Vec<f64>, load_kw: Vec<f64>) -> Result<Self> {
        let axis = TimeAxis::Hours((0..ghi_wm2.len() as i64).collect());
        ScenarioSeries::new(axis, ghi_wm2, wind_ms, load_kw)
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn step_hours(&self) -> f64 {
        // Validated at construction; cannot fail afterwards.
        self.timestamps.step_hours().unwrap_or(1.0)
    }

    /// Total demand over the horizon, kWh.
    pub fn load_energy_kwh(&self) -> f64 {
        let dt = self.step_hours();
        self.load_kw.iter().sum::<f64>() * dt
    }

    /// Mean demand per day, kWh/day.
    pub fn daily_load_kwh(&self) -> f64 {
        let hours = self.len() as f64 * self.step_hours();
        if hours == 0.0 {
            return 0.0;
        }
        self.load_energy_kwh() * 24.0 / hours
    }
}

/// Piecewise-linear turbine power curve.
///
/// Power is zero at and below the first (cut-in) point and zero above the
/// last (survival) point; between points it interpolates linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    points: Vec<(f64, f64)>,
}

impl PowerCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("power curve", "needs at least two points"));
        }
        if points[0].1 != 0.0 {
            return Err(Error::invalid("power curve", "cut-in point must have zero power"));
        }
        for &(s, p) in &points {
            if !(s.is_finite() && p.is_finite() && s >= 0.0 && p >= 0.0) {
                return Err(Error::invalid("power curve", "speeds and powers must be >= 0"));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid(
                    "power curve",
                    format!("speeds must strictly increase (row {})", i + 1),
                ));
            }
        }
        Ok(PowerCurve { points })
    }

    /// Bundled default for the GV-2kW vertical-axis turbine: cut-in
    /// 2.8 m/s, 2.0 kW rated near 11 m/s, 2.5 kW at the 25 m/s survival
    /// speed. A tabulated stand-in for the manufacturer curve, editable
    /// by replacing the CSV.
    pub fn gv2kw() -> Self {
        static CSV: &str = include_str!("../../data/gv2kw_power_curve.csv");
        io::parse_power_curve_text(CSV, "<bundled gv2kw>")
            .expect("bundled power curve must parse")
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Largest tabulated power, kW.
    pub fn max_power(&self) -> f64 {
        self.points.iter().map(|&(_, p)| p).fold(0.0, f64::max)
    }

    /// Interpolated power at a wind speed, kW.
    pub fn power_at(&self, speed_ms: f64) -> f64 {
        let first = self.points[0];
        let last = self.points[self.points.len() - 1];
        if speed_ms < first.0 || speed_ms > last.0 {
            return 0.0;
        }
        // Binary search for the segment containing speed_ms.
        let idx = self
            .points
            .partition_point(|&(s, _)| s <= speed_ms);
        if idx == 0 {
            return first.1;
        }
        if idx >= self.points.len() {
            return last.1;
        }
        let (s0, p0) = self.points[idx - 1];
        let (s1, p1) = self.points[idx];
        if s1 == s0 {
            return p0;
        }
        p0 + (p1 - p0) * (speed_ms - s0) / (s1 - s0)
    }
}

/// Per-unit production predictions aligned with a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilitySeries {
    /// PV output per installed kW, kW/kW.
    pub pv_per_kw: Vec<f64>,
    /// WT output per turbine unit, kW.
    pub wt_per_unit: Vec<f64>,
}

impl AvailabilitySeries {
    /// Derive both availability channels from a scenario.
    pub fn derive(series: &ScenarioSeries, curve: &PowerCurve, derate: f64) -> Result<Self> {
        Ok(AvailabilitySeries {
            pv_per_kw: pv_availability(series, derate)?,
            wt_per_unit: wt_availability(series, curve),
        })
    }

    pub fn len(&self) -> usize {
        self.pv_per_kw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pv_per_kw.is_empty()
    }
}

/// PV output per installed kW under standard-test-condition normalization:
/// `derate * ghi / 1000 W/m²`.
pub fn pv_availability(series: &ScenarioSeries, derate: f64) -> Result<Vec<f64>> {
    if !(derate > 0.0 && derate <= 1.2) {
        return Err(Error::invalid(
            "derate",
            format!("{derate} outside (0, 1.2]"),
        ));
    }
    Ok(series
        .ghi_wm2
        .iter()
        .map(|&g| (derate * g / 1000.0).max(0.0))
        .collect())
}

/// WT output per turbine unit from the power curve.
pub fn wt_availability(series: &ScenarioSeries, curve: &PowerCurve) -> Vec<f64> {
    series.wind_ms.iter().map(|&w| curve.power_at(w)).collect()
}

/// Rectangular daily load profile parameters.
///
/// Base power runs all day; inside the window the profile rises to the peak.
/// The window may start and end at fractional hours; boundary hours carry
/// the overlap-weighted average power so the discrete series integrates to
/// `24*base + |window|*(peak - base)` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadShape {
    pub base_kw: f64,
    pub peak_kw: f64,
    /// Window start, hour of day in [0, 24].
    pub window_start: f64,
    /// Window end, hour of day in [window_start, 24].
    pub window_end: f64,
}

impl LoadShape {
    /// Bundled cathodic-protection site defaults: 0.43 kW base, 1.33 kW
    /// midday peak, 19.01 kWh/day.
    pub fn default_site() -> Self {
        LoadShape::for_daily_energy(0.43, 1.33, 19.01, 9.0)
            .expect("default site parameters are consistent")
    }

    /// Solve the window length so one day integrates to `daily_kwh`.
    pub fn for_daily_energy(
        base_kw: f64,
        peak_kw: f64,
        daily_kwh: f64,
        window_start: f64,
    ) -> Result<Self> {
        if !(base_kw >= 0.0 && peak_kw >= base_kw) {
            return Err(Error::invalid("base_kw", "need 0 <= base_kw <= peak_kw"));
        }
        let width = if peak_kw > base_kw {
            (daily_kwh - 24.0 * base_kw) / (peak_kw - base_kw)
        } else {
            0.0
        };
        if peak_kw > base_kw && !(0.0..=24.0).contains(&width) {
            return Err(Error::invalid(
                "daily_kwh",
                format!("implied window of {width:.2} h is outside [0, 24]"),
            ));
        }
        if peak_kw == base_kw && (daily_kwh - 24.0 * base_kw).abs() > 1e-9 {
            return Err(Error::invalid(
                "daily_kwh",
                "flat profile cannot meet the requested daily energy",
            ));
        }
        let shape = LoadShape {
            base_kw,
            peak_kw,
            window_start,
            window_end: window_start + width,
        };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_kw >= 0.0 && self.peak_kw >= self.base_kw) {
            return Err(Error::invalid("base_kw", "need 0 <= base_kw <= peak_kw"));
        }
        if !(0.0 <= self.window_start
            && self.window_start <= self.window_end
            && self.window_end <= 24.0)
        {
            return Err(Error::invalid(
                "window_start",
                "need 0 <= start <= end <= 24",
            ));
        }
        Ok(())
    }

    /// Energy of one day, kWh: `24*base + |window|*(peak - base)`.
    pub fn daily_energy_kwh(&self) -> f64 {
        24.0 * self.base_kw + (self.window_end - self.window_start) * (self.peak_kw - self.base_kw)
    }
}

/// Hourly load series repeating a rectangular daily profile.
pub fn synthesize_load(shape: &LoadShape, days: usize) -> Result<Vec<f64>> {
    shape.validate()?;
    let mut day = [0.0f64; 24];
    for (h, slot) in day.iter_mut().enumerate() {
        let lo = h as f64;
        let hi = lo + 1.0;
        let overlap = (hi.min(shape.window_end) - lo.max(shape.window_start)).clamp(0.0, 1.0);
        *slot = shape.base_kw + (shape.peak_kw - shape.base_kw) * overlap;
    }
    let mut out = Vec::with_capacity(days * 24);
    for _ in 0..days {
        out.extend_from_slice(&day);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pv_availability_follows_irradiance() {
        let s = ScenarioSeries::from_hourly(
            vec![1000.0, 0.0, 650.0],
            vec![0.0; 3],
            vec![0.0; 3],
        )
        .unwrap();
        let p = pv_availability(&s, 1.0).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.65]);
        // Linear in irradiance before any clamp.
        let s2 = ScenarioSeries::from_hourly(vec![2000.0, 0.0, 1300.0], vec![0.0; 3], vec![0.0; 3])
            .unwrap();
        let p2 = pv_availability(&s2, 1.0).unwrap();
        for (a, b) in p.iter().zip(&p2) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
        assert!(pv_availability(&s, 0.0).is_err());
        assert!(pv_availability(&s, 1.3).is_err());
    }

    #[test]
    fn gv2kw_curve_endpoints() {
        let c = PowerCurve::gv2kw();
        assert_eq!(c.power_at(2.0), 0.0);
        assert_eq!(c.power_at(2.8), 0.0);
        assert!((c.power_at(25.0) - 2.5).abs() < 1e-12);
        assert_eq!(c.power_at(25.01), 0.0);
        assert!((c.power_at(11.0) - 2.0).abs() < 1e-12);
        assert!((c.max_power() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn curve_reproduces_every_tabulated_point() {
        let c = PowerCurve::gv2kw();
        for &(s, p) in c.points() {
            assert_eq!(c.power_at(s), p, "speed {s}");
        }
    }

    #[test]
    fn curve_interpolates_midpoints() {
        let c = PowerCurve::new(vec![(2.0, 0.0), (4.0, 1.0), (6.0, 3.0)]).unwrap();
        assert!((c.power_at(3.0) - 0.5).abs() < 1e-12);
        assert!((c.power_at(5.0) - 2.0).abs() < 1e-12);
        assert_eq!(c.power_at(1.9), 0.0);
        assert_eq!(c.power_at(6.1), 0.0);
    }

    #[test]
    fn curve_rejects_bad_tables() {
        assert!(PowerCurve::new(vec![(2.0, 0.0)]).is_err());
        assert!(PowerCurve::new(vec![(2.0, 0.5), (3.0, 1.0)]).is_err());
        assert!(PowerCurve::new(vec![(2.0, 0.0), (2.0, 1.0)]).is_err());
        assert!(PowerCurve::new(vec![(3.0, 0.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn default_site_load_integrates_to_rated_energy() {
        let shape = LoadShape::default_site();
        assert!((shape.daily_energy_kwh() - 19.01).abs() < 1e-12);
        let series = synthesize_load(&shape, 3).unwrap();
        assert_eq!(series.len(), 72);
        let day_sum: f64 = series[..24].iter().sum();
        assert!((day_sum - 19.01).abs() < 1e-12);
        // Every day identical.
        assert_eq!(series[..24], series[24..48]);
        let peak = series.iter().cloned().fold(0.0, f64::max);
        assert!((peak - 1.33).abs() < 1e-12);
        let base = series.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((base - 0.43).abs() < 1e-12);
    }

    #[test]
    fn flat_and_empty_windows() {
        let flat = LoadShape {
            base_kw: 0.5,
            peak_kw: 0.5,
            window_start: 0.0,
            window_end: 0.0,
        };
        let s = synthesize_load(&flat, 1).unwrap();
        assert!(s.iter().all(|&x| x == 0.5));
        assert!((flat.daily_energy_kwh() - 12.0).abs() < 1e-12);

        let zero = LoadShape {
            base_kw: 0.0,
            peak_kw: 0.0,
            window_start: 12.0,
            window_end: 12.0,
        };
        assert!(synthesize_load(&zero, 2).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn fractional_window_spreads_over_boundary_hours() {
        let shape = LoadShape {
            base_kw: 0.0,
            peak_kw: 1.0,
            window_start: 9.25,
            window_end: 10.5,
        };
        let s = synthesize_load(&shape, 1).unwrap();
        assert!((s[9] - 0.75).abs() < 1e-12);
        assert!((s[10] - 0.5).abs() < 1e-12);
        assert_eq!(s[11], 0.0);
        let sum: f64 = s.iter().sum();
        assert!((sum - shape.daily_energy_kwh()).abs() < 1e-12);
    }

    #[test]
    fn series_validation_catches_defects() {
        assert!(ScenarioSeries::from_hourly(vec![], vec![], vec![]).is_err());
        assert!(
            ScenarioSeries::from_hourly(vec![1.0, 2.0], vec![0.0], vec![0.0, 0.0]).is_err()
        );
        assert!(ScenarioSeries::from_hourly(vec![-1.0], vec![0.0], vec![0.0]).is_err());
        assert!(ScenarioSeries::from_hourly(vec![f64::NAN], vec![0.0], vec![0.0]).is_err());
        let bad_axis = TimeAxis::Hours(vec![0, 2, 3]);
        assert!(ScenarioSeries::new(bad_axis, vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]).is_err());
    }

    #[test]
    fn axis_step_hours() {
        assert_eq!(TimeAxis::Hours(vec![0, 1, 2]).step_hours().unwrap(), 1.0);
        assert_eq!(TimeAxis::Hours(vec![0, 2, 4]).step_hours().unwrap(), 2.0);
        assert!(TimeAxis::Hours(vec![2, 1]).step_hours().is_err());
        let stamps = TimeAxis::Stamps(vec![
            "2018-01-01T00:00:00".parse().unwrap(),
            "2018-01-01T01:00:00".parse().unwrap(),
        ]);
        assert_eq!(stamps.step_hours().unwrap(), 1.0);
    }
}
