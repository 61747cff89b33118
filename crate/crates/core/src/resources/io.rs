//! CSV ingestion and emission for scenarios and power curves.
//!
//! Weather files carry `timestamp, ghi_wm2, wind_ms`; load files carry
//! `timestamp, load_kw`; curve files carry `speed_ms, power_kw`. Headers are
//! required, extra columns are ignored, and timestamps are either integer
//! hour indices or ISO-8601 date-times (`2018-06-01T13:00:00`, space
//! separator also accepted). Written artifacts round-trip through the
//! readers unchanged.

use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;

use super::{PowerCurve, ScenarioSeries, TimeAxis};
use crate::error::{Error, Result};

/// Header names to look up in weather and load files. `Default` matches the
/// documented column names.
#[derive(Debug, Clone)]
pub struct ColumnMap {
    pub timestamp: String,
    pub ghi: String,
    pub wind: String,
    pub load: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            timestamp: "timestamp".into(),
            ghi: "ghi_wm2".into(),
            wind: "wind_ms".into(),
            load: "load_kw".into(),
        }
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn column_index(reader: &mut csv::Reader<std::fs::File>, path: &Path, name: &str) -> Result<usize> {
    let headers = reader.headers().map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Csv {
            path: path.to_path_buf(),
            reason: format!("missing required column '{name}'"),
        })
}

/// Accumulates either integer hour indices or calendar stamps, rejecting a
/// mix of the two.
enum AxisBuilder {
    Empty,
    Hours(Vec<i64>),
    Stamps(Vec<NaiveDateTime>),
}

impl AxisBuilder {
    fn push(&mut self, raw: &str, path: &Path, row: usize) -> Result<()> {
        if let Ok(h) = raw.parse::<i64>() {
            return match self {
                AxisBuilder::Empty => {
                    *self = AxisBuilder::Hours(vec![h]);
                    Ok(())
                }
                AxisBuilder::Hours(v) => {
                    v.push(h);
                    Ok(())
                }
                AxisBuilder::Stamps(_) => Err(Error::BadTimestamp {
                    path: path.to_path_buf(),
                    row,
                }),
            };
        }
        let stamp = parse_stamp(raw).ok_or_else(|| Error::BadTimestamp {
            path: path.to_path_buf(),
            row,
        })?;
        match self {
            AxisBuilder::Empty => {
                *self = AxisBuilder::Stamps(vec![stamp]);
                Ok(())
            }
            AxisBuilder::Stamps(v) => {
                v.push(stamp);
                Ok(())
            }
            AxisBuilder::Hours(_) => Err(Error::BadTimestamp {
                path: path.to_path_buf(),
                row,
            }),
        }
    }

    fn finish(self, path: &Path) -> Result<TimeAxis> {
        let axis = match self {
            AxisBuilder::Empty => {
                return Err(Error::Csv {
                    path: path.to_path_buf(),
                    reason: "file has no data rows".into(),
                })
            }
            AxisBuilder::Hours(v) => TimeAxis::Hours(v),
            AxisBuilder::Stamps(v) => TimeAxis::Stamps(v),
        };
        check_axis(&axis, path)?;
        Ok(axis)
    }
}

fn parse_stamp(raw: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S")
        .or_else(|_| NaiveDateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S"))
        .ok()
}

/// Strict monotonicity and uniform spacing, reported against the file.
fn check_axis(axis: &TimeAxis, path: &Path) -> Result<()> {
    let bad_row = match axis {
        TimeAxis::Hours(v) => {
            let d = if v.len() >= 2 { v[1] - v[0] } else { 1 };
            if d < 1 {
                Some(1)
            } else {
                v.windows(2).position(|w| w[1] - w[0] != d).map(|i| i + 1)
            }
        }
        TimeAxis::Stamps(v) => {
            if v.len() >= 2 && (v[1] - v[0]).num_seconds() <= 0 {
                Some(1)
            } else {
                let d = if v.len() >= 2 { v[1] - v[0] } else { chrono::Duration::hours(1) };
                v.windows(2).position(|w| w[1] - w[0] != d).map(|i| i + 1)
            }
        }
    };
    match bad_row {
        Some(row) => Err(Error::BadTimestamp {
            path: path.to_path_buf(),
            row,
        }),
        None => Ok(()),
    }
}

fn parse_value(
    raw: &str,
    path: &Path,
    column: &'static str,
    row: usize,
) -> Result<f64> {
    let v: f64 = raw.parse().map_err(|_| Error::Csv {
        path: path.to_path_buf(),
        reason: format!("cannot parse '{raw}' in column {column} at data row {row}"),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFinite {
            path: path.to_path_buf(),
            column,
            row,
        });
    }
    if v < 0.0 {
        return Err(Error::NegativeValue {
            path: path.to_path_buf(),
            column,
            row,
        });
    }
    Ok(v)
}

/// Read a weather file: `(timestamps, ghi_wm2, wind_ms)`.
pub fn read_weather_csv(path: &Path, columns: &ColumnMap) -> Result<(TimeAxis, Vec<f64>, Vec<f64>)> {
    let mut reader = open_reader(path)?;
    let c_ts = column_index(&mut reader, path, &columns.timestamp)?;
    let c_ghi = column_index(&mut reader, path, &columns.ghi)?;
    let c_wind = column_index(&mut reader, path, &columns.wind)?;

    let mut axis = AxisBuilder::Empty;
    let mut ghi = Vec::new();
    let mut wind = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::Csv {
                path: path.to_path_buf(),
                reason: format!("short record at data row {row}"),
            })
        };
        axis.push(field(c_ts)?, path, row)?;
        ghi.push(parse_value(field(c_ghi)?, path, "ghi_wm2", row)?);
        wind.push(parse_value(field(c_wind)?, path, "wind_ms", row)?);
    }
    Ok((axis.finish(path)?, ghi, wind))
}

/// Read a load file: `(timestamps, load_kw)`.
pub fn read_load_csv(path: &Path, columns: &ColumnMap) -> Result<(TimeAxis, Vec<f64>)> {
    let mut reader = open_reader(path)?;
    let c_ts = column_index(&mut reader, path, &columns.timestamp)?;
    let c_load = column_index(&mut reader, path, &columns.load)?;

    let mut axis = AxisBuilder::Empty;
    let mut load = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::Csv {
                path: path.to_path_buf(),
                reason: format!("short record at data row {row}"),
            })
        };
        axis.push(field(c_ts)?, path, row)?;
        load.push(parse_value(field(c_load)?, path, "load_kw", row)?);
    }
    Ok((axis.finish(path)?, load))
}

/// Read aligned weather and load files into one validated scenario.
pub fn read_scenario(weather_path: &Path, load_path: &Path) -> Result<ScenarioSeries> {
    read_scenario_with(weather_path, load_path, &ColumnMap::default())
}

/// As [`read_scenario`] with custom column names.
pub fn read_scenario_with(
    weather_path: &Path,
    load_path: &Path,
    columns: &ColumnMap,
) -> Result<ScenarioSeries> {
    let (w_axis, ghi, wind) = read_weather_csv(weather_path, columns)?;
    let (l_axis, load) = read_load_csv(load_path, columns)?;
    if l_axis.len() != w_axis.len() {
        return Err(Error::LengthMismatch {
            context: format!(
                "{} vs {}",
                load_path.display(),
                weather_path.display()
            ),
            expected: w_axis.len(),
            found: l_axis.len(),
        });
    }
    if l_axis != w_axis {
        return Err(Error::Csv {
            path: load_path.to_path_buf(),
            reason: "timestamps do not match the weather file".into(),
        });
    }
    ScenarioSeries::new(w_axis, ghi, wind, load)
}

fn stamp_string(axis: &TimeAxis, i: usize) -> String {
    match axis {
        TimeAxis::Hours(v) => v[i].to_string(),
        TimeAxis::Stamps(v) => v[i].format("%Y-%m-%dT%H:%M:%S").to_string(),
    }
}

fn create_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn io_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Csv {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

/// Write a scenario back out as the documented weather and load CSV pair.
pub fn write_scenario(
    series: &ScenarioSeries,
    weather_path: &Path,
    load_path: &Path,
) -> Result<()> {
    let mut w = create_writer(weather_path)?;
    w.write_record(["timestamp", "ghi_wm2", "wind_ms"])
        .map_err(io_err(weather_path))?;
    for i in 0..series.len() {
        w.write_record([
            stamp_string(&series.timestamps, i),
            series.ghi_wm2[i].to_string(),
            series.wind_ms[i].to_string(),
        ])
        .map_err(io_err(weather_path))?;
    }
    w.flush().map_err(|e| Error::Io {
        path: weather_path.to_path_buf(),
        source: e,
    })?;

    let mut l = create_writer(load_path)?;
    l.write_record(["timestamp", "load_kw"]).map_err(io_err(load_path))?;
    for i in 0..series.len() {
        l.write_record([stamp_string(&series.timestamps, i), series.load_kw[i].to_string()])
            .map_err(io_err(load_path))?;
    }
    l.flush().map_err(|e| Error::Io {
        path: load_path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

pub(super) fn parse_power_curve_text(text: &str, origin: &str) -> Result<PowerCurve> {
    let path = PathBuf::from(origin);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Csv {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    let c_speed = headers.iter().position(|h| h == "speed_ms").ok_or_else(|| Error::Csv {
        path: path.clone(),
        reason: "missing required column 'speed_ms'".into(),
    })?;
    let c_power = headers.iter().position(|h| h == "power_kw").ok_or_else(|| Error::Csv {
        path: path.clone(),
        reason: "missing required column 'power_kw'".into(),
    })?;
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        let get = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::Csv {
                path: path.clone(),
                reason: format!("short record at data row {row}"),
            })
        };
        let s = parse_value(get(c_speed)?, &path, "speed_ms", row)?;
        let p = parse_value(get(c_power)?, &path, "power_kw", row)?;
        points.push((s, p));
    }
    PowerCurve::new(points)
}

/// Read a turbine power curve (`speed_ms, power_kw`).
pub fn read_power_curve(path: &Path) -> Result<PowerCurve> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_power_curve_text(&text, &path.display().to_string())
}

/// Write a power curve in the same format [`read_power_curve`] accepts.
pub fn write_power_curve(curve: &PowerCurve, path: &Path) -> Result<()> {
    let mut w = create_writer(path)?;
    w.write_record(["speed_ms", "power_kw"]).map_err(io_err(path))?;
    for &(s, p) in curve.points() {
        w.write_record([s.to_string(), p.to_string()]).map_err(io_err(path))?;
    }
    w.flush().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}
