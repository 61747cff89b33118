//! Chronological dispatch simulation for a fixed sizing.
//!
//! The policy is greedy: renewables serve load first, surplus charges the
//! battery, deficit discharges it, leftovers become curtailment or unserved
//! load. For storage with one-way efficiency at most 1 this priority rule
//! minimizes total unserved energy, which `dp_oracle` verifies by exhaustive
//! dynamic programming on a discretized stored-energy lattice.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, ProjectParams};
use crate::error::{Error, Result};
use crate::resources::{AvailabilitySeries, ScenarioSeries};

/// Integer unit counts for one candidate system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sizing {
    pub n_pv: u32,
    pub n_wt: u32,
    pub n_bess: u32,
}

impl Sizing {
    pub fn new(n_pv: u32, n_wt: u32, n_bess: u32) -> Self {
        Sizing { n_pv, n_wt, n_bess }
    }

    /// Derived power and energy ratings; always recomputed from the catalog
    /// so counts and ratings cannot drift apart.
    pub fn ratings(&self, catalog: &Catalog) -> Ratings {
        let pv_kw = self.n_pv as f64 * catalog.pv.unit_power.unwrap_or(0.0);
        let wt_kw = self.n_wt as f64 * catalog.wt.unit_power.unwrap_or(0.0);
        let bess_energy_kwh = self.n_bess as f64 * catalog.bess.unit_energy.unwrap_or(0.0);
        let h_full = catalog.bess.full_charge_hours.unwrap_or(1.0);
        Ratings {
            pv_kw,
            wt_kw,
            bess_energy_kwh,
            bess_power_kw: bess_energy_kwh / h_full,
        }
    }

    /// Component-wise comparison: true when every count is <= the other's.
    pub fn dominated_by(&self, other: &Sizing) -> bool {
        self.n_pv <= other.n_pv && self.n_wt <= other.n_wt && self.n_bess <= other.n_bess
    }
}

impl std::fmt::Display for Sizing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(pv {}, wt {}, bess {})", self.n_pv, self.n_wt, self.n_bess)
    }
}

/// Nameplate ratings implied by a sizing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratings {
    pub pv_kw: f64,
    pub wt_kw: f64,
    pub bess_energy_kwh: f64,
    /// Battery power rating: rated energy over the full-charge hours.
    pub bess_power_kw: f64,
}

/// Horizon totals of a dispatch run, all in kWh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispatchTotals {
    pub unserved_energy: f64,
    pub unmet_reserve_energy: f64,
    pub served_energy: f64,
    pub curtailed_energy: f64,
}

/// Per-step dispatch trace plus horizon totals.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchResult {
    /// PV power actually used, kW.
    pub pv_used: Vec<f64>,
    /// WT power actually used, kW.
    pub wt_used: Vec<f64>,
    /// Battery charging power, kW.
    pub charge: Vec<f64>,
    /// Battery discharging power, kW.
    pub discharge: Vec<f64>,
    /// True when the battery discharges this step.
    pub discharging: Vec<bool>,
    /// Net battery injection, kW: discharge minus charge.
    pub bess_power: Vec<f64>,
    /// Stored energy at the end of the step, kWh.
    pub stored_energy: Vec<f64>,
    /// Load not served, kW.
    pub unserved: Vec<f64>,
    /// Reserve requirement not met, kW.
    pub unmet_reserve: Vec<f64>,
    /// Stored energy before the first step, kWh.
    pub initial_energy: f64,
    pub totals: DispatchTotals,
}

impl DispatchResult {
    pub fn len(&self) -> usize {
        self.unserved.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unserved.is_empty()
    }

    /// Write the per-step trace as CSV, one row per step.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut w = csv::Writer::from_writer(file);
        let map_err = |e: csv::Error| Error::Csv {
            path: path.to_path_buf(),
            reason: e.to_string(),
        };
        w.write_record([
            "step",
            "pv_used_kw",
            "wt_used_kw",
            "charge_kw",
            "discharge_kw",
            "discharging",
            "bess_power_kw",
            "stored_energy_kwh",
            "unserved_kw",
            "unmet_reserve_kw",
        ])
        .map_err(map_err)?;
        for t in 0..self.len() {
            w.write_record([
                t.to_string(),
                self.pv_used[t].to_string(),
                self.wt_used[t].to_string(),
                self.charge[t].to_string(),
                self.discharge[t].to_string(),
                (self.discharging[t] as u8).to_string(),
                self.bess_power[t].to_string(),
                self.stored_energy[t].to_string(),
                self.unserved[t].to_string(),
                self.unmet_reserve[t].to_string(),
            ])
            .map_err(map_err)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Ok(())
    }
}

/// Feasibility verdict with the realized slack ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// Unserved energy over total load energy.
    pub unserved_ratio: f64,
    /// Unmet reserve energy over total load energy.
    pub unmet_reserve_ratio: f64,
}

fn battery_window(catalog: &Catalog, sizing: &Sizing) -> (f64, f64, f64, f64) {
    let ratings = sizing.ratings(catalog);
    let e_rate = ratings.bess_energy_kwh;
    let e_min = catalog.bess.soc_min.unwrap_or(0.0) * e_rate;
    let e_max = catalog.bess.soc_max.unwrap_or(1.0) * e_rate;
    let eta = catalog.bess.one_way_efficiency.unwrap_or(1.0);
    (e_min, e_max, ratings.bess_power_kw, eta)
}

fn check_lengths(series: &ScenarioSeries, availability: &AvailabilitySeries) -> Result<()> {
    if availability.pv_per_kw.len() != series.len() {
        return Err(Error::LengthMismatch {
            context: "pv availability vs series".into(),
            expected: series.len(),
            found: availability.pv_per_kw.len(),
        });
    }
    if availability.wt_per_unit.len() != series.len() {
        return Err(Error::LengthMismatch {
            context: "wt availability vs series".into(),
            expected: series.len(),
            found: availability.wt_per_unit.len(),
        });
    }
    Ok(())
}

/// Greedy chronological dispatch.
///
/// Per step: renewables serve load; surplus charges the battery up to its
/// power rating and SoC headroom; deficit discharges it up to the power
/// rating and the energy above the SoC floor; the remainder is curtailed or
/// unserved. The battery starts full (at `soc_max`).
pub fn simulate_greedy(
    sizing: &Sizing,
    series: &ScenarioSeries,
    availability: &AvailabilitySeries,
    catalog: &Catalog,
    params: &ProjectParams,
) -> Result<DispatchResult> {
    let (_, e_max, _, _) = battery_window(catalog, sizing);
    simulate_greedy_from(e_max, sizing, series, availability, catalog, params)
}

/// As [`simulate_greedy`] but starting from an explicit stored energy,
/// which must lie inside the SoC window.
pub fn simulate_greedy_from(
    initial_energy: f64,
    sizing: &Sizing,
    series: &ScenarioSeries,
    availability: &AvailabilitySeries,
    catalog: &Catalog,
    params: &ProjectParams,
) -> Result<DispatchResult> {
    check_lengths(series, availability)?;
    catalog.validate()?;
    params.validate()?;

    let t_len = series.len();
    let dt = params.step_hours;
    let ratings = sizing.ratings(catalog);
    let (e_min, e_max, p_rate, eta) = battery_window(catalog, sizing);
    if !(initial_energy >= e_min - 1e-9 && initial_energy <= e_max + 1e-9) {
        return Err(Error::invalid(
            "initial_energy",
            format!("{initial_energy} outside SoC window [{e_min}, {e_max}]"),
        ));
    }

    let reserve = unmet_reserve_profile(sizing, series, availability, catalog, params)?;

    let mut out = DispatchResult {
        pv_used: Vec::with_capacity(t_len),
        wt_used: Vec::with_capacity(t_len),
        charge: Vec::with_capacity(t_len),
        discharge: Vec::with_capacity(t_len),
        discharging: Vec::with_capacity(t_len),
        bess_power: Vec::with_capacity(t_len),
        stored_energy: Vec::with_capacity(t_len),
        unserved: Vec::with_capacity(t_len),
        unmet_reserve: reserve,
        initial_energy,
        totals: DispatchTotals {
            unserved_energy: 0.0,
            unmet_reserve_energy: 0.0,
            served_energy: 0.0,
            curtailed_energy: 0.0,
        },
    };

    let mut energy = initial_energy;
    for t in 0..t_len {
        let pv_avail = ratings.pv_kw * availability.pv_per_kw[t];
        let wt_avail = sizing.n_wt as f64 * availability.wt_per_unit[t];
        let avail = pv_avail + wt_avail;
        let load = series.load_kw[t];

        let (pv_used, wt_used, charge, discharge, unserved, curtailed);
        if avail >= load {
            let surplus = avail - load;
            let headroom_kw = (e_max - energy) / (eta * dt);
            charge = surplus.min(p_rate).min(headroom_kw).max(0.0);
            discharge = 0.0;
            unserved = 0.0;
            energy += eta * charge * dt;
            let used = load + charge;
            // PV is consumed before WT when curtailing.
            pv_used = pv_avail.min(used);
            wt_used = used - pv_used;
            curtailed = surplus - charge;
        } else {
            let deficit = load - avail;
            let dischargeable_kw = (energy - e_min) * eta / dt;
            discharge = deficit.min(p_rate).min(dischargeable_kw).max(0.0);
            charge = 0.0;
            energy -= discharge / eta * dt;
            unserved = deficit - discharge;
            pv_used = pv_avail;
            wt_used = wt_avail;
            curtailed = 0.0;
        }

        out.pv_used.push(pv_used);
        out.wt_used.push(wt_used);
        out.charge.push(charge);
        out.discharge.push(discharge);
        out.discharging.push(discharge > 0.0);
        out.bess_power.push(discharge - charge);
        out.stored_energy.push(energy);
        out.unserved.push(unserved);

        out.totals.unserved_energy += unserved * dt;
        out.totals.served_energy += (load - unserved) * dt;
        out.totals.curtailed_energy += curtailed * dt;
    }
    out.totals.unmet_reserve_energy = out.unmet_reserve.iter().sum::<f64>() * dt;
    Ok(out)
}

/// Reserve shortfall per step, independent of dispatch:
/// `max(0, (1+k_res)*load - pv_pred - wt_pred - bess_power_rating)`.
///
/// The battery is credited at its full power rating regardless of state of
/// charge, exactly as the planning formulation defines reserve.
pub fn unmet_reserve_profile(
    sizing: &Sizing,
    series: &ScenarioSeries,
    availability: &AvailabilitySeries,
    catalog: &Catalog,
    params: &ProjectParams,
) -> Result<Vec<f64>> {
    check_lengths(series, availability)?;
    let ratings = sizing.ratings(catalog);
    let margin = 1.0 + params.reserve_factor;
    Ok((0..series.len())
        .map(|t| {
            let supply = ratings.pv_kw * availability.pv_per_kw[t]
                + sizing.n_wt as f64 * availability.wt_per_unit[t]
                + ratings.bess_power_kw;
            (margin * series.load_kw[t] - supply).max(0.0)
        })
        .collect())
}

/// Compare dispatch totals against the unserved-load and reserve caps.
/// Both inequalities are closed: a ratio exactly at its cap is feasible.
pub fn check_feasible(
    result: &DispatchResult,
    series: &ScenarioSeries,
    params: &ProjectParams,
) -> Feasibility {
    let load_energy = series.load_energy_kwh();
    let (unserved_ratio, unmet_reserve_ratio) = if load_energy > 0.0 {
        (
            result.totals.unserved_energy / load_energy,
            result.totals.unmet_reserve_energy / load_energy,
        )
    } else {
        (0.0, 0.0)
    };
    let feasible = result.totals.unserved_energy <= params.max_unserved_fraction * load_energy
        && result.totals.unmet_reserve_energy
            <= params.max_unmet_reserve_fraction * load_energy;
    Feasibility {
        feasible,
        unserved_ratio,
        unmet_reserve_ratio,
    }
}

/// Hard ceiling on `T * soc_levels²` for [`dp_oracle`].
pub const DP_WORK_LIMIT: u64 = 4_000_000_000;

/// Minimal total unserved energy by exhaustive dynamic programming over a
/// discretized stored-energy lattice with `soc_levels` points.
///
/// The optimum is exact on the lattice; against the continuous problem it
/// is accurate to one grid spacing per step. Work is `O(T * soc_levels²)`
/// and refused above [`DP_WORK_LIMIT`].
pub fn dp_oracle(
    sizing: &Sizing,
    series: &ScenarioSeries,
    availability: &AvailabilitySeries,
    catalog: &Catalog,
    params: &ProjectParams,
    soc_levels: usize,
) -> Result<f64> {
    dp_oracle_with_limit(sizing, series, availability, catalog, params, soc_levels, DP_WORK_LIMIT)
}

/// As [`dp_oracle`] with an explicit work ceiling.
pub fn dp_oracle_with_limit(
    sizing: &Sizing,
    series: &ScenarioSeries,
    availability: &AvailabilitySeries,
    catalog: &Catalog,
    params: &ProjectParams,
    soc_levels: usize,
    work_limit: u64,
) -> Result<f64> {
    check_lengths(series, availability)?;
    catalog.validate()?;
    params.validate()?;
    if soc_levels < 2 {
        return Err(Error::invalid("soc_levels", "must be >= 2"));
    }

    let t_len = series.len();
    let dt = params.step_hours;
    let ratings = sizing.ratings(catalog);
    let (e_min, e_max, p_rate, eta) = battery_window(catalog, sizing);

    let deficit_at = |t: usize| -> f64 {
        series.load_kw[t]
            - ratings.pv_kw * availability.pv_per_kw[t]
            - sizing.n_wt as f64 * availability.wt_per_unit[t]
    };

    // Inert battery: unserved load is just the positive deficits.
    if e_max - e_min <= 0.0 || p_rate <= 0.0 {
        return Ok((0..t_len).map(|t| deficit_at(t).max(0.0) * dt).sum());
    }

    let work = t_len as u64 * (soc_levels as u64).pow(2);
    if work > work_limit {
        return Err(Error::ResourceLimit(format!(
            "dp oracle work {work} exceeds limit {work_limit} (T {t_len}, levels {soc_levels})"
        )));
    }

    let levels = soc_levels;
    let de = (e_max - e_min) / (levels - 1) as f64;
    // Largest level jumps the power rating allows in one step. Charging k
    // levels needs power k*de/(eta*dt); discharging k levels delivers
    // k*de*eta/dt.
    let k_charge = ((p_rate * eta * dt / de) + 1e-9).floor().min((levels - 1) as f64) as usize;
    let k_discharge =
        ((p_rate * dt / (eta * de)) + 1e-9).floor().min((levels - 1) as f64) as usize;

    let inf = f64::INFINITY;
    let mut dp_prev = vec![inf; levels];
    // The battery starts full: the top lattice point is exactly e_max.
    dp_prev[levels - 1] = 0.0;
    let mut dp_next = vec![inf; levels];
    // Unserved cost of moving k levels this step, indexed k + k_discharge.
    let mut step_cost = vec![0.0f64; k_discharge + k_charge + 1];

    for t in 0..t_len {
        let deficit = deficit_at(t);
        for (slot, cost) in step_cost.iter_mut().enumerate() {
            let k = slot as isize - k_discharge as isize;
            let battery_kw = if k >= 0 {
                -(k as f64) * de / (eta * dt) // charging consumes power
            } else {
                (-k) as f64 * de * eta / dt // discharging supplies power
            };
            *cost = (deficit - battery_kw).max(0.0) * dt;
        }

        dp_next.fill(inf);
        for (slot, &cost) in step_cost.iter().enumerate() {
            let k = slot as isize - k_discharge as isize;
            // dp_next[j] = min over k of dp_prev[j - k] + cost(k)
            let (j_lo, j_hi) = if k >= 0 {
                (k as usize, levels - 1)
            } else {
                (0, levels - 1 - (-k) as usize)
            };
            let src = &dp_prev[(j_lo as isize - k) as usize..=(j_hi as isize - k) as usize];
            let dst = &mut dp_next[j_lo..=j_hi];
            for (d, &s) in dst.iter_mut().zip(src) {
                let cand = s + cost;
                if cand < *d {
                    *d = cand;
                }
            }
        }
        std::mem::swap(&mut dp_prev, &mut dp_next);
    }

    Ok(dp_prev.iter().cloned().fold(inf, f64::min))
}
