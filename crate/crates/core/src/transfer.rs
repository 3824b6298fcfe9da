//! The chase engine re-parameterized for two engineering problems.
//!
//! Manufacturing: units still needed, production periods left and working
//! machines, with each intensity level drawing units produced from
//! {0, 1, 2, 3, 4, 6} or a breakdown that idles one machine. Inventory:
//! stock level as the state, order quantity as the action, stochastic
//! demand, lost sales below the minimum stock and optional spoilage.

use std::collections::BTreeMap;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::doc::{self, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::mdp::{Horizon, MdpBuilder, MdpInstance, Transition};
use crate::model::{BallOutcome, BattingAction, Bounds, MatchState, OutcomeDistribution, TransitionModel};
use crate::solver::{value_iterate, MdpSolution};

/// Intensity names used when copying rows from a chase model, in the
/// same order as the batting actions.
pub const INTENSITY_NAMES: [&str; BattingAction::COUNT] = ["IDLE", "LOW", "STANDARD", "HIGH", "MAXIMUM"];

const PRODUCTION_FIELDS: [(BallOutcome, &str); BallOutcome::COUNT] = [
    (BallOutcome::Dot, "units_0"),
    (BallOutcome::One, "units_1"),
    (BallOutcome::Two, "units_2"),
    (BallOutcome::Three, "units_3"),
    (BallOutcome::Four, "units_4"),
    (BallOutcome::Six, "units_6"),
    (BallOutcome::Wicket, "breakdown"),
];

/// Per-period production distribution at one intensity. The wicket slot
/// of the underlying row is the breakdown probability.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityLevel {
    pub name: String,
    pub row: OutcomeDistribution,
}

#[derive(Deserialize)]
struct RawIntensity {
    name: String,
    row: BTreeMap<String, f64>,
}

struct ProductionRow<'a>(&'a OutcomeDistribution);

impl Serialize for ProductionRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(PRODUCTION_FIELDS.len()))?;
        for (o, field) in PRODUCTION_FIELDS {
            let raw = serde_json::value::RawValue::from_string(doc::format_fixed12(self.0.prob(o)))
                .map_err(serde::ser::Error::custom)?;
            map.serialize_entry(field, &raw)?;
        }
        map.end()
    }
}

impl Serialize for IntensityLevel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("IntensityLevel", 2)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("row", &ProductionRow(&self.row))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for IntensityLevel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawIntensity::deserialize(d)?;
        let mut named = BTreeMap::new();
        for (field, p) in raw.row {
            let o = PRODUCTION_FIELDS
                .iter()
                .find(|(_, f)| *f == field)
                .map(|(o, _)| *o)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown production field {field:?}")))?;
            named.insert(o.field_name().to_string(), p);
        }
        let row = OutcomeDistribution::from_named(&named, &format!("intensity {}", raw.name))
            .map_err(serde::de::Error::custom)?;
        Ok(Self { name: raw.name, row })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManufacturingParams {
    pub units_needed: u32,
    pub periods_remaining: u32,
    pub machines_working: u32,
    pub intensity_rows: Vec<IntensityLevel>,
}

#[derive(Serialize, Deserialize)]
struct ManufacturingDocument {
    schema_version: u32,
    manufacturing: ManufacturingParams,
}

impl ManufacturingParams {
    /// Copies every action row of a context-free chase model into an
    /// intensity level; `start` becomes the initial order.
    pub fn from_chase_model(model: &TransitionModel, start: MatchState) -> Result<Self> {
        if model.contexts().is_some_and(|t| !t.overrides.is_empty()) {
            return Err(Error::InvalidParams(
                "manufacturing rows are period-independent; the model has context overrides".into(),
            ));
        }
        Ok(Self {
            units_needed: start.runs_needed,
            periods_remaining: start.balls_remaining,
            machines_working: start.wickets_in_hand,
            intensity_rows: BattingAction::ALL
                .iter()
                .zip(INTENSITY_NAMES)
                .map(|(&a, name)| IntensityLevel {
                    name: name.to_string(),
                    row: *model.row(a),
                })
                .collect(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.intensity_rows.is_empty() {
            return Err(Error::InvalidParams("at least one intensity level is required".into()));
        }
        Ok(())
    }

    pub fn to_document_string(&self) -> Result<String> {
        doc::to_document(&ManufacturingDocument {
            schema_version: SCHEMA_VERSION,
            manufacturing: self.clone(),
        })
    }

    pub fn from_document_str(text: &str) -> Result<Self> {
        let d: ManufacturingDocument = doc::from_document(text)?;
        d.manufacturing.validate()?;
        Ok(d.manufacturing)
    }
}

/// Label of manufacturing state (units, periods, machines).
pub fn manufacturing_label(units: u32, periods: u32, machines: u32) -> String {
    format!("{units},{periods},{machines}")
}

/// States (u, t, m) for every u, t, m up to the initial order. Finishing
/// the order is worth 1 and takes precedence; running out of periods or
/// machines first is worth 0. Undiscounted with a finite horizon.
pub fn build_manufacturing_mdp(params: &ManufacturingParams) -> Result<MdpInstance> {
    params.validate()?;
    let (big_u, big_t, big_m) = (params.units_needed, params.periods_remaining, params.machines_working);
    let index = |u: u32, t: u32, m: u32| -> usize {
        ((t as usize * (big_u as usize + 1)) + u as usize) * (big_m as usize + 1) + m as usize
    };
    let actions = params.intensity_rows.iter().map(|l| l.name.clone()).collect();
    let mut builder = MdpBuilder::new(actions, 1.0, Horizon::Finite(big_t));
    for t in 0..=big_t {
        for u in 0..=big_u {
            for m in 0..=big_m {
                let i = builder.add_state(manufacturing_label(u, t, m));
                debug_assert_eq!(i, index(u, t, m));
                if u == 0 {
                    builder.set_absorbing(i, 1.0);
                    continue;
                }
                if t == 0 || m == 0 {
                    builder.set_absorbing(i, 0.0);
                    continue;
                }
                for (a, level) in params.intensity_rows.iter().enumerate() {
                    let succ = level
                        .row
                        .iter()
                        .filter(|&(_, p)| p > 0.0)
                        .map(|(o, p)| {
                            let next = match o.runs() {
                                Some(units) => index(u.saturating_sub(units), t - 1, m),
                                None => index(u, t - 1, m - 1),
                            };
                            Transition::new(next, p, 0.0)
                        })
                        .collect();
                    builder.set_transitions(i, a, succ);
                }
            }
        }
    }
    builder.build()
}

/// Solves the manufacturing instance by value iteration; the finite
/// horizon makes the values exact after `periods + 1` sweeps.
pub fn solve_manufacturing(params: &ManufacturingParams) -> Result<(MdpInstance, MdpSolution)> {
    let mdp = build_manufacturing_mdp(params)?;
    let solution = value_iterate(&mdp, 1e-12, params.periods_remaining as usize + 2)?;
    Ok((mdp, solution))
}

/// Bounds of the chase instance that mirrors `params`.
pub fn mirrored_bounds(params: &ManufacturingParams) -> Bounds {
    Bounds::new(params.units_needed, params.periods_remaining, params.machines_working)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryParams {
    /// Lowest stock level; negative values allow that many backlogged
    /// units, and demand beyond it is lost.
    pub min_stock: i64,
    pub max_stock: i64,
    pub max_order: u32,
    pub demand_distribution: BTreeMap<u32, f64>,
    pub holding_cost: f64,
    pub stockout_cost: f64,
    pub order_cost: f64,
    pub discount: f64,
    /// Probability that each unit carried into the next period spoils.
    #[serde(default)]
    pub spoilage: f64,
}

#[derive(Serialize, Deserialize)]
struct InventoryDocument {
    schema_version: u32,
    inventory: InventoryParams,
}

impl InventoryParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.min_stock > self.max_stock {
            return bad(format!("min_stock {} exceeds max_stock {}", self.min_stock, self.max_stock));
        }
        if self.demand_distribution.is_empty() {
            return bad("demand distribution is empty".into());
        }
        if self.demand_distribution.values().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return bad("demand probabilities must be finite and non-negative".into());
        }
        let total: f64 = self.demand_distribution.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("demand probabilities sum to {total}"));
        }
        for (name, c) in [
            ("holding_cost", self.holding_cost),
            ("stockout_cost", self.stockout_cost),
            ("order_cost", self.order_cost),
        ] {
            if !(c >= 0.0) || !c.is_finite() {
                return bad(format!("{name} must be finite and non-negative, got {c}"));
            }
        }
        if !(0.0..1.0).contains(&self.discount) {
            return bad(format!("discount {} outside [0, 1)", self.discount));
        }
        if !(0.0..=1.0).contains(&self.spoilage) {
            return bad(format!("spoilage {} outside [0, 1]", self.spoilage));
        }
        Ok(())
    }

    pub fn to_document_string(&self) -> Result<String> {
        doc::to_document(&InventoryDocument {
            schema_version: SCHEMA_VERSION,
            inventory: self.clone(),
        })
    }

    pub fn from_document_str(text: &str) -> Result<Self> {
        let d: InventoryDocument = doc::from_document(text)?;
        d.inventory.validate()?;
        Ok(d.inventory)
    }
}

fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n as usize + 1];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[n as usize] = 1.0;
        return pmf;
    }
    let mut coef = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            coef *= (n - k + 1) as f64 / k as f64;
        }
        pmf[k as usize] = coef * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
    }
    pmf
}

/// One period: the order arrives (stock capped at `max_stock`, the excess
/// still paid for), demand is served down to `min_stock` with the rest
/// lost, then each positive unit carried over spoils independently.
/// Reward is minus the order cost per unit ordered, the stockout cost per
/// unit lost or backlogged, and the holding cost per unit carried after
/// spoilage.
pub fn build_inventory_mdp(params: &InventoryParams) -> Result<MdpInstance> {
    params.validate()?;
    let lo = params.min_stock;
    let actions = (0..=params.max_order).map(|q| q.to_string()).collect();
    let mut builder = MdpBuilder::new(actions, params.discount, Horizon::Unbounded);
    for s in lo..=params.max_stock {
        builder.add_state(s.to_string());
    }
    for s in lo..=params.max_stock {
        let i = (s - lo) as usize;
        for q in 0..=params.max_order {
            let stocked = (s + q as i64).min(params.max_stock);
            // (next state, cost bits) -> probability
            let mut merged: BTreeMap<(usize, u64), f64> = BTreeMap::new();
            for (&d, &pd) in &params.demand_distribution {
                if pd == 0.0 {
                    continue;
                }
                let after = stocked - d as i64;
                let lost = (lo - after).max(0) as f64;
                let after = after.max(lo);
                let carried = after.max(0) as u64;
                for (spoiled, ps) in binomial_pmf(carried, params.spoilage).into_iter().enumerate() {
                    if ps == 0.0 {
                        continue;
                    }
                    let end = after - spoiled as i64;
                    let backlog = (-end).max(0) as f64;
                    let cost = params.order_cost * q as f64
                        + params.stockout_cost * (lost + backlog)
                        + params.holding_cost * end.max(0) as f64;
                    *merged.entry(((end - lo) as usize, cost.to_bits())).or_default() += pd * ps;
                }
            }
            let succ = merged
                .into_iter()
                .map(|((next, cost), p)| Transition::new(next, p, -f64::from_bits(cost)))
                .collect();
            builder.set_transitions(i, q as usize, succ);
        }
    }
    builder.build()
}

pub fn solve_inventory(params: &InventoryParams, tolerance: f64, max_sweeps: usize) -> Result<(MdpInstance, MdpSolution)> {
    let mdp = build_inventory_mdp(params)?;
    let solution = value_iterate(&mdp, tolerance, max_sweeps)?;
    Ok((mdp, solution))
}
