//! Ball-by-ball records: parsing, cleaning, context annotation and
//! smoothed outcome estimation.
//!
//! Input is UTF-8 comma-separated text whose first line is exactly
//! [`HEADER`]. Integer fields must be written canonically (no sign, no
//! leading zeros) and `wicket` is `0` or `1`, so every accepted row
//! re-serializes to the same bytes.

mod naive_bayes;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ActionRows, BallOutcome, ContextBucket, ContextTable, OutcomeDistribution, Phase, RateBand,
    TransitionModel, WicketsBand,
};

pub use naive_bayes::{classify_naive_bayes, train_naive_bayes, LabeledExample, NaiveBayesModel};

pub const HEADER: &str =
    "match_id,innings,over,ball_in_over,batter_id,bowler_id,runs_batter,extras,wicket,dismissal_type";

const FIELDS: usize = 10;

/// Imputed dismissal type for wickets recorded without one.
pub const UNKNOWN_DISMISSAL: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallRecord {
    pub match_id: String,
    pub innings: u8,
    pub over: u32,
    pub ball_in_over: u8,
    pub batter_id: String,
    pub bowler_id: String,
    pub runs_batter: u8,
    pub extras: u32,
    pub wicket: bool,
    pub dismissal_type: Option<String>,
}

impl BallRecord {
    /// Model outcome of the delivery. Runs are batter runs plus extras; 5
    /// counts as a four and anything above 6 as a six.
    pub fn outcome(&self) -> BallOutcome {
        if self.wicket {
            return BallOutcome::Wicket;
        }
        match self.runs_batter as u32 + self.extras {
            5 => BallOutcome::Four,
            t if t >= 6 => BallOutcome::Six,
            t => BallOutcome::from_runs(t).expect("0..=4 are model outcomes"),
        }
    }

    pub fn total_runs(&self) -> u32 {
        self.runs_batter as u32 + self.extras
    }

    fn key(&self) -> (&str, u8, u32, u8) {
        (&self.match_id, self.innings, self.over, self.ball_in_over)
    }

    fn fields(&self) -> [String; FIELDS] {
        [
            self.match_id.clone(),
            self.innings.to_string(),
            self.over.to_string(),
            self.ball_in_over.to_string(),
            self.batter_id.clone(),
            self.bowler_id.clone(),
            self.runs_batter.to_string(),
            self.extras.to_string(),
            if self.wicket { "1" } else { "0" }.to_string(),
            self.dismissal_type.clone().unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseIssue {
    /// 1-based line number in the source.
    pub line: u64,
    pub reason: String,
}

fn canonical_uint(field: &str, name: &str) -> std::result::Result<u32, String> {
    match field.parse::<u32>() {
        Ok(n) if n.to_string() == field => Ok(n),
        Ok(_) => Err(format!("{name} {field:?} is not written canonically")),
        Err(_) => Err(format!("{name} {field:?} is not a non-negative integer")),
    }
}

fn parse_row(row: &csv::StringRecord) -> std::result::Result<BallRecord, String> {
    if row.len() != FIELDS {
        return Err(format!("expected {FIELDS} fields, found {}", row.len()));
    }
    let innings = canonical_uint(&row[1], "innings")?;
    if !(1..=2).contains(&innings) {
        return Err(format!("innings {innings} out of range"));
    }
    let over = canonical_uint(&row[2], "over")?;
    let ball = canonical_uint(&row[3], "ball_in_over")?;
    if !(1..=6).contains(&ball) {
        return Err(format!("ball_in_over {ball} out of range"));
    }
    let runs = canonical_uint(&row[6], "runs_batter")?;
    if runs > 6 {
        return Err("runs out of range".to_string());
    }
    let extras = canonical_uint(&row[7], "extras")?;
    let wicket = match &row[8] {
        "0" => false,
        "1" => true,
        other => return Err(format!("wicket {other:?} must be 0 or 1")),
    };
    if row[0].is_empty() {
        return Err("match_id is empty".to_string());
    }
    Ok(BallRecord {
        match_id: row[0].to_string(),
        innings: innings as u8,
        over,
        ball_in_over: ball as u8,
        batter_id: row[4].to_string(),
        bowler_id: row[5].to_string(),
        runs_batter: runs as u8,
        extras,
        wicket,
        dismissal_type: (!row[9].is_empty()).then(|| row[9].to_string()),
    })
}

/// Parses delimited ball-by-ball text. Bad rows become issues; only a
/// missing or wrong header, or an unreadable stream, is fatal.
pub fn parse_ball_by_ball<R: Read>(source: R) -> Result<(Vec<BallRecord>, Vec<ParseIssue>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut rows = reader.records();
    let header = match rows.next() {
        None => return Err(Error::MissingHeader),
        Some(row) => row?,
    };
    let found = header.iter().collect::<Vec<_>>().join(",");
    if found != HEADER {
        return Err(Error::BadHeader { found });
    }
    let mut records = Vec::new();
    let mut issues = Vec::new();
    for row in rows {
        match row {
            Ok(row) => {
                let line = row.position().map_or(0, |p| p.line());
                match parse_row(&row) {
                    Ok(r) => records.push(r),
                    Err(reason) => issues.push(ParseIssue { line, reason }),
                }
            }
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(e) => issues.push(ParseIssue {
                line: e.position().map_or(0, |p| p.line()),
                reason: e.to_string(),
            }),
        }
    }
    Ok((records, issues))
}

pub fn parse_ball_by_ball_str(text: &str) -> Result<(Vec<BallRecord>, Vec<ParseIssue>)> {
    parse_ball_by_ball(text.as_bytes())
}

/// Writes the header and one line per record, `\n`-terminated.
pub fn write_ball_by_ball<W: Write>(records: &[BallRecord], sink: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    writer.write_record(HEADER.split(','))?;
    for r in records {
        writer.write_record(r.fields())?;
    }
    writer.flush()?;
    Ok(())
}

pub fn ball_by_ball_to_string(records: &[BallRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_ball_by_ball(records, &mut buf)?;
    Ok(String::from_utf8(buf).expect("records are UTF-8"))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub duplicates: usize,
    pub imputed_dismissals: usize,
    pub remapped_fives: usize,
}

impl CleaningReport {
    pub fn is_clean(&self) -> bool {
        *self == Self::default()
    }
}

/// Drops repeated (match, innings, over, ball) keys keeping the first,
/// fills missing dismissal types on wickets with `"unknown"`, and rewrites
/// `runs_batter = 5` as 4. Idempotent.
pub fn clean_records(records: &[BallRecord]) -> (Vec<BallRecord>, CleaningReport) {
    let mut report = CleaningReport::default();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        if !seen.insert(r.key()) {
            report.duplicates += 1;
            continue;
        }
        let mut r = r.clone();
        if r.wicket && r.dismissal_type.is_none() {
            r.dismissal_type = Some(UNKNOWN_DISMISSAL.to_string());
            report.imputed_dismissals += 1;
        }
        if r.runs_batter == 5 {
            r.runs_batter = 4;
            report.remapped_fives += 1;
        }
        out.push(r);
    }
    (out, report)
}

/// A delivery reduced to what estimation needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub bucket: ContextBucket,
    pub outcome: BallOutcome,
}

/// Context bucket of every record, in input order.
///
/// Deliveries are replayed per (match, innings) in (over, ball) order to
/// track runs and wickets before each ball. Balls bowled are taken from
/// the ball's position. In a second innings whose first innings is present,
/// the rate band uses runs still needed over the `innings_balls` budget;
/// otherwise it falls back to the current scoring rate (MEDIUM before the
/// first ball).
pub fn annotate_contexts(records: &[BallRecord], innings_balls: u32) -> Vec<ContextBucket> {
    let mut groups: BTreeMap<(&str, u8), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        groups.entry((&r.match_id, r.innings)).or_default().push(i);
    }
    let mut totals: HashMap<&str, u32> = HashMap::new();
    for r in records.iter().filter(|r| r.innings == 1) {
        *totals.entry(&r.match_id).or_default() += r.total_runs();
    }
    let placeholder = ContextBucket::new(Phase::Powerplay, WicketsBand::Few, RateBand::Low);
    let mut out = vec![placeholder; records.len()];
    for ((match_id, innings), mut idx) in groups {
        idx.sort_by_key(|&i| (records[i].over, records[i].ball_in_over));
        let target = (innings == 2)
            .then(|| totals.get(match_id).map(|t| t + 1))
            .flatten();
        let (mut runs, mut down) = (0u32, 0u32);
        for i in idx {
            let r = &records[i];
            let bowled = r.over * 6 + r.ball_in_over as u32 - 1;
            let rate = match target {
                Some(t) => RateBand::for_chase(
                    t.saturating_sub(runs),
                    innings_balls.saturating_sub(bowled),
                ),
                None if bowled == 0 => RateBand::Medium,
                None => RateBand::from_rate(runs as f64 * 6.0 / bowled as f64),
            };
            out[i] = ContextBucket::new(
                Phase::from_over(r.over),
                WicketsBand::from_wickets_down(down),
                rate,
            );
            runs += r.total_runs();
            down += r.wicket as u32;
        }
    }
    out
}

pub fn observations(records: &[BallRecord], innings_balls: u32) -> Vec<Observation> {
    annotate_contexts(records, innings_balls)
        .into_iter()
        .zip(records)
        .map(|(bucket, r)| Observation {
            bucket,
            outcome: r.outcome(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    pub smoothing_alpha: f64,
    pub min_samples: usize,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            smoothing_alpha: 1.0,
            min_samples: 50,
        }
    }
}

impl EstimationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.smoothing_alpha >= 0.0) || !self.smoothing_alpha.is_finite() {
            return Err(Error::InvalidParams(format!(
                "smoothing_alpha must be a finite value >= 0, got {}",
                self.smoothing_alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub distribution: OutcomeDistribution,
    /// Raw outcome counts the estimate was computed from.
    pub counts: [u64; BallOutcome::COUNT],
    /// Deliveries observed in the requested bucket.
    pub bucket_samples: usize,
    /// True when the bucket was too thin and the global estimate was used.
    pub used_global: bool,
}

fn smoothed(counts: &[u64; BallOutcome::COUNT], alpha: f64) -> Result<OutcomeDistribution> {
    let n: u64 = counts.iter().sum();
    let denom = n as f64 + alpha * BallOutcome::COUNT as f64;
    if denom == 0.0 {
        return Err(Error::EmptyEstimate);
    }
    let probs = counts.map(|c| (c as f64 + alpha) / denom);
    Ok(OutcomeDistribution::new(probs)?.quantized())
}

fn count(obs: impl Iterator<Item = BallOutcome>) -> [u64; BallOutcome::COUNT] {
    let mut counts = [0u64; BallOutcome::COUNT];
    for o in obs {
        counts[o.index()] += 1;
    }
    counts
}

/// Additively smoothed outcome frequencies within `bucket`, falling back to
/// all observations when the bucket holds fewer than `min_samples`.
pub fn estimate_outcome_distribution(
    obs: &[Observation],
    bucket: ContextBucket,
    config: &EstimationConfig,
) -> Result<Estimate> {
    config.validate()?;
    let local = count(obs.iter().filter(|o| o.bucket == bucket).map(|o| o.outcome));
    let bucket_samples = local.iter().sum::<u64>() as usize;
    let used_global = bucket_samples < config.min_samples;
    let counts = if used_global {
        count(obs.iter().map(|o| o.outcome))
    } else {
        local
    };
    Ok(Estimate {
        distribution: smoothed(&counts, config.smoothing_alpha)?,
        counts,
        bucket_samples,
        used_global,
    })
}

/// Estimate over all observations regardless of bucket.
pub fn estimate_global(obs: &[Observation], config: &EstimationConfig) -> Result<Estimate> {
    config.validate()?;
    let counts = count(obs.iter().map(|o| o.outcome));
    Ok(Estimate {
        distribution: smoothed(&counts, config.smoothing_alpha)?,
        counts,
        bucket_samples: counts.iter().sum::<u64>() as usize,
        used_global: true,
    })
}

/// Transition model estimated from records.
///
/// Historical data carries no action labels, so every estimated
/// distribution is treated as the BALANCED row and the other actions are
/// tilted from it. The global estimate supplies the base rows; each bucket
/// with at least `min_samples` deliveries gets its own override.
pub fn estimate_model(
    records: &[BallRecord],
    config: &EstimationConfig,
    innings_balls: u32,
    squad_wickets: u32,
) -> Result<TransitionModel> {
    let obs = observations(records, innings_balls);
    let global = estimate_global(&obs, config)?;
    let base = ActionRows::from_baseline(&global.distribution)?.quantized();
    let mut overrides = BTreeMap::new();
    for bucket in ContextBucket::all() {
        let est = estimate_outcome_distribution(&obs, bucket, config)?;
        if !est.used_global {
            overrides.insert(bucket, ActionRows::from_baseline(&est.distribution)?.quantized());
        }
    }
    Ok(TransitionModel::new("estimated", base).with_contexts(ContextTable {
        innings_balls,
        squad_wickets,
        overrides,
    }))
}
