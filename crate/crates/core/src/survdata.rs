//! Right-censored lifetime data: CSV ingestion, the Kaplan–Meier
//! product-limit estimator, model-versus-KM comparison tables and simulation
//! of censored samples.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::{KumIwParams, Sampler};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

/// Shortest text that parses back to the same `f64`, switching to
/// exponent notation outside `[1e-4, 1e15)`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Whether an observed time is a failure or a censoring time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Event,
    Censored,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Event => 1,
            Status::Censored => 0,
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code.trim() {
            "1" => Some(Status::Event),
            "0" => Some(Status::Censored),
            _ => None,
        }
    }

    pub fn is_event(self) -> bool {
        self == Status::Event
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensoredObs {
    time: f64,
    status: Status,
}

impl CensoredObs {
    pub fn new(time: f64, status: Status) -> Result<Self> {
        if time > 0.0 && time.is_finite() {
            Ok(Self { time, status })
        } else {
            Err(Error::data(None, format!("time must be positive and finite, got {time}")))
        }
    }

    pub fn event(time: f64) -> Result<Self> {
        Self::new(time, Status::Event)
    }

    pub fn censored(time: f64) -> Result<Self> {
        Self::new(time, Status::Censored)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn status(&self) -> Status {
        self.status
    }
}

/// A nonempty list of censored observations in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredDataset {
    name: String,
    observations: Vec<CensoredObs>,
}

impl CensoredDataset {
    pub fn new(name: impl Into<String>, observations: Vec<CensoredObs>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::data(None, "empty dataset"));
        }
        Ok(Self {
            name: name.into(),
            observations,
        })
    }

    /// Builds a dataset from parallel time and event-indicator slices.
    pub fn from_parts(name: impl Into<String>, times: &[f64], events: &[bool]) -> Result<Self> {
        if times.len() != events.len() {
            return Err(Error::data(None, "times and statuses differ in length"));
        }
        let obs = times
            .iter()
            .zip(events)
            .enumerate()
            .map(|(i, (&t, &e))| {
                CensoredObs::new(t, if e { Status::Event } else { Status::Censored })
                    .map_err(|_| Error::data(Some(i + 1), format!("time must be positive and finite, got {t}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, obs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn observations(&self) -> &[CensoredObs] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    /// Always false: datasets are nonempty.
    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn n_events(&self) -> usize {
        self.observations.iter().filter(|o| o.status.is_event()).count()
    }

    pub fn n_censored(&self) -> usize {
        self.len() - self.n_events()
    }

    pub fn times(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.time).collect()
    }

    pub fn event_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.observations.iter().filter(|o| o.status.is_event()).map(|o| o.time)
    }

    /// Error unless at least one observation is an event.
    pub fn require_events(&self) -> Result<()> {
        if self.n_events() == 0 {
            Err(Error::data(None, format!("dataset '{}' has no events", self.name)))
        } else {
            Ok(())
        }
    }

    /// Writes `time,status` rows with status 1 for events and 0 for censored.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["time", "status"])?;
        for o in &self.observations {
            out.write_record([format_float(o.time), o.status.code().to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

impl fmt::Display for CensoredDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: n = {}, events = {}, censored = {}",
            self.name,
            self.len(),
            self.n_events(),
            self.n_censored()
        )
    }
}

/// Reads a dataset from CSV with a header row. `status_col = None` treats
/// every row as an event. Row numbers in errors are file line numbers.
pub fn read_csv<R: Read>(reader: R, name: &str, time_col: &str, status_col: Option<&str>) -> Result<CensoredDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |col: &str| {
        headers
            .iter()
            .position(|h| h == col)
            .ok_or_else(|| Error::data(Some(1), format!("column '{col}' not found in header")))
    };
    let time_idx = find(time_col)?;
    let status_idx = status_col.map(find).transpose()?;
    let mut obs = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            Error::data(line, format!("malformed row: {e}"))
        })?;
        let line = record.position().map(|p| p.line() as usize);
        let raw_time = record.get(time_idx).unwrap_or("");
        let time: f64 = raw_time
            .parse()
            .map_err(|_| Error::data(line, format!("cannot parse time '{raw_time}'")))?;
        if !(time > 0.0 && time.is_finite()) {
            return Err(Error::data(line, format!("time must be positive, got {raw_time}")));
        }
        let status = match status_idx {
            Some(i) => {
                let raw = record.get(i).unwrap_or("");
                Status::from_code(raw)
                    .ok_or_else(|| Error::data(line, format!("unknown status code '{raw}' (expected 0 or 1)")))?
            }
            None => Status::Event,
        };
        obs.push(CensoredObs { time, status });
    }
    CensoredDataset::new(name, obs)
}

/// [`read_csv`] on a file; the dataset is named after the file stem.
pub fn load_csv(path: impl AsRef<Path>, time_col: &str, status_col: Option<&str>) -> Result<CensoredDataset> {
    let path = path.as_ref();
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
    read_csv(std::fs::File::open(path)?, name, time_col, status_col)
}

/// Product-limit estimate, as a right-continuous step function.
#[derive(Debug, Clone, PartialEq)]
pub struct KmCurve {
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    pub at_risk: Vec<usize>,
    pub events: Vec<usize>,
}

impl KmCurve {
    /// `Ŝ(t)`: 1 before the first event time, else the value at the last step at or before `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            1.0
        } else {
            self.survival[k - 1]
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes `t,at_risk,events,km_survival` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "at_risk", "events", "km_survival"])?;
        for i in 0..self.len() {
            out.write_record([
                format_float(self.times[i]),
                self.at_risk[i].to_string(),
                self.events[i].to_string(),
                format_float(self.survival[i]),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Kaplan–Meier estimate over the distinct event times. Censored subjects
/// tied with an event time are still at risk at that time.
pub fn kaplan_meier(d: &CensoredDataset) -> Result<KmCurve> {
    d.require_events()?;
    let mut sorted: Vec<CensoredObs> = d.observations.clone();
    sorted.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut curve = KmCurve {
        times: Vec::new(),
        survival: Vec::new(),
        at_risk: Vec::new(),
        events: Vec::new(),
    };
    let mut at_risk = sorted.len();
    let mut s = 1.0;
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].time;
        let mut j = i;
        let mut deaths = 0;
        while j < sorted.len() && sorted[j].time == t {
            if sorted[j].status.is_event() {
                deaths += 1;
            }
            j += 1;
        }
        if deaths > 0 {
            s *= 1.0 - deaths as f64 / at_risk as f64;
            curve.times.push(t);
            curve.survival.push(s);
            curve.at_risk.push(at_risk);
            curve.events.push(deaths);
        }
        at_risk -= j - i;
        i = j;
    }
    Ok(curve)
}

/// One step of the KM curve next to the model survival.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub km_survival: f64,
    pub model_survival: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn mean_abs_diff(&self) -> f64 {
        self.rows.iter().map(|r| (r.km_survival - r.model_survival).abs()).sum::<f64>() / self.rows.len() as f64
    }

    pub fn max_abs_diff(&self) -> f64 {
        self.rows
            .iter()
            .fold(0.0, |m, r| m.max((r.km_survival - r.model_survival).abs()))
    }

    /// `t,km_survival,model_survival`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    /// The `(Ŝ_KM, S_model)` pairs for a plot against the line `y = x`.
    pub fn write_qq_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["km_survival", "model_survival"])?;
        for r in &self.rows {
            out.write_record([format_float(r.km_survival), format_float(r.model_survival)])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// KM estimate and model survival side by side at every KM step.
pub fn km_vs_parametric(d: &CensoredDataset, p: &KumIwParams) -> Result<ComparisonTable> {
    let km = kaplan_meier(d)?;
    compare_curve(&km, |t| p.survival(t))
}

/// As [`km_vs_parametric`] for an already computed curve and any survival function.
pub fn compare_curve<S: Fn(f64) -> Result<f64>>(km: &KmCurve, model: S) -> Result<ComparisonTable> {
    let rows = km
        .times
        .iter()
        .zip(&km.survival)
        .map(|(&t, &s)| {
            Ok(ComparisonRow {
                t,
                km_survival: s,
                model_survival: model(t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonTable { rows })
}

/// Upper bound `θ` of uniform censoring `C ~ U(0, θ)` giving `P(C < T) = rate`.
pub fn uniform_censoring_bound(p: &KumIwParams, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::domain(format!("censoring rate must lie in (0, 1), got {rate}")));
    }
    let opts = QuadOptions::default();
    // P(C < T) = (1/θ) ∫_0^θ S(u) du, decreasing in θ.
    let frac = |theta: f64| -> Result<f64> {
        Ok(integrate(|u| p.survival(u).unwrap_or(1.0), 0.0, theta, &opts)?.value / theta)
    };
    let mut lo = p.median();
    let mut hi = lo;
    for _ in 0..2000 {
        if frac(lo)? >= rate {
            break;
        }
        lo *= 0.5;
    }
    for _ in 0..2000 {
        if frac(hi)? <= rate {
            break;
        }
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if frac(mid)? > rate {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-12 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Draws `n` lifetimes with independent `U(0, θ)` censoring, `θ` chosen so
/// the expected censored fraction is `censor_rate`. A rate of 0 disables censoring.
pub fn simulate_censored(p: &KumIwParams, n: usize, censor_rate: f64, seed: u64) -> Result<CensoredDataset> {
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let theta = if censor_rate == 0.0 {
        None
    } else {
        Some(uniform_censoring_bound(p, censor_rate)?)
    };
    let mut sampler = Sampler::new(*p, seed);
    let obs = (0..n)
        .map(|_| {
            let t = sampler.draw();
            match theta {
                Some(theta) => {
                    let c = theta * sampler.rng().random::<f64>();
                    if c < t {
                        CensoredObs::censored(c.max(f64::MIN_POSITIVE))
                    } else {
                        CensoredObs::event(t)
                    }
                }
                None => CensoredObs::event(t),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    CensoredDataset::new("simulated", obs)
}

/// A small synthetic lifetime sample with 69 subjects and light censoring,
/// shipped for demonstrations in place of field data that is not public.
pub fn synthetic_stand_in() -> CensoredDataset {
    let truth = KumIwParams::new(1.8, 20.0, 2.6).expect("valid parameters");
    let mut d = simulate_censored(&truth, 69, 0.12, 20_240_611).expect("simulation succeeds");
    d.name = "synthetic-stand-in".to_string();
    d
}
