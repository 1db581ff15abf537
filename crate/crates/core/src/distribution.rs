//! The Kumaraswamy inverse Weibull distribution.
//!
//! With `z = (c/t)^β`, the distribution function is
//! `F(t) = 1 - (1 - e^(-z))^b` and the density is
//! `f(t) = β b c^β t^(-β-1) e^(-z) (1 - e^(-z))^(b-1)`, for `t > 0`.
//! All evaluations go through log space; `log1m_exp` keeps
//! `ln(1 - e^(-z))` accurate for `z` anywhere from 1e-300 to 1e300.

use std::fmt;

use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln(1 - e^(-x))` for `x > 0`.
pub fn log1m_exp(x: f64) -> f64 {
    if x >= std::f64::consts::LN_2 {
        (-(-x).exp()).ln_1p()
    } else {
        (-(-x).exp_m1()).ln()
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

/// Parameter triple `(b, c, β)`: `b` and `β` are shapes, `c` is the scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct KumIwParams {
    b: f64,
    c: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    b: f64,
    c: f64,
    beta: f64,
}

impl TryFrom<RawParams> for KumIwParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        KumIwParams::new(raw.b, raw.c, raw.beta)
    }
}

impl From<KumIwParams> for RawParams {
    fn from(p: KumIwParams) -> Self {
        RawParams {
            b: p.b,
            c: p.c,
            beta: p.beta,
        }
    }
}

impl fmt::Display for KumIwParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Kum-IW(b = {}, c = {}, beta = {})", self.b, self.c, self.beta)
    }
}

impl KumIwParams {
    pub fn new(b: f64, c: f64, beta: f64) -> Result<Self> {
        Ok(Self {
            b: check_positive("b", b)?,
            c: check_positive("c", c)?,
            beta: check_positive("beta", beta)?,
        })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.b, self.c, self.beta]
    }

    pub fn from_array(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }

    /// Largest moment order that exists is anything below `b·β`.
    pub fn moment_limit(&self) -> f64 {
        self.b * self.beta
    }

    /// `z = (c/t)^β`.
    #[inline]
    pub(crate) fn z(&self, t: f64) -> f64 {
        (self.c / t).powf(self.beta)
    }

    fn check_time(t: f64) -> Result<()> {
        if t > 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!("time must be positive and finite, got {t}")))
        }
    }

    /// `ln f(t)` without argument validation.
    #[inline]
    pub(crate) fn ln_pdf_at(&self, t: f64) -> f64 {
        let z = self.z(t);
        let mut v = self.beta.ln() + self.b.ln() + self.beta * self.c.ln() - (self.beta + 1.0) * t.ln() - z;
        if self.b != 1.0 {
            v += (self.b - 1.0) * log1m_exp(z);
        }
        v
    }

    /// `ln S(t)` without argument validation.
    #[inline]
    pub(crate) fn ln_survival_at(&self, t: f64) -> f64 {
        self.b * log1m_exp(self.z(t))
    }

    pub fn log_pdf(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        Ok(self.ln_pdf_at(t))
    }

    pub fn pdf(&self, t: f64) -> Result<f64> {
        self.log_pdf(t).map(f64::exp)
    }

    /// Distribution function; `cdf(0) = 0` by continuity.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        if t == f64::INFINITY {
            return Ok(1.0);
        }
        Self::check_time(t)?;
        Ok(-self.ln_survival_at(t).exp_m1())
    }

    /// Survival function; `survival(0) = 1` by continuity.
    pub fn survival(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(1.0);
        }
        Self::check_time(t)?;
        Ok(self.ln_survival_at(t).exp())
    }

    pub fn log_survival(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        Ok(self.ln_survival_at(t))
    }

    /// Hazard `f(t)/S(t) = β b c^β t^(-β-1) e^(-z) / (1 - e^(-z))`.
    pub fn hazard(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        let z = self.z(t);
        let ln_h = self.beta.ln() + self.b.ln() + self.beta * self.c.ln() - (self.beta + 1.0) * t.ln() - z
            - log1m_exp(z);
        Ok(ln_h.exp())
    }

    /// `Q(u) = c (-ln(1 - (1-u)^(1/b)))^(-1/β)` for `0 < u < 1`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {u}")));
        }
        Ok(self.quantile_unchecked(u))
    }

    #[inline]
    fn quantile_unchecked(&self, u: f64) -> f64 {
        // e^(-z) = 1 - (1-u)^(1/b), without cancellation for small u.
        let v = -((-u).ln_1p() / self.b).exp_m1();
        self.c * (-v.ln()).powf(-1.0 / self.beta)
    }

    pub fn median(&self) -> f64 {
        self.quantile_unchecked(0.5)
    }

    /// Draw `n` variates by inverse transform from a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut sampler = Sampler::new(*self, seed);
        (0..n).map(|_| sampler.draw()).collect()
    }
}

/// Inverse-transform sampler owning its generator state.
#[derive(Debug, Clone)]
pub struct Sampler {
    params: KumIwParams,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(params: KumIwParams, seed: u64) -> Self {
        Self {
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn draw(&mut self) -> f64 {
        let u: f64 = Open01.sample(&mut self.rng);
        self.params.quantile_unchecked(u)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// The special cases of the family obtained by pinning `b` and/or `β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubModel {
    /// Full three-parameter model.
    KumIw,
    /// Kumaraswamy inverse Rayleigh: β = 2.
    KumIr,
    /// Inverse Rayleigh: β = 2, b = 1.
    Ir,
    /// Kumaraswamy inverse exponential: β = 1.
    KumIe,
    /// Inverse exponential: β = 1, b = 1.
    Ie,
    /// Inverse Weibull: b = 1.
    Iw,
}

impl SubModel {
    pub const ALL: [SubModel; 6] = [
        SubModel::KumIw,
        SubModel::KumIr,
        SubModel::Ir,
        SubModel::KumIe,
        SubModel::Ie,
        SubModel::Iw,
    ];

    /// Pinned values `(b, β)`; `None` entries are free.
    pub fn pinned(self) -> (Option<f64>, Option<f64>) {
        match self {
            SubModel::KumIw => (None, None),
            SubModel::KumIr => (None, Some(2.0)),
            SubModel::Ir => (Some(1.0), Some(2.0)),
            SubModel::KumIe => (None, Some(1.0)),
            SubModel::Ie => (Some(1.0), Some(1.0)),
            SubModel::Iw => (Some(1.0), None),
        }
    }

    /// Names of the free parameters, in the order `build` expects them.
    pub fn free_names(self) -> Vec<&'static str> {
        let (b, beta) = self.pinned();
        let mut names = Vec::with_capacity(3);
        if b.is_none() {
            names.push("b");
        }
        names.push("c");
        if beta.is_none() {
            names.push("beta");
        }
        names
    }

    pub fn n_free(self) -> usize {
        self.free_names().len()
    }

    pub fn n_pinned(self) -> usize {
        3 - self.n_free()
    }

    /// Assemble the full triple from the free parameters (ordered b, c, β, skipping pinned ones).
    pub fn build(self, free: &[f64]) -> Result<KumIwParams> {
        if free.len() != self.n_free() {
            return Err(Error::domain(format!(
                "{self} takes {} free parameter(s) ({}), got {}",
                self.n_free(),
                self.free_names().join(", "),
                free.len()
            )));
        }
        let (pb, pbeta) = self.pinned();
        let mut it = free.iter().copied();
        let b = pb.unwrap_or_else(|| it.next().unwrap());
        let c = it.next().unwrap();
        let beta = pbeta.unwrap_or_else(|| it.next().unwrap());
        KumIwParams::new(b, c, beta)
    }

    /// The free coordinates of `p` under this sub-model.
    pub fn free_values(self, p: &KumIwParams) -> Vec<f64> {
        let (pb, pbeta) = self.pinned();
        let mut out = Vec::with_capacity(3);
        if pb.is_none() {
            out.push(p.b);
        }
        out.push(p.c);
        if pbeta.is_none() {
            out.push(p.beta);
        }
        out
    }

    /// Whether `p` lies in this sub-model.
    pub fn contains(self, p: &KumIwParams) -> bool {
        let (pb, pbeta) = self.pinned();
        pb.is_none_or(|b| p.b == b) && pbeta.is_none_or(|beta| p.beta == beta)
    }

    /// Tightest sub-model containing `p`.
    pub fn classify(p: &KumIwParams) -> SubModel {
        [SubModel::Ie, SubModel::Ir, SubModel::KumIe, SubModel::KumIr, SubModel::Iw]
            .into_iter()
            .find(|m| m.contains(p))
            .unwrap_or(SubModel::KumIw)
    }
}

impl fmt::Display for SubModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SubModel::KumIw => "Kum-IW",
            SubModel::KumIr => "Kum-IR",
            SubModel::Ir => "IR",
            SubModel::KumIe => "Kum-IE",
            SubModel::Ie => "IE",
            SubModel::Iw => "IW",
        })
    }
}

impl std::str::FromStr for SubModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "kumiw" | "full" => Ok(SubModel::KumIw),
            "kumir" => Ok(SubModel::KumIr),
            "ir" => Ok(SubModel::Ir),
            "kumie" => Ok(SubModel::KumIe),
            "ie" => Ok(SubModel::Ie),
            "iw" => Ok(SubModel::Iw),
            _ => Err(Error::domain(format!("unknown sub-model '{s}'"))),
        }
    }
}

/// Convenience wrapper for [`SubModel::build`].
pub fn make_submodel(tag: SubModel, free: &[f64]) -> Result<KumIwParams> {
    tag.build(free)
}
