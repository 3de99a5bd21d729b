//! Scenario files: one JSON document per figure or experiment.

use std::fmt;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use spectrum_core::MarketConfig;
use spectrum_core::{Bandwidth, Error as CoreError, MarketMode, Multiplicity};

/// A positive number or `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extent {
    Finite(f64),
    Infinite,
}

impl Extent {
    pub fn band(self) -> Bandwidth {
        match self {
            Extent::Finite(w) => Bandwidth::Finite(w),
            Extent::Infinite => Bandwidth::Infinite,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Extent::Finite(v) => v,
            Extent::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extent::Finite(v) => write!(f, "{}", crate::format::num(*v)),
            Extent::Infinite => f.write_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Extent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Extent::Finite(v)),
            Raw::Text(s) if s.eq_ignore_ascii_case("inf") => Ok(Extent::Infinite),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

impl Serialize for Extent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extent::Finite(v) => s.serialize_f64(*v),
            Extent::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bundled,
    Unbundled,
    Exclusive,
}

impl From<Mode> for MarketMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Bundled => MarketMode::Bundled,
            Mode::Unbundled => MarketMode::Unbundled,
            Mode::Exclusive => MarketMode::Exclusive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
pub enum Variable {
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "W")]
    W,
    #[serde(rename = "B_t")]
    BTotal,
    #[serde(rename = "M")]
    M,
}

impl Variable {
    pub fn column(self) -> &'static str {
        match self {
            Variable::Alpha => "alpha",
            Variable::W => "W",
            Variable::BTotal => "B_t",
            Variable::M => "M",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub variable: Variable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    /// `start, start + step, ...` up to `stop`, computed by index so the
    /// points do not drift.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).map(|v| v.min(self.stop)).collect()
    }
}

/// A second parameter held at each listed value, one curve per value.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub variable: Variable,
    pub values: Vec<Extent>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Objectives {
    pub profit_optimal_alpha: bool,
    pub welfare_optimal_alpha: bool,
    pub welfare_gap: bool,
}

impl Objectives {
    pub fn any(&self) -> bool {
        self.profit_optimal_alpha || self.welfare_optimal_alpha || self.welfare_gap
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Unbundled,
    Exclusive,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::Unbundled => "unbundled",
            Baseline::Exclusive => "exclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub mode: Mode,
    /// Number of incumbents.
    #[serde(rename = "M", default = "one")]
    pub m: usize,
    /// Number of entrants.
    #[serde(rename = "N", default)]
    pub n: usize,
    /// Per-incumbent licensed bands; exclusive with `B_t`.
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    /// Total licensed band shared equally by the incumbents.
    #[serde(rename = "B_t", default, skip_serializing_if = "Option::is_none")]
    pub b_total: Option<f64>,
    #[serde(rename = "W")]
    pub w: Extent,
    #[serde(default)]
    pub alpha: f64,
    pub sweep: SweepRange,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Series>,
    #[serde(default)]
    pub objectives: Objectives,
    #[serde(default)]
    pub compare: Vec<Baseline>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn one() -> usize {
    1
}

/// Parameters of one sweep point after the sweep and series values are applied.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub m: Multiplicity,
    pub n: usize,
    pub b: Option<Vec<f64>>,
    pub b_total: Option<f64>,
    pub w: Extent,
    pub alpha: f64,
}

impl Point {
    pub fn licensed(&self) -> spectrum_core::Result<Vec<f64>> {
        let Multiplicity::Finite(m) = self.m else {
            return Err(CoreError::Unsupported("an unbounded incumbent count has no finite market".into()));
        };
        match (&self.b, self.b_total) {
            (Some(b), _) => Ok(b.clone()),
            (None, Some(t)) => Ok(vec![t / m as f64; m]),
            (None, None) => Err(CoreError::InvalidConfig("no licensed bandwidth given".into())),
        }
    }

    pub fn market(&self, mode: MarketMode) -> spectrum_core::Result<MarketConfig> {
        MarketConfig::linear(mode, &self.licensed()?, self.n, self.w.band(), self.alpha)
    }
}

impl ScenarioSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        spec.validate().with_context(|| format!("invalid scenario {}", path.display()))?;
        Ok(spec)
    }

    /// Whether incumbents are described by a shared total rather than a list.
    pub fn symmetric(&self) -> bool {
        self.b.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        ensure!(s.step > 0.0 && s.step.is_finite(), "sweep step must be positive");
        ensure!(s.start <= s.stop, "sweep start exceeds stop");
        match (&self.b, self.b_total) {
            (Some(_), Some(_)) => bail!("give either B or B_t, not both"),
            (None, None) => bail!("one of B or B_t is required"),
            (Some(b), None) => {
                ensure!(b.len() == self.m, "B lists {} bands for M = {}", b.len(), self.m);
                ensure!(b.iter().all(|&v| v > 0.0 && v.is_finite()), "licensed bands must be positive");
                let varies = |v: Variable| s.variable == v || self.series.as_ref().is_some_and(|x| x.variable == v);
                ensure!(!varies(Variable::M) && !varies(Variable::BTotal), "sweeping M or B_t needs B_t instead of B");
            }
            (None, Some(t)) => ensure!(t > 0.0 && t.is_finite(), "B_t must be positive"),
        }
        ensure!(self.m >= 1 || self.n >= 1, "market needs a provider");
        if self.mode == Mode::Exclusive {
            ensure!(self.n == 1, "exclusive use needs exactly one entrant");
        }
        if let Extent::Finite(w) = self.w {
            ensure!(w > 0.0, "W must be positive");
        }
        ensure!((0.0..=1.0).contains(&self.alpha), "alpha must lie in [0, 1]");
        self.check_domain(s.variable, s.start)?;
        self.check_domain(s.variable, s.stop)?;
        if let Some(series) = &self.series {
            ensure!(series.variable != s.variable, "series and sweep vary the same parameter");
            ensure!(!series.values.is_empty(), "series needs values");
            for v in &series.values {
                match v {
                    Extent::Finite(x) => self.check_domain(series.variable, *x)?,
                    Extent::Infinite => {
                        ensure!(matches!(series.variable, Variable::W | Variable::M), "only W and M may be \"inf\"")
                    }
                }
            }
        }
        if self.objectives.any() || s.variable == Variable::Alpha {
            ensure!(self.mode == Mode::Bundled, "alpha sweeps and objectives need bundled mode");
        }
        if self.objectives.any() {
            ensure!(s.variable != Variable::Alpha, "alpha objectives choose alpha; sweep something else");
        }
        if self.objectives.welfare_gap {
            ensure!(
                !self.objectives.profit_optimal_alpha && !self.objectives.welfare_optimal_alpha,
                "welfare_gap already reports both optima"
            );
            ensure!(self.n == 0 && self.symmetric(), "welfare gap needs symmetric incumbents (B_t) and no entrants");
        }
        for c in &self.compare {
            match c {
                Baseline::Exclusive => ensure!(self.n == 1, "exclusive baseline needs exactly one entrant"),
                Baseline::Unbundled => {}
            }
        }
        Ok(())
    }

    fn check_domain(&self, v: Variable, x: f64) -> Result<()> {
        match v {
            Variable::Alpha => ensure!((0.0..=1.0).contains(&x), "alpha {x} outside [0, 1]"),
            Variable::W | Variable::BTotal => ensure!(x > 0.0 && x.is_finite(), "{} must be positive", v.column()),
            Variable::M => ensure!(x >= 1.0 && x.fract() == 0.0, "M must be a positive integer"),
        }
        Ok(())
    }

    /// Series values, or a single placeholder when there is no series.
    pub fn series_values(&self) -> Vec<Option<Extent>> {
        match &self.series {
            Some(s) => s.values.iter().copied().map(Some).collect(),
            None => vec![None],
        }
    }

    pub fn point(&self, series: Option<Extent>, x: f64) -> Point {
        let mut p = Point {
            m: Multiplicity::Finite(self.m),
            n: self.n,
            b: self.b.clone(),
            b_total: self.b_total,
            w: self.w,
            alpha: self.alpha,
        };
        let mut apply = |v: Variable, value: Extent| match v {
            Variable::Alpha => p.alpha = value.value(),
            Variable::W => p.w = value,
            Variable::BTotal => p.b_total = Some(value.value()),
            Variable::M => {
                p.m = match value {
                    Extent::Finite(v) => Multiplicity::Finite(v.round() as usize),
                    Extent::Infinite => Multiplicity::Infinite,
                }
            }
        };
        if let (Some(s), Some(v)) = (&self.series, series) {
            apply(s.variable, v);
        }
        apply(self.sweep.variable, Extent::Finite(x));
        p
    }
}
