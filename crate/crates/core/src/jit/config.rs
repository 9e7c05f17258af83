use std::fmt;
use std::path::Path;

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::exec::DEFAULT_MAX_RESULT_ROWS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    Static,
    /// Mean normalized cost of the queries seen so far.
    Dynamic,
}

impl ThresholdMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Some(ThresholdMode::Static),
            "dynamic" => Some(ThresholdMode::Dynamic),
            _ => None,
        }
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMode::Static => "static",
            ThresholdMode::Dynamic => "dynamic",
        })
    }
}

/// Direction in which candidate columns are ranked by usage count before
/// the top `p` are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UsageOrder {
    MostUsedFirst,
    LeastUsedFirst,
}

impl UsageOrder {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "descending" | "desc" => Some(UsageOrder::MostUsedFirst),
            "ascending" | "asc" => Some(UsageOrder::LeastUsedFirst),
            _ => None,
        }
    }
}

impl fmt::Display for UsageOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UsageOrder::MostUsedFirst => "descending",
            UsageOrder::LeastUsedFirst => "ascending",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JitConfig {
    pub enabled: bool,
    pub threshold_mode: ThresholdMode,
    /// Static threshold `B`, in normalized units.
    pub static_threshold: u64,
    /// Pages per normalized unit.
    pub norm_unit: f64,
    /// Frequency-rank cutoff.
    pub p: usize,
    /// Columns kept after the uniqueness ranking.
    pub m: usize,
    /// Widest composite candidate.
    pub m_prime: usize,
    /// Candidates costed with hypothetical indexes.
    pub t_prime: usize,
    /// Maximum number of live JIT indexes.
    pub capacity: usize,
    pub page_size: u64,
    pub fan_out: u64,
    pub fetch_factor: f64,
    pub usage_order: UsageOrder,
    /// Number of uses a build is expected to be amortized over.
    pub expected_reuse: f64,
    pub update_cost: f64,
    pub update_rate: f64,
    pub max_result_rows: usize,
}

impl Default for JitConfig {
    fn default() -> Self {
        let model = CostModel::default();
        JitConfig {
            enabled: true,
            threshold_mode: ThresholdMode::Static,
            static_threshold: 2,
            norm_unit: 1000.0,
            p: 8,
            m: 6,
            m_prime: 3,
            t_prime: 4,
            capacity: 8,
            page_size: model.page_size,
            fan_out: model.fan_out,
            fetch_factor: model.fetch_factor,
            usage_order: UsageOrder::MostUsedFirst,
            expected_reuse: 3.0,
            update_cost: 0.0,
            update_rate: 0.0,
            max_result_rows: DEFAULT_MAX_RESULT_ROWS,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{value}`")))
}

impl JitConfig {
    pub fn cost_model(&self) -> CostModel {
        CostModel {
            page_size: self.page_size,
            fan_out: self.fan_out,
            fetch_factor: self.fetch_factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cost_model().validate()?;
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.static_threshold == 0 {
            return bad("threshold must be positive");
        }
        if !(self.norm_unit.is_finite() && self.norm_unit > 0.0) {
            return bad("norm_unit must be a positive number");
        }
        if self.p == 0 || self.m == 0 || self.m_prime == 0 || self.t_prime == 0 {
            return bad("p, m, m_prime and t_prime must all be at least 1");
        }
        if !(self.m_prime <= self.m && self.m <= self.p) {
            return bad("bounds must satisfy m_prime <= m <= p");
        }
        if self.capacity == 0 {
            return bad("capacity must be at least 1");
        }
        if !(self.expected_reuse.is_finite() && self.expected_reuse > 0.0) {
            return bad("expected_reuse must be a positive number");
        }
        if !(self.update_cost >= 0.0 && self.update_rate >= 0.0) {
            return bad("update_cost and update_rate must be non-negative");
        }
        if self.max_result_rows == 0 {
            return bad("max_result_rows must be positive");
        }
        Ok(())
    }

    /// Sets one field from its textual key. Keys match the config file.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim().to_ascii_lowercase().as_str() {
            "enabled" | "jit" => {
                self.enabled = match v.to_ascii_lowercase().as_str() {
                    "on" | "true" | "1" | "yes" => true,
                    "off" | "false" | "0" | "no" => false,
                    _ => return Err(Error::Config(format!("{key}: expected on|off, got `{v}`"))),
                }
            }
            "threshold_mode" => {
                self.threshold_mode = ThresholdMode::parse(v)
                    .ok_or_else(|| Error::Config(format!("{key}: expected static|dynamic")))?
            }
            "threshold" | "static_threshold" => self.static_threshold = parse_num(key, v)?,
            "norm_unit" => self.norm_unit = parse_num(key, v)?,
            "p" => self.p = parse_num(key, v)?,
            "m" => self.m = parse_num(key, v)?,
            "m_prime" | "mprime" => self.m_prime = parse_num(key, v)?,
            "t_prime" | "tprime" => self.t_prime = parse_num(key, v)?,
            "capacity" => self.capacity = parse_num(key, v)?,
            "page_size" => self.page_size = parse_num(key, v)?,
            "fan_out" => self.fan_out = parse_num(key, v)?,
            "fetch_factor" => self.fetch_factor = parse_num(key, v)?,
            "usage_order" => {
                self.usage_order = UsageOrder::parse(v)
                    .ok_or_else(|| Error::Config(format!("{key}: expected descending|ascending")))?
            }
            "expected_reuse" => self.expected_reuse = parse_num(key, v)?,
            "update_cost" => self.update_cost = parse_num(key, v)?,
            "update_rate" => self.update_rate = parse_num(key, v)?,
            "max_result_rows" => self.max_result_rows = parse_num(key, v)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        self.validate()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = JitConfig::default();
        cfg.apply_str(&text)?;
        Ok(cfg)
    }

    /// The config as `key = value` lines, readable by [`JitConfig::apply_str`].
    pub fn to_kv_string(&self) -> String {
        format!(
            "enabled = {}\nthreshold_mode = {}\nthreshold = {}\nnorm_unit = {}\np = {}\nm = {}\n\
             m_prime = {}\nt_prime = {}\ncapacity = {}\npage_size = {}\nfan_out = {}\n\
             fetch_factor = {}\nusage_order = {}\nexpected_reuse = {}\nupdate_cost = {}\n\
             update_rate = {}\nmax_result_rows = {}\n",
            if self.enabled { "on" } else { "off" },
            self.threshold_mode,
            self.static_threshold,
            self.norm_unit,
            self.p,
            self.m,
            self.m_prime,
            self.t_prime,
            self.capacity,
            self.page_size,
            self.fan_out,
            self.fetch_factor,
            self.usage_order,
            self.expected_reuse,
            self.update_cost,
            self.update_rate,
            self.max_result_rows,
        )
    }
}
