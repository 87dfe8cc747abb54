//! User context `⟨m, e, k⟩` and the control protocol that turns it into a
//! specificity depth and per-level exception budgets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.49;
pub const DEFAULT_RESOURCES: f64 = 1.0;
pub const DEFAULT_TRADEOFF: f64 = 1.0;
pub const DEFAULT_DF_THRESHOLD: f64 = 0.88;

/// Contextual information supplied with every query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextInfo {
    /// Minimum confidence for an answer to count as true.
    pub m: f64,
    /// Available resources.
    pub e: f64,
    /// Certainty vs. specificity dial; larger values favour specificity.
    pub k: f64,
    /// Premise probability gate.
    #[serde(default = "default_df_threshold")]
    pub df_threshold: f64,
}

fn default_df_threshold() -> f64 {
    DEFAULT_DF_THRESHOLD
}

impl Default for ContextInfo {
    fn default() -> Self {
        Self {
            m: DEFAULT_THRESHOLD,
            e: DEFAULT_RESOURCES,
            k: DEFAULT_TRADEOFF,
            df_threshold: DEFAULT_DF_THRESHOLD,
        }
    }
}

impl ContextInfo {
    /// Builds a context with the default premise gate.
    pub fn new(m: f64, e: f64, k: f64) -> Result<Self> {
        Self::with_df_threshold(m, e, k, DEFAULT_DF_THRESHOLD)
    }

    pub fn with_df_threshold(m: f64, e: f64, k: f64, df_threshold: f64) -> Result<Self> {
        let ci = Self {
            m,
            e,
            k,
            df_threshold,
        };
        ci.validate()?;
        Ok(ci)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m <= 1.0) {
            return Err(Error::Context(format!("m = {} must lie in (0,1]", self.m)));
        }
        if !(self.e > 0.0 && self.e.is_finite()) {
            return Err(Error::Context(format!("e = {} must be positive", self.e)));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::Context(format!("k = {} must be positive", self.k)));
        }
        if !(0.0..=1.0).contains(&self.df_threshold) {
            return Err(Error::Context(format!(
                "df_threshold = {} must lie in [0,1]",
                self.df_threshold
            )));
        }
        Ok(())
    }

    pub fn priority(&self) -> PriorityClass {
        classify_priority(self.m)
    }

    pub fn specificity_depth(&self, total_levels: usize) -> usize {
        calc_specificity_depth(self.m, self.e, self.k, total_levels)
    }

    pub fn exception_budget(&self, depth: usize, level: usize, available: usize) -> Result<usize> {
        calc_exception_budget(self.m, self.e, self.k, depth, level, available)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PriorityClass {
    Vlp,
    Lp,
    Mp,
    Hp,
    Vhp,
    Unclassified,
}

impl PriorityClass {
    pub fn label(self) -> &'static str {
        match self {
            PriorityClass::Vlp => "Very Low Priority (VLP)",
            PriorityClass::Lp => "Low Priority (LP)",
            PriorityClass::Mp => "Moderate Priority (MP)",
            PriorityClass::Hp => "High Priority (HP)",
            PriorityClass::Vhp => "Very High Priority (VHP)",
            PriorityClass::Unclassified => "UNCLASSIFIED",
        }
    }
}

impl fmt::Display for PriorityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let short = match self {
            PriorityClass::Vlp => "VLP",
            PriorityClass::Lp => "LP",
            PriorityClass::Mp => "MP",
            PriorityClass::Hp => "HP",
            PriorityClass::Vhp => "VHP",
            PriorityClass::Unclassified => "UNCLASSIFIED",
        };
        f.write_str(short)
    }
}

/// Priority band keyed on the confidence threshold `m`.
pub fn classify_priority(m: f64) -> PriorityClass {
    match m {
        m if (0.3..0.4).contains(&m) => PriorityClass::Vlp,
        m if (0.4..0.45).contains(&m) => PriorityClass::Lp,
        m if (0.45..0.55).contains(&m) => PriorityClass::Mp,
        m if (0.55..0.7).contains(&m) => PriorityClass::Hp,
        m if (0.7..=0.8).contains(&m) => PriorityClass::Vhp,
        _ => PriorityClass::Unclassified,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    #[serde(rename = "very-2 low")]
    VeryVeryLow,
    VeryLow,
    Low,
    Moderate,
    High,
    VeryHigh,
    #[serde(rename = "very-2 high")]
    VeryVeryHigh,
    OutOfRange,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::VeryVeryLow => "very-2 low",
            Level::VeryLow => "very low",
            Level::Low => "low",
            Level::Moderate => "moderate",
            Level::High => "high",
            Level::VeryHigh => "very high",
            Level::VeryVeryHigh => "very-2 high",
            Level::OutOfRange => "out-of-range",
        })
    }
}

/// Resource-availability band for `e`.
pub fn describe_resources(e: f64) -> Level {
    match e {
        e if (0.125..0.25).contains(&e) => Level::VeryVeryLow,
        e if (0.25..0.5).contains(&e) => Level::VeryLow,
        e if (0.5..1.0).contains(&e) => Level::Low,
        1.0 => Level::Moderate,
        e if e > 1.0 && e <= 2.0 => Level::High,
        e if e > 2.0 && e <= 4.0 => Level::VeryHigh,
        e if e > 4.0 && e <= 8.0 => Level::VeryVeryHigh,
        _ => Level::OutOfRange,
    }
}

/// `(certainty, specificity)` requirement bands for `k`, or `None` when `k`
/// falls outside the table.
pub fn describe_tradeoff(k: f64) -> Option<(Level, Level)> {
    match k {
        k if (0.25..0.5).contains(&k) => Some((Level::VeryHigh, Level::VeryLow)),
        k if (0.5..1.0).contains(&k) => Some((Level::High, Level::Low)),
        1.0 => Some((Level::Moderate, Level::Moderate)),
        k if k > 1.0 && k <= 2.0 => Some((Level::Low, Level::High)),
        k if k > 2.0 && k <= 4.0 => Some((Level::VeryLow, Level::VeryHigh)),
        _ => None,
    }
}

/// Deepest taxonomy level to explore: `ceil(n_m · (1 − m)^(1/(e·k)))`.
pub fn calc_specificity_depth(m: f64, e: f64, k: f64, total_levels: usize) -> usize {
    let scaled = total_levels as f64 * (1.0 - m).powf(1.0 / (e * k));
    (scaled.ceil().max(0.0) as usize).min(total_levels)
}

/// How many exceptions to evaluate at the 0-based `level` of a `depth`-level
/// descent, out of `available`:
/// `round(x_m · (1 − (1 − m) · ((level + 1)/depth)^(e/k)))`, rounding half
/// away from zero and clamped to `[0, available]`.
pub fn calc_exception_budget(
    m: f64,
    e: f64,
    k: f64,
    depth: usize,
    level: usize,
    available: usize,
) -> Result<usize> {
    if level >= depth {
        return Err(Error::LevelOutOfRange { level, depth });
    }
    let reach = ((level + 1) as f64 / depth as f64).powf(e / k);
    let raw = (available as f64 * (1.0 - (1.0 - m) * reach)).round();
    Ok((raw.max(0.0) as usize).min(available))
}
