use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rubric::{tactic_id, TACTIC_COUNT};

/// Per-tactic guidance direction: `1` encourage, `-1` suppress, `0` ignore.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct Omega([i8; TACTIC_COUNT]);

impl Omega {
    pub const ZERO: Omega = Omega([0; TACTIC_COUNT]);

    pub fn new(values: [i8; TACTIC_COUNT]) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(-1..=1).contains(*v)) {
            return Err(Error::invalid(format!("omega entries must be -1, 0 or 1, got {bad}")));
        }
        Ok(Omega(values))
    }

    /// `+1` on every target, `-1` on every suppressed tactic.
    pub fn from_ids(targets: &[usize], suppress: &[usize]) -> Result<Self> {
        let mut w = [0i8; TACTIC_COUNT];
        for &t in targets {
            *w.get_mut(t).ok_or_else(|| Error::invalid(format!("tactic id {t} out of range")))? = 1;
        }
        for &s in suppress {
            if targets.contains(&s) {
                return Err(Error::invalid(format!("tactic {s} is both targeted and suppressed")));
            }
            *w.get_mut(s).ok_or_else(|| Error::invalid(format!("tactic id {s} out of range")))? = -1;
        }
        Ok(Omega(w))
    }

    /// Same as [`Omega::from_ids`] but with rubric keys such as
    /// `emphasis_intensity`.
    pub fn from_names<S: AsRef<str>>(targets: &[S], suppress: &[S]) -> Result<Self> {
        let ids = |names: &[S]| names.iter().map(|n| tactic_id(n.as_ref())).collect::<Result<Vec<_>>>();
        let (t, s) = (ids(targets)?, ids(suppress)?);
        if let Some(name) = suppress.iter().find(|n| targets.iter().any(|t| t.as_ref() == n.as_ref())) {
            return Err(Error::invalid(format!("tactic {} is both targeted and suppressed", name.as_ref())));
        }
        Self::from_ids(&t, &s)
    }

    pub fn values(&self) -> [i8; TACTIC_COUNT] {
        self.0
    }

    pub fn targets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..TACTIC_COUNT).filter(|&k| self.0[k] == 1)
    }

    pub fn negated(&self) -> Self {
        Omega(self.0.map(|v| -v))
    }
}

impl TryFrom<Vec<i8>> for Omega {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        let arr: [i8; TACTIC_COUNT] = v
            .try_into()
            .map_err(|v: Vec<i8>| Error::invalid(format!("omega needs {TACTIC_COUNT} entries, got {}", v.len())))?;
        Omega::new(arr)
    }
}

impl From<Omega> for Vec<i8> {
    fn from(o: Omega) -> Self {
        o.0.to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    #[default]
    Greedy,
    Sample,
}

impl std::str::FromStr for DecodeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(DecodeMode::Greedy),
            "sample" => Ok(DecodeMode::Sample),
            other => Err(Error::invalid(format!("unknown decode mode {other:?}"))),
        }
    }
}

/// How guide probabilities enter the adjusted score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuidanceSpace {
    /// Raw probabilities in [0, 1].
    #[default]
    Probability,
    /// Natural logs of the probabilities.
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecodeConfig {
    pub lambda_pos: f64,
    pub lambda_neg: f64,
    pub omega: Omega,
    pub k: usize,
    /// Cap on generated tokens (the prompt does not count).
    pub max_len: usize,
    pub mode: DecodeMode,
    pub temperature: f64,
    pub seed: u64,
    /// Explicit conditioning tokens. When empty the first `anchor_len`
    /// content tokens of the source are used.
    pub prompt_prefix: Vec<String>,
    pub anchor_len: usize,
    pub guidance_space: GuidanceSpace,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            lambda_pos: 0.0,
            lambda_neg: 0.0,
            omega: Omega::ZERO,
            k: 50,
            max_len: 32,
            mode: DecodeMode::Greedy,
            temperature: 1.0,
            seed: 0,
            prompt_prefix: Vec::new(),
            anchor_len: 2,
            guidance_space: GuidanceSpace::Probability,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda_pos", self.lambda_pos), ("lambda_neg", self.lambda_neg)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be a non-negative number, got {v}")));
            }
        }
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if self.max_len == 0 {
            return Err(Error::invalid("max_len must be at least 1"));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::invalid(format!("temperature must be positive, got {}", self.temperature)));
        }
        Omega::new(self.omega.0)?;
        Ok(())
    }
}
