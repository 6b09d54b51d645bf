//! Limit laws of the overshoot and undershoots given ruin, and ruin-probability asymptotics.

mod gtsc;
mod ladder;
#[cfg(test)]
mod tests;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gtsc::{
    ruin_probability_asymptotic, ruin_probability_ladder_form, ruin_probability_ladder_tail_form,
    GtscLaws,
};
pub(crate) use ladder::check_grid;
pub use ladder::{
    gtsc_ladder, max_undershoot_cdf, overshoot_cdf, tabulate, undershoot_cdf, CdfCurve, KernelFn,
    LadderModel, TailFn,
};

/// Which conditional law: X_{τ_u} − u, u − X_{τ_u−} or u − X̄_{τ_u−}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LawKind {
    Overshoot,
    Undershoot,
    MaxUndershoot,
}

impl LawKind {
    pub const ALL: [LawKind; 3] = [
        LawKind::Overshoot,
        LawKind::Undershoot,
        LawKind::MaxUndershoot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LawKind::Overshoot => "overshoot",
            LawKind::Undershoot => "undershoot",
            LawKind::MaxUndershoot => "max_undershoot",
        }
    }
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LawKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LawKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown law '{s}'")))
    }
}

/// Overshoot tail asymptotic (GTSC closed forms).
pub fn overshoot_tail_asymptotic(laws: &GtscLaws, x: f64) -> Result<f64> {
    laws.tail_asymptotic(LawKind::Overshoot, x)
}

/// Undershoot tail asymptotic (GTSC closed forms).
pub fn undershoot_tail_asymptotic(laws: &GtscLaws, x: f64) -> Result<f64> {
    laws.tail_asymptotic(LawKind::Undershoot, x)
}

/// Max-undershoot tail asymptotic (GTSC closed forms).
pub fn max_undershoot_tail_asymptotic(laws: &GtscLaws, x: f64) -> Result<f64> {
    laws.tail_asymptotic(LawKind::MaxUndershoot, x)
}
