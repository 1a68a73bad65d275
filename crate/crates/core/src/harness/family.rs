// SPDX-License-Identifier: Apache-2.0

//! The standard experiment families: proxy-mass sweep, controller
//! comparisons on the sine and chirp references, and the load sweep.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::MetricsReport;
use super::runner::{run_scenario, RunError, RunOutcome};
use super::scenario::{ControllerKind, Scenario};
use super::trajectory::Trajectory;
use crate::error::Error;

pub const MP_VALUES: [f64; 5] = [0.5, 1.0, 5.0, 10.0, 15.0];
pub const LOAD_VALUES: [f64; 3] = [0.0, 2.5, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// IDO-PSMC over the proxy masses in [`MP_VALUES`].
    MpSweep,
    /// All four controllers on the 0.25 Hz sine.
    FixedFreqCompare,
    /// All four controllers on the 0.1 to 0.5 Hz chirp.
    ChirpCompare,
    /// IDO-PSMC with [`LOAD_VALUES`] added to the plant mass only.
    LoadSweep,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Self::MpSweep,
        Self::FixedFreqCompare,
        Self::ChirpCompare,
        Self::LoadSweep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::MpSweep => "mp-sweep",
            Self::FixedFreqCompare => "fixed-freq-compare",
            Self::ChirpCompare => "chirp-compare",
            Self::LoadSweep => "load-sweep",
        }
    }

    /// Member scenarios derived from `base`. The sweeps keep the base
    /// reference; the comparisons impose their own.
    pub fn members(&self, base: &Scenario) -> Vec<Member> {
        let with = |variant: String, s: Scenario| Member { variant, scenario: s };
        match self {
            Self::MpSweep => MP_VALUES
                .iter()
                .map(|&m_p| {
                    let mut s = base.clone();
                    s.controller = ControllerKind::IdoPsmc;
                    s.gains.m_p = m_p;
                    with(format!("m_p={m_p}"), s)
                })
                .collect(),
            Self::FixedFreqCompare | Self::ChirpCompare => {
                let trajectory = if *self == Self::FixedFreqCompare {
                    Trajectory::fixed_sine()
                } else {
                    Trajectory::chirp()
                };
                ControllerKind::ALL
                    .iter()
                    .map(|&c| {
                        let mut s = base.clone();
                        s.controller = c;
                        s.trajectory = trajectory;
                        with(c.label().to_string(), s)
                    })
                    .collect()
            }
            Self::LoadSweep => LOAD_VALUES
                .iter()
                .map(|&load| {
                    let mut s = base.clone();
                    s.controller = ControllerKind::IdoPsmc;
                    s.load_mass = load;
                    with(format!("load={load}kg"), s)
                })
                .collect(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(Family::name).collect();
            Error::Config(format!("unknown family `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone)]
pub struct Member {
    pub variant: String,
    pub scenario: Scenario,
}

#[derive(Debug)]
pub struct FamilyRow {
    pub variant: String,
    pub controller: ControllerKind,
    pub outcome: Result<RunOutcome, RunError>,
}

impl FamilyRow {
    pub fn metrics(&self) -> Option<&MetricsReport> {
        self.outcome.as_ref().ok().map(|o| &o.metrics)
    }
}

#[derive(Debug)]
pub struct FamilyReport {
    pub name: String,
    pub rows: Vec<FamilyRow>,
}

impl FamilyReport {
    pub fn iae(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.metrics().map(|m| m.iae)).collect()
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.outcome.is_ok())
    }
}

/// Run members concurrently. A failing member is recorded in its row and
/// does not stop the others.
pub fn run_members(name: &str, members: Vec<Member>) -> FamilyReport {
    let rows = members
        .into_par_iter()
        .map(|m| FamilyRow {
            controller: m.scenario.controller,
            outcome: run_scenario(&m.scenario),
            variant: m.variant,
        })
        .collect();
    FamilyReport {
        name: name.to_string(),
        rows,
    }
}

pub fn run_family(family: Family, base: &Scenario) -> Result<FamilyReport, Error> {
    base.validate()?;
    Ok(run_members(family.name(), family.members(base)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn member_sets() {
        let base = Scenario::default();
        let mp = Family::MpSweep.members(&base);
        assert_eq!(mp.iter().map(|m| m.scenario.gains.m_p).collect::<Vec<_>>(), MP_VALUES);
        let chirp = Family::ChirpCompare.members(&base);
        assert_eq!(chirp.len(), 4);
        assert!(chirp.iter().all(|m| m.scenario.trajectory == Trajectory::chirp()));
        let load = Family::LoadSweep.members(&base);
        for (m, l) in load.iter().zip(LOAD_VALUES) {
            assert_eq!(m.scenario.plant_truth().mass, base.plant.mass + l);
            assert_eq!(m.scenario.nominal, base.nominal);
        }
    }

    #[test]
    fn names_roundtrip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("table-ii".parse::<Family>().is_err());
    }
}
