//! Net profit classification and the zero-pattern branch table.

use serde::Serialize;

use crate::error::{Result, RuinError};
use crate::model::SeasonalModel;
use crate::scalar::Scalar;

/// Tolerance on `|E S - 3|` for calling a double-precision model critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NetProfitKind {
    /// `E S > 3`: ruin is certain from every surplus.
    Supercritical,
    /// `E S = 3` with three point-mass seasons.
    CriticalDegenerate,
    /// `E S = 3` with `P(S = 3) < 1`: ruin is certain.
    CriticalDiffuse,
    /// `E S < 3`.
    Subcritical,
}

/// The ten point-mass triples with `a + b + c = 3`, paired with the smallest
/// surplus that is never ruined.
pub const DEGENERATE_PATTERNS: [([usize; 3], usize); 10] = [
    ([3, 0, 0], 3),
    ([0, 3, 0], 2),
    ([2, 1, 0], 2),
    ([1, 2, 0], 2),
    ([2, 0, 1], 2),
    ([0, 0, 3], 1),
    ([0, 2, 1], 1),
    ([0, 1, 2], 1),
    ([1, 0, 2], 1),
    ([1, 1, 1], 1),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetProfitClass {
    pub kind: NetProfitKind,
    pub mean_s: f64,
    /// Point-mass locations for the degenerate case.
    pub pattern: Option<[usize; 3]>,
    /// For the degenerate case, `psi(u) = 1` exactly when `u < safe_from`.
    pub safe_from: Option<usize>,
}

impl NetProfitClass {
    /// Ultimate ruin probability when it is determined by the class alone.
    pub fn psi(&self, u: usize) -> Option<f64> {
        match self.kind {
            NetProfitKind::Supercritical | NetProfitKind::CriticalDiffuse => Some(1.0),
            NetProfitKind::CriticalDegenerate => self.safe_from.map(|k| if u < k { 1.0 } else { 0.0 }),
            NetProfitKind::Subcritical => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            NetProfitKind::Supercritical => "Supercritical",
            NetProfitKind::CriticalDegenerate => "CriticalDegenerate",
            NetProfitKind::CriticalDiffuse => "CriticalDiffuse",
            NetProfitKind::Subcritical => "Subcritical",
        }
    }
}

pub fn classify_net_profit<T: Scalar>(model: &SeasonalModel<T>) -> Result<NetProfitClass> {
    if model.period() != 3 {
        return Err(RuinError::WrongPeriod { expected: 3, found: model.period() });
    }
    let mean = model.mean_s();
    let three = mean.from_usize_like(3);
    let mean_f = mean.to_f64();
    let critical = if T::EXACT { *mean == three } else { (mean_f - 3.0).abs() <= CRITICAL_TOLERANCE };
    let kind = if critical {
        NetProfitKind::CriticalDiffuse
    } else if *mean > three {
        NetProfitKind::Supercritical
    } else {
        NetProfitKind::Subcritical
    };
    let mut class = NetProfitClass { kind, mean_s: mean_f, pattern: None, safe_from: None };
    if critical {
        let locations: Option<Vec<usize>> = model.seasons().iter().map(|s| s.point_mass_location()).collect();
        if let Some(loc) = locations {
            let pattern = [loc[0], loc[1], loc[2]];
            if let Some((_, safe)) = DEGENERATE_PATTERNS.iter().find(|(p, _)| *p == pattern) {
                class.kind = NetProfitKind::CriticalDegenerate;
                class.pattern = Some(pattern);
                class.safe_from = Some(*safe);
            }
        }
    }
    Ok(class)
}

/// Which closed-form recursion applies, keyed by which of the first two
/// atoms of each season vanish. Numbers follow the order of the case list
/// and are what serialization emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `s0 != 0`.
    AllZeroAtoms = 1,
    /// `a0 = 0`, `a1 b0 c0 != 0`.
    FirstSeasonShifted = 2,
    /// `b0 = 0`, `a0 b1 c0 != 0`.
    SecondSeasonShifted = 3,
    /// `c0 = 0`, `a0 b0 c1 != 0`.
    ThirdSeasonShifted = 4,
    /// `a0 = b0 = 0`, `c0 != 0`.
    FirstTwoShifted = 5,
    /// `a0 = c0 = 0`, `b0 != 0`.
    FirstAndThirdShifted = 6,
    /// `b0 = c0 = 0`, `a0 != 0`.
    LastTwoShifted = 7,
    /// `a0 = a1 = 0`, `b0 c0 != 0`.
    FirstSeasonDoubleShifted = 8,
    /// `b0 = b1 = 0`, `a0 c0 != 0`.
    SecondSeasonDoubleShifted = 9,
    /// `c0 = c1 = 0`, `a0 b0 != 0`.
    ThirdSeasonDoubleShifted = 10,
}

impl Serialize for Branch {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.number())
    }
}

impl Branch {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn condition(self) -> &'static str {
        match self {
            Branch::AllZeroAtoms => "s0≠0",
            Branch::FirstSeasonShifted => "a0=0, b0≠0, c0≠0, a1≠0",
            Branch::SecondSeasonShifted => "a0≠0, b0=0, c0≠0, b1≠0",
            Branch::ThirdSeasonShifted => "a0≠0, b0≠0, c0=0, c1≠0",
            Branch::FirstTwoShifted => "a0=0, b0=0, c0≠0",
            Branch::FirstAndThirdShifted => "a0=0, b0≠0, c0=0",
            Branch::LastTwoShifted => "a0≠0, b0=0, c0=0",
            Branch::FirstSeasonDoubleShifted => "a0=a1=0, b0≠0, c0≠0",
            Branch::SecondSeasonDoubleShifted => "a0≠0, b0=b1=0, c0≠0",
            Branch::ThirdSeasonDoubleShifted => "a0≠0, b0≠0, c0=c1=0",
        }
    }

    pub const ALL: [Branch; 10] = [
        Branch::AllZeroAtoms,
        Branch::FirstSeasonShifted,
        Branch::SecondSeasonShifted,
        Branch::ThirdSeasonShifted,
        Branch::FirstTwoShifted,
        Branch::FirstAndThirdShifted,
        Branch::LastTwoShifted,
        Branch::FirstSeasonDoubleShifted,
        Branch::SecondSeasonDoubleShifted,
        Branch::ThirdSeasonDoubleShifted,
    ];
}

/// Exact zero tests on the stored atoms; never a tolerance.
pub fn detect_branch<T: Scalar>(model: &SeasonalModel<T>) -> Result<Branch> {
    if model.period() != 3 {
        return Err(RuinError::WrongPeriod { expected: 3, found: model.period() });
    }
    let z = |season: usize, k: usize| model.seasons()[season].mass(k).is_zero();
    let (a0, b0, c0) = (z(0, 0), z(1, 0), z(2, 0));
    let (a1, b1, c1) = (z(0, 1), z(1, 1), z(2, 1));
    let branch = match (a0, b0, c0) {
        (false, false, false) => Branch::AllZeroAtoms,
        (true, false, false) if !a1 => Branch::FirstSeasonShifted,
        (true, false, false) => Branch::FirstSeasonDoubleShifted,
        (false, true, false) if !b1 => Branch::SecondSeasonShifted,
        (false, true, false) => Branch::SecondSeasonDoubleShifted,
        (false, false, true) if !c1 => Branch::ThirdSeasonShifted,
        (false, false, true) => Branch::ThirdSeasonDoubleShifted,
        (true, true, false) => Branch::FirstTwoShifted,
        (true, false, true) => Branch::FirstAndThirdShifted,
        (false, true, true) => Branch::LastTwoShifted,
        (true, true, true) => return Err(RuinError::NoBranchMatched),
    };
    Ok(branch)
}

/// Index of the first non-zero atom of the aggregate claim.
pub fn leading_atom<T: Scalar>(model: &SeasonalModel<T>) -> Option<usize> {
    model.aggregate().masses().iter().position(|p| !p.is_zero())
}
