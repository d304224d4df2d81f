//! Two-input gate alphabet shared by the spike and RC miners.
//!
//! Both substrates are quiescent under input (0,0), so only the seven
//! non-constant tables with `f(0,0) = 0` are reachable.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TwoInputGate {
    /// x + y
    Or,
    /// select y
    SelectY,
    /// x ⊕ y
    Xor,
    /// select x
    SelectX,
    /// ¬x · y
    NotXAndY,
    /// x · ¬y
    XAndNotY,
    /// x · y
    And,
}

impl TwoInputGate {
    /// Column order of the per-electrode census table.
    pub const CENSUS_ORDER: [TwoInputGate; 7] = [
        Self::Or,
        Self::SelectY,
        Self::Xor,
        Self::SelectX,
        Self::NotXAndY,
        Self::XAndNotY,
        Self::And,
    ];

    /// Axis order of the ratio distribution.
    pub const RATIO_ORDER: [TwoInputGate; 7] = [
        Self::SelectX,
        Self::SelectY,
        Self::NotXAndY,
        Self::XAndNotY,
        Self::Or,
        Self::And,
        Self::Xor,
    ];

    /// Position in [`TwoInputGate::CENSUS_ORDER`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Gate whose outputs on inputs (0,1), (1,0), (1,1) are the given bits;
    /// `None` for the all-false triple.
    pub fn from_outputs(o01: bool, o10: bool, o11: bool) -> Option<Self> {
        Some(match (o01, o10, o11) {
            (true, true, true) => Self::Or,
            (true, false, true) => Self::SelectY,
            (true, true, false) => Self::Xor,
            (false, true, true) => Self::SelectX,
            (true, false, false) => Self::NotXAndY,
            (false, true, false) => Self::XAndNotY,
            (false, false, true) => Self::And,
            (false, false, false) => return None,
        })
    }

    /// Classifies a full two-input table; tables with `f(0,0) = 1` are not
    /// in the alphabet.
    pub fn from_table(f00: bool, f01: bool, f10: bool, f11: bool) -> Option<Self> {
        if f00 {
            None
        } else {
            Self::from_outputs(f01, f10, f11)
        }
    }

    pub fn outputs(self) -> (bool, bool, bool) {
        match self {
            Self::Or => (true, true, true),
            Self::SelectY => (true, false, true),
            Self::Xor => (true, true, false),
            Self::SelectX => (false, true, true),
            Self::NotXAndY => (true, false, false),
            Self::XAndNotY => (false, true, false),
            Self::And => (false, false, true),
        }
    }

    /// The gate obtained by exchanging the roles of x and y.
    pub fn swap_inputs(self) -> Self {
        let (o01, o10, o11) = self.outputs();
        Self::from_outputs(o10, o01, o11).expect("non-zero triple")
    }

    pub fn class(self) -> GateClass {
        match self {
            Self::Or => GateClass::Or,
            Self::SelectX | Self::SelectY => GateClass::Select,
            Self::Xor => GateClass::Xor,
            Self::NotXAndY | Self::XAndNotY => GateClass::AndNot,
            Self::And => GateClass::And,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Or => "x+y",
            Self::SelectY => "Sy",
            Self::Xor => "x⊕y",
            Self::SelectX => "Sx",
            Self::NotXAndY => "¬x·y",
            Self::XAndNotY => "x·¬y",
            Self::And => "x·y",
        }
    }

    /// ASCII column header.
    pub fn key(self) -> &'static str {
        match self {
            Self::Or => "x+y",
            Self::SelectY => "Sy",
            Self::Xor => "xor",
            Self::SelectX => "Sx",
            Self::NotXAndY => "~x.y",
            Self::XAndNotY => "x.~y",
            Self::And => "x.y",
        }
    }
}

/// Gate families counted by the RC threshold sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GateClass {
    And,
    Or,
    AndNot,
    Select,
    Xor,
}

impl GateClass {
    pub const ALL: [GateClass; 5] = [Self::And, Self::Or, Self::AndNot, Self::Select, Self::Xor];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn key(self) -> &'static str {
        match self {
            Self::And => "and",
            Self::Or => "or",
            Self::AndNot => "andnot",
            Self::Select => "select",
            Self::Xor => "xor",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_matches_fixed_mapping() {
        use TwoInputGate::*;
        let expected = [
            ((true, true, true), Or),
            ((true, false, true), SelectY),
            ((true, true, false), Xor),
            ((false, true, true), SelectX),
            ((true, false, false), NotXAndY),
            ((false, true, false), XAndNotY),
            ((false, false, true), And),
        ];
        for ((a, b, c), g) in expected {
            assert_eq!(TwoInputGate::from_outputs(a, b, c), Some(g));
            assert_eq!(g.outputs(), (a, b, c));
        }
        assert_eq!(TwoInputGate::from_outputs(false, false, false), None);
        assert_eq!(TwoInputGate::from_table(true, true, true, true), None);
    }

    #[test]
    fn census_order_matches_discriminants() {
        for (i, g) in TwoInputGate::CENSUS_ORDER.iter().enumerate() {
            assert_eq!(g.index(), i);
        }
        for (i, c) in GateClass::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
        }
    }

    #[test]
    fn swapping_inputs() {
        use TwoInputGate::*;
        assert_eq!(SelectX.swap_inputs(), SelectY);
        assert_eq!(NotXAndY.swap_inputs(), XAndNotY);
        for g in [Or, And, Xor] {
            assert_eq!(g.swap_inputs(), g);
        }
        for g in TwoInputGate::CENSUS_ORDER {
            assert_eq!(g.swap_inputs().swap_inputs(), g);
            assert_eq!(g.swap_inputs().class(), g.class());
        }
    }
}
