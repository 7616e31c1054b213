//! Single-qubit Pauli group with exact phase tracking.
//!
//! Every pulse, toggling-frame conjugation and cyclicity check in the crate
//! reduces to products in the 16-element group `{±1, ±i} × {I, X, Y, Z}`.
//! Phases are kept as exponents of `i`, so products are exact.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Label of a single-qubit Pauli operator. Ordered `I < X < Y < Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 4] = [PauliAxis::I, PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
    /// The three nontrivial axes, in `x, y, z` order.
    pub const SPATIAL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn is_identity(self) -> bool {
        self == PauliAxis::I
    }

    pub fn as_char(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }

    /// Case-insensitive inverse of [`PauliAxis::as_char`].
    pub fn from_char(c: char) -> Option<PauliAxis> {
        match c.to_ascii_uppercase() {
            'I' => Some(PauliAxis::I),
            'X' => Some(PauliAxis::X),
            'Y' => Some(PauliAxis::Y),
            'Z' => Some(PauliAxis::Z),
            _ => None,
        }
    }

    /// The two spatial axes orthogonal to `self`. Empty for `I`.
    pub fn orthogonal(self) -> &'static [PauliAxis] {
        match self {
            PauliAxis::I => &[],
            PauliAxis::X => &[PauliAxis::Y, PauliAxis::Z],
            PauliAxis::Y => &[PauliAxis::X, PauliAxis::Z],
            PauliAxis::Z => &[PauliAxis::X, PauliAxis::Y],
        }
    }

    /// Product of two bare axes: `σ_a σ_b = phase · σ_c`.
    pub fn compose(self, rhs: PauliAxis) -> (Phase, PauliAxis) {
        use PauliAxis::*;
        match (self, rhs) {
            (I, b) => (Phase::ONE, b),
            (a, I) => (Phase::ONE, a),
            (a, b) if a == b => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, X) => (Phase::MINUS_I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, Y) => (Phase::MINUS_I, X),
            (Z, X) => (Phase::I, Y),
            (X, Z) => (Phase::MINUS_I, Y),
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A fourth root of unity, stored as the exponent `k` of `i^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    #[inline]
    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    /// `(re, im)` of `i^k` as small integers.
    pub fn as_pair(self) -> (i64, i64) {
        match self.0 {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        }
    }

    /// Prefix used in canonical text form: `""`, `"i"`, `"-"`, `"-i"`.
    pub fn prefix(self) -> &'static str {
        match self.0 {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Element of the single-qubit Pauli group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasedPauli {
    phase: Phase,
    axis: PauliAxis,
}

impl PhasedPauli {
    pub const IDENTITY: PhasedPauli = PhasedPauli { phase: Phase::ONE, axis: PauliAxis::I };

    pub fn new(phase: Phase, axis: PauliAxis) -> Self {
        PhasedPauli { phase, axis }
    }

    pub fn phase(self) -> Phase {
        self.phase
    }

    pub fn axis(self) -> PauliAxis {
        self.axis
    }

    /// Drops the phase.
    pub fn unphased(self) -> PhasedPauli {
        PhasedPauli::from(self.axis)
    }

    pub fn is_identity_up_to_phase(self) -> bool {
        self.axis.is_identity()
    }

    /// Hermitian adjoint. Pauli matrices are Hermitian so only the phase conjugates.
    pub fn adjoint(self) -> PhasedPauli {
        PhasedPauli { phase: self.phase.conj(), axis: self.axis }
    }
}

impl From<PauliAxis> for PhasedPauli {
    fn from(axis: PauliAxis) -> Self {
        PhasedPauli { phase: Phase::ONE, axis }
    }
}

impl Mul for PhasedPauli {
    type Output = PhasedPauli;
    fn mul(self, rhs: PhasedPauli) -> PhasedPauli {
        mul(self, rhs)
    }
}

/// Group product `p · q` with exact phase.
pub fn mul(p: PhasedPauli, q: PhasedPauli) -> PhasedPauli {
    let (ph, axis) = p.axis.compose(q.axis);
    PhasedPauli { phase: p.phase * q.phase * ph, axis }
}

/// Sign `s` with `P† σ_μ P = s σ_μ`: `+1` when `p` and `mu` commute, `-1` otherwise.
pub fn conj_sign(p: PauliAxis, mu: PauliAxis) -> i8 {
    if p == PauliAxis::I || mu == PauliAxis::I || p == mu {
        1
    } else {
        -1
    }
}

/// Ordered product of a slice, leftmost factor first: `ps[0] · ps[1] · …`.
pub fn product<'a, I>(ps: I) -> PhasedPauli
where
    I: IntoIterator<Item = &'a PhasedPauli>,
{
    ps.into_iter().fold(PhasedPauli::IDENTITY, |acc, &p| acc * p)
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.phase.prefix(), self.axis)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliParseError {
    #[error("empty Pauli label")]
    Empty,
    #[error("'{0}' is not a valid single-qubit Pauli label")]
    Invalid(String),
}

impl FromStr for PhasedPauli {
    type Err = PauliParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(PauliParseError::Empty);
        }
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (Phase::ONE, r)
        } else if s.len() > 1 && s.starts_with('i') {
            (Phase::I, &s[1..])
        } else {
            (Phase::ONE, s)
        };
        let mut chars = rest.chars();
        match (chars.next().and_then(PauliAxis::from_char), chars.next()) {
            (Some(axis), None) => Ok(PhasedPauli { phase, axis }),
            _ => Err(PauliParseError::Invalid(s.to_string())),
        }
    }
}
