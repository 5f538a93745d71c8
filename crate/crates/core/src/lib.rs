//! Exact ground states, excited states and domain walls of the
//! Edwards–Anderson Ising spin glass on half-plane boxes.
//!
//! The box has periodic boundary conditions horizontally and free boundary
//! conditions vertically; its bottom row faces the dual x-axis. Everything
//! here is exact: ground states come from a row-by-row transfer-matrix
//! dynamic program, checked against exhaustive enumeration on small boxes.
//!
//! Modules:
//!
//! - [`lattice`]: box geometry, dual lattice, subset/circuit enumerators
//! - [`disorder`]: seeded coupling realizations and local modifications
//! - [`solver`]: exact (clamped) ground states, brute-force oracle, verifier
//! - [`excitation`]: excitation energies, critical values, two-bond critical sets
//! - [`interface`]: interfaces, domain walls, tethered-wall counts
//! - [`lab`]: experiment configs, seeded ensembles and reports

pub mod disorder;
pub mod error;
pub mod excitation;
pub mod interface;
pub mod lab;
pub mod lattice;
pub mod numeric;
pub mod solver;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};

/// A spin value, or the relative sign of two spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_i8(s: i8) -> Self {
        if s >= 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn of(x: f64) -> Self {
        if x >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn value(self) -> f64 {
        f64::from(self.to_i8())
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}
