//! Symbolic–numeric workbench for the Calogero "goldfish" many-body system.
//!
//! The crate verifies the Lie and Noether point-symmetry structure of the
//! goldfish equations, builds the Schrödinger equation that keeps the Noether
//! symmetries as Lie symmetries for any particle number, and cross-checks the
//! classical dynamics numerically.
//!
//! * [`expr`]: exact rational-function kernel (parse, differentiate,
//!   substitute, canonicalize, evaluate).
//! * [`symmetry`]: prolongation, point-symmetry verification, generator
//!   catalog, commutators.
//! * [`variational`]: Euler–Lagrange, Noether condition with gauge
//!   reconstruction, first integrals, Legendre transform.
//! * [`quantize`]: point transformations, linearization, the Schrödinger
//!   constructor and PDE symmetry verification.
//! * [`checks`]: the end-to-end acceptance suite.
//! * [`dynamics`]: algebraic solution by root tracking, adaptive Runge–Kutta
//!   integration and invariant monitoring.

pub mod checks;
pub mod dynamics;
pub mod expr;
pub mod quantize;
pub mod symmetry;
pub mod variational;

pub use expr::{parse, Expr, ExprError, Var, VariableSet, ZeroTest};
pub use quantize::{LinearEvolutionPde, PdeSymmetry, PointTransformation};
pub use symmetry::{OdeSystem, SymmetryReport, VectorField};
pub use variational::{Lagrangian, NoetherResult};

use serde::{Deserialize, Serialize};

/// Verdict of a single check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    /// Combines zero tests that must all vanish.
    pub fn all_zero(tests: impl IntoIterator<Item = ZeroTest>) -> Status {
        let mut status = Status::Pass;
        for t in tests {
            match t {
                ZeroTest::Zero => {}
                ZeroTest::NonZero => return Status::Fail,
                ZeroTest::Inconclusive => status = Status::Inconclusive,
            }
        }
        status
    }

    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Status::Pass
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}
