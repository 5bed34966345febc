//! The Selmer-dimension accounting engine. The ledger never stores
//! cohomology classes, only per-place dimensions and chosen local-condition
//! dimensions; the one computable quantity is the difference
//! `dim(Selmer) - dim(dual Selmer)` given by the global formula
//!
//! `h0_global - h0_global_dual + sum_v (dim L_v - h0_v)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::local::LocalDims;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("place {0}: local condition dimension exceeds h1")]
    ConditionTooBig(String),
    #[error("place {0}: dual condition dimension would be negative")]
    DualConditionNegative(String),
    #[error("place {0}: tame Euler characteristic h1 = h0 + h2 violated")]
    EulerViolation(String),
    #[error("duplicate place label {0}")]
    DuplicateLabel(String),
}

/// Per-place dimension data and the chosen local condition.
///
/// `h2` is carried through `h0_dual` (local duality for self-dual adjoint
/// modules), so a tame entry cannot silently violate `h1 = h0 + h2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceEntry {
    pub label: String,
    pub h0: u32,
    pub h1: u32,
    pub h0_dual: u32,
    pub h1_dual: u32,
    #[serde(rename = "dimL")]
    pub dim_l: u32,
}

impl PlaceEntry {
    /// Tame place: `h1 = h0 + h2` with `h2 = h0_dual`, and symmetrically for
    /// the dual module.
    pub fn tame(
        label: impl Into<String>,
        h0: u32,
        h0_dual: u32,
        dim_l: u32,
    ) -> Result<Self, LedgerError> {
        let entry = PlaceEntry {
            label: label.into(),
            h0,
            h1: h0 + h0_dual,
            h0_dual,
            h1_dual: h0_dual + h0,
            dim_l,
        };
        entry.validate()?;
        Ok(entry)
    }

    /// Nice place: `(h0, h1, h2) = (1, 2, 1)` on both sides.
    pub fn nice(label: impl Into<String>, dim_l: u32) -> Result<Self, LedgerError> {
        PlaceEntry::tame(label, 1, 1, dim_l)
    }

    pub fn from_local_dims(
        label: impl Into<String>,
        dims: &LocalDims,
        dual: &LocalDims,
        dim_l: u32,
    ) -> Result<Self, LedgerError> {
        let entry = PlaceEntry {
            label: label.into(),
            h0: dims.h0,
            h1: dims.h1,
            h0_dual: dual.h0,
            h1_dual: dual.h1,
            dim_l,
        };
        entry.validate()?;
        Ok(entry)
    }

    pub fn validate(&self) -> Result<(), LedgerError> {
        if self.dim_l > self.h1 {
            return Err(LedgerError::ConditionTooBig(self.label.clone()));
        }
        if self.dim_l > self.h1_dual {
            return Err(LedgerError::DualConditionNegative(self.label.clone()));
        }
        if self.h1 != self.h0 + self.h0_dual || self.h1_dual != self.h0_dual + self.h0 {
            return Err(LedgerError::EulerViolation(self.label.clone()));
        }
        Ok(())
    }

    /// Dimension of the annihilator condition under the local pairing.
    pub fn dim_l_perp(&self) -> u32 {
        self.h1_dual - self.dim_l
    }

    /// This place's summand in the global formula.
    pub fn contribution(&self) -> i64 {
        self.dim_l as i64 - self.h0 as i64
    }
}

/// The accounting object: global `H^0` dimensions plus one entry per place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Ledger {
    pub global_h0: u32,
    pub global_h0_dual: u32,
    pub places: Vec<PlaceEntry>,
}

impl Ledger {
    /// Absolutely irreducible setting: both global terms vanish.
    pub fn new() -> Self {
        Ledger::default()
    }

    pub fn with_global(global_h0: u32, global_h0_dual: u32) -> Self {
        Ledger {
            global_h0,
            global_h0_dual,
            places: vec![],
        }
    }

    pub fn validate(&self) -> Result<(), LedgerError> {
        let mut seen = std::collections::BTreeSet::new();
        for place in &self.places {
            place.validate()?;
            if !seen.insert(&place.label) {
                return Err(LedgerError::DuplicateLabel(place.label.clone()));
            }
        }
        Ok(())
    }

    pub fn push(&mut self, entry: PlaceEntry) -> Result<(), LedgerError> {
        entry.validate()?;
        if self.places.iter().any(|p| p.label == entry.label) {
            return Err(LedgerError::DuplicateLabel(entry.label));
        }
        self.places.push(entry);
        Ok(())
    }

    /// `dim(Selmer) - dim(dual Selmer)` by the global formula.
    pub fn wiles_difference(&self) -> i64 {
        self.global_h0 as i64 - self.global_h0_dual as i64
            + self.places.iter().map(|p| p.contribution()).sum::<i64>()
    }

    /// Append a full-condition tame place and return the change in the
    /// difference, which is `h1 - h0 = h2`; equal to 1 for nice places.
    pub fn add_place_delta(&mut self, mut entry: PlaceEntry) -> Result<i64, LedgerError> {
        entry.dim_l = entry.h1;
        let before = self.wiles_difference();
        self.push(entry)?;
        Ok(self.wiles_difference() - before)
    }

    /// True when the difference vanishes for the current conditions: the
    /// global-to-local map has kernel and cokernel of equal size, the
    /// balance that pins a unique well-behaved lift.
    pub fn auxiliary_balance(&self) -> bool {
        self.wiles_difference() == 0
    }
}

/// Number of nice primes consumed to kill the global-to-local kernels in
/// both degrees: one per basis element of each kernel.
pub fn sha_elimination_plan(dim_sha1: u32, dim_sha1_dual: u32) -> u32 {
    dim_sha1 + dim_sha1_dual
}

/// The three dimension chases used by the lifting driver, as ledger
/// constructors. `n` counts nice auxiliary places; `d` the extra dual
/// dimension carried by the ambient set.
pub mod chases {
    use super::*;

    /// Background block: places with total `h0 = count` and zero conditions,
    /// each of twist-0 type (`h0 = 1, h0_dual = 0`).
    fn background(ledger: &mut Ledger, count: u32) {
        for i in 0..count {
            let entry = PlaceEntry::tame(format!("bg{}", i), 1, 0, 0).expect("valid background");
            ledger.push(entry).expect("fresh label");
        }
    }

    /// Zero-condition base over `S ∪ R` with `sum h0 = n`, then `n` nice
    /// places with full conditions: the difference walks `0 - n + n = 0`.
    pub fn unramified_chase(n: u32) -> (i64, i64) {
        let mut ledger = Ledger::new();
        background(&mut ledger, n);
        let base = ledger.wiles_difference();
        for i in 0..n {
            let nice = PlaceEntry::nice(format!("q{}", i), 2).expect("valid nice place");
            ledger.push(nice).expect("fresh label");
        }
        (base, ledger.wiles_difference())
    }

    /// Conditions: unramified at one distinguished nice place, zero
    /// elsewhere; base difference `-2n - d + 1`, then one more nice place
    /// with the full condition gives `-2n - d + 2`.
    pub fn distinguished_chase(n: u32, d: u32) -> (i64, i64) {
        assert!(n >= 1);
        let mut ledger = Ledger::new();
        background(&mut ledger, n + d);
        for i in 0..n {
            let dim_l = if i == 0 { 1 } else { 0 };
            let nice = PlaceEntry::nice(format!("q{}", i), dim_l).expect("valid nice place");
            ledger.push(nice).expect("fresh label");
        }
        let base = ledger.wiles_difference();
        let mut with_t = ledger;
        let delta = with_t
            .add_place_delta(PlaceEntry::nice("t", 0).expect("valid"))
            .expect("fresh label");
        debug_assert_eq!(delta, 1);
        (base, with_t.wiles_difference())
    }

    /// All conditions zero: base `-2n - d`, then the extra nice place with
    /// the full condition gives `-2n - d + 1`.
    pub fn zero_condition_chase(n: u32, d: u32) -> (i64, i64) {
        let mut ledger = Ledger::new();
        background(&mut ledger, n + d);
        for i in 0..n {
            let nice = PlaceEntry::nice(format!("q{}", i), 0).expect("valid nice place");
            ledger.push(nice).expect("fresh label");
        }
        let base = ledger.wiles_difference();
        let mut with_t = ledger;
        with_t
            .add_place_delta(PlaceEntry::nice("t", 0).expect("valid"))
            .expect("fresh label");
        (base, with_t.wiles_difference())
    }
}
