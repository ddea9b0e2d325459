//! Truncated real Puiseux series: the concrete model of the field of germs
//! of definable arcs, and arcs as tuples of such series.

mod coeff;
mod ops;
mod series;

use thiserror::Error;

pub use coeff::{Coeff, CoeffError, FLOAT_CANCEL_TOL};
pub use ops::Limit;
pub use series::{ram_cap, set_ram_cap, PuiseuxSeries, Series, Valuation, DEFAULT_RAM_CAP};

use crate::qarith::{Bound, Exp, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("no coefficient is known below t^{0}")]
    ZeroUpToTruncation(Exp),
    #[error("division by an exact zero")]
    DivisionByZero,
    #[error("difference is zero up to t^{0}; the order cannot be decided")]
    IndistinguishableAtTruncation(Exp),
    #[error("even root of a germ with negative leading coefficient")]
    NegativeBaseForEvenRoot,
    #[error("leading coefficient has no rational root; rerun in numeric mode")]
    IrrationalLeadingRoot,
    #[error("leading coefficient is not a unit of the coefficient ring")]
    NonUnitLeadingCoefficient,
    #[error("substituted series must have positive valuation, found {0}")]
    NonPositiveValuationSubstitution(Exp),
    #[error("germ is not positive")]
    NotPositive,
    #[error("ramification {needed} exceeds the cap {cap}")]
    RamificationCap { needed: u64, cap: u32 },
    #[error("an infinite expansion needs an explicit order")]
    PrecisionRequired,
    #[error("fixed-point iteration did not converge")]
    NoConvergence,
}

/// An arc germ at `0+`: one series per ambient coordinate.
#[derive(Clone, PartialEq)]
pub struct Arc<C: Coeff = Rat> {
    components: Vec<Series<C>>,
}

impl<C: Coeff> Arc<C> {
    pub fn new(components: Vec<Series<C>>) -> Self {
        Arc { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Series<C>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Series<C> {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<Series<C>> {
        self.components
    }

    /// Least common ramification of the components.
    pub fn ram(&self) -> u64 {
        use num::Integer;
        self.components.iter().fold(1, |acc, s| acc.lcm(&s.ram()))
    }

    /// Smallest truncation order over the components.
    pub fn trunc(&self) -> Bound {
        self.components.iter().map(Series::trunc).min().unwrap_or(Bound::Infinite)
    }

    pub fn sub(&self, other: &Arc<C>) -> Arc<C> {
        assert_eq!(self.dim(), other.dim(), "arc dimensions differ");
        Arc::new(self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect())
    }

    pub fn truncate(&self, bound: Bound) -> Arc<C> {
        Arc::new(self.components.iter().map(|s| s.truncate(bound)).collect())
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> Arc<D> {
        Arc::new(self.components.iter().map(|s| s.map_coeffs(f)).collect())
    }

    /// Whether the arc starts at the origin (every component has a zero
    /// limit at `0+`).
    pub fn is_based_at_origin(&self) -> bool {
        self.components.iter().all(|s| matches!(s.limit0(), Limit::Value(ref c) if c.is_zero()))
    }

    pub fn limit0(&self) -> Vec<Limit<C>> {
        self.components.iter().map(Series::limit0).collect()
    }
}

impl<C: Coeff> std::fmt::Debug for Arc<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.components.iter()).finish()
    }
}

impl<C: Coeff> std::fmt::Display for Arc<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Rational series converted to numeric mode.
pub fn to_numeric(s: &PuiseuxSeries) -> Series<f64> {
    s.map_coeffs(Rat::to_f64)
}
