//! Map expressions, blow-up charts, and transport of arcs along maps.

mod chart;
mod eval;
mod expr;
mod phi;
mod preimage;

use thiserror::Error;

pub use chart::{lift_arc_blowup, BlowupChart};
pub use eval::{eval_map_on_arc, eval_map_point, eval_point, eval_series, real_pow};
pub use expr::{Expr, MapExpr};
pub use phi::{
    counterexample_pushforward, family_arc, jacobian_check, jacobian_det, monotone_bound_check, monotone_expr,
    monotone_value, phi_chart_maps, phi_map, phi_product_residual, GridSpec,
};
pub use preimage::solve_preimage_arc;

use crate::newton::NewtonError;
use crate::puiseux::SeriesError;
use crate::qarith::Exp;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("guard violated: {0}")]
    GuardViolation(String),
    #[error("division by a germ that vanishes near 0+")]
    ZeroDivision,
    #[error("map takes {expected} inputs, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the arc is identically zero")]
    ZeroArc,
    #[error("the arc does not start at the origin")]
    NotAtOrigin,
    #[error("t-order {0} is below the minimum of 3")]
    OrderTooLow(Exp),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("no real branch solves the system")]
    NoRealBranch,
    #[error("unsupported system shape: {0}")]
    UnsupportedShape(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Newton(#[from] NewtonError),
}
