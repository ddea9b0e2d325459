//! Truncated real Puiseux series as a model of germs of definable arcs,
//! with Newton-Puiseux root finding, transport of arcs along semialgebraic
//! maps through a point blow-up, and sampled continuity probes comparing
//! the `t`-adic and product topologies on arc spaces.

pub mod newton;
pub mod par;
pub mod param;
pub mod parser;
pub mod probes;
pub mod puiseux;
pub mod qarith;
pub mod transport;
