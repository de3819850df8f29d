//! Weighted norms of states and trajectories, and measured constants of the
//! stability estimates.

mod bounds;
mod norms;
mod quantity;
mod series;

pub use bounds::{
    bootstrap_defs, bootstrap_panel, growth_flags, theorem_bound_check, theorem_defs, write_rows_csv, BoundAccumulator,
    BoundDef, BoundRow, Combine, Composite, Term, BOUND_CSV_HEADER,
};
pub use norms::{norm_parts, weighted_norm, ClassSel, ModeWeights, NormParts, NormSpec, Prefix, TimeAggregate, Weight};
pub use quantity::{Field, Quantity};
pub use series::{an_norm, b_norm, trapezoid, Aggregates, DiagnosticSeries, PartsSeries};
