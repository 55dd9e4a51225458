//! Upper box-counting estimates from dyadic tallies, graph covers, and
//! potential-theoretic lower bounds from correlation integrals.

mod correlation;
mod fit;
mod graph;
mod tally;

pub use correlation::{
    correlation_integral, lower_bound_dimension, lower_bound_from_measures, radial_profile_check,
    CorrelationCurve, STABLE_GROWTH,
};
pub use fit::{default_fit_range, fit_dimension, least_squares, DimensionEstimate};
pub use graph::{
    boxdim_graph, graph_box_counts, graph_cloud, graph_cloud_try, GraphBoxCount, GraphCloud,
    GraphDimension, GraphFitPolicy,
};
pub(crate) use tally::cell_keys;
pub use tally::{cell_index, occupied_cells, tally_boxes, DyadicTally};
