//! Constructions of every graph family used by the crate.

pub mod canopy;
pub mod end_tree;
pub mod ensemble;
pub mod galton_watson;
pub mod lattice;
pub mod percolation;

pub use canopy::{
    canopy_tree, epsilon_sequence, limit_root_depth_law, reinforce_edges, root_depth_distribution,
    CanopyCoord, CanopyTree, EpsilonSequence, RootDepthLaw,
};
pub use end_tree::{grandfather_graph, regular_tree, EndTree, TreeCoord};
pub use ensemble::{
    augmented_gw_ensemble, bias_by_degree, canopy_finite_graph, finite_graph_ensemble,
    reinforced_canopy_finite, unbias_by_degree, AugmentedGwEnsemble, CanopyEnsemble, CanopyRoot,
    DegreeReweighted, Ensemble, FiniteEnsemble, FixedEnsemble, LrpClusterEnsemble, Rooting,
};
pub use galton_watson::{augmented_galton_watson, AugmentedGwTree, GwCoord, Offspring};
pub use lattice::{lattice, Lattice};
pub use percolation::{
    cluster_of_origin, long_range_percolation, long_range_percolation_rooted, lrp_cluster, LrpGraph, LrpParams, Norm};
