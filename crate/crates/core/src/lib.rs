//! Persistent entropy of planar cell tessellations.
//!
//! The pipeline takes a labeled segmentation raster (or a ready point cloud),
//! selects a fixed number of cells by a square spiral walk around the image
//! centre, reduces each cell to its centroid, builds the alpha filtration of
//! the Delaunay triangulation of those centroids, computes persistence
//! barcodes in dimensions 0 and 1 and summarizes them with persistent
//! entropy. Groups of samples are then compared with the Kruskal-Wallis
//! omnibus test and Dunn's pairwise post-hoc test.
//!
//! Filtration values use the squared-radius convention: vertices enter at 0,
//! triangles at their squared circumradius.

pub mod alpha;
pub mod delaunay;
pub mod entropy;
pub mod geometry;
pub mod ingest;
pub mod par;
pub mod persistence;
pub mod pipeline;
pub mod predicates;
pub mod special;
pub mod stats;
pub mod synth;

pub use alpha::{alpha_filtration, FilteredComplex, FilteredSimplex, Simplex};
pub use delaunay::{delaunay_triangulate, Triangulation};
pub use entropy::{persistent_entropy, summarize_entropy, EntropySummary, InfinitePolicy};
pub use geometry::{Point, PointCloud};
pub use ingest::{compute_centroids, load_label_matrix, spiral_select, CellSet, LabelMatrix};
pub use persistence::{compute_persistence, dim0_union_find, Barcode, Interval};
pub use stats::{dunn_test, kruskal_wallis, Adjustment, GroupSample};
