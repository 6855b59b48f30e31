//! File formats: run configuration, edge lists, point clouds, IDX images and
//! run records.

pub mod config;
pub mod edgelist;
pub mod idx;
pub mod points;

pub use crate::record::{write_atomic, Row, RunRecord};
pub use config::{load_config, parse_config, ProblemKind, RunConfig};
pub use edgelist::{parse_edge_list, read_edge_list};
pub use idx::{parse_idx, pca, read_idx, IdxArray};
pub use points::{parse_points, read_points, write_points};
