//! Comparison metrics over a set of returned chronopaths.

use alloc::collections::BTreeSet;

use crate::chronopath::Chronopath;
use crate::VertexId;

/// Distinct vertices on any path divided by `vertex_count`; `0` when either
/// side is empty.
pub fn coverage_rate<'a>(paths: impl IntoIterator<Item = &'a Chronopath>, vertex_count: usize) -> f64 {
    if vertex_count == 0 {
        return 0.0;
    }
    let covered: BTreeSet<VertexId> = paths.into_iter().flat_map(|p| p.vertex_sequence()).collect();
    covered.len() as f64 / vertex_count as f64
}

/// Mean edge count over all paths, zero-length paths included; `0` when
/// there are no paths.
pub fn avg_path_length<'a>(paths: impl IntoIterator<Item = &'a Chronopath>) -> f64 {
    let (count, edges) = paths
        .into_iter()
        .fold((0usize, 0usize), |(c, e), p| (c + 1, e + p.edge_count()));
    if count == 0 {
        0.0
    } else {
        edges as f64 / count as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chronopath::{PathSegment, SegmentScope};
    use alloc::vec;

    fn path(vertices: &[VertexId]) -> Chronopath {
        Chronopath {
            segments: vec![PathSegment {
                snapshot: 0,
                vertices: vertices.to_vec(),
                weights: vec![1.0; vertices.len() - 1],
                length: (vertices.len() - 1) as f64,
                scope: SegmentScope::FullSnapshot,
            }],
            total_length: (vertices.len() - 1) as f64,
            hdv_fraction: 1.0,
            significance: 1.0,
        }
    }

    #[test]
    fn coverage_of_three_in_ten() {
        let paths = [path(&[0, 1, 2]), path(&[0, 2])];
        assert!((coverage_rate(&paths, 10) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(coverage_rate(&[], 10), 0.0);
        assert_eq!(avg_path_length(&[]), 0.0);
    }

    #[test]
    fn zero_length_paths_pull_mean_down() {
        let paths = [path(&[4]), path(&[0, 1, 2])];
        assert_eq!(avg_path_length(&paths), 1.0);
    }
}
