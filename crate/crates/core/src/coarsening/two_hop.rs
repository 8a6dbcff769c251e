//! Merging of leftover singleton clusters through shared favored clusters.

use crate::graph::{Clustering, Graph, NodeWeight, NO_CLUSTER};

/// Merges singleton clusters that share a favored cluster, respecting
/// `max_weight`, until the number of clusters is at most `shrink_target * n`
/// or no candidates remain. Does nothing if the clustering is already small
/// enough.
pub fn two_hop_merge(
    graph: &Graph,
    mut clustering: Clustering,
    max_weight: NodeWeight,
    shrink_target: f64,
) -> Clustering {
    let n = graph.n();
    let target = (shrink_target * n as f64).ceil() as usize;
    let mut clusters = clustering.num_clusters();
    if clusters <= target || !clustering.has_favored_clusters() {
        return clustering;
    }

    let mut members = vec![0u32; n];
    for &c in clustering.labels() {
        members[c as usize] += 1;
    }
    // leader[f]: singleton that currently collects the nodes favoring f
    let mut leader = vec![NO_CLUSTER; n];
    for v in graph.nodes() {
        if clusters <= target {
            break;
        }
        let label = clustering.cluster_of(v);
        if members[label as usize] != 1 {
            continue;
        }
        let Some(f) = clustering.favored_cluster(v) else {
            continue;
        };
        let weight = graph.node_weight(v);
        match leader[f as usize] {
            NO_CLUSTER => leader[f as usize] = v,
            l => {
                let target_label = clustering.cluster_of(l);
                if clustering.cluster_weight(target_label) + weight <= max_weight {
                    clustering.assign(v, target_label, weight);
                    members[label as usize] -= 1;
                    members[target_label as usize] += 1;
                    clusters -= 1;
                } else {
                    leader[f as usize] = v;
                }
            }
        }
    }
    clustering
}
