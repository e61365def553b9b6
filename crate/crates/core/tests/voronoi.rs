use std::f64::consts::PI;

use dkmeasure::mc::random_configuration;
use dkmeasure::tri::{angle_pattern, delaunay};
use dkmeasure::voronoi::{dual_graph, LengthKind};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dual_angles_split_the_edge_angle(seed in 0u64..10_000, n in 2usize..12) {
        let t = delaunay(&random_configuration(n, seed)).unwrap();
        let pat = angle_pattern(&t).unwrap();
        let g = dual_graph(&t).unwrap();
        for e in &g.edges {
            let theta = pat.get(e.v1, e.v2).unwrap();
            prop_assert!((e.theta() - theta).abs() < 1e-10, "{} vs {theta}", e.theta());
            prop_assert!(e.theta_n.abs() < PI / 2.0 && e.theta_s.abs() < PI / 2.0);
            let (lh, lf) = (e.length(LengthKind::Hyperbolic).unwrap(), e.length(LengthKind::Flat).unwrap());
            prop_assert!(lh >= 0.0 && lf >= 0.0);
            // sin θ_n is the signed height of the north circumcenter over the chord, in circumradii
            let w = g.nodes[g.node_index(e.north).unwrap()].center;
            let (z1, z2) = (t.config().point(e.v1).unwrap(), t.config().point(e.v2).unwrap());
            let height = ((z2 - z1).conj() * (w - z1)).im / (z2 - z1).norm();
            prop_assert!((e.theta_n.sin() - height / (w - z1).norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn dual_distances_are_symmetric(seed in 0u64..10_000, n in 3usize..10) {
        let t = delaunay(&random_configuration(n, seed)).unwrap();
        let g = dual_graph(&t).unwrap();
        let k = g.nodes.len();
        let d: Vec<Vec<f64>> = (0..k).map(|s| g.distances_from(s, LengthKind::Hyperbolic).unwrap()).collect();
        for i in 0..k {
            prop_assert_eq!(d[i][i], 0.0);
            for j in 0..k {
                if d[i][j].is_finite() {
                    prop_assert!((d[i][j] - d[j][i]).abs() <= 1e-12 * d[i][j].max(1.0));
                }
            }
        }
    }
}
