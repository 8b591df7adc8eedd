use proptest::prelude::*;
use rainshift_core::cluster::{agglomerate, cut_height, cut_k, distance_matrix, Linkage, Metric, Standardize};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LINKAGES: [Linkage; 4] = [Linkage::Single, Linkage::Complete, Linkage::Average, Linkage::Ward];

fn labelled(rows: &[Vec<f64>]) -> Vec<(String, Vec<f64>)> {
    rows.iter().enumerate().map(|(i, r)| (i.to_string(), r.clone())).collect()
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(0.0..1.0)).collect()).collect()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn centroid(rows: &[Vec<f64>], members: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; rows[0].len()];
    for &m in members {
        for (ci, x) in c.iter_mut().zip(&rows[m]) {
            *ci += x;
        }
    }
    c.iter().map(|v| v / members.len() as f64).collect()
}

/// Linkage distance between two member sets, computed from the raw vectors.
fn linkage_distance(rows: &[Vec<f64>], a: &[usize], b: &[usize], linkage: Linkage) -> f64 {
    let pairs = || a.iter().flat_map(|&i| b.iter().map(move |&j| euclid(&rows[i], &rows[j])));
    match linkage {
        Linkage::Single => pairs().fold(f64::INFINITY, f64::min),
        Linkage::Complete => pairs().fold(0.0, f64::max),
        Linkage::Average => pairs().sum::<f64>() / (a.len() * b.len()) as f64,
        Linkage::Ward => {
            let (na, nb) = (a.len() as f64, b.len() as f64);
            let d = euclid(&centroid(rows, a), &centroid(rows, b));
            (2.0 * na * nb / (na + nb)).sqrt() * d
        }
    }
}

/// Brute-force agglomeration: every step re-evaluates every pair of
/// clusters from scratch. Returns (left, right, height) per step.
fn oracle(rows: &[Vec<f64>], linkage: Linkage) -> Vec<(usize, usize, f64)> {
    let n = rows.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut out = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let d = linkage_distance(rows, &clusters[i].1, &clusters[j].1, linkage);
                let (lo, hi) = {
                    let (x, y) = (clusters[i].0, clusters[j].0);
                    (x.min(y), x.max(y))
                };
                if best.is_none_or(|(bd, _, _, bl, bh)| d < bd || (d == bd && (lo, hi) < (bl, bh))) {
                    best = Some((d, i, j, lo, hi));
                }
            }
        }
        let (d, i, j, lo, hi) = best.unwrap();
        out.push((lo, hi, d));
        let mut merged = clusters[i].1.clone();
        merged.extend_from_slice(&clusters[j].1);
        clusters.remove(j);
        clusters[i] = (n + step, merged);
    }
    out
}

#[test]
fn matches_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let rows = random_rows(&mut rng, 10, 12);
        let dm = distance_matrix(&labelled(&rows), Metric::Euclidean, Standardize::None).unwrap();
        for linkage in LINKAGES {
            let d = agglomerate(&dm, linkage);
            let expected = oracle(&rows, linkage);
            for (s, (l, r, h)) in d.steps.iter().zip(&expected) {
                assert_eq!((s.left, s.right), (*l, *r), "{linkage}");
                assert!((s.height - h).abs() <= 1e-10, "{linkage}: {} vs {h}", s.height);
            }
        }
    }
}

#[test]
fn single_linkage_heights_are_minimum_spanning_tree_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..50 {
        let n = rng.random_range(2..25);
        let rows = random_rows(&mut rng, n, 3);
        // Prim's algorithm.
        let mut in_tree = vec![false; n];
        let mut best = vec![f64::INFINITY; n];
        best[0] = 0.0;
        let mut edges = Vec::new();
        for step in 0..n {
            let u = (0..n).filter(|&i| !in_tree[i]).min_by(|&a, &b| best[a].total_cmp(&best[b])).unwrap();
            in_tree[u] = true;
            if step > 0 {
                edges.push(best[u]);
            }
            for v in 0..n {
                if !in_tree[v] {
                    best[v] = best[v].min(euclid(&rows[u], &rows[v]));
                }
            }
        }
        edges.sort_by(f64::total_cmp);
        let dm = distance_matrix(&labelled(&rows), Metric::Euclidean, Standardize::None).unwrap();
        let heights: Vec<f64> = agglomerate(&dm, Linkage::Single).steps.iter().map(|s| s.height).collect();
        for (h, e) in heights.iter().zip(edges) {
            assert!((h - e).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn heights_are_monotone_and_sizes_add_up(seed in any::<u64>(), n in 2usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = random_rows(&mut rng, n, 12);
        let dm = distance_matrix(&labelled(&rows), Metric::Euclidean, Standardize::ZScore).unwrap();
        for linkage in LINKAGES {
            let d = agglomerate(&dm, linkage);
            prop_assert_eq!(d.steps.len(), n - 1);
            prop_assert_eq!(d.steps.last().unwrap().size, n);
            for w in d.steps.windows(2) {
                prop_assert!(w[1].height >= w[0].height);
            }
            let mut used = vec![false; 2 * n - 1];
            for s in &d.steps {
                prop_assert!(s.left < s.right && !used[s.left] && !used[s.right]);
                used[s.left] = true;
                used[s.right] = true;
                let size = |id: usize| if id < n { 1 } else { d.steps[id - n].size };
                prop_assert_eq!(s.size, size(s.left) + size(s.right));
            }
            let mut order = d.leaf_order();
            order.sort_unstable();
            prop_assert_eq!(order, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn heights_do_not_depend_on_input_order(seed in any::<u64>(), n in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = random_rows(&mut rng, n, 4);
        let mut rev = rows.clone();
        rev.reverse();
        for linkage in LINKAGES {
            let a = agglomerate(&distance_matrix(&labelled(&rows), Metric::Euclidean, Standardize::None).unwrap(), linkage);
            let b = agglomerate(&distance_matrix(&labelled(&rev), Metric::Euclidean, Standardize::None).unwrap(), linkage);
            for (x, y) in a.steps.iter().zip(&b.steps) {
                prop_assert!((x.height - y.height).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cutting_yields_requested_cluster_count(seed in any::<u64>(), n in 2usize..30, k_frac in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = random_rows(&mut rng, n, 12);
        let dm = distance_matrix(&labelled(&rows), Metric::Euclidean, Standardize::None).unwrap();
        let d = agglomerate(&dm, Linkage::Average);
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        let c = cut_k(&d, k).unwrap();
        prop_assert_eq!(c.k, k);
        let groups = c.groups();
        prop_assert!(groups.iter().all(|g| !g.is_empty()));
        prop_assert_eq!(groups.iter().map(Vec::len).sum::<usize>(), n);
        // With distinct heights, cutting at the last kept merge height gives
        // the same partition.
        if k < n {
            prop_assert_eq!(cut_height(&d, d.steps[n - k - 1].height), c);
        }
    }
}
