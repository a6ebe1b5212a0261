mod common;

use common::{brute_force_kcenter, brute_force_opt, cost, pt};
use fairkc::audit::audit_net;
use fairkc::flow::FlowGraph;
use fairkc::greedy::gonzalez_greedy;
use fairkc::oracle::{exact_fair_kcenter, exact_fair_radius};
use fairkc::streaming::{DoublingState, StreamMode, StreamState};
use fairkc::{
    build_net, expand, merge_nets, solve_fair_3approx, solve_on_coreset, Instance, Metric, Point, PointRef,
};
use proptest::prelude::*;

fn points_strategy(max_n: usize, m: usize) -> impl Strategy<Value = Vec<PointRef>> {
    prop::collection::vec((0i32..40, 0i32..40, 0..m), 1..=max_n).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (x, y, g))| pt(i as u64, vec![x as f64 / 4.0, y as f64 / 4.0], g))
            .collect()
    })
}

fn caps_for(points: &[PointRef], m: usize, raw: &[usize]) -> Vec<usize> {
    let mut caps: Vec<usize> = raw.iter().take(m).copied().collect();
    caps.resize(m, 0);
    if !points.iter().any(|p| caps[p.group] > 0) {
        caps[points[0].group] += 1;
    }
    caps
}

fn ranking(id: u64, order: Vec<u32>) -> Point {
    Point::ranking(id, order, 0).unwrap()
}

fn permutation(len: usize) -> impl Strategy<Value = Vec<u32>> {
    Just((0..len as u32).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vector_metrics_are_metrics(raw in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 3)) {
        let p: Vec<Point> = raw.iter().enumerate().map(|(i, c)| Point::vector(i as u64, c.clone(), 0)).collect();
        for metric in [Metric::l1(3), Metric::l2(3)] {
            let d = |a: usize, b: usize| metric.distance(&p[a], &p[b]);
            prop_assert_eq!(d(0, 0), 0.0);
            prop_assert_eq!(d(0, 1), d(1, 0));
            prop_assert!(d(0, 1) >= 0.0);
            prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
        }
    }

    #[test]
    fn inversions_are_a_metric(a in permutation(6), b in permutation(6), c in permutation(6)) {
        let metric = Metric::kendall(6);
        let (x, y, z) = (ranking(0, a.clone()), ranking(1, b.clone()), ranking(2, c));
        prop_assert_eq!(metric.distance(&x, &y), metric.distance(&y, &x));
        prop_assert!(metric.distance(&x, &z) <= metric.distance(&x, &y) + metric.distance(&y, &z));
        // independent count of discordant pairs
        let pos = |o: &[u32]| { let mut p = vec![0; o.len()]; for (i, &v) in o.iter().enumerate() { p[v as usize] = i; } p };
        let (pa, pb) = (pos(&a), pos(&b));
        let mut discordant = 0;
        for i in 0..6 {
            for j in i + 1..6 {
                if (pa[i] < pa[j]) != (pb[i] < pb[j]) {
                    discordant += 1;
                }
            }
        }
        prop_assert_eq!(metric.distance(&x, &y), discordant as f64);
        prop_assert_eq!(metric.distance(&x, &ranking(3, a)), 0.0);
    }

    #[test]
    fn greedy_within_twice_optimum(points in points_strategy(10, 1), k in 1usize..4, seed in 0usize..10) {
        let metric = Metric::l1(2);
        let seed = seed % points.len();
        let (centers, radius) = gonzalez_greedy(&metric, &points, k, seed).unwrap();
        prop_assert!(centers.len() <= k);
        let chosen: Vec<PointRef> = centers.iter().map(|&i| points[i].clone()).collect();
        prop_assert_eq!(radius, cost(&metric, &points, &chosen));
        prop_assert!(radius <= 2.0 * brute_force_kcenter(&metric, &points, k) + 1e-9);
    }

    #[test]
    fn scan_net_packs_and_covers(points in points_strategy(40, 3), step in 0u32..8) {
        let metric = Metric::l2(2);
        let threshold = step as f64 * 0.75;
        let net = build_net(&metric, &points, threshold, 3).unwrap();
        prop_assert!(audit_net(&metric, &net, &points).is_empty());
        // every point is within the threshold of an anchor holding its color
        for p in &points {
            prop_assert!(net.entries.iter().any(|e| e.has(p.group) && metric.distance(p, &e.anchor) <= threshold));
        }
    }

    #[test]
    fn merge_keeps_colors_and_invariants(a in points_strategy(25, 2), b in points_strategy(25, 2), step in 1u32..6) {
        let metric = Metric::l1(2);
        let b: Vec<PointRef> = b.iter().map(|p| {
            let fairkc::Location::Vector(v) = &p.location else { unreachable!() };
            pt(p.id + 1000, v.clone(), p.group)
        }).collect();
        let r = step as f64 * 0.5;
        let na = build_net(&metric, &a, r, 2).unwrap();
        let nb = build_net(&metric, &b, r, 2).unwrap();
        let before: Vec<(u64, usize)> = nb.entries.iter().map(|e| (e.anchor.id, e.popcount())).collect();
        let merged = merge_nets(&metric, &na, nb, r, 1.0).unwrap();
        for (id, count) in before {
            let e = merged.entries.iter().find(|e| e.anchor.id == id).expect("anchors of the target survive");
            prop_assert!(e.popcount() >= count);
        }
        let all: Vec<PointRef> = a.iter().chain(&b).cloned().collect();
        prop_assert!(audit_net(&metric, &merged, &all).is_empty());
        prop_assert_eq!(merged.alpha, 2.0);
    }

    #[test]
    fn expansion_has_one_point_per_color(points in points_strategy(30, 3), step in 0u32..6) {
        let metric = Metric::l1(2);
        let net = build_net(&metric, &points, step as f64, 3).unwrap();
        let ex = expand(&net.entries);
        let colors: usize = net.entries.iter().map(|e| e.popcount()).sum();
        prop_assert_eq!(ex.points.len(), colors);
        for (p, &(e, g)) in ex.points.iter().zip(&ex.origin) {
            prop_assert_eq!(p.group, g);
            prop_assert_eq!(&p.location, &net.entries[e].anchor.location);
        }
    }

    #[test]
    fn solver_within_three_of_brute_force(points in points_strategy(9, 3), raw in prop::collection::vec(0usize..3, 3)) {
        let metric = Metric::l1(2);
        let caps = caps_for(&points, 3, &raw);
        let inst = Instance::new(metric, caps.clone(), 0.1).unwrap();
        let sol = solve_fair_3approx(&inst, &points).unwrap();
        prop_assert!(sol.is_feasible(&caps));
        let opt = brute_force_opt(&metric, &points, &caps);
        prop_assert!(sol.cost <= 3.0 * opt + 1e-9);
        prop_assert_eq!(sol.clone(), solve_fair_3approx(&inst, &points).unwrap());
    }

    #[test]
    fn oracles_agree_with_brute_force(points in points_strategy(9, 2), raw in prop::collection::vec(0usize..3, 2)) {
        let metric = Metric::l2(2);
        let caps = caps_for(&points, 2, &raw);
        let opt = brute_force_opt(&metric, &points, &caps);
        let exact = exact_fair_kcenter(&metric, &points, &caps).unwrap();
        prop_assert!(exact.is_feasible(&caps));
        prop_assert_eq!(exact.cost, opt);
        prop_assert_eq!(exact_fair_radius(&metric, &points, &caps).unwrap(), opt);
    }

    #[test]
    fn coreset_solution_within_bound(points in points_strategy(10, 2), raw in prop::collection::vec(0usize..3, 2), step in 0u32..4) {
        let metric = Metric::l1(2);
        let caps = caps_for(&points, 2, &raw);
        let inst = Instance::new(metric, caps.clone(), 0.1).unwrap();
        let net = build_net(&metric, &points, step as f64 * 0.25, 2).unwrap();
        let sol = solve_on_coreset(&inst, &net).unwrap();
        prop_assert!(sol.is_feasible(&caps));
        // tau to reach an anchor, 3 (OPT + tau) among anchors, tau to the representative
        let opt = brute_force_opt(&metric, &points, &caps);
        let slack = 5.0 * step as f64 * 0.25;
        prop_assert!(cost(&metric, &points, &sol.centers) <= 3.0 * opt + slack + 1e-9);
    }

    #[test]
    fn doubling_radius_bounded_by_prefix_optimum(points in points_strategy(12, 1), k in 1usize..4) {
        let metric = Metric::l2(2);
        let mut s = DoublingState::new(metric, 1, k, false).unwrap();
        let mut prev = 0.0;
        for (i, p) in points.iter().enumerate() {
            s.insert(p);
            prop_assert!(s.r >= prev);
            prop_assert!(s.anchors.len() <= k);
            prop_assert!(s.r <= brute_force_kcenter(&metric, &points[..=i], k) + 1e-12);
            prev = s.r;
        }
    }

    #[test]
    fn robust_stream_net_stays_valid(points in points_strategy(50, 2), raw in prop::collection::vec(0usize..3, 2)) {
        let metric = Metric::l1(2);
        let caps = caps_for(&points, 2, &raw);
        let inst = Instance::new(metric, caps, 0.3).unwrap();
        let mut s = StreamState::new(&inst, StreamMode::Robust).unwrap();
        for (i, p) in points.iter().enumerate() {
            s.insert(p).unwrap();
            prop_assert!(audit_net(&metric, &s.coreset(), &points[..=i]).is_empty());
        }
        prop_assert!(s.query(&inst).unwrap().is_feasible(&inst.capacities));
    }

    #[test]
    fn max_flow_matches_bipartite_brute_force(edges in prop::collection::vec((0usize..4, 0usize..3), 0..12), caps in prop::collection::vec(0u32..3, 3)) {
        // left nodes 1..=4, right nodes 5..=7
        let mut g = FlowGraph::new(9);
        for l in 0..4 {
            g.add_edge(0, 1 + l, 1);
        }
        for (r, &c) in caps.iter().enumerate() {
            g.add_edge(5 + r, 8, c);
        }
        for &(l, r) in &edges {
            g.add_edge(1 + l, 5 + r, 1);
        }
        let flow = g.max_flow(0, 8);
        // brute force: try every assignment of left nodes to an edge or nothing
        let mut best = 0;
        let choices: Vec<Vec<Option<usize>>> = (0..4)
            .map(|l| std::iter::once(None).chain(edges.iter().filter(|e| e.0 == l).map(|e| Some(e.1))).collect())
            .collect();
        let mut idx = [0usize; 4];
        loop {
            let mut load = [0u32; 3];
            let mut count = 0;
            for l in 0..4 {
                if let Some(r) = choices[l][idx[l]] {
                    load[r] += 1;
                    count += 1;
                }
            }
            if load.iter().zip(&caps).all(|(a, b)| a <= b) {
                best = best.max(count);
            }
            let mut l = 0;
            while l < 4 {
                idx[l] += 1;
                if idx[l] < choices[l].len() {
                    break;
                }
                idx[l] = 0;
                l += 1;
            }
            if l == 4 {
                break;
            }
        }
        prop_assert_eq!(flow, best);
    }
}
