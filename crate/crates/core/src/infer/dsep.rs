use crate::graph::{Dag, VariableId};

/// Bayes-ball reachability: true iff every trail between `a` and `b` is
/// blocked by `given`.
///
/// `a` and `b` are expected to be distinct and outside `given`.
pub fn d_separated(dag: &Dag, a: VariableId, b: VariableId, given: &[VariableId]) -> bool {
    debug_assert!(a != b);
    let n = dag.n_nodes();
    let mut observed = vec![false; n];
    for v in given {
        observed[v.index()] = true;
    }
    // colliders pass the ball when they or a descendant are observed
    let opens_collider = dag.ancestral_closure(given.iter().copied());

    // visited[v][0]: arrived from a child (moving up); [1]: from a parent (moving down)
    let mut visited = vec![[false; 2]; n];
    let mut stack = vec![(a, 0usize)];
    while let Some((v, dir)) = stack.pop() {
        if visited[v.index()][dir] {
            continue;
        }
        visited[v.index()][dir] = true;
        let obs = observed[v.index()];
        if v == b && !obs {
            return false;
        }
        if dir == 0 && !obs {
            stack.extend(dag.parents(v).iter().map(|&p| (p, 0)));
            stack.extend(dag.children(v).iter().map(|&c| (c, 1)));
        } else if dir == 1 {
            if !obs {
                stack.extend(dag.children(v).iter().map(|&c| (c, 1)));
            }
            if opens_collider[v.index()] {
                stack.extend(dag.parents(v).iter().map(|&p| (p, 0)));
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_dag;
    use crate::rng::SeededRng;

    fn x(i: usize) -> VariableId {
        VariableId::new(i)
    }

    /// Independent oracle: enumerate every simple undirected path and test
    /// each interior node against the blocking rules.
    fn separated_by_paths(dag: &Dag, a: VariableId, b: VariableId, given: &[VariableId]) -> bool {
        let n = dag.n_nodes();
        let in_given = |v: VariableId| given.contains(&v);
        let descendant_observed = |v: VariableId| given.iter().any(|&z| dag.reaches(v, z));
        let mut on_path = vec![false; n];
        let mut path = vec![a];
        on_path[a.index()] = true;

        fn active(
            dag: &Dag,
            path: &[VariableId],
            in_given: &dyn Fn(VariableId) -> bool,
            desc_obs: &dyn Fn(VariableId) -> bool,
        ) -> bool {
            path.windows(3).all(|w| {
                let (prev, mid, next) = (w[0], w[1], w[2]);
                let collider = dag.has_edge(prev, mid) && dag.has_edge(next, mid);
                if collider {
                    desc_obs(mid)
                } else {
                    !in_given(mid)
                }
            })
        }

        fn search(
            dag: &Dag,
            b: VariableId,
            path: &mut Vec<VariableId>,
            on_path: &mut Vec<bool>,
            in_given: &dyn Fn(VariableId) -> bool,
            desc_obs: &dyn Fn(VariableId) -> bool,
        ) -> bool {
            let last = *path.last().unwrap();
            if last == b {
                return active(dag, path, in_given, desc_obs);
            }
            for w in dag.neighbors(last) {
                if on_path[w.index()] {
                    continue;
                }
                on_path[w.index()] = true;
                path.push(w);
                let found = search(dag, b, path, on_path, in_given, desc_obs);
                path.pop();
                on_path[w.index()] = false;
                if found {
                    return true;
                }
            }
            false
        }

        !search(dag, b, &mut path, &mut on_path, &in_given, &descendant_observed)
    }

    #[test]
    fn canonical_structures() {
        let chain = Dag::from_edges(3, &[(x(0), x(1)), (x(1), x(2))]).unwrap();
        assert!(d_separated(&chain, x(0), x(2), &[x(1)]));
        assert!(!d_separated(&chain, x(0), x(2), &[]));

        let collider = Dag::from_edges(3, &[(x(0), x(1)), (x(2), x(1))]).unwrap();
        assert!(!d_separated(&collider, x(0), x(2), &[x(1)]));
        assert!(d_separated(&collider, x(0), x(2), &[]));

        let fork = Dag::from_edges(3, &[(x(1), x(0)), (x(1), x(2))]).unwrap();
        assert!(d_separated(&fork, x(0), x(2), &[x(1)]));

        // observing a descendant of a collider opens it
        let desc = Dag::from_edges(4, &[(x(0), x(1)), (x(2), x(1)), (x(1), x(3))]).unwrap();
        assert!(!d_separated(&desc, x(0), x(2), &[x(3)]));
    }

    #[test]
    fn agrees_with_path_enumeration() {
        let mut rng = SeededRng::new(2024);
        for seed in 0..40 {
            let dag = generate_dag(10, 12 + (seed % 5) as usize, &mut SeededRng::new(seed)).unwrap();
            for a in 0..10 {
                for b in a + 1..10 {
                    let others: Vec<usize> = (0..10).filter(|&v| v != a && v != b).collect();
                    // empty set plus a few random conditioning sets
                    let mut sets = vec![Vec::new()];
                    for _ in 0..4 {
                        let k = rng.below(4);
                        let picks = rng.sample_indices(others.len(), k);
                        sets.push(picks.into_iter().map(|i| x(others[i])).collect());
                    }
                    for given in sets {
                        let fast = d_separated(&dag, x(a), x(b), &given);
                        assert_eq!(fast, separated_by_paths(&dag, x(a), x(b), &given), "seed {seed} {a} {b} {given:?}");
                        assert_eq!(fast, d_separated(&dag, x(b), x(a), &given));
                    }
                }
            }
        }
    }
}
