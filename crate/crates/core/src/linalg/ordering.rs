use std::collections::VecDeque;

/// Reverse Cuthill–McKee ordering of a symmetric sparsity pattern.
///
/// Returns `perm` with `perm[new] = old`. Disconnected components are ordered
/// one after another.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(adj, &degree, seed);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            next.dedup();
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> (Vec<usize>, usize) {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut depth = 0;
    let mut visited = vec![start];
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                depth = depth.max(level[w]);
                visited.push(w);
                queue.push_back(w);
            }
        }
    }
    let last: Vec<usize> = visited.into_iter().filter(|&v| level[v] == depth).collect();
    (last, depth)
}

fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], seed: usize) -> usize {
    let mut current = seed;
    let (mut last, mut depth) = bfs_levels(adj, current);
    loop {
        let candidate = *last
            .iter()
            .min_by_key(|&&v| (degree[v], v))
            .expect("BFS reaches at least the start node");
        let (next_last, next_depth) = bfs_levels(adj, candidate);
        if next_depth <= depth {
            return current;
        }
        current = candidate;
        last = next_last;
        depth = next_depth;
    }
}
