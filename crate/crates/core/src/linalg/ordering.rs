use std::collections::VecDeque;

use super::CsrMatrix;

/// `new_to_old[k]` is the original index placed at position `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    pub new_to_old: Vec<usize>,
    pub old_to_new: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            new_to_old: (0..n).collect(),
            old_to_new: (0..n).collect(),
        }
    }

    pub fn from_new_to_old(new_to_old: Vec<usize>) -> Self {
        let mut old_to_new = vec![0; new_to_old.len()];
        for (k, &o) in new_to_old.iter().enumerate() {
            old_to_new[o] = k;
        }
        Permutation { new_to_old, old_to_new }
    }

    pub fn len(&self) -> usize {
        self.new_to_old.len()
    }

    pub fn is_empty(&self) -> bool {
        self.new_to_old.is_empty()
    }
}

/// Half-bandwidth of `a` under `perm`.
pub fn bandwidth(a: &CsrMatrix, perm: &Permutation) -> usize {
    a.iter()
        .map(|(i, j, _)| perm.old_to_new[i].abs_diff(perm.old_to_new[j]))
        .max()
        .unwrap_or(0)
}

/// Reverse Cuthill-McKee on the symmetric pattern of `a`, one BFS per
/// connected component started from a pseudo-peripheral vertex.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Permutation {
    let n = a.nrows();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| a.row(i).0.iter().copied().filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)).unwrap();
        let start = pseudo_peripheral(seed, &adj, &degree);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    Permutation::from_new_to_old(order)
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(mut v: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut ecc = 0;
    loop {
        let level = bfs_levels(v, adj);
        let far = level.iter().copied().filter(|&l| l != usize::MAX).max().unwrap_or(0);
        if far <= ecc {
            return v;
        }
        ecc = far;
        v = (0..adj.len())
            .filter(|&i| level[i] == far)
            .min_by_key(|&i| (degree[i], i))
            .unwrap();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rcm_shrinks_scrambled_path() {
        // path graph 0-1-...-9 stored with a scrambled labelling
        let labels = [3, 7, 0, 9, 5, 1, 8, 2, 6, 4];
        let mut trip = Vec::new();
        for w in labels.windows(2) {
            trip.push((w[0], w[1], 1.0));
            trip.push((w[1], w[0], 1.0));
        }
        for i in 0..10 {
            trip.push((i, i, 2.0));
        }
        let a = CsrMatrix::from_triplets(10, 10, trip);
        assert!(bandwidth(&a, &Permutation::identity(10)) > 1);
        let p = reverse_cuthill_mckee(&a);
        assert_eq!(bandwidth(&a, &p), 1);
        let mut sorted = p.new_to_old.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
    }
}
