//! Maximum-weight perfect assignment with a lexicographic tie-break.
//!
//! Small instances (n <= 8) are solved by exhaustive search in lexicographic
//! order; larger ones by the Hungarian method followed by a row-by-row pass
//! that picks the smallest column still compatible with an optimal total.

use super::matrix::SimilarityMatrix;

/// Largest size solved by exhaustive search.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Totals within this relative distance count as tied.
const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `columns[i]` is the 0-based target position chosen for source row i.
    pub columns: Vec<usize>,
    pub total: f64,
}

/// Sum of the chosen entries, accumulated in row order.
pub fn assignment_total(m: &SimilarityMatrix, columns: &[usize]) -> f64 {
    columns
        .iter()
        .enumerate()
        .fold(0.0, |acc, (i, &j)| acc + m.get(i, j))
}

fn tie_tolerance(m: &SimilarityMatrix) -> f64 {
    let scale = m.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    TIE_EPS * (1.0 + scale * m.n() as f64)
}

pub fn solve_assignment(m: &SimilarityMatrix) -> Assignment {
    if m.n() <= EXHAUSTIVE_LIMIT {
        exhaustive_assignment(m)
    } else {
        hungarian_assignment(m)
    }
}

/// Depth-first search over permutations in lexicographic order; a later
/// permutation replaces the incumbent only if it is strictly better.
pub fn exhaustive_assignment(m: &SimilarityMatrix) -> Assignment {
    struct Search<'a> {
        m: &'a SimilarityMatrix,
        eps: f64,
        used: Vec<bool>,
        current: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
    }

    impl Search<'_> {
        fn run(&mut self, row: usize, acc: f64) {
            let n = self.m.n();
            if row == n {
                let better = match &self.best {
                    None => true,
                    Some((total, _)) => acc > total + self.eps,
                };
                if better {
                    self.best = Some((acc, self.current.clone()));
                }
                return;
            }
            for col in 0..n {
                if self.used[col] {
                    continue;
                }
                self.used[col] = true;
                self.current.push(col);
                self.run(row + 1, acc + self.m.get(row, col));
                self.current.pop();
                self.used[col] = false;
            }
        }
    }

    let n = m.n();
    let mut search = Search {
        m,
        eps: tie_tolerance(m),
        used: vec![false; n],
        current: Vec::with_capacity(n),
        best: None,
    };
    search.run(0, 0.0);
    let (_, columns) = search.best.expect("n >= 1 has at least one permutation");
    let total = assignment_total(m, &columns);
    Assignment { columns, total }
}

/// Minimum-cost assignment on a dense `rows x cols` cost table (rows <= cols)
/// using the shortest augmenting path formulation with potentials.
/// Returns the column chosen for each row.
fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let rows = cost.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = cost[0].len();
    debug_assert!(rows <= cols);
    // 1-based internally; index 0 is the virtual root.
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for r in 1..=rows {
        owner[0] = r;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut result = vec![0; rows];
    for j in 1..=cols {
        if owner[j] != 0 {
            result[owner[j] - 1] = j - 1;
        }
    }
    result
}

/// Best achievable similarity using rows `from..n` and the listed columns.
fn best_remaining(m: &SimilarityMatrix, from: usize, cols: &[usize]) -> f64 {
    if from == m.n() {
        return 0.0;
    }
    let cost: Vec<Vec<f64>> = (from..m.n())
        .map(|i| cols.iter().map(|&j| -m.get(i, j)).collect())
        .collect();
    min_cost_assignment(&cost)
        .iter()
        .enumerate()
        .map(|(k, &c)| m.get(from + k, cols[c]))
        .sum()
}

/// Hungarian optimum, then the lexicographically smallest optimal permutation.
pub fn hungarian_assignment(m: &SimilarityMatrix) -> Assignment {
    let n = m.n();
    let all: Vec<usize> = (0..n).collect();
    let optimum = best_remaining(m, 0, &all);
    let eps = tie_tolerance(m);

    let mut free = all;
    let mut columns = Vec::with_capacity(n);
    let mut prefix = 0.0;
    for row in 0..n {
        let choice = free
            .iter()
            .position(|&col| {
                let rest: Vec<usize> = free.iter().copied().filter(|&c| c != col).collect();
                prefix + m.get(row, col) + best_remaining(m, row + 1, &rest) >= optimum - eps
            })
            .expect("some column keeps the optimum reachable");
        let col = free.remove(choice);
        prefix += m.get(row, col);
        columns.push(col);
    }
    let total = assignment_total(m, &columns);
    Assignment { columns, total }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_matrix(n: usize, rng: &mut SplitMix64) -> SimilarityMatrix {
        SimilarityMatrix::new(
            n,
            (0..n * n).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_dominant() {
        let m = SimilarityMatrix::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(solve_assignment(&m).columns, vec![0, 1, 2]);
        assert_eq!(hungarian_assignment(&m).columns, vec![0, 1, 2]);
    }

    #[test]
    fn ties_pick_lexicographically_smallest() {
        // Both [1, 0] and [0, 1] score 1.0.
        let m = SimilarityMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(exhaustive_assignment(&m).columns, vec![0, 1]);
        assert_eq!(hungarian_assignment(&m).columns, vec![0, 1]);
        let m = SimilarityMatrix::from_rows(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        // [1, 2, 0] and [2, 0, 1] both total 3.
        assert_eq!(exhaustive_assignment(&m).columns, vec![1, 2, 0]);
        assert_eq!(hungarian_assignment(&m).columns, vec![1, 2, 0]);
    }

    #[test]
    fn hungarian_agrees_with_exhaustive() {
        let mut rng = SplitMix64::new(2024);
        for n in 2..=8 {
            for _ in 0..20 {
                let m = random_matrix(n, &mut rng);
                let a = exhaustive_assignment(&m);
                let b = hungarian_assignment(&m);
                assert_eq!(a.columns, b.columns, "n = {n}");
                assert_eq!(a.total, b.total);
            }
        }
    }

    #[test]
    fn hungarian_on_larger_sizes_matches_exhaustive_at_nine() {
        let mut rng = SplitMix64::new(9);
        for _ in 0..3 {
            let m = random_matrix(9, &mut rng);
            assert_eq!(exhaustive_assignment(&m).columns, solve_assignment(&m).columns);
        }
    }

    #[test]
    fn integer_ties_at_size_ten() {
        let mut rng = SplitMix64::new(5);
        let m = SimilarityMatrix::new(10, (0..100).map(|_| rng.below(3) as f64).collect()).unwrap();
        let a = hungarian_assignment(&m);
        // Any optimal permutation that is lexicographically smaller must not exist:
        // fix each prefix and check no smaller column reaches the optimum.
        let mut free: Vec<usize> = (0..10).collect();
        let mut prefix = 0.0;
        for row in 0..10 {
            for &col in free.iter().filter(|&&c| c < a.columns[row]) {
                let rest: Vec<usize> = free.iter().copied().filter(|&c| c != col).collect();
                assert!(prefix + m.get(row, col) + best_remaining(&m, row + 1, &rest) < a.total - 0.5);
            }
            free.retain(|&c| c != a.columns[row]);
            prefix += m.get(row, a.columns[row]);
        }
    }
}
