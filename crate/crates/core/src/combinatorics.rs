//! Enumeration helpers for the exhaustive oracles.

/// Iterator over all permutations of `0..n` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Permutations {
    current: Option<Vec<usize>>,
}

impl Permutations {
    pub fn new(n: usize) -> Self {
        Self {
            current: Some((0..n).collect()),
        }
    }
}

impl Iterator for Permutations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut p = out.clone();
        // Narayana's next-permutation step.
        let n = p.len();
        if n >= 2 {
            if let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) {
                let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("pivot exists");
                p.swap(i, j);
                p[i + 1..].reverse();
                self.current = Some(p);
            }
        }
        Some(out)
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Number of ways to split `n` labelled items into unlabelled groups of `c`.
pub fn balanced_partition_count(n: usize, c: usize) -> f64 {
    let k = n / c;
    factorial(n) / (factorial(c).powi(k as i32) * factorial(k))
}

/// Visits every partition of `0..n` into unlabelled groups of exactly `c`
/// items. Each group is listed ascending and groups are ordered by their
/// smallest element, so every partition is produced once.
pub fn for_each_balanced_partition(n: usize, c: usize, mut f: impl FnMut(&[Vec<usize>])) {
    assert!(c > 0 && n % c == 0, "{n} items cannot be split into groups of {c}");
    let mut used = vec![false; n];
    let mut groups: Vec<Vec<usize>> = Vec::with_capacity(n / c);
    recurse(n, c, &mut used, &mut groups, &mut f);
}

fn recurse(
    n: usize,
    c: usize,
    used: &mut [bool],
    groups: &mut Vec<Vec<usize>>,
    f: &mut impl FnMut(&[Vec<usize>]),
) {
    let Some(first) = used.iter().position(|&u| !u) else {
        f(groups);
        return;
    };
    used[first] = true;
    let mut group = vec![first];
    fill(n, c, first + 1, used, &mut group, groups, f);
    used[first] = false;
}

fn fill(
    n: usize,
    c: usize,
    start: usize,
    used: &mut [bool],
    group: &mut Vec<usize>,
    groups: &mut Vec<Vec<usize>>,
    f: &mut impl FnMut(&[Vec<usize>]),
) {
    if group.len() == c {
        groups.push(group.clone());
        recurse(n, c, used, groups, f);
        groups.pop();
        return;
    }
    for i in start..n {
        if used[i] {
            continue;
        }
        used[i] = true;
        group.push(i);
        fill(n, c, i + 1, used, group, groups, f);
        group.pop();
        used[i] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_counts() {
        assert_eq!(Permutations::new(0).count(), 1);
        assert_eq!(Permutations::new(1).count(), 1);
        assert_eq!(Permutations::new(4).count(), 24);
        let all: Vec<_> = Permutations::new(3).collect();
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[5], vec![2, 1, 0]);
    }

    #[test]
    fn balanced_partition_counts() {
        for &(n, c) in &[(4, 2), (6, 2), (6, 3), (8, 2), (8, 4), (9, 3)] {
            let mut count = 0usize;
            for_each_balanced_partition(n, c, |g| {
                assert!(g.iter().all(|x| x.len() == c));
                count += 1;
            });
            assert_eq!(count as f64, balanced_partition_count(n, c), "n={n} c={c}");
        }
        // 6!/(2!^3 3!) = 15
        assert_eq!(balanced_partition_count(6, 2), 15.0);
    }
}
