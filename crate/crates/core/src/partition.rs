//! Group assignments and their validation.

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Assignment of `N` items to `G` groups (0-based group indices).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    /// Builds from an assignment vector; `groups` fixes `G` so that empty
    /// groups are representable and caught by [`Partition::validate`].
    pub fn from_assignment(assignment: Vec<usize>, groups: usize) -> Result<Self> {
        let mut sizes = vec![0; groups];
        for &g in &assignment {
            if g >= groups {
                return Err(Error::GroupOutOfRange { index: g, groups });
            }
            sizes[g] += 1;
        }
        Ok(Self { assignment, sizes })
    }

    /// Builds from explicit member lists; every item in `0..n` must appear once.
    pub fn from_groups(groups: &[Vec<usize>], n: usize) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n];
        for (g, members) in groups.iter().enumerate() {
            for &i in members {
                if i >= n {
                    return Err(Error::Invalid(format!("item {i} out of range for {n} items")));
                }
                if assignment[i] != usize::MAX {
                    return Err(Error::Invalid(format!("item {i} assigned twice")));
                }
                assignment[i] = g;
            }
        }
        if let Some(i) = assignment.iter().position(|&g| g == usize::MAX) {
            return Err(Error::Invalid(format!("item {i} not assigned")));
        }
        Self::from_assignment(assignment, groups.len())
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_groups(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Member indices of each group, ascending.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (i, &g) in self.assignment.iter().enumerate() {
            out[g].push(i);
        }
        out
    }

    /// Canonical form: groups relabeled in order of first appearance, so
    /// partitions equal up to group naming compare equal.
    pub fn canonical(&self) -> Vec<usize> {
        let mut map = vec![usize::MAX; self.num_groups()];
        let mut next = 0;
        self.assignment
            .iter()
            .map(|&g| {
                if map[g] == usize::MAX {
                    map[g] = next;
                    next += 1;
                }
                map[g]
            })
            .collect()
    }

    /// Checks the partition covers `n` items with no empty group and, when
    /// `balanced`, group sizes differ by at most one. Reports the first
    /// violated constraint.
    pub fn validate(&self, n: usize, balanced: bool) -> Result<()> {
        if self.assignment.len() != n {
            return Err(Error::LengthMismatch {
                what: "assignment",
                expected: n,
                actual: self.assignment.len(),
            });
        }
        if let Some(&index) = self.assignment.iter().find(|&&g| g >= self.sizes.len()) {
            return Err(Error::GroupOutOfRange {
                index,
                groups: self.sizes.len(),
            });
        }
        if self.sizes.iter().sum::<usize>() != n {
            return Err(Error::LengthMismatch {
                what: "group sizes",
                expected: n,
                actual: self.sizes.iter().sum(),
            });
        }
        if let Some(g) = self.sizes.iter().position(|&s| s == 0) {
            return Err(Error::EmptyGroup(g));
        }
        if balanced {
            let min = *self.sizes.iter().min().unwrap_or(&0);
            let max = *self.sizes.iter().max().unwrap_or(&0);
            if max - min > 1 {
                return Err(Error::Imbalanced { min, max });
            }
        }
        Ok(())
    }

    /// Writes `id,group` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>, ids: &[usize]) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["id", "group"])?;
        for (i, &g) in self.assignment.iter().enumerate() {
            let id = ids.get(i).copied().unwrap_or(i);
            w.write_record([id.to_string(), g.to_string()])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(())
    }

    /// Reads `id,group` rows in file order. Group count is `max + 1`.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<(Vec<usize>, Self)> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path.as_ref())?;
        let mut ids = Vec::new();
        let mut assignment = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let cell = |column: usize| -> Result<usize> {
                let s = rec.get(column).unwrap_or("");
                s.parse().map_err(|e: std::num::ParseIntError| Error::Parse {
                    row,
                    column,
                    value: s.to_string(),
                    reason: e.to_string(),
                })
            };
            ids.push(cell(0)?);
            assignment.push(cell(1)?);
        }
        let groups = assignment.iter().max().map_or(0, |g| g + 1);
        Ok((ids, Self::from_assignment(assignment, groups)?))
    }
}

/// Shuffles `0..n` and deals the items round-robin into `groups` groups.
pub fn random_balanced_assignment(n: usize, groups: usize, rng: &mut Rng) -> Result<Partition> {
    if groups == 0 || groups > n {
        return Err(Error::InvalidGroupCount { groups, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut assignment = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = pos % groups;
    }
    Partition::from_assignment(assignment, groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(a: &[usize], g: usize) -> Partition {
        Partition::from_assignment(a.to_vec(), g).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(part(&[0, 1, 0, 1], 2).validate(4, true).is_ok());
        assert!(matches!(part(&[0, 0, 0, 1], 2).validate(4, true), Err(Error::Imbalanced { min: 1, max: 3 })));
        assert!(part(&[0, 0, 0, 1], 2).validate(4, false).is_ok());
        assert!(matches!(part(&[0, 2, 0, 2], 3).validate(4, false), Err(Error::EmptyGroup(1))));
        assert!(matches!(part(&[0, 1], 2).validate(3, false), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn random_balanced_sizes() {
        let mut rng = Rng::new(1);
        let p = random_balanced_assignment(6, 2, &mut rng).unwrap();
        assert_eq!(p.sizes(), &[3, 3]);
        let p = random_balanced_assignment(7, 2, &mut rng).unwrap();
        assert_eq!(p.sizes(), &[4, 3]);
        assert!(random_balanced_assignment(2, 3, &mut rng).is_err());
    }

    #[test]
    fn random_balanced_is_deterministic() {
        let a = random_balanced_assignment(20, 3, &mut Rng::new(9)).unwrap();
        let b = random_balanced_assignment(20, 3, &mut Rng::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn groups_round_trip() {
        let p = part(&[1, 0, 1, 2], 3);
        let g = p.groups();
        assert_eq!(g, vec![vec![1], vec![0, 2], vec![3]]);
        assert_eq!(Partition::from_groups(&g, 4).unwrap(), p);
        assert_eq!(p.canonical(), vec![0, 1, 0, 2]);
    }

    #[test]
    fn from_groups_rejects_duplicates_and_gaps() {
        assert!(Partition::from_groups(&[vec![0, 0]], 2).is_err());
        assert!(Partition::from_groups(&[vec![0]], 2).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let p = part(&[2, 0, 1, 1, 0, 2], 3);
        p.write_csv(&path, &[10, 11, 12, 13, 14, 15]).unwrap();
        let (ids, q) = Partition::read_csv(&path).unwrap();
        assert_eq!(ids, vec![10, 11, 12, 13, 14, 15]);
        assert_eq!(q, p);
    }
}
