//! Multilevel group hierarchy over the predictors and the diagonal shrinkage
//! scale matrices built from it.
//!
//! A hierarchy has `p` predictors and `K` intermediate levels. Within a level
//! groups are disjoint; across levels they may overlap arbitrarily. A
//! predictor left ungrouped at a level contributes a unit factor to the prior
//! scale at that level.

use crate::error::{Error, Result};

/// Validated group structure: for each level, the (0-based) group of each
/// predictor and the member list of each group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupHierarchy {
    p: usize,
    levels: Vec<Level>,
}

#[derive(Debug, Clone, PartialEq)]
struct Level {
    /// `assignment[j]` is the group of predictor `j`, or `None` if ungrouped.
    assignment: Vec<Option<usize>>,
    /// `members[g]` lists the predictors of group `g`, ascending.
    members: Vec<Vec<usize>>,
}

impl GroupHierarchy {
    /// Build and validate a hierarchy from per-level assignment vectors.
    ///
    /// Each level is a length-`p` vector of raw group labels; label `0` means
    /// ungrouped. Non-zero labels are arbitrary and renumbered contiguously
    /// in ascending label order.
    pub fn new(p: usize, levels: &[Vec<u32>]) -> Result<Self> {
        if p == 0 {
            return Err(Error::Validation("hierarchy needs at least one predictor".into()));
        }
        let mut built = Vec::with_capacity(levels.len());
        for (k, raw) in levels.iter().enumerate() {
            if raw.len() != p {
                return Err(Error::Shape(format!(
                    "level {} assignment has length {} but p = {}",
                    k + 1,
                    raw.len(),
                    p
                )));
            }
            let mut relabel: Vec<u32> = raw.iter().copied().filter(|&l| l != 0).collect();
            relabel.sort_unstable();
            relabel.dedup();
            let assignment: Vec<Option<usize>> = raw
                .iter()
                .map(|&label| {
                    if label == 0 {
                        None
                    } else {
                        Some(relabel.binary_search(&label).unwrap())
                    }
                })
                .collect();
            let mut members = vec![Vec::new(); relabel.len()];
            for (j, a) in assignment.iter().enumerate() {
                if let Some(g) = a {
                    members[*g].push(j);
                }
            }
            if let Some(g) = members.iter().position(|m| m.is_empty()) {
                return Err(Error::Validation(format!(
                    "level {}: declared group {} has no members",
                    k + 1,
                    g + 1
                )));
            }
            built.push(Level { assignment, members });
        }
        Ok(GroupHierarchy { p, levels: built })
    }

    /// Hierarchy with no intermediate levels (plain global-local model).
    pub fn flat(p: usize) -> Self {
        GroupHierarchy::new(p, &[]).expect("p > 0")
    }

    /// Single-level hierarchy from explicit member lists.
    pub fn single_level(p: usize, groups: &[Vec<usize>]) -> Result<Self> {
        let mut raw = vec![0u32; p];
        for (g, members) in groups.iter().enumerate() {
            for &j in members {
                if j >= p {
                    return Err(Error::Validation(format!(
                        "group {} references predictor {} but p = {p}",
                        g + 1,
                        j + 1
                    )));
                }
                if raw[j] != 0 {
                    return Err(Error::Validation(format!(
                        "predictor {} appears in two groups at level 1",
                        j + 1
                    )));
                }
                raw[j] = (g + 1) as u32;
            }
        }
        GroupHierarchy::new(p, &[raw])
    }

    pub fn predictor_count(&self) -> usize {
        self.p
    }

    /// Number of intermediate levels `K`.
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Number of groups at level `k` (0-based).
    pub fn group_count(&self, k: usize) -> usize {
        self.levels[k].members.len()
    }

    /// Group of predictor `j` at level `k`, or `None` if ungrouped there.
    pub fn group_of(&self, k: usize, j: usize) -> Option<usize> {
        self.levels[k].assignment[j]
    }

    /// Members of group `g` at level `k`, in ascending predictor order.
    pub fn members(&self, k: usize, g: usize) -> &[usize] {
        &self.levels[k].members[g]
    }

    pub fn group_size(&self, k: usize, g: usize) -> usize {
        self.levels[k].members[g].len()
    }

    /// Group counts per level, `[G_1, ..., G_K]`.
    pub fn group_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.members.len()).collect()
    }

    /// Raw assignment vectors (1-based labels, 0 = ungrouped), the inverse of
    /// [`GroupHierarchy::new`] up to relabelling.
    pub fn assignments(&self) -> Vec<Vec<u32>> {
        self.levels
            .iter()
            .map(|l| {
                l.assignment
                    .iter()
                    .map(|a| a.map(|g| (g + 1) as u32).unwrap_or(0))
                    .collect()
            })
            .collect()
    }

    /// Groups used for selection at level `k`: the declared groups followed by
    /// a singleton group for every predictor ungrouped at that level.
    pub fn selection_groups(&self, k: usize) -> Vec<Vec<usize>> {
        let level = &self.levels[k];
        let mut groups = level.members.clone();
        for (j, a) in level.assignment.iter().enumerate() {
            if a.is_none() {
                groups.push(vec![j]);
            }
        }
        groups
    }
}

/// Current values of the global, local and per-group shrinkage scales.
#[derive(Debug, Clone)]
pub struct ShrinkageScales {
    /// Global scale τ².
    pub tau2: f64,
    /// Local scales λ_j², length `p`.
    pub lambda2: Vec<f64>,
    /// Group scales δ_{k,g}², one vector per level.
    pub delta2: Vec<Vec<f64>>,
}

impl ShrinkageScales {
    /// All scales set to one.
    pub fn unit(h: &GroupHierarchy) -> Self {
        ShrinkageScales {
            tau2: 1.0,
            lambda2: vec![1.0; h.predictor_count()],
            delta2: h.group_counts().iter().map(|&g| vec![1.0; g]).collect(),
        }
    }

    /// The level-`k` scale factor Ω_{k,j} for predictor `j`: the group scale
    /// δ² when `j` is grouped at level `k`, else 1.
    pub fn omega(&self, h: &GroupHierarchy, k: usize, j: usize) -> f64 {
        match h.group_of(k, j) {
            Some(g) => self.delta2[k][g],
            None => 1.0,
        }
    }

    /// Diagonal of the full prior scale matrix: entry `j` is
    /// `τ² λ_j² ∏_k Ω_{k,j}`.
    pub fn scale_diag(&self, h: &GroupHierarchy) -> Vec<f64> {
        (0..h.predictor_count())
            .map(|j| {
                let mut v = self.tau2 * self.lambda2[j];
                for k in 0..h.level_count() {
                    v *= self.omega(h, k, j);
                }
                v
            })
            .collect()
    }

    /// Diagonal of the product of group-scale matrices over all levels except
    /// `k` (no τ², no λ²): entry `j` is `∏_{i≠k} Ω_{i,j}`.
    pub fn scale_diag_excluding(&self, h: &GroupHierarchy, k: usize) -> Vec<f64> {
        (0..h.predictor_count())
            .map(|j| {
                let mut v = 1.0;
                for i in 0..h.level_count() {
                    if i != k {
                        v *= self.omega(h, i, j);
                    }
                }
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1_layout() -> Vec<u32> {
        let sizes = [5usize, 5, 10, 10, 15, 15];
        let mut raw = Vec::new();
        for (g, &s) in sizes.iter().enumerate() {
            raw.extend(std::iter::repeat((g + 1) as u32).take(s));
        }
        raw
    }

    #[test]
    fn builds_two_groups() {
        let h = GroupHierarchy::new(4, &[vec![1, 1, 2, 2]]).unwrap();
        assert_eq!(h.group_count(0), 2);
        assert_eq!(h.group_size(0, 0), 2);
        assert_eq!(h.group_size(0, 1), 2);
        assert_eq!(h.members(0, 1), &[2, 3]);
    }

    #[test]
    fn all_ungrouped_level_is_degenerate() {
        let h = GroupHierarchy::new(3, &[vec![0, 0, 0]]).unwrap();
        assert_eq!(h.group_count(0), 0);
        let s = ShrinkageScales::unit(&h);
        for j in 0..3 {
            assert_eq!(s.omega(&h, 0, j), 1.0);
        }
    }

    #[test]
    fn example1_sizes() {
        let h = GroupHierarchy::new(60, &[example1_layout()]).unwrap();
        assert_eq!(h.group_count(0), 6);
        let sizes: Vec<usize> = (0..6).map(|g| h.group_size(0, g)).collect();
        assert_eq!(sizes, vec![5, 5, 10, 10, 15, 15]);
    }

    #[test]
    fn arbitrary_labels_renumbered() {
        let h = GroupHierarchy::new(4, &[vec![7, 7, 0, 3]]).unwrap();
        assert_eq!(h.group_count(0), 2);
        // Labels keep their relative order: 3 < 7.
        assert_eq!(h.group_of(0, 0), Some(1));
        assert_eq!(h.group_of(0, 2), None);
        assert_eq!(h.group_of(0, 3), Some(0));
    }

    #[test]
    fn length_mismatch_rejected() {
        let err = GroupHierarchy::new(4, &[vec![1, 1]]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn overlap_within_level_rejected_across_levels_allowed() {
        let err = GroupHierarchy::single_level(3, &[vec![0, 1], vec![1, 2]]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        // Same overlap across two levels is fine.
        let h = GroupHierarchy::new(3, &[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        assert_eq!(h.level_count(), 2);
    }

    #[test]
    fn omega_reads_group_scale() {
        let h = GroupHierarchy::new(60, &[example1_layout()]).unwrap();
        let mut s = ShrinkageScales::unit(&h);
        s.delta2[0] = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        // Predictor 7 (1-based) sits in group 2.
        assert_eq!(s.omega(&h, 0, 6), 2.0);
        // Full diagonal agrees with membership enumeration.
        for j in 0..60 {
            let expect = s.delta2[0][h.group_of(0, j).unwrap()];
            assert_eq!(s.omega(&h, 0, j), expect);
        }
        let mut direct = ShrinkageScales::unit(&h);
        direct.delta2[0] = vec![0.25; 6];
        assert_eq!(direct.omega(&h, 0, 10), 0.25);
    }

    #[test]
    fn scale_diag_matches_brute_force() {
        let h = GroupHierarchy::new(6, &[vec![1, 1, 2, 2, 0, 2], vec![0, 1, 1, 2, 2, 2]]).unwrap();
        let s = ShrinkageScales {
            tau2: 0.7,
            lambda2: vec![0.5, 1.5, 2.0, 0.1, 3.0, 0.9],
            delta2: vec![vec![2.0, 0.3], vec![1.1, 0.25]],
        };
        let diag = s.scale_diag(&h);
        for j in 0..6 {
            let mut expect = 0.7 * s.lambda2[j];
            for k in 0..2 {
                expect *= match h.group_of(k, j) {
                    Some(g) => s.delta2[k][g],
                    None => 1.0,
                };
            }
            assert!((diag[j] - expect).abs() < 1e-15);
        }
        // Identity scales give the all-ones vector.
        let unit = ShrinkageScales::unit(&h).scale_diag(&h);
        assert!(unit.iter().all(|&v| v == 1.0));
        // K = 0 reduces to tau2 * lambda2.
        let h0 = GroupHierarchy::flat(3);
        let s0 = ShrinkageScales {
            tau2: 2.0,
            lambda2: vec![1.0, 2.0, 3.0],
            delta2: vec![],
        };
        assert_eq!(s0.scale_diag(&h0), vec![2.0, 4.0, 6.0]);
    }

    #[test]
    fn scale_diag_excluding_matches_brute_force() {
        // K = 1: empty product.
        let h1 = GroupHierarchy::new(3, &[vec![1, 1, 0]]).unwrap();
        let s1 = ShrinkageScales::unit(&h1);
        assert_eq!(s1.scale_diag_excluding(&h1, 0), vec![1.0, 1.0, 1.0]);

        // K = 2: excluding level 1 leaves the level-2 diagonal.
        let h2 = GroupHierarchy::new(3, &[vec![1, 1, 0], vec![1, 0, 1]]).unwrap();
        let mut s2 = ShrinkageScales::unit(&h2);
        s2.delta2[1] = vec![4.0];
        assert_eq!(s2.scale_diag_excluding(&h2, 0), vec![4.0, 1.0, 4.0]);

        // K = 3 random-ish values against a brute-force product.
        let h3 =
            GroupHierarchy::new(4, &[vec![1, 1, 2, 2], vec![0, 1, 1, 0], vec![1, 2, 1, 2]]).unwrap();
        let s3 = ShrinkageScales {
            tau2: 3.0,
            lambda2: vec![1.0, 2.0, 3.0, 4.0],
            delta2: vec![vec![0.5, 2.5], vec![1.7], vec![0.2, 0.9]],
        };
        for k in 0..3 {
            let excl = s3.scale_diag_excluding(&h3, k);
            for j in 0..4 {
                let mut expect = 1.0;
                for i in 0..3 {
                    if i != k {
                        expect *= match h3.group_of(i, j) {
                            Some(g) => s3.delta2[i][g],
                            None => 1.0,
                        };
                    }
                }
                assert!((excl[j] - expect).abs() < 1e-15);
            }
            // Re-multiplying the excluded level recovers scale_diag / (tau2 lambda2).
            let full = s3.scale_diag(&h3);
            for j in 0..4 {
                let back = excl[j] * s3.omega(&h3, k, j) * s3.tau2 * s3.lambda2[j];
                assert!((back - full[j]).abs() < 1e-12 * full[j].abs());
            }
        }
    }

    #[test]
    fn selection_groups_add_singletons() {
        let h = GroupHierarchy::new(4, &[vec![1, 0, 1, 0]]).unwrap();
        let groups = h.selection_groups(0);
        assert_eq!(groups, vec![vec![0, 2], vec![1], vec![3]]);
    }
}
