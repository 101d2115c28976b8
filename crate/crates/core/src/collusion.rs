//! Collusion patterns as antichains of maximal colluding sets, and the
//! information-set rate planner.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::rate::{rate, Rate};

pub type ServerSet = BTreeSet<usize>;

/// Refuse to materialize `binom(n, <= t)` beyond this many maximal sets.
const MAX_UNIFORM_SETS: u128 = 1_000_000;

/// An inclusion-closed family of colluding server sets, stored by its maximal
/// elements. Singletons are always colluding, listed or not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollusionPattern {
    n: usize,
    maximal: Vec<ServerSet>,
}

impl CollusionPattern {
    /// Normalizes a list of colluding sets: duplicates and sets contained in
    /// another listed set are dropped, first-occurrence order is kept.
    pub fn from_maximal<S: AsRef<[usize]>>(n: usize, sets: &[S]) -> Result<Self> {
        let mut parsed: Vec<ServerSet> = Vec::with_capacity(sets.len());
        for (idx, s) in sets.iter().enumerate() {
            let s = s.as_ref();
            if s.is_empty() {
                return Err(Error::InvalidPattern(format!("set {idx} is empty")));
            }
            if let Some(&bad) = s.iter().find(|&&j| j >= n) {
                return Err(Error::InvalidPattern(format!(
                    "set {idx} contains server {bad}, outside 0..{n}"
                )));
            }
            parsed.push(s.iter().copied().collect());
        }
        let mut maximal: Vec<ServerSet> = Vec::new();
        for (i, s) in parsed.iter().enumerate() {
            let dominated = parsed
                .iter()
                .enumerate()
                .any(|(j, o)| (s.len() < o.len() && s.is_subset(o)) || (j < i && s == o));
            if !dominated {
                maximal.push(s.clone());
            }
        }
        Ok(Self { n, maximal })
    }

    /// No collusion at all: only singletons.
    pub fn no_collusion(n: usize) -> Self {
        Self { n, maximal: Vec::new() }
    }

    /// `binom(n, <= t)`: every set of at most `t` servers colludes.
    pub fn uniform(n: usize, t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidPattern("collusion size must be >= 1".into()));
        }
        if t == 1 {
            return Ok(Self::no_collusion(n));
        }
        if t >= n {
            return Self::from_maximal(n, &[(0..n).collect::<Vec<_>>()]);
        }
        if binomial(n, t) > MAX_UNIFORM_SETS {
            return Err(Error::InvalidPattern(format!(
                "binom({n}, {t}) has too many maximal sets to materialize"
            )));
        }
        let mut maximal = Vec::new();
        let mut combo: Vec<usize> = (0..t).collect();
        loop {
            maximal.push(combo.iter().copied().collect());
            let Some(i) = (0..t).rev().find(|&i| combo[i] < n - t + i) else {
                break;
            };
            combo[i] += 1;
            for j in i + 1..t {
                combo[j] = combo[j - 1] + 1;
            }
        }
        Ok(Self { n, maximal })
    }

    /// The pattern generated by the sets of both patterns.
    pub fn join(&self, other: &CollusionPattern) -> Result<Self> {
        let n = self.n.max(other.n);
        let sets: Vec<Vec<usize>> = self
            .maximal
            .iter()
            .chain(&other.maximal)
            .map(|s| s.iter().copied().collect())
            .collect();
        Self::from_maximal(n, &sets)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn maximal_sets(&self) -> &[ServerSet] {
        &self.maximal
    }

    /// Maximal sets plus the implicit singletons of servers not covered by any.
    pub fn facets(&self) -> Vec<ServerSet> {
        let covered: ServerSet = self.maximal.iter().flatten().copied().collect();
        let mut out = self.maximal.clone();
        out.extend(
            (0..self.n)
                .filter(|j| !covered.contains(j))
                .map(|j| ServerSet::from([j])),
        );
        out
    }

    pub fn contains(&self, set: &ServerSet) -> bool {
        if set.iter().any(|&j| j >= self.n) {
            return false;
        }
        set.len() <= 1 || self.maximal.iter().any(|m| set.is_subset(m))
    }

    pub fn max_colluding_size(&self) -> usize {
        self.maximal.iter().map(|s| s.len()).max().unwrap_or(1).max(1)
    }

    /// `P' <= P`: every colluding set of `self` also colludes in `other`.
    pub fn is_subpattern_of(&self, other: &CollusionPattern) -> bool {
        self.n <= other.n && self.maximal.iter().all(|s| other.contains(s))
    }

    /// Connected components of the hypergraph whose edges are the maximal
    /// sets; uncovered servers are singleton parts. Sorted by least element.
    pub fn partition_parts(&self) -> Vec<ServerSet> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut root = x;
            while parent[root] != root {
                root = parent[root];
            }
            let mut cur = x;
            while parent[cur] != root {
                let next = parent[cur];
                parent[cur] = root;
                cur = next;
            }
            root
        }
        for s in &self.maximal {
            let mut it = s.iter();
            if let Some(&first) = it.next() {
                for &j in it {
                    let a = find(&mut parent, first);
                    let b = find(&mut parent, j);
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut parts: Vec<ServerSet> = Vec::new();
        let mut root_index = vec![usize::MAX; self.n];
        for j in 0..self.n {
            let r = find(&mut parent, j);
            if root_index[r] == usize::MAX {
                root_index[r] = parts.len();
                parts.push(ServerSet::new());
            }
            parts[root_index[r]].insert(j);
        }
        parts
    }

    /// A split `(T1, T2)` into disjoint nonempty sides with every colluding set
    /// on one side: the first component against the rest.
    pub fn is_disconnected(&self) -> Option<(ServerSet, ServerSet)> {
        let mut parts = self.partition_parts().into_iter();
        let first = parts.next()?;
        let rest: ServerSet = parts.flatten().collect();
        if rest.is_empty() {
            None
        } else {
            Some((first, rest))
        }
    }

    /// Servers not touched by any colluding set larger than `t`.
    pub fn i_tilde(&self, t: usize) -> ServerSet {
        let mut out: ServerSet = (0..self.n).collect();
        for s in self.maximal.iter().filter(|s| s.len() > t) {
            for j in s {
                out.remove(j);
            }
        }
        out
    }
}

impl fmt::Display for CollusionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, s) in self.maximal.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s:?}")?;
        }
        write!(f, "> on {} servers", self.n)
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// One row of the planner's candidate table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateCandidate {
    pub t: usize,
    pub i_tilde_size: usize,
    pub rate: Rate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatePlan {
    /// Collusion size the underlying t-PIR scheme protects against.
    pub t: usize,
    /// Support of the retrieval vectors, sorted.
    pub info_set: Vec<usize>,
    /// `info_set` plus the `k + t - 1` lowest other servers, sorted.
    pub retained_servers: Vec<usize>,
    pub rate: Rate,
    pub candidates: Vec<RateCandidate>,
}

/// Rate of the information-set strategy for each feasible `t`, maximized.
///
/// A level `t` is feasible when `t <= n - k` and `|Ĩ_t| >= k`; its rate is
/// `|I| / (|I| + k + t - 1)` with `|I| = min(|Ĩ_t|, n - k - t + 1)`.
/// Ties go to the smallest `t`, and `I` takes the lowest indices of `Ĩ_t`.
pub fn plan_rate(pattern: &CollusionPattern, k: usize) -> Result<RatePlan> {
    let n = pattern.n();
    if k == 0 || k >= n {
        return Err(Error::Infeasible(format!(
            "rate planning needs 1 <= k < n (k = {k}, n = {n})"
        )));
    }
    let mut candidates = Vec::new();
    let mut best: Option<(usize, Vec<usize>, Rate)> = None;
    for t in 1..=pattern.max_colluding_size().min(n - k) {
        let tilde = pattern.i_tilde(t);
        if tilde.len() < k {
            continue;
        }
        let size = tilde.len().min(n - k - t + 1);
        let r = rate(size as u64, (size + k + t - 1) as u64);
        candidates.push(RateCandidate {
            t,
            i_tilde_size: tilde.len(),
            rate: r,
        });
        if best.as_ref().is_none_or(|(_, _, b)| r > *b) {
            best = Some((t, tilde.into_iter().take(size).collect(), r));
        }
    }
    let Some((t, info_set, rate)) = best else {
        return Err(Error::Infeasible(
            "pattern admits no positive-rate information-set scheme for this k".into(),
        ));
    };
    let mut retained: Vec<usize> = info_set.clone();
    retained.extend((0..n).filter(|j| !info_set.contains(j)).take(k + t - 1));
    retained.sort_unstable();
    Ok(RatePlan {
        t,
        info_set,
        retained_servers: retained,
        rate,
        candidates,
    })
}

/// Rate of protecting against the largest colluding set with plain t-PIR,
/// `(n - k - t + 1) / n`, when positive.
pub fn naive_rate(pattern: &CollusionPattern, k: usize) -> Option<Rate> {
    let n = pattern.n();
    let t = pattern.max_colluding_size();
    (k >= 1 && t + k <= n).then(|| rate((n - k - t + 1) as u64, n as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> ServerSet {
        v.iter().copied().collect()
    }

    fn two_groups() -> CollusionPattern {
        CollusionPattern::from_maximal(6, &[vec![0, 1], vec![2, 3, 4, 5]]).unwrap()
    }

    #[test]
    fn normalization() {
        let p = two_groups();
        assert_eq!(p.maximal_sets(), &[set(&[0, 1]), set(&[2, 3, 4, 5])]);
        let q = CollusionPattern::from_maximal(5, &[vec![0, 1], vec![0], vec![1], vec![1, 0]]).unwrap();
        assert_eq!(q.maximal_sets(), &[set(&[0, 1])]);
        let empty = CollusionPattern::from_maximal::<Vec<usize>>(3, &[]).unwrap();
        assert!(empty.maximal_sets().is_empty());
        assert_eq!(empty.facets(), vec![set(&[0]), set(&[1]), set(&[2])]);
        assert!(CollusionPattern::from_maximal(3, &[vec![0, 3]]).is_err());
        assert!(CollusionPattern::from_maximal(3, &[Vec::<usize>::new()]).is_err());
    }

    #[test]
    fn membership() {
        let p = two_groups();
        assert!(p.contains(&set(&[3, 5])));
        assert!(!p.contains(&set(&[1, 2])));
        assert!(p.contains(&set(&[4])));
        let ex = CollusionPattern::uniform(5, 2)
            .unwrap()
            .join(&CollusionPattern::from_maximal(5, &[vec![2, 3, 4]]).unwrap())
            .unwrap();
        assert!(ex.contains(&set(&[2, 3, 4])));
        assert!(ex.contains(&set(&[0, 4])));
        assert!(!ex.contains(&set(&[0, 1, 2])));
        // pairs inside {2,3,4} are absorbed
        assert_eq!(ex.maximal_sets().len(), 10 - 3 + 1);
    }

    #[test]
    fn sizes() {
        assert_eq!(two_groups().max_colluding_size(), 4);
        assert_eq!(CollusionPattern::no_collusion(4).max_colluding_size(), 1);
        assert_eq!(CollusionPattern::uniform(6, 3).unwrap().max_colluding_size(), 3);
        assert_eq!(CollusionPattern::uniform(6, 3).unwrap().maximal_sets().len(), 20);
        assert_eq!(
            CollusionPattern::uniform(3, 5).unwrap().maximal_sets(),
            &[set(&[0, 1, 2])]
        );
    }

    #[test]
    fn connectivity() {
        assert_eq!(two_groups().is_disconnected(), Some((set(&[0, 1]), set(&[2, 3, 4, 5]))));
        assert_eq!(CollusionPattern::uniform(4, 2).unwrap().is_disconnected(), None);
        let singles = CollusionPattern::from_maximal(2, &[vec![0], vec![1]]).unwrap();
        assert_eq!(singles.is_disconnected(), Some((set(&[0]), set(&[1]))));
        assert_eq!(CollusionPattern::no_collusion(1).is_disconnected(), None);
    }

    #[test]
    fn parts() {
        let p = CollusionPattern::from_maximal(9, &[vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]).unwrap();
        assert_eq!(
            p.partition_parts(),
            vec![set(&[0, 1, 2]), set(&[3, 4, 5]), set(&[6, 7, 8])]
        );
        assert_eq!(
            CollusionPattern::uniform(5, 2).unwrap().partition_parts(),
            vec![set(&[0, 1, 2, 3, 4])]
        );
        let q = CollusionPattern::from_maximal(6, &[vec![0, 1], vec![1, 2], vec![4, 5]]).unwrap();
        assert_eq!(q.partition_parts(), vec![set(&[0, 1, 2]), set(&[3]), set(&[4, 5])]);
        let r = CollusionPattern::from_maximal(5, &[vec![4, 0], vec![2, 4]]).unwrap();
        assert_eq!(r.partition_parts(), vec![set(&[0, 2, 4]), set(&[1]), set(&[3])]);
    }

    #[test]
    fn i_tilde_examples() {
        let p = two_groups();
        assert_eq!(p.i_tilde(2), set(&[0, 1]));
        assert_eq!(p.i_tilde(3), set(&[0, 1]));
        assert_eq!(p.i_tilde(4), set(&[0, 1, 2, 3, 4, 5]));
        assert_eq!(p.i_tilde(1), set(&[]));
        assert_eq!(p.i_tilde(10).len(), 6);
    }

    #[test]
    fn plan_for_two_groups() {
        let plan = plan_rate(&two_groups(), 2).unwrap();
        assert_eq!(plan.t, 2);
        assert_eq!(plan.info_set, vec![0, 1]);
        assert_eq!(plan.retained_servers, vec![0, 1, 2, 3, 4]);
        assert_eq!(plan.rate, rate(2, 5));
        assert_eq!(
            plan.candidates,
            vec![
                RateCandidate {
                    t: 2,
                    i_tilde_size: 2,
                    rate: rate(2, 5)
                },
                RateCandidate {
                    t: 3,
                    i_tilde_size: 2,
                    rate: rate(1, 3)
                },
                RateCandidate {
                    t: 4,
                    i_tilde_size: 6,
                    rate: rate(1, 6)
                },
            ]
        );
        assert_eq!(naive_rate(&two_groups(), 2), Some(rate(1, 6)));
    }

    #[test]
    fn plan_uniform_and_free() {
        for (n, k, t) in [(5, 2, 2), (7, 3, 2), (8, 2, 3), (6, 1, 5)] {
            let plan = plan_rate(&CollusionPattern::uniform(n, t).unwrap(), k).unwrap();
            assert_eq!(plan.rate, rate((n - k - t + 1) as u64, n as u64), "n={n} k={k} t={t}");
            assert_eq!(plan.t, t);
        }
        let plan = plan_rate(&CollusionPattern::no_collusion(5), 2).unwrap();
        assert_eq!((plan.t, plan.rate), (1, rate(3, 5)));
    }

    #[test]
    fn plan_errors() {
        assert!(plan_rate(&two_groups(), 0).is_err());
        assert!(plan_rate(&two_groups(), 6).is_err());
        let whole = CollusionPattern::from_maximal(4, &[vec![0, 1, 2, 3]]).unwrap();
        let err = plan_rate(&whole, 2).unwrap_err();
        assert!(err.to_string().contains("no positive-rate"));
        assert_eq!(naive_rate(&whole, 2), None);
    }
}
