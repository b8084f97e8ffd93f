//! Elements of the symmetric group `S_n`.
//!
//! A permutation is stored in one-line form (`one_line[k] = σ(k)`, indices
//! 0-based) with its cycle decomposition cached at construction.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    one_line: Vec<usize>,
    cycles: Vec<Vec<usize>>,
}

impl Permutation {
    /// Build from one-line form; `one_line` must be a bijection on `0..n`.
    pub fn from_one_line(one_line: Vec<usize>) -> Result<Self> {
        let n = one_line.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty permutation".to_string()));
        }
        let mut seen = vec![false; n];
        for &v in &one_line {
            if v >= n || seen[v] {
                return Err(Error::InvalidArgument(format!(
                    "one-line form {one_line:?} is not a bijection on 0..{n}"
                )));
            }
            seen[v] = true;
        }
        let cycles = cycle_decomposition(&one_line);
        Ok(Self { one_line, cycles })
    }

    /// Build from disjoint cycles on `0..n`; omitted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut one_line: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for w in 0..cycle.len() {
                let from = cycle[w];
                let to = cycle[(w + 1) % cycle.len()];
                if from >= n || touched[from] {
                    return Err(Error::InvalidArgument(format!(
                        "cycles {cycles:?} are not disjoint on 0..{n}"
                    )));
                }
                touched[from] = true;
                one_line[from] = to;
            }
        }
        Self::from_one_line(one_line)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_one_line((0..n).collect()).expect("identity is valid")
    }

    /// The transposition `(i j)`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n || i == j {
            return Err(Error::InvalidArgument(format!(
                "invalid transposition ({i} {j}) in S_{n}"
            )));
        }
        let mut one_line: Vec<usize> = (0..n).collect();
        one_line.swap(i, j);
        Self::from_one_line(one_line)
    }

    /// The full cycle `(0 1 … n−1)`.
    pub fn full_cycle(n: usize) -> Self {
        let one_line: Vec<usize> = (0..n).map(|k| (k + 1) % n).collect();
        Self::from_one_line(one_line).expect("full cycle is valid")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.one_line.len()
    }

    #[inline]
    pub fn apply(&self, k: usize) -> usize {
        self.one_line[k]
    }

    pub fn one_line(&self) -> &[usize] {
        &self.one_line
    }

    /// Cycle decomposition, including fixed points as one-element cycles.
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn is_identity(&self) -> bool {
        self.one_line.iter().enumerate().all(|(k, &v)| k == v)
    }

    /// Composition `(self ∘ other)(k) = self(other(k))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch(format!(
                "composing permutations of degree {} and {}",
                self.n(),
                other.n()
            )));
        }
        let one_line = (0..self.n()).map(|k| self.apply(other.apply(k))).collect();
        Self::from_one_line(one_line)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (k, &v) in self.one_line.iter().enumerate() {
            inv[v] = k;
        }
        Self::from_one_line(inv).expect("inverse of a bijection is a bijection")
    }

    /// All n! elements of `S_n`, generated by Heap's algorithm.
    pub fn all(n: usize) -> Vec<Self> {
        let mut items: Vec<usize> = (0..n).collect();
        let mut out = Vec::new();
        heap_permutations(&mut items, n, &mut out);
        out
    }
}

fn heap_permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Permutation>) {
    if k == 1 {
        out.push(Permutation::from_one_line(items.clone()).expect("valid"));
        return;
    }
    for i in 0..k {
        heap_permutations(items, k - 1, out);
        if k.is_multiple_of(2) {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

fn cycle_decomposition(one_line: &[usize]) -> Vec<Vec<usize>> {
    let n = one_line.len();
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut cur = one_line[start];
        while cur != start {
            seen[cur] = true;
            cycle.push(cur);
            cur = one_line[cur];
        }
        cycles.push(cycle);
    }
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::from_one_line(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_one_line(vec![0, 3]).is_err());
        assert!(Permutation::from_one_line(vec![]).is_err());
    }

    #[test]
    fn cycles_partition_and_recompose() {
        for p in Permutation::all(4) {
            let total: usize = p.cycles().iter().map(|c| c.len()).sum();
            assert_eq!(total, 4);
            let rebuilt = Permutation::from_cycles(4, p.cycles()).unwrap();
            assert_eq!(rebuilt, p);
        }
    }

    #[test]
    fn composition_associative_identity_neutral() {
        let perms = Permutation::all(3);
        let id = Permutation::identity(3);
        for a in &perms {
            assert_eq!(a.compose(&id).unwrap(), *a);
            assert_eq!(id.compose(a).unwrap(), *a);
            assert!(a.compose(&a.inverse()).unwrap().is_identity());
            for b in &perms {
                for c in &perms {
                    let lhs = a.compose(b).unwrap().compose(c).unwrap();
                    let rhs = a.compose(&b.compose(c).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn full_cycle_and_transposition() {
        let c = Permutation::full_cycle(3);
        assert_eq!(c.one_line(), &[1, 2, 0]);
        assert_eq!(c.cycles().len(), 1);
        let t = Permutation::transposition(3, 0, 2).unwrap();
        assert_eq!(t.one_line(), &[2, 1, 0]);
        assert_eq!(t.cycles().len(), 2);
        assert!(Permutation::transposition(3, 1, 1).is_err());
    }

    #[test]
    fn all_has_factorial_size_and_is_distinct() {
        let perms = Permutation::all(4);
        assert_eq!(perms.len(), 24);
        for i in 0..perms.len() {
            for j in i + 1..perms.len() {
                assert_ne!(perms[i], perms[j]);
            }
        }
    }
}
