//! Finite groups realized as permutation groups with a full Cayley table.

use std::collections::{BTreeSet, HashMap};

/// A finite group stored as a Cayley table over element indices.
///
/// Elements are permutations of `{0, .., degree-1}` sorted lexicographically,
/// so index 0 is always the identity. The product `i * j` is the permutation
/// `x -> p_i(p_j(x))` (apply `j` first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    degree: usize,
    perms: Vec<Vec<u8>>,
    table: Vec<usize>,
    inverse: Vec<usize>,
    labels: Vec<String>,
}

fn compose(p: &[u8], q: &[u8]) -> Vec<u8> {
    q.iter().map(|&x| p[x as usize]).collect()
}

/// Parse cycle notation on `{1, .., degree}`, e.g. `(12)(34)` or `(1 2 3)`.
pub fn parse_cycles(text: &str, degree: usize) -> Option<Vec<u8>> {
    let mut perm: Vec<u8> = (0..degree as u8).collect();
    let text = text.trim();
    if text == "e" || text == "()" {
        return Some(perm);
    }
    let mut rest = text;
    while !rest.is_empty() {
        let open = rest.find('(')?;
        let close = rest[open..].find(')')? + open;
        let body = &rest[open + 1..close];
        let points: Vec<usize> = if body.contains(' ') || body.contains(',') {
            body.split(|c: char| c == ' ' || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().ok())
                .collect::<Option<_>>()?
        } else {
            body.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize))
                .collect::<Option<_>>()?
        };
        if points.iter().any(|&p| p == 0 || p > degree) {
            return None;
        }
        // Applying a product of cycles: left cycles act after right ones.
        let mut cycle: Vec<u8> = (0..degree as u8).collect();
        for w in 0..points.len() {
            let from = points[w] - 1;
            let to = points[(w + 1) % points.len()] - 1;
            cycle[from] = to as u8;
        }
        perm = compose(&perm, &cycle);
        rest = &rest[close + 1..];
    }
    Some(perm)
}

fn cycle_label(perm: &[u8]) -> String {
    let mut seen = vec![false; perm.len()];
    let mut out = String::new();
    for start in 0..perm.len() {
        if seen[start] || perm[start] as usize == start {
            continue;
        }
        out.push('(');
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            out.push_str(&(x + 1).to_string());
            x = perm[x] as usize;
        }
        out.push(')');
    }
    if out.is_empty() {
        "e".to_string()
    } else {
        out
    }
}

impl FiniteGroup {
    /// Closure of the given generators under composition.
    pub fn generated_by(degree: usize, generators: &[Vec<u8>]) -> Self {
        let identity: Vec<u8> = (0..degree as u8).collect();
        let mut set: BTreeSet<Vec<u8>> = BTreeSet::new();
        set.insert(identity.clone());
        let mut frontier = vec![identity];
        while let Some(p) = frontier.pop() {
            for g in generators {
                let q = compose(g, &p);
                if set.insert(q.clone()) {
                    frontier.push(q);
                }
            }
        }
        let perms: Vec<Vec<u8>> = set.into_iter().collect();
        let index: HashMap<Vec<u8>, usize> =
            perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let n = perms.len();
        let mut table = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                table[i * n + j] = index[&compose(&perms[i], &perms[j])];
            }
        }
        let inverse = (0..n)
            .map(|i| (0..n).find(|&j| table[i * n + j] == 0).expect("group closure"))
            .collect();
        let labels = perms.iter().map(|p| cycle_label(p)).collect();
        Self { degree, perms, table, inverse, labels }
    }

    pub fn symmetric(degree: usize) -> Self {
        let mut gens = Vec::new();
        if degree >= 2 {
            let mut swap: Vec<u8> = (0..degree as u8).collect();
            swap.swap(0, 1);
            gens.push(swap);
            let cycle: Vec<u8> = (0..degree).map(|i| ((i + 1) % degree) as u8).collect();
            gens.push(cycle);
        }
        Self::generated_by(degree, &gens)
    }

    /// Symmetries of a square with vertices 1, 2, 3, 4 in cyclic order.
    pub fn dihedral4() -> Self {
        let rotation = parse_cycles("(1234)", 4).unwrap();
        let reflection = parse_cycles("(24)", 4).unwrap();
        Self::generated_by(4, &[rotation, reflection])
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i * self.perms.len() + j]
    }

    #[inline]
    pub fn inv(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of_perm(&self, perm: &[u8]) -> Option<usize> {
        self.perms.iter().position(|p| p.as_slice() == perm)
    }

    /// Look up an element by cycle notation.
    pub fn index_of(&self, cycles: &str) -> Option<usize> {
        parse_cycles(cycles, self.degree).and_then(|p| self.index_of_perm(&p))
    }

    /// Sorted indices of the subgroup generated by `generators`.
    pub fn subgroup_generated(&self, generators: &[usize]) -> Vec<usize> {
        let mut members = BTreeSet::new();
        members.insert(0usize);
        let mut frontier = vec![0usize];
        while let Some(x) = frontier.pop() {
            for &g in generators {
                let y = self.mul(g, x);
                if members.insert(y) {
                    frontier.push(y);
                }
            }
        }
        members.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        assert_eq!(FiniteGroup::symmetric(3).order(), 6);
        assert_eq!(FiniteGroup::symmetric(4).order(), 24);
        assert_eq!(FiniteGroup::dihedral4().order(), 8);
    }

    #[test]
    fn identity_is_index_zero() {
        let g = FiniteGroup::symmetric(4);
        assert_eq!(g.label(0), "e");
        for i in 0..g.order() {
            assert_eq!(g.mul(0, i), i);
            assert_eq!(g.mul(i, g.inv(i)), 0);
        }
    }

    #[test]
    fn transposition_squares_to_identity() {
        let g = FiniteGroup::symmetric(3);
        let t = g.index_of("(12)").unwrap();
        assert_eq!(g.mul(t, t), 0);
        assert_eq!(g.label(t), "(12)");
    }

    #[test]
    fn composition_applies_right_factor_first() {
        let g = FiniteGroup::symmetric(3);
        let a = g.index_of("(12)").unwrap();
        let b = g.index_of("(23)").unwrap();
        // (12)(23): 1 -> 1 -> 2, 2 -> 3 -> 3, 3 -> 2 -> 1
        assert_eq!(g.label(g.mul(a, b)), "(123)");
        assert_eq!(g.index_of("(12)(23)"), Some(g.mul(a, b)));
    }

    #[test]
    fn klein_four_is_normal_sized() {
        let g = FiniteGroup::symmetric(4);
        let gens = [g.index_of("(12)(34)").unwrap(), g.index_of("(13)(24)").unwrap()];
        assert_eq!(g.subgroup_generated(&gens).len(), 4);
    }

    #[test]
    fn rejects_bad_cycle_text() {
        assert!(parse_cycles("(15)", 4).is_none());
        assert!(parse_cycles("(1x)", 4).is_none());
    }
}
