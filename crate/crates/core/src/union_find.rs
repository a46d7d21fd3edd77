/// Disjoint sets with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` if `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Component label per element, numbered by first appearance in index
    /// order so that labels are independent of union order.
    pub fn labels(&mut self) -> (Vec<u64>, u64) {
        let n = self.len();
        let mut root_label = vec![u64::MAX; n];
        let mut labels = Vec::with_capacity(n);
        let mut next = 0u64;
        for i in 0..n {
            let r = self.find(i);
            if root_label[r] == u64::MAX {
                root_label[r] = next;
                next += 1;
            }
            labels.push(root_label[r]);
        }
        (labels, next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chains_merge_transitively() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(0, 3));
        assert!(uf.union(3, 4));
        assert!(!uf.union(0, 4));
        let (labels, n) = uf.labels();
        assert_eq!(labels, vec![0, 1, 2, 0, 0]);
        assert_eq!(n, 3);
    }

    #[test]
    fn labels_ignore_union_order() {
        let mut a = UnionFind::new(4);
        a.union(2, 1);
        a.union(3, 0);
        let mut b = UnionFind::new(4);
        b.union(0, 3);
        b.union(1, 2);
        assert_eq!(a.labels(), b.labels());
    }
}
