use crate::graph::NodeId;
use crate::Real;

use super::ModelError;

/// Non-negative table over the joint levels of a list of discrete variables.
///
/// Values are stored row-major with the last scope variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor<T> {
    scope: Vec<NodeId>,
    cards: Vec<usize>,
    values: Vec<T>,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for k in (0..cards.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * cards[k + 1];
    }
    s
}

impl<T: Real> Factor<T> {
    pub fn new(scope: Vec<NodeId>, cards: Vec<usize>, values: Vec<T>) -> Result<Self, ModelError> {
        if scope.len() != cards.len() {
            return Err(ModelError::InvalidFactor("scope and cardinalities differ in length".into()));
        }
        for (i, v) in scope.iter().enumerate() {
            if scope[..i].contains(v) {
                return Err(ModelError::InvalidFactor(format!("node {} repeated in scope", v.0)));
            }
        }
        if cards.iter().product::<usize>() != values.len() {
            return Err(ModelError::InvalidFactor("table size does not match scope".into()));
        }
        if values.iter().any(|v| !(*v >= T::zero())) {
            return Err(ModelError::InvalidFactor("negative or NaN entry".into()));
        }
        Ok(Factor { scope, cards, values })
    }

    pub(crate) fn from_parts(scope: Vec<NodeId>, cards: Vec<usize>, values: Vec<T>) -> Self {
        debug_assert_eq!(cards.iter().product::<usize>(), values.len());
        Factor { scope, cards, values }
    }

    pub fn scalar(v: T) -> Self {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![v],
        }
    }

    pub fn scope(&self) -> &[NodeId] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn position(&self, var: NodeId) -> Option<usize> {
        self.scope.iter().position(|&v| v == var)
    }

    /// Flat index of an assignment given in scope order.
    pub fn index_of(&self, assignment: &[usize]) -> usize {
        debug_assert_eq!(assignment.len(), self.scope.len());
        assignment
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&a, &c)| acc * c + a)
    }

    pub fn get(&self, assignment: &[usize]) -> T {
        self.values[self.index_of(assignment)]
    }

    /// Assignment (scope order) of a flat index.
    pub fn assignment_of(&self, mut flat: usize) -> Vec<usize> {
        let mut a = vec![0; self.cards.len()];
        for k in (0..self.cards.len()).rev() {
            a[k] = flat % self.cards[k];
            flat /= self.cards[k];
        }
        a
    }

    pub fn total(&self) -> T {
        self.values.iter().copied().sum()
    }

    /// Pointwise product over the union scope: `self`'s variables first,
    /// then those only in `other`.
    pub fn product(&self, other: &Factor<T>) -> Factor<T> {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        for (v, c) in other.scope.iter().zip(&other.cards) {
            if !scope.contains(v) {
                scope.push(*v);
                cards.push(*c);
            }
        }
        let sa = strides(&self.cards);
        let sb = strides(&other.cards);
        let stride_a: Vec<usize> = scope
            .iter()
            .map(|v| self.position(*v).map_or(0, |p| sa[p]))
            .collect();
        let stride_b: Vec<usize> = scope
            .iter()
            .map(|v| other.position(*v).map_or(0, |p| sb[p]))
            .collect();
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut counter = vec![0usize; scope.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            for k in (0..scope.len()).rev() {
                counter[k] += 1;
                if counter[k] < cards[k] {
                    ia += stride_a[k];
                    ib += stride_b[k];
                    break;
                }
                counter[k] = 0;
                ia -= stride_a[k] * (cards[k] - 1);
                ib -= stride_b[k] * (cards[k] - 1);
            }
        }
        Factor { scope, cards, values }
    }

    /// Sums `var` out; returns a clone when `var` is not in scope.
    pub fn sum_out(&self, var: NodeId) -> Factor<T> {
        let Some(k) = self.position(var) else {
            return self.clone();
        };
        let inner: usize = self.cards[k + 1..].iter().product();
        let card = self.cards[k];
        let outer = self.values.len() / (inner * card);
        let mut values = vec![T::zero(); outer * inner];
        for o in 0..outer {
            for l in 0..card {
                let base = (o * card + l) * inner;
                let dst = &mut values[o * inner..(o + 1) * inner];
                for (d, s) in dst.iter_mut().zip(&self.values[base..base + inner]) {
                    *d = *d + *s;
                }
            }
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(k);
        cards.remove(k);
        Factor { scope, cards, values }
    }

    /// Restricts `var` to `level` and drops it from the scope.
    pub fn reduce(&self, var: NodeId, level: usize) -> Factor<T> {
        let Some(k) = self.position(var) else {
            return self.clone();
        };
        let inner: usize = self.cards[k + 1..].iter().product();
        let card = self.cards[k];
        let outer = self.values.len() / (inner * card);
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = (o * card + level) * inner;
            values.extend_from_slice(&self.values[base..base + inner]);
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(k);
        cards.remove(k);
        Factor { scope, cards, values }
    }

    /// Scales to total 1; `None` when the total is zero.
    pub fn normalized(&self) -> Option<Factor<T>> {
        let z = self.total();
        if !(z > T::zero()) {
            return None;
        }
        Some(Factor {
            scope: self.scope.clone(),
            cards: self.cards.clone(),
            values: self.values.iter().map(|&v| v / z).collect(),
        })
    }

    /// Same table with the scope reordered to `order` (a permutation of it).
    pub fn permuted(&self, order: &[NodeId]) -> Factor<T> {
        assert_eq!(order.len(), self.scope.len(), "order must permute the scope");
        let src = strides(&self.cards);
        let cards: Vec<usize> = order
            .iter()
            .map(|v| self.cards[self.position(*v).expect("order must permute the scope")])
            .collect();
        let stride: Vec<usize> = order.iter().map(|v| src[self.position(*v).unwrap()]).collect();
        let size = self.values.len();
        let mut values = Vec::with_capacity(size);
        let mut counter = vec![0usize; order.len()];
        let mut idx = 0usize;
        for _ in 0..size {
            values.push(self.values[idx]);
            for k in (0..order.len()).rev() {
                counter[k] += 1;
                if counter[k] < cards[k] {
                    idx += stride[k];
                    break;
                }
                counter[k] = 0;
                idx -= stride[k] * (cards[k] - 1);
            }
        }
        Factor {
            scope: order.to_vec(),
            cards,
            values,
        }
    }

    /// Sums out everything except `keep`, returned in `keep` order.
    pub fn marginal(&self, keep: &[NodeId]) -> Factor<T> {
        let mut f = self.clone();
        for v in self.scope.iter().filter(|v| !keep.contains(v)) {
            f = f.sum_out(*v);
        }
        f.permuted(keep)
    }
}
