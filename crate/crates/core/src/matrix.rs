//! Square matrices over a series ring, with entrywise sums and the
//! row-by-column product `(AB)_{ij} = sum_k A_{ik} B_{kj}`.

use serde_json::{json, Value};

use crate::series::{Basis, SeriesError, TruncatedSeries, Truncation};

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix {
    dim: usize,
    entries: Vec<TruncatedSeries>,
}

impl SeriesMatrix {
    pub fn new(dim: usize, entries: Vec<TruncatedSeries>) -> Result<Self, SeriesError> {
        if entries.len() != dim * dim {
            return Err(SeriesError::DimensionMismatch(entries.len(), dim * dim));
        }
        if let Some(first) = entries.first() {
            let basis = first.basis();
            if entries.iter().any(|e| e.basis() != basis) {
                return Err(SeriesError::Invalid("matrix entries must share a basis".into()));
            }
        }
        Ok(SeriesMatrix { dim, entries })
    }

    pub fn zero(dim: usize, basis: Basis, trunc: Truncation) -> Self {
        SeriesMatrix {
            dim,
            entries: (0..dim * dim)
                .map(|_| TruncatedSeries::zero(basis, trunc))
                .collect(),
        }
    }

    pub fn identity(dim: usize, basis: Basis, trunc: Truncation) -> Self {
        let mut m = Self::zero(dim, basis, trunc);
        for i in 0..dim {
            *m.entry_mut(i, i) = TruncatedSeries::one(basis, trunc);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &TruncatedSeries {
        &self.entries[i * self.dim + j]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut TruncatedSeries {
        &mut self.entries[i * self.dim + j]
    }

    pub fn map(&self, f: impl Fn(&TruncatedSeries) -> TruncatedSeries) -> Self {
        SeriesMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SeriesError> {
        if self.dim != other.dim {
            return Err(SeriesError::DimensionMismatch(self.dim, other.dim));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SeriesMatrix { dim: self.dim, entries })
    }

    pub fn add(&self, other: &Self) -> Self {
        self.checked_add(other).expect("matrix add")
    }

    pub fn neg(&self) -> Self {
        self.map(|e| e.neg())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        if self.dim != other.dim {
            return Err(SeriesError::DimensionMismatch(self.dim, other.dim));
        }
        let n = self.dim;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc: Option<TruncatedSeries> = None;
                for k in 0..n {
                    let prod = self.entry(i, k).checked_mul(other.entry(k, j))?;
                    acc = Some(match acc {
                        None => prod,
                        Some(a) => a.checked_add(&prod)?,
                    });
                }
                entries.push(acc.expect("dim >= 1"));
            }
        }
        Ok(SeriesMatrix { dim: n, entries })
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.checked_mul(other).expect("matrix mul")
    }

    pub fn eq_to_order(&self, other: &Self, order: i64) -> Result<bool, SeriesError> {
        if self.dim != other.dim {
            return Err(SeriesError::DimensionMismatch(self.dim, other.dim));
        }
        for (a, b) in self.entries.iter().zip(&other.entries) {
            if !a.eq_to_order(b, order)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dim": self.dim,
            "entries": self.entries.iter().map(|e| e.to_json()).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coefficient as C;
    use crate::series::{Index, MultiIndex};

    fn constant(c: i64) -> TruncatedSeries {
        TruncatedSeries::from_terms(
            Basis::DividedPower,
            Truncation::exact_degree(),
            [(Index::Multi(MultiIndex::empty()), C::int(c))],
        )
    }

    fn int_matrix(vals: [[i64; 2]; 2]) -> SeriesMatrix {
        SeriesMatrix::new(
            2,
            vals.iter()
                .flat_map(|row| row.iter().map(|&v| constant(v)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_acts_trivially() {
        let a = int_matrix([[1, 2], [3, 4]]);
        let id = SeriesMatrix::identity(2, Basis::DividedPower, Truncation::exact_degree());
        assert_eq!(id.mul(&a), a);
        assert_eq!(a.mul(&id), a);
    }

    #[test]
    fn integer_matrix_product() {
        let a = int_matrix([[1, 1], [0, 1]]);
        let b = int_matrix([[1, 0], [1, 1]]);
        assert_eq!(a.mul(&b), int_matrix([[2, 1], [1, 1]]));
    }

    #[test]
    fn one_by_one_reduces_to_series_mul() {
        let f = TruncatedSeries::laurent_exact([(-1, C::one()), (1, C::one())]);
        let g = TruncatedSeries::laurent_exact([(-1, C::one())]);
        let a = SeriesMatrix::new(1, vec![f.clone()]).unwrap();
        let b = SeriesMatrix::new(1, vec![g.clone()]).unwrap();
        assert_eq!(a.mul(&b).entry(0, 0), &f.mul(&g));
    }

    #[test]
    fn dimension_mismatch() {
        let a = int_matrix([[1, 0], [0, 1]]);
        let b = SeriesMatrix::new(1, vec![constant(1)]).unwrap();
        assert!(matches!(
            a.checked_mul(&b),
            Err(SeriesError::DimensionMismatch(2, 1))
        ));
    }
}
