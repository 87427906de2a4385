use crate::error::{Error, Result};
use crate::kernel::rational::{is_zero_vector, QVector, Rational};

/// A subspace of ℚ^dim held as its reduced row-echelon basis.
///
/// Every basis row has a leading 1 and zeros in the pivot columns of the other
/// rows, and rows are sorted by pivot column, so two subspaces are equal iff
/// their bases are identical.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    dim: usize,
    basis: Vec<QVector>,
    pivots: Vec<usize>,
}

fn check_dim(expected: usize, v: &[Rational]) -> Result<()> {
    if v.len() != expected {
        Err(Error::DimensionMismatch {
            expected,
            found: v.len(),
        })
    } else {
        Ok(())
    }
}

/// Canonical basis of the span of `vectors` inside ℚ^dim.
pub fn echelonize(dim: usize, vectors: &[QVector]) -> Result<Subspace> {
    for v in vectors {
        check_dim(dim, v)?;
    }
    let mut rows: Vec<QVector> = vectors
        .iter()
        .filter(|v| !is_zero_vector(v))
        .cloned()
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..dim {
        let Some(found) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, found);
        let inv = rows[rank][col].recip().expect("pivot is nonzero");
        for x in rows[rank].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x = &*x - &(&factor * p);
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    Ok(Subspace {
        dim,
        basis: rows,
        pivots,
    })
}

impl Subspace {
    pub fn zero(dim: usize) -> Self {
        Subspace {
            dim,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| crate::kernel::rational::unit_vector(dim, i))
            .collect();
        Subspace {
            dim,
            basis,
            pivots: (0..dim).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[QVector] {
        &self.basis
    }

    /// What is left of `v` after eliminating against the basis; zero iff
    /// `v` lies in the subspace.
    pub fn residue(&self, v: &[Rational]) -> Result<QVector> {
        check_dim(self.dim, v)?;
        let mut r = v.to_vec();
        for (row, &col) in self.basis.iter().zip(&self.pivots) {
            if r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for (x, b) in r.iter_mut().zip(row) {
                if !b.is_zero() {
                    *x = &*x - &(&factor * b);
                }
            }
        }
        Ok(r)
    }

    pub fn contains(&self, v: &[Rational]) -> Result<bool> {
        Ok(is_zero_vector(&self.residue(v)?))
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        check_dim(other.dim, &vec![Rational::zero(); self.dim])?;
        for b in &self.basis {
            if !other.contains(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `{ p | p·w = 0 for all w in self }`.
    pub fn orthogonal_complement(&self) -> Subspace {
        let free: Vec<usize> = (0..self.dim).filter(|c| !self.pivots.contains(c)).collect();
        let vectors: Vec<QVector> = free
            .iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.dim];
                v[f] = Rational::one();
                for (row, &col) in self.basis.iter().zip(&self.pivots) {
                    v[col] = -&row[f];
                }
                v
            })
            .collect();
        echelonize(self.dim, &vectors).expect("dimensions agree")
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        echelonize(self.dim, &all)
    }

    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        let perp = self
            .orthogonal_complement()
            .sum(&other.orthogonal_complement())?;
        Ok(perp.orthogonal_complement())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(v: &[i64]) -> QVector {
        v.iter().map(|&x| Rational::integer(x)).collect()
    }

    #[test]
    fn empty_span_is_zero() {
        let s = echelonize(2, &[]).unwrap();
        assert_eq!(s.rank(), 0);
        assert_eq!(s, Subspace::zero(2));
    }

    #[test]
    fn standard_basis_spans_plane() {
        let s = echelonize(2, &[q(&[1, 0]), q(&[0, 1])]).unwrap();
        assert_eq!(s.rank(), 2);
        assert_eq!(s, Subspace::full(2));
    }

    #[test]
    fn collinear_vectors_collapse() {
        let s = echelonize(2, &[q(&[2, 4]), q(&[1, 2]), q(&[3, 6])]).unwrap();
        assert_eq!(s.basis(), &[q(&[1, 2])]);
    }

    #[test]
    fn membership() {
        let w = echelonize(2, &[q(&[1, 2])]).unwrap();
        assert!(w.contains(&q(&[0, 0])).unwrap());
        assert!(w.contains(&q(&[2, 4])).unwrap());
        assert!(!w.contains(&q(&[1, 0])).unwrap());
        assert!(w.contains(&q(&[1])).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        assert_eq!(
            echelonize(2, &[q(&[1, 2, 3])]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        );
    }

    #[test]
    fn complement_and_intersection() {
        let w = echelonize(3, &[q(&[1, 1, 0])]).unwrap();
        let perp = w.orthogonal_complement();
        assert_eq!(perp.rank(), 2);
        for b in perp.basis() {
            assert!(crate::kernel::rational::dot(b, &q(&[1, 1, 0])).is_zero());
        }
        let a = echelonize(3, &[q(&[1, 0, 0]), q(&[0, 1, 0])]).unwrap();
        let b = echelonize(3, &[q(&[0, 1, 0]), q(&[0, 0, 1])]).unwrap();
        assert_eq!(
            a.intersection(&b).unwrap(),
            echelonize(3, &[q(&[0, 1, 0])]).unwrap()
        );
    }

    fn small_vectors() -> impl Strategy<Value = Vec<QVector>> {
        proptest::collection::vec(
            proptest::collection::vec((-3i64..=3, 1i64..=3), 3)
                .prop_map(|v| v.into_iter().map(|(n, d)| Rational::new(n, d)).collect()),
            0..5,
        )
    }

    proptest! {
        #[test]
        fn idempotent_and_order_insensitive(vs in small_vectors(), seed in any::<u64>()) {
            let s = echelonize(3, &vs).unwrap();
            prop_assert_eq!(&echelonize(3, s.basis()).unwrap(), &s);
            let mut shuffled = vs.clone();
            let mut rng = crate::rng::SplitMix64::new(seed);
            rng.shuffle(&mut shuffled);
            prop_assert_eq!(&echelonize(3, &shuffled).unwrap(), &s);
            for v in &vs {
                prop_assert!(s.contains(v).unwrap());
            }
            prop_assert!(s.rank() <= vs.len().min(3));
            prop_assert_eq!(s.orthogonal_complement().orthogonal_complement(), s);
        }
    }
}
