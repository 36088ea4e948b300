//! Invertible affine changes of phase-space variables and substitution into
//! polynomials and Gaussian-Laguerre functions.

use crate::error::{Error, Result};
use crate::poly::{GaussLagFn, PhasePoly, Var};
use crate::scalar::Coeff;

/// An invertible map `xi -> M xi + shift` on the four coordinates.
/// Invertibility is checked at construction, so substitution never fails.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap<S: Coeff> {
    matrix: [[S; 4]; 4],
    shift: [S; 4],
}

fn zero_row<S: Coeff>() -> [S; 4] {
    [S::zero(), S::zero(), S::zero(), S::zero()]
}

impl<S: Coeff> LinearMap<S> {
    pub fn new(matrix: [[S; 4]; 4], shift: [S; 4]) -> Result<Self> {
        let m = LinearMap { matrix, shift };
        // Reject singular matrices up front.
        m.inverse_matrix()?;
        Ok(m)
    }

    pub fn identity() -> Self {
        let mut matrix = [zero_row(), zero_row(), zero_row(), zero_row()];
        for (k, row) in matrix.iter_mut().enumerate() {
            row[k] = S::one();
        }
        LinearMap { matrix, shift: zero_row() }
    }

    /// Diagonal scaling; every entry must be nonzero.
    pub fn diagonal(d: [S; 4]) -> Result<Self> {
        if d.iter().any(|v| v.is_zero()) {
            return Err(Error::SingularMatrix);
        }
        let mut m = Self::identity();
        for (k, v) in d.into_iter().enumerate() {
            m.matrix[k][k] = v;
        }
        Ok(m)
    }

    /// The same 2x2 rotation applied to the position pair and the momentum
    /// pair: (x1, x2) -> (c x1 - s x2, s x1 + c x2), likewise for (p1, p2).
    pub fn block_rotation(c: S, s: S) -> Self {
        let mut m = Self::identity();
        for base in [0usize, 2] {
            m.matrix[base][base] = c.clone();
            m.matrix[base][base + 1] = s.neg();
            m.matrix[base + 1][base] = s.clone();
            m.matrix[base + 1][base + 1] = c.clone();
        }
        m
    }

    pub fn matrix(&self) -> &[[S; 4]; 4] {
        &self.matrix
    }

    pub fn shift(&self) -> &[S; 4] {
        &self.shift
    }

    pub fn apply_point(&self, xi: &[S; 4]) -> [S; 4] {
        let mut out = zero_row();
        for (k, out_k) in out.iter_mut().enumerate() {
            let mut acc = self.shift[k].clone();
            for (j, xj) in xi.iter().enumerate() {
                acc.add_assign(&self.matrix[k][j].mul(xj));
            }
            *out_k = acc;
        }
        out
    }

    /// Composition as point maps: `(self.then(outer))(xi) = outer(self(xi))`.
    pub fn then(&self, outer: &Self) -> Self {
        let mut matrix = [zero_row(), zero_row(), zero_row(), zero_row()];
        for (i, row) in matrix.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let mut acc = S::zero();
                for k in 0..4 {
                    acc.add_assign(&outer.matrix[i][k].mul(&self.matrix[k][j]));
                }
                *entry = acc;
            }
        }
        let shift = outer.apply_point(&self.shift);
        LinearMap { matrix, shift }
    }

    fn inverse_matrix(&self) -> Result<[[S; 4]; 4]> {
        // Gauss-Jordan with magnitude pivoting. The exact backend decides
        // zero pivots exactly; the float backend treats |pivot| = 0 as
        // singular (a genuinely near-singular map is the caller's problem).
        let mut a: Vec<Vec<S>> = self.matrix.iter().map(|r| r.to_vec()).collect();
        let mut inv: Vec<Vec<S>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { S::one() } else { S::zero() }).collect())
            .collect();
        for col in 0..4 {
            let pivot_row = (col..4)
                .max_by(|&r1, &r2| {
                    a[r1][col]
                        .abs()
                        .partial_cmp(&a[r2][col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if a[pivot_row][col].is_zero() {
                return Err(Error::SingularMatrix);
            }
            a.swap(col, pivot_row);
            inv.swap(col, pivot_row);
            let piv = a[col][col].clone();
            for j in 0..4 {
                a[col][j] = a[col][j].div(&piv);
                inv[col][j] = inv[col][j].div(&piv);
            }
            for row in 0..4 {
                if row == col || a[row][col].is_zero() {
                    continue;
                }
                let factor = a[row][col].clone();
                for j in 0..4 {
                    let da = a[col][j].mul(&factor);
                    a[row][j] = a[row][j].sub(&da);
                    let di = inv[col][j].mul(&factor);
                    inv[row][j] = inv[row][j].sub(&di);
                }
            }
        }
        let mut out = [zero_row(), zero_row(), zero_row(), zero_row()];
        for (i, row) in inv.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                out[i][j] = v;
            }
        }
        Ok(out)
    }

    /// The inverse point map `xi -> M^-1 (xi - shift)`.
    pub fn inverse(&self) -> Result<Self> {
        let matrix = self.inverse_matrix()?;
        let mut shift = zero_row();
        for (k, shift_k) in shift.iter_mut().enumerate() {
            let mut acc = S::zero();
            for (j, s_j) in self.shift.iter().enumerate() {
                acc.add_assign(&matrix[k][j].mul(s_j));
            }
            *shift_k = acc.neg();
        }
        Ok(LinearMap { matrix, shift })
    }

    /// `f` composed with the map: returns `xi -> f(M xi + shift)`.
    pub fn substitute_poly(&self, f: &PhasePoly<S>) -> PhasePoly<S> {
        // Degree-1 image of each variable.
        let images: Vec<PhasePoly<S>> = (0..4)
            .map(|k| {
                let mut img = PhasePoly::constant(self.shift[k].clone());
                for (j, v) in Var::ALL.iter().enumerate() {
                    img = img.add(&PhasePoly::var(*v).scale(&self.matrix[k][j]));
                }
                img
            })
            .collect();
        // Memoized powers of each image up to the largest exponent used.
        let mut maxe = [0u16; 4];
        for (e, _) in f.terms() {
            for k in 0..4 {
                maxe[k] = maxe[k].max(e[k]);
            }
        }
        let pows: Vec<Vec<PhasePoly<S>>> = (0..4)
            .map(|k| {
                let mut v = Vec::with_capacity(maxe[k] as usize + 1);
                v.push(PhasePoly::one());
                for j in 1..=maxe[k] as usize {
                    let next = v[j - 1].mul(&images[k]);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = PhasePoly::zero();
        for (e, c) in f.terms() {
            let mut t = PhasePoly::constant(c.clone());
            for k in 0..4 {
                if e[k] > 0 {
                    t = t.mul(&pows[k][e[k] as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Substitution preserves the exponent degree bound, so the class is
    /// closed under any invertible affine map.
    pub fn substitute_gauss(&self, w: &GaussLagFn<S>) -> GaussLagFn<S> {
        let q = self.substitute_poly(w.exponent());
        let p = self.substitute_poly(w.prefactor());
        GaussLagFn::new(q, p).expect("affine substitution cannot raise the exponent degree")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::PhasePoint;
    use crate::scalar::{C64, Coeff, ExactC};

    fn rot_3_4_5() -> LinearMap<ExactC> {
        LinearMap::block_rotation(ExactC::from_ratio(3, 5), ExactC::from_ratio(4, 5))
    }

    #[test]
    fn identity_leaves_functions_unchanged() {
        let f = PhasePoly::<ExactC>::var(Var::X1)
            .mul(&PhasePoly::var(Var::P2))
            .add(&PhasePoly::var(Var::X2).pow(3));
        assert_eq!(LinearMap::identity().substitute_poly(&f), f);
    }

    #[test]
    fn quarter_turn_sends_x1_to_minus_x2() {
        // Rotation of both pairs by a quarter turn: x1 composed with the map
        // becomes -x2. Cross-checked by evaluating both at sample points.
        let m = LinearMap::<C64>::block_rotation(C64::zero(), C64::one());
        let f = PhasePoly::<C64>::var(Var::X1);
        let g = m.substitute_poly(&f);
        assert_eq!(g, PhasePoly::var(Var::X2).neg());
        for pt in [
            PhasePoint::new(0.3, -0.7, 1.1, 2.0).unwrap(),
            PhasePoint::new(-1.0, 0.25, 0.0, -0.5).unwrap(),
            PhasePoint::new(2.0, 1.0, -3.0, 0.125).unwrap(),
            PhasePoint::new(0.0, 0.0, 0.0, 0.0).unwrap(),
            PhasePoint::new(5.0, -2.0, 0.5, 1.5).unwrap(),
        ] {
            let mapped = m.apply_point(&pt.scalars::<C64>());
            assert_eq!(g.eval(&pt).unwrap(), f.eval_at(&mapped));
        }
    }

    #[test]
    fn inverse_composition_is_identity_exactly() {
        let m = rot_3_4_5();
        let inv = m.inverse().unwrap();
        let f = PhasePoly::<ExactC>::var(Var::X1)
            .pow(2)
            .add(&PhasePoly::var(Var::P1).mul(&PhasePoly::var(Var::X2)));
        let round = inv.substitute_poly(&m.substitute_poly(&f));
        assert_eq!(round, f);
    }

    #[test]
    fn rotation_preserves_degree_and_gauss_class() {
        let m = rot_3_4_5();
        let q = PhasePoly::<ExactC>::var(Var::X1)
            .pow(2)
            .add(&PhasePoly::var(Var::P1).pow(2))
            .neg();
        let pre = PhasePoly::var(Var::X2).pow(4);
        let w = GaussLagFn::new(q, pre).unwrap();
        let w2 = m.substitute_gauss(&w);
        assert_eq!(w2.exponent().degree(), 2);
        assert_eq!(w2.prefactor().degree(), 4);
    }

    #[test]
    fn singular_matrix_rejected() {
        let z = || ExactC::zero();
        let row = [ExactC::one(), ExactC::one(), z(), z()];
        let m = [row.clone(), row, [z(), z(), ExactC::one(), z()], [z(), z(), z(), ExactC::one()]];
        assert!(matches!(
            LinearMap::new(m, [z(), z(), z(), z()]),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn shift_handled_in_inverse() {
        let mut m = LinearMap::<C64>::identity();
        m = LinearMap::new(*m.matrix(), [
            C64::from_f64(1.0),
            C64::from_f64(-2.0),
            C64::zero(),
            C64::from_f64(0.5),
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        let pt = [C64::from_f64(0.2), C64::from_f64(0.4), C64::from_f64(-1.0), C64::zero()];
        let round = inv.apply_point(&m.apply_point(&pt));
        for k in 0..4 {
            assert!(round[k].sub(&pt[k]).abs() < 1e-15);
        }
    }
}
