//! Symmetric block-tridiagonal matrices with 4×4 blocks (one block per node).

use nalgebra::{Matrix4, Vector4};

use crate::fields::FIELDS;

#[derive(Clone, Debug)]
pub struct BlockTridiagonal {
    /// Diagonal blocks, one per node.
    pub diag: Vec<Matrix4<f64>>,
    /// `upper[i]` couples node `i` (rows) to node `i+1` (columns). The lower
    /// blocks are the transposes.
    pub upper: Vec<Matrix4<f64>>,
}

impl BlockTridiagonal {
    pub fn zeros(nodes: usize) -> Self {
        Self {
            diag: vec![Matrix4::zeros(); nodes],
            upper: vec![Matrix4::zeros(); nodes.saturating_sub(1)],
        }
    }

    pub fn nodes(&self) -> usize {
        self.diag.len()
    }

    /// Replaces the row and column of each masked-out entry by the identity.
    pub fn pin(&mut self, free: &[bool]) {
        assert_eq!(free.len(), FIELDS * self.nodes());
        for (idx, _) in free.iter().enumerate().filter(|(_, f)| !**f) {
            let (i, k) = (idx / FIELDS, idx % FIELDS);
            for j in 0..FIELDS {
                self.diag[i][(k, j)] = 0.0;
                self.diag[i][(j, k)] = 0.0;
                if i + 1 < self.nodes() {
                    self.upper[i][(k, j)] = 0.0;
                }
                if i > 0 {
                    self.upper[i - 1][(j, k)] = 0.0;
                }
            }
            self.diag[i][(k, k)] = 1.0;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.nodes();
        assert_eq!(x.len(), FIELDS * n);
        let block = |v: &[f64], i: usize| Vector4::from_column_slice(&v[FIELDS * i..FIELDS * i + FIELDS]);
        let mut y = vec![0.0; x.len()];
        for i in 0..n {
            let mut acc = self.diag[i] * block(x, i);
            if i + 1 < n {
                acc += self.upper[i] * block(x, i + 1);
            }
            if i > 0 {
                acc += self.upper[i - 1].transpose() * block(x, i - 1);
            }
            y[FIELDS * i..FIELDS * i + FIELDS].copy_from_slice(acc.as_slice());
        }
        y
    }

    /// Block Cholesky factorization; `None` if the matrix is not positive
    /// definite.
    pub fn cholesky(&self) -> Option<BlockCholesky> {
        let n = self.nodes();
        let mut l_diag = Vec::with_capacity(n);
        let mut coupling = Vec::with_capacity(n.saturating_sub(1));
        let mut schur = self.diag[0];
        for i in 0..n {
            let l = schur.cholesky()?.l();
            if i + 1 < n {
                // X = L⁻¹ U; the sub-diagonal factor block is Xᵀ.
                let x = l.solve_lower_triangular(&self.upper[i])?;
                schur = self.diag[i + 1] - x.transpose() * x;
                coupling.push(x);
            }
            l_diag.push(l);
        }
        Some(BlockCholesky { l_diag, coupling })
    }
}

#[derive(Clone, Debug)]
pub struct BlockCholesky {
    l_diag: Vec<Matrix4<f64>>,
    coupling: Vec<Matrix4<f64>>,
}

impl BlockCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.l_diag.len();
        assert_eq!(rhs.len(), FIELDS * n);
        let mut y: Vec<Vector4<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut b = Vector4::from_column_slice(&rhs[FIELDS * i..FIELDS * i + FIELDS]);
            if i > 0 {
                b -= self.coupling[i - 1].transpose() * y[i - 1];
            }
            y.push(
                self.l_diag[i]
                    .solve_lower_triangular(&b)
                    .expect("factor has a nonzero diagonal"),
            );
        }
        let mut x = vec![Vector4::zeros(); n];
        for i in (0..n).rev() {
            let mut b = y[i];
            if i + 1 < n {
                b -= self.coupling[i] * x[i + 1];
            }
            x[i] = self.l_diag[i]
                .tr_solve_lower_triangular(&b)
                .expect("factor has a nonzero diagonal");
        }
        x.iter().flat_map(|v| v.iter().copied()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_spd(nodes: usize, seed: u64) -> BlockTridiagonal {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = BlockTridiagonal::zeros(nodes);
        for u in &mut m.upper {
            *u = Matrix4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        }
        for d in &mut m.diag {
            let s = Matrix4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            *d = s + s.transpose() + Matrix4::identity() * 12.0;
        }
        m
    }

    #[test]
    fn solve_inverts_mul() {
        let m = random_spd(30, 7);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..120).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = m.mul_vec(&x);
        let sol = m.cholesky().unwrap().solve(&b);
        for (s, e) in sol.iter().zip(&x) {
            assert!((s - e).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_detected() {
        let mut m = random_spd(5, 3);
        m.diag[2][(1, 1)] = -40.0;
        assert!(m.cholesky().is_none());
    }

    #[test]
    fn pinning_gives_identity_rows() {
        let mut m = random_spd(4, 11);
        let mut free = vec![true; 16];
        free[0] = false;
        free[13] = false;
        m.pin(&free);
        let mut e = vec![0.0; 16];
        e[13] = 1.0;
        assert_eq!(m.mul_vec(&e), e);
        let x = m.cholesky().unwrap().solve(&e);
        assert!((x[13] - 1.0).abs() < 1e-14);
        assert!(x.iter().enumerate().all(|(i, v)| i == 13 || v.abs() < 1e-14));
    }
}
