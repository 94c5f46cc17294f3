//! Exact row reduction over a field.

use num_traits::Num;

/// Reduced row echelon form: nonzero rows only, with the pivot column of
/// each row.
#[derive(Debug, Clone, PartialEq)]
pub struct Echelon<F> {
    pub rows: Vec<Vec<F>>,
    pub pivots: Vec<usize>,
    pub cols: usize,
}

impl<F> Echelon<F> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Gauss-Jordan elimination. Pivots are taken column by column at the first
/// row with a nonzero entry.
pub fn rref<F: Clone + Num>(mut m: Vec<Vec<F>>, cols: usize) -> Echelon<F> {
    debug_assert!(m.iter().all(|r| r.len() == cols));
    let mut pivots = Vec::new();
    let mut top = 0;
    for c in 0..cols {
        if top == m.len() {
            break;
        }
        let Some(found) = (top..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(top, found);
        let inv = F::one() / m[top][c].clone();
        for x in m[top].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for r in 0..m.len() {
            if r == top || m[r][c].is_zero() {
                continue;
            }
            let factor = m[r][c].clone();
            for j in 0..cols {
                let sub = factor.clone() * m[top][j].clone();
                m[r][j] = m[r][j].clone() - sub;
            }
        }
        pivots.push(c);
        top += 1;
    }
    m.truncate(top);
    Echelon {
        rows: m,
        pivots,
        cols,
    }
}

pub fn rank<F: Clone + Num>(m: Vec<Vec<F>>, cols: usize) -> usize {
    rref(m, cols).rank()
}
