//! Small dense linear algebra used by the harmonic-game routines.
//!
//! Matrices are row-major `Vec<Vec<f64>>`; everything here is sized for
//! desk-scale games (a few hundred unknowns at most).

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Basis of `{ x : A x = 0 }` by reduced row echelon form.
///
/// Pivots with magnitude at or below `pivot_tol` are treated as zero. One
/// basis vector is returned per free column, with a 1 in that column.
pub(crate) fn nullspace(rows: &[Vec<f64>], cols: usize, pivot_tol: f64) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let (best, mag) = (r..m.len())
            .map(|i| (i, m[i][c].abs()))
            .fold((r, -1.0), |b, x| if x.1 > b.1 { x } else { b });
        if mag <= pivot_tol {
            continue;
        }
        m.swap(r, best);
        let p = m[r][c];
        m[r].iter_mut().for_each(|x| *x /= p);
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let f = row[c];
                axpy(-f, &pivot_row, row);
            }
        }
        pivot_cols.push(c);
        r += 1;
    }

    let mut is_pivot = vec![None; cols];
    for (row, &c) in pivot_cols.iter().enumerate() {
        is_pivot[c] = Some(row);
    }
    (0..cols)
        .filter(|&c| is_pivot[c].is_none())
        .map(|free| {
            let mut v = vec![0.0; cols];
            v[free] = 1.0;
            for (row, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -m[row][free];
            }
            v
        })
        .collect()
}

/// Orthonormal basis of the span of `vectors` (modified Gram-Schmidt with one
/// reorthogonalization pass). Vectors whose residual norm drops below
/// `tol` times their original norm are dropped as dependent.
pub(crate) fn orthonormal_basis(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let norm0 = dot(v, v).sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm > tol * norm0 {
            w.iter_mut().for_each(|x| *x /= norm);
            basis.push(w);
        }
    }
    basis
}

/// Orthogonal projection of `x` onto the span of the orthonormal `basis`.
pub(crate) fn project_onto(basis: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for q in basis {
        axpy(dot(q, x), q, &mut out);
    }
    out
}

/// Component of `x` orthogonal to the span of the orthonormal `basis`.
pub(crate) fn project_out(basis: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    for q in basis {
        let c = dot(q, &out);
        axpy(-c, q, &mut out);
    }
    out
}
