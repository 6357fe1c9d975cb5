//! Minimum-norm least squares through the singular value decomposition.
//!
//! `x = V S⁺ Uᵀ b`, where singular values at or below `rcond · σ_max` are
//! treated as zero. Two routes produce the same pseudoinverse solution:
//!
//! * [`min_norm_lstsq`] decomposes the whole matrix.
//! * [`min_norm_lstsq_blocked`] first projects every column block onto its
//!   numerical row space (a thin SVD per block, truncated far below the
//!   cutoff), then decomposes the much narrower projected matrix. Because the
//!   projection is orthonormal and discards only directions the matrix
//!   annihilates to within `1e-3 · rcond · σ_max`, the minimum-norm solution
//!   is preserved. Random-feature collocation matrices have a numerical rank
//!   that is a small fraction of their width, which makes this route cheap.

use std::ops::Range;

use faer::{Col, Mat, MatRef};

use crate::error::{Error, Result};

/// Relative threshold for the per-block compression, as a fraction of `rcond`.
const BLOCK_TRUNCATION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<f64>,
    /// Number of singular values kept above the cutoff.
    pub rank: usize,
    pub sigma_max: f64,
    /// Smallest singular value that was kept.
    pub sigma_min_kept: f64,
}

/// Minimum-norm solution of `min ‖A x − b‖` from a full thin SVD of `A`.
pub fn min_norm_lstsq(a: MatRef<'_, f64>, b: &[f64], rcond: f64) -> Result<LeastSquares> {
    check_shapes(a, b)?;
    let rhs = Col::<f64>::from_fn(b.len(), |i| b[i]);
    let (x, rank, sigma_max, sigma_min_kept) = svd_solve(a, &rhs, rcond)?;
    Ok(LeastSquares {
        solution: x.iter().copied().collect(),
        rank,
        sigma_max,
        sigma_min_kept,
    })
}

/// Same solution as [`min_norm_lstsq`], computed block by block.
///
/// `blocks` must partition the columns of `a` into contiguous ranges.
pub fn min_norm_lstsq_blocked(
    a: MatRef<'_, f64>,
    b: &[f64],
    blocks: &[Range<usize>],
    rcond: f64,
) -> Result<LeastSquares> {
    check_shapes(a, b)?;
    let mut next = 0;
    for block in blocks {
        if block.start != next || block.end < block.start {
            return Err(Error::DimensionMismatch(format!(
                "column blocks must partition 0..{} contiguously",
                a.ncols()
            )));
        }
        next = block.end;
    }
    if next != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "column blocks cover 0..{next} but the matrix has {} columns",
            a.ncols()
        )));
    }

    let m = a.nrows();
    // Per block: the orthonormal row-space basis V_h and the projected columns A_h V_h.
    let mut bases = Vec::with_capacity(blocks.len());
    let mut projected_cols: Vec<Col<f64>> = Vec::new();
    for block in blocks {
        let sub = a.subcols(block.start, block.len());
        let svd = sub.thin_svd().map_err(|e| training_error(sub, e))?;
        let s = svd.S().column_vector();
        let s_max = s.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..s.nrows())
            .filter(|&i| s_max > 0.0 && s[i] > BLOCK_TRUNCATION * rcond * s_max)
            .collect();
        let v = Mat::<f64>::from_fn(block.len(), keep.len(), |r, c| svd.V()[(r, keep[c])]);
        for &i in &keep {
            projected_cols.push(Col::from_fn(m, |r| svd.U()[(r, i)] * s[i]));
        }
        bases.push(v);
    }

    let reduced = Mat::<f64>::from_fn(m, projected_cols.len(), |r, c| projected_cols[c][r]);
    let rhs = Col::<f64>::from_fn(b.len(), |i| b[i]);
    let (gamma, rank, sigma_max, sigma_min_kept) = if reduced.ncols() == 0 {
        (Col::zeros(0), 0, 0.0, 0.0)
    } else {
        svd_solve(reduced.as_ref(), &rhs, rcond)?
    };

    let mut solution = vec![0.0; a.ncols()];
    let mut offset = 0;
    for (block, v) in blocks.iter().zip(&bases) {
        let g = gamma.subrows(offset, v.ncols());
        let x = v * g;
        for (k, value) in x.iter().enumerate() {
            solution[block.start + k] = *value;
        }
        offset += v.ncols();
    }
    Ok(LeastSquares {
        solution,
        rank,
        sigma_max,
        sigma_min_kept,
    })
}

/// Euclidean norm of `A x − b`.
pub fn residual_norm(a: MatRef<'_, f64>, x: &[f64], b: &[f64]) -> f64 {
    let xc = Col::<f64>::from_fn(x.len(), |i| x[i]);
    let ax = a * &xc;
    ax.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

fn svd_solve(a: MatRef<'_, f64>, rhs: &Col<f64>, rcond: f64) -> Result<(Col<f64>, usize, f64, f64)> {
    let svd = a.thin_svd().map_err(|e| training_error(a, e))?;
    let s = svd.S().column_vector();
    let sigma_max = s.iter().copied().fold(0.0, f64::max);
    if !sigma_max.is_finite() {
        return Err(Error::Training {
            rows: a.nrows(),
            cols: a.ncols(),
            reason: "non-finite singular values (matrix contains NaN or infinity)".into(),
        });
    }
    let cutoff = rcond * sigma_max;
    let utb = svd.U().transpose() * rhs;
    let mut scaled = Col::<f64>::zeros(s.nrows());
    let mut rank = 0;
    let mut sigma_min_kept = 0.0;
    for i in 0..s.nrows() {
        if s[i] > cutoff && s[i] > 0.0 {
            scaled[i] = utb[i] / s[i];
            rank += 1;
            if sigma_min_kept == 0.0 || s[i] < sigma_min_kept {
                sigma_min_kept = s[i];
            }
        }
    }
    Ok((svd.V() * &scaled, rank, sigma_max, sigma_min_kept))
}

fn check_shapes(a: MatRef<'_, f64>, b: &[f64]) -> Result<()> {
    if a.nrows() == 0 {
        return Err(Error::DimensionMismatch("least-squares system has no rows".into()));
    }
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows but right-hand side has {}",
            a.nrows(),
            b.len()
        )));
    }
    Ok(())
}

fn training_error(a: MatRef<'_, f64>, e: faer::linalg::svd::SvdError) -> Error {
    let finite = a.col_iter().all(|c| c.iter().all(|v| v.is_finite()));
    Error::Training {
        rows: a.nrows(),
        cols: a.ncols(),
        reason: format!("SVD did not converge ({e:?}); all entries finite: {finite}"),
    }
}
