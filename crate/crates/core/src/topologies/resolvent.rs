use num_complex::Complex64 as C64;

use super::{as_scalar, block_plan, block_weight, column_norm_sum, parts, Estimate, TopologyError};
use crate::blockvn::{BlockOperator, SupNorm};
use crate::linops::{self, I};

/// `(x - i)^{-1}` for real `x`.
fn scalar_resolvent(x: f64) -> C64 {
    (C64::new(x, 0.0) - I).inv()
}

/// Resolvent contribution of block `k`: `(1/n_k) Σ_j` over both parts.
fn srt_block(a: &BlockOperator, b: &BlockOperator, k: usize) -> Result<f64, TopologyError> {
    let (ma, mb) = (a.block(k), b.block(k));
    if ma == mb {
        return Ok(0.0);
    }
    if let (Some(x), Some(y)) = (as_scalar(&ma), as_scalar(&mb)) {
        let re = (scalar_resolvent(x.re) - scalar_resolvent(y.re)).norm();
        let im = (scalar_resolvent(x.im) - scalar_resolvent(y.im)).norm();
        return Ok(re + im);
    }
    let mut total = 0.0;
    for (ha, hb) in parts(&ma).iter().zip(parts(&mb).iter()) {
        if ha == hb {
            continue;
        }
        let ra = linops::resolvent(ha, I)?;
        let rb = linops::resolvent(hb, I)?;
        total += column_norm_sum(&(&ra - &rb));
    }
    Ok(total / ma.dim() as f64)
}

/// Strong-resolvent distance
/// `Σ_k 2^{-(k+1)} (1/n_k) Σ_j ‖(R(Re A) - R(Re B)) e_{k,j}‖ + ‖(R(Im A) - R(Im B)) e_{k,j}‖`
/// with `R(H) = (H - i)^{-1}`. Each block term is at most 4.
pub fn srt_dist(a: &BlockOperator, b: &BlockOperator, eps_trunc: f64) -> Result<Estimate, TopologyError> {
    let (end, bound) = block_plan(a, b, 4.0, eps_trunc)?;
    let mut value = 0.0;
    // ascending k keeps the reduction order fixed
    for k in 0..end {
        let w = block_weight(k);
        if w == 0.0 {
            break;
        }
        value += w * srt_block(a, b, k)?;
    }
    Ok(Estimate { value, bound })
}

/// Strong-operator distance `Σ_k 2^{-(k+1)} (1/n_k) Σ_j ‖(x - y) e_{k,j}‖` on
/// bounded operators; the truncated tail is bounded by `2^{-K}(‖x‖ + ‖y‖)`.
pub fn sot_dist(x: &BlockOperator, y: &BlockOperator, eps_trunc: f64) -> Result<Estimate, TopologyError> {
    let (SupNorm::Finite(nx), SupNorm::Finite(ny)) = (x.sup_norm(), y.sup_norm()) else {
        return Err(TopologyError::Unbounded);
    };
    let (end, bound) = block_plan(x, y, (nx + ny).max(f64::MIN_POSITIVE), eps_trunc)?;
    let mut value = 0.0;
    for k in 0..end {
        let w = block_weight(k);
        if w == 0.0 {
            break;
        }
        let (mx, my) = (x.block(k), y.block(k));
        if mx == my {
            continue;
        }
        value += w * column_norm_sum(&(&mx - &my)) / mx.dim() as f64;
    }
    Ok(Estimate { value, bound })
}
