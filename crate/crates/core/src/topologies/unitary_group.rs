use num_complex::Complex64 as C64;

use super::{as_scalar, block_plan, block_weight, parts, Estimate, MetricParams, TopologyError};
use crate::blockvn::BlockOperator;
use crate::linops::{self, CMatrix, CVector, SpectralDecomp};

/// Grid `t = s h`, `|s| <= m_max / h`, with `h = 1/ceil(1/t_step)`.
struct Grid {
    per_unit: usize,
    m_max: usize,
}

impl Grid {
    fn new(params: &MetricParams) -> Self {
        Grid { per_unit: (1.0 / params.t_step).ceil().max(1.0) as usize, m_max: params.m_max as usize }
    }

    fn h(&self) -> f64 {
        1.0 / self.per_unit as f64
    }
}

/// `Σ_{m > M} 2^{-m} min(2, m D) <= min(2^{1-M}, D (M + 2) 2^{-M})`.
fn m_tail(m_max: usize, gen_gap: f64) -> f64 {
    let p = 0.5f64.powi(m_max as i32);
    (2.0 * p).min(gen_gap * (m_max as f64 + 2.0) * p)
}

/// `Σ_m 2^{-m} sup_{|t| <= m} |e^{itx} - e^{ity}|`, exact up to `m_max` plus the tail bound.
fn scalar_term(x: f64, y: f64, m_max: usize) -> (f64, f64) {
    let d = (x - y).abs();
    if d == 0.0 {
        return (0.0, 0.0);
    }
    let mut value = 0.0;
    for m in 1..=m_max {
        let half = m as f64 * d / 2.0;
        let sup = if half >= std::f64::consts::FRAC_PI_2 { 2.0 } else { 2.0 * half.sin() };
        value += 0.5f64.powi(m as i32) * sup;
    }
    (value, m_tail(m_max, d))
}

/// Orbit data for one generator: eigen-decomposition plus `V* e_j` for every `j`.
struct Orbit {
    eig: SpectralDecomp,
}

impl Orbit {
    fn new(h: &CMatrix) -> Result<Self, TopologyError> {
        Ok(Orbit { eig: linops::hermitian_eig(h)? })
    }

    /// `e^{itH} e_j`.
    fn evolve(&self, t: f64, j: usize) -> CVector {
        let v = self.eig.basis.inner();
        let n = self.eig.dim();
        let mut coeffs = CVector::zeros(n);
        for (l, &lam) in self.eig.eigenvalues.iter().enumerate() {
            coeffs[l] = v[(j, l)].conj() * linops::unit_phase(t * lam);
        }
        v * coeffs
    }
}

/// Contribution of one generator pair on one block, summed over `j` and
/// divided by `n`: (value, slack + m-tail).
fn matrix_term(ha: &CMatrix, hb: &CMatrix, grid: &Grid) -> Result<(f64, f64), TopologyError> {
    let n = ha.dim();
    let (oa, ob) = (Orbit::new(ha)?, Orbit::new(hb)?);
    let gen_gap = (ha - hb).op_norm();
    let h = grid.h();
    let steps = grid.m_max * grid.per_unit;
    let (mut value, mut bound) = (0.0, 0.0);
    for j in 0..n {
        let mut e = CVector::zeros(n);
        e[j] = C64::new(1.0, 0.0);
        let na = ha.mul_vec(&e).norm();
        let nb = hb.mul_vec(&e).norm();
        let nd = (ha - hb).mul_vec(&e).norm();
        let gap_at = |s: i64| {
            let t = s as f64 * h;
            (oa.evolve(t, j) - ob.evolve(t, j)).norm()
        };
        let mut running = gap_at(0);
        let mut m = 1;
        for s in 1..=steps as i64 {
            running = running.max(gap_at(s)).max(gap_at(-s));
            if s as usize == m * grid.per_unit {
                let lipschitz = (na + nb).min(nd + (m as f64 * gen_gap).min(2.0) * nb);
                let weight = 0.5f64.powi(m as i32);
                value += weight * running;
                bound += weight * (h / 2.0) * lipschitz;
                m += 1;
            }
        }
        bound += m_tail(grid.m_max, gen_gap);
    }
    Ok((value / n as f64, bound / n as f64))
}

/// Strong-exponential distance
/// `Σ_k 2^{-(k+1)} (1/n_k) Σ_j Σ_{m >= 1} 2^{-m} sup_{|t| <= m} ‖(e^{itH_A} - e^{itH_B}) e_{k,j}‖`
/// summed over `H = Re, Im`.
///
/// The sup over `t` is taken on a uniform grid; the Lipschitz slack of the
/// orbit difference and the `m > m_max` terms go into the bound. Blocks on
/// which both operators are scalar are evaluated in closed form.
pub fn set_dist(a: &BlockOperator, b: &BlockOperator, params: &MetricParams) -> Result<Estimate, TopologyError> {
    params.validate()?;
    let grid = Grid::new(params);
    // two parts, each Σ_m 2^{-m}·2 <= 2
    let (end, mut bound) = block_plan(a, b, 4.0, params.eps_trunc)?;
    let mut value = 0.0;
    for k in 0..end {
        let w = block_weight(k);
        if w == 0.0 {
            break;
        }
        let (ma, mb) = (a.block(k), b.block(k));
        if ma == mb {
            continue;
        }
        if let (Some(x), Some(y)) = (as_scalar(&ma), as_scalar(&mb)) {
            for (p, q) in [(x.re, y.re), (x.im, y.im)] {
                let (v, e) = scalar_term(p, q, grid.m_max);
                value += w * v;
                bound += w * e;
            }
            continue;
        }
        for (ha, hb) in parts(&ma).iter().zip(parts(&mb).iter()) {
            if ha == hb {
                continue;
            }
            let (v, e) = matrix_term(ha, hb, &grid)?;
            value += w * v;
            bound += w * e;
        }
    }
    Ok(Estimate { value, bound })
}
