//! Brute-force lattice maximisation of zeta, independent of the case analysis.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::scale::ScaleContext;
use crate::solver::{BarrierSolutionSet, Landscape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub z1_range: (T, T),
    pub z2_range: (T, T),
    pub n1: usize,
    pub n2: usize,
    pub refine_rounds: usize,
    /// Number of coarse local maxima refined independently.
    pub top_k: usize,
}

impl<T: Real> GridSpec<T> {
    /// 400 x 400 lattice on `[0, Z]^2` with three tenfold refinements, where
    /// `Z` is twice the solver's bound on upper barriers.
    pub fn for_context(ctx: &ScaleContext<T>) -> Result<Self> {
        let bound = Landscape::new(ctx)?.upper_bound()?;
        let hi = bound + bound;
        Ok(Self {
            z1_range: (T::zero(), hi),
            z2_range: (T::zero(), hi),
            n1: 400,
            n2: 400,
            refine_rounds: 3,
            top_k: 5,
        })
    }

    fn validate(&self, beta: T) -> Result<()> {
        let ok = self.n1 >= 2
            && self.n2 >= 2
            && self.z1_range.0 >= T::zero()
            && self.z1_range.0 < self.z1_range.1
            && self.z2_range.0 < self.z2_range.1
            && self.z2_range.1 >= self.z1_range.0 + beta;
        if ok {
            Ok(())
        } else {
            Err(Error::EmptyGrid(format!(
                "ranges z1 {:?}, z2 {:?} with {}x{} points contain no z2 >= z1 + beta",
                self.z1_range, self.z2_range, self.n1, self.n2
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePoint<T> {
    pub z1: T,
    pub z2: T,
    pub zeta: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<T> {
    /// Distinct refined maxima whose zeta is within 1e-6 (relative) of the best, best first.
    pub maxima: Vec<OraclePoint<T>>,
    /// Final lattice spacing in z1 and z2.
    pub spacing: (T, T),
    pub trace: Vec<String>,
}

impl<T: Real> OracleResult<T> {
    pub fn best(&self) -> OraclePoint<T> {
        self.maxima[0]
    }
}

struct Lattice<T> {
    z1: Vec<T>,
    z2: Vec<T>,
    zeta: Vec<T>,
}

impl<T: Real> Lattice<T> {
    fn build(ctx: &ScaleContext<T>, z1: Vec<T>, z2: Vec<T>) -> Self {
        let beta = ctx.beta();
        let g1: Vec<T> = z1.iter().map(|&x| ctx.g(x)).collect();
        let g2: Vec<T> = z2.iter().map(|&x| ctx.g(x)).collect();
        let n2 = z2.len();
        let mut zeta = vec![T::neg_infinity(); z1.len() * n2];
        zeta.par_chunks_mut(n2).enumerate().for_each(|(i, row)| {
            for (j, cell) in row.iter_mut().enumerate() {
                let num = z2[j] - z1[i] - beta;
                if num >= T::zero() {
                    let v = if num == T::zero() { T::zero() } else { num / (g2[j] - g1[i]) };
                    if v.is_finite() {
                        *cell = v;
                    }
                }
            }
        });
        Self { z1, z2, zeta }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        self.zeta[i * self.z2.len() + j]
    }

    fn argmax(&self) -> (usize, usize) {
        let n2 = self.z2.len();
        let k = self
            .zeta
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) })
            .0;
        (k / n2, k % n2)
    }

    /// Feasible cells not exceeded by any of their eight neighbours, best first.
    fn local_maxima(&self, k: usize) -> Vec<(usize, usize)> {
        let (n1, n2) = (self.z1.len(), self.z2.len());
        let mut found: Vec<(usize, usize, T)> = Vec::new();
        for i in 0..n1 {
            for j in 0..n2 {
                let v = self.at(i, j);
                if !(v > T::zero()) {
                    continue;
                }
                let mut is_max = true;
                'nb: for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let (ii, jj) = (i as i64 + di, j as i64 + dj);
                        if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= n1 as i64 || jj >= n2 as i64 {
                            continue;
                        }
                        if self.at(ii as usize, jj as usize) > v {
                            is_max = false;
                            break 'nb;
                        }
                    }
                }
                if is_max {
                    found.push((i, j, v));
                }
            }
        }
        found.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap());
        found.into_iter().take(k).map(|(i, j, _)| (i, j)).collect()
    }
}

fn axis<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let step = (hi - lo) / T::from_usize(n - 1).unwrap();
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * T::from_usize(i).unwrap() })
        .collect()
}

/// Coarse scan of zeta on the lattice followed by zoomed re-gridding around
/// the best local maxima.
pub fn grid_maximize_zeta<T: Real>(ctx: &ScaleContext<T>, spec: &GridSpec<T>) -> Result<OracleResult<T>> {
    spec.validate(ctx.beta())?;
    let coarse = Lattice::build(
        ctx,
        axis(spec.z1_range.0, spec.z1_range.1, spec.n1),
        axis(spec.z2_range.0, spec.z2_range.1, spec.n2),
    );
    let mut h1 = (spec.z1_range.1 - spec.z1_range.0) / T::from_usize(spec.n1 - 1).unwrap();
    let mut h2 = (spec.z2_range.1 - spec.z2_range.0) / T::from_usize(spec.n2 - 1).unwrap();
    let mut seeds: Vec<(T, T)> = coarse
        .local_maxima(spec.top_k.max(1))
        .into_iter()
        .map(|(i, j)| (coarse.z1[i], coarse.z2[j]))
        .collect();
    if seeds.is_empty() {
        let (i, j) = coarse.argmax();
        seeds.push((coarse.z1[i], coarse.z2[j]));
    }
    let mut trace = vec![format!(
        "coarse {}x{} lattice, {} seeds",
        spec.n1,
        spec.n2,
        seeds.len()
    )];
    let ten = T::lit(10.0);
    let two = T::lit(2.0);
    let zoom_pts = 41;
    for round in 0..spec.refine_rounds {
        seeds = seeds
            .into_iter()
            .map(|(c1, c2)| {
                let lo1 = (c1 - two * h1).max(spec.z1_range.0);
                let hi1 = (c1 + two * h1).min(spec.z1_range.1);
                let lo2 = (c2 - two * h2).max(spec.z2_range.0);
                let hi2 = (c2 + two * h2).min(spec.z2_range.1);
                let n1 = (((hi1 - lo1) / (h1 / ten)).round().to_usize().unwrap_or(0) + 1).clamp(2, zoom_pts);
                let n2 = (((hi2 - lo2) / (h2 / ten)).round().to_usize().unwrap_or(0) + 1).clamp(2, zoom_pts);
                let lat = Lattice::build(ctx, axis(lo1, hi1, n1), axis(lo2, hi2, n2));
                let (i, j) = lat.argmax();
                (lat.z1[i], lat.z2[j])
            })
            .collect();
        h1 = h1 / ten;
        h2 = h2 / ten;
        trace.push(format!("round {}: spacing ({h1:e}, {h2:e})", round + 1));
    }
    let mut points: Vec<OraclePoint<T>> = seeds
        .into_iter()
        .map(|(z1, z2)| OraclePoint {
            z1,
            z2,
            zeta: crate::solver::zeta(ctx, z1, z2),
        })
        .filter(|p| p.zeta.is_finite())
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyGrid("no feasible lattice point".into()));
    }
    points.sort_by(|a, b| b.zeta.partial_cmp(&a.zeta).unwrap());
    let best = points[0].zeta;
    let mut maxima: Vec<OraclePoint<T>> = Vec::new();
    for p in points {
        if p.zeta < best - T::lit(1e-6) * best.abs() {
            continue;
        }
        let distinct = maxima
            .iter()
            .all(|m| (m.z1 - p.z1).abs() > ten * h1 || (m.z2 - p.z2).abs() > ten * h2);
        if distinct {
            maxima.push(p);
        }
    }
    Ok(OracleResult {
        maxima,
        spacing: (h1, h2),
        trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison<T> {
    pub zeta_solver: T,
    pub zeta_oracle: T,
    /// `zeta_solver >= zeta_oracle - 1e-6 zeta_solver`.
    pub zeta_ok: bool,
    /// Distance from the oracle argmax to the nearest solver pair, per axis.
    pub argmax_distance: (T, T),
    pub spacing: (T, T),
    /// Argmax distance within one final grid spacing on both axes.
    pub argmax_ok: bool,
    pub oracle: OracleResult<T>,
}

impl<T: Real> Comparison<T> {
    pub fn passed(&self) -> bool {
        self.zeta_ok && self.argmax_ok
    }
}

pub fn compare_solver_oracle<T: Real>(
    ctx: &ScaleContext<T>,
    solution: &BarrierSolutionSet<T>,
    spec: &GridSpec<T>,
) -> Result<Comparison<T>> {
    let oracle = grid_maximize_zeta(ctx, spec)?;
    let best = oracle.best();
    let zeta_solver = solution.zeta_star();
    let zeta_ok = zeta_solver >= best.zeta - T::lit(1e-6) * zeta_solver;
    let argmax_distance = solution
        .pairs
        .iter()
        .map(|p| ((p.z1 - best.z1).abs(), (p.z2 - best.z2).abs()))
        .min_by(|a, b| (a.0 / oracle.spacing.0).max(a.1 / oracle.spacing.1).partial_cmp(&(b.0 / oracle.spacing.0).max(b.1 / oracle.spacing.1)).unwrap())
        .unwrap_or((T::infinity(), T::infinity()));
    let argmax_ok = argmax_distance.0 <= oracle.spacing.0 && argmax_distance.1 <= oracle.spacing.1;
    Ok(Comparison {
        zeta_solver,
        zeta_oracle: best.zeta,
        zeta_ok,
        argmax_distance,
        spacing: oracle.spacing,
        argmax_ok,
        oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    #[test]
    fn boundary_row_has_zero_zeta() {
        let ctx = ScaleContext::new(ModelParams::new(0.0, 1.0, 0.0, 1.0, 1.0, 0.5, 0.25).unwrap()).unwrap();
        let lat = Lattice::build(&ctx, vec![0.0, 0.5, 1.0], vec![0.25, 0.75, 1.25]);
        assert_eq!(lat.at(0, 0), 0.0);
        assert_eq!(lat.at(1, 1), 0.0);
        assert_eq!(lat.at(2, 2), 0.0);
        assert_eq!(lat.at(2, 0), f64::NEG_INFINITY);
    }

    #[test]
    fn rejects_empty_grid() {
        let ctx = ScaleContext::new(ModelParams::new(0.0, 1.0, 0.0, 1.0, 1.0, 0.5, 5.0).unwrap()).unwrap();
        let spec = GridSpec {
            z1_range: (0.0, 1.0),
            z2_range: (0.0, 1.0),
            n1: 10,
            n2: 10,
            refine_rounds: 1,
            top_k: 1,
        };
        assert!(matches!(grid_maximize_zeta(&ctx, &spec), Err(Error::EmptyGrid(_))));
    }
}
