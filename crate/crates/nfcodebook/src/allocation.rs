//! Split of a Phase-1 bit budget between angle and range samples, chosen by
//! exhaustive search over Monte-Carlo gain estimates.

use rayon::prelude::*;

use crate::array::{norm, ArrayConfig, PolarCoord};
use crate::channel::los_channel;
use crate::codebook::{PolarCodebook, Scheme};
use crate::distribution::{sample_locations, DistributionSpec};
use crate::error::{Error, Result};
use crate::feedback::{phase1_select_with, Phase1Search};
use crate::numerics::mean_stderr;

/// Default Monte-Carlo size for allocation tables.
pub const DEFAULT_N_MC: usize = 300;

/// Best normalized gain for each LoS user.
pub fn phase1_gains(
    cb: &PolarCodebook,
    users: &[PolarCoord],
    search: Phase1Search,
) -> Result<Vec<f64>> {
    let cfg = cb.config();
    users
        .par_iter()
        .map(|&u| {
            let h = los_channel(cfg, u, num_complex::Complex64::new(1.0, 0.0));
            debug_assert!(norm(&h.vector) > 0.0);
            phase1_select_with(&h, cb, search).map(|c| c.gain)
        })
        .collect()
}

/// Mean and standard error of the best normalized gain over `users`.
pub fn estimate_gain(
    cb: &PolarCodebook,
    users: &[PolarCoord],
    search: Phase1Search,
) -> Result<(f64, f64)> {
    if users.is_empty() {
        return Err(Error::InvalidArgument("need at least one user draw".into()));
    }
    Ok(mean_stderr(&phase1_gains(cb, users, search)?))
}

/// Draws `n_mc` LoS users from `dist` and averages the gain of the codebook
/// produced by `build`.
pub fn estimate_gain_mc<F>(
    build: F,
    dist: &DistributionSpec,
    n_mc: usize,
    seed: u64,
    search: Phase1Search,
) -> Result<(f64, f64)>
where
    F: FnOnce() -> Result<PolarCodebook>,
{
    let users = sample_locations(dist, n_mc, seed)?;
    estimate_gain(&build()?, &users, search)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationEntry {
    pub p: u32,
    pub q: u32,
    pub gamma_hat: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub p_opt: u32,
    pub q_opt: u32,
    /// One entry per split, ordered by increasing `p`.
    pub table: Vec<AllocationEntry>,
    pub n_mc: usize,
    pub seed: u64,
}

impl AllocationResult {
    pub fn best(&self) -> &AllocationEntry {
        self.table
            .iter()
            .find(|e| e.p == self.p_opt)
            .expect("optimum is in the table")
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["p", "q", "gamma_hat", "stderr"])?;
        for e in &self.table {
            out.write_record([
                e.p.to_string(),
                e.q.to_string(),
                e.gamma_hat.to_string(),
                e.stderr.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Every split `p + q = b1` evaluated on one shared set of user draws.
/// Ties go to the larger `p`.
pub fn optimize_allocation(
    b1: u32,
    dist: &DistributionSpec,
    cfg: &ArrayConfig,
    scheme: Scheme,
    n_mc: usize,
    seed: u64,
    search: Phase1Search,
) -> Result<AllocationResult> {
    if b1 < 1 {
        return Err(Error::InvalidArgument("bit budget must be >= 1".into()));
    }
    let region = *dist
        .region()
        .ok_or_else(|| Error::Unsupported("allocation needs a bounded region".into()))?;
    let users = sample_locations(dist, n_mc, seed)?;
    let training: Vec<f64> = if scheme == Scheme::Extended {
        sample_locations(
            dist,
            100_000,
            crate::seed::derive(seed, crate::seed::stream::TRAINING, 0),
        )?
        .iter()
        .map(|u| u.range)
        .collect()
    } else {
        Vec::new()
    };
    let mut table = Vec::with_capacity(b1 as usize + 1);
    for p in 0..=b1 {
        let q = b1 - p;
        let cb = scheme.build(cfg, &region, p, q, Some(&training))?;
        let (gamma_hat, stderr) = estimate_gain(&cb, &users, search)?;
        table.push(AllocationEntry {
            p,
            q,
            gamma_hat,
            stderr,
        });
    }
    let best = table
        .iter()
        .fold(None::<&AllocationEntry>, |acc, e| match acc {
            Some(b) if b.gamma_hat > e.gamma_hat => Some(b),
            _ => Some(e),
        })
        .expect("nonempty table");
    Ok(AllocationResult {
        p_opt: best.p,
        q_opt: best.q,
        table,
        n_mc,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{assemble_codebook, AngleSamplingSet, RangeSamplingSet};
    use crate::distribution::PolarRegion;

    #[test]
    fn exact_codebook_gives_unit_gain() {
        let cfg = ArrayConfig::from_carrier(65, 30e9).unwrap();
        let p = PolarCoord::new(0.2, 15.0).unwrap();
        let cb = assemble_codebook(
            &cfg,
            AngleSamplingSet::new(vec![0.2]).unwrap(),
            RangeSamplingSet::new(vec![15.0]).unwrap(),
        );
        let (g, se) = estimate_gain_mc(
            || Ok(cb.clone()),
            &DistributionSpec::Empirical(vec![p]),
            20,
            1,
            Phase1Search::Exhaustive,
        )
        .unwrap();
        assert!((g - 1.0).abs() < 1e-12);
        assert!(se < 1e-12);
    }

    #[test]
    fn one_bit_budget_has_two_rows() {
        let cfg = ArrayConfig::from_carrier(65, 30e9).unwrap();
        let dist = DistributionSpec::UniformPolar(PolarRegion::new(-0.5, 0.5, 4.0, 120.0).unwrap());
        let r = optimize_allocation(
            1,
            &dist,
            &cfg,
            Scheme::Geometric,
            20,
            3,
            Phase1Search::Exhaustive,
        )
        .unwrap();
        assert_eq!(r.table.len(), 2);
        assert_eq!(r.p_opt + r.q_opt, 1);
        let top = r.table.iter().map(|e| e.gamma_hat).fold(f64::MIN, f64::max);
        assert_eq!(r.best().gamma_hat, top);
    }
}
