//! Natural density of coalitions: exact counting ratios, bounds with a
//! disclosed sampling window, and runs of three consecutive members.

use crate::seqcore::descriptor::{CoalitionDescriptor, NormalizeError};
use crate::{q, Q};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum DensityError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("horizons must be nonempty")]
    EmptyHorizons,
    #[error("horizons must be strictly increasing")]
    NotIncreasing,
    #[error("horizon must be at least 3 to hold a triple")]
    HorizonTooSmallForTriples,
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}

/// Counting ratio `|a ∩ [0,n]| / n`. The interval is closed and the divisor
/// is `n`, so a full set at `n = 100` yields `101/100`; the limit is
/// unaffected and this keeps small-scale values comparable across tools.
pub fn alpha(a: &CoalitionDescriptor, n: u64) -> Result<Q, DensityError> {
    if n == 0 {
        return Err(DensityError::ZeroHorizon);
    }
    Ok(q(a.count_upto(n)?, n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityBounds {
    pub upper: Q,
    pub lower: Q,
    pub exact: Option<Q>,
    /// First and last horizon of the tail window the estimates came from.
    pub window: (u64, u64),
    pub samples_used: usize,
}

/// Estimate the density from samples over the tail half of `horizons`, and
/// report the exact value, which the normal form always determines.
///
/// Estimates are clamped into `[0, 1]`; the counting convention can push a
/// single sample slightly above 1.
pub fn density_bounds(
    a: &CoalitionDescriptor,
    horizons: &[u64],
) -> Result<DensityBounds, DensityError> {
    validate_horizons(horizons)?;
    let nf = a.normal_form()?;
    let tail = &horizons[(horizons.len() - 1) / 2..];
    let one = q(1, 1);
    let mut lower = one;
    let mut upper = q(0, 1);
    for &n in tail {
        let s = q(nf.count_upto(n), n).min(one);
        lower = lower.min(s);
        upper = upper.max(s);
    }
    Ok(DensityBounds {
        upper,
        lower,
        exact: Some(nf.density()),
        window: (tail[0], tail[tail.len() - 1]),
        samples_used: tail.len(),
    })
}

fn validate_horizons(horizons: &[u64]) -> Result<(), DensityError> {
    if horizons.is_empty() {
        return Err(DensityError::EmptyHorizons);
    }
    if horizons[0] == 0 {
        return Err(DensityError::ZeroHorizon);
    }
    if horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DensityError::NotIncreasing);
    }
    Ok(())
}

/// Starting points `h` of all runs `{h, h+1, h+2}` inside `a` with
/// `h + 2 <= horizon`, in increasing order.
pub fn find_triples(a: &CoalitionDescriptor, horizon: u64) -> Result<Vec<u64>, DensityError> {
    if horizon < 3 {
        return Err(DensityError::HorizonTooSmallForTriples);
    }
    let mut out = Vec::new();
    // Sliding window over three consecutive membership bits.
    let mut win = [a.contains(0), a.contains(1), a.contains(2)];
    for h in 0..=horizon - 2 {
        if win.iter().all(|&b| b) {
            out.push(h);
        }
        win = [win[1], win[2], a.contains(h + 3)];
    }
    Ok(out)
}

/// A descriptor with its sampled counting ratios and exact density.
#[derive(Debug, Clone)]
pub struct DensityProfile {
    pub subject: CoalitionDescriptor,
    pub samples: Vec<(u64, Q)>,
    pub exact_density: Option<Q>,
    /// `|alpha(n) - exact| <= deviation(n) / n` whenever exact is present.
    pub deviation: u64,
}

impl DensityProfile {
    pub fn sample(
        subject: CoalitionDescriptor,
        horizons: &[u64],
    ) -> Result<DensityProfile, DensityError> {
        validate_horizons(horizons)?;
        let nf = subject.normal_form()?;
        let samples: Vec<(u64, Q)> = horizons.iter().map(|&n| (n, q(nf.count_upto(n), n))).collect();
        let deviation = nf.count_slack(*horizons.last().expect("nonempty"));
        for &(n, s) in &samples {
            // Closed-interval counting allows up to (n+1)/n.
            debug_assert!(s <= q(n + 1, n));
        }
        Ok(DensityProfile {
            subject,
            samples,
            exact_density: Some(nf.density()),
            deviation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use CoalitionDescriptor as D;

    #[test]
    fn full_set_slightly_overshoots_at_small_scale() {
        assert_eq!(alpha(&D::everything(), 100).unwrap(), q(101, 100));
    }

    #[test]
    fn powers_of_ten_count() {
        assert_eq!(alpha(&D::geom(1, 10), 1_000_000).unwrap(), q(7, 1_000_000));
    }

    #[test]
    fn evens_count() {
        assert_eq!(alpha(&D::arith(0, 2), 100).unwrap(), q(51, 100));
    }

    #[test]
    fn alpha_matches_the_bit_count_oracle() {
        let subjects = [
            D::arith(2, 5),
            D::periodic(vec![1, 0], vec![1, 1, 0]),
            D::arith(0, 2).union(D::geom(3, 2)),
            D::geom(1, 3).complement(),
        ];
        for a in &subjects {
            for n in [1u64, 17, 100, 999] {
                let direct = (0..=n).filter(|&k| a.contains(k)).count();
                assert_eq!(alpha(a, n).unwrap(), q(direct as u64, n), "{a:?} at {n}");
            }
        }
    }

    #[test]
    fn bounds_for_the_solvable_classes() {
        let horizons: Vec<u64> = (1..=6).map(|k| 10u64.pow(k)).collect();
        let third = density_bounds(&D::arith(0, 3), &horizons).unwrap();
        assert_eq!(third.exact, Some(q(1, 3)));
        let fin = density_bounds(&D::finite([1, 2, 3]), &horizons).unwrap();
        assert_eq!(fin.exact, Some(q(0, 1)));
        let sparse = density_bounds(&D::geom(1, 10), &horizons).unwrap();
        assert_eq!(sparse.exact, Some(q(0, 1)));
        let cofin = density_bounds(&D::finite([4]).complement(), &horizons).unwrap();
        assert_eq!(cofin.exact, Some(q(1, 1)));
        for b in [third, fin, sparse, cofin] {
            assert!(b.lower <= b.upper);
            assert!(b.upper <= q(1, 1));
        }
    }

    #[test]
    fn estimates_settle_near_the_exact_value() {
        let horizons: Vec<u64> = (4..=14).map(|k| 1u64 << k).collect();
        let b = density_bounds(&D::arith(1, 4), &horizons).unwrap();
        let exact = b.exact.unwrap();
        assert_eq!(exact, q(1, 4));
        assert!(b.lower <= exact && exact <= b.upper + q(1, b.window.0));
    }

    #[test]
    fn every_window_in_the_full_set_is_a_triple() {
        assert_eq!(
            find_triples(&D::everything(), 10).unwrap(),
            (0..=8).collect::<Vec<u64>>()
        );
    }

    #[test]
    fn dropping_every_third_point_kills_all_triples() {
        let a = D::arith(0, 3).complement();
        assert!(find_triples(&a, 10_000).unwrap().is_empty());
    }

    #[test]
    fn sparse_removals_leave_triples() {
        let a = D::geom(1, 10).complement();
        let t = find_triples(&a, 1000).unwrap();
        assert!(t.contains(&2));
        assert!(!t.is_empty());
    }

    #[test]
    fn dense_periodic_patterns_have_many_triples() {
        // Seven of eight residues present: more than three quarters.
        let a = D::arith(3, 8).complement();
        let horizon = 10_000u64;
        let t = find_triples(&a, horizon).unwrap();
        assert!(t.len() as u64 >= horizon / (3 * 8));
    }

    #[test]
    fn profile_deviation_brackets_all_samples() {
        let horizons = [10u64, 100, 1000, 10_000];
        let p = DensityProfile::sample(D::arith(0, 2).union(D::geom(1, 3)), &horizons).unwrap();
        let exact = p.exact_density.unwrap();
        for (n, s) in p.samples {
            let bound = q(p.deviation, n);
            let diff = if s > exact { s - exact } else { exact - s };
            assert!(diff <= bound, "sample at {n} deviates more than {bound}");
        }
    }
}
