//! Fractional total variation
//!
//! `TV^s u = sup_partitions sum |u(x_k) - u(x_{k-1})|^{1/s}` for `0 < s <= 1`, i.e. the
//! `p`-variation with `p = 1/s`. On sampled data the supremum is a maximum over index
//! subsequences and is computed exactly by dynamic programming over the local extrema.

mod gagliardo;
mod series;

pub use gagliardo::{gagliardo_seminorm, gagliardo_seminorms};
pub use series::{classify_growth, partial_variation_series, GrowthClass, GrowthModel, SeriesProbe, Verdict};

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::sampled::SampledFunction;
use crate::scalar::Real;

/// Optimal value of the `s`-total variation together with an attaining partition.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationResult<T> {
    pub s: T,
    pub p: T,
    pub value: T,
    /// Strictly increasing sample indices.
    pub partition: Vec<usize>,
}

impl<T: Real> VariationResult<T> {
    /// Recomputes `sum |Δu|^p` along the partition, left to right.
    pub fn reevaluate(&self, values: &[T]) -> T {
        partition_sum(values, &self.partition, self.p)
    }
}

fn partition_sum<T: Real>(values: &[T], idx: &[usize], p: T) -> T {
    idx.windows(2).fold(T::zero(), |acc, w| acc + increment(values[w[0]], values[w[1]], p))
}

#[inline]
fn increment<T: Real>(a: T, b: T, p: T) -> T {
    let d = (b - a).abs();
    if p == T::one() {
        d
    } else {
        d.powf(p)
    }
}

fn check_s<T: Real>(s: T) -> Result<T> {
    if !(s > T::zero() && s <= T::one()) {
        return Err(Error::InvalidInput(format!("s = {s} must lie in (0, 1]")));
    }
    Ok(T::one() / s)
}

/// Indices where the sampled sequence strictly changes direction, plus both endpoints.
/// A plateau contributes its first index only.
pub fn local_extrema<T: Real>(values: &[T]) -> Vec<usize> {
    let n = values.len();
    if n < 2 {
        return (0..n).collect();
    }
    // first index of every run of equal values
    let mut runs = vec![0usize];
    for i in 1..n {
        if values[i] != values[i - 1] {
            runs.push(i);
        }
    }
    let mut out = vec![0];
    for k in 1..runs.len().saturating_sub(1) {
        let (a, b, c) = (values[runs[k - 1]], values[runs[k]], values[runs[k + 1]]);
        if (b > a) != (c > b) {
            out.push(runs[k]);
        }
    }
    out.push(n - 1);
    out
}

#[derive(Debug, Clone, Copy)]
struct Chain<T> {
    value: T,
    len: usize,
    /// Predecessor candidate and whether the chain there is the bare starting point.
    pred: Option<(usize, bool)>,
}

/// `TV^s` of the sample sequence with an optimal partition.
///
/// Ties between optimal partitions go to the shortest, then the lexicographically
/// smallest index sequence among the extremal candidates.
pub fn tv_s<T: Real>(f: &SampledFunction<T>, s: T) -> Result<VariationResult<T>> {
    let p = check_s(s)?;
    let values = f.values();
    let cand = local_extrema(values);
    let m = cand.len();

    // best[j]: best chain of length >= 2 ending at candidate j
    let mut best: Vec<Option<Chain<T>>> = vec![None; m];
    for j in 1..m {
        let vj = values[cand[j]];
        let mut cur: Option<Chain<T>> = None;
        for i in 0..j {
            let w = increment(values[cand[i]], vj, p);
            let start = Chain { value: w, len: 2, pred: Some((i, true)) };
            let via = best[i].map(|c| Chain { value: c.value + w, len: c.len + 1, pred: Some((i, false)) });
            for next in std::iter::once(start).chain(via) {
                let replace = match &cur {
                    None => true,
                    Some(c) => compare(&next, j, c, j, &best, &cand) == Ordering::Greater,
                };
                if replace {
                    cur = Some(next);
                }
            }
        }
        best[j] = cur;
    }

    let mut winner: Option<(usize, Chain<T>)> = None;
    for (j, c) in best.iter().enumerate() {
        if let Some(c) = c {
            let replace = match &winner {
                None => true,
                Some((wj, w)) => compare(c, j, w, *wj, &best, &cand) == Ordering::Greater,
            };
            if replace {
                winner = Some((j, *c));
            }
        }
    }
    let (j, chain) = winner.expect("at least two candidates");
    Ok(VariationResult { s, p, value: chain.value, partition: materialize(&chain, j, &best, &cand) })
}

/// Preference order: larger value, then shorter, then lexicographically smaller.
fn compare<T: Real>(
    a: &Chain<T>,
    ja: usize,
    b: &Chain<T>,
    jb: usize,
    best: &[Option<Chain<T>>],
    cand: &[usize],
) -> Ordering {
    match a.value.partial_cmp(&b.value).expect("finite values") {
        Ordering::Equal => {}
        o => return o,
    }
    match b.len.cmp(&a.len) {
        Ordering::Equal => {}
        o => return o,
    }
    let sa = materialize(a, ja, best, cand);
    let sb = materialize(b, jb, best, cand);
    sb.cmp(&sa)
}

fn materialize<T: Real>(chain: &Chain<T>, end: usize, best: &[Option<Chain<T>>], cand: &[usize]) -> Vec<usize> {
    let mut out = vec![cand[end]];
    let mut link = chain.pred;
    while let Some((i, bare)) = link {
        out.push(cand[i]);
        link = if bare { None } else { best[i].expect("linked chain exists").pred };
    }
    out.reverse();
    out
}

/// Largest length accepted by [`tv_s_bruteforce`].
pub const BRUTEFORCE_MAX_LEN: usize = 14;

/// Exhaustive maximum over all index subsequences of length >= 2.
pub fn tv_s_bruteforce<T: Real>(f: &SampledFunction<T>, s: T) -> Result<T> {
    let p = check_s(s)?;
    let values = f.values();
    let n = values.len();
    if n > BRUTEFORCE_MAX_LEN {
        return Err(Error::TooLarge { len: n, max: BRUTEFORCE_MAX_LEN });
    }
    let mut best = T::zero();
    let mut idx = Vec::with_capacity(n);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        idx.clear();
        idx.extend((0..n).filter(|i| mask & (1 << i) != 0));
        best = best.max(partition_sum(values, &idx, p));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(v: &[f64]) -> SampledFunction<f64> {
        SampledFunction::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn extrema_examples() {
        assert_eq!(local_extrema(&[0.0, 1.0, 0.9, 2.0]), vec![0, 1, 2, 3]);
        assert_eq!(local_extrema(&[0.0, 1.0, 2.0, 3.0]), vec![0, 3]);
        assert_eq!(local_extrema(&[1.0, 1.0, 1.0]), vec![0, 2]);
        assert_eq!(local_extrema(&[0.0, 2.0, 2.0, 2.0, 1.0]), vec![0, 1, 4]);
        assert_eq!(local_extrema(&[0.0, 1.0, 1.0]), vec![0, 2]);
    }

    #[test]
    fn tv_s_examples() {
        let f = sf(&[0.0, 1.0, 0.9, 2.0]);
        let r = tv_s(&f, 0.5).unwrap();
        assert_eq!((r.value, r.partition.clone()), (4.0, vec![0, 3]));
        let r = tv_s(&f, 1.0).unwrap();
        assert!((r.value - 2.2).abs() < 1e-15);
        assert_eq!(r.partition, vec![0, 1, 2, 3]);
        assert_eq!(tv_s(&sf(&[3.0; 5]), 0.25).unwrap().value, 0.0);
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(tv_s_bruteforce(&sf(&[0.0, 1.0, 0.9, 2.0]), 0.5).unwrap(), 4.0);
        assert_eq!(tv_s_bruteforce(&sf(&[0.0, 1.0, 0.0]), 0.5).unwrap(), 2.0);
        assert_eq!(tv_s_bruteforce(&sf(&[1.0, -2.0]), 0.5).unwrap(), 9.0);
        assert!(matches!(tv_s_bruteforce(&sf(&[0.0; 15]), 0.5), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn ties_prefer_short_then_lexicographic() {
        // {0,1} and {1,2} and {0,1,2}... : s = 1 on 0,1,0 gives 2 only via all three points
        let r = tv_s(&sf(&[0.0, 1.0, 0.0]), 1.0).unwrap();
        assert_eq!(r.partition, vec![0, 1, 2]);
        // 0,1,0,1 with p = 2: {0,1,2,3} = 3, nothing shorter reaches it
        let r = tv_s(&sf(&[0.0, 1.0, 0.0, 1.0]), 0.5).unwrap();
        assert_eq!((r.value, r.partition), (3.0, vec![0, 1, 2, 3]));
        // 1,0,1 with p = 4 then constant tail: value 2 attained by {0,1,2} only
        let r = tv_s(&sf(&[0.0, 1.0, 1.0, 0.0]), 0.25).unwrap();
        assert_eq!((r.value, r.partition), (2.0, vec![0, 1, 3]));
        // constant: shortest, lexicographically first candidate pair
        assert_eq!(tv_s(&sf(&[2.0, 2.0, 2.0]), 0.5).unwrap().partition, vec![0, 2]);
    }

    #[test]
    fn value_is_reevaluable() {
        let v = [0.3, -1.2, 0.8, 0.75, 2.0, -0.4, -0.41, 1.1];
        for s in [0.25, 0.5, 0.8, 1.0] {
            let r = tv_s(&sf(&v), s).unwrap();
            assert_eq!(r.value, r.reevaluate(&v));
            assert!(r.value >= (v[7] - v[0]).abs().powf(1.0 / s));
        }
    }

    #[test]
    fn rejects_bad_s() {
        assert!(tv_s(&sf(&[0.0, 1.0]), 0.0).is_err());
        assert!(tv_s(&sf(&[0.0, 1.0]), 1.5).is_err());
    }

    #[test]
    fn single_precision() {
        let f = SampledFunction::<f32>::from_values(vec![0.0, 1.0, 0.5, 2.0]).unwrap();
        assert_eq!(tv_s(&f, 0.5).unwrap().value, 4.0);
    }
}
