//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) `Exec::Parallel` runs on the
//! rayon pool; without it both variants run sequentially. Results never
//! depend on the variant: collections keep input order and reductions are
//! over associative, commutative operations.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

pub fn map_collect<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

pub fn map_range<R, F>(exec: Exec, range: Range<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => range.into_par_iter().map(f).collect(),
        _ => range.map(f).collect(),
    }
}

pub fn map_reduce<R, F, G>(exec: Exec, range: Range<usize>, f: F, identity: R, reduce: G) -> R
where
    R: Send + Sync + Clone,
    F: Fn(usize) -> R + Sync + Send,
    G: Fn(R, R) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => range.into_par_iter().map(f).reduce(|| identity.clone(), &reduce),
        _ => range.map(f).fold(identity, reduce),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variants_agree() {
        let f = |i: usize| (i * i) % 7;
        assert_eq!(map_range(Exec::Sequential, 0..100, f), map_range(Exec::Parallel, 0..100, f));
        let s = map_reduce(Exec::Sequential, 0..1000, |i| i as u64, 0, |a, b| a + b);
        let p = map_reduce(Exec::Parallel, 0..1000, |i| i as u64, 0, |a, b| a + b);
        assert_eq!((s, p), (499500, 499500));
        let v: Vec<u32> = (0..50).collect();
        assert_eq!(map_collect(Exec::Parallel, &v, |x| x + 1), map_collect(Exec::Sequential, &v, |x| x + 1));
    }
}
