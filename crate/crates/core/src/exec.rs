//! Data-parallel helpers. With the `parallel` feature the parallel mode runs on rayon;
//! without it every mode runs sequentially.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// The mode actually used given the compiled features.
    pub fn effective(self) -> Self {
        if cfg!(feature = "parallel") {
            self
        } else {
            Execution::Sequential
        }
    }
}

/// Order-preserving map.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Fold each item into an accumulator and merge accumulators. `reduce` must be
/// associative and `identity` its neutral element for the result to be independent of
/// the split.
pub fn fold_reduce<T, A, I, F, R>(exec: Execution, items: &[T], identity: I, fold: F, reduce: R) -> A
where
    T: Sync,
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(A, &T) -> A + Sync + Send,
    R: Fn(A, A) -> A + Sync + Send,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().fold(&identity, &fold).reduce(&identity, &reduce)
        }
        _ => {
            let _ = reduce;
            items.iter().fold(identity(), fold)
        }
    }
}

pub fn join<A, B, FA, FB>(exec: Execution, a: FA, b: FB) -> (A, B)
where
    A: Send,
    B: Send,
    FA: FnOnce() -> A + Send,
    FB: FnOnce() -> B + Send,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => rayon::join(a, b),
        _ => (a(), b()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let items: Vec<u64> = (0..1000).collect();
        for exec in [Execution::Sequential, Execution::Parallel] {
            assert_eq!(map(exec, &items, |x| x * 2)[999], 1998);
            let s = fold_reduce(exec, &items, || 0u64, |a, x| a + x, |a, b| a + b);
            assert_eq!(s, 499_500);
            assert_eq!(join(exec, || 1, || 2), (1, 2));
        }
    }
}
