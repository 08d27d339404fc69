//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the `Parallel` mode runs on rayon's global
//! pool; without it both modes run sequentially. Results always come back in
//! input order, so output assembly is deterministic either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let xs: Vec<u32> = (0..1000).collect();
        let a = Execution::Sequential.map(&xs, |x| x * 3);
        let b = Execution::Parallel.map(&xs, |x| x * 3);
        assert_eq!(a, b);
        assert_eq!(a[10], 30);
    }
}
