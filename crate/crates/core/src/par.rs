//! Data-parallel helpers. With the `parallel` feature disabled every
//! strategy runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub fn num_threads() -> usize {
    #[cfg(feature = "parallel")]
    return rayon::current_num_threads();

    #[cfg(not(feature = "parallel"))]
    return 1;
}

pub fn map_collect<'a, T, R, F>(items: &'a [T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&'a T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

pub fn flat_map_collect<'a, T, R, F>(items: &'a [T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&'a T) -> Vec<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().flat_map_iter(f).collect();
    }
    let _ = exec;
    items.iter().flat_map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree_and_keep_order() {
        let v: Vec<u32> = (0..1000).collect();
        let seq = flat_map_collect(&v, Execution::Sequential, |&x| vec![x; (x % 3) as usize]);
        let par = flat_map_collect(&v, Execution::Parallel, |&x| vec![x; (x % 3) as usize]);
        assert_eq!(seq, par);
        assert_eq!(
            map_collect(&v, Execution::Parallel, |x| x * 2),
            map_collect(&v, Execution::Sequential, |x| x * 2)
        );
    }
}
