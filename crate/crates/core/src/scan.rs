//! Parameter grids and an order-preserving parallel map for scans.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};

/// Slack for the inclusive end point of a grid.
const GRID_TOL: f64 = 1e-12;

/// `start, start + step, …` up to and including `stop` (within 1e-12).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::Argument("grid bounds must be finite".into()));
    }
    if start == stop {
        return Ok(vec![start]);
    }
    if step == 0.0 || (stop - start).signum() != step.signum() {
        return Err(Error::Argument(format!("step {step} does not lead from {start} to {stop}")));
    }
    let n = ((stop - start) / step + GRID_TOL).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

/// `n` points spaced evenly in `ln x` from `start` to `stop`.
pub fn log_grid(start: f64, stop: f64, n: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0) || n == 0 {
        return Err(Error::Argument("log grid needs positive bounds and at least one point".into()));
    }
    if n == 1 {
        return Ok(vec![start]);
    }
    let (a, b) = (start.ln(), stop.ln());
    Ok((0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect())
}

/// Parses `start:stop:step` or a single value.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num =
        |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Argument(format!("bad number {s:?} in grid {spec:?}")));
    match parts.as_slice() {
        [x] => Ok(vec![num(x)?]),
        [a, b, c] => linear_grid(num(a)?, num(b)?, num(c)?),
        _ => Err(Error::Argument(format!("grid {spec:?} is not start:stop:step"))),
    }
}

/// Worker count from an explicit value, `FERMICORR_JOBS`, or the machine.
pub fn resolve_jobs(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var("FERMICORR_JOBS").ok().and_then(|v| v.parse().ok()))
        .filter(|&j| j > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over `items` on up to `jobs` threads; the output follows the input order.
pub fn par_map<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every slot filled")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_end_points() {
        let g = linear_grid(0.0, 1.0, 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert!((g[10] - 1.0).abs() < 1e-12);
        assert_eq!(linear_grid(0.1, 6.0, 0.05).unwrap().len(), 119);
        assert_eq!(linear_grid(1.0, 0.0, -0.5).unwrap(), vec![1.0, 0.5, 0.0]);
        assert!(linear_grid(0.0, 1.0, -0.1).is_err());
        assert_eq!(parse_grid("0.25").unwrap(), vec![0.25]);
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn log_grid_ends() {
        let g = log_grid(1e-3, 1.0, 4).unwrap();
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[3] - 1.0).abs() < 1e-12 && (g[1] - 1e-2).abs() < 1e-12);
    }

    #[test]
    fn par_map_keeps_order() {
        let xs: Vec<u64> = (0..100).collect();
        assert_eq!(par_map(&xs, 4, |x| x * x), xs.iter().map(|x| x * x).collect::<Vec<_>>());
    }
}
