//! Streams backed by a computation rerun at doubling horizons.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use super::stream::RayStream;
use crate::error::Result;
use crate::graph::VertexId;

/// Paths computed at one horizon, each vertex with its root distance.
pub type PathRun = Vec<Vec<(VertexId, usize)>>;

type Runner = dyn Fn(usize) -> Result<PathRun> + Send + Sync;

/// Number of doublings past the first horizon that are ever computed.
pub const MAX_DOUBLINGS: u32 = 4;

/// A family of paths computed at horizons `h0, 2 h0, 4 h0, ...`.
///
/// A path at a later checkpoint replaces the earlier one only if it extends it
/// verbatim; otherwise the earlier path is kept and counted as a stall. The
/// prefix at horizon `h` is the longest initial segment, within distance `h`,
/// of the path at the least checkpoint at or above `h`.
pub struct Checkpoints {
    run: Box<Runner>,
    state: Mutex<Vec<(usize, Arc<PathRun>)>>,
    stalls: AtomicUsize,
}

impl Checkpoints {
    pub fn start<F>(horizon: usize, run: F) -> Result<Arc<Checkpoints>>
    where
        F: Fn(usize) -> Result<PathRun> + Send + Sync + 'static,
    {
        let first = run(horizon)?;
        Ok(Arc::new(Checkpoints {
            run: Box::new(run),
            state: Mutex::new(vec![(horizon, Arc::new(first))]),
            stalls: AtomicUsize::new(0),
        }))
    }

    pub fn width(&self) -> usize {
        self.state.lock().unwrap()[0].1.len()
    }

    pub fn first_horizon(&self) -> usize {
        self.state.lock().unwrap()[0].0
    }

    pub fn stalls(&self) -> usize {
        self.stalls.load(Ordering::Relaxed)
    }

    fn checkpoint(&self, h: usize) -> Arc<PathRun> {
        let mut state = self.state.lock().unwrap();
        loop {
            if let Some((_, run)) = state.iter().find(|(c, _)| *c >= h) {
                return run.clone();
            }
            let (last_h, last) = state.last().unwrap().clone();
            if state.len() > MAX_DOUBLINGS as usize {
                return last;
            }
            let next_h = 2 * last_h;
            let merged: PathRun = match (self.run)(next_h) {
                Ok(new) if new.len() == last.len() => new
                    .into_iter()
                    .zip(last.iter())
                    .map(|(n, o)| {
                        if n.len() >= o.len() && n.iter().zip(o).all(|(a, b)| a.0 == b.0) {
                            n
                        } else {
                            self.stalls.fetch_add(1, Ordering::Relaxed);
                            o.clone()
                        }
                    })
                    .collect(),
                _ => {
                    self.stalls.fetch_add(last.len(), Ordering::Relaxed);
                    (*last).clone()
                }
            };
            state.push((next_h, Arc::new(merged)));
        }
    }

    pub fn path(&self, k: usize, h: usize) -> Vec<VertexId> {
        let run = self.checkpoint(h);
        run[k].iter().take_while(|(_, d)| *d <= h).map(|(v, _)| v.clone()).collect()
    }

    pub fn ray(self: &Arc<Self>, k: usize) -> RayStream {
        let me = self.clone();
        RayStream::from_fn(move |h| me.path(k, h))
    }
}
