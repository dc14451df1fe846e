//! Multi-threaded loss and gradient evaluation.
//!
//! Chunks are handed out to scoped threads in contiguous blocks and reduced
//! in chunk order, so results are bit-identical to [`Serial`] for any thread
//! count.

use std::num::NonZeroUsize;
use std::thread;

use plrnet_core::optim::{chunk_loss_grad, chunk_sse, Evaluator, Serial, GRAD_CHUNK};
use plrnet_core::{Dataset, Result as CoreResult, SurrogateModel};

use crate::error::{CliError, Result};

pub const THREADS_VAR: &str = "PLRNET_THREADS";

#[derive(Debug, Clone, Copy)]
pub struct Threaded {
    threads: usize,
}

impl Threaded {
    pub fn new(threads: NonZeroUsize) -> Self {
        Self { threads: threads.get() }
    }

    /// Reads `PLRNET_THREADS`; falls back to the available parallelism.
    pub fn from_env() -> Result<Self> {
        match std::env::var(THREADS_VAR) {
            Ok(v) => v
                .trim()
                .parse::<NonZeroUsize>()
                .map(Self::new)
                .map_err(|_| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got `{v}`"))),
            Err(_) => Ok(Self::new(thread::available_parallelism().unwrap_or(NonZeroUsize::MIN))),
        }
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    fn map_chunks<T, F>(&self, rows: &[usize], work: F) -> CoreResult<Vec<T>>
    where
        T: Send,
        F: Fn(&[usize]) -> CoreResult<T> + Sync,
    {
        let chunks: Vec<&[usize]> = rows.chunks(GRAD_CHUNK).collect();
        let per_thread = chunks.len().div_ceil(self.threads).max(1);
        thread::scope(|s| {
            let handles: Vec<_> = chunks
                .chunks(per_thread)
                .map(|block| {
                    let work = &work;
                    s.spawn(move || block.iter().map(|c| work(c)).collect::<CoreResult<Vec<T>>>())
                })
                .collect();
            let mut out = Vec::with_capacity(chunks.len());
            for h in handles {
                out.extend(h.join().expect("worker thread panicked")?);
            }
            Ok(out)
        })
    }
}

impl Evaluator for Threaded {
    fn loss_and_grad(&self, model: &SurrogateModel, data: &Dataset, rows: &[usize], grad: &mut [f64]) -> CoreResult<f64> {
        if self.threads == 1 || rows.len() <= GRAD_CHUNK {
            return Serial.loss_and_grad(model, data, rows, grad);
        }
        let denom = rows.len() as f64;
        let len = grad.len();
        let partials = self.map_chunks(rows, |chunk| {
            let mut partial = vec![0.0; len];
            let sse = chunk_loss_grad(model, data, chunk, denom, &mut partial)?;
            Ok((sse, partial))
        })?;
        grad.fill(0.0);
        let mut sse = 0.0;
        for (s, partial) in partials {
            sse += s;
            for (g, p) in grad.iter_mut().zip(&partial) {
                *g += p;
            }
        }
        Ok(sse / denom)
    }

    fn loss(&self, model: &SurrogateModel, data: &Dataset, rows: &[usize]) -> CoreResult<f64> {
        if self.threads == 1 || rows.len() <= GRAD_CHUNK {
            return Serial.loss(model, data, rows);
        }
        let parts = self.map_chunks(rows, |chunk| chunk_sse(model, data, chunk))?;
        Ok(parts.iter().sum::<f64>() / rows.len() as f64)
    }
}
