use std::collections::VecDeque;

use super::ControlInput;
use crate::{Error, Result};

/// Ring of the most recent control inputs, used to apply `u(k − n)`.
#[derive(Debug, Clone)]
pub struct InputBuffer {
    history: VecDeque<ControlInput>,
    depth: usize,
}

impl InputBuffer {
    /// Buffer able to answer lags `0..=depth`.
    pub fn new(depth: usize) -> Self {
        Self {
            history: VecDeque::with_capacity(depth + 1),
            depth,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of inputs currently retained (at most `depth + 1`).
    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn push(&mut self, u: ControlInput) {
        if self.history.len() == self.depth + 1 {
            self.history.pop_front();
        }
        self.history.push_back(u);
    }

    /// The input recorded `lag` pushes ago; lag 0 is the latest.
    pub fn delayed(&self, lag: usize) -> Result<ControlInput> {
        if lag > self.depth {
            return Err(Error::LagBeyondDepth { lag, depth: self.depth });
        }
        let recorded = self.history.len();
        if lag >= recorded {
            return Err(Error::BufferUnderflow { lag, recorded });
        }
        Ok(self.history[recorded - 1 - lag])
    }
}
