use std::collections::VecDeque;

/// Past results of one backward-window body, newest last.
///
/// Bounded buffers keep exactly the last `capacity` results; unbounded ones
/// serve windows that reach back to the start of the run.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    values: VecDeque<bool>,
    capacity: Option<usize>,
    /// Step of the next value to be pushed.
    next_step: usize,
}

impl HistoryBuffer {
    pub fn new(capacity: Option<usize>) -> Self {
        HistoryBuffer {
            values: VecDeque::new(),
            capacity,
            next_step: 0,
        }
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn push(&mut self, value: bool) {
        if self.capacity == Some(0) {
            self.next_step += 1;
            return;
        }
        if Some(self.values.len()) == self.capacity {
            self.values.pop_front();
        }
        self.values.push_back(value);
        self.next_step += 1;
    }

    fn oldest_step(&self) -> usize {
        self.next_step - self.values.len()
    }

    /// Value recorded for `step`, if still held.
    pub fn get(&self, step: usize) -> Option<bool> {
        if step >= self.next_step || step < self.oldest_step() {
            return None;
        }
        self.values.get(step - self.oldest_step()).copied()
    }

    /// Number of true results over steps `from..to`.
    ///
    /// Panics if part of the range has already been evicted.
    pub fn trues(&self, from: usize, to: usize) -> u64 {
        assert!(
            from >= self.oldest_step() || from >= to,
            "history range {from}..{to} was evicted"
        );
        (from..to.min(self.next_step))
            .filter(|s| self.get(*s) == Some(true))
            .count() as u64
    }
}
