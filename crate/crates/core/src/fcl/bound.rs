//! Resolution of symbolic `within` bounds against a concrete trace position.

use thiserror::Error;

use super::{Bound, Endcount};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("INF as a count requires an INF or MAX window, found {window}")]
    InfCountWithFiniteWindow { window: Bound },
    #[error("count bound {0} is negative")]
    NegativeCount(i64),
    #[error("scale factor {0} is outside (0, 1]")]
    BadFactor(f64),
    #[error("position {position} is outside a trace of length {len}")]
    OutOfRange { position: usize, len: usize },
}

/// Role of a bound in `within[n, t]`.
#[derive(Debug, Clone, Copy)]
pub enum BoundRole<'a> {
    /// Resolving `n`; the window is needed for `INF`.
    Count { window: &'a Bound },
    /// Resolving `t`; the resolved count is needed for clamping.
    Window { count: u64 },
}

/// Resolved `(n', t')` pair; `window` is negative for backward windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolved {
    pub count: u64,
    pub window: i64,
}

impl Resolved {
    pub fn width(&self) -> u64 {
        self.window.unsigned_abs()
    }

    /// `n' > |t'|` is false by definition.
    pub fn impossible(&self) -> bool {
        self.count > self.width()
    }
}

pub fn endcount_value(endcount: Endcount, position: usize, len: usize) -> i64 {
    match endcount {
        Endcount::Max => (len - 1 - position) as i64,
        Endcount::Beg => position as i64,
    }
}

fn scaled(factor: f64, endcount: Endcount, position: usize, len: usize) -> i64 {
    let base = endcount_value(endcount, position, len) as f64;
    (factor * base).floor().max(0.0) as i64
}

/// Static well-formedness of a bound pair, checked at load time.
pub fn check_pair(n: &Bound, t: &Bound) -> Result<(), BoundError> {
    match n {
        Bound::Inf if !matches!(t, Bound::Inf | Bound::Max) => {
            return Err(BoundError::InfCountWithFiniteWindow { window: *t })
        }
        Bound::Lit(k) if *k < 0 => return Err(BoundError::NegativeCount(*k)),
        _ => {}
    }
    for b in [n, t] {
        if let Bound::Scaled { factor, .. } = b {
            if !(*factor > 0.0 && *factor <= 1.0) {
                return Err(BoundError::BadFactor(*factor));
            }
        }
    }
    Ok(())
}

/// Resolves one bound at `position` of a trace with `len` snapshots.
pub fn resolve_bound(
    bound: &Bound,
    position: usize,
    len: usize,
    role: BoundRole<'_>,
) -> Result<i64, BoundError> {
    if position >= len {
        return Err(BoundError::OutOfRange { position, len });
    }
    let max = endcount_value(Endcount::Max, position, len);
    let beg = endcount_value(Endcount::Beg, position, len);
    match role {
        BoundRole::Count { window } => match bound {
            Bound::Lit(k) if *k < 0 => Err(BoundError::NegativeCount(*k)),
            Bound::Lit(k) => Ok(*k),
            Bound::Max => Ok(max),
            Bound::Beg => Ok(beg),
            Bound::Inf => match window {
                Bound::Inf | Bound::Max => Ok(max),
                other => Err(BoundError::InfCountWithFiniteWindow { window: *other }),
            },
            Bound::Scaled { factor, endcount } => Ok(scaled(*factor, *endcount, position, len)),
        },
        BoundRole::Window { count } => {
            let count = count as i64;
            Ok(match bound {
                Bound::Lit(k) if *k > max && count <= max => max,
                Bound::Lit(k) if *k < 0 && -*k > beg && count <= beg => -beg,
                Bound::Lit(k) => *k,
                Bound::Max | Bound::Inf => max,
                Bound::Beg => -beg,
                Bound::Scaled {
                    factor,
                    endcount: Endcount::Max,
                } => scaled(*factor, Endcount::Max, position, len),
                Bound::Scaled {
                    factor,
                    endcount: Endcount::Beg,
                } => -scaled(*factor, Endcount::Beg, position, len),
            })
        }
    }
}

pub fn resolve_pair(n: &Bound, t: &Bound, position: usize, len: usize) -> Result<Resolved, BoundError> {
    let count = resolve_bound(n, position, len, BoundRole::Count { window: t })?;
    let window = resolve_bound(t, position, len, BoundRole::Window { count: count as u64 })?;
    Ok(Resolved {
        count: count as u64,
        window,
    })
}

/// Final outcome of a `within` check over its (possibly cut) window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowOutcome {
    Satisfied,
    Violated,
    /// A bound component left the system before the window could decide.
    Cancelled,
}

/// Decides a forward window from the observations made inside it.
///
/// `cut` is set when observation stopped before the window was complete
/// because a bound component disappeared.
pub fn decide(resolved: Resolved, trues: u64, falses: u64, cut: bool) -> WindowOutcome {
    let n = resolved.count;
    let t = resolved.width();
    if n == 0 {
        WindowOutcome::Satisfied
    } else if n > t {
        WindowOutcome::Violated
    } else if trues >= n {
        WindowOutcome::Satisfied
    } else if falses > t - n {
        WindowOutcome::Violated
    } else if cut {
        WindowOutcome::Cancelled
    } else {
        WindowOutcome::Violated
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(t: Bound, n: u64, pos: usize, len: usize) -> i64 {
        resolve_bound(&t, pos, len, BoundRole::Window { count: n }).unwrap()
    }

    #[test]
    fn max_at_start_of_31_step_trace() {
        let v = resolve_bound(&Bound::Max, 0, 31, BoundRole::Count { window: &Bound::Max });
        assert_eq!(v, Ok(30));
    }

    #[test]
    fn scaled_max_table_matches_hand_floor() {
        // floor(0.8 * (L - 1)) computed by integer arithmetic: (8 * m) / 10
        let scaled = Bound::Scaled {
            factor: 0.8,
            endcount: Endcount::Max,
        };
        for len in 2..=40usize {
            let m = (len - 1) as i64;
            let expected = (8 * m) / 10;
            let got = resolve_bound(&scaled, 0, len, BoundRole::Count { window: &Bound::Max }).unwrap();
            assert_eq!(got, expected, "L = {len}");
        }
        assert_eq!(
            resolve_bound(&scaled, 0, 31, BoundRole::Count { window: &Bound::Max }),
            Ok(24)
        );
    }

    #[test]
    fn literal_window_clamps_to_max() {
        assert_eq!(window(Bound::Lit(15), 1, 20, 31), 10);
        // no clamping when n exceeds MAX
        assert_eq!(window(Bound::Lit(15), 11, 20, 31), 15);
        assert_eq!(window(Bound::Lit(5), 1, 20, 31), 5);
    }

    #[test]
    fn negative_window_clamps_to_beg() {
        assert_eq!(window(Bound::Lit(-10), 2, 4, 31), -4);
        assert_eq!(window(Bound::Lit(-10), 5, 4, 31), -10);
        assert_eq!(window(Bound::Lit(-10), 10, 15, 31), -10);
    }

    #[test]
    fn inf_resolves_to_max() {
        let r = resolve_pair(&Bound::Inf, &Bound::Inf, 3, 10).unwrap();
        assert_eq!(r, Resolved { count: 6, window: 6 });
        let r = resolve_pair(&Bound::Lit(1), &Bound::Inf, 3, 10).unwrap();
        assert_eq!(r.window, 6);
    }

    #[test]
    fn inf_count_needs_unbounded_window() {
        assert!(check_pair(&Bound::Inf, &Bound::Lit(5)).is_err());
        assert!(check_pair(&Bound::Inf, &Bound::Max).is_ok());
        assert!(resolve_pair(&Bound::Inf, &Bound::Lit(5), 0, 10).is_err());
    }

    #[test]
    fn decide_rules() {
        let r = Resolved { count: 3, window: 30 };
        assert_eq!(decide(r, 3, 0, false), WindowOutcome::Satisfied);
        assert_eq!(decide(r, 0, 28, false), WindowOutcome::Violated);
        assert_eq!(decide(r, 1, 2, true), WindowOutcome::Cancelled);
        assert_eq!(decide(Resolved { count: 1, window: 0 }, 0, 0, false), WindowOutcome::Violated);
        assert_eq!(decide(Resolved { count: 0, window: 0 }, 0, 0, false), WindowOutcome::Satisfied);
    }
}
