//! Resumable median-of-medians selection.
//!
//! A [`Selection`] rearranges a slice of item ids so that position `t` holds
//! the item of rank `t` (heaviest first), everything before it is heavier and
//! everything after it is lighter. The work is split into micro-steps of
//! constant cost so a caller can spread one selection over many stream
//! arrivals. The total number of micro-steps is linear in the slice length in
//! the worst case.
//!
//! The slice is passed in on every step rather than owned, so one buffer can
//! host many independent selections over disjoint ranges.

const GROUP: usize = 5;

#[derive(Clone, Copy, Debug)]
enum Stage {
    Start,
    Groups {
        next: usize,
        count: usize,
    },
    /// Waiting for the child frame that selects the median of medians.
    Pivot {
        groups: usize,
    },
    Partition {
        i: usize,
        store: usize,
    },
}

#[derive(Clone, Copy, Debug)]
struct Frame {
    lo: usize,
    hi: usize,
    target: usize,
    stage: Stage,
}

#[derive(Clone, Debug)]
pub struct Selection {
    stack: Vec<Frame>,
    steps: u64,
}

fn insertion_sort<F: Fn(u32, u32) -> bool>(items: &mut [u32], heavier: &F) {
    for i in 1..items.len() {
        let mut j = i;
        while j > 0 && heavier(items[j], items[j - 1]) {
            items.swap(j, j - 1);
            j -= 1;
        }
    }
}

impl Selection {
    /// Selects rank `target` within `items[lo..hi]`. A target outside the
    /// range yields a selection that is already done.
    pub fn new(lo: usize, hi: usize, target: usize) -> Self {
        let mut stack = Vec::new();
        if lo <= target && target < hi {
            stack.push(Frame {
                lo,
                hi,
                target,
                stage: Stage::Start,
            });
        }
        Selection { stack, steps: 0 }
    }

    pub fn is_done(&self) -> bool {
        self.stack.is_empty()
    }

    /// Micro-steps taken so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One micro-step. Returns `true` once the selection is complete.
    pub fn step<F: Fn(u32, u32) -> bool>(&mut self, items: &mut [u32], heavier: &F) -> bool {
        let Some(frame) = self.stack.last_mut() else {
            return true;
        };
        self.steps += 1;
        let Frame { lo, hi, target, .. } = *frame;
        match frame.stage {
            Stage::Start => {
                if hi - lo <= GROUP {
                    insertion_sort(&mut items[lo..hi], heavier);
                    self.stack.pop();
                } else {
                    frame.stage = Stage::Groups {
                        next: 0,
                        count: (hi - lo).div_ceil(GROUP),
                    };
                }
            }
            Stage::Groups { next, count } => {
                let start = lo + next * GROUP;
                let end = (start + GROUP).min(hi);
                insertion_sort(&mut items[start..end], heavier);
                items.swap(lo + next, start + (end - start - 1) / 2);
                if next + 1 < count {
                    frame.stage = Stage::Groups { next: next + 1, count };
                } else {
                    frame.stage = Stage::Pivot { groups: count };
                    self.stack.push(Frame {
                        lo,
                        hi: lo + count,
                        target: lo + (count - 1) / 2,
                        stage: Stage::Start,
                    });
                }
            }
            Stage::Pivot { groups } => {
                items.swap(lo + (groups - 1) / 2, hi - 1);
                frame.stage = Stage::Partition { i: lo, store: lo };
            }
            Stage::Partition { i, store } => {
                if i < hi - 1 {
                    let mut store = store;
                    if heavier(items[i], items[hi - 1]) {
                        items.swap(i, store);
                        store += 1;
                    }
                    frame.stage = Stage::Partition { i: i + 1, store };
                } else {
                    items.swap(store, hi - 1);
                    if target == store {
                        self.stack.pop();
                    } else {
                        let (lo, hi) = if target < store { (lo, store) } else { (store + 1, hi) };
                        *frame = Frame {
                            lo,
                            hi,
                            target,
                            stage: Stage::Start,
                        };
                    }
                }
            }
        }
        self.stack.is_empty()
    }

    /// Runs to completion; returns the number of micro-steps taken by this call.
    pub fn finish<F: Fn(u32, u32) -> bool>(&mut self, items: &mut [u32], heavier: &F) -> u64 {
        let before = self.steps;
        while !self.step(items, heavier) {}
        self.steps - before
    }
}

/// Non-resumable convenience: partitions `items` around rank `target`.
pub fn select_in_place<F: Fn(u32, u32) -> bool>(items: &mut [u32], target: usize, heavier: F) {
    Selection::new(0, items.len(), target).finish(items, &heavier);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn by_value(values: &[u64]) -> impl Fn(u32, u32) -> bool + '_ {
        move |a, b| (values[a as usize], a) > (values[b as usize], b)
    }

    fn check(values: &[u64], target: usize) -> u64 {
        let mut items: Vec<u32> = (0..values.len() as u32).collect();
        let heavier = by_value(values);
        let mut sel = Selection::new(0, items.len(), target);
        let steps = sel.finish(&mut items, &heavier);
        let mut sorted: Vec<u32> = (0..values.len() as u32).collect();
        sorted.sort_by(|&a, &b| (values[b as usize], b).cmp(&(values[a as usize], a)));
        assert_eq!(items[target], sorted[target]);
        assert!(items[..target].iter().all(|&x| heavier(x, items[target])));
        assert!(items[target + 1..].iter().all(|&x| heavier(items[target], x)));
        steps
    }

    #[test]
    fn small_and_edge_ranks() {
        check(&[4], 0);
        check(&[1, 2, 3], 2);
        check(&[5, 5, 5, 5, 5, 5, 5, 5], 3);
        let v: Vec<u64> = (0..100).collect();
        check(&v, 0);
        check(&v, 99);
        let rev: Vec<u64> = (0..100).rev().collect();
        check(&rev, 50);
    }

    #[test]
    fn out_of_range_target_is_done() {
        let sel = Selection::new(0, 3, 3);
        assert!(sel.is_done());
        let mut items = vec![0u32, 1, 2];
        let mut sel = sel;
        assert!(sel.step(&mut items, &|a, b| a > b));
        assert_eq!(sel.steps(), 0);
    }

    #[test]
    fn subrange_selection_leaves_rest_untouched() {
        let values: Vec<u64> = (0..30).map(|i| (i * 7919) % 31).collect();
        let mut items: Vec<u32> = (0..30).collect();
        let heavier = by_value(&values);
        Selection::new(10, 20, 14).finish(&mut items, &heavier);
        assert_eq!(&items[..10], &(0..10).collect::<Vec<u32>>()[..]);
        assert_eq!(&items[20..], &(20..30).collect::<Vec<u32>>()[..]);
        let mut window: Vec<u32> = (10..20).collect();
        window.sort_by(|&a, &b| (values[b as usize], b).cmp(&(values[a as usize], a)));
        assert_eq!(items[14], window[4]);
    }

    #[test]
    fn steps_are_linear_on_adversarial_orders() {
        for n in [1000usize, 10_000, 100_000] {
            for values in [
                (0..n as u64).collect::<Vec<_>>(),
                (0..n as u64).rev().collect(),
                (0..n as u64).map(|i| (i % 2) * n as u64 + i / 2).collect(),
            ] {
                for target in [0, n / 2, n - 1] {
                    let steps = check(&values, target);
                    assert!(steps <= 6 * n as u64, "n={n} steps={steps}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn selects_correct_rank(values in proptest::collection::vec(0u64..50, 1..300), t in 0usize..300) {
            let t = t % values.len();
            let steps = check(&values, t);
            prop_assert!(steps <= 6 * values.len() as u64 + 6);
        }
    }
}
