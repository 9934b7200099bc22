//! Fixed-size subsets of `{0, .., n-1}` as `u64` bitmasks.

/// Iterates every `k`-subset of `n` elements in increasing mask order
/// (Gosper's hack). Requires `n <= 63`.
#[derive(Debug, Clone)]
pub struct SubsetsOfSize {
    current: u64,
    limit: u64,
    done: bool,
}

impl SubsetsOfSize {
    pub fn new(n: usize, k: usize) -> Self {
        assert!(n <= 63, "subset enumeration supports at most 63 elements");
        if k > n {
            return Self {
                current: 0,
                limit: 0,
                done: true,
            };
        }
        Self {
            current: if k == 0 { 0 } else { (1u64 << k) - 1 },
            limit: 1u64 << n,
            done: false,
        }
    }
}

impl Iterator for SubsetsOfSize {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.done {
            return None;
        }
        let out = self.current;
        if out == 0 {
            // the empty set is the only 0-subset
            self.done = true;
            return Some(out);
        }
        let c = out & out.wrapping_neg();
        let r = out + c;
        self.current = (((r ^ out) >> 2) / c) | r;
        if self.current >= self.limit {
            self.done = true;
        }
        Some(out)
    }
}

/// Indices of the set bits of `mask`, ascending.
pub fn members(mask: u64) -> impl Iterator<Item = usize> {
    let mut rest = mask;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        }
    })
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}
