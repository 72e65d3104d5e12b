use rand::seq::SliceRandom;
use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use super::engine::Space;

/// `n!`, or `None` on overflow.
pub fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

/// The permutation of `0..n` with lexicographic rank `rank` (factorial number system).
pub fn unrank_permutation(n: usize, mut rank: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f = factorial(i).expect("rank fits u64");
        let idx = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(idx));
    }
    out
}

/// Advances `perm` to its lexicographic successor. At the last permutation it wraps to
/// the identity and returns `false`.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        perm.reverse();
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// A point of `S_nᵏ × ({±1}ⁿ)ʲ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct PermSignPoint {
    /// `k` permutations, concatenated.
    pub perms: Vec<usize>,
    /// `j` sign vectors as bitmasks; bit `i` set means `−1` at coordinate `i`.
    pub signs: Vec<u64>,
}

impl PermSignPoint {
    pub fn perm(&self, which: usize, n: usize) -> &[usize] {
        &self.perms[which * n..(which + 1) * n]
    }
}

/// `S_nᵏ × ({±1}ⁿ)ʲ` in lexicographic order, earlier factors more significant and sign
/// vectors after the permutations.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PermSignSpace {
    pub n: usize,
    pub perms: usize,
    pub signs: usize,
}

impl PermSignSpace {
    pub fn perms(n: usize, perms: usize) -> Self {
        Self { n, perms, signs: 0 }
    }
}

impl Space for PermSignSpace {
    type Point = PermSignPoint;

    fn count(&self) -> Option<u64> {
        let f = factorial(self.n)?;
        let mut c = 1u64;
        for _ in 0..self.perms {
            c = c.checked_mul(f)?;
        }
        for _ in 0..self.signs {
            c = c.checked_mul(1u64.checked_shl(self.n as u32)?)?;
        }
        Some(c)
    }

    fn point_at(&self, mut index: u64) -> PermSignPoint {
        let n = self.n;
        let mut signs = vec![0u64; self.signs];
        for s in signs.iter_mut().rev() {
            *s = index & ((1u64 << n) - 1);
            index >>= n;
        }
        let f = factorial(n).expect("count fits u64");
        let mut ranks = vec![0u64; self.perms];
        for r in ranks.iter_mut().rev() {
            *r = index % f;
            index /= f;
        }
        let perms = ranks.iter().flat_map(|&r| unrank_permutation(n, r)).collect();
        PermSignPoint { perms, signs }
    }

    fn advance(&self, point: &mut PermSignPoint) {
        let n = self.n;
        let full = (1u64 << n) - 1;
        for s in point.signs.iter_mut().rev() {
            if *s < full {
                *s += 1;
                return;
            }
            *s = 0;
        }
        for w in (0..self.perms).rev() {
            if next_permutation(&mut point.perms[w * n..(w + 1) * n]) {
                return;
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> PermSignPoint {
        let mut point = PermSignPoint {
            perms: (0..self.perms).flat_map(|_| 0..self.n).collect(),
            signs: vec![0; self.signs],
        };
        self.resample(rng, &mut point);
        point
    }

    fn resample(&self, rng: &mut ChaCha8Rng, point: &mut PermSignPoint) {
        let n = self.n;
        for w in 0..self.perms {
            point.perms[w * n..(w + 1) * n].shuffle(rng);
        }
        let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        for s in point.signs.iter_mut() {
            *s = rng.next_u64() & mask;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), Some(1));
        assert_eq!(factorial(5), Some(120));
        assert_eq!(factorial(20), Some(2_432_902_008_176_640_000));
        assert_eq!(factorial(21), None);
    }

    #[test]
    fn unrank_agrees_with_successor() {
        for n in 0..=6 {
            let total = factorial(n).unwrap();
            let mut p: Vec<usize> = (0..n).collect();
            for r in 0..total {
                assert_eq!(unrank_permutation(n, r), p);
                let more = next_permutation(&mut p);
                assert_eq!(more, r + 1 < total);
            }
            assert_eq!(p, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn space_walk_matches_point_at() {
        let space = PermSignSpace {
            n: 3,
            perms: 2,
            signs: 1,
        };
        let total = space.count().unwrap();
        assert_eq!(total, 36 * 8);
        let mut p = space.point_at(0);
        for i in 0..total {
            assert_eq!(p, space.point_at(i), "index {i}");
            space.advance(&mut p);
        }
    }
}
