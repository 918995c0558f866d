//! Exact accumulation of `f64` sums and products with a single final rounding.
//!
//! A value is held as a fixed-point integer in units of `2^-BIAS`, stored as
//! signed base-2^32 digits with lazy carries. Every finite `f64`, and every
//! exact product of two of them, is representable, so sums never round until
//! [`ExactSum::value`] or [`ExactSum::value_div`] is called. Those return the
//! correctly rounded (nearest, ties to even) `f64`. Two mathematically equal
//! accumulations therefore round to the same bits regardless of grouping.

const BASE_BITS: u32 = 32;
const MASK: i64 = (1 << BASE_BITS) - 1;
/// Products of two subnormals reach `2^-2148`.
const BIAS: i32 = 2176;
/// Products of two large doubles reach `2^2048`.
const DIGITS: usize = 140;
const LOAD_LIMIT: u32 = 1 << 28;

#[derive(Debug, Clone)]
pub struct ExactSum {
    d: Vec<i64>,
    lo: usize,
    hi: usize,
    empty: bool,
    load: u32,
    /// Sum of any non-finite inputs; dominates the result when nonzero.
    special: f64,
}

impl Default for ExactSum {
    fn default() -> Self {
        Self::new()
    }
}

fn decompose(x: f64) -> (bool, u64, i32) {
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let eb = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if eb == 0 {
        (neg, frac, -1074)
    } else {
        (neg, frac | (1u64 << 52), eb - 1075)
    }
}

impl ExactSum {
    pub fn new() -> Self {
        Self {
            d: vec![0; DIGITS],
            lo: 0,
            hi: 0,
            empty: true,
            load: 0,
            special: 0.0,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        let mut s = Self::new();
        s.add(x);
        s
    }

    pub fn clear(&mut self) {
        if !self.empty {
            self.d[self.lo..=self.hi].iter_mut().for_each(|v| *v = 0);
        }
        self.empty = true;
        self.load = 0;
        self.special = 0.0;
    }

    fn touch(&mut self, lo: usize, hi: usize) {
        if self.empty {
            self.lo = lo;
            self.hi = hi;
            self.empty = false;
        } else {
            self.lo = self.lo.min(lo);
            self.hi = self.hi.max(hi);
        }
    }

    fn bump_load(&mut self, by: u32) {
        self.load += by;
        if self.load > LOAD_LIMIT {
            self.normalize();
        }
    }

    /// Adds `sign * m * 2^(pos - BIAS)`.
    fn add_u64_at(&mut self, neg: bool, m: u64, pos: usize) {
        if m == 0 {
            return;
        }
        let j = pos / BASE_BITS as usize;
        let s = pos % BASE_BITS as usize;
        let v = (m as u128) << s;
        let parts = [
            (v & MASK as u128) as i64,
            ((v >> 32) & MASK as u128) as i64,
            ((v >> 64) & MASK as u128) as i64,
        ];
        for (k, p) in parts.iter().enumerate() {
            if neg {
                self.d[j + k] -= p;
            } else {
                self.d[j + k] += p;
            }
        }
        self.touch(j, j + 2);
    }

    pub fn add(&mut self, x: f64) {
        if x == 0.0 {
            return;
        }
        if !x.is_finite() {
            self.special += x;
            return;
        }
        let (neg, m, e) = decompose(x);
        self.add_u64_at(neg, m, (e + BIAS) as usize);
        self.bump_load(1);
    }

    pub fn sub(&mut self, x: f64) {
        self.add(-x);
    }

    /// Adds the exact (unrounded) product `a * b`.
    pub fn add_product(&mut self, a: f64, b: f64) {
        if a == 0.0 || b == 0.0 {
            return;
        }
        if !a.is_finite() || !b.is_finite() {
            self.special += a * b;
            return;
        }
        let (na, ma, ea) = decompose(a);
        let (nb, mb, eb) = decompose(b);
        let m = ma as u128 * mb as u128;
        let pos = (ea + eb + BIAS) as usize;
        let neg = na != nb;
        self.add_u64_at(neg, m as u64, pos);
        self.add_u64_at(neg, (m >> 64) as u64, pos + 64);
        self.bump_load(2);
    }

    pub fn add_sum(&mut self, other: &ExactSum) {
        self.special += other.special;
        if other.empty {
            return;
        }
        for j in other.lo..=other.hi {
            self.d[j] += other.d[j];
        }
        self.touch(other.lo, other.hi);
        self.bump_load(other.load.max(1));
    }

    fn normalize(&mut self) {
        self.load = 1;
        if self.empty {
            return;
        }
        let mut carry = 0i64;
        for j in self.lo..self.hi {
            let c = self.d[j] + carry;
            self.d[j] = c & MASK;
            carry = c >> BASE_BITS;
        }
        let mut top = self.hi;
        self.d[top] += carry;
        while self.d[top] > MASK || self.d[top] < -MASK {
            let c = self.d[top];
            self.d[top] = c & MASK;
            self.d[top + 1] += c >> BASE_BITS;
            top += 1;
        }
        self.hi = top;
        while self.hi > self.lo && self.d[self.hi] == 0 {
            self.hi -= 1;
        }
        while self.lo < self.hi && self.d[self.lo] == 0 {
            self.lo += 1;
        }
        if self.lo == self.hi && self.d[self.lo] == 0 {
            self.empty = true;
        }
    }

    /// Correctly rounded value of the exact sum.
    pub fn value(&mut self) -> f64 {
        self.value_div(1)
    }

    /// Correctly rounded value of the exact sum divided by `n`.
    pub fn value_div(&mut self, n: u32) -> f64 {
        assert!(n > 0, "division by zero");
        if self.special != 0.0 || self.special.is_nan() {
            return self.special;
        }
        self.normalize();
        if self.empty {
            return 0.0;
        }
        let len = self.hi - self.lo + 1;
        let mut mag = [0i64; DIGITS];
        mag[..len].copy_from_slice(&self.d[self.lo..=self.hi]);
        let neg = mag[len - 1] < 0;
        if neg {
            let mut carry = 0i64;
            for v in mag[..len].iter_mut() {
                let c = -*v + carry;
                *v = c & MASK;
                carry = c >> BASE_BITS;
            }
            debug_assert_eq!(carry, 0);
        }
        let mut top = len;
        while top > 0 && mag[top - 1] == 0 {
            top -= 1;
        }
        if top == 0 {
            return 0.0;
        }
        let n = n as u64;
        let mut rem = 0u64;
        let mut q: u128 = 0;
        let mut taken = 0;
        // Absolute digit index of the last quotient digit consumed.
        let mut last_abs: i64 = 0;
        let mut j = top as i64 - 1;
        let bottom = -(self.lo as i64);
        while j >= bottom {
            let digit = if j >= 0 { mag[j as usize] as u64 } else { 0 };
            let cur = (rem << BASE_BITS) | digit;
            let qd = cur / n;
            rem = cur % n;
            last_abs = self.lo as i64 + j;
            if taken > 0 || qd != 0 {
                q = (q << BASE_BITS) | qd as u128;
                taken += 1;
                if taken == 3 {
                    break;
                }
            }
            j -= 1;
        }
        if taken == 0 {
            return if neg { -0.0 } else { 0.0 };
        }
        let below_nonzero = j > 0 && mag[..j as usize].iter().any(|&v| v != 0);
        let sticky = rem != 0 || below_nonzero;
        let e2 = (last_abs * BASE_BITS as i64) as i32 - BIAS;
        round_scaled(q, e2, sticky, neg)
    }
}

/// Rounds `q * 2^e2` (plus a positive amount below the last bit if `sticky`)
/// to the nearest `f64`, ties to even.
fn round_scaled(q: u128, e2: i32, sticky: bool, neg: bool) -> f64 {
    let sign = if neg { -1.0 } else { 1.0 };
    if q == 0 {
        return sign * 0.0;
    }
    let nbits = 128 - q.leading_zeros() as i32;
    let top = e2 + nbits - 1;
    let quantum = (top - 52).max(-1074);
    let shift = quantum - e2;
    let mut mant: u128 = if shift <= 0 {
        q << (-shift)
    } else if shift > nbits {
        0
    } else {
        let rem = if shift >= 128 { q } else { q & ((1u128 << shift) - 1) };
        let half = 1u128 << (shift - 1);
        let mut m = if shift >= 128 { 0 } else { q >> shift };
        if rem > half || (rem == half && (sticky || m & 1 == 1)) {
            m += 1;
        }
        m
    };
    let mut exp = quantum;
    if mant == 1u128 << 53 {
        mant >>= 1;
        exp += 1;
    }
    let bits = if mant < 1u128 << 52 {
        mant as u64
    } else {
        let biased = exp + 1075;
        if biased >= 2047 {
            return sign * f64::INFINITY;
        }
        ((biased as u64) << 52) | (mant as u64 & ((1u64 << 52) - 1))
    };
    sign * f64::from_bits(bits)
}

/// One exact accumulator per coordinate.
#[derive(Debug, Clone)]
pub struct ExactVec {
    pub coords: Vec<ExactSum>,
}

impl ExactVec {
    pub fn zeros(dim: usize) -> Self {
        Self { coords: (0..dim).map(|_| ExactSum::new()).collect() }
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self { coords: x.iter().map(|&v| ExactSum::from_f64(v)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn clear(&mut self) {
        self.coords.iter_mut().for_each(ExactSum::clear);
    }

    pub fn add(&mut self, x: &[f64]) {
        for (c, &v) in self.coords.iter_mut().zip(x) {
            c.add(v);
        }
    }

    /// Adds `a * x` exactly.
    pub fn add_scaled(&mut self, a: f64, x: &[f64]) {
        for (c, &v) in self.coords.iter_mut().zip(x) {
            c.add_product(a, v);
        }
    }

    pub fn add_vec(&mut self, other: &ExactVec) {
        for (c, o) in self.coords.iter_mut().zip(&other.coords) {
            c.add_sum(o);
        }
    }

    pub fn value_div(&mut self, n: u32) -> Vec<f64> {
        self.coords.iter_mut().map(|c| c.value_div(n)).collect()
    }

    pub fn value(&mut self) -> Vec<f64> {
        self.value_div(1)
    }
}
