//! Word-sized prime moduli.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Modulus {
    p: u64,
    /// Barrett constant `floor(2^128 / p)`.
    mu: u128,
}

/// High 128 bits of a 128x128-bit product.
#[inline]
fn mul_hi(x: u128, y: u128) -> u128 {
    let (x0, x1) = (x as u64 as u128, x >> 64);
    let (y0, y1) = (y as u64 as u128, y >> 64);
    let lo = x0 * y0;
    let m1 = x1 * y0;
    let m2 = x0 * y1;
    let carry = ((lo >> 64) + (m1 as u64 as u128) + (m2 as u64 as u128)) >> 64;
    x1 * y1 + (m1 >> 64) + (m2 >> 64) + carry
}

impl Modulus {
    pub fn new(p: u64) -> Self {
        assert!(p > 1 && p < (1 << 62), "modulus must be below 2^62");
        Self { p, mu: u128::MAX / p as u128 }
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.p
    }

    #[inline]
    pub fn reduce_u128(&self, x: u128) -> u64 {
        self.div_rem_u128(x).1
    }

    /// Quotient and remainder of `x` by `p`.
    #[inline]
    pub fn div_rem_u128(&self, x: u128) -> (u128, u64) {
        let mut q = mul_hi(x, self.mu);
        let mut r = x.wrapping_sub(q.wrapping_mul(self.p as u128)) as u64;
        while r >= self.p {
            r -= self.p;
            q += 1;
        }
        (q, r)
    }

    /// Reduces a signed value into `[0, p)`.
    #[inline]
    pub fn reduce_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce_u128(a as u128 * b as u128)
    }

    /// Precomputed `floor(w * 2^64 / p)` for Shoup multiplication by `w`.
    #[inline]
    pub fn shoup(&self, w: u64) -> u64 {
        (((w as u128) << 64) / self.p as u128) as u64
    }

    /// `a * w mod p` given `ws = shoup(w)`.
    #[inline]
    pub fn mul_shoup(&self, a: u64, w: u64, ws: u64) -> u64 {
        let q = ((a as u128 * ws as u128) >> 64) as u64;
        let r = a.wrapping_mul(w).wrapping_sub(q.wrapping_mul(self.p));
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse by Fermat; `p` must be prime.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a % self.p != 0, "zero has no inverse");
        self.pow(a, self.p - 2)
    }

    /// Centered representative in `(-p/2, p/2]`.
    #[inline]
    pub fn center(&self, a: u64) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| (a as u128 * b as u128 % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        acc
    };
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest primitive `order`-th root of unity mod prime `p`, where
/// `order` is a power of two dividing `p - 1`.
pub fn primitive_root_of_unity(p: u64, order: u64) -> Option<u64> {
    if (p - 1) % order != 0 {
        return None;
    }
    let m = Modulus::new(p);
    let cofactor = (p - 1) / order;
    (2..p.min(1 << 20)).map(|g| m.pow(g, cofactor)).find(|&r| m.pow(r, order / 2) == p - 1)
}
