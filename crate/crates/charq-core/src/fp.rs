//! Arithmetic in the prime field F_p and small dense matrices over it.

/// Deterministic trial-division primality test; fine for the prime sizes in scope.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The field F_p. All element values are canonical representatives in 0..p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fp {
    pub p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Fp {
        debug_assert!(is_prime(p));
        Fp { p }
    }

    pub fn reduce(&self, a: i64) -> u64 {
        a.rem_euclid(self.p as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.p - a) % self.p
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1;
        a %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a % self.p != 0, "division by zero in F_{}", self.p);
        self.pow(a, self.p - 2)
    }
}

/// Square matrix over F_p, row-major, entries already reduced mod p.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FpMatrix {
    pub n: usize,
    pub entries: Vec<u64>,
}

impl FpMatrix {
    pub fn identity(n: usize) -> FpMatrix {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        FpMatrix { n, entries }
    }

    pub fn at(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.n + j]
    }

    pub fn mul(&self, rhs: &FpMatrix, f: Fp) -> FpMatrix {
        let n = self.n;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for l in 0..n {
                let a = self.entries[i * n + l];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] = (entries[i * n + j] + a * rhs.entries[l * n + j]) % f.p;
                }
            }
        }
        FpMatrix { n, entries }
    }

    /// Gauss-Jordan inverse; None for singular matrices.
    pub fn inverse(&self, f: Fp) -> Option<FpMatrix> {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut b = FpMatrix::identity(n).entries;
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r * n + col] != 0)?;
            a.swap_chunks(pivot, col, n);
            b.swap_chunks(pivot, col, n);
            let inv = f.inv(a[col * n + col]);
            for j in 0..n {
                a[col * n + j] = f.mul(a[col * n + j], inv);
                b[col * n + j] = f.mul(b[col * n + j], inv);
            }
            for r in 0..n {
                if r == col || a[r * n + col] == 0 {
                    continue;
                }
                let factor = a[r * n + col];
                for j in 0..n {
                    a[r * n + j] = f.sub(a[r * n + j], f.mul(factor, a[col * n + j]));
                    b[r * n + j] = f.sub(b[r * n + j], f.mul(factor, b[col * n + j]));
                }
            }
        }
        Some(FpMatrix { n, entries: b })
    }

    pub fn is_identity(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(idx, &v)| v == u64::from(idx / self.n == idx % self.n))
    }
}

trait SwapChunks {
    fn swap_chunks(&mut self, r1: usize, r2: usize, width: usize);
}

impl SwapChunks for Vec<u64> {
    fn swap_chunks(&mut self, r1: usize, r2: usize, width: usize) {
        if r1 == r2 {
            return;
        }
        for j in 0..width {
            self.swap(r1 * width + j, r2 * width + j);
        }
    }
}
