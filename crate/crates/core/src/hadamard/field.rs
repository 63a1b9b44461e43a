//! Finite fields GF(pᵐ) for the quadratic-residue constructions.
//!
//! Elements are encoded as integers `0..q` whose base-`p` digits are the
//! polynomial coefficients (lowest degree first). Multiplication reduces
//! modulo a monic irreducible polynomial found by exhaustive search, which
//! is cheap for the field sizes used here (q < 300).

/// `(p, m)` with `q = pᵐ`, or `None` if `q` is not a prime power.
pub fn prime_power(q: usize) -> Option<(usize, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

#[derive(Clone, Debug)]
pub struct FiniteField {
    p: usize,
    m: u32,
    q: usize,
    mul_table: Vec<usize>,
}

impl FiniteField {
    /// Builds GF(q). Returns `None` if `q` is not a prime power.
    pub fn new(q: usize) -> Option<Self> {
        let (p, m) = prime_power(q)?;
        let modulus = if m == 1 {
            vec![0, 1]
        } else {
            find_irreducible(p, m as usize)
        };
        let mut mul_table = vec![0; q * q];
        for a in 0..q {
            for b in a..q {
                let v = poly_mul_mod(a, b, p, m as usize, &modulus);
                mul_table[a * q + b] = v;
                mul_table[b * q + a] = v;
            }
        }
        Some(Self { p, m, q, mul_table })
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.digitwise(a, b, |x, y| (x + y) % self.p)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.digitwise(a, b, |x, y| (x + self.p - y) % self.p)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul_table[a * self.q + b]
    }

    fn digitwise(&self, mut a: usize, mut b: usize, f: impl Fn(usize, usize) -> usize) -> usize {
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.m {
            out += f(a % self.p, b % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    /// Quadratic character: 0 at zero, +1 on non-zero squares, -1 otherwise.
    pub fn quadratic_character(&self) -> Vec<i8> {
        let mut chi = vec![-1i8; self.q];
        chi[0] = 0;
        for x in 1..self.q {
            chi[self.mul(x, x)] = 1;
        }
        chi
    }
}

fn digits(mut v: usize, p: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut() {
        *slot = v % p;
        v /= p;
    }
    d
}

/// Product of two degree-`< m` polynomials modulo the monic `modulus`
/// (given by its low `m` coefficients; the leading 1 is implicit).
fn poly_mul_mod(a: usize, b: usize, p: usize, m: usize, modulus: &[usize]) -> usize {
    let da = digits(a, p, m);
    let db = digits(b, p, m);
    let mut prod = vec![0usize; 2 * m];
    for (i, &x) in da.iter().enumerate() {
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // x^m ≡ -Σ modulus[i] x^i
    for deg in (m..2 * m).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for (i, &mi) in modulus.iter().enumerate() {
            let idx = deg - m + i;
            prod[idx] = (prod[idx] + c * (p - mi)) % p;
        }
    }
    prod[..m].iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Smallest monic irreducible polynomial of degree `m` over GF(p), as its
/// low `m` coefficients. Irreducibility is checked by the absence of roots
/// of any factor: a polynomial is reducible iff it has a monic factor of
/// degree `1 ..= m/2`, which we test by trial division.
fn find_irreducible(p: usize, m: usize) -> Vec<usize> {
    let total = p.pow(m as u32);
    (0..total)
        .map(|code| digits(code, p, m))
        .find(|low| {
            let mut f = low.clone();
            f.push(1);
            (1..=m / 2).all(|d| !has_monic_factor_of_degree(&f, d, p))
        })
        .expect("an irreducible polynomial exists for every degree")
}

fn has_monic_factor_of_degree(f: &[usize], d: usize, p: usize) -> bool {
    (0..p.pow(d as u32)).any(|code| {
        let mut g = digits(code, p, d);
        g.push(1);
        poly_rem(f, &g, p).iter().all(|&c| c == 0)
    })
}

fn poly_rem(f: &[usize], g: &[usize], p: usize) -> Vec<usize> {
    let mut r = f.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dg;
        if lead != 0 {
            for (i, &gi) in g.iter().enumerate() {
                r[shift + i] = (r[shift + i] + (p - lead) * gi) % p;
            }
        }
        r.pop();
    }
    r
}
