/// Bernoulli numbers `B_0 ..= B_20` with the `B_1 = -1/2` convention, i.e.
/// the coefficients of `x / (e^x - 1) = Σ B_n x^n / n!`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliTable {
    values: [f64; 21],
}

// (numerator, denominator) of B_0..B_20.
const RATIONALS: [(i64, i64); 21] = [
    (1, 1),
    (-1, 2),
    (1, 6),
    (0, 1),
    (-1, 30),
    (0, 1),
    (1, 42),
    (0, 1),
    (-1, 30),
    (0, 1),
    (5, 66),
    (0, 1),
    (-691, 2730),
    (0, 1),
    (7, 6),
    (0, 1),
    (-3617, 510),
    (0, 1),
    (43867, 798),
    (0, 1),
    (-174611, 330),
];

impl Default for BernoulliTable {
    fn default() -> Self {
        Self::new()
    }
}

impl BernoulliTable {
    pub const LEN: usize = 21;

    pub fn new() -> Self {
        let mut values = [0.0; 21];
        for (v, &(p, q)) in values.iter_mut().zip(RATIONALS.iter()) {
            *v = p as f64 / q as f64;
        }
        BernoulliTable { values }
    }

    /// `B_n`, or `None` past the end of the table.
    pub fn get(&self, n: usize) -> Option<f64> {
        self.values.get(n).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Largest residual of `Σ_{k=0}^{m} C(m+1, k) B_k = 0` over `m = 1..=20`,
    /// evaluated in exact rational arithmetic on the stored fractions.
    pub fn recurrence_residual() -> i128 {
        let mut worst = 0i128;
        for m in 1..Self::LEN {
            // common denominator: product of all denominators would overflow,
            // so accumulate as a reduced fraction.
            let (mut num, mut den) = (0i128, 1i128);
            for (k, &(p, q)) in RATIONALS.iter().enumerate().take(m + 1) {
                let c = binomial(m as u32 + 1, k as u32);
                let (tn, td) = (c * p as i128, q as i128);
                num = num * td + tn * den;
                den *= td;
                let g = gcd(num.abs(), den);
                if g > 1 {
                    num /= g;
                    den /= g;
                }
            }
            worst = worst.max(num.abs());
        }
        worst
    }
}

fn binomial(n: u32, k: u32) -> i128 {
    let mut r = 1i128;
    for i in 0..k {
        r = r * (n - i) as i128 / (i + 1) as i128;
    }
    r
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}
