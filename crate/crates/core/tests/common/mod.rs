//! Test-only reference implementations.
//!
//! `Dd` is double-double arithmetic (~32 significant digits), used as an
//! extended-precision oracle that shares no code with the library.

#![allow(dead_code)]

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact value of the decimal `num / den`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Dd::from_f64(num as f64) / Dd::from_f64(den as f64)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        // one Newton step on the f64 estimate doubles the precision
        let x = Dd::from_f64(self.hi.sqrt());
        (x + self / x) * Dd::from_f64(0.5)
    }

    pub fn powi(self, n: u32) -> Self {
        let mut result = Dd::ONE;
        let mut base = self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            e >>= 1;
        }
        result
    }

    /// Positive real `n`-th root by Newton iteration.
    pub fn root(self, n: u32) -> Self {
        let mut x = Dd::from_f64(self.to_f64().powf(1.0 / n as f64));
        let nd = Dd::from_f64(n as f64);
        for _ in 0..4 {
            // x ← x − (xⁿ − a)/(n xⁿ⁻¹)
            let xn1 = x.powi(n - 1);
            x = x - (xn1 * x - self) / (nd * xn1);
        }
        x
    }

    /// `self^(-p/q)` for a positive base.
    pub fn pow_neg_ratio(self, p: u32, q: u32) -> Self {
        Dd::ONE / self.powi(p).root(q)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from_f64(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

/// Complex double-double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };

    pub fn from_c64(z: Complex64) -> Self {
        Cdd {
            re: Dd::from_f64(z.re),
            im: Dd::from_f64(z.im),
        }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(self) -> Self {
        Cdd {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }

    pub fn scale(self, s: Dd) -> Self {
        Cdd {
            re: self.re * s,
            im: self.im * s,
        }
    }
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

/// Minimum-norm solution of a 2×L system through the normal equations,
/// with the 2×2 Hermitian Gram matrix inverted explicitly in double-double.
pub fn normal_equations_oracle(rows: [&[Complex64]; 2], b: [Complex64; 2]) -> Vec<Complex64> {
    let a: [Vec<Cdd>; 2] = rows.map(|r| r.iter().copied().map(Cdd::from_c64).collect());
    let gram = |i: usize, j: usize| {
        a[i].iter()
            .zip(&a[j])
            .fold(Cdd::ZERO, |acc, (x, y)| acc + *x * y.conj())
    };
    let (g00, g01, g11) = (gram(0, 0).re, gram(0, 1), gram(1, 1).re);
    let det = g00 * g11 - g01.norm_sqr();
    let inv_det = Dd::ONE / det;
    let (b0, b1) = (Cdd::from_c64(b[0]), Cdd::from_c64(b[1]));
    let y0 = (b0.scale(g11) - g01 * b1).scale(inv_det);
    let y1 = (b1.scale(g00) - g01.conj() * b0).scale(inv_det);
    (0..a[0].len())
        .map(|l| (a[0][l].conj() * y0 + a[1][l].conj() * y1).to_c64())
        .collect()
}

/// Exponential integral E1(x) for x > 0.
pub fn exp_integral_e1(x: f64) -> f64 {
    if x <= 1.0 {
        // power series: −γ − ln x − Σ (−x)ᵏ/(k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        -0.577_215_664_901_532_9 - x.ln() - sum
    } else {
        // modified Lentz continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// `E[log2(1 + a X)]` for `X ~ Exp(1)`.
pub fn mean_log2_rate_exponential(a: f64) -> f64 {
    (1.0 / a).exp() * exp_integral_e1(1.0 / a) / std::f64::consts::LN_2
}
