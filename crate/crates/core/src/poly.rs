//! Small dense polynomials in the monomial basis.
//!
//! Coefficients are always expressed in the native coordinates of the
//! domain (not normalized cell coordinates), which is how boundary pieces
//! and blend tables are usually written down.

use serde::{Deserialize, Serialize};

/// Univariate polynomial, `coeffs[k]` multiplies `t^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly1 {
    pub coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// Line through `(t0, v0)` and `(t1, v1)`.
    pub fn line_through(t0: f64, v0: f64, t1: f64, v1: f64) -> Self {
        let slope = (v1 - v0) / (t1 - t0);
        Self::new(vec![v0 - slope * t0, slope])
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Poly1 {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Poly1::new(coeffs)
    }

    /// Upper bound of `|p|` on `[lo, hi]` from the coefficient magnitudes.
    pub fn abs_bound(&self, lo: f64, hi: f64) -> f64 {
        let m = lo.abs().max(hi.abs());
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * m.powi(k as i32))
            .sum()
    }
}

/// Bivariate polynomial, `coeffs[a][b]` multiplies `x^a y^b`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly2 {
    coeffs: Vec<Vec<f64>>,
}

impl Poly2 {
    /// Builds from `(x power, y power, coefficient)` triples; repeated
    /// monomials accumulate.
    pub fn from_terms(terms: &[(u32, u32, f64)]) -> Self {
        let mut p = Poly2::default();
        for &(a, b, c) in terms {
            p.add_term(a as usize, b as usize, c);
        }
        p
    }

    pub fn add_term(&mut self, a: usize, b: usize, c: f64) {
        if self.coeffs.len() <= a {
            self.coeffs.resize(a + 1, Vec::new());
        }
        let row = &mut self.coeffs[a];
        if row.len() <= b {
            row.resize(b + 1, 0.0);
        }
        row[b] += c;
    }

    /// Nonzero terms as `(x power, y power, coefficient)`.
    pub fn terms(&self) -> Vec<(u32, u32, f64)> {
        let mut out = Vec::new();
        for (a, row) in self.coeffs.iter().enumerate() {
            for (b, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    out.push((a as u32, b as u32, c));
                }
            }
        }
        out
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, row| {
            acc * x + row.iter().rev().fold(0.0, |r, &c| r * y + c)
        })
    }

    /// Restriction to the vertical line `x = x0`, as a polynomial in `y`.
    pub fn restrict_x(&self, x0: f64) -> Poly1 {
        let width = self.coeffs.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = vec![0.0; width];
        for (a, row) in self.coeffs.iter().enumerate() {
            let xa = x0.powi(a as i32);
            for (b, &c) in row.iter().enumerate() {
                out[b] += c * xa;
            }
        }
        Poly1::new(out)
    }

    /// Restriction to the horizontal line `y = y0`, as a polynomial in `x`.
    pub fn restrict_y(&self, y0: f64) -> Poly1 {
        let out = self
            .coeffs
            .iter()
            .map(|row| row.iter().rev().fold(0.0, |r, &c| r * y0 + c))
            .collect();
        Poly1::new(out)
    }

    pub fn partial_x(&self) -> Poly2 {
        let mut p = Poly2::default();
        for (a, b, c) in self.terms() {
            if a > 0 {
                p.add_term(a as usize - 1, b as usize, c * a as f64);
            }
        }
        p
    }

    pub fn partial_y(&self) -> Poly2 {
        let mut p = Poly2::default();
        for (a, b, c) in self.terms() {
            if b > 0 {
                p.add_term(a as usize, b as usize - 1, c * b as f64);
            }
        }
        p
    }

    /// Upper bound of `|p|` on the box `[x0,x1]×[y0,y1]`.
    pub fn abs_bound(&self, x: (f64, f64), y: (f64, f64)) -> f64 {
        let mx = x.0.abs().max(x.1.abs());
        let my = y.0.abs().max(y.1.abs());
        self.terms()
            .into_iter()
            .map(|(a, b, c)| c.abs() * mx.powi(a as i32) * my.powi(b as i32))
            .sum()
    }

    /// Taxicab Lipschitz bound on a box: `max(sup|∂x p|, sup|∂y p|)`.
    pub fn lipschitz_bound(&self, x: (f64, f64), y: (f64, f64)) -> f64 {
        self.partial_x()
            .abs_bound(x, y)
            .max(self.partial_y().abs_bound(x, y))
    }
}

impl Serialize for Poly2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.terms().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let terms = Vec::<(u32, u32, f64)>::deserialize(d)?;
        Ok(Poly2::from_terms(&terms))
    }
}

impl Poly1 {
    /// Parses text such as `-4.5y^2-5.4y+4.9` in the variable `var`.
    pub fn parse(text: &str, var: char) -> Result<Self, String> {
        let mut p = Poly1::new(Vec::new());
        for (powers, c) in parse_monomials(text, &[var])? {
            let k = powers[0] as usize;
            if p.coeffs.len() <= k {
                p.coeffs.resize(k + 1, 0.0);
            }
            p.coeffs[k] += c;
        }
        Ok(p)
    }
}

impl Poly2 {
    /// Parses text such as `18y^2+4.8x^2y-54xy^2+0.3` in `x` and `y`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut p = Poly2::default();
        for (powers, c) in parse_monomials(text, &['x', 'y'])? {
            p.add_term(powers[0] as usize, powers[1] as usize, c);
        }
        Ok(p)
    }
}

/// Splits a sum of monomials `c·v1^k1·v2^k2…` written without `*` (a
/// coefficient may precede the variables, `^k` may follow each one).
fn parse_monomials(text: &str, vars: &[char]) -> Result<Vec<(Vec<u32>, f64)>, String> {
    let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Err("empty polynomial".into());
    }
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let mut sign = 1.0;
        if chars[k] == '+' || chars[k] == '-' {
            if chars[k] == '-' {
                sign = -1.0;
            }
            k += 1;
        } else if k > 0 {
            return Err(format!("expected `+` or `-` at offset {k} in `{text}`"));
        }
        let start = k;
        while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
            k += 1;
        }
        let coeff = if k > start {
            let s: String = chars[start..k].iter().collect();
            s.parse::<f64>()
                .map_err(|_| format!("bad coefficient `{s}` in `{text}`"))?
        } else {
            1.0
        };
        let mut powers = vec![0u32; vars.len()];
        let mut any = k > start;
        while k < chars.len() && chars[k] != '+' && chars[k] != '-' {
            let slot = vars
                .iter()
                .position(|&v| v == chars[k])
                .ok_or_else(|| format!("unexpected `{}` in `{text}`", chars[k]))?;
            k += 1;
            let mut power = 1;
            if k < chars.len() && chars[k] == '^' {
                k += 1;
                let ps = k;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                let s: String = chars[ps..k].iter().collect();
                power = s
                    .parse::<u32>()
                    .map_err(|_| format!("bad exponent after `^` in `{text}`"))?;
            }
            powers[slot] += power;
            any = true;
        }
        if !any {
            return Err(format!("empty term in `{text}`"));
        }
        out.push((powers, sign * coeff));
    }
    Ok(out)
}
