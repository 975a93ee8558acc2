//! Exact integer polynomials in `b` (standing for β) and in `x_1, x_2, ...` with
//! β-polynomial coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Polynomial in β with exact integer coefficients, lowest power first.
/// Trailing zero coefficients are never stored, so the zero polynomial is empty.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BetaPolynomial {
    coeffs: Vec<BigInt>,
}

impl BetaPolynomial {
    pub fn zero() -> Self {
        BetaPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: i64) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c * β^k`.
    pub fn monomial(c: impl Into<BigInt>, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c.into();
        Self::normalized(coeffs)
    }

    pub fn from_coeffs(coeffs: Vec<i64>) -> Self {
        Self::normalized(coeffs.into_iter().map(BigInt::from).collect())
    }

    pub fn from_big_coeffs(coeffs: Vec<BigInt>) -> Self {
        Self::normalized(coeffs)
    }

    fn normalized(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        BetaPolynomial { coeffs }
    }

    /// `β^a (1 + β)^b`.
    pub fn weight(blank_excess: usize, jelbows: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); blank_excess];
        coeffs.extend(binomial_row(jelbows));
        Self::normalized(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficients as `i64`, or `None` if one does not fit.
    pub fn coeffs_i64(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeff(0)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// All coefficients `>= 0`.
    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn evaluate(&self, beta: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * beta + c)
    }

    pub fn evaluate_i64(&self, beta: i64) -> BigInt {
        self.evaluate(&BigInt::from(beta))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::normalized(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Exact division by `β^k`, `None` if some lower coefficient is nonzero.
    pub fn divide_by_beta_power(&self, k: usize) -> Option<Self> {
        if self.coeffs.iter().take(k).any(|c| !c.is_zero()) {
            return None;
        }
        Some(Self::normalized(self.coeffs.iter().skip(k).cloned().collect()))
    }

    /// Number of nonzero coefficients.
    pub fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }
}

/// Row `k` of Pascal's triangle.
fn binomial_row(k: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for _ in 0..k {
        let mut next = vec![BigInt::one(); row.len() + 1];
        for i in 1..row.len() {
            next[i] = &row[i - 1] + &row[i];
        }
        row = next;
    }
    row
}

impl Add for &BetaPolynomial {
    type Output = BetaPolynomial;

    fn add(self, rhs: &BetaPolynomial) -> BetaPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        BetaPolynomial::normalized(coeffs)
    }
}

impl Sub for &BetaPolynomial {
    type Output = BetaPolynomial;

    fn sub(self, rhs: &BetaPolynomial) -> BetaPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        BetaPolynomial::normalized(coeffs)
    }
}

impl Mul for &BetaPolynomial {
    type Output = BetaPolynomial;

    fn mul(self, rhs: &BetaPolynomial) -> BetaPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return BetaPolynomial::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        BetaPolynomial::normalized(coeffs)
    }
}

impl Neg for &BetaPolynomial {
    type Output = BetaPolynomial;

    fn neg(self) -> BetaPolynomial {
        BetaPolynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for BetaPolynomial {
            type Output = BetaPolynomial;
            fn $method(self, rhs: BetaPolynomial) -> BetaPolynomial {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl AddAssign<&BetaPolynomial> for BetaPolynomial {
    fn add_assign(&mut self, rhs: &BetaPolynomial) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&BetaPolynomial> for BetaPolynomial {
    fn sub_assign(&mut self, rhs: &BetaPolynomial) {
        *self = &*self - rhs;
    }
}

impl std::iter::Sum for BetaPolynomial {
    fn sum<I: Iterator<Item = BetaPolynomial>>(iter: I) -> Self {
        iter.fold(BetaPolynomial::zero(), |acc, p| &acc + &p)
    }
}

/// Text form with descending powers, e.g. `b^2+3b+3`.
impl fmt::Display for BetaPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            if negative {
                f.write_str("-")?;
            } else if !first {
                f.write_str("+")?;
            }
            let magnitude = c.abs();
            if k == 0 || !magnitude.is_one() {
                write!(f, "{magnitude}")?;
            }
            match k {
                0 => {}
                1 => f.write_str("b")?,
                _ => write!(f, "b^{k}")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for BetaPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BetaPolynomial({self})")
    }
}

/// Exponent vector of `x_1, ..., x_k`.
pub type Exponents = Vec<u32>;

/// Polynomial in `x_1, ..., x_k` whose coefficients are β-polynomials.
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct MultivariatePolynomial {
    vars: usize,
    terms: BTreeMap<Exponents, BetaPolynomial>,
}

impl MultivariatePolynomial {
    pub fn zero(vars: usize) -> Self {
        MultivariatePolynomial {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: BetaPolynomial) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    /// `x_i`, 1-based.
    pub fn variable(vars: usize, i: usize) -> Self {
        let mut e = vec![0; vars];
        e[i - 1] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, BetaPolynomial::one());
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BetaPolynomial)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exponents: &[u32]) -> BetaPolynomial {
        self.terms.get(exponents).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exponents: Exponents, c: BetaPolynomial) {
        assert_eq!(exponents.len(), self.vars, "exponent vector length");
        let slot = self.terms.entry(exponents).or_default();
        *slot += &c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn mul(&self, rhs: &MultivariatePolynomial) -> MultivariatePolynomial {
        assert_eq!(self.vars, rhs.vars);
        let mut out = Self::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn add(&self, rhs: &MultivariatePolynomial) -> MultivariatePolynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn map_coeffs(
        &self,
        mut f: impl FnMut(&BetaPolynomial) -> Option<BetaPolynomial>,
    ) -> Option<MultivariatePolynomial> {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c)?);
        }
        Some(out)
    }

    /// Substitutes `x_i := 1` for every variable.
    pub fn at_all_ones(&self) -> BetaPolynomial {
        self.terms.values().cloned().sum()
    }

    /// Substitutes `β := 0`.
    pub fn at_beta_zero(&self) -> MultivariatePolynomial {
        self.map_coeffs(|c| Some(BetaPolynomial::from_big_coeffs(vec![c.constant_term()])))
            .expect("constant terms always exist")
    }

    pub fn has_nonnegative_coeffs(&self) -> bool {
        self.terms.values().all(BetaPolynomial::is_nonnegative)
    }

    /// Terms in graded lexicographic order: total degree ascending, then the
    /// exponent vector lexicographically descending (`x1` before `x2`).
    pub fn graded_terms(&self) -> Vec<(&Exponents, &BetaPolynomial)> {
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        terms
    }
}

/// Text form like `x1+x2+b*x1*x2`.
impl fmt::Display for MultivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (e, c)) in self.graded_terms().into_iter().enumerate() {
            let mut factors: Vec<String> = Vec::new();
            let mut negative = false;
            if c.term_count() == 1 {
                let k = c.degree().expect("nonzero coefficient");
                let lead = c.coeff(k);
                negative = lead.is_negative();
                let magnitude = lead.abs();
                let is_constant_monomial = e.iter().all(|&x| x == 0);
                if !magnitude.is_one() || (k == 0 && is_constant_monomial) {
                    factors.push(magnitude.to_string());
                }
                match k {
                    0 => {}
                    1 => factors.push("b".into()),
                    _ => factors.push(format!("b^{k}")),
                }
            } else {
                factors.push(format!("({c})"));
            }
            for (i, &x) in e.iter().enumerate() {
                match x {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    _ => factors.push(format!("x{}^{x}", i + 1)),
                }
            }
            if negative {
                f.write_str("-")?;
            } else if n > 0 {
                f.write_str("+")?;
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultivariatePolynomial({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bp(c: &[i64]) -> BetaPolynomial {
        BetaPolynomial::from_coeffs(c.to_vec())
    }

    #[test]
    fn display_beta() {
        assert_eq!(bp(&[3, 3, 1]).to_string(), "b^2+3b+3");
        assert_eq!(bp(&[0, 1, 1]).to_string(), "b^2+b");
        assert_eq!(bp(&[]).to_string(), "0");
        assert_eq!(bp(&[1]).to_string(), "1");
        assert_eq!(bp(&[-2, 0, -1]).to_string(), "-b^2-2");
        assert_eq!(bp(&[1, -1]).to_string(), "-b+1");
    }

    #[test]
    fn normalization_and_weights() {
        assert_eq!(bp(&[1, 0, 0]).coeffs().len(), 1);
        assert!(bp(&[0, 0]).is_zero());
        assert_eq!(BetaPolynomial::weight(0, 0), bp(&[1]));
        assert_eq!(BetaPolynomial::weight(0, 2), bp(&[1, 2, 1]));
        assert_eq!(BetaPolynomial::weight(2, 1), bp(&[0, 0, 1, 1]));
        assert_eq!(BetaPolynomial::weight(1, 3).evaluate_i64(1), BigInt::from(8));
    }

    #[test]
    fn division() {
        assert_eq!(bp(&[0, 0, 1, 2]).divide_by_beta_power(2), Some(bp(&[1, 2])));
        assert_eq!(bp(&[0, 1]).divide_by_beta_power(2), None);
    }

    #[test]
    fn multivariate_display() {
        let vars = 2;
        let x1 = MultivariatePolynomial::variable(vars, 1);
        let x2 = MultivariatePolynomial::variable(vars, 2);
        let b = MultivariatePolynomial::constant(vars, bp(&[0, 1]));
        let p = x1.add(&x2).add(&b.mul(&x1).mul(&x2));
        assert_eq!(p.to_string(), "x1+x2+b*x1*x2");
        assert_eq!(p.at_all_ones(), bp(&[2, 1]));
        assert_eq!(p.at_beta_zero().to_string(), "x1+x2");
        let c = MultivariatePolynomial::constant(0, bp(&[1]));
        assert_eq!(c.to_string(), "1");
        let mixed = MultivariatePolynomial::constant(1, bp(&[1, 1])).mul(&MultivariatePolynomial::variable(1, 1));
        assert_eq!(mixed.to_string(), "(b+1)*x1");
        let neg = MultivariatePolynomial::constant(1, bp(&[0, -3])).mul(&x1_squared());
        assert_eq!(neg.to_string(), "-3*b*x1^2");
    }

    fn x1_squared() -> MultivariatePolynomial {
        let x = MultivariatePolynomial::variable(1, 1);
        x.mul(&x)
    }

    fn arb_poly() -> impl Strategy<Value = BetaPolynomial> {
        prop::collection::vec(-50i64..50, 0..6).prop_map(BetaPolynomial::from_coeffs)
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_poly(), b in arb_poly(), c in arb_poly(), x in -5i64..5) {
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            let bx = BigInt::from(x);
            prop_assert_eq!((&a * &b).evaluate(&bx), a.evaluate(&bx) * b.evaluate(&bx));
        }
    }
}
