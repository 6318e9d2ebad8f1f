use rand_distr::{Distribution, StandardNormal};

use crate::dd::Dd;
use crate::{seed, Error, Result};

/// Number of input variables of the synthetic regression task.
pub const NUM_VARS: usize = 7;

/// One monomial `coeff · Π xᵢ^eᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub exponents: [u32; NUM_VARS],
    pub coeff: f64,
}

impl Term {
    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// Multivariate polynomial in `x1..x7`, terms sorted in strictly decreasing
/// lexicographic order of their exponent vectors (`x1` most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    degree: u32,
    terms: Vec<Term>,
}

/// Every exponent vector of total degree `<= degree`, decreasing lex order.
pub fn monomials_up_to(degree: u32) -> Vec<[u32; NUM_VARS]> {
    fn fill(pos: usize, budget: u32, current: &mut [u32; NUM_VARS], out: &mut Vec<[u32; NUM_VARS]>) {
        if pos == NUM_VARS {
            out.push(*current);
            return;
        }
        for e in (0..=budget).rev() {
            current[pos] = e;
            fill(pos + 1, budget - e, current, out);
        }
        current[pos] = 0;
    }
    let mut out = Vec::new();
    fill(0, degree, &mut [0; NUM_VARS], &mut out);
    out
}

impl Polynomial {
    /// Validates ordering; the degree is the largest total degree present
    /// (0 for the zero polynomial).
    pub fn from_terms(terms: Vec<Term>) -> Result<Self> {
        for pair in terms.windows(2) {
            if pair[0].exponents <= pair[1].exponents {
                return Err(Error::Config(format!(
                    "terms must be strictly decreasing in lex order: {:?} then {:?}",
                    pair[0].exponents, pair[1].exponents
                )));
            }
        }
        let degree = terms.iter().map(Term::total_degree).max().unwrap_or(0);
        Ok(Polynomial { degree, terms })
    }

    /// All `C(7 + d, d)` monomials of total degree `<= d` with i.i.d.
    /// standard-normal coefficients.
    pub fn generate(degree: u32, seed: u64) -> Result<Self> {
        if degree < 1 {
            return Err(Error::Config("polynomial degree must be >= 1".into()));
        }
        let mut rng = seed::rng(seed);
        let terms = monomials_up_to(degree)
            .into_iter()
            .map(|exponents| Term {
                exponents,
                coeff: StandardNormal.sample(&mut rng),
            })
            .collect();
        Ok(Polynomial { degree, terms })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// `Σ coeff · Π xᵢ^eᵢ` in stored term order.
    ///
    /// Products and the running sum are carried as double-double values, so
    /// the result stays accurate to a few ulps even when large terms cancel.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != NUM_VARS {
            return Err(Error::Shape(format!(
                "polynomial takes {NUM_VARS} variables, got {}",
                x.len()
            )));
        }
        let mut sum = Dd::default();
        for term in &self.terms {
            let mut m = Dd::new(term.coeff);
            for (&xi, &e) in x.iter().zip(&term.exponents) {
                for _ in 0..e {
                    m = m.mul(xi);
                }
            }
            sum = sum.add(m);
        }
        Ok(sum.value())
    }
}
