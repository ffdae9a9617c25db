use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::model::{QuboModel, VariableRole};

/// A binary signal: a known constant or a model variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signal {
    Const(bool),
    Var(usize),
}

impl Signal {
    pub fn one() -> Self {
        Signal::Const(true)
    }

    pub fn zero() -> Self {
        Signal::Const(false)
    }

    pub fn as_const(self) -> Option<bool> {
        match self {
            Signal::Const(b) => Some(b),
            Signal::Var(_) => None,
        }
    }

    pub fn value(self, x: &[u8]) -> u8 {
        match self {
            Signal::Const(b) => b as u8,
            Signal::Var(i) => x[i],
        }
    }
}

/// `constant + sum coef * x` over binary variables.
#[derive(Clone, Debug, Default)]
pub struct LinearForm {
    pub constant: i128,
    pub terms: BTreeMap<usize, i128>,
}

impl LinearForm {
    pub fn add_signal(&mut self, s: Signal, coef: i128) {
        match s {
            Signal::Const(true) => self.constant += coef,
            Signal::Const(false) => {}
            Signal::Var(i) => *self.terms.entry(i).or_insert(0) += coef,
        }
    }

    pub fn from_signals(items: &[(Signal, i128)]) -> Self {
        let mut f = LinearForm::default();
        for &(s, c) in items {
            f.add_signal(s, c);
        }
        f
    }
}

/// Quadratic pseudo-boolean polynomial with exact 128-bit accumulation.
#[derive(Clone, Debug, Default)]
pub struct Poly {
    pub constant: i128,
    pub linear: BTreeMap<usize, i128>,
    pub quadratic: BTreeMap<(usize, usize), i128>,
}

impl Poly {
    pub fn add_const(&mut self, c: i128) {
        self.constant += c;
    }

    pub fn add_linear(&mut self, i: usize, c: i128) {
        *self.linear.entry(i).or_insert(0) += c;
    }

    /// Adds `c x_i x_j`; `x_i^2 = x_i` folds the diagonal into the linear part.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: i128) {
        if i == j {
            self.add_linear(i, c);
        } else {
            *self.quadratic.entry((i.min(j), i.max(j))).or_insert(0) += c;
        }
    }

    /// Adds `scale * (form)^2`.
    pub fn add_square(&mut self, form: &LinearForm, scale: i128) {
        let c0 = form.constant;
        self.add_const(scale * c0 * c0);
        let terms: Vec<(usize, i128)> = form
            .terms
            .iter()
            .map(|(&i, &c)| (i, c))
            .filter(|&(_, c)| c != 0)
            .collect();
        for (a, &(i, ci)) in terms.iter().enumerate() {
            self.add_linear(i, scale * (2 * c0 * ci + ci * ci));
            for &(j, cj) in &terms[a + 1..] {
                self.add_quadratic(i, j, scale * 2 * ci * cj);
            }
        }
    }

    /// Adds `scale * (a b - 2 (a + b) z + 3 z)`, zero exactly when `z = a b`.
    pub fn add_and(&mut self, a: usize, b: usize, z: usize, scale: i128) {
        self.add_quadratic(a, b, scale);
        self.add_quadratic(a, z, -2 * scale);
        self.add_quadratic(b, z, -2 * scale);
        self.add_linear(z, 3 * scale);
    }

    pub fn evaluate(&self, x: &[u8]) -> i128 {
        let mut e = self.constant;
        for (&i, &c) in &self.linear {
            if x[i] != 0 {
                e += c;
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            if x[i] != 0 && x[j] != 0 {
                e += c;
            }
        }
        e
    }

    /// Largest absolute coefficient of any term containing variable `v`.
    pub fn max_abs_incident(&self, v: usize) -> i128 {
        let lin = self.linear.get(&v).map(|c| c.abs()).unwrap_or(0);
        self.quadratic
            .iter()
            .filter(|((i, j), _)| *i == v || *j == v)
            .map(|(_, c)| c.abs())
            .fold(lin, i128::max)
    }

    pub fn into_model(self, roles: Vec<VariableRole>, what: &'static str) -> Result<QuboModel> {
        let fit = |c: i128| i64::try_from(c).map_err(|_| Error::CoefficientOverflow(what));
        let offset = fit(self.constant)?;
        let mut terms = Vec::with_capacity(self.linear.len() + self.quadratic.len());
        for (i, c) in self.linear {
            terms.push((i, i, fit(c)?));
        }
        for ((i, j), c) in self.quadratic {
            terms.push((i, j, fit(c)?));
        }
        QuboModel::new(roles, offset, terms)
    }
}
