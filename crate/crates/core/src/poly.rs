//! Sparse multivariate and dense univariate polynomial arithmetic:
//! coefficients, Hasse derivatives, shifts, composition, Kronecker
//! substitution.
//!
//! Monomials are iterated and serialized in lexicographic order of their
//! exponent vectors, which `BTreeMap<Vec<u32>, _>` provides for free.

use std::collections::BTreeMap;

use crate::field::{Field, Felt};
use crate::{term_budget, Error, Result};

/// Dense univariate polynomial; coefficients indexed from degree 0, trailing
/// coefficient nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    field: Field,
    coeffs: Vec<u64>,
}

impl UniPoly {
    pub fn from_coeffs(field: Field, mut coeffs: Vec<u64>) -> UniPoly {
        for c in &mut coeffs {
            *c %= field.modulus();
        }
        let mut p = UniPoly { field, coeffs };
        p.normalize();
        p
    }

    pub fn zero(field: Field) -> UniPoly {
        UniPoly { field, coeffs: vec![] }
    }

    pub fn constant(field: Field, c: Felt) -> UniPoly {
        UniPoly::from_coeffs(field, vec![c.value()])
    }

    /// The polynomial `x`.
    pub fn x(field: Field) -> UniPoly {
        UniPoly::from_coeffs(field, vec![0, 1])
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn add(&self, rhs: &UniPoly) -> UniPoly {
        assert_eq!(self.field, rhs.field, "field mismatch");
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len)
            .map(|i| self.field.add_raw(self.coeff(i), rhs.coeff(i)))
            .collect();
        let mut p = UniPoly { field: self.field, coeffs };
        p.normalize();
        p
    }

    pub fn mul(&self, rhs: &UniPoly) -> UniPoly {
        assert_eq!(self.field, rhs.field, "field mismatch");
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero(self.field);
        }
        let mut coeffs = vec![0u64; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = self.field.add_raw(coeffs[i + j], self.field.mul_raw(a, b));
            }
        }
        let mut p = UniPoly { field: self.field, coeffs };
        p.normalize();
        p
    }

    pub fn scale(&self, c: Felt) -> UniPoly {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| self.field.mul_raw(a, c.value()))
            .collect();
        let mut p = UniPoly { field: self.field, coeffs };
        p.normalize();
        p
    }

    pub fn eval(&self, x: Felt) -> Felt {
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = self.field.add_raw(self.field.mul_raw(acc, x.value()), c);
        }
        self.field.elt(acc as i128)
    }

    /// Embeds into `F[x_0..x_{arity-1}]` as a polynomial in variable `var`.
    pub fn to_sparse(&self, arity: usize, var: usize) -> SparsePoly {
        assert!(var < arity, "variable index out of range");
        let mut p = SparsePoly::zero(self.field, arity);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                let mut e = vec![0u32; arity];
                e[var] = i as u32;
                p.terms.insert(e, c);
            }
        }
        p
    }

    /// The i-th Hasse derivative: `sum_k binom(k, i) c_k x^{k-i}`.
    pub fn hasse_derivative(&self, i: u32) -> UniPoly {
        let f = self.field;
        if (i as usize) >= self.coeffs.len() {
            return UniPoly::zero(f);
        }
        let coeffs = self.coeffs[i as usize..]
            .iter()
            .enumerate()
            .map(|(k, &c)| f.mul_raw(c, f.binom_raw(i + k as u32, i)))
            .collect();
        UniPoly::from_coeffs(f, coeffs)
    }

    /// Substitutes another univariate polynomial for the variable.
    pub fn compose(&self, inner: &UniPoly) -> UniPoly {
        let mut acc = UniPoly::zero(self.field);
        for &c in self.coeffs.iter().rev() {
            acc = acc
                .mul(inner)
                .add(&UniPoly::constant(self.field, self.field.elt(c as i128)));
        }
        acc
    }
}

/// Sparse multivariate polynomial: exponent vector -> nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly {
    field: Field,
    arity: usize,
    terms: BTreeMap<Vec<u32>, u64>,
}

impl SparsePoly {
    pub fn zero(field: Field, arity: usize) -> SparsePoly {
        SparsePoly { field, arity, terms: BTreeMap::new() }
    }

    pub fn constant(field: Field, arity: usize, c: Felt) -> SparsePoly {
        let mut p = SparsePoly::zero(field, arity);
        if !c.is_zero() {
            p.terms.insert(vec![0; arity], c.value());
        }
        p
    }

    pub fn monomial(field: Field, arity: usize, exps: &[u32], c: Felt) -> SparsePoly {
        assert_eq!(exps.len(), arity, "exponent vector length mismatch");
        let mut p = SparsePoly::zero(field, arity);
        if !c.is_zero() {
            p.terms.insert(exps.to_vec(), c.value());
        }
        p
    }

    /// The variable `x_i`.
    pub fn var(field: Field, arity: usize, i: usize) -> SparsePoly {
        assert!(i < arity, "variable index out of range");
        let mut e = vec![0u32; arity];
        e[i] = 1;
        SparsePoly::monomial(field, arity, &e, field.one())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, Felt)> + '_ {
        self.terms.iter().map(|(e, &c)| (e, self.field.elt(c as i128)))
    }

    pub fn coeff(&self, a: &[u32]) -> Result<Felt> {
        if a.len() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: a.len() });
        }
        Ok(self.field.elt(self.terms.get(a).copied().unwrap_or(0) as i128))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in_var(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    /// Maximum individual degree over all variables.
    pub fn individual_degree(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|e| e.iter().copied())
            .max()
            .unwrap_or(0)
    }

    fn check_compatible(&self, rhs: &SparsePoly) -> Result<()> {
        if self.field != rhs.field {
            return Err(Error::FieldMismatch(self.field.modulus(), rhs.field.modulus()));
        }
        if self.arity != rhs.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: rhs.arity });
        }
        Ok(())
    }

    fn insert_add(&mut self, e: Vec<u32>, c: u64) {
        if c == 0 {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = self.field.add_raw(*o.get(), c);
                if s == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, rhs: &SparsePoly) -> Result<SparsePoly> {
        self.check_compatible(rhs)?;
        let mut out = self.clone();
        for (e, &c) in &rhs.terms {
            out.insert_add(e.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &SparsePoly) -> Result<SparsePoly> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> SparsePoly {
        let terms = self
            .terms
            .iter()
            .map(|(e, &c)| (e.clone(), self.field.neg_raw(c)))
            .collect();
        SparsePoly { field: self.field, arity: self.arity, terms }
    }

    pub fn scale(&self, c: Felt) -> SparsePoly {
        let mut out = SparsePoly::zero(self.field, self.arity);
        for (e, &a) in &self.terms {
            out.insert_add(e.clone(), self.field.mul_raw(a, c.value()));
        }
        out
    }

    pub fn mul(&self, rhs: &SparsePoly) -> Result<SparsePoly> {
        self.check_compatible(rhs)?;
        let budget = term_budget();
        if self.terms.len().saturating_mul(rhs.terms.len()) > budget {
            return Err(Error::BudgetExceeded(budget));
        }
        let mut out = SparsePoly::zero(self.field, self.arity);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.insert_add(e, self.field.mul_raw(ca, cb));
            }
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[Felt]) -> Result<Felt> {
        if point.len() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: point.len() });
        }
        let f = self.field;
        let mut acc = 0u64;
        for (e, &c) in &self.terms {
            let mut term = c;
            for (i, &exp) in e.iter().enumerate() {
                if exp != 0 {
                    term = f.mul_raw(term, f.pow_raw(point[i].value(), exp as u64));
                }
            }
            acc = f.add_raw(acc, term);
        }
        Ok(f.elt(acc as i128))
    }

    /// The Hasse derivative with respect to the monomial `x^b`:
    /// `sum_c binom(b+c, b) coeff(x^{b+c}, f) x^c`.
    pub fn hasse_derivative(&self, b: &[u32]) -> Result<SparsePoly> {
        if b.len() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: b.len() });
        }
        let f = self.field;
        let mut out = SparsePoly::zero(f, self.arity);
        for (e, &coef) in &self.terms {
            if e.iter().zip(b).any(|(x, y)| x < y) {
                continue;
            }
            let mut c = coef;
            for (&ei, &bi) in e.iter().zip(b) {
                c = f.mul_raw(c, f.binom_raw(ei, bi));
            }
            let rest: Vec<u32> = e.iter().zip(b).map(|(x, y)| x - y).collect();
            out.insert_add(rest, c);
        }
        Ok(out)
    }

    /// `f(x + t)` in 2n variables: the x-block occupies indices `0..n`, the
    /// t-block indices `n..2n`.
    pub fn shift_symbolic(&self) -> Result<SparsePoly> {
        let n = self.arity;
        let f = self.field;
        let budget = term_budget();
        let mut out = SparsePoly::zero(f, 2 * n);
        for (e, &coef) in &self.terms {
            // expand prod_i (x_i + t_i)^{e_i} one variable at a time
            let mut partial: Vec<(Vec<u32>, u64)> = vec![(vec![0u32; 2 * n], coef)];
            for (i, &ei) in e.iter().enumerate() {
                let mut next = Vec::with_capacity(partial.len() * (ei as usize + 1));
                for (exps, c) in &partial {
                    for k in 0..=ei {
                        let mut e2 = exps.clone();
                        e2[i] += k;
                        e2[n + i] += ei - k;
                        next.push((e2, f.mul_raw(*c, f.binom_raw(ei, k))));
                    }
                }
                if next.len() > budget {
                    return Err(Error::BudgetExceeded(budget));
                }
                partial = next;
            }
            for (exps, c) in partial {
                out.insert_add(exps, c);
            }
        }
        Ok(out)
    }

    /// `f(x + alpha)` for a concrete point.
    pub fn shift_point(&self, alpha: &[Felt]) -> Result<SparsePoly> {
        if alpha.len() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: alpha.len() });
        }
        let f = self.field;
        let mut out = SparsePoly::zero(f, self.arity);
        for (e, &coef) in &self.terms {
            let mut partial: Vec<(Vec<u32>, u64)> = vec![(vec![0u32; self.arity], coef)];
            for (i, &ei) in e.iter().enumerate() {
                let mut next = Vec::new();
                for (exps, c) in &partial {
                    let mut apow = 1u64;
                    for k in (0..=ei).rev() {
                        // term binom(ei,k) x^k alpha^{ei-k}, built with
                        // alpha powers increasing as k decreases
                        let mut e2 = exps.clone();
                        e2[i] += k;
                        let c2 = f.mul_raw(f.mul_raw(*c, f.binom_raw(ei, k)), apow);
                        next.push((e2, c2));
                        apow = f.mul_raw(apow, alpha[i].value());
                    }
                }
                partial = next;
            }
            for (exps, c) in partial {
                out.insert_add(exps, c);
            }
        }
        Ok(out)
    }

    /// Substitutes the map's components for the variables.
    pub fn compose(&self, g: &PolyMap) -> Result<SparsePoly> {
        if g.out_arity != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: g.out_arity });
        }
        if g.components.iter().any(|c| c.field != self.field) {
            return Err(Error::FieldMismatch(self.field.modulus(), g.field().modulus()));
        }
        let mut out = SparsePoly::zero(self.field, g.in_arity);
        for (e, &coef) in &self.terms {
            let mut term = SparsePoly::constant(self.field, g.in_arity, self.field.elt(coef as i128));
            for (i, &ei) in e.iter().enumerate() {
                for _ in 0..ei {
                    term = term.mul(&g.components[i])?;
                    if term.is_zero() {
                        break;
                    }
                }
                if term.is_zero() {
                    break;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Fixes some variables to field values; the remaining variables keep
    /// their relative order and the arity shrinks accordingly.
    pub fn substitute(&self, assign: &BTreeMap<usize, Felt>) -> Result<SparsePoly> {
        for &i in assign.keys() {
            if i >= self.arity {
                return Err(Error::ArityMismatch { expected: self.arity, got: i + 1 });
            }
        }
        let keep: Vec<usize> = (0..self.arity).filter(|i| !assign.contains_key(i)).collect();
        let f = self.field;
        let mut out = SparsePoly::zero(f, keep.len());
        for (e, &c) in &self.terms {
            let mut coef = c;
            for (&i, v) in assign {
                if e[i] != 0 {
                    coef = f.mul_raw(coef, f.pow_raw(v.value(), e[i] as u64));
                }
            }
            let exps: Vec<u32> = keep.iter().map(|&i| e[i]).collect();
            out.insert_add(exps, coef);
        }
        Ok(out)
    }

    /// Kronecker substitution: variable `z_j` (the j-th index in `z_block`,
    /// ascending) is replaced by `y_j^base`, where `y_j` is the j-th variable
    /// outside the block. Requires individual degree < base so distinct
    /// monomials keep distinct images.
    pub fn kronecker_substitute(&self, z_block: &[usize], base: u32) -> Result<SparsePoly> {
        let y_block: Vec<usize> = (0..self.arity).filter(|i| !z_block.contains(i)).collect();
        if y_block.len() != z_block.len() {
            return Err(Error::InvalidInput(format!(
                "Kronecker blocks must split the {} variables evenly",
                self.arity
            )));
        }
        let mut z_sorted = z_block.to_vec();
        z_sorted.sort_unstable();
        z_sorted.dedup();
        if z_sorted.len() != z_block.len() || z_sorted.iter().any(|&i| i >= self.arity) {
            return Err(Error::InvalidInput("invalid z-block indices".into()));
        }
        let ind = self.individual_degree();
        if ind >= base {
            return Err(Error::DegreeTooLarge { got: ind, bound: base });
        }
        let mut out = SparsePoly::zero(self.field, y_block.len());
        for (e, &c) in &self.terms {
            let exps: Vec<u32> = y_block
                .iter()
                .zip(&z_sorted)
                .map(|(&yi, &zi)| e[yi] + base * e[zi])
                .collect();
            out.insert_add(exps, c);
        }
        Ok(out)
    }
}

/// A polynomial map `F^m -> F^n`: n components, each an m-variate polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMap {
    in_arity: usize,
    out_arity: usize,
    components: Vec<SparsePoly>,
}

impl PolyMap {
    pub fn new(components: Vec<SparsePoly>) -> Result<PolyMap> {
        assert!(!components.is_empty(), "a map needs at least one component");
        let in_arity = components[0].arity();
        let field = components[0].field();
        for c in &components {
            if c.arity() != in_arity {
                return Err(Error::ArityMismatch { expected: in_arity, got: c.arity() });
            }
            if c.field() != field {
                return Err(Error::FieldMismatch(field.modulus(), c.field().modulus()));
            }
        }
        Ok(PolyMap { in_arity, out_arity: components.len(), components })
    }

    pub fn identity(field: Field, n: usize) -> PolyMap {
        let components = (0..n).map(|i| SparsePoly::var(field, n, i)).collect();
        PolyMap { in_arity: n, out_arity: n, components }
    }

    pub fn field(&self) -> Field {
        self.components[0].field()
    }

    pub fn in_arity(&self) -> usize {
        self.in_arity
    }

    pub fn out_arity(&self) -> usize {
        self.out_arity
    }

    pub fn components(&self) -> &[SparsePoly] {
        &self.components
    }

    pub fn eval(&self, point: &[Felt]) -> Result<Vec<Felt>> {
        self.components.iter().map(|c| c.eval(point)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f101() -> Field {
        Field::new(101).unwrap()
    }

    fn f7() -> Field {
        Field::new(7).unwrap()
    }

    #[test]
    fn sparse_mul_and_add() {
        let f = f7();
        let x1 = SparsePoly::var(f, 2, 0);
        let x2 = SparsePoly::var(f, 2, 1);
        let prod = x1.mul(&x2).unwrap();
        assert_eq!(prod.coeff(&[1, 1]).unwrap(), f.one());
        assert_eq!(prod.num_terms(), 1);

        let zero = SparsePoly::zero(f, 2);
        assert_eq!(x1.add(&zero).unwrap(), x1);

        // (x1+1)(x1-1) = x1^2 + 6 in F_7
        let one = SparsePoly::constant(f, 1, f.one());
        let x = SparsePoly::var(f, 1, 0);
        let p = x.add(&one).unwrap();
        let q = x.sub(&one).unwrap();
        let r = p.mul(&q).unwrap();
        assert_eq!(r.coeff(&[2]).unwrap(), f.one());
        assert_eq!(r.coeff(&[0]).unwrap(), f.elt(6));
        assert_eq!(r.coeff(&[1]).unwrap(), f.zero());
    }

    #[test]
    fn coeff_basics() {
        let f = f7();
        let p = SparsePoly::monomial(f, 2, &[2, 1], f.elt(3));
        assert_eq!(p.coeff(&[2, 1]).unwrap(), f.elt(3));
        assert_eq!(p.coeff(&[0, 1]).unwrap(), f.zero());
        assert!(p.coeff(&[1]).is_err());
    }

    #[test]
    fn hasse_examples() {
        let f = f101();
        // d/dx^2 (x^3) = 3x
        let x3 = SparsePoly::monomial(f, 1, &[3], f.one());
        let d = x3.hasse_derivative(&[2]).unwrap();
        assert_eq!(d.coeff(&[1]).unwrap(), f.elt(3));
        assert_eq!(d.num_terms(), 1);

        // zero-order derivative is the identity
        let p = SparsePoly::monomial(f, 2, &[2, 1], f.elt(5));
        assert_eq!(p.hasse_derivative(&[0, 0]).unwrap(), p);

        // in F_2: Hasse d_{x^2}(x^2) = 1 (ordinary second derivative vanishes)
        let f2 = Field::new(2).unwrap();
        let x2 = SparsePoly::monomial(f2, 1, &[2], f2.one());
        let d = x2.hasse_derivative(&[2]).unwrap();
        assert_eq!(d.coeff(&[0]).unwrap(), f2.one());
    }

    #[test]
    fn shift_examples() {
        let f = f101();
        // x^2 shifted symbolically: x^2 + 2tx + t^2
        let x2 = SparsePoly::monomial(f, 1, &[2], f.one());
        let s = x2.shift_symbolic().unwrap();
        assert_eq!(s.coeff(&[2, 0]).unwrap(), f.one());
        assert_eq!(s.coeff(&[1, 1]).unwrap(), f.elt(2));
        assert_eq!(s.coeff(&[0, 2]).unwrap(), f.one());

        // shift by 0 is the identity
        let p = SparsePoly::monomial(f, 2, &[2, 1], f.elt(5));
        assert_eq!(p.shift_point(&[f.zero(), f.zero()]).unwrap(), p);

        // x1 x2 shifted by (1,1): x1x2 + x1 + x2 + 1
        let m = SparsePoly::monomial(f, 2, &[1, 1], f.one());
        let s = m.shift_point(&[f.one(), f.one()]).unwrap();
        assert_eq!(s.coeff(&[1, 1]).unwrap(), f.one());
        assert_eq!(s.coeff(&[1, 0]).unwrap(), f.one());
        assert_eq!(s.coeff(&[0, 1]).unwrap(), f.one());
        assert_eq!(s.coeff(&[0, 0]).unwrap(), f.one());
        assert_eq!(s.num_terms(), 4);
    }

    #[test]
    fn shift_round_trip() {
        let f = f7();
        let p = SparsePoly::monomial(f, 2, &[2, 1], f.elt(3))
            .add(&SparsePoly::var(f, 2, 1))
            .unwrap();
        let alpha = [f.elt(4), f.elt(2)];
        let neg: Vec<Felt> = alpha.iter().map(|&a| -a).collect();
        let back = p.shift_point(&alpha).unwrap().shift_point(&neg).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn hasse_equals_symbolic_shift_coeff() {
        // coeff of x^a in f(x+t), as a polynomial in t, is the Hasse
        // derivative of f at a
        let f = f7();
        let p = SparsePoly::monomial(f, 2, &[2, 2], f.elt(3))
            .add(&SparsePoly::monomial(f, 2, &[1, 0], f.elt(5)))
            .unwrap();
        let s = p.shift_symbolic().unwrap();
        for a0 in 0..3u32 {
            for a1 in 0..3u32 {
                let d = p.hasse_derivative(&[a0, a1]).unwrap();
                // collect the t-part of every term of s whose x-part is (a0,a1)
                let mut got = SparsePoly::zero(f, 2);
                for (e, c) in s.terms() {
                    if e[0] == a0 && e[1] == a1 {
                        got = got
                            .add(&SparsePoly::monomial(f, 2, &[e[2], e[3]], c))
                            .unwrap();
                    }
                }
                assert_eq!(got, d, "mismatch at ({}, {})", a0, a1);
            }
        }
    }

    #[test]
    fn compose_examples() {
        let f = f7();
        let p = SparsePoly::monomial(f, 2, &[1, 1], f.elt(3))
            .add(&SparsePoly::var(f, 2, 0))
            .unwrap();
        assert_eq!(p.compose(&PolyMap::identity(f, 2)).unwrap(), p);

        // x1 x2 composed with (y, y) = y^2
        let y = SparsePoly::var(f, 1, 0);
        let g = PolyMap::new(vec![y.clone(), y]).unwrap();
        let m = SparsePoly::monomial(f, 2, &[1, 1], f.one());
        let c = m.compose(&g).unwrap();
        assert_eq!(c.coeff(&[2]).unwrap(), f.one());
        assert_eq!(c.num_terms(), 1);
    }

    #[test]
    fn compose_eval_commute() {
        let f = f101();
        let p = SparsePoly::monomial(f, 2, &[2, 1], f.elt(3))
            .add(&SparsePoly::monomial(f, 2, &[0, 2], f.elt(9)))
            .unwrap();
        let g = PolyMap::new(vec![
            SparsePoly::monomial(f, 2, &[1, 1], f.elt(2)),
            SparsePoly::var(f, 2, 1)
                .add(&SparsePoly::constant(f, 2, f.elt(5)))
                .unwrap(),
        ])
        .unwrap();
        let comp = p.compose(&g).unwrap();
        for s0 in [3u64, 17, 42] {
            for s1 in [8u64, 55] {
                let s = [f.elt(s0 as i128), f.elt(s1 as i128)];
                let img = g.eval(&s).unwrap();
                assert_eq!(comp.eval(&s).unwrap(), p.eval(&img).unwrap());
            }
        }
        assert!(comp.total_degree() <= p.total_degree() * 2);
    }

    #[test]
    fn kronecker_examples() {
        let f = f7();
        // f = z1 (vars: y1=0, z1=1), D=3 -> y1^3
        let z1 = SparsePoly::var(f, 2, 1);
        let k = z1.kronecker_substitute(&[1], 3).unwrap();
        assert_eq!(k.arity(), 1);
        assert_eq!(k.coeff(&[3]).unwrap(), f.one());

        // f = y1 + z1 -> y1 + y1^3
        let y1 = SparsePoly::var(f, 2, 0);
        let p = y1.add(&SparsePoly::var(f, 2, 1)).unwrap();
        let k = p.kronecker_substitute(&[1], 3).unwrap();
        assert_eq!(k.coeff(&[1]).unwrap(), f.one());
        assert_eq!(k.coeff(&[3]).unwrap(), f.one());

        // degree violation rejected
        let bad = SparsePoly::monomial(f, 2, &[3, 0], f.one());
        assert!(bad.kronecker_substitute(&[1], 3).is_err());
    }

    #[test]
    fn kronecker_preserves_zeroness() {
        // distinct monomials with ind-deg < D have distinct images, so the
        // image has the same number of terms
        let f = f7();
        let mut p = SparsePoly::zero(f, 4);
        for (e, c) in [
            (vec![1u32, 0, 2, 1], 3u64),
            (vec![0, 2, 0, 0], 5),
            (vec![2, 2, 1, 2], 1),
        ] {
            p = p.add(&SparsePoly::monomial(f, 4, &e, f.elt(c as i128))).unwrap();
        }
        let k = p.kronecker_substitute(&[2, 3], 3).unwrap();
        assert_eq!(k.num_terms(), p.num_terms());
        assert!(!k.is_zero());
    }

    #[test]
    fn eval_examples() {
        let f = f7();
        let p = SparsePoly::monomial(f, 2, &[1, 1], f.one())
            .add(&SparsePoly::constant(f, 2, f.one()))
            .unwrap();
        assert_eq!(p.eval(&[f.elt(2), f.elt(3)]).unwrap(), f.zero());
        let z = SparsePoly::zero(f, 2);
        assert_eq!(z.eval(&[f.elt(5), f.elt(6)]).unwrap(), f.zero());
    }

    #[test]
    fn unipoly_basics() {
        let f = f7();
        let p = UniPoly::from_coeffs(f, vec![1, 2, 1]); // (x+1)^2
        assert_eq!(p.eval(f.elt(2)), f.elt(2)); // 9 mod 7
        let q = UniPoly::x(f);
        assert_eq!(p.mul(&q).coeffs(), &[0, 1, 2, 1]);
        assert_eq!(p.add(&q.scale(-f.one())).coeffs(), &[1, 1, 1]);
        assert!(UniPoly::from_coeffs(f, vec![0, 0]).is_zero());
        // composition: p(x^2+1) evaluated matches pointwise
        let inner = UniPoly::from_coeffs(f, vec![1, 0, 1]);
        let comp = p.compose(&inner);
        for v in 0..7 {
            let x = f.elt(v);
            assert_eq!(comp.eval(x), p.eval(inner.eval(x)));
        }
    }

    #[test]
    fn unipoly_to_sparse() {
        let f = f7();
        let p = UniPoly::from_coeffs(f, vec![2, 0, 3]);
        let s = p.to_sparse(3, 1);
        assert_eq!(s.coeff(&[0, 0, 0]).unwrap(), f.elt(2));
        assert_eq!(s.coeff(&[0, 2, 0]).unwrap(), f.elt(3));
        assert_eq!(s.num_terms(), 2);
    }
}
