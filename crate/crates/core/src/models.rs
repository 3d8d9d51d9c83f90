//! Circuit models: ROABPs, matrix-valued ROABPs, set-multilinear ABPs, and
//! diagonal circuits, with evaluation, exact expansion, and the structural
//! conversions between them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{Field, Felt};
use crate::linalg::Mat;
use crate::poly::{SparsePoly, UniPoly};
use crate::{term_budget, Error, Result};

/// Read-once oblivious ABP: layer i is an r x r matrix of univariate
/// polynomials in `x_{order[i]}`, each of degree < d; the output is
/// `left . (prod layers) . right`.
#[derive(Debug, Clone)]
pub struct Roabp {
    pub field: Field,
    pub n: usize,
    pub d: u32,
    pub r: usize,
    /// Permutation of [n]; layer i reads variable `order[i]`.
    pub order: Vec<usize>,
    /// n layers, each row-major r x r.
    pub layers: Vec<Vec<UniPoly>>,
    pub left: Vec<Felt>,
    pub right: Vec<Felt>,
}

/// A ROABP without boundary vectors; the output is the full matrix product.
#[derive(Debug, Clone)]
pub struct MatrixRoabp {
    pub field: Field,
    pub n: usize,
    pub d: u32,
    pub r: usize,
    pub order: Vec<usize>,
    pub layers: Vec<Vec<UniPoly>>,
}

/// Set-multilinear ABP: layer i is an r x r matrix of homogeneous linear
/// forms in its own variable set (set i holds `n` variables; variable (i, j)
/// has global index i*n + j).
#[derive(Debug, Clone)]
pub struct Smabp {
    pub field: Field,
    /// Number of variable sets (= layers).
    pub d: usize,
    /// Variables per set.
    pub n: usize,
    pub r: usize,
    /// layers[i] is row-major r x r; each entry is the length-n coefficient
    /// vector of a linear form in set i's variables.
    pub layers: Vec<Vec<Vec<u64>>>,
}

/// Sum of powers of affine forms: `sum_i L_i(x)^{d_i}` with
/// `L = coeffs[0] + sum_j coeffs[j+1] x_j`.
#[derive(Debug, Clone)]
pub struct DiagonalCircuit {
    pub field: Field,
    pub n: usize,
    pub terms: Vec<(Vec<u64>, u32)>,
}

fn validate_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::InvalidInput(format!(
            "order has length {}, expected {}",
            order.len(),
            n
        )));
    }
    for &i in order {
        if i >= n || seen[i] {
            return Err(Error::InvalidInput("order is not a permutation".into()));
        }
        seen[i] = true;
    }
    Ok(())
}

fn check_layers(field: Field, layers: &[Vec<UniPoly>], r: usize, d: u32) -> Result<()> {
    for layer in layers {
        if layer.len() != r * r {
            return Err(Error::InvalidInput(format!(
                "layer has {} entries, expected {}",
                layer.len(),
                r * r
            )));
        }
        for entry in layer {
            if entry.field() != field {
                return Err(Error::FieldMismatch(field.modulus(), entry.field().modulus()));
            }
            if !entry.is_zero() && entry.degree() as u32 >= d {
                return Err(Error::DegreeTooLarge { got: entry.degree() as u32, bound: d });
            }
        }
    }
    Ok(())
}

impl Roabp {
    pub fn new(
        field: Field,
        d: u32,
        r: usize,
        order: Vec<usize>,
        layers: Vec<Vec<UniPoly>>,
        left: Vec<Felt>,
        right: Vec<Felt>,
    ) -> Result<Roabp> {
        let n = layers.len();
        validate_order(&order, n)?;
        check_layers(field, &layers, r, d)?;
        if left.len() != r || right.len() != r {
            return Err(Error::InvalidInput("boundary vectors must have length r".into()));
        }
        Ok(Roabp { field, n, d, r, order, layers, left, right })
    }

    /// Exact expansion into a sparse polynomial over x_1..x_n.
    pub fn expand(&self) -> Result<SparsePoly> {
        let f = self.field;
        // carry left . (prod of layers so far) as a length-r vector of polys
        let mut vec: Vec<SparsePoly> = self
            .left
            .iter()
            .map(|&c| SparsePoly::constant(f, self.n, c))
            .collect();
        for (i, layer) in self.layers.iter().enumerate() {
            let var = self.order[i];
            let entries: Vec<SparsePoly> =
                layer.iter().map(|e| e.to_sparse(self.n, var)).collect();
            let mut next = vec![SparsePoly::zero(f, self.n); self.r];
            for (col, slot) in next.iter_mut().enumerate() {
                for row in 0..self.r {
                    if vec[row].is_zero() {
                        continue;
                    }
                    *slot = slot.add(&vec[row].mul(&entries[row * self.r + col])?)?;
                }
            }
            vec = next;
        }
        let mut out = SparsePoly::zero(f, self.n);
        for (v, &c) in vec.iter().zip(&self.right) {
            out = out.add(&v.scale(c))?;
        }
        Ok(out)
    }

    /// Black-box evaluation via r x r matrix products; never expands.
    pub fn eval(&self, point: &[Felt]) -> Result<Felt> {
        if point.len() != self.n {
            return Err(Error::ArityMismatch { expected: self.n, got: point.len() });
        }
        let f = self.field;
        let mut vec: Vec<Felt> = self.left.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let x = point[self.order[i]];
            let mut next = vec![f.zero(); self.r];
            for (col, slot) in next.iter_mut().enumerate() {
                for row in 0..self.r {
                    *slot = *slot + vec[row] * layer[row * self.r + col].eval(x);
                }
            }
            vec = next;
        }
        let mut acc = f.zero();
        for (v, &c) in vec.iter().zip(&self.right) {
            acc = acc + *v * c;
        }
        Ok(acc)
    }

    /// The same program under a different layer order (for commutativity
    /// witnesses and adversarial-order experiments). Layer i of the result
    /// reads variable `new_order[i]` with the matrix that variable had here.
    pub fn with_order(&self, new_order: Vec<usize>) -> Result<Roabp> {
        validate_order(&new_order, self.n)?;
        let mut by_var = vec![None; self.n];
        for (i, &v) in self.order.iter().enumerate() {
            by_var[v] = Some(&self.layers[i]);
        }
        let layers = new_order
            .iter()
            .map(|&v| by_var[v].expect("order validated").clone())
            .collect();
        Roabp::new(
            self.field,
            self.d,
            self.r,
            new_order,
            layers,
            self.left.clone(),
            self.right.clone(),
        )
    }
}

impl MatrixRoabp {
    pub fn new(
        field: Field,
        d: u32,
        r: usize,
        order: Vec<usize>,
        layers: Vec<Vec<UniPoly>>,
    ) -> Result<MatrixRoabp> {
        let n = layers.len();
        validate_order(&order, n)?;
        check_layers(field, &layers, r, d)?;
        Ok(MatrixRoabp { field, n, d, r, order, layers })
    }

    /// Exact expansion of every matrix entry.
    pub fn expand(&self) -> Result<Vec<Vec<SparsePoly>>> {
        let f = self.field;
        let mut prod: Vec<Vec<SparsePoly>> = (0..self.r)
            .map(|i| {
                (0..self.r)
                    .map(|j| {
                        let c = if i == j { f.one() } else { f.zero() };
                        SparsePoly::constant(f, self.n, c)
                    })
                    .collect()
            })
            .collect();
        for (k, layer) in self.layers.iter().enumerate() {
            let var = self.order[k];
            let entries: Vec<SparsePoly> =
                layer.iter().map(|e| e.to_sparse(self.n, var)).collect();
            let mut next: Vec<Vec<SparsePoly>> =
                vec![vec![SparsePoly::zero(f, self.n); self.r]; self.r];
            for i in 0..self.r {
                for j in 0..self.r {
                    for k2 in 0..self.r {
                        if prod[i][k2].is_zero() {
                            continue;
                        }
                        next[i][j] =
                            next[i][j].add(&prod[i][k2].mul(&entries[k2 * self.r + j])?)?;
                    }
                }
            }
            prod = next;
        }
        Ok(prod)
    }

    /// Numeric matrix product at a point.
    pub fn eval(&self, point: &[Felt]) -> Result<Mat> {
        if point.len() != self.n {
            return Err(Error::ArityMismatch { expected: self.n, got: point.len() });
        }
        let mut prod = Mat::identity(self.field, self.r);
        for (i, layer) in self.layers.iter().enumerate() {
            let x = point[self.order[i]];
            let mut m = Mat::zeros(self.field, self.r, self.r);
            for row in 0..self.r {
                for col in 0..self.r {
                    m.set(row, col, layer[row * self.r + col].eval(x));
                }
            }
            prod = prod.mul(&m);
        }
        Ok(prod)
    }

    pub fn with_boundary(&self, left: Vec<Felt>, right: Vec<Felt>) -> Result<Roabp> {
        Roabp::new(
            self.field,
            self.d,
            self.r,
            self.order.clone(),
            self.layers.clone(),
            left,
            right,
        )
    }
}

impl Smabp {
    pub fn new(field: Field, n: usize, r: usize, layers: Vec<Vec<Vec<u64>>>) -> Result<Smabp> {
        let d = layers.len();
        for layer in &layers {
            if layer.len() != r * r {
                return Err(Error::InvalidInput(format!(
                    "layer has {} entries, expected {}",
                    layer.len(),
                    r * r
                )));
            }
            for form in layer {
                if form.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "linear form has {} coefficients, expected {}",
                        form.len(),
                        n
                    )));
                }
            }
        }
        Ok(Smabp { field, d, n, r, layers })
    }

    /// Total variable count (d sets of n).
    pub fn arity(&self) -> usize {
        self.d * self.n
    }

    /// Entry (0, 0) of the layer product, expanded exactly.
    pub fn expand(&self) -> Result<SparsePoly> {
        let f = self.field;
        let total = self.arity();
        let mut vec: Vec<SparsePoly> = (0..self.r)
            .map(|j| {
                let c = if j == 0 { f.one() } else { f.zero() };
                SparsePoly::constant(f, total, c)
            })
            .collect();
        for (i, layer) in self.layers.iter().enumerate() {
            let forms: Vec<SparsePoly> = layer
                .iter()
                .map(|form| {
                    let mut p = SparsePoly::zero(f, total);
                    for (j, &c) in form.iter().enumerate() {
                        let v = SparsePoly::var(f, total, i * self.n + j)
                            .scale(f.elt(c as i128));
                        p = p.add(&v)?;
                    }
                    Ok(p)
                })
                .collect::<Result<_>>()?;
            let mut next = vec![SparsePoly::zero(f, total); self.r];
            for (col, slot) in next.iter_mut().enumerate() {
                for row in 0..self.r {
                    if vec[row].is_zero() {
                        continue;
                    }
                    *slot = slot.add(&vec[row].mul(&forms[row * self.r + col])?)?;
                }
            }
            vec = next;
        }
        Ok(vec.swap_remove(0))
    }
}

/// Converts an SMABP into a multilinear width-2r ROABP over the same dn
/// variables computing the same polynomial.
///
/// Variable (i, j) contributes the block gadget [[I, A_{ij} x_{ij}], [0, I]];
/// within one set the off-diagonal blocks add up to the set's linear layer,
/// and the constant matrix [[0,0],[I,0]] folded into the set's last gadget
/// routes the accumulated layer into the running product.
pub fn smabp_to_roabp(s: &Smabp) -> Result<Roabp> {
    let f = s.field;
    let r = s.r;
    let w = 2 * r;
    let total = s.arity();
    if s.n == 0 || s.d == 0 {
        return Err(Error::InvalidInput("SMABP needs at least one set and variable".into()));
    }
    let mut layers = Vec::with_capacity(total);
    let zero = UniPoly::zero(f);
    let one = UniPoly::constant(f, f.one());
    for layer in &s.layers {
        for j in 0..s.n {
            let last = j == s.n - 1;
            // gadget G = [[I, A x], [0, I]], optionally times E = [[0,0],[I,0]]:
            // G.E = [[A x, 0], [I, 0]]
            let mut g = vec![zero.clone(); w * w];
            for row in 0..r {
                for col in 0..r {
                    let coef = layer[row * r + col][j];
                    let ax = UniPoly::from_coeffs(f, vec![0, coef]);
                    if last {
                        g[row * w + col] = ax;
                    } else {
                        g[row * w + (r + col)] = ax;
                    }
                }
                if last {
                    g[(r + row) * w + row] = one.clone();
                } else {
                    g[row * w + row] = one.clone();
                    g[(r + row) * w + (r + row)] = one.clone();
                }
            }
            layers.push(g);
        }
    }
    let mut left = vec![f.zero(); w];
    left[0] = f.one();
    let mut right = vec![f.zero(); w];
    right[0] = f.one();
    Roabp::new(f, 2, w, (0..total).collect(), layers, left, right)
}

impl DiagonalCircuit {
    pub fn new(field: Field, n: usize, terms: Vec<(Vec<u64>, u32)>) -> Result<DiagonalCircuit> {
        for (coeffs, _) in &terms {
            if coeffs.len() != n + 1 {
                return Err(Error::InvalidInput(format!(
                    "affine form has {} coefficients, expected {}",
                    coeffs.len(),
                    n + 1
                )));
            }
        }
        Ok(DiagonalCircuit { field, n, terms })
    }

    fn linear_form(&self, coeffs: &[u64]) -> Result<SparsePoly> {
        let f = self.field;
        let mut l = SparsePoly::constant(f, self.n, f.elt(coeffs[0] as i128));
        for j in 0..self.n {
            l = l.add(&SparsePoly::var(f, self.n, j).scale(f.elt(coeffs[j + 1] as i128)))?;
        }
        Ok(l)
    }

    /// Exact expansion of `sum_i L_i^{d_i}`.
    pub fn expand(&self) -> Result<SparsePoly> {
        let f = self.field;
        let mut out = SparsePoly::zero(f, self.n);
        for (coeffs, power) in &self.terms {
            let l = self.linear_form(coeffs)?;
            let mut pw = SparsePoly::constant(f, self.n, f.one());
            for _ in 0..*power {
                pw = pw.mul(&l)?;
            }
            out = out.add(&pw)?;
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[Felt]) -> Result<Felt> {
        if point.len() != self.n {
            return Err(Error::ArityMismatch { expected: self.n, got: point.len() });
        }
        let f = self.field;
        let mut acc = f.zero();
        for (coeffs, power) in &self.terms {
            let mut l = f.elt(coeffs[0] as i128);
            for (j, &x) in point.iter().enumerate() {
                l = l + f.elt(coeffs[j + 1] as i128) * x;
            }
            acc = acc + l.pow(*power as u64);
        }
        Ok(acc)
    }
}

/// Dimension of the span of all Hasse derivatives of f, by exact elimination
/// on their coefficient vectors.
pub fn partial_derivative_dim(f: &SparsePoly) -> Result<usize> {
    if f.is_zero() {
        return Ok(0);
    }
    let n = f.arity();
    let degs: Vec<u32> = (0..n).map(|i| f.degree_in_var(i)).collect();
    let universe: usize = degs
        .iter()
        .map(|&d| d as usize + 1)
        .try_fold(1usize, |a, b| a.checked_mul(b))
        .ok_or(Error::BudgetExceeded(term_budget()))?;
    if universe > term_budget() {
        return Err(Error::BudgetExceeded(term_budget()));
    }
    // monomial basis: every exponent vector dividing a monomial of f
    let mut basis: Vec<Vec<u32>> = Vec::new();
    let mut index = std::collections::BTreeMap::new();
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let field = f.field();
    let mut b = vec![0u32; n];
    loop {
        let deriv = f.hasse_derivative(&b)?;
        if !deriv.is_zero() {
            let mut row_terms: Vec<(Vec<u32>, u64)> = Vec::new();
            for (e, c) in deriv.terms() {
                let idx = *index.entry(e.clone()).or_insert_with(|| {
                    basis.push(e.clone());
                    basis.len() - 1
                });
                row_terms.push((vec![idx as u32], c.value()));
            }
            let mut row = vec![0u64; basis.len()];
            for (idx, c) in row_terms {
                row[idx[0] as usize] = c;
            }
            rows.push(row);
        }
        // next exponent vector in the grid
        let mut i = 0;
        loop {
            if i == n {
                let width = basis.len();
                for row in &mut rows {
                    row.resize(width, 0);
                }
                let m = Mat::from_rows(field, &rows);
                return Ok(m.rank());
            }
            if b[i] < degs[i] {
                b[i] += 1;
                break;
            }
            b[i] = 0;
            i += 1;
        }
    }
}

/// The kinds of random test instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Roabp,
    Commutative,
    Smabp,
    Diagonal,
}

pub enum Model {
    Roabp(Roabp),
    Smabp(Smabp),
    Diagonal(DiagonalCircuit),
}

fn rand_unipoly(f: Field, d: u32, rng: &mut ChaCha8Rng) -> UniPoly {
    let coeffs = (0..d as usize).map(|_| rng.gen_range(0..f.modulus())).collect();
    UniPoly::from_coeffs(f, coeffs)
}

/// Deterministic pseudo-random ROABP with degree-<d entries under the given
/// order.
pub fn random_roabp(
    f: Field,
    n: usize,
    d: u32,
    r: usize,
    order: Vec<usize>,
    seed: u64,
) -> Result<Roabp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = (0..n)
        .map(|_| (0..r * r).map(|_| rand_unipoly(f, d, &mut rng)).collect())
        .collect();
    let left = (0..r).map(|_| f.elt(rng.gen_range(0..f.modulus()) as i128)).collect();
    let right = (0..r).map(|_| f.elt(rng.gen_range(0..f.modulus()) as i128)).collect();
    Roabp::new(f, d, r, order, layers, left, right)
}

/// Commutative test instance: simultaneously diagonal layers, so every layer
/// order computes the same polynomial and the program is a width-r ROABP in
/// every variable order.
pub fn random_commutative_roabp(
    f: Field,
    n: usize,
    d: u32,
    r: usize,
    seed: u64,
) -> Result<Roabp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = UniPoly::zero(f);
    let layers = (0..n)
        .map(|_| {
            let mut layer = vec![zero.clone(); r * r];
            for i in 0..r {
                layer[i * r + i] = rand_unipoly(f, d, &mut rng);
            }
            layer
        })
        .collect();
    let left = (0..r).map(|_| f.elt(rng.gen_range(0..f.modulus()) as i128)).collect();
    let right = (0..r).map(|_| f.elt(rng.gen_range(0..f.modulus()) as i128)).collect();
    Roabp::new(f, d, r, (0..n).collect(), layers, left, right)
}

pub fn random_smabp(f: Field, sets: usize, n: usize, r: usize, seed: u64) -> Result<Smabp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = (0..sets)
        .map(|_| {
            (0..r * r)
                .map(|_| (0..n).map(|_| rng.gen_range(0..f.modulus())).collect())
                .collect()
        })
        .collect();
    Smabp::new(f, n, r, layers)
}

pub fn random_diagonal(f: Field, n: usize, d: u32, s: usize, seed: u64) -> Result<DiagonalCircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = (0..s)
        .map(|_| {
            let coeffs = (0..n + 1).map(|_| rng.gen_range(0..f.modulus())).collect();
            (coeffs, rng.gen_range(1..=d))
        })
        .collect();
    DiagonalCircuit::new(f, n, terms)
}

pub fn random_model(
    kind: ModelKind,
    f: Field,
    n: usize,
    d: u32,
    r: usize,
    seed: u64,
) -> Result<Model> {
    match kind {
        ModelKind::Roabp => Ok(Model::Roabp(random_roabp(f, n, d, r, (0..n).collect(), seed)?)),
        ModelKind::Commutative => Ok(Model::Roabp(random_commutative_roabp(f, n, d, r, seed)?)),
        ModelKind::Smabp => Ok(Model::Smabp(random_smabp(f, n, d as usize, r, seed)?)),
        ModelKind::Diagonal => Ok(Model::Diagonal(random_diagonal(f, n, d, r, seed)?)),
    }
}
