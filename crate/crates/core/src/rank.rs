//! Rank machinery: derivative matrices, rank concentration, Wronskians, the
//! transfer matrix of the shift map, rank condensers built from codes, the
//! partial-ID lemma, isolating differential operators, and the greedy
//! minimum-weight basis.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::field::{Field, Felt};
use crate::linalg::Mat;
use crate::poly::{SparsePoly, UniPoly};
use crate::{floor_lg, term_budget, Error, Result};

/// All exponent vectors in `{0..d-1}^n`, in lexicographic order.
pub fn grid_exponents(n: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    loop {
        out.push(cur.clone());
        // lex successor: bump the rightmost coordinate
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] + 1 < d {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Number of nonzero entries.
pub fn support(e: &[u32]) -> usize {
    e.iter().filter(|&&x| x != 0).count()
}

/// Matrix of Hasse derivatives: entry (a, i) = d_{x^a}(f_i)(alpha).
#[derive(Debug, Clone)]
pub struct DerivMatrix {
    pub rows: Vec<Vec<u32>>,
    pub mat: Mat,
    pub anchor: Vec<Felt>,
}

pub fn deriv_matrix(
    fvec: &[SparsePoly],
    rows: &[Vec<u32>],
    alpha: &[Felt],
) -> Result<DerivMatrix> {
    assert!(!fvec.is_empty(), "empty polynomial vector");
    let field = fvec[0].field();
    let n = fvec[0].arity();
    for f in fvec {
        if f.arity() != n {
            return Err(Error::ArityMismatch { expected: n, got: f.arity() });
        }
    }
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            if a == b {
                return Err(Error::InvalidInput("duplicate derivative rows".into()));
            }
        }
    }
    let mut mat = Mat::zeros(field, rows.len(), fvec.len());
    for (ri, a) in rows.iter().enumerate() {
        for (ci, f) in fvec.iter().enumerate() {
            let v = f.hasse_derivative(a)?.eval(alpha)?;
            mat.set(ri, ci, v);
        }
    }
    Ok(DerivMatrix { rows: rows.to_vec(), mat, anchor: alpha.to_vec() })
}

/// True iff the support-<=ell derivative rows already span all derivatives of
/// the vector at alpha, over the full `{0..d-1}^n` row grid.
pub fn is_rank_concentrated(
    fvec: &[SparsePoly],
    ell: usize,
    alpha: &[Felt],
    d: u32,
) -> Result<bool> {
    assert!(!fvec.is_empty(), "empty polynomial vector");
    let n = fvec[0].arity();
    for f in fvec {
        let ind = f.individual_degree();
        if ind >= d {
            return Err(Error::DegreeTooLarge { got: ind, bound: d });
        }
    }
    let universe = (d as usize)
        .checked_pow(n as u32)
        .filter(|&u| u <= term_budget())
        .ok_or(Error::BudgetExceeded(term_budget()))?;
    let _ = universe;
    let rows = grid_exponents(n, d);
    let dm = deriv_matrix(fvec, &rows, alpha)?;
    let full_rank = dm.mat.rank();
    let small: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, a)| support(a) <= ell)
        .map(|(i, _)| i)
        .collect();
    Ok(dm.mat.select_rows(&small).rank() == full_rank)
}

/// Rank over F(t) of the Wronskian-style matrix with entries
/// d_{x^i}(f_j)(t), i < r, decided by evaluating t at r*d + 1 points.
///
/// Every r x r minor is a polynomial in t of degree at most r*d, so a minor
/// that vanishes at all r*d + 1 points is identically zero; the maximum
/// evaluated rank is therefore the exact rank over F(t). Requires
/// characteristic > r*d.
pub fn wronskian_rank(fs: &[UniPoly]) -> Result<usize> {
    assert!(!fs.is_empty(), "empty polynomial list");
    let field = fs[0].field();
    let r = fs.len();
    let d = fs.iter().map(|f| f.degree() as u64).max().unwrap_or(0);
    let need = r as u64 * d + 1;
    if field.modulus() <= r as u64 * d {
        return Err(Error::FieldTooSmall { p: field.modulus(), need });
    }
    let derivs: Vec<Vec<UniPoly>> = fs
        .iter()
        .map(|f| (0..r as u32).map(|i| f.hasse_derivative(i)).collect())
        .collect();
    let mut best = 0;
    for t0 in 0..need {
        let t = field.elt(t0 as i128);
        let mut m = Mat::zeros(field, r, r);
        for (j, col) in derivs.iter().enumerate() {
            for (i, dij) in col.iter().enumerate() {
                m.set(i, j, dij.eval(t));
            }
        }
        best = best.max(m.rank());
        if best == r {
            break;
        }
    }
    Ok(best)
}

/// Which derivative rows of the transfer matrix to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFilter {
    All,
    SupportAtMost(usize),
}

fn filtered_rows(n: usize, d: u32, filter: RowFilter) -> Vec<Vec<u32>> {
    grid_exponents(n, d)
        .into_iter()
        .filter(|a| match filter {
            RowFilter::All => true,
            RowFilter::SupportAtMost(s) => support(a) <= s,
        })
        .collect()
}

/// The transfer matrix of the shift map at a concrete point:
/// T_{a,b} = binom(b, a) t^{b-a}, rows filtered, columns all of {0..d-1}^n.
pub fn transfer_matrix_point(
    field: Field,
    n: usize,
    d: u32,
    filter: RowFilter,
    t: &[Felt],
) -> Result<(Vec<Vec<u32>>, Mat)> {
    assert!(d >= 1, "degree bound must be positive");
    if t.len() != n {
        return Err(Error::ArityMismatch { expected: n, got: t.len() });
    }
    let rows = filtered_rows(n, d, filter);
    let cols = grid_exponents(n, d);
    let mut m = Mat::zeros(field, rows.len(), cols.len());
    for (ri, a) in rows.iter().enumerate() {
        'col: for (ci, b) in cols.iter().enumerate() {
            let mut v = field.one();
            for i in 0..n {
                if b[i] < a[i] {
                    continue 'col;
                }
                v = v * field.elt(field.binom_raw(b[i], a[i]) as i128)
                    * t[i].pow((b[i] - a[i]) as u64);
            }
            m.set(ri, ci, v);
        }
    }
    Ok((rows, m))
}

/// The transfer matrix with symbolic t: entries are polynomials in the n
/// t-variables.
pub fn transfer_matrix_symbolic(
    field: Field,
    n: usize,
    d: u32,
    filter: RowFilter,
) -> (Vec<Vec<u32>>, Vec<Vec<SparsePoly>>) {
    assert!(d >= 1, "degree bound must be positive");
    let rows = filtered_rows(n, d, filter);
    let cols = grid_exponents(n, d);
    let entries = rows
        .iter()
        .map(|a| {
            cols.iter()
                .map(|b| {
                    if b.iter().zip(a).any(|(x, y)| x < y) {
                        return SparsePoly::zero(field, n);
                    }
                    let mut c = field.one();
                    for i in 0..n {
                        c = c * field.elt(field.binom_raw(b[i], a[i]) as i128);
                    }
                    let exps: Vec<u32> = b.iter().zip(a).map(|(x, y)| x - y).collect();
                    SparsePoly::monomial(field, n, &exps, c)
                })
                .collect()
        })
        .collect();
    (rows, entries)
}

/// True iff every r-subset of H's columns is linearly independent.
pub fn check_code_distance(h: &Mat, r: usize) -> Result<bool> {
    let m = h.cols();
    if r > m {
        return Err(Error::InvalidInput(format!("r = {} exceeds {} columns", r, m)));
    }
    let mut subsets = 1usize;
    for i in 0..r {
        subsets = subsets
            .checked_mul(m - i)
            .map(|s| s / (i + 1))
            .ok_or(Error::BudgetExceeded(term_budget()))?;
    }
    if subsets > term_budget() {
        return Err(Error::BudgetExceeded(term_budget()));
    }
    let mut pick: Vec<usize> = (0..r).collect();
    loop {
        if h.select_cols(&pick).rank() < r {
            return Ok(false);
        }
        // next combination
        let mut i = r;
        loop {
            if i == 0 {
                return Ok(true);
            }
            i -= 1;
            if pick[i] + 1 <= m - (r - i) {
                pick[i] += 1;
                for j in i + 1..r {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// A rank condenser built from a code: E(t) = Lambda(t)^{-1} H W(t), with
/// Lambda and W diagonals of monomials in `t_arity` variables.
#[derive(Debug, Clone)]
pub struct CondenserSpec {
    pub t_arity: usize,
    /// One monomial per row of H.
    pub lambda: Vec<Vec<u32>>,
    pub h: Mat,
    /// One monomial per column of H.
    pub w: Vec<Vec<u32>>,
    pub r: usize,
}

impl CondenserSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lambda.len() != self.h.rows() || self.w.len() != self.h.cols() {
            return Err(Error::InvalidInput(
                "diagonal lengths must match the parity-check shape".into(),
            ));
        }
        for e in self.lambda.iter().chain(&self.w) {
            if e.len() != self.t_arity {
                return Err(Error::ArityMismatch { expected: self.t_arity, got: e.len() });
            }
        }
        Ok(())
    }

    /// W monomials pairwise distinct (the recipe's load-bearing hypothesis).
    pub fn w_distinct(&self) -> bool {
        for (i, a) in self.w.iter().enumerate() {
            for b in &self.w[i + 1..] {
                if a == b {
                    return false;
                }
            }
        }
        true
    }

    /// E at a concrete point with nonzero coordinates.
    pub fn eval(&self, t: &[Felt]) -> Result<Mat> {
        self.validate()?;
        if t.len() != self.t_arity {
            return Err(Error::ArityMismatch { expected: self.t_arity, got: t.len() });
        }
        let field = self.h.field();
        let mono = |e: &[u32]| -> Felt {
            let mut v = field.one();
            for (i, &exp) in e.iter().enumerate() {
                v = v * t[i].pow(exp as u64);
            }
            v
        };
        let mut out = Mat::zeros(field, self.h.rows(), self.h.cols());
        for i in 0..self.h.rows() {
            let li = mono(&self.lambda[i]).inv()?;
            for j in 0..self.h.cols() {
                out.set(i, j, li * self.h.get(i, j) * mono(&self.w[j]));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub enum CondenseMode {
    /// Evaluate E at this point.
    Point(Vec<Felt>),
    /// Search the cube for a point preserving the rank; seeded.
    SymbolicCert { seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub rank_m: usize,
    pub rank_em: usize,
    pub trials: usize,
    pub cube: Vec<u64>,
    pub point: Option<Vec<u64>>,
}

/// Applies the condenser to M and reports both ranks. In certification mode
/// the minors of Lambda*E*M have per-variable degree at most
/// r*(max deg_i(W)) + r*(max deg_i(Lambda)), so a cube of nonzero values one
/// larger than that bound per variable contains a rank-preserving point
/// whenever one exists; random points from the cube are tried with a retry
/// count covering failure probability 2^-40.
pub fn condense(spec: &CondenserSpec, m: &Mat, mode: &CondenseMode) -> Result<RankReport> {
    spec.validate()?;
    if m.rows() != spec.h.cols() {
        return Err(Error::InvalidInput(format!(
            "M has {} rows but the condenser expects {}",
            m.rows(),
            spec.h.cols()
        )));
    }
    let field = spec.h.field();
    let rank_m = m.rank();
    match mode {
        CondenseMode::Point(t) => {
            let e = spec.eval(t)?;
            Ok(RankReport {
                rank_m,
                rank_em: e.mul(m).rank(),
                trials: 1,
                cube: vec![],
                point: Some(t.iter().map(|f| f.value()).collect()),
            })
        }
        CondenseMode::SymbolicCert { seed } => {
            let r = spec.r;
            let cube: Vec<u64> = (0..spec.t_arity)
                .map(|i| {
                    let wmax = spec.w.iter().map(|e| e[i]).max().unwrap_or(0) as u64;
                    let lmax = spec.lambda.iter().map(|e| e[i]).max().unwrap_or(0) as u64;
                    r as u64 * (wmax + lmax) + 1
                })
                .collect();
            for &c in &cube {
                // cube entries must be nonzero field elements
                if field.modulus() <= c {
                    return Err(Error::FieldTooSmall { p: field.modulus(), need: c + 1 });
                }
            }
            let min_cube = cube.iter().copied().min().unwrap_or(1).max(2);
            let lg = floor_lg(min_cube) as usize;
            let retries = 40_usize.div_ceil(lg).max(1);
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut best = 0;
            let mut best_point = None;
            let mut trials = 0;
            for _ in 0..retries {
                let t: Vec<Felt> = cube
                    .iter()
                    .map(|&c| field.elt(rng.gen_range(1..=c) as i128))
                    .collect();
                trials += 1;
                let rank_em = spec.eval(&t)?.mul(m).rank();
                if rank_em > best {
                    best = rank_em;
                    best_point = Some(t.iter().map(|f| f.value()).collect());
                }
                if best == rank_m.min(spec.h.rows()) {
                    break;
                }
            }
            Ok(RankReport { rank_m, rank_em: best, trials, cube, point: best_point })
        }
    }
}

/// An element of multiplicative order greater than m, by search.
pub fn element_with_order_gt(field: Field, m: usize) -> Result<Felt> {
    let p = field.modulus();
    for g in 2..p {
        let g = field.elt(g as i128);
        let mut acc = g;
        let mut order = 1usize;
        while acc != field.one() {
            acc = acc * g;
            order += 1;
        }
        if order > m {
            return Ok(g);
        }
    }
    Err(Error::FieldTooSmall { p, need: m as u64 + 2 })
}

/// The dual Reed-Solomon condenser for rank r on m columns:
/// H_{i,j} = omega^{ij} with ord(omega) > m, Lambda = 1, W = diag(t^{j+1}).
pub fn dual_rs_condenser(field: Field, r: usize, m: usize) -> Result<CondenserSpec> {
    let omega = element_with_order_gt(field, m)?;
    let mut h = Mat::zeros(field, r, m);
    for i in 0..r {
        for j in 0..m {
            h.set(i, j, omega.pow((i * j) as u64));
        }
    }
    let spec = CondenserSpec {
        t_arity: 1,
        lambda: vec![vec![0]; r],
        h,
        w: (0..m).map(|j| vec![j as u32 + 1]).collect(),
        r,
    };
    spec.validate()?;
    Ok(spec)
}

/// The partial-ID lemma: for r distinct strings, returns an index i0 and a
/// coordinate set S with |S| <= floor(lg r) such that string i0 restricted
/// to S differs from every other string restricted to S.
///
/// Follows the proof: pick the smallest disagreeing coordinate, keep the
/// symbol class of minimum frequency (ties broken by smallest symbol), and
/// recurse; the kept class has at most half the strings.
pub fn partial_id<S: Ord + Copy>(strings: &[Vec<S>]) -> Result<(usize, Vec<usize>)> {
    let r = strings.len();
    assert!(r >= 1, "need at least one string");
    let len = strings[0].len();
    for s in strings {
        if s.len() != len {
            return Err(Error::InvalidInput("strings have unequal lengths".into()));
        }
    }
    for (i, a) in strings.iter().enumerate() {
        for b in &strings[i + 1..] {
            if a == b {
                return Err(Error::InvalidInput("strings are not distinct".into()));
            }
        }
    }
    let mut active: Vec<usize> = (0..r).collect();
    let mut coords = Vec::new();
    while active.len() > 1 {
        let j = (0..len)
            .find(|&j| active.iter().any(|&i| strings[i][j] != strings[active[0]][j]))
            .expect("distinct strings must disagree somewhere");
        let mut freq: BTreeMap<S, usize> = BTreeMap::new();
        for &i in &active {
            *freq.entry(strings[i][j]).or_insert(0) += 1;
        }
        // minimum frequency, ties to the smallest symbol (BTreeMap order)
        let (&sym, _) = freq
            .iter()
            .min_by_key(|&(sym, &cnt)| (cnt, sym))
            .expect("nonempty");
        active.retain(|&i| strings[i][j] == sym);
        coords.push(j);
    }
    coords.sort_unstable();
    Ok((active[0], coords))
}

/// A finite linear combination of Hasse derivatives.
#[derive(Debug, Clone)]
pub struct DiffOperator {
    field: Field,
    arity: usize,
    terms: BTreeMap<Vec<u32>, u64>,
}

impl DiffOperator {
    pub fn new(field: Field, arity: usize) -> DiffOperator {
        DiffOperator { field, arity, terms: BTreeMap::new() }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, Felt)> + '_ {
        self.terms.iter().map(|(e, &c)| (e, self.field.elt(c as i128)))
    }

    fn insert(&mut self, e: Vec<u32>, c: u64) {
        assert_eq!(e.len(), self.arity, "exponent vector length mismatch");
        if c % self.field.modulus() != 0 {
            self.terms.insert(e, c % self.field.modulus());
        }
    }

    /// The set of variables any derivative order touches.
    pub fn support_vars(&self) -> Vec<usize> {
        let mut vars: Vec<usize> = (0..self.arity)
            .filter(|&i| self.terms.keys().any(|e| e[i] != 0))
            .collect();
        vars.dedup();
        vars
    }

    /// Applies the operator: sum_a c_a d_{x^a}(f)(point).
    pub fn apply(&self, f: &SparsePoly, point: &[Felt]) -> Result<Felt> {
        if f.arity() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: f.arity() });
        }
        let mut acc = self.field.zero();
        for (a, &c) in &self.terms {
            let v = f.hasse_derivative(a)?.eval(point)?;
            acc = acc + self.field.elt(c as i128) * v;
        }
        Ok(acc)
    }
}

/// The univariate operator Delta_j with Delta_j(x^i)(1) = [i = j] for i < d:
/// its coefficients are row j of the inverse of the binomial matrix
/// D_{i,k} = binom(k, i), which is upper triangular with unit diagonal and
/// hence invertible in every characteristic.
pub fn univar_isolating_operator(field: Field, d: u32, j: u32) -> DiffOperator {
    assert!(j < d, "target degree out of range");
    let n = d as usize;
    let mut dm = Mat::zeros(field, n, n);
    for i in 0..n {
        for k in 0..n {
            dm.set(i, k, field.elt(field.binom_raw(k as u32, i as u32) as i128));
        }
    }
    let inv = dm.inverse().expect("unit-triangular matrix is invertible");
    let mut op = DiffOperator::new(field, 1);
    for i in 0..n {
        op.insert(vec![i as u32], inv.get(j as usize, i).value());
    }
    op
}

/// The multivariate isolating operator for a set of distinct monomials:
/// returns the isolated index i0 and an operator Delta with
/// Delta(x^{b_i})(all-ones) = [i = i0], supported on at most floor(lg r)
/// variables.
pub fn isolating_operator(field: Field, monomials: &[Vec<u32>]) -> Result<(usize, DiffOperator)> {
    let r = monomials.len();
    assert!(r >= 1, "need at least one monomial");
    let n = monomials[0].len();
    let (i0, vars) = partial_id(monomials)?;
    let d = monomials.iter().flat_map(|m| m.iter()).max().copied().unwrap_or(0) + 1;
    // tensor the univariate operators for the target's exponents on the
    // fingerprint variables; untouched variables stay at derivative order 0
    let mut terms: Vec<(Vec<u32>, u64)> = vec![(vec![0u32; n], 1)];
    for &v in &vars {
        let uni = univar_isolating_operator(field, d, monomials[i0][v]);
        let mut next = Vec::new();
        for (e, c) in &terms {
            for (ue, uc) in uni.terms() {
                let mut e2 = e.clone();
                e2[v] = ue[0];
                next.push((e2, field.mul_raw(*c, uc.value())));
            }
        }
        terms = next;
    }
    let mut op = DiffOperator::new(field, n);
    for (e, c) in terms {
        op.insert(e, c);
    }
    debug_assert!(op.support_vars().len() <= floor_lg(r.max(1) as u64) as usize);
    Ok((i0, op))
}

/// A family of operators triangularizing a monomial set: returns a
/// permutation perm and operators ops such that
/// ops[i](x^{b_{perm[j]}})(all-ones) = 1 if j = i and 0 if j < i, with
/// ops[i] supported on at most floor(lg(i+1)) variables.
pub fn isolating_family(
    field: Field,
    monomials: &[Vec<u32>],
) -> Result<(Vec<usize>, Vec<DiffOperator>)> {
    let r = monomials.len();
    assert!(r >= 1, "need at least one monomial");
    let mut remaining: Vec<usize> = (0..r).collect();
    let mut perm = vec![0usize; r];
    let mut ops: Vec<Option<DiffOperator>> = vec![None; r];
    while !remaining.is_empty() {
        let subset: Vec<Vec<u32>> = remaining.iter().map(|&i| monomials[i].clone()).collect();
        let (local, op) = isolating_operator(field, &subset)?;
        let pos = remaining.len() - 1;
        perm[pos] = remaining[local];
        ops[pos] = Some(op);
        remaining.remove(local);
    }
    Ok((perm, ops.into_iter().map(|o| o.expect("filled")).collect()))
}

fn lex_lt(a: &[u32], b: &[u32]) -> bool {
    a < b
}

/// Greedy minimum-weight column basis: weights are monomials ordered
/// lexicographically; the block I must carry pairwise distinct weights, all
/// strictly below every weight outside I, and must already span the column
/// space. The result is then the unique minimum-weight independent set of
/// size rank(M), and it lies inside I.
pub fn greedy_min_basis(m: &Mat, weights: &[Vec<u32>], block: &[usize]) -> Result<Vec<usize>> {
    if weights.len() != m.cols() {
        return Err(Error::ArityMismatch { expected: m.cols(), got: weights.len() });
    }
    for &i in block {
        if i >= m.cols() {
            return Err(Error::InvalidInput("block index out of range".into()));
        }
    }
    for (a, &i) in block.iter().enumerate() {
        for &j in &block[a + 1..] {
            if weights[i] == weights[j] {
                return Err(Error::Precondition(
                    "block weights must be pairwise distinct".into(),
                ));
            }
        }
    }
    for j in 0..m.cols() {
        if block.contains(&j) {
            continue;
        }
        for &i in block {
            if !lex_lt(&weights[i], &weights[j]) {
                return Err(Error::Precondition(
                    "block weights must precede all other weights".into(),
                ));
            }
        }
    }
    let rank = m.rank();
    if m.select_cols(block).rank() != rank {
        return Err(Error::Precondition(
            "the declared block must span the column space".into(),
        ));
    }
    let mut order: Vec<usize> = block.to_vec();
    order.sort_by(|&a, &b| weights[a].cmp(&weights[b]));
    let mut chosen: Vec<usize> = Vec::new();
    for j in order {
        if chosen.len() == rank {
            break;
        }
        let mut trial = chosen.clone();
        trial.push(j);
        if m.select_cols(&trial).rank() == trial.len() {
            chosen = trial;
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::random_diagonal;

    fn f101() -> Field {
        Field::new(101).unwrap()
    }

    #[test]
    fn grid_and_support() {
        let g = grid_exponents(2, 2);
        assert_eq!(g, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(support(&[0, 2, 0, 1]), 2);
    }

    #[test]
    fn deriv_matrix_examples() {
        let f = f101();
        // f = x, rows {1, x}, alpha = 0 -> [[0], [1]]
        let x = SparsePoly::var(f, 1, 0);
        let dm = deriv_matrix(&[x], &[vec![0], vec![1]], &[f.zero()]).unwrap();
        assert_eq!(dm.mat.get(0, 0), f.zero());
        assert_eq!(dm.mat.get(1, 0), f.one());

        // f = x^2, rows {1, x, x^2}, alpha = 1 -> (x+1)^2 coefficients
        let x2 = SparsePoly::monomial(f, 1, &[2], f.one());
        let dm = deriv_matrix(&[x2], &[vec![0], vec![1], vec![2]], &[f.one()]).unwrap();
        assert_eq!(dm.mat.get(0, 0), f.one());
        assert_eq!(dm.mat.get(1, 0), f.elt(2));
        assert_eq!(dm.mat.get(2, 0), f.one());
    }

    #[test]
    fn deriv_matrix_matches_shift_coefficients() {
        let f = f101();
        let p = SparsePoly::monomial(f, 2, &[2, 1], f.elt(3))
            .add(&SparsePoly::monomial(f, 2, &[1, 2], f.elt(7)))
            .unwrap();
        let alpha = [f.elt(4), f.elt(9)];
        let rows = grid_exponents(2, 3);
        let dm = deriv_matrix(std::slice::from_ref(&p), &rows, &alpha).unwrap();
        let shifted = p.shift_point(&alpha).unwrap();
        for (ri, a) in rows.iter().enumerate() {
            assert_eq!(dm.mat.get(ri, 0), shifted.coeff(a).unwrap());
        }
    }

    #[test]
    fn concentration_examples() {
        let f = f101();
        let x1x2 = SparsePoly::monomial(f, 2, &[1, 1], f.one());
        // at 0 only the x1x2-derivative is nonzero, so support 1 is not enough
        assert!(!is_rank_concentrated(
            std::slice::from_ref(&x1x2),
            1,
            &[f.zero(), f.zero()],
            2
        )
        .unwrap());
        // the shift to prod (x_i + 1) concentrates at support 0
        assert!(is_rank_concentrated(
            std::slice::from_ref(&x1x2),
            0,
            &[f.one(), f.one()],
            2
        )
        .unwrap());
        // ell = n always concentrates
        assert!(is_rank_concentrated(&[x1x2], 2, &[f.zero(), f.zero()], 2).unwrap());
    }

    #[test]
    fn wronskian_examples() {
        let f = f101();
        assert_eq!(
            wronskian_rank(&[UniPoly::from_coeffs(f, vec![1]), UniPoly::x(f)]).unwrap(),
            2
        );
        assert_eq!(
            wronskian_rank(&[UniPoly::x(f), UniPoly::x(f).scale(f.elt(2))]).unwrap(),
            1
        );
        // characteristic guard: r*d = 2*3 >= 5
        let small = Field::new(5).unwrap();
        let fs = [
            UniPoly::from_coeffs(small, vec![0, 0, 0, 1]),
            UniPoly::from_coeffs(small, vec![1, 1]),
        ];
        assert!(matches!(wronskian_rank(&fs), Err(Error::FieldTooSmall { .. })));
    }

    #[test]
    fn wronskian_matches_coefficient_rank() {
        let f = f101();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let fs: Vec<UniPoly> = (0..3)
                .map(|_| {
                    UniPoly::from_coeffs(f, (0..4).map(|_| rng.gen_range(0..101)).collect())
                })
                .collect();
            let coeff_rows: Vec<Vec<u64>> =
                fs.iter().map(|p| (0..4).map(|i| p.coeff(i)).collect()).collect();
            let want = Mat::from_rows(f, &coeff_rows).rank();
            assert_eq!(wronskian_rank(&fs).unwrap(), want);
        }
    }

    #[test]
    fn transfer_examples() {
        let f = f101();
        // n=1, d=2, symbolic: [[1, t], [0, 1]]
        let (_, sym) = transfer_matrix_symbolic(f, 1, 2, RowFilter::All);
        assert_eq!(sym[0][0], SparsePoly::constant(f, 1, f.one()));
        assert_eq!(sym[0][1], SparsePoly::var(f, 1, 0));
        assert!(sym[1][0].is_zero());
        assert_eq!(sym[1][1], SparsePoly::constant(f, 1, f.one()));

        // n=1, d=3 at t=1: Pascal
        let (_, m) = transfer_matrix_point(f, 1, 3, RowFilter::All, &[f.one()]).unwrap();
        let want = Mat::from_rows(f, &[vec![1, 1, 1], vec![0, 1, 2], vec![0, 0, 1]]);
        assert_eq!(m, want);
    }

    #[test]
    fn transfer_inverse_property() {
        let f = f101();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let a: Vec<Felt> = (0..2).map(|_| f.elt(rng.gen_range(0..101) as i128)).collect();
            let neg: Vec<Felt> = a.iter().map(|&x| -x).collect();
            let (_, t1) = transfer_matrix_point(f, 2, 2, RowFilter::All, &a).unwrap();
            let (_, t2) = transfer_matrix_point(f, 2, 2, RowFilter::All, &neg).unwrap();
            assert_eq!(t1.mul(&t2), Mat::identity(f, 4));
        }
    }

    #[test]
    fn transfer_consistency_with_shift() {
        // coefficient-vector(shift(f, a)) = T(a) . coefficient-vector(f)
        let f = f101();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let cols = grid_exponents(2, 3);
            let mut p = SparsePoly::zero(f, 2);
            for e in &cols {
                let c = rng.gen_range(0..101u64);
                p = p.add(&SparsePoly::monomial(f, 2, e, f.elt(c as i128))).unwrap();
            }
            let a: Vec<Felt> = (0..2).map(|_| f.elt(rng.gen_range(0..101) as i128)).collect();
            let (rows, t) = transfer_matrix_point(f, 2, 3, RowFilter::All, &a).unwrap();
            let shifted = p.shift_point(&a).unwrap();
            let mut coef = Mat::zeros(f, cols.len(), 1);
            for (i, e) in cols.iter().enumerate() {
                coef.set(i, 0, p.coeff(e).unwrap());
            }
            let out = t.mul(&coef);
            for (i, e) in rows.iter().enumerate() {
                assert_eq!(out.get(i, 0), shifted.coeff(e).unwrap());
            }
        }
    }

    #[test]
    fn code_distance_examples() {
        let f = f101();
        assert!(check_code_distance(&Mat::identity(f, 3), 2).unwrap());
        let rep = Mat::from_rows(f, &[vec![1, 1, 0], vec![2, 2, 1]]);
        assert!(!check_code_distance(&rep, 2).unwrap());
        // T_2(1) for n=2, d=2, rows of support <= 1
        let (rows, t2) =
            transfer_matrix_point(f, 2, 2, RowFilter::SupportAtMost(1), &[f.one(), f.one()])
                .unwrap();
        assert_eq!(rows.len(), 3);
        assert!(check_code_distance(&t2, 2).unwrap());
    }

    #[test]
    fn condense_identity_spec() {
        let f = f101();
        let spec = CondenserSpec {
            t_arity: 1,
            lambda: vec![vec![0]; 3],
            h: Mat::identity(f, 3),
            w: (0..3).map(|j| vec![j as u32 + 1]).collect(),
            r: 3,
        };
        let mut m = Mat::zeros(f, 3, 2);
        m.set(0, 0, f.one());
        m.set(1, 1, f.elt(5));
        m.set(2, 0, f.elt(9));
        let rep = condense(&spec, &m, &CondenseMode::SymbolicCert { seed: 1 }).unwrap();
        assert_eq!(rep.rank_m, 2);
        assert_eq!(rep.rank_em, 2);
        // zero matrix stays rank 0
        let rep = condense(&spec, &Mat::zeros(f, 3, 2), &CondenseMode::SymbolicCert { seed: 1 })
            .unwrap();
        assert_eq!(rep.rank_em, 0);
    }

    #[test]
    fn condense_dual_rs() {
        let f = f101();
        let spec = dual_rs_condenser(f, 2, 5).unwrap();
        assert!(spec.w_distinct());
        assert!(check_code_distance(&spec.h, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            // random rank-<=2 matrix: outer-product sum
            let mut m = Mat::zeros(f, 5, 4);
            for _ in 0..2 {
                let u: Vec<u64> = (0..5).map(|_| rng.gen_range(0..101)).collect();
                let v: Vec<u64> = (0..4).map(|_| rng.gen_range(0..101)).collect();
                for i in 0..5 {
                    for j in 0..4 {
                        let add = f.elt((u[i] * v[j]) as i128);
                        m.set(i, j, m.get(i, j) + add);
                    }
                }
            }
            let rep = condense(&spec, &m, &CondenseMode::SymbolicCert { seed: 7 }).unwrap();
            assert_eq!(rep.rank_em, rep.rank_m, "rank must be preserved");
        }
    }

    #[test]
    fn cauchy_binet_oracle() {
        // det(AB) = sum over r-subsets T of det(A|cols T) det(B|rows T)
        let f = f101();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..20 {
            let a_rows: Vec<Vec<u64>> = (0..3)
                .map(|_| (0..4).map(|_| rng.gen_range(0..101)).collect())
                .collect();
            let b_rows: Vec<Vec<u64>> = (0..4)
                .map(|_| (0..3).map(|_| rng.gen_range(0..101)).collect())
                .collect();
            let a = Mat::from_rows(f, &a_rows);
            let b = Mat::from_rows(f, &b_rows);
            let mut total = f.zero();
            for i in 0..4 {
                for j in i + 1..4 {
                    for k in j + 1..4 {
                        let t = [i, j, k];
                        total = total
                            + a.select_cols(&t).det() * b.transpose().select_cols(&t).transpose().det();
                    }
                }
            }
            assert_eq!(a.mul(&b).det(), total);
        }
    }

    #[test]
    fn partial_id_examples() {
        // r = 1 is vacuous
        assert_eq!(partial_id(&[vec![0u8, 0]]).unwrap(), (0, vec![]));
        // {00, 01, 11}: coordinate 1 splits off 11? brute-check validity
        let strings = vec![vec![0u8, 0], vec![0, 1], vec![1, 1]];
        let (i0, s) = partial_id(&strings).unwrap();
        assert!(s.len() <= 1);
        for (i, other) in strings.iter().enumerate() {
            if i != i0 {
                assert!(s.iter().any(|&j| other[j] != strings[i0][j]));
            }
        }
        // {0, 1}
        let (i0, s) = partial_id(&[vec![0u8], vec![1u8]]).unwrap();
        assert_eq!(s, vec![0]);
        assert!(i0 < 2);
        // duplicates rejected
        assert!(partial_id(&[vec![1u8], vec![1u8]]).is_err());
    }

    #[test]
    fn univar_isolating_examples() {
        let f = f101();
        // j = d-1 is the bare top derivative
        let op = univar_isolating_operator(f, 4, 3);
        let ts: Vec<_> = op.terms().collect();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].0, &vec![3]);
        assert_eq!(ts[0].1, f.one());

        // d=3, j=0: 1 - d/dx + d/dx^2
        let op = univar_isolating_operator(f, 3, 0);
        let terms: BTreeMap<Vec<u32>, Felt> = op.terms().map(|(e, c)| (e.clone(), c)).collect();
        assert_eq!(terms[&vec![0]], f.one());
        assert_eq!(terms[&vec![1]], -f.one());
        assert_eq!(terms[&vec![2]], f.one());

        // delta property in F_2, d=4
        let f2 = Field::new(2).unwrap();
        for j in 0..4u32 {
            let op = univar_isolating_operator(f2, 4, j);
            for i in 0..4u32 {
                let xi = SparsePoly::monomial(f2, 1, &[i], f2.one());
                let got = op.apply(&xi, &[f2.one()]).unwrap();
                let want = if i == j { f2.one() } else { f2.zero() };
                assert_eq!(got, want, "char 2, i={}, j={}", i, j);
            }
        }
    }

    #[test]
    fn isolating_family_triangular() {
        let f = f101();
        let monomials = vec![vec![1, 1], vec![1, 0], vec![0, 1], vec![0, 0]];
        let (perm, ops) = isolating_family(f, &monomials).unwrap();
        let ones = [f.one(), f.one()];
        for (i, op) in ops.iter().enumerate() {
            for (j, &mi) in perm.iter().enumerate() {
                let xb = SparsePoly::monomial(f, 2, &monomials[mi], f.one());
                let got = op.apply(&xb, &ones).unwrap();
                if j == i {
                    assert_eq!(got, f.one());
                } else if j < i {
                    assert_eq!(got, f.zero());
                }
            }
            assert!(op.support_vars().len() <= floor_lg(i as u64 + 1) as usize);
        }
    }

    #[test]
    fn greedy_examples() {
        let f = f101();
        // identity with forced weights
        let m = Mat::identity(f, 2);
        let t = greedy_min_basis(&m, &[vec![1], vec![2]], &[0, 1]).unwrap();
        assert_eq!(t, vec![0, 1]);
        // rank 1, lighter column wins
        let m = Mat::from_rows(f, &[vec![1, 1], vec![0, 0]]);
        let t = greedy_min_basis(&m, &[vec![2], vec![1]], &[0, 1]).unwrap();
        assert_eq!(t, vec![1]);
        // precondition violations
        assert!(greedy_min_basis(&m, &[vec![1], vec![1]], &[0, 1]).is_err());
    }

    #[test]
    fn greedy_matches_brute_force() {
        let f = f101();
        // 3-column rank-2 instance; block = all columns with distinct weights
        let m = Mat::from_rows(f, &[vec![1, 2, 3], vec![2, 4, 7]]);
        let weights = vec![vec![1], vec![2], vec![3]];
        let t = greedy_min_basis(&m, &weights, &[0, 1, 2]).unwrap();
        // brute force: all independent pairs, minimum by sorted weight list
        let mut best: Option<(Vec<Vec<u32>>, Vec<usize>)> = None;
        for i in 0..3 {
            for j in i + 1..3 {
                if m.select_cols(&[i, j]).rank() == 2 {
                    let key = vec![weights[i].clone(), weights[j].clone()];
                    if best.as_ref().map_or(true, |(k, _)| key < *k) {
                        best = Some((key, vec![i, j]));
                    }
                }
            }
        }
        assert_eq!(t, best.unwrap().1);
    }

    #[test]
    fn concentration_for_diagonal_circuit() {
        // a shifted diagonal circuit concentrates at low support
        let f = f101();
        let c = random_diagonal(f, 2, 2, 2, 3).unwrap();
        let p = c.expand().unwrap();
        if !p.is_zero() {
            let d = p.individual_degree() + 1;
            assert!(is_rank_concentrated(&[p], 2, &[f.one(), f.one()], d).unwrap());
        }
    }
}
