//! Explicit hitting-set generators: the Shpilka-Volkovich and
//! Klivans-Spielman maps, monomial-map certification, perfect hashing, the
//! hashing generator, merge-and-reduce, and the theorem-level compositions.
//!
//! A generator is a polynomial map from a few seed variables into the n
//! circuit variables. Small maps are materialized; the Klivans-Spielman map
//! interpolates over a prime-sized candidate set and is therefore kept in
//! structured form and evaluated numerically, materializing only after its
//! selector block is fixed.

use std::collections::BTreeMap;

use crate::field::{lagrange_indicator, smallest_prime_at_least, Field, Felt};
use crate::poly::{PolyMap, SparsePoly, UniPoly};
use crate::{floor_lg, term_budget, Error, Result};

/// Value domain of a seed block inside the canonical hitting-set cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Interpolation values 0, 1, 2, ... (or 1, 2, ... when zero must be
    /// avoided); the count follows from the composed degree.
    Field { avoid_zero: bool },
    /// The construction fixes the value set itself: 0..count.
    Candidates(u64),
}

/// A named contiguous run of seed variables.
#[derive(Debug, Clone)]
pub struct Block {
    pub name: String,
    pub start: usize,
    pub len: usize,
    pub domain: Domain,
}

#[derive(Debug, Clone)]
enum Body {
    Explicit(Vec<SparsePoly>),
    /// x_i <- prod_j t_j^(k_j^(i+1) mod prime), the selector block choosing
    /// (k_1..k_m) from the candidate set Z_prime by Lagrange interpolation.
    /// Seed layout: t-block 0..m, s-block m..2m.
    Ks { n: usize, m: usize, prime: u64 },
    /// u * inner, with u at seed index 0 and the inner seeds after it.
    Scaled(Box<GeneratorMap>),
    /// Component-wise sum of maps on disjoint (concatenated) seed blocks.
    Sum(Vec<GeneratorMap>),
}

/// A polynomial map from seed variables to circuit variables, with block
/// layout and per-seed-variable degree bounds.
#[derive(Debug, Clone)]
pub struct GeneratorMap {
    field: Field,
    out_arity: usize,
    blocks: Vec<Block>,
    /// Upper bound on every component's degree in each seed variable.
    degree_profile: Vec<u64>,
    body: Body,
}

impl GeneratorMap {
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn out_arity(&self) -> usize {
        self.out_arity
    }

    pub fn seed_arity(&self) -> usize {
        self.degree_profile.len()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn degree_profile(&self) -> &[u64] {
        &self.degree_profile
    }

    pub fn from_components(
        components: Vec<SparsePoly>,
        blocks: Vec<Block>,
    ) -> Result<GeneratorMap> {
        assert!(!components.is_empty(), "a map needs at least one component");
        let field = components[0].field();
        let seed_arity: usize = blocks.iter().map(|b| b.len).sum();
        for c in &components {
            if c.arity() != seed_arity {
                return Err(Error::ArityMismatch { expected: seed_arity, got: c.arity() });
            }
        }
        let degree_profile = (0..seed_arity)
            .map(|v| components.iter().map(|c| c.degree_in_var(v) as u64).max().unwrap_or(0))
            .collect();
        Ok(GeneratorMap {
            field,
            out_arity: components.len(),
            blocks,
            degree_profile,
            body: Body::Explicit(components),
        })
    }

    /// Exact numeric evaluation at a seed point.
    pub fn eval(&self, seed: &[Felt]) -> Result<Vec<Felt>> {
        if seed.len() != self.seed_arity() {
            return Err(Error::ArityMismatch { expected: self.seed_arity(), got: seed.len() });
        }
        match &self.body {
            Body::Explicit(components) => components.iter().map(|c| c.eval(seed)).collect(),
            Body::Ks { n, m, prime } => {
                let p = *prime;
                let mut ks = Vec::with_capacity(*m);
                for j in 0..*m {
                    let v = seed[*m + j].value();
                    if v >= p {
                        return Err(Error::Precondition(format!(
                            "selector value {} outside the candidate set Z_{}",
                            v, p
                        )));
                    }
                    ks.push(v);
                }
                let mut out = Vec::with_capacity(*n);
                for i in 0..*n {
                    let mut acc = self.field.one();
                    for j in 0..*m {
                        // exponent k_j^(i+1) mod p, computed in Z_p
                        let e = mod_pow(ks[j], i as u64 + 1, p);
                        acc = acc * seed[j].pow(e);
                    }
                    out.push(acc);
                }
                Ok(out)
            }
            Body::Scaled(inner) => {
                let u = seed[0];
                let vals = inner.eval(&seed[1..])?;
                Ok(vals.into_iter().map(|v| v * u).collect())
            }
            Body::Sum(parts) => {
                let mut out = vec![self.field.zero(); self.out_arity];
                let mut off = 0;
                for part in parts {
                    let w = part.seed_arity();
                    let vals = part.eval(&seed[off..off + w])?;
                    for (o, v) in out.iter_mut().zip(vals) {
                        *o = *o + v;
                    }
                    off += w;
                }
                Ok(out)
            }
        }
    }

    /// Materializes the components as sparse polynomials over all seed
    /// variables; errors when the expansion would blow the term budget.
    pub fn components(&self) -> Result<Vec<SparsePoly>> {
        let budget = term_budget();
        match &self.body {
            Body::Explicit(components) => Ok(components.clone()),
            Body::Ks { n, m, prime } => {
                let p = *prime as usize;
                let per_component = p
                    .checked_pow(*m as u32)
                    .and_then(|t| t.checked_mul(p.pow(*m as u32)))
                    .ok_or(Error::BudgetExceeded(budget))?;
                if per_component.saturating_mul(*n) > budget {
                    return Err(Error::BudgetExceeded(budget));
                }
                let f = self.field;
                let arity = 2 * m;
                let points: Vec<Felt> = (0..p as u64).map(|v| f.elt(v as i128)).collect();
                let indicators: Vec<UniPoly> = (0..p)
                    .map(|k| lagrange_indicator(&points, k))
                    .collect::<Result<_>>()?;
                let mut out = Vec::with_capacity(*n);
                for i in 0..*n {
                    let mut comp = SparsePoly::zero(f, arity);
                    let mut choice = vec![0u64; *m];
                    loop {
                        // term: prod_j t_j^(k_j^(i+1) mod p) ind_{k_j}(s_j)
                        let mut term = SparsePoly::constant(f, arity, f.one());
                        for (j, &k) in choice.iter().enumerate() {
                            let e = mod_pow(k, i as u64 + 1, *prime);
                            let mut exps = vec![0u32; arity];
                            exps[j] = e as u32;
                            term = term.mul(&SparsePoly::monomial(f, arity, &exps, f.one()))?;
                            term = term.mul(&indicators[k as usize].to_sparse(arity, m + j))?;
                        }
                        comp = comp.add(&term)?;
                        let mut j = 0;
                        loop {
                            if j == *m {
                                break;
                            }
                            choice[j] += 1;
                            if choice[j] < *prime {
                                break;
                            }
                            choice[j] = 0;
                            j += 1;
                        }
                        if j == *m {
                            break;
                        }
                    }
                    out.push(comp);
                }
                Ok(out)
            }
            Body::Scaled(inner) => {
                let inner_comps = inner.components()?;
                let f = self.field;
                let arity = self.seed_arity();
                let u = SparsePoly::var(f, arity, 0);
                inner_comps
                    .into_iter()
                    .map(|c| embed(&c, arity, 1)?.mul(&u))
                    .collect()
            }
            Body::Sum(parts) => {
                let f = self.field;
                let arity = self.seed_arity();
                let mut out = vec![SparsePoly::zero(f, arity); self.out_arity];
                let mut off = 0;
                for part in parts {
                    let comps = part.components()?;
                    for (o, c) in out.iter_mut().zip(comps) {
                        *o = o.add(&embed(&c, arity, off)?)?;
                    }
                    off += part.seed_arity();
                }
                Ok(out)
            }
        }
    }

    /// The materialized components as a composable map.
    pub fn poly_map(&self) -> Result<PolyMap> {
        PolyMap::new(self.components()?)
    }

    /// Fixes some seed variables to values, returning a map over the rest.
    /// Supported on explicit bodies and on the Klivans-Spielman body when the
    /// assignment covers exactly its selector block.
    pub fn fix_vars(&self, assign: &BTreeMap<usize, Felt>) -> Result<GeneratorMap> {
        for &i in assign.keys() {
            if i >= self.seed_arity() {
                return Err(Error::ArityMismatch { expected: self.seed_arity(), got: i + 1 });
            }
        }
        let remap_blocks = |blocks: &[Block]| -> Vec<Block> {
            let mut out = Vec::new();
            let mut new_start = 0;
            for b in blocks {
                let kept = (b.start..b.start + b.len)
                    .filter(|i| !assign.contains_key(i))
                    .count();
                if kept > 0 {
                    out.push(Block {
                        name: b.name.clone(),
                        start: new_start,
                        len: kept,
                        domain: b.domain,
                    });
                    new_start += kept;
                }
            }
            out
        };
        match &self.body {
            Body::Explicit(components) => {
                let comps: Vec<SparsePoly> = components
                    .iter()
                    .map(|c| c.substitute(assign))
                    .collect::<Result<_>>()?;
                GeneratorMap::from_components(comps, remap_blocks(&self.blocks))
            }
            Body::Ks { n, m, prime } => {
                let expected: Vec<usize> = (*m..2 * m).collect();
                let keys: Vec<usize> = assign.keys().copied().collect();
                if keys != expected {
                    return Err(Error::Precondition(
                        "the Klivans-Spielman map can only fix its whole selector block".into(),
                    ));
                }
                let f = self.field;
                let mut ks = Vec::with_capacity(*m);
                for j in 0..*m {
                    let v = assign[&(m + j)].value();
                    if v >= *prime {
                        return Err(Error::Precondition(format!(
                            "selector value {} outside the candidate set Z_{}",
                            v, prime
                        )));
                    }
                    ks.push(v);
                }
                let comps = (0..*n)
                    .map(|i| {
                        let exps: Vec<u32> = ks
                            .iter()
                            .map(|&k| mod_pow(k, i as u64 + 1, *prime) as u32)
                            .collect();
                        SparsePoly::monomial(f, *m, &exps, f.one())
                    })
                    .collect();
                GeneratorMap::from_components(comps, remap_blocks(&self.blocks))
            }
            _ => Err(Error::Precondition(
                "fix_vars is only supported on explicit and Klivans-Spielman bodies".into(),
            )),
        }
    }

    /// Keeps only the first n output components (dropping padding outputs).
    pub fn truncate_outputs(&self, n: usize) -> Result<GeneratorMap> {
        if n > self.out_arity {
            return Err(Error::InvalidInput("cannot extend outputs".into()));
        }
        let mut g = self.clone();
        g.out_arity = n;
        g.body = match g.body {
            Body::Explicit(mut c) => {
                c.truncate(n);
                Body::Explicit(c)
            }
            Body::Scaled(inner) => Body::Scaled(Box::new(inner.truncate_outputs(n)?)),
            Body::Sum(parts) => Body::Sum(
                parts
                    .into_iter()
                    .map(|p| p.truncate_outputs(n))
                    .collect::<Result<_>>()?,
            ),
            Body::Ks { m, prime, .. } => Body::Ks { n, m, prime },
        };
        Ok(g)
    }

    /// The sum of two maps on disjoint (concatenated) seed blocks.
    pub fn sum(self, other: GeneratorMap) -> Result<GeneratorMap> {
        if self.out_arity != other.out_arity {
            return Err(Error::ArityMismatch { expected: self.out_arity, got: other.out_arity });
        }
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.modulus(), other.field.modulus()));
        }
        let field = self.field;
        let out_arity = self.out_arity;
        let mut blocks = Vec::new();
        let mut degree_profile = Vec::new();
        let mut off = 0;
        for part in [&self, &other] {
            for b in &part.blocks {
                blocks.push(Block {
                    name: b.name.clone(),
                    start: b.start + off,
                    len: b.len,
                    domain: b.domain,
                });
            }
            degree_profile.extend_from_slice(&part.degree_profile);
            off += part.seed_arity();
        }
        Ok(GeneratorMap {
            field,
            out_arity,
            blocks,
            degree_profile,
            body: Body::Sum(vec![self, other]),
        })
    }
}

fn mod_pow(base: u64, exp: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    let mut b = base % p;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Re-embeds a polynomial into a wider arity with its variables shifted to
/// start at `offset`.
fn embed(p: &SparsePoly, arity: usize, offset: usize) -> Result<SparsePoly> {
    let f = p.field();
    let mut out = SparsePoly::zero(f, arity);
    for (e, c) in p.terms() {
        let mut exps = vec![0u32; arity];
        exps[offset..offset + e.len()].copy_from_slice(e);
        out = out.add(&SparsePoly::monomial(f, arity, &exps, c))?;
    }
    Ok(out)
}

/// The Shpilka-Volkovich map on n outputs with l (y, z) pairs:
/// component k is sum_j ind{z_j = xi_(k+1)} y_j, with the distinct constants
/// xi_0..xi_n chosen as 0..n and the indicator realized by Lagrange
/// interpolation through them. Fixing z_j to xi_0 = 0 zeroes the copy out.
pub fn sv_generator(field: Field, n: usize, l: usize) -> Result<GeneratorMap> {
    if field.modulus() <= n as u64 {
        return Err(Error::FieldTooSmall { p: field.modulus(), need: n as u64 + 1 });
    }
    assert!(l >= 1, "need at least one seed pair");
    let arity = 2 * l;
    let points: Vec<Felt> = (0..=n as u64).map(|v| field.elt(v as i128)).collect();
    let mut components = Vec::with_capacity(n);
    for k in 0..n {
        let ind = lagrange_indicator(&points, k + 1)?;
        let mut comp = SparsePoly::zero(field, arity);
        for j in 0..l {
            let term = ind.to_sparse(arity, l + j).mul(&SparsePoly::var(field, arity, j))?;
            comp = comp.add(&term)?;
        }
        components.push(comp);
    }
    GeneratorMap::from_components(
        components,
        vec![
            Block { name: "y".into(), start: 0, len: l, domain: Domain::Field { avoid_zero: false } },
            Block { name: "z".into(), start: l, len: l, domain: Domain::Candidates(n as u64 + 1) },
        ],
    )
}

/// The Klivans-Spielman map for n variables and monomial sparsity s with m
/// t-variables: x_i maps to prod_j t_j^(k_j^i mod p) where p is the smallest
/// prime at least 2ns^2 + 1, and the selector block interpolates the choices
/// of k over the candidate set Z_p. The prime bound makes the pairwise
/// collision union bound over at most s^2 monomial pairs literally sound.
pub fn ks_generator(field: Field, n: usize, _d: u32, s: u64, m: usize) -> Result<GeneratorMap> {
    assert!(m >= 1, "need at least one t-variable");
    let prime = smallest_prime_at_least(2 * n as u64 * s * s + 1);
    if field.modulus() < prime {
        return Err(Error::FieldTooSmall { p: field.modulus(), need: prime });
    }
    let blocks = vec![
        Block { name: "t".into(), start: 0, len: m, domain: Domain::Field { avoid_zero: true } },
        Block { name: "s".into(), start: m, len: m, domain: Domain::Candidates(prime) },
    ];
    Ok(GeneratorMap {
        field,
        out_arity: n,
        blocks,
        degree_profile: vec![prime - 1; 2 * m],
        body: Body::Ks { n, m, prime },
    })
}

/// The prime underlying a Klivans-Spielman body, if any.
pub fn ks_prime(g: &GeneratorMap) -> Option<u64> {
    match &g.body {
        Body::Ks { prime, .. } => Some(*prime),
        _ => None,
    }
}

/// Number of monomials on n variables with individual degree < d and total
/// degree < total, the monomial universe of the theorem-level maps.
pub fn monomial_count(n: usize, d: u32, total: u32) -> u64 {
    // dp over variables of the total-degree distribution
    let mut counts = vec![0u64; total as usize];
    counts[0] = 1;
    for _ in 0..n {
        let mut next = vec![0u64; total as usize];
        for (t, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for e in 0..d as usize {
                if t + e < total as usize {
                    next[t + e] = next[t + e].saturating_add(c);
                }
            }
        }
        counts = next;
    }
    counts.iter().sum()
}

/// What a map must do to count as a monomial map.
#[derive(Debug, Clone, Copy)]
pub enum MapKind {
    /// For every variable subset S with |S| <= l, some selector value sends
    /// all individual-degree-< d monomials on S to nonzero distinct
    /// monomials.
    LWise { l: usize, d: u32 },
    /// One selector value works for all total-degree-< total monomials.
    TotalDegree { total: u32 },
}

fn selector_vars(g: &GeneratorMap) -> Vec<usize> {
    g.blocks()
        .iter()
        .filter(|b| b.name == "z" || b.name == "s")
        .flat_map(|b| b.start..b.start + b.len)
        .collect()
}

fn selector_cube(g: &GeneratorMap) -> Vec<(usize, u64)> {
    g.blocks()
        .iter()
        .filter(|b| b.name == "z" || b.name == "s")
        .flat_map(|b| {
            let count = match b.domain {
                Domain::Candidates(c) => c,
                Domain::Field { .. } => g.field().modulus(),
            };
            (b.start..b.start + b.len).map(move |v| (v, count))
        })
        .collect()
}

/// Images of the given monomials under a fixed (explicit, all-monomial)
/// map restricted to the variables they touch; None when some needed
/// component is not a single nonzero monomial.
fn monomial_images(
    comps: &[SparsePoly],
    monomials: &[Vec<u32>],
) -> Option<Vec<Vec<u64>>> {
    let seed_arity = comps.first().map_or(0, |c| c.arity());
    let mut comp_exps: Vec<Option<Vec<u32>>> = vec![None; comps.len()];
    let mut images = Vec::with_capacity(monomials.len());
    for mono in monomials {
        let mut img = vec![0u64; seed_arity];
        for (i, &a) in mono.iter().enumerate() {
            if a == 0 {
                continue;
            }
            if comp_exps[i].is_none() {
                if comps[i].num_terms() != 1 {
                    return None;
                }
                let (e, _) = comps[i].terms().next().expect("one term");
                comp_exps[i] = Some(e.clone());
            }
            for (slot, &ce) in img.iter_mut().zip(comp_exps[i].as_ref().expect("set")) {
                *slot += a as u64 * ce as u64;
            }
        }
        images.push(img);
    }
    Some(images)
}

fn all_distinct(images: &[Vec<u64>]) -> bool {
    let mut sorted = images.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}

/// Exhaustively certifies a map as a monomial map of the given kind by
/// substituting every selector value and comparing exponent images.
pub fn certify_monomial_map(g: &GeneratorMap, kind: MapKind) -> Result<bool> {
    let field = g.field();
    let sel = selector_vars(g);
    let cube = selector_cube(g);
    let budget = term_budget();
    let cube_size: u64 = cube.iter().map(|&(_, c)| c).try_fold(1u64, |a, b| {
        a.checked_mul(b)
    }).ok_or(Error::BudgetExceeded(budget))?;
    if cube_size as usize > budget {
        return Err(Error::BudgetExceeded(budget));
    }
    let n = g.out_arity();

    let try_fix = |choice: &[u64]| -> Result<Option<Vec<SparsePoly>>> {
        let assign: BTreeMap<usize, Felt> = sel
            .iter()
            .zip(choice)
            .map(|(&v, &c)| (v, field.elt(c as i128)))
            .collect();
        match g.fix_vars(&assign) {
            Ok(fixed) => Ok(Some(fixed.components()?)),
            Err(Error::Precondition(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };

    let universes: Vec<Vec<Vec<u32>>> = match kind {
        MapKind::LWise { l, d } => {
            // one universe per subset S of size <= l: all ind-deg-<d
            // monomials supported on S (including the constant)
            let mut subsets: Vec<Vec<usize>> = vec![vec![]];
            for i in 0..n {
                let mut extra = Vec::new();
                for s in &subsets {
                    if s.len() < l {
                        let mut s2 = s.clone();
                        s2.push(i);
                        extra.push(s2);
                    }
                }
                subsets.extend(extra);
            }
            subsets
                .into_iter()
                .map(|s| {
                    let mut monos = vec![vec![0u32; n]];
                    for &i in &s {
                        let mut next = Vec::new();
                        for m in &monos {
                            for e in 0..d {
                                let mut m2 = m.clone();
                                m2[i] = e;
                                next.push(m2);
                            }
                        }
                        monos = next;
                    }
                    monos
                })
                .collect()
        }
        MapKind::TotalDegree { total } => {
            let mut monos: Vec<Vec<u32>> = vec![vec![]];
            for _ in 0..n {
                let mut next = Vec::new();
                for m in &monos {
                    let used: u32 = m.iter().sum();
                    for e in 0..total.saturating_sub(used) {
                        let mut m2 = m.clone();
                        m2.push(e);
                        next.push(m2);
                    }
                }
                monos = next;
            }
            vec![monos]
        }
    };

    'universe: for universe in &universes {
        let mut choice = vec![0u64; cube.len()];
        loop {
            if let Some(comps) = try_fix(&choice)? {
                if let Some(images) = monomial_images(&comps, universe) {
                    if all_distinct(&images) {
                        continue 'universe;
                    }
                }
            }
            // next selector assignment
            let mut j = 0;
            loop {
                if j == cube.len() {
                    return Ok(false);
                }
                choice[j] += 1;
                if choice[j] < cube[j].1 {
                    break;
                }
                choice[j] = 0;
                j += 1;
            }
            if j == cube.len() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A family of functions [n] -> [m].
#[derive(Debug, Clone)]
pub struct HashFamily {
    pub n: usize,
    pub m: usize,
    pub members: Vec<Vec<usize>>,
}

impl HashFamily {
    /// True iff every size-<= l subset of [n] is injective under some member.
    pub fn is_perfect(&self, l: usize) -> bool {
        let mut subset: Vec<usize> = Vec::new();
        self.check_subsets(&mut subset, 0, l)
    }

    fn check_subsets(&self, subset: &mut Vec<usize>, from: usize, l: usize) -> bool {
        if subset.len() == l {
            return self.separates(subset);
        }
        if !self.separates(subset) {
            return false;
        }
        for i in from..self.n {
            subset.push(i);
            let ok = self.check_subsets(subset, i + 1, l);
            subset.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    fn separates(&self, subset: &[usize]) -> bool {
        if subset.len() <= 1 {
            return true;
        }
        self.members.iter().any(|h| {
            let mut vals: Vec<usize> = subset.iter().map(|&i| h[i]).collect();
            vals.sort_unstable();
            vals.windows(2).all(|w| w[0] != w[1])
        })
    }
}

fn ceil_lg(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        floor_lg(x - 1) + 1
    }
}

/// Pairwise-independence based perfect hash family with range
/// m = 2^ceil(lg l^2): all affine maps i -> ((a i + b) mod q) mod m with q
/// the smallest prime >= n.
pub fn pairwise_hash_family(n: usize, l: usize) -> HashFamily {
    let ll = (l as u64 * l as u64).max(1);
    let m = 1usize << ceil_lg(ll);
    let q = smallest_prime_at_least(n.max(2) as u64);
    let mut members = Vec::new();
    for a in 1..q {
        for b in 0..q {
            members.push((0..n).map(|i| (((a * i as u64 + b) % q) as usize) % m).collect());
        }
    }
    HashFamily { n, m, members }
}

/// The hashing generator: component i is
/// sum_h ind{z_h(i) = xi_(i+1)} y_h(i) ind{u = eta_h}, over seed blocks
/// y (m), z (m), u (1), with eta_h = 0, 1, ... in family order.
pub fn hashing_generator(field: Field, n: usize, fam: &HashFamily) -> Result<GeneratorMap> {
    let need = (fam.members.len() as u64).max(n as u64) + 1;
    if field.modulus() < need {
        return Err(Error::FieldTooSmall { p: field.modulus(), need });
    }
    let m = fam.m;
    let arity = 2 * m + 1;
    let xi: Vec<Felt> = (0..=n as u64).map(|v| field.elt(v as i128)).collect();
    let eta: Vec<Felt> = (0..fam.members.len() as u64).map(|v| field.elt(v as i128)).collect();
    let mut components = Vec::with_capacity(n);
    for i in 0..n {
        let z_ind = lagrange_indicator(&xi, i + 1)?;
        let mut comp = SparsePoly::zero(field, arity);
        for (hi, h) in fam.members.iter().enumerate() {
            let b = h[i];
            let u_ind = lagrange_indicator(&eta, hi)?;
            let term = z_ind
                .to_sparse(arity, m + b)
                .mul(&SparsePoly::var(field, arity, b))?
                .mul(&u_ind.to_sparse(arity, 2 * m))?;
            comp = comp.add(&term)?;
        }
        components.push(comp);
    }
    GeneratorMap::from_components(
        components,
        vec![
            Block { name: "y".into(), start: 0, len: m, domain: Domain::Field { avoid_zero: false } },
            Block { name: "z".into(), start: m, len: m, domain: Domain::Candidates(n as u64 + 1) },
            Block {
                name: "u".into(),
                start: 2 * m,
                len: 1,
                domain: Domain::Candidates(fam.members.len() as u64),
            },
        ],
    )
}

/// Merge-and-reduce: sum over i in [lg N] of u_i * base(t_i, s_i), each copy
/// on fresh seed variables. N must be a power of two.
pub fn merge_reduce_generator(
    field: Field,
    big_n: usize,
    base: &GeneratorMap,
) -> Result<GeneratorMap> {
    if big_n == 0 || !big_n.is_power_of_two() {
        return Err(Error::Precondition(format!("N = {} is not a power of two", big_n)));
    }
    if base.out_arity() != big_n {
        return Err(Error::ArityMismatch { expected: big_n, got: base.out_arity() });
    }
    let n = floor_lg(big_n as u64) as usize;
    if n == 0 {
        // the empty sum: the zero map with no seed variables
        let comps = vec![SparsePoly::zero(field, 0); big_n];
        return GeneratorMap::from_components(comps, vec![]);
    }
    let scaled = |i: usize| -> GeneratorMap {
        let mut blocks = vec![Block {
            name: format!("u{}", i + 1),
            start: 0,
            len: 1,
            domain: Domain::Field { avoid_zero: false },
        }];
        for b in base.blocks() {
            blocks.push(Block {
                name: format!("{}{}", b.name, i + 1),
                start: b.start + 1,
                len: b.len,
                domain: b.domain,
            });
        }
        let mut profile = vec![1u64];
        profile.extend_from_slice(base.degree_profile());
        GeneratorMap {
            field,
            out_arity: big_n,
            blocks,
            degree_profile: profile,
            body: Body::Scaled(Box::new(base.clone())),
        }
    };
    let mut acc = scaled(0);
    for i in 1..n {
        acc = acc.sum(scaled(i))?;
    }
    Ok(acc)
}

/// Derived parameters of the unknown-order generator.
#[derive(Debug, Clone, Copy)]
pub struct UnknownOrderParams {
    /// N rounded up to a power of two.
    pub padded_n: usize,
    /// Lagrange-pair count of the Shpilka-Volkovich part.
    pub sv_l: usize,
    /// Total-degree bound certified for the base map.
    pub total_degree: u32,
    /// Monomial sparsity fed to the Klivans-Spielman prime bound.
    pub sparsity: u64,
    /// The Klivans-Spielman candidate prime.
    pub ks_prime: u64,
    /// Smallest field modulus the construction and its hitting cube accept.
    pub field_bound: u64,
}

pub fn unknown_order_params(big_n: usize, d: u32, r: usize) -> UnknownOrderParams {
    let padded_n = big_n.next_power_of_two();
    let lg_r2 = floor_lg((r as u64 * r as u64).max(1)) as u32;
    let sv_l = lg_r2 as usize + 1;
    let total_degree = 2 * d * (lg_r2 + 1);
    let sparsity = monomial_count(padded_n, d, total_degree);
    let ks_prime = smallest_prime_at_least(2 * padded_n as u64 * sparsity * sparsity + 1);
    // the t-cube needs sum_i (d-1) * deg_t + 1 distinct values
    let cube = padded_n as u64 * (d as u64 - 1) * (ks_prime - 1) + 1;
    let field_bound = ks_prime.max(cube + 1).max(padded_n as u64 + 1);
    UnknownOrderParams { padded_n, sv_l, total_degree, sparsity, ks_prime, field_bound }
}

/// The main unknown-order generator: merge-and-reduce over the
/// Klivans-Spielman total-degree monomial map, plus (on disjoint seeds) the
/// Shpilka-Volkovich map with floor(lg r^2) + 1 pairs.
pub fn unknown_order_generator(
    field: Field,
    big_n: usize,
    d: u32,
    r: usize,
) -> Result<GeneratorMap> {
    let params = unknown_order_params(big_n, d, r);
    if field.modulus() < params.field_bound {
        return Err(Error::FieldTooSmall { p: field.modulus(), need: params.field_bound });
    }
    let base = ks_generator(field, params.padded_n, d, params.sparsity, 1)?;
    let merged = merge_reduce_generator(field, params.padded_n, &base)?;
    let sv = sv_generator(field, params.padded_n, params.sv_l)?;
    let g = merged.sum(sv)?;
    g.truncate_outputs(big_n)
}

/// The commutative-ROABP generator: the Shpilka-Volkovich map with
/// 1 + 2 floor(2 lg r) pairs.
pub fn commutative_generator(field: Field, n: usize, d: u32, r: usize) -> Result<GeneratorMap> {
    let need = n as u64 * d as u64 + 1;
    if field.modulus() <= n as u64 * d as u64 {
        return Err(Error::FieldTooSmall { p: field.modulus(), need });
    }
    // floor(2 lg r) = floor(lg r^2)
    let l = 1 + 2 * floor_lg((r as u64 * r as u64).max(1)) as usize;
    sv_generator(field, n, l)
}

/// Reduces m variables to a few seed variables while preserving
/// nonzeroness of the target class.
pub trait VariableReducer {
    fn name(&self) -> &'static str;
    /// Produces a map into m variables given the individual-degree and
    /// width bounds of the class.
    fn reduce(&self, field: Field, m: usize, d: u32, r: usize) -> Result<GeneratorMap>;
}

/// The identity map: no reduction, an honest full interpolation cube on all
/// m variables.
pub struct GridReducer;

impl VariableReducer for GridReducer {
    fn name(&self) -> &'static str {
        "grid"
    }

    fn reduce(&self, field: Field, m: usize, _d: u32, _r: usize) -> Result<GeneratorMap> {
        let comps = (0..m).map(|i| SparsePoly::var(field, m, i)).collect();
        GeneratorMap::from_components(
            comps,
            vec![Block {
                name: "y".into(),
                start: 0,
                len: m,
                domain: Domain::Field { avoid_zero: false },
            }],
        )
    }
}

/// A seeded random affine line x_j = b_j + a_j t: preserves nonzeroness only
/// with high probability (Schwartz-Zippel), so it is explicitly labeled
/// non-deterministic and takes its seed up front.
pub struct RandomLineReducer {
    pub seed: u64,
}

impl VariableReducer for RandomLineReducer {
    fn name(&self) -> &'static str {
        "random"
    }

    fn reduce(&self, field: Field, m: usize, _d: u32, _r: usize) -> Result<GeneratorMap> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
        let comps = (0..m)
            .map(|_| {
                let a = field.elt(rng.gen_range(1..field.modulus()) as i128);
                let b = field.elt(rng.gen_range(0..field.modulus()) as i128);
                SparsePoly::var(field, 1, 0)
                    .scale(a)
                    .add(&SparsePoly::constant(field, 1, b))
            })
            .collect::<Result<_>>()?;
        GeneratorMap::from_components(
            comps,
            vec![Block {
                name: "t".into(),
                start: 0,
                len: 1,
                domain: Domain::Field { avoid_zero: false },
            }],
        )
    }
}

/// The hashing pipeline: the hashing generator with a perfect hash family
/// for support l, its z-block removed by the Kronecker substitution
/// z_j <- y_j^(d n^2), and the surviving y-block fed through the reducer.
/// The u selector stays as one extra seed variable.
pub fn hplusfs_generator(
    field: Field,
    n: usize,
    d: u32,
    r: usize,
    l: usize,
    reducer: &dyn VariableReducer,
) -> Result<GeneratorMap> {
    let fam = pairwise_hash_family(n, l);
    let gh = hashing_generator(field, n, &fam)?;
    let m = fam.m;
    let comps = gh.components()?;
    // Kronecker z_j <- y_j^base inside each component; base exceeds every
    // individual degree in (y, z), so monomial images stay distinct
    let base = (d * (n as u32) * (n as u32)).max(n as u32 + 2);
    let mut kron = Vec::with_capacity(n);
    for c in &comps {
        // components live on [y(m), z(m), u]; pair z_j with y_j, keep u
        let yz = c.clone();
        // move u out of the way: substitute later; here we fold z into y by
        // direct exponent rewrite
        let f = field;
        let mut out = SparsePoly::zero(f, m + 1);
        for (e, coef) in yz.terms() {
            let mut exps = vec![0u32; m + 1];
            for j in 0..m {
                let ind = e[j] as u64 + base as u64 * e[m + j] as u64;
                exps[j] = u32::try_from(ind).map_err(|_| Error::DegreeTooLarge {
                    got: u32::MAX,
                    bound: base,
                })?;
            }
            exps[m] = e[2 * m];
            out = out.add(&SparsePoly::monomial(f, m + 1, &exps, coef))?;
        }
        kron.push(out);
    }
    // reduce the y-block; u remains a fresh trailing seed variable
    let red = reducer.reduce(field, m, d, r)?;
    let red_arity = red.seed_arity();
    let red_comps = red.components()?;
    let mut sub_comps: Vec<SparsePoly> = red_comps
        .iter()
        .map(|c| embed(c, red_arity + 1, 0))
        .collect::<Result<_>>()?;
    sub_comps.push(SparsePoly::var(field, red_arity + 1, red_arity));
    let sub = PolyMap::new(sub_comps)?;
    let final_comps: Vec<SparsePoly> =
        kron.iter().map(|c| c.compose(&sub)).collect::<Result<_>>()?;
    let mut blocks: Vec<Block> = red.blocks().to_vec();
    blocks.push(Block {
        name: "u".into(),
        start: red_arity,
        len: 1,
        domain: Domain::Candidates(fam.members.len() as u64),
    });
    GeneratorMap::from_components(final_comps, blocks)
}

/// An indexable product cube over the seed variables of a generator: the
/// canonical hitting set obtained by interpolating each seed variable.
#[derive(Debug, Clone)]
pub struct HittingSet {
    field: Field,
    /// Per seed variable: (first value, count).
    ranges: Vec<(u64, u64)>,
}

impl HittingSet {
    /// A bare product cube from explicit per-variable ranges.
    pub fn product(field: Field, ranges: Vec<(u64, u64)>) -> Result<HittingSet> {
        for &(start, count) in &ranges {
            if count == 0 {
                return Err(Error::InvalidInput("empty range in product cube".into()));
            }
            if start + count > field.modulus() {
                return Err(Error::FieldTooSmall { p: field.modulus(), need: start + count });
            }
        }
        Ok(HittingSet { field, ranges })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn size(&self) -> u128 {
        self.ranges.iter().map(|&(_, c)| c as u128).product()
    }

    pub fn ranges(&self) -> &[(u64, u64)] {
        &self.ranges
    }

    /// The point at a mixed-radix index, without materializing the set.
    pub fn point(&self, index: u128) -> Vec<Felt> {
        let mut idx = index;
        let mut out = Vec::with_capacity(self.ranges.len());
        for &(start, count) in &self.ranges {
            let digit = (idx % count as u128) as u64;
            idx /= count as u128;
            out.push(self.field.elt((start + digit) as i128));
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<Felt>> + '_ {
        (0..self.size()).map(move |i| self.point(i))
    }
}

/// Builds the interpolation cube for f compose g, where `dbounds[i]` bounds
/// the degree of f in its i-th variable. Selector blocks keep their declared
/// candidate sets; interpolation blocks get composed-degree + 1 values.
pub fn gen_to_hitting_set(g: &GeneratorMap, dbounds: &[u64]) -> Result<HittingSet> {
    if dbounds.len() != g.out_arity() {
        return Err(Error::ArityMismatch { expected: g.out_arity(), got: dbounds.len() });
    }
    let field = g.field();
    let dsum: u64 = dbounds.iter().sum();
    let mut ranges = vec![(0u64, 0u64); g.seed_arity()];
    for b in g.blocks() {
        for v in b.start..b.start + b.len {
            let (start, count) = match b.domain {
                Domain::Candidates(c) => (0, c),
                Domain::Field { avoid_zero } => {
                    let count = dsum * g.degree_profile()[v] + 1;
                    (u64::from(avoid_zero), count)
                }
            };
            if start + count > field.modulus() {
                return Err(Error::FieldTooSmall {
                    p: field.modulus(),
                    need: start + count,
                });
            }
            ranges[v] = (start, count.max(1));
        }
    }
    Ok(HittingSet { field, ranges })
}
