//! Abstract polarised surfaces presented by an intersection lattice.
//!
//! A surface is given by a basis of its divisor class group with the
//! intersection form, the canonical class, the structure-sheaf Euler
//! characteristic, and generators of the effective cone. The nef cone is the
//! dual of the supplied effective cone, so the completeness of the generator
//! list is part of the input contract; the bundled fixtures ship complete
//! lists. Euler characteristics use `chi(D) = chi(O) + I(D)/2` with the index
//! `I(D) = D . (D - K)`.

use crate::ech::{CapacitySequence, Source};
use crate::error::{Error, Result};
use crate::rat::{ceil_div, rat_i, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Divisor class in the chosen basis. Coordinates are rational so the same
/// type serves polarisations moving along rational rays; most inputs are
/// integral.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DivisorClass {
    pub coords: Vec<Rat>,
}

impl DivisorClass {
    pub fn from_ints(coords: &[i64]) -> DivisorClass {
        DivisorClass {
            coords: coords.iter().map(|c| rat_i(*c)).collect(),
        }
    }

    pub fn zero(rank: usize) -> DivisorClass {
        DivisorClass {
            coords: vec![Rat::zero(); rank],
        }
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(crate::rat::is_integer)
    }

    pub fn add(&self, other: &DivisorClass) -> DivisorClass {
        DivisorClass {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &DivisorClass) -> DivisorClass {
        DivisorClass {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, q: &Rat) -> DivisorClass {
        DivisorClass {
            coords: self.coords.iter().map(|a| a * q).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

/// Intersection lattice of a smooth (or mildly singular) projective surface.
#[derive(Clone, Debug)]
pub struct SurfaceLattice {
    rank: usize,
    gram: Vec<Vec<BigInt>>,
    k_class: Vec<BigInt>,
    chi_o: BigInt,
    effective_gens: Vec<Vec<BigInt>>,
    nef_gens: Option<Vec<Vec<BigInt>>>,
    labels: Vec<String>,
}

impl SurfaceLattice {
    pub fn new(
        gram: Vec<Vec<i64>>,
        k_class: Vec<i64>,
        chi_o: i64,
        effective_gens: Vec<Vec<i64>>,
        nef_gens: Option<Vec<Vec<i64>>>,
        labels: Option<Vec<String>>,
    ) -> Result<SurfaceLattice> {
        let rank = gram.len();
        let to_big = |v: &[i64]| v.iter().map(|x| BigInt::from(*x)).collect::<Vec<_>>();
        let gram_b: Vec<Vec<BigInt>> = gram.iter().map(|r| to_big(r)).collect();
        let lattice = SurfaceLattice {
            rank,
            gram: gram_b,
            k_class: to_big(&k_class),
            chi_o: BigInt::from(chi_o),
            effective_gens: effective_gens.iter().map(|v| to_big(v)).collect(),
            nef_gens: nef_gens.map(|g| g.iter().map(|v| to_big(v)).collect()),
            labels: labels.unwrap_or_else(|| (0..rank).map(|i| format!("e{}", i)).collect()),
        };
        lattice.validate()?;
        Ok(lattice)
    }

    fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidSurface("rank must be positive".into()));
        }
        for row in &self.gram {
            if row.len() != self.rank {
                return Err(Error::InvalidSurface("Gram matrix must be square".into()));
            }
        }
        for i in 0..self.rank {
            for j in 0..self.rank {
                if self.gram[i][j] != self.gram[j][i] {
                    return Err(Error::InvalidSurface("Gram matrix must be symmetric".into()));
                }
            }
        }
        if self.k_class.len() != self.rank {
            return Err(Error::InvalidSurface("canonical class has wrong length".into()));
        }
        if self.labels.len() != self.rank {
            return Err(Error::InvalidSurface("labels must match the rank".into()));
        }
        for g in &self.effective_gens {
            if g.len() != self.rank {
                return Err(Error::InvalidSurface(
                    "effective generator has wrong length".into(),
                ));
            }
        }
        if let Some(nef) = &self.nef_gens {
            for g in nef {
                if g.len() != self.rank {
                    return Err(Error::InvalidSurface("nef generator has wrong length".into()));
                }
            }
        }
        let (pos, neg, zero) = signature(&self.gram);
        if !(pos == 1 && zero == 0 && neg == self.rank - 1) {
            return Err(Error::InvalidSurface(format!(
                "intersection form must have signature (1, rank-1); found ({}+, {}-, {} null)",
                pos, neg, zero
            )));
        }
        // Adjunction parity for the supplied negative curves.
        for g in &self.effective_gens {
            let gc = DivisorClass {
                coords: g.iter().map(|x| Rat::from_integer(x.clone())).collect(),
            };
            let sq = self.dot(&gc, &gc);
            if sq.is_negative() {
                let parity = &sq + self.dot(&gc, &self.canonical_class());
                if (parity.numer() % BigInt::from(2)) != BigInt::zero() {
                    return Err(Error::InvalidSurface(format!(
                        "negative curve {:?} violates adjunction parity",
                        g
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn chi_o(&self) -> BigInt {
        self.chi_o.clone()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn canonical_class(&self) -> DivisorClass {
        DivisorClass {
            coords: self
                .k_class
                .iter()
                .map(|x| Rat::from_integer(x.clone()))
                .collect(),
        }
    }

    pub fn effective_gens(&self) -> Vec<DivisorClass> {
        self.effective_gens
            .iter()
            .map(|g| DivisorClass {
                coords: g.iter().map(|x| Rat::from_integer(x.clone())).collect(),
            })
            .collect()
    }

    pub fn nef_gens(&self) -> Option<Vec<DivisorClass>> {
        self.nef_gens.as_ref().map(|gens| {
            gens.iter()
                .map(|g| DivisorClass {
                    coords: g.iter().map(|x| Rat::from_integer(x.clone())).collect(),
                })
                .collect()
        })
    }

    /// Intersection pairing through the Gram matrix.
    pub fn dot(&self, a: &DivisorClass, b: &DivisorClass) -> Rat {
        let mut sum = Rat::zero();
        for i in 0..self.rank {
            if a.coords[i].is_zero() {
                continue;
            }
            for j in 0..self.rank {
                if b.coords[j].is_zero() {
                    continue;
                }
                sum += &a.coords[i] * &b.coords[j] * Rat::from_integer(self.gram[i][j].clone());
            }
        }
        sum
    }

    /// Index `I(D) = D . (D - K)`; even for integral classes.
    pub fn index(&self, d: &DivisorClass) -> Rat {
        let shifted = d.sub(&self.canonical_class());
        let idx = self.dot(d, &shifted);
        if d.is_integral() {
            debug_assert!((idx.numer() % BigInt::from(2)).is_zero() && idx.denom().is_one());
        }
        idx
    }

    /// Nef against the supplied effective cone.
    pub fn is_nef(&self, d: &DivisorClass) -> bool {
        self.effective_gens()
            .iter()
            .all(|c| !self.dot(d, c).is_negative())
    }

    /// Strict interior of the effective cone (bigness, given the input
    /// contract that the generators span the pseudoeffective cone).
    pub fn is_big(&self, d: &DivisorClass) -> Result<bool> {
        let facets = cone_facets(&self.effective_gens()).ok_or_else(|| {
            Error::InvalidSurface("effective cone is not full-dimensional".into())
        })?;
        Ok(facets.iter().all(|phi| {
            let v: Rat = phi
                .iter()
                .zip(&d.coords)
                .map(|(p, c)| p * c)
                .sum();
            v.is_positive()
        }))
    }
}

/// Signature of a symmetric integer matrix by exact congruence reduction
/// (Lagrange's method: diagonal pivots, with a row-combination fallback when
/// the diagonal vanishes).
fn signature(gram: &[Vec<BigInt>]) -> (usize, usize, usize) {
    let n = gram.len();
    let mut m: Vec<Vec<Rat>> = gram
        .iter()
        .map(|r| r.iter().map(|x| Rat::from_integer(x.clone())).collect())
        .collect();
    let (mut pos, mut neg, mut zero) = (0usize, 0usize, 0usize);
    let mut row = 0usize;
    while row < n {
        if m[row][row].is_zero() {
            // Find a later row with a nonzero diagonal to swap, or a nonzero
            // off-diagonal entry to mix in.
            if let Some(s) = (row + 1..n).find(|&s| !m[s][s].is_zero()) {
                m.swap(row, s);
                for r in m.iter_mut() {
                    r.swap(row, s);
                }
            } else if let Some(s) = (row + 1..n).find(|&s| !m[row][s].is_zero()) {
                // Congruence: add row/column s into row.
                for j in 0..n {
                    let add = m[s][j].clone();
                    m[row][j] += add;
                }
                for i in 0..n {
                    let add = m[i][s].clone();
                    m[i][row] += add;
                }
            } else {
                zero += 1;
                row += 1;
                continue;
            }
        }
        let pivot = m[row][row].clone();
        if pivot.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in (row + 1)..n {
            if m[i][row].is_zero() {
                continue;
            }
            let factor = &m[i][row] / &pivot;
            for j in row..n {
                let sub = &factor * &m[row][j];
                m[i][j] -= sub;
            }
            for j in row..n {
                let sub = &factor * &m[j][row];
                m[j][i] -= sub.clone();
            }
        }
        row += 1;
    }
    (pos, neg, zero)
}

/// Facet normals of the cone spanned by `gens` (full-dimensional case):
/// normals vanish on `rank - 1` independent generators and are nonnegative on
/// all. `None` when the generators do not span.
fn cone_facets(gens: &[DivisorClass]) -> Option<Vec<Vec<Rat>>> {
    let rank = gens.first()?.coords.len();
    if rank == 1 {
        // Cone in a line: facet test degenerates to sign agreement.
        let sign_pos = gens.iter().any(|g| g.coords[0].is_positive());
        let sign_neg = gens.iter().any(|g| g.coords[0].is_negative());
        if sign_pos && sign_neg {
            return None;
        }
        return Some(vec![vec![if sign_neg { -rat_i(1) } else { rat_i(1) }]]);
    }
    let mut facets: Vec<Vec<Rat>> = Vec::new();
    let idxs: Vec<usize> = (0..gens.len()).collect();
    let mut chosen = vec![0usize; rank - 1];
    let mut found_any = false;
    subsets(&idxs, rank - 1, &mut chosen, 0, 0, &mut |subset| {
        let rows: Vec<&DivisorClass> = subset.iter().map(|&i| &gens[i]).collect();
        if let Some(normal) = kernel_of_rows(&rows, rank) {
            let mut pos = false;
            let mut neg = false;
            for g in gens {
                let v: Rat = normal.iter().zip(&g.coords).map(|(p, c)| p * c).sum();
                if v.is_positive() {
                    pos = true;
                }
                if v.is_negative() {
                    neg = true;
                }
            }
            if pos && neg {
                return;
            }
            let oriented: Vec<Rat> = if neg {
                normal.iter().map(|x| -x.clone()).collect()
            } else {
                normal
            };
            if pos || neg {
                found_any = true;
                if !facets.iter().any(|f| parallel(f, &oriented)) {
                    facets.push(oriented);
                }
            }
        }
    });
    if !found_any {
        return None;
    }
    Some(facets)
}

fn parallel(a: &[Rat], b: &[Rat]) -> bool {
    // Both nonzero; check cross-proportionality.
    for i in 0..a.len() {
        for j in 0..a.len() {
            if &a[i] * &b[j] != &a[j] * &b[i] {
                return false;
            }
        }
    }
    true
}

fn subsets(
    idxs: &[usize],
    size: usize,
    chosen: &mut Vec<usize>,
    depth: usize,
    start: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == size {
        f(chosen);
        return;
    }
    for i in start..idxs.len() {
        chosen[depth] = idxs[i];
        subsets(idxs, size, chosen, depth + 1, i + 1, f);
    }
}

/// A nonzero vector orthogonal (as a covector on coordinates) to the rows, if
/// the rows have rank exactly `rank - 1`.
fn kernel_of_rows(rows: &[&DivisorClass], rank: usize) -> Option<Vec<Rat>> {
    let mut m: Vec<Vec<Rat>> = rows.iter().map(|r| r.coords.clone()).collect();
    let nrows = m.len();
    let mut pivot_cols = Vec::new();
    let mut r = 0usize;
    for c in 0..rank {
        if let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) {
            m.swap(r, p);
            let inv = m[r][c].clone();
            for j in 0..rank {
                m[r][j] = &m[r][j] / &inv;
            }
            for i in 0..nrows {
                if i != r && !m[i][c].is_zero() {
                    let f = m[i][c].clone();
                    for j in 0..rank {
                        let sub = &f * &m[r][j];
                        m[i][j] -= sub;
                    }
                }
            }
            pivot_cols.push(c);
            r += 1;
            if r == nrows {
                break;
            }
        }
    }
    if r != rank - 1 {
        return None;
    }
    let free_col = (0..rank).find(|c| !pivot_cols.contains(c))?;
    let mut v = vec![Rat::zero(); rank];
    v[free_col] = rat_i(1);
    for (row_idx, &pc) in pivot_cols.iter().enumerate() {
        v[pc] = -m[row_idx][free_col].clone();
    }
    Some(v)
}

/// One optimisation outcome: the optimal value with every tied witness.
#[derive(Clone, Debug)]
pub struct AbstractOptimum {
    pub value: Rat,
    pub witnesses: Vec<DivisorClass>,
}

/// Enumerate integer points of `{D nef, D . A <= budget}` by recursive
/// coordinate slicing (per-level bounds from exact vertex enumeration of the
/// sliced polytope), reporting `(value, index, class)` triples.
fn enumerate_nef_classes(
    s: &SurfaceLattice,
    a: &DivisorClass,
    budget: &Rat,
    node_cap: u64,
) -> Result<Vec<(Rat, Rat, DivisorClass)>> {
    let rank = s.rank();
    // Constraints: for each effective generator C, row (G C) . x >= 0, and
    // (G A) . x <= budget.
    let mut ge_rows: Vec<Vec<Rat>> = Vec::new();
    for c in s.effective_gens() {
        let row: Vec<Rat> = (0..rank)
            .map(|i| {
                (0..rank)
                    .map(|j| Rat::from_integer(s.gram[i][j].clone()) * &c.coords[j])
                    .sum()
            })
            .collect();
        ge_rows.push(row);
    }
    let a_row: Vec<Rat> = (0..rank)
        .map(|i| {
            (0..rank)
                .map(|j| Rat::from_integer(s.gram[i][j].clone()) * &a.coords[j])
                .sum()
        })
        .collect();
    let mut out = Vec::new();
    let mut fixed: Vec<Rat> = Vec::new();
    let mut nodes = 0u64;
    slice_enumerate(
        s, a, &ge_rows, &a_row, budget, &mut fixed, &mut out, &mut nodes, node_cap,
    )?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn slice_enumerate(
    s: &SurfaceLattice,
    a: &DivisorClass,
    ge_rows: &[Vec<Rat>],
    a_row: &[Rat],
    budget: &Rat,
    fixed: &mut Vec<Rat>,
    out: &mut Vec<(Rat, Rat, DivisorClass)>,
    nodes: &mut u64,
    node_cap: u64,
) -> Result<()> {
    *nodes += 1;
    if *nodes > node_cap {
        return Err(Error::ResourceLimit(format!(
            "class enumeration exceeded {} nodes",
            node_cap
        )));
    }
    let rank = s.rank();
    let depth = fixed.len();
    if depth == rank {
        let d = DivisorClass {
            coords: fixed.clone(),
        };
        let feasible = ge_rows
            .iter()
            .all(|row| !row_dot(row, fixed).is_negative())
            && row_dot(a_row, fixed) <= *budget;
        if feasible {
            let value = s.dot(&d, a);
            let index = s.index(&d);
            out.push((value, index, d));
        }
        return Ok(());
    }
    let (lo, hi) = match slice_bounds(ge_rows, a_row, budget, fixed, rank) {
        Some(b) => b,
        None => return Ok(()),
    };
    let mut v = lo;
    while v <= hi {
        fixed.push(Rat::from_integer(v.clone()));
        slice_enumerate(s, a, ge_rows, a_row, budget, fixed, out, nodes, node_cap)?;
        fixed.pop();
        v += 1;
    }
    Ok(())
}

fn row_dot(row: &[Rat], x: &[Rat]) -> Rat {
    row.iter().zip(x.iter()).map(|(r, v)| r * v).sum()
}

/// Bounds for the next coordinate over the region with a prefix fixed, by
/// exact vertex enumeration of the sliced polytope. `None` when empty.
fn slice_bounds(
    ge_rows: &[Vec<Rat>],
    a_row: &[Rat],
    budget: &Rat,
    fixed: &[Rat],
    rank: usize,
) -> Option<(BigInt, BigInt)> {
    let depth = fixed.len();
    let free = rank - depth;
    // Constraints in the free variables: row_free . y >= rhs (ge) and
    // a_free . y <= budget - a_fixed.
    let mut les: Vec<(Vec<Rat>, Rat)> = Vec::new(); // rows with row . y <= rhs
    for row in ge_rows {
        let rhs: Rat = -(0..depth).map(|i| &row[i] * &fixed[i]).sum::<Rat>();
        // -(row_free) . y <= -rhs
        les.push((
            row[depth..].iter().map(|r| -r.clone()).collect(),
            -rhs,
        ));
    }
    {
        let consumed: Rat = (0..depth).map(|i| &a_row[i] * &fixed[i]).sum();
        les.push((a_row[depth..].to_vec(), budget - consumed));
    }
    // Vertices of the polytope {y : rows . y <= rhs} in `free` dims: solve
    // all size-`free` subsets.
    let idxs: Vec<usize> = (0..les.len()).collect();
    let mut chosen = vec![0usize; free];
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    let mut found = false;
    subsets(&idxs, free, &mut chosen, 0, 0, &mut |subset| {
        let rows: Vec<&(Vec<Rat>, Rat)> = subset.iter().map(|&i| &les[i]).collect();
        if let Some(y) = solve_square(&rows) {
            let feasible = les.iter().all(|(r, b)| {
                let v: Rat = r.iter().zip(&y).map(|(ri, yi)| ri * yi).sum();
                v <= *b
            });
            if feasible {
                found = true;
                let first = y[0].clone();
                if lo.as_ref().map_or(true, |l| first < *l) {
                    lo = Some(first.clone());
                }
                if hi.as_ref().map_or(true, |h| first > *h) {
                    hi = Some(first);
                }
            }
        }
    });
    if !found {
        return None;
    }
    let lo = crate::rat::rat_ceil(&lo?);
    let hi = crate::rat::rat_floor(&hi?);
    if lo > hi {
        return None;
    }
    Some((lo, hi))
}

/// Solve `rows . y = rhs` for a square system; `None` if singular.
fn solve_square(rows: &[&(Vec<Rat>, Rat)]) -> Option<Vec<Rat>> {
    let n = rows.len();
    let mut m: Vec<Vec<Rat>> = rows.iter().map(|(r, _)| r.clone()).collect();
    let mut b: Vec<Rat> = rows.iter().map(|(_, v)| v.clone()).collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        b.swap(c, p);
        let inv = m[c][c].clone();
        for j in 0..n {
            m[c][j] = &m[c][j] / &inv;
        }
        b[c] = &b[c] / &inv;
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..n {
                    let sub = &f * &m[c][j];
                    m[i][j] -= sub;
                }
                let sub = &f * &b[c];
                b[i] -= sub;
            }
        }
    }
    Some(b)
}

/// Seed: a nef integral class with index at least `2k` and positive pairing
/// against `a`, from small multiples of nef generators or the polarisation.
fn feasible_seed(s: &SurfaceLattice, a: &DivisorClass, k: usize) -> Result<(Rat, DivisorClass)> {
    let mut candidates: Vec<DivisorClass> = Vec::new();
    if let Some(nef) = s.nef_gens() {
        let mut total = DivisorClass::zero(s.rank());
        for g in &nef {
            candidates.push(g.clone());
            total = total.add(g);
        }
        candidates.push(total);
    }
    // The polarisation itself, cleared of denominators, when it is nef.
    let denom_lcm = a
        .coords
        .iter()
        .fold(BigInt::one(), |acc, q| num_integer::Integer::lcm(&acc, q.denom()));
    let a_int = a.scale(&Rat::from_integer(denom_lcm));
    if s.is_nef(&a_int) {
        candidates.push(a_int);
    }
    let need = rat_i(2 * k as i64);
    for cls in candidates {
        if !s.is_nef(&cls) {
            continue;
        }
        let pairing = s.dot(&cls, a);
        if !pairing.is_positive() {
            continue;
        }
        for m in 1..=(4 * k as i64 + 4) {
            let d = cls.scale(&rat_i(m));
            if s.index(&d) >= need {
                return Ok((s.dot(&d, a), d));
            }
        }
    }
    Err(Error::InvalidSurface(
        "no feasible nef seed found; supply nef generators".into(),
    ))
}

pub const DEFAULT_CLASS_NODE_CAP: u64 = 20_000_000;

/// `c_k`: minimum of `D . A` over nef integral classes with `I(D) >= 2k`.
/// Returns the value with all tied witnesses.
pub fn alg_capacity_abstract(
    s: &SurfaceLattice,
    a: &DivisorClass,
    k: usize,
    node_cap: u64,
) -> Result<AbstractOptimum> {
    if !s.is_big(a)? {
        return Err(Error::InvalidDivisor(
            "polarisation must be big (interior of the effective cone)".into(),
        ));
    }
    if k == 0 {
        return Ok(AbstractOptimum {
            value: Rat::zero(),
            witnesses: vec![DivisorClass::zero(s.rank())],
        });
    }
    let (budget, _) = feasible_seed(s, a, k)?;
    let all = enumerate_nef_classes(s, a, &budget, node_cap)?;
    let need = rat_i(2 * k as i64);
    let value = all
        .iter()
        .filter(|(_, idx, _)| *idx >= need)
        .map(|(v, _, _)| v)
        .min()
        .cloned()
        .ok_or_else(|| Error::Internal("seeded search found no feasible class".into()))?;
    let mut witnesses: Vec<DivisorClass> = all
        .into_iter()
        .filter(|(v, idx, _)| *v == value && *idx >= need)
        .map(|(_, _, d)| d)
        .collect();
    witnesses.sort_by(|x, y| x.coords.cmp(&y.coords));
    witnesses.dedup();
    Ok(AbstractOptimum { value, witnesses })
}

/// Capacity sequence `k = 0..=k_max` from one enumeration pass.
pub fn alg_capacities_abstract(
    s: &SurfaceLattice,
    a: &DivisorClass,
    k_max: usize,
    node_cap: u64,
) -> Result<CapacitySequence> {
    if !s.is_big(a)? {
        return Err(Error::InvalidDivisor(
            "polarisation must be big (interior of the effective cone)".into(),
        ));
    }
    let (budget, _) = feasible_seed(s, a, k_max.max(1))?;
    let all = enumerate_nef_classes(s, a, &budget, node_cap)?;
    let mut values = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let need = rat_i(2 * k as i64);
        let best = all
            .iter()
            .filter(|(_, idx, _)| *idx >= need)
            .map(|(v, _, _)| v)
            .min()
            .cloned()
            .ok_or_else(|| Error::Internal("enumeration missed a feasible class".into()))?;
        values.push(best);
    }
    CapacitySequence::new(values, Source::AlgAbstract)
}

/// One isoparametric-transform step: subtract every supplied negative curve
/// meeting `D` negatively, with coefficient `ceil((D.C)/(C.C))`.
pub fn iso_transform(s: &SurfaceLattice, d: &DivisorClass) -> Result<DivisorClass> {
    let mut result = d.clone();
    for c in s.effective_gens() {
        let dc = s.dot(d, &c);
        if dc.is_negative() {
            let csq = s.dot(&c, &c);
            if !csq.is_negative() {
                return Err(Error::InvalidSurface(
                    "a curve meets the divisor negatively but has nonnegative self-intersection"
                        .into(),
                ));
            }
            let coeff = ceil_div(&dc.to_integer(), &csq.to_integer());
            if !coeff.is_positive() {
                return Err(Error::Internal("transform coefficient must be positive".into()));
            }
            result = result.sub(&c.scale(&Rat::from_integer(coeff)));
        }
    }
    Ok(result)
}

/// A recorded transform step.
#[derive(Clone, Debug)]
pub struct IsoStep {
    pub before: DivisorClass,
    pub after: DivisorClass,
    pub index_before: Rat,
    pub index_after: Rat,
    /// Whether some (-1)-curve met the divisor negatively at this step (the
    /// index may then drop).
    pub minus_one_met: bool,
}

#[derive(Clone, Debug)]
pub struct IsoClosure {
    pub result: DivisorClass,
    pub steps: Vec<IsoStep>,
    pub converged: bool,
}

/// Iterate the transform until the class is nef or the cap is hit. Along the
/// way the index is checked to be non-decreasing whenever no (-1)-curve met
/// the divisor negatively.
pub fn iso_transform_closure(
    s: &SurfaceLattice,
    d: &DivisorClass,
    max_iter: usize,
) -> Result<IsoClosure> {
    let mut current = d.clone();
    let mut steps = Vec::new();
    for _ in 0..max_iter {
        if s.is_nef(&current) {
            return Ok(IsoClosure {
                result: current,
                steps,
                converged: true,
            });
        }
        let minus_one_met = s.effective_gens().iter().any(|c| {
            s.dot(&current, c).is_negative()
                && s.dot(c, c) == -rat_i(1)
                && s.dot(c, &s.canonical_class()) == -rat_i(1)
        });
        let next = iso_transform(s, &current)?;
        let step = IsoStep {
            before: current.clone(),
            after: next.clone(),
            index_before: s.index(&current),
            index_after: s.index(&next),
            minus_one_met,
        };
        if !minus_one_met && step.index_after < step.index_before {
            return Err(Error::Internal(
                "index decreased with no (-1)-curve involved".into(),
            ));
        }
        steps.push(step);
        current = next;
    }
    Ok(IsoClosure {
        result: current,
        steps,
        converged: false,
    })
}

/// A sample of the chamber scan.
#[derive(Clone, Debug)]
pub struct ChamberSample {
    pub t: Rat,
    pub polarisation: DivisorClass,
    /// `None` with a note when the sample is outside the big cone.
    pub outcome: Option<AbstractOptimum>,
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ChamberRegion {
    pub witnesses: Vec<DivisorClass>,
    pub t_first: Rat,
    pub t_last: Rat,
}

#[derive(Clone, Debug)]
pub struct ChamberMap {
    pub k: usize,
    pub samples: Vec<ChamberSample>,
    pub chambers: Vec<ChamberRegion>,
    /// Exact wall positions between adjacent chambers, solved from the
    /// equality of the two witnesses' values as linear functions of `t`.
    pub walls: Vec<Rat>,
}

fn scan_sample(
    s: &SurfaceLattice,
    g1: &DivisorClass,
    g2: &DivisorClass,
    k: usize,
    i: usize,
    resolution: usize,
    node_cap: u64,
) -> Result<ChamberSample> {
    let t = Rat::new(BigInt::from(i as i64), BigInt::from(resolution as i64));
    let a = g1.scale(&(rat_i(1) - &t)).add(&g2.scale(&t));
    if !s.is_big(&a)? {
        return Ok(ChamberSample {
            t,
            polarisation: a,
            outcome: None,
            note: Some("outside the big cone; skipped".into()),
        });
    }
    let opt = alg_capacity_abstract(s, &a, k, node_cap)?;
    Ok(ChamberSample {
        t,
        polarisation: a,
        outcome: Some(opt),
        note: None,
    })
}

/// Scan the segment `A(t) = (1 - t) G1 + t G2` for `t = i / resolution`,
/// recording every optimiser of `c_k(Y, A(t))`.
pub fn chamber_scan(
    s: &SurfaceLattice,
    g1: &DivisorClass,
    g2: &DivisorClass,
    k: usize,
    resolution: usize,
    node_cap: u64,
) -> Result<ChamberMap> {
    chamber_scan_parallel(s, g1, g2, k, resolution, node_cap, 1)
}

/// Parallel variant: samples are independent, so they are computed on
/// `threads` workers over disjoint index ranges and reassembled by index.
/// Output is identical for every thread count.
pub fn chamber_scan_parallel(
    s: &SurfaceLattice,
    g1: &DivisorClass,
    g2: &DivisorClass,
    k: usize,
    resolution: usize,
    node_cap: u64,
    threads: usize,
) -> Result<ChamberMap> {
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let total = resolution + 1;
    let threads = threads.max(1).min(total);
    let mut samples: Vec<ChamberSample> = Vec::with_capacity(total);
    if threads == 1 {
        for i in 0..total {
            samples.push(scan_sample(s, g1, g2, k, i, resolution, node_cap)?);
        }
    } else {
        let chunk = total.div_ceil(threads);
        let mut slots: Vec<Result<Vec<ChamberSample>>> = Vec::new();
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..threads {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(total);
                if lo >= hi {
                    continue;
                }
                handles.push(scope.spawn(move || {
                    (lo..hi)
                        .map(|i| scan_sample(s, g1, g2, k, i, resolution, node_cap))
                        .collect::<Result<Vec<_>>>()
                }));
            }
            for h in handles {
                slots.push(h.join().expect("scan worker panicked"));
            }
        });
        for part in slots {
            samples.extend(part?);
        }
    }
    // Contiguous runs of equal witness sets form chambers. Wall samples (ties)
    // are their own length-one runs; walls between distinct single-witness
    // chambers are solved exactly.
    let mut chambers: Vec<ChamberRegion> = Vec::new();
    for sample in &samples {
        let Some(out) = &sample.outcome else { continue };
        match chambers.last_mut() {
            Some(last) if last.witnesses == out.witnesses => {
                last.t_last = sample.t.clone();
            }
            _ => chambers.push(ChamberRegion {
                witnesses: out.witnesses.clone(),
                t_first: sample.t.clone(),
                t_last: sample.t.clone(),
            }),
        }
    }
    let mut walls = Vec::new();
    for pair in chambers.windows(2) {
        let (c1, c2) = (&pair[0], &pair[1]);
        if let Some(t) = wall_between(s, g1, g2, c1, c2) {
            if !walls.contains(&t) {
                walls.push(t);
            }
        }
    }
    Ok(ChamberMap {
        k,
        samples,
        chambers,
        walls,
    })
}

/// Exact tie locus `D1 . A(t) = D2 . A(t)` for representatives of two
/// adjacent chambers; linear in `t`.
fn wall_between(
    s: &SurfaceLattice,
    g1: &DivisorClass,
    g2: &DivisorClass,
    c1: &ChamberRegion,
    c2: &ChamberRegion,
) -> Option<Rat> {
    let d1 = c1.witnesses.first()?;
    let d2 = c2.witnesses.first()?;
    if c1.witnesses == c2.witnesses {
        return None;
    }
    // Value difference at t: (1-t) (D1 - D2).G1 + t (D1 - D2).G2 = 0.
    let diff = d1.sub(d2);
    let v1 = s.dot(&diff, g1);
    let v2 = s.dot(&diff, g2);
    let denom = &v1 - &v2;
    if denom.is_zero() {
        return None;
    }
    let t = v1 / denom;
    Some(t)
}

/// Pretty-print a class in the lattice's basis labels: `3F`, `Dinf+F`, ...
pub fn render_class(s: &SurfaceLattice, d: &DivisorClass) -> String {
    let mut out = String::new();
    for (i, c) in d.coords.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let term = if mag.is_one() {
            s.labels[i].clone()
        } else {
            format!("{}{}", mag, s.labels[i])
        };
        if c.is_negative() {
            out.push('-');
        } else if !out.is_empty() {
            out.push('+');
        }
        out.push_str(&term);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f1() -> SurfaceLattice {
        SurfaceLattice::new(
            vec![vec![0, 1], vec![1, 1]],
            vec![-1, -2],
            1,
            vec![vec![1, 0], vec![-1, 1]],
            Some(vec![vec![1, 0], vec![0, 1]]),
            Some(vec!["F".into(), "Dinf".into()]),
        )
        .unwrap()
    }

    fn p2() -> SurfaceLattice {
        SurfaceLattice::new(
            vec![vec![1]],
            vec![-3],
            1,
            vec![vec![1]],
            Some(vec![vec![1]]),
            Some(vec!["H".into()]),
        )
        .unwrap()
    }

    #[test]
    fn f1_lattice_sanity() {
        let s = f1();
        let f = DivisorClass::from_ints(&[1, 0]);
        let dinf = DivisorClass::from_ints(&[0, 1]);
        let e = dinf.sub(&f);
        assert_eq!(s.dot(&f, &f), rat_i(0));
        assert_eq!(s.dot(&f, &dinf), rat_i(1));
        assert_eq!(s.dot(&dinf, &dinf), rat_i(1));
        assert_eq!(s.dot(&e, &e), -rat_i(1));
        let k = s.canonical_class();
        assert_eq!(s.dot(&k, &k), rat_i(8));
        assert_eq!(s.dot(&k, &f), -rat_i(2));
        assert_eq!(s.dot(&k, &dinf), -rat_i(3));
        // Index examples.
        assert_eq!(s.index(&DivisorClass::zero(2)), rat_i(0));
        assert_eq!(s.index(&f), rat_i(2));
        assert_eq!(s.index(&dinf), rat_i(4));
    }

    #[test]
    fn nef_tests() {
        let s = f1();
        let f = DivisorClass::from_ints(&[1, 0]);
        let e = DivisorClass::from_ints(&[-1, 1]);
        assert!(s.is_nef(&f));
        assert!(!s.is_nef(&e));
        assert!(s.is_nef(&DivisorClass::zero(2)));
    }

    #[test]
    fn bigness() {
        let s = f1();
        // alpha F + beta E with alpha, beta > 0 is big.
        let a = DivisorClass::from_ints(&[1, 2]); // 3F + 2E
        assert!(s.is_big(&a).unwrap());
        let f = DivisorClass::from_ints(&[1, 0]);
        assert!(!s.is_big(&f).unwrap());
        // Dinf is on the nef boundary (pullback of the plane class) but
        // inside the effective cone, hence big.
        let dinf = DivisorClass::from_ints(&[0, 1]);
        assert!(s.is_big(&dinf).unwrap());
    }

    #[test]
    fn capacity_on_f1() {
        let s = f1();
        // A = 3F + 2E = coords (1, 2): F.A = 2, Dinf.A = 3.
        let a = DivisorClass::from_ints(&[1, 2]);
        let opt = alg_capacity_abstract(&s, &a, 1, DEFAULT_CLASS_NODE_CAP).unwrap();
        assert_eq!(opt.value, rat_i(2));
        assert_eq!(opt.witnesses, vec![DivisorClass::from_ints(&[1, 0])]);

        let opt = alg_capacity_abstract(&s, &a, 0, DEFAULT_CLASS_NODE_CAP).unwrap();
        assert_eq!(opt.value, rat_i(0));
    }

    #[test]
    fn capacity_on_p2_matches_sections_ladder() {
        let s = p2();
        let h = DivisorClass::from_ints(&[1]);
        let opt = alg_capacity_abstract(&s, &h, 3, DEFAULT_CLASS_NODE_CAP).unwrap();
        assert_eq!(opt.value, rat_i(2));
        let seq = alg_capacities_abstract(&s, &h, 6, DEFAULT_CLASS_NODE_CAP).unwrap();
        let want: Vec<Rat> = [0, 1, 1, 2, 2, 2, 3].iter().map(|v| rat_i(*v)).collect();
        assert_eq!(seq.values(), &want[..]);
    }

    #[test]
    fn iso_transform_examples() {
        let s = f1();
        let f = DivisorClass::from_ints(&[1, 0]);
        // Nef classes are fixed points.
        assert_eq!(iso_transform(&s, &f).unwrap(), f);
        // 2E drops to zero in one step.
        let two_e = DivisorClass::from_ints(&[-2, 2]);
        assert_eq!(iso_transform(&s, &two_e).unwrap(), DivisorClass::zero(2));
        // F + 2E maps to Dinf.
        let d = DivisorClass::from_ints(&[-1, 2]);
        let out = iso_transform(&s, &d).unwrap();
        assert_eq!(out, DivisorClass::from_ints(&[0, 1]));
        let closure = iso_transform_closure(&s, &d, 16).unwrap();
        assert!(closure.converged);
        assert!(closure.steps.len() <= 2);
        assert_eq!(closure.result, DivisorClass::from_ints(&[0, 1]));
    }

    #[test]
    fn chamber_scan_f1_k1() {
        let s = f1();
        let g1 = DivisorClass::from_ints(&[1, 0]); // F
        let g2 = DivisorClass::from_ints(&[-1, 1]); // E = Dinf - F
        let map = chamber_scan(&s, &g1, &g2, 1, 10, DEFAULT_CLASS_NODE_CAP).unwrap();
        // Interior chambers: optimiser F for t < 1/2, tie at 1/2, Dinf after.
        let f = DivisorClass::from_ints(&[1, 0]);
        let dinf = DivisorClass::from_ints(&[0, 1]);
        let interior: Vec<_> = map
            .samples
            .iter()
            .filter_map(|smp| smp.outcome.as_ref().map(|o| (&smp.t, o)))
            .collect();
        assert!(!interior.is_empty());
        for (t, o) in &interior {
            let half = crate::rat::rat(1, 2);
            if **t < half {
                assert_eq!(o.witnesses, vec![f.clone()]);
            } else if **t > half {
                assert_eq!(o.witnesses, vec![dinf.clone()]);
            } else {
                assert_eq!(o.witnesses.len(), 2);
            }
        }
        assert_eq!(map.walls, vec![crate::rat::rat(1, 2)]);
        // Endpoints are outside the big cone and skipped.
        assert!(map.samples[0].note.is_some());
        assert!(map.samples.last().unwrap().note.is_some());
    }

    #[test]
    fn render_classes() {
        let s = f1();
        assert_eq!(render_class(&s, &DivisorClass::from_ints(&[3, 0])), "3F");
        assert_eq!(render_class(&s, &DivisorClass::from_ints(&[1, 1])), "F+Dinf");
        assert_eq!(render_class(&s, &DivisorClass::from_ints(&[0, 0])), "0");
        assert_eq!(render_class(&s, &DivisorClass::from_ints(&[-1, 2])), "-F+2Dinf");
    }

    #[test]
    fn signature_rejects_wrong_forms() {
        // Positive definite rank 2 is not a surface lattice.
        assert!(SurfaceLattice::new(
            vec![vec![1, 0], vec![0, 1]],
            vec![0, 0],
            1,
            vec![vec![1, 0]],
            None,
            None,
        )
        .is_err());
        // Adjunction parity violation: a (-1)-class with odd K pairing.
        assert!(SurfaceLattice::new(
            vec![vec![1, 0], vec![0, -1]],
            vec![-3, 0],
            1,
            vec![vec![0, 1]],
            None,
            None,
        )
        .is_err());
    }
}
