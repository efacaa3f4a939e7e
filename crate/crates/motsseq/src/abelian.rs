//! Descriptors for the abelian groups appearing in page entries and exact
//! integer linear algebra for maps between them.
//!
//! A group is a finitely generated part in invariant-factor form plus a list
//! of tagged divisible summands. Divisible summands never interact with the
//! finitely generated part under the operations we need: tensoring with Z/m
//! kills them, torsion extracts Z/p^v from a Pruefer(p) summand, and maps
//! carry each divisible summand either to zero or isomorphically onto a
//! divisible summand of the target.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

// ---------------------------------------------------------------------------
// descriptors

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivKind {
    /// Uniquely divisible: torsion-free and divisible (a rational vector
    /// space of unspecified dimension).
    Uniq,
    /// The Pruefer group Z[1/p]/Z.
    Pruefer,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivTag {
    pub kind: DivKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default)]
    pub label: String,
}

impl DivTag {
    pub fn uniq(label: &str) -> Self {
        DivTag { kind: DivKind::Uniq, p: None, label: label.to_string() }
    }

    pub fn pruefer(p: u64, label: &str) -> Self {
        DivTag { kind: DivKind::Pruefer, p: Some(p), label: label.to_string() }
    }
}

/// `free` is the rank of the free part; `torsion` lists invariant factors
/// d_1 | d_2 | ... with every d_i >= 2; `divisible` lists tagged divisible
/// summands. Constructors normalize, so equality of the fg part is
/// structural.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbGroup {
    pub free: usize,
    pub torsion: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub divisible: Vec<DivTag>,
}

impl AbGroup {
    pub fn trivial() -> Self {
        AbGroup { free: 0, torsion: vec![], divisible: vec![] }
    }

    pub fn z() -> Self {
        AbGroup { free: 1, torsion: vec![], divisible: vec![] }
    }

    pub fn zmod(m: u64) -> Self {
        Self::from_factors(0, &[m], vec![])
    }

    /// Elementary abelian 2-group of the given dimension.
    pub fn f2_vec(dim: usize) -> Self {
        AbGroup { free: 0, torsion: vec![2; dim], divisible: vec![] }
    }

    /// Normalizes an arbitrary list of cyclic orders (entries 0 and 1 are
    /// dropped; 0 is not a valid torsion order) into invariant factors.
    pub fn from_factors(free: usize, orders: &[u64], divisible: Vec<DivTag>) -> Self {
        AbGroup { free, torsion: invariant_factors(orders), divisible }
    }

    pub fn direct_sum(&self, other: &AbGroup) -> AbGroup {
        let mut orders: Vec<u64> = self.torsion.clone();
        orders.extend_from_slice(&other.torsion);
        let mut divisible = self.divisible.clone();
        divisible.extend(other.divisible.iter().cloned());
        AbGroup::from_factors(self.free + other.free, &orders, divisible)
    }

    pub fn is_trivial(&self) -> bool {
        self.free == 0 && self.torsion.is_empty() && self.divisible.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.free == 0 && self.divisible.is_empty()
    }

    /// Order of the group if finite.
    pub fn order(&self) -> Option<u128> {
        if !self.is_finite() {
            return None;
        }
        Some(self.torsion.iter().map(|&d| d as u128).product())
    }

    /// g tensor Z/m, i.e. g/mg. Divisible summands die.
    pub fn tensor_zmod(&self, m: u64) -> AbGroup {
        assert!(m >= 1, "modulus must be positive");
        let mut orders: Vec<u64> = vec![m; self.free];
        orders.extend(self.torsion.iter().map(|&d| gcd(d, m)));
        AbGroup::from_factors(0, &orders, vec![])
    }

    /// The m-torsion subgroup {x : mx = 0}. A Pruefer(p) summand contributes
    /// Z/p^{v_p(m)}; uniquely divisible summands and the free part are
    /// torsion-free.
    pub fn torsion_sub(&self, m: u64) -> AbGroup {
        assert!(m >= 1, "modulus must be positive");
        let mut orders: Vec<u64> = self.torsion.iter().map(|&d| gcd(d, m)).collect();
        for tag in &self.divisible {
            if let (DivKind::Pruefer, Some(p)) = (tag.kind, tag.p) {
                orders.push(p.pow(valuation(m, p)));
            }
        }
        AbGroup::from_factors(0, &orders, vec![])
    }

    /// Drops the p-primary part of every torsion order and every Pruefer(p)
    /// summand: the effect of tensoring with Z[1/p].
    pub fn localize_away(&self, p: u64) -> AbGroup {
        if p <= 1 {
            return self.clone();
        }
        let orders: Vec<u64> = self.torsion.iter().map(|&d| prime_to_part(d, p)).collect();
        let divisible = self
            .divisible
            .iter()
            .filter(|t| !(t.kind == DivKind::Pruefer && t.p == Some(p)))
            .cloned()
            .collect();
        AbGroup::from_factors(self.free, &orders, divisible)
    }

    /// Structural isomorphism: equal free ranks and invariant factors, and
    /// matching multisets of divisible tags (labels ignored).
    pub fn iso(&self, other: &AbGroup) -> bool {
        if self.free != other.free
            || invariant_factors(&self.torsion) != invariant_factors(&other.torsion)
        {
            return false;
        }
        let key = |tags: &[DivTag]| {
            let mut v: Vec<(DivKind, Option<u64>)> = tags.iter().map(|t| (t.kind, t.p)).collect();
            v.sort();
            v
        };
        key(&self.divisible) == key(&other.divisible)
    }

    /// Orders of the finitely generated generators: free generators first
    /// (order 0) followed by the invariant factors.
    pub fn gen_orders(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.free];
        v.extend_from_slice(&self.torsion);
        v
    }

    pub fn fg_gens(&self) -> usize {
        self.free + self.torsion.len()
    }
}

impl std::fmt::Display for AbGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = vec![];
        if self.free == 1 {
            parts.push("Z".to_string());
        } else if self.free > 1 {
            parts.push(format!("Z^{}", self.free));
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        for t in &self.divisible {
            match t.kind {
                DivKind::Uniq => parts.push("UD".to_string()),
                DivKind::Pruefer => parts.push(format!("Pr({})", t.p.unwrap_or(0))),
            }
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn valuation(mut m: u64, p: u64) -> u32 {
    assert!(p >= 2);
    let mut v = 0;
    while m != 0 && m % p == 0 {
        m /= p;
        v += 1;
    }
    v
}

pub fn prime_to_part(m: u64, p: u64) -> u64 {
    let mut m = m;
    while m != 0 && m % p == 0 {
        m /= p;
    }
    m
}

/// Invariant factors d_1 | ... | d_k of the product of the given cyclic
/// groups. Entries 0 and 1 are ignored.
pub fn invariant_factors(orders: &[u64]) -> Vec<u64> {
    // Collect exponents per prime, sorted descending; the i-th invariant
    // factor from the top multiplies the i-th largest power of every prime.
    let mut per_prime: std::collections::BTreeMap<u64, Vec<u32>> = Default::default();
    for &d in orders {
        if d <= 1 {
            continue;
        }
        let mut d = d;
        let mut p = 2u64;
        while p * p <= d {
            if d % p == 0 {
                let mut v = 0;
                while d % p == 0 {
                    d /= p;
                    v += 1;
                }
                per_prime.entry(p).or_default().push(v);
            }
            p += 1;
        }
        if d > 1 {
            per_prime.entry(d).or_default().push(1);
        }
    }
    let depth = per_prime.values().map(|v| v.len()).max().unwrap_or(0);
    let mut factors = vec![1u64; depth];
    for (p, mut exps) in per_prime {
        exps.sort_unstable_by(|a, b| b.cmp(a));
        for (i, e) in exps.into_iter().enumerate() {
            // Largest prime power goes into the last invariant factor.
            factors[depth - 1 - i] *= p.pow(e);
        }
    }
    factors.retain(|&d| d > 1);
    factors
}

// ---------------------------------------------------------------------------
// integer matrices

/// Row-major integer matrix; entries stay well inside i128 for the group
/// orders in play (<= 504).
pub type Mat = Vec<Vec<i128>>;

pub fn mat_zero(rows: usize, cols: usize) -> Mat {
    vec![vec![0; cols]; rows]
}

pub fn mat_identity(n: usize) -> Mat {
    let mut m = mat_zero(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let rows = a.len();
    let inner = if rows > 0 { a[0].len() } else { 0 };
    let cols = if !b.is_empty() { b[0].len() } else { 0 };
    assert!(b.len() == inner, "dimension mismatch in mat_mul");
    let mut c = mat_zero(rows, cols);
    for i in 0..rows {
        for k in 0..inner {
            let av = a[i][k];
            if av == 0 {
                continue;
            }
            for j in 0..cols {
                c[i][j] += av * b[k][j];
            }
        }
    }
    c
}

/// Horizontal concatenation [a | b].
pub fn mat_hcat(a: &Mat, b: &Mat) -> Mat {
    let rows = a.len().max(b.len());
    let (ca, cb) = (a.first().map_or(0, |r| r.len()), b.first().map_or(0, |r| r.len()));
    let mut m = mat_zero(rows, ca + cb);
    for i in 0..rows {
        for j in 0..ca {
            m[i][j] = a[i][j];
        }
        for j in 0..cb {
            m[i][ca + j] = b[i][j];
        }
    }
    m
}

/// Smith normal form: returns (u, d, v) with u * a * v = d, u and v
/// unimodular, d diagonal with d_i | d_{i+1} and nonnegative entries.
pub fn snf(a: &Mat) -> (Mat, Mat, Mat) {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut d = a.clone();
    let mut u = mat_identity(rows);
    let mut v = mat_identity(cols);

    let n = rows.min(cols);
    let mut t = 0;
    while t < n {
        // Find a pivot in the lower-right submatrix.
        let mut pivot = None;
        'search: for i in t..rows {
            for j in t..cols {
                if d[i][j] != 0 {
                    pivot = Some((i, j));
                    break 'search;
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        d.swap(t, pi);
        u.swap(t, pi);
        for row in d.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }

        // Clear row and column t by gcd steps.
        loop {
            let mut dirty = false;
            for i in (t + 1)..rows {
                while d[i][t] != 0 {
                    let q = d[i][t].div_euclid(d[t][t]);
                    row_sub(&mut d, i, t, q);
                    row_sub(&mut u, i, t, q);
                    if d[i][t] != 0 {
                        d.swap(i, t);
                        u.swap(i, t);
                        dirty = true;
                    }
                }
            }
            for j in (t + 1)..cols {
                while d[t][j] != 0 {
                    let q = d[t][j].div_euclid(d[t][t]);
                    col_sub(&mut d, j, t, q);
                    col_sub(&mut v, j, t, q);
                    if d[t][j] != 0 {
                        col_swap(&mut d, j, t);
                        col_swap(&mut v, j, t);
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
        }

        // Divisibility fix: if some later entry is not divisible by the
        // pivot, fold its column in and redo this step.
        let mut redo = false;
        'fix: for i in (t + 1)..rows {
            for j in (t + 1)..cols {
                if d[i][j] % d[t][t] != 0 {
                    for r in 0..rows {
                        d[r][t] += d[r][j];
                    }
                    for r in 0..cols {
                        v[r][t] += v[r][j];
                    }
                    redo = true;
                    break 'fix;
                }
            }
        }
        if !redo {
            t += 1;
        }
    }

    for i in 0..n {
        if d[i][i] < 0 {
            for j in 0..cols {
                d[i][j] = -d[i][j];
            }
            for row in v.iter_mut() {
                row[i] = -row[i];
            }
        }
    }
    (u, d, v)
}

fn row_sub(m: &mut Mat, i: usize, t: usize, q: i128) {
    if q == 0 {
        return;
    }
    let cols = m[0].len();
    for j in 0..cols {
        let s = m[t][j];
        m[i][j] -= q * s;
    }
}

fn col_sub(m: &mut Mat, j: usize, t: usize, q: i128) {
    if q == 0 {
        return;
    }
    for row in m.iter_mut() {
        let s = row[t];
        row[j] -= q * s;
    }
}

fn col_swap(m: &mut Mat, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

/// Basis (as columns) of the integer kernel of `a`.
pub fn kernel_basis(a: &Mat) -> Mat {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let (_, d, v) = snf(a);
    let n = rows.min(cols);
    let mut keep: Vec<usize> = vec![];
    for j in 0..cols {
        let dj = if j < n { d[j][j] } else { 0 };
        if dj == 0 {
            keep.push(j);
        }
    }
    let mut basis = mat_zero(cols, keep.len());
    for (bj, &j) in keep.iter().enumerate() {
        for i in 0..cols {
            basis[i][bj] = v[i][j];
        }
    }
    basis
}

/// One integral solution x of a x = b, if any.
pub fn solve(a: &Mat, b: &[i128]) -> Option<Vec<i128>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    assert_eq!(b.len(), rows);
    let (u, d, v) = snf(a);
    let ub: Vec<i128> = (0..rows).map(|i| (0..rows).map(|k| u[i][k] * b[k]).sum()).collect();
    let n = rows.min(cols);
    let mut y = vec![0i128; cols];
    for i in 0..rows {
        let di = if i < n { d[i][i] } else { 0 };
        if di == 0 {
            if ub[i] != 0 {
                return None;
            }
        } else {
            if ub[i] % di != 0 {
                return None;
            }
            y[i] = ub[i] / di;
        }
    }
    let x: Vec<i128> = (0..cols).map(|i| (0..cols).map(|k| v[i][k] * y[k]).sum()).collect();
    Some(x)
}

// ---------------------------------------------------------------------------
// homomorphisms

/// Action of a map on one divisible source summand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivAction {
    Zero,
    /// Isomorphically onto the target divisible summand with this index.
    Onto(usize),
}

/// A homomorphism between descriptors. `matrix[j][i]` is the coefficient of
/// the j-th target generator in the image of the i-th source generator
/// (free generators first, then torsion generators in invariant order).
#[derive(Clone, Debug)]
pub struct Hom {
    pub source: AbGroup,
    pub target: AbGroup,
    pub matrix: Vec<Vec<i64>>,
    pub div_action: Vec<DivAction>,
}

impl Hom {
    pub fn new(
        source: AbGroup,
        target: AbGroup,
        matrix: Vec<Vec<i64>>,
        div_action: Vec<DivAction>,
    ) -> Result<Self> {
        let h = Hom { source, target, matrix, div_action };
        h.validate()?;
        Ok(h)
    }

    pub fn zero(source: AbGroup, target: AbGroup) -> Self {
        let matrix = vec![vec![0; source.fg_gens()]; target.fg_gens()];
        let div_action = vec![DivAction::Zero; source.divisible.len()];
        Hom { source, target, matrix, div_action }
    }

    fn validate(&self) -> Result<()> {
        let s = self.source.fg_gens();
        let t = self.target.fg_gens();
        if self.matrix.len() != t || self.matrix.iter().any(|r| r.len() != s) {
            return Err(Error::BadHom(format!(
                "matrix must be {t}x{s}, got {}x{}",
                self.matrix.len(),
                self.matrix.first().map_or(0, |r| r.len())
            )));
        }
        if self.div_action.len() != self.source.divisible.len() {
            return Err(Error::BadHom("one divisible action per source summand".into()));
        }
        // Each source generator of order d must map to an element killed
        // by d.
        let src_orders = self.source.gen_orders();
        let tgt_orders = self.target.gen_orders();
        for (i, &d) in src_orders.iter().enumerate() {
            if d == 0 {
                continue;
            }
            for (j, &e) in tgt_orders.iter().enumerate() {
                let val = (d as i128) * (self.matrix[j][i] as i128);
                let ok = if e == 0 { val == 0 } else { val % (e as i128) == 0 };
                if !ok {
                    return Err(Error::BadHom(format!(
                        "generator {i} of order {d} maps outside the target relations"
                    )));
                }
            }
        }
        let mut seen = vec![false; self.target.divisible.len()];
        for (i, act) in self.div_action.iter().enumerate() {
            if let DivAction::Onto(j) = *act {
                let st = &self.source.divisible[i];
                let Some(tt) = self.target.divisible.get(j) else {
                    return Err(Error::BadHom(format!("divisible target index {j} out of range")));
                };
                if st.kind != tt.kind || st.p != tt.p {
                    return Err(Error::BadHom("divisible summand kinds must match".into()));
                }
                if seen[j] {
                    return Err(Error::BadHom("two summands map onto one divisible target".into()));
                }
                seen[j] = true;
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().flatten().all(|&x| x == 0)
            && self.div_action.iter().all(|a| *a == DivAction::Zero)
    }

    /// self followed by g.
    pub fn then(&self, g: &Hom) -> Result<Hom> {
        if !self.target.iso(&g.source) || self.target.fg_gens() != g.source.fg_gens() {
            return Err(Error::BadHom("composition with mismatched middle group".into()));
        }
        let a: Mat = to_mat(&g.matrix);
        let b: Mat = to_mat(&self.matrix);
        let c = mat_mul(&a, &b);
        // Reduce composite entries modulo the target orders so validation
        // sees a canonical representative.
        let tgt_orders = g.target.gen_orders();
        let matrix: Vec<Vec<i64>> = c
            .iter()
            .enumerate()
            .map(|(j, row)| {
                row.iter()
                    .map(|&x| {
                        let e = tgt_orders[j] as i128;
                        let r = if e == 0 { x } else { x.rem_euclid(e) };
                        r as i64
                    })
                    .collect()
            })
            .collect();
        let div_action = self
            .div_action
            .iter()
            .map(|a| match *a {
                DivAction::Zero => DivAction::Zero,
                DivAction::Onto(j) => g.div_action[j],
            })
            .collect();
        Hom::new(self.source.clone(), g.target.clone(), matrix, div_action)
    }

    /// The composite is the zero map (all finitely generated images land in
    /// the target relations, and the divisible chase dies).
    pub fn composes_to_zero(&self, g: &Hom) -> bool {
        match self.then(g) {
            Ok(c) => {
                let orders = c.target.gen_orders();
                c.matrix.iter().enumerate().all(|(j, row)| {
                    row.iter().all(|&x| {
                        let e = orders[j] as i128;
                        if e == 0 {
                            x == 0
                        } else {
                            (x as i128) % e == 0
                        }
                    })
                }) && c.div_action.iter().all(|a| *a == DivAction::Zero)
            }
            Err(_) => false,
        }
    }

    /// Relation matrix of the target: diagonal orders of torsion generators
    /// as columns (free generators need no relations).
    fn target_relations(&self) -> Mat {
        relation_cols(&self.target)
    }

    /// Lattice L = {x in Z^s : M x lies in the target relations}, as a
    /// column basis. The kernel of the map on finitely generated parts is
    /// L / (source relations).
    fn kernel_lattice(&self) -> Mat {
        let m = to_mat(&self.matrix);
        let r = self.target_relations();
        let s = self.source.fg_gens();
        let stacked = mat_hcat(&m, &r);
        let basis = kernel_basis(&stacked);
        // Project to the x-coordinates.
        let cols = basis.first().map_or(0, |r| r.len());
        let mut proj = mat_zero(s, cols);
        for i in 0..s {
            for j in 0..cols {
                proj[i][j] = basis[i][j];
            }
        }
        proj
    }

    /// Kernel descriptor. Divisible summands with action Zero survive.
    pub fn kernel(&self) -> AbGroup {
        let lattice = self.kernel_lattice();
        let rels = relation_cols(&self.source);
        let fg = lattice_quotient(&lattice, &rels);
        let divisible: Vec<DivTag> = self
            .source
            .divisible
            .iter()
            .zip(&self.div_action)
            .filter(|(_, a)| **a == DivAction::Zero)
            .map(|(t, _)| t.clone())
            .collect();
        AbGroup { divisible, ..fg }
    }

    /// Image descriptor: source / kernel-lattice, plus the divisible
    /// summands that are hit.
    pub fn image(&self) -> AbGroup {
        let lattice = self.kernel_lattice();
        let s = self.source.fg_gens();
        let fg = lattice_quotient(&free_lattice(s), &lattice);
        let divisible: Vec<DivTag> = self
            .div_action
            .iter()
            .filter_map(|a| match *a {
                DivAction::Zero => None,
                DivAction::Onto(j) => Some(self.target.divisible[j].clone()),
            })
            .collect();
        AbGroup { divisible, ..fg }
    }

    /// Cokernel descriptor: target / (image + relations). Divisible target
    /// summands survive unless hit.
    pub fn cokernel(&self) -> AbGroup {
        let m = to_mat(&self.matrix);
        let r = self.target_relations();
        let t = self.target.fg_gens();
        let fg = lattice_quotient(&free_lattice(t), &mat_hcat(&m, &r));
        let mut hit = vec![false; self.target.divisible.len()];
        for a in &self.div_action {
            if let DivAction::Onto(j) = *a {
                hit[j] = true;
            }
        }
        let divisible: Vec<DivTag> = self
            .target
            .divisible
            .iter()
            .enumerate()
            .filter(|(j, _)| !hit[*j])
            .map(|(_, t)| t.clone())
            .collect();
        AbGroup { divisible, ..fg }
    }
}

/// Quotient of a free group by the span of two families of generators: the
/// subgroup ker(f_out) modulo im(f_in) + relations of the middle group.
/// Requires f_out o f_in = 0.
pub fn homology(f_in: &Hom, f_out: &Hom) -> Result<AbGroup> {
    if !f_in.target.iso(&f_out.source) || f_in.target.fg_gens() != f_out.source.fg_gens() {
        return Err(Error::BadHom("homology needs matching middle group".into()));
    }
    if !f_in.composes_to_zero(f_out) {
        return Err(Error::BadHom("homology needs a zero composite".into()));
    }
    let cycles = f_out.kernel_lattice();
    let boundaries = mat_hcat(&to_mat(&f_in.matrix), &relation_cols(&f_in.target));
    let fg = lattice_quotient(&cycles, &boundaries);

    // Divisible bookkeeping: a middle summand survives if f_out kills it
    // and nothing maps onto it.
    let mut hit = vec![false; f_in.target.divisible.len()];
    for a in &f_in.div_action {
        if let DivAction::Onto(j) = *a {
            hit[j] = true;
        }
    }
    let divisible: Vec<DivTag> = f_in
        .target
        .divisible
        .iter()
        .enumerate()
        .filter(|(j, _)| !hit[*j] && f_out.div_action[*j] == DivAction::Zero)
        .map(|(_, t)| t.clone())
        .collect();
    Ok(AbGroup { divisible, ..fg })
}

fn to_mat(m: &[Vec<i64>]) -> Mat {
    m.iter().map(|row| row.iter().map(|&x| x as i128).collect()).collect()
}

fn relation_cols(g: &AbGroup) -> Mat {
    let n = g.fg_gens();
    let mut r = mat_zero(n, g.torsion.len());
    for (k, &d) in g.torsion.iter().enumerate() {
        r[g.free + k][k] = d as i128;
    }
    r
}

fn free_lattice(n: usize) -> Mat {
    mat_identity(n)
}

/// Descriptor of (lattice spanned by `sub` columns) / (lattice spanned by
/// `quo` columns), both inside the same ambient Z^n. Every `quo` column must
/// lie in the span of `sub`.
fn lattice_quotient(sub: &Mat, quo: &Mat) -> AbGroup {
    let rank = sub.first().map_or(0, |r| r.len());
    let qcols = quo.first().map_or(0, |r| r.len());
    if rank == 0 {
        return AbGroup::trivial();
    }
    // Express each quo column in the sub basis.
    let mut coeffs = mat_zero(rank, qcols);
    for j in 0..qcols {
        let col: Vec<i128> = quo.iter().map(|row| row[j]).collect();
        let sol = solve(sub, &col).expect("quotient generators must lie in the subgroup");
        for (i, &value) in sol.iter().enumerate() {
            coeffs[i][j] = value;
        }
    }
    let (_, d, _) = snf(&coeffs);
    let n = rank.min(qcols);
    let mut torsion = vec![];
    let mut free = rank;
    for i in 0..n {
        let di = d[i][i].unsigned_abs() as u64;
        if di != 0 {
            free -= 1;
            if di > 1 {
                torsion.push(di);
            }
        }
    }
    AbGroup::from_factors(free, &torsion, vec![])
}

// ---------------------------------------------------------------------------
// F2 linear algebra, for mod-2 bases and bridge decompositions

/// Rank of a list of F2 row vectors.
pub fn f2_rank(rows: &[Vec<u8>]) -> usize {
    let mut basis: Vec<Vec<u8>> = vec![];
    for row in rows {
        let mut r: Vec<u8> = row.iter().map(|&x| x & 1).collect();
        for b in &basis {
            let lead = b.iter().position(|&x| x == 1).unwrap();
            if r.get(lead) == Some(&1) {
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri ^= bi;
                }
            }
        }
        if r.iter().any(|&x| x == 1) {
            basis.push(r);
            basis.sort_by_key(|b| b.iter().position(|&x| x == 1));
        }
    }
    basis.len()
}

/// Solves sum x_j * cols[j] = b over F2; returns the coefficient vector.
pub fn f2_solve_cols(cols: &[Vec<u8>], b: &[u8]) -> Option<Vec<u8>> {
    let n = b.len();
    let m = cols.len();
    // Augmented row reduction on the n x (m+1) system.
    let mut rows: Vec<Vec<u8>> = (0..n)
        .map(|i| {
            let mut r: Vec<u8> = cols.iter().map(|c| c.get(i).copied().unwrap_or(0) & 1).collect();
            r.push(b[i] & 1);
            r
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = vec![];
    let mut rank = 0;
    for col in 0..m {
        let Some(pr) = (rank..n).find(|&r| rows[r][col] == 1) else { continue };
        rows.swap(rank, pr);
        for r in 0..n {
            if r != rank && rows[r][col] == 1 {
                let (head, tail) = rows.split_at_mut(rank.max(r));
                let (src, dst) = if r < rank {
                    (&tail[0], &mut head[r])
                } else {
                    (&head[rank], &mut tail[0])
                };
                for (d, s) in dst.iter_mut().zip(src) {
                    *d ^= s;
                }
            }
        }
        pivots.push((rank, col));
        rank += 1;
    }
    if rows.iter().skip(rank).any(|r| r[m] == 1) {
        return None;
    }
    let mut x = vec![0u8; m];
    for &(r, c) in &pivots {
        x[c] = rows[r][m];
    }
    Some(x)
}

/// Image of a vector under an F2 matrix given as rows indexed by target
/// coordinates.
pub fn f2_apply(rows: &[Vec<u8>], v: &[u8]) -> Vec<u8> {
    rows.iter()
        .map(|row| row.iter().zip(v).fold(0u8, |acc, (&a, &b)| acc ^ (a & b & 1)))
        .collect()
}

// ---------------------------------------------------------------------------
