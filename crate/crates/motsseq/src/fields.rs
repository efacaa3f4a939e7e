//! Field models: every field-dependent invariant the engine consumes.
//!
//! A model stores mod-2 Milnor K-theory with its rho-multiplication,
//! integral Milnor K-theory and integral motivic cohomology descriptors with
//! designated mod-2 reduction data, the Witt ring with its fundamental-ideal
//! filtration, and roots of unity. Built-ins cover the complex and real
//! numbers, odd finite fields, and odd p-adic fields; arbitrary models load
//! from JSON and are validated against the same internal consistency checks
//! as the built-ins.
//!
//! Mod-2 motivic cohomology h^{p,q} is tau^{q-p} times the degree-p part of
//! mod-2 Milnor K-theory, zero unless 0 <= p <= q. Integral motivic
//! cohomology H^{p,q} is zero unless 0 <= p <= q, and the stored reduction
//! data must satisfy, per bidegree,
//!   dim h^{p,q} = dim H^{p,q}/2 + dim (2-torsion of H^{p+1,q}),
//! with the first Steenrod square compatible with the integral Bockstein.
//! Those two facts drive every mod-m coefficient group the pages need.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::abelian::{f2_rank, f2_solve_cols, valuation, DivKind, DivTag};
use crate::{AbGroup, Error, Result};

/// Stem window half-width. Descriptor tables are sized so every page and
/// homotopy-group query with |weight| up to this bound stays in range.
pub fn window() -> i64 {
    std::env::var("MOTSSEQ_WINDOW")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .map(|w| w.clamp(2, 12))
        .unwrap_or(6)
}

/// An F2 vector space with a named basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct F2Space {
    pub labels: Vec<String>,
}

impl F2Space {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn zero() -> Self {
        F2Space { labels: vec![] }
    }
}

impl std::fmt::Display for F2Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.labels.is_empty() {
            return write!(f, "0");
        }
        write!(f, "F2{{{}}}", self.labels.join(", "))
    }
}

/// One degree of mod-2 Milnor K-theory: basis labels and the matrix of
/// multiplication by rho into the next degree (rows indexed by the next
/// degree's basis).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Km2Deg {
    pub labels: Vec<String>,
    pub rho: Vec<Vec<u8>>,
}

/// One degree of integral Milnor K-theory with its designated surjection
/// onto the mod-2 theory. `pr[i]` is the image of the i-th finitely
/// generated generator in the mod-2 basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KmIntDeg {
    pub group: AbGroup,
    pub pr: Vec<Vec<u8>>,
}

/// Integral motivic cohomology in one bidegree, with the image of each
/// finitely generated generator under reduction to h^{p,q}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HintEntry {
    pub group: AbGroup,
    pub pr: Vec<Vec<u8>>,
}

impl HintEntry {
    pub fn zero() -> Self {
        HintEntry { group: AbGroup::trivial(), pr: vec![] }
    }
}

/// Witt ring with the fundamental-ideal filtration. `ideal_chain[l]` is
/// I^l (so index 0 is the whole ring), `quotients[l]` is W/I^l, and
/// `pi[l]` maps the generators of I^l onto degree-l mod-2 Milnor K-theory
/// (one row per mod-2 basis element).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittDesc {
    pub total: AbGroup,
    pub ideal_chain: Vec<AbGroup>,
    pub quotients: Vec<AbGroup>,
    pub pi: Vec<Vec<Vec<u8>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MuData {
    /// mu_m is cyclic of order gcd(m, modulus), with modulus 0 meaning all
    /// of mu_m is present.
    Formula { modulus: u64 },
    Table(BTreeMap<u64, AbGroup>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldModel {
    pub name: String,
    /// 1 in characteristic zero, the characteristic otherwise. All
    /// descriptors are coefficients in Z with this prime inverted.
    pub char_exp: u64,
    pub minus_one_sum_of_two_squares: bool,
    pub km2: Vec<Km2Deg>,
    /// Degrees past the stored mod-2 table are genuinely zero when set.
    pub km2_complete: bool,
    pub rho_index: Option<usize>,
    pub km_int: Vec<KmIntDeg>,
    pub hint: BTreeMap<(i64, i64), HintEntry>,
    pub witt: WittDesc,
    pub mu_data: MuData,
    pub q_max: i64,
}

// ---------------------------------------------------------------------------
// queries

fn tau_label(k: i64, base: &str) -> String {
    let tau = match k {
        0 => return base.to_string(),
        1 => "tau".to_string(),
        _ => format!("tau^{k}"),
    };
    if base == "1" {
        tau
    } else {
        format!("{tau} {base}")
    }
}

impl FieldModel {
    /// Dimension of degree-p mod-2 Milnor K-theory.
    pub fn dim_k(&self, p: i64) -> Result<usize> {
        if p < 0 {
            return Ok(0);
        }
        match self.km2.get(p as usize) {
            Some(deg) => Ok(deg.labels.len()),
            None if self.km2_complete => Ok(0),
            None => Err(Error::OutOfRange(format!(
                "mod-2 Milnor K-theory of {} is stored through degree {}",
                self.name,
                self.km2.len() as i64 - 1
            ))),
        }
    }

    /// Mod-2 motivic cohomology h^{p,q} with its monomial basis.
    pub fn h(&self, p: i64, q: i64) -> Result<F2Space> {
        if p < 0 || q < p {
            return Ok(F2Space::zero());
        }
        let base = match self.km2.get(p as usize) {
            Some(deg) => deg.labels.clone(),
            None if self.km2_complete => vec![],
            None => return Err(Error::OutOfRange(format!(
                "h^({p},{q}) of {} needs mod-2 degree {p}, stored through {}",
                self.name,
                self.km2.len() as i64 - 1
            ))),
        };
        Ok(F2Space { labels: base.iter().map(|b| tau_label(q - p, b)).collect() })
    }

    /// Multiplication by rho from mod-2 degree p to degree p+1, as rows
    /// indexed by the target basis.
    pub fn rho_rows(&self, p: i64) -> Result<Vec<Vec<u8>>> {
        if p < 0 {
            return Ok(vec![]);
        }
        match self.km2.get(p as usize) {
            Some(deg) => Ok(deg.rho.clone()),
            None if self.km2_complete => Ok(vec![]),
            None => Err(Error::OutOfRange(format!(
                "rho-multiplication of {} is stored through degree {}",
                self.name,
                self.km2.len() as i64 - 1
            ))),
        }
    }

    /// rho as a vector in the degree-1 basis (zero vector when -1 is a
    /// square or the class vanishes).
    pub fn rho_vec(&self) -> Vec<u8> {
        let dim = self.km2.get(1).map_or(0, |d| d.labels.len());
        let mut v = vec![0u8; dim];
        if let Some(i) = self.rho_index {
            v[i] = 1;
        }
        v
    }

    /// Integral motivic cohomology entry, zero outside 0 <= p <= q.
    pub fn hint_entry(&self, p: i64, q: i64) -> Result<HintEntry> {
        if p < 0 || q < 0 || p > q {
            return Ok(HintEntry::zero());
        }
        if q > self.q_max {
            return Err(Error::OutOfRange(format!(
                "integral motivic cohomology of {} is stored through weight {}",
                self.name, self.q_max
            )));
        }
        Ok(self.hint.get(&(p, q)).cloned().unwrap_or_else(HintEntry::zero))
    }

    pub fn hint_group(&self, p: i64, q: i64) -> Result<AbGroup> {
        Ok(self.hint_entry(p, q)?.group)
    }

    /// Integral Milnor K-theory in one degree.
    pub fn km_int_entry(&self, n: i64) -> Result<KmIntDeg> {
        if n < 0 {
            return Ok(KmIntDeg { group: AbGroup::trivial(), pr: vec![] });
        }
        self.km_int.get(n as usize).cloned().ok_or_else(|| {
            Error::OutOfRange(format!(
                "integral Milnor K-theory of {} is stored through degree {}",
                self.name,
                self.km_int.len() as i64 - 1
            ))
        })
    }

    /// The two halves of mod-m motivic cohomology: the reduction of the
    /// integral group and the m-torsion of the next cohomological degree.
    /// h^{p,q}_m is their direct sum, with the appendix's theta and omega
    /// constraints holding by the load-time checks.
    pub fn hm_parts(&self, p: i64, q: i64, m: u64) -> Result<(AbGroup, AbGroup)> {
        assert!(m >= 2, "coefficient modulus must be at least 2");
        let sub = self.hint_group(p, q)?.tensor_zmod(m);
        let quot = self.hint_group(p + 1, q)?.torsion_sub(m);
        Ok((sub, quot))
    }

    /// Mod-m motivic cohomology descriptor.
    pub fn h_mod(&self, p: i64, q: i64, m: u64) -> Result<AbGroup> {
        let (sub, quot) = self.hm_parts(p, q, m)?;
        Ok(sub.direct_sum(&quot))
    }

    /// W/I^l.
    pub fn witt_quotient(&self, l: i64) -> Result<AbGroup> {
        if l < 0 || l as usize >= self.witt.quotients.len() {
            return Err(Error::OutOfRange(format!(
                "Witt filtration of {} is stored through level {}",
                self.name,
                self.witt.quotients.len() as i64 - 1
            )));
        }
        Ok(self.witt.quotients[l as usize].clone())
    }

    pub fn mu(&self, m: u64) -> Result<AbGroup> {
        match &self.mu_data {
            MuData::Formula { modulus } => {
                Ok(AbGroup::from_factors(0, &[crate::abelian::gcd(m, *modulus)], vec![]))
            }
            MuData::Table(t) => t.get(&m).cloned().ok_or_else(|| {
                Error::OutOfRange(format!("mu({m}) is not in the model table for {}", self.name))
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// the mod-2 bridge

/// How one mod-2 bidegree sits between the neighboring integral ones: the
/// reduction image (rows spanning it), a complement of standard basis
/// vectors, and the 2-torsion generators of the next integral degree the
/// complement maps onto, in matching order.
#[derive(Clone, Debug)]
pub struct Bridge {
    pub s_rows: Vec<Vec<u8>>,
    pub c_indices: Vec<usize>,
    pub two_torsion: Vec<TwoTorsionGen>,
}

/// An order-2 element of an integral descriptor: half an even-order
/// finitely generated generator, or the involution point of a 2-primary
/// divisible summand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoTorsionGen {
    Fg { gen_index: usize, half: u64 },
    Pruefer { div_index: usize },
}

/// The canonical order-2 generators of a descriptor: (d/2) times each
/// even-order generator in stored order, then each 2-primary divisible
/// summand.
pub fn two_torsion_gens(g: &AbGroup) -> Vec<TwoTorsionGen> {
    let mut out = vec![];
    for (k, &d) in g.torsion.iter().enumerate() {
        if d % 2 == 0 {
            out.push(TwoTorsionGen::Fg { gen_index: g.free + k, half: d / 2 });
        }
    }
    for (j, tag) in g.divisible.iter().enumerate() {
        if tag.kind == DivKind::Pruefer && tag.p == Some(2) {
            out.push(TwoTorsionGen::Pruefer { div_index: j });
        }
    }
    out
}

impl FieldModel {
    pub fn bridge(&self, p: i64, q: i64) -> Result<Bridge> {
        let dim = self.h(p, q)?.dim();
        let here = self.hint_entry(p, q)?;
        let next = self.hint_group(p + 1, q)?;
        let s_rows: Vec<Vec<u8>> = here.pr.clone();
        let mut c_indices = vec![];
        let mut span = s_rows.clone();
        for i in 0..dim {
            let mut e = vec![0u8; dim];
            e[i] = 1;
            let r = f2_rank(&span);
            span.push(e.clone());
            if f2_rank(&span) > r {
                c_indices.push(i);
            } else {
                span.pop();
            }
        }
        Ok(Bridge { s_rows, c_indices, two_torsion: two_torsion_gens(&next) })
    }

    /// Coefficients over the complement part when a mod-2 vector is written
    /// against the bridge decomposition.
    pub fn bridge_coords(&self, bridge: &Bridge, dim: usize, v: &[u8]) -> Result<Vec<u8>> {
        let mut cols: Vec<Vec<u8>> = bridge.s_rows.clone();
        for &c in &bridge.c_indices {
            let mut e = vec![0u8; dim];
            e[c] = 1;
            cols.push(e);
        }
        let x = f2_solve_cols(&cols, v).ok_or_else(|| {
            Error::ModelInvariant("mod-2 class escapes the bridge decomposition".into())
        })?;
        Ok(x[bridge.s_rows.len()..].to_vec())
    }
}

// ---------------------------------------------------------------------------
// built-ins

fn pruefer_pack() -> Vec<DivTag> {
    let mut v: Vec<DivTag> =
        [2u64, 3, 5, 7].iter().map(|&p| DivTag::pruefer(p, &format!("{p}^inf"))).collect();
    v.push(DivTag::uniq("div"));
    v
}

fn ud() -> Vec<DivTag> {
    vec![DivTag::uniq("div")]
}

fn zero_km2(n: usize) -> Vec<Km2Deg> {
    (0..=n).map(|_| Km2Deg { labels: vec![], rho: vec![] }).collect()
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_power_base(q: u64) -> Option<u64> {
    for p in 2..=q {
        if !is_prime(p) {
            continue;
        }
        if q % p == 0 {
            let mut m = q;
            while m % p == 0 {
                m /= p;
            }
            return (m == 1).then_some(p);
        }
    }
    None
}

fn pow_order(base: u64, exp: i64, name: &str) -> Result<u64> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base as u128).ok_or_else(|| overflow(name))?;
    }
    u64::try_from(acc - 1).map_err(|_| overflow(name))
}

fn overflow(name: &str) -> Error {
    Error::OutOfRange(format!(
        "coefficient orders for {name} exceed the supported integer range at this window"
    ))
}

impl FieldModel {
    pub fn builtin(name: &str) -> Result<FieldModel> {
        let w = window();
        let model = match name {
            "C" => builtin_c(w),
            "R" => builtin_r(w),
            _ => {
                if let Some(q) = name.strip_prefix("Fq:") {
                    let q: u64 = q
                        .parse()
                        .map_err(|_| Error::UnknownField(name.to_string()))?;
                    if q % 2 == 0 {
                        return Err(Error::CharTwo(name.to_string()));
                    }
                    let Some(p) = prime_power_base(q) else {
                        return Err(Error::UnknownField(format!(
                            "{name} (not an odd prime power)"
                        )));
                    };
                    builtin_fq(w, q, p)?
                } else if let Some(l) = name.strip_prefix("Qp:") {
                    let l: u64 = l
                        .parse()
                        .map_err(|_| Error::UnknownField(name.to_string()))?;
                    if l % 2 == 0 {
                        return Err(Error::CharTwo(name.to_string()));
                    }
                    if !is_prime(l) {
                        return Err(Error::UnknownField(format!("{name} (not an odd prime)")));
                    }
                    builtin_qp(w, l)?
                } else {
                    return Err(Error::UnknownField(name.to_string()));
                }
            }
        };
        model.validate()?;
        Ok(model)
    }
}

fn builtin_c(w: i64) -> FieldModel {
    let q_max = 2 * w + 2;
    let n_max = (w + 4) as usize;
    let mut km2 = zero_km2(q_max as usize);
    km2[0] = Km2Deg { labels: vec!["1".into()], rho: vec![] };

    let mut km_int = vec![KmIntDeg { group: AbGroup::z(), pr: vec![vec![1]] }];
    km_int.push(KmIntDeg {
        group: AbGroup { free: 0, torsion: vec![], divisible: pruefer_pack() },
        pr: vec![],
    });
    for _ in 2..=n_max {
        km_int.push(KmIntDeg {
            group: AbGroup { free: 0, torsion: vec![], divisible: ud() },
            pr: vec![],
        });
    }

    let mut hint = BTreeMap::new();
    hint.insert((0, 0), HintEntry { group: AbGroup::z(), pr: vec![vec![1]] });
    for q in 1..=q_max {
        hint.insert(
            (1, q),
            HintEntry {
                group: AbGroup { free: 0, torsion: vec![], divisible: pruefer_pack() },
                pr: vec![],
            },
        );
        for p in 2..=q {
            hint.insert(
                (p, q),
                HintEntry {
                    group: AbGroup { free: 0, torsion: vec![], divisible: ud() },
                    pr: vec![],
                },
            );
        }
    }

    let levels = (w + 6) as usize;
    let witt = WittDesc {
        total: AbGroup::zmod(2),
        ideal_chain: std::iter::once(AbGroup::zmod(2))
            .chain((1..=levels).map(|_| AbGroup::trivial()))
            .collect(),
        quotients: std::iter::once(AbGroup::trivial())
            .chain((1..=levels).map(|_| AbGroup::zmod(2)))
            .collect(),
        pi: std::iter::once(vec![vec![1]]).chain((1..=levels).map(|_| vec![])).collect(),
    };

    FieldModel {
        name: "C".into(),
        char_exp: 1,
        minus_one_sum_of_two_squares: true,
        km2,
        km2_complete: true,
        rho_index: None,
        km_int,
        hint,
        witt,
        mu_data: MuData::Formula { modulus: 0 },
        q_max,
    }
}

fn builtin_r(w: i64) -> FieldModel {
    let q_max = 2 * w + 2;
    let n_max = (w + 4) as usize;
    let km2: Vec<Km2Deg> = (0..=q_max)
        .map(|n| Km2Deg {
            labels: vec![match n {
                0 => "1".to_string(),
                1 => "rho".to_string(),
                _ => format!("rho^{n}"),
            }],
            rho: if n < q_max { vec![vec![1]] } else { vec![] },
        })
        .collect();

    let z2_ud = || AbGroup { free: 0, torsion: vec![2], divisible: ud() };
    let mut km_int = vec![KmIntDeg { group: AbGroup::z(), pr: vec![vec![1]] }];
    for _ in 1..=n_max {
        km_int.push(KmIntDeg { group: z2_ud(), pr: vec![vec![1]] });
    }

    let mut hint = BTreeMap::new();
    hint.insert((0, 0), HintEntry { group: AbGroup::z(), pr: vec![vec![1]] });
    for q in 1..=q_max {
        for p in 1..=q {
            let entry = if (p - q) % 2 == 0 {
                HintEntry { group: z2_ud(), pr: vec![vec![1]] }
            } else if p == 1 {
                HintEntry {
                    group: AbGroup { free: 0, torsion: vec![], divisible: pruefer_pack() },
                    pr: vec![],
                }
            } else {
                HintEntry {
                    group: AbGroup { free: 0, torsion: vec![], divisible: ud() },
                    pr: vec![],
                }
            };
            hint.insert((p, q), entry);
        }
    }

    let levels = (w + 6) as usize;
    let witt = WittDesc {
        total: AbGroup::z(),
        ideal_chain: (0..=levels).map(|_| AbGroup::z()).collect(),
        quotients: (0..=levels).map(|l| {
            if l == 0 {
                AbGroup::trivial()
            } else {
                AbGroup::zmod(1u64 << l)
            }
        }).collect(),
        pi: (0..=levels).map(|_| vec![vec![1]]).collect(),
    };

    FieldModel {
        name: "R".into(),
        char_exp: 1,
        minus_one_sum_of_two_squares: false,
        km2,
        km2_complete: false,
        rho_index: Some(0),
        km_int,
        hint,
        witt,
        mu_data: MuData::Formula { modulus: 2 },
        q_max,
    }
}

/// Largest weight whose coefficient orders stay within range; for very
/// large fields the stored table shrinks rather than failing to build.
fn capped_q_max(target: i64, fits: impl Fn(i64) -> bool) -> i64 {
    let mut q = 1;
    while q < target && fits(q + 1) {
        q += 1;
    }
    q
}

fn builtin_fq(w: i64, s: u64, p: u64) -> Result<FieldModel> {
    let n_max = (w + 4) as usize;
    let neg_one_nonsquare = s % 4 == 3;
    let name = format!("Fq:{s}");
    let q_max = capped_q_max(2 * w + 2, |q| pow_order(s, q, &name).is_ok());

    let mut km2 = zero_km2((2 * w + 2) as usize);
    km2[0] = Km2Deg {
        labels: vec!["1".into()],
        rho: vec![vec![if neg_one_nonsquare { 1 } else { 0 }]],
    };
    km2[1] = Km2Deg {
        labels: vec![if neg_one_nonsquare { "-1".into() } else { "g".into() }],
        rho: vec![],
    };

    let mut km_int = vec![
        KmIntDeg { group: AbGroup::z(), pr: vec![vec![1]] },
        KmIntDeg { group: AbGroup::zmod(s - 1), pr: vec![vec![1]] },
    ];
    for _ in 2..=n_max {
        km_int.push(KmIntDeg { group: AbGroup::trivial(), pr: vec![] });
    }

    let mut hint = BTreeMap::new();
    hint.insert((0, 0), HintEntry { group: AbGroup::z(), pr: vec![vec![1]] });
    for m in 1..=q_max {
        let order = pow_order(s, m, &name)?;
        hint.insert((1, m), HintEntry { group: AbGroup::zmod(order), pr: vec![vec![1]] });
    }

    let levels = (w + 6) as usize;
    let witt = if neg_one_nonsquare {
        WittDesc {
            total: AbGroup::zmod(4),
            ideal_chain: [AbGroup::zmod(4), AbGroup::zmod(2)]
                .into_iter()
                .chain((2..=levels).map(|_| AbGroup::trivial()))
                .collect(),
            quotients: [AbGroup::trivial(), AbGroup::zmod(2)]
                .into_iter()
                .chain((2..=levels).map(|_| AbGroup::zmod(4)))
                .collect(),
            pi: [vec![vec![1]], vec![vec![1]]]
                .into_iter()
                .chain((2..=levels).map(|_| vec![]))
                .collect(),
        }
    } else {
        WittDesc {
            total: AbGroup::f2_vec(2),
            ideal_chain: [AbGroup::f2_vec(2), AbGroup::zmod(2)]
                .into_iter()
                .chain((2..=levels).map(|_| AbGroup::trivial()))
                .collect(),
            quotients: [AbGroup::trivial(), AbGroup::zmod(2)]
                .into_iter()
                .chain((2..=levels).map(|_| AbGroup::f2_vec(2)))
                .collect(),
            pi: [vec![vec![1, 0]], vec![vec![1]]]
                .into_iter()
                .chain((2..=levels).map(|_| vec![]))
                .collect(),
        }
    };

    Ok(FieldModel {
        name,
        char_exp: p,
        minus_one_sum_of_two_squares: true,
        km2,
        km2_complete: true,
        rho_index: neg_one_nonsquare.then_some(0),
        km_int,
        hint,
        witt,
        mu_data: MuData::Formula { modulus: s - 1 },
        q_max,
    })
}

/// Torsion order of the weight-q degree-1 integral motivic cohomology of
/// the l-adics: the prime-to-l part is l^q - 1, and an extra l-power enters
/// exactly when l - 1 divides q.
fn qp_w(l: u64, q: i64, name: &str) -> Result<u64> {
    let base = pow_order(l, q, name)?;
    if q > 0 && q as u64 % (l - 1) == 0 {
        let extra = l
            .checked_pow(1 + valuation(q as u64, l))
            .ok_or_else(|| overflow(name))?;
        base.checked_mul(extra).ok_or_else(|| overflow(name))
    } else {
        Ok(base)
    }
}

fn builtin_qp(w: i64, l: u64) -> Result<FieldModel> {
    let n_max = (w + 4) as usize;
    let neg_one_nonsquare = l % 4 == 3;
    let name = format!("Qp:{l}");
    let q_max = capped_q_max(2 * w + 2, |q| {
        qp_w(l, q, &name).is_ok() && (q < 3 || pow_order(l, q - 1, &name).is_ok())
    });

    let mut km2 = zero_km2((2 * w + 2) as usize);
    km2[0] = Km2Deg {
        labels: vec!["1".into()],
        rho: vec![vec![if neg_one_nonsquare { 1 } else { 0 }], vec![0]],
    };
    km2[1] = Km2Deg {
        labels: vec!["u".into(), "p".into()],
        rho: vec![vec![0, if neg_one_nonsquare { 1 } else { 0 }]],
    };
    km2[2] = Km2Deg { labels: vec!["up".into()], rho: vec![] };

    let mut km_int = vec![
        KmIntDeg { group: AbGroup::z(), pr: vec![vec![1]] },
        // Free part generated by the uniformizer, torsion by the
        // Teichmueller units; the pro-l unit part carries no torsion the
        // window sees and is omitted.
        KmIntDeg {
            group: AbGroup { free: 1, torsion: vec![l - 1], divisible: vec![] },
            pr: vec![vec![0, 1], vec![1, 0]],
        },
        KmIntDeg {
            group: AbGroup { free: 0, torsion: vec![l - 1], divisible: ud() },
            pr: vec![vec![1]],
        },
    ];
    for _ in 3..=n_max {
        km_int.push(KmIntDeg {
            group: AbGroup { free: 0, torsion: vec![], divisible: ud() },
            pr: vec![],
        });
    }

    let mut hint = BTreeMap::new();
    hint.insert((0, 0), HintEntry { group: AbGroup::z(), pr: vec![vec![1]] });
    hint.insert((1, 1), HintEntry { group: km_int[1].group.clone(), pr: km_int[1].pr.clone() });
    if q_max >= 2 {
        hint.insert((2, 2), HintEntry { group: km_int[2].group.clone(), pr: km_int[2].pr.clone() });
    }
    if q_max >= 3 {
        hint.insert((3, 3), HintEntry {
            group: AbGroup { free: 0, torsion: vec![], divisible: ud() },
            pr: vec![],
        });
    }
    for q in 2..=q_max {
        hint.insert(
            (1, q),
            HintEntry {
                group: AbGroup { free: 0, torsion: vec![qp_w(l, q, &name)?], divisible: ud() },
                pr: vec![vec![1, 0]],
            },
        );
    }
    for q in 3..=q_max {
        let mut divisible = vec![DivTag::pruefer(l, &format!("{l}^inf"))];
        divisible.extend(ud());
        hint.insert(
            (2, q),
            HintEntry {
                group: AbGroup {
                    free: 0,
                    torsion: vec![pow_order(l, q - 1, &name)?],
                    divisible,
                },
                pr: vec![vec![1]],
            },
        );
    }
    for q in 4..=q_max {
        let lpart = if (q as u64 - 1) % (l - 1) == 0 {
            l.checked_pow(1 + valuation(q as u64 - 1, l)).ok_or_else(|| overflow(&name))?
        } else {
            1
        };
        let group = if lpart > 1 {
            AbGroup { free: 0, torsion: vec![lpart], divisible: ud() }
        } else {
            AbGroup { free: 0, torsion: vec![], divisible: ud() }
        };
        let pr = vec![vec![]; group.fg_gens()];
        hint.insert((3, q), HintEntry { group, pr });
    }
    for q in 4..=q_max {
        for p in 4..=q {
            hint.insert(
                (p, q),
                HintEntry {
                    group: AbGroup { free: 0, torsion: vec![], divisible: ud() },
                    pr: vec![],
                },
            );
        }
    }

    let levels = (w + 6) as usize;
    let witt = if neg_one_nonsquare {
        WittDesc {
            total: AbGroup { free: 0, torsion: vec![4, 4], divisible: vec![] },
            ideal_chain: [
                AbGroup { free: 0, torsion: vec![4, 4], divisible: vec![] },
                AbGroup { free: 0, torsion: vec![2, 4], divisible: vec![] },
                AbGroup::zmod(2),
            ]
            .into_iter()
            .chain((3..=levels).map(|_| AbGroup::trivial()))
            .collect(),
            quotients: [
                AbGroup::trivial(),
                AbGroup::zmod(2),
                AbGroup { free: 0, torsion: vec![2, 4], divisible: vec![] },
            ]
            .into_iter()
            .chain((3..=levels).map(|_| AbGroup { free: 0, torsion: vec![4, 4], divisible: vec![] }))
            .collect(),
            pi: [
                vec![vec![1, 1]],
                vec![vec![1, 0], vec![0, 1]],
                vec![vec![1]],
            ]
            .into_iter()
            .chain((3..=levels).map(|_| vec![]))
            .collect(),
        }
    } else {
        WittDesc {
            total: AbGroup::f2_vec(4),
            ideal_chain: [AbGroup::f2_vec(4), AbGroup::f2_vec(3), AbGroup::zmod(2)]
                .into_iter()
                .chain((3..=levels).map(|_| AbGroup::trivial()))
                .collect(),
            quotients: [AbGroup::trivial(), AbGroup::zmod(2), AbGroup::f2_vec(3)]
                .into_iter()
                .chain((3..=levels).map(|_| AbGroup::f2_vec(4)))
                .collect(),
            pi: [
                vec![vec![1, 0, 0, 0]],
                vec![vec![1, 0, 0], vec![0, 1, 0]],
                vec![vec![1]],
            ]
            .into_iter()
            .chain((3..=levels).map(|_| vec![]))
            .collect(),
        }
    };

    Ok(FieldModel {
        name,
        char_exp: 1,
        minus_one_sum_of_two_squares: true,
        km2,
        km2_complete: true,
        rho_index: neg_one_nonsquare.then_some(0),
        km_int,
        hint,
        witt,
        mu_data: MuData::Formula { modulus: l - 1 },
        q_max,
    })
}

// ---------------------------------------------------------------------------
// validation

impl FieldModel {
    fn fail(&self, what: &str) -> Error {
        Error::ModelInvariant(format!("{} in model {}", what, self.name))
    }

    pub fn validate(&self) -> Result<()> {
        if self.km2.is_empty() || self.km2[0].labels.len() != 1 {
            return Err(self.fail("degree-0 mod-2 Milnor K-theory must be one-dimensional"));
        }
        for (n, deg) in self.km2.iter().enumerate() {
            let next_dim = match self.km2.get(n + 1) {
                Some(d) => d.labels.len(),
                None => 0,
            };
            let declared = deg.rho.len();
            if n + 1 < self.km2.len() || self.km2_complete {
                if declared != next_dim || deg.rho.iter().any(|r| r.len() != deg.labels.len()) {
                    return Err(self.fail(&format!(
                        "rho-multiplication matrix at degree {n} has the wrong shape"
                    )));
                }
            } else if declared != 0 {
                return Err(self.fail(&format!(
                    "rho-multiplication at the truncated top degree {n} must be left unstated"
                )));
            }
        }
        if let Some(i) = self.rho_index {
            let dim1 = self.km2.get(1).map_or(0, |d| d.labels.len());
            if i >= dim1 {
                return Err(self.fail("rho points outside the degree-1 basis"));
            }
            if self.km2[0].rho.iter().enumerate().any(|(j, row)| row[0] != u8::from(j == i)) {
                return Err(self.fail("rho-multiplication on 1 disagrees with the rho class"));
            }
        } else if self
            .km2
            .first()
            .is_some_and(|d| d.rho.iter().any(|row| row.iter().any(|&x| x == 1)))
        {
            return Err(self.fail("rho-multiplication on 1 must vanish when rho is zero"));
        }

        // A nonzero rho squared certifies -1 is not a sum of two squares.
        if let Some(i) = self.rho_index {
            let rho1 = &self.km2[1].rho;
            let sq_nonzero = rho1.iter().any(|row| row.get(i) == Some(&1));
            if sq_nonzero && self.minus_one_sum_of_two_squares {
                return Err(self.fail(
                    "rho squared is nonzero but -1 is flagged as a sum of two squares",
                ));
            }
        }

        for (n, deg) in self.km_int.iter().enumerate() {
            let dim = self.dim_k(n as i64)?;
            if deg.pr.len() != deg.group.fg_gens() || deg.pr.iter().any(|r| r.len() != dim) {
                return Err(self.fail(&format!(
                    "mod-2 reduction data at integral K-theory degree {n} has the wrong shape"
                )));
            }
            if f2_rank(&deg.pr) != dim {
                return Err(self.fail(&format!(
                    "mod-2 reduction at integral K-theory degree {n} is not surjective"
                )));
            }
        }

        for (&(p, q), entry) in &self.hint {
            if p < 0 || q < 0 || p > q || q > self.q_max {
                return Err(self.fail(&format!(
                    "integral motivic cohomology entry at ({p},{q}) is outside the stored range"
                )));
            }
            let dim = self.h(p, q)?.dim();
            if entry.pr.len() != entry.group.fg_gens()
                || entry.pr.iter().any(|r| r.len() != dim)
            {
                return Err(self.fail(&format!(
                    "reduction data at integral motivic cohomology ({p},{q}) has the wrong shape"
                )));
            }
            let mod2_rank = entry.group.tensor_zmod(2).torsion.len();
            if f2_rank(&entry.pr) != mod2_rank {
                return Err(self.fail(&format!(
                    "mod-2 reduction image at ({p},{q}) does not realize the mod-2 quotient"
                )));
            }
        }
        match self.hint.get(&(0, 0)) {
            Some(e) if e.group.iso(&AbGroup::z()) => {}
            _ => return Err(self.fail("weight-0 integral motivic cohomology must be Z")),
        }

        let n_top = (self.km_int.len() as i64 - 1).min(self.q_max);
        for n in 0..=n_top {
            let diag = self.hint_group(n, n)?;
            if !diag.iso(&self.km_int[n as usize].group) {
                return Err(self.fail(&format!(
                    "diagonal motivic cohomology at weight {n} disagrees with integral K-theory"
                )));
            }
        }

        // Bridge dimension count and the two-torsion pairing, per bidegree.
        for q in 0..=self.q_max {
            for p in 0..=q {
                let dim = self.h(p, q)?.dim();
                let here = self.hint_group(p, q)?;
                let next = self.hint_group(p + 1, q)?;
                let sub_dim = here.tensor_zmod(2).torsion.len();
                let tors_dim = next.torsion_sub(2).torsion.len();
                if dim != sub_dim + tors_dim {
                    return Err(self.fail(&format!(
                        "mod-2 rank at ({p},{q}) does not match its integral neighbors"
                    )));
                }
                let bridge = self.bridge(p, q)?;
                if bridge.c_indices.len() != bridge.two_torsion.len() {
                    return Err(self.fail(&format!(
                        "bridge complement at ({p},{q}) does not pair with the next two-torsion"
                    )));
                }
                self.check_sq1_bockstein(p, q, &bridge)?;
            }
        }

        self.validate_witt()?;
        self.validate_coefficient_lemmas()?;
        Ok(())
    }

    /// The first Steenrod square on tau^k y is k tau^{k-1} rho y; on the
    /// bridge side it is reduction after the integral Bockstein. The two
    /// must agree on every basis vector.
    fn check_sq1_bockstein(&self, p: i64, q: i64, bridge: &Bridge) -> Result<()> {
        let dim = self.h(p, q)?.dim();
        let target_dim = self.h(p + 1, q)?.dim();
        let next = self.hint_entry(p + 1, q)?;
        for i in 0..dim {
            let mut e = vec![0u8; dim];
            e[i] = 1;
            let closed: Vec<u8> = if (q - p) % 2 != 0 {
                self.rho_rows(p)?.iter().map(|row| row[i]).collect()
            } else {
                vec![0u8; target_dim]
            };
            let coords = self.bridge_coords(bridge, dim, &e)?;
            let mut via_bockstein = vec![0u8; target_dim];
            for (c, &x) in coords.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                if let TwoTorsionGen::Fg { gen_index, half } = bridge.two_torsion[c] {
                    if half % 2 == 1 {
                        for (t, v) in via_bockstein.iter_mut().enumerate() {
                            *v ^= next.pr[gen_index][t];
                        }
                    }
                }
            }
            if closed != via_bockstein {
                return Err(self.fail(&format!(
                    "first Steenrod square at ({p},{q}) disagrees with the integral Bockstein"
                )));
            }
        }
        Ok(())
    }

    fn validate_witt(&self) -> Result<()> {
        let wd = &self.witt;
        let len = wd.ideal_chain.len();
        if len == 0 || wd.quotients.len() != len {
            return Err(self.fail("Witt filtration sections must have matching lengths"));
        }
        if !wd.pi.is_empty() && wd.pi.len() != len {
            return Err(self.fail("Witt projections must cover the whole filtration"));
        }
        if !wd.ideal_chain[0].iso(&wd.total) {
            return Err(self.fail("Witt filtration must start at the whole ring"));
        }
        if !wd.quotients[0].is_trivial() {
            return Err(self.fail("the zeroth Witt quotient must vanish"));
        }
        for l in 0..len {
            let dim = match self.dim_k(l as i64) {
                Ok(d) => d,
                Err(_) => break,
            };
            // Successive filtration quotients realize mod-2 Milnor
            // K-theory; orders certify it whichever sections are finite.
            if l + 1 < len {
                let by_ideals = wd.ideal_chain[l].order().zip(wd.ideal_chain[l + 1].order());
                let by_quotients = wd.quotients[l + 1].order().zip(wd.quotients[l].order());
                if let Some((big, small)) = by_ideals.or(by_quotients) {
                    if big != small << dim {
                        return Err(self.fail(&format!(
                            "Witt filtration step {l} does not realize mod-2 Milnor K-theory"
                        )));
                    }
                }
            }
            if wd.pi.is_empty() {
                continue;
            }
            let pi = &wd.pi[l];
            if pi.len() != dim || pi.iter().any(|r| r.len() != wd.ideal_chain[l].fg_gens()) {
                return Err(self.fail(&format!(
                    "Witt projection at level {l} has the wrong shape"
                )));
            }
            if f2_rank(pi) != dim {
                return Err(self.fail(&format!("Witt projection at level {l} is not surjective")));
            }
        }
        Ok(())
    }

    /// Mod-4 and mod-8 coefficient groups are constrained by two appendix
    /// facts: the weight-diagonal mod-4 group in even distance is cyclic of
    /// order 4, and an invertible weight-4 class makes the groups
    /// 4-periodic in the weight.
    fn validate_coefficient_lemmas(&self) -> Result<()> {
        for k in (0..=self.q_max).step_by(2) {
            if !self.h_mod(0, k, 4)?.iso(&AbGroup::zmod(4)) {
                return Err(self.fail(&format!(
                    "mod-4 coefficients at (0,{k}) must form a cyclic group of order 4"
                )));
            }
        }
        for m in [4u64, 8] {
            for q in 0..=(self.q_max - 4) {
                for p in 0..=q {
                    if !self.h_mod(p, q, m)?.iso(&self.h_mod(p, q + 4, m)?) {
                        return Err(self.fail(&format!(
                            "mod-{m} coefficients fail weight 4-periodicity at ({p},{q})"
                        )));
                    }
                }
            }
        }
        // Weight-one coefficients are the roots of unity.
        for m in [2u64, 3, 4, 8, 12, 24] {
            if let Ok(mu) = self.mu(m) {
                if !self.h_mod(0, 1, m)?.iso(&mu) {
                    return Err(self.fail(&format!(
                        "mod-{m} coefficients at (0,1) disagree with the stored roots of unity"
                    )));
                }
            }
        }
        if let MuData::Table(t) = &self.mu_data {
            for (&m, g) in t {
                for (&m2, g2) in t {
                    if m2 % m == 0 {
                        if let (Some(a), Some(b)) = (g.order(), g2.order()) {
                            if b % a != 0 {
                                return Err(self.fail(&format!(
                                    "roots of unity at {m} do not divide those at {m2}"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// the model file format

#[derive(Serialize, Deserialize)]
struct FileModel {
    meta: FileMeta,
    km2: Vec<FileKm2>,
    rho_index: FileRhoIndex,
    km_int: Vec<FileKmInt>,
    #[serde(rename = "Hint")]
    hint: BTreeMap<String, FileHint>,
    witt: FileWitt,
    mu: FileMu,
}

#[derive(Serialize, Deserialize)]
struct FileMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    char_exp: u64,
    minus_one_sum_of_two_squares: bool,
    #[serde(default = "default_true")]
    km2_complete: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
struct FileKm2 {
    dim: usize,
    labels: Vec<String>,
    rho_matrix: Vec<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FileRhoIndex {
    Index(usize),
    Word(String),
}

#[derive(Serialize, Deserialize)]
struct FileKmInt {
    group: AbGroup,
    pr: Vec<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct FileHint {
    group: AbGroup,
    pr_image_basis: Vec<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct FileWitt {
    total: AbGroup,
    ideal_chain: Vec<AbGroup>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    quotients: Vec<AbGroup>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pi: Vec<Vec<Vec<u8>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FileMu {
    Formula { modulus: u64 },
    Table(BTreeMap<String, AbGroup>),
}

/// Drops p-primary torsion from a descriptor and the reduction rows of the
/// generators that disappear entirely.
fn localize_entry(group: &AbGroup, pr: &[Vec<u8>], p: u64) -> (AbGroup, Vec<Vec<u8>>) {
    if p <= 1 {
        return (group.clone(), pr.to_vec());
    }
    let mut torsion = vec![];
    let mut rows: Vec<Vec<u8>> = pr.iter().take(group.free).cloned().collect();
    for (k, &d) in group.torsion.iter().enumerate() {
        let d2 = crate::abelian::prime_to_part(d, p);
        if d2 > 1 {
            torsion.push(d2);
            rows.push(pr[group.free + k].clone());
        }
    }
    let divisible = group
        .divisible
        .iter()
        .filter(|t| !(t.kind == DivKind::Pruefer && t.p == Some(p)))
        .cloned()
        .collect();
    (AbGroup { free: group.free, torsion, divisible }, rows)
}

impl FieldModel {
    pub fn load(path: &Path) -> Result<FieldModel> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        let file: FileModel = serde_json::from_str(&text)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        let fallback = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".into());
        Self::from_file(file, &fallback)
    }

    fn from_file(file: FileModel, fallback_name: &str) -> Result<FieldModel> {
        let c = file.meta.char_exp;
        if c != 1 && (c == 2 || !is_prime(c)) {
            return Err(Error::Schema(
                "characteristic exponent must be 1 or an odd prime".into(),
            ));
        }
        let mut km2 = vec![];
        for entry in file.km2 {
            if entry.labels.len() != entry.dim {
                return Err(Error::Schema("mod-2 basis labels disagree with dim".into()));
            }
            km2.push(Km2Deg { labels: entry.labels, rho: entry.rho_matrix });
        }
        let rho_index = match file.rho_index {
            FileRhoIndex::Index(i) => Some(i),
            FileRhoIndex::Word(w) if w == "zero" => None,
            FileRhoIndex::Word(w) => {
                return Err(Error::Schema(format!("rho_index must be an index or \"zero\", got `{w}`")))
            }
        };
        let km_int = file
            .km_int
            .into_iter()
            .map(|e| {
                let (group, pr) = localize_entry(&e.group, &e.pr, c);
                KmIntDeg { group, pr }
            })
            .collect();
        let mut hint = BTreeMap::new();
        for (key, entry) in file.hint {
            let (p, q) = key
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| {
                    Error::Schema(format!("motivic cohomology key `{key}` is not \"p,q\""))
                })?;
            let (group, pr) = localize_entry(&entry.group, &entry.pr_image_basis, c);
            hint.insert((p, q), HintEntry { group, pr });
        }
        let q_max = hint.keys().map(|&(_, q)| q).max().unwrap_or(0);
        let witt = WittDesc {
            total: file.witt.total,
            ideal_chain: file.witt.ideal_chain,
            quotients: file.witt.quotients,
            pi: file.witt.pi,
        };
        let mu_data = match file.mu {
            FileMu::Formula { modulus } => MuData::Formula { modulus },
            FileMu::Table(t) => {
                let mut table = BTreeMap::new();
                for (k, g) in t {
                    let m: u64 = k
                        .parse()
                        .map_err(|_| Error::Schema(format!("mu key `{k}` is not an integer")))?;
                    table.insert(m, g.localize_away(c));
                }
                MuData::Table(table)
            }
        };
        let model = FieldModel {
            name: file.meta.name.unwrap_or_else(|| fallback_name.to_string()),
            char_exp: c,
            minus_one_sum_of_two_squares: file.meta.minus_one_sum_of_two_squares,
            km2,
            km2_complete: file.meta.km2_complete,
            rho_index,
            km_int,
            hint,
            witt,
            mu_data,
            q_max,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn to_file_json(&self) -> serde_json::Value {
        let file = FileModel {
            meta: FileMeta {
                name: Some(self.name.clone()),
                char_exp: self.char_exp,
                minus_one_sum_of_two_squares: self.minus_one_sum_of_two_squares,
                km2_complete: self.km2_complete,
            },
            km2: self
                .km2
                .iter()
                .map(|d| FileKm2 {
                    dim: d.labels.len(),
                    labels: d.labels.clone(),
                    rho_matrix: d.rho.clone(),
                })
                .collect(),
            rho_index: match self.rho_index {
                Some(i) => FileRhoIndex::Index(i),
                None => FileRhoIndex::Word("zero".into()),
            },
            km_int: self
                .km_int
                .iter()
                .map(|e| FileKmInt { group: e.group.clone(), pr: e.pr.clone() })
                .collect(),
            hint: self
                .hint
                .iter()
                .map(|(&(p, q), e)| {
                    (format!("{p},{q}"), FileHint {
                        group: e.group.clone(),
                        pr_image_basis: e.pr.clone(),
                    })
                })
                .collect(),
            witt: FileWitt {
                total: self.witt.total.clone(),
                ideal_chain: self.witt.ideal_chain.clone(),
                quotients: self.witt.quotients.clone(),
                pi: self.witt.pi.clone(),
            },
            mu: match &self.mu_data {
                MuData::Formula { modulus } => FileMu::Formula { modulus: *modulus },
                MuData::Table(t) => {
                    FileMu::Table(t.iter().map(|(m, g)| (m.to_string(), g.clone())).collect())
                }
            },
        };
        serde_json::to_value(file).expect("model serialization is infallible")
    }
}

// ---------------------------------------------------------------------------
