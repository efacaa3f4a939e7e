//! Brute-force reference machinery shared by the oracle tests.
//!
//! Everything here works with concrete finite abelian groups: a group is a
//! product of cyclic groups given by a list of orders, an element is a tuple
//! of residues, and every invariant is computed by enumerating elements.
//! Nothing in this module calls into the library's linear algebra, so a
//! disagreement always points at the library.

#![allow(dead_code)]

use std::collections::HashSet;

use motsseq::AbGroup;

/// Minimal deterministic generator (64-bit LCG, top bits).
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 11
    }

    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        self.next_u64() % n
    }
}

/// A finite product of cyclic groups; elements are tuples of residues.
#[derive(Clone, Debug)]
pub struct ConcreteGroup {
    pub orders: Vec<u64>,
}

pub type Elt = Vec<u64>;

impl ConcreteGroup {
    pub fn new(orders: Vec<u64>) -> Self {
        assert!(orders.iter().all(|&d| d >= 1));
        ConcreteGroup { orders }
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    pub fn zero(&self) -> Elt {
        vec![0; self.orders.len()]
    }

    pub fn elements(&self) -> Vec<Elt> {
        let mut out = vec![self.zero()];
        for (i, &d) in self.orders.iter().enumerate() {
            let prev = std::mem::take(&mut out);
            for e in prev {
                for r in 0..d {
                    let mut e2 = e.clone();
                    e2[i] = r;
                    out.push(e2);
                }
            }
        }
        out
    }

    pub fn add(&self, a: &Elt, b: &Elt) -> Elt {
        self.orders.iter().zip(a.iter().zip(b)).map(|(&d, (&x, &y))| (x + y) % d).collect()
    }

    pub fn smul(&self, k: u64, a: &Elt) -> Elt {
        self.orders
            .iter()
            .zip(a)
            .map(|(&d, &x)| (((k % d) as u128 * x as u128) % d as u128) as u64)
            .collect()
    }

    pub fn is_zero(&self, a: &Elt) -> bool {
        a.iter().all(|&x| x == 0)
    }

    /// Additive order of an element, by repeated addition.
    pub fn elt_order(&self, a: &Elt) -> u64 {
        let mut acc = a.clone();
        let mut k = 1;
        while !self.is_zero(&acc) {
            acc = self.add(&acc, a);
            k += 1;
        }
        k
    }

    /// #{x : kx = 0}, counted by scanning every element.
    pub fn count_killed_by(&self, k: u64) -> u64 {
        self.elements().iter().filter(|e| self.is_zero(&self.smul(k, e))).count() as u64
    }

    /// Full census: the counts #{x : kx = 0} for k = 1..=order. Two finite
    /// abelian groups are isomorphic exactly when their censuses agree.
    pub fn census(&self) -> Vec<u64> {
        (1..=self.order()).map(|k| self.count_killed_by(k)).collect()
    }

    /// Census of the quotient by the subgroup `sub` (a subset closed under
    /// the group operations): #{cosets killed by k} = #{x : kx in sub}/|sub|.
    pub fn quotient_census(&self, sub: &HashSet<Elt>) -> Vec<u64> {
        let q = self.order() / sub.len() as u64;
        (1..=q)
            .map(|k| {
                let hits = self
                    .elements()
                    .iter()
                    .filter(|e| sub.contains(&self.smul(k, e)))
                    .count() as u64;
                hits / sub.len() as u64
            })
            .collect()
    }

    /// The subgroup {kx : x in G} as a set.
    pub fn multiples(&self, k: u64) -> HashSet<Elt> {
        self.elements().iter().map(|e| self.smul(k, e)).collect()
    }

    /// Census of the subgroup {x : kx = 0}.
    pub fn torsion_census(&self, k: u64) -> Vec<u64> {
        let members: Vec<Elt> = self
            .elements()
            .into_iter()
            .filter(|e| self.is_zero(&self.smul(k, e)))
            .collect();
        subset_census(self, &members)
    }
}

/// Census of a subgroup given as an explicit list of members.
pub fn subset_census(g: &ConcreteGroup, members: &[Elt]) -> Vec<u64> {
    let n = members.len() as u64;
    (1..=n)
        .map(|k| members.iter().filter(|e| g.is_zero(&g.smul(k, e))).count() as u64)
        .collect()
}

/// Census of a finite descriptor: a cyclic factor Z/d contributes gcd(d, k)
/// solutions of kx = 0, independently per factor.
pub fn descriptor_census(g: &AbGroup) -> Vec<u64> {
    assert!(g.is_finite(), "census needs a finite group");
    let order: u64 = g.torsion.iter().product();
    (1..=order)
        .map(|k| g.torsion.iter().map(|&d| motsseq::abelian::gcd(d, k)).product())
        .collect()
}

/// All abelian groups of order 2..=max as lists of prime-power cyclic
/// orders, one representative per isomorphism class.
pub fn all_groups_up_to(max: u64) -> Vec<Vec<u64>> {
    let mut out = vec![];
    for n in 2..=max {
        out.extend(groups_of_order(n));
    }
    out
}

pub fn groups_of_order(n: u64) -> Vec<Vec<u64>> {
    let mut per_prime: Vec<Vec<Vec<u64>>> = vec![];
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            per_prime.push(partitions(e).iter().map(|q| q.iter().map(|&a| p.pow(a)).collect()).collect());
        }
        p += 1;
    }
    if m > 1 {
        per_prime.push(vec![vec![m]]);
    }
    let mut combos: Vec<Vec<u64>> = vec![vec![]];
    for choices in per_prime {
        let prev = std::mem::take(&mut combos);
        for c in prev {
            for choice in &choices {
                let mut c2 = c.clone();
                c2.extend_from_slice(choice);
                combos.push(c2);
            }
        }
    }
    combos
}

fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn go(n: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for k in (1..=n.min(max)).rev() {
            cur.push(k);
            go(n - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    go(n, n, &mut vec![], &mut out);
    out
}

/// Compare a finite descriptor against a brute-force census.
pub fn matches_census(g: &AbGroup, census: &[u64]) -> bool {
    if !g.is_finite() {
        return false;
    }
    descriptor_census(g) == census
}

// ---------------------------------------------------------------------------
// Finite fields as polynomial quotient rings, built from scratch so counts
// of roots of unity and square classes are genuinely independent of the
// library's stored orders.

/// F_{p^k} realized as F_p[x]/(f) for a brute-force-found irreducible f.
/// Elements are coefficient vectors of length k (low degree first).
#[derive(Clone, Debug)]
pub struct PolyField {
    pub p: u64,
    /// Monic modulus of degree k, length k+1, low degree first.
    pub modulus: Vec<u64>,
}

pub type FElt = Vec<u64>;

impl PolyField {
    pub fn new(q: u64) -> PolyField {
        let p = (2..=q).find(|&d| q % d == 0).expect("q > 1");
        let mut k = 0;
        let mut m = q;
        while m > 1 {
            assert_eq!(m % p, 0, "{q} is not a prime power");
            m /= p;
            k += 1;
        }
        let modulus = find_irreducible(p, k);
        PolyField { p, modulus }
    }

    pub fn deg(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.deg() as u32)
    }

    pub fn zero(&self) -> FElt {
        vec![0; self.deg()]
    }

    pub fn one(&self) -> FElt {
        let mut e = self.zero();
        e[0] = 1;
        e
    }

    pub fn neg(&self, a: &FElt) -> FElt {
        a.iter().map(|&c| (self.p - c % self.p) % self.p).collect()
    }

    pub fn add(&self, a: &FElt, b: &FElt) -> FElt {
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.p).collect()
    }

    pub fn mul(&self, a: &FElt, b: &FElt) -> FElt {
        let k = self.deg();
        let mut prod = vec![0u64; 2 * k];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        // Reduce modulo the monic modulus.
        for d in (k..2 * k).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for (e, &mc) in self.modulus.iter().enumerate().take(k) {
                let idx = d - k + e;
                prod[idx] = (prod[idx] + c * (self.p - mc % self.p)) % self.p;
            }
        }
        prod.truncate(k);
        prod
    }

    pub fn pow(&self, a: &FElt, mut n: u64) -> FElt {
        let mut base = a.clone();
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    /// All nonzero elements.
    pub fn units(&self) -> Vec<FElt> {
        let mut out = vec![];
        let k = self.deg();
        let total = self.p.pow(k as u32);
        for mut idx in 1..total {
            let mut e = self.zero();
            for c in e.iter_mut().take(k) {
                *c = idx % self.p;
                idx /= self.p;
            }
            out.push(e);
        }
        out
    }

    pub fn is_one(&self, a: &FElt) -> bool {
        *a == self.one()
    }

    /// Number of solutions of x^n = 1.
    pub fn count_nth_roots(&self, n: u64) -> u64 {
        self.units().iter().filter(|u| self.is_one(&self.pow(u, n))).count() as u64
    }

    pub fn is_square(&self, a: &FElt) -> bool {
        self.units().iter().any(|u| self.mul(u, u) == *a)
    }
}

fn poly_rem(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = mod_inverse(b[db], p);
    while r.len() > db {
        let d = r.len() - 1;
        let c = r[d] % p;
        if c != 0 {
            let f = c * lead_inv % p;
            for (e, &bc) in b.iter().enumerate() {
                let idx = d - db + e;
                r[idx] = (r[idx] + f * (p - bc % p)) % p;
            }
        }
        r.pop();
    }
    while r.len() > 1 && *r.last().unwrap() == 0 {
        r.pop();
    }
    r
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // p is prime; Fermat.
    let mut acc = 1u64;
    let mut base = a % p;
    let mut n = p - 2;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        n >>= 1;
    }
    acc
}

fn all_monic(p: u64, deg: usize) -> Vec<Vec<u64>> {
    let mut out = vec![];
    let total = p.pow(deg as u32);
    for mut idx in 0..total {
        let mut f = vec![0u64; deg + 1];
        for c in f.iter_mut().take(deg) {
            *c = idx % p;
            idx /= p;
        }
        f[deg] = 1;
        out.push(f);
    }
    out
}

fn find_irreducible(p: u64, k: usize) -> Vec<u64> {
    if k == 1 {
        return vec![0, 1];
    }
    'cand: for f in all_monic(p, k) {
        for d in 1..=k / 2 {
            for g in all_monic(p, d) {
                let r = poly_rem(p, &f, &g);
                if r.len() == 1 && r[0] == 0 {
                    continue 'cand;
                }
            }
        }
        return f;
    }
    unreachable!("irreducible polynomials exist in every degree");
}

/// Number of elements of a finitely generated descriptor killed by n.
pub fn descriptor_killed_by(g: &AbGroup, n: u64) -> u64 {
    assert!(g.free == 0 && g.divisible.is_empty());
    g.torsion.iter().map(|&d| motsseq::abelian::gcd(d, n)).product()
}
