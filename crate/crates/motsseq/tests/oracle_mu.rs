//! Roots of unity and weight-torsion orders, checked against direct
//! counting in explicitly constructed residue fields. The reference side
//! never touches the model's stored orders: finite fields are built as
//! polynomial quotient rings and p-adic counts reduce to their residue
//! fields, where solutions of x^n = 1 lift uniquely for n prime to p and
//! no nontrivial p-power roots exist for odd p.

mod common;

use common::{descriptor_killed_by, PolyField};
use motsseq::abelian::{gcd, prime_to_part, valuation};
use motsseq::FieldModel;

fn divisors(m: u64) -> Vec<u64> {
    (1..=m).filter(|d| m % d == 0).collect()
}

fn odd_prime_powers_to(limit: u64) -> Vec<u64> {
    (3..=limit)
        .step_by(2)
        .filter(|&q| {
            let p = (2..=q).find(|d| q % d == 0).unwrap();
            let mut m = q;
            while m % p == 0 {
                m /= p;
            }
            m == 1
        })
        .collect()
}

#[test]
fn finite_field_roots_of_unity_match_counting() {
    for q in odd_prime_powers_to(100) {
        let model = FieldModel::builtin(&format!("Fq:{q}")).unwrap();
        let field = PolyField::new(q);
        assert_eq!(field.order(), q);
        for m in [2u64, 3, 4, 8, 12, 24] {
            let mu = model.mu(m).unwrap();
            for d in divisors(m) {
                assert_eq!(
                    descriptor_killed_by(&mu, d),
                    field.count_nth_roots(d),
                    "mu_{m} of F_{q}: elements killed by {d}"
                );
            }
        }
    }
}

#[test]
fn padic_roots_of_unity_match_residue_counting() {
    for l in [3u64, 5, 7, 11, 13] {
        let model = FieldModel::builtin(&format!("Qp:{l}")).unwrap();
        let residue = PolyField::new(l);
        for m in [2u64, 3, 4, 8, 12, 24] {
            let mu = model.mu(m).unwrap();
            for d in divisors(m) {
                // Unramified lifting: an n-th root of unity downstairs
                // lifts once when gcd(n, l) = 1, and x^l = 1 forces x = 1.
                let expect = residue.count_nth_roots(prime_to_part(d, l));
                assert_eq!(
                    descriptor_killed_by(&mu, d),
                    expect,
                    "mu_{m} of the {l}-adics: elements killed by {d}"
                );
            }
        }
    }
}

#[test]
fn real_roots_of_unity() {
    let model = FieldModel::builtin("R").unwrap();
    for m in [2u64, 3, 4, 8, 12, 24, 240, 504] {
        let expect = if m % 2 == 0 { 2 } else { 1 };
        assert_eq!(model.mu(m).unwrap().order(), Some(expect), "mu_{m} over the reals");
    }
}

#[test]
fn complex_roots_of_unity_are_full() {
    let model = FieldModel::builtin("C").unwrap();
    for m in [2u64, 3, 4, 8, 12, 24, 240, 504] {
        assert_eq!(model.mu(m).unwrap().order(), Some(m as u128));
    }
}

/// The degree-1 weight-m integral motivic cohomology of a finite field is
/// cyclic of the order of the unit group of the degree-m extension. Count
/// that unit group's torsion directly for small extensions.
#[test]
fn finite_field_weight_torsion_matches_extension_counting() {
    for (q, max_weight) in [(3u64, 4i64), (5, 3), (9, 2), (7, 2)] {
        let model = FieldModel::builtin(&format!("Fq:{q}")).unwrap();
        for m in 1..=max_weight {
            let ext = PolyField::new(q.pow(m as u32));
            let stored = model.hint_group(1, m).unwrap();
            for c in [2u64, 3, 4, 8, 12, 16, 24, 5, 7, 13] {
                assert_eq!(
                    stored.torsion.iter().map(|&d| gcd(d, c)).product::<u64>(),
                    ext.count_nth_roots(c),
                    "weight-{m} torsion of F_{q}, {c}-part"
                );
            }
        }
    }
}

/// Weight-q torsion orders for the p-adics: the prime-to-l part counts
/// Frobenius-fixed points of the twisted roots of unity (Frobenius acts by
/// l^q), and the l-part is maximal with every unit of Z/l^k a q-th root of
/// one.
#[test]
fn padic_weight_torsion_matches_cyclotomic_counting() {
    for l in [3u64, 5, 7, 13] {
        let model = FieldModel::builtin(&format!("Qp:{l}")).unwrap();
        for q in 1..=6i64 {
            let stored = model.hint_group(1, q).unwrap();
            assert_eq!(stored.torsion.len(), 1, "one torsion order at weight {q} over Qp:{l}");
            let w = stored.torsion[0];
            for c in 2..=240u64 {
                if gcd(c, l) != 1 {
                    continue;
                }
                let frob: u64 = {
                    let mut acc = 1u64;
                    for _ in 0..q {
                        acc = acc * (l % c) % c;
                    }
                    acc
                };
                let fixed = gcd((frob + c - 1) % c, c);
                assert_eq!(
                    gcd(w, c),
                    fixed,
                    "prime-to-{l} part of weight-{q} torsion over Qp:{l}, modulus {c}"
                );
            }
            for k in 1..=3u32 {
                let lk = l.pow(k);
                let all_fixed = (1..lk)
                    .filter(|a| a % l != 0)
                    .all(|a| {
                        let mut acc = 1u64;
                        for _ in 0..q {
                            acc = acc * a % lk;
                        }
                        acc == 1
                    });
                assert_eq!(
                    valuation(w, l) >= k,
                    all_fixed,
                    "{l}-part of weight-{q} torsion over Qp:{l} at level {k}"
                );
            }
        }
    }
}

/// Degree-2 weight-q torsion over the p-adics matches the one-lower twist.
#[test]
fn padic_degree2_torsion_matches_cyclotomic_counting() {
    for l in [3u64, 5, 7] {
        let model = FieldModel::builtin(&format!("Qp:{l}")).unwrap();
        for q in 3..=6i64 {
            let stored = model.hint_group(2, q).unwrap();
            let w = stored.torsion[0];
            assert_eq!(valuation(w, l), 0, "no {l}-part in finite degree-2 torsion");
            for c in 2..=240u64 {
                if gcd(c, l) != 1 {
                    continue;
                }
                let mut frob = 1u64;
                for _ in 0..(q - 1) {
                    frob = frob * (l % c) % c;
                }
                let fixed = gcd((frob + c - 1) % c, c);
                assert_eq!(gcd(w, c), fixed, "degree-2 weight-{q} over Qp:{l}, modulus {c}");
            }
        }
    }
}
