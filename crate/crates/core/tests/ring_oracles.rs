//! Direct Birkhoff sums over preimage trees, checked against ring classes and
//! the truncated operator.

use ztselect::ringspace::{dist_to_fixed, ring_of};
use ztselect::xferop::{build_operator, RingVector};
use ztselect::{Params, SignedLog, Symbol, Word};

/// `A` straight from the metric, without going through ring classification.
fn potential_direct(w: &Word, p: &Params) -> f64 {
    match w.symbols()[0] {
        Symbol::Zero => {
            let d = dist_to_fixed(w, Symbol::Zero).unwrap();
            assert!(d.resolved);
            -d.value
        }
        Symbol::One => {
            let d = dist_to_fixed(w, Symbol::One).unwrap();
            assert!(d.resolved);
            -p.gamma_slope * d.value
        }
        Symbol::Two => -p.alpha,
    }
}

/// `(L^k 1)(w) = Σ_{|v|=k} e^{β S_k A(vw)}`, summed in a fixed order.
fn birkhoff_power(w: &Word, k: usize, p: &Params) -> SignedLog {
    if k == 0 {
        return SignedLog::ONE;
    }
    let mut total = SignedLog::ZERO;
    for a in Symbol::ALL {
        let aw = w.prepend(a).unwrap();
        let weight = SignedLog::exp(p.beta * potential_direct(&aw, p));
        total = total + weight * birkhoff_power(&aw, k - 1, p);
    }
    total
}

fn word(d: &[u8]) -> Word {
    Word::from_digits(d).unwrap()
}

fn operator_power(p: &Params, depth: usize, k: usize) -> RingVector {
    let op = build_operator(p, depth).unwrap();
    let mut v = RingVector::filled(op.layout(), SignedLog::ONE);
    for _ in 0..k {
        v = op.apply(&v);
    }
    v
}

// pairs of words in the same ring with different continuations
fn ring_mates() -> Vec<(Word, Word)> {
    vec![
        (word(&[0, 1, 2]), word(&[0, 2, 0, 1])),
        (word(&[0, 0, 0, 2]), word(&[0, 0, 0, 1, 1, 1])),
        (word(&[1, 0]), word(&[1, 2, 2, 2])),
        (word(&[1, 1, 1, 1, 0, 2]), word(&[1, 1, 1, 1, 2])),
        (word(&[2, 0]), word(&[2, 1, 1])),
    ]
}

#[test]
fn birkhoff_sums_are_constant_on_rings() {
    let p = Params::new(1.5, 3.0, 2.0).unwrap();
    for (u, v) in ring_mates() {
        assert_eq!(ring_of(&u).unwrap().ring, ring_of(&v).unwrap().ring);
        for k in 0..=8 {
            let a = birkhoff_power(&u, k, &p);
            let b = birkhoff_power(&v, k, &p);
            assert_eq!(a, b, "k={k} {u:?} {v:?}");
        }
    }
}

#[test]
fn birkhoff_sums_are_constant_on_rings_at_depth_twelve() {
    let p = Params::new(0.5, 2.0, 1.0).unwrap();
    for (u, v) in ring_mates().into_iter().take(2) {
        assert_eq!(birkhoff_power(&u, 12, &p), birkhoff_power(&v, 12, &p));
    }
}

#[test]
fn operator_powers_match_birkhoff_sums() {
    for (alpha, gamma, beta) in [(0.5, 3.0, 1.0), (2.0, 5.0, 3.0), (1.0, 2.0, 0.25)] {
        let p = Params::new(alpha, gamma, beta).unwrap();
        for k in [1usize, 4, 9] {
            let v = operator_power(&p, 30, k);
            for (u, _) in ring_mates() {
                let ring = ring_of(&u).unwrap().ring;
                let direct = birkhoff_power(&u, k, &p);
                let err = v.get(ring).unwrap().rel_diff(direct);
                assert!(err < 1e-12, "{ring} k={k}: {err:e}");
            }
        }
    }
}

#[test]
fn fixed_point_prefix_weights_grow_with_the_run() {
    // deeper rings sit closer to the fixed point, so their weights are larger
    let p = Params::standard(1.0, 4.0).unwrap();
    let mut last = SignedLog::ZERO;
    for n in 1..=6 {
        let mut digits = vec![0u8; n];
        digits.push(2);
        let val = birkhoff_power(&word(&digits), 3, &p);
        assert!(val > last);
        last = val;
    }
}
