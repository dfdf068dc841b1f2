//! Words, the ring partition of the full 3-shift, the metric, the
//! two-slope potential and the ring-level preimage structure.
//!
//! The partition is `{[0ⁿ∗₀]}ₙ ∪ {[1ⁿ∗₁]}ₙ ∪ {[2]}` plus the fixed points
//! `0^∞`, `1^∞`. The potential is constant on every ring, and so is every
//! iterate of the transfer operator applied to a ring-constant function.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_WORD_LEN: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Symbol {
    Zero,
    One,
    Two,
}

impl Symbol {
    pub const ALL: [Symbol; 3] = [Symbol::Zero, Symbol::One, Symbol::Two];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Symbol> {
        Self::ALL.get(i).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.len() > MAX_WORD_LEN {
            return Err(Error::WordTooLong {
                len: symbols.len(),
                max: MAX_WORD_LEN,
            });
        }
        Ok(Word(symbols))
    }

    /// Build from digits `0`, `1`, `2`.
    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        let symbols = digits
            .iter()
            .map(|&d| {
                Symbol::from_index(d as usize)
                    .ok_or_else(|| Error::InvalidArgument(format!("symbol {d} not in {{0,1,2}}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols)
    }

    pub fn constant(symbol: Symbol, len: usize) -> Result<Self> {
        Self::new(vec![symbol; len])
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `a·self`.
    pub fn prepend(&self, a: Symbol) -> Result<Self> {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(a);
        v.extend_from_slice(&self.0);
        Self::new(v)
    }

    /// `σ(self)`: drop the first symbol.
    pub fn shift(&self) -> Word {
        Word(self.0.get(1..).unwrap_or(&[]).to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.index())?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ring {
    /// `[0ⁿ∗₀]`
    ZeroRun(u32),
    /// `[1ⁿ∗₁]`
    OneRun(u32),
    /// `[2]`
    TwoHead,
    Fix0,
    Fix1,
    /// `[0^{N+1}] ∖ {0^∞}`
    Tail0(u32),
    /// `[1^{N+1}] ∖ {1^∞}`
    Tail1(u32),
}

impl Ring {
    pub fn is_tail(self) -> bool {
        matches!(self, Ring::Tail0(_) | Ring::Tail1(_))
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::ZeroRun(n) => write!(f, "0^{n}*0"),
            Ring::OneRun(n) => write!(f, "1^{n}*1"),
            Ring::TwoHead => write!(f, "2"),
            Ring::Fix0 => write!(f, "0^inf"),
            Ring::Fix1 => write!(f, "1^inf"),
            Ring::Tail0(n) => write!(f, "tail0({n})"),
            Ring::Tail1(n) => write!(f, "tail1({n})"),
        }
    }
}

/// Problem instance: level `alpha` on `[2]`, slope `gamma_slope` at `1^∞`,
/// inverse temperature `beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: f64,
    pub gamma_slope: f64,
    pub beta: f64,
}

impl Params {
    pub fn new(alpha: f64, gamma_slope: f64, beta: f64) -> Result<Self> {
        let p = Params {
            alpha,
            gamma_slope,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    /// The slope used throughout the original analysis.
    pub fn standard(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, 3.0, beta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(self.gamma_slope.is_finite() && self.gamma_slope > 1.0) {
            return Err(Error::InvalidParams(format!(
                "gamma slope must be > 1, got {}",
                self.gamma_slope
            )));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "beta must be >= 0, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.alpha, self.gamma_slope, beta)
    }
}

/// Result of classifying a finite word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classified {
    pub ring: Ring,
    /// Set when the word is a constant `0^L`/`1^L`: it is a prefix of the
    /// reported ring and of every deeper one (and of the fixed point).
    pub unresolved: bool,
}

pub fn ring_of(w: &Word) -> Result<Classified> {
    let s = w.symbols();
    let first = *s.first().ok_or(Error::EmptyWord)?;
    if first == Symbol::Two {
        return Ok(Classified {
            ring: Ring::TwoHead,
            unresolved: false,
        });
    }
    let run = s.iter().take_while(|&&c| c == first).count();
    let unresolved = run == s.len();
    let n = run as u32;
    let ring = if first == Symbol::Zero {
        Ring::ZeroRun(n)
    } else {
        Ring::OneRun(n)
    };
    Ok(Classified { ring, unresolved })
}

/// Distance between two words compared on their common length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WordDistance {
    pub value: f64,
    /// `false` when the words agree on the whole compared range; `value` is then 0.
    pub resolved: bool,
}

pub fn dist(x: &Word, y: &Word) -> Result<WordDistance> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyWord);
    }
    let first_diff = x
        .symbols()
        .iter()
        .zip(y.symbols())
        .position(|(a, b)| a != b);
    Ok(match first_diff {
        Some(n) => WordDistance {
            value: (-(n as f64)).exp2(),
            resolved: true,
        },
        None => WordDistance {
            value: 0.0,
            resolved: false,
        },
    })
}

/// Distance from a word to the fixed point `a^∞`.
pub fn dist_to_fixed(w: &Word, a: Symbol) -> Result<WordDistance> {
    let fixed = Word::constant(a, w.len())?;
    dist(w, &fixed)
}

/// Potential value on a ring.
pub fn potential(r: Ring, p: &Params) -> Result<f64> {
    Ok(match r {
        Ring::ZeroRun(n) => -(-f64::from(n)).exp2(),
        Ring::OneRun(n) => -p.gamma_slope * (-f64::from(n)).exp2(),
        Ring::TwoHead => -p.alpha,
        Ring::Fix0 | Ring::Fix1 => 0.0,
        Ring::Tail0(_) | Ring::Tail1(_) => return Err(Error::TailRing(r.to_string())),
    })
}

/// One branch `a·x` of the inverse shift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Branch {
    pub symbol: Symbol,
    pub ring: Ring,
    pub potential: f64,
}

/// The three preimage branches of any point in ring `r`, in symbol order.
pub fn preimage_rings(r: Ring, p: &Params) -> Result<[Branch; 3]> {
    let zero = |ring: Ring| Branch {
        symbol: Symbol::Zero,
        ring,
        potential: 0.0,
    };
    let (b0, b1) = match r {
        Ring::ZeroRun(n) => (zero(Ring::ZeroRun(n + 1)), zero(Ring::OneRun(1))),
        Ring::OneRun(n) => (zero(Ring::ZeroRun(1)), zero(Ring::OneRun(n + 1))),
        Ring::TwoHead => (zero(Ring::ZeroRun(1)), zero(Ring::OneRun(1))),
        Ring::Fix0 => (zero(Ring::Fix0), zero(Ring::OneRun(1))),
        Ring::Fix1 => (zero(Ring::ZeroRun(1)), zero(Ring::Fix1)),
        Ring::Tail0(_) | Ring::Tail1(_) => return Err(Error::TailRing(r.to_string())),
    };
    let mut out = [
        b0,
        Branch {
            symbol: Symbol::One,
            ..b1
        },
        Branch {
            symbol: Symbol::Two,
            ring: Ring::TwoHead,
            potential: 0.0,
        },
    ];
    for b in &mut out {
        b.potential = potential(b.ring, p)?;
    }
    Ok(out)
}

/// Potential of a word whose ring is resolved (or is a fixed-point prefix
/// long enough that the caller accepts the deepest ring it can see).
pub fn potential_of_word(w: &Word, p: &Params) -> Result<f64> {
    potential(ring_of(w)?.ring, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(d: &[u8]) -> Word {
        Word::from_digits(d).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            ring_of(&w(&[0, 0, 1])).unwrap(),
            Classified {
                ring: Ring::ZeroRun(2),
                unresolved: false
            }
        );
        assert_eq!(ring_of(&w(&[2, 0, 0])).unwrap().ring, Ring::TwoHead);
        let c = ring_of(&w(&[1, 1, 1])).unwrap();
        assert_eq!(c.ring, Ring::OneRun(3));
        assert!(c.unresolved);
        assert_eq!(ring_of(&w(&[])), Err(Error::EmptyWord));
    }

    #[test]
    fn distance_examples() {
        let d = |x: &[u8]| dist_to_fixed(&w(x), Symbol::Zero).unwrap();
        assert_eq!(d(&[0, 1, 2, 2]).value, 0.5);
        assert_eq!(d(&[1, 0, 0, 0]).value, 1.0);
        assert_eq!(d(&[0, 0, 0, 2]).value, 0.125);
        let same = d(&[0, 0, 0]);
        assert_eq!(same.value, 0.0);
        assert!(!same.resolved);
    }

    #[test]
    fn potential_examples() {
        let p = Params::new(0.8, 3.0, 1.0).unwrap();
        assert_eq!(potential(Ring::ZeroRun(1), &p).unwrap(), -0.5);
        assert_eq!(potential(Ring::OneRun(2), &p).unwrap(), -0.75);
        assert_eq!(potential(Ring::TwoHead, &p).unwrap(), -0.8);
        assert_eq!(potential(Ring::Fix0, &p).unwrap(), 0.0);
        assert!(matches!(
            potential(Ring::Tail0(5), &p),
            Err(Error::TailRing(_))
        ));
    }

    #[test]
    fn preimage_examples() {
        let p = Params::new(0.7, 3.0, 1.0).unwrap();
        let b = preimage_rings(Ring::OneRun(3), &p).unwrap();
        assert_eq!(b[0].ring, Ring::ZeroRun(1));
        assert_eq!(b[0].potential, -0.5);
        assert_eq!(b[1].ring, Ring::OneRun(4));
        assert_eq!(b[1].potential, -3.0 / 16.0);
        assert_eq!(b[2].ring, Ring::TwoHead);
        assert_eq!(b[2].potential, -0.7);

        let f0 = preimage_rings(Ring::Fix0, &p).unwrap();
        assert_eq!(f0[0].ring, Ring::Fix0);
        assert_eq!(f0[0].potential, 0.0);

        let t = preimage_rings(Ring::TwoHead, &p).unwrap();
        let rings: Vec<_> = t.iter().map(|b| b.ring).collect();
        assert_eq!(
            rings,
            vec![Ring::ZeroRun(1), Ring::OneRun(1), Ring::TwoHead]
        );
        assert!(preimage_rings(Ring::Tail1(4), &p).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(0.0, 3.0, 1.0).is_err());
        assert!(Params::new(1.0, 1.0, 1.0).is_err());
        assert!(Params::new(1.0, 3.0, -1.0).is_err());
        assert!(Params::new(1.0, 3.0, f64::NAN).is_err());
        assert!(Params::new(1.0, 1.5, 0.0).is_ok());
    }

    #[test]
    fn word_length_is_capped() {
        assert!(Word::constant(Symbol::Two, MAX_WORD_LEN).is_ok());
        assert!(Word::constant(Symbol::Two, MAX_WORD_LEN + 1).is_err());
    }

    /// Every word of length L with a symbol change lies in exactly one
    /// non-tail ring, and that ring matches a direct read of its prefix.
    #[test]
    fn partition_exhaustive_short_words() {
        for len in 1..=9u32 {
            for code in 0..3usize.pow(len) {
                let mut c = code;
                let digits: Vec<u8> = (0..len)
                    .map(|_| {
                        let d = (c % 3) as u8;
                        c /= 3;
                        d
                    })
                    .collect();
                let word = w(&digits);
                let cls = ring_of(&word).unwrap();
                let changes = digits.windows(2).any(|p| p[0] != p[1]);
                let matches: Vec<Ring> = candidate_rings(len)
                    .into_iter()
                    .filter(|r| in_ring(&digits, *r))
                    .collect();
                if changes || digits[0] == 2 {
                    assert!(!cls.unresolved || digits[0] == 2);
                    assert_eq!(matches, vec![cls.ring], "word {word}");
                }
            }
        }
    }

    fn candidate_rings(len: u32) -> Vec<Ring> {
        let mut v = vec![Ring::TwoHead];
        for n in 1..=len {
            v.push(Ring::ZeroRun(n));
            v.push(Ring::OneRun(n));
        }
        v
    }

    fn in_ring(d: &[u8], r: Ring) -> bool {
        let run_then_other = |a: u8, n: u32| {
            let n = n as usize;
            n < d.len() && d[..n].iter().all(|&x| x == a) && d[n] != a
        };
        match r {
            Ring::ZeroRun(n) => run_then_other(0, n),
            Ring::OneRun(n) => run_then_other(1, n),
            Ring::TwoHead => d[0] == 2,
            _ => false,
        }
    }

    fn arb_word(len: usize) -> impl Strategy<Value = Word> {
        proptest::collection::vec(0u8..3, len).prop_map(|d| Word::from_digits(&d).unwrap())
    }

    proptest! {
        #[test]
        fn partition_random_long_words(word in (2usize..=20).prop_flat_map(arb_word)) {
            let d: Vec<u8> = word.symbols().iter().map(|s| s.index() as u8).collect();
            let cls = ring_of(&word).unwrap();
            if d.windows(2).any(|p| p[0] != p[1]) || d[0] == 2 {
                prop_assert!(!cls.unresolved);
                let hits = candidate_rings(d.len() as u32).into_iter().filter(|r| in_ring(&d, *r)).count();
                prop_assert_eq!(hits, 1);
                prop_assert!(in_ring(&d, cls.ring));
            }
        }

        #[test]
        fn branch_potentials_are_consistent(
            alpha in 0.05f64..5.0, gamma in 1.01f64..8.0, n in 1u32..40, kind in 0usize..5
        ) {
            let p = Params::new(alpha, gamma, 1.0).unwrap();
            let r = [Ring::ZeroRun(n), Ring::OneRun(n), Ring::TwoHead, Ring::Fix0, Ring::Fix1][kind];
            for b in preimage_rings(r, &p).unwrap() {
                prop_assert_eq!(potential(b.ring, &p).unwrap(), b.potential);
            }
        }

        #[test]
        fn metric_is_symmetric_ultrametric(
            x in arb_word(12), y in arb_word(12), z in arb_word(12)
        ) {
            let dxy = dist(&x, &y).unwrap().value;
            let dyx = dist(&y, &x).unwrap().value;
            let dyz = dist(&y, &z).unwrap().value;
            let dxz = dist(&x, &z).unwrap().value;
            prop_assert_eq!(dxy, dyx);
            prop_assert!(dxz <= dxy.max(dyz));
        }

        /// Prepending a symbol and reclassifying agrees with the branch table.
        #[test]
        fn branches_match_prepending(word in (2usize..=20).prop_flat_map(arb_word)) {
            let p = Params::new(1.0, 3.0, 1.0).unwrap();
            let cls = ring_of(&word).unwrap();
            prop_assume!(!cls.unresolved);
            let branches = preimage_rings(cls.ring, &p).unwrap();
            for b in branches {
                let pre = word.prepend(b.symbol).unwrap();
                prop_assert_eq!(ring_of(&pre).unwrap().ring, b.ring);
                prop_assert_eq!(potential_of_word(&pre, &p).unwrap(), b.potential);
            }
        }
    }
}
