//! Symbolic resolvent coefficients B_{i,j,l}[f] from the recurrence
//!
//!   B_{i,j,l} = 4∂_ω∂_ω̄ B_{i,j,l−2} + 2∂_ω B_{i,j−1,l−1} + 2∂_ω̄ B_{i−1,j,l−1} + f·B_{i,j,l−2},
//!
//! with B_{0,0,0} = 1 and B = 0 whenever an index is negative. Polynomials are
//! integer combinations of commuting generators f_(a,b) = ∂_ω^a ∂_ω̄^b f.

use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// ∂_ω^a ∂_ω̄^b f
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DerivGenerator {
    pub omega: u32,
    pub omega_bar: u32,
}

impl DerivGenerator {
    pub const F: Self = Self::new(0, 0);

    pub const fn new(omega: u32, omega_bar: u32) -> Self {
        Self { omega, omega_bar }
    }

    /// Grading weight: derivative count plus 2 for the f itself.
    pub fn weight(self) -> u32 {
        self.omega + self.omega_bar + 2
    }
}

impl fmt::Display for DerivGenerator {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::F {
            write!(out, "f")
        } else {
            write!(out, "f({},{})", self.omega, self.omega_bar)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Omega,
    OmegaBar,
}

/// Sorted multiset of generators.
pub type Monomial = Vec<DerivGenerator>;

/// Integer polynomial in the generators; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SymbolicPolynomial {
    terms: BTreeMap<Monomial, i64>,
}

impl SymbolicPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(Vec::new(), 1)
    }

    pub fn f() -> Self {
        Self::monomial(vec![DerivGenerator::F], 1)
    }

    pub fn generator(g: DerivGenerator) -> Self {
        Self::monomial(vec![g], 1)
    }

    pub fn monomial(mut gens: Monomial, coeff: i64) -> Self {
        gens.sort();
        let mut p = Self::zero();
        p.add_term(gens, coeff);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, i64)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, gens: Monomial, coeff: i64) {
        if coeff == 0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(gens) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if *o.get() == 0 {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut m = ma.clone();
                m.extend_from_slice(mb);
                m.sort();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    /// Leibniz rule over the generators of each monomial.
    pub fn derive(&self, direction: Direction) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for k in 0..m.len() {
                let mut next = m.clone();
                match direction {
                    Direction::Omega => next[k].omega += 1,
                    Direction::OmegaBar => next[k].omega_bar += 1,
                }
                next.sort();
                out.add_term(next, *c);
            }
        }
        out
    }

    /// Swaps ω and ω̄ in every generator (f is real).
    pub fn conjugate(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut swapped: Monomial = m
                .iter()
                .map(|g| DerivGenerator::new(g.omega_bar, g.omega))
                .collect();
            swapped.sort();
            out.add_term(swapped, *c);
        }
        out
    }

    /// The set of monomial weights; a single entry means the polynomial is homogeneous.
    pub fn weights(&self) -> Vec<u32> {
        let mut w: Vec<u32> = self
            .terms
            .keys()
            .map(|m| m.iter().map(|g| g.weight()).sum())
            .collect();
        w.sort_unstable();
        w.dedup();
        w
    }

    /// Σ(#ω − #ω̄) over the generators, equal for every monomial of a B coefficient.
    pub fn balances(&self) -> Vec<i64> {
        let mut b: Vec<i64> = self
            .terms
            .keys()
            .map(|m| m.iter().map(|g| g.omega as i64 - g.omega_bar as i64).sum())
            .collect();
        b.sort_unstable();
        b.dedup();
        b
    }
}

impl fmt::Display for SymbolicPolynomial {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(out, "0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            let sign = if *c < 0 { "-" } else { "+" };
            if n == 0 {
                if *c < 0 {
                    write!(out, "-")?;
                }
            } else {
                write!(out, " {sign} ")?;
            }
            let k = c.unsigned_abs();
            let factors = render_factors(m);
            match (k, factors.is_empty()) {
                (_, true) => write!(out, "{k}")?,
                (1, false) => write!(out, "{factors}")?,
                _ => write!(out, "{k}*{factors}")?,
            }
        }
        Ok(())
    }
}

fn render_factors(m: &Monomial) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < m.len() {
        let mut j = i;
        while j < m.len() && m[j] == m[i] {
            j += 1;
        }
        let power = j - i;
        parts.push(if power == 1 {
            m[i].to_string()
        } else {
            format!("{}^{power}", m[i])
        });
        i = j;
    }
    parts.join("*")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CoeffIndex {
    pub i: i32,
    pub j: i32,
    pub l: i32,
}

impl CoeffIndex {
    pub const fn new(i: i32, j: i32, l: i32) -> Self {
        Self { i, j, l }
    }
}

impl fmt::Display for CoeffIndex {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "B[{},{},{}]", self.i, self.j, self.l)
    }
}

type Memo = Mutex<HashMap<CoeffIndex, Arc<SymbolicPolynomial>>>;

fn memo() -> &'static Memo {
    static MEMO: OnceLock<Memo> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// B_{i,j,l}, memoised across calls.
pub fn compute_b(idx: CoeffIndex) -> Arc<SymbolicPolynomial> {
    if idx.i < 0 || idx.j < 0 || idx.l < 0 {
        return Arc::new(SymbolicPolynomial::zero());
    }
    if let Some(hit) = memo().lock().unwrap_or_else(|e| e.into_inner()).get(&idx) {
        return hit.clone();
    }
    let value = Arc::new(evaluate(idx));
    memo()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .entry(idx)
        .or_insert(value)
        .clone()
}

/// One application of the recurrence, without reading the memo table for `idx` itself.
fn evaluate(idx: CoeffIndex) -> SymbolicPolynomial {
    let CoeffIndex { i, j, l } = idx;
    if (i, j, l) == (0, 0, 0) {
        return SymbolicPolynomial::one();
    }
    let two_down = compute_b(CoeffIndex::new(i, j, l - 2));
    let laplace = two_down
        .derive(Direction::OmegaBar)
        .derive(Direction::Omega)
        .scale(4);
    let from_j = compute_b(CoeffIndex::new(i, j - 1, l - 1))
        .derive(Direction::Omega)
        .scale(2);
    let from_i = compute_b(CoeffIndex::new(i - 1, j, l - 1))
        .derive(Direction::OmegaBar)
        .scale(2);
    let potential = SymbolicPolynomial::f().mul(&two_down);
    laplace.add(&from_j).add(&from_i).add(&potential)
}

/// B_{i,j,l} recomputed from scratch with a private table.
pub fn compute_b_fresh(idx: CoeffIndex) -> SymbolicPolynomial {
    fn go(idx: CoeffIndex, table: &mut HashMap<CoeffIndex, SymbolicPolynomial>) -> SymbolicPolynomial {
        let CoeffIndex { i, j, l } = idx;
        if i < 0 || j < 0 || l < 0 {
            return SymbolicPolynomial::zero();
        }
        if (i, j, l) == (0, 0, 0) {
            return SymbolicPolynomial::one();
        }
        if let Some(p) = table.get(&idx) {
            return p.clone();
        }
        let two_down = go(CoeffIndex::new(i, j, l - 2), table);
        let v = two_down
            .derive(Direction::OmegaBar)
            .derive(Direction::Omega)
            .scale(4)
            .add(&go(CoeffIndex::new(i, j - 1, l - 1), table).derive(Direction::Omega).scale(2))
            .add(&go(CoeffIndex::new(i - 1, j, l - 1), table).derive(Direction::OmegaBar).scale(2))
            .add(&SymbolicPolynomial::f().mul(&two_down));
        table.insert(idx, v.clone());
        v
    }
    go(idx, &mut HashMap::new())
}

/// Canonical text line, e.g. `B[1,0,3] = 2*f(0,1)`.
pub fn render(idx: CoeffIndex, poly: &SymbolicPolynomial) -> String {
    format!("{idx} = {poly}")
}

/// All nonzero coefficients with l ≤ l_max, ordered by (l, i, j).
pub fn nonzero_coefficients(l_max: u32) -> Vec<(CoeffIndex, Arc<SymbolicPolynomial>)> {
    let mut out = Vec::new();
    for l in 0..=l_max as i32 {
        for i in 0..=l {
            for j in 0..=l {
                let idx = CoeffIndex::new(i, j, l);
                let b = compute_b(idx);
                if !b.is_zero() {
                    out.push((idx, b));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermRecord {
    pub factors: Vec<DerivGenerator>,
    pub coefficient: i64,
}

/// JSON-friendly term list of a polynomial.
pub fn term_records(poly: &SymbolicPolynomial) -> Vec<TermRecord> {
    poly.terms()
        .map(|(m, c)| TermRecord {
            factors: m.clone(),
            coefficient: c,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(i: i32, j: i32, l: i32) -> Arc<SymbolicPolynomial> {
        compute_b(CoeffIndex::new(i, j, l))
    }

    #[test]
    fn derive_examples() {
        assert!(SymbolicPolynomial::one().derive(Direction::Omega).is_zero());
        assert_eq!(
            SymbolicPolynomial::f().derive(Direction::OmegaBar),
            SymbolicPolynomial::generator(DerivGenerator::new(0, 1))
        );
        let f2 = SymbolicPolynomial::f().mul(&SymbolicPolynomial::f());
        assert_eq!(
            f2.derive(Direction::Omega),
            SymbolicPolynomial::monomial(vec![DerivGenerator::F, DerivGenerator::new(1, 0)], 2)
        );
    }

    #[test]
    fn hand_values() {
        assert_eq!(*b(0, 0, 0), SymbolicPolynomial::one());
        assert_eq!(*b(0, 0, 2), SymbolicPolynomial::f());
        assert!(b(1, 0, 1).is_zero());
        assert_eq!(*b(1, 0, 3), SymbolicPolynomial::generator(DerivGenerator::new(0, 1)).scale(2));
        assert_eq!(*b(0, 1, 3), SymbolicPolynomial::generator(DerivGenerator::new(1, 0)).scale(2));
        assert!(b(-1, 0, 2).is_zero());
    }

    #[test]
    fn printing() {
        assert_eq!(render(CoeffIndex::new(1, 0, 3), &b(1, 0, 3)), "B[1,0,3] = 2*f(0,1)");
        assert_eq!(render(CoeffIndex::new(0, 0, 0), &b(0, 0, 0)), "B[0,0,0] = 1");
        assert_eq!(SymbolicPolynomial::zero().to_string(), "0");
        let f2 = SymbolicPolynomial::f().mul(&SymbolicPolynomial::f());
        assert_eq!(f2.to_string(), "f^2");
        let mixed = f2.scale(-3).add(&SymbolicPolynomial::one());
        assert_eq!(mixed.to_string(), "1 - 3*f^2");
    }

    #[test]
    fn conjugation() {
        assert_eq!(SymbolicPolynomial::f().conjugate(), SymbolicPolynomial::f());
        assert_eq!(b(1, 0, 3).conjugate(), *b(0, 1, 3));
        for i in 0..=3 {
            for j in 0..=3 {
                for l in 0..=6 {
                    assert_eq!(b(i, j, l).conjugate(), *b(j, i, l), "B[{i},{j},{l}]");
                }
            }
        }
    }

    #[test]
    fn parity_and_support() {
        for i in 0..=4 {
            for j in 0..=4 {
                for l in 0..=8 {
                    let p = b(i, j, l);
                    if (i + j + l) % 2 == 1 || i + j > l {
                        assert!(p.is_zero(), "B[{i},{j},{l}] = {p}");
                    }
                }
            }
        }
    }

    #[test]
    fn grading_and_balance() {
        for (idx, p) in nonzero_coefficients(8) {
            assert_eq!(p.weights(), vec![idx.l as u32], "{idx}");
            assert_eq!(p.balances(), vec![(idx.j - idx.i) as i64], "{idx}");
        }
    }

    #[test]
    fn memo_is_deterministic() {
        for idx in [CoeffIndex::new(2, 1, 7), CoeffIndex::new(0, 0, 8), CoeffIndex::new(3, 3, 8)] {
            assert_eq!(*compute_b(idx), compute_b_fresh(idx));
            assert_eq!(*compute_b(idx), *compute_b(idx));
        }
    }
}
