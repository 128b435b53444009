//! Free-group word algebra: free and cyclic reduction, primitive roots,
//! centralizers and the shortlex order used to pick coset representatives.
//!
//! Letters are indices into a symmetric generating set. With the default
//! setup for rank `k`, letter `2i` is the `i`-th generator (written `a`, `b`,
//! ...) and letter `2i + 1` is its inverse (written `A`, `B`, ...).

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub u16);

impl Letter {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A freely reduced word. Only [`GeneratorSet`] can build one, so the
/// "no adjacent inverse pair" invariant holds by construction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedWord(Vec<Letter>);

impl ReducedWord {
    pub fn identity() -> Self {
        ReducedWord(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    /// The first `k` letters; prefixes of reduced words are reduced.
    pub fn prefix(&self, k: usize) -> ReducedWord {
        ReducedWord(self.0[..k].to_vec())
    }
}

/// Symmetric generating set of a free group with its inverse pairing and the
/// total order used for shortlex comparisons.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    rank: usize,
    names: Vec<char>,
    inverse: Vec<Letter>,
    /// Position of each letter in the shortlex order.
    position: Vec<usize>,
}

impl GeneratorSet {
    /// Free group of the given rank with the order `a < A < b < B < ...`.
    pub fn free(rank: usize) -> Result<Self> {
        if rank == 0 || rank > 26 {
            return Err(Error::Usage(format!("rank must be in 1..=26, got {rank}")));
        }
        let mut names = Vec::with_capacity(2 * rank);
        let mut inverse = Vec::with_capacity(2 * rank);
        for i in 0..rank {
            let c = (b'a' + i as u8) as char;
            names.push(c);
            names.push(c.to_ascii_uppercase());
            inverse.push(Letter((2 * i + 1) as u16));
            inverse.push(Letter((2 * i) as u16));
        }
        Ok(GeneratorSet {
            rank,
            names,
            inverse,
            position: (0..2 * rank).collect(),
        })
    }

    /// Replaces the shortlex order. `order` must list every letter name once,
    /// smallest first, e.g. `"aAbB"` or `"abAB"`.
    pub fn with_order(mut self, order: &str) -> Result<Self> {
        let chars: Vec<char> = order.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.len() != self.names.len() {
            return Err(Error::Usage(format!(
                "order {order:?} must list all {} letters",
                self.names.len()
            )));
        }
        let mut position = vec![usize::MAX; self.names.len()];
        for (pos, c) in chars.iter().enumerate() {
            let l = self.letter(*c)?;
            if position[l.index()] != usize::MAX {
                return Err(Error::Usage(format!("order {order:?} repeats {c:?}")));
            }
            position[l.index()] = pos;
        }
        self.position = position;
        Ok(self)
    }

    /// Replaces the inverse pairing by explicit pairs of letter names.
    /// The result must be a fixed-point-free involution on all letters.
    pub fn with_involution(mut self, pairs: &[(char, char)]) -> Result<Self> {
        let n = self.names.len();
        let mut inverse: Vec<Option<Letter>> = vec![None; n];
        for &(x, y) in pairs {
            let (lx, ly) = (self.letter(x)?, self.letter(y)?);
            if lx == ly {
                return Err(Error::Usage(format!("involution fixes {x:?}")));
            }
            for (from, to) in [(lx, ly), (ly, lx)] {
                if inverse[from.index()].is_some_and(|t| t != to) {
                    return Err(Error::Usage(format!(
                        "involution assigns two inverses to {:?}",
                        self.names[from.index()]
                    )));
                }
                inverse[from.index()] = Some(to);
            }
        }
        let inverse = inverse
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                l.ok_or_else(|| {
                    Error::Usage(format!("involution leaves {:?} unpaired", self.names[i]))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.inverse = inverse;
        Ok(self)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_letters(&self) -> usize {
        self.names.len()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.names.len()).map(|i| Letter(i as u16))
    }

    /// Letters sorted by the shortlex order.
    pub fn letters_in_order(&self) -> Vec<Letter> {
        let mut ls: Vec<Letter> = self.letters().collect();
        ls.sort_by_key(|l| self.position[l.index()]);
        ls
    }

    pub fn inv(&self, l: Letter) -> Letter {
        self.inverse[l.index()]
    }

    pub fn name(&self, l: Letter) -> char {
        self.names[l.index()]
    }

    /// Whether the pairing agrees with the naming convention (capital = inverse).
    pub fn involution_matches_names(&self) -> bool {
        self.letters().all(|l| {
            let (c, d) = (self.name(l), self.name(self.inv(l)));
            c != d && c.eq_ignore_ascii_case(&d)
        })
    }

    pub fn letter(&self, c: char) -> Result<Letter> {
        self.names
            .iter()
            .position(|&n| n == c)
            .map(|i| Letter(i as u16))
            .ok_or_else(|| Error::Usage(format!("unknown letter {c:?}")))
    }

    /// Parses a word string and freely reduces it. `"e"` and `""` are the identity.
    pub fn parse(&self, s: &str) -> Result<ReducedWord> {
        let s = s.trim();
        if s == "e" {
            return Ok(ReducedWord::identity());
        }
        let letters = s.chars().map(|c| self.letter(c)).collect::<Result<Vec<_>>>()?;
        Ok(self.reduce(&letters))
    }

    pub fn format(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "e".to_string();
        }
        w.iter().map(|&l| self.name(l)).collect()
    }

    pub fn display<'a>(&'a self, w: &'a ReducedWord) -> impl fmt::Display + 'a {
        WordDisplay { gens: self, word: w }
    }

    /// Checks that every letter index is valid.
    pub fn check_letters(&self, letters: &[Letter]) -> Result<()> {
        match letters.iter().find(|l| l.index() >= self.names.len()) {
            Some(l) => Err(Error::Usage(format!("invalid letter index {}", l.0))),
            None => Ok(()),
        }
    }

    /// Free reduction by a single stack pass.
    pub fn reduce(&self, letters: &[Letter]) -> ReducedWord {
        let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
        for &l in letters {
            if out.last().is_some_and(|&t| t == self.inv(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        ReducedWord(out)
    }

    /// Wraps letters that are already known to be reduced.
    pub fn assume_reduced(&self, letters: Vec<Letter>) -> ReducedWord {
        debug_assert!(self.is_reduced(&letters));
        ReducedWord(letters)
    }

    pub fn is_reduced(&self, letters: &[Letter]) -> bool {
        letters.windows(2).all(|p| p[1] != self.inv(p[0]))
    }

    pub fn multiply(&self, u: &ReducedWord, v: &ReducedWord) -> ReducedWord {
        let mut out = u.0.clone();
        for &l in &v.0 {
            if out.last().is_some_and(|&t| t == self.inv(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        ReducedWord(out)
    }

    pub fn invert(&self, u: &ReducedWord) -> ReducedWord {
        ReducedWord(self.inverse_letters(&u.0))
    }

    pub fn inverse_letters(&self, u: &[Letter]) -> Vec<Letter> {
        u.iter().rev().map(|&l| self.inv(l)).collect()
    }

    /// `h⁻¹ g h`.
    pub fn conjugate(&self, h: &ReducedWord, g: &ReducedWord) -> ReducedWord {
        self.multiply(&self.multiply(&self.invert(h), g), h)
    }

    pub fn commutes(&self, h: &ReducedWord, g: &ReducedWord) -> bool {
        self.multiply(h, g) == self.multiply(g, h)
    }

    pub fn power(&self, u: &ReducedWord, k: i64) -> ReducedWord {
        let base = if k < 0 { self.invert(u) } else { u.clone() };
        let mut out = ReducedWord::identity();
        for _ in 0..k.unsigned_abs() {
            out = self.multiply(&out, &base);
        }
        out
    }

    /// Splits `g = conjugator · core · conjugator⁻¹` with `core` cyclically reduced.
    pub fn cyclic_reduce(&self, g: &ReducedWord) -> (ReducedWord, ReducedWord) {
        let w = &g.0;
        let (mut i, mut j) = (0, w.len());
        while j - i >= 2 && w[i] == self.inv(w[j - 1]) {
            i += 1;
            j -= 1;
        }
        (ReducedWord(w[i..j].to_vec()), ReducedWord(w[..i].to_vec()))
    }

    /// Writes a nonempty cyclically reduced word as `root^power` with `root`
    /// not a proper power.
    pub fn primitive_root(&self, core: &ReducedWord) -> Result<(ReducedWord, u32)> {
        let w = &core.0;
        let n = w.len();
        if n == 0 {
            return Err(Error::Usage(
                "the identity has a finite conjugacy class".to_string(),
            ));
        }
        if n >= 2 && w[0] == self.inv(w[n - 1]) {
            return Err(Error::Usage(format!(
                "{} is not cyclically reduced",
                self.format(w)
            )));
        }
        let d = (1..=n)
            .find(|&d| n.is_multiple_of(d) && (d..n).all(|i| w[i] == w[i - d]))
            .unwrap_or(n);
        Ok((ReducedWord(w[..d].to_vec()), (n / d) as u32))
    }

    pub fn conjugacy_data(&self, g: &ReducedWord) -> Result<ConjugacyData> {
        let (core, conjugator) = self.cyclic_reduce(g);
        let (root, power) = self.primitive_root(&core)?;
        Ok(ConjugacyData {
            element: g.clone(),
            core,
            conjugator,
            root,
            power,
        })
    }

    pub fn shortlex_cmp(&self, u: &[Letter], v: &[Letter]) -> Ordering {
        u.len().cmp(&v.len()).then_with(|| {
            u.iter()
                .zip(v)
                .find(|(a, b)| a != b)
                .map_or(Ordering::Equal, |(a, b)| {
                    self.position[a.index()].cmp(&self.position[b.index()])
                })
        })
    }

    pub fn shortlex_less(&self, u: &ReducedWord, v: &ReducedWord) -> bool {
        self.shortlex_cmp(&u.0, &v.0) == Ordering::Less
    }

    /// All reduced words of length at most `max_len`, in shortlex order.
    pub fn reduced_words(&self, max_len: usize) -> Vec<ReducedWord> {
        let ordered = self.letters_in_order();
        let mut out = vec![ReducedWord::identity()];
        let mut layer = vec![Vec::<Letter>::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for &l in &ordered {
                    if w.last().is_some_and(|&t| t == self.inv(l)) {
                        continue;
                    }
                    let mut x = w.clone();
                    x.push(l);
                    next.push(x);
                }
            }
            out.extend(next.iter().cloned().map(ReducedWord));
            layer = next;
        }
        out
    }
}

struct WordDisplay<'a> {
    gens: &'a GeneratorSet,
    word: &'a ReducedWord,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.gens.format(self.word.letters()))
    }
}

/// Normal form of an element for conjugacy purposes:
/// `element = conjugator · root^power · conjugator⁻¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyData {
    pub element: ReducedWord,
    pub core: ReducedWord,
    pub conjugator: ReducedWord,
    pub root: ReducedWord,
    pub power: u32,
}

impl ConjugacyData {
    /// The centralizer element `conjugator · root^j · conjugator⁻¹`.
    pub fn centralizer_element(&self, gens: &GeneratorSet, j: i64) -> ReducedWord {
        let c = &self.conjugator;
        gens.multiply(&gens.multiply(c, &gens.power(&self.root, j)), &gens.invert(c))
    }

    /// Word length of the `j`-th centralizer element. The conjugator never
    /// cancels against a cyclically reduced root, so this is exact.
    pub fn centralizer_len(&self, j: i64) -> usize {
        2 * self.conjugator.len() + j.unsigned_abs() as usize * self.root.len()
    }

    /// Whether `h` lies in the centralizer.
    pub fn centralizes(&self, gens: &GeneratorSet, h: &ReducedWord) -> bool {
        gens.commutes(h, &self.element)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f2() -> GeneratorSet {
        GeneratorSet::free(2).unwrap()
    }

    /// Repeatedly deletes the first adjacent inverse pair until none remain.
    fn scan_reduce(gens: &GeneratorSet, letters: &[Letter]) -> Vec<Letter> {
        let mut w = letters.to_vec();
        loop {
            match (0..w.len().saturating_sub(1)).find(|&i| w[i + 1] == gens.inv(w[i])) {
                Some(i) => {
                    w.drain(i..i + 2);
                }
                None => return w,
            }
        }
    }

    fn letters_strategy(max: usize) -> impl Strategy<Value = Vec<Letter>> {
        prop::collection::vec((0u16..4).prop_map(Letter), 0..max)
    }

    #[test]
    fn reduce_examples() {
        let g = f2();
        let a = g.letter('a').unwrap();
        let big_a = g.letter('A').unwrap();
        let b = g.letter('b').unwrap();
        let big_b = g.letter('B').unwrap();
        assert!(g.reduce(&[a, big_a]).is_empty());
        assert_eq!(g.reduce(&[a, b, big_b, a]).letters(), &[a, a]);
    }

    #[test]
    fn conjugate_examples() {
        let g = f2();
        let a = g.parse("a").unwrap();
        let b = g.parse("b").unwrap();
        assert_eq!(g.conjugate(&ReducedWord::identity(), &a), a);
        assert_eq!(g.format(g.conjugate(&b, &a).letters()), "Bab");
        assert!(g.multiply(&a, &g.invert(&a)).is_empty());
    }

    #[test]
    fn cyclic_reduce_examples() {
        let g = f2();
        let (core, c) = g.cyclic_reduce(&g.parse("abA").unwrap());
        assert_eq!(g.format(core.letters()), "b");
        assert_eq!(g.format(c.letters()), "a");
        let w = g.parse("abAB").unwrap();
        assert_eq!(g.cyclic_reduce(&w), (w.clone(), ReducedWord::identity()));
    }

    #[test]
    fn primitive_root_examples() {
        let g = f2();
        let (r, k) = g.primitive_root(&g.parse("aa").unwrap()).unwrap();
        assert_eq!((g.format(r.letters()), k), ("a".to_string(), 2));
        let (r, k) = g.primitive_root(&g.parse("abab").unwrap()).unwrap();
        assert_eq!((g.format(r.letters()), k), ("ab".to_string(), 2));
        assert!(g.primitive_root(&ReducedWord::identity()).is_err());
    }

    #[test]
    fn shortlex_sorts_like_pairwise_oracle() {
        let g = f2();
        let words = g.reduced_words(2);
        assert_eq!(words.len(), 1 + 4 + 12);
        // Without the identity there are 16 words; sort them and compare with
        // a count of how many words each one beats.
        let mut ws: Vec<ReducedWord> = words.into_iter().filter(|w| !w.is_empty()).collect();
        assert_eq!(ws.len(), 16);
        ws.reverse();
        ws.sort_by(|u, v| g.shortlex_cmp(u.letters(), v.letters()));
        for (rank, w) in ws.iter().enumerate() {
            let beaten = ws
                .iter()
                .filter(|v| {
                    v.len() < w.len()
                        || (v.len() == w.len() && {
                            let i = (0..v.len()).find(|&i| v.letters()[i] != w.letters()[i]);
                            i.is_some_and(|i| v.letters()[i] < w.letters()[i])
                        })
                })
                .count();
            assert_eq!(beaten, rank);
        }
        let u = g.parse("a").unwrap();
        assert!(g.shortlex_less(&u, &g.parse("AA").unwrap()));
        assert!(!g.shortlex_less(&u, &u));
    }

    #[test]
    fn custom_order_and_involution_validation() {
        let g = f2().with_order("bBaA").unwrap();
        assert!(g.shortlex_less(&g.parse("b").unwrap(), &g.parse("a").unwrap()));
        assert!(f2().with_order("aAb").is_err());
        assert!(f2().with_involution(&[('a', 'A'), ('b', 'b')]).is_err());
        assert!(f2().with_involution(&[('a', 'A')]).is_err());
        let swapped = f2().with_involution(&[('a', 'b'), ('A', 'B')]).unwrap();
        assert!(!swapped.involution_matches_names());
        assert!(f2().involution_matches_names());
    }

    #[test]
    fn centralizer_matches_commutation_exhaustively() {
        let g = f2();
        let words = g.reduced_words(6);
        for gs in ["a", "ab", "aa", "abAB", "bab", "aBaB"] {
            let data = g.conjugacy_data(&g.parse(gs).unwrap()).unwrap();
            let members: std::collections::HashSet<ReducedWord> = (-12..=12)
                .map(|j| data.centralizer_element(&g, j))
                .collect();
            for h in &words {
                assert_eq!(
                    data.centralizes(&g, h),
                    members.contains(h),
                    "g = {gs}, h = {}",
                    g.format(h.letters())
                );
            }
            for j in -4..=4 {
                assert_eq!(data.centralizer_element(&g, j).len(), data.centralizer_len(j));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn reduce_matches_scan_oracle(u in letters_strategy(12), v in letters_strategy(12)) {
            let g = f2();
            let cat: Vec<Letter> = u.iter().chain(&v).copied().collect();
            let r = g.reduce(&cat);
            let oracle = scan_reduce(&g, &cat);
            prop_assert_eq!(r.letters(), oracle.as_slice());
            prop_assert_eq!(g.reduce(r.letters()), r.clone());
            let (ru, rv) = (g.reduce(&u), g.reduce(&v));
            let m = g.multiply(&ru, &rv);
            prop_assert_eq!(&m, &r);
            prop_assert!(m.len() <= ru.len() + rv.len());
            prop_assert_eq!((ru.len() + rv.len() - m.len()) % 2, 0);
        }

        #[test]
        fn multiply_is_associative(u in letters_strategy(8), v in letters_strategy(8), w in letters_strategy(8)) {
            let g = f2();
            let (u, v, w) = (g.reduce(&u), g.reduce(&v), g.reduce(&w));
            prop_assert_eq!(
                g.multiply(&g.multiply(&u, &v), &w),
                g.multiply(&u, &g.multiply(&v, &w))
            );
        }

        #[test]
        fn cyclic_reduce_recombines(u in letters_strategy(14)) {
            let g = f2();
            let w = g.reduce(&u);
            let (core, c) = g.cyclic_reduce(&w);
            prop_assert_eq!(g.multiply(&g.multiply(&c, &core), &g.invert(&c)), w);
            if core.len() >= 2 {
                prop_assert_ne!(core.first().unwrap(), g.inv(core.last().unwrap()));
            }
        }

        #[test]
        fn primitive_root_recovers_powers(r in letters_strategy(6), k in 1u32..=5) {
            let g = f2();
            let (core, _) = g.cyclic_reduce(&g.reduce(&r));
            prop_assume!(!core.is_empty());
            let (root, p) = g.primitive_root(&core).unwrap();
            let w = g.power(&core, k as i64);
            let (root2, p2) = g.primitive_root(&w).unwrap();
            prop_assert_eq!(root2, root);
            prop_assert_eq!(p2, p * k);
        }
    }
}
