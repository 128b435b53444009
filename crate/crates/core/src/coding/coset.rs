//! Acceptor for shortlex-minimal representatives of the right cosets
//! `Z(g)h` of a centralizer in a free group.
//!
//! A word `u` is a minimal representative iff no `z ∈ Z(g) \ {e}` has
//! `z·u ≺ u`. For a competitor `z` whose reduction against `u` stops short of
//! cancelling all of `u`, the words `z·u·w` and `u·w` share the suffix of `u`
//! for every continuation `w`, so the comparison is already decided. Only the
//! competitors that swallow `u` entirely stay open, and each is described by
//! the word `v = z·u`, its length excess `|v| - |u|` and the verdict of the
//! tie-break it will face once the excess reaches zero. A state is the last
//! letter of `u` together with that finite set of open competitors.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};

use super::automaton::{Edge, LabeledAutomaton, SubgroupTag, START};
use crate::error::{Error, Result};
use crate::group::{ConjugacyData, GeneratorSet, Letter, ReducedWord};

#[derive(Clone, Debug, PartialEq)]
pub struct CosetOptions {
    /// Competitors `z` with `|z|` above this radius are not tracked.
    /// Defaults to `2·(|root| + 4) + 2·|conjugator|`.
    pub signature_radius: Option<usize>,
    pub verify_len: usize,
    pub state_budget: usize,
}

impl Default for CosetOptions {
    fn default() -> Self {
        CosetOptions {
            signature_radius: None,
            verify_len: 8,
            state_budget: 100_000,
        }
    }
}

pub fn default_signature_radius(data: &ConjugacyData) -> usize {
    2 * (data.root.len() + 4) + 2 * data.conjugator.len()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Competitor {
    /// The reduced word `z·u`.
    word: Vec<Letter>,
    /// `|z·u| - |u|`.
    excess: i64,
    /// Whether `z·u·w ≺ u·w` at the moment both have equal length.
    wins_tie: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Signature {
    last: Option<Letter>,
    open: Vec<Competitor>,
}

fn transition(gens: &GeneratorSet, sig: &Signature, s: Letter) -> Option<Signature> {
    if sig.last.is_some_and(|l| s == gens.inv(l)) {
        return None;
    }
    let mut open = Vec::new();
    for c in &sig.open {
        if c.word.last() != Some(&gens.inv(s)) {
            // z·u·s and u·s now share the suffix s: decided in favour of u.
            continue;
        }
        let excess = c.excess - 2;
        if excess < 0 || (excess == 0 && c.wins_tie) {
            return None;
        }
        open.push(Competitor {
            word: c.word[..c.word.len() - 1].to_vec(),
            excess,
            wins_tie: c.wins_tie,
        });
    }
    open.sort();
    open.dedup();
    Some(Signature { last: Some(s), open })
}

fn start_signature(gens: &GeneratorSet, data: &ConjugacyData, radius: usize) -> Signature {
    let mut open = Vec::new();
    for j in 1..=(radius / data.root.len().max(1)) as i64 {
        for j in [j, -j] {
            if data.centralizer_len(j) > radius {
                continue;
            }
            let z = data.centralizer_element(gens, j).into_letters();
            let half = z.len() / 2;
            let wins_tie = z.len().is_multiple_of(2)
                && gens.shortlex_cmp(&z[..half], &gens.inverse_letters(&z[half..])) == Ordering::Less;
            open.push(Competitor {
                excess: z.len() as i64,
                word: z,
                wins_tie,
            });
        }
    }
    open.sort();
    Signature { last: None, open }
}

/// Builds the coset acceptor for `Z(g)` and checks it against the
/// brute-force oracle on all words up to `options.verify_len`.
pub fn build_coset_acceptor(
    gens: &GeneratorSet,
    g: &ReducedWord,
    options: &CosetOptions,
) -> Result<LabeledAutomaton> {
    let data = gens.conjugacy_data(g)?;
    let radius = options
        .signature_radius
        .unwrap_or_else(|| default_signature_radius(&data));
    let letters = gens.letters_in_order();

    let start = start_signature(gens, &data, radius);
    let mut ids: HashMap<Signature, usize> = HashMap::new();
    let mut states = vec![start.clone()];
    ids.insert(start, START);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([START]);
    while let Some(v) = queue.pop_front() {
        for &s in &letters {
            let Some(next) = transition(gens, &states[v], s) else {
                continue;
            };
            let to = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    if states.len() >= options.state_budget {
                        return Err(Error::UnstableCoding {
                            reason: format!(
                                "more than {} signatures at radius {radius}",
                                options.state_budget
                            ),
                            verified_len: 0,
                        });
                    }
                    let id = states.len();
                    states.push(next.clone());
                    ids.insert(next, id);
                    queue.push_back(id);
                    id
                }
            };
            edges.push(Edge { from: v, to, label: s });
        }
    }

    let tag = SubgroupTag::Centralizer {
        element: gens.format(g.letters()),
        conjugator: gens.format(data.conjugator.letters()),
        root: gens.format(data.root.letters()),
    };
    let mut automaton = LabeledAutomaton::new(states.len(), edges, tag)?;
    let oracle = CosetOracle::new(gens, &data, options.verify_len);
    verify_against_oracle(gens, &automaton, &oracle, options.verify_len)?;
    automaton.set_verified_len(options.verify_len);
    Ok(automaton)
}

/// Extends the verified range of a coset acceptor to `len`.
pub fn extend_verification(
    gens: &GeneratorSet,
    g: &ReducedWord,
    automaton: &mut LabeledAutomaton,
    len: usize,
) -> Result<()> {
    if automaton.verified_len().is_some_and(|v| v >= len) {
        return Ok(());
    }
    let data = gens.conjugacy_data(g)?;
    let oracle = CosetOracle::new(gens, &data, len);
    verify_against_oracle(gens, automaton, &oracle, len)?;
    automaton.set_verified_len(len);
    Ok(())
}

/// Compares the accepted language with the oracle length by length. Minimal
/// representatives are prefix-closed, so words rejected by both sides need
/// no extensions.
fn verify_against_oracle(
    gens: &GeneratorSet,
    automaton: &LabeledAutomaton,
    oracle: &CosetOracle,
    len: usize,
) -> Result<()> {
    let mut layer: Vec<(Vec<Letter>, usize)> = vec![(Vec::new(), START)];
    if !oracle.is_minimal(&[]) {
        return Err(Error::UnstableCoding {
            reason: "oracle rejects the identity".to_string(),
            verified_len: 0,
        });
    }
    for n in 1..=len {
        let mut next = Vec::new();
        for (w, v) in &layer {
            for s in gens.letters() {
                if w.last().is_some_and(|&l| l == gens.inv(s)) {
                    if automaton.step(*v, s).is_some() {
                        return Err(mismatch(gens, w, s, "accepts a non-reduced word", n));
                    }
                    continue;
                }
                let mut x = w.clone();
                x.push(s);
                let accepted = automaton.step(*v, s);
                match (accepted, oracle.is_minimal(&x)) {
                    (Some(t), true) => next.push((x, t)),
                    (None, false) => {}
                    (Some(_), false) => {
                        return Err(mismatch(gens, w, s, "accepts a non-minimal word", n));
                    }
                    (None, true) => {
                        return Err(mismatch(gens, w, s, "rejects a minimal word", n));
                    }
                }
            }
        }
        layer = next;
    }
    Ok(())
}

fn mismatch(gens: &GeneratorSet, w: &[Letter], s: Letter, what: &str, n: usize) -> Error {
    let mut x = w.to_vec();
    x.push(s);
    Error::UnstableCoding {
        reason: format!("acceptor {what}: {}", gens.format(&x)),
        verified_len: n - 1,
    }
}

/// Brute-force membership test for shortlex-minimal coset representatives.
pub struct CosetOracle<'a> {
    gens: &'a GeneratorSet,
    /// Nontrivial centralizer elements, shortest first.
    elements: Vec<ReducedWord>,
}

impl<'a> CosetOracle<'a> {
    /// Prepares every centralizer element that can shorten a word of length
    /// at most `max_len` (those with `|z| ≤ 2·max_len`).
    pub fn new(gens: &'a GeneratorSet, data: &ConjugacyData, max_len: usize) -> Self {
        let j_max = (2 * max_len / data.root.len().max(1)) as i64 + 1;
        let mut elements: Vec<ReducedWord> = (1..=j_max)
            .flat_map(|j| [j, -j])
            .map(|j| data.centralizer_element(gens, j))
            .collect();
        elements.sort_by_key(|z| z.len());
        CosetOracle { gens, elements }
    }

    pub fn is_minimal(&self, u: &[Letter]) -> bool {
        let u = self.gens.reduce(u);
        let Some(&first) = u.letters().first() else {
            return true;
        };
        // Without cancellation `zu` is longer than `u`.
        let cancels = self.gens.inv(first);
        self.elements
            .iter()
            .take_while(|z| z.len() <= 2 * u.len())
            .filter(|z| z.letters().last() == Some(&cancels))
            .all(|z| !self.gens.shortlex_less(&self.gens.multiply(z, &u), &u))
    }
}

/// All shortlex-minimal representatives of cosets `Z(g)h` of length at most
/// `max_len`, by exhaustive minimization.
pub fn minimal_coset_representatives(
    gens: &GeneratorSet,
    g: &ReducedWord,
    max_len: usize,
) -> Result<Vec<ReducedWord>> {
    let data = gens.conjugacy_data(g)?;
    let oracle = CosetOracle::new(gens, &data, max_len);
    Ok(gens
        .reduced_words(max_len)
        .into_iter()
        .filter(|u| oracle.is_minimal(u.letters()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn f2() -> GeneratorSet {
        GeneratorSet::free(2).unwrap()
    }

    fn sorted_words(ws: impl IntoIterator<Item = Vec<Letter>>) -> Vec<Vec<Letter>> {
        let mut v: Vec<_> = ws.into_iter().collect();
        v.sort();
        v
    }

    #[test]
    fn oracle_for_g_a_is_words_starting_with_b() {
        let g = f2();
        let reps = minimal_coset_representatives(&g, &g.parse("a").unwrap(), 8).unwrap();
        let expected: Vec<ReducedWord> = g
            .reduced_words(8)
            .into_iter()
            .filter(|w| w.first().is_none_or(|l| matches!(g.name(l), 'b' | 'B')))
            .collect();
        assert_eq!(reps, expected);
    }

    #[test]
    fn oracle_picks_one_representative_per_coset() {
        // Each coset Z(g)h with a representative of length ≤ 4 is hit exactly
        // once: canonicalize h by minimizing over a wide window of translates.
        let g = f2();
        for gs in ["ab", "abAB", "aab"] {
            let elem = g.parse(gs).unwrap();
            let data = g.conjugacy_data(&elem).unwrap();
            let reps: HashSet<ReducedWord> =
                minimal_coset_representatives(&g, &elem, 4).unwrap().into_iter().collect();
            let canon = |h: &ReducedWord| {
                (-12..=12)
                    .map(|j| g.multiply(&data.centralizer_element(&g, j), h))
                    .min_by(|x, y| g.shortlex_cmp(x.letters(), y.letters()))
                    .unwrap()
            };
            let cosets: HashSet<ReducedWord> = g
                .reduced_words(4)
                .iter()
                .map(canon)
                .filter(|c| c.len() <= 4)
                .collect();
            assert_eq!(cosets, reps, "g = {gs}");
        }
    }

    #[test]
    fn acceptor_for_g_a_restricts_first_letter() {
        let g = f2();
        let a = build_coset_acceptor(&g, &g.parse("a").unwrap(), &CosetOptions::default()).unwrap();
        assert_eq!(a.num_vertices(), 5);
        let first: Vec<char> = a.successors(START).iter().map(|&(l, _)| g.name(l)).collect();
        assert_eq!(first, ['b', 'B']);
        let counts = a.count_by_length(6);
        assert_eq!(counts, [1, 2, 6, 18, 54, 162, 486]);
    }

    #[test]
    fn acceptors_match_oracle_to_length_eight() {
        let g = f2();
        for gs in ["a", "ab", "abAB", "aa", "bab", "aBAbb", "abab"] {
            let elem = g.parse(gs).unwrap();
            let a = build_coset_acceptor(&g, &elem, &CosetOptions::default()).unwrap();
            let accepted = sorted_words(a.words_up_to(8));
            let oracle = sorted_words(
                minimal_coset_representatives(&g, &elem, 8)
                    .unwrap()
                    .into_iter()
                    .map(|w| w.into_letters()),
            );
            assert_eq!(accepted, oracle, "g = {gs}");
            for w in &accepted {
                assert!(g.is_reduced(w));
                assert!(a.accepts(&w[..w.len().saturating_sub(1)]));
            }
        }
    }

    #[test]
    fn acceptor_respects_custom_order() {
        let g = f2().with_order("bBaA").unwrap();
        let elem = g.parse("ab").unwrap();
        let a = build_coset_acceptor(&g, &elem, &CosetOptions::default()).unwrap();
        let accepted = sorted_words(a.words_up_to(7));
        let oracle = sorted_words(
            minimal_coset_representatives(&g, &elem, 7).unwrap().into_iter().map(|w| w.into_letters()),
        );
        assert_eq!(accepted, oracle);
    }

    #[test]
    fn rank_one_has_a_single_coset() {
        let g = GeneratorSet::free(1).unwrap();
        let a = build_coset_acceptor(&g, &g.parse("a").unwrap(), &CosetOptions::default()).unwrap();
        assert_eq!(a.num_vertices(), 1);
        assert!(a.edges().is_empty());
        assert_eq!(
            minimal_coset_representatives(&g, &g.parse("a").unwrap(), 5).unwrap(),
            vec![ReducedWord::identity()]
        );
    }

    #[test]
    fn too_small_radius_is_reported() {
        let g = f2();
        let options = CosetOptions {
            signature_radius: Some(0),
            ..CosetOptions::default()
        };
        let err = build_coset_acceptor(&g, &g.parse("a").unwrap(), &options).unwrap_err();
        assert!(matches!(err, Error::UnstableCoding { verified_len: 0, .. }), "{err}");
        let options = CosetOptions {
            state_budget: 3,
            ..CosetOptions::default()
        };
        assert!(build_coset_acceptor(&g, &g.parse("ab").unwrap(), &options).is_err());
        assert!(build_coset_acceptor(&g, &ReducedWord::identity(), &CosetOptions::default()).is_err());
    }

    #[test]
    fn verification_extends() {
        let g = f2();
        let elem = g.parse("abAB").unwrap();
        let mut a = build_coset_acceptor(&g, &elem, &CosetOptions::default()).unwrap();
        extend_verification(&g, &elem, &mut a, 10).unwrap();
        assert_eq!(a.verified_len(), Some(10));
    }
}
