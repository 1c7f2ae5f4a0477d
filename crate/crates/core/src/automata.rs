//! Dropout-constraint automata and the signals they generate.
//!
//! An [`Automaton`] is a directed graph whose edges carry nonempty bit-string
//! labels. A [`Signal`] is admissible when some walk from a start node spells
//! it out exactly. Single-bit labels give the usual constraint automata; the
//! multi-bit labels exist for the minimal automaton of the "at most `k`
//! consecutive dropouts" family, whose edges emit a `1` followed by a run of
//! zeros.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A fixed-length binary dropout sequence. Bit `t` is `1` when the packet at
/// step `t` went through and `0` when it was dropped.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signal {
    bits: Vec<u8>,
}

impl Signal {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidSignal("signal must have length >= 1".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidSignal(format!("bit value {b} is not 0 or 1")));
        }
        Ok(Self { bits })
    }

    pub fn ones(len: usize) -> Self {
        assert!(len >= 1, "signal length must be >= 1");
        Self { bits: vec![1; len] }
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len >= 1, "signal length must be >= 1");
        Self { bits: vec![0; len] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, t: usize) -> bool {
        self.bits[t] == 1
    }

    /// The first `len` bits as a new signal.
    pub fn prefix(&self, len: usize) -> Signal {
        assert!(len >= 1 && len <= self.len());
        Signal {
            bits: self.bits[..len].to_vec(),
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Positions of the successful transmissions.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b == 1).then_some(i))
    }

    fn packed(&self) -> Vec<u64> {
        let mut words = vec![0u64; self.len().div_ceil(64)];
        for i in self.support() {
            words[i / 64] |= 1 << (i % 64);
        }
        words
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signal({self})")
    }
}

impl FromStr for Signal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = parse_bits(s).map_err(Error::InvalidSignal)?;
        Signal::new(bits)
    }
}

impl Serialize for Signal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Signal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn parse_bits(s: &str) -> std::result::Result<Vec<u8>, String> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(format!("unexpected character {other:?} in bit string {s:?}")),
        })
        .collect()
}

/// A set of equal-length signals, iterated in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignalSet {
    length: usize,
    signals: BTreeSet<Signal>,
}

impl SignalSet {
    pub fn new(length: usize) -> Self {
        Self {
            length,
            signals: BTreeSet::new(),
        }
    }

    pub fn from_signals(length: usize, signals: impl IntoIterator<Item = Signal>) -> Result<Self> {
        let mut set = Self::new(length);
        for s in signals {
            set.insert(s)?;
        }
        Ok(set)
    }

    /// Returns `true` if the signal was not already present.
    pub fn insert(&mut self, s: Signal) -> Result<bool> {
        if s.len() != self.length {
            return Err(Error::InvalidSignal(format!(
                "signal {s} has length {} but the set holds length {}",
                s.len(),
                self.length
            )));
        }
        Ok(self.signals.insert(s))
    }

    pub fn signal_length(&self) -> usize {
        self.length
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn contains(&self, s: &Signal) -> bool {
        self.signals.contains(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Signal> + '_ {
        self.signals.iter()
    }

    pub fn to_vec(&self) -> Vec<Signal> {
        self.signals.iter().cloned().collect()
    }
}

impl<'a> IntoIterator for &'a SignalSet {
    type Item = &'a Signal;
    type IntoIter = std::collections::btree_set::Iter<'a, Signal>;

    fn into_iter(self) -> Self::IntoIter {
        self.signals.iter()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: u32,
    pub to: u32,
    pub label: Vec<u8>,
}

/// A directed graph with bit-string edge labels and a set of start nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    nodes: Vec<u32>,
    start: Vec<u32>,
    edges: Vec<Edge>,
    // adjacency by node index: indices into `edges`
    out: Vec<Vec<usize>>,
    index: BTreeMap<u32, usize>,
}

/// One in-flight position of a walk: sitting on a node, or partway through
/// an edge label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Cursor {
    At(usize),
    Along { edge: usize, offset: usize },
}

impl Automaton {
    pub fn new(nodes: Vec<u32>, start: Vec<u32>, edges: Vec<Edge>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, &n) in nodes.iter().enumerate() {
            if index.insert(n, i).is_some() {
                return Err(Error::InvalidAutomaton(format!("duplicate node id {n}")));
            }
        }
        if start.is_empty() {
            return Err(Error::InvalidAutomaton("start node set is empty".into()));
        }
        for s in &start {
            if !index.contains_key(s) {
                return Err(Error::InvalidAutomaton(format!("start node {s} is not declared")));
            }
        }
        let mut out = vec![Vec::new(); nodes.len()];
        for (ei, e) in edges.iter().enumerate() {
            let Some(&from) = index.get(&e.from) else {
                return Err(Error::InvalidAutomaton(format!(
                    "edge {ei} leaves undeclared node {}",
                    e.from
                )));
            };
            if !index.contains_key(&e.to) {
                return Err(Error::InvalidAutomaton(format!(
                    "edge {ei} enters undeclared node {}",
                    e.to
                )));
            }
            if e.label.is_empty() {
                return Err(Error::InvalidAutomaton(format!("edge {ei} has an empty label")));
            }
            if e.label.iter().any(|&b| b > 1) {
                return Err(Error::InvalidAutomaton(format!("edge {ei} label is not binary")));
            }
            out[from].push(ei);
        }
        let mut start = start;
        start.sort_unstable();
        start.dedup();
        Ok(Self {
            nodes,
            start,
            edges,
            out,
            index,
        })
    }

    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    pub fn start_nodes(&self) -> &[u32] {
        &self.start
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Parses the JSON automaton format:
    /// `{"nodes":[..], "start":[..], "edges":[{"from":1,"to":2,"label":"10"}, ..]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: AutomatonFile = serde_json::from_str(text)?;
        raw.try_into()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&AutomatonFile::from(self))?)
    }

    fn initial_cursors(&self) -> BTreeSet<Cursor> {
        self.start.iter().map(|s| Cursor::At(self.index[s])).collect()
    }

    fn step(&self, cursors: &BTreeSet<Cursor>, bit: u8) -> BTreeSet<Cursor> {
        let mut next = BTreeSet::new();
        let advance = |edge: usize, offset: usize, next: &mut BTreeSet<Cursor>| {
            let e = &self.edges[edge];
            if e.label[offset] != bit {
                return;
            }
            if offset + 1 == e.label.len() {
                next.insert(Cursor::At(self.index[&e.to]));
            } else {
                next.insert(Cursor::Along {
                    edge,
                    offset: offset + 1,
                });
            }
        };
        for &c in cursors {
            match c {
                Cursor::At(node) => {
                    for &edge in &self.out[node] {
                        advance(edge, 0, &mut next);
                    }
                }
                Cursor::Along { edge, offset } => advance(edge, offset, &mut next),
            }
        }
        next
    }

    fn accepts(cursors: &BTreeSet<Cursor>) -> bool {
        cursors.iter().any(|c| matches!(c, Cursor::At(_)))
    }

    /// True iff a walk from some start node spells out `s` exactly.
    pub fn is_admissible(&self, s: &Signal) -> bool {
        let mut cursors = self.initial_cursors();
        for &bit in s.bits() {
            cursors = self.step(&cursors, bit);
            if cursors.is_empty() {
                return false;
            }
        }
        Self::accepts(&cursors)
    }

    /// All admissible signals of length `len`.
    pub fn enumerate_admissible(&self, len: usize) -> SignalSet {
        self.enumerate_admissible_capped(len, usize::MAX)
            .expect("uncapped enumeration cannot exceed its cap")
    }

    /// Like [`Automaton::enumerate_admissible`], but fails as soon as more
    /// than `cap` signals have been found.
    pub fn enumerate_admissible_capped(&self, len: usize, cap: usize) -> Result<SignalSet> {
        assert!(len >= 1, "signal length must be >= 1");
        let mut found = Vec::new();
        let mut prefix = Vec::with_capacity(len);
        self.extend(&self.initial_cursors(), &mut prefix, len, cap, &mut found)?;
        // depth-first with 0 before 1 yields lexicographic order already
        SignalSet::from_signals(len, found)
    }

    fn extend(
        &self,
        cursors: &BTreeSet<Cursor>,
        prefix: &mut Vec<u8>,
        len: usize,
        cap: usize,
        found: &mut Vec<Signal>,
    ) -> Result<()> {
        if prefix.len() == len {
            if Self::accepts(cursors) {
                if found.len() == cap {
                    return Err(Error::ExhaustiveCapExceeded { cap });
                }
                found.push(Signal {
                    bits: prefix.clone(),
                });
            }
            return Ok(());
        }
        for bit in [0u8, 1] {
            let next = self.step(cursors, bit);
            if next.is_empty() {
                continue;
            }
            prefix.push(bit);
            self.extend(&next, prefix, len, cap, found)?;
            prefix.pop();
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutomatonFile {
    nodes: Vec<u32>,
    start: Vec<u32>,
    edges: Vec<EdgeFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    from: u32,
    to: u32,
    label: String,
}

impl TryFrom<AutomatonFile> for Automaton {
    type Error = Error;

    fn try_from(raw: AutomatonFile) -> Result<Self> {
        let edges = raw
            .edges
            .into_iter()
            .enumerate()
            .map(|(i, e)| {
                let label = parse_bits(&e.label)
                    .map_err(|msg| Error::InvalidAutomaton(format!("edges[{i}].label: {msg}")))?;
                Ok(Edge {
                    from: e.from,
                    to: e.to,
                    label,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Automaton::new(raw.nodes, raw.start, edges)
    }
}

impl From<&Automaton> for AutomatonFile {
    fn from(a: &Automaton) -> Self {
        AutomatonFile {
            nodes: a.nodes.clone(),
            start: a.start.clone(),
            edges: a
                .edges
                .iter()
                .map(|e| EdgeFile {
                    from: e.from,
                    to: e.to,
                    label: e.label.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect(),
                })
                .collect(),
        }
    }
}

/// `s1 ⪯ s2`: every successful step of `s1` is also successful in `s2`.
///
/// Panics if the lengths differ.
pub fn dominates(s1: &Signal, s2: &Signal) -> bool {
    assert_eq!(s1.len(), s2.len(), "dominance compares equal-length signals");
    s1.bits.iter().zip(&s2.bits).all(|(&a, &b)| a <= b)
}

/// Keeps the signals of `set` that have no other member below them in the
/// dominance order. Quadratic in the set size.
pub fn minimal_filter(set: &SignalSet) -> SignalSet {
    let signals = set.to_vec();
    let packed: Vec<Vec<u64>> = signals.iter().map(Signal::packed).collect();
    let subset = |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(x, y)| x & !y == 0);
    let keep = (0..signals.len()).filter(|&i| {
        !(0..signals.len()).any(|j| j != i && subset(&packed[j], &packed[i]))
    });
    SignalSet {
        length: set.length,
        signals: keep.map(|i| signals[i].clone()).collect(),
    }
}

/// Counter automaton for "at most `k` consecutive dropouts". Node `c + 1`
/// records `c` trailing zeros; every node is a start node.
pub fn k_constraint_automaton(k: usize) -> Automaton {
    assert!(k >= 1, "k must be >= 1");
    let id = |c: usize| (c + 1) as u32;
    let nodes: Vec<u32> = (0..=k).map(id).collect();
    let mut edges = Vec::with_capacity(2 * k + 1);
    for c in 0..=k {
        if c < k {
            edges.push(Edge {
                from: id(c),
                to: id(c + 1),
                label: vec![0],
            });
        }
        edges.push(Edge {
            from: id(c),
            to: id(0),
            label: vec![1],
        });
    }
    Automaton::new(nodes.clone(), nodes, edges).expect("k-constraint automaton is well formed")
}

/// The `k + 1`-node automaton whose walks from node 1 spell exactly the
/// minimal signals for "at most `k` consecutive dropouts".
///
/// Node `i <= k` goes to `i + 1` on `0`, and to `k + 2 - i` on a `1` padded by
/// `k + 1 - i` zeros. Node `k + 1` only has a `1` edge back to node 1.
pub fn k_minimal_automaton(k: usize) -> Automaton {
    assert!(k >= 1, "k must be >= 1");
    let last = k as u32 + 1;
    let nodes: Vec<u32> = (1..=last).collect();
    let mut edges = Vec::with_capacity(2 * k + 1);
    for i in 1..=k as u32 {
        edges.push(Edge {
            from: i,
            to: i + 1,
            label: vec![0],
        });
        let mut label = vec![1];
        label.resize(1 + (last - i) as usize, 0);
        edges.push(Edge {
            from: i,
            to: k as u32 + 2 - i,
            label,
        });
    }
    edges.push(Edge {
        from: last,
        to: 1,
        label: vec![1],
    });
    Automaton::new(nodes, vec![1], edges).expect("k-minimal automaton is well formed")
}

/// Breadth-first expansion of the minimal automaton from node 1, keeping
/// the label strings of length exactly `len`.
pub fn minimal_signals_bfs(k: usize, len: usize) -> SignalSet {
    assert!(len >= 1, "signal length must be >= 1");
    let automaton = k_minimal_automaton(k);
    let mut result = SignalSet::new(len);
    let mut seen: HashSet<(u32, Vec<u8>)> = HashSet::new();
    let mut queue: VecDeque<(u32, Vec<u8>)> = VecDeque::new();
    queue.push_back((1, Vec::new()));
    while let Some((node, bits)) = queue.pop_front() {
        if bits.len() == len {
            result.signals.insert(Signal { bits });
            continue;
        }
        let node_idx = automaton.index[&node];
        for &ei in &automaton.out[node_idx] {
            let e = &automaton.edges[ei];
            if bits.len() + e.label.len() > len {
                continue;
            }
            let mut next = bits.clone();
            next.extend_from_slice(&e.label);
            if seen.insert((e.to, next.clone())) {
                queue.push_back((e.to, next));
            }
        }
    }
    result
}

/// Closed-form minimality test for "at most `k` consecutive dropouts": no
/// run of `k + 1` zeros, and every `1` sits between zero runs whose lengths
/// add up to at least `k`. Zeros past either end of the horizon do not count.
pub fn is_minimal_k(s: &Signal, k: usize) -> bool {
    let bits = s.bits();
    let n = bits.len();
    // zeros ending just before i, and zeros starting just after i
    let mut before = vec![0usize; n];
    let mut after = vec![0usize; n];
    let mut run = 0;
    for i in 0..n {
        before[i] = run;
        run = if bits[i] == 0 { run + 1 } else { 0 };
        if run > k {
            return false;
        }
    }
    run = 0;
    for i in (0..n).rev() {
        after[i] = run;
        run = if bits[i] == 0 { run + 1 } else { 0 };
    }
    (0..n).filter(|&i| bits[i] == 1).all(|i| before[i] + after[i] >= k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(s: &str) -> Signal {
        s.parse().unwrap()
    }

    fn set(strs: &[&str]) -> BTreeSet<String> {
        strs.iter().map(|s| s.to_string()).collect()
    }

    fn strings(ss: &SignalSet) -> BTreeSet<String> {
        ss.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn example_admissibility() {
        let a = k_constraint_automaton(1);
        assert!(a.is_admissible(&sig("0110")));
        assert!(!a.is_admissible(&sig("1001")));
    }

    #[test]
    fn self_loop_accepts_all_ones() {
        let a = Automaton::new(
            vec![7],
            vec![7],
            vec![Edge {
                from: 7,
                to: 7,
                label: vec![1],
            }],
        )
        .unwrap();
        assert!(a.is_admissible(&Signal::ones(9)));
        assert_eq!(strings(&a.enumerate_admissible(3)), set(&["111"]));
    }

    #[test]
    fn example_enumeration() {
        let a = k_constraint_automaton(1);
        let got = strings(&a.enumerate_admissible(4));
        // the listed example set plus 1101 and 1110, which also avoid "00"
        let listed = set(&["1111", "1010", "0101", "0110", "0111", "1011"]);
        assert!(listed.is_subset(&got));
        let expected: BTreeSet<String> = (0..16u32)
            .map(|v| format!("{v:04b}"))
            .filter(|s| !s.contains("00"))
            .collect();
        assert_eq!(got, expected);
        assert_eq!(got.len(), 8);
    }

    #[test]
    fn k2_length3_excludes_only_triple_zero() {
        let got = k_constraint_automaton(2).enumerate_admissible(3);
        let expected: BTreeSet<String> = (0..8u32)
            .map(|v| format!("{v:03b}"))
            .filter(|s| !s.contains("000"))
            .collect();
        assert_eq!(got.len(), 7);
        assert_eq!(strings(&got), expected);
    }

    #[test]
    fn k3_length4_has_fifteen_signals() {
        let got = k_constraint_automaton(3).enumerate_admissible(4);
        assert_eq!(got.len(), 15);
        assert!(!got.contains(&sig("0000")));
    }

    #[test]
    fn dead_automaton_yields_empty_set() {
        let a = Automaton::new(
            vec![1, 2],
            vec![1],
            vec![Edge {
                from: 1,
                to: 2,
                label: vec![1],
            }],
        )
        .unwrap();
        assert!(a.enumerate_admissible(3).is_empty());
    }

    #[test]
    fn multi_bit_labels_are_spelled_out() {
        let a = k_minimal_automaton(1);
        assert!(a.is_admissible(&sig("0110")));
        // ends in the middle of the "10" edge
        assert!(!a.is_admissible(&sig("011")));
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&sig("0101"), &sig("0111")));
        assert!(dominates(&sig("0110"), &sig("0110")));
        assert!(!dominates(&sig("0110"), &sig("0101")));
    }

    #[test]
    #[should_panic]
    fn dominance_rejects_length_mismatch() {
        dominates(&sig("01"), &sig("011"));
    }

    #[test]
    fn filter_examples() {
        let a = k_constraint_automaton(1);
        assert_eq!(
            strings(&minimal_filter(&a.enumerate_admissible(4))),
            set(&["1010", "0101", "0110"])
        );
        let single = SignalSet::from_signals(3, [sig("111")]).unwrap();
        assert_eq!(strings(&minimal_filter(&single)), set(&["111"]));
    }

    #[test]
    fn filter_k1_length5() {
        // oracle: brute-force over all 32 strings, no "00", pairwise dominance
        let admissible: Vec<String> = (0..32u32)
            .map(|v| format!("{v:05b}"))
            .filter(|s| !s.contains("00"))
            .collect();
        assert_eq!(admissible.len(), 13);
        let below = |a: &str, b: &str| a.chars().zip(b.chars()).all(|(x, y)| x <= y);
        let oracle: BTreeSet<String> = admissible
            .iter()
            .filter(|s| !admissible.iter().any(|o| o != *s && below(o, s)))
            .cloned()
            .collect();
        assert_eq!(oracle, set(&["01010", "10101", "01101", "10110"]));
        let a = k_constraint_automaton(1);
        assert_eq!(strings(&minimal_filter(&a.enumerate_admissible(5))), oracle);
    }

    #[test]
    fn minimal_automaton_shape() {
        let a = k_minimal_automaton(1);
        assert_eq!(a.nodes(), &[1, 2]);
        assert_eq!(a.start_nodes(), &[1]);
        let mut edges: Vec<(u32, u32, String)> = a
            .edges()
            .iter()
            .map(|e| (e.from, e.to, Signal::new(e.label.clone()).unwrap().to_string()))
            .collect();
        edges.sort();
        assert_eq!(
            edges,
            vec![
                (1, 2, "0".into()),
                (1, 2, "10".into()),
                (2, 1, "1".into())
            ]
        );

        let a = k_minimal_automaton(2);
        let from3: Vec<_> = a.edges().iter().filter(|e| e.from == 3).collect();
        assert_eq!(from3.len(), 1);
        assert_eq!(from3[0].label, vec![1]);
        assert_eq!(from3[0].to, 1);
        for k in 1..=4 {
            let a = k_minimal_automaton(k);
            assert_eq!(a.nodes().len(), k + 1);
            for e in a.edges() {
                assert!(e.label.contains(&1) || e.to > e.from);
            }
        }
    }

    #[test]
    fn bfs_examples() {
        assert_eq!(
            strings(&minimal_signals_bfs(1, 4)),
            set(&["0110", "1010", "0101"])
        );
        assert_eq!(strings(&minimal_signals_bfs(1, 1)), set(&["0"]));
        let len1 = k_constraint_automaton(1).enumerate_admissible(1);
        assert_eq!(strings(&len1), set(&["0", "1"]));
        assert_eq!(strings(&minimal_filter(&len1)), set(&["0"]));
        assert_eq!(
            strings(&minimal_signals_bfs(1, 5)),
            set(&["01010", "10101", "01101", "10110"])
        );
    }

    #[test]
    fn corollary_examples() {
        assert!(is_minimal_k(&sig("0110"), 1));
        assert!(!is_minimal_k(&sig("1011"), 1));
        assert!(!is_minimal_k(&sig("1111"), 1));
        assert!(!is_minimal_k(&sig("1001"), 1));
    }

    #[test]
    fn bfs_matches_filter_small() {
        for k in 1..=3 {
            for len in 1..=9 {
                let filtered = minimal_filter(&k_constraint_automaton(k).enumerate_admissible(len));
                assert_eq!(minimal_signals_bfs(k, len), filtered, "k={k} len={len}");
            }
        }
    }

    #[test]
    fn capped_enumeration() {
        let a = k_constraint_automaton(1);
        assert!(a.enumerate_admissible_capped(4, 8).is_ok());
        assert!(matches!(
            a.enumerate_admissible_capped(4, 7),
            Err(Error::ExhaustiveCapExceeded { cap: 7 })
        ));
    }

    #[test]
    fn json_round_trip_and_errors() {
        let text = r#"{"nodes":[1,2],"start":[1],"edges":[{"from":1,"to":2,"label":"10"},{"from":2,"to":1,"label":"1"}]}"#;
        let a = Automaton::from_json(text).unwrap();
        assert_eq!(Automaton::from_json(&a.to_json().unwrap()).unwrap(), a);

        let bad_label = r#"{"nodes":[1],"start":[1],"edges":[{"from":1,"to":1,"label":"12"}]}"#;
        assert!(Automaton::from_json(bad_label).is_err());
        let empty_label = r#"{"nodes":[1],"start":[1],"edges":[{"from":1,"to":1,"label":""}]}"#;
        assert!(Automaton::from_json(empty_label).is_err());
        let dangling = r#"{"nodes":[1],"start":[1],"edges":[{"from":1,"to":3,"label":"1"}]}"#;
        assert!(Automaton::from_json(dangling).is_err());
        let no_start = r#"{"nodes":[1],"start":[],"edges":[]}"#;
        assert!(Automaton::from_json(no_start).is_err());
    }

    #[test]
    fn signal_parsing() {
        assert_eq!(sig("0110").bits(), &[0, 1, 1, 0]);
        assert!("".parse::<Signal>().is_err());
        assert!("01a".parse::<Signal>().is_err());
        assert_eq!(serde_json::to_string(&sig("101")).unwrap(), "\"101\"");
    }
}
