//! Node-local QMW-MSR update: randomized quantization, extreme-value
//! partitioning, cover-bounded trimming and the quantized average.
//!
//! A normal node sorts the messages above its own value largest-first and
//! removes the longest prefix whose minimum message cover has at most `f`
//! nodes; the messages below are handled symmetrically. Everything left,
//! including its own value and every message equal to it, is averaged with
//! uniform weight and passed through the randomized quantizer.
//!
//! A path on which nothing has been received yields an EMPTY entry. EMPTY
//! entries are never averaged. They are appended after the real values of the
//! side being trimmed (the upper side, or the lower side when the upper one
//! holds no real value), so they take part in that side's cover accounting
//! without being able to shield a falsified real value from removal.

use std::cmp::Ordering;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{NodeId, Path};
use crate::mmc;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("cannot quantize non-finite value {0}")]
    NonFinite(f64),
    #[error("floor probability must lie in (0, 1), got {0}")]
    BadProbability(f64),
}

/// Probability of rounding down a non-integer input.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FloorRule {
    /// `ceil(y) - y`, which makes the quantizer unbiased.
    #[default]
    Unbiased,
    /// A fixed probability in `(0, 1)`.
    Fixed(f64),
}

/// Randomized quantizer `Q(y) ∈ {floor(y), ceil(y)}`.
#[derive(Debug, Clone)]
pub struct Quantizer {
    rng: ChaCha8Rng,
    rule: FloorRule,
}

impl Quantizer {
    pub fn new(rng: ChaCha8Rng) -> Self {
        Quantizer {
            rng,
            rule: FloorRule::Unbiased,
        }
    }

    pub fn with_rule(rng: ChaCha8Rng, rule: FloorRule) -> Result<Self, ProtocolError> {
        if let FloorRule::Fixed(p) = rule {
            if !(p > 0.0 && p < 1.0) {
                return Err(ProtocolError::BadProbability(p));
            }
        }
        Ok(Quantizer { rng, rule })
    }

    pub fn quantize(&mut self, y: f64) -> Result<i64, ProtocolError> {
        if !y.is_finite() {
            return Err(ProtocolError::NonFinite(y));
        }
        let lo = y.floor();
        if lo == y {
            return Ok(lo as i64);
        }
        let p_floor = match self.rule {
            FloorRule::Unbiased => y.ceil() - y,
            FloorRule::Fixed(p) => p,
        };
        let down = self.rng.gen::<f64>() < p_floor;
        Ok(if down { lo as i64 } else { lo as i64 + 1 })
    }

    /// `Q(num / den)` for `den > 0`, drawn exactly in integer arithmetic.
    pub fn quantize_ratio(&mut self, num: i64, den: i64) -> i64 {
        assert!(den > 0);
        let lo = num.div_euclid(den);
        let rem = num.rem_euclid(den);
        if rem == 0 {
            return lo;
        }
        let down = match self.rule {
            // P(floor) = ceil - y = (den - rem) / den
            FloorRule::Unbiased => self.rng.gen_range(0..den) < den - rem,
            FloorRule::Fixed(p) => self.rng.gen::<f64>() < p,
        };
        if down {
            lo
        } else {
            lo + 1
        }
    }
}

/// One received message: the value carried along `path` (`None` = EMPTY) and
/// the step at which it originated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub value: Option<i64>,
    pub path: Path,
    pub stamp: u64,
}

impl Message {
    pub fn new(value: i64, path: Path, stamp: u64) -> Self {
        Message {
            value: Some(value),
            path,
            stamp,
        }
    }

    pub fn empty(path: Path, stamp: u64) -> Self {
        Message {
            value: None,
            path,
            stamp,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_none()
    }
}

/// Everything node `node` holds when it updates: its own zero-hop message
/// plus one entry per incoming path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InboxView {
    pub node: NodeId,
    pub own: i64,
    pub entries: Vec<Message>,
}

impl InboxView {
    /// Inbox holding only the node's own value.
    pub fn own_only(node: NodeId, own: i64, stamp: u64) -> Self {
        InboxView {
            node,
            own,
            entries: vec![Message::new(own, Path::trivial(node), stamp)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrimOutcome {
    /// Messages trimmed from either side, EMPTY entries included.
    pub removed: Vec<Message>,
    /// Messages that enter the average.
    pub kept: Vec<Message>,
    /// EMPTY entries that were not needed to fill the trimming budget.
    pub unused_empty: Vec<Message>,
}

impl TrimOutcome {
    /// Uniform averaging weight.
    pub fn weight(&self) -> f64 {
        1.0 / self.kept.len() as f64
    }
}

/// Messages strictly above and strictly below `own`. EMPTY entries and
/// messages equal to `own` fall in neither.
pub fn partition_messages(inbox: &InboxView) -> (Vec<&Message>, Vec<&Message>) {
    let mut above = Vec::new();
    let mut below = Vec::new();
    for m in &inbox.entries {
        match m.value {
            Some(v) if v > inbox.own => above.push(m),
            Some(v) if v < inbox.own => below.push(m),
            _ => {}
        }
    }
    (above, below)
}

/// Splits off EMPTY entries.
pub fn handle_empty(inbox: &InboxView) -> (InboxView, Vec<Message>) {
    let (empty, rest): (Vec<Message>, Vec<Message>) =
        inbox.entries.iter().cloned().partition(|m| m.is_empty());
    (
        InboxView {
            node: inbox.node,
            own: inbox.own,
            entries: rest,
        },
        empty,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
}

/// Orders a side extreme-first. Among equal values the lexicographically
/// larger path comes first, so the smaller one survives a cut through a tie.
/// EMPTY entries go last.
pub fn sort_side(side: &mut [&Message], which: Side) {
    side.sort_by(|a, b| match (a.value, b.value) {
        (Some(x), Some(y)) => {
            let by_value = match which {
                Side::Above => y.cmp(&x),
                Side::Below => x.cmp(&y),
            };
            by_value.then_with(|| b.path.cmp(&a.path))
        }
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => b.path.cmp(&a.path),
    });
}

/// Number of leading entries of an extreme-first `side` to remove: the longest
/// prefix whose minimum message cover has at most `f` nodes.
pub fn trim_side(side: &[&Message], f: usize, dest: NodeId) -> usize {
    if side.is_empty() || f == 0 {
        return 0;
    }
    let covered = |len: usize| {
        mmc::bounded_message_cover(side[..len].iter().map(|m| &m.path), dest, f).is_some()
    };
    if covered(side.len()) {
        return side.len();
    }
    // cover size is monotone in the prefix length, and any f entries fit
    let (mut ok, mut bad) = (f.min(side.len()), side.len());
    while bad - ok > 1 {
        let mid = (ok + bad) / 2;
        if covered(mid) {
            ok = mid;
        } else {
            bad = mid;
        }
    }
    ok
}

/// Steps 2(a)-(d): partition, attach EMPTY entries, trim both sides.
pub fn trim(inbox: &InboxView, f: usize) -> TrimOutcome {
    let dest = inbox.node;
    let (mut above, mut below) = partition_messages(inbox);
    let empties: Vec<&Message> = inbox.entries.iter().filter(|m| m.is_empty()).collect();
    if above.is_empty() && !below.is_empty() {
        below.extend(empties.iter().copied());
    } else {
        above.extend(empties.iter().copied());
    }
    sort_side(&mut above, Side::Above);
    sort_side(&mut below, Side::Below);
    let cut_above = trim_side(&above, f, dest);
    let cut_below = trim_side(&below, f, dest);

    let removed: Vec<Message> = above[..cut_above]
        .iter()
        .chain(&below[..cut_below])
        .map(|&m| m.clone())
        .collect();
    let unused_empty: Vec<Message> = above[cut_above..]
        .iter()
        .chain(&below[cut_below..])
        .filter(|m| m.is_empty())
        .map(|&m| m.clone())
        .collect();
    let is_trimmed = |m: &Message| {
        above[..cut_above]
            .iter()
            .chain(&below[..cut_below])
            .any(|r| std::ptr::eq(*r, m))
    };
    let kept: Vec<Message> = inbox
        .entries
        .iter()
        .filter(|m| !m.is_empty() && !is_trimmed(m))
        .cloned()
        .collect();
    TrimOutcome {
        removed,
        kept,
        unused_empty,
    }
}

/// Step 3: quantized uniform average of the kept values.
pub fn msr_update(q: &mut Quantizer, outcome: &TrimOutcome) -> i64 {
    assert!(!outcome.kept.is_empty(), "own value is always kept");
    let sum: i64 = outcome
        .kept
        .iter()
        .map(|m| m.value.expect("kept messages carry values"))
        .sum();
    q.quantize_ratio(sum, outcome.kept.len() as i64)
}

/// One full QMW-MSR update of a normal node.
pub fn qmw_msr_step(q: &mut Quantizer, inbox: &InboxView, f: usize) -> (i64, TrimOutcome) {
    let outcome = trim(inbox, f);
    (msr_update(q, &outcome), outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn q(seed: u64) -> Quantizer {
        Quantizer::new(ChaCha8Rng::seed_from_u64(seed))
    }

    fn msg(v: i64, p: &[usize]) -> Message {
        Message::new(v, Path::new(p.to_vec()), 0)
    }

    fn inbox(node: usize, own: i64, rest: Vec<Message>) -> InboxView {
        let mut entries = vec![Message::new(own, Path::trivial(node), 0)];
        entries.extend(rest);
        InboxView { node, own, entries }
    }

    #[test]
    fn quantizer_fixed_points_and_support() {
        let mut qz = q(1);
        assert_eq!(qz.quantize(2.0).unwrap(), 2);
        assert_eq!(qz.quantize(-3.0).unwrap(), -3);
        for _ in 0..100 {
            assert!(matches!(qz.quantize(1.5).unwrap(), 1 | 2));
            assert!(matches!(qz.quantize(-0.25).unwrap(), -1 | 0));
            assert!(matches!(qz.quantize_ratio(13, 3), 4 | 5));
        }
        assert_eq!(qz.quantize_ratio(-6, 3), -2);
        assert!(qz.quantize(f64::NAN).is_err());
        assert!(qz.quantize(f64::INFINITY).is_err());
    }

    #[test]
    fn quantizer_frequencies() {
        let mut qz = q(2);
        let n = 20_000;
        let floors = (0..n).filter(|_| qz.quantize(2.3).unwrap() == 2).count();
        assert!((floors as f64 / n as f64 - 0.7).abs() < 0.02);
        let floors = (0..n).filter(|_| qz.quantize_ratio(13, 3) == 4).count();
        assert!((floors as f64 / n as f64 - 2.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn fixed_floor_rule() {
        assert!(Quantizer::with_rule(ChaCha8Rng::seed_from_u64(0), FloorRule::Fixed(1.0)).is_err());
        let mut qz =
            Quantizer::with_rule(ChaCha8Rng::seed_from_u64(0), FloorRule::Fixed(0.9)).unwrap();
        assert_eq!(qz.quantize(4.0).unwrap(), 4);
        let floors = (0..10_000).filter(|_| qz.quantize_ratio(1, 2) == 0).count();
        assert!((floors as f64 / 1e4 - 0.9).abs() < 0.02);
    }

    #[test]
    fn partitioning() {
        let ib = inbox(
            0,
            5,
            vec![msg(3, &[1, 0]), msg(5, &[2, 0]), msg(7, &[3, 0])],
        );
        let (a, b) = partition_messages(&ib);
        assert_eq!(a.iter().map(|m| m.value).collect::<Vec<_>>(), vec![Some(7)]);
        assert_eq!(b.iter().map(|m| m.value).collect::<Vec<_>>(), vec![Some(3)]);
        let flat = inbox(0, 4, vec![msg(4, &[1, 0])]);
        let (a, b) = partition_messages(&flat);
        assert!(a.is_empty() && b.is_empty());
        let neg = inbox(
            0,
            0,
            vec![msg(-2, &[1, 0]), msg(-1, &[2, 0]), msg(1, &[3, 0])],
        );
        let (a, b) = partition_messages(&neg);
        assert_eq!((a.len(), b.len()), (1, 2));
    }

    #[test]
    fn trimming_examples() {
        // one adversarial source seen over two paths: both go
        let side = [msg(9, &[4, 3, 0]), msg(9, &[4, 5, 0])];
        let refs: Vec<&Message> = side.iter().collect();
        assert_eq!(trim_side(&refs, 1, 0), 2);
        // two distinct one-hop sources: only the most extreme goes
        let side = [msg(9, &[1, 0]), msg(8, &[2, 0])];
        let refs: Vec<&Message> = side.iter().collect();
        assert_eq!(trim_side(&refs, 1, 0), 1);
        assert_eq!(trim_side(&refs, 0, 0), 0);
    }

    #[test]
    fn tie_straddling_the_cut_keeps_smaller_path() {
        let ib = inbox(0, 1, vec![msg(5, &[1, 0]), msg(5, &[2, 0])]);
        let out = trim(&ib, 1);
        assert_eq!(out.removed.len(), 1);
        assert_eq!(out.removed[0].path, Path::new(vec![2, 0]));
        assert!(out.kept.iter().any(|m| m.path == Path::new(vec![1, 0])));
    }

    #[test]
    fn own_value_survives_and_update_is_convex() {
        let ib = inbox(
            0,
            5,
            vec![msg(100, &[1, 0]), msg(-100, &[2, 0]), msg(6, &[3, 0])],
        );
        let out = trim(&ib, 1);
        assert!(out.kept.iter().any(|m| m.path == Path::trivial(0)));
        let mut qz = q(3);
        for _ in 0..50 {
            let v = msr_update(&mut qz, &out);
            assert!((5..=6).contains(&v));
        }
    }

    #[test]
    fn update_examples() {
        let mut qz = q(4);
        let c = TrimOutcome {
            removed: vec![],
            kept: vec![msg(7, &[0]), msg(7, &[1, 0])],
            unused_empty: vec![],
        };
        assert_eq!(msr_update(&mut qz, &c), 7);
        let pair = TrimOutcome {
            removed: vec![],
            kept: vec![msg(4, &[0]), msg(5, &[1, 0])],
            unused_empty: vec![],
        };
        let ups = (0..4000)
            .filter(|_| msr_update(&mut qz, &pair) == 5)
            .count();
        assert!((ups as f64 / 4000.0 - 0.5).abs() < 0.04);
        assert!((pair.weight() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_entries() {
        // EMPTY from source 3, f = 1, nothing else extreme: EMPTY is trimmed
        let ib = inbox(
            0,
            5,
            vec![Message::empty(Path::new(vec![3, 1, 0]), 0), msg(5, &[1, 0])],
        );
        let out = trim(&ib, 1);
        assert_eq!(out.removed.len(), 1);
        assert!(out.removed[0].is_empty());
        assert!(out.unused_empty.is_empty());

        // EMPTY entries never displace a falsified real value
        let ib = inbox(
            0,
            5,
            vec![
                Message::empty(Path::new(vec![2, 1, 0]), 0),
                Message::empty(Path::new(vec![4, 3, 0]), 0),
                msg(50, &[6, 0]),
            ],
        );
        let out = trim(&ib, 1);
        assert!(out.removed.iter().any(|m| m.value == Some(50)));
        assert_eq!(out.unused_empty.len(), 2);
        assert!(out.kept.iter().all(|m| m.value == Some(5)));

        // nothing but EMPTY: the node keeps its value
        let ib = inbox(
            0,
            3,
            vec![
                Message::empty(Path::new(vec![1, 0]), 0),
                Message::empty(Path::new(vec![2, 0]), 0),
            ],
        );
        let (v, out) = qmw_msr_step(&mut q(0), &ib, 1);
        assert_eq!(v, 3);
        assert_eq!(out.kept.len(), 1);

        let plain = inbox(0, 1, vec![msg(2, &[1, 0])]);
        assert_eq!(handle_empty(&plain).0, plain);
        assert!(handle_empty(&plain).1.is_empty());
    }
}
