use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EventLog, RefineError};

/// "component is in state".
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub component: String,
    pub state: String,
}

impl Literal {
    pub fn new(component: impl Into<String>, state: impl Into<String>) -> Self {
        Literal {
            component: component.into(),
            state: state.into(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}=={}", self.component, self.state)
    }
}

impl FromStr for Literal {
    type Err = String;

    /// Accepts `C=s` or `C==s`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (c, st) = s
            .split_once("==")
            .or_else(|| s.split_once('='))
            .ok_or_else(|| format!("expected COMPONENT=STATE, got `{s}`"))?;
        let (c, st) = (c.trim(), st.trim());
        if c.is_empty() || st.is_empty() {
            return Err(format!("expected COMPONENT=STATE, got `{s}`"));
        }
        Ok(Literal::new(c, st))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationRule {
    /// Sorted, non-empty, never contains the consequent.
    pub antecedent: Vec<Literal>,
    pub consequent: Literal,
    /// Fraction of transactions containing antecedent and consequent.
    pub support: f64,
    /// `count / antecedent_count`.
    pub confidence: f64,
    pub count: usize,
    pub antecedent_count: usize,
}

impl fmt::Display for AssociationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs: Vec<String> = self.antecedent.iter().map(Literal::to_string).collect();
        write!(
            f,
            "({}) => {} [support {}, confidence {}]",
            lhs.join(" and "),
            self.consequent,
            self.support,
            self.confidence
        )
    }
}

/// How a log is cut into transactions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum TransactionWindow {
    /// Every literal seen in a case forms one transaction.
    #[default]
    Case,
    /// Consecutive windows of this length, measured from each case's first
    /// timestamp.
    Duration(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub min_support: f64,
    pub min_confidence: f64,
    pub max_antecedent: usize,
    pub window: TransactionWindow,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            min_support: 0.1,
            min_confidence: 0.5,
            max_antecedent: 3,
            window: TransactionWindow::Case,
        }
    }
}

pub fn transactions(log: &EventLog, window: TransactionWindow) -> Vec<BTreeSet<Literal>> {
    let mut out = Vec::new();
    for (_, records) in log.cases() {
        match window {
            TransactionWindow::Case => {
                out.push(records.iter().map(|r| Literal::new(&r.component, &r.state)).collect());
            }
            TransactionWindow::Duration(w) => {
                let t0 = records[0].timestamp;
                let mut current: Option<(u64, BTreeSet<Literal>)> = None;
                for r in records {
                    let bucket = ((r.timestamp - t0) / w).floor() as u64;
                    match &mut current {
                        Some((b, set)) if *b == bucket => {
                            set.insert(Literal::new(&r.component, &r.state));
                        }
                        _ => {
                            if let Some((_, set)) = current.take() {
                                out.push(set);
                            }
                            current = Some((bucket, BTreeSet::from([Literal::new(&r.component, &r.state)])));
                        }
                    }
                }
                out.extend(current.map(|(_, s)| s));
            }
        }
    }
    out
}

fn is_frequent(count: usize, n: usize, min_support: f64) -> bool {
    count as f64 / n as f64 >= min_support
}

/// Level-wise Apriori: itemsets with support >= `min_support` and at most
/// `max_len` literals, each with its transaction count. Sorted by size,
/// then lexicographically.
pub fn frequent_itemsets(
    transactions: &[BTreeSet<Literal>],
    min_support: f64,
    max_len: usize,
) -> Vec<(Vec<Literal>, usize)> {
    let (items, counts) = frequent_counts(transactions, min_support, max_len);
    let mut out: Vec<(Vec<Literal>, usize)> = counts
        .into_iter()
        .map(|(set, c)| (set.into_iter().map(|i| items[i].clone()).collect(), c))
        .collect();
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    out
}

type Counts = (Vec<Literal>, HashMap<Vec<usize>, usize>);

fn frequent_counts(transactions: &[BTreeSet<Literal>], min_support: f64, max_len: usize) -> Counts {
    let n = transactions.len();
    let items: Vec<Literal> = transactions
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<&Literal, usize> = items.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let encoded: Vec<Vec<usize>> = transactions
        .iter()
        .map(|t| t.iter().map(|l| index[l]).collect())
        .collect();

    let mut frequent: HashMap<Vec<usize>, usize> = HashMap::new();
    if n == 0 || max_len == 0 {
        return (items, frequent);
    }
    let mut singles = vec![0usize; items.len()];
    for t in &encoded {
        for &i in t {
            singles[i] += 1;
        }
    }
    let mut level: Vec<Vec<usize>> = Vec::new();
    for (i, &c) in singles.iter().enumerate() {
        if is_frequent(c, n, min_support) {
            frequent.insert(vec![i], c);
            level.push(vec![i]);
        }
    }
    let mut k = 1;
    while !level.is_empty() && k < max_len {
        // join itemsets sharing their first k-1 items; `level` is sorted
        let mut candidates = Vec::new();
        for a in 0..level.len() {
            for b in a + 1..level.len() {
                if level[a][..k - 1] != level[b][..k - 1] {
                    break;
                }
                let mut c = level[a].clone();
                c.push(level[b][k - 1]);
                let all_subsets_frequent = (0..c.len()).all(|skip| {
                    let sub: Vec<usize> = c.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, &x)| x).collect();
                    frequent.contains_key(&sub)
                });
                if all_subsets_frequent {
                    candidates.push(c);
                }
            }
        }
        let mut next = Vec::new();
        for c in candidates {
            let count = encoded.iter().filter(|t| is_subset(&c, t)).count();
            if is_frequent(count, n, min_support) {
                frequent.insert(c.clone(), count);
                next.push(c);
            }
        }
        next.sort();
        level = next;
        k += 1;
    }
    (items, frequent)
}

/// Both slices sorted ascending.
fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.by_ref().any(|y| y == x))
}

fn check_thresholds(config: &MiningConfig) -> Result<(), RefineError> {
    for (name, value) in [("min_support", config.min_support), ("min_confidence", config.min_confidence)] {
        if !(value > 0.0 && value <= 1.0) {
            return Err(RefineError::Threshold { name, value });
        }
    }
    Ok(())
}

/// Rules `A => c` with `1 <= |A| <= max_antecedent` meeting both thresholds,
/// ordered by confidence, support (both descending), antecedent size,
/// antecedent, consequent.
pub fn mine_rules_from_transactions(
    transactions: &[BTreeSet<Literal>],
    config: &MiningConfig,
) -> Result<Vec<AssociationRule>, RefineError> {
    check_thresholds(config)?;
    if transactions.is_empty() {
        return Err(RefineError::EmptyLog);
    }
    let n = transactions.len();
    let (items, frequent) = frequent_counts(transactions, config.min_support, config.max_antecedent + 1);
    let mut rules = Vec::new();
    for (set, &count) in &frequent {
        if set.len() < 2 {
            continue;
        }
        for skip in 0..set.len() {
            let antecedent: Vec<usize> =
                set.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, &x)| x).collect();
            let antecedent_count = frequent[&antecedent];
            let confidence = count as f64 / antecedent_count as f64;
            if confidence >= config.min_confidence {
                rules.push(AssociationRule {
                    antecedent: antecedent.iter().map(|&i| items[i].clone()).collect(),
                    consequent: items[set[skip]].clone(),
                    support: count as f64 / n as f64,
                    confidence,
                    count,
                    antecedent_count,
                });
            }
        }
    }
    rules.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(b.support.total_cmp(&a.support))
            .then(a.antecedent.len().cmp(&b.antecedent.len()))
            .then_with(|| a.antecedent.cmp(&b.antecedent))
            .then_with(|| a.consequent.cmp(&b.consequent))
    });
    Ok(rules)
}

pub fn mine_association_rules(log: &EventLog, config: &MiningConfig) -> Result<Vec<AssociationRule>, RefineError> {
    check_thresholds(config)?;
    if log.is_empty() {
        return Err(RefineError::EmptyLog);
    }
    mine_rules_from_transactions(&transactions(log, config.window), config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refine::LogRecord;
    use proptest::prelude::*;

    fn lit(s: &str) -> Literal {
        s.parse().unwrap()
    }

    fn tx(items: &[&str]) -> BTreeSet<Literal> {
        items.iter().map(|s| lit(s)).collect()
    }

    #[test]
    fn literal_syntax() {
        assert_eq!(lit("C1=ko"), Literal::new("C1", "ko"));
        assert_eq!(lit("C1==ko"), Literal::new("C1", "ko"));
        assert_eq!(Literal::new("C1", "ko").to_string(), "C1==ko");
        assert!("C1".parse::<Literal>().is_err());
    }

    #[test]
    fn confidence_is_an_exact_ratio() {
        let mut txs = vec![tx(&["C1=ko", "TOP=ok", "TOP=ko"]); 4];
        txs.extend(vec![tx(&["C1=ko", "TOP=ok"]); 6]);
        let cfg = MiningConfig { min_support: 0.1, min_confidence: 0.4, ..Default::default() };
        let rules = mine_rules_from_transactions(&txs, &cfg).unwrap();
        let r = rules
            .iter()
            .find(|r| r.antecedent == [lit("C1=ko"), lit("TOP=ok")] && r.consequent == lit("TOP=ko"))
            .unwrap();
        assert_eq!(r.confidence, 0.4);
        assert_eq!((r.count, r.antecedent_count), (4, 10));
    }

    #[test]
    fn single_case_supports_are_degenerate() {
        let log = EventLog::new(vec![
            LogRecord { case_id: "a".into(), component: "C1".into(), state: "ok".into(), timestamp: 0.0 },
            LogRecord { case_id: "a".into(), component: "C1".into(), state: "ko".into(), timestamp: 1.0 },
        ])
        .unwrap();
        let rules = mine_association_rules(&log, &MiningConfig::default()).unwrap();
        assert!(!rules.is_empty());
        assert!(rules.iter().all(|r| r.support == 0.0 || r.support == 1.0));
    }

    #[test]
    fn duration_windows_split_cases() {
        let rec = |s: &str, t| LogRecord { case_id: "a".into(), component: "C".into(), state: s.into(), timestamp: t };
        let log = EventLog::new(vec![rec("x", 0.0), rec("y", 1.0), rec("z", 5.0)]).unwrap();
        assert_eq!(transactions(&log, TransactionWindow::Case).len(), 1);
        let w = transactions(&log, TransactionWindow::Duration(2.0));
        assert_eq!(w, vec![tx(&["C=x", "C=y"]), tx(&["C=z"])]);
    }

    #[test]
    fn bad_inputs() {
        let cfg = MiningConfig { min_support: 0.0, ..Default::default() };
        assert!(matches!(mine_rules_from_transactions(&[tx(&["a=b"])], &cfg), Err(RefineError::Threshold { .. })));
        assert!(matches!(
            mine_association_rules(&EventLog::default(), &MiningConfig::default()),
            Err(RefineError::EmptyLog)
        ));
    }

    fn arb_transactions() -> impl Strategy<Value = Vec<BTreeSet<Literal>>> {
        let literal = (0..3u8, 0..3u8).prop_map(|(c, s)| Literal::new(format!("C{c}"), format!("s{s}")));
        prop::collection::vec(prop::collection::btree_set(literal, 0..5), 1..40)
    }

    proptest! {
        #[test]
        fn itemsets_are_downward_closed(txs in arb_transactions(), support in 0.05f64..0.6) {
            let sets = frequent_itemsets(&txs, support, 4);
            let keys: BTreeSet<Vec<Literal>> = sets.iter().map(|(s, _)| s.clone()).collect();
            for (set, _) in &sets {
                for skip in 0..set.len() {
                    let mut sub = set.clone();
                    sub.remove(skip);
                    prop_assert!(sub.is_empty() || keys.contains(&sub));
                }
            }
        }

        #[test]
        fn rules_meet_thresholds(txs in arb_transactions(), support in 0.05f64..0.6, conf in 0.1f64..1.0) {
            let cfg = MiningConfig { min_support: support, min_confidence: conf, ..Default::default() };
            for r in mine_rules_from_transactions(&txs, &cfg).unwrap() {
                prop_assert!(r.support >= support && r.confidence >= conf);
                prop_assert!(!r.antecedent.contains(&r.consequent));
                prop_assert!(r.count <= r.antecedent_count);
            }
        }
    }
}
