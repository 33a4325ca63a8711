use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::model::{GuideKind, GuideModel};
use crate::corpus::PrefixExample;
use crate::error::{Error, Result};
use crate::lm::Vocab;
use crate::rubric::{list_tactics, TACTIC_COUNT};

/// Probability that a random positive outranks a random negative, with
/// ties counted half. Computed from average ranks in O(n log n).
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("NaN score passed to auroc".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::invalid("auroc needs at least one positive and one negative label"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks are 1-based; a tie group shares the mean rank
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if labels[idx] {
                rank_sum += mean_rank;
            }
        }
        i = j + 1;
    }
    let (p, n) = (positives as f64, negatives as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// One entry per model output.
    pub auroc: Vec<Option<f64>>,
    /// Mean true-tactic sigmoid output over single-tactic items, `None`
    /// for tactics without test items.
    pub tactic_means: [Option<f64>; TACTIC_COUNT],
    /// Row = true tactic, column = argmax prediction.
    pub confusion: [[usize; TACTIC_COUNT]; TACTIC_COUNT],
}

impl EvalReport {
    pub fn row_counts(&self) -> [usize; TACTIC_COUNT] {
        self.confusion.map(|row| row.iter().sum())
    }

    /// Tactics whose diagonal cell is the (possibly shared) row maximum.
    pub fn diagonal_row_max(&self) -> usize {
        (0..TACTIC_COUNT)
            .filter(|&k| {
                let row = &self.confusion[k];
                row.iter().sum::<usize>() > 0 && row.iter().all(|&c| c <= row[k])
            })
            .count()
    }

    pub fn single_tactic_accuracy(&self) -> Option<f64> {
        let total: usize = self.row_counts().iter().sum();
        if total == 0 {
            return None;
        }
        let hits: usize = (0..TACTIC_COUNT).map(|k| self.confusion[k][k]).sum();
        Some(hits as f64 / total as f64)
    }

    pub fn tactic_means_csv(&self) -> String {
        let mut out = String::from("tactic_id,tactic,mean_score,n\n");
        let counts = self.row_counts();
        for t in list_tactics() {
            let mean = self.tactic_means[t.id].map(|m| format!("{m:.6}")).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", t.id, t.name, mean, counts[t.id]);
        }
        out
    }

    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for t in list_tactics() {
            let _ = write!(out, ",{}", t.name);
        }
        out.push('\n');
        for t in list_tactics() {
            out.push_str(t.name);
            for c in self.confusion[t.id] {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }
}

/// Clickbait-scorer AUROC over the given prefixes.
pub fn clickbait_auroc<'a, I>(model: &GuideModel, vocab: &Vocab, examples: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a PrefixExample>,
{
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for ex in examples {
        scores.push(model.score_clickbait(&vocab.ids(&ex.tokens), ex.is_complete)?);
        labels.push(ex.clickbait);
    }
    auroc(&scores, &labels)
}

/// Per-output AUROC over all given prefixes plus the single-tactic
/// breakdown over complete items with exactly one active tactic.
pub fn evaluate_single_tactic(model: &GuideModel, vocab: &Vocab, test: &[PrefixExample]) -> Result<EvalReport> {
    if model.kind != GuideKind::Engagement {
        return Err(Error::invalid("single-tactic evaluation needs the engagement guide"));
    }
    model.space().check_vocab(vocab)?;
    let mut per_output: Vec<Vec<f64>> = vec![Vec::new(); TACTIC_COUNT];
    let mut per_label: Vec<Vec<bool>> = vec![Vec::new(); TACTIC_COUNT];
    let mut sums = [0.0; TACTIC_COUNT];
    let mut confusion = [[0usize; TACTIC_COUNT]; TACTIC_COUNT];
    for ex in test {
        let scores = model.score_attributes(&vocab.ids(&ex.tokens), ex.is_complete)?;
        for k in 0..TACTIC_COUNT {
            per_output[k].push(scores[k]);
            per_label[k].push(ex.attributes.get(k));
        }
        if ex.is_complete && ex.attributes.popcount() == 1 {
            let truth = ex.attributes.active().next().expect("popcount 1");
            sums[truth] += scores[truth];
            confusion[truth][argmax(&scores)] += 1;
        }
    }
    if confusion.iter().all(|row| row.iter().all(|&c| c == 0)) {
        return Err(Error::EmptyInput("single-tactic complete test items"));
    }
    let auroc = per_output
        .iter()
        .zip(&per_label)
        .map(|(s, l)| auroc(s, l).ok())
        .collect();
    let mut tactic_means = [None; TACTIC_COUNT];
    for k in 0..TACTIC_COUNT {
        let n: usize = confusion[k].iter().sum();
        if n > 0 {
            tactic_means[k] = Some(sums[k] / n as f64);
        }
    }
    Ok(EvalReport {
        auroc,
        tactic_means,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auroc_examples() {
        assert_eq!(auroc(&[0.9, 0.1], &[true, false]).unwrap(), 1.0);
        assert_eq!(auroc(&[0.5, 0.5], &[true, false]).unwrap(), 0.5);
        assert_eq!(auroc(&[0.8, 0.6, 0.1], &[false, true, false]).unwrap(), 0.5);
        assert!(auroc(&[0.1, 0.2], &[true, true]).is_err());
        assert!(auroc(&[0.1], &[true, false]).is_err());
    }

    #[test]
    fn auroc_matches_pairwise_count() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.random_range(2..40);
            // coarse scores so that ties happen
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64 / 4.0).collect();
            let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            labels[0] = true;
            labels[1] = false;
            let mut wins = 0.0;
            let mut pairs = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if labels[i] && !labels[j] {
                        pairs += 1.0;
                        if scores[i] > scores[j] {
                            wins += 1.0;
                        } else if scores[i] == scores[j] {
                            wins += 0.5;
                        }
                    }
                }
            }
            let got = auroc(&scores, &labels).unwrap();
            assert!((got - wins / pairs).abs() < 1e-12);
        }
    }

    #[test]
    fn argmax_ties_to_lowest() {
        assert_eq!(argmax(&[0.5; 10]), 0);
        assert_eq!(argmax(&[0.1, 0.7, 0.7]), 1);
    }

    fn report_from(confusion: [[usize; TACTIC_COUNT]; TACTIC_COUNT]) -> EvalReport {
        EvalReport {
            auroc: vec![None; TACTIC_COUNT],
            tactic_means: [None; TACTIC_COUNT],
            confusion,
        }
    }

    #[test]
    fn identity_matrix_summaries() {
        let mut m = [[0; TACTIC_COUNT]; TACTIC_COUNT];
        for (k, row) in m.iter_mut().enumerate() {
            row[k] = 3;
        }
        let r = report_from(m);
        assert_eq!(r.diagonal_row_max(), 10);
        assert_eq!(r.single_tactic_accuracy(), Some(1.0));
        assert_eq!(r.row_counts(), [3; TACTIC_COUNT]);
        let csv = r.confusion_csv();
        assert_eq!(csv.lines().count(), 11);
        assert!(csv.lines().nth(1).unwrap().starts_with("information_gap_control,3,0"));
    }

    #[test]
    fn missing_tactic_is_absent_not_zero() {
        let r = report_from([[0; TACTIC_COUNT]; TACTIC_COUNT]);
        assert!(r.tactic_means_csv().lines().nth(1).unwrap().ends_with(",,0"));
        assert_eq!(r.single_tactic_accuracy(), None);
    }
}
