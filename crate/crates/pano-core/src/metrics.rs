//! Segmentation evaluation: confusion matrices, pixel and per-class
//! accuracy, mean IoU, and median-frequency class weights.
//!
//! All statistics flow through one [`ConfusionMatrix`] so that every
//! metric is computed from the same accumulation rules:
//!
//! * a pixel counts only if it is valid in **both** the ground-truth and
//!   predicted maps;
//! * pixels whose ground-truth class is in the ignore set are skipped
//!   (the reserved classes by default);
//! * out-of-range class indices (≥ [`CLASS_COUNT`]) are never scored —
//!   they are tallied as ignored rather than corrupting a bin.
//!
//! Undefined ratios stay undefined (`None`) instead of being folded in as
//! zeros: a class with no ground-truth pixels has no accuracy, and a class
//! absent from both maps has no IoU and is excluded from the mean. A class
//! the ground truth contains but the prediction never finds scores IoU 0
//! and *is* included — missing a present class is a real error.

use serde::Serialize;
use thiserror::Error;

use crate::palette::{Palette, CLASS_COUNT, RESERVED_CLASS_A, RESERVED_CLASS_B};
use crate::raster::LabelMap;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("prediction is {pred_w}×{pred_h} but ground truth is {gt_w}×{gt_h}")]
    ShapeMismatch {
        gt_w: usize,
        gt_h: usize,
        pred_w: usize,
        pred_h: usize,
    },
    #[error("class index {0} is out of range (0..{CLASS_COUNT})")]
    ClassOutOfRange(u8),
    #[error("no valid ground-truth pixels were accumulated")]
    Empty,
}

/// A set of class indices, used for the evaluation ignore list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassSet(u16);

impl ClassSet {
    pub const EMPTY: ClassSet = ClassSet(0);

    /// The reserved classes — ignored by default during evaluation.
    pub fn reserved() -> ClassSet {
        let mut set = ClassSet::EMPTY;
        set.insert(RESERVED_CLASS_A);
        set.insert(RESERVED_CLASS_B);
        set
    }

    pub fn from_indices(indices: &[u8]) -> Result<ClassSet, MetricsError> {
        let mut set = ClassSet::EMPTY;
        for &i in indices {
            if usize::from(i) >= CLASS_COUNT {
                return Err(MetricsError::ClassOutOfRange(i));
            }
            set.insert(i);
        }
        Ok(set)
    }

    fn insert(&mut self, class: u8) {
        debug_assert!(usize::from(class) < CLASS_COUNT);
        self.0 |= 1 << class;
    }

    pub fn contains(self, class: u8) -> bool {
        usize::from(class) < CLASS_COUNT && self.0 & (1 << class) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn indices(self) -> Vec<u8> {
        (0..CLASS_COUNT as u8).filter(|&c| self.contains(c)).collect()
    }
}

/// A 16×16 confusion matrix; rows are ground-truth classes, columns are
/// predicted classes. Also tracks how many pixels were ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: [[u64; CLASS_COUNT]; CLASS_COUNT],
    ignored: u64,
}

impl Default for ConfusionMatrix {
    fn default() -> Self {
        ConfusionMatrix::new()
    }
}

impl ConfusionMatrix {
    pub fn new() -> ConfusionMatrix {
        ConfusionMatrix {
            counts: [[0; CLASS_COUNT]; CLASS_COUNT],
            ignored: 0,
        }
    }

    /// Adds `n` pixels with ground truth `gt` predicted as `pred`.
    pub fn record(&mut self, gt: u8, pred: u8, n: u64) -> Result<(), MetricsError> {
        let (g, p) = (usize::from(gt), usize::from(pred));
        if g >= CLASS_COUNT {
            return Err(MetricsError::ClassOutOfRange(gt));
        }
        if p >= CLASS_COUNT {
            return Err(MetricsError::ClassOutOfRange(pred));
        }
        self.counts[g][p] += n;
        Ok(())
    }

    /// Scores one prediction against its ground truth. Pixels invalid in
    /// either map, ignored ground-truth classes, and out-of-range indices
    /// all land in the ignored tally instead of the matrix.
    pub fn accumulate(
        &mut self,
        gt: &LabelMap,
        pred: &LabelMap,
        ignore: ClassSet,
    ) -> Result<(), MetricsError> {
        if (gt.width(), gt.height()) != (pred.width(), pred.height()) {
            return Err(MetricsError::ShapeMismatch {
                gt_w: gt.width(),
                gt_h: gt.height(),
                pred_w: pred.width(),
                pred_h: pred.height(),
            });
        }
        for y in 0..gt.height() {
            for x in 0..gt.width() {
                if !gt.is_valid(x, y) || !pred.is_valid(x, y) {
                    self.ignored += 1;
                    continue;
                }
                let (g, p) = (gt.get(x, y), pred.get(x, y));
                if usize::from(g) >= CLASS_COUNT
                    || usize::from(p) >= CLASS_COUNT
                    || ignore.contains(g)
                {
                    self.ignored += 1;
                    continue;
                }
                self.counts[usize::from(g)][usize::from(p)] += 1;
            }
        }
        Ok(())
    }

    /// Adds another matrix's counts into this one. Accumulating frames
    /// separately and merging gives the same result as accumulating them
    /// all into one matrix.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for g in 0..CLASS_COUNT {
            for p in 0..CLASS_COUNT {
                self.counts[g][p] += other.counts[g][p];
            }
        }
        self.ignored += other.ignored;
    }

    pub fn count(&self, gt: u8, pred: u8) -> u64 {
        self.counts[usize::from(gt)][usize::from(pred)]
    }

    /// Pixels that were skipped (invalid, ignored class, or out of range).
    pub fn ignored(&self) -> u64 {
        self.ignored
    }

    /// Total scored pixels.
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Ground-truth pixels of one class (row sum).
    pub fn gt_pixels(&self, class: u8) -> u64 {
        self.counts[usize::from(class)].iter().sum()
    }

    /// Predicted pixels of one class (column sum).
    pub fn predicted_pixels(&self, class: u8) -> u64 {
        self.counts.iter().map(|row| row[usize::from(class)]).sum()
    }

    /// Ground-truth pixel counts for all classes.
    pub fn gt_histogram(&self) -> [u64; CLASS_COUNT] {
        let mut counts = [0; CLASS_COUNT];
        for (c, slot) in counts.iter_mut().enumerate() {
            *slot = self.gt_pixels(c as u8);
        }
        counts
    }

    /// Fraction of scored pixels predicted correctly; `None` when nothing
    /// was scored.
    pub fn pixel_accuracy(&self) -> Option<f64> {
        let total = self.total();
        if total == 0 {
            return None;
        }
        let correct: u64 = (0..CLASS_COUNT).map(|c| self.counts[c][c]).sum();
        Some(correct as f64 / total as f64)
    }

    /// Recall of one class: correct pixels over ground-truth pixels.
    /// `None` when the class has no ground-truth pixels.
    pub fn class_accuracy(&self, class: u8) -> Option<f64> {
        let c = usize::from(class);
        let gt = self.gt_pixels(class);
        if gt == 0 {
            return None;
        }
        Some(self.counts[c][c] as f64 / gt as f64)
    }

    pub fn per_class_accuracy(&self) -> [Option<f64>; CLASS_COUNT] {
        let mut acc = [None; CLASS_COUNT];
        for (c, slot) in acc.iter_mut().enumerate() {
            *slot = self.class_accuracy(c as u8);
        }
        acc
    }

    /// Mean of the defined per-class accuracies; classes without
    /// ground-truth pixels are excluded rather than counted as zero.
    pub fn mean_class_accuracy(&self) -> Option<f64> {
        mean_of_defined(&self.per_class_accuracy())
    }

    /// Intersection-over-union of one class. `None` when the class appears
    /// in neither ground truth nor prediction; a class present in either
    /// map scores a defined IoU (zero when there is no overlap).
    pub fn class_iou(&self, class: u8) -> Option<f64> {
        let c = usize::from(class);
        let tp = self.counts[c][c];
        let union = self.gt_pixels(class) + self.predicted_pixels(class) - tp;
        if union == 0 {
            return None;
        }
        Some(tp as f64 / union as f64)
    }

    pub fn per_class_iou(&self) -> [Option<f64>; CLASS_COUNT] {
        let mut iou = [None; CLASS_COUNT];
        for (c, slot) in iou.iter_mut().enumerate() {
            *slot = self.class_iou(c as u8);
        }
        iou
    }

    /// Mean IoU over classes present in ground truth or prediction.
    pub fn miou(&self) -> Option<f64> {
        mean_of_defined(&self.per_class_iou())
    }

    /// Builds the serializable evaluation report.
    pub fn report(&self, palette: &Palette) -> EvaluationReport {
        let per_class = (0..CLASS_COUNT as u8)
            .map(|c| ClassReport {
                index: c,
                name: palette.name_of(c).to_string(),
                iou: self.class_iou(c),
                accuracy: self.class_accuracy(c),
                gt_pixels: self.gt_pixels(c),
            })
            .collect();
        EvaluationReport {
            overall_accuracy: self.pixel_accuracy(),
            mean_class_accuracy: self.mean_class_accuracy(),
            miou: self.miou(),
            evaluated_pixels: self.total(),
            ignored_pixels: self.ignored,
            per_class,
        }
    }
}

fn mean_of_defined(values: &[Option<f64>; CLASS_COUNT]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    if defined.is_empty() {
        return None;
    }
    Some(defined.iter().sum::<f64>() / defined.len() as f64)
}

/// Median-frequency balancing weights: `weight_c = median / count_c`,
/// where the median is taken over the *nonzero* class counts (mean of the
/// two middle values for an even number of them). Classes with no pixels
/// get weight 0 — there is nothing to balance. Errs when every count is
/// zero.
pub fn median_frequency_weights(
    counts: &[u64; CLASS_COUNT],
) -> Result<[f64; CLASS_COUNT], MetricsError> {
    let mut nonzero: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    if nonzero.is_empty() {
        return Err(MetricsError::Empty);
    }
    nonzero.sort_unstable();
    let n = nonzero.len();
    let median = if n % 2 == 1 {
        nonzero[n / 2] as f64
    } else {
        (nonzero[n / 2 - 1] as f64 + nonzero[n / 2] as f64) / 2.0
    };
    let mut weights = [0.0; CLASS_COUNT];
    for (w, &c) in weights.iter_mut().zip(counts) {
        if c > 0 {
            *w = median / c as f64;
        }
    }
    Ok(weights)
}

/// Per-class entry of an [`EvaluationReport`]. Undefined ratios serialize
/// as `null`.
#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub index: u8,
    pub name: String,
    pub iou: Option<f64>,
    pub accuracy: Option<f64>,
    pub gt_pixels: u64,
}

/// Evaluation summary, serializable to JSON.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub overall_accuracy: Option<f64>,
    pub mean_class_accuracy: Option<f64>,
    pub miou: Option<f64>,
    pub evaluated_pixels: u64,
    pub ignored_pixels: u64,
    pub per_class: Vec<ClassReport>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// CSV table of the per-class rows; undefined ratios are left blank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,name,iou,accuracy,gt_pixels\n");
        for row in &self.per_class {
            let fmt = |v: Option<f64>| v.map(|v| format!("{v}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.index,
                row.name,
                fmt(row.iou),
                fmt(row.accuracy),
                row.gt_pixels
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn matrix_from(cells: &[(u8, u8, u64)]) -> ConfusionMatrix {
        let mut m = ConfusionMatrix::new();
        for &(g, p, n) in cells {
            m.record(g, p, n).unwrap();
        }
        m
    }

    #[test]
    fn empty_matrix_has_no_defined_metrics() {
        let m = ConfusionMatrix::new();
        assert_eq!(m.total(), 0);
        assert_eq!(m.pixel_accuracy(), None);
        assert_eq!(m.mean_class_accuracy(), None);
        assert_eq!(m.miou(), None);
        assert!(m.per_class_iou().iter().all(|v| v.is_none()));
    }

    #[test]
    fn two_class_overall_accuracy() {
        // gt\pred   0  1
        //      0  [ 3  1 ]
        //      1  [ 0  4 ]
        let m = matrix_from(&[(0, 0, 3), (0, 1, 1), (1, 1, 4)]);
        assert_relative_eq!(m.pixel_accuracy().unwrap(), 7.0 / 8.0);
        assert_relative_eq!(m.class_accuracy(0).unwrap(), 3.0 / 4.0);
        assert_relative_eq!(m.class_accuracy(1).unwrap(), 1.0);
        assert_eq!(m.class_accuracy(2), None);
    }

    #[test]
    fn two_class_miou() {
        // gt\pred   0  1
        //      0  [ 3  1 ]
        //      1  [ 2  4 ]
        // IoU(0) = 3/(4+5−3) = 1/2, IoU(1) = 4/(6+5−4) = 4/7,
        // mean = 15/28.
        let m = matrix_from(&[(0, 0, 3), (0, 1, 1), (1, 0, 2), (1, 1, 4)]);
        assert_relative_eq!(m.class_iou(0).unwrap(), 0.5);
        assert_relative_eq!(m.class_iou(1).unwrap(), 4.0 / 7.0);
        assert_relative_eq!(m.miou().unwrap(), 15.0 / 28.0, max_relative = 1e-15);
        assert_relative_eq!(m.pixel_accuracy().unwrap(), 0.7);
    }

    #[test]
    fn missed_classes_score_zero_but_absent_classes_are_excluded() {
        // Class 1 exists in ground truth but is never predicted: IoU 0,
        // included. Class 2 exists only in the prediction: IoU 0, also
        // included. Class 3 appears nowhere: excluded.
        let m = matrix_from(&[(0, 0, 6), (1, 0, 2), (0, 2, 2)]);
        assert_relative_eq!(m.class_iou(0).unwrap(), 6.0 / 10.0);
        assert_eq!(m.class_iou(1), Some(0.0));
        assert_eq!(m.class_iou(2), Some(0.0));
        assert_eq!(m.class_iou(3), None);
        assert_relative_eq!(m.miou().unwrap(), 0.2);
    }

    #[test]
    fn accumulate_skips_invalid_and_ignored_pixels() {
        let mut gt = LabelMap::from_classes(6, 1, vec![0, 0, 1, 14, 2, 2]);
        let mut pred = LabelMap::from_classes(6, 1, vec![0, 1, 1, 14, 2, 2]);
        gt.set_valid(4, 0, false); // invalid in gt only
        pred.set_valid(5, 0, false); // invalid in pred only

        let mut m = ConfusionMatrix::new();
        m.accumulate(&gt, &pred, ClassSet::reserved()).unwrap();

        // Scored: columns 0, 1, 2. Column 3 (gt class 14) is ignored,
        // columns 4 and 5 are invalid on one side.
        assert_eq!(m.total(), 3);
        assert_eq!(m.ignored(), 3);
        assert_eq!(m.count(0, 0), 1);
        assert_eq!(m.count(0, 1), 1);
        assert_eq!(m.count(1, 1), 1);
        assert_eq!(m.count(14, 14), 0);
    }

    #[test]
    fn out_of_range_classes_are_ignored_not_scored() {
        let gt = LabelMap::from_classes(2, 1, vec![20, 0]);
        let pred = LabelMap::from_classes(2, 1, vec![0, 20]);
        let mut m = ConfusionMatrix::new();
        m.accumulate(&gt, &pred, ClassSet::EMPTY).unwrap();
        assert_eq!(m.total(), 0);
        assert_eq!(m.ignored(), 2);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let gt = LabelMap::new(3, 2, 0);
        let pred = LabelMap::new(2, 3, 0);
        let mut m = ConfusionMatrix::new();
        assert!(matches!(
            m.accumulate(&gt, &pred, ClassSet::EMPTY),
            Err(MetricsError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn merge_equals_joint_accumulation() {
        let gt = LabelMap::from_classes(4, 2, vec![0, 1, 2, 3, 4, 5, 6, 7]);
        let pred = LabelMap::from_classes(4, 2, vec![0, 1, 1, 3, 3, 5, 6, 6]);
        let top_gt = gt.crop(0, 0, 4, 1);
        let top_pred = pred.crop(0, 0, 4, 1);
        let bottom_gt = gt.crop(0, 1, 4, 1);
        let bottom_pred = pred.crop(0, 1, 4, 1);

        let mut joint = ConfusionMatrix::new();
        joint.accumulate(&gt, &pred, ClassSet::EMPTY).unwrap();

        let mut merged = ConfusionMatrix::new();
        merged.accumulate(&top_gt, &top_pred, ClassSet::EMPTY).unwrap();
        let mut bottom = ConfusionMatrix::new();
        bottom
            .accumulate(&bottom_gt, &bottom_pred, ClassSet::EMPTY)
            .unwrap();
        merged.merge(&bottom);

        assert_eq!(merged, joint);
    }

    #[test]
    fn class_set_rejects_out_of_range_and_reports_members() {
        assert!(matches!(
            ClassSet::from_indices(&[0, 16]),
            Err(MetricsError::ClassOutOfRange(16))
        ));
        let set = ClassSet::from_indices(&[3, 7]).unwrap();
        assert!(set.contains(3) && set.contains(7));
        assert!(!set.contains(4));
        assert_eq!(set.indices(), vec![3, 7]);
        assert_eq!(ClassSet::reserved().indices(), vec![14, 15]);
    }

    #[test]
    fn weights_follow_median_over_nonzero_counts() {
        let mut counts = [0u64; CLASS_COUNT];
        counts[0] = 100;
        counts[1] = 400;
        counts[2] = 1600;
        let w = median_frequency_weights(&counts).unwrap();
        assert_relative_eq!(w[0], 4.0);
        assert_relative_eq!(w[1], 1.0);
        assert_relative_eq!(w[2], 0.25);
        assert_eq!(w[3], 0.0);
    }

    #[test]
    fn weights_for_uniform_counts_are_one() {
        let counts = [77u64; CLASS_COUNT];
        let w = median_frequency_weights(&counts).unwrap();
        assert!(w.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn even_sized_median_averages_the_middle_pair() {
        let mut counts = [0u64; CLASS_COUNT];
        counts[0] = 10;
        counts[1] = 20;
        counts[2] = 30;
        counts[3] = 40;
        let w = median_frequency_weights(&counts).unwrap();
        assert_relative_eq!(w[0], 2.5);
        assert_relative_eq!(w[1], 1.25);
        assert_relative_eq!(w[2], 25.0 / 30.0);
        assert_relative_eq!(w[3], 0.625);
    }

    #[test]
    fn all_zero_counts_have_no_weights() {
        assert!(matches!(
            median_frequency_weights(&[0; CLASS_COUNT]),
            Err(MetricsError::Empty)
        ));
    }

    #[test]
    fn report_lists_all_classes_with_nulls_for_absent_ones() {
        let m = matrix_from(&[(0, 0, 3), (0, 1, 1), (1, 0, 2), (1, 1, 4)]);
        let report = m.report(&Palette::default());
        assert_eq!(report.per_class.len(), CLASS_COUNT);
        assert_eq!(report.per_class[0].gt_pixels, 4);
        assert_eq!(report.per_class[0].name, "sky");
        assert_eq!(report.per_class[5].iou, None);

        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_relative_eq!(json["miou"].as_f64().unwrap(), 15.0 / 28.0);
        assert!(json["per_class"][5]["iou"].is_null());
        assert_eq!(json["per_class"][1]["gt_pixels"], 6);

        let csv = report.to_csv();
        assert!(csv.starts_with("index,name,iou,accuracy,gt_pixels\n"));
        assert_eq!(csv.lines().count(), CLASS_COUNT + 1);
    }

    /// Brute-force re-derivation of every metric straight from the
    /// definitions, for comparison against the incremental implementation.
    fn naive_metrics(
        gt: &LabelMap,
        pred: &LabelMap,
        ignore: &[u8],
    ) -> (Option<f64>, Option<f64>, u64) {
        let mut correct = 0u64;
        let mut scored = 0u64;
        let mut ious = Vec::new();
        for class in 0..CLASS_COUNT as u8 {
            let mut tp = 0u64;
            let mut in_gt = 0u64;
            let mut in_pred = 0u64;
            for y in 0..gt.height() {
                for x in 0..gt.width() {
                    if !gt.is_valid(x, y) || !pred.is_valid(x, y) {
                        continue;
                    }
                    let (g, p) = (gt.get(x, y), pred.get(x, y));
                    if usize::from(g) >= CLASS_COUNT
                        || usize::from(p) >= CLASS_COUNT
                        || ignore.contains(&g)
                    {
                        continue;
                    }
                    if class == 0 {
                        scored += 1;
                        if g == p {
                            correct += 1;
                        }
                    }
                    if g == class {
                        in_gt += 1;
                        if p == class {
                            tp += 1;
                        }
                    }
                    if p == class {
                        in_pred += 1;
                    }
                }
            }
            if in_gt + in_pred > 0 {
                ious.push(tp as f64 / (in_gt + in_pred - tp) as f64);
            }
        }
        let accuracy = (scored > 0).then(|| correct as f64 / scored as f64);
        let miou =
            (!ious.is_empty()).then(|| ious.iter().sum::<f64>() / ious.len() as f64);
        (accuracy, miou, scored)
    }

    proptest! {
        #[test]
        fn matches_naive_reference(
            w in 1usize..9,
            h in 1usize..9,
            seed in any::<u64>(),
        ) {
            // xorshift-style generator so the maps vary without pulling
            // randomness plumbing into the test body
            let mut state = seed | 1;
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state
            };
            let mut gt = LabelMap::new(w, h, 0);
            let mut pred = LabelMap::new(w, h, 0);
            for y in 0..h {
                for x in 0..w {
                    let r = next();
                    gt.set(x, y, (r % 18) as u8); // occasionally out of range
                    pred.set(x, y, ((r >> 8) % 18) as u8);
                    gt.set_valid(x, y, r & (1 << 20) == 0 || (x + y) % 3 != 0);
                    pred.set_valid(x, y, r & (1 << 21) == 0 || (x * y) % 5 != 1);
                }
            }
            let ignore = [14u8, 15];

            let mut m = ConfusionMatrix::new();
            m.accumulate(&gt, &pred, ClassSet::from_indices(&ignore).unwrap()).unwrap();

            let (accuracy, miou, scored) = naive_metrics(&gt, &pred, &ignore);
            prop_assert_eq!(m.total(), scored);
            prop_assert_eq!(m.pixel_accuracy(), accuracy);
            match (m.miou(), miou) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                (a, b) => prop_assert_eq!(a, b),
            }
        }

        #[test]
        fn metrics_stay_in_unit_interval(cells in proptest::collection::vec(
            (0u8..16, 0u8..16, 1u64..1000), 1..40,
        )) {
            let m = matrix_from(&cells);
            let acc = m.pixel_accuracy().unwrap();
            prop_assert!((0.0..=1.0).contains(&acc));
            let miou = m.miou().unwrap();
            prop_assert!((0.0..=1.0).contains(&miou));
            for c in 0..CLASS_COUNT as u8 {
                if let Some(iou) = m.class_iou(c) {
                    prop_assert!((0.0..=1.0).contains(&iou));
                }
            }
        }

        #[test]
        fn weights_scale_inversely_with_counts(counts in proptest::collection::vec(0u64..10_000, CLASS_COUNT)) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let counts: [u64; CLASS_COUNT] = counts.try_into().unwrap();
            let w = median_frequency_weights(&counts).unwrap();
            for c in 0..CLASS_COUNT {
                if counts[c] == 0 {
                    prop_assert_eq!(w[c], 0.0);
                } else {
                    prop_assert!(w[c] > 0.0);
                }
            }
            // Larger classes never get larger weights.
            for a in 0..CLASS_COUNT {
                for b in 0..CLASS_COUNT {
                    if counts[a] > 0 && counts[b] > 0 && counts[a] < counts[b] {
                        prop_assert!(w[a] >= w[b]);
                    }
                }
            }
        }
    }
}
