#pragma once

#include <span>
#include <vector>

namespace handover::evaluation {

struct ConfusionCounts {
  long tp = 0, tn = 0, fp = 0, fn = 0;
  long total() const { return tp + tn + fp + fn; }
  double tpr() const;
  double fpr() const;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // scores >= threshold are called positive
};

/// Scores at or above the threshold are predicted positive.
ConfusionCounts confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold);

/// One point per distinct score, by descending threshold, from (0,0) at +inf to (1,1).
/// Throws NumericError when either class is absent.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

/// Probability that a random positive outranks a random negative, ties counted 1/2,
/// computed from average ranks. Throws NumericError when either class is absent.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area under a ROC curve.
double trapezoid_area(std::span<const RocPoint> curve);

}  // namespace handover::evaluation
