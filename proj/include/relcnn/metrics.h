#ifndef RELCNN_METRICS_H_
#define RELCNN_METRICS_H_

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "relcnn/corpus.h"
#include "json.hpp"

namespace relcnn {

struct ConfusionCounts {
  std::array<long, kNumClasses> tp{};
  std::array<long, kNumClasses> fp{};
  std::array<long, kNumClasses> fn{};
  std::array<long, kNumClasses> support{};  // gold count per class
  long total = 0;
};

// Counts per class over aligned label-id lists. A NoRelation confusion is a
// false positive or false negative of the relation class involved.
ConfusionCounts count_confusions(std::span<const int> gold,
                                 std::span<const int> predicted);

// Percentages in [0, 100].
struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
};

// Per-class figures for all six classes; the macro and micro averages cover
// the five relation classes only. Macro averages over classes present in the
// gold labels.
struct MetricsReport {
  std::array<ClassMetrics, kNumClasses> per_class{};
  ClassMetrics macro;
  ClassMetrics micro;
  int fold = -1;  // -1: mean over folds
  std::string config;
};

double f1_score(double precision, double recall);

MetricsReport compute_metrics(std::span<const int> gold,
                              std::span<const int> predicted);

// Arithmetic mean of every figure over the given reports.
MetricsReport average_reports(std::span<const MetricsReport> reports);

nlohmann::ordered_json report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

// "%.2f" rendering used by every table.
std::string format_percent(double value);

}  // namespace relcnn

#endif  // RELCNN_METRICS_H_
