#include "relcnn/metrics.h"

#include <cstdio>
#include <stdexcept>

namespace relcnn {

namespace {

double ratio(long num, long den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / den;
}

nlohmann::ordered_json class_json(const ClassMetrics& m) {
  nlohmann::ordered_json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["support"] = m.support;
  return j;
}

ClassMetrics class_from_json(const nlohmann::json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(),
          j.at("f1").get<double>(), j.at("support").get<long>()};
}

}  // namespace

ConfusionCounts count_confusions(std::span<const int> gold,
                                 std::span<const int> predicted) {
  if (gold.size() != predicted.size()) {
    throw std::invalid_argument("gold and predicted label lists differ in length");
  }
  ConfusionCounts c;
  c.total = static_cast<long>(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const int g = gold[i], p = predicted[i];
    if (g < 0 || g >= kNumClasses || p < 0 || p >= kNumClasses) {
      throw std::out_of_range("label id outside the class range");
    }
    ++c.support[g];
    if (g == p) {
      ++c.tp[g];
    } else {
      ++c.fp[p];
      ++c.fn[g];
    }
  }
  return c;
}

double f1_score(double precision, double recall) {
  return precision + recall > 0.0
             ? 2.0 * precision * recall / (precision + recall)
             : 0.0;
}

MetricsReport compute_metrics(std::span<const int> gold,
                              std::span<const int> predicted) {
  const ConfusionCounts c = count_confusions(gold, predicted);
  MetricsReport r;
  long tp = 0, fp = 0, fn = 0;
  int present = 0;
  double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0;
  for (int k = 0; k < kNumClasses; ++k) {
    ClassMetrics& m = r.per_class[k];
    m.precision = ratio(c.tp[k], c.tp[k] + c.fp[k]);
    m.recall = ratio(c.tp[k], c.tp[k] + c.fn[k]);
    m.f1 = f1_score(m.precision, m.recall);
    m.support = c.support[k];
    if (k == kNoRelationId) continue;
    tp += c.tp[k];
    fp += c.fp[k];
    fn += c.fn[k];
    r.micro.support += c.support[k];
    if (c.support[k] > 0) {
      ++present;
      sum_p += m.precision;
      sum_r += m.recall;
      sum_f += m.f1;
    }
  }
  if (present > 0) {
    r.macro.precision = sum_p / present;
    r.macro.recall = sum_r / present;
    r.macro.f1 = sum_f / present;
  }
  r.macro.support = r.micro.support;
  r.micro.precision = ratio(tp, tp + fp);
  r.micro.recall = ratio(tp, tp + fn);
  r.micro.f1 = f1_score(r.micro.precision, r.micro.recall);
  return r;
}

MetricsReport average_reports(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw std::invalid_argument("no reports to average");
  MetricsReport avg;
  avg.config = reports.front().config;
  const double n = static_cast<double>(reports.size());
  // Sum first, divide once, so the mean is exactly sum / n.
  std::array<ClassMetrics, kNumClasses> sums{};
  ClassMetrics macro_sum, micro_sum;
  auto add = [](ClassMetrics& dst, const ClassMetrics& src) {
    dst.precision += src.precision;
    dst.recall += src.recall;
    dst.f1 += src.f1;
    dst.support += src.support;
  };
  for (const auto& r : reports) {
    for (int k = 0; k < kNumClasses; ++k) add(sums[k], r.per_class[k]);
    add(macro_sum, r.macro);
    add(micro_sum, r.micro);
  }
  auto mean = [n](const ClassMetrics& s) {
    return ClassMetrics{s.precision / n, s.recall / n, s.f1 / n, s.support};
  };
  for (int k = 0; k < kNumClasses; ++k) avg.per_class[k] = mean(sums[k]);
  avg.macro = mean(macro_sum);
  avg.micro = mean(micro_sum);
  return avg;
}

nlohmann::ordered_json report_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["config"] = report.config;
  j["fold"] = report.fold;
  nlohmann::ordered_json classes;
  for (int k = 0; k < kNumClasses; ++k) {
    classes[std::string(label_name(label_from_id(k)))] =
        class_json(report.per_class[k]);
  }
  j["classes"] = std::move(classes);
  j["macro"] = class_json(report.macro);
  j["micro"] = class_json(report.micro);
  return j;
}

MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.config = j.at("config").get<std::string>();
  r.fold = j.at("fold").get<int>();
  for (int k = 0; k < kNumClasses; ++k) {
    r.per_class[k] = class_from_json(
        j.at("classes").at(std::string(label_name(label_from_id(k)))));
  }
  r.macro = class_from_json(j.at("macro"));
  r.micro = class_from_json(j.at("micro"));
  return r;
}

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

}  // namespace relcnn
