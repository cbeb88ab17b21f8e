#include "pulearn/metrics.hpp"

#include <cmath>

#include "pulearn/error.hpp"

namespace pulearn {
namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Metrics m{tp, fp, fn, tn};
  m.precision = ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
  m.recall = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  m.oa = ratio(static_cast<double>(tp + tn), static_cast<double>(tp + fp + fn + tn));
  return m;
}

Metrics confusion(std::span<const std::uint8_t> preds, std::span<const std::uint8_t> labels) {
  if (preds.size() != labels.size()) throw InvalidInput("confusion: preds and labels differ in length");
  if (preds.empty()) throw InvalidInput("confusion: empty input");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] != 0;
    const bool y = labels[i] != 0;
    if (p && y) ++tp;
    else if (p) ++fp;
    else if (y) ++fn;
    else ++tn;
  }
  return from_counts(tp, fp, fn, tn);
}

double macro_f1(std::span<const double> per_class_f1) {
  if (per_class_f1.empty()) throw InvalidInput("macro_f1: empty input");
  double acc = 0.0;
  for (double v : per_class_f1) acc += v;
  return acc / static_cast<double>(per_class_f1.size());
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("mean_std: empty input");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace pulearn
