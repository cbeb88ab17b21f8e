#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace pulearn {

/// Binary confusion counts with the positive class = 1. Ratios whose
/// denominator is zero are reported as 0.
struct Metrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double oa = 0.0;
};

Metrics confusion(std::span<const std::uint8_t> preds, std::span<const std::uint8_t> labels);

/// Metrics straight from counts (used by confusion()).
Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);

double macro_f1(std::span<const double> per_class_f1);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Sample standard deviation (n - 1 denominator); a single value has std 0.
MeanStd mean_std(std::span<const double> values);

}  // namespace pulearn
