#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pulearn {

/// Feature matrix plus PU split. hidden_labels (1 = positive, 0 = negative) are
/// for evaluation only; training sees positive_idx and unlabeled_idx.
struct PuDataset {
  Eigen::MatrixXd features;  // N x d
  std::vector<std::uint8_t> hidden_labels;
  std::vector<std::size_t> positive_idx;   // labeled positives
  std::vector<std::size_t> unlabeled_idx;
  std::optional<double> gen_class_prior;   // metadata only, never consumed by a loss
  std::string name;

  std::size_t size() const { return hidden_labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  /// Rows whose labels were never shown to training (all rows outside positive_idx).
  std::vector<std::size_t> held_out_idx() const;
};

/// Throws InvalidInput if masks overlap, leave [0, N), or label a hidden negative.
void validate(const PuDataset& data);

/// Draws `n_labeled` hidden positives uniformly into positive_idx; every other
/// row goes to unlabeled_idx, optionally subsampled to `unlabeled_cap`.
void assign_pu_split(PuDataset& data, std::size_t n_labeled, std::uint64_t seed,
                     std::optional<std::size_t> unlabeled_cap = std::nullopt);

/// Per-column z-score. Constant columns are centred only.
void standardize_columns(Eigen::MatrixXd& x);

struct GaussianParams {
  std::size_t n = 2000;
  double prior = 0.3;
  double separation = 4.0;
  std::size_t n_labeled = 40;
  std::uint64_t seed = 0;
  bool standardize = false;
  std::optional<std::size_t> unlabeled_cap;
};

/// Two unit-variance isotropic blobs in 2-D, centres `separation` apart on the
/// first axis; each row is positive with probability `prior`.
PuDataset make_gaussians(const GaussianParams& p);

struct MoonsParams {
  std::size_t n = 400;
  double noise = 0.1;
  std::size_t n_labeled = 40;
  std::uint64_t seed = 0;
  bool standardize = false;
  std::optional<std::size_t> unlabeled_cap;
};

/// Interleaved half circles; the upper (outer) moon holds the n/2 positives.
PuDataset make_two_moons(const MoonsParams& p);

struct CsvOptions {
  std::string label_column = "label";
  std::string positive_value = "1";
  std::size_t n_labeled = 40;
  std::uint64_t seed = 0;
  bool standardize = false;
  std::optional<std::size_t> unlabeled_cap;
};

/// Header row required; every non-label column must be numeric. Errors name
/// the offending row (1-based, header = row 1) and column.
PuDataset load_csv(const std::filesystem::path& path, const CsvOptions& opts);
PuDataset read_csv(std::istream& in, const CsvOptions& opts, const std::string& name = "csv");

/// Columns x0..x{d-1},label with 17 significant digits; label is 1 or 0.
void write_csv(std::ostream& out, const PuDataset& data);

}  // namespace pulearn
