#include "pulearn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pulearn/error.hpp"
#include "pulearn/seeding.hpp"

namespace pulearn {
namespace {

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

void finish(PuDataset& data, bool standardize, std::size_t n_labeled, std::uint64_t seed,
            std::optional<std::size_t> cap) {
  if (standardize) standardize_columns(data.features);
  assign_pu_split(data, n_labeled, seed, cap);
  validate(data);
}

}  // namespace

std::vector<std::size_t> PuDataset::held_out_idx() const {
  std::vector<std::uint8_t> labeled(size(), 0);
  for (auto i : positive_idx) labeled[i] = 1;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!labeled[i]) out.push_back(i);
  }
  return out;
}

void validate(const PuDataset& data) {
  const std::size_t n = data.size();
  if (static_cast<std::size_t>(data.features.rows()) != n) {
    throw InvalidInput("dataset: feature rows do not match label count");
  }
  std::vector<std::uint8_t> seen(n, 0);
  for (auto i : data.positive_idx) {
    if (i >= n) throw InvalidInput("dataset: positive index out of range");
    if (data.hidden_labels[i] != 1) throw InvalidInput("dataset: labeled positive " + std::to_string(i) + " is a hidden negative");
    if (seen[i]) throw InvalidInput("dataset: duplicate positive index " + std::to_string(i));
    seen[i] = 1;
  }
  for (auto i : data.unlabeled_idx) {
    if (i >= n) throw InvalidInput("dataset: unlabeled index out of range");
    if (seen[i]) throw InvalidInput("dataset: index " + std::to_string(i) + " is in both masks or repeated");
    seen[i] = 1;
  }
}

void assign_pu_split(PuDataset& data, std::size_t n_labeled, std::uint64_t seed, std::optional<std::size_t> cap) {
  std::vector<std::size_t> hidden_pos;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.hidden_labels[i] == 1) hidden_pos.push_back(i);
  }
  if (n_labeled == 0) throw InvalidInput("n_labeled must be at least 1");
  if (n_labeled > hidden_pos.size()) {
    throw InvalidInput("n_labeled (" + std::to_string(n_labeled) + ") exceeds the number of positives (" +
                       std::to_string(hidden_pos.size()) + ")");
  }
  Rng rng = make_rng(seed);
  std::shuffle(hidden_pos.begin(), hidden_pos.end(), rng);
  data.positive_idx.assign(hidden_pos.begin(), hidden_pos.begin() + static_cast<std::ptrdiff_t>(n_labeled));
  std::sort(data.positive_idx.begin(), data.positive_idx.end());

  data.unlabeled_idx = data.held_out_idx();
  if (cap && *cap < data.unlabeled_idx.size()) {
    std::shuffle(data.unlabeled_idx.begin(), data.unlabeled_idx.end(), rng);
    data.unlabeled_idx.resize(*cap);
    std::sort(data.unlabeled_idx.begin(), data.unlabeled_idx.end());
  }
}

void standardize_columns(Eigen::MatrixXd& x) {
  if (x.rows() == 0) return;
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    auto col = x.col(c);
    const double mean = col.sum() / n;
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (sd > 0.0) col /= sd;
  }
}

PuDataset make_gaussians(const GaussianParams& p) {
  if (!(p.prior > 0.0 && p.prior < 1.0)) throw InvalidInput("make_gaussians: prior must lie in (0,1)");
  if (p.n == 0) throw InvalidInput("make_gaussians: n must be positive");
  if (static_cast<double>(p.n_labeled) > p.prior * static_cast<double>(p.n)) {
    throw InvalidInput("make_gaussians: n_labeled (" + std::to_string(p.n_labeled) + ") must not exceed prior*n (" +
                       std::to_string(p.prior * static_cast<double>(p.n)) + ")");
  }
  Rng rng = make_rng(derive_seed(p.seed, "gaussians"));
  std::bernoulli_distribution is_positive(p.prior);
  std::normal_distribution<double> noise(0.0, 1.0);

  PuDataset data;
  data.name = "gaussians";
  data.gen_class_prior = p.prior;
  data.features.resize(static_cast<Eigen::Index>(p.n), 2);
  data.hidden_labels.resize(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    const bool pos = is_positive(rng);
    const auto row = static_cast<Eigen::Index>(i);
    data.hidden_labels[i] = pos ? 1 : 0;
    data.features(row, 0) = (pos ? 0.5 : -0.5) * p.separation + noise(rng);
    data.features(row, 1) = noise(rng);
  }
  finish(data, p.standardize, p.n_labeled, derive_seed(p.seed, "pu-split"), p.unlabeled_cap);
  return data;
}

PuDataset make_two_moons(const MoonsParams& p) {
  if (p.n < 2) throw InvalidInput("make_two_moons: n must be at least 2");
  if (!(p.noise >= 0.0)) throw InvalidInput("make_two_moons: noise must be non-negative");
  const std::size_t n_pos = p.n / 2;
  const std::size_t n_neg = p.n - n_pos;
  if (p.n_labeled > n_pos) {
    throw InvalidInput("make_two_moons: n_labeled (" + std::to_string(p.n_labeled) + ") exceeds the " +
                       std::to_string(n_pos) + " positives");
  }
  Rng rng = make_rng(derive_seed(p.seed, "moons"));
  std::normal_distribution<double> jitter(0.0, 1.0);

  PuDataset data;
  data.name = "moons";
  data.gen_class_prior = static_cast<double>(n_pos) / static_cast<double>(p.n);
  data.features.resize(static_cast<Eigen::Index>(p.n), 2);
  data.hidden_labels.resize(p.n);
  const auto angle = [](std::size_t i, std::size_t count) {
    return count > 1 ? std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1) : 0.0;
  };
  for (std::size_t i = 0; i < p.n; ++i) {
    const bool pos = i < n_pos;
    const double t = pos ? angle(i, n_pos) : angle(i - n_pos, n_neg);
    const auto row = static_cast<Eigen::Index>(i);
    data.hidden_labels[i] = pos ? 1 : 0;
    data.features(row, 0) = pos ? std::cos(t) : 1.0 - std::cos(t);
    data.features(row, 1) = pos ? std::sin(t) : 0.5 - std::sin(t);
    if (p.noise > 0.0) {
      data.features(row, 0) += p.noise * jitter(rng);
      data.features(row, 1) += p.noise * jitter(rng);
    }
  }
  finish(data, p.standardize, p.n_labeled, derive_seed(p.seed, "pu-split"), p.unlabeled_cap);
  return data;
}

PuDataset read_csv(std::istream& in, const CsvOptions& opts, const std::string& name) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw ParseError("csv: empty file", 1);
  std::vector<std::string> header;
  for (auto cell : split_commas(line)) header.emplace_back(cell);
  const auto label_it = std::find(header.begin(), header.end(), opts.label_column);
  if (label_it == header.end()) throw ParseError("csv: missing label column '" + opts.label_column + "'", 1);
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t n_cols = header.size();
  if (n_cols < 2) throw ParseError("csv: need at least one feature column besides the label", 1);

  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != n_cols) {
      throw ParseError("csv: row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(n_cols),
                       row);
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (c == label_col) {
        labels.push_back(cells[c] == opts.positive_value ? 1 : 0);
        continue;
      }
      double v = 0.0;
      const auto cell = cells[c];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v)) {
        throw ParseError("csv: row " + std::to_string(row) + ", column '" + header[c] +
                             "': not a finite number: '" + std::string(cell) + "'",
                         row, c + 1);
      }
      values.push_back(v);
    }
  }
  if (labels.empty()) throw ParseError("csv: no data rows", 2);

  PuDataset data;
  data.name = name;
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto d = static_cast<Eigen::Index>(n_cols - 1);
  data.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, d);
  data.hidden_labels = std::move(labels);
  finish(data, opts.standardize, opts.n_labeled, opts.seed, opts.unlabeled_cap);
  return data;
}

PuDataset load_csv(const std::filesystem::path& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ParseError("csv: cannot open '" + path.string() + "'");
  return read_csv(in, opts, path.stem().string());
}

void write_csv(std::ostream& out, const PuDataset& data) {
  for (std::size_t c = 0; c < data.dim(); ++c) out << 'x' << c << ',';
  out << "label\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index c = 0; c < data.features.cols(); ++c) out << data.features(row, c) << ',';
    out << static_cast<int>(data.hidden_labels[i]) << '\n';
  }
}

}  // namespace pulearn
