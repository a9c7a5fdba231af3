#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dppal/linalg.hpp"

namespace dppal {

struct Dataset {
  Matrix features;          // N x d
  std::vector<int> labels;  // empty for an unlabeled pool
  int classes = 0;
  std::string name;
  // Original spelling of each dense class id; empty means "0", "1", ...
  std::vector<std::string> label_names;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
  bool has_labels() const { return !labels.empty(); }
  std::string label_name(int cls) const;

  // Throws InputError when features are non-finite or labels out of range.
  void validate() const;
  Dataset rows(std::span<const int> idx) const;
};

// Label-1 region is the band |y - center - amplitude sin(2 pi frequency x + phase)| <= halfwidth.
struct SineBand {
  double amplitude = 0.25;
  double frequency = 1.5;
  double halfwidth = 0.15;
  double center = 0.5;
  double phase = 0.0;

  int label(double x, double y) const;
};

struct SyntheticSineSpec {
  long n = 1000;
  SineBand band;
  std::uint64_t seed = 0;
};

// Uniform points in the unit square labelled by the sine band.
Dataset generate_sine_dataset(const SyntheticSineSpec& spec);

// Each column scaled to [0, 1]; constant columns become 0.
Matrix minmax_normalize(const Matrix& x);

// Comma-separated, header row, no quoting. `label_column` may be empty for an
// unlabeled pool. Labels are re-indexed densely in order of first appearance.
Dataset load_csv(const std::string& path, const std::string& label_column, bool normalize);
Dataset parse_csv(std::istream& in, const std::string& label_column, bool normalize,
                  const std::string& name = "csv");
// Columns x0..x{d-1} plus `label_column` when the dataset has labels.
void write_csv(const Dataset& ds, std::ostream& out, const std::string& label_column = "label");
void save_csv(const Dataset& ds, const std::string& path, const std::string& label_column = "label");

// Random disjoint halves of sizes ceil(N/2) and floor(N/2).
std::pair<Dataset, Dataset> split_halves(const Dataset& ds, std::uint64_t seed);

// Nearest-centroid labels from C random samples, redrawn until every class
// holds at least ceil(min_fraction N) samples (at most 1000 attempts).
std::vector<int> fake_labels_centroid(const Matrix& features, int classes, double min_fraction,
                                      std::uint64_t seed);
inline std::vector<int> fake_labels_centroid(const Matrix& features, int classes,
                                             std::uint64_t seed) {
  return fake_labels_centroid(features, classes, 2.0 / (3.0 * classes), seed);
}

// Band used for fake labels on 2-D data: a different shape from the default
// SineBand, so tuning never sees the true boundary.
SineBand fake_sine_band();
std::vector<int> fake_labels_sine(const Matrix& features);

}  // namespace dppal
