#include "dppal/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "dppal/errors.hpp"

namespace dppal {

namespace {

using Rng = std::mt19937_64;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string Dataset::label_name(int cls) const {
  if (cls >= 0 && static_cast<std::size_t>(cls) < label_names.size()) return label_names[cls];
  return std::to_string(cls);
}

void Dataset::validate() const {
  if (features.rows() < 1) throw InputError("dataset is empty");
  if (!features.allFinite()) throw InputError("dataset features must be finite");
  if (has_labels()) {
    if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
      throw InputError("label count does not match feature rows");
    }
    for (int y : labels) {
      if (y < 0 || y >= classes) throw InputError("label outside [0, C)");
    }
  }
}

Dataset Dataset::rows(std::span<const int> idx) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= features.rows()) throw InputError("row index out of range");
    out.features.row(r) = features.row(idx[r]);
    if (has_labels()) out.labels.push_back(labels[idx[r]]);
  }
  out.classes = classes;
  out.name = name;
  out.label_names = label_names;
  return out;
}

int SineBand::label(double x, double y) const {
  const double mid = center + amplitude * std::sin(2.0 * std::numbers::pi * frequency * x + phase);
  return std::abs(y - mid) <= halfwidth ? 1 : 0;
}

Dataset generate_sine_dataset(const SyntheticSineSpec& spec) {
  if (spec.n < 1) throw ParameterError("sample count must be >= 1");
  if (!(spec.band.halfwidth > 0.0)) throw ParameterError("band half-width must be positive");
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Dataset ds;
  ds.name = "sine";
  ds.classes = 2;
  ds.features.resize(spec.n, 2);
  ds.labels.resize(spec.n);
  for (long i = 0; i < spec.n; ++i) {
    const double x = unif(rng);
    const double y = unif(rng);
    ds.features(i, 0) = x;
    ds.features(i, 1) = y;
    ds.labels[i] = spec.band.label(x, y);
  }
  return ds;
}

Matrix minmax_normalize(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double lo = x.col(c).minCoeff();
    const double hi = x.col(c).maxCoeff();
    if (hi > lo) {
      out.col(c) = (x.col(c).array() - lo) / (hi - lo);
    } else {
      out.col(c).setZero();
    }
  }
  return out;
}

Dataset parse_csv(std::istream& in, const std::string& label_column, bool normalize,
                  const std::string& name) {
  std::string line;
  long line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw ParseError("csv: missing header row");

  int label_idx = -1;
  if (!label_column.empty()) {
    const auto it = std::find(header.begin(), header.end(), label_column);
    if (it == header.end()) {
      throw ParseError("csv line " + std::to_string(line_no) + ": no column named '" +
                       label_column + "'");
    }
    label_idx = static_cast<int>(it - header.begin());
  }
  const int width = static_cast<int>(header.size());
  const int dim = width - (label_idx >= 0 ? 1 : 0);
  if (dim < 1) throw ParseError("csv: no feature columns");

  std::vector<double> values;
  std::vector<int> labels;
  std::map<std::string, int> label_ids;
  std::vector<std::string> label_names;
  long rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) != width) {
      throw ParseError("csv line " + std::to_string(line_no) + ": expected " +
                       std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    }
    for (int c = 0; c < width; ++c) {
      if (c == label_idx) {
        if (fields[c].empty()) {
          throw ParseError("csv line " + std::to_string(line_no) + ": empty label");
        }
        auto [it, inserted] = label_ids.emplace(fields[c], static_cast<int>(label_ids.size()));
        if (inserted) label_names.push_back(fields[c]);
        labels.push_back(it->second);
        continue;
      }
      const std::string& f = fields[c];
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size() ||
          !std::isfinite(v)) {
        throw ParseError("csv line " + std::to_string(line_no) + ", column '" + header[c] +
                         "': not a finite number: '" + f + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("csv: no data rows");

  Dataset ds;
  ds.name = name;
  ds.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>(values.data(), rows, dim);
  if (normalize) ds.features = minmax_normalize(ds.features);
  ds.labels = std::move(labels);
  ds.classes = static_cast<int>(label_names.size());
  ds.label_names = std::move(label_names);
  return ds;
}

Dataset load_csv(const std::string& path, const std::string& label_column, bool normalize) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return parse_csv(in, label_column, normalize, path);
}

void write_csv(const Dataset& ds, std::ostream& out, const std::string& label_column) {
  for (Eigen::Index c = 0; c < ds.dim(); ++c) out << (c ? "," : "") << 'x' << c;
  if (ds.has_labels()) out << ',' << label_column;
  out << '\n';
  for (Eigen::Index r = 0; r < ds.size(); ++r) {
    for (Eigen::Index c = 0; c < ds.dim(); ++c) {
      out << (c ? "," : "") << format_double(ds.features(r, c));
    }
    if (ds.has_labels()) out << ',' << ds.label_name(ds.labels[r]);
    out << '\n';
  }
}

void save_csv(const Dataset& ds, const std::string& path, const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_csv(ds, out, label_column);
  if (!out) throw InputError("write to '" + path + "' failed");
}

std::pair<Dataset, Dataset> split_halves(const Dataset& ds, std::uint64_t seed) {
  if (ds.size() < 2) throw InputError("need at least two rows to split");
  std::vector<int> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto half = static_cast<std::ptrdiff_t>((idx.size() + 1) / 2);
  std::vector<int> first(idx.begin(), idx.begin() + half);
  std::vector<int> second(idx.begin() + half, idx.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {ds.rows(first), ds.rows(second)};
}

std::vector<int> fake_labels_centroid(const Matrix& features, int classes, double min_fraction,
                                      std::uint64_t seed) {
  const Eigen::Index n = features.rows();
  if (classes < 1) throw ParameterError("class count must be >= 1");
  if (n < classes) throw InputError("need at least as many samples as classes");
  if (!(min_fraction >= 0.0) || min_fraction * classes > 1.0) {
    throw ParameterError("min_fraction must lie in [0, 1/C]");
  }
  const long needed = static_cast<long>(std::ceil(min_fraction * n - 1e-9));
  constexpr int kMaxAttempts = 1000;

  Rng rng(seed);
  std::vector<int> labels(n);
  std::vector<int> pool(n);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<int> centroids;
    std::sample(pool.begin(), pool.end(), std::back_inserter(centroids), classes, rng);
    std::shuffle(centroids.begin(), centroids.end(), rng);

    std::vector<long> counts(classes, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (features.row(i) - features.row(centroids[0])).squaredNorm();
      for (int c = 1; c < classes; ++c) {
        const double d = (features.row(i) - features.row(centroids[c])).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      labels[i] = best;
      ++counts[best];
    }
    if (*std::min_element(counts.begin(), counts.end()) >= needed) return labels;
  }
  throw BudgetError("no centroid draw gave every class " + std::to_string(needed) +
                    " samples in 1000 attempts; try a smaller min_fraction");
}

SineBand fake_sine_band() {
  SineBand band;
  band.amplitude = 0.3;
  band.frequency = 0.75;
  band.phase = std::numbers::pi / 3.0;
  band.center = 0.45;
  band.halfwidth = 0.2;
  return band;
}

std::vector<int> fake_labels_sine(const Matrix& features) {
  if (features.cols() != 2) throw InputError("sine fake labels need 2-D features");
  const SineBand band = fake_sine_band();
  std::vector<int> labels(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    labels[i] = band.label(features(i, 0), features(i, 1));
  }
  return labels;
}

}  // namespace dppal
