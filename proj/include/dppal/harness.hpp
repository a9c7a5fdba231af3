#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dppal/data.hpp"
#include "dppal/learner.hpp"
#include "dppal/strategies.hpp"

namespace dppal {

struct DatasetSpec {
  enum class Kind { sine, csv };
  Kind kind = Kind::sine;
  // sine: pool and test sets come from the same band with different seeds.
  SyntheticSineSpec sine;
  long test_n = 1000;
  // csv: one file, split into pool and test halves with split_seed.
  std::string path;
  std::string label_column = "label";
  bool normalize = true;
  std::uint64_t split_seed = 0;
};

struct ClassifierSpec {
  std::vector<int> hidden{4};
  TrainConfig train;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  StrategyConfig strategy;
  long budget = 150;   // K
  int batch_size = 15;  // k
  int replicates = 100;
  std::uint64_t base_seed = 0;
  ClassifierSpec classifier;
  std::string output;
  // Worker threads for replicates; 0 uses the hardware concurrency.
  int threads = 0;

  void validate() const;
};

// Default exponent for a strategy when the config leaves it unset: 5 for the
// passive DPP strategies, 4 otherwise.
double default_alpha(StrategyKind kind);

// Pool and held-out test set. `pool_rows` and `test_rows` identify each row
// in a shared numbering so disjointness can be asserted.
struct ExperimentData {
  Dataset pool;
  Dataset test;
  std::vector<int> pool_rows;
  std::vector<int> test_rows;
};
ExperimentData prepare_data(const DatasetSpec& spec);

struct IterationRecord {
  std::vector<int> batch;
  long labeled = 0;
  double accuracy = 0.0;
  double selection_seconds = 0.0;
  double training_seconds = 0.0;

  bool operator==(const IterationRecord&) const = default;
};

struct ExperimentRecord {
  std::string strategy;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::vector<IterationRecord> iterations;
  double final_accuracy = 0.0;

  bool operator==(const ExperimentRecord&) const = default;
  // Equality ignoring wall-clock fields.
  bool same_outcome(const ExperimentRecord& other) const;
};

// Cold-start active learning loop, one record per replicate. Replicate r
// uses seed base_seed + r. Results do not depend on the thread count.
std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg);
std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg, const ExperimentData& data);
ExperimentRecord run_replicate(const ExperimentConfig& cfg, const ExperimentData& data, int replicate);

struct WelchResult {
  double t;
  double p;  // two-sided
  double dof;
};
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct SampleStats {
  double mean;
  double stddev;  // sample standard deviation (n - 1)
  std::size_t n;
};
SampleStats sample_stats(const std::vector<double>& x);

std::vector<double> final_accuracies(const std::vector<ExperimentRecord>& records);

struct StrategySummary {
  std::string strategy;
  SampleStats accuracy;
};
struct PairwiseTest {
  std::string a;
  std::string b;
  WelchResult test;
};
struct ComparisonSummary {
  std::vector<StrategySummary> strategies;
  std::vector<PairwiseTest> pairs;
};
// Records grouped by strategy name (in first-seen order), with a Welch test
// for every pair.
ComparisonSummary summarize(const std::vector<ExperimentRecord>& records);
void write_summary_table(const ComparisonSummary& s, std::ostream& out);
// One row per (strategy, replicate, iteration): strategy,replicate,labeled,accuracy.
void write_curve_csv(const std::vector<ExperimentRecord>& records, std::ostream& out);

struct GammaRow {
  double gamma;
  SampleStats accuracy;
};
struct TuneResult {
  double best_gamma;
  std::vector<GammaRow> grid;
};
// Grid search over gamma on fake labels (sine fake labels for 2-D data,
// nearest-centroid labels otherwise); the fake-labeled pool is split into
// halves for training and evaluation. Ties go to the smaller gamma.
TuneResult tune_gamma(const ExperimentConfig& base, const std::vector<double>& grid, int replicates,
                      std::uint64_t seed);
std::vector<double> default_gamma_grid();

struct ModeCompareInstance {
  double greedy_log_det;
  double mcr_log_det;
};
struct ModeCompareSummary {
  std::vector<ModeCompareInstance> instances;
  double mcr_strictly_better;  // fractions of instances
  double mcr_better_or_equal;
};
// Instance i: point_count uniform points in [0,1]^2 from seed + i, Gaussian
// kernel with `sigma`, greedy and mcr modes of size k.
ModeCompareSummary mode_compare(int n_instances, int point_count, double sigma, int k,
                                std::uint64_t seed, int threads = 0);

// Line-delimited JSON, one record per line.
std::string record_to_json(const ExperimentRecord& r);
ExperimentRecord record_from_json(const std::string& line);
void write_records(const std::vector<ExperimentRecord>& records, std::ostream& out);
std::vector<ExperimentRecord> read_records(std::istream& in);

// Config documents mirror ExperimentConfig; unknown keys are a ConfigError.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

}  // namespace dppal
