#pragma once
// Synthetic two-sample scenarios, ROC / power evaluation of two-sample
// statistics, and delimiter-separated file ingestion. The user-facing
// support layer around the inference engine.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coopt/baselines.hpp"
#include "coopt/coopt.hpp"
#include "coopt/random.hpp"
#include "coopt/space.hpp"

namespace coopt {

struct ScenarioSpec {
  std::string name;
  SpaceKind kind = SpaceKind::kRectangle;
  int dims = 1;             // table scenarios accept an override (>= 10)
  int default_n1 = 0, default_n2 = 0;
  std::string description;
};

const std::vector<ScenarioSpec>& scenarios();
const ScenarioSpec& scenario_by_name(const std::string& name);

// Draws the two samples of a named scenario. The null variant draws both
// samples from the scenario's sample-1 law. Rectangle scenarios get bounds
// spanning the pooled observed range; table scenarios use table_dims
// coordinates (default 15, at least 10 because the response rule references
// coordinates 3, 7, 10).
std::pair<Dataset, Dataset> generate_scenario(const std::string& name, int n1, int n2,
                                              RandomStream& rng, bool null_variant = false,
                                              int table_dims = 0);

// A named statistic over dataset pairs plus the direction in which it
// signals a distributional difference.
struct TwoSampleStatistic {
  std::string name;
  bool higher_means_different = true;
  std::function<double(const Dataset&, const Dataset&)> eval;
};

// "coopt" (coupling statistic, low = different), "ks" (1-d rectangles),
// "epsilon" (binary tables, low = different).
TwoSampleStatistic make_statistic(const std::string& name, const CooptParams& params,
                                  const EpsilonGibbsConfig& gibbs);

struct RocResult {
  std::string statistic;
  std::vector<double> null_values, alt_values;       // raw statistic values
  std::vector<std::pair<double, double>> points;     // (fpr, tpr) steps
  double auc = 0.0;
};

RocResult roc(const TwoSampleStatistic& stat, const std::string& scenario, int n1, int n2,
              int reps, RandomStream rng, int table_dims = 0);

// Power at a level: the critical value is the (1 - level) empirical quantile
// of the null statistic values; power is the alternative fraction beyond it.
double power_at_level(const TwoSampleStatistic& stat, const std::string& scenario, int n1,
                      int n2, double level, int reps, RandomStream rng, int table_dims = 0);

struct IngestOptions {
  SpaceKind mode = SpaceKind::kRectangle;
  // Explicit rectangle bounds lo1,hi1,lo2,hi2,...; default spans the pooled
  // observed range.
  std::optional<std::vector<double>> bounds;
};

std::pair<Dataset, Dataset> ingest_pair(const std::string& path1, const std::string& path2,
                                        const IngestOptions& opt);
// One file with a group column of exactly two labels; the lexicographically
// smaller label becomes sample 1.
std::pair<Dataset, Dataset> ingest_grouped(const std::string& path,
                                           const std::string& group_column,
                                           const IngestOptions& opt);
Dataset ingest_single(const std::string& path, const IngestOptions& opt);

void write_sample(const std::string& path, const Dataset& data);

// Grid base measure from a text file: a "depth D" header line, then rows of
// per-coordinate cell indices (0-based at depth D) followed by a weight.
BaseMeasure grid_base_from_file(const std::string& path, int dims);

}  // namespace coopt
