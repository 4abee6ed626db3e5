#include "coopt/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "coopt/errors.hpp"

namespace coopt {

namespace {

double draw_beta(RandomStream& rng, double a, double b) {
  const double ga = rng.gamma(a);
  const double gb = rng.gamma(b);
  const double t = ga + gb;
  return t > 0.0 ? ga / t : 0.5;
}

// Appends one observation of the given law to `out`.
using PointGen = void (*)(RandomStream&, std::vector<double>&);

void gen_beta46(RandomStream& r, std::vector<double>& o) { o.push_back(draw_beta(r, 4, 6)); }
void gen_beta46_shift(RandomStream& r, std::vector<double>& o) {
  o.push_back(0.2 + draw_beta(r, 4, 6));
}
void gen_uniform01(RandomStream& r, std::vector<double>& o) { o.push_back(r.uniform()); }
void gen_beta_mix(RandomStream& r, std::vector<double>& o) {
  o.push_back(sample_bernoulli(0.5, r) ? draw_beta(r, 20, 10) : draw_beta(r, 10, 20));
}
void gen_normal1(RandomStream& r, std::vector<double>& o) { o.push_back(r.normal()); }
void gen_normal_sd2(RandomStream& r, std::vector<double>& o) { o.push_back(2.0 * r.normal()); }
void gen_beta25(RandomStream& r, std::vector<double>& o) { o.push_back(draw_beta(r, 2, 5)); }
void gen_beta2015(RandomStream& r, std::vector<double>& o) { o.push_back(draw_beta(r, 20, 15)); }

void gen_bn(RandomStream& r, std::vector<double>& o, double mx, double my, double sd) {
  o.push_back(mx + sd * r.normal());
  o.push_back(my + sd * r.normal());
}

void gen_2d_loc_1(RandomStream& r, std::vector<double>& o) { gen_bn(r, o, 1, 0, 2); }
void gen_2d_loc_2(RandomStream& r, std::vector<double>& o) { gen_bn(r, o, 0, 1, 2); }
void gen_2d_subset_1(RandomStream& r, std::vector<double>& o) { gen_bn(r, o, 0, 0, 0.3); }
void gen_2d_subset_2(RandomStream& r, std::vector<double>& o) {
  if (r.uniform() < 0.2)
    gen_bn(r, o, 0.5, 0.5, 0.3);
  else
    gen_bn(r, o, 0, 0, 0.3);
}
void gen_2d_disp_1(RandomStream& r, std::vector<double>& o) { gen_bn(r, o, 0, 0, 1); }
void gen_2d_disp_2(RandomStream& r, std::vector<double>& o) { gen_bn(r, o, 0, 0, 0.5); }
void gen_2d_local_1(RandomStream& r, std::vector<double>& o) {
  // Correlated pair, unit variances, covariance 0.25.
  const double z1 = r.normal();
  const double z2 = r.normal();
  o.push_back(z1);
  o.push_back(0.25 * z1 + std::sqrt(1.0 - 0.0625) * z2);
}
void gen_2d_local_2(RandomStream& r, std::vector<double>& o) {
  if (sample_bernoulli(0.5, r))
    gen_bn(r, o, 0.5, 0.5, 0.4);
  else
    gen_bn(r, o, -0.5, -0.5, 0.4);
}
void gen_2d_mix_1(RandomStream& r, std::vector<double>& o) { gen_bn(r, o, 0, 0, 2); }
void gen_2d_mix_2(RandomStream& r, std::vector<double>& o) {
  if (sample_bernoulli(0.5, r))
    gen_bn(r, o, 1, 1, 1);
  else
    gen_bn(r, o, -1, -1, 1);
}

struct ContinuousScenario {
  PointGen sample1;
  PointGen sample2;
};

const ContinuousScenario* continuous_generators(const std::string& name) {
  static const std::unordered_map<std::string, ContinuousScenario> map = {
      {"1d-location", {gen_beta46, gen_beta46_shift}},
      {"1d-local", {gen_uniform01, gen_beta_mix}},
      {"1d-dispersion", {gen_normal1, gen_normal_sd2}},
      {"2d-location", {gen_2d_loc_1, gen_2d_loc_2}},
      {"2d-subset", {gen_2d_subset_1, gen_2d_subset_2}},
      {"2d-dispersion", {gen_2d_disp_1, gen_2d_disp_2}},
      {"2d-local", {gen_2d_local_1, gen_2d_local_2}},
      {"beta-distance", {gen_beta25, gen_beta2015}},
      {"2d-mixture", {gen_2d_mix_1, gen_2d_mix_2}},
  };
  auto it = map.find(name);
  return it == map.end() ? nullptr : &it->second;
}

// Predictors for the table scenarios; the first eight coordinates of the
// "markov" population follow a persistence-0.7 chain.
void draw_predictors(RandomStream& rng, int p, bool markov, std::vector<double>& x) {
  x.clear();
  for (int d = 0; d < p; ++d) {
    if (markov && d > 0 && d < 8) {
      const int prev = x.back() == 1.0 ? 1 : 0;
      const int keep = sample_bernoulli(0.7, rng);
      x.push_back(keep ? prev : 1 - prev);
    } else {
      x.push_back(sample_bernoulli(0.5, rng));
    }
  }
}

double response_prob(const std::vector<double>& x) {
  if (x[2] == 1.0 && x[6] == 1.0) return 0.3;
  if (x[6] == 0.0 && x[9] == 0.0) return 0.3;
  return 0.1;
}

// Retrospective sampling: draw population units until the control (Y = 0)
// and case (Y = 1) quotas are both met. The null variant fills both quotas
// with controls, the sample-1 law.
std::pair<Dataset, Dataset> generate_table(const std::string& name, int n1, int n2,
                                           RandomStream& rng, bool null_variant, int p) {
  const bool markov = name == "table-markov";
  std::vector<double> flat1, flat2;
  int need1 = n1, need2 = n2;
  std::vector<double> x;
  while (need1 > 0 || need2 > 0) {
    draw_predictors(rng, p, markov, x);
    const int y = sample_bernoulli(response_prob(x), rng);
    const int group = null_variant ? 0 : y;
    if (group == 0) {
      if (need1 > 0) {
        flat1.insert(flat1.end(), x.begin(), x.end());
        --need1;
      } else if (null_variant && need2 > 0) {
        flat2.insert(flat2.end(), x.begin(), x.end());
        --need2;
      }
    } else if (need2 > 0) {
      flat2.insert(flat2.end(), x.begin(), x.end());
      --need2;
    }
  }
  const SampleSpace s = SampleSpace::binary_table(p);
  return {Dataset(s, std::move(flat1)), Dataset(s, std::move(flat2))};
}

}  // namespace

const std::vector<ScenarioSpec>& scenarios() {
  static const std::vector<ScenarioSpec> list = {
      {"1d-location", SpaceKind::kRectangle, 1, 20, 20, "Beta(4,6) vs 0.2 + Beta(4,6)"},
      {"1d-local", SpaceKind::kRectangle, 1, 30, 30,
       "Uniform[0,1] vs 0.5 Beta(20,10) + 0.5 Beta(10,20)"},
      {"1d-dispersion", SpaceKind::kRectangle, 1, 40, 40, "N(0,1) vs N(0,4)"},
      {"2d-location", SpaceKind::kRectangle, 2, 50, 50,
       "BN((1,0), 4I) vs BN((0,1), 4I)"},
      {"2d-subset", SpaceKind::kRectangle, 2, 100, 100,
       "BN(0, 0.09I) vs 0.8 BN(0, 0.09I) + 0.2 BN((0.5,0.5), 0.09I)"},
      {"2d-dispersion", SpaceKind::kRectangle, 2, 50, 50, "BN(0, I) vs BN(0, 0.25I)"},
      {"2d-local", SpaceKind::kRectangle, 2, 50, 50,
       "correlated BN vs mixture at (0.5,0.5) and (-0.5,-0.5)"},
      {"table-iid", SpaceKind::kBinaryTable, 15, 500, 500,
       "independent fair predictors, retrospective controls vs cases"},
      {"table-markov", SpaceKind::kBinaryTable, 15, 500, 500,
       "Markov predictors x1..x8, retrospective controls vs cases"},
      {"beta-distance", SpaceKind::kRectangle, 1, 1000, 1000, "Beta(2,5) vs Beta(20,15)"},
      {"2d-mixture", SpaceKind::kRectangle, 2, 1000, 1000,
       "BN(0, 4I) vs 0.5 BN((1,1), I) + 0.5 BN((-1,-1), I)"},
  };
  return list;
}

const ScenarioSpec& scenario_by_name(const std::string& name) {
  for (const ScenarioSpec& s : scenarios())
    if (s.name == name) return s;
  throw input_error("unknown scenario: " + name);
}

std::pair<Dataset, Dataset> generate_scenario(const std::string& name, int n1, int n2,
                                              RandomStream& rng, bool null_variant,
                                              int table_dims) {
  const ScenarioSpec& info = scenario_by_name(name);
  if (n1 < 1 || n2 < 1) throw input_error("generate_scenario: sizes must be >= 1");
  if (info.kind == SpaceKind::kBinaryTable) {
    const int p = table_dims > 0 ? table_dims : info.dims;
    if (p < 10) throw input_error("table scenarios need at least 10 dimensions");
    return generate_table(name, n1, n2, rng, null_variant, p);
  }
  const ContinuousScenario* gen = continuous_generators(name);
  if (!gen) throw input_error("unknown scenario: " + name);
  std::vector<double> flat1, flat2;
  for (int i = 0; i < n1; ++i) gen->sample1(rng, flat1);
  const PointGen second = null_variant ? gen->sample1 : gen->sample2;
  for (int i = 0; i < n2; ++i) second(rng, flat2);
  const SampleSpace s = SampleSpace::rectangle_spanning(flat1, flat2, info.dims);
  return {Dataset(s, std::move(flat1)), Dataset(s, std::move(flat2))};
}

TwoSampleStatistic make_statistic(const std::string& name, const CooptParams& params,
                                  const EpsilonGibbsConfig& gibbs) {
  if (name == "coopt") {
    return {"coopt", false, [params](const Dataset& a, const Dataset& b) {
              return coupling_statistic(a, b, params);
            }};
  }
  if (name == "ks") {
    return {"ks", true, [](const Dataset& a, const Dataset& b) {
              if (a.space().kind() != SpaceKind::kRectangle || a.dims() != 1)
                throw input_error("ks statistic requires 1-d continuous data");
              return ks_statistic(a.flat(), b.flat());
            }};
  }
  if (name == "epsilon") {
    return {"epsilon", false, [gibbs](const Dataset& a, const Dataset& b) {
              return epsilon_gibbs(a, b, gibbs).mean_eps;
            }};
  }
  throw input_error("unknown statistic: " + name);
}

namespace {

// Larger oriented score = stronger evidence that the samples differ.
std::vector<double> oriented(const TwoSampleStatistic& stat, const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = stat.higher_means_different ? v[i] : -v[i];
  return out;
}

}  // namespace

RocResult roc(const TwoSampleStatistic& stat, const std::string& scenario, int n1, int n2,
              int reps, RandomStream rng, int table_dims) {
  if (reps < 2) throw input_error("roc: reps must be >= 2");
  RocResult out;
  out.statistic = stat.name;
  for (int r = 0; r < reps; ++r) {
    RandomStream sub = rng.fork(2ull * static_cast<std::uint64_t>(r));
    const auto [a, b] = generate_scenario(scenario, n1, n2, sub, true, table_dims);
    out.null_values.push_back(stat.eval(a, b));
  }
  for (int r = 0; r < reps; ++r) {
    RandomStream sub = rng.fork(2ull * static_cast<std::uint64_t>(r) + 1ull);
    const auto [a, b] = generate_scenario(scenario, n1, n2, sub, false, table_dims);
    out.alt_values.push_back(stat.eval(a, b));
  }

  const std::vector<double> null_s = oriented(stat, out.null_values);
  const std::vector<double> alt_s = oriented(stat, out.alt_values);

  // Threshold sweep over pooled distinct scores, descending: classify
  // "different" when score >= threshold.
  std::vector<double> thresholds;
  thresholds.insert(thresholds.end(), null_s.begin(), null_s.end());
  thresholds.insert(thresholds.end(), alt_s.begin(), alt_s.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const double denom = static_cast<double>(reps);
  out.points.emplace_back(0.0, 0.0);
  for (double t : thresholds) {
    const auto fp = static_cast<double>(
        std::count_if(null_s.begin(), null_s.end(), [t](double v) { return v >= t; }));
    const auto tp = static_cast<double>(
        std::count_if(alt_s.begin(), alt_s.end(), [t](double v) { return v >= t; }));
    out.points.emplace_back(fp / denom, tp / denom);
  }

  // Rank-based AUC; tied scores count half.
  double acc = 0.0;
  for (double a : alt_s)
    for (double n : null_s) acc += a > n ? 1.0 : (a == n ? 0.5 : 0.0);
  out.auc = acc / (denom * denom);
  return out;
}

double power_at_level(const TwoSampleStatistic& stat, const std::string& scenario, int n1,
                      int n2, double level, int reps, RandomStream rng, int table_dims) {
  if (!(level > 0.0 && level <= 1.0)) throw input_error("power: level must be in (0, 1]");
  RocResult r = roc(stat, scenario, n1, n2, reps, rng, table_dims);
  std::vector<double> null_s = oriented(stat, r.null_values);
  const std::vector<double> alt_s = oriented(stat, r.alt_values);
  std::sort(null_s.begin(), null_s.end());
  const int k = static_cast<int>(std::ceil((1.0 - level) * static_cast<double>(reps)));
  const double critical =
      k <= 0 ? -std::numeric_limits<double>::infinity() : null_s[static_cast<std::size_t>(k - 1)];
  const auto rejected = static_cast<double>(
      std::count_if(alt_s.begin(), alt_s.end(), [critical](double v) { return v > critical; }));
  return rejected / static_cast<double>(reps);
}

namespace {

struct ParsedFile {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;        // numeric cells (group column excluded)
  std::vector<std::string> group_labels;        // per row, when a group column is requested
};

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  if (delim == ' ') {
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
  }
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& tok, const std::string& path, int line_no, int col) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw input_error(path + ":" + std::to_string(line_no) + ": column " +
                      std::to_string(col + 1) + " is not a number: '" + tok + "'");
  return v;
}

ParsedFile parse_dsv(const std::string& path, const std::string& group_column) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw input_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  char delim = ' ';
  if (line.find('\t') != std::string::npos)
    delim = '\t';
  else if (line.find(',') != std::string::npos)
    delim = ',';

  ParsedFile out;
  out.header = split_line(line, delim);
  int group_idx = -1;
  if (!group_column.empty()) {
    for (std::size_t i = 0; i < out.header.size(); ++i)
      if (out.header[i] == group_column) group_idx = static_cast<int>(i);
    if (group_idx < 0) throw input_error(path + ": no column named '" + group_column + "'");
  }

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> toks = split_line(line, delim);
    if (toks.size() != out.header.size())
      throw input_error(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(out.header.size()) + " fields, got " +
                        std::to_string(toks.size()));
    std::vector<double> row;
    for (std::size_t c = 0; c < toks.size(); ++c) {
      if (static_cast<int>(c) == group_idx) {
        out.group_labels.push_back(toks[c]);
        continue;
      }
      row.push_back(parse_number(toks[c], path, line_no, static_cast<int>(c)));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return flat;
}

SampleSpace make_space(const IngestOptions& opt, int dims, std::span<const double> flat1,
                       std::span<const double> flat2) {
  if (opt.mode == SpaceKind::kBinaryTable) return SampleSpace::binary_table(dims);
  if (opt.bounds) {
    if (static_cast<int>(opt.bounds->size()) != 2 * dims)
      throw input_error("bounds need lo,hi for each of the " + std::to_string(dims) +
                        " coordinates");
    std::vector<double> lo, hi;
    for (int d = 0; d < dims; ++d) {
      lo.push_back((*opt.bounds)[static_cast<std::size_t>(2 * d)]);
      hi.push_back((*opt.bounds)[static_cast<std::size_t>(2 * d + 1)]);
    }
    return SampleSpace::rectangle(std::move(lo), std::move(hi));
  }
  return SampleSpace::rectangle_spanning(flat1, flat2, dims);
}

Dataset make_dataset(const SampleSpace& space, std::vector<double> flat,
                     const std::string& path) {
  try {
    return Dataset(space, std::move(flat));
  } catch (const input_error& e) {
    throw input_error(path + ": " + e.what());
  }
}

}  // namespace

std::pair<Dataset, Dataset> ingest_pair(const std::string& path1, const std::string& path2,
                                        const IngestOptions& opt) {
  const ParsedFile f1 = parse_dsv(path1, "");
  const ParsedFile f2 = parse_dsv(path2, "");
  if (f1.rows.empty()) throw input_error(path1 + ": no data rows");
  if (f2.rows.empty()) throw input_error(path2 + ": no data rows");
  if (f1.header.size() != f2.header.size())
    throw input_error("column count differs between " + path1 + " and " + path2);
  const int dims = static_cast<int>(f1.header.size());
  std::vector<double> flat1 = flatten(f1.rows);
  std::vector<double> flat2 = flatten(f2.rows);
  const SampleSpace space = make_space(opt, dims, flat1, flat2);
  Dataset d1 = make_dataset(space, std::move(flat1), path1);
  Dataset d2 = make_dataset(space, std::move(flat2), path2);
  return {std::move(d1), std::move(d2)};
}

std::pair<Dataset, Dataset> ingest_grouped(const std::string& path,
                                           const std::string& group_column,
                                           const IngestOptions& opt) {
  if (group_column.empty()) throw input_error("ingest_grouped: group column name required");
  const ParsedFile f = parse_dsv(path, group_column);
  if (f.rows.empty()) throw input_error(path + ": no data rows");
  std::vector<std::string> labels = f.group_labels;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.size() != 2)
    throw input_error(path + ": group column must contain exactly two labels, found " +
                      std::to_string(labels.size()));
  std::vector<double> flat1, flat2;
  for (std::size_t i = 0; i < f.rows.size(); ++i) {
    auto& dst = f.group_labels[i] == labels[0] ? flat1 : flat2;
    dst.insert(dst.end(), f.rows[i].begin(), f.rows[i].end());
  }
  if (flat1.empty() || flat2.empty()) throw input_error(path + ": a group has no rows");
  const int dims = static_cast<int>(f.rows.front().size());
  const SampleSpace space = make_space(opt, dims, flat1, flat2);
  Dataset d1 = make_dataset(space, std::move(flat1), path + " (group " + labels[0] + ")");
  Dataset d2 = make_dataset(space, std::move(flat2), path + " (group " + labels[1] + ")");
  return {std::move(d1), std::move(d2)};
}

Dataset ingest_single(const std::string& path, const IngestOptions& opt) {
  const ParsedFile f = parse_dsv(path, "");
  if (f.rows.empty()) throw input_error(path + ": no data rows");
  const int dims = static_cast<int>(f.header.size());
  std::vector<double> flat = flatten(f.rows);
  const SampleSpace space = make_space(opt, dims, flat, {});
  return make_dataset(space, std::move(flat), path);
}

void write_sample(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path);
  for (int d = 0; d < data.dims(); ++d) out << (d ? "\t" : "") << 'x' << (d + 1);
  out << '\n';
  const bool table = data.space().kind() == SpaceKind::kBinaryTable;
  out << std::setprecision(17);
  for (int i = 0; i < data.size(); ++i) {
    for (int d = 0; d < data.dims(); ++d) {
      if (d) out << '\t';
      if (table)
        out << static_cast<int>(data.at(i, d));
      else
        out << data.at(i, d);
    }
    out << '\n';
  }
  if (!out) throw input_error("failed writing " + path);
}

BaseMeasure grid_base_from_file(const std::string& path, int dims) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw input_error(path + ": empty file");
  std::istringstream head(line);
  std::string word;
  int depth = -1;
  head >> word >> depth;
  if (word != "depth" || depth < 0 || depth > 20)
    throw input_error(path + ":1: expected header 'depth D' with D in [0, 20]");
  const std::size_t side = 1ull << depth;
  double cells_d = 1.0;
  for (int d = 0; d < dims; ++d) cells_d *= static_cast<double>(side);
  if (cells_d > 16e6) throw input_error(path + ": grid too large");
  std::vector<double> mass(static_cast<std::size_t>(cells_d), 0.0);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream is(line);
    std::size_t flat = 0;
    for (int d = 0; d < dims; ++d) {
      long long c = -1;
      if (!(is >> c) || c < 0 || c >= static_cast<long long>(side))
        throw input_error(path + ":" + std::to_string(line_no) +
                          ": cell index out of range for depth " + std::to_string(depth));
      flat = flat * side + static_cast<std::size_t>(c);
    }
    double w = -1.0;
    if (!(is >> w) || !(w >= 0.0))
      throw input_error(path + ":" + std::to_string(line_no) + ": missing or negative weight");
    mass[flat] = w;
  }
  try {
    return BaseMeasure::dyadic_grid(dims, depth, std::move(mass));
  } catch (const std::invalid_argument& e) {
    throw input_error(path + ": " + e.what());
  }
}

}  // namespace coopt
