// Command-line front end: two-sample testing, difference localization,
// posterior distance draws, goodness of fit, scenario simulation, and
// ROC / power studies over the built-in statistics.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coopt/baselines.hpp"
#include "coopt/coopt.hpp"
#include "coopt/errors.hpp"
#include "coopt/harness.hpp"
#include "coopt/oracle.hpp"
#include "coopt/trees.hpp"

namespace {

using namespace coopt;

struct PairInput {
  std::string input1, input2, input, group;
  std::string mode = "continuous";
  std::vector<double> bounds;
  double gamma0 = 0.5, rho0 = 0.5, cutoff = 1e-3;
  int max_depth = 0, threads = 1;
};

void add_data_options(CLI::App* c, PairInput& o) {
  c->add_option("--mode", o.mode, "data mode")
      ->check(CLI::IsMember({"continuous", "table"}))
      ->capture_default_str();
  c->add_option("--bounds", o.bounds,
                "explicit rectangle bounds lo1 hi1 lo2 hi2 ... (continuous mode)");
}

void add_stop_options(CLI::App* c, PairInput& o, double default_cutoff) {
  o.cutoff = default_cutoff;
  c->add_option("--rho0", o.rho0, "prior stopping probability")->capture_default_str();
  c->add_option("--cutoff", o.cutoff, "relative measure below which nodes terminate")
      ->capture_default_str();
  c->add_option("--max-depth", o.max_depth, "per-coordinate split bound (0 = from cutoff)")
      ->capture_default_str();
}

void add_prior_options(CLI::App* c, PairInput& o, double default_cutoff) {
  c->add_option("--gamma0", o.gamma0, "prior coupling probability")->capture_default_str();
  add_stop_options(c, o, default_cutoff);
  c->add_option("--threads", o.threads, "worker threads")->capture_default_str();
}

void add_pair_options(CLI::App* c, PairInput& o, double default_cutoff) {
  c->add_option("--input1", o.input1, "sample 1 file");
  c->add_option("--input2", o.input2, "sample 2 file");
  c->add_option("--input", o.input, "single file holding both samples");
  c->add_option("--group", o.group, "grouping column of --input");
  add_data_options(c, o);
  add_prior_options(c, o, default_cutoff);
}

IngestOptions ingest_options(const PairInput& o) {
  IngestOptions opt;
  opt.mode = o.mode == "table" ? SpaceKind::kBinaryTable : SpaceKind::kRectangle;
  if (!o.bounds.empty()) opt.bounds = o.bounds;
  return opt;
}

std::pair<Dataset, Dataset> load_pair(const PairInput& o) {
  const bool pair_form = !o.input1.empty() || !o.input2.empty();
  const bool grouped_form = !o.input.empty() || !o.group.empty();
  if (pair_form == grouped_form)
    throw input_error("provide either --input1 and --input2, or --input with --group");
  if (pair_form) {
    if (o.input1.empty() || o.input2.empty())
      throw input_error("--input1 and --input2 must be given together");
    return ingest_pair(o.input1, o.input2, ingest_options(o));
  }
  if (o.input.empty() || o.group.empty())
    throw input_error("--input and --group must be given together");
  return ingest_grouped(o.input, o.group, ingest_options(o));
}

CooptParams coopt_params(const PairInput& o) {
  CooptParams p;
  p.gamma0 = o.gamma0;
  p.rho0 = o.rho0;
  p.cutoff = o.cutoff;
  p.max_depth = o.max_depth;
  p.threads = o.threads;
  p.validate();
  return p;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path);
  out << text;
  if (!out) throw input_error("failed writing " + path);
}

void run_test(const PairInput& in, const std::string& out_path) {
  auto [d1, d2] = load_pair(in);
  PosteriorTable post(std::move(d1), std::move(d2), coopt_params(in));
  std::cout << std::setprecision(17) << "gamma_post " << post.coupling_statistic() << "\n";
  if (!out_path.empty()) write_text_file(out_path, post.to_json().dump(2) + "\n");
}

void run_hmap(const PairInput& in, const std::string& out_path) {
  auto [d1, d2] = load_pair(in);
  PosteriorTable post(std::move(d1), std::move(d2), coopt_params(in));
  const CouplingTree tree = hmap_tree(post);
  std::cout << tree.render_text(post.space());
  if (!out_path.empty()) {
    nlohmann::json j;
    j["space"] = space_to_json(post.space());
    j["gamma_post"] = post.coupling_statistic();
    j["tree"] = tree.to_json(post.space());
    write_text_file(out_path, j.dump(2) + "\n");
  }
}

double quantile(std::vector<double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return (1.0 - frac) * sorted[lo] + frac * sorted[hi];
}

void run_distance(const PairInput& in, const std::string& metric_name, int draws,
                  std::uint64_t seed, const std::string& out_path) {
  if (draws < 1) throw input_error("--draws must be >= 1");
  const DistanceMetric metric =
      metric_name == "l1" ? DistanceMetric::kL1 : DistanceMetric::kHellingerSq;
  auto [d1, d2] = load_pair(in);
  PosteriorTable post(std::move(d1), std::move(d2), coopt_params(in));
  const std::vector<double> values =
      distance_samples(post, metric, draws, RandomStream(seed));

  std::ostringstream lines;
  lines << std::setprecision(17);
  for (double v : values) lines << v << "\n";
  if (out_path.empty())
    std::cout << lines.str();
  else
    write_text_file(out_path, lines.str());

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  std::cout << std::setprecision(17);
  std::cout << "# mean " << mean << "\n";
  std::cout << "# q2.5 " << quantile(sorted, 0.025) << "\n";
  std::cout << "# q50 " << quantile(sorted, 0.5) << "\n";
  std::cout << "# q97.5 " << quantile(sorted, 0.975) << "\n";
}

void run_gof(const PairInput& in, const std::string& base_arg) {
  if (in.input.empty()) throw input_error("--input is required");
  const Dataset data = ingest_single(in.input, ingest_options(in));
  OptParams p;
  p.rho0 = in.rho0;
  p.cutoff = in.cutoff;
  p.max_depth = in.max_depth;
  BaseMeasure base = BaseMeasure::uniform();
  if (base_arg != "uniform") {
    base = grid_base_from_file(base_arg, data.dims());
    p.center_on_base = true;
  }
  std::cout << std::setprecision(17) << "rho_post " << gof_statistic(data, p, base) << "\n";
}

void run_simulate(const std::string& scenario, int n1, int n2, std::uint64_t seed,
                  int table_dims, std::string out1, std::string out2) {
  const ScenarioSpec& info = scenario_by_name(scenario);
  if (n1 <= 0) n1 = info.default_n1;
  if (n2 <= 0) n2 = info.default_n2;
  if (out1.empty()) out1 = scenario + "-sample1.tsv";
  if (out2.empty()) out2 = scenario + "-sample2.tsv";
  RandomStream rng(seed);
  const auto [d1, d2] = generate_scenario(scenario, n1, n2, rng, false, table_dims);
  write_sample(out1, d1);
  write_sample(out2, d2);
  std::cout << "wrote " << out1 << " (" << d1.size() << " rows) and " << out2 << " ("
            << d2.size() << " rows)\n";
}

void run_roc(const PairInput& in, const std::string& scenario, const std::string& statistic,
             int reps, int n1, int n2, std::uint64_t seed, int table_dims, int gibbs_burn,
             int gibbs_keep, const std::string& out_path, bool power_mode, double level) {
  const ScenarioSpec& info = scenario_by_name(scenario);
  if (n1 <= 0) n1 = info.default_n1;
  if (n2 <= 0) n2 = info.default_n2;
  EpsilonGibbsConfig gibbs;
  gibbs.burn_in = gibbs_burn;
  gibbs.keep = gibbs_keep;
  gibbs.seed = seed;
  const TwoSampleStatistic stat = make_statistic(statistic, coopt_params(in), gibbs);
  if (power_mode) {
    const double power =
        power_at_level(stat, scenario, n1, n2, level, reps, RandomStream(seed), table_dims);
    std::cout << std::setprecision(17) << "power " << power << "\n";
    return;
  }
  const RocResult r = roc(stat, scenario, n1, n2, reps, RandomStream(seed), table_dims);
  std::ostringstream table;
  table << std::setprecision(17) << "fpr\ttpr\n";
  for (const auto& [fpr, tpr] : r.points) table << fpr << "\t" << tpr << "\n";
  if (out_path.empty())
    std::cout << table.str();
  else
    write_text_file(out_path, table.str());
  std::cout << std::setprecision(17) << "auc " << r.auc << "\n";
}

void run_oracle(const PairInput& in) {
  auto [d1, d2] = load_pair(in);
  const CooptParams params = coopt_params(in);
  const OracleLimits limits;
  std::cout << std::setprecision(17);
  std::cout << "oracle_log_marginal " << oracle_coopt_log_marginal(d1, d2, params, limits)
            << "\n";
  std::cout << "oracle_gamma_post " << oracle_coupling_statistic(d1, d2, params, limits)
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled optional Polya tree two-sample inference"};
  app.require_subcommand(1);

  PairInput test_in;
  std::string test_out;
  CLI::App* test = app.add_subcommand("test", "two-sample test: posterior coupling probability");
  add_pair_options(test, test_in, 1e-3);
  test->add_option("--out", test_out, "write the posterior table as JSON");
  test->callback([&] { run_test(test_in, test_out); });

  PairInput hmap_in;
  std::string hmap_out;
  CLI::App* hmap = app.add_subcommand("hmap", "maximum a posteriori coupling tree");
  add_pair_options(hmap, hmap_in, 1e-3);
  hmap->add_option("--out", hmap_out, "write the tree as JSON");
  hmap->callback([&] { run_hmap(hmap_in, hmap_out); });

  PairInput dist_in;
  std::string dist_metric = "l1", dist_out;
  int dist_draws = 1000;
  std::uint64_t dist_seed = 1;
  CLI::App* dist = app.add_subcommand("distance", "posterior draws of distributional distance");
  add_pair_options(dist, dist_in, 1e-4);
  dist->add_option("--metric", dist_metric, "distance metric")
      ->check(CLI::IsMember({"l1", "hellinger2"}))
      ->capture_default_str();
  dist->add_option("--draws", dist_draws, "number of posterior draws")->capture_default_str();
  dist->add_option("--seed", dist_seed, "random seed")->capture_default_str();
  dist->add_option("--out", dist_out, "write draws to a file instead of stdout");
  dist->callback([&] { run_distance(dist_in, dist_metric, dist_draws, dist_seed, dist_out); });

  PairInput gof_in;
  std::string gof_base = "uniform";
  CLI::App* gof = app.add_subcommand("gof", "goodness of fit to a base measure");
  gof->add_option("--input", gof_in.input, "sample file");
  add_data_options(gof, gof_in);
  add_stop_options(gof, gof_in, 1e-3);
  gof->add_option("--base", gof_base, "'uniform' or a dyadic grid weight file")
      ->capture_default_str();
  gof->callback([&] { run_gof(gof_in, gof_base); });

  std::string sim_scenario, sim_out1, sim_out2;
  int sim_n1 = 0, sim_n2 = 0, sim_dims = 0;
  std::uint64_t sim_seed = 1;
  CLI::App* sim = app.add_subcommand("simulate", "draw two samples from a built-in scenario");
  sim->add_option("--scenario", sim_scenario, "scenario name")->required();
  sim->add_option("--n1", sim_n1, "sample 1 size (0 = scenario default)");
  sim->add_option("--n2", sim_n2, "sample 2 size (0 = scenario default)");
  sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
  sim->add_option("--table-dims", sim_dims, "table coordinate count override");
  sim->add_option("--out1", sim_out1, "sample 1 output path");
  sim->add_option("--out2", sim_out2, "sample 2 output path");
  sim->callback(
      [&] { run_simulate(sim_scenario, sim_n1, sim_n2, sim_seed, sim_dims, sim_out1, sim_out2); });

  PairInput roc_in;
  std::string roc_scenario, roc_statistic = "coopt", roc_out;
  int roc_reps = 200, roc_n1 = 0, roc_n2 = 0, roc_dims = 0;
  int roc_gibbs_burn = 10000, roc_gibbs_keep = 10000;
  std::uint64_t roc_seed = 1;
  double roc_level = 0.05;
  auto add_roc_options = [&](CLI::App* c) {
    add_prior_options(c, roc_in, 1e-3);
    c->add_option("--scenario", roc_scenario, "scenario name")->required();
    c->add_option("--statistic", roc_statistic, "test statistic")
        ->check(CLI::IsMember({"coopt", "ks", "epsilon"}))
        ->capture_default_str();
    c->add_option("--reps", roc_reps, "replicates per hypothesis")->capture_default_str();
    c->add_option("--n1", roc_n1, "sample 1 size (0 = scenario default)");
    c->add_option("--n2", roc_n2, "sample 2 size (0 = scenario default)");
    c->add_option("--seed", roc_seed, "random seed")->capture_default_str();
    c->add_option("--table-dims", roc_dims, "table coordinate count override");
    c->add_option("--gibbs-burn", roc_gibbs_burn, "epsilon sampler burn-in sweeps")
        ->capture_default_str();
    c->add_option("--gibbs-keep", roc_gibbs_keep, "epsilon sampler kept sweeps")
        ->capture_default_str();
    c->add_option("--out", roc_out, "write the ROC table to a file");
  };
  CLI::App* roc_cmd = app.add_subcommand("roc", "ROC of a statistic on a scenario");
  add_roc_options(roc_cmd);
  roc_cmd->callback([&] {
    run_roc(roc_in, roc_scenario, roc_statistic, roc_reps, roc_n1, roc_n2, roc_seed, roc_dims,
            roc_gibbs_burn, roc_gibbs_keep, roc_out, false, roc_level);
  });
  CLI::App* power_cmd = app.add_subcommand("power", "power of a statistic at a level");
  add_roc_options(power_cmd);
  power_cmd->add_option("--level", roc_level, "test level")->capture_default_str();
  power_cmd->callback([&] {
    run_roc(roc_in, roc_scenario, roc_statistic, roc_reps, roc_n1, roc_n2, roc_seed, roc_dims,
            roc_gibbs_burn, roc_gibbs_keep, roc_out, true, roc_level);
  });

  PairInput oracle_in;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "");
  oracle_cmd->group("");
  add_pair_options(oracle_cmd, oracle_in, 1e-3);
  oracle_cmd->callback([&] { run_oracle(oracle_in); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const coopt::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const coopt::resource_limit_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
