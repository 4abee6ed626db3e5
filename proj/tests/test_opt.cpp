#include "coopt/opt.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "coopt/errors.hpp"
#include "coopt/numerics.hpp"
#include "doctest.h"

using namespace coopt;

namespace {

void check_close(double actual, double expected, double tol) {
  CAPTURE(actual);
  CAPTURE(expected);
  CHECK(std::abs(actual - expected) <= tol);
}

SampleSpace unit_interval() { return SampleSpace::rectangle({0.0}, {1.0}); }

}  // namespace

TEST_CASE("uniform base measure matches the reference measure") {
  const BaseMeasure base = BaseMeasure::uniform();
  const SampleSpace rect = SampleSpace::rectangle({0.0, -1.0}, {2.0, 1.0});
  const Node root = Node::root(rect);
  CHECK(base.is_uniform());
  CHECK(base.log_mass(rect, root) == 0.0);
  CHECK(base.log_mass(rect, root.child(0, 1)) == log_relative_measure(root.child(0, 1)));
  const std::vector<double> x{0.5, 0.5};
  CHECK(base.log_density(rect, x) == 0.0);

  const SampleSpace table = SampleSpace::binary_table(2);
  const std::vector<double> cell{1.0, 0.0};
  CHECK(base.log_density(table, cell) == -2.0 * kLn2);
  CHECK(base.log_mass(table, Node::root(table)) == 0.0);
}

TEST_CASE("dyadic grid base measure on one rectangle coordinate") {
  const BaseMeasure base = BaseMeasure::dyadic_grid(1, 2, {4.0, 3.0, 2.0, 1.0});
  const SampleSpace s = unit_interval();
  const Node root = Node::root(s);
  check_close(base.log_mass(s, root), 0.0, 1e-15);
  check_close(base.log_mass(s, root.child(0, 0)), std::log(0.7), 1e-14);
  check_close(base.log_mass(s, root.child(0, 0).child(0, 0)), std::log(0.4), 1e-14);
  // Finer than the grid: half of the first cell.
  check_close(base.log_mass(s, root.child(0, 0).child(0, 0).child(0, 0)), std::log(0.2), 1e-14);
  const std::vector<double> a{0.1}, b{0.9}, top{1.0};
  check_close(base.log_density(s, a), std::log(1.6), 1e-14);
  check_close(base.log_density(s, b), std::log(0.4), 1e-14);
  check_close(base.log_density(s, top), std::log(0.4), 1e-14);
}

TEST_CASE("dyadic grid base measure on two coordinates") {
  const BaseMeasure base = BaseMeasure::dyadic_grid(2, 1, {0.4, 0.3, 0.2, 0.1});
  const SampleSpace s = SampleSpace::rectangle({0.0, 0.0}, {1.0, 1.0});
  const Node root = Node::root(s);
  check_close(base.log_mass(s, root.child(0, 0)), std::log(0.7), 1e-14);
  check_close(base.log_mass(s, root.child(1, 0)), std::log(0.6), 1e-14);
  check_close(base.log_mass(s, root.child(0, 1).child(1, 1)), std::log(0.1), 1e-14);
}

TEST_CASE("dyadic grid base measure on a binary table") {
  const BaseMeasure base = BaseMeasure::dyadic_grid(2, 1, {0.4, 0.3, 0.2, 0.1});
  const SampleSpace s = SampleSpace::binary_table(2);
  const std::vector<double> x{1.0, 0.0};
  check_close(base.log_density(s, x), std::log(0.2), 1e-14);
  check_close(base.log_mass(s, Node::root(s).child(1, 1)), std::log(0.4), 1e-14);
}

TEST_CASE("dyadic grid construction rejects bad input") {
  CHECK_THROWS_AS(BaseMeasure::dyadic_grid(0, 1, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(BaseMeasure::dyadic_grid(1, 21, {}), std::invalid_argument);
  CHECK_THROWS_AS(BaseMeasure::dyadic_grid(1, 1, {1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(BaseMeasure::dyadic_grid(1, 1, {1.0, -1.0}), std::invalid_argument);
  CHECK_THROWS_AS(BaseMeasure::dyadic_grid(1, 1, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("grid base measure rejects mismatched spaces") {
  const BaseMeasure wrong_dims = BaseMeasure::dyadic_grid(3, 1, std::vector<double>(8, 1.0));
  const SampleSpace table = SampleSpace::binary_table(2);
  const std::vector<double> x{0.0, 0.0};
  CHECK_THROWS_AS(wrong_dims.log_density(table, x), input_error);
  const BaseMeasure too_deep = BaseMeasure::dyadic_grid(2, 2, std::vector<double>(16, 1.0));
  CHECK_THROWS_AS(too_deep.log_mass(table, Node::root(table)), input_error);
}

TEST_CASE("parameter validation") {
  OptParams p;
  CHECK_NOTHROW(p.validate());
  p.rho0 = 1.5;
  CHECK_THROWS_AS(p.validate(), input_error);
  p.rho0 = -0.1;
  CHECK_THROWS_AS(p.validate(), input_error);
  p = OptParams{};
  p.alpha_total = 0.0;
  CHECK_THROWS_AS(p.validate(), input_error);
  p = OptParams{};
  p.cutoff = 0.0;
  CHECK_THROWS_AS(p.validate(), input_error);
  p.cutoff = 1.5;
  CHECK_THROWS_AS(p.validate(), input_error);
  p = OptParams{};
  p.max_depth = 31;
  CHECK_THROWS_AS(p.validate(), input_error);
  p = OptParams{};
  p.max_nodes = 0;
  CHECK_THROWS_AS(p.validate(), input_error);
}

TEST_CASE("depth bounds derived from the cutoff") {
  OptParams p;
  CHECK(p.effective_max_depth() == 10);
  p.cutoff = 1.0 / 256.0;
  CHECK(p.effective_max_depth() == 8);
  p.max_depth = 5;
  CHECK(p.effective_max_depth() == 5);
  CHECK(forced_stop_depth(1.0) == 0);
  CHECK(forced_stop_depth(0.5) == 1);
  CHECK(forced_stop_depth(1e-3) == 10);
}

TEST_CASE("split ratio closed forms") {
  check_close(log_split_ratio(1, 0, 0.5, 0.5), -kLn2, 1e-14);
  check_close(log_split_ratio(1, 1, 0.5, 0.5), -3.0 * kLn2, 1e-14);
  check_close(log_split_ratio(2, 0, 0.5, 0.5), std::log(3.0 / 8.0), 1e-14);
  check_close(log_split_ratio(2, 2, 0.5, 0.5), std::log(3.0 / 128.0), 1e-14);
  CHECK(log_split_ratio(0, 0, 0.5, 0.5) == 0.0);
}

TEST_CASE("centered pseudo-counts follow the base child masses") {
  const BaseMeasure base = BaseMeasure::dyadic_grid(1, 2, {0.6, 0.2, 0.15, 0.05});
  const SampleSpace s = unit_interval();
  const Node root = Node::root(s);
  const auto at_root = centered_pseudocounts(s, root, 0, base, 1.0);
  check_close(at_root[0], 0.8, 1e-12);
  check_close(at_root[1], 0.2, 1e-12);
  const auto lower = centered_pseudocounts(s, root.child(0, 0), 0, base, 1.0);
  check_close(lower[0], 0.75, 1e-12);
  check_close(lower[1], 0.25, 1e-12);

  const BaseMeasure degenerate = BaseMeasure::dyadic_grid(1, 2, {0.5, 0.5, 0.0, 0.0});
  CHECK_THROWS_AS(centered_pseudocounts(s, root, 0, degenerate, 1.0), input_error);
  CHECK_THROWS_AS(centered_pseudocounts(s, root.child(0, 1), 0, degenerate, 1.0), input_error);
}

TEST_CASE("empty sample leaves the prior untouched") {
  const Dataset data(unit_interval(), {});
  const OptFit fit(data, OptParams{}, BaseMeasure::uniform());
  CHECK(fit.log_marginal() == 0.0);
  CHECK(fit.gof_statistic() == 0.5);
  CHECK(fit.entry(fit.root()).kind == NodeKind::kEmpty);
}

TEST_CASE("single observation under symmetric defaults has a closed form") {
  const SampleSpace s = unit_interval();
  const Dataset data(s, {0.3});
  const OptFit fit(data, OptParams{}, BaseMeasure::uniform());
  CHECK(fit.log_marginal() == 0.0);
  CHECK(fit.entry(fit.root()).kind == NodeKind::kSingleObs);

  const Node sub = Node::root(s).child(0, 0);
  const OptFit sub_fit(data, OptParams{}, BaseMeasure::uniform(), sub);
  CHECK(sub_fit.log_marginal() == -log_measure(s, sub));
  CHECK(sub_fit.entry(sub).kind == NodeKind::kSingleObs);
}

TEST_CASE("single observation away from symmetric defaults is evaluated in full") {
  const Dataset data(unit_interval(), {0.3});
  OptParams p;
  p.alpha_total = 2.0;
  const OptFit fit(data, p, BaseMeasure::uniform());
  CHECK(fit.entry(fit.root()).kind == NodeKind::kInterior);
  check_close(fit.log_marginal(), 0.0, 1e-12);
}

TEST_CASE("two observations in distinct table cells") {
  const SampleSpace s = SampleSpace::binary_table(1);
  const Dataset data(s, {0.0, 1.0});
  const OptFit fit(data, OptParams{}, BaseMeasure::uniform());
  check_close(fit.log_marginal(), std::log(3.0 / 16.0), 1e-12);
  check_close(fit.gof_statistic(), 2.0 / 3.0, 1e-12);

  const Node atom = fit.root().child(0, 0);
  CHECK(fit.entry(atom).kind == NodeKind::kForcedTerminal);
  CHECK(fit.entry(atom).n == 1);
  CHECK(fit.entry(atom).log_p == 0.0);
  CHECK(fit.rho_post(atom) == 1.0);

  const OptNodePosterior post = fit.node_posterior(fit.root());
  CHECK(post.log_p == fit.log_marginal());
  REQUIRE(post.split_dims == std::vector<int>{0});
  CHECK(post.lambda_post[0] == 1.0);
  check_close(post.alpha_post[0][0], 1.5, 1e-15);
  check_close(post.alpha_post[0][1], 1.5, 1e-15);
}

TEST_CASE("coarse cutoff forces terminal children") {
  const Dataset data(unit_interval(), {0.1, 0.2, 0.6});
  OptParams p;
  p.cutoff = 0.5;
  const OptFit fit(data, p, BaseMeasure::uniform());
  check_close(fit.log_marginal(), std::log(0.75), 1e-12);
  const Node lower = fit.root().child(0, 0);
  CHECK(fit.entry(lower).kind == NodeKind::kForcedTerminal);
  CHECK(fit.rho_post(lower) == 1.0);
  check_close(fit.entry(lower).log_p, 2.0 * kLn2, 1e-14);
}

TEST_CASE("node cache limit raises a resource error") {
  const Dataset data(unit_interval(), {0.1, 0.2, 0.6});
  OptParams p;
  p.max_nodes = 2;
  CHECK_THROWS_AS(OptFit(data, p, BaseMeasure::uniform()), resource_limit_error);
}

TEST_CASE("flat selector weights reproduce the default") {
  const SampleSpace s = SampleSpace::rectangle({0.0, 0.0}, {1.0, 1.0});
  const Dataset data(s, {0.1, 0.2, 0.8, 0.9, 0.4, 0.6, 0.7, 0.3});
  const OptFit plain(data, OptParams{}, BaseMeasure::uniform());
  OptParams p;
  p.selector = [](const Node&) { return std::vector<double>{1.0, 1.0}; };
  const OptFit weighted(data, p, BaseMeasure::uniform());
  CHECK(weighted.log_marginal() == plain.log_marginal());
  CHECK(weighted.gof_statistic() == plain.gof_statistic());
}

TEST_CASE("selector weights are validated per node") {
  const SampleSpace s = SampleSpace::rectangle({0.0, 0.0}, {1.0, 1.0});
  const Dataset data(s, {0.1, 0.2, 0.8, 0.9});
  OptParams p;
  p.selector = [](const Node&) { return std::vector<double>{1.0}; };
  CHECK_THROWS_AS(OptFit(data, p, BaseMeasure::uniform()), input_error);
  p.selector = [](const Node&) { return std::vector<double>{1.0, -1.0}; };
  CHECK_THROWS_AS(OptFit(data, p, BaseMeasure::uniform()), input_error);
  p.selector = [](const Node&) { return std::vector<double>{0.0, 0.0}; };
  CHECK_THROWS_AS(OptFit(data, p, BaseMeasure::uniform()), input_error);
}

TEST_CASE("entry lookup distinguishes visited and unvisited nodes") {
  const Dataset data(unit_interval(), {0.1, 0.9});
  OptParams p;
  p.cutoff = 0.5;
  const OptFit fit(data, p, BaseMeasure::uniform());
  const Node deep = fit.root().child(0, 0).child(0, 0);
  CHECK(!fit.has(deep));
  CHECK_THROWS_AS(fit.entry(deep), std::out_of_range);
  const OptEntry synth = fit.entry_or_prior(deep);
  CHECK(synth.kind == NodeKind::kForcedTerminal);
  CHECK(synth.n == 0);
  CHECK(synth.log_p == 0.0);
  CHECK(fit.rho_post(deep) == 1.0);
}

TEST_CASE("free-function wrappers agree with the incremental interface") {
  const Dataset data(unit_interval(), {0.1, 0.2, 0.6});
  const OptParams p;
  const BaseMeasure base = BaseMeasure::uniform();
  const OptFit fit(data, p, base);
  CHECK(opt_log_marginal(data, p, base) == fit.log_marginal());
  CHECK(gof_statistic(data, p, base) == fit.gof_statistic());
  const OptNodePosterior post = opt_posterior(Node::root(data.space()), data, p, base);
  CHECK(post.log_p == fit.log_marginal());
}
