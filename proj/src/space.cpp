#include "coopt/space.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "coopt/errors.hpp"
#include "coopt/numerics.hpp"

namespace coopt {

SampleSpace SampleSpace::rectangle(std::vector<double> lo, std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size())
    throw std::invalid_argument("rectangle: bound vectors must be nonempty and equal length");
  for (std::size_t d = 0; d < lo.size(); ++d) {
    if (!std::isfinite(lo[d]) || !std::isfinite(hi[d]) || !(lo[d] < hi[d]))
      throw std::invalid_argument("rectangle: bounds must be finite with lo < hi");
  }
  const int p = static_cast<int>(lo.size());
  return SampleSpace(SpaceKind::kRectangle, p, std::move(lo), std::move(hi));
}

SampleSpace SampleSpace::binary_table(int dims) {
  if (dims < 1) throw std::invalid_argument("binary_table: dims must be >= 1");
  return SampleSpace(SpaceKind::kBinaryTable, dims, {}, {});
}

SampleSpace SampleSpace::rectangle_spanning(std::span<const double> flat1,
                                            std::span<const double> flat2, int dims) {
  if (dims < 1) throw std::invalid_argument("rectangle_spanning: dims must be >= 1");
  const std::size_t p = static_cast<std::size_t>(dims);
  if (flat1.size() % p != 0 || flat2.size() % p != 0 || flat1.size() + flat2.size() == 0)
    throw std::invalid_argument("rectangle_spanning: point buffers must be nonempty multiples of dims");
  std::vector<double> lo(p, std::numeric_limits<double>::infinity());
  std::vector<double> hi(p, -std::numeric_limits<double>::infinity());
  auto scan = [&](std::span<const double> flat) {
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const double v = flat[i];
      if (!std::isfinite(v)) throw input_error("rectangle_spanning: non-finite coordinate");
      const std::size_t d = i % p;
      lo[d] = std::min(lo[d], v);
      hi[d] = std::max(hi[d], v);
    }
  };
  scan(flat1);
  scan(flat2);
  for (std::size_t d = 0; d < p; ++d) {
    // Nudge the top so the observed maximum falls strictly inside; this also
    // separates the bounds when a coordinate is constant.
    hi[d] = std::nextafter(hi[d], std::numeric_limits<double>::infinity());
    if (!(lo[d] < hi[d]))
      throw input_error("rectangle_spanning: degenerate coordinate range");
  }
  return rectangle(std::move(lo), std::move(hi));
}

Node Node::root(const SampleSpace& s) {
  return Node(std::vector<std::uint32_t>(static_cast<std::size_t>(s.dims()), 1u));
}

int Node::depth(int d) const {
  return std::bit_width(w_[static_cast<std::size_t>(d)]) - 1;
}

int Node::total_depth() const {
  int t = 0;
  for (std::uint32_t w : w_) t += std::bit_width(w) - 1;
  return t;
}

Node Node::child(int d, int side) const {
  if (side != 0 && side != 1) throw std::invalid_argument("Node::child: side must be 0 or 1");
  if (depth(d) >= 30) throw std::invalid_argument("Node::child: coordinate depth limit reached");
  std::vector<std::uint32_t> w = w_;
  const std::size_t dd = static_cast<std::size_t>(d);
  w[dd] = 2u * w[dd] + static_cast<std::uint32_t>(side);
  return Node(std::move(w));
}

std::uint64_t Node::hash64() const {
  std::uint64_t h = 0x243F6A8885A308D3ull;
  for (std::uint32_t w : w_) {
    std::uint64_t z = h ^ (static_cast<std::uint64_t>(w) + 0x9E3779B97F4A7C15ull);
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    h = z;
  }
  return h;
}

std::string Node::key() const {
  std::ostringstream os;
  for (std::size_t d = 0; d < w_.size(); ++d) {
    if (d) os << '.';
    os << w_[d];
  }
  return os.str();
}

PartitionRule::PartitionRule(const SampleSpace& s, int max_depth)
    : kind_(s.kind()), dims_(s.dims()), max_depth_(max_depth) {
  if (kind_ == SpaceKind::kBinaryTable) {
    max_depth_ = 1;
  } else if (max_depth < 1 || max_depth > 30) {
    throw std::invalid_argument("PartitionRule: max_depth must be in [1, 30]");
  }
}

int PartitionRule::max_depth(int) const { return max_depth_; }

int PartitionRule::num_splits(const Node& n) const {
  int m = 0;
  for (int d = 0; d < dims_; ++d)
    if (splittable(n, d)) ++m;
  return m;
}

std::vector<int> PartitionRule::split_dims(const Node& n) const {
  std::vector<int> dims;
  for (int d = 0; d < dims_; ++d)
    if (splittable(n, d)) dims.push_back(d);
  return dims;
}

std::pair<Node, Node> PartitionRule::children(const Node& n, int d) const {
  if (d < 0 || d >= dims_ || !splittable(n, d))
    throw std::invalid_argument("PartitionRule::children: coordinate not splittable");
  return {n.child(d, 0), n.child(d, 1)};
}

Dataset::Dataset(SampleSpace space, std::vector<double> flat_points)
    : space_(std::move(space)), flat_(std::move(flat_points)) {
  const std::size_t p = static_cast<std::size_t>(space_.dims());
  if (flat_.size() % p != 0)
    throw input_error("Dataset: point buffer length is not a multiple of dims");
  n_ = static_cast<int>(flat_.size() / p);
  for (std::size_t i = 0; i < flat_.size(); ++i) {
    const double v = flat_[i];
    const int d = static_cast<int>(i % p);
    const int r = static_cast<int>(i / p);
    if (space_.kind() == SpaceKind::kBinaryTable) {
      if (v != 0.0 && v != 1.0)
        throw input_error("Dataset: row " + std::to_string(r + 1) + " coordinate " +
                          std::to_string(d + 1) + " must be 0 or 1");
    } else {
      if (!std::isfinite(v) || v < space_.lo(d) || v > space_.hi(d))
        throw input_error("Dataset: row " + std::to_string(r + 1) + " coordinate " +
                          std::to_string(d + 1) + " outside the sample space");
    }
  }
}

std::span<const double> Dataset::row(int i) const {
  const std::size_t p = static_cast<std::size_t>(dims());
  return std::span<const double>(flat_).subspan(static_cast<std::size_t>(i) * p, p);
}

int Dataset::count(const Node& n) const {
  int c = 0;
  for (int i = 0; i < n_; ++i)
    if (contains(space_, n, row(i))) ++c;
  return c;
}

bool contains(const SampleSpace& s, const Node& n, std::span<const double> x) {
  for (int d = 0; d < s.dims(); ++d) {
    const std::uint32_t w = n.word(d);
    if (s.kind() == SpaceKind::kBinaryTable) {
      if (w == 2u && x[static_cast<std::size_t>(d)] != 0.0) return false;
      if (w == 3u && x[static_cast<std::size_t>(d)] != 1.0) return false;
      continue;
    }
    const double v = x[static_cast<std::size_t>(d)];
    if (v < s.lo(d) || v > s.hi(d)) return false;
    double a = s.lo(d), b = s.hi(d);
    const int k = std::bit_width(w) - 1;
    for (int level = k - 1; level >= 0; --level) {
      const double mid = 0.5 * (a + b);
      if ((w >> level) & 1u) {
        if (v < mid) return false;
        a = mid;
      } else {
        if (v >= mid) return false;
        b = mid;
      }
    }
  }
  return true;
}

int child_side(const SampleSpace& s, const Node& n, int d, double x_d) {
  if (s.kind() == SpaceKind::kBinaryTable) return x_d == 0.0 ? 0 : 1;
  const auto [a, b] = node_interval(s, n, d);
  return x_d >= 0.5 * (a + b) ? 1 : 0;
}

std::pair<double, double> node_interval(const SampleSpace& s, const Node& n, int d) {
  if (s.kind() != SpaceKind::kRectangle)
    throw std::invalid_argument("node_interval: rectangle spaces only");
  double a = s.lo(d), b = s.hi(d);
  const std::uint32_t w = n.word(d);
  const int k = std::bit_width(w) - 1;
  for (int level = k - 1; level >= 0; --level) {
    const double mid = 0.5 * (a + b);
    if ((w >> level) & 1u)
      a = mid;
    else
      b = mid;
  }
  return {a, b};
}

double log_measure(const SampleSpace& s, const Node& n) {
  if (s.kind() == SpaceKind::kBinaryTable)
    return static_cast<double>(s.dims() - n.total_depth()) * kLn2;
  return -static_cast<double>(n.total_depth()) * kLn2;
}

double log_relative_measure(const Node& n) {
  return -static_cast<double>(n.total_depth()) * kLn2;
}

std::string describe(const SampleSpace& s, const Node& n) {
  std::ostringstream os;
  bool any = false;
  for (int d = 0; d < s.dims(); ++d) {
    if (n.depth(d) == 0) continue;
    if (any) os << " & ";
    any = true;
    if (s.kind() == SpaceKind::kBinaryTable) {
      os << 'x' << (d + 1) << " = " << (n.word(d) == 2u ? 0 : 1);
    } else {
      const auto [a, b] = node_interval(s, n, d);
      os << 'x' << (d + 1) << " in [" << a << ", " << b << ")";
    }
  }
  if (!any) return "entire space";
  return os.str();
}

std::pair<int, int> count_pair(const Node& n, const Dataset& a, const Dataset& b) {
  return {a.count(n), b.count(n)};
}

}  // namespace coopt
