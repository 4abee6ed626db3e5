#pragma once
// Sample spaces, recursive dyadic partition nodes, and observation storage.
//
// A space is either a bounded axis-aligned rectangle in R^p or a p-dimensional
// binary table. Partition nodes split one coordinate at a time: a rectangle
// coordinate is halved at its midpoint, a table coordinate is fixed to one of
// its two values. Each coordinate of a node is encoded as a heap index
// (1 = whole axis, children of w are 2w and 2w + 1), so the vector of per-axis
// indices is a canonical key: two construction orders reaching the same region
// produce identical Node values.
//
// Reference measure: normalized Lebesgue on rectangles (the root has measure
// one) and counting measure on tables (each cell has measure one). Rectangle
// intervals are half-open on the right except the topmost, which is closed so
// the space contains its upper boundary.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace coopt {

enum class SpaceKind { kRectangle, kBinaryTable };

class SampleSpace {
 public:
  static SampleSpace rectangle(std::vector<double> lo, std::vector<double> hi);
  static SampleSpace binary_table(int dims);
  // Rectangle spanning the pooled range of the given row-major point sets,
  // with the upper bound nudged up so every observed maximum is interior.
  static SampleSpace rectangle_spanning(std::span<const double> flat1,
                                        std::span<const double> flat2, int dims);

  SpaceKind kind() const { return kind_; }
  int dims() const { return dims_; }
  double lo(int d) const { return lo_[static_cast<std::size_t>(d)]; }
  double hi(int d) const { return hi_[static_cast<std::size_t>(d)]; }
  bool operator==(const SampleSpace&) const = default;

 private:
  SampleSpace(SpaceKind kind, int dims, std::vector<double> lo, std::vector<double> hi)
      : kind_(kind), dims_(dims), lo_(std::move(lo)), hi_(std::move(hi)) {}

  SpaceKind kind_;
  int dims_;
  std::vector<double> lo_, hi_;  // empty for tables
};

class Node {
 public:
  static Node root(const SampleSpace& s);

  int dims() const { return static_cast<int>(w_.size()); }
  std::uint32_t word(int d) const { return w_[static_cast<std::size_t>(d)]; }
  // Number of splits already applied along coordinate d.
  int depth(int d) const;
  // Sum of per-coordinate depths; the node's relative measure is 2^-total.
  int total_depth() const;
  Node child(int d, int side) const;  // side 0 = lower half / cell 0, 1 = upper / cell 1

  bool operator==(const Node&) const = default;
  std::uint64_t hash64() const;
  // Canonical key, e.g. "5.1.2": one heap index per coordinate.
  std::string key() const;

 private:
  explicit Node(std::vector<std::uint32_t> w) : w_(std::move(w)) {}

  std::vector<std::uint32_t> w_;
};

struct NodeHash {
  std::size_t operator()(const Node& n) const { return static_cast<std::size_t>(n.hash64()); }
};

// Coordinate-wise dyadic splitting truncated at a per-coordinate depth bound.
// Table coordinates are binary, so their bound is always one.
class PartitionRule {
 public:
  PartitionRule(const SampleSpace& s, int max_depth);

  int max_depth(int d) const;
  bool splittable(const Node& n, int d) const { return n.depth(d) < max_depth(d); }
  int num_splits(const Node& n) const;  // M(A), the number of splittable coordinates
  std::vector<int> split_dims(const Node& n) const;
  bool is_atom(const Node& n) const { return num_splits(n) == 0; }
  std::pair<Node, Node> children(const Node& n, int d) const;

 private:
  SpaceKind kind_;
  int dims_;
  int max_depth_;
};

class Dataset {
 public:
  // Row-major points; validates that every coordinate lies in the space
  // (within [lo, hi] for rectangles, in {0, 1} for tables).
  Dataset(SampleSpace space, std::vector<double> flat_points);

  const SampleSpace& space() const { return space_; }
  int size() const { return n_; }
  int dims() const { return space_.dims(); }
  double at(int i, int d) const {
    return flat_[static_cast<std::size_t>(i) * static_cast<std::size_t>(dims()) +
                 static_cast<std::size_t>(d)];
  }
  std::span<const double> row(int i) const;
  std::span<const double> flat() const { return flat_; }

  int count(const Node& n) const;

 private:
  SampleSpace space_;
  int n_;
  std::vector<double> flat_;
};

// Whether x (a full point) lies in the node's region.
bool contains(const SampleSpace& s, const Node& n, std::span<const double> x);

// Which half of node n along coordinate d receives x: 0 for the lower
// half / cell 0, 1 otherwise. Must agree with contains() on the children.
int child_side(const SampleSpace& s, const Node& n, int d, double x_d);

// The interval [a, b) covered by node n along a rectangle coordinate.
std::pair<double, double> node_interval(const SampleSpace& s, const Node& n, int d);

// log of the node's measure under the space's reference measure:
// -total_depth * ln 2 for rectangles, (#unfixed coordinates) * ln 2 for tables.
double log_measure(const SampleSpace& s, const Node& n);

// log of measure(n) / measure(root): -total_depth * ln 2 for either kind.
double log_relative_measure(const Node& n);

// Human-readable region description, 1-based coordinates.
std::string describe(const SampleSpace& s, const Node& n);

std::pair<int, int> count_pair(const Node& n, const Dataset& a, const Dataset& b);

}  // namespace coopt
