#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace qnet {

/// A site of the k-dimensional square lattice.
struct LatticePosition {
  std::vector<int> coords;

  std::size_t dimension() const { return coords.size(); }

  auto operator<=>(const LatticePosition&) const = default;
  bool operator==(const LatticePosition&) const = default;
};

std::string to_string(const LatticePosition& pos);

/// L1 (Manhattan) distance. Throws DomainError on dimension mismatch.
std::int64_t l1_distance(const LatticePosition& a, const LatticePosition& b);

/// The finite lattice G^k with `side` sites per axis and side^k sites total.
class BaseGraph {
 public:
  BaseGraph(int dimension, int side);

  int dimension() const { return dimension_; }
  int side() const { return side_; }
  std::int64_t site_count() const { return site_count_; }

  bool contains(const LatticePosition& pos) const;

  /// Row-major index; the last coordinate varies fastest.
  std::int64_t site_index(const LatticePosition& pos) const;
  LatticePosition site(std::int64_t index) const;

  /// Largest L1 distance between two sites, k*(side-1).
  std::int64_t max_distance() const { return static_cast<std::int64_t>(dimension_) * (side_ - 1); }

  bool operator==(const BaseGraph&) const = default;

 private:
  int dimension_;
  int side_;
  std::int64_t site_count_;
};

}  // namespace qnet
