#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ensinfo/embedding.hpp"

namespace ensinfo {

// Points of a common dimension, stored row-major. All searches use the
// maximum (Chebyshev) norm.
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::size_t dim, std::vector<double> coords);

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> point(std::size_t i) const noexcept { return {coords_.data() + i * dim_, dim_}; }
  std::span<const double> coords() const noexcept { return coords_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

inline double max_norm_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] > b[j] ? a[j] - b[j] : b[j] - a[j];
    if (diff > d) d = diff;
  }
  return d;
}

// Linear-scan reference implementations.
namespace oracle {

// k-th smallest distance from point `query` to every other point.
// Throws Error(insufficient_points) unless size() >= k + 1.
double kth_nn_distance(const PointSet& set, std::size_t query, int k);

// 1 + number of other points strictly closer than `radius`.
std::size_t count_within_strict(const PointSet& set, std::size_t query, double radius);

}  // namespace oracle

// Median-split k-d tree with bounding boxes per node. Results are identical
// to the oracle: the same distance expression is evaluated on the same
// coordinates, and pruning only discards nodes that provably cannot change
// the answer.
class KdTree {
 public:
  explicit KdTree(PointSet points, std::size_t leaf_size = 8);

  const PointSet& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }

  double kth_nn_distance(std::size_t query, int k) const;
  std::size_t count_within_strict(std::size_t query, double radius) const;

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::uint32_t left;   // 0 for leaves
    std::uint32_t right;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size);
  double box_min_distance(std::uint32_t node, const double* q) const noexcept;
  double box_max_distance(std::uint32_t node, const double* q) const noexcept;
  void knn_visit(std::uint32_t node, const double* q, std::uint32_t skip_slot, double* best, int k) const;
  std::size_t count_visit(std::uint32_t node, const double* q, double radius) const;

  PointSet points_;
  std::size_t dim_ = 0;
  std::vector<double> slot_coords_;     // coordinates reordered by tree slot
  std::vector<std::uint32_t> slot_of_;  // point id -> slot
  std::vector<Node> nodes_;
  std::vector<double> boxes_;           // per node: dim lows then dim highs
};

// Window of retained instants [center - half_width, center + half_width],
// truncated to [0, times).
struct SearchWindow {
  std::size_t center = 0;
  std::size_t half_width = 0;
};

struct WindowRange {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive
  std::size_t size() const noexcept { return last - first + 1; }
};

WindowRange window_range(std::size_t times, SearchWindow window);

// Candidate pool for one window: the projection of every (trial, time) in the
// window onto the chosen joint coordinates. Point ids are time-major:
// id = (t - range.first) * trial_count + trial_slot.
struct WindowPoints {
  PointSet points;
  WindowRange range;
  std::size_t trial_count = 0;

  std::size_t id(std::size_t trial_slot, std::size_t t) const noexcept {
    return (t - range.first) * trial_count + trial_slot;
  }
};

// `coordinates` lists joint coordinate indices to keep (a marginal).
// With `only_trial` set the pool is restricted to that single trial
// (trial_slot is then always 0). Throws Error(insufficient_points) if the
// window is empty.
WindowPoints build_window_index(const EmbeddedEnsemble& ensemble, std::span<const std::size_t> coordinates,
                                SearchWindow window, std::optional<std::size_t> only_trial = std::nullopt);

}  // namespace ensinfo
