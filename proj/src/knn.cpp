#include "ensinfo/knn.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "ensinfo/error.hpp"

namespace ensinfo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_query(std::size_t size, std::size_t query) {
  if (query >= size) {
    throw Error(ErrorKind::insufficient_points,
                "query id " + std::to_string(query) + " outside a set of " + std::to_string(size));
  }
}

void check_k(std::size_t size, int k) {
  if (k < 1) throw Error(ErrorKind::invalid_spec, "k must be at least 1");
  if (size < static_cast<std::size_t>(k) + 1) {
    throw Error(ErrorKind::insufficient_points, "need at least k + 1 = " + std::to_string(k + 1) +
                                                    " points, have " + std::to_string(size));
  }
}

// Keeps best[0..k) sorted ascending.
inline void offer(double* best, int k, double d) noexcept {
  if (!(d < best[k - 1])) return;
  int i = k - 1;
  while (i > 0 && best[i - 1] > d) {
    best[i] = best[i - 1];
    --i;
  }
  best[i] = d;
}

}  // namespace

PointSet::PointSet(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) throw Error(ErrorKind::invalid_spec, "point dimension must be at least 1");
  if (coords_.size() % dim_ != 0) throw Error(ErrorKind::format, "coordinate count not a multiple of dim");
}

namespace oracle {

double kth_nn_distance(const PointSet& set, std::size_t query, int k) {
  check_k(set.size(), k);
  check_query(set.size(), query);
  std::vector<double> d;
  d.reserve(set.size() - 1);
  const auto q = set.point(query);
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i != query) d.push_back(max_norm_distance(q, set.point(i)));
  }
  std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
  return d[static_cast<std::size_t>(k - 1)];
}

std::size_t count_within_strict(const PointSet& set, std::size_t query, double radius) {
  check_query(set.size(), query);
  const auto q = set.point(query);
  std::size_t count = 1;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i != query && max_norm_distance(q, set.point(i)) < radius) ++count;
  }
  return count;
}

}  // namespace oracle

KdTree::KdTree(PointSet points, std::size_t leaf_size) : points_(std::move(points)), dim_(points_.dim()) {
  const std::size_t n = points_.size();
  if (n > std::numeric_limits<std::uint32_t>::max() / 2) {
    throw Error(ErrorKind::dimension_overflow, "too many points for the index");
  }
  if (leaf_size == 0) leaf_size = 1;

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  slot_of_.assign(n, 0);
  slot_coords_.assign(points_.coords().begin(), points_.coords().end());
  // slot_of_ temporarily holds the point id at each slot; fixed up below.
  std::copy(order.begin(), order.end(), slot_of_.begin());

  nodes_.reserve(2 * (n / leaf_size + 1));
  nodes_.push_back({0, 0, 0, 0});  // index 0 is reserved so child links can use 0 for "none"
  if (n > 0) build(0, static_cast<std::uint32_t>(n), leaf_size);

  // Reorder coordinates into slot order and invert the id map.
  std::vector<double> reordered(slot_coords_.size());
  std::vector<std::uint32_t> slot_of(n);
  for (std::size_t slot = 0; slot < n; ++slot) {
    const std::uint32_t id = slot_of_[slot];
    std::copy_n(points_.coords().begin() + static_cast<std::ptrdiff_t>(id * dim_), dim_,
                reordered.begin() + static_cast<std::ptrdiff_t>(slot * dim_));
    slot_of[id] = static_cast<std::uint32_t>(slot);
  }
  slot_coords_ = std::move(reordered);
  slot_of_ = std::move(slot_of);
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size) {
  // During construction slot_of_[slot] is the id stored in that slot.
  const auto node = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({begin, end, 0, 0});
  const std::size_t box_at = boxes_.size();
  boxes_.resize(box_at + 2 * dim_);
  double* lo = boxes_.data() + box_at;
  double* hi = lo + dim_;
  std::fill(lo, lo + dim_, kInf);
  std::fill(hi, hi + dim_, -kInf);
  const auto coords = points_.coords();
  for (std::uint32_t s = begin; s < end; ++s) {
    const double* p = coords.data() + static_cast<std::size_t>(slot_of_[s]) * dim_;
    for (std::size_t j = 0; j < dim_; ++j) {
      lo[j] = std::min(lo[j], p[j]);
      hi[j] = std::max(hi[j], p[j]);
    }
  }
  if (end - begin <= leaf_size) return node;

  std::size_t axis = 0;
  double widest = -1.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    if (hi[j] - lo[j] > widest) {
      widest = hi[j] - lo[j];
      axis = j;
    }
  }
  if (widest <= 0.0) return node;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(slot_of_.begin() + begin, slot_of_.begin() + mid, slot_of_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return coords[a * dim_ + axis] < coords[b * dim_ + axis];
                   });
  const std::uint32_t left = build(begin, mid, leaf_size);
  const std::uint32_t right = build(mid, end, leaf_size);
  nodes_[node].left = left;
  nodes_[node].right = right;
  return node;
}

double KdTree::box_min_distance(std::uint32_t node, const double* q) const noexcept {
  const double* lo = boxes_.data() + (static_cast<std::size_t>(node) - 1) * 2 * dim_;
  const double* hi = lo + dim_;
  double d = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    if (q[j] < lo[j]) {
      d = std::max(d, lo[j] - q[j]);
    } else if (q[j] > hi[j]) {
      d = std::max(d, q[j] - hi[j]);
    }
  }
  return d;
}

double KdTree::box_max_distance(std::uint32_t node, const double* q) const noexcept {
  const double* lo = boxes_.data() + (static_cast<std::size_t>(node) - 1) * 2 * dim_;
  const double* hi = lo + dim_;
  double d = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) d = std::max(d, std::max(q[j] - lo[j], hi[j] - q[j]));
  return d;
}

void KdTree::knn_visit(std::uint32_t node, const double* q, std::uint32_t skip_slot, double* best,
                       int k) const {
  const Node& nd = nodes_[node];
  if (nd.left == 0) {
    for (std::uint32_t s = nd.begin; s < nd.end; ++s) {
      if (s == skip_slot) continue;
      const double* p = slot_coords_.data() + static_cast<std::size_t>(s) * dim_;
      offer(best, k, max_norm_distance({q, dim_}, {p, dim_}));
    }
    return;
  }
  const double dl = box_min_distance(nd.left, q);
  const double dr = box_min_distance(nd.right, q);
  const std::uint32_t near = dl <= dr ? nd.left : nd.right;
  const std::uint32_t far = dl <= dr ? nd.right : nd.left;
  const double dnear = std::min(dl, dr);
  const double dfar = std::max(dl, dr);
  if (dnear < best[k - 1]) knn_visit(near, q, skip_slot, best, k);
  if (dfar < best[k - 1]) knn_visit(far, q, skip_slot, best, k);
}

std::size_t KdTree::count_visit(std::uint32_t node, const double* q, double radius) const {
  if (!(box_min_distance(node, q) < radius)) return 0;
  const Node& nd = nodes_[node];
  if (box_max_distance(node, q) < radius) return nd.end - nd.begin;
  if (nd.left == 0) {
    std::size_t count = 0;
    for (std::uint32_t s = nd.begin; s < nd.end; ++s) {
      const double* p = slot_coords_.data() + static_cast<std::size_t>(s) * dim_;
      if (max_norm_distance({q, dim_}, {p, dim_}) < radius) ++count;
    }
    return count;
  }
  return count_visit(nd.left, q, radius) + count_visit(nd.right, q, radius);
}

double KdTree::kth_nn_distance(std::size_t query, int k) const {
  check_k(size(), k);
  check_query(size(), query);
  const std::uint32_t slot = slot_of_[query];
  const double* q = slot_coords_.data() + static_cast<std::size_t>(slot) * dim_;
  std::vector<double> best(static_cast<std::size_t>(k), kInf);
  knn_visit(1, q, slot, best.data(), k);
  return best[static_cast<std::size_t>(k - 1)];
}

std::size_t KdTree::count_within_strict(std::size_t query, double radius) const {
  check_query(size(), query);
  // For radius > 0 the query itself (distance 0) is among the points counted,
  // which supplies the "+1 for self"; for radius <= 0 nothing is strictly
  // closer and the answer is the self count alone.
  if (!(radius > 0.0)) return 1;
  const double* q = slot_coords_.data() + static_cast<std::size_t>(slot_of_[query]) * dim_;
  return count_visit(1, q, radius);
}

WindowRange window_range(std::size_t times, SearchWindow window) {
  if (times == 0 || window.center >= times) {
    throw Error(ErrorKind::insufficient_points, "window centre outside the valid time range");
  }
  WindowRange range;
  range.first = window.center > window.half_width ? window.center - window.half_width : 0;
  range.last = std::min(times - 1, window.center + std::min(window.half_width, times));
  return range;
}

WindowPoints build_window_index(const EmbeddedEnsemble& ensemble, std::span<const std::size_t> coordinates,
                                SearchWindow window, std::optional<std::size_t> only_trial) {
  if (coordinates.empty()) throw Error(ErrorKind::invalid_spec, "empty marginal");
  for (std::size_t c : coordinates) {
    if (c >= ensemble.dim()) throw Error(ErrorKind::invalid_spec, "marginal coordinate out of range");
  }
  if (ensemble.trials() == 0) throw Error(ErrorKind::insufficient_points, "ensemble has no trials");
  if (only_trial && *only_trial >= ensemble.trials()) {
    throw Error(ErrorKind::config, "trial " + std::to_string(*only_trial) + " out of range");
  }
  WindowPoints out;
  out.range = window_range(ensemble.times(), window);
  out.trial_count = only_trial ? 1 : ensemble.trials();
  const std::size_t dim = coordinates.size();
  std::vector<double> coords;
  coords.reserve(out.range.size() * out.trial_count * dim);
  for (std::size_t t = out.range.first; t <= out.range.last; ++t) {
    for (std::size_t slot = 0; slot < out.trial_count; ++slot) {
      const auto p = ensemble.point(only_trial ? *only_trial : slot, t);
      for (std::size_t c : coordinates) coords.push_back(p[c]);
    }
  }
  out.points = PointSet(dim, std::move(coords));
  return out;
}

}  // namespace ensinfo
