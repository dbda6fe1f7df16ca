#include "pushability/spatial_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <utility>

namespace pushability {
namespace {

constexpr std::uint32_t kLeafSize = 12;

// Candidate ordering used everywhere: squared distance first, index second.
struct Candidate {
  double d2;
  std::uint32_t index;
  bool operator<(const Candidate& o) const { return d2 < o.d2 || (d2 == o.d2 && index < o.index); }
};

}  // namespace

SpatialIndex::SpatialIndex(std::span<const Point3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] <= lo[axis]) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

std::vector<std::size_t> SpatialIndex::neighbors(const Point3& query, std::size_t k, double r) const {
  std::vector<std::size_t> out;
  if (k == 0 || !(r >= 0.0) || nodes_.empty()) return out;

  const double r2 = r * r;
  // Accepted candidates kept sorted; k is small, so insertion beats a heap.
  thread_local std::vector<Candidate> best;
  thread_local std::vector<std::pair<std::int32_t, double>> stack;
  best.clear();
  stack.clear();
  auto bound = [&]() { return best.size() < k ? r2 : std::min(r2, best.back().d2); };

  // Each entry carries a lower bound on the squared distance to its subtree.
  stack.emplace_back(0, 0.0);
  while (!stack.empty()) {
    const auto [id, lower] = stack.back();
    stack.pop_back();
    if (lower > bound()) continue;
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        const Candidate c{(points_[idx] - query).squaredNorm(), idx};
        if (c.d2 > r2) continue;
        if (best.size() == k) {
          if (!(c < best.back())) continue;
          best.pop_back();
        }
        best.insert(std::upper_bound(best.begin(), best.end(), c), c);
      }
      continue;
    }
    const double diff = query[node.axis] - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    stack.emplace_back(far, std::max(lower, diff * diff));
    stack.emplace_back(near, lower);
  }

  out.resize(best.size());
  std::transform(best.begin(), best.end(), out.begin(), [](const Candidate& c) { return c.index; });
  return out;
}

std::vector<std::size_t> SpatialIndex::radius(const Point3& query, double r) const {
  std::vector<Candidate> found;
  if (!(r >= 0.0) || nodes_.empty()) return {};
  const double r2 = r * r;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        const double d2 = (points_[idx] - query).squaredNorm();
        if (d2 <= r2) found.push_back({d2, idx});
      }
      continue;
    }
    const double diff = query[node.axis] - node.split;
    if (diff <= 0.0 || diff * diff <= r2) stack.push_back(node.left);
    if (diff >= 0.0 || diff * diff <= r2) stack.push_back(node.right);
  }
  std::sort(found.begin(), found.end());
  std::vector<std::size_t> out(found.size());
  std::transform(found.begin(), found.end(), out.begin(), [](const Candidate& c) { return c.index; });
  return out;
}

void SpatialIndex::radius_unordered(const Point3& query, double r, std::vector<std::size_t>& out) const {
  out.clear();
  if (!(r >= 0.0) || nodes_.empty()) return;
  const double r2 = r * r;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if ((points_[order_[i]] - query).squaredNorm() <= r2) out.push_back(order_[i]);
      }
      continue;
    }
    const double diff = query[node.axis] - node.split;
    if (diff <= 0.0 || diff * diff <= r2) stack.push_back(node.left);
    if (diff >= 0.0 || diff * diff <= r2) stack.push_back(node.right);
  }
}

std::size_t SpatialIndex::count_within(const Point3& query, double r, std::size_t limit) const {
  if (!(r >= 0.0) || nodes_.empty() || limit == 0) return 0;
  const double r2 = r * r;
  std::size_t count = 0;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if ((points_[order_[i]] - query).squaredNorm() <= r2 && ++count >= limit) return count;
      }
      continue;
    }
    const double diff = query[node.axis] - node.split;
    if (diff <= 0.0 || diff * diff <= r2) stack.push_back(node.left);
    if (diff >= 0.0 || diff * diff <= r2) stack.push_back(node.right);
  }
  return count;
}

}  // namespace pushability
