#include "helix/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace helix {

bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) {
  if (a.reward < b.reward || a.diversity < b.diversity) return false;
  return a.reward > b.reward || a.diversity > b.diversity;
}

FrontAssignment nondominated_sort(const std::vector<ObjectivePoint>& points) {
  const std::size_t n = points.size();
  for (const auto& p : points) {
    if (!std::isfinite(p.reward) || !std::isfinite(p.diversity)) {
      throw NonFiniteObjectiveError("objective values for record " + std::to_string(p.id) +
                                    " are not finite");
    }
  }

  // Deb's fast nondominated sort: domination counts plus dominated lists.
  std::vector<int> dominated_count(n, 0);
  std::vector<std::vector<std::uint32_t>> dominates_list(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(points[i], points[j])) {
        dominates_list[i].push_back(static_cast<std::uint32_t>(j));
        ++dominated_count[j];
      } else if (dominates(points[j], points[i])) {
        dominates_list[j].push_back(static_cast<std::uint32_t>(i));
        ++dominated_count[i];
      }
    }
  }

  FrontAssignment out;
  std::vector<std::uint32_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    if (dominated_count[i] == 0) current.push_back(static_cast<std::uint32_t>(i));
  }
  int rank = 0;
  while (!current.empty()) {
    std::vector<RecordId> front_ids;
    front_ids.reserve(current.size());
    std::vector<std::uint32_t> next;
    for (std::uint32_t i : current) {
      front_ids.push_back(points[i].id);
      out.rank[points[i].id] = rank;
    }
    for (std::uint32_t i : current) {
      for (std::uint32_t j : dominates_list[i]) {
        if (--dominated_count[j] == 0) next.push_back(j);
      }
    }
    // Membership discovery order depends on the dominator, not the input;
    // restore input order so within-front order is well defined.
    std::sort(next.begin(), next.end());
    out.fronts.push_back(std::move(front_ids));
    current = std::move(next);
    ++rank;
  }

  std::unordered_map<RecordId, const ObjectivePoint*> by_id;
  by_id.reserve(n);
  for (const auto& p : points) by_id.emplace(p.id, &p);
  for (const auto& front : out.fronts) {
    std::vector<ObjectivePoint> members;
    members.reserve(front.size());
    for (RecordId id : front) members.push_back(*by_id.at(id));
    auto cd = crowding_distance(members);
    out.crowding.insert(cd.begin(), cd.end());
  }
  return out;
}

std::unordered_map<RecordId, double> crowding_distance(
    const std::vector<ObjectivePoint>& front) {
  std::unordered_map<RecordId, double> out;
  const std::size_t n = front.size();
  if (n == 0) return out;
  for (const auto& p : front) out[p.id] = 0.0;
  if (n <= 2) {
    for (const auto& p : front) out[p.id] = kInfinity;
    return out;
  }

  std::vector<std::size_t> idx(n);
  for (int objective = 0; objective < 2; ++objective) {
    auto value = [&](std::size_t i) {
      return objective == 0 ? front[i].reward : front[i].diversity;
    };
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    const double range = value(idx[n - 1]) - value(idx[0]);
    out[front[idx[0]].id] = kInfinity;
    out[front[idx[n - 1]].id] = kInfinity;
    if (range <= 0.0) continue;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      double& d = out[front[idx[k]].id];
      if (std::isinf(d)) continue;
      d += (value(idx[k + 1]) - value(idx[k - 1])) / range;
    }
  }
  return out;
}

std::vector<RecordId> select_top(const std::vector<ObjectivePoint>& points, std::size_t n) {
  FrontAssignment fa = nondominated_sort(points);
  std::vector<RecordId> out;
  out.reserve(std::min(n, points.size()));
  for (const auto& front : fa.fronts) {
    if (out.size() >= n) break;
    // Descending crowding; stable sort keeps input order on ties.
    std::vector<RecordId> ordered = front;
    std::stable_sort(ordered.begin(), ordered.end(), [&](RecordId a, RecordId b) {
      return fa.crowding.at(a) > fa.crowding.at(b);
    });
    for (RecordId id : ordered) {
      if (out.size() >= n) break;
      out.push_back(id);
    }
  }
  return out;
}

}  // namespace helix
