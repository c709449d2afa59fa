#pragma once

#include <limits>
#include <unordered_map>
#include <vector>

#include "helix/core_model.hpp"

namespace helix {

// The two selection objectives, both maximized.
struct ObjectivePoint {
  RecordId id = 0;
  double reward = 0.0;
  double diversity = 0.0;
};

struct FrontAssignment {
  // fronts[0] is the nondominated set; within a front, input order is kept.
  std::vector<std::vector<RecordId>> fronts;
  std::unordered_map<RecordId, int> rank;
  std::unordered_map<RecordId, double> crowding;
};

// a dominates b iff a is >= in both objectives and > in at least one.
bool dominates(const ObjectivePoint& a, const ObjectivePoint& b);

// Nondominated sorting. All objective values must be finite.
FrontAssignment nondominated_sort(const std::vector<ObjectivePoint>& points);

// Crowding distance for the members of one front. Boundary points per
// objective get +inf; an objective with zero range contributes nothing.
std::unordered_map<RecordId, double> crowding_distance(
    const std::vector<ObjectivePoint>& front);

// Top-n selection: fronts are taken whole in rank order, each front ordered
// by descending crowding distance (ties keep input order), and the last
// front admitted partially.
std::vector<RecordId> select_top(const std::vector<ObjectivePoint>& points, std::size_t n);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace helix
