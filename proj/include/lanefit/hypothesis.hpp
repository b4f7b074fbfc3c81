#pragma once

#include <array>
#include <cmath>

#include "lanefit/lane_model.hpp"

namespace lanefit {

// Decision vector of the lane optimizer.
struct LaneHypothesis {
  double central_offset = 0.0;  // a0^c, m
  double a1 = 0.0;
  double a2 = 0.0;  // 1/m
  double b = 0.0;   // road slope

  static constexpr std::size_t kDim = 4;

  SharedParams shared() const { return {a1, a2}; }
  SlopeModel slope() const { return {b}; }

  std::array<double, kDim> to_array() const {
    return {central_offset, a1, a2, b};
  }
  static LaneHypothesis from_array(const std::array<double, kDim>& v) {
    return {v[0], v[1], v[2], v[3]};
  }

  friend bool operator==(const LaneHypothesis&,
                         const LaneHypothesis&) = default;
};

// Symmetric box |v_i| <= limit_i on the decision vector.
struct HypothesisBox {
  double central_offset = 6.0;
  double a1 = 1.0;
  double a2 = 0.05;
  double b = 0.1;

  std::array<double, LaneHypothesis::kDim> limits() const {
    return {central_offset, a1, a2, b};
  }
  bool contains(const LaneHypothesis& h) const {
    const auto v = h.to_array();
    const auto l = limits();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(std::abs(v[i]) <= l[i])) return false;
    }
    return true;
  }
};

}  // namespace lanefit
