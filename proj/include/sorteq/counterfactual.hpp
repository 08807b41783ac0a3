#pragma once

#include <array>
#include <cstdint>

#include "sorteq/moments.hpp"

namespace sorteq {

// The seven outcomes attributed in the counterfactual tables.
struct OutcomeVector {
  double var_w;
  double wfwi;
  double bfwi;
  double bfwi_share;
  double var_u;
  double bfui;
  double bfui_share;

  static constexpr int kCount = 7;
  double operator[](int i) const {
    const double* base = &var_w;
    return base[i];
  }
  static const char* name(int i);
};

OutcomeVector outcome_vector(const ModelParams& params);

// Ordering-average attribution of the change in each outcome between two
// parameter vectors: for every permutation of (sigma_theta, sigma_x, c_a,
// c_l) the primitives are switched from start to end values one at a time and
// the step changes recorded; each primitive is attributed the mean of its
// step changes over all 24 permutations. Attributed changes sum to the total
// change exactly; a primitive that does not change receives exactly zero.
// ln A may differ between the endpoints but affects no outcome.
struct CounterfactualTable {
  OutcomeVector start;
  OutcomeVector end;
  std::array<double, OutcomeVector::kCount> total;
  // attribution[p][o]: change in outcome o attributed to primitive p,
  // primitives ordered (sigma_theta, sigma_x, c_a, c_l).
  std::array<std::array<double, OutcomeVector::kCount>, 4> attribution;
  // share[p][o] = attribution/total * 100; NaN when |total| < 1e-12
  // ("undefined" -- shares may legitimately exceed +/-100 and are not clamped).
  std::array<std::array<double, OutcomeVector::kCount>, 4> share;
};

CounterfactualTable decompose(const ModelParams& start, const ModelParams& end);

}  // namespace sorteq
