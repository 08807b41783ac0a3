#include "sorteq/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sorteq {

const char* OutcomeVector::name(int i) {
  static const char* names[kCount] = {"var_w", "wfwi",  "bfwi", "bfwi_share",
                                      "var_u", "bfui",  "bfui_share"};
  return names[i];
}

OutcomeVector outcome_vector(const ModelParams& params) {
  const Equilibrium eq = solve_equilibrium(params);
  const WelfareReport wf = welfare_report(eq, params);
  const WageReport wg = wage_report(eq, params);
  return OutcomeVector{wg.var_w, wg.wfwi, wg.bfwi, wg.bfwi_share,
                       wf.var_u, wf.bfui, wf.bfui_share};
}

CounterfactualTable decompose(const ModelParams& start, const ModelParams& end) {
  start.validate();
  end.validate();

  // One outcome vector per subset of switched primitives; bit p of the mask
  // selects the end value of primitive p. ln A affects no outcome, so it is
  // held at the start value along the paths.
  std::array<OutcomeVector, 16> at_subset;
  std::array<bool, 16> failed{};
  std::array<std::string, 16> why{};
  for (int mask = 0; mask < 16; ++mask) {
    ModelParams p = start;
    for (int b = 0; b < 4; ++b)
      if (mask >> b & 1)
        set_primitive(p, kPrimitives[b], get_primitive(end, kPrimitives[b]));
    try {
      at_subset[mask] = outcome_vector(p);
    } catch (const std::exception& e) {
      failed[mask] = true;
      why[mask] = e.what();
    }
  }

  CounterfactualTable t;
  t.start = at_subset[0];
  t.end = at_subset[15];
  for (auto& row : t.attribution) row.fill(0.0);

  int perm[4] = {0, 1, 2, 3};
  std::sort(perm, perm + 4);
  do {
    int mask = 0;
    for (int step = 0; step < 4; ++step) {
      const int p = perm[step];
      const int next = mask | (1 << p);
      if (failed[mask] || failed[next]) {
        const int bad = failed[mask] ? mask : next;
        std::string order;
        for (int s = 0; s < 4; ++s) {
          order += primitive_name(kPrimitives[perm[s]]);
          if (s < 3) order += ",";
        }
        throw std::domain_error(
            "decompose: intermediate parameter vector failed for permutation (" +
            order + ") at step " + std::to_string(step + 1) + ": " + why[bad]);
      }
      for (int o = 0; o < OutcomeVector::kCount; ++o)
        t.attribution[p][o] += at_subset[next][o] - at_subset[mask][o];
      mask = next;
    }
  } while (std::next_permutation(perm, perm + 4));

  for (int p = 0; p < 4; ++p)
    for (int o = 0; o < OutcomeVector::kCount; ++o)
      t.attribution[p][o] /= 24.0;
  for (int o = 0; o < OutcomeVector::kCount; ++o) {
    t.total[o] = at_subset[15][o] - at_subset[0][o];
    for (int p = 0; p < 4; ++p)
      t.share[p][o] = std::abs(t.total[o]) < 1e-12
                          ? std::numeric_limits<double>::quiet_NaN()
                          : t.attribution[p][o] / t.total[o] * 100.0;
  }
  return t;
}

}  // namespace sorteq
