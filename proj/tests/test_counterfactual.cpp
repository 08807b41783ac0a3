#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "sorteq/counterfactual.hpp"
#include "test_helpers.hpp"

using namespace sorteq;

namespace {

const ModelParams kStart{0.5, 0.5, 4.0, 0.1953125, 0.0};

// Independent oracle: literal path walk for one permutation without the
// subset cache, re-solving the model at every step.
std::array<double, OutcomeVector::kCount> oracle_attribution(
    const ModelParams& start, const ModelParams& end, int primitive) {
  int perm[4] = {0, 1, 2, 3};
  std::array<double, OutcomeVector::kCount> acc{};
  int n_perms = 0;
  do {
    ModelParams current = start;
    for (int step = 0; step < 4; ++step) {
      const Primitive p = kPrimitives[perm[step]];
      ModelParams next = current;
      set_primitive(next, p, get_primitive(end, p));
      if (perm[step] == primitive) {
        const OutcomeVector before = outcome_vector(current);
        const OutcomeVector after = outcome_vector(next);
        for (int o = 0; o < OutcomeVector::kCount; ++o)
          acc[o] += after[o] - before[o];
      }
      current = next;
    }
    ++n_perms;
  } while (std::next_permutation(perm, perm + 4));
  for (double& v : acc) v /= n_perms;
  return acc;
}

}  // namespace

TEST_CASE("outcome vector matches the analytic reports") {
  const OutcomeVector v = outcome_vector(kStart);
  CHECK(v.var_w == doctest::Approx(0.3585611979).epsilon(1e-8));
  CHECK(v.var_u == doctest::Approx(0.28125).epsilon(1e-10));
  CHECK(v.bfui_share == doctest::Approx(0.3086419753).epsilon(1e-8));
  CHECK(v.wfwi + v.bfwi == doctest::Approx(v.var_w).epsilon(1e-14));
  CHECK(v.bfui / v.var_u == doctest::Approx(v.bfui_share).epsilon(1e-12));

  ModelParams shutdown = kStart;
  shutdown.c_a = 1e9;
  const OutcomeVector s = outcome_vector(shutdown);
  CHECK(std::abs(s.var_w - s.var_u) < 1e-6);
}

TEST_CASE("identical endpoints attribute exactly zero") {
  const CounterfactualTable t = decompose(kStart, kStart);
  for (int p = 0; p < 4; ++p)
    for (int o = 0; o < OutcomeVector::kCount; ++o)
      CHECK(t.attribution[p][o] == 0.0);
  for (int o = 0; o < OutcomeVector::kCount; ++o) {
    CHECK(t.total[o] == 0.0);
    CHECK(std::isnan(t.share[0][o]));  // undefined share
  }
}

TEST_CASE("single-primitive change gets the full share") {
  ModelParams end = kStart;
  end.sigma_x = 0.6;
  const CounterfactualTable t = decompose(kStart, end);
  for (int o = 0; o < OutcomeVector::kCount; ++o) {
    CHECK(t.attribution[1][o] == doctest::Approx(t.total[o]).epsilon(1e-12));
    CHECK(t.share[1][o] == doctest::Approx(100.0).epsilon(1e-10));
    // Dummy primitives receive exactly zero.
    CHECK(t.attribution[0][o] == 0.0);
    CHECK(t.attribution[2][o] == 0.0);
    CHECK(t.attribution[3][o] == 0.0);
  }
}

TEST_CASE("ln A changes alone change nothing") {
  ModelParams end = kStart;
  end.ln_A = 2.0;
  const CounterfactualTable t = decompose(kStart, end);
  for (int o = 0; o < OutcomeVector::kCount; ++o) CHECK(t.total[o] == 0.0);
}

TEST_CASE("efficiency, dummy and oracle equality on random pairs") {
  RngStream rs(88, 0);
  for (int rep = 0; rep < 12; ++rep) {
    const ModelParams start = testutil::random_params(rs);
    ModelParams end = testutil::random_params(rs);
    if (rep % 3 == 0) end.c_l = start.c_l;  // exercise the dummy property
    const CounterfactualTable t = decompose(start, end);
    for (int o = 0; o < OutcomeVector::kCount; ++o) {
      double sum = 0.0;
      for (int p = 0; p < 4; ++p) sum += t.attribution[p][o];
      CHECK(sum == doctest::Approx(t.total[o]).epsilon(1e-12));
      if (rep % 3 == 0) CHECK(t.attribution[3][o] == 0.0);
      if (std::abs(t.total[o]) >= 1e-12) {
        double share_sum = 0.0;
        for (int p = 0; p < 4; ++p) share_sum += t.share[p][o];
        CHECK(share_sum == doctest::Approx(100.0).epsilon(1e-9));
      }
    }
    // Brute-force permutation-walk oracle, one primitive per pair.
    const int p = rep % 4;
    const auto oracle = oracle_attribution(start, end, p);
    for (int o = 0; o < OutcomeVector::kCount; ++o)
      CHECK(t.attribution[p][o] ==
            doctest::Approx(oracle[o]).epsilon(1e-12));
  }
}

TEST_CASE("failing intermediate names the permutation and step") {
  // No valid equilibrium can fail from valid endpoints in this model family,
  // but invalid endpoint parameters must be rejected up front.
  ModelParams bad = kStart;
  bad.sigma_x = -1.0;
  CHECK_THROWS_AS(decompose(kStart, bad), std::domain_error);
}
