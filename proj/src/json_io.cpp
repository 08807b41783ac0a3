#include "sorteq/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace sorteq {

using nlohmann::json;

void to_json(json& j, const ModelParams& p) {
  j = json{{"sigma_x", p.sigma_x},
           {"sigma_theta", p.sigma_theta},
           {"c_a", p.c_a},
           {"c_l", p.c_l},
           {"ln_A", p.ln_A}};
}

void from_json(const json& j, ModelParams& p) {
  j.at("sigma_x").get_to(p.sigma_x);
  j.at("sigma_theta").get_to(p.sigma_theta);
  j.at("c_a").get_to(p.c_a);
  j.at("c_l").get_to(p.c_l);
  p.ln_A = j.value("ln_A", 0.0);
}

void to_json(json& j, const Equilibrium& e) {
  j = json{{"sigma", e.sigma},       {"alpha", e.alpha},
           {"rho_sq", e.rho_sq},     {"ln_u0", e.ln_u0},
           {"l_star_0", e.l_star_0}, {"b_const", e.b_const}};
}

void to_json(json& j, const WelfareReport& r) {
  j = json{{"var_u", r.var_u},
           {"bfui", r.bfui},
           {"wfui", r.wfui},
           {"bfui_share", r.bfui_share}};
}

void to_json(json& j, const WageReport& r) {
  j = json{{"var_w", r.var_w},
           {"bfwi", r.bfwi},
           {"wfwi", r.wfwi},
           {"bfwi_share", r.bfwi_share},
           {"mean_log_wage", r.mean_log_wage}};
}

void to_json(json& j, const MomentSet& m) {
  j = json{{"wfwi_weighted", m.wfwi_weighted},
           {"var_of_within_var", m.var_of_within_var},
           {"wfwi_unweighted", m.wfwi_unweighted},
           {"var_log_wage", m.var_log_wage},
           {"mean_log_wage", m.mean_log_wage}};
}

void to_json(json& j, const AkmReport& r) {
  j = json{{"var_wfe", r.var_wfe},
           {"var_ffe", r.var_ffe},
           {"two_cov", r.two_cov},
           {"var_avg_wfe", r.var_avg_wfe},
           {"corr_wfe_ffe", r.corr_wfe_ffe}};
}

void to_json(json& j, const MeasuredMoments& m) {
  j = json{{"wfwi_weighted", m.wfwi_weighted},
           {"var_of_within_var", m.var_of_within_var},
           {"wfwi_unweighted", m.wfwi_unweighted},
           {"var_log_wage", m.var_log_wage},
           {"mean_log_wage", m.mean_log_wage},
           {"bfwi", m.bfwi},
           {"wfwi", m.wfwi},
           {"n_workers", m.n_workers},
           {"n_firms", m.n_firms},
           {"n_firms_excluded", m.n_firms_excluded},
           {"var_of_within_var_raw", m.var_of_within_var_raw},
           {"vov_clamped", m.vov_clamped},
           {"degenerate_wages", m.degenerate_wages}};
}

void to_json(json& j, const CalibrationResult& r) {
  const auto bounds = [](const ParamsBounds& b) {
    return json{{"sigma_x", b.sigma_x}, {"sigma_theta", b.sigma_theta},
                {"c_a", b.c_a},         {"c_l", b.c_l},
                {"ln_A", b.ln_A},       {"sigma", b.sigma}};
  };
  json reps = json::array();
  for (const ReplicateEstimate& e : r.per_replicate) {
    json rep{{"seed", e.seed}, {"ok", e.ok}};
    if (e.ok) {
      rep["params"] = e.params;
      rep["sigma"] = e.sigma;
    } else {
      rep["error"] = e.error;
    }
    reps.push_back(std::move(rep));
  }
  j = json{{"central", r.central},
           {"central_sigma", r.central_sigma},
           {"ci_low", bounds(r.ci_low)},
           {"ci_high", bounds(r.ci_high)},
           {"n_replicates", r.n_replicates},
           {"n_failed", r.n_failed},
           {"replicates", std::move(reps)}};
}

void to_json(json& j, const CounterfactualTable& t) {
  json outcomes = json::object();
  for (int o = 0; o < OutcomeVector::kCount; ++o) {
    json per = json::object();
    for (int p = 0; p < 4; ++p) {
      const char* pn = primitive_name(kPrimitives[p]);
      per[pn] = json{{"change", t.attribution[p][o]},
                     {"share_pct", std::isnan(t.share[p][o])
                                       ? json(nullptr)
                                       : json(t.share[p][o])}};
    }
    outcomes[OutcomeVector::name(o)] =
        json{{"total", t.total[o]},
             {"start", t.start[o]},
             {"end", t.end[o]},
             {"by_primitive", std::move(per)}};
  }
  j = json{{"outcomes", std::move(outcomes)}};
}

std::string counterfactual_csv(const CounterfactualTable& t) {
  std::ostringstream os;
  os.precision(12);
  os << "outcome,quantity";
  for (int p = 0; p < 4; ++p) os << ',' << primitive_name(kPrimitives[p]);
  os << ",total\n";
  for (int o = 0; o < OutcomeVector::kCount; ++o) {
    os << OutcomeVector::name(o) << ",change";
    for (int p = 0; p < 4; ++p) os << ',' << t.attribution[p][o];
    os << ',' << t.total[o] << '\n';
    os << OutcomeVector::name(o) << ",share_pct";
    for (int p = 0; p < 4; ++p) {
      os << ',';
      if (!std::isnan(t.share[p][o])) os << t.share[p][o];
    }
    os << ',';
    if (std::abs(t.total[o]) >= 1e-12) os << 100.0;
    os << '\n';
  }
  return os.str();
}

}  // namespace sorteq
