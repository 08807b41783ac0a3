#pragma once

#include <json.hpp>

#include "sorteq/calibrate.hpp"
#include "sorteq/counterfactual.hpp"
#include "sorteq/measure.hpp"
#include "sorteq/model.hpp"
#include "sorteq/moments.hpp"

namespace sorteq {

void to_json(nlohmann::json& j, const ModelParams& p);
void from_json(const nlohmann::json& j, ModelParams& p);
void to_json(nlohmann::json& j, const Equilibrium& e);
void to_json(nlohmann::json& j, const WelfareReport& r);
void to_json(nlohmann::json& j, const WageReport& r);
void to_json(nlohmann::json& j, const MomentSet& m);
void to_json(nlohmann::json& j, const AkmReport& r);
void to_json(nlohmann::json& j, const MeasuredMoments& m);
void to_json(nlohmann::json& j, const CalibrationResult& r);
void to_json(nlohmann::json& j, const CounterfactualTable& t);

// Counterfactual table as CSV: one block of rows per outcome with a change
// row and a share row (percent; empty when undefined).
std::string counterfactual_csv(const CounterfactualTable& t);

}  // namespace sorteq
