#pragma once
// JSON encodings shared by the command line and the serve API.
// Configurations are {name: count} objects, except inside strategy trees
// where they are canonical process text.

#include <json.hpp>

#include "bpp/classify.hpp"

namespace bpp::io {

using nlohmann::json;

/// Integer >= 0, signed or unsigned encoding.
inline bool is_natural(const json& j) {
    return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

json to_json(const ProcessDescription& desc, const Configuration& c);
/// Accepts {name: count} or process text.
Configuration configuration_from_json(const ProcessDescription& desc, const json& j);

json to_json(const ProcessDescription& desc, const Move& m);
/// {side: "left"|"right", label: [action names], target}.
Move move_from_json(const ProcessDescription& desc, const json& j);

json to_json(const StepCaps& caps);
/// Missing fields keep the value from `base`.
StepCaps caps_from_json(const json& j, StepCaps base = {});

json strategy_to_json(const ProcessDescription& desc, const StrategyNode& node);
json to_json(const ProcessDescription& desc, const Verdict& v, Regime regime);
json to_json(const ClassReport& r);
json norms_to_json(const ProcessDescription& desc);

} // namespace bpp::io
