#include "bpp/io.hpp"

namespace bpp::io {

json to_json(const ProcessDescription& desc, const Configuration& c) {
    json j = json::object();
    for (std::uint32_t v = 0; v < c.extent(); ++v)
        if (auto k = c.count(VariableId{v})) j[desc.variable_name(VariableId{v})] = k;
    return j;
}

Configuration configuration_from_json(const ProcessDescription& desc, const json& j) {
    if (j.is_string()) return parse_process(j.get<std::string>(), desc);
    if (!j.is_object()) throw Error("configuration must be an object or process text");
    Configuration c;
    for (const auto& [name, k] : j.items()) {
        auto v = desc.find_variable(name);
        if (!v) throw Error("unknown variable '" + name + "'");
        if (!is_natural(k)) throw Error("count of '" + name + "' must be a natural number");
        if (auto n = k.get<std::uint64_t>()) {
            if (n > 1'000'000) throw Error("count of '" + name + "' is too large");
            c.add(*v, static_cast<std::uint32_t>(n));
        }
    }
    return c;
}

json to_json(const ProcessDescription& desc, const Move& m) {
    json label = json::array();
    for (auto a : m.label) label.push_back(desc.action_name(a));
    return {{"side", to_string(m.side)}, {"label", label}, {"target", to_json(desc, m.target)}};
}

Move move_from_json(const ProcessDescription& desc, const json& j) {
    if (!j.is_object()) throw Error("move must be an object");
    Move m;
    auto side = j.value("side", std::string{});
    if (side == "left") m.side = Side::Left;
    else if (side == "right") m.side = Side::Right;
    else throw Error("move side must be \"left\" or \"right\"");
    if (!j.contains("label") || !j["label"].is_array()) throw Error("move label must be an array");
    for (const auto& a : j["label"]) {
        if (!a.is_string()) throw Error("action names must be strings");
        auto id = desc.find_action(a.get<std::string>());
        if (!id) throw Error("unknown action '" + a.get<std::string>() + "'");
        m.label.push_back(*id);
    }
    if (!j.contains("target")) throw Error("move target missing");
    m.target = configuration_from_json(desc, j["target"]);
    return m;
}

json to_json(const StepCaps& caps) {
    auto s = caps.silent_budget == kUnbudgeted ? json(nullptr) : json(caps.silent_budget);
    return {{"silent_budget", s}, {"size_cap", caps.size_cap}, {"word_cap", caps.word_cap}};
}

StepCaps caps_from_json(const json& j, StepCaps base) {
    if (j.is_null()) return base;
    if (!j.is_object()) throw Error("caps must be an object");
    auto field = [&](const char* k, std::uint32_t& out) {
        if (!j.contains(k)) return;
        if (!is_natural(j[k]) || j[k].get<std::uint64_t>() > 64)
            throw Error(std::string("caps.") + k + " must be a natural number <= 64");
        out = j[k].get<std::uint32_t>();
    };
    field("silent_budget", base.silent_budget);
    field("size_cap", base.size_cap);
    field("word_cap", base.word_cap);
    return base;
}

json strategy_to_json(const ProcessDescription& desc, const StrategyNode& node) {
    json label = json::array();
    for (auto a : node.move.label) label.push_back(desc.action_name(a));
    json responses = json::array();
    for (const auto& [c, child] : node.responses)
        responses.push_back({{"config", render(desc, c)},
                             {"child", child ? strategy_to_json(desc, *child) : json(nullptr)}});
    return {{"level", node.level},
            {"side", to_string(node.move.side)},
            {"label", label},
            {"target", render(desc, node.move.target)},
            {"responses", responses}};
}

json to_json(const ProcessDescription& desc, const Verdict& v, Regime regime) {
    json j{{"outcome", to_string(v.outcome)},
           {"level", v.level},
           {"regime", to_string(regime)},
           {"backend", to_string(v.backend)},
           {"caps", to_json(v.caps)},
           {"caps_relative", v.caps_relative},
           {"pruning", {{"spoiler", v.spoiler_pruned}, {"duplicator", v.duplicator_pruned}}},
           {"stable", v.stable ? json(*v.stable) : json(nullptr)},
           {"strategy", v.strategy ? strategy_to_json(desc, *v.strategy) : json(nullptr)}};
    return j;
}

json to_json(const ClassReport& r) {
    json gens = json::object();
    for (const auto& [name, p] : r.generators) gens[name] = to_string(p);
    return {{"normed", r.normed},
            {"zero_norm_vars", r.zero_norm_vars},
            {"visible_action_count", r.visible_action_count},
            {"redundant_classes", r.redundant_classes},
            {"generators", gens},
            {"stirling_member", r.stirling_member ? json(*r.stirling_member) : json("unknown")},
            {"stribrna_member", r.stribrna_member},
            {"stribrna_reason", r.stribrna_reason},
            {"decreasing", r.decreasing},
            {"variable_order", r.variable_order ? json(*r.variable_order) : json(nullptr)},
            {"pruned", r.pruned}};
}

json norms_to_json(const ProcessDescription& desc) {
    json j = json::object();
    for (std::uint32_t v = 0; v < desc.variable_count(); ++v) {
        auto n = desc.norm_of(VariableId{v});
        j[desc.variable_name(VariableId{v})] = n.is_infinite() ? json("inf") : json(n.value());
    }
    return j;
}

} // namespace bpp::io
