#include "bpp/cli.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "bpp/corpus.hpp"
#include "bpp/session.hpp"

namespace bpp::cli {
namespace {

using io::json;

ProcessDescription load(const std::string& src, std::istream& in) {
    if (src == "-") {
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_description(ss.str());
    }
    if (src.starts_with("corpus:")) {
        auto spec = src.substr(7);
        unsigned k = 1;
        if (auto colon = spec.find(':'); colon != std::string::npos) {
            k = static_cast<unsigned>(std::stoul(spec.substr(colon + 1)));
            spec = spec.substr(0, colon);
        }
        return corpus::build(spec, k);
    }
    std::ifstream f(src);
    if (!f) throw Error("cannot read " + src);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_description(ss.str());
}

int exit_for(Outcome o) {
    switch (o) {
    case Outcome::Related: return kOk;
    case Outcome::Distinguished: return kDistinguished;
    case Outcome::Inconclusive: return kInconclusive;
    }
    return kUsage;
}

Regime regime_arg(const std::string& s) {
    auto r = parse_regime(s);
    if (!r) throw Error("unknown regime '" + s + "' (sl, ll, word, parikh)");
    return *r;
}

struct CapsArgs {
    StepCaps caps;
    bool stability = false;
    void attach(CLI::App* app) {
        app->add_option("--silent-budget", caps.silent_budget, "S: silent steps per Spoiler move")
            ->capture_default_str();
        app->add_option("--size-cap", caps.size_cap, "K: largest configuration explored")->capture_default_str();
        app->add_option("--word-cap", caps.word_cap, "W: longest Spoiler word")->capture_default_str();
        app->add_flag("--stability", stability, "rerun at K, K+2, K+4 and report agreement");
    }
};

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

int play(const ProcessDescription& desc, const std::string& text, const Configuration& a, const Configuration& b,
         Regime regime, unsigned level, Role role, const StepCaps& caps, std::istream& in, std::ostream& out,
         std::ostream& err) {
    auto s = GameSession::start("play", SessionConfig{text, a, b, regime, level, role, caps});
    auto show = [&] {
        err << "level " << s.level_remaining() << ": " << render(desc, s.current().first) << " | "
            << render(desc, s.current().second) << '\n';
        if (auto p = s.pending())
            err << "engine plays " << io::to_json(desc, *p).dump() << '\n';
        auto moves = s.legal_moves();
        for (std::size_t i = 0; i < moves.size(); ++i)
            err << "  [" << i << "] " << io::to_json(desc, moves[i]).dump() << '\n';
    };
    std::string line;
    while (!s.winner()) {
        show();
        err << "> " << std::flush;
        if (!std::getline(in, line) || line.empty()) break;
        try {
            auto moves = s.legal_moves();
            Move m;
            if (line.find_first_not_of("0123456789 ") == std::string::npos) {
                auto i = std::stoul(line);
                if (i >= moves.size()) throw IllegalMove("no move " + line);
                m = moves[i];
            } else {
                m = io::move_from_json(desc, json::parse(line));
            }
            s.play_round(m);
        } catch (const std::exception& e) {
            err << "rejected: " << e.what() << '\n';
        }
    }
    if (s.winner()) err << (*s.winner() == role ? "you win" : "you lose") << '\n';
    emit(out, s.view());
    return kOk;
}

pa::Formula formula_for(const ProcessDescription& desc, const std::string& kind, Regime regime, unsigned level,
                        const std::string& action, bool raw) {
    if (kind == "psi") return raw ? approximant_formula_raw(desc, regime, level) : approximant_formula(desc, regime, level);
    if (kind == "reach") return reach_formula(desc);
    auto a = desc.find_action(action);
    if (!a) throw Error("unknown action '" + action + "'");
    if (kind == "wstep") return wstep_formula(desc, *a);
    if (kind == "step") return step_formula(desc, *a);
    throw Error("unknown formula kind '" + kind + "' (psi, reach, wstep, step)");
}

} // namespace

void install_routes(httplib::Server& srv, SessionStore& store) {
    auto send = [](httplib::Response& res, int status, const json& j) {
        res.status = status;
        res.set_content(j.dump(), "application/json");
    };
    srv.set_pre_routing_handler([&store](const httplib::Request&, httplib::Response& res) {
        store.evict();
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
        return httplib::Server::HandlerResponse::Unhandled;
    });
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    srv.Post("/session", [&store, send](const httplib::Request& req, httplib::Response& res) {
        try {
            send(res, 201, store.create(json::parse(req.body)));
        } catch (const json::exception& e) {
            send(res, 400, {{"error", std::string("bad JSON: ") + e.what()}});
        } catch (const Error& e) {
            send(res, 400, {{"error", e.what()}});
        }
    });
    srv.Post(R"(/session/([^/]+)/move)", [&store, send](const httplib::Request& req, httplib::Response& res) {
        try {
            auto r = store.move(req.matches[1], json::parse(req.body));
            send(res, r.contains("error") ? 409 : 200, r);
        } catch (const SessionStore::NotFound& e) {
            send(res, 404, {{"error", e.what()}});
        } catch (const json::exception& e) {
            send(res, 400, {{"error", std::string("bad JSON: ") + e.what()}});
        } catch (const Error& e) {
            send(res, 400, {{"error", e.what()}});
        }
    });
    srv.Get(R"(/session/([^/]+))", [&store, send](const httplib::Request& req, httplib::Response& res) {
        if (auto v = store.view(req.matches[1])) send(res, 200, *v);
        else send(res, 404, {{"error", "no session '" + std::string(req.matches[1]) + "'"}});
    });
    srv.Delete(R"(/session/([^/]+))", [&store, send](const httplib::Request& req, httplib::Response& res) {
        if (store.erase(req.matches[1])) res.status = 204;
        else send(res, 404, {{"error", "no session '" + std::string(req.matches[1]) + "'"}});
    });
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Approximant games and equivalence checking for BPP processes", "bpp"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    std::string file, left, right, regime_s = "sl", backend_s = "bounded", role_s = "spoiler";
    unsigned level = 1, max_level = 4, steps = 3;
    bool parallel = false, semidecide = false;
    CapsArgs caps;

    auto* validate = app.add_subcommand("validate", "parse and check a description");
    validate->add_option("file", file, "description file, '-' or corpus:NAME[:K]")->required();

    std::vector<std::string> procs;
    auto* norm_cmd = app.add_subcommand("norm", "variable norms, and norms of given processes");
    norm_cmd->add_option("file", file)->required();
    norm_cmd->add_option("process", procs);

    auto* classify_cmd = app.add_subcommand("classify", "structural report");
    classify_cmd->add_option("file", file)->required();
    caps.attach(classify_cmd);

    auto* check = app.add_subcommand("check", "decide the level-n approximant for a pair");
    check->add_option("file", file)->required();
    check->add_option("left", left)->required();
    check->add_option("right", right)->required();
    check->add_option("--regime", regime_s, "sl, ll, word or parikh")->capture_default_str();
    check->add_option("--level", level)->capture_default_str();
    check->add_option("--backend", backend_s, "bounded or symbolic")->capture_default_str();
    check->add_flag("--parallel", parallel, "fan out Spoiler's root moves");
    caps.attach(check);

    auto* distinguish = app.add_subcommand("distinguish", "smallest distinguishing level");
    distinguish->add_option("file", file)->required();
    distinguish->add_option("left", left)->required();
    distinguish->add_option("right", right)->required();
    auto* regime_opt = distinguish->add_option("--regime", regime_s, "omit to pick from the class report");
    distinguish->add_option("--max-level", max_level)->capture_default_str();
    distinguish->add_flag("--semidecide", semidecide, "grow the caps over a schedule");
    distinguish->add_option("--schedule-steps", steps)->capture_default_str();
    distinguish->add_flag("--parallel", parallel);
    caps.attach(distinguish);

    auto* play_cmd = app.add_subcommand("play", "play the game on stdin against the engine");
    play_cmd->add_option("file", file)->required();
    play_cmd->add_option("left", left)->required();
    play_cmd->add_option("right", right)->required();
    play_cmd->add_option("--regime", regime_s)->capture_default_str();
    play_cmd->add_option("--level", level)->capture_default_str();
    play_cmd->add_option("--role", role_s, "spoiler or duplicator")->capture_default_str();
    caps.attach(play_cmd);

    std::string kind = "psi", action, format = "internal", output;
    bool raw = false;
    auto* emit_cmd = app.add_subcommand("emit", "print a Presburger formula");
    emit_cmd->add_option("file", file)->required();
    emit_cmd->add_option("--formula", kind, "psi, reach, wstep or step")->capture_default_str();
    emit_cmd->add_option("--regime", regime_s)->capture_default_str();
    emit_cmd->add_option("--level", level)->capture_default_str();
    emit_cmd->add_option("--action", action, "action for wstep/step");
    emit_cmd->add_option("--format", format, "internal or smtlib")->capture_default_str();
    emit_cmd->add_flag("--raw", raw, "psi with quantifiers left in place");
    emit_cmd->add_option("-o,--output", output);

    std::string name;
    unsigned k = 1;
    auto* corpus_cmd = app.add_subcommand("corpus", "built-in systems");
    corpus_cmd->require_subcommand(1);
    auto* corpus_build = corpus_cmd->add_subcommand("build", "write a corpus system");
    corpus_build->add_option("name", name)->required();
    corpus_build->add_option("--k", k)->capture_default_str();
    corpus_build->add_option("-o,--output", output);
    auto* corpus_list = corpus_cmd->add_subcommand("list", "list corpus systems");

    unsigned port = 8765, idle = 1800;
    auto* serve = app.add_subcommand("serve", "HTTP+JSON game sessions on localhost");
    serve->add_option("--port", port, "0 picks a free port")->capture_default_str();
    serve->add_option("--idle-timeout", idle, "seconds before an idle session is dropped")->capture_default_str();

    std::vector<const char*> argv{"bpp"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }

    try {
        if (*corpus_list) {
            json j = json::array();
            for (const auto& n : corpus::names()) j.push_back({{"name", n}, {"parameterized", corpus::parameterized(n)}});
            emit(out, j);
            return kOk;
        }
        if (*corpus_build) {
            auto text = render(corpus::build(name, k));
            if (output.empty()) {
                out << text;
                return kOk;
            }
            std::ofstream f(output);
            if (!f || !(f << text)) throw Error("cannot write " + output);
            emit(out, {{"name", name}, {"k", k}, {"output", output}});
            return kOk;
        }
        if (*serve) {
            httplib::Server srv;
            SessionStore store{std::chrono::seconds(idle)};
            install_routes(srv, store);
            int bound = port == 0 ? srv.bind_to_any_port("127.0.0.1")
                                  : (srv.bind_to_port("127.0.0.1", static_cast<int>(port)) ? int(port) : -1);
            if (bound < 0) throw Error("cannot bind 127.0.0.1:" + std::to_string(port));
            out << json{{"listening", "http://127.0.0.1:" + std::to_string(bound)}}.dump() << std::endl;
            srv.listen_after_bind();
            return kOk;
        }

        auto desc = load(file, in);
        for (const auto& w : desc.warnings()) err << file << ": warning: " << w << '\n';

        if (*validate) {
            json vars = json::array(), acts = json::array();
            for (std::uint32_t v = 0; v < desc.variable_count(); ++v) vars.push_back(desc.variable_name(VariableId{v}));
            for (std::uint32_t a = 1; a < desc.action_count(); ++a) acts.push_back(desc.action_name(ActionId{a}));
            emit(out, {{"valid", true},
                       {"variables", vars},
                       {"actions", acts},
                       {"rules", desc.rules().size()},
                       {"warnings", desc.warnings()}});
            return kOk;
        }
        if (*norm_cmd) {
            json ps = json::object();
            for (const auto& p : procs) {
                auto n = norm(desc, parse_process(p, desc));
                ps[p] = n.is_infinite() ? json("inf") : json(n.value());
            }
            emit(out, {{"variables", io::norms_to_json(desc)}, {"processes", ps}});
            return kOk;
        }
        if (*classify_cmd) {
            emit(out, io::to_json(classify(desc, caps.caps)));
            return kOk;
        }
        if (*emit_cmd) {
            auto fmt = format == "internal" ? pa::ExportFormat::Internal
                       : format == "smtlib" ? pa::ExportFormat::SmtLib2
                                            : throw Error("unknown format '" + format + "' (internal, smtlib)");
            auto text = pa::export_formula(formula_for(desc, kind, regime_arg(regime_s), level, action, raw), fmt);
            if (output.empty()) {
                emit(out, {{"formula", kind}, {"format", format}, {"text", text}});
            } else {
                std::ofstream f(output);
                if (!f || !(f << text << '\n')) throw Error("cannot write " + output);
                emit(out, {{"formula", kind}, {"format", format}, {"output", output}});
            }
            return kOk;
        }

        auto a = parse_process(left, desc), b = parse_process(right, desc);
        GameOptions opts{caps.stability, parallel};

        if (*check) {
            auto backend = parse_backend(backend_s);
            if (!backend) throw Error("unknown backend '" + backend_s + "' (bounded, symbolic)");
            auto regime = regime_arg(regime_s);
            auto v = check_level(desc, a, b, regime, level, *backend, caps.caps, opts);
            emit(out, io::to_json(desc, v, regime));
            return exit_for(v.outcome);
        }
        if (*distinguish) {
            if (regime_opt->count() && !semidecide) {
                auto regime = regime_arg(regime_s);
                auto v = distinguishing_level(desc, a, b, regime, caps.caps, max_level, opts);
                emit(out, io::to_json(desc, v, regime));
                return exit_for(v.outcome);
            }
            SemidecideBudget budget{max_level, steps, std::nullopt};
            if (regime_opt->count()) budget.regime = regime_arg(regime_s);
            auto r = semidecide_inequivalence(desc, a, b, budget);
            for (const auto& w : r.warnings) err << "warning: " << w << '\n';
            auto j = io::to_json(desc, r.verdict, r.regime);
            j["warnings"] = r.warnings;
            emit(out, j);
            return exit_for(r.verdict.outcome);
        }
        if (*play_cmd) {
            auto role = parse_role(role_s);
            if (!role) throw Error("role must be spoiler or duplicator");
            return play(desc, render(desc), a, b, regime_arg(regime_s), level, *role, caps.caps, in, out, err);
        }
    } catch (const pa::ResourceExhausted& e) {
        err << "bpp: " << e.what() << '\n';
        emit(out, {{"outcome", "Inconclusive"}, {"reason", e.what()}});
        return kInconclusive;
    } catch (const Error& e) {
        err << "bpp: " << (file.empty() ? "" : file + ": ") << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "bpp: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

} // namespace bpp::cli
