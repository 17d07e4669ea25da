#include "bpp/session.hpp"

#include <algorithm>

namespace bpp {

std::string_view to_string(Role r) { return r == Role::Spoiler ? "spoiler" : "duplicator"; }

std::optional<Role> parse_role(std::string_view s) {
    if (s == "spoiler") return Role::Spoiler;
    if (s == "duplicator") return Role::Duplicator;
    return std::nullopt;
}

GameSession GameSession::start(std::string id, const SessionConfig& cfg) {
    GameSession s;
    s.id_ = std::move(id);
    s.desc_ = std::make_shared<const ProcessDescription>(parse_description(cfg.system_text));
    s.regime_ = cfg.regime;
    s.caps_ = cfg.caps;
    s.level_ = cfg.level;
    s.human_ = cfg.human;
    s.current_ = {cfg.left, cfg.right};
    for (const auto* c : {&cfg.left, &cfg.right})
        if (c->extent() > s.desc_->variable_count()) throw Error("configuration outside the description");
    s.solver_ = std::make_shared<Solver>(*s.desc_, s.regime_, s.caps_);
    if (s.level_ == 0) s.winner_ = Role::Duplicator;
    else if (s.human_ == Role::Duplicator) s.engine_spoiler();
    else if (s.legal_moves().empty()) s.winner_ = Role::Duplicator;
    return s;
}

GameSession GameSession::start(std::string id, const io::json& req) {
    if (!req.is_object()) throw Error("request must be an object");
    auto text = req.value("system", std::string{});
    if (text.empty()) text = req.value("system-text", std::string{});
    if (text.empty()) throw Error("system text missing");
    auto desc = parse_description(text);
    if (!req.contains("pair") || !req["pair"].is_array() || req["pair"].size() != 2)
        throw Error("pair must be a two-element array");
    SessionConfig cfg;
    cfg.system_text = text;
    cfg.left = io::configuration_from_json(desc, req["pair"][0]);
    cfg.right = io::configuration_from_json(desc, req["pair"][1]);
    auto regime = parse_regime(req.value("regime", std::string{"sl"}));
    if (!regime) throw Error("unknown regime");
    cfg.regime = *regime;
    if (req.contains("level")) {
        if (!io::is_natural(req["level"]) || req["level"].get<std::uint64_t>() > 32)
            throw Error("level must be a natural number <= 32");
        cfg.level = req["level"].get<unsigned>();
    }
    auto role = parse_role(req.value("role", std::string{"spoiler"}));
    if (!role) throw Error("role must be \"spoiler\" or \"duplicator\"");
    cfg.human = *role;
    cfg.caps = io::caps_from_json(req.value("caps", io::json(nullptr)));
    return start(std::move(id), cfg);
}

std::vector<Move> GameSession::legal_moves() {
    if (winner_) return {};
    if (human_ == Role::Spoiler) {
        auto ms = solver_->moves(current_.first, Side::Left);
        auto rs = solver_->moves(current_.second, Side::Right);
        ms.insert(ms.end(), rs.begin(), rs.end());
        return ms;
    }
    std::vector<Move> out;
    if (!pending_) return out;
    Side s = other(pending_->side);
    for (const auto& r : solver_->responses(at(s), *pending_)) out.push_back(Move{s, pending_->label, r});
    return out;
}

void GameSession::advance(const Move& m, const Configuration& r, bool by_human) {
    if (m.side == Side::Left) current_ = {m.target, r};
    else current_ = {r, m.target};
    history_.push_back(Round{m, r, by_human});
    --level_;
    pending_.reset();
    if (level_ == 0) winner_ = Role::Duplicator;
}

void GameSession::engine_spoiler() {
    auto ms = solver_->moves(current_.first, Side::Left);
    auto rs = solver_->moves(current_.second, Side::Right);
    ms.insert(ms.end(), rs.begin(), rs.end());
    last_engine_move_.reset();
    if (ms.empty()) {
        winner_ = Role::Duplicator;
        return;
    }
    const Move* pick = &ms.front();
    if (solver_->distinguished(current_.first, current_.second, level_)) {
        for (const auto& m : ms) {
            Side s = other(m.side);
            bool wins = true;
            for (const auto& r : solver_->responses(at(s), m)) {
                auto next = m.side == Side::Left ? std::pair{m.target, r} : std::pair{r, m.target};
                if (level_ <= 1 || !solver_->distinguished(next.first, next.second, level_ - 1)) {
                    wins = false;
                    break;
                }
            }
            if (wins) {
                pick = &m;
                break;
            }
        }
    }
    pending_ = *pick;
    last_engine_move_ = *pick;
    if (solver_->responses(at(other(pick->side)), *pick).empty()) winner_ = Role::Spoiler;
}

void GameSession::play_round(const Move& human) {
    if (winner_) throw IllegalMove("the game is over");
    auto legal = legal_moves();
    if (std::find(legal.begin(), legal.end(), human) == legal.end())
        throw IllegalMove(human_ == Role::Spoiler ? "not a legal Spoiler move" : "not a legal Duplicator response");
    last_engine_move_.reset();
    last_engine_response_.reset();
    if (human_ == Role::Duplicator) {
        advance(*pending_, human.target, false);
        if (!winner_) engine_spoiler();
        return;
    }
    Side s = other(human.side);
    const auto& rs = solver_->responses(at(s), human);
    if (rs.empty()) {
        winner_ = Role::Spoiler;
        return;
    }
    const Configuration* pick = &rs.front();
    if (level_ > 1)
        for (const auto& r : rs) {
            auto next = human.side == Side::Left ? std::pair{human.target, r} : std::pair{r, human.target};
            if (!solver_->distinguished(next.first, next.second, level_ - 1)) {
                pick = &r;
                break;
            }
        }
    Configuration r = *pick;
    last_engine_response_ = r;
    advance(human, r, true);
    if (!winner_ && legal_moves().empty()) winner_ = Role::Duplicator;
}

io::json GameSession::legal_moves_json() {
    auto j = io::json::array();
    for (const auto& m : legal_moves()) j.push_back(io::to_json(*desc_, m));
    return j;
}

io::json GameSession::outcome_json() const {
    if (!winner_) return nullptr;
    return {{"winner", to_string(*winner_)}, {"human_won", *winner_ == human_}};
}

io::json GameSession::view() {
    auto hist = io::json::array();
    for (const auto& r : history_)
        hist.push_back({{"move", io::to_json(*desc_, r.spoiler)},
                        {"response", io::to_json(*desc_, r.response)},
                        {"spoiler_player", r.by_human ? "human" : "engine"}});
    return {{"id", id_},
            {"regime", to_string(regime_)},
            {"caps", io::to_json(caps_)},
            {"role", to_string(human_)},
            {"level_remaining", level_},
            {"current", {{"left", io::to_json(*desc_, current_.first)}, {"right", io::to_json(*desc_, current_.second)}}},
            {"pending_move", pending_ ? io::to_json(*desc_, *pending_) : io::json(nullptr)},
            {"history", hist},
            {"legal_moves", legal_moves_json()},
            {"outcome", outcome_json()}};
}

SessionStore::SessionStore(Clock::duration idle_timeout) : idle_(idle_timeout) {}

std::shared_ptr<SessionStore::Slot> SessionStore::find(const std::string& id) {
    std::lock_guard lk(mu_);
    auto it = slots_.find(id);
    if (it == slots_.end()) return nullptr;
    it->second->touched = Clock::now();
    return it->second;
}

io::json SessionStore::create(const io::json& request) {
    std::string id;
    {
        std::lock_guard lk(mu_);
        id = "s" + std::to_string(next_id_++);
    }
    auto slot = std::make_shared<Slot>();
    slot->session = GameSession::start(id, request);
    slot->touched = Clock::now();
    io::json out;
    {
        std::lock_guard sl(slot->mu);
        out = slot->session.view();
        out["engine_reply"] = slot->session.last_engine_move_
                                  ? io::json{{"move", io::to_json(slot->session.description(),
                                                                  *slot->session.last_engine_move_)}}
                                  : io::json(nullptr);
    }
    std::lock_guard lk(mu_);
    slots_[id] = slot;
    return out;
}

io::json SessionStore::move(const std::string& id, const io::json& request) {
    auto slot = find(id);
    if (!slot) throw NotFound("no session '" + id + "'");
    std::lock_guard sl(slot->mu);
    auto& s = slot->session;
    if (!request.is_object() || !request.contains("move")) throw Error("request must carry a move");
    Move m;
    try {
        m = io::move_from_json(s.description(), request["move"]);
        s.play_round(m);
    } catch (const Error& e) {
        return {{"error", e.what()}, {"legal_moves", s.legal_moves_json()}, {"level_remaining", s.level_remaining()}};
    }
    io::json reply = nullptr;
    if (s.last_engine_response_) reply = {{"response", io::to_json(s.description(), *s.last_engine_response_)}};
    else if (s.last_engine_move_) reply = {{"move", io::to_json(s.description(), *s.last_engine_move_)}};
    io::json out{{"engine_reply", reply},
                 {"level_remaining", s.level_remaining()},
                 {"current",
                  {{"left", io::to_json(s.description(), s.current().first)},
                   {"right", io::to_json(s.description(), s.current().second)}}},
                 {"legal_moves", s.legal_moves_json()}};
    if (s.winner()) out["outcome"] = s.outcome_json();
    return out;
}

std::optional<io::json> SessionStore::view(const std::string& id) {
    auto slot = find(id);
    if (!slot) return std::nullopt;
    std::lock_guard sl(slot->mu);
    return slot->session.view();
}

bool SessionStore::erase(const std::string& id) {
    std::lock_guard lk(mu_);
    return slots_.erase(id) > 0;
}

std::size_t SessionStore::size() {
    std::lock_guard lk(mu_);
    return slots_.size();
}

void SessionStore::evict(Clock::time_point now) {
    std::lock_guard lk(mu_);
    std::erase_if(slots_, [&](const auto& kv) { return now - kv.second->touched > idle_; });
}

} // namespace bpp
