#pragma once
// Interactive approximant game against the memoized solver, and the store
// behind the local serve mode.

#include <chrono>
#include <functional>

#include "bpp/io.hpp"

namespace bpp {

enum class Role { Spoiler, Duplicator };
std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view s);

struct SessionConfig {
    std::string system_text;
    Configuration left, right;
    Regime regime = Regime::ShortLong;
    unsigned level = 1;
    Role human = Role::Spoiler;
    StepCaps caps;
};

struct Round {
    Move spoiler;
    Configuration response;
    bool by_human = false; // the Spoiler move was the human's
};

class GameSession {
public:
    /// Parses the system; throws Error on bad input. When the human is
    /// Duplicator the engine opens with its first Spoiler move.
    static GameSession start(std::string id, const SessionConfig& cfg);
    /// Same, from a JSON request {system, pair: [l, r], regime, level, role, caps}.
    static GameSession start(std::string id, const io::json& request);

    /// The human's Spoiler move, or, as Duplicator, a move whose side and
    /// label repeat the pending Spoiler move and whose target is the chosen
    /// response. Throws IllegalMove (state unchanged) when not legal.
    void play_round(const Move& human);

    /// Moves the human may play now; empty once the game is over.
    std::vector<Move> legal_moves();

    const std::string& id() const { return id_; }
    unsigned level_remaining() const { return level_; }
    const std::pair<Configuration, Configuration>& current() const { return current_; }
    const std::vector<Round>& history() const { return history_; }
    const std::optional<Move>& pending() const { return pending_; }
    /// Winner once the game is over.
    std::optional<Role> winner() const { return winner_; }
    Role human() const { return human_; }
    const ProcessDescription& description() const { return *desc_; }

    io::json view();
    io::json legal_moves_json();
    io::json outcome_json() const;

private:
    GameSession() = default;
    void engine_spoiler();
    const Configuration& at(Side s) const { return s == Side::Left ? current_.first : current_.second; }
    void advance(const Move& m, const Configuration& response, bool by_human);

    std::string id_;
    std::shared_ptr<const ProcessDescription> desc_;
    std::shared_ptr<Solver> solver_;
    Regime regime_ = Regime::ShortLong;
    StepCaps caps_;
    unsigned level_ = 0;
    std::pair<Configuration, Configuration> current_;
    Role human_ = Role::Spoiler;
    std::vector<Round> history_;
    std::optional<Move> pending_;
    std::optional<Role> winner_;
    std::optional<Move> last_engine_move_;
    std::optional<Configuration> last_engine_response_;

    friend class SessionStore;
};

class IllegalMove : public Error {
public:
    using Error::Error;
};

/// Sessions by id with idle eviction. Requests on one session are
/// serialized; distinct sessions proceed concurrently.
class SessionStore {
public:
    using Clock = std::chrono::steady_clock;
    explicit SessionStore(Clock::duration idle_timeout = std::chrono::minutes(30));

    /// POST /session. Returns {id, legal_moves, ...view}.
    io::json create(const io::json& request);
    /// POST /session/{id}/move with {move}. Returns {engine_reply,
    /// level_remaining, legal_moves, outcome?}.
    io::json move(const std::string& id, const io::json& request);
    /// GET /session/{id}; nullopt when unknown or evicted.
    std::optional<io::json> view(const std::string& id);
    bool erase(const std::string& id);
    std::size_t size();
    /// Drops sessions idle for longer than the timeout.
    void evict(Clock::time_point now = Clock::now());

    class NotFound : public Error {
    public:
        using Error::Error;
    };

private:
    struct Slot {
        std::mutex mu;
        GameSession session;
        Clock::time_point touched;
    };
    std::shared_ptr<Slot> find(const std::string& id);

    std::mutex mu_;
    std::map<std::string, std::shared_ptr<Slot>> slots_;
    std::uint64_t next_id_ = 1;
    Clock::duration idle_;
};

} // namespace bpp
