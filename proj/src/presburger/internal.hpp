#pragma once

#include <cstdint>

#include "bpp/presburger.hpp"

namespace bpp::pa::detail {

std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);
std::int64_t lcm(std::int64_t a, std::int64_t b);

/// Scoped node ceiling for the calling thread. Restores the enclosing budget
/// on exit so nested calls do not reset an outer count.
class NodeBudget {
public:
    explicit NodeBudget(std::uint64_t limit);
    ~NodeBudget();
    NodeBudget(const NodeBudget&) = delete;
    NodeBudget& operator=(const NodeBudget&) = delete;

private:
    std::uint64_t saved_created_;
    std::uint64_t saved_limit_;
};

// Normalized atoms: t = 0, t <= 0, m | t.
Formula eq0(const Term& t);
Formula le0(const Term& t);
Formula dvd(std::int64_t m, const Term& t);

Formula mk_and(std::vector<Formula> fs);
Formula mk_or(std::vector<Formula> fs);

} // namespace bpp::pa::detail
