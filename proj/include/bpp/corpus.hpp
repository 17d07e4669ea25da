#pragma once
// Built-in systems and expected-result fixtures.

#include <string>
#include <vector>

#include "bpp/approx.hpp"

namespace bpp::corpus {

/// example1 | example1_extended | example2 | stacked_gadget | word_cex | ladder.
/// `k` counts gadget squares or ladder rungs and is ignored by the others.
ProcessDescription build(std::string_view name, unsigned k = 1);
std::vector<std::string> names();
/// True for names taking a k parameter.
bool parameterized(std::string_view name);

struct Fixture {
    std::string system;   // corpus name
    unsigned k = 1;
    std::string left, right;
    Regime regime = Regime::ShortLong;
    unsigned level = 0;
    Outcome expected = Outcome::Related;
    std::string claim;
    StepCaps caps;
};

std::vector<Fixture> fixtures();

} // namespace bpp::corpus
