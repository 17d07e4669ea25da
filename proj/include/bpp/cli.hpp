#pragma once
// The bpp command line. Exit codes: 0 valid or Related, 1 Distinguished,
// 2 usage or input error, 3 Inconclusive or resource limit.

#include <iosfwd>
#include <string>
#include <vector>

namespace httplib {
class Server;
}

namespace bpp {

class SessionStore;

namespace cli {

enum Exit : int { kOk = 0, kDistinguished = 1, kUsage = 2, kInconclusive = 3 };

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

/// Registers the session routes on `server`.
void install_routes(httplib::Server& server, SessionStore& store);

} // namespace cli
} // namespace bpp
