#pragma once

#include <iosfwd>

namespace hepchain {

/// Exit codes: 0 success, 1 validation failure, 2 usage error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hepchain
