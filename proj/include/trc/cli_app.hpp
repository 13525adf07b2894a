#pragma once

#include <iosfwd>

namespace trc {

// Entry point behind the trcsim binary; split out so tests can drive it.
// Returns 0 on success, 2 on validation errors, 1 on runtime failures.
int cli_run(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace trc
