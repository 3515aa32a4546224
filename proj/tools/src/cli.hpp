#pragma once

#include <iosfwd>

namespace formulab::cli {

// Stable exit-code contract.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,         // bad flags, config or schema
    kExitData = 3,          // unreadable data, missing or malformed artifact, insufficient data
    kExitPredictInput = 4,  // unseen category label at prediction time
};

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace formulab::cli
