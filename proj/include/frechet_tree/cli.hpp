#pragma once

#include <ostream>

namespace frechet_tree {

/// Exit codes: 0 success, 1 validation or usage error (nothing written to
/// `out`), 2 an experiment verdict failed (report still written).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace frechet_tree
