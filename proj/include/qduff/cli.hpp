#pragma once

#include <iosfwd>

namespace qduff {

/// Entry point of the qduff command line tool. Subcommands: simulate,
/// lyapunov-sweep, classical, wigner. Returns 0 on success, 1 on numerical
/// or I/O failure, 2 on usage errors.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qduff
