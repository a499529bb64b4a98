#pragma once

#include <iosfwd>

namespace tlsgate {

/// Entry point of the `tlsgate` command. Exit codes: 0 success, 1 the
/// operation failed (bad domain, duplicate, refused handshake...), 2 usage
/// or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tlsgate
