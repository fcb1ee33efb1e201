#pragma once

namespace tbrw {

/// Entry point behind the tbrw binary. Returns 0 on success, 2 on usage or
/// configuration errors, 3 when outputs cannot be written.
int run_cli(int argc, const char* const* argv);

}  // namespace tbrw
