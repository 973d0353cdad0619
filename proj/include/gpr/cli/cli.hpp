#pragma once

namespace gpr {

/// Entry point of the `gpr` tool. Returns 0 on success, 1 on usage or
/// validation errors, 2 on internal errors.
int run_cli(int argc, const char* const* argv);

}  // namespace gpr
