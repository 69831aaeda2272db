#pragma once

#include <string_view>

namespace ltk::logging {

/// Applies the LTK_LOG environment variable (error|warn|info|debug) to the
/// shared logger.  Called lazily by the helpers below; idempotent.
void init_from_env();

void debug(std::string_view msg);
void info(std::string_view msg);
void warn(std::string_view msg);
void error(std::string_view msg);

}  // namespace ltk::logging
