#include <ltk/log.hpp>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <mutex>
#include <string>

namespace ltk::logging {

namespace {

spdlog::logger& logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("ltk");
    l->set_pattern("%Y-%m-%dT%H:%M:%S.%e [%l] %v");
    l->set_level(spdlog::level::warn);
    return l;
  }();
  return *instance;
}

}  // namespace

void init_from_env() {
  static std::once_flag once;
  std::call_once(once, [] {
    const char* env = std::getenv("LTK_LOG");
    if (!env) return;
    const std::string v(env);
    if (v == "error")
      logger().set_level(spdlog::level::err);
    else if (v == "warn")
      logger().set_level(spdlog::level::warn);
    else if (v == "info")
      logger().set_level(spdlog::level::info);
    else if (v == "debug")
      logger().set_level(spdlog::level::debug);
  });
}

void debug(std::string_view msg) {
  init_from_env();
  logger().debug(msg);
}
void info(std::string_view msg) {
  init_from_env();
  logger().info(msg);
}
void warn(std::string_view msg) {
  init_from_env();
  logger().warn(msg);
}
void error(std::string_view msg) {
  init_from_env();
  logger().error(msg);
}

}  // namespace ltk::logging
