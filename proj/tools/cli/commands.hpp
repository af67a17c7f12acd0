#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "moc/error.hpp"

namespace moc::cli {

/// One command's result, serialized as a single JSON object.
struct Report {
  std::string command;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json outputs = nlohmann::json::object();
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
  nlohmann::json to_json() const;
};

Report cmd_svo(const std::filesystem::path& embeddings, double delta);

Report cmd_spd(const std::filesystem::path& current, const std::filesystem::path& target, double eps);

Report cmd_descriptor(const std::filesystem::path& stack_dir, int patch, double eps,
                      const std::optional<std::filesystem::path>& out);

/// target is one of "spd", "svo", "harness"; `satisfied` switches the svo
/// check to a configuration that already satisfies the ordering.
Report cmd_gradcheck(const std::string& target, std::uint64_t seed, bool satisfied = false);

/// seed, when given, overrides the config file's seed.
Report cmd_optimize(const std::filesystem::path& config, std::optional<std::uint64_t> seed,
                    const std::filesystem::path& out, double tol_spd = 1e-3);

nlohmann::json error_json(const std::string& command, const Error& e);

/// Full command-line entry point. Reports go to `out`, error reports to `err`.
/// Returns 0 on success, 1 on a failed command or check, 2 on usage errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace moc::cli
