#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lcns/io.hpp"
#include "lcns/model.hpp"

namespace lcns::cli {

inline constexpr const char* kVersion = "1.0.0";

enum class KnobType { Int, Real, Text, IntList, Bool };

struct KnobSpec {
  std::string name;
  KnobType type = KnobType::Real;
  std::optional<std::string> default_value;  // nullopt: required
  double lo = 0.0, hi = 0.0;                 // numeric range, inclusive unless lo_open
  bool lo_open = false;
  std::vector<std::string> choices;          // Text knobs with a closed vocabulary
};

const std::vector<std::string>& command_names();
const std::vector<KnobSpec>& command_knobs(const std::string& command);

struct RunConfig {
  std::string system;  // barotropic | nonbarotropic
  SystemParams params;
  std::string command;
  // Every knob of the command in table order, with defaults filled in, in canonical text form.
  std::vector<std::pair<std::string, std::string>> knobs;
  std::string out_dir = "out";
  std::string text;  // raw config bytes, hashed into the manifest

  const std::string& get(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  long long integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;
  std::uint64_t seed() const;  // 0 when the command has no seed knob
};

// Throws ConfigError naming the offending key, and its line when it appears in the text.
RunConfig parse_config(const std::string& text);

struct RunOptions {
  std::optional<std::string> out_dir;
  int threads = 1;
  bool verify = false;
};

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;  // written, relative to the output directory
};

// Runs one config. Errors are reported on `err` and mapped to exit codes 1 (config/IO), 2 (domain),
// 3 (numerical, including a failed --verify).
RunResult run(const std::string& config_path, const RunOptions& opt, std::ostream& out, std::ostream& err);
RunResult run_config(const RunConfig& cfg, const RunOptions& opt, std::ostream& out, std::ostream& err);

io::Json params_json(const SystemParams& p);

int main(int argc, char** argv);

}  // namespace lcns::cli
