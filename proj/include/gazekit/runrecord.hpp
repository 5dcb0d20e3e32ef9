#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace gazekit {

// One record per CLI invocation: resolved config, seeds, hashes of inputs
// and outputs, metrics, and wall time. Written next to the command outputs.
struct RunRecord {
  std::string command;
  std::string config_json;  // fully resolved configuration
  std::uint64_t seed = 0;
  std::map<std::string, std::string> hashes;
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> notes;
  double wall_seconds = 0;
  std::string status = "ok";
  std::string error_code;
  std::string error_message;

  void write(const std::string& path) const;
};

}  // namespace gazekit
