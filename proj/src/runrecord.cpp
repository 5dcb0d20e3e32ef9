#include "gazekit/runrecord.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

#include "gazekit/common.hpp"

namespace gazekit {

void RunRecord::write(const std::string& path) const {
  nlohmann::json j;
  j["command"] = command;
  if (!config_json.empty()) {
    j["config"] = nlohmann::json::parse(config_json, nullptr, false);
    if (j["config"].is_discarded()) j["config"] = config_json;
  }
  j["seed"] = seed;
  j["hashes"] = hashes;
  j["metrics"] = metrics;
  j["notes"] = notes;
  j["wall_seconds"] = wall_seconds;
  j["status"] = status;
  if (!error_code.empty()) {
    j["error"] = {{"code", error_code}, {"message", error_message}};
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write run record: " + path);
  f << j.dump(1) << "\n";
}

}  // namespace gazekit
