#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"
#include "slm/csv.hpp"

namespace slmtk {

using Json = nlohmann::ordered_json;

struct RunContext {
  std::filesystem::path out_dir;
  std::vector<std::string> artifacts;
  Json results = Json::object();

  void write(const std::string& name, const std::string& content);
  void write_csv(const std::string& name, const slm::CsvWriter& csv) { write(name, csv.str()); }
};

struct Command {
  std::string name;
  std::string help;
  std::vector<KeySpec> keys;  // in addition to the common keys
  std::function<void(const Config&, RunContext&)> run;
};

/// Keys every command accepts.
std::vector<KeySpec> common_keys();

const std::vector<Command>& commands();

}  // namespace slmtk
