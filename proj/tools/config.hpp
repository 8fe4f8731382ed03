#pragma once

// Flat key = value configuration with a per-command schema.
//
//   # comment
//   prior = bg:0,1e6,0.2
//   N = 2000
//
// Values are type-checked when they are set, so a bad file fails before any
// computation. Later sources override earlier ones: schema defaults, then the
// file, then command-line flags.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "slm/scalar_channel.hpp"

namespace slmtk {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KeyType { Int, Real, Bool, Prior, Text };

struct KeySpec {
  std::string name;
  KeyType type;
  std::string default_value;
  std::string help;
};

class Config {
 public:
  explicit Config(std::vector<KeySpec> schema);

  void load_file(const std::filesystem::path& path);
  /// `origin` prefixes error messages, e.g. "run.cfg:7" or "--seed".
  void set(const std::string& key, const std::string& value, const std::string& origin);
  bool is_set(const std::string& key) const;

  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  slm::ScalarPrior get_prior(const std::string& key) const;
  std::string get_text(const std::string& key) const;

  /// Resolved key/value pairs in schema order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  const std::vector<KeySpec>& schema() const noexcept { return schema_; }

 private:
  const KeySpec& spec(const std::string& key) const;
  const std::string& raw(const std::string& key) const;

  std::vector<KeySpec> schema_;
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> explicit_;
};

}  // namespace slmtk
