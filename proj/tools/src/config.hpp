#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace labornet::cli {

struct KeySpec {
  std::string key;
  std::string default_value;
};

// key=value settings restricted to a fixed schema. Later sources override
// earlier ones: defaults, then the config file, then command-line values.
class RunConfig {
 public:
  explicit RunConfig(std::vector<KeySpec> schema);

  // '#' starts a comment; blank lines are skipped. Unknown keys throw.
  void load_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);

  const std::string& text(const std::string& key) const;
  // Throws InputError naming the key when unset.
  const std::string& required(const std::string& key) const;
  double number(const std::string& key) const;
  std::uint64_t unsigned_int(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<std::string> items(const std::string& key, char sep = ',') const;

  // Every key in schema order; reloading this text reproduces the run.
  std::string resolved() const;

 private:
  std::vector<KeySpec> schema_;
  std::map<std::string, std::string> values_;
};

}  // namespace labornet::cli
