#include "config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "labornet/csv.hpp"
#include "labornet/errors.hpp"

namespace labornet::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

RunConfig::RunConfig(std::vector<KeySpec> schema) : schema_(std::move(schema)) {
  for (const auto& spec : schema_) values_[spec.key] = spec.default_value;
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw InputError(path.string() + ":" + std::to_string(number) + ": expected key=value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (!values_.count(key)) {
      throw InputError(path.string() + ":" + std::to_string(number) + ": unknown key " + key);
    }
    values_[key] = trim(std::string_view(body).substr(eq + 1));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) throw InputError("unknown key " + key);
  values_[key] = value;
}

const std::string& RunConfig::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InputError("unknown key " + key);
  return it->second;
}

const std::string& RunConfig::required(const std::string& key) const {
  const auto& v = text(key);
  if (v.empty()) throw InputError("missing required key " + key);
  return v;
}

double RunConfig::number(const std::string& key) const {
  return csv::parse_double(required(key), key, 0);
}

std::uint64_t RunConfig::unsigned_int(const std::string& key) const {
  const auto& v = required(key);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw InputError(key + " must be a non-negative integer, got " + v);
  }
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  const auto& v = required(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError(key + " must be true or false, got " + v);
}

std::vector<std::string> RunConfig::items(const std::string& key, char sep) const {
  std::vector<std::string> out;
  std::stringstream in(text(key));
  std::string item;
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : items(key)) out.push_back(csv::parse_double(item, key, 0));
  return out;
}

std::string RunConfig::resolved() const {
  std::string out;
  for (const auto& spec : schema_) out += spec.key + "=" + values_.at(spec.key) + "\n";
  return out;
}

}  // namespace labornet::cli
