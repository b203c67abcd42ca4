#pragma once

// Flat `key = value` config files. Lines starting with '#' or ';' are comments.

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mir/error.hpp"

namespace mir {

class FlatConfig {
 public:
  static FlatConfig parse(std::istream& is, const std::string& name = "config") {
    boost::property_tree::ptree pt;
    try {
      boost::property_tree::ini_parser::read_ini(is, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw Error(Errc::config, name + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    FlatConfig c;
    c.name_ = name;
    for (const auto& kv : pt) {
      if (!kv.second.empty()) throw Error(Errc::config, name + ": sections are not supported ([" + kv.first + "])");
      c.kv_[kv.first] = boost::algorithm::trim_copy(kv.second.data());
    }
    return c;
  }

  static FlatConfig parse_string(const std::string& text, const std::string& name = "config") {
    std::istringstream is(text);
    return parse(is, name);
  }

  static FlatConfig load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(Errc::io, "cannot open config " + path);
    return parse(is, path);
  }

  bool has(const std::string& k) const { return kv_.count(k) != 0; }

  std::string str(const std::string& k, const std::string& def) const {
    used_.insert(k);
    auto it = kv_.find(k);
    return it == kv_.end() ? def : it->second;
  }

  std::string required(const std::string& k) const {
    used_.insert(k);
    auto it = kv_.find(k);
    if (it == kv_.end() || it->second.empty()) throw Error(Errc::config, name_ + ": missing key '" + k + "'");
    return it->second;
  }

  double num(const std::string& k, double def) const {
    if (!has(k)) return def;
    return to_double(k, required(k));
  }

  long integer(const std::string& k, long def) const {
    if (!has(k)) return def;
    const std::string v = required(k);
    char* end = nullptr;
    const long out = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') throw Error(Errc::config, name_ + ": '" + k + "' is not an integer: " + v);
    return out;
  }

  bool flag(const std::string& k, bool def) const {
    if (!has(k)) return def;
    const std::string v = boost::algorithm::to_lower_copy(required(k));
    if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
    if (v == "off" || v == "false" || v == "no" || v == "0") return false;
    throw Error(Errc::config, name_ + ": '" + k + "' is not a boolean: " + v);
  }

  // comma or whitespace separated list; sep overrides the separator set
  std::vector<std::string> list(const std::string& k, const char* sep = ", \t") const {
    std::vector<std::string> out;
    if (!has(k)) return out;
    std::vector<std::string> parts;
    const std::string v = required(k);
    boost::algorithm::split(parts, v, boost::algorithm::is_any_of(sep), boost::algorithm::token_compress_on);
    for (auto& p : parts) {
      boost::algorithm::trim(p);
      if (!p.empty()) out.push_back(p);
    }
    return out;
  }

  std::vector<double> nums(const std::string& k) const {
    std::vector<double> out;
    for (const auto& s : list(k)) out.push_back(to_double(k, s));
    return out;
  }

  // keys never read; callers reject these so typos do not pass silently
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& kv : kv_)
      if (!used_.count(kv.first)) out.push_back(kv.first);
    return out;
  }

  void reject_unused() const {
    const auto u = unused();
    if (!u.empty()) throw Error(Errc::config, name_ + ": unknown key '" + u.front() + "'");
  }

  const std::string& name() const { return name_; }

 private:
  double to_double(const std::string& k, const std::string& v) const {
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') throw Error(Errc::config, name_ + ": '" + k + "' is not a number: " + v);
    return out;
  }

  std::string name_;
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> used_;
};

}  // namespace mir
