#pragma once

#include <stdexcept>
#include <string>

namespace mir {

enum class Errc {
  domain,
  too_short,
  parse,
  numeric,
  not_pd,
  table,
  io,
  config,
};

inline const char* errc_tag(Errc c) {
  switch (c) {
    case Errc::domain: return "E_DOMAIN";
    case Errc::too_short: return "E_SHORT";
    case Errc::parse: return "E_PARSE";
    case Errc::numeric: return "E_NUMERIC";
    case Errc::not_pd: return "E_NOT_PD";
    case Errc::table: return "E_TABLE";
    case Errc::io: return "E_IO";
    case Errc::config: return "E_CONFIG";
  }
  return "E_UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mir
