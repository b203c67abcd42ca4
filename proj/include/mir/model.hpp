#pragma once

// SpectralModel and its text form:
//   arfima(d=0.3,ar=[-0.5],ma=[0.7],var=1)   fgn(h=0.7)   powerlaw(d=0.2,c1=5,beta=0.5)
// AR and MA coefficients follow (1 + a1 B + ... ) X = (1 + m1 B + ...) eps, so
// ar=[-0.5] is X_t - 0.5 X_{t-1} = eps_t.

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mir/error.hpp"

namespace mir {

enum class ModelKind { arfima, fgn, powerlaw };

struct SpectralModel {
  ModelKind kind = ModelKind::arfima;
  double d = 0.0;  // arfima, powerlaw
  std::vector<double> ar, ma;
  double var = 1.0;
  double hurst = 0.5;  // fgn
  double c1 = 0.0, beta = 1.0;

  static SpectralModel arfima(double d, std::vector<double> ar = {}, std::vector<double> ma = {}, double var = 1.0) {
    SpectralModel m;
    m.kind = ModelKind::arfima;
    m.d = d;
    m.ar = std::move(ar);
    m.ma = std::move(ma);
    m.var = var;
    m.validate();
    return m;
  }
  static SpectralModel fgn(double h) {
    SpectralModel m;
    m.kind = ModelKind::fgn;
    m.hurst = h;
    m.validate();
    return m;
  }
  static SpectralModel powerlaw(double d, double c1, double beta) {
    SpectralModel m;
    m.kind = ModelKind::powerlaw;
    m.d = d;
    m.c1 = c1;
    m.beta = beta;
    m.validate();
    return m;
  }

  double memory() const { return kind == ModelKind::fgn ? hurst - 0.5 : d; }
  bool integrated() const { return memory() >= 0.5; }

  // the same variant with d - 1
  SpectralModel differenced() const {
    if (kind == ModelKind::fgn) throw Error(Errc::domain, "fgn has no integrated form");
    SpectralModel m = *this;
    m.d -= 1.0;
    return m;
  }

  SpectralModel stationary_form() const { return integrated() ? differenced() : *this; }

  // closed_below admits d = -1/2, the differenced form of d = 1/2; the stationary
  // routes (autocovariance, spectral quadrature) accept it, user models do not
  void validate(bool closed_below = false) const {
    const bool low_ok = closed_below ? d >= -0.5 : d > -0.5;
    switch (kind) {
      case ModelKind::arfima:
        if (!(low_ok && d < 1.5)) throw Error(Errc::domain, "arfima: d must lie in (-0.5, 1.5)");
        if (!(var > 0.0)) throw Error(Errc::domain, "arfima: var must be > 0");
        for (double v : ar)
          if (!std::isfinite(v)) throw Error(Errc::domain, "arfima: non-finite ar coefficient");
        for (double v : ma)
          if (!std::isfinite(v)) throw Error(Errc::domain, "arfima: non-finite ma coefficient");
        if (!ar.empty() && max_reciprocal_root(ar) >= 1.0)
          throw Error(Errc::domain, "arfima: AR polynomial has a root on or inside the unit circle");
        break;
      case ModelKind::fgn:
        if (!(hurst > 0.0 && hurst < 1.0)) throw Error(Errc::domain, "fgn: h must lie in (0, 1)");
        break;
      case ModelKind::powerlaw:
        if (!(low_ok && d < 1.5)) throw Error(Errc::domain, "powerlaw: d must lie in (-0.5, 1.5)");
        if (!(c1 >= 0.0)) throw Error(Errc::domain, "powerlaw: c1 must be >= 0");
        if (!(beta > 0.0)) throw Error(Errc::domain, "powerlaw: beta must be > 0");
        break;
    }
  }

  // largest modulus among the reciprocal roots of 1 + a1 z + ... + aP z^P
  static double max_reciprocal_root(const std::vector<double>& a) {
    const int P = static_cast<int>(a.size());
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(P, P);
    for (int k = 0; k < P; ++k) C(0, k) = -a[k];
    for (int k = 1; k < P; ++k) C(k, k - 1) = 1.0;
    return C.eigenvalues().cwiseAbs().maxCoeff();
  }

  std::string to_string() const {
    std::ostringstream os;
    os.precision(12);
    auto list = [&](const std::vector<double>& v) {
      os << '[';
      for (size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
      os << ']';
    };
    switch (kind) {
      case ModelKind::arfima:
        os << "arfima(d=" << d << ",ar=";
        list(ar);
        os << ",ma=";
        list(ma);
        os << ",var=" << var << ')';
        break;
      case ModelKind::fgn: os << "fgn(h=" << hurst << ')'; break;
      case ModelKind::powerlaw: os << "powerlaw(d=" << d << ",c1=" << c1 << ",beta=" << beta << ')'; break;
    }
    return os.str();
  }
};

namespace detail {

class ModelParser {
 public:
  explicit ModelParser(const std::string& s) : s_(s) {}

  SpectralModel parse() {
    skip();
    const size_t name_at = pos_;
    const std::string name = ident();
    SpectralModel m;
    if (name == "arfima")
      m.kind = ModelKind::arfima;
    else if (name == "fgn")
      m.kind = ModelKind::fgn;
    else if (name == "powerlaw")
      m.kind = ModelKind::powerlaw;
    else
      fail(name_at, "unknown model '" + name + "' (expected arfima, fgn or powerlaw)");
    expect('(');
    bool have_h = false, have_d = false;
    skip();
    if (peek() != ')') {
      for (;;) {
        skip();
        const size_t key_at = pos_;
        const std::string key = ident();
        expect('=');
        skip();
        if (m.kind == ModelKind::arfima && key == "d") {
          m.d = number();
        } else if (m.kind == ModelKind::arfima && key == "ar") {
          m.ar = list();
        } else if (m.kind == ModelKind::arfima && key == "ma") {
          m.ma = list();
        } else if (m.kind == ModelKind::arfima && key == "var") {
          m.var = number();
        } else if (m.kind == ModelKind::fgn && key == "h") {
          m.hurst = number();
          have_h = true;
        } else if (m.kind == ModelKind::powerlaw && key == "d") {
          m.d = number();
          have_d = true;
        } else if (m.kind == ModelKind::powerlaw && key == "c1") {
          m.c1 = number();
        } else if (m.kind == ModelKind::powerlaw && key == "beta") {
          m.beta = number();
        } else {
          fail(key_at, "unknown parameter '" + key + "' for " + name);
        }
        skip();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect(')');
    skip();
    if (pos_ != s_.size()) fail(pos_, "trailing characters");
    if (m.kind == ModelKind::fgn && !have_h) fail(name_at, "fgn needs h");
    if (m.kind == ModelKind::powerlaw && !have_d) fail(name_at, "powerlaw needs d");
    try {
      m.validate();
    } catch (const Error& e) {
      // well-formed but out of range: keep the domain code, add the position
      throw Error(e.code(), "model spec column " + std::to_string(name_at + 1) + ": " + e.what());
    }
    return m;
  }

 private:
  [[noreturn]] void fail(size_t at, const std::string& msg) const {
    throw Error(Errc::parse, "model spec column " + std::to_string(at + 1) + ": " + msg);
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip();
    if (peek() != c) fail(pos_, std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string ident() {
    const size_t b = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (b == pos_) fail(b, "expected a name");
    return s_.substr(b, pos_ - b);
  }
  double number() {
    skip();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail(pos_, "expected a number");
    pos_ += static_cast<size_t>(end - begin);
    if (!std::isfinite(v)) fail(pos_, "number out of range");
    return v;
  }
  std::vector<double> list() {
    expect('[');
    std::vector<double> v;
    skip();
    if (peek() == ']') {
      ++pos_;
      return v;
    }
    for (;;) {
      v.push_back(number());
      skip();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect(']');
      return v;
    }
  }

  const std::string& s_;
  size_t pos_ = 0;
};

}  // namespace detail

inline SpectralModel parse_model(const std::string& spec) { return detail::ModelParser(spec).parse(); }

}  // namespace mir
