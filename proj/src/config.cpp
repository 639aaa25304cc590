#include "aggdiff/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "aggdiff/io.hpp"

namespace aggdiff {

namespace {

struct RawValue {
  std::string text;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, RawValue>;

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& where, int line, const std::string& what) {
  throw parse_error("line " + std::to_string(line) + ": " + where + ": " + what, line);
}

class Parsed {
public:
  explicit Parsed(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const size_t comment = line.find('#');
      if (comment != std::string::npos) line.erase(comment);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(line, lineno, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) fail(line, lineno, "empty section name");
        sections_[section]; // created even if empty
        continue;
      }
      const size_t eq = line.find('=');
      if (eq == std::string::npos) fail(line, lineno, "expected `key = value`");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail(line, lineno, "empty key");
      if (section.empty()) fail(key, lineno, "key outside of any [section]");
      auto [it, fresh] = sections_[section].emplace(key, RawValue{value, lineno});
      if (!fresh) fail(section + "." + key, lineno, "duplicate key");
    }
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
  }

  RawValue& at(const std::string& section, const std::string& key) {
    auto s = sections_.find(section);
    if (s == sections_.end() || !s->second.count(key))
      throw parse_error("missing required key " + section + "." + key, 0);
    RawValue& v = s->second.at(key);
    v.used = true;
    return v;
  }

  std::string get_string(const std::string& section, const std::string& key) {
    RawValue& v = at(section, key);
    if (v.text.size() < 2 || v.text.front() != '"' || v.text.back() != '"')
      fail(section + "." + key, v.line, "expected a quoted string");
    return v.text.substr(1, v.text.size() - 2);
  }

  double get_number(const std::string& section, const std::string& key) {
    RawValue& v = at(section, key);
    return to_number(section + "." + key, v.text, v.line);
  }

  long get_integer(const std::string& section, const std::string& key) {
    RawValue& v = at(section, key);
    const double d = to_number(section + "." + key, v.text, v.line);
    const long n = static_cast<long>(std::llround(d));
    if (static_cast<double>(n) != d) fail(section + "." + key, v.line, "expected an integer");
    return n;
  }

  bool get_bool(const std::string& section, const std::string& key) {
    RawValue& v = at(section, key);
    if (v.text == "true") return true;
    if (v.text == "false") return false;
    fail(section + "." + key, v.line, "expected true or false");
  }

  std::vector<double> get_array(const std::string& section, const std::string& key) {
    RawValue& v = at(section, key);
    std::string t = trim(v.text);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']')
      fail(section + "." + key, v.line, "expected a bracketed array");
    t = t.substr(1, t.size() - 2);
    std::vector<double> out;
    std::string item;
    std::istringstream ss(t);
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(section + "." + key, v.line, "empty array element");
      out.push_back(to_number(section + "." + key, item, v.line));
    }
    return out;
  }

  int line_of(const std::string& section, const std::string& key) const {
    return sections_.at(section).at(key).line;
  }

  void reject_unused() const {
    for (const auto& [section, keys] : sections_) {
      if (!known_sections_.count(section)) {
        int line = keys.empty() ? 0 : keys.begin()->second.line;
        fail(section, line, "unknown section");
      }
      for (const auto& [key, value] : keys)
        if (!value.used) fail(section + "." + key, value.line, "unknown key");
    }
  }

  void expect_sections(std::set<std::string> known) { known_sections_ = std::move(known); }

private:
  static double to_number(const std::string& where, const std::string& text, int line) {
    try {
      size_t pos = 0;
      const double d = std::stod(text, &pos);
      if (pos != text.size()) fail(where, line, "trailing characters after number");
      return d;
    } catch (const std::invalid_argument&) {
      fail(where, line, "expected a number");
    } catch (const std::out_of_range&) {
      fail(where, line, "number out of range");
    }
  }

  std::map<std::string, Section> sections_;
  std::set<std::string> known_sections_;
};

} // namespace

RunConfig parse_config(const std::string& text) {
  Parsed p(text);
  p.expect_sections({"domain", "model", "initial", "time", "scheme", "output"});
  RunConfig cfg;

  const std::string type = p.get_string("domain", "type");
  if (type == "torus")
    cfg.domain.kind = DomainKind::torus;
  else if (type == "interval")
    cfg.domain.kind = DomainKind::interval;
  else
    fail("domain.type", p.line_of("domain", "type"), "must be \"torus\" or \"interval\"");
  cfg.domain.length = p.get_number("domain", "length");
  if (!(cfg.domain.length > 0.0))
    fail("domain.length", p.line_of("domain", "length"), "must be positive");
  cfg.domain.cells = static_cast<int>(p.get_integer("domain", "cells"));
  if (cfg.domain.cells < 2) fail("domain.cells", p.line_of("domain", "cells"), "must be >= 2");

  cfg.kappa = p.get_number("model", "kappa");
  if (!(cfg.kappa > 0.0)) fail("model.kappa", p.line_of("model", "kappa"), "must be positive");
  const std::string pot = p.get_string("model", "potential");
  if (pot == "kuramoto") {
    cfg.potential.kind = Potential::Kind::kuramoto;
    cfg.potential.sigma = p.get_number("model", "sigma");
  } else if (pot == "gaussian") {
    cfg.potential.kind = Potential::Kind::gaussian;
    cfg.potential.amplitude = p.get_number("model", "amplitude");
    cfg.potential.variance = p.get_number("model", "variance");
    if (!(cfg.potential.variance > 0.0))
      fail("model.variance", p.line_of("model", "variance"), "must be positive");
  } else if (pot == "tabulated") {
    cfg.potential.kind = Potential::Kind::tabulated;
    cfg.potential.file = p.get_string("model", "file");
  } else {
    fail("model.potential", p.line_of("model", "potential"),
         "must be \"kuramoto\", \"gaussian\" or \"tabulated\"");
  }

  const std::string init = p.get_string("initial", "kind");
  if (init == "uniform") {
    cfg.initial.kind = InitialConfig::Kind::uniform;
  } else if (init == "cosine") {
    cfg.initial.kind = InitialConfig::Kind::cosine;
    cfg.initial.amplitude = p.get_number("initial", "amplitude");
    cfg.initial.mode = static_cast<int>(p.get_integer("initial", "mode"));
    if (cfg.initial.mode < 1) fail("initial.mode", p.line_of("initial", "mode"), "must be >= 1");
    if (std::abs(cfg.initial.amplitude) >= 1.0)
      fail("initial.amplitude", p.line_of("initial", "amplitude"),
           "must have magnitude < 1 to keep the density positive");
  } else if (init == "peaks") {
    cfg.initial.kind = InitialConfig::Kind::peaks;
    cfg.initial.centers = p.get_array("initial", "centers");
    cfg.initial.widths = p.has("initial", "widths") ? p.get_array("initial", "widths")
                                                    : std::vector<double>{};
    cfg.initial.weights = p.has("initial", "weights") ? p.get_array("initial", "weights")
                                                      : std::vector<double>{};
    if (p.has("initial", "baseline")) cfg.initial.baseline = p.get_number("initial", "baseline");
    if (cfg.initial.widths.empty())
      cfg.initial.widths.assign(cfg.initial.centers.size(), 0.05);
    if (cfg.initial.weights.empty())
      cfg.initial.weights.assign(cfg.initial.centers.size(), 1.0);
    if (cfg.initial.widths.size() != cfg.initial.centers.size() ||
        cfg.initial.weights.size() != cfg.initial.centers.size())
      fail("initial.centers", p.line_of("initial", "centers"),
           "centers, widths and weights must have equal lengths");
    for (double w : cfg.initial.widths)
      if (!(w > 0.0))
        fail("initial.widths", p.line_of("initial", "widths"), "widths must be positive");
    if (cfg.initial.baseline < 0.0)
      fail("initial.baseline", p.line_of("initial", "baseline"), "must be nonnegative");
  } else if (init == "file") {
    cfg.initial.kind = InitialConfig::Kind::file;
    cfg.initial.path = p.get_string("initial", "path");
  } else {
    fail("initial.kind", p.line_of("initial", "kind"),
         "must be \"uniform\", \"cosine\", \"peaks\" or \"file\"");
  }

  if (p.has("time", "dt_init")) {
    cfg.time.dt_init = p.get_number("time", "dt_init");
    if (!(cfg.time.dt_init > 0.0))
      fail("time.dt_init", p.line_of("time", "dt_init"), "must be positive");
  }
  if (p.has("time", "t_max")) {
    cfg.time.t_max = p.get_number("time", "t_max");
    if (cfg.time.t_max < 0.0) fail("time.t_max", p.line_of("time", "t_max"), "must be >= 0");
  }
  if (p.has("time", "adaptive")) cfg.time.adaptive = p.get_bool("time", "adaptive");
  if (p.has("time", "newton_tol")) {
    cfg.time.newton_tol = p.get_number("time", "newton_tol");
    if (!(cfg.time.newton_tol > 0.0))
      fail("time.newton_tol", p.line_of("time", "newton_tol"), "must be positive");
  }
  if (p.has("time", "newton_max_iter")) {
    cfg.time.newton_max_iter = static_cast<int>(p.get_integer("time", "newton_max_iter"));
    if (cfg.time.newton_max_iter < 1)
      fail("time.newton_max_iter", p.line_of("time", "newton_max_iter"), "must be >= 1");
  }
  if (p.has("time", "energy_gap_tol")) {
    cfg.time.energy_gap_tol = p.get_number("time", "energy_gap_tol");
    if (cfg.time.energy_gap_tol < 0.0)
      fail("time.energy_gap_tol", p.line_of("time", "energy_gap_tol"), "must be >= 0");
  }
  if (p.has("time", "stall_window")) {
    cfg.time.stall_window = static_cast<int>(p.get_integer("time", "stall_window"));
    if (cfg.time.stall_window < 1)
      fail("time.stall_window", p.line_of("time", "stall_window"), "must be >= 1");
  }

  if (p.has("scheme", "flux")) {
    const std::string flux = p.get_string("scheme", "flux");
    if (flux == "scharfetter-gummel")
      cfg.flux = FluxKind::scharfetter_gummel;
    else if (flux == "upwind")
      cfg.flux = FluxKind::upwind;
    else
      fail("scheme.flux", p.line_of("scheme", "flux"),
           "must be \"scharfetter-gummel\" or \"upwind\"");
  }

  if (p.has("output", "directory")) cfg.output.directory = p.get_string("output", "directory");
  if (p.has("output", "snapshot_every")) {
    cfg.output.snapshot_every = static_cast<int>(p.get_integer("output", "snapshot_every"));
    if (cfg.output.snapshot_every < 0)
      fail("output.snapshot_every", p.line_of("output", "snapshot_every"), "must be >= 0");
  }
  if (p.has("output", "csv")) cfg.output.csv = p.get_string("output", "csv");

  p.reject_unused();

  if (cfg.time.dt_init == 0.0) cfg.time.dt_init = cfg.domain.length / cfg.domain.cells;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open config file " + path, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

CellComplex build_mesh(const RunConfig& cfg) {
  return cfg.domain.kind == DomainKind::torus
             ? build_torus_1d(cfg.domain.cells, cfg.domain.length)
             : build_interval_1d(cfg.domain.cells, cfg.domain.length);
}

Potential build_potential(const RunConfig& cfg) {
  switch (cfg.potential.kind) {
    case Potential::Kind::kuramoto:
      return Potential::kuramoto(cfg.potential.sigma);
    case Potential::Kind::gaussian:
      return Potential::gaussian(cfg.potential.amplitude, cfg.potential.variance);
    case Potential::Kind::tabulated:
      return Potential::tabulated_from_file(cfg.potential.file);
  }
  throw std::logic_error("unreachable potential kind");
}

DensityState build_initial(const RunConfig& cfg, const CellComplex& mesh) {
  const int n = mesh.n_cells();
  const double length = mesh.domain().length;
  Eigen::VectorXd rho(n);
  switch (cfg.initial.kind) {
    case InitialConfig::Kind::uniform:
      rho.setConstant(1.0 / length);
      break;
    case InitialConfig::Kind::cosine:
      for (int k = 0; k < n; ++k)
        rho[k] = 1.0 + cfg.initial.amplitude *
                           std::cos(2.0 * M_PI * cfg.initial.mode * mesh.coords()[k] / length);
      break;
    case InitialConfig::Kind::peaks:
      for (int k = 0; k < n; ++k) {
        double v = cfg.initial.baseline;
        for (size_t i = 0; i < cfg.initial.centers.size(); ++i) {
          double d = mesh.coords()[k] - cfg.initial.centers[i];
          if (mesh.domain().kind == DomainKind::torus) d -= length * std::round(d / length);
          const double w = cfg.initial.widths[i];
          v += cfg.initial.weights[i] * std::exp(-d * d / (w * w));
        }
        rho[k] = v;
      }
      break;
    case InitialConfig::Kind::file: {
      const Snapshot snap = read_snapshot(cfg.initial.path);
      if (snap.rho.size() != n)
        throw parse_error("initial.path: snapshot has " + std::to_string(snap.rho.size()) +
                              " cells, mesh has " + std::to_string(n),
                          0);
      rho = snap.rho;
      break;
    }
  }
  if ((rho.array() < 0.0).any()) throw parse_error("initial datum must be nonnegative", 0);
  const double mass = mesh.volumes().dot(rho);
  if (!(mass > 0.0)) throw parse_error("initial datum must have positive mass", 0);
  return DensityState{rho / mass, 0.0};
}

} // namespace aggdiff
