#include "homog/config.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "homog/csv.hpp"

namespace homog {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& v) {
  double out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw Error(ErrorCode::ValidationError, "field " + field + ": bad number '" + v + "'");
  return out;
}

long long parse_int(const std::string& field, const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw Error(ErrorCode::ValidationError, "field " + field + ": bad integer '" + v + "'");
  return out;
}

std::vector<double> parse_list(const std::string& field, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(field, trim(item)));
  if (out.empty())
    throw Error(ErrorCode::ValidationError, "field " + field + ": empty list");
  return out;
}

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ValidationError, "field " + field + ": " + why);
}

}  // namespace

const char* to_string(Command c) {
  switch (c) {
    case Command::Correctors: return "correctors";
    case Command::Growth: return "growth";
    case Command::Excess: return "excess";
    case Command::ThmT: return "thmT";
    case Command::CorC: return "corC";
    case Command::LemmaL: return "lemmaL";
  }
  return "?";
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, int> seen;  // key -> first line
  bool have_command = false;

  std::stringstream ss(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(ss, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(lineno) + ": empty key or value");
    if (!seen.emplace(key, lineno).second)
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");

    if (key == "command") {
      have_command = true;
      if (value == "correctors") cfg.command = Command::Correctors;
      else if (value == "growth") cfg.command = Command::Growth;
      else if (value == "excess") cfg.command = Command::Excess;
      else if (value == "thmT") cfg.command = Command::ThmT;
      else if (value == "corC") cfg.command = Command::CorC;
      else if (value == "lemmaL") cfg.command = Command::LemmaL;
      else invalid("command", "unknown command '" + value + "'");
    } else if (key == "dim") {
      cfg.dim = int(parse_int(key, value));
    } else if (key == "size") {
      cfg.size = int(parse_int(key, value));
    } else if (key == "ensemble") {
      cfg.ensemble.kind = ensemble_kind_from_string(value);
    } else if (key == "lambda") {
      cfg.ensemble.lambda = parse_double(key, value);
    } else if (key == "diag") {
      const auto list = parse_list(key, value);
      if (list.size() > 3) invalid(key, "at most 3 entries");
      for (std::size_t i = 0; i < 3; ++i)
        cfg.ensemble.diag[i] = i < list.size() ? list[i] : list.back();
    } else if (key == "value_lo") {
      cfg.ensemble.value_lo = parse_double(key, value);
    } else if (key == "value_hi") {
      cfg.ensemble.value_hi = parse_double(key, value);
    } else if (key == "prob_hi") {
      cfg.ensemble.prob_hi = parse_double(key, value);
    } else if (key == "period") {
      cfg.ensemble.period = int(parse_int(key, value));
    } else if (key == "range") {
      cfg.ensemble.range = int(parse_int(key, value));
    } else if (key == "seed") {
      cfg.seed = std::uint64_t(parse_int(key, value));
    } else if (key == "tol") {
      cfg.tol = parse_double(key, value);
    } else if (key == "max_iter") {
      cfg.max_iter = int(parse_int(key, value));
    } else if (key == "out") {
      cfg.out = value;
    } else if (key == "threads") {
      cfg.threads = int(parse_int(key, value));
    } else if (key == "x0") {
      cfg.x0 = parse_list(key, value);
    } else if (key == "radii") {
      cfg.radii = parse_list(key, value);
    } else if (key == "R") {
      cfg.R = int(parse_int(key, value));
    } else if (key == "N") {
      cfg.N = int(parse_int(key, value));
    } else if (key == "M") {
      cfg.M = int(parse_int(key, value));
    } else if (key == "samples") {
      cfg.samples = int(parse_int(key, value));
    } else if (key == "box") {
      cfg.box = int(parse_int(key, value));
    } else if (key == "center") {
      const auto list = parse_list(key, value);
      if (list.size() > 3) invalid(key, "at most 3 entries");
      for (std::size_t i = 0; i < list.size(); ++i) cfg.center[i] = int(list[i]);
    } else {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }

  if (!have_command) invalid("command", "missing");
  if (cfg.dim != 2 && cfg.dim != 3) invalid("dim", "must be 2 or 3");
  if (cfg.size < 4) invalid("size", "must be >= 4");
  if (!(cfg.ensemble.lambda > 0.0 && cfg.ensemble.lambda <= 1.0))
    invalid("lambda", "must be in (0, 1]");
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) invalid("tol", "must be in (0, 1)");
  if (cfg.max_iter < 1) invalid("max_iter", "must be positive");
  if (cfg.threads < 1) invalid("threads", "must be positive");
  if (cfg.R < 2) invalid("R", "must be >= 2");
  if (cfg.N < 1) invalid("N", "must be >= 1");
  if (cfg.M < cfg.N) invalid("M", "must be >= N");
  if (cfg.samples < 1) invalid("samples", "must be >= 1");
  if (cfg.box < 0) invalid("box", "must be >= 0");
  for (double r : cfg.radii)
    if (r <= 0) invalid("radii", "entries must be positive");
  for (double x : cfg.x0)
    if (x <= 0) invalid("x0", "entries must be positive");

  TorusGrid grid(cfg.dim, cfg.size);
  try {
    cfg.ensemble.validate(grid);
  } catch (const Error& e) {
    throw Error(ErrorCode::ValidationError, e.what());
  }
  return cfg;
}

std::string echo_config(const ExperimentConfig& cfg) {
  std::string s;
  auto kv = [&](const std::string& k, const std::string& v) {
    s += k + " = " + v + "\n";
  };
  kv("command", to_string(cfg.command));
  kv("dim", std::to_string(cfg.dim));
  kv("size", std::to_string(cfg.size));
  kv("ensemble", to_string(cfg.ensemble.kind));
  kv("lambda", fmt_double(cfg.ensemble.lambda));
  if (cfg.ensemble.kind == EnsembleKind::Constant) {
    std::string d;
    for (int i = 0; i < cfg.dim; ++i)
      d += (i ? "," : "") + fmt_double(cfg.ensemble.diag[std::size_t(i)]);
    kv("diag", d);
  } else {
    kv("value_lo", fmt_double(cfg.ensemble.value_lo));
    kv("value_hi", fmt_double(cfg.ensemble.value_hi));
    if (cfg.ensemble.kind == EnsembleKind::Checkerboard)
      kv("prob_hi", fmt_double(cfg.ensemble.prob_hi));
    if (cfg.ensemble.kind == EnsembleKind::Layered)
      kv("period", std::to_string(cfg.ensemble.period));
    if (cfg.ensemble.kind == EnsembleKind::Correlated)
      kv("range", std::to_string(cfg.ensemble.range));
  }
  kv("seed", std::to_string(cfg.seed));
  kv("tol", fmt_double(cfg.tol));
  kv("max_iter", std::to_string(cfg.max_iter));
  kv("threads", std::to_string(cfg.threads));
  if (!cfg.x0.empty()) {
    std::string v;
    for (std::size_t i = 0; i < cfg.x0.size(); ++i)
      v += (i ? "," : "") + fmt_double(cfg.x0[i]);
    kv("x0", v);
  }
  if (!cfg.radii.empty()) {
    std::string v;
    for (std::size_t i = 0; i < cfg.radii.size(); ++i)
      v += (i ? "," : "") + fmt_double(cfg.radii[i]);
    kv("radii", v);
  }
  if (cfg.command == Command::Excess || cfg.command == Command::LemmaL)
    kv("R", std::to_string(cfg.R));
  if (cfg.command == Command::LemmaL) {
    kv("N", std::to_string(cfg.N));
    kv("M", std::to_string(cfg.M));
  }
  if (cfg.command == Command::Excess) kv("samples", std::to_string(cfg.samples));
  if (cfg.box > 0) kv("box", std::to_string(cfg.box));
  bool center_set = cfg.center[0] || cfg.center[1] || cfg.center[2];
  if (center_set) {
    std::string v;
    for (int i = 0; i < cfg.dim; ++i)
      v += (i ? "," : "") + std::to_string(cfg.center[std::size_t(i)]);
    kv("center", v);
  }
  return s;
}

}  // namespace homog
