#include "stpnet/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "stpnet/error.hpp"

namespace stpnet {

namespace {

struct Token {
  enum class Kind { kString, kNumber, kBool } kind;
  std::string text;
};

struct Value {
  bool is_array = false;
  std::vector<Token> items;  // one item when scalar
};

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class LineParser {
 public:
  LineParser(const std::string& s, std::size_t line) : s_(s), line_(line) {}

  Value value() {
    skip_ws();
    Value v;
    if (peek() == '[') {
      ++pos_;
      v.is_array = true;
      skip_ws();
      if (peek() == ']') {
        ++pos_;
      } else {
        while (true) {
          v.items.push_back(scalar());
          skip_ws();
          if (peek() == ',') {
            ++pos_;
            skip_ws();
            if (peek() == ']') {
              ++pos_;
              break;
            }
            continue;
          }
          if (peek() == ']') {
            ++pos_;
            break;
          }
          fail(line_, "expected ',' or ']' in array");
        }
      }
    } else {
      v.items.push_back(scalar());
    }
    skip_ws();
    if (peek() == '#') pos_ = s_.size();
    if (pos_ != s_.size()) fail(line_, "trailing characters after value");
    return v;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }

  Token scalar() {
    skip_ws();
    if (peek() == '"') {
      ++pos_;
      std::string out;
      while (true) {
        if (pos_ >= s_.size()) fail(line_, "unterminated string");
        const char c = s_[pos_++];
        if (c == '"') break;
        if (c == '\\') {
          if (pos_ >= s_.size()) fail(line_, "unterminated string");
          const char e = s_[pos_++];
          if (e == '"' || e == '\\') {
            out += e;
          } else {
            fail(line_, "unsupported escape in string");
          }
        } else {
          out += c;
        }
      }
      return {Token::Kind::kString, out};
    }
    const auto start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' &&
           s_[pos_] != ' ' && s_[pos_] != '\t' && s_[pos_] != '\r') {
      ++pos_;
    }
    const std::string word = s_.substr(start, pos_ - start);
    if (word.empty()) fail(line_, "missing value");
    if (word == "true" || word == "false") return {Token::Kind::kBool, word};
    return {Token::Kind::kNumber, word};
  }

  const std::string& s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

double to_double(const Token& t, std::size_t line, const std::string& key) {
  if (t.kind != Token::Kind::kNumber) fail(line, key + ": expected a number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.text.c_str(), &end);
  if (end != t.text.c_str() + t.text.size() || errno == ERANGE || !std::isfinite(v)) {
    fail(line, key + ": invalid number '" + t.text + "'");
  }
  return v;
}

std::uint64_t to_u64(const Token& t, std::size_t line, const std::string& key) {
  if (t.kind != Token::Kind::kNumber) fail(line, key + ": expected an integer");
  const std::string& s = t.text;
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    fail(line, key + ": expected a nonnegative integer, got '" + s + "'");
  }
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (errno == ERANGE) fail(line, key + ": integer out of range");
  return v;
}

using Setter = std::function<void(RunConfig&, const Value&, std::size_t, const std::string&)>;

const Token& scalar_of(const Value& v, std::size_t line, const std::string& key) {
  if (v.is_array) fail(line, key + ": expected a scalar");
  return v.items.front();
}

template <class Get>
Setter real(Get get) {
  return [get](RunConfig& c, const Value& v, std::size_t line, const std::string& key) {
    get(c) = to_double(scalar_of(v, line, key), line, key);
  };
}

template <class T>
struct IntegerOf {
  using type = T;
};
template <class T>
struct IntegerOf<std::optional<T>> {
  using type = T;
};

template <class Get>
Setter integer(Get get) {
  return [get](RunConfig& c, const Value& v, std::size_t line, const std::string& key) {
    using Int = typename IntegerOf<std::remove_reference_t<decltype(get(c))>>::type;
    const auto x = to_u64(scalar_of(v, line, key), line, key);
    if (x > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) {
      fail(line, key + ": integer out of range");
    }
    get(c) = static_cast<Int>(x);
  };
}

template <class Get>
Setter boolean(Get get) {
  return [get](RunConfig& c, const Value& v, std::size_t line, const std::string& key) {
    const Token& t = scalar_of(v, line, key);
    if (t.kind != Token::Kind::kBool) fail(line, key + ": expected true or false");
    get(c) = t.text == "true";
  };
}

template <class Get>
Setter string(Get get) {
  return [get](RunConfig& c, const Value& v, std::size_t line, const std::string& key) {
    const Token& t = scalar_of(v, line, key);
    if (t.kind != Token::Kind::kString) fail(line, key + ": expected a quoted string");
    get(c) = t.text;
  };
}

template <class Get>
Setter real_array(Get get) {
  return [get](RunConfig& c, const Value& v, std::size_t line, const std::string& key) {
    if (!v.is_array) fail(line, key + ": expected an array");
    std::vector<double> out;
    for (const auto& t : v.items) out.push_back(to_double(t, line, key));
    get(c) = out;
  };
}

template <class Get>
Setter size_array(Get get) {
  return [get](RunConfig& c, const Value& v, std::size_t line, const std::string& key) {
    if (!v.is_array) fail(line, key + ": expected an array");
    std::vector<std::size_t> out;
    for (const auto& t : v.items) out.push_back(to_u64(t, line, key));
    get(c) = out;
  };
}

template <class Get>
Setter string_array(Get get) {
  return [get](RunConfig& c, const Value& v, std::size_t line, const std::string& key) {
    if (!v.is_array) fail(line, key + ": expected an array");
    std::vector<std::string> out;
    for (const auto& t : v.items) {
      if (t.kind != Token::Kind::kString) fail(line, key + ": expected quoted strings");
      out.push_back(t.text);
    }
    get(c) = out;
  };
}

#define FIELD(path) [](RunConfig& c) -> auto& { return c.path; }

const std::map<std::string, Setter>& schema() {
  static const std::map<std::string, Setter> s{
      {"model.alpha", real(FIELD(model.alpha))},
      {"model.beta", real(FIELD(model.beta))},
      {"model.lambda", real(FIELD(model.lambda))},
      {"model.D", real(FIELD(model.D))},
      {"rate.kind", string(FIELD(rate.kind))},
      {"rate.a", real(FIELD(rate.a))},
      {"rate.x", real_array(FIELD(rate.x))},
      {"rate.y", real_array(FIELD(rate.y))},
      {"init.kind", string(FIELD(init.kind))},
      {"init.u", real(FIELD(init.u))},
      {"init.r", real(FIELD(init.r))},
      {"init.width", real(FIELD(init.width))},
      {"init.calcium_law", string(FIELD(init.calcium_law))},
      {"init.calcium_p1", real(FIELD(init.calcium_p1))},
      {"init.calcium_p2", real(FIELD(init.calcium_p2))},
      {"run.n", integer(FIELD(run.n))},
      {"run.horizon", real(FIELD(run.horizon))},
      {"run.grid", integer(FIELD(run.grid))},
      {"run.strategy", string(FIELD(run.strategy))},
      {"run.seed", integer(FIELD(run.seed))},
      {"run.output", string(FIELD(run.output))},
      {"run.threads", integer(FIELD(run.threads))},
      {"run.max_events", integer(FIELD(run.max_events))},
      {"run.per_neuron", boolean(FIELD(run.per_neuron))},
      {"run.record_timing", boolean(FIELD(run.record_timing))},
      {"ode.rel_tol", real(FIELD(ode.rel_tol))},
      {"ode.abs_tol", real(FIELD(ode.abs_tol))},
      {"study.n_list", size_array(FIELD(study.n_list))},
      {"study.replicas", integer(FIELD(study.replicas))},
      {"study.epsilon", real(FIELD(study.epsilon))},
      {"study.T", real(FIELD(study.T))},
      {"study.alpha_scale", real(FIELD(study.alpha_scale))},
      {"study.inits", string_array(FIELD(study.inits))},
      {"study.kappa_min", real(FIELD(study.kappa_min))},
      {"study.kappa_max", real(FIELD(study.kappa_max))},
      {"study.kappa_points", integer(FIELD(study.kappa_points))},
      {"study.search_max", real(FIELD(study.search_max))},
      {"study.u_max", real(FIELD(study.u_max))},
      {"study.nullcline_points", integer(FIELD(study.nullcline_points))},
  };
  return s;
}

#undef FIELD

const std::set<std::string> kSections{"model", "rate", "init", "run", "ode", "study"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // Keep reals recognisably real so the file reads naturally.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F f) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += f(xs[i]);
  }
  return out + "]";
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::set<std::string> seen;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s[0] == '[') {
      const auto close = s.find(']');
      if (close == std::string::npos) fail(line, "unterminated section header");
      const std::string rest = trim(s.substr(close + 1));
      if (!rest.empty() && rest[0] != '#') fail(line, "trailing characters after section header");
      section = trim(s.substr(1, close - 1));
      if (!kSections.count(section)) fail(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) fail(line, "missing key");
    if (section.empty()) fail(line, "key '" + key + "' outside any section");
    const std::string full = section + "." + key;
    const auto it = schema().find(full);
    if (it == schema().end()) fail(line, "unknown key '" + full + "'");
    if (!seen.insert(full).second) fail(line, "duplicate key '" + full + "'");
    const std::string rhs = s.substr(eq + 1);
    LineParser p(rhs, line);
    it->second(config, p.value(), line, full);
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string to_toml(const RunConfig& c) {
  std::ostringstream out;
  const auto real = [](double v) { return fmt(v); };
  const auto whole = [](std::size_t v) { return std::to_string(v); };

  out << "[model]\n"
      << "alpha = " << fmt(c.model.alpha) << "\n"
      << "beta = " << fmt(c.model.beta) << "\n"
      << "lambda = " << fmt(c.model.lambda) << "\n"
      << "D = " << fmt(c.model.D) << "\n\n";

  out << "[rate]\n"
      << "kind = " << quote(c.rate.kind) << "\n"
      << "a = " << fmt(c.rate.a) << "\n"
      << "x = " << join(c.rate.x, real) << "\n"
      << "y = " << join(c.rate.y, real) << "\n\n";

  out << "[init]\n"
      << "kind = " << quote(c.init.kind) << "\n"
      << "u = " << fmt(c.init.u) << "\n"
      << "r = " << fmt(c.init.r) << "\n"
      << "width = " << fmt(c.init.width) << "\n"
      << "calcium_law = " << quote(c.init.calcium_law) << "\n"
      << "calcium_p1 = " << fmt(c.init.calcium_p1) << "\n"
      << "calcium_p2 = " << fmt(c.init.calcium_p2) << "\n\n";

  out << "[run]\n";
  if (c.run.n) out << "n = " << *c.run.n << "\n";
  if (c.run.horizon) out << "horizon = " << fmt(*c.run.horizon) << "\n";
  if (c.run.grid) out << "grid = " << *c.run.grid << "\n";
  out << "strategy = " << quote(c.run.strategy) << "\n";
  if (c.run.seed) out << "seed = " << *c.run.seed << "\n";
  out << "output = " << quote(c.run.output) << "\n"
      << "threads = " << c.run.threads << "\n"
      << "max_events = " << c.run.max_events << "\n"
      << "per_neuron = " << (c.run.per_neuron ? "true" : "false") << "\n"
      << "record_timing = " << (c.run.record_timing ? "true" : "false") << "\n\n";

  out << "[ode]\n"
      << "rel_tol = " << fmt(c.ode.rel_tol) << "\n"
      << "abs_tol = " << fmt(c.ode.abs_tol) << "\n\n";

  out << "[study]\n";
  if (c.study.n_list) out << "n_list = " << join(*c.study.n_list, whole) << "\n";
  if (c.study.replicas) out << "replicas = " << *c.study.replicas << "\n";
  if (c.study.epsilon) out << "epsilon = " << fmt(*c.study.epsilon) << "\n";
  if (c.study.T) out << "T = " << fmt(*c.study.T) << "\n";
  out << "alpha_scale = " << fmt(c.study.alpha_scale) << "\n"
      << "inits = " << join(c.study.inits, quote) << "\n"
      << "kappa_min = " << fmt(c.study.kappa_min) << "\n"
      << "kappa_max = " << fmt(c.study.kappa_max) << "\n"
      << "kappa_points = " << c.study.kappa_points << "\n"
      << "search_max = " << fmt(c.study.search_max) << "\n"
      << "u_max = " << fmt(c.study.u_max) << "\n"
      << "nullcline_points = " << c.study.nullcline_points << "\n";
  return out.str();
}

void resolve_defaults(RunConfig& c, const std::string& sub) {
  auto& run = c.run;
  auto& st = c.study;
  const auto fill = [](auto& opt, auto v) {
    if (!opt) opt = v;
  };
  if (sub == "simulate" || sub == "phase-portrait") {
    fill(run.n, std::size_t{1000});
    fill(run.horizon, 20.0);
    fill(run.grid, std::size_t{401});
  } else if (sub == "limit-ode" || sub == "limit-process") {
    fill(run.horizon, 20.0);
    fill(run.grid, std::size_t{401});
    if (sub == "limit-process") fill(st.replicas, std::size_t{1});
  } else if (sub == "convergence") {
    fill(st.n_list, std::vector<std::size_t>{100, 316, 1000, 3162, 10000});
    fill(st.replicas, std::size_t{200});
    fill(st.T, 2.0);
    fill(run.grid, std::size_t{200});
  } else if (sub == "deviation") {
    fill(st.n_list, std::vector<std::size_t>{100, 1000, 10000});
    fill(st.replicas, std::size_t{500});
    fill(st.T, 1.0);
    fill(st.epsilon, 50.0);
    fill(run.grid, std::size_t{200});
  } else if (sub == "memory") {
    fill(st.n_list, std::vector<std::size_t>{50, 200, 1000});
    fill(st.replicas, std::size_t{100});
    fill(st.epsilon, 0.5);
    fill(run.horizon, 50.0);
  } else if (sub == "extinction") {
    fill(run.n, std::size_t{5});
    fill(st.replicas, std::size_t{100});
    fill(run.horizon, 1e3);
  }
}

void validate_config(const RunConfig& c) {
  (void)make_params(c);
  validate_init(make_init(c));
  (void)make_strategy(c);
  if (c.model.D <= 0.0) throw ConfigError("model.D must be > 0");
  if (c.run.n && *c.run.n == 0) throw ConfigError("run.n must be >= 1");
  if (c.run.horizon && !(*c.run.horizon > 0.0)) throw ConfigError("run.horizon must be > 0");
  if (c.run.grid && *c.run.grid < 2) throw ConfigError("run.grid must be >= 2");
  if (c.run.output.empty()) throw ConfigError("run.output must not be empty");
  (void)make_ode_options(c);
  if (c.study.n_list) {
    if (c.study.n_list->empty()) throw ConfigError("study.n_list must not be empty");
    for (const auto n : *c.study.n_list) {
      if (n == 0) throw ConfigError("study.n_list entries must be >= 1");
    }
  }
  if (c.study.replicas && *c.study.replicas == 0) throw ConfigError("study.replicas must be >= 1");
  if (c.study.epsilon && !(*c.study.epsilon > 0.0)) throw ConfigError("study.epsilon must be > 0");
  if (c.study.T && !(*c.study.T > 0.0)) throw ConfigError("study.T must be > 0");
  if (!(c.study.alpha_scale > 0.0)) throw ConfigError("study.alpha_scale must be > 0");
  for (const auto& s : c.study.inits) (void)parse_pair(s);
  if (!(c.study.kappa_min > 0.0 && c.study.kappa_max > c.study.kappa_min)) {
    throw ConfigError("study.kappa_min must be > 0 and below study.kappa_max");
  }
  if (c.study.kappa_points < 2) throw ConfigError("study.kappa_points must be >= 2");
  if (c.study.search_max < 0.0) throw ConfigError("study.search_max must be >= 0");
  if (!(c.study.u_max > 0.0)) throw ConfigError("study.u_max must be > 0");
  if (c.study.nullcline_points < 2) throw ConfigError("study.nullcline_points must be >= 2");
}

ModelParams make_params(const RunConfig& c) {
  RateFunction rate = [&] {
    if (c.rate.kind == "sigmoid") return RateFunction::sigmoid(c.rate.a);
    if (c.rate.kind == "table") return RateFunction::table(c.rate.x, c.rate.y);
    throw ConfigError("rate.kind must be \"sigmoid\" or \"table\", got \"" + c.rate.kind + "\"");
  }();
  return ModelParams(c.model.alpha, c.model.beta, c.model.lambda, std::move(rate));
}

InitSpec make_init(const RunConfig& c) {
  const auto& i = c.init;
  InitSpec spec;
  if (i.kind == "point") {
    spec = PointMass{i.u, i.r};
  } else if (i.kind == "band") {
    spec = UniformBand{i.u, i.r, i.width};
  } else if (i.kind == "sampled") {
    CalciumLaw law;
    if (i.calcium_law == "point") {
      law.kind = CalciumLaw::Kind::kPoint;
    } else if (i.calcium_law == "uniform") {
      law.kind = CalciumLaw::Kind::kUniform;
    } else if (i.calcium_law == "exponential") {
      law.kind = CalciumLaw::Kind::kExponential;
    } else {
      throw ConfigError("init.calcium_law must be \"point\", \"uniform\" or \"exponential\"");
    }
    law.p1 = i.calcium_p1;
    law.p2 = i.calcium_p2;
    spec = Sampled{i.u, law};
  } else {
    throw ConfigError("init.kind must be \"point\", \"band\" or \"sampled\", got \"" + i.kind +
                      "\"");
  }
  validate_init(spec);
  return spec;
}

ThinningStrategy make_strategy(const RunConfig& c) {
  if (c.run.strategy == "global") return ThinningStrategy::kGlobal;
  if (c.run.strategy == "monotone") return ThinningStrategy::kMonotone;
  throw ConfigError("run.strategy must be \"global\" or \"monotone\", got \"" + c.run.strategy +
                    "\"");
}

OdeOptions make_ode_options(const RunConfig& c) {
  const auto ok = [](double t) { return t > 0.0 && t <= 1e-2; };
  if (!ok(c.ode.rel_tol) || !ok(c.ode.abs_tol)) {
    throw ConfigError("ode tolerances must lie in (0, 1e-2]");
  }
  OdeOptions o;
  o.rel_tol = c.ode.rel_tol;
  o.abs_tol = c.ode.abs_tol;
  return o;
}

std::pair<double, double> parse_pair(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("expected \"u,r\", got \"" + text + "\"");
  const auto num = [&](const std::string& s) {
    const std::string t = trim(s);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
      throw ConfigError("expected \"u,r\", got \"" + text + "\"");
    }
    return v;
  };
  return {num(text.substr(0, comma)), num(text.substr(comma + 1))};
}

}  // namespace stpnet
