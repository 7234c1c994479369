#include "bdgskin/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "bdgskin/io.hpp"

namespace bdgskin {

ConfigError::ConfigError(int line, const std::string& message)
    : DomainError(line > 0 ? fmt::format("line {}: {}", line, message) : message), line_(line) {}

std::string_view to_string(Analysis a) {
  switch (a) {
    case Analysis::Spectrum: return "spectrum";
    case Analysis::Fd: return "fd";
    case Analysis::Sensitivity: return "sensitivity";
    case Analysis::Greens: return "greens";
    case Analysis::Nonbloch: return "nonbloch";
  }
  return "spectrum";
}

std::optional<Analysis> parse_analysis(std::string_view s) {
  for (Analysis a : {Analysis::Spectrum, Analysis::Fd, Analysis::Sensitivity, Analysis::Greens,
                     Analysis::Nonbloch})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

LatticeSpec LatticeConfig::build() const {
  if (shape == "rectangle") return build_lattice(Rectangle{lx, ly}, bc_x, bc_y);
  if (shape == "oblique") return build_lattice(ObliqueSquare{side, tilt_deg}, bc_x, bc_y);
  throw DomainError(fmt::format("unknown lattice shape '{}'", shape));
}

namespace {

struct Value {
  enum class Kind { Number, String, Bool, Array } kind = Kind::Number;
  double number = 0.0;
  bool integral = false;
  std::string text;
  bool flag = false;
  std::vector<Value> items;
  int line = 0;
};

class Parser {
 public:
  Parser(std::string_view src, int line) : src_(src), line_(line) {}

  Value value() {
    skip_ws();
    if (pos_ >= src_.size()) fail("missing value");
    const char c = src_[pos_];
    if (c == '[') return array();
    if (c == '"') return string();
    if (src_.substr(pos_, 4) == "true") return boolean(true, 4);
    if (src_.substr(pos_, 5) == "false") return boolean(false, 5);
    return number();
  }

  void finish() {
    skip_ws();
    if (pos_ < src_.size()) fail(fmt::format("unexpected trailing text '{}'", src_.substr(pos_)));
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(line_, msg); }

 private:
  void skip_ws() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Value boolean(bool b, std::size_t len) {
    pos_ += len;
    Value v;
    v.kind = Value::Kind::Bool;
    v.flag = b;
    v.line = line_;
    return v;
  }

  Value string() {
    ++pos_;
    Value v;
    v.kind = Value::Kind::String;
    v.line = line_;
    while (pos_ < src_.size() && src_[pos_] != '"') {
      if (src_[pos_] == '\\') {
        if (++pos_ >= src_.size()) break;
        const char e = src_[pos_];
        if (e == '"' || e == '\\') v.text.push_back(e);
        else if (e == 'n') v.text.push_back('\n');
        else if (e == 't') v.text.push_back('\t');
        else fail(fmt::format("unsupported escape '\\{}'", e));
      } else {
        v.text.push_back(src_[pos_]);
      }
      ++pos_;
    }
    if (pos_ >= src_.size()) fail("unterminated string");
    ++pos_;
    return v;
  }

  Value number() {
    std::size_t end = pos_;
    while (end < src_.size() && std::string_view("+-0123456789.eE_infa").find(src_[end]) !=
                                    std::string_view::npos)
      ++end;
    std::string tok(src_.substr(pos_, end - pos_));
    std::erase(tok, '_');
    if (tok.empty()) fail(fmt::format("cannot parse value starting at '{}'", src_.substr(pos_)));
    std::string_view t = tok;
    if (!t.empty() && t.front() == '+') t.remove_prefix(1);
    Value v;
    v.line = line_;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v.number);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
      fail(fmt::format("invalid number '{}'", tok));
    v.integral = t.find_first_of(".eEin") == std::string_view::npos;
    pos_ = end;
    return v;
  }

  Value array() {
    ++pos_;
    Value v;
    v.kind = Value::Kind::Array;
    v.line = line_;
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == ']') {
      ++pos_;
      return v;
    }
    while (true) {
      v.items.push_back(value());
      skip_ws();
      if (pos_ >= src_.size()) fail("unterminated array");
      if (src_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == ']') {
          ++pos_;
          return v;
        }
        continue;
      }
      if (src_[pos_] == ']') {
        ++pos_;
        return v;
      }
      fail(fmt::format("expected ',' or ']' in array, found '{}'", src_[pos_]));
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_;
};

using Table = std::map<std::string, Value>;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

int bracket_balance(std::string_view s) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      break;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      --depth;
    }
  }
  return depth;
}

std::map<std::string, Table> split_tables(std::string_view text) {
  static const std::set<std::string> kTables{"", "model", "lattice", "impurities", "options"};
  std::map<std::string, Table> out;
  std::string current;
  out[current];

  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start <= text.size();) {
    const auto nl = text.find('\n', start);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    lines.push_back(text.substr(start, end - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    const auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[' && line.find('=') == std::string_view::npos) {
      const auto close = line.find(']');
      if (close == std::string_view::npos) throw ConfigError(line_no, "unterminated table header");
      auto rest = trim(line.substr(close + 1));
      if (!rest.empty() && rest.front() != '#')
        throw ConfigError(line_no, "unexpected text after table header");
      current = std::string(trim(line.substr(1, close - 1)));
      if (!kTables.contains(current) || current.empty())
        throw ConfigError(line_no, fmt::format("unknown table [{}]", current));
      if (out.contains(current) && !out[current].empty())
        throw ConfigError(line_no, fmt::format("table [{}] defined twice", current));
      out[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(line_no, "empty key");
    std::string value_text(line.substr(eq + 1));
    std::size_t j = i;
    while (bracket_balance(value_text) > 0 && j + 1 < lines.size()) {
      value_text += '\n';
      value_text += lines[++j];
    }
    Parser p(value_text, line_no);
    Value v = p.value();
    p.finish();
    auto& table = out[current];
    if (table.contains(key))
      throw ConfigError(line_no, fmt::format("duplicate key '{}'", key));
    table.emplace(key, std::move(v));
    i = j;
  }
  return out;
}

std::string qualified(const std::string& table, const std::string& key) {
  return table.empty() ? key : table + "." + key;
}

class TableReader {
 public:
  TableReader(std::string name, Table table) : name_(std::move(name)), table_(std::move(table)) {}

  const Value* take(const std::string& key) {
    auto it = table_.find(key);
    if (it == table_.end()) return nullptr;
    seen_.insert(key);
    return &it->second;
  }

  void reject_unknown() const {
    for (const auto& [k, v] : table_)
      if (!seen_.contains(k))
        throw ConfigError(v.line, fmt::format("unknown key '{}'", qualified(name_, k)));
  }

  [[noreturn]] void fail(const Value& v, const std::string& key, const std::string& msg) const {
    throw ConfigError(v.line, fmt::format("{}: {}", qualified(name_, key), msg));
  }

  double number(const std::string& key, double fallback) {
    const Value* v = take(key);
    if (!v) return fallback;
    return as_number(*v, key);
  }

  double as_number(const Value& v, const std::string& key) const {
    if (v.kind != Value::Kind::Number) fail(v, key, "expected a number");
    return v.number;
  }

  int integer(const std::string& key, int fallback) {
    const Value* v = take(key);
    if (!v) return fallback;
    return as_integer(*v, key);
  }

  int as_integer(const Value& v, const std::string& key) const {
    if (v.kind != Value::Kind::Number || !v.integral) fail(v, key, "expected an integer");
    if (std::abs(v.number) > 1e9) fail(v, key, "integer out of range");
    return static_cast<int>(v.number);
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const Value* v = take(key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::String) fail(*v, key, "expected a string");
    return v->text;
  }

  cplx as_complex(const Value& v, const std::string& key) const {
    if (v.kind != Value::Kind::Array || v.items.size() != 2)
      fail(v, key, "expected a complex number [re, im]");
    return {as_number(v.items[0], key), as_number(v.items[1], key)};
  }

  std::optional<cplx> complex(const std::string& key) {
    const Value* v = take(key);
    if (!v) return std::nullopt;
    return as_complex(*v, key);
  }

  std::vector<std::vector<double>> rows(const std::string& key, std::size_t width) {
    const Value* v = take(key);
    if (!v) return {};
    if (v->kind != Value::Kind::Array) fail(*v, key, "expected an array of rows");
    std::vector<std::vector<double>> out;
    for (const auto& r : v->items) {
      if (r.kind != Value::Kind::Array || r.items.size() != width)
        fail(r, key, fmt::format("each row needs {} numbers", width));
      std::vector<double> row;
      for (const auto& x : r.items) row.push_back(as_number(x, key));
      out.push_back(std::move(row));
    }
    return out;
  }

  int line_of(const std::string& key) const {
    auto it = table_.find(key);
    return it == table_.end() ? 0 : it->second.line;
  }

 private:
  std::string name_;
  Table table_;
  std::set<std::string> seen_;
};

Boundary parse_boundary(TableReader& r, const std::string& key, Boundary fallback) {
  const std::string s = r.text(key, fallback == Boundary::Open ? "open" : "periodic");
  if (s == "open") return Boundary::Open;
  if (s == "periodic") return Boundary::Periodic;
  throw ConfigError(r.line_of(key), fmt::format("lattice.{}: expected \"open\" or \"periodic\"", key));
}

int site_coord(double v, int line, const char* what) {
  if (v != std::floor(v)) throw ConfigError(line, fmt::format("impurities.{}: site coordinates must be integers", what));
  return static_cast<int>(v);
}

std::string fmt_complex(cplx z) {
  return fmt::format("[{}, {}]", format_shortest(z.real()), format_shortest(z.imag()));
}

std::string_view boundary_name(Boundary b) { return b == Boundary::Open ? "open" : "periodic"; }

std::string toml_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    if (c == '\t') {
      out += "\\t";
      continue;
    }
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  auto tables = split_tables(text);
  ExperimentConfig c;

  TableReader top("", tables[""]);
  {
    const std::string a = top.text("analysis", "spectrum");
    const auto parsed = parse_analysis(a);
    if (!parsed)
      throw ConfigError(top.line_of("analysis"),
                        fmt::format("analysis: unknown value '{}' (spectrum, fd, sensitivity, greens, nonbloch)", a));
    c.analysis = *parsed;
    c.out_dir = top.text("out_dir", c.out_dir);
  }
  top.reject_unknown();

  TableReader model("model", tables["model"]);
  const std::pair<const char*, cplx ModelParams::*> fields[] = {
      {"omega0", &ModelParams::omega0}, {"j_x", &ModelParams::j_x},
      {"j_y", &ModelParams::j_y},       {"j_xy", &ModelParams::j_xy},
      {"delta0", &ModelParams::delta0}, {"delta_x", &ModelParams::delta_x}};
  for (const auto& [key, member] : fields)
    if (auto z = model.complex(key)) c.model.*member = *z;
  model.reject_unknown();

  TableReader lat("lattice", tables["lattice"]);
  c.lattice.shape = lat.text("shape", c.lattice.shape);
  if (c.lattice.shape != "rectangle" && c.lattice.shape != "oblique")
    throw ConfigError(lat.line_of("shape"), "lattice.shape: expected \"rectangle\" or \"oblique\"");
  c.lattice.lx = lat.integer("lx", c.lattice.lx);
  c.lattice.ly = lat.integer("ly", c.lattice.ly);
  c.lattice.side = lat.integer("side", c.lattice.side);
  c.lattice.tilt_deg = lat.number("tilt_deg", c.lattice.tilt_deg);
  c.lattice.bc_x = parse_boundary(lat, "bc_x", c.lattice.bc_x);
  c.lattice.bc_y = parse_boundary(lat, "bc_y", c.lattice.bc_y);
  lat.reject_unknown();

  TableReader imp("impurities", tables["impurities"]);
  {
    const int line_on = imp.line_of("onsite");
    for (const auto& r : imp.rows("onsite", 3))
      c.impurities.onsite.push_back(
          {{site_coord(r[0], line_on, "onsite"), site_coord(r[1], line_on, "onsite")}, r[2]});
    const int line_hop = imp.line_of("hopping");
    for (const auto& r : imp.rows("hopping", 5))
      c.impurities.hopping.push_back({{site_coord(r[0], line_hop, "hopping"), site_coord(r[1], line_hop, "hopping")},
                                      {site_coord(r[2], line_hop, "hopping"), site_coord(r[3], line_hop, "hopping")},
                                      r[4]});
  }
  imp.reject_unknown();

  TableReader opt("options", tables["options"]);
  auto& o = c.options;
  if (const Value* v = opt.take("epsilon")) o.epsilon = opt.as_number(*v, "epsilon");
  if (const Value* v = opt.take("energies")) {
    if (v->kind != Value::Kind::Array) opt.fail(*v, "energies", "expected an array of [re, im]");
    for (const auto& e : v->items) o.energies.push_back(opt.as_complex(e, "energies"));
  }
  o.target_energy = opt.complex("target_energy");
  o.ky_points = opt.integer("ky_points", o.ky_points);
  o.theta_points = opt.integer("theta_points", o.theta_points);
  o.fd_bins = opt.integer("fd_bins", o.fd_bins);
  o.margin_min = opt.number("margin_min", o.margin_min);
  o.fit_first = opt.integer("fit_first", o.fit_first);
  o.fit_last = opt.integer("fit_last", o.fit_last);
  opt.reject_unknown();

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(0, fmt::format("cannot read config file {}", path.string()));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

void ExperimentConfig::validate() const {
  try {
    model.validate();
  } catch (const DomainError& e) {
    throw ConfigError(0, fmt::format("model: {}", e.what()));
  }
  LatticeSpec lat = [&] {
    try {
      return lattice.build();
    } catch (const DomainError& e) {
      throw ConfigError(0, fmt::format("lattice: {}", e.what()));
    }
  }();
  try {
    impurities.validate(lat);
  } catch (const DomainError& e) {
    throw ConfigError(0, fmt::format("impurities: {}", e.what()));
  }

  const auto& o = options;
  if (o.epsilon && !(*o.epsilon > 0.0)) throw ConfigError(0, "options.epsilon must be positive");
  if (o.ky_points < 1 || o.theta_points < 1)
    throw ConfigError(0, "options.ky_points and options.theta_points must be positive");
  if (o.fd_bins < 1) throw ConfigError(0, "options.fd_bins must be positive");
  if (!(o.margin_min >= 0.0)) throw ConfigError(0, "options.margin_min must be non-negative");
  if ((o.fit_first == 0) != (o.fit_last == 0))
    throw ConfigError(0, "options.fit_first and options.fit_last must be set together");
  if (o.fit_first != 0 && (o.fit_first < 1 || o.fit_last < o.fit_first + 3))
    throw ConfigError(0, "options fit window must be 1-based with at least 4 points");

  const bool solvable = SolvableParams::from_model(model).has_value();
  switch (analysis) {
    case Analysis::Spectrum:
      break;
    case Analysis::Fd:
      if (o.fit_last > lat.extent_x())
        throw ConfigError(0, "options.fit_last exceeds the lattice extent");
      break;
    case Analysis::Sensitivity:
      if (impurities.empty()) throw ConfigError(0, "sensitivity analysis needs at least one impurity");
      break;
    case Analysis::Greens:
      if (!solvable)
        throw ConfigError(0, "greens analysis needs J_x = 0, J_y = i t_y, J_xy = i t_xy, real pairing, omega0 = 0");
      if (!impurities.hopping.empty() || impurities.onsite.empty() || impurities.onsite.size() > 2)
        throw ConfigError(0, "greens analysis needs one or two on-site impurities and no hopping impurity");
      if (o.energies.empty()) throw ConfigError(0, "greens analysis needs options.energies");
      break;
    case Analysis::Nonbloch:
      if (!solvable)
        throw ConfigError(0, "nonbloch analysis needs J_x = 0, J_y = i t_y, J_xy = i t_xy, real pairing, omega0 = 0");
      if (o.energies.empty()) throw ConfigError(0, "nonbloch analysis needs options.energies");
      break;
  }
}

std::string emit_config(const ExperimentConfig& c) {
  std::string s;
  s += fmt::format("analysis = {}\n", toml_string(to_string(c.analysis)));
  s += fmt::format("out_dir = {}\n", toml_string(c.out_dir));

  s += "\n[model]\n";
  s += fmt::format("omega0 = {}\n", fmt_complex(c.model.omega0));
  s += fmt::format("j_x = {}\n", fmt_complex(c.model.j_x));
  s += fmt::format("j_y = {}\n", fmt_complex(c.model.j_y));
  s += fmt::format("j_xy = {}\n", fmt_complex(c.model.j_xy));
  s += fmt::format("delta0 = {}\n", fmt_complex(c.model.delta0));
  s += fmt::format("delta_x = {}\n", fmt_complex(c.model.delta_x));

  s += "\n[lattice]\n";
  s += fmt::format("shape = {}\n", toml_string(c.lattice.shape));
  if (c.lattice.shape == "oblique") {
    s += fmt::format("side = {}\n", c.lattice.side);
    s += fmt::format("tilt_deg = {}\n", format_shortest(c.lattice.tilt_deg));
  } else {
    s += fmt::format("lx = {}\n", c.lattice.lx);
    s += fmt::format("ly = {}\n", c.lattice.ly);
  }
  s += fmt::format("bc_x = \"{}\"\n", boundary_name(c.lattice.bc_x));
  s += fmt::format("bc_y = \"{}\"\n", boundary_name(c.lattice.bc_y));

  s += "\n[impurities]\n";
  s += "onsite = [";
  for (std::size_t i = 0; i < c.impurities.onsite.size(); ++i) {
    const auto& im = c.impurities.onsite[i];
    s += fmt::format("{}[{}, {}, {}]", i ? ", " : "", im.site.x, im.site.y, format_shortest(im.v));
  }
  s += "]\n";
  s += "hopping = [";
  for (std::size_t i = 0; i < c.impurities.hopping.size(); ++i) {
    const auto& h = c.impurities.hopping[i];
    s += fmt::format("{}[{}, {}, {}, {}, {}]", i ? ", " : "", h.site_a.x, h.site_a.y, h.site_b.x,
                     h.site_b.y, format_shortest(h.t_p));
  }
  s += "]\n";

  const auto& o = c.options;
  s += "\n[options]\n";
  if (o.epsilon) s += fmt::format("epsilon = {}\n", format_shortest(*o.epsilon));
  s += "energies = [";
  for (std::size_t i = 0; i < o.energies.size(); ++i)
    s += fmt::format("{}{}", i ? ", " : "", fmt_complex(o.energies[i]));
  s += "]\n";
  if (o.target_energy) s += fmt::format("target_energy = {}\n", fmt_complex(*o.target_energy));
  s += fmt::format("ky_points = {}\n", o.ky_points);
  s += fmt::format("theta_points = {}\n", o.theta_points);
  s += fmt::format("fd_bins = {}\n", o.fd_bins);
  s += fmt::format("margin_min = {}\n", format_shortest(o.margin_min));
  s += fmt::format("fit_first = {}\n", o.fit_first);
  s += fmt::format("fit_last = {}\n", o.fit_last);
  return s;
}

}  // namespace bdgskin
