#include "dtnlab/config.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "dtnlab/expr.hpp"

namespace dtnlab {

using Eigen::Index;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string describe(const std::vector<ConfigIssue>& issues) {
  std::string s;
  for (const auto& i : issues) {
    if (!s.empty()) s += "\n";
    if (i.line > 0) s += std::to_string(i.line) + ":" + std::to_string(i.column) + ": ";
    if (!i.path.empty()) s += i.path + ": ";
    s += i.message;
  }
  return s;
}

std::string pointer_escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

// Line/column of every value and key in an already well-formed document,
// keyed by JSON pointer (keys as pointer + "#key").
class PositionIndex {
 public:
  explicit PositionIndex(const std::string& text) : t_(text) {
    skip_ws();
    if (i_ < t_.size()) value("");
  }

  std::pair<int, int> at(const std::string& pointer) const {
    const auto it = pos_.find(pointer);
    return it == pos_.end() ? std::pair{0, 0} : it->second;
  }

 private:
  const std::string& t_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
  std::map<std::string, std::pair<int, int>> pos_;

  void advance() {
    if (t_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }
  void skip_ws() {
    while (i_ < t_.size() && (t_[i_] == ' ' || t_[i_] == '\t' || t_[i_] == '\n' || t_[i_] == '\r')) advance();
  }
  std::string string_token() {
    std::string s;
    advance();  // opening quote
    while (i_ < t_.size() && t_[i_] != '"') {
      if (t_[i_] == '\\') {
        advance();
        s += t_[i_] == 'n' ? '\n' : t_[i_];
      } else {
        s += t_[i_];
      }
      advance();
    }
    if (i_ < t_.size()) advance();
    return s;
  }
  void value(const std::string& path) {
    pos_[path] = {line_, col_};
    if (t_[i_] == '{') {
      advance();
      skip_ws();
      while (i_ < t_.size() && t_[i_] != '}') {
        const std::pair<int, int> kp{line_, col_};
        const std::string key = string_token();
        const std::string child = path + "/" + pointer_escape(key);
        pos_[child + "#key"] = kp;
        skip_ws();
        advance();  // ':'
        skip_ws();
        value(child);
        skip_ws();
        if (i_ < t_.size() && t_[i_] == ',') advance();
        skip_ws();
      }
      if (i_ < t_.size()) advance();
    } else if (t_[i_] == '[') {
      advance();
      skip_ws();
      int k = 0;
      while (i_ < t_.size() && t_[i_] != ']') {
        value(path + "/" + std::to_string(k++));
        skip_ws();
        if (i_ < t_.size() && t_[i_] == ',') advance();
        skip_ws();
      }
      if (i_ < t_.size()) advance();
    } else if (t_[i_] == '"') {
      string_token();
    } else {
      while (i_ < t_.size() && t_[i_] != ',' && t_[i_] != '}' && t_[i_] != ']' && t_[i_] != ' ' &&
             t_[i_] != '\n' && t_[i_] != '\r' && t_[i_] != '\t')
        advance();
    }
  }
};

class Reader {
 public:
  Reader(const std::string& text, bool strict) : index_(text), strict_(strict) {}

  std::vector<ConfigIssue> errors;
  std::vector<ConfigIssue> warnings;

  void error(const std::string& path, const std::string& msg, int column_offset = 0) {
    const auto [l, c] = index_.at(path);
    errors.push_back({path, l, l > 0 ? c + column_offset : 0, msg});
  }

  bool object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
      error(path, "expected an object");
      return false;
    }
    for (const auto& [k, v] : j.items()) {
      (void)v;
      if (allowed.count(k)) continue;
      const std::string child = path + "/" + pointer_escape(k);
      const auto [l, c] = index_.at(child + "#key");
      ConfigIssue issue{child, l, c, "unknown key '" + k + "'"};
      (strict_ ? errors : warnings).push_back(issue);
    }
    return true;
  }

  template <class T>
  void number(const json& obj, const std::string& key, const std::string& path, T& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string p = path + "/" + pointer_escape(key);
    if constexpr (std::is_integral_v<T>) {
      if (std::is_unsigned_v<T> ? !v.is_number_unsigned() : !v.is_number_integer()) {
        error(p, std::is_unsigned_v<T> ? "expected a non-negative integer" : "expected an integer");
        return;
      }
      out = v.get<T>();
    } else {
      if (!v.is_number()) {
        error(p, "expected a number");
        return;
      }
      out = v.get<T>();
    }
  }

  void boolean(const json& obj, const std::string& key, const std::string& path, bool& out) {
    if (!obj.contains(key)) return;
    if (!obj.at(key).is_boolean()) {
      error(path + "/" + pointer_escape(key), "expected true or false");
      return;
    }
    out = obj.at(key).get<bool>();
  }

  bool string(const json& obj, const std::string& key, const std::string& path, std::string& out) {
    if (!obj.contains(key)) return false;
    if (!obj.at(key).is_string()) {
      error(path + "/" + pointer_escape(key), "expected a string");
      return false;
    }
    out = obj.at(key).get<std::string>();
    return true;
  }

  void expression(const std::string& text, const std::string& path) {
    // instantiate {n} while remembering where each character came from
    std::string inst;
    std::vector<int> origin;
    for (std::size_t i = 0; i < text.size();) {
      if (text.compare(i, 3, "{n}") == 0) {
        inst += '1';
        origin.push_back(static_cast<int>(i));
        i += 3;
      } else {
        inst += text[i];
        origin.push_back(static_cast<int>(i));
        ++i;
      }
    }
    try {
      (void)Expr::parse(inst);
    } catch (const ExprParseError& e) {
      const int k = e.column() - 1;
      const int orig = k < static_cast<int>(origin.size()) ? origin[static_cast<std::size_t>(k)] : static_cast<int>(text.size());
      // +1 skips the opening quote of the JSON string
      error(path, std::string("expression error: ") + e.what(), orig + 1);
    }
  }

  bool complex_value(const json& v, const std::string& path, Scalar& out) {
    if (v.is_number()) {
      out = Scalar(v.get<double>(), 0.0);
      return true;
    }
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      out = Scalar(v[0].get<double>(), v[1].get<double>());
      return true;
    }
    error(path, "expected a number or a [re, im] pair");
    return false;
  }

  CoefficientSpec coefficient(const json& v, const std::string& path) {
    if (v.is_number() || v.is_array()) {
      Scalar c;
      complex_value(v, path, c);
      return CoefficientSpec::make_constant(c);
    }
    if (v.is_string()) {
      expression(v.get<std::string>(), path);
      return CoefficientSpec::make_expression(v.get<std::string>());
    }
    if (!v.is_object()) {
      error(path, "expected a coefficient (number, expression string or object)");
      return {};
    }
    std::string kind;
    if (!string(v, "kind", path, kind)) {
      error(path, "coefficient object needs a 'kind'");
      return {};
    }
    if (kind == "constant") {
      object(v, path, {"kind", "value"});
      Scalar c{1.0, 0.0};
      if (!v.contains("value")) error(path, "constant coefficient needs 'value'");
      else complex_value(v.at("value"), path + "/value", c);
      return CoefficientSpec::make_constant(c);
    }
    if (kind == "expression") {
      object(v, path, {"kind", "re", "im"});
      std::string re, im;
      if (!string(v, "re", path, re)) error(path, "expression coefficient needs 're'");
      else expression(re, path + "/re");
      if (string(v, "im", path, im)) expression(im, path + "/im");
      return CoefficientSpec::make_expression(re, im);
    }
    if (kind == "values") {
      object(v, path, {"kind", "values"});
      std::vector<Scalar> vals;
      if (!v.contains("values") || !v.at("values").is_array()) {
        error(path, "values coefficient needs a 'values' array");
      } else {
        const json& arr = v.at("values");
        for (std::size_t i = 0; i < arr.size(); ++i) {
          Scalar c;
          if (complex_value(arr[i], path + "/values/" + std::to_string(i), c)) vals.push_back(c);
        }
      }
      return CoefficientSpec::make_values(std::move(vals));
    }
    if (kind == "checkerboard") {
      object(v, path, {"kind", "low", "high"});
      double lo = 1.0, hi = 1.0;
      number(v, "low", path, lo);
      number(v, "high", path, hi);
      if (!(lo > 0.0) || !(hi > 0.0)) error(path, "checkerboard values must be positive");
      return CoefficientSpec::make_checkerboard(lo, hi);
    }
    if (kind == "tensor") {
      object(v, path, {"kind", "xx", "yy"});
      if (!v.contains("xx") || !v.contains("yy")) {
        error(path, "tensor coefficient needs 'xx' and 'yy'");
        return {};
      }
      return CoefficientSpec::make_tensor(coefficient(v.at("xx"), path + "/xx"),
                                          coefficient(v.at("yy"), path + "/yy"));
    }
    if (kind == "matrix") {
      object(v, path, {"kind", "rows"});
      if (!v.contains("rows") || !v.at("rows").is_array() || v.at("rows").empty()) {
        error(path, "matrix coefficient needs a non-empty 'rows' array");
        return {};
      }
      const json& rows = v.at("rows");
      const std::size_t nr = rows.size();
      const std::size_t nc = rows[0].is_array() ? rows[0].size() : 0;
      Mat m = Mat::Zero(static_cast<Index>(nr), static_cast<Index>(nc));
      for (std::size_t i = 0; i < nr; ++i) {
        const std::string rp = path + "/rows/" + std::to_string(i);
        if (!rows[i].is_array() || rows[i].size() != nc) {
          error(rp, "matrix rows must be arrays of equal length");
          continue;
        }
        for (std::size_t j = 0; j < nc; ++j) {
          Scalar c;
          if (complex_value(rows[i][j], rp + "/" + std::to_string(j), c))
            m(static_cast<Index>(i), static_cast<Index>(j)) = c;
        }
      }
      return CoefficientSpec::make_matrix(std::move(m));
    }
    error(path + "/kind", "unknown coefficient kind '" + kind + "'");
    return {};
  }

 private:
  PositionIndex index_;
  bool strict_;
};

ojson complex_json(Scalar c) {
  if (c.imag() == 0.0) return c.real();
  return ojson::array({c.real(), c.imag()});
}

ojson coefficient_json(const CoefficientSpec& s) {
  ojson j;
  switch (s.kind) {
    case CoefficientSpec::Kind::Constant:
      j["kind"] = "constant";
      j["value"] = complex_json(s.constant);
      break;
    case CoefficientSpec::Kind::Expression:
      j["kind"] = "expression";
      j["re"] = s.re;
      if (!s.im.empty()) j["im"] = s.im;
      break;
    case CoefficientSpec::Kind::Values: {
      j["kind"] = "values";
      ojson arr = ojson::array();
      for (const Scalar& v : s.values) arr.push_back(complex_json(v));
      j["values"] = arr;
      break;
    }
    case CoefficientSpec::Kind::Checkerboard:
      j["kind"] = "checkerboard";
      j["low"] = s.low;
      j["high"] = s.high;
      break;
    case CoefficientSpec::Kind::Tensor:
      j["kind"] = "tensor";
      j["xx"] = coefficient_json(*s.xx);
      j["yy"] = coefficient_json(*s.yy);
      break;
    case CoefficientSpec::Kind::Matrix: {
      j["kind"] = "matrix";
      ojson rows = ojson::array();
      for (Index i = 0; i < s.matrix.rows(); ++i) {
        ojson row = ojson::array();
        for (Index k = 0; k < s.matrix.cols(); ++k) row.push_back(complex_json(s.matrix(i, k)));
        rows.push_back(row);
      }
      j["rows"] = rows;
      break;
    }
  }
  return j;
}

const std::set<std::string> kKinds{"validate", "dtn", "graph", "sector", "converge", "resolvent"};
const std::set<std::string> kModes{"wot", "compressed", "indep_bc"};

}  // namespace

ConfigParseError::ConfigParseError(std::vector<ConfigIssue> issues)
    : ConfigError(describe(issues)), issues_(std::move(issues)) {}

ParsedConfig parse_config(const std::string& text, bool strict) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    const auto cut = msg.find("syntax error");
    throw ConfigParseError({{"", line, col, cut == std::string::npos ? msg : msg.substr(cut)}});
  }

  Reader r(text, strict);
  ParsedConfig out;
  RunConfig& c = out.config;
  if (!r.object(doc, "", {"schema_version", "geometry", "coefficients", "pivot", "experiment", "output"})) {
    throw ConfigParseError(r.errors);
  }

  if (!doc.contains("schema_version")) {
    r.error("", "missing 'schema_version'");
  } else {
    r.number(doc, "schema_version", "", c.schema_version);
    if (c.schema_version != kSchemaVersion)
      r.error("/schema_version", "unsupported schema version " + std::to_string(c.schema_version));
  }

  if (doc.contains("geometry") && r.object(doc["geometry"], "/geometry", {"kind", "n", "nx", "ny"})) {
    const json& g = doc["geometry"];
    r.string(g, "kind", "/geometry", c.geometry.kind);
    r.number(g, "n", "/geometry", c.geometry.n);
    r.number(g, "nx", "/geometry", c.geometry.nx);
    r.number(g, "ny", "/geometry", c.geometry.ny);
    if (c.geometry.kind == "interval") {
      if (c.geometry.n < 1) r.error("/geometry", "interval needs n >= 1");
    } else if (c.geometry.kind == "rectangle") {
      if (c.geometry.nx < 1 || c.geometry.ny < 1) r.error("/geometry", "rectangle needs nx >= 1 and ny >= 1");
    } else {
      r.error("/geometry/kind", "geometry kind must be 'interval' or 'rectangle'");
    }
  }

  if (doc.contains("coefficients") && r.object(doc["coefficients"], "/coefficients", {"a", "m"})) {
    const json& co = doc["coefficients"];
    if (co.contains("a")) c.a = r.coefficient(co["a"], "/coefficients/a");
    if (co.contains("m")) c.m = r.coefficient(co["m"], "/coefficients/m");
  }

  if (doc.contains("pivot") && r.object(doc["pivot"], "/pivot", {"gram", "weights"})) {
    const json& pv = doc["pivot"];
    r.string(pv, "gram", "/pivot", c.pivot.gram);
    if (c.pivot.gram != "default" && c.pivot.gram != "custom") r.error("/pivot/gram", "gram must be 'default' or 'custom'");
    if (pv.contains("weights")) {
      const json& w = pv["weights"];
      if (!w.is_array()) {
        r.error("/pivot/weights", "expected an array of positive numbers");
      } else {
        for (std::size_t i = 0; i < w.size(); ++i) {
          if (!w[i].is_number() || !(w[i].get<double>() > 0.0)) r.error("/pivot/weights/" + std::to_string(i), "weight must be a positive number");
          else c.pivot.weights.push_back(w[i].get<double>());
        }
      }
    }
    if (c.pivot.gram == "custom" && c.pivot.weights.empty()) r.error("/pivot", "custom pivot needs 'weights'");
  }

  ExperimentConfig& e = c.experiment;
  if (doc.contains("experiment") &&
      r.object(doc["experiment"], "/experiment",
               {"kind", "mode", "schedule", "limit", "odd", "mu", "norm_cap", "lambda_offsets", "witnesses", "rhs",
                "bcs", "samples", "control_run"})) {
    const json& x = doc["experiment"];
    const std::string P = "/experiment";
    r.string(x, "kind", P, e.kind);
    if (!kKinds.count(e.kind)) r.error(P + "/kind", "unknown experiment kind '" + e.kind + "'");
    r.string(x, "mode", P, e.mode);
    if (!kModes.count(e.mode)) r.error(P + "/mode", "mode must be wot, compressed or indep_bc");
    if (x.contains("schedule")) {
      const json& s = x["schedule"];
      if (!s.is_array()) {
        r.error(P + "/schedule", "expected an array of {n_osc, grid_n}");
      } else {
        for (std::size_t i = 0; i < s.size(); ++i) {
          const std::string sp = P + "/schedule/" + std::to_string(i);
          if (!r.object(s[i], sp, {"n_osc", "grid_n"})) continue;
          ScheduleRow row;
          r.number(s[i], "n_osc", sp, row.n_osc);
          r.number(s[i], "grid_n", sp, row.grid_n);
          try {
            check_schedule({row});
          } catch (const ConfigError& err) {
            r.error(sp, err.what());
          }
          e.schedule.push_back(row);
        }
      }
    }
    for (const char* part : {"limit", "odd"}) {
      if (!x.contains(part)) continue;
      const std::string lp = P + "/" + part;
      if (!r.object(x[part], lp, {"a", "m"})) continue;
      const bool lim = std::string(part) == "limit";
      if (x[part].contains("a")) (lim ? e.a_limit : e.a_odd) = r.coefficient(x[part]["a"], lp + "/a");
      if (x[part].contains("m")) (lim ? e.m_limit : e.m_odd) = r.coefficient(x[part]["m"], lp + "/m");
    }
    r.number(x, "mu", P, e.mu);
    if (e.mu < 0.0) r.error(P + "/mu", "mu must be non-negative");
    r.number(x, "norm_cap", P, e.norm_cap);
    if (!(e.norm_cap > 0.0)) r.error(P + "/norm_cap", "norm_cap must be positive");
    if (x.contains("lambda_offsets")) {
      e.lambda_offsets.clear();
      const json& l = x["lambda_offsets"];
      if (!l.is_array() || l.empty()) r.error(P + "/lambda_offsets", "expected a non-empty array");
      else
        for (std::size_t i = 0; i < l.size(); ++i) {
          if (!l[i].is_number() || !(l[i].get<double>() > 0.0))
            r.error(P + "/lambda_offsets/" + std::to_string(i), "offset must be a positive number");
          else e.lambda_offsets.push_back(l[i].get<double>());
        }
    }
    r.number(x, "witnesses", P, e.witnesses);
    if (e.witnesses < 0) r.error(P + "/witnesses", "witnesses must be non-negative");
    r.number(x, "samples", P, e.samples);
    if (e.samples < 1) r.error(P + "/samples", "samples must be positive");
    r.boolean(x, "control_run", P, e.control_run);
    if (x.contains("rhs")) {
      e.rhs.clear();
      const json& f = x["rhs"];
      if (!f.is_array() || f.empty()) r.error(P + "/rhs", "expected a non-empty array of expressions");
      else
        for (std::size_t i = 0; i < f.size(); ++i) {
          const std::string fp = P + "/rhs/" + std::to_string(i);
          if (!f[i].is_string()) {
            r.error(fp, "expected an expression string");
            continue;
          }
          r.expression(f[i].get<std::string>(), fp);
          e.rhs.push_back(f[i].get<std::string>());
        }
    }
    if (x.contains("bcs")) {
      e.bcs.clear();
      const json& b = x["bcs"];
      if (!b.is_array() || b.empty()) r.error(P + "/bcs", "expected a non-empty array of [left, right] pairs");
      else
        for (std::size_t i = 0; i < b.size(); ++i) {
          if (!b[i].is_array() || b[i].size() != 2 || !b[i][0].is_number() || !b[i][1].is_number())
            r.error(P + "/bcs/" + std::to_string(i), "expected a [left, right] pair of numbers");
          else e.bcs.emplace_back(b[i][0].get<double>(), b[i][1].get<double>());
        }
    }
    if ((e.kind == "converge" || e.kind == "resolvent")) {
      if (e.schedule.empty()) r.error(P, e.kind + " needs a non-empty 'schedule'");
      if (c.geometry.kind != "interval") r.error("/geometry/kind", e.kind + " experiments run on the interval");
    }
  }

  if (doc.contains("output") && r.object(doc["output"], "/output", {"csv_path", "svg_path", "seed", "record_runtime"})) {
    const json& o = doc["output"];
    r.string(o, "csv_path", "/output", c.output.csv_path);
    std::string svg;
    if (r.string(o, "svg_path", "/output", svg)) c.output.svg_path = svg;
    r.number(o, "seed", "/output", c.output.seed);
    r.boolean(o, "record_runtime", "/output", c.output.record_runtime);
  }

  if (!r.errors.empty()) throw ConfigParseError(r.errors);
  out.warnings = r.warnings;
  return out;
}

std::string serialize_config(const RunConfig& c) {
  ojson j;
  j["schema_version"] = c.schema_version;
  ojson g;
  g["kind"] = c.geometry.kind;
  if (c.geometry.kind == "interval") {
    g["n"] = c.geometry.n;
  } else {
    g["nx"] = c.geometry.nx;
    g["ny"] = c.geometry.ny;
  }
  j["geometry"] = g;
  j["coefficients"]["a"] = coefficient_json(c.a);
  j["coefficients"]["m"] = coefficient_json(c.m);
  j["pivot"]["gram"] = c.pivot.gram;
  if (!c.pivot.weights.empty()) j["pivot"]["weights"] = c.pivot.weights;

  const ExperimentConfig& e = c.experiment;
  ojson x;
  x["kind"] = e.kind;
  x["mode"] = e.mode;
  ojson sched = ojson::array();
  for (const auto& s : e.schedule) sched.push_back({{"n_osc", s.n_osc}, {"grid_n", s.grid_n}});
  x["schedule"] = sched;
  if (e.a_limit) x["limit"]["a"] = coefficient_json(*e.a_limit);
  if (e.m_limit) x["limit"]["m"] = coefficient_json(*e.m_limit);
  if (e.a_odd) x["odd"]["a"] = coefficient_json(*e.a_odd);
  if (e.m_odd) x["odd"]["m"] = coefficient_json(*e.m_odd);
  x["mu"] = e.mu;
  x["norm_cap"] = e.norm_cap;
  x["lambda_offsets"] = e.lambda_offsets;
  x["witnesses"] = e.witnesses;
  x["rhs"] = e.rhs;
  ojson bcs = ojson::array();
  for (const auto& [l, rr] : e.bcs) bcs.push_back(ojson::array({l, rr}));
  x["bcs"] = bcs;
  x["samples"] = e.samples;
  x["control_run"] = e.control_run;
  j["experiment"] = x;

  ojson o;
  o["csv_path"] = c.output.csv_path;
  if (c.output.svg_path) o["svg_path"] = *c.output.svg_path;
  o["seed"] = c.output.seed;
  o["record_runtime"] = c.output.record_runtime;
  j["output"] = o;
  return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig default_config(const std::string& kind) {
  if (!kKinds.count(kind)) throw ConfigError("unknown experiment kind '" + kind + "'");
  RunConfig c;
  c.experiment.kind = kind;
  const std::vector<ScheduleRow> schedule{{4, 512}, {8, 1024}, {16, 2048}, {32, 4096}};
  if (kind == "dtn") {
    c.geometry.n = 512;
  } else if (kind == "graph") {
    // m at the first discrete Dirichlet eigenvalue of the n = 64 interval
    c.geometry.n = 64;
    const double h = 1.0 / 65.0;
    const double s = std::sin(kPi * h / 2.0);
    c.m = CoefficientSpec::make_constant(-4.0 / (h * h) * s * s);
  } else if (kind == "sector") {
    c.geometry.n = 128;
    c.a = CoefficientSpec::make_expression("1", "0.5*sin(2*pi*x)");
  } else if (kind == "converge") {
    c.a = CoefficientSpec::make_expression("2+sin(2*pi*{n}*x)");
    c.experiment.a_limit = CoefficientSpec::make_constant(std::sqrt(3.0));
    c.experiment.mu = 1.0;
    c.experiment.schedule = schedule;
  } else if (kind == "resolvent") {
    c.m = CoefficientSpec::make_expression("-5+sin(2*pi*{n}*x)");
    c.experiment.m_limit = CoefficientSpec::make_constant(-5.0);
    c.experiment.mu = 1.0;
    c.experiment.schedule = schedule;
  }
  return c;
}

DualPair build_pair(const GeometryConfig& g) {
  if (g.kind == "interval") return build_interval_pair(g.n);
  if (g.kind == "rectangle") return build_rectangle_pair(g.nx, g.ny);
  throw ConfigError("unknown geometry kind '" + g.kind + "'");
}

CoefficientSequence make_sequence(const RunConfig& c) {
  const ExperimentConfig& e = c.experiment;
  CoefficientSequence s;
  s.a = c.a;
  s.m = c.m;
  s.a_limit = e.a_limit.value_or(c.a);
  s.m_limit = e.m_limit.value_or(c.m);
  s.a_odd = e.a_odd;
  s.m_odd = e.m_odd;
  s.norm_cap = e.norm_cap;
  s.mu = e.mu;
  if (s.mu == 0.0 && !e.schedule.empty()) {
    // default floor: the smallest coercivity constant over the schedule
    double mu = std::numeric_limits<double>::infinity();
    for (const auto& row : e.schedule) {
      const DualPair p = build_interval_pair(row.grid_n);
      const bool odd = row.n_osc % 2 != 0;
      const auto a = coefficient_from_spec(odd && s.a_odd ? *s.a_odd : s.a, p, Which::A, row.n_osc);
      mu = std::min(mu, a.hermitian_min);
    }
    if (!(mu > 0.0)) throw ConfigError("coefficient a is not coercive on the schedule");
    s.mu = mu * (1.0 - 1e-9);
  }
  return s;
}

ExperimentOptions make_options(const RunConfig& c) {
  ExperimentOptions o;
  o.random_witnesses = c.experiment.witnesses;
  o.seed = c.output.seed;
  o.record_runtime = c.output.record_runtime;
  o.control_run = c.experiment.control_run;
  return o;
}

}  // namespace dtnlab
