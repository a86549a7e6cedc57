#include "wcdyn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "wcdyn/report.hpp"

namespace wcdyn {

using nlohmann::json;

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Transitive: return "transitive";
    case Mode::Disjoint: return "disjoint";
    case Mode::Semi: return "semi";
  }
  return "transitive";
}

Mode parse_mode(const std::string& s) {
  if (s == "transitive") return Mode::Transitive;
  if (s == "disjoint") return Mode::Disjoint;
  if (s == "semi") return Mode::Semi;
  throw ConfigError("mode", "expected transitive, disjoint or semi, got '" + s + "'");
}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  return j;
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(join(path, it.key()), "unknown field");
  }
}

const json& member(const json& j, const std::string& path, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(join(path, key), "missing required field");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

std::int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

double number_or(const json& j, const std::string& path, const char* key, double fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_number(*it, join(path, key));
}

std::vector<Coord> int_vector(const json& j, const std::string& path, std::size_t dim) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of integers");
  if (j.size() != dim) throw ConfigError(path, "expected " + std::to_string(dim) + " entries");
  std::vector<Coord> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_int(j[i], index(path, i)));
  return out;
}

LatticePoint point(const json& j, const std::string& path, std::size_t dim) {
  return LatticePoint(int_vector(j, path, dim));
}

LatticeMap parse_map(const json& j, const std::string& path, std::size_t dim) {
  object(j, path);
  allow_keys(j, path, {"matrix", "offset", "translation"});
  if (j.contains("translation")) {
    if (j.contains("matrix") || j.contains("offset")) {
      throw ConfigError(join(path, "translation"), "cannot be combined with matrix or offset");
    }
    return LatticeMap::translation(int_vector(j["translation"], join(path, "translation"), dim));
  }
  std::vector<Coord> linear(dim * dim, 0);
  for (std::size_t i = 0; i < dim; ++i) linear[i * dim + i] = 1;
  if (j.contains("matrix")) {
    const std::string mp = join(path, "matrix");
    const json& m = j["matrix"];
    if (!m.is_array() || m.size() != dim) throw ConfigError(mp, "expected " + std::to_string(dim) + " rows");
    for (std::size_t r = 0; r < dim; ++r) {
      const auto row = int_vector(m[r], index(mp, r), dim);
      std::copy(row.begin(), row.end(), linear.begin() + static_cast<std::ptrdiff_t>(r * dim));
    }
  }
  std::vector<Coord> offset(dim, 0);
  if (j.contains("offset")) offset = int_vector(j["offset"], join(path, "offset"), dim);
  try {
    return LatticeMap(dim, std::move(linear), std::move(offset));
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

std::map<LatticePoint, double> load_table_csv(const std::filesystem::path& file, const std::string& path,
                                              std::size_t dim) {
  std::ifstream in(file);
  if (!in) throw ConfigError(path, "cannot open weight table " + file.string());
  std::map<LatticePoint, double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != dim + 1) {
      if (lineno == 1) continue;  // header
      throw ConfigError(path, file.string() + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(dim + 1) + " columns");
    }
    try {
      std::vector<Coord> c;
      for (std::size_t i = 0; i < dim; ++i) {
        std::size_t used = 0;
        c.push_back(std::stoll(cells[i], &used));
      }
      out[LatticePoint(std::move(c))] = std::stod(cells[dim]);
    } catch (const std::logic_error&) {
      if (lineno == 1) continue;
      throw ConfigError(path, file.string() + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  return out;
}

struct WeightContext {
  std::size_t dim;
  double scale;
  const std::map<std::string, LatticeMap>& maps;
  const std::filesystem::path& base_dir;
};

WeightSpec parse_weight(const json& j, const std::string& path, const WeightContext& ctx) {
  object(j, path);
  const std::string type = as_string(member(j, path, "type"), join(path, "type"));
  try {
    if (type == "constant") {
      allow_keys(j, path, {"type", "value"});
      return WeightSpec::constant(as_number(member(j, path, "value"), join(path, "value")));
    }
    if (type == "radial_decay" || type == "piecewise_power") {
      allow_keys(j, path, {"type", "p", "scale"});
      if (type == "piecewise_power" && ctx.dim != 1) throw ConfigError(path, "piecewise_power is one-dimensional");
      const double p = as_number(member(j, path, "p"), join(path, "p"));
      const double h = number_or(j, path, "scale", ctx.scale);
      return type == "radial_decay" ? WeightSpec::radial_decay(p, h) : WeightSpec::piecewise_power(p, h);
    }
    if (type == "polynomial") {
      allow_keys(j, path, {"type", "s", "scale"});
      return WeightSpec::polynomial(as_number(member(j, path, "s"), join(path, "s")),
                                    number_or(j, path, "scale", ctx.scale));
    }
    if (type == "table") {
      allow_keys(j, path, {"type", "values", "csv", "fallback"});
      std::map<LatticePoint, double> values;
      if (j.contains("csv")) {
        std::filesystem::path file = as_string(j["csv"], join(path, "csv"));
        if (file.is_relative()) file = ctx.base_dir / file;
        values = load_table_csv(file, join(path, "csv"), ctx.dim);
      }
      if (j.contains("values")) {
        const std::string vp = join(path, "values");
        const json& arr = j["values"];
        if (!arr.is_array()) throw ConfigError(vp, "expected an array of {x, value} entries");
        for (std::size_t i = 0; i < arr.size(); ++i) {
          const std::string ep = index(vp, i);
          object(arr[i], ep);
          allow_keys(arr[i], ep, {"x", "value"});
          values[point(member(arr[i], ep, "x"), join(ep, "x"), ctx.dim)] =
              as_number(member(arr[i], ep, "value"), join(ep, "value"));
        }
      }
      std::optional<double> fallback;
      if (j.contains("fallback")) fallback = as_number(j["fallback"], join(path, "fallback"));
      return WeightSpec::table(std::move(values), fallback);
    }
    if (type == "product") {
      allow_keys(j, path, {"type", "factors"});
      const std::string fp = join(path, "factors");
      const json& arr = member(j, path, "factors");
      if (!arr.is_array() || arr.empty()) throw ConfigError(fp, "expected a non-empty array of weights");
      std::vector<WeightSpec> factors;
      for (std::size_t i = 0; i < arr.size(); ++i) factors.push_back(parse_weight(arr[i], index(fp, i), ctx));
      return WeightSpec::product(std::move(factors));
    }
    if (type == "composed") {
      allow_keys(j, path, {"type", "weight", "map"});
      const WeightSpec inner = parse_weight(member(j, path, "weight"), join(path, "weight"), ctx);
      const std::string name = as_string(member(j, path, "map"), join(path, "map"));
      const auto it = ctx.maps.find(name);
      if (it == ctx.maps.end()) throw ConfigError(join(path, "map"), "undeclared map '" + name + "'");
      return WeightSpec::composed(inner, it->second);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(join(path, "type"), "unknown weight type '" + type + "'");
}

NormSpec parse_norm(const json& j, const std::string& path) {
  object(j, path);
  const std::string type = as_string(member(j, path, "type"), join(path, "type"));
  try {
    if (type == "ell_p") {
      allow_keys(j, path, {"type", "p"});
      return NormSpec::ell_p(as_number(member(j, path, "p"), join(path, "p")));
    }
    if (type == "ell_inf") {
      allow_keys(j, path, {"type"});
      return NormSpec::ell_inf();
    }
    if (type == "orlicz") {
      allow_keys(j, path, {"type", "young", "exponent", "tol"});
      const std::string y = as_string(member(j, path, "young"), join(path, "young"));
      YoungFunction phi;
      if (y == "power") {
        phi = YoungFunction::power(as_number(member(j, path, "exponent"), join(path, "exponent")));
      } else if (y == "exp") {
        phi = YoungFunction::exponential();
      } else if (y == "exp_square") {
        phi = YoungFunction::exp_square();
      } else if (y == "t_log") {
        phi = YoungFunction::t_log();
      } else {
        throw ConfigError(join(path, "young"), "expected power, exp, exp_square or t_log");
      }
      return NormSpec::orlicz(phi, number_or(j, path, "tol", 1e-10));
    }
    if (type == "morrey") {
      allow_keys(j, path, {"type", "p", "q", "max_radius"});
      const double p = as_number(member(j, path, "p"), join(path, "p"));
      const double q = as_number(member(j, path, "q"), join(path, "q"));
      if (!(q < p)) throw ConfigError(join(path, "q"), "Morrey norm needs q < p");
      const std::int64_t r = as_int(member(j, path, "max_radius"), join(path, "max_radius"));
      if (r < 0 || r > 1000000) throw ConfigError(join(path, "max_radius"), "out of range");
      return NormSpec::morrey(p, q, static_cast<int>(r));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(join(path, "type"), "unknown norm type '" + type + "'");
}

std::vector<LatticePoint> parse_region(const json& j, const std::string& path, std::size_t dim) {
  object(j, path);
  allow_keys(j, path, {"box", "points", "ball"});
  if (j.size() != 1) throw ConfigError(path, "expected exactly one of box, points or ball");
  try {
    if (j.contains("box")) {
      const std::string bp = join(path, "box");
      const json& b = object(j["box"], bp);
      allow_keys(b, bp, {"lo", "hi"});
      const LatticePoint lo = point(member(b, bp, "lo"), join(bp, "lo"), dim);
      const LatticePoint hi = point(member(b, bp, "hi"), join(bp, "hi"), dim);
      return CompactRegion::box(lo, hi).points();
    }
    if (j.contains("ball")) {
      return CompactRegion::euclidean_ball(dim, as_number(j["ball"], join(path, "ball"))).points();
    }
    const std::string pp = join(path, "points");
    const json& arr = j["points"];
    if (!arr.is_array()) throw ConfigError(pp, "expected an array of points");
    std::vector<LatticePoint> pts;
    for (std::size_t i = 0; i < arr.size(); ++i) pts.push_back(point(arr[i], index(pp, i), dim));
    return CompactRegion(std::move(pts)).points();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

std::vector<LatticePoint> dilated_box(const std::vector<LatticePoint>& pts, Coord margin) {
  const std::size_t d = pts.front().dimension();
  std::vector<Coord> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = hi[i] = pts.front()[i];
    for (const auto& p : pts) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
    lo[i] -= margin;
    hi[i] += margin;
  }
  return CompactRegion::box(LatticePoint(lo), LatticePoint(hi)).points();
}

}  // namespace

ScenarioConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  object(doc, "");
  allow_keys(doc, "", {"name", "mode", "domain", "maps", "weights", "eta", "operators", "norm", "K", "region",
                       "horizon", "tol", "epsilon", "index_range", "output_dir"});
  ScenarioConfig c;
  c.name = as_string(member(doc, "", "name"), "name");
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("name", "must be a non-empty file-name-safe string");
  }
  c.mode = parse_mode(as_string(member(doc, "", "mode"), "mode"));

  const json& dom = object(member(doc, "", "domain"), "domain");
  allow_keys(dom, "domain", {"dimension", "scale"});
  const std::int64_t d = as_int(member(dom, "domain", "dimension"), "domain.dimension");
  if (d < 1 || d > 16) throw ConfigError("domain.dimension", "must lie in 1..16");
  c.dimension = static_cast<std::size_t>(d);
  c.scale = number_or(dom, "domain", "scale", 1.0);
  if (!(c.scale > 0.0) || !std::isfinite(c.scale)) throw ConfigError("domain.scale", "must be positive");

  const json& maps = object(member(doc, "", "maps"), "maps");
  for (auto it = maps.begin(); it != maps.end(); ++it) {
    c.maps.emplace(it.key(), parse_map(it.value(), join("maps", it.key()), c.dimension));
  }
  const WeightContext ctx{c.dimension, c.scale, c.maps, base_dir};
  const json& weights = object(member(doc, "", "weights"), "weights");
  for (auto it = weights.begin(); it != weights.end(); ++it) {
    c.weights.emplace(it.key(), parse_weight(it.value(), join("weights", it.key()), ctx));
  }
  c.eta = as_string(member(doc, "", "eta"), "eta");

  const json& ops = member(doc, "", "operators");
  if (!ops.is_array()) throw ConfigError("operators", "expected an array");
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const std::string op = index("operators", i);
    object(ops[i], op);
    allow_keys(ops[i], op, {"map", "symbol", "power", "offset_per_index"});
    OperatorConfig oc;
    oc.map = as_string(member(ops[i], op, "map"), join(op, "map"));
    oc.symbol = as_string(member(ops[i], op, "symbol"), join(op, "symbol"));
    if (ops[i].contains("power")) oc.power = as_int(ops[i]["power"], join(op, "power"));
    oc.offset_per_index.assign(c.dimension, 0);
    if (ops[i].contains("offset_per_index")) {
      oc.offset_per_index = int_vector(ops[i]["offset_per_index"], join(op, "offset_per_index"), c.dimension);
    }
    c.operators.push_back(std::move(oc));
  }

  c.norm = parse_norm(member(doc, "", "norm"), "norm");
  c.K = parse_region(member(doc, "", "K"), "K", c.dimension);
  c.region = doc.contains("region") ? parse_region(doc["region"], "region", c.dimension) : dilated_box(c.K, 1);

  if (doc.contains("horizon")) c.horizon = as_int(doc["horizon"], "horizon");
  if (doc.contains("tol")) c.tol = as_number(doc["tol"], "tol");
  if (doc.contains("epsilon")) c.epsilon = as_number(doc["epsilon"], "epsilon");
  if (doc.contains("index_range")) {
    const auto r = int_vector(doc["index_range"], "index_range", 2);
    c.first_index = r[0];
    c.last_index = r[1];
  }
  if (doc.contains("output_dir")) c.output_dir = as_string(doc["output_dir"], "output_dir");
  validate_config(c);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

void apply_overrides(ScenarioConfig& c, const Overrides& o) {
  if (o.horizon) c.horizon = *o.horizon;
  if (o.tol) c.tol = *o.tol;
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (o.mode) c.mode = *o.mode;
  if (o.output_dir) c.output_dir = *o.output_dir;
  validate_config(c);
}

void validate_config(const ScenarioConfig& c) {
  if (!c.weights.count(c.eta)) throw ConfigError("eta", "undeclared weight '" + c.eta + "'");
  if (c.operators.empty()) throw ConfigError("operators", "at least one operator is required");
  for (std::size_t i = 0; i < c.operators.size(); ++i) {
    const auto& op = c.operators[i];
    const std::string p = index("operators", i);
    if (!c.maps.count(op.map)) throw ConfigError(join(p, "map"), "undeclared map '" + op.map + "'");
    if (!c.weights.count(op.symbol)) throw ConfigError(join(p, "symbol"), "undeclared weight '" + op.symbol + "'");
    if (op.power < 1) throw ConfigError(join(p, "power"), "must be a positive integer");
  }
  switch (c.mode) {
    case Mode::Transitive:
      if (c.operators.size() != 1) throw ConfigError("operators", "transitive mode takes exactly one operator");
      if (c.horizon < 1) throw ConfigError("horizon", "must be at least 1");
      if (!(c.tol > 0.0 && c.tol < 1.0)) throw ConfigError("tol", "must lie in (0, 1)");
      break;
    case Mode::Disjoint:
      if (c.operators.size() < 2) throw ConfigError("operators", "disjoint mode needs at least two operators");
      for (std::size_t i = 1; i < c.operators.size(); ++i) {
        if (c.operators[i].power <= c.operators[i - 1].power) {
          throw ConfigError(join(index("operators", i), "power"), "powers must be strictly increasing");
        }
      }
      if (c.horizon < 1) throw ConfigError("horizon", "must be at least 1");
      if (!(c.tol > 0.0 && c.tol < 1.0)) throw ConfigError("tol", "must lie in (0, 1)");
      break;
    case Mode::Semi:
      if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("epsilon", "must lie in (0, 1)");
      if (c.first_index > c.last_index) throw ConfigError("index_range", "first index exceeds last index");
      break;
  }
}

namespace {

WeightedCompositionOperator make_op(const ScenarioConfig& c, const OperatorConfig& oc) {
  return WeightedCompositionOperator(c.maps.at(oc.map), c.weights.at(oc.symbol), CompactRegion(c.region));
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& c) {
  validate_config(c);
  return Scenario(c.norm, c.weights.at(c.eta), make_op(c, c.operators.front()), CompactRegion(c.region));
}

DisjointSystem build_disjoint(const ScenarioConfig& c) {
  validate_config(c);
  std::vector<WeightedCompositionOperator> ops;
  std::vector<std::int64_t> powers;
  for (const auto& oc : c.operators) {
    ops.push_back(make_op(c, oc));
    powers.push_back(oc.power);
  }
  return DisjointSystem(c.norm, c.weights.at(c.eta), std::move(ops), std::move(powers), CompactRegion(c.region));
}

FamilySystem build_family(const ScenarioConfig& c) {
  validate_config(c);
  std::vector<FamilyMember> members;
  for (const auto& oc : c.operators) {
    const LatticeMap& m = c.maps.at(oc.map);
    members.push_back({m.linear(), m.offset(), oc.offset_per_index, c.weights.at(oc.symbol)});
  }
  return FamilySystem(c.norm, c.weights.at(c.eta), std::move(members), c.first_index, c.last_index,
                      CompactRegion(c.region));
}

RunResult run_scenario(const ScenarioConfig& c) {
  RunResult out;
  try {
    validate_config(c);
    const CompactRegion K(c.K);
    const WeightSpec& eta = c.weights.at(c.eta);
    json result;
    bool found = false;
    switch (c.mode) {
      case Mode::Transitive: {
        const CriterionReport r = check_transitivity(build_scenario(c), K, c.horizon, c.tol);
        result = to_json(r);
        found = r.verdict == Verdict::WitnessFound;
        out.curves.push_back({c.name + "_transitive.csv", transitive_curves(r)});
        break;
      }
      case Mode::Disjoint: {
        const DisjointReport r = check_disjoint_transitivity(build_disjoint(c), K, c.horizon, c.tol);
        result = to_json(r);
        found = r.verdict == Verdict::WitnessFound;
        out.curves.push_back({c.name + "_disjoint.csv", disjoint_curves(r)});
        break;
      }
      case Mode::Semi: {
        const EpsilonReport r = check_semi_transitivity(build_family(c), K, c.epsilon);
        result = to_json(r);
        found = r.tail_found;
        out.curves.push_back({c.name + "_semi.csv", semi_curves(r)});
        break;
      }
    }
    out.exit_code = found ? kExitFound : kExitNotFound;
    json doc;
    doc["scenario"] = c.name;
    doc["mode"] = to_string(c.mode);
    doc["norm"] = c.norm.describe();
    doc["eta"] = eta.describe();
    doc["horizon"] = c.horizon;
    doc["tol"] = c.tol;
    doc["epsilon"] = c.epsilon;
    doc["exit_code"] = out.exit_code;
    doc["result"] = std::move(result);
    out.report = std::move(doc);
  } catch (const std::exception& e) {
    out = RunResult{};
    out.exit_code = kExitError;
    out.diagnostic = e.what();
    out.report = {{"scenario", c.name}, {"mode", to_string(c.mode)}, {"exit_code", kExitError},
                  {"error", e.what()}};
  }
  return out;
}

std::vector<std::filesystem::path> write_outputs(const RunResult& result, const std::string& name,
                                                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const auto put = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("cannot write " + p.string());
    os << text;
    written.push_back(p);
  };
  put(dir / (name + ".json"), result.report.dump(2) + "\n");
  for (const auto& f : result.curves) put(dir / f.name, f.content);
  return written;
}

}  // namespace wcdyn
