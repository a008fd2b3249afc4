#include "frechet_tree/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace frechet_tree {

namespace {

[[noreturn]] void invalid(ErrorCode code, const std::string& pointer, const std::string& detail) {
  std::string msg = std::string(to_string(code)) + " at " + (pointer.empty() ? "/" : pointer);
  if (!detail.empty()) msg += ": " + detail;
  throw Error(ErrorCode::ValidationError, msg);
}

const Json& member(const Json& obj, const char* key, const std::string& pointer) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, "expected an object at " + pointer);
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::ParseError, "missing \"" + std::string(key) + "\" at " + pointer);
  }
  return *it;
}

double number(const Json& v, const std::string& pointer) {
  if (!v.is_number()) throw Error(ErrorCode::ParseError, "expected a number at " + pointer);
  return v.get<double>();
}

std::string text(const Json& v, const std::string& pointer) {
  if (!v.is_string()) throw Error(ErrorCode::ParseError, "expected a string at " + pointer);
  return v.get<std::string>();
}

std::size_t index(const Json& v, const std::string& pointer) {
  if (!v.is_number_unsigned()) {
    throw Error(ErrorCode::ParseError, "expected a nonnegative integer at " + pointer);
  }
  return v.get<std::size_t>();
}

const Json& array(const Json& v, const std::string& pointer) {
  if (!v.is_array()) throw Error(ErrorCode::ParseError, "expected an array at " + pointer);
  return v;
}

void only_keys(const Json& obj, std::initializer_list<const char*> keys, const std::string& pointer) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw Error(ErrorCode::ParseError, "unknown key \"" + key + "\" at " + pointer);
  }
}

std::pair<std::size_t, std::size_t> line_column(const std::string& s, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, s.size()); ++i) {
    if (s[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string content = ss.str();
  try {
    return Json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_column(content, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorCode::ParseError,
                path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

std::shared_ptr<const MetricTree> parse_tree(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "tree file must hold an object");
  only_keys(doc, {"vertices", "edges"}, "/");
  std::vector<std::string> vertices;
  std::set<std::string> known;
  const bool listed = doc.contains("vertices");
  if (listed) {
    const Json& vs = array(doc["vertices"], "/vertices");
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::string ptr = "/vertices/" + std::to_string(i);
      vertices.push_back(text(vs[i], ptr));
      if (!known.insert(vertices.back()).second) {
        throw Error(ErrorCode::ParseError, "vertex \"" + vertices.back() + "\" listed twice at " + ptr);
      }
    }
  }
  const Json& es = array(member(doc, "edges", ""), "/edges");
  std::vector<EdgeSpec> edges;
  for (std::size_t i = 0; i < es.size(); ++i) {
    const std::string ptr = "/edges/" + std::to_string(i);
    only_keys(es[i], {"u", "v", "length"}, ptr);
    EdgeSpec e{text(member(es[i], "u", ptr), ptr + "/u"), text(member(es[i], "v", ptr), ptr + "/v"),
               number(member(es[i], "length", ptr), ptr + "/length")};
    if (!(e.length > 0.0) || !std::isfinite(e.length)) {
      invalid(ErrorCode::NonpositiveLength, ptr, "length " + format_number(e.length));
    }
    if (listed) {
      if (!known.count(e.u)) invalid(ErrorCode::UnknownVertex, ptr + "/u", e.u);
      if (!known.count(e.v)) invalid(ErrorCode::UnknownVertex, ptr + "/v", e.v);
    }
    edges.push_back(std::move(e));
  }
  try {
    if (listed) return std::make_shared<const MetricTree>(MetricTree::build(vertices, edges));
    if (edges.empty()) throw Error(ErrorCode::Disconnected, "no vertices");
    return std::make_shared<const MetricTree>(MetricTree::build(edges));
  } catch (const Error& e) {
    invalid(e.code(), "/edges", e.detail());
  }
}

TreePoint parse_location(const MetricTree& tree, const Json& loc, const std::string& pointer) {
  if (!loc.is_object()) throw Error(ErrorCode::ParseError, "expected a location at " + pointer);
  if (loc.contains("vertex")) {
    only_keys(loc, {"vertex"}, pointer);
    const std::string name = text(loc["vertex"], pointer + "/vertex");
    const auto v = tree.find_vertex(name);
    if (!v) invalid(ErrorCode::UnknownVertex, pointer + "/vertex", name);
    return TreePoint::at_vertex(*v);
  }
  only_keys(loc, {"edge", "offset"}, pointer);
  const std::size_t e = index(member(loc, "edge", pointer), pointer + "/edge");
  const double offset = number(member(loc, "offset", pointer), pointer + "/offset");
  if (e >= tree.num_edges() || !(offset >= 0.0 && offset <= tree.edge(e).length)) {
    invalid(ErrorCode::InvalidPoint, pointer, "edge " + std::to_string(e) + " offset " +
                                                  format_number(offset));
  }
  return tree.edge_point(e, offset);
}

std::shared_ptr<const TreeMeasure> parse_measure(const Json& doc,
                                                 std::shared_ptr<const MetricTree> tree) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "measure file must hold an object");
  only_keys(doc, {"atoms", "densities"}, "/");
  std::vector<Atom> atoms;
  std::vector<DensityPiece> pieces;
  if (doc.contains("atoms")) {
    const Json& as = array(doc["atoms"], "/atoms");
    for (std::size_t i = 0; i < as.size(); ++i) {
      const std::string ptr = "/atoms/" + std::to_string(i);
      only_keys(as[i], {"at", "w"}, ptr);
      const TreePoint at = parse_location(*tree, member(as[i], "at", ptr), ptr + "/at");
      const double w = number(member(as[i], "w", ptr), ptr + "/w");
      if (!(w >= 0.0) || !std::isfinite(w)) invalid(ErrorCode::NegativeWeight, ptr + "/w", "");
      atoms.push_back({at, w});
    }
  }
  if (doc.contains("densities")) {
    const Json& ds = array(doc["densities"], "/densities");
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const std::string ptr = "/densities/" + std::to_string(i);
      only_keys(ds[i], {"edge", "from", "to", "value"}, ptr);
      DensityPiece p{index(member(ds[i], "edge", ptr), ptr + "/edge"),
                     number(member(ds[i], "from", ptr), ptr + "/from"),
                     number(member(ds[i], "to", ptr), ptr + "/to"),
                     number(member(ds[i], "value", ptr), ptr + "/value")};
      if (!(p.value >= 0.0) || !std::isfinite(p.value)) {
        invalid(ErrorCode::NegativeWeight, ptr + "/value", "");
      }
      if (p.edge >= tree->num_edges() || !(p.from >= 0.0 && p.from < p.to) ||
          !(p.to <= tree->edge(p.edge).length)) {
        invalid(ErrorCode::InvalidPoint, ptr, "bad interval");
      }
      pieces.push_back(p);
    }
  }
  const bool only_densities = atoms.empty() && !pieces.empty();
  try {
    return std::make_shared<const TreeMeasure>(build_measure(tree, atoms, pieces));
  } catch (const Error& e) {
    std::string ptr = "/atoms";
    if (e.code() == ErrorCode::OverlappingDensityPieces || only_densities) ptr = "/densities";
    invalid(e.code(), ptr, e.detail());
  }
}

Json tree_to_json(const MetricTree& tree) {
  Json doc;
  doc["vertices"] = Json::array();
  for (VertexId v = 0; v < tree.num_vertices(); ++v) doc["vertices"].push_back(tree.vertex_name(v));
  doc["edges"] = Json::array();
  for (const auto& e : tree.edges()) {
    doc["edges"].push_back(
        {{"u", tree.vertex_name(e.u)}, {"v", tree.vertex_name(e.v)}, {"length", e.length}});
  }
  return doc;
}

Json measure_to_json(const TreeMeasure& mu) {
  Json doc;
  doc["atoms"] = Json::array();
  for (const auto& a : mu.atoms()) {
    doc["atoms"].push_back({{"at", location_json(mu.tree(), a.at)}, {"w", a.weight}});
  }
  doc["densities"] = Json::array();
  for (const auto& d : mu.densities()) {
    doc["densities"].push_back({{"edge", d.edge}, {"from", d.from}, {"to", d.to}, {"value", d.value}});
  }
  return doc;
}

TreePoint parse_point(const MetricTree& tree, const std::string& s) {
  auto bad = [&s](const std::string& why) -> TreePoint {
    throw Error(ErrorCode::ParseError, "point \"" + s + "\": " + why);
  };
  if (s.rfind("vertex:", 0) == 0) {
    const std::string name = s.substr(7);
    const auto v = tree.find_vertex(name);
    if (!v) throw Error(ErrorCode::UnknownVertex, name);
    return TreePoint::at_vertex(*v);
  }
  if (s.rfind("edge:", 0) != 0) return bad("expected vertex:<id> or edge:<id>:<offset>");
  const std::string rest = s.substr(5);
  const auto colon = rest.find(':');
  if (colon == std::string::npos) return bad("missing offset");
  std::size_t e = 0;
  const char* first = rest.data();
  const char* mid = rest.data() + colon;
  const auto r1 = std::from_chars(first, mid, e);
  if (r1.ec != std::errc() || r1.ptr != mid) return bad("bad edge index");
  const std::string off = rest.substr(colon + 1);
  double offset = 0.0;
  const auto r2 = std::from_chars(off.data(), off.data() + off.size(), offset);
  if (r2.ec != std::errc() || r2.ptr != off.data() + off.size() || off.empty()) {
    return bad("bad offset");
  }
  if (e >= tree.num_edges() || !(offset >= 0.0 && offset <= tree.edge(e).length)) {
    throw Error(ErrorCode::InvalidPoint, s);
  }
  return tree.edge_point(e, offset);
}

std::string format_point(const MetricTree& tree, const TreePoint& p) {
  if (p.is_vertex()) return "vertex:" + tree.vertex_name(p.vertex());
  return "edge:" + std::to_string(p.edge()) + ":" + format_number(p.offset());
}

Json location_json(const MetricTree& tree, const TreePoint& p) {
  if (p.is_vertex()) return {{"vertex", tree.vertex_name(p.vertex())}};
  return {{"edge", p.edge()}, {"offset", p.offset()}};
}

Json to_json(const MetricTree& tree, const DirectionalDerivative& d) {
  return {{"at", location_json(tree, d.at)},
          {"toward", location_json(tree, d.toward)},
          {"value", d.value},
          {"outside", d.outside_term},
          {"inside", d.inside_term}};
}

Json to_json(const MetricTree& tree, const MinimizerSet& m) {
  Json path = Json::array();
  for (VertexId v : m.segment.path) path.push_back(tree.vertex_name(v));
  Json cert = Json::array();
  for (const auto& d : m.certificate) cert.push_back(to_json(tree, d));
  return {{"segment",
           {{"a", location_json(tree, m.segment.a)},
            {"b", location_json(tree, m.segment.b)},
            {"length", m.segment.length},
            {"degenerate", m.degenerate()},
            {"path", path}}},
          {"value", m.value},
          {"certificate", cert}};
}

Json to_json(const MetricTree& tree, const StickinessReport& r) {
  Json out;
  out["point"] = location_json(tree, r.point);
  out["classification"] = to_string(r.classification);
  out["neighbors"] = Json::array();
  for (const auto& v : r.neighbors) out["neighbors"].push_back(location_json(tree, v));
  out["derivatives"] = r.derivatives;
  out["zero_indices"] = r.zero_indices;
  out["descent_index"] = r.descent_index ? Json(*r.descent_index) : Json(nullptr);
  out["robustness_radius"] = r.robustness_radius ? Json(*r.robustness_radius) : Json(nullptr);
  return out;
}

Json to_json(const MetricTree& tree, const ExperimentReport& r) {
  Json out;
  out["experiment"] = r.experiment;
  out["seed"] = r.seed;
  out["n"] = r.n;
  out["trials"] = r.trials;
  out["loss"] = r.loss;
  out["point"] = location_json(tree, r.point);
  out["classification"] = r.classification;
  out["pass"] = r.pass;
  out["rows"] = Json::array();
  for (const auto& row : r.rows) {
    out["rows"].push_back({{"label", row.label},
                           {"parameter", row.parameter},
                           {"empirical", row.empirical},
                           {"sigma", row.sigma},
                           {"reference", row.reference},
                           {"relation", row.relation},
                           {"count", row.count},
                           {"pass", row.pass}});
  }
  out["statistics"] = Json::object();
  for (const auto& [key, value] : r.statistics) out["statistics"][key] = value;
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string to_csv(const MetricTree& tree, const ExperimentReport& r) {
  std::string out =
      "experiment,seed,n,trials,loss,point,label,parameter,empirical,sigma,reference,relation,count,"
      "pass\r\n";
  for (const auto& row : r.rows) {
    const std::string fields[] = {r.experiment,
                                  std::to_string(r.seed),
                                  std::to_string(r.n),
                                  std::to_string(r.trials),
                                  r.loss,
                                  format_point(tree, r.point),
                                  row.label,
                                  format_number(row.parameter),
                                  format_number(row.empirical),
                                  format_number(row.sigma),
                                  format_number(row.reference),
                                  row.relation,
                                  std::to_string(row.count),
                                  row.pass ? "true" : "false"};
    bool first = true;
    for (const auto& f : fields) {
      if (!first) out += ',';
      out += csv_field(f);
      first = false;
    }
    out += "\r\n";
  }
  return out;
}

ExperimentSpec parse_experiment(const Json& doc, std::shared_ptr<const TreeMeasure> measure) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "config must hold an object");
  only_keys(doc,
            {"experiment", "n", "trials", "point", "expansion", "sidedness", "thresholds",
             "selection", "expect", "ks_threshold", "threads"},
            "/");
  ExperimentSpec spec;
  ExperimentConfig& c = spec.config;
  c.measure = std::move(measure);
  const MetricTree& tree = c.measure->tree();

  spec.experiment = text(member(doc, "experiment", ""), "/experiment");
  if (spec.experiment != "lln" && spec.experiment != "clt" && spec.experiment != "concentration" &&
      spec.experiment != "onesided_location") {
    invalid(ErrorCode::InvalidParameter, "/experiment", spec.experiment);
  }
  auto count = [&](const char* key, std::size_t fallback) {
    if (!doc.contains(key)) return fallback;
    const std::size_t v = index(doc[key], std::string("/") + key);
    if (v < 1) invalid(ErrorCode::InvalidParameter, std::string("/") + key, "must be at least 1");
    return v;
  };
  c.n = count("n", c.n);
  c.trials = count("trials", c.trials);
  c.point = parse_point(tree, text(member(doc, "point", ""), "/point"));
  if (doc.contains("expansion")) {
    const Json& e = doc["expansion"];
    only_keys(e, {"a", "K"}, "/expansion");
    c.expansion = Expansion{number(member(e, "a", "/expansion"), "/expansion/a"),
                            number(member(e, "K", "/expansion"), "/expansion/K")};
    if (!(c.expansion->a > 0.0) || !(c.expansion->K > 0.0)) {
      invalid(ErrorCode::InvalidParameter, "/expansion", "a and K must be positive");
    }
  }
  if (doc.contains("sidedness")) {
    const std::string s = text(doc["sidedness"], "/sidedness");
    if (s == "two") {
      c.sidedness = Sidedness::Two;
    } else if (s == "one") {
      c.sidedness = Sidedness::One;
    } else {
      invalid(ErrorCode::InvalidParameter, "/sidedness", s);
    }
  }
  if (doc.contains("thresholds")) {
    const Json& ts = array(doc["thresholds"], "/thresholds");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      c.thresholds.push_back(number(ts[i], "/thresholds/" + std::to_string(i)));
    }
  }
  if (doc.contains("selection")) {
    const std::string s = text(doc["selection"], "/selection");
    if (s == "midpoint") {
      c.selection = Selection::Midpoint;
    } else if (s == "left") {
      c.selection = Selection::Left;
    } else if (s == "right") {
      c.selection = Selection::Right;
    } else {
      invalid(ErrorCode::InvalidParameter, "/selection", s);
    }
  }
  if (doc.contains("expect")) {
    const std::string s = text(doc["expect"], "/expect");
    if (s == "sticky") {
      c.expect = Stickiness::Sticky;
    } else if (s == "partly_sticky") {
      c.expect = Stickiness::PartlySticky;
    } else if (s == "nonsticky") {
      c.expect = Stickiness::Nonsticky;
    } else {
      invalid(ErrorCode::InvalidParameter, "/expect", s);
    }
  }
  if (doc.contains("ks_threshold")) c.ks_threshold = number(doc["ks_threshold"], "/ks_threshold");
  if (doc.contains("threads")) c.threads = static_cast<unsigned>(index(doc["threads"], "/threads"));
  return spec;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  if (spec.experiment == "lln") return run_lln_experiment(spec.config);
  if (spec.experiment == "clt") return run_clt_experiment(spec.config);
  if (spec.experiment == "concentration") return run_concentration_experiment(spec.config);
  if (spec.experiment == "onesided_location") return run_onesided_location_experiment(spec.config);
  throw Error(ErrorCode::InvalidParameter, "unknown experiment " + spec.experiment);
}

}  // namespace frechet_tree
