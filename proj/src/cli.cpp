#include "frechet_tree/cli.hpp"

#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "frechet_tree/io.hpp"

namespace frechet_tree {

namespace {

struct Options {
  std::string tree;
  std::string measure;
  std::string loss = "power:p=1";
  std::string point;
  std::string toward;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
  std::optional<double> tol_pos;
  std::optional<double> tol_deriv;
};

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorCode::ParseError, std::string("missing ") + flag);
}

std::optional<Tolerances> tolerances(const Options& o, const MetricTree& tree,
                                     const LossFunction& loss) {
  if (!o.tol_pos && !o.tol_deriv) return std::nullopt;
  Tolerances t = default_tolerances(tree, loss);
  if (o.tol_pos) t.pos = *o.tol_pos;
  if (o.tol_deriv) t.deriv = *o.tol_deriv;
  return t;
}

std::string csv_line(std::initializer_list<std::string> fields) {
  std::string line;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) line += ',';
    line += csv_field(f);
    first = false;
  }
  return line + "\r\n";
}

std::string derivatives_csv(const MetricTree& tree, const std::vector<DirectionalDerivative>& ds) {
  std::string out = csv_line({"at", "toward", "value", "outside", "inside"});
  for (const auto& d : ds) {
    out += csv_line({format_point(tree, d.at), format_point(tree, d.toward), format_number(d.value),
                     format_number(d.outside_term), format_number(d.inside_term)});
  }
  return out;
}

struct Output {
  std::string text;
  int code = 0;
};

Output dispatch(const std::string& command, const Options& o) {
  const bool csv = o.format == "csv";
  require(o.tree, "--tree");
  require(o.measure, "--measure");
  const auto tree = parse_tree(read_json_file(o.tree));
  const auto mu = parse_measure(read_json_file(o.measure), tree);
  const LossFunction loss = parse_loss(o.loss);
  const auto tol = tolerances(o, *tree, loss);

  if (command == "solve") {
    const MinimizerSet m = minimizer_set(*tree, *mu, loss, tol);
    if (csv) {
      return {csv_line({"a", "b", "length", "degenerate", "value"}) +
              csv_line({format_point(*tree, m.segment.a), format_point(*tree, m.segment.b),
                        format_number(m.segment.length), m.degenerate() ? "true" : "false",
                        format_number(m.value)})};
    }
    Json doc{{"command", "solve"}, {"loss", loss.describe()}};
    const Json body = to_json(*tree, m);
    for (const auto& [k, v] : body.items()) doc[k] = v;
    return {doc.dump(2) + "\n"};
  }

  if (command == "derivative") {
    require(o.point, "--point");
    const TreePoint at = parse_point(*tree, o.point);
    std::vector<DirectionalDerivative> ds;
    if (o.toward.empty()) {
      ds = neighbor_derivatives(*tree, *mu, loss, at);
    } else {
      ds.push_back(directional_derivative(*tree, *mu, loss, at, parse_point(*tree, o.toward)));
    }
    if (csv) return {derivatives_csv(*tree, ds)};
    Json list = Json::array();
    for (const auto& d : ds) list.push_back(to_json(*tree, d));
    Json doc{{"command", "derivative"}, {"loss", loss.describe()}, {"derivatives", list}};
    return {doc.dump(2) + "\n"};
  }

  if (command == "classify") {
    require(o.point, "--point");
    const StickinessReport r = classify_stickiness(*tree, *mu, loss, parse_point(*tree, o.point), tol);
    if (csv) {
      std::string out = csv_line({"point", "classification", "neighbor", "derivative", "zero"});
      for (std::size_t i = 0; i < r.neighbors.size(); ++i) {
        const bool zero = std::find(r.zero_indices.begin(), r.zero_indices.end(), i) !=
                          r.zero_indices.end();
        out += csv_line({format_point(*tree, r.point), to_string(r.classification),
                         format_point(*tree, r.neighbors[i]), format_number(r.derivatives[i]),
                         zero ? "true" : "false"});
      }
      return {out};
    }
    Json doc{{"command", "classify"}, {"loss", loss.describe()}};
    const Json body = to_json(*tree, r);
    for (const auto& [k, v] : body.items()) doc[k] = v;
    return {doc.dump(2) + "\n"};
  }

  // simulate
  require(o.config, "--config");
  if (!o.seed) throw Error(ErrorCode::ParseError, "simulate needs --seed");
  ExperimentSpec spec = parse_experiment(read_json_file(o.config), mu);
  spec.config.loss = loss;
  spec.config.seed = *o.seed;
  spec.config.tolerances = tol;
  if (!o.point.empty()) spec.config.point = parse_point(*tree, o.point);
  const ExperimentReport r = run_experiment(spec);
  const int code = r.pass ? 0 : 2;
  if (csv) return {to_csv(*tree, r), code};
  return {to_json(*tree, r).dump(2) + "\n", code};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frechet means, stickiness and Monte Carlo checks on metric trees", "frechet-tree"};
  Options o;
  app.require_subcommand(1);
  app.add_option("--tree", o.tree, "Tree JSON file");
  app.add_option("--measure", o.measure, "Measure JSON file");
  app.add_option("--loss", o.loss, "Loss, e.g. power:p=1, huber:c=0.5, pseudohuber:c=1");
  app.add_option("--point", o.point, "vertex:<id> or edge:<index>:<offset>");
  app.add_option("--toward", o.toward, "Direction for derivative");
  app.add_option("--config", o.config, "Experiment config JSON file");
  app.add_option("--seed", o.seed, "Master seed (simulate)");
  app.add_option("--out", o.out, "Write the report here instead of stdout");
  app.add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--tol-pos", o.tol_pos, "Positional tolerance");
  app.add_option("--tol-deriv", o.tol_deriv, "Derivative zero band");
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "Minimizer segment and optimal value"},
      {"derivative", "Directional derivative at --point toward --toward"},
      {"classify", "Stickiness of --point"},
      {"simulate", "Seeded Monte Carlo experiment from --config"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();
  app.fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Output result;
  try {
    result = dispatch(command, o);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  if (o.out.empty()) {
    out << result.text;
  } else {
    std::ofstream file(o.out, std::ios::binary);
    if (!(file << result.text)) {
      err << "error: cannot write " << o.out << "\n";
      return 1;
    }
  }
  return result.code;
}

}  // namespace frechet_tree
