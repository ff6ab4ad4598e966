// webcurv: transversality, curvature, trace-formula and Blaschke reports for
// planar webs read from a web file.
//
//   webcurv <check|curvature|trace-check|blaschke|gamma> <webfile>
//           [--point x,y]... [--grid x0,x1,nx,y0,y1,ny] [--triple i,j,k]
//           [--all-triples] [--tol T] [--jet-order K] [--out path]
//           [--format json|csv]
//
// Exit status: 0 success, 1 a check failed, 2 bad input.
// Negative coordinates need the `--point=-0.5,1` spelling.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "webcurv/error.hpp"
#include "webcurv/expr.hpp"
#include "webcurv/report.hpp"

namespace {

using namespace webcurv;

struct RawOptions {
  std::string web_path;
  std::vector<std::string> points;
  std::string grid;
  std::string triple;
  bool all_triples = false;
  double tol = kDefaultTolerance;
  double margin = kDefaultScreenMargin;
  int jet_order = 0;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* sub, RawOptions& o) {
  sub->add_option("webfile", o.web_path, "web file, one `label = expression` per line")
      ->required();
  sub->add_option("--point", o.points, "evaluation point x,y (repeatable)")
      ->allow_extra_args(false);
  sub->add_option("--grid", o.grid, "grid x0,x1,nx,y0,y1,ny");
  sub->add_option("--triple", o.triple, "1-based integral indices i,j,k");
  sub->add_flag("--all-triples", o.all_triples, "every triple i<j<k");
  sub->add_option("--tol", o.tol, "relative tolerance")->capture_default_str();
  sub->add_option("--screen-margin", o.margin,
                  "skip points whose smallest pairwise gradient sine is at most this")
      ->capture_default_str();
  sub->add_option("--jet-order", o.jet_order, "jet order (default d+1)");
  sub->add_option("--out", o.out, "output file (default stdout)");
  sub->add_option("--format", o.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
}

int positive_count(double v, const std::string& what) {
  if (v != std::floor(v) || v < 1 || v > 1e6) {
    throw Error(ErrorCode::InputError, what + " must be a positive integer");
  }
  return static_cast<int>(v);
}

RunConfig to_config(Command command, const RawOptions& o) {
  RunConfig c;
  c.command = command;
  c.web_path = o.web_path;
  for (const auto& p : o.points) {
    const auto v = parse_number_list(p, 2);
    c.points.push_back({v[0], v[1]});
  }
  if (!o.grid.empty()) {
    const auto v = parse_number_list(o.grid, 6);
    c.grid = GridSpec{v[0], v[1], positive_count(v[2], "nx"),
                      v[3], v[4], positive_count(v[5], "ny")};
  }
  if (!o.triple.empty()) {
    const auto v = parse_number_list(o.triple, 3);
    std::array<int, 3> t{};
    for (int k = 0; k < 3; ++k) t[k] = positive_count(v[k], "triple index");
    c.triple = t;
  }
  c.all_triples = o.all_triples;
  c.tolerance = o.tol;
  c.screen_margin = o.margin;
  c.jet_order = o.jet_order;
  c.out_path = o.out;
  c.format = o.format == "csv" ? Format::Csv : Format::Json;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature and trace-formula checks for planar webs"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<Command, std::string>> commands = {
      {"check", {Command::Check, "pairwise transversality verdicts"}},
      {"curvature", {Command::Curvature, "curvature matrix K and its trace"}},
      {"trace-check", {Command::TraceCheck, "trace of K against the sum of sub-3-web curvatures"}},
      {"blaschke", {Command::Blaschke, "Blaschke curvature of 3-subwebs"}},
      {"gamma", {Command::Gamma, "trace element of the web (or of --triple)"}},
  };
  RawOptions raw;
  std::map<CLI::App*, Command> by_app;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    add_common(sub, raw);
    by_app[sub] = entry.first;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    const Command command = by_app.at(app.get_subcommands().front());
    const RunConfig config = to_config(command, raw);
    const WebDefinition web = load_web_file(config.web_path);
    const Report report = run_command(config, web);
    const std::string text = render(report);

    if (config.out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(config.out_path);
      if (!out) {
        std::cerr << "webcurv: cannot write " << config.out_path << "\n";
        return kExitInputError;
      }
      out << text;
    }
    for (const auto& w : report.summary.warnings) std::cerr << "warning: " << w << "\n";
    return report.exit_code;
  } catch (const Error& e) {
    std::cerr << "webcurv: " << e.name() << ": " << e.what() << "\n";
    return kExitInputError;
  }
}
