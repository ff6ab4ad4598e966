#include "webcurv/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "webcurv/connection.hpp"
#include "webcurv/error.hpp"

namespace webcurv {
namespace {

using nlohmann::json;

struct TripleIndex {
  int i, j, k;  // 0-based
};

std::vector<TripleIndex> requested_triples(const RunConfig& config, int d) {
  std::vector<TripleIndex> out;
  if (config.all_triples) {
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int k = j + 1; k < d; ++k) out.push_back({i, j, k});
  } else if (config.triple) {
    const auto& t = *config.triple;
    out.push_back({t[0] - 1, t[1] - 1, t[2] - 1});
  }
  return out;
}

WebDefinition sub_web(const WebDefinition& web, std::initializer_list<int> idx) {
  WebDefinition out;
  for (int i : idx) {
    out.integrals.push_back(web.integrals[i]);
    out.labels.push_back(web.labels[i]);
  }
  return out;
}

void mark_skipped(PointRecord& r, const Error& e) {
  r.ok = false;
  r.skip_reason = std::string(e.name());
  r.detail = e.what();
}

// Returns false (and fills the skip fields) if the point fails the screen.
bool passes_screen(const WebDefinition& web, PointRecord& r, Scalar margin) {
  if (margin <= 0) return true;
  r.skip_reason = screen_point(web, r.point, margin);
  if (r.skip_reason.empty()) return true;
  r.ok = false;
  r.detail = "point within the transversality screen margin";
  return false;
}

Scalar relative_to_trace(Scalar diff, Scalar trace) {
  return std::abs(diff) / std::max<Scalar>(1, std::abs(trace));
}

void run_check(const WebDefinition& web, PointRecord& r) {
  const TransversalityReport t = check_transversality(web, r.point);
  r.pairs = t.pairs;
  r.vanishing_gradients = t.vanishing_gradients;
  r.ok = !t.any_degenerate();
  if (!r.ok) r.detail = "DEGENERATE";
}

void run_curvature(const RunConfig& config, const WebDefinition& web,
                   PointRecord& r) {
  if (!passes_screen(web, r, config.screen_margin)) return;
  const auto f = web_jets(web, r.point, config.jet_order);
  const ConnectionAtPoint c = curvature(f, r.point);
  r.trace_k = c.trace_kk;
  r.trace_prop = trace_via_proposition(f).coeff;
  r.path_residual = relative_to_trace(*r.trace_k - *r.trace_prop, *r.trace_k);
  r.k = c.k;
  r.upper_rows_max = c.upper_rows_max;
  r.ok = true;
}

void run_trace_check(const RunConfig& config, const WebDefinition& web,
                     PointRecord& r) {
  if (!passes_screen(web, r, config.screen_margin)) return;
  const auto f = web_jets(web, r.point, config.jet_order);
  const ConnectionAtPoint c = curvature(f, r.point);
  r.trace_k = c.trace_kk;
  r.trace_prop = trace_via_proposition(f).coeff;
  r.sc = sum_subweb_curvatures(f).coeff;
  r.residual = std::abs(*r.trace_k - *r.sc);
  r.relative_residual = relative_to_trace(*r.residual, *r.trace_k);
  r.path_residual = relative_to_trace(*r.trace_k - *r.trace_prop, *r.trace_k);
  r.ok = true;
}

void run_blaschke(const RunConfig& config, const WebDefinition& web,
                  const std::vector<TripleIndex>& triples, PointRecord& r) {
  const auto f = web_jets(web, r.point, config.jet_order);
  for (const auto& t : triples) {
    const WebDefinition sub = sub_web(web, {t.i, t.j, t.k});
    if (!passes_screen(sub, r, config.screen_margin)) {
      r.detail += " (triple " + std::to_string(t.i + 1) + "," +
                  std::to_string(t.j + 1) + "," + std::to_string(t.k + 1) + ")";
      r.blaschke.clear();
      return;
    }
    try {
      r.blaschke.push_back(
          {t.i + 1, t.j + 1, t.k + 1, blaschke(f[t.i], f[t.j], f[t.k]).coeff});
    } catch (const Error& e) {
      throw Error(e.code(), "triple (" + std::to_string(t.i + 1) + "," +
                                std::to_string(t.j + 1) + "," +
                                std::to_string(t.k + 1) + "): " + e.what());
    }
  }
  r.ok = true;
}

void run_gamma(const RunConfig& config, const WebDefinition& web,
               PointRecord& r) {
  WebDefinition target = web;
  if (config.triple) {
    const auto& t = *config.triple;
    target = sub_web(web, {t[0] - 1, t[1] - 1, t[2] - 1});
  }
  if (!passes_screen(target, r, config.screen_margin)) return;
  const int order = config.jet_order > 0 ? config.jet_order
                                         : default_jet_order(target.d());
  r.gamma = gamma(web_jets(target, r.point, order));
  r.ok = true;
}

Scalar median(std::vector<Scalar> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string format_point(Point p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

void summarize(Report& report) {
  Summary& s = report.summary;
  const RunConfig& config = report.config;
  s.requested = report.points.size();
  std::vector<Scalar> residuals;
  for (const auto& r : report.points) {
    const bool evaluated = r.ok || (config.command == Command::Check &&
                                    r.skip_reason.empty());
    if (evaluated) {
      ++s.evaluated;
    } else {
      ++s.skipped;
    }
    if (config.command == Command::Check && !r.ok && r.skip_reason.empty()) {
      ++s.failures;
    }
    if (r.relative_residual) {
      residuals.push_back(*r.relative_residual);
      s.max_residual = std::max(s.max_residual, *r.relative_residual);
      if (*r.relative_residual > config.tolerance) ++s.failures;
    }
    if (r.path_residual) {
      s.max_path_residual = std::max(s.max_path_residual, *r.path_residual);
      if (*r.path_residual > config.tolerance) {
        ++s.failures;
        s.warnings.push_back("trace paths disagree at " + format_point(r.point));
      }
    }
    if (r.upper_rows_max && *r.upper_rows_max > kLastRowAdvisoryTolerance) {
      std::ostringstream os;
      os << "K has nonzero entries above the last row at " << format_point(r.point)
         << " (max " << *r.upper_rows_max << ")";
      s.warnings.push_back(os.str());
    }
  }
  s.median_residual = median(residuals);
  if (config.command != Command::Check && s.evaluated == 0 && s.requested > 0) {
    s.warnings.push_back("no admissible point was evaluated");
  }
  report.exit_code = s.failures > 0 ? kExitCheckFailed : kExitOk;
}

json matrix_json(const RealMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json point_json(const PointRecord& r) {
  json p = {{"x", r.point.x}, {"y", r.point.y}, {"ok", r.ok}};
  if (!r.skip_reason.empty()) p["skip_reason"] = r.skip_reason;
  if (!r.detail.empty()) p["detail"] = r.detail;
  if (!r.pairs.empty()) {
    json pairs = json::array();
    for (const auto& v : r.pairs) {
      pairs.push_back({{"i", v.i + 1},
                       {"j", v.j + 1},
                       {"det", v.det},
                       {"sine", v.sine},
                       {"verdict", v.degenerate ? "DEGENERATE" : "TRANSVERSE"}});
    }
    p["pairs"] = std::move(pairs);
  }
  if (!r.vanishing_gradients.empty()) {
    json v = json::array();
    for (int i : r.vanishing_gradients) v.push_back(i + 1);
    p["vanishing_gradients"] = std::move(v);
  }
  if (r.trace_k) p["trace_K"] = *r.trace_k;
  if (r.trace_prop) p["trace_prop"] = *r.trace_prop;
  if (r.sc) p["SC"] = *r.sc;
  if (r.residual) p["residual"] = *r.residual;
  if (r.relative_residual) p["relative_residual"] = *r.relative_residual;
  if (r.path_residual) p["path_residual"] = *r.path_residual;
  if (r.k) p["K"] = matrix_json(*r.k);
  if (r.upper_rows_max) {
    p["upper_rows_max"] = *r.upper_rows_max;
    p["last_row_only"] = *r.upper_rows_max <= kLastRowAdvisoryTolerance;
  }
  if (!r.blaschke.empty()) {
    json b = json::array();
    for (const auto& t : r.blaschke) {
      b.push_back({{"i", t.i}, {"j", t.j}, {"k", t.k}, {"coeff", t.coeff}});
    }
    p["blaschke"] = std::move(b);
  }
  if (r.gamma) {
    p["gamma"] = {{"value", r.gamma->value}, {"dx", r.gamma->dx}, {"dy", r.gamma->dy}};
  }
  return p;
}

std::string csv_number(std::optional<Scalar> v) {
  if (!v) return {};
  std::ostringstream os;
  os.precision(17);
  os << *v;
  return os.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view command_name(Command c) noexcept {
  switch (c) {
    case Command::Check: return "check";
    case Command::Curvature: return "curvature";
    case Command::TraceCheck: return "trace-check";
    case Command::Blaschke: return "blaschke";
    case Command::Gamma: return "gamma";
  }
  return "unknown";
}

std::vector<Scalar> parse_number_list(std::string_view text, std::size_t count) {
  std::vector<Scalar> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    std::string_view item = text.substr(start, comma == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    Scalar v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw Error(ErrorCode::InputError,
                  "expected a number in '" + std::string(text) + "', got '" +
                      std::string(item) + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.size() != count) {
    throw Error(ErrorCode::InputError,
                "expected " + std::to_string(count) + " comma-separated numbers in '" +
                    std::string(text) + "'");
  }
  return out;
}

void validate(const RunConfig& config, int d) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InputError, msg); };
  if (!(config.tolerance > 0)) fail("tolerance must be positive");
  if (config.screen_margin < 0) fail("screen margin must be non-negative");
  if (config.jet_order < 0) fail("jet order must be non-negative");
  if (config.grid && (config.grid->nx < 1 || config.grid->ny < 1)) {
    fail("grid counts must be at least 1");
  }
  if (config.points.empty() && !config.grid) fail("no points requested");
  if (config.command == Command::Blaschke && !config.triple && !config.all_triples) {
    fail("blaschke needs --triple i,j,k or --all-triples");
  }
  if (config.triple && d > 0) {
    const auto& t = *config.triple;
    if (!(1 <= t[0] && t[0] < t[1] && t[1] < t[2] && t[2] <= d)) {
      fail("triple must satisfy 1 <= i < j < k <= " + std::to_string(d));
    }
  }
}

std::vector<Point> expand_points(const RunConfig& config) {
  std::vector<Point> out = config.points;
  if (config.grid) {
    const GridSpec& g = *config.grid;
    auto at = [](Scalar a, Scalar b, int n, int k) {
      return n == 1 ? a : a + (b - a) * static_cast<Scalar>(k) / (n - 1);
    };
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        out.push_back({at(g.x0, g.x1, g.nx, i), at(g.y0, g.y1, g.ny, j)});
  }
  return out;
}

Report run_command(const RunConfig& config, const WebDefinition& web) {
  validate(config, web.d());
  if (config.command != Command::Check) require_supported_size(web.d());

  Report report;
  report.config = config;
  report.web = web;
  const auto triples = requested_triples(config, web.d());

  for (const Point& p : expand_points(config)) {
    PointRecord r;
    r.point = p;
    try {
      switch (config.command) {
        case Command::Check: run_check(web, r); break;
        case Command::Curvature: run_curvature(config, web, r); break;
        case Command::TraceCheck: run_trace_check(config, web, r); break;
        case Command::Blaschke: run_blaschke(config, web, triples, r); break;
        case Command::Gamma: run_gamma(config, web, r); break;
      }
    } catch (const Error& e) {
      PointRecord skipped;
      skipped.point = p;
      mark_skipped(skipped, e);
      r = std::move(skipped);
    }
    report.points.push_back(std::move(r));
  }
  summarize(report);
  return report;
}

std::string to_json(const Report& report) {
  const RunConfig& c = report.config;
  json web = {{"path", c.web_path}, {"d", report.web.d()}};
  json integrals = json::array();
  for (int i = 0; i < report.web.d(); ++i) {
    integrals.push_back({{"label", report.web.labels[i]},
                         {"expression", print(report.web.integrals[i])}});
  }
  web["integrals"] = std::move(integrals);

  json config = {{"command", command_name(c.command)},
                 {"tolerance", c.tolerance},
                 {"screen_margin", c.screen_margin},
                 {"jet_order", c.jet_order > 0 ? c.jet_order
                                               : default_jet_order(report.web.d())},
                 {"format", c.format == Format::Json ? "json" : "csv"}};
  if (c.grid) {
    config["grid"] = {c.grid->x0, c.grid->x1, c.grid->nx,
                      c.grid->y0, c.grid->y1, c.grid->ny};
  }
  if (c.triple) config["triple"] = *c.triple;
  if (c.all_triples) config["all_triples"] = true;

  json points = json::array();
  for (const auto& r : report.points) points.push_back(point_json(r));

  const Summary& s = report.summary;
  json summary = {{"requested", s.requested},
                  {"evaluated", s.evaluated},
                  {"skipped", s.skipped},
                  {"failures", s.failures},
                  {"exit_code", report.exit_code},
                  {"warnings", s.warnings}};
  if (c.command == Command::TraceCheck) {
    summary["max_residual"] = s.max_residual;
    summary["median_residual"] = s.median_residual;
  }
  if (c.command == Command::TraceCheck || c.command == Command::Curvature) {
    summary["max_path_residual"] = s.max_path_residual;
  }

  json doc = {{"web", std::move(web)},
              {"config", std::move(config)},
              {"points", std::move(points)},
              {"summary", std::move(summary)}};
  return doc.dump(2) + "\n";
}

std::string to_csv(const Report& report) {
  std::ostringstream os;
  const Command cmd = report.config.command;
  auto head = [&](const PointRecord& r) {
    os << csv_number(r.point.x) << ',' << csv_number(r.point.y) << ','
       << (r.ok ? "true" : "false") << ',' << csv_escape(r.skip_reason);
  };
  switch (cmd) {
    case Command::Check:
      os << "x,y,ok,skip_reason,min_sine,degenerate_pairs\n";
      for (const auto& r : report.points) {
        head(r);
        Scalar min_sine = 1;
        std::string bad;
        for (const auto& v : r.pairs) {
          min_sine = std::min(min_sine, v.sine);
          if (v.degenerate) {
            if (!bad.empty()) bad += ';';
            bad += std::to_string(v.i + 1) + "-" + std::to_string(v.j + 1);
          }
        }
        if (!r.vanishing_gradients.empty()) min_sine = 0;
        os << ',' << (r.pairs.empty() && r.vanishing_gradients.empty()
                          ? std::string()
                          : csv_number(min_sine))
           << ',' << bad << '\n';
      }
      break;
    case Command::Curvature:
      os << "x,y,ok,skip_reason,trace_K,trace_prop,path_residual,upper_rows_max\n";
      for (const auto& r : report.points) {
        head(r);
        os << ',' << csv_number(r.trace_k) << ',' << csv_number(r.trace_prop) << ','
           << csv_number(r.path_residual) << ',' << csv_number(r.upper_rows_max)
           << '\n';
      }
      break;
    case Command::TraceCheck:
      os << "x,y,ok,skip_reason,trace_K,trace_prop,SC,residual,relative_residual\n";
      for (const auto& r : report.points) {
        head(r);
        os << ',' << csv_number(r.trace_k) << ',' << csv_number(r.trace_prop) << ','
           << csv_number(r.sc) << ',' << csv_number(r.residual) << ','
           << csv_number(r.relative_residual) << '\n';
      }
      break;
    case Command::Blaschke:
      os << "x,y,ok,skip_reason,i,j,k,coeff\n";
      for (const auto& r : report.points) {
        if (r.blaschke.empty()) {
          head(r);
          os << ",,,,\n";
          continue;
        }
        for (const auto& t : r.blaschke) {
          head(r);
          os << ',' << t.i << ',' << t.j << ',' << t.k << ',' << csv_number(t.coeff)
             << '\n';
        }
      }
      break;
    case Command::Gamma:
      os << "x,y,ok,skip_reason,gamma,gamma_x,gamma_y\n";
      for (const auto& r : report.points) {
        head(r);
        if (r.gamma) {
          os << ',' << csv_number(r.gamma->value) << ',' << csv_number(r.gamma->dx)
             << ',' << csv_number(r.gamma->dy) << '\n';
        } else {
          os << ",,,\n";
        }
      }
      break;
  }
  return os.str();
}

std::string render(const Report& report) {
  return report.config.format == Format::Json ? to_json(report) : to_csv(report);
}

}  // namespace webcurv
