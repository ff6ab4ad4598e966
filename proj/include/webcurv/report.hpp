#pragma once

// Batch evaluation behind the command-line tool: point sets, per-point
// records and JSON/CSV rendering. Reports keep the order of the requested
// points and triples.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webcurv/expr.hpp"
#include "webcurv/jet.hpp"
#include "webcurv/jet_linalg.hpp"
#include "webcurv/trace_forms.hpp"

namespace webcurv {

enum class Command { Check, Curvature, TraceCheck, Blaschke, Gamma };
enum class Format { Json, Csv };

std::string_view command_name(Command c) noexcept;

/// Exit status contract of the tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInputError = 2;

inline constexpr Scalar kDefaultTolerance = 1e-6;
/// Points whose smallest pairwise gradient sine is at most this are skipped.
inline constexpr Scalar kDefaultScreenMargin = 1e-3;
/// Entries of K above the last row larger than this raise a warning.
inline constexpr Scalar kLastRowAdvisoryTolerance = 1e-7;

/// nx points from x0 to x1 inclusive (x0 alone when nx == 1), same for y.
struct GridSpec {
  Scalar x0 = 0, x1 = 0;
  int nx = 1;
  Scalar y0 = 0, y1 = 0;
  int ny = 1;
};

struct RunConfig {
  Command command = Command::TraceCheck;
  std::string web_path;
  std::vector<Point> points;
  std::optional<GridSpec> grid;
  Scalar tolerance = kDefaultTolerance;
  Scalar screen_margin = kDefaultScreenMargin;
  int jet_order = 0;  // 0 selects d + 1
  std::optional<std::array<int, 3>> triple;  // 1-based
  bool all_triples = false;
  std::string out_path;  // empty: stdout
  Format format = Format::Json;
};

/// Throws InputError for counts < 1, non-positive tolerances or a bad triple
/// for a web of size d (pass d <= 0 to skip the triple range check).
void validate(const RunConfig& config, int d);

/// Explicit points first, then the grid with x varying fastest.
std::vector<Point> expand_points(const RunConfig& config);

/// Parses "a,b,..." into exactly `count` numbers; InputError otherwise.
std::vector<Scalar> parse_number_list(std::string_view text, std::size_t count);

struct TripleValue {
  int i = 0, j = 0, k = 0;  // 1-based
  Scalar coeff = 0;
};

struct PointRecord {
  Point point;
  bool ok = false;
  std::string skip_reason;
  std::string detail;

  std::vector<PairVerdict> pairs;  // check
  std::vector<int> vanishing_gradients;

  std::optional<Scalar> trace_k;
  std::optional<Scalar> trace_prop;
  std::optional<Scalar> sc;
  std::optional<Scalar> residual;           // |Tr - SC|
  std::optional<Scalar> relative_residual;  // residual / max(1, |Tr|)
  std::optional<Scalar> path_residual;      // |trace_K - trace_prop| / max(1, |Tr|)
  std::optional<RealMatrix> k;
  std::optional<Scalar> upper_rows_max;
  std::vector<TripleValue> blaschke;
  std::optional<TraceElement> gamma;
};

struct Summary {
  std::size_t requested = 0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  std::size_t failures = 0;
  Scalar max_residual = 0;  // relative
  Scalar median_residual = 0;
  Scalar max_path_residual = 0;
  std::vector<std::string> warnings;
};

struct Report {
  RunConfig config;
  WebDefinition web;
  std::vector<PointRecord> points;
  Summary summary;
  int exit_code = kExitOk;
};

/// Evaluates the command on every requested point. Per-point numerical
/// failures become skip records; only configuration errors throw.
Report run_command(const RunConfig& config, const WebDefinition& web);

std::string to_json(const Report& report);
std::string to_csv(const Report& report);
std::string render(const Report& report);

}  // namespace webcurv
