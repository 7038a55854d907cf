#include "dptree/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <limits>
#include <sstream>

#include "dptree/count.hpp"
#include "dptree/error.hpp"
#include "dptree/io.hpp"
#include "dptree/scaling.hpp"
#include "dptree/spectral.hpp"
#include "json.hpp"

namespace dptree {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void invalid(const std::string& path, const std::string& message) {
  fail(ErrorKind::ConfigInvalid, path + ": " + message);
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) invalid(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& item : obj.items()) {
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
      invalid(join(path, item.key()), "unknown field");
    }
  }
}

double get_double(const json& j, const std::string& path) {
  if (!j.is_number()) invalid(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(path, "must be finite");
  return v;
}

double get_positive(const json& j, const std::string& path) {
  const double v = get_double(j, path);
  if (!(v > 0.0)) invalid(path, "must be positive");
  return v;
}

std::uint64_t get_unsigned(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  invalid(path, "expected a non-negative integer");
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) invalid(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) invalid(path, "out of range");
  return static_cast<int>(v);
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) invalid(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) invalid(path, "expected a string");
  return j.get<std::string>();
}

template <class T, class Get>
std::vector<T> get_list(const json& j, const std::string& path, Get get) {
  if (!j.is_array() || j.empty()) invalid(path, "expected a non-empty array");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <class T>
void require_strict(const std::vector<T>& values, const std::string& path, bool decreasing) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    const bool ok = decreasing ? values[i] < values[i - 1] : values[i] > values[i - 1];
    if (!ok) invalid(path, decreasing ? "must be strictly decreasing" : "must be strictly increasing");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file) {
  std::filesystem::path p(file);
  return p.is_absolute() || base.empty() ? p : base / p;
}

Kernel parse_kernel(const json& j, const std::string& path) {
  Kernel k;
  try {
    if (j.is_string()) {
      std::string text = j.get<std::string>();
      const auto slash = text.find('/');
      if (slash != std::string::npos) {
        const std::string mode = text.substr(slash + 1);
        if (mode != "raw" && mode != "normalized") invalid(path, "normalization must be 'raw' or 'normalized'");
        k.normalized = mode == "normalized";
        text = text.substr(0, slash);
      }
      k.kind = parse_kernel_kind(text);
      return k;
    }
    allow_keys(j, path, {"kind", "normalized"});
    if (!j.contains("kind")) invalid(join(path, "kind"), "missing");
    k.kind = parse_kernel_kind(get_string(j["kind"], join(path, "kind")));
    if (j.contains("normalized")) k.normalized = get_bool(j["normalized"], join(path, "normalized"));
    return k;
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::ConfigInvalid) throw;
    invalid(path, err.what());
  }
}

MeasureSpec parse_measure(const json& j, const std::filesystem::path& base) {
  const std::string path = "measure";
  allow_keys(j, path, {"family", "ratio", "branches", "level", "dims", "c", "n", "d", "seed", "file"});
  MeasureSpec m;
  if (j.contains("family")) m.family = get_string(j["family"], "measure.family");
  if (m.family != "cantor" && m.family != "uniform" && m.family != "file") {
    invalid("measure.family", "expected cantor, uniform or file");
  }
  if (j.contains("ratio")) m.ratio = get_positive(j["ratio"], "measure.ratio");
  if (j.contains("branches")) m.branches = get_int(j["branches"], "measure.branches");
  if (j.contains("level")) m.level = get_int(j["level"], "measure.level");
  if (j.contains("dims")) m.dims = get_unsigned(j["dims"], "measure.dims");
  if (j.contains("d")) m.dims = get_unsigned(j["d"], "measure.d");
  if (j.contains("c")) m.c = get_double(j["c"], "measure.c");
  if (j.contains("n")) m.n = get_unsigned(j["n"], "measure.n");
  if (j.contains("seed")) m.seed = get_unsigned(j["seed"], "measure.seed");
  if (j.contains("file")) m.file = resolve(base, get_string(j["file"], "measure.file"));

  if (m.dims == 0) invalid("measure.dims", "must be at least 1");
  if (m.c < 0.0 || m.c >= 1.0) invalid("measure.c", "must lie in [0, 1)");
  if (m.family == "cantor") {
    if (m.ratio > 0.5) invalid("measure.ratio", "must lie in (0, 1/2]");
    if (m.branches < 2) invalid("measure.branches", "must be at least 2");
    if (m.level < 0) invalid("measure.level", "must be non-negative");
  } else if (m.family == "uniform") {
    if (m.n == 0) invalid("measure.n", "must be positive");
  } else {
    if (m.file.empty()) invalid("measure.file", "required for family 'file'");
    if (!std::filesystem::exists(m.file)) invalid("measure.file", "no such file " + m.file.string());
  }
  return m;
}

TargetSpec parse_targets(const json& j, const std::string& path) {
  TargetSpec t;
  if (j.is_string()) {
    if (j.get<std::string>() != "auto") invalid(path, "expected a number, \"auto\" or [[i, j, t], ...]");
    t.mode = TargetSpec::Mode::Auto;
  } else if (j.is_number()) {
    t.mode = TargetSpec::Mode::Value;
    t.value = get_double(j, path);
  } else if (j.is_array() && !j.empty()) {
    t.mode = TargetSpec::Mode::PerEdge;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string item = path + "[" + std::to_string(i) + "]";
      if (!j[i].is_array() || j[i].size() != 3) invalid(item, "expected [i, j, t]");
      const Edge e = Edge{get_unsigned(j[i][0], item + "[0]"), get_unsigned(j[i][1], item + "[1]")}.normalized();
      if (!t.per_edge.emplace(e, get_double(j[i][2], item + "[2]")).second) invalid(item, "edge listed twice");
    }
  } else {
    invalid(path, "expected a number, \"auto\" or [[i, j, t], ...]");
  }
  return t;
}

Tree load_tree(const TreeSpec& spec) {
  if (!spec.file.empty()) return read_tree_file(spec.file);
  return named_tree(spec.name);
}

bool needs_measure(ExperimentKind kind) { return kind != ExperimentKind::Cover; }

bool needs_tree(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Gen:
    case ExperimentKind::Fourier:
    case ExperimentKind::Regularity:
      return false;
    default:
      return true;
  }
}

double measure_size_estimate(const MeasureSpec& m) {
  if (m.family == "cantor") return std::pow(static_cast<double>(m.branches), static_cast<double>(m.level) * m.dims);
  if (m.family == "uniform") return static_cast<double>(m.n);
  return -1.0;  // unknown until read
}

// ---------------------------------------------------------------------------
// Output helpers

ojson meta_json(const MeasureMeta& meta) { return ojson::parse(format_measure_meta(meta)); }

ojson measure_json(const DiscreteMeasure& m) {
  ojson j;
  j["points"] = m.size();
  j["dim"] = m.dim();
  j["meta"] = meta_json(m.meta());
  return j;
}

ojson tree_json(const Tree& tree) {
  ojson j;
  j["vertices"] = tree.vertex_count();
  ojson edges = ojson::array();
  for (const auto& e : tree.edges()) edges.push_back({e.a, e.b});
  j["edges"] = edges;
  return j;
}

ojson targets_json(const Targets& targets) {
  if (const double* t = std::get_if<double>(&targets)) return *t;
  ojson arr = ojson::array();
  for (const auto& [e, v] : std::get<std::map<Edge, double>>(targets)) arr.push_back({e.a, e.b, v});
  return arr;
}

ojson fit_json(const LinearFit& fit) {
  ojson j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["residual"] = fit.residual;
  j["points"] = fit.points;
  return j;
}

ojson interval_json(const IntervalSelection& in) {
  ojson j;
  j["lo"] = in.lo;
  j["hi"] = in.hi;
  j["q_lo"] = in.q_lo;
  j["q_hi"] = in.q_hi;
  j["median"] = in.median;
  return j;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      text_ += first ? "" : ",";
      text_ += h;
      first = false;
    }
    text_ += "\n";
  }
  template <class... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((text_ += (first ? "" : ","), text_ += cell(cells), first = false), ...);
    text_ += "\n";
  }
  const std::string& text() const { return text_; }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  std::string text_;
};

class RunLog {
 public:
  void stage(const std::string& name, double seconds) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream line;
    line << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << " " << name << " " << format_double(seconds) << "s\n";
    text_ += line.str();
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

template <class F>
auto timed(RunLog& log, const std::string& name, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    log.stage(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  };
  if constexpr (std::is_void_v<decltype(body())>) {
    body();
    finish();
  } else {
    auto result = body();
    finish();
    return result;
  }
}

// Rethrows module errors with the config field that fed the failing stage.
template <class F>
auto in_field(const std::string& field, F&& body) {
  try {
    return body();
  } catch (const Error& err) {
    throw err.with_context(field);
  }
}

struct Context {
  ExperimentConfig config;
  RunOptions options;
  std::filesystem::path out;
  RunLog log;
  RunReport report;
  ojson result;

  void write(const std::string& name, const std::string& text) {
    write_text_file(out / name, text);
    report.artifacts.push_back(out / name);
  }
};

ExperimentOptions lab_options(const Context& ctx) {
  ExperimentOptions o;
  o.kernel = ctx.config.kernel;
  o.pruning = ctx.config.pruning;
  o.threads = ctx.options.threads;
  o.enforce_resolution_floor = ctx.config.resolution_floor;
  return o;
}

IntervalSelection interval_for(const Context& ctx, const DiscreteMeasure& m) {
  const auto& in = ctx.config.interval;
  return in_field("interval", [&] {
    return select_interval(m, in.q_lo, in.q_hi, in.sample_pairs, in.seed.value_or(ctx.config.seed));
  });
}

Targets targets_for(Context& ctx, const DiscreteMeasure& m, const Tree& tree) {
  const auto& t = ctx.config.t;
  switch (t.mode) {
    case TargetSpec::Mode::Value:
      return t.value;
    case TargetSpec::Mode::Auto: {
      const IntervalSelection in = interval_for(ctx, m);
      ctx.result["interval"] = interval_json(in);
      return in.midpoint();
    }
    case TargetSpec::Mode::PerEdge:
      for (const auto& e : tree.edges()) {
        if (!t.per_edge.count(e)) invalid("t", "no target for edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) + ")");
      }
      for (const auto& [e, v] : t.per_edge) {
        if (!tree.has_edge(e.a, e.b)) invalid("t", "edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) + ") is not in the tree");
      }
      return t.per_edge;
  }
  return 0.0;
}

double scalar_target(Context& ctx, const DiscreteMeasure& m) {
  if (ctx.config.t.mode == TargetSpec::Mode::PerEdge) invalid("t", "this experiment takes a scalar target");
  if (ctx.config.t.mode == TargetSpec::Mode::Value) return ctx.config.t.value;
  const IntervalSelection in = interval_for(ctx, m);
  ctx.result["interval"] = interval_json(in);
  return in.midpoint();
}

// ---------------------------------------------------------------------------
// Experiments

void run_gen(Context& ctx, const DiscreteMeasure& m) {
  ctx.write("measure.csv", format_measure_csv(m));
  ctx.write("measure.meta.json", format_measure_meta(m.meta()));
  ctx.result["min_interpoint_distance"] = min_interpoint_distance(m);
  ctx.result["bounding_box_diagonal"] = bounding_box_diagonal(m);
}

void run_cover(Context& ctx, const Tree& tree) {
  const CoverResult cover = in_field("tree", [&] { return symmetric_cover(tree, ctx.config.pivot); });
  const bool ok = cover.certificate.verify(tree, cover.cover);
  ctx.write("cover.tree", format_tree(cover.cover));
  ojson cert;
  cert["vertex_map"] = cover.certificate.vertex_map;
  cert["edge_map"] = cover.certificate.edge_map;
  cert["verified"] = ok;
  ctx.write("certificate.json", cert.dump(2) + "\n");
  ctx.result["pivot_policy"] = std::string(to_string(ctx.config.pivot));
  ctx.result["cover"] = tree_json(cover.cover);
  ctx.result["certificate_verified"] = ok;
  ctx.report.verdict = ok;
}

void run_count(Context& ctx, const DiscreteMeasure& m, const Tree& tree) {
  const Targets targets = targets_for(ctx, m, tree);
  const GapSpec gaps = in_field("kernel", [&] { return make_gaps(targets, ctx.config.epsilon, ctx.config.kernel); });
  ctx.result["t"] = targets_json(targets);
  ctx.result["epsilon"] = ctx.config.epsilon;
  auto emit = [&](const CountResult& r) {
    ojson j;
    j["value"] = r.value;
    j["method"] = std::string(to_string(r.method));
    j["tuple_space_size"] = r.tuple_space_size;
    j["kernel_evals"] = r.kernel_evals;
    return j;
  };
  std::optional<CountResult> dp, naive;
  if (ctx.config.count_mode != CountMode::Naive) {
    DpOptions o;
    o.pruning = ctx.config.pruning;
    o.threads = ctx.options.threads;
    dp = timed(ctx.log, "tree_dp_count", [&] { return tree_dp_count(m, tree, gaps, o); });
  }
  if (ctx.config.count_mode != CountMode::TreeDp) {
    naive = timed(ctx.log, "naive_count", [&] {
      return in_field("count.method", [&] { return naive_count(m, tree, gaps, ctx.options.kernel_eval_cap); });
    });
  }
  const CountResult& primary = dp ? *dp : *naive;
  ctx.result["value"] = primary.value;
  ctx.result["method"] = std::string(to_string(primary.method));
  ctx.result["kernel_evals"] = primary.kernel_evals;
  ctx.result["tuple_space_size"] = primary.tuple_space_size;
  if (dp && naive) {
    ctx.result["oracle"] = emit(*naive);
    const double rel = std::abs(dp->value - naive->value) / std::max(naive->value, 1e-30);
    ctx.result["relative_difference"] = rel;
    ctx.report.verdict = rel <= 1e-9;
  }
}

void run_scale(Context& ctx, const DiscreteMeasure& m, const Tree& tree) {
  const Targets targets = targets_for(ctx, m, tree);
  const std::size_t k = tree.edge_count();
  const ScalingSeries series = timed(ctx.log, "scaling_series", [&] {
    return in_field("eps_ladder", [&] { return scaling_series(m, tree, targets, ctx.config.eps_ladder, lab_options(ctx)); });
  });
  const BoundVerdict upper = upper_bound_check(series, k, ctx.config.drift_factor);
  const double tol = ctx.config.slope_tolerance.value_or(0.5);
  const bool slope_ok = std::abs(series.fit.slope - static_cast<double>(k)) <= tol;

  CsvWriter csv({"epsilon", "value", "ratio"});
  CsvWriter loglog({"log_epsilon", "log_value"});
  for (std::size_t i = 0; i < series.epsilons.size(); ++i) {
    csv.row(series.epsilons[i], series.values[i], upper.ratios[i]);
    if (series.raw_values[i] > 0.0) loglog.row(std::log(series.epsilons[i]), std::log(series.raw_values[i]));
  }
  ctx.write("series.csv", csv.text());
  ctx.write("loglog.csv", loglog.text());

  ctx.result["t"] = targets_json(targets);
  ctx.result["edges"] = k;
  ctx.result["epsilons"] = series.epsilons;
  ctx.result["values"] = series.values;
  ctx.result["raw_values"] = series.raw_values;
  ctx.result["fit"] = fit_json(series.fit);
  ojson v;
  v["ratios"] = upper.ratios;
  v["max_ratio"] = upper.max_ratio;
  v["min_ratio"] = upper.min_ratio;
  v["drift"] = upper.drift;
  v["drift_factor"] = ctx.config.drift_factor;
  v["upper_bound_pass"] = upper.pass;
  v["slope_target"] = static_cast<double>(k);
  v["slope_tolerance"] = tol;
  v["slope_pass"] = slope_ok;
  v["pass"] = upper.pass && slope_ok;
  ctx.result["verdict"] = v;
  ctx.report.verdict = upper.pass && slope_ok;
}

void run_lower(Context& ctx, const DiscreteMeasure& m, const Tree& tree) {
  if (ctx.config.t.mode != TargetSpec::Mode::Auto) invalid("t", "the lower-bound experiment samples t from the interval; use \"auto\"");
  const CoverResult cover = in_field("tree", [&] { return symmetric_cover(tree, ctx.config.pivot); });
  const IntervalSelection interval = interval_for(ctx, m);
  const LowerBoundVerdict verdict = timed(ctx.log, "lower_bound_check", [&] {
    return in_field("eps_ladder", [&] {
      return lower_bound_check(m, tree, cover, ctx.config.eps_ladder, interval, ctx.config.lower_t_samples,
                               lab_options(ctx), ctx.config.drift_factor);
    });
  });
  CsvWriter csv({"t", "epsilon", "raw_value", "ratio"});
  ojson rows = ojson::array();
  for (const auto& r : verdict.rows) {
    csv.row(r.t, r.epsilon, r.raw_value, r.ratio);
    rows.push_back({{"t", r.t}, {"epsilon", r.epsilon}, {"raw_value", r.raw_value}, {"ratio", r.ratio}});
  }
  ctx.write("lower.csv", csv.text());
  ctx.write("cover.tree", format_tree(cover.cover));
  ctx.result["interval"] = interval_json(interval);
  ctx.result["cover"] = tree_json(cover.cover);
  ctx.result["rows"] = rows;
  ojson v;
  v["edges"] = verdict.edges;
  v["min_ratio"] = verdict.min_ratio;
  v["drift"] = verdict.drift;
  v["drift_factor"] = ctx.config.drift_factor;
  v["pass"] = verdict.pass;
  ctx.result["verdict"] = v;
  ctx.report.verdict = verdict.pass;
}

void run_dim(Context& ctx, const Tree& tree) {
  const auto& spec = ctx.config.measure;
  std::vector<DiscreteMeasure> levels;
  for (std::size_t i = 0; i < ctx.config.dim_levels.size(); ++i) {
    levels.push_back(in_field("dim.levels[" + std::to_string(i) + "]", [&] {
      return build_measure(spec, ctx.config.dim_levels[i]);
    }));
  }
  const double t = scalar_target(ctx, levels.back());
  EmbeddingDimensionOptions o;
  o.slack = ctx.config.dim_window_slack;
  o.enumeration_cap = ctx.config.enumeration_cap;
  o.threads = ctx.options.threads;
  const DimensionEstimate est = timed(ctx.log, "minkowski_dim_embedding", [&] {
    return in_field("dim", [&] { return minkowski_dim_embedding(levels, tree, t, o); });
  });
  const double s = levels.back().meta().nominal_s;
  const double k = static_cast<double>(tree.edge_count());
  const double bound = (k + 1.0) * s - k + ctx.config.dimension_slack;

  CsvWriter csv({"level", "scale", "count"});
  for (std::size_t i = 0; i < est.scales.size(); ++i) csv.row(ctx.config.dim_levels[i], est.scales[i], est.counts[i]);
  ctx.write("dim.csv", csv.text());

  ctx.result["t"] = t;
  ctx.result["levels"] = ctx.config.dim_levels;
  ctx.result["scales"] = est.scales;
  ctx.result["counts"] = est.counts;
  ctx.result["fit"] = fit_json(est.fit);
  ojson v;
  v["estimate"] = est.slope();
  v["nominal_s"] = s;
  v["bound"] = bound;
  v["pass"] = est.slope() <= bound;
  ctx.result["verdict"] = v;
  ctx.report.verdict = est.slope() <= bound;
}

void run_lambda(Context& ctx, const DiscreteMeasure& m, const Tree& tree) {
  LambdaOptions o;
  o.samples = ctx.config.lambda_samples;
  o.seed = ctx.config.lambda_seed.value_or(ctx.config.seed);
  const auto points = timed(ctx.log, "lambda_measure_lower", [&] {
    return in_field("lambda", [&] { return lambda_measure_lower(m, tree, ctx.config.lambda_bin_sizes, o); });
  });
  CsvWriter csv({"eta", "occupied_bins", "occupied_volume"});
  std::vector<double> volumes;
  for (const auto& p : points) {
    csv.row(p.eta, p.occupied_bins, p.occupied_volume);
    volumes.push_back(p.occupied_volume);
  }
  ctx.write("lambda.csv", csv.text());
  const double floor = ctx.config.lambda_floor * volumes.front();
  const double lowest = *std::min_element(volumes.begin(), volumes.end());
  const double tail = volumes.size() >= 2 ? std::min(volumes[volumes.size() - 1], volumes[volumes.size() - 2]) : volumes.back();
  ctx.result["bin_sizes"] = ctx.config.lambda_bin_sizes;
  ctx.result["occupied_volume"] = volumes;
  ojson v;
  v["floor"] = floor;
  v["minimum"] = lowest;
  v["finest_two_minimum"] = tail;
  v["pass"] = lowest >= floor && lowest > 0.0;
  ctx.result["verdict"] = v;
  ctx.report.verdict = lowest >= floor && lowest > 0.0;
}

void run_fourier(Context& ctx, const DiscreteMeasure& m) {
  const std::vector<double> f(m.size(), 1.0);
  FourierGrid grid;
  grid.density = ctx.config.fourier_density;
  grid.threads = ctx.options.threads;
  const SpectralProbe probe = timed(ctx.log, "frostman_fourier_slope", [&] {
    return in_field("fourier", [&] { return frostman_fourier_slope(m, f, ctx.config.fourier_j, grid); });
  });
  const double d = static_cast<double>(m.dim());
  const double s = ctx.config.fourier_s.value_or(m.meta().nominal_s);
  const double target = (d - s) / 2.0;
  const double tol = ctx.config.slope_tolerance.value_or(0.15);

  CsvWriter csv({"j", "mass", "reference"});
  for (std::size_t i = 0; i < probe.j_values.size(); ++i) {
    const double reference = probe.masses.front() * std::exp2(target * (probe.j_values[i] - probe.j_values.front()));
    csv.row(probe.j_values[i], probe.masses[i], reference);
  }
  ctx.write("fourier.csv", csv.text());
  ctx.result["j_values"] = probe.j_values;
  ctx.result["masses"] = probe.masses;
  ctx.result["grid_density"] = grid.density;
  ctx.result["fit"] = fit_json(probe.fit);
  ojson v;
  v["slope"] = probe.slope();
  v["s"] = s;
  v["target"] = target;
  v["tolerance"] = tol;
  v["pass"] = std::abs(probe.slope() - target) <= tol;
  ctx.result["verdict"] = v;
  ctx.report.verdict = std::abs(probe.slope() - target) <= tol;
}

void run_regularity(Context& ctx, const DiscreteMeasure& m) {
  const double s = ctx.config.regularity_s.value_or(m.meta().nominal_s);
  const RegularityReport r = timed(ctx.log, "regularity_check", [&] {
    return in_field("regularity", [&] {
      return regularity_check(m, s, ctx.config.regularity_radii, ctx.config.regularity_centers,
                              ctx.config.regularity_seed.value_or(ctx.config.seed));
    });
  });
  ctx.result["s"] = r.s;
  ctx.result["radii"] = r.radii;
  ctx.result["centers"] = r.centers;
  ctx.result["max_upper_ratio"] = r.max_upper_ratio;
  ctx.result["min_lower_ratio"] = r.min_lower_ratio;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::Gen: return "gen";
    case ExperimentKind::Cover: return "cover";
    case ExperimentKind::Count: return "count";
    case ExperimentKind::Scale: return "scale";
    case ExperimentKind::Lower: return "lower";
    case ExperimentKind::DimEmbed: return "dim-embed";
    case ExperimentKind::Lambda: return "lambda";
    case ExperimentKind::Fourier: return "fourier";
    case ExperimentKind::Regularity: return "regularity";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  static const std::pair<std::string_view, ExperimentKind> table[] = {
      {"gen", ExperimentKind::Gen},         {"cover", ExperimentKind::Cover},
      {"count", ExperimentKind::Count},     {"scale", ExperimentKind::Scale},
      {"scaling", ExperimentKind::Scale},   {"lower", ExperimentKind::Lower},
      {"dim-embed", ExperimentKind::DimEmbed}, {"dim", ExperimentKind::DimEmbed},
      {"lambda", ExperimentKind::Lambda},   {"fourier", ExperimentKind::Fourier},
      {"regularity", ExperimentKind::Regularity},
  };
  for (const auto& [key, kind] : table) {
    if (key == name) return kind;
  }
  invalid("experiment", "unknown experiment '" + std::string(name) + "'");
}

Tree named_tree(std::string_view name) {
  if (name == "vertex") return Tree::single_vertex();
  if (name == "edge") return path_tree(1);
  auto sized = [&](std::string_view prefix) -> std::optional<std::size_t> {
    if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
    const std::string digits(name.substr(prefix.size()));
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || digits.size() > 6) {
      return std::nullopt;
    }
    return std::stoul(digits);
  };
  if (auto k = sized("path-"); k && *k > 0) return path_tree(*k);
  if (auto k = sized("star-"); k && *k > 0) return star_tree(*k);
  fail(ErrorKind::InvalidArgument, "unknown tree name '" + std::string(name) + "' (expected vertex, edge, path-k or star-k)");
}

DiscreteMeasure build_measure(const MeasureSpec& spec, std::optional<int> level_override) {
  if (spec.family == "file") return read_measure(spec.file);
  if (spec.family == "uniform") {
    return uniform_cube_sample(spec.n, spec.dims, spec.c, spec.seed.value_or(0));
  }
  if (spec.family != "cantor") fail(ErrorKind::InvalidArgument, "unknown measure family '" + spec.family + "'");
  const int level = level_override.value_or(spec.level);
  const DiscreteMeasure factor = cantor_1d(spec.ratio, spec.branches, level);
  DiscreteMeasure m = factor;
  for (std::size_t i = 1; i < spec.dims; ++i) m = product_measure(m, factor);
  if (spec.c > 0.0) m = shift_to_box(m, spec.c);
  return m;
}

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir,
                              std::optional<ExperimentKind> expected) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ConfigInvalid, std::string("<root>: malformed JSON: ") + e.what());
  }
  allow_keys(j, "", {"experiment", "measure", "tree", "tree_file", "t", "interval", "epsilon", "eps_ladder", "kernel",
                     "seed", "count", "resolution_floor", "thresholds", "lower", "cover", "dim", "lambda", "fourier",
                     "regularity", "description"});
  ExperimentConfig c;
  if (j.contains("experiment")) {
    c.kind = parse_experiment_kind(get_string(j["experiment"], "experiment"));
    if (expected && *expected != c.kind) {
      invalid("experiment", "config declares '" + std::string(to_string(c.kind)) + "' but '" +
                                std::string(to_string(*expected)) + "' was requested");
    }
  } else if (expected) {
    c.kind = *expected;
  } else {
    invalid("experiment", "missing");
  }
  if (j.contains("seed")) c.seed = get_unsigned(j["seed"], "seed");

  if (j.contains("measure")) {
    c.measure = parse_measure(j["measure"], base_dir);
  } else if (needs_measure(c.kind)) {
    invalid("measure", "missing");
  }
  if (c.measure.family == "uniform" && !c.measure.seed) {
    if (!j.contains("seed")) invalid("measure.seed", "required for the uniform family");
    c.measure.seed = c.seed;
  }

  if (j.contains("tree") && j.contains("tree_file")) invalid("tree_file", "give either tree or tree_file, not both");
  if (j.contains("tree")) {
    TreeSpec spec{get_string(j["tree"], "tree"), {}};
    try {
      (void)named_tree(spec.name);
    } catch (const Error& err) {
      invalid("tree", err.message());
    }
    c.tree = spec;
  } else if (j.contains("tree_file")) {
    TreeSpec spec{{}, resolve(base_dir, get_string(j["tree_file"], "tree_file"))};
    try {
      (void)read_tree_file(spec.file);
    } catch (const Error& err) {
      invalid("tree_file", std::string(err.what()));
    }
    c.tree = spec;
  } else if (needs_tree(c.kind)) {
    invalid("tree", "missing (give tree or tree_file)");
  }

  if (j.contains("t")) c.t = parse_targets(j["t"], "t");
  if (j.contains("interval")) {
    const auto& in = j["interval"];
    allow_keys(in, "interval", {"q_lo", "q_hi", "sample_pairs", "seed"});
    if (in.contains("q_lo")) c.interval.q_lo = get_double(in["q_lo"], "interval.q_lo");
    if (in.contains("q_hi")) c.interval.q_hi = get_double(in["q_hi"], "interval.q_hi");
    if (in.contains("sample_pairs")) c.interval.sample_pairs = get_unsigned(in["sample_pairs"], "interval.sample_pairs");
    if (in.contains("seed")) c.interval.seed = get_unsigned(in["seed"], "interval.seed");
    if (!(0.0 <= c.interval.q_lo && c.interval.q_lo < c.interval.q_hi && c.interval.q_hi <= 1.0)) {
      invalid("interval", "quantiles must satisfy 0 <= q_lo < q_hi <= 1");
    }
    if (c.interval.sample_pairs == 0) invalid("interval.sample_pairs", "must be positive");
  }
  if (j.contains("epsilon")) c.epsilon = get_positive(j["epsilon"], "epsilon");
  if (j.contains("eps_ladder")) {
    c.eps_ladder = get_list<double>(j["eps_ladder"], "eps_ladder", get_positive);
    require_strict(c.eps_ladder, "eps_ladder", true);
  }

  const bool scaling_kind = c.kind == ExperimentKind::Scale || c.kind == ExperimentKind::Lower;
  c.kernel = scaling_kind ? Kernel{KernelKind::Triangle, true} : Kernel{KernelKind::Indicator, false};
  if (j.contains("kernel")) c.kernel = parse_kernel(j["kernel"], "kernel");

  if (j.contains("count")) {
    const auto& cnt = j["count"];
    allow_keys(cnt, "count", {"method", "pruning"});
    if (cnt.contains("method")) {
      const std::string m = get_string(cnt["method"], "count.method");
      if (m == "tree_dp") c.count_mode = CountMode::TreeDp;
      else if (m == "naive" || m == "oracle") c.count_mode = CountMode::Naive;
      else if (m == "both") c.count_mode = CountMode::Both;
      else invalid("count.method", "expected tree_dp, naive or both");
    }
    if (cnt.contains("pruning")) c.pruning = get_bool(cnt["pruning"], "count.pruning");
  }
  if (j.contains("resolution_floor")) c.resolution_floor = get_bool(j["resolution_floor"], "resolution_floor");

  if (j.contains("thresholds")) {
    const auto& th = j["thresholds"];
    allow_keys(th, "thresholds", {"drift_factor", "slope_tolerance", "dimension_slack", "lambda_floor"});
    if (th.contains("drift_factor")) c.drift_factor = get_positive(th["drift_factor"], "thresholds.drift_factor");
    if (th.contains("slope_tolerance")) c.slope_tolerance = get_positive(th["slope_tolerance"], "thresholds.slope_tolerance");
    if (th.contains("dimension_slack")) c.dimension_slack = get_double(th["dimension_slack"], "thresholds.dimension_slack");
    if (th.contains("lambda_floor")) c.lambda_floor = get_positive(th["lambda_floor"], "thresholds.lambda_floor");
  }
  if (j.contains("lower")) {
    allow_keys(j["lower"], "lower", {"t_samples"});
    if (j["lower"].contains("t_samples")) c.lower_t_samples = get_unsigned(j["lower"]["t_samples"], "lower.t_samples");
    if (c.lower_t_samples == 0) invalid("lower.t_samples", "must be positive");
  }
  if (j.contains("cover")) {
    allow_keys(j["cover"], "cover", {"pivot"});
    if (j["cover"].contains("pivot")) {
      try {
        c.pivot = parse_pivot_policy(get_string(j["cover"]["pivot"], "cover.pivot"));
      } catch (const Error& err) {
        if (err.kind() == ErrorKind::ConfigInvalid) throw;
        invalid("cover.pivot", err.message());
      }
    }
  }
  if (j.contains("dim")) {
    const auto& d = j["dim"];
    allow_keys(d, "dim", {"levels", "slack", "enumeration_cap"});
    if (d.contains("levels")) {
      c.dim_levels = get_list<int>(d["levels"], "dim.levels", get_int);
      require_strict(c.dim_levels, "dim.levels", false);
      if (c.dim_levels.front() < 0) invalid("dim.levels[0]", "must be non-negative");
    }
    if (d.contains("slack")) c.dim_window_slack = get_positive(d["slack"], "dim.slack");
    if (d.contains("enumeration_cap")) c.enumeration_cap = get_unsigned(d["enumeration_cap"], "dim.enumeration_cap");
  }
  if (j.contains("lambda")) {
    const auto& l = j["lambda"];
    allow_keys(l, "lambda", {"bin_sizes", "samples", "seed"});
    if (l.contains("bin_sizes")) {
      c.lambda_bin_sizes = get_list<double>(l["bin_sizes"], "lambda.bin_sizes", get_positive);
      require_strict(c.lambda_bin_sizes, "lambda.bin_sizes", true);
    }
    if (l.contains("samples")) c.lambda_samples = get_unsigned(l["samples"], "lambda.samples");
    if (l.contains("seed")) c.lambda_seed = get_unsigned(l["seed"], "lambda.seed");
    if (c.lambda_samples == 0) invalid("lambda.samples", "must be positive");
  }
  if (j.contains("fourier")) {
    const auto& f = j["fourier"];
    allow_keys(f, "fourier", {"j_range", "grid_density", "s"});
    if (f.contains("j_range")) {
      c.fourier_j = get_list<int>(f["j_range"], "fourier.j_range", get_int);
      require_strict(c.fourier_j, "fourier.j_range", false);
    }
    if (f.contains("grid_density")) c.fourier_density = get_positive(f["grid_density"], "fourier.grid_density");
    if (f.contains("s")) c.fourier_s = get_double(f["s"], "fourier.s");
  }
  if (j.contains("regularity")) {
    const auto& r = j["regularity"];
    allow_keys(r, "regularity", {"s", "radii", "sample_centers", "seed"});
    if (r.contains("s")) c.regularity_s = get_positive(r["s"], "regularity.s");
    if (r.contains("radii")) {
      c.regularity_radii = get_list<double>(r["radii"], "regularity.radii", get_positive);
      require_strict(c.regularity_radii, "regularity.radii", true);
    }
    if (r.contains("sample_centers")) c.regularity_centers = get_unsigned(r["sample_centers"], "regularity.sample_centers");
    if (r.contains("seed")) c.regularity_seed = get_unsigned(r["seed"], "regularity.seed");
  }

  // Per-experiment requirements.
  switch (c.kind) {
    case ExperimentKind::Count:
      if (!j.contains("epsilon")) invalid("epsilon", "missing");
      break;
    case ExperimentKind::Scale:
      if (c.eps_ladder.size() < 4) invalid("eps_ladder", "needs at least 4 rungs");
      break;
    case ExperimentKind::Lower:
      if (c.eps_ladder.size() < 2) invalid("eps_ladder", "needs at least 2 rungs");
      break;
    case ExperimentKind::DimEmbed:
      if (c.measure.family != "cantor") invalid("measure.family", "dim-embed needs the cantor family");
      if (c.dim_levels.size() < 2) invalid("dim.levels", "needs at least two levels");
      break;
    case ExperimentKind::Lambda:
      if (c.lambda_bin_sizes.empty()) invalid("lambda.bin_sizes", "missing");
      break;
    case ExperimentKind::Fourier:
      if (c.fourier_j.size() < 4) invalid("fourier.j_range", "needs at least 4 values");
      break;
    case ExperimentKind::Regularity:
      if (c.regularity_radii.empty()) invalid("regularity.radii", "missing");
      break;
    default:
      break;
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> expected) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& err) {
    invalid("--config", err.message());
  }
  return parse_config(text, path.parent_path(), expected);
}

double kernel_eval_cap_from_env() {
  const char* raw = std::getenv("DOTPROD_TREES_CAP");
  if (raw == nullptr || *raw == '\0') return kDefaultKernelEvalCap;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !(v > 0.0) || !std::isfinite(v)) {
    fail(ErrorKind::ConfigInvalid, "DOTPROD_TREES_CAP: expected a positive number, got '" + std::string(raw) + "'");
  }
  return v;
}

RunReport run(const ExperimentConfig& config_in, const std::filesystem::path& out_dir, const RunOptions& options) {
  Context ctx;
  ctx.config = config_in;
  ctx.options = options;
  ctx.out = out_dir;
  if (options.seed_override) {
    auto& c = ctx.config;
    c.seed = *options.seed_override;
    if (c.measure.family == "uniform") c.measure.seed = c.seed;
    c.interval.seed = c.seed;
    c.lambda_seed = c.seed;
    c.regularity_seed = c.seed;
  }
  const ExperimentConfig& c = ctx.config;

  ctx.result["experiment"] = std::string(to_string(c.kind));
  ctx.result["seed"] = c.seed;
  ctx.result["rng"] = std::string(Rng::kAlgorithm);

  std::optional<Tree> tree;
  if (c.tree) {
    tree = in_field(c.tree->file.empty() ? "tree" : "tree_file", [&] { return load_tree(*c.tree); });
    ctx.result["tree"] = tree_json(*tree);
  }
  std::optional<DiscreteMeasure> measure;
  if (needs_measure(c.kind) && c.kind != ExperimentKind::DimEmbed) {
    measure = timed(ctx.log, "build_measure", [&] { return in_field("measure", [&] { return build_measure(c.measure); }); });
    ctx.result["measure"] = measure_json(*measure);
  }
  if (c.kind != ExperimentKind::Gen && c.kind != ExperimentKind::Cover && c.kind != ExperimentKind::Regularity &&
      c.kind != ExperimentKind::Fourier && c.kind != ExperimentKind::DimEmbed && c.kind != ExperimentKind::Lambda) {
    ctx.result["kernel"] = describe(c.kernel);
  }

  switch (c.kind) {
    case ExperimentKind::Gen: run_gen(ctx, *measure); break;
    case ExperimentKind::Cover: run_cover(ctx, *tree); break;
    case ExperimentKind::Count: run_count(ctx, *measure, *tree); break;
    case ExperimentKind::Scale: run_scale(ctx, *measure, *tree); break;
    case ExperimentKind::Lower: run_lower(ctx, *measure, *tree); break;
    case ExperimentKind::DimEmbed: run_dim(ctx, *tree); break;
    case ExperimentKind::Lambda: run_lambda(ctx, *measure, *tree); break;
    case ExperimentKind::Fourier: run_fourier(ctx, *measure); break;
    case ExperimentKind::Regularity: run_regularity(ctx, *measure); break;
  }

  ctx.report.result_json = ctx.result.dump(2) + "\n";
  ctx.write("result.json", ctx.report.result_json);
  write_text_file(out_dir / "run.log", ctx.log.text());
  ctx.report.artifacts.push_back(out_dir / "run.log");
  return ctx.report;
}

std::string describe(const ExperimentConfig& c, const RunOptions& options) {
  std::ostringstream out;
  out << "experiment: " << to_string(c.kind) << "\n";
  std::vector<std::string> flags;

  std::optional<Tree> tree;
  if (c.tree) {
    tree = in_field(c.tree->file.empty() ? "tree" : "tree_file", [&] { return load_tree(*c.tree); });
    out << "tree: " << (c.tree->file.empty() ? c.tree->name : c.tree->file.string()) << " (k=" << tree->edge_count()
        << " edges, " << tree->vertex_count() << " vertices)\n";
  }

  double n = -1.0;
  std::size_t d = c.measure.dims;
  if (needs_measure(c.kind)) {
    n = measure_size_estimate(c.measure);
    if (c.kind == ExperimentKind::DimEmbed) {
      n = std::pow(static_cast<double>(c.measure.branches), static_cast<double>(c.dim_levels.back()) * c.measure.dims);
    }
    if (n > static_cast<double>(kDefaultPointCap)) {
      flags.push_back("TooManyPoints: the measure would have " + format_double(n) + " points (cap " +
                      std::to_string(kDefaultPointCap) + ")");
    } else if (n < 0.0) {
      const DiscreteMeasure m = in_field("measure", [&] { return build_measure(c.measure); });
      n = static_cast<double>(m.size());
      d = m.dim();
    }
    out << "measure: family " << c.measure.family << ", n=" << format_double(n) << " points in R^" << d << "\n";
  }

  if (tree && n > 0.0 && c.kind != ExperimentKind::Cover) {
    const double k = static_cast<double>(tree->edge_count());
    const double tuple_space = std::pow(n, k + 1.0);
    const double dp_cost = k * n * n;
    std::size_t rungs = 1;
    if (c.kind == ExperimentKind::Scale) rungs = c.eps_ladder.size();
    if (c.kind == ExperimentKind::Lower) rungs = c.eps_ladder.size() * c.lower_t_samples;
    out << "k=" << tree->edge_count() << ", tuple space n^(k+1) = " << format_double(tuple_space) << "\n";
    out << "tree DP cost ~ k*n^2 = " << format_double(dp_cost) << " kernel evals per epsilon (unpruned), "
        << rungs << " count(s) planned\n";
    if (c.kind == ExperimentKind::Count && c.count_mode != CountMode::TreeDp) {
      out << "naive oracle cost = " << format_double(tuple_space) << " kernel evals (cap "
          << format_double(options.kernel_eval_cap) << ")\n";
      if (tuple_space > options.kernel_eval_cap) {
        flags.push_back("TupleSpaceTooLarge: naive count needs " + format_double(tuple_space) +
                        " kernel evaluations, above the cap " + format_double(options.kernel_eval_cap));
      }
    }
  }
  if (c.kind == ExperimentKind::Fourier && d > 2) {
    flags.push_back("DimensionTooHigh: Fourier mass is limited to d <= 2, measure has d=" + std::to_string(d));
  }
  if (c.kind == ExperimentKind::Lambda && tree && (tree->edge_count() == 0 || tree->edge_count() > 4)) {
    flags.push_back("InvalidArgument: lambda binning supports trees with 1..4 edges");
  }
  if (!c.eps_ladder.empty()) {
    out << "eps_ladder:";
    for (double e : c.eps_ladder) out << " " << format_double(e);
    out << "\n";
  }
  out << "kernel: " << dptree::describe(c.kernel) << "\n";
  out << "threads: " << (options.threads == 0 ? default_threads() : options.threads) << "\n";
  if (flags.empty()) {
    out << "guards: none triggered\n";
  } else {
    for (const auto& f : flags) out << "would fail: " << f << "\n";
  }
  return out.str();
}

}  // namespace dptree
