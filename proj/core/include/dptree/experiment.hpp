#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dptree/kernel.hpp"
#include "dptree/measure.hpp"
#include "dptree/tree.hpp"

namespace dptree {

enum class ExperimentKind { Gen, Cover, Count, Scale, Lower, DimEmbed, Lambda, Fourier, Regularity };

std::string_view to_string(ExperimentKind kind) noexcept;
/// Accepts the subcommand names plus "scaling" and "dim" as aliases.
ExperimentKind parse_experiment_kind(std::string_view name);

struct MeasureSpec {
  std::string family = "cantor";  ///< cantor | uniform | file
  // cantor
  double ratio = 1.0 / 3.0;
  int branches = 2;
  int level = 4;
  std::size_t dims = 1;
  // cantor and uniform
  double c = 0.3;  ///< box offset; 0 leaves the points in [0,1]^d
  // uniform
  std::size_t n = 1000;
  std::optional<std::uint64_t> seed;
  // file
  std::filesystem::path file;
};

struct TreeSpec {
  std::string name;  ///< "edge", "vertex", "path-k", "star-k"; empty when file is used
  std::filesystem::path file;
};

struct TargetSpec {
  enum class Mode { Value, Auto, PerEdge };
  Mode mode = Mode::Auto;
  double value = 0.0;
  std::map<Edge, double> per_edge;
};

struct IntervalSpec {
  double q_lo = 0.35;
  double q_hi = 0.65;
  std::size_t sample_pairs = 10000;
  std::optional<std::uint64_t> seed;
};

enum class CountMode { TreeDp, Naive, Both };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Count;
  MeasureSpec measure;
  std::optional<TreeSpec> tree;
  TargetSpec t;
  IntervalSpec interval;
  double epsilon = 0.1;
  std::vector<double> eps_ladder;
  Kernel kernel;
  std::uint64_t seed = 0;

  CountMode count_mode = CountMode::TreeDp;
  bool pruning = true;
  bool resolution_floor = true;

  double drift_factor = 4.0;
  std::optional<double> slope_tolerance;  ///< defaults: 0.5 (scale), 0.15 (fourier)
  double dimension_slack = 0.5;           ///< allowed excess over (k+1)s - k

  std::size_t lower_t_samples = 5;
  PivotPolicy pivot = PivotPolicy::MaxDegree;

  std::vector<int> dim_levels;
  double dim_window_slack = 2.0;
  std::size_t enumeration_cap = 2'000'000;

  std::vector<double> lambda_bin_sizes;
  std::size_t lambda_samples = std::size_t{1} << 21;
  std::optional<std::uint64_t> lambda_seed;
  double lambda_floor = 0.5;

  std::vector<int> fourier_j;
  double fourier_density = 8.0;
  std::optional<double> fourier_s;

  std::optional<double> regularity_s;
  std::vector<double> regularity_radii;
  std::size_t regularity_centers = 256;
  std::optional<std::uint64_t> regularity_seed;
};

/// Parses a JSON experiment config. Relative file paths are resolved against
/// `base_dir`. Errors are ConfigInvalid and name the offending field path.
/// When `expected` is set, a missing "experiment" field defaults to it and a
/// different value is rejected.
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {},
                              std::optional<ExperimentKind> expected = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> expected = std::nullopt);

/// Value of DOTPROD_TREES_CAP if set and valid, otherwise the default cap.
double kernel_eval_cap_from_env();

struct RunOptions {
  unsigned threads = 0;
  std::optional<std::uint64_t> seed_override;
  double kernel_eval_cap = 1e9;
};

struct RunReport {
  std::string result_json;     ///< exactly what was written to result.json
  std::optional<bool> verdict; ///< pass/fail for experiments that test a bound
  std::vector<std::filesystem::path> artifacts;
};

/// Runs one experiment and writes result.json, CSV/tree artifacts and run.log
/// (timings) into `out_dir`. result.json depends only on the config, seed and
/// input files.
RunReport run(const ExperimentConfig& config, const std::filesystem::path& out_dir, const RunOptions& options = {});

/// Dry-run plan: sizes, estimated kernel evaluations and the caps or guards
/// that would stop the run.
std::string describe(const ExperimentConfig& config, const RunOptions& options = {});

/// Builds the configured measure (at `level_override` for cantor families).
DiscreteMeasure build_measure(const MeasureSpec& spec, std::optional<int> level_override = std::nullopt);
/// Resolves a named tree ("edge", "vertex", "path-k", "star-k").
Tree named_tree(std::string_view name);

}  // namespace dptree
