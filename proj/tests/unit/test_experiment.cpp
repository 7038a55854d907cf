#include <filesystem>

#include "doctest.h"
#include "dptree/experiment.hpp"
#include "dptree/io.hpp"
#include "helpers.hpp"
#include "json.hpp"

using namespace dptree;
using testing::error_kind_of;
using testing::error_message_of;

namespace {

const std::filesystem::path kFixtures = DPTREE_FIXTURE_DIR;

std::filesystem::path out_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "dptree_experiment_tests" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

nlohmann::json result_of(const std::filesystem::path& dir) {
  return nlohmann::json::parse(read_text_file(dir / "result.json"));
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("count on the two-point fixture") {
  const auto config = load_config(kFixtures / "count_two_point.json");
  const auto dir = out_dir("count");
  const RunReport report = run(config, dir);
  const auto j = result_of(dir);
  CHECK(j["value"].get<double>() == doctest::Approx(0.5));
  CHECK(j["oracle"]["value"].get<double>() == doctest::Approx(0.5));
  CHECK(report.verdict == std::optional<bool>{true});
  CHECK(std::filesystem::exists(dir / "run.log"));
}

TEST_CASE("cover on the P4 fixture writes P5 and a certificate") {
  const auto config = load_config(kFixtures / "cover_p4.json");
  const auto dir = out_dir("cover");
  run(config, dir);
  const Tree cover = read_tree_file(dir / "cover.tree");
  CHECK(isomorphic(cover, path_tree(4)));
  const auto cert = nlohmann::json::parse(read_text_file(dir / "certificate.json"));
  CHECK(cert["verified"].get<bool>());
  EmbeddingCertificate c{cert["vertex_map"].get<std::vector<Vertex>>(), cert["edge_map"].get<std::vector<std::size_t>>()};
  CHECK(c.verify(read_tree_file(kFixtures / "p4.tree"), cover));
}

TEST_CASE("a cyclic tree file is rejected with the edge named") {
  const std::string msg = error_message_of([] { load_config(kFixtures / "count_cycle.json"); });
  CHECK(error_kind_of([] { load_config(kFixtures / "count_cycle.json"); }) == ErrorKind::ConfigInvalid);
  CHECK(msg.find("tree_file") != std::string::npos);
  CHECK(msg.find("(0,2)") != std::string::npos);
  CHECK(msg.find("cycle.tree:4") != std::string::npos);
}

TEST_CASE("config errors name the field path") {
  auto path_of = [](const std::string& text) {
    return error_message_of([&] { parse_config(text, kFixtures); });
  };
  CHECK(path_of(R"({"experiment":"count","measure":{"family":"cantor","ratio":0.7},"tree":"edge","epsilon":0.1})")
            .find("measure.ratio") != std::string::npos);
  CHECK(path_of(R"({"experiment":"scale","measure":{},"tree":"edge","eps_ladder":[0.1,0.2,0.05,0.01]})")
            .find("eps_ladder") != std::string::npos);
  CHECK(path_of(R"({"experiment":"count","measure":{},"tree":"edge","epsilon":0.1,"kernel":"gauss"})")
            .find("kernel") != std::string::npos);
  CHECK(path_of(R"({"experiment":"count","measure":{},"tree":"edge","epsilon":0.1,"colour":1})")
            .find("colour: unknown field") != std::string::npos);
  CHECK(path_of(R"({"experiment":"count","measure":{},"tree":"ring-3","epsilon":0.1})").find("tree:") !=
        std::string::npos);
  CHECK(path_of(R"({"experiment":"count","measure":{"family":"uniform"},"tree":"edge","epsilon":0.1})")
            .find("measure.seed") != std::string::npos);
  CHECK(path_of(R"({"experiment":"count","measure":{"family":"file","file":"missing.csv"},"tree":"edge","epsilon":0.1})")
            .find("measure.file") != std::string::npos);
  CHECK(path_of(R"({"experiment":"count","measure":{},"tree":"edge","epsilon":0.1,"t":[[0,1,0.5],[0,1,0.6]]})")
            .find("t[1]") != std::string::npos);
  CHECK(path_of(R"({"experiment":"count","measure":{},"tree":"edge"})").find("epsilon") != std::string::npos);
  CHECK(path_of(R"({"measure":{},"tree":"edge"})").find("experiment") != std::string::npos);
  CHECK(path_of("{oops").find("malformed JSON") != std::string::npos);
  CHECK(error_kind_of([] { parse_config("{oops"); }) == ErrorKind::ConfigInvalid);
}

TEST_CASE("experiment must match the requested subcommand") {
  CHECK(error_kind_of([] { load_config(kFixtures / "cover_p4.json", ExperimentKind::Count); }) ==
        ErrorKind::ConfigInvalid);
  const auto c = parse_config(R"({"tree":"path-3"})", {}, ExperimentKind::Cover);
  CHECK(c.kind == ExperimentKind::Cover);
  CHECK(parse_experiment_kind("scaling") == ExperimentKind::Scale);
  CHECK(parse_experiment_kind("dim") == ExperimentKind::DimEmbed);
}

TEST_CASE("module errors during a run carry the config field") {
  const auto config = parse_config(R"({"experiment":"scale",
    "measure":{"family":"cantor","ratio":0.25,"branches":3,"level":3,"dims":2},
    "tree":"path-2","t":0.8,"eps_ladder":[0.1,0.05,0.025,1e-9]})");
  const std::string msg = error_message_of([&] { run(config, out_dir("floor")); });
  CHECK(msg.find("ResolutionFloor") != std::string::npos);
  CHECK(msg.find("eps_ladder") != std::string::npos);
}

TEST_CASE("per-edge targets must match the tree") {
  const auto config = parse_config(R"({"experiment":"count","measure":{"family":"cantor","level":3},
    "tree":"path-2","t":[[0,1,0.2]],"epsilon":0.1})");
  const std::string msg = error_message_of([&] { run(config, out_dir("edges")); });
  CHECK(msg.find("t: no target for edge (1, 2)") != std::string::npos);
}

TEST_CASE("describe reports sizes and costs") {
  const auto config = load_config(kFixtures / "describe_p3.json");
  const std::string plan = describe(config);
  CHECK(plan.find("n=6561") != std::string::npos);
  CHECK(plan.find("k=2") != std::string::npos);
  CHECK(plan.find("k*n^2 = 86093442") != std::string::npos);
  CHECK(plan.find("guards: none triggered") != std::string::npos);
}

TEST_CASE("describe flags caps before running") {
  const auto naive = parse_config(R"({"experiment":"count",
    "measure":{"family":"cantor","ratio":0.25,"branches":3,"level":4,"dims":2},
    "tree":"path-2","epsilon":0.1,"count":{"method":"naive"}})");
  CHECK(describe(naive).find("TupleSpaceTooLarge") != std::string::npos);

  const auto fourier = parse_config(R"({"experiment":"fourier","measure":{"family":"uniform","n":100,"d":3,"seed":1},
    "fourier":{"j_range":[1,2,3,4]}})");
  CHECK(describe(fourier).find("DimensionTooHigh") != std::string::npos);

  const auto huge = parse_config(R"({"experiment":"count","measure":{"family":"cantor","level":12,"dims":2},
    "tree":"edge","epsilon":0.1})");
  CHECK(describe(huge).find("TooManyPoints") != std::string::npos);
}

TEST_CASE("gen writes a measure that re-parses to the same value") {
  const auto config = parse_config(R"({"experiment":"gen",
    "measure":{"family":"cantor","ratio":0.25,"branches":3,"level":3,"dims":2,"c":0.3}})");
  const auto dir = out_dir("gen");
  run(config, dir);
  CHECK(read_measure(dir / "measure.csv") == build_measure(config.measure));
}

TEST_CASE("seeded runs are byte-identical and honor the seed override") {
  const auto config = parse_config(R"({"experiment":"lambda",
    "measure":{"family":"uniform","n":300,"d":2,"c":0.3,"seed":4},
    "tree":"path-2","lambda":{"bin_sizes":[0.125,0.0625],"samples":20000}})");
  const auto dir_a = out_dir("repro_a");
  const auto dir_b = out_dir("repro_b");
  const auto a = run(config, dir_a);
  const auto b = run(config, dir_b);
  CHECK(a.result_json == b.result_json);
  CHECK(read_text_file(dir_a / "result.json") == read_text_file(dir_b / "result.json"));
  RunOptions o;
  o.seed_override = 99;
  const auto c = run(config, out_dir("repro_c"), o);
  CHECK(c.result_json != a.result_json);
  CHECK(c.result_json.find("\"seed\": 99") != std::string::npos);
}

TEST_CASE("named trees") {
  CHECK(named_tree("edge") == path_tree(1));
  CHECK(named_tree("path-3") == path_tree(3));
  CHECK(named_tree("star-4") == star_tree(4));
  CHECK(named_tree("vertex").edge_count() == 0);
  CHECK(error_kind_of([] { named_tree("path-0"); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([] { named_tree("path-x"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("kernel cap from the environment") {
  ::setenv("DOTPROD_TREES_CAP", "5e6", 1);
  CHECK(kernel_eval_cap_from_env() == 5e6);
  ::setenv("DOTPROD_TREES_CAP", "lots", 1);
  CHECK(error_kind_of([] { kernel_eval_cap_from_env(); }) == ErrorKind::ConfigInvalid);
  ::unsetenv("DOTPROD_TREES_CAP");
  CHECK(kernel_eval_cap_from_env() == 1e9);
}

}  // TEST_SUITE
