#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bergext/cli.hpp"
#include "bergext/harness.hpp"

using namespace bergext;

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bergext");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("bergext_test_" + name)).string();
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("config round trip and hash") {
  SweepConfig c;
  c.experiment = Experiment::claim2;
  c.claim2_eps = {0.3, 0.15};
  c.floor_a = 12.0;
  c.f1 = {Complex{1.0, 2.0}};
  const SweepConfig back = SweepConfig::from_json(c.to_json());
  CHECK(back.experiment == Experiment::claim2);
  CHECK(back.claim2_eps == c.claim2_eps);
  CHECK(back.floor_a == 12.0);
  CHECK(back.f1 == c.f1);
  CHECK(back.hash() == c.hash());

  SweepConfig d = c;
  d.out = "elsewhere.csv";
  d.format = "json";
  CHECK(d.hash() == c.hash());
  d.floor_a = 13.0;
  CHECK(d.hash() != c.hash());

  nlohmann::json bad = c.to_json();
  bad["schema"] = 99;
  CHECK_THROWS_AS(SweepConfig::from_json(bad), ParameterError);
  CHECK_THROWS_AS(parse_experiment("claim9"), ParameterError);
  CHECK(parse_experiment("kernel-table") == Experiment::kernel_table);
}

TEST_CASE("config validation") {
  SweepConfig c;
  c.ms = {};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = SweepConfig{};
  c.experiment = Experiment::claim34;
  c.eps = {0.1, -0.1};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = SweepConfig{};
  c.format = "xml";
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("claim1 sweep on small m") {
  SweepConfig c;
  c.ms = {0, 1, 2};
  c.min_degree = 24;
  c.check_convergence = false;
  const SweepResult r = run_claim1(c);
  REQUIRE(r.rows.size() == 3);
  for (const nlohmann::json& row : r.rows) {
    const double m = row.at("m").get<double>();
    CHECK(row.at("ratio").get<double>() == doctest::Approx(kPi * (1 + m * m / 2)).epsilon(1e-8));
  }
  CHECK(r.metadata.at("strictly_increasing") == true);
  const std::string csv = r.to_csv();
  CHECK(csv.rfind("m,degree,norm,ratio,converged", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("flat weight ratio does not depend on the degree") {
  for (int d : {6, 12, 24}) {
    SweepConfig c;
    c.ms = {0};
    c.min_degree = d;
    c.check_convergence = false;
    const SweepResult r = run_claim1(c);
    CHECK(r.rows.at(0).at("degree") == d);
    CHECK(r.rows.at(0).at("ratio").get<double>() == doctest::Approx(kPi).epsilon(1e-10));
  }
}

TEST_CASE("sweeps are reproducible across worker counts") {
  SweepConfig c;
  c.ms = {0, 1, 2, 3};
  c.min_degree = 12;
  c.check_convergence = false;
  setenv("BERGEXT_WORKERS", "1", 1);
  CHECK(worker_count() == 1);
  const std::string one = run_claim1(c).to_csv();
  setenv("BERGEXT_WORKERS", "3", 1);
  CHECK(worker_count() == 3);
  const std::string three = run_claim1(c).to_csv();
  unsetenv("BERGEXT_WORKERS");
  CHECK(one == three);
  CHECK(run_claim1(c).to_csv() == one);
}

TEST_CASE("run_rows keeps index order") {
  setenv("BERGEXT_WORKERS", "4", 1);
  const auto rows = run_rows(17, [](std::size_t i) { return nlohmann::json{{"i", i}}; });
  unsetenv("BERGEXT_WORKERS");
  REQUIRE(rows.size() == 17);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].at("i") == i);
}

TEST_CASE("result JSON carries provenance") {
  SweepConfig c;
  c.ms = {1};
  c.check_convergence = false;
  const nlohmann::json j = run_claim1(c).to_json();
  CHECK(j.at("experiment") == "claim1");
  CHECK(j.contains("provenance"));
  CHECK(j.at("rows").size() == 1);
  CHECK_THROWS_AS(write_result(run_claim1(c), temp_path("x.out"), "xml"), ParameterError);
}

TEST_CASE("CLI exit codes") {
  const std::string csv = temp_path("claim1.csv");
  CHECK(run_cli({"claim1", "--m", "1,2", "--no-convergence-check", "--out", csv}) == 0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "m,degree,norm,ratio,converged");

  CHECK(run_cli({"claim1", "--m", "-1", "--no-convergence-check", "--out", csv}) == 1);
  CHECK(run_cli({"claim1", "--bogus"}) == 1);
  CHECK(run_cli({"extend-cross", "--f1", "1", "--f2", "2"}) == 1);

  const Weight pole = Weight::structured(Domain::disk, {LogTerm{1.0, Poly::parse("z")}}, Poly(Poly::Kind::real));
  const std::string out = temp_path("kernel.json");
  CHECK(run_cli({"kernel", "--weight", pole.to_json().dump(), "--degree", "4", "--out", out}) == 2);

  CHECK(run_cli({"extend-jet", "--jet", "1,2", "--degree", "6", "--out", out}) == 0);
  CHECK(read_json(out).at("norm_sq").get<double>() == doctest::Approx(3 * kPi).epsilon(1e-9));
}

TEST_CASE("lemma suite flags the negative control") {
  const std::string out = temp_path("lemmas.json");
  REQUIRE(run_cli({"lemmas", "--format", "json", "--out", out}) == 0);
  const nlohmann::json j = read_json(out);
  CHECK(j.at("metadata").at("all_family_pass") == true);
  CHECK(j.at("metadata").at("negative_control_flagged") == true);
  int controls = 0;
  for (const nlohmann::json& row : j.at("rows")) {
    if (row.at("negative_control") == true) {
      ++controls;
      CHECK(row.at("pass") == false);
    } else {
      CHECK(row.at("pass") == true);
      CHECK(row.at("omega_B").get<double>() >= 1.0);
    }
  }
  CHECK(controls == 1);
}
