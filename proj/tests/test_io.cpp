#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "gcgarch/io.hpp"
#include "gcgarch/rng.hpp"
#include "json.hpp"

namespace {

// Scratch file that removes itself when the test section ends.
struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name)
      : path(std::filesystem::temp_directory_path() / ("gcg_test_" + name)) {}
  ~TempFile() { std::filesystem::remove(path); }
  std::string str() const { return path.string(); }
  void fill(const std::string& text) const {
    std::ofstream out(path);
    out << text;
  }
};

gcg::FittedModel example_model() {
  gcg::Dag g(4, {{0, 2}, {0, 3}, {1, 3}, {2, 3}});
  auto model = gcg::make_model(4, 2, {"F1", "F2", "F3", "F4", "S1", "S2"}, g);
  gcg::SeqRng rng(7);
  for (auto& gp : model.marginals) {
    gp = {0.05 + 0.1 * rng.u01(), 0.02 + 0.05 * rng.u01(), 0.85, 4.0 + 6.0 * rng.u01()};
  }
  for (auto& cp : model.dag_copulas) {
    cp = {-0.5 + rng.u01(), 0.03 * rng.u01(), 0.9, 3.0 + 9.0 * rng.u01()};
  }
  for (auto& row : model.stock_copulas) {
    for (auto& cp : row) cp = {-0.5 + rng.u01(), 0.05 * rng.u01(), 0.8, 5.0 + rng.u01()};
  }
  return model;
}

}  // namespace

TEST_CASE("double formatting round-trips exactly") {
  gcg::SeqRng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double x = std::exp(40.0 * (rng.u01() - 0.5)) * (rng.u01() < 0.5 ? -1.0 : 1.0);
    const std::string s = gcg::format_double(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(gcg::format_double(0.25) == "0.25");
  CHECK(gcg::format_double(-3.0) == "-3");
}

TEST_CASE("manifest parsing enforces roles and ordering") {
  TempFile f("manifest.csv");
  f.fill("symbol,role\nIDX1,factor\nIDX2,factor\nAAA,stock\n");
  const auto m = gcg::read_manifest_csv(f.str());
  REQUIRE(m.size() == 3);
  CHECK(m[0].symbol == "IDX1");
  CHECK(m[0].is_factor);
  CHECK_FALSE(m[2].is_factor);

  f.fill("symbol,role\nAAA,stock\nIDX1,factor\n");
  CHECK_THROWS_AS(gcg::read_manifest_csv(f.str()), gcg::Error);
  f.fill("symbol,role\nAAA,asset\n");
  CHECK_THROWS_AS(gcg::read_manifest_csv(f.str()), gcg::Error);
  f.fill("symbol,role\nAAA,stock\nAAA,stock\n");
  CHECK_THROWS_AS(gcg::read_manifest_csv(f.str()), gcg::Error);
  f.fill("ticker,role\nAAA,stock\n");
  CHECK_THROWS_AS(gcg::read_manifest_csv(f.str()), gcg::Error);
}

TEST_CASE("price ingestion builds an ordered return panel") {
  TempFile manifest("m1.csv");
  manifest.fill("symbol,role\nIDX,factor\nAAA,stock\n");
  TempFile prices("p1.csv");
  // Rows deliberately out of date order and interleaved across symbols.
  prices.fill(
      "date,symbol,close\n"
      "2024-01-03,AAA,52\n"
      "2024-01-02,IDX,1000\n"
      "2024-01-02,AAA,50\n"
      "2024-01-04,IDX,990\n"
      "2024-01-03,IDX,1010\n"
      "2024-01-04,AAA,51\n");
  const auto panel = gcg::read_prices_csv(prices.str(), manifest.str());
  CHECK(panel.symbols == std::vector<std::string>{"IDX", "AAA"});
  CHECK(panel.n_factors == 1);
  REQUIRE(panel.days() == 2);
  CHECK(panel.dates == std::vector<std::string>{"2024-01-03", "2024-01-04"});
  CHECK_THAT(panel.r(0, 0), Catch::Matchers::WithinAbs(100.0 * std::log(1010.0 / 1000.0), 1e-12));
  CHECK_THAT(panel.r(1, 1), Catch::Matchers::WithinAbs(100.0 * std::log(51.0 / 52.0), 1e-12));
}

TEST_CASE("price ingestion rejects holes, duplicates, and unknown symbols") {
  TempFile manifest("m2.csv");
  manifest.fill("symbol,role\nIDX,factor\nAAA,stock\n");
  TempFile prices("p2.csv");

  prices.fill("date,symbol,close\n2024-01-02,IDX,1\n2024-01-02,AAA,1\n2024-01-03,IDX,1\n");
  CHECK_THROWS_WITH(gcg::read_prices_csv(prices.str(), manifest.str()),
                    Catch::Matchers::ContainsSubstring("missing price"));

  prices.fill("date,symbol,close\n2024-01-02,IDX,1\n2024-01-02,IDX,2\n");
  CHECK_THROWS_WITH(gcg::read_prices_csv(prices.str(), manifest.str()),
                    Catch::Matchers::ContainsSubstring("duplicate"));

  prices.fill("date,symbol,close\n2024-01-02,ZZZ,1\n");
  CHECK_THROWS_WITH(gcg::read_prices_csv(prices.str(), manifest.str()),
                    Catch::Matchers::ContainsSubstring("not in manifest"));

  prices.fill("date,symbol,close\n2024-13-02,IDX,1\n");
  CHECK_THROWS_WITH(gcg::read_prices_csv(prices.str(), manifest.str()),
                    Catch::Matchers::ContainsSubstring("bad date"));

  prices.fill("date,symbol,close\n2024-01-02,IDX,x1\n");
  CHECK_THROWS_AS(gcg::read_prices_csv(prices.str(), manifest.str()), gcg::Error);

  CHECK_THROWS_AS(gcg::read_prices_csv("/nonexistent/prices.csv", manifest.str()), gcg::Error);
}

TEST_CASE("returns csv round-trips bit-exactly") {
  gcg::ReturnPanel panel;
  panel.symbols = {"IDX", "AAA", "BBB"};
  panel.n_factors = 1;
  panel.dates = {"2024-01-02", "2024-01-03", "2024-01-04"};
  gcg::SeqRng rng(3);
  panel.r.resize(3, 3);
  for (int t = 0; t < 3; ++t) {
    for (int j = 0; j < 3; ++j) panel.r(t, j) = 2.0 * rng.normal();
  }

  TempFile f("returns.csv");
  gcg::write_returns_csv(panel, f.str());
  const auto back = gcg::read_returns_csv(f.str());
  CHECK(back.symbols == panel.symbols);
  CHECK(back.dates == panel.dates);
  CHECK(back.r == panel.r);
  CHECK(back.n_factors == 0);

  TempFile manifest("m3.csv");
  manifest.fill("symbol,role\nIDX,factor\nAAA,stock\nBBB,stock\n");
  const auto roled = gcg::read_returns_csv(f.str(), manifest.str());
  CHECK(roled.n_factors == 1);
  CHECK(roled.r == panel.r);

  // Manifest in a different order reorders the columns to match it.
  TempFile manifest2("m4.csv");
  manifest2.fill("symbol,role\nAAA,factor\nIDX,stock\nBBB,stock\n");
  const auto reordered = gcg::read_returns_csv(f.str(), manifest2.str());
  CHECK(reordered.symbols == std::vector<std::string>{"AAA", "IDX", "BBB"});
  CHECK(reordered.r.col(0) == panel.r.col(1));
  CHECK(reordered.r.col(1) == panel.r.col(0));
}

TEST_CASE("model json round-trips every parameter exactly") {
  const auto model = example_model();
  TempFile f("model.json");
  gcg::write_model_json(model, f.str());
  const auto back = gcg::read_model_json(f.str());

  CHECK(back.m == model.m);
  CHECK(back.p == model.p);
  CHECK(back.m_sc == model.m_sc);
  CHECK(back.symbols == model.symbols);
  CHECK(back.dag == model.dag);
  CHECK(back.order == model.order);
  for (std::size_t i = 0; i < model.marginals.size(); ++i) {
    CHECK(back.marginals[i].omega == model.marginals[i].omega);
    CHECK(back.marginals[i].alpha == model.marginals[i].alpha);
    CHECK(back.marginals[i].beta == model.marginals[i].beta);
    CHECK(back.marginals[i].v == model.marginals[i].v);
  }
  for (std::size_t u = 0; u < model.dag_copulas.size(); ++u) {
    CHECK(back.dag_copulas[u].phi_bar == model.dag_copulas[u].phi_bar);
    CHECK(back.dag_copulas[u].a == model.dag_copulas[u].a);
    CHECK(back.dag_copulas[u].b == model.dag_copulas[u].b);
    CHECK(back.dag_copulas[u].v == model.dag_copulas[u].v);
  }
  for (int s = 0; s < model.p; ++s) {
    for (int l = 0; l < model.m; ++l) {
      CHECK(back.stock_copulas[s][l].phi_bar == model.stock_copulas[s][l].phi_bar);
    }
  }
}

TEST_CASE("model json rejects shifted copula labels") {
  const auto model = example_model();
  TempFile f("model_tampered.json");
  gcg::write_model_json(model, f.str());

  std::ifstream in(f.str());
  nlohmann::json j;
  in >> j;
  std::swap(j["dag_copulas"][0], j["dag_copulas"][1]);
  f.fill(j.dump(2));
  CHECK_THROWS_WITH(gcg::read_model_json(f.str()),
                    Catch::Matchers::ContainsSubstring("unit labels mismatch"));

  gcg::write_model_json(model, f.str());
  in = std::ifstream(f.str());
  in >> j;
  j["schema_version"] = 2;
  f.fill(j.dump(2));
  CHECK_THROWS_AS(gcg::read_model_json(f.str()), gcg::Error);
}

TEST_CASE("scenario csv round-trips in long format") {
  gcg::MatrixXd sc(4, 2);
  gcg::SeqRng rng(17);
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < 2; ++j) sc(k, j) = rng.normal();
  }
  TempFile f("scenarios.csv");
  gcg::write_scenarios_csv(sc, {"AAA", "BBB"}, f.str());

  std::vector<std::string> symbols;
  const auto back = gcg::read_scenarios_csv(f.str(), &symbols);
  CHECK(symbols == std::vector<std::string>{"AAA", "BBB"});
  CHECK(back == sc);

  f.fill("k,symbol,return\n0,AAA,1.0\n1,AAA,2.0\n0,BBB,0.5\n");
  CHECK_THROWS_WITH(gcg::read_scenarios_csv(f.str()),
                    Catch::Matchers::ContainsSubstring("missing value"));
}

TEST_CASE("marginals csv has the documented header") {
  TempFile f("marginals.csv");
  gcg::write_marginals_csv({"IDX"}, {gcg::GarchParams{0.1, 0.05, 0.9, 6.0}}, {-123.5}, f.str());
  std::ifstream in(f.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "symbol,omega,alpha,beta,v,loglik");
  REQUIRE(std::getline(in, line));
  CHECK(line == "IDX,0.1,0.05,0.9,6,-123.5");
}
