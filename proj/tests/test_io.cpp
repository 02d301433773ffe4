#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "ruelle/io.hpp"

using namespace ruelle;

namespace {

std::vector<double> profile_values(int n, int res) {
  std::vector<double> v(MomentRegion::profile_lattice_size(n, res));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.01 * double(i % 7);
  return v;
}

std::vector<MomentRegion> regions() {
  return {MomentRegion::ellipsoid({1.0, 2.0}),
          MomentRegion::pfamily({0.5, 1.0, 3.0}, 0.25),
          MomentRegion::radial_profile(2, 6, profile_values(2, 6)),
          MomentRegion::radial_profile(3, 6, profile_values(3, 6)),
          MomentRegion::smoothed_union(MomentRegion::ellipsoid({1.0, 1.0}),
                                       MomentRegion::ellipsoid({0.01, 10.0}), 0.01)};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("regions round-trip through JSON") {
  for (const auto& r : regions()) {
    const Json j = region_to_json(r);
    const MomentRegion back = region_from_json(Json::parse(j.dump()));
    CHECK(region_to_json(back) == j);
    const CanonicalFunction f(r), g(back);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.01, 1.0);
    for (int k = 0; k < 20; ++k) {
      Point x(r.dim());
      for (int i = 0; i < r.dim(); ++i) x(i) = unit(rng);
      CHECK(g.value(x) == f.value(x));
    }
  }
  const Json spec = Json::parse(R"({"n":2, "kind":"pfamily", "widths":[1,2], "p":0.5})");
  const MomentRegion p = region_from_json(spec);
  CHECK(p.kind() == RegionKind::PFamily);
  CHECK(p.exponent() == 0.5);
  const Json profile = region_to_json(regions()[2]);
  CHECK(profile["indices"].size() == profile["values"].size());
  CHECK(profile["indices"][0] == Json::array({0, 6}));
  CHECK(profile["indices"][1] == Json::array({1, 5}));
}

TEST_CASE("malformed region specs") {
  CHECK(code_of([] { load_region("{\"n\":2,"); }) == ErrorCode::SpecParseError);
  CHECK(code_of([] { load_region(R"({"n":2,"kind":"cube","widths":[1,2]})"); }) ==
        ErrorCode::SpecParseError);
  CHECK(code_of([] { load_region(R"({"n":2,"kind":"ellipsoid"})"); }) ==
        ErrorCode::SpecParseError);
  CHECK(code_of([] { load_region(R"({"n":2,"kind":"ellipsoid","widths":[1]})"); }) ==
        ErrorCode::SpecParseError);
  CHECK(code_of([] { load_region(R"({"n":2,"kind":"ellipsoid","widths":["a",2]})"); }) ==
        ErrorCode::SpecParseError);
  CHECK(code_of([] { load_region(R"({"n":2,"kind":"ellipsoid","widths":[2,1]})"); }) ==
        ErrorCode::UnsortedWidths);
  CHECK(code_of([] { load_region("/nonexistent/region.json"); }) ==
        ErrorCode::SpecParseError);
  Json bad = region_to_json(regions()[2]);
  bad["indices"][0] = Json::array({6, 0});
  CHECK(code_of([&] { region_from_json(bad); }) == ErrorCode::SpecParseError);
}

TEST_CASE("regions load from files") {
  const std::string path = "test_io_region.json";
  {
    std::ofstream out(path);
    out << region_to_json(regions()[1]).dump(2);
  }
  CHECK(region_to_json(load_region(path)) == region_to_json(regions()[1]));
  std::remove(path.c_str());
}

TEST_CASE("matrices and paths round-trip") {
  std::mt19937_64 rng(17);
  const Matrix m = oracle::random_symmetric(4, rng, 1.0);
  CHECK(matrix_from_json(Json::parse(matrix_to_json(m).dump())) == m);
  const Json rows = matrix_to_json(m);
  CHECK(rows.size() == 4);
  CHECK(rows[1][2].get<double>() == m(1, 2));

  const Matrix a = oracle::random_symmetric(4, rng, 0.3);
  const Matrix w = oracle::standard_omega(2);
  const auto path = SymplecticPath::sample(
      2, [&](double t) { return oracle::expm(w * a * t); }, 1.0, 8);
  const SymplecticPath back = path_from_json(Json::parse(path_to_json(path).dump()));
  REQUIRE(back.size() == path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    CHECK(back.time(i) == path.time(i));
    CHECK(back.matrix(i) == path.matrix(i));
  }
  CHECK(code_of([] { matrix_from_json(Json::parse("[[1,2],[3]]")); }) ==
        ErrorCode::SpecParseError);
  CHECK(code_of([] { path_from_json(Json::parse(R"({"n":1,"samples":[[0,[[1]]]]})")); }) ==
        ErrorCode::SpecParseError);
}

TEST_CASE("FNV-1a reference vectors") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("reports carry provenance and render deterministically") {
  Json config;
  config["command"] = "demo";
  Report r("demo", config);
  r.quantity("ru", 1.5, Provenance::ClosedForm);
  r.quantity("vol", 0.25, Provenance::Quadrature, 1e-12);
  r.quantity("big", std::numeric_limits<double>::infinity(), Provenance::ClosedForm);
  r.quantity("count", 7L);
  r.flag("monotone", true);
  r.assertion("ok", true);
  const Json j = r.to_json();
  for (const auto& [name, q] : j["quantities"].items()) {
    CHECK(q.contains("provenance"));
    CHECK(q.contains("error"));
  }
  CHECK(j["quantities"]["vol"]["provenance"] == "quadrature");
  CHECK(j["quantities"]["big"]["value"] == "+inf");
  CHECK(j["quantities"]["count"]["provenance"] == "exact");
  CHECK(j["input_hash"] == hex64(fnv1a(config.dump())));
  CHECK(j["status"] == "pass");
  CHECK_FALSE(j.contains("wall_time_s"));
  CHECK(r.render("json") == r.render("json"));
  const std::string csv = r.render("csv");
  CHECK(csv.find("vol,0.25,9.9999999999999998e-13,quadrature\n") != std::string::npos);
  r.assertion("bad", false);
  CHECK_FALSE(r.passed());
  CHECK(r.to_json()["status"] == "fail");
}

TEST_CASE("atomic writes replace the target") {
  const std::string path = "test_io_atomic.txt";
  write_atomic(path, "first");
  write_atomic(path, "second");
  std::ifstream in(path);
  std::string s;
  std::getline(in, s);
  CHECK(s == "second");
  std::remove(path.c_str());
  CHECK(code_of([] { write_atomic("/nonexistent/dir/x", "y"); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("profile CSV lists boundary points") {
  std::ostringstream os;
  write_profile_csv(MomentRegion::ellipsoid({1.0, 2.0}), 4, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "u1,u2,R,x1,x2");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    double u1, u2, r, x1, x2;
    char c;
    std::istringstream ls(line);
    ls >> u1 >> c >> u2 >> c >> r >> c >> x1 >> c >> x2;
    CHECK(x1 / 1.0 + x2 / 2.0 == doctest::Approx(1.0));
  }
  CHECK(rows == 5);
}
