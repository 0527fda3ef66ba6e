#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "effham/io.hpp"

using namespace effham;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("effham_unit_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

TEST_CASE("sha256 of a known string") {
  const fs::path d = scratch("sha");
  std::ofstream(d / "abc.txt") << "abc";
  CHECK(sha256_file(d / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove_all(d);
}

TEST_CASE("manifest lists every registered file with its checksum") {
  const fs::path d = scratch("manifest");
  Manifest m(d);
  m.input("potential", "cos2");
  std::ofstream(d / "a.csv") << "x\n1\n";
  std::ofstream(d / "b.csv") << "y\n2\n";
  m.add("a.csv");
  m.add("b.csv");
  m.add("a.csv");
  m.write();
  const auto j = nlohmann::json::parse(slurp(d / "manifest.json"));
  REQUIRE(j["files"].size() == 2);
  CHECK(j["files"][0]["path"] == "a.csv");
  CHECK(j["files"][1]["sha256"] == sha256_file(d / "b.csv"));
  CHECK(j["inputs"]["potential"] == "cos2");
  fs::remove_all(d);
}

TEST_CASE("SVG writers produce closed documents") {
  const fs::path d = scratch("svg");
  const Potential v = Potential::preset("cos2").perturb_bump({0.5, 0.5}, 0.1, 0.2);
  StableNormSolver s(v);
  const PeriodicOrbit o = make_orbit(s.evaluate({1, 1}, 2.5));
  write_potential_svg(d / "v.svg", v, {o}, 16);
  const LevelSetPolygon poly = level_polygon(s, 2.5, 2);
  write_levelset_svg(d / "fan.svg", {poly});
  for (const char* f : {"v.svg", "fan.svg"}) {
    const std::string text = slurp(d / f);
    CHECK(text.rfind("<svg", 0) == 0);
    CHECK(text.find("</svg>") != std::string::npos);
  }
  fs::remove_all(d);
}
