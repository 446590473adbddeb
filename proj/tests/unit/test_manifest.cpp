#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "hydrochain/manifest.hpp"

using namespace hydrochain;
namespace fs = std::filesystem;

TEST_SUITE("manifest")
{
  TEST_CASE("FNV-1a reference values")
  {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  }

  TEST_CASE("output index and manifest round trip")
  {
    const fs::path dir = fs::temp_directory_path() / "hydrochain_manifest_test";
    fs::remove_all(dir);
    OutputDir out(dir);
    out.write("a.csv", "x,y\n1,2\n", 1);
    out.write("sub/b.txt", "hello");
    REQUIRE(out.entries().size() == 2);
    CHECK(out.entries()[0].bytes == 8);
    CHECK(out.entries()[0].fnv1a.size() == 16);
    std::ifstream in(dir / "sub/b.txt");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "hello");

    RunManifest m;
    m.experiment = "equilibrium";
    m.status = "passed";
    m.config_text = "experiment = equilibrium\n";
    m.seeds = {1, 18446744073709551615ull};
    m.version = version_string();
    m.fingerprint = build_fingerprint();
    m.outputs = out.entries();
    m.checks = {{"c1", true, "ok"}, {"c2", false, "bad"}};
    m.step_counts = {{"N128", 1234}};
    m.wall_clock_seconds = 1.5;
    m.warnings = {"w"};
    m.write(dir / "manifest.json");
    const auto r = RunManifest::read(dir / "manifest.json");
    CHECK(r.experiment == m.experiment);
    CHECK(r.seeds == m.seeds);
    CHECK(r.outputs.size() == 2);
    CHECK(r.outputs[1].fnv1a == m.outputs[1].fnv1a);
    CHECK(r.checks[1].passed == false);
    CHECK(r.step_counts[0].second == 1234);
    CHECK(r.config_text == m.config_text);
    CHECK(r.warnings == m.warnings);
    CHECK_FALSE(fs::exists(dir / "manifest.json.tmp"));
    fs::remove_all(dir);
  }
}
