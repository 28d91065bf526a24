#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "imgsim/scenario.hpp"

using namespace imgsim;

namespace {

nlohmann::json minimal_json() {
    return nlohmann::json::parse(R"({
        "name": "mini",
        "seed": 7,
        "images": [{"id": "img1", "size_bytes": 5000000000}],
        "workload": {"kind": "batch", "groups": [["img1", 4]]}
    })");
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/imgsim_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("a minimal scenario fills in documented defaults") {
    const Scenario s = scenario_from_json(minimal_json());
    CHECK(s.name == "mini");
    CHECK(s.seed == 7);
    CHECK(s.seed_set);
    CHECK(s.topology.node_count == 24);
    CHECK(s.node.vcpus == 8);
    CHECK(s.protocol.kind == ProtocolKind::Central);
    CHECK(s.protocol.max_active_image_downloads_per_node == 3);
    CHECK(s.scheduler.weighers.size() == 2);
    CHECK(s.scheduler.weighers[0].name == "cache");
    CHECK(s.scheduler.weighers[0].multiplier == 16.0);
    CHECK(s.cow);
    CHECK(s.phases.resize == from_whole_seconds(2));
    CHECK(s.images.at(0).piece_size_bytes == 32ll << 20);
    CHECK(validate_scenario(s).empty());
}

TEST_CASE("json round trip preserves the scenario") {
    auto j = minimal_json();
    j["protocol"] = {{"kind", "swarm"}, {"label", "bittorrent"}};
    j["workload"] = {{"kind", "poisson"},
                     {"rate_per_hour", 80.0},
                     {"duration_seconds", 3600.0},
                     {"images", {"img1"}},
                     {"choice", "zipf"},
                     {"zipf_s", 1.2}};
    const Scenario s = scenario_from_json(j);
    const Scenario back = scenario_from_json(scenario_to_json(s));
    CHECK(back.protocol.kind == ProtocolKind::Swarm);
    CHECK(back.workload.kind == WorkloadConfig::Kind::Poisson);
    CHECK(back.workload.trace.zipf_s == 1.2);
    CHECK(scenario_to_json(back) == scenario_to_json(s));
    CHECK(scenario_digest(back) == scenario_digest(s));
}

TEST_CASE("the digest changes when the content changes") {
    const Scenario a = scenario_from_json(minimal_json());
    auto j = minimal_json();
    j["seed"] = 8;
    const Scenario b = scenario_from_json(j);
    CHECK(scenario_digest(a) != scenario_digest(b));
}

TEST_CASE("a missing seed is a validation error") {
    auto j = minimal_json();
    j.erase("seed");
    const auto issues = validate_scenario(scenario_from_json(j));
    CHECK(has_validation_errors(issues));
}

TEST_CASE("workloads referencing unknown images are rejected") {
    auto j = minimal_json();
    j["workload"]["groups"] = nlohmann::json::array({nlohmann::json::array({"ghost", 4})});
    const auto issues = validate_scenario(scenario_from_json(j));
    CHECK(has_validation_errors(issues));
}

TEST_CASE("unknown weighers are rejected") {
    auto j = minimal_json();
    j["scheduler"] = {{"weighers", {{{"name", "made_up"}, {"multiplier", 1.0}}}}};
    const auto issues = validate_scenario(scenario_from_json(j));
    CHECK(has_validation_errors(issues));
}

TEST_CASE("nonpositive sizes are rejected") {
    auto j = minimal_json();
    j["images"][0]["size_bytes"] = 0;
    CHECK(has_validation_errors(validate_scenario(scenario_from_json(j))));
}

TEST_CASE("capacity pressure is a warning, not an error") {
    auto j = minimal_json();
    j["topology"] = {{"node_count", 1}};
    j["node"] = {{"vcpus", 1}};
    j["workload"]["groups"] = nlohmann::json::array({nlohmann::json::array({"img1", 50})});
    const auto issues = validate_scenario(scenario_from_json(j));
    bool warned = false;
    for (const auto& i : issues) {
        CHECK_FALSE(i.error);
        warned = true;
    }
    CHECK(warned);
}

TEST_CASE("scenarios load from disk") {
    TempFile f("scn.json");
    {
        std::ofstream out(f.path);
        out << minimal_json().dump(2);
    }
    const Scenario s = load_scenario(f.path);
    CHECK(s.name == "mini");
    CHECK_THROWS(load_scenario("/tmp/imgsim_no_such_scenario.json"));
}

TEST_CASE("every shipped scenario validates cleanly") {
    // The build runs tests from the build tree; scenario dir is a sibling of
    // the sources. Probe both common locations.
    for (const std::string dir : {"../scenarios", "scenarios", "../../scenarios"}) {
        std::ifstream probe(dir + "/table1-1x192-central.json");
        if (!probe.good()) continue;
        for (const std::string name :
             {"table1-1x192-central", "table1-8x24-swarm", "warmcache-4x48",
              "trace-80-cache-swarm", "trace-80-singlefetch"}) {
            const Scenario s = load_scenario(dir + "/" + name + ".json");
            const auto issues = validate_scenario(s);
            CHECK_FALSE(has_validation_errors(issues));
            CHECK(s.name == name);
        }
        return;
    }
    MESSAGE("scenario directory not found; skipping shipped-scenario checks");
}
