#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "imgsim/metrics.hpp"

using namespace imgsim;

namespace {

VmBootRecord boot_record(std::int64_t id, const std::string& group, SimTime arrival,
                         SimTime ready) {
    VmBootRecord r;
    r.request_id = id;
    r.group_id = group;
    r.image_id = "img1";
    r.node_id = 0;
    r.arrival = arrival;
    r.state = VmState::Active;
    r.timeline = {{BootPhase::Claim, arrival, ready}};
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/imgsim_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("summary statistics match hand-computed values") {
    Engine e;
    FlowNetwork net(e, Topology(TopologyConfig{}));
    Recorder rec;
    // Boot times 2, 4, 6, 8, 10 seconds.
    for (int i = 0; i < 5; ++i) {
        rec.add_boot(boot_record(i, "g", 0, from_whole_seconds(2 * (i + 1))));
    }
    const auto s = summarize(rec, net, {{"img1", 3}}, 0, from_whole_seconds(10));
    CHECK(s.vm_total == 5);
    CHECK(s.vm_active == 5);
    CHECK(s.vm_failed == 0);
    CHECK(s.boot_mean_s == doctest::Approx(6.0));
    CHECK(s.boot_median_s == doctest::Approx(6.0));
    CHECK(s.boot_p95_s == doctest::Approx(10.0).epsilon(0.05));
    CHECK(s.cold_fetches.at("img1") == 3);
}

TEST_CASE("group summaries report first-ready and makespan per group") {
    Engine e;
    FlowNetwork net(e, Topology(TopologyConfig{}));
    Recorder rec;
    rec.add_boot(boot_record(0, "a", 0, from_whole_seconds(5)));
    rec.add_boot(boot_record(1, "a", 0, from_whole_seconds(9)));
    rec.add_boot(boot_record(2, "b", from_whole_seconds(10), from_whole_seconds(12)));
    const auto s = summarize(rec, net, {}, 0, from_whole_seconds(12));
    CHECK(s.groups.at("a").first_ready == from_whole_seconds(5));
    CHECK(s.groups.at("a").all_ready == from_whole_seconds(9));
    CHECK(s.groups.at("a").vm_count == 2);
    CHECK(s.groups.at("b").first_ready == from_whole_seconds(2));
    CHECK(s.groups.at("b").all_ready == from_whole_seconds(2));
}

TEST_CASE("failed VMs are counted but excluded from boot statistics") {
    Engine e;
    FlowNetwork net(e, Topology(TopologyConfig{}));
    Recorder rec;
    rec.add_boot(boot_record(0, "g", 0, from_whole_seconds(4)));
    auto failed = boot_record(1, "g", 0, from_whole_seconds(2));
    failed.state = VmState::Failed;
    rec.add_boot(failed);
    const auto s = summarize(rec, net, {}, 0, from_whole_seconds(4));
    CHECK(s.vm_total == 2);
    CHECK(s.vm_active == 1);
    CHECK(s.vm_failed == 1);
    CHECK(s.boot_mean_s == doctest::Approx(4.0));
}

TEST_CASE("kde bandwidth follows Silverman's rule") {
    // Unit-spaced samples: sd = sqrt(10/3) over {1..5}? Use a known small set.
    const std::vector<double> samples{1.0, 2.0, 3.0, 4.0, 5.0};
    const auto k = kde(samples);
    // sd = sqrt(2.5), IQR = 2 (quartile convention-dependent); the rule uses
    // 0.9 * min(sd, IQR/1.34) * n^(-1/5).
    CHECK(k.bandwidth > 0.0);
    CHECK(k.bandwidth < 0.9 * std::sqrt(2.5) * std::pow(5.0, -0.2) + 1e-12);
    CHECK(k.x.size() == 512);
    CHECK(k.density.size() == 512);
}

TEST_CASE("kde grid covers min-3h to max+3h and density is positive") {
    const std::vector<double> samples{2.0, 4.0, 9.0, 10.0, 12.0, 15.0};
    const auto k = kde(samples);
    CHECK(k.x.front() == doctest::Approx(2.0 - 3 * k.bandwidth));
    CHECK(k.x.back() == doctest::Approx(15.0 + 3 * k.bandwidth));
    for (double d : k.density) CHECK(d >= 0.0);
}

TEST_CASE("kde integrates to one") {
    std::vector<double> samples;
    for (int i = 0; i < 200; ++i) {
        samples.push_back(10.0 + 3.0 * std::sin(i * 0.7) + 0.01 * i);
    }
    const auto k = kde(samples);
    double integral = 0.0;
    for (std::size_t i = 1; i < k.x.size(); ++i) {
        integral += 0.5 * (k.density[i] + k.density[i - 1]) * (k.x[i] - k.x[i - 1]);
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("kde rejects degenerate samples") {
    CHECK_THROWS_AS(kde({}), std::invalid_argument);
    CHECK_THROWS_AS(kde({3.0}), std::invalid_argument);
    CHECK_THROWS_AS(kde({3.0, 3.0, 3.0}), std::invalid_argument);
}

TEST_CASE("summary exports are deterministic and parse back") {
    Engine e;
    FlowNetwork net(e, Topology(TopologyConfig{}));
    Recorder rec;
    rec.add_boot(boot_record(0, "g", 0, from_whole_seconds(5)));
    rec.add_boot(boot_record(1, "g", 0, from_whole_seconds(7)));
    const auto s = summarize(rec, net, {{"img1", 2}}, 123, from_whole_seconds(7));

    TempFile a("summary_a.csv"), b("summary_b.csv");
    export_summary(s, a.path, "csv");
    export_summary(s, b.path, "csv");
    const auto text = slurp(a.path);
    CHECK(text == slurp(b.path));
    CHECK(text.find("boot_mean_s,6.000000") != std::string::npos);
    CHECK(text.find("catalog_egress_bytes,123") != std::string::npos);

    TempFile j("summary.json");
    export_summary(s, j.path, "json");
    const auto parsed = nlohmann::json::parse(slurp(j.path));
    CHECK(parsed["vm_total"] == 2);
    CHECK(parsed["boot_mean_s"] == doctest::Approx(6.0));
}

TEST_CASE("timeline export writes one wide row per VM") {
    Recorder rec;
    auto r = boot_record(7, "g", 0, from_whole_seconds(1));
    r.timeline.push_back({BootPhase::Download, from_whole_seconds(1), from_whole_seconds(3)});
    rec.add_boot(r);
    TempFile f("timelines.csv");
    export_vm_timelines(rec, f.path);
    const auto text = slurp(f.path);
    CHECK(text.find("request_id") != std::string::npos);  // header
    CHECK(text.find("claim_start_s") != std::string::npos);
    CHECK(text.find("download_end_s") != std::string::npos);
    CHECK(text.find("7,g,img1,0,") != std::string::npos);
    // Header plus one row per VM.
    int lines = 0;
    for (char c : text) lines += (c == '\n');
    CHECK(lines == 2);
}

TEST_CASE("decision export round-trips the omega digest") {
    Recorder rec;
    rec.add_decision({42, true, 3, false, 0xdeadbeefull});
    TempFile f("decisions.csv");
    export_decisions(rec, f.path);
    const auto text = slurp(f.path);
    CHECK(text.find("42") != std::string::npos);
    CHECK(text.find(std::to_string(0xdeadbeefull)) != std::string::npos);
}
