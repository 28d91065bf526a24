// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. argv[1] is the scenario directory.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "imgsim/metrics.hpp"
#include "imgsim/rng.hpp"
#include "imgsim/scheduler.hpp"
#include "imgsim/simulation.hpp"

using namespace imgsim;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& what,
            const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": " << what;
    if (!detail.empty()) std::cout << " [" << detail << "]";
    std::cout << "\n";
    if (!ok) ++g_failures;
}

std::string g_scenario_dir = "scenarios";

Scenario load(const std::string& name) {
    return load_scenario(g_scenario_dir + "/" + name + ".json");
}

struct RunResult {
    RunSummary summary;
    std::vector<double> boot_times;
    std::vector<VmBootRecord> boots;
    std::int64_t cold_total = 0;
};

RunResult run_scenario(Scenario s) {
    Simulation sim(s);
    RunResult r;
    r.summary = sim.run();
    r.boot_times = sim.recorder().boot_times_seconds();
    r.boots = sim.recorder().boots();
    r.cold_total = sim.transfer().total_cold_fetches();
    return r;
}

SimTime makespan(const RunSummary& s) {
    SimTime m = 0;
    for (const auto& [g, gs] : s.groups) m = std::max(m, gs.all_ready);
    return m;
}

// ---------------------------------------------------------------------------
// Criterion 1: fairness oracle. An independently written progressive-filling
// reference, flow-major rather than link-major, sharing only the fixed-point
// convention (floored per-stage increments in uB/s; freeze when a traversed
// link's residual drops below its active-flow count).
std::vector<std::int64_t> oracle_max_min(const std::vector<std::int64_t>& caps,
                                         const std::vector<std::vector<int>>& paths) {
    const int nf = static_cast<int>(paths.size());
    std::vector<std::int64_t> rate(nf, 0), residual = caps;
    std::vector<bool> active(nf, true);
    auto users_of = [&](int link) {
        int u = 0;
        for (int f = 0; f < nf; ++f) {
            if (!active[f]) continue;
            if (std::find(paths[f].begin(), paths[f].end(), link) != paths[f].end()) ++u;
        }
        return u;
    };
    int remaining = nf;
    while (remaining > 0) {
        std::int64_t step = INT64_MAX;
        for (int f = 0; f < nf; ++f) {
            if (!active[f]) continue;
            for (int l : paths[f]) step = std::min(step, residual[l] / users_of(l));
        }
        if (step > 0) {
            std::vector<std::int64_t> drain(caps.size(), 0);
            for (int f = 0; f < nf; ++f) {
                if (!active[f]) continue;
                rate[f] += step;
                for (int l : paths[f]) drain[l] += step;
            }
            for (std::size_t l = 0; l < caps.size(); ++l) residual[l] -= drain[l];
        }
        for (int f = 0; f < nf; ++f) {
            if (!active[f]) continue;
            bool stuck = false;
            for (int l : paths[f]) {
                if (residual[l] < users_of(l)) stuck = true;
            }
            if (stuck) {
                active[f] = false;
                --remaining;
            }
        }
    }
    return rate;
}

void criterion_1() {
    RngStream rng(20260823, "acceptance-fairness");
    bool ok = true;
    std::string detail;
    for (int trial = 0; trial < 25 && ok; ++trial) {
        const int n_links = 1 + static_cast<int>(rng.next_below(5));
        const int n_flows = 1 + static_cast<int>(rng.next_below(8));
        std::vector<std::int64_t> caps;
        for (int l = 0; l < n_links; ++l) {
            caps.push_back(static_cast<std::int64_t>(1 + rng.next_below(2000)) *
                           1'000'000);
        }
        std::vector<std::vector<int>> paths(n_flows);
        for (auto& p : paths) {
            std::vector<int> pool;
            for (int l = 0; l < n_links; ++l) pool.push_back(l);
            const int len = 1 + static_cast<int>(rng.next_below(n_links));
            for (int i = 0; i < len; ++i) {
                const int j = i + static_cast<int>(rng.next_below(pool.size() - i));
                std::swap(pool[i], pool[j]);
                p.push_back(pool[i]);
            }
        }
        const auto got = max_min_rates(caps, paths);
        const auto want = oracle_max_min(caps, paths);
        for (int f = 0; f < n_flows; ++f) {
            if (got[f] != want[f]) {
                ok = false;
                detail = "trial " + std::to_string(trial) + " flow " +
                         std::to_string(f) + ": got " + std::to_string(got[f]) +
                         " want " + std::to_string(want[f]);
                break;
            }
        }
    }
    report(1, ok, "max-min rates match the independent progressive-filling oracle on 25 random topologies", detail);
}

void criterion_2() {
    Engine engine;
    Catalog catalog;
    std::vector<ComputeNode> nodes;
    for (int i = 0; i < 24; ++i) {
        catalog.register_image({"img" + std::to_string(i), 5'000'000'000, 32ll << 20, 0});
        nodes.emplace_back(i, 8, 16ll << 30, 140'000'000'000, 100'000'000);
    }
    FlowNetwork net(engine, Topology(TopologyConfig{}));
    TransferManager tm(engine, net, catalog, nodes, ProtocolConfig{}, 42);
    SimTime last_done = 0;
    for (int i = 0; i < 24; ++i) {
        tm.ensure_image(i, "img" + std::to_string(i),
                        [&] { last_done = std::max(last_done, engine.now()); });
    }
    engine.run_until(kSimTimeMax);
    const double makespan_s = to_seconds(last_done);
    const bool ok = std::abs(makespan_s - 960.0) <= 9.6;
    report(2, ok, "24 distinct 5 GB central fetches finish within 1% of 960 s",
           "makespan " + std::to_string(makespan_s) + " s");
}

void criterion_3() {
    const auto central = run_scenario(load("table1-8x24-central"));
    const auto swarm = run_scenario(load("table1-8x24-swarm"));
    const double mc = to_seconds(makespan(central.summary));
    const double ms = to_seconds(makespan(swarm.summary));
    const auto ec = central.summary.catalog_egress_bytes;
    const auto es = swarm.summary.catalog_egress_bytes;
    const bool ok = ms <= 0.5 * mc && es <= ec / 2;
    std::ostringstream d;
    d << "makespan swarm " << ms << " s vs central " << mc << " s; egress swarm " << es
      << " B vs central " << ec << " B";
    report(3, ok, "8x24 swarm halves both makespan and catalog egress vs central", d.str());
}

void criterion_4() {
    const auto r = run_scenario(load("table1-1x192-central"));
    const bool ok = r.cold_total == 24;
    report(4, ok, "1x192 central performs exactly one transfer per node (24 total)",
           "cold fetches " + std::to_string(r.cold_total));
}

void criterion_5() {
    const auto r = run_scenario(load("trace-80-singlefetch"));
    bool ok = r.cold_total == 4;
    std::string detail = "cold fetches " + std::to_string(r.cold_total);

    // The image is warm once the first nonzero download of it ends; every VM
    // arriving after that must see a zero-length download phase.
    std::map<std::string, SimTime> warm_at;
    for (const auto& b : r.boots) {
        for (const auto& span : b.timeline) {
            if (span.phase != BootPhase::Download || span.end == span.start) continue;
            auto it = warm_at.find(b.image_id);
            if (it == warm_at.end() || span.end < it->second) warm_at[b.image_id] = span.end;
        }
    }
    int post_warm = 0;
    for (const auto& b : r.boots) {
        const auto it = warm_at.find(b.image_id);
        if (it == warm_at.end() || b.arrival < it->second) continue;
        ++post_warm;
        for (const auto& span : b.timeline) {
            if (span.phase == BootPhase::Download && span.end != span.start) {
                ok = false;
                detail += "; request " + std::to_string(b.request_id) +
                          " downloaded after warm";
            }
        }
    }
    detail += "; post-warm VMs " + std::to_string(post_warm);
    report(5, ok, "80/h trace with cache-aware placement needs exactly 4 cold fetches and zero post-warm downloads", detail);
}

struct TraceCell {
    double mean_boot = 0;                    // across seeds
    std::vector<std::vector<double>> boots;  // per-seed samples, reused by criterion 11
};

std::map<std::string, TraceCell> g_trace_cells;

void criterion_6() {
    const std::vector<std::uint64_t> seeds{101, 202, 303};
    for (const std::string rate : {"80", "100"}) {
        for (const std::string cache : {"cache", "nocache"}) {
            for (const std::string proto : {"central", "swarm"}) {
                const std::string name = "trace-" + rate + "-" + cache + "-" + proto;
                TraceCell cell;
                double total = 0;
                for (auto seed : seeds) {
                    Scenario s = load(name);
                    s.seed = seed;
                    const auto r = run_scenario(std::move(s));
                    total += r.summary.boot_mean_s;
                    cell.boots.push_back(r.boot_times);
                }
                cell.mean_boot = total / seeds.size();
                g_trace_cells[name] = cell;
            }
        }
    }
    bool ok = true;
    std::ostringstream d;
    for (const std::string rate : {"80", "100"}) {
        const double cs = g_trace_cells["trace-" + rate + "-cache-swarm"].mean_boot;
        const double cc = g_trace_cells["trace-" + rate + "-cache-central"].mean_boot;
        const double ns = g_trace_cells["trace-" + rate + "-nocache-swarm"].mean_boot;
        const double nc = g_trace_cells["trace-" + rate + "-nocache-central"].mean_boot;
        ok = ok && cs <= cc && cs <= ns;
        d << rate << "/h mean boot: cache+swarm " << cs << " s, cache+central " << cc
          << " s, nocache+swarm " << ns << " s, nocache+central " << nc << " s; ";
        // Reported, not asserted: the fine-grained cross ordering is
        // calibration-sensitive.
        d << "nocache+swarm " << (ns <= cc ? "<=" : ">") << " cache+central; ";
    }
    report(6, ok, "cache+swarm has the lowest mean boot time on both trace rates, 3 seeds each", d.str());
}

void criterion_7() {
    bool ok = true;
    std::ostringstream d;
    for (const std::string name :
         {"warmcache-1x192", "warmcache-2x96", "warmcache-4x48", "warmcache-8x24"}) {
        const auto r = run_scenario(load(name));
        const double all_ready = to_seconds(makespan(r.summary));
        ok = ok && all_ready < 45.0;
        d << name << " " << all_ready << " s; ";
    }
    report(7, ok, "every warm-cache batch is all-ready in under 45 s", d.str());
}

void criterion_8() {
    bool ok = true;
    std::string detail;

    // Range, endpoints, degenerate case.
    const auto n = normalize_weights({2.0, 10.0, 6.0, 4.0});
    double lo = 1e9, hi = -1e9;
    for (double v : n) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        if (v < 0.0 || v > 1.0) ok = false;
    }
    if (lo != 0.0 || hi != 1.0) ok = false;
    if (n[0] != 0.0 || n[1] != 1.0) ok = false;
    for (double v : normalize_weights({5.0, 5.0, 5.0})) {
        if (v != 0.0) ok = false;
    }
    if (!ok) detail = "range/endpoint/degenerate check failed";

    // Affine invariance of the selection distribution. Hosts 1 and 2 tie for
    // the best raw weight; selection frequencies under the raw and the
    // affine-transformed weights must agree within 3 sigma over 1e4 trials.
    const std::vector<double> raw{1.0, 5.0, 5.0, 3.0};
    std::vector<double> scaled;
    for (double v : raw) scaled.push_back(11.0 * v - 7.0);
    auto select = [](const std::vector<double>& weights, RngStream& rng) {
        const auto norm = normalize_weights(weights);
        double best = -1;
        std::vector<int> ties;
        for (int i = 0; i < static_cast<int>(norm.size()); ++i) {
            if (norm[i] > best) {
                best = norm[i];
                ties = {i};
            } else if (norm[i] == best) {
                ties.push_back(i);
            }
        }
        return ties[rng.next_below(ties.size())];
    };
    const int trials = 10000;
    std::map<int, int> freq_raw, freq_scaled;
    RngStream rng_a(7001, "affine-a"), rng_b(7002, "affine-b");
    for (int t = 0; t < trials; ++t) {
        ++freq_raw[select(raw, rng_a)];
        ++freq_scaled[select(scaled, rng_b)];
    }
    // Two-sample binomial, p = 1/2 between the tied hosts: sigma of the
    // difference is sqrt(2 * n * p * (1-p)) = 70.7.
    const double sigma = std::sqrt(2.0 * trials * 0.25);
    for (int host : {1, 2}) {
        const double dev = std::abs(freq_raw[host] - freq_scaled[host]);
        if (dev >= 3.0 * sigma) {
            ok = false;
            detail += "host " + std::to_string(host) + " deviation " +
                      std::to_string(dev) + "; ";
        }
    }
    if (freq_raw[0] + freq_scaled[0] + freq_raw[3] + freq_scaled[3] != 0) {
        ok = false;
        detail += "non-best host selected; ";
    }
    report(8, ok, "normalization range, endpoints, degenerate zeros and affine-invariant selection hold", detail);
}

void criterion_9() {
    ComputeNode node(0, 8, 16ll << 30, 2'000'000'000'000, 100'000'000);
    ImageSpec img{"img", 10'000'000'000, 32ll << 20, 0};
    Flavor f;
    f.vcpus = 1;
    f.ram_bytes = 2ll << 30;
    f.root_disk_bytes = 10'000'000'000;
    f.ephemeral_bytes = 80'000'000'000;
    const PhaseConstants c;
    const auto raw = boot_phase_durations(node, f, img, false, true, c);
    const auto cow = boot_phase_durations(node, f, img, true, true, c);
    const double raw_s = to_seconds(raw.duplication + raw.ephemeral);
    const double cow_s = to_seconds(cow.duplication + cow.ephemeral);
    const bool ok = cow_s < 0.1 * raw_s;
    std::ostringstream d;
    d << "cow " << cow_s << " s vs raw " << raw_s << " s";
    report(9, ok, "CoW duplication+ephemeral is under 10% of the raw-format time", d.str());
}

std::string run_and_export(const Scenario& s, const std::string& tag) {
    Simulation sim(s);
    const auto summary = sim.run();
    const std::string base = "/tmp/imgsim_acceptance_" + tag;
    export_summary(summary, base + "_summary.csv", "csv");
    export_vm_timelines(sim.recorder(), base + "_timelines.csv");
    export_decisions(sim.recorder(), base + "_decisions.csv");
    std::ostringstream all;
    for (const std::string suffix : {"_summary.csv", "_timelines.csv", "_decisions.csv"}) {
        std::ifstream in(base + suffix);
        all << in.rdbuf();
        std::remove((base + suffix).c_str());
    }
    return all.str();
}

void criterion_10() {
    const Scenario s = load("trace-80-cache-swarm");
    const std::string a = run_and_export(s, "det_a");
    const std::string b = run_and_export(s, "det_b");
    const bool ok = !a.empty() && a == b;
    report(10, ok, "identical seeds produce byte-identical metric exports",
           ok ? "" : "exports differ");
}

void criterion_11() {
    bool ok = true;
    std::ostringstream d;
    auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    for (const auto& [name, cell] : g_trace_cells) {
        for (const auto& samples : cell.boots) {
            if (samples.size() < 2) continue;
            const auto k = kde(samples);
            double trapz = 0;
            for (std::size_t i = 1; i < k.x.size(); ++i) {
                trapz += 0.5 * (k.density[i] + k.density[i - 1]) * (k.x[i] - k.x[i - 1]);
            }
            // The exported grid stops at min-3h / max+3h; the density's support
            // does not. The total integral is the in-grid trapezoid plus the
            // analytic Gaussian tail mass beyond the grid edges.
            double tail = 0;
            for (double s : samples) {
                tail += phi((k.x.front() - s) / k.bandwidth);
                tail += 1.0 - phi((k.x.back() - s) / k.bandwidth);
            }
            tail /= samples.size();
            const double integral = trapz + tail;
            if (std::abs(integral - 1.0) > 1e-3 ||
                std::abs(trapz - (1.0 - tail)) > 2e-4) {
                ok = false;
                d << name << " integral " << integral << " (grid " << trapz << " + tail "
                  << tail << "); ";
            }
        }
    }
    report(11, ok, "boot-time KDE density integrates to 1 +/- 1e-3 on every trace run", d.str());
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_scenario_dir = argv[1];
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criterion_4();
        criterion_5();
        criterion_6();
        criterion_7();
        criterion_8();
        criterion_9();
        criterion_10();
        criterion_11();
    } catch (const std::exception& e) {
        std::cout << "FAIL (exception): " << e.what() << "\n";
        return 1;
    }
    std::cout << (g_failures == 0 ? "all criteria passed"
                                  : std::to_string(g_failures) + " criteria failed")
              << "\n";
    return g_failures == 0 ? 0 : 1;
}
