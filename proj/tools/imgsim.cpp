#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "imgsim/metrics.hpp"
#include "imgsim/scenario.hpp"
#include "imgsim/simulation.hpp"

namespace fs = std::filesystem;
using namespace imgsim;

namespace {

constexpr const char* kVersion = "imgsim 0.1.0";
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int print_issues(const std::vector<ValidationIssue>& issues) {
    for (const auto& i : issues) {
        std::cerr << (i.error ? "error: " : "warning: ") << i.message << "\n";
    }
    return has_validation_errors(issues) ? kExitValidation : 0;
}

/// Runs one scenario and writes all exports into out_dir.
RunSummary execute_run(const Scenario& scenario, const fs::path& out_dir,
                       const std::string& format, bool event_log) {
    fs::create_directories(out_dir);
    Simulation sim(scenario);
    std::ofstream events;
    if (event_log) {
        events.open(out_dir / "events.csv");
        if (!events) throw std::runtime_error("cannot write event log");
        sim.set_event_log(&events);
    }
    const RunSummary summary = sim.run();

    nlohmann::ordered_json manifest;
    manifest["tool_version"] = kVersion;
    manifest["scenario_name"] = scenario.name;
    manifest["scenario_digest"] = scenario_digest(scenario);
    manifest["seed"] = scenario.seed;
    manifest["artifacts"] = {"summary." + format, "vm_timelines.csv", "decisions.csv",
                             "links.csv"};
    std::ofstream mf(out_dir / "manifest.json");
    mf << manifest.dump(2) << "\n";

    export_summary(summary, (out_dir / ("summary." + format)).string(), format);
    export_vm_timelines(sim.recorder(), (out_dir / "vm_timelines.csv").string());
    export_decisions(sim.recorder(), (out_dir / "decisions.csv").string());
    export_link_samples(sim.network(), (out_dir / "links.csv").string());

    const auto boots = sim.recorder().boot_times_seconds();
    if (boots.size() >= 2) {
        try {
            export_kde(kde(boots), (out_dir / "boot_kde.csv").string());
        } catch (const std::invalid_argument&) {
            // degenerate sample, no density export
        }
    }
    return summary;
}

void print_summary(const RunSummary& s) {
    std::cout << "vms: " << s.vm_active << " active, " << s.vm_failed << " failed of "
              << s.vm_total << "\n";
    std::cout << "end time: " << to_seconds(s.end_time) << " s\n";
    std::cout << "boot time: mean " << s.boot_mean_s << " s, median " << s.boot_median_s
              << " s, p95 " << s.boot_p95_s << " s\n";
    std::cout << "catalog egress: " << s.catalog_egress_bytes << " bytes\n";
    for (const auto& [name, g] : s.groups) {
        std::cout << "group " << name << ": first ready " << to_seconds(g.first_ready)
                  << " s, all ready " << to_seconds(g.all_ready) << " s (" << g.vm_count
                  << " VMs)\n";
    }
}

Scenario sweep_cell(Scenario base, const std::string& protocol,
                    const std::string& scheduler, std::uint64_t seed) {
    base.protocol.kind = protocol_kind_from_string(protocol);
    auto& ws = base.scheduler.weighers;
    if (scheduler == "nocache") {
        ws.erase(std::remove_if(ws.begin(), ws.end(),
                                [](const WeigherConfig& w) { return w.name == "cache"; }),
                 ws.end());
        if (ws.empty()) ws.push_back({"free_ram", 1.0});
    } else if (scheduler == "cache") {
        bool has = false;
        for (const auto& w : ws) has = has || w.name == "cache";
        if (!has) ws.insert(ws.begin(), {"cache", 16.0});
    } else {
        throw std::invalid_argument("scheduler axis value must be cache or nocache: " +
                                    scheduler);
    }
    base.seed = seed;
    base.seed_set = true;
    base.name += "/" + protocol + "-" + scheduler + "-s" + std::to_string(seed);
    return base;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IaaS image-deployment simulator"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string scenario_path, out_dir, format = "csv";
    bool event_log = false;
    std::int64_t seed_override = -1;

    auto* run = app.add_subcommand("run", "run one scenario");
    run->add_option("--scenario", scenario_path, "scenario file")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--seed", seed_override, "override scenario seed");
    run->add_option("--format", format, "summary format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    run->add_flag("--event-log", event_log, "dump per-event CSV log");

    std::string protocols_arg = "central,swarm", schedulers_arg = "cache,nocache",
                seeds_arg = "1,2,3";
    auto* sweep = app.add_subcommand("sweep", "run a protocol x scheduler x seed grid");
    sweep->add_option("--scenario", scenario_path, "base scenario file")->required();
    sweep->add_option("--out", out_dir, "output directory")->required();
    sweep->add_option("--protocols", protocols_arg, "comma list: central,swarm,shared");
    sweep->add_option("--schedulers", schedulers_arg, "comma list: cache,nocache");
    sweep->add_option("--seeds", seeds_arg, "comma list of seeds");

    auto* validate = app.add_subcommand("validate", "static scenario check");
    validate->add_option("--scenario", scenario_path, "scenario file")->required();

    double rate = 80.0, duration_s = 3600.0, zipf_s = 1.0;
    std::string images_arg, choice = "uniform", trace_out;
    std::uint64_t gen_seed = 1;
    Flavor gen_flavor;
    auto* gen = app.add_subcommand("gen-trace", "generate a Poisson arrival trace");
    gen->add_option("--rate", rate, "VMs per hour")->required();
    gen->add_option("--duration", duration_s, "trace duration, seconds");
    gen->add_option("--images", images_arg, "comma list of image ids")->required();
    gen->add_option("--choice", choice, "uniform or zipf")
        ->check(CLI::IsMember({"uniform", "zipf"}));
    gen->add_option("--zipf-s", zipf_s, "zipf exponent");
    gen->add_option("--seed", gen_seed, "rng seed")->required();
    gen->add_option("--out", trace_out, "trace CSV path")->required();
    gen->add_option("--vcpus", gen_flavor.vcpus, "flavor vcpus");
    gen->add_option("--ram-bytes", gen_flavor.ram_bytes, "flavor ram");
    gen->add_option("--root-bytes", gen_flavor.root_disk_bytes, "flavor root disk");
    gen->add_option("--ephemeral-bytes", gen_flavor.ephemeral_bytes, "flavor ephemeral");

    std::string run_dir;
    auto* report = app.add_subcommand("report", "print the summary of a finished run");
    report->add_option("--run", run_dir, "run output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            Scenario s = load_scenario(scenario_path);
            if (seed_override >= 0) {
                s.seed = static_cast<std::uint64_t>(seed_override);
                s.seed_set = true;
            }
            const auto issues = validate_scenario(s);
            if (int rc = print_issues(issues); rc != 0) return rc;
            print_summary(execute_run(s, out_dir, format, event_log));
            return 0;
        }
        if (sweep->parsed()) {
            Scenario base = load_scenario(scenario_path);
            const auto issues = validate_scenario(base);
            if (int rc = print_issues(issues); rc != 0) return rc;
            const auto protocols = split_csv(protocols_arg);
            const auto schedulers = split_csv(schedulers_arg);
            const auto seeds = split_csv(seeds_arg);
            if (protocols.empty() || schedulers.empty() || seeds.empty()) {
                std::cerr << "error: sweep axes must be non-empty\n";
                return kExitValidation;
            }
            for (const auto* axis : {&protocols, &schedulers, &seeds}) {
                if (std::set<std::string>(axis->begin(), axis->end()).size() !=
                    axis->size()) {
                    std::cerr << "error: duplicate axis values\n";
                    return kExitValidation;
                }
            }
            fs::create_directories(out_dir);
            std::ofstream cells(fs::path(out_dir) / "sweep.csv");
            cells << "protocol,scheduler,seed,vm_active,vm_failed,boot_mean_s,end_time_s,"
                     "catalog_egress_bytes\n";
            struct Agg {
                std::vector<double> boot_means, end_times;
            };
            std::map<std::pair<std::string, std::string>, Agg> agg;
            for (const auto& p : protocols) {
                for (const auto& sch : schedulers) {
                    for (const auto& seed_str : seeds) {
                        const std::uint64_t seed = std::stoull(seed_str);
                        Scenario cell = sweep_cell(base, p, sch, seed);
                        const fs::path dir =
                            fs::path(out_dir) / (p + "-" + sch + "-s" + seed_str);
                        const RunSummary s = execute_run(cell, dir, "csv", false);
                        char line[256];
                        std::snprintf(line, sizeof line, "%s,%s,%s,%d,%d,%.6f,%.6f,%lld",
                                      p.c_str(), sch.c_str(), seed_str.c_str(),
                                      s.vm_active, s.vm_failed, s.boot_mean_s,
                                      to_seconds(s.end_time),
                                      static_cast<long long>(s.catalog_egress_bytes));
                        cells << line << "\n";
                        auto& a = agg[{p, sch}];
                        a.boot_means.push_back(s.boot_mean_s);
                        a.end_times.push_back(to_seconds(s.end_time));
                    }
                }
            }
            std::ofstream af(fs::path(out_dir) / "sweep_agg.csv");
            af << "protocol,scheduler,runs,boot_mean_s,boot_mean_spread_s,end_time_s,"
                  "end_time_spread_s\n";
            for (const auto& [key, a] : agg) {
                auto stats = [](const std::vector<double>& v) {
                    double mean = 0, lo = v[0], hi = v[0];
                    for (double x : v) {
                        mean += x;
                        lo = std::min(lo, x);
                        hi = std::max(hi, x);
                    }
                    return std::make_pair(mean / v.size(), hi - lo);
                };
                const auto [bm, bs] = stats(a.boot_means);
                const auto [em, es] = stats(a.end_times);
                char line[256];
                std::snprintf(line, sizeof line, "%s,%s,%zu,%.6f,%.6f,%.6f,%.6f",
                              key.first.c_str(), key.second.c_str(),
                              a.boot_means.size(), bm, bs, em, es);
                af << line << "\n";
            }
            return 0;
        }
        if (validate->parsed()) {
            const Scenario s = load_scenario(scenario_path);
            const auto issues = validate_scenario(s);
            if (issues.empty()) std::cout << "ok\n";
            return print_issues(issues);
        }
        if (gen->parsed()) {
            TraceSpec spec;
            spec.rate_per_hour = rate;
            spec.duration = from_seconds(duration_s);
            spec.image_pool = split_csv(images_arg);
            spec.choice = choice == "zipf" ? ImageChoice::Zipf : ImageChoice::Uniform;
            spec.zipf_s = zipf_s;
            RngStream arrivals(gen_seed, "arrivals");
            RngStream image_choice(gen_seed, "image-choice");
            const Trace t = generate_poisson_trace(spec, gen_flavor, arrivals, image_choice);
            save_trace(t, trace_out);
            std::cout << t.requests.size() << " requests written to " << trace_out << "\n";
            return 0;
        }
        if (report->parsed()) {
            std::ifstream in(fs::path(run_dir) / "summary.json");
            if (!in) {
                std::ifstream csv(fs::path(run_dir) / "summary.csv");
                if (!csv) throw std::runtime_error("no summary found in " + run_dir);
                std::cout << csv.rdbuf();
                return 0;
            }
            nlohmann::json j;
            in >> j;
            std::cout << j.dump(2) << "\n";
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
