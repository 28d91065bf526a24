#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imgsim/domain.hpp"
#include "imgsim/network.hpp"
#include "imgsim/prefetch.hpp"
#include "imgsim/scheduler.hpp"
#include "imgsim/transfer.hpp"
#include "imgsim/workload.hpp"

namespace imgsim {

struct NodeHardware {
    int vcpus = 8;
    std::int64_t ram_bytes = 16ll << 30;
    std::int64_t disk_bytes = 140'000'000'000;
    std::int64_t disk_bandwidth_bytes_per_s = 100'000'000;
};

struct WorkloadConfig {
    enum class Kind { Batch, Poisson, TraceFile } kind = Kind::Batch;
    BatchSpec batch;
    TraceSpec trace;
    std::string trace_path;
};

struct ScenarioImage {
    std::string id;
    std::int64_t size_bytes = 5'000'000'000;
    std::int64_t piece_size_bytes = 32ll * 1024 * 1024;
};

/// One file = one reproducible run.
struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    bool seed_set = false;
    TopologyConfig topology;
    NodeHardware node;
    std::vector<ScenarioImage> images;
    ProtocolConfig protocol;
    SchedulerConfig scheduler;
    PhaseConstants phases;
    bool cow = true;
    bool pre_cache_all = false;
    Flavor flavor;  // used by generated workloads
    WorkloadConfig workload;
    PrefetchPolicy prefetch;
    std::string popularity_seed_path;  // optional CSV: image_id,count
};

struct ValidationIssue {
    bool error;  // false = warning
    std::string message;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::string& path);
std::vector<ValidationIssue> validate_scenario(const Scenario& s);
bool has_validation_errors(const std::vector<ValidationIssue>& issues);

/// Digest of the canonical serialization; changes iff scenario content changes.
std::uint64_t scenario_digest(const Scenario& s);

}  // namespace imgsim
