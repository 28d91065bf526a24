#include "imgsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace imgsim {

namespace {

template <typename T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void get_time_if(const nlohmann::json& j, const char* key, SimTime& out) {
    if (j.contains(key)) out = from_seconds(j.at(key).get<double>());
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
    throw std::invalid_argument("scenario." + key + ": " + what);
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    get_if(j, "name", s.name);
    if (j.contains("seed")) {
        s.seed = j.at("seed").get<std::uint64_t>();
        s.seed_set = true;
    }
    if (j.contains("topology")) {
        const auto& t = j.at("topology");
        get_if(t, "node_count", s.topology.node_count);
        get_if(t, "switch_groups", s.topology.switch_groups);
        get_if(t, "node_nic_bytes_per_s", s.topology.node_nic_bytes_per_s);
        get_if(t, "catalog_nic_bytes_per_s", s.topology.catalog_nic_bytes_per_s);
        get_if(t, "trunk_bytes_per_s", s.topology.trunk_bytes_per_s);
    }
    if (j.contains("node")) {
        const auto& n = j.at("node");
        get_if(n, "vcpus", s.node.vcpus);
        get_if(n, "ram_bytes", s.node.ram_bytes);
        get_if(n, "disk_bytes", s.node.disk_bytes);
        get_if(n, "disk_bandwidth_bytes_per_s", s.node.disk_bandwidth_bytes_per_s);
    }
    if (j.contains("images")) {
        for (const auto& ji : j.at("images")) {
            ScenarioImage img;
            img.id = ji.at("id").get<std::string>();
            get_if(ji, "size_bytes", img.size_bytes);
            get_if(ji, "piece_size_bytes", img.piece_size_bytes);
            s.images.push_back(std::move(img));
        }
    }
    if (j.contains("protocol")) {
        const auto& p = j.at("protocol");
        if (p.contains("kind"))
            s.protocol.kind = protocol_kind_from_string(p.at("kind").get<std::string>());
        get_if(p, "label", s.protocol.label);
        get_if(p, "max_active_image_downloads_per_node",
               s.protocol.max_active_image_downloads_per_node);
        get_if(p, "max_concurrent_uploads_per_peer",
               s.protocol.max_concurrent_uploads_per_peer);
        get_if(p, "piece_parallelism", s.protocol.piece_parallelism);
        get_time_if(p, "publish_delay_seconds", s.protocol.publish_delay);
        get_if(p, "cache_budget_bytes", s.protocol.cache_budget_bytes);
    }
    if (j.contains("scheduler")) {
        const auto& c = j.at("scheduler");
        if (c.contains("weighers")) {
            s.scheduler.weighers.clear();
            for (const auto& w : c.at("weighers")) {
                s.scheduler.weighers.push_back(
                    {w.at("name").get<std::string>(), w.at("multiplier").get<double>()});
            }
        }
        get_if(c, "count_inflight_as_cached", s.scheduler.count_inflight_as_cached);
    }
    if (j.contains("phases")) {
        const auto& p = j.at("phases");
        get_time_if(p, "claim_seconds", s.phases.claim);
        get_time_if(p, "cow_seconds", s.phases.cow);
        get_time_if(p, "resize_seconds", s.phases.resize);
        get_time_if(p, "inject_seconds", s.phases.inject);
        get_time_if(p, "net_seconds", s.phases.net);
    }
    get_if(j, "cow", s.cow);
    get_if(j, "pre_cache_all", s.pre_cache_all);
    if (j.contains("flavor")) {
        const auto& f = j.at("flavor");
        get_if(f, "vcpus", s.flavor.vcpus);
        get_if(f, "ram_bytes", s.flavor.ram_bytes);
        get_if(f, "root_disk_bytes", s.flavor.root_disk_bytes);
        get_if(f, "ephemeral_bytes", s.flavor.ephemeral_bytes);
    }
    if (j.contains("workload")) {
        const auto& w = j.at("workload");
        const std::string kind = w.at("kind").get<std::string>();
        if (kind == "batch") {
            s.workload.kind = WorkloadConfig::Kind::Batch;
            for (const auto& g : w.at("groups")) {
                s.workload.batch.groups.emplace_back(g.at(0).get<std::string>(),
                                                     g.at(1).get<int>());
            }
        } else if (kind == "poisson") {
            s.workload.kind = WorkloadConfig::Kind::Poisson;
            get_if(w, "rate_per_hour", s.workload.trace.rate_per_hour);
            get_time_if(w, "duration_seconds", s.workload.trace.duration);
            if (w.contains("images"))
                s.workload.trace.image_pool =
                    w.at("images").get<std::vector<std::string>>();
            if (w.contains("choice")) {
                const std::string c = w.at("choice").get<std::string>();
                if (c == "uniform")
                    s.workload.trace.choice = ImageChoice::Uniform;
                else if (c == "zipf")
                    s.workload.trace.choice = ImageChoice::Zipf;
                else
                    bad("workload.choice", "must be uniform or zipf");
            }
            get_if(w, "zipf_s", s.workload.trace.zipf_s);
        } else if (kind == "trace") {
            s.workload.kind = WorkloadConfig::Kind::TraceFile;
            s.workload.trace_path = w.at("path").get<std::string>();
        } else {
            bad("workload.kind", "must be batch, poisson or trace");
        }
    }
    if (j.contains("prefetch")) {
        const auto& p = j.at("prefetch");
        if (p.contains("kind"))
            s.prefetch.kind = prefetch_kind_from_string(p.at("kind").get<std::string>());
        get_if(p, "k", s.prefetch.k);
        get_if(p, "node_fraction", s.prefetch.node_fraction);
        get_time_if(p, "period_seconds", s.prefetch.period);
    }
    get_if(j, "popularity_seed_path", s.popularity_seed_path);
    return s;
}

nlohmann::ordered_json scenario_to_json(const Scenario& s) {
    nlohmann::ordered_json j;
    j["name"] = s.name;
    if (s.seed_set) j["seed"] = s.seed;
    j["topology"] = {{"node_count", s.topology.node_count},
                     {"switch_groups", s.topology.switch_groups},
                     {"node_nic_bytes_per_s", s.topology.node_nic_bytes_per_s},
                     {"catalog_nic_bytes_per_s", s.topology.catalog_nic_bytes_per_s},
                     {"trunk_bytes_per_s", s.topology.trunk_bytes_per_s}};
    j["node"] = {{"vcpus", s.node.vcpus},
                 {"ram_bytes", s.node.ram_bytes},
                 {"disk_bytes", s.node.disk_bytes},
                 {"disk_bandwidth_bytes_per_s", s.node.disk_bandwidth_bytes_per_s}};
    nlohmann::ordered_json images = nlohmann::ordered_json::array();
    for (const auto& img : s.images) {
        images.push_back({{"id", img.id},
                          {"size_bytes", img.size_bytes},
                          {"piece_size_bytes", img.piece_size_bytes}});
    }
    j["images"] = images;
    j["protocol"] = {
        {"kind", protocol_kind_name(s.protocol.kind)},
        {"label", s.protocol.label},
        {"max_active_image_downloads_per_node",
         s.protocol.max_active_image_downloads_per_node},
        {"max_concurrent_uploads_per_peer", s.protocol.max_concurrent_uploads_per_peer},
        {"piece_parallelism", s.protocol.piece_parallelism},
        {"publish_delay_seconds", to_seconds(s.protocol.publish_delay)},
        {"cache_budget_bytes", s.protocol.cache_budget_bytes}};
    nlohmann::ordered_json weighers = nlohmann::ordered_json::array();
    for (const auto& w : s.scheduler.weighers) {
        weighers.push_back({{"name", w.name}, {"multiplier", w.multiplier}});
    }
    j["scheduler"] = {{"weighers", weighers},
                      {"count_inflight_as_cached", s.scheduler.count_inflight_as_cached}};
    j["phases"] = {{"claim_seconds", to_seconds(s.phases.claim)},
                   {"cow_seconds", to_seconds(s.phases.cow)},
                   {"resize_seconds", to_seconds(s.phases.resize)},
                   {"inject_seconds", to_seconds(s.phases.inject)},
                   {"net_seconds", to_seconds(s.phases.net)}};
    j["cow"] = s.cow;
    j["pre_cache_all"] = s.pre_cache_all;
    j["flavor"] = {{"vcpus", s.flavor.vcpus},
                   {"ram_bytes", s.flavor.ram_bytes},
                   {"root_disk_bytes", s.flavor.root_disk_bytes},
                   {"ephemeral_bytes", s.flavor.ephemeral_bytes}};
    nlohmann::ordered_json w;
    switch (s.workload.kind) {
        case WorkloadConfig::Kind::Batch: {
            w["kind"] = "batch";
            nlohmann::ordered_json groups = nlohmann::ordered_json::array();
            for (const auto& [img, n] : s.workload.batch.groups) {
                groups.push_back({img, n});
            }
            w["groups"] = groups;
            break;
        }
        case WorkloadConfig::Kind::Poisson:
            w["kind"] = "poisson";
            w["rate_per_hour"] = s.workload.trace.rate_per_hour;
            w["duration_seconds"] = to_seconds(s.workload.trace.duration);
            w["images"] = s.workload.trace.image_pool;
            w["choice"] =
                s.workload.trace.choice == ImageChoice::Uniform ? "uniform" : "zipf";
            w["zipf_s"] = s.workload.trace.zipf_s;
            break;
        case WorkloadConfig::Kind::TraceFile:
            w["kind"] = "trace";
            w["path"] = s.workload.trace_path;
            break;
    }
    j["workload"] = w;
    j["prefetch"] = {{"kind", prefetch_kind_name(s.prefetch.kind)},
                     {"k", s.prefetch.k},
                     {"node_fraction", s.prefetch.node_fraction},
                     {"period_seconds", to_seconds(s.prefetch.period)}};
    j["popularity_seed_path"] = s.popularity_seed_path;
    return j;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return scenario_from_json(j);
}

std::vector<ValidationIssue> validate_scenario(const Scenario& s) {
    std::vector<ValidationIssue> issues;
    auto error = [&](const std::string& m) { issues.push_back({true, m}); };
    auto warn = [&](const std::string& m) { issues.push_back({false, m}); };

    if (!s.seed_set) error("seed: mandatory, not set");
    if (s.topology.node_count < 1) error("topology.node_count: must be >= 1");
    if (s.topology.node_nic_bytes_per_s <= 0)
        error("topology.node_nic_bytes_per_s: must be positive");
    if (s.topology.catalog_nic_bytes_per_s <= 0)
        error("topology.catalog_nic_bytes_per_s: must be positive");
    if (s.topology.trunk_bytes_per_s <= 0)
        error("topology.trunk_bytes_per_s: must be positive");
    if (s.node.vcpus <= 0) error("node.vcpus: must be positive");
    if (s.node.ram_bytes <= 0) error("node.ram_bytes: must be positive");
    if (s.node.disk_bytes <= 0) error("node.disk_bytes: must be positive");
    if (s.node.disk_bandwidth_bytes_per_s <= 0)
        error("node.disk_bandwidth_bytes_per_s: must be positive");
    if (s.images.empty()) error("images: at least one image required");

    std::set<std::string> ids;
    for (const auto& img : s.images) {
        if (img.size_bytes <= 0) error("images." + img.id + ".size_bytes: must be positive");
        if (img.piece_size_bytes <= 0)
            error("images." + img.id + ".piece_size_bytes: must be positive");
        if (!ids.insert(img.id).second) error("images." + img.id + ": duplicate id");
    }
    auto check_image_ref = [&](const std::string& key, const std::string& id) {
        if (!ids.count(id)) error(key + ": image '" + id + "' is not defined");
    };

    if (s.protocol.max_active_image_downloads_per_node <= 0)
        error("protocol.max_active_image_downloads_per_node: must be positive");
    if (s.protocol.max_concurrent_uploads_per_peer <= 0)
        error("protocol.max_concurrent_uploads_per_peer: must be positive");
    if (s.protocol.piece_parallelism <= 0)
        error("protocol.piece_parallelism: must be positive");
    if (s.protocol.cache_budget_bytes < 0)
        error("protocol.cache_budget_bytes: must be >= 0");

    if (s.scheduler.weighers.empty()) error("scheduler.weighers: at least one required");
    for (const auto& w : s.scheduler.weighers) {
        if (w.name != "cache" && w.name != "free_ram" && w.name != "free_disk" &&
            w.name != "free_vcpus")
            error("scheduler.weighers." + w.name + ": unknown weigher");
        if (!std::isfinite(w.multiplier))
            error("scheduler.weighers." + w.name + ".multiplier: must be finite");
    }

    if (!s.flavor.valid()) error("flavor: fields must be positive (ephemeral >= 0)");
    for (const auto& img : s.images) {
        if (s.flavor.root_disk_bytes < img.size_bytes)
            warn("flavor.root_disk_bytes: smaller than image " + img.id +
                 " (root disk is resized to at least the image size)");
    }

    int total_vms = 0;
    switch (s.workload.kind) {
        case WorkloadConfig::Kind::Batch:
            if (s.workload.batch.groups.empty()) warn("workload.groups: empty batch");
            for (const auto& [img, n] : s.workload.batch.groups) {
                check_image_ref("workload.groups", img);
                if (n < 0) error("workload.groups: negative vm count");
                total_vms += n;
            }
            break;
        case WorkloadConfig::Kind::Poisson:
            if (s.workload.trace.rate_per_hour <= 0)
                error("workload.rate_per_hour: must be positive");
            if (s.workload.trace.duration <= 0)
                error("workload.duration_seconds: must be positive");
            if (s.workload.trace.image_pool.empty())
                error("workload.images: pool must be non-empty");
            for (const auto& img : s.workload.trace.image_pool)
                check_image_ref("workload.images", img);
            if (s.workload.trace.zipf_s < 0) error("workload.zipf_s: must be >= 0");
            total_vms = static_cast<int>(s.workload.trace.rate_per_hour *
                                         to_seconds(s.workload.trace.duration) / 3600.0);
            break;
        case WorkloadConfig::Kind::TraceFile:
            if (s.workload.trace_path.empty()) error("workload.path: required");
            break;
    }

    if (s.prefetch.kind == PrefetchKind::TopK) {
        if (s.prefetch.k < 1) error("prefetch.k: must be >= 1");
        if (s.prefetch.node_fraction <= 0 || s.prefetch.node_fraction > 1)
            error("prefetch.node_fraction: must be in (0, 1]");
        if (s.prefetch.period <= 0) error("prefetch.period_seconds: must be positive");
    }

    // Capacity sanity: can the cluster hold the expected VM count at all?
    if (total_vms > 0) {
        const std::int64_t cap_by_vcpu =
            static_cast<std::int64_t>(s.topology.node_count) *
            (s.node.vcpus / std::max(1, s.flavor.vcpus));
        const std::int64_t cap_by_ram =
            static_cast<std::int64_t>(s.topology.node_count) *
            (s.node.ram_bytes / s.flavor.ram_bytes);
        if (total_vms > cap_by_vcpu)
            warn("workload: " + std::to_string(total_vms) + " VMs exceed vCPU capacity of " +
                 std::to_string(cap_by_vcpu) + " (" + std::to_string(s.node.vcpus) +
                 " cores/host)");
        if (total_vms > cap_by_ram)
            warn("workload: " + std::to_string(total_vms) + " VMs exceed RAM capacity of " +
                 std::to_string(cap_by_ram));
    }
    return issues;
}

bool has_validation_errors(const std::vector<ValidationIssue>& issues) {
    for (const auto& i : issues) {
        if (i.error) return true;
    }
    return false;
}

std::uint64_t scenario_digest(const Scenario& s) {
    const std::string canon = scenario_to_json(s).dump();
    std::uint64_t h = 14695981039346656037ull;
    for (char c : canon) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace imgsim
