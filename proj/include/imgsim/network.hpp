#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "imgsim/engine.hpp"
#include "imgsim/time.hpp"

namespace imgsim {

// Rates and in-flight byte counts are fixed-point: micro-bytes per second and
// micro-bytes. 1 Gbit/s = 125e6 B/s = 1.25e14 uBps, well inside int64.
using RateUbps = std::int64_t;
using MicroBytes = std::int64_t;

inline constexpr std::int64_t kMicroPerUnit = 1'000'000;

/// Max-min fair allocation by progressive filling. capacity_ubps[l] is the
/// capacity of directed link l; flow_paths[f] lists the directed links flow f
/// traverses. Per-stage increments are floored to 1 uB/s, so the result is
/// exact integer arithmetic: raise all unfrozen flows by
/// min_l floor(residual_l / unfrozen_count_l), freeze flows on links whose
/// residual drops below their unfrozen count, repeat.
std::vector<RateUbps> max_min_rates(const std::vector<RateUbps>& capacity_ubps,
                                    const std::vector<std::vector<int>>& flow_paths);

using Endpoint = int;  // 0..node_count-1 are compute nodes; node_count is the catalog

struct TopologyConfig {
    int node_count = 24;
    int switch_groups = 2;
    std::int64_t node_nic_bytes_per_s = 125'000'000;     // 1 Gbit/s
    std::int64_t catalog_nic_bytes_per_s = 125'000'000;  // 1 Gbit/s
    std::int64_t trunk_bytes_per_s = 1'250'000'000;      // 10 Gbit/s
};

/// Static routes over a two-tier topology: endpoints hang off switch groups
/// that are joined pairwise by a non-blocking fabric except a declared trunk.
/// Directed links: per-endpoint up (egress) and down (ingress), plus one trunk
/// direction per ordered group pair.
class Topology {
public:
    explicit Topology(const TopologyConfig& cfg);

    int node_count() const { return cfg_.node_count; }
    Endpoint catalog() const { return cfg_.node_count; }
    int link_count() const { return static_cast<int>(capacity_ubps_.size()); }

    const std::vector<RateUbps>& capacities_ubps() const { return capacity_ubps_; }
    const std::string& link_name(int link) const { return link_names_[link]; }

    int up_link(Endpoint e) const { return 2 * e; }
    int down_link(Endpoint e) const { return 2 * e + 1; }

    /// Directed link sequence from src to dst. Throws if src == dst.
    std::vector<int> route(Endpoint src, Endpoint dst) const;

private:
    int group_of(Endpoint e) const;

    TopologyConfig cfg_;
    std::vector<RateUbps> capacity_ubps_;
    std::vector<std::string> link_names_;
    // trunk link ids per ordered group pair (g_from, g_to)
    std::map<std::pair<int, int>, int> trunk_;
};

using FlowId = std::uint64_t;

struct LinkSample {
    SimTime time;
    int link;
    RateUbps total_rate_ubps;
};

/// Fluid-flow network: piecewise-constant max-min fair rates, recomputed only
/// when a flow starts or completes, so completion times are exact.
class FlowNetwork {
public:
    using CompletionCallback = std::function<void(FlowId)>;

    FlowNetwork(Engine& engine, Topology topology);

    FlowId start_flow(Endpoint src, Endpoint dst, std::int64_t bytes,
                      CompletionCallback on_complete);

    const Topology& topology() const { return topo_; }
    std::size_t active_flow_count() const { return flows_.size(); }
    RateUbps flow_rate_ubps(FlowId id) const;

    // Byte accounting, exact.
    const std::vector<std::int64_t>& link_delivered_micro_bytes() const {
        return link_delivered_ub_;
    }
    std::int64_t link_delivered_bytes(int link) const {
        return link_delivered_ub_[link] / kMicroPerUnit;
    }
    std::int64_t endpoint_egress_bytes(Endpoint e) const {
        return link_delivered_bytes(topo_.up_link(e));
    }
    MicroBytes total_injected_ub() const { return injected_ub_; }
    MicroBytes total_delivered_ub() const { return delivered_ub_; }
    MicroBytes total_remaining_ub() const;

    /// Utilization samples, recorded whenever a link's aggregate rate changes.
    const std::vector<LinkSample>& link_samples() const { return samples_; }
    void set_sampling(bool enabled) { sampling_ = enabled; }

private:
    struct Flow {
        FlowId id;
        std::vector<int> path;
        MicroBytes remaining_ub;
        RateUbps rate_ubps = 0;
        std::uint64_t generation = 0;
        CompletionCallback on_complete;
    };

    void advance_to_now();
    void recompute_and_reschedule();
    void complete_flow(FlowId id, std::uint64_t generation);

    Engine& engine_;
    Topology topo_;
    FlowId next_id_ = 1;
    std::map<FlowId, Flow> flows_;  // ordered for deterministic iteration
    SimTime last_advance_ = 0;
    MicroBytes injected_ub_ = 0;
    MicroBytes delivered_ub_ = 0;
    std::vector<std::int64_t> link_delivered_ub_;
    std::vector<RateUbps> link_rate_ubps_;
    std::vector<LinkSample> samples_;
    bool sampling_ = true;
};

}  // namespace imgsim
