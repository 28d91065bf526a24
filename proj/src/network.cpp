#include "imgsim/network.hpp"

#include <algorithm>
#include <stdexcept>

namespace imgsim {

std::vector<RateUbps> max_min_rates(const std::vector<RateUbps>& capacity_ubps,
                                    const std::vector<std::vector<int>>& flow_paths) {
    const std::size_t n_links = capacity_ubps.size();
    const std::size_t n_flows = flow_paths.size();
    std::vector<RateUbps> rates(n_flows, 0);
    std::vector<RateUbps> residual = capacity_ubps;
    std::vector<std::int64_t> count(n_links, 0);
    std::vector<bool> frozen(n_flows, false);

    for (const auto& path : flow_paths) {
        if (path.empty()) throw std::invalid_argument("max_min_rates: empty path");
        for (int l : path) {
            if (l < 0 || static_cast<std::size_t>(l) >= n_links)
                throw std::out_of_range("max_min_rates: bad link id");
        }
    }
    for (std::size_t f = 0; f < n_flows; ++f)
        for (int l : flow_paths[f]) ++count[l];

    std::size_t unfrozen = n_flows;
    while (unfrozen > 0) {
        // Bottleneck increment: smallest equal share any traversed link allows.
        RateUbps delta = INT64_MAX;
        for (std::size_t l = 0; l < n_links; ++l) {
            if (count[l] > 0) delta = std::min(delta, residual[l] / count[l]);
        }
        if (delta > 0) {
            for (std::size_t f = 0; f < n_flows; ++f) {
                if (!frozen[f]) rates[f] += delta;
            }
            for (std::size_t l = 0; l < n_links; ++l) {
                residual[l] -= delta * count[l];
            }
        }
        // Freeze flows on saturated links (no whole uB/s of headroom left
        // per unfrozen flow).
        for (std::size_t f = 0; f < n_flows; ++f) {
            if (frozen[f]) continue;
            bool saturated = false;
            for (int l : flow_paths[f]) {
                if (residual[l] < count[l]) {
                    saturated = true;
                    break;
                }
            }
            if (saturated) {
                frozen[f] = true;
                --unfrozen;
                for (int l : flow_paths[f]) --count[l];
            }
        }
    }
    return rates;
}

Topology::Topology(const TopologyConfig& cfg) : cfg_(cfg) {
    if (cfg.node_count < 1) throw std::invalid_argument("topology: node_count < 1");
    if (cfg.switch_groups < 1) throw std::invalid_argument("topology: groups < 1");
    if (cfg.node_nic_bytes_per_s <= 0 || cfg.catalog_nic_bytes_per_s <= 0 ||
        cfg.trunk_bytes_per_s <= 0)
        throw std::invalid_argument("topology: non-positive capacity");

    const int endpoints = cfg.node_count + 1;
    for (int e = 0; e < endpoints; ++e) {
        std::int64_t bps =
            (e == cfg.node_count) ? cfg.catalog_nic_bytes_per_s : cfg.node_nic_bytes_per_s;
        std::string base = (e == cfg.node_count) ? "catalog" : "node" + std::to_string(e);
        capacity_ubps_.push_back(bps * kMicroPerUnit);
        link_names_.push_back(base + ".up");
        capacity_ubps_.push_back(bps * kMicroPerUnit);
        link_names_.push_back(base + ".down");
    }
    for (int a = 0; a < cfg.switch_groups; ++a) {
        for (int b = 0; b < cfg.switch_groups; ++b) {
            if (a == b) continue;
            trunk_[{a, b}] = static_cast<int>(capacity_ubps_.size());
            capacity_ubps_.push_back(cfg.trunk_bytes_per_s * kMicroPerUnit);
            link_names_.push_back("trunk" + std::to_string(a) + "to" + std::to_string(b));
        }
    }
}

int Topology::group_of(Endpoint e) const {
    if (e == cfg_.node_count) return 0;  // catalog sits in the first group
    return e % cfg_.switch_groups;
}

std::vector<int> Topology::route(Endpoint src, Endpoint dst) const {
    if (src == dst) throw std::invalid_argument("route: src == dst");
    if (src < 0 || src > cfg_.node_count || dst < 0 || dst > cfg_.node_count)
        throw std::out_of_range("route: unknown endpoint");
    std::vector<int> path{up_link(src)};
    int gs = group_of(src), gd = group_of(dst);
    if (gs != gd) path.push_back(trunk_.at({gs, gd}));
    path.push_back(down_link(dst));
    return path;
}

FlowNetwork::FlowNetwork(Engine& engine, Topology topology)
    : engine_(engine),
      topo_(std::move(topology)),
      link_delivered_ub_(topo_.link_count(), 0),
      link_rate_ubps_(topo_.link_count(), 0) {}

RateUbps FlowNetwork::flow_rate_ubps(FlowId id) const {
    auto it = flows_.find(id);
    if (it == flows_.end()) throw std::out_of_range("flow_rate: unknown flow");
    return it->second.rate_ubps;
}

MicroBytes FlowNetwork::total_remaining_ub() const {
    MicroBytes r = 0;
    for (const auto& [id, f] : flows_) r += f.remaining_ub;
    return r;
}

FlowId FlowNetwork::start_flow(Endpoint src, Endpoint dst, std::int64_t bytes,
                               CompletionCallback on_complete) {
    if (bytes <= 0) throw std::invalid_argument("start_flow: bytes must be positive");
    advance_to_now();
    FlowId id = next_id_++;
    Flow f;
    f.id = id;
    f.path = topo_.route(src, dst);
    f.remaining_ub = bytes * kMicroPerUnit;
    f.on_complete = std::move(on_complete);
    injected_ub_ += f.remaining_ub;
    flows_.emplace(id, std::move(f));
    recompute_and_reschedule();
    return id;
}

void FlowNetwork::advance_to_now() {
    const SimTime now = engine_.now();
    const SimTime elapsed = now - last_advance_;
    last_advance_ = now;
    if (elapsed == 0) return;
    for (auto& [id, f] : flows_) {
        if (f.rate_ubps == 0) continue;
        MicroBytes moved = static_cast<MicroBytes>(
            static_cast<__int128>(f.rate_ubps) * elapsed / kMicrosPerSecond);
        moved = std::min(moved, f.remaining_ub);
        f.remaining_ub -= moved;
        delivered_ub_ += moved;
        for (int l : f.path) link_delivered_ub_[l] += moved;
    }
}

void FlowNetwork::recompute_and_reschedule() {
    std::vector<FlowId> ids;
    std::vector<std::vector<int>> paths;
    ids.reserve(flows_.size());
    for (const auto& [id, f] : flows_) {
        ids.push_back(id);
        paths.push_back(f.path);
    }
    const auto rates = max_min_rates(topo_.capacities_ubps(), paths);

    std::vector<RateUbps> link_rates(topo_.link_count(), 0);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        Flow& f = flows_.at(ids[i]);
        for (int l : f.path) link_rates[l] += rates[i];
        if (rates[i] == f.rate_ubps) continue;
        f.rate_ubps = rates[i];
        const std::uint64_t gen = ++f.generation;
        if (f.rate_ubps > 0) {
            // ceil(remaining / rate) in whole microseconds
            const __int128 num =
                static_cast<__int128>(f.remaining_ub) * kMicrosPerSecond;
            const SimTime dt = static_cast<SimTime>(
                (num + f.rate_ubps - 1) / f.rate_ubps);
            const FlowId fid = f.id;
            engine_.schedule(engine_.now() + dt, EventKind::FlowComplete,
                             "flow" + std::to_string(fid),
                             [this, fid, gen] { complete_flow(fid, gen); });
        }
    }
    if (sampling_) {
        for (int l = 0; l < topo_.link_count(); ++l) {
            if (link_rates[l] != link_rate_ubps_[l]) {
                samples_.push_back({engine_.now(), l, link_rates[l]});
            }
        }
    }
    link_rate_ubps_ = std::move(link_rates);
}

void FlowNetwork::complete_flow(FlowId id, std::uint64_t generation) {
    auto it = flows_.find(id);
    if (it == flows_.end() || it->second.generation != generation) return;  // stale
    advance_to_now();
    Flow f = std::move(it->second);
    // Completion was scheduled at the ceiling microsecond; whatever residual
    // the floor-advance left is delivered now.
    delivered_ub_ += f.remaining_ub;
    for (int l : f.path) link_delivered_ub_[l] += f.remaining_ub;
    f.remaining_ub = 0;
    flows_.erase(it);
    recompute_and_reschedule();
    if (f.on_complete) f.on_complete(id);
}

}  // namespace imgsim
