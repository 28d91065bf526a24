#include "imgsim/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace imgsim {

std::vector<double> normalize_weights(const std::vector<double>& raw) {
    if (raw.empty()) throw std::invalid_argument("normalize: no candidates");
    for (double w : raw) {
        if (!std::isfinite(w)) throw std::invalid_argument("normalize: non-finite weight");
    }
    const auto [mn, mx] = std::minmax_element(raw.begin(), raw.end());
    std::vector<double> out(raw.size(), 0.0);
    if (*mx == *mn) return out;  // degenerate rescale: all zeros, ties preserved
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out[i] = (raw[i] - *mn) / (*mx - *mn);
    }
    return out;
}

double Scheduler::raw_weight(const std::string& weigher, const ComputeNode& node,
                             const VmRequest& req, const TransferManager* transfer) const {
    if (weigher == "cache") {
        bool hit = transfer ? transfer->image_available(node.id(), req.image_id)
                            : node.has_cached(req.image_id);
        if (!hit && cfg_.count_inflight_as_cached && transfer)
            hit = transfer->fetch_in_flight(node.id(), req.image_id);
        return hit ? 1.0 : 0.0;
    }
    if (weigher == "free_ram") return static_cast<double>(node.ram_free());
    if (weigher == "free_disk") return static_cast<double>(node.disk_free());
    if (weigher == "free_vcpus") return static_cast<double>(node.vcpus_free());
    throw std::invalid_argument("unknown weigher: " + weigher);
}

std::vector<int> Scheduler::filter_hosts(const VmRequest& req,
                                         const std::vector<ComputeNode>& nodes) const {
    std::vector<int> out;
    for (const auto& n : nodes) {
        if (n.can_claim(req.flavor)) out.push_back(n.id());
    }
    return out;
}

PlacementDecision Scheduler::schedule(const VmRequest& req,
                                      std::vector<ComputeNode>& nodes,
                                      const TransferManager* transfer) {
    PlacementDecision d;
    d.request_id = req.request_id;
    const std::vector<int> candidates = filter_hosts(req, nodes);
    if (candidates.empty()) return d;  // no-valid-host

    const std::size_t k = candidates.size();
    const std::size_t nw = cfg_.weighers.size();
    std::vector<std::vector<double>> raw(nw, std::vector<double>(k));
    for (std::size_t w = 0; w < nw; ++w) {
        for (std::size_t i = 0; i < k; ++i) {
            raw[w][i] =
                raw_weight(cfg_.weighers[w].name, nodes[candidates[i]], req, transfer);
        }
    }
    std::vector<std::vector<double>> norm(nw);
    for (std::size_t w = 0; w < nw; ++w) norm[w] = normalize_weights(raw[w]);

    d.scores.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        HostScore& s = d.scores[i];
        s.node_id = candidates[i];
        for (std::size_t w = 0; w < nw; ++w) {
            s.raw.push_back(raw[w][i]);
            s.normalized.push_back(norm[w][i]);
            s.omega += cfg_.weighers[w].multiplier * norm[w][i];
        }
    }

    double best = d.scores[0].omega;
    for (const auto& s : d.scores) best = std::max(best, s.omega);
    std::vector<int> winners;
    for (const auto& s : d.scores) {
        if (s.omega == best) winners.push_back(s.node_id);
    }
    int chosen = winners[0];
    if (winners.size() > 1) {
        d.tie_break = true;
        chosen = winners[tie_rng_.next_below(winners.size())];
    }
    if (!nodes[chosen].claim(req.flavor))
        throw std::logic_error("schedule: claim failed after filter");
    d.ok = true;
    d.node_id = chosen;
    return d;
}

}  // namespace imgsim
