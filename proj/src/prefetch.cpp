#include "imgsim/prefetch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace imgsim {

const char* prefetch_kind_name(PrefetchKind k) {
    switch (k) {
        case PrefetchKind::None: return "none";
        case PrefetchKind::FullPredeploy: return "full-predeploy";
        case PrefetchKind::TopK: return "top-k";
    }
    return "?";
}

PrefetchKind prefetch_kind_from_string(const std::string& s) {
    if (s == "none") return PrefetchKind::None;
    if (s == "full-predeploy" || s == "full") return PrefetchKind::FullPredeploy;
    if (s == "top-k" || s == "topk") return PrefetchKind::TopK;
    throw std::invalid_argument("unknown prefetch kind: " + s);
}

std::vector<std::string> rank_images_by_popularity(const Catalog& catalog) {
    std::vector<std::string> ids;
    for (const auto& [id, spec] : catalog.images()) ids.push_back(id);
    std::stable_sort(ids.begin(), ids.end(), [&](const auto& a, const auto& b) {
        return catalog.get(a).popularity > catalog.get(b).popularity;
    });
    return ids;
}

PrefetchPlan build_plan(const PrefetchPolicy& policy, const Catalog& catalog,
                        const std::vector<ComputeNode>& nodes,
                        const TransferManager& transfer) {
    if (policy.kind == PrefetchKind::None) return {};
    if (policy.kind == PrefetchKind::TopK &&
        (policy.k < 1 || policy.node_fraction <= 0 || policy.node_fraction > 1))
        throw std::invalid_argument("build_plan: bad top-k parameters");

    PrefetchPlan plan;
    auto want = [&](const std::string& image, int node) {
        if (nodes[node].has_cached(image)) return;
        if (transfer.fetch_in_flight(node, image)) return;
        if (catalog.get(image).size_bytes > nodes[node].disk_free()) return;  // dropped
        plan.placements.emplace_back(image, node);
    };

    if (policy.kind == PrefetchKind::FullPredeploy) {
        for (const auto& [image, spec] : catalog.images()) {
            for (const auto& n : nodes) want(image, n.id());
        }
        return plan;
    }

    // top-k: most popular images onto the most-free-disk nodes first
    const auto ranked = rank_images_by_popularity(catalog);
    const int k = std::min<int>(policy.k, static_cast<int>(ranked.size()));
    const int target =
        std::max(1, static_cast<int>(std::llround(policy.node_fraction * nodes.size())));
    std::vector<int> order;
    for (const auto& n : nodes) order.push_back(n.id());
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return nodes[a].disk_free() > nodes[b].disk_free();
    });
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < target && j < static_cast<int>(order.size()); ++j) {
            want(ranked[i], order[j]);
        }
    }
    return plan;
}

void execute_plan(const PrefetchPlan& plan, TransferManager& transfer) {
    for (const auto& [image, node] : plan.placements) {
        transfer.ensure_image(node, image, nullptr);
    }
}

PrefetchDriver::PrefetchDriver(Engine& engine, PrefetchPolicy policy, Catalog& catalog,
                               std::vector<ComputeNode>& nodes, TransferManager& transfer,
                               SimTime until)
    : engine_(engine),
      policy_(policy),
      catalog_(catalog),
      nodes_(nodes),
      transfer_(transfer),
      until_(until) {}

void PrefetchDriver::start() {
    if (policy_.kind == PrefetchKind::None) return;
    if (policy_.kind == PrefetchKind::FullPredeploy) {
        engine_.schedule(engine_.now(), EventKind::PrefetchTrigger, "prefetch",
                         [this] { trigger(); });
        return;
    }
    engine_.schedule(engine_.now() + policy_.period, EventKind::PrefetchTrigger,
                     "prefetch", [this] { trigger(); });
}

void PrefetchDriver::trigger() {
    execute_plan(build_plan(policy_, catalog_, nodes_, transfer_), transfer_);
    if (policy_.kind == PrefetchKind::TopK) {
        const SimTime next = engine_.now() + policy_.period;
        if (next <= until_) {
            engine_.schedule(next, EventKind::PrefetchTrigger, "prefetch",
                             [this] { trigger(); });
        }
    }
}

}  // namespace imgsim
