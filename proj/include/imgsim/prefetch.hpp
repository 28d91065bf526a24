#pragma once

#include <string>
#include <vector>

#include "imgsim/domain.hpp"
#include "imgsim/transfer.hpp"

namespace imgsim {

enum class PrefetchKind { None, FullPredeploy, TopK };
const char* prefetch_kind_name(PrefetchKind k);
PrefetchKind prefetch_kind_from_string(const std::string& s);

struct PrefetchPolicy {
    PrefetchKind kind = PrefetchKind::None;
    int k = 1;
    double node_fraction = 1.0;  // fraction of nodes targeted by top-k
    SimTime period = from_whole_seconds(60);
};

struct PrefetchPlan {
    std::vector<std::pair<std::string, int>> placements;  // (image_id, node_id)
};

/// Descending popularity, ties by image id.
std::vector<std::string> rank_images_by_popularity(const Catalog& catalog);

/// Placements an anticipatory push should perform now. Excludes pairs already
/// cached or in flight; top-k targets the most-free-disk nodes first.
/// Placements that cannot fit on their node are dropped (the transfer layer
/// logs nothing here; the plan simply skips them).
PrefetchPlan build_plan(const PrefetchPolicy& policy, const Catalog& catalog,
                        const std::vector<ComputeNode>& nodes,
                        const TransferManager& transfer);

/// Issue fetch tickets for every placement; transfers share the network with
/// demand traffic.
void execute_plan(const PrefetchPlan& plan, TransferManager& transfer);

/// Runs build+execute as periodic simulation events until `until`.
class PrefetchDriver {
public:
    PrefetchDriver(Engine& engine, PrefetchPolicy policy, Catalog& catalog,
                   std::vector<ComputeNode>& nodes, TransferManager& transfer,
                   SimTime until);
    void start();

private:
    void trigger();

    Engine& engine_;
    PrefetchPolicy policy_;
    Catalog& catalog_;
    std::vector<ComputeNode>& nodes_;
    TransferManager& transfer_;
    SimTime until_;
};

}  // namespace imgsim
