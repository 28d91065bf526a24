#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "imgsim/domain.hpp"
#include "imgsim/rng.hpp"
#include "imgsim/transfer.hpp"

namespace imgsim {

struct WeigherConfig {
    std::string name;
    double multiplier = 1.0;
};

struct SchedulerConfig {
    std::vector<WeigherConfig> weighers{{"cache", 16.0}, {"free_ram", 1.0}};
    bool count_inflight_as_cached = false;
};

struct HostScore {
    int node_id;
    std::vector<double> raw;
    std::vector<double> normalized;
    double omega = 0.0;
};

struct PlacementDecision {
    std::int64_t request_id = 0;
    bool ok = false;
    int node_id = -1;
    bool tie_break = false;
    std::vector<HostScore> scores;
};

/// Min-max rescale onto [0,1]; all-equal inputs map to all zeros.
std::vector<double> normalize_weights(const std::vector<double>& raw);

/// Filter-then-weigh placement: capacity filter, per-weigher min-max
/// normalization, weighted sum, argmax with uniform random tie-break.
class Scheduler {
public:
    Scheduler(SchedulerConfig cfg, std::uint64_t seed)
        : cfg_(std::move(cfg)), tie_rng_(seed, "tie-break") {
        if (cfg_.weighers.empty())
            throw std::invalid_argument("scheduler needs at least one weigher");
    }

    /// Raw weigher value. `transfer` may be null (cache weigher then reads the
    /// node cache only).
    double raw_weight(const std::string& weigher, const ComputeNode& node,
                      const VmRequest& req, const TransferManager* transfer) const;

    std::vector<int> filter_hosts(const VmRequest& req,
                                  const std::vector<ComputeNode>& nodes) const;

    /// Full pipeline; claims resources on the chosen host on success.
    PlacementDecision schedule(const VmRequest& req, std::vector<ComputeNode>& nodes,
                               const TransferManager* transfer);

    const SchedulerConfig& config() const { return cfg_; }

private:
    SchedulerConfig cfg_;
    RngStream tie_rng_;
};

}  // namespace imgsim
