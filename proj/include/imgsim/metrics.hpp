#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "imgsim/domain.hpp"
#include "imgsim/network.hpp"

namespace imgsim {

struct VmBootRecord {
    std::int64_t request_id;
    std::string group_id;
    std::string image_id;
    int node_id;
    SimTime arrival;
    VmState state;
    std::vector<PhaseSpan> timeline;
};

struct DecisionRecord {
    std::int64_t request_id;
    bool ok;
    int node_id;
    bool tie_break;
    std::uint64_t omega_digest;
};

/// Append-only observation log; one per run.
class Recorder {
public:
    void add_boot(VmBootRecord r) { boots_.push_back(std::move(r)); }
    void add_decision(DecisionRecord r) { decisions_.push_back(std::move(r)); }
    const std::vector<VmBootRecord>& boots() const { return boots_; }
    const std::vector<DecisionRecord>& decisions() const { return decisions_; }

    std::vector<double> boot_times_seconds() const;

private:
    std::vector<VmBootRecord> boots_;
    std::vector<DecisionRecord> decisions_;
};

struct GroupSummary {
    SimTime first_ready = 0;  // first VM active, relative to group arrival
    SimTime all_ready = 0;    // makespan: last VM active, relative to group arrival
    int vm_count = 0;
};

struct RunSummary {
    SimTime end_time = 0;
    int vm_total = 0;
    int vm_active = 0;
    int vm_failed = 0;
    double boot_mean_s = 0;
    double boot_median_s = 0;
    double boot_p95_s = 0;
    std::map<std::string, GroupSummary> groups;
    std::map<std::string, std::int64_t> cold_fetches;
    std::map<std::string, std::int64_t> link_bytes;
    std::int64_t catalog_egress_bytes = 0;
};

RunSummary summarize(const Recorder& rec, const FlowNetwork& net,
                     const std::map<std::string, std::int64_t>& cold_fetches,
                     std::int64_t catalog_egress_bytes, SimTime end_time);

struct KdeResult {
    double bandwidth = 0;
    std::vector<double> x;
    std::vector<double> density;
};

/// Gaussian KDE, Silverman bandwidth, 512-point grid over [min-3h, max+3h].
/// Requires >= 2 samples; throws on a degenerate (all-identical) sample.
KdeResult kde(const std::vector<double>& samples);

// Exports: stable column order, fixed 6-decimal floats, so identical runs
// produce byte-identical files.
void export_summary(const RunSummary& s, const std::string& path,
                    const std::string& format);
void export_vm_timelines(const Recorder& rec, const std::string& path);
void export_decisions(const Recorder& rec, const std::string& path);
void export_link_samples(const FlowNetwork& net, const std::string& path);
void export_kde(const KdeResult& k, const std::string& path);

}  // namespace imgsim
