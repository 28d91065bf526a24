#pragma once

#include <memory>
#include <ostream>
#include <string>

#include "imgsim/disk.hpp"
#include "imgsim/engine.hpp"
#include "imgsim/metrics.hpp"
#include "imgsim/prefetch.hpp"
#include "imgsim/scenario.hpp"
#include "imgsim/scheduler.hpp"
#include "imgsim/transfer.hpp"

namespace imgsim {

/// Whole-scenario orchestration: builds the topology, nodes, catalog, transfer
/// manager, scheduler and workload from a Scenario, runs the event loop to
/// completion, and exposes the pieces the exporters need.
class Simulation {
public:
    explicit Simulation(const Scenario& scenario);

    /// Runs to completion (the event queue drains) and returns the summary.
    RunSummary run();

    /// Optional event-log CSV stream (time,kind,subject); set before run().
    void set_event_log(std::ostream* out);

    Engine& engine() { return engine_; }
    const Recorder& recorder() const { return recorder_; }
    const FlowNetwork& network() const { return *net_; }
    const TransferManager& transfer() const { return *transfer_; }
    const Catalog& catalog() const { return catalog_; }
    const std::vector<ComputeNode>& nodes() const { return nodes_; }
    const Trace& trace() const { return trace_; }

private:
    struct VmCtx;
    void on_arrival(const VmRequest& req);
    void start_phase(std::shared_ptr<VmCtx> vm, BootPhase phase);
    void end_phase(std::shared_ptr<VmCtx> vm, BootPhase phase);

    Scenario scenario_;
    Engine engine_;
    Catalog catalog_;
    std::vector<ComputeNode> nodes_;
    std::unique_ptr<FlowNetwork> net_;
    std::unique_ptr<TransferManager> transfer_;
    std::unique_ptr<Scheduler> scheduler_;
    std::unique_ptr<PrefetchDriver> prefetch_;
    std::vector<std::unique_ptr<FairShareDisk>> disks_;
    Recorder recorder_;
    Trace trace_;
    std::ostream* event_log_ = nullptr;
};

}  // namespace imgsim
