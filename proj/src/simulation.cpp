#include "imgsim/simulation.hpp"

#include <cstring>
#include <fstream>

namespace imgsim {

namespace {

std::uint64_t omega_digest(const PlacementDecision& d) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& s : d.scores) {
        mix(&s.node_id, sizeof s.node_id);
        mix(&s.omega, sizeof s.omega);
    }
    return h;
}

}  // namespace

struct Simulation::VmCtx {
    VmInstance inst;
    PhaseDurations dur;
};

Simulation::Simulation(const Scenario& scenario) : scenario_(scenario) {
    if (!scenario_.seed_set) throw std::invalid_argument("scenario: seed is mandatory");
    for (const auto& img : scenario_.images) {
        catalog_.register_image({img.id, img.size_bytes, img.piece_size_bytes, 0});
    }
    if (!scenario_.popularity_seed_path.empty()) {
        std::ifstream in(scenario_.popularity_seed_path);
        if (!in)
            throw std::runtime_error("cannot read popularity seed file: " +
                                     scenario_.popularity_seed_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos)
                throw std::runtime_error("popularity seed: malformed line: " + line);
            catalog_.seed_popularity(line.substr(0, comma),
                                     std::stoll(line.substr(comma + 1)));
        }
    }
    for (int i = 0; i < scenario_.topology.node_count; ++i) {
        nodes_.emplace_back(i, scenario_.node.vcpus, scenario_.node.ram_bytes,
                            scenario_.node.disk_bytes,
                            scenario_.node.disk_bandwidth_bytes_per_s);
        disks_.push_back(std::make_unique<FairShareDisk>(
            engine_, scenario_.node.disk_bandwidth_bytes_per_s,
            "disk" + std::to_string(i)));
    }
    net_ = std::make_unique<FlowNetwork>(engine_, Topology(scenario_.topology));
    transfer_ = std::make_unique<TransferManager>(engine_, *net_, catalog_, nodes_,
                                                  scenario_.protocol, scenario_.seed);
    scheduler_ = std::make_unique<Scheduler>(scenario_.scheduler, scenario_.seed);
}

void Simulation::set_event_log(std::ostream* out) {
    event_log_ = out;
    if (out) {
        *out << "time_s,kind,subject\n";
        engine_.set_observer([this](const Event& e) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", to_seconds(e.fire_at));
            *event_log_ << buf << ',' << event_kind_name(e.kind) << ',' << e.subject
                        << "\n";
        });
    } else {
        engine_.set_observer(nullptr);
    }
}

RunSummary Simulation::run() {
    switch (scenario_.workload.kind) {
        case WorkloadConfig::Kind::Batch:
            trace_ = generate_batch(scenario_.workload.batch, scenario_.flavor);
            break;
        case WorkloadConfig::Kind::Poisson: {
            RngStream arrivals(scenario_.seed, "arrivals");
            RngStream choice(scenario_.seed, "image-choice");
            trace_ = generate_poisson_trace(scenario_.workload.trace, scenario_.flavor,
                                            arrivals, choice);
            break;
        }
        case WorkloadConfig::Kind::TraceFile:
            trace_ = load_trace(scenario_.workload.trace_path);
            break;
    }
    for (const auto& req : trace_.requests) {
        if (!catalog_.has(req.image_id))
            throw std::invalid_argument("workload references undefined image: " +
                                        req.image_id);
    }

    if (scenario_.pre_cache_all) {
        for (const auto& [id, img] : catalog_.images()) {
            for (auto& node : nodes_) transfer_->prime_cache(node.id(), id);
        }
    }

    SimTime workload_end = 0;
    for (const auto& req : trace_.requests) {
        workload_end = std::max(workload_end, req.arrival);
        engine_.schedule(req.arrival, EventKind::RequestArrival,
                         "req" + std::to_string(req.request_id),
                         [this, req] { on_arrival(req); });
    }
    if (scenario_.workload.kind == WorkloadConfig::Kind::Poisson)
        workload_end = std::max(workload_end, scenario_.workload.trace.duration);

    prefetch_ = std::make_unique<PrefetchDriver>(engine_, scenario_.prefetch, catalog_,
                                                 nodes_, *transfer_, workload_end);
    prefetch_->start();

    engine_.run_until(kSimTimeMax);
    return summarize(recorder_, *net_, transfer_->cold_fetches(),
                     transfer_->catalog_egress_bytes(), engine_.now());
}

void Simulation::on_arrival(const VmRequest& req) {
    PlacementDecision d = scheduler_->schedule(req, nodes_, transfer_.get());
    recorder_.add_decision({req.request_id, d.ok, d.node_id, d.tie_break, omega_digest(d)});
    if (!d.ok) {
        VmBootRecord rec{req.request_id, req.group_id, req.image_id, -1,
                         req.arrival,    VmState::Failed, {}};
        recorder_.add_boot(std::move(rec));
        return;
    }
    catalog_.record_spawn(req.image_id);
    auto vm = std::make_shared<VmCtx>();
    vm->inst.request = req;
    vm->inst.node_id = d.node_id;
    vm->inst.state = VmState::Booting;
    vm->dur = boot_phase_durations(nodes_[d.node_id], req.flavor,
                                   catalog_.get(req.image_id), scenario_.cow,
                                   transfer_->image_available(d.node_id, req.image_id),
                                   scenario_.phases);
    start_phase(vm, BootPhase::Claim);
}

void Simulation::start_phase(std::shared_ptr<VmCtx> vm, BootPhase phase) {
    vm->inst.timeline.push_back({phase, engine_.now(), engine_.now()});
    const int node = vm->inst.node_id;
    const std::string subject = "vm" + std::to_string(vm->inst.request.request_id);
    auto fixed = [&](SimTime duration) {
        engine_.schedule(engine_.now() + duration, EventKind::PhaseComplete, subject,
                         [this, vm, phase] { end_phase(vm, phase); });
    };
    switch (phase) {
        case BootPhase::Claim:
            fixed(vm->dur.claim);
            break;
        case BootPhase::Download:
            try {
                transfer_->ensure_image(node, vm->inst.request.image_id,
                                        [this, vm] { end_phase(vm, BootPhase::Download); });
            } catch (const InsufficientDiskError&) {
                // Scheduler misplacement: the node cannot hold the image.
                vm->inst.state = VmState::Failed;
                recorder_.add_boot({vm->inst.request.request_id,
                                    vm->inst.request.group_id, vm->inst.request.image_id,
                                    node, vm->inst.request.arrival, VmState::Failed,
                                    vm->inst.timeline});
            }
            break;
        case BootPhase::Duplication:
            if (scenario_.cow) {
                fixed(vm->dur.duplication);
            } else {
                disks_[node]->add_task(catalog_.get(vm->inst.request.image_id).size_bytes,
                                       [this, vm] { end_phase(vm, BootPhase::Duplication); });
            }
            break;
        case BootPhase::Resize:
            fixed(vm->dur.resize);
            break;
        case BootPhase::Ephemeral:
            if (vm->inst.request.flavor.ephemeral_bytes == 0) {
                end_phase(vm, phase);
            } else if (scenario_.cow) {
                fixed(vm->dur.ephemeral);
            } else {
                disks_[node]->add_task(vm->inst.request.flavor.ephemeral_bytes,
                                       [this, vm] { end_phase(vm, BootPhase::Ephemeral); });
            }
            break;
        case BootPhase::Injection:
            fixed(vm->dur.injection);
            break;
        case BootPhase::NetConfig:
            fixed(vm->dur.netconfig);
            break;
    }
}

void Simulation::end_phase(std::shared_ptr<VmCtx> vm, BootPhase phase) {
    vm->inst.timeline.back().end = engine_.now();
    if (phase == BootPhase::NetConfig) {
        vm->inst.state = VmState::Active;
        recorder_.add_boot({vm->inst.request.request_id, vm->inst.request.group_id,
                            vm->inst.request.image_id, vm->inst.node_id,
                            vm->inst.request.arrival, VmState::Active,
                            vm->inst.timeline});
        return;
    }
    start_phase(std::move(vm), static_cast<BootPhase>(static_cast<int>(phase) + 1));
}

}  // namespace imgsim
