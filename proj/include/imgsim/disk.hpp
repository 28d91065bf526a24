#pragma once

#include <cstdint>
#include <functional>
#include <map>

#include "imgsim/engine.hpp"
#include "imgsim/network.hpp"

namespace imgsim {

/// Processor-sharing model of one node's local disk: concurrent disk-bound
/// boot phases split the bandwidth equally. Same fixed-point mechanics as the
/// flow network (floor advance, ceil completion).
class FairShareDisk {
public:
    FairShareDisk(Engine& engine, std::int64_t bandwidth_bytes_per_s, std::string label)
        : engine_(engine),
          capacity_ubps_(bandwidth_bytes_per_s * kMicroPerUnit),
          label_(std::move(label)) {}

    void add_task(std::int64_t bytes, std::function<void()> done) {
        if (bytes <= 0) throw std::invalid_argument("disk task: bytes must be positive");
        advance();
        std::uint64_t id = next_id_++;
        tasks_.emplace(id, Task{bytes * kMicroPerUnit, 0, 0, std::move(done)});
        reschedule();
    }

    std::size_t active() const { return tasks_.size(); }

private:
    struct Task {
        MicroBytes remaining_ub;
        RateUbps rate_ubps;
        std::uint64_t generation;
        std::function<void()> done;
    };

    void advance() {
        const SimTime elapsed = engine_.now() - last_advance_;
        last_advance_ = engine_.now();
        if (elapsed == 0) return;
        for (auto& [id, t] : tasks_) {
            MicroBytes moved = static_cast<MicroBytes>(
                static_cast<__int128>(t.rate_ubps) * elapsed / kMicrosPerSecond);
            t.remaining_ub -= std::min(moved, t.remaining_ub);
        }
    }

    void reschedule() {
        if (tasks_.empty()) return;
        const RateUbps share = capacity_ubps_ / static_cast<RateUbps>(tasks_.size());
        for (auto& [id, t] : tasks_) {
            if (t.rate_ubps == share) continue;
            t.rate_ubps = share;
            const std::uint64_t gen = ++t.generation;
            const __int128 num = static_cast<__int128>(t.remaining_ub) * kMicrosPerSecond;
            const SimTime dt = static_cast<SimTime>((num + share - 1) / share);
            const std::uint64_t tid = id;
            engine_.schedule(engine_.now() + dt, EventKind::PhaseComplete, label_,
                             [this, tid, gen] { complete(tid, gen); });
        }
    }

    void complete(std::uint64_t id, std::uint64_t generation) {
        auto it = tasks_.find(id);
        if (it == tasks_.end() || it->second.generation != generation) return;
        advance();
        auto done = std::move(it->second.done);
        tasks_.erase(it);
        reschedule();
        if (done) done();
    }

    Engine& engine_;
    RateUbps capacity_ubps_;
    std::string label_;
    SimTime last_advance_ = 0;
    std::uint64_t next_id_ = 1;
    std::map<std::uint64_t, Task> tasks_;
};

}  // namespace imgsim
