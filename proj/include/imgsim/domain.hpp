#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "imgsim/time.hpp"

namespace imgsim {

struct ImageSpec {
    std::string id;
    std::int64_t size_bytes = 0;
    std::int64_t piece_size_bytes = 32ll * 1024 * 1024;
    std::int64_t popularity = 0;  // VMs ever spawned from this image

    int piece_count() const {
        return static_cast<int>((size_bytes + piece_size_bytes - 1) / piece_size_bytes);
    }
    std::int64_t piece_bytes(int piece) const {
        std::int64_t off = static_cast<std::int64_t>(piece) * piece_size_bytes;
        return std::min(piece_size_bytes, size_bytes - off);
    }
};

/// Image repository. Permanently holds every piece of every registered image.
class Catalog {
public:
    void register_image(ImageSpec spec) {
        if (spec.id.empty()) throw std::invalid_argument("image id empty");
        if (spec.size_bytes <= 0) throw std::invalid_argument("image size must be positive");
        if (spec.piece_size_bytes <= 0)
            throw std::invalid_argument("piece size must be positive");
        images_[spec.id] = std::move(spec);
    }
    bool has(const std::string& id) const { return images_.count(id) > 0; }
    const ImageSpec& get(const std::string& id) const {
        auto it = images_.find(id);
        if (it == images_.end()) throw std::out_of_range("unknown image: " + id);
        return it->second;
    }
    void seed_popularity(const std::string& id, std::int64_t count) {
        auto it = images_.find(id);
        if (it == images_.end()) throw std::out_of_range("unknown image: " + id);
        if (count < 0) throw std::invalid_argument("popularity must be >= 0");
        it->second.popularity = count;
    }
    void record_spawn(const std::string& id) {
        auto it = images_.find(id);
        if (it == images_.end()) throw std::out_of_range("unknown image: " + id);
        ++it->second.popularity;
    }
    const std::map<std::string, ImageSpec>& images() const { return images_; }

private:
    std::map<std::string, ImageSpec> images_;
};

struct Flavor {
    int vcpus = 1;
    std::int64_t ram_bytes = 2ll << 30;
    std::int64_t root_disk_bytes = 10'000'000'000;
    std::int64_t ephemeral_bytes = 0;

    bool valid() const {
        return vcpus > 0 && ram_bytes > 0 && root_disk_bytes > 0 && ephemeral_bytes >= 0;
    }
};

struct VmRequest {
    std::int64_t request_id = 0;
    SimTime arrival = 0;
    std::string image_id;
    Flavor flavor;
    std::string group_id;
};

enum class BootPhase { Claim, Download, Duplication, Resize, Ephemeral, Injection, NetConfig };
inline constexpr int kBootPhaseCount = 7;
const char* boot_phase_name(BootPhase p);

struct PhaseSpan {
    BootPhase phase;
    SimTime start = 0;
    SimTime end = 0;
};

enum class VmState { Scheduled, Booting, Active, Failed };
const char* vm_state_name(VmState s);

struct VmInstance {
    VmRequest request;
    int node_id = -1;
    VmState state = VmState::Scheduled;
    std::vector<PhaseSpan> timeline;

    SimTime boot_time() const {
        if (timeline.empty()) throw std::logic_error("boot_time: no timeline");
        return timeline.back().end - request.arrival;
    }
};

/// Durations of the constant boot phases; scenario config. Paper-free
/// calibration knobs (see README).
struct PhaseConstants {
    SimTime claim = from_whole_seconds(1);
    SimTime cow = from_whole_seconds(1);
    SimTime resize = from_whole_seconds(2);
    SimTime inject = from_whole_seconds(2);
    SimTime net = from_whole_seconds(2);
};

struct CacheEntry {
    std::int64_t bytes = 0;
    SimTime last_used = 0;
    bool pinned = false;  // in-flight fetch target; never evicted
};

class ComputeNode {
public:
    ComputeNode(int id, int vcpus, std::int64_t ram_bytes, std::int64_t disk_bytes,
                std::int64_t disk_bandwidth_bytes_per_s)
        : id_(id),
          vcpus_total_(vcpus),
          vcpus_free_(vcpus),
          ram_total_(ram_bytes),
          ram_free_(ram_bytes),
          disk_total_(disk_bytes),
          disk_free_(disk_bytes),
          disk_bw_(disk_bandwidth_bytes_per_s) {}

    int id() const { return id_; }
    int vcpus_free() const { return vcpus_free_; }
    int vcpus_total() const { return vcpus_total_; }
    std::int64_t ram_free() const { return ram_free_; }
    std::int64_t ram_total() const { return ram_total_; }
    std::int64_t disk_free() const { return disk_free_; }
    std::int64_t disk_total() const { return disk_total_; }
    std::int64_t disk_bandwidth() const { return disk_bw_; }

    bool can_claim(const Flavor& f) const {
        return f.vcpus <= vcpus_free_ && f.ram_bytes <= ram_free_ &&
               f.root_disk_bytes + f.ephemeral_bytes <= disk_free_;
    }

    /// Claim resources atomically; false leaves the node unchanged.
    bool claim(const Flavor& f) {
        if (!f.valid()) throw std::invalid_argument("claim: invalid flavor");
        if (!can_claim(f)) return false;
        vcpus_free_ -= f.vcpus;
        ram_free_ -= f.ram_bytes;
        disk_free_ -= f.root_disk_bytes + f.ephemeral_bytes;
        return true;
    }

    void release(const Flavor& f) {
        vcpus_free_ += f.vcpus;
        ram_free_ += f.ram_bytes;
        disk_free_ += f.root_disk_bytes + f.ephemeral_bytes;
    }

    // --- image cache ---
    bool has_cached(const std::string& image_id) const {
        auto it = cache_.find(image_id);
        return it != cache_.end() && !it->second.pinned;
    }
    bool reserve_cache_space(const std::string& image_id, std::int64_t bytes, SimTime now) {
        if (bytes > disk_free_) return false;
        disk_free_ -= bytes;
        cache_[image_id] = CacheEntry{bytes, now, true};
        return true;
    }
    void commit_cache(const std::string& image_id, SimTime now) {
        auto& e = cache_.at(image_id);
        e.pinned = false;
        e.last_used = now;
    }
    void touch_cache(const std::string& image_id, SimTime now) {
        auto it = cache_.find(image_id);
        if (it != cache_.end()) it->second.last_used = now;
    }
    void evict(const std::string& image_id) {
        auto it = cache_.find(image_id);
        if (it == cache_.end()) return;
        disk_free_ += it->second.bytes;
        cache_.erase(it);
    }
    const std::map<std::string, CacheEntry>& cache() const { return cache_; }
    std::int64_t cache_bytes() const {
        std::int64_t b = 0;
        for (const auto& [id, e] : cache_) b += e.bytes;
        return b;
    }

private:
    int id_;
    int vcpus_total_, vcpus_free_;
    std::int64_t ram_total_, ram_free_;
    std::int64_t disk_total_, disk_free_;
    std::int64_t disk_bw_;
    std::map<std::string, CacheEntry> cache_;
};

struct PhaseDurations {
    SimTime claim = 0;
    // Download is resolved by the transfer module; negative marks "pending".
    SimTime download = -1;
    SimTime duplication = 0;
    SimTime resize = 0;
    SimTime ephemeral = 0;
    SimTime injection = 0;
    SimTime netconfig = 0;
};

/// Isolated (contention-free) boot phase durations. Raw-format duplication and
/// ephemeral creation are linear in bytes over the node disk bandwidth; CoW
/// collapses both to a constant.
PhaseDurations boot_phase_durations(const ComputeNode& node, const Flavor& flavor,
                                    const ImageSpec& image, bool cow, bool image_local,
                                    const PhaseConstants& c);

}  // namespace imgsim
