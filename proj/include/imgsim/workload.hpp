#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imgsim/domain.hpp"
#include "imgsim/rng.hpp"

namespace imgsim {

struct Trace {
    std::vector<VmRequest> requests;  // arrival times non-decreasing
};

struct BatchSpec {
    std::vector<std::pair<std::string, int>> groups;  // (image_id, vm_count)
    int total() const {
        int n = 0;
        for (const auto& [id, c] : groups) n += c;
        return n;
    }
};

/// Table-style batch rows: n_requests requests of vms_each machines, one image
/// per request, 192 total for the built-in rows.
BatchSpec batch_row(int n_requests, int vms_each, const std::string& image_prefix = "img");

enum class ImageChoice { Uniform, Zipf };

struct TraceSpec {
    double rate_per_hour = 80.0;
    SimTime duration = from_whole_seconds(3600);
    std::vector<std::string> image_pool;
    ImageChoice choice = ImageChoice::Uniform;
    double zipf_s = 1.0;
};

/// All requests at t=0, grouped by image.
Trace generate_batch(const BatchSpec& spec, const Flavor& flavor);

/// Exponential inter-arrival gaps with mean 3600/rate seconds; image drawn per
/// the choice law from the pool.
Trace generate_poisson_trace(const TraceSpec& spec, const Flavor& flavor,
                             RngStream& arrivals, RngStream& image_choice);

/// n rank draws in [0, pool_size) following Zipf(s); s = 0 is uniform.
std::vector<int> zipf_sequence(int pool_size, double s, RngStream& rng, int n);

Trace load_trace(const std::string& path);
void save_trace(const Trace& trace, const std::string& path);

}  // namespace imgsim
