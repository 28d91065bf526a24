#include "imgsim/workload.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace imgsim {

BatchSpec batch_row(int n_requests, int vms_each, const std::string& image_prefix) {
    BatchSpec spec;
    for (int i = 0; i < n_requests; ++i) {
        spec.groups.emplace_back(image_prefix + std::to_string(i + 1), vms_each);
    }
    return spec;
}

Trace generate_batch(const BatchSpec& spec, const Flavor& flavor) {
    Trace t;
    std::int64_t id = 0;
    for (const auto& [image, count] : spec.groups) {
        if (count < 0) throw std::invalid_argument("batch: negative vm count");
        for (int i = 0; i < count; ++i) {
            VmRequest r;
            r.request_id = id++;
            r.arrival = 0;
            r.image_id = image;
            r.flavor = flavor;
            r.group_id = image;
            t.requests.push_back(std::move(r));
        }
    }
    return t;
}

std::vector<int> zipf_sequence(int pool_size, double s, RngStream& rng, int n) {
    if (pool_size < 1) throw std::invalid_argument("zipf: pool_size < 1");
    if (s < 0) throw std::invalid_argument("zipf: s < 0");
    // Inverse-CDF over the K ranked masses p(r) = r^-s / H_K(s).
    std::vector<double> cdf(pool_size);
    double sum = 0;
    for (int r = 0; r < pool_size; ++r) {
        sum += std::pow(static_cast<double>(r + 1), -s);
        cdf[r] = sum;
    }
    std::vector<int> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_double() * sum;
        int lo = 0, hi = pool_size - 1;
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (cdf[mid] > u)
                hi = mid;
            else
                lo = mid + 1;
        }
        out.push_back(lo);
    }
    return out;
}

Trace generate_poisson_trace(const TraceSpec& spec, const Flavor& flavor,
                             RngStream& arrivals, RngStream& image_choice) {
    if (spec.rate_per_hour <= 0) throw std::invalid_argument("trace: rate must be positive");
    if (spec.image_pool.empty()) throw std::invalid_argument("trace: empty image pool");
    const double mean_gap_s = 3600.0 / spec.rate_per_hour;
    Trace t;
    std::int64_t id = 0;
    double clock_s = 0;
    while (true) {
        clock_s += arrivals.exponential(mean_gap_s);
        const SimTime at = from_seconds(clock_s);
        if (at > spec.duration) break;
        int idx;
        if (spec.choice == ImageChoice::Uniform) {
            idx = static_cast<int>(image_choice.next_below(spec.image_pool.size()));
        } else {
            idx = zipf_sequence(static_cast<int>(spec.image_pool.size()), spec.zipf_s,
                                image_choice, 1)[0];
        }
        VmRequest r;
        r.request_id = id++;
        r.arrival = at;
        r.image_id = spec.image_pool[idx];
        r.flavor = flavor;
        r.group_id = "trace";
        t.requests.push_back(std::move(r));
    }
    return t;
}

static const char* kTraceHeader =
    "arrival_seconds,image_id,vcpus,ram_bytes,root_bytes,ephemeral_bytes,group_id";

void save_trace(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace file: " + path);
    out << kTraceHeader << "\n";
    char buf[32];
    for (const auto& r : trace.requests) {
        std::snprintf(buf, sizeof buf, "%.6f", to_seconds(r.arrival));
        out << buf << ',' << r.image_id << ',' << r.flavor.vcpus << ','
            << r.flavor.ram_bytes << ',' << r.flavor.root_disk_bytes << ','
            << r.flavor.ephemeral_bytes << ',' << r.group_id << "\n";
    }
}

Trace load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read trace file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        throw std::runtime_error(path + ":1: bad or missing trace header");
    Trace t;
    std::int64_t id = 0;
    int lineno = 1;
    SimTime prev = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 7)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 7 fields, got " +
                                     std::to_string(fields.size()));
        VmRequest r;
        try {
            const double arrival_s = std::stod(fields[0]);
            if (arrival_s < 0) throw std::invalid_argument("negative arrival");
            r.arrival = from_seconds(arrival_s);
            r.flavor.vcpus = std::stoi(fields[2]);
            r.flavor.ram_bytes = std::stoll(fields[3]);
            r.flavor.root_disk_bytes = std::stoll(fields[4]);
            r.flavor.ephemeral_bytes = std::stoll(fields[5]);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (r.arrival < prev)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": arrivals out of order");
        if (!r.flavor.valid())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": invalid flavor");
        prev = r.arrival;
        r.request_id = id++;
        r.image_id = fields[1];
        r.group_id = fields[6];
        t.requests.push_back(std::move(r));
    }
    return t;
}

}  // namespace imgsim
