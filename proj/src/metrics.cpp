#include "imgsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace imgsim {

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Rounded to 6 decimals so JSON exports carry numbers yet stay byte-stable.
double num6(double v) { return std::stod(fixed6(v)); }

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    return out;
}

double percentile(std::vector<double> sorted, double p) {
    if (sorted.empty()) return 0;
    const double idx = p * (sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = idx - lo;
    return sorted[lo] * (1 - frac) + sorted[hi] * frac;
}

}  // namespace

std::vector<double> Recorder::boot_times_seconds() const {
    std::vector<double> out;
    for (const auto& b : boots_) {
        if (b.state == VmState::Active && !b.timeline.empty()) {
            out.push_back(to_seconds(b.timeline.back().end - b.arrival));
        }
    }
    return out;
}

RunSummary summarize(const Recorder& rec, const FlowNetwork& net,
                     const std::map<std::string, std::int64_t>& cold_fetches,
                     std::int64_t catalog_egress_bytes, SimTime end_time) {
    RunSummary s;
    s.end_time = end_time;
    s.cold_fetches = cold_fetches;
    s.catalog_egress_bytes = catalog_egress_bytes;

    struct GroupAcc {
        SimTime min_arrival = kSimTimeMax;
        SimTime first_end = kSimTimeMax;
        SimTime last_end = 0;
        int count = 0;
    };
    std::map<std::string, GroupAcc> acc;
    for (const auto& b : rec.boots()) {
        ++s.vm_total;
        if (b.state == VmState::Failed) {
            ++s.vm_failed;
            continue;
        }
        if (b.state != VmState::Active || b.timeline.empty()) continue;
        ++s.vm_active;
        auto& g = acc[b.group_id];
        g.min_arrival = std::min(g.min_arrival, b.arrival);
        const SimTime end = b.timeline.back().end;
        g.first_end = std::min(g.first_end, end);
        g.last_end = std::max(g.last_end, end);
        ++g.count;
    }
    for (const auto& [name, g] : acc) {
        GroupSummary gs;
        gs.first_ready = g.first_end - g.min_arrival;
        gs.all_ready = g.last_end - g.min_arrival;
        gs.vm_count = g.count;
        s.groups[name] = gs;
    }

    std::vector<double> boots = rec.boot_times_seconds();
    std::sort(boots.begin(), boots.end());
    if (!boots.empty()) {
        double sum = 0;
        for (double b : boots) sum += b;
        s.boot_mean_s = sum / boots.size();
        s.boot_median_s = percentile(boots, 0.5);
        s.boot_p95_s = percentile(boots, 0.95);
    }

    const auto& topo = net.topology();
    for (int l = 0; l < topo.link_count(); ++l) {
        s.link_bytes[topo.link_name(l)] = net.link_delivered_bytes(l);
    }
    return s;
}

KdeResult kde(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("kde: need at least 2 samples");
    std::vector<double> x = samples;
    std::sort(x.begin(), x.end());

    double mean = 0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= (n - 1);
    const double sd = std::sqrt(var);
    if (sd == 0) throw std::invalid_argument("kde: degenerate sample (all identical)");
    const double iqr = percentile(x, 0.75) - percentile(x, 0.25);
    const double spread = iqr > 0 ? std::min(sd, iqr / 1.34) : sd;
    const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);

    KdeResult r;
    r.bandwidth = h;
    const double lo = x.front() - 3 * h;
    const double hi = x.back() + 3 * h;
    const int grid = 512;
    const double step = (hi - lo) / (grid - 1);
    const double norm = 1.0 / (n * h * std::sqrt(2 * M_PI));
    r.x.resize(grid);
    r.density.resize(grid);
    for (int i = 0; i < grid; ++i) {
        const double xi = lo + i * step;
        double d = 0;
        for (double s : x) {
            const double z = (xi - s) / h;
            d += std::exp(-0.5 * z * z);
        }
        r.x[i] = xi;
        r.density[i] = d * norm;
    }
    return r;
}

void export_summary(const RunSummary& s, const std::string& path,
                    const std::string& format) {
    if (format == "json") {
        nlohmann::ordered_json j;
        j["end_time_s"] = num6(to_seconds(s.end_time));
        j["vm_total"] = s.vm_total;
        j["vm_active"] = s.vm_active;
        j["vm_failed"] = s.vm_failed;
        j["boot_mean_s"] = num6(s.boot_mean_s);
        j["boot_median_s"] = num6(s.boot_median_s);
        j["boot_p95_s"] = num6(s.boot_p95_s);
        j["catalog_egress_bytes"] = s.catalog_egress_bytes;
        nlohmann::ordered_json groups;
        for (const auto& [name, g] : s.groups) {
            groups[name] = {{"first_ready_s", num6(to_seconds(g.first_ready))},
                            {"all_ready_s", num6(to_seconds(g.all_ready))},
                            {"vm_count", g.vm_count}};
        }
        j["groups"] = groups;
        j["cold_fetches"] = s.cold_fetches;
        j["link_bytes"] = s.link_bytes;
        auto out = open_out(path);
        out << j.dump(2) << "\n";
        return;
    }
    if (format != "csv") throw std::invalid_argument("unknown export format: " + format);
    auto out = open_out(path);
    out << "key,value\n";
    out << "end_time_s," << fixed6(to_seconds(s.end_time)) << "\n";
    out << "vm_total," << s.vm_total << "\n";
    out << "vm_active," << s.vm_active << "\n";
    out << "vm_failed," << s.vm_failed << "\n";
    out << "boot_mean_s," << fixed6(s.boot_mean_s) << "\n";
    out << "boot_median_s," << fixed6(s.boot_median_s) << "\n";
    out << "boot_p95_s," << fixed6(s.boot_p95_s) << "\n";
    out << "catalog_egress_bytes," << s.catalog_egress_bytes << "\n";
    for (const auto& [name, g] : s.groups) {
        out << "group." << name << ".first_ready_s," << fixed6(to_seconds(g.first_ready))
            << "\n";
        out << "group." << name << ".all_ready_s," << fixed6(to_seconds(g.all_ready))
            << "\n";
        out << "group." << name << ".vm_count," << g.vm_count << "\n";
    }
    for (const auto& [img, c] : s.cold_fetches) {
        out << "cold_fetches." << img << "," << c << "\n";
    }
    for (const auto& [link, b] : s.link_bytes) {
        out << "link_bytes." << link << "," << b << "\n";
    }
}

void export_vm_timelines(const Recorder& rec, const std::string& path) {
    auto out = open_out(path);
    out << "request_id,group_id,image_id,node_id,arrival_s,state";
    for (int p = 0; p < kBootPhaseCount; ++p) {
        const char* name = boot_phase_name(static_cast<BootPhase>(p));
        out << ',' << name << "_start_s," << name << "_end_s";
    }
    out << ",boot_s\n";
    for (const auto& b : rec.boots()) {
        out << b.request_id << ',' << b.group_id << ',' << b.image_id << ',' << b.node_id
            << ',' << fixed6(to_seconds(b.arrival)) << ',' << vm_state_name(b.state);
        for (int p = 0; p < kBootPhaseCount; ++p) {
            if (p < static_cast<int>(b.timeline.size())) {
                out << ',' << fixed6(to_seconds(b.timeline[p].start)) << ','
                    << fixed6(to_seconds(b.timeline[p].end));
            } else {
                out << ",,";
            }
        }
        if (b.state == VmState::Active && !b.timeline.empty()) {
            out << ',' << fixed6(to_seconds(b.timeline.back().end - b.arrival));
        } else {
            out << ',';
        }
        out << "\n";
    }
}

void export_decisions(const Recorder& rec, const std::string& path) {
    auto out = open_out(path);
    out << "request_id,ok,node_id,tie_break,omega_digest\n";
    for (const auto& d : rec.decisions()) {
        out << d.request_id << ',' << (d.ok ? 1 : 0) << ',' << d.node_id << ','
            << (d.tie_break ? 1 : 0) << ',' << d.omega_digest << "\n";
    }
}

void export_link_samples(const FlowNetwork& net, const std::string& path) {
    auto out = open_out(path);
    out << "time_s,link,rate_bytes_per_s\n";
    const auto& topo = net.topology();
    for (const auto& s : net.link_samples()) {
        out << fixed6(to_seconds(s.time)) << ',' << topo.link_name(s.link) << ','
            << s.total_rate_ubps / kMicroPerUnit << "\n";
    }
}

void export_kde(const KdeResult& k, const std::string& path) {
    auto out = open_out(path);
    out << "x,density\n";
    for (std::size_t i = 0; i < k.x.size(); ++i) {
        out << fixed6(k.x[i]) << ',' << fixed6(k.density[i]) << "\n";
    }
}

}  // namespace imgsim
