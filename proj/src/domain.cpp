#include "imgsim/domain.hpp"

#include "imgsim/engine.hpp"

namespace imgsim {

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::RequestArrival: return "request-arrival";
        case EventKind::FlowComplete: return "flow-complete";
        case EventKind::PhaseComplete: return "phase-complete";
        case EventKind::RateRecompute: return "rate-recompute";
        case EventKind::PrefetchTrigger: return "prefetch-trigger";
    }
    return "?";
}

const char* boot_phase_name(BootPhase p) {
    switch (p) {
        case BootPhase::Claim: return "claim";
        case BootPhase::Download: return "download";
        case BootPhase::Duplication: return "duplication";
        case BootPhase::Resize: return "resize";
        case BootPhase::Ephemeral: return "ephemeral";
        case BootPhase::Injection: return "injection";
        case BootPhase::NetConfig: return "netconfig";
    }
    return "?";
}

const char* vm_state_name(VmState s) {
    switch (s) {
        case VmState::Scheduled: return "scheduled";
        case VmState::Booting: return "booting";
        case VmState::Active: return "active";
        case VmState::Failed: return "failed";
    }
    return "?";
}

static SimTime disk_seconds(std::int64_t bytes, std::int64_t bw) {
    // ceil(bytes / bw) in whole microseconds
    const __int128 num = static_cast<__int128>(bytes) * kMicrosPerSecond;
    return static_cast<SimTime>((num + bw - 1) / bw);
}

PhaseDurations boot_phase_durations(const ComputeNode& node, const Flavor& flavor,
                                    const ImageSpec& image, bool cow, bool image_local,
                                    const PhaseConstants& c) {
    if (!flavor.valid()) throw std::invalid_argument("boot_phase_durations: invalid flavor");
    PhaseDurations d;
    d.claim = c.claim;
    d.download = image_local ? 0 : -1;  // resolved by the transfer module
    d.duplication = cow ? c.cow : disk_seconds(image.size_bytes, node.disk_bandwidth());
    d.resize = c.resize;
    if (flavor.ephemeral_bytes == 0) {
        d.ephemeral = 0;
    } else {
        d.ephemeral =
            cow ? c.cow : disk_seconds(flavor.ephemeral_bytes, node.disk_bandwidth());
    }
    d.injection = c.inject;
    d.netconfig = c.net;
    return d;
}

}  // namespace imgsim
