#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "imgsim/domain.hpp"
#include "imgsim/network.hpp"
#include "imgsim/rng.hpp"

namespace imgsim {

enum class ProtocolKind { Central, Swarm, Shared };
const char* protocol_kind_name(ProtocolKind k);
ProtocolKind protocol_kind_from_string(const std::string& s);

struct ProtocolConfig {
    ProtocolKind kind = ProtocolKind::Central;
    std::string label;  // which real-world method the scenario claims (http/ftp/bittorrent)
    int max_active_image_downloads_per_node = 3;
    int max_concurrent_uploads_per_peer = 4;
    int piece_parallelism = 4;  // concurrent piece transfers per (node, image)
    SimTime publish_delay = 0;  // per-image swarm availability delay
    std::int64_t cache_budget_bytes = 0;  // 0 = unbounded
};

struct InsufficientDiskError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class EnsureResult { Cached, Attached, Started, SharedAvailable };

/// Image delivery on top of the flow network: central unicast, BitTorrent-style
/// swarm with rarest-first piece selection, or shared-storage null transfer.
/// Owns per-node cache admission (LRU eviction) and per-(node, image) fetch
/// tickets so concurrent requests coalesce into one transfer.
class TransferManager {
public:
    using ReadyCallback = std::function<void()>;

    TransferManager(Engine& engine, FlowNetwork& net, Catalog& catalog,
                    std::vector<ComputeNode>& nodes, ProtocolConfig cfg,
                    std::uint64_t seed);

    /// Make image available on the node; cb runs at availability (synchronously
    /// when already cached or under the shared protocol). Throws
    /// InsufficientDiskError when the image cannot fit even after eviction.
    EnsureResult ensure_image(int node_id, const std::string& image_id, ReadyCallback cb);

    bool image_available(int node_id, const std::string& image_id) const;
    bool fetch_in_flight(int node_id, const std::string& image_id) const;

    /// Instantly place an image in the node cache (warm-cache scenarios).
    void prime_cache(int node_id, const std::string& image_id);

    /// LRU eviction until `incoming_bytes` fits both the disk and the cache
    /// budget. Pinned (in-flight) images are never evicted. Returns the
    /// evicted image ids; throws when the image cannot fit at all.
    std::vector<std::string> evict_if_needed(int node_id, std::int64_t incoming_bytes);

    const std::map<std::string, std::int64_t>& cold_fetches() const { return cold_fetches_; }
    std::int64_t cold_fetch_count(const std::string& image_id) const;
    std::int64_t total_cold_fetches() const;
    std::int64_t catalog_egress_bytes() const;
    ProtocolKind kind() const { return cfg_.kind; }
    const ProtocolConfig& config() const { return cfg_; }

private:
    struct Ticket {
        SimTime requested_at = 0;
        std::vector<ReadyCallback> callbacks;
    };
    struct PieceDownload {
        std::vector<char> have;
        int have_count = 0;
        std::set<int> in_flight;
        int active_flows = 0;
    };
    struct SwarmImage {
        std::set<Endpoint> seeds;  // complete holders, catalog included
        std::map<int, PieceDownload> leechers;
        std::vector<int> availability;  // holders per piece across the swarm
    };
    struct NodeDownloads {
        int active = 0;
        std::deque<std::string> queue;
    };

    void start_central(int node_id, const std::string& image_id);
    void activate_swarm(int node_id, const std::string& image_id);
    SwarmImage& swarm_for(const std::string& image_id);
    void pump_leecher(const std::string& image_id, int node_id);
    void pump_peer_images(Endpoint peer);
    void on_piece_complete(const std::string& image_id, int node_id, int piece,
                           Endpoint holder);
    void finish_fetch(int node_id, const std::string& image_id);
    void reserve_or_throw(int node_id, const std::string& image_id);
    bool holder_has_piece(const SwarmImage& sw, Endpoint holder, int piece) const;

    Engine& engine_;
    FlowNetwork& net_;
    Catalog& catalog_;
    std::vector<ComputeNode>& nodes_;
    ProtocolConfig cfg_;
    RngStream piece_rng_;
    Endpoint catalog_ep_;

    std::map<std::pair<int, std::string>, Ticket> tickets_;
    std::map<std::string, SwarmImage> swarms_;
    std::map<Endpoint, int> uploads_active_;
    std::map<Endpoint, std::set<std::string>> participation_;
    std::vector<NodeDownloads> node_dl_;
    std::map<std::string, std::int64_t> cold_fetches_;
};

}  // namespace imgsim
