#include "imgsim/transfer.hpp"

#include <algorithm>

namespace imgsim {

const char* protocol_kind_name(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::Central: return "central";
        case ProtocolKind::Swarm: return "swarm";
        case ProtocolKind::Shared: return "shared";
    }
    return "?";
}

ProtocolKind protocol_kind_from_string(const std::string& s) {
    if (s == "central") return ProtocolKind::Central;
    if (s == "swarm") return ProtocolKind::Swarm;
    if (s == "shared") return ProtocolKind::Shared;
    throw std::invalid_argument("unknown protocol kind: " + s);
}

TransferManager::TransferManager(Engine& engine, FlowNetwork& net, Catalog& catalog,
                                 std::vector<ComputeNode>& nodes, ProtocolConfig cfg,
                                 std::uint64_t seed)
    : engine_(engine),
      net_(net),
      catalog_(catalog),
      nodes_(nodes),
      cfg_(std::move(cfg)),
      piece_rng_(seed, "piece-selection"),
      catalog_ep_(net.topology().catalog()),
      node_dl_(nodes.size()) {
    if (cfg_.max_active_image_downloads_per_node <= 0 ||
        cfg_.max_concurrent_uploads_per_peer <= 0 || cfg_.piece_parallelism <= 0)
        throw std::invalid_argument("protocol parameters must be positive");
}

bool TransferManager::image_available(int node_id, const std::string& image_id) const {
    if (cfg_.kind == ProtocolKind::Shared) return catalog_.has(image_id);
    return nodes_.at(node_id).has_cached(image_id);
}

bool TransferManager::fetch_in_flight(int node_id, const std::string& image_id) const {
    return tickets_.count({node_id, image_id}) > 0;
}

std::int64_t TransferManager::cold_fetch_count(const std::string& image_id) const {
    auto it = cold_fetches_.find(image_id);
    return it == cold_fetches_.end() ? 0 : it->second;
}

std::int64_t TransferManager::total_cold_fetches() const {
    std::int64_t n = 0;
    for (const auto& [id, c] : cold_fetches_) n += c;
    return n;
}

std::int64_t TransferManager::catalog_egress_bytes() const {
    return net_.endpoint_egress_bytes(catalog_ep_);
}

std::vector<std::string> TransferManager::evict_if_needed(int node_id,
                                                          std::int64_t incoming_bytes) {
    ComputeNode& node = nodes_.at(node_id);
    std::vector<std::string> evicted;
    auto fits = [&] {
        if (incoming_bytes > node.disk_free()) return false;
        if (cfg_.cache_budget_bytes > 0 &&
            node.cache_bytes() + incoming_bytes > cfg_.cache_budget_bytes)
            return false;
        return true;
    };
    while (!fits()) {
        // LRU victim among unpinned entries; ties by image id.
        const std::string* victim = nullptr;
        SimTime oldest = 0;
        for (const auto& [id, e] : node.cache()) {
            if (e.pinned) continue;
            if (!victim || e.last_used < oldest) {
                victim = &id;
                oldest = e.last_used;
            }
        }
        if (!victim) {
            throw InsufficientDiskError("node" + std::to_string(node_id) +
                                        ": image of " + std::to_string(incoming_bytes) +
                                        " bytes cannot fit even after eviction");
        }
        std::string victim_id = *victim;
        node.evict(victim_id);
        // An evicted image stops seeding.
        auto sit = swarms_.find(victim_id);
        if (sit != swarms_.end()) {
            sit->second.seeds.erase(node_id);
            for (auto& a : sit->second.availability) a -= 1;
            participation_[node_id].erase(victim_id);
        }
        evicted.push_back(std::move(victim_id));
    }
    return evicted;
}

void TransferManager::reserve_or_throw(int node_id, const std::string& image_id) {
    const ImageSpec& img = catalog_.get(image_id);
    evict_if_needed(node_id, img.size_bytes);
    nodes_.at(node_id).reserve_cache_space(image_id, img.size_bytes, engine_.now());
}

EnsureResult TransferManager::ensure_image(int node_id, const std::string& image_id,
                                           ReadyCallback cb) {
    if (!catalog_.has(image_id)) throw std::out_of_range("unknown image: " + image_id);
    if (cfg_.kind == ProtocolKind::Shared) {
        if (cb) cb();
        return EnsureResult::SharedAvailable;
    }
    ComputeNode& node = nodes_.at(node_id);
    if (node.has_cached(image_id)) {
        node.touch_cache(image_id, engine_.now());
        if (cb) cb();
        return EnsureResult::Cached;
    }
    auto key = std::make_pair(node_id, image_id);
    auto it = tickets_.find(key);
    if (it != tickets_.end()) {
        if (cb) it->second.callbacks.push_back(std::move(cb));
        return EnsureResult::Attached;
    }
    reserve_or_throw(node_id, image_id);
    Ticket t;
    t.requested_at = engine_.now();
    if (cb) t.callbacks.push_back(std::move(cb));
    tickets_.emplace(key, std::move(t));
    ++cold_fetches_[image_id];

    if (cfg_.kind == ProtocolKind::Central) {
        start_central(node_id, image_id);
    } else {
        NodeDownloads& dl = node_dl_.at(node_id);
        if (dl.active < cfg_.max_active_image_downloads_per_node) {
            ++dl.active;
            activate_swarm(node_id, image_id);
        } else {
            dl.queue.push_back(image_id);
        }
    }
    return EnsureResult::Started;
}

void TransferManager::start_central(int node_id, const std::string& image_id) {
    const ImageSpec& img = catalog_.get(image_id);
    net_.start_flow(catalog_ep_, node_id, img.size_bytes,
                    [this, node_id, image_id](FlowId) { finish_fetch(node_id, image_id); });
}

TransferManager::SwarmImage& TransferManager::swarm_for(const std::string& image_id) {
    auto it = swarms_.find(image_id);
    if (it == swarms_.end()) {
        const ImageSpec& img = catalog_.get(image_id);
        SwarmImage sw;
        sw.seeds.insert(catalog_ep_);
        sw.availability.assign(img.piece_count(), 1);
        it = swarms_.emplace(image_id, std::move(sw)).first;
        participation_[catalog_ep_].insert(image_id);
    }
    return it->second;
}

void TransferManager::activate_swarm(int node_id, const std::string& image_id) {
    if (engine_.now() < cfg_.publish_delay) {
        engine_.schedule(cfg_.publish_delay, EventKind::RateRecompute,
                         "publish:" + image_id,
                         [this, node_id, image_id] { activate_swarm(node_id, image_id); });
        return;
    }
    const ImageSpec& img = catalog_.get(image_id);
    SwarmImage& sw = swarm_for(image_id);
    PieceDownload dl;
    dl.have.assign(img.piece_count(), 0);
    sw.leechers.emplace(node_id, std::move(dl));
    participation_[node_id].insert(image_id);
    pump_leecher(image_id, node_id);
}

bool TransferManager::holder_has_piece(const SwarmImage& sw, Endpoint holder,
                                       int piece) const {
    if (sw.seeds.count(holder)) return true;
    auto it = sw.leechers.find(holder);
    return it != sw.leechers.end() && it->second.have[piece];
}

void TransferManager::pump_leecher(const std::string& image_id, int node_id) {
    auto sit = swarms_.find(image_id);
    if (sit == swarms_.end()) return;
    SwarmImage& sw = sit->second;
    auto lit = sw.leechers.find(node_id);
    if (lit == sw.leechers.end()) return;
    PieceDownload& dl = lit->second;
    const ImageSpec& img = catalog_.get(image_id);

    while (dl.active_flows < cfg_.piece_parallelism) {
        std::vector<Endpoint> free_holders;
        for (Endpoint s : sw.seeds) {
            if (s != node_id && uploads_active_[s] < cfg_.max_concurrent_uploads_per_peer)
                free_holders.push_back(s);
        }
        for (const auto& [peer, pdl] : sw.leechers) {
            if (peer != node_id && pdl.have_count > 0 &&
                uploads_active_[peer] < cfg_.max_concurrent_uploads_per_peer)
                free_holders.push_back(peer);
        }
        if (free_holders.empty()) break;

        // Rarest needed piece that some free-slot holder can serve; ties broken
        // by the seeded piece-selection stream.
        int best_avail = INT32_MAX;
        std::vector<int> tied;
        for (int p = 0; p < img.piece_count(); ++p) {
            if (dl.have[p] || dl.in_flight.count(p)) continue;
            if (sw.availability[p] > best_avail) continue;
            bool servable = false;
            for (Endpoint h : free_holders) {
                if (holder_has_piece(sw, h, p)) {
                    servable = true;
                    break;
                }
            }
            if (!servable) continue;
            if (sw.availability[p] < best_avail) {
                best_avail = sw.availability[p];
                tied.clear();
            }
            tied.push_back(p);
        }
        if (tied.empty()) break;
        const int piece = tied[piece_rng_.next_below(tied.size())];

        std::vector<Endpoint> servers;
        for (Endpoint h : free_holders) {
            if (holder_has_piece(sw, h, piece)) servers.push_back(h);
        }
        const Endpoint holder = servers[piece_rng_.next_below(servers.size())];

        ++uploads_active_[holder];
        ++dl.active_flows;
        dl.in_flight.insert(piece);
        net_.start_flow(holder, node_id, img.piece_bytes(piece),
                        [this, image_id, node_id, piece, holder](FlowId) {
                            on_piece_complete(image_id, node_id, piece, holder);
                        });
    }
}

void TransferManager::pump_peer_images(Endpoint peer) {
    auto pit = participation_.find(peer);
    if (pit == participation_.end()) return;
    const std::set<std::string> images = pit->second;  // copy: pumping mutates
    for (const auto& image_id : images) {
        auto sit = swarms_.find(image_id);
        if (sit == swarms_.end()) continue;
        std::vector<int> leechers;
        for (const auto& [n, dl] : sit->second.leechers) leechers.push_back(n);
        for (int n : leechers) pump_leecher(image_id, n);
    }
}

void TransferManager::on_piece_complete(const std::string& image_id, int node_id,
                                        int piece, Endpoint holder) {
    SwarmImage& sw = swarms_.at(image_id);
    PieceDownload& dl = sw.leechers.at(node_id);
    --uploads_active_[holder];
    --dl.active_flows;
    dl.in_flight.erase(piece);
    dl.have[piece] = 1;
    ++dl.have_count;
    ++sw.availability[piece];

    const ImageSpec& img = catalog_.get(image_id);
    if (dl.have_count == img.piece_count()) {
        // Leecher becomes a seed and keeps seeding for the rest of the run.
        sw.leechers.erase(node_id);
        sw.seeds.insert(node_id);
        NodeDownloads& ndl = node_dl_.at(node_id);
        --ndl.active;
        if (!ndl.queue.empty() && ndl.active < cfg_.max_active_image_downloads_per_node) {
            std::string next = std::move(ndl.queue.front());
            ndl.queue.pop_front();
            ++ndl.active;
            activate_swarm(node_id, next);
        }
        finish_fetch(node_id, image_id);
    }
    // New piece availability plus freed slots can unblock peers.
    std::vector<int> leechers;
    for (const auto& [n, d] : sw.leechers) leechers.push_back(n);
    for (int n : leechers) pump_leecher(image_id, n);
    pump_peer_images(holder);
}

void TransferManager::finish_fetch(int node_id, const std::string& image_id) {
    nodes_.at(node_id).commit_cache(image_id, engine_.now());
    auto key = std::make_pair(node_id, image_id);
    auto it = tickets_.find(key);
    if (it == tickets_.end()) throw std::logic_error("finish_fetch: no ticket");
    auto callbacks = std::move(it->second.callbacks);
    tickets_.erase(it);
    for (auto& cb : callbacks) cb();
}

void TransferManager::prime_cache(int node_id, const std::string& image_id) {
    const ImageSpec& img = catalog_.get(image_id);
    ComputeNode& node = nodes_.at(node_id);
    if (node.has_cached(image_id)) return;
    evict_if_needed(node_id, img.size_bytes);
    if (!node.reserve_cache_space(image_id, img.size_bytes, engine_.now()))
        throw InsufficientDiskError("prime_cache: no space on node" +
                                    std::to_string(node_id));
    node.commit_cache(image_id, engine_.now());
    if (cfg_.kind == ProtocolKind::Swarm) {
        SwarmImage& sw = swarm_for(image_id);
        if (sw.seeds.insert(node_id).second) {
            for (auto& a : sw.availability) a += 1;
            participation_[node_id].insert(image_id);
        }
    }
}

}  // namespace imgsim
