#!/usr/bin/env python3
"""Regenerates the built-in scenario files. Run from this directory."""
import json

GIB = 1 << 30

def base(name, images, protocol, label, weighers, workload, **over):
    s = {
        "name": name,
        "seed": 42,
        "topology": {
            "node_count": 24,
            "switch_groups": 2,
            "node_nic_bytes_per_s": 125000000,
            "catalog_nic_bytes_per_s": 125000000,
            "trunk_bytes_per_s": 1250000000,
        },
        "node": {
            "vcpus": 8,
            "ram_bytes": 16 * GIB,
            "disk_bytes": 140000000000,
            "disk_bandwidth_bytes_per_s": 100000000,
        },
        "images": [
            {"id": i, "size_bytes": 5000000000, "piece_size_bytes": 32 * 1024 * 1024}
            for i in images
        ],
        "protocol": {
            "kind": protocol,
            "label": label,
            "max_active_image_downloads_per_node": 3,
            "max_concurrent_uploads_per_peer": 4,
            "piece_parallelism": 4,
            "publish_delay_seconds": 0.0,
            "cache_budget_bytes": 0,
        },
        "scheduler": {
            "weighers": weighers,
            "count_inflight_as_cached": False,
        },
        "phases": {
            "claim_seconds": 1.0,
            "cow_seconds": 1.0,
            "resize_seconds": 2.0,
            "inject_seconds": 2.0,
            "net_seconds": 2.0,
        },
        "cow": True,
        "pre_cache_all": False,
        "flavor": {
            "vcpus": 1,
            "ram_bytes": 2 * GIB,
            "root_disk_bytes": 10000000000,
            "ephemeral_bytes": 0,
        },
        "workload": workload,
        "prefetch": {"kind": "none", "k": 1, "node_fraction": 1.0,
                     "period_seconds": 60.0},
    }
    for k, v in over.items():
        if isinstance(v, dict):
            s[k].update(v)
        else:
            s[k] = v
    return s

CACHE = [{"name": "cache", "multiplier": 16.0}, {"name": "free_ram", "multiplier": 1.0}]
NOCACHE = [{"name": "free_ram", "multiplier": 1.0}]

out = {}

# Table 1 batch rows: N requests of 192/N machines, one image per request.
for n_req, vms in [(1, 192), (2, 96), (4, 48), (8, 24)]:
    images = [f"img{i+1}" for i in range(n_req)]
    wl = {"kind": "batch", "groups": [[img, vms] for img in images]}
    for proto, label in [("central", "http"), ("swarm", "bittorrent")]:
        name = f"table1-{n_req}x{vms}-{proto}"
        out[name] = base(name, images, proto, label, NOCACHE, wl)

# Warm-cache batches: same requests with every image already cached.
for n_req, vms in [(1, 192), (2, 96), (4, 48), (8, 24)]:
    images = [f"img{i+1}" for i in range(n_req)]
    wl = {"kind": "batch", "groups": [[img, vms] for img in images]}
    name = f"warmcache-{n_req}x{vms}"
    out[name] = base(name, images, "central", "http", NOCACHE, wl, pre_cache_all=True)

# Trace scenarios: Poisson arrivals over 4 images, four scheduler/protocol combos.
for rate in (80, 100):
    images = [f"img{i+1}" for i in range(4)]
    wl = {
        "kind": "poisson",
        "rate_per_hour": float(rate),
        "duration_seconds": 3600.0,
        "images": images,
        "choice": "uniform",
        "zipf_s": 1.0,
    }
    for sched, weighers in [("cache", CACHE), ("nocache", NOCACHE)]:
        for proto, label in [("central", "http"), ("swarm", "bittorrent")]:
            name = f"trace-{rate}-{sched}-{proto}"
            out[name] = base(name, images, proto, label, weighers, wl)

# Single-cold-fetch demonstration: cache-aware scheduler that also counts
# in-flight fetches, on hosts large enough that capacity never filters.
images = [f"img{i+1}" for i in range(4)]
wl = {
    "kind": "poisson",
    "rate_per_hour": 80.0,
    "duration_seconds": 3600.0,
    "images": images,
    "choice": "uniform",
    "zipf_s": 1.0,
}
name = "trace-80-singlefetch"
out[name] = base(
    name, images, "central", "http", CACHE, wl,
    node={"vcpus": 96, "ram_bytes": 256 * GIB, "disk_bytes": 2000000000000},
    scheduler={"count_inflight_as_cached": True},
)

for name, s in out.items():
    with open(f"{name}.json", "w") as f:
        json.dump(s, f, indent=2)
        f.write("\n")
print(f"wrote {len(out)} scenarios")
