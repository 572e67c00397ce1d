#include "edgeplan/offload.hpp"

#include <sstream>

namespace edgeplan {

std::string scheme_name(const Scheme& s) {
    switch (s.variant) {
        case SchemeVariant::ClientOnly: return "client_only";
        case SchemeVariant::EdgeOnlyLossless: return "edge_lossless";
        case SchemeVariant::EdgeOnlyLossy: return "edge_lossy";
        case SchemeVariant::CoInference: return "co_inference";
        case SchemeVariant::CloudOnly: return "cloud_only";
    }
    return "client_only";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "client_only") return Scheme::client_only();
    if (name == "edge_lossless") return Scheme::edge_lossless();
    if (name == "edge_lossy") return Scheme::edge_lossy();
    if (name == "co_inference") return Scheme::co_inference(0);
    if (name == "cloud_only") return Scheme::cloud_only();
    if (name.rfind("edge_lossy:", 0) == 0) return Scheme::edge_lossy(std::stod(name.substr(11)));
    if (name.rfind("co_inference:", 0) == 0) return Scheme::co_inference(std::stoi(name.substr(13)));
    throw UsageError("unknown scheme " + name);
}

double transfer_time(double bytes, const LinkProfile& link) {
    return bytes / link.rate + link.propagation_delay;
}

double compute_time(double flops, const DeviceProfile& device) {
    return flops / device.throughput;
}

static LatencyBreakdown finish(LatencyBreakdown b) {
    b.total = b.planning + b.upload + b.client_compute + b.edge_compute + b.cloud_compute + b.download;
    return b;
}

LatencyBreakdown scheme_latency(const ModelManifest& manifest, const Scheme& scheme, const Scenario& scenario) {
    const auto& client = scenario.device_for(DeviceTier::Client);
    const auto& up = scenario.link("client_edge_up");
    const auto& down = scenario.link("client_edge_down");

    LatencyBreakdown b;
    b.planning = scenario.planning_latency_s;
    const double total_flops = static_cast<double>(manifest.total_flops());
    const double result_bytes = static_cast<double>(manifest.result_bytes());

    switch (scheme.variant) {
        case SchemeVariant::ClientOnly:
            // Result is already local; no transfers at all.
            b.client_compute = compute_time(total_flops, client);
            break;
        case SchemeVariant::EdgeOnlyLossless:
            b.upload = transfer_time(static_cast<double>(manifest.input_bytes), up);
            b.edge_compute = compute_time(total_flops, scenario.device_for(DeviceTier::Edge));
            b.download = transfer_time(result_bytes, down);
            break;
        case SchemeVariant::EdgeOnlyLossy:
            b.upload = transfer_time(static_cast<double>(manifest.input_bytes) / scheme.compression_ratio, up);
            b.edge_compute = compute_time(total_flops, scenario.device_for(DeviceTier::Edge));
            b.download = transfer_time(result_bytes, down);
            break;
        case SchemeVariant::CoInference: {
            const int n_layers = static_cast<int>(manifest.layers.size());
            if (scheme.split < 0 || scheme.split > n_layers) throw InvalidSplit(scheme.split, n_layers);
            double client_flops = 0.0;
            for (int i = 0; i < scheme.split; ++i)
                client_flops += static_cast<double>(manifest.layers[static_cast<std::size_t>(i)].flops);
            b.client_compute = compute_time(client_flops, client);
            b.upload = transfer_time(static_cast<double>(manifest.feature_bytes_at_split(scheme.split)), up);
            b.edge_compute = compute_time(total_flops - client_flops, scenario.device_for(DeviceTier::Edge));
            b.download = transfer_time(result_bytes, down);
            break;
        }
        case SchemeVariant::CloudOnly: {
            const auto& cloud_up = scenario.link("edge_cloud_up");
            const auto& cloud_down = scenario.link("edge_cloud_down");
            b.upload = transfer_time(static_cast<double>(manifest.input_bytes), up) +
                       transfer_time(static_cast<double>(manifest.input_bytes), cloud_up);
            b.cloud_compute = compute_time(total_flops, scenario.device_for(DeviceTier::Cloud));
            b.download = transfer_time(result_bytes, cloud_down) + transfer_time(result_bytes, down);
            break;
        }
    }
    return finish(b);
}

PartitionDecision best_partition(const ModelManifest& manifest, const Scenario& scenario) {
    const int n_layers = static_cast<int>(manifest.layers.size());
    PartitionDecision best;
    best.split = 0;
    best.latency = scheme_latency(manifest, Scheme::co_inference(0), scenario);
    for (int s = 1; s <= n_layers; ++s) {
        LatencyBreakdown cand = scheme_latency(manifest, Scheme::co_inference(s), scenario);
        if (cand.total < best.latency.total) {
            best.split = s;
            best.latency = cand;
        }
    }
    return best;
}

std::vector<SweepRow> latency_sweep(const ModelManifest& manifest, const Scenario& scenario,
                                    const std::vector<Scheme>& schemes, const std::vector<double>& rates) {
    std::vector<SweepRow> rows;
    for (double rate : rates) {
        Scenario local = scenario;
        local.links["client_edge_up"].rate = rate;
        for (const Scheme& scheme : schemes) {
            SweepRow row;
            row.rate = rate;
            if (scheme.variant == SchemeVariant::CoInference) {
                PartitionDecision d = best_partition(manifest, local);
                row.scheme = Scheme::co_inference(d.split);
                row.latency = d.latency;
            } else {
                row.scheme = scheme;
                row.latency = scheme_latency(manifest, scheme, local);
            }
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace edgeplan
