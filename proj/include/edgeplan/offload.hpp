#pragma once

#include <string>
#include <vector>

#include "edgeplan/types.hpp"

namespace edgeplan {

enum class SchemeVariant { ClientOnly, EdgeOnlyLossless, EdgeOnlyLossy, CoInference, CloudOnly };

struct Scheme {
    SchemeVariant variant = SchemeVariant::ClientOnly;
    double compression_ratio = 6.6; // EdgeOnlyLossy; > 1
    int split = 0;                  // CoInference; in [0, L]

    static Scheme client_only() { return {SchemeVariant::ClientOnly}; }
    static Scheme edge_lossless() { return {SchemeVariant::EdgeOnlyLossless}; }
    static Scheme edge_lossy(double ratio = 6.6) { return {SchemeVariant::EdgeOnlyLossy, ratio}; }
    static Scheme co_inference(int split) { return {SchemeVariant::CoInference, 6.6, split}; }
    static Scheme cloud_only() { return {SchemeVariant::CloudOnly}; }
};

std::string scheme_name(const Scheme& s);
Scheme scheme_from_name(const std::string& name);

struct LatencyBreakdown {
    double planning = 0.0;
    double upload = 0.0;
    double client_compute = 0.0;
    double edge_compute = 0.0;
    double cloud_compute = 0.0;
    double download = 0.0;
    double total = 0.0; // planning + upload + client + edge + cloud + download, summed in that order
};

struct PartitionDecision {
    int split = 0;
    LatencyBreakdown latency;
};

double transfer_time(double bytes, const LinkProfile& link);
double compute_time(double flops, const DeviceProfile& device);

LatencyBreakdown scheme_latency(const ModelManifest& manifest, const Scheme& scheme, const Scenario& scenario);

// Exhaustive search over splits 0..L; ties broken toward the smaller split.
PartitionDecision best_partition(const ModelManifest& manifest, const Scenario& scenario);

struct SweepRow {
    double rate = 0.0; // client_edge_up rate override, bytes/s
    Scheme scheme;
    LatencyBreakdown latency;
};

// For each rate, overrides the client_edge_up rate and evaluates every scheme;
// CoInference re-optimizes the split per rate. Rows in (rate, scheme) order.
std::vector<SweepRow> latency_sweep(const ModelManifest& manifest, const Scenario& scenario,
                                    const std::vector<Scheme>& schemes, const std::vector<double>& rates);

} // namespace edgeplan
