#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "edgeplan/types.hpp"

namespace edgeplan {

struct FeatureVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

struct CodecConfig {
    int kept_dims = 0;
    int n_bins = 2;
    double clip_lo = -1.0;
    double clip_hi = 1.0;

    bool operator==(const CodecConfig&) const = default;
};

// Uniform mid-rise quantizer over [clip_lo, clip_hi) with n_bins cells.
// Out-of-range values are clipped; dequantize returns cell centers.
std::vector<int> quantize(const std::vector<double>& values, const CodecConfig& cfg);
std::vector<double> dequantize(const std::vector<int>& symbols, const CodecConfig& cfg);

// Shannon entropy of the observed symbol frequencies, bits/symbol.
double empirical_entropy(const std::vector<int>& symbols);

// ---------------------------------------------------------------------------
// Entropy coding: integer arithmetic coder over a shared frequency model.
// The model travels out of band (both ends hold the table); the bitstream
// carries only coded symbols plus the coder's termination bits.

struct Bitstream {
    std::vector<std::uint8_t> bytes;
    std::uint64_t n_bits = 0;
};

class FrequencyTable {
public:
    // counts[i] = occurrences of symbol i; add-1 smoothing (on by default)
    // gives every alphabet symbol nonzero coding mass so decode never fails.
    FrequencyTable(std::vector<std::uint64_t> counts, bool smoothing = true);

    static FrequencyTable from_symbols(const std::vector<int>& symbols, int alphabet_size,
                                       bool smoothing = true);

    int alphabet_size() const { return static_cast<int>(cum_.size()) - 1; }
    std::uint64_t total() const { return cum_.back(); }
    std::uint64_t coding_count(int sym) const { return cum_[static_cast<std::size_t>(sym) + 1] - cum_[static_cast<std::size_t>(sym)]; }
    std::uint64_t cum_below(int sym) const { return cum_[static_cast<std::size_t>(sym)]; }
    int find(std::uint64_t scaled) const; // symbol whose cumulative interval contains scaled

private:
    std::vector<std::uint64_t> cum_; // size A+1
};

Bitstream entropy_encode(const std::vector<int>& symbols, const FrequencyTable& model);
std::vector<int> entropy_decode(const Bitstream& bits, const FrequencyTable& model, std::size_t n);

// Indices of the k largest relevance scores, in ascending index order;
// ties go to the smaller index.
std::pair<std::vector<std::size_t>, std::vector<double>> select_relevant(const std::vector<double>& values,
                                                                         const std::vector<double>& relevance,
                                                                         std::size_t k);

// ---------------------------------------------------------------------------
// Synthetic prediction task: labels depend on 8 designated dims out of 64,
// through a fixed linear rule plus noise. Stands in for the trained
// task heads that the compression objective is evaluated against.

struct SyntheticTask {
    std::size_t dim = 64;
    std::size_t n_relevant = 8;
    std::vector<double> weights;               // zero outside the relevant dims
    std::vector<std::vector<double>> features; // held-out evaluation set
    std::vector<int> labels;

    std::vector<double> relevance() const; // |weight| per dimension

    int predict(const std::vector<double>& x) const;
    double error_rate(const std::vector<int>& predictions) const;
};

SyntheticTask make_synthetic_task(std::uint64_t seed, std::size_t n_examples = 512);

struct TradeoffPoint {
    double beta = 0.0;
    double rate_bits = 0.0; // measured bits per example
    double task_loss = 0.0;
    CodecConfig config;
};

// Rate and loss of one codec configuration on the task's held-out set.
std::pair<double, double> evaluate_codec(const SyntheticTask& task, const CodecConfig& cfg);

// For each beta, the grid config minimizing task_loss + beta * rate_bits;
// ties go to the lower rate.
std::vector<TradeoffPoint> tradeoff_sweep(const SyntheticTask& task, const std::vector<double>& betas,
                                          const std::vector<CodecConfig>& grid);

} // namespace edgeplan
