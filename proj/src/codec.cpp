#include "edgeplan/codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "edgeplan/rng.hpp"

namespace edgeplan {

// ---------------------------------------------------------------------------
// Quantizer

std::vector<int> quantize(const std::vector<double>& values, const CodecConfig& cfg) {
    const double lo = cfg.clip_lo;
    const double hi = cfg.clip_hi;
    const double cell = (hi - lo) / cfg.n_bins;
    std::vector<int> out;
    out.reserve(values.size());
    for (double v : values) {
        double c = std::min(std::max(v, lo), hi);
        int sym = static_cast<int>(std::floor((c - lo) / cell));
        sym = std::min(std::max(sym, 0), cfg.n_bins - 1);
        out.push_back(sym);
    }
    return out;
}

std::vector<double> dequantize(const std::vector<int>& symbols, const CodecConfig& cfg) {
    const double lo = cfg.clip_lo;
    const double cell = (cfg.clip_hi - lo) / cfg.n_bins;
    std::vector<double> out;
    out.reserve(symbols.size());
    for (int s : symbols) out.push_back(lo + (s + 0.5) * cell);
    return out;
}

double empirical_entropy(const std::vector<int>& symbols) {
    if (symbols.empty()) throw EmptyInput();
    std::map<int, std::uint64_t> counts;
    for (int s : symbols) ++counts[s];
    const double n = static_cast<double>(symbols.size());
    double h = 0.0;
    for (const auto& [sym, c] : counts) {
        double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Frequency model

FrequencyTable::FrequencyTable(std::vector<std::uint64_t> counts, bool smoothing) {
    if (counts.empty()) throw ValidationError("frequency_table", "empty alphabet");
    cum_.assign(counts.size() + 1, 0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::uint64_t c = counts[i] + (smoothing ? 1 : 0);
        cum_[i + 1] = cum_[i] + c;
    }
    if (cum_.back() == 0) throw ValidationError("frequency_table", "all counts zero with smoothing disabled");
    // Coder precision: total frequency must stay well below the coder range.
    if (cum_.back() >= (1ULL << 40)) throw ValidationError("frequency_table", "total frequency too large");
}

FrequencyTable FrequencyTable::from_symbols(const std::vector<int>& symbols, int alphabet_size, bool smoothing) {
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(alphabet_size), 0);
    for (int s : symbols) {
        if (s < 0 || s >= alphabet_size) throw UnknownSymbol(s);
        ++counts[static_cast<std::size_t>(s)];
    }
    return FrequencyTable(std::move(counts), smoothing);
}

int FrequencyTable::find(std::uint64_t scaled) const {
    auto it = std::upper_bound(cum_.begin(), cum_.end(), scaled);
    return static_cast<int>(it - cum_.begin()) - 1;
}

// ---------------------------------------------------------------------------
// Arithmetic coder (integer interval coder with E1/E2/E3 rescaling, 62-bit
// precision, bit-oriented output).

namespace {

constexpr std::uint64_t kWhole = 1ULL << 62;
constexpr std::uint64_t kHalf = kWhole / 2;
constexpr std::uint64_t kQuarter = kWhole / 4;

class BitWriter {
public:
    void push(int bit) {
        if ((n_bits_ & 7) == 0) bytes_.push_back(0);
        if (bit) bytes_.back() |= static_cast<std::uint8_t>(1u << (7 - (n_bits_ & 7)));
        ++n_bits_;
    }
    Bitstream take() { return Bitstream{std::move(bytes_), n_bits_}; }

private:
    std::vector<std::uint8_t> bytes_;
    std::uint64_t n_bits_ = 0;
};

class BitReader {
public:
    explicit BitReader(const Bitstream& bs) : bs_(bs) {}
    // Reads past the end return 0; the coder's final interval tolerates it.
    int next() {
        if (pos_ >= bs_.n_bits) return 0;
        int bit = (bs_.bytes[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
        ++pos_;
        return bit;
    }

private:
    const Bitstream& bs_;
    std::uint64_t pos_ = 0;
};

} // namespace

Bitstream entropy_encode(const std::vector<int>& symbols, const FrequencyTable& model) {
    BitWriter out;
    std::uint64_t low = 0;
    std::uint64_t high = kWhole - 1;
    std::uint64_t pending = 0;

    auto emit = [&](int bit) {
        out.push(bit);
        for (; pending > 0; --pending) out.push(!bit);
    };

    const std::uint64_t tot = model.total();
    for (int sym : symbols) {
        if (sym < 0 || sym >= model.alphabet_size()) throw UnknownSymbol(sym);
        const std::uint64_t freq = model.coding_count(sym);
        if (freq == 0) throw UnknownSymbol(sym);
        const std::uint64_t cum = model.cum_below(sym);
        const unsigned __int128 range = static_cast<unsigned __int128>(high) - low + 1;
        high = low + static_cast<std::uint64_t>(range * (cum + freq) / tot) - 1;
        low = low + static_cast<std::uint64_t>(range * cum / tot);
        while (true) {
            if (high < kHalf) {
                emit(0);
            } else if (low >= kHalf) {
                emit(1);
                low -= kHalf;
                high -= kHalf;
            } else if (low >= kQuarter && high < kHalf + kQuarter) {
                ++pending;
                low -= kQuarter;
                high -= kQuarter;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
        }
    }
    // Termination: two bits pin the final interval.
    ++pending;
    emit(low < kQuarter ? 0 : 1);
    return out.take();
}

std::vector<int> entropy_decode(const Bitstream& bits, const FrequencyTable& model, std::size_t n) {
    BitReader in(bits);
    std::uint64_t low = 0;
    std::uint64_t high = kWhole - 1;
    std::uint64_t code = 0;
    for (int i = 0; i < 62; ++i) code = (code << 1) | static_cast<std::uint64_t>(in.next());

    const std::uint64_t tot = model.total();
    std::vector<int> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned __int128 range = static_cast<unsigned __int128>(high) - low + 1;
        const std::uint64_t scaled =
            static_cast<std::uint64_t>(((static_cast<unsigned __int128>(code - low) + 1) * tot - 1) / range);
        const int sym = model.find(scaled);
        out.push_back(sym);
        const std::uint64_t freq = model.coding_count(sym);
        const std::uint64_t cum = model.cum_below(sym);
        high = low + static_cast<std::uint64_t>(range * (cum + freq) / tot) - 1;
        low = low + static_cast<std::uint64_t>(range * cum / tot);
        while (true) {
            if (high < kHalf) {
                // nothing
            } else if (low >= kHalf) {
                low -= kHalf;
                high -= kHalf;
                code -= kHalf;
            } else if (low >= kQuarter && high < kHalf + kQuarter) {
                low -= kQuarter;
                high -= kQuarter;
                code -= kQuarter;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
            code = (code << 1) | static_cast<std::uint64_t>(in.next());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Relevance selection

std::pair<std::vector<std::size_t>, std::vector<double>> select_relevant(const std::vector<double>& values,
                                                                         const std::vector<double>& relevance,
                                                                         std::size_t k) {
    std::vector<std::size_t> order(relevance.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return relevance[a] > relevance[b]; });
    order.resize(k);
    std::sort(order.begin(), order.end());
    std::vector<double> vals;
    vals.reserve(k);
    for (std::size_t i : order) vals.push_back(values[i]);
    return {std::move(order), std::move(vals)};
}

// ---------------------------------------------------------------------------
// Synthetic task and the beta sweep

std::vector<double> SyntheticTask::relevance() const {
    std::vector<double> r;
    r.reserve(weights.size());
    for (double w : weights) r.push_back(std::abs(w));
    return r;
}

int SyntheticTask::predict(const std::vector<double>& x) const {
    double score = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) score += weights[i] * x[i];
    return score > 0.0 ? 1 : 0;
}

double SyntheticTask::error_rate(const std::vector<int>& predictions) const {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (predictions[i] != labels[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

SyntheticTask make_synthetic_task(std::uint64_t seed, std::size_t n_examples) {
    SyntheticTask task;
    Rng rng(derive_seed(seed, "synthetic-task"));

    task.weights.assign(task.dim, 0.0);
    // Relevant dims spread over the index range; fixed magnitudes keep the
    // relevance ranking unambiguous.
    const std::size_t stride = task.dim / task.n_relevant;
    for (std::size_t i = 0; i < task.n_relevant; ++i) {
        double sign = (i % 2 == 0) ? 1.0 : -1.0;
        task.weights[i * stride] = sign * (1.0 + 0.1 * static_cast<double>(i));
    }

    task.features.reserve(n_examples);
    task.labels.reserve(n_examples);
    for (std::size_t e = 0; e < n_examples; ++e) {
        std::vector<double> x(task.dim);
        for (double& v : x) v = rng.next_normal() * 0.4;
        double score = 0.0;
        for (std::size_t i = 0; i < task.dim; ++i) score += task.weights[i] * x[i];
        score += rng.next_normal() * 0.05;
        task.labels.push_back(score > 0.0 ? 1 : 0);
        task.features.push_back(std::move(x));
    }
    return task;
}

std::pair<double, double> evaluate_codec(const SyntheticTask& task, const CodecConfig& cfg) {
    const std::vector<double> rel = task.relevance();
    std::vector<double> probe(task.dim, 0.0);
    auto [indices, unused] = select_relevant(probe, rel, static_cast<std::size_t>(cfg.kept_dims));

    std::vector<int> stream;
    stream.reserve(task.features.size() * indices.size());
    std::vector<int> predictions;
    predictions.reserve(task.features.size());

    for (const auto& x : task.features) {
        std::vector<double> selected;
        selected.reserve(indices.size());
        for (std::size_t i : indices) selected.push_back(x[i]);
        std::vector<int> symbols = quantize(selected, cfg);
        stream.insert(stream.end(), symbols.begin(), symbols.end());

        std::vector<double> recon(task.dim, 0.0);
        std::vector<double> deq = dequantize(symbols, cfg);
        for (std::size_t j = 0; j < indices.size(); ++j) recon[indices[j]] = deq[j];
        predictions.push_back(task.predict(recon));
    }

    FrequencyTable model = FrequencyTable::from_symbols(stream, cfg.n_bins);
    Bitstream bits = entropy_encode(stream, model);
    double rate = static_cast<double>(bits.n_bits) / static_cast<double>(task.features.size());
    double loss = task.error_rate(predictions);
    return {rate, loss};
}

std::vector<TradeoffPoint> tradeoff_sweep(const SyntheticTask& task, const std::vector<double>& betas,
                                          const std::vector<CodecConfig>& grid) {
    struct Measured {
        double rate;
        double loss;
        CodecConfig cfg;
    };
    std::vector<Measured> measured;
    measured.reserve(grid.size());
    for (const auto& cfg : grid) {
        auto [rate, loss] = evaluate_codec(task, cfg);
        measured.push_back({rate, loss, cfg});
    }

    std::vector<TradeoffPoint> out;
    out.reserve(betas.size());
    for (double beta : betas) {
        const Measured* best = nullptr;
        double best_obj = std::numeric_limits<double>::infinity();
        for (const auto& m : measured) {
            double obj = m.loss + beta * m.rate;
            if (obj < best_obj || (obj == best_obj && best && m.rate < best->rate)) {
                best_obj = obj;
                best = &m;
            }
        }
        out.push_back(TradeoffPoint{beta, best->rate, best->loss, best->cfg});
    }
    return out;
}

} // namespace edgeplan
