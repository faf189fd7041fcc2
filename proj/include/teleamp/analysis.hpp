#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "teleamp/hafnian.hpp"
#include "teleamp/herald.hpp"

namespace teleamp {

/// One shot: photon counts per time bin.
struct MeasurementRecord {
    std::int64_t shot_index = 0;
    std::vector<int> counts;  // length = mode count (20 for the device layout)
};

/// Bhattacharyya fidelity (sum sqrt(p_i q_i))^2 between normalized
/// distributions of equal support length.
double fidelity(const std::vector<double>& p, const std::vector<double>& q);

/// Fidelity of the leading `support` bins after renormalization (the loss
/// sweeps compare the 0-, 1- and 2-photon components this way).
double fidelity_on_support(const std::vector<double>& p, const std::vector<double>& q,
                           int support = 3);

struct KlOptions {
    bool restrict_support = true;  // 0-, 1- and 2-photon components, renormalized
    int support = 3;
};

/// Relative entropy sum p~ log(p~/q~); returns +infinity when q vanishes on
/// a bin where p does not.
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q,
                     const KlOptions& options = {});

struct GainRatios {
    std::optional<double> r1;  // [P(1)/P(0)] / [P(1)/P(0)]_ref, absent if undefined
    std::optional<double> r2;
    std::optional<double> r1_error;
    std::optional<double> r2_error;
};

/// Probability ratios of dist relative to a reference distribution, with
/// Poisson error propagation when the underlying counts are supplied.
GainRatios gain_ratios(const std::vector<double>& dist, const std::vector<double>& reference,
                       const std::vector<double>* dist_counts = nullptr,
                       const std::vector<double>* reference_counts = nullptr);

struct PoissonErrors {
    std::vector<double> sigma;    // sigma(P_i) = sqrt(count_i) / total
    std::vector<int> zero_bins;   // bins with zero counts (sigma 0 there)
};

PoissonErrors poisson_errors(const std::vector<double>& counts, double total);

enum class RecordFormat { jsonl, csv };

/// Parses JSON-lines ({"counts":[...]}) or CSV (one row of counts per shot).
/// Streams the file; malformed lines raise with their line number.
std::vector<MeasurementRecord> load_records(const std::string& path, RecordFormat format);
std::vector<MeasurementRecord> load_records(std::istream& in, RecordFormat format,
                                            const std::string& name = "<stream>");

void save_records(const std::vector<MeasurementRecord>& records, const std::string& path,
                  RecordFormat format);

struct EmpiricalResult {
    OutputDistribution distribution;          // with Poisson errors
    std::vector<double> counts;               // per photon number, n = 0..cutoff
    std::map<std::vector<int>, std::int64_t> pattern_counts;
    std::int64_t total_records = 0;
    std::int64_t successes = 0;
    std::int64_t overflow = 0;  // heralded records with output above cutoff
};

/// Postselects records on the herald and histograms the output mode.
EmpiricalResult filter_heralded(const std::vector<MeasurementRecord>& records,
                                const HeraldSpec& herald, int output_mode, int cutoff);

/// Same filter reading the file one record at a time (large record sets never
/// sit in memory).
EmpiricalResult filter_heralded_file(const std::string& path, RecordFormat format,
                                     const HeraldSpec& herald, int output_mode, int cutoff);

/// Draws shots from a known heralded joint distribution (per-pattern success
/// weights and conditional output probabilities); non-successful shots yield
/// records that fail the herald.  Returns the records plus exact bookkeeping
/// of what was injected.
struct SynthesisResult {
    std::vector<MeasurementRecord> records;
    std::map<std::vector<int>, std::int64_t> pattern_counts;
    std::vector<std::int64_t> output_counts;
    std::int64_t successes = 0;
};

SynthesisResult synthesize_records(const OutputDistribution& joint, const HeraldSpec& herald,
                                   int output_mode, int mode_count, std::int64_t shots,
                                   std::uint64_t seed);

}  // namespace teleamp
