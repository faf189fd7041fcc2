#include "teleamp/analysis.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace teleamp {

namespace {

void check_distribution(const std::vector<double>& p, const char* name) {
    double sum = 0.0;
    for (double x : p) {
        if (x < 0.0) throw std::invalid_argument(std::string(name) + " has a negative entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument(std::string(name) + " is not normalized");
}

}  // namespace

double fidelity(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("fidelity: distributions must share a support length");
    check_distribution(p, "p");
    check_distribution(q, "q");
    double bhatta = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) bhatta += std::sqrt(p[i] * q[i]);
    return std::min(1.0, bhatta * bhatta);
}

double fidelity_on_support(const std::vector<double>& p, const std::vector<double>& q,
                           int support) {
    if (p.size() != q.size())
        throw std::invalid_argument("fidelity: distributions must share a support length");
    const std::size_t s = std::min(p.size(), static_cast<std::size_t>(support));
    double psum = 0.0, qsum = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
        if (p[i] < 0.0 || q[i] < 0.0) throw std::invalid_argument("fidelity: negative entry");
        psum += p[i];
        qsum += q[i];
    }
    if (psum <= 0.0 || qsum <= 0.0)
        throw std::invalid_argument("fidelity: no weight on the requested support");
    double bhatta = 0.0;
    for (std::size_t i = 0; i < s; ++i) bhatta += std::sqrt(p[i] / psum * q[i] / qsum);
    return std::min(1.0, bhatta * bhatta);
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q,
                     const KlOptions& options) {
    if (p.size() != q.size())
        throw std::invalid_argument("kl: distributions must share a support length");
    std::size_t support = p.size();
    if (options.restrict_support)
        support = std::min(support, static_cast<std::size_t>(options.support));
    double psum = 0.0, qsum = 0.0;
    for (std::size_t i = 0; i < support; ++i) {
        if (p[i] < 0.0 || q[i] < 0.0) throw std::invalid_argument("kl: negative entry");
        psum += p[i];
        qsum += q[i];
    }
    if (psum <= 0.0 || qsum <= 0.0)
        throw std::invalid_argument("kl: no weight on the requested support");
    double kl = 0.0;
    for (std::size_t i = 0; i < support; ++i) {
        const double pi = p[i] / psum;
        const double qi = q[i] / qsum;
        if (pi == 0.0) continue;
        if (qi == 0.0) return std::numeric_limits<double>::infinity();
        kl += pi * std::log(pi / qi);
    }
    return std::max(kl, 0.0);
}

GainRatios gain_ratios(const std::vector<double>& dist, const std::vector<double>& reference,
                       const std::vector<double>* dist_counts,
                       const std::vector<double>* reference_counts) {
    if (dist.size() < 3 || reference.size() < 3)
        throw std::invalid_argument("gain ratios need at least the 0-2 photon bins");
    if (dist[0] <= 0.0 || reference[0] <= 0.0)
        throw std::invalid_argument("gain ratios undefined with zero vacuum probability");

    GainRatios out;
    auto ratio = [&](std::size_t n) -> std::optional<double> {
        if (reference[n] <= 0.0) return std::nullopt;  // reported as absent
        return (dist[n] / dist[0]) / (reference[n] / reference[0]);
    };
    out.r1 = ratio(1);
    out.r2 = ratio(2);

    auto propagate = [&](std::size_t n, const std::optional<double>& value) -> std::optional<double> {
        if (!value || dist_counts == nullptr || reference_counts == nullptr) return std::nullopt;
        const std::vector<double>& dc = *dist_counts;
        const std::vector<double>& rc = *reference_counts;
        if (dc.size() <= n || rc.size() <= n) return std::nullopt;
        if (dc[0] <= 0 || dc[n] <= 0 || rc[0] <= 0 || rc[n] <= 0) return std::nullopt;
        const double rel2 = 1.0 / dc[0] + 1.0 / dc[n] + 1.0 / rc[0] + 1.0 / rc[n];
        return *value * std::sqrt(rel2);
    };
    out.r1_error = propagate(1, out.r1);
    out.r2_error = propagate(2, out.r2);
    return out;
}

PoissonErrors poisson_errors(const std::vector<double>& counts, double total) {
    if (total <= 0.0) throw std::invalid_argument("poisson errors need a positive total");
    PoissonErrors out;
    out.sigma.reserve(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0.0) throw std::invalid_argument("counts must be non-negative");
        out.sigma.push_back(std::sqrt(counts[i]) / total);
        if (counts[i] == 0.0) out.zero_bins.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<MeasurementRecord> load_records(const std::string& path, RecordFormat format) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_records(in, format, path);
}

namespace {

MeasurementRecord parse_record_line(const std::string& line, RecordFormat format,
                                    const std::string& name, std::int64_t line_number,
                                    std::int64_t shot_index) {
    MeasurementRecord record;
    record.shot_index = shot_index;
    try {
        if (format == RecordFormat::jsonl) {
            const nlohmann::json doc = nlohmann::json::parse(line);
            for (const auto& v : doc.at("counts")) {
                const int c = v.get<int>();
                if (c < 0) throw std::runtime_error("negative count");
                record.counts.push_back(c);
            }
        } else {
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) {
                std::size_t used = 0;
                const int c = std::stoi(cell, &used);
                if (used != cell.size() &&
                    cell.find_first_not_of(" \t", used) != std::string::npos)
                    throw std::runtime_error("trailing characters");
                if (c < 0) throw std::runtime_error("negative count");
                record.counts.push_back(c);
            }
        }
    } catch (const std::exception& e) {
        std::ostringstream os;
        os << name << ":" << line_number << ": malformed record (" << e.what() << ")";
        throw std::runtime_error(os.str());
    }
    if (record.counts.empty()) {
        std::ostringstream os;
        os << name << ":" << line_number << ": malformed record (no counts)";
        throw std::runtime_error(os.str());
    }
    return record;
}

// Single-pass postselection accumulator shared by the in-memory and the
// streaming filters.
class HeraldFilter {
  public:
    HeraldFilter(const HeraldSpec& herald, int output_mode, int cutoff)
        : herald_(herald), output_mode_(output_mode), cutoff_(cutoff) {
        result_.counts.assign(static_cast<std::size_t>(cutoff) + 1, 0.0);
        for (const HeraldSpec::Accepted& acc : herald.accepted)
            result_.pattern_counts[acc.counts] = 0;
    }

    void add(const MeasurementRecord& record) {
        ++result_.total_records;
        const std::vector<int>& c = record.counts;
        const auto size = static_cast<int>(c.size());
        if (herald_.fock_mode >= size || output_mode_ >= size) return;
        if (c[static_cast<std::size_t>(herald_.fock_mode)] != herald_.fock_count) return;

        const HeraldSpec::Accepted* matched = nullptr;
        for (const HeraldSpec::Accepted& acc : herald_.accepted) {
            bool ok = true;
            for (std::size_t i = 0; i < herald_.pattern_modes.size(); ++i) {
                const int mode = herald_.pattern_modes[i];
                if (mode >= size || c[static_cast<std::size_t>(mode)] != acc.counts[i]) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                matched = &acc;
                break;
            }
        }
        if (matched == nullptr) return;

        if (herald_.require_others_vacuum) {
            for (int m = 0; m < size; ++m) {
                if (m == herald_.fock_mode || m == output_mode_) continue;
                bool is_pattern_mode = false;
                for (int pm : herald_.pattern_modes)
                    if (pm == m) is_pattern_mode = true;
                if (!is_pattern_mode && c[static_cast<std::size_t>(m)] != 0) return;
            }
        }

        ++result_.successes;
        ++result_.pattern_counts[matched->counts];
        const int n = c[static_cast<std::size_t>(output_mode_)];
        if (n <= cutoff_)
            result_.counts[static_cast<std::size_t>(n)] += 1.0;
        else
            ++result_.overflow;
    }

    EmpiricalResult finish() {
        OutputDistribution& dist = result_.distribution;
        dist.probabilities.assign(static_cast<std::size_t>(cutoff_) + 1, 0.0);
        const std::int64_t in_window = result_.successes - result_.overflow;
        if (result_.successes == 0 || in_window == 0) {
            dist.empty = true;
            return std::move(result_);
        }
        for (std::size_t n = 0; n < result_.counts.size(); ++n)
            dist.probabilities[n] = result_.counts[n] / static_cast<double>(in_window);
        dist.success_probability =
            result_.total_records > 0 ? static_cast<double>(result_.successes) /
                                            static_cast<double>(result_.total_records)
                                      : 0.0;
        for (const auto& [pattern, count] : result_.pattern_counts)
            dist.per_pattern_success[pattern] =
                result_.total_records > 0
                    ? static_cast<double>(count) / static_cast<double>(result_.total_records)
                    : 0.0;
        dist.errors = poisson_errors(result_.counts, static_cast<double>(in_window)).sigma;
        return std::move(result_);
    }

  private:
    HeraldSpec herald_;
    int output_mode_;
    int cutoff_;
    EmpiricalResult result_;
};

}  // namespace

std::vector<MeasurementRecord> load_records(std::istream& in, RecordFormat format,
                                            const std::string& name) {
    std::vector<MeasurementRecord> records;
    std::string line;
    std::int64_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        records.push_back(parse_record_line(line, format, name, line_number,
                                            static_cast<std::int64_t>(records.size())));
    }
    return records;
}

void save_records(const std::vector<MeasurementRecord>& records, const std::string& path,
                  RecordFormat format) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const MeasurementRecord& record : records) {
        if (format == RecordFormat::jsonl) {
            nlohmann::json doc;
            doc["counts"] = record.counts;
            out << doc.dump() << '\n';
        } else {
            for (std::size_t i = 0; i < record.counts.size(); ++i) {
                if (i > 0) out << ',';
                out << record.counts[i];
            }
            out << '\n';
        }
    }
}

EmpiricalResult filter_heralded(const std::vector<MeasurementRecord>& records,
                                const HeraldSpec& herald, int output_mode, int cutoff) {
    HeraldFilter filter(herald, output_mode, cutoff);
    for (const MeasurementRecord& record : records) filter.add(record);
    return filter.finish();
}

EmpiricalResult filter_heralded_file(const std::string& path, RecordFormat format,
                                     const HeraldSpec& herald, int output_mode, int cutoff) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    HeraldFilter filter(herald, output_mode, cutoff);
    std::string line;
    std::int64_t line_number = 0;
    std::int64_t shot = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        filter.add(parse_record_line(line, format, path, line_number, shot++));
    }
    return filter.finish();
}

SynthesisResult synthesize_records(const OutputDistribution& joint, const HeraldSpec& herald,
                                   int output_mode, int mode_count, std::int64_t shots,
                                   std::uint64_t seed) {
    if (herald.fock_count == 0)
        throw std::invalid_argument("synthesis needs a nonzero Fock herald to mark failures");
    if (joint.per_pattern_success.empty())
        throw std::invalid_argument("synthesis needs at least one pattern weight");
    SynthesisResult result;
    result.output_counts.assign(joint.probabilities.size(), 0);
    for (const auto& [pattern, weight] : joint.per_pattern_success)
        result.pattern_counts[pattern] = 0;

    std::vector<std::pair<std::vector<int>, double>> pattern_weights(
        joint.per_pattern_success.begin(), joint.per_pattern_success.end());

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    result.records.reserve(static_cast<std::size_t>(shots));

    for (std::int64_t shot = 0; shot < shots; ++shot) {
        MeasurementRecord record;
        record.shot_index = shot;
        record.counts.assign(static_cast<std::size_t>(mode_count), 0);
        const double u = unif(rng);
        if (u < joint.success_probability) {
            // Pick the pattern proportionally to its success weight.
            double pick = unif(rng) * joint.success_probability;
            const std::vector<int>* pattern = &pattern_weights.back().first;
            for (const auto& [counts, weight] : pattern_weights) {
                if (pick < weight) {
                    pattern = &counts;
                    break;
                }
                pick -= weight;
            }
            // Output photon number from the conditional distribution.
            double npick = unif(rng);
            int n = 0;
            for (std::size_t i = 0; i < joint.probabilities.size(); ++i) {
                if (npick < joint.probabilities[i]) {
                    n = static_cast<int>(i);
                    break;
                }
                npick -= joint.probabilities[i];
                n = static_cast<int>(i);
            }
            record.counts[static_cast<std::size_t>(herald.fock_mode)] = herald.fock_count;
            for (std::size_t i = 0; i < herald.pattern_modes.size(); ++i)
                record.counts[static_cast<std::size_t>(herald.pattern_modes[i])] =
                    (*pattern)[i];
            record.counts[static_cast<std::size_t>(output_mode)] = n;
            ++result.successes;
            ++result.pattern_counts[*pattern];
            ++result.output_counts[static_cast<std::size_t>(n)];
        }
        result.records.push_back(std::move(record));
    }
    return result;
}

}  // namespace teleamp
