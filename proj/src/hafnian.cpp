#include "teleamp/hafnian.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

namespace teleamp {

namespace {

// Power-trace hafnian over an index pairing.  The matrix whose hafnian is
// taken is base(idx, idx) where idx is the concatenation of the given pairs;
// keeping base small and folding the index repetition into the pairing keeps
// every power trace at the size of base instead of the expanded matrix:
//
//   haf = sum over nonempty subsets Z of pairs of
//         (-1)^{k-|Z|} [x^k] exp( sum_j tr((D_Z base)^j) / (2j) x^j ),
//
// with D_Z the 0/1 pair-incidence matrix of the subset.
Complex hafnian_pairs(const Eigen::MatrixXcd& base,
                      const std::vector<std::pair<int, int>>& pairs) {
    const int k = static_cast<int>(pairs.size());
    if (k == 0) return Complex{1.0, 0.0};
    if (k > 62) throw std::invalid_argument("hafnian: matrix too large");
    const auto m = base.rows();

    Complex total{0.0, 0.0};
    std::vector<Complex> traces(static_cast<std::size_t>(k) + 1);
    std::vector<Complex> series(static_cast<std::size_t>(k) + 1);
    std::vector<Complex> scratch(static_cast<std::size_t>(k) + 1);

    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
        Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(m, m);
        int included = 0;
        for (int t = 0; t < k; ++t) {
            if (!(mask >> t & 1)) continue;
            K.row(pairs[t].first) += base.row(pairs[t].second);
            K.row(pairs[t].second) += base.row(pairs[t].first);
            ++included;
        }

        Eigen::MatrixXcd power = K;
        traces[1] = power.trace();
        for (int j = 2; j <= k; ++j) {
            power = power * K;
            traces[j] = power.trace();
        }

        // Truncated series exp( sum_j traces[j]/(2j) x^j ), coefficient of x^k.
        std::fill(series.begin(), series.end(), Complex{0.0, 0.0});
        series[0] = Complex{1.0, 0.0};
        for (int j = 1; j <= k; ++j) {
            const Complex g = traces[j] / (2.0 * j);
            if (g == Complex{0.0, 0.0}) continue;
            scratch = series;
            Complex coeff{1.0, 0.0};
            for (int t = 1; j * t <= k; ++t) {
                coeff *= g / static_cast<double>(t);
                for (int p = k; p >= j * t; --p) scratch[p] += series[p - j * t] * coeff;
            }
            series.swap(scratch);
        }

        const double sign = ((k - included) % 2 == 0) ? 1.0 : -1.0;
        total += sign * series[k];
    }
    return total;
}

void check_symmetric(const Eigen::MatrixXcd& B, double tol) {
    if (B.rows() != B.cols()) throw std::invalid_argument("hafnian: matrix must be square");
    if ((B - B.transpose()).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("hafnian: matrix must be symmetric");
}

}  // namespace

Complex hafnian(const Eigen::MatrixXcd& B) {
    if (B.rows() == 0) return Complex{1.0, 0.0};
    if (B.rows() % 2 != 0) throw std::invalid_argument("hafnian: dimension must be even");
    check_symmetric(B, 1e-10);
    std::vector<std::pair<int, int>> pairs;
    for (int t = 0; t < B.rows() / 2; ++t) pairs.emplace_back(2 * t, 2 * t + 1);
    return hafnian_pairs(B, pairs);
}

Complex hafnian_naive(const Eigen::MatrixXcd& B) {
    if (B.rows() == 0) return Complex{1.0, 0.0};
    if (B.rows() % 2 != 0) throw std::invalid_argument("hafnian: dimension must be even");
    if (B.rows() > 14) throw std::invalid_argument("hafnian_naive: dimension above 14");
    check_symmetric(B, 1e-10);

    std::vector<int> alive(static_cast<std::size_t>(B.rows()));
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = static_cast<int>(i);

    // Sum over perfect matchings: match the first live index with each
    // partner in turn and recurse.
    auto recurse = [&B](auto&& self, std::vector<int>& live) -> Complex {
        if (live.empty()) return Complex{1.0, 0.0};
        const int first = live.front();
        Complex total{0.0, 0.0};
        for (std::size_t i = 1; i < live.size(); ++i) {
            std::vector<int> rest;
            rest.reserve(live.size() - 2);
            for (std::size_t j = 1; j < live.size(); ++j)
                if (j != i) rest.push_back(live[j]);
            total += B(first, live[i]) * self(self, rest);
        }
        return total;
    };
    return recurse(recurse, alive);
}

double pattern_probability(const ComplexGaussianData& data, const PhotonPattern& pattern) {
    const int M = static_cast<int>(data.Q.rows()) / 2;
    if (static_cast<int>(pattern.counts.size()) != M)
        throw std::invalid_argument("pattern must cover all modes");
    long total_photons = 0;
    for (int c : pattern.counts) {
        if (c < 0) throw std::invalid_argument("photon counts must be non-negative");
        total_photons += c;
    }

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(data.Q);
    const Complex det = lu.determinant();
    if (!(det.real() > 0.0) || std::abs(det.imag()) > 1e-9 * std::abs(det))
        throw std::runtime_error("Husimi matrix determinant is not real positive");
    const double norm = std::sqrt(det.real());

    std::vector<int> idx;
    idx.reserve(2 * static_cast<std::size_t>(total_photons));
    for (int m = 0; m < M; ++m)
        for (int c = 0; c < pattern.counts[m]; ++c) idx.push_back(m);
    for (int m = 0; m < M; ++m)
        for (int c = 0; c < pattern.counts[m]; ++c) idx.push_back(M + m);
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t t = 0; 2 * t + 1 < idx.size(); ++t)
        pairs.emplace_back(idx[2 * t], idx[2 * t + 1]);

    const Complex haf = hafnian_pairs(data.A, pairs);
    double factorials = 1.0;
    for (int c : pattern.counts)
        for (int i = 2; i <= c; ++i) factorials *= i;

    double prob = haf.real() / (norm * factorials);
    const double imag = std::abs(haf.imag()) / (norm * factorials);
    if (imag > 1e-9 && imag > 1e-9 * std::abs(prob))
        throw std::runtime_error("pattern probability has a non-negligible imaginary part");
    if (prob < -1e-9) {
        std::ostringstream os;
        os << "pattern probability " << prob << " below roundoff tolerance";
        throw std::runtime_error(os.str());
    }
    return std::max(prob, 0.0);
}

OutputDistribution conditional_distribution(const ComplexGaussianData& data,
                                            const HeraldSpec& herald, int output_mode,
                                            int cutoff) {
    const int M = static_cast<int>(data.Q.rows()) / 2;
    if (herald.accepted.empty())
        throw std::invalid_argument("herald must accept at least one pattern");
    if (output_mode < 0 || output_mode >= M)
        throw std::invalid_argument("output mode out of range");
    if (herald.fock_mode < 0 || herald.fock_mode >= M)
        throw std::invalid_argument("herald Fock mode out of range");
    if (output_mode == herald.fock_mode)
        throw std::invalid_argument("output mode overlaps the herald");
    for (int m : herald.pattern_modes) {
        if (m < 0 || m >= M) throw std::invalid_argument("herald pattern mode out of range");
        if (m == output_mode || m == herald.fock_mode)
            throw std::invalid_argument("herald modes must be distinct from the output");
    }

    OutputDistribution out;
    out.probabilities.assign(static_cast<std::size_t>(cutoff) + 1, 0.0);
    std::vector<double> sums(out.probabilities.size(), 0.0);

    for (const HeraldSpec::Accepted& acc : herald.accepted) {
        if (acc.counts.size() != herald.pattern_modes.size())
            throw std::invalid_argument("pattern size does not match pattern modes");
        double pattern_total = 0.0;
        for (int n = 0; n <= cutoff; ++n) {
            PhotonPattern full;
            full.counts.assign(static_cast<std::size_t>(M), 0);
            full.counts[static_cast<std::size_t>(herald.fock_mode)] = herald.fock_count;
            for (std::size_t i = 0; i < herald.pattern_modes.size(); ++i)
                full.counts[static_cast<std::size_t>(herald.pattern_modes[i])] = acc.counts[i];
            full.counts[static_cast<std::size_t>(output_mode)] = n;
            const double joint = pattern_probability(data, full);
            sums[static_cast<std::size_t>(n)] += joint;
            pattern_total += joint;
        }
        out.per_pattern_success[acc.counts] = pattern_total;
        out.success_probability += pattern_total;
    }

    if (out.success_probability <= 0.0) {
        out.empty = true;
        return out;
    }
    for (std::size_t n = 0; n < sums.size(); ++n)
        out.probabilities[n] = sums[n] / out.success_probability;
    return out;
}

std::vector<double> photon_number_distribution(const GaussianState& state, int mode,
                                               int cutoff) {
    const GaussianState single = reduce(state, {mode});
    const ComplexGaussianData data = to_complex_data(single);
    std::vector<double> probs(static_cast<std::size_t>(cutoff) + 1, 0.0);
    for (int n = 0; n <= cutoff; ++n) {
        PhotonPattern pattern;
        pattern.counts = {n};
        probs[static_cast<std::size_t>(n)] = pattern_probability(data, pattern);
    }
    return probs;
}

}  // namespace teleamp
