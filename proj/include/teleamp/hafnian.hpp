#pragma once

#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "teleamp/gaussian.hpp"
#include "teleamp/herald.hpp"

namespace teleamp {

/// Hafnian of a complex symmetric matrix of even dimension, via the
/// power-trace subset formula, O(k^3 2^k) for 2k x 2k input.
Complex hafnian(const Eigen::MatrixXcd& B);

/// Direct sum over perfect matchings, (2k-1)!! terms; dimension <= 14.
/// Test oracle for the power-trace kernel.
Complex hafnian_naive(const Eigen::MatrixXcd& B);

/// Detector outcome: photon count per mode, covering all modes of the state.
struct PhotonPattern {
    std::vector<int> counts;
};

/// Pr(pattern) = haf(A_pattern) / (sqrt(det Q) * prod n_i!), where A_pattern
/// repeats each mode's rows and columns n_i times.  Tiny negative results
/// from roundoff are clamped to zero; below -1e-9 they are a numerical error.
double pattern_probability(const ComplexGaussianData& data, const PhotonPattern& pattern);

struct OutputDistribution {
    std::vector<double> probabilities;  // P(n), n = 0..cutoff, conditioned
    double success_probability = 0.0;
    std::map<std::vector<int>, double> per_pattern_success;
    std::optional<std::vector<double>> errors;  // per-bin standard error
    bool empty = false;                         // no heralded weight / no matches
};

/// Conditional photon-number distribution of output_mode given any accepted
/// heralding pattern.  The data must describe only the active modes (herald
/// plus output); mode indices in the spec refer to that reduced state.
OutputDistribution conditional_distribution(const ComplexGaussianData& data,
                                            const HeraldSpec& herald, int output_mode,
                                            int cutoff);

/// Photon-number distribution of a single-mode Gaussian state up to cutoff.
std::vector<double> photon_number_distribution(const GaussianState& state, int mode,
                                               int cutoff);

}  // namespace teleamp
