#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "teleamp/gaussian.hpp"
#include "teleamp/hafnian.hpp"
#include "teleamp/herald.hpp"

namespace teleamp {

/// Calibration record of the device (detection and loop efficiencies,
/// squeezing levels, loop phases).
struct DeviceCertificate {
    std::array<double, 3> loop_phases{0.0, 0.0, 0.0};
    double schmidt_number = 1.0;
    double common_efficiency = 1.0;
    std::array<double, 3> loop_efficiencies{1.0, 1.0, 1.0};
    struct Squeezing {
        double low = 0.0;
        double high = 0.0;
        double medium = 0.0;
    } squeezing_parameters_mean;
    std::array<double, 16> relative_channel_efficiencies{1, 1, 1, 1, 1, 1, 1, 1,
                                                         1, 1, 1, 1, 1, 1, 1, 1};

    void validate() const;
};

/// The calibration snapshot shipped with this toolkit (data/ carries the
/// same values as JSON).
DeviceCertificate builtin_certificate();

enum class InputModel { perfect_smsv, attenuated_smsv };

struct TeleampConfig {
    double r = 1.148;          // squeeze parameter
    double gain = 1.0;         // g; tau = 1/(1+g^2)
    int n = 2;                 // amplification cutoff order
    int cutoff = 8;            // reported photon-number cutoff
    double loss_scale = 1.0;   // q: multiplies every loss probability
    InputModel input_model = InputModel::perfect_smsv;
    int attenuation_round_trips = 11;  // for the attenuated input model

    void validate() const;
};

/// Ideal teleamplified target |g psi; n>: truncate at n, scale psi_k by g^k,
/// normalize.
struct IdealTarget {
    std::vector<Complex> coefficients;  // k = 0..n
    std::vector<double> probabilities(int cutoff) const;
};

IdealTarget ideal_teleamplified(const std::vector<Complex>& psi, double g, int n);

struct GainTau {
    double gain;
    double tau;
};
GainTau gain_tau_convert_from_gain(double g);
GainTau gain_tau_convert_from_tau(double tau);

/// eta -> eta + (1 - eta)(1 - q): every loss probability multiplied by q.
double scale_loss(double eta, double q);

/// SMSV followed by loss eta = loop_eta^round_trips on its single mode.
GaussianState attenuated_input(double r, double loop_eta, int round_trips = 11);

struct SimulationResult {
    TeleampConfig config;
    OutputDistribution distribution;
    IdealTarget ideal;
    std::vector<double> ideal_probabilities;
    std::vector<double> input_probabilities;     // reference input distribution
    std::vector<double> lossless_probabilities;  // same construction at q = 0
    double fidelity_vs_ideal = 0.0;     // against the pure amplified target
    double fidelity_vs_lossless = 1.0;  // against the q = 0 run of this model
    double success_probability = 0.0;
};

/// End-to-end teleamplification simulation: builds the circuit (20-bin
/// layout for n = 2, ideal layout otherwise), applies the q-scaled losses
/// from the certificate, and conditions on the heralding patterns.
SimulationResult simulate(const TeleampConfig& config,
                          const DeviceCertificate* certificate = nullptr);

struct SweepCell {
    double gain = 0.0;
    double q = 0.0;
    // Both against the same construction at q = 0.  The full-support fidelity
    // carries the leakage into photon numbers the lossless run never reaches
    // (linear in q, orders the gains); the 0-2-support variant isolates the
    // components the relative entropy tracks (quadratic in q).
    double fidelity_vs_lossless = 0.0;
    double fidelity_vs_lossless_02 = 0.0;
    double kl_vs_lossless = 0.0;  // 0-2 photon support, renormalized
    double fidelity_vs_ideal = 0.0;
    double success_probability = 0.0;
};

/// Cartesian product over gains x loss scales; per gain the q = 0 case of
/// the same configuration serves as the lossless reference.
std::vector<SweepCell> sweep(const TeleampConfig& base, const std::vector<double>& gains,
                             const std::vector<double>& loss_scales,
                             const DeviceCertificate* certificate = nullptr);

/// Undoes the herald-dependent phase: multiplies the |2> coefficient (or,
/// generally, coefficient n) by w^{-l}, w = exp(2 pi i / (n+1)).
std::vector<Complex> pattern_phase_correction(const std::vector<Complex>& coeffs, int l,
                                              int n = 2);

}  // namespace teleamp
