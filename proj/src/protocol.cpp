#include "teleamp/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <stdexcept>

#include "teleamp/analysis.hpp"
#include "teleamp/fock.hpp"

namespace teleamp {

namespace {

constexpr double kPi = std::numbers::pi;

void check_efficiency(double e, const char* what) {
    if (!(e >= 0.0 && e <= 1.0))
        throw std::invalid_argument(std::string(what) + " outside [0, 1]");
}

DeviceCertificate scale_certificate(const DeviceCertificate& cert, double q) {
    DeviceCertificate scaled = cert;
    scaled.common_efficiency = scale_loss(cert.common_efficiency, q);
    for (double& e : scaled.loop_efficiencies) e = scale_loss(e, q);
    for (double& e : scaled.relative_channel_efficiencies) e = scale_loss(e, q);
    return scaled;
}

std::vector<double> normalized_or_throw(std::vector<double> p) {
    double sum = 0.0;
    for (double x : p) sum += x;
    if (sum <= 0.0) throw std::runtime_error("distribution has no weight");
    for (double& x : p) x /= sum;
    return p;
}

}  // namespace

void DeviceCertificate::validate() const {
    check_efficiency(common_efficiency, "common_efficiency");
    for (double e : loop_efficiencies) check_efficiency(e, "loop efficiency");
    for (double e : relative_channel_efficiencies) check_efficiency(e, "channel efficiency");
}

DeviceCertificate builtin_certificate() {
    DeviceCertificate cert;
    cert.loop_phases = {1.268, -0.051, 1.848};
    cert.schmidt_number = 1.151;
    cert.common_efficiency = 0.386;
    cert.loop_efficiencies = {0.88, 0.879, 0.793};
    cert.squeezing_parameters_mean = {0.678, 1.148, 1.06};
    cert.relative_channel_efficiencies = {0.918, 0.938, 0.912, 1.0,   0.961, 0.917,
                                          0.893, 0.969, 0.951, 0.955, 0.965, 0.998,
                                          0.947, 0.966, 0.947, 0.898};
    return cert;
}

void TeleampConfig::validate() const {
    if (!(r >= 0.0)) throw std::invalid_argument("squeeze parameter must be non-negative");
    if (!(gain > 0.0)) throw std::invalid_argument("gain must be positive");
    if (n < 1) throw std::invalid_argument("cutoff order n must be at least 1");
    if (cutoff < n) throw std::invalid_argument("reporting cutoff below amplification order");
    if (!(loss_scale >= 0.0 && loss_scale <= 1.0))
        throw std::invalid_argument("loss scale q outside [0, 1]");
    if (attenuation_round_trips < 0)
        throw std::invalid_argument("round trips must be non-negative");
}

std::vector<double> IdealTarget::probabilities(int cutoff) const {
    std::vector<double> probs(static_cast<std::size_t>(cutoff) + 1, 0.0);
    for (std::size_t k = 0; k < coefficients.size() && k < probs.size(); ++k)
        probs[k] = std::norm(coefficients[k]);
    return probs;
}

IdealTarget ideal_teleamplified(const std::vector<Complex>& psi, double g, int n) {
    if (n < 0) throw std::invalid_argument("cutoff order must be non-negative");
    IdealTarget target;
    target.coefficients.assign(static_cast<std::size_t>(n) + 1, Complex{0.0, 0.0});
    double norm2 = 0.0;
    double scale = 1.0;
    for (int k = 0; k <= n; ++k) {
        const Complex value =
            (static_cast<std::size_t>(k) < psi.size()) ? scale * psi[static_cast<std::size_t>(k)]
                                                       : Complex{0.0, 0.0};
        target.coefficients[static_cast<std::size_t>(k)] = value;
        norm2 += std::norm(value);
        scale *= g;
    }
    if (norm2 <= 0.0)
        throw std::invalid_argument("input state vanishes below the amplification cutoff");
    const double inv = 1.0 / std::sqrt(norm2);
    for (Complex& c : target.coefficients) c *= inv;
    return target;
}

GainTau gain_tau_convert_from_gain(double g) {
    if (!(g > 0.0)) throw std::invalid_argument("gain must be positive");
    return {g, 1.0 / (1.0 + g * g)};
}

GainTau gain_tau_convert_from_tau(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
    return {std::sqrt((1.0 - tau) / tau), tau};
}

double scale_loss(double eta, double q) {
    check_efficiency(eta, "eta");
    check_efficiency(q, "loss scale");
    return eta + (1.0 - eta) * (1.0 - q);
}

GaussianState attenuated_input(double r, double loop_eta, int round_trips) {
    check_efficiency(loop_eta, "loop eta");
    if (round_trips < 0) throw std::invalid_argument("round trips must be non-negative");
    GaussianState state = squeeze(vacuum(1), 0, r);
    return apply_loss(state, 0, std::pow(loop_eta, round_trips));
}

HeraldSpec borealis_herald() {
    HeraldSpec spec;
    spec.fock_mode = 0;
    spec.fock_count = 2;
    spec.pattern_modes = {7, 13, 19};
    spec.accepted = {{{0, 1, 1}, 0}, {{1, 0, 1}, 1}, {{1, 1, 0}, 2}};
    return spec;
}

HeraldSpec ideal_herald(int n) {
    HeraldSpec spec;
    spec.fock_mode = 0;
    spec.fock_count = n;
    spec.pattern_modes = ideal_teleamp_fourier_ports(n);
    for (int l = 0; l <= n; ++l) {
        HeraldSpec::Accepted acc;
        acc.counts.assign(static_cast<std::size_t>(n) + 1, 1);
        acc.counts[static_cast<std::size_t>(l)] = 0;
        acc.l = l;
        spec.accepted.push_back(acc);
    }
    return spec;
}

HeraldSpec remap_herald(const HeraldSpec& spec, const std::vector<int>& kept) {
    auto position = [&kept](int mode) {
        for (std::size_t i = 0; i < kept.size(); ++i)
            if (kept[i] == mode) return static_cast<int>(i);
        throw std::invalid_argument("herald mode missing from the kept-mode list");
    };
    HeraldSpec out = spec;
    out.fock_mode = position(spec.fock_mode);
    for (std::size_t i = 0; i < out.pattern_modes.size(); ++i)
        out.pattern_modes[i] = position(spec.pattern_modes[i]);
    return out;
}

SimulationResult simulate(const TeleampConfig& config, const DeviceCertificate* certificate) {
    config.validate();
    if (certificate != nullptr) certificate->validate();
    const double tau = gain_tau_convert_from_gain(config.gain).tau;
    const bool attenuated = config.input_model == InputModel::attenuated_smsv;
    if (attenuated && certificate == nullptr)
        throw std::invalid_argument("attenuated input model needs a certificate for the loop eta");
    const double q = config.loss_scale;

    DeviceCertificate scaled;
    const DeviceCertificate* scaled_ptr = nullptr;
    if (certificate != nullptr) {
        scaled = scale_certificate(*certificate, q);
        scaled_ptr = &scaled;
    }

    GaussianState state = vacuum(1);
    OutputDistribution dist;
    if (config.n == 2) {
        BorealisOptions options;
        options.exempt_input_loop_storage = attenuated;
        const CircuitIR circuit = build_borealis_teleamp(tau, scaled_ptr, options);
        state = vacuum(20);
        for (int m : {0, 1, 2}) state = squeeze(state, m, config.r);
        if (attenuated) {
            // Full (unscaled) attenuation of the held input, applied upfront.
            const double eta =
                std::pow(certificate->loop_efficiencies[0], config.attenuation_round_trips);
            state = apply_loss(state, 2, eta);
        }
        state = run_schedule(state, compile_segments(circuit));

        const std::vector<int> active = {0, 1, 7, 13, 19};
        std::vector<int> inactive;
        for (int m = 0; m < 20; ++m)
            if (std::find(active.begin(), active.end(), m) == active.end())
                inactive.push_back(m);
        if (!modes_are_vacuum(state, inactive, 1e-9))
            throw std::runtime_error("inactive modes are not vacuum; reduction is unsound");
        const GaussianState reduced = reduce(state, active);
        const HeraldSpec herald = remap_herald(borealis_herald(), active);
        dist = conditional_distribution(to_complex_data(reduced), herald, 1, config.cutoff);
    } else {
        CircuitIR circuit = build_ideal_teleamp(config.n, config.gain);
        if (scaled_ptr != nullptr) {
            for (int b = 0; b < circuit.mode_count; ++b) {
                if (scaled_ptr->common_efficiency < 1.0)
                    circuit.loss(b, scaled_ptr->common_efficiency);
                const double channel = scaled_ptr->relative_channel_efficiencies[(b + 1) % 16];
                if (channel < 1.0) circuit.loss(b, channel);
            }
        }
        state = vacuum(config.n + 3);
        for (int m : {0, 1, 3}) state = squeeze(state, m, config.r);
        if (attenuated) {
            const double eta =
                std::pow(certificate->loop_efficiencies[0], config.attenuation_round_trips);
            state = apply_loss(state, 3, eta);
        }
        state = run_schedule(state, compile_segments(circuit));
        dist = conditional_distribution(to_complex_data(state), ideal_herald(config.n), 2,
                                        config.cutoff);
    }

    SimulationResult result;
    result.config = config;
    result.distribution = dist;
    result.success_probability = dist.success_probability;

    const std::vector<Complex> psi = smsv_amplitudes(config.r, 0.0, config.n);
    result.ideal = ideal_teleamplified(psi, config.gain, config.n);
    result.ideal_probabilities = result.ideal.probabilities(config.cutoff);

    if (attenuated) {
        const GaussianState input = attenuated_input(config.r, certificate->loop_efficiencies[0],
                                                     config.attenuation_round_trips);
        result.input_probabilities =
            normalized_or_throw(photon_number_distribution(input, 0, config.cutoff));
    } else {
        std::vector<double> probs;
        for (const Complex& c : smsv_amplitudes(config.r, 0.0, config.cutoff))
            probs.push_back(std::norm(c));
        result.input_probabilities = normalized_or_throw(std::move(probs));
    }

    if (!dist.empty)
        result.fidelity_vs_ideal = fidelity(dist.probabilities, result.ideal_probabilities);

    // The reported "expected" fidelity compares against the lossless run of
    // the same construction (for the attenuated model the input attenuation
    // is part of the construction and stays).
    if (config.loss_scale > 0.0 && certificate != nullptr) {
        TeleampConfig lossless = config;
        lossless.loss_scale = 0.0;
        const SimulationResult reference = simulate(lossless, certificate);
        result.lossless_probabilities = reference.distribution.probabilities;
        if (!dist.empty)
            result.fidelity_vs_lossless =
                fidelity(dist.probabilities, result.lossless_probabilities);
    } else {
        result.lossless_probabilities = dist.probabilities;
        result.fidelity_vs_lossless = 1.0;
    }
    return result;
}

std::vector<SweepCell> sweep(const TeleampConfig& base, const std::vector<double>& gains,
                             const std::vector<double>& loss_scales,
                             const DeviceCertificate* certificate) {
    std::vector<SweepCell> cells;
    for (double g : gains) {
        TeleampConfig lossless = base;
        lossless.gain = g;
        lossless.loss_scale = 0.0;
        const SimulationResult reference = simulate(lossless, certificate);

        std::vector<std::future<SimulationResult>> futures;
        futures.reserve(loss_scales.size());
        for (double q : loss_scales) {
            TeleampConfig cfg = base;
            cfg.gain = g;
            cfg.loss_scale = q;
            futures.push_back(std::async(std::launch::async,
                                         [cfg, certificate] { return simulate(cfg, certificate); }));
        }
        for (std::size_t i = 0; i < loss_scales.size(); ++i) {
            const SimulationResult run = futures[i].get();
            SweepCell cell;
            cell.gain = g;
            cell.q = loss_scales[i];
            cell.fidelity_vs_lossless =
                fidelity(run.distribution.probabilities, reference.distribution.probabilities);
            cell.fidelity_vs_lossless_02 = fidelity_on_support(
                run.distribution.probabilities, reference.distribution.probabilities);
            cell.kl_vs_lossless = kl_divergence(run.distribution.probabilities,
                                                reference.distribution.probabilities);
            cell.fidelity_vs_ideal = run.fidelity_vs_ideal;
            cell.success_probability = run.success_probability;
            cells.push_back(cell);
        }
    }
    return cells;
}

std::vector<Complex> pattern_phase_correction(const std::vector<Complex>& coeffs, int l, int n) {
    if (l < 0 || l > n) throw std::invalid_argument("herald phase index out of range");
    if (coeffs.size() <= static_cast<std::size_t>(n))
        throw std::invalid_argument("coefficient vector shorter than the cutoff order");
    std::vector<Complex> out = coeffs;
    const double angle = -2.0 * kPi * l / (n + 1);
    out[static_cast<std::size_t>(n)] *= std::exp(Complex{0.0, 1.0} * angle);
    return out;
}

}  // namespace teleamp
