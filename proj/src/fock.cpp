#include "teleamp/fock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace teleamp {

namespace {

const Complex kI{0.0, 1.0};

double binomial(int n, int k) {
    double result = 1.0;
    for (int i = 1; i <= k; ++i) result *= static_cast<double>(n - k + i) / i;
    return result;
}

double factorial(int n) {
    double result = 1.0;
    for (int i = 2; i <= n; ++i) result *= i;
    return result;
}

void check_mode(const FockVector& state, int mode) {
    if (mode < 0 || mode >= state.modes)
        throw std::invalid_argument("fock: mode index out of range");
}

}  // namespace

std::string FockVector::key(const std::vector<int>& occupation) {
    std::string k(occupation.size(), '\0');
    for (std::size_t i = 0; i < occupation.size(); ++i)
        k[i] = static_cast<char>(static_cast<unsigned char>(occupation[i]));
    return k;
}

std::vector<int> FockVector::occupation(const std::string& key) {
    std::vector<int> occ(key.size());
    for (std::size_t i = 0; i < key.size(); ++i)
        occ[i] = static_cast<int>(static_cast<unsigned char>(key[i]));
    return occ;
}

double FockVector::norm2() const {
    double total = 0.0;
    for (const auto& [key, amp] : amplitudes) total += std::norm(amp);
    return total;
}

FockVector fock_vacuum(int modes, int cutoff, int max_total) {
    if (modes < 1) throw std::invalid_argument("fock: need at least one mode");
    FockVector state;
    state.modes = modes;
    state.cutoff = cutoff;
    state.max_total = max_total;
    state.amplitudes[std::string(static_cast<std::size_t>(modes), '\0')] = Complex{1.0, 0.0};
    return state;
}

std::vector<Complex> smsv_amplitudes(double r, double phi, int kmax) {
    std::vector<Complex> coeffs(static_cast<std::size_t>(kmax) + 1, Complex{0.0, 0.0});
    Complex c = 1.0 / std::sqrt(std::cosh(r));
    const Complex step_base = -std::tanh(r) * std::exp(kI * phi);
    coeffs[0] = c;
    for (int k = 1; 2 * k <= kmax; ++k) {
        c *= step_base * std::sqrt(static_cast<double>(2 * k) * (2 * k - 1)) / (2.0 * k);
        coeffs[static_cast<std::size_t>(2 * k)] = c;
    }
    return coeffs;
}

FockVector prepare_smsv(double r, double phi, int cutoff) {
    FockVector state = fock_vacuum(1, cutoff);
    state.amplitudes.clear();
    const std::vector<Complex> coeffs = smsv_amplitudes(r, phi, cutoff);
    for (int n = 0; n <= cutoff; ++n) {
        if (coeffs[static_cast<std::size_t>(n)] == Complex{0.0, 0.0}) continue;
        state.amplitudes[FockVector::key({n})] = coeffs[static_cast<std::size_t>(n)];
    }
    // Weight of the dropped tail; bounded by tanh(r)^cutoff.
    state.leakage = std::max(0.0, 1.0 - state.norm2());
    return state;
}

FockVector tensor(const FockVector& a, const FockVector& b) {
    FockVector out;
    out.modes = a.modes + b.modes;
    out.cutoff = std::min(a.cutoff, b.cutoff);
    out.max_total = (a.max_total < 0 && b.max_total < 0)
                        ? -1
                        : std::max(a.max_total, b.max_total);
    out.leakage = a.leakage + b.leakage;
    for (const auto& [ka, va] : a.amplitudes) {
        for (const auto& [kb, vb] : b.amplitudes) {
            if (out.max_total >= 0) {
                int total = 0;
                for (char c : ka) total += static_cast<unsigned char>(c);
                for (char c : kb) total += static_cast<unsigned char>(c);
                if (total > out.max_total) {
                    out.leakage += std::norm(va * vb);
                    continue;
                }
            }
            out.amplitudes[ka + kb] = va * vb;
        }
    }
    return out;
}

FockVector apply_bs(const FockVector& state, int mode_a, int mode_b, double transmissivity,
                    double phase) {
    check_mode(state, mode_a);
    check_mode(state, mode_b);
    if (mode_a == mode_b) throw std::invalid_argument("fock: beam splitter modes must differ");

    // Creation operators map as a^dag -> t a^dag + v b^dag, b^dag -> u a^dag
    // + w b^dag, matching the circuit element block.
    const double t = std::sqrt(transmissivity);
    const double rr = std::sqrt(1.0 - transmissivity);
    const Complex u = std::exp(-kI * phase) * rr;
    const Complex v = -std::exp(kI * phase) * rr;
    const double w = t;

    FockVector out = state;
    out.amplitudes.clear();
    const double norm_before = state.norm2();

    for (const auto& [key, amp] : state.amplitudes) {
        if (state.max_total >= 0) {
            int total = 0;
            for (char c : key) total += static_cast<unsigned char>(c);
            if (total > state.max_total) continue;  // dropped sector, tracked below
        }
        const int m = static_cast<unsigned char>(key[static_cast<std::size_t>(mode_a)]);
        const int n = static_cast<unsigned char>(key[static_cast<std::size_t>(mode_b)]);
        if (m + n == 0) {
            out.amplitudes[key] += amp;
            continue;
        }
        const double base_norm = std::sqrt(factorial(m) * factorial(n));
        // Precompute powers.
        std::vector<double> t_pow(static_cast<std::size_t>(m) + 1, 1.0);
        std::vector<Complex> v_pow(static_cast<std::size_t>(m) + 1, Complex{1.0, 0.0});
        for (int i = 1; i <= m; ++i) {
            t_pow[static_cast<std::size_t>(i)] = t_pow[static_cast<std::size_t>(i - 1)] * t;
            v_pow[static_cast<std::size_t>(i)] = v_pow[static_cast<std::size_t>(i - 1)] * v;
        }
        std::vector<Complex> u_pow(static_cast<std::size_t>(n) + 1, Complex{1.0, 0.0});
        std::vector<double> w_pow(static_cast<std::size_t>(n) + 1, 1.0);
        for (int j = 1; j <= n; ++j) {
            u_pow[static_cast<std::size_t>(j)] = u_pow[static_cast<std::size_t>(j - 1)] * u;
            w_pow[static_cast<std::size_t>(j)] = w_pow[static_cast<std::size_t>(j - 1)] * w;
        }
        for (int i = 0; i <= m; ++i) {
            for (int j = 0; j <= n; ++j) {
                const int p = i + j;
                const int q = m + n - p;
                const Complex coeff = amp * binomial(m, i) * binomial(n, j) *
                                      t_pow[static_cast<std::size_t>(i)] *
                                      v_pow[static_cast<std::size_t>(m - i)] *
                                      u_pow[static_cast<std::size_t>(j)] *
                                      w_pow[static_cast<std::size_t>(n - j)] *
                                      std::sqrt(factorial(p) * factorial(q)) / base_norm;
                if (coeff == Complex{0.0, 0.0}) continue;
                if (p > state.cutoff || q > state.cutoff) continue;  // truncated
                std::string new_key = key;
                new_key[static_cast<std::size_t>(mode_a)] =
                    static_cast<char>(static_cast<unsigned char>(p));
                new_key[static_cast<std::size_t>(mode_b)] =
                    static_cast<char>(static_cast<unsigned char>(q));
                out.amplitudes[new_key] += coeff;
            }
        }
    }
    out.leakage += std::max(0.0, norm_before - out.norm2());
    return out;
}

FockVector apply_ps(const FockVector& state, int mode, double theta) {
    check_mode(state, mode);
    FockVector out = state;
    for (auto& [key, amp] : out.amplitudes) {
        const int n = static_cast<unsigned char>(key[static_cast<std::size_t>(mode)]);
        amp *= std::exp(kI * (theta * n));
    }
    return out;
}

FockVector attach_loss_ancilla(const FockVector& state, int mode, double eta) {
    check_mode(state, mode);
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("fock: eta outside [0, 1]");
    FockVector extended;
    extended.modes = state.modes + 1;
    extended.cutoff = state.cutoff;
    extended.max_total = state.max_total;
    extended.leakage = state.leakage;
    for (const auto& [key, amp] : state.amplitudes) extended.amplitudes[key + '\0'] = amp;
    return apply_bs(extended, mode, state.modes, eta, 0.0);
}

FockVector apply_circuit(const FockVector& state, const CircuitIR& circuit) {
    if (circuit.mode_count != state.modes)
        throw std::invalid_argument("fock: circuit mode count does not match state");
    FockVector current = state;
    for (const Element& el : circuit.elements) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, BeamSplitter>) {
                    current = apply_bs(current, e.mode_a, e.mode_b, e.transmissivity, e.phase);
                } else if constexpr (std::is_same_v<T, PhaseShift>) {
                    current = apply_ps(current, e.mode, e.theta);
                } else {
                    throw std::invalid_argument(
                        "fock: loss elements need an explicit ancilla; use "
                        "attach_loss_ancilla");
                }
            },
            el);
    }
    return current;
}

Projection project(const FockVector& state, const std::vector<int>& modes,
                   const std::vector<int>& counts) {
    if (modes.size() != counts.size())
        throw std::invalid_argument("fock: projection modes/counts mismatch");
    for (int m : modes) check_mode(state, m);
    for (int c : counts)
        if (c < 0) throw std::invalid_argument("fock: projection counts must be non-negative");

    std::vector<bool> projected(static_cast<std::size_t>(state.modes), false);
    for (int m : modes) projected[static_cast<std::size_t>(m)] = true;

    Projection result;
    result.reduced.modes = state.modes - static_cast<int>(modes.size());
    result.reduced.cutoff = state.cutoff;
    result.reduced.max_total = state.max_total;

    for (const auto& [key, amp] : state.amplitudes) {
        bool match = true;
        for (std::size_t i = 0; i < modes.size(); ++i) {
            if (static_cast<unsigned char>(key[static_cast<std::size_t>(modes[i])]) !=
                static_cast<unsigned int>(counts[i])) {
                match = false;
                break;
            }
        }
        if (!match) continue;
        std::string reduced_key;
        reduced_key.reserve(static_cast<std::size_t>(result.reduced.modes));
        for (int m = 0; m < state.modes; ++m)
            if (!projected[static_cast<std::size_t>(m)])
                reduced_key.push_back(key[static_cast<std::size_t>(m)]);
        result.reduced.amplitudes[reduced_key] += amp;
        result.weight += std::norm(amp);
    }
    return result;
}

std::vector<double> marginal_distribution(const FockVector& state, int mode, int nmax) {
    check_mode(state, mode);
    std::vector<double> probs(static_cast<std::size_t>(nmax) + 1, 0.0);
    for (const auto& [key, amp] : state.amplitudes) {
        const int n = static_cast<unsigned char>(key[static_cast<std::size_t>(mode)]);
        if (n <= nmax) probs[static_cast<std::size_t>(n)] += std::norm(amp);
    }
    return probs;
}

}  // namespace teleamp
