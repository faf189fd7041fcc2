// Command-line front end: simulation, sweeps, circuit validation, and
// analysis of measurement records, with CSV/JSON outputs per run.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "teleamp/analysis.hpp"
#include "teleamp/circuit.hpp"
#include "teleamp/protocol.hpp"
#include "teleamp/serialize.hpp"

namespace {

using nlohmann::json;
using namespace teleamp;

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "unreadable";
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(bytes);
    return os.str();
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buffer;
}

struct CertificateChoice {
    std::optional<DeviceCertificate> certificate;
    std::string source = "none";
    std::string hash = "none";

    const DeviceCertificate* get() const {
        return certificate.has_value() ? &certificate.value() : nullptr;
    }
};

CertificateChoice resolve_certificate(const std::string& flag_path, bool builtin) {
    CertificateChoice choice;
    std::string path = flag_path;
    if (path.empty()) {
        if (const char* env = std::getenv("TELEAMP_CERT"); env != nullptr && *env != '\0')
            path = env;
    }
    if (!path.empty()) {
        choice.certificate = load_certificate(path);
        choice.source = path;
        choice.hash = file_hash(path);
    } else if (builtin) {
        choice.certificate = builtin_certificate();
        choice.source = "builtin";
        choice.hash = "builtin";
    }
    return choice;
}

json config_json(const TeleampConfig& config) {
    json doc;
    doc["r"] = config.r;
    doc["gain"] = config.gain;
    doc["tau"] = gain_tau_convert_from_gain(config.gain).tau;
    doc["n"] = config.n;
    doc["cutoff"] = config.cutoff;
    doc["loss_scale"] = config.loss_scale;
    doc["input_model"] =
        config.input_model == InputModel::perfect_smsv ? "perfect" : "attenuated";
    doc["attenuation_round_trips"] = config.attenuation_round_trips;
    return doc;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const json& config, const CertificateChoice& cert) {
    json doc;
    doc["command"] = command;
    doc["config"] = config;
    doc["certificate"] = cert.source;
    doc["certificate_hash"] = cert.hash;
    doc["version"] = kVersion;
    doc["timestamp"] = timestamp_utc();
    std::ofstream out(dir / "manifest.json");
    out << doc.dump(2) << '\n';
}

std::string format_double(double x) {
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

std::vector<double> parse_value_list(const std::string& text) {
    std::vector<double> values;
    if (text.rfind("log:", 0) == 0) {
        std::stringstream ss(text.substr(4));
        std::string cell;
        std::vector<std::string> parts;
        while (std::getline(ss, cell, ':')) parts.push_back(cell);
        if (parts.size() != 3) throw CLI::ValidationError("expected log:<from>:<to>:<points>");
        const double from = std::stod(parts[0]);
        const double to = std::stod(parts[1]);
        const int points = std::stoi(parts[2]);
        if (from <= 0.0 || to <= 0.0 || points < 1)
            throw CLI::ValidationError("log grid needs positive endpoints and points");
        for (int i = 0; i < points; ++i) {
            const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
            values.push_back(std::exp(std::log(from) + f * (std::log(to) - std::log(from))));
        }
    } else {
        std::stringstream ss(text);
        std::string cell;
        while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    }
    if (values.empty()) throw CLI::ValidationError("empty value list");
    return values;
}

json distribution_json(const OutputDistribution& dist) {
    json doc;
    doc["probabilities"] = dist.probabilities;
    doc["success_probability"] = dist.success_probability;
    json patterns = json::array();
    for (const auto& [pattern, weight] : dist.per_pattern_success) {
        json entry;
        entry["pattern"] = pattern;
        entry["weight"] = weight;
        patterns.push_back(entry);
    }
    doc["per_pattern_success"] = patterns;
    if (dist.errors) doc["errors"] = *dist.errors;
    doc["empty"] = dist.empty;
    return doc;
}

int cmd_simulate(const TeleampConfig& config, const CertificateChoice& cert,
                 const std::string& out_dir, const std::string& command) {
    const SimulationResult result = simulate(config, cert.get());

    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    json doc;
    doc["distribution"] = distribution_json(result.distribution);
    json ideal = json::array();
    for (const Complex& c : result.ideal.coefficients) ideal.push_back({c.real(), c.imag()});
    doc["ideal_coefficients"] = ideal;
    doc["ideal_probabilities"] = result.ideal_probabilities;
    doc["input_probabilities"] = result.input_probabilities;
    std::ofstream(dir / "distribution.json") << doc.dump(2) << '\n';

    {
        std::ofstream csv(dir / "distribution.csv");
        csv << "q,n,probability,ideal,input\n";
        for (std::size_t n = 0; n < result.distribution.probabilities.size(); ++n) {
            csv << format_double(config.loss_scale) << ',' << n << ','
                << format_double(result.distribution.probabilities[n]) << ','
                << format_double(result.ideal_probabilities[n]) << ','
                << format_double(result.input_probabilities[n]) << '\n';
        }
    }

    json metrics;
    metrics["fidelity_vs_ideal"] = result.fidelity_vs_ideal;
    metrics["fidelity_vs_lossless"] = result.fidelity_vs_lossless;
    metrics["success_probability"] = result.success_probability;
    const GainRatios ratios =
        gain_ratios(result.distribution.probabilities, result.input_probabilities);
    if (ratios.r1) metrics["r1_vs_input"] = *ratios.r1;
    if (ratios.r2) metrics["r2_vs_input"] = *ratios.r2;
    std::ofstream(dir / "metrics.json") << metrics.dump(2) << '\n';

    write_manifest(dir, command, config_json(config), cert);
    std::cout << "fidelity_vs_ideal " << format_double(result.fidelity_vs_ideal)
              << "  success_probability " << format_double(result.success_probability) << '\n';
    return 0;
}

int cmd_sweep(const TeleampConfig& base, const std::vector<double>& gains,
              const std::vector<double>& loss_scales, const CertificateChoice& cert,
              const std::string& out_dir, const std::string& command) {
    const std::vector<SweepCell> cells = sweep(base, gains, loss_scales, cert.get());
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "sweep.csv");
    csv << "gain,q,fidelity,kl,fidelity_02,fidelity_vs_ideal,success_probability\n";
    for (const SweepCell& cell : cells) {
        csv << format_double(cell.gain) << ',' << format_double(cell.q) << ','
            << format_double(cell.fidelity_vs_lossless) << ','
            << format_double(cell.kl_vs_lossless) << ','
            << format_double(cell.fidelity_vs_lossless_02) << ','
            << format_double(cell.fidelity_vs_ideal) << ','
            << format_double(cell.success_probability) << '\n';
    }
    write_manifest(dir, command, config_json(base), cert);
    std::cout << "wrote " << cells.size() << " cells to " << (dir / "sweep.csv").string()
              << '\n';
    return 0;
}

int cmd_validate(double tau, int fourier, const std::string& command) {
    (void)command;
    bool ok = true;
    if (fourier > 0) {
        const Eigen::MatrixXcd F = build_fourier(fourier);
        const double dev =
            (F * F.adjoint() - Eigen::MatrixXcd::Identity(fourier, fourier)).cwiseAbs().maxCoeff();
        std::cout << "fourier(" << fourier << ") unitarity deviation " << format_double(dev)
                  << (dev < 1e-12 ? " PASS" : " FAIL") << '\n';
        ok = ok && dev < 1e-12;
    }
    auto [U, losses] = compile_transfer(build_borealis_teleamp(tau));
    const ValidationReport report = validate_reference(U, tau);
    std::cout << "tau " << format_double(tau) << ": " << report.to_string() << '\n';
    const double unitarity = U.unitarity_deviation();
    std::cout << "unitarity deviation " << format_double(unitarity)
              << (unitarity < 1e-10 ? " PASS" : " FAIL") << '\n';
    ok = ok && report.pass() && unitarity < 1e-10;
    return ok ? 0 : 1;
}

int cmd_analyze(const std::string& input, const std::string& format_name,
                const TeleampConfig& config, const CertificateChoice& cert,
                const std::string& out_dir, const std::string& command) {
    const RecordFormat format =
        format_name == "csv" ? RecordFormat::csv : RecordFormat::jsonl;
    const HeraldSpec herald = borealis_herald();
    const EmpiricalResult empirical =
        filter_heralded_file(input, format, herald, 1, config.cutoff);

    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    json doc;
    doc["total_records"] = empirical.total_records;
    doc["successes"] = empirical.successes;
    doc["overflow"] = empirical.overflow;
    json patterns = json::array();
    for (const auto& [pattern, count] : empirical.pattern_counts) {
        json entry;
        entry["pattern"] = pattern;
        entry["count"] = count;
        patterns.push_back(entry);
    }
    doc["pattern_counts"] = patterns;
    doc["distribution"] = distribution_json(empirical.distribution);

    if (!empirical.distribution.empty) {
        const SimulationResult predicted = simulate(config, cert.get());
        doc["predicted"] = distribution_json(predicted.distribution);
        doc["fidelity_vs_predicted"] =
            fidelity(empirical.distribution.probabilities, predicted.distribution.probabilities);
        doc["fidelity_vs_ideal"] =
            fidelity(empirical.distribution.probabilities, predicted.ideal_probabilities);
        const GainRatios ratios = gain_ratios(empirical.distribution.probabilities,
                                              predicted.input_probabilities, &empirical.counts,
                                              nullptr);
        if (ratios.r1) doc["r1_vs_input"] = *ratios.r1;
        if (ratios.r2) doc["r2_vs_input"] = *ratios.r2;
    }
    std::ofstream(dir / "analysis.json") << doc.dump(2) << '\n';

    {
        std::ofstream csv(dir / "empirical.csv");
        csv << "n,count,probability,sigma\n";
        for (std::size_t n = 0; n < empirical.counts.size(); ++n) {
            const double prob =
                empirical.distribution.empty ? 0.0 : empirical.distribution.probabilities[n];
            const double sigma = empirical.distribution.errors.has_value()
                                     ? (*empirical.distribution.errors)[n]
                                     : 0.0;
            csv << n << ',' << format_double(empirical.counts[n]) << ',' << format_double(prob)
                << ',' << format_double(sigma) << '\n';
        }
    }
    write_manifest(dir, command, config_json(config), cert);
    std::cout << "successes " << empirical.successes << " of " << empirical.total_records
              << '\n';
    return 0;
}

std::string join_args(int argc, char** argv) {
    std::string joined;
    for (int i = 0; i < argc; ++i) {
        if (i > 0) joined += ' ';
        joined += argv[i];
    }
    return joined;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Teleamplification simulator and analysis toolkit"};
    app.require_subcommand(1);
    const std::string command = join_args(argc, argv);

    TeleampConfig config;
    std::string certificate_path;
    std::string out_dir = ".";
    std::string input_model = "perfect";
    double tau_flag = 0.0;
    bool tau_given = false;

    auto add_config_flags = [&](CLI::App* cmd, bool with_gain) {
        cmd->add_option("--r", config.r, "squeeze parameter");
        if (with_gain) {
            auto* gain_opt = cmd->add_option("--gain", config.gain, "amplification factor g");
            auto* tau_opt = cmd->add_option_function<double>(
                "--tau",
                [&](double tau) {
                    tau_flag = tau;
                    tau_given = true;
                },
                "coupler transmissivity (alternative to --gain)");
            gain_opt->excludes(tau_opt);
        }
        cmd->add_option("--n", config.n, "amplification cutoff order");
        cmd->add_option("--cutoff", config.cutoff, "reported photon-number cutoff");
        cmd->add_option("--certificate", certificate_path,
                        "device certificate JSON (or env TELEAMP_CERT)");
        cmd->add_option("--input-model", input_model, "perfect | attenuated")
            ->check(CLI::IsMember({"perfect", "attenuated"}));
        cmd->add_option("--round-trips", config.attenuation_round_trips,
                        "storage round trips for the attenuated input");
    };

    // simulate
    CLI::App* sim = app.add_subcommand("simulate", "heralded output distribution for one point");
    add_config_flags(sim, true);
    sim->add_option("--loss-scale", config.loss_scale, "multiplier q on all loss probabilities");
    sim->add_option("--out", out_dir, "output directory");

    // sweep
    CLI::App* swp = app.add_subcommand("sweep", "grid over gains and loss scales");
    std::string gains_text = "0.5,1,2,4";
    std::string scales_text = "log:1e-3:1:13";
    add_config_flags(swp, false);
    swp->add_option("--gains", gains_text, "comma list of gains");
    swp->add_option("--loss-scales", scales_text, "comma list or log:<from>:<to>:<points>");
    swp->add_option("--out", out_dir, "output directory");

    // validate-circuit
    CLI::App* val = app.add_subcommand("validate-circuit",
                                       "compare the compiled layout with the reference matrix");
    double validate_tau = 0.2;
    int fourier_check = 0;
    val->add_option("--tau", validate_tau, "coupler transmissivity");
    val->add_option("--fourier", fourier_check, "also check an N-mode Fourier for unitarity");

    // analyze
    CLI::App* ana = app.add_subcommand("analyze", "postselect measurement records");
    std::string input_path;
    std::string input_format = "jsonl";
    add_config_flags(ana, true);
    ana->add_option("--input", input_path, "records file")->required();
    ana->add_option("--format", input_format, "jsonl | csv")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    ana->add_option("--loss-scale", config.loss_scale, "q used for the predicted comparison");
    ana->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (tau_given) config.gain = gain_tau_convert_from_tau(tau_flag).gain;
        config.input_model = input_model == "attenuated" ? InputModel::attenuated_smsv
                                                         : InputModel::perfect_smsv;
        if (sim->parsed()) {
            const CertificateChoice cert = resolve_certificate(certificate_path, false);
            return cmd_simulate(config, cert, out_dir, command);
        }
        if (swp->parsed()) {
            const CertificateChoice cert = resolve_certificate(certificate_path, false);
            return cmd_sweep(config, parse_value_list(gains_text), parse_value_list(scales_text),
                             cert, out_dir, command);
        }
        if (val->parsed()) {
            return cmd_validate(validate_tau, fourier_check, command);
        }
        if (ana->parsed()) {
            const CertificateChoice cert = resolve_certificate(certificate_path, false);
            return cmd_analyze(input_path, input_format, config, cert, out_dir, command);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
