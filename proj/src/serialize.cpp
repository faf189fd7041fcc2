#include "teleamp/serialize.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace teleamp {

using nlohmann::json;

std::string circuit_to_json(const CircuitIR& circuit, int indent) {
    json doc;
    doc["modes"] = circuit.mode_count;
    doc["elements"] = json::array();
    for (const Element& el : circuit.elements) {
        json e;
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, BeamSplitter>) {
                    e["kind"] = "bs";
                    e["modes"] = {x.mode_a, x.mode_b};
                    e["transmissivity"] = x.transmissivity;
                    e["phase"] = x.phase;
                } else if constexpr (std::is_same_v<T, PhaseShift>) {
                    e["kind"] = "ps";
                    e["mode"] = x.mode;
                    e["theta"] = x.theta;
                } else {
                    e["kind"] = "loss";
                    e["mode"] = x.mode;
                    e["eta"] = x.eta;
                }
            },
            el);
        doc["elements"].push_back(std::move(e));
    }
    return doc.dump(indent);
}

CircuitIR circuit_from_json(const std::string& text) {
    const json doc = json::parse(text);
    CircuitIR circuit(doc.at("modes").get<int>());
    for (const json& e : doc.at("elements")) {
        const std::string kind = e.at("kind").get<std::string>();
        if (kind == "bs") {
            const auto modes = e.at("modes");
            circuit.bs(modes.at(0).get<int>(), modes.at(1).get<int>(),
                       e.at("transmissivity").get<double>(), e.value("phase", 0.0));
        } else if (kind == "ps") {
            circuit.ps(e.at("mode").get<int>(), e.at("theta").get<double>());
        } else if (kind == "loss") {
            circuit.loss(e.at("mode").get<int>(), e.at("eta").get<double>());
        } else {
            throw std::invalid_argument("unknown element kind '" + kind + "'");
        }
    }
    circuit.validate();
    return circuit;
}

DeviceCertificate certificate_from_json(const std::string& text) {
    const json doc = json::parse(text);
    DeviceCertificate cert;
    if (doc.contains("loop_phases"))
        for (std::size_t i = 0; i < 3 && i < doc["loop_phases"].size(); ++i)
            cert.loop_phases[i] = doc["loop_phases"][i].get<double>();
    if (doc.contains("schmidt_number")) cert.schmidt_number = doc["schmidt_number"].get<double>();
    if (doc.contains("common_efficiency"))
        cert.common_efficiency = doc["common_efficiency"].get<double>();
    if (doc.contains("loop_efficiencies"))
        for (std::size_t i = 0; i < 3 && i < doc["loop_efficiencies"].size(); ++i)
            cert.loop_efficiencies[i] = doc["loop_efficiencies"][i].get<double>();
    if (doc.contains("squeezing_parameters_mean")) {
        const json& sq = doc["squeezing_parameters_mean"];
        cert.squeezing_parameters_mean.low = sq.value("low", 0.0);
        cert.squeezing_parameters_mean.high = sq.value("high", 0.0);
        cert.squeezing_parameters_mean.medium = sq.value("medium", 0.0);
    }
    if (doc.contains("relative_channel_efficiencies")) {
        const json& ch = doc["relative_channel_efficiencies"];
        for (std::size_t i = 0; i < 16 && i < ch.size(); ++i)
            cert.relative_channel_efficiencies[i] = ch[i].get<double>();
    }
    cert.validate();
    return cert;
}

std::string certificate_to_json(const DeviceCertificate& cert, int indent) {
    json doc;
    doc["loop_phases"] = cert.loop_phases;
    doc["schmidt_number"] = cert.schmidt_number;
    doc["common_efficiency"] = cert.common_efficiency;
    doc["loop_efficiencies"] = cert.loop_efficiencies;
    doc["squeezing_parameters_mean"] = {{"low", cert.squeezing_parameters_mean.low},
                                        {"high", cert.squeezing_parameters_mean.high},
                                        {"medium", cert.squeezing_parameters_mean.medium}};
    doc["relative_channel_efficiencies"] = cert.relative_channel_efficiencies;
    return doc.dump(indent);
}

DeviceCertificate load_certificate(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open certificate " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return certificate_from_json(text);
}

}  // namespace teleamp
