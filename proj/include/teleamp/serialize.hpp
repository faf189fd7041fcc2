#pragma once

#include <string>

#include "teleamp/circuit.hpp"
#include "teleamp/protocol.hpp"

namespace teleamp {

// Circuit documents look like
//   {"modes": 20, "elements": [{"kind": "bs", "modes": [0, 1],
//    "transmissivity": 0.5, "phase": 0.0}, {"kind": "ps", "mode": 1,
//    "theta": 1.5707}, {"kind": "loss", "mode": 0, "eta": 0.88}]}
// with 0-based mode indices.

std::string circuit_to_json(const CircuitIR& circuit, int indent = 2);
CircuitIR circuit_from_json(const std::string& text);

/// Certificate fields use the names printed by the device ('loop_phases',
/// 'common_efficiency', 'loop_efficiencies', 'squeezing_parameters_mean',
/// 'relative_channel_efficiencies', 'schmidt_number'); unknown fields are
/// ignored.
DeviceCertificate certificate_from_json(const std::string& text);
std::string certificate_to_json(const DeviceCertificate& cert, int indent = 2);
DeviceCertificate load_certificate(const std::string& path);

}  // namespace teleamp
