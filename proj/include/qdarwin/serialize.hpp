#pragma once

#include "qdarwin/compat.hpp"
#include "qdarwin/covering.hpp"
#include "qdarwin/dynamics.hpp"
#include "qdarwin/measurement.hpp"
#include "qdarwin/tensor.hpp"

#include <json.hpp>

#include <string>

namespace qdarwin {

using Json = nlohmann::ordered_json;

/// Complex matrices travel as base64-encoded row-major little-endian float64
/// (re, im) pairs, bit-exact.
std::string encode_matrix(const Matrix& m);
Matrix decode_matrix(const std::string& blob, long rows, long cols);

Json povm_to_json(const Povm& p);
Povm povm_from_json(const Json& j);

Json partition_to_json(const Partition& p);
Partition partition_from_json(const Json& j);

Json channel_to_json(const Channel& ch);
Channel channel_from_json(const Json& j);

Json witness_to_json(const JmWitness& w);
JmWitness witness_from_json(const Json& j);

/// Fixed-format float for CSV cells ("%.17g", locale-independent).
std::string format_double(double v);

}  // namespace qdarwin
