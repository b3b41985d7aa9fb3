#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace pcaf {

/// 17 significant digits; non-finite values as inf / -inf / nan.
std::string format_real(double x);

/// JSON number text; non-finite values become null.
std::string json_real(double x);
std::string json_real_array(const std::vector<double>& xs);

/// Reads a JSON number, accepting the strings "inf"/"infinity" for +infinity.
double real_from_json(const nlohmann::json& value);

/// Re-serializes a JSON document with every floating-point number written by json_real.
/// Object keys keep nlohmann's (sorted) order, so the output is a pure function of the value.
std::string dump_json(const nlohmann::json& doc, int indent = 2);

}  // namespace pcaf
