#include "pcaf/text.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "pcaf/error.hpp"

namespace pcaf {

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string json_real(double x) {
    if (!std::isfinite(x)) return "null";
    return format_real(x);
}

std::string json_real_array(const std::vector<double>& xs) {
    std::string out = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += json_real(xs[i]);
    }
    return out + "]";
}

double real_from_json(const nlohmann::json& value) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) {
        const auto s = value.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    }
    if (value.is_null()) return std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::ConfigInvalid, "expected a number, got " + value.dump());
}

namespace {

void dump_into(const nlohmann::json& v, int indent, int depth, std::string& out) {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
    const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (v.type()) {
    case nlohmann::json::value_t::number_float:
        out += json_real(v.get<double>());
        return;
    case nlohmann::json::value_t::array: {
        if (v.empty()) {
            out += "[]";
            return;
        }
        // Flat numeric arrays stay on one line.
        bool flat = true;
        for (const auto& e : v) flat = flat && (e.is_number() || e.is_null() || e.is_boolean());
        if (flat) {
            out += "[";
            bool first = true;
            for (const auto& e : v) {
                if (!first) out += ", ";
                first = false;
                dump_into(e, 0, 0, out);
            }
            out += "]";
            return;
        }
        out += "[";
        out += nl;
        bool first = true;
        for (const auto& e : v) {
            if (!first) {
                out += ",";
                out += nl;
            }
            first = false;
            out += pad;
            dump_into(e, indent, depth + 1, out);
        }
        out += nl;
        out += close_pad + "]";
        return;
    }
    case nlohmann::json::value_t::object: {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{";
        out += nl;
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (!first) {
                out += ",";
                out += nl;
            }
            first = false;
            out += pad + nlohmann::json(it.key()).dump() + (indent > 0 ? ": " : ":");
            dump_into(it.value(), indent, depth + 1, out);
        }
        out += nl;
        out += close_pad + "}";
        return;
    }
    default:
        out += v.dump();
    }
}

}  // namespace

std::string dump_json(const nlohmann::json& doc, int indent) {
    std::string out;
    dump_into(doc, indent, 0, out);
    return out;
}

}  // namespace pcaf
