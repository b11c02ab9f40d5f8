#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace plap {

using json = nlohmann::ordered_json;

/// Outcome of one verification step: a name, a verdict and the numbers behind it.
struct CheckReport {
    std::string name;
    bool pass = false;
    std::vector<std::pair<std::string, double>> metrics;  // insertion-ordered for stable output
    std::string detail;

    CheckReport& metric(std::string key, double value) {
        metrics.emplace_back(std::move(key), value);
        return *this;
    }

    double get(const std::string& key) const {
        for (const auto& [k, v] : metrics)
            if (k == key) return v;
        return std::numeric_limits<double>::quiet_NaN();
    }
};

inline json metric_value(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline json to_json(const CheckReport& r) {
    json m = json::object();
    for (const auto& [k, v] : r.metrics) m[k] = metric_value(v);
    json j;
    j["name"] = r.name;
    j["pass"] = r.pass;
    j["metrics"] = m;
    if (!r.detail.empty()) j["detail"] = r.detail;
    return j;
}

inline json to_json(const std::vector<CheckReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    return arr;
}

inline bool all_pass(const std::vector<CheckReport>& reports) {
    for (const auto& r : reports)
        if (!r.pass) return false;
    return true;
}

}  // namespace plap
