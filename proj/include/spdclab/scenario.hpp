#pragma once

// Scenario description and its flat key-value configuration format.
//
//   # comment            ; comment
//   source.rate_hz = 2e7
//   [chain]              section headers prefix the keys that follow
//   jitter_s = 1e-9

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "spdclab/correlator.hpp"
#include "spdclab/errors.hpp"
#include "spdclab/event_sim.hpp"
#include "spdclab/spdc_model.hpp"

namespace spdclab {

struct AnalysisWindow {
    double tauc = 0.0;        // coincidence half-width, s
    double bin = 0.0;         // delay grid step, s
    double span = 0.0;        // delays cover [-span, span], s
    double kernel_step = 0.0; // analytic smearing grid, s (0: derived from tauc and jitter)
    WindowMode mode = WindowMode::centered;

    UniformGrid delay_grid() const { return UniformGrid::covering(span, bin); }
};

struct Scenario {
    SourceParams source;
    DetectorChain chain;
    AnalysisWindow window;
    double duration = 1e-3; // s
    std::uint64_t seed = 1;
    SourceModel model = SourceModel::thermal;
    std::vector<std::string> outputs;

    /// Analytic smearing step: configured, or min(taud, tauc)/20.
    double smearing_step() const {
        if (window.kernel_step > 0.0) return window.kernel_step;
        const double finest = chain.jitter_width > 0.0 ? std::min(chain.jitter_width, window.tauc) : window.tauc;
        return finest / 20.0;
    }

    void validate() const {
        source.validate();
        chain.validate();
        if (!(window.tauc > 0.0)) throw invalid_parameter("window.tauc_s must be positive");
        if (!(window.bin > 0.0)) throw invalid_parameter("window.bin_s must be positive");
        if (!(window.span >= 2.0 * (window.tauc + chain.jitter_width) * (1.0 - 1e-12))) {
            throw invalid_parameter("window.span_s must cover at least 2*(tauc + jitter)");
        }
        if (window.bin < 2.0 * tick_seconds) throw invalid_parameter("window.bin_s below timestamp resolution");
        if (!(duration >= 0.0) || duration > 1.8e4) throw invalid_parameter("run.duration_s out of range");
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw invalid_parameter("key '" + key + "': '" + text + "' is not a finite number");
    }
    return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw invalid_parameter("key '" + key + "': '" + text + "' is not an unsigned integer");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw invalid_parameter("key '" + key + "': expected true|false");
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

/// Shortest text that round-trips the double.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

} // namespace detail

/// Ordered key -> value map as read from a config file.
using ConfigMap = std::map<std::string, std::string>;

inline ConfigMap parse_config_text(std::string_view text) {
    ConfigMap out;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        std::string line = detail::trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw invalid_parameter("line " + std::to_string(line_no) + ": malformed section header");
            section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw invalid_parameter("line " + std::to_string(line_no) + ": expected key = value");
        std::string key = detail::trim(std::string_view(line).substr(0, eq));
        std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw invalid_parameter("line " + std::to_string(line_no) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        if (out.count(key)) throw invalid_parameter("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        out[key] = value;
    }
    return out;
}

inline Scenario scenario_from_map(const ConfigMap& cfg) {
    Scenario s;
    bool have_rate = false, have_dt = false, have_tauc = false, have_bin = false, have_span = false;
    for (const auto& [key, value] : cfg) {
        if (key == "source.rate_hz") {
            s.source.pair_rate = detail::parse_double(key, value);
            have_rate = true;
        } else if (key == "source.coherence_time_s") {
            s.source.coherence_time = detail::parse_double(key, value);
            have_dt = true;
        } else if (key == "source.shape") {
            s.source.shape = parse_shape(value);
        } else if (key == "source.cross_correlation") {
            s.source.cross_correlation = detail::parse_bool(key, value);
        } else if (key == "chain.eta_idler") {
            s.chain.idler_efficiency = detail::parse_double(key, value);
        } else if (key == "chain.eta_signal") {
            s.chain.signal_efficiency = detail::parse_double(key, value);
        } else if (key == "chain.splitter") {
            s.chain.splitter_ratio = detail::parse_double(key, value);
        } else if (key == "chain.jitter_s") {
            s.chain.jitter_width = detail::parse_double(key, value);
        } else if (key == "window.tauc_s") {
            s.window.tauc = detail::parse_double(key, value);
            have_tauc = true;
        } else if (key == "window.bin_s") {
            s.window.bin = detail::parse_double(key, value);
            have_bin = true;
        } else if (key == "window.span_s") {
            s.window.span = detail::parse_double(key, value);
            have_span = true;
        } else if (key == "window.kernel_step_s") {
            s.window.kernel_step = detail::parse_double(key, value);
        } else if (key == "window.mode") {
            if (value == "centered") s.window.mode = WindowMode::centered;
            else if (value == "one_sided") s.window.mode = WindowMode::one_sided;
            else throw invalid_parameter("window.mode must be centered|one_sided");
        } else if (key == "run.duration_s") {
            s.duration = detail::parse_double(key, value);
        } else if (key == "run.seed") {
            s.seed = detail::parse_u64(key, value);
        } else if (key == "run.model") {
            s.model = parse_model(value);
        } else if (key == "run.outputs") {
            s.outputs = detail::split_list(value);
        } else {
            throw invalid_parameter("unknown key '" + key + "'");
        }
    }
    if (!have_rate) throw invalid_parameter("missing key 'source.rate_hz'");
    if (!have_dt) throw invalid_parameter("missing key 'source.coherence_time_s'");
    if (!have_tauc) throw invalid_parameter("missing key 'window.tauc_s'");
    if (!have_bin) s.window.bin = s.window.tauc / 10.0;
    if (!have_span) s.window.span = 3.0 * (s.window.tauc + s.chain.jitter_width);
    s.validate();
    return s;
}

inline Scenario parse_scenario(std::string_view text) { return scenario_from_map(parse_config_text(text)); }

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_parameter("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

/// Canonical key-value form; parse_scenario(to_config_text(s)) reproduces s.
inline ConfigMap to_config_map(const Scenario& s) {
    using detail::format_double;
    ConfigMap m;
    m["source.rate_hz"] = format_double(s.source.pair_rate);
    m["source.coherence_time_s"] = format_double(s.source.coherence_time);
    m["source.shape"] = std::string(shape_name(s.source.shape));
    m["source.cross_correlation"] = s.source.cross_correlation ? "true" : "false";
    m["chain.eta_idler"] = format_double(s.chain.idler_efficiency);
    m["chain.eta_signal"] = format_double(s.chain.signal_efficiency);
    m["chain.splitter"] = format_double(s.chain.splitter_ratio);
    m["chain.jitter_s"] = format_double(s.chain.jitter_width);
    m["window.tauc_s"] = format_double(s.window.tauc);
    m["window.bin_s"] = format_double(s.window.bin);
    m["window.span_s"] = format_double(s.window.span);
    m["window.kernel_step_s"] = format_double(s.window.kernel_step);
    m["window.mode"] = s.window.mode == WindowMode::centered ? "centered" : "one_sided";
    m["run.duration_s"] = format_double(s.duration);
    m["run.seed"] = std::to_string(s.seed);
    m["run.model"] = std::string(model_name(s.model));
    if (!s.outputs.empty()) {
        std::string joined;
        for (const auto& o : s.outputs) joined += (joined.empty() ? "" : ",") + o;
        m["run.outputs"] = joined;
    }
    return m;
}

inline std::string to_config_text(const Scenario& s) {
    std::string out;
    for (const auto& [k, v] : to_config_map(s)) out += k + " = " + v + "\n";
    return out;
}

/// Returns a copy of `s` with one key overridden (used by sweeps).
inline Scenario with_override(const Scenario& s, const std::string& key, const std::string& value) {
    auto m = to_config_map(s);
    if (!m.count(key)) throw invalid_parameter("unknown key '" + key + "'");
    m[key] = value;
    return scenario_from_map(m);
}

} // namespace spdclab
