#pragma once

// CSV products: `# scenario:` provenance lines, a units line, an optional
// `# generated:` timestamp, then a header row and the body. Bodies depend only
// on the scenario, so reruns produce byte-identical bodies.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spdclab/correlator.hpp"
#include "spdclab/grid.hpp"
#include "spdclab/scenario.hpp"

namespace spdclab {

struct CsvDocument {
    std::string product;
    std::vector<std::string> provenance; // "key = value" lines
    std::string units;
    std::string columns;
    std::vector<std::string> rows;

    std::string header(const std::string& generated = {}) const {
        std::string out;
        for (const auto& line : provenance) out += "# scenario: " + line + "\n";
        out += "# product: " + product + "\n";
        out += "# units: " + units + "\n";
        if (!generated.empty()) out += "# generated: " + generated + "\n";
        return out;
    }

    std::string body() const {
        std::string out = columns + "\n";
        for (const auto& r : rows) out += r + "\n";
        return out;
    }

    std::string render(const std::string& generated = {}) const { return header(generated) + body(); }
};

inline std::vector<std::string> provenance_lines(const Scenario& s) {
    std::vector<std::string> out;
    for (const auto& [k, v] : to_config_map(s)) out.push_back(k + " = " + v);
    return out;
}

/// Strips comment lines, leaving the header row and body.
inline std::string csv_body(const std::string& text) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const auto end = nl == std::string::npos ? text.size() : nl + 1;
        if (text[pos] != '#') out.append(text, pos, end - pos);
        pos = end;
    }
    return out;
}

inline CsvDocument curve_document(const std::string& product, const Scenario& s, const CorrelationCurve& c) {
    using detail::format_double;
    CsvDocument doc{product, provenance_lines(s), "delay_s=s value=" + std::string(unit_name(c.unit)) + " stderr=" + std::string(unit_name(c.unit)),
                    "delay_s,value,stderr", {}};
    doc.rows.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) doc.rows.push_back(format_double(c.delay(i)) + "," + format_double(c.values[i]) + ",0");
    return doc;
}

inline CsvDocument estimator_document(const std::string& product, const Scenario& s, const EstimatorCurve& c) {
    using detail::format_double;
    CsvDocument doc{product, provenance_lines(s), "delay_s=s value=1 stderr=1", "delay_s,value,stderr", {}};
    doc.rows.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        doc.rows.push_back(format_double(c.delays[i]) + "," + format_double(c.values[i]) + "," + format_double(c.stderrs[i]));
    }
    return doc;
}

inline CsvDocument histogram_document(const std::string& product, const Scenario& s, const Histogram& h) {
    using detail::format_double;
    CsvDocument doc{product, provenance_lines(s), "delay_s=s value=Hz stderr=Hz", "delay_s,value,stderr", {}};
    doc.provenance.push_back("observation_time_s = " + format_double(h.observation_time));
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double err = std::sqrt(static_cast<double>(h.counts[i])) / h.observation_time;
        doc.rows.push_back(format_double(h.delays[i]) + "," + format_double(h.rate(i)) + "," + format_double(err));
    }
    return doc;
}

inline CsvDocument surface_document(const std::string& product, const Scenario& s, const CorrelationSurface& surf) {
    using detail::format_double;
    CsvDocument doc{product, provenance_lines(s), "t1_s=s t2_s=s value=" + std::string(unit_name(surf.unit)), "t1_s,t2_s,value", {}};
    doc.rows.reserve(surf.values.size());
    for (std::size_t j = 0; j < surf.y.size; ++j) {
        for (std::size_t i = 0; i < surf.x.size; ++i) {
            doc.rows.push_back(format_double(surf.x[i]) + "," + format_double(surf.y[j]) + "," + format_double(surf.at(i, j)));
        }
    }
    return doc;
}

/// Writes to a temporary sibling, then renames over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << text;
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

} // namespace spdclab
