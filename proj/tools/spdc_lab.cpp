// spdc_lab: command-line front end for the analytic, smearing, simulation and
// counting stages.
//
//   spdc_lab analytic --config desk.ini --out out/analytic
//   spdc_lab simulate --config desk.ini --out run.evt
//   spdc_lab count    --config desk.ini --events run.evt --out out/count
//
// Exit codes: 0 success, 1 I/O failure, 2 invalid configuration or input,
// 3 model regime violation.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdclab/spdclab.hpp"

namespace fs = std::filesystem;
using namespace spdclab;

namespace {

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void emit(const fs::path& dir, const std::string& name, const CsvDocument& doc) {
    write_atomic(dir / (name + ".csv"), doc.render(utc_now()));
}

bool wanted(const Scenario& s, const std::string& product) {
    if (s.outputs.empty()) return true;
    return std::find(s.outputs.begin(), s.outputs.end(), product) != s.outputs.end();
}

CsvDocument plateau_document(const Scenario& s, const SmearProducts& p) {
    using detail::format_double;
    CsvDocument doc{"plateaus", provenance_lines(s), "p=Hz X=1 g2si_plateau=1 nssi_short=Hz^3 nssi_long=Hz^3 gbar2c_short=1",
                    "quantity,value", {}};
    doc.rows.push_back("p_Hz," + format_double(p.kernel.plateau_height()));
    doc.rows.push_back("X," + format_double(p.plateaus.x));
    doc.rows.push_back("g2si_plateau," + format_double(p.plateaus.g2si_plateau));
    doc.rows.push_back("nssi_short_Hz3," + format_double(p.plateaus.nssi_short));
    doc.rows.push_back("nssi_long_Hz3," + format_double(p.plateaus.nssi_long));
    doc.rows.push_back("gbar2c_short," + format_double(p.plateaus.gbar2c_short));
    return doc;
}

void write_analytic(const Scenario& s, const fs::path& out) {
    const auto a = run_analytic(s);
    const std::pair<const char*, const CorrelationCurve*> curves[] = {
        {"auto_rate", &a.auto_rate}, {"cross", &a.cross},         {"g2si", &a.g2si},       {"g2ss", &a.g2ss},
        {"pssi_diag", &a.pssi_diag}, {"g2c", &a.g2c},             {"gbar2si", &a.gbar2si}, {"gbar2c", &a.gbar2c},
    };
    for (const auto& [name, curve] : curves) {
        if (wanted(s, name)) emit(out, name, curve_document(name, s, *curve));
    }
}

void write_smear(const Scenario& s, const fs::path& out, bool surface) {
    const auto p = run_smear(s, surface && wanted(s, "surface"));
    emit(out, "kernel", curve_document("kernel", s, p.kernel_curve));
    emit(out, "plateaus", plateau_document(s, p));
    if (wanted(s, "gbar2si")) emit(out, "gbar2si", curve_document("gbar2si", s, p.gbar2si));
    if (wanted(s, "gbar2c")) emit(out, "gbar2c", curve_document("gbar2c", s, p.gbar2c));
    if (!p.nssi.values.empty()) emit(out, "surface", surface_document("nssi_surface", s, p.nssi));
    std::printf("p = %.6g Hz  X = %.6g  g2si plateau = %.6g  gbar2c short = %.6g\n", p.kernel.plateau_height(),
                p.plateaus.x, p.plateaus.g2si_plateau, p.plateaus.gbar2c_short);
}

CsvDocument summary_document(const Scenario& s, const CountProducts& c) {
    using detail::format_double;
    CsvDocument doc{"summary", provenance_lines(s), "value=1 or Hz as named, stderr likewise", "quantity,value,stderr", {}};
    auto rate = [&](const char* name, const Rate& r) {
        doc.rows.push_back(std::string(name) + "," + format_double(r.value) + "," + format_double(r.error));
    };
    auto region = [&](const char* name, const RegionSummary& r) {
        doc.rows.push_back(std::string(name) + "," + format_double(r.mean) + "," + format_double(r.error));
    };
    rate("idler_rate_Hz", c.idler);
    rate("signal1_rate_Hz", c.signal1);
    rate("signal2_rate_Hz", c.signal2);
    rate("pairs0_rate_Hz", c.pairs0);
    region("g2bar_si_short", c.si_short);
    region("g2bar_si_long", c.si_long);
    region("gbar2c_short", c.c_short);
    region("gbar2c_long", c.c_long);
    return doc;
}

void write_count(const Scenario& s, const CountProducts& c, const fs::path& out) {
    emit(out, "nsi", histogram_document("nsi", s, c.si));
    emit(out, "nss", histogram_document("nss", s, c.ss));
    emit(out, "nssi", histogram_document("nssi", s, c.triples));
    if (!c.g2bar_si.values.empty()) emit(out, "g2bar_si", estimator_document("g2bar_si", s, c.g2bar_si));
    if (!c.g2bar_ss.values.empty()) emit(out, "g2bar_ss", estimator_document("g2bar_ss", s, c.g2bar_ss));
    emit(out, "gbar2c", estimator_document("gbar2c", s, c.gbar2c));
    emit(out, "summary", summary_document(s, c));
    std::printf("g2bar_si short = %.6g +- %.2g   gbar2c short = %.6g +- %.2g   gbar2c long = %.6g +- %.2g\n",
                c.si_short.mean, c.si_short.error, c.c_short.mean, c.c_short.error, c.c_long.mean, c.c_long.error);
}

DetectedStreams streams_from_file(const fs::path& path) {
    DetectedStreams d;
    for (auto& st : read_events(path)) {
        switch (st.channel) {
        case Channel::idler: d.idler = std::move(st); break;
        case Channel::signal1: d.signal1 = std::move(st); break;
        case Channel::signal2: d.signal2 = std::move(st); break;
        }
    }
    const Tick dur = std::max({d.idler.duration, d.signal1.duration, d.signal2.duration});
    d.idler.duration = d.signal1.duration = d.signal2.duration = dur;
    return d;
}

void write_compare(const Scenario& s, const fs::path& out, std::size_t shards) {
    using detail::format_double;
    const auto c = run_compare(s, shards);
    CsvDocument doc{"compare_gbar2c", provenance_lines(s), "delay_s=s value=1 stderr=1", "delay_s,value,stderr", {}};
    doc.provenance.push_back("compare = thermal(seed) vs poisson(seed + 1); value = z, stderr = 1");
    for (std::size_t i = 0; i < c.z_gbar2c.size(); ++i) {
        doc.rows.push_back(format_double(c.thermal.gbar2c.delays[i]) + "," + format_double(c.z_gbar2c[i]) + ",1");
    }
    emit(out, "z_gbar2c", doc);
    emit(out, "thermal_gbar2c", estimator_document("gbar2c_thermal", s, c.thermal.gbar2c));
    emit(out, "poisson_gbar2c", estimator_document("gbar2c_poisson", s, c.poisson.gbar2c));
    std::printf("max |z| (gbar2c) = %.3f over %zu bins\n", c.max_abs_z_gbar2c, c.compared_bins);
}

std::vector<std::string> split_values(const std::string& text) { return detail::split_list(text); }

int run(int argc, char** argv) {
    CLI::App app{"SPDC heralded-source lab: analytic model, smearing, event simulation, coincidence counting"};
    app.require_subcommand(1);

    std::string config, out, events, key, values, stage = "smear";
    std::size_t shards = 1;
    bool no_surface = false;

    auto* analytic = app.add_subcommand("analytic", "point-sampled and smeared analytic curves");
    auto* smear = app.add_subcommand("smear", "response kernel, plateau predictions, smeared curves and surface");
    auto* simulate = app.add_subcommand("simulate", "generate detection events into a .evt file");
    auto* count = app.add_subcommand("count", "coincidence histograms and estimators from a .evt file");
    auto* compare = app.add_subcommand("compare", "thermal vs Poisson source, per-bin z-scores of gbar2c");
    auto* sweep = app.add_subcommand("sweep", "repeat a stage while varying one config key");

    for (auto* sub : {analytic, smear, simulate, count, compare, sweep}) {
        sub->add_option("-c,--config", config, "scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", out, "output directory (simulate: output .evt file)")->required();
    }
    smear->add_flag("--no-surface", no_surface, "skip the 2D triple-coincidence surface");
    count->add_option("-e,--events", events, ".evt file written by simulate")->required()->check(CLI::ExistingFile);
    for (auto* sub : {count, compare, sweep}) sub->add_option("--shards", shards, "time shards for counting")->check(CLI::PositiveNumber);
    sweep->add_option("-k,--key", key, "config key to vary, e.g. window.tauc_s")->required();
    sweep->add_option("-v,--values", values, "comma-separated values")->required();
    sweep->add_option("-s,--stage", stage, "analytic|smear|count|compare")
        ->check(CLI::IsMember({"analytic", "smear", "count", "compare"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const Scenario s = load_scenario(config);
    const fs::path out_path(out);

    if (*analytic) {
        write_analytic(s, out_path);
    } else if (*smear) {
        write_smear(s, out_path, !no_surface);
    } else if (*simulate) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto d = run_simulation(s);
        write_events({d.idler, d.signal1, d.signal2}, out_path);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("events: idler %zu, signal1 %zu, signal2 %zu (%.2f s)\n", d.idler.size(), d.signal1.size(),
                    d.signal2.size(), secs);
    } else if (*count) {
        write_count(s, run_count(s, streams_from_file(events), shards), out_path);
    } else if (*compare) {
        write_compare(s, out_path, shards);
    } else if (*sweep) {
        for (const auto& v : split_values(values)) {
            const Scenario variant = with_override(s, key, v);
            const fs::path dir = out_path / (key + "=" + v);
            std::printf("[%s = %s]\n", key.c_str(), v.c_str());
            if (stage == "analytic") write_analytic(variant, dir);
            else if (stage == "smear") write_smear(variant, dir, false);
            else if (stage == "count") write_count(variant, run_count(variant, run_simulation(variant), shards), dir);
            else write_compare(variant, dir, shards);
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const regime_violation& e) {
        std::fprintf(stderr, "spdc_lab: regime violation: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "spdc_lab: invalid input: %s\n", e.what());
        return 2;
    } catch (const format_error& e) {
        std::fprintf(stderr, "spdc_lab: malformed event file: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "spdc_lab: %s\n", e.what());
        return 1;
    }
}
