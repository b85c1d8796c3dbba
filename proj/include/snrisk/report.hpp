#pragma once

#include "snrisk/estimators.hpp"
#include "snrisk/risk.hpp"
#include "snrisk/seqmodel.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace snrisk {

struct IndicatorRow {
    std::string name;
    std::optional<double> closed_form;  // empty when not available
    std::string closed_form_method;     // computation path or unavailability reason
    McResult mc;
};

struct RiskReport {
    std::string config_canonical;  // resolved config with defaults filled in
    std::uint64_t seed = 0;
    int workers = 1;
    std::string content_hash;      // sha1 over config + seed
    std::vector<IndicatorRow> rows;
    std::vector<std::string> notes;
};

std::string sha1_hex(const std::string& data);

// JSON with sorted keys: identical inputs give byte-identical files.
std::string report_to_json(const RiskReport& report);
void write_report_json(const RiskReport& report, const std::string& path);
void write_report_csv(const RiskReport& report, const std::string& path);

// CSV with header "x,ratio,ci,reference".
void write_curve_csv(const TailRatioCurve& curve, const std::string& path);

// CSV with header "coordinate,atom_weight,ci_half_width[,closed_form]".
void write_spectral_csv(const SpectralEstimate& est, const std::vector<double>* closed_atoms,
                        const std::string& path);

// CSV with header "t,y".
void write_trace_csv(const std::vector<std::pair<double, double>>& trace, const std::string& path);

} // namespace snrisk
