#include "snrisk/report.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace snrisk {

std::string sha1_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha1(), nullptr))
        throw std::runtime_error("sha1: digest failed");
    std::ostringstream out;
    out << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < len; ++i) out << std::setw(2) << static_cast<int>(digest[i]);
    return out.str();
}

namespace {

// Sorted-key JSON keeps byte-identical output for identical runs.
using json = nlohmann::json;

json row_to_json(const IndicatorRow& row) {
    json j;
    j["name"] = row.name;
    if (row.closed_form)
        j["closed_form_constant"] = *row.closed_form;
    else
        j["closed_form_constant"] = "not-available";
    j["closed_form_method"] = row.closed_form_method;
    j["mc_estimate"] = row.mc.estimate;
    j["ci_half_width"] = row.mc.ci_half_width;
    j["n_paths"] = row.mc.n_paths;
    j["threshold"] = row.mc.threshold;
    j["n_exceedances"] = row.mc.n_exceedances;
    j["wide_ci"] = row.mc.wide_ci;
    j["estimator"] = row.mc.estimator;
    return j;
}

void open_or_throw(std::ofstream& out, const std::string& path) {
    out.open(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
}

} // namespace

std::string report_to_json(const RiskReport& report) {
    json j;
    j["config"] = report.config_canonical;
    j["seed"] = report.seed;
    j["workers"] = report.workers;
    j["content_hash"] = report.content_hash;
    j["indicators"] = json::array();
    for (const auto& row : report.rows) j["indicators"].push_back(row_to_json(row));
    j["notes"] = report.notes;
    return j.dump(2) + "\n";
}

void write_report_json(const RiskReport& report, const std::string& path) {
    std::ofstream out;
    open_or_throw(out, path);
    out << report_to_json(report);
}

void write_report_csv(const RiskReport& report, const std::string& path) {
    std::ofstream out;
    open_or_throw(out, path);
    out << "indicator,closed_form,mc_estimate,ci_half_width,n_paths,threshold,n_exceedances,"
           "wide_ci\n";
    out << std::setprecision(17);
    for (const auto& row : report.rows) {
        out << row.name << ",";
        if (row.closed_form)
            out << *row.closed_form;
        else
            out << "not-available";
        out << "," << row.mc.estimate << "," << row.mc.ci_half_width << "," << row.mc.n_paths
            << "," << row.mc.threshold << "," << row.mc.n_exceedances << ","
            << (row.mc.wide_ci ? 1 : 0) << "\n";
    }
}

void write_curve_csv(const TailRatioCurve& curve, const std::string& path) {
    std::ofstream out;
    open_or_throw(out, path);
    out << "x,ratio,ci,reference\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
        out << curve.thresholds[i] << "," << curve.ratios[i] << "," << curve.ci_half[i] << ","
            << curve.reference_constant << "\n";
}

void write_spectral_csv(const SpectralEstimate& est, const std::vector<double>* closed_atoms,
                        const std::string& path) {
    std::ofstream out;
    open_or_throw(out, path);
    out << "coordinate,atom_weight,ci_half_width";
    if (closed_atoms) out << ",closed_form";
    out << "\n";
    out << std::setprecision(17);
    for (std::size_t j = 0; j < est.atom_weights.size(); ++j) {
        out << (j + 1) << "," << est.atom_weights[j] << "," << est.atom_ci_half[j];
        if (closed_atoms) out << "," << (j < closed_atoms->size() ? (*closed_atoms)[j] : 0.0);
        out << "\n";
    }
}

void write_trace_csv(const std::vector<std::pair<double, double>>& trace, const std::string& path) {
    std::ofstream out;
    open_or_throw(out, path);
    out << "t,y\n";
    out << std::setprecision(17);
    for (const auto& [t, y] : trace) out << t << "," << y << "\n";
}

} // namespace snrisk
