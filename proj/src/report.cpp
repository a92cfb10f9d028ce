#include "blowup/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "blowup/errors.hpp"

namespace blowup {

const char* const kVersion = "1.0.0";

namespace {

nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

nlohmann::json to_json(const CheckReport& r) {
    return {{"check_name", r.check_name}, {"params", r.params},       {"result", r.pass ? "pass" : "fail"},
            {"measured", number(r.measured)}, {"bound", number(r.bound)}, {"tolerance", number(r.tolerance)},
            {"details", r.details}};
}

nlohmann::json params_json(const Params& params) {
    return {{"p", params.p},
            {"n", params.n},
            {"alpha", params.alpha},
            {"rel_tol", params.rel_tol},
            {"abs_tol", params.abs_tol},
            {"eta_max", params.eta_max}};
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_number(row[i]);
        }
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParameterError("cannot write " + path);
    f << csv_text(header, rows);
    if (!f) throw ParameterError("write failed: " + path);
}

nlohmann::json table_json(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    auto arr = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json o = nlohmann::json::object();
        for (std::size_t i = 0; i < header.size() && i < row.size(); ++i) o[header[i]] = number(row[i]);
        arr.push_back(o);
    }
    return arr;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParameterError("cannot write " + path);
    f << j.dump(2) << '\n';
    if (!f) throw ParameterError("write failed: " + path);
}

}  // namespace blowup
