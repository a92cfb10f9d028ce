#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "blowup/model.hpp"

namespace blowup {

/// Outcome of one numerical check, serializable to the report schema.
struct CheckReport {
    std::string check_name;
    nlohmann::json params = nlohmann::json::object();
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
    nlohmann::json details = nlohmann::json::object();
};

nlohmann::json to_json(const CheckReport& r);
nlohmann::json params_json(const Params& params);

/// Shortest round-trip-safe decimal with 17 significant digits, locale free.
std::string format_number(double v);

/// Writes a header plus rows; each row is already a list of numbers.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

/// Array of objects keyed by header names.
nlohmann::json table_json(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

void write_json(const std::string& path, const nlohmann::json& j);

extern const char* const kVersion;

}  // namespace blowup
