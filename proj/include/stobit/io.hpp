#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "stobit/diagnostics.hpp"
#include "stobit/estimation.hpp"
#include "stobit/stingarch.hpp"

namespace stobit::io {

/// Malformed or unreadable input; `row` is the 1-based file line (0 when not tied to a line).
class IngestionError : public std::runtime_error {
public:
    IngestionError(const std::string& message, std::size_t row);
    [[nodiscard]] std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

/// Reads a count series: first column nonnegative integers, further columns real covariates.
/// A first line whose leading field is not numeric is taken as a header; a header starting with
/// `t` or `time` marks a leading index column, which is skipped.
[[nodiscard]] CountSeries parse_count_csv(std::istream& in, std::optional<long> bound = std::nullopt);
[[nodiscard]] CountSeries read_count_csv(const std::string& path, std::optional<long> bound = std::nullopt);

/// Writes `t,count[,z1..]` rows with covariates at 17 significant digits.
void write_series_csv(std::ostream& out, const CountSeries& series);

/// "%.17g" formatting.
[[nodiscard]] std::string format_number(double v);

[[nodiscard]] nlohmann::json to_json(const FitResult& fit);
[[nodiscard]] FitResult fit_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const MomentSummary& summary);
[[nodiscard]] nlohmann::json to_json(const ResidualReport& report);
[[nodiscard]] nlohmann::json to_json(const McStudyResult& result);

}  // namespace stobit::io
