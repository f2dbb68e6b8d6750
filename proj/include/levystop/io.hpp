#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "levystop/levy_model.hpp"
#include "levystop/threshold.hpp"

namespace levystop {

using Json = nlohmann::ordered_json;

/// Parses a file into JSON; throws InputError with the parser diagnostic.
Json load_json_file(const std::string& path);
Json parse_json(std::string_view text, std::string_view origin = "<input>");

/// {"family": "kou", "m": ..., ...}. Unknown or missing keys are input errors.
LevyModel model_from_json(const Json& j);
Json model_to_json(const LevyModel& model);

/// {"model": {...}, "r": ..., "alpha": ..., "c": ..., "v": ...}; v defaults to 1.
ProblemParams params_from_json(const Json& j);
Json params_to_json(const ProblemParams& p);

/// Accepts either a full problem document or a bare model document.
LevyModel model_from_document(const Json& j);

/// Fields: b_c, regime, psi1, phi_r (nullable), roots (nullable), slope_ratio.
/// roots is [psi0, psi1, psi2, psi3] with null for slots the family lacks.
Json threshold_to_json(const ThresholdResult& th);
/// Reads b_c back from threshold_to_json output.
double b_c_from_json(const Json& j);

/// 17 significant digits, locale independent.
std::string format_double(double x);

/// RFC 4180 writer: header row, CRLF line ends, quoting only when needed.
class CsvWriter {
public:
    using Cell = std::variant<double, long long, std::string>;

    CsvWriter(std::ostream& os, const std::vector<std::string>& header);
    void row(const std::vector<Cell>& cells);

private:
    void field(const std::string& s, bool first);
    std::ostream& os_;
    std::size_t width_;
};

}  // namespace levystop
