#pragma once

#include <json.hpp>

namespace escape {

// All machine-readable verification reports share one envelope so harnesses
// can pin the layout: {"schema":1, "ok":bool, "violations":[...]}.
inline constexpr int kReportSchema = 1;

inline nlohmann::json report_envelope(nlohmann::json violations) {
    return nlohmann::json{{"schema", kReportSchema},
                          {"ok", violations.empty()},
                          {"violations", std::move(violations)}};
}

} // namespace escape
