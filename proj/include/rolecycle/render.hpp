#pragma once

#include <string>
#include <vector>

namespace rolecycle {

/// Fixed-width aligned table; byte-identical for equal inputs.
inline std::string render_table(const std::vector<std::string>& headers,
                                const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> widths(headers.size());
    for (size_t i = 0; i < headers.size(); ++i) widths[i] = headers[i].size();
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size() && i < widths.size(); ++i) {
            widths[i] = std::max(widths[i], row[i].size());
        }
    }
    auto emit_row = [&](const std::vector<std::string>& cells) {
        std::string line;
        for (size_t i = 0; i < widths.size(); ++i) {
            std::string cell = i < cells.size() ? cells[i] : "";
            cell.resize(widths[i], ' ');
            line += cell;
            if (i + 1 < widths.size()) line += "  ";
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        return line + "\n";
    };
    std::string out = emit_row(headers);
    std::string rule;
    for (size_t i = 0; i < widths.size(); ++i) {
        rule += std::string(widths[i], '-');
        if (i + 1 < widths.size()) rule += "  ";
    }
    out += rule + "\n";
    for (const auto& row : rows) out += emit_row(row);
    return out;
}

}  // namespace rolecycle
