/*
 Copyright 2026 The Clustile Authors
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "clustile/cli/report.hpp"

#include <array>
#include <cstdio>
#include <sstream>

namespace clustile::cli {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string chip_types_csv(std::span<const ChipTypeRow> rows) {
    std::ostringstream out;
    out << "planning,chips,sparse,common,clustered,zero\n";
    for (const auto& row : rows) {
        out << row.planning << ',' << row.counts.total();
        if (row.counts.total() == 0) {
            out << ",,,,\n";
            continue;
        }
        const auto f = to_fractions(row.counts);
        out << ',' << fixed(f.sparse, 6) << ',' << fixed(f.common, 6) << ',' << fixed(f.clustered, 6) << ','
            << fixed(f.zero, 6) << '\n';
    }
    return out.str();
}

std::string chip_types_svg(std::span<const ChipTypeRow> rows) {
    constexpr double kWidth = 640.0;
    constexpr double kHeight = 360.0;
    constexpr double kLeft = 60.0;
    constexpr double kRight = 20.0;
    constexpr double kTop = 40.0;
    constexpr double kBottom = 60.0;
    constexpr std::array<const char*, 3> kTypes{"sparse", "common", "clustered"};
    constexpr std::array<const char*, 4> kColors{"#4c72b0", "#dd8452", "#55a868", "#c44e52"};

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const double group_w = plot_w / static_cast<double>(kTypes.size());
    const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
    const double bar_w = group_w * 0.8 / n;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(kWidth, 0) << "\" height=\""
        << fixed(kHeight, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<text x=\"" << fixed(kWidth / 2, 1) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << "Chip types by planning mode</text>\n";

    for (int tick = 0; tick <= 4; ++tick) {
        const double frac = tick / 4.0;
        const double y = kTop + plot_h * (1.0 - frac);
        out << "<line x1=\"" << fixed(kLeft, 1) << "\" y1=\"" << fixed(y, 1) << "\" x2=\"" << fixed(kLeft + plot_w, 1)
            << "\" y2=\"" << fixed(y, 1) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << fixed(kLeft - 6, 1) << "\" y=\"" << fixed(y + 4, 1) << "\" text-anchor=\"end\">"
            << fixed(frac * 100.0, 0) << "%</text>\n";
    }

    for (std::size_t t = 0; t < kTypes.size(); ++t) {
        const double gx = kLeft + group_w * static_cast<double>(t) + group_w * 0.1;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].counts.total() == 0) {
                continue;
            }
            const auto f = to_fractions(rows[r].counts);
            const double v = t == 0 ? f.sparse : (t == 1 ? f.common : f.clustered);
            const double h = plot_h * v;
            out << "<rect x=\"" << fixed(gx + bar_w * static_cast<double>(r), 2) << "\" y=\""
                << fixed(kTop + plot_h - h, 2) << "\" width=\"" << fixed(bar_w, 2) << "\" height=\"" << fixed(h, 2)
                << "\" fill=\"" << kColors[r % kColors.size()] << "\"><title>" << rows[r].planning << ' '
                << kTypes[t] << ' ' << fixed(v * 100.0, 1) << "%</title></rect>\n";
        }
        out << "<text x=\"" << fixed(kLeft + group_w * (static_cast<double>(t) + 0.5), 1) << "\" y=\""
            << fixed(kTop + plot_h + 18, 1) << "\" text-anchor=\"middle\">" << kTypes[t] << "</text>\n";
    }

    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double x = kLeft + 160.0 * static_cast<double>(r);
        const double y = kHeight - 16.0;
        out << "<rect x=\"" << fixed(x, 1) << "\" y=\"" << fixed(y - 10, 1) << "\" width=\"12\" height=\"12\" fill=\""
            << kColors[r % kColors.size()] << "\"/>\n";
        out << "<text x=\"" << fixed(x + 18, 1) << "\" y=\"" << fixed(y, 1) << "\">" << rows[r].planning
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace clustile::cli
