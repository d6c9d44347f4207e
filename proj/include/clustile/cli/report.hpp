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

#pragma once

#include <span>
#include <string>
#include <vector>

#include "clustile/evaluation.hpp"

namespace clustile::cli {

struct ChipTypeRow {
    std::string planning;
    ChipTypeCounts counts;
};

/// planning,chips,sparse,common,clustered,zero with fractions to 6 decimals.
std::string chip_types_csv(std::span<const ChipTypeRow> rows);

/// Grouped bar chart of the sparse / common / clustered fractions per planning mode.
std::string chip_types_svg(std::span<const ChipTypeRow> rows);

/// Fixed-point formatting independent of the global locale.
std::string fixed(double v, int decimals);

}  // namespace clustile::cli
