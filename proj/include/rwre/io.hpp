/*
   Copyright 2026 The rwre Authors

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

#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rwre/walk.hpp"

namespace rwre {

// CSV streams start with one '#'-prefixed JSON header line.

inline void write_csv_header(std::ostream& out, const nlohmann::json& header, const std::string& columns)
{
    out << "# " << header.dump() << '\n' << columns << '\n';
}

inline void write_walk_rows(std::ostream& out, const WalkPath& path, std::size_t sample)
{
    for (std::size_t k = 0; k < path.positions.size(); ++k) out << sample << ',' << k << ',' << path.positions[k] << '\n';
}

inline void write_walk_csv(std::ostream& out, const WalkPath& path, const nlohmann::json& header)
{
    write_csv_header(out, header, "k,x");
    for (std::size_t k = 0; k < path.positions.size(); ++k) out << k << ',' << path.positions[k] << '\n';
}

/// Fixed-format real for CSV cells: shortest text that round-trips.
inline std::string format_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // prefer the shorter %.15g spelling when it reads back identically
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.15g", v);
    return std::strtod(shorter, nullptr) == v ? std::string(shorter) : std::string(buf);
}

} // namespace rwre
