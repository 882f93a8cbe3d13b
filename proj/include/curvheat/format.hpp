#pragma once

#include <string>
#include <vector>

namespace curvheat {

// Locale-independent decimal formatting, 17 significant digits.
std::string fmt17(double x);

// Minimal CSV table: header row + rows, all fields preformatted.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const;
};

}  // namespace curvheat
