#include "curvheat/format.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace curvheat {

std::string fmt17(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x,
                                   std::chars_format::general, 17);
    (void)ec;
    return std::string(buf, ptr);
}

std::string CsvTable::str() const {
    std::ostringstream os;
    auto emit = [&os](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << cells[i];
        }
        os << '\n';
    };
    emit(header);
    for (const auto& r : rows) emit(r);
    return os.str();
}

}  // namespace curvheat
