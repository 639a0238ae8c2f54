#include "openpixel/maps.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace openpixel {

void ProbabilityMap::validate(double tol) const {
    if (static_cast<int64_t>(p.size()) != h * w * n_classes)
        throw std::runtime_error("probability map storage does not match its dimensions");
    for (int64_t i = 0; i < h * w; ++i) {
        const float* row = p.data() + i * n_classes;
        double sum = 0.0;
        for (int64_t c = 0; c < n_classes; ++c) {
            if (!(row[c] >= 0.0f && row[c] <= 1.0f) || !std::isfinite(row[c]))
                throw std::runtime_error("probability map value outside [0,1] at pixel " +
                                         std::to_string(i));
            sum += row[c];
        }
        if (std::abs(sum - 1.0) > tol)
            throw std::runtime_error("probability map pixel " + std::to_string(i) +
                                     " sums to " + std::to_string(sum));
    }
}

namespace {
constexpr char kProbMagic[8] = {'O', 'P', 'X', 'P', 'R', 'O', 'B', '1'};

template <typename V>
void write_raw(std::ostream& os, const V& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V read_raw(std::istream& is, const char* field) {
    V v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(V));
    if (!is) throw std::runtime_error(std::string("probability map: truncated reading ") + field);
    return v;
}
}  // namespace

void save_probability_map(const ProbabilityMap& map, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os.write(kProbMagic, sizeof(kProbMagic));
    write_raw<uint64_t>(os, static_cast<uint64_t>(map.h));
    write_raw<uint64_t>(os, static_cast<uint64_t>(map.w));
    write_raw<uint64_t>(os, static_cast<uint64_t>(map.n_classes));
    os.write(reinterpret_cast<const char*>(map.p.data()),
             static_cast<std::streamsize>(map.p.size() * sizeof(float)));
    if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

ProbabilityMap load_probability_map(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open probability map '" + path + "'");
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kProbMagic, sizeof(magic)) != 0)
        throw std::runtime_error("'" + path + "' is not a probability map (bad magic)");
    const auto h = static_cast<int64_t>(read_raw<uint64_t>(is, "height"));
    const auto w = static_cast<int64_t>(read_raw<uint64_t>(is, "width"));
    const auto c = static_cast<int64_t>(read_raw<uint64_t>(is, "n_classes"));
    if (h <= 0 || w <= 0 || c <= 0 || h > (1 << 20) || w > (1 << 20) || c > 4096)
        throw std::runtime_error("'" + path + "' has implausible dimensions");
    ProbabilityMap map(h, w, c);
    is.read(reinterpret_cast<char*>(map.p.data()),
            static_cast<std::streamsize>(map.p.size() * sizeof(float)));
    if (!is) throw std::runtime_error("'" + path + "' is truncated");
    return map;
}

}  // namespace openpixel
