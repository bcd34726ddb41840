#include "persuasion/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "persuasion/types.hpp"

namespace persuasion {

std::string fmt(double value, int precision) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, value);
    return buf;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char byte : data) {
        hash ^= byte;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read file for digest: " + path);
    std::ostringstream contents;
    contents << in.rdbuf();
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(contents.str())));
    return buf;
}

void write_manifest(std::ostream& out, const std::string& subcommand,
                    std::vector<std::pair<std::string, std::string>> config,
                    const std::vector<std::pair<std::string, std::string>>& inputs) {
    out << "tool persuasion " << kToolVersion << "\n";
    out << "subcommand " << subcommand << "\n";
    std::sort(config.begin(), config.end());
    for (const auto& [key, value] : config) out << "config " << key << " " << value << "\n";
    for (const auto& [name, digest] : inputs) out << "input " << name << " " << digest << "\n";
}

}  // namespace persuasion
