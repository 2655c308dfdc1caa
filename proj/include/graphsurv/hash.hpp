#pragma once

#include <cstdint>
#include <string_view>

namespace graphsurv {

// FNV-1a, used to fingerprint configs and checkpoints in run manifests.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace graphsurv
