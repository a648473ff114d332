#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "xview/numerics/array.hpp"

namespace xview::num {

// Ordered name -> array container, the on-disk parameter format.
//
// Layout (all integers little-endian):
//   magic   "XVW1"  (4 bytes)
//   version u32     (currently 1)
//   crc32   u32     (CRC-32/ISO-HDLC over the entry section)
//   count   u64
//   entries count times:
//     name_len u32, name bytes,
//     ndim     u32, extents u64[ndim],
//     data     f64[product(extents)]
//
// Entries keep their insertion order, so save -> load -> save is
// byte-identical.
struct NamedArrays {
    std::vector<std::pair<std::string, Array>> items;

    void add(std::string name, Array value);
    const Array* find(const std::string& name) const;
    bool contains(const std::string& name) const { return find(name) != nullptr; }
};

void save_arrays(const std::filesystem::path& path, const NamedArrays& arrays);
// Throws std::runtime_error on bad magic, unsupported version, or checksum
// mismatch.
NamedArrays load_arrays(const std::filesystem::path& path);

std::uint32_t crc32(const std::uint8_t* data, std::size_t len);

}  // namespace xview::num
