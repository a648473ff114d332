#include "xview/numerics/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace xview::num {

namespace {

constexpr std::array<char, 4> kMagic{'X', 'V', 'W', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& buf, T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    buf.insert(buf.end(), p, p + sizeof(T));
}

template <typename T>
T take(const std::vector<std::uint8_t>& buf, std::size_t& off) {
    if (off + sizeof(T) > buf.size()) throw std::runtime_error("checkpoint: truncated file");
    T v;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace

std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

void NamedArrays::add(std::string name, Array value) {
    items.emplace_back(std::move(name), std::move(value));
}

const Array* NamedArrays::find(const std::string& name) const {
    for (const auto& [n, a] : items) {
        if (n == name) return &a;
    }
    return nullptr;
}

void save_arrays(const std::filesystem::path& path, const NamedArrays& arrays) {
    std::vector<std::uint8_t> body;
    put<std::uint64_t>(body, arrays.items.size());
    for (const auto& [name, arr] : arrays.items) {
        put<std::uint32_t>(body, static_cast<std::uint32_t>(name.size()));
        body.insert(body.end(), name.begin(), name.end());
        put<std::uint32_t>(body, static_cast<std::uint32_t>(arr.ndim()));
        for (std::size_t d : arr.shape()) put<std::uint64_t>(body, d);
        const auto* p = reinterpret_cast<const std::uint8_t*>(arr.data());
        body.insert(body.end(), p, p + arr.size() * sizeof(double));
    }

    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, crc32(body.data(), body.size()));
    out.insert(out.end(), body.begin(), body.end());

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("checkpoint: cannot open " + tmp + " for writing");
        f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
        if (!f) throw std::runtime_error("checkpoint: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

NamedArrays load_arrays(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path.string());
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());

    std::size_t off = 0;
    if (buf.size() < 12 || std::memcmp(buf.data(), kMagic.data(), 4) != 0) {
        throw std::runtime_error("checkpoint: bad magic in " + path.string());
    }
    off = 4;
    const auto version = take<std::uint32_t>(buf, off);
    if (version != kVersion) {
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto expected_crc = take<std::uint32_t>(buf, off);
    const auto actual_crc = crc32(buf.data() + off, buf.size() - off);
    if (expected_crc != actual_crc) {
        throw std::runtime_error("checkpoint: checksum mismatch in " + path.string());
    }

    NamedArrays arrays;
    const auto count = take<std::uint64_t>(buf, off);
    for (std::uint64_t e = 0; e < count; ++e) {
        const auto name_len = take<std::uint32_t>(buf, off);
        if (off + name_len > buf.size()) throw std::runtime_error("checkpoint: truncated name");
        std::string name(reinterpret_cast<const char*>(buf.data() + off), name_len);
        off += name_len;
        const auto ndim = take<std::uint32_t>(buf, off);
        std::vector<std::size_t> shape(ndim);
        for (auto& d : shape) d = static_cast<std::size_t>(take<std::uint64_t>(buf, off));
        const std::size_t n = shape_product(shape);
        if (off + n * sizeof(double) > buf.size()) {
            throw std::runtime_error("checkpoint: truncated payload for " + name);
        }
        std::vector<double> data(n);
        std::memcpy(data.data(), buf.data() + off, n * sizeof(double));
        off += n * sizeof(double);
        arrays.add(std::move(name), Array(std::move(shape), std::move(data)));
    }
    return arrays;
}

}  // namespace xview::num
