#include "cdeq/serialize.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cdeq {

static const char kMagic[8] = {'C', 'D', 'E', 'Q', 'B', 'I', 'N', '1'};

std::uint64_t fnv1a64(const void* bytes, std::size_t n, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

static void append_u64(std::string& buf, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    buf.append(b, 8);
}

static std::uint64_t read_u64(const std::string& buf, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[off + i])) << (8 * i);
    return v;
}

void write_container(const std::string& path, const json& manifest,
                     const std::vector<std::pair<std::string, const std::vector<double>*>>& blocks) {
    json man = manifest;
    man["blocks"] = json::array();
    for (const auto& [name, vec] : blocks)
        man["blocks"].push_back({{"name", name}, {"count", vec->size()}});

    std::string buf;
    buf.append(kMagic, 8);
    const std::string mtxt = man.dump();
    append_u64(buf, mtxt.size());
    buf.append(mtxt);
    for (const auto& [name, vec] : blocks) {
        (void)name;
        const std::size_t nb = vec->size() * sizeof(double);
        std::size_t off = buf.size();
        buf.resize(off + nb);
        if (nb) std::memcpy(buf.data() + off, vec->data(), nb);
    }
    append_u64(buf, fnv1a64(buf.data(), buf.size()));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("write_container: cannot open " + path);
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw std::runtime_error("write_container: write failed for " + path);
}

Container read_container(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_container: cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (buf.size() < 8 + 8 + 8 || std::memcmp(buf.data(), kMagic, 8) != 0)
        throw std::runtime_error("read_container: bad magic or truncated file: " + path);

    const std::uint64_t stored = read_u64(buf, buf.size() - 8);
    const std::uint64_t actual = fnv1a64(buf.data(), buf.size() - 8);
    if (stored != actual)
        throw std::runtime_error("read_container: checksum mismatch: " + path);

    const std::uint64_t mlen = read_u64(buf, 8);
    if (16 + mlen + 8 > buf.size())
        throw std::runtime_error("read_container: manifest length out of range: " + path);

    Container c;
    c.manifest = json::parse(buf.substr(16, mlen));
    std::size_t off = 16 + mlen;
    for (const auto& blk : c.manifest.at("blocks")) {
        const std::string name = blk.at("name").get<std::string>();
        const std::size_t count = blk.at("count").get<std::size_t>();
        const std::size_t nb = count * sizeof(double);
        if (off + nb + 8 > buf.size())
            throw std::runtime_error("read_container: payload out of range: " + path);
        std::vector<double> v(count);
        if (nb) std::memcpy(v.data(), buf.data() + off, nb);
        c.blocks.emplace(name, std::move(v));
        off += nb;
    }
    if (off + 8 != buf.size())
        throw std::runtime_error("read_container: trailing bytes: " + path);
    return c;
}

}  // namespace cdeq
