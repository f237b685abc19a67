// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/checkpoint.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

namespace yyrf {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'Y', 'Y', 'R', 'F', 'C', 'K', 'P', 'T'};

uint64_t
fnv1a(const uint8_t *data, size_t n)
{
    uint64_t h = 0xcbf29ce484222325ULL;
    for (size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Writer
{
public:
    template <typename T>
    void put(T v)
    {
        const auto *p = reinterpret_cast<const uint8_t *>(&v);
        buf.insert(buf.end(), p, p + sizeof(T));
    }
    void bytes(const void *p, size_t n)
    {
        const auto *b = static_cast<const uint8_t *>(p);
        buf.insert(buf.end(), b, b + n);
    }
    std::vector<uint8_t> buf;
};

class Reader
{
public:
    Reader(const std::vector<uint8_t> &b, size_t end) : buf(b), limit(end) {}

    template <typename T>
    T get(const char *what)
    {
        need(sizeof(T), what);
        T v;
        std::memcpy(&v, buf.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
    void read(void *dst, size_t n, const char *what)
    {
        need(n, what);
        std::memcpy(dst, buf.data() + pos, n);
        pos += n;
    }
    void need(size_t n, const char *what) const
    {
        if (limit - pos < n) {
            throw CheckpointError(std::string("truncated checkpoint while reading ") + what, pos);
        }
    }
    size_t pos = 0;

private:
    const std::vector<uint8_t> &buf;
    size_t limit;
};

} // namespace

void
saveCheckpoint(const RadianceField &field, const std::string &path, const std::string &metadata)
{
    const GridConfig &gc = field.grid.config();
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.put<uint32_t>(kCheckpointVersion);
    w.put<int32_t>(gc.nR());
    w.put<int32_t>(gc.nTheta());
    w.put<int32_t>(gc.nPhi());
    w.put<double>(gc.r0());
    w.put<double>(gc.rMax());
    w.put<int32_t>(field.grid.nSigma());
    w.put<int32_t>(field.grid.nApp());
    w.put<int32_t>(field.grid.channels());
    w.put<int32_t>(field.mlp.hidden());
    w.put<int32_t>(field.env ? field.env->height : 0);
    w.put<int32_t>(field.env ? field.env->width : 0);
    w.put<uint32_t>(static_cast<uint32_t>(metadata.size()));
    w.bytes(metadata.data(), metadata.size());
    uint32_t count = 0;
    field.forEachTensor([&](const std::string &, std::span<const double>) { ++count; });
    w.put<uint32_t>(count);
    field.forEachTensor([&](const std::string &, std::span<const double> t) {
        w.put<uint64_t>(t.size());
        w.bytes(t.data(), t.size_bytes());
    });
    w.put<uint64_t>(fnv1a(w.buf.data(), w.buf.size()));

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp + " for writing");
        }
        out.write(reinterpret_cast<const char *>(w.buf.data()), static_cast<std::streamsize>(w.buf.size()));
        out.close();
        if (!out) {
            throw IoError("failed writing checkpoint " + tmp);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot move checkpoint into place at " + path + ": " + ec.message());
    }
}

LoadedCheckpoint
loadCheckpoint(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open checkpoint " + path);
    }
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < sizeof kMagic + sizeof(uint64_t)) {
        throw CheckpointError("file too short to be a checkpoint", buf.size());
    }
    if (std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0) {
        throw CheckpointError("bad magic, not a yyrf checkpoint", 0);
    }
    const size_t body = buf.size() - sizeof(uint64_t);
    Reader r(buf, body);
    r.pos = sizeof kMagic;
    uint32_t version = r.get<uint32_t>("version");
    if (version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                                  std::to_string(kCheckpointVersion) + ")",
                              sizeof kMagic);
    }
    const size_t geomAt = r.pos;
    int nR = r.get<int32_t>("grid config");
    int nTheta = r.get<int32_t>("grid config");
    int nPhi = r.get<int32_t>("grid config");
    double r0 = r.get<double>("grid config");
    double rMax = r.get<double>("grid config");
    int nSigma = r.get<int32_t>("component counts");
    int nApp = r.get<int32_t>("component counts");
    int channels = r.get<int32_t>("component counts");
    int hidden = r.get<int32_t>("decoder width");
    int envH = r.get<int32_t>("environment size");
    int envW = r.get<int32_t>("environment size");
    uint32_t metaLen = r.get<uint32_t>("metadata length");
    LoadedCheckpoint out;
    out.metadata.resize(metaLen);
    r.read(out.metadata.data(), metaLen, "metadata");

    std::optional<GridConfig> gc;
    try {
        gc = GridConfig::make(nR, nTheta, nPhi, r0, rMax);
        if (nSigma < 1 || nApp < 1 || channels < 1 || hidden < 1 || envH < 0 || envW < 0 ||
            (envH == 0) != (envW == 0)) {
            throw InputError("invalid component counts");
        }
    } catch (const InputError &e) {
        throw CheckpointError(std::string("corrupt header: ") + e.what(), geomAt);
    }
    // Reject absurd sizes before allocating.
    const double cells = static_cast<double>(nR) * nTheta + static_cast<double>(nTheta) * nPhi +
                         static_cast<double>(nPhi) * nR;
    if (cells * (nSigma + nApp) * 2.0 > static_cast<double>(buf.size())) {
        throw CheckpointError("header describes more parameters than the file holds", geomAt);
    }

    out.field.grid = FactorizedGrid(*gc, nSigma, nApp, channels);
    out.field.mlp = Decoder(channels, hidden);
    if (envH > 0) {
        out.field.env = EnvironmentMap(envH, envW);
    }
    uint32_t count = r.get<uint32_t>("tensor count");
    uint32_t expected = 0;
    out.field.forEachTensor([&](const std::string &, std::span<double>) { ++expected; });
    if (count != expected) {
        throw CheckpointError("tensor count " + std::to_string(count) + " does not match header (expected " +
                                  std::to_string(expected) + ")",
                              r.pos - sizeof(uint32_t));
    }
    out.field.forEachTensor([&](const std::string &name, std::span<double> t) {
        size_t at = r.pos;
        uint64_t n = r.get<uint64_t>("tensor length");
        if (n != t.size()) {
            throw CheckpointError("tensor " + name + " has " + std::to_string(n) + " values, expected " +
                                      std::to_string(t.size()),
                                  at);
        }
        r.read(t.data(), t.size_bytes(), name.c_str());
    });
    if (r.pos != body) {
        throw CheckpointError("unexpected trailing bytes", r.pos);
    }
    uint64_t stored;
    std::memcpy(&stored, buf.data() + body, sizeof stored);
    if (stored != fnv1a(buf.data(), body)) {
        throw CheckpointError("checksum mismatch, file is corrupt", body);
    }
    return out;
}

LoadedCheckpoint
loadCheckpoint(const std::string &path, const GridConfig &expected)
{
    LoadedCheckpoint ck = loadCheckpoint(path);
    if (!(ck.field.grid.config() == expected)) {
        throw IoError("checkpoint grid " + ck.field.grid.config().describe() + " does not match requested grid " +
                      expected.describe());
    }
    return ck;
}

} // namespace yyrf
