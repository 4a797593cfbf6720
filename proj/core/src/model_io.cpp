#include "armd/model_io.hpp"

#include <boost/crc.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace armd {

namespace {

constexpr std::array<std::uint8_t, 8> kMagic = {'A', 'R', 'M', 'D', 'M', 'O', 'D', 'L'};
constexpr std::size_t kHeaderBytes = 8 + 4 + 4 + 4 + 8 * 5;

class Writer {
public:
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f64s(std::span<const double> vs) {
        for (double v : vs) {
            f64(v);
        }
    }
    void raw(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    void put(std::uint64_t v, int width) {
        for (int i = 0; i < width; ++i) {
            bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::vector<double> f64s(std::size_t n) {
        std::vector<double> out(n);
        for (double& v : out) {
            v = f64();
        }
        return out;
    }

private:
    std::uint64_t get(int width) {
        if (pos_ + static_cast<std::size_t>(width) > bytes_.size()) {
            throw ModelChecksumError("model file: unexpected end of data");
        }
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) {
            v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        }
        return v;
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t narrow(std::size_t v, const char* what) {
    if (v > 0xFFFFFFFFu) {
        throw std::invalid_argument(std::string("save_model: ") + what + " too large");
    }
    return static_cast<std::uint32_t>(v);
}

}  // namespace

ModelVersionError::ModelVersionError(std::uint32_t found, std::uint32_t expected)
    : ModelFileError("model file: format version " + std::to_string(found) +
                     " is not supported (expected version " + std::to_string(expected) + ")"),
      found_(found),
      expected_(expected) {}

std::uint64_t crc64(std::span<const std::uint8_t> bytes) {
    boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, ~0ULL, ~0ULL, true, true> crc;
    crc.process_bytes(bytes.data(), bytes.size());
    return crc.checksum();
}

std::vector<std::uint8_t> serialize_model(const DevolutionModel& model,
                                          const NormalizationStats& stats,
                                          const DiffusionSchedule& schedule) {
    if (schedule.horizon != model.horizon()) {
        throw std::invalid_argument("save_model: schedule horizon does not match model");
    }
    if (stats.mean.size() != stats.std.size()) {
        throw std::invalid_argument("save_model: inconsistent normalization statistics");
    }
    Writer w;
    w.raw(kMagic);
    w.u32(kModelFormatVersion);
    w.u32(narrow(model.horizon(), "horizon"));
    w.u32(narrow(stats.mean.size(), "channel count"));
    w.f64(model.balance().b);
    w.f64(model.balance().c);
    w.f64(model.balance().d);
    w.f64(schedule.beta_start);
    w.f64(schedule.beta_end);
    w.f64s(model.weight());
    w.f64s(model.bias());
    w.f64s(model.w_logits());
    w.f64s(stats.mean);
    w.f64s(stats.std);
    w.u64(crc64(w.bytes()));
    return std::move(w.bytes());
}

ModelArtifact deserialize_model(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= kMagic.size() &&
        !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw ModelFormatError("model file: bad magic bytes (not an ARMD model)");
    }
    if (bytes.size() < kMagic.size() + 4) {
        throw ModelChecksumError("model file: truncated header");
    }
    Reader header(bytes.subspan(kMagic.size()));
    const std::uint32_t version = header.u32();
    if (version != kModelFormatVersion) {
        throw ModelVersionError(version, kModelFormatVersion);
    }
    if (bytes.size() < kHeaderBytes + 8) {
        throw ModelChecksumError("model file: truncated header");
    }
    const std::uint32_t horizon = header.u32();
    const std::uint32_t channels = header.u32();
    const std::uint64_t n_values = static_cast<std::uint64_t>(horizon) * horizon + 2ULL * horizon +
                                   2ULL * channels;
    const std::uint64_t expected = kHeaderBytes + 8 * n_values + 8;
    if (bytes.size() != expected) {
        std::ostringstream msg;
        msg << "model file: size " << bytes.size() << " bytes does not match the " << expected
            << " bytes implied by its header (truncated or corrupt)";
        throw ModelChecksumError(msg.str());
    }
    const auto payload = bytes.first(bytes.size() - 8);
    const std::uint64_t stored = Reader(bytes.last(8)).u64();
    const std::uint64_t actual = crc64(payload);
    if (stored != actual) {
        std::ostringstream msg;
        msg << "model file: checksum mismatch (stored " << std::hex << stored << ", computed "
            << actual << ")";
        throw ModelChecksumError(msg.str());
    }
    if (horizon == 0 || channels == 0) {
        throw ModelFormatError("model file: zero horizon or channel count");
    }

    BalanceParams balance;
    balance.b = header.f64();
    balance.c = header.f64();
    balance.d = header.f64();
    const double beta_start = header.f64();
    const double beta_end = header.f64();

    Reader body(payload.subspan(kHeaderBytes));
    std::vector<double> weight = body.f64s(static_cast<std::size_t>(horizon) * horizon);
    std::vector<double> bias = body.f64s(horizon);
    std::vector<double> logits = body.f64s(horizon);
    NormalizationStats stats;
    stats.mean = body.f64s(channels);
    stats.std = body.f64s(channels);

    try {
        return {DevolutionModel(horizon, balance, std::move(weight), std::move(bias),
                                std::move(logits)),
                std::move(stats), build_schedule(horizon, beta_start, beta_end)};
    } catch (const std::invalid_argument& e) {
        throw ModelFormatError(std::string("model file: invalid contents: ") + e.what());
    }
}

void save_model(const DevolutionModel& model, const NormalizationStats& stats,
                const DiffusionSchedule& schedule, const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = serialize_model(model, stats, schedule);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ModelFileError("save_model: cannot open " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw ModelFileError("save_model: write failed for " + path.string());
    }
}

ModelArtifact load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ModelFileError("load_model: cannot open " + path.string());
    }
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                          std::istreambuf_iterator<char>()};
    return deserialize_model(bytes);
}

}  // namespace armd
