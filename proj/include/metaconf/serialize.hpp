#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metaconf/matrix.hpp"

namespace metaconf {

/// Little-endian binary writer backed by a byte buffer. All artifact files
/// (base model, probes, meta-models) go through this so round-trips are
/// byte-exact.
class BinaryWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v);
    void str(const std::string& s);
    void f64_vec(const std::vector<double>& v);
    void matrix(const Matrix& m);

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    void write_file(const std::string& path) const;

private:
    std::vector<std::uint8_t> bytes_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::vector<std::uint8_t> bytes)
        : bytes_(std::move(bytes)) {}
    static BinaryReader from_file(const std::string& path);

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64();
    std::string str();
    std::vector<double> f64_vec();
    Matrix matrix();

    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n);
    std::vector<std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

/// FNV-1a 64-bit hash; fingerprints base-model parameter bytes so probe
/// sets can detect a stale base.
std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes);

} // namespace metaconf
