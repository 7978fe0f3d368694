#include "metaconf/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "metaconf/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "artifact files are little-endian; big-endian hosts need byte swaps");

namespace metaconf {

void BinaryWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void BinaryWriter::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void BinaryWriter::f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    u64(bits);
}

void BinaryWriter::str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void BinaryWriter::f64_vec(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
}

void BinaryWriter::matrix(const Matrix& m) {
    u64(m.rows());
    u64(m.cols());
    for (double x : m.data()) f64(x);
}

void BinaryWriter::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes_.data()),
              static_cast<std::streamsize>(bytes_.size()));
    if (!out) fail(ErrorCode::IoError, "write failed: " + path);
}

BinaryReader BinaryReader::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return BinaryReader(std::move(bytes));
}

void BinaryReader::need(std::size_t n) {
    if (pos_ + n > bytes_.size())
        fail(ErrorCode::FormatError, "truncated artifact data");
}

std::uint8_t BinaryReader::u8() {
    need(1);
    return bytes_[pos_++];
}

std::uint32_t BinaryReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
}

std::uint64_t BinaryReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
}

double BinaryReader::f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

std::string BinaryReader::str() {
    std::uint32_t len = u32();
    need(len);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
    pos_ += len;
    return s;
}

std::vector<double> BinaryReader::f64_vec() {
    std::uint64_t n = u64();
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
}

Matrix BinaryReader::matrix() {
    std::uint64_t rows = u64();
    std::uint64_t cols = u64();
    Matrix m(rows, cols);
    for (double& x : m.data()) x = f64();
    return m;
}

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace metaconf
