#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hepchain {

/// 32-byte SHA-256 output.
struct HashDigest {
    std::array<std::uint8_t, 32> bytes{};

    static HashDigest zero() { return {}; }
    static std::optional<HashDigest> from_hex(std::string_view hex);

    std::string to_hex() const;
    bool is_zero() const;

    auto operator<=>(const HashDigest&) const = default;
};

/// Opaque 32-byte node identifier.
struct Address {
    std::array<std::uint8_t, 32> bytes{};

    static std::optional<Address> from_hex(std::string_view hex);
    /// Address derived as SHA-256 of an ASCII label.
    static Address from_label(std::string_view label);

    std::string to_hex() const;
    /// First 8 hex characters, for logs and tables.
    std::string short_hex() const;

    auto operator<=>(const Address&) const = default;
};

/// SHA-256("root-authority"). Known to every node.
const Address& root_address();

HashDigest sha256(std::span<const std::uint8_t> data);
HashDigest sha256(std::string_view text);

/// Append-only big-endian encoder used for every hashed serialization.
class ByteWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    /// IEEE-754 bit pattern, big-endian.
    void f64(double v);
    void bytes(std::span<const std::uint8_t> data);
    void digest(const HashDigest& h) { bytes(h.bytes); }
    void address(const Address& a) { bytes(a.bytes); }

    const std::vector<std::uint8_t>& data() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

  private:
    std::vector<std::uint8_t> buf_;
};

/// Counterpart of ByteWriter. Throws std::out_of_range on truncated input.
class ByteReader {
  public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64();
    HashDigest digest();
    Address address();

    bool at_end() const { return pos_ == data_.size(); }

  private:
    std::span<const std::uint8_t> take(std::size_t n);

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

std::string to_hex(std::span<const std::uint8_t> data);
std::optional<std::vector<std::uint8_t>> from_hex(std::string_view hex);

} // namespace hepchain
