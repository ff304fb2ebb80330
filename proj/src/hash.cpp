#include "hepchain/hash.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

#include <openssl/sha.h>

namespace hepchain {

namespace {

int nibble(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

template <typename T>
std::optional<T> fixed_from_hex(std::string_view hex)
{
    auto raw = from_hex(hex);
    T out;
    if (!raw || raw->size() != out.bytes.size()) return std::nullopt;
    std::memcpy(out.bytes.data(), raw->data(), out.bytes.size());
    return out;
}

} // namespace

std::string to_hex(std::span<const std::uint8_t> data)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

std::optional<std::vector<std::uint8_t>> from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0) return std::nullopt;
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

std::optional<HashDigest> HashDigest::from_hex(std::string_view hex)
{
    return fixed_from_hex<HashDigest>(hex);
}

std::string HashDigest::to_hex() const { return hepchain::to_hex(bytes); }

bool HashDigest::is_zero() const
{
    for (auto b : bytes)
        if (b != 0) return false;
    return true;
}

std::optional<Address> Address::from_hex(std::string_view hex)
{
    return fixed_from_hex<Address>(hex);
}

Address Address::from_label(std::string_view label)
{
    Address a;
    a.bytes = sha256(label).bytes;
    return a;
}

std::string Address::to_hex() const { return hepchain::to_hex(bytes); }

std::string Address::short_hex() const { return to_hex().substr(0, 8); }

const Address& root_address()
{
    static const Address root = Address::from_label("root-authority");
    return root;
}

HashDigest sha256(std::span<const std::uint8_t> data)
{
    HashDigest out;
    SHA256(data.data(), data.size(), out.bytes.data());
    return out;
}

HashDigest sha256(std::string_view text)
{
    return sha256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void ByteWriter::u32(std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8)
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::u64(std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8)
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::bytes(std::span<const std::uint8_t> data)
{
    buf_.insert(buf_.end(), data.begin(), data.end());
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n)
{
    if (data_.size() - pos_ < n) throw std::out_of_range("ByteReader: truncated input");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32()
{
    std::uint32_t v = 0;
    for (auto b : take(4)) v = (v << 8) | b;
    return v;
}

std::uint64_t ByteReader::u64()
{
    std::uint64_t v = 0;
    for (auto b : take(8)) v = (v << 8) | b;
    return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

HashDigest ByteReader::digest()
{
    HashDigest h;
    auto s = take(32);
    std::memcpy(h.bytes.data(), s.data(), 32);
    return h;
}

Address ByteReader::address()
{
    Address a;
    auto s = take(32);
    std::memcpy(a.bytes.data(), s.data(), 32);
    return a;
}

} // namespace hepchain
