#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "hepchain/hash.hpp"

namespace hepchain {

struct RegistryEntry {
    std::string real_id;
    HashDigest auth_key; ///< verification material for transaction auth tags
    bool banned = false;
};

enum class RegistrationError { DuplicateIdentity, DuplicateAddress };
enum class BanError { UnknownAddress };

const char* to_string(RegistrationError e);

/// Identity-gated membership. A real-world identity maps to at most one
/// address, for life: banned identities cannot come back under a new address.
class MinerRegistry {
  public:
    std::optional<RegistrationError> register_miner(const std::string& real_id, const Address& address,
                                                    const HashDigest& auth_key);
    std::optional<BanError> ban(const Address& address);

    const RegistryEntry* find(const Address& address) const;
    bool is_registered(const Address& address) const { return find(address) != nullptr; }
    bool is_banned(const Address& address) const;

    const std::map<Address, RegistryEntry>& entries() const { return entries_; }

  private:
    std::map<Address, RegistryEntry> entries_;
    std::set<std::string> identities_;
};

} // namespace hepchain
