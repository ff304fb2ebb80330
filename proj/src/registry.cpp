#include "hepchain/registry.hpp"

namespace hepchain {

const char* to_string(RegistrationError e)
{
    switch (e) {
    case RegistrationError::DuplicateIdentity: return "DuplicateIdentity";
    case RegistrationError::DuplicateAddress: return "DuplicateAddress";
    }
    return "?";
}

std::optional<RegistrationError> MinerRegistry::register_miner(const std::string& real_id, const Address& address,
                                                               const HashDigest& auth_key)
{
    if (identities_.contains(real_id)) return RegistrationError::DuplicateIdentity;
    if (entries_.contains(address)) return RegistrationError::DuplicateAddress;
    identities_.insert(real_id);
    entries_.emplace(address, RegistryEntry{real_id, auth_key, false});
    return std::nullopt;
}

std::optional<BanError> MinerRegistry::ban(const Address& address)
{
    auto it = entries_.find(address);
    if (it == entries_.end()) return BanError::UnknownAddress;
    it->second.banned = true;
    return std::nullopt;
}

const RegistryEntry* MinerRegistry::find(const Address& address) const
{
    auto it = entries_.find(address);
    return it == entries_.end() ? nullptr : &it->second;
}

bool MinerRegistry::is_banned(const Address& address) const
{
    const auto* e = find(address);
    return e && e->banned;
}

} // namespace hepchain
