#include "apmec/core_model.hpp"

#include <numeric>
#include <sstream>

namespace apmec {

NfCatalog NfCatalog::with_generic_types(std::size_t n)
{
    NfCatalog catalog;
    for (std::size_t i = 0; i < n; ++i) {
        catalog.resolve("nf" + std::to_string(i));
    }
    return catalog;
}

NfTypeId NfCatalog::resolve(std::string_view name)
{
    if (auto id = find(name)) {
        return *id;
    }
    if (sealed_) {
        throw ModelError("unknown NF type '" + std::string(name) + "'");
    }
    const auto id = static_cast<NfTypeId>(types_.size());
    types_.push_back({id, std::string(name)});
    by_name_.emplace(std::string(name), id);
    return id;
}

std::optional<NfTypeId> NfCatalog::find(std::string_view name) const
{
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const NfType& NfCatalog::at(NfTypeId id) const
{
    if (id >= types_.size()) {
        throw ModelError("NF type id " + std::to_string(id) + " out of range");
    }
    return types_[id];
}

NSSpec::NSSpec(CountMap members) : members_(std::move(members))
{
    for (const auto& [type, n] : members_) {
        if (n == 0) {
            throw ModelError("NF type " + std::to_string(type) + " listed with zero instances");
        }
    }
}

std::uint32_t NSSpec::count(NfTypeId type) const
{
    auto it = members_.find(type);
    return it == members_.end() ? 0 : it->second;
}

std::uint64_t footprint(const NSSpec& ns)
{
    return std::accumulate(ns.members().begin(), ns.members().end(), std::uint64_t{0},
                           [](std::uint64_t acc, const auto& kv) { return acc + kv.second; });
}

std::vector<NfTypeId> overlap_types(const NSSpec& a, const NSSpec& b)
{
    std::vector<NfTypeId> out;
    auto ia = a.members().begin();
    auto ib = b.members().begin();
    while (ia != a.members().end() && ib != b.members().end()) {
        if (ia->first < ib->first) {
            ++ia;
        } else if (ib->first < ia->first) {
            ++ib;
        } else {
            out.push_back(ia->first);
            ++ia;
            ++ib;
        }
    }
    return out;
}

void validate(const MEASpec& mea)
{
    if (mea.vcpus < 1) {
        throw ModelError("MEA '" + mea.name + "' needs at least one vcpu");
    }
    if (mea.memory_mb < 1) {
        throw ModelError("MEA '" + mea.name + "' needs memory_mb >= 1");
    }
}

OfferedNS OfferedNS::deployed(OfferedId id, NSSpec spec)
{
    OfferedNS ns{id, std::move(spec), {}};
    for (const auto& [type, n] : ns.spec.members()) {
        ns.reuse_count[type] = 1;
    }
    return ns;
}

std::string to_string(const NSSpec& ns)
{
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (const auto& [type, n] : ns.members()) {
        if (!first) {
            os << ',';
        }
        first = false;
        os << type << ':' << n;
    }
    os << '}';
    return os.str();
}

} // namespace apmec
