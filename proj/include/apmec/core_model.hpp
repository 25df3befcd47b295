#ifndef APMEC_CORE_MODEL_HPP
#define APMEC_CORE_MODEL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace apmec {

using NfTypeId = std::uint32_t;
using OfferedId = std::uint64_t;
using RequestId = std::uint64_t;

/// Per-type instance counts, keyed by NF type id. Ordered so iteration is
/// deterministic.
using CountMap = std::map<NfTypeId, std::uint32_t>;

struct NfType
{
    NfTypeId id = 0;
    std::string name;
};

class ModelError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense name <-> id registry of network function types.
///
/// Names are registered on first use unless the catalog is sealed, in which
/// case resolving an unknown name throws.
class NfCatalog
{
public:
    NfCatalog() = default;

    /// Catalog with types "nf0".."nf<n-1>".
    static NfCatalog with_generic_types(std::size_t n);

    NfTypeId resolve(std::string_view name);
    std::optional<NfTypeId> find(std::string_view name) const;
    const NfType& at(NfTypeId id) const;

    std::size_t size() const { return types_.size(); }
    bool sealed() const { return sealed_; }
    void seal() { sealed_ = true; }

private:
    std::vector<NfType> types_;
    std::unordered_map<std::string, NfTypeId> by_name_;
    bool sealed_ = false;
};

/// A network service as an unordered multiset of NF types.
class NSSpec
{
public:
    NSSpec() = default;
    /// Throws ModelError if any count is zero.
    explicit NSSpec(CountMap members);

    const CountMap& members() const { return members_; }
    bool empty() const { return members_.empty(); }
    std::size_t size() const { return members_.size(); }
    bool contains(NfTypeId type) const { return members_.count(type) != 0; }
    /// Zero for types not in the NS.
    std::uint32_t count(NfTypeId type) const;

    friend bool operator==(const NSSpec&, const NSSpec&) = default;

private:
    CountMap members_;
};

/// Total number of NF instances (VMs) the NS needs.
std::uint64_t footprint(const NSSpec& ns);

/// Types present in both services, ascending.
std::vector<NfTypeId> overlap_types(const NSSpec& a, const NSSpec& b);

struct MEASpec
{
    std::string name;
    std::uint32_t vcpus = 1;
    std::uint32_t memory_mb = 512;

    friend bool operator==(const MEASpec&, const MEASpec&) = default;
};

void validate(const MEASpec& mea);

struct MESRequest
{
    RequestId id = 0;
    MEASpec mea;
    NSSpec ns;

    friend bool operator==(const MESRequest&, const MESRequest&) = default;
};

/// A deployed network service whose instances may be shared.
///
/// reuse_count[i] is the number of services currently holding type i of this
/// NS, the owner included, so a freshly deployed NS starts at 1 per type.
struct OfferedNS
{
    OfferedId id = 0;
    NSSpec spec;
    CountMap reuse_count;

    static OfferedNS deployed(OfferedId id, NSSpec spec);

    friend bool operator==(const OfferedNS&, const OfferedNS&) = default;
};

std::string to_string(const NSSpec& ns);

} // namespace apmec

#endif
