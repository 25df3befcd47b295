#ifndef APMEC_DESCRIPTOR_HPP
#define APMEC_DESCRIPTOR_HPP

#include "apmec/core_model.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace apmec {

inline constexpr std::string_view kMesdVersion = "apmec-sim/1";

enum class AlarmAction { scale_out, heal };

std::string_view to_string(AlarmAction action);

struct AlarmConfig
{
    std::string metric;
    double threshold = 0;
    AlarmAction action = AlarmAction::scale_out;

    friend bool operator==(const AlarmConfig&, const AlarmConfig&) = default;
};

struct MeadDesc
{
    MEASpec mea;
    std::optional<AlarmConfig> alarm;

    friend bool operator==(const MeadDesc&, const MeadDesc&) = default;
};

struct VnfEntry
{
    std::string type;
    std::uint32_t instances = 1;

    friend bool operator==(const VnfEntry&, const VnfEntry&) = default;
};

/// MEC service descriptor: one application part and one network service part.
struct MESD
{
    std::string version{kMesdVersion};
    std::string name;
    MeadDesc mead;
    std::vector<VnfEntry> vnfs;
    /// Forwarding order; kept for round-tripping, ignored by placement.
    std::optional<std::vector<std::string>> chain;

    friend bool operator==(const MESD&, const MESD&) = default;
};

enum class DescriptorErrorKind {
    syntax_error,
    unknown_version,
    missing_section,
    missing_field,
    unknown_key,
    invalid_value,
    duplicate_type,
    bad_chain,
};

std::string_view to_string(DescriptorErrorKind kind);

class DescriptorError : public std::runtime_error
{
public:
    /// `line` is 1-based; 0 when no position applies.
    DescriptorError(DescriptorErrorKind kind, std::string what, int line = 0);

    DescriptorErrorKind kind() const { return kind_; }
    int line() const { return line_; }

private:
    DescriptorErrorKind kind_;
    int line_;
};

/// Parses and validates a descriptor document. Unknown keys are errors.
MESD parse_mesd(std::string_view text);

/// Reads `path` and parses it. Throws std::runtime_error if the file cannot
/// be read, DescriptorError for content problems.
MESD load_mesd(const std::filesystem::path& path);

/// Checks the structural invariants of an in-memory descriptor.
void validate(const MESD& mesd);

/// Block-style document that parse_mesd reads back to an equal MESD.
std::string serialize_mesd(const MESD& mesd);

/// Lowers the network service part onto `catalog` ids. Chain order is dropped.
/// Throws ModelError for names a sealed catalog does not know.
MESRequest to_request(const MESD& mesd, NfCatalog& catalog, RequestId id = 0);

} // namespace apmec

#endif
